//! Which model atoms a proof depends on, and replay checks that suggested
//! relaxations and cut diagnostics really preserve the proof.

use crate::calculus::{AnnotatedNode, AnnotatedProof, CalcError, Checker, ProofNode};
use crate::labelsets::{MutationChoice, MutationKind, MutationSet, TrackedLabelSet};
use crate::mutation::{apply, apply_sequent, MutationError, WeakeningProvider};
use crate::oracle::{Oracle, RecordedDa, Verdict};
use crate::syntax::visit::sequent_labels;
use crate::syntax::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Map, Value};
use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Usage {
    /// Only id.
    Required,
    /// W but not R.
    Weakenable,
    /// R admissible.
    Removable,
}

impl Usage {
    pub fn of(set: MutationSet) -> Usage {
        if set.contains(MutationKind::R) {
            Usage::Removable
        } else if set.contains(MutationKind::W) {
            Usage::Weakenable
        } else {
            Usage::Required
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Usage::Required => "required",
            Usage::Weakenable => "weakenable",
            Usage::Removable => "removable",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AtomUsage {
    pub label: Label,
    pub atom: String,
    pub set: MutationSet,
    pub witness: Option<String>,
    pub partners: Vec<Label>,
    pub usage: Usage,
}

#[derive(Clone, Debug, PartialEq)]
pub enum CutVerdict {
    Unchecked,
    Verified { choices: usize },
    Failed(String),
}

#[derive(Clone, Debug, PartialEq)]
pub struct CutSite {
    pub path: Vec<usize>,
    pub rule: String,
    pub xi: TrackedLabelSet,
    pub atoms: Vec<AtomUsage>,
    pub verdict: CutVerdict,
}

#[derive(Clone, Debug, PartialEq)]
pub struct UsageReport {
    pub atoms: Vec<AtomUsage>,
    pub cuts: Vec<CutSite>,
}

fn path_text(p: &[usize]) -> String {
    if p.is_empty() {
        return "root".into();
    }
    p.iter().map(usize::to_string).collect::<Vec<_>>().join(".")
}

fn first_witnesses(root: &AnnotatedNode) -> BTreeMap<Label, Atom> {
    let mut out = BTreeMap::new();
    root.walk(&mut |n| {
        if let Some(info) = &n.leaf {
            for (l, a) in &info.witnesses {
                out.entry(l.clone()).or_insert_with(|| a.clone());
            }
        }
    });
    out
}

fn fits(a: &Atom, w: &Atom) -> bool {
    match (a, w) {
        (Atom::Cmp(..), Atom::Cmp(..)) => true,
        (Atom::Assign(x, _), Atom::Assign(y, _)) => x == y,
        _ => false,
    }
}

fn usage_entry(l: &Label, atom: &Atom, set: MutationSet, sigma: &TrackedLabelSet, w: &BTreeMap<Label, Atom>) -> AtomUsage {
    // a witness recorded on a derived atom (say the equation an assignment
    // became) says nothing about the model atom itself
    let witness = w
        .get(l)
        .filter(|w| set.contains(MutationKind::W) && fits(atom, w))
        .map(print_atom);
    AtomUsage {
        label: l.clone(),
        atom: print_atom(atom),
        set,
        witness,
        partners: sigma.partners(l),
        usage: Usage::of(set),
    }
}

/// Classifies every model atom by the root set, and lists each node that
/// introduced fresh labels with its Ξ.
pub fn build_report(proof: &AnnotatedProof) -> UsageReport {
    let sigma = proof.sigma();
    let witnesses = first_witnesses(&proof.root);
    let mut seen = BTreeSet::new();
    let mut atoms = Vec::new();
    for a in atoms_of(&proof.model) {
        for l in &a.labels {
            if !seen.insert(l.clone()) {
                continue;
            }
            // absent labels would mean an engine bug; report them as pinned
            let set = sigma.lookup(l).unwrap_or(MutationSet::ID);
            atoms.push(usage_entry(l, &a.atom, set, sigma, &witnesses));
        }
    }
    atoms.sort_by(|a, b| a.label.cmp(&b.label));

    let mut cuts = Vec::new();
    proof.root.walk(&mut |n| {
        if n.fresh.is_empty() {
            return;
        }
        let text = fresh_atom_texts(n);
        let atoms = n
            .fresh
            .iter()
            .map(|l| {
                let set = n.xi.lookup(l).unwrap_or(MutationSet::ID);
                let atom = text.get(l).cloned().unwrap_or(Atom::True);
                usage_entry(l, &atom, set, &n.xi, &witnesses)
            })
            .collect();
        cuts.push(CutSite {
            path: n.path.clone(),
            rule: n.rule.clone(),
            xi: n.xi.clone(),
            atoms,
            verdict: CutVerdict::Unchecked,
        });
    });
    UsageReport { atoms, cuts }
}

fn fresh_atom_texts(n: &AnnotatedNode) -> BTreeMap<Label, Atom> {
    let fresh: BTreeSet<&Label> = n.fresh.iter().collect();
    let mut out = BTreeMap::new();
    let mut note = |f: &Fml| {
        for a in atoms_of(f) {
            for l in &a.labels {
                if fresh.contains(l) {
                    out.entry(l.clone()).or_insert_with(|| a.atom.clone());
                }
            }
        }
    };
    if let Some((_, f)) = &n.param {
        note(f);
    }
    for c in &n.children {
        for f in c.goal.ante.iter().chain(&c.goal.succ) {
            note(f);
        }
    }
    out
}

impl UsageReport {
    pub fn to_json(&self) -> Value {
        fn entries(list: &[AtomUsage]) -> Value {
            let mut m = Map::new();
            for a in list {
                let mut e = json!({
                    "atom": a.atom,
                    "mutations": a.set.kinds().iter().map(|k| k.as_str()).collect::<Vec<_>>(),
                    "fused_with": a.partners.iter().map(Label::name).collect::<Vec<_>>(),
                    "usage": a.usage.as_str(),
                });
                if let Some(w) = &a.witness {
                    e["witness"] = json!(w);
                }
                m.insert(a.label.name().to_string(), e);
            }
            Value::Object(m)
        }
        let cuts: Vec<Value> = self
            .cuts
            .iter()
            .map(|c| {
                let mut v = json!({
                    "path": path_text(&c.path),
                    "rule": c.rule,
                    "labels": entries(&c.atoms),
                });
                match &c.verdict {
                    CutVerdict::Unchecked => v["verdict"] = json!("unchecked"),
                    CutVerdict::Verified { choices } => {
                        v["verdict"] = json!("verified");
                        v["choices"] = json!(choices);
                    }
                    CutVerdict::Failed(m) => {
                        v["verdict"] = json!("failed");
                        v["reason"] = json!(m);
                    }
                }
                v
            })
            .collect();
        json!({"labels": entries(&self.atoms), "cuts": cuts})
    }

    pub fn to_text(&self) -> String {
        fn line(prefix: &str, a: &AtomUsage) -> String {
            let mut s = format!("{prefix} {} ({}): {}", a.label, a.atom, a.usage.as_str());
            if let Some(w) = &a.witness {
                s += &format!("; weakens to {w}");
            }
            if !a.partners.is_empty() {
                let p: Vec<&str> = a.partners.iter().map(Label::name).collect();
                s += &format!("; linked with {}", p.join(", "));
            }
            s
        }
        let mut out = String::new();
        for a in &self.atoms {
            out += &line("atom", a);
            out.push('\n');
        }
        for c in &self.cuts {
            let verdict = match &c.verdict {
                CutVerdict::Unchecked => "unchecked".to_string(),
                CutVerdict::Verified { choices } => format!("verified over {choices} choice(s)"),
                CutVerdict::Failed(m) => format!("FAILED: {m}"),
            };
            out += &format!("cut at {} ({}): {verdict}\n", path_text(&c.path), c.rule);
            for a in &c.atoms {
                out += &line("cut atom", a);
                out.push('\n');
            }
        }
        out
    }
}

// ---------------------------------------------------------------------------
// replay

fn tokens(s: &str) -> Vec<String> {
    let mut out = Vec::new();
    let cs: Vec<char> = s.chars().collect();
    let mut i = 0;
    while i < cs.len() {
        let c = cs[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_alphabetic() || c == '_' {
            let st = i;
            while i < cs.len() && (cs[i].is_ascii_alphanumeric() || cs[i] == '_') {
                i += 1;
            }
            out.push(cs[st..i].iter().collect());
        } else {
            out.push(c.to_string());
            i += 1;
        }
    }
    out
}

/// Tokens of `s` without `true` assumptions or `false` alternatives.
fn sequent_tokens(s: &Sequent) -> Vec<String> {
    let trimmed = Sequent::new(
        s.ante.iter().filter(|f| !f.is_true_atom()).cloned().collect(),
        s.succ.iter().filter(|f| !f.is_false_atom()).cloned().collect(),
    );
    tokens(&print_sequent(&trimmed))
}

fn is_ident(t: &str) -> bool {
    t.starts_with(|c: char| c.is_ascii_alphabetic() || c == '_')
}

const KEYWORDS: [&str; 4] = ["true", "false", "forall", "exists"];

fn bound_names(ts: &[String]) -> HashSet<&str> {
    ts.windows(2)
        .filter(|w| w[0] == "forall" || w[0] == "exists")
        .map(|w| w[1].as_str())
        .collect()
}

/// Whether `target` is `pattern` with free variables renamed to variables,
/// not necessarily injectively. Validity survives such substitutions.
fn instance_of(pattern: &[String], target: &[String]) -> bool {
    if pattern.len() != target.len() {
        return false;
    }
    let (bp, bt) = (bound_names(pattern), bound_names(target));
    let mut map: HashMap<&str, &str> = HashMap::new();
    for (i, (p, t)) in pattern.iter().zip(target).enumerate() {
        let var = is_ident(p)
            && !KEYWORDS.contains(&p.as_str())
            && pattern.get(i + 1).is_none_or(|n| n != "(");
        if !var {
            if p != t {
                return false;
            }
            continue;
        }
        if !is_ident(t) || KEYWORDS.contains(&t.as_str()) {
            return false;
        }
        if p != t && (bp.contains(p.as_str()) || bt.contains(t.as_str())) {
            return false;
        }
        match map.get(p.as_str()) {
            Some(prev) if prev != t => return false,
            Some(_) => {}
            None => {
                map.insert(p, t);
            }
        }
    }
    true
}

/// Proves mutated leaves whose originals the wrapped oracle vouched for
/// by a recording and whose leaf sets admit the mutation.
pub struct ReplayOracle<'a> {
    base: &'a dyn Oracle,
    patterns: Vec<Vec<String>>,
}

impl<'a> ReplayOracle<'a> {
    pub fn new(
        base: &'a dyn Oracle,
        root: &AnnotatedNode,
        choice: &MutationChoice,
        provider: &dyn WeakeningProvider,
    ) -> Self {
        let mut patterns = Vec::new();
        root.walk(&mut |n| {
            let Some(info) = &n.leaf else { return };
            if info.verdict == "axiom" || base.recorded_da(&n.goal).is_none() {
                return;
            }
            let labels = sequent_labels(&n.goal);
            if !n.sigma_out.restrict(&labels).admits(&choice.restrict(&labels)) {
                return;
            }
            // recorded sets vouch for the provider's first candidate
            let mut plain = choice.clone();
            plain.witnesses.clear();
            if let Ok(m) = apply_sequent(&plain, &n.goal, provider) {
                patterns.push(sequent_tokens(&m));
            }
        });
        ReplayOracle { base, patterns }
    }

    fn matches(&self, s: &Sequent) -> bool {
        let t = sequent_tokens(s);
        self.patterns.iter().any(|p| instance_of(p, &t))
    }
}

impl Oracle for ReplayOracle<'_> {
    fn decide(&self, s: &Sequent) -> Verdict {
        if self.matches(s) {
            Verdict::Valid
        } else {
            self.base.decide(s)
        }
    }

    fn recorded_da(&self, s: &Sequent) -> Option<RecordedDa> {
        if self.matches(s) {
            // only closure matters on replay
            Some(RecordedDa::new())
        } else {
            self.base.recorded_da(s)
        }
    }

    fn attests_unknown(&self, s: &Sequent) -> bool {
        self.base.attests_unknown(s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ReplayError {
    NotAdmitted(String),
    Mutation(MutationError),
    Recheck(CalcError),
}

impl fmt::Display for ReplayError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ReplayError::NotAdmitted(m) => write!(f, "choice not admitted: {m}"),
            ReplayError::Mutation(e) => write!(f, "cannot apply choice: {e}"),
            ReplayError::Recheck(e) => write!(f, "re-check failed: {e}"),
        }
    }
}

impl std::error::Error for ReplayError {}

impl From<MutationError> for ReplayError {
    fn from(e: MutationError) -> Self {
        ReplayError::Mutation(e)
    }
}

impl From<CalcError> for ReplayError {
    fn from(e: CalcError) -> Self {
        ReplayError::Recheck(e)
    }
}

/// Checks that `choice` lies in the root set, with fresh labels checked
/// against the Ξ of the node that introduced them.
pub fn admissible(proof: &AnnotatedProof, choice: &MutationChoice) -> Result<(), String> {
    let sigma = proof.sigma();
    let mut introduced: BTreeMap<Label, &AnnotatedNode> = BTreeMap::new();
    proof.root.walk(&mut |n| {
        for l in &n.fresh {
            introduced.insert(l.clone(), n);
        }
    });
    for (l, k) in choice.active() {
        if sigma.contains(&l) {
            continue;
        }
        match introduced.get(&l) {
            Some(n) if n.xi.contains(&l) => {}
            Some(n) => return Err(format!("{l}:{} is not covered by the cut set at {}", k.as_str(), path_text(&n.path))),
            None => return Err(format!("{l} is not a label of this proof")),
        }
    }
    if !sigma.admits(&choice.restrict(&sigma.label_set())) {
        return Err(describe_violation(sigma, choice));
    }
    let mut nodes: Vec<&AnnotatedNode> = introduced.values().copied().collect();
    nodes.dedup_by_key(|n| n.path.clone());
    for n in nodes {
        if !n.xi.admits(&choice.restrict(&n.xi.label_set())) {
            return Err(describe_violation(&n.xi, choice));
        }
    }
    Ok(())
}

fn describe_violation(set: &TrackedLabelSet, choice: &MutationChoice) -> String {
    for (l, k) in choice.active() {
        if let Some(s) = set.lookup(&l) {
            if !s.contains(k) {
                let allowed: Vec<&str> = s.kinds().iter().map(|k| k.as_str()).collect();
                return format!("{l}:{} but only {{{}}} is allowed", k.as_str(), allowed.join(","));
            }
        }
    }
    "fused labels are given different kinds".into()
}

fn param_aliases(key: &str) -> &'static [&'static str] {
    match key {
        "invariant" => &["invariant", "inv", "J"],
        "replacement" => &["replacement", "formula", "Q"],
        _ => &["formula", "cut", "C", "Q"],
    }
}

/// Extends `choice` to fresh labels that some node of `root` fuses with a
/// mutated label, so cut formulas introduced below follow the atom they
/// were tied to. Chosen labels are never overridden.
pub fn propagate_fusion(choice: &MutationChoice, root: &AnnotatedNode) -> MutationChoice {
    let mut classes: Vec<BTreeSet<Label>> = Vec::new();
    root.walk(&mut |n| {
        for (m, _) in n.sigma_out.classes().chain(n.xi.classes()) {
            if m.len() > 1 {
                classes.push(m.clone());
            }
        }
    });
    let mut out = choice.clone();
    loop {
        let mut changed = false;
        for m in &classes {
            let Some(src) = m.iter().find(|l| out.kind(l) != MutationKind::Id) else { continue };
            let (k, w) = (out.kind(src), out.witnesses.get(src).cloned());
            for l in m {
                if l.origin() == Origin::Fresh && out.get(l).is_none() {
                    out.set(l.clone(), k);
                    if let Some(w) = &w {
                        out.witnesses.insert(l.clone(), w.clone());
                    }
                    changed = true;
                }
            }
        }
        if !changed {
            return out;
        }
    }
}

/// Rewrites the formula parameters of `script` under μ, using the labeled
/// parameters recorded in `node`, whose shape mirrors the script.
pub fn rewrite_params(
    script: &ProofNode,
    node: &AnnotatedNode,
    choice: &MutationChoice,
    provider: &dyn WeakeningProvider,
) -> Result<ProofNode, MutationError> {
    let mut out = script.clone();
    if let Some((key, f)) = &node.param {
        let text = print_fml(&apply(choice, f, provider)?);
        for k in param_aliases(key) {
            out.params.remove(*k);
        }
        out.params.insert(key.clone(), text);
    }
    for (i, c) in node.children.iter().enumerate() {
        if let Some(s) = script.children.get(i) {
            out.children[i] = rewrite_params(s, c, choice, provider)?;
        }
    }
    Ok(out)
}

/// Applies `choice` to the model and the script parameters and re-checks.
/// The relaxed proof is returned when it closes.
pub fn verify_relaxation(
    proof: &AnnotatedProof,
    script: &ProofNode,
    choice: &MutationChoice,
    oracle: &dyn Oracle,
    provider: &dyn WeakeningProvider,
) -> Result<AnnotatedProof, ReplayError> {
    admissible(proof, choice).map_err(ReplayError::NotAdmitted)?;
    let choice = &propagate_fusion(choice, &proof.root);
    let model = apply(choice, &proof.model, provider)?;
    let script = rewrite_params(script, &proof.root, choice, provider)?;
    let replay = ReplayOracle::new(oracle, &proof.root, choice, provider);
    let checker = Checker::new(&replay, provider, proof.mode).lenient(true);
    Ok(checker.check(&model, &script, &TrackedLabelSet::new())?)
}

/// Choices from `set`: all of them when at most `cap`, otherwise `cap`
/// seeded samples.
pub fn capped_choices(set: &TrackedLabelSet, cap: usize, seed: u64) -> Vec<MutationChoice> {
    if set.choice_count() <= cap as u128 {
        return set.enumerate_choices().collect();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..cap)
        .map(|_| set.choice_from(&mut |_, ks| ks[rng.gen_range(0..ks.len())]))
        .collect()
}

fn script_at<'a>(script: &'a ProofNode, path: &[usize]) -> Option<&'a ProofNode> {
    let mut s = script;
    for &i in path {
        s = s.children.get(i)?;
    }
    Some(s)
}

/// For each (capped) choice from the Ξ at `path`, mutates every premise of
/// that node and re-proves it with its original sub-proof. Returns the
/// number of choices verified.
pub fn verify_cut_mutation(
    proof: &AnnotatedProof,
    script: &ProofNode,
    path: &[usize],
    oracle: &dyn Oracle,
    provider: &dyn WeakeningProvider,
    cap: usize,
) -> Result<usize, String> {
    let node = proof.find(path).ok_or_else(|| format!("no node at {}", path_text(path)))?;
    let snode = script_at(script, path).ok_or_else(|| format!("script has no node at {}", path_text(path)))?;
    let choices = capped_choices(&node.xi, cap, 0x5eed);
    for c in &choices {
        let c = &propagate_fusion(c, node);
        let replay = ReplayOracle::new(oracle, node, c, provider);
        let checker = Checker::new(&replay, provider, proof.mode).lenient(true);
        for (i, child) in node.children.iter().enumerate() {
            let fail = |m: String| format!("premise {i} under {}: {m}", c.to_json()["choice"]);
            let goal = apply_sequent(c, &child.goal, provider).map_err(|e| fail(e.to_string()))?;
            let sub = rewrite_params(&snode.children[i], child, c, provider).map_err(|e| fail(e.to_string()))?;
            checker
                .check_goal(&goal, &sub, &TrackedLabelSet::new(), &child.path)
                .map_err(|e| fail(e.to_string()))?;
        }
    }
    Ok(choices.len())
}

/// [`build_report`] with every cut site verified.
pub fn diagnose(
    proof: &AnnotatedProof,
    script: &ProofNode,
    oracle: &dyn Oracle,
    provider: &dyn WeakeningProvider,
    cap: usize,
) -> UsageReport {
    let mut r = build_report(proof);
    for c in &mut r.cuts {
        c.verdict = match verify_cut_mutation(proof, script, &c.path, oracle, provider, cap) {
            Ok(n) => CutVerdict::Verified { choices: n },
            Err(m) => CutVerdict::Failed(m),
        };
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::{check_proof, parse_script_str, Mode};
    use crate::mutation::DefaultProvider;
    use crate::oracle::LinearOracle;

    fn toks(s: &str) -> Vec<String> {
        tokens(s)
    }

    #[test]
    fn renaming_instances() {
        assert!(instance_of(&toks("x_0 > 1 |- x_0 >= 0"), &toks("x > 1 |- x >= 0")));
        assert!(instance_of(&toks("x > y |- x >= y"), &toks("z > z |- z >= z")));
        assert!(!instance_of(&toks("x > 1 |- x >= 0"), &toks("x > 1 |- y >= 0")));
        assert!(!instance_of(&toks("sqrt(x) > 1"), &toks("f(x) > 1")));
        assert!(!instance_of(&toks("x > 1"), &toks("x > 2")));
        // no capture by a quantifier
        assert!(!instance_of(&toks("forall t . t > s"), &toks("forall t . t > t")));
    }

    #[test]
    fn usage_buckets() {
        assert_eq!(Usage::of(MutationSet::ID), Usage::Required);
        assert_eq!(Usage::of(MutationSet::ID_W), Usage::Weakenable);
        assert_eq!(Usage::of(MutationSet::ID_R), Usage::Removable);
        assert_eq!(Usage::of(MutationSet::ANY), Usage::Removable);
    }

    fn small() -> (AnnotatedProof, ProofNode) {
        let (m, _) = parse_model("@a x > 1 && @b y > 5 -> [@c x := x + 1] @d x >= 0").unwrap();
        let script = parse_script_str(
            r#"[{"rule":"impR"},{"rule":"cut","params":{"formula":"x > 0"},"children":[
                 {"rule":"QE"},
                 [{"rule":"CER","params":{"axiom":"[:=]"}},{"rule":"QE"}]]}]"#,
        )
        .unwrap();
        let p = check_proof(&m, &script, &TrackedLabelSet::new(), &LinearOracle::new(), &DefaultProvider::new(), Mode::Parallel)
            .unwrap();
        (p, script)
    }

    #[test]
    fn report_and_relaxation() {
        let (p, script) = small();
        let r = build_report(&p);
        let by: BTreeMap<&str, Usage> = r.atoms.iter().map(|a| (a.label.name(), a.usage)).collect();
        assert_eq!(by["b"], Usage::Removable);
        assert_eq!(r.cuts.len(), 1);
        let text = r.to_text();
        assert!(text.contains("atom b (y > 5): removable"), "{text}");
        assert!(text.contains("cut atom u1 (x > 0)"), "{text}");

        let o = LinearOracle::new();
        let pr = DefaultProvider::new();
        let b = Label::new("b", Origin::Model);
        let ok = MutationChoice::from_pairs([(b.clone(), MutationKind::R)]);
        verify_relaxation(&p, &script, &ok, &o, &pr).unwrap();
        verify_relaxation(&p, &script, &MutationChoice::new(), &o, &pr).unwrap();
        let a = Label::new("a", Origin::Model);
        let bad = MutationChoice::from_pairs([(a, MutationKind::R)]);
        assert!(matches!(verify_relaxation(&p, &script, &bad, &o, &pr), Err(ReplayError::NotAdmitted(_))));

        let n = verify_cut_mutation(&p, &script, &r.cuts[0].path, &o, &pr, 64).unwrap();
        assert!(n >= 1);
        let d = diagnose(&p, &script, &o, &pr, 64);
        assert!(matches!(d.cuts[0].verdict, CutVerdict::Verified { .. }));
        assert_eq!(d.to_json(), diagnose(&p, &script, &o, &pr, 64).to_json());
    }

    #[test]
    fn nested_cut_follows_fused_partner() {
        let (m, _) = parse_model("@a x > 2 -> @b x > 0").unwrap();
        let script = parse_script_str(
            r#"[{"rule":"impR"},{"rule":"cut","params":{"formula":"x > 1"},"children":[
                 {"rule":"cut","params":{"formula":"x > 1"},"children":[{"rule":"QE"},{"rule":"id"}]},
                 {"rule":"QE"}]}]"#,
        )
        .unwrap();
        let (o, pr) = (LinearOracle::new(), DefaultProvider::new());
        let p = check_proof(&m, &script, &TrackedLabelSet::new(), &o, &pr, Mode::Parallel).unwrap();
        let outer = p.find(&[0]).unwrap();
        let inner = p.find(&[0, 0]).unwrap();
        let (u_out, u_in) = (outer.fresh[0].clone(), inner.fresh[0].clone());
        let c = MutationChoice::from_pairs([(u_out, MutationKind::W)]);
        assert_eq!(propagate_fusion(&c, outer).kind(&u_in), MutationKind::W);
        assert!(verify_cut_mutation(&p, &script, &[0], &o, &pr, 64).unwrap() >= 2);
    }
}
