//! Checks a proof script against a model and computes the label sets.
//!
//! The script is first expanded top-down, so that fresh labels are handed
//! out in a fixed pre-order independent of evaluation. Sets are then
//! computed bottom-up: in parallel mode every premise sees the incoming χ,
//! in sequential mode each premise sees the output of the one before it.

use super::rules::{expand, trivially_closed, Leaf, Premise, RuleCtx, RuleId, Step};
use super::script::ProofNode;
use crate::labelsets::{MutationKind, TrackedLabelSet};
use crate::mutation::WeakeningProvider;
use crate::oracle::{dynamic_analysis, Oracle, Verdict};
use crate::syntax::visit::sequent_labels;
use crate::syntax::*;
use rayon::prelude::*;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Mode {
    #[default]
    Parallel,
    Sequential,
}

impl Mode {
    pub fn parse(s: &str) -> Option<Mode> {
        match s {
            "parallel" | "par" => Some(Mode::Parallel),
            "sequential" | "seq" => Some(Mode::Sequential),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Parallel => "parallel",
            Mode::Sequential => "sequential",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CalcErrorKind {
    /// The script names a rule that does not exist.
    UnknownRule,
    /// The rule does not apply to the goal.
    Rule,
    /// Wrong number of children for the premises produced.
    Shape,
    /// A leaf the oracle does not prove.
    Open,
    /// Two constraints on a fusion class have nothing in common.
    Conflict,
}

/// A checking failure, located by the child indices from the root.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CalcError {
    pub kind: CalcErrorKind,
    pub path: Vec<usize>,
    pub rule: String,
    pub goal: String,
    pub message: String,
}

impl fmt::Display for CalcError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let at: Vec<String> = self.path.iter().map(usize::to_string).collect();
        write!(f, "{} at [{}] on {}: {}", self.rule, at.join("."), self.goal, self.message)
    }
}

impl std::error::Error for CalcError {}

#[derive(Clone, Debug, PartialEq)]
pub struct LeafInfo {
    pub verdict: String,
    pub witnesses: BTreeMap<Label, Atom>,
    pub degraded: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AnnotatedNode {
    pub path: Vec<usize>,
    pub rule: String,
    pub goal: Sequent,
    pub chi_in: TrackedLabelSet,
    pub sigma_out: TrackedLabelSet,
    pub fresh: Vec<Label>,
    /// Constraint on the fresh labels, merged over the premises using them.
    pub xi: TrackedLabelSet,
    pub param: Option<(String, Fml)>,
    /// Axiom premises closed in place, with their constant sets.
    pub axioms: Vec<(String, TrackedLabelSet)>,
    pub leaf: Option<LeafInfo>,
    pub children: Vec<AnnotatedNode>,
}

impl AnnotatedNode {
    /// Pre-order traversal.
    pub fn walk<'a>(&'a self, f: &mut dyn FnMut(&'a AnnotatedNode)) {
        f(self);
        for c in &self.children {
            c.walk(f);
        }
    }

    pub fn count(&self) -> usize {
        1 + self.children.iter().map(AnnotatedNode::count).sum::<usize>()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AnnotatedProof {
    pub model: Fml,
    pub chi: TrackedLabelSet,
    pub mode: Mode,
    pub root: AnnotatedNode,
}

impl AnnotatedProof {
    pub fn sigma(&self) -> &TrackedLabelSet {
        &self.root.sigma_out
    }

    pub fn find(&self, path: &[usize]) -> Option<&AnnotatedNode> {
        let mut n = &self.root;
        for &i in path {
            n = n.children.get(i)?;
        }
        Some(n)
    }
}

/// Adds `id` to every class of χ; an input that forbids keeping an atom
/// unchanged has no meaning for a proof of the unmutated model.
pub fn normalize_chi(chi: &TrackedLabelSet) -> TrackedLabelSet {
    TrackedLabelSet::from_groups(
        chi.classes()
            .map(|(m, s)| (m.iter().cloned().collect(), s.with(MutationKind::Id))),
    )
    .expect("id is always allowed")
}

struct Expanded {
    path: Vec<usize>,
    rule: String,
    goal: Sequent,
    step: Step,
    children: Vec<Expanded>,
}

pub struct Checker<'a> {
    pub oracle: &'a dyn Oracle,
    pub provider: &'a dyn WeakeningProvider,
    pub mode: Mode,
    /// Close goals with a truth constant when the scripted rule fails;
    /// used when replaying a proof on a mutated model.
    pub lenient: bool,
}

impl<'a> Checker<'a> {
    pub fn new(oracle: &'a dyn Oracle, provider: &'a dyn WeakeningProvider, mode: Mode) -> Self {
        Checker {
            oracle,
            provider,
            mode,
            lenient: false,
        }
    }

    pub fn lenient(mut self, on: bool) -> Self {
        self.lenient = on;
        self
    }

    /// Checks `proof` for `⊢ model` under the input set `chi`.
    pub fn check(&self, model: &Fml, proof: &ProofNode, chi: &TrackedLabelSet) -> Result<AnnotatedProof, CalcError> {
        let mut alloc = LabelAllocator::new();
        alloc.reserve_all(model);
        for l in chi.labels() {
            alloc.reserve(l.name());
        }
        let chi = normalize_chi(chi);
        let goal = Sequent::new(vec![], vec![model.clone()]);
        let tree = self.expand_tree(proof, goal, Vec::new(), &mut alloc)?;
        let root = self.eval(&tree, &chi)?;
        Ok(AnnotatedProof {
            model: model.clone(),
            chi,
            mode: self.mode,
            root,
        })
    }

    /// Checks `proof` for an arbitrary goal; node paths start at `at`.
    pub fn check_goal(
        &self,
        goal: &Sequent,
        proof: &ProofNode,
        chi: &TrackedLabelSet,
        at: &[usize],
    ) -> Result<AnnotatedNode, CalcError> {
        let mut alloc = LabelAllocator::new();
        for f in goal.ante.iter().chain(&goal.succ) {
            alloc.reserve_all(f);
        }
        for l in chi.labels() {
            alloc.reserve(l.name());
        }
        let tree = self.expand_tree(proof, goal.clone(), at.to_vec(), &mut alloc)?;
        self.eval(&tree, &normalize_chi(chi))
    }

    fn err(&self, kind: CalcErrorKind, path: &[usize], rule: &str, goal: &Sequent, message: String) -> CalcError {
        CalcError {
            kind,
            path: path.to_vec(),
            rule: rule.to_string(),
            goal: print_sequent(goal),
            message,
        }
    }

    fn truth_leaf(&self, goal: &Sequent, path: Vec<usize>, via: RuleId) -> Option<Expanded> {
        let mut alloc = LabelAllocator::new();
        let step = expand(via, goal, &BTreeMap::new(), &mut RuleCtx { alloc: &mut alloc }).ok()?;
        Some(Expanded {
            path,
            rule: via.name().to_string(),
            goal: goal.clone(),
            step,
            children: Vec::new(),
        })
    }

    fn expand_tree(
        &self,
        node: &ProofNode,
        goal: Sequent,
        path: Vec<usize>,
        alloc: &mut LabelAllocator,
    ) -> Result<Expanded, CalcError> {
        let Some(rule) = RuleId::from_name(&node.rule) else {
            return Err(self.err(CalcErrorKind::UnknownRule, &path, &node.rule, &goal, "unknown rule".into()));
        };
        let step = match expand(rule, &goal, &node.params, &mut RuleCtx { alloc }) {
            Ok(s) => s,
            Err(msg) => {
                if self.lenient {
                    if let Some(via) = trivially_closed(&goal) {
                        if let Some(e) = self.truth_leaf(&goal, path.clone(), via) {
                            return Ok(e);
                        }
                    }
                    // a mutated id leaf may still close arithmetically
                    if rule == RuleId::Id {
                        if let Some(e) = self.truth_leaf(&goal, path.clone(), RuleId::QE) {
                            return Ok(e);
                        }
                    }
                }
                return Err(self.err(CalcErrorKind::Rule, &path, &node.rule, &goal, msg));
            }
        };
        let open: Vec<Sequent> = step
            .premises
            .iter()
            .filter_map(|p| match p {
                Premise::Goal(s) => Some(s.clone()),
                Premise::Axiom { .. } => None,
            })
            .collect();
        if open.len() != node.children.len() {
            return Err(self.err(
                CalcErrorKind::Shape,
                &path,
                &node.rule,
                &goal,
                format!("{} open premise(s) but {} child proof(s)", open.len(), node.children.len()),
            ));
        }
        let mut children = Vec::with_capacity(open.len());
        for (i, (s, c)) in open.into_iter().zip(&node.children).enumerate() {
            let mut p = path.clone();
            p.push(i);
            children.push(self.expand_tree(c, s, p, alloc)?);
        }
        Ok(Expanded {
            path,
            rule: rule.name().to_string(),
            goal,
            step,
            children,
        })
    }

    fn merge(&self, e: &Expanded, sets: &[&TrackedLabelSet]) -> Result<TrackedLabelSet, CalcError> {
        TrackedLabelSet::merge_all(sets.iter().copied())
            .map_err(|x| self.err(CalcErrorKind::Conflict, &e.path, &e.rule, &e.goal, x.to_string()))
    }

    fn eval_leaf(&self, e: &Expanded, leaf: &Leaf, chi: &TrackedLabelSet) -> Result<AnnotatedNode, CalcError> {
        let (set, info) = match leaf {
            Leaf::Const(set) => (
                self.merge(e, &[set, chi])?,
                LeafInfo {
                    verdict: "axiom".into(),
                    witnesses: BTreeMap::new(),
                    degraded: false,
                },
            ),
            Leaf::Oracle => {
                let verdict = self.oracle.decide(&e.goal);
                let closes = match &verdict {
                    Verdict::Valid => true,
                    Verdict::Unknown(_) => self.oracle.attests_unknown(&e.goal),
                    Verdict::Invalid(_) => false,
                };
                if !closes {
                    if self.lenient {
                        if let Some(via) = trivially_closed(&e.goal) {
                            if let Some(t) = self.truth_leaf(&e.goal, e.path.clone(), via) {
                                return self.eval(&t, chi);
                            }
                        }
                    }
                    return Err(self.err(CalcErrorKind::Open, &e.path, &e.rule, &e.goal, format!("leaf is {verdict}")));
                }
                let da = dynamic_analysis(&e.goal, chi, self.oracle, self.provider);
                (
                    self.merge(e, &[&da.set, chi])?,
                    LeafInfo {
                        verdict: verdict.to_string(),
                        witnesses: da.witnesses,
                        degraded: da.degraded,
                    },
                )
            }
        };
        Ok(AnnotatedNode {
            path: e.path.clone(),
            rule: e.rule.clone(),
            goal: e.goal.clone(),
            chi_in: chi.clone(),
            sigma_out: set,
            fresh: Vec::new(),
            xi: TrackedLabelSet::new(),
            param: None,
            axioms: Vec::new(),
            leaf: Some(info),
            children: Vec::new(),
        })
    }

    fn eval(&self, e: &Expanded, chi: &TrackedLabelSet) -> Result<AnnotatedNode, CalcError> {
        if let Some(leaf) = &e.step.leaf {
            return self.eval_leaf(e, leaf, chi);
        }
        let children: Vec<AnnotatedNode> = match self.mode {
            Mode::Parallel => e
                .children
                .par_iter()
                .map(|c| self.eval(c, chi))
                .collect::<Result<_, _>>()?,
            Mode::Sequential => {
                let mut out = Vec::with_capacity(e.children.len());
                let mut cur = chi.clone();
                for c in &e.children {
                    let n = self.eval(c, &cur)?;
                    cur = n.sigma_out.clone();
                    out.push(n);
                }
                out
            }
        };
        let axioms: Vec<(String, TrackedLabelSet)> = e
            .step
            .premises
            .iter()
            .filter_map(|p| match p {
                Premise::Axiom { name, set } => Some((name.clone(), set.clone())),
                Premise::Goal(_) => None,
            })
            .collect();

        let flowing: Vec<&AnnotatedNode> = match (self.mode, e.step.first_only) {
            (_, true) => children.iter().take(1).collect(),
            (Mode::Parallel, false) => children.iter().collect(),
            (Mode::Sequential, false) => children.iter().last().into_iter().collect(),
        };
        let mut sets: Vec<&TrackedLabelSet> = vec![chi, &e.step.extra];
        sets.extend(flowing.iter().map(|c| &c.sigma_out));
        sets.extend(axioms.iter().map(|(_, s)| s));
        let merged = self.merge(e, &sets)?;

        let fresh: BTreeSet<Label> = e.step.fresh.iter().cloned().collect();
        let xi = if fresh.is_empty() {
            TrackedLabelSet::new()
        } else {
            let mut parts: Vec<TrackedLabelSet> = children.iter().map(|c| c.sigma_out.restrict(&fresh)).collect();
            parts.extend(axioms.iter().map(|(_, s)| s.restrict(&fresh)));
            self.merge(e, &parts.iter().collect::<Vec<_>>())?
        };
        Ok(AnnotatedNode {
            path: e.path.clone(),
            rule: e.rule.clone(),
            goal: e.goal.clone(),
            chi_in: chi.clone(),
            sigma_out: merged.diff(&fresh),
            fresh: e.step.fresh.clone(),
            xi,
            param: e.step.param.clone(),
            axioms,
            leaf: None,
            children,
        })
    }
}

/// Checks with the default settings of `mode`.
pub fn check_proof(
    model: &Fml,
    proof: &ProofNode,
    chi: &TrackedLabelSet,
    oracle: &dyn Oracle,
    provider: &dyn WeakeningProvider,
    mode: Mode,
) -> Result<AnnotatedProof, CalcError> {
    Checker::new(oracle, provider, mode).check(model, proof, chi)
}

/// Labels of the goal that the output set leaves unconstrained.
pub fn unconstrained(node: &AnnotatedNode) -> BTreeSet<Label> {
    sequent_labels(&node.goal)
        .into_iter()
        .filter(|l| node.sigma_out.lookup(l).is_some_and(|s| s.len() == 3))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::labelsets::MutationSet;
    use crate::mutation::DefaultProvider;
    use crate::oracle::LinearOracle;
    use crate::calculus::script::parse_script_str;

    fn lbl(n: &str) -> Label {
        Label::new(n, Origin::Model)
    }

    fn run(model: &str, script: &str, mode: Mode) -> Result<AnnotatedProof, CalcError> {
        let (f, _) = parse_model(model).unwrap();
        let p = parse_script_str(script).unwrap();
        let o = LinearOracle::new();
        check_proof(&f, &p, &TrackedLabelSet::new(), &o, &DefaultProvider::new(), mode)
    }

    #[test]
    fn implication_by_qe() {
        let a = run("@i x > 1 -> @j x >= 0", r#"[{"rule":"impR"},{"rule":"QE"}]"#, Mode::Parallel).unwrap();
        let s = a.sigma();
        assert!(s.lookup(&lbl("i")).unwrap().contains(MutationKind::W));
        // removing the goal turns it into true
        assert_eq!(s.lookup(&lbl("j")), Some(MutationSet::ID_R));
    }

    #[test]
    fn open_leaf_is_reported_with_path() {
        let e = run("@i x > 1 && @k y > 0 -> @j x >= 2", r#"[{"rule":"impR"},{"rule":"QE"}]"#, Mode::Parallel)
            .unwrap_err();
        assert_eq!(e.kind, CalcErrorKind::Open);
        assert_eq!(e.path, vec![0]);
    }

    #[test]
    fn shape_mismatch() {
        let e = run("@i x > 1 -> @j x >= 0 && @k x > 0", r#"[{"rule":"impR"},{"rule":"andR"}]"#, Mode::Parallel)
            .unwrap_err();
        assert_eq!(e.kind, CalcErrorKind::Shape);
    }

    #[test]
    fn cut_labels_are_fresh_and_subtracted() {
        let script = r#"[{"rule":"impR"},{"rule":"cut","params":{"formula":"x >= 1"},
            "children":[{"rule":"QE"},{"rule":"QE"}]}]"#;
        for mode in [Mode::Parallel, Mode::Sequential] {
            let a = run("@i x > 1 -> @j x >= 0", script, mode).unwrap();
            let cut = a.find(&[0]).unwrap();
            assert_eq!(cut.fresh.len(), 1);
            assert!(!a.sigma().contains(&cut.fresh[0]));
            assert!(cut.xi.contains(&cut.fresh[0]));
        }
    }

    #[test]
    fn id_fuses_and_lenient_closes_truth() {
        let a = run("@i x > 1 -> @j x > 1", r#"[{"rule":"impR"},{"rule":"id"}]"#, Mode::Parallel).unwrap();
        assert_eq!(a.sigma().partners(&lbl("i")), vec![lbl("j")]);

        let (f, _) = parse_model("@i x > 1 -> @j true").unwrap();
        let p = parse_script_str(r#"[{"rule":"impR"},{"rule":"andR"}]"#).unwrap();
        let o = LinearOracle::new();
        let prov = DefaultProvider::new();
        assert!(Checker::new(&o, &prov, Mode::Parallel).check(&f, &p, &TrackedLabelSet::new()).is_err());
        let a = Checker::new(&o, &prov, Mode::Parallel)
            .lenient(true)
            .check(&f, &p, &TrackedLabelSet::new())
            .unwrap();
        assert_eq!(a.find(&[0]).unwrap().rule, "trueR");

        // an id leaf that no longer matches falls back to the oracle
        let (f, _) = parse_model("@i x >= 1 -> @j x > 0").unwrap();
        let p = parse_script_str(r#"[{"rule":"impR"},{"rule":"id"}]"#).unwrap();
        assert!(Checker::new(&o, &prov, Mode::Parallel).check(&f, &p, &TrackedLabelSet::new()).is_err());
        let a = Checker::new(&o, &prov, Mode::Parallel)
            .lenient(true)
            .check(&f, &p, &TrackedLabelSet::new())
            .unwrap();
        assert_eq!(a.find(&[0]).unwrap().rule, "QE");
    }

    #[test]
    fn chi_is_respected() {
        let (f, _) = parse_model("@i x > 1 -> @j x >= 0").unwrap();
        let p = parse_script_str(r#"[{"rule":"impR"},{"rule":"QE"}]"#).unwrap();
        let chi = TrackedLabelSet::singleton(lbl("i"), MutationSet::of(&[MutationKind::R]));
        let o = LinearOracle::new();
        let a = check_proof(&f, &p, &chi, &o, &DefaultProvider::new(), Mode::Parallel).unwrap();
        assert_eq!(a.chi.lookup(&lbl("i")), Some(MutationSet::ID_R));
        assert!(a.sigma().lookup(&lbl("i")).unwrap().is_subset(MutationSet::ID_R));
    }
}
