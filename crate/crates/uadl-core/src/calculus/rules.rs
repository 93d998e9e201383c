//! The rule catalog and the expansion of a single rule application.

use super::axioms::{self, SetBuilder};
use super::ode::differential;
use crate::labelsets::{MutationSet, TrackedLabelSet};
use crate::syntax::subst::{rename_fml, rename_term, subst_fml};
use crate::syntax::vars::{all_vars, bound_vars, free_vars, fresh_var, sequent_vars, term_vars, VarSet};
use crate::syntax::visit::{atoms_of, fml_at, replace_fml_at};
use crate::syntax::*;
use std::collections::BTreeMap;

macro_rules! rules {
    ($($id:ident => $name:literal $(| $alias:literal)*;)*) => {
        #[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
        pub enum RuleId { $($id),* }

        impl RuleId {
            pub const ALL: &'static [RuleId] = &[$(RuleId::$id),*];

            pub fn name(self) -> &'static str {
                match self { $(RuleId::$id => $name),* }
            }

            pub fn from_name(s: &str) -> Option<RuleId> {
                match s {
                    $($name $(| $alias)* => Some(RuleId::$id),)*
                    _ => None,
                }
            }
        }
    };
}

rules! {
    AndR => "andR" | "∧R";
    AndL => "andL" | "∧L";
    OrR => "orR" | "∨R";
    OrL => "orL" | "∨L";
    ImpR => "impR" | "→R" | "->R";
    ImpL => "impL" | "→L" | "->L";
    NotR => "notR" | "¬R" | "!R";
    NotL => "notL" | "¬L" | "!L";
    EquivR => "equivR" | "↔R" | "<->R";
    EquivL => "equivL" | "↔L" | "<->L";
    Cut => "cut";
    WR => "WR" | "hideR";
    WL => "WL" | "hideL";
    PR => "PR";
    PL => "PL";
    AllR => "allR" | "∀R" | "forallR";
    AllL => "allL" | "∀L" | "forallL";
    ExistsR => "existsR" | "∃R";
    ExistsL => "existsL" | "∃L";
    Loop => "loop";
    MR => "MR";
    ML => "ML";
    GVR => "GVR";
    IG => "iG";
    CER => "CER";
    CEL => "CEL";
    CQR => "CQR";
    CQL => "CQL";
    CTR => "CTR";
    CTL => "CTL";
    UR => "UR";
    BRR => "BRR";
    BRL => "BRL";
    BoxAnd => "boxAnd" | "[]∧" | "[]&&";
    AssignEq => "[:=]=" | "assignEq";
    DW => "dW";
    DI => "dI";
    DC => "dC";
    DG => "dG";
    WRd => "WR'";
    WLd => "WL'";
    WLR => "WLR";
    CutR => "cutR";
    CutL => "cutL";
    EquivCR => "equivCR" | "↔cR";
    EquivCL => "equivCL" | "↔cL";
    ImpToEquiv => "imp2equiv" | "→2↔";
    Id => "id" | "close";
    QE => "QE" | "R" | "ℝ" | "auto";
    TrueR => "trueR" | "⊤R";
    FalseL => "falseL" | "⊥L";
    Axiom => "axiom";
}

impl RuleId {
    pub fn is_leaf(self) -> bool {
        matches!(self, RuleId::Id | RuleId::QE | RuleId::TrueR | RuleId::FalseL | RuleId::Axiom)
    }
}

impl std::fmt::Display for RuleId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Ante,
    Succ,
}

/// A position: a top-level formula of one side, then a path inside it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Pos {
    pub side: Side,
    pub idx: usize,
    pub path: Vec<usize>,
}

/// Reads `R0`, `L2`, `R0.1.0`; a bare path such as `0.1` keeps `default`.
pub fn parse_pos(s: &str, default: Side) -> Result<Pos, String> {
    let s = s.trim();
    let (side, rest) = match s.chars().next() {
        Some('R') => (Side::Succ, &s[1..]),
        Some('L') => (Side::Ante, &s[1..]),
        _ => (default, s),
    };
    let mut parts = rest.split('.').filter(|p| !p.is_empty());
    let idx = match parts.next() {
        Some(p) => p.parse().map_err(|_| format!("bad position '{s}'"))?,
        None => 0,
    };
    let path = parts
        .map(|p| p.parse().map_err(|_| format!("bad position '{s}'")))
        .collect::<Result<_, _>>()?;
    Ok(Pos { side, idx, path })
}

pub enum Premise {
    Goal(Sequent),
    /// Closed by an axiom instance; carries the axiom's constant set.
    Axiom { name: String, set: TrackedLabelSet },
}

pub enum Leaf {
    Oracle,
    Const(TrackedLabelSet),
}

/// How a rule application contributes to the output set.
pub struct Step {
    pub premises: Vec<Premise>,
    /// Merged into the output (labels of hidden formulas and the like).
    pub extra: TrackedLabelSet,
    /// Labels introduced here and subtracted from the output.
    pub fresh: Vec<Label>,
    /// The labeled formula parameter, if the rule takes one.
    pub param: Option<(String, Fml)>,
    pub leaf: Option<Leaf>,
    /// Only the first premise's output flows down (CQR/CQL).
    pub first_only: bool,
}

impl Step {
    fn goals(premises: Vec<Sequent>) -> Step {
        Step {
            premises: premises.into_iter().map(Premise::Goal).collect(),
            extra: TrackedLabelSet::new(),
            fresh: Vec::new(),
            param: None,
            leaf: None,
            first_only: false,
        }
    }

    fn one(s: Sequent) -> Step {
        Step::goals(vec![s])
    }

    fn leaf(l: Leaf) -> Step {
        let mut s = Step::goals(vec![]);
        s.leaf = Some(l);
        s
    }

    fn with_extra(mut self, b: &SetBuilder) -> Step {
        self.extra = b.build();
        self
    }

    fn with_fresh(mut self, fresh: Vec<Label>) -> Step {
        self.fresh = fresh;
        self
    }

    fn with_param(mut self, key: &str, f: &Fml) -> Step {
        self.param = Some((key.to_string(), f.clone()));
        self
    }
}

pub struct RuleCtx<'a> {
    pub alloc: &'a mut LabelAllocator,
}

type Params = BTreeMap<String, String>;
type R<T> = Result<T, String>;

fn side_vec(s: &Sequent, side: Side) -> &Vec<Fml> {
    match side {
        Side::Ante => &s.ante,
        Side::Succ => &s.succ,
    }
}

/// `s` with the formula at `side[i]` replaced by `new` (possibly several).
fn replace(s: &Sequent, side: Side, i: usize, new: Vec<Fml>) -> Sequent {
    let mut out = s.clone();
    let v = match side {
        Side::Ante => &mut out.ante,
        Side::Succ => &mut out.succ,
    };
    v.splice(i..=i, new);
    out
}

fn remove(s: &Sequent, side: Side, i: usize) -> Sequent {
    replace(s, side, i, vec![])
}

fn push(mut s: Sequent, side: Side, f: Fml) -> Sequent {
    match side {
        Side::Ante => s.ante.push(f),
        Side::Succ => s.succ.push(f),
    }
    s
}

fn get_param<'a>(params: &'a Params, keys: &[&str]) -> Option<&'a str> {
    keys.iter().find_map(|k| params.get(*k).map(String::as_str))
}

fn need<'a>(params: &'a Params, keys: &[&str], what: &str) -> R<&'a str> {
    get_param(params, keys).ok_or_else(|| format!("missing {what}"))
}

fn fml_param(params: &Params, keys: &[&str], what: &str) -> R<Fml> {
    let text = need(params, keys, what)?;
    parse_fml(text).map_err(|e| format!("cannot parse {what} '{text}': {e}"))
}

fn term_param(params: &Params, keys: &[&str], what: &str) -> R<Term> {
    let text = need(params, keys, what)?;
    parse_term(text).map_err(|e| format!("cannot parse {what} '{text}': {e}"))
}

fn index_param(params: &Params, keys: &[&str]) -> R<Option<usize>> {
    match get_param(params, keys) {
        None => Ok(None),
        Some(t) => {
            let t = t.trim_start_matches(['L', 'R']);
            t.parse().map(Some).map_err(|_| format!("bad index '{t}'"))
        }
    }
}

/// The top-level formula a rule works on: the `at` parameter, or else the
/// first formula on `side` accepted by `ok`.
fn locate(goal: &Sequent, params: &Params, side: Side, ok: &dyn Fn(&Fml) -> bool, what: &str) -> R<usize> {
    let v = side_vec(goal, side);
    match get_param(params, &["at", "pos"]) {
        Some(p) => {
            let pos = parse_pos(p, side)?;
            if pos.side != side || !pos.path.is_empty() {
                return Err(format!("position {p} is not a top-level {} formula", side_name(side)));
            }
            match v.get(pos.idx) {
                Some(f) if ok(f) => Ok(pos.idx),
                Some(f) => Err(format!("{} is not {what}", print_fml(f))),
                None => Err(format!("no formula at {p}")),
            }
        }
        None => v
            .iter()
            .position(ok)
            .ok_or_else(|| format!("no {what} in the {}", side_name(side))),
    }
}

fn side_name(side: Side) -> &'static str {
    match side {
        Side::Ante => "antecedent",
        Side::Succ => "succedent",
    }
}

fn any_of<'a>(fs: impl IntoIterator<Item = &'a Fml>) -> SetBuilder {
    let mut b = SetBuilder::new();
    for f in fs {
        b.any_fml(f);
    }
    b
}

/// Whether `t` is affine in `y` with coefficients free of `y`.
pub fn linear_in(t: &Term, y: &str) -> bool {
    fn deg(t: &Term, y: &str) -> Option<u32> {
        Some(match t {
            Term::Var(x) => u32::from(x == y),
            Term::Const(_) => 0,
            Term::Add(a, b) | Term::Sub(a, b) => deg(a, y)?.max(deg(b, y)?),
            Term::Mul(a, b) => deg(a, y)? + deg(b, y)?,
            Term::Div(a, b) => match deg(b, y)? {
                0 => deg(a, y)?,
                _ => return None,
            },
            Term::Pow(a, n) => deg(a, y)? * n,
            Term::Func(_, args) => {
                for a in args {
                    if deg(a, y)? > 0 {
                        return None;
                    }
                }
                0
            }
            Term::DiffSym(x) => return if x == y { None } else { Some(0) },
            Term::Diff(_) => return if term_vars(t).contains(y) { None } else { Some(0) },
        })
    }
    deg(t, y).is_some_and(|d| d <= 1)
}

fn is_ode_box(f: &Fml) -> bool {
    matches!(f, Fml::Boxed(p, _) if matches!(**p, Prog::Ode(_) | Prog::Test(_)))
}

/// The parts of `[ODE & Q]P`. A test `[?Q]P` (an ODE removed by a
/// mutation) reads as a system without equations.
fn ode_parts(f: &Fml) -> Option<(Option<&Ode>, Option<&Fml>, &Fml)> {
    let Fml::Boxed(p, post) = f else { return None };
    match &**p {
        Prog::Ode(ode) => Some((Some(ode), ode.domain.as_deref(), post)),
        Prog::Test(q) => Some((None, Some(q), post)),
        _ => None,
    }
}

fn true_fml() -> Fml {
    Fml::Atom(LAtom::unlabeled(Atom::True))
}

/// Renames the listed variables to fresh names in every formula; used to
/// keep facts about initial values.
fn rename_old(fs: &[Fml], vars: &[String], avoid: &mut VarSet) -> Vec<Fml> {
    let mut out: Vec<Fml> = fs.to_vec();
    for x in vars {
        if out.iter().any(|f| all_vars(f).contains(x)) {
            let y = fresh_var(x, avoid);
            avoid.insert(y.clone());
            out = out.iter().map(|f| rename_fml(f, x, &y)).collect();
        }
    }
    out
}

fn replace_term_all(t: &Term, from: &Term, to: &Term) -> Term {
    if t == from {
        return to.clone();
    }
    let r = |a: &Term| replace_term_all(a, from, to);
    match t {
        Term::Add(a, b) => Term::add(r(a), r(b)),
        Term::Sub(a, b) => Term::sub(r(a), r(b)),
        Term::Mul(a, b) => Term::mul(r(a), r(b)),
        Term::Div(a, b) => Term::div(r(a), r(b)),
        Term::Pow(a, n) => Term::Pow(Box::new(r(a)), *n),
        Term::Func(f, args) => Term::Func(f.clone(), args.iter().map(r).collect()),
        Term::Diff(a) => Term::Diff(Box::new(r(a))),
        _ => t.clone(),
    }
}

fn replace_in_atom(a: &Atom, from: &Term, to: &Term) -> Atom {
    let r = |t: &Term| replace_term_all(t, from, to);
    match a {
        Atom::Cmp(op, l, rr) => Atom::Cmp(*op, r(l), r(rr)),
        Atom::Pred(p, args) => Atom::Pred(p.clone(), args.iter().map(r).collect()),
        other => other.clone(),
    }
}

/// The innermost pair of subterms where `a` and `b` differ inside a common
/// context.
fn diff_point(a: &Term, b: &Term) -> Option<(Term, Term)> {
    if a == b {
        return None;
    }
    let pair = |x: &Term, y: &Term, u: &Term, v: &Term| -> Option<(Term, Term)> {
        match (x == u, y == v) {
            (true, false) => diff_point(y, v),
            (false, true) => diff_point(x, u),
            _ => None,
        }
    };
    let inner = match (a, b) {
        (Term::Add(x, y), Term::Add(u, v))
        | (Term::Sub(x, y), Term::Sub(u, v))
        | (Term::Mul(x, y), Term::Mul(u, v))
        | (Term::Div(x, y), Term::Div(u, v)) => pair(x, y, u, v),
        (Term::Pow(x, n), Term::Pow(u, m)) if n == m => diff_point(x, u),
        (Term::Diff(x), Term::Diff(u)) => diff_point(x, u),
        (Term::Func(f, xs), Term::Func(g, us)) if f == g && xs.len() == us.len() => {
            let diffs: Vec<usize> = (0..xs.len()).filter(|&i| xs[i] != us[i]).collect();
            if diffs.len() == 1 {
                diff_point(&xs[diffs[0]], &us[diffs[0]])
            } else {
                None
            }
        }
        _ => None,
    };
    Some(inner.unwrap_or_else(|| (a.clone(), b.clone())))
}

/// Expands one rule application on `goal`.
pub fn expand(rule: RuleId, goal: &Sequent, params: &Params, ctx: &mut RuleCtx) -> R<Step> {
    use Side::*;
    match rule {
        RuleId::AndR => {
            let i = locate(goal, params, Succ, &|f| matches!(f, Fml::And(..)), "a conjunction")?;
            let Fml::And(a, b) = &goal.succ[i] else { unreachable!() };
            Ok(Step::goals(vec![
                replace(goal, Succ, i, vec![(**a).clone()]),
                replace(goal, Succ, i, vec![(**b).clone()]),
            ]))
        }
        RuleId::AndL => {
            let i = locate(goal, params, Ante, &|f| matches!(f, Fml::And(..)), "a conjunction")?;
            let Fml::And(a, b) = &goal.ante[i] else { unreachable!() };
            Ok(Step::one(replace(goal, Ante, i, vec![(**a).clone(), (**b).clone()])))
        }
        RuleId::OrR => {
            let i = locate(goal, params, Succ, &|f| matches!(f, Fml::Or(..)), "a disjunction")?;
            let Fml::Or(a, b) = &goal.succ[i] else { unreachable!() };
            Ok(Step::one(replace(goal, Succ, i, vec![(**a).clone(), (**b).clone()])))
        }
        RuleId::OrL => {
            let i = locate(goal, params, Ante, &|f| matches!(f, Fml::Or(..)), "a disjunction")?;
            let Fml::Or(a, b) = &goal.ante[i] else { unreachable!() };
            Ok(Step::goals(vec![
                replace(goal, Ante, i, vec![(**a).clone()]),
                replace(goal, Ante, i, vec![(**b).clone()]),
            ]))
        }
        RuleId::ImpR => {
            let i = locate(goal, params, Succ, &|f| matches!(f, Fml::Imp(..)), "an implication")?;
            let Fml::Imp(a, b) = &goal.succ[i] else { unreachable!() };
            Ok(Step::one(push(replace(goal, Succ, i, vec![(**b).clone()]), Ante, (**a).clone())))
        }
        RuleId::ImpL => {
            let i = locate(goal, params, Ante, &|f| matches!(f, Fml::Imp(..)), "an implication")?;
            let Fml::Imp(a, b) = &goal.ante[i] else { unreachable!() };
            Ok(Step::goals(vec![
                push(remove(goal, Ante, i), Succ, (**a).clone()),
                replace(goal, Ante, i, vec![(**b).clone()]),
            ]))
        }
        RuleId::NotR => {
            let i = locate(goal, params, Succ, &|f| matches!(f, Fml::Not(..)), "a negation")?;
            let Fml::Not(a) = &goal.succ[i] else { unreachable!() };
            Ok(Step::one(push(remove(goal, Succ, i), Ante, (**a).clone())))
        }
        RuleId::NotL => {
            let i = locate(goal, params, Ante, &|f| matches!(f, Fml::Not(..)), "a negation")?;
            let Fml::Not(a) = &goal.ante[i] else { unreachable!() };
            Ok(Step::one(push(remove(goal, Ante, i), Succ, (**a).clone())))
        }
        RuleId::EquivR => {
            let i = locate(goal, params, Succ, &|f| matches!(f, Fml::Equiv(..)), "an equivalence")?;
            let Fml::Equiv(a, b) = &goal.succ[i] else { unreachable!() };
            Ok(Step::goals(vec![
                push(replace(goal, Succ, i, vec![(**b).clone()]), Ante, (**a).clone()),
                push(replace(goal, Succ, i, vec![(**a).clone()]), Ante, (**b).clone()),
            ]))
        }
        RuleId::EquivL => {
            let i = locate(goal, params, Ante, &|f| matches!(f, Fml::Equiv(..)), "an equivalence")?;
            let Fml::Equiv(a, b) = &goal.ante[i] else { unreachable!() };
            let both = replace(goal, Ante, i, vec![(**a).clone(), (**b).clone()]);
            let neither = push(push(remove(goal, Ante, i), Succ, (**a).clone()), Succ, (**b).clone());
            Ok(Step::goals(vec![both, neither]))
        }
        RuleId::Cut => {
            let c = fml_param(params, &["formula", "cut", "C"], "cut formula")?;
            let (c, fresh) = resolve_phi(&c, &goal.ante, ctx.alloc);
            Ok(Step::goals(vec![push(goal.clone(), Succ, c.clone()), push(goal.clone(), Ante, c.clone())])
                .with_fresh(fresh)
                .with_param("formula", &c))
        }
        RuleId::WR | RuleId::WL => {
            let side = if rule == RuleId::WR { Succ } else { Ante };
            let at = need(params, &["at", "pos"], "position")?;
            let pos = parse_pos(at, side)?;
            let v = side_vec(goal, side);
            if pos.side != side || pos.idx >= v.len() {
                return Err(format!("no {} formula at {at}", side_name(side)));
            }
            Ok(Step::one(remove(goal, side, pos.idx)).with_extra(&any_of([&v[pos.idx]])))
        }
        RuleId::PR | RuleId::PL => {
            let side = if rule == RuleId::PR { Succ } else { Ante };
            let i = index_param(params, &["at", "pos"])?.unwrap_or(0);
            let v = side_vec(goal, side);
            if i + 1 >= v.len() {
                return Err(format!("cannot exchange {} formulas {i} and {}", side_name(side), i + 1));
            }
            let mut out = goal.clone();
            match side {
                Ante => out.ante.swap(i, i + 1),
                Succ => out.succ.swap(i, i + 1),
            }
            Ok(Step::one(out))
        }
        RuleId::AllR | RuleId::ExistsL => {
            let side = if rule == RuleId::AllR { Succ } else { Ante };
            let ok: &dyn Fn(&Fml) -> bool = if side == Succ {
                &|f| matches!(f, Fml::Forall(..))
            } else {
                &|f| matches!(f, Fml::Exists(..))
            };
            let i = locate(goal, params, side, ok, "a quantifier")?;
            let (Fml::Forall(x, body) | Fml::Exists(x, body)) = &side_vec(goal, side)[i] else { unreachable!() };
            let rest = remove(goal, side, i);
            let mut avoid = sequent_vars(goal);
            let others: VarSet = rest.ante.iter().chain(rest.succ.iter()).flat_map(free_vars).collect();
            let body = if others.contains(x) {
                avoid.extend(all_vars(body));
                let y = fresh_var(x, &avoid);
                rename_fml(body, x, &y)
            } else {
                (**body).clone()
            };
            Ok(Step::one(replace(goal, side, i, vec![body])))
        }
        RuleId::AllL | RuleId::ExistsR => {
            let side = if rule == RuleId::AllL { Ante } else { Succ };
            let ok: &dyn Fn(&Fml) -> bool = if side == Ante {
                &|f| matches!(f, Fml::Forall(..))
            } else {
                &|f| matches!(f, Fml::Exists(..))
            };
            let i = locate(goal, params, side, ok, "a quantifier")?;
            let (Fml::Forall(x, body) | Fml::Exists(x, body)) = &side_vec(goal, side)[i] else { unreachable!() };
            let e = term_param(params, &["term", "e", "witness"], "instance term")?;
            let inst = subst_fml(body, &VarRef::plain(x), &e).map_err(|e| e.to_string())?;
            Ok(Step::one(replace(goal, side, i, vec![inst])))
        }
        RuleId::Loop => {
            let i = locate(goal, params, Succ, &|f| matches!(f, Fml::Boxed(p, _) if matches!(**p, Prog::Loop(_))), "a loop box")?;
            let Fml::Boxed(p, post) = &goal.succ[i] else { unreachable!() };
            let Prog::Loop(body) = &**p else { unreachable!() };
            let j = fml_param(params, &["invariant", "inv", "J"], "invariant")?;
            let (j, fresh) = resolve_phi(&j, &goal.ante, ctx.alloc);
            Ok(Step::goals(vec![
                replace(goal, Succ, i, vec![j.clone()]),
                Sequent::new(vec![j.clone()], vec![(**post).clone()]),
                Sequent::new(vec![j.clone()], vec![Fml::boxed((**body).clone(), j.clone())]),
            ])
            .with_fresh(fresh)
            .with_param("invariant", &j))
        }
        RuleId::MR => {
            let i = locate(goal, params, Succ, &|f| matches!(f, Fml::Boxed(..)), "a box")?;
            let Fml::Boxed(a, post) = &goal.succ[i] else { unreachable!() };
            let q = fml_param(params, &["formula", "Q"], "formula")?;
            let (q, fresh) = label_fresh(&q, ctx.alloc);
            Ok(Step::goals(vec![
                replace(goal, Succ, i, vec![Fml::boxed((**a).clone(), q.clone())]),
                Sequent::new(vec![q.clone()], vec![(**post).clone()]),
            ])
            .with_fresh(fresh)
            .with_param("formula", &q))
        }
        RuleId::ML => {
            let i = locate(goal, params, Ante, &|f| matches!(f, Fml::Boxed(..)), "a box")?;
            let Fml::Boxed(a, post) = &goal.ante[i] else { unreachable!() };
            let q = fml_param(params, &["formula", "Q"], "formula")?;
            let (q, fresh) = label_fresh(&q, ctx.alloc);
            Ok(Step::goals(vec![
                replace(goal, Ante, i, vec![Fml::boxed((**a).clone(), q.clone())]),
                Sequent::new(vec![(**post).clone()], vec![q.clone()]),
            ])
            .with_fresh(fresh)
            .with_param("formula", &q))
        }
        RuleId::GVR => {
            let i = locate(goal, params, Succ, &|f| matches!(f, Fml::Boxed(..)), "a box")?;
            let Fml::Boxed(a, post) = &goal.succ[i] else { unreachable!() };
            let bv = bound_vars(a);
            let is_const = |f: &Fml| free_vars(f).is_disjoint(&bv);
            let mut dropped = SetBuilder::new();
            dropped.any_prog(a);
            let mut ante = Vec::new();
            for f in &goal.ante {
                if is_const(f) {
                    ante.push(f.clone());
                } else {
                    dropped.any_fml(f);
                }
            }
            let mut succ = Vec::new();
            for (k, f) in goal.succ.iter().enumerate() {
                if k == i {
                    succ.push((**post).clone());
                } else if is_const(f) {
                    succ.push(f.clone());
                } else {
                    dropped.any_fml(f);
                }
            }
            Ok(Step::one(Sequent::new(ante, succ)).with_extra(&dropped))
        }
        RuleId::IG => {
            let i = locate(goal, params, Succ, &|_| true, "a formula")?;
            let y = need(params, &["var", "y"], "ghost variable")?.to_string();
            let e = term_param(params, &["term", "e"], "ghost term")?;
            if sequent_vars(goal).contains(&y) || term_vars(&e).contains(&y) {
                return Err(format!("ghost variable {y} is not new"));
            }
            let j = ctx.alloc.fresh();
            let f = Fml::boxed(
                Prog::Atom(LAtom::new(vec![j.clone()], Atom::Assign(VarRef::plain(&y), e))),
                goal.succ[i].clone(),
            );
            Ok(Step::one(replace(goal, Succ, i, vec![f])).with_fresh(vec![j]))
        }
        RuleId::CER | RuleId::CEL => {
            let side = if rule == RuleId::CER { Succ } else { Ante };
            let pos = parse_pos(get_param(params, &["at", "pos"]).unwrap_or("0"), side)?;
            if pos.side != side {
                return Err(format!("{rule} works in the {}", side_name(side)));
            }
            let top = side_vec(goal, side)
                .get(pos.idx)
                .ok_or_else(|| format!("no {} formula {}", side_name(side), pos.idx))?;
            let target = fml_at(top, &pos.path).ok_or("the position does not address a formula")?;
            if let Some(ax) = get_param(params, &["axiom", "name"]) {
                let forward = match get_param(params, &["direction", "dir"]) {
                    None | Some("backward") | Some("lr") => false,
                    Some("forward") | Some("rl") => true,
                    Some(d) => return Err(format!("unknown direction '{d}'")),
                };
                let rw = axioms::rewrite(ax, target, forward, ctx.alloc)?;
                let new_top = replace_fml_at(top, &pos.path, rw.result).ok_or("cannot rewrite at this position")?;
                let mut step = Step::one(replace(goal, side, pos.idx, vec![new_top]));
                step.premises.push(Premise::Axiom {
                    name: axioms::canonical_axiom(ax).unwrap_or(ax).to_string(),
                    set: rw.set,
                });
                Ok(step.with_fresh(rw.fresh))
            } else {
                let q = fml_param(params, &["replacement", "formula", "Q"], "axiom or replacement")?;
                let (q, fresh) = resolve_phi(&q, std::slice::from_ref(target), ctx.alloc);
                let new_top = replace_fml_at(top, &pos.path, q.clone()).ok_or("cannot rewrite at this position")?;
                Ok(Step::goals(vec![
                    replace(goal, side, pos.idx, vec![new_top]),
                    Sequent::new(vec![], vec![Fml::equiv(q.clone(), target.clone())]),
                ])
                .with_fresh(fresh)
                .with_param("replacement", &q))
            }
        }
        RuleId::CQR | RuleId::CQL => {
            let side = if rule == RuleId::CQR { Succ } else { Ante };
            let pos = parse_pos(get_param(params, &["at", "pos"]).unwrap_or("0"), side)?;
            let top = side_vec(goal, side)
                .get(pos.idx)
                .ok_or_else(|| format!("no {} formula {}", side_name(side), pos.idx))?;
            let target = fml_at(top, &pos.path).ok_or("the position does not address a formula")?;
            let Fml::Atom(a) = target else { return Err(format!("{} is not an atom", print_fml(target))) };
            let e = term_param(params, &["from", "e"], "term to replace")?;
            let k = term_param(params, &["to", "k"], "replacement term")?;
            let new_atom = replace_in_atom(&a.atom, &e, &k);
            if new_atom == a.atom {
                return Err(format!("{} does not occur in {}", print_term(&e), print_atom(&a.atom)));
            }
            let new_top = replace_fml_at(top, &pos.path, Fml::Atom(LAtom::new(a.labels.clone(), new_atom)))
                .ok_or("cannot rewrite at this position")?;
            let l = ctx.alloc.fresh();
            let mut step = Step::one(replace(goal, side, pos.idx, vec![new_top]));
            match get_param(params, &["axiom", "name"]) {
                Some(ax) => {
                    axioms::equality_instance(ax, &k, &e)?;
                    step.premises.push(Premise::Axiom {
                        name: axioms::canonical_axiom(ax).unwrap_or(ax).to_string(),
                        set: TrackedLabelSet::singleton(l.clone(), MutationSet::ID),
                    });
                }
                None => step.premises.push(Premise::Goal(Sequent::new(
                    vec![],
                    vec![Fml::atom(vec![l.clone()], Atom::Cmp(CmpOp::Eq, k, e))],
                ))),
            }
            step.first_only = true;
            Ok(step.with_fresh(vec![l]))
        }
        RuleId::CTR | RuleId::CTL => {
            let side = if rule == RuleId::CTR { Succ } else { Ante };
            let i = locate(goal, params, side, &|f| matches!(f, Fml::Atom(a) if matches!(a.atom, Atom::Cmp(CmpOp::Eq, ..))), "an equation")?;
            let Fml::Atom(a) = &side_vec(goal, side)[i] else { unreachable!() };
            let Atom::Cmp(_, l, r) = &a.atom else { unreachable!() };
            let (e, k) = diff_point(l, r).ok_or("both sides are already equal")?;
            let premise = Sequent::new(vec![], vec![Fml::atom(a.labels.clone(), Atom::Cmp(CmpOp::Eq, e, k))]);
            let rest = remove(goal, side, i);
            if side == Succ {
                let mut b = SetBuilder::new();
                b.any_seq(&rest);
                Ok(Step::one(premise).with_extra(&b))
            } else {
                // the equation is valid, so the conclusion must hold without it
                Ok(Step::goals(vec![premise, rest]))
            }
        }
        RuleId::UR => {
            let x = need(params, &["from", "x"], "variable to rename")?;
            let y = need(params, &["to", "y"], "new name")?;
            if sequent_vars(goal).contains(y) {
                return Err(format!("{y} already occurs"));
            }
            let r = |fs: &[Fml]| fs.iter().map(|f| rename_fml(f, x, y)).collect();
            Ok(Step::one(Sequent::new(r(&goal.ante), r(&goal.succ))))
        }
        RuleId::BRR | RuleId::BRL => {
            let side = if rule == RuleId::BRR { Succ } else { Ante };
            let is_assign = |f: &Fml| matches!(f, Fml::Boxed(p, _) if matches!(&**p, Prog::Atom(a) if matches!(a.atom, Atom::Assign(..))));
            let i = locate(goal, params, side, &is_assign, "an assignment box")?;
            let Fml::Boxed(p, body) = &side_vec(goal, side)[i] else { unreachable!() };
            let Prog::Atom(a) = &**p else { unreachable!() };
            let Atom::Assign(x, e) = &a.atom else { unreachable!() };
            let y = need(params, &["to", "y"], "new name")?;
            let fv = free_vars(body);
            if x.prime || fv.contains(y) || fv.contains(&format!("{y}'")) || fv.contains(&format!("{}'", x.name)) {
                return Err("bound renaming side condition fails".into());
            }
            let f = Fml::boxed(
                Prog::Atom(LAtom::new(a.labels.clone(), Atom::Assign(VarRef::plain(y), e.clone()))),
                rename_fml(body, &x.name, y),
            );
            Ok(Step::one(replace(goal, side, i, vec![f])))
        }
        RuleId::BoxAnd => {
            let i = locate(goal, params, Succ, &|f| matches!(f, Fml::Boxed(_, b) if matches!(**b, Fml::And(..))), "a box of a conjunction")?;
            let Fml::Boxed(a, body) = &goal.succ[i] else { unreachable!() };
            let Fml::And(p, q) = &**body else { unreachable!() };
            let f = Fml::and(Fml::boxed((**a).clone(), (**p).clone()), Fml::boxed((**a).clone(), (**q).clone()));
            Ok(Step::one(replace(goal, Succ, i, vec![f])))
        }
        RuleId::AssignEq => {
            let ok = |f: &Fml| matches!(f, Fml::Boxed(p, _) if matches!(&**p, Prog::Atom(_) | Prog::Test(_)));
            let i = locate(goal, params, Succ, &ok, "an assignment box")?;
            let Fml::Boxed(p, body) = &goal.succ[i] else { unreachable!() };
            let a = match &**p {
                Prog::Test(q) => {
                    // [?Q]P, e.g. an assignment removed by R
                    return Ok(Step::one(push(replace(goal, Succ, i, vec![(**body).clone()]), Ante, (**q).clone())));
                }
                Prog::Atom(a) => a,
                _ => unreachable!(),
            };
            let (x, e) = match &a.atom {
                Atom::Assign(x, e) if !x.prime => (x.name.clone(), Some(e.clone())),
                Atom::AssignAny(x) => (x.clone(), None),
                _ => return Err("differential assignments need [:=]".into()),
            };
            let rest = remove(goal, Succ, i);
            let mut avoid = sequent_vars(goal);
            let ctx_fmls: Vec<Fml> = rest.ante.iter().chain(rest.succ.iter()).cloned().collect();
            let needs = ctx_fmls.iter().any(|f| all_vars(f).contains(&x)) || e.as_ref().is_some_and(|e| term_vars(e).contains(&x));
            let (ante, mut succ, e) = if needs {
                let y = fresh_var(&x, &avoid);
                avoid.insert(y.clone());
                let r = |fs: &[Fml]| fs.iter().map(|f| rename_fml(f, &x, &y)).collect::<Vec<_>>();
                (r(&rest.ante), r(&rest.succ), e.map(|e| rename_term(&e, &x, &y)))
            } else {
                (rest.ante.clone(), rest.succ.clone(), e)
            };
            succ.insert(i.min(succ.len()), (**body).clone());
            let mut out = Sequent::new(ante, succ);
            match e {
                Some(e) => {
                    out.ante.push(Fml::atom(a.labels.clone(), Atom::Cmp(CmpOp::Eq, Term::var(&x), e)));
                    Ok(Step::one(out))
                }
                None => {
                    let mut b = SetBuilder::new();
                    b.labels(&a.labels, MutationSet::ANY);
                    Ok(Step::one(out).with_extra(&b))
                }
            }
        }
        RuleId::DW => {
            let i = locate(goal, params, Succ, &is_ode_box, "an ODE box")?;
            let (ode, dom, post) = ode_parts(&goal.succ[i]).unwrap();
            let rest = remove(goal, Succ, i);
            let mut extra = SetBuilder::new();
            let (mut ante, succ) = match ode {
                Some(ode) => {
                    for e in &ode.eqs {
                        extra.labels(&e.labels, MutationSet::ANY);
                    }
                    let mut avoid = sequent_vars(goal);
                    let n = rest.ante.len();
                    let all: Vec<Fml> = rest.ante.iter().chain(rest.succ.iter()).cloned().collect();
                    let renamed = rename_old(&all, &ode.vars(), &mut avoid);
                    (renamed[..n].to_vec(), renamed[n..].to_vec())
                }
                None => (rest.ante.clone(), rest.succ.clone()),
            };
            if let Some(q) = dom {
                ante.push(q.clone());
            }
            let mut succ = succ;
            succ.insert(i.min(succ.len()), post.clone());
            Ok(Step::one(Sequent::new(ante, succ)).with_extra(&extra))
        }
        RuleId::DI => {
            let i = locate(goal, params, Succ, &is_ode_box, "an ODE box")?;
            let (ode, dom, post) = ode_parts(&goal.succ[i]).unwrap();
            let init = replace(goal, Succ, i, vec![post.clone()]);
            let step = match ode {
                None => Sequent::new(vec![], vec![true_fml()]),
                Some(ode) => {
                    let ev: VarSet = ode.vars().into_iter().collect();
                    let mut d = differential(post, &ev)?;
                    for e in ode.eqs.iter().rev() {
                        let Atom::OdeEq(x, f) = &e.atom else { unreachable!() };
                        d = Fml::boxed(
                            Prog::Atom(LAtom::new(e.labels.clone(), Atom::Assign(VarRef::primed(x), f.clone()))),
                            d,
                        );
                    }
                    let bv = bound_vars(&Prog::Ode(ode.clone()));
                    let is_const = |f: &&Fml| free_vars(f).is_disjoint(&bv);
                    let mut ante: Vec<Fml> = goal.ante.iter().filter(is_const).cloned().collect();
                    if let Some(q) = dom {
                        ante.push(q.clone());
                    }
                    let rest = remove(goal, Succ, i);
                    let mut succ: Vec<Fml> = rest.succ.iter().filter(is_const).cloned().collect();
                    succ.insert(i.min(succ.len()), d);
                    Sequent::new(ante, succ)
                }
            };
            Ok(Step::goals(vec![init, step]))
        }
        RuleId::DC => {
            let i = locate(goal, params, Succ, &is_ode_box, "an ODE box")?;
            let (ode, dom, post) = ode_parts(&goal.succ[i]).unwrap();
            let c = fml_param(params, &["formula", "C", "cut"], "formula")?;
            let (c, fresh) = resolve_phi(&c, &goal.ante, ctx.alloc);
            let new_dom = match dom {
                Some(q) => Fml::and(q.clone(), c.clone()),
                None => c.clone(),
            };
            let (first, second) = match ode {
                Some(ode) => {
                    let p = Prog::Ode(ode.clone());
                    let p2 = Prog::Ode(Ode {
                        eqs: ode.eqs.clone(),
                        domain: Some(Box::new(new_dom)),
                    });
                    (Fml::boxed(p, c.clone()), Fml::boxed(p2, post.clone()))
                }
                None => (
                    Fml::boxed(Prog::test(dom.cloned().unwrap_or_else(true_fml)), c.clone()),
                    Fml::boxed(Prog::test(new_dom), post.clone()),
                ),
            };
            Ok(Step::goals(vec![replace(goal, Succ, i, vec![first]), replace(goal, Succ, i, vec![second])])
                .with_fresh(fresh)
                .with_param("formula", &c))
        }
        RuleId::DG => {
            let i = locate(goal, params, Succ, &is_ode_box, "an ODE box")?;
            let (ode, dom, post) = ode_parts(&goal.succ[i]).unwrap();
            let ghost_text = need(params, &["ghost"], "ghost equation")?;
            let ghost = match parse_fml(&format!("[{{{ghost_text}}}]true")) {
                Ok(Fml::Boxed(p, _)) => match *p {
                    Prog::Ode(o) if o.eqs.len() == 1 && o.domain.is_none() => o.eqs[0].atom.clone(),
                    _ => return Err(format!("bad ghost equation '{ghost_text}'")),
                },
                _ => return Err(format!("bad ghost equation '{ghost_text}'")),
            };
            let Atom::OdeEq(y, rhs) = &ghost else { unreachable!() };
            let init = term_param(params, &["init", "term"], "initial ghost value")?;
            let mut used = sequent_vars(goal);
            used.extend(term_vars(&init));
            if used.contains(y) {
                return Err(format!("ghost variable {y} is not new"));
            }
            if !linear_in(rhs, y) {
                return Err(format!("ghost equation for {y} is not linear in {y}"));
            }
            let li = ctx.alloc.fresh();
            let init_eq = Fml::atom(vec![li.clone()], Atom::Cmp(CmpOp::Eq, Term::var(y), init));
            let mut fresh = vec![li];
            let boxed = match ode {
                Some(ode) => {
                    let lg = ctx.alloc.fresh();
                    fresh.push(lg.clone());
                    let mut eqs = ode.eqs.clone();
                    eqs.push(LAtom::new(vec![lg], ghost.clone()));
                    Fml::boxed(
                        Prog::Ode(Ode {
                            eqs,
                            domain: ode.domain.clone(),
                        }),
                        post.clone(),
                    )
                }
                None => Fml::boxed(Prog::test(dom.cloned().unwrap_or_else(true_fml)), post.clone()),
            };
            Ok(Step::one(push(replace(goal, Succ, i, vec![boxed]), Ante, init_eq)).with_fresh(fresh))
        }
        RuleId::WRd | RuleId::WLd | RuleId::WLR => {
            let a = index_param(params, &["ante"])?.unwrap_or(0);
            let s = index_param(params, &["succ"])?.unwrap_or(0);
            let at = index_param(params, &["at", "pos"])?;
            let (keep_a, keep_s) = match rule {
                RuleId::WRd => (None, Some(at.unwrap_or(s))),
                RuleId::WLd => (Some(at.unwrap_or(a)), None),
                _ => (Some(a), Some(s)),
            };
            let mut out = Sequent::default();
            let mut b = SetBuilder::new();
            for (k, f) in goal.ante.iter().enumerate() {
                if Some(k) == keep_a {
                    out.ante.push(f.clone());
                } else {
                    b.any_fml(f);
                }
            }
            for (k, f) in goal.succ.iter().enumerate() {
                if Some(k) == keep_s {
                    out.succ.push(f.clone());
                } else {
                    b.any_fml(f);
                }
            }
            if keep_a.is_some_and(|k| k >= goal.ante.len()) || keep_s.is_some_and(|k| k >= goal.succ.len()) {
                return Err("the kept formula does not exist".into());
            }
            Ok(Step::one(out).with_extra(&b))
        }
        RuleId::CutR => {
            let i = locate(goal, params, Succ, &|_| true, "a formula")?;
            let q = fml_param(params, &["formula", "Q"], "formula")?;
            let (q, fresh) = label_fresh(&q, ctx.alloc);
            let p = goal.succ[i].clone();
            Ok(Step::goals(vec![
                replace(goal, Succ, i, vec![q.clone()]),
                replace(goal, Succ, i, vec![Fml::imp(q.clone(), p)]),
            ])
            .with_fresh(fresh)
            .with_param("formula", &q))
        }
        RuleId::CutL => {
            let i = locate(goal, params, Ante, &|_| true, "a formula")?;
            let q = fml_param(params, &["formula", "Q"], "formula")?;
            let (q, fresh) = label_fresh(&q, ctx.alloc);
            let p = goal.ante[i].clone();
            Ok(Step::goals(vec![
                replace(goal, Ante, i, vec![q.clone()]),
                push(remove(goal, Ante, i), Succ, Fml::imp(p, q.clone())),
            ])
            .with_fresh(fresh)
            .with_param("formula", &q))
        }
        RuleId::EquivCR | RuleId::EquivCL => {
            let side = if rule == RuleId::EquivCR { Succ } else { Ante };
            let i = locate(goal, params, side, &|f| matches!(f, Fml::Equiv(..)), "an equivalence")?;
            let Fml::Equiv(a, b) = &side_vec(goal, side)[i] else { unreachable!() };
            Ok(Step::one(replace(goal, side, i, vec![Fml::equiv((**b).clone(), (**a).clone())])))
        }
        RuleId::ImpToEquiv => {
            let i = locate(goal, params, Succ, &|f| matches!(f, Fml::Imp(..)), "an implication")?;
            let Fml::Imp(a, b) = &goal.succ[i] else { unreachable!() };
            Ok(Step::one(replace(goal, Succ, i, vec![Fml::equiv((**a).clone(), (**b).clone())])))
        }
        RuleId::Id => {
            let (a, s) = match (index_param(params, &["ante"])?, index_param(params, &["succ"])?) {
                (Some(a), Some(s)) => (a, s),
                _ => {
                    let mut found = None;
                    'outer: for (a, f) in goal.ante.iter().enumerate() {
                        for (s, g) in goal.succ.iter().enumerate() {
                            if f.unlabel() == g.unlabel() {
                                found = Some((a, s));
                                break 'outer;
                            }
                        }
                    }
                    found.ok_or("no formula occurs on both sides")?
                }
            };
            let (Some(f), Some(g)) = (goal.ante.get(a), goal.succ.get(s)) else {
                return Err("id: index out of range".into());
            };
            if f.unlabel() != g.unlabel() {
                return Err(format!("{} and {} differ", print_fml(f), print_fml(g)));
            }
            let mut b = SetBuilder::new();
            b.any_seq(goal).fuse(f, g);
            Ok(Step::leaf(Leaf::Const(b.build())))
        }
        RuleId::QE => Ok(Step::leaf(Leaf::Oracle)),
        RuleId::TrueR | RuleId::FalseL => {
            let (side, want) = if rule == RuleId::TrueR { (Succ, Atom::True) } else { (Ante, Atom::False) };
            let i = locate(goal, params, side, &|f| matches!(f, Fml::Atom(a) if a.atom == want), "a truth constant")?;
            let mut b = SetBuilder::new();
            b.any_seq(goal).id_fml(&side_vec(goal, side)[i]);
            Ok(Step::leaf(Leaf::Const(b.build())))
        }
        RuleId::Axiom => {
            let name = need(params, &["axiom", "name"], "axiom name")?;
            let i = locate(goal, params, Succ, &|_| true, "a formula")?;
            let set = axioms::leaf_instance(name, &goal.succ[i])?;
            let mut b = SetBuilder::new();
            b.any_seq(&remove(goal, Succ, i));
            let set = set.merge(&b.build()).map_err(|e| e.to_string())?;
            Ok(Step::leaf(Leaf::Const(set)))
        }
    }
}

/// Labels of `f`'s atoms, all with mutation set `any`; fused atoms stay
/// fused.
pub fn any_set(fs: &[Fml]) -> TrackedLabelSet {
    let mut b = SetBuilder::new();
    for f in fs {
        b.any_fml(f);
    }
    b.build()
}

/// Whether the goal is closed by a truth constant.
pub fn trivially_closed(goal: &Sequent) -> Option<RuleId> {
    if goal.succ.iter().any(Fml::is_true_atom) {
        Some(RuleId::TrueR)
    } else if goal.ante.iter().any(Fml::is_false_atom) {
        Some(RuleId::FalseL)
    } else {
        None
    }
}

#[allow(dead_code)]
fn labels_in(fs: &[Fml]) -> Vec<Label> {
    fs.iter().flat_map(|f| atoms_of(f).into_iter().flat_map(|a| a.labels.clone())).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn goal(ante: &[&str], succ: &[&str]) -> (Sequent, LabelAllocator) {
        let mut alloc = LabelAllocator::new();
        let mut p = |t: &&str| parse_model_with(t, &mut alloc).unwrap();
        let s = Sequent::new(ante.iter().map(&mut p).collect(), succ.iter().map(&mut p).collect());
        (s, alloc)
    }

    fn run(rule: &str, g: &Sequent, alloc: &mut LabelAllocator, params: &[(&str, &str)]) -> R<Step> {
        let params: Params = params.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect();
        expand(RuleId::from_name(rule).unwrap(), g, &params, &mut RuleCtx { alloc })
    }

    fn goals(step: &Step) -> Vec<String> {
        step.premises
            .iter()
            .filter_map(|p| match p {
                Premise::Goal(s) => Some(print_sequent(s)),
                Premise::Axiom { .. } => None,
            })
            .collect()
    }

    #[test]
    fn names_round_trip() {
        for r in RuleId::ALL {
            assert_eq!(RuleId::from_name(r.name()), Some(*r));
        }
        assert_eq!(RuleId::from_name("auto"), Some(RuleId::QE));
        assert_eq!(RuleId::from_name("ℝ"), Some(RuleId::QE));
        assert_eq!(RuleId::from_name("US"), None);
    }

    #[test]
    fn propositional_shapes() {
        let (g, mut a) = goal(&["p > 0 || q > 0"], &["x > 0 -> y > 0"]);
        let s = run("impR", &g, &mut a, &[]).unwrap();
        assert_eq!(goals(&s), vec!["p > 0 || q > 0, x > 0 |- y > 0"]);
        let s = run("orL", &g, &mut a, &[]).unwrap();
        assert_eq!(goals(&s).len(), 2);
        assert!(run("andR", &g, &mut a, &[]).is_err());
    }

    #[test]
    fn loop_requires_invariant() {
        let (g, mut a) = goal(&["x >= 1"], &["[(x := x + 1)*] x >= 0"]);
        let e = run("loop", &g, &mut a, &[]).err().unwrap();
        assert_eq!(e, "missing invariant");
        let s = run("loop", &g, &mut a, &[("invariant", "x >= 1 && x > -1")]).unwrap();
        assert_eq!(s.premises.len(), 3);
        assert_eq!(s.fresh.len(), 1);
        // x >= 1 reuses the context label
        let (_, j) = s.param.as_ref().unwrap();
        assert_eq!(atoms_of(j)[0].labels, atoms_of(&g.ante[0])[0].labels);
    }

    #[test]
    fn cer_with_axiom_has_constant_premise() {
        let (g, mut a) = goal(&[], &["[x := 1; y := 2] x > 0"]);
        let s = run("CER", &g, &mut a, &[("at", "R0"), ("axiom", "[;]")]).unwrap();
        assert_eq!(goals(&s), vec![" |- [x := 1] [y := 2] x > 0"]);
        assert!(matches!(s.premises[1], Premise::Axiom { .. }));
    }

    #[test]
    fn dw_keeps_old_values() {
        let (g, mut a) = goal(&["x >= 0", "c > 0"], &["[{x' = c & x <= 5}] x >= -1"]);
        let s = run("dW", &g, &mut a, &[]).unwrap();
        assert_eq!(goals(&s), vec!["x_0 >= 0, c > 0, x <= 5 |- x >= -1"]);
        let t = goal(&["x >= 0"], &["[?x <= 5] x >= -1"]).0;
        let s = run("dW", &t, &mut a, &[]).unwrap();
        assert_eq!(goals(&s), vec!["x >= 0, x <= 5 |- x >= -1"]);
    }

    #[test]
    fn di_premises() {
        let (g, mut a) = goal(&["k = 0", "v >= v0"], &["[{x' = v, v' = k & x >= 0}] v >= v0"]);
        let s = run("dI", &g, &mut a, &[]).unwrap();
        assert_eq!(
            goals(&s),
            vec!["k = 0, v >= v0 |- v >= v0", "k = 0, x >= 0 |- [x' := v] [v' := k] v' >= 0"]
        );
    }

    #[test]
    fn dg_adds_ghost() {
        let (g, mut a) = goal(&["x > 0"], &["[{x' = -x}] x > 0"]);
        let s = run("dG", &g, &mut a, &[("ghost", "y' = y/2"), ("init", "1")]).unwrap();
        assert_eq!(goals(&s), vec!["x > 0, y = 1 |- [{x' = -x, y' = y/2}] x > 0"]);
        assert!(run("dG", &g, &mut a, &[("ghost", "y' = y^2"), ("init", "1")]).is_err());
        assert!(run("dG", &g, &mut a, &[("ghost", "x' = x"), ("init", "1")]).is_err());
    }

    #[test]
    fn assign_eq_renames_old_value() {
        let (g, mut a) = goal(&["x > 0"], &["[x := x + 1] x > 1"]);
        let s = run("[:=]=", &g, &mut a, &[]).unwrap();
        assert_eq!(goals(&s), vec!["x_0 > 0, x = x_0 + 1 |- x > 1"]);
        let (g, mut a) = goal(&[], &["[?true] x > 1"]);
        let s = run("[:=]=", &g, &mut a, &[]).unwrap();
        assert_eq!(goals(&s), vec!["true |- x > 1"]);
    }

    #[test]
    fn id_fuses() {
        let (g, mut a) = goal(&["@a x > 0", "@b y > 0"], &["@c x > 0"]);
        let s = run("id", &g, &mut a, &[]).unwrap();
        let Some(Leaf::Const(set)) = s.leaf else { panic!() };
        assert_eq!(set.partners(&Label::new("a", Origin::Model)), vec![Label::new("c", Origin::Model)]);
        assert_eq!(set.lookup(&Label::new("b", Origin::Model)), Some(MutationSet::ANY));
    }

    #[test]
    fn congruence() {
        let (g, mut a) = goal(&[], &["@j 2*(x + 1) = 2*(1 + x)"]);
        let s = run("CTR", &g, &mut a, &[]).unwrap();
        assert_eq!(goals(&s), vec![" |- x + 1 = 1 + x"]);
        let (g, mut a) = goal(&[], &["(x + y)' >= 0"]);
        let s = run("CQR", &g, &mut a, &[("from", "(x + y)'"), ("to", "x' + y'"), ("axiom", "+'")]).unwrap();
        assert_eq!(goals(&s), vec![" |- x' + y' >= 0"]);
        assert!(s.first_only);
    }
}
