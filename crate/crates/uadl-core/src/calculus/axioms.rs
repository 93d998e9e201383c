//! The axiom catalog: equivalences used for contextual rewriting, schemas
//! closed as leaves, and the differential equalities.

use super::ode::{differential, solve};
use crate::labelsets::{MutationSet, TrackedLabelSet};
use crate::syntax::subst::subst_fml;
use crate::syntax::vars::{bound_vars, free_vars, fresh_var, prime, VarSet};
use crate::syntax::visit::{atoms_of, atoms_of_prog, fuse_prog_with, fuse_with};
use crate::syntax::*;

/// Axioms usable with CER/CEL, by canonical name.
pub const EQUIVALENCES: &[&str] = &[
    "[?]", "[;]", "<>", "[++]", "[*]", "I", "[:=]", "[:=]1", "[:=]2", "[:*]", "[:*]1", "[:*]2",
    "exists", "DW", "DE", "DE1", "DE2", "DG", "[']", "DS",
];

/// Axioms that are implications; they only close leaves.
pub const IMPLICATIONS: &[&str] = &["K", "V", "alli", "allimp", "Vall", "DI", "DC", "o'"];

/// Differential equalities, used to close the side premise of CQR/CQL.
pub const EQUALITIES: &[&str] = &["c'", "x'", "+'", "-'", "*'", "/'"];

/// Accepts the spellings used in the literature as well.
pub fn canonical_axiom(name: &str) -> Option<&'static str> {
    let n = match name {
        "[∪]" | "[u]" | "[U]" | "choice" => "[++]",
        "⟨·⟩" | "<.>" | "diamond" => "<>",
        "∀i" => "alli",
        "∀→" | "all->" => "allimp",
        "V∀" => "Vall",
        "∃" => "exists",
        "·'" => "*'",
        "∘'" => "o'",
        "[:=*]" => "[:*]",
        "[:=*]1" => "[:*]1",
        "[:=*]2" => "[:*]2",
        other => other,
    };
    EQUIVALENCES
        .iter()
        .chain(IMPLICATIONS)
        .chain(EQUALITIES)
        .find(|a| **a == n)
        .copied()
}

/// Collects label groups for an axiom's constant set.
#[derive(Default)]
pub struct SetBuilder {
    groups: Vec<(Vec<Label>, MutationSet)>,
}

impl SetBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn any_fml(&mut self, f: &Fml) -> &mut Self {
        for a in atoms_of(f) {
            self.groups.push((a.labels.clone(), MutationSet::ANY));
        }
        self
    }

    pub fn any_prog(&mut self, p: &Prog) -> &mut Self {
        for a in atoms_of_prog(p) {
            self.groups.push((a.labels.clone(), MutationSet::ANY));
        }
        self
    }

    pub fn any_seq(&mut self, s: &Sequent) -> &mut Self {
        for f in s.ante.iter().chain(s.succ.iter()) {
            self.any_fml(f);
        }
        self
    }

    pub fn labels(&mut self, labels: &[Label], set: MutationSet) -> &mut Self {
        for l in labels {
            self.groups.push((vec![l.clone()], set));
        }
        self
    }

    pub fn id_fml(&mut self, f: &Fml) -> &mut Self {
        for a in atoms_of(f) {
            self.groups.push((a.labels.clone(), MutationSet::ID));
        }
        self
    }

    /// Fuses corresponding atoms of two structurally equal formulas.
    pub fn fuse(&mut self, a: &Fml, b: &Fml) -> &mut Self {
        for (x, y) in atoms_of(a).into_iter().zip(atoms_of(b)) {
            let mut g = x.labels.clone();
            g.extend(y.labels.iter().cloned());
            self.groups.push((g, MutationSet::ANY));
        }
        self
    }

    pub fn fuse_prog(&mut self, a: &Prog, b: &Prog) -> &mut Self {
        for (x, y) in atoms_of_prog(a).into_iter().zip(atoms_of_prog(b)) {
            let mut g = x.labels.clone();
            g.extend(y.labels.iter().cloned());
            self.groups.push((g, MutationSet::ANY));
        }
        self
    }

    pub fn build(&self) -> TrackedLabelSet {
        TrackedLabelSet::from_groups(self.groups.clone()).expect("axiom sets always allow id")
    }
}

/// Result of rewriting a subformula with an equivalence axiom.
#[derive(Clone, Debug)]
pub struct Rewrite {
    pub result: Fml,
    /// The axiom's constant output set, before ⊔ χ.
    pub set: TrackedLabelSet,
    /// Labels created for atoms the axiom introduces.
    pub fresh: Vec<Label>,
}

fn same(a: &Fml, b: &Fml) -> bool {
    a.unlabel() == b.unlabel()
}

fn same_prog(a: &Prog, b: &Prog) -> bool {
    a.unlabel() == b.unlabel()
}

fn err<T>(axiom: &str, f: &Fml, what: &str) -> Result<T, String> {
    Err(format!("axiom {axiom} does not apply to {}: {what}", print_fml(f)))
}

fn any_both(f: &Fml, g: &Fml) -> SetBuilder {
    let mut b = SetBuilder::new();
    b.any_fml(f).any_fml(g);
    b
}

fn simple(result: Fml, f: &Fml) -> Rewrite {
    let set = any_both(f, &result).build();
    Rewrite {
        result,
        set,
        fresh: Vec::new(),
    }
}

fn atom_fml(labels: Vec<Label>, atom: Atom) -> Fml {
    Fml::Atom(LAtom::new(labels, atom))
}

fn assign_box(x: VarRef, e: Term, labels: Vec<Label>, p: Fml) -> Fml {
    Fml::boxed(Prog::Atom(LAtom::new(labels, Atom::Assign(x, e))), p)
}

/// Splits the primed assignment chain that DE introduces.
fn strip_diff_assigns(ode: &Ode, mut p: &Fml) -> Option<(Vec<Vec<Label>>, Fml)> {
    let mut labels = Vec::new();
    for e in &ode.eqs {
        let Atom::OdeEq(x, f) = &e.atom else { return None };
        match p {
            Fml::Boxed(q, body) => match &**q {
                Prog::Atom(a) => match &a.atom {
                    Atom::Assign(v, g) if v.prime && v.name == *x && g == f => {
                        labels.push(a.labels.clone());
                        p = body;
                    }
                    _ => return None,
                },
                _ => return None,
            },
            _ => return None,
        }
    }
    Some((labels, p.clone()))
}

/// Rewrites `f` with an equivalence axiom, left to right (`forward` =
/// false) or right to left. New atoms get fresh labels from `alloc`.
pub fn rewrite(axiom: &str, f: &Fml, forward: bool, alloc: &mut LabelAllocator) -> Result<Rewrite, String> {
    let name = canonical_axiom(axiom).ok_or_else(|| format!("unknown axiom '{axiom}'"))?;
    if !EQUIVALENCES.contains(&name) {
        return Err(format!("axiom {name} is not an equivalence and cannot be used for rewriting"));
    }
    match (name, forward, f) {
        ("[?]", false, Fml::Boxed(p, body)) => match &**p {
            Prog::Test(q) => Ok(simple(Fml::imp((**q).clone(), (**body).clone()), f)),
            _ => err(name, f, "expected [?Q]P"),
        },
        ("[?]", true, Fml::Imp(q, body)) => Ok(simple(Fml::boxed(Prog::test((**q).clone()), (**body).clone()), f)),
        ("[;]", false, Fml::Boxed(p, body)) => match &**p {
            Prog::Seq(a, b) => Ok(simple(
                Fml::boxed((**a).clone(), Fml::boxed((**b).clone(), (**body).clone())),
                f,
            )),
            _ => err(name, f, "expected [a;b]P"),
        },
        ("[;]", true, Fml::Boxed(a, inner)) => match &**inner {
            Fml::Boxed(b, body) => Ok(simple(
                Fml::boxed(Prog::seq((**a).clone(), (**b).clone()), (**body).clone()),
                f,
            )),
            _ => err(name, f, "expected [a][b]P"),
        },
        ("<>", false, Fml::Diamond(a, body)) => Ok(simple(
            Fml::not(Fml::boxed((**a).clone(), Fml::not((**body).clone()))),
            f,
        )),
        ("<>", true, Fml::Not(inner)) => match &**inner {
            Fml::Boxed(a, nb) => match &**nb {
                Fml::Not(body) => Ok(simple(Fml::diamond((**a).clone(), (**body).clone()), f)),
                _ => err(name, f, "expected ![a]!P"),
            },
            _ => err(name, f, "expected ![a]!P"),
        },
        ("[++]", false, Fml::Boxed(p, body)) => match &**p {
            Prog::Choice(a, b) => Ok(simple(
                Fml::and(
                    Fml::boxed((**a).clone(), (**body).clone()),
                    Fml::boxed((**b).clone(), (**body).clone()),
                ),
                f,
            )),
            _ => err(name, f, "expected [a ++ b]P"),
        },
        ("[++]", true, Fml::And(l, r)) => match (&**l, &**r) {
            (Fml::Boxed(a, p1), Fml::Boxed(b, p2)) => {
                let fused = fuse_with(p1, p2).ok_or_else(|| format!("axiom [++]: postconditions differ in {}", print_fml(f)))?;
                let result = Fml::boxed(Prog::choice((**a).clone(), (**b).clone()), fused);
                let set = any_both(f, &result).build();
                Ok(Rewrite {
                    result,
                    set,
                    fresh: Vec::new(),
                })
            }
            _ => err(name, f, "expected [a]P && [b]P"),
        },
        ("[*]", false, Fml::Boxed(p, body)) => match &**p {
            Prog::Loop(a) => Ok(simple(
                Fml::and((**body).clone(), Fml::boxed((**a).clone(), Fml::boxed((**p).clone(), (**body).clone()))),
                f,
            )),
            _ => err(name, f, "expected [a*]P"),
        },
        ("[*]", true, Fml::And(p1, rest)) => {
            let Fml::Boxed(a1, inner) = &**rest else { return err(name, f, "expected P && [a][a*]P") };
            let Fml::Boxed(l, p2) = &**inner else { return err(name, f, "expected P && [a][a*]P") };
            let Prog::Loop(a2) = &**l else { return err(name, f, "expected P && [a][a*]P") };
            let a = fuse_prog_with(a1, a2).ok_or_else(|| format!("axiom [*]: programs differ in {}", print_fml(f)))?;
            let p = fuse_with(p1, p2).ok_or_else(|| format!("axiom [*]: postconditions differ in {}", print_fml(f)))?;
            let result = Fml::boxed(Prog::Loop(Box::new(a)), p);
            let set = any_both(f, &result).build();
            Ok(Rewrite {
                result,
                set,
                fresh: Vec::new(),
            })
        }
        ("I", false, Fml::Boxed(p, body)) => match &**p {
            Prog::Loop(a) => Ok(simple(
                Fml::and(
                    (**body).clone(),
                    Fml::boxed((**p).clone(), Fml::imp((**body).clone(), Fml::boxed((**a).clone(), (**body).clone()))),
                ),
                f,
            )),
            _ => err(name, f, "expected [a*]P"),
        },
        ("I", true, Fml::And(p1, rest)) => {
            let bad = || format!("axiom I: expected P && [a*](P -> [a]P), got {}", print_fml(f));
            let Fml::Boxed(l, imp) = &**rest else { return Err(bad()) };
            let Prog::Loop(a1) = &**l else { return Err(bad()) };
            let Fml::Imp(p2, b) = &**imp else { return Err(bad()) };
            let Fml::Boxed(a2, p3) = &**b else { return Err(bad()) };
            let a = fuse_prog_with(a1, a2).ok_or_else(bad)?;
            let p = fuse_with(p1, p2).and_then(|p| fuse_with(&p, p3)).ok_or_else(bad)?;
            let result = Fml::boxed(Prog::Loop(Box::new(a)), p);
            let set = any_both(f, &result).build();
            Ok(Rewrite {
                result,
                set,
                fresh: Vec::new(),
            })
        }
        ("[:=]" | "[:=]1" | "[:=]2" | "[:*]" | "[:*]1" | "[:*]2", false, Fml::Boxed(p, body)) => {
            let a = match &**p {
                Prog::Atom(a) => a,
                Prog::Test(q) if q.is_true_atom() => {
                    // a vacuous test, e.g. an assignment removed by R
                    return Ok(simple((**body).clone(), f));
                }
                _ => return err(name, f, "expected an assignment"),
            };
            let (x, result) = match (&a.atom, name.starts_with("[:=]")) {
                (Atom::Assign(x, e), true) => {
                    let r = subst_fml(body, x, e).map_err(|e| format!("axiom {name}: {e}"))?;
                    (x.key(), r)
                }
                (Atom::AssignAny(x), false) => (x.clone(), Fml::forall(x, (**body).clone())),
                _ => return err(name, f, "wrong kind of assignment"),
            };
            let used = free_vars(body).contains(&x);
            if (name.ends_with('1') && !used) || (name.ends_with('2') && used) {
                return err(name, f, if used { "the variable is free in the postcondition" } else { "the variable is not free in the postcondition" });
            }
            let mut b = any_both(f, &result);
            b.labels(&a.labels, if used { MutationSet::ID } else { MutationSet::ANY });
            Ok(Rewrite {
                result,
                set: b.build(),
                fresh: Vec::new(),
            })
        }
        ("exists", false, Fml::Exists(x, body)) => Ok(simple(Fml::not(Fml::forall(x, Fml::not((**body).clone()))), f)),
        ("exists", true, Fml::Not(inner)) => match &**inner {
            Fml::Forall(x, nb) => match &**nb {
                Fml::Not(body) => Ok(simple(Fml::exists(x, (**body).clone()), f)),
                _ => err(name, f, "expected !forall x !P"),
            },
            _ => err(name, f, "expected !forall x !P"),
        },
        ("DW", false, Fml::Boxed(p, body)) => match &**p {
            Prog::Ode(ode) => {
                let q = ode.domain.as_deref().ok_or("axiom DW: the ODE has no domain constraint")?;
                Ok(simple(Fml::boxed((**p).clone(), Fml::imp(q.clone(), (**body).clone())), f))
            }
            _ => err(name, f, "expected an ODE"),
        },
        ("DW", true, Fml::Boxed(p, body)) => match (&**p, &**body) {
            (Prog::Ode(ode), Fml::Imp(q2, post)) => {
                let q1 = ode.domain.as_deref().ok_or("axiom DW: the ODE has no domain constraint")?;
                let q = fuse_with(q1, q2).ok_or("axiom DW: domain and premise differ")?;
                let result = Fml::boxed(
                    Prog::Ode(Ode {
                        eqs: ode.eqs.clone(),
                        domain: Some(Box::new(q)),
                    }),
                    (**post).clone(),
                );
                let set = any_both(f, &result).build();
                Ok(Rewrite {
                    result,
                    set,
                    fresh: Vec::new(),
                })
            }
            _ => err(name, f, "expected [ODE & Q](Q -> P)"),
        },
        ("DE" | "DE1" | "DE2", _, Fml::Boxed(p, body)) => {
            let Prog::Ode(ode) = &**p else { return err(name, f, "expected an ODE") };
            let (result, post, assign_labels) = if forward {
                let mut post = (**body).clone();
                for e in ode.eqs.iter().rev() {
                    let Atom::OdeEq(x, rhs) = &e.atom else { unreachable!() };
                    post = assign_box(VarRef::primed(x), rhs.clone(), e.labels.clone(), post);
                }
                (Fml::boxed((**p).clone(), post), (**body).clone(), Vec::new())
            } else {
                let (labels, post) = strip_diff_assigns(ode, body).ok_or("axiom DE: expected the differential assignments of the ODE")?;
                let eqs = ode
                    .eqs
                    .iter()
                    .zip(&labels)
                    .map(|(e, l)| {
                        let mut all = e.labels.clone();
                        all.extend(l.iter().cloned());
                        LAtom::new(all, e.atom.clone())
                    })
                    .collect();
                let np = Prog::Ode(Ode {
                    eqs,
                    domain: ode.domain.clone(),
                });
                (Fml::boxed(np, post.clone()), post, labels)
            };
            let fv = free_vars(&post);
            let mut b = any_both(f, &result);
            for (i, e) in ode.eqs.iter().enumerate() {
                let Atom::OdeEq(x, _) = &e.atom else { continue };
                let used = fv.contains(&prime(x));
                if (name == "DE1" && used) || (name == "DE2" && !used) {
                    return err(name, f, "side condition on x' fails");
                }
                let set = if used { MutationSet::ID } else { MutationSet::ANY };
                b.labels(&e.labels, set);
                if let Some(l) = assign_labels.get(i) {
                    b.labels(l, set);
                }
            }
            Ok(Rewrite {
                result,
                set: b.build(),
                fresh: Vec::new(),
            })
        }
        ("DG", false, Fml::Boxed(p, body)) => {
            let Prog::Ode(ode) = &**p else { return err(name, f, "expected an ODE") };
            let Some((ghost, rest)) = ode.eqs.split_last() else { return err(name, f, "empty ODE") };
            let Atom::OdeEq(y, rhs) = &ghost.atom else { return err(name, f, "expected an ODE") };
            let np = Prog::Ode(Ode {
                eqs: rest.to_vec(),
                domain: ode.domain.clone(),
            });
            let mut others: VarSet = free_vars(body);
            others.extend(crate::syntax::vars::prog_free_vars(&np));
            others.extend(bound_vars(&np));
            if others.contains(y) || rest.is_empty() {
                return err(name, f, "the last equation is not a ghost");
            }
            if !super::rules::linear_in(rhs, y) {
                return err(name, f, "the ghost equation is not linear in the ghost");
            }
            Ok(simple(Fml::boxed(np, (**body).clone()), f))
        }
        ("[']" | "DS", false, Fml::Boxed(p, body)) => {
            let Prog::Ode(ode) = &**p else { return err(name, f, "expected an ODE") };
            let mut avoid = crate::syntax::vars::all_vars(f);
            let t = fresh_var("t", &avoid);
            avoid.insert(t.clone());
            let s = fresh_var("s", &avoid);
            if name == "DS" {
                let ok = ode.eqs.len() == 1
                    && matches!(&ode.eqs[0].atom, Atom::OdeEq(_, c) if crate::syntax::vars::term_vars(c).is_disjoint(&bound_vars(p)));
                if !ok {
                    return err(name, f, "expected a single equation with a constant right-hand side");
                }
            }
            let sol = solve(ode, &t).map_err(|e| format!("axiom {name}: {e}"))?;
            let sol_at = |time: &str, post: Fml| -> Fml {
                let mut out = post;
                for (x, y) in sol.iter().rev() {
                    let labels = ode
                        .eqs
                        .iter()
                        .find(|e| matches!(&e.atom, Atom::OdeEq(z, _) if z == x))
                        .map(|e| e.labels.clone())
                        .unwrap_or_default();
                    let y = crate::syntax::subst::rename_term(y, &t, time);
                    out = assign_box(VarRef::plain(x), y, labels, out);
                }
                out
            };
            let cmp = |op, a: Term, b: Term| Atom::Cmp(op, a, b);
            let lm = alloc.fresh();
            let t_nonneg = atom_fml(vec![lm.clone()], cmp(CmpOp::Ge, Term::var(&t), Term::zero()));
            let mut fresh = vec![lm];
            let after = sol_at(&t, (**body).clone());
            let inner = match &ode.domain {
                Some(q) => {
                    let l1 = alloc.fresh();
                    let l2 = alloc.fresh();
                    fresh.push(l1.clone());
                    fresh.push(l2.clone());
                    let range = Fml::and(
                        atom_fml(vec![l1], cmp(CmpOp::Le, Term::zero(), Term::var(&s))),
                        atom_fml(vec![l2], cmp(CmpOp::Le, Term::var(&s), Term::var(&t))),
                    );
                    Fml::imp(Fml::forall(&s, Fml::imp(range, sol_at(&s, (**q).clone()))), after)
                }
                None => after,
            };
            let result = Fml::forall(&t, Fml::imp(t_nonneg, inner));
            let mut b = any_both(f, &result);
            b.labels(&fresh, MutationSet::ID);
            Ok(Rewrite {
                result,
                set: b.build(),
                fresh,
            })
        }
        _ => err(name, f, if forward { "no match right to left" } else { "no match left to right" }),
    }
}

/// Binds occurrences of variable `x` in `pat` to the matching subterms of
/// `inst`; everything else must agree.
fn match_term(pat: &Term, inst: &Term, x: &str, bind: &mut Option<Term>) -> bool {
    match (pat, inst) {
        (Term::Var(y), _) if y == x => match bind {
            Some(b) => b == inst,
            None => {
                *bind = Some(inst.clone());
                true
            }
        },
        (Term::Add(a, b), Term::Add(c, d))
        | (Term::Sub(a, b), Term::Sub(c, d))
        | (Term::Mul(a, b), Term::Mul(c, d))
        | (Term::Div(a, b), Term::Div(c, d)) => match_term(a, c, x, bind) && match_term(b, d, x, bind),
        (Term::Pow(a, n), Term::Pow(b, m)) => n == m && match_term(a, b, x, bind),
        (Term::Func(f, xs), Term::Func(g, ys)) => {
            f == g && xs.len() == ys.len() && xs.iter().zip(ys).all(|(a, b)| match_term(a, b, x, bind))
        }
        (Term::Diff(a), Term::Diff(b)) => match_term(a, b, x, bind),
        _ => pat == inst,
    }
}

/// An instance term `e` with `inst = pat[e/x]`, if one exists.
fn instance_term(pat: &Fml, inst: &Fml, x: &str) -> Option<Term> {
    let mut bind = None;
    let pa = atoms_of(pat);
    let ia = atoms_of(inst);
    if pa.len() != ia.len() {
        return None;
    }
    for (a, b) in pa.iter().zip(&ia) {
        let ok = match (&a.atom, &b.atom) {
            (Atom::Cmp(o1, l1, r1), Atom::Cmp(o2, l2, r2)) => {
                o1 == o2 && match_term(l1, l2, x, &mut bind) && match_term(r1, r2, x, &mut bind)
            }
            (Atom::Pred(p, xs), Atom::Pred(q, ys)) => {
                p == q && xs.len() == ys.len() && xs.iter().zip(ys).all(|(s, t)| match_term(s, t, x, &mut bind))
            }
            (s, t) => s == t,
        };
        if !ok {
            return None;
        }
    }
    Some(bind.unwrap_or_else(|| Term::var(x)))
}

/// Checks that `f` is an instance of an axiom schema and returns the
/// axiom's constant output set (before ⊔ χ).
pub fn leaf_instance(axiom: &str, f: &Fml) -> Result<TrackedLabelSet, String> {
    let name = canonical_axiom(axiom).ok_or_else(|| format!("unknown axiom '{axiom}'"))?;
    let not_inst = || format!("{} is not an instance of axiom {name}", print_fml(f));
    if EQUIVALENCES.contains(&name) {
        let Fml::Equiv(l, r) = f else { return Err(not_inst()) };
        let mut scratch = LabelAllocator::new();
        scratch.reserve_all(f);
        let rw = rewrite(name, l, false, &mut scratch).map_err(|_| not_inst())?;
        if !same(&rw.result, r) {
            return Err(not_inst());
        }
        let mut b = SetBuilder::new();
        b.any_fml(f);
        // the axiom's own constraints, carried over to r's atoms by position
        for (ra, rb) in atoms_of(&rw.result).into_iter().zip(atoms_of(r)) {
            for l in &ra.labels {
                if let Some(set) = rw.set.lookup(l) {
                    if set != MutationSet::ANY {
                        b.labels(&rb.labels, set);
                    }
                }
            }
        }
        for a in atoms_of(l).into_iter().chain(atoms_of(r)) {
            for lb in &a.labels {
                match rw.set.lookup(lb) {
                    Some(set) if set != MutationSet::ANY => {
                        b.labels(std::slice::from_ref(lb), set);
                    }
                    _ => {}
                }
            }
        }
        b.fuse(&rw.result, r);
        return Ok(b.build());
    }
    let mut b = SetBuilder::new();
    b.any_fml(f);
    match name {
        "K" => {
            let Fml::Imp(l, r) = f else { return Err(not_inst()) };
            let Fml::Boxed(a, pq) = &**l else { return Err(not_inst()) };
            let Fml::Imp(p, q) = &**pq else { return Err(not_inst()) };
            let Fml::Imp(ap, aq) = &**r else { return Err(not_inst()) };
            let (Fml::Boxed(a2, p2), Fml::Boxed(a3, q2)) = (&**ap, &**aq) else { return Err(not_inst()) };
            if !(same_prog(a, a2) && same_prog(a, a3) && same(p, p2) && same(q, q2)) {
                return Err(not_inst());
            }
            b.fuse_prog(a, a2).fuse_prog(a, a3).fuse(p, p2).fuse(q, q2);
        }
        "V" => {
            let Fml::Imp(p, r) = f else { return Err(not_inst()) };
            let Fml::Boxed(a, p2) = &**r else { return Err(not_inst()) };
            if !same(p, p2) || !free_vars(p).is_disjoint(&bound_vars(a)) {
                return Err(not_inst());
            }
            b.fuse(p, p2);
        }
        "alli" => {
            let Fml::Imp(l, p2) = f else { return Err(not_inst()) };
            let Fml::Forall(x, p) = &**l else { return Err(not_inst()) };
            let e = instance_term(p, p2, x).ok_or_else(not_inst)?;
            let inst = subst_fml(p, &VarRef::plain(x), &e).map_err(|e| e.to_string())?;
            if !same(&inst, p2) {
                return Err(not_inst());
            }
            b.fuse(p, p2);
        }
        "allimp" => {
            let Fml::Imp(l, r) = f else { return Err(not_inst()) };
            let Fml::Forall(x, pq) = &**l else { return Err(not_inst()) };
            let Fml::Imp(p, q) = &**pq else { return Err(not_inst()) };
            let Fml::Imp(ap, aq) = &**r else { return Err(not_inst()) };
            let (Fml::Forall(x2, p2), Fml::Forall(x3, q2)) = (&**ap, &**aq) else { return Err(not_inst()) };
            if !(x == x2 && x == x3 && same(p, p2) && same(q, q2)) {
                return Err(not_inst());
            }
            b.fuse(p, p2).fuse(q, q2);
        }
        "Vall" => {
            let Fml::Imp(p, r) = f else { return Err(not_inst()) };
            let Fml::Forall(x, p2) = &**r else { return Err(not_inst()) };
            if !same(p, p2) || free_vars(p).contains(x) {
                return Err(not_inst());
            }
            b.fuse(p, p2);
        }
        "DI" => {
            let Fml::Imp(l, r) = f else { return Err(not_inst()) };
            let Fml::Imp(q1, bx) = &**l else { return Err(not_inst()) };
            let Fml::Boxed(o1, pd) = &**bx else { return Err(not_inst()) };
            let Fml::Equiv(lb, rb) = &**r else { return Err(not_inst()) };
            let (Fml::Boxed(o2, p), Fml::Boxed(t, p2)) = (&**lb, &**rb) else { return Err(not_inst()) };
            let (Prog::Ode(ode), Prog::Test(q3)) = (&**o2, &**t) else { return Err(not_inst()) };
            let dom = ode.domain.as_deref().cloned().unwrap_or_else(|| atom_fml(vec![], Atom::True));
            let ev: VarSet = ode.vars().into_iter().collect();
            let d = differential(p, &ev)?;
            if !(same_prog(o1, o2) && same(q1, &dom) && same(q3, &dom) && same(p, p2) && same(pd, &d)) {
                return Err(not_inst());
            }
            b.fuse(p, p2).fuse(p, pd).fuse(q1, q3);
        }
        "DC" => {
            let Fml::Imp(l, r) = f else { return Err(not_inst()) };
            let Fml::Boxed(o1, c) = &**l else { return Err(not_inst()) };
            let Fml::Equiv(lb, rb) = &**r else { return Err(not_inst()) };
            let (Fml::Boxed(o2, pm), Fml::Boxed(o3, pn)) = (&**lb, &**rb) else { return Err(not_inst()) };
            let (Prog::Ode(e1), Prog::Ode(e2), Prog::Ode(e3)) = (&**o1, &**o2, &**o3) else { return Err(not_inst()) };
            let eq_eqs = |a: &Ode, b: &Ode| a.eqs.len() == b.eqs.len() && a.eqs.iter().zip(&b.eqs).all(|(x, y)| x.atom == y.atom);
            let q = e1.domain.as_deref().cloned().unwrap_or_else(|| atom_fml(vec![], Atom::True));
            let q2 = e2.domain.as_deref().cloned().unwrap_or_else(|| atom_fml(vec![], Atom::True));
            let Some(Fml::And(q3, c2)) = e3.domain.as_deref() else { return Err(not_inst()) };
            if !(eq_eqs(e1, e2) && eq_eqs(e1, e3) && same(&q, &q2) && same(&q, q3) && same(c, c2) && same(pm, pn)) {
                return Err(not_inst());
            }
            for ((a, b2), c3) in e1.eqs.iter().zip(&e2.eqs).zip(&e3.eqs) {
                let mut g = a.labels.clone();
                g.extend(b2.labels.iter().cloned());
                g.extend(c3.labels.iter().cloned());
                b.groups_push(g);
            }
            b.fuse(&q, &q2).fuse(&q, q3).fuse(c, c2).id_fml(pm).id_fml(pn);
        }
        "o'" => {
            let bad = not_inst;
            let Fml::Boxed(p1, in1) = f else { return Err(bad()) };
            let Fml::Boxed(p2, body) = &**in1 else { return Err(bad()) };
            let (Prog::Atom(a1), Prog::Atom(a2)) = (&**p1, &**p2) else { return Err(bad()) };
            let (Atom::Assign(y, g), Atom::Assign(yp, one)) = (&a1.atom, &a2.atom) else { return Err(bad()) };
            let Fml::Atom(eq) = &**body else { return Err(bad()) };
            let Atom::Cmp(CmpOp::Eq, Term::Diff(fg), Term::Mul(dfy, dg)) = &eq.atom else { return Err(bad()) };
            let (Term::Diff(fy), Term::Diff(g2)) = (&**dfy, &**dg) else { return Err(bad()) };
            let subst_ok = crate::syntax::subst::subst_term(fy, y, g).map(|t| t == **fg).unwrap_or(false);
            if y.prime || !yp.prime || yp.name != y.name || *one != Term::int(1) || **g2 != *g || !subst_ok {
                return Err(bad());
            }
            b.id_fml(f);
        }
        _ => return Err(not_inst()),
    }
    Ok(b.build())
}

impl SetBuilder {
    fn groups_push(&mut self, g: Vec<Label>) {
        self.groups.push((g, MutationSet::ANY));
    }
}

/// Whether `lhs = rhs` (in either orientation) is an instance of a
/// differential equality axiom.
pub fn equality_instance(axiom: &str, lhs: &Term, rhs: &Term) -> Result<(), String> {
    let name = canonical_axiom(axiom).ok_or_else(|| format!("unknown axiom '{axiom}'"))?;
    let check = |l: &Term, r: &Term| -> bool {
        let Term::Diff(inner) = l else {
            return name == "x'" && matches!((l, r), (Term::DiffSym(a), Term::DiffSym(b)) if a == b);
        };
        let d = |t: &Term| match t {
            Term::Var(x) => Term::DiffSym(x.clone()),
            other => Term::Diff(Box::new(other.clone())),
        };
        match (name, &**inner) {
            ("c'", t) => crate::syntax::vars::term_vars(t).is_empty() && r.is_zero(),
            ("x'", Term::Var(x)) => *r == Term::DiffSym(x.clone()),
            ("+'", Term::Add(a, b)) => *r == Term::add(d(a), d(b)),
            ("-'", Term::Sub(a, b)) => *r == Term::sub(d(a), d(b)),
            ("*'", Term::Mul(a, b)) => *r == Term::add(Term::mul(d(a), (**b).clone()), Term::mul((**a).clone(), d(b))),
            ("/'", Term::Div(a, b)) => {
                *r == Term::div(
                    Term::sub(Term::mul(d(a), (**b).clone()), Term::mul((**a).clone(), d(b))),
                    Term::Pow(b.clone(), 2),
                )
            }
            _ => false,
        }
    };
    if !EQUALITIES.contains(&name) {
        return Err(format!("axiom {name} is not a differential equality"));
    }
    if check(lhs, rhs) || check(rhs, lhs) {
        Ok(())
    } else {
        Err(format!("{} = {} is not an instance of axiom {name}", print_term(lhs), print_term(rhs)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::labelsets::MutationKind;

    fn model(text: &str) -> (Fml, LabelAllocator) {
        parse_model(text).unwrap()
    }

    fn lab(n: &str) -> Label {
        Label::new(n, Origin::Model)
    }

    #[test]
    fn backward_choice_copies_labels() {
        let (f, mut a) = model("[@a x := 1 ++ @b x := 2] @c x > 0");
        let rw = rewrite("[++]", &f, false, &mut a).unwrap();
        assert_eq!(print_model(&rw.result), "[@a x := 1] @c x > 0 && [@b x := 2] @c x > 0");
        assert_eq!(rw.set.lookup(&lab("c")), Some(MutationSet::ANY));
        assert!(rw.set.partners(&lab("c")).is_empty());
    }

    #[test]
    fn forward_choice_fuses() {
        let (f, mut a) = model("[@a x := 1]@k x > 0 && [@b x := 2]@l x > 0");
        let rw = rewrite("[∪]", &f, true, &mut a).unwrap();
        assert_eq!(rw.set.partners(&lab("k")), vec![lab("l")]);
        assert!(print_model(&rw.result).contains("@k @l x > 0") || print_model(&rw.result).contains("@k@l"));
    }

    #[test]
    fn assignment_id_iff_free() {
        let (f, mut a) = model("[@j x := 2] @k x > 1");
        let rw = rewrite("[:=]", &f, false, &mut a).unwrap();
        assert_eq!(print_fml(&rw.result), "2 > 1");
        assert_eq!(rw.set.lookup(&lab("j")), Some(MutationSet::ID));
        let (f, mut a) = model("[@j y := 2] @k x > 1");
        let rw = rewrite("[:=]", &f, false, &mut a).unwrap();
        assert_eq!(rw.set.lookup(&lab("j")), Some(MutationSet::ANY));
        assert!(rewrite("[:=]1", &f, false, &mut a).is_err());
    }

    #[test]
    fn de_adds_differential_assignments() {
        let (f, mut a) = model("[{@o1 x' = v, @o2 v' = -g}] @s v' >= 0");
        let rw = rewrite("DE", &f, true, &mut a).unwrap();
        assert_eq!(print_fml(&rw.result), "[{x' = v, v' = -g}] [x' := v] [v' := -g] v' >= 0");
        assert_eq!(rw.set.lookup(&lab("o1")), Some(MutationSet::ANY));
        assert_eq!(rw.set.lookup(&lab("o2")), Some(MutationSet::ID));
        let back = rewrite("DE", &rw.result, false, &mut a).unwrap();
        assert_eq!(back.result.unlabel(), f.unlabel());
    }

    #[test]
    fn solution_axiom() {
        let (f, mut a) = model("[{x' = 2 & x <= 5}] x >= 0");
        let rw = rewrite("DS", &f, false, &mut a).unwrap();
        assert_eq!(rw.fresh.len(), 3);
        let expect = parse_fml(
            "forall t_0 . (t_0 >= 0 -> (forall s_0 . (0 <= s_0 && s_0 <= t_0 -> [x := 2*s_0 + x] x <= 5)) -> [x := 2*t_0 + x] x >= 0)",
        )
        .unwrap();
        assert_eq!(rw.result.unlabel(), expect);
        assert_eq!(parse_fml(&print_fml(&rw.result)).unwrap(), expect);
        let ok = rw.fresh.iter().all(|l| rw.set.lookup(l) == Some(MutationSet::ID));
        assert!(ok);
    }

    #[test]
    fn implication_leaves() {
        let (f, _) = model("[@a x := 1](@p x > 0 -> @q x > 1) -> [@b x := 1]@r x > 0 -> [@c x := 1]@s x > 1");
        let set = leaf_instance("K", &f).unwrap();
        let mut ps = set.partners(&lab("a"));
        ps.sort();
        assert_eq!(ps, vec![lab("b"), lab("c")]);
        let (g, _) = model("(forall x . @p x > y) -> @q 3 > y");
        assert!(leaf_instance("alli", &g).is_ok());
        let (g, _) = model("(forall x . @p x > y) -> @q 3 > z");
        assert!(leaf_instance("alli", &g).is_err());
        let (g, _) = model("(@m x >= 0 -> [{x' = 1 & x >= 0}]@n x' >= 0) -> ([{x' = 1 & x >= 0}]@l x >= 0 <-> [?x >= 0]@k x >= 0)");
        let set = leaf_instance("DI", &g).unwrap();
        assert!(set.partners(&lab("l")).contains(&lab("k")));
        assert_eq!(set.lookup(&lab("l")).unwrap().kinds(), MutationKind::ALL.to_vec());
    }

    #[test]
    fn equality_axioms() {
        let t = |s: &str| parse_term(s).unwrap();
        assert!(equality_instance("+'", &t("(x + y)'"), &t("x' + y'")).is_ok());
        assert!(equality_instance("*'", &t("x'*y + x*y'"), &t("(x*y)'")).is_ok());
        assert!(equality_instance("c'", &t("(3)'"), &t("0")).is_ok());
        assert!(equality_instance("-'", &t("(x + y)'"), &t("x' + y'")).is_err());
    }
}
