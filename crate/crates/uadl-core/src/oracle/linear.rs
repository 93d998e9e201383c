//! Exact decision procedure for linear real arithmetic.
//!
//! The sequent is refuted by searching for a model of `⋀Γ ∧ ¬⋁Δ`. Programs
//! are reduced where the reduction is exact (assignments, tests, sequence,
//! choice); loops, ODEs, predicates and quantifiers in the wrong polarity
//! become opaque propositions. Opaque parts only ever loosen the search, so
//! an unsatisfiable result is always a real proof. A model found without
//! touching anything opaque is a real counterexample.

use super::fm::{satisfiable, Constraint, Rel};
use super::poly::{linearize, to_poly, Linear};
use super::{Oracle, Verdict};
use crate::syntax::subst::{rename_fml, subst_fml};
use crate::syntax::vars::free_vars;
use crate::syntax::*;
use num_traits::{Signed, Zero};
use std::collections::BTreeMap;

#[derive(Clone, Debug)]
enum Lit {
    Arith { lin: Linear, rel: Rel, exact: bool },
    Bool { key: String, pos: bool },
}

impl Lit {
    fn exact(&self) -> bool {
        match self {
            Lit::Arith { exact, .. } => *exact,
            Lit::Bool { .. } => false,
        }
    }
}

#[derive(Clone, Debug)]
enum Nnf {
    True,
    False,
    Lit(Lit),
    And(Vec<Nnf>),
    Or(Vec<Nnf>),
}

fn and(v: Vec<Nnf>) -> Nnf {
    Nnf::And(v)
}

fn or(v: Vec<Nnf>) -> Nnf {
    Nnf::Or(v)
}

struct Builder {
    fresh: usize,
}

impl Builder {
    fn fresh_name(&mut self, base: &str) -> String {
        self.fresh += 1;
        format!("{base}#{}", self.fresh)
    }

    fn opaque(&self, f: &Fml, pos: bool) -> Nnf {
        Nnf::Lit(Lit::Bool {
            key: print_fml(&f.unlabel()),
            pos,
        })
    }

    /// Negation normal form of `f` (if `pos`) or of `¬f`.
    fn nnf(&mut self, f: &Fml, pos: bool) -> Nnf {
        match f {
            Fml::Atom(a) => self.atom(&a.atom, pos, f),
            Fml::Not(a) => self.nnf(a, !pos),
            Fml::And(a, b) => {
                let v = vec![self.nnf(a, pos), self.nnf(b, pos)];
                if pos {
                    and(v)
                } else {
                    or(v)
                }
            }
            Fml::Or(a, b) => {
                let v = vec![self.nnf(a, pos), self.nnf(b, pos)];
                if pos {
                    or(v)
                } else {
                    and(v)
                }
            }
            Fml::Imp(a, b) => {
                let v = vec![self.nnf(a, !pos), self.nnf(b, pos)];
                if pos {
                    or(v)
                } else {
                    and(v)
                }
            }
            Fml::Equiv(a, b) => {
                let (ap, an, bp, bn) = (self.nnf(a, true), self.nnf(a, false), self.nnf(b, true), self.nnf(b, false));
                if pos {
                    or(vec![and(vec![ap, bp]), and(vec![an, bn])])
                } else {
                    or(vec![and(vec![ap, bn]), and(vec![an, bp])])
                }
            }
            Fml::Forall(x, a) | Fml::Exists(x, a) => {
                let existential = matches!(f, Fml::Exists(..)) == pos;
                if !free_vars(a).contains(x) {
                    self.nnf(a, pos)
                } else if existential {
                    let y = self.fresh_name(x);
                    let body = rename_fml(a, x, &y);
                    self.nnf(&body, pos)
                } else {
                    self.opaque(f, pos)
                }
            }
            Fml::Boxed(p, a) => self.boxed(p, a, pos, f),
            Fml::Diamond(p, a) => {
                let neg = Fml::not((**a).clone());
                self.boxed(p, &neg, !pos, f)
            }
        }
    }

    fn boxed(&mut self, p: &Prog, post: &Fml, pos: bool, whole: &Fml) -> Nnf {
        match p {
            Prog::Atom(a) => match &a.atom {
                Atom::Assign(x, e) => match subst_fml(post, x, e) {
                    Ok(g) => self.nnf(&g, pos),
                    Err(_) => self.opaque(whole, pos),
                },
                Atom::AssignAny(x) => self.nnf(&Fml::forall(x, post.clone()), pos),
                _ => self.opaque(whole, pos),
            },
            Prog::Test(q) => self.nnf(&Fml::imp((**q).clone(), post.clone()), pos),
            Prog::Seq(a, b) => {
                let inner = Fml::boxed((**b).clone(), post.clone());
                self.boxed(a, &inner, pos, whole)
            }
            Prog::Choice(a, b) => {
                let both = Fml::and(
                    Fml::boxed((**a).clone(), post.clone()),
                    Fml::boxed((**b).clone(), post.clone()),
                );
                self.nnf(&both, pos)
            }
            Prog::Loop(_) | Prog::Ode(_) => self.opaque(&Fml::boxed(p.clone(), post.clone()), pos),
        }
    }

    fn atom(&mut self, a: &Atom, pos: bool, whole: &Fml) -> Nnf {
        match a {
            Atom::True => {
                if pos {
                    Nnf::True
                } else {
                    Nnf::False
                }
            }
            Atom::False => {
                if pos {
                    Nnf::False
                } else {
                    Nnf::True
                }
            }
            Atom::Cmp(op, l, r) => {
                let (mut rel, lhs, rhs) = match op {
                    CmpOp::Ge => (Rel::Ge, l, r),
                    CmpOp::Gt => (Rel::Gt, l, r),
                    CmpOp::Le => (Rel::Ge, r, l),
                    CmpOp::Lt => (Rel::Gt, r, l),
                    CmpOp::Eq => (Rel::Eq, l, r),
                };
                let mut opaque = false;
                let mut p = to_poly(lhs, &mut opaque).sub(&to_poly(rhs, &mut opaque));
                if !pos {
                    match rel {
                        Rel::Ge => {
                            rel = Rel::Gt;
                            p = p.neg();
                        }
                        Rel::Gt => {
                            rel = Rel::Ge;
                            p = p.neg();
                        }
                        Rel::Eq => {
                            let lin = linearize(&p, &mut opaque);
                            let neg = negate(&lin);
                            return or(vec![arith(lin, Rel::Gt, !opaque), arith(neg, Rel::Gt, !opaque)]);
                        }
                    }
                }
                let lin = linearize(&p, &mut opaque);
                arith(lin, rel, !opaque)
            }
            _ => self.opaque(whole, pos),
        }
    }
}

fn negate(l: &Linear) -> Linear {
    Linear {
        coeffs: l.coeffs.iter().map(|(x, c)| (x.clone(), -c)).collect(),
        constant: -&l.constant,
    }
}

fn arith(lin: Linear, rel: Rel, exact: bool) -> Nnf {
    if lin.coeffs.is_empty() {
        let c = &lin.constant;
        let holds = match rel {
            Rel::Ge => !c.is_negative(),
            Rel::Gt => c.is_positive(),
            Rel::Eq => c.is_zero(),
        };
        return if holds { Nnf::True } else { Nnf::False };
    }
    Nnf::Lit(Lit::Arith { lin, rel, exact })
}

enum Outcome {
    Unsat,
    Sat(BTreeMap<String, Rat>),
    /// Satisfiable only up to abstraction.
    SatAbstract,
}

/// Theory check of a conjunction of literals.
fn consistent(lits: &[&Lit]) -> Option<BTreeMap<String, Rat>> {
    let mut bools: BTreeMap<&str, bool> = BTreeMap::new();
    for l in lits {
        if let Lit::Bool { key, pos } = l {
            if let Some(prev) = bools.insert(key, *pos) {
                if prev != *pos {
                    return None;
                }
            }
        }
    }
    let mut index: BTreeMap<&str, usize> = BTreeMap::new();
    let mut cs = Vec::new();
    for l in lits {
        if let Lit::Arith { lin, rel, .. } = l {
            let mut coeffs = BTreeMap::new();
            for (x, c) in &lin.coeffs {
                let n = index.len();
                let i = *index.entry(x.as_str()).or_insert(n);
                coeffs.insert(i, c.clone());
            }
            cs.push(Constraint::new(coeffs, lin.constant.clone(), *rel));
        }
    }
    let vals = satisfiable(&cs, index.len())?;
    Some(index.into_iter().map(|(x, i)| (x.to_string(), vals[i].clone())).collect())
}

fn search<'a>(mut stack: Vec<&'a Nnf>, mut lits: Vec<&'a Lit>) -> Outcome {
    while let Some(n) = stack.pop() {
        match n {
            Nnf::True => {}
            Nnf::False => return Outcome::Unsat,
            Nnf::Lit(l) => lits.push(l),
            Nnf::And(v) => stack.extend(v.iter()),
            Nnf::Or(v) => {
                if consistent(&lits).is_none() {
                    return Outcome::Unsat;
                }
                let mut abstract_sat = false;
                for c in v {
                    let mut s = stack.clone();
                    s.push(c);
                    match search(s, lits.clone()) {
                        Outcome::Sat(m) => return Outcome::Sat(m),
                        Outcome::SatAbstract => abstract_sat = true,
                        Outcome::Unsat => {}
                    }
                }
                return if abstract_sat {
                    Outcome::SatAbstract
                } else {
                    Outcome::Unsat
                };
            }
        }
    }
    match consistent(&lits) {
        None => Outcome::Unsat,
        Some(m) if lits.iter().all(|l| l.exact()) => Outcome::Sat(m),
        Some(_) => Outcome::SatAbstract,
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct LinearOracle;

impl LinearOracle {
    pub fn new() -> Self {
        LinearOracle
    }
}

impl Oracle for LinearOracle {
    fn decide(&self, s: &Sequent) -> Verdict {
        let mut b = Builder { fresh: 0 };
        let mut parts: Vec<Nnf> = s.ante.iter().map(|f| b.nnf(f, true)).collect();
        parts.extend(s.succ.iter().map(|f| b.nnf(f, false)));
        let root = Nnf::And(parts);
        match search(vec![&root], Vec::new()) {
            Outcome::Unsat => Verdict::Valid,
            Outcome::Sat(m) => {
                let mut m: BTreeMap<String, Rat> = m.into_iter().filter(|(x, _)| !x.contains('#')).collect();
                // variables that play no role get 0
                for x in crate::syntax::vars::sequent_vars(s) {
                    m.entry(x).or_insert_with(Rat::zero);
                }
                Verdict::Invalid(m)
            }
            Outcome::SatAbstract => Verdict::Unknown("outside the linear fragment".into()),
        }
    }
}
