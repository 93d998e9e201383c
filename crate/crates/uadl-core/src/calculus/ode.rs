//! Differentials of terms and formulas, and polynomial ODE solutions.

use crate::oracle::poly::{to_poly, Monomial, Poly};
use crate::syntax::vars::{term_vars, VarSet};
use crate::syntax::*;
use num_traits::{One, Zero};
use std::collections::BTreeMap;

fn is_zero(t: &Term) -> bool {
    matches!(t, Term::Const(c) if c.is_zero())
}

fn is_one(t: &Term) -> bool {
    matches!(t, Term::Const(c) if c.is_one())
}

fn s_add(a: Term, b: Term) -> Term {
    if is_zero(&a) {
        b
    } else if is_zero(&b) {
        a
    } else {
        Term::add(a, b)
    }
}

fn s_sub(a: Term, b: Term) -> Term {
    if is_zero(&b) {
        a
    } else {
        Term::sub(a, b)
    }
}

fn s_mul(a: Term, b: Term) -> Term {
    if is_zero(&a) || is_zero(&b) {
        Term::zero()
    } else if is_one(&a) {
        b
    } else if is_one(&b) {
        a
    } else {
        Term::mul(a, b)
    }
}

/// `(t)'`, where only variables in `evolving` change; every other variable
/// is a constant with derivative 0. Obvious zeros are simplified away.
pub fn differential_term(t: &Term, evolving: &VarSet) -> Result<Term, String> {
    if term_vars(t).is_disjoint(evolving) && !matches!(t, Term::DiffSym(_) | Term::Diff(_)) {
        return Ok(Term::zero());
    }
    let d = |a: &Term| differential_term(a, evolving);
    Ok(match t {
        Term::Var(x) => Term::DiffSym(x.clone()),
        Term::Const(_) => Term::zero(),
        Term::Add(a, b) => s_add(d(a)?, d(b)?),
        Term::Sub(a, b) => s_sub(d(a)?, d(b)?),
        Term::Mul(a, b) => s_add(s_mul(d(a)?, (**b).clone()), s_mul((**a).clone(), d(b)?)),
        Term::Div(a, b) => {
            let num = s_sub(s_mul(d(a)?, (**b).clone()), s_mul((**a).clone(), d(b)?));
            Term::div(num, Term::Pow(b.clone(), 2))
        }
        Term::Pow(_, 0) => Term::zero(),
        Term::Pow(a, 1) => d(a)?,
        Term::Pow(a, n) => {
            let inner = if *n == 2 {
                (**a).clone()
            } else {
                Term::Pow(a.clone(), n - 1)
            };
            s_mul(s_mul(Term::int(*n as i64), inner), d(a)?)
        }
        Term::Func(f, _) => return Err(format!("no differential for function {f} of evolving variables")),
        Term::DiffSym(_) | Term::Diff(_) => return Err(format!("higher differential in {}", print_term(t))),
    })
}

/// `(f)'` for the differential-invariant premise: comparisons map to `≥`,
/// `≤` or `=` between the differentials of their sides, and both `∧` and
/// `∨` become conjunctions. Labels are kept on the differentiated atoms.
pub fn differential(f: &Fml, evolving: &VarSet) -> Result<Fml, String> {
    Ok(match f {
        Fml::Atom(a) => {
            let atom = match &a.atom {
                Atom::True | Atom::False => Atom::True,
                Atom::Cmp(op, l, r) => {
                    let op = match op {
                        CmpOp::Ge | CmpOp::Gt => CmpOp::Ge,
                        CmpOp::Le | CmpOp::Lt => CmpOp::Le,
                        CmpOp::Eq => CmpOp::Eq,
                    };
                    Atom::Cmp(op, differential_term(l, evolving)?, differential_term(r, evolving)?)
                }
                other => return Err(format!("no differential for atom {}", print_atom(other))),
            };
            Fml::Atom(LAtom {
                labels: a.labels.clone(),
                atom,
            })
        }
        Fml::And(a, b) | Fml::Or(a, b) => Fml::and(differential(a, evolving)?, differential(b, evolving)?),
        other => return Err(format!("no differential for {}", print_fml(other))),
    })
}

fn poly_subst(p: &Poly, sol: &BTreeMap<String, Poly>) -> Poly {
    let mut out = Poly::constant(Rat::zero());
    for (m, c) in &p.terms {
        let mut term = Poly::constant(c.clone());
        for (x, k) in m {
            let base = sol.get(x).cloned().unwrap_or_else(|| Poly::var(x));
            term = term.mul(&base.pow(*k));
        }
        out = out.add(&term);
    }
    out
}

/// `∫₀^t p ds`, where `p` is a polynomial in `t`.
fn integrate(p: &Poly, t: &str) -> Poly {
    let mut out = Poly::constant(Rat::zero());
    for (m, c) in &p.terms {
        let k = m.get(t).copied().unwrap_or(0);
        let mut m2: Monomial = m.clone();
        m2.insert(t.to_string(), k + 1);
        let mut single = Poly::constant(Rat::zero());
        single.terms.insert(m2, c / rat(k as i64 + 1));
        out = out.add(&single);
    }
    out
}

pub fn poly_to_term(p: &Poly) -> Term {
    let mut acc: Option<Term> = None;
    for (m, c) in &p.terms {
        if c.is_zero() {
            continue;
        }
        let mut factors: Vec<Term> = m
            .iter()
            .map(|(x, k)| if *k == 1 { Term::var(x) } else { Term::Pow(Box::new(Term::var(x)), *k) })
            .collect();
        let neg = *c < Rat::zero();
        let mag = if neg { -c.clone() } else { c.clone() };
        if !mag.is_one() || factors.is_empty() {
            factors.insert(0, Term::Const(mag));
        }
        let mono = factors.into_iter().reduce(Term::mul).unwrap();
        acc = Some(match (acc, neg) {
            (None, false) => mono,
            (None, true) => Term::sub(Term::zero(), mono),
            (Some(a), false) => Term::add(a, mono),
            (Some(a), true) => Term::sub(a, mono),
        });
    }
    acc.unwrap_or_else(Term::zero)
}

/// Polynomial solution `x_i(t)` of an ODE system in terms of the initial
/// values, in an order in which sequential assignment is correct.
/// Fails for systems whose solution is not polynomial.
pub fn solve(ode: &Ode, t: &str) -> Result<Vec<(String, Term)>, String> {
    let eqs: Vec<(String, Term)> = ode
        .eqs
        .iter()
        .map(|e| match &e.atom {
            Atom::OdeEq(x, f) => Ok((x.clone(), f.clone())),
            a => Err(format!("not a differential equation: {}", print_atom(a))),
        })
        .collect::<Result<_, _>>()?;
    let vars: VarSet = eqs.iter().map(|(x, _)| x.clone()).collect();
    let mut sol: BTreeMap<String, Poly> = BTreeMap::new();
    let mut pending = eqs.clone();
    while !pending.is_empty() {
        let pos = pending
            .iter()
            .position(|(x, f)| {
                term_vars(f)
                    .iter()
                    .filter(|v| vars.contains(*v))
                    .all(|v| v != x && sol.contains_key(v))
            })
            .ok_or("the system has no polynomial solution")?;
        let (x, f) = pending.remove(pos);
        let mut opaque = false;
        let fp = to_poly(&f, &mut opaque);
        if opaque {
            return Err(format!("right-hand side of {x}' is not polynomial"));
        }
        let y = Poly::var(&x).add(&integrate(&poly_subst(&fp, &sol), t));
        sol.insert(x, y);
    }
    // assign x only once no unassigned solution reads x
    let mut order = Vec::new();
    let mut left: Vec<String> = eqs.iter().map(|(x, _)| x.clone()).collect();
    while !left.is_empty() {
        let pos = left
            .iter()
            .position(|x| {
                left.iter()
                    .filter(|y| *y != x)
                    .all(|y| !sol[y].terms.keys().any(|m| m.contains_key(x)))
            })
            .ok_or("the solution cannot be written as sequential assignments")?;
        let x = left.remove(pos);
        order.push((x.clone(), poly_to_term(&sol[&x])));
    }
    Ok(order)
}
