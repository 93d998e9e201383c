//! Fourier–Motzkin elimination over exact rationals, with model extraction.

use crate::syntax::Rat;
use num_traits::{One, Signed, Zero};
use std::collections::{BTreeMap, BTreeSet};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Rel {
    /// `≥ 0`
    Ge,
    /// `> 0`
    Gt,
    /// `= 0`
    Eq,
}

/// `Σ coeffs[v]·v + constant  rel  0`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Constraint {
    pub coeffs: BTreeMap<usize, Rat>,
    pub constant: Rat,
    pub rel: Rel,
}

impl Constraint {
    pub fn new(coeffs: BTreeMap<usize, Rat>, constant: Rat, rel: Rel) -> Self {
        let coeffs = coeffs.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        Constraint {
            coeffs,
            constant,
            rel,
        }
    }

    pub fn eval(&self, vals: &[Rat]) -> bool {
        let mut s = self.constant.clone();
        for (v, c) in &self.coeffs {
            s += c * &vals[*v];
        }
        match self.rel {
            Rel::Ge => !s.is_negative(),
            Rel::Gt => s.is_positive(),
            Rel::Eq => s.is_zero(),
        }
    }

    /// Scales so the first nonzero coefficient has magnitude one; keeps the
    /// constraint meaning and makes duplicates syntactically equal.
    fn normalized(mut self) -> Self {
        if let Some(c) = self.coeffs.values().next().cloned() {
            let k = Rat::one() / c.abs();
            for x in self.coeffs.values_mut() {
                *x *= &k;
            }
            self.constant *= &k;
        }
        self
    }

    fn substitute(&self, v: usize, expr: &BTreeMap<usize, Rat>, expr_const: &Rat) -> Constraint {
        let Some(a) = self.coeffs.get(&v).cloned() else {
            return self.clone();
        };
        let mut coeffs = self.coeffs.clone();
        coeffs.remove(&v);
        for (w, c) in expr {
            *coeffs.entry(*w).or_insert_with(Rat::zero) += &a * c;
        }
        Constraint::new(coeffs, &self.constant + &a * expr_const, self.rel)
    }
}

enum Step {
    /// `v = Σ expr + const`
    Solved(usize, BTreeMap<usize, Rat>, Rat),
    /// Bounds on `v` as constraints in which `v` occurs.
    Eliminated(usize, Vec<Constraint>),
}

/// Checks satisfiability; returns a model (indexed by variable) if one
/// exists.
pub fn satisfiable(constraints: &[Constraint], nvars: usize) -> Option<Vec<Rat>> {
    let mut cs: Vec<Constraint> = constraints.to_vec();
    let mut steps = Vec::new();

    // equalities first, by substitution
    while let Some(i) = cs.iter().position(|c| c.rel == Rel::Eq && !c.coeffs.is_empty()) {
        let eq = cs.swap_remove(i);
        let (&v, a) = eq.coeffs.iter().next().unwrap();
        let inv = -Rat::one() / a;
        let expr: BTreeMap<usize, Rat> = eq
            .coeffs
            .iter()
            .filter(|(w, _)| **w != v)
            .map(|(w, c)| (*w, c * &inv))
            .collect();
        let k = &eq.constant * &inv;
        cs = cs.iter().map(|c| c.substitute(v, &expr, &k)).collect();
        steps.push(Step::Solved(v, expr, k));
    }

    let mut set: BTreeSet<Constraint> = BTreeSet::new();
    for c in cs {
        if c.coeffs.is_empty() {
            if !c.eval(&[]) {
                return None;
            }
        } else {
            set.insert(c.normalized());
        }
    }

    loop {
        // pick the variable whose elimination creates the fewest constraints
        let mut counts: BTreeMap<usize, (usize, usize)> = BTreeMap::new();
        for c in &set {
            for (v, a) in &c.coeffs {
                let e = counts.entry(*v).or_insert((0, 0));
                if a.is_positive() {
                    e.0 += 1;
                } else {
                    e.1 += 1;
                }
            }
        }
        let Some((&v, _)) = counts.iter().min_by_key(|(_, (p, n))| p * n) else {
            break;
        };
        let (with, without): (Vec<Constraint>, Vec<Constraint>) =
            set.into_iter().partition(|c| c.coeffs.contains_key(&v));
        let mut next: BTreeSet<Constraint> = without.into_iter().collect();
        let lower: Vec<&Constraint> = with.iter().filter(|c| c.coeffs[&v].is_positive()).collect();
        let upper: Vec<&Constraint> = with.iter().filter(|c| c.coeffs[&v].is_negative()).collect();
        for l in &lower {
            for u in &upper {
                let a = &l.coeffs[&v];
                let b = -&u.coeffs[&v];
                let mut coeffs: BTreeMap<usize, Rat> = BTreeMap::new();
                for (w, c) in &l.coeffs {
                    *coeffs.entry(*w).or_insert_with(Rat::zero) += c * &b;
                }
                for (w, c) in &u.coeffs {
                    *coeffs.entry(*w).or_insert_with(Rat::zero) += c * a;
                }
                coeffs.remove(&v);
                let constant = &l.constant * &b + &u.constant * a;
                let rel = if l.rel == Rel::Gt || u.rel == Rel::Gt {
                    Rel::Gt
                } else {
                    Rel::Ge
                };
                let c = Constraint::new(coeffs, constant, rel);
                if c.coeffs.is_empty() {
                    if !c.eval(&[]) {
                        return None;
                    }
                } else {
                    next.insert(c.normalized());
                }
            }
        }
        steps.push(Step::Eliminated(v, with));
        set = next;
    }

    let mut vals = vec![Rat::zero(); nvars];
    for step in steps.iter().rev() {
        match step {
            Step::Solved(v, expr, k) => {
                let mut s = k.clone();
                for (w, c) in expr {
                    s += c * &vals[*w];
                }
                vals[*v] = s;
            }
            Step::Eliminated(v, cs) => {
                vals[*v] = pick_value(*v, cs, &vals);
            }
        }
    }
    debug_assert!(constraints.iter().all(|c| c.eval(&vals)));
    Some(vals)
}

fn pick_value(v: usize, cs: &[Constraint], vals: &[Rat]) -> Rat {
    let mut lo: Option<(Rat, bool)> = None;
    let mut hi: Option<(Rat, bool)> = None;
    for c in cs {
        let a = &c.coeffs[&v];
        let mut rest = c.constant.clone();
        for (w, k) in &c.coeffs {
            if *w != v {
                rest += k * &vals[*w];
            }
        }
        // a·v + rest ⋈ 0  ⇒  v ⋈' -rest/a
        let bound = -rest / a;
        let strict = c.rel == Rel::Gt;
        if a.is_positive() {
            if lo.as_ref().is_none_or(|(b, s)| bound > *b || (bound == *b && strict && !s)) {
                lo = Some((bound, strict));
            }
        } else if hi.as_ref().is_none_or(|(b, s)| bound < *b || (bound == *b && strict && !s)) {
            hi = Some((bound, strict));
        }
    }
    match (lo, hi) {
        (None, None) => Rat::zero(),
        (Some((l, s)), None) => {
            if s {
                l.floor() + Rat::one()
            } else {
                l
            }
        }
        (None, Some((h, s))) => {
            if s {
                h.ceil() - Rat::one()
            } else {
                h
            }
        }
        (Some((l, ls)), Some((h, hs))) => {
            if l == h && !ls && !hs {
                l
            } else {
                let zero = Rat::zero();
                let ok = |x: &Rat| (if ls { *x > l } else { *x >= l }) && (if hs { *x < h } else { *x <= h });
                if ok(&zero) {
                    zero
                } else {
                    (l + h) / Rat::from_integer(2.into())
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(pairs: &[(usize, i64)], k: i64, rel: Rel) -> Constraint {
        Constraint::new(
            pairs
                .iter()
                .map(|(v, a)| (*v, Rat::from_integer((*a).into())))
                .collect(),
            Rat::from_integer(k.into()),
            rel,
        )
    }

    #[test]
    fn strict_interval() {
        // x > 0, 1 - x > 0
        let cs = [c(&[(0, 1)], 0, Rel::Gt), c(&[(0, -1)], 1, Rel::Gt)];
        let m = satisfiable(&cs, 1).unwrap();
        assert!(cs.iter().all(|c| c.eval(&m)));
        // x > 0, -x >= 0
        assert!(satisfiable(&[c(&[(0, 1)], 0, Rel::Gt), c(&[(0, -1)], 0, Rel::Ge)], 1).is_none());
    }

    #[test]
    fn equalities_and_chains() {
        // x = y + 1, y >= 2, 4 - x > 0 → x in (3, 4)
        let cs = [
            c(&[(0, 1), (1, -1)], -1, Rel::Eq),
            c(&[(1, 1)], -2, Rel::Ge),
            c(&[(0, -1)], 4, Rel::Gt),
        ];
        let m = satisfiable(&cs, 2).unwrap();
        assert!(cs.iter().all(|c| c.eval(&m)));
        let bad = [
            c(&[(0, 1), (1, -1)], -1, Rel::Eq),
            c(&[(1, 1)], -3, Rel::Ge),
            c(&[(0, -1)], 4, Rel::Gt),
        ];
        assert!(satisfiable(&bad, 2).is_none());
    }
}
