//! Polynomial normal form over exact rationals.
//!
//! Subterms that are not polynomial (functions, division by non-constants,
//! differentials) become opaque variables named after their printed form.
//! Opaque names start with `#` so they never collide with identifiers.

use crate::syntax::{print_term, Rat, Term};
use num_traits::{One, Zero};
use std::collections::BTreeMap;

pub type Monomial = BTreeMap<String, u32>;

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Poly {
    pub terms: BTreeMap<Monomial, Rat>,
}

impl Poly {
    pub fn constant(c: Rat) -> Poly {
        let mut p = Poly::default();
        if !c.is_zero() {
            p.terms.insert(Monomial::new(), c);
        }
        p
    }

    pub fn var(x: &str) -> Poly {
        let mut p = Poly::default();
        p.terms.insert(Monomial::from([(x.to_string(), 1)]), Rat::one());
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn as_constant(&self) -> Option<Rat> {
        match self.terms.len() {
            0 => Some(Rat::zero()),
            1 => self.terms.get(&Monomial::new()).cloned(),
            _ => None,
        }
    }

    pub fn add(&self, o: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, c) in &o.terms {
            let e = out.terms.entry(m.clone()).or_insert_with(Rat::zero);
            *e += c;
            if e.is_zero() {
                out.terms.remove(m);
            }
        }
        out
    }

    pub fn scale(&self, k: &Rat) -> Poly {
        if k.is_zero() {
            return Poly::default();
        }
        Poly {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), c * k)).collect(),
        }
    }

    pub fn neg(&self) -> Poly {
        self.scale(&-Rat::one())
    }

    pub fn sub(&self, o: &Poly) -> Poly {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Poly) -> Poly {
        let mut out = Poly::default();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &o.terms {
                let mut m = m1.clone();
                for (x, e) in m2 {
                    *m.entry(x.clone()).or_insert(0) += e;
                }
                out = out.add(&Poly {
                    terms: BTreeMap::from([(m, c1 * c2)]),
                });
            }
        }
        out
    }

    pub fn pow(&self, n: u32) -> Poly {
        let mut out = Poly::constant(Rat::one());
        for _ in 0..n {
            out = out.mul(self);
        }
        out
    }

    pub fn degree(&self) -> u32 {
        self.terms
            .keys()
            .map(|m| m.values().sum::<u32>())
            .max()
            .unwrap_or(0)
    }

    /// Partial derivative along `x` (treated as an ordinary variable).
    pub fn derive(&self, x: &str) -> Poly {
        let mut out = Poly::default();
        for (m, c) in &self.terms {
            if let Some(&e) = m.get(x) {
                let mut m2 = m.clone();
                if e == 1 {
                    m2.remove(x);
                } else {
                    m2.insert(x.to_string(), e - 1);
                }
                out = out.add(&Poly {
                    terms: BTreeMap::from([(m2, c * Rat::from_integer(e.into()))]),
                });
            }
        }
        out
    }
}

pub fn monomial_name(m: &Monomial) -> String {
    let parts: Vec<String> = m
        .iter()
        .map(|(x, e)| if *e == 1 { x.clone() } else { format!("{x}^{e}") })
        .collect();
    format!("#{}", parts.join("*"))
}

/// Polynomial of a term; `opaque` is set when some subterm was abstracted.
pub fn to_poly(t: &Term, opaque: &mut bool) -> Poly {
    match t {
        Term::Var(x) => Poly::var(x),
        Term::DiffSym(x) => Poly::var(&format!("{x}'")),
        Term::Const(c) => Poly::constant(c.clone()),
        Term::Add(a, b) => to_poly(a, opaque).add(&to_poly(b, opaque)),
        Term::Sub(a, b) => to_poly(a, opaque).sub(&to_poly(b, opaque)),
        Term::Mul(a, b) => to_poly(a, opaque).mul(&to_poly(b, opaque)),
        Term::Pow(a, n) => to_poly(a, opaque).pow(*n),
        Term::Div(a, b) => {
            let mut inner = false;
            let d = to_poly(b, &mut inner);
            match d.as_constant() {
                Some(c) if !c.is_zero() && !inner => to_poly(a, opaque).scale(&(Rat::one() / c)),
                _ => {
                    *opaque = true;
                    Poly::var(&format!("#{}", print_term(t)))
                }
            }
        }
        Term::Func(..) | Term::Diff(_) => {
            *opaque = true;
            Poly::var(&format!("#{}", print_term(t)))
        }
    }
}

/// A linear expression `Σ coeffs[x]·x + constant`.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Linear {
    pub coeffs: BTreeMap<String, Rat>,
    pub constant: Rat,
}

/// Linear view of a polynomial; nonlinear monomials become opaque variables.
pub fn linearize(p: &Poly, opaque: &mut bool) -> Linear {
    let mut out = Linear::default();
    for (m, c) in &p.terms {
        let deg: u32 = m.values().sum();
        if deg == 0 {
            out.constant = c.clone();
            continue;
        }
        let name = if deg == 1 {
            m.keys().next().unwrap().clone()
        } else {
            *opaque = true;
            monomial_name(m)
        };
        let e = out.coeffs.entry(name).or_insert_with(Rat::zero);
        *e += c;
    }
    out.coeffs.retain(|_, c| !c.is_zero());
    out
}
