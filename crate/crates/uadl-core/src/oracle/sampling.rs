//! Randomized falsifier: evaluates the sequent on exact rational points.
//!
//! It can only ever refute. Points where some subterm is undefined (division
//! by zero, square roots of non-squares, unknown functions) are skipped.

use super::{canonical_hash, Oracle, Verdict};
use crate::syntax::vars::sequent_vars;
use crate::syntax::*;
use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::{BTreeMap, BTreeSet};

pub type Env = BTreeMap<String, Rat>;

fn exact_sqrt(q: &Rat) -> Option<Rat> {
    if q.is_negative() {
        return None;
    }
    let root = |n: &BigInt| {
        let r = n.sqrt();
        (&r * &r == *n).then_some(r)
    };
    Some(Rat::new(root(q.numer())?, root(q.denom())?))
}

pub fn eval_term(t: &Term, env: &Env) -> Option<Rat> {
    Some(match t {
        Term::Var(x) => env.get(x)?.clone(),
        Term::DiffSym(x) => env.get(&format!("{x}'"))?.clone(),
        Term::Const(c) => c.clone(),
        Term::Add(a, b) => eval_term(a, env)? + eval_term(b, env)?,
        Term::Sub(a, b) => eval_term(a, env)? - eval_term(b, env)?,
        Term::Mul(a, b) => eval_term(a, env)? * eval_term(b, env)?,
        Term::Div(a, b) => {
            let d = eval_term(b, env)?;
            if d.is_zero() {
                return None;
            }
            eval_term(a, env)? / d
        }
        Term::Pow(a, n) => {
            let base = eval_term(a, env)?;
            let mut out = Rat::one();
            for _ in 0..*n {
                out *= &base;
            }
            out
        }
        Term::Func(f, args) if f == "sqrt" && args.len() == 1 => exact_sqrt(&eval_term(&args[0], env)?)?,
        Term::Func(..) | Term::Diff(_) => return None,
    })
}

fn eval_atom(a: &Atom, env: &Env) -> Option<bool> {
    match a {
        Atom::True => Some(true),
        Atom::False => Some(false),
        Atom::Cmp(op, l, r) => Some(op.holds(eval_term(l, env)?.cmp(&eval_term(r, env)?))),
        _ => None,
    }
}

/// Truth value of `f`; `None` where the evaluator cannot decide (loops,
/// ODEs, quantifiers, predicates).
pub fn eval_fml(f: &Fml, env: &Env) -> Option<bool> {
    match f {
        Fml::Atom(a) => eval_atom(&a.atom, env),
        Fml::Not(a) => eval_fml(a, env).map(|b| !b),
        Fml::And(a, b) => match (eval_fml(a, env), eval_fml(b, env)) {
            (Some(false), _) | (_, Some(false)) => Some(false),
            (Some(true), Some(true)) => Some(true),
            _ => None,
        },
        Fml::Or(a, b) => match (eval_fml(a, env), eval_fml(b, env)) {
            (Some(true), _) | (_, Some(true)) => Some(true),
            (Some(false), Some(false)) => Some(false),
            _ => None,
        },
        Fml::Imp(a, b) => match (eval_fml(a, env), eval_fml(b, env)) {
            (Some(false), _) | (_, Some(true)) => Some(true),
            (Some(true), Some(false)) => Some(false),
            _ => None,
        },
        Fml::Equiv(a, b) => Some(eval_fml(a, env)? == eval_fml(b, env)?),
        Fml::Forall(..) | Fml::Exists(..) => None,
        Fml::Boxed(p, a) => {
            let outs = run(p, env)?;
            let mut all = true;
            for e in outs {
                all &= eval_fml(a, &e)?;
            }
            Some(all)
        }
        Fml::Diamond(p, a) => {
            let outs = run(p, env)?;
            let mut any = false;
            for e in outs {
                any |= eval_fml(a, &e)?;
            }
            Some(any)
        }
    }
}

/// All final states of a loop-free, ODE-free, deterministic-assignment
/// program.
fn run(p: &Prog, env: &Env) -> Option<Vec<Env>> {
    match p {
        Prog::Atom(a) => match &a.atom {
            Atom::Assign(x, e) => {
                let v = eval_term(e, env)?;
                let mut out = env.clone();
                out.insert(x.key(), v);
                Some(vec![out])
            }
            _ => None,
        },
        Prog::Test(q) => Some(if eval_fml(q, env)? { vec![env.clone()] } else { vec![] }),
        Prog::Seq(a, b) => {
            let mut out = Vec::new();
            for e in run(a, env)? {
                out.extend(run(b, &e)?);
            }
            Some(out)
        }
        Prog::Choice(a, b) => {
            let mut out = run(a, env)?;
            out.extend(run(b, env)?);
            Some(out)
        }
        Prog::Loop(_) | Prog::Ode(_) => None,
    }
}

/// `Some(false)` iff the point falsifies the sequent.
pub fn eval_sequent(s: &Sequent, env: &Env) -> Option<bool> {
    let mut undecided = false;
    for f in &s.ante {
        match eval_fml(f, env) {
            Some(false) => return Some(true),
            None => undecided = true,
            _ => {}
        }
    }
    for f in &s.succ {
        match eval_fml(f, env) {
            Some(true) => return Some(true),
            None => undecided = true,
            _ => {}
        }
    }
    if undecided {
        None
    } else {
        Some(false)
    }
}

fn collect_constants(t: &Term, out: &mut BTreeSet<Rat>) {
    match t {
        Term::Const(c) => {
            out.insert(c.clone());
        }
        Term::Add(a, b) | Term::Sub(a, b) | Term::Mul(a, b) | Term::Div(a, b) => {
            collect_constants(a, out);
            collect_constants(b, out);
        }
        Term::Pow(a, _) | Term::Diff(a) => collect_constants(a, out),
        Term::Func(_, args) => args.iter().for_each(|a| collect_constants(a, out)),
        _ => {}
    }
}

fn sequent_constants(s: &Sequent) -> BTreeSet<Rat> {
    let mut out = BTreeSet::new();
    for f in s.ante.iter().chain(s.succ.iter()) {
        for a in crate::syntax::visit::atoms_of(f) {
            for t in crate::syntax::subst::atom_terms(&a.atom) {
                collect_constants(t, &mut out);
            }
        }
    }
    out
}

#[derive(Clone, Debug)]
pub struct SamplingOracle {
    pub samples: usize,
}

impl Default for SamplingOracle {
    fn default() -> Self {
        SamplingOracle { samples: 2000 }
    }
}

impl SamplingOracle {
    pub fn new() -> Self {
        Self::default()
    }

    fn pool(s: &Sequent) -> Vec<Rat> {
        let mut pool: BTreeSet<Rat> = (-3..=3).map(rat).collect();
        for q in [Rat::new(1.into(), 2.into()), Rat::new((-1).into(), 2.into()), rat(4), rat(9), Rat::new(1.into(), 4.into())] {
            pool.insert(q);
        }
        for c in sequent_constants(s) {
            pool.insert(&c + rat(1));
            pool.insert(&c - rat(1));
            pool.insert(-&c);
            pool.insert(c);
        }
        pool.into_iter().collect()
    }
}

impl Oracle for SamplingOracle {
    fn decide(&self, s: &Sequent) -> Verdict {
        let vars: Vec<String> = sequent_vars(s).into_iter().collect();
        let pool = Self::pool(s);
        let seed = u64::from_str_radix(&canonical_hash(s)[..16], 16).unwrap_or(0);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut defined = 0usize;
        let mut try_point = |env: Env| -> Option<Verdict> {
            match eval_sequent(s, &env) {
                Some(false) => Some(Verdict::Invalid(env)),
                Some(true) => {
                    defined += 1;
                    None
                }
                None => None,
            }
        };

        // a small grid first when there are few variables
        if !vars.is_empty() && vars.len() <= 3 {
            let grid: Vec<Rat> = pool.iter().take(9).cloned().collect();
            let n = grid.len();
            let total = n.pow(vars.len() as u32);
            for mut i in 0..total {
                let mut env = Env::new();
                for x in &vars {
                    env.insert(x.clone(), grid[i % n].clone());
                    i /= n;
                }
                if let Some(v) = try_point(env) {
                    return v;
                }
            }
        }
        for _ in 0..self.samples {
            let mut env = Env::new();
            for x in &vars {
                let v = if rng.gen_bool(0.7) {
                    pool[rng.gen_range(0..pool.len())].clone()
                } else {
                    Rat::new(rng.gen_range(-40i64..=40).into(), rng.gen_range(1i64..=4).into())
                };
                env.insert(x.clone(), v);
            }
            if let Some(v) = try_point(env) {
                return v;
            }
        }
        Verdict::Unknown(format!("no counterexample in {defined} defined samples"))
    }
}

/// Decimal rendering used in reports.
pub fn show_value(q: &Rat) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        match (q.numer().to_f64(), q.denom().to_f64()) {
            (Some(n), Some(d)) => format!("{} (~{:.4})", q, n / d),
            _ => q.to_string(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seq(ante: &[&str], succ: &[&str]) -> Sequent {
        let p = |t: &&str| parse_fml(t).unwrap();
        Sequent::new(ante.iter().map(p).collect(), succ.iter().map(p).collect())
    }

    #[test]
    fn refutes_nonlinear() {
        match SamplingOracle::new().decide(&seq(&[], &["x*x > 0"])) {
            Verdict::Invalid(m) => assert!(m["x"].is_zero()),
            v => panic!("{v}"),
        }
        match SamplingOracle::new().decide(&seq(&["x > 0"], &["x * y >= x"])) {
            Verdict::Invalid(m) => assert!(&m["x"] * &m["y"] < m["x"]),
            v => panic!("{v}"),
        }
    }

    #[test]
    fn never_refutes_valid() {
        let v = SamplingOracle::new().decide(&seq(&["g > 0", "r >= 0"], &["-g + r*v^2 >= -g"]));
        assert!(matches!(v, Verdict::Unknown(_)));
    }

    #[test]
    fn sqrt_only_on_squares() {
        assert_eq!(exact_sqrt(&Rat::new(9.into(), 4.into())), Some(Rat::new(3.into(), 2.into())));
        assert_eq!(exact_sqrt(&rat(2)), None);
        let env: Env = [("x".to_string(), rat(2))].into();
        assert_eq!(eval_term(&parse_term("sqrt(x)").unwrap(), &env), None);
    }

    #[test]
    fn programs_evaluate() {
        let env: Env = [("x".to_string(), rat(1))].into();
        let f = parse_fml("[x := x + 1 ++ ?x > 5] x > 1").unwrap();
        assert_eq!(eval_fml(&f, &env), Some(true));
        let f = parse_fml("<x := x - 1 ++ x := x + 1> x = 0").unwrap();
        assert_eq!(eval_fml(&f, &env), Some(true));
    }
}
