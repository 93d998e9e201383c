//! Static semantics: free, bound and must-bound variables.
//!
//! Differential symbols are recorded as `x'`.

use super::ast::*;
use std::collections::BTreeSet;

pub type VarSet = BTreeSet<String>;

pub fn prime(x: &str) -> String {
    format!("{x}'")
}

pub fn term_vars(t: &Term) -> VarSet {
    let mut out = VarSet::new();
    term_vars_into(t, &mut out);
    out
}

fn term_vars_into(t: &Term, out: &mut VarSet) {
    match t {
        Term::Var(x) => {
            out.insert(x.clone());
        }
        Term::Const(_) => {}
        Term::DiffSym(x) => {
            out.insert(prime(x));
        }
        Term::Add(a, b) | Term::Sub(a, b) | Term::Mul(a, b) | Term::Div(a, b) => {
            term_vars_into(a, out);
            term_vars_into(b, out);
        }
        Term::Pow(a, _) => term_vars_into(a, out),
        Term::Func(_, args) => args.iter().for_each(|a| term_vars_into(a, out)),
        Term::Diff(e) => {
            // (e)' depends on e's variables and their differential symbols
            let inner = term_vars(e);
            for x in inner {
                if !x.ends_with('\'') {
                    out.insert(prime(&x));
                }
                out.insert(x);
            }
        }
    }
}

pub fn atom_free_vars(a: &Atom) -> VarSet {
    match a {
        Atom::True | Atom::False | Atom::AssignAny(_) => VarSet::new(),
        Atom::Cmp(_, l, r) => {
            let mut s = term_vars(l);
            s.extend(term_vars(r));
            s
        }
        Atom::Pred(_, args) => args.iter().flat_map(term_vars).collect(),
        Atom::Assign(_, e) => term_vars(e),
        Atom::OdeEq(x, e) => {
            let mut s = term_vars(e);
            s.insert(x.clone());
            s
        }
    }
}

pub fn free_vars(f: &Fml) -> VarSet {
    match f {
        Fml::Atom(a) => atom_free_vars(&a.atom),
        Fml::Not(a) => free_vars(a),
        Fml::And(a, b) | Fml::Or(a, b) | Fml::Imp(a, b) | Fml::Equiv(a, b) => {
            let mut s = free_vars(a);
            s.extend(free_vars(b));
            s
        }
        Fml::Forall(x, a) | Fml::Exists(x, a) => {
            let mut s = free_vars(a);
            s.remove(x);
            s
        }
        Fml::Boxed(p, a) | Fml::Diamond(p, a) => {
            let mut s = free_vars(a);
            for x in must_bound_vars(p) {
                s.remove(&x);
            }
            s.extend(prog_free_vars(p));
            s
        }
    }
}

pub fn prog_free_vars(p: &Prog) -> VarSet {
    match p {
        Prog::Atom(a) => atom_free_vars(&a.atom),
        Prog::Test(f) => free_vars(f),
        Prog::Seq(a, b) => {
            let mut s = prog_free_vars(b);
            for x in must_bound_vars(a) {
                s.remove(&x);
            }
            s.extend(prog_free_vars(a));
            s
        }
        Prog::Choice(a, b) => {
            let mut s = prog_free_vars(a);
            s.extend(prog_free_vars(b));
            s
        }
        Prog::Loop(a) => prog_free_vars(a),
        Prog::Ode(ode) => {
            let mut s: VarSet = ode.eqs.iter().flat_map(|e| atom_free_vars(&e.atom)).collect();
            if let Some(q) = &ode.domain {
                s.extend(free_vars(q));
            }
            s
        }
    }
}

pub fn bound_vars(p: &Prog) -> VarSet {
    match p {
        Prog::Atom(a) => match &a.atom {
            Atom::Assign(x, _) => VarSet::from([x.key()]),
            Atom::AssignAny(x) => VarSet::from([x.clone()]),
            _ => VarSet::new(),
        },
        Prog::Test(_) => VarSet::new(),
        Prog::Seq(a, b) | Prog::Choice(a, b) => {
            let mut s = bound_vars(a);
            s.extend(bound_vars(b));
            s
        }
        Prog::Loop(a) => bound_vars(a),
        Prog::Ode(ode) => ode
            .vars()
            .into_iter()
            .flat_map(|x| [prime(&x), x])
            .collect(),
    }
}

/// Variables written on every run.
pub fn must_bound_vars(p: &Prog) -> VarSet {
    match p {
        Prog::Seq(a, b) => {
            let mut s = must_bound_vars(a);
            s.extend(must_bound_vars(b));
            s
        }
        Prog::Choice(a, b) => {
            let a = must_bound_vars(a);
            let b = must_bound_vars(b);
            a.intersection(&b).cloned().collect()
        }
        Prog::Loop(_) => VarSet::new(),
        _ => bound_vars(p),
    }
}

/// Every variable occurring anywhere, bound or free.
pub fn all_vars(f: &Fml) -> VarSet {
    let mut s = VarSet::new();
    all_vars_fml(f, &mut s);
    s
}

pub fn all_vars_prog(p: &Prog) -> VarSet {
    let mut s = VarSet::new();
    all_vars_prog_into(p, &mut s);
    s
}

fn all_vars_atom(a: &Atom, s: &mut VarSet) {
    s.extend(atom_free_vars(a));
    match a {
        Atom::Assign(x, _) => {
            s.insert(x.key());
        }
        Atom::AssignAny(x) => {
            s.insert(x.clone());
        }
        Atom::OdeEq(x, _) => {
            s.insert(prime(x));
        }
        _ => {}
    }
}

fn all_vars_fml(f: &Fml, s: &mut VarSet) {
    match f {
        Fml::Atom(a) => all_vars_atom(&a.atom, s),
        Fml::Not(a) => all_vars_fml(a, s),
        Fml::And(a, b) | Fml::Or(a, b) | Fml::Imp(a, b) | Fml::Equiv(a, b) => {
            all_vars_fml(a, s);
            all_vars_fml(b, s);
        }
        Fml::Forall(x, a) | Fml::Exists(x, a) => {
            s.insert(x.clone());
            all_vars_fml(a, s);
        }
        Fml::Boxed(p, a) | Fml::Diamond(p, a) => {
            all_vars_prog_into(p, s);
            all_vars_fml(a, s);
        }
    }
}

fn all_vars_prog_into(p: &Prog, s: &mut VarSet) {
    match p {
        Prog::Atom(a) => all_vars_atom(&a.atom, s),
        Prog::Test(f) => all_vars_fml(f, s),
        Prog::Seq(a, b) | Prog::Choice(a, b) => {
            all_vars_prog_into(a, s);
            all_vars_prog_into(b, s);
        }
        Prog::Loop(a) => all_vars_prog_into(a, s),
        Prog::Ode(ode) => {
            for e in &ode.eqs {
                all_vars_atom(&e.atom, s);
            }
            if let Some(q) = &ode.domain {
                all_vars_fml(q, s);
            }
        }
    }
}

pub fn sequent_vars(s: &Sequent) -> VarSet {
    s.ante.iter().chain(s.succ.iter()).flat_map(all_vars).collect()
}

/// A variable name based on `base` that is not in `avoid`: `x_0`, `x_1`, …
pub fn fresh_var(base: &str, avoid: &VarSet) -> String {
    let stem = base.trim_end_matches('\'');
    (0..)
        .map(|i| format!("{stem}_{i}"))
        .find(|c| !avoid.contains(c) && !avoid.contains(&prime(c)))
        .unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parser::parse_fml;

    fn prog_of(text: &str) -> Prog {
        match parse_fml(&format!("[{text}] true")).unwrap() {
            Fml::Boxed(p, _) => *p,
            _ => unreachable!(),
        }
    }

    #[test]
    fn assignment_binds_its_variable() {
        assert_eq!(bound_vars(&prog_of("x := e")), VarSet::from(["x".to_string()]));
    }

    #[test]
    fn ode_binds_state_and_differentials() {
        let p = prog_of("{x' = v, v' = -g + r*v^2, t' = 1 & t <= T}");
        let want: VarSet = ["x", "x'", "v", "v'", "t", "t'"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        assert_eq!(bound_vars(&p), want);
    }

    #[test]
    fn free_vars_of_comparison() {
        let f = parse_fml("v >= m").unwrap();
        assert_eq!(free_vars(&f), VarSet::from(["m".to_string(), "v".to_string()]));
    }

    #[test]
    fn box_hides_must_bound() {
        let f = parse_fml("[x := y] x > z").unwrap();
        assert_eq!(free_vars(&f), VarSet::from(["y".to_string(), "z".to_string()]));
        let g = parse_fml("[x := y ++ ?true] x > z").unwrap();
        assert!(free_vars(&g).contains("x"));
    }

    #[test]
    fn fresh_var_avoids() {
        let avoid = VarSet::from(["x".to_string(), "x_0".to_string()]);
        assert_eq!(fresh_var("x", &avoid), "x_1");
    }
}
