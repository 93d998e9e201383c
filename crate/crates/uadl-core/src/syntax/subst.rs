//! Term substitution and uniform variable renaming.

use super::ast::*;
use super::vars::{bound_vars, free_vars, prime, term_vars, VarSet};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SubstError {
    #[error("substituting for {0} is not admissible under a binder of {1}")]
    Clash(String, String),
    #[error("substituting for {0} inside a differential is not admissible")]
    UnderDifferential(String),
}

type SResult<T> = Result<T, SubstError>;

fn term_mentions(t: &Term, x: &VarRef) -> bool {
    term_vars(t).contains(&x.key())
}

pub fn subst_term(t: &Term, x: &VarRef, e: &Term) -> SResult<Term> {
    Ok(match t {
        Term::Var(y) if !x.prime && *y == x.name => e.clone(),
        Term::DiffSym(y) if x.prime && *y == x.name => e.clone(),
        Term::Var(_) | Term::Const(_) | Term::DiffSym(_) => t.clone(),
        Term::Add(a, b) => Term::add(subst_term(a, x, e)?, subst_term(b, x, e)?),
        Term::Sub(a, b) => Term::sub(subst_term(a, x, e)?, subst_term(b, x, e)?),
        Term::Mul(a, b) => Term::mul(subst_term(a, x, e)?, subst_term(b, x, e)?),
        Term::Div(a, b) => Term::div(subst_term(a, x, e)?, subst_term(b, x, e)?),
        Term::Pow(a, n) => Term::Pow(Box::new(subst_term(a, x, e)?), *n),
        Term::Func(f, args) => Term::Func(
            f.clone(),
            args.iter()
                .map(|a| subst_term(a, x, e))
                .collect::<SResult<_>>()?,
        ),
        Term::Diff(inner) => {
            let mentions = term_vars(inner).contains(&x.name);
            if mentions || (x.prime && term_mentions(inner, x)) {
                return Err(SubstError::UnderDifferential(x.key()));
            }
            t.clone()
        }
    })
}

fn subst_atom(a: &Atom, x: &VarRef, e: &Term) -> SResult<Atom> {
    Ok(match a {
        Atom::True | Atom::False | Atom::AssignAny(_) => a.clone(),
        Atom::Cmp(op, l, r) => Atom::Cmp(*op, subst_term(l, x, e)?, subst_term(r, x, e)?),
        Atom::Pred(p, args) => Atom::Pred(
            p.clone(),
            args.iter()
                .map(|t| subst_term(t, x, e))
                .collect::<SResult<_>>()?,
        ),
        Atom::Assign(y, t) => Atom::Assign(y.clone(), subst_term(t, x, e)?),
        Atom::OdeEq(y, t) => Atom::OdeEq(y.clone(), subst_term(t, x, e)?),
    })
}

/// `f` with every free occurrence of `x` replaced by `e`.
pub fn subst_fml(f: &Fml, x: &VarRef, e: &Term) -> SResult<Fml> {
    let key = x.key();
    if !free_vars(f).contains(&key) {
        return Ok(f.clone());
    }
    let evars = term_vars(e);
    Ok(match f {
        Fml::Atom(a) => Fml::Atom(LAtom {
            labels: a.labels.clone(),
            atom: subst_atom(&a.atom, x, e)?,
        }),
        Fml::Not(a) => Fml::not(subst_fml(a, x, e)?),
        Fml::And(a, b) => Fml::and(subst_fml(a, x, e)?, subst_fml(b, x, e)?),
        Fml::Or(a, b) => Fml::or(subst_fml(a, x, e)?, subst_fml(b, x, e)?),
        Fml::Imp(a, b) => Fml::imp(subst_fml(a, x, e)?, subst_fml(b, x, e)?),
        Fml::Equiv(a, b) => Fml::equiv(subst_fml(a, x, e)?, subst_fml(b, x, e)?),
        Fml::Forall(y, a) | Fml::Exists(y, a) => {
            if evars.contains(y) || evars.contains(&prime(y)) {
                return Err(SubstError::Clash(key, y.clone()));
            }
            let body = subst_fml(a, x, e)?;
            if matches!(f, Fml::Forall(..)) {
                Fml::forall(y, body)
            } else {
                Fml::exists(y, body)
            }
        }
        Fml::Boxed(p, a) => {
            let (p, a) = subst_modal(p, a, x, e, &evars)?;
            Fml::boxed(p, a)
        }
        Fml::Diamond(p, a) => {
            let (p, a) = subst_modal(p, a, x, e, &evars)?;
            Fml::diamond(p, a)
        }
    })
}

fn subst_modal(p: &Prog, post: &Fml, x: &VarRef, e: &Term, evars: &VarSet) -> SResult<(Prog, Fml)> {
    let key = x.key();
    let bv = bound_vars(p);
    if !bv.contains(&key) {
        if let Some(y) = bv.iter().find(|y| evars.contains(*y)) {
            return Err(SubstError::Clash(key, y.clone()));
        }
        return Ok((subst_prog(p, x, e)?, subst_fml(post, x, e)?));
    }
    match p {
        Prog::Atom(a) => {
            let atom = subst_atom(&a.atom, x, e)?;
            Ok((
                Prog::Atom(LAtom {
                    labels: a.labels.clone(),
                    atom,
                }),
                post.clone(),
            ))
        }
        Prog::Seq(a, b) => {
            let inner = Fml::boxed((**b).clone(), post.clone());
            let (a2, inner2) = subst_modal(a, &inner, x, e, evars)?;
            match inner2 {
                Fml::Boxed(b2, post2) => Ok((Prog::seq(a2, *b2), *post2)),
                _ => unreachable!(),
            }
        }
        _ => {
            if free_vars(&Fml::boxed(p.clone(), post.clone())).contains(&key) {
                Err(SubstError::Clash(key.clone(), key))
            } else {
                Ok((p.clone(), post.clone()))
            }
        }
    }
}

/// Substitutes inside a program that does not bind `x`.
fn subst_prog(p: &Prog, x: &VarRef, e: &Term) -> SResult<Prog> {
    Ok(match p {
        Prog::Atom(a) => Prog::Atom(LAtom {
            labels: a.labels.clone(),
            atom: subst_atom(&a.atom, x, e)?,
        }),
        Prog::Test(f) => Prog::test(subst_fml(f, x, e)?),
        Prog::Seq(a, b) => Prog::seq(subst_prog(a, x, e)?, subst_prog(b, x, e)?),
        Prog::Choice(a, b) => Prog::choice(subst_prog(a, x, e)?, subst_prog(b, x, e)?),
        Prog::Loop(a) => Prog::Loop(Box::new(subst_prog(a, x, e)?)),
        Prog::Ode(ode) => Prog::Ode(Ode {
            eqs: ode
                .eqs
                .iter()
                .map(|q| {
                    Ok(LAtom {
                        labels: q.labels.clone(),
                        atom: subst_atom(&q.atom, x, e)?,
                    })
                })
                .collect::<SResult<_>>()?,
            domain: match &ode.domain {
                Some(q) => Some(Box::new(subst_fml(q, x, e)?)),
                None => None,
            },
        }),
    })
}

fn rn(name: &str, from: &str, to: &str) -> String {
    if name == from {
        to.to_string()
    } else {
        name.to_string()
    }
}

pub fn rename_term(t: &Term, from: &str, to: &str) -> Term {
    match t {
        Term::Var(y) => Term::Var(rn(y, from, to)),
        Term::DiffSym(y) => Term::DiffSym(rn(y, from, to)),
        Term::Const(_) => t.clone(),
        Term::Add(a, b) => Term::add(rename_term(a, from, to), rename_term(b, from, to)),
        Term::Sub(a, b) => Term::sub(rename_term(a, from, to), rename_term(b, from, to)),
        Term::Mul(a, b) => Term::mul(rename_term(a, from, to), rename_term(b, from, to)),
        Term::Div(a, b) => Term::div(rename_term(a, from, to), rename_term(b, from, to)),
        Term::Pow(a, n) => Term::Pow(Box::new(rename_term(a, from, to)), *n),
        Term::Func(f, args) => Term::Func(
            f.clone(),
            args.iter().map(|a| rename_term(a, from, to)).collect(),
        ),
        Term::Diff(a) => Term::Diff(Box::new(rename_term(a, from, to))),
    }
}

pub fn rename_atom(a: &Atom, from: &str, to: &str) -> Atom {
    match a {
        Atom::True | Atom::False => a.clone(),
        Atom::Cmp(op, l, r) => Atom::Cmp(*op, rename_term(l, from, to), rename_term(r, from, to)),
        Atom::Pred(p, args) => Atom::Pred(
            p.clone(),
            args.iter().map(|t| rename_term(t, from, to)).collect(),
        ),
        Atom::Assign(y, t) => Atom::Assign(
            VarRef {
                name: rn(&y.name, from, to),
                prime: y.prime,
            },
            rename_term(t, from, to),
        ),
        Atom::AssignAny(y) => Atom::AssignAny(rn(y, from, to)),
        Atom::OdeEq(y, t) => Atom::OdeEq(rn(y, from, to), rename_term(t, from, to)),
    }
}

/// Uniform renaming of `from` (and `from'`) to `to` everywhere, bound
/// occurrences included. Labels are kept.
pub fn rename_fml(f: &Fml, from: &str, to: &str) -> Fml {
    let r = |a: &Fml| rename_fml(a, from, to);
    match f {
        Fml::Atom(a) => Fml::Atom(LAtom {
            labels: a.labels.clone(),
            atom: rename_atom(&a.atom, from, to),
        }),
        Fml::Not(a) => Fml::not(r(a)),
        Fml::And(a, b) => Fml::and(r(a), r(b)),
        Fml::Or(a, b) => Fml::or(r(a), r(b)),
        Fml::Imp(a, b) => Fml::imp(r(a), r(b)),
        Fml::Equiv(a, b) => Fml::equiv(r(a), r(b)),
        Fml::Forall(y, a) => Fml::forall(&rn(y, from, to), r(a)),
        Fml::Exists(y, a) => Fml::exists(&rn(y, from, to), r(a)),
        Fml::Boxed(p, a) => Fml::boxed(rename_prog(p, from, to), r(a)),
        Fml::Diamond(p, a) => Fml::diamond(rename_prog(p, from, to), r(a)),
    }
}

pub fn rename_prog(p: &Prog, from: &str, to: &str) -> Prog {
    let r = |a: &Prog| rename_prog(a, from, to);
    match p {
        Prog::Atom(a) => Prog::Atom(LAtom {
            labels: a.labels.clone(),
            atom: rename_atom(&a.atom, from, to),
        }),
        Prog::Test(f) => Prog::test(rename_fml(f, from, to)),
        Prog::Seq(a, b) => Prog::seq(r(a), r(b)),
        Prog::Choice(a, b) => Prog::choice(r(a), r(b)),
        Prog::Loop(a) => Prog::Loop(Box::new(r(a))),
        Prog::Ode(ode) => Prog::Ode(Ode {
            eqs: ode
                .eqs
                .iter()
                .map(|q| LAtom {
                    labels: q.labels.clone(),
                    atom: rename_atom(&q.atom, from, to),
                })
                .collect(),
            domain: ode
                .domain
                .as_ref()
                .map(|q| Box::new(rename_fml(q, from, to))),
        }),
    }
}

/// Replaces the subterm at `path` (child indices) in `t`.
pub fn replace_subterm(t: &Term, path: &[usize], new: &Term) -> Option<Term> {
    let Some((&i, rest)) = path.split_first() else {
        return Some(new.clone());
    };
    let r = |a: &Term| replace_subterm(a, rest, new).map(Box::new);
    Some(match (t, i) {
        (Term::Add(a, b), 0) => Term::Add(r(a)?, b.clone()),
        (Term::Add(a, b), 1) => Term::Add(a.clone(), r(b)?),
        (Term::Sub(a, b), 0) => Term::Sub(r(a)?, b.clone()),
        (Term::Sub(a, b), 1) => Term::Sub(a.clone(), r(b)?),
        (Term::Mul(a, b), 0) => Term::Mul(r(a)?, b.clone()),
        (Term::Mul(a, b), 1) => Term::Mul(a.clone(), r(b)?),
        (Term::Div(a, b), 0) => Term::Div(r(a)?, b.clone()),
        (Term::Div(a, b), 1) => Term::Div(a.clone(), r(b)?),
        (Term::Pow(a, n), 0) => Term::Pow(r(a)?, *n),
        (Term::Diff(a), 0) => Term::Diff(r(a)?),
        (Term::Func(f, args), i) if i < args.len() => {
            let mut args = args.clone();
            args[i] = replace_subterm(&args[i], rest, new)?;
            Term::Func(f.clone(), args)
        }
        _ => return None,
    })
}

pub fn subterm_at<'a>(t: &'a Term, path: &[usize]) -> Option<&'a Term> {
    let Some((&i, rest)) = path.split_first() else {
        return Some(t);
    };
    let c = match (t, i) {
        (Term::Add(a, _) | Term::Sub(a, _) | Term::Mul(a, _) | Term::Div(a, _), 0) => a,
        (Term::Add(_, b) | Term::Sub(_, b) | Term::Mul(_, b) | Term::Div(_, b), 1) => b,
        (Term::Pow(a, _) | Term::Diff(a), 0) => a,
        (Term::Func(_, args), i) if i < args.len() => &args[i],
        _ => return None,
    };
    subterm_at(c, rest)
}

/// Terms of an atom, indexed for term paths.
pub fn atom_terms(a: &Atom) -> Vec<&Term> {
    match a {
        Atom::Cmp(_, l, r) => vec![l, r],
        Atom::Pred(_, args) => args.iter().collect(),
        Atom::Assign(_, e) | Atom::OdeEq(_, e) => vec![e],
        _ => Vec::new(),
    }
}

pub fn replace_atom_term(a: &Atom, path: &[usize], new: &Term) -> Option<Atom> {
    let (&i, rest) = path.split_first()?;
    Some(match a {
        Atom::Cmp(op, l, r) => match i {
            0 => Atom::Cmp(*op, replace_subterm(l, rest, new)?, r.clone()),
            1 => Atom::Cmp(*op, l.clone(), replace_subterm(r, rest, new)?),
            _ => return None,
        },
        Atom::Pred(p, args) if i < args.len() => {
            let mut args = args.clone();
            args[i] = replace_subterm(&args[i], rest, new)?;
            Atom::Pred(p.clone(), args)
        }
        Atom::Assign(x, e) if i == 0 => Atom::Assign(x.clone(), replace_subterm(e, rest, new)?),
        Atom::OdeEq(x, e) if i == 0 => Atom::OdeEq(x.clone(), replace_subterm(e, rest, new)?),
        _ => return None,
    })
}

/// Pre-order term paths (within an atom) whose subterm satisfies `pred`.
pub fn find_atom_terms(a: &Atom, pred: &dyn Fn(&Term) -> bool) -> Vec<Vec<usize>> {
    fn walk(t: &Term, cur: &mut Vec<usize>, pred: &dyn Fn(&Term) -> bool, out: &mut Vec<Vec<usize>>) {
        if pred(t) {
            out.push(cur.clone());
        }
        let kids: Vec<&Term> = match t {
            Term::Add(a, b) | Term::Sub(a, b) | Term::Mul(a, b) | Term::Div(a, b) => vec![a, b],
            Term::Pow(a, _) | Term::Diff(a) => vec![a],
            Term::Func(_, args) => args.iter().collect(),
            _ => vec![],
        };
        for (i, k) in kids.into_iter().enumerate() {
            cur.push(i);
            walk(k, cur, pred, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    for (i, t) in atom_terms(a).into_iter().enumerate() {
        let mut cur = vec![i];
        walk(t, &mut cur, pred, &mut out);
    }
    out
}
