//! Traversals over labeled syntax: atom listing, relabeling and positions.

use super::ast::*;
use std::collections::BTreeSet;

/// All labeled atoms of a formula in pre-order.
pub fn atoms_of(f: &Fml) -> Vec<&LAtom> {
    let mut out = Vec::new();
    collect_fml(f, &mut out);
    out
}

pub fn atoms_of_prog(p: &Prog) -> Vec<&LAtom> {
    let mut out = Vec::new();
    collect_prog(p, &mut out);
    out
}

fn collect_fml<'a>(f: &'a Fml, out: &mut Vec<&'a LAtom>) {
    match f {
        Fml::Atom(a) => out.push(a),
        Fml::Not(a) | Fml::Forall(_, a) | Fml::Exists(_, a) => collect_fml(a, out),
        Fml::And(a, b) | Fml::Or(a, b) | Fml::Imp(a, b) | Fml::Equiv(a, b) => {
            collect_fml(a, out);
            collect_fml(b, out);
        }
        Fml::Boxed(p, a) | Fml::Diamond(p, a) => {
            collect_prog(p, out);
            collect_fml(a, out);
        }
    }
}

fn collect_prog<'a>(p: &'a Prog, out: &mut Vec<&'a LAtom>) {
    match p {
        Prog::Atom(a) => out.push(a),
        Prog::Test(f) => collect_fml(f, out),
        Prog::Seq(a, b) | Prog::Choice(a, b) => {
            collect_prog(a, out);
            collect_prog(b, out);
        }
        Prog::Loop(a) => collect_prog(a, out),
        Prog::Ode(ode) => {
            out.extend(ode.eqs.iter());
            if let Some(q) = &ode.domain {
                collect_fml(q, out);
            }
        }
    }
}

/// Labels in pre-order, one entry per (atom, label) pair.
pub fn labels_of(f: &Fml) -> Vec<Label> {
    atoms_of(f)
        .into_iter()
        .flat_map(|a| a.labels.iter().cloned())
        .collect()
}

pub fn labels_of_prog(p: &Prog) -> Vec<Label> {
    atoms_of_prog(p)
        .into_iter()
        .flat_map(|a| a.labels.iter().cloned())
        .collect()
}

pub fn label_set(fs: &[Fml]) -> BTreeSet<Label> {
    fs.iter().flat_map(labels_of).collect()
}

pub fn sequent_labels(s: &Sequent) -> BTreeSet<Label> {
    let mut out = label_set(&s.ante);
    out.extend(label_set(&s.succ));
    out
}

/// Label groups of multi-labeled atoms in a sequent; such atoms are fused.
pub fn sequent_groups(s: &Sequent) -> Vec<Vec<Label>> {
    s.ante
        .iter()
        .chain(s.succ.iter())
        .flat_map(atoms_of)
        .filter(|a| a.labels.len() > 1)
        .map(|a| a.labels.clone())
        .collect()
}

pub fn relabel_fml(f: &Fml, g: &mut dyn FnMut(&LAtom) -> Vec<Label>) -> Fml {
    match f {
        Fml::Atom(a) => Fml::Atom(LAtom::new(g(a), a.atom.clone())),
        Fml::Not(a) => Fml::not(relabel_fml(a, g)),
        Fml::And(a, b) => Fml::and(relabel_fml(a, g), relabel_fml(b, g)),
        Fml::Or(a, b) => Fml::or(relabel_fml(a, g), relabel_fml(b, g)),
        Fml::Imp(a, b) => Fml::imp(relabel_fml(a, g), relabel_fml(b, g)),
        Fml::Equiv(a, b) => Fml::equiv(relabel_fml(a, g), relabel_fml(b, g)),
        Fml::Forall(x, a) => Fml::forall(x, relabel_fml(a, g)),
        Fml::Exists(x, a) => Fml::exists(x, relabel_fml(a, g)),
        Fml::Boxed(p, a) => {
            let p = relabel_prog(p, g);
            Fml::boxed(p, relabel_fml(a, g))
        }
        Fml::Diamond(p, a) => {
            let p = relabel_prog(p, g);
            Fml::diamond(p, relabel_fml(a, g))
        }
    }
}

pub fn relabel_prog(p: &Prog, g: &mut dyn FnMut(&LAtom) -> Vec<Label>) -> Prog {
    match p {
        Prog::Atom(a) => Prog::Atom(LAtom::new(g(a), a.atom.clone())),
        Prog::Test(f) => Prog::test(relabel_fml(f, g)),
        Prog::Seq(a, b) => {
            let a = relabel_prog(a, g);
            Prog::seq(a, relabel_prog(b, g))
        }
        Prog::Choice(a, b) => {
            let a = relabel_prog(a, g);
            Prog::choice(a, relabel_prog(b, g))
        }
        Prog::Loop(a) => Prog::Loop(Box::new(relabel_prog(a, g))),
        Prog::Ode(ode) => {
            let eqs = ode
                .eqs
                .iter()
                .map(|e| LAtom::new(g(e), e.atom.clone()))
                .collect();
            let domain = ode.domain.as_ref().map(|q| Box::new(relabel_fml(q, g)));
            Prog::Ode(Ode { eqs, domain })
        }
    }
}

/// Gives every atom of `f` the labels of the positionally corresponding atom
/// of `g` in addition to its own. Both must have the same shape.
pub fn fuse_with(f: &Fml, g: &Fml) -> Option<Fml> {
    let theirs: Vec<Vec<Label>> = atoms_of(g).into_iter().map(|a| a.labels.clone()).collect();
    if theirs.len() != atoms_of(f).len() || f.unlabel() != g.unlabel() {
        return None;
    }
    let mut i = 0;
    Some(relabel_fml(f, &mut |a| {
        let mut l = a.labels.clone();
        l.extend(theirs[i].iter().cloned());
        i += 1;
        l
    }))
}

pub fn fuse_prog_with(p: &Prog, q: &Prog) -> Option<Prog> {
    let theirs: Vec<Vec<Label>> = atoms_of_prog(q)
        .into_iter()
        .map(|a| a.labels.clone())
        .collect();
    if theirs.len() != atoms_of_prog(p).len() || p.unlabel() != q.unlabel() {
        return None;
    }
    let mut i = 0;
    Some(relabel_prog(p, &mut |a| {
        let mut l = a.labels.clone();
        l.extend(theirs[i].iter().cloned());
        i += 1;
        l
    }))
}

/// A reference into a formula tree.
#[derive(Clone, Copy, Debug)]
pub enum Node<'a> {
    F(&'a Fml),
    P(&'a Prog),
    A(&'a LAtom),
}

pub fn child<'a>(n: Node<'a>, i: usize) -> Option<Node<'a>> {
    match n {
        Node::F(f) => match (f, i) {
            (Fml::Not(a) | Fml::Forall(_, a) | Fml::Exists(_, a), 0) => Some(Node::F(a)),
            (Fml::And(a, _) | Fml::Or(a, _) | Fml::Imp(a, _) | Fml::Equiv(a, _), 0) => {
                Some(Node::F(a))
            }
            (Fml::And(_, b) | Fml::Or(_, b) | Fml::Imp(_, b) | Fml::Equiv(_, b), 1) => {
                Some(Node::F(b))
            }
            (Fml::Boxed(p, _) | Fml::Diamond(p, _), 0) => Some(Node::P(p)),
            (Fml::Boxed(_, a) | Fml::Diamond(_, a), 1) => Some(Node::F(a)),
            _ => None,
        },
        Node::P(p) => match (p, i) {
            (Prog::Test(f), 0) => Some(Node::F(f)),
            (Prog::Seq(a, _) | Prog::Choice(a, _), 0) => Some(Node::P(a)),
            (Prog::Seq(_, b) | Prog::Choice(_, b), 1) => Some(Node::P(b)),
            (Prog::Loop(a), 0) => Some(Node::P(a)),
            (Prog::Ode(ode), i) if i < ode.eqs.len() => Some(Node::A(&ode.eqs[i])),
            (Prog::Ode(ode), i) if i == ode.eqs.len() => ode.domain.as_deref().map(Node::F),
            _ => None,
        },
        Node::A(_) => None,
    }
}

pub fn children(n: Node<'_>) -> Vec<Node<'_>> {
    (0..)
        .map(|i| child(n, i))
        .take_while(Option::is_some)
        .flatten()
        .collect()
}

pub fn fml_at<'a>(f: &'a Fml, path: &[usize]) -> Option<&'a Fml> {
    let mut n = Node::F(f);
    for &i in path {
        n = child(n, i)?;
    }
    match n {
        Node::F(f) => Some(f),
        _ => None,
    }
}

/// Replaces the formula at `path`. Returns `None` if the path does not
/// address a formula.
pub fn replace_fml_at(f: &Fml, path: &[usize], new: Fml) -> Option<Fml> {
    let Some((&i, rest)) = path.split_first() else {
        return Some(new);
    };
    let rf = |a: &Fml| replace_fml_at(a, rest, new.clone()).map(Box::new);
    Some(match (f, i) {
        (Fml::Not(a), 0) => Fml::Not(rf(a)?),
        (Fml::Forall(x, a), 0) => Fml::Forall(x.clone(), rf(a)?),
        (Fml::Exists(x, a), 0) => Fml::Exists(x.clone(), rf(a)?),
        (Fml::And(a, b), 0) => Fml::And(rf(a)?, b.clone()),
        (Fml::And(a, b), 1) => Fml::And(a.clone(), rf(b)?),
        (Fml::Or(a, b), 0) => Fml::Or(rf(a)?, b.clone()),
        (Fml::Or(a, b), 1) => Fml::Or(a.clone(), rf(b)?),
        (Fml::Imp(a, b), 0) => Fml::Imp(rf(a)?, b.clone()),
        (Fml::Imp(a, b), 1) => Fml::Imp(a.clone(), rf(b)?),
        (Fml::Equiv(a, b), 0) => Fml::Equiv(rf(a)?, b.clone()),
        (Fml::Equiv(a, b), 1) => Fml::Equiv(a.clone(), rf(b)?),
        (Fml::Boxed(p, a), 0) => Fml::Boxed(Box::new(replace_in_prog(p, rest, new)?), a.clone()),
        (Fml::Boxed(p, a), 1) => Fml::Boxed(p.clone(), rf(a)?),
        (Fml::Diamond(p, a), 0) => {
            Fml::Diamond(Box::new(replace_in_prog(p, rest, new)?), a.clone())
        }
        (Fml::Diamond(p, a), 1) => Fml::Diamond(p.clone(), rf(a)?),
        _ => return None,
    })
}

fn replace_in_prog(p: &Prog, path: &[usize], new: Fml) -> Option<Prog> {
    let (&i, rest) = path.split_first()?;
    let rp = |a: &Prog| replace_in_prog(a, rest, new.clone()).map(Box::new);
    Some(match (p, i) {
        (Prog::Test(f), 0) => Prog::Test(Box::new(replace_fml_at(f, rest, new)?)),
        (Prog::Seq(a, b), 0) => Prog::Seq(rp(a)?, b.clone()),
        (Prog::Seq(a, b), 1) => Prog::Seq(a.clone(), rp(b)?),
        (Prog::Choice(a, b), 0) => Prog::Choice(rp(a)?, b.clone()),
        (Prog::Choice(a, b), 1) => Prog::Choice(a.clone(), rp(b)?),
        (Prog::Loop(a), 0) => Prog::Loop(rp(a)?),
        (Prog::Ode(ode), i) if i == ode.eqs.len() => {
            let q = ode.domain.as_ref()?;
            Prog::Ode(Ode {
                eqs: ode.eqs.clone(),
                domain: Some(Box::new(replace_fml_at(q, rest, new)?)),
            })
        }
        _ => return None,
    })
}

/// Pre-order list of formula positions (paths) within `f`.
pub fn fml_positions(f: &Fml) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    walk_positions(Node::F(f), &mut Vec::new(), &mut out);
    out
}

fn walk_positions(n: Node<'_>, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if let Node::F(_) = n {
        out.push(cur.clone());
    }
    for (i, c) in children(n).into_iter().enumerate() {
        cur.push(i);
        walk_positions(c, cur, out);
        cur.pop();
    }
}
