use super::ast::*;
use super::visit::{atoms_of, relabel_fml};
use std::collections::HashSet;

/// Hands out labels with names no other label of the same run uses.
///
/// Unannotated model atoms are named `l1, l2, …`; labels introduced by
/// proof rules are named `u1, u2, …`. Names already taken are skipped.
#[derive(Clone, Debug, Default)]
pub struct LabelAllocator {
    used: HashSet<String>,
    next_model: u32,
    next_fresh: u32,
}

impl LabelAllocator {
    pub fn new() -> Self {
        Self::default()
    }

    /// Marks `name` as taken. Returns false if it already was.
    pub fn reserve(&mut self, name: &str) -> bool {
        self.used.insert(name.to_string())
    }

    pub fn is_used(&self, name: &str) -> bool {
        self.used.contains(name)
    }

    pub fn model(&mut self) -> Label {
        loop {
            self.next_model += 1;
            let name = format!("l{}", self.next_model);
            if self.reserve(&name) {
                return Label::new(&name, Origin::Model);
            }
        }
    }

    pub fn fresh(&mut self) -> Label {
        loop {
            self.next_fresh += 1;
            let name = format!("u{}", self.next_fresh);
            if self.reserve(&name) {
                return Label::new(&name, Origin::Fresh);
            }
        }
    }

    /// Reserves every label occurring in `f`.
    pub fn reserve_all(&mut self, f: &Fml) {
        for a in atoms_of(f) {
            for l in &a.labels {
                self.reserve(l.name());
            }
        }
    }
}

/// Gives each unlabeled atom of `f` a new model label, in pre-order.
pub fn assign_missing(f: &Fml, alloc: &mut LabelAllocator) -> Fml {
    relabel_fml(f, &mut |a| {
        if a.labels.is_empty() {
            vec![alloc.model()]
        } else {
            a.labels.clone()
        }
    })
}

/// Labels every atom of `f` with a distinct fresh model label, ignoring any
/// labels it already carries.
pub fn assign_labels(f: &Fml, alloc: &mut LabelAllocator) -> Fml {
    relabel_fml(f, &mut |_| vec![alloc.model()])
}

/// Labels a cut formula against its context.
///
/// An atom syntactically equal to one or more context atoms takes all of
/// their labels; any other atom gets a fresh label. Returns the labeled
/// formula and the fresh labels, in pre-order.
pub fn resolve_phi(cut: &Fml, context: &[Fml], alloc: &mut LabelAllocator) -> (Fml, Vec<Label>) {
    let ctx: Vec<&LAtom> = context.iter().flat_map(atoms_of).collect();
    let mut fresh = Vec::new();
    let f = relabel_fml(cut, &mut |a| {
        let mut hits: Vec<Label> = ctx
            .iter()
            .filter(|c| syntactically_equal(&c.atom, &a.atom))
            .flat_map(|c| c.labels.iter().cloned())
            .collect();
        if hits.is_empty() {
            let l = alloc.fresh();
            fresh.push(l.clone());
            hits.push(l);
        }
        hits
    });
    (f, fresh)
}

/// Labels every atom of `f` with fresh labels.
pub fn label_fresh(f: &Fml, alloc: &mut LabelAllocator) -> (Fml, Vec<Label>) {
    resolve_phi(f, &[], alloc)
}

/// Structural equality of atoms. Constants are kept reduced, so this is
/// plain equality; no arithmetic normalisation takes place.
pub fn syntactically_equal(a: &Atom, b: &Atom) -> bool {
    a == b
}
