//! Dynamic analysis: a sound mutation set for a closed arithmetic leaf.

use super::{Oracle, Verdict};
use crate::labelsets::{MutationChoice, MutationKind, MutationSet, TrackedLabelSet};
use crate::mutation::{apply_sequent, weakening_is_identity, WeakeningProvider};
use crate::syntax::visit::{atoms_of, sequent_groups, sequent_labels};
use crate::syntax::{Atom, Label, Sequent};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::collections::{BTreeMap, BTreeSet, HashMap};

/// Above this many joint choices, only a random sample is verified.
pub const JOINT_CAP: u128 = 59_049; // 3^10
pub const JOINT_SAMPLES: usize = 1000;

#[derive(Clone, Debug, Default, PartialEq)]
pub struct DaResult {
    pub set: TrackedLabelSet,
    /// Replacement selected for each label whose W passed.
    pub witnesses: BTreeMap<Label, Atom>,
    /// Whether some query came back Unknown and was treated as failed.
    pub degraded: bool,
}

/// Offers a pinned replacement first for selected atoms.
struct Pinned<'a> {
    pins: HashMap<Atom, Atom>,
    inner: &'a dyn WeakeningProvider,
}

impl WeakeningProvider for Pinned<'_> {
    fn candidates(&self, atom: &Atom) -> Vec<Atom> {
        let mut out = Vec::new();
        if let Some(p) = self.pins.get(atom) {
            out.push(p.clone());
        }
        out.extend(self.inner.candidates(atom));
        out
    }
}

struct Ctx<'a> {
    goal: &'a Sequent,
    oracle: &'a dyn Oracle,
    provider: &'a dyn WeakeningProvider,
}

impl Ctx<'_> {
    /// `Some(true)` valid, `Some(false)` refuted or inapplicable, `None` unknown.
    fn holds(&self, choice: &MutationChoice, pins: &HashMap<Atom, Atom>) -> Option<bool> {
        let p = Pinned {
            pins: pins.clone(),
            inner: self.provider,
        };
        let Ok(m) = apply_sequent(choice, self.goal, &p) else {
            return Some(false);
        };
        match self.oracle.decide(&m) {
            Verdict::Valid => Some(true),
            Verdict::Invalid(_) => Some(false),
            Verdict::Unknown(_) => None,
        }
    }
}

fn choice_for(members: &BTreeSet<Label>, k: MutationKind) -> MutationChoice {
    MutationChoice::from_pairs(members.iter().map(|l| (l.clone(), k)))
}

/// Computes DA for `goal`, narrowing (never widening) what `chi` allows.
pub fn dynamic_analysis(
    goal: &Sequent,
    chi: &TrackedLabelSet,
    oracle: &dyn Oracle,
    provider: &dyn WeakeningProvider,
) -> DaResult {
    let labels = sequent_labels(goal);
    let mut groups: Vec<(Vec<Label>, MutationSet)> =
        labels.iter().map(|l| (vec![l.clone()], MutationSet::ANY)).collect();
    groups.extend(sequent_groups(goal).into_iter().map(|g| (g, MutationSet::ANY)));
    for (members, set) in chi.restrict(&labels).classes() {
        groups.push((members.iter().cloned().collect(), set.with(MutationKind::Id)));
    }
    let base = TrackedLabelSet::from_groups(groups).expect("id is always allowed");

    // atoms carrying each label, in order
    let mut atoms_by_label: BTreeMap<Label, Vec<Atom>> = BTreeMap::new();
    for f in goal.ante.iter().chain(goal.succ.iter()) {
        for a in atoms_of(f) {
            for l in &a.labels {
                atoms_by_label.entry(l.clone()).or_default().push(a.atom.clone());
            }
        }
    }
    let first_candidate = |l: &Label| -> Option<Atom> {
        let a = atoms_by_label.get(l)?.first()?;
        provider.candidates(a).into_iter().next()
    };

    if let Some(recorded) = oracle.recorded_da(goal) {
        let mut groups: Vec<(Vec<Label>, MutationSet)> = base
            .classes()
            .map(|(m, s)| (m.iter().cloned().collect(), s))
            .collect();
        for l in &labels {
            let set = match recorded.get(l.name()) {
                Some(ks) => MutationSet::of(ks).with(MutationKind::Id),
                None => MutationSet::ID,
            };
            groups.push((vec![l.clone()], set));
        }
        let set = TrackedLabelSet::from_groups(groups).expect("id is always allowed");
        let witnesses = labels
            .iter()
            .filter(|l| set.lookup(l).is_some_and(|s| s.contains(MutationKind::W)))
            .filter_map(|l| first_candidate(l).map(|w| (l.clone(), w)))
            .collect();
        return DaResult {
            set,
            witnesses,
            degraded: false,
        };
    }

    let ctx = Ctx {
        goal,
        oracle,
        provider,
    };
    let mut degraded = false;
    let classes: Vec<(BTreeSet<Label>, MutationSet)> =
        base.classes().map(|(m, s)| (m.clone(), s)).collect();
    let mut sets: Vec<MutationSet> = Vec::new();
    // pins realizing each class's W
    let mut class_pins: Vec<HashMap<Atom, Atom>> = Vec::new();
    let mut witnesses = BTreeMap::new();

    for (members, allowed) in &classes {
        let mut set = MutationSet::ID;
        let mut pins = HashMap::new();
        if allowed.contains(MutationKind::R) {
            match ctx.holds(&choice_for(members, MutationKind::R), &HashMap::new()) {
                Some(true) => set = set.with(MutationKind::R),
                Some(false) => {}
                None => degraded = true,
            }
        }
        if allowed.contains(MutationKind::W) {
            let member_atoms: Vec<&Atom> = members
                .iter()
                .flat_map(|l| atoms_by_label.get(l).into_iter().flatten())
                .collect();
            let effective: Vec<&Atom> = member_atoms
                .iter()
                .copied()
                .filter(|a| !weakening_is_identity(a))
                .collect();
            if effective.is_empty() {
                // W leaves these atoms unchanged
                set = set.with(MutationKind::W);
            } else {
                let cands: Vec<Vec<Atom>> = effective.iter().map(|a| provider.candidates(a)).collect();
                let rounds = cands.iter().map(Vec::len).max().unwrap_or(0);
                if cands.iter().all(|c| !c.is_empty()) {
                    for j in 0..rounds {
                        let trial: HashMap<Atom, Atom> = effective
                            .iter()
                            .zip(&cands)
                            .map(|(a, c)| ((*a).clone(), c[j.min(c.len() - 1)].clone()))
                            .collect();
                        match ctx.holds(&choice_for(members, MutationKind::W), &trial) {
                            Some(true) => {
                                for l in members {
                                    if let Some(a) = atoms_by_label.get(l).and_then(|v| v.first()) {
                                        if let Some(w) = trial.get(a) {
                                            witnesses.insert(l.clone(), w.clone());
                                        }
                                    }
                                }
                                pins = trial;
                                set = set.with(MutationKind::W);
                                break;
                            }
                            Some(false) => {}
                            None => degraded = true,
                        }
                    }
                }
            }
        }
        sets.push(set);
        class_pins.push(pins);
    }

    // joint verification and pruning
    let count: u128 = sets.iter().map(|s| s.len() as u128).product();
    if count > 1 {
        let kinds: Vec<Vec<MutationKind>> = sets.iter().map(|s| s.kinds()).collect();
        let picks: Vec<Vec<usize>> = if count <= JOINT_CAP {
            let mut all = Vec::new();
            let mut cur = vec![0usize; kinds.len()];
            loop {
                all.push(cur.clone());
                let mut i = 0;
                while i < cur.len() {
                    cur[i] += 1;
                    if cur[i] < kinds[i].len() {
                        break;
                    }
                    cur[i] = 0;
                    i += 1;
                }
                if i == cur.len() {
                    break;
                }
            }
            all
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(super::canonical_hash(goal).len() as u64 ^ count as u64);
            (0..JOINT_SAMPLES)
                .map(|_| kinds.iter().map(|k| rng.gen_range(0..k.len())).collect())
                .collect()
        };
        let failures: Vec<(Vec<MutationKind>, bool)> = picks
            .par_iter()
            .filter_map(|pick| {
                let ks: Vec<MutationKind> = pick.iter().zip(&kinds).map(|(i, k)| k[*i]).collect();
                // single-class choices were already tested
                if ks.iter().filter(|k| **k != MutationKind::Id).count() <= 1 {
                    return None;
                }
                let mut choice = MutationChoice::new();
                let mut pins = HashMap::new();
                for (ci, k) in ks.iter().enumerate() {
                    for l in &classes[ci].0 {
                        choice.set(l.clone(), *k);
                    }
                    if *k == MutationKind::W {
                        pins.extend(class_pins[ci].iter().map(|(a, b)| (a.clone(), b.clone())));
                    }
                }
                match ctx.holds(&choice, &pins) {
                    Some(true) => None,
                    Some(false) => Some((ks, false)),
                    None => Some((ks, true)),
                }
            })
            .collect();
        degraded |= failures.iter().any(|(_, unknown)| *unknown);
        let mut failing: Vec<Vec<MutationKind>> = failures.into_iter().map(|(k, _)| k).collect();
        while !failing.is_empty() {
            let mut freq: BTreeMap<(usize, std::cmp::Reverse<MutationKind>), usize> = BTreeMap::new();
            for ks in &failing {
                for (ci, k) in ks.iter().enumerate() {
                    if *k != MutationKind::Id {
                        *freq.entry((ci, std::cmp::Reverse(*k))).or_default() += 1;
                    }
                }
            }
            let (&(ci, std::cmp::Reverse(k)), _) = freq
                .iter()
                .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(a.0)))
                .expect("failing choices are not all-id");
            sets[ci] = sets[ci].without(k);
            failing.retain(|ks| ks[ci] != k);
        }
    }

    let set = TrackedLabelSet::from_groups(
        classes
            .iter()
            .zip(&sets)
            .map(|((m, _), s)| (m.iter().cloned().collect(), *s)),
    )
    .expect("id is always allowed");
    witnesses.retain(|l, _| set.lookup(l).is_some_and(|s| s.contains(MutationKind::W)));
    DaResult {
        set,
        witnesses,
        degraded,
    }
}
