//! The parachute case study: model, script, provider and fixture.

use std::path::PathBuf;
use uadl_core::calculus::{check_proof, parse_script_str, AnnotatedProof, Mode, ProofNode};
use uadl_core::labelsets::{MutationKind, MutationSet, TrackedLabelSet};
use uadl_core::mutation::DefaultProvider;
use uadl_core::oracle::{FixtureOracle, Oracle, RecordedDa, Verdict};
use uadl_core::syntax::visit::sequent_labels;
use uadl_core::syntax::{parse_model, Fml, Label, Origin, Sequent};

pub fn corpus() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

fn read(name: &str) -> String {
    std::fs::read_to_string(corpus().join(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

pub fn model() -> Fml {
    parse_model(&read("parachute.dl")).expect("model parses").0
}

pub fn script() -> ProofNode {
    parse_script_str(&read("parachute.prf")).expect("script parses")
}

pub fn provider() -> DefaultProvider {
    let v: serde_json::Value = serde_json::from_str(&read("parachute.provider.json")).unwrap();
    DefaultProvider::from_json(&v).unwrap()
}

pub fn fixture() -> FixtureOracle {
    FixtureOracle::from_json_str(&read("parachute.fx")).expect("fixture loads")
}

pub fn label(name: &str) -> Label {
    let origin = if name.starts_with('u') { Origin::Fresh } else { Origin::Model };
    Label::new(name, origin)
}

/// Expected root set: the listed labels are pinned to id, the rest allow anything.
pub const OMEGA_ID: &[&str] = &["k", "o2", "o3", "n", "i7", "i5", "i6", "p2", "p3", "q1", "q2"];
pub const OMEGA_ANY: &[&str] = &["j", "l", "o1", "m", "p1", "i1", "i2", "i3", "i4", "i8"];

pub fn omega() -> TrackedLabelSet {
    let mut groups: Vec<(Vec<Label>, MutationSet)> = Vec::new();
    groups.extend(OMEGA_ID.iter().map(|l| (vec![label(l)], MutationSet::ID)));
    groups.extend(OMEGA_ANY.iter().map(|l| (vec![label(l)], MutationSet::ANY)));
    TrackedLabelSet::from_groups(groups).unwrap()
}

/// Per arithmetic leaf, in pre-order: labels kept at id, labels allowing id or W.
/// Everything else in the leaf is unconstrained.
pub const LEAF_TABLE: &[(&[&str], &[&str])] = &[
    // initial state implies the old invariant
    (&["i5", "i6", "i7"], &[]),
    // initial state implies the cut
    (&["i5"], &[]),
    // invariant implies the postcondition
    (&["i7", "q1", "q2"], &[]),
    // first branch: differential cut holds initially
    (&["n", "u2", "u3"], &[]),
    // first branch: its derivative
    (&["k", "u3"], &[]),
    // first branch: speed bound from the cut and the domain
    (&["i7", "u2", "u3"], &[]),
    // first branch: x > -1 from the domain
    (&[], &["p2"]),
    // second branch: ghost invariant initially
    (&["u4", "u6"], &[]),
    // second branch: its derivative
    (&["u6"], &[]),
    // second branch: speed bound from the ghost invariant
    (&["i7", "u6"], &[]),
    // second branch: x > -1 from the domain
    (&[], &["p2"]),
];

/// Accepts every leaf, only to expose the tree shape.
struct Permissive;

impl Oracle for Permissive {
    fn decide(&self, _s: &Sequent) -> Verdict {
        Verdict::Valid
    }
    fn recorded_da(&self, _s: &Sequent) -> Option<RecordedDa> {
        Some(RecordedDa::new())
    }
}

pub fn oracle_leaves(p: &AnnotatedProof) -> Vec<Sequent> {
    let mut out = Vec::new();
    p.root.walk(&mut |n| {
        if n.leaf.as_ref().is_some_and(|l| l.verdict != "axiom") && n.children.is_empty() && n.rule != "id" {
            out.push(n.goal.clone());
        }
    });
    out
}

/// Rebuilds the fixture from the script and [`LEAF_TABLE`].
pub fn build_fixture() -> FixtureOracle {
    let shape = check_proof(&model(), &script(), &TrackedLabelSet::new(), &Permissive, &provider(), Mode::Parallel)
        .expect("script applies");
    let leaves = oracle_leaves(&shape);
    assert_eq!(leaves.len(), LEAF_TABLE.len(), "leaf count changed");
    let mut fx = FixtureOracle::new();
    for (goal, (ids, ws)) in leaves.iter().zip(LEAF_TABLE) {
        let mut da = RecordedDa::new();
        for l in sequent_labels(goal) {
            let kinds = if ids.contains(&l.name()) {
                vec![MutationKind::Id]
            } else if ws.contains(&l.name()) {
                vec![MutationKind::Id, MutationKind::W]
            } else {
                MutationKind::ALL.to_vec()
            };
            da.insert(l.name().to_string(), kinds);
        }
        for l in ids.iter().chain(ws.iter()) {
            assert!(da.contains_key(*l), "{l} does not occur in its leaf");
        }
        fx.insert(goal, Verdict::Valid, Some(da));
    }
    fx
}

pub fn check_with(oracle: &dyn Oracle, chi: &TrackedLabelSet, mode: Mode) -> AnnotatedProof {
    check_proof(&model(), &script(), chi, oracle, &provider(), mode).unwrap_or_else(|e| panic!("{e}"))
}

/// Equality up to fusion classes that cannot change the admitted choices:
/// same labels, same per-label sets, and every nontrivial class single-kind.
pub fn same_choices(a: &TrackedLabelSet, b: &TrackedLabelSet) -> bool {
    let single = |t: &TrackedLabelSet| t.classes().all(|(m, s)| m.len() == 1 || s.len() == 1);
    a.label_set() == b.label_set()
        && a.labels().all(|l| a.lookup(l) == b.lookup(l))
        && single(a)
        && single(b)
}
