//! Label-set algebra: mutation sets, fusion classes, merge and difference.

use crate::syntax::{parse_atom, print_atom, Atom, Label, Origin};
use serde_json::{json, Map, Value};
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MutationKind {
    Id,
    W,
    R,
}

impl MutationKind {
    pub const ALL: [MutationKind; 3] = [MutationKind::Id, MutationKind::W, MutationKind::R];

    pub fn as_str(self) -> &'static str {
        match self {
            MutationKind::Id => "id",
            MutationKind::W => "W",
            MutationKind::R => "R",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "id" => Some(MutationKind::Id),
            "W" | "w" => Some(MutationKind::W),
            "R" | "r" => Some(MutationKind::R),
            _ => None,
        }
    }

    fn bit(self) -> u8 {
        match self {
            MutationKind::Id => 1,
            MutationKind::W => 2,
            MutationKind::R => 4,
        }
    }
}

impl fmt::Display for MutationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A subset of {id, W, R}.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub struct MutationSet(u8);

impl MutationSet {
    pub const EMPTY: MutationSet = MutationSet(0);
    pub const ID: MutationSet = MutationSet(1);
    pub const ID_W: MutationSet = MutationSet(3);
    pub const ID_R: MutationSet = MutationSet(5);
    pub const ANY: MutationSet = MutationSet(7);

    pub fn of(kinds: &[MutationKind]) -> Self {
        MutationSet(kinds.iter().fold(0, |acc, k| acc | k.bit()))
    }

    pub fn contains(self, k: MutationKind) -> bool {
        self.0 & k.bit() != 0
    }

    pub fn with(self, k: MutationKind) -> Self {
        MutationSet(self.0 | k.bit())
    }

    pub fn without(self, k: MutationKind) -> Self {
        MutationSet(self.0 & !k.bit())
    }

    pub fn intersect(self, other: Self) -> Self {
        MutationSet(self.0 & other.0)
    }

    pub fn union(self, other: Self) -> Self {
        MutationSet(self.0 | other.0)
    }

    pub fn is_subset(self, other: Self) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn kinds(self) -> Vec<MutationKind> {
        MutationKind::ALL
            .into_iter()
            .filter(|k| self.contains(*k))
            .collect()
    }

    pub fn bits(self) -> u8 {
        self.0
    }

    pub fn from_bits(b: u8) -> Self {
        MutationSet(b & 7)
    }
}

impl fmt::Display for MutationSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if *self == MutationSet::ANY {
            return f.write_str("any");
        }
        let ks: Vec<&str> = self.kinds().into_iter().map(MutationKind::as_str).collect();
        write!(f, "{{{}}}", ks.join(","))
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LabelSetError {
    #[error("merge conflict: fusion class {{{}}} has no common mutation", .0.join(","))]
    Conflict(Vec<String>),
    #[error("malformed label-set JSON: {0}")]
    Json(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
struct Class {
    members: BTreeSet<Label>,
    set: MutationSet,
}

/// A map from labels to mutation sets in which fused labels share one set.
///
/// Kept in a canonical form (classes ordered by their smallest member), so
/// structural equality is semantic equality.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TrackedLabelSet {
    class_of: BTreeMap<Label, usize>,
    classes: Vec<Class>,
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, i: usize) -> usize {
        let mut r = i;
        while self.parent[r] != r {
            r = self.parent[r];
        }
        let mut i = i;
        while self.parent[i] != r {
            let next = self.parent[i];
            self.parent[i] = r;
            i = next;
        }
        r
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }
}

impl TrackedLabelSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a set from groups; groups sharing a label are fused and their
    /// sets intersected.
    pub fn from_groups<I>(groups: I) -> Result<Self, LabelSetError>
    where
        I: IntoIterator<Item = (Vec<Label>, MutationSet)>,
    {
        let groups: Vec<(Vec<Label>, MutationSet)> =
            groups.into_iter().filter(|(g, _)| !g.is_empty()).collect();
        let mut index: HashMap<&Label, usize> = HashMap::new();
        let mut uf = UnionFind::new(groups.len());
        for (gi, (g, _)) in groups.iter().enumerate() {
            for l in g {
                match index.get(l) {
                    Some(&other) => uf.union(gi, other),
                    None => {
                        index.insert(l, gi);
                    }
                }
            }
        }
        let mut comps: BTreeMap<usize, Class> = BTreeMap::new();
        for (gi, (g, set)) in groups.iter().enumerate() {
            let root = uf.find(gi);
            let c = comps.entry(root).or_insert(Class {
                members: BTreeSet::new(),
                set: MutationSet::ANY,
            });
            c.members.extend(g.iter().cloned());
            c.set = c.set.intersect(*set);
        }
        let mut classes: Vec<Class> = comps.into_values().collect();
        if let Some(c) = classes.iter().find(|c| c.set.is_empty()) {
            return Err(LabelSetError::Conflict(
                c.members.iter().map(|l| l.name().to_string()).collect(),
            ));
        }
        classes.sort_by(|a, b| a.members.first().cmp(&b.members.first()));
        let mut class_of = BTreeMap::new();
        for (i, c) in classes.iter().enumerate() {
            for l in &c.members {
                class_of.insert(l.clone(), i);
            }
        }
        Ok(TrackedLabelSet { class_of, classes })
    }

    fn groups(&self) -> impl Iterator<Item = (Vec<Label>, MutationSet)> + '_ {
        self.classes
            .iter()
            .map(|c| (c.members.iter().cloned().collect(), c.set))
    }

    pub fn singleton(l: Label, set: MutationSet) -> Self {
        Self::from_groups([(vec![l], set)]).expect("non-empty set")
    }

    /// Every label in `labels` with `set`, no fusion.
    pub fn uniform<I: IntoIterator<Item = Label>>(labels: I, set: MutationSet) -> Self {
        Self::from_groups(labels.into_iter().map(|l| (vec![l], set))).expect("uniform set")
    }

    /// The ⊔ of two sets.
    pub fn merge(&self, other: &Self) -> Result<Self, LabelSetError> {
        Self::from_groups(self.groups().chain(other.groups()))
    }

    pub fn merge_all<'a, I: IntoIterator<Item = &'a TrackedLabelSet>>(
        sets: I,
    ) -> Result<Self, LabelSetError> {
        let mut groups = Vec::new();
        for s in sets {
            groups.extend(s.groups());
        }
        Self::from_groups(groups)
    }

    /// Removes the given labels. Classes lose only the dropped members.
    pub fn diff(&self, dropped: &BTreeSet<Label>) -> Self {
        let groups = self.groups().map(|(g, s)| {
            (
                g.into_iter().filter(|l| !dropped.contains(l)).collect(),
                s,
            )
        });
        Self::from_groups(groups).expect("diff keeps sets non-empty")
    }

    /// Keeps only the given labels.
    pub fn restrict(&self, keep: &BTreeSet<Label>) -> Self {
        let groups = self
            .groups()
            .map(|(g, s)| (g.into_iter().filter(|l| keep.contains(l)).collect(), s));
        Self::from_groups(groups).expect("restrict keeps sets non-empty")
    }

    pub fn lookup(&self, l: &Label) -> Option<MutationSet> {
        self.class_of.get(l).map(|&i| self.classes[i].set)
    }

    pub fn contains(&self, l: &Label) -> bool {
        self.class_of.contains_key(l)
    }

    /// Other members of `l`'s fusion class.
    pub fn partners(&self, l: &Label) -> Vec<Label> {
        match self.class_of.get(l) {
            Some(&i) => self.classes[i]
                .members
                .iter()
                .filter(|m| *m != l)
                .cloned()
                .collect(),
            None => Vec::new(),
        }
    }

    pub fn labels(&self) -> impl Iterator<Item = &Label> {
        self.class_of.keys()
    }

    pub fn label_set(&self) -> BTreeSet<Label> {
        self.class_of.keys().cloned().collect()
    }

    pub fn len(&self) -> usize {
        self.class_of.len()
    }

    pub fn is_empty(&self) -> bool {
        self.class_of.is_empty()
    }

    pub fn classes(&self) -> impl Iterator<Item = (&BTreeSet<Label>, MutationSet)> {
        self.classes.iter().map(|c| (&c.members, c.set))
    }

    /// Number of choices `enumerate_choices` yields.
    pub fn choice_count(&self) -> u128 {
        self.classes.iter().map(|c| c.set.len() as u128).product()
    }

    /// All choices: one kind per fusion class, shared by its members.
    pub fn enumerate_choices(&self) -> ChoiceIter<'_> {
        ChoiceIter {
            set: self,
            kinds: self.classes.iter().map(|c| c.set.kinds()).collect(),
            counter: vec![0; self.classes.len()],
            done: false,
        }
    }

    /// The choice picking `pick(i)` for class `i`.
    pub fn choice_from(&self, pick: &mut dyn FnMut(usize, &[MutationKind]) -> MutationKind) -> MutationChoice {
        let mut kinds = BTreeMap::new();
        for (i, c) in self.classes.iter().enumerate() {
            let k = pick(i, &c.set.kinds());
            for l in &c.members {
                kinds.insert(l.clone(), k);
            }
        }
        MutationChoice {
            kinds,
            witnesses: BTreeMap::new(),
        }
    }

    /// Whether `choice` respects the set: every label's kind is admitted
    /// and fused members agree. Labels absent from the choice count as id.
    pub fn admits(&self, choice: &MutationChoice) -> bool {
        for (l, k) in &choice.kinds {
            if *k != MutationKind::Id && !self.contains(l) {
                return false;
            }
        }
        self.classes.iter().all(|c| {
            let ks: BTreeSet<MutationKind> = c
                .members
                .iter()
                .map(|l| choice.kind(l))
                .collect();
            ks.len() == 1 && c.set.contains(*ks.iter().next().unwrap())
        })
    }

    pub fn to_json(&self) -> Value {
        let mut labels = Map::new();
        for (l, &i) in &self.class_of {
            let c = &self.classes[i];
            let muts: Vec<&str> = c.set.kinds().into_iter().map(MutationKind::as_str).collect();
            let fused: Vec<&str> = c
                .members
                .iter()
                .filter(|m| *m != l)
                .map(Label::name)
                .collect();
            labels.insert(
                l.name().to_string(),
                json!({"mutations": muts, "fused_with": fused}),
            );
        }
        json!({ "labels": labels })
    }

    pub fn from_json(v: &Value) -> Result<Self, LabelSetError> {
        let bad = |m: &str| LabelSetError::Json(m.to_string());
        let labels = v
            .get("labels")
            .and_then(Value::as_object)
            .ok_or_else(|| bad("missing \"labels\" object"))?;
        let mut groups = Vec::new();
        let mut declared: BTreeMap<Label, MutationSet> = BTreeMap::new();
        for (name, entry) in labels {
            let label = Label::new(name, origin_of(name));
            let muts = entry
                .get("mutations")
                .and_then(Value::as_array)
                .ok_or_else(|| bad("entry without \"mutations\""))?;
            let mut set = MutationSet::EMPTY;
            for m in muts {
                let k = m
                    .as_str()
                    .and_then(MutationKind::parse)
                    .ok_or_else(|| bad("unknown mutation kind"))?;
                set = set.with(k);
            }
            if set.is_empty() {
                return Err(bad("empty mutation set"));
            }
            let mut group = vec![label.clone()];
            if let Some(fused) = entry.get("fused_with").and_then(Value::as_array) {
                for f in fused {
                    let n = f.as_str().ok_or_else(|| bad("fused_with must list names"))?;
                    group.push(Label::new(n, origin_of(n)));
                }
            }
            declared.insert(label, set);
            groups.push((group, set));
        }
        let out = Self::from_groups(groups)?;
        for (l, set) in declared {
            if out.lookup(&l) != Some(set) {
                return Err(LabelSetError::Json(format!(
                    "fusion class of {l} lists different mutation sets"
                )));
            }
        }
        Ok(out)
    }
}

fn origin_of(name: &str) -> Origin {
    let fresh = name.len() > 1
        && name.starts_with('u')
        && name[1..].chars().all(|c| c.is_ascii_digit());
    if fresh {
        Origin::Fresh
    } else {
        Origin::Model
    }
}

impl fmt::Display for TrackedLabelSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .classes
            .iter()
            .map(|c| {
                let names: Vec<&str> = c.members.iter().map(Label::name).collect();
                let head = if names.len() == 1 {
                    names[0].to_string()
                } else {
                    format!("<{}>", names.join("^"))
                };
                format!("{head}:{}", c.set)
            })
            .collect();
        write!(f, "{{{}}}", parts.join(", "))
    }
}

pub struct ChoiceIter<'a> {
    set: &'a TrackedLabelSet,
    kinds: Vec<Vec<MutationKind>>,
    counter: Vec<usize>,
    done: bool,
}

impl Iterator for ChoiceIter<'_> {
    type Item = MutationChoice;

    fn next(&mut self) -> Option<MutationChoice> {
        if self.done {
            return None;
        }
        let counter = self.counter.clone();
        let choice = self.set.choice_from(&mut |i, _| self.kinds[i][counter[i]]);
        // advance the mixed-radix counter, last class fastest
        let mut i = self.counter.len();
        loop {
            if i == 0 {
                self.done = true;
                break;
            }
            i -= 1;
            self.counter[i] += 1;
            if self.counter[i] < self.kinds[i].len() {
                break;
            }
            self.counter[i] = 0;
        }
        Some(choice)
    }
}

/// An assignment of mutation kinds to labels, with the W replacements.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct MutationChoice {
    pub kinds: BTreeMap<Label, MutationKind>,
    pub witnesses: BTreeMap<Label, Atom>,
}

impl MutationChoice {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_pairs<I: IntoIterator<Item = (Label, MutationKind)>>(pairs: I) -> Self {
        MutationChoice {
            kinds: pairs.into_iter().collect(),
            witnesses: BTreeMap::new(),
        }
    }

    /// Kind of `l`; labels not mentioned are left alone.
    pub fn kind(&self, l: &Label) -> MutationKind {
        self.kinds.get(l).copied().unwrap_or(MutationKind::Id)
    }

    pub fn get(&self, l: &Label) -> Option<MutationKind> {
        self.kinds.get(l).copied()
    }

    pub fn set(&mut self, l: Label, k: MutationKind) {
        self.kinds.insert(l, k);
    }

    pub fn is_identity(&self) -> bool {
        self.kinds.values().all(|k| *k == MutationKind::Id)
    }

    /// Non-id entries only.
    pub fn active(&self) -> BTreeMap<Label, MutationKind> {
        self.kinds
            .iter()
            .filter(|(_, k)| **k != MutationKind::Id)
            .map(|(l, k)| (l.clone(), *k))
            .collect()
    }

    pub fn union(&self, other: &MutationChoice) -> MutationChoice {
        let mut out = self.clone();
        out.kinds.extend(other.kinds.iter().map(|(l, k)| (l.clone(), *k)));
        out.witnesses
            .extend(other.witnesses.iter().map(|(l, a)| (l.clone(), a.clone())));
        out
    }

    pub fn restrict(&self, keep: &BTreeSet<Label>) -> MutationChoice {
        MutationChoice {
            kinds: self
                .kinds
                .iter()
                .filter(|(l, _)| keep.contains(*l))
                .map(|(l, k)| (l.clone(), *k))
                .collect(),
            witnesses: self
                .witnesses
                .iter()
                .filter(|(l, _)| keep.contains(*l))
                .map(|(l, a)| (l.clone(), a.clone()))
                .collect(),
        }
    }

    pub fn to_json(&self) -> Value {
        let choice: Map<String, Value> = self
            .kinds
            .iter()
            .map(|(l, k)| (l.name().to_string(), json!(k.as_str())))
            .collect();
        let witnesses: Map<String, Value> = self
            .witnesses
            .iter()
            .map(|(l, a)| (l.name().to_string(), json!(print_atom(a))))
            .collect();
        json!({"choice": choice, "witnesses": witnesses})
    }

    pub fn from_json(v: &Value) -> Result<Self, LabelSetError> {
        let bad = |m: String| LabelSetError::Json(m);
        let choice = v
            .get("choice")
            .and_then(Value::as_object)
            .ok_or_else(|| bad("missing \"choice\" object".into()))?;
        let mut out = MutationChoice::new();
        for (name, k) in choice {
            let kind = k
                .as_str()
                .and_then(MutationKind::parse)
                .ok_or_else(|| bad(format!("bad kind for {name}")))?;
            out.set(Label::new(name, origin_of(name)), kind);
        }
        if let Some(w) = v.get("witnesses").and_then(Value::as_object) {
            for (name, text) in w {
                let text = text
                    .as_str()
                    .ok_or_else(|| bad(format!("witness for {name} must be text")))?;
                let atom = parse_atom(text).map_err(|e| bad(format!("witness for {name}: {e}")))?;
                out.witnesses.insert(Label::new(name, origin_of(name)), atom);
            }
        }
        Ok(out)
    }
}

impl fmt::Display for MutationChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .kinds
            .iter()
            .map(|(l, k)| format!("{l}:{k}"))
            .collect();
        write!(f, "{{{}}}", parts.join(", "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use MutationKind::*;

    fn l(n: &str) -> Label {
        Label::new(n, Origin::Model)
    }

    fn set(entries: &[(&str, MutationSet)]) -> TrackedLabelSet {
        TrackedLabelSet::from_groups(entries.iter().map(|(n, s)| (vec![l(n)], *s))).unwrap()
    }

    #[test]
    fn merge_example() {
        let a = set(&[
            ("l", MutationSet::ID),
            ("m", MutationSet::ANY),
            ("n", MutationSet::ID_W),
        ]);
        let b = set(&[
            ("l", MutationSet::ANY),
            ("m", MutationSet::ID),
            ("o", MutationSet::ANY),
        ]);
        let want = set(&[
            ("l", MutationSet::ID),
            ("m", MutationSet::ID),
            ("n", MutationSet::ID_W),
            ("o", MutationSet::ANY),
        ]);
        assert_eq!(a.merge(&b).unwrap(), want);
    }

    #[test]
    fn empty_is_identity() {
        let a = set(&[("l", MutationSet::ID_R)]);
        assert_eq!(TrackedLabelSet::new().merge(&a).unwrap(), a);
    }

    #[test]
    fn fused_class_narrows() {
        let ab = TrackedLabelSet::from_groups([(vec![l("a"), l("b")], MutationSet::ANY)]).unwrap();
        let m = ab.merge(&set(&[("a", MutationSet::ID)])).unwrap();
        assert_eq!(m.lookup(&l("b")), Some(MutationSet::ID));
        assert_eq!(m.partners(&l("a")), vec![l("b")]);
        assert_eq!(m.enumerate_choices().count(), 1);
    }

    #[test]
    fn conflict_is_reported() {
        let a = set(&[("a", MutationSet::of(&[W]))]);
        let b = set(&[("a", MutationSet::of(&[R]))]);
        assert!(matches!(a.merge(&b), Err(LabelSetError::Conflict(_))));
    }

    #[test]
    fn diff_removes_class_member() {
        let au = TrackedLabelSet::from_groups([(vec![l("a"), l("u")], MutationSet::of(&[W]))]).unwrap();
        let d = au.diff(&BTreeSet::from([l("u")]));
        assert_eq!(d, set(&[("a", MutationSet::of(&[W]))]));
        let plain = set(&[("l", MutationSet::ID), ("u", MutationSet::ANY)]);
        assert_eq!(plain.diff(&BTreeSet::from([l("u")])), set(&[("l", MutationSet::ID)]));
    }

    #[test]
    fn lookup_absent() {
        assert_eq!(TrackedLabelSet::new().lookup(&l("l")), None);
        assert_eq!(set(&[("l", MutationSet::ID)]).lookup(&l("l")), Some(MutationSet::ID));
    }

    #[test]
    fn enumeration_counts() {
        let s = set(&[("i", MutationSet::ID), ("j", MutationSet::ANY)]);
        let all: Vec<_> = s.enumerate_choices().collect();
        assert_eq!(all.len(), 3);
        assert!(all.iter().all(|c| c.kind(&l("i")) == Id));
        let kl = TrackedLabelSet::from_groups([(vec![l("k"), l("l")], MutationSet::ANY)]).unwrap();
        for c in kl.enumerate_choices() {
            assert_eq!(c.kind(&l("k")), c.kind(&l("l")));
        }
        assert_eq!(kl.enumerate_choices().count(), 3);
        assert_eq!(TrackedLabelSet::new().enumerate_choices().count(), 1);
    }

    #[test]
    fn json_round_trip() {
        let s = TrackedLabelSet::from_groups([
            (vec![l("i5"), l("p2")], MutationSet::ID_W),
            (vec![l("j")], MutationSet::ANY),
        ])
        .unwrap();
        let back = TrackedLabelSet::from_json(&s.to_json()).unwrap();
        assert_eq!(back, s);
        assert_eq!(
            s.to_json()["labels"]["i5"]["fused_with"],
            serde_json::json!(["p2"])
        );
    }

    #[test]
    fn choice_json_round_trip() {
        let mut c = MutationChoice::from_pairs([(l("l"), W), (l("k"), Id)]);
        c.witnesses
            .insert(l("l"), crate::syntax::parse_atom("x >= 0").unwrap());
        assert_eq!(MutationChoice::from_json(&c.to_json()).unwrap(), c);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn arb_set() -> impl Strategy<Value = TrackedLabelSet> {
            let group = (proptest::collection::btree_set(0usize..6, 1..3), 0u8..8);
            proptest::collection::vec(group, 0..5).prop_map(|gs| {
                TrackedLabelSet::from_groups(gs.into_iter().map(|(ms, bits)| {
                    let members = ms.iter().map(|i| l(&format!("v{i}"))).collect();
                    (members, MutationSet::from_bits(bits | 1))
                }))
                .unwrap()
            })
        }

        proptest! {
            #[test]
            fn merge_is_aci(a in arb_set(), b in arb_set(), c in arb_set()) {
                let ab = a.merge(&b).unwrap();
                prop_assert_eq!(&ab, &b.merge(&a).unwrap());
                prop_assert_eq!(ab.merge(&c).unwrap(), a.merge(&b.merge(&c).unwrap()).unwrap());
                prop_assert_eq!(a.merge(&a).unwrap(), a.clone());
            }

            #[test]
            fn merge_keeps_labels_and_narrows(a in arb_set(), b in arb_set()) {
                let m = a.merge(&b).unwrap();
                prop_assert_eq!(m.label_set(), a.label_set().union(&b.label_set()).cloned().collect());
                for x in a.labels() {
                    prop_assert!(m.lookup(x).unwrap().is_subset(a.lookup(x).unwrap()));
                    prop_assert!(m.lookup(x).unwrap().contains(Id));
                }
            }

            #[test]
            fn enumeration_law(a in arb_set()) {
                let all: Vec<MutationChoice> = a.enumerate_choices().collect();
                prop_assert_eq!(all.len() as u128, a.choice_count());
                for c in &all {
                    prop_assert!(a.admits(c));
                    for x in a.labels() {
                        prop_assert!(c.get(x).is_some());
                        for y in a.partners(x) {
                            prop_assert_eq!(c.kind(x), c.kind(&y));
                        }
                    }
                }
            }

            #[test]
            fn diff_drops_only_named(a in arb_set(), drop in proptest::collection::btree_set(0usize..6, 0..3)) {
                let dropped: BTreeSet<Label> = drop.iter().map(|i| l(&format!("v{i}"))).collect();
                let d = a.diff(&dropped);
                prop_assert_eq!(d.label_set(), a.label_set().difference(&dropped).cloned().collect());
                for x in d.labels() {
                    prop_assert_eq!(d.lookup(x), a.lookup(x));
                }
            }
        }
    }
}
