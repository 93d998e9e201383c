//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs without the test harness so the lines always show up in
//! `cargo test` output. Budgets and corpus sizes are pinned below.

mod common;

use common::gen::{self, Case, ShiftProvider};
use common::parachute;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::OnceLock;
use std::time::{Duration, Instant};
use uadl_core::calculus::{check_proof, AnnotatedNode, AnnotatedProof, Mode};
use uadl_core::diagnostics::{verify_cut_mutation, verify_relaxation};
use uadl_core::labelsets::{MutationChoice, MutationKind, MutationSet, TrackedLabelSet};
use uadl_core::mutation::{apply, apply_sequent, DefaultProvider};
use uadl_core::oracle::{dynamic_analysis, LinearOracle, Oracle};
use uadl_core::syntax::{labels_of, parse_atom, parse_model, sequent_labels, Fml, Label, Origin, Sequent};

const PARACHUTE_BUDGET: Duration = Duration::from_secs(1);
const FUZZ_BUDGET: Duration = Duration::from_secs(30);
const FUZZ_MODELS: usize = 200;
const CHI_PER_PROOF: usize = 5;
const ALGEBRA_TRIPLES: usize = 1000;
const LEMMA1_CASES: usize = 500;
const UNION_CASES: usize = 20;
const CUT_CASES: usize = 50;
const RELAX_SAMPLES: usize = 50;
const SEED: u64 = 2024;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn lab(name: &str) -> Label {
    Label::new(name, Origin::Model)
}

fn set(entries: &[(&str, MutationSet)]) -> TrackedLabelSet {
    TrackedLabelSet::from_groups(entries.iter().map(|(l, s)| (vec![lab(l)], *s))).unwrap()
}

/// Semantic equality, read through the public accessors only.
fn same(a: &TrackedLabelSet, b: &TrackedLabelSet) -> bool {
    a.label_set() == b.label_set() && a.labels().all(|l| a.lookup(l) == b.lookup(l) && a.partners(l) == b.partners(l))
}

fn checked(case: &Case, chi: &TrackedLabelSet) -> Result<AnnotatedProof, String> {
    check_proof(&case.model, &case.proof, chi, &LinearOracle, &ShiftProvider, Mode::Parallel)
        .map_err(|e| format!("{}: {e}", case.text))
}

/// Fused members share one kind in `c`.
fn respects_fusion(s: &TrackedLabelSet, c: &MutationChoice) -> bool {
    s.classes().all(|(m, _)| m.iter().map(|l| c.kind(l)).collect::<BTreeSet<_>>().len() == 1)
}

fn model_valid(m: &Fml) -> bool {
    LinearOracle.decide(&Sequent::new(vec![], vec![m.clone()])).is_valid()
}

struct Fuzz {
    cases: Vec<(Case, AnnotatedProof)>,
    unions: Vec<(Case, AnnotatedProof)>,
    choices: usize,
    unsound: Vec<String>,
    split: usize,
    elapsed: Duration,
}

/// The shared fuzz corpus, checked once with every root choice decided.
fn fuzz() -> &'static Result<Fuzz, String> {
    static F: OnceLock<Result<Fuzz, String>> = OnceLock::new();
    F.get_or_init(|| {
        let t = Instant::now();
        let mut rng = ChaCha8Rng::seed_from_u64(SEED);
        let provider = ShiftProvider;
        let mut f = Fuzz {
            cases: Vec::new(),
            unions: Vec::new(),
            choices: 0,
            unsound: Vec::new(),
            split: 0,
            elapsed: Duration::ZERO,
        };
        let mut corpus: Vec<(Case, bool)> = (0..FUZZ_MODELS).map(|_| (gen::linear_case(&mut rng), false)).collect();
        corpus.extend((0..UNION_CASES).map(|_| (gen::union_case(&mut rng), true)));
        for (case, union) in corpus {
            let p = checked(&case, &TrackedLabelSet::new())?;
            let model_labels: BTreeSet<Label> = labels_of(&case.model).into_iter().collect();
            let root = p.sigma().restrict(&model_labels);
            for c in root.enumerate_choices() {
                f.choices += 1;
                if !respects_fusion(&root, &c) {
                    f.split += 1;
                }
                let ok = apply(&c, &case.model, &provider).map(|m| model_valid(&m)).unwrap_or(false);
                if !ok {
                    f.unsound.push(format!("{} under {c}", case.text));
                }
            }
            if union {
                f.unions.push((case, p));
            } else {
                f.cases.push((case, p));
            }
        }
        f.elapsed = t.elapsed();
        Ok(f)
    })
}

fn c1_parachute() -> Outcome {
    let fx = parachute::fixture();
    let t = Instant::now();
    let p = parachute::check_with(&fx, &TrackedLabelSet::new(), Mode::Parallel);
    let took = t.elapsed();
    ensure(parachute::same_choices(p.sigma(), &parachute::omega()), || {
        format!("root set {} differs from the expected one", p.sigma().to_json())
    })?;
    ensure(took < PARACHUTE_BUDGET, || format!("took {took:?}"))?;
    Ok(format!("{} labels as expected in {:.0} ms", p.sigma().len(), took.as_secs_f64() * 1e3))
}

fn c2_merge() -> Outcome {
    use MutationSet as M;
    let a = set(&[("l", M::ID), ("m", M::ANY), ("n", M::ID_W)]);
    let b = set(&[("l", M::ANY), ("m", M::ID), ("o", M::ANY)]);
    let want = set(&[("l", M::ID), ("m", M::ID), ("n", M::ID_W), ("o", M::ANY)]);
    let got = a.merge(&b).map_err(|e| e.to_string())?;
    ensure(same(&got, &want), || format!("got {}", got.to_json()))?;
    Ok(format!("{got}"))
}

fn c3_dynamic_analysis() -> Outcome {
    let (f, _) = parse_model("@i x > 1 -> @j x >= 0").map_err(|e| e.to_string())?;
    let Fml::Imp(a, b) = f else { return Err("unexpected parse".into()) };
    let goal = Sequent::new(vec![*a], vec![*b]);
    let provider = DefaultProvider::new();
    let r = dynamic_analysis(&goal, &TrackedLabelSet::new(), &LinearOracle, &provider);
    let i = r.set.lookup(&lab("i")).unwrap_or(MutationSet::EMPTY);
    let j = r.set.lookup(&lab("j")).unwrap_or(MutationSet::EMPTY);
    ensure(MutationSet::ID_W.is_subset(i) && MutationSet::ID.is_subset(j), || format!("got {}", r.set.to_json()))?;
    let w = r.witnesses.get(&lab("i")).cloned();
    ensure(w == Some(parse_atom("x >= 1").unwrap()), || format!("witness {w:?}"))?;
    let mut n = 0;
    for c in r.set.enumerate_choices() {
        n += 1;
        ensure(respects_fusion(&r.set, &c), || format!("{c} splits a class"))?;
        let m = apply_sequent(&c, &goal, &provider).map_err(|e| e.to_string())?;
        ensure(LinearOracle.decide(&m).is_valid(), || format!("{c} is not valid"))?;
    }
    Ok(format!("{} with witness x >= 1; {n} choices valid", r.set))
}

fn c4_soundness() -> Outcome {
    let f = fuzz().as_ref().map_err(Clone::clone)?;
    let rules: BTreeSet<&str> = f.cases.iter().flat_map(|(c, _)| rules_of(&c.proof)).collect();
    let allowed = ["andR", "impR", "orL", "WL", "WR", "cut", "id", "QE"];
    ensure(rules.iter().all(|r| allowed.contains(r)), || format!("rules {rules:?}"))?;
    ensure(f.unsound.is_empty(), || format!("{} unsound: {}", f.unsound.len(), f.unsound[0]))?;
    ensure(f.elapsed < FUZZ_BUDGET, || format!("took {:?}", f.elapsed))?;
    let max = f.cases.iter().map(|(_, p)| p.sigma().choice_count()).max().unwrap_or(0);
    ensure(max <= 729, || format!("{max} choices for one model"))?;
    Ok(format!(
        "{} models, {} choices decided valid, rules {:?}, {:.1} s",
        f.cases.len(),
        f.choices,
        rules,
        f.elapsed.as_secs_f64()
    ))
}

fn rules_of(p: &uadl_core::calculus::ProofNode) -> Vec<&str> {
    let mut out = vec![p.rule.as_str()];
    for c in &p.children {
        out.extend(rules_of(c));
    }
    out
}

fn c5_completeness() -> Outcome {
    let f = fuzz().as_ref().map_err(Clone::clone)?;
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 5);
    let mut runs = 0;
    for (case, _) in &f.cases {
        let labels = labels_of(&case.model);
        for _ in 0..CHI_PER_PROOF {
            let k = rng.gen_range(0..=labels.len());
            let picked: Vec<&Label> = labels.choose_multiple(&mut rng, k).collect();
            let groups = picked.iter().map(|l| (vec![(*l).clone()], MutationSet::from_bits(rng.gen_range(1..8))));
            let chi = TrackedLabelSet::from_groups(groups).map_err(|e| e.to_string())?;
            let p = checked(case, &chi)?;
            let sigma = p.sigma();
            ensure(sigma.label_set().is_superset(&chi.label_set()), || {
                format!("{}: {} misses labels of {}", case.text, sigma.to_json(), chi.to_json())
            })?;
            for l in chi.labels() {
                let (s, c) = (sigma.lookup(l).unwrap(), chi.lookup(l).unwrap().with(MutationKind::Id));
                ensure(s.is_subset(c), || format!("{}: {l} widened from {c} to {s}", case.text))?;
            }
            runs += 1;
        }
    }
    Ok(format!("{runs} checks under random input sets, all closed and covering"))
}

fn random_set(rng: &mut ChaCha8Rng) -> TrackedLabelSet {
    let names = ["a", "b", "c", "d", "e", "f"];
    let groups: Vec<(Vec<Label>, MutationSet)> = (0..rng.gen_range(0..5))
        .map(|_| {
            let k = rng.gen_range(1..=2);
            let members = names.choose_multiple(rng, k).map(|n| lab(n)).collect();
            (members, MutationSet::from_bits(rng.gen_range(0..8) | 1))
        })
        .collect();
    TrackedLabelSet::from_groups(groups).unwrap()
}

fn c6_algebra() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 6);
    let m = |a: &TrackedLabelSet, b: &TrackedLabelSet| a.merge(b).map_err(|e| e.to_string());
    for _ in 0..ALGEBRA_TRIPLES {
        let (a, b, c) = (random_set(&mut rng), random_set(&mut rng), random_set(&mut rng));
        ensure(same(&m(&a, &b)?, &m(&b, &a)?), || format!("not commutative on {a} and {b}"))?;
        ensure(same(&m(&m(&a, &b)?, &c)?, &m(&a, &m(&b, &c)?)?), || format!("not associative on {a}, {b}, {c}"))?;
        ensure(same(&m(&a, &a)?, &a), || format!("not idempotent on {a}"))?;
    }
    let f = fuzz().as_ref().map_err(Clone::clone)?;
    let mut nodes = 0;
    let mut bad = Vec::new();
    let cuts = cut_corpus().as_ref().map_err(Clone::clone)?;
    for (case, p) in f.cases.iter().chain(&f.unions).chain(cuts) {
        p.root.walk(&mut |n: &AnnotatedNode| {
            nodes += 1;
            let missing: Vec<_> = sequent_labels(&n.goal).into_iter().filter(|l| !n.sigma_out.contains(l)).collect();
            if !missing.is_empty() {
                bad.push(format!("{}: node {:?} drops {missing:?}", case.text, n.path));
            }
            for (_, s) in n.sigma_out.classes().chain(n.xi.classes()) {
                if !s.contains(MutationKind::Id) {
                    bad.push(format!("{}: node {:?} lacks id", case.text, n.path));
                }
            }
        });
    }
    ensure(bad.is_empty(), || bad[0].clone())?;
    Ok(format!("{ALGEBRA_TRIPLES} triples; every label kept and id present at {nodes} nodes"))
}

fn c7_lemma1() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 7);
    let provider = ShiftProvider;
    let kinds = [MutationKind::Id, MutationKind::W, MutationKind::R];
    let mut errs = 0;
    for _ in 0..LEMMA1_CASES {
        let text = gen::formula_text(&mut rng, 3);
        let f = parse_model(&text).map_err(|e| format!("{text}: {e}"))?.0;
        let mut labels = labels_of(&f);
        labels.shuffle(&mut rng);
        let cut = rng.gen_range(0..=labels.len());
        let end = rng.gen_range(cut..=labels.len());
        let mut pick = |ls: &[Label]| MutationChoice::from_pairs(ls.iter().map(|l| (l.clone(), *kinds.choose(&mut rng).unwrap())));
        let (a, b) = (pick(&labels[..cut]), pick(&labels[cut..end]));
        let joint = apply(&a.union(&b), &f, &provider);
        let ab = apply(&b, &f, &provider).and_then(|g| apply(&a, &g, &provider));
        let ba = apply(&a, &f, &provider).and_then(|g| apply(&b, &g, &provider));
        match (&joint, &ab, &ba) {
            (Ok(j), Ok(x), Ok(y)) => ensure(j == x && j == y, || format!("{text}: A={a} B={b} disagree"))?,
            (Err(_), Err(_), Err(_)) => errs += 1,
            _ => return Err(format!("{text}: A={a} B={b} fail differently")),
        }
    }
    Ok(format!("{LEMMA1_CASES} formulas agree in both orders ({errs} rejected identically by all three)"))
}

fn c8_fusion() -> Outcome {
    let f = fuzz().as_ref().map_err(Clone::clone)?;
    ensure(f.split == 0, || format!("{} choices split a class", f.split))?;
    let nontrivial = f
        .unions
        .iter()
        .filter(|(_, p)| p.sigma().classes().any(|(m, _)| m.len() > 1))
        .count();
    ensure(nontrivial == f.unions.len(), || format!("only {nontrivial} of {} union proofs fuse", f.unions.len()))?;
    let fused_fuzz = f.cases.iter().filter(|(_, p)| p.sigma().classes().any(|(m, _)| m.len() > 1)).count();
    Ok(format!(
        "{} choices keep every class whole; {nontrivial} union proofs and {fused_fuzz} fuzz proofs fuse",
        f.choices
    ))
}

fn cut_corpus() -> &'static Result<Vec<(Case, AnnotatedProof)>, String> {
    static C: OnceLock<Result<Vec<(Case, AnnotatedProof)>, String>> = OnceLock::new();
    C.get_or_init(|| {
        let mut rng = ChaCha8Rng::seed_from_u64(SEED + 9);
        (0..CUT_CASES)
            .map(|_| {
                let c = gen::cut_case(&mut rng);
                checked(&c, &TrackedLabelSet::new()).map(|p| (c, p))
            })
            .collect()
    })
}

fn c9_cut_diagnostics() -> Outcome {
    let fx = parachute::fixture();
    let provider = parachute::provider();
    let p = parachute::check_with(&fx, &TrackedLabelSet::new(), Mode::Parallel);
    let lp = p.find(&[0]).ok_or("no loop node")?;
    let u1 = parachute::label("u1");
    ensure(lp.xi.lookup(&u1) == Some(MutationSet::ANY), || format!("loop constraint {}", lp.xi.to_json()))?;
    let c = MutationChoice::from_pairs([(u1, MutationKind::R)]);
    verify_relaxation(&p, &parachute::script(), &c, &fx, &provider).map_err(|e| format!("u1:R: {e}"))?;

    let provider = ShiftProvider;
    let (mut sites, mut choices, mut fresh) = (0, 0, 0);
    for (case, p) in cut_corpus().as_ref().map_err(Clone::clone)? {
        let mut cuts = Vec::new();
        p.root.walk(&mut |n| {
            if n.rule == "cut" {
                cuts.push(n);
            }
        });
        for n in cuts {
            sites += 1;
            fresh += usize::from(!n.fresh.is_empty());
            for ch in n.xi.enumerate_choices() {
                choices += 1;
                for kid in &n.children {
                    let m = apply_sequent(&ch, &kid.goal, &provider).map_err(|e| format!("{}: {e}", case.text))?;
                    ensure(LinearOracle.decide(&m).is_valid(), || {
                        format!("{}: cut at {:?} under {ch}: premise {:?} fails", case.text, n.path, kid.path)
                    })?;
                }
            }
            verify_cut_mutation(p, &case.proof, &n.path, &LinearOracle, &provider, 729)
                .map_err(|e| format!("{}: {e}", case.text))?;
        }
    }
    ensure(fresh > 0, || "no cut introduced a fresh label".into())?;
    Ok(format!(
        "u1 any and removable; {CUT_CASES} cut proofs, {sites} cuts ({fresh} with fresh atoms), {choices} choices valid"
    ))
}

fn c10_sequential() -> Outcome {
    let fx = parachute::fixture();
    let provider = parachute::provider();
    let mut out = Vec::new();
    for mode in [Mode::Sequential, Mode::Parallel] {
        let p = parachute::check_with(&fx, &TrackedLabelSet::new(), mode);
        let mut rng = ChaCha8Rng::seed_from_u64(SEED + 10);
        for _ in 0..RELAX_SAMPLES {
            let c = p.sigma().choice_from(&mut |_, ks| ks[rng.gen_range(0..ks.len())]);
            verify_relaxation(&p, &parachute::script(), &c, &fx, &provider)
                .map_err(|e| format!("{} mode, {c}: {e}", mode.as_str()))?;
        }
        out.push(format!("{}: {} labels", mode.as_str(), p.sigma().len()));
    }
    Ok(format!("{RELAX_SAMPLES} relaxations replay in each mode ({})", out.join(", ")))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("parachute golden run", c1_parachute),
        ("merge example", c2_merge),
        ("dynamic analysis example", c3_dynamic_analysis),
        ("soundness fuzz", c4_soundness),
        ("completeness under input sets", c5_completeness),
        ("label-set algebra", c6_algebra),
        ("order independence of mutations", c7_lemma1),
        ("fusion classes", c8_fusion),
        ("cut diagnostics", c9_cut_diagnostics),
        ("sequential mode parity", c10_sequential),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let r = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        match r {
            Ok(d) => println!("PASS {:>2} {name}: {d}", i + 1),
            Err(d) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {d}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
