mod common;

use common::parachute::*;
use std::time::Instant;
use uadl_core::calculus::Mode;
use uadl_core::labelsets::TrackedLabelSet;

/// Set UADL_REGEN_FIXTURE=1 to rewrite the fixture after editing the script.
#[test]
fn fixture_matches_script() {
    let built = build_fixture();
    let path = corpus().join("parachute.fx");
    if std::env::var_os("UADL_REGEN_FIXTURE").is_some() {
        let text = serde_json::to_string_pretty(&built.to_json()).unwrap() + "\n";
        std::fs::write(&path, text).unwrap();
    }
    assert_eq!(fixture().entries, built.entries, "stale fixture, regenerate it");
}

#[test]
fn root_set_is_omega() {
    let fx = fixture();
    let t = Instant::now();
    let p = check_with(&fx, &TrackedLabelSet::new(), Mode::Parallel);
    let took = t.elapsed();
    assert!(
        same_choices(p.sigma(), &omega()),
        "got {}\nwant {}",
        p.sigma().to_json(),
        omega().to_json()
    );
    assert!(took.as_secs_f64() < 1.0, "{took:?}");
}

#[test]
fn loop_cut_label_is_unconstrained() {
    let p = check_with(&fixture(), &TrackedLabelSet::new(), Mode::Parallel);
    let lp = p.find(&[0]).unwrap();
    assert_eq!(lp.rule, "loop");
    assert_eq!(lp.xi.lookup(&label("u1")), Some(uadl_core::labelsets::MutationSet::ANY), "{}", lp.xi.to_json());
}

#[test]
fn sequential_mode_checks() {
    let p = check_with(&fixture(), &TrackedLabelSet::new(), Mode::Sequential);
    println!("{}", p.sigma().to_json());
    assert!(p.sigma().label_set().is_superset(&omega().label_set()));
}

mod replay {
    use super::common::parachute::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use uadl_core::calculus::Mode;
    use uadl_core::diagnostics::*;
    use uadl_core::labelsets::{MutationChoice, MutationKind, TrackedLabelSet};

    #[test]
    fn diagnose_reports_removable_cut_atom() {
        let fx = fixture();
        let p = check_with(&fx, &TrackedLabelSet::new(), Mode::Parallel);
        let r = diagnose(&p, &script(), &fx, &provider(), 64);
        let text = r.to_text();
        assert!(text.contains("cut atom u1 (x > -1): removable"), "{text}");
        assert!(text.contains("atom j ("), "{text}");
        let lp = r.cuts.iter().find(|c| c.rule == "loop").unwrap();
        assert!(matches!(lp.verdict, CutVerdict::Verified { .. }), "{:?}", lp.verdict);
        for c in &r.cuts {
            assert!(matches!(c.verdict, CutVerdict::Verified { .. }), "{} {:?}", c.rule, c.verdict);
        }
    }

    #[test]
    fn unused_tests_can_go() {
        let fx = fixture();
        let p = check_with(&fx, &TrackedLabelSet::new(), Mode::Parallel);
        let c = MutationChoice::from_pairs([(label("j"), MutationKind::R), (label("l"), MutationKind::R)]);
        verify_relaxation(&p, &script(), &c, &fx, &provider()).unwrap_or_else(|e| panic!("{e}"));
        let c = MutationChoice::from_pairs([(label("u1"), MutationKind::R)]);
        verify_relaxation(&p, &script(), &c, &fx, &provider()).unwrap_or_else(|e| panic!("{e}"));
        let c = MutationChoice::from_pairs([(label("k"), MutationKind::R)]);
        assert!(matches!(verify_relaxation(&p, &script(), &c, &fx, &provider()), Err(ReplayError::NotAdmitted(_))));
    }

    #[test]
    fn random_relaxations_replay() {
        let fx = fixture();
        for mode in [Mode::Parallel, Mode::Sequential] {
            let p = check_with(&fx, &TrackedLabelSet::new(), mode);
            let mut rng = ChaCha8Rng::seed_from_u64(7);
            for _ in 0..50 {
                let c = p.sigma().choice_from(&mut |_, ks| ks[rng.gen_range(0..ks.len())]);
                if let Err(e) = verify_relaxation(&p, &script(), &c, &fx, &provider()) {
                    panic!("{:?} {}: {e}", mode, c.to_json());
                }
            }
        }
    }
}
