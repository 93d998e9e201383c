//! The labeled sequent calculus: rules, axioms and the proof checker.

pub mod axioms;
pub mod ode;
pub mod rules;
pub mod script;
pub mod engine;

pub use engine::{
    check_proof, normalize_chi, AnnotatedNode, AnnotatedProof, CalcError, CalcErrorKind, Checker, LeafInfo, Mode,
};
pub use rules::RuleId;
pub use script::{parse_script, parse_script_str, ProofNode};
