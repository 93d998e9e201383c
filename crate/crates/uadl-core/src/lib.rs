//! Usage-aware proof checking for differential dynamic logic.
//!
//! Models are labeled formulas; proofs are checked against rule scripts
//! while tracking which atoms each step uses and which mutations (keep,
//! weaken, remove) remain admissible.

pub mod calculus;
pub mod diagnostics;
pub mod labelsets;
pub mod mutation;
pub mod oracle;
pub mod syntax;
