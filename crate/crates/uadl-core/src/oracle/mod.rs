//! Arithmetic validity oracles and the dynamic analysis built on them.

pub mod da;
pub mod fixture;
pub mod fm;
pub mod linear;
pub mod poly;
pub mod sampling;

use crate::syntax::{print_fml, Rat, Sequent};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

pub use da::{dynamic_analysis, DaResult};
pub use fixture::FixtureOracle;
pub use linear::LinearOracle;
pub use sampling::SamplingOracle;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Valid,
    /// A falsifying assignment, evaluated exactly.
    Invalid(BTreeMap<String, Rat>),
    Unknown(String),
}

impl Verdict {
    pub fn is_valid(&self) -> bool {
        matches!(self, Verdict::Valid)
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Valid => f.write_str("valid"),
            Verdict::Invalid(m) => {
                let parts: Vec<String> = m.iter().map(|(x, v)| format!("{x} = {v}")).collect();
                write!(f, "invalid ({})", parts.join(", "))
            }
            Verdict::Unknown(r) => write!(f, "unknown ({r})"),
        }
    }
}

/// Label name to recorded mutation kinds, as stored in fixtures.
pub type RecordedDa = BTreeMap<String, Vec<crate::labelsets::MutationKind>>;

pub trait Oracle: Send + Sync {
    fn decide(&self, s: &Sequent) -> Verdict;

    /// A replayed dynamic-analysis result for this exact sequent, if any.
    fn recorded_da(&self, _s: &Sequent) -> Option<RecordedDa> {
        None
    }

    /// Whether an Unknown verdict for `s` is vouched for by a recording
    /// and may still close a leaf.
    fn attests_unknown(&self, _s: &Sequent) -> bool {
        false
    }
}

/// Tries each oracle in turn; the first definite verdict wins.
pub struct ChainOracle {
    pub parts: Vec<Box<dyn Oracle>>,
}

impl ChainOracle {
    /// Linear decision procedure, then the sampling falsifier.
    pub fn standard() -> Self {
        ChainOracle {
            parts: vec![Box::new(LinearOracle::new()), Box::new(SamplingOracle::new())],
        }
    }

    pub fn with_fixture(fixture: FixtureOracle) -> Self {
        let mut c = ChainOracle::standard();
        c.parts.insert(0, Box::new(fixture));
        c
    }
}

impl Oracle for ChainOracle {
    fn decide(&self, s: &Sequent) -> Verdict {
        let mut reasons = Vec::new();
        for p in &self.parts {
            match p.decide(s) {
                Verdict::Unknown(r) => reasons.push(r),
                v => return v,
            }
        }
        Verdict::Unknown(reasons.join("; "))
    }

    fn recorded_da(&self, s: &Sequent) -> Option<RecordedDa> {
        self.parts.iter().find_map(|p| p.recorded_da(s))
    }

    fn attests_unknown(&self, s: &Sequent) -> bool {
        self.parts.iter().any(|p| p.attests_unknown(s))
    }
}

/// Builds an oracle from `linear`, `sampling`, `chain` or `fixture:<path>`.
/// Relative fixture paths that do not exist are looked up in `search_dir`.
pub fn oracle_from_spec(spec: &str, search_dir: Option<&Path>) -> Result<Box<dyn Oracle>, String> {
    match spec {
        "linear" => Ok(Box::new(LinearOracle::new())),
        "sampling" => Ok(Box::new(SamplingOracle::new())),
        "chain" => Ok(Box::new(ChainOracle::standard())),
        _ => {
            let Some(path) = spec.strip_prefix("fixture:") else {
                return Err(format!("unknown oracle '{spec}'"));
            };
            let mut p = Path::new(path).to_path_buf();
            if !p.exists() && p.is_relative() {
                if let Some(dir) = search_dir {
                    p = dir.join(path);
                }
            }
            let text = std::fs::read_to_string(&p).map_err(|e| format!("{}: {e}", p.display()))?;
            let fx = FixtureOracle::from_json_str(&text)?;
            Ok(Box::new(ChainOracle::with_fixture(fx)))
        }
    }
}

/// Stable structural key of a sequent, labels excluded.
pub fn canonical_hash(s: &Sequent) -> String {
    let side = |fs: &[crate::syntax::Fml]| fs.iter().map(print_fml).collect::<Vec<_>>().join(" ;; ");
    let text = format!("{} |- {}", side(&s.ante), side(&s.succ));
    let digest = Sha256::digest(text.as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}
