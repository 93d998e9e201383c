//! Replay of recorded verdicts, keyed by [`canonical_hash`].

use super::{canonical_hash, Oracle, RecordedDa, Verdict};
use crate::labelsets::MutationKind;
use crate::syntax::{print_sequent, Sequent};
use serde_json::{json, Value};
use std::collections::BTreeMap;

#[derive(Clone, Debug, PartialEq)]
pub struct FixtureEntry {
    pub verdict: Verdict,
    pub da: Option<RecordedDa>,
    /// Printed sequent, informational only.
    pub sequent: Option<String>,
}

#[derive(Clone, Debug, Default)]
pub struct FixtureOracle {
    pub entries: BTreeMap<String, FixtureEntry>,
}

fn is_hex_key(k: &str) -> bool {
    k.len() == 64 && k.bytes().all(|b| b.is_ascii_hexdigit())
}

impl FixtureOracle {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, s: &Sequent, verdict: Verdict, da: Option<RecordedDa>) {
        self.entries.insert(
            canonical_hash(s),
            FixtureEntry {
                verdict,
                da,
                sequent: Some(print_sequent(s)),
            },
        );
    }

    pub fn from_json_str(text: &str) -> Result<Self, String> {
        let v: Value = serde_json::from_str(text).map_err(|e| format!("fixture: {e}"))?;
        Self::from_json(&v)
    }

    /// Reads `[{"key": "<hash>", "verdict": "valid", "da": {"l": ["id"]}}]`.
    pub fn from_json(v: &Value) -> Result<Self, String> {
        let list = v.as_array().ok_or("fixture: expected an array")?;
        let mut out = FixtureOracle::new();
        for (i, e) in list.iter().enumerate() {
            let key = e
                .get("key")
                .and_then(Value::as_str)
                .ok_or_else(|| format!("fixture entry {i}: missing key"))?;
            if !is_hex_key(key) {
                return Err(format!("fixture entry {i}: malformed key '{key}'"));
            }
            let verdict = match e.get("verdict").and_then(Value::as_str) {
                Some("valid") => Verdict::Valid,
                Some("invalid") => Verdict::Invalid(BTreeMap::new()),
                Some("unknown") => Verdict::Unknown("recorded".into()),
                other => return Err(format!("fixture entry {i}: bad verdict {other:?}")),
            };
            let da = match e.get("da") {
                None | Some(Value::Null) => None,
                Some(Value::Object(m)) => {
                    let mut da = RecordedDa::new();
                    for (l, kinds) in m {
                        let kinds = kinds
                            .as_array()
                            .ok_or_else(|| format!("fixture entry {i}: da for {l} is not a list"))?;
                        let mut ks = Vec::new();
                        for k in kinds {
                            let k = k
                                .as_str()
                                .and_then(|s| if s == "any" { None } else { MutationKind::parse(s) });
                            match k {
                                Some(k) => ks.push(k),
                                None if kinds.len() == 1 && kinds[0] == "any" => ks.extend(MutationKind::ALL),
                                None => return Err(format!("fixture entry {i}: bad mutation kind for {l}")),
                            }
                        }
                        da.insert(l.clone(), ks);
                    }
                    Some(da)
                }
                Some(_) => return Err(format!("fixture entry {i}: da must be an object")),
            };
            let sequent = e.get("sequent").and_then(Value::as_str).map(str::to_string);
            out.entries.insert(key.to_string(), FixtureEntry { verdict, da, sequent });
        }
        Ok(out)
    }

    pub fn to_json(&self) -> Value {
        let list: Vec<Value> = self
            .entries
            .iter()
            .map(|(k, e)| {
                let verdict = match e.verdict {
                    Verdict::Valid => "valid",
                    Verdict::Invalid(_) => "invalid",
                    Verdict::Unknown(_) => "unknown",
                };
                let mut obj = json!({"key": k, "verdict": verdict});
                if let Some(s) = &e.sequent {
                    obj["sequent"] = json!(s);
                }
                if let Some(da) = &e.da {
                    let m: serde_json::Map<String, Value> = da
                        .iter()
                        .map(|(l, ks)| (l.clone(), json!(ks.iter().map(|k| k.as_str()).collect::<Vec<_>>())))
                        .collect();
                    obj["da"] = Value::Object(m);
                }
                obj
            })
            .collect();
        Value::Array(list)
    }
}

impl Oracle for FixtureOracle {
    fn decide(&self, s: &Sequent) -> Verdict {
        match self.entries.get(&canonical_hash(s)) {
            Some(e) => e.verdict.clone(),
            None => Verdict::Unknown("no fixture entry".into()),
        }
    }

    fn recorded_da(&self, s: &Sequent) -> Option<RecordedDa> {
        self.entries.get(&canonical_hash(s)).and_then(|e| e.da.clone())
    }

    fn attests_unknown(&self, s: &Sequent) -> bool {
        self.entries
            .get(&canonical_hash(s))
            .is_some_and(|e| matches!(e.verdict, Verdict::Unknown(_)))
    }
}
