//! Proof scripts: a JSON tree of rule applications.
//!
//! A node is `{"rule": "...", "params": {...}, "children": [...]}`. Wherever
//! a node is expected, an array of nodes may be given instead; it is read as
//! a chain in which each node applies to the single open premise of the one
//! before it.

use serde_json::{json, Map, Value};
use std::collections::BTreeMap;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProofNode {
    pub rule: String,
    pub params: BTreeMap<String, String>,
    pub children: Vec<ProofNode>,
}

impl ProofNode {
    pub fn new(rule: &str) -> Self {
        ProofNode {
            rule: rule.to_string(),
            params: BTreeMap::new(),
            children: Vec::new(),
        }
    }

    pub fn param(mut self, key: &str, value: &str) -> Self {
        self.params.insert(key.to_string(), value.to_string());
        self
    }

    pub fn child(mut self, c: ProofNode) -> Self {
        self.children.push(c);
        self
    }

    /// Chains `rest` below `self`: each node gets the next as its only child.
    pub fn then(self, rest: Vec<ProofNode>) -> ProofNode {
        let mut all = vec![self];
        all.extend(rest);
        fold_chain(all).expect("non-empty chain")
    }

    pub fn to_json(&self) -> Value {
        let mut obj = Map::new();
        obj.insert("rule".into(), json!(self.rule));
        if !self.params.is_empty() {
            obj.insert("params".into(), json!(self.params));
        }
        if !self.children.is_empty() {
            obj.insert(
                "children".into(),
                Value::Array(self.children.iter().map(ProofNode::to_json).collect()),
            );
        }
        Value::Object(obj)
    }

    /// Number of nodes in the script.
    pub fn size(&self) -> usize {
        1 + self.children.iter().map(ProofNode::size).sum::<usize>()
    }
}

fn fold_chain(mut nodes: Vec<ProofNode>) -> Result<ProofNode, String> {
    let mut acc = nodes.pop().ok_or("empty proof chain")?;
    while let Some(mut prev) = nodes.pop() {
        if !prev.children.is_empty() {
            return Err(format!(
                "rule '{}' has explicit children but is followed by '{}' in a chain",
                prev.rule, acc.rule
            ));
        }
        prev.children.push(acc);
        acc = prev;
    }
    Ok(acc)
}

fn param_text(v: &Value) -> Result<String, String> {
    match v {
        Value::String(s) => Ok(s.clone()),
        Value::Number(n) => Ok(n.to_string()),
        Value::Bool(b) => Ok(b.to_string()),
        other => Err(format!("parameter values must be strings, got {other}")),
    }
}

fn node_from(v: &Value) -> Result<ProofNode, String> {
    match v {
        Value::Array(items) => {
            let nodes = items.iter().map(node_from).collect::<Result<Vec<_>, _>>()?;
            fold_chain(nodes)
        }
        Value::Object(m) => {
            let rule = m
                .get("rule")
                .and_then(Value::as_str)
                .ok_or("proof node without a \"rule\" string")?;
            let mut params = BTreeMap::new();
            match m.get("params") {
                None | Some(Value::Null) => {}
                Some(Value::Object(p)) => {
                    for (k, v) in p {
                        params.insert(k.clone(), param_text(v).map_err(|e| format!("{rule}: {e}"))?);
                    }
                }
                Some(_) => return Err(format!("{rule}: \"params\" must be an object")),
            }
            let children = match m.get("children") {
                None | Some(Value::Null) => Vec::new(),
                Some(Value::Array(cs)) => cs.iter().map(node_from).collect::<Result<_, _>>()?,
                Some(_) => return Err(format!("{rule}: \"children\" must be an array")),
            };
            for k in m.keys() {
                if !matches!(k.as_str(), "rule" | "params" | "children" | "comment") {
                    return Err(format!("{rule}: unknown key \"{k}\""));
                }
            }
            Ok(ProofNode {
                rule: rule.to_string(),
                params,
                children,
            })
        }
        _ => Err("a proof node must be an object or an array".into()),
    }
}

/// Parses a script. The top level is a node or a chain of nodes.
pub fn parse_script(v: &Value) -> Result<ProofNode, String> {
    node_from(v)
}

pub fn parse_script_str(text: &str) -> Result<ProofNode, String> {
    let v: Value = serde_json::from_str(text).map_err(|e| format!("proof script: {e}"))?;
    parse_script(&v)
}
