//! Fixed interpretations supplied by the user instead of synthesized ones.

use std::collections::{BTreeMap, VecDeque};
use std::path::Path;
use std::sync::{Arc, Mutex};

use serde::Deserialize;

use super::poly::PiAssignment;
use super::Mode;
use crate::error::{Error, Result};
use crate::rules::Trs;
use crate::term::Symbol;

/// One interpretation: coefficient vectors `[b0, b1, .., bn]` keyed by the
/// printed symbol name (`f`, `f#`), and the bound constant.
#[derive(Clone, Debug, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PinnedModel {
    pub pol: BTreeMap<String, Vec<i128>>,
    pub c0: i128,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PinnedSteps {
    steps: Vec<PinnedModel>,
}

impl PinnedModel {
    /// Parses either a single model or `{"steps": [..]}`.
    pub fn parse_all(json: &str) -> Result<Vec<PinnedModel>> {
        // untagged enums cannot carry i128, so dispatch on the key by hand
        let value: serde_json::Value = serde_json::from_str(json).map_err(|e| Error::Model(e.to_string()))?;
        let parsed = if value.get("steps").is_some() {
            serde_json::from_value::<PinnedSteps>(value).map(|s| s.steps)
        } else {
            serde_json::from_value::<PinnedModel>(value).map(|m| vec![m])
        };
        parsed.map_err(|e| Error::Model(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Vec<PinnedModel>> {
        PinnedModel::parse_all(&std::fs::read_to_string(path)?)
    }

    /// Resolves names against the symbols of `trs`. Symbols the mode
    /// interprets but the model omits get the zero polynomial.
    pub fn resolve(&self, trs: &Trs, mode: Mode) -> Result<PiAssignment<i128>> {
        let mut known: BTreeMap<String, Symbol> = BTreeMap::new();
        for f in trs.defined_symbols() {
            known.insert(f.marked().to_string(), f.marked());
        }
        if let Mode::Variant(_) = mode {
            for f in trs.uninterpreted_symbols() {
                known.insert(f.to_string(), f);
            }
        }
        let mut polys = BTreeMap::new();
        for (name, cs) in &self.pol {
            let Some(f) = known.get(name) else {
                if trs.uninterpreted_symbols().iter().any(|f| f.name() == name) {
                    // interpretations of unmarked symbols are ignored in legacy mode
                    continue;
                }
                return Err(Error::Model(format!("unknown symbol `{name}`")));
            };
            if cs.len() != f.arity() + 1 {
                return Err(Error::Model(format!(
                    "`{name}` has arity {} and needs {} coefficients, got {}",
                    f.arity(),
                    f.arity() + 1,
                    cs.len()
                )));
            }
            polys.insert(f.clone(), cs.clone());
        }
        for f in known.values() {
            polys.entry(f.clone()).or_insert_with(|| vec![0; f.arity() + 1]);
        }
        Ok(PiAssignment { polys })
    }
}

/// Pinned models consumed in order, one per processor application.
#[derive(Clone, Debug, Default)]
pub struct PinnedQueue(Arc<Mutex<VecDeque<PinnedModel>>>);

impl PinnedQueue {
    pub fn new(models: Vec<PinnedModel>) -> PinnedQueue {
        PinnedQueue(Arc::new(Mutex::new(models.into())))
    }

    pub fn next(&self) -> Option<PinnedModel> {
        self.0.lock().expect("pinned queue poisoned").pop_front()
    }

    pub fn remaining(&self) -> usize {
        self.0.lock().expect("pinned queue poisoned").len()
    }
}
