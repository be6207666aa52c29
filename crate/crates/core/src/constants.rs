//! Frozen-constants protocol: every comparison claim gets its constant
//! measured once on a reference corpus, recorded here, and asserted with a
//! fixed slack afterwards, turning asymptotic claims into regression tests.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub const SLACK: f64 = 1.5;

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct ConstantsStore {
    pub schema: u32,
    pub constants: BTreeMap<String, f64>,
}

impl ConstantsStore {
    pub fn new() -> Self {
        ConstantsStore {
            schema: 1,
            constants: BTreeMap::new(),
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let store: ConstantsStore = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        if store.schema != 1 {
            return Err(Error::Format(format!("unsupported constants schema {}", store.schema)));
        }
        Ok(store)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }

    pub fn record(&mut self, key: &str, value: f64) {
        self.constants.insert(key.to_string(), value);
    }

    pub fn get(&self, key: &str) -> Result<f64> {
        self.constants
            .get(key)
            .copied()
            .ok_or_else(|| Error::InvalidParameter(format!("no frozen constant `{key}`")))
    }

    /// Upper-style claims: the fresh measurement may not exceed the frozen
    /// constant by more than the slack factor.
    pub fn check_upper(&self, key: &str, measured: f64) -> Result<()> {
        let frozen = self.get(key)?;
        if measured <= frozen * SLACK {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!(
                "constant `{key}` drifted: measured {measured} vs frozen {frozen} (x{SLACK})"
            )))
        }
    }

    /// Lower-style claims (minimal ratios): the fresh measurement may not
    /// fall below the frozen constant divided by the slack factor.
    pub fn check_lower(&self, key: &str, measured: f64) -> Result<()> {
        let frozen = self.get(key)?;
        if measured >= frozen / SLACK {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!(
                "constant `{key}` drifted: measured {measured} vs frozen {frozen} (/{SLACK})"
            )))
        }
    }
}

/// Constants file path: the `METSOB_CONSTANTS` environment variable when
/// set, the workspace `constants.json` otherwise.
pub fn default_path() -> PathBuf {
    if let Ok(p) = std::env::var("METSOB_CONSTANTS") {
        return PathBuf::from(p);
    }
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../..")
        .join("constants.json")
}

pub fn load_default() -> Result<ConstantsStore> {
    ConstantsStore::load(&default_path())
}
