//! Run manifests written next to every output set.
//!
//! A manifest records the exact argument vector of the run, so `prr replay`
//! can regenerate the outputs.  The timestamp honours `SOURCE_DATE_EPOCH`,
//! which makes the manifest itself reproducible when that variable is set.

use std::collections::BTreeMap;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub geometry_path: String,
    pub parameters: BTreeMap<String, String>,
    pub output_paths: Vec<String>,
    /// Seconds since the Unix epoch.
    pub timestamp: u64,
    pub tool_version: String,
    /// Arguments after the program name.
    pub args: Vec<String>,
}

impl RunManifest {
    pub fn new(command: &str, geometry_path: &Path, args: &[String]) -> Self {
        Self {
            command: command.to_owned(),
            geometry_path: geometry_path.display().to_string(),
            parameters: BTreeMap::new(),
            output_paths: Vec::new(),
            timestamp: timestamp(),
            tool_version: env!("CARGO_PKG_VERSION").to_owned(),
            args: args.to_vec(),
        }
    }

    pub fn param(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.parameters.insert(key.to_owned(), value.to_string());
        self
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("manifest serializes");
        s.push('\n');
        s
    }

    pub fn read(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
        serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))
    }
}

fn timestamp() -> u64 {
    if let Some(epoch) = std::env::var("SOURCE_DATE_EPOCH")
        .ok()
        .and_then(|v| v.trim().parse().ok())
    {
        return epoch;
    }
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0, |d| d.as_secs())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_round_trip() {
        let mut m = RunManifest::new("workspace", Path::new("g.toml"), &["workspace".into()]);
        m.param("resolution", "20x20");
        m.output_paths.push("out.csv".into());
        let back: RunManifest = serde_json::from_str(&m.to_json()).unwrap();
        assert_eq!(back, m);
    }
}
