//! Run manifests: what was run, with which resolved configuration, and what
//! it produced. Every output file carries the configuration hash.

use std::path::{Path, PathBuf};

use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::error::Result;
use crate::io::{write_json, Metadata};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq)]
pub struct RunManifest {
    pub subcommand: String,
    /// Resolved configuration as ordered key/value pairs.
    pub config: Vec<(String, String)>,
    pub seed: Option<u64>,
    pub tool_version: String,
    pub inputs: Vec<PathBuf>,
    /// Output paths with the SHA-256 of their contents.
    pub outputs: Vec<(PathBuf, String)>,
}

impl RunManifest {
    pub fn new(subcommand: &str, config: Vec<(String, String)>, seed: Option<u64>) -> Self {
        Self {
            subcommand: subcommand.to_owned(),
            config,
            seed,
            tool_version: TOOL_VERSION.to_owned(),
            inputs: Vec::new(),
            outputs: Vec::new(),
        }
    }

    pub fn record_output(&mut self, path: &Path, contents: &[u8]) {
        self.outputs.push((path.to_path_buf(), sha256_hex(contents)));
    }

    /// SHA-256 of the subcommand and the rendered configuration, hex encoded.
    pub fn config_hash(&self) -> String {
        let mut h = Sha256::new();
        h.update(self.subcommand.as_bytes());
        h.update(b"\n");
        for (k, v) in &self.config {
            h.update(format!("{k} = {v}\n").as_bytes());
        }
        hex::encode(h.finalize())
    }

    /// Header lines placed at the top of every output file.
    pub fn provenance(&self) -> Metadata {
        let mut m = vec![
            ("config_hash".to_owned(), self.config_hash()),
            ("subcommand".to_owned(), self.subcommand.clone()),
            ("tool_version".to_owned(), self.tool_version.clone()),
        ];
        if let Some(seed) = self.seed {
            m.push(("seed".to_owned(), seed.to_string()));
        }
        m
    }

    pub fn to_json(&self) -> Value {
        let inputs: Vec<String> = self.inputs.iter().map(|p| p.display().to_string()).collect();
        let outputs: Vec<Value> = self
            .outputs
            .iter()
            .map(|(p, d)| json!({ "path": p.display().to_string(), "sha256": d }))
            .collect();
        let config: serde_json::Map<String, Value> = self
            .config
            .iter()
            .map(|(k, v)| (k.clone(), Value::String(v.clone())))
            .collect();
        json!({
            "subcommand": self.subcommand,
            "config_hash": self.config_hash(),
            "config": config,
            "seed": self.seed,
            "tool_version": self.tool_version,
            "inputs": inputs,
            "outputs": outputs,
        })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        write_json(path, &self.to_json())
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}
