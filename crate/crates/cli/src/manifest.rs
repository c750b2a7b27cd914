// Copyright 2026 ionsim Contributors
// SPDX-License-Identifier: Apache-2.0

//! `manifest.json`: what was run and what it produced. No timestamps or host details,
//! so equal inputs give byte-identical manifests.

use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::commands::Artifact;
use crate::scenario::Scenario;

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Hash of the scenario after defaults and command-line overrides are applied.
pub fn config_hash(sc: &Scenario) -> String {
    sha256_hex(&serde_json::to_vec(sc).expect("serializable"))
}

pub fn build(command: &str, sc: &Scenario, outputs: &[Artifact]) -> Value {
    let files: Vec<Value> = outputs.iter().map(|(name, bytes)| json!({ "file": name, "sha256": sha256_hex(bytes), "bytes": bytes.len() })).collect();
    json!({
        "tool": "ionsim",
        "version": env!("CARGO_PKG_VERSION"),
        "core_version": ionsim_core::VERSION,
        "command": command,
        "scenario": sc.name,
        "config_sha256": config_hash(sc),
        "seed": sc.seed,
        "sweep": sc.sweep,
        "config": sc,
        "outputs": files,
    })
}
