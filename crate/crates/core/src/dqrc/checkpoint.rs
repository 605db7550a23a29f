//! Checkpoint directory: `manifest.json` plus one `agent_<id>.params` per
//! router.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::policy::{Dqrc, DqrcConfig};
use crate::error::{Error, Result};
use crate::nn::{load_params, save_params, QNetwork};
use crate::topology::Topology;

pub const MANIFEST_FILE: &str = "manifest.json";
const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckpointManifest {
    pub format_version: u32,
    pub topology_name: String,
    pub topology_hash: String,
    pub n_nodes: usize,
    pub config: DqrcConfig,
}

pub fn agent_file(dir: &Path, node: usize) -> PathBuf {
    dir.join(format!("agent_{node}.params"))
}

fn io_err(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.display().to_string(),
        source,
    }
}

pub fn save_checkpoint(policy: &Dqrc, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    let topo = policy.topology();
    let manifest = CheckpointManifest {
        format_version: FORMAT_VERSION,
        topology_name: topo.name().to_string(),
        topology_hash: topo.content_hash(),
        n_nodes: topo.n_nodes(),
        config: *policy.config(),
    };
    let path = dir.join(MANIFEST_FILE);
    fs::write(&path, serde_json::to_string_pretty(&manifest)?).map_err(|e| io_err(&path, e))?;
    for agent in policy.agents() {
        save_params(agent.net(), &agent_file(dir, agent.node().0))?;
    }
    Ok(())
}

pub fn read_manifest(dir: &Path) -> Result<CheckpointManifest> {
    let path = dir.join(MANIFEST_FILE);
    let text = fs::read_to_string(&path).map_err(|e| io_err(&path, e))?;
    let manifest: CheckpointManifest = serde_json::from_str(&text)?;
    if manifest.format_version != FORMAT_VERSION {
        return Err(Error::Checkpoint(format!("unsupported format version {}", manifest.format_version)));
    }
    Ok(manifest)
}

/// Loads agent networks after checking the checkpoint was made for `topo`.
pub fn load_checkpoint(dir: &Path, topo: &Topology) -> Result<(DqrcConfig, Vec<QNetwork>)> {
    let manifest = read_manifest(dir)?;
    let hash = topo.content_hash();
    if manifest.topology_hash != hash {
        return Err(Error::Checkpoint(format!(
            "checkpoint was trained on topology {} ({}), not {} ({hash})",
            manifest.topology_name,
            manifest.topology_hash,
            topo.name()
        )));
    }
    let nets = (0..manifest.n_nodes)
        .map(|u| load_params(&agent_file(dir, u)))
        .collect::<Result<Vec<_>, _>>()?;
    Ok((manifest.config, nets))
}

/// Rebuilds a policy from a checkpoint; `seed` drives replay sampling.
pub fn load_policy(dir: &Path, topo: &Topology, seed: u64) -> Result<Dqrc> {
    let (cfg, nets) = load_checkpoint(dir, topo)?;
    Dqrc::from_networks(topo, cfg, nets, seed)
}
