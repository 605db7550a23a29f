use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::{PolicyKind, ScenarioConfig};
use crate::dqrc::{load_policy, read_manifest, save_checkpoint, Dqrc, MANIFEST_FILE};
use crate::error::{Error, Result, SimError};
use crate::policy::{
    Backpressure, DecisionContext, HopFeedback, QRouting, QRoutingParams, QTable, RoutingPolicy, ShortestPath,
};
use crate::rng::SimRng;
use crate::topology::{NodeId, Topology};

/// Q-routing tables are saved as JSON under this name.
pub const QTABLE_FILE: &str = "q_table.json";

/// Any routing policy, cloneable so a trained instance can be copied into
/// independent test runs.
#[derive(Debug, Clone)]
pub enum PolicyInstance {
    ShortestPath(ShortestPath),
    Backpressure(Backpressure),
    QRouting(QRouting),
    Dqrc(Box<Dqrc>),
}

impl PolicyInstance {
    pub fn as_dqrc(&self) -> Option<&Dqrc> {
        match self {
            PolicyInstance::Dqrc(p) => Some(p),
            _ => None,
        }
    }

    pub fn as_dqrc_mut(&mut self) -> Option<&mut Dqrc> {
        match self {
            PolicyInstance::Dqrc(p) => Some(p),
            _ => None,
        }
    }

    fn inner(&self) -> &dyn RoutingPolicy {
        match self {
            PolicyInstance::ShortestPath(p) => p,
            PolicyInstance::Backpressure(p) => p,
            PolicyInstance::QRouting(p) => p,
            PolicyInstance::Dqrc(p) => p.as_ref(),
        }
    }

    fn inner_mut(&mut self) -> &mut dyn RoutingPolicy {
        match self {
            PolicyInstance::ShortestPath(p) => p,
            PolicyInstance::Backpressure(p) => p,
            PolicyInstance::QRouting(p) => p,
            PolicyInstance::Dqrc(p) => p.as_mut(),
        }
    }
}

impl RoutingPolicy for PolicyInstance {
    fn name(&self) -> &str {
        self.inner().name()
    }
    fn decide(&mut self, ctx: &DecisionContext<'_>, rng: &mut SimRng) -> std::result::Result<NodeId, SimError> {
        self.inner_mut().decide(ctx, rng)
    }
    fn on_hop(&mut self, hop: &HopFeedback<'_>, rng: &mut SimRng) {
        self.inner_mut().on_hop(hop, rng)
    }
    fn is_learning(&self) -> bool {
        self.inner().is_learning()
    }
    fn set_epsilon(&mut self, epsilon: f64) {
        self.inner_mut().set_epsilon(epsilon)
    }
    fn set_learning(&mut self, enabled: bool) {
        self.inner_mut().set_learning(enabled)
    }
    fn reset_episode(&mut self) {
        self.inner_mut().reset_episode()
    }
}

/// A fresh (untrained) policy for the scenario.
pub fn build_policy(cfg: &ScenarioConfig, topo: &Topology) -> Result<PolicyInstance> {
    Ok(match cfg.policy {
        PolicyKind::ShortestPath => PolicyInstance::ShortestPath(ShortestPath::new(topo)),
        PolicyKind::Backpressure => PolicyInstance::Backpressure(Backpressure::new(topo)),
        PolicyKind::QRouting => PolicyInstance::QRouting(QRouting::new(topo, cfg.q_params())),
        PolicyKind::Dqrc(_) => {
            let dcfg = cfg.dqrc_config(topo.n_nodes()).expect("dqrc policy");
            PolicyInstance::Dqrc(Box::new(Dqrc::new(topo, dcfg, cfg.seed)?))
        }
    })
}

#[derive(Serialize, Deserialize)]
struct SavedTable {
    topology_name: String,
    topology_hash: String,
    params: QRoutingParams,
    table: QTable,
}

fn io_err(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.display().to_string(),
        source,
    }
}

/// Writes a learned policy to `dir`. Non-learning policies have nothing to save.
pub fn save_trained(policy: &PolicyInstance, topo: &Topology, dir: &Path) -> Result<()> {
    match policy {
        PolicyInstance::Dqrc(p) => save_checkpoint(p, dir),
        PolicyInstance::QRouting(p) => {
            fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
            let saved = SavedTable {
                topology_name: topo.name().to_string(),
                topology_hash: topo.content_hash(),
                params: p.params(),
                table: p.table().clone(),
            };
            let path = dir.join(QTABLE_FILE);
            fs::write(&path, serde_json::to_string(&saved)?).map_err(|e| io_err(&path, e))
        }
        _ => Ok(()),
    }
}

/// Loads the scenario's learned policy from `dir`, checking topology and
/// variant. `Ok(None)` when `dir` holds no checkpoint for this policy kind.
pub fn load_trained(cfg: &ScenarioConfig, topo: &Topology, dir: &Path) -> Result<Option<PolicyInstance>> {
    match cfg.policy {
        PolicyKind::Dqrc(variant) => {
            if !dir.join(MANIFEST_FILE).exists() {
                return Ok(None);
            }
            let manifest = read_manifest(dir)?;
            if manifest.config.variant != variant {
                return Err(Error::Checkpoint(format!(
                    "checkpoint holds variant {}, scenario asks for {variant}",
                    manifest.config.variant
                )));
            }
            let mut policy = load_policy(dir, topo, cfg.seed)?;
            for agent in policy.agents_mut() {
                agent.reset_optimizer(cfg.hyper.optimizer, cfg.hyper.learning_rate);
            }
            Ok(Some(PolicyInstance::Dqrc(Box::new(policy))))
        }
        PolicyKind::QRouting => {
            let path = dir.join(QTABLE_FILE);
            if !path.exists() {
                return Ok(None);
            }
            let text = fs::read_to_string(&path).map_err(|e| io_err(&path, e))?;
            let saved: SavedTable = serde_json::from_str(&text)?;
            if saved.topology_hash != topo.content_hash() || !saved.table.fits(topo) {
                return Err(Error::Checkpoint(format!(
                    "q-table was trained on topology {}, not {}",
                    saved.topology_name,
                    topo.name()
                )));
            }
            let mut policy = QRouting::new(topo, cfg.q_params());
            *policy.table_mut() = saved.table;
            Ok(Some(PolicyInstance::QRouting(policy)))
        }
        _ => Ok(None),
    }
}
