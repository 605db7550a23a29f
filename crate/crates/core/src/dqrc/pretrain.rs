use serde::{Deserialize, Serialize};

use super::encode::{encode_parts, DqrcVariant, EncoderConfig};
use super::policy::Dqrc;
use crate::error::NetError;
use crate::nn::{fit_epoch, FitSample, Optimizer, OptimizerKind};
use crate::rng::{substream, Substream};
use crate::topology::{hop_distances, HopDistanceTable, NodeId, Topology};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PretrainConfig {
    pub optimizer: OptimizerKind,
    pub learning_rate: f64,
    pub episodes: usize,
    pub batch_size: usize,
}

impl Default for PretrainConfig {
    fn default() -> Self {
        Self {
            optimizer: OptimizerKind::Adam,
            learning_rate: OptimizerKind::Adam.default_learning_rate(),
            episodes: 200,
            batch_size: 16,
        }
    }
}

/// Supervised examples for one node: destination-only input, target
/// `1 + dist(a, d)` ms through each neighbor `a`. Unreachable pairs are
/// left out of the loss.
pub fn pretrain_samples(
    topo: &Topology,
    table: &HopDistanceTable,
    node: NodeId,
    enc: &EncoderConfig,
    variant: DqrcVariant,
) -> Vec<FitSample> {
    topo.nodes()
        .filter(|&d| d != node)
        .map(|d| FitSample {
            input: encode_parts(d, &[], &[], None, enc, variant).0,
            target: topo
                .neighbors(node)
                .iter()
                .map(|&a| table.get(a, d).finite().map(|h| 1.0 + h as f64))
                .collect(),
        })
        .collect()
}

/// Fits every agent to shortest-path labels. Returns, per episode, the
/// loss averaged over agents.
pub fn pretrain(policy: &mut Dqrc, cfg: &PretrainConfig, seed: u64) -> Result<Vec<f64>, NetError> {
    let topo = policy.topology().clone();
    let table = hop_distances(&topo);
    let enc = policy.config().encoder;
    let variant = policy.config().variant;
    let data: Vec<Vec<FitSample>> = topo
        .nodes()
        .map(|u| pretrain_samples(&topo, &table, u, &enc, variant))
        .collect();
    let mut opts: Vec<Optimizer> = policy
        .agents()
        .iter()
        .map(|a| Optimizer::new(cfg.optimizer, cfg.learning_rate, a.net().param_count()))
        .collect();
    let mut rng = substream(seed, Substream::Pretrain);
    let mut curve = Vec::with_capacity(cfg.episodes);
    for _ in 0..cfg.episodes {
        let mut total = 0.0;
        for (agent, (samples, opt)) in policy.agents_mut().iter_mut().zip(data.iter().zip(&mut opts)) {
            total += fit_epoch(agent.net_mut(), samples, opt, cfg.batch_size, &mut rng)?;
        }
        curve.push(total / topo.n_nodes() as f64);
    }
    Ok(curve)
}
