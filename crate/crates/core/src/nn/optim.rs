use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OptimizerKind {
    Sgd,
    Adam,
    RmsProp,
}

impl OptimizerKind {
    /// Default learning rate for this rule.
    pub fn default_learning_rate(self) -> f64 {
        match self {
            OptimizerKind::Sgd => 1e-2,
            OptimizerKind::Adam | OptimizerKind::RmsProp => 1e-3,
        }
    }
}

impl FromStr for OptimizerKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "sgd" => Ok(OptimizerKind::Sgd),
            "adam" => Ok(OptimizerKind::Adam),
            "rmsprop" => Ok(OptimizerKind::RmsProp),
            other => Err(format!("unknown optimizer `{other}` (sgd|adam|rmsprop)")),
        }
    }
}

impl fmt::Display for OptimizerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OptimizerKind::Sgd => "sgd",
            OptimizerKind::Adam => "adam",
            OptimizerKind::RmsProp => "rmsprop",
        })
    }
}

pub const RMSPROP_DECAY: f64 = 0.9;
pub const ADAM_BETA1: f64 = 0.9;
pub const ADAM_BETA2: f64 = 0.999;
pub const STABILITY_EPS: f64 = 1e-8;

/// First-order optimizer over a flat parameter vector. All rules descend
/// the loss gradient.
#[derive(Debug, Clone)]
pub struct Optimizer {
    kind: OptimizerKind,
    learning_rate: f64,
    /// Adam first moment.
    first: Vec<f64>,
    /// Adam second moment / RMSProp running mean of squared gradients.
    second: Vec<f64>,
    steps: u64,
}

impl Optimizer {
    pub fn new(kind: OptimizerKind, learning_rate: f64, n_params: usize) -> Self {
        let (first, second) = match kind {
            OptimizerKind::Sgd => (Vec::new(), Vec::new()),
            OptimizerKind::RmsProp => (Vec::new(), vec![0.0; n_params]),
            OptimizerKind::Adam => (vec![0.0; n_params], vec![0.0; n_params]),
        };
        Self {
            kind,
            learning_rate,
            first,
            second,
            steps: 0,
        }
    }

    pub fn kind(&self) -> OptimizerKind {
        self.kind
    }

    pub fn learning_rate(&self) -> f64 {
        self.learning_rate
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn step(&mut self, params: &mut [f64], grads: &[f64]) {
        assert_eq!(params.len(), grads.len(), "parameter/gradient shape mismatch");
        self.steps += 1;
        let lr = self.learning_rate;
        match self.kind {
            OptimizerKind::Sgd => {
                for (p, &g) in params.iter_mut().zip(grads) {
                    *p -= lr * g;
                }
            }
            OptimizerKind::RmsProp => {
                assert_eq!(self.second.len(), params.len());
                for ((p, &g), s) in params.iter_mut().zip(grads).zip(self.second.iter_mut()) {
                    *s = RMSPROP_DECAY * *s + (1.0 - RMSPROP_DECAY) * g * g;
                    *p -= lr * g / (*s + STABILITY_EPS).sqrt();
                }
            }
            OptimizerKind::Adam => {
                assert_eq!(self.second.len(), params.len());
                let t = self.steps as i32;
                let c1 = 1.0 - ADAM_BETA1.powi(t);
                let c2 = 1.0 - ADAM_BETA2.powi(t);
                for (((p, &g), m), v) in params
                    .iter_mut()
                    .zip(grads)
                    .zip(self.first.iter_mut())
                    .zip(self.second.iter_mut())
                {
                    *m = ADAM_BETA1 * *m + (1.0 - ADAM_BETA1) * g;
                    *v = ADAM_BETA2 * *v + (1.0 - ADAM_BETA2) * g * g;
                    let m_hat = *m / c1;
                    let v_hat = *v / c2;
                    *p -= lr * m_hat / (v_hat.sqrt() + STABILITY_EPS);
                }
            }
        }
    }
}
