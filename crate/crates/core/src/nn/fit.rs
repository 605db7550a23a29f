use rand::seq::SliceRandom;

use super::net::{HiddenState, QNetwork};
use super::optim::Optimizer;
use crate::error::NetError;
use crate::rng::SimRng;

/// One supervised example. `None` targets are excluded from the loss.
#[derive(Debug, Clone, PartialEq)]
pub struct FitSample {
    pub input: Vec<f64>,
    pub target: Vec<Option<f64>>,
}

/// Mean over samples of the per-sample mean squared error, zero state.
pub fn mean_squared_error(net: &QNetwork, samples: &[FitSample]) -> Result<f64, NetError> {
    if samples.is_empty() {
        return Ok(0.0);
    }
    let (inputs, states) = stack(net, samples.iter())?;
    let cache = net.forward_batch(&inputs, &states)?;
    let (loss, _) = masked_mse(cache.q_values(), samples.iter(), net.spec().outputs);
    Ok(loss)
}

/// One pass over `samples` in shuffled minibatches; one optimizer step per
/// minibatch. Returns the average pre-update loss.
pub fn fit_epoch(
    net: &mut QNetwork,
    samples: &[FitSample],
    opt: &mut Optimizer,
    batch_size: usize,
    rng: &mut SimRng,
) -> Result<f64, NetError> {
    if samples.is_empty() {
        return Ok(0.0);
    }
    let mut order: Vec<usize> = (0..samples.len()).collect();
    order.shuffle(rng);
    let mut grads = vec![0.0; net.param_count()];
    let mut total = 0.0;
    for chunk in order.chunks(batch_size.max(1)) {
        let batch = chunk.iter().map(|&i| &samples[i]);
        let (inputs, states) = stack(net, batch.clone())?;
        let cache = net.forward_batch(&inputs, &states)?;
        let (loss, dq) = masked_mse(cache.q_values(), batch, net.spec().outputs);
        total += loss * chunk.len() as f64;
        grads.fill(0.0);
        net.backward(&cache, &dq, &mut grads)?;
        opt.step(net.params_mut(), &grads);
    }
    Ok(total / samples.len() as f64)
}

/// Minimizes the mean squared error over all unmasked outputs. Returns the
/// per-epoch average loss.
pub fn supervised_fit(
    net: &mut QNetwork,
    samples: &[FitSample],
    opt: &mut Optimizer,
    epochs: usize,
    batch_size: usize,
    rng: &mut SimRng,
) -> Result<Vec<f64>, NetError> {
    (0..epochs)
        .map(|_| fit_epoch(net, samples, opt, batch_size, rng))
        .collect()
}

fn stack<'a>(
    net: &QNetwork,
    samples: impl Iterator<Item = &'a FitSample>,
) -> Result<(Vec<f64>, Vec<HiddenState>), NetError> {
    let spec = net.spec();
    let mut inputs = Vec::new();
    let mut states = Vec::new();
    for s in samples {
        if s.target.len() != spec.outputs {
            return Err(NetError::Shape {
                what: "target vector",
                expected: spec.outputs,
                actual: s.target.len(),
            });
        }
        inputs.extend_from_slice(&s.input);
        states.push(net.zero_state());
    }
    Ok((inputs, states))
}

/// Batch-mean of per-sample masked MSE, and its output gradient.
fn masked_mse<'a>(q: &[f64], samples: impl Iterator<Item = &'a FitSample>, width: usize) -> (f64, Vec<f64>) {
    let mut dq = vec![0.0; q.len()];
    let batch = q.len() / width;
    let mut loss = 0.0;
    for (b, s) in samples.enumerate() {
        let used = s.target.iter().flatten().count();
        if used == 0 {
            continue;
        }
        let scale = 1.0 / (used as f64 * batch as f64);
        for (a, y) in s.target.iter().enumerate() {
            if let Some(y) = y {
                let err = q[b * width + a] - y;
                loss += scale * err * err;
                dq[b * width + a] = 2.0 * scale * err;
            }
        }
    }
    (loss, dq)
}
