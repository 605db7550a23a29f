use rand::Rng;
use serde::{Deserialize, Serialize};

use super::linalg::{accumulate_db, accumulate_dw, add_bias, matmul_dyw, matmul_xwt, sigmoid, MatRef};
use crate::error::NetError;
use crate::rng::SimRng;

/// Layer between the dense trunk and the output head.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RecurrentKind {
    Lstm,
    /// Plain ReLU layer of the same width; carries no state.
    Dense,
}

/// Shape of one agent network: block-diagonal first layer, dense trunk,
/// recurrent layer, linear head.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkSpec {
    /// Widths of the input blocks, in input order.
    pub input_blocks: Vec<usize>,
    /// Units per input block in the first layer.
    pub subset_width: usize,
    /// Widths of the dense layers between the first layer and the recurrent one.
    pub trunk_widths: Vec<usize>,
    pub recurrent: RecurrentKind,
    pub recurrent_width: usize,
    /// One output per neighbor.
    pub outputs: usize,
    /// Initial forget-gate bias.
    pub forget_bias: f64,
}

impl NetworkSpec {
    pub fn new(input_blocks: Vec<usize>, outputs: usize) -> Self {
        Self {
            input_blocks,
            subset_width: 32,
            trunk_widths: vec![128, 128],
            recurrent: RecurrentKind::Lstm,
            recurrent_width: 128,
            outputs,
            forget_bias: 1.0,
        }
    }

    pub fn input_width(&self) -> usize {
        self.input_blocks.iter().sum()
    }

    pub fn first_layer_width(&self) -> usize {
        self.input_blocks.len() * self.subset_width
    }

    /// Width of the state vectors carried between steps (0 without LSTM).
    pub fn state_width(&self) -> usize {
        match self.recurrent {
            RecurrentKind::Lstm => self.recurrent_width,
            RecurrentKind::Dense => 0,
        }
    }

    fn recurrent_input(&self) -> usize {
        self.trunk_widths.last().copied().unwrap_or_else(|| self.first_layer_width())
    }

    /// Closed-form parameter count.
    pub fn param_count(&self) -> usize {
        let s = self.subset_width;
        let fc1: usize = self.input_blocks.iter().map(|&w| s * w + s).sum();
        let mut prev = self.first_layer_width();
        let mut trunk = 0;
        for &w in &self.trunk_widths {
            trunk += w * prev + w;
            prev = w;
        }
        let h = self.recurrent_width;
        let rec = match self.recurrent {
            RecurrentKind::Lstm => 4 * h * (prev + h) + 4 * h,
            RecurrentKind::Dense => h * prev + h,
        };
        fc1 + trunk + rec + self.outputs * h + self.outputs
    }

    pub fn validate(&self) -> Result<(), NetError> {
        let bad = |what: &str| Err(NetError::Format(format!("network spec: {what}")));
        if self.input_blocks.is_empty() || self.input_blocks.contains(&0) {
            return bad("input blocks must be non-empty and positive");
        }
        if self.subset_width == 0 || self.recurrent_width == 0 || self.outputs == 0 {
            return bad("layer widths must be positive");
        }
        if self.trunk_widths.contains(&0) {
            return bad("trunk widths must be positive");
        }
        if !self.forget_bias.is_finite() {
            return bad("forget bias must be finite");
        }
        Ok(())
    }
}

/// Recurrent state carried between decisions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HiddenState {
    pub h: Vec<f64>,
    pub c: Vec<f64>,
}

impl HiddenState {
    pub fn zeros(width: usize) -> Self {
        Self {
            h: vec![0.0; width],
            c: vec![0.0; width],
        }
    }

    pub fn width(&self) -> usize {
        self.h.len()
    }

    pub fn reset(&mut self) {
        self.h.fill(0.0);
        self.c.fill(0.0);
    }

    pub fn is_zero(&self) -> bool {
        self.h.iter().chain(&self.c).all(|&x| x == 0.0)
    }
}

#[derive(Debug, Clone, Copy)]
struct Span {
    w: usize,
    b: usize,
}

#[derive(Debug, Clone)]
struct Layout {
    fc1: Vec<Span>,
    trunk: Vec<Span>,
    rec: Span,
    head: Span,
    total: usize,
}

impl Layout {
    fn new(spec: &NetworkSpec) -> Self {
        let mut at = 0;
        let mut span = |w_len: usize, b_len: usize| {
            let s = Span { w: at, b: at + w_len };
            at += w_len + b_len;
            s
        };
        let s = spec.subset_width;
        let fc1 = spec.input_blocks.iter().map(|&w| span(s * w, s)).collect();
        let mut prev = spec.first_layer_width();
        let mut trunk = Vec::new();
        for &w in &spec.trunk_widths {
            trunk.push(span(w * prev, w));
            prev = w;
        }
        let h = spec.recurrent_width;
        let rec = match spec.recurrent {
            RecurrentKind::Lstm => span(4 * h * (prev + h), 4 * h),
            RecurrentKind::Dense => span(h * prev, h),
        };
        let head = span(spec.outputs * h, spec.outputs);
        Self {
            fc1,
            trunk,
            rec,
            head,
            total: at,
        }
    }
}

/// Everything the backward pass needs from one batched forward pass.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    batch: usize,
    input: Vec<f64>,
    /// Post-ReLU activations: first layer, then each trunk layer.
    acts: Vec<Vec<f64>>,
    /// LSTM only: `[x, h_prev]` rows.
    rec_in: Vec<f64>,
    /// LSTM only: post-nonlinearity gates `[i, f, g, o]` per row.
    gates: Vec<f64>,
    c_prev: Vec<f64>,
    c_new: Vec<f64>,
    tanh_c: Vec<f64>,
    /// Recurrent layer output (LSTM `h'` or dense ReLU output).
    h_new: Vec<f64>,
    q: Vec<f64>,
}

impl ForwardCache {
    pub fn batch(&self) -> usize {
        self.batch
    }

    /// Output rows, `batch x outputs`.
    pub fn q_values(&self) -> &[f64] {
        &self.q
    }

    /// Recurrent state after the step for row `b`.
    pub fn state(&self, b: usize) -> HiddenState {
        let h = self.c_new.len() / self.batch.max(1);
        HiddenState {
            h: self.h_new[b * h..(b + 1) * h].to_vec(),
            c: self.c_new[b * h..(b + 1) * h].to_vec(),
        }
    }
}

/// Block-diagonal dense/LSTM Q-network with flat `f64` parameters.
#[derive(Debug, Clone)]
pub struct QNetwork {
    spec: NetworkSpec,
    layout: Layout,
    params: Vec<f64>,
}

impl QNetwork {
    /// All-zero parameters.
    pub fn zeros(spec: NetworkSpec) -> Result<Self, NetError> {
        spec.validate()?;
        let layout = Layout::new(&spec);
        debug_assert_eq!(layout.total, spec.param_count());
        Ok(Self {
            params: vec![0.0; layout.total],
            spec,
            layout,
        })
    }

    /// Glorot-uniform weights, zero biases, forget-gate bias set to `forget_bias`.
    pub fn new(spec: NetworkSpec, rng: &mut SimRng) -> Result<Self, NetError> {
        let mut net = Self::zeros(spec)?;
        let spec = net.spec.clone();
        let mut glorot = |params: &mut [f64], fan_in: usize, fan_out: usize| {
            let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
            for p in params {
                *p = rng.random_range(-limit..limit);
            }
        };
        let s = spec.subset_width;
        for (span, &w) in net.layout.fc1.clone().iter().zip(&spec.input_blocks) {
            glorot(&mut net.params[span.w..span.w + s * w], w, s);
        }
        let mut prev = spec.first_layer_width();
        for (span, &w) in net.layout.trunk.clone().iter().zip(&spec.trunk_widths) {
            glorot(&mut net.params[span.w..span.w + w * prev], prev, w);
            prev = w;
        }
        let h = spec.recurrent_width;
        let rec = net.layout.rec;
        match spec.recurrent {
            RecurrentKind::Lstm => {
                let z = prev + h;
                for gate in 0..4 {
                    let at = rec.w + gate * h * z;
                    glorot(&mut net.params[at..at + h * z], z, h);
                }
                net.params[rec.b + h..rec.b + 2 * h].fill(spec.forget_bias);
            }
            RecurrentKind::Dense => glorot(&mut net.params[rec.w..rec.w + h * prev], prev, h),
        }
        let head = net.layout.head;
        glorot(&mut net.params[head.w..head.w + spec.outputs * h], h, spec.outputs);
        Ok(net)
    }

    pub fn spec(&self) -> &NetworkSpec {
        &self.spec
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    pub fn param_count(&self) -> usize {
        self.params.len()
    }

    pub fn set_params(&mut self, params: &[f64]) -> Result<(), NetError> {
        if params.len() != self.params.len() {
            return Err(NetError::Shape {
                what: "parameters",
                expected: self.params.len(),
                actual: params.len(),
            });
        }
        self.params.copy_from_slice(params);
        Ok(())
    }

    pub fn zero_state(&self) -> HiddenState {
        HiddenState::zeros(self.spec.state_width())
    }

    /// Weight matrix of the first-layer subset for input block `block`,
    /// `subset_width x block_width`.
    pub fn first_layer_weights(&self, block: usize) -> &[f64] {
        let span = self.layout.fc1[block];
        &self.params[span.w..span.b]
    }

    /// One step for a single input.
    pub fn forward(&self, input: &[f64], state: &HiddenState) -> Result<(Vec<f64>, HiddenState), NetError> {
        let cache = self.forward_batch(input, std::slice::from_ref(state))?;
        let state = cache.state(0);
        Ok((cache.q, state))
    }

    /// One step for `states.len()` rows; `inputs` is row-major.
    pub fn forward_batch(&self, inputs: &[f64], states: &[HiddenState]) -> Result<ForwardCache, NetError> {
        let spec = &self.spec;
        let batch = states.len();
        let in_w = spec.input_width();
        if inputs.len() != batch * in_w {
            return Err(NetError::Shape {
                what: "input",
                expected: batch * in_w,
                actual: inputs.len(),
            });
        }
        let sw = spec.state_width();
        for st in states {
            if st.h.len() != sw || st.c.len() != sw {
                return Err(NetError::Shape {
                    what: "hidden state",
                    expected: sw,
                    actual: st.h.len().max(st.c.len()),
                });
            }
        }
        let p = &self.params;
        let s = spec.subset_width;

        // block-diagonal first layer
        let f1 = spec.first_layer_width();
        let mut a1 = vec![0.0; batch * f1];
        let mut col = 0;
        for (k, (&bw, span)) in spec.input_blocks.iter().zip(&self.layout.fc1).enumerate() {
            let x = MatRef::col_block(inputs, batch, in_w, col, bw);
            let w = MatRef::new(&p[span.w..span.b], s, bw);
            matmul_xwt(x, w, &mut a1[k * s..], f1, false);
            for r in 0..batch {
                let row = &mut a1[r * f1 + k * s..r * f1 + (k + 1) * s];
                for (o, &b) in row.iter_mut().zip(&p[span.b..span.b + s]) {
                    *o = (*o + b).max(0.0);
                }
            }
            col += bw;
        }

        let mut acts = vec![a1];
        let mut prev = f1;
        for (&w, span) in spec.trunk_widths.iter().zip(&self.layout.trunk) {
            let x = acts.last().expect("first layer present");
            let mut out = vec![0.0; batch * w];
            matmul_xwt(MatRef::new(x, batch, prev), MatRef::new(&p[span.w..span.b], w, prev), &mut out, w, false);
            add_bias(&mut out, batch, w, &p[span.b..span.b + w]);
            relu_in_place(&mut out);
            acts.push(out);
            prev = w;
        }

        let h = spec.recurrent_width;
        let rec = self.layout.rec;
        let x = acts.last().expect("first layer present");
        let mut cache = ForwardCache {
            batch,
            input: inputs.to_vec(),
            acts: Vec::new(),
            rec_in: Vec::new(),
            gates: Vec::new(),
            c_prev: Vec::new(),
            c_new: Vec::new(),
            tanh_c: Vec::new(),
            h_new: Vec::new(),
            q: Vec::new(),
        };
        match spec.recurrent {
            RecurrentKind::Lstm => {
                let z = prev + h;
                let mut rec_in = vec![0.0; batch * z];
                let mut c_prev = vec![0.0; batch * h];
                for (r, st) in states.iter().enumerate() {
                    rec_in[r * z..r * z + prev].copy_from_slice(&x[r * prev..(r + 1) * prev]);
                    rec_in[r * z + prev..(r + 1) * z].copy_from_slice(&st.h);
                    c_prev[r * h..(r + 1) * h].copy_from_slice(&st.c);
                }
                let mut gates = vec![0.0; batch * 4 * h];
                matmul_xwt(
                    MatRef::new(&rec_in, batch, z),
                    MatRef::new(&p[rec.w..rec.b], 4 * h, z),
                    &mut gates,
                    4 * h,
                    false,
                );
                add_bias(&mut gates, batch, 4 * h, &p[rec.b..rec.b + 4 * h]);
                let mut c_new = vec![0.0; batch * h];
                let mut tanh_c = vec![0.0; batch * h];
                let mut h_new = vec![0.0; batch * h];
                for r in 0..batch {
                    let g = &mut gates[r * 4 * h..(r + 1) * 4 * h];
                    for j in 0..h {
                        let i_g = sigmoid(g[j]);
                        let f_g = sigmoid(g[h + j]);
                        let c_g = g[2 * h + j].tanh();
                        let o_g = sigmoid(g[3 * h + j]);
                        g[j] = i_g;
                        g[h + j] = f_g;
                        g[2 * h + j] = c_g;
                        g[3 * h + j] = o_g;
                        let c = f_g * c_prev[r * h + j] + i_g * c_g;
                        let t = c.tanh();
                        c_new[r * h + j] = c;
                        tanh_c[r * h + j] = t;
                        h_new[r * h + j] = o_g * t;
                    }
                }
                cache.rec_in = rec_in;
                cache.gates = gates;
                cache.c_prev = c_prev;
                cache.c_new = c_new;
                cache.tanh_c = tanh_c;
                cache.h_new = h_new;
            }
            RecurrentKind::Dense => {
                let mut out = vec![0.0; batch * h];
                matmul_xwt(MatRef::new(x, batch, prev), MatRef::new(&p[rec.w..rec.b], h, prev), &mut out, h, false);
                add_bias(&mut out, batch, h, &p[rec.b..rec.b + h]);
                relu_in_place(&mut out);
                cache.h_new = out;
            }
        }

        let a = spec.outputs;
        let head = self.layout.head;
        let mut q = vec![0.0; batch * a];
        matmul_xwt(
            MatRef::new(&cache.h_new, batch, h),
            MatRef::new(&p[head.w..head.b], a, h),
            &mut q,
            a,
            false,
        );
        add_bias(&mut q, batch, a, &p[head.b..head.b + a]);
        cache.q = q;
        cache.acts = acts;
        Ok(cache)
    }

    /// Accumulates `d loss / d params` into `grads` given `d loss / d q`
    /// (`batch x outputs`). The incoming state is treated as a constant.
    pub fn backward(&self, cache: &ForwardCache, dq: &[f64], grads: &mut [f64]) -> Result<(), NetError> {
        let spec = &self.spec;
        let batch = cache.batch;
        let a = spec.outputs;
        if dq.len() != batch * a {
            return Err(NetError::Shape {
                what: "output gradient",
                expected: batch * a,
                actual: dq.len(),
            });
        }
        if grads.len() != self.params.len() {
            return Err(NetError::Shape {
                what: "gradient buffer",
                expected: self.params.len(),
                actual: grads.len(),
            });
        }
        let p = &self.params;
        let h = spec.recurrent_width;

        let head = self.layout.head;
        let dq_m = MatRef::new(dq, batch, a);
        accumulate_dw(dq_m, MatRef::new(&cache.h_new, batch, h), &mut grads[head.w..head.b]);
        accumulate_db(dq_m, &mut grads[head.b..head.b + a]);
        let mut dh = vec![0.0; batch * h];
        matmul_dyw(dq_m, MatRef::new(&p[head.w..head.b], a, h), &mut dh, h, false);

        let prev = spec.recurrent_input();
        let rec = self.layout.rec;
        let mut dx = vec![0.0; batch * prev];
        match spec.recurrent {
            RecurrentKind::Lstm => {
                let z = prev + h;
                let mut dg = vec![0.0; batch * 4 * h];
                for r in 0..batch {
                    let g = &cache.gates[r * 4 * h..(r + 1) * 4 * h];
                    let d = &mut dg[r * 4 * h..(r + 1) * 4 * h];
                    for j in 0..h {
                        let (i_g, f_g, c_g, o_g) = (g[j], g[h + j], g[2 * h + j], g[3 * h + j]);
                        let t = cache.tanh_c[r * h + j];
                        let dhj = dh[r * h + j];
                        let dc = dhj * o_g * (1.0 - t * t);
                        d[j] = dc * c_g * i_g * (1.0 - i_g);
                        d[h + j] = dc * cache.c_prev[r * h + j] * f_g * (1.0 - f_g);
                        d[2 * h + j] = dc * i_g * (1.0 - c_g * c_g);
                        d[3 * h + j] = dhj * t * o_g * (1.0 - o_g);
                    }
                }
                let dg_m = MatRef::new(&dg, batch, 4 * h);
                accumulate_dw(dg_m, MatRef::new(&cache.rec_in, batch, z), &mut grads[rec.w..rec.b]);
                accumulate_db(dg_m, &mut grads[rec.b..rec.b + 4 * h]);
                // only the columns acting on x; the incoming h is constant
                let w_x = MatRef::col_block(&p[rec.w..rec.b], 4 * h, z, 0, prev);
                matmul_dyw(dg_m, w_x, &mut dx, prev, false);
            }
            RecurrentKind::Dense => {
                relu_mask(&mut dh, &cache.h_new);
                let x = cache.acts.last().expect("first layer present");
                let d_m = MatRef::new(&dh, batch, h);
                accumulate_dw(d_m, MatRef::new(x, batch, prev), &mut grads[rec.w..rec.b]);
                accumulate_db(d_m, &mut grads[rec.b..rec.b + h]);
                matmul_dyw(d_m, MatRef::new(&p[rec.w..rec.b], h, prev), &mut dx, prev, false);
            }
        }

        // trunk, last to first; acts[i + 1] is trunk layer i's output
        let mut d_out = dx;
        for i in (0..spec.trunk_widths.len()).rev() {
            let w = spec.trunk_widths[i];
            let in_w = if i == 0 { spec.first_layer_width() } else { spec.trunk_widths[i - 1] };
            let span = self.layout.trunk[i];
            relu_mask(&mut d_out, &cache.acts[i + 1]);
            let d_m = MatRef::new(&d_out, batch, w);
            accumulate_dw(d_m, MatRef::new(&cache.acts[i], batch, in_w), &mut grads[span.w..span.b]);
            accumulate_db(d_m, &mut grads[span.b..span.b + w]);
            let mut d_in = vec![0.0; batch * in_w];
            matmul_dyw(d_m, MatRef::new(&p[span.w..span.b], w, in_w), &mut d_in, in_w, false);
            d_out = d_in;
        }

        let f1 = spec.first_layer_width();
        let s = spec.subset_width;
        relu_mask(&mut d_out, &cache.acts[0]);
        let in_w = spec.input_width();
        let mut col = 0;
        for (k, (&bw, span)) in spec.input_blocks.iter().zip(&self.layout.fc1).enumerate() {
            let d_m = MatRef::col_block(&d_out, batch, f1, k * s, s);
            let x = MatRef::col_block(&cache.input, batch, in_w, col, bw);
            accumulate_dw(d_m, x, &mut grads[span.w..span.b]);
            accumulate_db(d_m, &mut grads[span.b..span.b + s]);
            col += bw;
        }
        Ok(())
    }

    /// Loss `(y - Q(s, h, a))^2` and its gradient for one sample.
    pub fn action_gradient(
        &self,
        input: &[f64],
        state: &HiddenState,
        action: usize,
        target: f64,
    ) -> Result<(f64, Vec<f64>), NetError> {
        let cache = self.forward_batch(input, std::slice::from_ref(state))?;
        let (loss, dq) = td_loss(&cache, &[action], &[target], 1.0)?;
        let mut grads = vec![0.0; self.params.len()];
        self.backward(&cache, &dq, &mut grads)?;
        Ok((loss, grads))
    }
}

/// `scale * sum_b (y_b - Q_b[a_b])^2` and its gradient w.r.t. the outputs.
/// Only the selected output of each row receives signal.
pub fn td_loss(cache: &ForwardCache, actions: &[usize], targets: &[f64], scale: f64) -> Result<(f64, Vec<f64>), NetError> {
    let batch = cache.batch;
    if actions.len() != batch || targets.len() != batch {
        return Err(NetError::Shape {
            what: "batch targets",
            expected: batch,
            actual: actions.len().min(targets.len()),
        });
    }
    let a_w = cache.q.len() / batch.max(1);
    let mut dq = vec![0.0; cache.q.len()];
    let mut loss = 0.0;
    for (b, (&a, &y)) in actions.iter().zip(targets).enumerate() {
        if a >= a_w {
            return Err(NetError::Shape {
                what: "action index",
                expected: a_w,
                actual: a,
            });
        }
        let err = cache.q[b * a_w + a] - y;
        loss += err * err;
        dq[b * a_w + a] = 2.0 * scale * err;
    }
    Ok((scale * loss, dq))
}

fn relu_in_place(xs: &mut [f64]) {
    for x in xs {
        *x = x.max(0.0);
    }
}

/// Zeroes gradient entries whose ReLU output was not positive.
fn relu_mask(grad: &mut [f64], activation: &[f64]) {
    for (g, &a) in grad.iter_mut().zip(activation) {
        if a <= 0.0 {
            *g = 0.0;
        }
    }
}
