use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::policy::DecisionContext;
use crate::topology::NodeId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EncoderConfig {
    /// Action-history length.
    pub k: usize,
    /// Future-destination lookahead.
    pub m: usize,
    pub n_nodes: usize,
}

impl EncoderConfig {
    pub fn new(n_nodes: usize) -> Self {
        Self { k: 5, m: 5, n_nodes }
    }

    /// Width of a full four-block state.
    pub fn full_width(&self) -> usize {
        (1 + self.k + self.m + 1) * self.n_nodes
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DqrcVariant {
    Full,
    /// Max-queue block always zero.
    NoComm,
    /// Dense layer instead of the LSTM.
    NoLstm,
    /// Current destination only.
    Dqr,
}

impl DqrcVariant {
    pub const ALL: [DqrcVariant; 4] = [DqrcVariant::Full, DqrcVariant::NoComm, DqrcVariant::NoLstm, DqrcVariant::Dqr];

    pub fn as_str(self) -> &'static str {
        match self {
            DqrcVariant::Full => "full",
            DqrcVariant::NoComm => "no_comm",
            DqrcVariant::NoLstm => "no_lstm",
            DqrcVariant::Dqr => "dqr",
        }
    }

    /// Widths of the input blocks fed to the first layer.
    pub fn input_blocks(self, enc: &EncoderConfig) -> Vec<usize> {
        let n = enc.n_nodes;
        match self {
            DqrcVariant::Dqr => vec![n],
            _ => vec![n, enc.k * n, enc.m * n, n],
        }
    }

    pub fn input_width(self, enc: &EncoderConfig) -> usize {
        self.input_blocks(enc).iter().sum()
    }
}

impl fmt::Display for DqrcVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DqrcVariant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "full" => Ok(DqrcVariant::Full),
            "no_comm" | "nocomm" => Ok(DqrcVariant::NoComm),
            "no_lstm" | "nolstm" => Ok(DqrcVariant::NoLstm),
            "dqr" => Ok(DqrcVariant::Dqr),
            other => Err(format!("unknown variant `{other}` (full|no_comm|no_lstm|dqr)")),
        }
    }
}

/// Unit vector at `id`; all zeros for `None`.
pub fn one_hot(id: Option<NodeId>, n: usize) -> Vec<f64> {
    let mut v = vec![0.0; n];
    if let Some(id) = id {
        v[id.0] = 1.0;
    }
    v
}

/// Concatenated one-hot blocks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EncodedState(pub Vec<f64>);

impl EncodedState {
    /// All-zero state of the given width (terminal placeholder).
    pub fn zeros(width: usize) -> Self {
        Self(vec![0.0; width])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn width(&self) -> usize {
        self.0.len()
    }

    /// The `n`-wide sub-blocks in order.
    pub fn sub_blocks(&self, n: usize) -> impl Iterator<Item = &[f64]> {
        self.0.chunks(n)
    }
}

fn set(out: &mut [f64], slot: usize, n: usize, id: Option<NodeId>) {
    if let Some(id) = id {
        out[slot * n + id.0] = 1.0;
    }
}

/// Encodes what `ctx.node` sees when routing `ctx.packet`.
pub fn encode_state(ctx: &DecisionContext<'_>, enc: &EncoderConfig, variant: DqrcVariant) -> EncodedState {
    encode_parts(
        ctx.packet.dst,
        ctx.history,
        ctx.upcoming,
        match variant {
            DqrcVariant::NoComm | DqrcVariant::Dqr => None,
            _ => ctx.max_queue_neighbor(),
        },
        enc,
        variant,
    )
}

/// Encoding from raw parts; extra history/upcoming entries are ignored.
pub fn encode_parts(
    dst: NodeId,
    history: &[NodeId],
    upcoming: &[NodeId],
    max_queue: Option<NodeId>,
    enc: &EncoderConfig,
    variant: DqrcVariant,
) -> EncodedState {
    let n = enc.n_nodes;
    let mut out = vec![0.0; variant.input_width(enc)];
    set(&mut out, 0, n, Some(dst));
    if variant == DqrcVariant::Dqr {
        return EncodedState(out);
    }
    for (i, &a) in history.iter().take(enc.k).enumerate() {
        set(&mut out, 1 + i, n, Some(a));
    }
    for (i, &d) in upcoming.iter().take(enc.m).enumerate() {
        set(&mut out, 1 + enc.k + i, n, Some(d));
    }
    if variant != DqrcVariant::NoComm {
        set(&mut out, 1 + enc.k + enc.m, n, max_queue);
    }
    EncodedState(out)
}
