use serde::{Deserialize, Serialize};

use super::traffic::Millis;
use crate::topology::NodeId;

/// One delivered packet.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Delivery {
    pub packet_id: u64,
    pub src: NodeId,
    pub dst: NodeId,
    pub created_at: Millis,
    pub delivered_at: Millis,
    pub hops: u32,
    /// Sum of per-hop rewards `q + l` credited along the way.
    pub reward_sum: Millis,
}

impl Delivery {
    pub fn delivery_time(&self) -> Millis {
        self.delivered_at - self.created_at
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub created: u64,
    pub deliveries: Vec<Delivery>,
}

impl Metrics {
    pub fn delivered_count(&self) -> usize {
        self.deliveries.len()
    }

    pub fn sum_delivery_time(&self) -> Millis {
        self.deliveries.iter().map(Delivery::delivery_time).sum()
    }

    /// `T = sum(t_p) / K` over every delivered packet.
    pub fn average_delivery_time(&self) -> Option<Millis> {
        mean(self.deliveries.iter().map(Delivery::delivery_time))
    }

    /// Mean delivery time of packets delivered in `[start, end)`; `None`
    /// when nothing was delivered in the window.
    pub fn window_average(&self, start: Millis, end: Millis) -> Option<Millis> {
        mean(self.window(start, end).map(Delivery::delivery_time))
    }

    pub fn window(&self, start: Millis, end: Millis) -> impl Iterator<Item = &Delivery> {
        self.deliveries
            .iter()
            .filter(move |d| d.delivered_at >= start && d.delivered_at < end)
    }

    /// Per-window statistics over consecutive windows of `width` covering
    /// `[0, horizon)`.
    pub fn windows(&self, width: Millis, horizon: Millis) -> Vec<WindowStat> {
        let n = (horizon / width).ceil() as usize;
        let mut stats: Vec<WindowStat> = (0..n)
            .map(|i| WindowStat {
                start: i as f64 * width,
                end: ((i + 1) as f64 * width).min(horizon),
                count: 0,
                sum: 0.0,
            })
            .collect();
        for d in &self.deliveries {
            if d.delivered_at < 0.0 || d.delivered_at >= horizon {
                continue;
            }
            let mut i = ((d.delivered_at / width) as usize).min(n - 1);
            // guard against float rounding at the window edges
            while i > 0 && d.delivered_at < stats[i].start {
                i -= 1;
            }
            while i + 1 < n && d.delivered_at >= stats[i].end {
                i += 1;
            }
            stats[i].count += 1;
            stats[i].sum += d.delivery_time();
        }
        stats
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindowStat {
    pub start: Millis,
    pub end: Millis,
    pub count: usize,
    pub sum: Millis,
}

impl WindowStat {
    pub fn mean(&self) -> Option<Millis> {
        (self.count > 0).then(|| self.sum / self.count as f64)
    }
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}
