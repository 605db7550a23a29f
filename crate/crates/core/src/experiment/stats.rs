use serde::{Deserialize, Serialize};

/// Mean and sample standard deviation across seeds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    /// Seeds that delivered at least one packet.
    pub n: usize,
    pub mean: Option<f64>,
    /// `None` with fewer than two values.
    pub std: Option<f64>,
}

impl Summary {
    pub fn of(values: impl IntoIterator<Item = f64>) -> Self {
        let values: Vec<f64> = values.into_iter().collect();
        let n = values.len();
        if n == 0 {
            return Self { n, mean: None, std: None };
        }
        let mean = values.iter().sum::<f64>() / n as f64;
        let std = (n > 1).then(|| {
            let ss: f64 = values.iter().map(|v| (v - mean).powi(2)).sum();
            (ss / (n - 1) as f64).sqrt()
        });
        Self {
            n,
            mean: Some(mean),
            std,
        }
    }

    /// Standard error of the mean.
    pub fn std_error(&self) -> Option<f64> {
        self.std.map(|s| s / (self.n as f64).sqrt())
    }

    /// Text form of the standard deviation; `n/a` for a single seed.
    pub fn std_display(&self) -> String {
        match self.std {
            Some(s) => format!("{s:.4}"),
            None => "n/a".into(),
        }
    }
}

/// Trailing moving average over up to `window` most recent defined values.
pub fn moving_average(values: &[Option<f64>], window: usize) -> Vec<Option<f64>> {
    let window = window.max(1);
    (0..values.len())
        .map(|i| {
            let lo = (i + 1).saturating_sub(window);
            let (sum, n) = values[lo..=i]
                .iter()
                .flatten()
                .fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
            (n > 0).then(|| sum / n as f64)
        })
        .collect()
}
