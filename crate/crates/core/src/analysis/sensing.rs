use rustfft::FftPlanner;

use crate::error::invalid;
use crate::waveform::{ensure_finite, ensure_len, WaveformParams};
use crate::{Complex64, Result};

/// Matched-filter output over delays `0..=l_max` and Dopplers
/// `−alpha_max..=alpha_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct RangeDopplerMap {
    /// `metric[l][α + alpha_max]`.
    pub metric: Vec<Vec<f64>>,
    pub l_max: usize,
    pub alpha_max: usize,
}

impl RangeDopplerMap {
    pub fn get(&self, delay: usize, doppler: i64) -> f64 {
        self.metric[delay][(doppler + self.alpha_max as i64) as usize]
    }

    /// Cell with the largest metric; the first one in (delay, doppler) order
    /// wins ties.
    pub fn argmax(&self) -> (usize, i64) {
        let mut best = (0, -(self.alpha_max as i64));
        let mut best_v = f64::NEG_INFINITY;
        for (l, row) in self.metric.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                if v > best_v {
                    best_v = v;
                    best = (l, j as i64 - self.alpha_max as i64);
                }
            }
        }
        best
    }

    /// `(delay, doppler, metric)` cells in row-major order.
    pub fn cells(&self) -> impl Iterator<Item = (usize, i64, f64)> + '_ {
        self.metric.iter().enumerate().flat_map(move |(l, row)| {
            row.iter()
                .enumerate()
                .map(move |(j, &v)| (l, j as i64 - self.alpha_max as i64, v))
        })
    }
}

/// `metric(l, α) = |Σ_m rx[m]·conj(tx[(m − l) mod N])·exp(−i·2π·α·m/N)|²`.
///
/// For each delay hypothesis the Doppler sum is one DFT of the lag product.
pub fn range_doppler_map(
    tx: &[Complex64],
    rx: &[Complex64],
    p: &WaveformParams,
    l_max: usize,
    alpha_max: usize,
) -> Result<RangeDopplerMap> {
    let n = p.n();
    ensure_len(tx, n, "sensing reference")?;
    ensure_len(rx, n, "sensing echo")?;
    ensure_finite(tx, "sensing reference")?;
    ensure_finite(rx, "sensing echo")?;
    if l_max > n / 2 || alpha_max > n / 2 {
        return Err(invalid(format!(
            "search bounds (l_max {l_max}, alpha_max {alpha_max}) must be <= n/2 = {}",
            n / 2
        )));
    }
    let fft = FftPlanner::new().plan_fft_forward(n);
    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    let a = alpha_max as i64;
    let metric = (0..=l_max)
        .map(|l| {
            for (m, b) in buf.iter_mut().enumerate() {
                *b = rx[m] * tx[(m + n - l) % n].conj();
            }
            fft.process(&mut buf);
            (-a..=a)
                .map(|alpha| buf[alpha.rem_euclid(n as i64) as usize].norm_sqr())
                .collect()
        })
        .collect();
    Ok(RangeDopplerMap {
        metric,
        l_max,
        alpha_max,
    })
}
