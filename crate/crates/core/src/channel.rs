//! Discrete doubly dispersive (linear time-varying) multipath channel.
//!
//! A path with gain `g`, integer delay `l` and normalized Doppler `f` (cycles
//! per `N`-sample payload) maps the prefixed frame `s` to
//! `r[m] = g·exp(i·2π·f·(m − L)/N)·s[m − l]`. The Doppler phase is indexed by
//! receive time and referenced to the first payload sample.

use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::invalid;
use crate::waveform::{cpp_phase, ensure_finite, WaveformParams};
use crate::{CMatrix, Complex64, Result};

/// Speed of light in m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathSpec {
    pub gain: Complex64,
    pub delay: usize,
    /// Cycles per frame; the integer part is the on-grid Doppler index.
    pub doppler: f64,
}

impl PathSpec {
    pub fn new(gain: Complex64, delay: usize, doppler: f64) -> Self {
        Self {
            gain,
            delay,
            doppler,
        }
    }

    /// Integer Doppler index if the Doppler lies on the grid (within 1e-12).
    pub fn integer_doppler(&self) -> Option<i64> {
        let r = self.doppler.round();
        ((self.doppler - r).abs() <= 1e-12).then_some(r as i64)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelModel {
    paths: Vec<PathSpec>,
    noise_variance: f64,
}

impl ChannelModel {
    pub fn new(paths: Vec<PathSpec>, noise_variance: f64) -> Result<Self> {
        if paths.is_empty() {
            return Err(invalid("channel needs at least one path"));
        }
        if !(noise_variance >= 0.0 && noise_variance.is_finite()) {
            return Err(invalid(format!(
                "noise variance must be finite and >= 0, got {noise_variance}"
            )));
        }
        let mut seen = HashSet::new();
        for (i, p) in paths.iter().enumerate() {
            if p.gain.norm() == 0.0 || !p.gain.re.is_finite() || !p.gain.im.is_finite() {
                return Err(invalid(format!(
                    "path {i}: gain must be finite and nonzero"
                )));
            }
            if !p.doppler.is_finite() {
                return Err(invalid(format!("path {i}: doppler must be finite")));
            }
            if !seen.insert((p.delay, p.doppler.to_bits())) {
                return Err(invalid(format!(
                    "path {i}: duplicate (delay {}, doppler {})",
                    p.delay, p.doppler
                )));
            }
        }
        Ok(Self {
            paths,
            noise_variance,
        })
    }

    /// Single unit-gain path with no delay or Doppler, no noise.
    pub fn identity() -> Self {
        Self {
            paths: vec![PathSpec::new(Complex64::new(1.0, 0.0), 0, 0.0)],
            noise_variance: 0.0,
        }
    }

    pub fn paths(&self) -> &[PathSpec] {
        &self.paths
    }

    pub fn noise_variance(&self) -> f64 {
        self.noise_variance
    }

    pub fn with_noise_variance(&self, noise_variance: f64) -> Result<Self> {
        Self::new(self.paths.clone(), noise_variance)
    }

    pub fn max_delay(&self) -> usize {
        self.paths.iter().map(|p| p.delay).max().unwrap_or(0)
    }

    /// Largest `|doppler|` over all paths.
    pub fn max_doppler(&self) -> f64 {
        self.paths
            .iter()
            .map(|p| p.doppler.abs())
            .fold(0.0, f64::max)
    }

    /// Gains rescaled so that `Σ|gain|² = 1`.
    pub fn normalized(&self) -> Self {
        let energy: f64 = self.paths.iter().map(|p| p.gain.norm_sqr()).sum();
        let scale = 1.0 / energy.sqrt();
        Self {
            paths: self
                .paths
                .iter()
                .map(|p| PathSpec {
                    gain: p.gain * scale,
                    ..*p
                })
                .collect(),
            noise_variance: self.noise_variance,
        }
    }

    fn check_against(&self, p: &WaveformParams) -> Result<()> {
        if self.max_delay() > p.cpp_len() {
            return Err(invalid(format!(
                "path delay {} exceeds cpp_len {}",
                self.max_delay(),
                p.cpp_len()
            )));
        }
        Ok(())
    }
}

/// Passes a prefixed frame (`N + L` samples) through the channel, adding
/// circularly symmetric Gaussian noise of variance `σ²` drawn from `noise_seed`.
pub fn apply_channel(
    s: &[Complex64],
    ch: &ChannelModel,
    p: &WaveformParams,
    noise_seed: u64,
) -> Result<Vec<Complex64>> {
    ch.check_against(p)?;
    if s.len() != p.frame_len() {
        return Err(invalid(format!(
            "channel input has length {}, expected n + cpp_len = {}",
            s.len(),
            p.frame_len()
        )));
    }
    ensure_finite(s, "channel input")?;
    let (n, l) = (p.n() as f64, p.cpp_len() as i64);
    let mut r = vec![Complex64::new(0.0, 0.0); s.len()];
    for path in &ch.paths {
        for (m, out) in r.iter_mut().enumerate().skip(path.delay) {
            let rot = doppler_phase(path.doppler, m as i64 - l, n);
            *out += path.gain * rot * s[m - path.delay];
        }
    }
    if ch.noise_variance > 0.0 {
        for (out, w) in r
            .iter_mut()
            .zip(complex_awgn(s.len(), ch.noise_variance, noise_seed))
        {
            *out += w;
        }
    }
    Ok(r)
}

/// Deterministic circularly symmetric complex Gaussian noise, `E|w|² = σ²`.
pub fn complex_awgn(len: usize, sigma2: f64, seed: u64) -> Vec<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sd = (sigma2 / 2.0).sqrt();
    (0..len)
        .map(|_| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            Complex64::new(re * sd, im * sd)
        })
        .collect()
}

fn doppler_phase(f: f64, t: i64, n: f64) -> Complex64 {
    if f == 0.0 {
        Complex64::new(1.0, 0.0)
    } else {
        let cycles = f * t as f64 / n;
        Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * (cycles - cycles.round()))
    }
}

/// The `N × N` payload-domain channel seen after prefix insertion, the channel
/// and prefix removal: `strip_cpp(apply_channel(add_cpp(s))) = H_t·s` (noiseless).
///
/// Row `j` gets `g·exp(i2πf·j/N)` at column `(j − l) mod N`; wrapped entries
/// (`j < l`) come from the prefix and carry its chirp phase.
pub fn time_channel_matrix(ch: &ChannelModel, p: &WaveformParams) -> Result<CMatrix> {
    ch.check_against(p)?;
    let n = p.n();
    let mut h = CMatrix::zeros(n, n);
    for path in &ch.paths {
        for j in 0..n {
            let mut v = path.gain * doppler_phase(path.doppler, j as i64, n as f64);
            let col = if j >= path.delay {
                j - path.delay
            } else {
                if p.c1() != 0.0 {
                    v *= cpp_phase(n, p.c1(), j as i64 - path.delay as i64);
                }
                j + n - path.delay
            };
            h[(j, col)] += v;
        }
    }
    Ok(h)
}

/// Doppler shift of a mobile at `speed_mps` on `carrier_hz`, as a fraction
/// of the subcarrier spacing (equivalently cycles per frame).
pub fn normalized_doppler(
    speed_mps: f64,
    carrier_hz: f64,
    subcarrier_spacing_hz: f64,
) -> Result<f64> {
    if !(speed_mps >= 0.0 && speed_mps.is_finite()) {
        return Err(invalid(format!("speed must be >= 0, got {speed_mps}")));
    }
    if !(carrier_hz > 0.0 && carrier_hz.is_finite()) {
        return Err(invalid(format!("carrier must be > 0, got {carrier_hz}")));
    }
    if !(subcarrier_spacing_hz > 0.0 && subcarrier_spacing_hz.is_finite()) {
        return Err(invalid(format!(
            "subcarrier spacing must be > 0, got {subcarrier_spacing_hz}"
        )));
    }
    Ok(speed_mps * carrier_hz / SPEED_OF_LIGHT / subcarrier_spacing_hz)
}
