use std::f64::consts::PI;

use rustfft::FftPlanner;

use super::wrap_centered;
use crate::error::invalid;
use crate::{Complex64, Error, Result};

/// Short-time Fourier analysis settings.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SpectrogramSpec {
    window_len: usize,
    hop: usize,
    fft_len: usize,
}

impl SpectrogramSpec {
    pub fn new(window_len: usize, hop: usize, fft_len: usize) -> Result<Self> {
        if window_len == 0 || hop == 0 || fft_len == 0 {
            return Err(invalid("spectrogram sizes must be positive"));
        }
        if fft_len < window_len {
            return Err(invalid(format!(
                "fft_len {fft_len} must be >= window_len {window_len}"
            )));
        }
        if hop > window_len {
            return Err(invalid(format!(
                "hop {hop} must be <= window_len {window_len}"
            )));
        }
        Ok(Self {
            window_len,
            hop,
            fft_len,
        })
    }

    pub fn window_len(&self) -> usize {
        self.window_len
    }

    pub fn hop(&self) -> usize {
        self.hop
    }

    pub fn fft_len(&self) -> usize {
        self.fft_len
    }
}

fn hann(len: usize) -> Vec<f64> {
    if len == 1 {
        return vec![1.0];
    }
    (0..len)
        .map(|k| 0.5 - 0.5 * (2.0 * PI * k as f64 / (len - 1) as f64).cos())
        .collect()
}

/// Hann-windowed power spectra, one row per window start `0, hop, 2·hop, …`.
pub fn spectrogram(x: &[Complex64], spec: &SpectrogramSpec) -> Vec<Vec<f64>> {
    let fft = FftPlanner::new().plan_fft_forward(spec.fft_len);
    let win = hann(spec.window_len);
    let mut rows = Vec::new();
    let mut start = 0;
    while start + spec.window_len <= x.len() {
        rows.push(window_power(x, start, &win, spec.fft_len, fft.as_ref()));
        start += spec.hop;
    }
    rows
}

fn window_power(
    x: &[Complex64],
    start: usize,
    win: &[f64],
    fft_len: usize,
    fft: &dyn rustfft::Fft<f64>,
) -> Vec<f64> {
    let mut buf = vec![Complex64::new(0.0, 0.0); fft_len];
    for (k, w) in win.iter().enumerate() {
        buf[k] = x[start + k] * *w;
    }
    fft.process(&mut buf);
    buf.iter().map(|z| z.norm_sqr()).collect()
}

/// Peak bin with parabolic (log-power) interpolation, in fractional bins.
fn peak_bin(power: &[f64]) -> f64 {
    let len = power.len();
    let k = (0..len)
        .max_by(|&a, &b| power[a].partial_cmp(&power[b]).unwrap())
        .unwrap_or(0);
    if len < 3 {
        return k as f64;
    }
    let lg = |i: usize| power[i].max(1e-300).ln();
    let (a, b, c) = (lg((k + len - 1) % len), lg(k), lg((k + 1) % len));
    let denom = a - 2.0 * b + c;
    let delta = if denom.abs() > 1e-12 {
        0.5 * (a - c) / denom
    } else {
        0.0
    };
    k as f64 + delta.clamp(-0.5, 0.5)
}

/// `doppler − 2·N·rate·delay`, wrapped into `(−N/2, N/2]` frame bins.
pub fn predicted_shift(chirp_rate: f64, delay: usize, doppler: f64, n: usize) -> f64 {
    let nf = n as f64;
    wrap_centered(doppler - 2.0 * nf * chirp_rate * delay as f64, nf)
}

/// Measures how far delay and Doppler move a discrete up-chirp's
/// instantaneous frequency.
///
/// The chirp `exp(i·2π·rate·k²)` of length `n` is cyclically delayed by
/// `delay` samples and modulated by `doppler` cycles per frame. The
/// spectral peak of the earliest window starting at or after the delay is
/// compared between the clean and perturbed signals. The result is in frame
/// bins (`1/n` cycles per sample), wrapped into `(−n/2, n/2]`.
pub fn measure_start_frequency_shift(
    chirp_rate: f64,
    delay: usize,
    doppler: f64,
    n: usize,
    spec: &SpectrogramSpec,
) -> Result<f64> {
    if !chirp_rate.is_finite() || !doppler.is_finite() {
        return Err(invalid("chirp rate and doppler must be finite"));
    }
    if spec.window_len > n / 4 {
        return Err(invalid(format!(
            "window_len {} must be <= n/4 = {}",
            spec.window_len,
            n / 4
        )));
    }
    if delay >= n {
        return Err(invalid(format!("delay {delay} must be < n = {n}")));
    }
    let nf = n as f64;
    let bin = nf / spec.fft_len as f64;
    let expected = predicted_shift(chirp_rate, delay, doppler, n);
    if expected != 0.0 && expected.abs() < bin {
        return Err(Error::Resolution {
            expected,
            bin,
            required_fft_len: (nf / expected.abs()).ceil() as usize,
        });
    }

    let chirp = |k: usize| {
        let cycles = chirp_rate * (k * k) as f64;
        Complex64::from_polar(1.0, 2.0 * PI * (cycles - cycles.round()))
    };
    let clean: Vec<Complex64> = (0..n).map(chirp).collect();
    let perturbed: Vec<Complex64> = (0..n)
        .map(|k| {
            let cycles = doppler * k as f64 / nf;
            clean[(k + n - delay) % n]
                * Complex64::from_polar(1.0, 2.0 * PI * (cycles - cycles.round()))
        })
        .collect();

    let start = delay.div_ceil(spec.hop) * spec.hop;
    if start + spec.window_len > n {
        return Err(invalid("no complete window after the delay"));
    }
    let fft = FftPlanner::new().plan_fft_forward(spec.fft_len);
    let win = hann(spec.window_len);
    let p0 = window_power(&clean, start, &win, spec.fft_len, fft.as_ref());
    let p1 = window_power(&perturbed, start, &win, spec.fft_len, fft.as_ref());
    let shift_bins = peak_bin(&p1) - peak_bin(&p0);
    Ok(wrap_centered(shift_bins * bin, nf))
}
