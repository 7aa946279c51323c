//! Structural checks on the waveform: the chirp displacement law, sparsity of
//! the effective channel, and matched-filter range-Doppler sensing.

mod sensing;
mod shift;
mod sparsity;

pub use sensing::{range_doppler_map, RangeDopplerMap};
pub use shift::{measure_start_frequency_shift, predicted_shift, spectrogram, SpectrogramSpec};
pub use sparsity::{predicted_diagonals, sparsity_metrics, SparsityMetrics};

/// Wraps a circular offset into `(−n/2, n/2]`.
pub(crate) fn wrap_centered(v: f64, n: f64) -> f64 {
    let w = v.rem_euclid(n);
    if w > n / 2.0 {
        w - n
    } else {
        w
    }
}
