use std::collections::BTreeSet;

use crate::link::{diagonal_centre, path_displacement, EffectiveChannel};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SparsityMetrics {
    /// Share of the `N²` entries above `rel_threshold · max|entry|`.
    pub significant_fraction: f64,
    /// Every path is on the integer grid, the paths sit on distinct
    /// diagonals, and significant entries occupy exactly those diagonals.
    pub per_path_separation: bool,
    /// Largest magnitude off the predicted diagonals, relative to the peak.
    pub max_offdiag_leakage: f64,
}

/// Predicted circular diagonal `(row − col) mod N` of each source path, and
/// whether that path is on the integer grid.
pub fn predicted_diagonals(h: &EffectiveChannel) -> Vec<(usize, bool)> {
    h.source
        .paths()
        .iter()
        .map(|path| match path.integer_doppler() {
            Some(alpha) => match path_displacement(path.delay, alpha, &h.params) {
                Ok(d) => (d, true),
                Err(_) => (diagonal_centre(path, &h.params), false),
            },
            None => (diagonal_centre(path, &h.params), false),
        })
        .collect()
}

pub fn sparsity_metrics(h: &EffectiveChannel, rel_threshold: f64) -> SparsityMetrics {
    let n = h.n();
    let predicted = predicted_diagonals(h);
    let on_grid = predicted.iter().all(|(_, g)| *g);
    let diags: BTreeSet<usize> = predicted.iter().map(|(d, _)| *d).collect();
    let distinct = diags.len() == predicted.len();

    let peak = h.matrix.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let cut = rel_threshold * peak;
    let mut significant = 0usize;
    let mut occupied = BTreeSet::new();
    let mut leak = 0.0f64;
    for r in 0..n {
        for c in 0..n {
            let m = h.matrix[(r, c)].norm();
            let d = (r + n - c) % n;
            if m > cut {
                significant += 1;
                occupied.insert(d);
            }
            if !diags.contains(&d) {
                leak = leak.max(m);
            }
        }
    }
    SparsityMetrics {
        significant_fraction: significant as f64 / (n * n) as f64,
        per_path_separation: on_grid && distinct && occupied == diags,
        max_offdiag_leakage: if peak > 0.0 { leak / peak } else { 0.0 },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{ChannelModel, PathSpec};
    use crate::link::{build_effective_channel, min_c1_full_diversity};
    use crate::waveform::WaveformParams;
    use crate::Complex64;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn identity_is_one_diagonal() {
        let p = WaveformParams::new(16, 3.0 / 32.0, 0.0, 2).unwrap();
        let h = build_effective_channel(&ChannelModel::identity(), &p).unwrap();
        let m = sparsity_metrics(&h, 0.01);
        assert_eq!(m.significant_fraction, 1.0 / 16.0);
        assert!(m.per_path_separation);
        assert!(m.max_offdiag_leakage < 1e-12);
    }

    #[test]
    fn grid_paths_under_diversity_rate() {
        let n = 32;
        let p = WaveformParams::new(n, min_c1_full_diversity(1, n).unwrap(), 0.2, 3).unwrap();
        let ch = ChannelModel::new(
            vec![
                PathSpec::new(c(0.6, 0.0), 0, 0.0),
                PathSpec::new(c(0.0, 0.5), 1, 1.0),
                PathSpec::new(c(-0.4, 0.3), 3, -1.0),
            ],
            0.0,
        )
        .unwrap();
        let m = sparsity_metrics(&build_effective_channel(&ch, &p).unwrap(), 0.01);
        assert_eq!(m.significant_fraction * (n * n) as f64, 3.0 * n as f64);
        assert!(m.per_path_separation);
        assert!(m.max_offdiag_leakage < 1e-9);
    }

    #[test]
    fn fractional_doppler_leaks() {
        let p = WaveformParams::new(32, 3.0 / 64.0, 0.0, 2).unwrap();
        let ch = ChannelModel::new(vec![PathSpec::new(c(1.0, 0.0), 1, 0.5)], 0.0).unwrap();
        let m = sparsity_metrics(&build_effective_channel(&ch, &p).unwrap(), 0.01);
        assert!(!m.per_path_separation);
        assert!(m.max_offdiag_leakage > 0.1, "{}", m.max_offdiag_leakage);
    }

    #[test]
    fn colliding_paths_are_not_separated() {
        // OFDM: two delays with the same Doppler share the main diagonal.
        let p = WaveformParams::ofdm(16, 2).unwrap();
        let ch = ChannelModel::new(
            vec![
                PathSpec::new(c(1.0, 0.0), 0, 0.0),
                PathSpec::new(c(0.5, 0.0), 2, 0.0),
            ],
            0.0,
        )
        .unwrap();
        let m = sparsity_metrics(&build_effective_channel(&ch, &p).unwrap(), 0.01);
        assert!(!m.per_path_separation);
    }
}
