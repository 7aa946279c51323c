use std::collections::HashMap;

use super::effective::path_displacement;
use crate::channel::{time_channel_matrix, ChannelModel, PathSpec};
use crate::waveform::{Daft, Frame, FrameLayout, WaveformParams};
use crate::{Complex64, Error, Result};

/// Cyclic guard needed on each side of a pilot at index 0 so that neither
/// the pilot response leaks into data nor data leaks into the pilot response.
///
/// The pilot response spans diagonals `α_max` above and
/// `α_max + 2·N·c1·l_max` below the pilot, so data must stay clear of twice
/// that spread: `2·N·c1·l_max + 2·α_max`.
pub fn required_guard(p: &WaveformParams, l_max: usize, alpha_max: usize) -> Result<usize> {
    let shear = shear_of(p)?;
    Ok(shear as usize * l_max + 2 * alpha_max)
}

fn shear_of(p: &WaveformParams) -> Result<i64> {
    p.integer_shear().ok_or_else(|| {
        Error::UnsupportedRegime(format!(
            "single-pilot estimation needs integer 2·N·c1, got {}",
            2.0 * p.n() as f64 * p.c1()
        ))
    })
}

#[derive(Debug, Clone, Copy)]
struct GridPoint {
    delay: usize,
    doppler: i64,
    /// Effective-matrix entry `(d, 0)` of the unit-gain probe path.
    response: Complex64,
}

/// Precomputed displacement lookup for one layout and search grid.
#[derive(Debug, Clone)]
pub struct SinglePilotEstimator {
    params: WaveformParams,
    /// Diagonal index → grid point, in ascending diagonal order.
    lookup: Vec<(usize, GridPoint)>,
}

impl SinglePilotEstimator {
    pub fn new(
        layout: &FrameLayout,
        p: &WaveformParams,
        l_max: usize,
        alpha_max: usize,
    ) -> Result<Self> {
        if layout.n() != p.n() {
            return Err(Error::Configuration(format!(
                "layout has {} indices but n = {}",
                layout.n(),
                p.n()
            )));
        }
        if layout.pilot() != Some(0) {
            return Err(Error::Configuration(
                "estimation needs a pilot at index 0".into(),
            ));
        }
        if l_max > p.cpp_len() {
            return Err(Error::Configuration(format!(
                "l_max {l_max} exceeds cpp_len {}",
                p.cpp_len()
            )));
        }
        let need = required_guard(p, l_max, alpha_max)?;
        if layout.guard() < need {
            return Err(Error::Configuration(format!(
                "guard {} is below the required {need} for l_max {l_max}, alpha_max {alpha_max}",
                layout.guard()
            )));
        }
        let t = Daft::new(p);
        let n = p.n();
        let mut impulse = vec![Complex64::new(0.0, 0.0); n];
        impulse[0] = Complex64::new(1.0, 0.0);
        t.inverse_in_place(&mut impulse);

        let mut by_diag: HashMap<usize, GridPoint> = HashMap::new();
        let a = alpha_max as i64;
        for delay in 0..=l_max {
            for doppler in -a..=a {
                let d = path_displacement(delay, doppler, p)?;
                let probe = ChannelModel::new(
                    vec![PathSpec::new(
                        Complex64::new(1.0, 0.0),
                        delay,
                        doppler as f64,
                    )],
                    0.0,
                )?;
                let ht = time_channel_matrix(&probe, p)?;
                let mut col = (&ht * nalgebra::DVector::from_column_slice(&impulse))
                    .as_slice()
                    .to_vec();
                t.forward_in_place(&mut col);
                let gp = GridPoint {
                    delay,
                    doppler,
                    response: col[d],
                };
                if let Some(prev) = by_diag.insert(d, gp) {
                    return Err(Error::Configuration(format!(
                        "paths (l={}, α={}) and (l={delay}, α={doppler}) share diagonal {d}",
                        prev.delay, prev.doppler
                    )));
                }
            }
        }
        let mut lookup: Vec<(usize, GridPoint)> = by_diag.into_iter().collect();
        lookup.sort_by_key(|(d, _)| *d);
        Ok(Self { params: *p, lookup })
    }

    /// Reads paths off the pilot response. Entries at or below
    /// `threshold · max|y|` (max over the pilot response region) are ignored.
    pub fn estimate(
        &self,
        y: &[Complex64],
        pilot: Complex64,
        threshold: f64,
    ) -> Result<ChannelModel> {
        if y.len() != self.params.n() {
            return Err(Error::InvalidArgument(format!(
                "received frame has length {}, expected {}",
                y.len(),
                self.params.n()
            )));
        }
        if pilot.norm().is_nan() || pilot.norm() == 0.0 {
            return Err(Error::Configuration("pilot symbol is zero".into()));
        }
        let peak = self
            .lookup
            .iter()
            .map(|(d, _)| y[*d].norm())
            .fold(0.0, f64::max);
        if peak.is_nan() || peak == 0.0 {
            return Err(Error::EmptyChannel { threshold });
        }
        let paths: Vec<PathSpec> = self
            .lookup
            .iter()
            .filter(|(d, _)| y[*d].norm() > threshold * peak)
            .map(|(d, gp)| {
                PathSpec::new(y[*d] / (pilot * gp.response), gp.delay, gp.doppler as f64)
            })
            .collect();
        if paths.is_empty() {
            return Err(Error::EmptyChannel { threshold });
        }
        ChannelModel::new(paths, 0.0)
    }
}

/// One-shot single-pilot estimate. `frame` supplies the layout and the pilot
/// value; its data entries are ignored.
pub fn estimate_channel_single_pilot(
    y: &[Complex64],
    frame: &Frame,
    p: &WaveformParams,
    l_max: usize,
    alpha_max: usize,
    threshold: f64,
) -> Result<ChannelModel> {
    let est = SinglePilotEstimator::new(frame.layout(), p, l_max, alpha_max)?;
    est.estimate(y, frame.symbols()[0], threshold)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::apply_channel;
    use crate::link::{
        build_effective_channel, min_c1_full_diversity, Constellation, ConstellationKind,
    };
    use crate::waveform::{add_cpp, daft, idaft, strip_cpp};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn receive(frame: &Frame, ch: &ChannelModel, p: &WaveformParams, seed: u64) -> Vec<Complex64> {
        let s = add_cpp(&idaft(frame.symbols(), p).unwrap(), p).unwrap();
        daft(
            &strip_cpp(&apply_channel(&s, ch, p, seed).unwrap(), p).unwrap(),
            p,
        )
        .unwrap()
    }

    fn qpsk_frame(layout: FrameLayout, rng: &mut impl Rng) -> Frame {
        let qpsk = Constellation::new(ConstellationKind::Qpsk);
        let bits: Vec<bool> = (0..2 * layout.data_indices().len())
            .map(|_| rng.random())
            .collect();
        Frame::assemble(layout, &qpsk.map_bits(&bits).unwrap(), c(1.0, 0.0)).unwrap()
    }

    fn sorted(ch: &ChannelModel) -> Vec<PathSpec> {
        let mut v = ch.paths().to_vec();
        v.sort_by_key(|p| (p.delay, p.doppler as i64));
        v
    }

    #[test]
    fn recovers_single_path_exactly() {
        let n = 32;
        let (l_max, alpha_max) = (2, 1);
        let p = WaveformParams::new(n, min_c1_full_diversity(alpha_max, n).unwrap(), 0.0, l_max)
            .unwrap();
        let guard = required_guard(&p, l_max, alpha_max).unwrap();
        let layout = FrameLayout::single_pilot(n, guard).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let frame = qpsk_frame(layout, &mut rng);
        let truth = ChannelModel::new(vec![PathSpec::new(c(0.0, 0.8), 2, 1.0)], 0.0).unwrap();
        let y = receive(&frame, &truth, &p, 0);
        let est = estimate_channel_single_pilot(&y, &frame, &p, l_max, alpha_max, 0.1).unwrap();
        assert_eq!(est.paths().len(), 1);
        let got = est.paths()[0];
        assert_eq!((got.delay, got.doppler), (2, 1.0));
        assert!((got.gain - c(0.0, 0.8)).norm() < 1e-9);
    }

    #[test]
    fn identity_channel_estimate() {
        let p = WaveformParams::new(32, 3.0 / 64.0, 0.0, 2).unwrap();
        let layout = FrameLayout::single_pilot(32, required_guard(&p, 2, 1).unwrap()).unwrap();
        let frame = qpsk_frame(layout, &mut ChaCha8Rng::seed_from_u64(2));
        let y = receive(&frame, &ChannelModel::identity(), &p, 0);
        let est = estimate_channel_single_pilot(&y, &frame, &p, 2, 1, 0.1).unwrap();
        assert_eq!(est.paths().len(), 1);
        let g = est.paths()[0];
        assert_eq!((g.delay, g.doppler), (0, 0.0));
        assert!((g.gain - c(1.0, 0.0)).norm() < 1e-9);
    }

    #[test]
    fn estimate_rebuilds_effective_channel() {
        let n = 64;
        let (l_max, alpha_max) = (3, 2);
        let p = WaveformParams::new(n, min_c1_full_diversity(alpha_max, n).unwrap(), 0.3, l_max)
            .unwrap();
        let layout =
            FrameLayout::single_pilot(n, required_guard(&p, l_max, alpha_max).unwrap()).unwrap();
        let frame = qpsk_frame(layout, &mut ChaCha8Rng::seed_from_u64(3));
        let truth = ChannelModel::new(
            vec![
                PathSpec::new(c(0.6, 0.2), 0, -2.0),
                PathSpec::new(c(-0.3, 0.4), 1, 1.0),
                PathSpec::new(c(0.1, -0.5), 3, 0.0),
            ],
            0.0,
        )
        .unwrap();
        let y = receive(&frame, &truth, &p, 0);
        let est = estimate_channel_single_pilot(&y, &frame, &p, l_max, alpha_max, 0.05).unwrap();
        let (a, b) = (sorted(&est), sorted(&truth));
        assert_eq!(a.len(), b.len());
        for (x, t) in a.iter().zip(&b) {
            assert_eq!((x.delay, x.doppler), (t.delay, t.doppler));
            assert!((x.gain - t.gain).norm() < 1e-9);
        }
        let h_est = build_effective_channel(&est, &p).unwrap();
        let h_true = build_effective_channel(&truth, &p).unwrap();
        assert!((h_est.matrix - h_true.matrix).camax() < 1e-8);
    }

    #[test]
    fn noisy_three_path_detection_rate() {
        let n = 64;
        let (l_max, alpha_max) = (3, 2);
        let p = WaveformParams::new(n, min_c1_full_diversity(alpha_max, n).unwrap(), 0.0, l_max)
            .unwrap();
        let layout =
            FrameLayout::single_pilot(n, required_guard(&p, l_max, alpha_max).unwrap()).unwrap();
        let truth = ChannelModel::new(
            vec![
                PathSpec::new(c(0.7, 0.0), 0, 1.0),
                PathSpec::new(c(0.0, 0.5), 2, -2.0),
                PathSpec::new(c(-0.5, 0.0), 3, 0.0),
            ],
            1e-3, // 30 dB
        )
        .unwrap();
        let mut ok = 0;
        for seed in 0..100u64 {
            let frame = qpsk_frame(layout.clone(), &mut ChaCha8Rng::seed_from_u64(seed + 1000));
            let y = receive(&frame, &truth, &p, seed);
            if let Ok(est) = estimate_channel_single_pilot(&y, &frame, &p, l_max, alpha_max, 0.3) {
                let got: Vec<(usize, f64)> =
                    sorted(&est).iter().map(|q| (q.delay, q.doppler)).collect();
                let want: Vec<(usize, f64)> = sorted(&truth)
                    .iter()
                    .map(|q| (q.delay, q.doppler))
                    .collect();
                ok += (got == want) as usize;
            }
        }
        assert!(ok >= 95, "{ok}/100");
    }

    #[test]
    fn configuration_errors() {
        let p = WaveformParams::new(16, 3.0 / 32.0, 0.0, 2).unwrap();
        // guard too small
        let layout = FrameLayout::single_pilot(16, 3).unwrap();
        assert!(matches!(
            SinglePilotEstimator::new(&layout, &p, 2, 1),
            Err(Error::Configuration(_))
        ));
        // OFDM: every delay shares the Doppler diagonal
        let ofdm = WaveformParams::ofdm(16, 2).unwrap();
        let layout = FrameLayout::single_pilot(16, 4).unwrap();
        assert!(matches!(
            SinglePilotEstimator::new(&layout, &ofdm, 2, 1),
            Err(Error::Configuration(_))
        ));
        // no pilot
        assert!(SinglePilotEstimator::new(&FrameLayout::all_data(16), &p, 2, 1).is_err());
        // non-integer shear
        let odd = WaveformParams::new(16, 0.1, 0.0, 2).unwrap();
        let layout = FrameLayout::single_pilot(16, 7).unwrap();
        assert!(matches!(
            SinglePilotEstimator::new(&layout, &odd, 2, 1),
            Err(Error::UnsupportedRegime(_))
        ));
    }

    #[test]
    fn silent_frame_is_empty_channel() {
        let p = WaveformParams::new(32, 3.0 / 64.0, 0.0, 2).unwrap();
        let layout = FrameLayout::single_pilot(32, required_guard(&p, 2, 1).unwrap()).unwrap();
        let est = SinglePilotEstimator::new(&layout, &p, 2, 1).unwrap();
        let y = vec![c(0.0, 0.0); 32];
        assert!(matches!(
            est.estimate(&y, c(1.0, 0.0), 0.1),
            Err(Error::EmptyChannel { .. })
        ));
    }
}
