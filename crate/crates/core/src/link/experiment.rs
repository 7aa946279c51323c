use std::time::Instant;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use super::effective::build_with;
use super::equalize::{equalize, EqualizerSpec};
use super::estimate::{required_guard, SinglePilotEstimator};
use super::{Constellation, ConstellationKind};
use crate::channel::{apply_channel, ChannelModel, PathSpec};
use crate::error::invalid;
use crate::waveform::{add_cpp, strip_cpp, Daft, Frame, FrameLayout, WaveformParams};
use crate::{Complex64, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Csi {
    Perfect,
    Estimated,
}

/// Pilot settings used when CSI is estimated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PilotSpec {
    /// Guard half-width; `None` picks [`required_guard`].
    pub guard: Option<usize>,
    pub boost_db: f64,
    /// Relative detection threshold for the estimator.
    pub threshold: f64,
}

impl Default for PilotSpec {
    fn default() -> Self {
        Self {
            guard: None,
            boost_db: 0.0,
            threshold: 0.2,
        }
    }
}

/// Per-trial random channel: uniform delays in `0..=l_max`, Rayleigh gains
/// with `E|g|² = 1/num_paths`, and Dopplers either on the integer grid
/// `−alpha_max..=alpha_max` or uniform in `±max_doppler` when `fractional`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RandomProfile {
    pub num_paths: usize,
    pub l_max: usize,
    pub alpha_max: usize,
    pub fractional: bool,
    /// Defaults to `alpha_max` when unset.
    pub max_doppler: Option<f64>,
}

impl RandomProfile {
    fn max_doppler(&self) -> f64 {
        self.max_doppler.unwrap_or(self.alpha_max as f64)
    }

    pub fn draw(&self, rng: &mut impl Rng) -> Result<ChannelModel> {
        let sd = (0.5 / self.num_paths as f64).sqrt();
        let mut paths: Vec<PathSpec> = Vec::with_capacity(self.num_paths);
        while paths.len() < self.num_paths {
            let delay = rng.random_range(0..=self.l_max);
            let doppler = if self.fractional {
                let f = self.max_doppler();
                if f > 0.0 {
                    rng.random_range(-f..=f)
                } else {
                    0.0
                }
            } else {
                let a = self.alpha_max as i64;
                rng.random_range(-a..=a) as f64
            };
            if paths
                .iter()
                .any(|p| p.delay == delay && p.doppler == doppler)
            {
                continue;
            }
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            let gain = Complex64::new(re * sd, im * sd);
            if gain.norm() == 0.0 {
                continue;
            }
            paths.push(PathSpec::new(gain, delay, doppler));
        }
        ChannelModel::new(paths, 0.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ChannelSpec {
    Explicit(ChannelModel),
    Random(RandomProfile),
}

impl ChannelSpec {
    /// Delay bound of the estimation grid.
    pub fn l_max(&self) -> usize {
        match self {
            ChannelSpec::Explicit(ch) => ch.max_delay(),
            ChannelSpec::Random(r) => r.l_max,
        }
    }

    /// Integer Doppler bound of the estimation grid and of `c1 = "auto"`:
    /// the largest Doppler magnitude rounded up.
    pub fn alpha_max(&self) -> usize {
        let up = |f: f64| (f - 1e-9).ceil().max(0.0) as usize;
        match self {
            ChannelSpec::Explicit(ch) => up(ch.max_doppler()),
            ChannelSpec::Random(r) => r.alpha_max.max(up(r.max_doppler())),
        }
    }
}

/// Declarative Monte-Carlo BER experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct BerExperiment {
    pub id: String,
    pub params: WaveformParams,
    pub channel: ChannelSpec,
    /// Rescale path gains to unit total energy in every trial.
    pub normalize_channel: bool,
    pub constellation: ConstellationKind,
    /// Es/N0 per affine-frequency symbol, in dB. `+inf` is noiseless.
    pub snr_db: Vec<f64>,
    /// Frames per SNR point.
    pub trials: usize,
    pub seed: u64,
    pub equalizer: EqualizerSpec,
    pub csi: Csi,
    pub pilot: PilotSpec,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRecord {
    pub experiment_id: String,
    pub snr_db: f64,
    pub trials: usize,
    pub total_bits: u64,
    pub bit_errors: u64,
    pub ber: f64,
    /// Trials dropped because equalization or estimation failed numerically.
    /// Their bits are not counted in `total_bits`.
    pub failed_trials: usize,
    pub wall_time_ms: u128,
}

impl BerExperiment {
    pub fn layout(&self) -> Result<FrameLayout> {
        match self.csi {
            Csi::Perfect => Ok(FrameLayout::all_data(self.params.n())),
            Csi::Estimated => {
                let guard = match self.pilot.guard {
                    Some(g) => g,
                    None => required_guard(
                        &self.params,
                        self.channel.l_max(),
                        self.channel.alpha_max(),
                    )?,
                };
                FrameLayout::single_pilot(self.params.n(), guard)
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(invalid("trials must be >= 1"));
        }
        if self.snr_db.is_empty()
            || self
                .snr_db
                .iter()
                .any(|s| s.is_nan() || *s == f64::NEG_INFINITY)
        {
            return Err(invalid(
                "snr_db must be a non-empty list of finite values or +inf",
            ));
        }
        if self.channel.l_max() > self.params.cpp_len() {
            return Err(invalid(format!(
                "channel delay {} exceeds cpp_len {}",
                self.channel.l_max(),
                self.params.cpp_len()
            )));
        }
        if let ChannelSpec::Random(r) = &self.channel {
            if r.num_paths == 0 {
                return Err(invalid("num_paths must be >= 1"));
            }
            let grid = (r.l_max + 1) * (2 * r.alpha_max + 1);
            if !r.fractional && r.num_paths > grid {
                return Err(invalid(format!(
                    "num_paths {} exceeds the {grid} distinct grid points",
                    r.num_paths
                )));
            }
            if let Some(f) = r.max_doppler {
                if !(f >= 0.0 && f.is_finite()) {
                    return Err(invalid("max_doppler must be finite and >= 0"));
                }
            }
        }
        if self.equalizer.band_halfwidth >= self.params.n() {
            return Err(invalid("band_halfwidth must be < n"));
        }
        let layout = self.layout()?;
        if self.csi == Csi::Estimated {
            SinglePilotEstimator::new(
                &layout,
                &self.params,
                self.channel.l_max(),
                self.channel.alpha_max(),
            )?;
        }
        if layout.data_indices().is_empty() {
            return Err(invalid("frame has no data indices"));
        }
        Ok(())
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of one trial: `splitmix64(seed ⊕ splitmix64(snr_index << 32 | trial))`.
///
/// Trials at the same index see the same channel, bits and noise across
/// experiments that share a seed, whatever the waveform.
pub fn trial_seed(seed: u64, snr_index: usize, trial: usize) -> u64 {
    splitmix64(seed ^ splitmix64(((snr_index as u64) << 32) | trial as u64))
}

struct Context<'a> {
    cfg: &'a BerExperiment,
    daft: Daft,
    constellation: Constellation,
    layout: FrameLayout,
    estimator: Option<SinglePilotEstimator>,
    pilot: Complex64,
}

impl Context<'_> {
    /// `Ok(None)` marks a numerically failed trial.
    fn trial(&self, seed: u64, sigma2: f64) -> Result<Option<(u64, u64)>> {
        let cfg = self.cfg;
        let p = &cfg.params;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut channel = match &cfg.channel {
            ChannelSpec::Explicit(ch) => ch.clone(),
            ChannelSpec::Random(r) => r.draw(&mut rng)?,
        };
        if cfg.normalize_channel {
            channel = channel.normalized();
        }
        let channel = channel.with_noise_variance(sigma2)?;

        let nbits = self.layout.data_indices().len() * self.constellation.bits_per_symbol();
        let bits: Vec<bool> = (0..nbits).map(|_| rng.random()).collect();
        let data = self.constellation.map_bits(&bits)?;
        let frame = Frame::assemble(self.layout.clone(), &data, self.pilot)?;

        let mut s = frame.symbols().to_vec();
        self.daft.inverse_in_place(&mut s);
        let tx = add_cpp(&s, p)?;
        let rx = apply_channel(&tx, &channel, p, rng.next_u64())?;
        let mut y = strip_cpp(&rx, p)?;
        self.daft.forward_in_place(&mut y);

        let csi = match &self.estimator {
            None => channel,
            Some(est) => match est.estimate(&y, self.pilot, cfg.pilot.threshold) {
                Ok(ch) => ch,
                Err(Error::EmptyChannel { .. }) => return Ok(None),
                Err(e) => return Err(e),
            },
        };
        let h = build_with(&csi, p, &self.daft)?;
        let x_hat = match equalize(&y, &h, sigma2, cfg.equalizer) {
            Ok(eq) => eq.symbols,
            Err(Error::IllConditioned(_)) => return Ok(None),
            Err(e) => return Err(e),
        };
        let decided = self
            .constellation
            .demap_symbols(&Frame::extract_data(&self.layout, &x_hat));
        let errors = decided.iter().zip(&bits).filter(|(a, b)| a != b).count();
        Ok(Some((nbits as u64, errors as u64)))
    }
}

/// Runs every SNR point of `cfg`. Trials execute on the current rayon pool;
/// results do not depend on the thread count.
pub fn run_ber_experiment(cfg: &BerExperiment) -> Result<Vec<ResultRecord>> {
    cfg.validate()?;
    let layout = cfg.layout()?;
    let estimator = match cfg.csi {
        Csi::Perfect => None,
        Csi::Estimated => Some(SinglePilotEstimator::new(
            &layout,
            &cfg.params,
            cfg.channel.l_max(),
            cfg.channel.alpha_max(),
        )?),
    };
    let ctx = Context {
        cfg,
        daft: Daft::new(&cfg.params),
        constellation: Constellation::new(cfg.constellation),
        layout,
        estimator,
        pilot: Complex64::new(10f64.powf(cfg.pilot.boost_db / 20.0), 0.0),
    };

    let mut records = Vec::with_capacity(cfg.snr_db.len());
    for (si, &snr_db) in cfg.snr_db.iter().enumerate() {
        let start = Instant::now();
        let sigma2 = 10f64.powf(-snr_db / 10.0);
        let outcomes: Vec<Result<Option<(u64, u64)>>> = (0..cfg.trials)
            .into_par_iter()
            .map(|t| ctx.trial(trial_seed(cfg.seed, si, t), sigma2))
            .collect();
        let (mut total_bits, mut bit_errors, mut failed) = (0u64, 0u64, 0usize);
        for o in outcomes {
            match o? {
                Some((b, e)) => {
                    total_bits += b;
                    bit_errors += e;
                }
                None => failed += 1,
            }
        }
        let ber = if total_bits == 0 {
            0.0
        } else {
            bit_errors as f64 / total_bits as f64
        };
        records.push(ResultRecord {
            experiment_id: cfg.id.clone(),
            snr_db,
            trials: cfg.trials,
            total_bits,
            bit_errors,
            ber,
            failed_trials: failed,
            wall_time_ms: start.elapsed().as_millis(),
        });
    }
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::link::{min_c1_full_diversity, EqualizerKind};

    fn base(channel: ChannelSpec) -> BerExperiment {
        BerExperiment {
            id: "t".into(),
            params: WaveformParams::new(32, min_c1_full_diversity(1, 32).unwrap(), 0.0, 2).unwrap(),
            channel,
            normalize_channel: true,
            constellation: ConstellationKind::Qpsk,
            snr_db: vec![f64::INFINITY],
            trials: 20,
            seed: 9,
            equalizer: EqualizerSpec::new(EqualizerKind::Mmse),
            csi: Csi::Perfect,
            pilot: PilotSpec::default(),
        }
    }

    fn grid_profile() -> ChannelSpec {
        ChannelSpec::Random(RandomProfile {
            num_paths: 3,
            l_max: 2,
            alpha_max: 1,
            fractional: false,
            max_doppler: None,
        })
    }

    #[test]
    fn seeds_are_mixed() {
        assert_ne!(trial_seed(1, 0, 0), trial_seed(1, 0, 1));
        assert_ne!(trial_seed(1, 0, 0), trial_seed(1, 1, 0));
        assert_eq!(trial_seed(5, 2, 3), trial_seed(5, 2, 3));
    }

    #[test]
    fn noiseless_perfect_csi_has_no_errors() {
        let rec = run_ber_experiment(&base(grid_profile())).unwrap();
        assert_eq!(rec[0].bit_errors, 0);
        assert_eq!(rec[0].total_bits, 20 * 64);
        assert_eq!(rec[0].ber, 0.0);
    }

    #[test]
    fn noiseless_estimated_csi_has_no_errors() {
        let mut cfg = base(grid_profile());
        cfg.params =
            WaveformParams::new(64, min_c1_full_diversity(1, 64).unwrap(), 0.0, 2).unwrap();
        cfg.csi = Csi::Estimated;
        cfg.pilot.threshold = 1e-6;
        let rec = run_ber_experiment(&cfg).unwrap();
        assert_eq!(rec[0].failed_trials, 0);
        assert_eq!(rec[0].bit_errors, 0);
        // pilot + 2·(3·2 + 2) guards leave 47 data symbols
        assert_eq!(rec[0].total_bits, 20 * 47 * 2);
    }

    #[test]
    fn independent_of_thread_count() {
        let mut cfg = base(grid_profile());
        cfg.snr_db = vec![5.0, 10.0];
        cfg.constellation = ConstellationKind::Qam16;
        let one = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap();
        let four = rayon::ThreadPoolBuilder::new()
            .num_threads(4)
            .build()
            .unwrap();
        let a = one.install(|| run_ber_experiment(&cfg)).unwrap();
        let b = four.install(|| run_ber_experiment(&cfg)).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert_eq!((x.total_bits, x.bit_errors), (y.total_bits, y.bit_errors));
            assert!(x.bit_errors > 0);
        }
    }

    #[test]
    fn zf_failures_are_recorded() {
        // Two equal-gain paths whose effective matrix is singular under OFDM:
        // H = 1 + exp(−iπk) vanishes on odd subcarriers.
        let ch = ChannelModel::new(
            vec![
                PathSpec::new(Complex64::new(1.0, 0.0), 0, 0.0),
                PathSpec::new(Complex64::new(1.0, 0.0), 16, 0.0),
            ],
            0.0,
        )
        .unwrap();
        let mut cfg = base(ChannelSpec::Explicit(ch));
        cfg.params = WaveformParams::ofdm(32, 16).unwrap();
        cfg.equalizer = EqualizerSpec::new(EqualizerKind::Zf);
        cfg.trials = 3;
        let rec = run_ber_experiment(&cfg).unwrap();
        assert_eq!(rec[0].failed_trials, 3);
        assert_eq!(rec[0].total_bits, 0);
    }

    #[test]
    fn validation() {
        let mut cfg = base(grid_profile());
        cfg.trials = 0;
        assert!(cfg.validate().is_err());
        let mut cfg = base(grid_profile());
        cfg.params = WaveformParams::new(32, 0.0, 0.0, 1).unwrap();
        assert!(cfg.validate().is_err());
        let mut cfg = base(grid_profile());
        cfg.snr_db.clear();
        assert!(cfg.validate().is_err());
        let mut cfg = base(grid_profile());
        cfg.csi = Csi::Estimated;
        cfg.params = WaveformParams::ofdm(32, 2).unwrap();
        assert!(matches!(cfg.validate(), Err(Error::Configuration(_))));
    }
}
