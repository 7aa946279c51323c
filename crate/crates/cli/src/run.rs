//! Subcommand dispatch.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use afdm::analysis::{
    measure_start_frequency_shift, predicted_shift, range_doppler_map, sparsity_metrics,
    SpectrogramSpec,
};
use afdm::channel::{apply_channel, ChannelModel};
use afdm::link::{build_effective_channel, run_ber_experiment, ChannelSpec, Constellation};
use afdm::waveform::{add_cpp, idaft, strip_cpp, WaveformParams};
use afdm::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;
use thiserror::Error as ThisError;

use crate::config::{parse_config, ExperimentConfig};
use crate::output::{fmt_f64, write_artifact, write_manifest, Artifact, Csv, Manifest};

/// Entries of the effective channel below this fraction of the peak
/// magnitude are treated as zero in `effchan.csv` and in the sweep metrics.
pub const ZERO_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subcommand {
    Ber,
    Effchan,
    Sense,
    Shift,
    SweepC1,
}

impl Subcommand {
    pub fn name(self) -> &'static str {
        match self {
            Subcommand::Ber => "ber",
            Subcommand::Effchan => "effchan",
            Subcommand::Sense => "sense",
            Subcommand::Shift => "shift",
            Subcommand::SweepC1 => "sweep-c1",
        }
    }

    pub fn artifact(self) -> &'static str {
        match self {
            Subcommand::Ber => "ber.csv",
            Subcommand::Effchan => "effchan.csv",
            Subcommand::Sense => "sense.csv",
            Subcommand::Shift => "shift.csv",
            Subcommand::SweepC1 => "sweep_c1.csv",
        }
    }
}

impl fmt::Display for Subcommand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, ThisError)]
pub enum CliError {
    #[error("I/O error: {0}")]
    Io(String),
    #[error("validation error: {0}")]
    Validation(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io(_) => 2,
            CliError::Validation(_) => 3,
            CliError::Numerical(_) => 4,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::IllConditioned(_) | Error::EmptyChannel { .. } | Error::Resolution { .. } => {
                CliError::Numerical(e.to_string())
            }
            _ => CliError::Validation(e.to_string()),
        }
    }
}

fn io_err(path: &Path, e: std::io::Error) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub config: PathBuf,
    pub out: PathBuf,
    pub seed: Option<u64>,
    /// Worker threads; `None` uses the global rayon pool.
    pub threads: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub artifacts: Vec<Artifact>,
    pub warnings: Vec<String>,
}

/// Runs one subcommand end to end: parse, compute, write the CSV artifact
/// and `run-manifest.json` into `opts.out`.
pub fn run(cmd: Subcommand, opts: &RunOptions) -> Result<RunSummary, CliError> {
    let text = fs::read_to_string(&opts.config).map_err(|e| io_err(&opts.config, e))?;
    let mut cfg = parse_config(&text).map_err(|e| CliError::Validation(e.to_string()))?;
    if let Some(seed) = opts.seed {
        cfg.experiment.seed = seed;
    }
    if opts.threads == Some(0) {
        return Err(CliError::Validation("threads must be >= 1".into()));
    }

    let compute = || match cmd {
        Subcommand::Ber => ber(&cfg),
        Subcommand::Effchan => effchan(&cfg),
        Subcommand::Sense => sense(&cfg),
        Subcommand::Shift => shift(&cfg),
        Subcommand::SweepC1 => sweep_c1(&cfg),
    };
    let (csv, warnings) = match opts.threads {
        Some(k) => rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build()
            .map_err(|e| CliError::Io(format!("thread pool: {e}")))?
            .install(compute)?,
        None => compute()?,
    };

    fs::create_dir_all(&opts.out).map_err(|e| io_err(&opts.out, e))?;
    let artifact = write_artifact(&opts.out, cmd.artifact(), csv.as_bytes())
        .map_err(|e| io_err(&opts.out, e))?;
    let manifest = Manifest {
        tool: "afdm".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        subcommand: cmd.name().into(),
        experiment_id: cfg.experiment.id.clone(),
        seed: cfg.experiment.seed,
        config_sha256: crate::output::sha256_hex(text.as_bytes()),
        config: text,
        resolved: resolved(&cfg),
        artifacts: vec![artifact.clone()],
    };
    write_manifest(&opts.out, &manifest).map_err(|e| io_err(&opts.out, e))?;
    Ok(RunSummary {
        artifacts: vec![artifact],
        warnings,
    })
}

fn resolved(cfg: &ExperimentConfig) -> serde_json::Value {
    let e = &cfg.experiment;
    let p = &e.params;
    json!({
        "waveform": {
            "n": p.n(),
            "c1": p.c1(),
            "c1_auto": cfg.c1_auto,
            "c2": p.c2(),
            "cpp_len": p.cpp_len(),
        },
        "channel": {
            "l_max": e.channel.l_max(),
            "alpha_max": e.channel.alpha_max(),
            "normalize_channel": e.normalize_channel,
        },
        "modulation": format!("{:?}", e.constellation),
        "snr_db": e.snr_db,
        "trials": e.trials,
        "equalizer": {
            "kind": format!("{:?}", e.equalizer.kind),
            "band_halfwidth": e.equalizer.band_halfwidth,
        },
        "csi": format!("{:?}", e.csi),
        "pilot": {
            "guard": e.pilot.guard,
            "boost_db": e.pilot.boost_db,
            "threshold": e.pilot.threshold,
        },
        "sensing": { "l_max": cfg.sensing.l_max, "alpha_max": cfg.sensing.alpha_max },
        "shift": {
            "chirp_rates": cfg.shift.chirp_rates,
            "delays": cfg.shift.delays,
            "dopplers": cfg.shift.dopplers,
            "window_len": cfg.shift.window_len,
            "hop": cfg.shift.hop,
            "fft_len": cfg.shift.fft_len,
        },
    })
}

type Computed = Result<(Csv, Vec<String>), CliError>;

/// The configured channel, or one draw of the random profile from `seed`.
fn realize_channel(cfg: &ExperimentConfig, rng: &mut ChaCha8Rng) -> Result<ChannelModel, Error> {
    let ch = match &cfg.experiment.channel {
        ChannelSpec::Explicit(ch) => ch.clone(),
        ChannelSpec::Random(r) => r.draw(rng)?,
    };
    Ok(if cfg.experiment.normalize_channel {
        ch.normalized()
    } else {
        ch
    })
}

fn ber(cfg: &ExperimentConfig) -> Computed {
    let records = run_ber_experiment(&cfg.experiment)?;
    let mut csv = Csv::new(&["snr_db", "trials", "total_bits", "bit_errors", "ber"]);
    let mut warnings = Vec::new();
    for r in &records {
        if r.failed_trials > 0 {
            warnings.push(format!(
                "{} of {} trials at {} dB failed numerically and were excluded",
                r.failed_trials, r.trials, r.snr_db
            ));
        }
        csv.row(&[
            fmt_f64(r.snr_db),
            r.trials.to_string(),
            r.total_bits.to_string(),
            r.bit_errors.to_string(),
            fmt_f64(r.ber),
        ]);
    }
    Ok((csv, warnings))
}

fn effchan(cfg: &ExperimentConfig) -> Computed {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.experiment.seed);
    let ch = realize_channel(cfg, &mut rng)?;
    let h = build_effective_channel(&ch, &cfg.experiment.params)?;
    let peak = h.matrix.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let mut csv = Csv::new(&["row", "col", "re", "im", "mag"]);
    let n = h.n();
    for r in 0..n {
        for c in 0..n {
            let z = h.matrix[(r, c)];
            if z.norm() > ZERO_TOLERANCE * peak {
                csv.row(&[
                    r.to_string(),
                    c.to_string(),
                    fmt_f64(z.re),
                    fmt_f64(z.im),
                    fmt_f64(z.norm()),
                ]);
            }
        }
    }
    Ok((csv, Vec::new()))
}

/// One QPSK/QAM frame is sent through the channel at the first listed SNR
/// and matched against its transmitted time-domain samples.
fn sense(cfg: &ExperimentConfig) -> Computed {
    let e = &cfg.experiment;
    let p = &e.params;
    let mut rng = ChaCha8Rng::seed_from_u64(e.seed);
    let ch = realize_channel(cfg, &mut rng)?;
    let constellation = Constellation::new(e.constellation);
    let bits: Vec<bool> = (0..p.n() * constellation.bits_per_symbol())
        .map(|_| rng.random())
        .collect();
    let x = constellation.map_bits(&bits)?;
    let tx = idaft(&x, p)?;
    let sigma2 = 10f64.powf(-e.snr_db[0] / 10.0);
    let ch = ch.with_noise_variance(sigma2)?;
    let rx = strip_cpp(&apply_channel(&add_cpp(&tx, p)?, &ch, p, rng.random())?, p)?;
    let map = range_doppler_map(&tx, &rx, p, cfg.sensing.l_max, cfg.sensing.alpha_max)?;
    let mut csv = Csv::new(&["delay", "doppler", "metric"]);
    for (l, alpha, v) in map.cells() {
        csv.row(&[l.to_string(), alpha.to_string(), fmt_f64(v)]);
    }
    Ok((csv, Vec::new()))
}

fn shift(cfg: &ExperimentConfig) -> Computed {
    let s = &cfg.shift;
    let n = cfg.experiment.params.n();
    let spec = SpectrogramSpec::new(s.window_len, s.hop, s.fft_len)?;
    let mut csv = Csv::new(&[
        "chirp_rate",
        "delay",
        "doppler",
        "measured_shift",
        "predicted_shift",
    ]);
    for &rate in &s.chirp_rates {
        for &delay in &s.delays {
            for &doppler in &s.dopplers {
                let measured = measure_start_frequency_shift(rate, delay, doppler, n, &spec)?;
                csv.row(&[
                    fmt_f64(rate),
                    delay.to_string(),
                    fmt_f64(doppler),
                    fmt_f64(measured),
                    fmt_f64(predicted_shift(rate, delay, doppler, n)),
                ]);
            }
        }
    }
    Ok((csv, Vec::new()))
}

/// Sweeps `2·n·c1` over `0..=2·alpha_max + 1` on the configured channel.
fn sweep_c1(cfg: &ExperimentConfig) -> Computed {
    let e = &cfg.experiment;
    let p = &e.params;
    let mut rng = ChaCha8Rng::seed_from_u64(e.seed);
    let ch = realize_channel(cfg, &mut rng)?;
    let top = 2 * e.channel.alpha_max() + 1;
    let mut csv = Csv::new(&[
        "two_n_c1",
        "c1",
        "separated",
        "significant_fraction",
        "max_offdiag_leakage",
    ]);
    for k in 0..=top {
        let c1 = k as f64 / (2 * p.n()) as f64;
        let q = WaveformParams::new(p.n(), c1, p.c2(), p.cpp_len())?;
        let h = build_effective_channel(&ch, &q)?;
        let m = sparsity_metrics(&h, ZERO_TOLERANCE);
        csv.row(&[
            k.to_string(),
            fmt_f64(c1),
            m.per_path_separation.to_string(),
            fmt_f64(m.significant_fraction),
            fmt_f64(m.max_offdiag_leakage),
        ]);
    }
    Ok((csv, Vec::new()))
}
