//! Experiment file schema (TOML). See `docs/config-schema.md` for the full
//! reference.

use afdm::channel::{ChannelModel, PathSpec};
use afdm::link::{
    min_c1_full_diversity, required_guard, BerExperiment, ChannelSpec, ConstellationKind, Csi,
    EqualizerKind, EqualizerSpec, PilotSpec, RandomProfile, SinglePilotEstimator,
};
use afdm::waveform::{FrameLayout, WaveformParams};
use afdm::Complex64;
use serde::Deserialize;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("invalid `{field}`: {message}")]
    Validation { field: String, message: String },
}

impl ConfigError {
    pub fn field(&self) -> Option<&str> {
        match self {
            ConfigError::Validation { field, .. } => Some(field),
            ConfigError::Parse { .. } => None,
        }
    }
}

fn bad(field: impl Into<String>, message: impl Into<String>) -> ConfigError {
    ConfigError::Validation {
        field: field.into(),
        message: message.into(),
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    id: Option<String>,
    waveform: RawWaveform,
    channel: RawChannel,
    modulation: Option<String>,
    snr_db: Vec<f64>,
    trials: i64,
    seed: u64,
    equalizer: Option<RawEqualizer>,
    csi: Option<String>,
    pilot: Option<RawPilot>,
    sensing: Option<RawSensing>,
    shift: Option<RawShift>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawWaveform {
    n: i64,
    c1: Option<RawRate>,
    c2: Option<f64>,
    cpp_len: Option<i64>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum RawRate {
    Value(f64),
    Keyword(String),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawChannel {
    paths: Option<Vec<RawPath>>,
    random: Option<RawRandom>,
    normalize_channel: Option<bool>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPath {
    /// `[re, im]`
    gain: [f64; 2],
    delay: i64,
    doppler: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRandom {
    num_paths: i64,
    l_max: i64,
    alpha_max: i64,
    fractional: Option<bool>,
    max_doppler: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEqualizer {
    kind: Option<String>,
    band_halfwidth: Option<i64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPilot {
    guard: Option<i64>,
    boost_db: Option<f64>,
    threshold: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSensing {
    l_max: Option<i64>,
    alpha_max: Option<i64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawShift {
    chirp_rates: Option<Vec<f64>>,
    delays: Option<Vec<i64>>,
    dopplers: Option<Vec<f64>>,
    window_len: Option<i64>,
    hop: Option<i64>,
    fft_len: Option<i64>,
}

/// Delay/Doppler search window of the `sense` subcommand.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SensingConfig {
    pub l_max: usize,
    pub alpha_max: usize,
}

/// Grid and spectrogram settings of the `shift` subcommand.
#[derive(Debug, Clone, PartialEq)]
pub struct ShiftConfig {
    pub chirp_rates: Vec<f64>,
    pub delays: Vec<usize>,
    pub dopplers: Vec<f64>,
    pub window_len: usize,
    pub hop: usize,
    pub fft_len: usize,
}

/// A fully validated experiment with every default applied.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: BerExperiment,
    /// Whether `c1` was resolved from `"auto"`.
    pub c1_auto: bool,
    pub sensing: SensingConfig,
    pub shift: ShiftConfig,
}

impl ExperimentConfig {
    pub fn params(&self) -> &WaveformParams {
        &self.experiment.params
    }
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

fn non_negative(field: &str, v: i64) -> Result<usize, ConfigError> {
    usize::try_from(v).map_err(|_| bad(field, format!("must be >= 0, got {v}")))
}

fn positive(field: &str, v: i64) -> Result<usize, ConfigError> {
    match usize::try_from(v) {
        Ok(u) if u > 0 => Ok(u),
        _ => Err(bad(field, format!("must be >= 1, got {v}"))),
    }
}

pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| ConfigError::Parse {
        line: e.span().map(|s| line_of(text, s.start)).unwrap_or(1),
        message: e.message().to_string(),
    })?;
    resolve(raw)
}

fn resolve(raw: RawConfig) -> Result<ExperimentConfig, ConfigError> {
    let n = positive("waveform.n", raw.waveform.n)?;
    if n < 2 {
        return Err(bad("waveform.n", "must be >= 2"));
    }

    let channel = resolve_channel(&raw.channel)?;
    let l_max = channel.l_max();
    let alpha_max = channel.alpha_max();

    let cpp_len = match raw.waveform.cpp_len {
        Some(v) => non_negative("waveform.cpp_len", v)?,
        None => l_max,
    };
    if cpp_len >= n {
        return Err(bad(
            "waveform.cpp_len",
            format!("{cpp_len} must be < n = {n}"),
        ));
    }
    if cpp_len < l_max {
        return Err(bad(
            "waveform.cpp_len",
            format!("{cpp_len} is shorter than the maximum path delay {l_max}"),
        ));
    }

    let (c1, c1_auto) = match &raw.waveform.c1 {
        None => (auto_c1(alpha_max, n)?, true),
        Some(RawRate::Keyword(k)) if k == "auto" => (auto_c1(alpha_max, n)?, true),
        Some(RawRate::Keyword(k)) => {
            return Err(bad(
                "waveform.c1",
                format!("expected a number or \"auto\", got {k:?}"),
            ))
        }
        Some(RawRate::Value(v)) => {
            if !(v.is_finite() && *v >= 0.0) {
                return Err(bad(
                    "waveform.c1",
                    format!("must be finite and >= 0, got {v}"),
                ));
            }
            (*v, false)
        }
    };
    let c2 = raw.waveform.c2.unwrap_or(0.0);
    if !(c2.is_finite() && c2 >= 0.0) {
        return Err(bad(
            "waveform.c2",
            format!("must be finite and >= 0, got {c2}"),
        ));
    }
    let params =
        WaveformParams::new(n, c1, c2, cpp_len).map_err(|e| bad("waveform", e.to_string()))?;

    let constellation = match raw.modulation.as_deref().unwrap_or("qpsk") {
        "qpsk" | "QPSK" => ConstellationKind::Qpsk,
        "16qam" | "16QAM" => ConstellationKind::Qam16,
        other => {
            return Err(bad(
                "modulation",
                format!("unknown constellation {other:?}"),
            ))
        }
    };

    if raw.snr_db.is_empty() {
        return Err(bad("snr_db", "must list at least one value"));
    }
    if let Some(v) = raw
        .snr_db
        .iter()
        .find(|v| v.is_nan() || **v == f64::NEG_INFINITY)
    {
        return Err(bad(
            "snr_db",
            format!("{v} is not a valid SNR (finite, or inf for noiseless)"),
        ));
    }
    let trials = positive("trials", raw.trials)?;

    let equalizer = resolve_equalizer(raw.equalizer.as_ref(), n)?;
    let csi = match raw.csi.as_deref().unwrap_or("perfect") {
        "perfect" => Csi::Perfect,
        "estimated" => Csi::Estimated,
        other => {
            return Err(bad(
                "csi",
                format!("expected \"perfect\" or \"estimated\", got {other:?}"),
            ))
        }
    };
    let pilot = resolve_pilot(raw.pilot.as_ref())?;
    if csi == Csi::Estimated {
        check_estimation(&params, &pilot, l_max, alpha_max)?;
    }

    let experiment = BerExperiment {
        id: raw.id.unwrap_or_else(|| "experiment".into()),
        params,
        channel,
        normalize_channel: raw.channel.normalize_channel.unwrap_or(true),
        constellation,
        snr_db: raw.snr_db,
        trials,
        seed: raw.seed,
        equalizer,
        csi,
        pilot,
    };
    experiment
        .validate()
        .map_err(|e| bad("experiment", e.to_string()))?;

    let sensing = resolve_sensing(raw.sensing.as_ref(), n, l_max, alpha_max)?;
    let shift = resolve_shift(raw.shift.as_ref(), n)?;
    Ok(ExperimentConfig {
        experiment,
        c1_auto,
        sensing,
        shift,
    })
}

fn auto_c1(alpha_max: usize, n: usize) -> Result<f64, ConfigError> {
    min_c1_full_diversity(alpha_max, n).map_err(|e| bad("waveform.c1", e.to_string()))
}

fn resolve_channel(raw: &RawChannel) -> Result<ChannelSpec, ConfigError> {
    match (&raw.paths, &raw.random) {
        (Some(_), Some(_)) => Err(bad("channel", "give either `paths` or `random`, not both")),
        (None, None) => Err(bad("channel", "needs `paths` or `random`")),
        (Some(paths), None) => {
            if paths.is_empty() {
                return Err(bad("channel.paths", "must list at least one path"));
            }
            let mut specs = Vec::with_capacity(paths.len());
            for (i, p) in paths.iter().enumerate() {
                let gain = Complex64::new(p.gain[0], p.gain[1]);
                if !(gain.norm() > 0.0 && gain.norm().is_finite()) {
                    return Err(bad(
                        format!("channel.paths[{i}].gain"),
                        "must be finite and nonzero",
                    ));
                }
                if !p.doppler.is_finite() {
                    return Err(bad(format!("channel.paths[{i}].doppler"), "must be finite"));
                }
                let delay = non_negative(&format!("channel.paths[{i}].delay"), p.delay)?;
                specs.push(PathSpec::new(gain, delay, p.doppler));
            }
            ChannelModel::new(specs, 0.0)
                .map(ChannelSpec::Explicit)
                .map_err(|e| bad("channel.paths", e.to_string()))
        }
        (None, Some(r)) => {
            let num_paths = positive("channel.random.num_paths", r.num_paths)?;
            let l_max = non_negative("channel.random.l_max", r.l_max)?;
            let alpha_max = non_negative("channel.random.alpha_max", r.alpha_max)?;
            let fractional = r.fractional.unwrap_or(false);
            if let Some(f) = r.max_doppler {
                if !(f.is_finite() && f >= 0.0) {
                    return Err(bad("channel.random.max_doppler", "must be finite and >= 0"));
                }
            }
            let grid = (l_max + 1) * (2 * alpha_max + 1);
            if !fractional && num_paths > grid {
                return Err(bad(
                    "channel.random.num_paths",
                    format!("{num_paths} exceeds the {grid} distinct grid points"),
                ));
            }
            Ok(ChannelSpec::Random(RandomProfile {
                num_paths,
                l_max,
                alpha_max,
                fractional,
                max_doppler: r.max_doppler,
            }))
        }
    }
}

fn resolve_equalizer(raw: Option<&RawEqualizer>, n: usize) -> Result<EqualizerSpec, ConfigError> {
    let kind = match raw.and_then(|r| r.kind.as_deref()).unwrap_or("mmse") {
        "zf" => EqualizerKind::Zf,
        "mmse" => EqualizerKind::Mmse,
        "banded_mmse" => EqualizerKind::BandedMmse,
        "matched_filter" => EqualizerKind::MatchedFilter,
        other => {
            return Err(bad(
                "equalizer.kind",
                format!("unknown equalizer {other:?}"),
            ))
        }
    };
    let band_halfwidth = match raw.and_then(|r| r.band_halfwidth) {
        Some(v) => non_negative("equalizer.band_halfwidth", v)?,
        None => 0,
    };
    if band_halfwidth >= n {
        return Err(bad(
            "equalizer.band_halfwidth",
            format!("{band_halfwidth} must be < n = {n}"),
        ));
    }
    Ok(EqualizerSpec {
        kind,
        band_halfwidth,
    })
}

fn resolve_pilot(raw: Option<&RawPilot>) -> Result<PilotSpec, ConfigError> {
    let mut pilot = PilotSpec::default();
    if let Some(r) = raw {
        if let Some(g) = r.guard {
            pilot.guard = Some(non_negative("pilot.guard", g)?);
        }
        if let Some(b) = r.boost_db {
            if !b.is_finite() {
                return Err(bad("pilot.boost_db", "must be finite"));
            }
            pilot.boost_db = b;
        }
        if let Some(t) = r.threshold {
            if !(t > 0.0 && t < 1.0) {
                return Err(bad(
                    "pilot.threshold",
                    format!("must lie in (0, 1), got {t}"),
                ));
            }
            pilot.threshold = t;
        }
    }
    Ok(pilot)
}

fn check_estimation(
    p: &WaveformParams,
    pilot: &PilotSpec,
    l_max: usize,
    alpha_max: usize,
) -> Result<(), ConfigError> {
    let need =
        required_guard(p, l_max, alpha_max).map_err(|e| bad("waveform.c1", e.to_string()))?;
    let guard = pilot.guard.unwrap_or(need);
    if guard < need {
        return Err(bad(
            "pilot.guard",
            format!("{guard} is below the required {need}"),
        ));
    }
    let layout =
        FrameLayout::single_pilot(p.n(), guard).map_err(|e| bad("pilot.guard", e.to_string()))?;
    if layout.data_indices().is_empty() {
        return Err(bad("pilot.guard", "leaves no data indices"));
    }
    SinglePilotEstimator::new(&layout, p, l_max, alpha_max)
        .map(|_| ())
        .map_err(|e| bad("waveform.c1", e.to_string()))
}

fn resolve_sensing(
    raw: Option<&RawSensing>,
    n: usize,
    l_max: usize,
    alpha_max: usize,
) -> Result<SensingConfig, ConfigError> {
    let l = match raw.and_then(|r| r.l_max) {
        Some(v) => non_negative("sensing.l_max", v)?,
        None => l_max,
    };
    let a = match raw.and_then(|r| r.alpha_max) {
        Some(v) => non_negative("sensing.alpha_max", v)?,
        None => alpha_max,
    };
    if l > n / 2 {
        return Err(bad("sensing.l_max", format!("{l} must be <= n/2")));
    }
    if a > n / 2 {
        return Err(bad("sensing.alpha_max", format!("{a} must be <= n/2")));
    }
    Ok(SensingConfig {
        l_max: l,
        alpha_max: a,
    })
}

fn resolve_shift(raw: Option<&RawShift>, n: usize) -> Result<ShiftConfig, ConfigError> {
    let rates = match raw.and_then(|r| r.chirp_rates.clone()) {
        Some(v) => v,
        None => (0..8).map(|k| k as f64 / (2 * n) as f64).collect(),
    };
    if let Some(r) = rates.iter().find(|r| !(r.is_finite() && **r >= 0.0)) {
        return Err(bad("shift.chirp_rates", format!("invalid rate {r}")));
    }
    let delays = match raw.and_then(|r| r.delays.clone()) {
        Some(v) => v
            .into_iter()
            .map(|d| non_negative("shift.delays", d))
            .collect::<Result<Vec<_>, _>>()?,
        None => (0..4).collect(),
    };
    if let Some(d) = delays.iter().find(|d| **d >= n) {
        return Err(bad("shift.delays", format!("delay {d} must be < n")));
    }
    let dopplers = match raw.and_then(|r| r.dopplers.clone()) {
        Some(v) => v,
        None => (-2..=2).map(f64::from).collect(),
    };
    if dopplers.iter().any(|d| !d.is_finite()) {
        return Err(bad("shift.dopplers", "must be finite"));
    }
    let window_len = match raw.and_then(|r| r.window_len) {
        Some(v) => positive("shift.window_len", v)?,
        None => (n / 4).clamp(1, 16),
    };
    if window_len > n / 4 {
        return Err(bad(
            "shift.window_len",
            format!("{window_len} must be <= n/4"),
        ));
    }
    let hop = match raw.and_then(|r| r.hop) {
        Some(v) => positive("shift.hop", v)?,
        None => (window_len / 2).max(1),
    };
    if hop > window_len {
        return Err(bad("shift.hop", "must be <= window_len"));
    }
    let fft_len = match raw.and_then(|r| r.fft_len) {
        Some(v) => positive("shift.fft_len", v)?,
        None => n,
    };
    if fft_len < window_len {
        return Err(bad("shift.fft_len", "must be >= window_len"));
    }
    Ok(ShiftConfig {
        chirp_rates: rates,
        delays,
        dopplers,
        window_len,
        hop,
        fft_len,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const MINIMAL: &str = r#"
snr_db = [10.0]
trials = 10
seed = 1

[waveform]
n = 16

[channel]
paths = [{ gain = [1.0, 0.0], delay = 0, doppler = 0.0 }]
"#;

    #[test]
    fn minimal_document_gets_defaults() {
        let cfg = parse_config(MINIMAL).unwrap();
        let e = &cfg.experiment;
        assert_eq!(e.params.n(), 16);
        assert_eq!(e.params.c2(), 0.0);
        assert_eq!(e.params.cpp_len(), 0);
        assert_eq!(e.params.c1(), 1.0 / 32.0);
        assert!(cfg.c1_auto);
        assert_eq!(e.equalizer, EqualizerSpec::new(EqualizerKind::Mmse));
        assert_eq!(e.csi, Csi::Perfect);
        assert_eq!(e.constellation, ConstellationKind::Qpsk);
        assert!(e.normalize_channel);
        assert_eq!(e.id, "experiment");
    }

    #[test]
    fn auto_c1_from_alpha_max() {
        let text = r#"
snr_db = [10.0]
trials = 1
seed = 1
[waveform]
n = 64
c1 = "auto"
[channel.random]
num_paths = 3
l_max = 4
alpha_max = 2
"#;
        let cfg = parse_config(text).unwrap();
        assert_eq!(cfg.params().c1(), 5.0 / 128.0);
        assert_eq!(cfg.params().cpp_len(), 4);
    }

    #[test]
    fn short_prefix_names_cpp_len() {
        let text = MINIMAL
            .replace("n = 16", "n = 16\ncpp_len = 1")
            .replace("delay = 0", "delay = 2");
        let err = parse_config(&text).unwrap_err();
        assert_eq!(err.field(), Some("waveform.cpp_len"));
    }

    #[test]
    fn syntax_error_reports_line() {
        let err = parse_config("snr_db = [10.0]\ntrials = \n").unwrap_err();
        assert!(matches!(err, ConfigError::Parse { line: 2, .. }), "{err:?}");
    }

    #[test]
    fn unknown_key_rejected() {
        let text = MINIMAL.replace("seed = 1", "seed = 1\nbogus = 3");
        assert!(matches!(
            parse_config(&text),
            Err(ConfigError::Parse { line: 5, .. })
        ));
        let text = MINIMAL.replace("n = 16", "n = 16\nwidth = 3");
        assert!(matches!(
            parse_config(&text),
            Err(ConfigError::Parse { .. })
        ));
    }

    proptest! {
        #[test]
        fn arbitrary_text_never_panics(text in "\\PC{0,200}") {
            let _ = parse_config(&text);
        }

        #[test]
        fn mutated_document_never_panics(pos in 0usize..200, byte in any::<u8>()) {
            let mut bytes = MINIMAL.as_bytes().to_vec();
            let i = pos % bytes.len();
            bytes[i] = byte;
            if let Ok(text) = std::str::from_utf8(&bytes) {
                let _ = parse_config(text);
            }
        }
    }
}
