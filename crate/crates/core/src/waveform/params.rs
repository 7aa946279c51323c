use crate::{error::invalid, Result};

/// Which member of the chirp multicarrier family a parameter set selects.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Ofdm,
    Ocdm,
    Afdm,
}

/// Subcarrier count, chirp rates and prefix length of one frame.
///
/// Chirp rates are dimensionless phase slopes per squared sample, so `c = 1/(2N)`
/// sweeps the full band exactly once over a frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveformParams {
    n: usize,
    c1: f64,
    c2: f64,
    cpp_len: usize,
}

impl WaveformParams {
    pub fn new(n: usize, c1: f64, c2: f64, cpp_len: usize) -> Result<Self> {
        if n < 2 {
            return Err(invalid(format!("n must be >= 2, got {n}")));
        }
        if cpp_len >= n {
            return Err(invalid(format!("cpp_len {cpp_len} must be < n = {n}")));
        }
        for (name, c) in [("c1", c1), ("c2", c2)] {
            if !c.is_finite() || c < 0.0 {
                return Err(invalid(format!("{name} must be finite and >= 0, got {c}")));
            }
        }
        Ok(Self { n, c1, c2, cpp_len })
    }

    /// OFDM parameters: both chirp rates zero.
    pub fn ofdm(n: usize, cpp_len: usize) -> Result<Self> {
        Self::new(n, 0.0, 0.0, cpp_len)
    }

    /// OCDM parameters: both chirp rates `1/(2N)`.
    pub fn ocdm(n: usize, cpp_len: usize) -> Result<Self> {
        let c = 0.5 / n as f64;
        Self::new(n, c, c, cpp_len)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn c1(&self) -> f64 {
        self.c1
    }

    pub fn c2(&self) -> f64 {
        self.c2
    }

    pub fn cpp_len(&self) -> usize {
        self.cpp_len
    }

    pub fn mode(&self) -> Mode {
        let ocdm = 0.5 / self.n as f64;
        if self.c1 == 0.0 && self.c2 == 0.0 {
            Mode::Ofdm
        } else if (self.c1 - ocdm).abs() <= 1e-15 && (self.c2 - ocdm).abs() <= 1e-15 {
            Mode::Ocdm
        } else {
            Mode::Afdm
        }
    }

    /// `2·N·c1` rounded to an integer, if it is one (within 1e-9).
    ///
    /// Integer shear means integer-grid paths land on exactly one circular
    /// diagonal of the effective channel.
    pub fn integer_shear(&self) -> Option<i64> {
        let s = 2.0 * self.n as f64 * self.c1;
        let r = s.round();
        ((s - r).abs() <= 1e-9).then_some(r as i64)
    }

    /// Total transmitted length `N + L`.
    pub fn frame_len(&self) -> usize {
        self.n + self.cpp_len
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_params() {
        assert!(WaveformParams::new(1, 0.0, 0.0, 0).is_err());
        assert!(WaveformParams::new(8, 0.0, 0.0, 8).is_err());
        assert!(WaveformParams::new(8, -0.1, 0.0, 0).is_err());
        assert!(WaveformParams::new(8, 0.0, -1e-3, 0).is_err());
        assert!(WaveformParams::new(8, f64::NAN, 0.0, 0).is_err());
        assert!(WaveformParams::new(2, 0.0, 0.0, 1).is_ok());
    }

    #[test]
    fn classifies_modes() {
        assert_eq!(WaveformParams::ofdm(16, 0).unwrap().mode(), Mode::Ofdm);
        assert_eq!(WaveformParams::ocdm(16, 0).unwrap().mode(), Mode::Ocdm);
        let p = WaveformParams::new(16, 1.0 / 32.0, 0.0, 0).unwrap();
        assert_eq!(p.mode(), Mode::Afdm);
        let p = WaveformParams::new(16, 0.0, 0.3, 0).unwrap();
        assert_eq!(p.mode(), Mode::Afdm);
    }

    #[test]
    fn integer_shear() {
        let p = WaveformParams::new(8, 3.0 / 16.0, 0.0, 2).unwrap();
        assert_eq!(p.integer_shear(), Some(3));
        let p = WaveformParams::new(8, 0.1, 0.0, 2).unwrap();
        assert_eq!(p.integer_shear(), None);
    }
}
