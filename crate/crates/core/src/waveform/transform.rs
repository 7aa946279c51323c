use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use rustfft::{Fft, FftPlanner};

use super::{ensure_finite, ensure_len, WaveformParams};
use crate::{error::invalid, CMatrix, Complex64, Result};

/// `exp(−i·2π·c·k²)` for `k = 0..n−1`.
pub fn chirp_phase_vector(n: usize, c: f64) -> Result<Vec<Complex64>> {
    if n == 0 {
        return Err(invalid("chirp length must be >= 1"));
    }
    if !c.is_finite() {
        return Err(invalid(format!("chirp rate must be finite, got {c}")));
    }
    Ok((0..n).map(|k| unit_phase(-c * (k * k) as f64)).collect())
}

/// `exp(i·2π·cycles)`, reduced modulo one cycle first so large arguments
/// keep full precision.
pub(crate) fn unit_phase(cycles: f64) -> Complex64 {
    let frac = cycles - cycles.round();
    Complex64::from_polar(1.0, 2.0 * PI * frac)
}

/// Planned DAFT for one parameter set. Reuse it across frames: FFT plans and
/// both chirp vectors are computed once.
#[derive(Clone)]
pub struct Daft {
    params: WaveformParams,
    chirp1: Vec<Complex64>,
    chirp2: Vec<Complex64>,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    scale: f64,
}

impl fmt::Debug for Daft {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Daft")
            .field("params", &self.params)
            .finish()
    }
}

impl Daft {
    pub fn new(params: &WaveformParams) -> Self {
        let n = params.n();
        let mut planner = FftPlanner::new();
        Self {
            params: *params,
            chirp1: chirp_phase_vector(n, params.c1()).expect("n >= 2"),
            chirp2: chirp_phase_vector(n, params.c2()).expect("n >= 2"),
            fwd: planner.plan_fft_forward(n),
            inv: planner.plan_fft_inverse(n),
            scale: 1.0 / (n as f64).sqrt(),
        }
    }

    pub fn params(&self) -> &WaveformParams {
        &self.params
    }

    /// `A·x` with `A = Λ_{c2}·F·Λ_{c1}`.
    pub fn forward(&self, x: &[Complex64]) -> Result<Vec<Complex64>> {
        ensure_len(x, self.params.n(), "daft input")?;
        ensure_finite(x, "daft input")?;
        let mut buf = x.to_vec();
        self.forward_in_place(&mut buf);
        Ok(buf)
    }

    /// `A^H·X = Λ_{c1}^*·F^H·Λ_{c2}^*·X`.
    pub fn inverse(&self, x: &[Complex64]) -> Result<Vec<Complex64>> {
        ensure_len(x, self.params.n(), "idaft input")?;
        ensure_finite(x, "idaft input")?;
        let mut buf = x.to_vec();
        self.inverse_in_place(&mut buf);
        Ok(buf)
    }

    /// Unchecked forward transform; `buf.len()` must equal `n`.
    pub fn forward_in_place(&self, buf: &mut [Complex64]) {
        debug_assert_eq!(buf.len(), self.params.n());
        for (v, l) in buf.iter_mut().zip(&self.chirp1) {
            *v *= l;
        }
        self.fwd.process(buf);
        for (v, l) in buf.iter_mut().zip(&self.chirp2) {
            *v *= l * self.scale;
        }
    }

    /// Unchecked inverse transform; `buf.len()` must equal `n`.
    pub fn inverse_in_place(&self, buf: &mut [Complex64]) {
        debug_assert_eq!(buf.len(), self.params.n());
        for (v, l) in buf.iter_mut().zip(&self.chirp2) {
            *v *= l.conj();
        }
        self.inv.process(buf);
        for (v, l) in buf.iter_mut().zip(&self.chirp1) {
            *v *= l.conj() * self.scale;
        }
    }

    /// Dense transform matrix `A`, built column by column through the fast path.
    pub fn matrix(&self) -> CMatrix {
        let n = self.params.n();
        let mut a = CMatrix::zeros(n, n);
        let mut col = vec![Complex64::new(0.0, 0.0); n];
        for k in 0..n {
            col.fill(Complex64::new(0.0, 0.0));
            col[k] = Complex64::new(1.0, 0.0);
            self.forward_in_place(&mut col);
            a.column_mut(k).copy_from_slice(&col);
        }
        a
    }
}

/// Forward DAFT `A·x`. See [`Daft`] for repeated use.
pub fn daft(x: &[Complex64], p: &WaveformParams) -> Result<Vec<Complex64>> {
    Daft::new(p).forward(x)
}

/// Inverse DAFT `A^H·X`.
pub fn idaft(x: &[Complex64], p: &WaveformParams) -> Result<Vec<Complex64>> {
    Daft::new(p).inverse(x)
}
