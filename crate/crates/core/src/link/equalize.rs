use nalgebra::DVector;

use super::effective::{diagonal_centre, EffectiveChannel};
use crate::error::invalid;
use crate::{CMatrix, Complex64, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EqualizerKind {
    Zf,
    Mmse,
    /// MMSE on the channel restricted to circular bands around the known path
    /// diagonals.
    BandedMmse,
    MatchedFilter,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EqualizerSpec {
    pub kind: EqualizerKind,
    /// Half-width of each band, `BandedMmse` only.
    pub band_halfwidth: usize,
}

impl EqualizerSpec {
    pub fn new(kind: EqualizerKind) -> Self {
        Self {
            kind,
            band_halfwidth: 0,
        }
    }

    pub fn banded(band_halfwidth: usize) -> Self {
        Self {
            kind: EqualizerKind::BandedMmse,
            band_halfwidth,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Equalized {
    pub symbols: Vec<Complex64>,
    /// Set when banding discarded an entry above 1% of the peak magnitude.
    pub band_warning: bool,
}

/// Relative pivot size below which ZF treats the channel as singular.
const ZF_PIVOT_FLOOR: f64 = 1e-12;
/// Entries above this fraction of the peak count as significant for banding.
const BAND_SIGNIFICANCE: f64 = 1e-2;

pub fn equalize(
    y: &[Complex64],
    h: &EffectiveChannel,
    sigma2: f64,
    eq: EqualizerSpec,
) -> Result<Equalized> {
    let n = h.n();
    if y.len() != n {
        return Err(invalid(format!(
            "equalizer input has length {}, expected {n}",
            y.len()
        )));
    }
    if !(sigma2 >= 0.0 && sigma2.is_finite()) {
        return Err(invalid(format!(
            "sigma2 must be finite and >= 0, got {sigma2}"
        )));
    }
    let y = DVector::from_column_slice(y);
    let mut band_warning = false;
    let x = match eq.kind {
        EqualizerKind::MatchedFilter => h.matrix.adjoint() * &y,
        EqualizerKind::Zf => zf(&h.matrix, &y)?,
        EqualizerKind::Mmse => mmse(&h.matrix, &y, sigma2)?,
        EqualizerKind::BandedMmse => {
            if eq.band_halfwidth >= n {
                return Err(invalid(format!(
                    "band_halfwidth {} must be < n = {n}",
                    eq.band_halfwidth
                )));
            }
            let (banded, dropped) = band(h, eq.band_halfwidth);
            band_warning = dropped;
            mmse(&banded, &y, sigma2)?
        }
    };
    Ok(Equalized {
        symbols: x.as_slice().to_vec(),
        band_warning,
    })
}

fn zf(h: &CMatrix, y: &DVector<Complex64>) -> Result<DVector<Complex64>> {
    let lu = h.clone().lu();
    let diag = lu.u().diagonal();
    let max = diag.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let min = diag.iter().map(|z| z.norm()).fold(f64::INFINITY, f64::min);
    if max.is_nan() || max <= 0.0 || min < ZF_PIVOT_FLOOR * max {
        return Err(Error::IllConditioned(format!(
            "ZF pivot ratio {:.3e} below {ZF_PIVOT_FLOOR:e}",
            if max > 0.0 { min / max } else { 0.0 }
        )));
    }
    lu.solve(y)
        .ok_or_else(|| Error::IllConditioned("ZF solve failed".into()))
}

/// `H^H·(H·H^H + σ²·I)^{-1}·y`.
fn mmse(h: &CMatrix, y: &DVector<Complex64>, sigma2: f64) -> Result<DVector<Complex64>> {
    let n = h.nrows();
    let mut gram = h * h.adjoint();
    for k in 0..n {
        gram[(k, k)] += Complex64::new(sigma2, 0.0);
    }
    let z = if sigma2 > 0.0 {
        match gram.clone().cholesky() {
            Some(ch) => ch.solve(y),
            None => solve_lu(gram, y)?,
        }
    } else {
        solve_lu(gram, y)?
    };
    Ok(h.adjoint() * z)
}

fn solve_lu(m: CMatrix, y: &DVector<Complex64>) -> Result<DVector<Complex64>> {
    m.lu()
        .solve(y)
        .filter(|z| z.iter().all(|v| v.re.is_finite() && v.im.is_finite()))
        .ok_or_else(|| Error::IllConditioned("MMSE system is singular".into()))
}

/// Zeroes entries whose circular diagonal is farther than `halfwidth` from
/// every path's diagonal. Returns whether a significant entry was dropped.
fn band(h: &EffectiveChannel, halfwidth: usize) -> (CMatrix, bool) {
    let n = h.n();
    let centres: Vec<usize> = h
        .source
        .paths()
        .iter()
        .map(|p| diagonal_centre(p, &h.params))
        .collect();
    let keep_diag: Vec<bool> = (0..n)
        .map(|d| {
            centres.iter().any(|&c| {
                let dist = (d + n - c) % n;
                dist.min(n - dist) <= halfwidth
            })
        })
        .collect();
    let peak = h.matrix.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let mut dropped = false;
    let banded = CMatrix::from_fn(n, n, |r, c| {
        let v = h.matrix[(r, c)];
        if keep_diag[(r + n - c) % n] {
            v
        } else {
            dropped |= v.norm() > BAND_SIGNIFICANCE * peak;
            Complex64::new(0.0, 0.0)
        }
    });
    (banded, dropped)
}
