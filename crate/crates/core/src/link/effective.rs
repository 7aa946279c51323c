use crate::channel::{time_channel_matrix, ChannelModel, PathSpec};
use crate::error::invalid;
use crate::waveform::{Daft, WaveformParams};
use crate::{CMatrix, Complex64, Error, Result};

/// Affine-domain input/output relation `y = H·x` for the noiseless chain
/// `x → idaft → add_cpp → channel → strip_cpp → daft`.
#[derive(Debug, Clone, PartialEq)]
pub struct EffectiveChannel {
    pub matrix: CMatrix,
    pub params: WaveformParams,
    pub source: ChannelModel,
}

impl EffectiveChannel {
    pub fn n(&self) -> usize {
        self.params.n()
    }

    pub fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        (&self.matrix * nalgebra::DVector::from_column_slice(x))
            .as_slice()
            .to_vec()
    }
}

/// `A·H_t·A^H`, evaluated column by column with the fast transform.
pub fn build_effective_channel(ch: &ChannelModel, p: &WaveformParams) -> Result<EffectiveChannel> {
    build_with(ch, p, &Daft::new(p))
}

pub(crate) fn build_with(
    ch: &ChannelModel,
    p: &WaveformParams,
    t: &Daft,
) -> Result<EffectiveChannel> {
    let n = p.n();
    let ht = time_channel_matrix(ch, p)?;
    let taps: Vec<(usize, usize, Complex64)> = (0..n)
        .flat_map(|r| (0..n).map(move |c| (r, c)))
        .filter_map(|(r, c)| {
            let v = ht[(r, c)];
            (v != Complex64::new(0.0, 0.0)).then_some((r, c, v))
        })
        .collect();
    let mut matrix = CMatrix::zeros(n, n);
    let mut v = vec![Complex64::new(0.0, 0.0); n];
    let mut u = vec![Complex64::new(0.0, 0.0); n];
    for q in 0..n {
        v.fill(Complex64::new(0.0, 0.0));
        v[q] = Complex64::new(1.0, 0.0);
        t.inverse_in_place(&mut v);
        u.fill(Complex64::new(0.0, 0.0));
        for &(r, c, h) in &taps {
            u[r] += h * v[c];
        }
        t.forward_in_place(&mut u);
        matrix.column_mut(q).copy_from_slice(&u);
    }
    Ok(EffectiveChannel {
        matrix,
        params: *p,
        source: ch.clone(),
    })
}

/// Circular diagonal `(row − col) mod N` carrying a path with integer delay `l`
/// and integer Doppler `alpha`: `(alpha − 2·N·c1·l) mod N`.
///
/// Delay slides the transmitted up-chirp down in frequency by `2·N·c1` bins
/// per sample while Doppler slides it up by `alpha` bins.
pub fn path_displacement(l: usize, alpha: i64, p: &WaveformParams) -> Result<usize> {
    let shear = p.integer_shear().ok_or_else(|| {
        Error::UnsupportedRegime(format!(
            "2·N·c1 = {} is not an integer",
            2.0 * p.n() as f64 * p.c1()
        ))
    })?;
    Ok(wrap(alpha - shear * l as i64, p.n()))
}

/// Nearest circular diagonal of an arbitrary path (fractional Doppler or
/// non-integer shear): `round(f − 2·N·c1·l) mod N`.
pub fn diagonal_centre(path: &PathSpec, p: &WaveformParams) -> usize {
    let centre = path.doppler - 2.0 * p.n() as f64 * p.c1() * path.delay as f64;
    wrap(centre.round() as i64, p.n())
}

fn wrap(v: i64, n: usize) -> usize {
    v.rem_euclid(n as i64) as usize
}

/// Smallest `c1` that spreads integer Dopplers `−alpha_max..=alpha_max` of
/// one delay over distinct diagonals: `(2·alpha_max + 1)/(2N)`.
pub fn min_c1_full_diversity(alpha_max: usize, n: usize) -> Result<f64> {
    if n == 0 || 4 * alpha_max >= n {
        return Err(invalid(format!(
            "alpha_max {alpha_max} must be < n/4 (n = {n})"
        )));
    }
    Ok((2 * alpha_max + 1) as f64 / (2 * n) as f64)
}

/// Whether every `(l, α)` with `l ≤ l_max`, `|α| ≤ alpha_max` lands on its own
/// diagonal under the minimum full-diversity `c1`:
/// `(l_max + 1)·(2·alpha_max + 1) ≤ N`.
pub fn full_diversity_holds(l_max: usize, alpha_max: usize, n: usize) -> bool {
    (l_max + 1) * (2 * alpha_max + 1) <= n
}
