use super::transform::unit_phase;
use super::{ensure_finite, ensure_len, WaveformParams};
use crate::{error::invalid, Complex64, Result};

/// Phase applied to the prefix sample at time index `t` (`−L ≤ t < 0`):
/// `exp(−i·2π·c1·(N² + 2·N·t))`.
///
/// For a time signal carrying the `c1` up-chirp this is exactly the factor
/// relating `s[t]` to `s[t + N]`, so the prefixed frame looks chirp-periodic
/// to any delay up to `L`.
pub fn cpp_phase(n: usize, c1: f64, t: i64) -> Complex64 {
    let n = n as f64;
    unit_phase(-c1 * (n * n + 2.0 * n * t as f64))
}

/// Prepends the chirp-periodic prefix. With `c1 = 0` this is a plain cyclic
/// prefix, copied bit for bit.
pub fn add_cpp(s: &[Complex64], p: &WaveformParams) -> Result<Vec<Complex64>> {
    let (n, l) = (p.n(), p.cpp_len());
    ensure_len(s, n, "add_cpp input")?;
    ensure_finite(s, "add_cpp input")?;
    let mut out = Vec::with_capacity(n + l);
    for k in 0..l {
        let t = k as i64 - l as i64;
        let sample = s[n - l + k];
        if p.c1() == 0.0 {
            out.push(sample);
        } else {
            out.push(sample * cpp_phase(n, p.c1(), t));
        }
    }
    out.extend_from_slice(s);
    Ok(out)
}

/// Drops the first `L` samples.
pub fn strip_cpp(r: &[Complex64], p: &WaveformParams) -> Result<Vec<Complex64>> {
    if r.len() != p.frame_len() {
        return Err(invalid(format!(
            "strip_cpp input has length {}, expected n + cpp_len = {}",
            r.len(),
            p.frame_len()
        )));
    }
    Ok(r[p.cpp_len()..].to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn ramp(n: usize) -> Vec<Complex64> {
        (0..n)
            .map(|k| Complex64::new(k as f64 + 0.5, -(k as f64) * 0.25))
            .collect()
    }

    #[test]
    fn zero_rate_is_cyclic_prefix() {
        let p = WaveformParams::new(8, 0.0, 0.3, 2).unwrap();
        let s = ramp(8);
        let out = add_cpp(&s, &p).unwrap();
        assert_eq!(out.len(), 10);
        assert_eq!(&out[..2], &s[6..]);
        assert_eq!(&out[2..], &s[..]);
        // bit-identical including signed zeros
        let s: Vec<Complex64> = (0..8).map(|_| Complex64::new(-0.0, -0.0)).collect();
        let out = add_cpp(&s, &p).unwrap();
        assert!(out[..2].iter().all(
            |z| z.re.to_bits() == (-0.0f64).to_bits() && z.im.to_bits() == (-0.0f64).to_bits()
        ));
    }

    #[test]
    fn integer_multiple_rate_degenerates_to_cp() {
        // c1 = k/(2n) with k·n even: c1·(n² + 2n·t) = k·n/2 + k·t is an integer.
        let n = 8;
        let s = ramp(n);
        for k in 1..6 {
            let p = WaveformParams::new(n, k as f64 / (2.0 * n as f64), 0.0, 3).unwrap();
            let out = add_cpp(&s, &p).unwrap();
            for j in 0..3 {
                assert!((out[j] - s[n - 3 + j]).norm() < 1e-12, "k={k} j={j}");
            }
        }
    }

    #[test]
    fn three_sixteenths_prefix_phases() {
        let p = WaveformParams::new(8, 3.0 / 16.0, 0.0, 2).unwrap();
        let s = ramp(8);
        let out = add_cpp(&s, &p).unwrap();
        for (k, t) in [(0usize, -2i64), (1, -1)] {
            // (3/16)(64 + 16t) = 12 + 3t exactly
            let cycles = (12 + 3 * t) as f64;
            let want = s[(8 + t) as usize] * Complex64::from_polar(1.0, -2.0 * PI * cycles);
            assert!((out[k] - want).norm() < 1e-12);
        }
        // an odd numerator makes the factor non-trivial
        let p = WaveformParams::new(8, 1.0 / 32.0, 0.0, 2).unwrap();
        let out = add_cpp(&s, &p).unwrap();
        for (k, t) in [(0usize, -2i64), (1, -1)] {
            let cycles = (64.0 + 16.0 * t as f64) / 32.0;
            let want = s[(8 + t) as usize] * Complex64::from_polar(1.0, -2.0 * PI * cycles);
            assert!((out[k] - want).norm() < 1e-12);
        }
    }

    #[test]
    fn strip_inverts_add() {
        let s = ramp(8);
        for l in [0, 2, 7] {
            let p = WaveformParams::new(8, 0.07, 0.0, l).unwrap();
            let framed = add_cpp(&s, &p).unwrap();
            assert_eq!(strip_cpp(&framed, &p).unwrap(), s);
        }
        let p = WaveformParams::new(8, 0.0, 0.0, 2).unwrap();
        let r = ramp(10);
        assert_eq!(strip_cpp(&r, &p).unwrap(), r[2..].to_vec());
        assert!(strip_cpp(&r[1..], &p).is_err());
    }

    #[test]
    fn cpp_matches_chirp_periodic_extension() {
        // Time signal from the inverse transform: s[t] = exp(i2πc1 t²)·g[t], g N-periodic.
        let n = 16usize;
        let c1 = 0.0371;
        let g: Vec<Complex64> = (0..n)
            .map(|k| Complex64::new((k as f64).cos(), 0.3))
            .collect();
        let s_at = |t: i64| {
            let gt = g[t.rem_euclid(n as i64) as usize];
            gt * Complex64::from_polar(1.0, 2.0 * PI * c1 * (t * t) as f64)
        };
        let s: Vec<Complex64> = (0..n as i64).map(s_at).collect();
        let p = WaveformParams::new(n, c1, 0.0, 5).unwrap();
        let out = add_cpp(&s, &p).unwrap();
        for (k, v) in out[..5].iter().enumerate() {
            assert!((v - s_at(k as i64 - 5)).norm() < 1e-9);
        }
    }
}
