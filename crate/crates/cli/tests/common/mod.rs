//! Dense reference implementations, written from the defining formulas and
//! kept independent of the library's FFT-based code paths.
#![allow(dead_code)]

use std::f64::consts::PI;

use afdm::Complex64 as C;

pub type Mat = Vec<Vec<C>>;

pub fn cis(cycles: f64) -> C {
    let t = 2.0 * PI * cycles.rem_euclid(1.0);
    C::new(t.cos(), t.sin())
}

/// Unitary DFT matrix `F[m][k] = exp(−i2π mk/n)/√n`, with `mk` reduced
/// modulo `n` before the division.
pub fn dft(n: usize) -> Mat {
    let s = 1.0 / (n as f64).sqrt();
    (0..n)
        .map(|m| {
            (0..n)
                .map(|k| cis(-(((m * k) % n) as f64) / n as f64) * s)
                .collect()
        })
        .collect()
}

/// `A[m][k] = exp(−i2π c2 m²) · F[m][k] · exp(−i2π c1 k²)`.
pub fn daft_matrix(n: usize, c1: f64, c2: f64) -> Mat {
    let f = dft(n);
    (0..n)
        .map(|m| {
            (0..n)
                .map(|k| {
                    let (mf, kf) = (m as f64, k as f64);
                    cis(-c2 * mf * mf) * f[m][k] * cis(-c1 * kf * kf)
                })
                .collect()
        })
        .collect()
}

/// Time-domain channel seen after prefix removal: each path `(g, l, f)`
/// contributes `g·exp(i2π f j/n)` at `(j, j − l mod n)`, and rows that reach
/// back into the prefix pick up `exp(−i2π c1 (n² + 2n(j − l)))`.
pub fn time_channel(n: usize, c1: f64, paths: &[(C, usize, f64)]) -> Mat {
    let nf = n as f64;
    let mut h = vec![vec![C::new(0.0, 0.0); n]; n];
    for &(g, l, f) in paths {
        for (j, row) in h.iter_mut().enumerate() {
            let col = (j + n - l) % n;
            let mut z = g * cis(f * j as f64 / nf);
            if j < l {
                let t = j as f64 - l as f64;
                z *= cis(-c1 * (nf * nf + 2.0 * nf * t));
            }
            row[col] += z;
        }
    }
    h
}

pub fn adjoint(a: &Mat) -> Mat {
    let n = a.len();
    let m = a[0].len();
    (0..m)
        .map(|i| (0..n).map(|j| a[j][i].conj()).collect())
        .collect()
}

pub fn matmul(a: &Mat, b: &Mat) -> Mat {
    let (n, k, m) = (a.len(), b.len(), b[0].len());
    let mut out = vec![vec![C::new(0.0, 0.0); m]; n];
    for i in 0..n {
        for t in 0..k {
            let x = a[i][t];
            for j in 0..m {
                out[i][j] += x * b[t][j];
            }
        }
    }
    out
}

pub fn matvec(a: &Mat, x: &[C]) -> Vec<C> {
    a.iter()
        .map(|row| row.iter().zip(x).map(|(r, v)| r * v).sum())
        .collect()
}

/// `A·H_t·A^H` for rate pair `(c1, c2)`.
pub fn effective(n: usize, c1: f64, c2: f64, paths: &[(C, usize, f64)]) -> Mat {
    let a = daft_matrix(n, c1, c2);
    matmul(&matmul(&a, &time_channel(n, c1, paths)), &adjoint(&a))
}

/// Circular diagonals `(row − col) mod n` holding an entry above
/// `rel · max|entry|`.
pub fn occupied_diagonals(h: &Mat, rel: f64) -> std::collections::BTreeSet<usize> {
    let n = h.len();
    let peak = h.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max);
    let mut out = std::collections::BTreeSet::new();
    for (r, row) in h.iter().enumerate() {
        for (c, z) in row.iter().enumerate() {
            if z.norm() > rel * peak {
                out.insert((r + n - c) % n);
            }
        }
    }
    out
}

pub fn max_abs_diff(a: &[C], b: &[C]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Standard normal upper tail via the complementary error function.
pub fn q_function(x: f64) -> f64 {
    0.5 * statrs::function::erf::erfc(x / std::f64::consts::SQRT_2)
}
