//! Chirp-phase vectors, the DAFT/IDAFT pair, chirp-periodic prefixing and
//! frame layouts.
//!
//! Conventions used throughout the crate:
//!
//! * `Λ_c = diag(exp(−i·2π·c·k²))`, `k = 0..N−1`.
//! * `F` is the unitary DFT, `F[m,k] = exp(−i·2π·m·k/N)/√N`.
//! * The forward transform (receiver side) is `A = Λ_{c2}·F·Λ_{c1}`. The
//!   inverse (transmitter side) is `A^H = Λ_{c1}^*·F^H·Λ_{c2}^*`, so the
//!   transmitted time-domain signal carries the `c1` chirp as its outermost
//!   stage. This is the stage order that makes the chirp-periodic prefix and
//!   the delay-Doppler shear work with `c1`.

mod frame;
mod params;
mod prefix;
mod transform;

pub use frame::{Frame, FrameLayout, IndexRole};
pub use params::{Mode, WaveformParams};
pub use prefix::{add_cpp, cpp_phase, strip_cpp};
pub use transform::{chirp_phase_vector, daft, idaft, Daft};

use crate::{error::invalid, Complex64, Result};

pub(crate) fn ensure_finite(x: &[Complex64], what: &str) -> Result<()> {
    if x.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(invalid(format!("{what} contains a non-finite sample")))
    }
}

pub(crate) fn ensure_len(x: &[Complex64], expected: usize, what: &str) -> Result<()> {
    if x.len() == expected {
        Ok(())
    } else {
        Err(invalid(format!(
            "{what} has length {}, expected {expected}",
            x.len()
        )))
    }
}
