//! Simulation of the affine frequency division multiplexing (AFDM) waveform
//! family over doubly dispersive channels.
//!
//! The discrete affine Fourier transform (DAFT) is parameterized by two chirp
//! rates `(c1, c2)`. `(0, 0)` gives plain OFDM, `(1/2N, 1/2N)` gives OCDM, and
//! any other non-negative pair gives AFDM. The crate covers:
//!
//! * [`waveform`]: chirp-phase vectors, the DAFT/IDAFT pair, chirp-periodic
//!   prefix (CPP) insertion and removal, frame layouts.
//! * [`channel`]: a discrete linear time-varying multipath channel with integer
//!   delays and (possibly fractional) Doppler, plus AWGN.
//! * [`link`]: constellations, effective affine-domain channels, chirp-rate
//!   selection, equalizers, single-pilot channel estimation and Monte-Carlo
//!   BER experiments.
//! * [`analysis`]: the chirp displacement law, effective-channel sparsity and
//!   matched-filter range-Doppler sensing.

pub mod analysis;
pub mod channel;
mod error;
pub mod link;
pub mod waveform;

pub use error::{Error, Result};
pub use num_complex::Complex64;

/// Dense complex matrix used for channel and transform matrices.
pub type CMatrix = nalgebra::DMatrix<Complex64>;
