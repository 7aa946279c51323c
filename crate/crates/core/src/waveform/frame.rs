use super::{ensure_finite, ensure_len};
use crate::{error::invalid, Complex64, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IndexRole {
    Pilot,
    Guard,
    Data,
}

/// Partition of the `N` affine-frequency indices into pilot, guard and data.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrameLayout {
    roles: Vec<IndexRole>,
    pilot: Option<usize>,
    data: Vec<usize>,
}

impl FrameLayout {
    /// Every index carries data.
    pub fn all_data(n: usize) -> Self {
        Self {
            roles: vec![IndexRole::Data; n],
            pilot: None,
            data: (0..n).collect(),
        }
    }

    /// One pilot at index 0 with `guard` zero indices on each side (cyclically).
    pub fn single_pilot(n: usize, guard: usize) -> Result<Self> {
        if 2 * guard + 1 > n {
            return Err(invalid(format!(
                "pilot with guard {guard} on each side does not fit in n = {n}"
            )));
        }
        let mut roles = vec![IndexRole::Data; n];
        roles[0] = IndexRole::Pilot;
        for g in 1..=guard {
            roles[g] = IndexRole::Guard;
            roles[n - g] = IndexRole::Guard;
        }
        let data = (0..n).filter(|&k| roles[k] == IndexRole::Data).collect();
        Ok(Self {
            roles,
            pilot: Some(0),
            data,
        })
    }

    pub fn n(&self) -> usize {
        self.roles.len()
    }

    pub fn pilot(&self) -> Option<usize> {
        self.pilot
    }

    pub fn data_indices(&self) -> &[usize] {
        &self.data
    }

    pub fn role(&self, k: usize) -> IndexRole {
        self.roles[k]
    }

    /// Guard half-width, 0 when there is no pilot.
    pub fn guard(&self) -> usize {
        self.roles[1..]
            .iter()
            .take_while(|r| **r == IndexRole::Guard)
            .count()
    }
}

/// Affine-frequency symbols together with their layout.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    symbols: Vec<Complex64>,
    layout: FrameLayout,
}

impl Frame {
    /// Places `data` on the data indices, `pilot` on the pilot index and zeros
    /// on the guards.
    pub fn assemble(layout: FrameLayout, data: &[Complex64], pilot: Complex64) -> Result<Self> {
        ensure_len(data, layout.data.len(), "frame data")?;
        ensure_finite(data, "frame data")?;
        let mut symbols = vec![Complex64::new(0.0, 0.0); layout.n()];
        for (&k, &d) in layout.data.iter().zip(data) {
            symbols[k] = d;
        }
        if let Some(k) = layout.pilot {
            symbols[k] = pilot;
        }
        Ok(Self { symbols, layout })
    }

    pub fn symbols(&self) -> &[Complex64] {
        &self.symbols
    }

    pub fn layout(&self) -> &FrameLayout {
        &self.layout
    }

    /// Picks the data entries out of a length-`N` vector.
    pub fn extract_data(layout: &FrameLayout, v: &[Complex64]) -> Vec<Complex64> {
        layout.data.iter().map(|&k| v[k]).collect()
    }
}
