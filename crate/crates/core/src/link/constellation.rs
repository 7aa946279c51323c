use crate::{error::invalid, Complex64, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConstellationKind {
    Qpsk,
    Qam16,
}

/// Gray-labelled unit-average-energy constellation. `points[label]` is the
/// point carrying `label`, most significant bit first.
#[derive(Debug, Clone, PartialEq)]
pub struct Constellation {
    kind: ConstellationKind,
    points: Vec<Complex64>,
    bits_per_symbol: usize,
}

impl Constellation {
    pub fn new(kind: ConstellationKind) -> Self {
        // Per-axis Gray levels indexed by the axis label bits.
        let (levels, scale, axis_bits): (&[f64], f64, usize) = match kind {
            ConstellationKind::Qpsk => (&[1.0, -1.0], 0.5f64.sqrt(), 1),
            // 00 → −3, 01 → −1, 11 → +1, 10 → +3
            ConstellationKind::Qam16 => (&[-3.0, -1.0, 3.0, 1.0], 0.1f64.sqrt(), 2),
        };
        let m = 1usize << (2 * axis_bits);
        let points = (0..m)
            .map(|label| {
                let i = label >> axis_bits;
                let q = label & ((1 << axis_bits) - 1);
                Complex64::new(levels[i], levels[q]) * scale
            })
            .collect();
        Self {
            kind,
            points,
            bits_per_symbol: 2 * axis_bits,
        }
    }

    pub fn kind(&self) -> ConstellationKind {
        self.kind
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    pub fn bits_per_symbol(&self) -> usize {
        self.bits_per_symbol
    }

    pub fn map_bits(&self, bits: &[bool]) -> Result<Vec<Complex64>> {
        let k = self.bits_per_symbol;
        if !bits.len().is_multiple_of(k) {
            return Err(invalid(format!(
                "bit count {} is not a multiple of {k}",
                bits.len()
            )));
        }
        Ok(bits
            .chunks(k)
            .map(|chunk| {
                let label = chunk.iter().fold(0usize, |acc, &b| (acc << 1) | b as usize);
                self.points[label]
            })
            .collect())
    }

    /// Hard minimum-distance decisions; the lowest label wins exact ties.
    pub fn demap_symbols(&self, x: &[Complex64]) -> Vec<bool> {
        let k = self.bits_per_symbol;
        let mut bits = Vec::with_capacity(x.len() * k);
        for z in x {
            let mut best = 0;
            let mut best_d = f64::INFINITY;
            for (label, p) in self.points.iter().enumerate() {
                let d = (z - p).norm_sqr();
                if d < best_d {
                    best = label;
                    best_d = d;
                }
            }
            bits.extend((0..k).rev().map(|b| (best >> b) & 1 == 1));
        }
        bits
    }

    /// Smallest distance between two distinct points.
    pub fn min_distance(&self) -> f64 {
        let mut d = f64::INFINITY;
        for (i, a) in self.points.iter().enumerate() {
            for b in &self.points[i + 1..] {
                d = d.min((a - b).norm());
            }
        }
        d
    }
}
