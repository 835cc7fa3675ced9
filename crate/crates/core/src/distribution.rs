//! Measurement distributions over computational-basis bitstrings.
//!
//! Bitstrings are stored densely by integer index. Qubit 0 is the most
//! significant bit, so index `0b10` on two qubits is the string `"10"`
//! with qubit 0 measured as 1.

use serde::{Deserialize, Serialize};

use crate::error::{QemError, Result};

/// Normalization slack accepted when constructing a [`Distribution`].
pub const NORMALIZATION_TOL: f64 = 1e-9;

/// Largest bit-width handled by the dense representations.
pub const MAX_BITS: usize = 24;

pub fn format_bitstring(index: usize, n_bits: usize) -> String {
    if n_bits == 0 {
        return String::new();
    }
    format!("{index:0n_bits$b}")
}

pub fn parse_bitstring(s: &str) -> Result<usize> {
    if s.is_empty() || s.len() > MAX_BITS || !s.bytes().all(|b| b == b'0' || b == b'1') {
        return Err(QemError::InvalidDistribution(format!("bad bitstring {s:?}")));
    }
    Ok(usize::from_str_radix(s, 2).expect("validated binary digits"))
}

fn check_bits(n_bits: usize) -> Result<()> {
    if n_bits > MAX_BITS {
        return Err(QemError::WidthExceeded {
            width: n_bits,
            limit: MAX_BITS,
        });
    }
    Ok(())
}

/// Dense per-bin values shared by distributions and quasi-distributions.
pub trait BinValues {
    fn n_bits(&self) -> usize;
    fn values(&self) -> &[f64];
}

impl BinValues for Distribution {
    fn n_bits(&self) -> usize {
        self.n_bits
    }

    fn values(&self) -> &[f64] {
        &self.probs
    }
}

impl BinValues for QuasiDistribution {
    fn n_bits(&self) -> usize {
        self.n_bits
    }

    fn values(&self) -> &[f64] {
        &self.values
    }
}

/// A normalized probability distribution `{p_z}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Distribution {
    n_bits: usize,
    probs: Vec<f64>,
}

impl Distribution {
    /// Validates `p_z ∈ [0, 1]` and `Σ p_z = 1` within [`NORMALIZATION_TOL`].
    pub fn new(n_bits: usize, probs: Vec<f64>) -> Result<Self> {
        check_bits(n_bits)?;
        if probs.len() != 1 << n_bits {
            return Err(QemError::InvalidDistribution(format!(
                "expected {} entries for {n_bits} bits, got {}",
                1usize << n_bits,
                probs.len()
            )));
        }
        for (z, &p) in probs.iter().enumerate() {
            if !p.is_finite() || !(0.0..=1.0).contains(&p) {
                return Err(QemError::InvalidDistribution(format!(
                    "p[{}] = {p}",
                    format_bitstring(z, n_bits)
                )));
            }
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > NORMALIZATION_TOL {
            return Err(QemError::InvalidDistribution(format!("sums to {sum}")));
        }
        Ok(Self { n_bits, probs })
    }

    /// Builds a distribution from sparse `(index, p)` pairs; absent indices are 0.
    pub fn from_sparse(n_bits: usize, entries: impl IntoIterator<Item = (usize, f64)>) -> Result<Self> {
        check_bits(n_bits)?;
        let mut probs = vec![0.0; 1 << n_bits];
        for (z, p) in entries {
            if z >= probs.len() {
                return Err(QemError::InvalidDistribution(format!(
                    "index {z} out of range for {n_bits} bits"
                )));
            }
            probs[z] += p;
        }
        Self::new(n_bits, probs)
    }

    pub fn point_mass(n_bits: usize, index: usize) -> Result<Self> {
        Self::from_sparse(n_bits, [(index, 1.0)])
    }

    pub fn uniform(n_bits: usize) -> Result<Self> {
        check_bits(n_bits)?;
        let d = 1usize << n_bits;
        Self::new(n_bits, vec![1.0 / d as f64; d])
    }

    pub fn n_bits(&self) -> usize {
        self.n_bits
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn get(&self, index: usize) -> f64 {
        self.probs.get(index).copied().unwrap_or(0.0)
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Indices with non-zero probability, ascending.
    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.probs
            .iter()
            .enumerate()
            .filter(|(_, &p)| p != 0.0)
            .map(|(z, _)| z)
    }

    pub fn to_quasi(&self) -> QuasiDistribution {
        QuasiDistribution {
            n_bits: self.n_bits,
            values: self.probs.clone(),
        }
    }
}

/// Mitigated values `{p_z^QEM}`; entries may be negative or exceed one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuasiDistribution {
    n_bits: usize,
    values: Vec<f64>,
}

impl QuasiDistribution {
    pub fn new(n_bits: usize, values: Vec<f64>) -> Result<Self> {
        check_bits(n_bits)?;
        if values.len() != 1 << n_bits {
            return Err(QemError::InvalidDistribution(format!(
                "expected {} entries for {n_bits} bits, got {}",
                1usize << n_bits,
                values.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(QemError::InvalidDistribution(format!("non-finite value {v}")));
        }
        Ok(Self { n_bits, values })
    }

    pub fn zeros(n_bits: usize) -> Result<Self> {
        check_bits(n_bits)?;
        Ok(Self {
            n_bits,
            values: vec![0.0; 1 << n_bits],
        })
    }

    pub fn n_bits(&self) -> usize {
        self.n_bits
    }

    pub fn get(&self, index: usize) -> f64 {
        self.values.get(index).copied().unwrap_or(0.0)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }
}

/// Histogram of measured bitstrings.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counts {
    n_bits: usize,
    counts: Vec<u64>,
    total: u64,
}

impl Counts {
    pub fn new(n_bits: usize, counts: Vec<u64>) -> Result<Self> {
        check_bits(n_bits)?;
        if counts.len() != 1 << n_bits {
            return Err(QemError::InvalidDistribution(format!(
                "expected {} count bins, got {}",
                1usize << n_bits,
                counts.len()
            )));
        }
        let total = counts.iter().sum();
        Ok(Self {
            n_bits,
            counts,
            total,
        })
    }

    pub fn n_bits(&self) -> usize {
        self.n_bits
    }

    pub fn get(&self, index: usize) -> u64 {
        self.counts.get(index).copied().unwrap_or(0)
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    /// Non-zero bins, ascending.
    pub fn iter_nonzero(&self) -> impl Iterator<Item = (usize, u64)> + '_ {
        self.counts
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(z, &c)| (z, c))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bitstrings_put_qubit_zero_first() {
        assert_eq!(format_bitstring(0b10, 2), "10");
        assert_eq!(format_bitstring(1, 3), "001");
        assert_eq!(parse_bitstring("001").unwrap(), 1);
        assert!(parse_bitstring("0a1").is_err());
        assert!(parse_bitstring("").is_err());
    }

    #[test]
    fn rejects_unnormalized() {
        assert!(Distribution::new(1, vec![0.5, 0.6]).is_err());
        assert!(Distribution::new(1, vec![1.2, -0.2]).is_err());
        assert!(Distribution::new(1, vec![1.0]).is_err());
        assert!(Distribution::new(1, vec![0.25, 0.75]).is_ok());
    }

    #[test]
    fn absent_keys_are_zero() {
        let d = Distribution::from_sparse(2, [(3, 1.0)]).unwrap();
        assert_eq!(d.get(0), 0.0);
        assert_eq!(d.get(3), 1.0);
        assert_eq!(d.support().collect::<Vec<_>>(), vec![3]);
    }

    #[test]
    fn quasi_rejects_nan() {
        assert!(QuasiDistribution::new(1, vec![f64::NAN, 1.0]).is_err());
        assert!(QuasiDistribution::new(1, vec![-0.1, 1.1]).is_ok());
    }
}
