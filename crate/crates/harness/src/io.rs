//! Distribution files.
//!
//! ```text
//! n_bits=3,lambda=1
//! 000,9.5000000000000000e-1
//! 101,5.0000000000000000e-2
//! ```
//!
//! Bins not listed are zero. Mitigated outputs are written with `lambda=0`.

use std::fmt::Write as _;
use std::path::Path;

use qem_core::distribution::{format_bitstring, parse_bitstring, MAX_BITS};
use qem_core::{BinValues, Distribution, QuasiDistribution};

use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct DistributionFile {
    pub lambda: f64,
    pub values: QuasiDistribution,
}

impl DistributionFile {
    pub fn n_bits(&self) -> usize {
        self.values.n_bits()
    }

    /// Fails unless the values form a normalized distribution.
    pub fn to_distribution(&self) -> Result<Distribution> {
        Ok(Distribution::new(self.n_bits(), self.values.values().to_vec())?)
    }
}

pub fn format_distribution<D: BinValues>(values: &D, lambda: f64) -> String {
    let n = values.n_bits();
    let mut out = format!("n_bits={n},lambda={lambda}\n");
    for (z, v) in values.values().iter().enumerate().filter(|(_, v)| **v != 0.0) {
        writeln!(out, "{},{v:.16e}", format_bitstring(z, n)).expect("writing to a String");
    }
    out
}

fn malformed(line: usize, msg: impl std::fmt::Display) -> HarnessError {
    HarnessError::DistributionFile(format!("line {line}: {msg}"))
}

fn parse_header(line: &str) -> Result<(usize, f64)> {
    let mut n_bits = None;
    let mut lambda = None;
    for field in line.split(',') {
        match field.trim().split_once('=') {
            Some(("n_bits", v)) => n_bits = v.parse::<usize>().ok(),
            Some(("lambda", v)) => lambda = v.parse::<f64>().ok().filter(|l| l.is_finite() && *l >= 0.0),
            _ => return Err(malformed(1, format!("unexpected header field {field:?}"))),
        }
    }
    match (n_bits, lambda) {
        (Some(n), Some(l)) if (1..=MAX_BITS).contains(&n) => Ok((n, l)),
        _ => Err(malformed(1, "header must be n_bits=<n>,lambda=<λ>")),
    }
}

pub fn parse_distribution(text: &str) -> Result<DistributionFile> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines.next().ok_or_else(|| malformed(1, "empty file"))?;
    let (n_bits, lambda) = parse_header(header)?;
    let mut values = vec![0.0; 1 << n_bits];
    let mut seen = vec![false; 1 << n_bits];
    for (i, line) in lines {
        let (bits, value) = line.split_once(',').ok_or_else(|| malformed(i + 1, "expected bitstring,probability"))?;
        let bits = bits.trim();
        if bits.len() != n_bits {
            return Err(malformed(i + 1, format!("{bits:?} is not {n_bits} bits wide")));
        }
        let z = parse_bitstring(bits).map_err(|e| malformed(i + 1, e))?;
        let v: f64 = value.trim().parse().map_err(|_| malformed(i + 1, format!("bad value {value:?}")))?;
        if std::mem::replace(&mut seen[z], true) {
            return Err(malformed(i + 1, format!("duplicate bitstring {bits}")));
        }
        values[z] = v;
    }
    Ok(DistributionFile {
        lambda,
        values: QuasiDistribution::new(n_bits, values)?,
    })
}

pub fn read_distribution(path: &Path) -> Result<DistributionFile> {
    parse_distribution(&std::fs::read_to_string(path)?).map_err(|e| match e {
        HarnessError::DistributionFile(msg) => HarnessError::DistributionFile(format!("{}: {msg}", path.display())),
        other => other,
    })
}

pub fn write_distribution<D: BinValues>(path: &Path, values: &D, lambda: f64) -> Result<()> {
    std::fs::write(path, format_distribution(values, lambda))?;
    Ok(())
}
