use num_complex::Complex64;

use super::gate::LocalUnitary;

/// Mixed state on `n_qubits` qubits, stored row-major as a dense `2^n × 2^n`
/// complex matrix. Qubit 0 is the most significant bit of a basis index.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    n_qubits: usize,
    dim: usize,
    data: Vec<Complex64>,
}

impl DensityMatrix {
    /// `|0…0⟩⟨0…0|`.
    pub fn zero_state(n_qubits: usize) -> Self {
        let dim = 1usize << n_qubits;
        let mut data = vec![Complex64::new(0.0, 0.0); dim * dim];
        data[0] = Complex64::new(1.0, 0.0);
        Self {
            n_qubits,
            dim,
            data,
        }
    }

    /// `|z⟩⟨z|` for a computational basis index.
    pub fn basis_state(n_qubits: usize, index: usize) -> Self {
        let mut rho = Self::zero_state(n_qubits);
        rho.data[0] = Complex64::new(0.0, 0.0);
        rho.data[index * rho.dim + index] = Complex64::new(1.0, 0.0);
        rho
    }

    pub fn maximally_mixed(n_qubits: usize) -> Self {
        let dim = 1usize << n_qubits;
        let mut data = vec![Complex64::new(0.0, 0.0); dim * dim];
        for i in 0..dim {
            data[i * dim + i] = Complex64::new(1.0 / dim as f64, 0.0);
        }
        Self {
            n_qubits,
            dim,
            data,
        }
    }

    /// Builds a state from raw row-major entries without validation.
    pub fn from_entries(n_qubits: usize, data: Vec<Complex64>) -> Self {
        let dim = 1usize << n_qubits;
        assert_eq!(data.len(), dim * dim, "entry count must be 4^n");
        Self {
            n_qubits,
            dim,
            data,
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.data[row * self.dim + col]
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.data
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim).map(|i| self.get(i, i).re).collect()
    }

    /// Largest elementwise deviation from Hermiticity.
    pub fn hermiticity_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for r in 0..self.dim {
            for c in r..self.dim {
                worst = worst.max((self.get(r, c) - self.get(c, r).conj()).norm());
            }
        }
        worst
    }

    /// `U ρ U†` for a gate acting on `targets`.
    pub(crate) fn conjugate_by(&mut self, targets: &[usize], u: &LocalUnitary) {
        let offsets = local_offsets(self.n_qubits, targets);
        left_multiply(&mut self.data, self.dim, self.dim, &offsets, u);
        right_multiply_adjoint(&mut self.data, self.dim, &offsets, u);
    }

    /// `(1 − p) ρ + p · (I/d on targets) ⊗ Tr_targets ρ`.
    pub(crate) fn depolarize(&mut self, targets: &[usize], rate: f64) {
        if rate == 0.0 {
            return;
        }
        let offsets = local_offsets(self.n_qubits, targets);
        let mask: usize = offsets.iter().fold(0, |m, &o| m | o);
        let d = offsets.len();
        let keep = 1.0 - rate;
        let mix = rate / d as f64;
        let dim = self.dim;
        for r0 in (0..dim).filter(|r| r & mask == 0) {
            for c0 in (0..dim).filter(|c| c & mask == 0) {
                let traced: Complex64 = offsets
                    .iter()
                    .map(|&o| self.data[(r0 | o) * dim + (c0 | o)])
                    .sum();
                for &ro in &offsets {
                    for &co in &offsets {
                        let idx = (r0 | ro) * dim + (c0 | co);
                        self.data[idx] *= keep;
                        if ro == co {
                            self.data[idx] += traced * mix;
                        }
                    }
                }
            }
        }
    }
}

/// Global index offsets for each local basis index of `targets`; the first
/// target is the most significant local bit.
pub(crate) fn local_offsets(n_qubits: usize, targets: &[usize]) -> Vec<usize> {
    let k = targets.len();
    (0..1usize << k)
        .map(|t| {
            targets.iter().enumerate().fold(0, |acc, (i, &q)| {
                let bit = (t >> (k - 1 - i)) & 1;
                acc | (bit << (n_qubits - 1 - q))
            })
        })
        .collect()
}

/// Replaces the `rows × cols` row-major matrix `m` with `U m`, where `U`
/// acts on the row index through `offsets`.
pub(crate) fn left_multiply(
    m: &mut [Complex64],
    rows: usize,
    cols: usize,
    offsets: &[usize],
    u: &LocalUnitary,
) {
    let mask: usize = offsets.iter().fold(0, |acc, &o| acc | o);
    let d = offsets.len();
    let mut buf = vec![Complex64::new(0.0, 0.0); d];
    for r0 in (0..rows).filter(|r| r & mask == 0) {
        for c in 0..cols {
            for (t, &o) in offsets.iter().enumerate() {
                buf[t] = m[(r0 | o) * cols + c];
            }
            for (s, &o) in offsets.iter().enumerate() {
                let mut acc = Complex64::new(0.0, 0.0);
                for (t, v) in buf.iter().enumerate() {
                    acc += u.get(s, t) * v;
                }
                m[(r0 | o) * cols + c] = acc;
            }
        }
    }
}

/// Replaces the square matrix `m` with `m U†`.
fn right_multiply_adjoint(m: &mut [Complex64], dim: usize, offsets: &[usize], u: &LocalUnitary) {
    let mask: usize = offsets.iter().fold(0, |acc, &o| acc | o);
    let d = offsets.len();
    let mut buf = vec![Complex64::new(0.0, 0.0); d];
    for r in 0..dim {
        let row = &mut m[r * dim..(r + 1) * dim];
        for c0 in (0..dim).filter(|c| c & mask == 0) {
            for (t, &o) in offsets.iter().enumerate() {
                buf[t] = row[c0 | o];
            }
            for (s, &o) in offsets.iter().enumerate() {
                let mut acc = Complex64::new(0.0, 0.0);
                for (t, v) in buf.iter().enumerate() {
                    acc += v * u.get(s, t).conj();
                }
                row[c0 | o] = acc;
            }
        }
    }
}
