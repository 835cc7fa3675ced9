//! Exact density-matrix simulation under a parametric depolarizing noise
//! model with classical readout flips.

mod density;
mod gate;

pub use density::DensityMatrix;
pub use gate::{Gate, GateKind, LocalUnitary};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::distribution::Distribution;
use crate::error::{QemError, Result};
use density::{left_multiply, local_offsets};

/// Default width limit for [`simulate`].
pub const DEFAULT_MAX_QUBITS: usize = 12;

/// Width limit for [`exact_unitary`].
pub const MAX_UNITARY_QUBITS: usize = 6;

/// Diagonal entries below this are reported as a simulator defect.
const NEGATIVE_DIAGONAL_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Circuit {
    n_qubits: usize,
    gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(n_qubits: usize) -> Result<Self> {
        if n_qubits == 0 {
            return Err(QemError::InvalidParams("circuit needs at least one qubit".into()));
        }
        Ok(Self {
            n_qubits,
            gates: Vec::new(),
        })
    }

    pub fn from_gates(n_qubits: usize, gates: Vec<Gate>) -> Result<Self> {
        let mut circuit = Self::new(n_qubits)?;
        for g in gates {
            circuit.push(g)?;
        }
        Ok(circuit)
    }

    pub fn push(&mut self, gate: Gate) -> Result<()> {
        gate.check_width(self.n_qubits)?;
        self.gates.push(gate);
        Ok(())
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }
}

/// Depolarizing rates per gate arity plus an independent per-bit readout flip.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub eps1: f64,
    pub eps2: f64,
    pub readout_flip: f64,
}

impl Default for NoiseModel {
    fn default() -> Self {
        Self {
            eps1: 0.001,
            eps2: 0.01,
            readout_flip: 0.01,
        }
    }
}

fn check_probability(name: &'static str, value: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&value) {
        return Err(QemError::InvalidProbability { name, value });
    }
    Ok(())
}

impl NoiseModel {
    pub fn new(eps1: f64, eps2: f64, readout_flip: f64) -> Result<Self> {
        let model = Self {
            eps1,
            eps2,
            readout_flip,
        };
        model.validate()?;
        Ok(model)
    }

    pub fn noiseless() -> Self {
        Self {
            eps1: 0.0,
            eps2: 0.0,
            readout_flip: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_probability("eps1", self.eps1)?;
        check_probability("eps2", self.eps2)?;
        check_probability("readout_flip", self.readout_flip)
    }

    /// Gate error rates multiplied by `factor`; readout is left unchanged.
    pub fn scale_gate_rates(&self, factor: f64) -> Result<Self> {
        Self::new(self.eps1 * factor, self.eps2 * factor, self.readout_flip)
    }

    pub fn rate_for_arity(&self, arity: usize) -> f64 {
        if arity == 1 {
            self.eps1
        } else {
            self.eps2
        }
    }
}

/// Returns `U ρ U†`.
pub fn apply_gate(mut state: DensityMatrix, gate: &Gate) -> Result<DensityMatrix> {
    gate.check_width(state.n_qubits())?;
    state.conjugate_by(&gate.targets, &gate.unitary());
    Ok(state)
}

/// Replaces the state on `targets` with the maximally mixed state with
/// probability `rate`.
pub fn apply_depolarizing(
    mut state: DensityMatrix,
    targets: &[usize],
    rate: f64,
) -> Result<DensityMatrix> {
    check_probability("rate", rate)?;
    for &q in targets {
        if q >= state.n_qubits() {
            return Err(QemError::TargetOutOfRange {
                qubit: q,
                width: state.n_qubits(),
            });
        }
    }
    for (i, q) in targets.iter().enumerate() {
        if targets[..i].contains(q) {
            return Err(QemError::DuplicateTargets(targets.to_vec()));
        }
    }
    state.depolarize(targets, rate);
    Ok(state)
}

pub fn simulate(circuit: &Circuit, noise: &NoiseModel) -> Result<DensityMatrix> {
    simulate_with_limit(circuit, noise, DEFAULT_MAX_QUBITS)
}

/// Runs `circuit` from `|0…0⟩`, following every gate with a depolarizing
/// channel on its targets.
pub fn simulate_with_limit(
    circuit: &Circuit,
    noise: &NoiseModel,
    max_qubits: usize,
) -> Result<DensityMatrix> {
    if circuit.n_qubits() > max_qubits {
        return Err(QemError::WidthExceeded {
            width: circuit.n_qubits(),
            limit: max_qubits,
        });
    }
    noise.validate()?;
    let mut state = DensityMatrix::zero_state(circuit.n_qubits());
    for gate in circuit.gates() {
        state.conjugate_by(&gate.targets, &gate.unitary());
        state.depolarize(&gate.targets, noise.rate_for_arity(gate.arity()));
    }
    Ok(state)
}

/// Reads `p_z = ρ_zz` and passes each bit through a symmetric flip channel.
pub fn output_distribution(state: &DensityMatrix, readout_flip: f64) -> Result<Distribution> {
    check_probability("readout_flip", readout_flip)?;
    let n = state.n_qubits();
    let mut probs = state.diagonal();
    for (z, p) in probs.iter_mut().enumerate() {
        if *p < -NEGATIVE_DIAGONAL_TOL {
            return Err(QemError::NegativeProbability { index: z, value: *p });
        }
        *p = p.max(0.0);
    }
    if readout_flip > 0.0 {
        for q in 0..n {
            let bit = 1usize << (n - 1 - q);
            for z in (0..probs.len()).filter(|z| z & bit == 0) {
                let (a, b) = (probs[z], probs[z | bit]);
                probs[z] = (1.0 - readout_flip) * a + readout_flip * b;
                probs[z | bit] = readout_flip * a + (1.0 - readout_flip) * b;
            }
        }
    }
    let sum: f64 = probs.iter().sum();
    for p in &mut probs {
        *p = (*p / sum).min(1.0);
    }
    Distribution::new(n, probs)
}

/// Product of the gate unitaries in application order.
pub fn exact_unitary(circuit: &Circuit) -> Result<DMatrix<Complex64>> {
    let n = circuit.n_qubits();
    if n > MAX_UNITARY_QUBITS {
        return Err(QemError::WidthExceeded {
            width: n,
            limit: MAX_UNITARY_QUBITS,
        });
    }
    let dim = 1usize << n;
    let mut data = vec![Complex64::new(0.0, 0.0); dim * dim];
    for i in 0..dim {
        data[i * dim + i] = Complex64::new(1.0, 0.0);
    }
    for gate in circuit.gates() {
        let offsets = local_offsets(n, &gate.targets);
        left_multiply(&mut data, dim, dim, &offsets, &gate.unitary());
    }
    Ok(DMatrix::from_row_slice(dim, dim, &data))
}

/// Largest singular value.
pub fn operator_norm(m: &DMatrix<Complex64>) -> f64 {
    m.clone()
        .singular_values()
        .iter()
        .fold(0.0_f64, |acc, &s| acc.max(s))
}
