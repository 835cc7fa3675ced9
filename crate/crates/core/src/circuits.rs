//! Trotterized transverse-field Ising circuits, gate folding, and a numerical
//! check of the first-order Trotter error.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{QemError, Result};
use crate::simcore::{exact_unitary, operator_norm, Circuit, Gate, NoiseModel, MAX_UNITARY_QUBITS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    /// Couplings `(j, j+1)` for `j = 0 … n−2`.
    #[default]
    Open,
    /// Open couplings plus `(n−1, 0)`.
    Periodic,
}

/// Parameters of `H = J Σ Z_j Z_{j+1} + B Σ X_j` evolved for time `t` with
/// `trotter_steps` first-order steps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TfiParams {
    pub n_qubits: usize,
    pub coupling: f64,
    pub field: f64,
    pub time: f64,
    pub trotter_steps: u32,
    #[serde(default)]
    pub boundary: Boundary,
}

impl TfiParams {
    pub fn new(n_qubits: usize, coupling: f64, field: f64, time: f64, trotter_steps: u32) -> Self {
        Self {
            n_qubits,
            coupling,
            field,
            time,
            trotter_steps,
            boundary: Boundary::Open,
        }
    }

    pub fn with_boundary(mut self, boundary: Boundary) -> Self {
        self.boundary = boundary;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_qubits < 2 {
            return Err(QemError::InvalidParams(format!(
                "need at least 2 qubits, got {}",
                self.n_qubits
            )));
        }
        if self.trotter_steps < 1 {
            return Err(QemError::InvalidParams("Trotter number must be at least 1".into()));
        }
        if !(self.time > 0.0 && self.time.is_finite()) {
            return Err(QemError::InvalidParams(format!("time must be positive, got {}", self.time)));
        }
        if !self.coupling.is_finite() || !self.field.is_finite() {
            return Err(QemError::InvalidParams("coefficients must be finite".into()));
        }
        Ok(())
    }

    /// Coupled pairs in application order.
    pub fn bonds(&self) -> Vec<(usize, usize)> {
        let n = self.n_qubits;
        let mut bonds: Vec<_> = (0..n - 1).map(|j| (j, j + 1)).collect();
        // with two sites the wrap-around bond duplicates (0, 1)
        if self.boundary == Boundary::Periodic && n > 2 {
            bonds.push((n - 1, 0));
        }
        bonds
    }
}

/// Odd positive noise scale factor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub struct ScaleFactor(u32);

impl ScaleFactor {
    pub const ONE: ScaleFactor = ScaleFactor(1);

    pub fn new(lambda: u32) -> Result<Self> {
        if lambda.is_multiple_of(2) {
            return Err(QemError::InvalidScaleFactor(lambda));
        }
        Ok(Self(lambda))
    }

    pub fn get(self) -> u32 {
        self.0
    }

    pub fn as_f64(self) -> f64 {
        f64::from(self.0)
    }
}

impl TryFrom<u32> for ScaleFactor {
    type Error = QemError;

    fn try_from(value: u32) -> Result<Self> {
        Self::new(value)
    }
}

impl From<ScaleFactor> for u32 {
    fn from(value: ScaleFactor) -> Self {
        value.0
    }
}

/// Each step applies the field layer `RX(2Bt/M)` on every qubit followed by
/// the coupling layer `RZZ(2Jt/M)` on every bond, each RZZ expanded as
/// `CNOT · RZ · CNOT`.
pub fn build_trotter_tfi(params: &TfiParams) -> Result<Circuit> {
    params.validate()?;
    let dt = params.time / f64::from(params.trotter_steps);
    let rx_angle = 2.0 * params.field * dt;
    let rzz_angle = 2.0 * params.coupling * dt;
    let bonds = params.bonds();
    let mut circuit = Circuit::new(params.n_qubits)?;
    for _ in 0..params.trotter_steps {
        for q in 0..params.n_qubits {
            circuit.push(Gate::rx(rx_angle, q))?;
        }
        for &(a, b) in &bonds {
            circuit.push(Gate::cnot(a, b))?;
            circuit.push(Gate::rz(rzz_angle, b))?;
            circuit.push(Gate::cnot(a, b))?;
        }
    }
    Ok(circuit)
}

/// Replaces every gate `g` by `g (g† g)^((λ−1)/2)`, leaving the unitary
/// unchanged while applying each gate's noise `λ` times.
pub fn fold_circuit(circuit: &Circuit, scale: ScaleFactor) -> Result<Circuit> {
    let repeats = (scale.get() - 1) / 2;
    let mut folded = Circuit::new(circuit.n_qubits())?;
    for g in circuit.gates() {
        folded.push(g.clone())?;
        let inverse = g.dagger();
        for _ in 0..repeats {
            folded.push(inverse.clone())?;
            folded.push(g.clone())?;
        }
    }
    Ok(folded)
}

/// How a scale factor amplifies noise.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Amplification {
    /// Gate folding; the circuit grows, the noise model is unchanged.
    #[default]
    Fold,
    /// Gate error rates multiplied by λ on the original circuit.
    RateScale,
}

pub fn amplify(
    circuit: &Circuit,
    noise: &NoiseModel,
    scale: ScaleFactor,
    mode: Amplification,
) -> Result<(Circuit, NoiseModel)> {
    match mode {
        Amplification::Fold => Ok((fold_circuit(circuit, scale)?, *noise)),
        Amplification::RateScale => Ok((circuit.clone(), noise.scale_gate_rates(scale.as_f64())?)),
    }
}

/// Dense real-symmetric TFI Hamiltonian in the computational basis.
pub fn tfi_hamiltonian(params: &TfiParams) -> Result<DMatrix<f64>> {
    params.validate()?;
    let n = params.n_qubits;
    if n > MAX_UNITARY_QUBITS {
        return Err(QemError::WidthExceeded {
            width: n,
            limit: MAX_UNITARY_QUBITS,
        });
    }
    let dim = 1usize << n;
    let bit = |q: usize| 1usize << (n - 1 - q);
    let bonds = params.bonds();
    let mut h = DMatrix::<f64>::zeros(dim, dim);
    for z in 0..dim {
        let diag: f64 = bonds
            .iter()
            .map(|&(a, b)| {
                let parity = ((z & bit(a)) != 0) ^ ((z & bit(b)) != 0);
                if parity {
                    -1.0
                } else {
                    1.0
                }
            })
            .sum();
        h[(z, z)] += params.coupling * diag;
        for q in 0..n {
            h[(z ^ bit(q), z)] += params.field;
        }
    }
    Ok(h)
}

/// `exp(−i H t)` through the eigendecomposition of the real symmetric `H`.
pub fn exact_evolution(params: &TfiParams) -> Result<DMatrix<Complex64>> {
    let h = tfi_hamiltonian(params)?;
    let dim = h.nrows();
    let eig = SymmetricEigen::new(h);
    let v = eig.eigenvectors.map(|x| Complex64::new(x, 0.0));
    let phases = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        dim,
        eig.eigenvalues
            .iter()
            .map(|&e| Complex64::from_polar(1.0, -e * params.time)),
    ));
    Ok(&v * phases * v.adjoint())
}

/// Operator norm of `exp(−iHt) − U_Trotter`.
pub fn trotter_defect(params: &TfiParams) -> Result<f64> {
    let exact = exact_evolution(params)?;
    let trotter = exact_unitary(&build_trotter_tfi(params)?)?;
    Ok(operator_norm(&(exact - trotter)))
}
