use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{QemError, Result};

/// Gate kinds supported by the simulator. Angles are in radians.
///
/// Rotation conventions: `RX(θ) = exp(-iθX/2)`, `RZ(θ) = exp(-iθZ/2)`,
/// `RZZ(θ) = exp(-iθ Z⊗Z/2)`. For `CNOT` the first target is the control.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum GateKind {
    Rx(f64),
    Rz(f64),
    Sx,
    X,
    Cnot,
    Rzz(f64),
}

impl GateKind {
    pub fn arity(&self) -> usize {
        match self {
            GateKind::Rx(_) | GateKind::Rz(_) | GateKind::Sx | GateKind::X => 1,
            GateKind::Cnot | GateKind::Rzz(_) => 2,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            GateKind::Rx(_) => "rx",
            GateKind::Rz(_) => "rz",
            GateKind::Sx => "sx",
            GateKind::X => "x",
            GateKind::Cnot => "cx",
            GateKind::Rzz(_) => "rzz",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Gate {
    pub kind: GateKind,
    pub targets: Vec<usize>,
    /// When set, the gate acts as the adjoint of `kind`.
    pub inverse: bool,
}

/// Row-major square matrix acting on the gate's local basis. For two-qubit
/// gates the local index is `(bit of targets[0]) << 1 | bit of targets[1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalUnitary {
    pub dim: usize,
    pub entries: Vec<Complex64>,
}

impl LocalUnitary {
    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.entries[row * self.dim + col]
    }

    pub fn adjoint(&self) -> Self {
        let mut entries = vec![Complex64::new(0.0, 0.0); self.entries.len()];
        for r in 0..self.dim {
            for c in 0..self.dim {
                entries[c * self.dim + r] = self.entries[r * self.dim + c].conj();
            }
        }
        Self {
            dim: self.dim,
            entries,
        }
    }
}

impl Gate {
    pub fn new(kind: GateKind, targets: Vec<usize>) -> Result<Self> {
        if targets.len() != kind.arity() {
            return Err(QemError::GateArity {
                gate: kind.name(),
                expected: kind.arity(),
                got: targets.len(),
            });
        }
        if targets.len() == 2 && targets[0] == targets[1] {
            return Err(QemError::DuplicateTargets(targets));
        }
        Ok(Self {
            kind,
            targets,
            inverse: false,
        })
    }

    pub fn rx(theta: f64, q: usize) -> Self {
        Self::single(GateKind::Rx(theta), q)
    }

    pub fn rz(theta: f64, q: usize) -> Self {
        Self::single(GateKind::Rz(theta), q)
    }

    pub fn sx(q: usize) -> Self {
        Self::single(GateKind::Sx, q)
    }

    pub fn x(q: usize) -> Self {
        Self::single(GateKind::X, q)
    }

    /// Panics if `control == target`.
    pub fn cnot(control: usize, target: usize) -> Self {
        Self::new(GateKind::Cnot, vec![control, target]).expect("cnot targets must differ")
    }

    /// Panics if `a == b`.
    pub fn rzz(theta: f64, a: usize, b: usize) -> Self {
        Self::new(GateKind::Rzz(theta), vec![a, b]).expect("rzz targets must differ")
    }

    fn single(kind: GateKind, q: usize) -> Self {
        Self {
            kind,
            targets: vec![q],
            inverse: false,
        }
    }

    /// The adjoint gate.
    pub fn dagger(&self) -> Self {
        Self {
            kind: self.kind,
            targets: self.targets.clone(),
            inverse: !self.inverse,
        }
    }

    pub fn arity(&self) -> usize {
        self.kind.arity()
    }

    pub fn check_width(&self, width: usize) -> Result<()> {
        for &q in &self.targets {
            if q >= width {
                return Err(QemError::TargetOutOfRange { qubit: q, width });
            }
        }
        Ok(())
    }

    pub fn unitary(&self) -> LocalUnitary {
        let u = base_unitary(&self.kind);
        if self.inverse {
            u.adjoint()
        } else {
            u
        }
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let dag = if self.inverse { "†" } else { "" };
        match self.kind {
            GateKind::Rx(t) | GateKind::Rz(t) | GateKind::Rzz(t) => {
                write!(f, "{}{}({:.6}) {:?}", self.kind.name(), dag, t, self.targets)
            }
            _ => write!(f, "{}{} {:?}", self.kind.name(), dag, self.targets),
        }
    }
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn base_unitary(kind: &GateKind) -> LocalUnitary {
    let zero = c(0.0, 0.0);
    let one = c(1.0, 0.0);
    let entries = match *kind {
        GateKind::Rx(theta) => {
            let (s, co) = (theta / 2.0).sin_cos();
            vec![c(co, 0.0), c(0.0, -s), c(0.0, -s), c(co, 0.0)]
        }
        GateKind::Rz(theta) => {
            let half = theta / 2.0;
            vec![Complex64::from_polar(1.0, -half), zero, zero, Complex64::from_polar(1.0, half)]
        }
        GateKind::Sx => vec![c(0.5, 0.5), c(0.5, -0.5), c(0.5, -0.5), c(0.5, 0.5)],
        GateKind::X => vec![zero, one, one, zero],
        GateKind::Cnot => vec![
            one, zero, zero, zero, //
            zero, one, zero, zero, //
            zero, zero, zero, one, //
            zero, zero, one, zero,
        ],
        GateKind::Rzz(theta) => {
            let minus = Complex64::from_polar(1.0, -theta / 2.0);
            let plus = Complex64::from_polar(1.0, theta / 2.0);
            vec![
                minus, zero, zero, zero, //
                zero, plus, zero, zero, //
                zero, zero, plus, zero, //
                zero, zero, zero, minus,
            ]
        }
    };
    let dim = 1 << kind.arity();
    debug_assert_eq!(entries.len(), dim * dim);
    LocalUnitary { dim, entries }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn product(a: &LocalUnitary, b: &LocalUnitary) -> LocalUnitary {
        let d = a.dim;
        let mut entries = vec![c(0.0, 0.0); d * d];
        for r in 0..d {
            for col in 0..d {
                entries[r * d + col] = (0..d).map(|k| a.get(r, k) * b.get(k, col)).sum();
            }
        }
        LocalUnitary { dim: d, entries }
    }

    fn distance_from_identity(u: &LocalUnitary) -> f64 {
        let d = u.dim;
        let mut worst: f64 = 0.0;
        for r in 0..d {
            for col in 0..d {
                let id = if r == col { 1.0 } else { 0.0 };
                worst = worst.max((u.get(r, col) - c(id, 0.0)).norm());
            }
        }
        worst
    }

    #[test]
    fn every_gate_times_its_inverse_is_identity() {
        let gates = [
            Gate::rx(0.37, 0),
            Gate::rz(-1.2, 0),
            Gate::sx(0),
            Gate::x(0),
            Gate::cnot(0, 1),
            Gate::rzz(2.5, 0, 1),
        ];
        for g in &gates {
            let u = g.unitary();
            let ud = g.dagger().unitary();
            // entrywise bound implies an operator-norm bound of dim × this value
            assert!(distance_from_identity(&product(&u, &ud)) < 1e-13, "{g}");
            assert!(distance_from_identity(&product(&ud, &u)) < 1e-13, "{g}");
        }
    }

    #[test]
    fn sx_squared_is_x() {
        let sx = Gate::sx(0).unitary();
        let x = Gate::x(0).unitary();
        let sq = product(&sx, &sx);
        for (a, b) in sq.entries.iter().zip(&x.entries) {
            assert!((a - b).norm() < 1e-15);
        }
    }

    #[test]
    fn arity_is_checked() {
        assert!(Gate::new(GateKind::Cnot, vec![0]).is_err());
        assert!(Gate::new(GateKind::Rx(0.1), vec![0, 1]).is_err());
        assert!(matches!(
            Gate::new(GateKind::Rzz(0.1), vec![2, 2]),
            Err(QemError::DuplicateTargets(_))
        ));
    }
}
