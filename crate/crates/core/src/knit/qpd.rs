//! Quasiprobability decompositions of two-qubit gates into local operations.

use crate::circuit::{Circuit, Gate, GateKind};

use super::sim::{DensityMatrix, PauliString, Pauli};

/// Operation on one endpoint qubit of a cut gate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LocalOp {
    Gate(GateKind),
    /// Z measurement whose outcome multiplies the sample by `(−1)^outcome`.
    SignedMeasure,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QpdTerm {
    pub coefficient: f64,
    /// Operations on the first and second endpoint qubit.
    pub ops: [Vec<LocalOp>; 2],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QpdTarget {
    Cnot,
    Cz,
    Identity,
}

impl QpdTarget {
    fn apply(self, rho: &mut DensityMatrix) {
        match self {
            QpdTarget::Cnot => rho.apply_unitary(GateKind::Cnot, &[0, 1]),
            QpdTarget::Cz => rho.apply_unitary(GateKind::Cz, &[0, 1]),
            QpdTarget::Identity => {}
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Qpd {
    pub target: QpdTarget,
    pub terms: Vec<QpdTerm>,
}

impl Qpd {
    pub fn kappa(&self) -> f64 {
        self.terms.iter().map(|t| t.coefficient.abs()).sum()
    }
}

fn g(kind: GateKind) -> LocalOp {
    LocalOp::Gate(kind)
}

/// Six-term decomposition of CZ with κ = 3.
///
/// `CZ = e^{-iπ/4} (S⊗S) exp(iπ/4 Z⊗Z)` and the ZZ rotation channel splits as
/// `½[id] + ½[Z⊗Z] + ½([S†⊗M] − [S⊗M] + [M⊗S†] − [M⊗S])` with `M` the signed
/// Z measurement. Every term is followed by `S⊗S`.
pub fn qpd_cz() -> Qpd {
    use GateKind::{Sdg, S, Z};
    use LocalOp::SignedMeasure as M;
    let raw: [(f64, Vec<LocalOp>, Vec<LocalOp>); 6] = [
        (0.5, vec![], vec![]),
        (0.5, vec![g(Z)], vec![g(Z)]),
        (0.5, vec![g(Sdg)], vec![M]),
        (-0.5, vec![g(S)], vec![M]),
        (0.5, vec![M], vec![g(Sdg)]),
        (-0.5, vec![M], vec![g(S)]),
    ];
    let terms = raw
        .into_iter()
        .map(|(coefficient, mut a, mut b)| {
            a.push(g(S));
            b.push(g(S));
            QpdTerm {
                coefficient,
                ops: [a, b],
            }
        })
        .collect();
    Qpd {
        target: QpdTarget::Cz,
        terms,
    }
}

/// CNOT as `(I⊗H) CZ (I⊗H)`. No term needs classical communication, so
/// `cc` does not change the decomposition.
pub fn qpd_cnot(_cc: bool) -> Qpd {
    let mut q = qpd_cz();
    q.target = QpdTarget::Cnot;
    for t in &mut q.terms {
        t.ops[1].insert(0, g(GateKind::H));
        t.ops[1].push(g(GateKind::H));
    }
    q
}

pub fn qpd_identity() -> Qpd {
    Qpd {
        target: QpdTarget::Identity,
        terms: vec![QpdTerm {
            coefficient: 1.0,
            ops: [vec![], vec![]],
        }],
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QpdCheck {
    pub passed: bool,
    pub max_deviation: f64,
    pub kappa: f64,
}

pub const QPD_TOLERANCE: f64 = 1e-10;

/// Compares `Σ aᵢ 𝓕ᵢ` with the target channel on all 16 two-qubit Pauli operators.
pub fn validate_qpd(qpd: &Qpd, target: QpdTarget) -> QpdCheck {
    let paulis = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];
    let mut worst = 0.0f64;
    for &a in &paulis {
        for &b in &paulis {
            let input = DensityMatrix::pauli(&PauliString(vec![a, b]));
            let mut expect = input.clone();
            target.apply(&mut expect);
            let mut sum = DensityMatrix::zeros(2);
            for term in &qpd.terms {
                let mut rho = input.clone();
                for (q, ops) in term.ops.iter().enumerate() {
                    for op in ops {
                        match *op {
                            LocalOp::Gate(kind) => rho.apply_unitary(kind, &[q]),
                            LocalOp::SignedMeasure => rho.signed_measure(q),
                        }
                    }
                }
                sum.add_scaled(&rho, term.coefficient);
            }
            worst = worst.max(sum.max_abs_diff(&expect));
        }
    }
    QpdCheck {
        passed: worst <= QPD_TOLERANCE,
        max_deviation: worst,
        kappa: qpd.kappa(),
    }
}

/// State transfer: qubit 0 (source) is moved onto qubit 1 (fresh target)
/// with one classical bit of feed-forward.
pub fn move_circuit() -> Circuit {
    Circuit::from_gates(
        2,
        1,
        vec![
            Gate::two(GateKind::Cnot, 0, 1),
            Gate::single(GateKind::H, 0),
            Gate::measure(0, 0),
            Gate::single(GateKind::Z, 1).conditioned(0, true),
        ],
    )
    .expect("static move circuit is valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shipped_decompositions_pass() {
        let cz = validate_qpd(&qpd_cz(), QpdTarget::Cz);
        assert!(cz.passed, "{cz:?}");
        assert_eq!(cz.kappa, 3.0);
        for cc in [false, true] {
            let cx = validate_qpd(&qpd_cnot(cc), QpdTarget::Cnot);
            assert!(cx.passed, "{cx:?}");
            assert_eq!(cx.kappa, 3.0);
            assert!(qpd_cnot(cc).terms.len() >= 2);
        }
        let id = validate_qpd(&qpd_identity(), QpdTarget::Identity);
        assert!(id.passed && id.kappa == 1.0);
    }

    #[test]
    fn broken_coefficient_fails() {
        let mut q = qpd_cnot(false);
        q.terms[2].coefficient = -q.terms[2].coefficient;
        let check = validate_qpd(&q, QpdTarget::Cnot);
        assert!(!check.passed);
        assert!(check.max_deviation > 0.1);
    }

    #[test]
    fn wrong_target_fails() {
        assert!(!validate_qpd(&qpd_cz(), QpdTarget::Cnot).passed);
    }
}
