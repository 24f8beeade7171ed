//! Canonical circuit representation.
//!
//! A [`Circuit`] is an ordered list of one- and two-qubit [`Gate`]s. Gate
//! order is execution order. Parsers ([`json`], [`qasm`]) and the benchmark
//! generators ([`generate`]) all produce this type.

pub mod generate;
pub mod json;
pub mod qasm;
pub mod rng;

use std::fmt;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CircuitError {
    #[error("gate {index}: {reason}")]
    InvalidGate { index: usize, reason: String },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

/// Gate kinds admitted by the IR.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GateKind {
    H,
    X,
    Z,
    S,
    Sdg,
    /// `RZ(θ) = diag(e^{-iθ/2}, e^{iθ/2})`.
    Rz(f64),
    Cnot,
    Cz,
    Swap,
    /// Controlled RZ, control on the first qubit.
    Crz(f64),
    MeasureZ,
    Reset,
}

impl GateKind {
    /// Number of qubits the kind acts on.
    pub fn arity(self) -> usize {
        match self {
            GateKind::Cnot | GateKind::Cz | GateKind::Swap | GateKind::Crz(_) => 2,
            _ => 1,
        }
    }

    pub fn is_two_qubit(self) -> bool {
        self.arity() == 2
    }

    pub fn angle(self) -> Option<f64> {
        match self {
            GateKind::Rz(a) | GateKind::Crz(a) => Some(a),
            _ => None,
        }
    }

    /// Lowercase name used by the JSON schema.
    pub fn name(self) -> &'static str {
        match self {
            GateKind::H => "h",
            GateKind::X => "x",
            GateKind::Z => "z",
            GateKind::S => "s",
            GateKind::Sdg => "sdg",
            GateKind::Rz(_) => "rz",
            GateKind::Cnot => "cnot",
            GateKind::Cz => "cz",
            GateKind::Swap => "swap",
            GateKind::Crz(_) => "crz",
            GateKind::MeasureZ => "measure",
            GateKind::Reset => "reset",
        }
    }

    /// Inverse of [`GateKind::name`]; angled kinds take `angle`.
    pub fn from_name(name: &str, angle: Option<f64>) -> Option<GateKind> {
        let kind = match name {
            "h" => GateKind::H,
            "x" => GateKind::X,
            "z" => GateKind::Z,
            "s" => GateKind::S,
            "sdg" => GateKind::Sdg,
            "rz" => GateKind::Rz(angle?),
            "cnot" | "cx" => GateKind::Cnot,
            "cz" => GateKind::Cz,
            "swap" => GateKind::Swap,
            "crz" => GateKind::Crz(angle?),
            "measure" => GateKind::MeasureZ,
            "reset" => GateKind::Reset,
            _ => return None,
        };
        Some(kind)
    }
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.angle() {
            Some(a) => write!(f, "{}({a})", self.name()),
            None => f.write_str(self.name()),
        }
    }
}

/// Classical condition: apply the gate only if `clbit == value`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Condition {
    pub clbit: usize,
    pub value: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Gate {
    pub kind: GateKind,
    pub qubits: Vec<usize>,
    /// Measurement target; only set for [`GateKind::MeasureZ`].
    pub clbit: Option<usize>,
    pub condition: Option<Condition>,
}

impl Gate {
    pub fn new(kind: GateKind, qubits: &[usize]) -> Self {
        Gate {
            kind,
            qubits: qubits.to_vec(),
            clbit: None,
            condition: None,
        }
    }

    pub fn single(kind: GateKind, q: usize) -> Self {
        Gate::new(kind, &[q])
    }

    pub fn two(kind: GateKind, a: usize, b: usize) -> Self {
        Gate::new(kind, &[a, b])
    }

    pub fn measure(q: usize, clbit: usize) -> Self {
        Gate {
            kind: GateKind::MeasureZ,
            qubits: vec![q],
            clbit: Some(clbit),
            condition: None,
        }
    }

    pub fn conditioned(mut self, clbit: usize, value: bool) -> Self {
        self.condition = Some(Condition { clbit, value });
        self
    }

    pub fn is_two_qubit(&self) -> bool {
        self.kind.is_two_qubit()
    }

    fn check(&self, num_qubits: usize, num_clbits: usize) -> Result<(), String> {
        if self.qubits.len() != self.kind.arity() {
            return Err(format!(
                "{} expects {} qubit(s), got {}",
                self.kind.name(),
                self.kind.arity(),
                self.qubits.len()
            ));
        }
        for &q in &self.qubits {
            if q >= num_qubits {
                return Err(format!("qubit index {q} out of range (width {num_qubits})"));
            }
        }
        if self.qubits.len() == 2 && self.qubits[0] == self.qubits[1] {
            return Err(format!("repeated qubit {}", self.qubits[0]));
        }
        if let Some(a) = self.kind.angle() {
            if !a.is_finite() {
                return Err("angle is not finite".into());
            }
        }
        match (self.kind, self.clbit) {
            (GateKind::MeasureZ, None) => return Err("measure requires a classical target".into()),
            (GateKind::MeasureZ, Some(c)) if c >= num_clbits => {
                return Err(format!("classical bit {c} out of range ({num_clbits} clbits)"))
            }
            (GateKind::MeasureZ, Some(_)) => {}
            (_, Some(_)) => return Err("only measure may carry a classical target".into()),
            (_, None) => {}
        }
        if let Some(cond) = self.condition {
            if cond.clbit >= num_clbits {
                return Err(format!(
                    "condition bit {} out of range ({num_clbits} clbits)",
                    cond.clbit
                ));
            }
        }
        Ok(())
    }
}

/// An ordered gate list over `num_qubits` qubits and `num_clbits` classical bits.
#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    num_qubits: usize,
    num_clbits: usize,
    gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(num_qubits: usize, num_clbits: usize) -> Self {
        Circuit {
            num_qubits,
            num_clbits,
            gates: Vec::new(),
        }
    }

    /// Builds a circuit, checking every gate against the register sizes.
    pub fn from_gates(
        num_qubits: usize,
        num_clbits: usize,
        gates: Vec<Gate>,
    ) -> Result<Self, CircuitError> {
        for (index, g) in gates.iter().enumerate() {
            g.check(num_qubits, num_clbits)
                .map_err(|reason| CircuitError::InvalidGate { index, reason })?;
        }
        Ok(Circuit {
            num_qubits,
            num_clbits,
            gates,
        })
    }

    pub fn push(&mut self, gate: Gate) -> Result<(), CircuitError> {
        gate.check(self.num_qubits, self.num_clbits)
            .map_err(|reason| CircuitError::InvalidGate {
                index: self.gates.len(),
                reason,
            })?;
        self.gates.push(gate);
        Ok(())
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn num_clbits(&self) -> usize {
        self.num_clbits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn two_qubit_count(&self) -> usize {
        self.gates.iter().filter(|g| g.is_two_qubit()).count()
    }

    /// Number of two-qubit gates with one qubit below `boundary` and one at or above it.
    pub fn crossing_count(&self, boundary: usize) -> usize {
        self.gates
            .iter()
            .filter(|g| g.is_two_qubit())
            .filter(|g| (g.qubits[0] < boundary) != (g.qubits[1] < boundary))
            .count()
    }
}
