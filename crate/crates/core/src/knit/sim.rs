//! Dense statevector and density-matrix simulation.
//!
//! Qubit `k` is bit `k` of the basis index (little-endian). Mid-circuit
//! measurements are handled by enumerating both outcomes as weighted branches.

use std::fmt;

use num_complex::Complex64;
use thiserror::Error;

use crate::circuit::{Circuit, Gate, GateKind};

pub const MAX_SIM_QUBITS: usize = 20;

/// Branches below this probability are dropped.
const MIN_BRANCH_PROB: f64 = 1e-15;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("{qubits} qubits exceed the simulator limit of {limit}")]
    TooWide { qubits: usize, limit: usize },
    #[error("initial state has {got} amplitudes, expected {expected}")]
    BadInitialState { got: usize, expected: usize },
    #[error("observable covers {got} qubits, circuit has {expected}")]
    ObservableWidth { got: usize, expected: usize },
    #[error("invalid Pauli string: {0}")]
    BadPauli(String),
}

type C = Complex64;

const I: C = C::new(0.0, 1.0);

fn c(re: f64) -> C {
    C::new(re, 0.0)
}

/// 2x2 matrix `[[a, b], [c, d]]` in row-major order.
pub type Mat2 = [C; 4];

pub fn gate_matrix(kind: GateKind) -> Option<Mat2> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    Some(match kind {
        GateKind::H => [c(h), c(h), c(h), c(-h)],
        GateKind::X => [c(0.0), c(1.0), c(1.0), c(0.0)],
        GateKind::Z => [c(1.0), c(0.0), c(0.0), c(-1.0)],
        GateKind::S => [c(1.0), c(0.0), c(0.0), I],
        GateKind::Sdg => [c(1.0), c(0.0), c(0.0), -I],
        GateKind::Rz(t) => [C::from_polar(1.0, -t / 2.0), c(0.0), c(0.0), C::from_polar(1.0, t / 2.0)],
        _ => return None,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    num_qubits: usize,
    amps: Vec<C>,
}

impl StateVector {
    pub fn zero(num_qubits: usize) -> Result<Self, SimError> {
        check_width(num_qubits)?;
        let mut amps = vec![c(0.0); 1 << num_qubits];
        amps[0] = c(1.0);
        Ok(StateVector { num_qubits, amps })
    }

    pub fn basis(num_qubits: usize, index: usize) -> Result<Self, SimError> {
        let mut s = Self::zero(num_qubits)?;
        s.amps[0] = c(0.0);
        s.amps[index] = c(1.0);
        Ok(s)
    }

    /// Normalizes the given amplitudes.
    pub fn from_amplitudes(num_qubits: usize, amps: Vec<C>) -> Result<Self, SimError> {
        check_width(num_qubits)?;
        if amps.len() != 1 << num_qubits {
            return Err(SimError::BadInitialState {
                got: amps.len(),
                expected: 1 << num_qubits,
            });
        }
        let mut s = StateVector { num_qubits, amps };
        let n = s.norm_sqr().sqrt();
        s.scale(1.0 / n);
        Ok(s)
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn amplitudes(&self) -> &[C] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    fn scale(&mut self, f: f64) {
        for a in &mut self.amps {
            *a *= f;
        }
    }

    pub fn apply_1q(&mut self, m: &Mat2, q: usize) {
        let bit = 1 << q;
        for i in 0..self.amps.len() {
            if i & bit == 0 {
                let (a0, a1) = (self.amps[i], self.amps[i | bit]);
                self.amps[i] = m[0] * a0 + m[1] * a1;
                self.amps[i | bit] = m[2] * a0 + m[3] * a1;
            }
        }
    }

    pub fn apply_cnot(&mut self, control: usize, target: usize) {
        let (cb, tb) = (1 << control, 1 << target);
        for i in 0..self.amps.len() {
            if i & cb != 0 && i & tb == 0 {
                self.amps.swap(i, i | tb);
            }
        }
    }

    pub fn apply_cz(&mut self, a: usize, b: usize) {
        let mask = (1 << a) | (1 << b);
        for (i, amp) in self.amps.iter_mut().enumerate() {
            if i & mask == mask {
                *amp = -*amp;
            }
        }
    }

    pub fn apply_swap(&mut self, a: usize, b: usize) {
        let (ab, bb) = (1 << a, 1 << b);
        for i in 0..self.amps.len() {
            if i & ab != 0 && i & bb == 0 {
                self.amps.swap(i, i ^ ab ^ bb);
            }
        }
    }

    pub fn apply_crz(&mut self, control: usize, target: usize, theta: f64) {
        let (cb, tb) = (1 << control, 1 << target);
        let (p0, p1) = (C::from_polar(1.0, -theta / 2.0), C::from_polar(1.0, theta / 2.0));
        for (i, amp) in self.amps.iter_mut().enumerate() {
            if i & cb != 0 {
                *amp *= if i & tb == 0 { p0 } else { p1 };
            }
        }
    }

    /// Applies a unitary gate; measurement and reset are not unitary and are ignored here.
    pub fn apply_unitary(&mut self, kind: GateKind, qubits: &[usize]) {
        match kind {
            GateKind::Cnot => self.apply_cnot(qubits[0], qubits[1]),
            GateKind::Cz => self.apply_cz(qubits[0], qubits[1]),
            GateKind::Swap => self.apply_swap(qubits[0], qubits[1]),
            GateKind::Crz(t) => self.apply_crz(qubits[0], qubits[1], t),
            GateKind::MeasureZ | GateKind::Reset => {}
            single => self.apply_1q(&gate_matrix(single).expect("single-qubit gate"), qubits[0]),
        }
    }

    /// Probability of reading `1` on qubit `q`.
    pub fn prob_one(&self, q: usize) -> f64 {
        let bit = 1 << q;
        self.amps
            .iter()
            .enumerate()
            .filter(|(i, _)| i & bit != 0)
            .map(|(_, a)| a.norm_sqr())
            .sum()
    }

    /// Projects qubit `q` onto `outcome` and renormalizes; returns the outcome probability.
    pub fn collapse(&mut self, q: usize, outcome: bool) -> f64 {
        let bit = 1 << q;
        let mut p = 0.0;
        for (i, a) in self.amps.iter_mut().enumerate() {
            if (i & bit != 0) != outcome {
                *a = c(0.0);
            } else {
                p += a.norm_sqr();
            }
        }
        if p > 0.0 {
            self.scale(1.0 / p.sqrt());
        }
        p
    }

    /// `⟨ψ|P|ψ⟩` for a Pauli string.
    pub fn expectation(&self, obs: &PauliString) -> Result<f64, SimError> {
        if obs.len() != self.num_qubits {
            return Err(SimError::ObservableWidth {
                got: obs.len(),
                expected: self.num_qubits,
            });
        }
        let (x, z, ny) = obs.masks();
        let phase = [c(1.0), I, c(-1.0), -I][ny % 4];
        let mut acc = c(0.0);
        for (i, a) in self.amps.iter().enumerate() {
            let sign = if (i & z).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
            acc += self.amps[i ^ x].conj() * *a * sign;
        }
        Ok((acc * phase).re)
    }

    /// `|⟨self|other⟩|²`.
    pub fn fidelity(&self, other: &StateVector) -> f64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum::<C>()
            .norm_sqr()
    }
}

fn check_width(n: usize) -> Result<(), SimError> {
    if n > MAX_SIM_QUBITS {
        Err(SimError::TooWide {
            qubits: n,
            limit: MAX_SIM_QUBITS,
        })
    } else {
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

/// Pauli string; character `k` acts on qubit `k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PauliString(pub Vec<Pauli>);

impl PauliString {
    pub fn parse(s: &str) -> Result<Self, SimError> {
        s.chars()
            .map(|ch| match ch.to_ascii_uppercase() {
                'I' => Ok(Pauli::I),
                'X' => Ok(Pauli::X),
                'Y' => Ok(Pauli::Y),
                'Z' => Ok(Pauli::Z),
                _ => Err(SimError::BadPauli(s.to_string())),
            })
            .collect::<Result<Vec<_>, _>>()
            .map(PauliString)
    }

    pub fn identity(n: usize) -> Self {
        PauliString(vec![Pauli::I; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// X-flip mask, Z-phase mask and Y count.
    fn masks(&self) -> (usize, usize, usize) {
        let (mut x, mut z, mut ny) = (0, 0, 0);
        for (k, p) in self.0.iter().enumerate() {
            match p {
                Pauli::I => {}
                Pauli::X => x |= 1 << k,
                Pauli::Z => z |= 1 << k,
                Pauli::Y => {
                    x |= 1 << k;
                    z |= 1 << k;
                    ny += 1;
                }
            }
        }
        (x, z, ny)
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in &self.0 {
            let ch = match p {
                Pauli::I => 'I',
                Pauli::X => 'X',
                Pauli::Y => 'Y',
                Pauli::Z => 'Z',
            };
            write!(f, "{ch}")?;
        }
        Ok(())
    }
}

/// One measurement-outcome history.
#[derive(Debug, Clone, PartialEq)]
pub struct Branch {
    pub probability: f64,
    pub clbits: Vec<bool>,
    pub state: StateVector,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Initial {
    Basis(usize),
    Amplitudes(Vec<C>),
}

fn condition_holds(gate: &Gate, clbits: &[bool]) -> bool {
    gate.condition.is_none_or(|cond| clbits[cond.clbit] == cond.value)
}

/// Runs `circuit`, enumerating measurement outcomes. Unset classical bits read as 0.
pub fn simulate_statevector(circuit: &Circuit, initial: Initial) -> Result<Vec<Branch>, SimError> {
    let n = circuit.num_qubits();
    let state = match initial {
        Initial::Basis(i) => StateVector::basis(n, i)?,
        Initial::Amplitudes(a) => StateVector::from_amplitudes(n, a)?,
    };
    let mut branches = vec![Branch {
        probability: 1.0,
        clbits: vec![false; circuit.num_clbits()],
        state,
    }];
    for gate in circuit.gates() {
        let mut next = Vec::with_capacity(branches.len());
        for mut b in branches {
            if !condition_holds(gate, &b.clbits) {
                next.push(b);
                continue;
            }
            match gate.kind {
                GateKind::MeasureZ | GateKind::Reset => {
                    let q = gate.qubits[0];
                    for outcome in [false, true] {
                        let mut s = b.state.clone();
                        let p = s.collapse(q, outcome);
                        if p * b.probability < MIN_BRANCH_PROB {
                            continue;
                        }
                        let mut clbits = b.clbits.clone();
                        if gate.kind == GateKind::MeasureZ {
                            clbits[gate.clbit.expect("measurement target")] = outcome;
                        } else if outcome {
                            s.apply_1q(&gate_matrix(GateKind::X).unwrap(), q);
                        }
                        next.push(Branch {
                            probability: b.probability * p,
                            clbits,
                            state: s,
                        });
                    }
                }
                kind => {
                    b.state.apply_unitary(kind, &gate.qubits);
                    next.push(b);
                }
            }
        }
        branches = next;
    }
    Ok(branches)
}

/// Final state of a measurement-free circuit run from `|0…0⟩`.
pub fn final_state(circuit: &Circuit) -> Result<StateVector, SimError> {
    let mut branches = simulate_statevector(circuit, Initial::Basis(0))?;
    Ok(branches.swap_remove(0).state)
}

/// Exact `⟨O⟩`, averaged over measurement branches.
pub fn expectation(circuit: &Circuit, obs: &PauliString) -> Result<f64, SimError> {
    let mut total = 0.0;
    for b in simulate_statevector(circuit, Initial::Basis(0))? {
        total += b.probability * b.state.expectation(obs)?;
    }
    Ok(total)
}

/// Dense operator on `n` qubits, row-major `2^n × 2^n`.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    num_qubits: usize,
    data: Vec<C>,
}

impl DensityMatrix {
    pub fn zeros(num_qubits: usize) -> Self {
        let d = 1 << num_qubits;
        DensityMatrix {
            num_qubits,
            data: vec![c(0.0); d * d],
        }
    }

    fn dim(&self) -> usize {
        1 << self.num_qubits
    }

    pub fn get(&self, r: usize, col: usize) -> C {
        self.data[r * self.dim() + col]
    }

    pub fn set(&mut self, r: usize, col: usize, v: C) {
        let d = self.dim();
        self.data[r * d + col] = v;
    }

    /// The operator `P` itself for a Pauli string (not a state; used as a channel input).
    pub fn pauli(obs: &PauliString) -> Self {
        let n = obs.len();
        let mut m = DensityMatrix::zeros(n);
        let (x, z, ny) = obs.masks();
        let phase = [c(1.0), I, c(-1.0), -I][ny % 4];
        for i in 0..1usize << n {
            let sign = if (i & z).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
            m.set(i ^ x, i, phase * sign);
        }
        m
    }

    /// `ρ ↦ U ρ U†` for a single-qubit `U` on `q`.
    pub fn apply_1q(&mut self, m: &Mat2, q: usize) {
        let d = self.dim();
        let bit = 1 << q;
        for col in 0..d {
            for r in 0..d {
                if r & bit == 0 {
                    let (a0, a1) = (self.get(r, col), self.get(r | bit, col));
                    self.set(r, col, m[0] * a0 + m[1] * a1);
                    self.set(r | bit, col, m[2] * a0 + m[3] * a1);
                }
            }
        }
        let md = [m[0].conj(), m[2].conj(), m[1].conj(), m[3].conj()];
        for r in 0..d {
            for col in 0..d {
                if col & bit == 0 {
                    let (a0, a1) = (self.get(r, col), self.get(r, col | bit));
                    self.set(r, col, a0 * md[0] + a1 * md[2]);
                    self.set(r, col | bit, a0 * md[1] + a1 * md[3]);
                }
            }
        }
    }

    /// Permutation or diagonal unitaries acting on basis indices.
    fn apply_basis_map(&mut self, f: impl Fn(usize) -> (usize, C)) {
        let d = self.dim();
        let mut out = DensityMatrix::zeros(self.num_qubits);
        for r in 0..d {
            let (r2, pr) = f(r);
            for col in 0..d {
                let (c2, pc) = f(col);
                out.set(r2, c2, pr * self.get(r, col) * pc.conj());
            }
        }
        *self = out;
    }

    pub fn apply_unitary(&mut self, kind: GateKind, qubits: &[usize]) {
        match kind {
            GateKind::Cnot => {
                let (cb, tb) = (1 << qubits[0], 1 << qubits[1]);
                self.apply_basis_map(|i| (if i & cb != 0 { i ^ tb } else { i }, c(1.0)));
            }
            GateKind::Cz => {
                let mask = (1 << qubits[0]) | (1 << qubits[1]);
                self.apply_basis_map(|i| (i, c(if i & mask == mask { -1.0 } else { 1.0 })));
            }
            GateKind::Swap => {
                let (a, b) = (qubits[0], qubits[1]);
                self.apply_basis_map(|i| {
                    let (x, y) = ((i >> a) & 1, (i >> b) & 1);
                    (i & !(1 << a) & !(1 << b) | (y << a) | (x << b), c(1.0))
                });
            }
            GateKind::Crz(t) => {
                let (cb, tb) = (1 << qubits[0], 1 << qubits[1]);
                self.apply_basis_map(|i| {
                    let ph = if i & cb == 0 {
                        c(1.0)
                    } else {
                        C::from_polar(1.0, if i & tb == 0 { -t / 2.0 } else { t / 2.0 })
                    };
                    (i, ph)
                });
            }
            GateKind::MeasureZ | GateKind::Reset => {}
            single => self.apply_1q(&gate_matrix(single).expect("single-qubit gate"), qubits[0]),
        }
    }

    /// `ρ ↦ P₀ρP₀ − P₁ρP₁` on qubit `q`: a Z measurement weighted by `(−1)^outcome`.
    pub fn signed_measure(&mut self, q: usize) {
        let d = self.dim();
        let bit = 1 << q;
        for r in 0..d {
            for col in 0..d {
                let (br, bc) = (r & bit != 0, col & bit != 0);
                let v = self.get(r, col);
                let out = if br != bc {
                    c(0.0)
                } else if br {
                    -v
                } else {
                    v
                };
                self.set(r, col, out);
            }
        }
    }

    pub fn add_scaled(&mut self, other: &DensityMatrix, f: f64) {
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b * f;
        }
    }

    pub fn max_abs_diff(&self, other: &DensityMatrix) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}
