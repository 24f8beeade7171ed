//! Subcircuit generation for individual cuts and exact recombination.

use serde_json::json;
use thiserror::Error;

use crate::circuit::{json as circuit_json, rng::SeededRng, Circuit, Condition, Gate, GateKind};
use crate::graph::{CuttingGraph, EdgeKind, GraphError};
use crate::model::{cuts_from_assignment, PartitionSolution};

use super::qpd::{qpd_cnot, qpd_cz, LocalOp, Qpd};
use super::sim::{gate_matrix, Pauli, PauliString, SimError, StateVector};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KnitError {
    #[error("edge {0} is a grouped cut; simultaneous cuts are priced but not simulated")]
    GroupedCutUnsupported(usize),
    #[error("no decomposition for the {kind} cut at edge {edge}")]
    UnpricedCut { edge: usize, kind: String },
    #[error("solution does not fit the circuit: {0}")]
    Mismatch(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Sim(#[from] SimError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LocalQubit {
    Original(usize),
    /// Fresh qubit receiving a state moved across the given wire edge.
    Ancilla { wire_edge: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct CutRecord {
    pub edge: usize,
    pub kind: EdgeKind,
    pub terms: usize,
    pub coefficients: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleEntry {
    pub weight: f64,
    /// Chosen QPD term per cut.
    pub terms: Vec<usize>,
    /// One circuit per partition over local qubits and the shared classical register.
    pub subcircuits: Vec<Circuit>,
    /// Global execution order as `(partition, gate index)`.
    pub schedule: Vec<(usize, usize)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubcircuitEnsemble {
    pub num_qubits: usize,
    pub num_clbits: usize,
    pub layouts: Vec<Vec<LocalQubit>>,
    /// Where each original qubit's state ends up: `(partition, local qubit)`.
    pub final_location: Vec<(usize, usize)>,
    /// Classical bits whose outcome flips the sign of a sample.
    pub sign_clbits: Vec<usize>,
    pub cuts: Vec<CutRecord>,
    pub entries: Vec<EnsembleEntry>,
}

enum Step {
    Fixed(usize, Gate),
    Cut {
        slot: usize,
        ends: [(usize, usize); 2],
        condition: Option<Condition>,
        sign_clbit: usize,
    },
}

struct Builder {
    layouts: Vec<Vec<LocalQubit>>,
    steps: Vec<Step>,
    qpds: Vec<Qpd>,
    cuts: Vec<CutRecord>,
    sign_clbits: Vec<usize>,
    num_clbits: usize,
}

impl Builder {
    fn alloc(&mut self, p: usize, q: LocalQubit) -> usize {
        self.layouts[p].push(q);
        self.layouts[p].len() - 1
    }

    fn clbit(&mut self) -> usize {
        self.num_clbits += 1;
        self.num_clbits - 1
    }

    fn cut(&mut self, edge: usize, kind: EdgeKind, qpd: Qpd, ends: [(usize, usize); 2], condition: Option<Condition>) {
        let sign_clbit = self.clbit();
        self.sign_clbits.push(sign_clbit);
        self.cuts.push(CutRecord {
            edge,
            kind,
            terms: qpd.terms.len(),
            coefficients: qpd.terms.iter().map(|t| t.coefficient).collect(),
        });
        self.steps.push(Step::Cut {
            slot: self.qpds.len(),
            ends,
            condition,
            sign_clbit,
        });
        self.qpds.push(qpd);
    }
}

/// Replaces every cut of `solution` by its decomposition and expands the
/// Cartesian product of terms. Wire cuts become a move circuit whose CNOT is cut.
pub fn generate_subcircuits(circuit: &Circuit, solution: &PartitionSolution) -> Result<SubcircuitEnsemble, KnitError> {
    let graph = CuttingGraph::build(circuit)?;
    let a = &solution.assignment;
    if a.len() != graph.num_vertices() {
        return Err(KnitError::Mismatch(format!(
            "{} labels for {} cutting-graph vertices",
            a.len(),
            graph.num_vertices()
        )));
    }
    let np = solution.num_partitions.max(a.iter().map(|&p| p + 1).max().unwrap_or(1));
    let cut = cuts_from_assignment(&graph, a);
    let listed: Vec<usize> = (0..cut.len()).filter(|&e| cut[e]).collect();
    if listed != solution.cut_edges {
        return Err(KnitError::Mismatch(format!(
            "assignment cuts {listed:?}, solution lists {:?}",
            solution.cut_edges
        )));
    }

    let mut b = Builder {
        layouts: vec![Vec::new(); np],
        steps: Vec::new(),
        qpds: Vec::new(),
        cuts: Vec::new(),
        sign_clbits: Vec::new(),
        num_clbits: circuit.num_clbits(),
    };
    let mut loc = Vec::with_capacity(circuit.num_qubits());
    for q in 0..circuit.num_qubits() {
        let p = match graph.qubit_vertices(q).first() {
            Some(&v) => a[v],
            None => solution
                .idle_placement
                .iter()
                .find(|&&(iq, _)| iq == q)
                .map_or(0, |&(_, p)| p),
        };
        if p >= np {
            return Err(KnitError::Mismatch(format!("qubit {q} placed in partition {p}")));
        }
        loc.push((p, b.alloc(p, LocalQubit::Original(q))));
    }

    for (i, gate) in circuit.gates().iter().enumerate() {
        if !gate.is_two_qubit() {
            let (p, l) = loc[gate.qubits[0]];
            let mut local = gate.clone();
            local.qubits = vec![l];
            b.steps.push(Step::Fixed(p, local));
            continue;
        }
        let vs = [
            graph.vertex_at(i, gate.qubits[0]).expect("two-qubit gate vertex"),
            graph.vertex_at(i, gate.qubits[1]).expect("two-qubit gate vertex"),
        ];
        for (k, &v) in vs.iter().enumerate() {
            let q = gate.qubits[k];
            let (src_p, src_l) = loc[q];
            if src_p == a[v] {
                continue;
            }
            let e = graph
                .incoming_wire(v)
                .ok_or_else(|| KnitError::Mismatch(format!("qubit {q} starts outside its first gate's partition")))?;
            if solution.is_grouped(e) {
                return Err(KnitError::GroupedCutUnsupported(e));
            }
            let dst_p = a[v];
            let anc = b.alloc(dst_p, LocalQubit::Ancilla { wire_edge: e });
            let c = b.clbit();
            b.cut(e, EdgeKind::Wire, qpd_cnot(true), [(src_p, src_l), (dst_p, anc)], None);
            b.steps.push(Step::Fixed(src_p, Gate::single(GateKind::H, src_l)));
            b.steps.push(Step::Fixed(src_p, Gate::measure(src_l, c)));
            b.steps.push(Step::Fixed(dst_p, Gate::single(GateKind::Z, anc).conditioned(c, true)));
            loc[q] = (dst_p, anc);
        }
        let (ends0, ends1) = (loc[gate.qubits[0]], loc[gate.qubits[1]]);
        if ends0.0 == ends1.0 {
            let mut local = gate.clone();
            local.qubits = vec![ends0.1, ends1.1];
            b.steps.push(Step::Fixed(ends0.0, local));
            continue;
        }
        let e = graph.gate_edge_of(vs[0]);
        if solution.is_grouped(e) {
            return Err(KnitError::GroupedCutUnsupported(e));
        }
        let qpd = match gate.kind {
            GateKind::Cnot => qpd_cnot(true),
            GateKind::Cz => qpd_cz(),
            other => {
                return Err(KnitError::UnpricedCut {
                    edge: e,
                    kind: other.name().to_string(),
                })
            }
        };
        b.cut(e, EdgeKind::Gate, qpd, [ends0, ends1], gate.condition);
    }

    let entries = expand(&b, np)?;
    Ok(SubcircuitEnsemble {
        num_qubits: circuit.num_qubits(),
        num_clbits: b.num_clbits,
        layouts: b.layouts,
        final_location: loc,
        sign_clbits: b.sign_clbits,
        cuts: b.cuts,
        entries,
    })
}

fn expand(b: &Builder, np: usize) -> Result<Vec<EnsembleEntry>, KnitError> {
    let sizes: Vec<usize> = b.qpds.iter().map(|q| q.terms.len()).collect();
    let total: usize = sizes.iter().product();
    let mut entries = Vec::with_capacity(total);
    let mut choice = vec![0usize; sizes.len()];
    for _ in 0..total {
        let mut gates: Vec<Vec<Gate>> = vec![Vec::new(); np];
        let mut schedule = Vec::new();
        let mut weight = 1.0;
        let mut emit = |p: usize, g: Gate, schedule: &mut Vec<(usize, usize)>| {
            gates[p].push(g);
            schedule.push((p, gates[p].len() - 1));
        };
        for step in &b.steps {
            match step {
                Step::Fixed(p, g) => emit(*p, g.clone(), &mut schedule),
                Step::Cut {
                    slot,
                    ends,
                    condition,
                    sign_clbit,
                } => {
                    let term = &b.qpds[*slot].terms[choice[*slot]];
                    weight *= term.coefficient;
                    for (side, &(p, l)) in ends.iter().enumerate() {
                        for op in &term.ops[side] {
                            let mut g = match *op {
                                LocalOp::Gate(kind) => Gate::single(kind, l),
                                LocalOp::SignedMeasure => Gate::measure(l, *sign_clbit),
                            };
                            g.condition = *condition;
                            emit(p, g, &mut schedule);
                        }
                    }
                }
            }
        }
        let subcircuits = gates
            .into_iter()
            .enumerate()
            .map(|(p, gs)| Circuit::from_gates(b.layouts[p].len(), b.num_clbits, gs))
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| KnitError::Mismatch(e.to_string()))?;
        entries.push(EnsembleEntry {
            weight,
            terms: choice.clone(),
            subcircuits,
            schedule,
        });
        // Odometer over term choices, last cut fastest.
        for k in (0..choice.len()).rev() {
            choice[k] += 1;
            if choice[k] < sizes[k] {
                break;
            }
            choice[k] = 0;
        }
    }
    Ok(entries)
}

/// Per-branch state while running all partitions side by side.
#[derive(Clone)]
struct JointBranch {
    probability: f64,
    clbits: Vec<bool>,
    states: Vec<StateVector>,
}

impl SubcircuitEnsemble {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// `Σ |weight|`, equal to the product of the cut κ factors.
    pub fn normalization(&self) -> f64 {
        self.entries.iter().map(|e| e.weight.abs()).sum()
    }

    /// Replaces the QPD coefficients of every cut and recomputes entry weights.
    pub fn reweight(&mut self, coefficients: &[Vec<f64>]) -> Result<(), KnitError> {
        if coefficients.len() != self.cuts.len() {
            return Err(KnitError::Mismatch(format!(
                "{} coefficient lists for {} cuts",
                coefficients.len(),
                self.cuts.len()
            )));
        }
        for (cut, cs) in self.cuts.iter_mut().zip(coefficients) {
            if cs.len() != cut.terms {
                return Err(KnitError::Mismatch(format!(
                    "edge {}: {} coefficients for {} terms",
                    cut.edge,
                    cs.len(),
                    cut.terms
                )));
            }
            cut.coefficients = cs.clone();
        }
        for e in &mut self.entries {
            e.weight = e.terms.iter().zip(coefficients).map(|(&t, cs)| cs[t]).product();
        }
        Ok(())
    }

    pub fn widths(&self) -> Vec<usize> {
        self.layouts.iter().map(Vec::len).collect()
    }

    /// Splits an observable over the original qubits into per-partition factors.
    pub fn local_observables(&self, obs: &PauliString) -> Result<Vec<PauliString>, SimError> {
        if obs.len() != self.num_qubits {
            return Err(SimError::ObservableWidth {
                got: obs.len(),
                expected: self.num_qubits,
            });
        }
        let mut out: Vec<PauliString> = self.layouts.iter().map(|l| PauliString::identity(l.len())).collect();
        for (q, &(p, l)) in self.final_location.iter().enumerate() {
            out[p].0[l] = obs.0[q];
        }
        Ok(out)
    }

    fn run_entry(&self, entry: &EnsembleEntry) -> Result<Vec<JointBranch>, SimError> {
        let states = entry
            .subcircuits
            .iter()
            .map(|c| StateVector::zero(c.num_qubits()))
            .collect::<Result<Vec<_>, _>>()?;
        let mut branches = vec![JointBranch {
            probability: 1.0,
            clbits: vec![false; self.num_clbits],
            states,
        }];
        for &(p, gi) in &entry.schedule {
            let gate = &entry.subcircuits[p].gates()[gi];
            let mut next = Vec::with_capacity(branches.len());
            for mut br in branches {
                if gate.condition.is_some_and(|c| br.clbits[c.clbit] != c.value) {
                    next.push(br);
                    continue;
                }
                match gate.kind {
                    GateKind::MeasureZ | GateKind::Reset => {
                        let q = gate.qubits[0];
                        for outcome in [false, true] {
                            let mut s = br.states[p].clone();
                            let prob = s.collapse(q, outcome);
                            if prob * br.probability < 1e-15 {
                                continue;
                            }
                            let mut nb = br.clone();
                            if gate.kind == GateKind::MeasureZ {
                                nb.clbits[gate.clbit.expect("measurement target")] = outcome;
                            } else if outcome {
                                s.apply_1q(&gate_matrix(GateKind::X).unwrap(), q);
                            }
                            nb.states[p] = s;
                            nb.probability *= prob;
                            next.push(nb);
                        }
                    }
                    kind => {
                        br.states[p].apply_unitary(kind, &gate.qubits);
                        next.push(br);
                    }
                }
            }
            branches = next;
        }
        Ok(branches)
    }

    /// Exact value of one entry: branch-weighted product of local expectations with sign corrections.
    pub fn entry_value(&self, entry: &EnsembleEntry, local: &[PauliString]) -> Result<f64, SimError> {
        let mut total = 0.0;
        for br in self.run_entry(entry)? {
            let flips = self.sign_clbits.iter().filter(|&&c| br.clbits[c]).count();
            let sign = if flips % 2 == 0 { 1.0 } else { -1.0 };
            let mut prod = 1.0;
            for (s, o) in br.states.iter().zip(local) {
                if o.0.iter().any(|&x| x != Pauli::I) {
                    prod *= s.expectation(o)?;
                }
            }
            total += br.probability * sign * prod;
        }
        Ok(total)
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "normalization": self.normalization(),
            "cuts": self.cuts.iter().map(|c| json!({"edge": c.edge, "kind": c.kind.as_str(), "terms": c.terms})).collect::<Vec<_>>(),
            "sign_clbits": self.sign_clbits,
            "entries": self.entries.iter().map(|e| json!({
                "weight": e.weight,
                "terms": e.terms,
                "subcircuits": e.subcircuits.iter().map(circuit_json::to_value).collect::<Vec<_>>(),
            })).collect::<Vec<_>>(),
        })
    }
}

/// `Σ_entries weight · value(entry)`.
pub fn knit_expectation(ensemble: &SubcircuitEnsemble, obs: &PauliString) -> Result<f64, SimError> {
    let local = ensemble.local_observables(obs)?;
    let mut total = 0.0;
    for entry in &ensemble.entries {
        total += entry.weight * ensemble.entry_value(entry, &local)?;
    }
    Ok(total)
}

/// Monte-Carlo estimate: entries drawn with probability `|w|/κ`, each shot
/// yielding `κ·sign(w)·(±1)`.
pub fn sample_knit_expectation(
    ensemble: &SubcircuitEnsemble,
    obs: &PauliString,
    shots: usize,
    seed: u64,
) -> Result<f64, SimError> {
    let local = ensemble.local_observables(obs)?;
    let kappa = ensemble.normalization();
    let mut values = Vec::with_capacity(ensemble.entries.len());
    for e in &ensemble.entries {
        values.push(ensemble.entry_value(e, &local)?);
    }
    let mut rng = SeededRng::new(seed);
    let mut sum = 0.0;
    for _ in 0..shots {
        let mut r = rng.unit() * kappa;
        let mut k = ensemble.entries.len() - 1;
        for (i, e) in ensemble.entries.iter().enumerate() {
            if r < e.weight.abs() {
                k = i;
                break;
            }
            r -= e.weight.abs();
        }
        let p_plus = (1.0 + values[k]) / 2.0;
        let outcome = if rng.unit() < p_plus { 1.0 } else { -1.0 };
        sum += kappa * ensemble.entries[k].weight.signum() * outcome;
    }
    Ok(sum / shots as f64)
}
