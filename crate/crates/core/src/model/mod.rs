//! Partitioning problem over a cutting graph, its constraint encoding and solutions.
//!
//! Model variables, for vertices `v`, partitions `p` and edges `e`:
//!
//! * `o_v_p`: vertex `v` is assigned to partition `p` (exactly one per vertex);
//! * `c_e`: edge `e` is cut, i.e. its endpoints disagree on their partition;
//! * `b_e`: the cut at `e` joins the simultaneous Bell-pair group (`b_e → c_e`).
//!
//! Partition width:
//!
//! ```text
//! Q_p = Σ_{v ∈ I} o_v_p  +  Σ_{(u,v) ∈ W} (c_e ∧ o_v_p)  +  Σ_{(u,v) ∈ E} (b_e ∧ (o_u_p ∨ o_v_p))
//! ```
//!
//! where `I` holds the first vertex of every qubit and wire edges point
//! forward in time, so a wire cut charges its fresh qubit to the later
//! gate's partition.

mod decode;
mod encode;
pub mod expr;
mod smtlib;
mod validate;

pub use decode::decode;
pub use encode::{encode, ConstraintSystem, Symbols};
pub use smtlib::{emit_smtlib2, solver_script};
pub use smtlib::{bound_assertion, query_commands};
pub use validate::{ensure_valid, validate_solution, Violation};

use std::collections::BTreeSet;

use thiserror::Error;

use crate::cost::{
    gamma_sq, group_cost, log_fp_ceil, log_fp_floor, Budget, CostError, CutKind, GroupClass,
    PricedCut, Resources,
};
use crate::graph::{CuttingGraph, EdgeId, EdgeKind, VertexId};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("invalid problem: {0}")]
    InvalidProblem(String),
    #[error("trivially infeasible: {0}")]
    InfeasibleTrivially(String),
    #[error(transparent)]
    Cost(#[from] CostError),
    #[error("inconsistent model: {0}")]
    InconsistentModel(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Objective {
    #[default]
    MinSamples,
    MinMaxQubits,
}

impl Objective {
    pub fn name(self) -> &'static str {
        match self {
            Objective::MinSamples => "samples",
            Objective::MinMaxQubits => "qubits",
        }
    }
}

/// Which cut kinds the optimizer may use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AllowedCuts {
    pub wire: bool,
    pub cnot: bool,
    pub cz: bool,
    pub swap: bool,
    pub cr: bool,
}

impl AllowedCuts {
    pub const ALL: AllowedCuts = AllowedCuts {
        wire: true,
        cnot: true,
        cz: true,
        swap: true,
        cr: true,
    };
    pub const WIRE_ONLY: AllowedCuts = AllowedCuts {
        wire: true,
        cnot: false,
        cz: false,
        swap: false,
        cr: false,
    };
    pub const GATE_ONLY: AllowedCuts = AllowedCuts {
        wire: false,
        ..AllowedCuts::ALL
    };

    pub fn allows(&self, kind: CutKind) -> bool {
        match kind {
            CutKind::Wire => self.wire,
            CutKind::GateCnot => self.cnot,
            CutKind::GateCz => self.cz,
            CutKind::GateSwap => self.swap,
            CutKind::GateCr(_) => self.cr,
        }
    }

    pub fn any_gate(&self) -> bool {
        self.cnot || self.cz || self.swap || self.cr
    }
}

/// Keeps a qubit's first and last vertex in a fixed partition.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QubitPin {
    pub qubit: usize,
    pub partition: usize,
}

#[derive(Debug, Clone)]
pub struct PartitionProblem {
    pub graph: CuttingGraph,
    pub num_partitions: usize,
    pub max_qubits: usize,
    pub resources: Resources,
    pub allowed: AllowedCuts,
    pub budget: Option<Budget>,
    pub objective: Objective,
    pub max_cuts: Option<usize>,
    /// Cap on the sampling overhead `S`, on top of the budget.
    pub max_overhead: Option<f64>,
    pub pins: Vec<QubitPin>,
}

/// Price of cutting one edge.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgePrice {
    pub kind: CutKind,
    pub gamma_sq: f64,
    pub weight_fp: i64,
    pub groupable: bool,
}

impl PartitionProblem {
    pub fn new(graph: CuttingGraph, num_partitions: usize, max_qubits: usize) -> Self {
        PartitionProblem {
            graph,
            num_partitions,
            max_qubits,
            resources: Resources::FULL,
            allowed: AllowedCuts::ALL,
            budget: None,
            objective: Objective::MinSamples,
            max_cuts: None,
            max_overhead: None,
            pins: Vec::new(),
        }
    }

    pub fn with_resources(mut self, resources: Resources) -> Self {
        self.resources = resources;
        self
    }

    pub fn with_allowed(mut self, allowed: AllowedCuts) -> Self {
        self.allowed = allowed;
        self
    }

    pub fn with_budget(mut self, budget: Option<Budget>) -> Self {
        self.budget = budget;
        self
    }

    pub fn with_objective(mut self, objective: Objective) -> Self {
        self.objective = objective;
        self
    }

    pub fn with_max_cuts(mut self, max_cuts: Option<usize>) -> Self {
        self.max_cuts = max_cuts;
        self
    }

    pub fn with_max_overhead(mut self, max_overhead: Option<f64>) -> Self {
        self.max_overhead = max_overhead;
        self
    }

    pub fn with_pins(mut self, pins: Vec<QubitPin>) -> Self {
        self.pins = pins;
        self
    }

    /// Empty partitions are forbidden when minimizing samples with a fixed partition count.
    pub fn requires_nonempty(&self) -> bool {
        self.objective == Objective::MinSamples
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let nv = self.graph.num_vertices();
        if self.num_partitions < 2 {
            return Err(ModelError::InvalidProblem(format!(
                "need at least 2 partitions, got {}",
                self.num_partitions
            )));
        }
        if self.num_partitions > nv {
            return Err(ModelError::InvalidProblem(format!(
                "{} partitions exceed the {nv} cutting-graph vertices",
                self.num_partitions
            )));
        }
        if self.max_qubits < 1 {
            return Err(ModelError::InvalidProblem("max qubits per partition must be >= 1".into()));
        }
        if let Some(cap) = self.max_overhead {
            if cap.is_nan() || cap < 1.0 {
                return Err(ModelError::InvalidProblem(format!("overhead cap {cap} is below 1")));
            }
        }
        let mut seen = BTreeSet::new();
        for pin in &self.pins {
            if pin.partition >= self.num_partitions {
                return Err(ModelError::InvalidProblem(format!(
                    "pin of qubit {} names partition {}",
                    pin.qubit, pin.partition
                )));
            }
            if pin.qubit >= self.graph.num_qubits() || self.graph.qubit_vertices(pin.qubit).is_empty() {
                return Err(ModelError::InvalidProblem(format!(
                    "pinned qubit {} carries no two-qubit gate",
                    pin.qubit
                )));
            }
            if !seen.insert(pin.qubit) {
                return Err(ModelError::InvalidProblem(format!("qubit {} pinned twice", pin.qubit)));
            }
        }
        Ok(())
    }

    /// Per-edge prices; `None` marks edges that must stay uncut.
    pub fn edge_prices(&self) -> Result<Vec<Option<EdgePrice>>, ModelError> {
        let mut out = Vec::with_capacity(self.graph.edges().len());
        for e in self.graph.edges() {
            let kind = match e.kind {
                EdgeKind::Wire => CutKind::Wire,
                EdgeKind::Gate => CutKind::for_gate(e.gate.expect("gate edges carry their gate"))?,
            };
            if !self.allowed.allows(kind) {
                out.push(None);
                continue;
            }
            let g = gamma_sq(kind, self.resources);
            out.push(Some(EdgePrice {
                kind,
                gamma_sq: g,
                weight_fp: log_fp_ceil(g),
                groupable: self.resources.allows_grouping() && kind.bell_group_eligible(),
            }));
        }
        Ok(out)
    }

    /// Fixed-point cost ceiling from the budget and the overhead cap, if any.
    pub fn cost_limit_fp(&self) -> Option<i64> {
        let a = self.budget.map(|b| b.max_overhead_fp());
        let b = self.max_overhead.map(log_fp_floor);
        match (a, b) {
            (Some(x), Some(y)) => Some(x.min(y)),
            (x, y) => x.or(y),
        }
    }

    /// Real-valued ceiling matching [`Self::cost_limit_fp`].
    pub fn cost_limit(&self) -> Option<f64> {
        let a = self.budget.map(|b| b.max_overhead());
        match (a, self.max_overhead) {
            (Some(x), Some(y)) => Some(x.min(y)),
            (x, y) => x.or(y),
        }
    }

    /// Checks that need no search: partition count against the components
    /// that uncuttable edges glue together, and total width against capacity.
    pub fn check_trivial_feasibility(&self, prices: &[Option<EdgePrice>]) -> Result<(), ModelError> {
        let g = &self.graph;
        let active = g.first_vertices().len();
        let idle = g.idle_qubits().len();
        if active + idle > self.num_partitions * self.max_qubits {
            return Err(ModelError::InfeasibleTrivially(format!(
                "{} qubits do not fit into {} partitions of {}",
                active + idle,
                self.num_partitions,
                self.max_qubits
            )));
        }
        if self.requires_nonempty() {
            let mut parent: Vec<usize> = (0..g.num_vertices()).collect();
            fn find(p: &mut [usize], x: usize) -> usize {
                let mut r = x;
                while p[r] != r {
                    r = p[r];
                }
                let mut y = x;
                while p[y] != r {
                    let next = p[y];
                    p[y] = r;
                    y = next;
                }
                r
            }
            for (e, price) in g.edges().iter().zip(prices) {
                if price.is_none() {
                    let (a, b) = (find(&mut parent, e.endpoints.0), find(&mut parent, e.endpoints.1));
                    parent[a] = b;
                }
            }
            let components = (0..g.num_vertices()).filter(|&v| find(&mut parent, v) == v).count();
            if components < self.num_partitions {
                return Err(ModelError::InfeasibleTrivially(format!(
                    "only {components} uncuttable component(s) for {} nonempty partitions",
                    self.num_partitions
                )));
            }
        }
        Ok(())
    }
}

/// Fixed-point Bell-group cost for group sizes `0..=max_k`.
pub fn group_cost_table(max_k: usize) -> Vec<i64> {
    (0..=max_k)
        .map(|k| log_fp_ceil(group_cost(k as u32, GroupClass::BellGroup)))
        .collect()
}

/// `c_e` for every edge under `assignment`.
pub fn cuts_from_assignment(graph: &CuttingGraph, assignment: &[usize]) -> Vec<bool> {
    graph
        .edges()
        .iter()
        .map(|e| assignment[e.endpoints.0] != assignment[e.endpoints.1])
        .collect()
}

/// `Q_p` from raw `o`, `c`, `b` values.
pub fn qubit_counts(
    graph: &CuttingGraph,
    assignment: &[usize],
    cut: &[bool],
    grouped: &[bool],
    num_partitions: usize,
) -> Vec<usize> {
    let mut q = vec![0usize; num_partitions];
    for &v in graph.first_vertices() {
        q[assignment[v]] += 1;
    }
    for e in graph.wire_edges() {
        if cut[e.id] {
            q[assignment[e.endpoints.1]] += 1;
        }
    }
    for e in graph.edges() {
        if grouped[e.id] {
            let (pu, pv) = (assignment[e.endpoints.0], assignment[e.endpoints.1]);
            q[pu] += 1;
            if pv != pu {
                q[pv] += 1;
            }
        }
    }
    q
}

/// Places idle qubits one by one into the partition with the most spare
/// capacity (lowest index on ties). Returns `(qubit, partition)` pairs.
pub fn place_idle_qubits(
    idle: &[usize],
    counts: &[usize],
    max_qubits: usize,
) -> Vec<(usize, usize)> {
    let mut load = counts.to_vec();
    idle.iter()
        .map(|&q| {
            let p = (0..load.len())
                .min_by_key(|&p| (load[p] as i64 - max_qubits as i64, p))
                .expect("at least one partition");
            load[p] += 1;
            (q, p)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SolveStats {
    pub backend: String,
    pub iterations: usize,
    pub elapsed_ms: u64,
}

/// A decoded partitioning.
#[derive(Debug, Clone, PartialEq)]
pub struct PartitionSolution {
    pub num_partitions: usize,
    /// Partition of each cutting-graph vertex.
    pub assignment: Vec<usize>,
    pub cut_edges: Vec<EdgeId>,
    /// Cuts realized through the simultaneous Bell-pair group; a subset of `cut_edges`.
    pub grouped_edges: Vec<EdgeId>,
    /// `Q_p` over cutting-graph qubits (idle qubits excluded).
    pub qubit_counts: Vec<usize>,
    pub idle_placement: Vec<(usize, usize)>,
    pub overhead: f64,
    pub overhead_fp: i64,
    pub objective_value: i64,
    pub optimal: bool,
    pub stats: SolveStats,
}

impl PartitionSolution {
    /// Builds a solution from an assignment and group choice, recomputing all derived fields.
    pub fn from_assignment(
        problem: &PartitionProblem,
        prices: &[Option<EdgePrice>],
        assignment: Vec<usize>,
        grouped: &[bool],
    ) -> Result<Self, ModelError> {
        let g = &problem.graph;
        let cut = cuts_from_assignment(g, &assignment);
        let mut priced = Vec::new();
        for e in g.edges() {
            if cut[e.id] {
                let price = prices[e.id].ok_or_else(|| {
                    ModelError::InconsistentModel(format!("edge {} is cut but not cuttable", e.id))
                })?;
                priced.push(PricedCut {
                    kind: price.kind,
                    grouped: grouped[e.id],
                });
            } else if grouped[e.id] {
                return Err(ModelError::InconsistentModel(format!(
                    "edge {} grouped without being cut",
                    e.id
                )));
            }
        }
        let overhead = crate::cost::solution_overhead(&priced, problem.resources)?;
        let overhead_fp = crate::cost::solution_overhead_fp(&priced, problem.resources)?;
        let counts = qubit_counts(g, &assignment, &cut, grouped, problem.num_partitions);
        let idle_placement = place_idle_qubits(&g.idle_qubits(), &counts, problem.max_qubits);
        let objective_value = match problem.objective {
            Objective::MinSamples => overhead_fp,
            Objective::MinMaxQubits => counts.iter().copied().max().unwrap_or(0) as i64,
        };
        Ok(PartitionSolution {
            num_partitions: problem.num_partitions,
            assignment,
            cut_edges: (0..cut.len()).filter(|&e| cut[e]).collect(),
            grouped_edges: (0..cut.len()).filter(|&e| grouped[e]).collect(),
            qubit_counts: counts,
            idle_placement,
            overhead,
            overhead_fp,
            objective_value,
            optimal: false,
            stats: SolveStats::default(),
        })
    }

    pub fn num_cuts(&self) -> usize {
        self.cut_edges.len()
    }

    pub fn is_grouped(&self, e: EdgeId) -> bool {
        self.grouped_edges.contains(&e)
    }

    /// Qubits present in each partition: original qubits with a vertex there, plus placed idle qubits.
    pub fn partition_qubits(&self, graph: &CuttingGraph) -> Vec<Vec<usize>> {
        let mut sets = vec![BTreeSet::new(); self.num_partitions];
        for (v, &p) in self.assignment.iter().enumerate() {
            sets[p].insert(graph.qubit_of(v as VertexId));
        }
        for &(q, p) in &self.idle_placement {
            sets[p].insert(q);
        }
        sets.into_iter().map(|s| s.into_iter().collect()).collect()
    }

    /// Device widths: `Q_p` plus placed idle qubits.
    pub fn widths(&self) -> Vec<usize> {
        let mut w = self.qubit_counts.clone();
        for &(_, p) in &self.idle_placement {
            w[p] += 1;
        }
        w
    }

    pub fn wire_cut_count(&self, graph: &CuttingGraph) -> usize {
        self.cut_edges
            .iter()
            .filter(|&&e| graph.edge(e).kind == EdgeKind::Wire)
            .count()
    }

    pub fn gate_cut_count(&self, graph: &CuttingGraph) -> usize {
        self.num_cuts() - self.wire_cut_count(graph)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::generate;
    use crate::graph::build_cutting_graph;

    fn ghz4() -> CuttingGraph {
        build_cutting_graph(&generate::ghz(4).unwrap()).unwrap()
    }

    #[test]
    fn problem_validation() {
        assert!(PartitionProblem::new(ghz4(), 1, 2).validate().is_err());
        assert!(PartitionProblem::new(ghz4(), 7, 2).validate().is_err());
        assert!(PartitionProblem::new(ghz4(), 2, 0).validate().is_err());
        assert!(PartitionProblem::new(ghz4(), 2, 2).validate().is_ok());
        let pinned = PartitionProblem::new(ghz4(), 2, 2).with_pins(vec![QubitPin { qubit: 0, partition: 2 }]);
        assert!(pinned.validate().is_err());
    }

    #[test]
    fn wire_cut_accounting() {
        // Wire cut on qubit 2 between gates 2 and 3: vertices 0..=3 left, 4..=5 right.
        let g = ghz4();
        let a = vec![0, 0, 0, 0, 1, 1];
        let cut = cuts_from_assignment(&g, &a);
        assert_eq!(cut.iter().filter(|&&c| c).count(), 1);
        assert!(cut[g.wire_edges()[1].id]);
        let counts = qubit_counts(&g, &a, &cut, &vec![false; cut.len()], 2);
        assert_eq!(counts, vec![3, 2]);
    }

    #[test]
    fn grouped_cut_adds_one_per_touched_partition() {
        let g = ghz4();
        let a = vec![0, 0, 0, 1, 1, 1];
        let cut = cuts_from_assignment(&g, &a);
        let mut grouped = vec![false; cut.len()];
        grouped[1] = true;
        assert_eq!(qubit_counts(&g, &a, &cut, &grouped, 2), vec![3, 3]);
    }

    #[test]
    fn trivial_infeasibility() {
        let p = PartitionProblem::new(ghz4(), 2, 1);
        let prices = p.edge_prices().unwrap();
        assert!(matches!(p.check_trivial_feasibility(&prices), Err(ModelError::InfeasibleTrivially(_))));
        let no_cuts = PartitionProblem::new(ghz4(), 2, 4).with_allowed(AllowedCuts {
            wire: false,
            cnot: false,
            cz: false,
            swap: false,
            cr: false,
        });
        let prices = no_cuts.edge_prices().unwrap();
        assert!(matches!(
            no_cuts.check_trivial_feasibility(&prices),
            Err(ModelError::InfeasibleTrivially(_))
        ));
    }

    #[test]
    fn idle_qubits_fill_spare_capacity() {
        assert_eq!(place_idle_qubits(&[5, 6], &[3, 1], 3), vec![(5, 1), (6, 1)]);
        assert_eq!(place_idle_qubits(&[5], &[2, 2], 3), vec![(5, 0)]);
    }
}
