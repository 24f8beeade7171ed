//! Versioned JSON run reports.

use serde::{Deserialize, Serialize};

use qknit_core::circuit::{Circuit, GateKind};
use qknit_core::cost::{group_cost, log_fp_ceil, Budget, GroupClass, Resources};
use qknit_core::graph::{CuttingGraph, EdgeKind};
use qknit_core::knit::{qpd_cnot, qpd_cz};
use qknit_core::model::{
    validate_solution, AllowedCuts, Objective, PartitionProblem, PartitionSolution, QubitPin,
};
use qknit_core::solve::SolveOutcome;

use crate::{CliError, Stage};

pub const SCHEMA: &str = "qknit.report/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema: String,
    pub input: InputSummary,
    pub problem: ProblemSpec,
    pub status: String,
    pub optimal: bool,
    pub backend: String,
    pub solution: Option<SolutionRecord>,
    pub cost: Option<CostBreakdown>,
    pub budget_check: Option<BudgetCheck>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timings: Option<Timings>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputSummary {
    pub source: String,
    pub qubits: usize,
    pub clbits: usize,
    pub gates: usize,
    pub two_qubit_gates: usize,
    pub vertices: usize,
    pub gate_edges: usize,
    pub wire_edges: usize,
}

impl InputSummary {
    pub fn new(source: &str, circuit: &Circuit, graph: &CuttingGraph) -> Self {
        InputSummary {
            source: source.to_string(),
            qubits: circuit.num_qubits(),
            clbits: circuit.num_clbits(),
            gates: circuit.gates().len(),
            two_qubit_gates: circuit.two_qubit_count(),
            vertices: graph.num_vertices(),
            gate_edges: graph.gate_edges().len(),
            wire_edges: graph.wire_edges().len(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AllowedSpec {
    pub wire: bool,
    pub cnot: bool,
    pub cz: bool,
    pub swap: bool,
    pub cr: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BudgetSpec {
    pub base_shots: f64,
    pub max_total_samples: f64,
    pub max_overhead: f64,
    pub max_overhead_log10_fp: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemSpec {
    pub partitions: usize,
    pub max_qubits: usize,
    pub objective: String,
    pub classical_communication: bool,
    pub ancilla: bool,
    pub allowed: AllowedSpec,
    pub budget: Option<BudgetSpec>,
    pub max_cuts: Option<usize>,
    pub max_overhead: Option<f64>,
    /// `(qubit, partition)`.
    pub pins: Vec<(usize, usize)>,
}

impl ProblemSpec {
    pub fn from_problem(p: &PartitionProblem) -> Self {
        let a = p.allowed;
        ProblemSpec {
            partitions: p.num_partitions,
            max_qubits: p.max_qubits,
            objective: p.objective.name().to_string(),
            classical_communication: p.resources.classical_communication,
            ancilla: p.resources.ancilla,
            allowed: AllowedSpec {
                wire: a.wire,
                cnot: a.cnot,
                cz: a.cz,
                swap: a.swap,
                cr: a.cr,
            },
            budget: p.budget.map(|b| BudgetSpec {
                base_shots: b.base_shots,
                max_total_samples: b.max_total_samples,
                max_overhead: b.max_overhead(),
                max_overhead_log10_fp: b.max_overhead_fp(),
            }),
            max_cuts: p.max_cuts,
            max_overhead: p.max_overhead,
            pins: p.pins.iter().map(|x| (x.qubit, x.partition)).collect(),
        }
    }

    pub fn to_problem(&self, graph: CuttingGraph) -> Result<PartitionProblem, CliError> {
        let err = |m: String| CliError::new(Stage::Load, m);
        let objective = parse_objective(&self.objective).map_err(err)?;
        let budget = match self.budget {
            Some(b) => Some(Budget::from_total(b.max_total_samples, b.base_shots).map_err(|e| err(e.to_string()))?),
            None => None,
        };
        let a = self.allowed;
        Ok(PartitionProblem::new(graph, self.partitions, self.max_qubits)
            .with_resources(Resources::new(self.classical_communication, self.ancilla))
            .with_allowed(AllowedCuts {
                wire: a.wire,
                cnot: a.cnot,
                cz: a.cz,
                swap: a.swap,
                cr: a.cr,
            })
            .with_budget(budget)
            .with_objective(objective)
            .with_max_cuts(self.max_cuts)
            .with_max_overhead(self.max_overhead)
            .with_pins(
                self.pins
                    .iter()
                    .map(|&(qubit, partition)| QubitPin { qubit, partition })
                    .collect(),
            ))
    }
}

pub fn parse_objective(s: &str) -> Result<Objective, String> {
    match s {
        "samples" => Ok(Objective::MinSamples),
        "qubits" => Ok(Objective::MinMaxQubits),
        other => Err(format!("unknown objective '{other}' (samples or qubits)")),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CutEntry {
    pub edge: usize,
    /// `gate` or `wire`.
    pub kind: String,
    pub gate: Option<String>,
    pub endpoints: (usize, usize),
    pub qubits: (usize, usize),
    pub grouped: bool,
    pub gamma_sq: f64,
    /// QPD coefficients used when knitting this cut; absent for grouped cuts
    /// and gates without a shipped decomposition.
    pub coefficients: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionRecord {
    /// Original qubits present in each partition.
    pub partitions: Vec<Vec<usize>>,
    #[serde(rename = "Q")]
    pub q: Vec<usize>,
    pub widths: Vec<usize>,
    pub assignment: Vec<usize>,
    pub cuts: Vec<CutEntry>,
    pub idle_placement: Vec<(usize, usize)>,
    pub overhead: f64,
    pub log10_overhead_fp: i64,
    pub objective_value: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostBreakdown {
    pub individual_cuts: usize,
    pub individual_log10_fp: i64,
    pub grouped_cuts: usize,
    pub group_gamma_sq: f64,
    pub group_log10_fp: i64,
    pub overhead: f64,
    pub log10_overhead_fp: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BudgetCheck {
    pub limit: f64,
    pub limit_log10_fp: i64,
    pub within: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub total_ms: u64,
    pub solve_ms: u64,
    pub iterations: usize,
}

/// Decomposition coefficients the knitter uses for an individual cut.
fn knit_coefficients(graph: &CuttingGraph, edge: usize, cc: bool) -> Option<Vec<f64>> {
    let e = graph.edge(edge);
    let qpd = match (e.kind, e.gate) {
        (EdgeKind::Wire, _) | (EdgeKind::Gate, Some(GateKind::Cnot)) => qpd_cnot(cc),
        (EdgeKind::Gate, Some(GateKind::Cz)) => qpd_cz(),
        _ => return None,
    };
    Some(qpd.terms.iter().map(|t| t.coefficient).collect())
}

pub fn solution_record(problem: &PartitionProblem, sol: &PartitionSolution) -> Result<SolutionRecord, CliError> {
    let g = &problem.graph;
    let prices = problem
        .edge_prices()
        .map_err(|e| CliError::new(Stage::Decode, e.to_string()))?;
    let mut cuts = Vec::with_capacity(sol.cut_edges.len());
    for &id in &sol.cut_edges {
        let e = g.edge(id);
        let price = prices[id].ok_or_else(|| CliError::new(Stage::Decode, format!("edge {id} is cut but unpriced")))?;
        let grouped = sol.is_grouped(id);
        cuts.push(CutEntry {
            edge: id,
            kind: e.kind.as_str().to_string(),
            gate: e.gate.map(|k| k.name().to_string()),
            endpoints: e.endpoints,
            qubits: (g.qubit_of(e.endpoints.0), g.qubit_of(e.endpoints.1)),
            grouped,
            gamma_sq: price.gamma_sq,
            coefficients: if grouped {
                None
            } else {
                knit_coefficients(g, id, problem.resources.classical_communication)
            },
        });
    }
    Ok(SolutionRecord {
        partitions: sol.partition_qubits(g),
        q: sol.qubit_counts.clone(),
        widths: sol.widths(),
        assignment: sol.assignment.clone(),
        cuts,
        idle_placement: sol.idle_placement.clone(),
        overhead: sol.overhead,
        log10_overhead_fp: sol.overhead_fp,
        objective_value: sol.objective_value,
    })
}

pub fn cost_breakdown(problem: &PartitionProblem, sol: &PartitionSolution) -> Result<CostBreakdown, CliError> {
    let prices = problem
        .edge_prices()
        .map_err(|e| CliError::new(Stage::Decode, e.to_string()))?;
    let mut individual = 0;
    let mut individual_fp = 0;
    for &e in &sol.cut_edges {
        if !sol.is_grouped(e) {
            individual += 1;
            individual_fp += prices[e].map_or(0, |p| p.weight_fp);
        }
    }
    let k = sol.grouped_edges.len() as u32;
    let group = group_cost(k, GroupClass::BellGroup);
    Ok(CostBreakdown {
        individual_cuts: individual,
        individual_log10_fp: individual_fp,
        grouped_cuts: k as usize,
        group_gamma_sq: group,
        group_log10_fp: log_fp_ceil(group),
        overhead: sol.overhead,
        log10_overhead_fp: sol.overhead_fp,
    })
}

/// Assembles the report for a finished solve.
pub fn build_report(
    input: InputSummary,
    problem: &PartitionProblem,
    outcome: &SolveOutcome,
    backend: &str,
    timings: Option<Timings>,
) -> Result<RunReport, CliError> {
    let (solution, cost, budget_check) = match outcome.solution() {
        Some(sol) => {
            let check = problem.cost_limit_fp().map(|limit| BudgetCheck {
                limit: problem.cost_limit().unwrap_or(f64::INFINITY),
                limit_log10_fp: limit,
                within: sol.overhead_fp <= limit,
            });
            (
                Some(solution_record(problem, sol)?),
                Some(cost_breakdown(problem, sol)?),
                check,
            )
        }
        None => (None, None, None),
    };
    Ok(RunReport {
        schema: SCHEMA.to_string(),
        input,
        problem: ProblemSpec::from_problem(problem),
        status: outcome.status().to_string(),
        optimal: matches!(outcome, SolveOutcome::Optimal(_)),
        backend: backend.to_string(),
        solution,
        cost,
        budget_check,
        timings,
    })
}

pub fn to_json(report: &RunReport) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("report serialization is infallible");
    s.push('\n');
    s
}

/// A report re-read against its circuit.
#[derive(Debug, Clone)]
pub struct LoadedSolution {
    pub problem: PartitionProblem,
    pub solution: PartitionSolution,
    /// Recorded coefficients per cut edge, in the report's order.
    pub coefficients: Vec<(usize, Option<Vec<f64>>)>,
}

/// Parses a report, rebuilds the solution from its assignment and group set,
/// and checks it against the problem and the recorded derived fields.
pub fn load_report(text: &str, circuit: &Circuit) -> Result<LoadedSolution, CliError> {
    let err = |m: String| CliError::new(Stage::Load, m);
    let report: RunReport = serde_json::from_str(text).map_err(|e| err(format!("report JSON: {e}")))?;
    if report.schema != SCHEMA {
        return Err(err(format!("unsupported report schema '{}' (expected {SCHEMA})", report.schema)));
    }
    let rec = report
        .solution
        .ok_or_else(|| err(format!("report has no solution (status {})", report.status)))?;
    let graph = CuttingGraph::build(circuit).map_err(|e| CliError::new(Stage::Parse, e.to_string()))?;
    if graph.num_vertices() != report.input.vertices || graph.edges().len() != report.input.gate_edges + report.input.wire_edges
    {
        return Err(err(format!(
            "report describes {} vertices and {} edges, circuit has {} and {}",
            report.input.vertices,
            report.input.gate_edges + report.input.wire_edges,
            graph.num_vertices(),
            graph.edges().len()
        )));
    }
    let problem = report.problem.to_problem(graph)?;
    let ne = problem.graph.edges().len();
    let mut grouped = vec![false; ne];
    for c in &rec.cuts {
        if c.edge >= ne {
            return Err(err(format!("cut edge {} out of range", c.edge)));
        }
        grouped[c.edge] = c.grouped;
    }
    let prices = problem.edge_prices().map_err(|e| err(e.to_string()))?;
    if rec.assignment.len() != problem.graph.num_vertices()
        || rec.assignment.iter().any(|&p| p >= problem.num_partitions)
    {
        return Err(err("assignment does not label every vertex with a valid partition".into()));
    }
    let mut solution = PartitionSolution::from_assignment(&problem, &prices, rec.assignment.clone(), &grouped)
        .map_err(|e| err(e.to_string()))?;
    solution.optimal = report.optimal;
    let listed: Vec<usize> = rec.cuts.iter().map(|c| c.edge).collect();
    if listed != solution.cut_edges {
        return Err(err(format!(
            "listed cuts {listed:?} differ from the assignment's cuts {:?}",
            solution.cut_edges
        )));
    }
    if rec.q != solution.qubit_counts {
        return Err(err(format!("recorded Q {:?}, recomputed {:?}", rec.q, solution.qubit_counts)));
    }
    if rec.log10_overhead_fp != solution.overhead_fp
        || (rec.overhead - solution.overhead).abs() > 1e-9 * solution.overhead.max(1.0)
    {
        return Err(err(format!(
            "recorded overhead {} ({}), recomputed {} ({})",
            rec.overhead, rec.log10_overhead_fp, solution.overhead, solution.overhead_fp
        )));
    }
    let violations = validate_solution(&problem, &solution);
    if !violations.is_empty() {
        return Err(CliError::new(
            Stage::Validate,
            violations.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "),
        ));
    }
    Ok(LoadedSolution {
        problem,
        solution,
        coefficients: rec.cuts.into_iter().map(|c| (c.edge, c.coefficients)).collect(),
    })
}
