use std::fmt;

use super::{cuts_from_assignment, qubit_counts, ModelError, PartitionProblem, PartitionSolution};
use crate::cost::{solution_overhead, solution_overhead_fp, PricedCut};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub rule: &'static str,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.rule, self.detail)
    }
}

/// Checks a solution against the problem without trusting any derived field.
/// An empty list means the solution is valid.
pub fn validate_solution(problem: &PartitionProblem, solution: &PartitionSolution) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut push = |rule: &'static str, detail: String| out.push(Violation { rule, detail });
    let g = &problem.graph;
    let np = problem.num_partitions;

    if solution.assignment.len() != g.num_vertices() {
        push(
            "exactly one partition",
            format!("{} labels for {} vertices", solution.assignment.len(), g.num_vertices()),
        );
        return out;
    }
    if let Some(v) = solution.assignment.iter().position(|&p| p >= np) {
        push("exactly one partition", format!("vertex {v} has label {}", solution.assignment[v]));
        return out;
    }

    let cut = cuts_from_assignment(g, &solution.assignment);
    let claimed: Vec<usize> = (0..cut.len()).filter(|&e| cut[e]).collect();
    if claimed != solution.cut_edges {
        push(
            "cut set mismatch",
            format!("labels imply {claimed:?}, solution lists {:?}", solution.cut_edges),
        );
    }
    let mut grouped = vec![false; cut.len()];
    for &e in &solution.grouped_edges {
        if e >= cut.len() {
            push("b implies c", format!("grouped edge {e} does not exist"));
            continue;
        }
        grouped[e] = true;
        if !cut[e] {
            push("b implies c", format!("edge {e} grouped but not cut"));
        }
    }

    let prices = match problem.edge_prices() {
        Ok(p) => p,
        Err(err) => {
            push("pricing", err.to_string());
            return out;
        }
    };
    let mut priced = Vec::new();
    for e in 0..cut.len() {
        if !cut[e] {
            continue;
        }
        match prices[e] {
            None => push("disallowed cut", format!("{} edge {e} may not be cut", g.edge(e).kind.as_str())),
            Some(p) => {
                if grouped[e] && !p.groupable {
                    push("grouping unavailable", format!("edge {e} cannot join the Bell-pair group"));
                }
                priced.push(PricedCut {
                    kind: p.kind,
                    grouped: grouped[e] && p.groupable,
                });
            }
        }
    }

    let counts = qubit_counts(g, &solution.assignment, &cut, &grouped, np);
    if counts != solution.qubit_counts {
        push(
            "qubit count mismatch",
            format!("recomputed {counts:?}, solution has {:?}", solution.qubit_counts),
        );
    }
    let mut widths = counts.clone();
    let idle = g.idle_qubits();
    let mut placed: Vec<usize> = solution.idle_placement.iter().map(|&(q, _)| q).collect();
    placed.sort_unstable();
    if placed != idle {
        push("idle placement", format!("idle qubits {idle:?}, placed {placed:?}"));
    }
    for &(_, p) in &solution.idle_placement {
        if p < np {
            widths[p] += 1;
        }
    }
    for (p, &w) in widths.iter().enumerate() {
        if w > problem.max_qubits {
            push("capacity exceeded", format!("partition {p} needs {w} > {} qubits", problem.max_qubits));
        }
    }

    if let (Ok(s), Ok(fp)) = (
        solution_overhead(&priced, problem.resources),
        solution_overhead_fp(&priced, problem.resources),
    ) {
        if fp != solution.overhead_fp || (s - solution.overhead).abs() > 1e-9 * s {
            push(
                "overhead mismatch",
                format!("recomputed S = {s} ({fp}), solution has {} ({})", solution.overhead, solution.overhead_fp),
            );
        }
        if let Some(limit) = problem.cost_limit_fp() {
            if fp > limit {
                push("budget exceeded", format!("log-cost {fp} above limit {limit}"));
            }
        }
    }
    if let Some(m) = problem.max_cuts {
        if claimed.len() > m {
            push("too many cuts", format!("{} cuts, cap {m}", claimed.len()));
        }
    }
    if problem.requires_nonempty() {
        for p in 0..np {
            if !solution.assignment.contains(&p) {
                push("empty partition", format!("partition {p} has no vertex"));
            }
        }
    }
    for pin in &problem.pins {
        let vs = g.qubit_vertices(pin.qubit);
        for &v in [vs.first(), vs.last()].into_iter().flatten() {
            if solution.assignment[v] != pin.partition {
                push("pin", format!("qubit {} vertex {v} left partition {}", pin.qubit, pin.partition));
            }
        }
    }

    // Removing the cut edges must leave components that each carry a single label.
    let components = components_without(g.num_vertices(), g.edges().iter().filter(|e| !cut[e.id]).map(|e| e.endpoints));
    for e in g.edges() {
        let (u, v) = e.endpoints;
        let same_component = components[u] == components[v];
        if same_component && solution.assignment[u] != solution.assignment[v] {
            push("component labels", format!("vertices {u} and {v} connected but split"));
        }
    }
    out
}

/// Connected-component representative of each vertex.
pub(crate) fn components_without(n: usize, edges: impl Iterator<Item = (usize, usize)>) -> Vec<usize> {
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for (u, v) in edges {
        let (a, b) = (find(&mut parent, u), find(&mut parent, v));
        if a != b {
            parent[a.max(b)] = a.min(b);
        }
    }
    (0..n).map(|v| find(&mut parent, v)).collect()
}

/// Validates and turns the violation list into an error.
pub fn ensure_valid(problem: &PartitionProblem, solution: &PartitionSolution) -> Result<(), ModelError> {
    let v = validate_solution(problem, solution);
    if v.is_empty() {
        Ok(())
    } else {
        Err(ModelError::InconsistentModel(
            v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("; "),
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::generate;
    use crate::graph::build_cutting_graph;

    fn setup() -> (PartitionProblem, PartitionSolution) {
        let g = build_cutting_graph(&generate::ghz(4).unwrap()).unwrap();
        let p = PartitionProblem::new(g, 2, 3);
        let prices = p.edge_prices().unwrap();
        let s = PartitionSolution::from_assignment(&p, &prices, vec![0, 0, 0, 1, 1, 1], &[false; 5]).unwrap();
        (p, s)
    }

    #[test]
    fn decoded_gate_cut_is_valid() {
        let (p, s) = setup();
        assert!(validate_solution(&p, &s).is_empty());
    }

    #[test]
    fn grouped_uncut_edge_flagged() {
        let (p, mut s) = setup();
        s.grouped_edges.push(0);
        let v = validate_solution(&p, &s);
        assert!(v.iter().any(|x| x.rule == "b implies c"), "{v:?}");
    }

    #[test]
    fn tampered_counts_flagged() {
        let (p, mut s) = setup();
        s.qubit_counts[0] += 1;
        let v = validate_solution(&p, &s);
        assert!(v.iter().any(|x| x.rule == "qubit count mismatch"));
    }

    #[test]
    fn split_component_flagged() {
        let (p, mut s) = setup();
        s.cut_edges.clear();
        let v = validate_solution(&p, &s);
        assert!(v.iter().any(|x| x.rule == "cut set mismatch"));
    }
}
