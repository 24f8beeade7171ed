use super::encode::ConstraintSystem;
use super::expr::{Model, Value};
use super::{cuts_from_assignment, ModelError, PartitionSolution};

/// Turns a solver model into a solution. Derived quantities are recomputed
/// from the raw `o`/`b` values and compared with the solver's integers.
pub fn decode(sys: &ConstraintSystem, model: &Model) -> Result<PartitionSolution, ModelError> {
    let vals = sys.values_from_model(model)?;
    let boolean = |s: usize| vals[s].and_then(Value::as_bool).unwrap_or(false);
    let integer = |s: usize| vals[s].and_then(Value::as_int).unwrap_or(i64::MIN);
    let mismatch = |what: String| Err(ModelError::InconsistentModel(what));

    let mut assignment = Vec::with_capacity(sys.o.len());
    for (v, row) in sys.o.iter().enumerate() {
        let parts: Vec<usize> = (0..row.len()).filter(|&p| boolean(row[p])).collect();
        if parts.len() != 1 {
            return mismatch(format!("vertex {v} assigned to {} partitions", parts.len()));
        }
        assignment.push(parts[0]);
    }
    let graph = &sys.problem.graph;
    let cut = cuts_from_assignment(graph, &assignment);
    for (e, &s) in sys.c.iter().enumerate() {
        if boolean(s) != cut[e] {
            return mismatch(format!("c_{e} disagrees with the assignment"));
        }
    }
    let grouped: Vec<bool> = sys.b.iter().map(|&s| boolean(s)).collect();

    let solution = PartitionSolution::from_assignment(&sys.problem, &sys.prices, assignment, &grouped)?;
    for (p, &s) in sys.q.iter().enumerate() {
        if integer(s) != solution.qubit_counts[p] as i64 {
            return mismatch(format!(
                "solver Q_{p} = {} but recomputed {}",
                integer(s),
                solution.qubit_counts[p]
            ));
        }
    }
    if integer(sys.cost) != solution.overhead_fp {
        return mismatch(format!(
            "solver cost {} but recomputed {}",
            integer(sys.cost),
            solution.overhead_fp
        ));
    }
    let violated = sys.violated(&vals);
    if !violated.is_empty() {
        return mismatch(format!("model violates {}", violated.join(", ")));
    }
    Ok(solution)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::generate;
    use crate::graph::build_cutting_graph;
    use crate::model::{encode, PartitionProblem};

    fn model_of(sys: &ConstraintSystem, assignment: &[usize], grouped: &[bool]) -> Model {
        sys.valuation(assignment, grouped)
            .into_iter()
            .enumerate()
            .map(|(s, v)| (sys.symbols.name(s).to_string(), v.unwrap()))
            .collect()
    }

    fn ghz4(qmax: usize) -> ConstraintSystem {
        let g = build_cutting_graph(&generate::ghz(4).unwrap()).unwrap();
        encode(&PartitionProblem::new(g, 2, qmax)).unwrap()
    }

    #[test]
    fn middle_gate_cut() {
        let sys = ghz4(2);
        let sol = decode(&sys, &model_of(&sys, &[0, 0, 0, 1, 1, 1], &[false; 5])).unwrap();
        assert_eq!(sol.cut_edges, vec![1]);
        assert_eq!(sol.overhead, 9.0);
        assert_eq!(sol.partition_qubits(&sys.problem.graph), vec![vec![0, 1], vec![2, 3]]);
    }

    #[test]
    fn wire_cut_on_q2() {
        let sys = ghz4(3);
        let sol = decode(&sys, &model_of(&sys, &[0, 0, 0, 0, 1, 1], &[false; 5])).unwrap();
        assert_eq!(sol.qubit_counts, vec![3, 2]);
        assert_eq!(sol.qubit_counts.iter().sum::<usize>(), 5);
    }

    #[test]
    fn tampered_model_is_rejected() {
        let sys = ghz4(2);
        let mut m = model_of(&sys, &[0, 0, 0, 1, 1, 1], &[false; 5]);
        m.insert("cost".into(), Value::Int(0));
        assert!(matches!(decode(&sys, &m), Err(ModelError::InconsistentModel(_))));
        let mut m = model_of(&sys, &[0, 0, 0, 1, 1, 1], &[false; 5]);
        m.remove("q_0");
        assert!(decode(&sys, &m).is_err());
    }
}
