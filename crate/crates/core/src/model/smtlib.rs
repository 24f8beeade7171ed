use std::fmt::Write;

use super::encode::ConstraintSystem;
use super::expr::declare;

/// Deterministic SMT-LIB2 text for the constraint system, without `check-sat`.
pub fn emit_smtlib2(sys: &ConstraintSystem) -> String {
    let mut out = String::new();
    out.push_str("(set-logic QF_LIA)\n(set-option :produce-models true)\n");
    let _ = writeln!(
        out,
        "; vertices {} edges {} partitions {} objective {}",
        sys.problem.graph.num_vertices(),
        sys.problem.graph.edges().len(),
        sys.problem.num_partitions,
        sys.symbols.name(sys.objective_symbol())
    );
    for (s, name) in sys.symbols.names().iter().enumerate() {
        declare(name, sys.symbols.sort(s), &mut out);
    }
    for (_, e) in &sys.assertions {
        out.push_str("(assert ");
        e.render(sys.symbols.names(), &mut out);
        out.push_str(")\n");
    }
    out
}

/// `(assert (< objective bound))`.
pub fn bound_assertion(sys: &ConstraintSystem, bound: i64) -> String {
    let mut out = String::from("(assert ");
    sys.objective_below(bound).render(sys.symbols.names(), &mut out);
    out.push_str(")\n");
    out
}

/// `(check-sat)` followed by a `get-value` over every declared symbol.
pub fn query_commands(sys: &ConstraintSystem) -> String {
    let mut out = String::from("(check-sat)\n(get-value (");
    out.push_str(&sys.symbols.names().join(" "));
    out.push_str("))\n");
    out
}

/// Complete one-shot script: model, optional objective bound, query.
pub fn solver_script(sys: &ConstraintSystem, bound: Option<i64>) -> String {
    let mut out = emit_smtlib2(sys);
    if let Some(b) = bound {
        out.push_str(&bound_assertion(sys, b));
    }
    out.push_str(&query_commands(sys));
    out.push_str("(exit)\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{generate, Circuit, Gate, GateKind};
    use crate::cost::Resources;
    use crate::graph::build_cutting_graph;
    use crate::model::{encode, AllowedCuts, PartitionProblem};

    #[test]
    fn single_cnot_declarations() {
        let c = Circuit::from_gates(2, 0, vec![Gate::two(GateKind::Cnot, 0, 1)]).unwrap();
        let p = PartitionProblem::new(build_cutting_graph(&c).unwrap(), 2, 1);
        let text = emit_smtlib2(&encode(&p).unwrap());
        assert_eq!(text.matches("(declare-fun o_").count(), 4);
        assert_eq!(text.matches("(declare-fun c_").count(), 1);
        assert_eq!(text.matches("(declare-fun b_").count(), 1);
        assert!(text.contains("(declare-fun cost () Int)"));
    }

    #[test]
    fn emission_is_deterministic() {
        let g = build_cutting_graph(&generate::ghz(5).unwrap()).unwrap();
        let p = PartitionProblem::new(g, 2, 3);
        assert_eq!(emit_smtlib2(&encode(&p).unwrap()), emit_smtlib2(&encode(&p).unwrap()));
    }

    #[test]
    fn wire_only_asserts_gate_cuts_false() {
        let g = build_cutting_graph(&generate::ghz(4).unwrap()).unwrap();
        let p = PartitionProblem::new(g, 2, 3)
            .with_allowed(AllowedCuts::WIRE_ONLY)
            .with_resources(Resources::NONE);
        let sys = encode(&p).unwrap();
        let text = emit_smtlib2(&sys);
        for e in 0..3 {
            assert!(text.contains(&format!("(assert (not c_{e}))")));
        }
        assert!(solver_script(&sys, Some(10)).contains("(assert (< cost 10))"));
    }
}
