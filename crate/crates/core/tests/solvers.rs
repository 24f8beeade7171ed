use std::time::Duration;

use qknit_core::circuit::generate::{self, BridgeSpec};
use qknit_core::cost::Resources;
use qknit_core::graph::build_cutting_graph;
use qknit_core::model::{validate_solution, AllowedCuts, PartitionProblem, QubitPin};
use qknit_core::solve::{minimize, solve_exact, Backend, ExternalSolver, SolveOutcome, Verdict};

fn z3() -> Option<ExternalSolver> {
    let s = ExternalSolver::from_env().ok()?;
    match s.run("(check-sat)", None) {
        Ok(Verdict::Sat(_)) => Some(s),
        _ => {
            eprintln!("no SMT solver available; skipping");
            None
        }
    }
}

fn ghz4(qmax: usize) -> PartitionProblem {
    PartitionProblem::new(build_cutting_graph(&generate::ghz(4).unwrap()).unwrap(), 2, qmax)
}

#[test]
fn trivial_scripts() {
    let Some(s) = z3() else { return };
    assert_eq!(s.run("(assert true)(check-sat)", None).unwrap(), Verdict::Sat(Default::default()));
    assert_eq!(s.run("(assert false)(check-sat)", None).unwrap(), Verdict::Unsat);
}

#[test]
fn missing_binary_is_reported() {
    let s = ExternalSolver::from_command("/nonexistent/solver-binary").unwrap();
    assert!(s.run("(check-sat)", None).is_err());
}

#[test]
fn ghz4_external_matches_exact() {
    let Some(s) = z3() else { return };
    for incremental in [false, true] {
        let backend = Backend::External(s.clone().incremental(incremental));
        let p = ghz4(2);
        let ext = minimize(&p, &backend, Some(Duration::from_secs(60))).unwrap();
        let SolveOutcome::Optimal(sol) = ext else { panic!("{ext:?}") };
        assert!(validate_solution(&p, &sol).is_empty());
        assert_eq!(sol.overhead, 9.0);
        let wire = ghz4(2).with_allowed(AllowedCuts::WIRE_ONLY).with_resources(Resources::NONE);
        assert_eq!(minimize(&wire, &backend, None).unwrap(), SolveOutcome::Infeasible);
    }
}

fn bridge_problem(kw: usize, kv: usize, allowed: AllowedCuts) -> PartitionProblem {
    let spec = BridgeSpec::new(2, 2, kw, kv);
    let g = build_cutting_graph(&generate::bridge(spec).unwrap()).unwrap();
    let pins = (0..4).map(|q| QubitPin { qubit: q, partition: usize::from(q >= 2) }).collect();
    PartitionProblem::new(g, 2, 3 + kv)
        .with_allowed(allowed)
        .with_resources(Resources::NONE)
        .with_pins(pins)
}

#[test]
fn bridge_external_matches_exact() {
    let Some(s) = z3() else { return };
    let backend = Backend::External(s);
    for kw in 1..=2 {
        for kv in 0..=1 {
            for allowed in [AllowedCuts::WIRE_ONLY, AllowedCuts::GATE_ONLY, AllowedCuts::ALL] {
                let p = bridge_problem(kw, kv, allowed);
                let exact = solve_exact(&p, None).unwrap();
                let ext = minimize(&p, &backend, Some(Duration::from_secs(60))).unwrap();
                assert_eq!(exact.status(), ext.status(), "kw={kw} kv={kv}");
                if let (Some(a), Some(b)) = (exact.solution(), ext.solution()) {
                    assert_eq!(a.overhead_fp, b.overhead_fp, "kw={kw} kv={kv}");
                    assert!(validate_solution(&p, b).is_empty());
                }
            }
        }
    }
}
