use proptest::prelude::*;

use qknit_core::circuit::{json, Circuit, Gate, GateKind};
use qknit_core::graph::{build_cutting_graph, EdgeKind};
use qknit_core::knit::{move_circuit, simulate_statevector, Initial, StateVector};
use qknit_core::model::expr::Value;
use qknit_core::model::{encode, validate_solution, Objective, PartitionProblem, PartitionSolution};
use num_complex::Complex64;

fn circuit_strategy() -> impl Strategy<Value = Circuit> {
    (2usize..=5).prop_flat_map(|n| {
        let gate = (0u8..4, 0..n, 1..n).prop_map(move |(k, a, off)| {
            let b = (a + off) % n;
            match k {
                0 => Gate::two(GateKind::Cnot, a, b),
                1 => Gate::two(GateKind::Cz, a, b),
                2 => Gate::single(GateKind::H, a),
                _ => Gate::single(GateKind::Rz(0.25 * off as f64), a),
            }
        });
        prop::collection::vec(gate, 1..10).prop_map(move |gs| Circuit::from_gates(n, 0, gs).unwrap())
    })
}

/// Relabels partitions by first appearance so label 0 comes first and no label is skipped.
fn canonical(raw: &[usize]) -> Vec<usize> {
    let mut map = Vec::new();
    raw.iter()
        .map(|&p| match map.iter().position(|&x| x == p) {
            Some(i) => i,
            None => {
                map.push(p);
                map.len() - 1
            }
        })
        .collect()
}

proptest! {
    #[test]
    fn wire_edges_follow_touch_counts(c in circuit_strategy()) {
        let g = build_cutting_graph(&c).unwrap();
        let mut touches = vec![0usize; c.num_qubits()];
        for gate in c.gates().iter().filter(|g| g.is_two_qubit()) {
            for &q in &gate.qubits {
                touches[q] += 1;
            }
        }
        let expected: usize = touches.iter().map(|&t| t.saturating_sub(1)).sum();
        prop_assert_eq!(g.wire_edges().len(), expected);
        prop_assert_eq!(g.gate_edges().len(), c.two_qubit_count());
        prop_assert_eq!(g.num_vertices(), 2 * c.two_qubit_count());
        for e in g.wire_edges() {
            let (u, v) = e.endpoints;
            prop_assert_eq!(g.qubit_of(u), g.qubit_of(v));
            prop_assert!(g.gate_of(u) < g.gate_of(v));
        }
    }

    #[test]
    fn encoding_agrees_with_validator(
        c in circuit_strategy(),
        raw in prop::collection::vec(0usize..3, 20),
        np in 2usize..=3,
        qmax in 1usize..=5,
    ) {
        let g = build_cutting_graph(&c).unwrap();
        let nv = g.num_vertices();
        prop_assume!(nv >= np);
        let assignment = canonical(&raw[..nv].iter().map(|&p| p % np).collect::<Vec<_>>());
        let problem = PartitionProblem::new(g, np, qmax).with_objective(Objective::MinMaxQubits);
        let Ok(sys) = encode(&problem) else { return Ok(()) };
        let prices = problem.edge_prices().unwrap();
        let grouped = vec![false; problem.graph.edges().len()];
        let sol = PartitionSolution::from_assignment(&problem, &prices, assignment.clone(), &grouped).unwrap();
        let values = sys.valuation(&assignment, &grouped);
        let encoded_ok = sys.violated(&values).is_empty();
        let validated_ok = validate_solution(&problem, &sol).is_empty();
        prop_assert_eq!(encoded_ok, validated_ok, "violated {:?}", sys.violated(&values));

        // Brute force: c_e is true exactly when the endpoints disagree.
        for e in problem.graph.edges() {
            let (u, v) = e.endpoints;
            prop_assert_eq!(values[sys.c[e.id]], Some(Value::Bool(assignment[u] != assignment[v])));
            let mut flipped = values.clone();
            flipped[sys.c[e.id]] = Some(Value::Bool(assignment[u] == assignment[v]));
            let label = format!("cut_def[{}]", e.id);
            prop_assert!(sys.violated(&flipped).contains(&label.as_str()));
        }
        let wires = problem.graph.edges().iter().filter(|e| e.kind == EdgeKind::Wire).count();
        prop_assert_eq!(wires, problem.graph.wire_edges().len());
    }

    #[test]
    fn circuit_json_round_trip(c in circuit_strategy()) {
        let text = json::to_json(&c);
        let back = json::parse_json(&text).unwrap();
        prop_assert_eq!(&back, &c);
        prop_assert_eq!(json::to_json(&back), text);
    }

    #[test]
    fn move_circuit_transfers_state(re0 in -1.0f64..1.0, im0 in -1.0f64..1.0, re1 in -1.0f64..1.0, im1 in -1.0f64..1.0) {
        let norm = (re0 * re0 + im0 * im0 + re1 * re1 + im1 * im1).sqrt();
        prop_assume!(norm > 1e-3);
        let a = Complex64::new(re0, im0) / norm;
        let b = Complex64::new(re1, im1) / norm;
        let zero = Complex64::new(0.0, 0.0);
        // Source on qubit 0, target qubit 1 in |0>.
        let input = vec![a, b, zero, zero];
        let branches = simulate_statevector(&move_circuit(), Initial::Amplitudes(input)).unwrap();
        prop_assert_eq!(branches.len(), 2);
        let want = StateVector::from_amplitudes(1, vec![a, b]).unwrap();
        for br in &branches {
            // After transfer the source is |0> or |1> and the target carries the state.
            let amps = br.state.amplitudes();
            let src = if amps[0].norm() + amps[2].norm() > 1e-9 { 0 } else { 1 };
            let got = StateVector::from_amplitudes(1, vec![amps[src], amps[src + 2]]).unwrap();
            prop_assert!((got.fidelity(&want) - 1.0).abs() < 1e-10);
        }
    }
}
