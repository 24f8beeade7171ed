//! Acceptance gate. Every criterion prints one PASS/FAIL line; the test fails
//! if any criterion fails.

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use qknit_core::circuit::generate::{self, BridgeSpec};
use qknit_core::circuit::rng::SeededRng;
use qknit_core::circuit::{Circuit, Gate, GateKind};
use qknit_core::cost::{gamma_sq, group_cost, max_cuts_within_budget, Budget, CutKind, Family, GroupClass, Resources};
use qknit_core::graph::{build_cutting_graph, CuttingGraph};
use qknit_core::knit::{
    expectation, generate_subcircuits, knit_expectation, move_circuit, qpd_cnot, simulate_statevector,
    validate_qpd, Initial, Pauli, PauliString, QpdTarget, StateVector,
};
use qknit_core::model::{
    cuts_from_assignment, validate_solution, AllowedCuts, PartitionProblem, PartitionSolution, QubitPin,
};
use qknit_core::solve::{minimize, solve_exact, Backend, ExternalSolver, SolveOutcome, Verdict};
use qknit_cli::bench::{self, BenchConfig, Mode};
use qknit_cli::SolverChoice;

use num_complex::Complex64;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn criterion_1_budget_counts() -> Outcome {
    let start = Instant::now();
    let expect = [
        (Family::BellGroup, [5, 10, 15]),
        (Family::NinePow, [4, 7, 10]),
        (Family::SixteenPow, [3, 5, 8]),
    ];
    for (family, counts) in expect {
        for (freq, want) in [1e3, 1e6, 1e9].into_iter().zip(counts) {
            let b = Budget::from_rate(freq, 86_400.0, 8000.0).unwrap();
            let got = max_cuts_within_budget(&b, family);
            ensure(got == Some(want), || format!("{} at {freq} Hz: {got:?}, want {want}", family.name()))?;
        }
    }
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(1), || format!("took {elapsed:?}"))?;
    Ok(format!("nine counts match in {elapsed:?}"))
}

fn criterion_2_cut_prices() -> Outcome {
    let none = Resources::NONE;
    let cc = Resources::new(true, false);
    let checks = [
        ("CNOT without CC", gamma_sq(CutKind::GateCnot, none), 9.0),
        ("wire without CC", gamma_sq(CutKind::Wire, none), 16.0),
        ("wire with CC", gamma_sq(CutKind::Wire, cc), 9.0),
        ("SWAP without CC", gamma_sq(CutKind::GateSwap, none), 49.0),
    ];
    for (what, got, want) in checks {
        ensure(got == want, || format!("{what}: {got}, want {want}"))?;
    }
    let mut rng = SeededRng::new(2);
    for _ in 0..50 {
        let theta = rng.angle() - std::f64::consts::PI;
        let want = (1.0 + 2.0 * theta.sin().abs()).powi(2);
        let got = gamma_sq(CutKind::GateCr(theta), none);
        ensure(got == want, || format!("CR({theta}): {got}, want {want}"))?;
    }
    for k in 0..=20u32 {
        let want = ((1u64 << (k + 1)) - 1).pow(2) as f64;
        let got = group_cost(k, GroupClass::BellGroup);
        ensure(got == want, || format!("group_cost({k}) = {got}, want {want}"))?;
    }
    Ok("table prices and group costs exact".into())
}

/// Bridge problem with the top block pinned to partition 0 and the bottom to 1.
/// Capacity `3 + k_v` leaves room for one moved-in qubit per ladder excursion.
fn bridge_problem(kw: usize, kv: usize, mode: &str) -> PartitionProblem {
    let g = build_cutting_graph(&generate::bridge(BridgeSpec::new(2, 2, kw, kv)).unwrap()).unwrap();
    let pins = (0..4)
        .map(|q| QubitPin {
            qubit: q,
            partition: usize::from(q >= 2),
        })
        .collect();
    let p = PartitionProblem::new(g, 2, 3 + kv).with_pins(pins);
    match mode {
        "wire-only" => p.with_allowed(AllowedCuts::WIRE_ONLY).with_resources(Resources::NONE),
        "gate-only" => p.with_allowed(AllowedCuts::GATE_ONLY).with_resources(Resources::NONE),
        _ => p.with_allowed(AllowedCuts::ALL).with_resources(Resources::NONE),
    }
}

fn criterion_3_bridge_family() -> Outcome {
    let mut mismatches = Vec::new();
    let mut slowest = Duration::ZERO;
    for kw in 1..=3usize {
        for kv in 0..=2usize {
            let formulas = [
                ("wire-only", 2 + 2 * kv),
                ("gate-only", kw + kv),
                ("combined", kw.min(2) + kv),
            ];
            for (mode, want) in formulas {
                let start = Instant::now();
                let out = solve_exact(&bridge_problem(kw, kv, mode), None).map_err(|e| e.to_string())?;
                let took = start.elapsed();
                slowest = slowest.max(took);
                let got = out.solution().map(|s| s.num_cuts());
                if got != Some(want) || took >= Duration::from_secs(60) {
                    mismatches.push(format!("kw={kw} kv={kv} {mode}: {got:?} cuts, want {want} ({took:?})"));
                }
            }
        }
    }
    ensure(mismatches.is_empty(), || mismatches.join("; "))?;
    Ok(format!("27 cut counts match, slowest solve {slowest:?}"))
}

fn ghz4(qmax: usize) -> PartitionProblem {
    PartitionProblem::new(build_cutting_graph(&generate::ghz(4).unwrap()).unwrap(), 2, qmax)
}

fn criterion_4_ghz_halving() -> Outcome {
    let combined = solve_exact(&ghz4(2), None).map_err(|e| e.to_string())?;
    let SolveOutcome::Optimal(s) = &combined else {
        return Err(format!("combined: {}", combined.status()));
    };
    let g = &ghz4(2).graph;
    ensure(s.num_cuts() == 1 && s.gate_cut_count(g) == 1 && s.overhead == 9.0, || {
        format!("combined: {} cuts, overhead {}", s.num_cuts(), s.overhead)
    })?;
    let wire = |q| ghz4(q).with_allowed(AllowedCuts::WIRE_ONLY).with_resources(Resources::NONE);
    let tight = solve_exact(&wire(2), None).map_err(|e| e.to_string())?;
    ensure(tight == SolveOutcome::Infeasible, || format!("wire-only Q_max=2: {}", tight.status()))?;
    let roomy = solve_exact(&wire(3), None).map_err(|e| e.to_string())?;
    let SolveOutcome::Optimal(w) = &roomy else {
        return Err(format!("wire-only Q_max=3: {}", roomy.status()));
    };
    ensure(w.overhead == 16.0 && w.wire_cut_count(g) == 1, || format!("wire-only Q_max=3: overhead {}", w.overhead))?;
    ensure(w.widths().iter().max() == Some(&3), || format!("widths {:?}", w.widths()))?;
    Ok("gate cut S=9; wire-only infeasible at 2, S=16 at 3".into())
}

/// Random circuit with at most `max_2q` two-qubit gates.
fn random_circuit(rng: &mut SeededRng, n: usize, max_2q: usize, len: usize) -> Circuit {
    let mut gates = Vec::new();
    let mut two = 0;
    for _ in 0..len {
        let a = rng.below(n);
        match rng.below(6) {
            0..=2 if two < max_2q => {
                let b = (a + 1 + rng.below(n - 1)) % n;
                two += 1;
                gates.push(Gate::two(if rng.below(2) == 0 { GateKind::Cnot } else { GateKind::Cz }, a, b));
            }
            3 => gates.push(Gate::single(GateKind::H, a)),
            4 => gates.push(Gate::single(GateKind::Rz(rng.angle()), a)),
            _ => gates.push(Gate::single(GateKind::S, a)),
        }
    }
    Circuit::from_gates(n, 0, gates).unwrap()
}

fn solver() -> Option<ExternalSolver> {
    let s = ExternalSolver::from_env().ok()?;
    matches!(s.run("(check-sat)", None), Ok(Verdict::Sat(_))).then_some(s)
}

fn criterion_5_oracle_equivalence() -> Outcome {
    let s = solver().ok_or("no SMT solver available (set QKNIT_SMT_SOLVER or install z3)")?;
    let mut rng = SeededRng::new(5);
    let (mut checked, mut feasible) = (0, 0);
    let mut mismatches = Vec::new();
    while checked < 220 {
        let n = 2 + rng.below(4);
        let c = random_circuit(&mut rng, n, 6, 12);
        let g = build_cutting_graph(&c).unwrap();
        let np = 2 + rng.below(2);
        if g.num_vertices() < np || g.num_vertices() > 12 {
            continue;
        }
        let qmax = 1 + rng.below(n);
        let mut p = PartitionProblem::new(g, np, qmax);
        let mode = if rng.below(2) == 0 { Mode::Combined } else { Mode::WireOnly };
        p = mode.apply(p);
        let backend = Backend::External(s.clone().incremental(checked % 2 == 1));
        let exact = solve_exact(&p, None).map_err(|e| e.to_string())?;
        let ext = minimize(&p, &backend, Some(Duration::from_secs(60))).map_err(|e| e.to_string())?;
        checked += 1;
        let same = match (&exact, &ext) {
            (SolveOutcome::Optimal(a), SolveOutcome::Optimal(b)) => {
                feasible += 1;
                a.overhead_fp == b.overhead_fp && validate_solution(&p, b).is_empty()
            }
            (SolveOutcome::Infeasible, SolveOutcome::Infeasible) => true,
            _ => false,
        };
        if !same {
            mismatches.push(format!(
                "problem {checked}: exact {} {:?}, external {} {:?}",
                exact.status(),
                exact.solution().map(|x| x.overhead_fp),
                ext.status(),
                ext.solution().map(|x| x.overhead_fp)
            ));
        }
    }
    ensure(mismatches.is_empty(), || format!("{} mismatches: {}", mismatches.len(), mismatches.join("; ")))?;
    Ok(format!("{checked} problems ({feasible} feasible), zero mismatches"))
}

fn random_pauli(rng: &mut SeededRng, n: usize) -> PauliString {
    let ps = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];
    PauliString((0..n).map(|_| ps[rng.below(4)]).collect())
}

/// Random gates on `qubits` only, with single-qubit layers in between.
fn block(rng: &mut SeededRng, qubits: &[usize], len: usize, gates: &mut Vec<Gate>) {
    for _ in 0..len {
        let a = qubits[rng.below(qubits.len())];
        match rng.below(5) {
            0 | 1 if qubits.len() > 1 => {
                let mut b = a;
                while b == a {
                    b = qubits[rng.below(qubits.len())];
                }
                let kind = if rng.below(2) == 0 { GateKind::Cnot } else { GateKind::Cz };
                gates.push(Gate::two(kind, a, b));
            }
            2 => gates.push(Gate::single(GateKind::H, a)),
            3 => gates.push(Gate::single(GateKind::Rz(rng.angle()), a)),
            _ => gates.push(Gate::single(GateKind::Sdg, a)),
        }
    }
}

/// Two-block circuit whose natural partition has `gate_cuts` crossing gates
/// and, if `wire_cut`, one qubit migrating from the first block to the second.
/// Returns the circuit and the vertex assignment realizing that partition.
fn crossing_case(rng: &mut SeededRng, gate_cuts: usize, wire_cut: bool) -> (Circuit, Vec<usize>) {
    let n = 3 + rng.below(6);
    let na = 1 + rng.below(n - 1);
    let a: Vec<usize> = (0..na).collect();
    let b: Vec<usize> = (na..n).collect();
    let mut gates = Vec::new();
    for q in 0..n {
        gates.push(Gate::single(GateKind::H, q));
    }
    // The migrating qubit is the last qubit of block A; it interacts with A before the switch and with B after it.
    let mover = na - 1;
    let a_rest: Vec<usize> = a[..na - 1].to_vec();
    block(rng, &a, 4, &mut gates);
    block(rng, &b, 4, &mut gates);
    let mut crossing = Vec::new();
    let switch_at;
    if wire_cut {
        if let Some(&other) = a_rest.first() {
            gates.push(Gate::two(GateKind::Cnot, other, mover));
        } else {
            gates.push(Gate::single(GateKind::H, mover));
        }
        switch_at = gates.len();
        gates.push(Gate::two(GateKind::Cz, mover, b[rng.below(b.len())]));
    } else {
        switch_at = usize::MAX;
    }
    for _ in 0..gate_cuts {
        let x = if wire_cut { a_rest.get(rng.below(a_rest.len().max(1))).copied() } else { Some(a[rng.below(na)]) };
        let Some(x) = x else {
            // No stationary qubit left on side A; cross from the mover before it switches.
            continue;
        };
        let y = b[rng.below(b.len())];
        crossing.push(gates.len());
        let kind = if rng.below(2) == 0 { GateKind::Cnot } else { GateKind::Cz };
        gates.push(if rng.below(2) == 0 { Gate::two(kind, x, y) } else { Gate::two(kind, y, x) });
        if !a_rest.is_empty() || !wire_cut {
            block(rng, if wire_cut { &a_rest } else { &a }, 2, &mut gates);
        }
        block(rng, &b, 2, &mut gates);
    }
    if wire_cut {
        let mut after_b = b.clone();
        after_b.push(mover);
        block(rng, &after_b, 3, &mut gates);
    }
    let c = Circuit::from_gates(n, 0, gates).unwrap();
    let g = build_cutting_graph(&c).unwrap();
    let assignment = g
        .vertices()
        .iter()
        .map(|v| {
            if v.qubit == mover && wire_cut {
                usize::from(v.gate_index >= switch_at)
            } else {
                usize::from(v.qubit >= na)
            }
        })
        .collect();
    (c, assignment)
}

fn knit_case(c: &Circuit, assignment: Vec<usize>, obs: &PauliString) -> Result<(usize, f64, f64), String> {
    let g = build_cutting_graph(c).unwrap();
    let p = PartitionProblem::new(g, 2, c.num_qubits() + 4);
    let prices = p.edge_prices().map_err(|e| e.to_string())?;
    let grouped = vec![false; p.graph.edges().len()];
    let sol = PartitionSolution::from_assignment(&p, &prices, assignment, &grouped).map_err(|e| e.to_string())?;
    let ens = generate_subcircuits(c, &sol).map_err(|e| e.to_string())?;
    let knit = knit_expectation(&ens, obs).map_err(|e| e.to_string())?;
    let direct = expectation(c, obs).map_err(|e| e.to_string())?;
    Ok((sol.num_cuts(), (knit - direct).abs(), ens.normalization()))
}

fn criterion_6_knitting_exactness() -> Outcome {
    let mut rng = SeededRng::new(6);
    let (mut single, mut double, mut single_wire) = (0, 0, 0);
    let mut worst = 0.0f64;
    let mut attempts = 0;
    while (single < 60 || double < 15 || single_wire < 20) && attempts < 2000 {
        attempts += 1;
        let want_two = single >= 60 || (double < 15 && rng.below(4) == 0);
        let (gate_cuts, wire) = if want_two {
            match rng.below(2) {
                0 => (2, false),
                _ => (1, true),
            }
        } else if rng.below(2) == 0 {
            (1, false)
        } else {
            (0, true)
        };
        let (c, assignment) = crossing_case(&mut rng, gate_cuts, wire);
        let g = build_cutting_graph(&c).unwrap();
        let cuts = cuts_from_assignment(&g, &assignment).iter().filter(|&&x| x).count();
        if cuts != gate_cuts + usize::from(wire) {
            continue;
        }
        let obs = random_pauli(&mut rng, c.num_qubits());
        let (k, dev, norm) = knit_case(&c, assignment, &obs)?;
        worst = worst.max(dev);
        ensure(dev <= 1e-9, || format!("{k}-cut case on {} qubits, {obs}: deviation {dev:e}", c.num_qubits()))?;
        let kappa = 3f64.powi(k as i32);
        ensure(norm == kappa, || format!("{k}-cut case: sum |w| = {norm}, want {kappa}"))?;
        match k {
            1 => {
                single += 1;
                if wire {
                    single_wire += 1;
                }
            }
            2 => double += 1,
            _ => {}
        }
    }
    ensure(single >= 50 && double >= 10, || format!("only {single} single-cut and {double} two-cut cases built"))?;
    Ok(format!(
        "{single} single-cut ({single_wire} wire) and {double} two-cut cases, max deviation {worst:.1e}"
    ))
}

fn criterion_7_qpd_and_move() -> Outcome {
    for cc in [false, true] {
        let check = validate_qpd(&qpd_cnot(cc), QpdTarget::Cnot);
        ensure(check.passed && check.max_deviation <= 1e-10, || format!("CNOT QPD deviation {:e}", check.max_deviation))?;
        ensure(check.kappa == 3.0, || format!("kappa {}", check.kappa))?;
    }
    let mut rng = SeededRng::new(7);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let raw: Vec<f64> = (0..4).map(|_| rng.unit() * 2.0 - 1.0).collect();
        let norm = raw.iter().map(|x| x * x).sum::<f64>().sqrt();
        let a = Complex64::new(raw[0], raw[1]) / norm;
        let b = Complex64::new(raw[2], raw[3]) / norm;
        let zero = Complex64::new(0.0, 0.0);
        let branches = simulate_statevector(&move_circuit(), Initial::Amplitudes(vec![a, b, zero, zero]))
            .map_err(|e| e.to_string())?;
        ensure(branches.len() == 2, || format!("{} branches", branches.len()))?;
        let want = StateVector::from_amplitudes(1, vec![a, b]).unwrap();
        for br in &branches {
            let src = usize::from(br.clbits[0]);
            let amps = br.state.amplitudes();
            let got = StateVector::from_amplitudes(1, vec![amps[src], amps[src + 2]]).unwrap();
            let f = got.fidelity(&want);
            worst = worst.max(1.0 - f);
            ensure(f >= 1.0 - 1e-10, || format!("fidelity {f} in branch {src}"))?;
        }
    }
    Ok(format!("QPD channel exact, kappa 3; 100 transfers, max infidelity {worst:.1e}"))
}

fn criterion_8_restriction_dominance() -> Outcome {
    let mut instances = Vec::new();
    for entry in ["ghz:4..8", "qaoa:4..6", "hea:4..6", "bridge"] {
        instances.extend(bench::expand_suite(entry, &[0, 1], 1, 0.5).map_err(|e| e.to_string())?);
    }
    let jobs = bench::jobs_for(&instances, &[2, 3], &[0.0, 0.3, 0.6], &[Mode::Combined, Mode::WireOnly]);
    let cfg = BenchConfig {
        budget: Some(Budget::default_day_at_mhz()),
        solver: SolverChoice::Internal,
        solver_cmd: None,
        timeout: Duration::from_secs(60),
        jobs: std::thread::available_parallelism().map_or(2, |n| n.get()),
        timings: false,
    };
    let rows = bench::run_jobs(&jobs, &cfg);
    let errors: Vec<String> = rows
        .iter()
        .filter(|r| r.status == "error")
        .map(|r| format!("{} d={}: {}", r.instance, r.reduce_factor, r.detail))
        .collect();
    ensure(errors.is_empty(), || errors.join("; "))?;
    let (mut both, mut bridge_kw2, mut bridge_strict) = (0, 0, 0);
    for pair in rows.chunks(2) {
        let (c, w) = (&pair[0], &pair[1]);
        assert_eq!((c.mode, w.mode), (Mode::Combined, Mode::WireOnly));
        if c.status != "optimal" || w.status != "optimal" {
            continue;
        }
        both += 1;
        let (cs, ws) = (c.log10_overhead_fp.unwrap(), w.log10_overhead_fp.unwrap());
        ensure(cs <= ws, || format!("{} d={} f={}: combined {cs} > wire-only {ws}", c.instance, c.reduce_factor, c.ancilla_frac))?;
        let kw: usize = c.instance.split(':').nth(3).and_then(|x| x.parse().ok()).unwrap_or(0);
        if c.suite == "bridge" && kw >= 2 {
            bridge_kw2 += 1;
            if cs < ws {
                bridge_strict += 1;
            }
        }
    }
    ensure(bridge_kw2 > 0 && bridge_strict > 0, || {
        format!("no strict improvement on bridge k_w >= 2 ({bridge_strict} of {bridge_kw2})")
    })?;
    Ok(format!(
        "{} jobs, {both} pairs feasible in both modes, combined <= wire-only on all; bridge k_w >= 2 strictly better in {bridge_strict} of {bridge_kw2}",
        rows.len()
    ))
}

fn q_counts(p: &PartitionProblem, assignment: &[usize], grouped: &[bool]) -> Result<PartitionSolution, String> {
    let prices = p.edge_prices().map_err(|e| e.to_string())?;
    PartitionSolution::from_assignment(p, &prices, assignment.to_vec(), grouped).map_err(|e| e.to_string())
}

fn criterion_9_qubit_accounting() -> Outcome {
    let p = ghz4(3);
    let s = q_counts(&p, &[0, 0, 0, 0, 1, 1], &[false; 5])?;
    ensure(s.num_cuts() == 1 && s.wire_cut_count(&p.graph) == 1, || format!("cuts {:?}", s.cut_edges))?;
    ensure(s.widths() == vec![3, 2], || format!("widths {:?}", s.widths()))?;
    ensure(s.widths().iter().sum::<usize>() == 4 + 1, || "total width is not 4 + 1".into())?;
    ensure(validate_solution(&p, &s).is_empty(), || format!("{:?}", validate_solution(&p, &s)))?;

    // Grouped cuts, one at a time, on a three-partition bridge layout.
    let c = generate::bridge(BridgeSpec::new(2, 2, 3, 1)).unwrap();
    let g: CuttingGraph = build_cutting_graph(&c).unwrap();
    let ne = g.edges().len();
    let p = PartitionProblem::new(g, 3, 12);
    // Qubits 0,1 in partition 0, 2,3 in partition 1, the last vertex of qubit 3 in partition 2.
    let last3 = *p.graph.qubit_vertices(3).last().unwrap();
    let assignment: Vec<usize> = p
        .graph
        .vertices()
        .iter()
        .map(|v| if v.id == last3 { 2 } else { usize::from(v.qubit >= 2) })
        .collect();
    let cut = cuts_from_assignment(&p.graph, &assignment);
    let cut_edges: Vec<usize> = (0..ne).filter(|&e| cut[e]).collect();
    ensure(cut_edges.len() >= 3, || format!("expected several cuts, got {cut_edges:?}"))?;
    let mut grouped = vec![false; ne];
    let mut prev = q_counts(&p, &assignment, &grouped)?;
    let mut checked = 0;
    for &e in &cut_edges {
        let edge = p.graph.edge(e);
        if !matches!(edge.gate, None | Some(GateKind::Cnot) | Some(GateKind::Cz)) {
            continue;
        }
        grouped[e] = true;
        let next = q_counts(&p, &assignment, &grouped)?;
        let touched = [assignment[edge.endpoints.0], assignment[edge.endpoints.1]];
        for part in 0..3 {
            let delta = next.qubit_counts[part] as i64 - prev.qubit_counts[part] as i64;
            let want = i64::from(touched.contains(&part));
            ensure(delta == want, || format!("grouping edge {e}: partition {part} changed by {delta}, want {want}"))?;
        }
        ensure(validate_solution(&p, &next).is_empty(), || format!("{:?}", validate_solution(&p, &next)))?;
        let mut tampered = next.clone();
        tampered.qubit_counts[touched[0]] -= 1;
        ensure(!validate_solution(&p, &tampered).is_empty(), || "tampered Q_p accepted".into())?;
        prev = next;
        checked += 1;
    }
    Ok(format!("GHZ-4 wire cut widths (3,2); {checked} grouped cuts each add exactly one per touched partition"))
}

fn run_qknit(args: &[&str], dir: &Path) -> Result<(i32, Vec<u8>), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_qknit"))
        .args(args)
        .current_dir(dir)
        .output()
        .map_err(|e| e.to_string())?;
    Ok((out.status.code().unwrap_or(-1), out.stdout))
}

fn criterion_10_determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut outputs = Vec::new();
    for run in 0..2 {
        let (r, s, d, b) = (
            format!("report{run}.json"),
            format!("model{run}.smt2"),
            format!("graph{run}.dot"),
            format!("bench{run}.csv"),
        );
        let (code, _) = run_qknit(
            &[
                "partition", "--gen", "qaoa:6:0.5:3:1", "--partitions", "2", "--max-qubits", "4",
                "--report", &r, "--smt2-out", &s, "--dot-out", &d,
            ],
            dir.path(),
        )?;
        ensure(code == 0, || format!("partition exit {code}"))?;
        let jobs = if run == 0 { "1" } else { "4" };
        let (code, _) = run_qknit(
            &[
                "bench", "--suite", "ghz:4..6,qaoa:4..5,bridge", "--seeds", "0,1", "--reduce-factors", "2,3",
                "--ancilla-fracs", "0,0.3", "--jobs", jobs, "--out", &b,
            ],
            dir.path(),
        )?;
        ensure(code == 0, || format!("bench exit {code}"))?;
        let read = |f: &str| std::fs::read(dir.path().join(f)).map_err(|e| e.to_string());
        outputs.push([read(&r)?, read(&s)?, read(&d)?, read(&b)?]);
    }
    for (i, name) in ["report JSON", "SMT-LIB2", "DOT", "bench CSV"].iter().enumerate() {
        ensure(!outputs[0][i].is_empty(), || format!("{name} is empty"))?;
        ensure(outputs[0][i] == outputs[1][i], || format!("{name} differs between runs"))?;
    }
    Ok("report, SMT-LIB2, DOT and CSV byte-identical across runs".into())
}

#[test]
fn acceptance() {
    let criteria: [Criterion; 10] = [
        ("budget cut counts", criterion_1_budget_counts),
        ("cut prices", criterion_2_cut_prices),
        ("bridge cut-count family", criterion_3_bridge_family),
        ("GHZ-4 halving", criterion_4_ghz_halving),
        ("oracle equivalence", criterion_5_oracle_equivalence),
        ("knitting exactness", criterion_6_knitting_exactness),
        ("QPD validation and move circuit", criterion_7_qpd_and_move),
        ("restriction dominance", criterion_8_restriction_dominance),
        ("Q_p accounting", criterion_9_qubit_accounting),
        ("determinism", criterion_10_determinism),
    ];
    let mut failed = Vec::new();
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        match check() {
            Ok(detail) => println!("criterion {:>2} PASS {name}: {detail} [{:?}]", i + 1, start.elapsed()),
            Err(detail) => {
                println!("criterion {:>2} FAIL {name}: {detail} [{:?}]", i + 1, start.elapsed());
                failed.push(i + 1);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
