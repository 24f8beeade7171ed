//! `partition`, `verify` and `budget`.

use std::path::Path;
use std::time::{Duration, Instant};

use serde::Serialize;

use qknit_core::circuit::Circuit;
use qknit_core::cost::{max_cuts_within_budget, Budget, Family, Resources, SECONDS_PER_DAY};
use qknit_core::graph::CuttingGraph;
use qknit_core::knit::{
    expectation, generate_subcircuits, knit_expectation, sample_knit_expectation, KnitError, PauliString,
};
use qknit_core::model::{emit_smtlib2, encode, AllowedCuts, ModelError, Objective, PartitionProblem, QubitPin};
use qknit_core::solve::{minimize, Backend, ExternalSolver, SolveOutcome, MAX_EXACT_VERTICES};

use crate::input::{load_circuit, reduced_capacity, GenSpec};
use crate::report::{build_report, load_report, to_json, InputSummary, Timings};
use crate::{
    write_file, BudgetArgs, BudgetFlags, CliError, ObjectiveArg, PartitionArgs, SolverChoice, Stage, VerifyArgs,
    EXIT_DEVIATION, EXIT_GROUPED, EXIT_INFEASIBLE, EXIT_OK, EXIT_TIMEOUT,
};

/// Largest deviation `verify` accepts.
pub const VERIFY_TOLERANCE: f64 = 1e-9;

/// Parses a number with an optional SI prefix and unit, e.g. `1e6`, `1MHz`, `2.5k`.
pub fn parse_rate(s: &str) -> Result<f64, CliError> {
    let t = s.trim();
    let t = t.strip_suffix("Hz").or_else(|| t.strip_suffix("hz")).unwrap_or(t);
    let (num, scale) = match t.chars().last() {
        Some('k') | Some('K') => (&t[..t.len() - 1], 1e3),
        Some('M') => (&t[..t.len() - 1], 1e6),
        Some('G') => (&t[..t.len() - 1], 1e9),
        _ => (t, 1.0),
    };
    num.trim()
        .parse::<f64>()
        .map(|x| x * scale)
        .map_err(|_| CliError::new(Stage::Args, format!("bad frequency '{s}'")))
}

/// Parses seconds with an optional `s`, `m`, `h` or `d` suffix.
pub fn parse_duration(s: &str) -> Result<f64, CliError> {
    let t = s.trim();
    let (num, scale) = match t.chars().last() {
        Some('s') => (&t[..t.len() - 1], 1.0),
        Some('m') => (&t[..t.len() - 1], 60.0),
        Some('h') => (&t[..t.len() - 1], 3600.0),
        Some('d') => (&t[..t.len() - 1], SECONDS_PER_DAY),
        _ => (t, 1.0),
    };
    num.trim()
        .parse::<f64>()
        .map(|x| x * scale)
        .map_err(|_| CliError::new(Stage::Args, format!("bad runtime '{s}'")))
}

/// Budget from the flags; one day at 1 MHz unless told otherwise.
pub fn budget_from_flags(f: &BudgetFlags) -> Result<Option<Budget>, CliError> {
    if f.no_budget {
        return Ok(None);
    }
    let b = match f.budget_shots {
        Some(total) => Budget::from_total(total, f.base_shots),
        None => {
            let freq = f.freq.as_deref().map(parse_rate).transpose()?.unwrap_or(1e6);
            let runtime = f.runtime.as_deref().map(parse_duration).transpose()?.unwrap_or(SECONDS_PER_DAY);
            Budget::from_rate(freq, runtime, f.base_shots)
        }
    };
    b.map(Some).map_err(|e| CliError::new(Stage::Args, e.to_string()))
}

pub fn select_backend(choice: SolverChoice, cmd: Option<&str>, incremental: bool, graph: &CuttingGraph) -> Result<Backend, CliError> {
    let external = || -> Result<Backend, CliError> {
        let s = match cmd {
            Some(c) => ExternalSolver::from_command(c),
            None => ExternalSolver::from_env(),
        }
        .map_err(|e| CliError::new(Stage::Solve, e.to_string()))?;
        Ok(Backend::External(s.incremental(incremental)))
    };
    match choice {
        SolverChoice::Internal => Ok(Backend::Exact),
        SolverChoice::External => external(),
        SolverChoice::Auto if graph.num_vertices() <= MAX_EXACT_VERTICES => Ok(Backend::Exact),
        SolverChoice::Auto => external(),
    }
}

fn parse_pin(s: &str) -> Result<QubitPin, CliError> {
    let bad = || CliError::new(Stage::Args, format!("bad --pin '{s}' (expected QUBIT:PARTITION)"));
    let (q, p) = s.split_once(':').ok_or_else(bad)?;
    Ok(QubitPin {
        qubit: q.trim().parse().map_err(|_| bad())?,
        partition: p.trim().parse().map_err(|_| bad())?,
    })
}

pub fn outcome_exit_code(outcome: &SolveOutcome) -> i32 {
    match outcome {
        SolveOutcome::Optimal(_) => EXIT_OK,
        SolveOutcome::Infeasible => EXIT_INFEASIBLE,
        SolveOutcome::BestSoFar(_) | SolveOutcome::Timeout => EXIT_TIMEOUT,
    }
}

/// Loads `--in` or builds `--gen`, returning the circuit and a source label.
fn circuit_source(input: Option<&Path>, gen: Option<&str>) -> Result<(Circuit, String), CliError> {
    match (input, gen) {
        (Some(p), _) => Ok((load_circuit(p)?, p.display().to_string())),
        (None, Some(g)) => {
            let spec = GenSpec::parse(g)?;
            Ok((spec.build()?, format!("gen:{}", spec.label())))
        }
        (None, None) => Err(CliError::new(Stage::Args, "one of --in or --gen is required")),
    }
}

/// Builds the problem described by the `partition` flags.
pub fn partition_problem(a: &PartitionArgs, circuit: &Circuit) -> Result<PartitionProblem, CliError> {
    let graph = CuttingGraph::build(circuit).map_err(|e| CliError::new(Stage::Parse, e.to_string()))?;
    let width = circuit.num_qubits();
    let max_qubits = match (a.max_qubits, a.reduce_factor) {
        (Some(q), _) => q,
        (None, Some(d)) => reduced_capacity(width, d, a.ancilla_frac)?,
        (None, None) => return Err(CliError::new(Stage::Args, "one of --max-qubits or --reduce-factor is required")),
    };
    let partitions = a
        .partitions
        .unwrap_or_else(|| a.reduce_factor.map_or(2, |d| (d - 1e-9).ceil().max(2.0) as usize));
    let pins = a.pin.iter().map(|s| parse_pin(s)).collect::<Result<Vec<_>, _>>()?;
    let allowed = if a.wire_only { AllowedCuts::WIRE_ONLY } else { AllowedCuts::ALL };
    Ok(PartitionProblem::new(graph, partitions, max_qubits)
        .with_resources(Resources::new(!a.no_cc, !a.no_ancilla))
        .with_allowed(allowed)
        .with_budget(budget_from_flags(&a.budget)?)
        .with_objective(match a.objective {
            ObjectiveArg::Samples => Objective::MinSamples,
            ObjectiveArg::Qubits => Objective::MinMaxQubits,
        })
        .with_max_cuts(a.max_cuts)
        .with_max_overhead(a.max_overhead)
        .with_pins(pins))
}

/// Standalone SMT-LIB2 script for the problem under its budget; a trivially
/// infeasible problem becomes an explicit unsatisfiable script.
pub fn smt2_text(problem: &PartitionProblem) -> Result<String, CliError> {
    match encode(problem) {
        Ok(sys) => Ok(emit_smtlib2(&sys) + "(check-sat)\n(get-model)\n"),
        Err(ModelError::InfeasibleTrivially(m)) => Ok(format!(
            "; trivially infeasible: {m}\n(set-logic QF_LIA)\n(assert false)\n(check-sat)\n"
        )),
        Err(e) => Err(CliError::new(Stage::Encode, e.to_string())),
    }
}

pub fn partition(a: &PartitionArgs) -> Result<i32, CliError> {
    let start = Instant::now();
    let (circuit, source) = circuit_source(a.input.as_deref(), a.gen.as_deref())?;
    let problem = partition_problem(a, &circuit)?;
    problem.validate().map_err(|e| CliError::new(Stage::Encode, e.to_string()))?;
    if let Some(path) = &a.circuit_out {
        write_file(path, &(qknit_core::circuit::json::to_json(&circuit) + "\n"))?;
    }
    if let Some(path) = &a.dot_out {
        write_file(path, &problem.graph.to_dot())?;
    }
    if let Some(path) = &a.smt2_out {
        write_file(path, &smt2_text(&problem)?)?;
    }
    let backend = select_backend(a.solver.solver, a.solver.solver_cmd.as_deref(), a.solver.incremental, &problem.graph)?;
    let limit = a.solver.timeout.map(Duration::from_secs_f64);
    let solve_start = Instant::now();
    let outcome = minimize(&problem, &backend, limit)?;
    let solve_ms = solve_start.elapsed().as_millis() as u64;
    let timings = a.timings.then(|| Timings {
        total_ms: start.elapsed().as_millis() as u64,
        solve_ms,
        iterations: outcome.solution().map_or(0, |s| s.stats.iterations),
    });
    let input = InputSummary::new(&source, &circuit, &problem.graph);
    let report = build_report(input, &problem, &outcome, backend.name(), timings)?;
    let text = to_json(&report);
    match &a.report {
        Some(path) => write_file(path, &text)?,
        None => print!("{text}"),
    }
    match outcome.solution() {
        Some(s) => eprintln!(
            "{}: {} cut(s) ({} wire, {} gate, {} grouped), overhead {}, Q {:?}",
            outcome.status(),
            s.num_cuts(),
            s.wire_cut_count(&problem.graph),
            s.gate_cut_count(&problem.graph),
            s.grouped_edges.len(),
            s.overhead,
            s.qubit_counts
        ),
        None => eprintln!("{}", outcome.status()),
    }
    Ok(outcome_exit_code(&outcome))
}

pub fn verify(a: &VerifyArgs) -> Result<i32, CliError> {
    let circuit = load_circuit(&a.input)?;
    let text = std::fs::read_to_string(&a.solution)
        .map_err(|e| CliError::new(Stage::Io, format!("{}: {e}", a.solution.display())))?;
    let loaded = load_report(&text, &circuit)?;
    let obs = PauliString::parse(&a.observable).map_err(|e| CliError::new(Stage::Args, e.to_string()))?;
    if obs.len() != circuit.num_qubits() {
        return Err(CliError::new(
            Stage::Args,
            format!("observable has {} qubits, circuit has {}", obs.len(), circuit.num_qubits()),
        ));
    }
    let mut ens = match generate_subcircuits(&circuit, &loaded.solution) {
        Ok(e) => e,
        Err(e @ KnitError::GroupedCutUnsupported(_)) => {
            return Err(CliError::new(Stage::Knit, e.to_string()).with_exit(EXIT_GROUPED))
        }
        Err(e) => return Err(CliError::new(Stage::Knit, e.to_string())),
    };
    // Knit with the coefficients the report records, so a tampered file shows up as a deviation.
    let mut coefficients = Vec::with_capacity(ens.cuts.len());
    for cut in &ens.cuts {
        let recorded = loaded
            .coefficients
            .iter()
            .find(|(e, _)| *e == cut.edge)
            .and_then(|(_, c)| c.clone())
            .unwrap_or_else(|| cut.coefficients.clone());
        coefficients.push(recorded);
    }
    ens.reweight(&coefficients).map_err(|e| CliError::new(Stage::Knit, e.to_string()))?;
    let knit = knit_expectation(&ens, &obs).map_err(|e| CliError::new(Stage::Knit, e.to_string()))?;
    let direct = expectation(&circuit, &obs).map_err(|e| CliError::new(Stage::Knit, e.to_string()))?;
    let deviation = (knit - direct).abs();
    println!("observable {obs}");
    println!("subcircuit widths {:?}, {} ensemble entries, normalization {}", ens.widths(), ens.len(), ens.normalization());
    println!("knitted  {knit:.12}");
    println!("direct   {direct:.12}");
    println!("deviation {deviation:.3e}");
    if let Some(shots) = a.shots {
        let est = sample_knit_expectation(&ens, &obs, shots, a.seed).map_err(|e| CliError::new(Stage::Knit, e.to_string()))?;
        println!("sampled  {est:.6} ({shots} shots, seed {})", a.seed);
    }
    Ok(if deviation <= VERIFY_TOLERANCE { EXIT_OK } else { EXIT_DEVIATION })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BudgetRow {
    pub freq_hz: f64,
    pub runtime_s: f64,
    pub family: &'static str,
    pub max_total_samples: f64,
    pub max_cuts: Option<u32>,
}

pub fn budget_rows(a: &BudgetArgs) -> Result<Vec<BudgetRow>, CliError> {
    let freqs = a.freq.iter().map(|s| parse_rate(s)).collect::<Result<Vec<_>, _>>()?;
    let runtimes = a.runtime.iter().map(|s| parse_duration(s)).collect::<Result<Vec<_>, _>>()?;
    let families = a
        .families
        .iter()
        .map(|s| Family::parse(s).ok_or_else(|| CliError::new(Stage::Args, format!("unknown family '{s}'"))))
        .collect::<Result<Vec<_>, _>>()?;
    let mut rows = Vec::new();
    for &family in &families {
        for &runtime in &runtimes {
            for &freq in &freqs {
                let b = Budget::from_rate(freq, runtime, a.base_shots)
                    .map_err(|e| CliError::new(Stage::Args, e.to_string()))?;
                rows.push(BudgetRow {
                    freq_hz: freq,
                    runtime_s: runtime,
                    family: family.name(),
                    max_total_samples: b.max_total_samples,
                    max_cuts: max_cuts_within_budget(&b, family),
                });
            }
        }
    }
    Ok(rows)
}

pub fn budget(a: &BudgetArgs) -> Result<i32, CliError> {
    let rows = budget_rows(a)?;
    if a.json {
        println!("{}", serde_json::to_string_pretty(&rows).expect("rows serialize"));
    } else {
        println!("{:<14} {:>12} {:<12} {:>8}", "freq_hz", "runtime_s", "family", "max_cuts");
        for r in &rows {
            let k = r.max_cuts.map_or("none".to_string(), |k| k.to_string());
            println!("{:<14} {:>12} {:<12} {:>8}", r.freq_hz, r.runtime_s, r.family, k);
        }
    }
    Ok(EXIT_OK)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rates_and_durations() {
        assert_eq!(parse_rate("1kHz").unwrap(), 1e3);
        assert_eq!(parse_rate("1MHz").unwrap(), 1e6);
        assert_eq!(parse_rate("1e9").unwrap(), 1e9);
        assert_eq!(parse_rate("2.5k").unwrap(), 2500.0);
        assert!(parse_rate("fast").is_err());
        assert_eq!(parse_duration("1d").unwrap(), 86400.0);
        assert_eq!(parse_duration("2h").unwrap(), 7200.0);
        assert_eq!(parse_duration("90").unwrap(), 90.0);
    }

    #[test]
    fn pins() {
        assert_eq!(parse_pin("3:1").unwrap(), QubitPin { qubit: 3, partition: 1 });
        assert!(parse_pin("3").is_err());
    }
}
