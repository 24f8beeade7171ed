//! Benchmark sweeps over generated circuits.

use std::collections::BTreeMap;
use std::fmt::Write;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use serde::Serialize;

use qknit_core::circuit::generate::BridgeSpec;
use qknit_core::cost::{Budget, Resources};
use qknit_core::graph::CuttingGraph;
use qknit_core::model::{AllowedCuts, PartitionProblem};
use qknit_core::solve::{minimize, SolveOutcome};

use crate::commands::{budget_from_flags, select_backend};
use crate::input::{reduced_capacity, GenSpec};
use crate::{write_file, BenchArgs, CliError, SolverChoice, Stage, EXIT_OK};

pub const CSV_HEADER: &str = "row,suite,instance,partitions,max_qubits,reduce_factor,ancilla_frac,mode,status,cuts,wire_cuts,gate_cuts,grouped_cuts,overhead,log10_overhead_fp,q,time_ms,value,detail";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Combined,
    WireOnly,
}

impl Mode {
    pub fn parse(s: &str) -> Result<Mode, CliError> {
        match s.trim() {
            "combined" => Ok(Mode::Combined),
            "wire-only" | "wire_only" => Ok(Mode::WireOnly),
            other => Err(CliError::new(Stage::Args, format!("unknown mode '{other}' (combined, wire-only)"))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Mode::Combined => "combined",
            Mode::WireOnly => "wire-only",
        }
    }

    /// Combined mode uses every cut kind and resource; wire-only is the
    /// baseline of unassisted wire cuts without grouping.
    pub fn apply(self, p: PartitionProblem) -> PartitionProblem {
        match self {
            Mode::Combined => p.with_allowed(AllowedCuts::ALL).with_resources(Resources::FULL),
            Mode::WireOnly => p.with_allowed(AllowedCuts::WIRE_ONLY).with_resources(Resources::NONE),
        }
    }
}

/// One circuit of a suite.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub suite: String,
    pub gen: GenSpec,
}

/// Expands `ghz:4..8`, `qaoa:4..6`, `hea:5`, `bridge` into instances.
pub fn expand_suite(entry: &str, seeds: &[u64], layers: usize, qaoa_frac: f64) -> Result<Vec<Instance>, CliError> {
    let bad = |m: String| CliError::new(Stage::Args, format!("--suite {entry}: {m}"));
    let (name, range) = match entry.split_once(':') {
        Some((n, r)) => (n.trim(), Some(r.trim())),
        None => (entry.trim(), None),
    };
    let sizes: Vec<usize> = match range {
        None => match name {
            "bridge" => vec![],
            _ => (4..=8).collect(),
        },
        Some(r) => match r.split_once("..") {
            Some((lo, hi)) => {
                let lo: usize = lo.parse().map_err(|_| bad(format!("bad range start '{lo}'")))?;
                let hi: usize = hi.trim_start_matches('=').parse().map_err(|_| bad(format!("bad range end '{hi}'")))?;
                if lo > hi {
                    return Err(bad(format!("empty range {lo}..{hi}")));
                }
                (lo..=hi).collect()
            }
            None => vec![r.parse().map_err(|_| bad(format!("bad size '{r}'")))?],
        },
    };
    let mk = |gen| Instance {
        suite: name.to_string(),
        gen,
    };
    let out = match name {
        "ghz" => sizes.iter().map(|&n| mk(GenSpec::Ghz(n))).collect(),
        "qaoa" => sizes
            .iter()
            .flat_map(|&n| {
                seeds.iter().map(move |&seed| GenSpec::Qaoa {
                    n,
                    extra_edge_frac: qaoa_frac,
                    seed,
                    layers,
                })
            })
            .map(mk)
            .collect(),
        "hea" => sizes
            .iter()
            .flat_map(|&n| seeds.iter().map(move |&seed| GenSpec::Hea { n, layers, seed }))
            .map(mk)
            .collect(),
        "bridge" => {
            if range.is_some() {
                return Err(bad("bridge takes no size range".into()));
            }
            let mut v = Vec::new();
            for kw in 1..=3 {
                for kv in 0..=2 {
                    v.push(mk(GenSpec::Bridge(BridgeSpec::new(2, 2, kw, kv))));
                }
            }
            v
        }
        other => return Err(bad(format!("unknown suite '{other}' (ghz, qaoa, hea, bridge)"))),
    };
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Job {
    pub instance: Instance,
    pub reduce_factor: usize,
    pub ancilla_frac: f64,
    pub mode: Mode,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRow {
    pub suite: String,
    pub instance: String,
    pub partitions: usize,
    pub max_qubits: usize,
    pub reduce_factor: usize,
    pub ancilla_frac: f64,
    pub mode: Mode,
    /// `optimal`, `infeasible`, `best_so_far`, `timeout` or `error`.
    pub status: String,
    pub cuts: Option<usize>,
    pub wire_cuts: Option<usize>,
    pub gate_cuts: Option<usize>,
    pub grouped_cuts: Option<usize>,
    pub overhead: Option<f64>,
    pub log10_overhead_fp: Option<i64>,
    pub q: Vec<usize>,
    pub time_ms: Option<u64>,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AggregateRow {
    pub suite: String,
    pub mode: String,
    pub metric: &'static str,
    pub value: f64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchResult {
    pub rows: Vec<BenchRow>,
    pub aggregates: Vec<AggregateRow>,
}

pub struct BenchConfig {
    pub budget: Option<Budget>,
    pub solver: SolverChoice,
    pub solver_cmd: Option<String>,
    pub timeout: Duration,
    pub jobs: usize,
    pub timings: bool,
}

pub fn jobs_for(
    instances: &[Instance],
    reduce_factors: &[usize],
    ancilla_fracs: &[f64],
    modes: &[Mode],
) -> Vec<Job> {
    let mut out = Vec::new();
    for inst in instances {
        for &d in reduce_factors {
            for &f in ancilla_fracs {
                for &mode in modes {
                    out.push(Job {
                        instance: inst.clone(),
                        reduce_factor: d,
                        ancilla_frac: f,
                        mode,
                    });
                }
            }
        }
    }
    out
}

fn run_job(job: &Job, cfg: &BenchConfig) -> BenchRow {
    let mut row = BenchRow {
        suite: job.instance.suite.clone(),
        instance: job.instance.gen.label(),
        partitions: job.reduce_factor,
        max_qubits: 0,
        reduce_factor: job.reduce_factor,
        ancilla_frac: job.ancilla_frac,
        mode: job.mode,
        status: "error".into(),
        cuts: None,
        wire_cuts: None,
        gate_cuts: None,
        grouped_cuts: None,
        overhead: None,
        log10_overhead_fp: None,
        q: vec![],
        time_ms: None,
        detail: String::new(),
    };
    let start = Instant::now();
    let result = (|| -> Result<SolveOutcome, CliError> {
        let circuit = job.instance.gen.build()?;
        let graph = CuttingGraph::build(&circuit).map_err(|e| CliError::new(Stage::Parse, e.to_string()))?;
        row.max_qubits = reduced_capacity(circuit.num_qubits(), job.reduce_factor as f64, job.ancilla_frac)?;
        let problem = job
            .mode
            .apply(PartitionProblem::new(graph, job.reduce_factor, row.max_qubits))
            .with_budget(cfg.budget);
        let backend = select_backend(cfg.solver, cfg.solver_cmd.as_deref(), false, &problem.graph)?;
        let outcome = minimize(&problem, &backend, Some(cfg.timeout))?;
        if let Some(s) = outcome.solution() {
            row.cuts = Some(s.num_cuts());
            row.wire_cuts = Some(s.wire_cut_count(&problem.graph));
            row.gate_cuts = Some(s.gate_cut_count(&problem.graph));
            row.grouped_cuts = Some(s.grouped_edges.len());
            row.overhead = Some(s.overhead);
            row.log10_overhead_fp = Some(s.overhead_fp);
            row.q = s.qubit_counts.clone();
        }
        Ok(outcome)
    })();
    match result {
        Ok(o) => row.status = o.status().to_string(),
        Err(e) => row.detail = e.to_string(),
    }
    if cfg.timings {
        row.time_ms = Some(start.elapsed().as_millis() as u64);
    }
    row
}

/// Runs all jobs on up to `cfg.jobs` threads; rows keep the job order.
pub fn run_jobs(jobs: &[Job], cfg: &BenchConfig) -> Vec<BenchRow> {
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<BenchRow>>> = Mutex::new(vec![None; jobs.len()]);
    let workers = cfg.jobs.clamp(1, jobs.len().max(1));
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= jobs.len() {
                    break;
                }
                let row = run_job(&jobs[i], cfg);
                slots.lock().expect("bench slot lock")[i] = Some(row);
            });
        }
    });
    slots
        .into_inner()
        .expect("bench slot lock")
        .into_iter()
        .map(|r| r.expect("every job ran"))
        .collect()
}

type PairKey = (String, String, usize, u64);

fn pair_key(r: &BenchRow) -> PairKey {
    (r.suite.clone(), r.instance.clone(), r.reduce_factor, r.ancilla_frac.to_bits())
}

/// Per suite (and `all`): infeasible fraction per mode, plus mean
/// combined/wire-only overhead ratio, strict-improvement fraction and
/// dominance violations over instances solved to optimality in both modes.
pub fn aggregate(rows: &[BenchRow]) -> Vec<AggregateRow> {
    let mut suites: Vec<String> = rows.iter().map(|r| r.suite.clone()).collect();
    suites.dedup();
    let mut unique = Vec::new();
    for s in suites {
        if !unique.contains(&s) {
            unique.push(s);
        }
    }
    unique.push("all".into());
    let mut out = Vec::new();
    for suite in unique {
        let in_suite: Vec<&BenchRow> = rows.iter().filter(|r| suite == "all" || r.suite == suite).collect();
        for mode in [Mode::Combined, Mode::WireOnly] {
            let decided: Vec<&&BenchRow> = in_suite
                .iter()
                .filter(|r| r.mode == mode && (r.status == "optimal" || r.status == "infeasible"))
                .collect();
            if decided.is_empty() {
                continue;
            }
            let infeasible = decided.iter().filter(|r| r.status == "infeasible").count();
            out.push(AggregateRow {
                suite: suite.clone(),
                mode: mode.name().into(),
                metric: "infeasible_fraction",
                value: infeasible as f64 / decided.len() as f64,
                count: decided.len(),
            });
        }
        let mut pairs: BTreeMap<PairKey, [Option<i64>; 2]> = BTreeMap::new();
        let mut overheads: BTreeMap<PairKey, [f64; 2]> = BTreeMap::new();
        for r in &in_suite {
            if r.status != "optimal" {
                continue;
            }
            let slot = match r.mode {
                Mode::Combined => 0,
                Mode::WireOnly => 1,
            };
            pairs.entry(pair_key(r)).or_default()[slot] = r.log10_overhead_fp;
            overheads.entry(pair_key(r)).or_default()[slot] = r.overhead.unwrap_or(f64::NAN);
        }
        let both: Vec<&PairKey> = pairs
            .iter()
            .filter(|(_, v)| v[0].is_some() && v[1].is_some())
            .map(|(k, _)| k)
            .collect();
        if both.is_empty() {
            continue;
        }
        let n = both.len();
        let ratio = both.iter().map(|k| overheads[*k][0] / overheads[*k][1]).sum::<f64>() / n as f64;
        let strict = both.iter().filter(|k| pairs[**k][0] < pairs[**k][1]).count();
        let violations = both.iter().filter(|k| pairs[**k][0] > pairs[**k][1]).count();
        let mode = "combined/wire-only".to_string();
        out.push(AggregateRow {
            suite: suite.clone(),
            mode: mode.clone(),
            metric: "mean_overhead_ratio",
            value: ratio,
            count: n,
        });
        out.push(AggregateRow {
            suite: suite.clone(),
            mode: mode.clone(),
            metric: "strict_improvement_fraction",
            value: strict as f64 / n as f64,
            count: n,
        });
        out.push(AggregateRow {
            suite,
            mode,
            metric: "dominance_violations",
            value: violations as f64,
            count: n,
        });
    }
    out
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn opt<T: ToString>(x: &Option<T>) -> String {
    x.as_ref().map(|v| v.to_string()).unwrap_or_default()
}

pub fn to_csv(result: &BenchResult) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in &result.rows {
        let q = r.q.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(";");
        let _ = writeln!(
            out,
            "instance,{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},,{}",
            csv_field(&r.suite),
            csv_field(&r.instance),
            r.partitions,
            r.max_qubits,
            r.reduce_factor,
            r.ancilla_frac,
            r.mode.name(),
            r.status,
            opt(&r.cuts),
            opt(&r.wire_cuts),
            opt(&r.gate_cuts),
            opt(&r.grouped_cuts),
            opt(&r.overhead),
            opt(&r.log10_overhead_fp),
            q,
            opt(&r.time_ms),
            csv_field(&r.detail)
        );
    }
    for a in &result.aggregates {
        let _ = writeln!(
            out,
            "aggregate,{},,,,,,{},{},,,,,,,,,{},n={}",
            csv_field(&a.suite),
            csv_field(&a.mode),
            a.metric,
            a.value,
            a.count
        );
    }
    out
}

pub fn sweep(a: &BenchArgs) -> Result<BenchResult, CliError> {
    let mut instances = Vec::new();
    for entry in &a.suite {
        instances.extend(expand_suite(entry, &a.seeds, a.layers, a.qaoa_frac)?);
    }
    let modes = a.modes.iter().map(|m| Mode::parse(m)).collect::<Result<Vec<_>, _>>()?;
    if a.reduce_factors.iter().any(|&d| d < 2) {
        return Err(CliError::new(Stage::Args, "reduce factors must be at least 2"));
    }
    if a.timeout.is_nan() || a.timeout <= 0.0 {
        return Err(CliError::new(Stage::Args, "--timeout must be positive"));
    }
    let cfg = BenchConfig {
        budget: budget_from_flags(&a.budget)?,
        solver: a.solver,
        solver_cmd: a.solver_cmd.clone(),
        timeout: Duration::from_secs_f64(a.timeout),
        jobs: a.jobs,
        timings: a.timings,
    };
    let jobs = jobs_for(&instances, &a.reduce_factors, &a.ancilla_fracs, &modes);
    let rows = run_jobs(&jobs, &cfg);
    let aggregates = aggregate(&rows);
    Ok(BenchResult { rows, aggregates })
}

pub fn run(a: &BenchArgs) -> Result<i32, CliError> {
    let result = sweep(a)?;
    let text = if a.json {
        serde_json::to_string_pretty(&result).expect("bench result serializes") + "\n"
    } else {
        to_csv(&result)
    };
    match &a.out {
        Some(p) => write_file(p, &text)?,
        None => print!("{text}"),
    }
    let failed = result.rows.iter().filter(|r| r.status == "error").count();
    if failed > 0 {
        eprintln!("{failed} of {} instance(s) failed", result.rows.len());
    }
    Ok(EXIT_OK)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_expansion() {
        assert_eq!(expand_suite("ghz:4..6", &[0], 1, 0.5).unwrap().len(), 3);
        assert_eq!(expand_suite("qaoa:4..5", &[0, 1], 1, 0.5).unwrap().len(), 4);
        assert_eq!(expand_suite("bridge", &[0], 1, 0.5).unwrap().len(), 9);
        assert_eq!(expand_suite("hea:5", &[3], 2, 0.5).unwrap()[0].gen.label(), "hea:5:2:3");
        assert!(expand_suite("ghz:6..4", &[0], 1, 0.5).is_err());
        assert!(expand_suite("tfim:4", &[0], 1, 0.5).is_err());
    }

    #[test]
    fn csv_quoting() {
        assert_eq!(csv_field("a,b"), "\"a,b\"");
        assert_eq!(csv_field("say \"x\""), "\"say \"\"x\"\"\"");
        assert_eq!(csv_field("plain"), "plain");
        assert_eq!(CSV_HEADER.split(',').count(), 19);
    }
}
