//! Optimization backends: an external SMT-LIB2 solver driven by bound
//! tightening, and an internal exact search used as the optimality oracle.

mod exact;
mod external;
pub mod sexpr;

pub use exact::{solve_exact, MAX_EXACT_VERTICES};
pub use external::{ExternalSolver, Session, Verdict, SOLVER_ENV};

use std::time::{Duration, Instant};

use thiserror::Error;

use crate::model::{
    bound_assertion, decode, emit_smtlib2, encode, query_commands, solver_script, ModelError,
    PartitionProblem, PartitionSolution,
};

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("solver not available: {0}")]
    NotFound(String),
    #[error("solver crashed (exit status {status:?}): {stderr}")]
    Crashed { status: Option<i32>, stderr: String },
    #[error("cannot parse solver output: {0}")]
    ModelParse(String),
    #[error("solver i/o: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Error)]
pub enum SolveError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error("{vertices} cutting-graph vertices exceed the exact search limit of {limit}")]
    TooLarge { vertices: usize, limit: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub enum SolveOutcome {
    /// Proven optimal.
    Optimal(PartitionSolution),
    Infeasible,
    /// Time ran out with an incumbent that is not proven optimal.
    BestSoFar(PartitionSolution),
    /// Time ran out before any feasible solution was found.
    Timeout,
}

impl SolveOutcome {
    pub fn solution(&self) -> Option<&PartitionSolution> {
        match self {
            SolveOutcome::Optimal(s) | SolveOutcome::BestSoFar(s) => Some(s),
            _ => None,
        }
    }

    pub fn status(&self) -> &'static str {
        match self {
            SolveOutcome::Optimal(_) => "optimal",
            SolveOutcome::Infeasible => "infeasible",
            SolveOutcome::BestSoFar(_) => "best_so_far",
            SolveOutcome::Timeout => "timeout",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Backend {
    Exact,
    External(ExternalSolver),
}

impl Backend {
    pub fn name(&self) -> &'static str {
        match self {
            Backend::Exact => "internal-exact",
            Backend::External(_) => "external-smt",
        }
    }
}

/// Minimizes the problem's objective. A `time_limit` turns an unfinished
/// search into `BestSoFar` or `Timeout`.
pub fn minimize(
    problem: &PartitionProblem,
    backend: &Backend,
    time_limit: Option<Duration>,
) -> Result<SolveOutcome, SolveError> {
    let deadline = time_limit.map(|t| Instant::now() + t);
    match backend {
        Backend::Exact => solve_exact(problem, deadline),
        Backend::External(solver) => minimize_external(problem, solver, deadline),
    }
}

fn minimize_external(
    problem: &PartitionProblem,
    solver: &ExternalSolver,
    deadline: Option<Instant>,
) -> Result<SolveOutcome, SolveError> {
    let start = Instant::now();
    let sys = match encode(problem) {
        Err(ModelError::InfeasibleTrivially(_)) => return Ok(SolveOutcome::Infeasible),
        other => other?,
    };
    let mut session = if solver.incremental {
        Some(solver.start_session(&emit_smtlib2(&sys))?)
    } else {
        None
    };
    let mut best: Option<PartitionSolution> = None;
    let mut iterations = 0;
    loop {
        let bound = best.as_ref().map(|s| s.objective_value);
        let verdict = match session.as_mut() {
            Some(sess) => {
                let extra = bound.map(|b| bound_assertion(&sys, b)).unwrap_or_default();
                sess.check(&extra, sys.symbols.names(), deadline)?
            }
            None => solver.run(&solver_script(&sys, bound), deadline)?,
        };
        iterations += 1;
        let finish = |mut s: PartitionSolution, optimal: bool| {
            s.optimal = optimal;
            s.stats.backend = "external-smt".into();
            s.stats.iterations = iterations;
            s.stats.elapsed_ms = start.elapsed().as_millis() as u64;
            s
        };
        match verdict {
            Verdict::Sat(model) => {
                let sol = decode(&sys, &model)?;
                if bound.is_some_and(|b| sol.objective_value >= b) {
                    return Err(ModelError::InconsistentModel(format!(
                        "solver model has objective {} despite bound {}",
                        sol.objective_value,
                        bound.unwrap()
                    ))
                    .into());
                }
                best = Some(sol);
            }
            Verdict::Unsat => {
                return Ok(match best {
                    Some(s) => SolveOutcome::Optimal(finish(s, true)),
                    None => SolveOutcome::Infeasible,
                })
            }
            Verdict::Timeout | Verdict::Unknown => {
                return Ok(match best {
                    Some(s) => SolveOutcome::BestSoFar(finish(s, false)),
                    None => SolveOutcome::Timeout,
                })
            }
        }
    }
}

/// Checks that `(assert (< objective bound))` is unsatisfiable, i.e. that no
/// solution beats `bound`.
pub fn certify_lower_bound(
    problem: &PartitionProblem,
    solver: &ExternalSolver,
    bound: i64,
    deadline: Option<Instant>,
) -> Result<bool, SolveError> {
    let sys = encode(problem)?;
    let mut script = emit_smtlib2(&sys);
    script.push_str(&bound_assertion(&sys, bound));
    script.push_str(&query_commands(&sys));
    Ok(solver.run(&script, deadline)? == Verdict::Unsat)
}
