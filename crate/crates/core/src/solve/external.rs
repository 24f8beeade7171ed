//! SMT-LIB2 solver child processes.

use std::io::{Read, Write};
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::thread;
use std::time::{Duration, Instant};

use super::sexpr::{complete_prefix, parse_all, parse_values, SExpr};
use super::SolverError;
use crate::model::expr::Model;

pub const SOLVER_ENV: &str = "QKNIT_SMT_SOLVER";

#[derive(Debug, Clone, PartialEq)]
pub enum Verdict {
    Sat(Model),
    Unsat,
    Unknown,
    Timeout,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExternalSolver {
    pub program: String,
    pub args: Vec<String>,
    /// Bound tightening reuses one process and only adds assertions.
    pub incremental: bool,
}

impl ExternalSolver {
    /// Parses a command line such as `z3 -in` or `/opt/cvc5 --lang smt2`.
    /// A bare `z3` gets `-in` so it reads from stdin.
    pub fn from_command(cmd: &str) -> Result<Self, SolverError> {
        let mut parts = cmd.split_whitespace().map(String::from);
        let program = parts.next().ok_or_else(|| SolverError::NotFound("empty solver command".into()))?;
        let mut args: Vec<String> = parts.collect();
        let base = std::path::Path::new(&program)
            .file_name()
            .and_then(|s| s.to_str())
            .unwrap_or("");
        if base == "z3" && args.is_empty() {
            args.push("-in".into());
        }
        Ok(ExternalSolver {
            program,
            args,
            incremental: false,
        })
    }

    /// `$QKNIT_SMT_SOLVER`, else `z3` on the PATH.
    pub fn from_env() -> Result<Self, SolverError> {
        match std::env::var(SOLVER_ENV) {
            Ok(cmd) if !cmd.trim().is_empty() => Self::from_command(&cmd),
            _ => Self::from_command("z3"),
        }
    }

    pub fn incremental(mut self, on: bool) -> Self {
        self.incremental = on;
        self
    }

    fn spawn(&self) -> Result<Child, SolverError> {
        Command::new(&self.program)
            .args(&self.args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::piped())
            .spawn()
            .map_err(|e| SolverError::NotFound(format!("{}: {e}", self.program)))
    }

    /// Runs a complete script and reads the first verdict plus the model that follows it.
    pub fn run(&self, script: &str, deadline: Option<Instant>) -> Result<Verdict, SolverError> {
        let mut child = self.spawn()?;
        let mut stdin = child.stdin.take().expect("piped stdin");
        let text = script.to_string();
        let writer = thread::spawn(move || {
            let _ = stdin.write_all(text.as_bytes());
        });
        let stdout = drain(child.stdout.take().expect("piped stdout"));
        let stderr = drain(child.stderr.take().expect("piped stderr"));
        let status = loop {
            if let Some(status) = child.try_wait().map_err(SolverError::Io)? {
                break status;
            }
            if deadline.is_some_and(|d| Instant::now() >= d) {
                let _ = child.kill();
                let _ = child.wait();
                let _ = writer.join();
                return Ok(Verdict::Timeout);
            }
            thread::sleep(Duration::from_millis(2));
        };
        let _ = writer.join();
        let out = stdout.join().unwrap_or_default();
        let err = stderr.join().unwrap_or_default();
        let exprs = parse_all(&out).map_err(SolverError::ModelParse)?;
        let crashed = || SolverError::Crashed {
            status: status.code(),
            stderr: format!("{}{}", err.trim(), if out.trim().is_empty() { "" } else { " | stdout: " }) + out.trim(),
        };
        let Some(pos) = exprs.iter().position(is_verdict) else {
            return Err(crashed());
        };
        let verdict = match &exprs[pos] {
            SExpr::Atom(a) if a == "sat" => match exprs.get(pos + 1) {
                Some(e @ SExpr::List(items)) if !is_error(e) && !items.is_empty() => {
                    Verdict::Sat(parse_values(e).map_err(SolverError::ModelParse)?)
                }
                Some(e) if is_error(e) => {
                    return Err(SolverError::ModelParse(format!("solver error after sat: {}", render(e))))
                }
                _ => Verdict::Sat(Model::new()),
            },
            SExpr::Atom(a) if a == "unsat" => Verdict::Unsat,
            _ => Verdict::Unknown,
        };
        Ok(verdict)
    }

    pub fn start_session(&self, base: &str) -> Result<Session, SolverError> {
        Session::start(self, base)
    }
}

fn drain<R: Read + Send + 'static>(mut r: R) -> thread::JoinHandle<String> {
    thread::spawn(move || {
        let mut s = String::new();
        let _ = r.read_to_string(&mut s);
        s
    })
}

fn is_verdict(e: &SExpr) -> bool {
    matches!(e, SExpr::Atom(a) if a == "sat" || a == "unsat" || a == "unknown")
}

fn is_error(e: &SExpr) -> bool {
    matches!(e, SExpr::List(items) if matches!(items.first(), Some(SExpr::Atom(a)) if a == "error"))
}

fn render(e: &SExpr) -> String {
    match e {
        SExpr::Atom(a) => a.clone(),
        SExpr::List(items) => format!("({})", items.iter().map(render).collect::<Vec<_>>().join(" ")),
    }
}

/// A long-lived solver process fed assertions one query at a time.
pub struct Session {
    child: Child,
    stdin: ChildStdin,
    rx: Receiver<String>,
    buffer: String,
}

impl Session {
    fn start(solver: &ExternalSolver, base: &str) -> Result<Self, SolverError> {
        let mut child = solver.spawn()?;
        let stdin = child.stdin.take().expect("piped stdin");
        let mut stdout = child.stdout.take().expect("piped stdout");
        let (tx, rx) = mpsc::channel();
        thread::spawn(move || {
            let mut buf = [0u8; 8192];
            loop {
                match stdout.read(&mut buf) {
                    Ok(0) | Err(_) => break,
                    Ok(n) => {
                        if tx.send(String::from_utf8_lossy(&buf[..n]).into_owned()).is_err() {
                            break;
                        }
                    }
                }
            }
        });
        drop(drain(child.stderr.take().expect("piped stderr")));
        let mut s = Session {
            child,
            stdin,
            rx,
            buffer: String::new(),
        };
        s.send(base)?;
        Ok(s)
    }

    fn send(&mut self, text: &str) -> Result<(), SolverError> {
        self.stdin
            .write_all(text.as_bytes())
            .and_then(|_| self.stdin.flush())
            .map_err(|e| SolverError::Crashed {
                status: None,
                stderr: format!("write to solver failed: {e}"),
            })
    }

    fn next_expr(&mut self, deadline: Option<Instant>) -> Result<Option<SExpr>, SolverError> {
        loop {
            if let Some(n) = complete_prefix(&self.buffer) {
                let text: String = self.buffer.drain(..n).collect();
                let mut es = parse_all(&text).map_err(SolverError::ModelParse)?;
                if let Some(e) = es.pop() {
                    return Ok(Some(e));
                }
                continue;
            }
            let chunk = match deadline {
                Some(d) => {
                    let left = d.saturating_duration_since(Instant::now());
                    match self.rx.recv_timeout(left) {
                        Ok(c) => c,
                        Err(RecvTimeoutError::Timeout) => return Ok(None),
                        Err(RecvTimeoutError::Disconnected) => return Err(self.died()),
                    }
                }
                None => self.rx.recv().map_err(|_| self.died())?,
            };
            self.buffer.push_str(&chunk);
        }
    }

    fn died(&mut self) -> SolverError {
        let status = self.child.try_wait().ok().flatten().and_then(|s| s.code());
        SolverError::Crashed {
            status,
            stderr: format!("solver exited; pending output: {}", self.buffer.trim()),
        }
    }

    /// Adds `assertions`, checks satisfiability and fetches `names` on sat.
    pub fn check(&mut self, assertions: &str, names: &[String], deadline: Option<Instant>) -> Result<Verdict, SolverError> {
        self.send(&format!("{assertions}(check-sat)\n"))?;
        let Some(first) = self.next_expr(deadline)? else {
            return Ok(Verdict::Timeout);
        };
        match first {
            SExpr::Atom(a) if a == "sat" => {
                if names.is_empty() {
                    return Ok(Verdict::Sat(Model::new()));
                }
                self.send(&format!("(get-value ({}))\n", names.join(" ")))?;
                match self.next_expr(deadline)? {
                    None => Ok(Verdict::Timeout),
                    Some(e) if is_error(&e) => Err(SolverError::ModelParse(render(&e))),
                    Some(e) => Ok(Verdict::Sat(parse_values(&e).map_err(SolverError::ModelParse)?)),
                }
            }
            SExpr::Atom(a) if a == "unsat" => Ok(Verdict::Unsat),
            SExpr::Atom(a) if a == "unknown" => Ok(Verdict::Unknown),
            other => Err(SolverError::Crashed {
                status: None,
                stderr: render(&other),
            }),
        }
    }
}

impl Drop for Session {
    fn drop(&mut self) {
        let _ = self.stdin.write_all(b"(exit)\n");
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}
