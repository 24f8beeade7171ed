//! Circuit sources: files on disk and named generators.

use std::path::Path;

use qknit_core::circuit::generate::{self, BridgeSpec};
use qknit_core::circuit::{json, qasm, Circuit};

use crate::{CliError, Stage};

/// Reads a `.json` or `.qasm` circuit.
pub fn load_circuit(path: &Path) -> Result<Circuit, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::new(Stage::Parse, format!("{}: {e}", path.display())))?;
    let ext = path.extension().and_then(|s| s.to_str()).unwrap_or("").to_ascii_lowercase();
    let parsed = match ext.as_str() {
        "json" => json::parse_json(&text).map_err(|e| e.to_string()),
        "qasm" => qasm::parse_qasm2_subset(&text).map_err(|e| e.to_string()),
        other => Err(format!("unknown circuit extension '{other}' (expected .json or .qasm)")),
    };
    parsed.map_err(|m| CliError::new(Stage::Parse, format!("{}: {m}", path.display())))
}

/// A parsed `--gen` argument.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GenSpec {
    Ghz(usize),
    Qaoa { n: usize, extra_edge_frac: f64, seed: u64, layers: usize },
    Hea { n: usize, layers: usize, seed: u64 },
    Bridge(BridgeSpec),
}

impl GenSpec {
    /// `ghz:N`, `qaoa:N[:FRAC[:SEED[:LAYERS]]]`, `hea:N[:LAYERS[:SEED]]`, `bridge:L:M:KW:KV`.
    pub fn parse(s: &str) -> Result<GenSpec, CliError> {
        let err = |m: String| CliError::new(Stage::Parse, format!("--gen {s}: {m}"));
        let mut parts = s.split(':');
        let name = parts.next().unwrap_or("").to_ascii_lowercase();
        let params: Vec<&str> = parts.collect();
        fn int<T: std::str::FromStr>(p: &[&str], i: usize, default: Option<T>, what: &str) -> Result<T, String> {
            match p.get(i) {
                Some(t) => t.trim().parse().map_err(|_| format!("bad {what} '{t}'")),
                None => default.ok_or_else(|| format!("missing {what}")),
            }
        }
        let spec = match name.as_str() {
            "ghz" => {
                check_arity(&params, 1, 1).map_err(err)?;
                GenSpec::Ghz(int(&params, 0, None, "qubit count").map_err(err)?)
            }
            "qaoa" => {
                check_arity(&params, 1, 4).map_err(err)?;
                GenSpec::Qaoa {
                    n: int(&params, 0, None, "qubit count").map_err(err)?,
                    extra_edge_frac: int(&params, 1, Some(0.5), "edge fraction").map_err(err)?,
                    seed: int(&params, 2, Some(0), "seed").map_err(err)?,
                    layers: int(&params, 3, Some(1), "layer count").map_err(err)?,
                }
            }
            "hea" => {
                check_arity(&params, 1, 3).map_err(err)?;
                GenSpec::Hea {
                    n: int(&params, 0, None, "qubit count").map_err(err)?,
                    layers: int(&params, 1, Some(1), "layer count").map_err(err)?,
                    seed: int(&params, 2, Some(0), "seed").map_err(err)?,
                }
            }
            "bridge" => {
                check_arity(&params, 4, 4).map_err(err)?;
                GenSpec::Bridge(BridgeSpec::new(
                    int(&params, 0, None, "top block size").map_err(err)?,
                    int(&params, 1, None, "bottom block size").map_err(err)?,
                    int(&params, 2, None, "left CNOT count").map_err(err)?,
                    int(&params, 3, None, "ladder CNOT count").map_err(err)?,
                ))
            }
            other => return Err(err(format!("unknown generator '{other}' (ghz, qaoa, hea, bridge)"))),
        };
        Ok(spec)
    }

    pub fn build(&self) -> Result<Circuit, CliError> {
        let built = match *self {
            GenSpec::Ghz(n) => generate::ghz(n),
            GenSpec::Qaoa {
                n,
                extra_edge_frac,
                seed,
                layers,
            } => generate::qaoa_maxcut(n, extra_edge_frac, seed, layers),
            GenSpec::Hea { n, layers, seed } => generate::hea(n, layers, seed),
            GenSpec::Bridge(spec) => generate::bridge(spec),
        };
        built.map_err(|e| CliError::new(Stage::Parse, e.to_string()))
    }

    /// Canonical label, e.g. `qaoa:8:0.5:1:1`.
    pub fn label(&self) -> String {
        match *self {
            GenSpec::Ghz(n) => format!("ghz:{n}"),
            GenSpec::Qaoa {
                n,
                extra_edge_frac,
                seed,
                layers,
            } => format!("qaoa:{n}:{extra_edge_frac}:{seed}:{layers}"),
            GenSpec::Hea { n, layers, seed } => format!("hea:{n}:{layers}:{seed}"),
            GenSpec::Bridge(b) => format!(
                "bridge:{}:{}:{}:{}",
                b.top, b.bottom, b.left_cnots, b.ladder_cnots
            ),
        }
    }
}

fn check_arity(params: &[&str], min: usize, max: usize) -> Result<(), String> {
    if params.len() < min || params.len() > max {
        let want = if min == max {
            format!("{min}")
        } else {
            format!("{min} to {max}")
        };
        return Err(format!("expected {want} parameters, got {}", params.len()));
    }
    Ok(())
}

/// `ceil(width / d · (1 + f))`, guarded against floating-point noise just above an integer.
pub fn reduced_capacity(width: usize, reduce_factor: f64, ancilla_frac: f64) -> Result<usize, CliError> {
    if reduce_factor.is_nan() || reduce_factor < 1.0 || ancilla_frac.is_nan() || ancilla_frac < 0.0 {
        return Err(CliError::new(
            Stage::Args,
            format!("reduce factor {reduce_factor} must be >= 1 and ancilla fraction {ancilla_frac} >= 0"),
        ));
    }
    let x = width as f64 / reduce_factor * (1.0 + ancilla_frac);
    Ok(((x - 1e-9).ceil() as usize).max(1))
}
