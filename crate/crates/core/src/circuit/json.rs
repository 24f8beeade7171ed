//! JSON circuit schema.
//!
//! ```json
//! {"qubits": 2, "clbits": 0, "gates": [{"kind": "cnot", "qubits": [0, 1]}]}
//! ```
//!
//! Gates carry optional `"angle"` (radians), `"clbit"` (measure target) and
//! `"cond"` (`[clbit, value]`).

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{Circuit, Condition, Gate, GateKind};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SchemaError {
    #[error("malformed JSON at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{path}: {message}")]
    Invalid { path: String, message: String },
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCircuit {
    qubits: usize,
    #[serde(default)]
    clbits: usize,
    gates: Vec<RawGate>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGate {
    kind: String,
    qubits: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    angle: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    clbit: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    cond: Option<(usize, u8)>,
}

pub fn parse_json(text: &str) -> Result<Circuit, SchemaError> {
    let raw: RawCircuit = serde_json::from_str(text).map_err(|e| SchemaError::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    from_raw(raw)
}

/// Parses an already-decoded JSON value (used when a circuit is embedded in a larger document).
pub fn from_value(value: serde_json::Value) -> Result<Circuit, SchemaError> {
    let raw: RawCircuit = serde_json::from_value(value).map_err(|e| SchemaError::Invalid {
        path: "$".into(),
        message: e.to_string(),
    })?;
    from_raw(raw)
}

fn from_raw(raw: RawCircuit) -> Result<Circuit, SchemaError> {
    let mut gates = Vec::with_capacity(raw.gates.len());
    for (i, g) in raw.gates.into_iter().enumerate() {
        let path = format!("gates[{i}]");
        let invalid = |field: &str, message: String| SchemaError::Invalid {
            path: format!("{path}{field}"),
            message,
        };
        let needs_angle = matches!(g.kind.as_str(), "rz" | "crz");
        if needs_angle && g.angle.is_none() {
            return Err(invalid(".angle", format!("'{}' requires an angle", g.kind)));
        }
        if !needs_angle && g.angle.is_some() {
            return Err(invalid(".angle", format!("'{}' takes no angle", g.kind)));
        }
        let kind = GateKind::from_name(&g.kind, g.angle)
            .filter(|_| g.kind != "cx")
            .ok_or_else(|| invalid(".kind", format!("unknown gate kind '{}'", g.kind)))?;
        if g.qubits.len() != kind.arity() {
            return Err(invalid(
                ".qubits",
                format!("'{}' expects {} qubit(s), got {}", g.kind, kind.arity(), g.qubits.len()),
            ));
        }
        for (j, &q) in g.qubits.iter().enumerate() {
            if q >= raw.qubits {
                return Err(invalid(
                    &format!(".qubits[{j}]"),
                    format!("index {q} >= {}", raw.qubits),
                ));
            }
        }
        let condition = match g.cond {
            None => None,
            Some((clbit, value)) if value <= 1 => Some(Condition {
                clbit,
                value: value == 1,
            }),
            Some((_, value)) => {
                return Err(invalid(".cond[1]", format!("condition value {value} is not 0 or 1")))
            }
        };
        gates.push(Gate {
            kind,
            qubits: g.qubits,
            clbit: g.clbit,
            condition,
        });
    }
    Circuit::from_gates(raw.qubits, raw.clbits, gates).map_err(|e| match e {
        super::CircuitError::InvalidGate { index, reason } => SchemaError::Invalid {
            path: format!("gates[{index}]"),
            message: reason,
        },
        other => SchemaError::Invalid {
            path: "$".into(),
            message: other.to_string(),
        },
    })
}

fn to_raw(circuit: &Circuit) -> RawCircuit {
    RawCircuit {
        qubits: circuit.num_qubits(),
        clbits: circuit.num_clbits(),
        gates: circuit
            .gates()
            .iter()
            .map(|g| RawGate {
                kind: g.kind.name().to_string(),
                qubits: g.qubits.clone(),
                angle: g.kind.angle(),
                clbit: g.clbit,
                cond: g.condition.map(|c| (c.clbit, c.value as u8)),
            })
            .collect(),
    }
}

/// Canonical serialization; byte-identical for equal circuits.
pub fn to_json(circuit: &Circuit) -> String {
    serde_json::to_string(&to_raw(circuit)).expect("circuit serialization is infallible")
}

pub fn to_value(circuit: &Circuit) -> serde_json::Value {
    serde_json::to_value(to_raw(circuit)).expect("circuit serialization is infallible")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::generate;

    #[test]
    fn minimal_input() {
        let c = parse_json(r#"{"qubits":2,"clbits":0,"gates":[{"kind":"cnot","qubits":[0,1]}]}"#)
            .unwrap();
        assert_eq!(c.num_qubits(), 2);
        assert_eq!(c.gates().len(), 1);
        assert_eq!(c.gates()[0].kind, GateKind::Cnot);
    }

    #[test]
    fn index_out_of_range() {
        let err = parse_json(r#"{"qubits":1,"gates":[{"kind":"cnot","qubits":[0,1]}]}"#).unwrap_err();
        match err {
            SchemaError::Invalid { path, message } => {
                assert_eq!(path, "gates[0].qubits[1]");
                assert!(message.contains("1 >= 1"), "{message}");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unknown_kind_and_missing_field() {
        let err = parse_json(r#"{"qubits":3,"gates":[{"kind":"ccx","qubits":[0,1,2]}]}"#).unwrap_err();
        assert!(matches!(err, SchemaError::Invalid { ref path, .. } if path == "gates[0].kind"));
        let err = parse_json("{\n\"gates\": []\n}").unwrap_err();
        assert!(matches!(err, SchemaError::Syntax { line: 3, .. }), "{err:?}");
    }

    #[test]
    fn measurement_and_condition() {
        let text = r#"{"qubits":1,"clbits":1,"gates":[
            {"kind":"h","qubits":[0]},
            {"kind":"measure","qubits":[0],"clbit":0},
            {"kind":"x","qubits":[0],"cond":[0,1]}]}"#;
        let c = parse_json(text).unwrap();
        assert_eq!(c.gates()[1].clbit, Some(0));
        assert_eq!(c.gates()[2].condition, Some(Condition { clbit: 0, value: true }));
        assert_eq!(parse_json(&to_json(&c)).unwrap(), c);
    }

    #[test]
    fn ghz_round_trip() {
        let ghz = generate::ghz(4).unwrap();
        let text = to_json(&ghz);
        assert_eq!(parse_json(&text).unwrap(), ghz);
    }
}
