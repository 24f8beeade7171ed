//! Cutting graph construction.
//!
//! Every two-qubit gate contributes two vertices (one per qubit) joined by a
//! gate edge. Consecutive two-qubit gates on the same qubit are joined by a
//! wire edge oriented from the earlier to the later gate. Single-qubit gates,
//! measurements and resets are ignored; classically conditioned two-qubit
//! gates are treated like unconditioned ones.

use std::fmt::Write;

use thiserror::Error;

use crate::circuit::{Circuit, GateKind};

pub type VertexId = usize;
pub type EdgeId = usize;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraphError {
    #[error("gate {index} acts on {arity} qubits; only 1- and 2-qubit gates are supported")]
    UnsupportedGate { index: usize, arity: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CutVertex {
    pub id: VertexId,
    pub gate_index: usize,
    pub qubit: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EdgeKind {
    Gate,
    Wire,
}

impl EdgeKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EdgeKind::Gate => "gate",
            EdgeKind::Wire => "wire",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CutEdge {
    pub id: EdgeId,
    /// For wire edges: `(earlier, later)`.
    pub endpoints: (VertexId, VertexId),
    pub kind: EdgeKind,
    /// The underlying gate, for gate edges.
    pub gate: Option<GateKind>,
}

#[derive(Debug, Clone)]
pub struct CuttingGraph {
    num_qubits: usize,
    vertices: Vec<CutVertex>,
    /// Gate edges occupy ids `0..num_gate_edges`, wire edges follow.
    edges: Vec<CutEdge>,
    num_gate_edges: usize,
    first_vertices: Vec<VertexId>,
    per_qubit: Vec<Vec<VertexId>>,
    incoming_wire: Vec<Option<EdgeId>>,
    outgoing_wire: Vec<Option<EdgeId>>,
    gate_edge_of_vertex: Vec<EdgeId>,
}

impl CuttingGraph {
    pub fn build(circuit: &Circuit) -> Result<Self, GraphError> {
        let mut vertices = Vec::new();
        let mut gate_edges = Vec::new();
        let mut per_qubit: Vec<Vec<VertexId>> = vec![Vec::new(); circuit.num_qubits()];
        let mut gate_edge_of_vertex = Vec::new();
        for (index, gate) in circuit.gates().iter().enumerate() {
            match gate.qubits.len() {
                1 => continue,
                2 => {}
                arity => return Err(GraphError::UnsupportedGate { index, arity }),
            }
            let base = vertices.len();
            for (k, &q) in gate.qubits.iter().enumerate() {
                vertices.push(CutVertex {
                    id: base + k,
                    gate_index: index,
                    qubit: q,
                });
                per_qubit[q].push(base + k);
                gate_edge_of_vertex.push(gate_edges.len());
            }
            gate_edges.push(CutEdge {
                id: gate_edges.len(),
                endpoints: (base, base + 1),
                kind: EdgeKind::Gate,
                gate: Some(gate.kind),
            });
        }
        let num_gate_edges = gate_edges.len();
        let mut edges = gate_edges;
        let mut incoming_wire = vec![None; vertices.len()];
        let mut outgoing_wire = vec![None; vertices.len()];
        // Wire edges ordered by head vertex id.
        let mut wires: Vec<(VertexId, VertexId)> = per_qubit
            .iter()
            .flat_map(|vs| vs.windows(2).map(|w| (w[0], w[1])))
            .collect();
        wires.sort_by_key(|&(_, head)| head);
        for (tail, head) in wires {
            let id = edges.len();
            edges.push(CutEdge {
                id,
                endpoints: (tail, head),
                kind: EdgeKind::Wire,
                gate: None,
            });
            outgoing_wire[tail] = Some(id);
            incoming_wire[head] = Some(id);
        }
        let first_vertices = (0..vertices.len())
            .filter(|&v| incoming_wire[v].is_none())
            .collect();
        Ok(CuttingGraph {
            num_qubits: circuit.num_qubits(),
            vertices,
            edges,
            num_gate_edges,
            first_vertices,
            per_qubit,
            incoming_wire,
            outgoing_wire,
            gate_edge_of_vertex,
        })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn vertices(&self) -> &[CutVertex] {
        &self.vertices
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn edges(&self) -> &[CutEdge] {
        &self.edges
    }

    pub fn edge(&self, id: EdgeId) -> &CutEdge {
        &self.edges[id]
    }

    pub fn gate_edges(&self) -> &[CutEdge] {
        &self.edges[..self.num_gate_edges]
    }

    pub fn wire_edges(&self) -> &[CutEdge] {
        &self.edges[self.num_gate_edges..]
    }

    /// Vertices without an incoming wire edge: the first vertex on each active qubit.
    pub fn first_vertices(&self) -> &[VertexId] {
        &self.first_vertices
    }

    pub fn is_first(&self, v: VertexId) -> bool {
        self.incoming_wire[v].is_none()
    }

    pub fn qubit_of(&self, v: VertexId) -> usize {
        self.vertices[v].qubit
    }

    pub fn gate_of(&self, v: VertexId) -> usize {
        self.vertices[v].gate_index
    }

    /// Vertices on qubit `q` in time order.
    pub fn qubit_vertices(&self, q: usize) -> &[VertexId] {
        &self.per_qubit[q]
    }

    pub fn incoming_wire(&self, v: VertexId) -> Option<EdgeId> {
        self.incoming_wire[v]
    }

    pub fn outgoing_wire(&self, v: VertexId) -> Option<EdgeId> {
        self.outgoing_wire[v]
    }

    pub fn gate_edge_of(&self, v: VertexId) -> EdgeId {
        self.gate_edge_of_vertex[v]
    }

    /// Vertex for `(gate_index, qubit)`, if that gate is a two-qubit gate on `qubit`.
    pub fn vertex_at(&self, gate_index: usize, qubit: usize) -> Option<VertexId> {
        self.per_qubit
            .get(qubit)?
            .iter()
            .copied()
            .find(|&v| self.vertices[v].gate_index == gate_index)
    }

    /// Qubits that carry no two-qubit gate and therefore have no vertices.
    pub fn idle_qubits(&self) -> Vec<usize> {
        (0..self.num_qubits)
            .filter(|&q| self.per_qubit[q].is_empty())
            .collect()
    }

    /// Deterministic Graphviz rendering. Gate edges are green and undirected,
    /// wire edges blue and directed in time.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph cutting_graph {\n  rankdir=LR;\n  node [shape=circle];\n");
        for v in &self.vertices {
            let _ = writeln!(
                out,
                "  v{} [label=\"g{}:q{}\"];",
                v.id, v.gate_index, v.qubit
            );
        }
        for e in &self.edges {
            let (u, v) = e.endpoints;
            let attrs = match e.kind {
                EdgeKind::Gate => format!(
                    "color=green, dir=none, label=\"G{}:{}\"",
                    e.id,
                    e.gate.map_or("", |k| k.name())
                ),
                EdgeKind::Wire => format!("color=blue, label=\"W{}\"", e.id),
            };
            let _ = writeln!(out, "  v{u} -> v{v} [{attrs}];");
        }
        out.push_str("}\n");
        out
    }
}

pub fn build_cutting_graph(circuit: &Circuit) -> Result<CuttingGraph, GraphError> {
    CuttingGraph::build(circuit)
}

pub fn export_dot(graph: &CuttingGraph) -> String {
    graph.to_dot()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{generate, Gate};

    #[test]
    fn ghz4_counts() {
        let g = build_cutting_graph(&generate::ghz(4).unwrap()).unwrap();
        assert_eq!(g.num_vertices(), 6);
        assert_eq!(g.gate_edges().len(), 3);
        assert_eq!(g.wire_edges().len(), 2);
        assert_eq!(g.first_vertices().len(), 4);
        // Wire on qubit 2 runs from gate 2 to gate 3.
        let w = g.wire_edges()[1];
        assert_eq!((g.qubit_of(w.endpoints.0), g.gate_of(w.endpoints.0)), (2, 2));
        assert_eq!((g.qubit_of(w.endpoints.1), g.gate_of(w.endpoints.1)), (2, 3));
    }

    #[test]
    fn single_cnot() {
        let c = Circuit::from_gates(2, 0, vec![Gate::two(GateKind::Cnot, 0, 1)]).unwrap();
        let g = build_cutting_graph(&c).unwrap();
        assert_eq!(g.num_vertices(), 2);
        assert_eq!(g.gate_edges().len(), 1);
        assert!(g.wire_edges().is_empty());
        assert_eq!(g.first_vertices(), &[0, 1]);
        let dot = export_dot(&g);
        assert_eq!(dot.matches("[label=\"g").count(), 2);
        assert_eq!(dot.matches(" -> ").count(), 1);
    }

    #[test]
    fn example_shape_from_pipeline_figure() {
        let gates = vec![
            Gate::two(GateKind::Cnot, 0, 1),
            Gate::two(GateKind::Cnot, 1, 2),
            Gate::two(GateKind::Cnot, 2, 3),
            Gate::two(GateKind::Cnot, 0, 1),
        ];
        let g = build_cutting_graph(&Circuit::from_gates(4, 0, gates).unwrap()).unwrap();
        assert_eq!(g.gate_edges().len(), 4);
        // |W| = 2|G| - active qubits = 8 - 4.
        assert_eq!(g.wire_edges().len(), 4);
    }

    #[test]
    fn idle_qubits_and_single_qubit_gates_ignored() {
        let gates = vec![
            Gate::single(GateKind::H, 2),
            Gate::two(GateKind::Cz, 0, 1),
            Gate::single(GateKind::X, 1),
            Gate::two(GateKind::Cz, 1, 0),
        ];
        let g = build_cutting_graph(&Circuit::from_gates(3, 0, gates).unwrap()).unwrap();
        assert_eq!(g.idle_qubits(), vec![2]);
        assert_eq!(g.wire_edges().len(), 2);
        assert_eq!(g.vertex_at(3, 0), Some(3));
        assert_eq!(g.vertex_at(2, 1), None);
    }

    #[test]
    fn ghz_dot_is_deterministic() {
        let g = build_cutting_graph(&generate::ghz(4).unwrap()).unwrap();
        let a = export_dot(&g);
        assert_eq!(a, export_dot(&g));
        assert_eq!(a.matches("[label=\"g").count(), 6);
        assert_eq!(a.matches(" -> ").count(), 5);
        assert_eq!(a.matches("color=blue").count(), 2);
    }
}
