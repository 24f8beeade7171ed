//! Benchmark circuit generators. All generators are deterministic in their arguments.

use super::rng::SeededRng;
use super::{Circuit, CircuitError, Gate, GateKind};

fn invalid(msg: impl Into<String>) -> CircuitError {
    CircuitError::InvalidArgument(msg.into())
}

fn build(num_qubits: usize, gates: Vec<Gate>) -> Circuit {
    Circuit::from_gates(num_qubits, 0, gates).expect("generator emits valid gates")
}

/// `H(0)` followed by the CNOT chain `CNOT(i, i+1)`.
pub fn ghz(n: usize) -> Result<Circuit, CircuitError> {
    if n < 2 {
        return Err(invalid(format!("ghz needs at least 2 qubits, got {n}")));
    }
    let mut gates = vec![Gate::single(GateKind::H, 0)];
    gates.extend((0..n - 1).map(|i| Gate::two(GateKind::Cnot, i, i + 1)));
    Ok(build(n, gates))
}

/// How a QAOA ZZ cost term is emitted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CostTerm {
    /// `CNOT(i,j) RZ(γ)_j CNOT(i,j)`.
    #[default]
    CnotRzCnot,
    /// A single `CRZ(γ)` on `(i, j)`.
    Crz,
}

/// Edge set of the random MaxCut instance: a uniformly shuffled random
/// spanning tree plus `round(extra_edge_frac * n)` distinct extra edges
/// (capped by the number of free vertex pairs). Edges are `(low, high)`, sorted.
pub fn qaoa_edges(n: usize, extra_edge_frac: f64, seed: u64) -> Result<Vec<(usize, usize)>, CircuitError> {
    if n < 2 {
        return Err(invalid(format!("qaoa needs at least 2 qubits, got {n}")));
    }
    if !extra_edge_frac.is_finite() || extra_edge_frac < 0.0 {
        return Err(invalid(format!("extra edge fraction must be >= 0, got {extra_edge_frac}")));
    }
    let mut rng = SeededRng::new(seed);
    let mut order: Vec<usize> = (0..n).collect();
    rng.shuffle(&mut order);
    let mut present = vec![vec![false; n]; n];
    let mut edges = Vec::new();
    let mut add = |a: usize, b: usize, edges: &mut Vec<(usize, usize)>| {
        let (lo, hi) = (a.min(b), a.max(b));
        if present[lo][hi] {
            return false;
        }
        present[lo][hi] = true;
        edges.push((lo, hi));
        true
    };
    for i in 1..n {
        let parent = order[rng.below(i)];
        add(order[i], parent, &mut edges);
    }
    let free = n * (n - 1) / 2 - (n - 1);
    let extra = ((extra_edge_frac * n as f64).round() as usize).min(free);
    let mut added = 0;
    while added < extra {
        let a = rng.below(n);
        let b = rng.below(n);
        if a != b && add(a, b, &mut edges) {
            added += 1;
        }
    }
    edges.sort_unstable();
    Ok(edges)
}

pub fn qaoa_maxcut(n: usize, extra_edge_frac: f64, seed: u64, layers: usize) -> Result<Circuit, CircuitError> {
    qaoa_maxcut_with(n, extra_edge_frac, seed, layers, CostTerm::default())
}

/// QAOA for MaxCut: `H` on every qubit, then per layer one cost term per
/// edge followed by an `RX(β)` mixer realized as `H RZ(β) H`.
pub fn qaoa_maxcut_with(
    n: usize,
    extra_edge_frac: f64,
    seed: u64,
    layers: usize,
    cost_term: CostTerm,
) -> Result<Circuit, CircuitError> {
    if layers < 1 {
        return Err(invalid("qaoa needs at least one layer"));
    }
    let edges = qaoa_edges(n, extra_edge_frac, seed)?;
    // Angles come from a stream independent of the edge stream.
    let mut rng = SeededRng::new(seed ^ 0x9e37_79b9_7f4a_7c15);
    let mut gates: Vec<Gate> = (0..n).map(|q| Gate::single(GateKind::H, q)).collect();
    for _ in 0..layers {
        let gamma = rng.angle();
        let beta = rng.angle();
        for &(i, j) in &edges {
            match cost_term {
                CostTerm::CnotRzCnot => {
                    gates.push(Gate::two(GateKind::Cnot, i, j));
                    gates.push(Gate::single(GateKind::Rz(gamma), j));
                    gates.push(Gate::two(GateKind::Cnot, i, j));
                }
                CostTerm::Crz => gates.push(Gate::two(GateKind::Crz(gamma), i, j)),
            }
        }
        for q in 0..n {
            gates.push(Gate::single(GateKind::H, q));
            gates.push(Gate::single(GateKind::Rz(beta), q));
            gates.push(Gate::single(GateKind::H, q));
        }
    }
    Ok(build(n, gates))
}

/// Hardware-efficient ansatz: per layer `RZ(θ) H` on each qubit with angles
/// uniform in `[0, 2π)`, then a linear `CNOT(i, i+1)` entangler.
pub fn hea(n: usize, layers: usize, seed: u64) -> Result<Circuit, CircuitError> {
    if n < 2 {
        return Err(invalid(format!("hea needs at least 2 qubits, got {n}")));
    }
    if layers < 1 {
        return Err(invalid("hea needs at least one layer"));
    }
    let mut rng = SeededRng::new(seed);
    let mut gates = Vec::new();
    for _ in 0..layers {
        for q in 0..n {
            gates.push(Gate::single(GateKind::Rz(rng.angle()), q));
            gates.push(Gate::single(GateKind::H, q));
        }
        gates.extend((0..n - 1).map(|i| Gate::two(GateKind::Cnot, i, i + 1)));
    }
    Ok(build(n, gates))
}

/// Two dense blocks joined by a bridging section.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BridgeSpec {
    /// Qubits `0..top` form the top block.
    pub top: usize,
    /// Qubits `top..top+bottom` form the bottom block.
    pub bottom: usize,
    /// Consecutive CNOTs on the boundary pair, with no block gates in between.
    pub left_cnots: usize,
    /// Boundary CNOTs each followed by a dense round of both blocks.
    pub ladder_cnots: usize,
}

impl BridgeSpec {
    pub fn new(top: usize, bottom: usize, left_cnots: usize, ladder_cnots: usize) -> Self {
        BridgeSpec {
            top,
            bottom,
            left_cnots,
            ladder_cnots,
        }
    }

    pub fn width(&self) -> usize {
        self.top + self.bottom
    }
}

/// Layout, in time order:
///
/// 1. `H` on every qubit, then a dense round;
/// 2. `left_cnots` CNOTs on the boundary pair `(top-1, top)`;
/// 3. a dense round;
/// 4. `ladder_cnots` times: one boundary CNOT (alternating direction), then a dense round.
///
/// A dense round is the nearest-neighbour CNOT chain inside each block.
/// Only steps 2 and 4 cross the block boundary.
pub fn bridge(spec: BridgeSpec) -> Result<Circuit, CircuitError> {
    if spec.top < 2 || spec.bottom < 2 {
        return Err(invalid(format!(
            "bridge blocks need at least 2 qubits each, got {} and {}",
            spec.top, spec.bottom
        )));
    }
    let (l, n) = (spec.top, spec.width());
    let dense = |gates: &mut Vec<Gate>| {
        gates.extend((0..l - 1).map(|i| Gate::two(GateKind::Cnot, i, i + 1)));
        gates.extend((l..n - 1).map(|i| Gate::two(GateKind::Cnot, i, i + 1)));
    };
    let mut gates: Vec<Gate> = (0..n).map(|q| Gate::single(GateKind::H, q)).collect();
    dense(&mut gates);
    gates.extend((0..spec.left_cnots).map(|_| Gate::two(GateKind::Cnot, l - 1, l)));
    dense(&mut gates);
    for j in 0..spec.ladder_cnots {
        let (c, t) = if j % 2 == 0 { (l - 1, l) } else { (l, l - 1) };
        gates.push(Gate::two(GateKind::Cnot, c, t));
        dense(&mut gates);
    }
    Ok(build(n, gates))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::json::to_json;

    fn cnots(c: &Circuit) -> usize {
        c.gates().iter().filter(|g| g.kind == GateKind::Cnot).count()
    }

    #[test]
    fn ghz_shapes() {
        let c = ghz(4).unwrap();
        assert_eq!(c.num_qubits(), 4);
        assert_eq!(c.gates()[0], Gate::single(GateKind::H, 0));
        assert_eq!(cnots(&c), 3);
        assert_eq!(ghz(2).unwrap().gates().len(), 2);
        assert!(ghz(1).is_err());
    }

    #[test]
    fn qaoa_tree_only() {
        let c = qaoa_maxcut_with(4, 0.0, 7, 1, CostTerm::Crz).unwrap();
        assert_eq!(c.two_qubit_count(), 3);
        let c = qaoa_maxcut(4, 0.0, 7, 1).unwrap();
        assert_eq!(cnots(&c), 6);
    }

    #[test]
    fn qaoa_extra_edges() {
        let edges = qaoa_edges(10, 0.5, 1).unwrap();
        assert_eq!(edges.len(), 14);
        let c = qaoa_maxcut(10, 0.5, 1, 1).unwrap();
        assert_eq!(cnots(&c), 28);
        let c = qaoa_maxcut(10, 0.5, 1, 2).unwrap();
        assert_eq!(cnots(&c), 56);
    }

    #[test]
    fn qaoa_tree_is_connected() {
        for seed in 0..20 {
            let edges = qaoa_edges(9, 0.0, seed).unwrap();
            let mut parent: Vec<usize> = (0..9).collect();
            fn find(p: &mut Vec<usize>, x: usize) -> usize {
                if p[x] != x {
                    let r = find(p, p[x]);
                    p[x] = r;
                }
                p[x]
            }
            for (a, b) in edges {
                let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                assert_ne!(ra, rb, "tree edge closes a cycle");
                parent[ra] = rb;
            }
        }
    }

    #[test]
    fn qaoa_rejects_bad_args() {
        assert!(qaoa_maxcut(1, 0.1, 0, 1).is_err());
        assert!(qaoa_maxcut(4, -0.1, 0, 1).is_err());
        assert!(qaoa_maxcut(4, 0.1, 0, 0).is_err());
    }

    #[test]
    fn hea_counts_and_determinism() {
        assert_eq!(cnots(&hea(3, 1, 0).unwrap()), 2);
        assert_eq!(cnots(&hea(5, 3, 0).unwrap()), 12);
        assert_eq!(to_json(&hea(5, 3, 9).unwrap()), to_json(&hea(5, 3, 9).unwrap()));
        assert!(hea(1, 1, 0).is_err());
    }

    #[test]
    fn bridge_crossings() {
        let c = bridge(BridgeSpec::new(2, 2, 1, 1)).unwrap();
        assert_eq!(c.crossing_count(2), 2);
        let c = bridge(BridgeSpec::new(3, 3, 0, 0)).unwrap();
        assert_eq!(c.crossing_count(3), 0);
        assert!(bridge(BridgeSpec::new(1, 2, 0, 0)).is_err());
    }
}
