//! Exact branch-and-bound over vertex labelings.
//!
//! Vertices are labeled in id order. Without pins only restricted-growth
//! labelings are visited (vertex 0 in partition 0, a new partition opens only
//! after all lower ones), which is the same symmetry breaking the encoder
//! asserts. The group choice is optimized at each leaf. Ties keep the
//! lexicographically first labeling.

use std::time::Instant;

use super::{SolveError, SolveOutcome};
use crate::cost::log_fp_floor;
use crate::model::{group_cost_table, EdgePrice, ModelError, Objective, PartitionProblem, PartitionSolution};

pub const MAX_EXACT_VERTICES: usize = 40;

const UNSET: usize = usize::MAX;

pub fn solve_exact(problem: &PartitionProblem, deadline: Option<Instant>) -> Result<SolveOutcome, SolveError> {
    problem.validate()?;
    let nv = problem.graph.num_vertices();
    if nv > MAX_EXACT_VERTICES {
        return Err(SolveError::TooLarge {
            vertices: nv,
            limit: MAX_EXACT_VERTICES,
        });
    }
    let prices = problem.edge_prices()?;
    match problem.check_trivial_feasibility(&prices) {
        Err(ModelError::InfeasibleTrivially(_)) => return Ok(SolveOutcome::Infeasible),
        Err(e) => return Err(e.into()),
        Ok(()) => {}
    }
    let start = Instant::now();
    let mut s = Search::new(problem, &prices, deadline);
    s.descend(0);
    let elapsed_ms = start.elapsed().as_millis() as u64;
    let Some(best) = s.best.take() else {
        return Ok(if s.timed_out {
            SolveOutcome::Timeout
        } else {
            SolveOutcome::Infeasible
        });
    };
    let mut sol = PartitionSolution::from_assignment(problem, &prices, best.assignment, &best.grouped)?;
    sol.optimal = !s.timed_out;
    sol.stats.backend = "internal-exact".into();
    sol.stats.iterations = s.nodes as usize;
    sol.stats.elapsed_ms = elapsed_ms;
    Ok(if s.timed_out {
        SolveOutcome::BestSoFar(sol)
    } else {
        SolveOutcome::Optimal(sol)
    })
}

/// Partition pair and its groupable cut edges as (price, edge).
type PairCuts = ((usize, usize), Vec<(i64, usize)>);

struct Incumbent {
    objective: i64,
    assignment: Vec<usize>,
    grouped: Vec<bool>,
}

/// Edge to an already-labeled vertex, seen from the later endpoint.
#[derive(Clone, Copy)]
struct BackEdge {
    edge: usize,
    other: usize,
    /// The later endpoint is the head of a wire edge.
    wire_head: bool,
}

struct Search<'a> {
    problem: &'a PartitionProblem,
    prices: &'a [Option<EdgePrice>],
    np: usize,
    cap: usize,
    total_cap: usize,
    cost_limit: i64,
    group_table: Vec<i64>,
    /// Lower bound on the marginal cost of one grouped cut.
    group_step_lb: i64,
    back: Vec<Vec<BackEdge>>,
    first: Vec<bool>,
    pin: Vec<Option<usize>>,
    symmetric: bool,
    nonempty: bool,

    label: Vec<usize>,
    q: Vec<usize>,
    q_sum: usize,
    members: Vec<usize>,
    cost_lb: i64,
    cuts: usize,

    best: Option<Incumbent>,
    nodes: u64,
    deadline: Option<Instant>,
    timed_out: bool,
}

impl<'a> Search<'a> {
    fn new(problem: &'a PartitionProblem, prices: &'a [Option<EdgePrice>], deadline: Option<Instant>) -> Self {
        let g = &problem.graph;
        let nv = g.num_vertices();
        let mut back = vec![Vec::new(); nv];
        for e in g.edges() {
            let (u, v) = e.endpoints;
            let (lo, hi) = (u.min(v), u.max(v));
            back[hi].push(BackEdge {
                edge: e.id,
                other: lo,
                wire_head: e.kind == crate::graph::EdgeKind::Wire && hi == v,
            });
        }
        let mut pin = vec![None; nv];
        for p in &problem.pins {
            let vs = g.qubit_vertices(p.qubit);
            pin[vs[0]] = Some(p.partition);
            pin[vs[vs.len() - 1]] = Some(p.partition);
        }
        let np = problem.num_partitions;
        let groupable = prices.iter().filter(|p| p.is_some_and(|x| x.groupable)).count();
        Search {
            problem,
            prices,
            np,
            cap: problem.max_qubits,
            total_cap: (np * problem.max_qubits).saturating_sub(g.idle_qubits().len()),
            cost_limit: problem.cost_limit_fp().unwrap_or(i64::MAX),
            group_table: group_cost_table(groupable),
            group_step_lb: log_fp_floor(4.0),
            back,
            first: (0..nv).map(|v| g.is_first(v)).collect(),
            pin,
            symmetric: problem.pins.is_empty(),
            nonempty: problem.requires_nonempty(),
            label: vec![UNSET; nv],
            q: vec![0; np],
            q_sum: 0,
            members: vec![0; np],
            cost_lb: 0,
            cuts: 0,
            best: None,
            nodes: 0,
            deadline,
            timed_out: false,
        }
    }

    fn best_objective(&self) -> i64 {
        self.best.as_ref().map_or(i64::MAX, |b| b.objective)
    }

    fn bound(&self) -> i64 {
        match self.problem.objective {
            Objective::MinSamples => self.cost_lb,
            Objective::MinMaxQubits => self.q.iter().copied().max().unwrap_or(0) as i64,
        }
    }

    fn descend(&mut self, v: usize) {
        if self.timed_out {
            return;
        }
        self.nodes += 1;
        if self.nodes.is_multiple_of(4096) && self.deadline.is_some_and(|d| Instant::now() >= d) {
            self.timed_out = true;
            return;
        }
        let nv = self.label.len();
        if v == nv {
            self.leaf();
            return;
        }
        let labels: Vec<usize> = match self.pin[v] {
            Some(p) => vec![p],
            None if self.symmetric => {
                let open = self.members.iter().take_while(|&&m| m > 0).count();
                (0..(open + 1).min(self.np)).collect()
            }
            None => (0..self.np).collect(),
        };
        for p in labels {
            if self.assign(v, p) {
                self.descend(v + 1);
            }
            self.unassign(v, p);
            if self.timed_out {
                return;
            }
        }
    }

    /// Labels `v` and reports whether the partial state can still beat the incumbent.
    fn assign(&mut self, v: usize, p: usize) -> bool {
        self.label[v] = p;
        self.members[p] += 1;
        let mut ok = true;
        if self.first[v] {
            self.q[p] += 1;
            self.q_sum += 1;
        }
        for i in 0..self.back[v].len() {
            let be = self.back[v][i];
            if self.label[be.other] == p {
                continue;
            }
            self.cuts += 1;
            match self.prices[be.edge] {
                None => ok = false,
                Some(price) => {
                    self.cost_lb += if price.groupable {
                        price.weight_fp.min(self.group_step_lb)
                    } else {
                        price.weight_fp
                    };
                    if be.wire_head {
                        self.q[p] += 1;
                        self.q_sum += 1;
                    }
                }
            }
        }
        if !ok || self.q[p] > self.cap || self.q_sum > self.total_cap || self.cost_lb > self.cost_limit {
            return false;
        }
        if self.problem.max_cuts.is_some_and(|m| self.cuts > m) {
            return false;
        }
        if self.nonempty {
            let empty = self.members.iter().filter(|&&m| m == 0).count();
            if empty > self.label.len() - v - 1 {
                return false;
            }
        }
        self.bound() < self.best_objective()
    }

    fn unassign(&mut self, v: usize, p: usize) {
        if self.first[v] {
            self.q[p] -= 1;
            self.q_sum -= 1;
        }
        for i in 0..self.back[v].len() {
            let be = self.back[v][i];
            if self.label[be.other] == p {
                continue;
            }
            self.cuts -= 1;
            if let Some(price) = self.prices[be.edge] {
                self.cost_lb -= if price.groupable {
                    price.weight_fp.min(self.group_step_lb)
                } else {
                    price.weight_fp
                };
                if be.wire_head {
                    self.q[p] -= 1;
                    self.q_sum -= 1;
                }
            }
        }
        self.members[p] -= 1;
        self.label[v] = UNSET;
    }

    fn leaf(&mut self) {
        let g = &self.problem.graph;
        let mut base_cost = 0i64;
        // Groupable cut edges per unordered partition pair, heaviest first.
        let mut pairs: Vec<PairCuts> = Vec::new();
        for e in g.edges() {
            let (pu, pv) = (self.label[e.endpoints.0], self.label[e.endpoints.1]);
            if pu == pv {
                continue;
            }
            let price = self.prices[e.id].expect("uncuttable cuts are pruned");
            base_cost += price.weight_fp;
            if price.groupable {
                let key = (pu.min(pv), pu.max(pv));
                match pairs.iter_mut().find(|(k, _)| *k == key) {
                    Some((_, list)) => list.push((price.weight_fp, e.id)),
                    None => pairs.push((key, vec![(price.weight_fp, e.id)])),
                }
            }
        }
        pairs.sort_by_key(|(k, _)| *k);
        for (_, list) in &mut pairs {
            list.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
        }

        let mut choice = GroupChoice {
            counts: vec![0; pairs.len()],
            best: None,
        };
        let mut q = self.q.clone();
        self.choose_groups(&pairs, 0, &mut q, base_cost, 0, &mut choice);
        let Some((key, counts)) = choice.best else {
            return;
        };
        let objective = key.0;
        if objective >= self.best_objective() {
            return;
        }
        let mut grouped = vec![false; g.edges().len()];
        for ((_, list), &k) in pairs.iter().zip(&counts) {
            for &(_, e) in &list[..k] {
                grouped[e] = true;
            }
        }
        self.best = Some(Incumbent {
            objective,
            assignment: self.label.clone(),
            grouped,
        });
    }

    /// Enumerates how many cuts of each partition pair join the group.
    fn choose_groups(
        &self,
        pairs: &[PairCuts],
        i: usize,
        q: &mut Vec<usize>,
        cost: i64,
        k: usize,
        choice: &mut GroupChoice,
    ) {
        if i == pairs.len() {
            let total = cost + if k > 0 { self.group_table[k] } else { 0 };
            if total > self.cost_limit {
                return;
            }
            let qmax = q.iter().copied().max().unwrap_or(0) as i64;
            let key = match self.problem.objective {
                Objective::MinSamples => (total, 0, k),
                Objective::MinMaxQubits => (qmax, total, k),
            };
            if choice.best.as_ref().is_none_or(|(b, _)| key < *b) {
                choice.best = Some((key, choice.counts.clone()));
            }
            return;
        }
        let ((a, b), list) = &pairs[i];
        let spare_total = self.total_cap - self.q_sum_of(q);
        let limit = list
            .len()
            .min(self.cap - q[*a])
            .min(self.cap - q[*b])
            .min(spare_total / 2);
        let mut saved = 0i64;
        for j in 0..=limit {
            if j > 0 {
                saved += list[j - 1].0;
            }
            q[*a] += j;
            q[*b] += j;
            choice.counts[i] = j;
            self.choose_groups(pairs, i + 1, q, cost - saved, k + j, choice);
            q[*a] -= j;
            q[*b] -= j;
        }
        choice.counts[i] = 0;
    }

    fn q_sum_of(&self, q: &[usize]) -> usize {
        q.iter().sum()
    }
}

struct GroupChoice {
    counts: Vec<usize>,
    best: Option<((i64, i64, usize), Vec<usize>)>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{generate, Circuit, Gate, GateKind};
    use crate::cost::Resources;
    use crate::graph::build_cutting_graph;
    use crate::model::{encode, AllowedCuts};

    fn optimal(p: &PartitionProblem) -> PartitionSolution {
        match solve_exact(p, None).unwrap() {
            SolveOutcome::Optimal(s) => s,
            other => panic!("expected optimum, got {other:?}"),
        }
    }

    fn ghz4(qmax: usize) -> PartitionProblem {
        PartitionProblem::new(build_cutting_graph(&generate::ghz(4).unwrap()).unwrap(), 2, qmax)
    }

    #[test]
    fn ghz4_halving() {
        let s = optimal(&ghz4(2));
        assert_eq!(s.cut_edges, vec![1]);
        assert_eq!(s.overhead, 9.0);
        assert!(s.grouped_edges.is_empty());
        let sys = encode(&ghz4(2)).unwrap();
        let grouped: Vec<bool> = (0..5).map(|e| s.is_grouped(e)).collect();
        assert!(sys.violated(&sys.valuation(&s.assignment, &grouped)).is_empty());
    }

    #[test]
    fn ghz4_wire_only() {
        let p = ghz4(2).with_allowed(AllowedCuts::WIRE_ONLY).with_resources(Resources::NONE);
        assert_eq!(solve_exact(&p, None).unwrap(), SolveOutcome::Infeasible);
        let p = ghz4(3).with_allowed(AllowedCuts::WIRE_ONLY).with_resources(Resources::NONE);
        let s = optimal(&p);
        assert_eq!(s.overhead, 16.0);
        assert_eq!(s.num_cuts(), 1);
    }

    #[test]
    fn single_cnot_capacity() {
        let c = Circuit::from_gates(2, 0, vec![Gate::two(GateKind::Cnot, 0, 1)]).unwrap();
        let g = build_cutting_graph(&c).unwrap();
        let s = optimal(&PartitionProblem::new(g.clone(), 2, 1));
        assert_eq!(s.overhead, 9.0);
        // Grouping would need an ancilla on each side.
        let p = PartitionProblem::new(g, 2, 1).with_max_overhead(Some(8.0));
        assert_eq!(solve_exact(&p, None).unwrap(), SolveOutcome::Infeasible);
    }

    #[test]
    fn grouping_used_when_capacity_allows() {
        // Two CNOTs between the same pair force two gate cuts; grouped they cost 49 < 81.
        let gates = vec![
            Gate::two(GateKind::Cnot, 0, 1),
            Gate::two(GateKind::Cnot, 0, 2),
            Gate::two(GateKind::Cnot, 1, 3),
            Gate::two(GateKind::Cnot, 2, 3),
        ];
        let g = build_cutting_graph(&Circuit::from_gates(4, 0, gates).unwrap()).unwrap();
        let s = optimal(&PartitionProblem::new(g.clone(), 2, 4));
        assert_eq!(s.overhead, 49.0);
        assert_eq!(s.grouped_edges.len(), 2);
        assert_eq!(s.qubit_counts, vec![4, 4]);
        let s = optimal(&PartitionProblem::new(g, 2, 3));
        assert_eq!(s.overhead, 81.0);
    }

    #[test]
    fn min_max_qubits() {
        let s = optimal(&ghz4(4).with_objective(Objective::MinMaxQubits));
        assert_eq!(s.objective_value, 2);
    }

    #[test]
    fn too_large() {
        let g = build_cutting_graph(&generate::ghz(30).unwrap()).unwrap();
        let p = PartitionProblem::new(g, 2, 30);
        assert!(matches!(solve_exact(&p, None), Err(SolveError::TooLarge { .. })));
    }
}
