use std::collections::HashMap;

use super::expr::{eval, Expr, Model, Sort, Sym, Value};
use super::{group_cost_table, EdgePrice, ModelError, Objective, PartitionProblem};

/// Symbol table in declaration order.
#[derive(Debug, Clone, Default)]
pub struct Symbols {
    names: Vec<String>,
    sorts: Vec<Sort>,
    index: HashMap<String, Sym>,
}

impl Symbols {
    fn add(&mut self, name: String, sort: Sort) -> Sym {
        let s = self.names.len();
        self.index.insert(name.clone(), s);
        self.names.push(name);
        self.sorts.push(sort);
        s
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn name(&self, s: Sym) -> &str {
        &self.names[s]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn sort(&self, s: Sym) -> Sort {
        self.sorts[s]
    }

    pub fn lookup(&self, name: &str) -> Option<Sym> {
        self.index.get(name).copied()
    }
}

/// Encoded partitioning problem.
#[derive(Debug, Clone)]
pub struct ConstraintSystem {
    pub problem: PartitionProblem,
    pub prices: Vec<Option<EdgePrice>>,
    /// Fixed-point Bell-group cost indexed by group size.
    pub group_table: Vec<i64>,
    pub cost_limit_fp: Option<i64>,
    pub symbols: Symbols,
    /// `o[v][p]`
    pub o: Vec<Vec<Sym>>,
    pub c: Vec<Sym>,
    pub b: Vec<Sym>,
    pub q: Vec<Sym>,
    pub kb: Sym,
    pub cost: Sym,
    pub qmax: Option<Sym>,
    /// Labeled assertions in emission order.
    pub assertions: Vec<(String, Expr)>,
}

pub fn encode(problem: &PartitionProblem) -> Result<ConstraintSystem, ModelError> {
    problem.validate()?;
    let prices = problem.edge_prices()?;
    problem.check_trivial_feasibility(&prices)?;

    let g = &problem.graph;
    let np = problem.num_partitions;
    let nv = g.num_vertices();
    let mut symbols = Symbols::default();
    let o: Vec<Vec<Sym>> = (0..nv)
        .map(|v| (0..np).map(|p| symbols.add(format!("o_{v}_{p}"), Sort::Bool)).collect())
        .collect();
    let c: Vec<Sym> = g.edges().iter().map(|e| symbols.add(format!("c_{}", e.id), Sort::Bool)).collect();
    let b: Vec<Sym> = g.edges().iter().map(|e| symbols.add(format!("b_{}", e.id), Sort::Bool)).collect();
    let q: Vec<Sym> = (0..np).map(|p| symbols.add(format!("q_{p}"), Sort::Int)).collect();
    let kb = symbols.add("kb".into(), Sort::Int);
    let cost = symbols.add("cost".into(), Sort::Int);
    let qmax = (problem.objective == Objective::MinMaxQubits).then(|| symbols.add("qmax".into(), Sort::Int));

    let var = Expr::var;
    let mut asserts: Vec<(String, Expr)> = Vec::new();

    for (v, ov) in o.iter().enumerate() {
        asserts.push((format!("cover[{v}]"), Expr::or(ov.iter().map(|&s| var(s)).collect())));
        for p in 0..np {
            for r in p + 1..np {
                asserts.push((
                    format!("exclusive[{v},{p},{r}]"),
                    !Expr::and(vec![var(ov[p]), var(ov[r])]),
                ));
            }
        }
    }

    for e in g.edges() {
        let (u, v) = e.endpoints;
        let differs = Expr::or((0..np).map(|p| Expr::xor(var(o[u][p]), var(o[v][p]))).collect());
        asserts.push((format!("cut_def[{}]", e.id), Expr::eq(var(c[e.id]), differs)));
        match prices[e.id] {
            None => asserts.push((format!("uncuttable[{}]", e.id), !var(c[e.id]))),
            Some(price) if price.groupable => asserts.push((
                format!("b_implies_c[{}]", e.id),
                Expr::implies(var(b[e.id]), var(c[e.id])),
            )),
            Some(_) => {}
        }
        if !prices[e.id].is_some_and(|p| p.groupable) {
            asserts.push((format!("no_group[{}]", e.id), !var(b[e.id])));
        }
    }

    for p in 0..np {
        let mut terms: Vec<Expr> = g.first_vertices().iter().map(|&v| Expr::indicator(var(o[v][p]))).collect();
        for e in g.wire_edges() {
            if prices[e.id].is_some() {
                terms.push(Expr::indicator(Expr::and(vec![var(c[e.id]), var(o[e.endpoints.1][p])])));
            }
        }
        for e in g.edges() {
            if prices[e.id].is_some_and(|x| x.groupable) {
                let (u, v) = e.endpoints;
                terms.push(Expr::indicator(Expr::and(vec![
                    var(b[e.id]),
                    Expr::or(vec![var(o[u][p]), var(o[v][p])]),
                ])));
            }
        }
        asserts.push((format!("q_def[{p}]"), Expr::eq(var(q[p]), Expr::add(terms))));
        asserts.push((format!("q_cap[{p}]"), Expr::le(var(q[p]), Expr::Int(problem.max_qubits as i64))));
        if let Some(m) = qmax {
            asserts.push((format!("q_le_qmax[{p}]"), Expr::le(var(q[p]), var(m))));
        }
    }
    let idle = g.idle_qubits().len() as i64;
    if idle > 0 {
        asserts.push((
            "idle_capacity".into(),
            Expr::le(
                Expr::add(q.iter().map(|&s| var(s)).collect()),
                Expr::Int((np * problem.max_qubits) as i64 - idle),
            ),
        ));
    }

    let groupable: Vec<usize> = g
        .edges()
        .iter()
        .filter(|e| prices[e.id].is_some_and(|p| p.groupable))
        .map(|e| e.id)
        .collect();
    asserts.push((
        "kb_def".into(),
        Expr::eq(
            var(kb),
            Expr::add(groupable.iter().map(|&e| Expr::indicator(var(b[e]))).collect()),
        ),
    ));
    let group_table = group_cost_table(groupable.len());
    let mut group_term = Expr::Int(group_table[groupable.len()]);
    for k in (0..groupable.len()).rev() {
        group_term = Expr::ite(Expr::eq(var(kb), Expr::Int(k as i64)), Expr::Int(group_table[k]), group_term);
    }
    let mut cost_terms = Vec::new();
    for e in g.edges() {
        if let Some(price) = prices[e.id] {
            let individual = if price.groupable {
                Expr::and(vec![var(c[e.id]), !var(b[e.id])])
            } else {
                var(c[e.id])
            };
            cost_terms.push(Expr::ite(individual, Expr::Int(price.weight_fp), Expr::Int(0)));
        }
    }
    if !groupable.is_empty() {
        cost_terms.push(group_term);
    }
    asserts.push(("cost_def".into(), Expr::eq(var(cost), Expr::add(cost_terms))));

    let cost_limit_fp = problem.cost_limit_fp();
    if let Some(limit) = cost_limit_fp {
        asserts.push(("budget".into(), Expr::le(var(cost), Expr::Int(limit))));
    }
    if let Some(m) = problem.max_cuts {
        asserts.push((
            "max_cuts".into(),
            Expr::le(
                Expr::add(g.edges().iter().map(|e| Expr::indicator(var(c[e.id]))).collect()),
                Expr::Int(m as i64),
            ),
        ));
    }
    if let Some(m) = qmax {
        asserts.push(("qmax_cap".into(), Expr::le(var(m), Expr::Int(problem.max_qubits as i64))));
    }

    let used = |p: usize| Expr::or((0..nv).map(|v| var(o[v][p])).collect());
    if problem.requires_nonempty() {
        for p in 0..np {
            asserts.push((format!("nonempty[{p}]"), used(p)));
        }
    }
    if problem.pins.is_empty() {
        asserts.push(("sym_first".into(), var(o[0][0])));
        for p in 0..np - 1 {
            asserts.push((format!("sym_used[{p}]"), Expr::implies(used(p + 1), used(p))));
        }
    } else {
        for pin in &problem.pins {
            let vs = g.qubit_vertices(pin.qubit);
            let mut ends = vec![vs[0]];
            if vs.len() > 1 {
                ends.push(vs[vs.len() - 1]);
            }
            for v in ends {
                asserts.push((format!("pin[{},{v}]", pin.qubit), var(o[v][pin.partition])));
            }
        }
    }

    Ok(ConstraintSystem {
        problem: problem.clone(),
        prices,
        group_table,
        cost_limit_fp,
        symbols,
        o,
        c,
        b,
        q,
        kb,
        cost,
        qmax,
        assertions: asserts,
    })
}

impl ConstraintSystem {
    /// Symbol minimized by the outer loop.
    pub fn objective_symbol(&self) -> Sym {
        self.qmax.unwrap_or(self.cost)
    }

    /// `objective < bound`.
    pub fn objective_below(&self, bound: i64) -> Expr {
        Expr::lt(Expr::var(self.objective_symbol()), Expr::Int(bound))
    }

    /// Solver model indexed by symbol; fails on missing or mis-sorted values.
    pub fn values_from_model(&self, model: &Model) -> Result<Vec<Option<Value>>, ModelError> {
        let mut out = Vec::with_capacity(self.symbols.len());
        for (s, name) in self.symbols.names().iter().enumerate() {
            let v = model
                .get(name)
                .copied()
                .ok_or_else(|| ModelError::InconsistentModel(format!("no value for {name}")))?;
            let ok = matches!(
                (self.symbols.sort(s), v),
                (Sort::Bool, Value::Bool(_)) | (Sort::Int, Value::Int(_))
            );
            if !ok {
                return Err(ModelError::InconsistentModel(format!("{name} has the wrong sort")));
            }
            out.push(Some(v));
        }
        Ok(out)
    }

    /// Labels of assertions that do not hold under `values`.
    pub fn violated(&self, values: &[Option<Value>]) -> Vec<&str> {
        self.assertions
            .iter()
            .filter(|(_, e)| eval(e, values) != Some(Value::Bool(true)))
            .map(|(label, _)| label.as_str())
            .collect()
    }

    /// Full symbol valuation for an assignment and group choice; used to
    /// check that concrete solutions satisfy the encoding.
    pub fn valuation(&self, assignment: &[usize], grouped: &[bool]) -> Vec<Option<Value>> {
        let g = &self.problem.graph;
        let cut = super::cuts_from_assignment(g, assignment);
        let counts = super::qubit_counts(g, assignment, &cut, grouped, self.problem.num_partitions);
        let mut vals = vec![None; self.symbols.len()];
        for (v, row) in self.o.iter().enumerate() {
            for (p, &s) in row.iter().enumerate() {
                vals[s] = Some(Value::Bool(assignment[v] == p));
            }
        }
        for e in 0..cut.len() {
            vals[self.c[e]] = Some(Value::Bool(cut[e]));
            vals[self.b[e]] = Some(Value::Bool(grouped[e]));
        }
        for (p, &s) in self.q.iter().enumerate() {
            vals[s] = Some(Value::Int(counts[p] as i64));
        }
        let k = grouped.iter().filter(|&&x| x).count();
        vals[self.kb] = Some(Value::Int(k as i64));
        let mut cost = if k > 0 { self.group_table.get(k).copied().unwrap_or(i64::MAX / 4) } else { 0 };
        for e in 0..cut.len() {
            if cut[e] && !grouped[e] {
                cost += self.prices[e].map_or(0, |p| p.weight_fp);
            }
        }
        vals[self.cost] = Some(Value::Int(cost));
        if let Some(m) = self.qmax {
            vals[m] = Some(Value::Int(counts.iter().copied().max().unwrap_or(0) as i64));
        }
        vals
    }
}
