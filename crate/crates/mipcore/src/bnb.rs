//! Branch-and-bound over binary variables.
//!
//! Each node fixes a subset of binaries and solves the LP relaxation with
//! a warm-started [`LpSolver`]. The search dives depth-first until the
//! first incumbent is found. After that each dive continues into the
//! preferred child while the other child waits in a best-bound queue, and
//! a finished dive resumes from the open node with the lowest bound.
//!
//! Branching uses pseudocosts: the average bound gain per unit of
//! fractionality seen so far when a variable was branched down or up.
//! Before a variable is trusted its gains are measured directly: up to
//! [`STRONG_CANDIDATES`] unmeasured candidates per node are probed by
//! solving both child LPs. Variables never measured borrow the average
//! over all variables. Ties go to the lowest id.
//!
//! Before branching, rounds of Gomory mixed-integer cuts tighten the root
//! relaxation. Cuts that are slack at the last root LP are dropped again.
//!
//! Reduced costs fix binaries whose flip would lift the bound past the
//! incumbent: those of the root LP for the whole tree, and those of each
//! node LP for its children.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::time::{Duration, Instant};

use crate::config::SolveConfig;
use crate::lp::{LpResult, LpSolver, LpStatus};
use crate::model::{MipModel, Sense, VarKind};

/// Cuts taken from one round of the root tableau.
const CUTS_PER_ROUND: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BnbStatus {
    Optimal,
    Infeasible,
    Unbounded,
    NodeLimit,
    TimeLimit,
}

/// Global bounds observed after a node was processed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundSample {
    pub node: usize,
    pub best_bound: f64,
    pub incumbent: f64,
}

#[derive(Debug, Clone)]
pub struct BnbResult {
    pub status: BnbStatus,
    /// Incumbent objective, `+inf` when no integer solution was found.
    pub objective: f64,
    pub x: Option<Vec<f64>>,
    pub best_bound: f64,
    pub nodes: usize,
    pub lp_iterations: usize,
    pub wall_time: Duration,
    /// Root relaxation value.
    pub root_bound: f64,
    pub trace: Vec<BoundSample>,
}

impl BnbResult {
    pub fn has_incumbent(&self) -> bool {
        self.x.is_some()
    }
}

#[derive(Debug, Clone)]
struct Node {
    id: usize,
    depth: usize,
    bound: f64,
    fixes: Vec<(usize, bool)>,
    /// Branching that created the node: variable, direction and the
    /// distance its parent LP value had to travel.
    origin: Option<(usize, bool, f64)>,
}

/// Unmeasured candidates probed per node.
const STRONG_CANDIDATES: usize = 8;

/// Running sums of bound gain per unit change, per direction.
#[derive(Debug, Clone, Default)]
struct Pseudocosts {
    sum: Vec<[f64; 2]>,
    count: Vec<[u32; 2]>,
    total: [f64; 2],
    total_count: [u32; 2],
}

impl Pseudocosts {
    fn new(n: usize) -> Self {
        Self { sum: vec![[0.0; 2]; n], count: vec![[0; 2]; n], ..Default::default() }
    }

    fn record(&mut self, var: usize, up: bool, gain: f64) {
        let d = usize::from(up);
        self.sum[var][d] += gain;
        self.count[var][d] += 1;
        self.total[d] += gain;
        self.total_count[d] += 1;
    }

    fn reliable(&self, var: usize) -> bool {
        self.count[var][0] > 0 && self.count[var][1] > 0
    }

    fn estimate(&self, var: usize, up: bool) -> f64 {
        let d = usize::from(up);
        if self.count[var][d] > 0 {
            self.sum[var][d] / self.count[var][d] as f64
        } else if self.total_count[d] > 0 {
            self.total[d] / self.total_count[d] as f64
        } else {
            1.0
        }
    }
}

struct ByBound(Node);

impl PartialEq for ByBound {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for ByBound {}
impl PartialOrd for ByBound {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for ByBound {
    // BinaryHeap is a max-heap: the smallest bound must compare greatest.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .0
            .bound
            .total_cmp(&self.0.bound)
            .then(self.0.depth.cmp(&other.0.depth))
            .then(other.0.id.cmp(&self.0.id))
    }
}

struct Search<'a> {
    model: &'a MipModel,
    cfg: &'a SolveConfig,
    binaries: Vec<usize>,
    incumbent: Option<(f64, Vec<f64>)>,
    next_id: usize,
    pseudo: Pseudocosts,
    /// Root LP bound and reduced costs, for fixing across the tree.
    root: Option<(f64, Vec<(f64, i8)>)>,
    global: Vec<Option<bool>>,
}

impl Search<'_> {
    fn incumbent_value(&self) -> f64 {
        self.incumbent.as_ref().map_or(f64::INFINITY, |(v, _)| *v)
    }

    fn prunes(&self, bound: f64) -> bool {
        let inc = self.incumbent_value();
        inc.is_finite() && bound >= inc - self.cfg.relative_gap * inc.abs().max(1.0)
    }

    fn apply(&self, worker: &mut LpSolver, node: &Node) {
        worker.reset_bounds();
        for (j, fix) in self.global.iter().enumerate() {
            if let Some(up) = *fix {
                let v = if up { 1.0 } else { 0.0 };
                worker.set_bounds(j, v, v);
            }
        }
        for &(j, up) in &node.fixes {
            let v = if up { 1.0 } else { 0.0 };
            worker.set_bounds(j, v, v);
        }
    }

    /// Solves the node LP. Reduced costs come back for optimal nodes.
    fn evaluate(&self, worker: &mut LpSolver, node: &Node) -> (LpResult, Vec<(f64, i8)>) {
        self.apply(worker, node);
        let mut r = worker.solve();
        if r.status == LpStatus::IterationLimit {
            // Start over from a clean factorization before giving up on the node.
            *worker = LpSolver::new(self.model);
            self.apply(worker, node);
            r = worker.solve();
        }
        let reduced = if r.status == LpStatus::Optimal { worker.reduced_costs() } else { Vec::new() };
        (r, reduced)
    }

    /// Binaries at a bound whose reduced cost alone lifts `bound` to the
    /// incumbent, paired with the bound they must keep.
    fn reduced_cost_fixes(&self, bound: f64, reduced: &[(f64, i8)]) -> Vec<(usize, bool)> {
        if !self.incumbent_value().is_finite() {
            return Vec::new();
        }
        self.binaries
            .iter()
            .filter_map(|&j| match reduced.get(j) {
                Some(&(d, -1)) if d > 0.0 && self.prunes(bound + d) => Some((j, false)),
                Some(&(d, 1)) if d < 0.0 && self.prunes(bound - d) => Some((j, true)),
                _ => None,
            })
            .collect()
    }

    /// Extends the tree-wide fixings after the incumbent improved.
    fn refresh_global(&mut self) {
        let Some((bound, reduced)) = &self.root else { return };
        for (j, up) in self.reduced_cost_fixes(*bound, reduced) {
            self.global[j] = Some(up);
        }
    }

    /// Fractional binary with the largest product of down and up gains,
    /// estimated or probed. Fixed binaries sit exactly on a bound and
    /// never qualify. Leaves `worker` with the node's bounds but another
    /// basis.
    fn branching_var(&mut self, worker: &mut LpSolver, x: &[f64], objective: f64) -> Option<usize> {
        let tol = self.cfg.integrality_tol;
        let score = |pc: &Pseudocosts, j: usize| {
            let frac = x[j] - x[j].floor();
            let down = (frac * pc.estimate(j, false)).max(1e-6);
            let up = ((1.0 - frac) * pc.estimate(j, true)).max(1e-6);
            down * up
        };
        let mut candidates: Vec<(usize, f64)> = self
            .binaries
            .iter()
            .copied()
            .filter(|&j| {
                let frac = x[j] - x[j].floor();
                frac > tol && frac < 1.0 - tol
            })
            .map(|j| (j, score(&self.pseudo, j)))
            .collect();
        if candidates.is_empty() {
            return None;
        }
        candidates.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        let probe: Vec<usize> =
            candidates.iter().map(|c| c.0).filter(|&j| !self.pseudo.reliable(j)).take(STRONG_CANDIDATES).collect();
        for &j in &probe {
            for up in [false, true] {
                let v = if up { 1.0 } else { 0.0 };
                worker.set_bounds(j, v, v);
                let r = worker.solve();
                worker.set_bounds(j, 0.0, 1.0);
                let gain = match r.status {
                    LpStatus::Optimal => (r.objective - objective).max(0.0),
                    LpStatus::Infeasible => {
                        // An infeasible side makes the variable decisive.
                        return Some(j);
                    }
                    _ => continue,
                };
                let dist = if up { 1.0 - x[j] } else { x[j] };
                self.pseudo.record(j, up, gain / dist.max(tol));
            }
        }
        candidates
            .iter()
            .map(|&(j, _)| (j, score(&self.pseudo, j)))
            .fold(None, |best: Option<(usize, f64)>, (j, s)| match best {
                Some((bj, b)) if b > s || (b == s && bj < j) => best,
                _ => Some((j, s)),
            })
            .map(|(j, _)| j)
    }

    fn learn(&mut self, node: &Node, objective: f64) {
        if let Some((var, up, dist)) = node.origin {
            if node.bound.is_finite() && dist > 0.0 {
                self.pseudo.record(var, up, (objective - node.bound).max(0.0) / dist);
            }
        }
    }

    /// Fixes every binary at its rounded value and re-solves for the
    /// continuous part, so the stored incumbent is exactly integral.
    fn polish(&mut self, worker: &mut LpSolver, x: &[f64]) {
        worker.reset_bounds();
        for &j in &self.binaries {
            let v = x[j].round();
            worker.set_bounds(j, v, v);
        }
        let r = worker.solve();
        if r.status != LpStatus::Optimal {
            return;
        }
        let mut sol = r.x;
        for &j in &self.binaries {
            sol[j] = sol[j].round();
        }
        if !self.model.is_feasible(&sol, self.cfg.feasibility_tol, self.cfg.integrality_tol) {
            return;
        }
        let value = self.model.objective_value(&sol);
        if value < self.incumbent_value() {
            self.incumbent = Some((value, sol));
        }
    }

    fn child(&mut self, parent: &Node, bound: f64, var: usize, up: bool, value: f64) -> Node {
        let mut fixes = parent.fixes.clone();
        fixes.push((var, up));
        self.next_id += 1;
        let dist = if up { 1.0 - value } else { value };
        Node { id: self.next_id, depth: parent.depth + 1, bound, fixes, origin: Some((var, up, dist)) }
    }
}

/// Solves `model` to proven optimality (within `cfg.relative_gap`) unless a
/// node or time limit intervenes.
pub fn solve_mip(model: &MipModel, cfg: &SolveConfig) -> BnbResult {
    solve_mip_with_start(model, cfg, None)
}

/// Like [`solve_mip`], seeded with a known solution. A start that is not
/// feasible for `model` is ignored; a feasible one becomes the first
/// incumbent after its continuous part is re-optimized.
pub fn solve_mip_with_start(model: &MipModel, cfg: &SolveConfig, initial: Option<&[f64]>) -> BnbResult {
    let start = Instant::now();
    let strengthened = root_cuts(model, cfg, start);
    let model = strengthened.as_ref().unwrap_or(model);
    let binaries: Vec<usize> = model
        .variables()
        .iter()
        .enumerate()
        .filter(|(_, v)| v.kind == VarKind::Binary)
        .map(|(j, _)| j)
        .collect();
    let pseudo = Pseudocosts::new(model.num_vars());
    let global = vec![None; model.num_vars()];
    let mut search = Search { model, cfg, binaries, incumbent: None, next_id: 0, pseudo, root: None, global };
    let threads = cfg.threads.max(1);
    let mut workers = vec![LpSolver::new(model)];
    if let Some(x) = initial {
        if x.len() == model.num_vars() && model.is_feasible(x, cfg.feasibility_tol, cfg.integrality_tol) {
            search.incumbent = Some((model.objective_value(x), x.to_vec()));
            search.polish(&mut workers[0], x);
        }
    }

    let mut stack: Vec<Node> = vec![Node { id: 0, depth: 0, bound: f64::NEG_INFINITY, fixes: vec![], origin: None }];
    let mut heap: BinaryHeap<ByBound> = BinaryHeap::new();
    let mut nodes = 0usize;
    let mut root_bound = f64::NEG_INFINITY;
    let mut trace = Vec::new();
    let mut limit_status = None;
    let mut unbounded = false;
    let mut plunging = false;

    loop {
        if let Some(limit) = cfg.node_limit {
            if nodes >= limit {
                limit_status = Some(BnbStatus::NodeLimit);
                break;
            }
        }
        if let Some(limit) = cfg.time_limit {
            if start.elapsed() >= limit {
                limit_status = Some(BnbStatus::TimeLimit);
                break;
            }
        }
        if search.incumbent.is_some() && !plunging {
            // First incumbent: the open dive becomes best-bound backlog.
            plunging = true;
            heap.extend(stack.drain(..).map(ByBound));
        }

        // Pick the next batch: one node while diving, up to `threads`
        // nodes in best-bound order afterwards.
        let mut batch = Vec::new();
        if let Some(node) = stack.pop() {
            if !search.prunes(node.bound) {
                batch.push(node);
            }
        } else {
            let cap = cfg.node_limit.map_or(threads, |l| threads.min(l - nodes).max(1));
            while batch.len() < cap {
                match heap.pop() {
                    Some(ByBound(node)) if !search.prunes(node.bound) => batch.push(node),
                    Some(_) => {
                        // Everything behind a pruned best-bound node is pruned too.
                        heap.clear();
                    }
                    None => break,
                }
            }
        }
        if batch.is_empty() {
            if stack.is_empty() && heap.is_empty() {
                break;
            }
            continue;
        }

        let results: Vec<(LpResult, Vec<(f64, i8)>)> = if batch.len() == 1 {
            vec![search.evaluate(&mut workers[0], &batch[0])]
        } else {
            while workers.len() < batch.len() {
                workers.push(workers[0].clone());
            }
            let search_ref = &search;
            std::thread::scope(|scope| {
                let handles: Vec<_> = workers
                    .iter_mut()
                    .zip(&batch)
                    .map(|(w, node)| scope.spawn(move || search_ref.evaluate(w, node)))
                    .collect();
                handles.into_iter().map(|h| h.join().expect("LP worker panicked")).collect()
            })
        };

        let incumbent_before = search.incumbent_value();
        for (mut node, (lp, reduced)) in batch.into_iter().zip(results) {
            nodes += 1;
            match lp.status {
                LpStatus::Infeasible => {}
                LpStatus::Unbounded => {
                    if node.depth == 0 {
                        unbounded = true;
                    }
                }
                LpStatus::Optimal | LpStatus::IterationLimit => {
                    let evaluated = lp.status == LpStatus::Optimal;
                    let bound = if evaluated { lp.objective.max(node.bound) } else { node.bound };
                    if evaluated {
                        search.learn(&node, lp.objective);
                    }
                    if node.depth == 0 {
                        root_bound = bound;
                        if evaluated {
                            search.root = Some((bound, reduced.clone()));
                            search.refresh_global();
                        }
                    }
                    if !search.prunes(bound) {
                        if evaluated {
                            let fixes = search.reduced_cost_fixes(bound, &reduced);
                            let fixed: Vec<bool> = {
                                let mut f = vec![false; search.model.num_vars()];
                                node.fixes.iter().for_each(|&(j, _)| f[j] = true);
                                f
                            };
                            node.fixes.extend(fixes.into_iter().filter(|&(j, _)| !fixed[j]));
                        }
                        let branch = if evaluated {
                            search.apply(&mut workers[0], &node);
                            search.branching_var(&mut workers[0], &lp.x, lp.objective)
                        } else {
                            search.binaries.iter().copied().find(|j| !node.fixes.iter().any(|f| f.0 == *j))
                        };
                        match branch {
                            None if evaluated => search.polish(&mut workers[0], &lp.x),
                            None => {}
                            Some(var) => {
                                let value = if evaluated { lp.x[var] } else { 0.5 };
                                let up_first = !evaluated || value >= 0.5;
                                let near = search.child(&node, bound, var, up_first, value);
                                let far = search.child(&node, bound, var, !up_first, value);
                                if !plunging {
                                    stack.push(far);
                                    stack.push(near);
                                } else if threads == 1 {
                                    heap.push(ByBound(far));
                                    stack.push(near);
                                } else {
                                    heap.push(ByBound(near));
                                    heap.push(ByBound(far));
                                }
                            }
                        }
                    }
                }
            }
            if unbounded {
                break;
            }
        }
        if unbounded {
            break;
        }

        if search.incumbent_value() < incumbent_before {
            search.refresh_global();
        }
        let open_min = stack
            .iter()
            .map(|n| n.bound)
            .chain(heap.peek().map(|n| n.0.bound))
            .fold(f64::INFINITY, f64::min);
        let inc = search.incumbent_value();
        trace.push(BoundSample { node: nodes, best_bound: open_min.min(inc), incumbent: inc });
    }

    let lp_iterations = workers.iter().map(|w| w.total_iterations()).sum();
    let incumbent = search.incumbent.take();
    let objective = incumbent.as_ref().map_or(f64::INFINITY, |(v, _)| *v);
    let open_min = stack
        .iter()
        .map(|n| n.bound)
        .chain(heap.iter().map(|n| n.0.bound))
        .fold(f64::INFINITY, f64::min);
    let (status, best_bound) = if unbounded {
        (BnbStatus::Unbounded, f64::NEG_INFINITY)
    } else if let Some(s) = limit_status {
        (s, open_min.min(objective))
    } else if incumbent.is_some() {
        (BnbStatus::Optimal, objective)
    } else {
        (BnbStatus::Infeasible, f64::INFINITY)
    };
    BnbResult {
        status,
        objective,
        x: incumbent.map(|(_, x)| x),
        best_bound,
        nodes,
        lp_iterations,
        wall_time: start.elapsed(),
        root_bound,
        trace,
    }
}

/// Adds rounds of Gomory cuts at the root until the bound stalls, then
/// keeps only the cuts that bind at the final root optimum. Returns `None`
/// when no cut survives.
fn root_cuts(model: &MipModel, cfg: &SolveConfig, start: Instant) -> Option<MipModel> {
    let integer: Vec<bool> = model.variables().iter().map(|v| v.kind == VarKind::Binary).collect();
    if cfg.cut_rounds == 0 || !integer.contains(&true) {
        return None;
    }
    let out_of_time = || cfg.time_limit.is_some_and(|limit| start.elapsed() >= limit);
    let mut cut_model = model.clone();
    let mut last = f64::NEG_INFINITY;
    let mut final_x = None;
    for round in 0..cfg.cut_rounds {
        if out_of_time() {
            break;
        }
        let mut lp = LpSolver::new(&cut_model);
        let r = lp.solve();
        if r.status != LpStatus::Optimal {
            break;
        }
        let stalled = r.objective - last <= 1e-4 * r.objective.abs().max(1.0);
        final_x = Some(r.x);
        if round > 1 && stalled {
            break;
        }
        last = r.objective;
        let cuts = lp.gomory_cuts(&integer, CUTS_PER_ROUND);
        if cuts.is_empty() {
            break;
        }
        for (k, (terms, rhs)) in cuts.into_iter().enumerate() {
            cut_model.add_grouped_constraint(CUT_GROUP, format!("GMI{round}_{k}"), terms, Sense::Ge, rhs);
        }
    }
    // Keep the cuts that bind at, or still cut off, the last root optimum.
    let x = final_x?;
    let mut pruned = model.clone();
    for c in &cut_model.constraints()[model.num_constraints()..] {
        if c.activity(&x) <= c.rhs + 1e-7 * c.rhs.abs().max(1.0) {
            pruned.add_grouped_constraint(CUT_GROUP, c.name.clone(), c.coeffs.clone(), Sense::Ge, c.rhs);
        }
    }
    (pruned.num_constraints() > model.num_constraints()).then_some(pruned)
}

/// Group tag of root cut rows.
const CUT_GROUP: &str = "gomory";
