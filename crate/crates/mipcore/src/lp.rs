//! Bounded two-phase primal simplex.
//!
//! Every row `a·x (<=|=|>=) b` gets a logical variable `s = a·x` whose
//! bounds encode the sense, so the working system is `A x - s = 0` with
//! bounds on every column. The all-logical basis is always available as a
//! starting point; any previous basis can be reused after bounds change.
//!
//! Phase 1 minimizes the total bound violation of the basic variables
//! (equality logicals play the role of artificials); phase 2 minimizes the
//! model objective. Pricing is Dantzig's rule until the objective stalls
//! for `5·(rows + cols)` pivots, after which Bland's rule takes over until
//! the next strict improvement.
//!
//! Before the primal phases, a bounded dual simplex pass repairs basic
//! variables pushed out of bounds by bound changes on a warm basis. It
//! hands over to the primal phases whenever it cannot proceed.

use crate::config::SolveConfig;
use crate::model::{MipModel, Sense, VarKind};

const PRIMAL_TOL: f64 = 1e-9;
const DUAL_TOL: f64 = 1e-9;
const PIVOT_TOL: f64 = 1e-9;
const REFACTOR_EVERY: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    /// Safety valve; not expected on well-scaled models.
    IterationLimit,
}

#[derive(Debug, Clone)]
pub struct LpResult {
    pub status: LpStatus,
    pub objective: f64,
    /// Values of the structural variables.
    pub x: Vec<f64>,
    pub iterations: usize,
}

enum DualOutcome {
    Done,
    Infeasible,
    GaveUp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum VarState {
    Basic(usize),
    Lower,
    Upper,
}

/// Simplex state for one model. Cloning gives an independent worker that
/// starts from the same basis.
#[derive(Debug, Clone)]
pub struct LpSolver {
    n: usize,
    m: usize,
    col_start: Vec<usize>,
    col_row: Vec<usize>,
    col_val: Vec<f64>,
    cost: Vec<f64>,
    lb: Vec<f64>,
    ub: Vec<f64>,
    default_ub: Vec<f64>,
    state: Vec<VarState>,
    basis: Vec<usize>,
    x: Vec<f64>,
    /// Dense basis inverse, column-major: entry `(p, i)` (basis position
    /// `p`, row `i`) lives at `binv[i * m + p]`.
    binv: Vec<f64>,
    since_refactor: usize,
    total_iterations: usize,
}

impl LpSolver {
    /// Builds the relaxation of `model` (binaries become `[0, 1]`).
    pub fn new(model: &MipModel) -> Self {
        let n = model.num_vars();
        let m = model.num_constraints();
        let mut counts = vec![0usize; n + m];
        for c in model.constraints() {
            for &(j, _) in &c.coeffs {
                counts[j] += 1;
            }
        }
        let mut col_start = Vec::with_capacity(n + m + 1);
        col_start.push(0);
        for j in 0..n + m {
            let len = if j < n { counts[j] } else { 1 };
            col_start.push(col_start[j] + len);
        }
        let nnz = col_start[n + m];
        let mut col_row = vec![0; nnz];
        let mut col_val = vec![0.0; nnz];
        let mut fill = col_start.clone();
        for (i, c) in model.constraints().iter().enumerate() {
            for &(j, a) in &c.coeffs {
                col_row[fill[j]] = i;
                col_val[fill[j]] = a;
                fill[j] += 1;
            }
        }
        for i in 0..m {
            col_row[fill[n + i]] = i;
            col_val[fill[n + i]] = -1.0;
        }

        let mut cost = vec![0.0; n + m];
        let mut lb = vec![0.0; n + m];
        let mut ub = vec![f64::INFINITY; n + m];
        for (j, v) in model.variables().iter().enumerate() {
            cost[j] = v.obj;
            if v.kind == VarKind::Binary {
                ub[j] = 1.0;
            }
        }
        for (i, c) in model.constraints().iter().enumerate() {
            let (l, u) = match c.sense {
                Sense::Le => (f64::NEG_INFINITY, c.rhs),
                Sense::Ge => (c.rhs, f64::INFINITY),
                Sense::Eq => (c.rhs, c.rhs),
            };
            lb[n + i] = l;
            ub[n + i] = u;
        }
        let default_ub = ub[..n].to_vec();

        let mut solver = Self {
            n,
            m,
            col_start,
            col_row,
            col_val,
            cost,
            lb,
            ub,
            default_ub,
            state: Vec::new(),
            basis: Vec::new(),
            x: vec![0.0; n + m],
            binv: Vec::new(),
            since_refactor: 0,
            total_iterations: 0,
        };
        solver.slack_basis();
        solver
    }

    pub fn num_rows(&self) -> usize {
        self.m
    }

    pub fn num_cols(&self) -> usize {
        self.n
    }

    /// Total pivots and bound flips performed over the solver's lifetime.
    pub fn total_iterations(&self) -> usize {
        self.total_iterations
    }

    fn slack_basis(&mut self) {
        let (n, m) = (self.n, self.m);
        self.state = (0..n + m)
            .map(|j| {
                if j >= n {
                    VarState::Basic(j - n)
                } else {
                    VarState::Lower
                }
            })
            .collect();
        self.basis = (n..n + m).collect();
        self.binv = vec![0.0; m * m];
        for i in 0..m {
            self.binv[i * m + i] = -1.0;
        }
        self.since_refactor = 0;
        for j in 0..n {
            self.x[j] = self.lb[j];
        }
    }

    /// Changes the bounds of structural variable `j`. The current basis is
    /// kept; the next [`LpSolver::solve`] repairs primal feasibility.
    pub fn set_bounds(&mut self, j: usize, lb: f64, ub: f64) {
        assert!(j < self.n, "set_bounds only applies to structural variables");
        self.lb[j] = lb;
        self.ub[j] = ub;
        match self.state[j] {
            VarState::Basic(_) => {}
            VarState::Upper if ub.is_finite() && lb < ub => self.x[j] = ub,
            _ => {
                self.state[j] = VarState::Lower;
                self.x[j] = lb;
            }
        }
    }

    /// Restores the bounds implied by the model's variable kinds.
    pub fn reset_bounds(&mut self) {
        for j in 0..self.n {
            let ub = self.default_ub[j];
            if self.lb[j] != 0.0 || self.ub[j] != ub {
                self.set_bounds(j, 0.0, ub);
            }
        }
    }

    pub fn bounds(&self, j: usize) -> (f64, f64) {
        (self.lb[j], self.ub[j])
    }

    fn column(&self, j: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.col_start[j]..self.col_start[j + 1];
        self.col_row[range.clone()].iter().copied().zip(self.col_val[range].iter().copied())
    }

    /// Recomputes the basic values from the nonbasic ones.
    fn recompute_basics(&mut self) {
        let m = self.m;
        let mut r = vec![0.0; m];
        for j in 0..self.n + self.m {
            if matches!(self.state[j], VarState::Basic(_)) {
                continue;
            }
            let xj = self.x[j];
            if xj != 0.0 {
                for (i, a) in self.column(j) {
                    r[i] += a * xj;
                }
            }
        }
        let mut xb = vec![0.0; m];
        for (i, &ri) in r.iter().enumerate() {
            if ri != 0.0 {
                for (v, b) in xb.iter_mut().zip(&self.binv[i * m..(i + 1) * m]) {
                    *v -= ri * b;
                }
            }
        }
        for p in 0..m {
            self.x[self.basis[p]] = xb[p];
        }
    }

    /// Rebuilds the basis inverse by Gauss-Jordan elimination. Falls back to
    /// the all-logical basis if the current one is numerically singular.
    fn refactor(&mut self) {
        let m = self.m;
        if m == 0 {
            return;
        }
        let mut b = vec![0.0; m * m];
        for (p, &j) in self.basis.iter().enumerate() {
            for (i, a) in self.column(j) {
                b[i * m + p] = a;
            }
        }
        let mut inv = vec![0.0; m * m];
        for i in 0..m {
            inv[i * m + i] = 1.0;
        }
        for col in 0..m {
            let mut piv = col;
            let mut best = b[col * m + col].abs();
            for r in col + 1..m {
                let v = b[r * m + col].abs();
                if v > best {
                    best = v;
                    piv = r;
                }
            }
            if best < 1e-11 {
                self.slack_basis();
                return;
            }
            if piv != col {
                for k in 0..m {
                    b.swap(piv * m + k, col * m + k);
                    inv.swap(piv * m + k, col * m + k);
                }
            }
            let d = b[col * m + col];
            let mut b_nz = Vec::new();
            let mut inv_nz = Vec::new();
            for k in 0..m {
                b[col * m + k] /= d;
                inv[col * m + k] /= d;
                if b[col * m + k] != 0.0 {
                    b_nz.push((k, b[col * m + k]));
                }
                if inv[col * m + k] != 0.0 {
                    inv_nz.push((k, inv[col * m + k]));
                }
            }
            for r in 0..m {
                if r == col {
                    continue;
                }
                let f = b[r * m + col];
                if f == 0.0 {
                    continue;
                }
                for &(k, v) in &b_nz {
                    b[r * m + k] -= f * v;
                }
                for &(k, v) in &inv_nz {
                    inv[r * m + k] -= f * v;
                }
            }
        }
        // Row p of `inv` belongs to basis position p; store it transposed.
        for i in 0..m {
            for p in 0..m {
                b[i * m + p] = inv[p * m + i];
            }
        }
        self.binv = b;
        self.since_refactor = 0;
    }

    fn infeasibility(&self, v: usize) -> f64 {
        let xv = self.x[v];
        if xv < self.lb[v] - PRIMAL_TOL {
            self.lb[v] - xv
        } else if xv > self.ub[v] + PRIMAL_TOL {
            xv - self.ub[v]
        } else {
            0.0
        }
    }

    fn structural_objective(&self) -> f64 {
        (0..self.n).map(|j| self.cost[j] * self.x[j]).sum()
    }

    /// Runs both phases from the current basis.
    pub fn solve(&mut self) -> LpResult {
        let start_iters = self.total_iterations;
        let max_iters = 50 * (self.n + self.m) + 10_000;
        let stall_limit = 5 * (self.n + self.m);
        let m = self.m;

        if let DualOutcome::Infeasible = self.dual_phase(5 * (self.n + self.m)) {
            return self.result(LpStatus::Infeasible, start_iters);
        }
        self.recompute_basics();
        let mut bland = false;
        let mut stall = 0usize;
        let mut last_measure = f64::INFINITY;
        let mut last_phase1 = true;
        let mut c_basic = vec![0.0; m];
        let mut y = vec![0.0; m];
        let mut alpha = vec![0.0; m];
        let mut retries = 0usize;
        let mut confirmed = false;

        loop {
            if self.total_iterations - start_iters > max_iters {
                return self.result(LpStatus::IterationLimit, start_iters);
            }

            let mut infeas = 0.0;
            for p in 0..m {
                let v = self.basis[p];
                let xv = self.x[v];
                c_basic[p] = if xv < self.lb[v] - PRIMAL_TOL {
                    infeas += self.lb[v] - xv;
                    -1.0
                } else if xv > self.ub[v] + PRIMAL_TOL {
                    infeas += xv - self.ub[v];
                    1.0
                } else {
                    0.0
                };
            }
            let phase1 = infeas > 0.0;
            if !phase1 {
                for p in 0..m {
                    c_basic[p] = self.cost[self.basis[p]];
                }
            }
            let measure = if phase1 { infeas } else { self.structural_objective() };
            if phase1 != last_phase1 {
                last_phase1 = phase1;
                last_measure = f64::INFINITY;
            }
            if measure < last_measure - 1e-12 * (1.0 + last_measure.abs().min(1e300)) {
                stall = 0;
                bland = false;
                last_measure = measure;
            } else {
                stall += 1;
                if stall > stall_limit {
                    bland = true;
                }
            }

            let priced: Vec<(usize, f64)> =
                c_basic.iter().enumerate().filter(|(_, c)| **c != 0.0).map(|(p, &c)| (p, c)).collect();
            for (i, yi) in y.iter_mut().enumerate() {
                let col = &self.binv[i * m..(i + 1) * m];
                *yi = priced.iter().map(|&(p, c)| col[p] * c).sum();
            }

            // Pricing.
            let mut entering: Option<(usize, f64)> = None;
            for j in 0..self.n + self.m {
                let st = self.state[j];
                if matches!(st, VarState::Basic(_)) || self.lb[j] == self.ub[j] {
                    continue;
                }
                let cj = if phase1 { 0.0 } else { self.cost[j] };
                let d = cj - self.column(j).map(|(i, a)| y[i] * a).sum::<f64>();
                let eligible = match st {
                    VarState::Lower => d < -DUAL_TOL,
                    VarState::Upper => d > DUAL_TOL,
                    VarState::Basic(_) => false,
                };
                if !eligible {
                    continue;
                }
                if bland {
                    entering = Some((j, d));
                    break;
                }
                if entering.map_or(true, |(_, best)| d.abs() > best.abs()) {
                    entering = Some((j, d));
                }
            }

            let Some((q, _)) = entering else {
                // Confirm against freshly computed basic values before
                // declaring the basis optimal or infeasible.
                if !confirmed {
                    confirmed = true;
                    self.recompute_basics();
                    continue;
                }
                let status = if phase1 { LpStatus::Infeasible } else { LpStatus::Optimal };
                return self.result(status, start_iters);
            };

            let dir = if self.state[q] == VarState::Lower { 1.0 } else { -1.0 };
            alpha.iter_mut().for_each(|v| *v = 0.0);
            for (i, a) in self.column(q) {
                for (al, b) in alpha.iter_mut().zip(&self.binv[i * m..(i + 1) * m]) {
                    *al += b * a;
                }
            }

            // Ratio test: Harris two-pass, or exact min-ratio with lowest
            // index under Bland's rule.
            let relaxed_ratio = |p: usize, slack_tol: f64| -> Option<(f64, f64, bool)> {
                let rate = -dir * alpha[p];
                if rate.abs() <= PIVOT_TOL {
                    return None;
                }
                let v = self.basis[p];
                let xv = self.x[v];
                let (lo, hi) = (self.lb[v], self.ub[v]);
                if rate > 0.0 {
                    if phase1 && xv < lo - PRIMAL_TOL {
                        Some(((lo - xv + slack_tol) / rate, lo, false))
                    } else if xv > hi + PRIMAL_TOL || hi == f64::INFINITY {
                        None
                    } else {
                        Some((((hi - xv).max(0.0) + slack_tol) / rate, hi, true))
                    }
                } else if phase1 && xv > hi + PRIMAL_TOL {
                    Some(((xv - hi + slack_tol) / -rate, hi, true))
                } else if xv < lo - PRIMAL_TOL || lo == f64::NEG_INFINITY {
                    None
                } else {
                    Some((((xv - lo).max(0.0) + slack_tol) / -rate, lo, false))
                }
            };

            let mut leave: Option<(usize, f64, f64, bool)> = None;
            if bland {
                let mut best = f64::INFINITY;
                for p in 0..m {
                    if let Some((t, _, _)) = relaxed_ratio(p, 0.0) {
                        best = best.min(t);
                    }
                }
                if best.is_finite() {
                    for p in 0..m {
                        if let Some((t, bound, upper)) = relaxed_ratio(p, 0.0) {
                            if t <= best + 1e-12
                                && leave.map_or(true, |(lp, ..)| self.basis[p] < self.basis[lp])
                            {
                                leave = Some((p, t, bound, upper));
                            }
                        }
                    }
                }
            } else {
                let mut theta = f64::INFINITY;
                for p in 0..m {
                    if let Some((t, _, _)) = relaxed_ratio(p, PRIMAL_TOL) {
                        theta = theta.min(t);
                    }
                }
                if theta.is_finite() {
                    let mut best_alpha = 0.0;
                    for p in 0..m {
                        if let Some((t, bound, upper)) = relaxed_ratio(p, 0.0) {
                            if t <= theta && alpha[p].abs() > best_alpha {
                                best_alpha = alpha[p].abs();
                                leave = Some((p, t.max(0.0), bound, upper));
                            }
                        }
                    }
                }
            }

            let range = self.ub[q] - self.lb[q];
            let flip = match leave {
                None => range.is_finite(),
                Some((_, t, _, _)) => range.is_finite() && range <= t,
            };

            if leave.is_none() && !flip {
                if self.since_refactor > 0 {
                    self.refactor();
                    self.recompute_basics();
                    continue;
                }
                if !phase1 {
                    return self.result(LpStatus::Unbounded, start_iters);
                }
                // A phase-1 ray cannot exist in exact arithmetic.
                if retries >= 2 {
                    return self.result(LpStatus::IterationLimit, start_iters);
                }
                retries += 1;
                self.slack_basis();
                self.recompute_basics();
                continue;
            }

            self.total_iterations += 1;
            confirmed = false;
            let t = if flip { range } else { leave.unwrap().1 };
            if t != 0.0 {
                for p in 0..m {
                    let a = alpha[p];
                    if a != 0.0 {
                        self.x[self.basis[p]] -= dir * a * t;
                    }
                }
            }
            if flip {
                if dir > 0.0 {
                    self.x[q] = self.ub[q];
                    self.state[q] = VarState::Upper;
                } else {
                    self.x[q] = self.lb[q];
                    self.state[q] = VarState::Lower;
                }
                continue;
            }

            let (r, _, bound, at_upper) = leave.unwrap();
            let leaving = self.basis[r];
            self.x[q] += dir * t;
            self.x[leaving] = bound;
            self.state[leaving] = if at_upper { VarState::Upper } else { VarState::Lower };
            self.state[q] = VarState::Basic(r);
            self.basis[r] = q;

            self.update_inverse(r, &alpha);
        }
    }

    /// Replaces basis position `r` in the inverse, given the entering
    /// column `alpha = B^-1 a_q`. Refactors periodically.
    fn update_inverse(&mut self, r: usize, alpha: &[f64]) {
        let m = self.m;
        let piv = alpha[r];
        let touched: Vec<(usize, f64)> =
            alpha.iter().enumerate().filter(|(p, a)| **a != 0.0 && *p != r).map(|(p, &a)| (p, a)).collect();
        for col in self.binv.chunks_exact_mut(m) {
            let v = col[r] / piv;
            if v == 0.0 {
                continue;
            }
            for &(p, a) in &touched {
                col[p] -= a * v;
            }
            col[r] = v;
        }
        self.since_refactor += 1;
        if self.since_refactor >= REFACTOR_EVERY {
            self.refactor();
            self.recompute_basics();
        }
    }

    /// Dual simplex from the current basis, used when bound changes have
    /// left it primal infeasible but dual feasible (the usual situation
    /// after branching). Nonbasic variables whose reduced cost has the
    /// wrong sign are moved to their opposite bound when it is finite.
    fn dual_phase(&mut self, budget: usize) -> DualOutcome {
        let (n, m) = (self.n, self.m);
        self.recompute_basics();
        let mut y = vec![0.0; m];
        let mut alpha = vec![0.0; m];
        let mut rho = vec![0.0; m];
        let mut c_basic = vec![0.0; m];
        let mut moved = false;

        let price = |s: &Self, y: &mut Vec<f64>, c_basic: &mut Vec<f64>| {
            for (p, c) in c_basic.iter_mut().enumerate() {
                *c = s.cost[s.basis[p]];
            }
            let priced: Vec<(usize, f64)> =
                c_basic.iter().enumerate().filter(|(_, c)| **c != 0.0).map(|(p, &c)| (p, c)).collect();
            for (i, yi) in y.iter_mut().enumerate() {
                let col = &s.binv[i * m..(i + 1) * m];
                *yi = priced.iter().map(|&(p, c)| col[p] * c).sum();
            }
        };
        price(self, &mut y, &mut c_basic);
        for j in 0..n + m {
            let st = self.state[j];
            if matches!(st, VarState::Basic(_)) || self.lb[j] == self.ub[j] {
                continue;
            }
            let d = self.cost[j] - self.column(j).map(|(i, a)| y[i] * a).sum::<f64>();
            match st {
                VarState::Lower if d < -DUAL_TOL => {
                    if !self.ub[j].is_finite() {
                        return DualOutcome::GaveUp;
                    }
                    self.state[j] = VarState::Upper;
                    self.x[j] = self.ub[j];
                    moved = true;
                }
                VarState::Upper if d > DUAL_TOL => {
                    if !self.lb[j].is_finite() {
                        return DualOutcome::GaveUp;
                    }
                    self.state[j] = VarState::Lower;
                    self.x[j] = self.lb[j];
                    moved = true;
                }
                _ => {}
            }
        }
        if moved {
            self.recompute_basics();
        }

        for iter in 0..budget {
            // Leaving row: largest bound violation.
            let mut leave: Option<(usize, f64)> = None;
            for p in 0..m {
                let v = self.basis[p];
                let viol = if self.x[v] < self.lb[v] - PRIMAL_TOL {
                    self.lb[v] - self.x[v]
                } else if self.x[v] > self.ub[v] + PRIMAL_TOL {
                    -(self.x[v] - self.ub[v])
                } else {
                    continue;
                };
                if leave.map_or(true, |(_, best)| viol.abs() > best.abs()) {
                    leave = Some((p, viol));
                }
            }
            let Some((r, viol)) = leave else {
                return DualOutcome::Done;
            };
            let raise = viol > 0.0;

            for (i, v) in rho.iter_mut().enumerate() {
                *v = self.binv[i * m + r];
            }
            if self.since_refactor == 0 || iter % 25 == 0 {
                price(self, &mut y, &mut c_basic);
            }
            let mut entering: Option<(usize, f64, f64, f64)> = None;
            for j in 0..n + m {
                let st = self.state[j];
                if matches!(st, VarState::Basic(_)) || self.lb[j] == self.ub[j] {
                    continue;
                }
                let a_rj: f64 = self.column(j).map(|(i, a)| rho[i] * a).sum();
                // Raising x_r needs a_rj < 0 for a variable at its lower
                // bound (it increases) and a_rj > 0 at its upper bound.
                let helps = match (st, raise) {
                    (VarState::Lower, true) | (VarState::Upper, false) => a_rj < -PIVOT_TOL,
                    _ => a_rj > PIVOT_TOL,
                };
                if !helps {
                    continue;
                }
                let d = self.cost[j] - self.column(j).map(|(i, a)| y[i] * a).sum::<f64>();
                let ratio = d.abs() / a_rj.abs();
                let better = entering.map_or(true, |(_, best, best_a, _)| {
                    ratio < best - 1e-12 || (ratio <= best + 1e-12 && a_rj.abs() > best_a)
                });
                if better {
                    entering = Some((j, ratio, a_rj.abs(), d));
                }
            }
            let Some((q, _, _, d_q)) = entering else {
                return if viol.abs() > 1e-6 { DualOutcome::Infeasible } else { DualOutcome::GaveUp };
            };

            alpha.iter_mut().for_each(|v| *v = 0.0);
            for (i, a) in self.column(q) {
                for (al, b) in alpha.iter_mut().zip(&self.binv[i * m..(i + 1) * m]) {
                    *al += b * a;
                }
            }
            if alpha[r].abs() <= PIVOT_TOL {
                return DualOutcome::GaveUp;
            }
            let dir = if self.state[q] == VarState::Lower { 1.0 } else { -1.0 };
            let leaving = self.basis[r];
            let target = if raise { self.lb[leaving] } else { self.ub[leaving] };
            let t = (self.x[leaving] - target) / (dir * alpha[r]);
            for p in 0..m {
                let a = alpha[p];
                if a != 0.0 {
                    self.x[self.basis[p]] -= dir * a * t;
                }
            }
            self.x[q] += dir * t;
            self.x[leaving] = target;
            self.state[leaving] = if raise { VarState::Lower } else { VarState::Upper };
            self.state[q] = VarState::Basic(r);
            self.basis[r] = q;
            self.total_iterations += 1;
            // New prices: y + (d_q / alpha_rq) * rho.
            let step = d_q / alpha[r];
            for (yi, p) in y.iter_mut().zip(&rho) {
                *yi += step * p;
            }
            self.update_inverse(r, &alpha);
        }
        DualOutcome::GaveUp
    }

    fn result(&self, status: LpStatus, start_iters: usize) -> LpResult {
        let x: Vec<f64> = self.x[..self.n].to_vec();
        let objective = match status {
            LpStatus::Optimal => self.structural_objective(),
            LpStatus::Infeasible => f64::INFINITY,
            LpStatus::Unbounded => f64::NEG_INFINITY,
            LpStatus::IterationLimit => f64::NAN,
        };
        LpResult { status, objective, x, iterations: self.total_iterations - start_iters }
    }

    /// Phase-2 reduced costs of every structural variable at the current
    /// basis, paired with whether the variable is basic, at its lower bound
    /// or at its upper bound (`0`, `-1`, `1`). Fixed variables report `0`,
    /// since neither bound is one they could leave.
    pub fn reduced_costs(&self) -> Vec<(f64, i8)> {
        let m = self.m;
        let mut y = vec![0.0; m];
        let c_basic: Vec<f64> = self.basis.iter().map(|&v| self.cost[v]).collect();
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = self.binv[i * m..(i + 1) * m].iter().zip(&c_basic).map(|(b, c)| b * c).sum();
        }
        (0..self.n)
            .map(|j| {
                let d = self.cost[j] - self.column(j).map(|(i, a)| y[i] * a).sum::<f64>();
                let tag = match self.state[j] {
                    _ if self.lb[j] == self.ub[j] => 0,
                    VarState::Basic(_) => 0,
                    VarState::Lower => -1,
                    VarState::Upper => 1,
                };
                (d, tag)
            })
            .collect()
    }

    /// Gomory mixed-integer cuts read off the rows of the current optimal
    /// tableau whose basic variable is a fractional member of `integer`.
    /// At most `limit` rows are used, most fractional first. Each cut is
    /// returned over structural variables as `sum coeffs >= rhs`.
    pub fn gomory_cuts(&self, integer: &[bool], limit: usize) -> Vec<(Vec<(usize, f64)>, f64)> {
        let (n, m) = (self.n, self.m);
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); m];
        for j in 0..n {
            for (i, a) in self.column(j) {
                rows[i].push((j, a));
            }
        }
        let mut sources: Vec<(usize, f64)> = (0..m)
            .filter_map(|p| {
                let v = self.basis[p];
                if v >= n || !integer[v] {
                    return None;
                }
                let f0 = self.x[v] - self.x[v].floor();
                (f0 > 0.01 && f0 < 0.99).then_some((p, (f0 - 0.5).abs()))
            })
            .collect();
        sources.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));

        let mut cuts = Vec::new();
        'rows: for &(p, _) in sources.iter().take(limit) {
            let v = self.basis[p];
            let f0 = self.x[v] - self.x[v].floor();
            let rho: Vec<f64> = (0..m).map(|i| self.binv[i * m + p]).collect();
            let mut coeff = vec![0.0; n];
            let mut rhs = 1.0;
            for j in 0..n + m {
                if matches!(self.state[j], VarState::Basic(_)) || self.lb[j] == self.ub[j] {
                    continue;
                }
                let alpha: f64 = self.column(j).map(|(i, a)| rho[i] * a).sum();
                if alpha.abs() < 1e-11 {
                    continue;
                }
                let at_upper = self.state[j] == VarState::Upper;
                let bound = if at_upper { self.ub[j] } else { self.lb[j] };
                if !bound.is_finite() {
                    continue 'rows;
                }
                let a = if at_upper { -alpha } else { alpha };
                let g = if j < n && integer[j] {
                    let fj = a - a.floor();
                    if fj <= f0 {
                        fj / f0
                    } else {
                        (1.0 - fj) / (1.0 - f0)
                    }
                } else if a >= 0.0 {
                    a / f0
                } else {
                    -a / (1.0 - f0)
                };
                if g == 0.0 {
                    continue;
                }
                // The cut reads sum g * (x - l) or sum g * (u - x).
                let (sign, shift) = if at_upper { (-1.0, -g * bound) } else { (1.0, g * bound) };
                rhs += shift;
                if j < n {
                    coeff[j] += sign * g;
                } else {
                    for &(k, aik) in &rows[j - n] {
                        coeff[k] += sign * g * aik;
                    }
                }
            }
            let scale = coeff.iter().fold(0.0f64, |acc, c| acc.max(c.abs()));
            if scale < 1e-9 {
                continue;
            }
            let mut terms = Vec::new();
            for (k, &c) in coeff.iter().enumerate() {
                let c = c / scale;
                if c.abs() >= 1e-9 {
                    terms.push((k, c));
                } else if c != 0.0 {
                    // Drop a tiny term by assuming its least helpful value.
                    if !self.default_ub[k].is_finite() && c > 0.0 {
                        continue 'rows;
                    }
                    rhs -= scale * c.max(0.0) * self.default_ub[k].min(1e12);
                }
            }
            let smallest = terms.iter().fold(f64::INFINITY, |acc, t| acc.min(t.1.abs()));
            if terms.is_empty() || smallest < 1e-7 {
                continue;
            }
            let rhs = rhs / scale;
            let rhs = rhs - 1e-7 * rhs.abs().max(1.0);
            let activity: f64 = terms.iter().map(|&(k, c)| c * self.x[k]).sum();
            if activity < rhs - 1e-6 {
                cuts.push((terms, rhs));
            }
        }
        cuts
    }

    /// Largest primal bound violation across structurals and logicals.
    pub fn max_bound_violation(&self) -> f64 {
        (0..self.n + self.m).map(|v| self.infeasibility(v)).fold(0.0, f64::max)
    }
}

/// Solves the LP relaxation of `model` from the all-logical basis.
pub fn solve_lp(model: &MipModel, _cfg: &SolveConfig) -> LpResult {
    LpSolver::new(model).solve()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{MipModel, Sense, VarKind};

    #[test]
    fn one_variable_lower_bound() {
        let mut m = MipModel::new("t");
        let x = m.add_var("x", VarKind::Continuous, 1.0);
        m.add_constraint("c", [(x, 1.0)], Sense::Ge, 3.0);
        let r = solve_lp(&m, &SolveConfig::default());
        assert_eq!(r.status, LpStatus::Optimal);
        assert!((r.objective - 3.0).abs() < 1e-9);
    }

    #[test]
    fn contradictory_bounds_are_infeasible() {
        let mut m = MipModel::new("t");
        let x = m.add_var("x", VarKind::Continuous, 0.0);
        m.add_constraint("c", [(x, 1.0)], Sense::Le, -1.0);
        let r = solve_lp(&m, &SolveConfig::default());
        assert_eq!(r.status, LpStatus::Infeasible);
    }

    #[test]
    fn unbounded_ray() {
        let mut m = MipModel::new("t");
        let x = m.add_var("x", VarKind::Continuous, -1.0);
        let y = m.add_var("y", VarKind::Continuous, 0.0);
        m.add_constraint("c", [(x, 1.0), (y, -1.0)], Sense::Le, 2.0);
        let r = solve_lp(&m, &SolveConfig::default());
        assert_eq!(r.status, LpStatus::Unbounded);
    }

    #[test]
    fn binary_relaxation_uses_upper_bound() {
        // min -x - y  s.t. x + y <= 1.5, x,y in [0,1]
        let mut m = MipModel::new("t");
        let x = m.add_var("x", VarKind::Binary, -1.0);
        let y = m.add_var("y", VarKind::Binary, -1.0);
        m.add_constraint("c", [(x, 1.0), (y, 1.0)], Sense::Le, 1.5);
        let r = solve_lp(&m, &SolveConfig::default());
        assert_eq!(r.status, LpStatus::Optimal);
        assert!((r.objective + 1.5).abs() < 1e-9);
    }

    #[test]
    fn warm_start_after_bound_change() {
        // min -x - 2y s.t. x + y <= 1.5
        let mut m = MipModel::new("t");
        let x = m.add_var("x", VarKind::Binary, -1.0);
        let y = m.add_var("y", VarKind::Binary, -2.0);
        m.add_constraint("c", [(x, 1.0), (y, 1.0)], Sense::Le, 1.5);
        let mut s = LpSolver::new(&m);
        let r = s.solve();
        assert!((r.objective + 2.5).abs() < 1e-9);
        s.set_bounds(x, 1.0, 1.0);
        let r = s.solve();
        assert!((r.objective + 2.0).abs() < 1e-9, "{:?}", r);
        s.set_bounds(y, 1.0, 1.0);
        assert_eq!(s.solve().status, LpStatus::Infeasible);
        s.reset_bounds();
        let r = s.solve();
        assert!((r.objective + 2.5).abs() < 1e-9);
    }

    #[test]
    fn equality_rows_drive_phase_one() {
        // min x + y s.t. x + y = 2, x - y = 0
        let mut m = MipModel::new("t");
        let x = m.add_var("x", VarKind::Continuous, 1.0);
        let y = m.add_var("y", VarKind::Continuous, 1.0);
        m.add_constraint("a", [(x, 1.0), (y, 1.0)], Sense::Eq, 2.0);
        m.add_constraint("b", [(x, 1.0), (y, -1.0)], Sense::Eq, 0.0);
        let r = solve_lp(&m, &SolveConfig::default());
        assert_eq!(r.status, LpStatus::Optimal);
        assert!((r.x[0] - 1.0).abs() < 1e-9 && (r.x[1] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn degenerate_cycling_example_terminates() {
        // Beale's classic cycling LP (in minimization form).
        let mut m = MipModel::new("beale");
        let x: Vec<usize> = (0..4)
            .map(|i| m.add_var(format!("x{i}"), VarKind::Continuous, [-0.75, 150.0, -0.02, 6.0][i]))
            .collect();
        m.add_constraint(
            "r1",
            [(x[0], 0.25), (x[1], -60.0), (x[2], -0.04), (x[3], 9.0)],
            Sense::Le,
            0.0,
        );
        m.add_constraint(
            "r2",
            [(x[0], 0.5), (x[1], -90.0), (x[2], -0.02), (x[3], 3.0)],
            Sense::Le,
            0.0,
        );
        m.add_constraint("r3", [(x[2], 1.0)], Sense::Le, 1.0);
        let r = solve_lp(&m, &SolveConfig::default());
        assert_eq!(r.status, LpStatus::Optimal);
        assert!((r.objective + 0.05).abs() < 1e-9, "{}", r.objective);
    }
}
