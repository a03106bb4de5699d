//! Bounded-variable revised simplex over an active subset of rows.
//!
//! Every active row gets a logical variable (`a.x + s = rhs` with the sign
//! convention below), the basis is maintained in product form (sparse eta
//! vectors with periodic refactorization), feasibility is restored by a
//! composite phase-1 objective, and Dantzig pricing falls back to Bland's
//! rule when the objective stalls.

use std::time::Instant;

use crate::milp::Sense;

use super::instance::Instance;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Status {
    Basic,
    AtLower,
    AtUpper,
    /// Nonbasic free variable parked at zero.
    FreeZero,
}

/// Warm-start snapshot: nonbasic/basic statuses keyed by structural column
/// and original row id. Rows activated after the snapshot default to a basic
/// logical, which is always a valid extension.
#[derive(Debug, Clone)]
pub(crate) struct BasisSnapshot {
    pub col_status: Vec<Status>,
    pub row_status: Vec<Status>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    TimedOut,
    Stalled,
}

#[derive(Debug)]
pub(crate) struct LpOutcome {
    pub status: LpStatus,
    pub x: Vec<f64>,
    pub obj: f64,
    pub dual_obj: f64,
    pub iterations: u64,
    pub basis: BasisSnapshot,
}

struct Eta {
    pivot_row: u32,
    pivot_val: f64,
    nz: Vec<(u32, f64)>,
}

const PIVOT_TOL: f64 = 1e-9;
const DJ_TOL: f64 = 1e-9;
const REFACTOR_EVERY: u64 = 100;
/// Non-improving iterations before switching to Bland's rule.
const STALL_TO_BLAND: u64 = 1000;
/// Non-improving iterations under Bland's rule before giving up.
const STALL_LIMIT: u64 = 200_000;

pub(crate) struct Simplex<'a> {
    inst: &'a Instance,
    active: &'a [usize],
    m: usize,
    n: usize,
    // CSC of structural columns restricted to active rows.
    col_ptr: Vec<usize>,
    col_rows: Vec<u32>,
    col_vals: Vec<f64>,
    rhs: Vec<f64>,
    // Bounds and phase-2 costs for structural then logical variables.
    lo: Vec<f64>,
    up: Vec<f64>,
    cost: Vec<f64>,
    status: Vec<Status>,
    basic_in_row: Vec<usize>,
    x_basic: Vec<f64>,
    etas: Vec<Eta>,
    pivots_since_refactor: u64,
    iterations: u64,
    bland: bool,
    feas_tol: f64,
    deadline: Option<Instant>,
    // scratch
    work: Vec<f64>,
    y: Vec<f64>,
}

impl<'a> Simplex<'a> {
    pub(crate) fn new(
        inst: &'a Instance,
        active: &'a [usize],
        lower: &[f64],
        upper: &[f64],
        warm: Option<&BasisSnapshot>,
        feas_tol: f64,
        deadline: Option<Instant>,
    ) -> Simplex<'a> {
        let m = active.len();
        let n = inst.n;
        // Build the active-row CSC.
        let mut row_pos = vec![u32::MAX; inst.rows.len()];
        for (k, &r) in active.iter().enumerate() {
            row_pos[r] = k as u32;
        }
        let mut counts = vec![0usize; n];
        for &r in active {
            for &(col, _) in &inst.rows[r].terms {
                counts[col] += 1;
            }
        }
        let mut col_ptr = vec![0usize; n + 1];
        for j in 0..n {
            col_ptr[j + 1] = col_ptr[j] + counts[j];
        }
        let nnz = col_ptr[n];
        let mut col_rows = vec![0u32; nnz];
        let mut col_vals = vec![0f64; nnz];
        let mut fill = col_ptr.clone();
        for &r in active {
            let k = row_pos[r];
            for &(col, a) in &inst.rows[r].terms {
                let slot = fill[col];
                col_rows[slot] = k;
                col_vals[slot] = a;
                fill[col] += 1;
            }
        }

        let mut lo = Vec::with_capacity(n + m);
        let mut up = Vec::with_capacity(n + m);
        let mut cost = Vec::with_capacity(n + m);
        lo.extend_from_slice(lower);
        up.extend_from_slice(upper);
        cost.extend_from_slice(&inst.obj);
        let mut rhs = Vec::with_capacity(m);
        for &r in active {
            let row = &inst.rows[r];
            rhs.push(row.rhs);
            let (l, u) = match row.sense {
                Sense::Le => (0.0, f64::INFINITY),
                Sense::Ge => (f64::NEG_INFINITY, 0.0),
                Sense::Eq => (0.0, 0.0),
            };
            lo.push(l);
            up.push(u);
            cost.push(0.0);
        }

        // Initial statuses: warm snapshot where available, otherwise all
        // logicals basic and structurals at their nearest finite bound.
        let mut status = Vec::with_capacity(n + m);
        for j in 0..n {
            let s = warm
                .map(|b| b.col_status[j])
                .unwrap_or(Status::AtLower);
            status.push(normalize_nonbasic(s, lo[j], up[j]));
        }
        for (k, &r) in active.iter().enumerate() {
            let s = warm.map(|b| b.row_status[r]).unwrap_or(Status::Basic);
            let j = n + k;
            status.push(normalize_nonbasic(s, lo[j], up[j]));
        }

        let mut sx = Simplex {
            inst,
            active,
            m,
            n,
            col_ptr,
            col_rows,
            col_vals,
            rhs,
            lo,
            up,
            cost,
            status,
            basic_in_row: vec![usize::MAX; m],
            x_basic: vec![0.0; m],
            etas: Vec::new(),
            pivots_since_refactor: 0,
            iterations: 0,
            bland: false,
            feas_tol,
            deadline,
            work: vec![0.0; m],
            y: vec![0.0; m],
        };
        sx.repair_basic_count();
        sx
    }

    /// Ensures exactly `m` variables are marked basic.
    fn repair_basic_count(&mut self) {
        let mut basics: Vec<usize> = (0..self.n + self.m)
            .filter(|&j| self.status[j] == Status::Basic)
            .collect();
        if basics.len() > self.m {
            // Demote surplus structural basics first (logicals refactor cleanly).
            let mut surplus = basics.len() - self.m;
            for &j in basics.iter().rev() {
                if surplus == 0 {
                    break;
                }
                if j < self.n {
                    self.status[j] = nearest_bound_status(self.lo[j], self.up[j]);
                    surplus -= 1;
                }
            }
            if surplus > 0 {
                basics = (0..self.n + self.m)
                    .filter(|&j| self.status[j] == Status::Basic)
                    .collect();
                for &j in basics.iter().rev().take(surplus) {
                    self.status[j] = nearest_bound_status(self.lo[j], self.up[j]);
                }
            }
        } else if basics.len() < self.m {
            let mut need = self.m - basics.len();
            for k in 0..self.m {
                if need == 0 {
                    break;
                }
                let j = self.n + k;
                if self.status[j] != Status::Basic {
                    self.status[j] = Status::Basic;
                    need -= 1;
                }
            }
        }
    }

    fn nonbasic_value(&self, j: usize) -> f64 {
        match self.status[j] {
            Status::AtLower => self.lo[j],
            Status::AtUpper => self.up[j],
            Status::FreeZero => 0.0,
            Status::Basic => unreachable!("basic variable has no nonbasic value"),
        }
    }

    fn column<'b>(&'b self, j: usize) -> ColIter<'b> {
        if j < self.n {
            ColIter::Structural {
                rows: &self.col_rows[self.col_ptr[j]..self.col_ptr[j + 1]],
                vals: &self.col_vals[self.col_ptr[j]..self.col_ptr[j + 1]],
            }
        } else {
            ColIter::Logical {
                row: (j - self.n) as u32,
            }
        }
    }

    fn ftran(&self, v: &mut [f64]) {
        for eta in &self.etas {
            let r = eta.pivot_row as usize;
            let t = v[r];
            if t == 0.0 {
                continue;
            }
            let t = t / eta.pivot_val;
            v[r] = t;
            for &(i, a) in &eta.nz {
                v[i as usize] -= a * t;
            }
        }
    }

    fn btran(&self, y: &mut [f64]) {
        for eta in self.etas.iter().rev() {
            let r = eta.pivot_row as usize;
            let mut s = y[r];
            for &(i, a) in &eta.nz {
                s -= a * y[i as usize];
            }
            y[r] = s / eta.pivot_val;
        }
    }

    /// Rebuilds the eta file from the current basic set by sparse Gaussian
    /// elimination with partial pivoting; spills numerically dependent
    /// columns back to a bound and fills the gap with row logicals.
    fn refactor(&mut self) {
        self.etas.clear();
        self.pivots_since_refactor = 0;
        let mut assigned = vec![false; self.m];
        self.basic_in_row = vec![usize::MAX; self.m];
        // Logicals first: they are singleton columns and pivot cleanly.
        let mut order: Vec<usize> = Vec::with_capacity(self.m);
        for j in self.n..self.n + self.m {
            if self.status[j] == Status::Basic {
                order.push(j);
            }
        }
        for j in 0..self.n {
            if self.status[j] == Status::Basic {
                order.push(j);
            }
        }
        for j in order {
            let mut v = std::mem::take(&mut self.work);
            v.iter_mut().for_each(|x| *x = 0.0);
            match self.column(j) {
                ColIter::Structural { rows, vals, .. } => {
                    for (&r, &a) in rows.iter().zip(vals) {
                        v[r as usize] = a;
                    }
                }
                ColIter::Logical { row, .. } => v[row as usize] = 1.0,
            }
            self.ftran(&mut v);
            let mut best = usize::MAX;
            let mut best_abs = 1e-8;
            for (r, &val) in v.iter().enumerate() {
                if !assigned[r] && val.abs() > best_abs {
                    best = r;
                    best_abs = val.abs();
                }
            }
            if best == usize::MAX {
                // Dependent column: park the variable at a bound.
                self.status[j] = nearest_bound_status(self.lo[j], self.up[j]);
                self.work = v;
                continue;
            }
            let nz: Vec<(u32, f64)> = v
                .iter()
                .enumerate()
                .filter(|&(r, &a)| r != best && a != 0.0)
                .map(|(r, &a)| (r as u32, a))
                .collect();
            self.etas.push(Eta {
                pivot_row: best as u32,
                pivot_val: v[best],
                nz,
            });
            assigned[best] = true;
            self.basic_in_row[best] = j;
            self.work = v;
        }
        for r in 0..self.m {
            if !assigned[r] {
                let j = self.n + r;
                self.status[j] = Status::Basic;
                self.basic_in_row[r] = j;
                let mut v = vec![0.0; self.m];
                v[r] = 1.0;
                self.ftran(&mut v);
                let nz: Vec<(u32, f64)> = v
                    .iter()
                    .enumerate()
                    .filter(|&(i, &a)| i != r && a != 0.0)
                    .map(|(i, &a)| (i as u32, a))
                    .collect();
                self.etas.push(Eta {
                    pivot_row: r as u32,
                    pivot_val: v[r],
                    nz,
                });
            }
        }
        self.recompute_basics();
    }

    fn recompute_basics(&mut self) {
        let mut v: Vec<f64> = self.rhs.clone();
        for j in 0..self.n + self.m {
            if self.status[j] == Status::Basic {
                continue;
            }
            let val = self.nonbasic_value(j);
            if val == 0.0 {
                continue;
            }
            match self.column(j) {
                ColIter::Structural { rows, vals, .. } => {
                    for (&r, &a) in rows.iter().zip(vals) {
                        v[r as usize] -= a * val;
                    }
                }
                ColIter::Logical { row, .. } => v[row as usize] -= val,
            }
        }
        self.ftran(&mut v);
        self.x_basic = v;
    }

    fn infeasibility(&self, j: usize, value: f64) -> f64 {
        let tol_lo = self.feas_tol * (1.0 + self.lo[j].abs());
        let tol_up = self.feas_tol * (1.0 + self.up[j].abs());
        if value < self.lo[j] - tol_lo {
            self.lo[j] - value
        } else if value > self.up[j] + tol_up {
            -(value - self.up[j])
        } else {
            0.0
        }
    }

    fn total_infeasibility(&self) -> f64 {
        (0..self.m)
            .map(|r| self.infeasibility(self.basic_in_row[r], self.x_basic[r]).abs())
            .sum()
    }

    fn timed_out(&self) -> bool {
        match self.deadline {
            Some(d) => Instant::now() >= d,
            None => false,
        }
    }

    /// Runs the given phase until it reaches its end condition.
    fn iterate(&mut self, phase_one: bool, iter_cap: u64) -> LpStatus {
        let mut stall: u64 = 0;
        let mut last_obj = f64::INFINITY;
        loop {
            if self.iterations >= iter_cap {
                return LpStatus::Stalled;
            }
            if self.iterations % 512 == 0 && self.timed_out() {
                return LpStatus::TimedOut;
            }
            if self.pivots_since_refactor >= REFACTOR_EVERY {
                self.refactor();
            }

            // Phase objective and costs on the basic variables.
            let obj_now = if phase_one {
                let t = self.total_infeasibility();
                if t <= self.feas_tol {
                    return LpStatus::Optimal;
                }
                t
            } else {
                (0..self.n + self.m)
                    .map(|j| {
                        self.cost[j]
                            * match self.status[j] {
                                Status::Basic => 0.0,
                                _ => self.nonbasic_value(j),
                            }
                    })
                    .sum::<f64>()
                    + (0..self.m)
                        .map(|r| self.cost[self.basic_in_row[r]] * self.x_basic[r])
                        .sum::<f64>()
            };
            if obj_now < last_obj - 1e-12 * (1.0 + obj_now.abs()) {
                last_obj = obj_now;
                stall = 0;
                self.bland = false;
            } else {
                stall += 1;
                if stall > STALL_LIMIT {
                    return LpStatus::Stalled;
                }
                if stall > STALL_TO_BLAND {
                    self.bland = true;
                }
            }

            // y = B^-T c_B for the phase costs.
            self.y.iter_mut().for_each(|v| *v = 0.0);
            let mut any_cost = false;
            for r in 0..self.m {
                let j = self.basic_in_row[r];
                let c = if phase_one {
                    let inf = self.infeasibility(j, self.x_basic[r]);
                    if inf > 0.0 {
                        -1.0
                    } else if inf < 0.0 {
                        1.0
                    } else {
                        0.0
                    }
                } else {
                    self.cost[j]
                };
                if c != 0.0 {
                    self.y[r] = c;
                    any_cost = true;
                }
            }
            if any_cost {
                let mut y = std::mem::take(&mut self.y);
                self.btran(&mut y);
                self.y = y;
            }

            // Pricing.
            let mut enter = usize::MAX;
            let mut enter_dir = 1.0;
            let mut best_score = DJ_TOL;
            for j in 0..self.n + self.m {
                if self.status[j] == Status::Basic || self.lo[j] == self.up[j] {
                    continue;
                }
                let cj = if phase_one { 0.0 } else { self.cost[j] };
                let mut dj = cj;
                if any_cost {
                    match self.column(j) {
                        ColIter::Structural { rows, vals, .. } => {
                            let mut dot = 0.0;
                            for (&r, &a) in rows.iter().zip(vals) {
                                dot += a * self.y[r as usize];
                            }
                            dj -= dot;
                        }
                        ColIter::Logical { row, .. } => dj -= self.y[row as usize],
                    }
                }
                let (eligible, dir) = match self.status[j] {
                    Status::AtLower => (dj < -DJ_TOL, 1.0),
                    Status::AtUpper => (dj > DJ_TOL, -1.0),
                    Status::FreeZero => {
                        if dj < -DJ_TOL {
                            (true, 1.0)
                        } else {
                            (dj > DJ_TOL, -1.0)
                        }
                    }
                    Status::Basic => unreachable!(),
                };
                if !eligible {
                    continue;
                }
                if self.bland {
                    enter = j;
                    enter_dir = dir;
                    break;
                }
                if dj.abs() > best_score {
                    best_score = dj.abs();
                    enter = j;
                    enter_dir = dir;
                }
            }
            if enter == usize::MAX {
                return if phase_one {
                    if self.total_infeasibility() <= self.feas_tol * (1.0 + self.m as f64) {
                        LpStatus::Optimal
                    } else {
                        LpStatus::Infeasible
                    }
                } else {
                    LpStatus::Optimal
                };
            }

            // w = B^-1 A_enter.
            let mut w = std::mem::take(&mut self.work);
            w.iter_mut().for_each(|v| *v = 0.0);
            match self.column(enter) {
                ColIter::Structural { rows, vals, .. } => {
                    for (&r, &a) in rows.iter().zip(vals) {
                        w[r as usize] = a;
                    }
                }
                ColIter::Logical { row, .. } => w[row as usize] = 1.0,
            }
            self.ftran(&mut w);

            // Ratio test.
            let mut t_best = f64::INFINITY;
            let mut leave_row = usize::MAX;
            let mut leave_to_upper = false;
            for r in 0..self.m {
                let wr = w[r];
                if wr.abs() <= PIVOT_TOL {
                    continue;
                }
                let rate = -enter_dir * wr;
                let j = self.basic_in_row[r];
                let x = self.x_basic[r];
                let inf = self.infeasibility(j, x);
                let (t, to_upper) = if inf > 0.0 {
                    // below lower bound
                    if rate > 0.0 {
                        ((self.lo[j] - x) / rate, false)
                    } else {
                        continue;
                    }
                } else if inf < 0.0 {
                    // above upper bound
                    if rate < 0.0 {
                        ((x - self.up[j]) / -rate, true)
                    } else {
                        continue;
                    }
                } else if rate > 0.0 {
                    if self.up[j].is_finite() {
                        (((self.up[j] - x) / rate).max(0.0), true)
                    } else {
                        continue;
                    }
                } else if self.lo[j].is_finite() {
                    (((x - self.lo[j]) / -rate).max(0.0), false)
                } else {
                    continue;
                };
                let better = if self.bland {
                    t < t_best - 1e-12
                        || (t <= t_best + 1e-12
                            && (leave_row == usize::MAX || j < self.basic_in_row[leave_row]))
                } else {
                    t < t_best - 1e-12
                        || (t <= t_best + 1e-12
                            && (leave_row == usize::MAX || wr.abs() > w[leave_row].abs()))
                };
                if better {
                    t_best = t.max(0.0);
                    leave_row = r;
                    leave_to_upper = to_upper;
                }
            }
            // The entering variable blocks itself at its opposite bound.
            let span = self.up[enter] - self.lo[enter];
            let self_blocks = span.is_finite() && span < t_best;
            if self_blocks {
                t_best = span;
                leave_row = usize::MAX;
            }
            if t_best.is_infinite() {
                self.work = w;
                return if phase_one {
                    LpStatus::Stalled
                } else {
                    LpStatus::Unbounded
                };
            }

            // Apply the step.
            if t_best != 0.0 {
                for r in 0..self.m {
                    if w[r] != 0.0 {
                        self.x_basic[r] -= enter_dir * t_best * w[r];
                    }
                }
            }
            if leave_row == usize::MAX {
                // Bound flip.
                self.status[enter] = match self.status[enter] {
                    Status::AtLower => Status::AtUpper,
                    Status::AtUpper => Status::AtLower,
                    other => other,
                };
            } else {
                let leaving = self.basic_in_row[leave_row];
                self.status[leaving] = if leave_to_upper {
                    Status::AtUpper
                } else {
                    Status::AtLower
                };
                let enter_val = match self.status[enter] {
                    Status::AtLower => self.lo[enter],
                    Status::AtUpper => self.up[enter],
                    Status::FreeZero => 0.0,
                    Status::Basic => unreachable!(),
                } + enter_dir * t_best;
                self.status[enter] = Status::Basic;
                self.basic_in_row[leave_row] = enter;
                self.x_basic[leave_row] = enter_val;
                let nz: Vec<(u32, f64)> = w
                    .iter()
                    .enumerate()
                    .filter(|&(r, &a)| r != leave_row && a != 0.0)
                    .map(|(r, &a)| (r as u32, a))
                    .collect();
                self.etas.push(Eta {
                    pivot_row: leave_row as u32,
                    pivot_val: w[leave_row],
                    nz,
                });
                self.pivots_since_refactor += 1;
            }
            self.work = w;
            self.iterations += 1;
        }
    }

    pub(crate) fn solve(mut self) -> LpOutcome {
        let iter_cap = 20_000 + 200 * (self.m as u64 + self.n as u64);
        self.refactor();
        let mut rounds = 0;
        let status = loop {
            rounds += 1;
            if rounds > 6 {
                break LpStatus::Stalled;
            }
            if self.total_infeasibility() > self.feas_tol {
                let s = self.iterate(true, iter_cap);
                if s != LpStatus::Optimal {
                    break s;
                }
            }
            let s = self.iterate(false, iter_cap);
            if s != LpStatus::Optimal {
                break s;
            }
            // Recompute from a fresh factorization and re-verify: numerical
            // drift sends us back around, never out with a wrong answer.
            self.refactor();
            if self.total_infeasibility() <= self.feas_tol * (1.0 + self.m as f64) {
                break LpStatus::Optimal;
            }
        };
        self.outcome(status)
    }

    fn outcome(mut self, status: LpStatus) -> LpOutcome {
        let mut x = vec![0.0; self.n];
        for (j, xj) in x.iter_mut().enumerate() {
            *xj = match self.status[j] {
                Status::Basic => 0.0,
                _ => self.nonbasic_value(j),
            };
        }
        for r in 0..self.m {
            let j = self.basic_in_row[r];
            if j < self.n {
                x[j] = self.x_basic[r];
            }
        }
        let obj: f64 = (0..self.n).map(|j| self.cost[j] * x[j]).sum();

        // Dual objective from y and the reduced costs at the final basis.
        let mut dual_obj = 0.0;
        if status == LpStatus::Optimal {
            self.y.iter_mut().for_each(|v| *v = 0.0);
            let mut any = false;
            for r in 0..self.m {
                let c = self.cost[self.basic_in_row[r]];
                if c != 0.0 {
                    self.y[r] = c;
                    any = true;
                }
            }
            if any {
                let mut y = std::mem::take(&mut self.y);
                self.btran(&mut y);
                self.y = y;
            }
            for r in 0..self.m {
                dual_obj += self.y[r] * self.rhs[r];
            }
            for j in 0..self.n + self.m {
                if self.status[j] == Status::Basic {
                    continue;
                }
                let val = self.nonbasic_value(j);
                if val == 0.0 {
                    continue;
                }
                let mut dj = self.cost[j];
                match self.column(j) {
                    ColIter::Structural { rows, vals, .. } => {
                        for (&r, &a) in rows.iter().zip(vals) {
                            dj -= a * self.y[r as usize];
                        }
                    }
                    ColIter::Logical { row, .. } => dj -= self.y[row as usize],
                }
                dual_obj += dj * val;
            }
        }

        let mut col_status = vec![Status::AtLower; self.n];
        col_status.copy_from_slice(&self.status[..self.n]);
        let mut row_status = vec![Status::Basic; self.inst.rows.len()];
        for (k, &r) in self.active.iter().enumerate() {
            row_status[r] = self.status[self.n + k];
        }
        LpOutcome {
            status,
            x,
            obj,
            dual_obj,
            iterations: self.iterations,
            basis: BasisSnapshot {
                col_status,
                row_status,
            },
        }
    }
}

fn nearest_bound_status(lo: f64, up: f64) -> Status {
    if lo.is_finite() {
        Status::AtLower
    } else if up.is_finite() {
        Status::AtUpper
    } else {
        Status::FreeZero
    }
}

/// Clamp a warm status to something valid for the variable's bounds.
fn normalize_nonbasic(s: Status, lo: f64, up: f64) -> Status {
    match s {
        Status::Basic => Status::Basic,
        Status::AtLower if lo.is_finite() => Status::AtLower,
        Status::AtUpper if up.is_finite() => Status::AtUpper,
        _ => nearest_bound_status(lo, up),
    }
}

enum ColIter<'a> {
    Structural { rows: &'a [u32], vals: &'a [f64] },
    Logical { row: u32 },
}
