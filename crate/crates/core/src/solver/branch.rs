//! Branch-and-bound over the prepared instance.
//!
//! Node LPs run over a growing active subset of rows: a row joins the subset
//! once some LP optimum violates it, which keeps the working basis small even
//! though the non-overlap families are quadratic in the demand count. Any row
//! activated for one node stays active for the rest of the search (always
//! sound: node LPs are relaxations until no inactive row is violated).

use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::time::{Duration, Instant};

use crate::milp::MilpProblem;

use super::instance::{prepare, Instance, Prepared};
use super::simplex::{BasisSnapshot, LpStatus, Simplex};
use super::{NodeSelection, SolveError, SolveOptions, SolveResult, SolveStatus};

struct Searcher<'a> {
    inst: &'a Instance,
    options: &'a SolveOptions,
    deadline: Instant,
    active: Vec<bool>,
    active_list: Vec<usize>,
    iterations: u64,
    warm: Option<BasisSnapshot>,
}

struct LpSolved {
    x: Vec<f64>,
    obj: f64,
    dual_obj: f64,
}

enum LpEnd {
    Solved(LpSolved),
    Infeasible,
    Unbounded,
    TimedOut,
    Failed(String),
}

impl<'a> Searcher<'a> {
    fn new(inst: &'a Instance, options: &'a SolveOptions, deadline: Instant) -> Self {
        // Start with the rows that are almost always binding: equalities and
        // anything cheap (small rows). The rest activate on demand.
        let mut active = vec![false; inst.rows.len()];
        let mut active_list = Vec::new();
        for (r, row) in inst.rows.iter().enumerate() {
            if row.sense == crate::milp::Sense::Eq || inst.rows.len() <= 512 {
                active[r] = true;
                active_list.push(r);
            }
        }
        Searcher {
            inst,
            options,
            deadline,
            active,
            active_list,
            iterations: 0,
            warm: None,
        }
    }

    /// Solves the LP over the current bounds, expanding the active row set
    /// until no inactive row is violated.
    fn solve_lp(&mut self, lower: &[f64], upper: &[f64]) -> LpEnd {
        loop {
            let sx = Simplex::new(
                self.inst,
                &self.active_list,
                lower,
                upper,
                self.warm.as_ref(),
                self.options.feas_tol,
                Some(self.deadline),
            );
            let out = sx.solve();
            self.iterations += out.iterations;
            match out.status {
                LpStatus::Optimal => {
                    self.warm = Some(out.basis);
                    let mut newly = 0usize;
                    for (r, row) in self.inst.rows.iter().enumerate() {
                        if !self.active[r]
                            && row.violation(&out.x) > self.options.feas_tol * 10.0
                        {
                            self.active[r] = true;
                            self.active_list.push(r);
                            newly += 1;
                        }
                    }
                    if newly == 0 {
                        return LpEnd::Solved(LpSolved {
                            x: out.x,
                            obj: out.obj,
                            dual_obj: out.dual_obj,
                        });
                    }
                    self.active_list.sort_unstable();
                }
                LpStatus::Infeasible => return LpEnd::Infeasible,
                LpStatus::Unbounded => {
                    // A missing row may bound the ray; activate everything
                    // once before declaring the problem unbounded.
                    if self.active_list.len() < self.inst.rows.len() {
                        for r in 0..self.inst.rows.len() {
                            if !self.active[r] {
                                self.active[r] = true;
                                self.active_list.push(r);
                            }
                        }
                        self.active_list.sort_unstable();
                    } else {
                        return LpEnd::Unbounded;
                    }
                }
                LpStatus::TimedOut => return LpEnd::TimedOut,
                LpStatus::Stalled => {
                    return LpEnd::Failed(format!(
                        "simplex stalled on {} active rows",
                        self.active_list.len()
                    ))
                }
            }
        }
    }

    fn fractional_var(&self, x: &[f64]) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64)> = None;
        for j in 0..self.inst.n {
            if !self.inst.is_int[j] {
                continue;
            }
            let frac = x[j] - x[j].floor();
            let dist = frac.min(1.0 - frac);
            if dist > self.options.int_tol {
                match best {
                    Some((_, d)) if d >= dist => {}
                    _ => best = Some((j, dist)),
                }
            }
        }
        best
    }

    /// Round-and-fix dive from the root relaxation; produces an early
    /// incumbent so timeouts still return something useful.
    fn dive(&mut self, root_x: &[f64], lower: &[f64], upper: &[f64]) -> Option<(Vec<f64>, f64)> {
        let mut lo = lower.to_vec();
        let mut up = upper.to_vec();
        let mut x = root_x.to_vec();
        for _ in 0..60 {
            // Pin every integral integer variable at its current value and
            // round the most fractional one.
            for j in 0..self.inst.n {
                if !self.inst.is_int[j] {
                    continue;
                }
                let v = x[j].round();
                if (x[j] - v).abs() <= self.options.int_tol && lo[j] != up[j] {
                    let v = v.clamp(lo[j], up[j]);
                    lo[j] = v;
                    up[j] = v;
                }
            }
            let (j, _) = match self.fractional_var(&x) {
                Some(f) => f,
                None => {
                    let obj: f64 = (0..self.inst.n).map(|j| self.inst.obj[j] * x[j]).sum();
                    return Some((x, obj));
                }
            };
            let v = x[j].round().clamp(lo[j], up[j]);
            lo[j] = v;
            up[j] = v;
            match self.solve_lp(&lo, &up) {
                LpEnd::Solved(sol) => x = sol.x,
                _ => return None,
            }
        }
        None
    }
}

#[derive(Debug)]
struct Node {
    parent: usize,
    /// Bound change relative to the parent: (column, lower, upper).
    change: Option<(usize, f64, f64)>,
    bound: f64,
}

/// Min-heap key ordered by bound then insertion id.
#[derive(PartialEq)]
struct HeapKey(f64, u64, usize);
impl Eq for HeapKey {}
impl PartialOrd for HeapKey {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for HeapKey {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0
            .total_cmp(&other.0)
            .then(self.1.cmp(&other.1))
    }
}

pub(super) fn solve(
    problem: &MilpProblem,
    options: &SolveOptions,
    relax_integrality: bool,
) -> Result<SolveResult, SolveError> {
    let start = Instant::now();
    let deadline = start + Duration::from_secs_f64(options.time_limit_s.min(1e9));
    let inst = match prepare(problem, relax_integrality) {
        Prepared::Ready(inst) => inst,
        Prepared::Infeasible => {
            return Ok(SolveResult {
                status: SolveStatus::Infeasible,
                values: Vec::new(),
                objective: None,
                best_bound: f64::INFINITY,
                node_count: 0,
                simplex_iterations: 0,
                wall_time_s: start.elapsed().as_secs_f64(),
            })
        }
    };
    let mut search = Searcher::new(&inst, options, deadline);

    let root_lower = inst.lower.clone();
    let root_upper = inst.upper.clone();

    let finish = |status: SolveStatus,
                  values: Vec<f64>,
                  objective: Option<f64>,
                  best_bound: f64,
                  nodes: u64,
                  iterations: u64| SolveResult {
        status,
        values,
        objective,
        best_bound,
        node_count: nodes,
        simplex_iterations: iterations,
        wall_time_s: start.elapsed().as_secs_f64(),
    };

    // Root relaxation.
    let root = match search.solve_lp(&root_lower, &root_upper) {
        LpEnd::Solved(sol) => sol,
        LpEnd::Infeasible => {
            return Ok(finish(
                SolveStatus::Infeasible,
                Vec::new(),
                None,
                f64::INFINITY,
                1,
                search.iterations,
            ))
        }
        LpEnd::Unbounded => {
            return Ok(finish(
                SolveStatus::Unbounded,
                Vec::new(),
                None,
                f64::NEG_INFINITY,
                1,
                search.iterations,
            ))
        }
        LpEnd::TimedOut => {
            return Ok(finish(
                SolveStatus::FeasibleTimeout,
                Vec::new(),
                None,
                f64::NEG_INFINITY,
                1,
                search.iterations,
            ))
        }
        LpEnd::Failed(msg) => return Err(SolveError::Numerical(msg)),
    };

    if relax_integrality {
        let values = inst.expand(&root.x);
        let obj = root.obj + inst.obj_offset;
        return Ok(finish(
            SolveStatus::Optimal,
            values,
            Some(obj),
            root.dual_obj + inst.obj_offset,
            1,
            search.iterations,
        ));
    }

    let mut incumbent: Option<(Vec<f64>, f64)> = None;
    let gap_slack = |inc: f64| options.mip_gap * inc.abs().max(1.0);

    if search.fractional_var(&root.x).is_none() {
        // Root already integral.
        let obj = root.obj;
        return Ok(finish(
            SolveStatus::Optimal,
            inst.expand(&root.x),
            Some(obj + inst.obj_offset),
            obj + inst.obj_offset,
            1,
            search.iterations,
        ));
    }

    // Early incumbent from a rounding dive.
    if let Some((x, obj)) = search.dive(&root.x, &root_lower, &root_upper) {
        incumbent = Some((x, obj));
    }

    let mut nodes: Vec<Node> = vec![Node {
        parent: usize::MAX,
        change: None,
        bound: root.obj,
    }];
    let mut heap: BinaryHeap<Reverse<HeapKey>> = BinaryHeap::new();
    let mut stack: Vec<usize> = Vec::new();
    let mut seq: u64 = 0;
    match options.node_selection {
        NodeSelection::BestBound => heap.push(Reverse(HeapKey(root.obj, seq, 0))),
        NodeSelection::DepthFirst => stack.push(0),
    }

    let mut node_count: u64 = 0;
    let mut pruned_bound = f64::INFINITY;
    let mut timed_out = false;
    let mut lo_buf = root_lower.clone();
    let mut up_buf = root_upper.clone();
    let mut chain: Vec<usize> = Vec::new();

    loop {
        let node_id = match options.node_selection {
            NodeSelection::BestBound => match heap.pop() {
                Some(Reverse(HeapKey(_, _, id))) => id,
                None => break,
            },
            NodeSelection::DepthFirst => match stack.pop() {
                Some(id) => id,
                None => break,
            },
        };
        if Instant::now() >= deadline {
            // Count the unexplored node's bound so the reported bound is valid.
            pruned_bound = pruned_bound.min(nodes[node_id].bound);
            timed_out = true;
            break;
        }
        if let Some((_, inc_obj)) = incumbent {
            if nodes[node_id].bound >= inc_obj - gap_slack(inc_obj) {
                pruned_bound = pruned_bound.min(nodes[node_id].bound);
                continue;
            }
        }
        node_count += 1;

        // Materialize bounds by walking the parent chain.
        lo_buf.copy_from_slice(&root_lower);
        up_buf.copy_from_slice(&root_upper);
        chain.clear();
        let mut cur = node_id;
        while cur != usize::MAX {
            chain.push(cur);
            cur = nodes[cur].parent;
        }
        for &id in chain.iter().rev() {
            if let Some((col, lo, up)) = nodes[id].change {
                lo_buf[col] = lo_buf[col].max(lo);
                up_buf[col] = up_buf[col].min(up);
            }
        }

        let sol = match search.solve_lp(&lo_buf, &up_buf) {
            LpEnd::Solved(sol) => sol,
            LpEnd::Infeasible => continue,
            LpEnd::Unbounded => {
                return Err(SolveError::Numerical(
                    "node relaxation unbounded below an optimal parent".into(),
                ))
            }
            LpEnd::TimedOut => {
                pruned_bound = pruned_bound.min(nodes[node_id].bound);
                timed_out = true;
                break;
            }
            LpEnd::Failed(msg) => return Err(SolveError::Numerical(msg)),
        };
        if let Some((_, inc_obj)) = incumbent {
            if sol.obj >= inc_obj - gap_slack(inc_obj) {
                pruned_bound = pruned_bound.min(sol.obj);
                continue;
            }
        }
        match search.fractional_var(&sol.x) {
            None => {
                let better = match &incumbent {
                    Some((_, best)) => sol.obj < *best,
                    None => true,
                };
                if better {
                    incumbent = Some((sol.x, sol.obj));
                }
            }
            Some((col, _)) => {
                let frac = sol.x[col] - sol.x[col].floor();
                let floor = sol.x[col].floor();
                let down = Node {
                    parent: node_id,
                    change: Some((col, f64::NEG_INFINITY, floor)),
                    bound: sol.obj,
                };
                let up = Node {
                    parent: node_id,
                    change: Some((col, floor + 1.0, f64::INFINITY)),
                    bound: sol.obj,
                };
                // Explore the side nearer the fractional value first.
                let (first, second) = if frac >= 0.5 { (up, down) } else { (down, up) };
                let first_id = nodes.len();
                nodes.push(first);
                let second_id = nodes.len();
                nodes.push(second);
                match options.node_selection {
                    NodeSelection::BestBound => {
                        seq += 1;
                        heap.push(Reverse(HeapKey(sol.obj, seq, first_id)));
                        seq += 1;
                        heap.push(Reverse(HeapKey(sol.obj, seq, second_id)));
                    }
                    NodeSelection::DepthFirst => {
                        stack.push(second_id);
                        stack.push(first_id);
                    }
                }
            }
        }
    }

    // Remaining open nodes bound the optimum from below.
    for Reverse(HeapKey(bound, _, _)) in heap.iter() {
        pruned_bound = pruned_bound.min(*bound);
    }
    for &id in &stack {
        pruned_bound = pruned_bound.min(nodes[id].bound);
    }

    let iterations = search.iterations;
    match incumbent {
        Some((x, obj)) => {
            let values = inst.expand(&x);
            let objective = obj + inst.obj_offset;
            if timed_out {
                let bound = pruned_bound.min(obj) + inst.obj_offset;
                Ok(finish(
                    SolveStatus::FeasibleTimeout,
                    values,
                    Some(objective),
                    bound,
                    node_count,
                    iterations,
                ))
            } else {
                let bound = pruned_bound.min(obj) + inst.obj_offset;
                Ok(finish(
                    SolveStatus::Optimal,
                    values,
                    Some(objective),
                    bound,
                    node_count,
                    iterations,
                ))
            }
        }
        None => {
            if timed_out {
                let bound = if pruned_bound.is_finite() {
                    pruned_bound + inst.obj_offset
                } else {
                    f64::NEG_INFINITY
                };
                Ok(finish(
                    SolveStatus::FeasibleTimeout,
                    Vec::new(),
                    None,
                    bound,
                    node_count,
                    iterations,
                ))
            } else {
                // Search exhausted with no integral point.
                Ok(finish(
                    SolveStatus::Infeasible,
                    Vec::new(),
                    None,
                    f64::INFINITY,
                    node_count,
                    iterations,
                ))
            }
        }
    }
}
