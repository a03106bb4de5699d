//! Recursive solving: order the demand set, split it into subsets, and solve
//! the growing instance with earlier subsets pinned to their assignments.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::milp::MilpProblem;
use crate::model::{self, DemandAssignment, FeatureConfig, ModelError, VariableLayout};
use crate::network::{self, Demand, NetworkError, Topology};
use crate::solution::Solution;
use crate::solver::{self, SolveError, SolveOptions, SolveResult, SolveStatus};

#[derive(Debug, Error)]
pub enum RecursiveError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Solver(#[from] SolveError),
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error("iteration {iteration}: {status:?} (no usable assignment)")]
    IterationFailed {
        iteration: usize,
        status: SolveStatus,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OrderingScheme {
    Random { seed: u64 },
    RateDescending,
    RateAscending,
    ShortestPathAscending,
    ShortestPathDescending,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RecursivePlan {
    pub ordering: OrderingScheme,
    pub subset_size: usize,
}

impl RecursivePlan {
    pub fn new(ordering: OrderingScheme, subset_size: usize) -> Self {
        RecursivePlan {
            ordering,
            subset_size: subset_size.max(1),
        }
    }
}

/// Per-iteration record of a recursive solve.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TraceRow {
    pub iteration: usize,
    /// Demand ids newly assigned this iteration.
    pub subset: Vec<usize>,
    /// Spectrum roof after this iteration.
    pub cumulative_c: f64,
    pub cumulative_time_s: f64,
    pub status: SolveStatus,
    pub nodes: u64,
    pub simplex_iterations: u64,
    /// Free-demand model accounting (paper-style view that counts only the
    /// demands still being optimized): variables and constraints.
    pub free_variables: usize,
    pub free_constraints: usize,
    /// Full model size including pinned demands.
    pub total_variables: usize,
    pub total_constraints: usize,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct RecursiveTrace {
    pub rows: Vec<TraceRow>,
}

impl RecursiveTrace {
    /// Spec'd CSV rendering: `iter,subset,c,cum_time_s,status`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("iter,subset,c,cum_time_s,status\n");
        for r in &self.rows {
            let subset = r
                .subset
                .iter()
                .map(|id| id.to_string())
                .collect::<Vec<_>>()
                .join(";");
            out.push_str(&format!(
                "{},{},{:.6},{:.3},{:?}\n",
                r.iteration, subset, r.cumulative_c, r.cumulative_time_s, r.status
            ));
        }
        out
    }
}

/// Stable deterministic demand ordering (ties by demand id).
pub fn order_demands(
    demands: &[Demand],
    topology: &Topology,
    scheme: OrderingScheme,
) -> Result<Vec<Demand>, RecursiveError> {
    let mut ordered: Vec<Demand> = demands.to_vec();
    match scheme {
        OrderingScheme::Random { seed } => {
            ordered.sort_by_key(|d| d.id);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            ordered.shuffle(&mut rng);
        }
        OrderingScheme::RateDescending => {
            ordered.sort_by(|x, y| {
                y.rate_gbps
                    .total_cmp(&x.rate_gbps)
                    .then(x.id.cmp(&y.id))
            });
        }
        OrderingScheme::RateAscending => {
            ordered.sort_by(|x, y| {
                x.rate_gbps
                    .total_cmp(&y.rate_gbps)
                    .then(x.id.cmp(&y.id))
            });
        }
        OrderingScheme::ShortestPathAscending | OrderingScheme::ShortestPathDescending => {
            let mut keyed: Vec<(f64, Demand)> = Vec::with_capacity(demands.len());
            for d in &ordered {
                let sp = network::shortest_path_length(topology, d.source, d.target)?;
                keyed.push((sp, d.clone()));
            }
            keyed.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.id.cmp(&y.1.id)));
            if matches!(scheme, OrderingScheme::ShortestPathDescending) {
                keyed.sort_by(|x, y| y.0.total_cmp(&x.0).then(x.1.id.cmp(&y.1.id)));
            }
            ordered = keyed.into_iter().map(|(_, d)| d).collect();
        }
    }
    Ok(ordered)
}

/// Contiguous chunks of at most `subset_size` demands; the last chunk may be
/// smaller.
pub fn partition(ordered: &[Demand], subset_size: usize) -> Vec<Vec<Demand>> {
    let size = subset_size.max(1);
    ordered.chunks(size).map(|c| c.to_vec()).collect()
}

/// Solves the instance in ordered subsets; iteration `k` rebuilds the model
/// over every demand seen so far with iterations `1..k` pinned.
pub fn solve_recursive(
    topology: &Topology,
    demands: &[Demand],
    config: &FeatureConfig,
    plan: &RecursivePlan,
    options: &SolveOptions,
) -> Result<(Solution, RecursiveTrace), RecursiveError> {
    solve_recursive_seeded(topology, demands, config, plan, options, &[])
}

/// Network-expansion variant: `base` holds demands already deployed with
/// their existing assignments, treated as iteration zero.
pub fn solve_recursive_seeded(
    topology: &Topology,
    demands: &[Demand],
    config: &FeatureConfig,
    plan: &RecursivePlan,
    options: &SolveOptions,
    base: &[(Demand, crate::solution::DemandSolution)],
) -> Result<(Solution, RecursiveTrace), RecursiveError> {
    let ordered = order_demands(demands, topology, plan.ordering)?;
    let subsets = partition(&ordered, plan.subset_size);

    // Demands in model order: base first, then subsets as they join.
    let mut active: Vec<Demand> = base.iter().map(|(d, _)| d.clone()).collect();
    let mut assignments: Vec<DemandAssignment> = base
        .iter()
        .enumerate()
        .map(|(pos, (_, ds))| DemandAssignment::from_solution(pos, ds))
        .collect();

    let mut trace = RecursiveTrace::default();
    let mut cum_time = 0.0;
    let mut last: Option<(Solution, VariableLayout, Vec<Demand>)> = None;

    for (iteration, subset) in subsets.iter().enumerate() {
        active.extend(subset.iter().cloned());
        let (problem, layout) = model::build(topology, &active, config)?;
        let pinned = model::fix_assignments(&problem, topology, &layout, &assignments)?;
        let result = solver::solve_milp(&pinned, options)?;
        cum_time += result.wall_time_s;
        let usable = matches!(result.status, SolveStatus::Optimal)
            || (matches!(result.status, SolveStatus::FeasibleTimeout)
                && !result.values.is_empty());
        if !usable {
            return Err(RecursiveError::IterationFailed {
                iteration,
                status: result.status,
            });
        }
        let solution =
            model::extract_solution(topology, &active, config, &layout, &result.values)?;
        let (free_v, free_c) = free_view_counts(&pinned, &layout, assignments.len());
        trace.rows.push(TraceRow {
            iteration,
            subset: subset.iter().map(|d| d.id).collect(),
            cumulative_c: solution.spectrum_peak,
            cumulative_time_s: cum_time,
            status: result.status,
            nodes: result.node_count,
            simplex_iterations: result.simplex_iterations,
            free_variables: free_v,
            free_constraints: free_c,
            total_variables: pinned.stats().variables,
            total_constraints: pinned.stats().constraints,
        });
        // Pin everything solved so far for the next iteration.
        assignments = solution
            .demands
            .iter()
            .enumerate()
            .map(|(pos, ds)| DemandAssignment::from_solution(pos, ds))
            .collect();
        last = Some((solution, layout, active.clone()));
    }

    let (solution, _, _) = last.expect("at least one iteration");
    Ok((solution, trace))
}

/// Paper-style per-iteration accounting that treats pinned demands as
/// constants: counts variables owned by free demands (the shared spectrum
/// roof excluded) and constraints touching only free demands.
fn free_view_counts(
    problem: &MilpProblem,
    layout: &VariableLayout,
    fixed_count: usize,
) -> (usize, usize) {
    let nd = layout.demand_count;
    let free: Vec<usize> = (fixed_count..nd).collect();
    let mut vars = 0usize;
    for &a in &free {
        if !layout.f_demand.is_empty() {
            vars += 1;
        } else {
            vars += layout.f_link[a].len();
        }
        if !layout.inv_eta_demand.is_empty() {
            vars += 1;
        } else if !layout.inv_eta_link.is_empty() {
            vars += layout.inv_eta_link[a].len();
        }
        vars += layout.v[a].len();
        if !layout.delta_pair.is_empty() {
            // Ordering binaries against the free demands only (self included).
            vars += free.len();
        }
        if !layout.y.is_empty() {
            vars += layout.y[a].len() + layout.u[a].len();
        }
        if !layout.w.is_empty() {
            vars += layout.w[a].len();
        }
        if !layout.x.is_empty() {
            vars += layout.x[a].len();
        }
        if !layout.i_node_demand.is_empty() {
            vars += layout.i_node_demand[a].len();
        }
    }
    if !layout.delta_link_pair.is_empty() {
        vars += layout
            .delta_link_pair
            .keys()
            .filter(|&&(_, a, b)| a >= fixed_count && b >= fixed_count)
            .count();
    }

    // Constraints whose every demand tag refers to a free demand.
    let is_free_tag = |name: &str| -> bool {
        let mut all_free = true;
        let mut any = false;
        for piece in name.split('_') {
            if let Some(num) = piece.strip_prefix('d') {
                if let Ok(idx) = num.parse::<usize>() {
                    any = true;
                    if idx < fixed_count {
                        all_free = false;
                    }
                }
            }
        }
        any && all_free
    };
    let cons = problem
        .constraints()
        .iter()
        .filter(|c| is_free_tag(&c.name))
        .count();
    (vars, cons)
}
