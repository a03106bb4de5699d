//! Solver-independent feasibility checking and a brute-force optimum oracle
//! for tiny instances.
//!
//! The checker recomputes everything from the topology, demands and feature
//! configuration: routes must be simple source-to-destination paths, bands on
//! a shared link must be separated by the guard band, transparent segments
//! must respect the reach formula, frequency and efficiency must be constant
//! within a segment, the spectrum roof must cover every band, and circuit
//! usage must respect caps and site sets. Solver-internal auxiliaries are
//! never trusted.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{FeatureConfig, Modulation, Regeneration};
use crate::network::{Demand, Topology};
use crate::solution::Solution;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("instance too large for brute force: {0} route combinations exceed the cap {1}")]
    TooLarge(usize, usize),
    #[error("brute force requires fixed modulation without conversions")]
    UnsupportedFeatures,
    #[error("demand {0} has no admissible route")]
    NoRoute(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ViolationKind {
    Overlap,
    Reach,
    ContinuityFreq,
    ContinuityEta,
    Flow,
    Roof,
    CircuitCap,
}

/// One independent feasibility failure; `magnitude` is how far past the
/// tolerance the check landed, in the check's natural unit.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub demand: Option<usize>,
    pub other_demand: Option<usize>,
    pub link: Option<usize>,
    pub node: Option<usize>,
    pub magnitude: f64,
    pub detail: String,
}

/// Checks a solution against the instance; an empty result means feasible.
pub fn check(
    topology: &Topology,
    demands: &[Demand],
    config: &FeatureConfig,
    solution: &Solution,
    tolerance: f64,
) -> Vec<Violation> {
    let mut out = Vec::new();
    let (inv_lo, inv_hi) = config.modulation.inv_eta_bounds();
    let preselected = config.preselected_nodes(topology);
    let optimized = matches!(config.regeneration, Regeneration::Optimized);

    for (pos, (demand, ds)) in demands.iter().zip(&solution.demands).enumerate() {
        // (i) simple source->destination path.
        let mut node = demand.source;
        let mut seen = vec![demand.source];
        let mut broken = false;
        for &l in &ds.route {
            let link = topology.link(l);
            if link.source != node {
                broken = true;
                break;
            }
            node = link.target;
            if seen.contains(&node) {
                broken = true;
                break;
            }
            seen.push(node);
        }
        if broken || node != demand.target || ds.route.is_empty() {
            out.push(Violation {
                kind: ViolationKind::Flow,
                demand: Some(pos),
                other_demand: None,
                link: None,
                node: None,
                magnitude: 1.0,
                detail: format!("route of demand {pos} is not a simple path to its destination"),
            });
            continue;
        }

        // Efficiency values must respect the configured modulation.
        for (idx, &ie) in ds.inv_eta.iter().enumerate() {
            if ie < inv_lo - tolerance || ie > inv_hi + tolerance {
                out.push(Violation {
                    kind: ViolationKind::ContinuityEta,
                    demand: Some(pos),
                    other_demand: None,
                    link: Some(ds.route[idx]),
                    node: None,
                    magnitude: (ie - inv_hi).max(inv_lo - ie),
                    detail: format!(
                        "demand {pos}: inverse efficiency {ie} outside [{inv_lo}, {inv_hi}]"
                    ),
                });
            }
        }

        // Regeneration only at interior nodes of the route, at allowed sites.
        for &n in &ds.regen_nodes {
            let interior = ds.route.iter().skip(1).any(|&l| topology.link(l).source == n);
            let site_ok = if optimized {
                solution.regen_nodes.contains(&n)
            } else {
                preselected.binary_search(&n).is_ok()
            };
            if !interior || !site_ok {
                out.push(Violation {
                    kind: ViolationKind::CircuitCap,
                    demand: Some(pos),
                    other_demand: None,
                    link: None,
                    node: Some(n),
                    magnitude: 1.0,
                    detail: format!(
                        "demand {pos}: regeneration at node {n} which is not an allowed interior site"
                    ),
                });
            }
        }
        if config.regeneration.active() && !optimized {
            // Preselected sites on the path always regenerate.
            for &l in ds.route.iter().skip(1) {
                let n = topology.link(l).source;
                if preselected.binary_search(&n).is_ok() && !ds.regen_nodes.contains(&n) {
                    out.push(Violation {
                        kind: ViolationKind::Reach,
                        demand: Some(pos),
                        other_demand: None,
                        link: None,
                        node: Some(n),
                        magnitude: 1.0,
                        detail: format!(
                            "demand {pos}: preselected regeneration site {n} skipped on the route"
                        ),
                    });
                }
            }
        }

        // (iii)/(iv) segment reach and intra-segment continuity.
        if config.regeneration.active() {
            let mut seg_len = 0.0;
            let mut seg_f = ds.start_freq[0];
            let mut seg_ie = ds.inv_eta[0];
            for (idx, &l) in ds.route.iter().enumerate() {
                let link = topology.link(l);
                if idx > 0 && ds.regen_nodes.contains(&link.source) {
                    seg_len = 0.0;
                    seg_f = ds.start_freq[idx];
                    seg_ie = ds.inv_eta[idx];
                } else if idx > 0 {
                    if (ds.start_freq[idx] - seg_f).abs() > tolerance {
                        out.push(Violation {
                            kind: ViolationKind::ContinuityFreq,
                            demand: Some(pos),
                            other_demand: None,
                            link: Some(l),
                            node: Some(link.source),
                            magnitude: (ds.start_freq[idx] - seg_f).abs(),
                            detail: format!(
                                "demand {pos}: start frequency changes at node {} without regeneration",
                                link.source
                            ),
                        });
                    }
                    if (ds.inv_eta[idx] - seg_ie).abs() > tolerance {
                        out.push(Violation {
                            kind: ViolationKind::ContinuityEta,
                            demand: Some(pos),
                            other_demand: None,
                            link: Some(l),
                            node: Some(link.source),
                            magnitude: (ds.inv_eta[idx] - seg_ie).abs(),
                            detail: format!(
                                "demand {pos}: efficiency changes at node {} without regeneration",
                                link.source
                            ),
                        });
                    }
                }
                seg_len += link.length_km;
                let reach = config.reach.reach(demand.rate_gbps, ds.inv_eta[idx]).max(0.0);
                if seg_len > reach + tolerance {
                    out.push(Violation {
                        kind: ViolationKind::Reach,
                        demand: Some(pos),
                        other_demand: None,
                        link: Some(l),
                        node: None,
                        magnitude: seg_len - reach,
                        detail: format!(
                            "demand {pos}: transparent segment length {seg_len:.3} km exceeds reach {reach:.3} km"
                        ),
                    });
                }
            }
        } else {
            // Without regeneration the model imposes no reach constraint,
            // but conversions are impossible: everything must be constant.
            for idx in 1..ds.route.len() {
                if (ds.start_freq[idx] - ds.start_freq[0]).abs() > tolerance {
                    out.push(Violation {
                        kind: ViolationKind::ContinuityFreq,
                        demand: Some(pos),
                        other_demand: None,
                        link: Some(ds.route[idx]),
                        node: None,
                        magnitude: (ds.start_freq[idx] - ds.start_freq[0]).abs(),
                        detail: format!("demand {pos}: frequency varies without conversion"),
                    });
                }
                if (ds.inv_eta[idx] - ds.inv_eta[0]).abs() > tolerance {
                    out.push(Violation {
                        kind: ViolationKind::ContinuityEta,
                        demand: Some(pos),
                        other_demand: None,
                        link: Some(ds.route[idx]),
                        node: None,
                        magnitude: (ds.inv_eta[idx] - ds.inv_eta[0]).abs(),
                        detail: format!("demand {pos}: efficiency varies without conversion"),
                    });
                }
            }
        }

        // (v) spectrum roof.
        for (idx, &l) in ds.route.iter().enumerate() {
            let top = ds.start_freq[idx] + demand.rate_gbps * ds.inv_eta[idx];
            if top > solution.spectrum_peak + tolerance {
                out.push(Violation {
                    kind: ViolationKind::Roof,
                    demand: Some(pos),
                    other_demand: None,
                    link: Some(l),
                    node: None,
                    magnitude: top - solution.spectrum_peak,
                    detail: format!(
                        "demand {pos}: band top {top:.6} exceeds spectrum peak {:.6}",
                        solution.spectrum_peak
                    ),
                });
            }
            if ds.start_freq[idx] < -tolerance {
                out.push(Violation {
                    kind: ViolationKind::Roof,
                    demand: Some(pos),
                    other_demand: None,
                    link: Some(l),
                    node: None,
                    magnitude: -ds.start_freq[idx],
                    detail: format!("demand {pos}: negative start frequency"),
                });
            }
        }
    }

    // (ii) pairwise non-overlap with guard band, per link.
    let g = config.guard_band_ghz;
    for l in 0..topology.link_count() {
        for a in 0..solution.demands.len() {
            let band_a = solution.demands[a].band_on(l, demands[a].rate_gbps);
            let Some((lo_a, hi_a)) = band_a else { continue };
            for b in (a + 1)..solution.demands.len() {
                let band_b = solution.demands[b].band_on(l, demands[b].rate_gbps);
                let Some((lo_b, hi_b)) = band_b else { continue };
                let gap = if lo_a <= lo_b { lo_b - hi_a } else { lo_a - hi_b };
                if gap < g - tolerance {
                    out.push(Violation {
                        kind: ViolationKind::Overlap,
                        demand: Some(a),
                        other_demand: Some(b),
                        link: Some(l),
                        node: None,
                        magnitude: g - gap,
                        detail: format!(
                            "link {l}: demands {a} and {b} separated by {gap:.6} GHz, need {g}"
                        ),
                    });
                }
            }
        }
    }

    // (vi) circuit accounting.
    let mut usage = vec![0u32; topology.node_count()];
    for ds in &solution.demands {
        for &n in &ds.regen_nodes {
            usage[n] += 1;
        }
    }
    for n in 0..topology.node_count() {
        if usage[n] != *solution.circuits.get(n).unwrap_or(&0) {
            out.push(Violation {
                kind: ViolationKind::CircuitCap,
                demand: None,
                other_demand: None,
                link: None,
                node: Some(n),
                magnitude: (usage[n] as f64 - *solution.circuits.get(n).unwrap_or(&0) as f64).abs(),
                detail: format!(
                    "node {n}: recorded circuit usage {} disagrees with recomputed {}",
                    solution.circuits.get(n).unwrap_or(&0),
                    usage[n]
                ),
            });
        }
        if let Some(cap) = config.circuit_cap {
            if usage[n] > cap {
                out.push(Violation {
                    kind: ViolationKind::CircuitCap,
                    demand: None,
                    other_demand: None,
                    link: None,
                    node: Some(n),
                    magnitude: (usage[n] - cap) as f64,
                    detail: format!("node {n}: {} circuits used, cap {cap}", usage[n]),
                });
            }
        }
        if usage[n] > 0 && !solution.regen_nodes.contains(&n) {
            out.push(Violation {
                kind: ViolationKind::CircuitCap,
                demand: None,
                other_demand: None,
                link: None,
                node: Some(n),
                magnitude: usage[n] as f64,
                detail: format!("node {n}: circuits used but node not marked as a regeneration site"),
            });
        }
    }

    out
}

/// Exhaustive optimum of the spectrum roof for tiny instances with fixed
/// modulation and no conversions. Enumerates every combination of simple
/// routes and every stacking order of the demands, computing the minimal
/// roof by greedy interval stacking; regeneration (when configured) filters
/// routes whose transparent segments exceed the reach.
pub fn brute_force_optimum(
    topology: &Topology,
    demands: &[Demand],
    config: &FeatureConfig,
    combination_cap: usize,
) -> Result<(f64, Vec<Vec<usize>>), OracleError> {
    let eta = match config.modulation {
        Modulation::Fixed { eta } => eta,
        Modulation::Range { .. } => return Err(OracleError::UnsupportedFeatures),
    };
    if config.wavelength_conversion
        || config.modulation_conversion
        || matches!(config.regeneration, Regeneration::Optimized)
    {
        return Err(OracleError::UnsupportedFeatures);
    }
    let inv_eta = 1.0 / eta;
    let preselected = config.preselected_nodes(topology);

    // All simple paths per demand, reach-filtered.
    let mut route_sets: Vec<Vec<Vec<usize>>> = Vec::new();
    for (pos, d) in demands.iter().enumerate() {
        let mut routes = Vec::new();
        let mut stack = vec![(d.source, Vec::<usize>::new(), vec![d.source])];
        while let Some((node, path, visited)) = stack.pop() {
            if node == d.target {
                routes.push(path);
                continue;
            }
            for link in topology.outgoing(node) {
                if !visited.contains(&link.target) {
                    let mut p = path.clone();
                    p.push(link.id);
                    let mut v = visited.clone();
                    v.push(link.target);
                    stack.push((link.target, p, v));
                }
            }
        }
        if config.regeneration.active() {
            let reach = config.reach.reach(d.rate_gbps, inv_eta).max(0.0);
            routes.retain(|route| {
                let mut seg = 0.0;
                for (idx, &l) in route.iter().enumerate() {
                    let link = topology.link(l);
                    if idx > 0 && preselected.binary_search(&link.source).is_ok() {
                        seg = 0.0;
                    }
                    seg += link.length_km;
                    if seg > reach + 1e-9 {
                        return false;
                    }
                }
                true
            });
        }
        if routes.is_empty() {
            return Err(OracleError::NoRoute(pos));
        }
        routes.sort();
        route_sets.push(routes);
    }
    let combos: usize = route_sets.iter().map(|r| r.len()).product();
    if combos > combination_cap {
        return Err(OracleError::TooLarge(combos, combination_cap));
    }

    let bands: Vec<f64> = demands.iter().map(|d| d.rate_gbps * inv_eta).collect();
    let g = config.guard_band_ghz;
    let nd = demands.len();

    let mut permutations: Vec<Vec<usize>> = Vec::new();
    permute(&mut (0..nd).collect::<Vec<_>>(), 0, &mut permutations);

    let mut best = f64::INFINITY;
    let mut best_routes: Vec<Vec<usize>> = Vec::new();
    let mut choice = vec![0usize; nd];
    loop {
        let routes: Vec<&Vec<usize>> = (0..nd).map(|a| &route_sets[a][choice[a]]).collect();
        for perm in &permutations {
            // Greedy stacking in permutation order.
            let mut f = vec![0.0f64; nd];
            let mut roof: f64 = 0.0;
            for (rank, &a) in perm.iter().enumerate() {
                let mut start: f64 = 0.0;
                for &b in perm.iter().take(rank) {
                    if routes[a].iter().any(|l| routes[b].contains(l)) {
                        start = start.max(f[b] + bands[b] + g);
                    }
                }
                f[a] = start;
                roof = roof.max(start + bands[a]);
            }
            if roof < best {
                best = roof;
                best_routes = routes.iter().map(|r| (*r).clone()).collect();
            }
        }
        // Next route combination.
        let mut carry = 0;
        loop {
            if carry == nd {
                return Ok((best, best_routes));
            }
            choice[carry] += 1;
            if choice[carry] < route_sets[carry].len() {
                break;
            }
            choice[carry] = 0;
            carry += 1;
        }
    }
}

fn permute(items: &mut Vec<usize>, k: usize, out: &mut Vec<Vec<usize>>) {
    if k == items.len() {
        out.push(items.clone());
        return;
    }
    for i in k..items.len() {
        items.swap(k, i);
        permute(items, k + 1, out);
        items.swap(k, i);
    }
}
