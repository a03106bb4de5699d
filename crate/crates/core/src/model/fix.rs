//! Pinning previously solved demands into a freshly built model.
//!
//! The recursive driver re-builds the model over all demands seen so far and
//! then pins every variable belonging to already-assigned demands to its
//! solved value; cross-demand constraints (non-overlap, circuit caps) stay
//! active between pinned and free demands.

use crate::milp::{MilpProblem, VarId};
use crate::network::{LinkId, NodeId, Topology};
use crate::solution::DemandSolution;

use super::{ModelError, VariableLayout};

/// One demand's solved assignment, keyed by its position in the demand slice
/// the model was built over.
#[derive(Debug, Clone)]
pub struct DemandAssignment {
    pub demand_pos: usize,
    pub route: Vec<LinkId>,
    pub start_freq: Vec<f64>,
    pub inv_eta: Vec<f64>,
    pub regen_nodes: Vec<NodeId>,
}

impl DemandAssignment {
    pub fn from_solution(demand_pos: usize, ds: &DemandSolution) -> Self {
        DemandAssignment {
            demand_pos,
            route: ds.route.clone(),
            start_freq: ds.start_freq.clone(),
            inv_eta: ds.inv_eta.clone(),
            regen_nodes: ds.regen_nodes.clone(),
        }
    }
}

/// Returns a copy of `problem` with the given demands pinned to their solved
/// assignments (`lower = upper = value` on every variable they own).
pub fn fix_assignments(
    problem: &MilpProblem,
    topology: &Topology,
    layout: &VariableLayout,
    fixed: &[DemandAssignment],
) -> Result<MilpProblem, ModelError> {
    let mut pins: Vec<(VarId, f64)> = Vec::new();
    for asg in fixed {
        pins.extend(pins_for_assignment(topology, layout, asg)?);
    }
    // Ordering binaries between two pinned demands: below-by-frequency wins,
    // ties by demand position.
    if !layout.delta_pair.is_empty() {
        for (i, a) in fixed.iter().enumerate() {
            for b in fixed.iter().skip(i + 1) {
                let fa = *a.start_freq.first().ok_or(ModelError::IncompleteAssignment {
                    demand: a.demand_pos,
                    what: "start frequency",
                })?;
                let fb = *b.start_freq.first().ok_or(ModelError::IncompleteAssignment {
                    demand: b.demand_pos,
                    what: "start frequency",
                })?;
                let a_below = fa < fb || (fa == fb && a.demand_pos < b.demand_pos);
                let (pa, pb) = (a.demand_pos, b.demand_pos);
                pins.push((layout.delta_pair[pa][pb], if a_below { 1.0 } else { 0.0 }));
                pins.push((layout.delta_pair[pb][pa], if a_below { 0.0 } else { 1.0 }));
            }
        }
    } else {
        for (i, a) in fixed.iter().enumerate() {
            for b in fixed.iter().skip(i + 1) {
                let (lo, hi) = if a.demand_pos < b.demand_pos {
                    (a, b)
                } else {
                    (b, a)
                };
                for (&(link, da, db), &var) in &layout.delta_link_pair {
                    if da != lo.demand_pos || db != hi.demand_pos {
                        continue;
                    }
                    let fa = freq_on(lo, link);
                    let fb = freq_on(hi, link);
                    let below = match (fa, fb) {
                        (Some(x), Some(y)) => x < y || (x == y),
                        _ => true,
                    };
                    pins.push((var, if below { 1.0 } else { 0.0 }));
                }
            }
        }
    }
    Ok(problem.with_pinned(&pins)?)
}

fn freq_on(asg: &DemandAssignment, link: LinkId) -> Option<f64> {
    asg.route
        .iter()
        .position(|&l| l == link)
        .map(|idx| asg.start_freq[idx])
}

/// Raw variable pins implied by one demand's assignment under this layout.
pub(crate) fn pins_for_assignment(
    topology: &Topology,
    layout: &VariableLayout,
    asg: &DemandAssignment,
) -> Result<Vec<(VarId, f64)>, ModelError> {
    let a = asg.demand_pos;
    if asg.start_freq.len() != asg.route.len() || asg.inv_eta.len() != asg.route.len() {
        return Err(ModelError::IncompleteAssignment {
            demand: a,
            what: "per-link frequency/efficiency",
        });
    }
    let nl = topology.link_count();
    let nn = topology.node_count();
    let mut pins: Vec<(VarId, f64)> = Vec::new();
    let on_route = |l: usize| asg.route.iter().position(|&r| r == l);

    for l in 0..nl {
        pins.push((layout.v[a][l], if on_route(l).is_some() { 1.0 } else { 0.0 }));
    }
    if layout.has_per_link_frequency() {
        for l in 0..nl {
            let f = on_route(l).map(|i| asg.start_freq[i]).unwrap_or(0.0);
            pins.push((layout.f_link[a][l], f));
        }
    } else {
        let f = *asg.start_freq.first().ok_or(ModelError::IncompleteAssignment {
            demand: a,
            what: "start frequency",
        })?;
        pins.push((layout.f_demand[a], f));
    }
    if layout.has_per_link_modulation() {
        for l in 0..nl {
            let ie = on_route(l).map(|i| asg.inv_eta[i]).unwrap_or(0.0);
            pins.push((layout.inv_eta_link[a][l], ie));
        }
    } else if !layout.inv_eta_demand.is_empty() {
        let ie = *asg.inv_eta.first().ok_or(ModelError::IncompleteAssignment {
            demand: a,
            what: "spectral efficiency",
        })?;
        pins.push((layout.inv_eta_demand[a], ie));
    }

    if !layout.y.is_empty() {
        // Walk the route. U on a used link is the transparent distance
        // accumulated into its source node; the distance counter resets
        // after a regeneration event when propagating to the next node.
        let mut y_at = vec![0.0f64; nn];
        let mut u_on = vec![0.0f64; nl];
        let mut x_on = vec![0.0f64; nl];
        let mut carry = 0.0f64;
        for &l in &asg.route {
            let link = topology.link(l);
            u_on[l] = carry;
            let reset = asg.regen_nodes.contains(&link.source);
            x_on[l] = if reset { 0.0 } else { carry };
            carry = link.length_km + if reset { 0.0 } else { carry };
            y_at[link.target] = carry;
        }
        for n in 0..nn {
            pins.push((layout.y[a][n], y_at[n]));
        }
        for l in 0..nl {
            pins.push((layout.u[a][l], u_on[l]));
        }
        if !layout.w.is_empty() {
            let beta_reach = layout.constants.reach_hi[a] - layout.constants.reach_const[a];
            let inv_hi = layout.constants.inv_eta_hi;
            // beta recovered from the per-demand constants.
            let beta = if inv_hi != 0.0 { beta_reach / inv_hi } else { 0.0 };
            for l in 0..nl {
                let w = match on_route(l) {
                    Some(i) => layout.constants.reach_const[a] + beta * asg.inv_eta[i],
                    None => 0.0,
                };
                pins.push((layout.w[a][l], w));
            }
        }
        if !layout.x.is_empty() {
            for l in 0..nl {
                pins.push((layout.x[a][l], x_on[l]));
            }
        }
        if !layout.i_node_demand.is_empty() {
            for n in 0..nn {
                let i = if asg.regen_nodes.contains(&n) { 1.0 } else { 0.0 };
                pins.push((layout.i_node_demand[a][n], i));
            }
        }
    }
    Ok(pins)
}
