//! Reconstruction of a network-level [`Solution`] from raw variable values.

use crate::network::{Demand, Topology};
use crate::solution::{DemandSolution, Solution};

use super::config::{FeatureConfig, Regeneration};
use super::{ModelError, VariableLayout};

const INT_TOL: f64 = 1e-6;

fn as_binary(name: &str, value: f64) -> Result<bool, ModelError> {
    if (value - 1.0).abs() <= INT_TOL {
        Ok(true)
    } else if value.abs() <= INT_TOL {
        Ok(false)
    } else {
        Err(ModelError::NonIntegral {
            name: name.to_string(),
            value,
        })
    }
}

/// Rebuilds routes, per-link spectrum and regeneration events from a
/// variable-value vector that satisfies integrality within `1e-6`.
///
/// Idle cycles (link sets with balanced in/out degree disconnected from the
/// route) are pruned with a warning; anything else inconsistent is an error.
pub fn extract_solution(
    topology: &Topology,
    demands: &[Demand],
    config: &FeatureConfig,
    layout: &VariableLayout,
    values: &[f64],
) -> Result<Solution, ModelError> {
    let mut warnings = Vec::new();
    let mut out_demands = Vec::with_capacity(demands.len());

    for (a, demand) in demands.iter().enumerate() {
        let mut used: Vec<usize> = Vec::new();
        for (l, &var) in layout.v[a].iter().enumerate() {
            if as_binary(&format!("V_l{l}_d{a}"), values[var])? {
                used.push(l);
            }
        }
        let route = trace_route(topology, demand, &used, a, &mut warnings)?;

        let mut start_freq = Vec::with_capacity(route.len());
        let mut inv_eta = Vec::with_capacity(route.len());
        for &l in &route {
            let f = if layout.has_per_link_frequency() {
                values[layout.f_link[a][l]]
            } else {
                values[layout.f_demand[a]]
            };
            start_freq.push(f.max(0.0));
            let ie = if layout.has_per_link_modulation() {
                values[layout.inv_eta_link[a][l]]
            } else if !layout.inv_eta_demand.is_empty() {
                values[layout.inv_eta_demand[a]]
            } else {
                layout.constants.inv_eta_hi
            };
            inv_eta.push(ie);
        }

        // Regeneration events along the route interior.
        let mut regen_nodes = Vec::new();
        for &l in route.iter().skip(1) {
            let node = topology.link(l).source;
            let regenerated = if !layout.i_node_demand.is_empty() {
                values[layout.i_node_demand[a][node]] > 0.5
            } else {
                layout.preselected.binary_search(&node).is_ok()
            };
            if regenerated {
                regen_nodes.push(node);
            }
        }

        out_demands.push(DemandSolution {
            demand_id: demand.id,
            route,
            start_freq,
            inv_eta,
            regen_nodes,
        });
    }

    let mut circuits = vec![0u32; topology.node_count()];
    for ds in &out_demands {
        for &n in &ds.regen_nodes {
            circuits[n] += 1;
        }
    }
    let regen_nodes: Vec<usize> = if !layout.i_node.is_empty() {
        (0..topology.node_count())
            .filter(|&n| values[layout.i_node[n]] > 0.5)
            .collect()
    } else if matches!(config.regeneration, Regeneration::None) {
        Vec::new()
    } else {
        (0..topology.node_count())
            .filter(|&n| circuits[n] > 0)
            .collect()
    };

    let spectrum_peak = values[layout.c];
    let objective = {
        let a = config.objective_coefficient;
        let regen_cost: f64 = if !layout.i_node.is_empty() {
            layout
                .i_node
                .iter()
                .map(|&var| values[var].round())
                .sum::<f64>()
        } else {
            0.0
        };
        a * spectrum_peak + (1.0 - a) * regen_cost
    };

    Ok(Solution {
        demands: out_demands,
        spectrum_peak,
        regen_nodes,
        circuits,
        objective,
        warnings,
    })
}

/// Finds the source-to-destination path among the used links and checks the
/// leftovers form closed cycles.
fn trace_route(
    topology: &Topology,
    demand: &Demand,
    used: &[usize],
    demand_pos: usize,
    warnings: &mut Vec<String>,
) -> Result<Vec<usize>, ModelError> {
    // Breadth-first search over used links only; adjacency in link-id order
    // keeps the result deterministic.
    let n = topology.node_count();
    let mut parent_link: Vec<Option<usize>> = vec![None; n];
    let mut visited = vec![false; n];
    visited[demand.source] = true;
    let mut queue = std::collections::VecDeque::new();
    queue.push_back(demand.source);
    while let Some(node) = queue.pop_front() {
        if node == demand.target {
            break;
        }
        for &l in used {
            let link = topology.link(l);
            if link.source == node && !visited[link.target] {
                visited[link.target] = true;
                parent_link[link.target] = Some(l);
                queue.push_back(link.target);
            }
        }
    }
    if !visited[demand.target] {
        return Err(ModelError::RouteDisconnected { demand: demand_pos });
    }
    let mut route = Vec::new();
    let mut node = demand.target;
    while node != demand.source {
        let l = parent_link[node].expect("walked during BFS");
        route.push(l);
        node = topology.link(l).source;
    }
    route.reverse();

    if route.len() != used.len() {
        // Leftover links must balance in/out at every node (idle cycles).
        let mut balance = vec![0i64; n];
        let mut leftover = 0;
        for &l in used {
            if !route.contains(&l) {
                leftover += 1;
                let link = topology.link(l);
                balance[link.source] -= 1;
                balance[link.target] += 1;
            }
        }
        if balance.iter().any(|&b| b != 0) {
            return Err(ModelError::DanglingLinks {
                demand: demand_pos,
                leftover,
            });
        }
        warnings.push(format!(
            "demand {demand_pos}: pruned {leftover} idle cycle link(s) from the assignment"
        ));
    }
    Ok(route)
}
