//! Solved resource assignment for a demand set.

use serde::{Deserialize, Serialize};

use crate::network::{LinkId, NodeId};

/// Resources assigned to one demand.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DemandSolution {
    pub demand_id: usize,
    /// Links of the route in source-to-destination order.
    pub route: Vec<LinkId>,
    /// Start frequency on each route link (GHz). Without wavelength
    /// conversion all entries are equal.
    pub start_freq: Vec<f64>,
    /// Inverse spectral efficiency on each route link (symbol/bit). Without
    /// modulation conversion all entries are equal.
    pub inv_eta: Vec<f64>,
    /// Interior nodes where this demand is regenerated, in route order.
    pub regen_nodes: Vec<NodeId>,
}

impl DemandSolution {
    /// Occupied band on a route link: `[F, F + b/eta]`.
    pub fn band_on(&self, link: LinkId, rate_gbps: f64) -> Option<(f64, f64)> {
        let idx = self.route.iter().position(|&l| l == link)?;
        let lo = self.start_freq[idx];
        Some((lo, lo + rate_gbps * self.inv_eta[idx]))
    }
}

/// Complete solver output in network terms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    /// One entry per demand, in the order the model was built.
    pub demands: Vec<DemandSolution>,
    /// Highest assigned frequency (the spectrum roof `c`).
    pub spectrum_peak: f64,
    /// Nodes acting as regeneration sites (optimizer-chosen, or preselected
    /// sites used by at least one demand).
    pub regen_nodes: Vec<NodeId>,
    /// Regeneration circuits in use per node.
    pub circuits: Vec<u32>,
    /// Objective value of the originating solve.
    pub objective: f64,
    /// Non-fatal notes from extraction, e.g. pruned idle cycles.
    pub warnings: Vec<String>,
}

impl Solution {
    /// Count of regeneration sites (the `sum I_n` objective term).
    pub fn regen_node_count(&self) -> usize {
        self.regen_nodes.len()
    }
}
