//! Translation of (topology, demands, feature configuration) into a MILP.
//!
//! The builder emits, in a fixed order: the spectrum-roof family, flow
//! conservation, the pairwise non-overlap triples, transparent-reach
//! machinery (with exact product linearizations where the reach depends on a
//! variable spectral efficiency), regeneration accumulation, circuit
//! coupling and caps, and the per-node continuity families for wavelength
//! and modulation conversion.

mod build;
mod config;
mod extract;
mod fix;

pub use build::{build, ModelConstants};
pub use config::{FeatureConfig, Modulation, Regeneration};
pub use extract::extract_solution;
pub use fix::{fix_assignments, DemandAssignment};

use std::collections::BTreeMap;

use thiserror::Error;

use crate::milp::{MilpError, VarId};
use crate::network::{LinkId, NodeId};

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("preselected regeneration node {0} is not in the topology")]
    UnknownRegenNode(usize),
    #[error(transparent)]
    Milp(#[from] MilpError),
    #[error("variable {name} = {value} violates integrality beyond 1e-6")]
    NonIntegral { name: String, value: f64 },
    #[error("demand {demand}: assigned links do not form a connected source->destination path")]
    RouteDisconnected { demand: usize },
    #[error("demand {demand}: {0} assigned links left over that do not form closed cycles", .leftover)]
    DanglingLinks { demand: usize, leftover: usize },
    #[error("assignment for demand {demand} is missing {what}")]
    IncompleteAssignment { demand: usize, what: &'static str },
}

/// Where each semantic variable family lives in the flat variable array.
///
/// Outer index is always the demand position; inactive features leave their
/// family empty.
#[derive(Debug, Clone, Default)]
pub struct VariableLayout {
    /// Highest assigned frequency (the spectrum roof).
    pub c: VarId,
    /// Per-demand start frequency (empty under wavelength conversion).
    pub f_demand: Vec<VarId>,
    /// Per-(demand, link) start frequency (wavelength conversion only).
    pub f_link: Vec<Vec<VarId>>,
    /// Per-demand inverse spectral efficiency (multi-modulation, no MC).
    pub inv_eta_demand: Vec<VarId>,
    /// Per-(demand, link) inverse spectral efficiency (MC only).
    pub inv_eta_link: Vec<Vec<VarId>>,
    /// Link-assignment binaries, `[demand][link]`.
    pub v: Vec<Vec<VarId>>,
    /// Frequency-ordering binaries for ordered demand pairs `[a][b]`
    /// including the (pinned-to-zero) diagonal; empty under WC.
    pub delta_pair: Vec<Vec<VarId>>,
    /// Ordering binaries per (link, unordered pair a < b) under WC.
    pub delta_link_pair: BTreeMap<(LinkId, usize, usize), VarId>,
    /// Distance from the node to the start of its transparent segment.
    pub y: Vec<Vec<VarId>>,
    /// Distance from the link's source node to the segment start, gated on
    /// the link being used.
    pub u: Vec<Vec<VarId>>,
    /// Product linearization of (link used) x (reach expression).
    pub w: Vec<Vec<VarId>>,
    /// Optimized-placement accumulator: `u` masked by regeneration.
    pub x: Vec<Vec<VarId>>,
    /// Per-node regeneration-site binaries (optimized placement only).
    pub i_node: Vec<VarId>,
    /// Per-(demand, node) regeneration-event binaries.
    pub i_node_demand: Vec<Vec<VarId>>,
    /// Per-node regeneration circuit counters (circuit cap only).
    pub circuits: Vec<VarId>,
    /// Derived constants used across the constraint families.
    pub constants: ModelConstants,
    /// Number of demands the model was built over.
    pub demand_count: usize,
    /// Resolved preselected regeneration set (empty unless preselected).
    pub preselected: Vec<NodeId>,
}

impl VariableLayout {
    pub fn has_per_link_frequency(&self) -> bool {
        !self.f_link.is_empty()
    }

    pub fn has_per_link_modulation(&self) -> bool {
        !self.inv_eta_link.is_empty()
    }
}
