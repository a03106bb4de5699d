//! Planning toolkit for translucent elastic optical networks.
//!
//! The crate models a flexgrid optical network as a directed graph, turns a
//! set of traffic demands plus a feature configuration (modulation range,
//! regeneration, wavelength/modulation conversion, guard band, circuit caps)
//! into a mixed-integer linear program, solves it with an embedded
//! branch-and-bound solver, and verifies every solution with an independent
//! feasibility checker. A recursive driver solves large demand sets in
//! ordered subsets, and the experiment module reproduces the standard sweep
//! studies (spectrum vs demand count, ordering schemes, subset sizes,
//! objective trade-offs, conversion variants, regenerator placement).

pub mod experiments;
pub mod lp_format;
pub mod milp;
pub mod model;
pub mod network;
pub mod recursive;
pub mod solution;
pub mod solver;
pub mod verify;

pub use milp::{LinearConstraint, MilpProblem, Sense, VarId, VarKind, Variable};
pub use model::{FeatureConfig, Modulation, Regeneration, VariableLayout};
pub use network::{Demand, ReachModel, Topology};
pub use recursive::{OrderingScheme, RecursivePlan, RecursiveTrace};
pub use solution::Solution;
pub use solver::{SolveOptions, SolveResult, SolveStatus};
pub use verify::Violation;
