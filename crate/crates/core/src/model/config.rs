//! Feature configuration: which parts of the MILP are active.

use serde::{Deserialize, Serialize};

use crate::network::{NodeId, ReachModel, Topology};

use super::ModelError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Modulation {
    /// Every demand uses the same fixed spectral efficiency (bit/symbol).
    Fixed { eta: f64 },
    /// Spectral efficiency optimized per demand as a continuous value in
    /// `[eta_min, eta_max]`.
    Range { eta_min: f64, eta_max: f64 },
}

impl Default for Modulation {
    fn default() -> Self {
        Modulation::Range {
            eta_min: 1.0,
            eta_max: 10.0,
        }
    }
}

impl Modulation {
    /// `(1/eta_max, 1/eta_min)`: the box for inverse spectral efficiency.
    pub fn inv_eta_bounds(&self) -> (f64, f64) {
        match *self {
            Modulation::Fixed { eta } => (1.0 / eta, 1.0 / eta),
            Modulation::Range { eta_min, eta_max } => (1.0 / eta_max, 1.0 / eta_min),
        }
    }

    pub fn is_fixed(&self) -> bool {
        matches!(self, Modulation::Fixed { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Regeneration {
    /// No regeneration anywhere and no transparent-reach constraints (the
    /// basic routing-and-spectrum model).
    None,
    /// Regeneration circuits preselected at every node.
    AllNodes,
    /// Regeneration circuits preselected at the given nodes; a demand
    /// traversing one of them is always regenerated there. An empty set
    /// gives a fully transparent network with reach enforced end-to-end.
    Preselected(Vec<NodeId>),
    /// Regeneration sites chosen by the optimizer.
    Optimized,
}

impl Regeneration {
    pub fn active(&self) -> bool {
        !matches!(self, Regeneration::None)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureConfig {
    pub modulation: Modulation,
    pub regeneration: Regeneration,
    pub wavelength_conversion: bool,
    pub modulation_conversion: bool,
    /// Mandatory spectral gap between adjacent channels, GHz.
    pub guard_band_ghz: f64,
    /// Objective weight `a`: minimize `a * c + (1 - a) * sum I_n`.
    pub objective_coefficient: f64,
    /// Max regeneration circuits per node, when set.
    pub circuit_cap: Option<u32>,
    pub time_limit_s: f64,
    pub reach: ReachModel,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        FeatureConfig {
            modulation: Modulation::default(),
            regeneration: Regeneration::None,
            wavelength_conversion: false,
            modulation_conversion: false,
            guard_band_ghz: 10.0,
            objective_coefficient: 1.0,
            circuit_cap: None,
            time_limit_s: 3000.0,
            reach: ReachModel::default(),
        }
    }
}

impl FeatureConfig {
    pub fn validate(&self, topology: &Topology) -> Result<(), ModelError> {
        match self.modulation {
            Modulation::Fixed { eta } => {
                if !(eta > 0.0) {
                    return Err(ModelError::Config(format!(
                        "fixed spectral efficiency must be positive, got {eta}"
                    )));
                }
            }
            Modulation::Range { eta_min, eta_max } => {
                if !(eta_min > 0.0) || eta_max < eta_min {
                    return Err(ModelError::Config(format!(
                        "invalid spectral efficiency range [{eta_min}, {eta_max}]"
                    )));
                }
            }
        }
        if (self.wavelength_conversion || self.modulation_conversion)
            && !self.regeneration.active()
        {
            return Err(ModelError::Config(
                "wavelength/modulation conversion requires regeneration".into(),
            ));
        }
        if !(0.0..=1.0).contains(&self.objective_coefficient) {
            return Err(ModelError::Config(format!(
                "objective coefficient must lie in [0, 1], got {}",
                self.objective_coefficient
            )));
        }
        if self.guard_band_ghz < 0.0 {
            return Err(ModelError::Config("guard band must be non-negative".into()));
        }
        if !(self.time_limit_s > 0.0) {
            return Err(ModelError::Config("time limit must be positive".into()));
        }
        if let Regeneration::Preselected(nodes) = &self.regeneration {
            for &n in nodes {
                if n >= topology.node_count() {
                    return Err(ModelError::UnknownRegenNode(n));
                }
            }
        }
        Ok(())
    }

    /// Preselected node set resolved against the topology (sorted, deduped);
    /// empty for the other regeneration modes.
    pub fn preselected_nodes(&self, topology: &Topology) -> Vec<NodeId> {
        match &self.regeneration {
            Regeneration::AllNodes => (0..topology.node_count()).collect(),
            Regeneration::Preselected(nodes) => {
                let mut v = nodes.clone();
                v.sort_unstable();
                v.dedup();
                v
            }
            _ => Vec::new(),
        }
    }

    /// Parses the flat TOML config format, resolving node names against the
    /// topology. Missing keys take their defaults.
    pub fn from_toml(text: &str, topology: &Topology) -> Result<FeatureConfig, ModelError> {
        let raw: toml::Value = text
            .parse()
            .map_err(|e| ModelError::Config(format!("config parse error: {e}")))?;
        let table = raw
            .as_table()
            .ok_or_else(|| ModelError::Config("config must be a table".into()))?;
        let mut cfg = FeatureConfig::default();
        let get_f64 = |key: &str| -> Result<Option<f64>, ModelError> {
            match table.get(key) {
                None => Ok(None),
                Some(v) => v
                    .as_float()
                    .or_else(|| v.as_integer().map(|i| i as f64))
                    .map(Some)
                    .ok_or_else(|| ModelError::Config(format!("key {key} must be a number"))),
            }
        };
        match table.get("modulation").and_then(|v| v.as_str()) {
            Some("fixed") => {
                let eta = get_f64("eta")?.unwrap_or(2.0);
                cfg.modulation = Modulation::Fixed { eta };
            }
            Some("range") | None => {
                let eta_min = get_f64("eta_min")?.unwrap_or(1.0);
                let eta_max = get_f64("eta_max")?.unwrap_or(10.0);
                cfg.modulation = Modulation::Range { eta_min, eta_max };
            }
            Some(other) => {
                return Err(ModelError::Config(format!(
                    "modulation must be \"fixed\" or \"range\", got {other:?}"
                )))
            }
        }
        if let Some(v) = table.get("regeneration") {
            cfg.regeneration = match v {
                toml::Value::String(s) => match s.as_str() {
                    "none" => Regeneration::None,
                    "all" => Regeneration::AllNodes,
                    "optimized" => Regeneration::Optimized,
                    other => {
                        return Err(ModelError::Config(format!(
                            "regeneration must be \"none\", \"all\", \"optimized\" or a node list, got {other:?}"
                        )))
                    }
                },
                toml::Value::Array(names) => {
                    let mut ids = Vec::new();
                    for name in names {
                        let name = name.as_str().ok_or_else(|| {
                            ModelError::Config("regeneration node list must hold strings".into())
                        })?;
                        let id = topology.node_id(name).ok_or_else(|| {
                            ModelError::Config(format!("unknown regeneration node {name:?}"))
                        })?;
                        ids.push(id);
                    }
                    Regeneration::Preselected(ids)
                }
                _ => {
                    return Err(ModelError::Config(
                        "regeneration must be a string or a node list".into(),
                    ))
                }
            };
        }
        if let Some(v) = table.get("wavelength_conversion") {
            cfg.wavelength_conversion = v
                .as_bool()
                .ok_or_else(|| ModelError::Config("wavelength_conversion must be a bool".into()))?;
        }
        if let Some(v) = table.get("modulation_conversion") {
            cfg.modulation_conversion = v
                .as_bool()
                .ok_or_else(|| ModelError::Config("modulation_conversion must be a bool".into()))?;
        }
        if let Some(v) = get_f64("guard_band_ghz")? {
            cfg.guard_band_ghz = v;
        }
        if let Some(v) = get_f64("objective_coefficient")? {
            cfg.objective_coefficient = v;
        }
        if let Some(v) = table.get("circuit_cap") {
            let cap = v
                .as_integer()
                .filter(|&i| i >= 0)
                .ok_or_else(|| ModelError::Config("circuit_cap must be a non-negative integer".into()))?;
            cfg.circuit_cap = Some(cap as u32);
        }
        if let Some(v) = get_f64("time_limit_s")? {
            cfg.time_limit_s = v;
        }
        if let Some(alpha) = get_f64("reach_alpha")? {
            cfg.reach.alpha = alpha;
        }
        if let Some(beta) = get_f64("reach_beta")? {
            cfg.reach.beta = beta;
        }
        if let Some(gamma) = get_f64("reach_gamma")? {
            cfg.reach.gamma = gamma;
        }
        cfg.validate(topology)?;
        Ok(cfg)
    }
}
