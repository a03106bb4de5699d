//! Solver-agnostic MILP representation.
//!
//! A [`MilpProblem`] is a bag of named, bounded variables plus linear
//! constraints and a minimization objective. It is mutated only while being
//! built; afterwards it is read-only and safe to share.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Dense, insertion-ordered variable index.
pub type VarId = usize;

#[derive(Debug, Error)]
pub enum MilpError {
    #[error("duplicate variable name {0:?}")]
    DuplicateName(String),
    #[error("variable {name:?}: inverted bounds [{lower}, {upper}]")]
    InvertedBounds {
        name: String,
        lower: f64,
        upper: f64,
    },
    #[error("variable {name:?}: binary bounds must lie within [0, 1], got [{lower}, {upper}]")]
    BadBinaryBounds {
        name: String,
        lower: f64,
        upper: f64,
    },
    #[error("constraint {name:?} references unknown variable id {var}")]
    UnknownVariable { name: String, var: VarId },
    #[error("constraint {name:?} has non-finite coefficient for variable id {var}")]
    NonFiniteCoefficient { name: String, var: VarId },
    #[error("duplicate constraint name {0:?}")]
    DuplicateConstraintName(String),
    #[error("cannot pin variable {name:?} to {value}: outside bounds [{lower}, {upper}]")]
    PinOutsideBounds {
        name: String,
        value: f64,
        lower: f64,
        upper: f64,
    },
    #[error("cannot pin {kind:?} variable {name:?} to non-integral value {value}")]
    PinNotIntegral {
        kind: VarKind,
        name: String,
        value: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum VarKind {
    Continuous,
    Binary,
    Integer,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Variable {
    pub id: VarId,
    pub name: String,
    pub kind: VarKind,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

impl Sense {
    pub fn symbol(self) -> &'static str {
        match self {
            Sense::Le => "<=",
            Sense::Ge => ">=",
            Sense::Eq => "=",
        }
    }
}

/// `sum(coefficient * variable) sense rhs`, with coefficients pre-aggregated
/// so no variable id repeats among the terms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearConstraint {
    pub name: String,
    pub terms: Vec<(VarId, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

/// Problem-level statistics: `(variables, constraints, binaries, nonzeros)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelStats {
    pub variables: usize,
    pub constraints: usize,
    pub binaries: usize,
    pub nonzeros: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MilpProblem {
    pub name: String,
    variables: Vec<Variable>,
    constraints: Vec<LinearConstraint>,
    /// Minimization objective terms (variable id, coefficient).
    objective: Vec<(VarId, f64)>,
}

impl MilpProblem {
    pub fn new(name: impl Into<String>) -> Self {
        MilpProblem {
            name: name.into(),
            variables: Vec::new(),
            constraints: Vec::new(),
            objective: Vec::new(),
        }
    }

    /// Adds a variable; ids are dense and insertion-ordered.
    pub fn add_variable(
        &mut self,
        name: impl Into<String>,
        kind: VarKind,
        lower: f64,
        upper: f64,
    ) -> Result<VarId, MilpError> {
        let name = name.into();
        if self.variables.iter().any(|v| v.name == name) {
            return Err(MilpError::DuplicateName(name));
        }
        if lower > upper {
            return Err(MilpError::InvertedBounds { name, lower, upper });
        }
        if kind == VarKind::Binary && (lower < 0.0 || upper > 1.0) {
            return Err(MilpError::BadBinaryBounds { name, lower, upper });
        }
        let id = self.variables.len();
        self.variables.push(Variable {
            id,
            name,
            kind,
            lower,
            upper,
        });
        Ok(id)
    }

    /// Adds a constraint, aggregating duplicate variable ids and dropping
    /// zero coefficients.
    pub fn add_constraint(
        &mut self,
        name: impl Into<String>,
        terms: Vec<(VarId, f64)>,
        sense: Sense,
        rhs: f64,
    ) -> Result<(), MilpError> {
        let name = name.into();
        if self.constraints.iter().any(|c| c.name == name) {
            return Err(MilpError::DuplicateConstraintName(name));
        }
        let mut aggregated: Vec<(VarId, f64)> = Vec::with_capacity(terms.len());
        for (var, coeff) in terms {
            if var >= self.variables.len() {
                return Err(MilpError::UnknownVariable { name, var });
            }
            if !coeff.is_finite() {
                return Err(MilpError::NonFiniteCoefficient { name, var });
            }
            match aggregated.iter_mut().find(|(v, _)| *v == var) {
                Some((_, c)) => *c += coeff,
                None => aggregated.push((var, coeff)),
            }
        }
        aggregated.retain(|(_, c)| *c != 0.0);
        self.constraints.push(LinearConstraint {
            name,
            terms: aggregated,
            sense,
            rhs,
        });
        Ok(())
    }

    /// Replaces the minimization objective.
    pub fn set_objective(&mut self, terms: Vec<(VarId, f64)>) -> Result<(), MilpError> {
        let mut aggregated: Vec<(VarId, f64)> = Vec::with_capacity(terms.len());
        for (var, coeff) in terms {
            if var >= self.variables.len() {
                return Err(MilpError::UnknownVariable {
                    name: "objective".into(),
                    var,
                });
            }
            if !coeff.is_finite() {
                return Err(MilpError::NonFiniteCoefficient {
                    name: "objective".into(),
                    var,
                });
            }
            match aggregated.iter_mut().find(|(v, _)| *v == var) {
                Some((_, c)) => *c += coeff,
                None => aggregated.push((var, coeff)),
            }
        }
        aggregated.retain(|(_, c)| *c != 0.0);
        self.objective = aggregated;
        Ok(())
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn variable(&self, id: VarId) -> &Variable {
        &self.variables[id]
    }

    pub fn variable_by_name(&self, name: &str) -> Option<&Variable> {
        self.variables.iter().find(|v| v.name == name)
    }

    pub fn constraints(&self) -> &[LinearConstraint] {
        &self.constraints
    }

    pub fn objective(&self) -> &[(VarId, f64)] {
        &self.objective
    }

    pub fn objective_value(&self, values: &[f64]) -> f64 {
        self.objective
            .iter()
            .map(|&(var, coeff)| coeff * values[var])
            .sum()
    }

    /// Returns a copy with the listed variables pinned (`lower = upper = value`).
    ///
    /// Values must lie within the variable's current bounds and, for binary or
    /// integer variables, be integral within `1e-6`.
    pub fn with_pinned(&self, pins: &[(VarId, f64)]) -> Result<MilpProblem, MilpError> {
        let mut out = self.clone();
        for &(var, value) in pins {
            let v = &mut out.variables[var];
            if value < v.lower - 1e-9 || value > v.upper + 1e-9 {
                return Err(MilpError::PinOutsideBounds {
                    name: v.name.clone(),
                    value,
                    lower: v.lower,
                    upper: v.upper,
                });
            }
            let value = match v.kind {
                VarKind::Binary | VarKind::Integer => {
                    let rounded = value.round();
                    if (value - rounded).abs() > 1e-6 {
                        return Err(MilpError::PinNotIntegral {
                            kind: v.kind,
                            name: v.name.clone(),
                            value,
                        });
                    }
                    rounded
                }
                VarKind::Continuous => value,
            };
            v.lower = value;
            v.upper = value;
        }
        Ok(out)
    }

    /// Constraint and bound violations of a candidate point, as
    /// `(name, magnitude)` pairs with magnitude beyond `tol`. Integrality is
    /// not checked here.
    pub fn point_violations(&self, values: &[f64], tol: f64) -> Vec<(String, f64)> {
        let mut out = Vec::new();
        for v in &self.variables {
            let x = values[v.id];
            let scale = 1.0 + v.lower.abs().max(v.upper.abs().min(f64::MAX));
            if x < v.lower - tol * scale {
                out.push((format!("bound:{}", v.name), v.lower - x));
            } else if x > v.upper + tol * scale {
                out.push((format!("bound:{}", v.name), x - v.upper));
            }
        }
        for c in &self.constraints {
            let lhs: f64 = c.terms.iter().map(|&(var, a)| a * values[var]).sum();
            let scale = 1.0 + c.rhs.abs() + c.terms.iter().map(|&(_, a)| a.abs()).sum::<f64>();
            let viol = match c.sense {
                Sense::Le => lhs - c.rhs,
                Sense::Ge => c.rhs - lhs,
                Sense::Eq => (lhs - c.rhs).abs(),
            };
            if viol > tol * scale {
                out.push((c.name.clone(), viol));
            }
        }
        out
    }

    pub fn stats(&self) -> ModelStats {
        ModelStats {
            variables: self.variables.len(),
            constraints: self.constraints.len(),
            binaries: self
                .variables
                .iter()
                .filter(|v| v.kind == VarKind::Binary)
                .count(),
            nonzeros: self.constraints.iter().map(|c| c.terms.len()).sum(),
        }
    }
}

/// `(variable count, constraint count, binary count, nonzero count)`.
pub fn model_stats(problem: &MilpProblem) -> ModelStats {
    problem.stats()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn variable_ids_are_dense_and_ordered() {
        let mut p = MilpProblem::new("t");
        let a = p
            .add_variable("c", VarKind::Continuous, 0.0, f64::INFINITY)
            .unwrap();
        assert_eq!(a, 0);
        let b = p.add_variable("x", VarKind::Binary, 0.0, 1.0).unwrap();
        assert_eq!(b, 1);
    }

    #[test]
    fn duplicate_name_rejected() {
        let mut p = MilpProblem::new("t");
        p.add_variable("x", VarKind::Continuous, 0.0, 1.0).unwrap();
        assert!(matches!(
            p.add_variable("x", VarKind::Continuous, 0.0, 1.0),
            Err(MilpError::DuplicateName(_))
        ));
    }

    #[test]
    fn binary_bounds_validated() {
        let mut p = MilpProblem::new("t");
        p.add_variable("ok", VarKind::Binary, 0.0, 1.0).unwrap();
        assert!(matches!(
            p.add_variable("bad", VarKind::Binary, 0.0, 2.0),
            Err(MilpError::BadBinaryBounds { .. })
        ));
        assert!(matches!(
            p.add_variable("inv", VarKind::Continuous, 2.0, 1.0),
            Err(MilpError::InvertedBounds { .. })
        ));
    }

    #[test]
    fn constraints_aggregate_duplicate_terms() {
        let mut p = MilpProblem::new("t");
        let x = p
            .add_variable("x", VarKind::Continuous, 0.0, 10.0)
            .unwrap();
        let y = p
            .add_variable("y", VarKind::Continuous, 0.0, 10.0)
            .unwrap();
        p.add_constraint("r", vec![(x, 1.0), (y, 2.0), (x, 3.0), (y, -2.0)], Sense::Le, 5.0)
            .unwrap();
        assert_eq!(p.constraints()[0].terms, vec![(x, 4.0)]);
    }

    #[test]
    fn stats_count_containers() {
        let p = MilpProblem::new("t");
        assert_eq!(
            model_stats(&p),
            ModelStats {
                variables: 0,
                constraints: 0,
                binaries: 0,
                nonzeros: 0
            }
        );
    }

    #[test]
    fn pinning_validates_bounds_and_integrality() {
        let mut p = MilpProblem::new("t");
        let v = p.add_variable("v", VarKind::Binary, 0.0, 1.0).unwrap();
        let f = p
            .add_variable("f", VarKind::Continuous, 0.0, 100.0)
            .unwrap();
        let pinned = p.with_pinned(&[(v, 1.0), (f, 12.5)]).unwrap();
        assert_eq!(pinned.variable(v).lower, 1.0);
        assert_eq!(pinned.variable(v).upper, 1.0);
        assert!(matches!(
            p.with_pinned(&[(v, 0.4)]),
            Err(MilpError::PinNotIntegral { .. })
        ));
        assert!(matches!(
            p.with_pinned(&[(f, 200.0)]),
            Err(MilpError::PinOutsideBounds { .. })
        ));
    }
}
