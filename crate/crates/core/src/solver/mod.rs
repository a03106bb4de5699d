//! Exact MILP solving: bounded-variable revised simplex for the LP
//! relaxation plus branch-and-bound with lazy activation of the big
//! non-overlap constraint families.

mod branch;
mod instance;
mod simplex;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::milp::MilpProblem;

#[derive(Debug, Error)]
pub enum SolveError {
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("invalid options: {0}")]
    Options(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NodeSelection {
    BestBound,
    DepthFirst,
}

/// Branching rule. Only most-fractional (ties to the lowest variable id) is
/// implemented; the enum keeps the choice explicit in reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BranchRule {
    MostFractional,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolveOptions {
    pub time_limit_s: f64,
    pub feas_tol: f64,
    pub int_tol: f64,
    pub mip_gap: f64,
    pub node_selection: NodeSelection,
    pub branching: BranchRule,
    /// Reserved for randomized perturbations; the default solver is fully
    /// deterministic and ignores it.
    pub seed: u64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            time_limit_s: 3000.0,
            feas_tol: 1e-7,
            int_tol: 1e-6,
            mip_gap: 1e-6,
            node_selection: NodeSelection::BestBound,
            branching: BranchRule::MostFractional,
            seed: 0,
        }
    }
}

impl SolveOptions {
    fn validate(&self) -> Result<(), SolveError> {
        if !(self.time_limit_s > 0.0) {
            return Err(SolveError::Options("time limit must be positive".into()));
        }
        for (name, v) in [
            ("feas_tol", self.feas_tol),
            ("int_tol", self.int_tol),
            ("mip_gap", self.mip_gap),
        ] {
            if !(v > 0.0) {
                return Err(SolveError::Options(format!("{name} must be positive")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolveStatus {
    Optimal,
    FeasibleTimeout,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolveResult {
    pub status: SolveStatus,
    /// One value per problem variable; empty when no incumbent exists.
    pub values: Vec<f64>,
    pub objective: Option<f64>,
    pub best_bound: f64,
    pub node_count: u64,
    pub simplex_iterations: u64,
    pub wall_time_s: f64,
}

impl SolveResult {
    pub fn gap(&self) -> Option<f64> {
        self.objective
            .map(|obj| (obj - self.best_bound).abs() / obj.abs().max(1.0))
    }
}

/// Solves the LP relaxation (integrality dropped).
pub fn solve_lp(problem: &MilpProblem, options: &SolveOptions) -> Result<SolveResult, SolveError> {
    options.validate()?;
    branch::solve(problem, options, true)
}

/// Solves the MILP exactly by branch-and-bound; deterministic given options.
pub fn solve_milp(
    problem: &MilpProblem,
    options: &SolveOptions,
) -> Result<SolveResult, SolveError> {
    options.validate()?;
    branch::solve(problem, options, false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::milp::{MilpProblem, Sense, VarKind};

    fn opts() -> SolveOptions {
        SolveOptions::default()
    }

    #[test]
    fn lp_minimize_single_bound() {
        let mut p = MilpProblem::new("t");
        let x = p
            .add_variable("x", VarKind::Continuous, 0.0, f64::INFINITY)
            .unwrap();
        p.add_constraint("lb", vec![(x, 1.0)], Sense::Ge, 3.0)
            .unwrap();
        p.set_objective(vec![(x, 1.0)]).unwrap();
        let r = solve_lp(&p, &opts()).unwrap();
        assert_eq!(r.status, SolveStatus::Optimal);
        assert!((r.objective.unwrap() - 3.0).abs() < 1e-9);
        assert!((r.values[x] - 3.0).abs() < 1e-9);
    }

    #[test]
    fn lp_two_demand_stacking() {
        // min c with c >= F+50, c >= F'+20, F' >= F+60.
        let mut p = MilpProblem::new("stack");
        let c = p
            .add_variable("c", VarKind::Continuous, 0.0, f64::INFINITY)
            .unwrap();
        let f1 = p
            .add_variable("F1", VarKind::Continuous, 0.0, f64::INFINITY)
            .unwrap();
        let f2 = p
            .add_variable("F2", VarKind::Continuous, 0.0, f64::INFINITY)
            .unwrap();
        p.add_constraint("roof_a", vec![(c, 1.0), (f1, -1.0)], Sense::Ge, 50.0)
            .unwrap();
        p.add_constraint("roof_b", vec![(c, 1.0), (f2, -1.0)], Sense::Ge, 20.0)
            .unwrap();
        p.add_constraint("sep", vec![(f2, 1.0), (f1, -1.0)], Sense::Ge, 60.0)
            .unwrap();
        p.set_objective(vec![(c, 1.0)]).unwrap();
        let r = solve_lp(&p, &opts()).unwrap();
        assert_eq!(r.status, SolveStatus::Optimal);
        assert!((r.objective.unwrap() - 80.0).abs() < 1e-9);
    }

    #[test]
    fn lp_detects_infeasible() {
        let mut p = MilpProblem::new("bad");
        let x = p
            .add_variable("x", VarKind::Continuous, 0.0, f64::INFINITY)
            .unwrap();
        p.add_constraint("ge", vec![(x, 1.0)], Sense::Ge, 2.0)
            .unwrap();
        p.add_constraint("le", vec![(x, 1.0)], Sense::Le, 1.0)
            .unwrap();
        p.set_objective(vec![(x, 1.0)]).unwrap();
        let r = solve_lp(&p, &opts()).unwrap();
        assert_eq!(r.status, SolveStatus::Infeasible);
        assert!(r.values.is_empty());
    }

    #[test]
    fn lp_detects_unbounded() {
        let mut p = MilpProblem::new("unb");
        let x = p
            .add_variable("x", VarKind::Continuous, 0.0, f64::INFINITY)
            .unwrap();
        p.set_objective(vec![(x, -1.0)]).unwrap();
        let r = solve_lp(&p, &opts()).unwrap();
        assert_eq!(r.status, SolveStatus::Unbounded);
    }

    #[test]
    fn lp_duality_holds_at_optimum() {
        let mut p = MilpProblem::new("dual");
        let x = p.add_variable("x", VarKind::Continuous, 0.0, 10.0).unwrap();
        let y = p.add_variable("y", VarKind::Continuous, 1.0, 8.0).unwrap();
        let z = p
            .add_variable("z", VarKind::Continuous, 0.0, f64::INFINITY)
            .unwrap();
        p.add_constraint("r1", vec![(x, 1.0), (y, 2.0), (z, 1.0)], Sense::Ge, 7.0)
            .unwrap();
        p.add_constraint("r2", vec![(x, -1.0), (y, 1.0)], Sense::Le, 4.0)
            .unwrap();
        p.add_constraint("r3", vec![(x, 1.0), (z, -2.0)], Sense::Eq, 1.0)
            .unwrap();
        p.set_objective(vec![(x, 2.0), (y, 1.0), (z, 3.0)]).unwrap();
        let r = solve_lp(&p, &opts()).unwrap();
        assert_eq!(r.status, SolveStatus::Optimal);
        let obj = r.objective.unwrap();
        assert!(
            (obj - r.best_bound).abs() <= 1e-6 * obj.abs().max(1.0),
            "primal {obj} vs dual {}",
            r.best_bound
        );
    }

    #[test]
    fn milp_rounds_up_integer() {
        let mut p = MilpProblem::new("int");
        let x = p
            .add_variable("x", VarKind::Integer, 0.0, f64::INFINITY)
            .unwrap();
        p.add_constraint("lb", vec![(x, 1.0)], Sense::Ge, 2.5)
            .unwrap();
        p.set_objective(vec![(x, 1.0)]).unwrap();
        let r = solve_milp(&p, &opts()).unwrap();
        assert_eq!(r.status, SolveStatus::Optimal);
        assert!((r.objective.unwrap() - 3.0).abs() < 1e-9);
    }

    #[test]
    fn milp_binary_knapsack() {
        // max 3a + 4b st 2a + 3b <= 5 (as min of the negation): optimum -7.
        let mut p = MilpProblem::new("knap");
        let a = p.add_variable("a", VarKind::Binary, 0.0, 1.0).unwrap();
        let b = p.add_variable("b", VarKind::Binary, 0.0, 1.0).unwrap();
        p.add_constraint("cap", vec![(a, 2.0), (b, 3.0)], Sense::Le, 5.0)
            .unwrap();
        p.set_objective(vec![(a, -3.0), (b, -4.0)]).unwrap();
        let r = solve_milp(&p, &opts()).unwrap();
        assert_eq!(r.status, SolveStatus::Optimal);
        assert!((r.objective.unwrap() - (-7.0)).abs() < 1e-6);
    }

    #[test]
    fn milp_is_deterministic() {
        let mut p = MilpProblem::new("det");
        let mut obj = Vec::new();
        for i in 0..6 {
            let v = p
                .add_variable(format!("x{i}"), VarKind::Binary, 0.0, 1.0)
                .unwrap();
            obj.push((v, -(1.0 + 0.3 * i as f64)));
        }
        p.add_constraint(
            "cap",
            (0..6).map(|i| (i, 1.0 + (i % 3) as f64)).collect(),
            Sense::Le,
            5.5,
        )
        .unwrap();
        p.set_objective(obj).unwrap();
        let r1 = solve_milp(&p, &opts()).unwrap();
        let r2 = solve_milp(&p, &opts()).unwrap();
        assert_eq!(r1.node_count, r2.node_count);
        assert_eq!(r1.simplex_iterations, r2.simplex_iterations);
        assert_eq!(r1.objective, r2.objective);
        assert_eq!(r1.values, r2.values);
    }

    #[test]
    fn milp_timeout_never_reports_wrong_optimal() {
        let mut p = MilpProblem::new("slow");
        let mut obj = Vec::new();
        for i in 0..14 {
            let v = p
                .add_variable(format!("x{i}"), VarKind::Binary, 0.0, 1.0)
                .unwrap();
            obj.push((v, -(7.0 + ((i * 37) % 11) as f64 / 3.0)));
        }
        p.add_constraint(
            "cap",
            (0..14).map(|i| (i, 3.0 + ((i * 17) % 7) as f64)).collect(),
            Sense::Le,
            20.5,
        )
        .unwrap();
        p.set_objective(obj).unwrap();
        let mut o = opts();
        o.time_limit_s = 1e-6;
        let r = solve_milp(&p, &o).unwrap();
        assert_eq!(r.status, SolveStatus::FeasibleTimeout);
    }

    #[test]
    fn adding_a_constraint_never_improves_the_minimum() {
        let mut p = MilpProblem::new("mono");
        let x = p.add_variable("x", VarKind::Continuous, 0.0, 10.0).unwrap();
        let y = p.add_variable("y", VarKind::Continuous, 0.0, 10.0).unwrap();
        p.add_constraint("r1", vec![(x, 1.0), (y, 1.0)], Sense::Ge, 4.0)
            .unwrap();
        p.set_objective(vec![(x, 1.0), (y, 2.0)]).unwrap();
        let base = solve_lp(&p, &opts()).unwrap().objective.unwrap();
        p.add_constraint("r2", vec![(y, 1.0)], Sense::Ge, 3.0)
            .unwrap();
        let tightened = solve_lp(&p, &opts()).unwrap().objective.unwrap();
        assert!(tightened >= base - 1e-9);
    }
}
