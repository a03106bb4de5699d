//! Randomized cross-checks of the branch-and-bound solver against exhaustive
//! enumeration on small bounded problems.

use eonplan::milp::{MilpProblem, Sense, VarKind};
use eonplan::solver::{solve_lp, solve_milp, SolveOptions, SolveStatus};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn random_problem(rng: &mut ChaCha8Rng, all_binary: bool) -> MilpProblem {
    let n = rng.random_range(2..=8usize);
    let m = rng.random_range(1..=8usize);
    let mut p = MilpProblem::new("rand");
    for j in 0..n {
        if all_binary {
            p.add_variable(format!("x{j}"), VarKind::Binary, 0.0, 1.0)
                .unwrap();
        } else {
            let ub = rng.random_range(1.0..=4.0_f64).round();
            let kind = if rng.random_bool(0.5) {
                VarKind::Integer
            } else {
                VarKind::Continuous
            };
            p.add_variable(format!("x{j}"), kind, 0.0, ub).unwrap();
        }
    }
    for i in 0..m {
        let mut terms = Vec::new();
        for j in 0..n {
            if rng.random_bool(0.6) {
                terms.push((j, rng.random_range(-4..=4) as f64));
            }
        }
        if terms.is_empty() {
            terms.push((rng.random_range(0..n), 1.0));
        }
        let sense = match rng.random_range(0..6) {
            0 => Sense::Eq,
            1 | 2 => Sense::Ge,
            _ => Sense::Le,
        };
        let rhs = rng.random_range(-6..=8) as f64;
        p.add_constraint(format!("r{i}"), terms, sense, rhs).unwrap();
    }
    let obj: Vec<(usize, f64)> = (0..n)
        .map(|j| (j, rng.random_range(-5..=5) as f64))
        .collect();
    p.set_objective(obj).unwrap();
    p
}

/// Exhaustive optimum over the integer lattice of a fully integer problem.
fn enumerate_optimum(p: &MilpProblem) -> Option<f64> {
    let dims: Vec<usize> = p
        .variables()
        .iter()
        .map(|v| (v.upper - v.lower) as usize + 1)
        .collect();
    let n = dims.len();
    let mut point = vec![0usize; n];
    let mut best: Option<f64> = None;
    loop {
        let values: Vec<f64> = point
            .iter()
            .zip(p.variables())
            .map(|(&k, v)| v.lower + k as f64)
            .collect();
        if p.point_violations(&values, 1e-9).is_empty() {
            let obj = p.objective_value(&values);
            best = Some(match best {
                Some(b) if b <= obj => b,
                _ => obj,
            });
        }
        let mut carry = 0;
        loop {
            if carry == n {
                return best;
            }
            point[carry] += 1;
            if point[carry] < dims[carry] {
                break;
            }
            point[carry] = 0;
            carry += 1;
        }
    }
}

#[test]
fn binary_milp_matches_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let options = SolveOptions::default();
    for trial in 0..150 {
        let p = random_problem(&mut rng, true);
        let expected = enumerate_optimum(&p);
        let got = solve_milp(&p, &options).unwrap();
        match (expected, got.status) {
            (Some(best), SolveStatus::Optimal) => {
                let obj = got.objective.unwrap();
                assert!(
                    (obj - best).abs() < 1e-6,
                    "trial {trial}: solver {obj} vs enumeration {best}"
                );
                assert!(
                    p.point_violations(&got.values, 1e-6).is_empty(),
                    "trial {trial}: incumbent violates constraints"
                );
            }
            (None, SolveStatus::Infeasible) => {}
            (exp, status) => panic!("trial {trial}: enumeration {exp:?} but solver {status:?}"),
        }
    }
}

#[test]
fn small_integer_milp_matches_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let options = SolveOptions::default();
    let mut solved = 0;
    for trial in 0..150 {
        let mut p = random_problem(&mut rng, false);
        // Make every variable integer so enumeration is exact.
        let vars: Vec<_> = p.variables().to_vec();
        let mut q = MilpProblem::new("int");
        for v in &vars {
            q.add_variable(v.name.clone(), VarKind::Integer, v.lower, v.upper)
                .unwrap();
        }
        for c in p.constraints() {
            q.add_constraint(c.name.clone(), c.terms.clone(), c.sense, c.rhs)
                .unwrap();
        }
        q.set_objective(p.objective().to_vec()).unwrap();
        std::mem::swap(&mut p, &mut q);

        let expected = enumerate_optimum(&p);
        let got = solve_milp(&p, &options).unwrap();
        match (expected, got.status) {
            (Some(best), SolveStatus::Optimal) => {
                solved += 1;
                let obj = got.objective.unwrap();
                assert!(
                    (obj - best).abs() < 1e-6,
                    "trial {trial}: solver {obj} vs enumeration {best}"
                );
            }
            (None, SolveStatus::Infeasible) => {}
            (exp, status) => panic!("trial {trial}: enumeration {exp:?} but solver {status:?}"),
        }
    }
    assert!(solved > 30, "too few feasible instances: {solved}");
}

#[test]
fn lp_relaxation_bounds_the_milp() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let options = SolveOptions::default();
    for _ in 0..80 {
        let p = random_problem(&mut rng, true);
        let lp = solve_lp(&p, &options).unwrap();
        let ip = solve_milp(&p, &options).unwrap();
        if let (SolveStatus::Optimal, SolveStatus::Optimal) = (lp.status, ip.status) {
            assert!(lp.objective.unwrap() <= ip.objective.unwrap() + 1e-6);
            let lo = lp.objective.unwrap();
            assert!(
                (lo - lp.best_bound).abs() <= 1e-6 * lo.abs().max(1.0),
                "duality gap: {lo} vs {}",
                lp.best_bound
            );
        }
    }
}
