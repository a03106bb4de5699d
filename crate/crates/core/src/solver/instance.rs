//! Internal solver form of a problem: pinned variables substituted out,
//! rows equilibrated, and never-binding rows dropped.

use crate::milp::{MilpProblem, Sense, VarKind};

#[derive(Debug, Clone)]
pub(crate) struct IRow {
    pub terms: Vec<(usize, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

impl IRow {
    /// Signed violation at `x`: positive means the row is violated.
    pub fn violation(&self, x: &[f64]) -> f64 {
        let lhs: f64 = self.terms.iter().map(|&(j, a)| a * x[j]).sum();
        match self.sense {
            Sense::Le => lhs - self.rhs,
            Sense::Ge => self.rhs - lhs,
            Sense::Eq => (lhs - self.rhs).abs(),
        }
    }
}

#[derive(Debug)]
pub(crate) struct Instance {
    /// Reduced (free) column count.
    pub n: usize,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub obj: Vec<f64>,
    pub is_int: Vec<bool>,
    pub rows: Vec<IRow>,
    pub obj_offset: f64,
    /// Full problem variable id of each reduced column.
    pub col_origin: Vec<usize>,
    /// Full-width values with pinned variables already filled in.
    pub pinned_template: Vec<f64>,
}

pub(crate) enum Prepared {
    Ready(Instance),
    /// A pinned-variable substitution already contradicts a constraint.
    Infeasible,
}

impl Instance {
    /// Reassembles a full-width value vector from reduced column values.
    pub fn expand(&self, x: &[f64]) -> Vec<f64> {
        let mut full = self.pinned_template.clone();
        for (col, &v) in x.iter().enumerate() {
            full[self.col_origin[col]] = v;
        }
        full
    }
}

pub(crate) fn prepare(problem: &MilpProblem, relax_integrality: bool) -> Prepared {
    let vars = problem.variables();
    let mut col_of: Vec<Option<usize>> = vec![None; vars.len()];
    let mut col_origin = Vec::new();
    let mut pinned_template = vec![0.0; vars.len()];
    for v in vars {
        if v.lower == v.upper {
            pinned_template[v.id] = v.lower;
        } else {
            col_of[v.id] = Some(col_origin.len());
            col_origin.push(v.id);
        }
    }
    let n = col_origin.len();
    let mut lower = Vec::with_capacity(n);
    let mut upper = Vec::with_capacity(n);
    let mut is_int = Vec::with_capacity(n);
    for &orig in &col_origin {
        let v = &vars[orig];
        lower.push(v.lower);
        upper.push(v.upper);
        is_int.push(
            !relax_integrality && matches!(v.kind, VarKind::Binary | VarKind::Integer),
        );
    }

    let mut obj = vec![0.0; n];
    let mut obj_offset = 0.0;
    for &(var, coeff) in problem.objective() {
        match col_of[var] {
            Some(col) => obj[col] += coeff,
            None => obj_offset += coeff * pinned_template[var],
        }
    }

    let mut rows = Vec::with_capacity(problem.constraints().len());
    for c in problem.constraints() {
        let mut terms: Vec<(usize, f64)> = Vec::with_capacity(c.terms.len());
        let mut fixed = 0.0;
        let mut fixed_scale = 0.0;
        for &(var, coeff) in &c.terms {
            match col_of[var] {
                Some(col) => terms.push((col, coeff)),
                None => {
                    fixed += coeff * pinned_template[var];
                    fixed_scale += (coeff * pinned_template[var]).abs();
                }
            }
        }
        let rhs = c.rhs - fixed;
        if terms.is_empty() {
            // Constant row: just check it holds for the substituted values.
            let tol = 1e-5 * (1.0 + c.rhs.abs() + fixed_scale);
            let ok = match c.sense {
                Sense::Le => 0.0 <= rhs + tol,
                Sense::Ge => 0.0 >= rhs - tol,
                Sense::Eq => rhs.abs() <= tol,
            };
            if !ok {
                return Prepared::Infeasible;
            }
            continue;
        }
        // Row equilibration keeps the feasibility tolerance meaningful across
        // the big-M and unit-coefficient families.
        let scale = terms
            .iter()
            .map(|&(_, a)| a.abs())
            .fold(0.0_f64, f64::max);
        let inv = 1.0 / scale;
        for t in &mut terms {
            t.1 *= inv;
        }
        let rhs = rhs * inv;

        // Drop rows that no point inside the bound box can violate. Bounds
        // only tighten during branch-and-bound, so this stays valid.
        let mut min_act = 0.0_f64;
        let mut max_act = 0.0_f64;
        for &(col, a) in &terms {
            let (lo, up) = (lower[col], upper[col]);
            let (m1, m2) = if a >= 0.0 {
                (a * lo, a * up)
            } else {
                (a * up, a * lo)
            };
            min_act += m1;
            max_act += m2;
        }
        let rtol = 1e-9 * (1.0 + rhs.abs());
        let redundant = match c.sense {
            Sense::Le => max_act.is_finite() && max_act <= rhs + rtol,
            Sense::Ge => min_act.is_finite() && min_act >= rhs - rtol,
            Sense::Eq => false,
        };
        if redundant {
            continue;
        }
        rows.push(IRow {
            terms,
            sense: c.sense,
            rhs,
        });
    }

    Prepared::Ready(Instance {
        n,
        lower,
        upper,
        obj,
        is_int,
        rows,
        obj_offset,
        col_origin,
        pinned_template,
    })
}
