//! Sparse linear programs and a deterministic two-phase revised simplex.
//!
//! Problems are stated as `min c.x` over rows `a.x {=, <=, >=} b` with
//! per-variable lower bounds (default 0) and optional upper bounds. The
//! solver keeps a dense LU factorization of the basis with product-form eta
//! updates between refactorizations, prices with the most-negative reduced
//! cost (ties to the lowest column index) and falls back to Bland's rule
//! (lowest eligible index everywhere) whenever a degenerate streak appears,
//! which restores the anti-cycling guarantee while keeping pivot sequences
//! bit-reproducible. Optimal solutions carry primal/dual/complementary-
//! slackness certificate residuals; [`verify`] recomputes them from scratch.

mod lu;
mod simplex;
mod text;

pub use simplex::{solve, solve_with, SolveOptions};
pub use text::{format_lp, parse_lp};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Relation {
    Eq,
    Le,
    Ge,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub coeffs: Vec<(usize, f64)>,
    pub relation: Relation,
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    pub num_vars: usize,
    /// Objective coefficients, length `num_vars`; the solver minimizes.
    pub objective: Vec<f64>,
    pub rows: Vec<Row>,
    pub lower: Vec<f64>,
    pub upper: Vec<Option<f64>>,
}

impl LinearProgram {
    pub fn new(num_vars: usize) -> Self {
        LinearProgram {
            num_vars,
            objective: vec![0.0; num_vars],
            rows: Vec::new(),
            lower: vec![0.0; num_vars],
            upper: vec![None; num_vars],
        }
    }

    pub fn add_row(&mut self, relation: Relation, rhs: f64, coeffs: Vec<(usize, f64)>) {
        self.rows.push(Row {
            coeffs,
            relation,
            rhs,
        });
    }

    pub fn validate(&self) -> Result<(), LpError> {
        if self.objective.len() != self.num_vars
            || self.lower.len() != self.num_vars
            || self.upper.len() != self.num_vars
        {
            return Err(LpError::Malformed(
                "objective/bound lengths disagree with num_vars".into(),
            ));
        }
        for c in &self.objective {
            if !c.is_finite() {
                return Err(LpError::Malformed("non-finite objective coefficient".into()));
            }
        }
        for (i, row) in self.rows.iter().enumerate() {
            if !row.rhs.is_finite() {
                return Err(LpError::Malformed(format!("row {i}: non-finite rhs")));
            }
            for (j, v) in &row.coeffs {
                if *j >= self.num_vars {
                    return Err(LpError::Malformed(format!(
                        "row {i}: column {j} out of range"
                    )));
                }
                if !v.is_finite() {
                    return Err(LpError::Malformed(format!("row {i}: non-finite coefficient")));
                }
            }
        }
        for (l, u) in self.lower.iter().zip(&self.upper) {
            if !l.is_finite() {
                return Err(LpError::Malformed("non-finite lower bound".into()));
            }
            if let Some(u) = u {
                if !u.is_finite() || u < l {
                    return Err(LpError::Malformed("empty bound interval".into()));
                }
            }
        }
        Ok(())
    }

    /// Scale used by certificate tolerances: 1 + |b|_inf + |c|_inf.
    pub fn certificate_scale(&self) -> f64 {
        let bmax = self
            .rows
            .iter()
            .map(|r| r.rhs.abs())
            .fold(0.0f64, f64::max);
        let cmax = self.objective.iter().fold(0.0f64, |a, c| a.max(c.abs()));
        1.0 + bmax + cmax
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Certificates {
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub comp_slackness: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    pub primal: Vec<f64>,
    /// One multiplier per row; >= 0 on `>=` rows, <= 0 on `<=` rows, free on
    /// equalities, so that weak duality reads `b.y <= c.x`.
    pub dual: Vec<f64>,
    pub objective: f64,
    pub certificates: Certificates,
    pub iterations: usize,
    pub refactorizations: usize,
}

#[derive(Debug, Clone, Error)]
pub enum LpError {
    #[error("malformed linear program: {0}")]
    Malformed(String),
    #[error("numerical breakdown at pivot {pivot}: {detail}")]
    NumericalBreakdown { pivot: usize, detail: String },
    #[error("iteration cap {limit} exceeded")]
    IterationLimit { limit: usize },
}

/// Independent certificate check: recomputes all residuals from the raw
/// problem data and the claimed solution, without touching solver state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CertificateReport {
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub comp_slackness: f64,
    pub duality_gap: f64,
    pub tolerance: f64,
    pub pass: bool,
}

pub fn verify(lp: &LinearProgram, sol: &LpSolution) -> CertificateReport {
    let scale = lp.certificate_scale();
    let tolerance = 1e-7 * scale;
    let x = &sol.primal;
    let y = &sol.dual;

    let mut primal = 0.0f64;
    for (i, row) in lp.rows.iter().enumerate() {
        let ax: f64 = row.coeffs.iter().map(|(j, v)| v * x[*j]).sum();
        let viol = match row.relation {
            Relation::Eq => (ax - row.rhs).abs(),
            Relation::Le => (ax - row.rhs).max(0.0),
            Relation::Ge => (row.rhs - ax).max(0.0),
        };
        primal = primal.max(viol);
        // dual sign conditions fold into the dual residual
        let _ = i;
    }
    for j in 0..lp.num_vars {
        primal = primal.max(lp.lower[j] - x[j]);
        if let Some(u) = lp.upper[j] {
            primal = primal.max(x[j] - u);
        }
    }

    // reduced costs r = c - A^T y; with bounds, r_j >= 0 when x_j sits at its
    // lower bound, r_j <= 0 at an upper bound, r_j ~ 0 in between
    let mut reduced = lp.objective.clone();
    let mut dual = 0.0f64;
    for (i, row) in lp.rows.iter().enumerate() {
        let yi = y[i];
        match row.relation {
            Relation::Le => dual = dual.max(yi),
            Relation::Ge => dual = dual.max(-yi),
            Relation::Eq => {}
        }
        for (j, v) in &row.coeffs {
            reduced[*j] -= v * yi;
        }
    }
    let bound_tol = 1e-7 * scale;
    let mut comp = 0.0f64;
    for j in 0..lp.num_vars {
        let at_lower = (x[j] - lp.lower[j]).abs() <= bound_tol;
        let at_upper = lp.upper[j].map_or(false, |u| (x[j] - u).abs() <= bound_tol);
        let r = reduced[j];
        if at_lower && at_upper {
            // fixed variable: any sign
        } else if at_lower {
            dual = dual.max(-r);
            comp = comp.max(((x[j] - lp.lower[j]) * r).abs());
        } else if at_upper {
            dual = dual.max(r);
        } else {
            dual = dual.max(r.abs());
        }
    }
    for (i, row) in lp.rows.iter().enumerate() {
        let ax: f64 = row.coeffs.iter().map(|(j, v)| v * x[*j]).sum();
        comp = comp.max((y[i] * (ax - row.rhs)).abs());
    }

    let cx: f64 = lp
        .objective
        .iter()
        .zip(x)
        .map(|(c, xj)| c * xj)
        .sum();
    // dual objective b.y + sum over bounded-away terms; with default lower
    // bounds at 0 this is b.y plus lower-bound contributions of reduced costs
    let mut by: f64 = lp.rows.iter().zip(y).map(|(r, yi)| r.rhs * yi).sum();
    for j in 0..lp.num_vars {
        if lp.lower[j] != 0.0 {
            by += lp.lower[j] * reduced[j].max(0.0);
        }
        if let Some(u) = lp.upper[j] {
            by += u * reduced[j].min(0.0);
        }
    }
    let duality_gap = cx - by;

    CertificateReport {
        primal_residual: primal,
        dual_residual: dual,
        comp_slackness: comp,
        duality_gap,
        tolerance,
        pass: primal <= tolerance && dual <= tolerance && comp <= tolerance,
    }
}

#[cfg(test)]
mod tests;
