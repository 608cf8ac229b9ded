//! Codimension-one sheet decomposition of feasible measures and the
//! classical-recovery pipeline built on it.
//!
//! The density rho of a measure is minus the column-wise cumulative (x, y)
//! marginal (right-closed, normalized per column), a nonpositive monotone
//! staircase per column with range in [-1, 0]. Sheets are its left-continuous
//! quantiles phi_r(x) = min { y : rho(x, y) <= r } sampled at uniform levels;
//! their derivative field is read off the measure's conditional z-mean at
//! (x, phi_r(x)), with central finite differences kept only as a cross-check
//! (differences are wrong where sheets cross).

use crate::field::ScalarField;
use crate::grid::Grid;
use crate::measure::{centroid, occupation_lift, GriddedMeasure, MeasureError};
use crate::relax::{RelaxationResult, RelaxError};
use crate::problem::VariationalProblem;
use serde::Serialize;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Clone, Error)]
pub enum SheetError {
    #[error("sheet decomposition requires codimension one, got m = {0}")]
    NotCodimensionOne(usize),
    #[error("measure carries no interior mass")]
    EmptyMeasure,
    #[error(transparent)]
    Measure(#[from] MeasureError),
    #[error(transparent)]
    Field(#[from] crate::field::FieldError),
}

/// Column-normalized cumulative density: values[cell][j] = rho(x_cell, y_j).
#[derive(Debug, Clone)]
pub struct DensityField {
    pub grid: Arc<Grid>,
    pub values: Vec<Vec<f64>>,
    /// Columns that carried no mass and inherited the nearest column's
    /// staircase (kept for sheet continuity, reported to the caller).
    pub inherited_columns: Vec<usize>,
}

impl DensityField {
    /// Distinct negative plateau values across all columns (1e-9 grouping);
    /// atomic measures decompose exactly with one level per plateau.
    pub fn plateau_count(&self) -> usize {
        let mut values: Vec<f64> = self
            .values
            .iter()
            .flat_map(|col| col.iter().copied())
            .filter(|v| *v < 0.0)
            .collect();
        values.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut count = 0;
        let mut last = f64::INFINITY;
        for v in values {
            if (v - last).abs() > 1e-9 {
                count += 1;
                last = v;
            }
        }
        count
    }
}

/// Build the density staircase of a codimension-one measure.
pub fn density(mu: &GriddedMeasure) -> Result<DensityField, SheetError> {
    let grid = mu.grid.clone();
    if grid.m != 1 {
        return Err(SheetError::NotCodimensionOne(grid.m));
    }
    let ny = grid.y_axes[0].len();
    let ncells = grid.num_cells();
    let mut marginal = vec![vec![0.0f64; ny]; ncells];
    for (id, w) in &mu.weights {
        marginal[id.cell as usize][id.y as usize] += w;
    }
    let mut values = vec![Vec::new(); ncells];
    let mut inherited = Vec::new();
    let mut filled: Vec<usize> = Vec::new();
    for cell in 0..ncells {
        let total: f64 = marginal[cell].iter().sum();
        if total <= 0.0 {
            inherited.push(cell);
            continue;
        }
        let mut cum = 0.0;
        let col: Vec<f64> = marginal[cell]
            .iter()
            .map(|w| {
                cum += w;
                -(cum / total)
            })
            .collect();
        values[cell] = col;
        filled.push(cell);
    }
    if filled.is_empty() {
        return Err(SheetError::EmptyMeasure);
    }
    for &cell in &inherited {
        let src = nearest_filled(&grid, &filled, cell);
        values[cell] = values[src].clone();
    }
    Ok(DensityField {
        grid,
        values,
        inherited_columns: inherited,
    })
}

fn nearest_filled(grid: &Grid, filled: &[usize], cell: usize) -> usize {
    let target = &grid.cells[cell].center;
    let mut best = filled[0];
    let mut best_d = f64::INFINITY;
    for &c in filled {
        let d: f64 = grid.cells[c]
            .center
            .iter()
            .zip(target)
            .map(|(a, b)| (a - b) * (a - b))
            .sum();
        if d < best_d {
            best_d = d;
            best = c;
        }
    }
    best
}

/// Quantile sheets at levels r_k = -(k - 1/2)/K with nu-weight 1/K each.
#[derive(Debug, Clone)]
pub struct SheetFamily {
    pub grid: Arc<Grid>,
    pub levels: Vec<f64>,
    pub nu_weights: Vec<f64>,
    /// values[k][cell]: the sheet's y value at the cell center.
    pub values: Vec<Vec<f64>>,
    /// derivatives[k][cell]: length-n gradient from the centroid identity.
    pub derivatives: Vec<Vec<Vec<f64>>>,
}

impl SheetFamily {
    /// Central finite differences of sheet k, as a consistency check against
    /// the centroid-based derivatives (expected to disagree at crossings).
    pub fn finite_difference_gradient(&self, k: usize) -> Vec<Vec<f64>> {
        let grid = &self.grid;
        let n = grid.n();
        let phi = &self.values[k];
        (0..grid.num_cells())
            .map(|cell| {
                (0..n)
                    .map(|axis| {
                        let h = grid.x_widths[axis];
                        match (
                            grid.neighbor(cell, axis, -1),
                            grid.neighbor(cell, axis, 1),
                        ) {
                            (Some(a), Some(b)) => (phi[b] - phi[a]) / (2.0 * h),
                            (None, Some(b)) => (phi[b] - phi[cell]) / h,
                            (Some(a), None) => (phi[cell] - phi[a]) / h,
                            (None, None) => 0.0,
                        }
                    })
                    .collect()
            })
            .collect()
    }
}

/// Default sheet count: one level per density plateau for atomic measures
/// (capped at 64), else 16.
pub fn default_sheet_count(rho: &DensityField) -> usize {
    let plateaus = rho.plateau_count();
    if plateaus > 0 && plateaus <= 64 {
        plateaus
    } else {
        16
    }
}

pub fn extract_sheets(
    rho: &DensityField,
    mu: &GriddedMeasure,
    sheet_count: usize,
) -> Result<SheetFamily, SheetError> {
    let grid = rho.grid.clone();
    if grid.m != 1 {
        return Err(SheetError::NotCodimensionOne(grid.m));
    }
    let k_total = sheet_count.max(1);
    let cf = centroid(mu);
    let n = grid.n();
    let y_nodes = &grid.y_axes[0].nodes;
    let mut levels = Vec::with_capacity(k_total);
    let mut values = Vec::with_capacity(k_total);
    let mut derivatives = Vec::with_capacity(k_total);
    for k in 1..=k_total {
        let r = -((k as f64 - 0.5) / k_total as f64);
        let mut phi = vec![0.0; grid.num_cells()];
        let mut dphi = vec![vec![0.0; n]; grid.num_cells()];
        for cell in 0..grid.num_cells() {
            let col = &rho.values[cell];
            // left-continuous quantile: smallest grid y with rho <= r
            let mut j = col.len() - 1;
            for (idx, v) in col.iter().enumerate() {
                if *v <= r {
                    j = idx;
                    break;
                }
            }
            phi[cell] = y_nodes[j];
            // derivative from the conditional z-mean at (x, phi_r(x));
            // inherited columns fall back to the nearest fiber
            let fiber = cf
                .lookup(cell as u32, j as u32)
                .or_else(|| nearest_fiber(&cf, cell as u32, j as u32));
            if let Some(fiber) = fiber {
                dphi[cell].copy_from_slice(&fiber.z_mean);
            }
        }
        levels.push(r);
        values.push(phi);
        derivatives.push(dphi);
    }
    Ok(SheetFamily {
        grid,
        levels,
        nu_weights: vec![1.0 / k_total as f64; k_total],
        values,
        derivatives,
    })
}

/// Fallback fiber for columns that carried no mass at the requested node:
/// the nearest fiber in the same column, else the nearest cell overall.
fn nearest_fiber<'a>(
    cf: &'a crate::measure::CentroidField,
    cell: u32,
    y: u32,
) -> Option<&'a crate::measure::Fiber> {
    let mut best: Option<&crate::measure::Fiber> = None;
    let mut best_key = (u32::MAX, u32::MAX);
    for fiber in &cf.fibers {
        let dc = fiber.cell.abs_diff(cell);
        let dy = fiber.y.abs_diff(y);
        let key = (dc, dy);
        if key < best_key {
            best_key = key;
            best = Some(fiber);
        }
    }
    best
}

/// Max deviation of the superposition identity over z-affine test fields:
/// | int phi d mu - sum_k nu_k sum_cells vol phi(x, phi_k(x), Dphi_k(x)) |.
pub fn check_superposition(
    mu: &GriddedMeasure,
    family: &SheetFamily,
    test_fields: &[ScalarField],
) -> Result<f64, SheetError> {
    let grid = &family.grid;
    let scale = grid.domain.volume() / grid.total_cell_volume();
    let mut worst = 0.0f64;
    for field in test_fields {
        let lhs = mu.integrate(field)?;
        let mut rhs = 0.0;
        for (k, nu) in family.nu_weights.iter().enumerate() {
            for (cell, xc) in grid.cells.iter().enumerate() {
                let y = [family.values[k][cell]];
                let z = &family.derivatives[k][cell];
                rhs += nu * xc.volume * scale * field.eval(&xc.center, &y, z)?;
            }
        }
        worst = worst.max((lhs - rhs).abs());
    }
    Ok(worst)
}

/// Boundary counterpart: the sheet decomposition of the interior measure
/// induces one of the boundary measure. Sheets extend to the boundary by the
/// nearest retained column.
pub fn check_boundary_superposition(
    mu: &GriddedMeasure,
    family: &SheetFamily,
    test_fields: &[ScalarField],
) -> Result<f64, SheetError> {
    let grid = &family.grid;
    let mut worst = 0.0f64;
    for field in test_fields {
        let lhs = mu.integrate_boundary(field)?;
        let mut rhs = 0.0;
        for (k, nu) in family.nu_weights.iter().enumerate() {
            for bnode in &grid.boundary {
                let cell = nearest_cell_to(grid, &bnode.x);
                let y = [family.values[k][cell]];
                rhs += nu * bnode.weight * field.eval_boundary(&bnode.x, &y)?;
            }
        }
        worst = worst.max((lhs - rhs).abs());
    }
    Ok(worst)
}

pub(crate) fn nearest_cell_to(grid: &Grid, x: &[f64]) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (ci, cell) in grid.cells.iter().enumerate() {
        let d: f64 = cell
            .center
            .iter()
            .zip(x)
            .map(|(a, b)| (a - b) * (a - b))
            .sum();
        if d < best_d {
            best_d = d;
            best = ci;
        }
    }
    best
}

/// Outcome of the recovery pipeline on one relaxation result.
#[derive(Debug, Clone, Serialize)]
pub struct RecoveryReport {
    pub sheet_count: usize,
    pub best_sheet: usize,
    pub best_value: f64,
    pub relaxed_value: f64,
    /// best_value - relaxed_value; nonpositive values mean the recovered
    /// function did at least as well as the measure.
    pub gap: f64,
    pub sheet_values: Vec<f64>,
    pub max_f_residual: f64,
    pub max_g_residual: f64,
    pub feasible_sheets: usize,
    /// Some(pass) when L is flagged convex in z and the no-gap bound
    /// best <= relaxed + epsilon was asserted; None when the flag is off and
    /// the bound is not claimed.
    pub no_gap_asserted: Option<bool>,
    pub epsilon: f64,
    pub inherited_columns: usize,
}

/// Evaluate every sheet of the decomposed optimal measure as a classical
/// candidate and pick the best feasible one.
pub fn recover_classical(
    problem: &VariationalProblem,
    result: &RelaxationResult,
    sheet_count: Option<usize>,
    epsilon: f64,
) -> Result<RecoveryReport, RelaxError> {
    if problem.m != 1 {
        return Err(RelaxError::Problem(
            crate::problem::ProblemError::Invalid(format!(
                "classical recovery requires codimension one, got m = {}",
                problem.m
            )),
        ));
    }
    let mu = &result.measure;
    let rho = density(mu).map_err(sheet_to_relax)?;
    let count = sheet_count.unwrap_or_else(|| default_sheet_count(&rho));
    let family = extract_sheets(&rho, mu, count).map_err(sheet_to_relax)?;
    let grid = &family.grid;
    let scale = grid.domain.volume() / grid.total_cell_volume();

    let mut sheet_values = Vec::with_capacity(count);
    let mut feasible = Vec::with_capacity(count);
    let mut max_f = 0.0f64;
    let mut max_g = 0.0f64;
    for k in 0..count {
        let mut value = 0.0;
        let mut ok = true;
        for (cell, xc) in grid.cells.iter().enumerate() {
            let y = [family.values[k][cell]];
            let z = &family.derivatives[k][cell];
            value += xc.volume * scale * problem.l.eval(&xc.center, &y, z)?;
            if let Some(f) = &problem.f {
                let v = f.eval(&xc.center, &y, z)?.abs();
                max_f = max_f.max(v);
                if v > result_tol(result) {
                    ok = false;
                }
            }
            if let Some(g) = &problem.g {
                let v = g.eval(&xc.center, &y, z)?;
                max_g = max_g.max(v);
                if v > result_tol(result) {
                    ok = false;
                }
            }
        }
        for bnode in &grid.boundary {
            let cell = nearest_cell_to(grid, &bnode.x);
            let y = [family.values[k][cell]];
            value += bnode.weight * problem.l_b.eval_boundary(&bnode.x, &y)?;
            if let Some(fb) = &problem.f_b {
                if fb.eval_boundary(&bnode.x, &y)?.abs() > result_tol(result) {
                    ok = false;
                }
            }
            if let Some(gb) = &problem.g_b {
                if gb.eval_boundary(&bnode.x, &y)? > result_tol(result) {
                    ok = false;
                }
            }
        }
        sheet_values.push(value);
        feasible.push(ok);
    }

    let mut best_sheet = 0;
    let mut best_value = f64::INFINITY;
    for k in 0..count {
        if feasible[k] && sheet_values[k] < best_value {
            best_value = sheet_values[k];
            best_sheet = k;
        }
    }
    if !best_value.is_finite() {
        // no feasible sheet at all; fall back to the raw minimum for the
        // report and leave the assertion failed
        for k in 0..count {
            if sheet_values[k] < best_value {
                best_value = sheet_values[k];
                best_sheet = k;
            }
        }
    }
    let gap = best_value - result.value;
    let no_gap_asserted = if problem.l.convex_in_z {
        Some(gap <= epsilon && feasible.iter().any(|f| *f))
    } else {
        None
    };
    Ok(RecoveryReport {
        sheet_count: count,
        best_sheet,
        best_value,
        relaxed_value: result.value,
        gap,
        sheet_values,
        max_f_residual: max_f,
        max_g_residual: max_g,
        feasible_sheets: feasible.iter().filter(|f| **f).count(),
        no_gap_asserted,
        epsilon,
        inherited_columns: rho.inherited_columns.len(),
    })
}

fn result_tol(_result: &RelaxationResult) -> f64 {
    // sheets inherit the support-filter slack; their nodes already passed it
    1e-5
}

fn sheet_to_relax(e: SheetError) -> RelaxError {
    match e {
        SheetError::Measure(m) => RelaxError::Measure(m),
        SheetError::Field(f) => RelaxError::Field(f),
        other => RelaxError::Problem(crate::problem::ProblemError::Invalid(other.to_string())),
    }
}

/// The two-sheet demonstration measure: the 2/3 gamma + 1/3 eta convex
/// combination lifted onto a grid whose y nodes are exactly the curve values
/// at the cell centers and endpoints (and whose z nodes are the two slopes),
/// so the lift involves no snapping at all.
pub fn two_sheet_demo(nx: usize) -> Result<(Arc<Grid>, GriddedMeasure), SheetError> {
    let (gamma, eta, w_gamma, w_eta) = crate::problem::two_sheet_curves();
    let domain = crate::domain::Domain::interval(0.0, 1.0);
    let mut y_values = Vec::new();
    for i in 0..nx {
        let x = (i as f64 + 0.5) / nx as f64;
        y_values.push(gamma(x));
        y_values.push(eta(x));
    }
    for x in [0.0, 1.0] {
        y_values.push(gamma(x));
        y_values.push(eta(x));
    }
    let y_axis = crate::grid::Axis::from_values(y_values);
    let z_axis = crate::grid::Axis::from_values(vec![-0.5, 0.5]);
    let grid = Arc::new(
        Grid::with_explicit_axes(&domain, vec![y_axis], vec![z_axis], nx)
            .map_err(|_| SheetError::EmptyMeasure)?,
    );
    let mu_gamma = occupation_lift(&grid, &|x: &[f64]| vec![gamma(x[0])])?;
    let mu_eta = occupation_lift(&grid, &|x: &[f64]| vec![eta(x[0])])?;
    let mu = GriddedMeasure::combine(&[(w_gamma, &mu_gamma), (w_eta, &mu_eta)])?;
    Ok((grid, mu))
}

// ---------------------------------------------------------------------------
// CSV exports

pub fn density_to_csv(rho: &DensityField) -> String {
    let grid = &rho.grid;
    let n = grid.n();
    let mut out = String::new();
    let mut header: Vec<String> = (1..=n).map(|a| format!("x{a}")).collect();
    header.push("y1".into());
    header.push("rho".into());
    out.push_str(&header.join(","));
    out.push('\n');
    for (cell, xc) in grid.cells.iter().enumerate() {
        for (j, y) in grid.y_axes[0].nodes.iter().enumerate() {
            let mut fields: Vec<String> =
                xc.center.iter().map(|v| format!("{v:.16e}")).collect();
            fields.push(format!("{y:.16e}"));
            fields.push(format!("{:.16e}", rho.values[cell][j]));
            out.push_str(&fields.join(","));
            out.push('\n');
        }
    }
    out
}

pub fn sheets_to_csv(family: &SheetFamily) -> String {
    let grid = &family.grid;
    let n = grid.n();
    let mut out = String::new();
    let mut header: Vec<String> = vec!["r".into()];
    header.extend((1..=n).map(|a| format!("x{a}")));
    header.push("phi".into());
    header.extend((1..=n).map(|a| format!("dphi{a}")));
    out.push_str(&header.join(","));
    out.push('\n');
    for (k, r) in family.levels.iter().enumerate() {
        for (cell, xc) in grid.cells.iter().enumerate() {
            let mut fields: Vec<String> = vec![format!("{r:.16e}")];
            fields.extend(xc.center.iter().map(|v| format!("{v:.16e}")));
            fields.push(format!("{:.16e}", family.values[k][cell]));
            fields.extend(
                family.derivatives[k][cell]
                    .iter()
                    .map(|v| format!("{v:.16e}")),
            );
            out.push_str(&fields.join(","));
            out.push('\n');
        }
    }
    out
}
