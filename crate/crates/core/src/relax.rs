//! Discretized occupation-measure relaxation: assemble the LP over a grid
//! and a test basis, solve it, and extract the optimal measure.
//!
//! Columns are interior node weights (mass per node) followed by boundary
//! node weights. Rows, in order: the mass row (plain sum = |Omega|), one row
//! per interior hat and direction (rhs 0, no boundary coupling), one row per
//! monomial and direction (boundary weights enter with -phi n_l), then the
//! integral-constraint rows. Support filtering drops interior nodes with
//! |F| > tol_F or G > tol_G and boundary nodes violating the boundary
//! constraints, before the LP ever sees them.

use crate::basis::{decode_indices, TestBasis};
use crate::field::ScalarField;
use crate::grid::Grid;
use crate::lp::{self, LinearProgram, LpError, LpStatus, Relation};
use crate::measure::{BNodeId, GriddedMeasure, MeasureError, NodeId};
use crate::problem::{IntegralRelation, VariationalProblem};
use serde::Serialize;
use std::collections::BTreeMap;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Clone, Error)]
pub enum RelaxError {
    #[error("support filtering removed every interior node (tol_F = {tol_f:.3e}, tol_G = {tol_g:.3e})")]
    EmptySupport { tol_f: f64, tol_g: f64 },
    #[error("relaxation LP is infeasible: {0}")]
    Infeasible(String),
    #[error("relaxation LP is unbounded")]
    Unbounded,
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error(transparent)]
    Field(#[from] crate::field::FieldError),
    #[error(transparent)]
    Measure(#[from] MeasureError),
    #[error("candidate violates constraints at {count} nodes; first: {first}")]
    CandidateInfeasible { count: usize, first: String },
    #[error(transparent)]
    Problem(#[from] crate::problem::ProblemError),
}

/// Column layout of an assembled LP: interior nodes first, then boundary.
#[derive(Debug, Clone)]
pub struct LpLayout {
    pub grid: Arc<Grid>,
    pub interior: Vec<NodeId>,
    pub boundary: Vec<BNodeId>,
    pub tol_f: f64,
    pub tol_g: f64,
}

pub struct AssembledLp {
    pub lp: LinearProgram,
    pub layout: LpLayout,
}

#[derive(Debug, Clone, Serialize)]
pub struct LpStats {
    pub rows: usize,
    pub cols: usize,
    pub iterations: usize,
    pub refactorizations: usize,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub comp_slackness: f64,
}

#[derive(Debug)]
pub struct RelaxationResult {
    /// Optimal relaxed value: integral of L plus boundary integral of L_b.
    pub value: f64,
    pub measure: GriddedMeasure,
    pub lp_stats: LpStats,
    /// Interior nodes retained after support filtering.
    pub active_support: usize,
}

/// Absolute F/G tolerances for support filtering. Defaults scale with the
/// largest field magnitude over the candidate nodes, since F = 0 has measure
/// zero on a continuous grid and exact filtering would empty the support.
fn filter_tolerances(
    problem: &VariationalProblem,
    grid: &Grid,
    tol_f_override: Option<f64>,
    tol_g_override: Option<f64>,
) -> Result<(f64, f64), RelaxError> {
    let mut max_f = 0.0f64;
    let mut max_g = 0.0f64;
    if problem.f.is_some() || problem.g.is_some() {
        let mut y = Vec::new();
        let mut z = Vec::new();
        for cell in &grid.cells {
            for y_flat in 0..grid.y_len() {
                grid.y_values(y_flat, &mut y);
                for z_flat in 0..grid.z_len() {
                    grid.z_values(z_flat, &mut z);
                    if let Some(f) = &problem.f {
                        max_f = max_f.max(f.eval(&cell.center, &y, &z)?.abs());
                    }
                    if let Some(g) = &problem.g {
                        max_g = max_g.max(g.eval(&cell.center, &y, &z)?.abs());
                    }
                }
            }
        }
    }
    let tol_f = tol_f_override.unwrap_or(1e-6 * max_f.max(1e-6));
    let tol_g = tol_g_override.unwrap_or(1e-6 * max_g.max(1e-6));
    Ok((tol_f, tol_g))
}

pub fn assemble(
    problem: &VariationalProblem,
    grid: &Arc<Grid>,
    basis: &TestBasis,
    tol_f_override: Option<f64>,
    tol_g_override: Option<f64>,
) -> Result<AssembledLp, RelaxError> {
    let n = grid.n();
    let m = grid.m;
    let y_len = grid.y_len();
    let z_len = grid.z_len();
    let (tol_f, tol_g) = filter_tolerances(problem, grid, tol_f_override, tol_g_override)?;

    // support filtering
    let mut interior: Vec<NodeId> = Vec::new();
    let mut column_of = vec![-1i64; grid.num_cells() * y_len * z_len];
    {
        let mut y = Vec::new();
        let mut z = Vec::new();
        for (ci, cell) in grid.cells.iter().enumerate() {
            for y_flat in 0..y_len {
                grid.y_values(y_flat, &mut y);
                for z_flat in 0..z_len {
                    grid.z_values(z_flat, &mut z);
                    if let Some(f) = &problem.f {
                        if f.eval(&cell.center, &y, &z)?.abs() > tol_f {
                            continue;
                        }
                    }
                    if let Some(g) = &problem.g {
                        if g.eval(&cell.center, &y, &z)? > tol_g {
                            continue;
                        }
                    }
                    let flat = (ci * y_len + y_flat) * z_len + z_flat;
                    column_of[flat] = interior.len() as i64;
                    interior.push(NodeId {
                        cell: ci as u32,
                        y: y_flat as u32,
                        z: z_flat as u32,
                    });
                }
            }
        }
    }
    if interior.is_empty() {
        return Err(RelaxError::EmptySupport { tol_f, tol_g });
    }
    let mut boundary: Vec<BNodeId> = Vec::new();
    {
        let mut y = Vec::new();
        for (bi, bnode) in grid.boundary.iter().enumerate() {
            for y_flat in 0..y_len {
                grid.y_values(y_flat, &mut y);
                if let Some(fb) = &problem.f_b {
                    if fb.eval_boundary(&bnode.x, &y)?.abs() > tol_f {
                        continue;
                    }
                }
                if let Some(gb) = &problem.g_b {
                    if gb.eval_boundary(&bnode.x, &y)? > tol_g {
                        continue;
                    }
                }
                boundary.push(BNodeId {
                    bnode: bi as u32,
                    y: y_flat as u32,
                });
            }
        }
    }

    let n_int = interior.len();
    let n_cols = n_int + boundary.len();
    let mut lp = LinearProgram::new(n_cols);

    // objective
    {
        let mut y = Vec::new();
        let mut z = Vec::new();
        for (j, id) in interior.iter().enumerate() {
            grid.y_values(id.y as usize, &mut y);
            grid.z_values(id.z as usize, &mut z);
            lp.objective[j] = problem
                .l
                .eval(&grid.cells[id.cell as usize].center, &y, &z)?;
        }
        for (j, id) in boundary.iter().enumerate() {
            grid.y_values(id.y as usize, &mut y);
            lp.objective[n_int + j] = problem
                .l_b
                .eval_boundary(&grid.boundary[id.bnode as usize].x, &y)?;
        }
    }

    // mass row
    lp.add_row(
        Relation::Eq,
        grid.domain.volume(),
        (0..n_int).map(|j| (j, 1.0)).collect(),
    );

    // hat rows: support-local, rhs 0
    let mut y_idx = vec![0usize; m];
    let mut hat_y_idx = vec![0usize; m];
    let mut z = Vec::new();
    for hat in &basis.hats {
        decode_indices(hat.y_flat, &grid.y_axes, &mut hat_y_idx);
        // candidate support: cells within +-1 per axis, y nodes within +-1
        let mut support_cells = Vec::with_capacity(3usize.pow(n as u32));
        collect_neighborhood(grid, hat.cell, &mut support_cells);
        let mut support_y = Vec::with_capacity(3usize.pow(m as u32));
        collect_y_neighborhood(grid, &hat_y_idx, &mut support_y);
        for direction in 0..n {
            let mut coeffs: Vec<(usize, f64)> = Vec::new();
            for &ci in &support_cells {
                for &y_flat in &support_y {
                    decode_indices(y_flat, &grid.y_axes, &mut y_idx);
                    for z_flat in 0..z_len {
                        let flat = (ci * y_len + y_flat) * z_len + z_flat;
                        let col = column_of[flat];
                        if col < 0 {
                            continue;
                        }
                        grid.z_values(z_flat, &mut z);
                        let c =
                            basis.hat_coefficient(grid, hat, direction, ci, &y_idx, &z);
                        if c != 0.0 {
                            coeffs.push((col as usize, c));
                        }
                    }
                }
            }
            coeffs.sort_by_key(|(j, _)| *j);
            lp.add_row(Relation::Eq, 0.0, coeffs);
        }
    }

    // monomial rows: dense over interior, coupled to the boundary
    for mono in &basis.monomials {
        for direction in 0..n {
            let mut coeffs: Vec<(usize, f64)> = Vec::new();
            for (j, id) in interior.iter().enumerate() {
                decode_indices(id.y as usize, &grid.y_axes, &mut y_idx);
                grid.z_values(id.z as usize, &mut z);
                let c = basis.monomial_coefficient(
                    grid,
                    mono,
                    direction,
                    id.cell as usize,
                    &y_idx,
                    &z,
                );
                if c != 0.0 {
                    coeffs.push((j, c));
                }
            }
            for (j, id) in boundary.iter().enumerate() {
                decode_indices(id.y as usize, &grid.y_axes, &mut y_idx);
                let bnode = &grid.boundary[id.bnode as usize];
                let v = basis.monomial_boundary_value(grid, mono, direction, bnode, &y_idx);
                if v != 0.0 {
                    coeffs.push((n_int + j, -v));
                }
            }
            lp.add_row(Relation::Eq, 0.0, coeffs);
        }
    }

    // integral constraints
    for ic in &problem.integral {
        let mut coeffs: Vec<(usize, f64)> = Vec::new();
        for (j, id) in interior.iter().enumerate() {
            let mut yv = Vec::new();
            grid.y_values(id.y as usize, &mut yv);
            grid.z_values(id.z as usize, &mut z);
            let h = ic
                .h
                .eval(&grid.cells[id.cell as usize].center, &yv, &z)?;
            if h != 0.0 {
                coeffs.push((j, h));
            }
        }
        let relation = match ic.relation {
            IntegralRelation::Le => Relation::Le,
            IntegralRelation::Eq => Relation::Eq,
        };
        lp.add_row(relation, ic.target, coeffs);
    }

    Ok(AssembledLp {
        lp,
        layout: LpLayout {
            grid: grid.clone(),
            interior,
            boundary,
            tol_f,
            tol_g,
        },
    })
}

fn collect_neighborhood(grid: &Grid, center: usize, out: &mut Vec<usize>) {
    let n = grid.n();
    out.clear();
    let mut offsets = vec![-1i64; n];
    loop {
        let mut cell = Some(center);
        for (axis, &off) in offsets.iter().enumerate() {
            cell = cell.and_then(|c| {
                if off == 0 {
                    Some(c)
                } else {
                    grid.neighbor(c, axis, off)
                }
            });
        }
        if let Some(c) = cell {
            out.push(c);
        }
        let mut done = true;
        for o in offsets.iter_mut().rev() {
            *o += 1;
            if *o <= 1 {
                done = false;
                break;
            }
            *o = -1;
        }
        if done {
            break;
        }
    }
    out.sort_unstable();
    out.dedup();
}

fn collect_y_neighborhood(grid: &Grid, center: &[usize], out: &mut Vec<usize>) {
    let m = grid.m;
    out.clear();
    let mut offsets = vec![-1i64; m];
    loop {
        let mut idx = Vec::with_capacity(m);
        let mut ok = true;
        for (k, &off) in offsets.iter().enumerate() {
            let pos = center[k] as i64 + off;
            if pos < 0 || pos as usize >= grid.y_axes[k].len() {
                ok = false;
                break;
            }
            idx.push(pos as usize);
        }
        if ok {
            out.push(grid.y_flat(&idx));
        }
        let mut done = true;
        for o in offsets.iter_mut().rev() {
            *o += 1;
            if *o <= 1 {
                done = false;
                break;
            }
            *o = -1;
        }
        if done {
            break;
        }
    }
    out.sort_unstable();
    out.dedup();
}

/// Columns of the best exactly-feasible constant lift (y identically a grid
/// node, gradient zero), used to crash-start the simplex. Returns an empty
/// set when no constant lift is feasible (filtered nodes, integral rows, or
/// no exact zero node on the z grid).
fn constant_lift_crash(
    problem: &VariationalProblem,
    grid: &Grid,
    layout: &LpLayout,
) -> Vec<usize> {
    let n = grid.n();
    let m = grid.m;
    let zeros = vec![0.0; n * m];
    let Ok(z0) = grid.nearest_z(&zeros) else {
        return Vec::new();
    };
    let mut z_node = Vec::new();
    grid.z_values(z0, &mut z_node);
    if z_node.iter().any(|v| *v != 0.0) {
        return Vec::new();
    }
    let scale = grid.domain.volume() / grid.total_cell_volume();
    let mut best: Option<(f64, Vec<usize>)> = None;
    let mut y = Vec::new();
    'levels: for y_flat in 0..grid.y_len() {
        grid.y_values(y_flat, &mut y);
        let mut cols = Vec::with_capacity(grid.num_cells() + grid.boundary.len());
        for cell in 0..grid.num_cells() {
            let id = NodeId {
                cell: cell as u32,
                y: y_flat as u32,
                z: z0 as u32,
            };
            match layout.interior.binary_search(&id) {
                Ok(j) => cols.push(j),
                Err(_) => continue 'levels,
            }
        }
        for b in 0..grid.boundary.len() {
            let id = BNodeId {
                bnode: b as u32,
                y: y_flat as u32,
            };
            match layout.boundary.binary_search(&id) {
                Ok(j) => cols.push(layout.interior.len() + j),
                Err(_) => continue 'levels,
            }
        }
        // integral rows must hold for the constant lift
        for ic in &problem.integral {
            let mut total = 0.0;
            for cell in &grid.cells {
                let Ok(h) = ic.h.eval(&cell.center, &y, &zeros) else {
                    continue 'levels;
                };
                total += cell.volume * scale * h;
            }
            let ok = match ic.relation {
                IntegralRelation::Le => total <= ic.target + 1e-12 * (1.0 + ic.target.abs()),
                IntegralRelation::Eq => {
                    (total - ic.target).abs() <= 1e-9 * (1.0 + ic.target.abs())
                }
            };
            if !ok {
                continue 'levels;
            }
        }
        let mut objective = 0.0;
        for cell in &grid.cells {
            let Ok(l) = problem.l.eval(&cell.center, &y, &zeros) else {
                continue 'levels;
            };
            objective += cell.volume * scale * l;
        }
        for bnode in &grid.boundary {
            let Ok(lb) = problem.l_b.eval_boundary(&bnode.x, &y) else {
                continue 'levels;
            };
            objective += bnode.weight * lb;
        }
        match &best {
            Some((obj, _)) if *obj <= objective => {}
            _ => best = Some((objective, cols)),
        }
    }
    best.map(|(_, cols)| cols).unwrap_or_default()
}

/// Assemble, solve, and extract the optimal measure. The result's `value` is
/// recomputed from the extracted measure, not read off the LP objective.
pub fn solve_relaxation(
    problem: &VariationalProblem,
    grid: &Arc<Grid>,
    basis: &TestBasis,
    tol_f_override: Option<f64>,
    tol_g_override: Option<f64>,
) -> Result<RelaxationResult, RelaxError> {
    let assembled = assemble(problem, grid, basis, tol_f_override, tol_g_override)?;
    let options = lp::SolveOptions {
        crash: constant_lift_crash(problem, grid, &assembled.layout),
        ..lp::SolveOptions::default()
    };
    let sol = lp::solve_with(&assembled.lp, &options)?;
    match sol.status {
        LpStatus::Optimal => {}
        LpStatus::Infeasible => {
            return Err(RelaxError::Infeasible(format!(
                "{} interior nodes, {} boundary nodes, {} rows",
                assembled.layout.interior.len(),
                assembled.layout.boundary.len(),
                assembled.lp.rows.len()
            )))
        }
        LpStatus::Unbounded => return Err(RelaxError::Unbounded),
    }
    let layout = assembled.layout;
    let n_int = layout.interior.len();
    let mut interior: BTreeMap<NodeId, f64> = BTreeMap::new();
    for (j, id) in layout.interior.iter().enumerate() {
        let w = sol.primal[j];
        if w > 0.0 {
            interior.insert(*id, w);
        }
    }
    let mut boundary: BTreeMap<BNodeId, f64> = BTreeMap::new();
    for (j, id) in layout.boundary.iter().enumerate() {
        let w = sol.primal[n_int + j];
        if w > 0.0 {
            boundary.insert(*id, w);
        }
    }
    let measure = GriddedMeasure::from_entries(grid.clone(), interior, boundary)?;
    let value = measure.integrate(&problem.l)? + measure.integrate_boundary(&problem.l_b)?;
    Ok(RelaxationResult {
        value,
        measure,
        lp_stats: LpStats {
            rows: assembled.lp.rows.len(),
            cols: assembled.lp.num_vars,
            iterations: sol.iterations,
            refactorizations: sol.refactorizations,
            primal_residual: sol.certificates.primal_residual,
            dual_residual: sol.certificates.dual_residual,
            comp_slackness: sol.certificates.comp_slackness,
        },
        active_support: n_int,
    })
}

/// Classical objective of a candidate grid function: midpoint quadrature of
/// L(x, y, Dy) over the cells plus the boundary quadrature of L_b, with
/// central finite differences for Dy. Errors out with a violation report if
/// the candidate breaks F/G at any node.
pub fn classical_value(
    problem: &VariationalProblem,
    grid: &Arc<Grid>,
    candidate: &dyn Fn(&[f64]) -> Vec<f64>,
    tol_f_override: Option<f64>,
    tol_g_override: Option<f64>,
) -> Result<f64, RelaxError> {
    let n = grid.n();
    let m = grid.m;
    let (tol_f, tol_g) = filter_tolerances(problem, grid, tol_f_override, tol_g_override)?;
    let scale = grid.domain.volume() / grid.total_cell_volume();
    let mut violations: Vec<String> = Vec::new();
    let mut total = 0.0;
    for cell in &grid.cells {
        let y = candidate(&cell.center);
        let mut z = vec![0.0; n * m];
        for l in 0..n {
            let h = grid.x_widths[l];
            let mut xp = cell.center.clone();
            xp[l] += h;
            let mut xm = cell.center.clone();
            xm[l] -= h;
            let yp = candidate(&xp);
            let ym = candidate(&xm);
            for k in 0..m {
                z[l * m + k] = (yp[k] - ym[k]) / (2.0 * h);
            }
        }
        if let Some(f) = &problem.f {
            let v = f.eval(&cell.center, &y, &z)?;
            if v.abs() > tol_f {
                violations.push(format!("F = {v:.3e} at x = {:?}", cell.center));
            }
        }
        if let Some(g) = &problem.g {
            let v = g.eval(&cell.center, &y, &z)?;
            if v > tol_g {
                violations.push(format!("G = {v:.3e} at x = {:?}", cell.center));
            }
        }
        total += cell.volume * scale * problem.l.eval(&cell.center, &y, &z)?;
    }
    for bnode in &grid.boundary {
        let y = candidate(&bnode.x);
        if let Some(fb) = &problem.f_b {
            let v = fb.eval_boundary(&bnode.x, &y)?;
            if v.abs() > tol_f {
                violations.push(format!("F_b = {v:.3e} at x = {:?}", bnode.x));
            }
        }
        if let Some(gb) = &problem.g_b {
            let v = gb.eval_boundary(&bnode.x, &y)?;
            if v > tol_g {
                violations.push(format!("G_b = {v:.3e} at x = {:?}", bnode.x));
            }
        }
        total += bnode.weight * problem.l_b.eval_boundary(&bnode.x, &y)?;
    }
    if !violations.is_empty() {
        return Err(RelaxError::CandidateInfeasible {
            count: violations.len(),
            first: violations.swap_remove(0),
        });
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::builtin;

    fn grid_for(problem: &VariationalProblem, nx: usize, ny: usize, nz: usize) -> Arc<Grid> {
        Arc::new(
            Grid::build(
                &problem.domain,
                &problem.y_box,
                &problem.z_box,
                nx,
                ny,
                nz,
            )
            .unwrap(),
        )
    }

    #[test]
    fn double_well_support_filter_keeps_only_constrained_fiber() {
        let p = builtin("double-well").unwrap();
        let grid = grid_for(&p, 8, 1, 3);
        let basis = TestBasis::for_grid(&grid, 4);
        let assembled = assemble(&p, &grid, &basis, None, None).unwrap();
        // y-grid has the single node 0, where F = y vanishes
        assert_eq!(assembled.layout.interior.len(), 8 * 3);
    }

    #[test]
    fn gap_ineq_filter_keeps_the_two_roots() {
        let p = builtin("gap-ineq").unwrap();
        let grid = grid_for(&p, 8, 5, 3);
        let basis = TestBasis::for_grid(&grid, 4);
        let assembled = assemble(&p, &grid, &basis, None, None).unwrap();
        let mut seen = std::collections::BTreeSet::new();
        let mut y = Vec::new();
        for id in &assembled.layout.interior {
            grid.y_values(id.y as usize, &mut y);
            seen.insert((y[0] * 1000.0).round() as i64);
        }
        assert_eq!(seen.into_iter().collect::<Vec<_>>(), vec![0, 1000]);
    }

    #[test]
    fn double_well_relaxed_value_is_zero() {
        let p = builtin("double-well").unwrap();
        let grid = grid_for(&p, 8, 1, 3);
        let basis = TestBasis::for_grid(&grid, 4);
        let result = solve_relaxation(&p, &grid, &basis, None, None).unwrap();
        assert!(result.value.abs() < 1e-8, "M_r = {}", result.value);
        // symmetric split: total z-moment vanishes
        let z_moment = result
            .measure
            .integrate(&ScalarField::from_expr("z1", crate::expr::Arity::new(1, 1)).unwrap())
            .unwrap();
        assert!(z_moment.abs() < 1e-8);
        // the optimal measure satisfies the discrete weak rows it was built from
        let residual = crate::measure::weak_residual(&result.measure, &basis);
        assert!(residual < 1e-7, "weak residual {residual}");
    }

    #[test]
    fn gap_ineq_relaxed_value_is_one_tenth() {
        let p = builtin("gap-ineq").unwrap();
        let grid = grid_for(&p, 8, 5, 3);
        let basis = TestBasis::for_grid(&grid, 4);
        let result = solve_relaxation(&p, &grid, &basis, None, None).unwrap();
        assert!(
            (result.value - 0.1).abs() < 1e-6,
            "M_r = {}",
            result.value
        );
    }

    #[test]
    fn gap_eq_relaxed_value_is_one_half() {
        let p = builtin("gap-eq").unwrap();
        let grid = grid_for(&p, 8, 5, 3);
        let basis = TestBasis::for_grid(&grid, 4);
        let result = solve_relaxation(&p, &grid, &basis, None, None).unwrap();
        assert!(
            (result.value - 0.5).abs() < 1e-6,
            "M_r = {}",
            result.value
        );
    }

    #[test]
    fn classical_values_of_the_paper_competitors() {
        let p = builtin("double-well").unwrap();
        let grid = grid_for(&p, 8, 1, 3);
        let v = classical_value(&p, &grid, &|_x| vec![0.0], None, None).unwrap();
        assert!((v - 1.0).abs() < 1e-9);

        let p = builtin("gap-ineq").unwrap();
        let grid = grid_for(&p, 8, 5, 3);
        let v = classical_value(&p, &grid, &|_x| vec![1.0], None, None).unwrap();
        assert!((v - 1.0).abs() < 1e-9);
        // y = 1/2 violates F = y(1-y) = 1/4
        let err = classical_value(&p, &grid, &|_x| vec![0.5], None, None).unwrap_err();
        assert!(matches!(err, RelaxError::CandidateInfeasible { .. }));

        let p = builtin("gap-eq").unwrap();
        let grid = grid_for(&p, 8, 5, 3);
        let v = classical_value(&p, &grid, &|_x| vec![2.0], None, None).unwrap();
        assert!((v - 2.0).abs() < 1e-9);
    }

    #[test]
    fn relaxed_never_exceeds_classical_on_builtins() {
        for (name, candidate) in [
            ("double-well", 0.0f64),
            ("gap-ineq", 1.0),
            ("gap-eq", 2.0),
        ] {
            let p = builtin(name).unwrap();
            let grid = grid_for(&p, 8, 5, 3);
            let grid = if name == "double-well" {
                grid_for(&p, 8, 1, 3)
            } else {
                grid
            };
            let basis = TestBasis::for_grid(&grid, 4);
            let result = solve_relaxation(&p, &grid, &basis, None, None).unwrap();
            let classical =
                classical_value(&p, &grid, &|_x| vec![candidate], None, None).unwrap();
            assert!(
                result.value <= classical + 1e-8,
                "{name}: {} > {classical}",
                result.value
            );
        }
    }

    #[test]
    fn refining_the_z_grid_never_increases_the_value() {
        let p = builtin("double-well").unwrap();
        let mut last = f64::INFINITY;
        for nz in [3usize, 5, 9] {
            let grid = grid_for(&p, 8, 1, nz);
            let basis = TestBasis::for_grid(&grid, 4);
            let result = solve_relaxation(&p, &grid, &basis, None, None).unwrap();
            assert!(result.value <= last + 1e-9);
            last = result.value;
        }
    }

    #[test]
    fn optimal_measure_projects_to_lebesgue() {
        let p = builtin("gap-ineq").unwrap();
        let grid = grid_for(&p, 8, 5, 3);
        let basis = TestBasis::for_grid(&grid, 4);
        let result = solve_relaxation(&p, &grid, &basis, None, None).unwrap();
        for v in result.measure.projection_profile() {
            assert!((v - 1.0).abs() < 1e-6, "profile entry {v}");
        }
    }

    use crate::ScalarField;
}
