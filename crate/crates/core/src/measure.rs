//! Discrete measures on Omega x Y x Z grids: occupation lifts of grid
//! functions, convex combinations, centroid concentration, projection
//! checks, weak-constraint residuals, and the CSV exchange format.

use crate::basis::{decode_indices, TestBasis};
use crate::field::ScalarField;
use crate::grid::{Grid, OutOfBox};
use std::collections::BTreeMap;
use std::sync::Arc;
use thiserror::Error;

/// Interior node address: retained x-cell, flat y node, flat z node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct NodeId {
    pub cell: u32,
    pub y: u32,
    pub z: u32,
}

/// Boundary node address: boundary sample index, flat y node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct BNodeId {
    pub bnode: u32,
    pub y: u32,
}

/// Nonnegative weights on grid nodes plus a boundary companion. Weights are
/// masses (not densities): a node's weight is the measure of its x-cell slab.
#[derive(Debug, Clone)]
pub struct GriddedMeasure {
    pub grid: Arc<Grid>,
    /// Sorted by node id, strictly positive weights.
    pub weights: Vec<(NodeId, f64)>,
    pub boundary_weights: Vec<(BNodeId, f64)>,
}

#[derive(Debug, Clone, Error)]
pub enum MeasureError {
    #[error("lifted value out of the grid box: {0}")]
    OutOfBox(#[from] OutOfBox),
    #[error("negative weight {0}")]
    NegativeWeight(f64),
    #[error("x-cell column {cell} carries no mass")]
    ZeroMassColumn { cell: usize },
    #[error("measures live on different grids")]
    GridMismatch,
    #[error("csv: {0}")]
    Csv(String),
    #[error(transparent)]
    Field(#[from] crate::field::FieldError),
}

impl GriddedMeasure {
    pub fn from_entries(
        grid: Arc<Grid>,
        interior: BTreeMap<NodeId, f64>,
        boundary: BTreeMap<BNodeId, f64>,
    ) -> Result<Self, MeasureError> {
        for w in interior.values().chain(boundary.values()) {
            if *w < 0.0 {
                return Err(MeasureError::NegativeWeight(*w));
            }
        }
        Ok(GriddedMeasure {
            grid,
            weights: interior.into_iter().filter(|(_, w)| *w != 0.0).collect(),
            boundary_weights: boundary.into_iter().filter(|(_, w)| *w != 0.0).collect(),
        })
    }

    pub fn total_mass(&self) -> f64 {
        self.weights.iter().map(|(_, w)| w).sum()
    }

    pub fn boundary_mass(&self) -> f64 {
        self.boundary_weights.iter().map(|(_, w)| w).sum()
    }

    /// Scale all weights so the interior mass equals |Omega| exactly.
    pub fn normalized(mut self) -> Result<Self, MeasureError> {
        let mass = self.total_mass();
        if mass <= 0.0 {
            return Err(MeasureError::ZeroMassColumn { cell: 0 });
        }
        let scale = self.grid.domain.volume() / mass;
        for (_, w) in self.weights.iter_mut() {
            *w *= scale;
        }
        Ok(self)
    }

    /// Convex-type combination of measures on a shared grid.
    pub fn combine(parts: &[(f64, &GriddedMeasure)]) -> Result<Self, MeasureError> {
        let grid = parts
            .first()
            .map(|(_, mu)| mu.grid.clone())
            .ok_or(MeasureError::GridMismatch)?;
        let mut interior: BTreeMap<NodeId, f64> = BTreeMap::new();
        let mut boundary: BTreeMap<BNodeId, f64> = BTreeMap::new();
        for (coef, mu) in parts {
            if !Arc::ptr_eq(&mu.grid, &grid) {
                return Err(MeasureError::GridMismatch);
            }
            for (id, w) in &mu.weights {
                *interior.entry(*id).or_insert(0.0) += coef * w;
            }
            for (id, w) in &mu.boundary_weights {
                *boundary.entry(*id).or_insert(0.0) += coef * w;
            }
        }
        GriddedMeasure::from_entries(grid, interior, boundary)
    }

    /// Integral of a pointwise field against the measure (atoms at nodes).
    pub fn integrate(&self, field: &ScalarField) -> Result<f64, MeasureError> {
        let grid = &self.grid;
        let mut y = Vec::new();
        let mut z = Vec::new();
        let mut total = 0.0;
        for (id, w) in &self.weights {
            grid.y_values(id.y as usize, &mut y);
            grid.z_values(id.z as usize, &mut z);
            let x = &grid.cells[id.cell as usize].center;
            total += w * field.eval(x, &y, &z)?;
        }
        Ok(total)
    }

    pub fn integrate_boundary(&self, field: &ScalarField) -> Result<f64, MeasureError> {
        let grid = &self.grid;
        let mut y = Vec::new();
        let mut total = 0.0;
        for (id, w) in &self.boundary_weights {
            grid.y_values(id.y as usize, &mut y);
            let x = &grid.boundary[id.bnode as usize].x;
            total += w * field.eval_boundary(x, &y)?;
        }
        Ok(total)
    }

    /// Mass per x-cell divided by cell volume (and by the Lebesgue scale
    /// factor of the grid); equals 1 for every occupation lift.
    pub fn projection_profile(&self) -> Vec<f64> {
        let grid = &self.grid;
        let mut per_cell = vec![0.0; grid.num_cells()];
        for (id, w) in &self.weights {
            per_cell[id.cell as usize] += w;
        }
        let scale = grid.domain.volume() / grid.total_cell_volume();
        for (cell, mass) in per_cell.iter_mut().enumerate() {
            *mass /= grid.cells[cell].volume * scale;
        }
        per_cell
    }
}

/// Push the Lebesgue measure through x -> (x, y(x), Dy(x)): each retained
/// cell deposits its volume at the nearest (y, z) node pair, and each
/// boundary sample deposits its sigma-weight at the nearest boundary y node.
/// Gradients are central finite differences with the cell width as step.
/// Cell volumes are scaled so the total interior mass is exactly |Omega|.
pub fn occupation_lift(
    grid: &Arc<Grid>,
    y_fn: &dyn Fn(&[f64]) -> Vec<f64>,
) -> Result<GriddedMeasure, MeasureError> {
    let n = grid.n();
    let m = grid.m;
    let scale = grid.domain.volume() / grid.total_cell_volume();
    let mut interior: BTreeMap<NodeId, f64> = BTreeMap::new();
    for (ci, cell) in grid.cells.iter().enumerate() {
        let y = y_fn(&cell.center);
        let mut z = vec![0.0; n * m];
        for l in 0..n {
            let h = grid.x_widths[l];
            let mut xp = cell.center.clone();
            xp[l] += h;
            let mut xm = cell.center.clone();
            xm[l] -= h;
            let yp = y_fn(&xp);
            let ym = y_fn(&xm);
            for k in 0..m {
                z[l * m + k] = (yp[k] - ym[k]) / (2.0 * h);
            }
        }
        let y_flat = grid.nearest_y(&y)?;
        let z_flat = grid.nearest_z(&z)?;
        *interior
            .entry(NodeId {
                cell: ci as u32,
                y: y_flat as u32,
                z: z_flat as u32,
            })
            .or_insert(0.0) += cell.volume * scale;
    }
    let mut boundary: BTreeMap<BNodeId, f64> = BTreeMap::new();
    for (bi, bnode) in grid.boundary.iter().enumerate() {
        let y = y_fn(&bnode.x);
        let y_flat = grid.nearest_y(&y)?;
        *boundary
            .entry(BNodeId {
                bnode: bi as u32,
                y: y_flat as u32,
            })
            .or_insert(0.0) += bnode.weight;
    }
    GriddedMeasure::from_entries(grid.clone(), interior, boundary)
}

/// Conditional z-structure of a measure: the (x, y) marginal together with
/// the per-fiber mean of z.
#[derive(Debug, Clone)]
pub struct CentroidField {
    pub fibers: Vec<Fiber>,
}

#[derive(Debug, Clone)]
pub struct Fiber {
    pub cell: u32,
    pub y: u32,
    pub mass: f64,
    pub z_mean: Vec<f64>,
}

impl CentroidField {
    pub fn lookup(&self, cell: u32, y: u32) -> Option<&Fiber> {
        self.fibers
            .binary_search_by(|f| (f.cell, f.y).cmp(&(cell, y)))
            .ok()
            .map(|i| &self.fibers[i])
    }
}

/// Per-(x, y) fiber means of z. Fibers with zero marginal mass do not appear.
pub fn centroid(mu: &GriddedMeasure) -> CentroidField {
    let grid = &mu.grid;
    let zdim = grid.n() * grid.m;
    let mut acc: BTreeMap<(u32, u32), (f64, Vec<f64>)> = BTreeMap::new();
    let mut z = Vec::new();
    for (id, w) in &mu.weights {
        grid.z_values(id.z as usize, &mut z);
        let entry = acc
            .entry((id.cell, id.y))
            .or_insert_with(|| (0.0, vec![0.0; zdim]));
        entry.0 += w;
        for (s, v) in entry.1.iter_mut().zip(&z) {
            *s += w * v;
        }
    }
    let fibers = acc
        .into_iter()
        .map(|((cell, y), (mass, sums))| Fiber {
            cell,
            y,
            mass,
            z_mean: sums.into_iter().map(|s| s / mass).collect(),
        })
        .collect();
    CentroidField { fibers }
}

/// Move each fiber's mass to the grid node nearest its centroid. The (x, y)
/// marginal is unchanged; z-affine integrals move by at most one z-cell
/// width per unit mass.
pub fn concentrate(mu: &GriddedMeasure) -> Result<GriddedMeasure, MeasureError> {
    let field = centroid(mu);
    let grid = &mu.grid;
    let mut interior: BTreeMap<NodeId, f64> = BTreeMap::new();
    for fiber in &field.fibers {
        let z_flat = grid.nearest_z(&fiber.z_mean)?;
        *interior
            .entry(NodeId {
                cell: fiber.cell,
                y: fiber.y,
                z: z_flat as u32,
            })
            .or_insert(0.0) += fiber.mass;
    }
    let boundary: BTreeMap<BNodeId, f64> = mu.boundary_weights.iter().cloned().collect();
    GriddedMeasure::from_entries(grid.clone(), interior, boundary)
}

/// Bound on the objective change introduced by `concentrate`'s z-snapping:
/// the exact sum over fibers of mass times |L(snapped) - L(centroid)|.
pub fn concentration_snap_bound(
    mu: &GriddedMeasure,
    field: &ScalarField,
) -> Result<f64, MeasureError> {
    let grid = &mu.grid;
    let cf = centroid(mu);
    let mut y = Vec::new();
    let mut z_node = Vec::new();
    let mut bound = 0.0;
    for fiber in &cf.fibers {
        let z_flat = grid.nearest_z(&fiber.z_mean)?;
        grid.z_values(z_flat, &mut z_node);
        grid.y_values(fiber.y as usize, &mut y);
        let x = &grid.cells[fiber.cell as usize].center;
        let at_node = field.eval(x, &y, &z_node)?;
        let at_mean = field.eval(x, &y, &fiber.z_mean)?;
        bound += fiber.mass * (at_node - at_mean).abs();
    }
    Ok(bound)
}

/// Largest violation of the weak integration-by-parts constraints over the
/// basis: max over test functions and directions of
/// | int (d phi/d x_l + sum_k d phi/d y_k z_kl) d mu - int phi n_l d mu_b |.
pub fn weak_residual(mu: &GriddedMeasure, basis: &TestBasis) -> f64 {
    let grid = &mu.grid;
    let n = grid.n();
    let m = grid.m;
    let mut y_idx = vec![0usize; m];
    let mut z = Vec::new();
    let mut worst = 0.0f64;
    for hat in &basis.hats {
        for direction in 0..n {
            let mut row = 0.0;
            for (id, w) in &mu.weights {
                decode_indices(id.y as usize, &grid.y_axes, &mut y_idx);
                grid.z_values(id.z as usize, &mut z);
                row += w
                    * basis.hat_coefficient(grid, hat, direction, id.cell as usize, &y_idx, &z);
            }
            worst = worst.max(row.abs());
        }
    }
    for mono in &basis.monomials {
        for direction in 0..n {
            let mut row = 0.0;
            for (id, w) in &mu.weights {
                decode_indices(id.y as usize, &grid.y_axes, &mut y_idx);
                grid.z_values(id.z as usize, &mut z);
                row += w
                    * basis.monomial_coefficient(
                        grid,
                        mono,
                        direction,
                        id.cell as usize,
                        &y_idx,
                        &z,
                    );
            }
            for (id, w) in &mu.boundary_weights {
                decode_indices(id.y as usize, &grid.y_axes, &mut y_idx);
                let bnode = &grid.boundary[id.bnode as usize];
                row -= w * basis.monomial_boundary_value(grid, mono, direction, bnode, &y_idx);
            }
            worst = worst.max(row.abs());
        }
    }
    worst
}

// ---------------------------------------------------------------------------
// CSV exchange

fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}

/// Interior CSV: x1..xn, y1..ym, z11..znm (direction-major), weight.
pub fn to_csv(mu: &GriddedMeasure) -> String {
    let grid = &mu.grid;
    let n = grid.n();
    let m = grid.m;
    let mut out = String::new();
    let mut header: Vec<String> = (1..=n).map(|a| format!("x{a}")).collect();
    header.extend((1..=m).map(|k| format!("y{k}")));
    for l in 1..=n {
        for k in 1..=m {
            header.push(format!("z{l}{k}"));
        }
    }
    header.push("weight".into());
    out.push_str(&header.join(","));
    out.push('\n');
    let mut y = Vec::new();
    let mut z = Vec::new();
    for (id, w) in &mu.weights {
        grid.y_values(id.y as usize, &mut y);
        grid.z_values(id.z as usize, &mut z);
        let mut fields: Vec<String> = grid.cells[id.cell as usize]
            .center
            .iter()
            .map(|v| fmt17(*v))
            .collect();
        fields.extend(y.iter().map(|v| fmt17(*v)));
        fields.extend(z.iter().map(|v| fmt17(*v)));
        fields.push(fmt17(*w));
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

/// Boundary CSV: x1..xn, y1..ym, weight.
pub fn boundary_to_csv(mu: &GriddedMeasure) -> String {
    let grid = &mu.grid;
    let n = grid.n();
    let m = grid.m;
    let mut out = String::new();
    let mut header: Vec<String> = (1..=n).map(|a| format!("x{a}")).collect();
    header.extend((1..=m).map(|k| format!("y{k}")));
    header.push("weight".into());
    out.push_str(&header.join(","));
    out.push('\n');
    let mut y = Vec::new();
    for (id, w) in &mu.boundary_weights {
        grid.y_values(id.y as usize, &mut y);
        let mut fields: Vec<String> = grid.boundary[id.bnode as usize]
            .x
            .iter()
            .map(|v| fmt17(*v))
            .collect();
        fields.extend(y.iter().map(|v| fmt17(*v)));
        fields.push(fmt17(*w));
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

/// Rebuild a measure from its CSV pair on a known grid. Coordinates are
/// matched to the nearest grid node; with 17-significant-digit printing the
/// round trip is bit-exact.
pub fn from_csv(
    grid: &Arc<Grid>,
    interior_csv: &str,
    boundary_csv: &str,
) -> Result<GriddedMeasure, MeasureError> {
    let n = grid.n();
    let m = grid.m;
    let mut interior: BTreeMap<NodeId, f64> = BTreeMap::new();
    for (lineno, line) in interior_csv.lines().enumerate().skip(1) {
        if line.trim().is_empty() {
            continue;
        }
        let vals = parse_csv_line(line, n + m + n * m + 1, lineno)?;
        let x = &vals[..n];
        let y = &vals[n..n + m];
        let z = &vals[n + m..n + m + n * m];
        let w = vals[n + m + n * m];
        if w < 0.0 {
            return Err(MeasureError::NegativeWeight(w));
        }
        let cell = nearest_cell(grid, x)
            .ok_or_else(|| MeasureError::Csv(format!("line {}: x outside grid", lineno + 1)))?;
        let y_flat = grid.nearest_y(y)?;
        let z_flat = grid.nearest_z(z)?;
        *interior
            .entry(NodeId {
                cell: cell as u32,
                y: y_flat as u32,
                z: z_flat as u32,
            })
            .or_insert(0.0) += w;
    }
    let mut boundary: BTreeMap<BNodeId, f64> = BTreeMap::new();
    for (lineno, line) in boundary_csv.lines().enumerate().skip(1) {
        if line.trim().is_empty() {
            continue;
        }
        let vals = parse_csv_line(line, n + m + 1, lineno)?;
        let x = &vals[..n];
        let y = &vals[n..n + m];
        let w = vals[n + m];
        if w < 0.0 {
            return Err(MeasureError::NegativeWeight(w));
        }
        let bnode = nearest_boundary(grid, x);
        let y_flat = grid.nearest_y(y)?;
        *boundary
            .entry(BNodeId {
                bnode: bnode as u32,
                y: y_flat as u32,
            })
            .or_insert(0.0) += w;
    }
    GriddedMeasure::from_entries(grid.clone(), interior, boundary)
}

fn parse_csv_line(line: &str, expect: usize, lineno: usize) -> Result<Vec<f64>, MeasureError> {
    let vals: Result<Vec<f64>, _> = line.split(',').map(|f| f.trim().parse::<f64>()).collect();
    let vals = vals.map_err(|e| MeasureError::Csv(format!("line {}: {e}", lineno + 1)))?;
    if vals.len() != expect {
        return Err(MeasureError::Csv(format!(
            "line {}: expected {expect} fields, got {}",
            lineno + 1,
            vals.len()
        )));
    }
    Ok(vals)
}

fn nearest_cell(grid: &Grid, x: &[f64]) -> Option<usize> {
    let mut index = Vec::with_capacity(grid.n());
    for (a, axis) in grid.x_axes.iter().enumerate() {
        index.push(axis.nearest(x[a]));
    }
    // exact retained-cell lookup through the neighbor map
    let mut best = None;
    let mut best_d = f64::INFINITY;
    for (ci, cell) in grid.cells.iter().enumerate() {
        if cell.index == index {
            return Some(ci);
        }
        let d: f64 = cell
            .center
            .iter()
            .zip(x)
            .map(|(c, v)| (c - v) * (c - v))
            .sum();
        if d < best_d {
            best_d = d;
            best = Some(ci);
        }
    }
    best
}

fn nearest_boundary(grid: &Grid, x: &[f64]) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (bi, b) in grid.boundary.iter().enumerate() {
        let d: f64 = b.x.iter().zip(x).map(|(c, v)| (c - v) * (c - v)).sum();
        if d < best_d {
            best_d = d;
            best = bi;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::Domain;
    use crate::expr::Arity;

    fn interval_grid(nx: usize, ny: usize, nz: usize) -> Arc<Grid> {
        let d = Domain::interval(0.0, 1.0);
        Arc::new(Grid::build(&d, &[(0.0, 1.0)], &[(-1.5, 1.5)], nx, ny, nz).unwrap())
    }

    #[test]
    fn lift_of_zero_curve_concentrates_at_origin_nodes() {
        let grid = interval_grid(8, 5, 5);
        let mu = occupation_lift(&grid, &|_x| vec![0.0]).unwrap();
        assert!((mu.total_mass() - 1.0).abs() < 1e-15);
        for (id, _) in &mu.weights {
            let mut y = Vec::new();
            grid.y_values(id.y as usize, &mut y);
            let mut z = Vec::new();
            grid.z_values(id.z as usize, &mut z);
            assert_eq!(y[0], 0.0);
            assert_eq!(z[0], 0.0);
        }
        // boundary: two atoms of weight 1 at y = 0
        assert_eq!(mu.boundary_weights.len(), 2);
        assert!((mu.boundary_mass() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn lift_of_identity_curve_tracks_the_diagonal() {
        let grid = interval_grid(8, 9, 5);
        let mu = occupation_lift(&grid, &|x| vec![x[0]]).unwrap();
        let mut y = Vec::new();
        let mut z = Vec::new();
        for (id, _) in &mu.weights {
            grid.y_values(id.y as usize, &mut y);
            grid.z_values(id.z as usize, &mut z);
            let x = grid.cells[id.cell as usize].center[0];
            assert!((y[0] - x).abs() <= 0.5 * (3.0 / 8.0) + 1e-12);
            assert_eq!(z[0], 0.75); // nearest node to slope 1 on the 5-node axis
        }
    }

    #[test]
    fn out_of_box_value_is_an_error() {
        let grid = interval_grid(4, 3, 3);
        let res = occupation_lift(&grid, &|_x| vec![7.0]);
        assert!(matches!(res, Err(MeasureError::OutOfBox(_))));
    }

    #[test]
    fn centroid_of_symmetric_split_is_zero() {
        let grid = interval_grid(4, 1, 3);
        // build dx (x) delta_0 (x) (1/2 delta_-1.5 + 1/2 delta_1.5)
        let mut interior = BTreeMap::new();
        for (ci, cell) in grid.cells.iter().enumerate() {
            for z in [0u32, 2u32] {
                interior.insert(
                    NodeId {
                        cell: ci as u32,
                        y: 0,
                        z,
                    },
                    0.5 * cell.volume,
                );
            }
        }
        let mu = GriddedMeasure::from_entries(grid.clone(), interior, BTreeMap::new()).unwrap();
        let cf = centroid(&mu);
        for fiber in &cf.fibers {
            assert_eq!(fiber.z_mean[0], 0.0);
        }
    }

    #[test]
    fn centroid_weighted_mean_example() {
        // fiber with 1/3 mass at z=0 and 2/3 at z=3 -> mean 2
        let d = Domain::interval(0.0, 1.0);
        let grid =
            Arc::new(Grid::build(&d, &[(0.0, 0.0)], &[(0.0, 3.0)], 1, 1, 4).unwrap());
        let mut interior = BTreeMap::new();
        interior.insert(NodeId { cell: 0, y: 0, z: 0 }, 1.0 / 3.0);
        interior.insert(NodeId { cell: 0, y: 0, z: 3 }, 2.0 / 3.0);
        let mu = GriddedMeasure::from_entries(grid, interior, BTreeMap::new()).unwrap();
        let cf = centroid(&mu);
        assert_eq!(cf.fibers.len(), 1);
        assert!((cf.fibers[0].z_mean[0] - 2.0).abs() < 1e-15);
    }

    #[test]
    fn concentrate_is_idempotent_and_respects_jensen_for_z_squared() {
        let grid = interval_grid(4, 1, 3);
        let mut interior = BTreeMap::new();
        for (ci, cell) in grid.cells.iter().enumerate() {
            for z in [0u32, 2u32] {
                interior.insert(
                    NodeId {
                        cell: ci as u32,
                        y: 0,
                        z,
                    },
                    0.5 * cell.volume,
                );
            }
        }
        let mu = GriddedMeasure::from_entries(grid.clone(), interior, BTreeMap::new()).unwrap();
        let arity = Arity::new(1, 1);
        let z_sq = ScalarField::from_expr("z1^2", arity).unwrap();
        let before = mu.integrate(&z_sq).unwrap();
        let bar = concentrate(&mu).unwrap();
        let after = bar.integrate(&z_sq).unwrap();
        assert!((before - 2.25).abs() < 1e-12); // (1.5)^2 split
        assert_eq!(after, 0.0);
        assert!(after <= before);
        let again = concentrate(&bar).unwrap();
        assert_eq!(again.weights, bar.weights);
        // double-well density rises from 0 to 1 under concentration
        let dw = ScalarField::from_expr("min(abs(z1-1),abs(z1+1))", arity).unwrap();
        // rebuild with z nodes at +-1: use a z-box {-1.5,0,1.5} -> nearest to
        // +-1 is +-1.5; evaluate on the original measure instead
        let before_dw = mu.integrate(&dw).unwrap();
        let after_dw = bar.integrate(&dw).unwrap();
        assert!((before_dw - 0.5).abs() < 1e-12);
        assert!((after_dw - 1.0).abs() < 1e-12);
    }

    #[test]
    fn projection_profile_flags_imbalance() {
        let grid = interval_grid(4, 3, 3);
        let mu = occupation_lift(&grid, &|x| vec![x[0]]).unwrap();
        let profile = mu.projection_profile();
        for p in &profile {
            assert!((p - 1.0).abs() < 1e-12);
        }
        // convex combination of two lifts still projects to Lebesgue
        let nu = occupation_lift(&grid, &|_x| vec![0.5]).unwrap();
        let combo = GriddedMeasure::combine(&[(2.0 / 3.0, &mu), (1.0 / 3.0, &nu)]).unwrap();
        for p in combo.projection_profile() {
            assert!((p - 1.0).abs() < 1e-12);
        }
        // doubling mass on half the cells shows up
        let mut interior: BTreeMap<NodeId, f64> = mu.weights.iter().cloned().collect();
        for (id, w) in interior.iter_mut() {
            if (id.cell as usize) < 2 {
                *w *= 2.0;
            }
        }
        let skew = GriddedMeasure::from_entries(grid, interior, BTreeMap::new()).unwrap();
        let profile = skew.projection_profile();
        assert!((profile[0] - 2.0).abs() < 1e-12);
        assert!((profile[3] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn csv_round_trip_is_bit_exact() {
        let grid = interval_grid(8, 7, 5);
        let mu = occupation_lift(&grid, &|x| vec![(x[0] - 0.3).abs()]).unwrap();
        let interior = to_csv(&mu);
        let boundary = boundary_to_csv(&mu);
        let back = from_csv(&grid, &interior, &boundary).unwrap();
        assert_eq!(mu.weights.len(), back.weights.len());
        for ((ida, wa), (idb, wb)) in mu.weights.iter().zip(&back.weights) {
            assert_eq!(ida, idb);
            assert_eq!(wa.to_bits(), wb.to_bits());
        }
        for ((ida, wa), (idb, wb)) in mu.boundary_weights.iter().zip(&back.boundary_weights) {
            assert_eq!(ida, idb);
            assert_eq!(wa.to_bits(), wb.to_bits());
        }
    }
}
