//! Tensor grids over Omega x Y x Z.
//!
//! The x block is a uniform partition of the domain's bounding box into
//! cells, keeping the cells whose centers lie in Omega; measures later treat
//! a node's weight as mass spread uniformly over its x-cell. The y and z
//! blocks are inclusive uniform node arrays over their boxes (a degenerate
//! box pins the axis to one node); measure atoms sit exactly on those nodes.

use crate::domain::{BoundaryNode, Domain};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub nodes: Vec<f64>,
}

impl Axis {
    pub fn uniform(lo: f64, hi: f64, count: usize) -> Axis {
        if count <= 1 || hi <= lo {
            return Axis { nodes: vec![lo] };
        }
        let nodes = (0..count)
            .map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64)
            .collect();
        Axis { nodes }
    }

    pub fn from_values(mut values: Vec<f64>) -> Axis {
        values.sort_by(|a, b| a.partial_cmp(b).unwrap());
        values.dedup();
        Axis { nodes: values }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn lo(&self) -> f64 {
        self.nodes[0]
    }

    pub fn hi(&self) -> f64 {
        *self.nodes.last().unwrap()
    }

    /// Index of the node nearest to `v`; ties break toward the lower node.
    pub fn nearest(&self, v: f64) -> usize {
        let nodes = &self.nodes;
        match nodes.binary_search_by(|n| n.partial_cmp(&v).unwrap()) {
            Ok(i) => i,
            Err(0) => 0,
            Err(i) if i == nodes.len() => nodes.len() - 1,
            Err(i) => {
                let below = v - nodes[i - 1];
                let above = nodes[i] - v;
                if above < below {
                    i
                } else {
                    i - 1
                }
            }
        }
    }
}

/// One retained x-cell: tensor index, center, extent and volume.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct XCell {
    pub index: Vec<usize>,
    pub center: Vec<f64>,
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub volume: f64,
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum GridError {
    #[error("grid has no cells inside the domain")]
    EmptyGrid,
    #[error("axis counts must be >= 1")]
    BadCounts,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Grid {
    pub domain: Domain,
    pub m: usize,
    /// Cell centers per x-axis (full tensor axes before masking).
    pub x_axes: Vec<Axis>,
    /// Cell widths per x-axis.
    pub x_widths: Vec<f64>,
    pub y_axes: Vec<Axis>,
    pub z_axes: Vec<Axis>,
    pub cells: Vec<XCell>,
    /// Map from the full tensor index to the retained-cell index (-1 when
    /// masked out).
    cell_lookup: Vec<i64>,
    pub boundary: Vec<BoundaryNode>,
}

impl Grid {
    /// Uniform grid: `nx` cells per x-axis over the bounding box (masked to
    /// the domain), `ny` nodes per y-axis, `nz` nodes per z-axis. The
    /// boundary sample resolution follows `nx`.
    pub fn build(
        domain: &Domain,
        y_box: &[(f64, f64)],
        z_box: &[(f64, f64)],
        nx: usize,
        ny: usize,
        nz: usize,
    ) -> Result<Grid, GridError> {
        if nx == 0 || ny == 0 || nz == 0 {
            return Err(GridError::BadCounts);
        }
        let n = domain.dimension();
        let m = y_box.len();
        let (lo, hi) = domain.bounding_box();
        let mut x_axes = Vec::with_capacity(n);
        let mut x_widths = Vec::with_capacity(n);
        for a in 0..n {
            let w = (hi[a] - lo[a]) / nx as f64;
            let nodes = (0..nx).map(|i| lo[a] + (i as f64 + 0.5) * w).collect();
            x_axes.push(Axis { nodes });
            x_widths.push(w);
        }
        let y_axes: Vec<Axis> = y_box
            .iter()
            .map(|&(l, h)| Axis::uniform(l, h, ny))
            .collect();
        let z_axes: Vec<Axis> = z_box
            .iter()
            .map(|&(l, h)| Axis::uniform(l, h, nz))
            .collect();

        let total: usize = x_axes.iter().map(|a| a.len()).product();
        let mut cells = Vec::new();
        let mut cell_lookup = vec![-1i64; total];
        let mut index = vec![0usize; n];
        for flat in 0..total {
            let center: Vec<f64> = (0..n).map(|a| x_axes[a].nodes[index[a]]).collect();
            if domain.contains(&center) {
                let cell_lo: Vec<f64> = (0..n).map(|a| center[a] - 0.5 * x_widths[a]).collect();
                let cell_hi: Vec<f64> = (0..n).map(|a| center[a] + 0.5 * x_widths[a]).collect();
                cell_lookup[flat] = cells.len() as i64;
                cells.push(XCell {
                    index: index.clone(),
                    center,
                    lo: cell_lo,
                    hi: cell_hi,
                    volume: x_widths.iter().product(),
                });
            }
            // advance tensor index, last axis fastest
            for a in (0..n).rev() {
                index[a] += 1;
                if index[a] < x_axes[a].len() {
                    break;
                }
                index[a] = 0;
            }
        }
        if cells.is_empty() {
            return Err(GridError::EmptyGrid);
        }
        // circle samples integrate the monomial basis exactly already
        // (equal-weight rules are exact for low-order trig polynomials); box
        // faces need Gauss points per face cell for the same exactness
        let boundary = match domain {
            Domain::Box { lo, hi } => box_gauss_boundary(lo, hi, nx),
            Domain::Interval { .. } => domain.boundary_nodes(2).expect("validated domain"),
            Domain::Disk { .. } => domain
                .boundary_nodes((4 * nx).max(8))
                .expect("validated domain"),
            Domain::Corona { .. } => domain
                .boundary_nodes((6 * nx).max(12))
                .expect("validated domain"),
        };
        Ok(Grid {
            domain: domain.clone(),
            m,
            x_axes,
            x_widths,
            y_axes,
            z_axes,
            cells,
            cell_lookup,
            boundary,
        })
    }

    /// Grid whose y/z nodes are exactly the given values; used by the
    /// two-sheet demo where atoms must land on nodes without snapping error.
    pub fn with_explicit_axes(
        domain: &Domain,
        y_axes: Vec<Axis>,
        z_axes: Vec<Axis>,
        nx: usize,
    ) -> Result<Grid, GridError> {
        let mut grid = Grid::build(
            domain,
            &y_axes.iter().map(|a| (a.lo(), a.hi())).collect::<Vec<_>>(),
            &z_axes.iter().map(|a| (a.lo(), a.hi())).collect::<Vec<_>>(),
            nx,
            2,
            2,
        )?;
        grid.y_axes = y_axes;
        grid.z_axes = z_axes;
        Ok(grid)
    }

    pub fn n(&self) -> usize {
        self.x_axes.len()
    }

    pub fn num_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn y_len(&self) -> usize {
        self.y_axes.iter().map(|a| a.len()).product()
    }

    pub fn z_len(&self) -> usize {
        self.z_axes.iter().map(|a| a.len()).product()
    }

    pub fn total_cell_volume(&self) -> f64 {
        self.cells.iter().map(|c| c.volume).sum()
    }

    /// Decode a flat y index (row-major over the y axes) into node values.
    pub fn y_values(&self, flat: usize, out: &mut Vec<f64>) {
        decode(flat, &self.y_axes, out);
    }

    pub fn z_values(&self, flat: usize, out: &mut Vec<f64>) {
        decode(flat, &self.z_axes, out);
    }

    pub fn y_flat(&self, per_axis: &[usize]) -> usize {
        encode(per_axis, &self.y_axes)
    }

    pub fn z_flat(&self, per_axis: &[usize]) -> usize {
        encode(per_axis, &self.z_axes)
    }

    /// Nearest flat y index to the vector `v`, with per-axis box check.
    pub fn nearest_y(&self, v: &[f64]) -> Result<usize, OutOfBox> {
        nearest(v, &self.y_axes)
    }

    pub fn nearest_z(&self, v: &[f64]) -> Result<usize, OutOfBox> {
        nearest(v, &self.z_axes)
    }

    /// Retained-cell index of the neighbor along `axis` (offset -1 or +1).
    pub fn neighbor(&self, cell: usize, axis: usize, offset: i64) -> Option<usize> {
        let mut index = self.cells[cell].index.clone();
        let pos = index[axis] as i64 + offset;
        if pos < 0 || pos as usize >= self.x_axes[axis].len() {
            return None;
        }
        index[axis] = pos as usize;
        let flat = self.flat_x(&index);
        let retained = self.cell_lookup[flat];
        (retained >= 0).then_some(retained as usize)
    }

    fn flat_x(&self, index: &[usize]) -> usize {
        let mut flat = 0;
        for (a, &i) in index.iter().enumerate() {
            flat = flat * self.x_axes[a].len() + i;
            let _ = a;
        }
        flat
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Error)]
#[error("value {value} on axis {axis} falls outside the grid box")]
pub struct OutOfBox {
    pub axis: usize,
    pub value: f64,
}

/// Boundary sample for boxes: 3-point Gauss-Legendre nodes on each of the
/// `nx` segments per face, exact for polynomials of degree <= 5 along the
/// face (and free of corners). Only n = 1 and n = 2 boxes occur in practice;
/// higher dimensions tensorize the same rule per remaining axis.
fn box_gauss_boundary(lo: &[f64], hi: &[f64], nx: usize) -> Vec<BoundaryNode> {
    let n = lo.len();
    let g = (3.0f64 / 5.0).sqrt();
    let pts = [-g, 0.0, g];
    let wts = [5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0];
    let mut nodes = Vec::new();
    for axis in 0..n {
        for side in 0..2 {
            let xa = if side == 0 { lo[axis] } else { hi[axis] };
            let mut normal = vec![0.0; n];
            normal[axis] = if side == 0 { -1.0 } else { 1.0 };
            let others: Vec<usize> = (0..n).filter(|a| *a != axis).collect();
            if others.is_empty() {
                nodes.push(BoundaryNode {
                    x: vec![xa],
                    normal,
                    weight: 1.0,
                });
                continue;
            }
            // tensor Gauss points over each remaining axis, per segment
            let mut idx = vec![(0usize, 0usize); others.len()]; // (segment, gauss point)
            loop {
                let mut x = vec![0.0; n];
                x[axis] = xa;
                let mut weight = 1.0;
                for (slot, &a) in others.iter().enumerate() {
                    let h = (hi[a] - lo[a]) / nx as f64;
                    let (seg, gp) = idx[slot];
                    let center = lo[a] + (seg as f64 + 0.5) * h;
                    x[a] = center + 0.5 * h * pts[gp];
                    weight *= h * wts[gp];
                }
                nodes.push(BoundaryNode {
                    x,
                    normal: normal.clone(),
                    weight,
                });
                // advance (segment, gauss) odometer
                let mut carry = true;
                for slot in 0..others.len() {
                    if !carry {
                        break;
                    }
                    let (mut seg, mut gp) = idx[slot];
                    gp += 1;
                    if gp == 3 {
                        gp = 0;
                        seg += 1;
                        if seg == nx {
                            seg = 0;
                        } else {
                            carry = false;
                        }
                    } else {
                        carry = false;
                    }
                    idx[slot] = (seg, gp);
                }
                if carry {
                    break;
                }
            }
        }
    }
    nodes
}

fn decode(flat: usize, axes: &[Axis], out: &mut Vec<f64>) {
    out.clear();
    out.resize(axes.len(), 0.0);
    let mut rest = flat;
    for a in (0..axes.len()).rev() {
        let len = axes[a].len();
        out[a] = axes[a].nodes[rest % len];
        rest /= len;
    }
}

fn encode(per_axis: &[usize], axes: &[Axis]) -> usize {
    let mut flat = 0;
    for (a, &i) in per_axis.iter().enumerate() {
        flat = flat * axes[a].len() + i;
    }
    flat
}

fn nearest(v: &[f64], axes: &[Axis]) -> Result<usize, OutOfBox> {
    let mut flat = 0;
    for (a, axis) in axes.iter().enumerate() {
        let span = (axis.hi() - axis.lo()).max(1.0);
        let tol = 1e-9 * span;
        if v[a] < axis.lo() - tol || v[a] > axis.hi() + tol {
            return Err(OutOfBox {
                axis: a,
                value: v[a],
            });
        }
        flat = flat * axis.len() + axis.nearest(v[a]);
    }
    Ok(flat)
}
