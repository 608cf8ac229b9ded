//! Test-function basis for the weak (integration-by-parts) constraints.
//!
//! Two families over (x, y):
//!
//! * interior multilinear hat functions centered at (x-cell, y-node) pairs
//!   whose support closes inside Omega -- these are compactly supported, so
//!   their rows have no boundary term;
//! * monomials x^p y^q up to a total degree -- not compactly supported, so
//!   their rows couple the interior measure to the boundary measure through
//!   the exterior normal.
//!
//! A measure node stands for mass spread uniformly over its x-cell with
//! atomic (y, z); pairings integrate the test field exactly against that
//! shape. Averages over an x-cell of a hat factor and its derivative are in
//! closed form (for the derivative it is just the endpoint difference over
//! the width), and monomial cell-averages are power-sum ratios, so every row
//! coefficient is exact. Hat derivatives evaluated exactly at a kink use the
//! symmetric (mean of one-sided slopes) convention.

use crate::domain::BoundaryNode;
use crate::grid::{Axis, Grid};

/// Piecewise-linear hat on one axis, centered at node `c`, supported between
/// the two neighboring nodes (edge nodes mirror the adjacent spacing).
/// Single-node axes degenerate to the constant 1 with zero derivative.
#[derive(Debug, Clone, Copy)]
struct HatAxis<'a> {
    nodes: &'a [f64],
    c: usize,
}

impl<'a> HatAxis<'a> {
    fn support(&self) -> (f64, f64, f64) {
        let nodes = self.nodes;
        let c = self.c;
        let center = nodes[c];
        let left = if c > 0 {
            nodes[c - 1]
        } else if nodes.len() > 1 {
            2.0 * nodes[0] - nodes[1]
        } else {
            center - 1.0
        };
        let right = if c + 1 < nodes.len() {
            nodes[c + 1]
        } else if nodes.len() > 1 {
            2.0 * nodes[nodes.len() - 1] - nodes[nodes.len() - 2]
        } else {
            center + 1.0
        };
        (left, center, right)
    }

    fn value(&self, t: f64) -> f64 {
        if self.nodes.len() == 1 {
            return 1.0;
        }
        let (a, c, b) = self.support();
        if t <= a || t >= b {
            0.0
        } else if t <= c {
            (t - a) / (c - a)
        } else {
            (b - t) / (b - c)
        }
    }

    /// Derivative with the symmetric convention at kinks (t equal to a
    /// support node, which is exact for grid atoms).
    fn derivative(&self, t: f64) -> f64 {
        if self.nodes.len() == 1 {
            return 0.0;
        }
        let (a, c, b) = self.support();
        let up = 1.0 / (c - a);
        let down = -1.0 / (b - c);
        if t == a {
            0.5 * up
        } else if t == c {
            0.5 * (up + down)
        } else if t == b {
            0.5 * down
        } else if t > a && t < c {
            up
        } else if t > c && t < b {
            down
        } else {
            0.0
        }
    }

    /// Exact mean of the hat over [lo, hi].
    fn average(&self, lo: f64, hi: f64) -> f64 {
        if self.nodes.len() == 1 {
            return 1.0;
        }
        let (a, c, b) = self.support();
        // integrate the rising and falling pieces clipped to [lo, hi]
        let mut integral = 0.0;
        let (l1, h1) = (lo.max(a), hi.min(c));
        if h1 > l1 {
            // linear from (a,0) to (c,1): mean of endpoint values times width
            let va = (l1 - a) / (c - a);
            let vb = (h1 - a) / (c - a);
            integral += 0.5 * (va + vb) * (h1 - l1);
        }
        let (l2, h2) = (lo.max(c), hi.min(b));
        if h2 > l2 {
            let va = (b - l2) / (b - c);
            let vb = (b - h2) / (b - c);
            integral += 0.5 * (va + vb) * (h2 - l2);
        }
        integral / (hi - lo)
    }

    /// Exact mean of the derivative over [lo, hi]: the fundamental theorem
    /// of calculus collapses it to the endpoint difference.
    fn derivative_average(&self, lo: f64, hi: f64) -> f64 {
        if self.nodes.len() == 1 {
            return 0.0;
        }
        (self.value(hi) - self.value(lo)) / (hi - lo)
    }
}

/// Interior hat: x-cell center index per axis plus a flat y-node index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HatFn {
    pub cell: usize,
    pub y_flat: usize,
}

/// Boundary-coupled monomial: powers per x axis and per y axis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MonomialFn {
    pub x_pow: Vec<u32>,
    pub y_pow: Vec<u32>,
}

#[derive(Debug, Clone)]
pub struct TestBasis {
    pub hats: Vec<HatFn>,
    pub monomials: Vec<MonomialFn>,
    pub degree: usize,
}

impl TestBasis {
    /// Hats at every interior (x-cell, y-node) pair; monomials up to total
    /// degree `degree` (including the constant).
    pub fn for_grid(grid: &Grid, degree: usize) -> TestBasis {
        let n = grid.n();
        let mut hats = Vec::new();
        'cells: for (ci, cell) in grid.cells.iter().enumerate() {
            // the hat support must close inside Omega: all neighbor cells
            // retained and all support-box corners inside the domain
            for axis in 0..n {
                if grid.neighbor(ci, axis, -1).is_none() || grid.neighbor(ci, axis, 1).is_none() {
                    continue 'cells;
                }
            }
            let mut corner_ok = true;
            let corners = 1usize << n;
            for mask in 0..corners {
                let corner: Vec<f64> = (0..n)
                    .map(|a| {
                        let off = if mask & (1 << a) != 0 { 1.0 } else { -1.0 };
                        cell.center[a] + off * grid.x_widths[a]
                    })
                    .collect();
                if !grid.domain.contains(&corner) {
                    corner_ok = false;
                    break;
                }
            }
            if !corner_ok {
                continue;
            }
            for y_flat in 0..grid.y_len() {
                hats.push(HatFn { cell: ci, y_flat });
            }
        }

        let m = grid.m;
        let mut monomials = Vec::new();
        let mut pows = vec![0u32; n + m];
        loop {
            let total: u32 = pows.iter().sum();
            if total <= degree as u32 {
                monomials.push(MonomialFn {
                    x_pow: pows[..n].to_vec(),
                    y_pow: pows[n..].to_vec(),
                });
            }
            // odometer over exponents bounded by degree
            let mut done = true;
            for slot in (0..n + m).rev() {
                if pows[slot] < degree as u32 {
                    pows[slot] += 1;
                    for p in pows.iter_mut().skip(slot + 1) {
                        *p = 0;
                    }
                    done = false;
                    break;
                }
            }
            if done {
                break;
            }
        }
        monomials.retain(|mf| {
            mf.x_pow.iter().sum::<u32>() + mf.y_pow.iter().sum::<u32>() <= degree as u32
        });
        TestBasis {
            hats,
            monomials,
            degree,
        }
    }

    pub fn num_rows_per_direction(&self) -> usize {
        self.hats.len() + self.monomials.len()
    }

    /// Pairing coefficient of the interior measure node (cell, y, z) in the
    /// hat row (hat, direction):
    /// avg_cell(d phi/d x_l) + sum_k avg_cell(d phi/d y_k) z[l, k].
    pub fn hat_coefficient(
        &self,
        grid: &Grid,
        hat: &HatFn,
        direction: usize,
        cell: usize,
        y_per_axis: &[usize],
        z: &[f64],
    ) -> f64 {
        let n = grid.n();
        let m = grid.m;
        let target = &grid.cells[cell];
        let center = &grid.cells[hat.cell];

        // per-axis x factors: averages of the hat factor over the target cell
        let mut x_avg = [0.0f64; 8];
        let mut x_davg = 0.0;
        for a in 0..n {
            let h = HatAxis {
                nodes: &grid.x_axes[a].nodes,
                c: center.index[a],
            };
            let avg = h.average(target.lo[a], target.hi[a]);
            if avg == 0.0 && a != direction {
                // quick reject only when the derivative axis is elsewhere:
                // the derivative average can be nonzero where the value
                // average is not, but a zero value-average on another axis
                // kills the whole product
                return 0.0;
            }
            x_avg[a] = avg;
            if a == direction {
                x_davg = h.derivative_average(target.lo[a], target.hi[a]);
            }
        }

        let mut y_center = vec![0usize; m];
        decode_indices(hat.y_flat, &grid.y_axes, &mut y_center);
        let mut y_val = [0.0f64; 8];
        let mut y_der = [0.0f64; 8];
        for k in 0..m {
            let h = HatAxis {
                nodes: &grid.y_axes[k].nodes,
                c: y_center[k],
            };
            let t = grid.y_axes[k].nodes[y_per_axis[k]];
            y_val[k] = h.value(t);
            y_der[k] = h.derivative(t);
        }

        let x_prod_others: f64 = (0..n)
            .filter(|a| *a != direction)
            .map(|a| x_avg[a])
            .product();
        let x_prod_all: f64 = x_prod_others * x_avg[direction];
        let y_prod_all: f64 = (0..m).map(|k| y_val[k]).product();

        let mut coef = x_davg * x_prod_others * y_prod_all;
        if x_prod_all != 0.0 {
            for k in 0..m {
                if y_der[k] == 0.0 {
                    continue;
                }
                let y_others: f64 = (0..m).filter(|b| *b != k).map(|b| y_val[b]).product();
                coef += x_prod_all * y_der[k] * y_others * z[direction * m + k];
            }
        }
        coef
    }

    /// Same pairing for a monomial row.
    pub fn monomial_coefficient(
        &self,
        grid: &Grid,
        mono: &MonomialFn,
        direction: usize,
        cell: usize,
        y_per_axis: &[usize],
        z: &[f64],
    ) -> f64 {
        let n = grid.n();
        let m = grid.m;
        let target = &grid.cells[cell];
        let mut x_avg = [0.0f64; 8];
        let mut x_davg = 0.0;
        for a in 0..n {
            let p = mono.x_pow[a];
            x_avg[a] = power_average(target.lo[a], target.hi[a], p);
            if a == direction {
                x_davg = power_derivative_average(target.lo[a], target.hi[a], p);
            }
        }
        let mut y_val = [0.0f64; 8];
        let mut y_der = [0.0f64; 8];
        for k in 0..m {
            let q = mono.y_pow[k];
            let t = grid.y_axes[k].nodes[y_per_axis[k]];
            y_val[k] = t.powi(q as i32);
            y_der[k] = if q == 0 {
                0.0
            } else {
                q as f64 * t.powi(q as i32 - 1)
            };
        }
        let x_prod_others: f64 = (0..n)
            .filter(|a| *a != direction)
            .map(|a| x_avg[a])
            .product();
        let x_prod_all: f64 = x_prod_others * x_avg[direction];
        let y_prod_all: f64 = (0..m).map(|k| y_val[k]).product();
        let mut coef = x_davg * x_prod_others * y_prod_all;
        for k in 0..m {
            if y_der[k] == 0.0 {
                continue;
            }
            let y_others: f64 = (0..m).filter(|b| *b != k).map(|b| y_val[b]).product();
            coef += x_prod_all * y_der[k] * y_others * z[direction * m + k];
        }
        coef
    }

    /// Boundary side of a monomial row: phi(x_b, y) n_l(x_b).
    pub fn monomial_boundary_value(
        &self,
        grid: &Grid,
        mono: &MonomialFn,
        direction: usize,
        bnode: &BoundaryNode,
        y_per_axis: &[usize],
    ) -> f64 {
        let mut phi = 1.0;
        for (a, &p) in mono.x_pow.iter().enumerate() {
            phi *= bnode.x[a].powi(p as i32);
        }
        for (k, &q) in mono.y_pow.iter().enumerate() {
            phi *= grid.y_axes[k].nodes[y_per_axis[k]].powi(q as i32);
        }
        phi * bnode.normal[direction]
    }
}

fn power_average(lo: f64, hi: f64, p: u32) -> f64 {
    if p == 0 {
        return 1.0;
    }
    let q = p as i32 + 1;
    (hi.powi(q) - lo.powi(q)) / (q as f64 * (hi - lo))
}

fn power_derivative_average(lo: f64, hi: f64, p: u32) -> f64 {
    if p == 0 {
        return 0.0;
    }
    (hi.powi(p as i32) - lo.powi(p as i32)) / (hi - lo)
}

pub(crate) fn decode_indices(flat: usize, axes: &[Axis], out: &mut [usize]) {
    let mut rest = flat;
    for a in (0..axes.len()).rev() {
        let len = axes[a].len();
        out[a] = rest % len;
        rest /= len;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::Domain;

    #[test]
    fn hat_axis_primitives() {
        let nodes = [0.0, 1.0, 2.0, 3.0];
        let h = HatAxis {
            nodes: &nodes,
            c: 1,
        };
        assert_eq!(h.value(1.0), 1.0);
        assert_eq!(h.value(0.5), 0.5);
        assert_eq!(h.value(2.5), 0.0);
        assert_eq!(h.derivative(0.5), 1.0);
        assert_eq!(h.derivative(1.5), -1.0);
        assert_eq!(h.derivative(1.0), 0.0);
        // average over the full support is 1/2 of peak times width ratio
        assert!((h.average(0.0, 2.0) - 0.5).abs() < 1e-15);
        // derivative average telescopes
        assert!((h.derivative_average(0.25, 0.75) - 1.0).abs() < 1e-15);
        assert!((h.derivative_average(0.5, 1.5) - 0.0).abs() < 1e-15);
    }

    #[test]
    fn interval_grid_hat_rows_telescope_on_uniform_mass() {
        // uniform unit mass on (0,1): every interior hat row must vanish
        let d = Domain::interval(0.0, 1.0);
        let g = Grid::build(&d, &[(0.0, 0.0)], &[(-1.0, 1.0)], 8, 1, 3).unwrap();
        let basis = TestBasis::for_grid(&g, 2);
        assert_eq!(basis.hats.len(), 6); // cells 1..6 have both neighbors
        for hat in &basis.hats {
            let mut row = 0.0;
            for cell in 0..g.num_cells() {
                let coef = basis.hat_coefficient(&g, hat, 0, cell, &[0], &[0.0]);
                row += g.cells[cell].volume * coef;
            }
            assert!(row.abs() < 1e-14, "row {row}");
        }
    }

    #[test]
    fn monomial_rows_reproduce_moments_on_uniform_mass() {
        // sum over cells of vol * avg(d/dx x^p) = p integral x^{p-1} = 1
        let d = Domain::interval(0.0, 1.0);
        let g = Grid::build(&d, &[(0.0, 0.0)], &[(-1.0, 1.0)], 8, 1, 3).unwrap();
        let basis = TestBasis::for_grid(&g, 4);
        for mono in &basis.monomials {
            if mono.y_pow[0] != 0 || mono.x_pow[0] == 0 {
                continue;
            }
            let mut row = 0.0;
            for cell in 0..g.num_cells() {
                row += g.cells[cell].volume
                    * basis.monomial_coefficient(&g, mono, 0, cell, &[0], &[0.0]);
            }
            assert!((row - 1.0).abs() < 1e-13, "p={} row {row}", mono.x_pow[0]);
        }
    }

    #[test]
    fn degree_enumeration_counts() {
        let d = Domain::interval(0.0, 1.0);
        let g = Grid::build(&d, &[(0.0, 1.0)], &[(-1.0, 1.0)], 4, 3, 3).unwrap();
        let basis = TestBasis::for_grid(&g, 4);
        // (p, q) with p + q <= 4: 15 monomials
        assert_eq!(basis.monomials.len(), 15);
        // 2 interior cells x 3 y-nodes
        assert_eq!(basis.hats.len(), 6);
    }
}
