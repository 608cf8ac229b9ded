//! Bounded spatial domains with closed-form volume and a queryable boundary.
//!
//! Four kinds are supported: intervals (n=1), axis-aligned boxes, disks and
//! coronas (n=2). Boundary queries return nodes with exterior unit normals
//! and weights that sum to the exact (n-1)-dimensional boundary measure; box
//! nodes sit at face-segment midpoints so corners are never sampled.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Domain {
    Interval { a: f64, b: f64 },
    Box { lo: Vec<f64>, hi: Vec<f64> },
    Disk { radius: f64 },
    Corona { inner: f64, outer: f64 },
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum DomainError {
    #[error("invalid domain: {0}")]
    Invalid(String),
    #[error("boundary query needs count >= 2, got {0}")]
    BadCount(usize),
}

/// A sample point on the boundary: position, exterior unit normal, and the
/// share of the boundary measure it carries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryNode {
    pub x: Vec<f64>,
    pub normal: Vec<f64>,
    pub weight: f64,
}

impl Domain {
    pub fn interval(a: f64, b: f64) -> Self {
        Domain::Interval { a, b }
    }

    pub fn unit_box(n: usize) -> Self {
        Domain::Box {
            lo: vec![0.0; n],
            hi: vec![1.0; n],
        }
    }

    pub fn dimension(&self) -> usize {
        match self {
            Domain::Interval { .. } => 1,
            Domain::Box { lo, .. } => lo.len(),
            Domain::Disk { .. } | Domain::Corona { .. } => 2,
        }
    }

    pub fn validate(&self) -> Result<(), DomainError> {
        match self {
            Domain::Interval { a, b } => {
                if !(a.is_finite() && b.is_finite() && a < b) {
                    return Err(DomainError::Invalid(format!("interval ({a}, {b})")));
                }
            }
            Domain::Box { lo, hi } => {
                if lo.is_empty() || lo.len() != hi.len() {
                    return Err(DomainError::Invalid("box corner dimensions differ".into()));
                }
                for (l, h) in lo.iter().zip(hi) {
                    if !(l.is_finite() && h.is_finite() && l < h) {
                        return Err(DomainError::Invalid(format!("box side [{l}, {h}]")));
                    }
                }
            }
            Domain::Disk { radius } => {
                if !(radius.is_finite() && *radius > 0.0) {
                    return Err(DomainError::Invalid(format!("disk radius {radius}")));
                }
            }
            Domain::Corona { inner, outer } => {
                if !(inner.is_finite() && outer.is_finite() && 0.0 < *inner && inner < outer) {
                    return Err(DomainError::Invalid(format!("corona radii {inner}, {outer}")));
                }
            }
        }
        Ok(())
    }

    /// Lebesgue volume |Omega|, exact for all four kinds.
    pub fn volume(&self) -> f64 {
        match self {
            Domain::Interval { a, b } => b - a,
            Domain::Box { lo, hi } => lo.iter().zip(hi).map(|(l, h)| h - l).product(),
            Domain::Disk { radius } => std::f64::consts::PI * radius * radius,
            Domain::Corona { inner, outer } => {
                std::f64::consts::PI * (outer * outer - inner * inner)
            }
        }
    }

    /// Total (n-1)-dimensional boundary measure.
    pub fn boundary_measure(&self) -> f64 {
        match self {
            Domain::Interval { .. } => 2.0,
            Domain::Box { lo, hi } => {
                let sides: Vec<f64> = lo.iter().zip(hi).map(|(l, h)| h - l).collect();
                let vol: f64 = sides.iter().product();
                2.0 * sides.iter().map(|s| vol / s).sum::<f64>()
            }
            Domain::Disk { radius } => 2.0 * std::f64::consts::PI * radius,
            Domain::Corona { inner, outer } => 2.0 * std::f64::consts::PI * (inner + outer),
        }
    }

    /// Axis-aligned bounding box, as (lo, hi) per axis.
    pub fn bounding_box(&self) -> (Vec<f64>, Vec<f64>) {
        match self {
            Domain::Interval { a, b } => (vec![*a], vec![*b]),
            Domain::Box { lo, hi } => (lo.clone(), hi.clone()),
            Domain::Disk { radius } => (vec![-radius, -radius], vec![*radius, *radius]),
            Domain::Corona { outer, .. } => (vec![-outer, -outer], vec![*outer, *outer]),
        }
    }

    /// Whether `x` lies in the open set.
    pub fn contains(&self, x: &[f64]) -> bool {
        match self {
            Domain::Interval { a, b } => x[0] > *a && x[0] < *b,
            Domain::Box { lo, hi } => x
                .iter()
                .zip(lo.iter().zip(hi))
                .all(|(v, (l, h))| v > l && v < h),
            Domain::Disk { radius } => x[0] * x[0] + x[1] * x[1] < radius * radius,
            Domain::Corona { inner, outer } => {
                let r2 = x[0] * x[0] + x[1] * x[1];
                r2 > inner * inner && r2 < outer * outer
            }
        }
    }

    /// Boundary sample with exterior unit normals. `count` is the total node
    /// budget; the interval always returns its two endpoints, circles place
    /// nodes at arc midpoints, boxes at face-segment midpoints (corners are
    /// excluded). Weights sum to the exact boundary measure.
    pub fn boundary_nodes(&self, count: usize) -> Result<Vec<BoundaryNode>, DomainError> {
        if count < 2 {
            return Err(DomainError::BadCount(count));
        }
        self.validate()?;
        let nodes = match self {
            Domain::Interval { a, b } => vec![
                BoundaryNode {
                    x: vec![*a],
                    normal: vec![-1.0],
                    weight: 1.0,
                },
                BoundaryNode {
                    x: vec![*b],
                    normal: vec![1.0],
                    weight: 1.0,
                },
            ],
            Domain::Box { lo, hi } => {
                let n = lo.len();
                let sides: Vec<f64> = lo.iter().zip(hi).map(|(l, h)| h - l).collect();
                let vol: f64 = sides.iter().product();
                let face_measures: Vec<f64> = sides.iter().map(|s| vol / s).collect();
                let total: f64 = 2.0 * face_measures.iter().sum::<f64>();
                let mut nodes = Vec::new();
                // per-face budget proportional to its measure, at least 1
                for axis in 0..n {
                    let share = face_measures[axis] / total;
                    let per_face = ((count as f64 * share).round() as usize).max(1);
                    for &side in &[0usize, 1usize] {
                        // split the face into per_face equal pieces along a
                        // lexicographic tensor walk of the remaining axes
                        let nodes_on_face = face_nodes(lo, hi, axis, side, per_face);
                        nodes.extend(nodes_on_face);
                    }
                }
                nodes
            }
            Domain::Disk { radius } => circle_nodes(*radius, count, 1.0),
            Domain::Corona { inner, outer } => {
                let total = inner + outer;
                let n_out = ((count as f64 * outer / total).round() as usize).max(1);
                let n_in = (count - n_out.min(count - 1)).max(1);
                let mut nodes = circle_nodes(*outer, n_out, 1.0);
                nodes.extend(circle_nodes(*inner, n_in, -1.0));
                nodes
            }
        };
        Ok(nodes)
    }
}

fn circle_nodes(radius: f64, count: usize, orientation: f64) -> Vec<BoundaryNode> {
    let weight = 2.0 * std::f64::consts::PI * radius / count as f64;
    (0..count)
        .map(|i| {
            let theta = 2.0 * std::f64::consts::PI * (i as f64 + 0.5) / count as f64;
            let (s, c) = theta.sin_cos();
            BoundaryNode {
                x: vec![radius * c, radius * s],
                normal: vec![orientation * c, orientation * s],
                weight,
            }
        })
        .collect()
}

/// Nodes on the face {x_axis = lo|hi}, tensorized midpoints over the other
/// axes. `per_face` is split as evenly as possible across the remaining axes.
fn face_nodes(
    lo: &[f64],
    hi: &[f64],
    axis: usize,
    side: usize,
    per_face: usize,
) -> Vec<BoundaryNode> {
    let n = lo.len();
    let others: Vec<usize> = (0..n).filter(|a| *a != axis).collect();
    // factor per_face into per-axis counts (roughly the (n-1)-th root)
    let mut counts = vec![1usize; others.len()];
    if !others.is_empty() {
        let root = (per_face as f64).powf(1.0 / others.len() as f64).round() as usize;
        let root = root.max(1);
        for c in counts.iter_mut() {
            *c = root;
        }
        // grow the first axis until the product covers per_face
        while counts.iter().product::<usize>() < per_face {
            counts[0] += 1;
        }
    }
    let face_measure: f64 = others.iter().map(|a| hi[*a] - lo[*a]).product();
    let total_nodes: usize = counts.iter().product();
    let weight = face_measure / total_nodes as f64;
    let mut nodes = Vec::with_capacity(total_nodes);
    let mut idx = vec![0usize; others.len()];
    loop {
        let mut x = vec![0.0; n];
        x[axis] = if side == 0 { lo[axis] } else { hi[axis] };
        for (slot, &a) in others.iter().enumerate() {
            let h = (hi[a] - lo[a]) / counts[slot] as f64;
            x[a] = lo[a] + (idx[slot] as f64 + 0.5) * h;
        }
        let mut normal = vec![0.0; n];
        normal[axis] = if side == 0 { -1.0 } else { 1.0 };
        nodes.push(BoundaryNode { x, normal, weight });
        // advance tensor index
        let mut carry = true;
        for slot in 0..others.len() {
            if carry {
                idx[slot] += 1;
                if idx[slot] == counts[slot] {
                    idx[slot] = 0;
                } else {
                    carry = false;
                }
            }
        }
        if carry {
            break;
        }
        if others.is_empty() {
            break;
        }
    }
    if others.is_empty() {
        nodes.truncate(1);
    }
    nodes
}
