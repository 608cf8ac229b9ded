//! Variational and optimal-control problem definitions, the JSON problem
//! schema, the built-in example registry, and the control-to-variational
//! reduction.

use crate::domain::Domain;
use crate::expr::Arity;
use crate::field::{FieldError, ScalarField};
use serde::{Deserialize, Serialize};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IntegralRelation {
    /// integral of H against the measure <= target
    Le,
    /// integral of H against the measure = target
    Eq,
}

#[derive(Debug, Clone)]
pub struct IntegralConstraint {
    pub h: ScalarField,
    pub relation: IntegralRelation,
    pub target: f64,
}

/// A variational problem: minimize the integral of L plus the boundary
/// integral of L_b over functions whose pointwise values satisfy F = 0 and
/// G <= 0 (and the boundary analogues), with optional integral constraints.
#[derive(Debug, Clone)]
pub struct VariationalProblem {
    pub domain: Domain,
    pub m: usize,
    /// Per-z-axis bounds, direction-major: n*m pairs.
    pub z_box: Vec<(f64, f64)>,
    /// Per-y-axis bounds used to lay out grids; degenerate intervals pin the
    /// axis to a single node.
    pub y_box: Vec<(f64, f64)>,
    pub l: ScalarField,
    pub l_b: ScalarField,
    pub f: Option<ScalarField>,
    pub g: Option<ScalarField>,
    pub f_b: Option<ScalarField>,
    pub g_b: Option<ScalarField>,
    pub integral: Vec<IntegralConstraint>,
    /// Set when the problem came from the builtin registry; lets JSON export
    /// reference the builtin instead of expanding fields.
    pub builtin: Option<String>,
}

#[derive(Debug, Clone, Error)]
pub enum ProblemError {
    #[error("unknown builtin problem `{0}`")]
    UnknownBuiltin(String),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Domain(#[from] crate::domain::DomainError),
    #[error("invalid problem: {0}")]
    Invalid(String),
    #[error("json: {0}")]
    Json(String),
}

impl VariationalProblem {
    pub fn n(&self) -> usize {
        self.domain.dimension()
    }

    pub fn arity(&self) -> Arity {
        Arity::new(self.n(), self.m)
    }

    pub fn validate(&self) -> Result<(), ProblemError> {
        self.domain.validate()?;
        if self.m == 0 {
            return Err(ProblemError::Invalid("m must be >= 1".into()));
        }
        let n = self.n();
        if self.z_box.len() != n * self.m {
            return Err(ProblemError::Invalid(format!(
                "zBox needs {} axis bounds, got {}",
                n * self.m,
                self.z_box.len()
            )));
        }
        if self.y_box.len() != self.m {
            return Err(ProblemError::Invalid(format!(
                "yBox needs {} axis bounds, got {}",
                self.m,
                self.y_box.len()
            )));
        }
        for (lo, hi) in self.z_box.iter() {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(ProblemError::Invalid("empty zBox axis".into()));
            }
        }
        for (lo, hi) in self.y_box.iter() {
            if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                return Err(ProblemError::Invalid("invalid yBox axis".into()));
            }
        }
        let a = self.arity();
        for field in [&self.l, &self.l_b]
            .into_iter()
            .chain(self.f.iter())
            .chain(self.g.iter())
            .chain(self.f_b.iter())
            .chain(self.g_b.iter())
        {
            if field.arity() != a {
                return Err(ProblemError::Invalid(format!(
                    "field `{}` arity mismatch",
                    field.describe()
                )));
            }
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// JSON schema

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IntegralSpec {
    #[serde(rename = "H")]
    pub h: String,
    pub rel: IntegralRelation,
    #[serde(default)]
    pub target: f64,
}

/// Serde mirror of the JSON problem schema. Either `builtin` alone, or a
/// full field set; see the README for the format.
#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub builtin: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub domain: Option<Domain>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    #[serde(rename = "zBox", skip_serializing_if = "Option::is_none")]
    pub z_box: Option<Vec<[f64; 2]>>,
    #[serde(rename = "yBox", skip_serializing_if = "Option::is_none")]
    pub y_box: Option<Vec<[f64; 2]>>,
    #[serde(rename = "L", skip_serializing_if = "Option::is_none")]
    pub l: Option<String>,
    #[serde(rename = "Lb", skip_serializing_if = "Option::is_none")]
    pub l_b: Option<String>,
    #[serde(rename = "F", skip_serializing_if = "Option::is_none")]
    pub f: Option<String>,
    #[serde(rename = "G", skip_serializing_if = "Option::is_none")]
    pub g: Option<String>,
    #[serde(rename = "Fb", skip_serializing_if = "Option::is_none")]
    pub f_b: Option<String>,
    #[serde(rename = "Gb", skip_serializing_if = "Option::is_none")]
    pub g_b: Option<String>,
    #[serde(rename = "convexInZ", default, skip_serializing_if = "std::ops::Not::not")]
    pub convex_in_z: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub integral: Vec<IntegralSpec>,
}

impl VariationalProblem {
    pub fn from_spec(spec: &ProblemSpec) -> Result<Self, ProblemError> {
        if let Some(name) = &spec.builtin {
            return builtin(name);
        }
        let domain = spec
            .domain
            .clone()
            .ok_or_else(|| ProblemError::Invalid("missing `domain` (or `builtin`)".into()))?;
        let m = spec.m.unwrap_or(1);
        let n = domain.dimension();
        let arity = Arity::new(n, m);
        let z_box: Vec<(f64, f64)> = spec
            .z_box
            .clone()
            .ok_or_else(|| ProblemError::Invalid("missing `zBox`".into()))?
            .into_iter()
            .map(|[lo, hi]| (lo, hi))
            .collect();
        let y_box: Vec<(f64, f64)> = spec
            .y_box
            .clone()
            .unwrap_or_else(|| vec![[-1.0, 1.0]; m])
            .into_iter()
            .map(|[lo, hi]| (lo, hi))
            .collect();
        let l_src = spec
            .l
            .as_ref()
            .ok_or_else(|| ProblemError::Invalid("missing `L`".into()))?;
        let l = ScalarField::from_expr(l_src, arity)?.with_convexity(spec.convex_in_z);
        let l_b = match &spec.l_b {
            Some(src) => ScalarField::from_boundary_expr(src, arity)?,
            None => ScalarField::zero(arity),
        };
        let parse_opt = |src: &Option<String>| -> Result<Option<ScalarField>, ProblemError> {
            Ok(match src {
                Some(s) => Some(ScalarField::from_expr(s, arity)?),
                None => None,
            })
        };
        let parse_opt_b = |src: &Option<String>| -> Result<Option<ScalarField>, ProblemError> {
            Ok(match src {
                Some(s) => Some(ScalarField::from_boundary_expr(s, arity)?),
                None => None,
            })
        };
        let mut integral = Vec::new();
        for ic in &spec.integral {
            integral.push(IntegralConstraint {
                h: ScalarField::from_expr(&ic.h, arity)?,
                relation: ic.rel,
                target: ic.target,
            });
        }
        let problem = VariationalProblem {
            domain,
            m,
            z_box,
            y_box,
            l,
            l_b,
            f: parse_opt(&spec.f)?,
            g: parse_opt(&spec.g)?,
            f_b: parse_opt_b(&spec.f_b)?,
            g_b: parse_opt_b(&spec.g_b)?,
            integral,
            builtin: None,
        };
        problem.validate()?;
        Ok(problem)
    }

    pub fn to_spec(&self) -> Result<ProblemSpec, ProblemError> {
        if let Some(name) = &self.builtin {
            return Ok(ProblemSpec {
                builtin: Some(name.clone()),
                ..ProblemSpec::default()
            });
        }
        let field_src = |f: &ScalarField| -> Result<String, ProblemError> {
            if let Some(src) = f.expr_source() {
                Ok(src.to_string())
            } else if f.is_const_zero() {
                Ok("0".to_string())
            } else {
                Err(ProblemError::Field(FieldError::NotSerializable(
                    f.describe(),
                )))
            }
        };
        let opt_src = |f: &Option<ScalarField>| -> Result<Option<String>, ProblemError> {
            Ok(match f {
                Some(f) => Some(field_src(f)?),
                None => None,
            })
        };
        Ok(ProblemSpec {
            builtin: None,
            domain: Some(self.domain.clone()),
            m: Some(self.m),
            z_box: Some(self.z_box.iter().map(|&(lo, hi)| [lo, hi]).collect()),
            y_box: Some(self.y_box.iter().map(|&(lo, hi)| [lo, hi]).collect()),
            l: Some(field_src(&self.l)?),
            l_b: if self.l_b.is_const_zero() {
                None
            } else {
                Some(field_src(&self.l_b)?)
            },
            f: opt_src(&self.f)?,
            g: opt_src(&self.g)?,
            f_b: opt_src(&self.f_b)?,
            g_b: opt_src(&self.g_b)?,
            convex_in_z: self.l.convex_in_z,
            integral: self
                .integral
                .iter()
                .map(|ic| {
                    Ok(IntegralSpec {
                        h: field_src(&ic.h)?,
                        rel: ic.relation,
                        target: ic.target,
                    })
                })
                .collect::<Result<Vec<_>, ProblemError>>()?,
        })
    }

    pub fn from_json(json: &str) -> Result<Self, ProblemError> {
        let spec: ProblemSpec =
            serde_json::from_str(json).map_err(|e| ProblemError::Json(e.to_string()))?;
        Self::from_spec(&spec)
    }

    pub fn to_json(&self) -> Result<String, ProblemError> {
        let spec = self.to_spec()?;
        serde_json::to_string_pretty(&spec).map_err(|e| ProblemError::Json(e.to_string()))
    }
}

// ---------------------------------------------------------------------------
// builtin registry

pub const BUILTIN_NAMES: [&str; 6] = [
    "double-well",
    "gap-ineq",
    "gap-eq",
    "two-sheet",
    "codim1-demo",
    "counterexample-2d",
];

pub fn builtin(name: &str) -> Result<VariationalProblem, ProblemError> {
    let a1 = Arity::new(1, 1);
    let mut problem = match name {
        "double-well" => VariationalProblem {
            domain: Domain::interval(0.0, 1.0),
            m: 1,
            z_box: vec![(-1.0, 1.0)],
            y_box: vec![(0.0, 0.0)],
            l: ScalarField::from_expr("min(abs(z1-1),abs(z1+1))", a1)?.with_convexity(false),
            l_b: ScalarField::zero(a1),
            f: Some(ScalarField::from_expr("y1", a1)?),
            g: None,
            f_b: None,
            g_b: None,
            integral: vec![],
            builtin: None,
        },
        "gap-ineq" => VariationalProblem {
            domain: Domain::interval(0.0, 1.0),
            m: 1,
            z_box: vec![(-1.0, 1.0)],
            y_box: vec![(0.0, 1.0)],
            l: ScalarField::from_expr("y1", a1)?.with_convexity(true),
            l_b: ScalarField::zero(a1),
            f: Some(ScalarField::from_expr("y1*(1-y1)", a1)?),
            g: None,
            f_b: None,
            g_b: None,
            integral: vec![IntegralConstraint {
                h: ScalarField::from_expr("1-10*y1", a1)?,
                relation: IntegralRelation::Le,
                target: 0.0,
            }],
            builtin: None,
        },
        "gap-eq" => VariationalProblem {
            domain: Domain::interval(0.0, 1.0),
            m: 1,
            z_box: vec![(-1.0, 1.0)],
            y_box: vec![(0.0, 2.0)],
            l: ScalarField::from_expr("y1", a1)?.with_convexity(true),
            l_b: ScalarField::zero(a1),
            f: Some(ScalarField::from_expr("y1*(y1-1)*(y1-2)", a1)?),
            g: None,
            f_b: None,
            g_b: None,
            integral: vec![IntegralConstraint {
                h: ScalarField::from_expr("(7/4)*y1-(3/4)*y1^2", a1)?,
                relation: IntegralRelation::Eq,
                target: 0.5,
            }],
            builtin: None,
        },
        "two-sheet" => VariationalProblem {
            domain: Domain::interval(0.0, 1.0),
            m: 1,
            z_box: vec![(-1.0, 1.0)],
            y_box: vec![(0.0, 1.0)],
            l: ScalarField::from_expr("z1^2", a1)?.with_convexity(true),
            l_b: ScalarField::zero(a1),
            f: None,
            g: None,
            f_b: None,
            g_b: None,
            integral: vec![],
            builtin: None,
        },
        "codim1-demo" => {
            let a = Arity::new(2, 1);
            VariationalProblem {
                domain: Domain::unit_box(2),
                m: 1,
                z_box: vec![(-0.5, 0.5), (-0.5, 0.5)],
                y_box: vec![(0.0, 1.0)],
                l: ScalarField::from_expr(
                    "z11^2+z21^2+(y1-(0.5+0.25*(x1+x2-1)))^2",
                    a,
                )?
                .with_convexity(true),
                l_b: ScalarField::zero(a),
                f: None,
                g: None,
                f_b: None,
                g_b: None,
                integral: vec![],
                builtin: None,
            }
        }
        "counterexample-2d" => {
            let a = Arity::new(2, 2);
            VariationalProblem {
                domain: Domain::Disk { radius: 1.0 },
                m: 2,
                z_box: vec![(-3.0, 3.0); 4],
                y_box: vec![(-1.0, 1.0), (-1.0, 1.0)],
                l: ScalarField::counterexample_lagrangian(),
                l_b: ScalarField::zero(a),
                f: None,
                g: None,
                f_b: None,
                g_b: None,
                integral: vec![],
                builtin: None,
            }
        }
        other => return Err(ProblemError::UnknownBuiltin(other.to_string())),
    };
    problem.builtin = Some(name.to_string());
    problem.validate()?;
    Ok(problem)
}

/// The two Lipschitz curves behind the `two-sheet` demo measure: gamma
/// carries weight 2/3, eta weight 1/3, they cross once at x = 1/2.
pub fn two_sheet_curves() -> (impl Fn(f64) -> f64, impl Fn(f64) -> f64, f64, f64) {
    let gamma = |x: f64| 0.75 - 0.5 * x;
    let eta = |x: f64| 0.25 + 0.5 * x;
    (gamma, eta, 2.0 / 3.0, 1.0 / 3.0)
}

/// Reference function for the `codim1-demo` target; the Lagrangian penalizes
/// distance to it alongside the gradient energy.
pub fn codim1_demo_target(x: &[f64]) -> f64 {
    0.5 + 0.25 * (x[0] + x[1] - 1.0)
}

// ---------------------------------------------------------------------------
// optimal control

pub type ControlFieldFn = Arc<dyn Fn(&[f64], &[f64], &[f64], &[f64]) -> f64 + Send + Sync>;
pub type BoundaryControlFn = Arc<dyn Fn(&[f64], &[f64], &[f64]) -> f64 + Send + Sync>;

/// Control problem with finitely sampled compact control sets. Fields take
/// (x, y, z, u); boundary fields take (x, y, u).
pub struct ControlProblem {
    pub domain: Domain,
    pub m: usize,
    pub z_box: Vec<(f64, f64)>,
    pub y_box: Vec<(f64, f64)>,
    pub l: ControlFieldFn,
    pub f: Option<ControlFieldFn>,
    pub g: Option<ControlFieldFn>,
    pub l_b: Option<BoundaryControlFn>,
    pub f_b: Option<BoundaryControlFn>,
    pub g_b: Option<BoundaryControlFn>,
    pub control_grid: Vec<Vec<f64>>,
    pub boundary_control_grid: Vec<Vec<f64>>,
    /// Finite stand-in for +inf when no control sample is feasible.
    pub penalty: f64,
    /// Absolute tolerance for |F| = 0 selection; when None it defaults to
    /// 1e-6 times the sampled scale of F on the working box.
    pub tol_f: Option<f64>,
}

impl ControlProblem {
    pub fn default_penalty() -> f64 {
        1e6
    }
}

/// Counters exposed alongside a reduced problem; infeasible control queries
/// return the penalty value and are tallied here rather than silently mapped
/// to infinity.
#[derive(Debug, Clone)]
pub struct ReductionReport {
    pub tol_f: f64,
    pub penalty: f64,
    infeasible_hits: Arc<AtomicU64>,
}

impl ReductionReport {
    pub fn infeasible_hits(&self) -> u64 {
        self.infeasible_hits.load(Ordering::Relaxed)
    }
}

/// Reduce an optimal-control problem to a variational one by minimizing over
/// the control grid pointwise: the running cost becomes
/// `min { L(x,y,z,u) : |F(x,y,z,u)| <= tol_F, G(x,y,z,u) <= tol_F }` and the
/// pointwise constraints become the 0/1 indicator of the projected
/// admissible set (0 on admissible points).
pub fn reduce_control(
    cp: &ControlProblem,
) -> Result<(VariationalProblem, ReductionReport), ProblemError> {
    if cp.control_grid.is_empty() {
        return Err(ProblemError::Invalid("empty control grid".into()));
    }
    let n = cp.domain.dimension();
    let arity = Arity::new(n, cp.m);
    let tol_f = cp.tol_f.unwrap_or_else(|| {
        let scale = sample_f_scale(cp);
        1e-6 * scale
    });
    let penalty = cp.penalty;
    let hits = Arc::new(AtomicU64::new(0));

    let grid = cp.control_grid.clone();
    let l = cp.l.clone();
    let f = cp.f.clone();
    let g = cp.g.clone();
    let hits_l = hits.clone();
    let reduced_l: ScalarField = ScalarField::dynamic(
        "control-reduced running cost",
        arity,
        true,
        false,
        Arc::new(move |x: &[f64], y: &[f64], z: &[f64]| {
            let mut best = f64::INFINITY;
            for u in &grid {
                let feas_f = f.as_ref().map_or(true, |f| f(x, y, z, u).abs() <= tol_f);
                let feas_g = g.as_ref().map_or(true, |g| g(x, y, z, u) <= tol_f);
                if feas_f && feas_g {
                    best = best.min(l(x, y, z, u));
                }
            }
            if best.is_finite() {
                best
            } else {
                hits_l.fetch_add(1, Ordering::Relaxed);
                penalty
            }
        }),
    );

    let grid = cp.control_grid.clone();
    let f = cp.f.clone();
    let g = cp.g.clone();
    let reduced_f: Option<ScalarField> = if cp.f.is_some() || cp.g.is_some() {
        Some(ScalarField::dynamic(
            "projected admissible-set indicator",
            arity,
            true,
            false,
            Arc::new(move |x: &[f64], y: &[f64], z: &[f64]| {
                let feasible = grid.iter().any(|u| {
                    f.as_ref().map_or(true, |f| f(x, y, z, u).abs() <= tol_f)
                        && g.as_ref().map_or(true, |g| g(x, y, z, u) <= tol_f)
                });
                if feasible {
                    0.0
                } else {
                    1.0
                }
            }),
        ))
    } else {
        None
    };

    let bgrid = if cp.boundary_control_grid.is_empty() {
        cp.control_grid.clone()
    } else {
        cp.boundary_control_grid.clone()
    };
    let reduced_lb: ScalarField = match &cp.l_b {
        Some(lb) => {
            let lb = lb.clone();
            let bgrid = bgrid.clone();
            let hits_b = hits.clone();
            ScalarField::dynamic(
                "control-reduced boundary cost",
                arity,
                false,
                false,
                Arc::new(move |x: &[f64], y: &[f64], _z: &[f64]| {
                    let best = bgrid
                        .iter()
                        .map(|u| lb(x, y, u))
                        .fold(f64::INFINITY, f64::min);
                    if best.is_finite() {
                        best
                    } else {
                        hits_b.fetch_add(1, Ordering::Relaxed);
                        penalty
                    }
                }),
            )
        }
        None => ScalarField::zero(arity),
    };
    let reduced_fb: Option<ScalarField> = match (&cp.f_b, &cp.g_b) {
        (None, None) => None,
        (fb, gb) => {
            let fb = fb.clone();
            let gb = gb.clone();
            let bgrid = bgrid.clone();
            Some(ScalarField::dynamic(
                "projected boundary admissible-set indicator",
                arity,
                false,
                false,
                Arc::new(move |x: &[f64], y: &[f64], _z: &[f64]| {
                    let feasible = bgrid.iter().any(|u| {
                        fb.as_ref().map_or(true, |f| f(x, y, u).abs() <= tol_f)
                            && gb.as_ref().map_or(true, |g| g(x, y, u) <= tol_f)
                    });
                    if feasible {
                        0.0
                    } else {
                        1.0
                    }
                }),
            ))
        }
    };

    let problem = VariationalProblem {
        domain: cp.domain.clone(),
        m: cp.m,
        z_box: cp.z_box.clone(),
        y_box: cp.y_box.clone(),
        l: reduced_l,
        l_b: reduced_lb,
        f: reduced_f,
        g: None,
        f_b: reduced_fb,
        g_b: None,
        integral: vec![],
        builtin: None,
    };
    problem.validate()?;
    Ok((
        problem,
        ReductionReport {
            tol_f,
            penalty,
            infeasible_hits: hits,
        },
    ))
}

/// Deterministic coarse sample of |F| over the working box and control grid,
/// used to scale the F = 0 selection tolerance.
fn sample_f_scale(cp: &ControlProblem) -> f64 {
    let Some(f) = &cp.f else { return 1.0 };
    let n = cp.domain.dimension();
    let (lo, hi) = cp.domain.bounding_box();
    let steps = 4usize;
    let lattice = |lo: f64, hi: f64, i: usize| lo + (hi - lo) * (i as f64 + 0.5) / steps as f64;
    let mut max_abs = 0.0f64;
    // tensor walk kept small: vary each axis independently around the box
    // center rather than taking the full product
    let x_center: Vec<f64> = (0..n).map(|a| 0.5 * (lo[a] + hi[a])).collect();
    let y_center: Vec<f64> = cp.y_box.iter().map(|&(l, h)| 0.5 * (l + h)).collect();
    let z_center: Vec<f64> = cp.z_box.iter().map(|&(l, h)| 0.5 * (l + h)).collect();
    for u in &cp.control_grid {
        max_abs = max_abs.max(f(&x_center, &y_center, &z_center, u).abs());
        for axis in 0..n {
            for i in 0..steps {
                let mut x = x_center.clone();
                x[axis] = lattice(lo[axis], hi[axis], i);
                max_abs = max_abs.max(f(&x, &y_center, &z_center, u).abs());
            }
        }
        for (k, &(l, h)) in cp.y_box.iter().enumerate() {
            for i in 0..steps {
                let mut y = y_center.clone();
                y[k] = lattice(l, h, i);
                max_abs = max_abs.max(f(&x_center, &y, &z_center, u).abs());
            }
        }
        for (k, &(l, h)) in cp.z_box.iter().enumerate() {
            for i in 0..steps {
                let mut z = z_center.clone();
                z[k] = lattice(l, h, i);
                max_abs = max_abs.max(f(&x_center, &y_center, &z, u).abs());
            }
        }
    }
    max_abs.max(1e-12)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn builtin_registry_is_complete() {
        for name in BUILTIN_NAMES {
            let p = builtin(name).unwrap();
            assert_eq!(p.builtin.as_deref(), Some(name));
        }
        assert!(matches!(
            builtin("nope"),
            Err(ProblemError::UnknownBuiltin(_))
        ));
    }

    #[test]
    fn builtins_round_trip_through_json() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for name in BUILTIN_NAMES {
            let p = builtin(name).unwrap();
            let json = p.to_json().unwrap();
            let q = VariationalProblem::from_json(&json).unwrap();
            let n = p.n();
            for _ in 0..100 {
                let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-0.5..0.5)).collect();
                let y: Vec<f64> = (0..p.m).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let z: Vec<f64> = (0..n * p.m).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let a = p.l.eval(&x, &y, &z).unwrap();
                let b = q.l.eval(&x, &y, &z).unwrap();
                assert_eq!(a.to_bits(), b.to_bits(), "{name} L mismatch");
                if let (Some(pf), Some(qf)) = (&p.f, &q.f) {
                    assert_eq!(
                        pf.eval(&x, &y, &z).unwrap().to_bits(),
                        qf.eval(&x, &y, &z).unwrap().to_bits()
                    );
                }
            }
        }
    }

    #[test]
    fn full_json_schema_round_trips() {
        let json = r#"{
            "domain": {"kind": "interval", "a": 0.0, "b": 1.0},
            "m": 1,
            "zBox": [[-1, 1]],
            "yBox": [[0, 1]],
            "L": "y1",
            "F": "y1*(1-y1)",
            "integral": [{"H": "1-10*y1", "rel": "le", "target": 0.0}]
        }"#;
        let p = VariationalProblem::from_json(json).unwrap();
        let back = VariationalProblem::from_json(&p.to_json().unwrap()).unwrap();
        assert_eq!(back.integral.len(), 1);
        assert_eq!(back.integral[0].relation, IntegralRelation::Le);
        assert_eq!(p.l.eval(&[0.5], &[0.25], &[0.0]).unwrap(), 0.25);
        assert_eq!(back.l.eval(&[0.5], &[0.25], &[0.0]).unwrap(), 0.25);
    }

    fn simple_control(
        l: impl Fn(&[f64], &[f64], &[f64], &[f64]) -> f64 + Send + Sync + 'static,
        f: Option<ControlFieldFn>,
        grid: Vec<Vec<f64>>,
    ) -> ControlProblem {
        ControlProblem {
            domain: Domain::interval(0.0, 1.0),
            m: 1,
            z_box: vec![(-2.0, 2.0)],
            y_box: vec![(-1.0, 1.0)],
            l: Arc::new(l),
            f,
            g: None,
            l_b: None,
            f_b: None,
            g_b: None,
            control_grid: grid,
            boundary_control_grid: vec![],
            penalty: ControlProblem::default_penalty(),
            tol_f: None,
        }
    }

    #[test]
    fn identity_control_substitutes() {
        // Dy = u, so L-bar(x,y,z) = L(x,y,z,z)
        let grid: Vec<Vec<f64>> = (0..41).map(|i| vec![-2.0 + 0.1 * i as f64]).collect();
        let cp = simple_control(
            |_x, _y, _z, u| (u[0] - 1.0).powi(2),
            Some(Arc::new(|_x, _y, z: &[f64], u: &[f64]| z[0] - u[0])),
            grid,
        );
        let (vp, report) = reduce_control(&cp).unwrap();
        // query at a z that the control grid contains exactly
        let v = vp.l.eval(&[0.5], &[0.0], &[0.5]).unwrap();
        assert!((v - 0.25).abs() < 1e-12, "{v}");
        assert_eq!(report.infeasible_hits(), 0);
    }

    #[test]
    fn quadratic_with_equality_constraint() {
        // L = (u-1)^2 + z^2, F = z - u, grid containing z
        let grid: Vec<Vec<f64>> = (0..41).map(|i| vec![-2.0 + 0.1 * i as f64]).collect();
        let cp = simple_control(
            |_x, _y, z, u| (u[0] - 1.0).powi(2) + z[0] * z[0],
            Some(Arc::new(|_x, _y, z: &[f64], u: &[f64]| z[0] - u[0])),
            grid,
        );
        let (vp, _) = reduce_control(&cp).unwrap();
        let z = 0.3;
        let v = vp.l.eval(&[0.5], &[0.0], &[z]).unwrap();
        assert!((v - ((z - 1.0).powi(2) + z * z)).abs() < 1e-12);
    }

    #[test]
    fn unconstrained_min_over_grid() {
        // L = u^2, F absent, grid on [-1,1] containing 0 -> L-bar = 0
        let grid: Vec<Vec<f64>> = (0..21).map(|i| vec![-1.0 + 0.1 * i as f64]).collect();
        let cp = simple_control(|_x, _y, _z, u| u[0] * u[0], None, grid);
        let (vp, _) = reduce_control(&cp).unwrap();
        let v = vp.l.eval(&[0.1], &[0.2], &[0.3]).unwrap();
        assert!(v.abs() < 1e-12);
    }

    #[test]
    fn infeasible_points_hit_penalty_and_are_counted() {
        let grid = vec![vec![0.0]];
        let cp = simple_control(
            |_x, _y, _z, u| u[0],
            Some(Arc::new(|_x, _y, z: &[f64], u: &[f64]| z[0] - u[0])),
            grid,
        );
        let (vp, report) = reduce_control(&cp).unwrap();
        let v = vp.l.eval(&[0.5], &[0.0], &[1.5]).unwrap();
        assert_eq!(v, ControlProblem::default_penalty());
        assert_eq!(report.infeasible_hits(), 1);
        // the indicator field flags it too
        let ind = vp.f.as_ref().unwrap().eval(&[0.5], &[0.0], &[1.5]).unwrap();
        assert_eq!(ind, 1.0);
    }

    #[test]
    fn enlarging_the_control_grid_never_increases_the_reduced_cost() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        for _ in 0..20 {
            let coarse: Vec<Vec<f64>> = (0..5).map(|i| vec![-1.0 + 0.5 * i as f64]).collect();
            let mut fine = coarse.clone();
            for i in 0..4 {
                fine.push(vec![-0.75 + 0.5 * i as f64]);
            }
            let a = rng.gen_range(-1.0..1.0);
            let l = move |_x: &[f64], _y: &[f64], _z: &[f64], u: &[f64]| (u[0] - a).powi(2);
            let (vp_coarse, _) = reduce_control(&simple_control(l, None, coarse)).unwrap();
            let (vp_fine, _) = reduce_control(&simple_control(l, None, fine)).unwrap();
            for _ in 0..20 {
                let x = [rng.gen_range(0.0..1.0)];
                let y = [rng.gen_range(-1.0..1.0)];
                let z = [rng.gen_range(-2.0..2.0)];
                let c = vp_coarse.l.eval(&x, &y, &z).unwrap();
                let f = vp_fine.l.eval(&x, &y, &z).unwrap();
                assert!(f <= c + 1e-12);
            }
        }
    }
}
