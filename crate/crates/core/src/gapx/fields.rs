//! Field constructions for the two-dimensional gap example: a double-valued
//! target map on the unit disk (a cubed-modulus variant of the complex square
//! root), blended single-valued selections U and V, the wedge set where the
//! blend is exact, and a strictly z-convex Lagrangian that vanishes exactly
//! on the lifted double graph.
//!
//! Gradient blocks use the crate-wide direction-major layout:
//! `z[l*2 + k] = d y_k / d x_l`.

/// Polar angle in [0, 2*pi). Points on the positive x1-axis get angle 0, so
/// values there continue the upper branch.
pub fn polar(x: &[f64]) -> (f64, f64) {
    let r = (x[0] * x[0] + x[1] * x[1]).sqrt();
    let mut theta = x[1].atan2(x[0]);
    if theta < 0.0 {
        theta += 2.0 * std::f64::consts::PI;
    }
    (r, theta)
}

/// The two branches of the target map: u_k(x) = (-1)^k r^3 (cos t/2, sin t/2).
pub fn branch(x: &[f64], k: usize) -> [f64; 2] {
    let (r, theta) = polar(x);
    let r3 = r * r * r;
    let (s, c) = (0.5 * theta).sin_cos();
    let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
    [sign * r3 * c, sign * r3 * s]
}

/// Jacobian of `branch`, direction-major flat: entry l*2+c is du_c/dx_l.
/// On the positive x1-axis this is the continuous extension from above,
/// (-1)^k a^2 diag(3, 1/2).
pub fn branch_jacobian(x: &[f64], k: usize) -> [f64; 4] {
    let (r, theta) = polar(x);
    let r2 = r * r;
    let (sh, ch) = (0.5 * theta).sin_cos();
    let (st, ct) = theta.sin_cos();
    let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
    // d u_c / d x_l, from the polar chain rule
    let du1_dx1 = r2 * (3.0 * ch * ct + 0.5 * sh * st);
    let du1_dx2 = r2 * (3.0 * ch * st - 0.5 * sh * ct);
    let du2_dx1 = r2 * (3.0 * sh * ct - 0.5 * ch * st);
    let du2_dx2 = r2 * (3.0 * sh * st + 0.5 * ch * ct);
    [
        sign * du1_dx1,
        sign * du2_dx1,
        sign * du1_dx2,
        sign * du2_dx2,
    ]
}

/// Smoothly reparameterized branch family: the jump between the two charts
/// sits at polar angle `alpha` instead of 0, and
/// `rotated_branch(x, alpha + 2*pi) = -rotated_branch(x, alpha)`.
pub fn rotated_branch(x: &[f64], alpha: f64) -> [f64; 2] {
    let (r, phi) = polar(x);
    let two_pi = 2.0 * std::f64::consts::PI;
    let theta_rel = (phi - alpha).rem_euclid(two_pi);
    let half = 0.5 * (alpha + theta_rel);
    let r3 = r * r * r;
    let (s, c) = half.sin_cos();
    [r3 * c, r3 * s]
}

/// Jacobian of `rotated_branch`, same layout as [`branch_jacobian`].
pub fn rotated_branch_jacobian(x: &[f64], alpha: f64) -> [f64; 4] {
    let (r, phi) = polar(x);
    let two_pi = 2.0 * std::f64::consts::PI;
    let theta_rel = (phi - alpha).rem_euclid(two_pi);
    let half = 0.5 * (alpha + theta_rel);
    let r2 = r * r;
    let (sh, ch) = half.sin_cos();
    let (st, ct) = phi.sin_cos();
    let du1_dx1 = r2 * (3.0 * ch * ct + 0.5 * sh * st);
    let du1_dx2 = r2 * (3.0 * ch * st - 0.5 * sh * ct);
    let du2_dx1 = r2 * (3.0 * sh * ct - 0.5 * ch * st);
    let du2_dx2 = r2 * (3.0 * sh * st + 0.5 * ch * ct);
    [du1_dx1, du2_dx1, du1_dx2, du2_dx2]
}

/// C^2 monotone ramp: 0 for t <= -1, 1 for t >= 1, quintic in between,
/// antisymmetric around (0, 1/2): ramp(-t) = 1 - ramp(t).
pub fn ramp(t: f64) -> f64 {
    if t <= -1.0 {
        0.0
    } else if t >= 1.0 {
        1.0
    } else {
        let u = 0.5 * (t + 1.0);
        u * u * u * (10.0 - 15.0 * u + 6.0 * u * u)
    }
}

/// Monotone C^2 bump used by the g construction: 0 for q <= 1/2, 1 for
/// q >= 1.
pub fn bump(q: f64) -> f64 {
    ramp(4.0 * (q - 0.75))
}

pub fn norm_sq_2(v: &[f64]) -> f64 {
    v[0] * v[0] + v[1] * v[1]
}

/// Blend weight between the two branches; 1 near the upper branch, 0 near
/// the lower one, 1/2 on the perpendicular locus. Defined as 1/2 at x = 0
/// (its value there never enters U or V, which vanish like |x|^3).
pub fn psi(x: &[f64], y: &[f64]) -> f64 {
    let x6 = norm_sq_2(x).powi(3);
    if x6 == 0.0 {
        return 0.5;
    }
    let u0 = branch(x, 0);
    ramp(10.0 * (y[0] * u0[0] + y[1] * u0[1]) / x6)
}

/// Membership in the wedge set: |<y, u0(x)>| > |x|^6 / 10.
pub fn in_delta(x: &[f64], y: &[f64]) -> bool {
    let x6 = norm_sq_2(x).powi(3);
    let u0 = branch(x, 0);
    (y[0] * u0[0] + y[1] * u0[1]).abs() > x6 / 10.0
}

/// Single-valued selection of the target: psi u0 + (1 - psi) u1
/// = (2 psi - 1) u0. On the wedge it equals whichever branch is closer to y.
pub fn blend_target(x: &[f64], y: &[f64]) -> [f64; 2] {
    let t = 2.0 * psi(x, y) - 1.0;
    let u0 = branch(x, 0);
    [t * u0[0], t * u0[1]]
}

/// Single-valued selection of the target Jacobian, same blend.
pub fn blend_jacobian(x: &[f64], y: &[f64]) -> [f64; 4] {
    let t = 2.0 * psi(x, y) - 1.0;
    let d = branch_jacobian(x, 0);
    [t * d[0], t * d[1], t * d[2], t * d[3]]
}

/// S(x, y) = min_i |y - u_i|^2 - |y - U(x,y)|^2; zero on the wedge,
/// nonnegative everywhere (the ramp is monotone).
pub fn s_gap(x: &[f64], y: &[f64]) -> f64 {
    let u0 = branch(x, 0);
    let u1 = [-u0[0], -u0[1]];
    let d0 = (y[0] - u0[0]).powi(2) + (y[1] - u0[1]).powi(2);
    let d1 = (y[0] - u1[0]).powi(2) + (y[1] - u1[1]).powi(2);
    let u = blend_target(x, y);
    let du = (y[0] - u[0]).powi(2) + (y[1] - u[1]).powi(2);
    d0.min(d1) - du
}

/// Confinement term: zero on the wedge, >= S off it, >= 0 everywhere, so
/// that |y - U|^2 + g dominates the distance to the nearest branch.
pub fn confine(x: &[f64], y: &[f64]) -> f64 {
    let x2 = norm_sq_2(x);
    let x6 = x2.powi(3);
    if x6 == 0.0 {
        return 0.0;
    }
    let u0 = branch(x, 0);
    let q = (10.0 * (y[0] * u0[0] + y[1] * u0[1]) / x6).abs();
    let beta = bump(q);
    let far = 2.0 * norm_sq_2(y) + 2.0 * x6;
    beta * s_gap(x, y) + (1.0 - beta) * far
}

/// The Lagrangian: |y - U|^2 + |z - V|^2 + g. Strictly convex in z with
/// z-Hessian identically 2 I, nonnegative, and zero exactly on the lifted
/// double graph inside the wedge.
pub fn lagrangian(x: &[f64], y: &[f64], z: &[f64]) -> f64 {
    let u = blend_target(x, y);
    let v = blend_jacobian(x, y);
    let mut total = (y[0] - u[0]).powi(2) + (y[1] - u[1]).powi(2);
    for i in 0..4 {
        let d = z[i] - v[i];
        total += d * d;
    }
    total + confine(x, y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use std::f64::consts::PI;

    #[test]
    fn branch_values_on_axis() {
        let u0 = branch(&[1.0, 0.0], 0);
        assert!((u0[0] - 1.0).abs() < 1e-15 && u0[1].abs() < 1e-15);
        let u1 = branch(&[1.0, 0.0], 1);
        assert!((u1[0] + 1.0).abs() < 1e-15 && u1[1].abs() < 1e-15);
    }

    #[test]
    fn branches_are_opposite_with_cubed_norm() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        for _ in 0..1000 {
            let x = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
            let u0 = branch(&x, 0);
            let u1 = branch(&x, 1);
            assert_eq!(u0[0], -u1[0]);
            assert_eq!(u0[1], -u1[1]);
            let n2 = norm_sq_2(&u0);
            let x6 = norm_sq_2(&x).powi(3);
            assert!((n2 - x6).abs() <= 1e-12 * x6.max(1e-30), "{n2} vs {x6}");
        }
    }

    #[test]
    fn jacobian_matches_finite_differences_off_axis() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        let h = 1e-6;
        for _ in 0..200 {
            // stay away from the positive x1-axis branch cut
            let r = rng.gen_range(0.3..0.9);
            let t = rng.gen_range(0.2..2.0 * PI - 0.2);
            let x = [r * t.cos(), r * t.sin()];
            let d = branch_jacobian(&x, 0);
            for l in 0..2 {
                let mut xp = x;
                xp[l] += h;
                let mut xm = x;
                xm[l] -= h;
                let up = branch(&xp, 0);
                let um = branch(&xm, 0);
                for c in 0..2 {
                    let fd = (up[c] - um[c]) / (2.0 * h);
                    assert!(
                        (fd - d[l * 2 + c]).abs() < 1e-5,
                        "l={l} c={c}: fd {fd} vs {}",
                        d[l * 2 + c]
                    );
                }
            }
        }
    }

    #[test]
    fn jacobian_on_axis_uses_upper_continuation() {
        let a: f64 = 0.7;
        let d = branch_jacobian(&[a, 0.0], 0);
        assert!((d[0] - 3.0 * a * a).abs() < 1e-14);
        assert!(d[1].abs() < 1e-14);
        assert!(d[2].abs() < 1e-14);
        assert!((d[3] - 0.5 * a * a).abs() < 1e-14);
    }

    #[test]
    fn psi_is_one_on_the_graph_and_antisymmetric() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..1000 {
            let x = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
            if norm_sq_2(&x) < 1e-8 {
                continue;
            }
            let u0 = branch(&x, 0);
            assert_eq!(psi(&x, &u0), 1.0);
            let y = [rng.gen_range(-1.5..1.5), rng.gen_range(-1.5..1.5)];
            let neg = [-y[0], -y[1]];
            let s = psi(&x, &y) + psi(&x, &neg);
            assert!((s - 1.0).abs() < 1e-12, "{s}");
        }
    }

    #[test]
    fn rotated_branch_flips_sign_after_full_turn() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        for _ in 0..200 {
            let x = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
            let alpha = rng.gen_range(0.0..4.0 * PI);
            let a = rotated_branch(&x, alpha);
            let b = rotated_branch(&x, alpha + 2.0 * PI);
            assert!((a[0] + b[0]).abs() < 1e-12);
            assert!((a[1] + b[1]).abs() < 1e-12);
        }
        // alpha = 0 reproduces the upper branch
        let x = [0.3, 0.4];
        let a = rotated_branch(&x, 0.0);
        let u0 = branch(&x, 0);
        assert!((a[0] - u0[0]).abs() < 1e-12 && (a[1] - u0[1]).abs() < 1e-12);
    }

    #[test]
    fn lagrangian_vanishes_on_the_lifted_graph() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..1000 {
            let r = rng.gen_range(0.05..0.999f64);
            let t = rng.gen_range(0.0..2.0 * PI);
            let x = [r * t.cos(), r * t.sin()];
            for k in 0..2 {
                let y = branch(&x, k);
                let z = branch_jacobian(&x, k);
                assert!(in_delta(&x, &y), "graph point outside wedge at r={r}");
                let val = lagrangian(&x, &y, &z);
                assert!(val.abs() < 1e-18, "L = {val} on the graph");
            }
        }
    }

    #[test]
    fn confinement_invariants_hold_on_a_grid() {
        // g >= 0, g = 0 on the wedge, g >= S off it, S >= 0
        let steps = 20;
        for ix in 0..steps {
            for iy in 0..steps {
                for jx in 0..steps {
                    for jy in 0..steps {
                        let x = [
                            -0.9 + 1.8 * ix as f64 / (steps - 1) as f64,
                            -0.9 + 1.8 * iy as f64 / (steps - 1) as f64,
                        ];
                        let y = [
                            -1.2 + 2.4 * jx as f64 / (steps - 1) as f64,
                            -1.2 + 2.4 * jy as f64 / (steps - 1) as f64,
                        ];
                        let s = s_gap(&x, &y);
                        let g = confine(&x, &y);
                        assert!(s >= -1e-12, "S = {s} at {x:?} {y:?}");
                        assert!(g >= -1e-12, "g = {g}");
                        assert!(g >= s - 1e-12, "g = {g} < S = {s}");
                        if in_delta(&x, &y) {
                            assert!(g.abs() <= 1e-12, "g = {g} inside the wedge");
                        }
                    }
                }
            }
        }
    }
}
