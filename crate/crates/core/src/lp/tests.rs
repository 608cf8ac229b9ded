use super::*;

fn lp_min(objective: Vec<f64>) -> LinearProgram {
    let n = objective.len();
    let mut lp = LinearProgram::new(n);
    lp.objective = objective;
    lp
}

#[test]
fn trivial_nonnegative_min() {
    // min x s.t. x >= 0
    let lp = lp_min(vec![1.0]);
    let sol = solve(&lp).unwrap();
    assert_eq!(sol.status, LpStatus::Optimal);
    assert!(sol.objective.abs() < 1e-12);
}

#[test]
fn simplex_vertex() {
    // min -x - y s.t. x + y <= 1 -> -1 at a vertex
    let mut lp = lp_min(vec![-1.0, -1.0]);
    lp.add_row(Relation::Le, 1.0, vec![(0, 1.0), (1, 1.0)]);
    let sol = solve(&lp).unwrap();
    assert_eq!(sol.status, LpStatus::Optimal);
    assert!((sol.objective + 1.0).abs() < 1e-9);
    let report = verify(&lp, &sol);
    assert!(report.pass, "{report:?}");
}

#[test]
fn three_atom_equality_instance() {
    // min a1 + 2 a2  s.t.  a0+a1+a2 = 1,  a1 + a2/2 = 1/2,  a >= 0
    let mut lp = lp_min(vec![0.0, 1.0, 2.0]);
    lp.add_row(Relation::Eq, 1.0, vec![(0, 1.0), (1, 1.0), (2, 1.0)]);
    lp.add_row(Relation::Eq, 0.5, vec![(1, 1.0), (2, 0.5)]);
    let sol = solve(&lp).unwrap();
    assert_eq!(sol.status, LpStatus::Optimal);
    assert!((sol.objective - 0.5).abs() < 1e-9, "{}", sol.objective);
    assert!(verify(&lp, &sol).pass);
}

#[test]
fn infeasible_detected() {
    let mut lp = lp_min(vec![1.0]);
    lp.add_row(Relation::Eq, -1.0, vec![(0, 1.0)]);
    let sol = solve(&lp).unwrap();
    assert_eq!(sol.status, LpStatus::Infeasible);
}

#[test]
fn unbounded_detected() {
    let mut lp = lp_min(vec![-1.0]);
    lp.add_row(Relation::Ge, 0.0, vec![(0, 1.0)]);
    let sol = solve(&lp).unwrap();
    assert_eq!(sol.status, LpStatus::Unbounded);
}

#[test]
fn upper_bounds_respected() {
    // min -x with x <= 3.5
    let mut lp = lp_min(vec![-1.0]);
    lp.upper[0] = Some(3.5);
    let sol = solve(&lp).unwrap();
    assert_eq!(sol.status, LpStatus::Optimal);
    assert!((sol.objective + 3.5).abs() < 1e-9);
    assert!(verify(&lp, &sol).pass);
}

#[test]
fn shifted_lower_bounds() {
    // min x with x >= -2
    let mut lp = lp_min(vec![1.0]);
    lp.lower[0] = -2.0;
    let sol = solve(&lp).unwrap();
    assert!((sol.objective + 2.0).abs() < 1e-9);
}

#[test]
fn perturbed_primal_flagged() {
    let mut lp = lp_min(vec![-1.0, -1.0]);
    lp.add_row(Relation::Le, 1.0, vec![(0, 1.0), (1, 1.0)]);
    let sol = solve(&lp).unwrap();
    let mut bad = sol.clone();
    bad.primal[0] += 1.0;
    let report = verify(&lp, &bad);
    assert!(report.primal_residual > 0.5);
    assert!(!report.pass);
}

#[test]
fn sign_flipped_dual_flagged() {
    let mut lp = lp_min(vec![-1.0, -1.0]);
    lp.add_row(Relation::Le, 1.0, vec![(0, 1.0), (1, 1.0)]);
    let sol = solve(&lp).unwrap();
    let mut bad = sol.clone();
    for d in bad.dual.iter_mut() {
        *d = -*d;
    }
    let report = verify(&lp, &bad);
    assert!(report.dual_residual > 1e-3, "{report:?}");
    assert!(!report.pass);
}

/// Brute-force oracle: every vertex of the feasible region activates some
/// n independent constraints out of the pool {rows as equalities, variable
/// bounds}. Enumerate all n-subsets of the pool, solve the n x n system,
/// keep feasible points, take the best objective. Complete for bounded LPs
/// with <= 8 variables / <= 8 rows.
pub fn enumerate_optimum(lp: &LinearProgram) -> Option<f64> {
    let n = lp.num_vars;
    // constraint pool as (normal, offset): a.x = b when active
    let mut pool: Vec<(Vec<f64>, f64)> = Vec::new();
    for row in &lp.rows {
        let mut a = vec![0.0; n];
        for (j, v) in &row.coeffs {
            a[*j] += v;
        }
        pool.push((a, row.rhs));
    }
    for j in 0..n {
        let mut a = vec![0.0; n];
        a[j] = 1.0;
        pool.push((a.clone(), lp.lower[j]));
        if let Some(u) = lp.upper[j] {
            pool.push((a, u));
        }
    }
    if pool.len() < n {
        return None;
    }
    let mut best: Option<f64> = None;
    let mut subset: Vec<usize> = (0..n).collect();
    loop {
        let mut a = vec![0.0; n * n];
        let mut b = vec![0.0; n];
        for (slot, &p) in subset.iter().enumerate() {
            a[slot * n..slot * n + n].copy_from_slice(&pool[p].0);
            b[slot] = pool[p].1;
        }
        if let Some(x) = dense_solve(&mut a, &mut b, n) {
            if feasible(lp, &x) {
                let obj: f64 = (0..n).map(|j| lp.objective[j] * x[j]).sum();
                best = Some(best.map_or(obj, |cur: f64| cur.min(obj)));
            }
        }
        // next lexicographic subset
        let total = pool.len();
        let mut i = n;
        loop {
            if i == 0 {
                return best;
            }
            i -= 1;
            if subset[i] != i + total - n {
                subset[i] += 1;
                for k in i + 1..n {
                    subset[k] = subset[k - 1] + 1;
                }
                break;
            }
        }
    }
}

fn feasible(lp: &LinearProgram, x: &[f64]) -> bool {
    let tol = 1e-8;
    for row in &lp.rows {
        let ax: f64 = row.coeffs.iter().map(|(j, v)| v * x[*j]).sum();
        let ok = match row.relation {
            Relation::Eq => (ax - row.rhs).abs() <= tol,
            Relation::Le => ax <= row.rhs + tol,
            Relation::Ge => ax >= row.rhs - tol,
        };
        if !ok {
            return false;
        }
    }
    for j in 0..lp.num_vars {
        if x[j] < lp.lower[j] - tol {
            return false;
        }
        if let Some(u) = lp.upper[j] {
            if x[j] > u + tol {
                return false;
            }
        }
    }
    true
}

/// Nonsingular n x n solve by Gaussian elimination; None when singular.
fn dense_solve(a: &mut [f64], b: &mut [f64], m: usize) -> Option<Vec<f64>> {
    for k in 0..m {
        let mut p = k;
        for i in k + 1..m {
            if a[i * m + k].abs() > a[p * m + k].abs() {
                p = i;
            }
        }
        if a[p * m + k].abs() < 1e-10 {
            return None;
        }
        if p != k {
            for j in 0..m {
                a.swap(k * m + j, p * m + j);
            }
            b.swap(k, p);
        }
        let piv = a[k * m + k];
        for i in k + 1..m {
            let f = a[i * m + k] / piv;
            if f != 0.0 {
                for j in k..m {
                    a[i * m + j] -= f * a[k * m + j];
                }
                b[i] -= f * b[k];
            }
        }
    }
    let mut x = vec![0.0; m];
    for i in (0..m).rev() {
        let mut s = b[i];
        for j in i + 1..m {
            s -= a[i * m + j] * x[j];
        }
        x[i] = s / a[i * m + i];
    }
    Some(x)
}

/// Deterministic random LP generator shared with the acceptance suite.
/// Instances are feasible by construction (a nonnegative point satisfies all
/// rows) and bounded (every variable is capped by a box row).
pub fn random_lp(seed: u64, max_vars: usize, max_rows: usize) -> LinearProgram {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(1..=max_vars);
    let extra_rows = rng.gen_range(0..=max_rows.saturating_sub(1));
    let mut lp = LinearProgram::new(n);
    for c in lp.objective.iter_mut() {
        *c = rng.gen_range(-3.0..3.0);
        *c = (*c * 8.0).round() / 8.0;
    }
    // witness point with small nonnegative coordinates
    let witness: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..1.5)).collect();
    for _ in 0..extra_rows {
        let nnz = rng.gen_range(1..=n);
        let mut coeffs = Vec::new();
        let mut idx: Vec<usize> = (0..n).collect();
        for k in 0..nnz {
            let pick = rng.gen_range(0..idx.len());
            let j = idx.swap_remove(pick);
            let v = (rng.gen_range(-2.0..2.0f64) * 4.0).round() / 4.0;
            if v != 0.0 {
                coeffs.push((j, v));
            }
            let _ = k;
        }
        if coeffs.is_empty() {
            continue;
        }
        coeffs.sort_by_key(|(j, _)| *j);
        let ax: f64 = coeffs.iter().map(|(j, v)| v * witness[*j]).sum();
        match rng.gen_range(0..3) {
            0 => lp.add_row(Relation::Le, ax + rng.gen_range(0.0..1.0), coeffs),
            1 => lp.add_row(Relation::Ge, ax - rng.gen_range(0.0..1.0), coeffs),
            _ => lp.add_row(Relation::Eq, ax, coeffs),
        }
    }
    // boundedness: sum of all vars capped
    let cap: f64 = witness.iter().sum::<f64>() + rng.gen_range(1.0..4.0);
    lp.add_row(
        Relation::Le,
        cap,
        (0..n).map(|j| (j, 1.0)).collect(),
    );
    lp
}

#[test]
fn agrees_with_vertex_enumeration_on_small_corpus() {
    let mut checked = 0;
    for seed in 0..60u64 {
        let lp = random_lp(seed, 6, 6);
        let sol = solve(&lp).unwrap();
        let oracle = enumerate_optimum(&lp);
        match (sol.status, oracle) {
            (LpStatus::Optimal, Some(best)) => {
                assert!(
                    (sol.objective - best).abs() <= 1e-9 * (1.0 + best.abs()),
                    "seed {seed}: simplex {} vs oracle {best}",
                    sol.objective
                );
                assert!(verify(&lp, &sol).pass, "seed {seed} certificates");
                checked += 1;
            }
            (LpStatus::Optimal, None) => panic!("seed {seed}: oracle found nothing"),
            (other, _) => panic!("seed {seed}: unexpected status {other:?}"),
        }
    }
    assert!(checked >= 50);
}

#[test]
fn weak_duality_on_solved_instances() {
    for seed in 100..140u64 {
        let lp = random_lp(seed, 6, 6);
        let sol = solve(&lp).unwrap();
        if sol.status != LpStatus::Optimal {
            continue;
        }
        let report = verify(&lp, &sol);
        let scale = lp.certificate_scale();
        assert!(
            report.duality_gap >= -1e-7 * scale,
            "seed {seed}: gap {}",
            report.duality_gap
        );
        assert!(report.duality_gap <= 1e-7 * scale + 1e-9 + report.comp_slackness * 10.0);
    }
}

#[test]
fn deterministic_pivot_sequences() {
    for seed in [7u64, 21, 33] {
        let lp = random_lp(seed, 8, 8);
        let a = solve(&lp).unwrap();
        let b = solve(&lp).unwrap();
        assert_eq!(a.iterations, b.iterations);
        assert_eq!(a.objective.to_bits(), b.objective.to_bits());
        for (x, y) in a.primal.iter().zip(&b.primal) {
            assert_eq!(x.to_bits(), y.to_bits());
        }
        for (x, y) in a.dual.iter().zip(&b.dual) {
            assert_eq!(x.to_bits(), y.to_bits());
        }
    }
}

#[test]
fn degenerate_cycle_guard() {
    // classic Beale cycling example; Bland fallback must terminate it
    let mut lp = lp_min(vec![-0.75, 150.0, -0.02, 6.0]);
    lp.add_row(
        Relation::Le,
        0.0,
        vec![(0, 0.25), (1, -60.0), (2, -1.0 / 25.0), (3, 9.0)],
    );
    lp.add_row(
        Relation::Le,
        0.0,
        vec![(0, 0.5), (1, -90.0), (2, -1.0 / 50.0), (3, 3.0)],
    );
    lp.add_row(Relation::Le, 1.0, vec![(2, 1.0)]);
    let sol = solve(&lp).unwrap();
    assert_eq!(sol.status, LpStatus::Optimal);
    assert!((sol.objective + 0.05).abs() < 1e-9, "{}", sol.objective);
}
