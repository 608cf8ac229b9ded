//! Two-phase revised simplex over a dense LU of the basis.

use super::lu::{factorize, LuFactors};
use super::{verify, LinearProgram, LpError, LpSolution, LpStatus, Relation};
use super::{CertificateReport, Certificates};

#[derive(Debug, Clone)]
pub struct SolveOptions {
    pub max_iterations: usize,
    /// Consecutive degenerate pivots tolerated before switching to Bland's
    /// rule (lowest eligible index for both entering and leaving variable).
    pub bland_trigger: usize,
    /// Columns of a known feasible point, used as a crash basis. A feasible
    /// start reduces phase 1 to expelling zero-valued artificials, which
    /// matters on the heavily degenerate zero-rhs systems the relaxation
    /// assembles (a cold artificial start can wander their phase-1 vertex
    /// graph for a very long time).
    pub crash: Vec<usize>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            max_iterations: 200_000,
            bland_trigger: 30,
            crash: Vec::new(),
        }
    }
}

struct Standardized {
    m: usize,
    ncols: usize,
    n_orig: usize,
    cols: Vec<Vec<(u32, f64)>>,
    rhs: Vec<f64>,
    cost2: Vec<f64>,
    art_start: usize,
    /// sign flip applied to original row i during rhs normalization
    negated: Vec<bool>,
    /// number of rows coming from the original problem (bound rows follow)
    n_orig_rows: usize,
    /// positive unit column (slack or artificial) per row, u32::MAX if none
    unit_of_row: Vec<u32>,
}

fn standardize(lp: &LinearProgram) -> Standardized {
    let n = lp.num_vars;
    // shifted rows: rhs' = rhs - A l ; bound rows x^ <= u - l
    struct R {
        coeffs: Vec<(usize, f64)>,
        rel: Relation,
        rhs: f64,
        negated: bool,
    }
    let mut rows: Vec<R> = Vec::with_capacity(lp.rows.len());
    for row in &lp.rows {
        let shift: f64 = row.coeffs.iter().map(|(j, v)| v * lp.lower[*j]).sum();
        let mut coeffs = row.coeffs.clone();
        let mut rhs = row.rhs - shift;
        let mut rel = row.relation;
        let mut negated = false;
        if rhs < 0.0 {
            rhs = -rhs;
            for c in coeffs.iter_mut() {
                c.1 = -c.1;
            }
            rel = match rel {
                Relation::Eq => Relation::Eq,
                Relation::Le => Relation::Ge,
                Relation::Ge => Relation::Le,
            };
            negated = true;
        }
        rows.push(R {
            coeffs,
            rel,
            rhs,
            negated,
        });
    }
    let n_orig_rows = rows.len();
    for j in 0..n {
        if let Some(u) = lp.upper[j] {
            rows.push(R {
                coeffs: vec![(j, 1.0)],
                rel: Relation::Le,
                rhs: u - lp.lower[j],
                negated: false,
            });
        }
    }
    let m = rows.len();

    let mut cols: Vec<Vec<(u32, f64)>> = vec![Vec::new(); n];
    for (i, row) in rows.iter().enumerate() {
        for (j, v) in &row.coeffs {
            if *v != 0.0 {
                cols[*j].push((i as u32, *v));
            }
        }
    }
    // slack / surplus columns
    for (i, row) in rows.iter().enumerate() {
        match row.rel {
            Relation::Le => cols.push(vec![(i as u32, 1.0)]),
            Relation::Ge => cols.push(vec![(i as u32, -1.0)]),
            Relation::Eq => {}
        }
    }
    let art_start = cols.len();
    for (i, row) in rows.iter().enumerate() {
        match row.rel {
            Relation::Eq | Relation::Ge => cols.push(vec![(i as u32, 1.0)]),
            Relation::Le => {}
        }
    }
    let ncols = cols.len();
    let mut cost2 = vec![0.0; ncols];
    cost2[..n].copy_from_slice(&lp.objective);
    let mut unit_of_row = vec![u32::MAX; m];
    for j in n..ncols {
        if cols[j].len() == 1 {
            let (i, v) = cols[j][0];
            if v > 0.0 && unit_of_row[i as usize] == u32::MAX {
                unit_of_row[i as usize] = j as u32;
            }
        }
    }

    Standardized {
        m,
        ncols,
        n_orig: n,
        cols,
        rhs: rows.iter().map(|r| r.rhs).collect(),
        cost2,
        art_start,
        negated: rows.iter().map(|r| r.negated).collect(),
        n_orig_rows,
        unit_of_row,
    }
}

struct Eta {
    r: usize,
    w: Vec<f64>,
}

struct Basis<'a> {
    std: &'a Standardized,
    basic: Vec<u32>,
    var_slot: Vec<i32>,
    factors: Option<LuFactors>,
    etas: Vec<Eta>,
    x_b: Vec<f64>,
    refactor_interval: usize,
    refactorizations: usize,
}

impl<'a> Basis<'a> {
    fn new(std: &'a Standardized, basic: Vec<u32>) -> Result<Self, LpError> {
        let mut var_slot = vec![-1i32; std.ncols];
        for (slot, j) in basic.iter().enumerate() {
            var_slot[*j as usize] = slot as i32;
        }
        // dense refactorization is O(m^3); stretch the eta chain on larger
        // bases so factor time stays a small share of the solve
        let refactor_interval = 50usize.max(std.m / 4);
        let mut basis = Basis {
            std,
            basic,
            var_slot,
            factors: None,
            etas: Vec::new(),
            x_b: vec![0.0; std.m],
            refactor_interval,
            refactorizations: 0,
        };
        basis.refactorize()?;
        Ok(basis)
    }

    fn refactorize(&mut self) -> Result<(), LpError> {
        let m = self.std.m;
        if m == 0 {
            self.factors = None;
            self.etas.clear();
            self.x_b.clear();
            return Ok(());
        }
        // LU with basis repair: when a column of the basis turns out
        // (numerically) dependent, evict it for the slack/artificial unit
        // column of a still-unpivoted row. Dependent columns only ever carry
        // a zero value, so the repair does not move the current point.
        let mut repairs = 0usize;
        let factors = loop {
            let mut dense = vec![0.0; m * m];
            for (slot, j) in self.basic.iter().enumerate() {
                for (i, v) in &self.std.cols[*j as usize] {
                    dense[(*i as usize) * m + slot] = *v;
                }
            }
            match factorize(dense, m) {
                Ok(f) => break f,
                Err(sing) => {
                    repairs += 1;
                    if repairs > m {
                        return Err(LpError::NumericalBreakdown {
                            pivot: sing.col,
                            detail: format!(
                                "singular basis while refactorizing (column {})",
                                sing.col
                            ),
                        });
                    }
                    let slot = sing.col;
                    let displaced = self.basic[slot] as usize;
                    let replacement = sing
                        .unpivoted_rows
                        .iter()
                        .filter_map(|r| {
                            let j = self.std.unit_of_row[*r as usize];
                            (j != u32::MAX && self.var_slot[j as usize] < 0).then_some(j)
                        })
                        .min();
                    let Some(j) = replacement else {
                        return Err(LpError::NumericalBreakdown {
                            pivot: sing.col,
                            detail: "no unit column available for basis repair".into(),
                        });
                    };
                    self.var_slot[displaced] = -1;
                    self.var_slot[j as usize] = slot as i32;
                    self.basic[slot] = j;
                }
            }
        };
        self.factors = Some(factors);
        self.etas.clear();
        self.refactorizations += 1;
        let mut xb = self.std.rhs.clone();
        self.ftran(&mut xb);
        self.x_b = xb;
        Ok(())
    }

    fn ftran(&self, x: &mut [f64]) {
        if let Some(f) = &self.factors {
            f.ftran(x);
        }
        for eta in &self.etas {
            let t = x[eta.r] / eta.w[eta.r];
            if t != 0.0 {
                for (xi, wi) in x.iter_mut().zip(&eta.w) {
                    *xi -= wi * t;
                }
                x[eta.r] = t;
            } else {
                x[eta.r] = 0.0;
            }
        }
    }

    fn btran(&self, y: &mut [f64]) {
        for eta in self.etas.iter().rev() {
            let mut s = 0.0;
            for (wi, yi) in eta.w.iter().zip(y.iter()) {
                s += wi * yi;
            }
            y[eta.r] -= (s - y[eta.r]) / eta.w[eta.r];
        }
        if let Some(f) = &self.factors {
            f.btran(y);
        }
    }

    fn column(&self, j: usize) -> Vec<f64> {
        let mut w = vec![0.0; self.std.m];
        for (i, v) in &self.std.cols[j] {
            w[*i as usize] = *v;
        }
        self.ftran(&mut w);
        w
    }

    fn pivot(&mut self, entering: usize, slot: usize, w: Vec<f64>, theta: f64) {
        debug_assert!(self.var_slot[entering] < 0);
        debug_assert_eq!(self.var_slot[self.basic[slot] as usize], slot as i32);
        for (xi, wi) in self.x_b.iter_mut().zip(&w) {
            *xi -= theta * wi;
        }
        self.x_b[slot] = theta;
        let leaving = self.basic[slot] as usize;
        self.var_slot[leaving] = -1;
        self.var_slot[entering] = slot as i32;
        self.basic[slot] = entering as u32;
        self.etas.push(Eta { r: slot, w });
    }

    fn needs_refactor(&self) -> bool {
        self.etas.len() >= self.refactor_interval
    }
}

/// Deterministic entering-variable choice. In Dantzig mode the most negative
/// reduced cost wins with ties to the lowest index; in Bland mode the lowest
/// eligible index wins outright.
fn price(
    std: &Standardized,
    cost: &[f64],
    banned_from: usize,
    var_slot: &[i32],
    y: &[f64],
    d_tol: f64,
    bland: bool,
) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for j in 0..std.ncols.min(banned_from) {
        if var_slot[j] >= 0 {
            continue;
        }
        let mut d = cost[j];
        for (i, v) in &std.cols[j] {
            d -= v * y[*i as usize];
        }
        if d < -d_tol {
            if bland {
                return Some(j);
            }
            match best {
                Some((_, bd)) if bd <= d => {}
                _ => best = Some((j, d)),
            }
        }
    }
    best.map(|(j, _)| j)
}

enum RatioOutcome {
    Pivot { slot: usize, theta: f64 },
    Unbounded,
}

/// Two-pass ratio test. Rows holding a zero-valued artificial with a nonzero
/// pivot element are forced out first (ratio zero), which expels artificials
/// left over from phase 1 without a separate drive-out pass. The second pass
/// picks, among rows whose ratio ties the minimum, the largest pivot
/// magnitude; in Bland mode it picks the lowest basic-variable index with a
/// sharp tie window so the anti-cycling argument stays intact.
fn ratio_test(
    basis: &Basis,
    w: &[f64],
    feas_tol: f64,
    pivot_tol: f64,
    bland: bool,
) -> RatioOutcome {
    let std = basis.std;
    let ratio_of = |i: usize| -> Option<f64> {
        let is_art = (basis.basic[i] as usize) >= std.art_start;
        let wi = w[i];
        if is_art && basis.x_b[i] <= feas_tol && wi.abs() > pivot_tol {
            Some(0.0)
        } else if wi > pivot_tol {
            Some(basis.x_b[i].max(0.0) / wi)
        } else {
            None
        }
    };
    let mut theta_min = f64::INFINITY;
    for i in 0..std.m {
        if let Some(r) = ratio_of(i) {
            theta_min = theta_min.min(r);
        }
    }
    if !theta_min.is_finite() {
        return RatioOutcome::Unbounded;
    }
    // a leaving variable whose ratio exceeds theta_min by up to `tie` is cut
    // off at theta_min, leaving residual infeasibility of order tie * |w|;
    // keep that far below the certificate tolerance
    let tie = if bland {
        1e-12 * (1.0 + theta_min)
    } else {
        1e-9 * (1.0 + theta_min)
    };
    // among tied rows, expel an artificial first: each expulsion is strict
    // progress (they never re-enter), which also keeps the Bland segments
    // between expulsions textbook-pure
    let mut best_slot = usize::MAX;
    let mut best_mag = -1.0f64;
    let mut best_var = u32::MAX;
    let mut best_art = false;
    for i in 0..std.m {
        let Some(r) = ratio_of(i) else { continue };
        if r > theta_min + tie {
            continue;
        }
        let mag = w[i].abs();
        let var = basis.basic[i];
        let is_art = (var as usize) >= std.art_start;
        let better = if is_art != best_art {
            is_art
        } else if bland {
            var < best_var
        } else {
            mag > best_mag || (mag == best_mag && var < best_var)
        };
        if better {
            best_slot = i;
            best_mag = mag;
            best_var = var;
            best_art = is_art;
        }
    }
    RatioOutcome::Pivot {
        slot: best_slot,
        theta: theta_min.max(0.0),
    }
}

pub fn solve(lp: &LinearProgram) -> Result<LpSolution, LpError> {
    solve_with(lp, &SolveOptions::default())
}

/// Build a starting basis around the given structural columns: a dense
/// echelon pass selects an independent subset and its pivot rows, the
/// remaining rows keep their slack or artificial. Returns None (caller falls
/// back to the all-artificial start) if the resulting basic point is not
/// nonnegative.
fn build_crash_basis(std: &Standardized, crash: &[usize], feas_tol: f64) -> Option<Vec<u32>> {
    let m = std.m;
    if m == 0 {
        return None;
    }
    let k = crash.len();
    let mut mat = vec![0.0f64; m * k];
    for (c, &j) in crash.iter().enumerate() {
        if j >= std.n_orig {
            return None;
        }
        for (i, v) in &std.cols[j] {
            mat[(*i as usize) * k + c] = *v;
        }
    }
    let mut row_of_col: Vec<Option<usize>> = vec![None; k];
    let mut row_used = vec![false; m];
    for c in 0..k {
        // pick the largest remaining entry in column c
        let mut p = usize::MAX;
        let mut best = 1e-8;
        for i in 0..m {
            if !row_used[i] && mat[i * k + c].abs() > best {
                best = mat[i * k + c].abs();
                p = i;
            }
        }
        if p == usize::MAX {
            continue;
        }
        row_of_col[c] = Some(p);
        row_used[p] = true;
        // eliminate row p from the remaining columns
        let piv = mat[p * k + c];
        for c2 in c + 1..k {
            let f = mat[p * k + c2] / piv;
            if f != 0.0 {
                for i in 0..m {
                    if !row_used[i] || i == p {
                        mat[i * k + c2] -= f * mat[i * k + c];
                    }
                }
                mat[p * k + c2] = 0.0;
            }
        }
    }
    // complete with the slack/artificial unit column of each uncovered row
    let unit_of_row = &std.unit_of_row;
    let mut basic = vec![u32::MAX; m];
    for (c, row) in row_of_col.iter().enumerate() {
        if let Some(r) = row {
            basic[*r] = crash[c] as u32;
        }
    }
    for i in 0..m {
        if basic[i] == u32::MAX {
            if unit_of_row[i] == u32::MAX {
                return None;
            }
            basic[i] = unit_of_row[i];
        }
    }
    // validate: factorize and check the basic point is nonnegative
    let mut dense = vec![0.0; m * m];
    for (slot, j) in basic.iter().enumerate() {
        for (i, v) in &std.cols[*j as usize] {
            dense[(*i as usize) * m + slot] = *v;
        }
    }
    let factors = factorize(dense, m).ok()?;
    let mut x = std.rhs.clone();
    factors.ftran(&mut x);
    if x.iter().any(|v| *v < -feas_tol) {
        return None;
    }
    Some(basic)
}

#[allow(clippy::too_many_arguments)]
fn run_phases(
    std: &Standardized,
    basis: &mut Basis,
    cost1: &[f64],
    opts: &SolveOptions,
    feas_tol: f64,
    b_scale: f64,
    pivot_tol: f64,
    force_bland: bool,
    iterations: &mut usize,
) -> Result<LpStatus, LpError> {
    let m = std.m;
    for phase in [1usize, 2usize] {
        // artificial columns only ever serve as the initial basis; once one
        // leaves it must not re-enter, or zero-step expulsion pivots cycle it
        // forever against the phase-1 objective
        let banned_from = std.art_start;
        let cost: &[f64] = if phase == 1 { cost1 } else { &std.cost2 };
        let c_scale = cost.iter().fold(0.0f64, |a, c| a.max(c.abs()));
        let d_tol = 1e-8 * (1.0 + c_scale);
        // reduced costs within this band of zero are indistinguishable from
        // factorization noise on degenerate faces; stalling inside the band
        // is optimality at certificate precision
        let noise_band = 0.99e-7 * (1.0 + c_scale);
        let stall_limit = 4 * m + 400;
        let mut bland = force_bland;
        let mut degenerate_streak = 0usize;
        let mut best_obj = f64::INFINITY;
        let mut stall = 0usize;

        loop {
            if *iterations >= opts.max_iterations {
                return Err(LpError::IterationLimit {
                    limit: opts.max_iterations,
                });
            }
            if stall >= stall_limit {
                basis.refactorize()?;
                let mut y = vec![0.0; m];
                for (slot, j) in basis.basic.iter().enumerate() {
                    y[slot] = cost[*j as usize];
                }
                basis.btran(&mut y);
                let mut d_min = 0.0f64;
                for j in 0..banned_from {
                    if basis.var_slot[j] >= 0 {
                        continue;
                    }
                    let mut d = cost[j];
                    for (i, v) in &std.cols[j] {
                        d -= v * y[*i as usize];
                    }
                    d_min = d_min.min(d);
                }
                eprintln!("STALL ph {phase} it {} d_min {d_min:.6e} band {noise_band:.3e}", *iterations);
                if d_min >= -noise_band {
                    break; // optimal to within certificate precision
                }
                stall = 0;
            }
            if basis.needs_refactor() {
                basis.refactorize()?;
            }
            // y = B^-T c_B
            let mut y = vec![0.0; m];
            for (slot, j) in basis.basic.iter().enumerate() {
                y[slot] = cost[*j as usize];
            }
            basis.btran(&mut y);
            let entering = match price(std, cost, banned_from, &basis.var_slot, &y, d_tol, bland)
            {
                Some(j) => j,
                None => break,
            };
            let w = basis.column(entering);
            match ratio_test(basis, &w, feas_tol, pivot_tol, bland) {
                RatioOutcome::Unbounded => {
                    if phase == 1 {
                        // phase-1 objective is bounded below by zero; an
                        // unbounded ray signals numerical trouble
                        return Err(LpError::NumericalBreakdown {
                            pivot: *iterations,
                            detail: "unbounded phase-1 subproblem".into(),
                        });
                    }
                    return Ok(LpStatus::Unbounded);
                }
                RatioOutcome::Pivot { slot, theta } => {
                    // relatively tiny pivots poison the eta chain; recompute
                    // the direction against a fresh factorization first
                    let w_max = w.iter().fold(0.0f64, |a, v| a.max(v.abs()));
                    let low_quality = w[slot].abs() < 1e-5 * w_max;
                    if w[slot].abs() <= pivot_tol || low_quality {
                        if !basis.etas.is_empty() {
                            basis.refactorize()?;
                            continue;
                        }
                        if w[slot].abs() <= pivot_tol {
                            return Err(LpError::NumericalBreakdown {
                                pivot: *iterations,
                                detail: format!(
                                    "pivot element {:.3e} below tolerance",
                                    w[slot]
                                ),
                            });
                        }
                    }
                    if theta <= feas_tol {
                        degenerate_streak += 1;
                        if degenerate_streak >= opts.bland_trigger {
                            bland = true;
                        }
                    } else {
                        degenerate_streak = 0;
                        bland = force_bland;
                    }
                    basis.pivot(entering, slot, w, theta);
                    *iterations += 1;
                    let obj: f64 = basis
                        .basic
                        .iter()
                        .zip(&basis.x_b)
                        .map(|(j, x)| cost[*j as usize] * x)
                        .sum();
                    if obj < best_obj - 1e-12 * (1.0 + best_obj.abs()) {
                        best_obj = obj;
                        stall = 0;
                    } else {
                        stall += 1;
                    }
                    if low_quality {
                        // a mandatory weak pivot went in; keep the chain short
                        basis.refactorize()?;
                    }
                }
            }
        }

        if phase == 1 {
            let infeas: f64 = basis
                .basic
                .iter()
                .zip(&basis.x_b)
                .filter(|(j, _)| (**j as usize) >= std.art_start)
                .map(|(_, x)| x.max(0.0))
                .sum();
            if infeas > feas_tol.max(1e-8 * (1.0 + b_scale)) {
                return Ok(LpStatus::Infeasible);
            }
            drive_out_artificials(std, basis)?;
        }
    }
    Ok(LpStatus::Optimal)
}

/// Swap zero-valued basic artificials for nonbasic structural columns while
/// good pivot elements are available. Artificials on (near-)dependent rows
/// stay basic at zero; exactly-zero rows make them permanently inert, so
/// phase 2 never touches them.
fn drive_out_artificials(std: &Standardized, basis: &mut Basis) -> Result<(), LpError> {
    let m = std.m;
    for slot in 0..m {
        if (basis.basic[slot] as usize) < std.art_start {
            continue;
        }
        if basis.needs_refactor() {
            basis.refactorize()?;
        }
        let mut unit = vec![0.0; m];
        unit[slot] = 1.0;
        basis.btran(&mut unit);
        let mut best_j = usize::MAX;
        let mut best_mag = 1e-6;
        for j in 0..std.art_start {
            if basis.var_slot[j] >= 0 {
                continue;
            }
            let mut v = 0.0;
            for (i, a) in &std.cols[j] {
                v += a * unit[*i as usize];
            }
            if v.abs() > best_mag {
                best_mag = v.abs();
                best_j = j;
            }
        }
        if best_j == usize::MAX {
            continue;
        }
        let w = basis.column(best_j);
        if w[slot].abs() < 1e-7 {
            continue;
        }
        basis.pivot(best_j, slot, w, 0.0);
    }
    Ok(())
}

pub fn solve_with(lp: &LinearProgram, opts: &SolveOptions) -> Result<LpSolution, LpError> {
    lp.validate()?;
    let std = standardize(lp);
    let m = std.m;

    let b_scale = std.rhs.iter().fold(0.0f64, |a, b| a.max(b.abs()));
    let feas_tol = 1e-9 * (1.0 + b_scale);
    // pivots below this are never accepted; small pivots poison the eta
    // chain long before they trip the refactorization singularity check
    let pivot_tol = 1e-6;

    // initial basis: slack for <= rows, artificial for = and >= rows
    let mut basic = vec![u32::MAX; m];
    {
        let mut row_slack: Vec<Option<usize>> = vec![None; m];
        for j in std.n_orig..std.art_start {
            let (i, v) = std.cols[j][0];
            if v > 0.0 {
                row_slack[i as usize] = Some(j);
            }
        }
        let mut row_art: Vec<Option<usize>> = vec![None; m];
        for j in std.art_start..std.ncols {
            let (i, _) = std.cols[j][0];
            row_art[i as usize] = Some(j);
        }
        for i in 0..m {
            basic[i] = match (row_art[i], row_slack[i]) {
                (Some(a), _) => a as u32,
                (None, Some(s)) => s as u32,
                (None, None) => unreachable!("every row has a slack or an artificial"),
            };
        }
    }

    let cost1: Vec<f64> = (0..std.ncols)
        .map(|j| if j >= std.art_start { 1.0 } else { 0.0 })
        .collect();

    let artificial_basic = basic.clone();
    if !opts.crash.is_empty() {
        if let Some(crash_basic) = build_crash_basis(&std, &opts.crash, feas_tol) {
            basic = crash_basic;
        }
    }

    // a singular refactorization means the eta chain let the basis decay;
    // retry once from scratch with Bland's conservative pivoting before
    // giving up
    let mut basis = Basis::new(&std, basic.clone())?;
    let mut iterations = 0usize;
    let mut status;
    let mut force_bland = false;
    loop {
        match run_phases(
            &std,
            &mut basis,
            &cost1,
            opts,
            feas_tol,
            b_scale,
            pivot_tol,
            force_bland,
            &mut iterations,
        ) {
            Ok(s) => {
                status = s;
                break;
            }
            Err(LpError::NumericalBreakdown { pivot, detail }) if !force_bland => {
                let _ = (pivot, detail);
                force_bland = true;
                basis = Basis::new(&std, artificial_basic.clone())?;
            }
            Err(e) => return Err(e),
        }
    }

    // extract primal in original variables
    let mut primal = lp.lower.clone();
    if status != LpStatus::Infeasible {
        for (slot, j) in basis.basic.iter().enumerate() {
            let j = *j as usize;
            if j < std.n_orig {
                primal[j] = lp.lower[j] + basis.x_b[slot];
            }
        }
    }
    let objective: f64 = if status == LpStatus::Optimal {
        lp.objective
            .iter()
            .zip(&primal)
            .map(|(c, x)| c * x)
            .sum::<f64>()
    } else {
        0.0
    };

    // duals for the original rows from the final phase-2 prices
    let mut dual = vec![0.0; lp.rows.len()];
    if status == LpStatus::Optimal && m > 0 {
        let mut y = vec![0.0; m];
        for (slot, j) in basis.basic.iter().enumerate() {
            y[slot] = std.cost2[*j as usize];
        }
        basis.btran(&mut y);
        for i in 0..std.n_orig_rows {
            dual[i] = if std.negated[i] { -y[i] } else { y[i] };
        }
    }

    let mut solution = LpSolution {
        status,
        primal,
        dual,
        objective,
        certificates: Certificates {
            primal_residual: 0.0,
            dual_residual: 0.0,
            comp_slackness: 0.0,
        },
        iterations,
        refactorizations: basis.refactorizations,
    };
    if status == LpStatus::Optimal {
        let report: CertificateReport = verify(lp, &solution);
        solution.certificates = Certificates {
            primal_residual: report.primal_residual,
            dual_residual: report.dual_residual,
            comp_slackness: report.comp_slackness,
        };
    }
    Ok(solution)
}
