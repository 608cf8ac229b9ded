//! Dense LU factorization with partial pivoting, tuned for the basis sizes
//! this crate produces (a few thousand rows at most).
//!
//! The factorization is right-looking over column panels; the trailing update
//! is a rank-NB row operation with contiguous inner loops. A transposed copy
//! of the factors is kept so that both `ftran` (solve B x = b) and `btran`
//! (solve B^T y = c) run as row-major dot products.

const PANEL: usize = 48;

pub struct LuFactors {
    m: usize,
    lu: Vec<f64>,
    lut: Vec<f64>,
    ipiv: Vec<u32>,
}

/// Singularity report: the failing column and the original row indices that
/// were still unpivoted when the zero pivot appeared (candidates for a basis
/// repair).
#[derive(Debug)]
pub struct Singular {
    pub col: usize,
    pub unpivoted_rows: Vec<u32>,
}

/// Factorize the dense row-major `m x m` matrix `a` in place.
pub fn factorize(mut a: Vec<f64>, m: usize) -> Result<LuFactors, Singular> {
    debug_assert_eq!(a.len(), m * m);
    let mut ipiv = vec![0u32; m];
    let mut rowmap: Vec<u32> = (0..m as u32).collect();
    let mut k0 = 0;
    while k0 < m {
        let kmax = (k0 + PANEL).min(m);
        // factor the panel columns, updating only within the panel
        for k in k0..kmax {
            let mut p = k;
            let mut best = a[k * m + k].abs();
            for i in (k + 1)..m {
                let v = a[i * m + k].abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best < 1e-12 {
                return Err(Singular {
                    col: k,
                    unpivoted_rows: rowmap[k..m].to_vec(),
                });
            }
            ipiv[k] = p as u32;
            rowmap.swap(k, p);
            if p != k {
                for j in 0..m {
                    a.swap(k * m + j, p * m + j);
                }
            }
            let piv = a[k * m + k];
            for i in (k + 1)..m {
                let f = a[i * m + k] / piv;
                a[i * m + k] = f;
                if f != 0.0 {
                    let (head, tail) = a.split_at_mut(i * m);
                    let row_k = &head[k * m + k + 1..k * m + kmax];
                    let row_i = &mut tail[k + 1..kmax];
                    for (ri, rk) in row_i.iter_mut().zip(row_k) {
                        *ri -= f * rk;
                    }
                }
            }
        }
        if kmax < m {
            // U12 block: forward-eliminate the panel multipliers into the
            // columns right of the panel
            for k in k0..kmax {
                for i in (k + 1)..kmax {
                    let f = a[i * m + k];
                    if f != 0.0 {
                        let (head, tail) = a.split_at_mut(i * m);
                        let row_k = &head[k * m + kmax..k * m + m];
                        let row_i = &mut tail[kmax..m];
                        for (ri, rk) in row_i.iter_mut().zip(row_k) {
                            *ri -= f * rk;
                        }
                    }
                }
            }
            // A22 -= L21 * U12, row by row
            for i in kmax..m {
                for k in k0..kmax {
                    let f = a[i * m + k];
                    if f != 0.0 {
                        let (head, tail) = a.split_at_mut(i * m);
                        let row_k = &head[k * m + kmax..k * m + m];
                        let row_i = &mut tail[kmax..m];
                        for (ri, rk) in row_i.iter_mut().zip(row_k) {
                            *ri -= f * rk;
                        }
                    }
                }
            }
        }
        k0 = kmax;
    }
    let mut lut = vec![0.0; m * m];
    for i in 0..m {
        for j in 0..m {
            lut[j * m + i] = a[i * m + j];
        }
    }
    Ok(LuFactors {
        m,
        lu: a,
        lut,
        ipiv,
    })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc0 = 0.0;
    let mut acc1 = 0.0;
    let mut acc2 = 0.0;
    let mut acc3 = 0.0;
    let chunks = a.len() / 4;
    for c in 0..chunks {
        let i = 4 * c;
        acc0 += a[i] * b[i];
        acc1 += a[i + 1] * b[i + 1];
        acc2 += a[i + 2] * b[i + 2];
        acc3 += a[i + 3] * b[i + 3];
    }
    let mut acc = (acc0 + acc1) + (acc2 + acc3);
    for i in 4 * chunks..a.len() {
        acc += a[i] * b[i];
    }
    acc
}

impl LuFactors {
    /// Solve B x = b in place.
    pub fn ftran(&self, x: &mut [f64]) {
        let m = self.m;
        for k in 0..m {
            let p = self.ipiv[k] as usize;
            if p != k {
                x.swap(k, p);
            }
        }
        // L (unit lower) forward, row-oriented
        for i in 1..m {
            let row = &self.lu[i * m..i * m + i];
            x[i] -= dot(row, &x[..i]);
        }
        // U backward
        for i in (0..m).rev() {
            let row = &self.lu[i * m + i..i * m + m];
            let s = dot(&row[1..], &x[i + 1..m]);
            x[i] = (x[i] - s) / row[0];
        }
    }

    /// Solve B^T y = c in place.
    pub fn btran(&self, y: &mut [f64]) {
        let m = self.m;
        // U^T forward (rows of lut hold columns of lu)
        for k in 0..m {
            let row = &self.lut[k * m..k * m + k + 1];
            let s = dot(&row[..k], &y[..k]);
            y[k] = (y[k] - s) / row[k];
        }
        // L^T backward (unit diagonal)
        for i in (0..m).rev() {
            let row = &self.lut[i * m + i + 1..i * m + m];
            y[i] -= dot(row, &y[i + 1..m]);
        }
        for k in (0..m).rev() {
            let p = self.ipiv[k] as usize;
            if p != k {
                y.swap(k, p);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn factor_and_solve_small() {
        // 3x3 with known solution
        let a = vec![2.0, 1.0, 1.0, 4.0, -6.0, 0.0, -2.0, 7.0, 2.0];
        let f = factorize(a.clone(), 3).unwrap();
        let b = vec![5.0, -2.0, 9.0];
        let mut x = b.clone();
        f.ftran(&mut x);
        // check A x = b
        for i in 0..3 {
            let r: f64 = (0..3).map(|j| a[i * 3 + j] * x[j]).sum();
            assert!((r - b[i]).abs() < 1e-10);
        }
        let mut y = b.clone();
        f.btran(&mut y);
        for j in 0..3 {
            let r: f64 = (0..3).map(|i| a[i * 3 + j] * y[i]).sum();
            assert!((r - b[j]).abs() < 1e-10);
        }
    }

    #[test]
    fn factor_and_solve_random_200() {
        // deterministic pseudo-random matrix, diagonally boosted
        let m = 200;
        let mut state = 0x243F6A8885A308D3u64;
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        let mut a = vec![0.0; m * m];
        for i in 0..m {
            for j in 0..m {
                a[i * m + j] = next();
            }
            a[i * m + i] += 3.0;
        }
        let f = factorize(a.clone(), m).unwrap();
        let b: Vec<f64> = (0..m).map(|i| (i as f64).sin()).collect();
        let mut x = b.clone();
        f.ftran(&mut x);
        let mut max_err = 0.0f64;
        for i in 0..m {
            let r: f64 = (0..m).map(|j| a[i * m + j] * x[j]).sum();
            max_err = max_err.max((r - b[i]).abs());
        }
        assert!(max_err < 1e-8, "ftran residual {max_err}");
        let mut y = b.clone();
        f.btran(&mut y);
        max_err = 0.0;
        for j in 0..m {
            let r: f64 = (0..m).map(|i| a[i * m + j] * y[i]).sum();
            max_err = max_err.max((r - b[j]).abs());
        }
        assert!(max_err < 1e-8, "btran residual {max_err}");
    }

    #[test]
    fn singular_matrix_reports_column() {
        let a = vec![1.0, 2.0, 2.0, 4.0];
        match factorize(a, 2) {
            Err(s) => {
                assert_eq!(s.col, 1);
                assert_eq!(s.unpivoted_rows.len(), 1);
            }
            Ok(_) => panic!("expected singularity"),
        }
    }
}
