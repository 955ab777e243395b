//! Restarted, right-preconditioned GMRES.

/// Outcome of one [`gmres`] call.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GmresResult {
    pub iterations: usize,
    /// Final residual norm relative to `‖b‖`.
    pub relative_residual: f64,
    pub converged: bool,
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Solves `A x = b` with `A` applied by `apply_a` and the right
/// preconditioner `M⁻¹` by `apply_m`, starting from `x = 0`.
///
/// Stops when `‖b − A x‖ ≤ rel_tol ‖b‖` or after `max_iters` inner
/// iterations in total. Errors from either closure abort the solve.
pub fn gmres<E>(
    mut apply_a: impl FnMut(&[f64], &mut [f64]) -> Result<(), E>,
    mut apply_m: impl FnMut(&[f64], &mut [f64]) -> Result<(), E>,
    b: &[f64],
    x: &mut [f64],
    rel_tol: f64,
    max_iters: usize,
    restart: usize,
) -> Result<GmresResult, E> {
    let n = b.len();
    x.fill(0.0);
    let b_norm = norm2(b);
    if b_norm == 0.0 {
        return Ok(GmresResult {
            iterations: 0,
            relative_residual: 0.0,
            converged: true,
        });
    }
    let m = restart.max(1);
    let mut basis: Vec<Vec<f64>> = (0..=m).map(|_| vec![0.0; n]).collect();
    let mut z = vec![0.0; n];
    let mut w = vec![0.0; n];
    let mut r = b.to_vec();
    let mut h = vec![vec![0.0; m]; m + 1];
    let mut cs = vec![0.0; m];
    let mut sn = vec![0.0; m];
    let mut g = vec![0.0; m + 1];
    let mut y = vec![0.0; m];
    let mut total = 0;

    loop {
        let beta = norm2(&r);
        let rel = beta / b_norm;
        if rel <= rel_tol || total >= max_iters {
            return Ok(GmresResult {
                iterations: total,
                relative_residual: rel,
                converged: rel <= rel_tol,
            });
        }
        for (v0, ri) in basis[0].iter_mut().zip(&r) {
            *v0 = ri / beta;
        }
        g.fill(0.0);
        g[0] = beta;
        let mut j_used = 0;
        for j in 0..m {
            apply_m(&basis[j], &mut z)?;
            apply_a(&z, &mut w)?;
            total += 1;
            // modified Gram-Schmidt
            for i in 0..=j {
                let hij = dot(&w, &basis[i]);
                h[i][j] = hij;
                for (wk, vk) in w.iter_mut().zip(&basis[i]) {
                    *wk -= hij * vk;
                }
            }
            let hn = norm2(&w);
            h[j + 1][j] = hn;
            if hn > 0.0 {
                for (vk, wk) in basis[j + 1].iter_mut().zip(&w) {
                    *vk = wk / hn;
                }
            }
            for i in 0..j {
                let t = cs[i] * h[i][j] + sn[i] * h[i + 1][j];
                h[i + 1][j] = -sn[i] * h[i][j] + cs[i] * h[i + 1][j];
                h[i][j] = t;
            }
            let denom = h[j][j].hypot(h[j + 1][j]);
            if denom == 0.0 {
                cs[j] = 1.0;
                sn[j] = 0.0;
            } else {
                cs[j] = h[j][j] / denom;
                sn[j] = h[j + 1][j] / denom;
            }
            h[j][j] = denom;
            h[j + 1][j] = 0.0;
            g[j + 1] = -sn[j] * g[j];
            g[j] *= cs[j];
            j_used = j + 1;
            let rel = g[j + 1].abs() / b_norm;
            if rel <= rel_tol || total >= max_iters || hn == 0.0 {
                break;
            }
        }
        // back substitution for the least-squares coefficients
        for i in (0..j_used).rev() {
            let mut s = g[i];
            for k in i + 1..j_used {
                s -= h[i][k] * y[k];
            }
            y[i] = if h[i][i] != 0.0 { s / h[i][i] } else { 0.0 };
        }
        w.fill(0.0);
        for (i, yi) in y.iter().take(j_used).enumerate() {
            for (wk, vk) in w.iter_mut().zip(&basis[i]) {
                *wk += yi * vk;
            }
        }
        apply_m(&w, &mut z)?;
        for (xk, zk) in x.iter_mut().zip(&z) {
            *xk += zk;
        }
        // true residual for the restart
        apply_a(x, &mut w)?;
        for ((rk, bk), wk) in r.iter_mut().zip(b).zip(&w) {
            *rk = bk - wk;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::convert::Infallible;

    fn apply_dense(
        a: &[Vec<f64>],
    ) -> impl FnMut(&[f64], &mut [f64]) -> Result<(), Infallible> + '_ {
        move |x, y| {
            for (row, yi) in a.iter().zip(y.iter_mut()) {
                *yi = dot(row, x);
            }
            Ok(())
        }
    }

    fn identity(x: &[f64], y: &mut [f64]) -> Result<(), Infallible> {
        y.copy_from_slice(x);
        Ok(())
    }

    #[test]
    fn solves_nonsymmetric_system() {
        let n = 40;
        let a: Vec<Vec<f64>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        if i == j {
                            4.0
                        } else if j == i + 1 {
                            -1.3
                        } else if i == j + 1 {
                            -0.7
                        } else {
                            0.0
                        }
                    })
                    .collect()
            })
            .collect();
        let x_true: Vec<f64> = (0..n).map(|i| (i as f64 * 0.37).sin()).collect();
        let mut b = vec![0.0; n];
        apply_dense(&a)(&x_true, &mut b).unwrap();
        let mut x = vec![0.0; n];
        let res = gmres(apply_dense(&a), identity, &b, &mut x, 1e-12, 500, 10).unwrap();
        assert!(res.converged);
        for (xi, ti) in x.iter().zip(&x_true) {
            assert!((xi - ti).abs() < 1e-10);
        }
    }

    #[test]
    fn exact_preconditioner_converges_in_one_iteration() {
        let a = vec![vec![2.0, 1.0], vec![0.0, 3.0]];
        let inv = vec![vec![0.5, -1.0 / 6.0], vec![0.0, 1.0 / 3.0]];
        let b = [1.0, 2.0];
        let mut x = [0.0; 2];
        let res = gmres(apply_dense(&a), apply_dense(&inv), &b, &mut x, 1e-12, 50, 5).unwrap();
        assert_eq!(res.iterations, 1);
        assert!((x[0] - (1.0 - 2.0 / 3.0) / 2.0).abs() < 1e-14);
        assert!((x[1] - 2.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn zero_rhs() {
        let a = vec![vec![1.0]];
        let mut x = [5.0];
        let res = gmres(apply_dense(&a), identity, &[0.0], &mut x, 1e-8, 10, 5).unwrap();
        assert_eq!(res.iterations, 0);
        assert_eq!(x[0], 0.0);
    }
}
