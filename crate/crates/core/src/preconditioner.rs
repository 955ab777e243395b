//! Column-block preconditioner for the implicit midpoint Newton system.
//!
//! Each column keeps the vertically coupled acoustic–gravity terms of
//! `I − (Δt/2) ∂F/∂x`: the vertical pressure gradient acting on `w`, the
//! vertical mass flux, and vertical advection of the background `θ_S`
//! stratification. Horizontal coupling, `u` and `v` are left out, so those
//! components pass through unchanged. The per-column matrix is factorised
//! once per step with a dense LU.

use nalgebra::{DMatrix, DVector, LU};

use crate::domain::{Grid, PhysicalConstants};
use crate::newton::SolverError;
use crate::thermo::exner_partials;

#[derive(Debug, Clone)]
pub struct ColumnPreconditioner {
    nx: usize,
    nz: usize,
    factors: Vec<LU<f64, nalgebra::Dyn, nalgebra::Dyn>>,
    rhs: DVector<f64>,
}

impl ColumnPreconditioner {
    pub fn new(grid: &Grid) -> Self {
        let n = 3 * grid.nz - 1;
        ColumnPreconditioner {
            nx: grid.nx,
            nz: grid.nz,
            factors: Vec::new(),
            rhs: DVector::zeros(n),
        }
    }

    /// Column unknowns: `w_1..w_{nz−1}`, then `D_0..D_{nz−1}`, then `θ_0..θ_{nz−1}`.
    fn block_size(&self) -> usize {
        3 * self.nz - 1
    }

    /// Builds `I − (Δt/2) J_col` for one column about the packed state `x`.
    pub fn column_matrix(
        &self,
        x: &[f64],
        column: usize,
        dt: f64,
        grid: &Grid,
        c: &PhysicalConstants,
    ) -> Result<DMatrix<f64>, SolverError> {
        let nz = self.nz;
        let layout = grid.layout();
        let f = layout.split(x);
        let theta = &f.theta[column * nz..(column + 1) * nz];
        let dens = &f.density[column * nz..(column + 1) * nz];
        let w = &f.w[column * (nz + 1)..(column + 1) * (nz + 1)];
        let mut pi = vec![0.0; nz];
        let mut pd = vec![0.0; nz];
        let mut pt = vec![0.0; nz];
        for k in 0..nz {
            let e = exner_partials(dens[k], theta[k], c)
                .map_err(|e| SolverError::Inadmissible(e.to_string()))?;
            pi[k] = e.pi;
            pd[k] = e.d_density;
            pt[k] = e.d_theta;
        }
        let n = self.block_size();
        let iw = |k: usize| k - 1; // face k in 1..nz
        let id = |k: usize| nz - 1 + k;
        let it = |k: usize| 2 * nz - 1 + k;
        let mut j = DMatrix::<f64>::zeros(n, n);
        let rdz = 1.0 / grid.dz;

        for k in 1..nz {
            let row = iw(k);
            let theta_f = 0.5 * (theta[k - 1] + theta[k]);
            let a = -c.cp * rdz;
            // dw/dt = -c_p θ_f (Π_k − Π_{k−1}) / Δz − g
            j[(row, id(k))] += a * theta_f * pd[k];
            j[(row, id(k - 1))] -= a * theta_f * pd[k - 1];
            let dpi = pi[k] - pi[k - 1];
            j[(row, it(k))] += a * (0.5 * dpi + theta_f * pt[k]);
            j[(row, it(k - 1))] += a * (0.5 * dpi - theta_f * pt[k - 1]);

            // vertical mass flux through face k
            let d_face = 0.5 * (dens[k - 1] + dens[k]);
            j[(id(k - 1), row)] -= d_face * rdz;
            j[(id(k), row)] += d_face * rdz;
            let half_w = 0.5 * w[k] * rdz;
            j[(id(k - 1), id(k - 1))] -= half_w;
            j[(id(k - 1), id(k))] -= half_w;
            j[(id(k), id(k - 1))] += half_w;
            j[(id(k), id(k))] += half_w;
        }

        // θ_S advected by w: −w̄ ∂θ/∂z with the local stratification
        for k in 0..nz {
            let dthdz = if k == 0 {
                (theta[1] - theta[0]) * rdz
            } else if k == nz - 1 {
                (theta[nz - 1] - theta[nz - 2]) * rdz
            } else {
                0.5 * (theta[k + 1] - theta[k - 1]) * rdz
            };
            if k >= 1 {
                j[(it(k), iw(k))] -= 0.5 * dthdz;
            }
            if k + 1 <= nz - 1 {
                j[(it(k), iw(k + 1))] -= 0.5 * dthdz;
            }
        }

        let mut m = -0.5 * dt * j;
        for d in 0..n {
            m[(d, d)] += 1.0;
        }
        Ok(m)
    }

    /// Factorises every column block about `x`.
    pub fn setup(
        &mut self,
        x: &[f64],
        dt: f64,
        grid: &Grid,
        c: &PhysicalConstants,
    ) -> Result<(), SolverError> {
        self.factors.clear();
        for i in 0..self.nx {
            let m = self.column_matrix(x, i, dt, grid, c)?;
            let lu = m.lu();
            if !lu.is_invertible() {
                return Err(SolverError::SingularColumn(i));
            }
            self.factors.push(lu);
        }
        Ok(())
    }

    pub fn is_ready(&self) -> bool {
        self.factors.len() == self.nx
    }

    /// `z = M⁻¹ r` for packed vectors; `u`, `v` and boundary `w` are copied.
    pub fn apply(&mut self, grid: &Grid, r: &[f64], z: &mut [f64]) {
        assert!(self.is_ready(), "preconditioner applied before setup");
        z.copy_from_slice(r);
        let nz = self.nz;
        let layout = grid.layout();
        let [_, ow, _, ot, od] = layout.offsets();
        for i in 0..self.nx {
            let wbase = ow + i * (nz + 1);
            let cbase = i * nz;
            for k in 1..nz {
                self.rhs[k - 1] = r[wbase + k];
            }
            for k in 0..nz {
                self.rhs[nz - 1 + k] = r[od + cbase + k];
                self.rhs[2 * nz - 1 + k] = r[ot + cbase + k];
            }
            self.factors[i].solve_mut(&mut self.rhs);
            for k in 1..nz {
                z[wbase + k] = self.rhs[k - 1];
            }
            for k in 0..nz {
                z[od + cbase + k] = self.rhs[nz - 1 + k];
                z[ot + cbase + k] = self.rhs[2 * nz - 1 + k];
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{default_constants, RunConfig};
    use crate::dynamics::{Dynamics, DynamicsOptions};
    use crate::init::initial_state;

    fn setup_state() -> (Grid, Vec<f64>) {
        let config = RunConfig {
            nx: 8,
            nz: 6,
            ..RunConfig::default()
        };
        let (grid, state) = initial_state(&config).unwrap();
        (grid, state.packed().to_vec())
    }

    #[test]
    fn reduces_to_identity_as_dt_vanishes() {
        let (grid, x) = setup_state();
        let c = default_constants();
        let mut p = ColumnPreconditioner::new(&grid);
        p.setup(&x, 1e-12, &grid, &c).unwrap();
        let r: Vec<f64> = (0..x.len()).map(|i| (i as f64 * 0.71).sin()).collect();
        let mut z = vec![0.0; r.len()];
        p.apply(&grid, &r, &mut z);
        for (a, b) in r.iter().zip(&z) {
            assert!((a - b).abs() < 1e-9 * (1.0 + a.abs()));
        }
    }

    #[test]
    fn column_jacobian_matches_finite_differences() {
        // The vertical terms of F restricted to one column, probed by FD.
        let (grid, x) = setup_state();
        let c = default_constants();
        let p = ColumnPreconditioner::new(&grid);
        let dt = 2.0;
        let m = p.column_matrix(&x, 3, dt, &grid, &c).unwrap();
        let nz = grid.nz;
        let layout = grid.layout();
        let [_, ow, _, ot, od] = layout.offsets();
        let mut dynamics = Dynamics::new(grid.clone(), c, DynamicsOptions::default());
        let mut f0 = vec![0.0; x.len()];
        dynamics.evaluate(&x, &mut f0).unwrap();
        // perturb D in cell (3, 2) and compare w and D rows of the column
        let col = 3;
        let k = 2;
        let idx = od + col * nz + k;
        let h = 1e-6 * x[idx];
        let mut xp = x.clone();
        xp[idx] += h;
        let mut f1 = vec![0.0; x.len()];
        dynamics.evaluate(&xp, &mut f1).unwrap();
        let jcol = nz - 1 + k;
        for kw in 1..nz {
            let fd = (f1[ow + col * (nz + 1) + kw] - f0[ow + col * (nz + 1) + kw]) / h;
            let an = -m[(kw - 1, jcol)] / (0.5 * dt);
            assert!(
                (fd - an).abs() < 1e-5 * (1.0 + an.abs()),
                "w row {kw}: fd {fd} vs {an}"
            );
        }
        // perturb θ and check the w rows
        let idx = ot + col * nz + k;
        let h = 1e-6 * x[idx];
        let mut xp = x.clone();
        xp[idx] += h;
        dynamics.evaluate(&xp, &mut f1).unwrap();
        let jcol = 2 * nz - 1 + k;
        for kw in 1..nz {
            let fd = (f1[ow + col * (nz + 1) + kw] - f0[ow + col * (nz + 1) + kw]) / h;
            let an = -m[(kw - 1, jcol)] / (0.5 * dt);
            assert!(
                (fd - an).abs() < 1e-5 * (1.0 + an.abs()),
                "w row {kw}: fd {fd} vs {an}"
            );
        }
    }

    #[test]
    fn is_linear() {
        let (grid, x) = setup_state();
        let c = default_constants();
        let mut p = ColumnPreconditioner::new(&grid);
        p.setup(&x, 300.0, &grid, &c).unwrap();
        let a: Vec<f64> = (0..x.len()).map(|i| (i as f64 * 0.3).cos()).collect();
        let b: Vec<f64> = (0..x.len()).map(|i| (i as f64 * 1.7).sin()).collect();
        let sum: Vec<f64> = a.iter().zip(&b).map(|(p, q)| 2.0 * p - 3.0 * q).collect();
        let (mut za, mut zb, mut zs) = (vec![0.0; a.len()], vec![0.0; a.len()], vec![0.0; a.len()]);
        p.apply(&grid, &a, &mut za);
        p.apply(&grid, &b, &mut zb);
        p.apply(&grid, &sum, &mut zs);
        for i in 0..a.len() {
            let expect = 2.0 * za[i] - 3.0 * zb[i];
            assert!((zs[i] - expect).abs() < 1e-9 * (1.0 + expect.abs()));
        }
    }
}
