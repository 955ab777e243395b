//! Jacobian-free Newton–Krylov solve of the implicit midpoint rule
//! `x* − x − Δt F((x + x*)/2) = 0`.
//!
//! Unknowns are nondimensionalised by per-component scales before any norm
//! or Krylov product is formed, so mixed-unit residuals are comparable.

use thiserror::Error;

use crate::domain::SolverConfig;
use crate::krylov::{gmres, norm2};

/// Per-step solver statistics.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SolverStats {
    /// Residual evaluations until convergence (1 when the initial guess
    /// already satisfies the tolerance).
    pub newton_iterations: usize,
    pub linear_iterations_total: usize,
    /// RMS of the nondimensional residual at exit.
    pub final_residual_norm: f64,
    pub converged: bool,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error("Newton did not converge: {stats:?}")]
    NewtonNoConvergence { stats: SolverStats },
    #[error("inadmissible iterate: {0}")]
    Inadmissible(String),
    #[error("singular column block in column {0}")]
    SingularColumn(usize),
    #[error("acoustic Courant number {courant:.3} exceeds cap {cap}")]
    Cfl { courant: f64, cap: f64 },
}

/// A right-hand side `F` with optional preconditioning of `I − (Δt/2) ∂F/∂x`.
pub trait MidpointSystem {
    fn rhs(&mut self, x: &[f64], out: &mut [f64]) -> Result<(), SolverError>;

    /// Per-component scales used to nondimensionalise unknowns and residuals.
    fn scales(&self) -> &[f64];

    /// Freezes preconditioner coefficients at `x_ref` for a step of `dt`.
    fn setup_preconditioner(&mut self, _x_ref: &[f64], _dt: f64) -> Result<(), SolverError> {
        Ok(())
    }

    /// `z ≈ (I − (Δt/2) J)⁻¹ r` in physical units.
    fn precondition(&mut self, r: &[f64], z: &mut [f64]) -> Result<(), SolverError> {
        z.copy_from_slice(r);
        Ok(())
    }
}

fn rms(x: &[f64]) -> f64 {
    if x.is_empty() {
        0.0
    } else {
        norm2(x) / (x.len() as f64).sqrt()
    }
}

/// Working buffers for [`midpoint_solve`], reusable across steps.
#[derive(Debug, Clone, Default)]
pub struct MidpointWorkspace {
    mid: Vec<f64>,
    f_mid: Vec<f64>,
    residual: Vec<f64>,
    rhs_s: Vec<f64>,
    delta_s: Vec<f64>,
    pert: Vec<f64>,
    f_pert: Vec<f64>,
    tmp: Vec<f64>,
    trial: Vec<f64>,
}

impl MidpointWorkspace {
    fn resize(&mut self, n: usize) {
        for v in [
            &mut self.mid,
            &mut self.f_mid,
            &mut self.residual,
            &mut self.rhs_s,
            &mut self.delta_s,
            &mut self.pert,
            &mut self.f_pert,
            &mut self.tmp,
            &mut self.trial,
        ] {
            v.resize(n, 0.0);
        }
    }
}

/// Scaled residual `(x_new − x − Δt F(mid)) / scale`; leaves `F(mid)` in `f_mid`.
fn residual<S: MidpointSystem + ?Sized>(
    system: &mut S,
    x: &[f64],
    x_new: &[f64],
    dt: f64,
    mid: &mut [f64],
    f_mid: &mut [f64],
    out: &mut [f64],
) -> Result<(), SolverError> {
    for ((m, a), b) in mid.iter_mut().zip(x).zip(x_new) {
        *m = 0.5 * (a + b);
    }
    system.rhs(mid, f_mid)?;
    let scales = system.scales();
    for i in 0..x.len() {
        out[i] = (x_new[i] - x[i] - dt * f_mid[i]) / scales[i];
    }
    Ok(())
}

/// Advances `x` by one implicit midpoint step, overwriting `x_new` with the
/// solution. `x_new` is used as the initial guess.
pub fn midpoint_solve<S: MidpointSystem + ?Sized>(
    system: &mut S,
    x: &[f64],
    x_new: &mut [f64],
    dt: f64,
    cfg: &SolverConfig,
    ws: &mut MidpointWorkspace,
) -> Result<SolverStats, SolverError> {
    let n = x.len();
    ws.resize(n);
    system.setup_preconditioner(x, dt)?;
    let mut stats = SolverStats::default();

    residual(
        system,
        x,
        x_new,
        dt,
        &mut ws.mid,
        &mut ws.f_mid,
        &mut ws.residual,
    )?;
    let mut norm = rms(&ws.residual);
    let target = cfg.newton_abs_tol.max(cfg.newton_rel_tol * norm);
    let sqrt_eps = f64::EPSILON.sqrt() * cfg.jacobian_fd_scale;

    for iter in 1..=cfg.newton_max_iters {
        stats.newton_iterations = iter;
        stats.final_residual_norm = norm;
        if norm <= target {
            stats.converged = true;
            return Ok(stats);
        }
        if iter == cfg.newton_max_iters {
            break;
        }
        for (b, r) in ws.rhs_s.iter_mut().zip(&ws.residual) {
            *b = -r;
        }
        let x_scale_rms = {
            let scales = system.scales();
            let mut acc = 0.0;
            for (v, s) in x_new.iter().zip(scales) {
                acc += (v / s) * (v / s);
            }
            (acc / n as f64).sqrt()
        };

        // borrow juggling: split the workspace fields used inside closures
        let MidpointWorkspace {
            mid,
            f_mid,
            rhs_s,
            delta_s,
            pert,
            f_pert,
            tmp,
            ..
        } = ws;
        let sys_cell = std::cell::RefCell::new(&mut *system);
        let apply_a = |v_s: &[f64], out: &mut [f64]| -> Result<(), SolverError> {
            let mut sys = sys_cell.borrow_mut();
            let v_rms = rms(v_s);
            if v_rms == 0.0 {
                out.fill(0.0);
                return Ok(());
            }
            let eps = sqrt_eps * (1.0 + x_scale_rms) / v_rms;
            {
                let scales = sys.scales();
                for i in 0..n {
                    pert[i] = mid[i] + 0.5 * eps * v_s[i] * scales[i];
                }
            }
            sys.rhs(pert, f_pert)?;
            let scales = sys.scales();
            for i in 0..n {
                out[i] = v_s[i] - dt * (f_pert[i] - f_mid[i]) / (eps * scales[i]);
            }
            Ok(())
        };
        let apply_m = |r_s: &[f64], z_s: &mut [f64]| -> Result<(), SolverError> {
            let mut sys = sys_cell.borrow_mut();
            {
                let scales = sys.scales();
                for i in 0..n {
                    tmp[i] = r_s[i] * scales[i];
                }
            }
            sys.precondition(tmp, z_s)?;
            let scales = sys.scales();
            for i in 0..n {
                z_s[i] /= scales[i];
            }
            Ok(())
        };
        // no point solving below the Newton target, where the finite
        // difference products are mostly rounding noise
        let lin_tol = cfg.linear_rel_tol.max((0.1 * target / norm).min(0.5));
        let lin = gmres(
            apply_a,
            apply_m,
            rhs_s,
            delta_s,
            lin_tol,
            cfg.linear_max_iters,
            cfg.linear_restart,
        )?;
        stats.linear_iterations_total += lin.iterations;

        // damped update: halve while the iterate is inadmissible or the
        // residual grows
        let mut step = 1.0;
        let mut accepted = false;
        for _ in 0..6 {
            {
                let scales = system.scales();
                for i in 0..n {
                    ws.trial[i] = x_new[i] + step * ws.delta_s[i] * scales[i];
                }
            }
            match residual(
                system,
                x,
                &ws.trial,
                dt,
                &mut ws.mid,
                &mut ws.f_mid,
                &mut ws.tmp,
            ) {
                Ok(()) => {
                    let trial_norm = rms(&ws.tmp);
                    if trial_norm < norm || step < 0.6 && trial_norm.is_finite() {
                        x_new.copy_from_slice(&ws.trial);
                        std::mem::swap(&mut ws.residual, &mut ws.tmp);
                        norm = trial_norm;
                        accepted = true;
                        break;
                    }
                }
                Err(SolverError::Inadmissible(_)) => {}
                Err(e) => return Err(e),
            }
            step *= 0.5;
        }
        if !accepted {
            stats.final_residual_norm = norm;
            return Err(SolverError::NewtonNoConvergence { stats });
        }
    }
    stats.final_residual_norm = norm;
    stats.converged = norm <= target;
    if stats.converged {
        Ok(stats)
    } else {
        Err(SolverError::NewtonNoConvergence { stats })
    }
}
