//! Balanced initial state and the breeding spin-up.
//!
//! The temperature field is the isothermal background plus the Eady
//! normal-mode structure; density follows from a discrete hydrostatic
//! column solve, `v` from geostrophic balance and `u` from the thermal-wind
//! relation built on the same discrete `Π`.

use std::f64::consts::PI;

use log::{debug, info};
use thiserror::Error;

use crate::domain::{build_grid, Grid, PhysicalConstants, RunConfig, State};
use crate::thermo::{density_from_exner, exner, exner_partials, ThermoError};
use crate::timestep::Stepper;

#[derive(Debug, Error)]
pub enum InitError {
    #[error("Burger number must be positive, got {0}")]
    Burger(f64),
    #[error("hydrostatic solve in column {column} did not converge (residual {residual:e} after {iterations} iterations)")]
    HydrostaticNoConvergence {
        column: usize,
        residual: f64,
        iterations: usize,
    },
    #[error("hydrostatic solve in column {column} produced non-positive density")]
    HydrostaticNegativeDensity { column: usize },
    #[error(
        "breeding threshold {threshold} m/s not reached within {days} days (max |v| = {max_v})"
    )]
    BreedingThreshold {
        threshold: f64,
        days: f64,
        max_v: f64,
    },
    #[error(transparent)]
    Thermo(#[from] ThermoError),
}

/// Isothermal background `θ̄(z) = θ₀ exp(N²(z − H/2)/g)`.
pub fn background_theta(z: f64, c: &PhysicalConstants) -> f64 {
    c.theta0 * (c.n2 * (z - 0.5 * c.height) / c.gravity).exp()
}

/// Exact hydrostatic Exner profile of the background,
/// `Π̄(z) = Π_s − (g²/(c_p θ₀ N²)) [e^{N²H/2g} − e^{−N²(z−H/2)/g}]`.
pub fn background_exner(z: f64, surface_exner: f64, c: &PhysicalConstants) -> f64 {
    let a = c.n2 / c.gravity;
    let scale = c.gravity / (c.cp * c.theta0 * a);
    surface_exner - scale * ((0.5 * a * c.height).exp() - (-a * (z - 0.5 * c.height)).exp())
}

/// `(x − tanh x, coth x − x)` with series expansions near zero, where
/// direct evaluation cancels catastrophically.
fn mode_factors(x: f64) -> (f64, f64) {
    if x < 1e-2 {
        let x2 = x * x;
        let a = x * x2 * (1.0 / 3.0 - x2 * (2.0 / 15.0 - x2 * 17.0 / 315.0));
        let b = 1.0 / x - x * (2.0 / 3.0 + x2 / 45.0);
        (a, b)
    } else {
        (x - x.tanh(), 1.0 / x.tanh() - x)
    }
}

/// Normal-mode constant `n = Bu⁻¹ √{[Bu/2 − tanh(Bu/2)][coth(Bu/2) − Bu/2]}`.
pub fn mode_constant(burger: f64) -> Result<f64, InitError> {
    if !(burger > 0.0 && burger.is_finite()) {
        return Err(InitError::Burger(burger));
    }
    let (a, b) = mode_factors(0.5 * burger);
    Ok((a * b).sqrt() / burger)
}

/// Parameters of the initial temperature perturbation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalModeParams {
    /// Amplitude `a`, m s⁻¹.
    pub amplitude: f64,
    pub burger: f64,
    pub n: f64,
}

impl NormalModeParams {
    pub fn new(amplitude: f64, burger: f64) -> Result<Self, InitError> {
        Ok(NormalModeParams {
            amplitude,
            burger,
            n: mode_constant(burger)?,
        })
    }

    pub fn from_config(config: &RunConfig) -> Result<Self, InitError> {
        Self::new(config.amplitude, config.constants.burger())
    }

    /// Modified vertical coordinate `Z = Bu (z/H − 1/2)`.
    pub fn z_mod(&self, z: f64, height: f64) -> f64 {
        self.burger * (z / height - 0.5)
    }

    /// Perturbation `θ_S − θ̄` at `(x, z)`.
    pub fn perturbation(&self, x: f64, z: f64, c: &PhysicalConstants) -> f64 {
        let zz = self.z_mod(z, c.height);
        let half = 0.5 * self.burger;
        let amp = c.theta0 * self.amplitude * c.buoyancy_frequency() / c.gravity;
        let phase = PI * x / c.half_width;
        amp * (-(1.0 - half / half.tanh()) * zz.sinh() * phase.cos()
            - self.n * self.burger * zz.cosh() * phase.sin())
    }
}

/// `θ_S` at cell centres: background plus normal-mode perturbation.
pub fn perturbed_theta(grid: &Grid, params: &NormalModeParams, c: &PhysicalConstants) -> Vec<f64> {
    let mut theta = vec![0.0; grid.cells()];
    for i in 0..grid.nx {
        for k in 0..grid.nz {
            let (x, z) = (grid.x_center[i], grid.z_center[k]);
            theta[grid.center(i, k)] = background_theta(z, c) + params.perturbation(x, z, c);
        }
    }
    theta
}

/// Result of the hydrostatic column solves.
#[derive(Debug, Clone)]
pub struct HydrostaticSolution {
    pub density: Vec<f64>,
    pub exner: Vec<f64>,
    /// Max-norm residual (in units of `g`) after each Newton iteration,
    /// starting with the initial guess, for every column.
    pub residual_history: Vec<Vec<f64>>,
}

const HYDROSTATIC_TOL: f64 = 1e-13;
const HYDROSTATIC_MAX_ITERS: usize = 50;
const MAX_HALVINGS: usize = 8;

/// Residuals of the discrete hydrostatic relation in one column, divided by `g`.
///
/// Entry `k − 1` (for `k = 1..nz`) is `c_p θ̄_face (Π_k − Π_{k−1})/Δz + g` at
/// interior face `k`; the last entry closes the column against the lid,
/// `c_p θ_top (Π_lid − Π_top)/(Δz/2) + g`.
fn column_residual(
    theta: &[f64],
    pi: &[f64],
    lid_exner: f64,
    dz: f64,
    c: &PhysicalConstants,
    r: &mut [f64],
) {
    let nz = theta.len();
    for k in 1..nz {
        let theta_f = 0.5 * (theta[k - 1] + theta[k]);
        r[k - 1] = (c.cp * theta_f * (pi[k] - pi[k - 1]) / dz + c.gravity) / c.gravity;
    }
    r[nz - 1] =
        (c.cp * theta[nz - 1] * (lid_exner - pi[nz - 1]) / (0.5 * dz) + c.gravity) / c.gravity;
}

fn max_norm(r: &[f64]) -> f64 {
    r.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}

/// Damped Newton solve for the density of one column.
fn solve_column(
    column: usize,
    theta: &[f64],
    z_center: &[f64],
    lid_exner: f64,
    surface_exner: f64,
    dz: f64,
    c: &PhysicalConstants,
) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>), InitError> {
    let nz = theta.len();
    let mut density: Vec<f64> = (0..nz)
        .map(|k| density_from_exner(background_exner(z_center[k], surface_exner, c), theta[k], c))
        .collect::<Result<_, _>>()?;
    let mut pi = vec![0.0; nz];
    let mut pd = vec![0.0; nz];
    let mut r = vec![0.0; nz];
    let mut delta = vec![0.0; nz];
    let mut trial = vec![0.0; nz];
    let mut trial_pi = vec![0.0; nz];
    let mut trial_r = vec![0.0; nz];

    let eval = |d: &[f64], pi: &mut [f64]| -> Result<(), ThermoError> {
        for k in 0..nz {
            pi[k] = exner(d[k], theta[k], c)?;
        }
        Ok(())
    };

    eval(&density, &mut pi)?;
    column_residual(theta, &pi, lid_exner, dz, c, &mut r);
    let mut norm = max_norm(&r);
    let mut history = vec![norm];

    for iteration in 0..HYDROSTATIC_MAX_ITERS {
        if norm <= HYDROSTATIC_TOL {
            return Ok((density, pi, history));
        }
        for k in 0..nz {
            pd[k] = exner_partials(density[k], theta[k], c)?.d_density;
        }
        // The Jacobian is lower bidiagonal in the (lid, faces top→bottom)
        // ordering: solve from the lid down.
        let top = nz - 1;
        let j_top = -c.cp * theta[top] * pd[top] / (0.5 * dz) / c.gravity;
        delta[top] = -r[top] / j_top;
        for k in (1..nz).rev() {
            let theta_f = 0.5 * (theta[k - 1] + theta[k]);
            let a = c.cp * theta_f * pd[k] / dz / c.gravity;
            let b = -c.cp * theta_f * pd[k - 1] / dz / c.gravity;
            delta[k - 1] = -(r[k - 1] + a * delta[k]) / b;
        }

        let mut step = 1.0;
        let mut accepted = false;
        for _ in 0..=MAX_HALVINGS {
            let positive =
                density
                    .iter()
                    .zip(&delta)
                    .zip(trial.iter_mut())
                    .all(|((&d, &dd), t)| {
                        *t = d + step * dd;
                        *t > 0.0
                    });
            if positive {
                eval(&trial, &mut trial_pi)?;
                column_residual(theta, &trial_pi, lid_exner, dz, c, &mut trial_r);
                let trial_norm = max_norm(&trial_r);
                if trial_norm < norm || trial_norm <= HYDROSTATIC_TOL {
                    std::mem::swap(&mut density, &mut trial);
                    std::mem::swap(&mut pi, &mut trial_pi);
                    std::mem::swap(&mut r, &mut trial_r);
                    norm = trial_norm;
                    accepted = true;
                    break;
                }
            }
            step *= 0.5;
        }
        history.push(norm);
        if !accepted {
            if density.iter().any(|&d| d <= 0.0) {
                return Err(InitError::HydrostaticNegativeDensity { column });
            }
            // no descent possible: either converged to round-off or stuck
            if norm <= 1e3 * HYDROSTATIC_TOL {
                return Ok((density, pi, history));
            }
            return Err(InitError::HydrostaticNoConvergence {
                column,
                residual: norm,
                iterations: iteration + 1,
            });
        }
    }
    if norm <= HYDROSTATIC_TOL {
        Ok((density, pi, history))
    } else {
        Err(InitError::HydrostaticNoConvergence {
            column,
            residual: norm,
            iterations: HYDROSTATIC_MAX_ITERS,
        })
    }
}

/// Density in discrete hydrostatic balance with `theta`, column by column.
///
/// The lid Exner value is that of the isothermal background whose surface
/// Exner pressure is `surface_exner`, so every column shares the same lid
/// pressure.
pub fn hydrostatic_density(
    theta: &[f64],
    grid: &Grid,
    c: &PhysicalConstants,
    surface_exner: f64,
) -> Result<HydrostaticSolution, InitError> {
    let nz = grid.nz;
    let lid_exner = background_exner(grid.height, surface_exner, c);
    let mut density = vec![0.0; grid.cells()];
    let mut pi = vec![0.0; grid.cells()];
    let mut residual_history = Vec::with_capacity(grid.nx);
    for i in 0..grid.nx {
        let col = &theta[i * nz..(i + 1) * nz];
        let (d, p, h) = solve_column(i, col, &grid.z_center, lid_exner, surface_exner, grid.dz, c)?;
        density[i * nz..(i + 1) * nz].copy_from_slice(&d);
        pi[i * nz..(i + 1) * nz].copy_from_slice(&p);
        debug!("hydrostatic column {i}: {} Newton iterations", h.len() - 1);
        residual_history.push(h);
    }
    Ok(HydrostaticSolution {
        density,
        exner: pi,
        residual_history,
    })
}

/// `v = (c_p θ_S / f) ∂Π/∂x` at centres, centred periodic differences.
pub fn geostrophic_v(theta: &[f64], exner: &[f64], grid: &Grid, c: &PhysicalConstants) -> Vec<f64> {
    let nz = grid.nz;
    let mut v = vec![0.0; grid.cells()];
    for i in 0..grid.nx {
        let im = grid.wrap(i as isize - 1);
        let ip = grid.wrap(i as isize + 1);
        for k in 0..nz {
            let dpdx = (exner[ip * nz + k] - exner[im * nz + k]) / (2.0 * grid.dx);
            v[i * nz + k] = c.cp * theta[i * nz + k] / c.coriolis * dpdx;
        }
    }
    v
}

/// `u = (c_p s / f)(Π − Π₀)` averaged from centres onto x-faces.
pub fn initial_u(exner: &[f64], grid: &Grid, c: &PhysicalConstants) -> Vec<f64> {
    let nz = grid.nz;
    let factor = c.cp * c.s() / c.coriolis;
    let mut u = vec![0.0; grid.cells()];
    for i in 0..grid.nx {
        let im = grid.wrap(i as isize - 1);
        for k in 0..nz {
            let avg = 0.5 * (exner[im * nz + k] + exner[i * nz + k]);
            u[i * nz + k] = factor * (avg - c.exner_offset);
        }
    }
    u
}

/// Assembles a state from a temperature field using the hydrostatic,
/// geostrophic and thermal-wind steps.
pub fn balanced_state(
    theta: Vec<f64>,
    grid: &Grid,
    c: &PhysicalConstants,
    surface_exner: f64,
) -> Result<State, InitError> {
    let hydro = hydrostatic_density(&theta, grid, c, surface_exner)?;
    let v = geostrophic_v(&theta, &hydro.exner, grid, c);
    let u = initial_u(&hydro.exner, grid, c);
    let mut state = State::zeros(grid.layout());
    {
        let f = state.view_mut();
        f.u.copy_from_slice(&u);
        f.v.copy_from_slice(&v);
        f.theta.copy_from_slice(&theta);
        f.density.copy_from_slice(&hydro.density);
    }
    Ok(state)
}

/// Steady background sampled pointwise from the continuous profiles:
/// `θ_S = θ̄(z)`, `Π = Π̄(z)`, `v = 0` and thermal-wind `u`. Unlike
/// [`balanced_state`] it is not in discrete hydrostatic balance, so its
/// residual tendencies measure the truncation error of the scheme.
pub fn analytic_balanced_state(
    grid: &Grid,
    c: &PhysicalConstants,
    surface_exner: f64,
) -> Result<State, InitError> {
    let nz = grid.nz;
    let mut theta = vec![0.0; grid.cells()];
    let mut exner = vec![0.0; grid.cells()];
    let mut density = vec![0.0; grid.cells()];
    for n in 0..grid.cells() {
        let z = grid.z_center[n % nz];
        theta[n] = background_theta(z, c);
        exner[n] = background_exner(z, surface_exner, c);
        density[n] = density_from_exner(exner[n], theta[n], c)?;
    }
    let u = initial_u(&exner, grid, c);
    let mut state = State::zeros(grid.layout());
    {
        let f = state.view_mut();
        f.u.copy_from_slice(&u);
        f.theta.copy_from_slice(&theta);
        f.density.copy_from_slice(&density);
    }
    Ok(state)
}

/// Initial state of the experiment, before breeding.
pub fn initial_state(config: &RunConfig) -> Result<(Grid, State), crate::Error> {
    let grid = build_grid(config)?;
    let params = NormalModeParams::from_config(config)?;
    let theta = perturbed_theta(&grid, &params, &config.constants);
    let state = balanced_state(theta, &grid, &config.constants, config.surface_exner)?;
    Ok((grid, state))
}

/// Output of [`breed`].
#[derive(Debug, Clone)]
pub struct BreedOutcome {
    /// State at the end of breeding with its clock reset to zero.
    pub state: State,
    /// Simulated breeding duration, s.
    pub t_breed: f64,
    pub steps: u64,
}

/// Integrates until `max|v| ≥ breed_vmax`, checking after every step, then
/// resets the clock.
pub fn breed(
    mut state: State,
    config: &RunConfig,
    stepper: &mut dyn Stepper,
) -> Result<BreedOutcome, crate::Error> {
    let threshold = config.breed_vmax;
    let max_steps = (config.breed_max_days * 86_400.0 / config.dt).ceil() as u64;
    let start = state.t;
    let mut steps = 0;
    while state.max_abs_v() < threshold {
        if steps >= max_steps {
            return Err(InitError::BreedingThreshold {
                threshold,
                days: config.breed_max_days,
                max_v: state.max_abs_v(),
            }
            .into());
        }
        stepper.step(&mut state)?;
        steps += 1;
        state.t = start + steps as f64 * config.dt;
        if steps % 72 == 0 {
            debug!(
                "breeding: t = {:.1} h, max|v| = {:.4}",
                state.t / 3600.0,
                state.max_abs_v()
            );
        }
    }
    let t_breed = state.t - start;
    info!(
        "breeding reached max|v| = {:.4} m/s after {:.2} h",
        state.max_abs_v(),
        t_breed / 3600.0
    );
    state.t = 0.0;
    Ok(BreedOutcome {
        state,
        t_breed,
        steps,
    })
}
