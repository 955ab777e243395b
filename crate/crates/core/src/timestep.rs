//! Time integrators: the implicit midpoint rule solved by Newton–Krylov, and
//! an explicit SSPRK3 reference.

use log::trace;

use crate::domain::{
    Grid, Integrator, PhysicalConstants, PreconditionerKind, RunConfig, SolverConfig, State,
};
use crate::dynamics::{Dynamics, DynamicsOptions};
use crate::newton::{midpoint_solve, MidpointSystem, MidpointWorkspace, SolverError};
use crate::preconditioner::ColumnPreconditioner;
use crate::thermo::sound_speed;

pub use crate::newton::SolverStats;

/// Advances a state by one fixed step.
pub trait Stepper {
    /// Advances `state` in place by [`Stepper::dt`], including its clock.
    fn step(&mut self, state: &mut State) -> Result<SolverStats, crate::Error>;

    fn dt(&self) -> f64;
}

/// [`MidpointSystem`] for the slice right-hand side.
#[derive(Debug, Clone)]
pub struct SliceSystem {
    dynamics: Dynamics,
    scales: Vec<f64>,
    preconditioner: Option<ColumnPreconditioner>,
}

impl SliceSystem {
    pub fn new(dynamics: Dynamics, kind: PreconditionerKind) -> Self {
        let scales = dynamics.layout().scales(dynamics.constants());
        let preconditioner = match kind {
            PreconditionerKind::None => None,
            PreconditionerKind::ColumnBlock => Some(ColumnPreconditioner::new(dynamics.grid())),
        };
        SliceSystem {
            dynamics,
            scales,
            preconditioner,
        }
    }

    pub fn dynamics(&self) -> &Dynamics {
        &self.dynamics
    }

    pub fn dynamics_mut(&mut self) -> &mut Dynamics {
        &mut self.dynamics
    }
}

impl MidpointSystem for SliceSystem {
    fn rhs(&mut self, x: &[f64], out: &mut [f64]) -> Result<(), SolverError> {
        self.dynamics
            .evaluate(x, out)
            .map_err(|e| SolverError::Inadmissible(e.to_string()))
    }

    fn scales(&self) -> &[f64] {
        &self.scales
    }

    fn setup_preconditioner(&mut self, x_ref: &[f64], dt: f64) -> Result<(), SolverError> {
        if let Some(p) = self.preconditioner.as_mut() {
            p.setup(x_ref, dt, self.dynamics.grid(), self.dynamics.constants())?;
        }
        Ok(())
    }

    fn precondition(&mut self, r: &[f64], z: &mut [f64]) -> Result<(), SolverError> {
        match self.preconditioner.as_mut() {
            Some(p) => p.apply(self.dynamics.grid(), r, z),
            None => z.copy_from_slice(r),
        }
        Ok(())
    }
}

/// Implicit midpoint stepper.
///
/// After Newton converges the density is recomputed as
/// `D* = D + Δt F_D((x + x*)/2)`. The flux-form `F_D` sums to zero over the
/// domain, so total mass is conserved to round-off regardless of the Newton
/// tolerance; the correction itself is of the size of the residual.
#[derive(Debug, Clone)]
pub struct ImplicitMidpoint {
    system: SliceSystem,
    solver: SolverConfig,
    dt: f64,
    workspace: MidpointWorkspace,
    x_new: Vec<f64>,
    mid: Vec<f64>,
    f_mid: Vec<f64>,
}

impl ImplicitMidpoint {
    pub fn new(dynamics: Dynamics, dt: f64, solver: SolverConfig) -> Self {
        let n = dynamics.layout().len();
        ImplicitMidpoint {
            system: SliceSystem::new(dynamics, solver.preconditioner),
            solver,
            dt,
            workspace: MidpointWorkspace::default(),
            x_new: vec![0.0; n],
            mid: vec![0.0; n],
            f_mid: vec![0.0; n],
        }
    }

    pub fn from_config(config: &RunConfig, grid: Grid) -> Self {
        let dynamics = Dynamics::new(grid, config.constants, DynamicsOptions::from_config(config));
        Self::new(dynamics, config.dt, config.solver)
    }

    pub fn dynamics(&self) -> &Dynamics {
        self.system.dynamics()
    }

    fn advance(&mut self, state: &mut State) -> Result<SolverStats, SolverError> {
        let x = state.packed();
        self.x_new.copy_from_slice(x);
        let stats = midpoint_solve(
            &mut self.system,
            x,
            &mut self.x_new,
            self.dt,
            &self.solver,
            &mut self.workspace,
        )?;
        for ((m, a), b) in self.mid.iter_mut().zip(x).zip(&self.x_new) {
            *m = 0.5 * (a + b);
        }
        self.system.rhs(&self.mid, &mut self.f_mid)?;
        let od = state.layout().offsets()[4];
        for i in od..x.len() {
            self.x_new[i] = x[i] + self.dt * self.f_mid[i];
        }
        state.packed_mut().copy_from_slice(&self.x_new);
        state.zero_boundary_w();
        state.t += self.dt;
        trace!(
            "midpoint step: {} Newton, {} GMRES, residual {:e}",
            stats.newton_iterations,
            stats.linear_iterations_total,
            stats.final_residual_norm
        );
        Ok(stats)
    }
}

impl Stepper for ImplicitMidpoint {
    fn step(&mut self, state: &mut State) -> Result<SolverStats, crate::Error> {
        Ok(self.advance(state)?)
    }

    fn dt(&self) -> f64 {
        self.dt
    }
}

/// Three-stage strong-stability-preserving Runge–Kutta in Shu–Osher form.
pub fn ssprk3<E>(
    mut rhs: impl FnMut(&[f64], &mut [f64]) -> Result<(), E>,
    x: &mut [f64],
    dt: f64,
) -> Result<(), E> {
    let n = x.len();
    let mut k = vec![0.0; n];
    let mut y1 = vec![0.0; n];
    let mut y2 = vec![0.0; n];
    rhs(x, &mut k)?;
    for i in 0..n {
        y1[i] = x[i] + dt * k[i];
    }
    rhs(&y1, &mut k)?;
    for i in 0..n {
        y2[i] = 0.75 * x[i] + 0.25 * (y1[i] + dt * k[i]);
    }
    rhs(&y2, &mut k)?;
    for i in 0..n {
        x[i] = x[i] / 3.0 + 2.0 / 3.0 * (y2[i] + dt * k[i]);
    }
    Ok(())
}

/// Largest acoustic Courant number `c_s Δt / min(Δx, Δz)` of a state.
pub fn acoustic_courant(
    state: &State,
    grid: &Grid,
    c: &PhysicalConstants,
    dt: f64,
) -> Result<f64, crate::Error> {
    let f = state.view();
    let mut cmax = 0.0_f64;
    for (&d, &t) in f.density.iter().zip(f.theta) {
        let pi = crate::thermo::exner(d, t, c)?;
        cmax = cmax.max(sound_speed(pi, t, c));
    }
    Ok(cmax * dt / grid.dx.min(grid.dz))
}

/// Explicit SSPRK3 stepper; refuses steps above the acoustic Courant cap.
#[derive(Debug, Clone)]
pub struct Ssprk3 {
    dynamics: Dynamics,
    dt: f64,
    cfl_cap: f64,
}

impl Ssprk3 {
    pub fn new(dynamics: Dynamics, dt: f64, cfl_cap: f64) -> Self {
        Ssprk3 {
            dynamics,
            dt,
            cfl_cap,
        }
    }

    pub fn from_config(config: &RunConfig, grid: Grid) -> Self {
        let dynamics = Dynamics::new(grid, config.constants, DynamicsOptions::from_config(config));
        Self::new(dynamics, config.dt, config.cfl_cap)
    }
}

impl Stepper for Ssprk3 {
    fn step(&mut self, state: &mut State) -> Result<SolverStats, crate::Error> {
        let courant = acoustic_courant(
            state,
            self.dynamics.grid(),
            self.dynamics.constants(),
            self.dt,
        )?;
        if courant > self.cfl_cap {
            return Err(SolverError::Cfl {
                courant,
                cap: self.cfl_cap,
            }
            .into());
        }
        let dynamics = &mut self.dynamics;
        ssprk3(
            |x, out| dynamics.evaluate(x, out),
            state.packed_mut(),
            self.dt,
        )?;
        state.zero_boundary_w();
        state.check_admissible()?;
        state.t += self.dt;
        Ok(SolverStats {
            newton_iterations: 0,
            linear_iterations_total: 0,
            final_residual_norm: 0.0,
            converged: true,
        })
    }

    fn dt(&self) -> f64 {
        self.dt
    }
}

/// Stepper selected by `config.integrator`.
pub fn make_stepper(config: &RunConfig, grid: Grid) -> Box<dyn Stepper> {
    match config.integrator {
        Integrator::ImplicitMidpoint => Box::new(ImplicitMidpoint::from_config(config, grid)),
        Integrator::ExplicitSsprk3 => Box::new(Ssprk3::from_config(config, grid)),
    }
}

/// One implicit midpoint step of `state` with the settings of `config`.
pub fn step_implicit_midpoint(
    state: &State,
    config: &RunConfig,
) -> Result<(State, SolverStats), crate::Error> {
    let grid = crate::domain::build_grid(config)?;
    let mut stepper = ImplicitMidpoint::from_config(config, grid);
    let mut next = state.clone();
    let stats = stepper.step(&mut next)?;
    Ok((next, stats))
}

/// One SSPRK3 step of `state` with the settings of `config`.
pub fn step_ssprk3(state: &State, config: &RunConfig) -> Result<State, crate::Error> {
    let grid = crate::domain::build_grid(config)?;
    let mut stepper = Ssprk3::from_config(config, grid);
    let mut next = state.clone();
    stepper.step(&mut next)?;
    Ok(next)
}
