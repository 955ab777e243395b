//! Semi-discrete right-hand side of the slice equations
//!
//! ```text
//! ∂𝐮/∂t + (𝐮·∇)𝐮 − f v x̂ = −c_p θ_S ∇Π − g ẑ
//! ∂v/∂t + (𝐮·∇)v + f u   = c_p s (Π − Π₀)
//! ∂θ_S/∂t + (𝐮·∇)θ_S     = −v s
//! ∂D/∂t + ∇·(D𝐮)         = 0
//! ```
//!
//! on the staggered grid. The pressure gradient is a compact face
//! difference of centre `Π` times face-averaged `θ_S`; continuity is in
//! flux form with arithmetic-mean face densities, so total mass telescopes.

use crate::advection::{
    add_momentum_advection_advective, add_momentum_advection_vector_invariant,
    add_scalar_advection, Scheme,
};
use crate::domain::{FieldView, Grid, Layout, PhysicalConstants, RunConfig, State, VelocityForm};
use crate::thermo::{exner_field, ThermoError};

/// Spatial discretisation switches.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DynamicsOptions {
    pub velocity_form: VelocityForm,
    pub scalar_upwind_order: u8,
    pub centered_advection: bool,
}

impl Default for DynamicsOptions {
    fn default() -> Self {
        DynamicsOptions {
            velocity_form: VelocityForm::Advective,
            scalar_upwind_order: 3,
            centered_advection: false,
        }
    }
}

impl DynamicsOptions {
    pub fn from_config(config: &RunConfig) -> Self {
        DynamicsOptions {
            velocity_form: config.velocity_form,
            scalar_upwind_order: config.scalar_upwind_order,
            centered_advection: config.centered_advection,
        }
    }

    fn scalar_scheme(&self) -> Scheme {
        Scheme::scalar(self.scalar_upwind_order, self.centered_advection)
    }

    fn momentum_scheme(&self) -> Scheme {
        if self.centered_advection {
            Scheme::Centered
        } else {
            Scheme::Upwind1
        }
    }
}

/// Time derivatives of the five prognostic fields, packed like [`State`].
#[derive(Debug, Clone, PartialEq)]
pub struct Tendency {
    layout: Layout,
    data: Vec<f64>,
}

impl Tendency {
    pub fn zeros(layout: Layout) -> Self {
        Tendency {
            layout,
            data: vec![0.0; layout.len()],
        }
    }

    pub fn packed(&self) -> &[f64] {
        &self.data
    }

    pub fn view(&self) -> FieldView<'_> {
        self.layout.split(&self.data)
    }

    pub fn max_abs(&self) -> [f64; 5] {
        let v = self.view();
        [v.u, v.w, v.v, v.theta, v.density].map(crate::domain::max_abs)
    }
}

/// Right-hand-side evaluator with its own scratch buffers.
#[derive(Debug, Clone)]
pub struct Dynamics {
    grid: Grid,
    constants: PhysicalConstants,
    options: DynamicsOptions,
    pi: Vec<f64>,
    eta: Vec<f64>,
    ke: Vec<f64>,
}

impl Dynamics {
    pub fn new(grid: Grid, constants: PhysicalConstants, options: DynamicsOptions) -> Self {
        let cells = grid.cells();
        let corners = grid.nx * (grid.nz + 1);
        Dynamics {
            grid,
            constants,
            options,
            pi: vec![0.0; cells],
            eta: vec![0.0; corners],
            ke: vec![0.0; cells],
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn constants(&self) -> &PhysicalConstants {
        &self.constants
    }

    pub fn options(&self) -> &DynamicsOptions {
        &self.options
    }

    pub fn layout(&self) -> Layout {
        self.grid.layout()
    }

    /// Exner pressure from the most recent evaluation.
    pub fn last_exner(&self) -> &[f64] {
        &self.pi
    }

    /// Writes `F(x)` into `out` for a packed state vector `x`.
    pub fn evaluate(&mut self, x: &[f64], out: &mut [f64]) -> Result<(), ThermoError> {
        let layout = self.grid.layout();
        let f = layout.split(x);
        exner_field(f.density, f.theta, &self.constants, &mut self.pi)?;
        out.fill(0.0);
        let o = layout.split_mut(out);
        let grid = &self.grid;
        let c = &self.constants;
        let (nx, nz) = (grid.nx, grid.nz);
        let nzw = nz + 1;
        let rdx = 1.0 / grid.dx;
        let rdz = 1.0 / grid.dz;
        let cp = c.cp;
        let fcor = c.coriolis;
        let s = c.s();
        let pi = &self.pi;

        match self.options.velocity_form {
            VelocityForm::Advective => {
                add_momentum_advection_advective(&f, grid, self.options.momentum_scheme(), o.u, o.w)
            }
            VelocityForm::VectorInvariant => add_momentum_advection_vector_invariant(
                &f,
                grid,
                &mut self.eta,
                &mut self.ke,
                o.u,
                o.w,
            ),
        }
        let scalar = self.options.scalar_scheme();
        add_scalar_advection(f.v, f.u, f.w, grid, scalar, o.v);
        add_scalar_advection(f.theta, f.u, f.w, grid, scalar, o.theta);

        for i in 0..nx {
            let im = grid.wrap(i as isize - 1);
            let ip = grid.wrap(i as isize + 1);
            for k in 0..nz {
                let cc = i * nz + k;
                let cm = im * nz + k;
                // u on x-face i: Coriolis and horizontal pressure gradient
                let theta_f = 0.5 * (f.theta[cm] + f.theta[cc]);
                let v_f = 0.5 * (f.v[cm] + f.v[cc]);
                o.u[cc] += fcor * v_f - cp * theta_f * (pi[cc] - pi[cm]) * rdx;
                // centre equations
                let u_c = 0.5 * (f.u[cc] + f.u[ip * nz + k]);
                o.v[cc] += -fcor * u_c + cp * s * (pi[cc] - c.exner_offset);
                o.theta[cc] -= f.v[cc] * s;
            }
            for k in 1..nz {
                let cw = i * nzw + k;
                let theta_f = 0.5 * (f.theta[i * nz + k - 1] + f.theta[i * nz + k]);
                o.w[cw] += -cp * theta_f * (pi[i * nz + k] - pi[i * nz + k - 1]) * rdz - c.gravity;
            }
        }

        // continuity: -div(D u) with arithmetic-mean face densities
        for i in 0..nx {
            let im = grid.wrap(i as isize - 1);
            for k in 0..nz {
                let flux =
                    0.5 * (f.density[im * nz + k] + f.density[i * nz + k]) * f.u[i * nz + k] * rdx;
                o.density[im * nz + k] -= flux;
                o.density[i * nz + k] += flux;
            }
            for k in 1..nz {
                let flux = 0.5
                    * (f.density[i * nz + k - 1] + f.density[i * nz + k])
                    * f.w[i * nzw + k]
                    * rdz;
                o.density[i * nz + k - 1] -= flux;
                o.density[i * nz + k] += flux;
            }
        }

        crate::domain::zero_boundary_rows(o.w, nz);
        Ok(())
    }

    pub fn tendencies(&mut self, state: &State) -> Result<Tendency, ThermoError> {
        let mut t = Tendency::zeros(self.layout());
        self.evaluate(state.packed(), &mut t.data)?;
        Ok(t)
    }
}

/// One-shot evaluation of the right-hand side for `state`.
pub fn tendencies(
    state: &State,
    form: VelocityForm,
    config: &RunConfig,
) -> Result<Tendency, crate::Error> {
    let grid = crate::domain::build_grid(config)?;
    let options = DynamicsOptions {
        velocity_form: form,
        ..DynamicsOptions::from_config(config)
    };
    let mut dynamics = Dynamics::new(grid, config.constants, options);
    Ok(dynamics.tendencies(state)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::init::initial_state;
    use proptest::prelude::*;

    fn config(nx: usize, nz: usize, amplitude: f64) -> RunConfig {
        RunConfig {
            nx,
            nz,
            amplitude,
            ..RunConfig::default()
        }
    }

    /// Balanced initial state with a deterministic wiggle on every field.
    fn disturbed(nx: usize, nz: usize) -> (Grid, State) {
        let (grid, mut s) = initial_state(&config(nx, nz, 7.0)).unwrap();
        let f = s.view_mut();
        for (n, u) in f.u.iter_mut().enumerate() {
            *u += ((n * 37) % 11) as f64 * 0.3 - 1.5;
        }
        for (n, w) in f.w.iter_mut().enumerate() {
            *w += ((n * 53) % 7) as f64 * 0.01 - 0.03;
        }
        for (n, d) in f.density.iter_mut().enumerate() {
            *d *= 1.0 + ((n * 17) % 5) as f64 * 1e-3;
        }
        s.zero_boundary_w();
        (grid, s)
    }

    fn dynamics(grid: &Grid, form: VelocityForm) -> Dynamics {
        let options = DynamicsOptions {
            velocity_form: form,
            ..DynamicsOptions::default()
        };
        Dynamics::new(grid.clone(), RunConfig::default().constants, options)
    }

    #[test]
    fn mass_tendency_telescopes() {
        let (grid, s) = disturbed(12, 9);
        for form in [VelocityForm::Advective, VelocityForm::VectorInvariant] {
            let t = dynamics(&grid, form).tendencies(&s).unwrap();
            let dd = t.view().density;
            let total: f64 = dd.iter().sum();
            let scale: f64 = dd.iter().map(|x| x.abs()).sum();
            assert!(scale > 0.0);
            assert!(total.abs() < 1e-13 * scale, "{total} vs {scale}");
        }
    }

    #[test]
    fn lid_and_floor_w_tendency_vanish() {
        let (grid, s) = disturbed(10, 7);
        for form in [VelocityForm::Advective, VelocityForm::VectorInvariant] {
            let t = dynamics(&grid, form).tendencies(&s).unwrap();
            let dw = t.view().w;
            for i in 0..grid.nx {
                assert_eq!(dw[i * (grid.nz + 1)], 0.0);
                assert_eq!(dw[i * (grid.nz + 1) + grid.nz], 0.0);
            }
        }
    }

    #[test]
    fn background_forcing_terms() {
        // at rest the only v and θ_S tendencies are the imposed-gradient terms
        let (grid, mut s) = disturbed(8, 6);
        s.view_mut().u.fill(0.0);
        s.view_mut().w.fill(0.0);
        let c = RunConfig::default().constants;
        let mut dynamics = dynamics(&grid, VelocityForm::Advective);
        let t = dynamics.tendencies(&s).unwrap();
        let pi = dynamics.last_exner().to_vec();
        for n in 0..grid.cells() {
            assert!((t.view().theta[n] + s.v()[n] * c.s()).abs() < 1e-18);
            let dv = c.cp * c.s() * (pi[n] - c.exner_offset);
            assert!((t.view().v[n] - dv).abs() < 1e-15 * dv.abs().max(1e-6));
        }
        // without the imposed gradient θ_S is untouched
        let flat = PhysicalConstants { shear: 0.0, ..c };
        let mut dynamics = Dynamics::new(grid.clone(), flat, DynamicsOptions::default());
        let t = dynamics.tendencies(&s).unwrap();
        assert!(t.view().theta.iter().chain(t.view().v).all(|&x| x == 0.0));
    }

    /// Largest vertical and horizontal momentum tendencies of the
    /// balanced initial state.
    fn balance_residual(nx: usize, nz: usize, amplitude: f64) -> (f64, f64) {
        let (grid, s) = initial_state(&config(nx, nz, amplitude)).unwrap();
        let t = dynamics(&grid, VelocityForm::Advective)
            .tendencies(&s)
            .unwrap();
        (
            crate::domain::max_abs(t.view().w),
            crate::domain::max_abs(t.view().u),
        )
    }

    #[test]
    fn balanced_state_is_nearly_steady() {
        let g = RunConfig::default().constants.gravity;
        let (dw, du) = balance_residual(16, 16, 0.0);
        assert!(dw < 1e-10 * g, "{dw}");
        assert!(du < 1e-12, "{du}");
        // with the perturbation the residual is a truncation error
        let (dw1, du1) = balance_residual(16, 16, 7.0);
        let (dw2, du2) = balance_residual(32, 32, 7.0);
        assert!(dw1 < 1e-10 * g && dw2 < 1e-10 * g, "{dw1} {dw2}");
        assert!(du2 < du1 / 2.5, "{du1} {du2}");
    }

    fn shift_cells(data: &[f64], nx: usize, col: usize, m: usize) -> Vec<f64> {
        (0..nx * col)
            .map(|n| data[((n / col + nx - m) % nx) * col + n % col])
            .collect()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn tendencies_commute_with_periodic_shift(m in 1usize..8, vi in any::<bool>()) {
            let (grid, s) = disturbed(8, 5);
            let (nx, nz) = (grid.nx, grid.nz);
            let shift = |x: &State| {
                let f = x.view();
                let mut out = State::zeros(grid.layout());
                let o = out.view_mut();
                o.u.copy_from_slice(&shift_cells(f.u, nx, nz, m));
                o.w.copy_from_slice(&shift_cells(f.w, nx, nz + 1, m));
                o.v.copy_from_slice(&shift_cells(f.v, nx, nz, m));
                o.theta.copy_from_slice(&shift_cells(f.theta, nx, nz, m));
                o.density.copy_from_slice(&shift_cells(f.density, nx, nz, m));
                out
            };
            let form = if vi { VelocityForm::VectorInvariant } else { VelocityForm::Advective };
            let mut dyn_ = dynamics(&grid, form);
            let t = dyn_.tendencies(&s).unwrap();
            let t_shift = dyn_.tendencies(&shift(&s)).unwrap();
            let expect = shift(&State::from_packed(grid.layout(), 0.0, t.packed().to_vec()));
            // equal up to the summation order of wrapped fluxes
            let (a, b) = (t_shift.view(), expect.view());
            for (x, y) in [(a.u, b.u), (a.w, b.w), (a.v, b.v), (a.theta, b.theta), (a.density, b.density)] {
                let scale = crate::domain::max_abs(y);
                for (p, q) in x.iter().zip(y) {
                    prop_assert!((p - q).abs() <= 1e-12 * scale);
                }
            }
        }
    }
}
