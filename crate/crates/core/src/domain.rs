//! Physical constants, the staggered grid, prognostic state layout and the
//! run configuration.
//!
//! All quantities are SI. The grid is an Arakawa C-grid on
//! `[-L, L] × [0, H]`: `u` lives on x-faces, `w` on z-faces, and `v`,
//! `θ_S` and `D` at cell centres. Every field is stored column-contiguous
//! (index `i * rows + k`), which keeps per-column work cache friendly.

use std::fmt;

use thiserror::Error;

/// Dimensional constants of the slice model and the scalars derived from them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants {
    /// Half-width `L` of the periodic channel, m.
    pub half_width: f64,
    /// Domain height `H`, m.
    pub height: f64,
    /// Coriolis parameter `f`, s⁻¹.
    pub coriolis: f64,
    /// Gravitational acceleration `g`, m s⁻².
    pub gravity: f64,
    /// Reference pressure `p₀`, Pa.
    pub p0: f64,
    /// Reference potential temperature `θ₀`, K.
    pub theta0: f64,
    /// Vertical shear `Λ`, s⁻¹.
    pub shear: f64,
    /// Squared buoyancy frequency `N²`, s⁻².
    pub n2: f64,
    /// Exner offset `Π₀` in the geostrophic forcing terms.
    pub exner_offset: f64,
    /// Specific gas constant `R`, J kg⁻¹ K⁻¹.
    pub gas_constant: f64,
    /// Specific heat at constant pressure `c_p`, J kg⁻¹ K⁻¹.
    pub cp: f64,
    /// Representative velocity `u₀` used for Ro, Fr and solver scaling, m s⁻¹.
    pub reference_velocity: f64,
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        default_constants()
    }
}

/// The constants of the frontogenesis experiment.
pub fn default_constants() -> PhysicalConstants {
    PhysicalConstants {
        half_width: 1.0e6,
        height: 1.0e4,
        coriolis: 1.0e-4,
        gravity: 10.0,
        p0: 1.0e5,
        theta0: 300.0,
        shear: 1.0e-3,
        n2: 2.5e-5,
        exner_offset: 0.864,
        gas_constant: 287.0,
        cp: 1004.5,
        reference_velocity: 5.0,
    }
}

impl PhysicalConstants {
    /// `c_v = c_p − R`.
    pub fn cv(&self) -> f64 {
        self.cp - self.gas_constant
    }

    /// Exponent `R / c_v` of the combined Exner closure.
    pub fn kappa_v(&self) -> f64 {
        self.gas_constant / self.cv()
    }

    /// Background meridional temperature gradient `s = −θ₀ f Λ / g`, K m⁻¹.
    pub fn s(&self) -> f64 {
        -self.theta0 * self.coriolis * self.shear / self.gravity
    }

    /// Buoyancy frequency `N`, s⁻¹.
    pub fn buoyancy_frequency(&self) -> f64 {
        self.n2.sqrt()
    }

    pub fn rossby(&self) -> f64 {
        self.reference_velocity / (self.coriolis * self.half_width)
    }

    pub fn froude(&self) -> f64 {
        self.reference_velocity / (self.buoyancy_frequency() * self.height)
    }

    /// Burger number `Ro / Fr`.
    pub fn burger(&self) -> f64 {
        self.rossby() / self.froude()
    }

    /// Reference density `p₀ / (R θ₀)`, kg m⁻³.
    pub fn reference_density(&self) -> f64 {
        self.p0 / (self.gas_constant * self.theta0)
    }

    fn check(&self) -> Result<(), ConfigError> {
        let positive = [
            ("half_width", self.half_width),
            ("height", self.height),
            ("gravity", self.gravity),
            ("p0", self.p0),
            ("theta0", self.theta0),
            ("gas_constant", self.gas_constant),
            ("cp", self.cp),
            ("reference_velocity", self.reference_velocity),
            ("n2", self.n2),
            ("coriolis", self.coriolis),
        ];
        for (key, value) in positive {
            if !(value > 0.0 && value.is_finite()) {
                return Err(ConfigError::NonPositive { key, value });
            }
        }
        if !(self.cv() > 0.0) {
            return Err(ConfigError::NonPositiveCv);
        }
        if !self.shear.is_finite() || !self.exner_offset.is_finite() {
            return Err(ConfigError::NotFinite {
                key: "shear/exner_offset",
            });
        }
        Ok(())
    }
}

/// Uniform staggered mesh, periodic in x with rigid lids at `z = 0, H`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub nx: usize,
    pub nz: usize,
    pub dx: f64,
    pub dz: f64,
    pub half_width: f64,
    pub height: f64,
    /// Cell-centre x coordinates (`nx`).
    pub x_center: Vec<f64>,
    /// x-face coordinates (`nx`; face `i` is the left face of cell `i`).
    pub x_face: Vec<f64>,
    /// Cell-centre z coordinates (`nz`).
    pub z_center: Vec<f64>,
    /// z-face coordinates (`nz + 1`); `z_face[0] = 0`, `z_face[nz] = H`.
    pub z_face: Vec<f64>,
}

impl Grid {
    pub fn new(nx: usize, nz: usize, half_width: f64, height: f64) -> Result<Self, ConfigError> {
        if nx < MIN_CELLS {
            return Err(ConfigError::GridTooSmall {
                key: "nx",
                value: nx,
            });
        }
        if nz < MIN_CELLS {
            return Err(ConfigError::GridTooSmall {
                key: "nz",
                value: nz,
            });
        }
        if !(half_width > 0.0) {
            return Err(ConfigError::NonPositive {
                key: "half_width",
                value: half_width,
            });
        }
        if !(height > 0.0) {
            return Err(ConfigError::NonPositive {
                key: "height",
                value: height,
            });
        }
        let dx = 2.0 * half_width / nx as f64;
        let dz = height / nz as f64;
        let x_face: Vec<f64> = (0..nx).map(|i| -half_width + i as f64 * dx).collect();
        let x_center = x_face.iter().map(|&x| x + 0.5 * dx).collect();
        let mut z_face: Vec<f64> = (0..=nz).map(|k| k as f64 * dz).collect();
        z_face[nz] = height;
        let z_center = z_face[..nz].iter().map(|&z| z + 0.5 * dz).collect();
        Ok(Grid {
            nx,
            nz,
            dx,
            dz,
            half_width,
            height,
            x_center,
            x_face,
            z_center,
            z_face,
        })
    }

    /// Area of one cell, m² (per unit y-width).
    pub fn cell_area(&self) -> f64 {
        self.dx * self.dz
    }

    /// Total slice area `2 L H`.
    pub fn domain_area(&self) -> f64 {
        2.0 * self.half_width * self.height
    }

    pub fn cells(&self) -> usize {
        self.nx * self.nz
    }

    /// Periodic column index.
    #[inline]
    pub fn wrap(&self, i: isize) -> usize {
        i.rem_euclid(self.nx as isize) as usize
    }

    #[inline]
    pub fn center(&self, i: usize, k: usize) -> usize {
        i * self.nz + k
    }

    #[inline]
    pub fn w_index(&self, i: usize, k: usize) -> usize {
        i * (self.nz + 1) + k
    }

    pub fn layout(&self) -> Layout {
        Layout::new(self.nx, self.nz)
    }
}

pub const MIN_CELLS: usize = 4;

/// `build_grid` for a run configuration.
pub fn build_grid(config: &RunConfig) -> Result<Grid, ConfigError> {
    Grid::new(
        config.nx,
        config.nz,
        config.constants.half_width,
        config.constants.height,
    )
}

/// Offsets of the five prognostic fields inside one packed vector:
/// `[u | w | v | θ_S | D]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Layout {
    pub nx: usize,
    pub nz: usize,
}

/// Borrowed views of the five fields of a packed vector.
#[derive(Debug, Clone, Copy)]
pub struct FieldView<'a> {
    pub u: &'a [f64],
    pub w: &'a [f64],
    pub v: &'a [f64],
    pub theta: &'a [f64],
    pub density: &'a [f64],
}

#[derive(Debug)]
pub struct FieldViewMut<'a> {
    pub u: &'a mut [f64],
    pub w: &'a mut [f64],
    pub v: &'a mut [f64],
    pub theta: &'a mut [f64],
    pub density: &'a mut [f64],
}

impl Layout {
    pub fn new(nx: usize, nz: usize) -> Self {
        Layout { nx, nz }
    }

    pub fn cells(&self) -> usize {
        self.nx * self.nz
    }

    pub fn w_len(&self) -> usize {
        self.nx * (self.nz + 1)
    }

    pub fn len(&self) -> usize {
        4 * self.cells() + self.w_len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Start offsets of `u, w, v, θ_S, D`.
    pub fn offsets(&self) -> [usize; 5] {
        let c = self.cells();
        let w = self.w_len();
        [0, c, c + w, 2 * c + w, 3 * c + w]
    }

    pub fn split<'a>(&self, x: &'a [f64]) -> FieldView<'a> {
        assert_eq!(
            x.len(),
            self.len(),
            "packed vector length does not match layout"
        );
        let c = self.cells();
        let (u, rest) = x.split_at(c);
        let (w, rest) = rest.split_at(self.w_len());
        let (v, rest) = rest.split_at(c);
        let (theta, density) = rest.split_at(c);
        FieldView {
            u,
            w,
            v,
            theta,
            density,
        }
    }

    pub fn split_mut<'a>(&self, x: &'a mut [f64]) -> FieldViewMut<'a> {
        assert_eq!(
            x.len(),
            self.len(),
            "packed vector length does not match layout"
        );
        let c = self.cells();
        let (u, rest) = x.split_at_mut(c);
        let (w, rest) = rest.split_at_mut(self.w_len());
        let (v, rest) = rest.split_at_mut(c);
        let (theta, density) = rest.split_at_mut(c);
        FieldViewMut {
            u,
            w,
            v,
            theta,
            density,
        }
    }

    /// Per-component nondimensionalisation scales: `u₀` for velocities,
    /// `θ₀` for θ_S and `p₀/(Rθ₀)` for density.
    pub fn scales(&self, c: &PhysicalConstants) -> Vec<f64> {
        let mut s = vec![0.0; self.len()];
        let o = self.offsets();
        s[o[0]..o[3]].fill(c.reference_velocity);
        s[o[3]..o[4]].fill(c.theta0);
        s[o[4]..].fill(c.reference_density());
        s
    }
}

/// Prognostic state: packed `[u | w | v | θ_S | D]` plus model time.
#[derive(Clone, PartialEq)]
pub struct State {
    pub t: f64,
    layout: Layout,
    data: Vec<f64>,
}

impl fmt::Debug for State {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("State")
            .field("t", &self.t)
            .field("nx", &self.layout.nx)
            .field("nz", &self.layout.nz)
            .finish()
    }
}

impl State {
    pub fn zeros(layout: Layout) -> Self {
        State {
            t: 0.0,
            layout,
            data: vec![0.0; layout.len()],
        }
    }

    pub fn from_packed(layout: Layout, t: f64, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), layout.len());
        State { t, layout, data }
    }

    pub fn layout(&self) -> Layout {
        self.layout
    }

    pub fn packed(&self) -> &[f64] {
        &self.data
    }

    pub fn packed_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn view(&self) -> FieldView<'_> {
        self.layout.split(&self.data)
    }

    pub fn view_mut(&mut self) -> FieldViewMut<'_> {
        self.layout.split_mut(&mut self.data)
    }

    pub fn u(&self) -> &[f64] {
        self.view().u
    }
    pub fn w(&self) -> &[f64] {
        self.view().w
    }
    pub fn v(&self) -> &[f64] {
        self.view().v
    }
    pub fn theta(&self) -> &[f64] {
        self.view().theta
    }
    pub fn density(&self) -> &[f64] {
        self.view().density
    }

    /// Largest `|v|` over cell centres.
    pub fn max_abs_v(&self) -> f64 {
        max_abs(self.v())
    }

    pub fn max_abs_w(&self) -> f64 {
        max_abs(self.w())
    }

    /// Forces `w = 0` on the floor and lid face rows.
    pub fn zero_boundary_w(&mut self) {
        let nz = self.layout.nz;
        zero_boundary_rows(self.view_mut().w, nz);
    }

    /// Checks `D > 0`, `θ_S > 0`, finiteness, and the rigid-lid condition.
    pub fn check_admissible(&self) -> Result<(), StateError> {
        let view = self.view();
        if let Some(idx) = view
            .density
            .iter()
            .position(|&d| !(d > 0.0 && d.is_finite()))
        {
            return Err(StateError::NonPositiveDensity {
                index: idx,
                value: view.density[idx],
            });
        }
        if let Some(idx) = view.theta.iter().position(|&t| !(t > 0.0 && t.is_finite())) {
            return Err(StateError::NonPositiveTheta {
                index: idx,
                value: view.theta[idx],
            });
        }
        if self.data.iter().any(|x| !x.is_finite()) {
            return Err(StateError::NonFinite);
        }
        let nz = self.layout.nz;
        for i in 0..self.layout.nx {
            let col = &view.w[i * (nz + 1)..(i + 1) * (nz + 1)];
            if col[0] != 0.0 || col[nz] != 0.0 {
                return Err(StateError::BoundaryVelocity { column: i });
            }
        }
        Ok(())
    }
}

pub(crate) fn zero_boundary_rows(w: &mut [f64], nz: usize) {
    for col in w.chunks_exact_mut(nz + 1) {
        col[0] = 0.0;
        col[nz] = 0.0;
    }
}

/// Largest absolute value, 0 for an empty slice.
pub fn max_abs(x: &[f64]) -> f64 {
    x.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StateError {
    #[error("non-positive density {value} at cell {index}")]
    NonPositiveDensity { index: usize, value: f64 },
    #[error("non-positive potential temperature {value} at cell {index}")]
    NonPositiveTheta { index: usize, value: f64 },
    #[error("non-finite value in state")]
    NonFinite,
    #[error("nonzero w on a rigid boundary in column {column}")]
    BoundaryVelocity { column: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Integrator {
    ExplicitSsprk3,
    ImplicitMidpoint,
}

impl Integrator {
    pub const ALLOWED: &'static str = "explicit-ssprk3, implicit-midpoint";

    pub fn as_str(&self) -> &'static str {
        match self {
            Integrator::ExplicitSsprk3 => "explicit-ssprk3",
            Integrator::ImplicitMidpoint => "implicit-midpoint",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "explicit-ssprk3" => Some(Integrator::ExplicitSsprk3),
            "implicit-midpoint" => Some(Integrator::ImplicitMidpoint),
            _ => None,
        }
    }
}

/// How the momentum nonlinearity `(𝐮·∇)𝐮` is written.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VelocityForm {
    Advective,
    VectorInvariant,
}

impl VelocityForm {
    pub const ALLOWED: &'static str = "advective, vector-invariant";

    pub fn as_str(&self) -> &'static str {
        match self {
            VelocityForm::Advective => "advective",
            VelocityForm::VectorInvariant => "vector-invariant",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "advective" => Some(VelocityForm::Advective),
            "vector-invariant" => Some(VelocityForm::VectorInvariant),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PreconditionerKind {
    None,
    ColumnBlock,
}

impl PreconditionerKind {
    pub const ALLOWED: &'static str = "none, column-block";

    pub fn as_str(&self) -> &'static str {
        match self {
            PreconditionerKind::None => "none",
            PreconditionerKind::ColumnBlock => "column-block",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "none" => Some(PreconditionerKind::None),
            "column-block" => Some(PreconditionerKind::ColumnBlock),
            _ => None,
        }
    }
}

/// RMSV weighting.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RmsvWeighting {
    Area,
    Mass,
}

impl RmsvWeighting {
    pub const ALLOWED: &'static str = "area, mass";

    pub fn as_str(&self) -> &'static str {
        match self {
            RmsvWeighting::Area => "area",
            RmsvWeighting::Mass => "mass",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "area" => Some(RmsvWeighting::Area),
            "mass" => Some(RmsvWeighting::Mass),
            _ => None,
        }
    }
}

/// Newton / GMRES controls for the implicit midpoint solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    /// Absolute tolerance on the RMS of the nondimensional residual.
    pub newton_abs_tol: f64,
    /// Tolerance relative to the residual of the initial guess.
    pub newton_rel_tol: f64,
    pub newton_max_iters: usize,
    pub linear_rel_tol: f64,
    pub linear_max_iters: usize,
    pub linear_restart: usize,
    /// Multiplier on `√ε_mach` in the finite-difference directional derivative.
    pub jacobian_fd_scale: f64,
    pub preconditioner: PreconditionerKind,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            newton_abs_tol: 1.0e-10,
            newton_rel_tol: 1.0e-8,
            newton_max_iters: 30,
            linear_rel_tol: 1.0e-4,
            linear_max_iters: 300,
            linear_restart: 30,
            jacobian_fd_scale: 1.0,
            preconditioner: PreconditionerKind::ColumnBlock,
        }
    }
}

/// Everything needed to reproduce one experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub constants: PhysicalConstants,
    pub nx: usize,
    pub nz: usize,
    /// Time step, s.
    pub dt: f64,
    pub integrator: Integrator,
    pub velocity_form: VelocityForm,
    /// Upwind order (1 or 3) for θ_S and v transport.
    pub scalar_upwind_order: u8,
    /// Replace every upwind stencil (scalars and momentum) by its centred
    /// counterpart; used for conservation checks.
    pub centered_advection: bool,
    /// Normal-mode perturbation amplitude `a`, m s⁻¹.
    pub amplitude: f64,
    /// Breeding stops once `max|v|` reaches this value, m s⁻¹.
    pub breed_vmax: f64,
    /// Breeding gives up after this many simulated days.
    pub breed_max_days: f64,
    /// Surface Exner value of the isothermal background profile whose lid
    /// value anchors the hydrostatic column solves.
    pub surface_exner: f64,
    /// Length of the post-breeding integration, days.
    pub run_days: f64,
    /// Snapshot cadence, s.
    pub snapshot_interval: f64,
    /// Diagnostic time-series cadence, s.
    pub timeseries_interval: f64,
    /// Checkpoint cadence, s (0 disables).
    pub checkpoint_interval: f64,
    pub solver: SolverConfig,
    /// Acoustic Courant-number cap for the explicit integrator.
    pub cfl_cap: f64,
    pub rmsv_weighting: RmsvWeighting,
    pub output_dir: String,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            constants: default_constants(),
            nx: 30,
            nz: 30,
            dt: 300.0,
            integrator: Integrator::ImplicitMidpoint,
            velocity_form: VelocityForm::Advective,
            scalar_upwind_order: 3,
            centered_advection: false,
            amplitude: -7.5,
            breed_vmax: 3.0,
            breed_max_days: 10.0,
            surface_exner: 1.0,
            run_days: 25.0,
            snapshot_interval: 43_200.0,
            timeseries_interval: 3_600.0,
            checkpoint_interval: 0.0,
            solver: SolverConfig::default(),
            cfl_cap: 0.9,
            rmsv_weighting: RmsvWeighting::Area,
            output_dir: "output".to_string(),
        }
    }
}

impl RunConfig {
    /// Number of steps per `interval` seconds; assumes a validated config.
    pub fn steps_per(&self, interval: f64) -> u64 {
        (interval / self.dt).round() as u64
    }

    /// Total number of post-breeding steps.
    pub fn total_steps(&self) -> u64 {
        (self.run_days * 86_400.0 / self.dt).round() as u64
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("nonpositive timestep (key `dt` = {0})")]
    NonPositiveTimestep(f64),
    #[error("cadence not a multiple of Δt (key `{key}` = {value}, dt = {dt})")]
    CadenceNotMultiple {
        key: &'static str,
        value: f64,
        dt: f64,
    },
    #[error("too few cells (key `{key}` = {value}, need at least {MIN_CELLS})")]
    GridTooSmall { key: &'static str, value: usize },
    #[error("non-positive value (key `{key}` = {value})")]
    NonPositive { key: &'static str, value: f64 },
    #[error("non-finite value (key `{key}`)")]
    NotFinite { key: &'static str },
    #[error("c_v = cp - gas_constant must be positive (keys `cp`, `gas_constant`)")]
    NonPositiveCv,
    #[error("unsupported upwind order (key `scalar_upwind_order` = {0}; allowed: 1, 3)")]
    UpwindOrder(u8),
    #[error("iteration cap must be at least 1 (key `{key}`)")]
    ZeroIterationCap { key: &'static str },
    #[error("run length is not a whole number of steps (key `run_days` = {0})")]
    RunLength(f64),
    #[error("invalid value `{value}` for key `{key}` (allowed: {allowed})")]
    InvalidChoice {
        key: String,
        value: String,
        allowed: &'static str,
    },
    #[error("cannot parse `{value}` for key `{key}`")]
    InvalidNumber { key: String, value: String },
    #[error("unknown key `{key}` on line {line}")]
    UnknownKey { key: String, line: usize },
    #[error("line {line}: expected `key = value`, got `{text}`")]
    Syntax { line: usize, text: String },
    #[error("unknown key `{0}` in environment override")]
    UnknownEnvKey(String),
}

fn is_multiple(interval: f64, dt: f64) -> bool {
    let ratio = interval / dt;
    ratio >= 1.0 - 1e-9 && (ratio - ratio.round()).abs() <= 1e-9 * ratio.max(1.0)
}

/// Returns the config unchanged when every invariant holds, or the first
/// violation with the offending key.
pub fn validate_config(config: RunConfig) -> Result<RunConfig, ConfigError> {
    if !(config.dt > 0.0) || !config.dt.is_finite() {
        return Err(ConfigError::NonPositiveTimestep(config.dt));
    }
    if config.nx < MIN_CELLS {
        return Err(ConfigError::GridTooSmall {
            key: "nx",
            value: config.nx,
        });
    }
    if config.nz < MIN_CELLS {
        return Err(ConfigError::GridTooSmall {
            key: "nz",
            value: config.nz,
        });
    }
    config.constants.check()?;
    if !(config.scalar_upwind_order == 1 || config.scalar_upwind_order == 3) {
        return Err(ConfigError::UpwindOrder(config.scalar_upwind_order));
    }
    for (key, value) in [
        ("snapshot_interval", config.snapshot_interval),
        ("timeseries_interval", config.timeseries_interval),
    ] {
        if !is_multiple(value, config.dt) {
            return Err(ConfigError::CadenceNotMultiple {
                key,
                value,
                dt: config.dt,
            });
        }
    }
    if config.checkpoint_interval != 0.0 && !is_multiple(config.checkpoint_interval, config.dt) {
        return Err(ConfigError::CadenceNotMultiple {
            key: "checkpoint_interval",
            value: config.checkpoint_interval,
            dt: config.dt,
        });
    }
    if !(config.run_days >= 0.0)
        || (config.run_days > 0.0 && !is_multiple(config.run_days * 86_400.0, config.dt))
    {
        return Err(ConfigError::RunLength(config.run_days));
    }
    for (key, value) in [
        ("breed_vmax", config.breed_vmax),
        ("breed_max_days", config.breed_max_days),
        ("surface_exner", config.surface_exner),
        ("cfl_cap", config.cfl_cap),
        ("newton_abs_tol", config.solver.newton_abs_tol),
        ("newton_rel_tol", config.solver.newton_rel_tol),
        ("linear_rel_tol", config.solver.linear_rel_tol),
        ("jacobian_fd_scale", config.solver.jacobian_fd_scale),
    ] {
        if !(value > 0.0 && value.is_finite()) {
            return Err(ConfigError::NonPositive { key, value });
        }
    }
    if !config.amplitude.is_finite() {
        return Err(ConfigError::NotFinite { key: "amplitude" });
    }
    for (key, value) in [
        ("newton_max_iters", config.solver.newton_max_iters),
        ("linear_max_iters", config.solver.linear_max_iters),
        ("linear_restart", config.solver.linear_restart),
    ] {
        if value == 0 {
            return Err(ConfigError::ZeroIterationCap { key });
        }
    }
    Ok(config)
}
