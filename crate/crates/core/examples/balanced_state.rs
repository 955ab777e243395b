//! Builds the initial state (normal-mode temperature, hydrostatic density,
//! geostrophic v, thermal-wind u) and shows how close to steady it is.
//!
//! Usage: `cargo run --release --example balanced_state [nx] [nz] [amplitude]`

use eady_slice::domain::{build_grid, max_abs, RunConfig, VelocityForm};
use eady_slice::dynamics::tendencies;
use eady_slice::init::{analytic_balanced_state, hydrostatic_density, initial_state};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let mut config = RunConfig::default();
    if let Some(nx) = args.first() {
        config.nx = nx.parse()?;
    }
    if let Some(nz) = args.get(1) {
        config.nz = nz.parse()?;
    }
    if let Some(a) = args.get(2) {
        config.amplitude = a.parse()?;
    }
    let c = config.constants;
    let (grid, state) = initial_state(&config)?;
    let hydro = hydrostatic_density(state.theta(), &grid, &c, config.surface_exner)?;
    let worst = hydro
        .residual_history
        .iter()
        .map(|h| h.len() - 1)
        .max()
        .unwrap_or(0);
    println!(
        "grid {}x{}, amplitude {} m/s",
        grid.nx, grid.nz, config.amplitude
    );
    println!("hydrostatic columns converge in at most {worst} Newton iterations");
    println!(
        "max|u| {:.3} m/s, max|v| {:.3} m/s",
        max_abs(state.u()),
        state.max_abs_v()
    );

    let t = tendencies(&state, VelocityForm::Advective, &config)?;
    let [du, dw, dv, dth, dd] = t.max_abs();
    println!("discretely balanced: max tendencies u {du:.2e} w {dw:.2e} v {dv:.2e} theta {dth:.2e} D {dd:.2e}");

    // the continuous steady state sampled on the grid carries truncation error
    let rest = RunConfig {
        amplitude: 0.0,
        ..config.clone()
    };
    let sampled = analytic_balanced_state(&build_grid(&rest)?, &c, rest.surface_exner)?;
    let [du, dw, dv, dth, dd] = tendencies(&sampled, VelocityForm::Advective, &rest)?.max_abs();
    println!("sampled steady state: max tendencies u {du:.2e} w {dw:.2e} v {dv:.2e} theta {dth:.2e} D {dd:.2e}");
    Ok(())
}
