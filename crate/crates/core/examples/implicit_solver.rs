//! Implicit midpoint steps solved by Jacobian-free Newton-Krylov, with and
//! without the column block preconditioner.
//!
//! Usage: `cargo run --release --example implicit_solver [dt]`

use eady_slice::domain::{PreconditionerKind, RunConfig};
use eady_slice::init::initial_state;
use eady_slice::newton::SolverError;
use eady_slice::timestep::{ImplicitMidpoint, Stepper};
use eady_slice::Error;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dt: f64 = std::env::args().nth(1).map_or(Ok(300.0), |s| s.parse())?;
    for kind in [PreconditionerKind::ColumnBlock, PreconditionerKind::None] {
        let mut config = RunConfig {
            dt,
            ..RunConfig::default()
        };
        config.solver.preconditioner = kind;
        let (grid, mut state) = initial_state(&config)?;
        let mut stepper = ImplicitMidpoint::from_config(&config, grid);
        let start = std::time::Instant::now();
        let (mut newton, mut gmres) = (0, 0);
        let steps = 12;
        for n in 0..steps {
            match stepper.step(&mut state) {
                Ok(stats) => {
                    newton += stats.newton_iterations;
                    gmres += stats.linear_iterations_total;
                }
                Err(Error::Solver(SolverError::NewtonNoConvergence { stats })) => {
                    println!(
                        "{:<12} dt {dt} s: step {n} failed after {} Newton and {} GMRES iterations (residual {:.2e})",
                        kind.as_str(),
                        stats.newton_iterations,
                        stats.linear_iterations_total,
                        stats.final_residual_norm
                    );
                    break;
                }
                Err(e) => return Err(e.into()),
            }
            if n + 1 < steps {
                continue;
            }
            println!(
            "{:<12} dt {dt} s: {:.1} Newton and {:.1} GMRES iterations per step, {:.1} ms per step",
            kind.as_str(),
            newton as f64 / steps as f64,
            gmres as f64 / steps as f64,
                1e3 * start.elapsed().as_secs_f64() / steps as f64
            );
        }
    }
    Ok(())
}
