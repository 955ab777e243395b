//! Grows the normal-mode perturbation until max|v| reaches the breeding
//! threshold and reports how long it took.
//!
//! Usage: `cargo run --release --example breeding [nx] [nz] [dt]`

use eady_slice::diagnostics::rmsv;
use eady_slice::domain::RunConfig;
use eady_slice::driver::Simulation;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let mut config = RunConfig::default();
    if let Some(nx) = args.first() {
        config.nx = nx.parse()?;
    }
    if let Some(nz) = args.get(1) {
        config.nz = nz.parse()?;
    }
    if let Some(dt) = args.get(2) {
        config.dt = dt.parse()?;
    }
    let mut sim = Simulation::new(config)?;
    println!("initial max|v| {:.4} m/s", sim.state().max_abs_v());
    let start = std::time::Instant::now();
    let t_breed = sim.breed()?;
    println!(
        "reached max|v| {:.4} m/s after {:.2} h ({:.1} s wall); RMSV {:.4} m/s; clock reset to t = {}",
        sim.state().max_abs_v(),
        t_breed / 3600.0,
        start.elapsed().as_secs_f64(),
        rmsv(sim.state(), sim.grid()),
        sim.state().t
    );
    Ok(())
}
