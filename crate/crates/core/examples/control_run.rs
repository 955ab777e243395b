//! The full experiment written to disk: breed, reset the clock, integrate
//! and emit the time series, VTK snapshots and checkpoints.
//!
//! Usage: `cargo run --release --example control_run [days] [out_dir]`

use eady_slice::diagnostics::local_maxima;
use eady_slice::domain::{validate_config, RunConfig};
use eady_slice::driver::{run_protocol, DirectorySink};
use eady_slice::io::read_timeseries;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let args: Vec<String> = std::env::args().skip(1).collect();
    let mut config = RunConfig::default();
    if let Some(days) = args.first() {
        config.run_days = days.parse()?;
    }
    config.output_dir = args
        .get(1)
        .cloned()
        .unwrap_or_else(|| "output/control".to_string());
    config.checkpoint_interval = 86_400.0;
    let config = validate_config(config)?;

    let mut sink = DirectorySink::create(&config.output_dir, &config, false)?;
    let summary = run_protocol(config.clone(), &mut sink)?;
    println!("bred in {:.2} h", summary.t_breed / 3600.0);

    let rows = read_timeseries(format!("{}/timeseries.csv", config.output_dir))?;
    let rmsv: Vec<f64> = rows.iter().map(|r| r.rmsv).collect();
    let range = rmsv.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
        - rmsv.iter().cloned().fold(f64::INFINITY, f64::min);
    for i in local_maxima(&rmsv, 0.01 * range) {
        println!(
            "RMSV maximum {:.3} m/s at day {:.2}",
            rmsv[i],
            rows[i].t / 86_400.0
        );
    }
    let (first, last) = (rows[0].e, rows[rows.len() - 1].e);
    println!("energy {first:.6e} -> {last:.6e} J/m");
    println!("output in {}", config.output_dir);
    Ok(())
}
