//! Output formats: a VTK snapshot with its metadata sidecar, a bit-exact
//! checkpoint and the CSV time series, each written and read back.

use eady_slice::diagnostics::record;
use eady_slice::domain::RunConfig;
use eady_slice::driver::Simulation;
use eady_slice::io::{
    append_timeseries, checkpoint, config_hash, read_snapshot, read_timeseries, restore,
    write_snapshot,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::temp_dir().join("eady_snapshot_io");
    std::fs::create_dir_all(&dir)?;
    let config = RunConfig {
        nx: 16,
        nz: 10,
        ..RunConfig::default()
    };
    let c = config.constants;
    let mut sim = Simulation::new(config.clone())?;
    for _ in 0..4 {
        sim.step()?;
    }

    let vtk = dir.join("state.vtk");
    write_snapshot(sim.state(), sim.grid(), &c, &config_hash(&config), &vtk)?;
    let snap = read_snapshot(&vtk)?;
    let back = snap.to_state().ok_or("snapshot lacks prognostic fields")?;
    let err = back
        .packed()
        .iter()
        .zip(sim.state().packed())
        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    println!(
        "snapshot {} ({}x{}, t = {} s): max round-trip error {err:e}",
        vtk.display(),
        snap.nx,
        snap.nz,
        snap.meta.as_ref().map_or(f64::NAN, |m| m.t)
    );

    let ckpt = dir.join("state.ckpt");
    checkpoint(&sim.to_checkpoint(), &ckpt)?;
    let restored = restore(&ckpt, Some(&config))?;
    println!("checkpoint bit-exact: {}", restored.state == *sim.state());

    let csv = dir.join("timeseries.csv");
    let _ = std::fs::remove_file(&csv);
    let row = record(sim.state(), sim.grid(), &c, config.rmsv_weighting)?;
    append_timeseries(&row, &csv)?;
    println!(
        "time series rows read back: {}",
        read_timeseries(&csv)?.len()
    );
    Ok(())
}
