//! Command-line driver for the vertical-slice Eady experiment.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use log::info;

use eady_slice::diagnostics::record;
use eady_slice::domain::{build_grid, validate_config, RunConfig};
use eady_slice::driver::{compare, run_protocol, DirectorySink, OutputSink, Simulation};
use eady_slice::io::{
    apply_env_overrides, checkpoint, config_hash, config_to_text, parse_config, read_snapshot,
    restore, write_snapshot, TimeseriesWriter,
};
use eady_slice::Error;

#[derive(Parser)]
#[command(
    name = "eady",
    version,
    about = "Compressible vertical-slice Eady frontogenesis simulator"
)]
struct Cli {
    /// Configuration file of `key = value` lines; defaults when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; overrides `output_dir` from the config.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Accepted for reproducibility scripts; the model has no random input.
    #[arg(long, global = true)]
    seed_free: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Initialise, breed, reset the clock and integrate with outputs.
    Run {
        /// Print the validated configuration and exit.
        #[arg(long)]
        dry_run: bool,
        /// Continue from a checkpoint instead of starting fresh.
        #[arg(long)]
        resume: Option<PathBuf>,
    },
    /// Write the initial and bred states (snapshots plus a checkpoint).
    Init,
    /// Recompute diagnostics from snapshot files.
    Diagnose {
        /// Snapshots to read; defaults to `<out>/snapshots/*.vtk`.
        snapshots: Vec<PathBuf>,
    },
    /// Run advective and vector-invariant twins and report noise metrics.
    Compare {
        #[arg(long, default_value_t = 6.0)]
        day: f64,
    },
}

fn load_config(cli: &Cli) -> Result<RunConfig, Error> {
    let mut config = match &cli.config {
        Some(path) => parse_config(path)?,
        None => apply_env_overrides(RunConfig::default(), std::env::vars())?,
    };
    if let Some(out) = &cli.out {
        config.output_dir = out.display().to_string();
    }
    Ok(validate_config(config)?)
}

fn out_dir(config: &RunConfig) -> PathBuf {
    PathBuf::from(&config.output_dir)
}

fn cmd_run(config: RunConfig, dry_run: bool, resume: Option<&Path>) -> Result<(), Error> {
    if dry_run {
        print!("{}", config_to_text(&config));
        println!("# config_hash = {}", config_hash(&config));
        return Ok(());
    }
    let dir = out_dir(&config);
    match resume {
        Some(path) => {
            let ckpt = restore(path, Some(&config))?;
            if ckpt.t_breed.is_none() {
                return Err(Error::format(
                    path,
                    "checkpoint was written before breeding finished",
                ));
            }
            let mut sink = DirectorySink::create(&dir, &ckpt.config, true)?;
            let mut sim = Simulation::from_checkpoint(ckpt)?;
            info!(
                "resuming at step {} (t = {:.1} h)",
                sim.steps_done(),
                sim.state().t / 3600.0
            );
            sim.run(&mut sink)?;
        }
        None => {
            let mut sink = DirectorySink::create(&dir, &config, false)?;
            let summary = run_protocol(config, &mut sink)?;
            println!("t_breed_hours = {:.3}", summary.t_breed / 3600.0);
        }
    }
    println!("output written to {}", dir.display());
    Ok(())
}

fn cmd_init(config: RunConfig) -> Result<(), Error> {
    let dir = out_dir(&config);
    std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    let hash = config_hash(&config);
    let mut sim = Simulation::new(config.clone())?;
    write_snapshot(
        sim.state(),
        sim.grid(),
        &config.constants,
        &hash,
        dir.join("initial.vtk"),
    )?;
    let t_breed = sim.breed()?;
    let mut sink = DirectorySink::create(&dir, &config, false)?;
    sink.bred(t_breed, sim.state(), sim.grid())?;
    checkpoint(&sim.to_checkpoint(), dir.join("bred.ckpt"))?;
    println!("t_breed_hours = {:.3}", t_breed / 3600.0);
    println!(
        "wrote initial.vtk, bred.vtk and bred.ckpt to {}",
        dir.display()
    );
    Ok(())
}

fn cmd_diagnose(config: RunConfig, mut paths: Vec<PathBuf>) -> Result<(), Error> {
    let dir = out_dir(&config);
    if paths.is_empty() {
        let snap_dir = dir.join("snapshots");
        let entries = std::fs::read_dir(&snap_dir).map_err(|e| Error::io(&snap_dir, e))?;
        for entry in entries {
            let p = entry.map_err(|e| Error::io(&snap_dir, e))?.path();
            if p.extension().is_some_and(|e| e == "vtk") {
                paths.push(p);
            }
        }
    }
    let grid = build_grid(&config)?;
    let mut rows = Vec::new();
    for p in &paths {
        let snap = read_snapshot(p)?;
        if (snap.nx, snap.nz) != (grid.nx, grid.nz) {
            return Err(Error::DimensionMismatch {
                expected: (grid.nx, grid.nz),
                found: (snap.nx, snap.nz),
            });
        }
        let state = snap
            .to_state()
            .ok_or_else(|| Error::format(p, "missing prognostic fields"))?;
        rows.push(record(
            &state,
            &grid,
            &config.constants,
            config.rmsv_weighting,
        )?);
    }
    rows.sort_by(|a, b| a.t.total_cmp(&b.t));
    std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    let csv = dir.join("diagnose.csv");
    if csv.exists() {
        std::fs::remove_file(&csv).map_err(|e| Error::io(&csv, e))?;
    }
    let mut w = TimeseriesWriter::open(&csv)?;
    for r in &rows {
        w.append(r)?;
        println!(
            "t = {:>9.1} h  rmsv = {:>8.4}  E = {:.10e}  front = {:.4e}  noise = {:.4e}",
            r.t / 3600.0,
            r.rmsv,
            r.e,
            r.front_intensity,
            r.noise_metric
        );
    }
    w.flush()?;
    println!("{} snapshots -> {}", rows.len(), csv.display());
    Ok(())
}

fn cmd_compare(config: RunConfig, day: f64) -> Result<(), Error> {
    let report = compare(&config, day)?;
    let dir = out_dir(&config);
    std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    let path = dir.join(format!("compare_day{day}.txt"));
    let text = report.to_text();
    std::fs::write(&path, &text).map_err(|e| Error::io(&path, e))?;
    print!("{text}");
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let result = load_config(&cli).and_then(|config| match &cli.command {
        Command::Run { dry_run, resume } => cmd_run(config, *dry_run, resume.as_deref()),
        Command::Init => cmd_init(config),
        Command::Diagnose { snapshots } => cmd_diagnose(config, snapshots.clone()),
        Command::Compare { day } => {
            let days = RunConfig {
                run_days: *day,
                ..config.clone()
            };
            validate_config(days)?;
            cmd_compare(config, *day)
        }
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
