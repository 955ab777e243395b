//! Experiment protocol: initialise, breed, reset the clock, integrate, and
//! emit diagnostics, snapshots and checkpoints at their cadences.

use std::path::{Path, PathBuf};

use log::info;

use crate::diagnostics::{record, DiagnosticRecord};
use crate::domain::{build_grid, validate_config, Grid, RunConfig, State, VelocityForm};
use crate::init::{breed, initial_state};
use crate::io::{
    checkpoint, config_hash, config_to_text, write_snapshot, Checkpoint, TimeseriesWriter,
};
use crate::timestep::{make_stepper, Stepper};
use crate::Error;

/// Receives the outputs of a run. Every hook but [`OutputSink::record`]
/// defaults to doing nothing.
pub trait OutputSink {
    fn bred(&mut self, _t_breed: f64, _state: &State, _grid: &Grid) -> Result<(), Error> {
        Ok(())
    }

    fn record(&mut self, record: &DiagnosticRecord) -> Result<(), Error>;

    fn snapshot(&mut self, _state: &State, _grid: &Grid) -> Result<(), Error> {
        Ok(())
    }

    fn checkpoint(&mut self, _ckpt: &Checkpoint) -> Result<(), Error> {
        Ok(())
    }

    fn finish(&mut self) -> Result<(), Error> {
        Ok(())
    }
}

/// Keeps records (and optionally snapshot states) in memory.
#[derive(Debug, Default, Clone)]
pub struct MemorySink {
    pub records: Vec<DiagnosticRecord>,
    pub snapshots: Vec<State>,
    pub keep_snapshots: bool,
    pub t_breed: Option<f64>,
}

impl OutputSink for MemorySink {
    fn bred(&mut self, t_breed: f64, _state: &State, _grid: &Grid) -> Result<(), Error> {
        self.t_breed = Some(t_breed);
        Ok(())
    }

    fn record(&mut self, record: &DiagnosticRecord) -> Result<(), Error> {
        self.records.push(*record);
        Ok(())
    }

    fn snapshot(&mut self, state: &State, _grid: &Grid) -> Result<(), Error> {
        if self.keep_snapshots {
            self.snapshots.push(state.clone());
        }
        Ok(())
    }
}

/// Writes the standard output directory layout:
/// `config.txt`, `timeseries.csv`, `snapshots/*.vtk`, `checkpoints/*.ckpt`.
#[derive(Debug)]
pub struct DirectorySink {
    dir: PathBuf,
    hash: String,
    config: RunConfig,
    timeseries: TimeseriesWriter,
}

impl DirectorySink {
    /// Creates the directory tree and echoes the effective config. With
    /// `append`, an existing time series is continued rather than replaced.
    pub fn create(dir: impl AsRef<Path>, config: &RunConfig, append: bool) -> Result<Self, Error> {
        let dir = dir.as_ref().to_path_buf();
        for sub in ["", "snapshots", "checkpoints"] {
            let p = dir.join(sub);
            std::fs::create_dir_all(&p).map_err(|e| Error::io(&p, e))?;
        }
        let cfg_path = dir.join("config.txt");
        std::fs::write(&cfg_path, config_to_text(config)).map_err(|e| Error::io(&cfg_path, e))?;
        let ts_path = dir.join("timeseries.csv");
        if !append && ts_path.exists() {
            std::fs::remove_file(&ts_path).map_err(|e| Error::io(&ts_path, e))?;
        }
        Ok(DirectorySink {
            timeseries: TimeseriesWriter::open(&ts_path)?,
            hash: config_hash(config),
            config: config.clone(),
            dir,
        })
    }

    pub fn snapshot_path(&self, t: f64) -> PathBuf {
        self.dir
            .join("snapshots")
            .join(format!("snapshot_{:010}.vtk", t.round() as i64))
    }
}

impl OutputSink for DirectorySink {
    fn bred(&mut self, t_breed: f64, state: &State, grid: &Grid) -> Result<(), Error> {
        let p = self.dir.join("breeding.txt");
        let text = format!(
            "t_breed = {t_breed:?}\nmax_abs_v = {:?}\n",
            state.max_abs_v()
        );
        std::fs::write(&p, text).map_err(|e| Error::io(&p, e))?;
        write_snapshot(
            state,
            grid,
            &self.config.constants,
            &self.hash,
            self.dir.join("bred.vtk"),
        )
    }

    fn record(&mut self, record: &DiagnosticRecord) -> Result<(), Error> {
        self.timeseries.append(record)
    }

    fn snapshot(&mut self, state: &State, grid: &Grid) -> Result<(), Error> {
        write_snapshot(
            state,
            grid,
            &self.config.constants,
            &self.hash,
            self.snapshot_path(state.t),
        )
    }

    fn checkpoint(&mut self, ckpt: &Checkpoint) -> Result<(), Error> {
        let name = format!("checkpoint_{:010}.ckpt", ckpt.state.t.round() as i64);
        checkpoint(ckpt, self.dir.join("checkpoints").join(name))?;
        checkpoint(ckpt, self.dir.join("latest.ckpt"))
    }

    fn finish(&mut self) -> Result<(), Error> {
        self.timeseries.flush()
    }
}

/// A run in progress.
pub struct Simulation {
    config: RunConfig,
    grid: Grid,
    stepper: Box<dyn Stepper>,
    state: State,
    t_breed: Option<f64>,
    steps_done: u64,
    pending_newton: u64,
    pending_gmres: u64,
}

impl Simulation {
    /// Validates `config` and builds the balanced initial state.
    pub fn new(config: RunConfig) -> Result<Self, Error> {
        let config = validate_config(config)?;
        let (grid, state) = initial_state(&config)?;
        Ok(Self::assemble(config, grid, state, None, 0))
    }

    /// Starts from an explicit state, e.g. a custom balanced field.
    pub fn from_state(config: RunConfig, state: State) -> Result<Self, Error> {
        let config = validate_config(config)?;
        let grid = build_grid(&config)?;
        if state.layout() != grid.layout() {
            let l = state.layout();
            return Err(Error::DimensionMismatch {
                expected: (grid.nx, grid.nz),
                found: (l.nx, l.nz),
            });
        }
        Ok(Self::assemble(config, grid, state, None, 0))
    }

    /// Continues from a checkpoint.
    pub fn from_checkpoint(ckpt: Checkpoint) -> Result<Self, Error> {
        let config = validate_config(ckpt.config)?;
        let grid = build_grid(&config)?;
        let mut sim = Self::assemble(config, grid, ckpt.state, ckpt.t_breed, ckpt.steps_done);
        sim.pending_newton = ckpt.pending_iters.0;
        sim.pending_gmres = ckpt.pending_iters.1;
        Ok(sim)
    }

    fn assemble(
        config: RunConfig,
        grid: Grid,
        state: State,
        t_breed: Option<f64>,
        steps_done: u64,
    ) -> Self {
        let stepper = make_stepper(&config, grid.clone());
        Simulation {
            config,
            grid,
            stepper,
            state,
            t_breed,
            steps_done,
            pending_newton: 0,
            pending_gmres: 0,
        }
    }

    pub fn config(&self) -> &RunConfig {
        &self.config
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn state(&self) -> &State {
        &self.state
    }

    pub fn t_breed(&self) -> Option<f64> {
        self.t_breed
    }

    pub fn steps_done(&self) -> u64 {
        self.steps_done
    }

    /// Breeds the state to the configured `max|v|` and resets the clock.
    pub fn breed(&mut self) -> Result<f64, Error> {
        let outcome = breed(self.state.clone(), &self.config, self.stepper.as_mut())?;
        self.state = outcome.state;
        self.t_breed = Some(outcome.t_breed);
        self.steps_done = 0;
        Ok(outcome.t_breed)
    }

    /// Diagnostics of the current state with the iteration counts
    /// accumulated since the previous record.
    pub fn record(&self) -> Result<DiagnosticRecord, Error> {
        let mut r = record(
            &self.state,
            &self.grid,
            &self.config.constants,
            self.config.rmsv_weighting,
        )?;
        r.newton_iters = self.pending_newton as usize;
        r.gmres_iters = self.pending_gmres as usize;
        Ok(r)
    }

    pub fn to_checkpoint(&self) -> Checkpoint {
        Checkpoint {
            config: self.config.clone(),
            state: self.state.clone(),
            t_breed: self.t_breed,
            reset: self.t_breed.is_some(),
            steps_done: self.steps_done,
            pending_iters: (self.pending_newton, self.pending_gmres),
        }
    }

    /// One step without any output.
    pub fn step(&mut self) -> Result<(), Error> {
        let stats = self.stepper.step(&mut self.state)?;
        self.steps_done += 1;
        self.state.t = self.steps_done as f64 * self.config.dt;
        self.pending_newton += stats.newton_iterations as u64;
        self.pending_gmres += stats.linear_iterations_total as u64;
        Ok(())
    }

    fn emit(&mut self, sink: &mut dyn OutputSink) -> Result<(), Error> {
        let n = self.steps_done;
        let due = |interval: f64| interval > 0.0 && n % self.config.steps_per(interval) == 0;
        if due(self.config.timeseries_interval) {
            let r = self.record()?;
            sink.record(&r)?;
            self.pending_newton = 0;
            self.pending_gmres = 0;
        }
        if due(self.config.snapshot_interval) {
            sink.snapshot(&self.state, &self.grid)?;
        }
        if n > 0 && due(self.config.checkpoint_interval) {
            sink.checkpoint(&self.to_checkpoint())?;
        }
        Ok(())
    }

    /// Integrates until `steps_done == target`, emitting outputs at every
    /// cadence boundary (including the starting state when nothing has
    /// been stepped yet).
    pub fn run_until(&mut self, target: u64, sink: &mut dyn OutputSink) -> Result<(), Error> {
        if self.steps_done == 0 {
            self.emit(sink)?;
        }
        let log_every = self.config.steps_per(86_400.0).max(1);
        while self.steps_done < target {
            self.step()?;
            self.emit(sink)?;
            if self.steps_done % log_every == 0 {
                info!(
                    "day {:.1}: max|v| = {:.3} m/s",
                    self.state.t / 86_400.0,
                    self.state.max_abs_v()
                );
            }
        }
        Ok(())
    }

    /// Integrates to the configured run length.
    pub fn run(&mut self, sink: &mut dyn OutputSink) -> Result<(), Error> {
        let target = self.config.total_steps();
        self.run_until(target, sink)?;
        sink.finish()
    }
}

/// Summary of a completed protocol run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub t_breed: f64,
    pub final_state: State,
}

/// The full experiment: initialise, breed, reset the clock and integrate
/// for `run_days`.
pub fn run_protocol(config: RunConfig, sink: &mut dyn OutputSink) -> Result<RunSummary, Error> {
    let mut sim = Simulation::new(config)?;
    let t_breed = sim.breed()?;
    sink.bred(t_breed, sim.state(), sim.grid())?;
    sim.run(sink)?;
    Ok(RunSummary {
        t_breed,
        final_state: sim.state().clone(),
    })
}

/// Noise metrics of advective and vector-invariant twins at one day.
#[derive(Debug, Clone, PartialEq)]
pub struct CompareReport {
    pub day: f64,
    pub advective: DiagnosticRecord,
    pub vector_invariant: DiagnosticRecord,
    pub t_breed: (f64, f64),
}

impl CompareReport {
    /// `noise(vector-invariant) / noise(advective)`.
    pub fn ratio(&self) -> f64 {
        self.vector_invariant.noise_metric / self.advective.noise_metric
    }

    pub fn to_text(&self) -> String {
        format!(
            "day = {:?}\nadvective_t_breed = {:?}\nvector_invariant_t_breed = {:?}\n\
             advective_noise_metric = {:?}\nvector_invariant_noise_metric = {:?}\nratio = {:?}\n\
             advective_rmsv = {:?}\nvector_invariant_rmsv = {:?}\n",
            self.day,
            self.t_breed.0,
            self.t_breed.1,
            self.advective.noise_metric,
            self.vector_invariant.noise_metric,
            self.ratio(),
            self.advective.rmsv,
            self.vector_invariant.rmsv,
        )
    }
}

/// Runs both velocity forms through the full protocol up to `day`.
pub fn compare(config: &RunConfig, day: f64) -> Result<CompareReport, Error> {
    let twin = |form: VelocityForm| -> Result<(DiagnosticRecord, f64), Error> {
        let cfg = RunConfig {
            velocity_form: form,
            run_days: day,
            ..config.clone()
        };
        let mut sim = Simulation::new(cfg)?;
        let t_breed = sim.breed()?;
        let mut sink = MemorySink::default();
        sim.run(&mut sink)?;
        Ok((sim.record()?, t_breed))
    };
    let (advective, tb_a) = twin(VelocityForm::Advective)?;
    let (vector_invariant, tb_v) = twin(VelocityForm::VectorInvariant)?;
    Ok(CompareReport {
        day,
        advective,
        vector_invariant,
        t_breed: (tb_a, tb_v),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> RunConfig {
        RunConfig {
            nx: 8,
            nz: 6,
            dt: 600.0,
            run_days: 0.25,
            timeseries_interval: 1200.0,
            snapshot_interval: 3600.0,
            checkpoint_interval: 3600.0,
            ..RunConfig::default()
        }
    }

    #[test]
    fn cadence_and_restart_determinism() {
        let config = small();
        let mut a = Simulation::new(config.clone()).unwrap();
        let mut sink_a = MemorySink::default();
        a.run(&mut sink_a).unwrap();
        // 0.25 d / 1200 s → 18 intervals, plus the initial record
        assert_eq!(sink_a.records.len(), 19);
        assert!(sink_a.records.windows(2).all(|w| w[1].t > w[0].t));

        let mut b = Simulation::new(config.clone()).unwrap();
        let mut sink_b = MemorySink::default();
        b.run_until(10, &mut sink_b).unwrap();
        let ckpt = b.to_checkpoint();
        let mut c = Simulation::from_checkpoint(ckpt).unwrap();
        c.run(&mut sink_b).unwrap();
        assert_eq!(sink_a.records, sink_b.records);
        assert_eq!(a.state().packed(), c.state().packed());
    }

    #[test]
    fn directory_layout() {
        let dir = tempfile::tempdir().unwrap();
        let config = small();
        let mut sink = DirectorySink::create(dir.path(), &config, false).unwrap();
        let mut sim = Simulation::new(config.clone()).unwrap();
        sim.run(&mut sink).unwrap();
        assert!(dir.path().join("config.txt").exists());
        assert!(dir.path().join("latest.ckpt").exists());
        let rows = crate::io::read_timeseries(dir.path().join("timeseries.csv")).unwrap();
        assert_eq!(rows.len(), 19);
        let snaps = std::fs::read_dir(dir.path().join("snapshots"))
            .unwrap()
            .count();
        // 7 snapshot times, each with a sidecar
        assert_eq!(snaps, 14);
    }
}
