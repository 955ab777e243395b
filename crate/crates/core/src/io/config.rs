//! Flat `key = value` configuration files.
//!
//! Blank lines and lines starting with `#` are ignored. Omitted keys keep
//! their defaults; unknown keys are errors. Environment variables named
//! `EADY_<KEY>` (key upper-cased) override file values.

use std::path::Path;

use sha2::{Digest, Sha256};

use crate::domain::{
    validate_config, ConfigError, Integrator, PreconditionerKind, RmsvWeighting, RunConfig,
    VelocityForm,
};
use crate::Error;

use super::fmt_f64;

pub const ENV_PREFIX: &str = "EADY_";

/// Every accepted key, in the order used by [`config_to_text`].
pub const CONFIG_KEYS: &[&str] = &[
    "nx",
    "nz",
    "dt",
    "integrator",
    "velocity_form",
    "scalar_upwind_order",
    "centered_advection",
    "amplitude",
    "breed_vmax",
    "breed_max_days",
    "surface_exner",
    "run_days",
    "snapshot_interval",
    "timeseries_interval",
    "checkpoint_interval",
    "cfl_cap",
    "rmsv_weighting",
    "output_dir",
    "newton_abs_tol",
    "newton_rel_tol",
    "newton_max_iters",
    "linear_rel_tol",
    "linear_max_iters",
    "linear_restart",
    "jacobian_fd_scale",
    "preconditioner",
    "half_width",
    "height",
    "coriolis",
    "gravity",
    "p0",
    "theta0",
    "shear",
    "n2",
    "exner_offset",
    "gas_constant",
    "cp",
    "reference_velocity",
];

fn number<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, ConfigError> {
    value.parse().map_err(|_| ConfigError::InvalidNumber {
        key: key.to_string(),
        value: value.to_string(),
    })
}

fn choice<T>(
    key: &str,
    value: &str,
    parse: fn(&str) -> Option<T>,
    allowed: &'static str,
) -> Result<T, ConfigError> {
    parse(value).ok_or_else(|| ConfigError::InvalidChoice {
        key: key.to_string(),
        value: value.to_string(),
        allowed,
    })
}

fn boolean(key: &str, value: &str) -> Result<bool, ConfigError> {
    match value {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => Err(ConfigError::InvalidChoice {
            key: key.to_string(),
            value: value.to_string(),
            allowed: "true, false",
        }),
    }
}

/// Sets one key. Returns `Ok(false)` when the key is unknown.
pub fn set_key(config: &mut RunConfig, key: &str, value: &str) -> Result<bool, ConfigError> {
    let c = &mut config.constants;
    let s = &mut config.solver;
    match key {
        "nx" => config.nx = number(key, value)?,
        "nz" => config.nz = number(key, value)?,
        "dt" => config.dt = number(key, value)?,
        "integrator" => {
            config.integrator = choice(key, value, Integrator::parse, Integrator::ALLOWED)?
        }
        "velocity_form" => {
            config.velocity_form = choice(key, value, VelocityForm::parse, VelocityForm::ALLOWED)?
        }
        "scalar_upwind_order" => config.scalar_upwind_order = number(key, value)?,
        "centered_advection" => config.centered_advection = boolean(key, value)?,
        "amplitude" => config.amplitude = number(key, value)?,
        "breed_vmax" => config.breed_vmax = number(key, value)?,
        "breed_max_days" => config.breed_max_days = number(key, value)?,
        "surface_exner" => config.surface_exner = number(key, value)?,
        "run_days" => config.run_days = number(key, value)?,
        "snapshot_interval" => config.snapshot_interval = number(key, value)?,
        "timeseries_interval" => config.timeseries_interval = number(key, value)?,
        "checkpoint_interval" => config.checkpoint_interval = number(key, value)?,
        "cfl_cap" => config.cfl_cap = number(key, value)?,
        "rmsv_weighting" => {
            config.rmsv_weighting =
                choice(key, value, RmsvWeighting::parse, RmsvWeighting::ALLOWED)?
        }
        "output_dir" => config.output_dir = value.to_string(),
        "newton_abs_tol" => s.newton_abs_tol = number(key, value)?,
        "newton_rel_tol" => s.newton_rel_tol = number(key, value)?,
        "newton_max_iters" => s.newton_max_iters = number(key, value)?,
        "linear_rel_tol" => s.linear_rel_tol = number(key, value)?,
        "linear_max_iters" => s.linear_max_iters = number(key, value)?,
        "linear_restart" => s.linear_restart = number(key, value)?,
        "jacobian_fd_scale" => s.jacobian_fd_scale = number(key, value)?,
        "preconditioner" => {
            s.preconditioner = choice(
                key,
                value,
                PreconditionerKind::parse,
                PreconditionerKind::ALLOWED,
            )?
        }
        "half_width" => c.half_width = number(key, value)?,
        "height" => c.height = number(key, value)?,
        "coriolis" => c.coriolis = number(key, value)?,
        "gravity" => c.gravity = number(key, value)?,
        "p0" => c.p0 = number(key, value)?,
        "theta0" => c.theta0 = number(key, value)?,
        "shear" => c.shear = number(key, value)?,
        "n2" => c.n2 = number(key, value)?,
        "exner_offset" => c.exner_offset = number(key, value)?,
        "gas_constant" => c.gas_constant = number(key, value)?,
        "cp" => c.cp = number(key, value)?,
        "reference_velocity" => c.reference_velocity = number(key, value)?,
        _ => return Ok(false),
    }
    Ok(true)
}

fn parse_lines(text: &str) -> Result<RunConfig, ConfigError> {
    let mut config = RunConfig::default();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(ConfigError::Syntax {
                line: n + 1,
                text: line.to_string(),
            });
        };
        let (key, value) = (key.trim(), value.trim());
        if !set_key(&mut config, key, value)? {
            return Err(ConfigError::UnknownKey {
                key: key.to_string(),
                line: n + 1,
            });
        }
    }
    Ok(config)
}

/// Parses and validates configuration text without environment overrides.
pub fn parse_config_str(text: &str) -> Result<RunConfig, ConfigError> {
    validate_config(parse_lines(text)?)
}

/// Applies `EADY_<KEY>=value` overrides from `vars` and revalidates.
pub fn apply_env_overrides(
    mut config: RunConfig,
    vars: impl IntoIterator<Item = (String, String)>,
) -> Result<RunConfig, ConfigError> {
    let mut overrides: Vec<(String, String)> = vars
        .into_iter()
        .filter(|(k, _)| k.starts_with(ENV_PREFIX))
        .collect();
    // deterministic order regardless of the environment's iteration order
    overrides.sort();
    for (name, value) in overrides {
        let key = name[ENV_PREFIX.len()..].to_ascii_lowercase();
        if !set_key(&mut config, &key, value.trim())? {
            return Err(ConfigError::UnknownEnvKey(name));
        }
    }
    validate_config(config)
}

/// Reads a configuration file, applies process environment overrides and
/// validates the result.
pub fn parse_config(path: impl AsRef<Path>) -> Result<RunConfig, Error> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let config = parse_lines(&text)?;
    Ok(apply_env_overrides(config, std::env::vars())?)
}

/// Canonical text of a config: every key, one per line, in [`CONFIG_KEYS`]
/// order. Parsing it back yields an identical config.
pub fn config_to_text(config: &RunConfig) -> String {
    let c = &config.constants;
    let s = &config.solver;
    let value = |key: &str| -> String {
        match key {
            "nx" => config.nx.to_string(),
            "nz" => config.nz.to_string(),
            "dt" => fmt_f64(config.dt),
            "integrator" => config.integrator.as_str().to_string(),
            "velocity_form" => config.velocity_form.as_str().to_string(),
            "scalar_upwind_order" => config.scalar_upwind_order.to_string(),
            "centered_advection" => config.centered_advection.to_string(),
            "amplitude" => fmt_f64(config.amplitude),
            "breed_vmax" => fmt_f64(config.breed_vmax),
            "breed_max_days" => fmt_f64(config.breed_max_days),
            "surface_exner" => fmt_f64(config.surface_exner),
            "run_days" => fmt_f64(config.run_days),
            "snapshot_interval" => fmt_f64(config.snapshot_interval),
            "timeseries_interval" => fmt_f64(config.timeseries_interval),
            "checkpoint_interval" => fmt_f64(config.checkpoint_interval),
            "cfl_cap" => fmt_f64(config.cfl_cap),
            "rmsv_weighting" => config.rmsv_weighting.as_str().to_string(),
            "output_dir" => config.output_dir.clone(),
            "newton_abs_tol" => fmt_f64(s.newton_abs_tol),
            "newton_rel_tol" => fmt_f64(s.newton_rel_tol),
            "newton_max_iters" => s.newton_max_iters.to_string(),
            "linear_rel_tol" => fmt_f64(s.linear_rel_tol),
            "linear_max_iters" => s.linear_max_iters.to_string(),
            "linear_restart" => s.linear_restart.to_string(),
            "jacobian_fd_scale" => fmt_f64(s.jacobian_fd_scale),
            "preconditioner" => s.preconditioner.as_str().to_string(),
            "half_width" => fmt_f64(c.half_width),
            "height" => fmt_f64(c.height),
            "coriolis" => fmt_f64(c.coriolis),
            "gravity" => fmt_f64(c.gravity),
            "p0" => fmt_f64(c.p0),
            "theta0" => fmt_f64(c.theta0),
            "shear" => fmt_f64(c.shear),
            "n2" => fmt_f64(c.n2),
            "exner_offset" => fmt_f64(c.exner_offset),
            "gas_constant" => fmt_f64(c.gas_constant),
            "cp" => fmt_f64(c.cp),
            "reference_velocity" => fmt_f64(c.reference_velocity),
            _ => unreachable!("key list and formatter out of sync"),
        }
    };
    CONFIG_KEYS
        .iter()
        .map(|k| format!("{k} = {}\n", value(k)))
        .collect()
}

/// Hex SHA-256 of [`config_to_text`]; identifies the physics and numerics
/// of a run in every output file.
pub fn config_hash(config: &RunConfig) -> String {
    let digest = Sha256::digest(config_to_text(config).as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}
