//! File formats: configuration text, VTK snapshots, the diagnostic time
//! series and binary checkpoints.

mod checkpoint;
mod config;
mod snapshot;
mod timeseries;

pub use checkpoint::{checkpoint, restore, Checkpoint, CHECKPOINT_VERSION};
pub use config::{
    apply_env_overrides, config_hash, config_to_text, parse_config, parse_config_str, set_key,
    CONFIG_KEYS, ENV_PREFIX,
};
pub use snapshot::{
    read_snapshot, write_snapshot, Snapshot, SnapshotMeta, CELL_FIELDS, POINT_FIELDS,
};
pub use timeseries::{append_timeseries, read_timeseries, TimeseriesWriter, TIMESERIES_HEADER};

/// Shortest decimal string that parses back to the same `f64`.
pub(crate) fn fmt_f64(x: f64) -> String {
    format!("{x:?}")
}
