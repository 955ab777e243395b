//! Advective and vector-invariant momentum advection twins run to the same
//! day, compared by their grid-scale noise in v.
//!
//! Usage: `cargo run --release --example compare_forms [day] [nx]`

use eady_slice::domain::RunConfig;
use eady_slice::driver::compare;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let day: f64 = args.first().map_or(Ok(6.0), |d| d.parse())?;
    let mut config = RunConfig::default();
    if let Some(nx) = args.get(1) {
        config.nx = nx.parse()?;
    }
    let report = compare(&config, day)?;
    print!("{}", report.to_text());
    Ok(())
}
