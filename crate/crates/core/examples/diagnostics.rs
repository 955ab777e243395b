//! Energy partition, RMSV, potential vorticity, front intensity and noise
//! of the initial state and after a few hours of integration.

use eady_slice::diagnostics::{energies, potential_vorticity, record};
use eady_slice::domain::RunConfig;
use eady_slice::driver::Simulation;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let config = RunConfig::default();
    let c = config.constants;
    let mut sim = Simulation::new(config.clone())?;
    for hours in [0, 6, 12] {
        while sim.state().t < hours as f64 * 3600.0 {
            sim.step()?;
        }
        let (s, g) = (sim.state(), sim.grid());
        let e = energies(s, g, &c)?;
        let r = record(s, g, &c, config.rmsv_weighting)?;
        let q = potential_vorticity(s, g, &c);
        let (qmin, qmax) =
            q.q.iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| {
                    (a.min(v), b.max(v))
                });
        println!(
            "t {hours:>2} h: K_u {:.4e} K_v {:.4e} P {:.6e} E {:.8e} | rmsv {:.4} front {:.3e} K/m noise {:.3e} | q in [{qmin:.3e}, {qmax:.3e}]",
            e.k_u, e.k_v, e.p, e.e, r.rmsv, r.front_intensity, r.noise_metric
        );
    }
    Ok(())
}
