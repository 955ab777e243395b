//! Exner closure, its partial derivatives and the sound speed over a
//! range of densities and potential temperatures.

use eady_slice::domain::default_constants;
use eady_slice::thermo::{density_from_exner, exner_partials, sound_speed};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let c = default_constants();
    println!(
        "{:>8} {:>8} {:>10} {:>12} {:>12} {:>9}",
        "D", "theta", "Pi", "dPi/dD", "dPi/dtheta", "c_s"
    );
    for d in [0.4, 0.8, 1.1614] {
        for theta in [280.0, 300.0, 340.0] {
            let e = exner_partials(d, theta, &c)?;
            let back = density_from_exner(e.pi, theta, &c)?;
            assert!((back - d).abs() < 1e-12 * d);
            println!(
                "{d:>8.4} {theta:>8.1} {:>10.6} {:>12.6e} {:>12.6e} {:>9.2}",
                e.pi,
                e.d_density,
                e.d_theta,
                sound_speed(e.pi, theta, &c)
            );
        }
    }
    Ok(())
}
