//! Exner-pressure closure of the slice model.
//!
//! `Π = (p/p₀)^{R/c_p}` with `p = D R θ_S Π`. Eliminating `p` gives the
//! explicit form `Π = (D R θ_S / p₀)^{R/c_v}`, which is what is evaluated
//! here. This is the only place the equation of state appears.

use thiserror::Error;

use crate::domain::PhysicalConstants;

#[derive(Debug, Error, Clone, Copy, PartialEq)]
pub enum ThermoError {
    #[error("non-positive density {0}")]
    Density(f64),
    #[error("non-positive potential temperature {0}")]
    Theta(f64),
    #[error("non-positive Exner pressure {0}")]
    Exner(f64),
}

/// Exner pressure and its partial derivatives at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExnerEval {
    pub pi: f64,
    /// `∂Π/∂D`, m³ kg⁻¹.
    pub d_density: f64,
    /// `∂Π/∂θ_S`, K⁻¹.
    pub d_theta: f64,
}

#[inline]
fn check(density: f64, theta: f64) -> Result<(), ThermoError> {
    if !(density > 0.0 && density.is_finite()) {
        return Err(ThermoError::Density(density));
    }
    if !(theta > 0.0 && theta.is_finite()) {
        return Err(ThermoError::Theta(theta));
    }
    Ok(())
}

/// Unchecked closure used by the hot loops once positivity is known.
#[inline]
pub(crate) fn exner_raw(density: f64, theta: f64, c: &PhysicalConstants) -> f64 {
    (density * c.gas_constant * theta / c.p0).powf(c.kappa_v())
}

pub fn exner(density: f64, theta: f64, c: &PhysicalConstants) -> Result<f64, ThermoError> {
    check(density, theta)?;
    Ok(exner_raw(density, theta, c))
}

/// `∂Π/∂D = (R/(c_v D)) Π` and `∂Π/∂θ_S = (R/(c_v θ_S)) Π`.
pub fn exner_partials(
    density: f64,
    theta: f64,
    c: &PhysicalConstants,
) -> Result<ExnerEval, ThermoError> {
    let pi = exner(density, theta, c)?;
    let k = c.kappa_v();
    Ok(ExnerEval {
        pi,
        d_density: k * pi / density,
        d_theta: k * pi / theta,
    })
}

/// Inverse of [`exner`] in `D`: `D = p₀ Π^{c_v/R} / (R θ_S)`.
pub fn density_from_exner(pi: f64, theta: f64, c: &PhysicalConstants) -> Result<f64, ThermoError> {
    if !(pi > 0.0 && pi.is_finite()) {
        return Err(ThermoError::Exner(pi));
    }
    if !(theta > 0.0 && theta.is_finite()) {
        return Err(ThermoError::Theta(theta));
    }
    Ok(c.p0 * pi.powf(1.0 / c.kappa_v()) / (c.gas_constant * theta))
}

/// Fills `pi` with the Exner pressure of every cell, failing on the first
/// inadmissible one.
pub fn exner_field(
    density: &[f64],
    theta: &[f64],
    c: &PhysicalConstants,
    pi: &mut [f64],
) -> Result<(), ThermoError> {
    let scale = c.gas_constant / c.p0;
    let kappa = c.kappa_v();
    for ((p, &d), &t) in pi.iter_mut().zip(density).zip(theta) {
        check(d, t)?;
        *p = (d * scale * t).powf(kappa);
    }
    Ok(())
}

/// Adiabatic sound speed `√(c_p R Π θ_S / c_v)`, m s⁻¹.
pub fn sound_speed(pi: f64, theta: f64, c: &PhysicalConstants) -> f64 {
    (c.cp * c.gas_constant * pi * theta / c.cv()).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::default_constants;

    /// Solves `Π^{c_p/R} p₀ = D R θ Π` for `Π` by bisection.
    fn exner_by_bisection(d: f64, theta: f64, c: &PhysicalConstants) -> f64 {
        let f = |pi: f64| pi.powf(c.cp / c.gas_constant) * c.p0 - d * c.gas_constant * theta * pi;
        let (mut lo, mut hi) = (1e-6, 10.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(mid) > 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn reference_state_has_unit_exner() {
        let c = default_constants();
        let d = c.p0 / (c.gas_constant * 300.0);
        assert!((exner(d, 300.0, &c).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn matches_implicit_closure() {
        let c = default_constants();
        let pi = exner(1.1614, 300.0, &c).unwrap();
        assert!((pi - exner_by_bisection(1.1614, 300.0, &c)).abs() < 1e-12);
        assert_eq!(format!("{pi:.4}"), "1.0000");
    }

    #[test]
    fn halving_density() {
        let c = default_constants();
        let ratio = exner(0.5, 280.0, &c).unwrap() / exner(1.0, 280.0, &c).unwrap();
        // 2^(-0.4) from mpmath
        assert!((ratio - 0.757_858_283_255_199).abs() < 1e-13);
    }

    #[test]
    fn partials_at_reference() {
        let c = default_constants();
        let e = exner_partials(1.1614, 300.0, &c).unwrap();
        assert!((e.d_density - 0.344_407_149_941_910_8).abs() < 1e-12);
        assert!((e.d_theta - 0.4 * e.pi / 300.0).abs() < 1e-16);
        assert!((e.d_theta - 1.3333e-3).abs() < 1e-7);
        assert!((1.1614 * e.d_density - 300.0 * e.d_theta).abs() < 1e-14);
    }

    #[test]
    fn inverse() {
        let c = default_constants();
        assert!((density_from_exner(1.0, 300.0, &c).unwrap() - 1.161_440_185_830_43).abs() < 1e-12);
        // bisection on exner(D) = 0.864 (mpmath): 0.80590009087399
        let d = density_from_exner(0.864, 300.0, &c).unwrap();
        assert!((d - 0.805_900_090_873_993_6).abs() < 1e-12);
        assert!((exner_by_bisection(d, 300.0, &c) - 0.864).abs() < 1e-12);
    }

    #[test]
    fn domain_errors() {
        let c = default_constants();
        assert_eq!(exner(0.0, 300.0, &c), Err(ThermoError::Density(0.0)));
        assert_eq!(exner(1.0, -1.0, &c), Err(ThermoError::Theta(-1.0)));
        assert!(exner(f64::NAN, 300.0, &c).is_err());
        assert_eq!(
            density_from_exner(-0.1, 300.0, &c),
            Err(ThermoError::Exner(-0.1))
        );
        assert!(exner_partials(1.0, 0.0, &c).is_err());
    }

    #[test]
    fn sound_speed_scale() {
        let c = default_constants();
        let cs = sound_speed(1.0, 300.0, &c);
        assert!((cs - (1.4 * 287.0 * 300.0_f64).sqrt()).abs() < 1e-9);
        assert!((cs - 347.1).abs() < 0.1);
    }

    proptest::proptest! {
        #[test]
        fn inverse_round_trip(d in 0.05f64..2.0, theta in 200.0f64..600.0) {
            let c = default_constants();
            let pi = exner(d, theta, &c).unwrap();
            let back = density_from_exner(pi, theta, &c).unwrap();
            proptest::prop_assert!((back - d).abs() < 1e-13 * d);
        }

        #[test]
        fn depends_only_on_d_theta_product(d in 0.05f64..2.0, theta in 200.0f64..600.0, lambda in 0.5f64..2.0) {
            let c = default_constants();
            let a = exner(d, theta, &c).unwrap();
            let b = exner(lambda * d, theta / lambda, &c).unwrap();
            proptest::prop_assert!((a - b).abs() < 1e-14);
        }

        #[test]
        fn increases_with_density(d in 0.05f64..2.0, theta in 200.0f64..600.0) {
            let c = default_constants();
            let e = exner_partials(d, theta, &c).unwrap();
            proptest::prop_assert!(e.d_density > 0.0 && e.d_theta > 0.0);
            proptest::prop_assert!(exner(1.01 * d, theta, &c).unwrap() > e.pi);
        }
    }
}
