//! Scalar and field diagnostics: energies, RMSV, mass, potential vorticity,
//! front intensity and a grid-scale noise measure.
//!
//! Every reduction runs in a fixed order so logged values are reproducible
//! bit for bit.

use crate::advection::corner_vorticity;
use crate::domain::{Grid, PhysicalConstants, RmsvWeighting, State};
use crate::thermo::{exner, ThermoError};

/// One time sample of the scalar diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DiagnosticRecord {
    pub t: f64,
    /// Kinetic energy of the in-slice flow, J per unit y-width.
    pub k_u: f64,
    /// Kinetic energy of the out-of-slice flow.
    pub k_v: f64,
    /// Potential plus internal energy.
    pub p: f64,
    /// `k_u + k_v + p`.
    pub e: f64,
    pub rmsv: f64,
    /// Total mass, kg per unit y-width.
    pub mass: f64,
    pub front_intensity: f64,
    pub noise_metric: f64,
    pub newton_iters: usize,
    pub gmres_iters: usize,
}

/// Energy components of a state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Energies {
    pub k_u: f64,
    pub k_v: f64,
    pub p: f64,
    pub e: f64,
}

/// Midpoint-rule energies
/// `K_u = ∫ ½D|𝐮|²`, `K_v = ∫ ½Dv²`, `P = ∫ D(gz + c_vΠθ_S − c_pΠ₀θ_S)`,
/// with `u` and `w` averaged to centres.
pub fn energies(
    state: &State,
    grid: &Grid,
    c: &PhysicalConstants,
) -> Result<Energies, ThermoError> {
    let f = state.view();
    let (nx, nz) = (grid.nx, grid.nz);
    let nzw = nz + 1;
    let cv = c.cv();
    let (mut k_u, mut k_v, mut p) = (0.0, 0.0, 0.0);
    for i in 0..nx {
        let ip = grid.wrap(i as isize + 1);
        for k in 0..nz {
            let cc = i * nz + k;
            let d = f.density[cc];
            let theta = f.theta[cc];
            let pi = exner(d, theta, c)?;
            let uc = 0.5 * (f.u[cc] + f.u[ip * nz + k]);
            let wc = 0.5 * (f.w[i * nzw + k] + f.w[i * nzw + k + 1]);
            k_u += 0.5 * d * (uc * uc + wc * wc);
            k_v += 0.5 * d * f.v[cc] * f.v[cc];
            p += d
                * (c.gravity * grid.z_center[k] + cv * pi * theta - c.cp * c.exner_offset * theta);
        }
    }
    let area = grid.cell_area();
    let (k_u, k_v, p) = (k_u * area, k_v * area, p * area);
    Ok(Energies {
        k_u,
        k_v,
        p,
        e: k_u + k_v + p,
    })
}

/// Total mass `Σ D ΔxΔz`.
pub fn mass(state: &State, grid: &Grid) -> f64 {
    state.density().iter().sum::<f64>() * grid.cell_area()
}

/// Area-weighted root-mean-square of `v`.
pub fn rmsv(state: &State, grid: &Grid) -> f64 {
    let sum: f64 = state.v().iter().map(|v| v * v).sum();
    (sum * grid.cell_area() / grid.domain_area()).sqrt()
}

/// Density-weighted root-mean-square of `v`, `√(Σ D v² / Σ D)`.
pub fn rmsv_mass_weighted(state: &State) -> f64 {
    let f = state.view();
    let num: f64 = f.v.iter().zip(f.density).map(|(v, d)| d * v * v).sum();
    let den: f64 = f.density.iter().sum();
    (num / den).sqrt()
}

pub fn rmsv_with(state: &State, grid: &Grid, weighting: RmsvWeighting) -> f64 {
    match weighting {
        RmsvWeighting::Area => rmsv(state, grid),
        RmsvWeighting::Mass => rmsv_mass_weighted(state),
    }
}

/// Potential vorticity at cell corners, `nx × (nz + 1)` values in the same
/// column-major order as `w`.
#[derive(Debug, Clone, PartialEq)]
pub struct PvField {
    pub nx: usize,
    pub nz: usize,
    pub q: Vec<f64>,
}

impl PvField {
    pub fn at(&self, i: usize, k: usize) -> f64 {
        self.q[i * (self.nz + 1) + k]
    }
}

/// `q = s η + θ_z (v_x + f) − θ_x v_z` at corners. Vertical differences of
/// centre fields use the two adjacent rows (the nearest interior pair on
/// the floor and lid); horizontal differences are averaged over the
/// adjacent rows.
pub fn potential_vorticity(state: &State, grid: &Grid, c: &PhysicalConstants) -> PvField {
    let f = state.view();
    let (nx, nz) = (grid.nx, grid.nz);
    let nzw = nz + 1;
    let mut eta = vec![0.0; nx * nzw];
    corner_vorticity(f.u, f.w, grid, &mut eta);
    let s = c.s();
    let rdx = 1.0 / grid.dx;
    let rdz = 1.0 / grid.dz;
    let mut q = vec![0.0; nx * nzw];
    // z-derivative between rows (kb, ka) and x-derivative averaged over rows
    let ddz = |phi: &[f64], i: usize, kb: usize| (phi[i * nz + kb + 1] - phi[i * nz + kb]) * rdz;
    for i in 0..nx {
        let im = grid.wrap(i as isize - 1);
        for k in 0..=nz {
            let kb = k.clamp(1, nz - 1) - 1;
            let rows: &[usize] = if k == 0 {
                &[0]
            } else if k == nz {
                &[nz - 1]
            } else {
                &[k - 1, k]
            };
            let mut theta_x = 0.0;
            let mut v_x = 0.0;
            for &r in rows {
                theta_x += (f.theta[i * nz + r] - f.theta[im * nz + r]) * rdx;
                v_x += (f.v[i * nz + r] - f.v[im * nz + r]) * rdx;
            }
            theta_x /= rows.len() as f64;
            v_x /= rows.len() as f64;
            let theta_z = 0.5 * (ddz(f.theta, i, kb) + ddz(f.theta, im, kb));
            let v_z = 0.5 * (ddz(f.v, i, kb) + ddz(f.v, im, kb));
            q[i * nzw + k] = s * eta[i * nzw + k] + theta_z * (v_x + c.coriolis) - theta_x * v_z;
        }
    }
    PvField { nx, nz, q }
}

/// `max |θ_{i+1} − θ_{i−1}| / (2Δx)` over centres.
pub fn front_intensity(state: &State, grid: &Grid) -> f64 {
    let theta = state.theta();
    let nz = grid.nz;
    let mut best = 0.0_f64;
    for i in 0..grid.nx {
        let im = grid.wrap(i as isize - 1);
        let ip = grid.wrap(i as isize + 1);
        for k in 0..nz {
            let g = (theta[ip * nz + k] - theta[im * nz + k]).abs() / (2.0 * grid.dx);
            best = best.max(g);
        }
    }
    best
}

/// `‖δ²ₓ v‖₂ / (‖v‖₂ + 10⁻¹²)` with the undivided periodic second difference.
pub fn noise_metric(state: &State, grid: &Grid) -> f64 {
    let v = state.v();
    let nz = grid.nz;
    let mut num = 0.0;
    let mut den = 0.0;
    for i in 0..grid.nx {
        let im = grid.wrap(i as isize - 1);
        let ip = grid.wrap(i as isize + 1);
        for k in 0..nz {
            let d2 = v[ip * nz + k] - 2.0 * v[i * nz + k] + v[im * nz + k];
            num += d2 * d2;
            den += v[i * nz + k] * v[i * nz + k];
        }
    }
    num.sqrt() / (den.sqrt() + 1e-12)
}

/// All scalar diagnostics of `state`; solver counts are left at zero.
pub fn record(
    state: &State,
    grid: &Grid,
    c: &PhysicalConstants,
    weighting: RmsvWeighting,
) -> Result<DiagnosticRecord, ThermoError> {
    let en = energies(state, grid, c)?;
    Ok(DiagnosticRecord {
        t: state.t,
        k_u: en.k_u,
        k_v: en.k_v,
        p: en.p,
        e: en.e,
        rmsv: rmsv_with(state, grid, weighting),
        mass: mass(state, grid),
        front_intensity: front_intensity(state, grid),
        noise_metric: noise_metric(state, grid),
        newton_iters: 0,
        gmres_iters: 0,
    })
}

/// Indices of local maxima of `series` whose prominence (height above the
/// higher of the two flanking minima) is at least `min_prominence`.
/// End points are never maxima. Plateaus count once, at their first index.
pub fn local_maxima(series: &[f64], min_prominence: f64) -> Vec<usize> {
    let n = series.len();
    let mut peaks = Vec::new();
    let mut i = 1;
    while i + 1 < n {
        if series[i] > series[i - 1] {
            let mut j = i;
            while j + 1 < n && series[j + 1] == series[i] {
                j += 1;
            }
            if j + 1 < n && series[j + 1] < series[i] {
                let h = series[i];
                let left_min = series[..i]
                    .iter()
                    .rev()
                    .take_while(|&&x| x <= h)
                    .fold(h, |m, &x| m.min(x));
                let right_min = series[j + 1..]
                    .iter()
                    .take_while(|&&x| x <= h)
                    .fold(h, |m, &x| m.min(x));
                if h - left_min.max(right_min) >= min_prominence {
                    peaks.push(i);
                }
            }
            i = j + 1;
        } else {
            i += 1;
        }
    }
    peaks
}
