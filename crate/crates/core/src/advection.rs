//! Transport operators on the C-grid.
//!
//! Every routine *adds* a tendency contribution, i.e. `−(𝐮·∇)φ`, into its
//! output buffer. Scalar transport is written as flux divergence minus
//! `φ ∇·𝐮`, so constant fields are transported exactly and the rigid-lid
//! faces (where `w = 0`) never need ghost values.

use crate::domain::{FieldView, Grid};

/// Reconstruction used for face values / one-sided differences.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    Upwind1,
    Upwind3,
    Centered,
}

impl Scheme {
    pub fn scalar(order: u8, centered: bool) -> Self {
        match (centered, order) {
            (true, _) => Scheme::Centered,
            (false, 1) => Scheme::Upwind1,
            _ => Scheme::Upwind3,
        }
    }
}

/// Face value minus the left and right cell values, `(φ̂ − φ_L, φ̂ − φ_R)`.
/// `ll`/`rr` are the second neighbours; they are ignored unless the
/// scheme is third order.
#[inline(always)]
fn face_offsets(scheme: Scheme, vel: f64, ll: f64, l: f64, r: f64, rr: f64) -> (f64, f64) {
    let d = r - l;
    match scheme {
        Scheme::Centered => (0.5 * d, -0.5 * d),
        Scheme::Upwind1 => {
            if vel >= 0.0 {
                (0.0, -d)
            } else {
                (d, 0.0)
            }
        }
        Scheme::Upwind3 => {
            if vel >= 0.0 {
                let a = (2.0 * d + (l - ll)) / 6.0;
                (a, a - d)
            } else {
                let b = (-2.0 * d - (rr - r)) / 6.0;
                (b + d, b)
            }
        }
    }
}

/// Adds `−(𝐮·∇)φ` at cell centres.
///
/// Periodic in x. In z the third-order stencil falls back to first-order
/// donor cell on the faces next to the floor and lid.
pub fn add_scalar_advection(
    phi: &[f64],
    u: &[f64],
    w: &[f64],
    grid: &Grid,
    scheme: Scheme,
    out: &mut [f64],
) {
    let (nx, nz) = (grid.nx, grid.nz);
    let rdx = 1.0 / grid.dx;
    let rdz = 1.0 / grid.dz;
    // x-faces: face i separates cells i-1 (left) and i (right)
    for i in 0..nx {
        let im = grid.wrap(i as isize - 1);
        let imm = grid.wrap(i as isize - 2);
        let ip = grid.wrap(i as isize + 1);
        for k in 0..nz {
            let vel = u[i * nz + k];
            if vel == 0.0 {
                continue;
            }
            let (off_l, off_r) = face_offsets(
                scheme,
                vel,
                phi[imm * nz + k],
                phi[im * nz + k],
                phi[i * nz + k],
                phi[ip * nz + k],
            );
            out[im * nz + k] -= vel * off_l * rdx;
            out[i * nz + k] += vel * off_r * rdx;
        }
    }
    // interior z-faces: face k separates cells k-1 (below) and k (above)
    for i in 0..nx {
        let col = &phi[i * nz..(i + 1) * nz];
        let wcol = &w[i * (nz + 1)..(i + 1) * (nz + 1)];
        let ocol = &mut out[i * nz..(i + 1) * nz];
        for k in 1..nz {
            let vel = wcol[k];
            if vel == 0.0 {
                continue;
            }
            let face_scheme = if scheme == Scheme::Upwind3 && (k == 1 || k == nz - 1) {
                Scheme::Upwind1
            } else {
                scheme
            };
            let ll = if k >= 2 { col[k - 2] } else { col[k - 1] };
            let rr = if k + 1 < nz { col[k + 1] } else { col[k] };
            let (off_l, off_r) = face_offsets(face_scheme, vel, ll, col[k - 1], col[k], rr);
            ocol[k - 1] -= vel * off_l * rdz;
            ocol[k] += vel * off_r * rdz;
        }
    }
}

/// `−(𝐮·∇)φ` at cell centres as a fresh vector.
pub fn advect_scalar(phi: &[f64], u: &[f64], w: &[f64], grid: &Grid, order: u8) -> Vec<f64> {
    let mut out = vec![0.0; phi.len()];
    add_scalar_advection(phi, u, w, grid, Scheme::scalar(order, false), &mut out);
    out
}

/// One-dimensional advective stencil `a ∂φ` with the advecting velocity
/// known at the two half points either side of `φ₀`.
#[inline(always)]
fn advective_1d(scheme: Scheme, phi_m: f64, phi_0: f64, phi_p: f64, vel_l: f64, vel_r: f64) -> f64 {
    match scheme {
        Scheme::Centered => 0.5 * (vel_l * (phi_0 - phi_m) + vel_r * (phi_p - phi_0)),
        _ => vel_l.max(0.0) * (phi_0 - phi_m) + vel_r.min(0.0) * (phi_p - phi_0),
    }
}

/// Adds the advective-form momentum nonlinearity `−(𝐮·∇)𝐮` to `du` (x-faces)
/// and `dw` (z-faces; boundary rows untouched).
///
/// Advecting velocities are averaged to the half points between
/// neighbouring velocity nodes; the rigid-lid corners carry `w = 0`.
/// `scheme` is either first-order upwind or centred.
pub fn add_momentum_advection_advective(
    fields: &FieldView<'_>,
    grid: &Grid,
    scheme: Scheme,
    du: &mut [f64],
    dw: &mut [f64],
) {
    let (nx, nz) = (grid.nx, grid.nz);
    let nzw = nz + 1;
    let rdx = 1.0 / grid.dx;
    let rdz = 1.0 / grid.dz;
    let (u, w) = (fields.u, fields.w);
    let scheme = if scheme == Scheme::Upwind3 {
        Scheme::Upwind1
    } else {
        scheme
    };

    for i in 0..nx {
        let im = grid.wrap(i as isize - 1);
        let ip = grid.wrap(i as isize + 1);
        for k in 0..nz {
            let c = i * nz + k;
            let u0 = u[c];
            // x-direction: half points are the centres of cells i-1 and i
            let um = u[im * nz + k];
            let up = u[ip * nz + k];
            let ax = advective_1d(scheme, um, u0, up, 0.5 * (um + u0), 0.5 * (u0 + up)) * rdx;
            // z-direction: half points are the corners on z-faces k and k+1
            let wl = 0.5 * (w[im * nzw + k] + w[i * nzw + k]);
            let wr = 0.5 * (w[im * nzw + k + 1] + w[i * nzw + k + 1]);
            let ub = if k > 0 { u[c - 1] } else { u0 };
            let ua = if k + 1 < nz { u[c + 1] } else { u0 };
            let az = advective_1d(scheme, ub, u0, ua, wl, wr) * rdz;
            du[c] -= ax + az;
        }
    }
    for i in 0..nx {
        let im = grid.wrap(i as isize - 1);
        let ip = grid.wrap(i as isize + 1);
        for k in 1..nz {
            let c = i * nzw + k;
            let w0 = w[c];
            let wm = w[im * nzw + k];
            let wp = w[ip * nzw + k];
            // corners on x-faces i and i+1 at height z_k
            let ul = 0.5 * (u[i * nz + k - 1] + u[i * nz + k]);
            let ur = 0.5 * (u[ip * nz + k - 1] + u[ip * nz + k]);
            let ax = advective_1d(scheme, wm, w0, wp, ul, ur) * rdx;
            let wb = w[c - 1];
            let wa = w[c + 1];
            let az = advective_1d(scheme, wb, w0, wa, 0.5 * (wb + w0), 0.5 * (w0 + wa)) * rdz;
            dw[c] -= ax + az;
        }
    }
}

/// In-slice vorticity `η = ∂u/∂z − ∂w/∂x` at the corners `(x_face[i], z_face[k])`,
/// `nx × (nz + 1)` values. Floor and lid corners use one-sided `∂u/∂z`
/// and `w = 0`.
pub fn corner_vorticity(u: &[f64], w: &[f64], grid: &Grid, eta: &mut [f64]) {
    let (nx, nz) = (grid.nx, grid.nz);
    let nzw = nz + 1;
    let rdx = 1.0 / grid.dx;
    let rdz = 1.0 / grid.dz;
    for i in 0..nx {
        let im = grid.wrap(i as isize - 1);
        let ucol = &u[i * nz..(i + 1) * nz];
        for k in 0..=nz {
            let dudz = if k == 0 {
                (ucol[1] - ucol[0]) * rdz
            } else if k == nz {
                (ucol[nz - 1] - ucol[nz - 2]) * rdz
            } else {
                (ucol[k] - ucol[k - 1]) * rdz
            };
            let dwdx = (w[i * nzw + k] - w[im * nzw + k]) * rdx;
            eta[i * nzw + k] = dudz - dwdx;
        }
    }
}

/// Adds the vector-invariant momentum nonlinearity
/// `−[(∇×𝐮)×𝐮 + ∇(|𝐮|²/2)] = −(η w + ∂K/∂x, −η u + ∂K/∂z)`.
///
/// `η` lives at corners and is averaged with corner velocities onto the
/// velocity nodes; `K` lives at centres and is differenced compactly.
/// No upwinding is applied. `eta` and `ke` are scratch buffers of length
/// `nx (nz + 1)` and `nx nz`.
pub fn add_momentum_advection_vector_invariant(
    fields: &FieldView<'_>,
    grid: &Grid,
    eta: &mut [f64],
    ke: &mut [f64],
    du: &mut [f64],
    dw: &mut [f64],
) {
    let (nx, nz) = (grid.nx, grid.nz);
    let nzw = nz + 1;
    let rdx = 1.0 / grid.dx;
    let rdz = 1.0 / grid.dz;
    let (u, w) = (fields.u, fields.w);
    corner_vorticity(u, w, grid, eta);
    for i in 0..nx {
        let ip = grid.wrap(i as isize + 1);
        for k in 0..nz {
            let (ul, ur) = (u[i * nz + k], u[ip * nz + k]);
            let (wb, wa) = (w[i * nzw + k], w[i * nzw + k + 1]);
            ke[i * nz + k] = 0.25 * (ul * ul + ur * ur + wb * wb + wa * wa);
        }
    }
    for i in 0..nx {
        let im = grid.wrap(i as isize - 1);
        for k in 0..nz {
            let wc_b = 0.5 * (w[im * nzw + k] + w[i * nzw + k]);
            let wc_a = 0.5 * (w[im * nzw + k + 1] + w[i * nzw + k + 1]);
            let eta_w = 0.5 * (eta[i * nzw + k] * wc_b + eta[i * nzw + k + 1] * wc_a);
            let dkdx = (ke[i * nz + k] - ke[im * nz + k]) * rdx;
            du[i * nz + k] -= eta_w + dkdx;
        }
    }
    for i in 0..nx {
        let ip = grid.wrap(i as isize + 1);
        for k in 1..nz {
            let uc_l = 0.5 * (u[i * nz + k - 1] + u[i * nz + k]);
            let uc_r = 0.5 * (u[ip * nz + k - 1] + u[ip * nz + k]);
            let eta_u = 0.5 * (eta[i * nzw + k] * uc_l + eta[ip * nzw + k] * uc_r);
            let dkdz = (ke[i * nz + k] - ke[i * nz + k - 1]) * rdz;
            dw[i * nzw + k] -= -eta_u + dkdz;
        }
    }
}

/// Advective-form `(du/dt, dw/dt)` contribution with first-order upwinding.
pub fn velocity_advection_advective(fields: &FieldView<'_>, grid: &Grid) -> (Vec<f64>, Vec<f64>) {
    let mut du = vec![0.0; fields.u.len()];
    let mut dw = vec![0.0; fields.w.len()];
    add_momentum_advection_advective(fields, grid, Scheme::Upwind1, &mut du, &mut dw);
    (du, dw)
}

/// Vector-invariant `(du/dt, dw/dt)` contribution.
pub fn velocity_advection_vector_invariant(
    fields: &FieldView<'_>,
    grid: &Grid,
) -> (Vec<f64>, Vec<f64>) {
    let mut du = vec![0.0; fields.u.len()];
    let mut dw = vec![0.0; fields.w.len()];
    let mut eta = vec![0.0; fields.w.len()];
    let mut ke = vec![0.0; fields.u.len()];
    add_momentum_advection_vector_invariant(fields, grid, &mut eta, &mut ke, &mut du, &mut dw);
    (du, dw)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{default_constants, State};
    use std::f64::consts::PI;

    fn grid(nx: usize, nz: usize) -> Grid {
        let c = default_constants();
        Grid::new(nx, nz, c.half_width, c.height).unwrap()
    }

    /// Non-solenoidal, non-uniform velocity with `w = 0` on floor and lid.
    fn rough_velocity(g: &Grid) -> (Vec<f64>, Vec<f64>) {
        let (nx, nz) = (g.nx, g.nz);
        let u = (0..nx * nz)
            .map(|n| 3.0 * ((n * 7919) % 13) as f64 / 13.0 - 1.2)
            .collect();
        let mut w: Vec<f64> = (0..nx * (nz + 1))
            .map(|n| ((n * 104_729) % 11) as f64 / 110.0 - 0.04)
            .collect();
        crate::domain::zero_boundary_rows(&mut w, nz);
        (u, w)
    }

    #[test]
    fn constant_scalar_has_zero_tendency() {
        let g = grid(8, 6);
        let (u, w) = rough_velocity(&g);
        let phi = vec![301.5; g.cells()];
        for scheme in [Scheme::Upwind1, Scheme::Upwind3, Scheme::Centered] {
            let mut out = vec![0.0; g.cells()];
            add_scalar_advection(&phi, &u, &w, &g, scheme, &mut out);
            assert!(out.iter().all(|&t| t == 0.0), "{scheme:?}");
        }
    }

    #[test]
    fn donor_cell_step() {
        let g = grid(8, 4);
        let u = vec![2.0; g.cells()];
        let w = vec![0.0; g.nx * (g.nz + 1)];
        let phi: Vec<f64> = (0..g.cells())
            .map(|n| if n / g.nz < 4 { 1.0 } else { 0.0 })
            .collect();
        let out = advect_scalar(&phi, &u, &w, &g, 1);
        for i in 0..g.nx {
            let expect = match i {
                4 => 2.0 / g.dx,
                0 => -2.0 / g.dx,
                _ => 0.0,
            };
            for k in 0..g.nz {
                assert!(
                    (out[i * g.nz + k] - expect).abs() < 1e-20,
                    "i = {i}: {}",
                    out[i * g.nz + k]
                );
            }
        }
        // reversing the flow takes the upstream value from the right
        let u = vec![-2.0; g.cells()];
        let out = advect_scalar(&phi, &u, &w, &g, 1);
        assert!((out[3 * g.nz] + 2.0 / g.dx).abs() < 1e-20);
        assert!((out[7 * g.nz] - 2.0 / g.dx).abs() < 1e-20);
    }

    fn sine_error(nx: usize, order: u8) -> f64 {
        let g = grid(nx, 4);
        let lx = 2.0 * g.half_width;
        let k = 2.0 * PI / lx;
        let u = vec![1.5; g.cells()];
        let w = vec![0.0; g.nx * (g.nz + 1)];
        let phi: Vec<f64> = (0..g.cells())
            .map(|n| (k * g.x_center[n / g.nz]).sin())
            .collect();
        let out = advect_scalar(&phi, &u, &w, &g, order);
        (0..g.cells())
            .map(|n| (out[n] + 1.5 * k * (k * g.x_center[n / g.nz]).cos()).abs())
            .fold(0.0, f64::max)
    }

    #[test]
    fn upwind_convergence_orders() {
        for (order, lo) in [(1u8, 1.8), (3u8, 7.0)] {
            let errs: Vec<f64> = [16, 32, 64].iter().map(|&n| sine_error(n, order)).collect();
            for pair in errs.windows(2) {
                let ratio = pair[0] / pair[1];
                assert!(
                    ratio > lo && ratio < 2.0 * lo,
                    "order {order}: ratio {ratio}"
                );
            }
        }
    }

    #[test]
    fn uniform_flow_has_no_momentum_tendency() {
        let g = grid(6, 5);
        let mut s = State::zeros(g.layout());
        s.view_mut().u.fill(4.0);
        for scheme in [Scheme::Upwind1, Scheme::Centered] {
            let mut du = vec![0.0; g.cells()];
            let mut dw = vec![0.0; g.nx * (g.nz + 1)];
            add_momentum_advection_advective(&s.view(), &g, scheme, &mut du, &mut dw);
            assert!(du.iter().chain(&dw).all(|&t| t == 0.0));
        }
        let (du, dw) = velocity_advection_vector_invariant(&s.view(), &g);
        assert!(du.iter().chain(&dw).all(|&t| t == 0.0));
    }

    #[test]
    fn vorticity_of_linear_shear() {
        let g = grid(5, 6);
        let mut s = State::zeros(g.layout());
        let shear = 1e-3;
        for n in 0..g.cells() {
            s.view_mut().u[n] = shear * g.z_center[n % g.nz];
        }
        let mut eta = vec![0.0; g.nx * (g.nz + 1)];
        corner_vorticity(s.u(), s.w(), &g, &mut eta);
        assert!(eta.iter().all(|&e| (e - shear).abs() < 1e-15));
    }

    /// Smooth non-divergent cellular flow with `w = 0` on floor and lid,
    /// `u = A cos(kx) cos(mz)`, `w = (A k / m) sin(kx) sin(mz)`.
    fn cellular(nx: usize, nz: usize) -> (Grid, State, f64, f64, f64) {
        let g = grid(nx, nz);
        let (a, k, m) = (2.0, 2.0 * PI / (2.0 * g.half_width), PI / g.height);
        let mut s = State::zeros(g.layout());
        for i in 0..nx {
            for kk in 0..nz {
                s.view_mut().u[i * nz + kk] =
                    a * (k * g.x_face[i]).cos() * (m * g.z_center[kk]).cos();
            }
            for kk in 0..=nz {
                s.view_mut().w[i * (nz + 1) + kk] =
                    a * k / m * (k * g.x_center[i]).sin() * (m * g.z_face[kk]).sin();
            }
        }
        s.zero_boundary_w();
        (g, s, a, k, m)
    }

    /// Max error of `−(𝐮·∇)u` against the analytic value over u-points.
    fn momentum_error(nx: usize, nz: usize, vector_invariant: bool) -> f64 {
        let (g, s, a, k, m) = cellular(nx, nz);
        let (du, _) = if vector_invariant {
            velocity_advection_vector_invariant(&s.view(), &g)
        } else {
            let mut du = vec![0.0; g.cells()];
            let mut dw = vec![0.0; g.nx * (g.nz + 1)];
            add_momentum_advection_advective(&s.view(), &g, Scheme::Centered, &mut du, &mut dw);
            (du, dw)
        };
        let mut err: f64 = 0.0;
        for i in 0..nx {
            for kk in 0..nz {
                let (x, z) = (g.x_face[i], g.z_center[kk]);
                let u = a * (k * x).cos() * (m * z).cos();
                let w = a * k / m * (k * x).sin() * (m * z).sin();
                let ux = -a * k * (k * x).sin() * (m * z).cos();
                let uz = -a * m * (k * x).cos() * (m * z).sin();
                let exact = -(u * ux + w * uz);
                err = err.max((du[i * nz + kk] - exact).abs());
            }
        }
        err
    }

    #[test]
    fn advective_and_vector_invariant_forms_converge() {
        for vi in [false, true] {
            let coarse = momentum_error(16, 16, vi);
            let fine = momentum_error(32, 32, vi);
            let finer = momentum_error(64, 64, vi);
            assert!(
                coarse / fine > 1.8 && fine / finer > 1.8,
                "vi = {vi}: {coarse} {fine} {finer}"
            );
        }
        // with centred stencils the two forms coincide to rounding for a
        // non-divergent flow: the discrete vorticity and kinetic-energy terms
        // telescope into the centred advective stencil
        for n in [16, 32] {
            let (g, s, ..) = cellular(n, n);
            let (a, _) = velocity_advection_vector_invariant(&s.view(), &g);
            let mut b = vec![0.0; g.cells()];
            let mut dw = vec![0.0; g.nx * (g.nz + 1)];
            add_momentum_advection_advective(&s.view(), &g, Scheme::Centered, &mut b, &mut dw);
            let scale = crate::domain::max_abs(&b);
            let diff = a
                .iter()
                .zip(&b)
                .map(|(x, y)| (x - y).abs())
                .fold(0.0, f64::max);
            assert!(diff < 1e-12 * scale, "n = {n}: {diff} vs {scale}");
        }
    }

    #[test]
    fn rotationless_shear_is_not_advected() {
        let g = grid(6, 8);
        let mut s = State::zeros(g.layout());
        for n in 0..g.cells() {
            s.view_mut().u[n] = 3.0 + 2e-3 * g.z_center[n % g.nz];
        }
        let (du, dw) = velocity_advection_advective(&s.view(), &g);
        assert!(du.iter().chain(&dw).all(|&t| t == 0.0));
    }

    /// Max error of the upwind `−u u_x` for `u = U sin(kx)`, `w = 0`.
    fn burgers_error(nx: usize) -> f64 {
        let g = grid(nx, 4);
        let k = 2.0 * PI / (2.0 * g.half_width);
        let mut s = State::zeros(g.layout());
        for n in 0..g.cells() {
            s.view_mut().u[n] = 4.0 * (k * g.x_face[n / g.nz]).sin();
        }
        let (du, _) = velocity_advection_advective(&s.view(), &g);
        (0..g.cells())
            .map(|n| {
                let x = g.x_face[n / g.nz];
                (du[n] + 16.0 * k * (k * x).sin() * (k * x).cos()).abs()
            })
            .fold(0.0, f64::max)
    }

    #[test]
    fn burgers_profile_first_order() {
        let e: Vec<f64> = [32, 64, 128].iter().map(|&n| burgers_error(n)).collect();
        for pair in e.windows(2) {
            let ratio = pair[0] / pair[1];
            assert!(ratio > 1.7 && ratio < 2.5, "ratio {ratio}");
        }
    }

    /// Max error of the vector-invariant form for `u = ∇φ`,
    /// `φ = cos(πx/L)`, against `−∇(|∇φ|²/2)`; also returns max |η|.
    fn irrotational_error(nx: usize) -> (f64, f64) {
        let g = grid(nx, 4);
        let k = PI / g.half_width;
        let mut s = State::zeros(g.layout());
        for n in 0..g.cells() {
            s.view_mut().u[n] = -k * (k * g.x_face[n / g.nz]).sin();
        }
        let mut eta = vec![0.0; g.nx * (g.nz + 1)];
        corner_vorticity(s.u(), s.w(), &g, &mut eta);
        let (du, dw) = velocity_advection_vector_invariant(&s.view(), &g);
        assert!(dw.iter().all(|&t| t == 0.0));
        let err = (0..g.cells())
            .map(|n| {
                let x = g.x_face[n / g.nz];
                (du[n] + k * k * k * (k * x).sin() * (k * x).cos()).abs()
            })
            .fold(0.0, f64::max);
        (err, crate::domain::max_abs(&eta))
    }

    #[test]
    fn irrotational_flow_is_pure_kinetic_gradient() {
        let (e1, eta1) = irrotational_error(32);
        let (e2, eta2) = irrotational_error(64);
        assert_eq!(eta1, 0.0);
        assert_eq!(eta2, 0.0);
        assert!(e1 / e2 > 3.5, "{e1} {e2}");
    }
}
