//! Legacy-ASCII VTK rectilinear-grid snapshots.
//!
//! Points are the cell corners, `(nx + 1) × (nz + 1)` with the periodic
//! column repeated at `x = L`. Cell data holds `u_xface` (the left-face
//! `u` of each cell), `w_zface` (the lower-face `w`; the lid row is zero
//! by construction and omitted), `v`, `theta`, `D` and `Pi`; point data
//! holds the potential vorticity `q`. Values carry 17 significant digits,
//! so they round-trip exactly. A sidecar `<file>.meta` records the model
//! time and configuration hash.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::diagnostics::potential_vorticity;
use crate::domain::{Grid, PhysicalConstants, State};
use crate::thermo::exner_field;
use crate::Error;

pub const CELL_FIELDS: [&str; 6] = ["u_xface", "w_zface", "v", "theta", "D", "Pi"];
pub const POINT_FIELDS: [&str; 1] = ["q"];

/// Contents of a snapshot file.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub nx: usize,
    pub nz: usize,
    pub x: Vec<f64>,
    pub z: Vec<f64>,
    /// Cell fields in VTK order (x fastest).
    pub cell: Vec<(String, Vec<f64>)>,
    pub point: Vec<(String, Vec<f64>)>,
    pub meta: Option<SnapshotMeta>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotMeta {
    pub t: f64,
    pub config_hash: String,
}

impl Snapshot {
    pub fn cell_field(&self, name: &str) -> Option<&[f64]> {
        self.cell
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, v)| v.as_slice())
    }

    pub fn point_field(&self, name: &str) -> Option<&[f64]> {
        self.point
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, v)| v.as_slice())
    }

    /// Rebuilds the prognostic state (lid `w` is zero).
    pub fn to_state(&self) -> Option<State> {
        let (nx, nz) = (self.nx, self.nz);
        let mut state = State::zeros(crate::domain::Layout::new(nx, nz));
        state.t = self.meta.as_ref().map_or(0.0, |m| m.t);
        let f = state.view_mut();
        let u = self.cell_field("u_xface")?;
        let w = self.cell_field("w_zface")?;
        let v = self.cell_field("v")?;
        let theta = self.cell_field("theta")?;
        let d = self.cell_field("D")?;
        for k in 0..nz {
            for i in 0..nx {
                let src = k * nx + i;
                let dst = i * nz + k;
                f.u[dst] = u[src];
                f.w[i * (nz + 1) + k] = w[src];
                f.v[dst] = v[src];
                f.theta[dst] = theta[src];
                f.density[dst] = d[src];
            }
        }
        Some(state)
    }
}

fn meta_path(path: &Path) -> PathBuf {
    let mut p = path.as_os_str().to_owned();
    p.push(".meta");
    PathBuf::from(p)
}

fn push_values(out: &mut String, values: impl Iterator<Item = f64>) {
    for (n, v) in values.enumerate() {
        if n > 0 {
            out.push(if n % 6 == 0 { '\n' } else { ' ' });
        }
        let _ = write!(out, "{v:.16e}");
    }
    out.push('\n');
}

/// Writes `state` as a VTK file plus its `.meta` sidecar.
pub fn write_snapshot(
    state: &State,
    grid: &Grid,
    c: &PhysicalConstants,
    config_hash: &str,
    path: impl AsRef<Path>,
) -> Result<(), Error> {
    let path = path.as_ref();
    let (nx, nz) = (grid.nx, grid.nz);
    let f = state.view();
    let mut pi = vec![0.0; grid.cells()];
    exner_field(f.density, f.theta, c, &mut pi)?;
    let q = potential_vorticity(state, grid, c);

    let mut out = String::new();
    out.push_str("# vtk DataFile Version 3.0\n");
    let _ = writeln!(
        out,
        "eady-slice snapshot t={:?} config={config_hash}",
        state.t
    );
    out.push_str("ASCII\nDATASET RECTILINEAR_GRID\n");
    let _ = writeln!(out, "DIMENSIONS {} {} 1", nx + 1, nz + 1);
    let _ = writeln!(out, "X_COORDINATES {} double", nx + 1);
    push_values(
        &mut out,
        grid.x_face
            .iter()
            .copied()
            .chain(std::iter::once(grid.half_width)),
    );
    let _ = writeln!(out, "Y_COORDINATES {} double", nz + 1);
    push_values(&mut out, grid.z_face.iter().copied());
    out.push_str("Z_COORDINATES 1 double\n0\n");

    let _ = writeln!(out, "CELL_DATA {}", nx * nz);
    let cell_order = |field: &[f64], stride: usize| -> Vec<f64> {
        let mut v = Vec::with_capacity(nx * nz);
        for k in 0..nz {
            for i in 0..nx {
                v.push(field[i * stride + k]);
            }
        }
        v
    };
    let fields: [(&str, Vec<f64>); 6] = [
        ("u_xface", cell_order(f.u, nz)),
        ("w_zface", cell_order(f.w, nz + 1)),
        ("v", cell_order(f.v, nz)),
        ("theta", cell_order(f.theta, nz)),
        ("D", cell_order(f.density, nz)),
        ("Pi", cell_order(&pi, nz)),
    ];
    for (name, values) in &fields {
        let _ = writeln!(out, "SCALARS {name} double 1\nLOOKUP_TABLE default");
        push_values(&mut out, values.iter().copied());
    }

    let _ = writeln!(out, "POINT_DATA {}", (nx + 1) * (nz + 1));
    out.push_str("SCALARS q double 1\nLOOKUP_TABLE default\n");
    let mut points = Vec::with_capacity((nx + 1) * (nz + 1));
    for k in 0..=nz {
        for i in 0..=nx {
            points.push(q.at(i % nx, k));
        }
    }
    push_values(&mut out, points.into_iter());

    std::fs::write(path, out).map_err(|e| Error::io(path, e))?;
    let meta = format!(
        "t = {:?}\nconfig_hash = {config_hash}\nnx = {nx}\nnz = {nz}\n",
        state.t
    );
    let mpath = meta_path(path);
    std::fs::write(&mpath, meta).map_err(|e| Error::io(&mpath, e))?;
    Ok(())
}

struct Tokens<'a> {
    it: std::iter::Peekable<std::str::SplitWhitespace<'a>>,
    path: &'a Path,
}

impl<'a> Tokens<'a> {
    fn next(&mut self) -> Result<&'a str, Error> {
        self.it
            .next()
            .ok_or_else(|| Error::format(self.path, "unexpected end of file"))
    }

    fn expect(&mut self, word: &str) -> Result<(), Error> {
        let got = self.next()?;
        if got == word {
            Ok(())
        } else {
            Err(Error::format(
                self.path,
                format!("expected `{word}`, found `{got}`"),
            ))
        }
    }

    fn usize(&mut self) -> Result<usize, Error> {
        let t = self.next()?;
        t.parse()
            .map_err(|_| Error::format(self.path, format!("bad integer `{t}`")))
    }

    fn floats(&mut self, n: usize) -> Result<Vec<f64>, Error> {
        (0..n)
            .map(|_| {
                let t = self.next()?;
                t.parse()
                    .map_err(|_| Error::format(self.path, format!("bad number `{t}`")))
            })
            .collect()
    }

    fn scalars(&mut self, n: usize) -> Result<(String, Vec<f64>), Error> {
        let name = self.next()?.to_string();
        self.expect("double")?;
        self.expect("1")?;
        self.expect("LOOKUP_TABLE")?;
        self.expect("default")?;
        Ok((name, self.floats(n)?))
    }
}

/// Reads a snapshot written by [`write_snapshot`], and its sidecar if present.
pub fn read_snapshot(path: impl AsRef<Path>) -> Result<Snapshot, Error> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = text.splitn(3, '\n');
    let magic = lines.next().unwrap_or("");
    if !magic.starts_with("# vtk DataFile") {
        return Err(Error::format(path, "missing VTK header"));
    }
    let _title = lines.next();
    let body = lines.next().unwrap_or("");
    let mut tok = Tokens {
        it: body.split_whitespace().peekable(),
        path,
    };
    tok.expect("ASCII")?;
    tok.expect("DATASET")?;
    tok.expect("RECTILINEAR_GRID")?;
    tok.expect("DIMENSIONS")?;
    let px = tok.usize()?;
    let pz = tok.usize()?;
    tok.expect("1")?;
    if px < 2 || pz < 2 {
        return Err(Error::format(path, "degenerate dimensions"));
    }
    let (nx, nz) = (px - 1, pz - 1);
    tok.expect("X_COORDINATES")?;
    let n = tok.usize()?;
    tok.expect("double")?;
    let x = tok.floats(n)?;
    tok.expect("Y_COORDINATES")?;
    let n = tok.usize()?;
    tok.expect("double")?;
    let z = tok.floats(n)?;
    tok.expect("Z_COORDINATES")?;
    tok.expect("1")?;
    tok.expect("double")?;
    tok.floats(1)?;
    if x.len() != px || z.len() != pz {
        return Err(Error::format(
            path,
            "coordinate count does not match DIMENSIONS",
        ));
    }

    let mut cell = Vec::new();
    let mut point = Vec::new();
    while let Some(section) = tok.it.next() {
        let count = tok.usize()?;
        let (target, expected) = match section {
            "CELL_DATA" => (&mut cell, nx * nz),
            "POINT_DATA" => (&mut point, px * pz),
            other => return Err(Error::format(path, format!("unexpected section `{other}`"))),
        };
        if count != expected {
            return Err(Error::format(
                path,
                format!("{section} count {count}, expected {expected}"),
            ));
        }
        while tok.it.peek() == Some(&"SCALARS") {
            tok.next()?;
            target.push(tok.scalars(count)?);
        }
    }

    let mpath = meta_path(path);
    let meta = match std::fs::read_to_string(&mpath) {
        Ok(text) => {
            let mut t = None;
            let mut hash = None;
            for line in text.lines() {
                if let Some((k, v)) = line.split_once('=') {
                    match k.trim() {
                        "t" => t = v.trim().parse::<f64>().ok(),
                        "config_hash" => hash = Some(v.trim().to_string()),
                        _ => {}
                    }
                }
            }
            match (t, hash) {
                (Some(t), Some(config_hash)) => Some(SnapshotMeta { t, config_hash }),
                _ => return Err(Error::format(&mpath, "sidecar lacks `t` or `config_hash`")),
            }
        }
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => None,
        Err(e) => return Err(Error::io(&mpath, e)),
    };
    Ok(Snapshot {
        nx,
        nz,
        x,
        z,
        cell,
        point,
        meta,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::RunConfig;
    use crate::init::initial_state;

    #[test]
    fn round_trip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let config = RunConfig {
            nx: 6,
            nz: 5,
            ..RunConfig::default()
        };
        let (grid, mut state) = initial_state(&config).unwrap();
        state.t = 12345.678;
        state.view_mut().w[3] = 1.0 / 3.0;
        let path = dir.path().join("s.vtk");
        write_snapshot(&state, &grid, &config.constants, "abc", &path).unwrap();
        let snap = read_snapshot(&path).unwrap();
        assert_eq!((snap.nx, snap.nz), (6, 5));
        assert_eq!(snap.cell.len(), CELL_FIELDS.len());
        for (name, (got, _)) in CELL_FIELDS.iter().zip(&snap.cell) {
            assert_eq!(name, got);
        }
        assert_eq!(snap.point_field("q").unwrap().len(), 7 * 6);
        assert_eq!(
            snap.meta,
            Some(SnapshotMeta {
                t: 12345.678,
                config_hash: "abc".into()
            })
        );
        let back = snap.to_state().unwrap();
        assert_eq!(back.packed(), state.packed());
        assert_eq!(back.t, state.t);
        assert_eq!(snap.x[6], config.constants.half_width);
    }

    #[test]
    fn zero_amplitude_snapshot_has_zero_v() {
        let dir = tempfile::tempdir().unwrap();
        let config = RunConfig {
            nx: 6,
            nz: 5,
            amplitude: 0.0,
            ..RunConfig::default()
        };
        let (grid, state) = initial_state(&config).unwrap();
        let path = dir.path().join("s.vtk");
        write_snapshot(&state, &grid, &config.constants, "h", &path).unwrap();
        let snap = read_snapshot(&path).unwrap();
        assert!(snap.cell_field("v").unwrap().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn truncated_file_is_a_format_error() {
        let dir = tempfile::tempdir().unwrap();
        let config = RunConfig {
            nx: 4,
            nz: 4,
            ..RunConfig::default()
        };
        let (grid, state) = initial_state(&config).unwrap();
        let path = dir.path().join("s.vtk");
        write_snapshot(&state, &grid, &config.constants, "h", &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        std::fs::write(&path, &text[..text.len() / 2]).unwrap();
        let err = read_snapshot(&path).unwrap_err();
        assert_eq!(err.exit_code(), 4);
    }
}
