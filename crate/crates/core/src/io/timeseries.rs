//! Diagnostic time series as CSV.

use std::fs::{File, OpenOptions};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::diagnostics::DiagnosticRecord;
use crate::Error;

use super::fmt_f64;

pub const TIMESERIES_HEADER: &str =
    "t,K_u,K_v,P,E,rmsv,mass,front_intensity,noise_metric,newton_iters,gmres_iters";

fn row(r: &DiagnosticRecord) -> String {
    format!(
        "{},{},{},{},{},{},{},{},{},{},{}\n",
        fmt_f64(r.t),
        fmt_f64(r.k_u),
        fmt_f64(r.k_v),
        fmt_f64(r.p),
        fmt_f64(r.e),
        fmt_f64(r.rmsv),
        fmt_f64(r.mass),
        fmt_f64(r.front_intensity),
        fmt_f64(r.noise_metric),
        r.newton_iters,
        r.gmres_iters
    )
}

/// Appends one row, writing the header first if the file is new or empty.
pub fn append_timeseries(record: &DiagnosticRecord, path: impl AsRef<Path>) -> Result<(), Error> {
    let mut w = TimeseriesWriter::open(path)?;
    w.append(record)?;
    w.flush()
}

/// Buffered appender that keeps the file open across rows.
#[derive(Debug)]
pub struct TimeseriesWriter {
    path: PathBuf,
    out: BufWriter<File>,
    last_t: Option<f64>,
}

impl TimeseriesWriter {
    pub fn open(path: impl AsRef<Path>) -> Result<Self, Error> {
        let path = path.as_ref().to_path_buf();
        let file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(&path)
            .map_err(|e| Error::io(&path, e))?;
        let empty = file.metadata().map_err(|e| Error::io(&path, e))?.len() == 0;
        let mut out = BufWriter::new(file);
        if empty {
            writeln!(out, "{TIMESERIES_HEADER}").map_err(|e| Error::io(&path, e))?;
        }
        Ok(TimeseriesWriter {
            path,
            out,
            last_t: None,
        })
    }

    pub fn append(&mut self, record: &DiagnosticRecord) -> Result<(), Error> {
        if let Some(t) = self.last_t {
            if !(record.t > t) {
                return Err(Error::format(
                    &self.path,
                    format!("time {} does not increase past {t}", record.t),
                ));
            }
        }
        self.last_t = Some(record.t);
        self.out
            .write_all(row(record).as_bytes())
            .map_err(|e| Error::io(&self.path, e))
    }

    pub fn flush(&mut self) -> Result<(), Error> {
        self.out.flush().map_err(|e| Error::io(&self.path, e))
    }
}

/// Parses a file written by [`TimeseriesWriter`].
pub fn read_timeseries(path: impl AsRef<Path>) -> Result<Vec<DiagnosticRecord>, Error> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = text.lines();
    if lines.next() != Some(TIMESERIES_HEADER) {
        return Err(Error::format(path, "unexpected header"));
    }
    let mut out = Vec::new();
    for (n, line) in lines.enumerate() {
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 11 {
            return Err(Error::format(
                path,
                format!("row {} has {} columns", n + 2, cols.len()),
            ));
        }
        let bad = || Error::format(path, format!("unparsable value on row {}", n + 2));
        let f = |i: usize| cols[i].parse::<f64>().map_err(|_| bad());
        let u = |i: usize| cols[i].parse::<usize>().map_err(|_| bad());
        out.push(DiagnosticRecord {
            t: f(0)?,
            k_u: f(1)?,
            k_v: f(2)?,
            p: f(3)?,
            e: f(4)?,
            rmsv: f(5)?,
            mass: f(6)?,
            front_intensity: f(7)?,
            noise_metric: f(8)?,
            newton_iters: u(9)?,
            gmres_iters: u(10)?,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(t: f64) -> DiagnosticRecord {
        let (k_u, k_v, p) = (1.0 / 3.0, 2.5e10, -5.041_234_030_6e14);
        DiagnosticRecord {
            t,
            k_u,
            k_v,
            p,
            e: k_u + k_v + p,
            rmsv: 0.1,
            newton_iters: 3,
            gmres_iters: 14,
            ..Default::default()
        }
    }

    #[test]
    fn header_and_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ts.csv");
        append_timeseries(&rec(0.0), &path).unwrap();
        append_timeseries(&rec(3600.0), &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().next().unwrap(), TIMESERIES_HEADER);
        assert_eq!(text.lines().count(), 3);
        let back = read_timeseries(&path).unwrap();
        assert_eq!(back, vec![rec(0.0), rec(3600.0)]);
        for r in &back {
            assert_eq!(r.e, r.k_u + r.k_v + r.p);
        }
    }

    #[test]
    fn rejects_non_increasing_time() {
        let dir = tempfile::tempdir().unwrap();
        let mut w = TimeseriesWriter::open(dir.path().join("ts.csv")).unwrap();
        w.append(&rec(10.0)).unwrap();
        assert!(w.append(&rec(10.0)).is_err());
    }
}
