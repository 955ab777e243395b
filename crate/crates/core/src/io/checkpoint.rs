//! Bit-exact binary checkpoints.
//!
//! Layout (little endian): magic `EADYCKPT`, `u32` version, `u64` length
//! and UTF-8 bytes of the canonical config text, `f64` model time,
//! `f64` breeding duration (NaN if breeding has not finished), `u8` reset
//! flag, `u64` completed post-breeding steps, two `u64` Newton and GMRES
//! iteration counts not yet reported in the time series, `u64` nx,
//! `u64` nz, `u64` value count, then the packed state.

use std::path::Path;

use crate::domain::{Layout, RunConfig, State};
use crate::Error;

use super::config::{config_to_text, parse_config_str};

pub const CHECKPOINT_VERSION: u32 = 1;
const MAGIC: &[u8; 8] = b"EADYCKPT";

/// Everything needed to continue a run.
#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub config: RunConfig,
    pub state: State,
    /// Breeding duration, s, once breeding has finished.
    pub t_breed: Option<f64>,
    /// Whether the clock has been reset after breeding.
    pub reset: bool,
    /// Post-breeding steps already taken.
    pub steps_done: u64,
    /// Newton and GMRES iterations since the last time-series row.
    pub pending_iters: (u64, u64),
}

pub fn checkpoint(ckpt: &Checkpoint, path: impl AsRef<Path>) -> Result<(), Error> {
    let path = path.as_ref();
    let text = config_to_text(&ckpt.config);
    let layout = ckpt.state.layout();
    let data = ckpt.state.packed();
    let mut buf = Vec::with_capacity(64 + text.len() + 8 * data.len());
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&CHECKPOINT_VERSION.to_le_bytes());
    buf.extend_from_slice(&(text.len() as u64).to_le_bytes());
    buf.extend_from_slice(text.as_bytes());
    buf.extend_from_slice(&ckpt.state.t.to_le_bytes());
    buf.extend_from_slice(&ckpt.t_breed.unwrap_or(f64::NAN).to_le_bytes());
    buf.push(ckpt.reset as u8);
    buf.extend_from_slice(&ckpt.steps_done.to_le_bytes());
    buf.extend_from_slice(&ckpt.pending_iters.0.to_le_bytes());
    buf.extend_from_slice(&ckpt.pending_iters.1.to_le_bytes());
    buf.extend_from_slice(&(layout.nx as u64).to_le_bytes());
    buf.extend_from_slice(&(layout.nz as u64).to_le_bytes());
    buf.extend_from_slice(&(data.len() as u64).to_le_bytes());
    for v in data {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    // write-then-rename so an interrupted write never clobbers a good file
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, &buf).map_err(|e| Error::io(&tmp, e))?;
    std::fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
    path: &'a Path,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], Error> {
        if self.pos + n > self.buf.len() {
            return Err(Error::format(self.path, "truncated checkpoint"));
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u64(&mut self) -> Result<u64, Error> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64, Error> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}

/// Reads a checkpoint. With `expected`, the stored grid must match its
/// `nx` and `nz`.
pub fn restore(path: impl AsRef<Path>, expected: Option<&RunConfig>) -> Result<Checkpoint, Error> {
    let path = path.as_ref();
    let buf = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    let mut r = Reader {
        buf: &buf,
        pos: 0,
        path,
    };
    if r.take(8)? != MAGIC {
        return Err(Error::format(path, "not a checkpoint file"));
    }
    let version = u32::from_le_bytes(r.take(4)?.try_into().unwrap());
    if version != CHECKPOINT_VERSION {
        return Err(Error::format(
            path,
            format!("checkpoint version {version}, expected {CHECKPOINT_VERSION}"),
        ));
    }
    let len = r.u64()? as usize;
    let text = std::str::from_utf8(r.take(len)?)
        .map_err(|_| Error::format(path, "config text is not UTF-8"))?;
    let config = parse_config_str(text)?;
    let t = r.f64()?;
    let t_breed = r.f64()?;
    let reset = r.take(1)?[0] != 0;
    let steps_done = r.u64()?;
    let pending_iters = (r.u64()?, r.u64()?);
    let nx = r.u64()? as usize;
    let nz = r.u64()? as usize;
    let n = r.u64()? as usize;
    let layout = Layout::new(nx, nz);
    if nx != config.nx || nz != config.nz || n != layout.len() {
        return Err(Error::format(
            path,
            "stored dimensions disagree with the stored config",
        ));
    }
    if let Some(exp) = expected {
        if exp.nx != nx || exp.nz != nz {
            return Err(Error::DimensionMismatch {
                expected: (exp.nx, exp.nz),
                found: (nx, nz),
            });
        }
    }
    let data = (0..n).map(|_| r.f64()).collect::<Result<Vec<_>, _>>()?;
    if r.pos != buf.len() {
        return Err(Error::format(path, "trailing bytes after state"));
    }
    Ok(Checkpoint {
        config,
        state: State::from_packed(layout, t, data),
        t_breed: if t_breed.is_nan() {
            None
        } else {
            Some(t_breed)
        },
        reset,
        steps_done,
        pending_iters,
    })
}
