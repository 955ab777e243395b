pub mod advection;
pub mod diagnostics;
pub mod domain;
pub mod driver;
pub mod dynamics;
pub mod error;
pub mod init;
pub mod io;
pub mod krylov;
pub mod newton;
pub mod preconditioner;
pub mod thermo;
pub mod timestep;

pub use error::{Error, Result};
