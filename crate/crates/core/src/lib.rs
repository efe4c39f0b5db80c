//! Free-boundary incompressible neo-Hookean elastodynamics with surface tension
//! on a periodic slab, solved in graphical (flattened) coordinates.

pub mod alinhac;
pub mod cli;
pub mod config;
pub mod diagnostics;
pub mod elliptic;
pub mod error;
pub mod evolve;
pub mod fd;
pub mod graphmap;
pub mod grid;
pub mod io;
pub mod limit;
pub mod state;
pub mod verify;

pub use error::{Error, Result};
pub use grid::{Grid, SurfaceField, TanAxis, VectorField, VolumeField};
