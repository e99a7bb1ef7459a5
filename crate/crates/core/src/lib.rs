//! Numerical laboratory for complex geometrical optics (CGO) solutions of the
//! planar Schrodinger equation with L^p potentials.

pub mod cauchy;
pub mod cgo;
pub mod config;
pub mod conjugated;
pub mod error;
pub mod experiments;
pub mod fft;
pub mod forward_dn;
pub mod grid;
pub mod io;
pub mod phase;
pub mod presets;
pub mod quad;
pub mod reconstruct;
pub mod stationary;

pub use error::{LabError, Result};
pub use num_complex::Complex64 as C64;
