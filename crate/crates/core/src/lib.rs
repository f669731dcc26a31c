//! Micro-fractals of contracting multi-functions and macro-fractals of
//! their expanding inverses.

pub mod error;
pub mod geometry;
pub mod job;
pub mod macro_fractal;
pub mod micro;
pub mod multifunc;
pub mod presets;
pub mod project;
pub mod raster;
pub mod reference;
pub mod verify;

pub use error::{Error, ErrorCategory, Result};
