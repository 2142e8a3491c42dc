//! Numerical laboratory for translating solitons of 1-homogeneous curvature flows.

pub mod curvature;
pub mod diagnostics;
pub mod error;
pub mod exact;
pub mod flow;
pub mod geometry;
pub mod io;
pub mod profile;

pub use error::{Error, Result};
