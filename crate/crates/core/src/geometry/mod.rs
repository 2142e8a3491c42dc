//! Discretized graphical hypersurfaces and their extrinsic geometry.

mod field;
mod gamma_field;
mod grid;
mod operators;
mod shape;
pub mod stencil;

pub use field::GridField;
pub use gamma_field::{gamma_field, GammaField, GammaPoint};
pub use grid::{AnalyticGraph, BoundaryPolicy, GraphPatch, Grid, MIN_POINTS_PER_AXIS};
pub use operators::{directional_height_gradient, gamma_laplacian, surface_hessian};
pub use shape::{
    exact_shape_field, principal_curvatures, shape_field, ShapeField, ShapePoint, SHAPE_MARGIN,
};
