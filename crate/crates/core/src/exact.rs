//! Closed-form graphs: Grim Reaper cylinders, planes and quadrics.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::geometry::{AnalyticGraph, GraphPatch, Grid, ShapePoint};

/// Fraction of the slab width kept clear of each wall, where u → ∞.
pub const SLAB_MARGIN_FRACTION: f64 = 0.05;

/// Grim Reaper cylinder over the slab 0 < x₁ < ω, tilted along x_n:
///
/// u(x) = −(ω/π)² ln sin(πx₁/ω) + a·x_n + h₀,  a = √((ω/π)² − 1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrimSpec {
    omega: f64,
    n: usize,
    height_offset: f64,
}

impl GrimSpec {
    pub fn new(omega: f64, n: usize) -> Result<Self> {
        Self::with_offset(omega, n, 0.0)
    }

    pub fn with_offset(omega: f64, n: usize, height_offset: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidConfig("dimension n must be at least 1".into()));
        }
        if !omega.is_finite() || omega < PI * (1.0 - 1e-8) {
            return Err(Error::InvalidConfig(format!("slab width must be at least π, got {omega}")));
        }
        // a tilted curve is not a graph over a line: with one coordinate the
        // tilt axis coincides with the profile axis
        if n == 1 && (omega - PI).abs() > 1e-8 * PI {
            return Err(Error::InvalidConfig(format!(
                "in dimension 1 the slab width must be π, got {omega}"
            )));
        }
        if !height_offset.is_finite() {
            return Err(Error::InvalidConfig("height offset must be finite".into()));
        }
        // a width just below π is a rounded π; keeping it would break (ω/π)² = 1 + a²
        let omega = omega.max(PI);
        Ok(Self {
            omega,
            n,
            height_offset,
        })
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn height_offset(&self) -> f64 {
        self.height_offset
    }

    /// ω/π.
    pub fn width_ratio(&self) -> f64 {
        self.omega / PI
    }

    /// a = √((ω/π)² − 1), zero in dimension 1.
    pub fn tilt(&self) -> f64 {
        if self.n == 1 {
            return 0.0;
        }
        (self.width_ratio().powi(2) - 1.0).max(0.0).sqrt()
    }

    fn phase(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.n {
            return Err(Error::Domain(format!(
                "point has {} coordinates, expected {}",
                x.len(),
                self.n
            )));
        }
        if !(x[0] > 0.0 && x[0] < self.omega) {
            return Err(Error::Domain(format!(
                "x₁ = {} lies outside the slab (0, {})",
                x[0], self.omega
            )));
        }
        Ok(x[0] / self.width_ratio())
    }

    /// Largest x₁-interval kept by [`grim_patch`].
    pub fn admissible_range(&self) -> (f64, f64) {
        (
            SLAB_MARGIN_FRACTION * self.omega,
            (1.0 - SLAB_MARGIN_FRACTION) * self.omega,
        )
    }

    /// Uniform grid of spacing `h`: x₁ from the lower end of the admissible range
    /// with as many nodes as fit inside it, every other axis over `cylinder_points`
    /// nodes starting at 0.
    pub fn grid(&self, h: f64, cylinder_points: usize) -> Result<Grid> {
        if !(h.is_finite() && h > 0.0) {
            return Err(Error::InvalidConfig(format!("grid spacing must be positive, got {h}")));
        }
        let (lo, hi) = self.admissible_range();
        let mut lower = vec![0.0; self.n];
        let mut points = vec![cylinder_points.max(1); self.n];
        lower[0] = lo;
        // the epsilon keeps an exact fit from losing its last node to rounding
        points[0] = ((hi - lo) / h * (1.0 + 1e-12)).floor() as usize + 1;
        Grid::with_spacing(&lower, &vec![h; self.n], &points)
    }
}

impl AnalyticGraph for GrimSpec {
    fn n(&self) -> usize {
        self.n
    }

    fn height(&self, x: &[f64]) -> Result<f64> {
        grim_height(self, x)
    }

    fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        let s = self.phase(x)?;
        let b = self.width_ratio();
        let mut g = vec![0.0; self.n];
        g[0] = -b * s.cos() / s.sin();
        if self.n > 1 {
            g[self.n - 1] = self.tilt();
        }
        Ok(g)
    }

    fn hessian(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        let s = self.phase(x)?;
        let mut h = DMatrix::zeros(self.n, self.n);
        h[(0, 0)] = 1.0 / s.sin().powi(2);
        Ok(h)
    }
}

pub fn grim_height(spec: &GrimSpec, x: &[f64]) -> Result<f64> {
    let s = spec.phase(x)?;
    let tilt = if spec.n > 1 { spec.tilt() * x[spec.n - 1] } else { 0.0 };
    Ok(-spec.width_ratio().powi(2) * s.sin().ln() + tilt + spec.height_offset)
}

/// The single nonzero principal curvature (π/ω)·sin(πx₁/ω).
pub fn grim_curvature(spec: &GrimSpec, x: &[f64]) -> Result<f64> {
    let s = spec.phase(x)?;
    Ok(s.sin() / spec.width_ratio())
}

/// Shape data from the analytic derivatives.
pub fn grim_shape(spec: &GrimSpec, x: &[f64]) -> Result<ShapePoint> {
    ShapePoint::from_derivatives(&spec.gradient(x)?, &spec.hessian(x)?)
}

/// Samples the Grim Reaper on `grid` with an `Exact` boundary policy.
///
/// The grid must stay [`SLAB_MARGIN_FRACTION`]·ω away from both walls.
pub fn grim_patch(spec: &GrimSpec, grid: Grid) -> Result<GraphPatch> {
    if grid.n() != spec.n {
        return Err(Error::InvalidConfig(format!(
            "grid dimension {} does not match Grim Reaper dimension {}",
            grid.n(),
            spec.n
        )));
    }
    let (lo, hi) = spec.admissible_range();
    let slack = 1e-12 * spec.omega;
    let (x_lo, x_hi) = (grid.lower()[0], grid.upper()[0]);
    if x_lo < lo - slack || x_hi > hi + slack {
        return Err(Error::Domain(format!(
            "x₁ range [{x_lo}, {x_hi}] leaves the admissible slab [{lo}, {hi}]"
        )));
    }
    GraphPatch::from_analytic(grid, Arc::new(*spec))
}

/// u(x) = ½ xᵀMx + ⟨b, x⟩ + c.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticGraph {
    hessian: DMatrix<f64>,
    slope: Vec<f64>,
    offset: f64,
}

impl QuadraticGraph {
    pub fn new(hessian: DMatrix<f64>, slope: Vec<f64>, offset: f64) -> Result<Self> {
        let n = slope.len();
        if hessian.shape() != (n, n) || n == 0 {
            return Err(Error::InvalidConfig("quadratic graph has inconsistent dimensions".into()));
        }
        let hessian = (&hessian + hessian.transpose()) * 0.5;
        Ok(Self {
            hessian,
            slope,
            offset,
        })
    }

    /// u ≡ c.
    pub fn plane(n: usize, offset: f64) -> Result<Self> {
        Self::new(DMatrix::zeros(n, n), vec![0.0; n], offset)
    }

    /// u = |x|²/2.
    pub fn paraboloid(n: usize) -> Result<Self> {
        Self::new(DMatrix::identity(n, n), vec![0.0; n], 0.0)
    }

    /// u = (x₁² − x₂²)/2.
    pub fn saddle() -> Result<Self> {
        Self::new(DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]), vec![0.0; 2], 0.0)
    }
}

impl AnalyticGraph for QuadraticGraph {
    fn n(&self) -> usize {
        self.slope.len()
    }

    fn height(&self, x: &[f64]) -> Result<f64> {
        self.check(x)?;
        let v = nalgebra::DVector::from_column_slice(x);
        Ok(0.5 * v.dot(&(&self.hessian * &v))
            + self.slope.iter().zip(x).map(|(b, x)| b * x).sum::<f64>()
            + self.offset)
    }

    fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check(x)?;
        let v = nalgebra::DVector::from_column_slice(x);
        let g = &self.hessian * v;
        Ok(g.iter().zip(&self.slope).map(|(a, b)| a + b).collect())
    }

    fn hessian(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        self.check(x)?;
        Ok(self.hessian.clone())
    }
}

impl QuadraticGraph {
    fn check(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.slope.len() {
            return Err(Error::Domain(format!(
                "point has {} coordinates, expected {}",
                x.len(),
                self.slope.len()
            )));
        }
        Ok(())
    }
}

/// The horizontal plane u ≡ `height` on `grid`, with an `Exact` policy.
pub fn flat_patch(grid: Grid, height: f64) -> Result<GraphPatch> {
    let plane = QuadraticGraph::plane(grid.n(), height)?;
    GraphPatch::from_analytic(grid, Arc::new(plane))
}
