use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Every axis needs room for the widest central stencil.
pub const MIN_POINTS_PER_AXIS: usize = 5;

/// A uniform tensor grid on an axis-aligned box, stored in row-major order
/// (the last axis varies fastest).
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    lower: Vec<f64>,
    spacing: Vec<f64>,
    points: Vec<usize>,
    strides: Vec<usize>,
}

impl Grid {
    /// Grid with `points[i]` nodes spanning `[lower[i], upper[i]]` inclusive.
    pub fn new(lower: &[f64], upper: &[f64], points: &[usize]) -> Result<Self> {
        if lower.len() != upper.len() || lower.len() != points.len() {
            return Err(Error::InvalidConfig(
                "grid bounds and point counts have different lengths".into(),
            ));
        }
        Self::check_points(points)?;
        let spacing: Vec<f64> = (0..lower.len())
            .map(|i| (upper[i] - lower[i]) / (points[i] - 1) as f64)
            .collect();
        Self::with_spacing(lower, &spacing, points)
    }

    /// Grid with spacing `h` on every axis, starting at `lower` and covering
    /// `upper` up to rounding of the point count.
    pub fn uniform(lower: &[f64], upper: &[f64], h: f64) -> Result<Self> {
        if !(h.is_finite() && h > 0.0) {
            return Err(Error::InvalidConfig(format!("grid spacing must be positive, got {h}")));
        }
        if lower.len() != upper.len() {
            return Err(Error::InvalidConfig("grid bounds have different lengths".into()));
        }
        let points: Vec<usize> = lower
            .iter()
            .zip(upper)
            .map(|(lo, hi)| ((hi - lo) / h).round().max(0.0) as usize + 1)
            .collect();
        Self::with_spacing(lower, &vec![h; lower.len()], &points)
    }

    pub fn with_spacing(lower: &[f64], spacing: &[f64], points: &[usize]) -> Result<Self> {
        if lower.is_empty() {
            return Err(Error::InvalidConfig("grid dimension must be at least 1".into()));
        }
        if lower.len() != spacing.len() || lower.len() != points.len() {
            return Err(Error::InvalidConfig(
                "grid origin, spacing and point counts have different lengths".into(),
            ));
        }
        Self::check_points(points)?;
        if let Some(h) = spacing.iter().find(|h| !(h.is_finite() && **h > 0.0)) {
            return Err(Error::InvalidConfig(format!("grid spacing must be positive, got {h}")));
        }
        if lower.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidConfig("grid origin must be finite".into()));
        }
        let n = points.len();
        let mut strides = vec![1; n];
        for axis in (0..n.saturating_sub(1)).rev() {
            strides[axis] = strides[axis + 1] * points[axis + 1];
        }
        Ok(Self {
            lower: lower.to_vec(),
            spacing: spacing.to_vec(),
            points: points.to_vec(),
            strides,
        })
    }

    fn check_points(points: &[usize]) -> Result<()> {
        if let Some((axis, &p)) = points
            .iter()
            .enumerate()
            .find(|(_, &p)| p < MIN_POINTS_PER_AXIS)
        {
            return Err(Error::DegenerateGrid {
                axis,
                points: p,
                required: MIN_POINTS_PER_AXIS,
            });
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.points.len()
    }

    pub fn len(&self) -> usize {
        self.points.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn points(&self) -> &[usize] {
        &self.points
    }

    pub fn spacing(&self) -> &[f64] {
        &self.spacing
    }

    pub fn min_spacing(&self) -> f64 {
        self.spacing.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_spacing(&self) -> f64 {
        self.spacing.iter().copied().fold(0.0, f64::max)
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> Vec<f64> {
        (0..self.n())
            .map(|i| self.lower[i] + (self.points[i] - 1) as f64 * self.spacing[i])
            .collect()
    }

    pub fn stride(&self, axis: usize) -> usize {
        self.strides[axis]
    }

    pub fn multi_index(&self, flat: usize) -> Vec<usize> {
        self.strides
            .iter()
            .zip(&self.points)
            .map(|(s, p)| (flat / s) % p)
            .collect()
    }

    pub fn flat_index(&self, index: &[usize]) -> usize {
        index.iter().zip(&self.strides).map(|(i, s)| i * s).sum()
    }

    /// Index of node `index[axis]` along a single axis.
    pub fn axis_index(&self, flat: usize, axis: usize) -> usize {
        (flat / self.strides[axis]) % self.points[axis]
    }

    pub fn coordinate(&self, flat: usize) -> Vec<f64> {
        (0..self.n())
            .map(|axis| self.lower[axis] + self.axis_index(flat, axis) as f64 * self.spacing[axis])
            .collect()
    }

    /// The node `k` steps along `axis` from `flat`, if it exists.
    pub fn offset(&self, flat: usize, axis: usize, k: isize) -> Option<usize> {
        let i = self.axis_index(flat, axis) as isize + k;
        if i < 0 || i >= self.points[axis] as isize {
            return None;
        }
        Some((flat as isize + k * self.strides[axis] as isize) as usize)
    }

    /// At least `margin` nodes from the boundary along every axis.
    pub fn is_interior(&self, flat: usize, margin: usize) -> bool {
        (0..self.n()).all(|axis| {
            let i = self.axis_index(flat, axis);
            i >= margin && i + margin < self.points[axis]
        })
    }

    /// Flat indices of the nodes at least `margin` cells inside.
    pub fn interior(&self, margin: usize) -> Vec<usize> {
        (0..self.len()).filter(|&f| self.is_interior(f, margin)).collect()
    }

    /// The same grid with its origin moved by `shift`.
    pub fn translated(&self, shift: &[f64]) -> Self {
        let mut out = self.clone();
        for (lo, s) in out.lower.iter_mut().zip(shift) {
            *lo += s;
        }
        out
    }
}

/// A graph with closed-form derivatives, used as ground truth and for pinned boundaries.
pub trait AnalyticGraph: fmt::Debug + Send + Sync {
    fn n(&self) -> usize;
    fn height(&self, x: &[f64]) -> Result<f64>;
    fn gradient(&self, x: &[f64]) -> Result<Vec<f64>>;
    fn hessian(&self, x: &[f64]) -> Result<DMatrix<f64>>;
}

/// How boundary values are obtained where stencils or time steps cannot reach.
#[derive(Debug, Clone)]
pub enum BoundaryPolicy {
    /// An analytic graph supplies boundary data and reference derivatives.
    Exact(Arc<dyn AnalyticGraph>),
    /// Boundary values are whatever the grid holds.
    Clamped,
}

/// Heights u sampled on a grid: a discretized graphical hypersurface.
#[derive(Debug, Clone)]
pub struct GraphPatch {
    grid: Grid,
    u: Vec<f64>,
    boundary: BoundaryPolicy,
}

impl GraphPatch {
    pub fn from_values(grid: Grid, u: Vec<f64>, boundary: BoundaryPolicy) -> Result<Self> {
        if u.len() != grid.len() {
            return Err(Error::InvalidConfig(format!(
                "{} height values for a grid of {} nodes",
                u.len(),
                grid.len()
            )));
        }
        if let BoundaryPolicy::Exact(source) = &boundary {
            if source.n() != grid.n() {
                return Err(Error::InvalidConfig(format!(
                    "analytic source has dimension {}, grid has {}",
                    source.n(),
                    grid.n()
                )));
            }
        }
        Ok(Self { grid, u, boundary })
    }

    /// Samples `f` at every node; boundary policy `Clamped`.
    pub fn from_fn(grid: Grid, f: impl Fn(&[f64]) -> f64) -> Self {
        let u = (0..grid.len()).map(|i| f(&grid.coordinate(i))).collect();
        Self {
            grid,
            u,
            boundary: BoundaryPolicy::Clamped,
        }
    }

    /// Samples an analytic graph at every node; boundary policy `Exact`.
    pub fn from_analytic(grid: Grid, source: Arc<dyn AnalyticGraph>) -> Result<Self> {
        let u = (0..grid.len())
            .map(|i| source.height(&grid.coordinate(i)))
            .collect::<Result<Vec<_>>>()?;
        Self::from_values(grid, u, BoundaryPolicy::Exact(source))
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn n(&self) -> usize {
        self.grid.n()
    }

    pub fn u(&self) -> &[f64] {
        &self.u
    }

    pub fn boundary(&self) -> &BoundaryPolicy {
        &self.boundary
    }

    pub fn source(&self) -> Option<&Arc<dyn AnalyticGraph>> {
        match &self.boundary {
            BoundaryPolicy::Exact(s) => Some(s),
            BoundaryPolicy::Clamped => None,
        }
    }

    /// Same grid and policy, new heights.
    pub fn with_values(&self, u: Vec<f64>) -> Result<Self> {
        Self::from_values(self.grid.clone(), u, self.boundary.clone())
    }

    pub fn into_values(self) -> Vec<f64> {
        self.u
    }

    /// u + c.
    pub fn lifted(&self, c: f64) -> Self {
        Self {
            grid: self.grid.clone(),
            u: self.u.iter().map(|v| v + c).collect(),
            boundary: self.boundary.clone(),
        }
    }

    /// The same heights over a rigidly shifted domain. The analytic source no
    /// longer matches, so the policy becomes `Clamped`.
    pub fn translated(&self, shift: &[f64]) -> Self {
        Self {
            grid: self.grid.translated(shift),
            u: self.u.clone(),
            boundary: BoundaryPolicy::Clamped,
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.u.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}
