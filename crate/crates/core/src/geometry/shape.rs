use nalgebra::{Cholesky, DMatrix, SymmetricEigen};

use super::field::GridField;
use super::grid::{BoundaryPolicy, Grid, GraphPatch};
use super::stencil;
use crate::curvature::{EigenvalueVector, SpectralPoint};
use crate::error::{Error, Result};

/// Nodes closer than this to the grid edge carry no shape data.
pub const SHAPE_MARGIN: usize = 2;

/// Extrinsic geometry of a graph at one point, with upward normal ν = (−Du, 1)/W.
#[derive(Debug, Clone, PartialEq)]
pub struct ShapePoint {
    du: Vec<f64>,
    d2u: DMatrix<f64>,
    w: f64,
    normal: Vec<f64>,
    metric: DMatrix<f64>,
    metric_inv: DMatrix<f64>,
    second_form: DMatrix<f64>,
    shape_operator: DMatrix<f64>,
    lambda: EigenvalueVector,
    /// Columns are g-orthonormal coordinate eigenvectors of the shape operator.
    coordinate_frame: DMatrix<f64>,
    principal_frame: Vec<Vec<f64>>,
}

impl ShapePoint {
    /// Builds all quantities from Du and D²u.
    ///
    /// g = I + Du Duᵀ, A = D²u / W. With g = LLᵀ the principal curvatures are
    /// the eigenvalues of the symmetric matrix L⁻¹AL⁻ᵀ = QΛQᵀ, and the
    /// coordinate eigenvectors are the columns of L⁻ᵀQ.
    pub fn from_derivatives(du: &[f64], d2u: &DMatrix<f64>) -> Result<Self> {
        let n = du.len();
        if d2u.shape() != (n, n) {
            return Err(Error::Domain("Hessian shape does not match the gradient".into()));
        }
        if du.iter().chain(d2u.iter()).any(|v| !v.is_finite()) {
            return Err(Error::Domain("non-finite height derivatives".into()));
        }
        let p = nalgebra::DVector::from_column_slice(du);
        let w2 = 1.0 + p.norm_squared();
        let w = w2.sqrt();
        let metric = DMatrix::identity(n, n) + &p * p.transpose();
        // Sherman–Morrison
        let metric_inv = DMatrix::identity(n, n) - &p * p.transpose() / w2;
        let d2u = (d2u + d2u.transpose()) * 0.5;
        let second_form = &d2u / w;
        let shape_operator = &metric_inv * &second_form;

        let chol = Cholesky::new(metric.clone())
            .ok_or_else(|| Error::Domain("metric is not positive definite".into()))?;
        let l_inv = chol
            .l()
            .try_inverse()
            .ok_or_else(|| Error::Domain("metric factor is singular".into()))?;
        let s = &l_inv * &second_form * l_inv.transpose();
        let spectral = SpectralPoint::from_matrix((&s + s.transpose()) * 0.5)?;
        let coordinate_frame = l_inv.transpose() * spectral.eigenframe();

        let mut normal: Vec<f64> = du.iter().map(|d| -d / w).collect();
        normal.push(1.0 / w);
        let principal_frame = (0..n)
            .map(|a| {
                let mut tau = vec![0.0; n + 1];
                for i in 0..n {
                    let c = coordinate_frame[(i, a)];
                    tau[i] += c;
                    tau[n] += c * du[i];
                }
                tau
            })
            .collect();

        Ok(Self {
            du: du.to_vec(),
            d2u,
            w,
            normal,
            metric,
            metric_inv,
            second_form,
            shape_operator,
            lambda: spectral.eigenvalues().clone(),
            coordinate_frame,
            principal_frame,
        })
    }

    pub fn n(&self) -> usize {
        self.du.len()
    }

    pub fn du(&self) -> &[f64] {
        &self.du
    }

    pub fn d2u(&self) -> &DMatrix<f64> {
        &self.d2u
    }

    /// W = √(1 + |Du|²).
    pub fn w(&self) -> f64 {
        self.w
    }

    /// ν as an (n+1)-vector.
    pub fn normal(&self) -> &[f64] {
        &self.normal
    }

    pub fn metric(&self) -> &DMatrix<f64> {
        &self.metric
    }

    pub fn metric_inv(&self) -> &DMatrix<f64> {
        &self.metric_inv
    }

    pub fn second_form(&self) -> &DMatrix<f64> {
        &self.second_form
    }

    pub fn shape_operator(&self) -> &DMatrix<f64> {
        &self.shape_operator
    }

    /// Principal curvatures, ascending.
    pub fn lambda(&self) -> &EigenvalueVector {
        &self.lambda
    }

    pub fn coordinate_frame(&self) -> &DMatrix<f64> {
        &self.coordinate_frame
    }

    /// Unit tangent (n+1)-vectors τ_a matching `lambda()`.
    pub fn principal_frame(&self) -> &[Vec<f64>] {
        &self.principal_frame
    }

    pub fn mean_curvature(&self) -> f64 {
        self.lambda.mean_curvature()
    }

    /// |A|² = Σ λ_a².
    pub fn norm_a2(&self) -> f64 {
        self.lambda.norm_squared()
    }

    /// ⟨ν, e_{n+1}⟩ = 1/W.
    pub fn height_angle(&self) -> f64 {
        1.0 / self.w
    }

    /// ⟨ν, e_i⟩ for a horizontal axis i.
    pub fn angle(&self, i: usize) -> f64 {
        self.normal[i]
    }

    /// Γᵏᵢⱼ = u_ij u_k / W².
    pub fn christoffel(&self, k: usize, i: usize, j: usize) -> f64 {
        self.d2u[(i, j)] * self.du[k] / (self.w * self.w)
    }

    /// Diagonal of a coordinate bilinear form in the principal frame: B(τ_a, τ_a).
    pub fn frame_diagonal(&self, form: &DMatrix<f64>) -> Vec<f64> {
        let v = &self.coordinate_frame;
        (0..self.n())
            .map(|a| {
                let col = v.column(a);
                (col.transpose() * form * col)[(0, 0)]
            })
            .collect()
    }

    /// A bilinear form expressed in the principal frame: B(τ_a, τ_b).
    pub fn in_frame(&self, form: &DMatrix<f64>) -> DMatrix<f64> {
        let v = &self.coordinate_frame;
        v.transpose() * form * v
    }
}

/// Principal curvatures only, ascending; the cheap kernel used by time stepping.
pub fn principal_curvatures(du: &[f64], d2u: &DMatrix<f64>) -> Vec<f64> {
    let n = du.len();
    let w2 = 1.0 + du.iter().map(|d| d * d).sum::<f64>();
    let w = w2.sqrt();
    if n == 1 {
        return vec![d2u[(0, 0)] / (w2 * w)];
    }
    let p = nalgebra::DVector::from_column_slice(du);
    let metric = DMatrix::identity(n, n) + &p * p.transpose();
    let l_inv = Cholesky::new(metric)
        .expect("I + ppᵀ is positive definite")
        .l()
        .try_inverse()
        .expect("Cholesky factor is invertible");
    let s = &l_inv * (d2u / w) * l_inv.transpose();
    let mut values: Vec<f64> = SymmetricEigen::new((&s + s.transpose()) * 0.5)
        .eigenvalues
        .iter()
        .copied()
        .collect();
    values.sort_by(f64::total_cmp);
    values
}

/// Per-node shape data on the interior shrunk by [`SHAPE_MARGIN`] cells.
#[derive(Debug, Clone, PartialEq)]
pub struct ShapeField {
    points: GridField<ShapePoint>,
}

impl ShapeField {
    pub fn from_points(points: GridField<ShapePoint>) -> Self {
        Self { points }
    }

    pub fn grid(&self) -> &Grid {
        self.points.grid()
    }

    pub fn get(&self, flat: usize) -> Option<&ShapePoint> {
        self.points.get(flat)
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, &ShapePoint)> + '_ {
        self.points.iter()
    }

    pub fn points(&self) -> &GridField<ShapePoint> {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.defined_count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn scalar(&self, f: impl Fn(&ShapePoint) -> f64) -> GridField<f64> {
        self.points.map(f)
    }
}

/// Shape field from second-order central differences of the heights.
///
/// Finite differences are used under every boundary policy; see
/// [`exact_shape_field`] for analytic reference values.
pub fn shape_field(patch: &GraphPatch) -> Result<ShapeField> {
    let grid = patch.grid();
    let get = stencil::dense(patch.u());
    let mut points = GridField::empty(grid.clone());
    for flat in grid.interior(SHAPE_MARGIN) {
        let du = stencil::gradient(grid, &get, flat).expect("interior node");
        let d2u = stencil::hessian(grid, &get, flat).expect("interior node");
        let point = ShapePoint::from_derivatives(&du, &d2u)
            .map_err(|e| Error::at(grid.multi_index(flat), e))?;
        points.set(flat, point);
    }
    Ok(ShapeField { points })
}

/// Shape field from the analytic derivatives of an `Exact` patch, on the same nodes.
pub fn exact_shape_field(patch: &GraphPatch) -> Result<ShapeField> {
    let BoundaryPolicy::Exact(source) = patch.boundary() else {
        return Err(Error::InvalidConfig(
            "analytic shape data requires an Exact boundary policy".into(),
        ));
    };
    let grid = patch.grid();
    let mut points = GridField::empty(grid.clone());
    for flat in grid.interior(SHAPE_MARGIN) {
        let x = grid.coordinate(flat);
        let point = source
            .gradient(&x)
            .and_then(|du| ShapePoint::from_derivatives(&du, &source.hessian(&x)?))
            .map_err(|e| Error::at(grid.multi_index(flat), e))?;
        points.set(flat, point);
    }
    Ok(ShapeField { points })
}
