use nalgebra::{DMatrix, DVector, SymmetricEigen};

use super::gamma::gradient;
use super::{grad_gamma, hess_gamma, CurvatureSpec, EigenvalueVector};
use crate::error::{Error, Result};

/// Relative eigenvalue gap below which the divided difference
/// (∂_bγ − ∂_aγ)/(λ_b − λ_a) is replaced by its coincidence limit.
pub const DEGENERATE_GAP: f64 = 1e-7;

/// A symmetric matrix with its spectral decomposition A = Q·diag(λ)·Qᵀ.
///
/// Eigenvalues are stored in ascending order; the columns of the eigenframe
/// are the matching eigenvectors.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralPoint {
    matrix: DMatrix<f64>,
    eigenvalues: EigenvalueVector,
    eigenframe: DMatrix<f64>,
}

impl SpectralPoint {
    pub fn from_matrix(matrix: DMatrix<f64>) -> Result<Self> {
        if !matrix.is_square() || matrix.nrows() == 0 {
            return Err(Error::Domain("expected a non-empty square matrix".into()));
        }
        let scale = matrix.amax().max(f64::MIN_POSITIVE);
        if (&matrix - matrix.transpose()).amax() > 1e-12 * scale {
            return Err(Error::Domain("matrix is not symmetric".into()));
        }
        let sym = (&matrix + matrix.transpose()) * 0.5;
        let eig = SymmetricEigen::new(sym);
        let n = matrix.nrows();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let eigenvalues = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let eigenframe = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
        Ok(Self {
            matrix,
            eigenvalues: EigenvalueVector::new(eigenvalues),
            eigenframe,
        })
    }

    pub fn from_diagonal(values: &[f64]) -> Result<Self> {
        Self::from_matrix(DMatrix::from_diagonal(&DVector::from_column_slice(values)))
    }

    /// Builds Q·diag(λ)·Qᵀ for an orthogonal Q; the decomposition is taken as given.
    pub fn from_parts(eigenframe: DMatrix<f64>, eigenvalues: &[f64]) -> Result<Self> {
        let n = eigenvalues.len();
        if eigenframe.shape() != (n, n) {
            return Err(Error::Domain("eigenframe shape does not match eigenvalues".into()));
        }
        let orth_err = (eigenframe.transpose() * &eigenframe - DMatrix::identity(n, n)).amax();
        if orth_err > 1e-10 {
            return Err(Error::Domain(format!(
                "eigenframe is not orthogonal (error {orth_err:.3e})"
            )));
        }
        let d = DMatrix::from_diagonal(&DVector::from_column_slice(eigenvalues));
        let matrix = &eigenframe * d * eigenframe.transpose();
        Ok(Self {
            matrix,
            eigenvalues: EigenvalueVector::new(eigenvalues.to_vec()),
            eigenframe,
        })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn eigenvalues(&self) -> &EigenvalueVector {
        &self.eigenvalues
    }

    pub fn eigenframe(&self) -> &DMatrix<f64> {
        &self.eigenframe
    }

    pub fn n(&self) -> usize {
        self.eigenvalues.n()
    }

    /// Max-norm of A − Q·diag(λ)·Qᵀ relative to max|A|.
    pub fn reconstruction_error(&self) -> f64 {
        let d = DMatrix::from_diagonal(&DVector::from_column_slice(self.eigenvalues.values()));
        let rebuilt = &self.eigenframe * d * self.eigenframe.transpose();
        (&self.matrix - rebuilt).amax() / self.matrix.amax().max(f64::MIN_POSITIVE)
    }
}

fn check_dimension(spec: &CurvatureSpec, n: usize) -> Result<()> {
    if spec.n() != n {
        return Err(Error::Domain(format!(
            "matrix has size {n}, curvature function expects {}",
            spec.n()
        )));
    }
    Ok(())
}

/// ∂γ/∂A = Q·diag(∂γ/∂λ)·Qᵀ.
pub fn matrix_grad(spec: &CurvatureSpec, a: &SpectralPoint) -> Result<DMatrix<f64>> {
    check_dimension(spec, a.n())?;
    let g = grad_gamma(spec, a.eigenvalues.values())?;
    let q = &a.eigenframe;
    let d = DMatrix::from_diagonal(&DVector::from_vec(g));
    Ok(q * d * q.transpose())
}

/// Second derivative of γ(A) in the direction of the symmetric matrix T:
///
/// Σ ∂²γ/∂λ_a∂λ_b T̃_aa T̃_bb + 2 Σ_{a<b} (∂_bγ − ∂_aγ)/(λ_b − λ_a) |T̃_ab|²
///
/// with T̃ = Qᵀ T Q. Near-coincident pairs use the limit
/// ½(∂_aaγ + ∂_bbγ) − ∂_abγ, the second derivative along e_a − e_b.
pub fn matrix_hess_quadform(
    spec: &CurvatureSpec,
    a: &SpectralPoint,
    t: &DMatrix<f64>,
) -> Result<f64> {
    let n = a.n();
    check_dimension(spec, n)?;
    if t.shape() != (n, n) {
        return Err(Error::Domain("direction matrix has the wrong shape".into()));
    }
    let lambda = a.eigenvalues.values();
    let hess = hess_gamma(spec, lambda)?;
    let grad = gradient(spec.kind(), lambda);
    let q = &a.eigenframe;
    let t_frame = q.transpose() * ((t + t.transpose()) * 0.5) * q;

    let mut total = 0.0;
    for i in 0..n {
        for j in 0..n {
            total += hess[(i, j)] * t_frame[(i, i)] * t_frame[(j, j)];
        }
    }
    let scale = a.eigenvalues.norm().max(1.0);
    for i in 0..n {
        for j in (i + 1)..n {
            let gap = lambda[j] - lambda[i];
            let divided = if gap.abs() < DEGENERATE_GAP * scale {
                0.5 * (hess[(i, i)] + hess[(j, j)]) - hess[(i, j)]
            } else {
                (grad[j] - grad[i]) / gap
            };
            total += 2.0 * divided * t_frame[(i, j)] * t_frame[(i, j)];
        }
    }
    Ok(total)
}

/// γ evaluated on the spectrum of a symmetric matrix (closure allowed).
pub fn gamma_of_matrix(spec: &CurvatureSpec, matrix: DMatrix<f64>) -> Result<f64> {
    let point = SpectralPoint::from_matrix(matrix)?;
    super::eval_gamma(spec, point.eigenvalues.values())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mean_gradient_is_identity() {
        let spec = CurvatureSpec::mean(3).unwrap();
        let a = SpectralPoint::from_matrix(DMatrix::from_row_slice(
            3,
            3,
            &[1.0, 0.2, 0.0, 0.2, 2.0, 0.1, 0.0, 0.1, 0.5],
        ))
        .unwrap();
        let g = matrix_grad(&spec, &a).unwrap();
        assert!((g - DMatrix::identity(3, 3)).amax() < 1e-14);
        let t = DMatrix::from_row_slice(3, 3, &[1.0, 2.0, 3.0, 2.0, 0.0, 1.0, 3.0, 1.0, -1.0]);
        assert!(matrix_hess_quadform(&spec, &a, &t).unwrap().abs() < 1e-14);
    }

    #[test]
    fn gauss_root_diagonal_gradient() {
        let spec = CurvatureSpec::gauss_root(2).unwrap();
        let a = SpectralPoint::from_diagonal(&[4.0, 1.0]).unwrap();
        let g = matrix_grad(&spec, &a).unwrap();
        let expected = DMatrix::from_diagonal(&DVector::from_vec(vec![0.25, 1.0]));
        assert!((g - expected).amax() < 1e-14);
    }

    #[test]
    fn sigma2_off_diagonal_direction() {
        // 2·(∂₂γ − ∂₁γ)/(λ₂ − λ₁) with ∂γ(1,2) = (1/√2, 1/(2√2))
        let spec = CurvatureSpec::sigma_k_root(2, 2).unwrap();
        let a = SpectralPoint::from_diagonal(&[1.0, 2.0]).unwrap();
        let t = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        let q = matrix_hess_quadform(&spec, &a, &t).unwrap();
        let expected = 2.0 * (1.0 / (2.0 * 2f64.sqrt()) - 1.0 / 2f64.sqrt());
        assert!((q - expected).abs() < 1e-14, "{q} vs {expected}");
        assert!((q + std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-6);
    }

    #[test]
    fn rejects_non_symmetric_input() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 0.0, 1.0]);
        assert!(SpectralPoint::from_matrix(m).is_err());
    }

    #[test]
    fn reconstruction_is_tight() {
        let m = DMatrix::from_row_slice(3, 3, &[2.0, -1.0, 0.5, -1.0, 3.0, 0.25, 0.5, 0.25, 1.0]);
        let p = SpectralPoint::from_matrix(m).unwrap();
        assert!(p.reconstruction_error() < 1e-12);
        let v = p.eigenvalues().values();
        assert!(v.windows(2).all(|w| w[0] <= w[1]));
    }
}
