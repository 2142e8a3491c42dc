use nalgebra::DMatrix;

use super::cone::cone_contains;
use super::symmetric::{elementary_symmetric, elementary_symmetric_without};
use super::{CurvatureKind, CurvatureSpec};
use crate::error::{Error, Result};

/// γ(λ) together with whether λ sits on the cone boundary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaValue {
    pub value: f64,
    pub on_boundary: bool,
}

fn check_dimension(spec: &CurvatureSpec, lambda: &[f64]) -> Result<()> {
    if lambda.len() != spec.n() {
        return Err(Error::Domain(format!(
            "expected {} principal curvatures, got {}",
            spec.n(),
            lambda.len()
        )));
    }
    Ok(())
}

/// Evaluates γ on the closure of its cone.
///
/// Boundary points are evaluated by the defining formula with the boundary
/// slack clamped to zero (S_k^{1/k} with S_k = 0 gives 0).
pub fn evaluate(spec: &CurvatureSpec, lambda: &[f64]) -> Result<GammaValue> {
    check_dimension(spec, lambda)?;
    let cone = spec.cone();
    let membership = cone_contains(&cone, lambda);
    if !membership.in_closure() {
        return Err(Error::OutsideCone {
            lambda: lambda.to_vec(),
            cone: cone.to_string(),
        });
    }
    Ok(GammaValue {
        value: value(spec.kind(), lambda),
        on_boundary: membership.on_boundary(),
    })
}

pub fn eval_gamma(spec: &CurvatureSpec, lambda: &[f64]) -> Result<f64> {
    evaluate(spec, lambda).map(|v| v.value)
}

fn require_interior(spec: &CurvatureSpec, lambda: &[f64]) -> Result<()> {
    check_dimension(spec, lambda)?;
    let cone = spec.cone();
    let membership = cone_contains(&cone, lambda);
    if !membership.in_closure() {
        Err(Error::OutsideCone {
            lambda: lambda.to_vec(),
            cone: cone.to_string(),
        })
    } else if !membership.interior() {
        Err(Error::OnBoundary {
            lambda: lambda.to_vec(),
            cone: cone.to_string(),
        })
    } else {
        Ok(())
    }
}

/// ∂γ/∂λᵢ at an interior point.
pub fn grad_gamma(spec: &CurvatureSpec, lambda: &[f64]) -> Result<Vec<f64>> {
    require_interior(spec, lambda)?;
    Ok(gradient(spec.kind(), lambda))
}

/// The gradient formula extended to the closure, where it stays finite.
///
/// Returns `Ok(None)` when the formula degenerates on the boundary (for
/// instance S_k^{1/k} with S_k = 0). Used by pointwise field computations on
/// cylinders, whose flat directions put λ on ∂Γ₊.
pub fn closure_gradient(spec: &CurvatureSpec, lambda: &[f64]) -> Result<Option<Vec<f64>>> {
    let v = evaluate(spec, lambda)?;
    if !v.on_boundary {
        return Ok(Some(gradient(spec.kind(), lambda)));
    }
    let clamped = clamp_to_closure(spec.kind(), lambda);
    let g = gradient(spec.kind(), &clamped);
    Ok(g.iter().all(|x| x.is_finite()).then_some(g))
}

/// Hessian of γ with respect to λ at an interior point.
pub fn hess_gamma(spec: &CurvatureSpec, lambda: &[f64]) -> Result<DMatrix<f64>> {
    require_interior(spec, lambda)?;
    Ok(hessian(spec.kind(), lambda))
}

/// ⟨Hess(γ)(λ)ξ, ξ⟩.
pub fn hess_quadform_eig(spec: &CurvatureSpec, lambda: &[f64], xi: &[f64]) -> Result<f64> {
    if xi.len() != lambda.len() {
        return Err(Error::Domain(format!(
            "direction has length {}, expected {}",
            xi.len(),
            lambda.len()
        )));
    }
    let hess = hess_gamma(spec, lambda)?;
    let n = lambda.len();
    let mut q = 0.0;
    for a in 0..n {
        for b in 0..n {
            q += hess[(a, b)] * xi[a] * xi[b];
        }
    }
    Ok(q)
}

/// |γ(λ) − ⟨∇γ(λ), λ⟩|, which vanishes for 1-homogeneous γ.
pub fn euler_residual(spec: &CurvatureSpec, lambda: &[f64]) -> Result<f64> {
    let g = grad_gamma(spec, lambda)?;
    let gamma = value(spec.kind(), lambda);
    let euler: f64 = g.iter().zip(lambda).map(|(d, l)| d * l).sum();
    Ok((gamma - euler).abs())
}

fn clamp_to_closure(kind: &CurvatureKind, lambda: &[f64]) -> Vec<f64> {
    match kind {
        CurvatureKind::GaussRoot | CurvatureKind::PowerMean { .. } => {
            lambda.iter().map(|l| l.max(0.0)).collect()
        }
        CurvatureKind::ConvexCombo { inner, .. } => clamp_to_closure(inner, lambda),
        _ => lambda.to_vec(),
    }
}

pub(crate) fn value(kind: &CurvatureKind, lambda: &[f64]) -> f64 {
    match kind {
        CurvatureKind::Mean => lambda.iter().sum(),
        CurvatureKind::SigmaKRoot { k } => {
            let s = elementary_symmetric(lambda)[*k].max(0.0);
            if *k == 1 {
                s
            } else {
                s.powf(1.0 / *k as f64)
            }
        }
        CurvatureKind::GaussRoot => {
            let n = lambda.len() as f64;
            if lambda.iter().any(|&l| l <= 0.0) {
                0.0
            } else {
                let product: f64 = lambda.iter().product();
                if product.is_normal() {
                    product.powf(1.0 / n)
                } else {
                    (lambda.iter().map(|l| l.ln()).sum::<f64>() / n).exp()
                }
            }
        }
        CurvatureKind::PowerMean { p } => {
            let scale = lambda.iter().fold(0.0f64, |m, &l| m.max(l));
            if scale <= 0.0 {
                return 0.0;
            }
            let sum: f64 = lambda.iter().map(|&l| (l.max(0.0) / scale).powf(*p)).sum();
            scale * sum.powf(1.0 / p)
        }
        CurvatureKind::ConvexCombo { t, inner } => {
            t * lambda.iter().sum::<f64>() + (1.0 - t) * value(inner, lambda)
        }
    }
}

pub(crate) fn gradient(kind: &CurvatureKind, lambda: &[f64]) -> Vec<f64> {
    let n = lambda.len();
    match kind {
        CurvatureKind::Mean => vec![1.0; n],
        CurvatureKind::SigmaKRoot { k } => {
            let k = *k;
            if k == 1 {
                return vec![1.0; n];
            }
            let s = elementary_symmetric(lambda)[k];
            let factor = s.powf(1.0 / k as f64 - 1.0) / k as f64;
            (0..n)
                .map(|i| factor * elementary_symmetric_without(lambda, &[i])[k - 1])
                .collect()
        }
        CurvatureKind::GaussRoot => {
            let gamma = value(kind, lambda);
            lambda.iter().map(|l| gamma / (n as f64 * l)).collect()
        }
        CurvatureKind::PowerMean { p } => {
            let gamma = value(kind, lambda);
            lambda.iter().map(|l| (l / gamma).powf(p - 1.0)).collect()
        }
        CurvatureKind::ConvexCombo { t, inner } => gradient(inner, lambda)
            .into_iter()
            .map(|g| t + (1.0 - t) * g)
            .collect(),
    }
}

pub(crate) fn hessian(kind: &CurvatureKind, lambda: &[f64]) -> DMatrix<f64> {
    let n = lambda.len();
    match kind {
        CurvatureKind::Mean => DMatrix::zeros(n, n),
        CurvatureKind::SigmaKRoot { k } => {
            let k = *k;
            if k == 1 {
                return DMatrix::zeros(n, n);
            }
            let kf = k as f64;
            let s = elementary_symmetric(lambda)[k];
            let ds: Vec<f64> = (0..n)
                .map(|i| elementary_symmetric_without(lambda, &[i])[k - 1])
                .collect();
            let first = s.powf(1.0 / kf - 1.0) / kf;
            let second = (1.0 / kf) * (1.0 / kf - 1.0) * s.powf(1.0 / kf - 2.0);
            DMatrix::from_fn(n, n, |i, j| {
                let d2s = if i == j {
                    0.0
                } else {
                    elementary_symmetric_without(lambda, &[i, j])[k - 2]
                };
                first * d2s + second * ds[i] * ds[j]
            })
        }
        CurvatureKind::GaussRoot => {
            let gamma = value(kind, lambda);
            let nf = n as f64;
            DMatrix::from_fn(n, n, |i, j| {
                let cross = gamma / (nf * nf * lambda[i] * lambda[j]);
                if i == j {
                    cross - gamma / (nf * lambda[i] * lambda[i])
                } else {
                    cross
                }
            })
        }
        CurvatureKind::PowerMean { p } => {
            let gamma = value(kind, lambda);
            let r: Vec<f64> = lambda.iter().map(|l| l / gamma).collect();
            DMatrix::from_fn(n, n, |i, j| {
                let diag = if i == j { r[i].powf(p - 2.0) } else { 0.0 };
                (p - 1.0) / gamma * (diag - r[i].powf(p - 1.0) * r[j].powf(p - 1.0))
            })
        }
        CurvatureKind::ConvexCombo { t, inner } => hessian(inner, lambda) * (1.0 - t),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + b.abs())
    }

    #[test]
    fn evaluation_examples() {
        let mean = CurvatureSpec::mean(3).unwrap();
        assert_eq!(eval_gamma(&mean, &[1.0, 2.0, 3.0]).unwrap(), 6.0);
        let s2 = CurvatureSpec::sigma_k_root(2, 2).unwrap();
        assert!(close(eval_gamma(&s2, &[1.0, 1.0]).unwrap(), 1.0, 1e-15));
        let gauss = CurvatureSpec::gauss_root(2).unwrap();
        assert!(close(eval_gamma(&gauss, &[4.0, 1.0]).unwrap(), 2.0, 1e-15));
        let combo = CurvatureSpec::convex_combo(0.5, gauss).unwrap();
        // 0.5·(4 + 1) + 0.5·√(4·1)
        assert!(close(eval_gamma(&combo, &[4.0, 1.0]).unwrap(), 3.5, 1e-15));
    }

    #[test]
    fn gradient_examples() {
        let mean = CurvatureSpec::mean(3).unwrap();
        assert_eq!(grad_gamma(&mean, &[1.0, -0.5, 3.0]).unwrap(), vec![1.0; 3]);
        let s2 = CurvatureSpec::sigma_k_root(2, 2).unwrap();
        let g = grad_gamma(&s2, &[1.0, 1.0]).unwrap();
        assert!(close(g[0], 0.5, 1e-15) && close(g[1], 0.5, 1e-15));
        let gauss = CurvatureSpec::gauss_root(2).unwrap();
        let g = grad_gamma(&gauss, &[4.0, 1.0]).unwrap();
        assert!(close(g[0], 0.25, 1e-15) && close(g[1], 1.0, 1e-15));
        assert!(euler_residual(&gauss, &[4.0, 1.0]).unwrap() < 1e-12);
    }

    #[test]
    fn outside_the_cone_is_a_domain_error() {
        let s2 = CurvatureSpec::sigma_k_root(2, 2).unwrap();
        assert!(matches!(
            eval_gamma(&s2, &[2.0, -1.0]),
            Err(Error::OutsideCone { .. })
        ));
        let gauss = CurvatureSpec::gauss_root(2).unwrap();
        assert!(eval_gamma(&gauss, &[1.0, -0.1]).is_err());
        assert!(eval_gamma(&gauss, &[1.0]).is_err());
    }

    #[test]
    fn boundary_evaluates_by_extension_and_refuses_derivatives() {
        let s2 = CurvatureSpec::sigma_k_root(2, 2).unwrap();
        let v = evaluate(&s2, &[1.0, 0.0]).unwrap();
        assert_eq!(v.value, 0.0);
        assert!(v.on_boundary);
        assert!(matches!(
            grad_gamma(&s2, &[1.0, 0.0]),
            Err(Error::OnBoundary { .. })
        ));
        assert_eq!(closure_gradient(&s2, &[1.0, 0.0]).unwrap(), None);

        let pm = CurvatureSpec::power_mean(1.5, 2).unwrap();
        // a tiny negative entry from rounding is clamped onto the boundary
        let v = evaluate(&pm, &[0.7, -1e-15]).unwrap();
        assert!(v.on_boundary && close(v.value, 0.7, 1e-14));
        let g = closure_gradient(&pm, &[0.7, -1e-15]).unwrap().unwrap();
        assert!(close(g[0], 1.0, 1e-14) && g[1] == 0.0);
    }

    #[test]
    fn radial_direction_is_in_the_hessian_kernel() {
        let lambda = [0.3, 1.1, 2.0];
        for spec in [
            CurvatureSpec::sigma_k_root(2, 3).unwrap(),
            CurvatureSpec::sigma_k_root(3, 3).unwrap(),
            CurvatureSpec::gauss_root(3).unwrap(),
            CurvatureSpec::power_mean(2.5, 3).unwrap(),
        ] {
            let q = hess_quadform_eig(&spec, &lambda, &lambda).unwrap();
            assert!(q.abs() < 1e-13, "{spec}: {q}");
        }
    }

    #[test]
    fn sigma2_off_radial_quadform_matches_finite_differences() {
        let spec = CurvatureSpec::sigma_k_root(2, 2).unwrap();
        let lambda = [1.0, 2.0];
        let xi = [1.0, -1.0];
        let q = hess_quadform_eig(&spec, &lambda, &xi).unwrap();
        let eps = 1e-5;
        let at = |s: f64| {
            eval_gamma(&spec, &[lambda[0] + s * xi[0], lambda[1] + s * xi[1]]).unwrap()
        };
        let fd = (at(eps) - 2.0 * at(0.0) + at(-eps)) / (eps * eps);
        assert!(q < 0.0);
        assert!(((q - fd) / q).abs() < 1e-5, "q = {q}, fd = {fd}");
    }
}
