use nalgebra::DMatrix;

use super::field::GridField;
use super::shape::ShapeField;
use super::stencil;
use crate::curvature::{closure_gradient, CurvatureSpec};
use crate::error::{Error, Result};

/// Covariant Hessian ∇_i∇_j f = ∂_i∂_j f − Γᵏᵢⱼ ∂_k f in graph coordinates.
///
/// Defined where the shape field is defined and `f` is known on the whole stencil.
pub fn surface_hessian(shape: &ShapeField, f: &GridField<f64>) -> GridField<DMatrix<f64>> {
    let grid = shape.grid();
    let get = |i: usize| f.get(i).copied();
    let mut out = GridField::empty(grid.clone());
    for (flat, sp) in shape.iter() {
        let (Some(df), Some(d2f)) = (
            stencil::gradient(grid, &get, flat),
            stencil::hessian(grid, &get, flat),
        ) else {
            continue;
        };
        let n = grid.n();
        let hess = DMatrix::from_fn(n, n, |i, j| {
            d2f[(i, j)] - (0..n).map(|k| sp.christoffel(k, i, j) * df[k]).sum::<f64>()
        });
        out.set(flat, hess);
    }
    out
}

/// Δ_γ f = Σ_a ∂γ/∂λ_a · ∇²f(τ_a, τ_a).
pub fn gamma_laplacian(
    shape: &ShapeField,
    spec: &CurvatureSpec,
    f: &GridField<f64>,
) -> Result<GridField<f64>> {
    let hessians = surface_hessian(shape, f);
    let mut out = GridField::empty(shape.grid().clone());
    for (flat, hess) in hessians.iter() {
        let sp = shape.get(flat).expect("hessian nodes carry shape data");
        let lambda = sp.lambda().values();
        let at = |e| Error::at(shape.grid().multi_index(flat), e);
        let dgamma = closure_gradient(spec, lambda).map_err(at)?.ok_or_else(|| {
            at(Error::OnBoundary {
                lambda: lambda.to_vec(),
                cone: spec.cone().to_string(),
            })
        })?;
        let diag = sp.frame_diagonal(hess);
        out.set(flat, dgamma.iter().zip(&diag).map(|(g, h)| g * h).sum());
    }
    Ok(out)
}

/// ∇_{n+1} f = ⟨∇f, e_{n+1}^⊤⟩ = gⁱʲ u_i ∂_j f.
pub fn directional_height_gradient(shape: &ShapeField, f: &GridField<f64>) -> GridField<f64> {
    let grid = shape.grid();
    let get = |i: usize| f.get(i).copied();
    let mut out = GridField::empty(grid.clone());
    for (flat, sp) in shape.iter() {
        let Some(df) = stencil::gradient(grid, &get, flat) else {
            continue;
        };
        let ginv = sp.metric_inv();
        let du = sp.du();
        let n = grid.n();
        let mut total = 0.0;
        for i in 0..n {
            for j in 0..n {
                total += ginv[(i, j)] * du[i] * df[j];
            }
        }
        out.set(flat, total);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{shape_field, Grid, GraphPatch};

    fn flat_setup() -> (ShapeField, GridField<f64>) {
        let grid = Grid::new(&[-1.0, -1.0], &[1.0, 1.0], &[11, 11]).unwrap();
        let patch = GraphPatch::from_fn(grid.clone(), |_| 0.0);
        let shape = shape_field(&patch).unwrap();
        let f = GridField::full(
            grid.clone(),
            (0..grid.len()).map(|i| grid.coordinate(i)[0].powi(2)).collect(),
        );
        (shape, f)
    }

    #[test]
    fn flat_plane_hessian_of_square() {
        let (shape, f) = flat_setup();
        let hess = surface_hessian(&shape, &f);
        assert!(hess.defined_count() > 0);
        for (_, h) in hess.iter() {
            assert!((h[(0, 0)] - 2.0).abs() < 1e-10);
            assert!(h[(0, 1)].abs() < 1e-10 && h[(1, 1)].abs() < 1e-10);
        }
        let spec = CurvatureSpec::mean(2).unwrap();
        for (_, v) in gamma_laplacian(&shape, &spec, &f).unwrap().iter() {
            assert!((v - 2.0).abs() < 1e-10);
        }
        assert_eq!(directional_height_gradient(&shape, &f).max_abs(), 0.0);
    }

    #[test]
    fn constants_are_annihilated() {
        let grid = Grid::new(&[-1.0, -1.0], &[1.0, 1.0], &[11, 11]).unwrap();
        let patch = GraphPatch::from_fn(grid.clone(), |x| 0.5 * (x[0] * x[0] + 0.3 * x[1] * x[1]));
        let shape = shape_field(&patch).unwrap();
        let f = GridField::full(grid.clone(), vec![3.0; grid.len()]);
        for (_, h) in surface_hessian(&shape, &f).iter() {
            assert!(h.amax() < 1e-12);
        }
        let spec = CurvatureSpec::gauss_root(2).unwrap();
        assert!(gamma_laplacian(&shape, &spec, &f).unwrap().max_abs() < 1e-12);
        assert!(directional_height_gradient(&shape, &f).max_abs() < 1e-12);
    }

    #[test]
    fn height_function_hessian_is_second_form_times_height_angle() {
        // ∇²u = A·⟨ν, e_{n+1}⟩ for the upward normal; exact for quadratic u
        let grid = Grid::new(&[-1.0, -1.0], &[1.0, 1.0], &[21, 21]).unwrap();
        let patch = GraphPatch::from_fn(grid.clone(), |x| 0.5 * x[0] * x[0] + 0.2 * x[0] * x[1] - 0.1 * x[1] * x[1]);
        let shape = shape_field(&patch).unwrap();
        let u = GridField::full(grid.clone(), patch.u().to_vec());
        for (flat, h) in surface_hessian(&shape, &u).iter() {
            let sp = shape.get(flat).unwrap();
            let expected = sp.second_form() * sp.height_angle();
            assert!((h - expected).amax() < 1e-12);
        }
    }
}
