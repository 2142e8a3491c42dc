use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use translab::curvature::{
    catalog, classify, cone_contains, euler_residual, eval_gamma, grad_gamma, hess_quadform_eig, matrix_grad,
    matrix_hess_quadform, sample_cone_point, ConeSpec, CurvatureKind, CurvatureSpec, SpectralPoint,
};
use translab::Error;

fn all_specs() -> Vec<CurvatureSpec> {
    (1..=4).flat_map(catalog).collect()
}

/// A catalog spec together with a point well inside its cone.
fn spec_and_point() -> impl Strategy<Value = (CurvatureSpec, Vec<f64>)> {
    let specs = all_specs();
    (0..specs.len(), any::<u64>()).prop_map(move |(i, seed)| {
        let spec = specs[i].clone();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let lambda = sample_cone_point(&spec.cone(), spec.n(), &mut rng);
        (spec, lambda)
    })
}

fn orthogonal(n: usize, seed: u64) -> DMatrix<f64> {
    use rand::Rng;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0f64..1.0));
    m.qr().q()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn permutation_symmetry((spec, lambda) in spec_and_point(), shift in 0usize..4) {
        let mut permuted = lambda.clone();
        permuted.reverse();
        let len = permuted.len();
        permuted.rotate_left(shift % len);
        let g = eval_gamma(&spec, &lambda).unwrap();
        prop_assert!(rel(eval_gamma(&spec, &permuted).unwrap(), g) < 1e-12);
    }

    #[test]
    fn one_homogeneity((spec, lambda) in spec_and_point()) {
        let g = eval_gamma(&spec, &lambda).unwrap();
        for c in [0.5, 2.0, 10.0] {
            let scaled: Vec<f64> = lambda.iter().map(|l| c * l).collect();
            prop_assert!(rel(eval_gamma(&spec, &scaled).unwrap(), c * g) < 1e-12);
        }
    }

    #[test]
    fn euler_relation_and_positive_gradient((spec, lambda) in spec_and_point()) {
        let g = eval_gamma(&spec, &lambda).unwrap();
        prop_assert!(euler_residual(&spec, &lambda).unwrap() < 1e-10 * g);
        prop_assert!(grad_gamma(&spec, &lambda).unwrap().iter().all(|d| *d > 0.0));
    }

    #[test]
    fn radial_quadform_vanishes((spec, lambda) in spec_and_point()) {
        let q = hess_quadform_eig(&spec, &lambda, &lambda).unwrap();
        let scale = lambda.iter().map(|l| l * l).sum::<f64>().sqrt();
        prop_assert!(q.abs() < 1e-9 * scale.max(1.0));
    }

    #[test]
    fn matrix_grad_is_equivariant((spec, lambda) in spec_and_point(), seed in any::<u64>()) {
        let n = spec.n();
        let q0 = orthogonal(n, seed);
        let q1 = orthogonal(n, seed.wrapping_add(1));
        let d = DMatrix::from_diagonal(&DVector::from_column_slice(&lambda));
        let a = &q0 * d * q0.transpose();
        let ga = matrix_grad(&spec, &SpectralPoint::from_matrix(a.clone()).unwrap()).unwrap();
        let rotated = &q1 * &a * q1.transpose();
        let gr = matrix_grad(&spec, &SpectralPoint::from_matrix(rotated).unwrap()).unwrap();
        let expected = &q1 * &ga * q1.transpose();
        prop_assert!((gr - &expected).norm() < 1e-10 * expected.norm());
    }

    #[test]
    fn quadform_sign_per_class((spec, lambda) in spec_and_point(), seed in any::<u64>()) {
        use rand::Rng;
        let n = spec.n();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0f64..1.0));
        let mut t = &m + m.transpose();
        t /= t.norm().max(1e-12);
        let q = orthogonal(n, seed);
        let point = SpectralPoint::from_parts(q, &lambda).unwrap();
        let scale = lambda.iter().map(|l| l * l).sum::<f64>().sqrt();
        let v = matrix_hess_quadform(&spec, &point, &t).unwrap() * scale;
        match spec.kind() {
            CurvatureKind::PowerMean { .. } => prop_assert!(v >= -1e-10),
            CurvatureKind::SigmaKRoot { .. } | CurvatureKind::GaussRoot => prop_assert!(v <= 1e-10),
            CurvatureKind::Mean => prop_assert!(v.abs() <= 1e-10),
            CurvatureKind::ConvexCombo { .. } => {}
        }
    }
}

#[test]
fn worked_examples() {
    let gauss = CurvatureSpec::gauss_root(2).unwrap();
    assert!((eval_gamma(&gauss, &[4.0, 1.0]).unwrap() - 2.0).abs() < 1e-15);
    let g = grad_gamma(&gauss, &[4.0, 1.0]).unwrap();
    assert!((g[0] - 0.25).abs() < 1e-15 && (g[1] - 1.0).abs() < 1e-15);
    assert!(euler_residual(&gauss, &[4.0, 1.0]).unwrap() < 1e-12);
    let mean = CurvatureSpec::mean(3).unwrap();
    assert_eq!(euler_residual(&mean, &[1.0, 2.0, 3.0]).unwrap(), 0.0);
    let sigma2 = CurvatureSpec::sigma_k_root(2, 2).unwrap();
    assert_eq!(eval_gamma(&sigma2, &[1.0, 0.0]).unwrap(), 0.0);
}

#[test]
fn derivatives_refuse_boundary_points() {
    let gauss = CurvatureSpec::gauss_root(2).unwrap();
    assert!(matches!(grad_gamma(&gauss, &[1.0, 0.0]), Err(Error::OnBoundary { .. })));
    assert!(matches!(eval_gamma(&gauss, &[1.0, -0.5]), Err(Error::OutsideCone { .. })));
}

#[test]
fn cone_examples() {
    let p = cone_contains(&ConeSpec::Positive, &[1.0, 1.0]);
    assert!(p.inside && (p.margin - 0.5f64.sqrt()).abs() < 1e-15);
    assert!(cone_contains(&ConeSpec::TwoConvexTilde, &[-0.1, 0.5, 0.5]).inside);
    assert!(!cone_contains(&ConeSpec::Alpha { alpha: 0.5 }, &[-0.5, 1.0]).inside);
}

/// Γ_α ∩ {λ₂ = 1} in two dimensions begins at r₊ = (−1 + α√(2 − α²))/(1 − α²).
#[test]
fn alpha_cone_boundary_ratio() {
    for alpha in [0.25f64, 0.5, 0.75, 0.9] {
        let r = (-1.0 + alpha * (2.0 - alpha * alpha).sqrt()) / (1.0 - alpha * alpha);
        let cone = ConeSpec::Alpha { alpha };
        assert!(cone_contains(&cone, &[r + 1e-6, 1.0]).inside, "α = {alpha}");
        assert!(!cone_contains(&cone, &[r - 1e-6, 1.0]).inside, "α = {alpha}");
        assert!(cone_contains(&cone, &[r, 1.0]).on_boundary());
    }
    let unit = ConeSpec::Alpha { alpha: 1.0 };
    assert!(cone_contains(&unit, &[1e-6, 1.0]).inside);
    assert!(!cone_contains(&unit, &[-1e-6, 1.0]).inside);
}

#[test]
fn catalog_classification() {
    for spec in catalog(3) {
        let c = classify(&spec, 300);
        assert!(c.symmetric.holds && c.homogeneous.holds && c.monotone.holds, "{spec}");
        let expect_normalized = matches!(
            spec.kind(),
            CurvatureKind::Mean | CurvatureKind::SigmaKRoot { k: 1 } | CurvatureKind::PowerMean { .. }
        ) || matches!(spec.kind(), CurvatureKind::ConvexCombo { inner, .. } if matches!(**inner, CurvatureKind::PowerMean { .. }));
        assert_eq!(c.normalized.holds, expect_normalized, "{spec}");
    }
}

#[test]
fn spec_json_round_trip() {
    for spec in all_specs() {
        let text = spec.to_json_value().to_string();
        assert_eq!(CurvatureSpec::from_json(&text).unwrap(), spec);
    }
    assert!(CurvatureSpec::from_json("{\"kind\":\"Nope\",\"n\":2}").is_err());
    assert!(CurvatureSpec::from_json("not json").is_err());
}
