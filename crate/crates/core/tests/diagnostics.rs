use std::f64::consts::PI;
use std::sync::Arc;

use proptest::prelude::*;

use translab::curvature::{catalog, eval_gamma, ConeSpec, CurvatureSpec};
use translab::diagnostics::{
    alpha_threshold, angle_fields, aw_ratio, convexity_scan, cutoff, cutoff_shifted, diagnostics_fields,
    dichotomy_report, identity_check, q_squared_field, translator_residual, Branch, DichotomyOptions,
    DEFAULT_TRANSLATOR_TOLERANCE,
};
use translab::exact::{flat_patch, grim_patch, GrimSpec, QuadraticGraph};
use translab::geometry::{gamma_field, shape_field, GraphPatch, Grid};
use translab::io::{read_patch_csv, write_patch_csv};
use translab::profile::{profile_to_patch, shoot_bowl, ProfileSolution};
use translab::Error;

fn normalized_specs(n: usize) -> Vec<CurvatureSpec> {
    catalog(n)
        .into_iter()
        .filter(|s| {
            let mut e1 = vec![0.0; n];
            e1[0] = 1.0;
            eval_gamma(s, &e1).is_ok_and(|v| (v - 1.0).abs() < 1e-9)
        })
        .collect()
}

fn grim(h: f64) -> GraphPatch {
    let g = GrimSpec::new(PI, 2).unwrap();
    grim_patch(&g, g.grid(h, 9).unwrap()).unwrap()
}

fn mean_bowl() -> ProfileSolution {
    shoot_bowl(&CurvatureSpec::mean(2).unwrap(), 3.0, 1e-3).unwrap()
}

fn bowl_patch(h: f64) -> GraphPatch {
    profile_to_patch(&mean_bowl(), Grid::uniform(&[-1.5, -1.5], &[1.5, 1.5], h).unwrap()).unwrap()
}

#[test]
fn residual_examples() {
    let grid = Grid::uniform(&[-0.5, -0.5], &[0.5, 0.5], 0.1).unwrap();
    let origin = grid.flat_index(&[5, 5]);
    let spec = CurvatureSpec::mean(2).unwrap();

    let para = GraphPatch::from_analytic(grid.clone(), Arc::new(QuadraticGraph::paraboloid(2).unwrap())).unwrap();
    let shape = shape_field(&para).unwrap();
    let res = translator_residual(&shape, &gamma_field(&shape, &spec).unwrap());
    assert!((res.field.get(origin).unwrap() - 1.0).abs() < 1e-12);

    let flat = flat_patch(grid, 0.0).unwrap();
    let shape = shape_field(&flat).unwrap();
    let res = translator_residual(&shape, &gamma_field(&shape, &spec).unwrap());
    assert!(res.field.iter().all(|(_, v)| *v == -1.0));
    assert!(matches!(
        identity_check(&flat, &spec, DEFAULT_TRANSLATOR_TOLERANCE),
        Err(Error::NotATranslator { .. })
    ));

    for spec in normalized_specs(2) {
        let patch = grim(PI / 100.0);
        let g = GrimSpec::new(PI, 2).unwrap();
        for flat in patch.grid().interior(2).into_iter().step_by(37) {
            let sp = translab::exact::grim_shape(&g, &patch.grid().coordinate(flat)).unwrap();
            assert!((eval_gamma(&spec, sp.lambda().values()).unwrap() - sp.height_angle()).abs() < 1e-12);
        }
    }
}

#[test]
fn convexity_examples() {
    let h = PI / 100.0;
    let shape = shape_field(&grim(h)).unwrap();
    let scan = convexity_scan(&shape, &[ConeSpec::Alpha { alpha: 1.0 }], 10.0 * h * h);
    assert_eq!(scan.negative_count, 0);
    assert!(scan.min_lambda.abs() < 10.0 * h * h);
    assert!((scan.alpha_star_min.unwrap() - 1.0).abs() < 1e-12);

    let shape = shape_field(&bowl_patch(0.05)).unwrap();
    let scan = convexity_scan(&shape, &[ConeSpec::Positive], 10.0 * 0.05 * 0.05);
    assert!(scan.negative_count == 0 && scan.min_lambda > 0.0);
    assert!(scan.cone_margins[0].min_margin > 0.0);

    let grid = Grid::uniform(&[-0.5, -0.5], &[0.5, 0.5], 0.1).unwrap();
    let saddle = GraphPatch::from_analytic(grid, Arc::new(QuadraticGraph::saddle().unwrap())).unwrap();
    let scan = convexity_scan(&shape_field(&saddle).unwrap(), &[], 1e-3);
    assert!(scan.negative_count > 0 && (scan.min_lambda + 1.0).abs() < 1e-12);
}

#[test]
fn cutoff_shape() {
    assert!((cutoff(-1.0) + (-1.0f64).exp()).abs() < 1e-15);
    let mut r = -2.0f64;
    while r <= -0.1 {
        let d = 1e-4 * r.abs();
        let slope = (cutoff(r + d) - cutoff(r - d)) / (2.0 * d);
        let curvature = (cutoff(r + d) - 2.0 * cutoff(r) + cutoff(r - d)) / (d * d);
        assert!(cutoff(r) <= 0.0 && slope > 0.0 && curvature < 0.0, "r = {r}");
        r += 0.01;
    }
    assert_eq!(cutoff_shifted(0.5), cutoff(-0.5));
    assert_eq!(alpha_threshold(1.0), 0.0);
}

#[test]
fn aw_ratio_examples() {
    for spec in normalized_specs(2) {
        for h in [PI / 100.0, PI / 200.0] {
            let patch = grim(h);
            let shape = shape_field(&patch).unwrap();
            let gamma = gamma_field(&shape, &spec).unwrap();
            let aw = aw_ratio(&shape, &gamma);
            assert!(aw.field.iter().all(|(_, v)| (v - 1.0).abs() < 10.0 * h * h), "{spec}");
            // every cell whose full neighbourhood is defined is a local max
            let full_neighbourhood = patch.grid().interior(3).len();
            assert_eq!(aw.local_maxima.len(), full_neighbourhood, "{spec}");
        }
    }

    let spec = CurvatureSpec::mean(2).unwrap();
    let patch = bowl_patch(0.05);
    let shape = shape_field(&patch).unwrap();
    let aw = aw_ratio(&shape, &gamma_field(&shape, &spec).unwrap());
    for (flat, v) in aw.field.iter() {
        let r = patch.grid().coordinate(flat).iter().map(|x| x * x).sum::<f64>().sqrt();
        if r > 0.2 {
            assert!(*v < 1.0);
        }
    }
    for flat in &aw.local_maxima {
        let r = patch.grid().coordinate(*flat).iter().map(|x| x * x).sum::<f64>().sqrt();
        assert!(!(0.5..=1.2).contains(&r), "interior local max at r = {r}");
    }
}

#[test]
fn q_squared_examples() {
    for spec in normalized_specs(2) {
        for omega in [PI, 2.0 * PI] {
            let g = GrimSpec::new(omega, 2).unwrap();
            for h in [PI / 100.0, PI / 200.0] {
                let patch = grim_patch(&g, g.grid(h, 9).unwrap()).unwrap();
                let shape = shape_field(&patch).unwrap();
                let q2 = q_squared_field(&patch, &shape, &gamma_field(&shape, &spec).unwrap()).unwrap();
                let max = q2.max().unwrap();
                assert!(max <= 100.0 * h * h, "{spec} ω = {omega}: {max}");
                assert!(q2.min().unwrap() >= -100.0 * h * h);
            }
        }
    }
    let flat = flat_patch(Grid::uniform(&[0.0, 0.0], &[1.0, 1.0], 0.1).unwrap(), 2.0).unwrap();
    let shape = shape_field(&flat).unwrap();
    let spec = CurvatureSpec::mean(2).unwrap();
    let q2 = q_squared_field(&flat, &shape, &gamma_field(&shape, &spec).unwrap()).unwrap();
    assert!(q2.defined_count() > 0 && q2.max_abs() == 0.0);

    let patch = bowl_patch(0.05);
    let shape = shape_field(&patch).unwrap();
    let q2 = q_squared_field(&patch, &shape, &gamma_field(&shape, &spec).unwrap()).unwrap();
    for (flat, v) in q2.iter() {
        let r = patch.grid().coordinate(flat).iter().map(|x| x * x).sum::<f64>().sqrt();
        if (0.5..=1.2).contains(&r) {
            assert!(*v > 0.0);
        }
    }
}

#[test]
fn angle_examples() {
    let shape = shape_field(&grim(PI / 100.0)).unwrap();
    assert_eq!(angle_fields(&shape)[1].max_abs(), 0.0);
    let g = GrimSpec::new(PI, 3).unwrap();
    let patch = grim_patch(&g, g.grid(PI / 50.0, 6).unwrap()).unwrap();
    assert_eq!(angle_fields(&shape_field(&patch).unwrap())[1].max_abs(), 0.0);

    let grid = Grid::uniform(&[-0.5, -0.5], &[0.5, 0.5], 0.1).unwrap();
    let origin = grid.flat_index(&[5, 5]);
    let para = GraphPatch::from_analytic(grid, Arc::new(QuadraticGraph::paraboloid(2).unwrap())).unwrap();
    for angle in angle_fields(&shape_field(&para).unwrap()) {
        assert!(angle.get(origin).unwrap().abs() < 1e-14);
    }
}

#[test]
fn identity_converges_at_second_order() {
    let spec = CurvatureSpec::mean(2).unwrap();
    let residuals: Vec<f64> = [PI / 100.0, PI / 200.0, PI / 400.0]
        .iter()
        .map(|h| identity_check(&grim(*h), &spec, DEFAULT_TRANSLATOR_TOLERANCE).unwrap().max_abs())
        .collect();
    let order = (residuals[0] / residuals[2]).log2() / 2.0;
    assert!((1.7..=2.3).contains(&order), "{residuals:?}");
}

#[test]
fn verdicts() {
    let spec = CurvatureSpec::mean(2).unwrap();
    let verdict = |patch: &GraphPatch| {
        let shape = shape_field(patch).unwrap();
        let gamma = gamma_field(&shape, &spec).unwrap();
        dichotomy_report(patch, &shape, &gamma, DichotomyOptions::default())
    };
    assert_eq!(verdict(&grim(PI / 100.0)).unwrap().branch, Branch::GrimReaperLike);
    let bowl = verdict(&bowl_patch(0.05)).unwrap();
    assert_eq!(bowl.branch, Branch::StrictlyConvex);
    let json = serde_json::to_value(&bowl).unwrap();
    assert_eq!(json["branch"], "strictly convex");
    assert!(json["evidence"]["min_lambda"].as_f64().unwrap() > 0.0);

    let grid = Grid::uniform(&[-0.5, -0.5], &[0.5, 0.5], 0.1).unwrap();
    let saddle = GraphPatch::from_analytic(grid, Arc::new(QuadraticGraph::saddle().unwrap())).unwrap();
    let shape = shape_field(&saddle).unwrap();
    // a saddle is outside {H > 0} only where H < 0; Mean evaluates on the closure
    match gamma_field(&shape, &spec) {
        Ok(gamma) => assert!(matches!(
            dichotomy_report(&saddle, &shape, &gamma, DichotomyOptions::default()),
            Err(Error::NotATranslator { .. })
        )),
        Err(e) => assert!(matches!(e, Error::AtGridPoint { .. })),
    }
}

#[test]
fn csv_round_trip_reproduces_every_field() {
    let spec = CurvatureSpec::mean(2).unwrap();
    for patch in [grim(PI / 50.0), bowl_patch(0.1)] {
        let mut buf = Vec::new();
        write_patch_csv(&mut buf, &patch, &spec).unwrap();
        let back = read_patch_csv(buf.as_slice()).unwrap();
        let (a, b) = (diagnostics_fields(&patch, &spec).unwrap(), diagnostics_fields(&back, &spec).unwrap());
        let pairs = [
            (&a.residual, &b.residual),
            (&a.sx.j, &b.sx.j),
            (&a.sx.g, &b.sx.g),
            (&a.sx.gtilde, &b.sx.gtilde),
            (&a.aw_ratio, &b.aw_ratio),
            (&a.q_squared, &b.q_squared),
            (&a.identity_residual, &b.identity_residual),
        ];
        for (x, y) in pairs.into_iter().chain(a.angles.iter().zip(&b.angles)) {
            assert_eq!(x.defined_count(), y.defined_count());
            for ((_, u), (_, v)) in x.iter().zip(y.iter()) {
                assert!((u - v).abs() <= 1e-12 * u.abs().max(1.0));
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn cutoff_is_nonpositive_and_vanishes_on_the_right(r in -5.0f64..5.0) {
        prop_assert!(cutoff(r) <= 0.0);
        if r >= 0.0 {
            prop_assert_eq!(cutoff(r), 0.0);
        }
    }

    #[test]
    fn q_squared_is_nonnegative(a in 0.1f64..1.5, b in 0.1f64..1.5, c in -0.5f64..0.5) {
        let h = 0.1;
        let off = c * (a * b).sqrt();
        let graph = QuadraticGraph::new(nalgebra::DMatrix::from_row_slice(2, 2, &[a, off, off, b]), vec![0.2, -0.1], 0.0).unwrap();
        let patch = GraphPatch::from_analytic(Grid::uniform(&[-0.6, -0.6], &[0.6, 0.6], h).unwrap(), Arc::new(graph)).unwrap();
        let shape = shape_field(&patch).unwrap();
        let spec = CurvatureSpec::mean(2).unwrap();
        let q2 = q_squared_field(&patch, &shape, &gamma_field(&shape, &spec).unwrap()).unwrap();
        prop_assert!(q2.min().unwrap() >= -100.0 * h * h);
    }
}
