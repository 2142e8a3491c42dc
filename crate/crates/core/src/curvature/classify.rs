use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use super::cone::cone_contains;
use super::gamma::{gradient, hessian, value};
use super::{eval_gamma, ConeSpec, CurvatureSpec};

pub const DEFAULT_SAMPLE_COUNT: usize = 1000;
pub const DEFAULT_SEED: u64 = 0x5eed_0001;

const SYMMETRY_TOL: f64 = 1e-12;
const HOMOGENEITY_TOL: f64 = 1e-12;
const NORMALIZATION_TOL: f64 = 1e-9;
const CURVATURE_SIGN_TOL: f64 = 1e-10;
const SCALINGS: [f64; 3] = [0.5, 2.0, 10.0];

/// Sampled points keep at least this normalized distance from the cone boundary.
const SAMPLE_MARGIN: f64 = 0.02;

/// A sampled verdict with its worst-case slack; `margin >= 0` exactly when `holds`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PropertyCheck {
    pub holds: bool,
    pub margin: f64,
}

impl PropertyCheck {
    fn from_margin(margin: f64) -> Self {
        Self {
            holds: margin >= 0.0,
            margin,
        }
    }
}

/// Structural properties of a curvature function, decided by sampling.
///
/// Sampled, not proved.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Classification {
    pub symmetric: PropertyCheck,
    pub homogeneous: PropertyCheck,
    pub monotone: PropertyCheck,
    pub normalized: PropertyCheck,
    pub convex: PropertyCheck,
    pub concave: PropertyCheck,
    pub off_radial_strict: PropertyCheck,
    pub samples: usize,
    pub seed: u64,
    /// Sampled sup of max ∂γ / min ∂γ.
    pub ellipticity_ratio: f64,
}

impl Classification {
    /// Looks a flag up by its field name.
    pub fn property(&self, name: &str) -> Option<PropertyCheck> {
        Some(match name {
            "symmetric" => self.symmetric,
            "homogeneous" => self.homogeneous,
            "monotone" => self.monotone,
            "normalized" => self.normalized,
            "convex" => self.convex,
            "concave" => self.concave,
            "off_radial_strict" => self.off_radial_strict,
            _ => return None,
        })
    }

    pub const PROPERTY_NAMES: [&'static str; 7] = [
        "symmetric",
        "homogeneous",
        "monotone",
        "normalized",
        "convex",
        "concave",
        "off_radial_strict",
    ];
}

/// Draws a point strictly inside `cone` with margin above 0.02, at a random scale.
///
/// Proposals are μ·(1,…,1) + N(0, I) with μ ~ U(0, 2); after repeated rejection
/// the absolute values plus a positive shift are used, which lie in every cone.
pub fn sample_cone_point<R: Rng + ?Sized>(cone: &ConeSpec, n: usize, rng: &mut R) -> Vec<f64> {
    let scale = (rng.random_range(-1.0..1.0f64) * 2.0).exp();
    for _ in 0..1000 {
        let mu: f64 = rng.random_range(0.0..2.0);
        let lambda: Vec<f64> = (0..n)
            .map(|_| mu + rng.sample::<f64, _>(StandardNormal))
            .collect();
        if cone_contains(cone, &lambda).margin > SAMPLE_MARGIN {
            return lambda.into_iter().map(|l| l * scale).collect();
        }
    }
    (0..n)
        .map(|_| scale * (0.1 + rng.sample::<f64, _>(StandardNormal).abs()))
        .collect()
}

fn relative_error(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

fn unit(v: &[f64]) -> Vec<f64> {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter().map(|x| x / norm).collect()
}

/// Component of ξ orthogonal to λ, normalized; `None` if ξ is (nearly) radial.
fn off_radial(lambda: &[f64], xi: &[f64]) -> Option<Vec<f64>> {
    let l = unit(lambda);
    let dot: f64 = l.iter().zip(xi).map(|(a, b)| a * b).sum();
    let perp: Vec<f64> = xi.iter().zip(&l).map(|(x, a)| x - dot * a).collect();
    let norm = perp.iter().map(|x| x * x).sum::<f64>().sqrt();
    (norm > 1e-6).then(|| perp.iter().map(|x| x / norm).collect())
}

pub fn classify(spec: &CurvatureSpec, sample_count: usize) -> Classification {
    classify_with_seed(spec, sample_count, DEFAULT_SEED)
}

pub fn classify_with_seed(spec: &CurvatureSpec, sample_count: usize, seed: u64) -> Classification {
    let sample_count = sample_count.max(1);
    let n = spec.n();
    let cone = spec.cone();
    let kind = spec.kind();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut symmetry_err: f64 = 0.0;
    let mut homogeneity_err: f64 = 0.0;
    let mut min_grad = f64::INFINITY;
    let mut min_q = f64::INFINITY;
    let mut max_q = f64::NEG_INFINITY;
    let mut ellipticity: f64 = 1.0;

    for _ in 0..sample_count {
        let lambda = sample_cone_point(&cone, n, &mut rng);
        let gamma = value(kind, &lambda);

        let mut permuted = lambda.clone();
        permuted.shuffle(&mut rng);
        symmetry_err = symmetry_err.max(relative_error(value(kind, &permuted), gamma));

        for c in SCALINGS {
            let scaled: Vec<f64> = lambda.iter().map(|l| c * l).collect();
            homogeneity_err = homogeneity_err.max(relative_error(value(kind, &scaled), c * gamma));
        }

        let grad = gradient(kind, &lambda);
        let (lo, hi) = grad
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &g| (lo.min(g), hi.max(g)));
        min_grad = min_grad.min(lo);
        if lo > 0.0 {
            ellipticity = ellipticity.max(hi / lo);
        }

        // quadform at |λ| = 1 along a unit off-radial direction
        let lambda_unit = unit(&lambda);
        let xi: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        if let Some(dir) = off_radial(&lambda_unit, &xi) {
            let hess = hessian(kind, &lambda_unit);
            let mut q = 0.0;
            for a in 0..n {
                for b in 0..n {
                    q += hess[(a, b)] * dir[a] * dir[b];
                }
            }
            min_q = min_q.min(q);
            max_q = max_q.max(q);
        }
    }

    // n = 1 has no off-radial direction; the Hessian of a 1-homogeneous
    // function of one variable vanishes.
    if !min_q.is_finite() {
        min_q = 0.0;
        max_q = 0.0;
    }

    let mut e1 = vec![0.0; n];
    e1[0] = 1.0;
    let normalization_err = match eval_gamma(spec, &e1) {
        Ok(v) => (v - 1.0).abs(),
        Err(_) => f64::INFINITY,
    };

    let strict_margin = min_q.max(-max_q) - CURVATURE_SIGN_TOL;

    Classification {
        symmetric: PropertyCheck::from_margin(SYMMETRY_TOL - symmetry_err),
        homogeneous: PropertyCheck::from_margin(HOMOGENEITY_TOL - homogeneity_err),
        monotone: PropertyCheck {
            holds: min_grad > 0.0,
            margin: min_grad,
        },
        normalized: PropertyCheck {
            holds: normalization_err < NORMALIZATION_TOL,
            margin: NORMALIZATION_TOL - normalization_err,
        },
        convex: PropertyCheck::from_margin(min_q + CURVATURE_SIGN_TOL),
        concave: PropertyCheck::from_margin(CURVATURE_SIGN_TOL - max_q),
        off_radial_strict: PropertyCheck {
            holds: strict_margin > 0.0,
            margin: strict_margin,
        },
        samples: sample_count,
        seed,
        ellipticity_ratio: ellipticity,
    }
}

/// Sampled sup over the cone of max_i ∂_iγ / min_i ∂_iγ.
///
/// Finite for uniformly elliptic functions on the sampled region; the cone is
/// only sampled away from its boundary, so this is an estimate from below.
pub fn ellipticity_estimate(spec: &CurvatureSpec, sample_count: usize, seed: u64) -> f64 {
    classify_with_seed(spec, sample_count, seed).ellipticity_ratio
}

/// The catalog of curvature functions exercised in dimension `n`.
pub fn catalog(n: usize) -> Vec<CurvatureSpec> {
    let mut specs = vec![CurvatureSpec::mean(n).expect("n >= 1")];
    for k in 1..=n {
        specs.push(CurvatureSpec::sigma_k_root(k, n).expect("1 <= k <= n"));
    }
    specs.push(CurvatureSpec::gauss_root(n).expect("n >= 1"));
    for p in [1.5, 2.0, 4.0] {
        specs.push(CurvatureSpec::power_mean(p, n).expect("p >= 1"));
    }
    let gauss = CurvatureSpec::gauss_root(n).expect("n >= 1");
    specs.push(CurvatureSpec::convex_combo(0.5, gauss).expect("t in (0, 1]"));
    let top = CurvatureSpec::sigma_k_root(n, n).expect("k = n");
    specs.push(CurvatureSpec::convex_combo(0.25, top).expect("t in (0, 1]"));
    let pm = CurvatureSpec::power_mean(2.0, n).expect("p >= 1");
    specs.push(CurvatureSpec::convex_combo(0.5, pm).expect("t in (0, 1]"));
    specs
}
