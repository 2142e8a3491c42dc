//! Curvature functions of the principal curvatures and their calculus.
//!
//! A curvature function γ is a smooth, symmetric, positively 1-homogeneous,
//! monotone function on an open symmetric cone Γ ⊂ ℝⁿ, continuously extended
//! to the closure. This module holds a closed catalog of such functions
//! ([`CurvatureKind`]), their cones ([`ConeSpec`]), and the first and second
//! derivatives both at the eigenvalue level and lifted to symmetric matrices.

mod classify;
mod cone;
mod gamma;
mod matrix;
mod symmetric;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use classify::{
    catalog, classify, classify_with_seed, ellipticity_estimate, sample_cone_point,
    Classification, PropertyCheck, DEFAULT_SAMPLE_COUNT, DEFAULT_SEED,
};
pub use cone::{cone_contains, ConeMembership, ConeSpec, BOUNDARY_TOLERANCE};
pub use gamma::{
    closure_gradient, eval_gamma, euler_residual, evaluate, grad_gamma, hess_gamma,
    hess_quadform_eig, GammaValue,
};
pub use matrix::{gamma_of_matrix, matrix_grad, matrix_hess_quadform, SpectralPoint, DEGENERATE_GAP};
pub use symmetric::{elementary_symmetric, elementary_symmetric_without};

/// A principal-curvature vector λ = (λ₁, …, λₙ).
///
/// No ordering is imposed; use [`EigenvalueVector::ascending`] for a sorted view.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EigenvalueVector(Vec<f64>);

impl EigenvalueVector {
    pub fn new(values: Vec<f64>) -> Self {
        Self(values)
    }

    pub fn n(&self) -> usize {
        self.0.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn ascending(&self) -> Vec<f64> {
        let mut v = self.0.clone();
        v.sort_by(f64::total_cmp);
        v
    }

    pub fn min(&self) -> f64 {
        self.0.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.0.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// H = Σ λᵢ.
    pub fn mean_curvature(&self) -> f64 {
        self.0.iter().sum()
    }

    /// |A|² = Σ λᵢ².
    pub fn norm_squared(&self) -> f64 {
        self.0.iter().map(|l| l * l).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_squared().sqrt()
    }
}

impl From<Vec<f64>> for EigenvalueVector {
    fn from(values: Vec<f64>) -> Self {
        Self(values)
    }
}

impl From<&[f64]> for EigenvalueVector {
    fn from(values: &[f64]) -> Self {
        Self(values.to_vec())
    }
}

/// The catalog of curvature functions.
#[derive(Debug, Clone, PartialEq)]
pub enum CurvatureKind {
    /// H = λ₁ + … + λₙ.
    Mean,
    /// S_k^{1/k} on the Gårding cone Γ_k.
    SigmaKRoot { k: usize },
    /// K^{1/n} = (λ₁⋯λₙ)^{1/n} on Γ₊.
    GaussRoot,
    /// (Σ λᵢᵖ)^{1/p} on Γ₊, p ≥ 1.
    PowerMean { p: f64 },
    /// t·H + (1 − t)·γ_inner on the cone of the inner function.
    ConvexCombo { t: f64, inner: Box<CurvatureKind> },
}

impl CurvatureKind {
    fn cone(&self) -> ConeSpec {
        match self {
            CurvatureKind::Mean => ConeSpec::MeanPositive,
            CurvatureKind::SigmaKRoot { k } => ConeSpec::Garding { k: *k },
            CurvatureKind::GaussRoot | CurvatureKind::PowerMean { .. } => ConeSpec::Positive,
            CurvatureKind::ConvexCombo { inner, .. } => inner.cone(),
        }
    }

    fn validate(&self, n: usize) -> Result<()> {
        match self {
            CurvatureKind::Mean | CurvatureKind::GaussRoot => Ok(()),
            CurvatureKind::SigmaKRoot { k } => {
                if *k >= 1 && *k <= n {
                    Ok(())
                } else {
                    Err(Error::InvalidSpec(format!(
                        "SigmaKRoot requires 1 <= k <= n, got k = {k}, n = {n}"
                    )))
                }
            }
            CurvatureKind::PowerMean { p } => {
                if p.is_finite() && *p >= 1.0 {
                    Ok(())
                } else {
                    Err(Error::InvalidSpec(format!("PowerMean requires p >= 1, got {p}")))
                }
            }
            CurvatureKind::ConvexCombo { t, inner } => {
                if !(t.is_finite() && *t > 0.0 && *t <= 1.0) {
                    return Err(Error::InvalidSpec(format!(
                        "ConvexCombo requires t in (0, 1], got {t}"
                    )));
                }
                inner.validate(n)
            }
        }
    }
}

impl fmt::Display for CurvatureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CurvatureKind::Mean => write!(f, "Mean"),
            CurvatureKind::SigmaKRoot { k } => write!(f, "SigmaKRoot(k={k})"),
            CurvatureKind::GaussRoot => write!(f, "GaussRoot"),
            CurvatureKind::PowerMean { p } => write!(f, "PowerMean(p={p})"),
            CurvatureKind::ConvexCombo { t, inner } => write!(f, "ConvexCombo(t={t}, {inner})"),
        }
    }
}

/// A curvature function together with its dimension; the cone is implied by the kind.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureSpec {
    kind: CurvatureKind,
    n: usize,
}

impl CurvatureSpec {
    pub fn new(kind: CurvatureKind, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidSpec("dimension n must be at least 1".into()));
        }
        kind.validate(n)?;
        Ok(Self { kind, n })
    }

    pub fn mean(n: usize) -> Result<Self> {
        Self::new(CurvatureKind::Mean, n)
    }

    pub fn sigma_k_root(k: usize, n: usize) -> Result<Self> {
        Self::new(CurvatureKind::SigmaKRoot { k }, n)
    }

    pub fn gauss_root(n: usize) -> Result<Self> {
        Self::new(CurvatureKind::GaussRoot, n)
    }

    pub fn power_mean(p: f64, n: usize) -> Result<Self> {
        Self::new(CurvatureKind::PowerMean { p }, n)
    }

    /// t·H + (1 − t)·γ_inner, sharing the inner function's dimension and cone.
    pub fn convex_combo(t: f64, inner: CurvatureSpec) -> Result<Self> {
        let n = inner.n;
        Self::new(
            CurvatureKind::ConvexCombo {
                t,
                inner: Box::new(inner.kind),
            },
            n,
        )
    }

    pub fn kind(&self) -> &CurvatureKind {
        &self.kind
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn cone(&self) -> ConeSpec {
        self.kind.cone()
    }

    /// The same function in another dimension.
    pub fn with_dimension(&self, n: usize) -> Result<Self> {
        Self::new(self.kind.clone(), n)
    }

    /// Parses the JSON object form `{"kind": ..., "n": ..., "k"?, "p"?, "t"?, "inner"?}`.
    pub fn from_json(text: &str) -> Result<Self> {
        let raw: SpecJson = serde_json::from_str(text)
            .map_err(|e| Error::InvalidSpec(format!("malformed JSON: {e}")))?;
        raw.into_spec(None)
    }

    pub fn from_json_value(value: serde_json::Value) -> Result<Self> {
        let raw: SpecJson = serde_json::from_value(value)
            .map_err(|e| Error::InvalidSpec(format!("malformed JSON: {e}")))?;
        raw.into_spec(None)
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        serde_json::to_value(SpecJson::from_kind(&self.kind, Some(self.n)))
            .expect("spec serialization is infallible")
    }
}

impl fmt::Display for CurvatureSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (n={})", self.kind, self.n)
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SpecJson {
    kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    k: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    t: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    inner: Option<Box<SpecJson>>,
}

impl SpecJson {
    fn from_kind(kind: &CurvatureKind, n: Option<usize>) -> Self {
        let mut raw = SpecJson {
            kind: String::new(),
            n,
            k: None,
            p: None,
            t: None,
            inner: None,
        };
        match kind {
            CurvatureKind::Mean => raw.kind = "Mean".into(),
            CurvatureKind::SigmaKRoot { k } => {
                raw.kind = "SigmaKRoot".into();
                raw.k = Some(*k);
            }
            CurvatureKind::GaussRoot => raw.kind = "GaussRoot".into(),
            CurvatureKind::PowerMean { p } => {
                raw.kind = "PowerMean".into();
                raw.p = Some(*p);
            }
            CurvatureKind::ConvexCombo { t, inner } => {
                raw.kind = "ConvexCombo".into();
                raw.t = Some(*t);
                raw.inner = Some(Box::new(SpecJson::from_kind(inner, None)));
            }
        }
        raw
    }

    fn into_spec(self, inherited_n: Option<usize>) -> Result<CurvatureSpec> {
        let n = match (self.n, inherited_n) {
            (Some(n), Some(outer)) if n != outer => {
                return Err(Error::InvalidSpec(format!(
                    "inner dimension {n} differs from outer dimension {outer}"
                )))
            }
            (Some(n), _) | (None, Some(n)) => n,
            (None, None) => return Err(Error::InvalidSpec("missing field \"n\"".into())),
        };
        let require = |field: &str, present: bool| {
            if present {
                Ok(())
            } else {
                Err(Error::InvalidSpec(format!(
                    "kind {} requires field \"{field}\"",
                    self.kind
                )))
            }
        };
        let kind = match self.kind.as_str() {
            "Mean" => CurvatureKind::Mean,
            "SigmaKRoot" => {
                require("k", self.k.is_some())?;
                CurvatureKind::SigmaKRoot { k: self.k.unwrap() }
            }
            "GaussRoot" => CurvatureKind::GaussRoot,
            "PowerMean" => {
                require("p", self.p.is_some())?;
                CurvatureKind::PowerMean { p: self.p.unwrap() }
            }
            "ConvexCombo" => {
                require("t", self.t.is_some())?;
                require("inner", self.inner.is_some())?;
                let inner = self.inner.unwrap().into_spec(Some(n))?;
                CurvatureKind::ConvexCombo {
                    t: self.t.unwrap(),
                    inner: Box::new(inner.kind),
                }
            }
            other => return Err(Error::InvalidSpec(format!("unknown kind \"{other}\""))),
        };
        CurvatureSpec::new(kind, n)
    }
}
