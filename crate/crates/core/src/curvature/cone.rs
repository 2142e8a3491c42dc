use std::fmt;

use serde::{Deserialize, Serialize};

use super::symmetric::elementary_symmetric;

/// Normalized margins within this distance of zero are treated as the cone boundary.
///
/// Finite-difference eigenvalues of cylinders carry rounding noise of order
/// 1e-12 in the flat directions; the tolerance absorbs it.
pub const BOUNDARY_TOLERANCE: f64 = 1e-9;

/// The cones on which curvature functions live, or which curvature data is tested against.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum ConeSpec {
    /// Γ₊: all λᵢ > 0.
    Positive,
    /// Γ_α: α|A| ≤ H, α ∈ (0, 1].
    Alpha { alpha: f64 },
    /// Γ̃: H > 0 and the two smallest curvatures have positive sum.
    TwoConvexTilde,
    /// Γ_k: Sᵢ(λ) > 0 for i = 1..k.
    Garding { k: usize },
    /// H > 0.
    MeanPositive,
}

impl fmt::Display for ConeSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConeSpec::Positive => write!(f, "Γ₊"),
            ConeSpec::Alpha { alpha } => write!(f, "Γ_α(α={alpha})"),
            ConeSpec::TwoConvexTilde => write!(f, "Γ̃"),
            ConeSpec::Garding { k } => write!(f, "Γ_{k}"),
            ConeSpec::MeanPositive => write!(f, "{{H>0}}"),
        }
    }
}

/// Result of a cone membership test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConeMembership {
    /// Strictly inside the open cone.
    pub inside: bool,
    /// Minimum slack of the defining inequalities, normalized by |λ|
    /// (zero on the boundary, positive inside).
    pub margin: f64,
}

impl ConeMembership {
    pub fn in_closure(&self) -> bool {
        self.margin >= -BOUNDARY_TOLERANCE
    }

    pub fn on_boundary(&self) -> bool {
        self.margin.abs() <= BOUNDARY_TOLERANCE
    }

    pub fn interior(&self) -> bool {
        self.margin > BOUNDARY_TOLERANCE
    }
}

/// Tests λ against the defining inequalities of `cone`.
///
/// Each slack is made dimensionless: linear inequalities are divided by |λ|,
/// and Sᵢ(λ) by |λ|ⁱ. The origin has margin 0 for every cone.
pub fn cone_contains(cone: &ConeSpec, lambda: &[f64]) -> ConeMembership {
    let norm = lambda.iter().map(|l| l * l).sum::<f64>().sqrt();
    if norm == 0.0 {
        return ConeMembership {
            inside: false,
            margin: 0.0,
        };
    }
    let h: f64 = lambda.iter().sum();
    let margin = match cone {
        ConeSpec::Positive => lambda.iter().copied().fold(f64::INFINITY, f64::min) / norm,
        ConeSpec::Alpha { alpha } => (h - alpha * norm) / norm,
        ConeSpec::MeanPositive => h / norm,
        ConeSpec::TwoConvexTilde => {
            let mut sorted = lambda.to_vec();
            sorted.sort_by(f64::total_cmp);
            let pair = if sorted.len() >= 2 {
                sorted[0] + sorted[1]
            } else {
                sorted[0]
            };
            h.min(pair) / norm
        }
        ConeSpec::Garding { k } => {
            let s = elementary_symmetric(lambda);
            (1..=(*k).min(lambda.len()))
                .map(|i| s[i] / norm.powi(i as i32))
                .fold(f64::INFINITY, f64::min)
        }
    };
    ConeMembership {
        inside: margin > 0.0,
        margin,
    }
}
