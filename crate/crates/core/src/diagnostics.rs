//! Auxiliary fields of the convexity arguments for translators, the
//! translator identity for γ, and the convex-or-cylinder verdict.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::curvature::{cone_contains, ConeSpec, CurvatureSpec};
use crate::error::{Error, Result};
use crate::geometry::{
    directional_height_gradient, gamma_field, gamma_laplacian, shape_field, stencil, GammaField,
    GraphPatch, GridField, ShapeField,
};

/// Data whose translator residual exceeds this is rejected by default.
pub const DEFAULT_TRANSLATOR_TOLERANCE: f64 = 1e-2;
/// Third derivatives of u keep the Q² field this many cells inside.
pub const Q_SQUARED_MARGIN: usize = 3;
/// Below this |r| the cutoff e^{−1/r²} underflows; f is set to 0 there.
pub const CUTOFF_UNDERFLOW: f64 = 0.038;
/// Relative slack of the weak inequality in local-maximum detection.
pub const PLATEAU_TOLERANCE: f64 = 1e-9;

/// f(r) = −r⁴ e^{−1/r²} for r < 0, and 0 for r ≥ 0.
pub fn cutoff(r: f64) -> f64 {
    if r >= 0.0 || r.abs() < CUTOFF_UNDERFLOW {
        0.0
    } else {
        -r.powi(4) * (-1.0 / (r * r)).exp()
    }
}

/// f̃(r) = f(r − 1).
pub fn cutoff_shifted(r: f64) -> f64 {
    cutoff(r - 1.0)
}

/// c(α) = α² − 1.
pub fn alpha_threshold(alpha: f64) -> f64 {
    alpha * alpha - 1.0
}

#[derive(Debug, Clone)]
pub struct ResidualReport {
    /// γ(λ) − ⟨ν, e_{n+1}⟩.
    pub field: GridField<f64>,
    pub max_abs: f64,
    pub mean_abs: f64,
}

pub fn translator_residual(shape: &ShapeField, gamma: &GammaField) -> ResidualReport {
    let mut field = GridField::empty(shape.grid().clone());
    for (flat, gp) in gamma.iter() {
        if let Some(sp) = shape.get(flat) {
            field.set(flat, gp.gamma - sp.height_angle());
        }
    }
    ResidualReport {
        max_abs: field.max_abs(),
        mean_abs: field.mean_abs(),
        field,
    }
}

/// |Δ_γγ + ∇_{n+1}γ + |A|²_γ·γ| without the translator precondition.
pub fn identity_residual(shape: &ShapeField, gamma: &GammaField) -> Result<GridField<f64>> {
    let gamma_values = gamma.gamma();
    let laplacian = gamma_laplacian(shape, gamma.spec(), &gamma_values)?;
    let height = directional_height_gradient(shape, &gamma_values);
    let mut out = GridField::empty(shape.grid().clone());
    for (flat, lap) in laplacian.iter() {
        let (Some(dn), Some(gp)) = (height.get(flat), gamma.get(flat)) else {
            continue;
        };
        if let Some(weighted) = gp.norm_a2_gamma {
            out.set(flat, (lap + dn + weighted * gp.gamma).abs());
        }
    }
    Ok(out)
}

/// The translator identity for γ, after checking that the data is a translator.
pub fn identity_check(patch: &GraphPatch, spec: &CurvatureSpec, tolerance: f64) -> Result<GridField<f64>> {
    let shape = shape_field(patch)?;
    let gamma = gamma_field(&shape, spec)?;
    let residual = translator_residual(&shape, &gamma);
    if residual.max_abs > tolerance {
        return Err(Error::NotATranslator {
            max_residual: residual.max_abs,
            tolerance,
        });
    }
    identity_residual(&shape, &gamma)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConeMargin {
    pub cone: ConeSpec,
    pub min_margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvexityReport {
    pub min_lambda: f64,
    /// Nodes with smallest curvature below −`negative_threshold`.
    pub negative_count: usize,
    pub negative_threshold: f64,
    pub cone_margins: Vec<ConeMargin>,
    /// min H/|A| over nodes with |A| > 0.
    pub alpha_star_min: Option<f64>,
}

/// Scans smallest curvatures and cone margins. Nodes count as negatively
/// curved when λ_min < −`negative_threshold` (pass about 10h² for FD data).
pub fn convexity_scan(shape: &ShapeField, cones: &[ConeSpec], negative_threshold: f64) -> ConvexityReport {
    let mut min_lambda = f64::INFINITY;
    let mut negative_count = 0;
    let mut alpha_star: Option<f64> = None;
    let mut margins = vec![f64::INFINITY; cones.len()];
    for (_, sp) in shape.iter() {
        let lambda = sp.lambda();
        let lo = lambda.min();
        min_lambda = min_lambda.min(lo);
        if lo < -negative_threshold {
            negative_count += 1;
        }
        let norm = lambda.norm();
        if norm > 0.0 {
            let a = lambda.mean_curvature() / norm;
            alpha_star = Some(alpha_star.map_or(a, |m| m.min(a)));
        }
        for (m, cone) in margins.iter_mut().zip(cones) {
            *m = m.min(cone_contains(cone, lambda.values()).margin);
        }
    }
    ConvexityReport {
        min_lambda: if min_lambda.is_finite() { min_lambda } else { 0.0 },
        negative_count,
        negative_threshold,
        cone_margins: cones
            .iter()
            .zip(margins)
            .map(|(cone, m)| ConeMargin {
                cone: *cone,
                min_margin: if m.is_finite() { m } else { 0.0 },
            })
            .collect(),
        alpha_star_min: alpha_star,
    }
}

/// Scalar fields built from ordered curvatures and γ.
#[derive(Debug, Clone)]
pub struct SxFields {
    /// γ/λ_max, dimension 2 only, where λ_max ≠ 0.
    pub h: Option<GridField<f64>>,
    /// λ_min/γ where γ > 0.
    pub j: GridField<f64>,
    /// f(j).
    pub g: GridField<f64>,
    /// f̃(γ/(H − λ_min)) where H − λ_min > 0.
    pub gtilde: GridField<f64>,
}

pub fn sx_fields(shape: &ShapeField, gamma: &GammaField) -> SxFields {
    let grid = shape.grid().clone();
    let two_dimensional = grid.n() == 2;
    let mut h = GridField::empty(grid.clone());
    let mut j = GridField::empty(grid.clone());
    let mut g = GridField::empty(grid.clone());
    let mut gtilde = GridField::empty(grid);
    for (flat, gp) in gamma.iter() {
        let Some(sp) = shape.get(flat) else { continue };
        let lambda = sp.lambda();
        let (lo, hi) = (lambda.min(), lambda.max());
        if two_dimensional && hi != 0.0 {
            h.set(flat, gp.gamma / hi);
        }
        if gp.gamma > 0.0 {
            let jv = lo / gp.gamma;
            j.set(flat, jv);
            g.set(flat, cutoff(jv));
        }
        let rest = lambda.mean_curvature() - lo;
        if rest > 0.0 {
            gtilde.set(flat, cutoff_shifted(gp.gamma / rest));
        }
    }
    SxFields {
        h: two_dimensional.then_some(h),
        j,
        g,
        gtilde,
    }
}

#[derive(Debug, Clone)]
pub struct AwRatio {
    /// |A|²/γ² where γ > 0.
    pub field: GridField<f64>,
    /// Nodes whose value is at least that of all 3ⁿ − 1 neighbours (weakly).
    pub local_maxima: Vec<usize>,
}

pub fn aw_ratio(shape: &ShapeField, gamma: &GammaField) -> AwRatio {
    let mut field = GridField::empty(shape.grid().clone());
    for (flat, gp) in gamma.iter() {
        if let (Some(sp), true) = (shape.get(flat), gp.gamma > 0.0) {
            field.set(flat, sp.norm_a2() / (gp.gamma * gp.gamma));
        }
    }
    let local_maxima = local_maxima(&field);
    AwRatio { field, local_maxima }
}

/// Offsets of the 3ⁿ − 1 neighbours of a node, as (axis, step) lists.
fn neighbour_offsets(n: usize) -> Vec<Vec<(usize, isize)>> {
    let mut out = Vec::new();
    for code in 0..3usize.pow(n as u32) {
        let mut c = code;
        let mut steps = Vec::new();
        for axis in 0..n {
            let s = (c % 3) as isize - 1;
            c /= 3;
            if s != 0 {
                steps.push((axis, s));
            }
        }
        if !steps.is_empty() {
            out.push(steps);
        }
    }
    out
}

/// Nodes with every neighbour defined and no neighbour larger beyond a
/// relative plateau tolerance.
pub fn local_maxima(field: &GridField<f64>) -> Vec<usize> {
    let grid = field.grid();
    let offsets = neighbour_offsets(grid.n());
    field
        .iter()
        .filter(|(flat, &v)| {
            offsets.iter().all(|steps| {
                let mut idx = Some(*flat);
                for &(axis, s) in steps {
                    idx = idx.and_then(|i| grid.offset(i, axis, s));
                }
                match idx.and_then(|i| field.get(i)) {
                    Some(&nb) => v >= nb - PLATEAU_TOLERANCE * v.abs().max(1.0),
                    None => false,
                }
            })
        })
        .map(|(flat, _)| flat)
        .collect()
}

/// Q² = ‖γ∇A − ∇γ ⊗ A‖²_γ = Σ_a ∂γ/∂λ_a Σ_{b,c} (γ (∇_a A)_{bc} − ∇_aγ · A_{bc})²,
/// in the principal frame, with covariant ∇A and ∇_aγ = Σ_b ∂γ/∂λ_b (∇_a A)_{bb}.
///
/// Defined on nodes at least [`Q_SQUARED_MARGIN`] cells inside where the
/// γ-gradient is finite.
pub fn q_squared_field(patch: &GraphPatch, shape: &ShapeField, gamma: &GammaField) -> Result<GridField<f64>> {
    let grid = patch.grid();
    for axis in 0..grid.n() {
        let points = grid.points()[axis];
        if points < 2 * Q_SQUARED_MARGIN + 1 {
            return Err(Error::DegenerateGrid {
                axis,
                points,
                required: 2 * Q_SQUARED_MARGIN + 1,
            });
        }
    }
    let n = grid.n();
    let get = stencil::dense(patch.u());
    let mut out = GridField::empty(grid.clone());
    for (flat, sp) in shape.iter() {
        if !grid.is_interior(flat, Q_SQUARED_MARGIN) {
            continue;
        }
        let Some(gp) = gamma.get(flat) else { continue };
        let Some(dgamma) = gp.dgamma.as_ref() else { continue };
        let third = stencil::third_tensor(grid, &get, flat).expect("interior node");
        let du = sp.du();
        let d2u = sp.d2u();
        let w = sp.w();
        let a = sp.second_form();
        let w_grad: Vec<f64> = (0..n)
            .map(|k| (0..n).map(|l| du[l] * d2u[(l, k)]).sum::<f64>() / w)
            .collect();
        // coordinate ∇_k A_ij
        let mut nabla_a = vec![DMatrix::zeros(n, n); n];
        for (k, m) in nabla_a.iter_mut().enumerate() {
            for i in 0..n {
                for j in 0..n {
                    let partial = third[i * n * n + j * n + k] / w - d2u[(i, j)] * w_grad[k] / (w * w);
                    let correction: f64 = (0..n)
                        .map(|l| sp.christoffel(l, k, i) * a[(l, j)] + sp.christoffel(l, k, j) * a[(i, l)])
                        .sum();
                    m[(i, j)] = partial - correction;
                }
            }
        }
        // principal frame: T[a][b][c] = Σ V_ia V_jb V_kc ∇_i A_jk
        let v = sp.coordinate_frame();
        let framed: Vec<DMatrix<f64>> = (0..n)
            .map(|fa| {
                let mut directional = DMatrix::zeros(n, n);
                for (i, m) in nabla_a.iter().enumerate() {
                    directional += m * v[(i, fa)];
                }
                sp.in_frame(&directional)
            })
            .collect();
        let lambda = sp.lambda().values();
        let mut total = 0.0;
        for fa in 0..n {
            let grad_gamma: f64 = (0..n).map(|b| dgamma[b] * framed[fa][(b, b)]).sum();
            let mut inner = 0.0;
            for b in 0..n {
                for c in 0..n {
                    let a_bc = if b == c { lambda[b] } else { 0.0 };
                    let term = gp.gamma * framed[fa][(b, c)] - grad_gamma * a_bc;
                    inner += term * term;
                }
            }
            total += dgamma[fa] * inner;
        }
        out.set(flat, total);
    }
    Ok(out)
}

/// ⟨ν, e_i⟩ for every horizontal axis i.
pub fn angle_fields(shape: &ShapeField) -> Vec<GridField<f64>> {
    (0..shape.grid().n())
        .map(|i| shape.scalar(|sp| sp.angle(i)))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Branch {
    #[serde(rename = "strictly convex")]
    StrictlyConvex,
    #[serde(rename = "grim-reaper-like")]
    GrimReaperLike,
    #[serde(rename = "inconclusive")]
    Inconclusive,
}

impl std::fmt::Display for Branch {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Branch::StrictlyConvex => "strictly convex",
            Branch::GrimReaperLike => "grim-reaper-like",
            Branch::Inconclusive => "inconclusive",
        })
    }
}

/// Thresholds of the verdict; `None` picks a multiple of h² (h = largest spacing).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DichotomyOptions {
    pub residual_tolerance: Option<f64>,
    /// Strict convexity needs min λ > θ; default 10h².
    pub theta: Option<f64>,
    /// Allowed spread of |A|²/γ²; default 10h².
    pub aw_tolerance: Option<f64>,
    /// Allowed max Q²; default 100h².
    pub q2_tolerance: Option<f64>,
    /// Angles below this count as vanishing; default 10h².
    pub angle_tolerance: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DichotomyEvidence {
    pub max_residual: f64,
    pub residual_tolerance: f64,
    pub min_lambda: f64,
    pub theta: f64,
    /// Nodes where exactly one curvature exceeds θ in absolute value, out of all nodes.
    pub single_curvature_nodes: usize,
    pub nodes: usize,
    pub aw_ratio_min: Option<f64>,
    pub aw_ratio_max: Option<f64>,
    pub aw_tolerance: f64,
    pub max_q_squared: Option<f64>,
    pub q2_tolerance: f64,
    /// max |⟨ν, e_i⟩| per horizontal axis.
    pub max_angles: Vec<f64>,
    pub vanishing_angles: usize,
    pub angle_tolerance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DichotomyReport {
    pub branch: Branch,
    pub evidence: DichotomyEvidence,
}

/// Decides whether translator data looks strictly convex or like a Grim Reaper cylinder.
pub fn dichotomy_report(
    patch: &GraphPatch,
    shape: &ShapeField,
    gamma: &GammaField,
    options: DichotomyOptions,
) -> Result<DichotomyReport> {
    let h = patch.grid().max_spacing();
    let residual_tolerance = options.residual_tolerance.unwrap_or(DEFAULT_TRANSLATOR_TOLERANCE);
    let theta = options.theta.unwrap_or(10.0 * h * h);
    let aw_tolerance = options.aw_tolerance.unwrap_or(10.0 * h * h);
    let q2_tolerance = options.q2_tolerance.unwrap_or(100.0 * h * h);
    let angle_tolerance = options.angle_tolerance.unwrap_or(10.0 * h * h);

    let residual = translator_residual(shape, gamma);
    if residual.max_abs > residual_tolerance {
        return Err(Error::NotATranslator {
            max_residual: residual.max_abs,
            tolerance: residual_tolerance,
        });
    }
    let n = patch.grid().n();
    let mut min_lambda = f64::INFINITY;
    let mut single = 0;
    for (_, sp) in shape.iter() {
        min_lambda = min_lambda.min(sp.lambda().min());
        if sp.lambda().values().iter().filter(|l| l.abs() > theta).count() == 1 {
            single += 1;
        }
    }
    let aw = aw_ratio(shape, gamma);
    let q2 = match q_squared_field(patch, shape, gamma) {
        Ok(f) => f.max(),
        Err(Error::DegenerateGrid { .. }) => None,
        Err(e) => return Err(e),
    };
    let max_angles: Vec<f64> = angle_fields(shape).iter().map(GridField::max_abs).collect();
    let vanishing = max_angles.iter().filter(|a| **a <= angle_tolerance).count();

    let evidence = DichotomyEvidence {
        max_residual: residual.max_abs,
        residual_tolerance,
        min_lambda: if min_lambda.is_finite() { min_lambda } else { 0.0 },
        theta,
        single_curvature_nodes: single,
        nodes: shape.len(),
        aw_ratio_min: aw.field.min(),
        aw_ratio_max: aw.field.max(),
        aw_tolerance,
        max_q_squared: q2,
        q2_tolerance,
        max_angles,
        vanishing_angles: vanishing,
        angle_tolerance,
    };

    let grim_like = evidence.nodes > 0
        && single == evidence.nodes
        && matches!((evidence.aw_ratio_min, evidence.aw_ratio_max), (Some(lo), Some(hi)) if hi - lo <= aw_tolerance)
        && q2.is_some_and(|q| q <= q2_tolerance)
        && vanishing + 2 >= n;
    let branch = if evidence.nodes > 0 && evidence.min_lambda > theta {
        Branch::StrictlyConvex
    } else if grim_like {
        Branch::GrimReaperLike
    } else {
        Branch::Inconclusive
    };
    Ok(DichotomyReport { branch, evidence })
}

/// Every diagnostic field on one patch, as written by the field dump.
#[derive(Debug, Clone)]
pub struct DiagnosticsFields {
    pub shape: ShapeField,
    pub gamma: GammaField,
    pub residual: GridField<f64>,
    pub sx: SxFields,
    pub aw_ratio: GridField<f64>,
    pub q_squared: GridField<f64>,
    pub angles: Vec<GridField<f64>>,
    pub identity_residual: GridField<f64>,
}

/// Computes all fields; fields that cannot be formed at a node are left undefined.
pub fn diagnostics_fields(patch: &GraphPatch, spec: &CurvatureSpec) -> Result<DiagnosticsFields> {
    let shape = shape_field(patch)?;
    let gamma = gamma_field(&shape, spec)?;
    let residual = translator_residual(&shape, &gamma).field;
    let sx = sx_fields(&shape, &gamma);
    let aw = aw_ratio(&shape, &gamma).field;
    let q_squared = match q_squared_field(patch, &shape, &gamma) {
        Ok(f) => f,
        Err(Error::DegenerateGrid { .. }) => GridField::empty(patch.grid().clone()),
        Err(e) => return Err(e),
    };
    let angles = angle_fields(&shape);
    let identity = match identity_residual(&shape, &gamma) {
        Ok(f) => f,
        Err(Error::AtGridPoint { .. }) => GridField::empty(patch.grid().clone()),
        Err(e) => return Err(e),
    };
    Ok(DiagnosticsFields {
        shape,
        gamma,
        residual,
        sx,
        aw_ratio: aw,
        q_squared,
        angles,
        identity_residual: identity,
    })
}
