//! One-dimensional translator profiles: the Grim Reaper IVP and radial bowls.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::DMatrix;

use crate::curvature::{closure_gradient, cone_contains, eval_gamma, CurvatureSpec, EigenvalueVector};
use crate::error::{Error, Result};
use crate::geometry::{AnalyticGraph, GraphPatch, Grid};

/// Local error tolerance of the step-doubling monitor, relative to 1 + |y|.
pub const DEFAULT_LOCAL_TOLERANCE: f64 = 1e-9;
/// Looser monitor for bowls, whose slope grows linearly in r.
pub const BOWL_LOCAL_TOLERANCE: f64 = 1e-8;
/// Integration of the Grim IVP stops before |u'| passes this value.
pub const SLOPE_LIMIT: f64 = 1e6;
/// Absolute tolerance of the u'' root solve.
pub const ROOT_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum ProfileKind {
    /// u(x) of a Grim Reaper cross-section, x ≥ 0 from the axis of symmetry.
    Grim,
    /// u(r) of a rotationally symmetric graph, r ≥ 0 from the tip.
    Bowl,
}

/// Principal curvatures along a profile: the one in the profile plane first,
/// then the (n−1)-fold repeated transverse one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileCurvature {
    pub primary: f64,
    pub transverse: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StepStats {
    pub steps: usize,
    pub max_error_estimate: f64,
    pub root_solves: usize,
}

/// A solved profile with derivatives and curvature data at every node.
#[derive(Debug, Clone)]
pub struct ProfileSolution {
    kind: ProfileKind,
    abscissa: Vec<f64>,
    u: Vec<f64>,
    du: Vec<f64>,
    d2u: Vec<f64>,
    curvatures: Vec<ProfileCurvature>,
    spec: Option<CurvatureSpec>,
    tilt: f64,
    step: f64,
    stats: StepStats,
}

impl ProfileSolution {
    pub fn kind(&self) -> ProfileKind {
        self.kind
    }

    pub fn abscissa(&self) -> &[f64] {
        &self.abscissa
    }

    pub fn u(&self) -> &[f64] {
        &self.u
    }

    pub fn du(&self) -> &[f64] {
        &self.du
    }

    pub fn d2u(&self) -> &[f64] {
        &self.d2u
    }

    pub fn curvatures(&self) -> &[ProfileCurvature] {
        &self.curvatures
    }

    pub fn spec(&self) -> Option<&CurvatureSpec> {
        self.spec.as_ref()
    }

    /// Tilt a of a Grim profile; zero for bowls.
    pub fn tilt(&self) -> f64 {
        self.tilt
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn stats(&self) -> StepStats {
        self.stats
    }

    pub fn len(&self) -> usize {
        self.abscissa.len()
    }

    pub fn is_empty(&self) -> bool {
        self.abscissa.is_empty()
    }

    pub fn end(&self) -> f64 {
        *self.abscissa.last().expect("profiles have at least one node")
    }

    /// Principal curvatures at node `i` of the n-dimensional hypersurface.
    pub fn eigenvalues(&self, i: usize, n: usize) -> EigenvalueVector {
        let c = self.curvatures[i];
        let mut v = vec![c.transverse; n];
        v[0] = c.primary;
        EigenvalueVector::new(v)
    }

    /// ⟨ν, e_{n+1}⟩ = 1/W at node `i`.
    pub fn height_angle(&self, i: usize) -> f64 {
        1.0 / (1.0 + self.tilt * self.tilt + self.du[i] * self.du[i]).sqrt()
    }

    /// γ(λ) − ⟨ν, e_{n+1}⟩ at every node.
    pub fn translator_residuals(&self, spec: &CurvatureSpec) -> Result<Vec<f64>> {
        (0..self.len())
            .map(|i| Ok(eval_gamma(spec, self.eigenvalues(i, spec.n()).values())? - self.height_angle(i)))
            .collect()
    }

    /// Cubic Hermite interpolation of (u, u') at `x`.
    pub fn interpolate(&self, x: f64) -> Result<(f64, f64)> {
        let (i, t, h) = self.locate(x)?;
        let (t2, t3) = (t * t, t * t * t);
        let (y0, y1, m0, m1) = (self.u[i], self.u[i + 1], self.du[i], self.du[i + 1]);
        let value = (2.0 * t3 - 3.0 * t2 + 1.0) * y0
            + (t3 - 2.0 * t2 + t) * h * m0
            + (-2.0 * t3 + 3.0 * t2) * y1
            + (t3 - t2) * h * m1;
        // the slope is interpolated from (u', u'') to keep it third-order
        let (s0, s1) = (self.d2u[i], self.d2u[i + 1]);
        let slope = (2.0 * t3 - 3.0 * t2 + 1.0) * m0
            + (t3 - 2.0 * t2 + t) * h * s0
            + (-2.0 * t3 + 3.0 * t2) * m1
            + (t3 - t2) * h * s1;
        Ok((value, slope))
    }

    /// u'' at `x`, linear between nodes.
    pub fn interpolate_second(&self, x: f64) -> Result<f64> {
        let (i, t, _) = self.locate(x)?;
        Ok((1.0 - t) * self.d2u[i] + t * self.d2u[i + 1])
    }

    fn locate(&self, x: f64) -> Result<(usize, f64, f64)> {
        let (lo, hi) = (self.abscissa[0], self.end());
        if !(x >= lo && x <= hi) || self.len() < 2 {
            return Err(Error::InterpolationRange { value: x, min: lo, max: hi });
        }
        let i = self.abscissa.partition_point(|&a| a <= x).clamp(1, self.len() - 1) - 1;
        let h = self.abscissa[i + 1] - self.abscissa[i];
        Ok((i, (x - self.abscissa[i]) / h, h))
    }
}

fn rk4<F>(f: &F, x: f64, y: [f64; 2], h: f64) -> Result<[f64; 2]>
where
    F: Fn(f64, [f64; 2]) -> Result<[f64; 2]>,
{
    let add = |y: [f64; 2], k: [f64; 2], s: f64| [y[0] + s * k[0], y[1] + s * k[1]];
    let k1 = f(x, y)?;
    let k2 = f(x + 0.5 * h, add(y, k1, 0.5 * h))?;
    let k3 = f(x + 0.5 * h, add(y, k2, 0.5 * h))?;
    let k4 = f(x + h, add(y, k3, h))?;
    Ok([
        y[0] + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
        y[1] + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
    ])
}

/// One full step, two half steps; returns the half-step result and the
/// Richardson estimate of its local error relative to 1 + |y|.
fn monitored_step<F>(f: &F, x: f64, y: [f64; 2], h: f64) -> Result<([f64; 2], f64)>
where
    F: Fn(f64, [f64; 2]) -> Result<[f64; 2]>,
{
    let full = rk4(f, x, y, h)?;
    let mid = rk4(f, x, y, 0.5 * h)?;
    let half = rk4(f, x + 0.5 * h, mid, 0.5 * h)?;
    let estimate = (0..2)
        .map(|k| (half[k] - full[k]).abs() / 15.0 / (1.0 + half[k].abs()))
        .fold(0.0, f64::max);
    Ok((half, estimate))
}

/// Options for [`solve_grim_ivp_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrimIvpOptions {
    /// Integrate to exactly this abscissa; an oversized local error is then an error.
    /// Without it, integration halts at the first oversized error or slope.
    pub x_end: Option<f64>,
    pub tolerance: f64,
}

impl Default for GrimIvpOptions {
    fn default() -> Self {
        Self {
            x_end: None,
            tolerance: DEFAULT_LOCAL_TOLERANCE,
        }
    }
}

/// (1 + a²) u'' = 1 + a² + u'², u(0) = h₀, u'(0) = 0, integrated for x ≥ 0
/// until the profile approaches its vertical asymptote.
pub fn solve_grim_ivp(tilt: f64, height: f64, step: f64) -> Result<ProfileSolution> {
    solve_grim_ivp_with(tilt, height, step, GrimIvpOptions::default())
}

pub fn solve_grim_ivp_with(
    tilt: f64,
    height: f64,
    step: f64,
    options: GrimIvpOptions,
) -> Result<ProfileSolution> {
    if !(step.is_finite() && step > 0.0) {
        return Err(Error::InvalidConfig(format!("step must be positive, got {step}")));
    }
    if !(tilt.is_finite() && tilt >= 0.0) {
        return Err(Error::InvalidConfig(format!("tilt must be non-negative, got {tilt}")));
    }
    let b2 = 1.0 + tilt * tilt;
    let asymptote = b2.sqrt() * PI / 2.0;
    if let Some(end) = options.x_end {
        if !(end > 0.0 && end < asymptote) {
            return Err(Error::InvalidConfig(format!(
                "x_end = {end} must lie in (0, {asymptote})"
            )));
        }
    }
    let rhs = |_x: f64, y: [f64; 2]| Ok([y[1], (b2 + y[1] * y[1]) / b2]);
    // λ = (1 + a²)·u''/W³ with W² = 1 + a² + u'²
    let curvature = |p: f64| {
        let w2 = b2 + p * p;
        let q = (b2 + p * p) / b2;
        ProfileCurvature {
            primary: b2 * q / (w2 * w2.sqrt()),
            transverse: 0.0,
        }
    };

    let mut sol = ProfileSolution {
        kind: ProfileKind::Grim,
        abscissa: vec![0.0],
        u: vec![height],
        du: vec![0.0],
        d2u: vec![1.0],
        curvatures: vec![curvature(0.0)],
        spec: None,
        tilt,
        step,
        stats: StepStats::default(),
    };
    let mut x = 0.0;
    let mut y = [height, 0.0];
    loop {
        let h = match options.x_end {
            Some(end) if x >= end - 1e-12 * step => break,
            Some(end) => step.min(end - x),
            None => step,
        };
        let (next, estimate) = monitored_step(&rhs, x, y, h)?;
        if estimate > options.tolerance || !next[1].is_finite() {
            if options.x_end.is_some() {
                return Err(Error::StepTooLarge {
                    x,
                    estimate,
                    tolerance: options.tolerance,
                });
            }
            break;
        }
        if options.x_end.is_none() && next[1].abs() > SLOPE_LIMIT {
            break;
        }
        x = match options.x_end {
            Some(end) if h < step => end,
            _ => x + h,
        };
        y = next;
        sol.stats.steps += 1;
        sol.stats.max_error_estimate = sol.stats.max_error_estimate.max(estimate);
        sol.abscissa.push(x);
        sol.u.push(y[0]);
        sol.du.push(y[1]);
        sol.d2u.push((b2 + y[1] * y[1]) / b2);
        sol.curvatures.push(curvature(y[1]));
    }
    if sol.len() < 2 {
        return Err(Error::StepTooLarge {
            x: 0.0,
            estimate: f64::INFINITY,
            tolerance: options.tolerance,
        });
    }
    Ok(sol)
}

/// Radial curvatures of a graph u(r) with slope p and second derivative q.
fn radial_curvatures(r: f64, p: f64, q: f64) -> ProfileCurvature {
    let w = (1.0 + p * p).sqrt();
    ProfileCurvature {
        primary: q / (w * w * w),
        transverse: p / (r * w),
    }
}

fn radial_lambda(n: usize, c: ProfileCurvature) -> Vec<f64> {
    let mut v = vec![c.transverse; n];
    v[0] = c.primary;
    v
}

/// Solves γ(q/W³, p/(rW), …) = 1/W for q = u''.
///
/// γ is increasing in its first argument, so the root is unique. Points
/// whose λ leaves the closure of the cone count as lying below the root.
fn solve_second_derivative(spec: &CurvatureSpec, r: f64, p: f64) -> Result<f64> {
    let n = spec.n();
    let w = (1.0 + p * p).sqrt();
    let target = 1.0 / w;
    let residual = |q: f64| -> f64 {
        match eval_gamma(spec, &radial_lambda(n, radial_curvatures(r, p, q))) {
            Ok(g) => g - target,
            Err(_) => -target - 1.0,
        }
    };

    let (mut lo, mut hi) = (0.0, 1.0);
    if residual(lo) > 0.0 {
        lo = -1.0;
        let mut tries = 0;
        while residual(lo) > 0.0 {
            tries += 1;
            if tries > 80 {
                return Err(Error::RootBracketFailure { r, lo, hi: 0.0 });
            }
            lo *= 2.0;
        }
        hi = lo / 2.0;
        if residual(hi) < 0.0 {
            hi = 0.0;
        }
    } else {
        let mut tries = 0;
        while residual(hi) < 0.0 {
            tries += 1;
            if tries > 80 {
                return Err(Error::RootBracketFailure { r, lo, hi });
            }
            lo = hi;
            hi *= 2.0;
        }
    }

    let mut iterations = 0;
    while hi - lo > ROOT_TOLERANCE * hi.abs().max(1.0) && iterations < 200 {
        let mid = 0.5 * (lo + hi);
        if residual(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        iterations += 1;
    }
    let mut q = 0.5 * (lo + hi);
    // Newton polish, kept inside the bracket
    for _ in 0..3 {
        let lambda = radial_lambda(n, radial_curvatures(r, p, q));
        let Ok(Some(grad)) = closure_gradient(spec, &lambda) else {
            break;
        };
        let slope = grad[0] / (w * w * w);
        if !(slope > 0.0) {
            break;
        }
        let next = q - residual(q) / slope;
        if !(next >= lo && next <= hi) {
            break;
        }
        q = next;
    }
    Ok(q)
}

/// Tip curvature c = 1/γ(1, …, 1) of the bowl, where λ_rad = λ_tan = c.
pub fn bowl_tip_curvature(spec: &CurvatureSpec) -> Result<f64> {
    let g = eval_gamma(spec, &vec![1.0; spec.n()])?;
    if !(g > 0.0) {
        return Err(Error::InvalidSpec(format!("{spec} vanishes on the diagonal")));
    }
    Ok(1.0 / g)
}

/// Shoots the rotationally symmetric translator γ(λ) = 1/W from its tip out to `r_max`.
///
/// The first step uses the series u = c r²/2 at r = `step`; afterwards u'' is
/// recovered at every stage by a bracketed root solve.
pub fn shoot_bowl(spec: &CurvatureSpec, r_max: f64, step: f64) -> Result<ProfileSolution> {
    let n = spec.n();
    if n < 2 {
        return Err(Error::InvalidConfig("bowl profiles need dimension n >= 2".into()));
    }
    if !(step.is_finite() && step > 0.0) {
        return Err(Error::InvalidConfig(format!("step must be positive, got {step}")));
    }
    if !(r_max.is_finite() && r_max > 2.0 * step) {
        return Err(Error::InvalidConfig(format!(
            "r_max = {r_max} must exceed two steps of {step}"
        )));
    }
    let cone = spec.cone();
    if !cone_contains(&cone, &vec![1.0; n]).interior() {
        return Err(Error::InvalidSpec(format!(
            "the cone of {spec} does not contain the positive diagonal"
        )));
    }
    let c = bowl_tip_curvature(spec)?;

    let root_solves = std::cell::Cell::new(0usize);
    let rhs = |r: f64, y: [f64; 2]| -> Result<[f64; 2]> {
        root_solves.set(root_solves.get() + 1);
        Ok([y[1], solve_second_derivative(spec, r, y[1])?])
    };
    let tip = ProfileCurvature {
        primary: c,
        transverse: c,
    };
    let mut sol = ProfileSolution {
        kind: ProfileKind::Bowl,
        abscissa: vec![0.0],
        u: vec![0.0],
        du: vec![0.0],
        d2u: vec![c],
        curvatures: vec![tip],
        spec: Some(spec.clone()),
        tilt: 0.0,
        step,
        stats: StepStats::default(),
    };

    let push = |sol: &mut ProfileSolution, r: f64, y: [f64; 2]| -> Result<()> {
        let q = solve_second_derivative(spec, r, y[1])?;
        let curv = radial_curvatures(r, y[1], q);
        let lambda = radial_lambda(n, curv);
        if !cone_contains(&cone, &lambda).in_closure() {
            return Err(Error::ConeExit {
                location: format!("r = {r}"),
                lambda,
                cone: cone.to_string(),
            });
        }
        sol.abscissa.push(r);
        sol.u.push(y[0]);
        sol.du.push(y[1]);
        sol.d2u.push(q);
        sol.curvatures.push(curv);
        Ok(())
    };

    let mut r = step;
    let mut y = [0.5 * c * step * step, c * step];
    push(&mut sol, r, y)?;
    while r < r_max - 1e-12 * step {
        let h = step.min(r_max - r);
        let (next, estimate) = monitored_step(&rhs, r, y, h)?;
        if estimate > BOWL_LOCAL_TOLERANCE {
            return Err(Error::StepTooLarge {
                x: r,
                estimate,
                tolerance: BOWL_LOCAL_TOLERANCE,
            });
        }
        r = if h < step { r_max } else { r + h };
        y = next;
        sol.stats.steps += 1;
        sol.stats.max_error_estimate = sol.stats.max_error_estimate.max(estimate);
        push(&mut sol, r, y)?;
    }
    sol.stats.root_solves = root_solves.get() + sol.len() - 1;
    Ok(sol)
}

/// A profile extended to an n-dimensional graph, with derivatives from the
/// interpolated profile.
#[derive(Debug, Clone)]
pub struct ProfileGraph {
    profile: Arc<ProfileSolution>,
    n: usize,
}

impl ProfileGraph {
    pub fn new(profile: ProfileSolution, n: usize) -> Result<Self> {
        if n == 0 || (profile.kind == ProfileKind::Bowl && n < 2) {
            return Err(Error::InvalidConfig(format!(
                "cannot extend a {:?} profile to dimension {n}",
                profile.kind
            )));
        }
        if profile.kind == ProfileKind::Grim && n == 1 && profile.tilt != 0.0 {
            return Err(Error::InvalidConfig("a tilted Grim profile needs n >= 2".into()));
        }
        Ok(Self {
            profile: Arc::new(profile),
            n,
        })
    }

    pub fn profile(&self) -> &ProfileSolution {
        &self.profile
    }

    /// Centre of the slab (0, ω) for Grim profiles, ω = π√(1 + a²).
    pub fn slab_center(&self) -> f64 {
        0.5 * PI * (1.0 + self.profile.tilt.powi(2)).sqrt()
    }

    fn check(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.n {
            return Err(Error::Domain(format!(
                "point has {} coordinates, expected {}",
                x.len(),
                self.n
            )));
        }
        Ok(())
    }
}

impl AnalyticGraph for ProfileGraph {
    fn n(&self) -> usize {
        self.n
    }

    fn height(&self, x: &[f64]) -> Result<f64> {
        self.check(x)?;
        match self.profile.kind {
            ProfileKind::Grim => {
                let s = x[0] - self.slab_center();
                let tilt = if self.n > 1 { self.profile.tilt * x[self.n - 1] } else { 0.0 };
                Ok(self.profile.interpolate(s.abs())?.0 + tilt)
            }
            ProfileKind::Bowl => {
                let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
                Ok(self.profile.interpolate(r)?.0)
            }
        }
    }

    fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check(x)?;
        let mut g = vec![0.0; self.n];
        match self.profile.kind {
            ProfileKind::Grim => {
                let s = x[0] - self.slab_center();
                g[0] = s.signum() * self.profile.interpolate(s.abs())?.1;
                if self.n > 1 {
                    g[self.n - 1] = self.profile.tilt;
                }
            }
            ProfileKind::Bowl => {
                let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
                if r > 0.0 {
                    let p = self.profile.interpolate(r)?.1;
                    for (gi, xi) in g.iter_mut().zip(x) {
                        *gi = p * xi / r;
                    }
                }
            }
        }
        Ok(g)
    }

    fn hessian(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        self.check(x)?;
        let n = self.n;
        match self.profile.kind {
            ProfileKind::Grim => {
                let s = x[0] - self.slab_center();
                let mut h = DMatrix::zeros(n, n);
                h[(0, 0)] = self.profile.interpolate_second(s.abs())?;
                Ok(h)
            }
            ProfileKind::Bowl => {
                let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
                let q = self.profile.interpolate_second(r)?;
                if r == 0.0 {
                    return Ok(DMatrix::from_diagonal_element(n, n, q));
                }
                let p = self.profile.interpolate(r)?.1;
                // q·x̂x̂ᵀ + (p/r)(I − x̂x̂ᵀ)
                Ok(DMatrix::from_fn(n, n, |i, j| {
                    let radial = x[i] * x[j] / (r * r);
                    let id = if i == j { 1.0 } else { 0.0 };
                    q * radial + p / r * (id - radial)
                }))
            }
        }
    }
}

/// Extends a profile over `grid`: Grim profiles cylindrically across the slab
/// (0, π√(1+a²)) with the tilt along x_n, bowls by revolution about the origin.
pub fn profile_to_patch(sol: &ProfileSolution, grid: Grid) -> Result<GraphPatch> {
    let graph = ProfileGraph::new(sol.clone(), grid.n())?;
    GraphPatch::from_analytic(grid, Arc::new(graph))
}
