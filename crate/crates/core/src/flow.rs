//! Explicit time stepping of the graphical γ-flow ∂u/∂t = W·γ(λ).
//!
//! Nodes one cell or more inside the grid are advanced by the scheme; the
//! outer ring follows the boundary policy. All statistics and errors are
//! taken over the advanced nodes.

use crate::curvature::{closure_gradient, cone_contains, eval_gamma, ConeSpec, CurvatureSpec};
use crate::error::{Error, Result};
use crate::geometry::{principal_curvatures, stencil, GraphPatch};

/// Nodes advanced by the scheme lie at least this many cells inside.
pub const FLOW_MARGIN: usize = 1;
/// One step may not grow max |u| by more than this factor.
pub const INSTABILITY_GROWTH: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DtPolicy {
    Fixed(f64),
    /// Δt = safety · min(h)² / (4 · max Σ_a ∂γ/∂λ_a), re-evaluated every step.
    Cfl { safety: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FlowBoundary {
    /// Outer ring set to the analytic initial heights lifted by the elapsed time.
    PinnedToExactTranslate,
    /// Outer ring keeps its values.
    Frozen,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowConfig {
    pub spec: CurvatureSpec,
    pub dt_policy: DtPolicy,
    pub final_time: f64,
    pub boundary: FlowBoundary,
    /// Keep every k-th state for [`cone_trace`]; the final state is always kept.
    pub snapshot_every: usize,
}

impl FlowConfig {
    pub fn new(spec: CurvatureSpec, dt_policy: DtPolicy, final_time: f64, boundary: FlowBoundary) -> Self {
        Self {
            spec,
            dt_policy,
            final_time,
            boundary,
            snapshot_every: 10,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self.dt_policy {
            DtPolicy::Fixed(dt) if !(dt.is_finite() && dt > 0.0) => {
                return Err(Error::InvalidConfig(format!("time step must be positive, got {dt}")))
            }
            DtPolicy::Cfl { safety } if !(safety > 0.0 && safety <= 1.0) => {
                return Err(Error::InvalidConfig(format!("CFL safety must lie in (0, 1], got {safety}")))
            }
            _ => {}
        }
        if !(self.final_time.is_finite() && self.final_time >= 0.0) {
            return Err(Error::InvalidConfig(format!(
                "final time must be non-negative, got {}",
                self.final_time
            )));
        }
        if self.snapshot_every == 0 {
            return Err(Error::InvalidConfig("snapshot interval must be at least 1".into()));
        }
        Ok(())
    }
}

/// Diagnostics of one state of the flow.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct FlowSample {
    pub t: f64,
    /// max |γ(λ) − ⟨ν, e_{n+1}⟩|.
    pub max_residual: f64,
    pub min_cone_margin: f64,
    pub max_abs_u: f64,
}

/// The normal speed W·γ(λ) at every advanced node of a patch.
#[derive(Debug, Clone)]
pub struct SpeedField {
    pub nodes: Vec<usize>,
    pub speed: Vec<f64>,
    /// max Σ_a ∂γ/∂λ_a over nodes where the gradient is finite.
    pub max_ellipticity: Option<f64>,
    pub sample: FlowSample,
}

/// Evaluates W·γ(λ) on the advanced nodes, failing at the first node whose
/// curvatures leave the closure of the cone.
pub fn speed_field(patch: &GraphPatch, spec: &CurvatureSpec, t: f64) -> Result<SpeedField> {
    let grid = patch.grid();
    if spec.n() != grid.n() {
        return Err(Error::Domain(format!(
            "curvature function has dimension {}, patch has {}",
            spec.n(),
            grid.n()
        )));
    }
    let cone = spec.cone();
    let get = stencil::dense(patch.u());
    let nodes = grid.interior(FLOW_MARGIN);
    let mut speed = Vec::with_capacity(nodes.len());
    let mut max_ellipticity: Option<f64> = None;
    let mut max_residual: f64 = 0.0;
    let mut min_margin = f64::INFINITY;
    for &flat in &nodes {
        let du = stencil::gradient(grid, &get, flat).expect("advanced nodes have neighbours");
        let d2u = stencil::hessian(grid, &get, flat).expect("advanced nodes have neighbours");
        let lambda = principal_curvatures(&du, &d2u);
        let membership = cone_contains(&cone, &lambda);
        if !membership.in_closure() {
            return Err(Error::ConeExit {
                location: format!("node {:?}, x = {:?}", grid.multi_index(flat), grid.coordinate(flat)),
                lambda,
                cone: cone.to_string(),
            });
        }
        min_margin = min_margin.min(membership.margin);
        let gamma = eval_gamma(spec, &lambda)?;
        let w = (1.0 + du.iter().map(|d| d * d).sum::<f64>()).sqrt();
        max_residual = max_residual.max((gamma - 1.0 / w).abs());
        if let Some(g) = closure_gradient(spec, &lambda)? {
            let total: f64 = g.iter().sum();
            max_ellipticity = Some(max_ellipticity.map_or(total, |m| m.max(total)));
        }
        speed.push(w * gamma);
    }
    Ok(SpeedField {
        nodes,
        speed,
        max_ellipticity,
        sample: FlowSample {
            t,
            max_residual,
            min_cone_margin: if min_margin.is_finite() { min_margin } else { 0.0 },
            max_abs_u: patch.max_abs(),
        },
    })
}

/// The time step the policy allows for the current state.
pub fn time_step(patch: &GraphPatch, config: &FlowConfig, speed: &SpeedField) -> Result<f64> {
    match config.dt_policy {
        DtPolicy::Fixed(dt) => Ok(dt),
        DtPolicy::Cfl { safety } => {
            let h = patch.grid().min_spacing();
            let e = speed.max_ellipticity.ok_or_else(|| {
                Error::InvalidConfig("CFL step undefined: no node has a finite γ-gradient".into())
            })?;
            // a flat patch has zero speed; any step is stable
            let e = if e > 0.0 { e } else { 1.0 };
            Ok(safety * h * h / (4.0 * e))
        }
    }
}

/// u ← u + Δt·W·γ(λ) on the advanced nodes; the outer ring per `boundary`.
///
/// `t` is the time of the current state; pinned boundaries are set to the
/// analytic initial heights plus t + Δt.
pub fn step(patch: &GraphPatch, config: &FlowConfig, t: f64, dt: f64) -> Result<GraphPatch> {
    let speed = speed_field(patch, &config.spec, t)?;
    advance(patch, config, &speed, t, dt)
}

fn advance(patch: &GraphPatch, config: &FlowConfig, speed: &SpeedField, t: f64, dt: f64) -> Result<GraphPatch> {
    let grid = patch.grid();
    let mut u = patch.u().to_vec();
    for (&flat, v) in speed.nodes.iter().zip(&speed.speed) {
        u[flat] += dt * v;
    }
    if config.boundary == FlowBoundary::PinnedToExactTranslate {
        let source = patch.source().ok_or_else(|| {
            Error::InvalidConfig("pinned boundaries need a patch with an analytic source".into())
        })?;
        for flat in (0..grid.len()).filter(|&f| !grid.is_interior(f, FLOW_MARGIN)) {
            u[flat] = source.height(&grid.coordinate(flat))? + t + dt;
        }
    }
    let old = patch.max_abs();
    let new = u.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if !new.is_finite() || (old > 0.0 && new > INSTABILITY_GROWTH * old) {
        return Err(Error::Instability {
            growth: if old > 0.0 { new / old } else { f64::INFINITY },
        });
    }
    patch.with_values(u)
}

#[derive(Debug, Clone)]
pub struct FlowRun {
    pub initial: GraphPatch,
    pub final_patch: GraphPatch,
    /// One sample per state, strictly increasing in t, ending at the final time.
    pub series: Vec<FlowSample>,
    /// (t, heights) of retained states.
    pub snapshots: Vec<(f64, Vec<f64>)>,
    pub steps: usize,
    pub min_dt: f64,
    pub max_dt: f64,
}

impl FlowRun {
    pub fn final_time(&self) -> f64 {
        self.series.last().map_or(0.0, |s| s.t)
    }
}

/// Steps from t = 0 to the final time; the last step is shortened to land on it.
pub fn run(patch: &GraphPatch, config: &FlowConfig) -> Result<FlowRun> {
    config.validate()?;
    if config.boundary == FlowBoundary::PinnedToExactTranslate && patch.source().is_none() {
        return Err(Error::InvalidConfig(
            "pinned boundaries need a patch with an analytic source".into(),
        ));
    }
    let fail = |t: f64| move |e: Error| Error::FlowFailure { t, source: Box::new(e) };
    let total = config.final_time;
    let mut current = patch.clone();
    let mut t = 0.0;
    let mut series = Vec::new();
    let mut snapshots = vec![(0.0, patch.u().to_vec())];
    let (mut min_dt, mut max_dt) = (f64::INFINITY, 0.0f64);
    let mut steps = 0;
    loop {
        let speed = speed_field(&current, &config.spec, t).map_err(fail(t))?;
        series.push(speed.sample);
        if t >= total {
            break;
        }
        let mut dt = time_step(&current, config, &speed).map_err(fail(t))?;
        let last = t + dt >= total * (1.0 - 1e-14);
        if last {
            dt = total - t;
        }
        current = advance(&current, config, &speed, t, dt).map_err(fail(t))?;
        t = if last { total } else { t + dt };
        steps += 1;
        min_dt = min_dt.min(dt);
        max_dt = max_dt.max(dt);
        if last || steps % config.snapshot_every == 0 {
            snapshots.push((t, current.u().to_vec()));
        }
    }
    Ok(FlowRun {
        initial: patch.clone(),
        final_patch: current,
        series,
        snapshots,
        steps,
        min_dt: if steps > 0 { min_dt } else { 0.0 },
        max_dt,
    })
}

/// max over advanced nodes of |u(·, T) − u(·, 0) − T|.
pub fn self_similarity_error(run: &FlowRun) -> f64 {
    let grid = run.initial.grid();
    let t = run.final_time();
    grid.interior(FLOW_MARGIN)
        .into_iter()
        .map(|f| (run.final_patch.u()[f] - run.initial.u()[f] - t).abs())
        .fold(0.0, f64::max)
}

/// Minimum cone margin over the advanced nodes at every retained state.
///
/// Observational: discrete flows need not preserve cones exactly.
pub fn cone_trace(run: &FlowRun, cone: &ConeSpec) -> Vec<(f64, f64)> {
    let grid = run.initial.grid();
    let nodes = grid.interior(FLOW_MARGIN);
    run.snapshots
        .iter()
        .map(|(t, u)| {
            let get = stencil::dense(u);
            let margin = nodes
                .iter()
                .map(|&flat| {
                    let du = stencil::gradient(grid, &get, flat).expect("interior node");
                    let d2u = stencil::hessian(grid, &get, flat).expect("interior node");
                    cone_contains(cone, &principal_curvatures(&du, &d2u)).margin
                })
                .fold(f64::INFINITY, f64::min);
            (*t, if margin.is_finite() { margin } else { 0.0 })
        })
        .collect()
}
