use super::field::GridField;
use super::shape::ShapeField;
use crate::curvature::{closure_gradient, evaluate, CurvatureSpec};
use crate::error::{Error, Result};

/// γ and its first derivatives at one node.
#[derive(Debug, Clone, PartialEq)]
pub struct GammaPoint {
    pub gamma: f64,
    /// ∂γ/∂λ_a in the ascending order of the shape field; `None` where the
    /// boundary extension has no finite gradient.
    pub dgamma: Option<Vec<f64>>,
    /// |A|²_γ = Σ_a ∂γ/∂λ_a · λ_a².
    pub norm_a2_gamma: Option<f64>,
    pub on_boundary: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GammaField {
    spec: CurvatureSpec,
    points: GridField<GammaPoint>,
}

impl GammaField {
    pub fn spec(&self) -> &CurvatureSpec {
        &self.spec
    }

    pub fn get(&self, flat: usize) -> Option<&GammaPoint> {
        self.points.get(flat)
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, &GammaPoint)> + '_ {
        self.points.iter()
    }

    pub fn points(&self) -> &GridField<GammaPoint> {
        &self.points
    }

    pub fn gamma(&self) -> GridField<f64> {
        self.points.map(|p| p.gamma)
    }
}

/// Applies γ pointwise to the principal curvatures of `shape`.
///
/// Fails at the first node (in grid order) whose λ leaves the closure of the cone.
pub fn gamma_field(shape: &ShapeField, spec: &CurvatureSpec) -> Result<GammaField> {
    if spec.n() != shape.grid().n() {
        return Err(Error::Domain(format!(
            "curvature function has dimension {}, surface has {}",
            spec.n(),
            shape.grid().n()
        )));
    }
    let mut points = GridField::empty(shape.grid().clone());
    for (flat, sp) in shape.iter() {
        let lambda = sp.lambda().values();
        let at = |e| Error::at(shape.grid().multi_index(flat), e);
        let value = evaluate(spec, lambda).map_err(at)?;
        let dgamma = closure_gradient(spec, lambda).map_err(at)?;
        let flat_point = lambda.iter().all(|l| *l == 0.0);
        let norm_a2_gamma = match &dgamma {
            _ if flat_point => Some(0.0),
            Some(d) => Some(d.iter().zip(lambda).map(|(g, l)| g * l * l).sum()),
            None => None,
        };
        points.set(
            flat,
            GammaPoint {
                gamma: value.value,
                dgamma,
                norm_a2_gamma,
                on_boundary: value.on_boundary,
            },
        );
    }
    Ok(GammaField {
        spec: spec.clone(),
        points,
    })
}
