//! Curvature functions on the command line: a JSON object or a shorthand
//! (`mean`, `gauss`, `sigma<k>`, `power<p>`) whose dimension comes from context.

use translab::curvature::CurvatureSpec;
use translab::{Error, Result};

pub fn parse_curvature(text: &str, n: usize) -> Result<CurvatureSpec> {
    let text = text.trim();
    if text.starts_with('{') {
        let spec = CurvatureSpec::from_json(text)?;
        if spec.n() != n {
            return Err(Error::InvalidSpec(format!(
                "curvature dimension {} does not match the data dimension {n}",
                spec.n()
            )));
        }
        return Ok(spec);
    }
    let lower = text.to_ascii_lowercase();
    match lower.as_str() {
        "mean" => CurvatureSpec::mean(n),
        "gauss" => CurvatureSpec::gauss_root(n),
        _ => {
            if let Some(k) = lower.strip_prefix("sigma") {
                let k = k
                    .parse()
                    .map_err(|_| Error::InvalidSpec(format!("'{text}': expected sigma<k> with integer k")))?;
                CurvatureSpec::sigma_k_root(k, n)
            } else if let Some(p) = lower.strip_prefix("power") {
                let p = p
                    .parse()
                    .map_err(|_| Error::InvalidSpec(format!("'{text}': expected power<p> with numeric p")))?;
                CurvatureSpec::power_mean(p, n)
            } else {
                Err(Error::InvalidSpec(format!(
                    "'{text}' is neither a JSON object nor one of mean, gauss, sigma<k>, power<p>"
                )))
            }
        }
    }
}

/// Dimension carried by a JSON spec, if any.
pub fn json_dimension(text: &str) -> Option<usize> {
    let value: serde_json::Value = serde_json::from_str(text.trim()).ok()?;
    value.get("n")?.as_u64().map(|n| n as usize)
}
