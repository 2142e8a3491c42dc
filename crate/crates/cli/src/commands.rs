use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};

use translab::curvature::{classify_with_seed, Classification};
use translab::diagnostics::{diagnostics_fields, dichotomy_report, identity_check, translator_residual, DichotomyOptions};
use translab::exact::{grim_patch, GrimSpec};
use translab::flow::{run, self_similarity_error, DtPolicy, FlowBoundary, FlowConfig};
use translab::geometry::{exact_shape_field, gamma_field, shape_field, GraphPatch, Grid};
use translab::io::{
    read_patch_csv, write_field_dump_csv, write_patch_csv, write_profile_csv, write_scalar_field_csv,
    write_time_series_csv, write_verdict_json,
};
use translab::profile::{bowl_tip_curvature, profile_to_patch, shoot_bowl};
use translab::{Error, Result};

use crate::curvature_arg::{json_dimension, parse_curvature};
use crate::{
    BowlArgs, Cli, CliError, Command, DiagnoseArgs, FlowArgs, GammaAction, GammaCheckArgs, GrimArgs, IdentityArgs,
    PatchArgs,
};

/// What a command prints on success: a human line and the same facts as JSON.
pub struct Summary {
    pub text: String,
    pub record: Value,
}

pub fn dispatch(cli: &Cli) -> std::result::Result<Summary, CliError> {
    let out = Artifacts::new(&cli.out_dir);
    Ok(match &cli.command {
        Command::Gamma {
            action: GammaAction::Check(args),
        } => return gamma_check(args),
        Command::Grim(args) => grim(args, &out)?,
        Command::Bowl(args) => bowl(args, &out)?,
        Command::Flow(args) => flow(args, &out)?,
        Command::Residual(args) => residual(args, &out)?,
        Command::Identity(args) => identity(args, &out)?,
        Command::Diagnose(args) => diagnose(args, &out)?,
    })
}

struct Artifacts<'a> {
    dir: &'a Path,
}

impl<'a> Artifacts<'a> {
    fn new(dir: &'a Path) -> Self {
        Self { dir }
    }

    /// Creates `name` in the output directory, creating the directory on first use.
    fn create(&self, name: &str) -> Result<(PathBuf, BufWriter<File>)> {
        fs::create_dir_all(self.dir)?;
        let path = self.dir.join(name);
        let file = File::create(&path)?;
        Ok((path, BufWriter::new(file)))
    }
}

fn sci(v: f64) -> String {
    format!("{v:.3e}")
}

fn read_patch(path: &Path) -> Result<GraphPatch> {
    let file = File::open(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    read_patch_csv(std::io::BufReader::new(file))
}

fn gamma_check(args: &GammaCheckArgs) -> std::result::Result<Summary, CliError> {
    let n = json_dimension(&args.spec).unwrap_or(args.n);
    let spec = parse_curvature(&args.spec, n)?;
    if let Some(unknown) = args.required.iter().find(|r| !Classification::PROPERTY_NAMES.contains(&r.as_str())) {
        return Err(Error::InvalidConfig(format!(
            "unknown property '{unknown}'; expected one of {}",
            Classification::PROPERTY_NAMES.join(", ")
        ))
        .into());
    }
    let c = classify_with_seed(&spec, args.samples, args.seed);
    let failed: Vec<String> = args
        .required
        .iter()
        .filter(|name| c.property(name).is_some_and(|p| !p.holds))
        .cloned()
        .collect();
    let record = json!({
        "spec": spec.to_json_value(),
        "classification": c,
        "required": args.required,
        "failed": failed,
    });
    let text = serde_json::to_string_pretty(&record).map_err(Error::from)?;
    if !failed.is_empty() {
        println!("{text}");
        return Err(CliError::PropertyFailed(failed));
    }
    Ok(Summary { text, record })
}

fn grim(args: &GrimArgs, out: &Artifacts) -> Result<Summary> {
    if args.res < 2 {
        return Err(Error::InvalidConfig(format!("--res must be at least 2, got {}", args.res)));
    }
    let spec = parse_curvature(&args.spec, args.n)?;
    let g = GrimSpec::new(args.omega, args.n)?;
    let (lo, hi) = g.admissible_range();
    let h = (hi - lo) / (args.res - 1) as f64;
    let patch = grim_patch(&g, g.grid(h, args.cylinder_points)?)?;
    let exact = exact_shape_field(&patch)?;
    let analytic = translator_residual(&exact, &gamma_field(&exact, &spec)?);
    let fd_shape = shape_field(&patch)?;
    let discrete = translator_residual(&fd_shape, &gamma_field(&fd_shape, &spec)?);

    let (path, file) = out.create("grim.csv")?;
    write_patch_csv(file, &patch, &spec)?;
    Ok(Summary {
        text: format!(
            "grim: {spec}, omega {}, {} nodes, h {}: max residual {} (finite differences {}) -> {}",
            args.omega,
            patch.grid().len(),
            sci(h),
            sci(analytic.max_abs),
            sci(discrete.max_abs),
            path.display()
        ),
        record: json!({
            "command": "grim",
            "spec": spec.to_json_value(),
            "omega": args.omega,
            "h": h,
            "nodes": patch.grid().len(),
            "max_residual": analytic.max_abs,
            "max_residual_fd": discrete.max_abs,
            "artifacts": [path],
        }),
    })
}

fn bowl(args: &BowlArgs, out: &Artifacts) -> Result<Summary> {
    let spec = parse_curvature(&args.spec, args.n)?;
    let profile = shoot_bowl(&spec, args.r_max, args.step)?;
    let residual = profile
        .translator_residuals(&spec)?
        .into_iter()
        .fold(0.0f64, |m, r| m.max(r.abs()));
    let tip = bowl_tip_curvature(&spec)?;
    let (profile_path, file) = out.create("bowl_profile.csv")?;
    write_profile_csv(file, &profile)?;

    let e = args.patch_extent;
    let grid = Grid::uniform(&vec![-e; args.n], &vec![e; args.n], args.patch_h)?;
    let patch = profile_to_patch(&profile, grid)?;
    let (patch_path, file) = out.create("bowl_patch.csv")?;
    write_patch_csv(file, &patch, &spec)?;
    Ok(Summary {
        text: format!(
            "bowl: {spec}, r_max {}: max profile residual {}, tip curvature {} -> {}, {}",
            args.r_max,
            sci(residual),
            tip,
            profile_path.display(),
            patch_path.display()
        ),
        record: json!({
            "command": "bowl",
            "spec": spec.to_json_value(),
            "r_max": args.r_max,
            "profile_points": profile.len(),
            "max_residual": residual,
            "tip_curvature": tip,
            "artifacts": [profile_path, patch_path],
        }),
    })
}

fn flow(args: &FlowArgs, out: &Artifacts) -> Result<Summary> {
    let (patch, boundary) = match &args.input {
        Some(path) => (read_patch(path)?, FlowBoundary::Frozen),
        None => {
            let g = GrimSpec::new(args.omega, args.n)?;
            let cylinder_points = if args.n > 1 { 9 } else { 1 };
            (grim_patch(&g, g.grid(args.h, cylinder_points)?)?, FlowBoundary::PinnedToExactTranslate)
        }
    };
    let spec = parse_curvature(&args.spec, patch.n())?;
    let policy = match args.dt {
        Some(dt) => DtPolicy::Fixed(dt),
        None => DtPolicy::Cfl { safety: args.cfl },
    };
    let result = run(&patch, &FlowConfig::new(spec.clone(), policy, args.final_time, boundary))?;
    let error = self_similarity_error(&result);

    let (series_path, file) = out.create("flow_series.csv")?;
    write_time_series_csv(file, &result.series)?;
    let (final_path, file) = out.create("flow_final.csv")?;
    write_patch_csv(file, &result.final_patch, &spec)?;
    Ok(Summary {
        text: format!(
            "flow: {spec}, T {}, {} steps (dt {} to {}): self-similarity error {} -> {}, {}",
            result.final_time(),
            result.steps,
            sci(result.min_dt),
            sci(result.max_dt),
            sci(error),
            series_path.display(),
            final_path.display()
        ),
        record: json!({
            "command": "flow",
            "spec": spec.to_json_value(),
            "final_time": result.final_time(),
            "steps": result.steps,
            "min_dt": result.min_dt,
            "max_dt": result.max_dt,
            "self_similarity_error": error,
            "artifacts": [series_path, final_path],
        }),
    })
}

fn residual(args: &PatchArgs, out: &Artifacts) -> Result<Summary> {
    let patch = read_patch(&args.input)?;
    let spec = parse_curvature(&args.spec, patch.n())?;
    let shape = shape_field(&patch)?;
    let report = translator_residual(&shape, &gamma_field(&shape, &spec)?);
    let (path, file) = out.create("residual.csv")?;
    write_scalar_field_csv(file, "residual", &report.field)?;
    if let Some(tolerance) = args.tolerance {
        if !(report.max_abs <= tolerance) {
            return Err(Error::NotATranslator {
                max_residual: report.max_abs,
                tolerance,
            });
        }
    }
    Ok(Summary {
        text: format!(
            "residual: {spec}: max residual {}, mean {} -> {}",
            sci(report.max_abs),
            sci(report.mean_abs),
            path.display()
        ),
        record: json!({
            "command": "residual",
            "spec": spec.to_json_value(),
            "max_residual": report.max_abs,
            "mean_residual": report.mean_abs,
            "artifacts": [path],
        }),
    })
}

fn identity(args: &IdentityArgs, out: &Artifacts) -> Result<Summary> {
    let patch = read_patch(&args.input)?;
    let spec = parse_curvature(&args.spec, patch.n())?;
    let field = identity_check(&patch, &spec, args.tolerance)?;
    let (path, file) = out.create("identity.csv")?;
    write_scalar_field_csv(file, "identity_residual", &field)?;
    Ok(Summary {
        text: format!(
            "identity: {spec}: max identity residual {} over {} nodes -> {}",
            sci(field.max_abs()),
            field.defined_count(),
            path.display()
        ),
        record: json!({
            "command": "identity",
            "spec": spec.to_json_value(),
            "max_identity_residual": field.max_abs(),
            "nodes": field.defined_count(),
            "artifacts": [path],
        }),
    })
}

fn diagnose(args: &DiagnoseArgs, out: &Artifacts) -> Result<Summary> {
    let patch = read_patch(&args.input)?;
    let spec = parse_curvature(&args.spec, patch.n())?;
    let shape = shape_field(&patch)?;
    let gamma = gamma_field(&shape, &spec)?;
    let options = DichotomyOptions {
        residual_tolerance: args.residual_tolerance,
        theta: args.theta,
        ..DichotomyOptions::default()
    };
    let report = dichotomy_report(&patch, &shape, &gamma, options)?;
    let fields = diagnostics_fields(&patch, &spec)?;
    let (fields_path, file) = out.create("fields.csv")?;
    write_field_dump_csv(file, &fields)?;
    let (verdict_path, file) = out.create("verdict.json")?;
    write_verdict_json(file, &report)?;
    Ok(Summary {
        text: format!(
            "diagnose: {spec}: verdict {} (min lambda {}, max residual {}) -> {}, {}",
            report.branch,
            sci(report.evidence.min_lambda),
            sci(report.evidence.max_residual),
            fields_path.display(),
            verdict_path.display()
        ),
        record: json!({
            "command": "diagnose",
            "spec": spec.to_json_value(),
            "verdict": report,
            "artifacts": [fields_path, verdict_path],
        }),
    })
}
