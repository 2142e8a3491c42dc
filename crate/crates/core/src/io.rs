//! CSV and JSON artifacts. Numbers use `{:.16e}` (17 significant digits), so
//! every f64 survives a write/read cycle bit for bit. Undefined values are empty cells.

use std::io::{Read, Write};

use crate::curvature::{eval_gamma, CurvatureSpec};
use crate::diagnostics::{DiagnosticsFields, DichotomyReport};
use crate::error::{Error, Result};
use crate::flow::FlowSample;
use crate::geometry::{shape_field, BoundaryPolicy, GraphPatch, Grid, GridField};
use crate::profile::ProfileSolution;

pub fn format_number(v: f64) -> String {
    format!("{v:.16e}")
}

fn cell(v: Option<f64>) -> String {
    v.map(format_number).unwrap_or_default()
}

fn field_cell(f: &GridField<f64>, flat: usize) -> String {
    cell(f.get(flat).copied())
}

pub fn patch_header(n: usize) -> Vec<String> {
    let mut h: Vec<String> = (1..=n).map(|i| format!("x{i}")).collect();
    h.push("u".into());
    h.extend((1..=n).map(|i| format!("lambda_{i}")));
    h.extend(["H", "normA2", "gamma"].map(String::from));
    h
}

/// One row per node; curvature columns are empty where the stencil does not reach
/// and `gamma` is empty where λ leaves the cone closure.
pub fn write_patch_csv<W: Write>(out: W, patch: &GraphPatch, spec: &CurvatureSpec) -> Result<()> {
    let n = patch.n();
    let shape = shape_field(patch)?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(patch_header(n))?;
    for flat in 0..patch.grid().len() {
        let mut row: Vec<String> = patch.grid().coordinate(flat).into_iter().map(format_number).collect();
        row.push(format_number(patch.u()[flat]));
        match shape.get(flat) {
            Some(sp) => {
                let lambda = sp.lambda().values();
                row.extend(lambda.iter().copied().map(format_number));
                row.push(format_number(sp.mean_curvature()));
                row.push(format_number(sp.norm_a2()));
                row.push(cell(eval_gamma(spec, lambda).ok()));
            }
            None => row.extend(std::iter::repeat_n(String::new(), n + 3)),
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

fn parse_number(text: &str, line: usize, column: &str) -> Result<f64> {
    text.trim()
        .parse()
        .map_err(|_| Error::Parse(format!("line {line}, column {column}: '{text}' is not a number")))
}

/// Rebuilds a patch (policy `Clamped`) from the `x1..xn,u` columns of a patch CSV.
/// Rows may come in any order but must fill a tensor grid.
pub fn read_patch_csv<R: Read>(input: R) -> Result<GraphPatch> {
    let mut reader = csv::Reader::from_reader(input);
    let headers = reader.headers()?.clone();
    let n = headers.iter().take_while(|h| h.starts_with('x')).count();
    if n == 0 || headers.get(n) != Some("u") {
        return Err(Error::Parse("expected header x1,…,xn,u,…".into()));
    }
    for (i, h) in headers.iter().take(n).enumerate() {
        if h != format!("x{}", i + 1) {
            return Err(Error::Parse(format!("unexpected column '{h}'")));
        }
    }
    let mut rows = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record?;
        let mut values = Vec::with_capacity(n + 1);
        for c in 0..=n {
            let text = record.get(c).ok_or_else(|| Error::Parse(format!("line {}: short row", line + 2)))?;
            values.push(parse_number(text, line + 2, &headers[c])?);
        }
        rows.push(values);
    }
    let mut axes: Vec<Vec<f64>> = vec![Vec::new(); n];
    for row in &rows {
        for (axis, coords) in axes.iter_mut().enumerate() {
            coords.push(row[axis]);
        }
    }
    for coords in &mut axes {
        coords.sort_by(f64::total_cmp);
        coords.dedup();
    }
    let points: Vec<usize> = axes.iter().map(Vec::len).collect();
    let total: usize = points.iter().product();
    if total != rows.len() {
        return Err(Error::Parse(format!(
            "{} rows do not fill a tensor grid of {points:?} nodes",
            rows.len()
        )));
    }
    let lower: Vec<f64> = axes.iter().map(|c| c[0]).collect();
    let upper: Vec<f64> = axes.iter().map(|c| c[c.len() - 1]).collect();
    let grid = Grid::new(&lower, &upper, &points)?;
    let mut u = vec![f64::NAN; total];
    for row in &rows {
        let index: Vec<usize> = axes
            .iter()
            .zip(row)
            .map(|(coords, x)| coords.binary_search_by(|c| c.total_cmp(x)).expect("coordinate collected above"))
            .collect();
        u[grid.flat_index(&index)] = row[n];
    }
    if u.iter().any(|v| v.is_nan()) {
        return Err(Error::Parse("duplicate grid nodes".into()));
    }
    GraphPatch::from_values(grid, u, BoundaryPolicy::Clamped)
}

pub fn write_profile_csv<W: Write>(out: W, profile: &ProfileSolution) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["r", "u", "du", "lambda_rad", "lambda_tan"])?;
    for i in 0..profile.len() {
        let k = profile.curvatures()[i];
        w.write_record([
            profile.abscissa()[i],
            profile.u()[i],
            profile.du()[i],
            k.primary,
            k.transverse,
        ]
        .map(format_number))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_time_series_csv<W: Write>(out: W, series: &[FlowSample]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["t", "max_residual", "min_cone_margin", "max_abs_u"])?;
    for s in series {
        w.write_record([s.t, s.max_residual, s.min_cone_margin, s.max_abs_u].map(format_number))?;
    }
    w.flush()?;
    Ok(())
}

pub fn field_dump_header(n: usize) -> Vec<String> {
    let mut h: Vec<String> = (1..=n).map(|i| format!("x{i}")).collect();
    h.extend(["residual", "j", "g", "gtilde", "aw_ratio", "q2"].map(String::from));
    h.extend((2..=n).map(|i| format!("angle_{i}")));
    h.push("identity_residual".into());
    h
}

pub fn write_field_dump_csv<W: Write>(out: W, fields: &DiagnosticsFields) -> Result<()> {
    let grid = fields.shape.grid();
    let mut w = csv::Writer::from_writer(out);
    w.write_record(field_dump_header(grid.n()))?;
    for flat in 0..grid.len() {
        let mut row: Vec<String> = grid.coordinate(flat).into_iter().map(format_number).collect();
        for f in [
            &fields.residual,
            &fields.sx.j,
            &fields.sx.g,
            &fields.sx.gtilde,
            &fields.aw_ratio,
            &fields.q_squared,
        ] {
            row.push(field_cell(f, flat));
        }
        for angle in fields.angles.iter().skip(1) {
            row.push(field_cell(angle, flat));
        }
        row.push(field_cell(&fields.identity_residual, flat));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// `x1..xn,<name>` for every node; undefined values are empty cells.
pub fn write_scalar_field_csv<W: Write>(out: W, name: &str, field: &GridField<f64>) -> Result<()> {
    let grid = field.grid();
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<String> = (1..=grid.n()).map(|i| format!("x{i}")).collect();
    header.push(name.into());
    w.write_record(&header)?;
    for flat in 0..grid.len() {
        let mut row: Vec<String> = grid.coordinate(flat).into_iter().map(format_number).collect();
        row.push(field_cell(field, flat));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_verdict_json<W: Write>(mut out: W, report: &DichotomyReport) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, report)?;
    writeln!(out)?;
    Ok(())
}
