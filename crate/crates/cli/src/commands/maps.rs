//! `error-map` and `fidelity-map`: scalar diagnostics over a (g0, Δ) grid.

use std::path::Path;

use serde::Serialize;

use cavityband_core::floquet::{fidelity, truncation_error, TruncationSpec};

use super::{range_spec, Provenance, Summary};
use crate::config::RunConfig;
use crate::outputs::{num, Bundle, HeatMap};
use crate::CliError;

#[derive(Serialize)]
pub struct MapResults {
    pub kind: &'static str,
    pub g0_values: Vec<f64>,
    pub delta_values: Vec<f64>,
    pub min: f64,
    pub max: f64,
    pub files: Vec<String>,
}

fn run_grid(
    config: &RunConfig,
    out_dir: &Path,
    kind: &'static str,
    mut cell: impl FnMut(f64, f64) -> Result<f64, CliError>,
) -> Result<MapResults, CliError> {
    let section =
        config.map.as_ref().ok_or_else(|| CliError::config("missing [map] section"))?;
    let g0s = range_spec(section.g0_range);
    let deltas = range_spec(section.delta_range);
    let bundle = Bundle::create(out_dir)?;

    let mut rows = Vec::with_capacity(g0s.len() * deltas.len());
    let mut values = vec![vec![0.0f64; g0s.len()]; deltas.len()];
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for (iy, &delta) in deltas.iter().enumerate() {
        for (ix, &g0) in g0s.iter().enumerate() {
            let v = cell(g0, delta)?;
            values[iy][ix] = v;
            lo = lo.min(v);
            hi = hi.max(v);
            rows.push(format!("{},{},{}", num(g0), num(delta), num(v)));
        }
    }

    let mut files = Vec::new();
    let csv_name = format!("{}.csv", kind.replace('-', "_"));
    files.push(
        bundle.write_csv(&csv_name, "g0,delta,value", rows.into_iter())?.display().to_string(),
    );
    if config.output.wants_svg() && g0s.len() > 1 && deltas.len() > 1 {
        let hm = HeatMap {
            title: kind,
            x_label: "g0",
            y_label: "delta",
            xs: &g0s,
            ys: &deltas,
            values: &values,
        };
        let svg_name = format!("{}.svg", kind.replace('-', "_"));
        files.push(bundle.write_text(&svg_name, &hm.render())?.display().to_string());
    }

    let results = MapResults {
        kind,
        g0_values: g0s,
        delta_values: deltas,
        min: lo,
        max: hi,
        files,
    };
    let summary = Summary { command: kind, config, results: &results, provenance: Provenance::new() };
    bundle.write_json("summary.json", &summary)?;
    bundle.write_text("config.resolved.toml", &config.to_toml_string())?;
    Ok(results)
}

/// Band-1 truncation error of the small window against the reference window.
pub fn run_error_map(config: &RunConfig, out_dir: &Path) -> Result<MapResults, CliError> {
    let section =
        config.map.as_ref().ok_or_else(|| CliError::config("missing [map] section"))?;
    let small = TruncationSpec::new(section.n_small).map_err(CliError::config)?;
    let reference = config.truncation_spec()?;
    let base = config.model_params()?;
    let k = section.k;
    run_grid(config, out_dir, "error-map", move |g0, delta| {
        let mut p = base;
        p.g0 = g0;
        p.delta = delta;
        truncation_error(&p, k, &small, &reference).map_err(CliError::numeric)
    })
}

/// Overlap `F^{ν,μ}(k)` between the dressed and the bare state.
pub fn run_fidelity_map(config: &RunConfig, out_dir: &Path) -> Result<MapResults, CliError> {
    let section =
        config.map.as_ref().ok_or_else(|| CliError::config("missing [map] section"))?;
    let trunc = config.truncation_spec()?;
    let base = config.model_params()?;
    let (k, nu, mu) = (section.k, section.nu, section.mu);
    run_grid(config, out_dir, "fidelity-map", move |g0, delta| {
        let mut p = base;
        p.g0 = g0;
        p.delta = delta;
        fidelity(nu, mu, k, &p, &trunc).map_err(CliError::numeric)
    })
}
