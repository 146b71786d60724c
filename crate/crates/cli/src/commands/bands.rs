//! `bands`: dispersion curves over the zone, CSV plus optional SVG with the
//! bare parabolas overlaid.

use std::path::Path;

use serde::Serialize;

use cavityband_core::floquet::{bare_energy, dispersion};

use super::{linspace, Provenance, Summary};
use crate::config::RunConfig;
use crate::outputs::{num, Bundle, LineChart, MarkerShape};
use crate::CliError;

#[derive(Serialize)]
pub struct BandsResults {
    pub k_points: usize,
    pub num_bands: usize,
    pub rows: usize,
    pub files: Vec<String>,
}

pub fn run(config: &RunConfig, out_dir: &Path) -> Result<BandsResults, CliError> {
    let section = config
        .bands
        .as_ref()
        .ok_or_else(|| CliError::config("bands: missing [bands] section"))?;
    let params = config.model_params()?;
    let trunc = config.truncation_spec()?;
    if section.num_bands == 0 || section.num_bands > trunc.n_states() {
        return Err(CliError::config("bands.num_bands outside the truncation window"));
    }
    if section.k_points < 2 {
        return Err(CliError::config("bands.k_points must be at least 2"));
    }

    let k_lo = section.k_min.unwrap_or(-params.q);
    let k_hi = section.k_max.unwrap_or(params.q);
    let k_grid = linspace(k_lo, k_hi, section.k_points);
    let table =
        dispersion(&params, &trunc, &k_grid, section.num_bands).map_err(CliError::numeric)?;

    let bundle = Bundle::create(out_dir)?;
    let mut files = Vec::new();

    let rows = k_grid.iter().enumerate().flat_map(|(i, &k)| {
        let table = &table;
        table.bands.iter().map(move |&b| {
            format!("{},{},{}", num(k), b, num(table.energies[b - 1][i]))
        })
    });
    files.push(bundle.write_csv("bands.csv", "k,band,energy", rows)?.display().to_string());

    if config.output.wants_svg() {
        let mut chart = LineChart {
            title: "dispersion bands",
            x_label: "k",
            y_label: "E",
            series: table
                .bands
                .iter()
                .map(|&b| {
                    let pts: Vec<(f64, f64)> =
                        k_grid.iter().copied().zip(table.energies[b - 1].iter().copied()).collect();
                    (format!("band {b}"), pts)
                })
                .collect(),
            markers: Vec::new(),
        };
        if section.overlay_bare {
            // Bare energies within the plotted window: diamonds for even μ
            // (lower internal state), crosses for odd μ (upper).
            let e_max = table
                .energies
                .iter()
                .flat_map(|row| row.iter().copied())
                .fold(f64::NEG_INFINITY, f64::max);
            let mut even = Vec::new();
            let mut odd = Vec::new();
            for &k in k_grid.iter().step_by((k_grid.len() / 40).max(1)) {
                for mu in -4i32..=4 {
                    let e = bare_energy(mu, k, &params);
                    if e <= e_max {
                        if mu % 2 == 0 {
                            even.push((k, e));
                        } else {
                            odd.push((k, e));
                        }
                    }
                }
            }
            chart.markers.push(("bare even μ".into(), even, MarkerShape::Diamond));
            chart.markers.push(("bare odd μ".into(), odd, MarkerShape::Cross));
        }
        files.push(bundle.write_text("bands.svg", &chart.render())?.display().to_string());
    }

    let results = BandsResults {
        k_points: section.k_points,
        num_bands: section.num_bands,
        rows: section.k_points * section.num_bands,
        files,
    };
    let summary =
        Summary { command: "bands", config, results: &results, provenance: Provenance::new() };
    bundle.write_json("summary.json", &summary)?;
    bundle.write_text("config.resolved.toml", &config.to_toml_string())?;
    Ok(results)
}
