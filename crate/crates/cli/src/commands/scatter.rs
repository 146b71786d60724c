//! `scatter`: reflection/transmission scenario runs against the enveloped
//! mode region.

use std::path::Path;

use serde::Serialize;

use cavityband_core::scattering::{
    run_scatter, transparency_run, ScatterError, ScatterReport, ScatterScenario,
};

use super::{Provenance, Summary};
use crate::config::RunConfig;
use crate::outputs::{num, Bundle, LineChart};
use crate::CliError;

#[derive(Serialize)]
pub struct ScatterResults {
    pub report: ScatterReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub transparency: Option<TransparencyExtras>,
    /// Set when the time budget elapsed with residual above the threshold.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
    pub files: Vec<String>,
}

#[derive(Serialize)]
pub struct TransparencyExtras {
    pub min_lower_population: f64,
    pub initial_populations: (f64, f64),
    pub final_populations: (f64, f64),
    pub momentum_recovery_overlap: f64,
    pub transit_time: Option<f64>,
    pub free_transit_time: f64,
}

pub fn build_scenario(config: &RunConfig) -> Result<ScatterScenario, CliError> {
    let grid = config.grid.as_ref().ok_or_else(|| CliError::config("missing [grid] section"))?;
    let state =
        config.state.as_ref().ok_or_else(|| CliError::config("missing [state] section"))?;
    let evolve =
        config.evolve.as_ref().ok_or_else(|| CliError::config("missing [evolve] section"))?;
    let cavity =
        config.cavity.as_ref().ok_or_else(|| CliError::config("missing [cavity] section"))?;
    let section =
        config.scatter.as_ref().ok_or_else(|| CliError::config("missing [scatter] section"))?;
    if cavity.kind != "enveloped" {
        return Err(CliError::config("scatter: cavity.kind must be 'enveloped'"));
    }
    if state.kind != "bare" {
        return Err(CliError::config("scatter: state.kind must be 'bare'"));
    }
    if (grid.x_min + grid.x_max).abs() > 1e-9 * (grid.x_max - grid.x_min) {
        return Err(CliError::config("scatter: grid must be symmetric about x = 0"));
    }
    let scenario = ScatterScenario::new(
        config.model_params()?,
        cavity.x_l.unwrap(),
        cavity.x_e.unwrap(),
        state.k0,
        state.delta_k()?,
        state.x0,
        grid.n_points,
        grid.x_max,
        evolve.dt,
        section.t_max,
    )
    .map_err(|e| match e {
        ScatterError::Wavepacket(w) => crate::map_wavepacket_error(w),
        other => CliError::config(format!("scenario: {other}")),
    })?
    .with_component(state.component()?)
    .with_residual_threshold(section.residual_threshold)
    .with_stride(evolve.stride);
    Ok(scenario)
}

pub fn run(config: &RunConfig, out_dir: &Path) -> Result<ScatterResults, CliError> {
    let scenario = build_scenario(config)?;
    let section = config.scatter.as_ref().expect("checked in build_scenario");

    let (report, transparency) = if section.transparency {
        let t = transparency_run(&scenario).map_err(map_scatter_error)?;
        let extras = TransparencyExtras {
            min_lower_population: t.min_lower_population,
            initial_populations: t.initial_populations,
            final_populations: t.final_populations,
            momentum_recovery_overlap: t.momentum_recovery_overlap,
            transit_time: t.transit_time,
            free_transit_time: t.free_transit_time,
        };
        (t.scatter, Some(extras))
    } else {
        (run_scatter(&scenario).map_err(map_scatter_error)?, None)
    };

    let bundle = Bundle::create(out_dir)?;
    let mut files = Vec::new();

    // Observable series.
    let series = &report.series;
    files.push(
        bundle
            .write_csv(
                "series.csv",
                "t,norm,inversion,mean_x_total,mean_x_lower,var_x_total,var_x_lower",
                (0..series.len()).map(|i| {
                    format!(
                        "{},{},{},{},{},{},{}",
                        num(series.times[i]),
                        num(series.norm[i]),
                        num(series.inversion[i]),
                        num(series.mean_x[i]),
                        num(series.mean_x_lower[i]),
                        num(series.var_x[i]),
                        num(series.var_x_lower[i]),
                    )
                }),
            )?
            .display()
            .to_string(),
    );

    // Region bookkeeping over time.
    files.push(
        bundle
            .write_csv(
                "regions.csv",
                "t,reflected,transmitted,residual",
                report.region_series.iter().map(|r| {
                    format!(
                        "{},{},{},{}",
                        num(r.time),
                        num(r.reflected),
                        num(r.transmitted),
                        num(r.residual)
                    )
                }),
            )?
            .display()
            .to_string(),
    );

    // Final momentum histograms, ascending k, plus the masked transmitted
    // density and incident envelope driving the hole analysis.
    let mut order: Vec<usize> = (0..report.momentum_grid.len()).collect();
    order.sort_by(|&a, &b| {
        report.momentum_grid[a].partial_cmp(&report.momentum_grid[b]).unwrap()
    });
    files.push(
        bundle
            .write_csv(
                "momentum.csv",
                "k,p_plus,p_minus,p_minus_transmitted,incident",
                order.iter().map(|&j| {
                    format!(
                        "{},{},{},{},{}",
                        num(report.momentum_grid[j]),
                        num(report.final_momentum_plus[j]),
                        num(report.final_momentum_minus[j]),
                        num(report.transmitted_momentum_minus[j]),
                        num(report.incident_momentum[j]),
                    )
                }),
            )?
            .display()
            .to_string(),
    );

    if config.output.wants_svg() {
        let chart = LineChart {
            title: "region probabilities and inversion",
            x_label: "t",
            y_label: "probability / inversion",
            series: vec![
                (
                    "reflected".into(),
                    report.region_series.iter().map(|r| (r.time, r.reflected)).collect(),
                ),
                (
                    "transmitted".into(),
                    report.region_series.iter().map(|r| (r.time, r.transmitted)).collect(),
                ),
                (
                    "residual".into(),
                    report.region_series.iter().map(|r| (r.time, r.residual)).collect(),
                ),
                (
                    "inversion".into(),
                    series.times.iter().copied().zip(series.inversion.iter().copied()).collect(),
                ),
            ],
            markers: Vec::new(),
        };
        files.push(bundle.write_text("scatter.svg", &chart.render())?.display().to_string());
    }

    let warning = report.not_cleared_warning.then(|| {
        format!(
            "not cleared: residual {} above threshold {} at the time budget",
            report.residual, scenario.residual_threshold
        )
    });
    let results = ScatterResults { report, transparency, warning, files };
    bundle.write_json("report.json", &results)?;
    let summary =
        Summary { command: "scatter", config, results: &results, provenance: Provenance::new() };
    bundle.write_json("summary.json", &summary)?;
    bundle.write_text("config.resolved.toml", &config.to_toml_string())?;
    Ok(results)
}

fn map_scatter_error(e: ScatterError) -> CliError {
    match e {
        ScatterError::Wavepacket(w) => crate::map_wavepacket_error(w),
        other => CliError::numeric(other),
    }
}
