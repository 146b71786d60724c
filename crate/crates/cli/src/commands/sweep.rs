//! `sweep`: run a base command over a parameter grid with a bounded worker
//! pool. Cells are fully isolated (own directory, own files); the index is
//! written once by the coordinator, so output is identical for any worker
//! count.

use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::Serialize;

use super::{Provenance, Summary};
use crate::config::RunConfig;
use crate::outputs::Bundle;
use crate::{CliError, Invocation};

#[derive(Serialize)]
struct SweepResults {
    cells: usize,
    succeeded: usize,
    failed: usize,
    files: Vec<String>,
}

struct CellPlan {
    index: usize,
    /// `(path, value-as-toml-literal)` pairs.
    assignments: Vec<(String, String)>,
    dir: PathBuf,
}

struct CellOutcome {
    index: usize,
    assignments: Vec<(String, String)>,
    status: String,
    dir: String,
    /// Flattened numeric results from the cell's summary.
    scalars: Vec<(String, f64)>,
}

fn toml_literal(v: &toml::Value) -> String {
    match v {
        toml::Value::String(s) => format!("\"{s}\""),
        other => other.to_string(),
    }
}

/// Recursively flattens numeric leaves of a JSON value into dotted keys.
fn flatten_numbers(prefix: &str, value: &serde_json::Value, out: &mut Vec<(String, f64)>) {
    match value {
        serde_json::Value::Number(n) => {
            if let Some(f) = n.as_f64() {
                out.push((prefix.to_string(), f));
            }
        }
        serde_json::Value::Object(map) => {
            for (k, v) in map {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten_numbers(&key, v, out);
            }
        }
        _ => {}
    }
}

pub fn run(inv: &Invocation) -> Result<(), CliError> {
    let sweep = inv
        .config
        .sweep
        .as_ref()
        .ok_or_else(|| CliError::config("sweep: missing [sweep] section"))?;
    match sweep.command.as_str() {
        "bands" | "masses" | "error-map" | "fidelity-map" | "propagate" | "scatter" => {}
        other => return Err(CliError::config(format!("sweep.command: unsupported '{other}'"))),
    }
    if sweep.params.is_empty() || sweep.params.iter().any(|p| p.values.is_empty()) {
        return Err(CliError::config("sweep: every parameter needs at least one value"));
    }

    // Cartesian product, first parameter slowest.
    let dims: Vec<usize> = sweep.params.iter().map(|p| p.values.len()).collect();
    let total: usize = dims.iter().product();
    let bundle = Bundle::create(&inv.out_dir)?;
    let mut plans = Vec::with_capacity(total);
    for index in 0..total {
        let mut rem = index;
        let mut assignments = Vec::with_capacity(dims.len());
        for (axis, param) in sweep.params.iter().enumerate().rev() {
            let v = rem % dims[axis];
            rem /= dims[axis];
            assignments.push((param.path.clone(), toml_literal(&param.values[v])));
        }
        assignments.reverse();
        plans.push(CellPlan {
            index,
            assignments,
            dir: inv.out_dir.join("cells").join(format!("cell_{index:04}")),
        });
    }

    let command = sweep.command.clone();
    let next = AtomicUsize::new(0);
    let outcomes: Mutex<Vec<Option<CellOutcome>>> =
        Mutex::new((0..total).map(|_| None).collect());
    let workers = inv.parallel.min(total).max(1);

    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= total {
                    break;
                }
                let plan = &plans[i];
                let outcome = run_cell(inv, &command, plan);
                outcomes.lock().unwrap()[i] = Some(outcome);
            });
        }
    });

    let outcomes: Vec<CellOutcome> =
        outcomes.into_inner().unwrap().into_iter().map(|c| c.unwrap()).collect();
    let succeeded = outcomes.iter().filter(|c| c.status == "ok").count();

    // index.csv: one row per cell in cell order.
    let param_cols: Vec<String> = sweep.params.iter().map(|p| p.path.clone()).collect();
    let header = format!("cell,{},status,dir", param_cols.join(","));
    let mut files = Vec::new();
    files.push(
        bundle
            .write_csv(
                "index.csv",
                &header,
                outcomes.iter().map(|c| {
                    let values: Vec<String> =
                        c.assignments.iter().map(|(_, v)| v.replace(',', ";")).collect();
                    format!("{},{},{},{}", c.index, values.join(","), c.status, c.dir)
                }),
            )?
            .display()
            .to_string(),
    );

    // aggregate.csv: the union of numeric summary leaves across cells.
    let mut keys: Vec<String> = Vec::new();
    for c in &outcomes {
        for (k, _) in &c.scalars {
            if !keys.contains(k) {
                keys.push(k.clone());
            }
        }
    }
    keys.sort();
    let agg_header = format!("cell,{},{}", param_cols.join(","), keys.join(","));
    files.push(
        bundle
            .write_csv(
                "aggregate.csv",
                &agg_header,
                outcomes.iter().map(|c| {
                    let values: Vec<String> =
                        c.assignments.iter().map(|(_, v)| v.replace(',', ";")).collect();
                    let cells: Vec<String> = keys
                        .iter()
                        .map(|k| {
                            c.scalars
                                .iter()
                                .find(|(kk, _)| kk == k)
                                .map(|(_, v)| crate::outputs::num(*v))
                                .unwrap_or_default()
                        })
                        .collect();
                    format!("{},{},{}", c.index, values.join(","), cells.join(","))
                }),
            )?
            .display()
            .to_string(),
    );

    let results = SweepResults {
        cells: total,
        succeeded,
        failed: total - succeeded,
        files,
    };
    let summary =
        Summary { command: "sweep", config: &inv.config, results: &results, provenance: Provenance::new() };
    bundle.write_json("summary.json", &summary)?;
    bundle.write_text("config.resolved.toml", &inv.config.to_toml_string())?;

    if succeeded == 0 {
        return Err(CliError::numeric("sweep: every cell failed (see index.csv)"));
    }
    Ok(())
}

fn run_cell(inv: &Invocation, command: &str, plan: &CellPlan) -> CellOutcome {
    let mut overrides = inv.overrides.clone();
    overrides.extend(plan.assignments.iter().cloned());
    let dir_display = plan.dir.display().to_string();

    let result = RunConfig::from_toml(&inv.config_text, &overrides).and_then(|config| {
        run_command(command, &config, &plan.dir)
    });
    let (status, scalars) = match result {
        Ok(scalars) => ("ok".to_string(), scalars),
        Err(e) => (format!("error: {e}").replace(',', ";").replace('\n', " "), Vec::new()),
    };
    CellOutcome {
        index: plan.index,
        assignments: plan.assignments.clone(),
        status,
        dir: dir_display,
        scalars,
    }
}

/// Runs one non-sweep command and flattens its summary numbers.
pub fn run_command(
    command: &str,
    config: &RunConfig,
    dir: &Path,
) -> Result<Vec<(String, f64)>, CliError> {
    fn scalars_of<T: Serialize>(value: &T) -> Vec<(String, f64)> {
        let json = serde_json::to_value(value).unwrap_or(serde_json::Value::Null);
        let mut out = Vec::new();
        flatten_numbers("", &json, &mut out);
        out
    }
    match command {
        "bands" => super::bands::run(config, dir).map(|r| scalars_of(&r)),
        "masses" => super::masses::run(config, dir).map(|r| scalars_of(&r)),
        "error-map" => super::maps::run_error_map(config, dir).map(|r| scalars_of(&r)),
        "fidelity-map" => super::maps::run_fidelity_map(config, dir).map(|r| scalars_of(&r)),
        "propagate" => super::propagate::run(config, dir).map(|r| scalars_of(&r)),
        "scatter" => super::scatter::run(config, dir).map(|r| {
            // Keep the aggregate row compact: scalar outcomes only.
            let mut out = scalars_of(&ScatterScalarView::from(&r));
            out.sort_by(|a, b| a.0.cmp(&b.0));
            out
        }),
        other => Err(CliError::config(format!("unsupported command '{other}'"))),
    }
}

#[derive(Serialize)]
struct ScatterScalarView {
    r_total: f64,
    t_total: f64,
    residual: f64,
    final_inversion: f64,
    final_time: f64,
    reflected_momentum_centroid: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    hole_center: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    hole_width: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    min_lower_population: Option<f64>,
}

impl From<&super::scatter::ScatterResults> for ScatterScalarView {
    fn from(r: &super::scatter::ScatterResults) -> Self {
        Self {
            r_total: r.report.r_total,
            t_total: r.report.t_total,
            residual: r.report.residual,
            final_inversion: r.report.final_inversion,
            final_time: r.report.final_time,
            reflected_momentum_centroid: r.report.reflected_momentum_centroid,
            hole_center: r.report.hole.map(|h| h.center),
            hole_width: r.report.hole.map(|h| h.width),
            min_lower_population: r.transparency.as_ref().map(|t| t.min_lower_population),
        }
    }
}
