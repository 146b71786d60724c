//! `masses`: effective-mass parameters at one point, or over a (g0, Δ) grid.

use std::path::Path;

use serde::Serialize;

use cavityband_core::floquet::{effective_masses, EffectiveMasses};

use super::{range_spec, Provenance, Summary};
use crate::config::RunConfig;
use crate::outputs::{num, Bundle, HeatMap};
use crate::CliError;

#[derive(Serialize)]
pub struct MassesResults {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub point: Option<MassPoint>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridInfo>,
    pub files: Vec<String>,
}

#[derive(Serialize)]
pub struct MassPoint {
    pub k0: f64,
    pub band: usize,
    pub e0: f64,
    pub energy: f64,
    pub v_g: f64,
    pub m0: Option<f64>,
    pub m0_note: &'static str,
    pub m1: Option<f64>,
    pub m2: f64,
}

#[derive(Serialize)]
pub struct GridInfo {
    pub g0_values: Vec<f64>,
    pub delta_values: Vec<f64>,
}

impl From<EffectiveMasses> for MassPoint {
    fn from(m: EffectiveMasses) -> Self {
        Self {
            k0: m.k0,
            band: m.band,
            e0: m.e0,
            energy: m.energy,
            v_g: m.v_g,
            m0: m.m0,
            m0_note: EffectiveMasses::M0_NOTE,
            m1: m.m1,
            m2: m.m2,
        }
    }
}

pub fn run(config: &RunConfig, out_dir: &Path) -> Result<MassesResults, CliError> {
    let section = config
        .masses
        .as_ref()
        .ok_or_else(|| CliError::config("masses: missing [masses] section"))?;
    let trunc = config.truncation_spec()?;
    let base = config.model_params()?;
    if !(section.fd_step > 0.0) {
        return Err(CliError::config("masses.fd_step must be positive"));
    }
    let fd = section.fd_step * base.q;
    let bundle = Bundle::create(out_dir)?;
    let mut files = Vec::new();

    let results = match (section.g0_range, section.delta_range) {
        (None, None) => {
            let m = effective_masses(&base, &trunc, section.k0, section.band, fd)
                .map_err(CliError::numeric)?;
            let point = MassPoint::from(m);
            files.push(bundle.write_json("masses.json", &point)?.display().to_string());
            MassesResults { point: Some(point), grid: None, files: files.clone() }
        }
        (g0r, dr) => {
            let g0s = g0r.map(range_spec).unwrap_or_else(|| vec![base.g0]);
            let deltas = dr.map(range_spec).unwrap_or_else(|| vec![base.delta]);
            let mut rows: Vec<String> = Vec::with_capacity(g0s.len() * deltas.len());
            let mut inv_m2 = vec![vec![0.0f64; g0s.len()]; deltas.len()];
            let mut v_g = vec![vec![0.0f64; g0s.len()]; deltas.len()];
            for (iy, &delta) in deltas.iter().enumerate() {
                for (ix, &g0) in g0s.iter().enumerate() {
                    let mut p = base;
                    p.g0 = g0;
                    p.delta = delta;
                    let m = effective_masses(&p, &trunc, section.k0, section.band, fd)
                        .map_err(CliError::numeric)?;
                    inv_m2[iy][ix] = 1.0 / m.m2;
                    v_g[iy][ix] = m.v_g;
                    rows.push(format!(
                        "{},{},{},{},{},{}",
                        num(g0),
                        num(delta),
                        num(m.energy),
                        num(m.v_g),
                        num(1.0 / m.m2),
                        m.m1.map(num).unwrap_or_else(|| "".into()),
                    ));
                }
            }
            files.push(
                bundle
                    .write_csv("masses_grid.csv", "g0,delta,energy,v_g,inv_m2,m1", rows.into_iter())?
                    .display()
                    .to_string(),
            );
            if config.output.wants_svg() && g0s.len() > 1 && deltas.len() > 1 {
                let hm = HeatMap {
                    title: "1/m2",
                    x_label: "g0",
                    y_label: "delta",
                    xs: &g0s,
                    ys: &deltas,
                    values: &inv_m2,
                };
                files.push(bundle.write_text("inv_m2.svg", &hm.render())?.display().to_string());
                let hv = HeatMap {
                    title: "v_g",
                    x_label: "g0",
                    y_label: "delta",
                    xs: &g0s,
                    ys: &deltas,
                    values: &v_g,
                };
                files.push(bundle.write_text("v_g.svg", &hv.render())?.display().to_string());
            }
            MassesResults {
                point: None,
                grid: Some(GridInfo { g0_values: g0s, delta_values: deltas }),
                files: files.clone(),
            }
        }
    };

    let summary =
        Summary { command: "masses", config, results: &results, provenance: Provenance::new() };
    bundle.write_json("summary.json", &summary)?;
    bundle.write_text("config.resolved.toml", &config.to_toml_string())?;
    Ok(results)
}
