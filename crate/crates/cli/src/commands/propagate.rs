//! `propagate`: build a packet, evolve it, extract transport parameters.

use std::path::Path;

use serde::Serialize;

use cavityband_core::floquet::effective_masses;
use cavityband_core::wavepacket::{
    evolve, extract_group_velocity, extract_m2, init_bare_gaussian, init_dressed_gaussian,
    make_grid, rabi_period, EvolveConfig, ObservableSeries, SpinorField,
};

use super::{Provenance, Summary};
use crate::config::{ExtractSection, RunConfig};
use crate::outputs::{num, Bundle, HeatMap};
use crate::{map_wavepacket_error, CliError};

#[derive(Serialize)]
pub struct PropagateResults {
    pub final_time: f64,
    pub final_norm: f64,
    pub final_inversion: f64,
    pub final_mean_x: f64,
    pub final_var_x: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub v_g: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub v_g_floquet: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m2: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_eff: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m2_floquet: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rabi_period: Option<f64>,
    pub files: Vec<String>,
}

pub fn build_state(config: &RunConfig) -> Result<SpinorField, CliError> {
    let grid_section =
        config.grid.as_ref().ok_or_else(|| CliError::config("missing [grid] section"))?;
    let state_section =
        config.state.as_ref().ok_or_else(|| CliError::config("missing [state] section"))?;
    let grid = make_grid(grid_section.n_points, grid_section.x_min, grid_section.x_max)
        .map_err(CliError::numeric)?;
    let params = config.model_params()?;
    let delta_k = state_section.delta_k()?;
    match state_section.kind.as_str() {
        "bare" => init_bare_gaussian(
            &grid,
            state_section.k0,
            delta_k,
            state_section.x0,
            state_section.component()?,
        )
        .map_err(CliError::numeric),
        "dressed" => {
            if state_section.x0 != 0.0 {
                return Err(CliError::config("dressed states are synthesized at x0 = 0"));
            }
            init_dressed_gaussian(
                &grid,
                &params,
                &config.truncation_spec()?,
                state_section.band,
                state_section.k0,
                delta_k,
            )
            .map_err(CliError::numeric)
        }
        _ => unreachable!("validated"),
    }
}

pub fn run(config: &RunConfig, out_dir: &Path) -> Result<PropagateResults, CliError> {
    let state = build_state(config)?;
    let evolve_section =
        config.evolve.as_ref().ok_or_else(|| CliError::config("missing [evolve] section"))?;
    if evolve_section.steps == 0 {
        return Err(CliError::config("propagate: evolve.steps must be at least 1"));
    }
    let state_section = config.state.as_ref().expect("checked in build_state");
    let params = config.model_params()?;
    let profile = config.coupling_profile()?;
    let extract = config.extract.clone().unwrap_or_default();

    let mut evolve_config = EvolveConfig::new(evolve_section.dt, evolve_section.steps)
        .with_stride(evolve_section.stride)
        .with_splitting(evolve_section.splitting()?);
    if evolve_section.momentum_stride > 0 {
        evolve_config = evolve_config.with_momentum_stride(evolve_section.momentum_stride);
    }
    if let Some(cut) = extract.exclusion_cut {
        evolve_config = evolve_config.with_exclusion(cut);
    }

    let bundle = Bundle::create(out_dir)?;
    let wants_svg = config.output.wants_svg();

    // With SVG requested the run is chunked to capture a spacetime density
    // map; otherwise one evolve call does it.
    let n_slices: usize = 72;
    let (final_state, series, density_rows) = if wants_svg {
        let chunk = (evolve_section.steps / n_slices).max(1);
        let mut st = state;
        let mut series = ObservableSeries::default();
        let mut rows: Vec<Vec<f64>> = Vec::new();
        let mut times: Vec<f64> = Vec::new();
        let sample_x = (st.grid.n() / 256).max(1);
        let capture = |st: &SpinorField, rows: &mut Vec<Vec<f64>>, times: &mut Vec<f64>| {
            let mut row = Vec::with_capacity(st.grid.n() / sample_x + 1);
            for j in (0..st.grid.n()).step_by(sample_x) {
                row.push(st.psi_plus[j].norm_sqr() + st.psi_minus[j].norm_sqr());
            }
            rows.push(row);
            times.push(st.time);
        };
        capture(&st, &mut rows, &mut times);
        let mut done = 0;
        while done < evolve_section.steps {
            let n = chunk.min(evolve_section.steps - done);
            let mut cfg = evolve_config.clone();
            cfg.n_steps = n;
            let (next, mut piece) = evolve(&st, &profile, &params, &cfg).map_err(map_wavepacket_error)?;
            st = next;
            if done > 0 {
                piece.times.remove(0);
                piece.norm.remove(0);
                piece.inversion.remove(0);
                piece.mean_x.remove(0);
                piece.mean_x_lower.remove(0);
                piece.var_x.remove(0);
                piece.var_x_lower.remove(0);
            }
            series.extend_from(piece);
            capture(&st, &mut rows, &mut times);
            done += n;
        }
        (st, series, Some((rows, times, sample_x)))
    } else {
        let (st, series) =
            evolve(&state, &profile, &params, &evolve_config).map_err(map_wavepacket_error)?;
        (st, series, None)
    };

    let mut files = Vec::new();
    let rows = (0..series.len()).map(|i| {
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
    });
    files.push(
        bundle
            .write_csv(
                "series.csv",
                "t,norm,inversion,mean_x_total,mean_x_lower,var_x_total,var_x_lower",
                rows,
            )?
            .display()
            .to_string(),
    );

    // Final momentum histograms, ascending k.
    let hist_plus = final_state.momentum_probabilities(cavityband_core::wavepacket::Component::Plus);
    let hist_minus =
        final_state.momentum_probabilities(cavityband_core::wavepacket::Component::Minus);
    let grid = &final_state.grid;
    let mut order: Vec<usize> = (0..grid.n()).collect();
    order.sort_by(|&a, &b| grid.momentum(a).partial_cmp(&grid.momentum(b)).unwrap());
    files.push(
        bundle
            .write_csv(
                "momentum.csv",
                "k,p_plus,p_minus",
                order.iter().map(|&j| {
                    format!(
                        "{},{},{}",
                        num(grid.momentum(j)),
                        num(hist_plus[j]),
                        num(hist_minus[j])
                    )
                }),
            )?
            .display()
            .to_string(),
    );

    if let Some((rows, times, sample_x)) = density_rows {
        let xs: Vec<f64> = (0..grid.n()).step_by(sample_x).map(|j| grid.x(j)).collect();
        let hm = HeatMap {
            title: "|psi(x,t)|^2",
            x_label: "x",
            y_label: "t",
            xs: &xs,
            ys: &times,
            values: &rows,
        };
        files.push(bundle.write_text("spacetime.svg", &hm.render())?.display().to_string());
    }

    // Extractions with their band-structure oracles.
    let trunc = config.truncation_spec()?;
    let steps_time = evolve_section.dt * evolve_section.steps as f64;
    let delta_k = state_section.delta_k()?;
    let mut v_g = None;
    let mut v_g_floquet = None;
    if extract.v_g {
        let window = extract.v_g_window.unwrap_or([0.25 * steps_time, steps_time]);
        v_g = Some(
            extract_group_velocity(
                &series,
                window[0],
                window[1],
                ExtractSection::source(&extract.v_g_source)?,
                extract.mode()?,
            )
            .map_err(CliError::numeric)?,
        );
        v_g_floquet = Some(
            effective_masses(&params, &trunc, state_section.k0, state_section.band, 1e-3 * params.q)
                .map_err(CliError::numeric)?
                .v_g,
        );
    }
    let mut m2 = None;
    let mut t_eff = None;
    let mut m2_floquet = None;
    if extract.m2 {
        let trimmed;
        let fit_series: &ObservableSeries = match extract.m2_window {
            None => &series,
            Some([t0, t1]) => {
                let keep: Vec<usize> = (0..series.len())
                    .filter(|&i| series.times[i] >= t0 && series.times[i] <= t1)
                    .collect();
                let pick = |src: &[f64]| keep.iter().map(|&i| src[i]).collect::<Vec<f64>>();
                trimmed = ObservableSeries {
                    times: pick(&series.times),
                    norm: pick(&series.norm),
                    inversion: pick(&series.inversion),
                    mean_x: pick(&series.mean_x),
                    mean_x_lower: pick(&series.mean_x_lower),
                    var_x: pick(&series.var_x),
                    var_x_lower: pick(&series.var_x_lower),
                    ..ObservableSeries::default()
                };
                &trimmed
            }
        };
        let fit = extract_m2(
            fit_series,
            delta_k,
            ExtractSection::source(&extract.m2_source)?,
            extract.fit_teff,
        )
        .map_err(CliError::numeric)?;
        m2 = Some(fit.m2);
        t_eff = Some(fit.t_eff);
        m2_floquet = Some(
            effective_masses(&params, &trunc, state_section.k0, state_section.band, 5e-3 * params.q)
                .map_err(CliError::numeric)?
                .m2,
        );
    }
    let rabi = if extract.rabi {
        Some(rabi_period(&series).map_err(CliError::numeric)?)
    } else {
        None
    };

    let n_samples = series.len();
    let results = PropagateResults {
        final_time: series.times[n_samples - 1],
        final_norm: series.norm[n_samples - 1],
        final_inversion: series.inversion[n_samples - 1],
        final_mean_x: series.mean_x[n_samples - 1],
        final_var_x: series.var_x[n_samples - 1],
        v_g,
        v_g_floquet,
        m2,
        t_eff,
        m2_floquet,
        rabi_period: rabi,
        files,
    };
    let summary =
        Summary { command: "propagate", config, results: &results, provenance: Provenance::new() };
    bundle.write_json("summary.json", &summary)?;
    bundle.write_text("config.resolved.toml", &config.to_toml_string())?;
    Ok(results)
}
