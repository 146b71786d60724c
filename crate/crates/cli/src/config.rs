//! Run configuration: TOML sections, defaults, validation, and flat
//! `--section.key=value` overrides.

use serde::{Deserialize, Serialize};

use cavityband_core::floquet::{ModelParams, TruncationSpec};
use cavityband_core::wavepacket::{Component, CouplingProfile, FitMode, MeanSource, Splitting};

use crate::CliError;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelSection,
    #[serde(default)]
    pub truncation: TruncationSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub state: Option<StateSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub evolve: Option<EvolveSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cavity: Option<CavitySection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ramp: Option<RampSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub extract: Option<ExtractSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scatter: Option<ScatterSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bands: Option<BandsSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub masses: Option<MassesSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub map: Option<MapSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSection>,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub g0: f64,
    #[serde(default)]
    pub delta: f64,
    #[serde(default = "one")]
    pub q: f64,
    #[serde(default = "one_u32")]
    pub n_photons: u32,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TruncationSection {
    pub n_states: usize,
}

impl Default for TruncationSection {
    fn default() -> Self {
        Self { n_states: 201 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub n_points: usize,
    pub x_min: f64,
    pub x_max: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateSection {
    /// "bare" | "dressed"
    pub kind: String,
    pub k0: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_k: Option<f64>,
    /// Alternative width spec: initial position variance Δx²
    /// (Δk = 1/(2·Δx)).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_x2: Option<f64>,
    #[serde(default)]
    pub x0: f64,
    /// "minus" | "plus" (bare states).
    #[serde(default = "minus_str")]
    pub component: String,
    /// 1-based band (dressed states).
    #[serde(default = "one_usize")]
    pub band: usize,
}

impl StateSection {
    pub fn delta_k(&self) -> Result<f64, CliError> {
        match (self.delta_k, self.delta_x2) {
            (Some(dk), None) => Ok(dk),
            (None, Some(dx2)) if dx2 > 0.0 => Ok(1.0 / (2.0 * dx2.sqrt())),
            (Some(_), Some(_)) => {
                Err(CliError::config("state: give exactly one of delta_k, delta_x2"))
            }
            _ => Err(CliError::config("state: missing delta_k or positive delta_x2")),
        }
    }

    pub fn component(&self) -> Result<Component, CliError> {
        match self.component.as_str() {
            "minus" => Ok(Component::Minus),
            "plus" => Ok(Component::Plus),
            other => Err(CliError::config(format!("state.component: unknown '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolveSection {
    #[serde(default = "default_dt")]
    pub dt: f64,
    /// Step count for propagate runs (scatter runs derive it from t_max).
    #[serde(default)]
    pub steps: usize,
    #[serde(default = "default_stride")]
    pub stride: usize,
    /// "strang" | "lie"
    #[serde(default = "strang_str")]
    pub splitting: String,
    #[serde(default)]
    pub momentum_stride: usize,
}

impl EvolveSection {
    pub fn splitting(&self) -> Result<Splitting, CliError> {
        match self.splitting.as_str() {
            "strang" => Ok(Splitting::Strang),
            "lie" => Ok(Splitting::Lie),
            other => Err(CliError::config(format!("evolve.splitting: unknown '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CavitySection {
    /// "uniform" | "enveloped"
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x_l: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x_e: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RampSection {
    #[serde(default = "sin2_str")]
    pub shape: String,
    pub t_ramp: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct ExtractSection {
    #[serde(default)]
    pub v_g: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v_g_window: Option<[f64; 2]>,
    #[serde(default = "total_str")]
    pub v_g_source: String,
    #[serde(default = "lsq_str")]
    pub v_g_mode: String,
    #[serde(default)]
    pub m2: bool,
    #[serde(default = "total_str")]
    pub m2_source: String,
    /// Restrict the broadening fit to this time window (side packets must
    /// have left the exclusion window first in the projective protocol).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m2_window: Option<[f64; 2]>,
    #[serde(default)]
    pub fit_teff: bool,
    #[serde(default)]
    pub rabi: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exclusion_cut: Option<f64>,
}

impl ExtractSection {
    pub fn source(name: &str) -> Result<MeanSource, CliError> {
        match name {
            "total" => Ok(MeanSource::Total),
            "lower" => Ok(MeanSource::Lower),
            other => Err(CliError::config(format!("extract source: unknown '{other}'"))),
        }
    }

    pub fn mode(&self) -> Result<FitMode, CliError> {
        match self.v_g_mode.as_str() {
            "least-squares" => Ok(FitMode::LeastSquares),
            "two-point" => Ok(FitMode::TwoPoint),
            other => Err(CliError::config(format!("extract.v_g_mode: unknown '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScatterSection {
    pub t_max: f64,
    #[serde(default = "default_residual")]
    pub residual_threshold: f64,
    #[serde(default)]
    pub transparency: bool,
    #[serde(default = "default_hole_threshold")]
    pub hole_threshold: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BandsSection {
    pub k_points: usize,
    pub num_bands: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_max: Option<f64>,
    /// Overlay the bare energies in the SVG.
    #[serde(default = "yes")]
    pub overlay_bare: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MassesSection {
    pub k0: f64,
    #[serde(default = "one_usize")]
    pub band: usize,
    #[serde(default = "default_fd_step")]
    pub fd_step: f64,
    /// [min, max, count] sweep axes; present => grid mode.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g0_range: Option<[f64; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_range: Option<[f64; 3]>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapSection {
    pub g0_range: [f64; 3],
    pub delta_range: [f64; 3],
    /// Error map: small window size.
    #[serde(default = "default_n_small")]
    pub n_small: usize,
    /// Quasi-momentum the map is evaluated at.
    #[serde(default)]
    pub k: f64,
    /// Fidelity map indices.
    #[serde(default = "one_usize")]
    pub nu: usize,
    #[serde(default)]
    pub mu: i32,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    /// Base command run per cell: "bands" | "masses" | "error-map" |
    /// "fidelity-map" | "propagate" | "scatter".
    pub command: String,
    pub params: Vec<SweepParam>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepParam {
    /// Dotted config path, e.g. "model.g0".
    pub path: String,
    pub values: Vec<toml::Value>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default = "default_out_dir")]
    pub dir: String,
    #[serde(default = "default_formats")]
    pub formats: Vec<String>,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self { dir: default_out_dir(), formats: default_formats() }
    }
}

impl OutputSection {
    pub fn wants_svg(&self) -> bool {
        self.formats.iter().any(|f| f == "svg")
    }
}

fn one() -> f64 {
    1.0
}
fn one_u32() -> u32 {
    1
}
fn one_usize() -> usize {
    1
}
fn yes() -> bool {
    true
}
fn minus_str() -> String {
    "minus".into()
}
fn strang_str() -> String {
    "strang".into()
}
fn sin2_str() -> String {
    "sin2".into()
}
fn total_str() -> String {
    "total".into()
}
fn lsq_str() -> String {
    "least-squares".into()
}
fn default_dt() -> f64 {
    0.05
}
fn default_stride() -> usize {
    20
}
fn default_residual() -> f64 {
    0.05
}
fn default_hole_threshold() -> f64 {
    0.1
}
fn default_fd_step() -> f64 {
    1e-3
}
fn default_n_small() -> usize {
    5
}
fn default_out_dir() -> String {
    "out".into()
}
fn default_formats() -> Vec<String> {
    vec!["csv".into(), "json".into()]
}

impl RunConfig {
    /// Parses TOML text, applies `--path.key=value` overrides, then
    /// validates the cross-section invariants the core types enforce.
    pub fn from_toml(text: &str, overrides: &[(String, String)]) -> Result<Self, CliError> {
        let mut value: toml::Value =
            text.parse().map_err(|e| CliError::config(format!("config parse: {e}")))?;
        for (path, raw) in overrides {
            apply_override(&mut value, path, raw)?;
        }
        let config: RunConfig = value
            .try_into()
            .map_err(|e| CliError::config(format!("config: {e}")))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.model_params().map(|_| ())?;
        self.truncation_spec().map(|_| ())?;
        if let Some(state) = &self.state {
            state.delta_k()?;
            state.component()?;
            match state.kind.as_str() {
                "bare" | "dressed" => {}
                other => return Err(CliError::config(format!("state.kind: unknown '{other}'"))),
            }
        }
        if let Some(evolve) = &self.evolve {
            evolve.splitting()?;
            if !(evolve.dt > 0.0) {
                return Err(CliError::config("evolve.dt must be positive"));
            }
        }
        if let Some(cavity) = &self.cavity {
            match cavity.kind.as_str() {
                "uniform" => {}
                "enveloped" => {
                    if cavity.x_l.is_none() || cavity.x_e.is_none() {
                        return Err(CliError::config("cavity: enveloped needs x_l and x_e"));
                    }
                }
                other => return Err(CliError::config(format!("cavity.kind: unknown '{other}'"))),
            }
        }
        if let Some(ramp) = &self.ramp {
            if ramp.shape != "sin2" {
                return Err(CliError::config(format!("ramp.shape: unknown '{}'", ramp.shape)));
            }
            if !(ramp.t_ramp >= 0.0) {
                return Err(CliError::config("ramp.t_ramp must be non-negative"));
            }
        }
        if let Some(extract) = &self.extract {
            ExtractSection::source(&extract.v_g_source)?;
            ExtractSection::source(&extract.m2_source)?;
            extract.mode()?;
        }
        Ok(())
    }

    pub fn model_params(&self) -> Result<ModelParams, CliError> {
        let p = ModelParams {
            g0: self.model.g0,
            delta: self.model.delta,
            q: self.model.q,
            n_photons: self.model.n_photons,
        };
        p.validate().map_err(CliError::config)?;
        Ok(p)
    }

    pub fn truncation_spec(&self) -> Result<TruncationSpec, CliError> {
        TruncationSpec::new(self.truncation.n_states).map_err(CliError::config)
    }

    /// Coupling landscape from the cavity + ramp sections (defaults to
    /// uniform when the cavity section is absent).
    pub fn coupling_profile(&self) -> Result<CouplingProfile, CliError> {
        let params = self.model_params()?;
        let mut profile = match &self.cavity {
            None => CouplingProfile::uniform(params.g_eff(), params.q),
            Some(c) => match c.kind.as_str() {
                "uniform" => CouplingProfile::uniform(params.g_eff(), params.q),
                "enveloped" => CouplingProfile::enveloped(
                    params.g_eff(),
                    params.q,
                    c.x_l.unwrap(),
                    c.x_e.unwrap(),
                ),
                _ => unreachable!("validated"),
            },
        };
        if let Some(ramp) = &self.ramp {
            profile = profile.with_ramp(ramp.t_ramp);
        }
        Ok(profile)
    }

    /// Serializes the resolved config back to TOML (reproducibility echo).
    pub fn to_toml_string(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }
}

/// Sets the leaf at `path` ("a.b.c") to the TOML-parsed `raw` value.
fn apply_override(root: &mut toml::Value, path: &str, raw: &str) -> Result<(), CliError> {
    let parsed: toml::Value = match format!("v = {raw}").parse::<toml::Table>() {
        Ok(t) => t["v"].clone(),
        Err(_) => toml::Value::String(raw.to_string()),
    };
    let mut node = root;
    let parts: Vec<&str> = path.split('.').collect();
    if parts.len() < 2 {
        return Err(CliError::config(format!("override path '{path}' must be section.key")));
    }
    for part in &parts[..parts.len() - 1] {
        let table = node
            .as_table_mut()
            .ok_or_else(|| CliError::config(format!("override path '{path}': not a table")))?;
        node = table
            .entry(part.to_string())
            .or_insert_with(|| toml::Value::Table(Default::default()));
    }
    let table = node
        .as_table_mut()
        .ok_or_else(|| CliError::config(format!("override path '{path}': not a table")))?;
    table.insert(parts[parts.len() - 1].to_string(), parsed);
    Ok(())
}
