//! End-to-end reflection/transmission scenarios against a finite mode region.
//!
//! A packet prepared outside the enveloped region is propagated until its
//! dominant outgoing part has cleared the interaction region (or a time
//! budget runs out), then probability is booked by region: `x < -x_b`
//! reflected, `x > x_b` transmitted, the rest residual, with
//! `x_b = x_l + 5·x_e` (envelope tails are below 1e-4 past five edge
//! widths).

mod analysis;
mod run;

pub use analysis::{
    compose_sectors, momentum_hole, reflection_state_map, HoleEstimate, JointOutcome,
    ReflectionPrediction, SectorAmplitudes, SectorMode,
};
pub use run::{run_scatter, transparency_run, TransparencyReport};

use alloc::vec::Vec;
use core::fmt;

use crate::floquet::ModelParams;
use crate::wavepacket::{
    make_grid, Component, ObservableSeries, SpatialGrid, WavepacketError,
};

#[cfg(feature = "serde")]
use serde::Serialize;

/// Default threshold on residual-in-region probability for the "cleared"
/// criterion (and the `NotCleared` flag).
pub const DEFAULT_RESIDUAL_THRESHOLD: f64 = 0.05;
/// In-region probability that marks the packet as having engaged the region.
/// Kept high on purpose: the incident packet must have substantially entered
/// before any "outgoing" bookkeeping is meaningful (its leading tail alone
/// must not arm the clearing check while the bulk still sits outside).
pub const ENGAGEMENT_THRESHOLD: f64 = 0.5;
/// Boundary-cell probability above which the run is flagged as wrapped.
pub const WRAP_TOLERANCE: f64 = 1e-8;

/// Errors from scenario validation and scattering analysis.
#[derive(Debug, Clone, PartialEq)]
pub enum ScatterError {
    /// Initial packet support overlaps the interaction region beyond 1e-8.
    PacketOverlapsRegion { overlap: f64 },
    /// `|x0|` must exceed the classification margin `x_b`.
    StartInsideRegion,
    /// Grid cannot resolve the momenta the scenario excites.
    InsufficientResolution,
    /// `k_in` is not near a labeled gap.
    NotAGap,
    /// No contiguous interval under the hole threshold around the expected
    /// centre.
    NoHoleDetected,
    /// Propagated state-preparation or evolution failure.
    Wavepacket(WavepacketError),
}

impl fmt::Display for ScatterError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::PacketOverlapsRegion { overlap } => {
                write!(f, "initial packet overlaps the interaction region ({overlap:e})")
            }
            Self::StartInsideRegion => write!(f, "x0 must lie outside the classification margin"),
            Self::InsufficientResolution => write!(f, "grid Nyquist momentum too small"),
            Self::NotAGap => write!(f, "incident momentum is not at a labeled gap"),
            Self::NoHoleDetected => write!(f, "no momentum hole under the threshold"),
            Self::Wavepacket(e) => write!(f, "wavepacket: {e}"),
        }
    }
}

impl core::error::Error for ScatterError {}

impl From<WavepacketError> for ScatterError {
    fn from(e: WavepacketError) -> Self {
        Self::Wavepacket(e)
    }
}

/// A complete scattering setup.
#[derive(Debug, Clone)]
pub struct ScatterScenario {
    pub params: ModelParams,
    /// Envelope half-length.
    pub x_l: f64,
    /// Envelope edge width.
    pub x_e: f64,
    pub k0: f64,
    pub delta_k: f64,
    pub x0: f64,
    pub component: Component,
    pub grid: SpatialGrid,
    pub dt: f64,
    /// Time budget; the run stops earlier once cleared.
    pub t_max: f64,
    /// Classification margin; defaults to `x_l + 5 x_e`.
    pub x_b: f64,
    pub sample_stride: usize,
    pub residual_threshold: f64,
}

impl ScatterScenario {
    /// Builds and validates a scenario on a fresh grid of `n_points` over
    /// `[-extent, extent)`.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        params: ModelParams,
        x_l: f64,
        x_e: f64,
        k0: f64,
        delta_k: f64,
        x0: f64,
        n_points: usize,
        extent: f64,
        dt: f64,
        t_max: f64,
    ) -> Result<Self, ScatterError> {
        let grid = make_grid(n_points, -extent, extent)?;
        let scenario = Self {
            params,
            x_l,
            x_e,
            k0,
            delta_k,
            x0,
            component: Component::Minus,
            grid,
            dt,
            t_max,
            x_b: x_l + 5.0 * x_e,
            sample_stride: 20,
            residual_threshold: DEFAULT_RESIDUAL_THRESHOLD,
        };
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn with_component(mut self, component: Component) -> Self {
        self.component = component;
        self
    }

    pub fn with_residual_threshold(mut self, thr: f64) -> Self {
        self.residual_threshold = thr;
        self
    }

    pub fn with_stride(mut self, stride: usize) -> Self {
        self.sample_stride = stride.max(1);
        self
    }

    pub fn validate(&self) -> Result<(), ScatterError> {
        // The clearing criterion compares outgoing means against 0.8·|x0|;
        // that point must lie outside the classification margin or "cleared"
        // is meaningless.
        if self.x0.abs() <= self.x_b || 0.8 * self.x0.abs() <= self.x_b {
            return Err(ScatterError::StartInsideRegion);
        }
        // Gaussian mass of the initial packet inside |x| <= x_b.
        let sigma = 1.0 / (2.0 * self.delta_k);
        let z = (self.x0.abs() - self.x_b) / (core::f64::consts::SQRT_2 * sigma);
        let overlap = 0.5 * libm::erfc(z);
        if overlap > 1e-8 {
            return Err(ScatterError::PacketOverlapsRegion { overlap });
        }
        // The run excites momenta out to ±(|k0| + q) plus the packet spread.
        let needed = self.k0.abs() + self.params.q + 8.0 * self.delta_k;
        if self.grid.nyquist() < needed {
            return Err(ScatterError::InsufficientResolution);
        }
        Ok(())
    }

    /// Incident momentum distribution `|φ(p)|²` per bin (FFT ordering).
    pub fn incident_momentum_density(&self) -> Vec<f64> {
        self.grid
            .momenta()
            .iter()
            .map(|&p| (-((p - self.k0) / self.delta_k).powi(2) / 2.0).exp())
            .collect()
    }
}

/// Region-resolved probabilities at one sample time.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize))]
pub struct RegionSample {
    pub time: f64,
    pub reflected: f64,
    pub transmitted: f64,
    pub residual: f64,
}

/// Everything a scattering run reports.
#[derive(Debug, Clone)]
#[cfg_attr(feature = "serde", derive(Serialize))]
pub struct ScatterReport {
    pub r_total: f64,
    pub t_total: f64,
    pub residual: f64,
    /// (plus, minus) split of the reflected probability.
    pub r_per_component: (f64, f64),
    pub t_per_component: (f64, f64),
    pub final_inversion: f64,
    pub final_time: f64,
    pub cleared: bool,
    /// Set when the budget elapsed with residual above the threshold.
    pub not_cleared_warning: bool,
    /// Boundary-cell probability ever exceeded [`WRAP_TOLERANCE`].
    pub wrap_warning: bool,
    /// Mean momentum of the outgoing side opposite the incident direction.
    pub reflected_momentum_centroid: f64,
    /// Momentum bin centres (FFT ordering) for the histograms below. The
    /// bulk arrays are serde-skipped; the CLI emits them as CSV files.
    #[cfg_attr(feature = "serde", serde(skip))]
    pub momentum_grid: Vec<f64>,
    #[cfg_attr(feature = "serde", serde(skip))]
    pub final_momentum_plus: Vec<f64>,
    #[cfg_attr(feature = "serde", serde(skip))]
    pub final_momentum_minus: Vec<f64>,
    /// Lower-component momentum density of the transmitted region only
    /// (smooth mask beyond `x_b`); feeds the hole analysis.
    #[cfg_attr(feature = "serde", serde(skip))]
    pub transmitted_momentum_minus: Vec<f64>,
    /// Incident `|φ(p)|²` envelope (unnormalized).
    #[cfg_attr(feature = "serde", serde(skip))]
    pub incident_momentum: Vec<f64>,
    pub region_series: Vec<RegionSample>,
    pub series: ObservableSeries,
    /// (plus, minus) final position densities.
    #[cfg_attr(feature = "serde", serde(skip))]
    pub final_position_plus: Vec<f64>,
    #[cfg_attr(feature = "serde", serde(skip))]
    pub final_position_minus: Vec<f64>,
    pub hole: Option<HoleEstimate>,
}

impl ScatterReport {
    /// Probability bookkeeping residue `|R + T + residual − norm|`.
    pub fn bookkeeping_residue(&self) -> f64 {
        let norm = self.series.norm.last().copied().unwrap_or(1.0);
        (self.r_total + self.t_total + self.residual - norm).abs()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base_params() -> ModelParams {
        ModelParams::new(0.01, 0.0)
    }

    #[test]
    fn scenario_validation() {
        // The reference reflection geometry validates.
        assert!(ScatterScenario::new(
            base_params(),
            1500.0,
            50.0,
            0.5,
            0.01,
            -2500.0,
            1 << 13,
            4000.0,
            0.1,
            6000.0,
        )
        .is_ok());

        // Start inside the margin.
        assert_eq!(
            ScatterScenario::new(
                base_params(),
                1500.0,
                50.0,
                0.5,
                0.01,
                -1600.0,
                1 << 13,
                4000.0,
                0.1,
                6000.0,
            )
            .unwrap_err(),
            ScatterError::StartInsideRegion
        );

        // Wide packet leaking into the region.
        match ScatterScenario::new(
            base_params(),
            1500.0,
            50.0,
            0.5,
            0.0002,
            -2500.0,
            1 << 13,
            4000.0,
            0.1,
            6000.0,
        ) {
            Err(ScatterError::PacketOverlapsRegion { overlap }) => assert!(overlap > 1e-8),
            other => panic!("expected overlap rejection, got {other:?}"),
        }

        // Coarse grid cannot resolve k0 + q.
        assert_eq!(
            ScatterScenario::new(
                base_params(),
                1500.0,
                50.0,
                0.5,
                0.01,
                -2500.0,
                1 << 11,
                4000.0,
                0.1,
                6000.0,
            )
            .unwrap_err(),
            ScatterError::InsufficientResolution
        );
    }
}
