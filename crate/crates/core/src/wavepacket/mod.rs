//! Split-operator propagation of the two-component spinor field.
//!
//! The state lives on a uniform periodic grid. `psi_plus` is the internal
//! `|+⟩ = |↑, n-1⟩` component and `psi_minus` the `|-⟩ = |↓, n⟩` component.
//! One step factorizes the propagator into kinetic pieces applied in momentum
//! space (via FFT) and a pointwise 2×2 unitary for the potential block
//! `[[Δ/2, G(x)], [G(x), -Δ/2]]` with `G(x) = 2·g√n·cos(qx)·ḡ(x)`.
//!
//! FFT index `j < N/2` carries momentum `j·2π/L`, indices `j ≥ N/2` carry
//! `(j−N)·2π/L` (standard wrap-around ordering); all momentum-space
//! quantities in this module use that ordering.

mod evolve;
mod extract;
mod init;
mod observe;

pub use evolve::{
    evolve, potential_step_matrix, prepare_by_adiabatic_ramp, EvolveConfig, Splitting,
};
pub use extract::{extract_group_velocity, extract_m2, rabi_period, FitMode, M2Fit, MeanSource};
pub use init::{band_populations, init_bare_gaussian, init_dressed_gaussian};
pub use observe::{measure, MeasureOptions, Measurement};

use alloc::vec::Vec;
use core::fmt;
use num_complex::Complex64;

use crate::floquet::FloquetError;

#[cfg(feature = "serde")]
use serde::Serialize;

/// Errors from state preparation, propagation and extraction.
#[derive(Debug, Clone, PartialEq)]
pub enum WavepacketError {
    /// Grid construction with non-positive extent or bad point count.
    BadExtent,
    /// Packet tails exceed 1e-8 at the position or momentum boundary.
    PacketTooWide,
    /// Momentum mass outside the zone `(-q, q]` exceeds 1e-6.
    ZoneBoundaryOverlap { outside_mass: f64 },
    /// Norm left unity by more than 1e-8 during propagation; a bug guard,
    /// not physics.
    NormDrift { norm: f64 },
    /// Conditional selection carries no probability.
    EmptySelection,
    /// Variance series is constant; nothing to fit.
    FitDegenerate,
    /// Fewer than two full oscillations in the inversion series.
    TooFewOscillations,
    /// Operation requires `q` to be an integer multiple of the momentum
    /// spacing (domain length a multiple of the mode period).
    IncommensurateGrid,
    /// Propagated band-structure failure.
    Floquet(FloquetError),
}

impl fmt::Display for WavepacketError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::BadExtent => write!(f, "grid extent or point count invalid"),
            Self::PacketTooWide => write!(f, "packet does not fit the grid"),
            Self::ZoneBoundaryOverlap { outside_mass } => {
                write!(f, "momentum mass {outside_mass:e} outside the first zone")
            }
            Self::NormDrift { norm } => write!(f, "norm drifted to {norm}"),
            Self::EmptySelection => write!(f, "conditional selection has no probability"),
            Self::FitDegenerate => write!(f, "variance series is constant"),
            Self::TooFewOscillations => write!(f, "need at least two inversion oscillations"),
            Self::IncommensurateGrid => {
                write!(f, "domain length must be a multiple of the mode period")
            }
            Self::Floquet(e) => write!(f, "floquet: {e}"),
        }
    }
}

impl core::error::Error for WavepacketError {}

impl From<FloquetError> for WavepacketError {
    fn from(e: FloquetError) -> Self {
        Self::Floquet(e)
    }
}

/// Uniform periodic spatial grid with its conjugate momentum grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SpatialGrid {
    n: usize,
    x_min: f64,
    x_max: f64,
    dx: f64,
    /// Momenta in FFT ordering.
    momenta: Vec<f64>,
}

/// Builds a grid of `n_points` (a power of two) cells covering
/// `[x_min, x_max)`; the right endpoint is identified with the left one.
pub fn make_grid(n_points: usize, x_min: f64, x_max: f64) -> Result<SpatialGrid, WavepacketError> {
    if n_points == 0 || !n_points.is_power_of_two() || !(x_max > x_min) {
        return Err(WavepacketError::BadExtent);
    }
    let length = x_max - x_min;
    if !length.is_finite() {
        return Err(WavepacketError::BadExtent);
    }
    let dx = length / n_points as f64;
    let dk = 2.0 * core::f64::consts::PI / length;
    let momenta = (0..n_points)
        .map(|j| {
            let jj = if j < n_points / 2 { j as i64 } else { j as i64 - n_points as i64 };
            jj as f64 * dk
        })
        .collect();
    Ok(SpatialGrid { n: n_points, x_min, x_max, dx, momenta })
}

impl SpatialGrid {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn length(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn x(&self, j: usize) -> f64 {
        self.x_min + self.dx * j as f64
    }

    /// Momentum spacing 2π/L.
    pub fn dk(&self) -> f64 {
        2.0 * core::f64::consts::PI / self.length()
    }

    /// Momentum of FFT bin `j` (wrap-around ordering).
    pub fn momentum(&self, j: usize) -> f64 {
        self.momenta[j]
    }

    pub fn momenta(&self) -> &[f64] {
        &self.momenta
    }

    /// Largest resolvable |momentum|.
    pub fn nyquist(&self) -> f64 {
        self.n as f64 / 2.0 * self.dk()
    }

    /// Whether `q` lands on the momentum grid (within 1e-9 relative), i.e.
    /// the domain holds an integer number of mode periods.
    pub fn commensurate_with(&self, q: f64) -> bool {
        let ratio = q / self.dk();
        (ratio - ratio.round()).abs() < 1e-9 * ratio.max(1.0)
    }
}

/// Two-component wave function on its grid.
#[derive(Debug, Clone)]
pub struct SpinorField {
    pub grid: SpatialGrid,
    /// `|+⟩ = |↑, n-1⟩` amplitude per grid cell.
    pub psi_plus: Vec<Complex64>,
    /// `|-⟩ = |↓, n⟩` amplitude per grid cell.
    pub psi_minus: Vec<Complex64>,
    /// Scaled time carried by the state.
    pub time: f64,
}

/// Which internal component a bare packet occupies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(Serialize))]
pub enum Component {
    Plus,
    Minus,
}

impl SpinorField {
    /// Zero state on `grid`.
    pub fn zero(grid: SpatialGrid) -> Self {
        let n = grid.n();
        Self {
            grid,
            psi_plus: alloc::vec![Complex64::default(); n],
            psi_minus: alloc::vec![Complex64::default(); n],
            time: 0.0,
        }
    }

    /// Total norm `∫ (|ψ₊|² + |ψ₋|²) dx`.
    pub fn norm(&self) -> f64 {
        let sum: f64 = self
            .psi_plus
            .iter()
            .zip(&self.psi_minus)
            .map(|(a, b)| a.norm_sqr() + b.norm_sqr())
            .sum();
        sum * self.grid.dx()
    }

    /// Rescales to unit norm.
    pub fn normalize(&mut self) {
        let n = self.norm();
        if n > 0.0 {
            let s = 1.0 / n.sqrt();
            for v in self.psi_plus.iter_mut().chain(self.psi_minus.iter_mut()) {
                *v *= s;
            }
        }
    }

    /// Probability in cells with `|x| ≤ cut` (or everywhere if `None`),
    /// optionally restricted to one component.
    pub fn probability_within(&self, component: Option<Component>, cut: Option<f64>) -> f64 {
        let mut sum = 0.0;
        for j in 0..self.grid.n() {
            if let Some(c) = cut {
                if self.grid.x(j).abs() > c {
                    continue;
                }
            }
            sum += match component {
                Some(Component::Plus) => self.psi_plus[j].norm_sqr(),
                Some(Component::Minus) => self.psi_minus[j].norm_sqr(),
                None => self.psi_plus[j].norm_sqr() + self.psi_minus[j].norm_sqr(),
            };
        }
        sum * self.grid.dx()
    }

    /// Per-bin momentum probabilities of one component (FFT ordering,
    /// `Σ = component norm`).
    pub fn momentum_probabilities(&self, component: Component) -> Vec<f64> {
        let src = match component {
            Component::Plus => &self.psi_plus,
            Component::Minus => &self.psi_minus,
        };
        let mut buf = src.clone();
        let plan = crate::numerics::Fft::new(self.grid.n()).expect("grid n is a power of two");
        plan.forward(&mut buf);
        let w = self.grid.dx() / self.grid.n() as f64;
        buf.iter().map(|v| v.norm_sqr() * w).collect()
    }
}

/// Time-independent coupling landscape, optionally with a turn-on ramp.
///
/// `g0` here is the effective amplitude entering the potential; for an
/// n-photon sector pass `ModelParams::g_eff()`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize))]
pub struct CouplingProfile {
    pub g0: f64,
    pub q: f64,
    pub kind: ProfileKind,
    pub ramp: Option<Ramp>,
}

/// Spatial shape of the coupling region.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize))]
pub enum ProfileKind {
    /// `ḡ(x) = 1` everywhere (infinite mode region).
    Uniform,
    /// `ḡ(x) = (tanh((x+x_l)/x_e) − tanh((x−x_l)/x_e))/2`: a region of
    /// half-length `x_l` with edges of width `x_e`.
    Enveloped { x_l: f64, x_e: f64 },
}

/// Smooth turn-on of the coupling amplitude over `[0, t_ramp]`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize))]
pub struct Ramp {
    pub shape: RampShape,
    pub t_ramp: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(Serialize))]
pub enum RampShape {
    /// `sin²(πt/(2T))`: zero value and slope at t=0, unit value and zero
    /// slope at t=T.
    SinSquared,
}

impl CouplingProfile {
    pub fn uniform(g0: f64, q: f64) -> Self {
        Self { g0, q, kind: ProfileKind::Uniform, ramp: None }
    }

    pub fn enveloped(g0: f64, q: f64, x_l: f64, x_e: f64) -> Self {
        Self { g0, q, kind: ProfileKind::Enveloped { x_l, x_e }, ramp: None }
    }

    pub fn with_ramp(mut self, t_ramp: f64) -> Self {
        self.ramp = Some(Ramp { shape: RampShape::SinSquared, t_ramp });
        self
    }

    /// Envelope value `ḡ(x) ∈ [0, 1]`.
    pub fn envelope_at(&self, x: f64) -> f64 {
        match self.kind {
            ProfileKind::Uniform => 1.0,
            ProfileKind::Enveloped { x_l, x_e } => {
                0.5 * (((x + x_l) / x_e).tanh() - ((x - x_l) / x_e).tanh())
            }
        }
    }

    /// Local coupling `G(x) = 2·g0·cos(qx)·ḡ(x)` at full ramp.
    pub fn coupling_at(&self, x: f64) -> f64 {
        2.0 * self.g0 * (self.q * x).cos() * self.envelope_at(x)
    }

    /// Ramp factor at time `t` (1 once past `t_ramp`, or with no ramp).
    pub fn ramp_factor(&self, t: f64) -> f64 {
        match self.ramp {
            None => 1.0,
            Some(Ramp { shape: RampShape::SinSquared, t_ramp }) => {
                if t <= 0.0 {
                    0.0
                } else if t >= t_ramp {
                    1.0
                } else {
                    let s = (core::f64::consts::PI * t / (2.0 * t_ramp)).sin();
                    s * s
                }
            }
        }
    }
}

/// Momentum distributions of both components at one sample time.
#[derive(Debug, Clone)]
#[cfg_attr(feature = "serde", derive(Serialize))]
pub struct MomentumSnapshot {
    pub time: f64,
    pub plus: Vec<f64>,
    pub minus: Vec<f64>,
}

/// Observables sampled along an evolution.
///
/// `mean_x_lower`/`var_x_lower` condition on the `|-⟩` component (with the
/// series' exclusion window, when one was set); entries are NaN at samples
/// where the conditional norm vanishes.
#[derive(Debug, Clone, Default)]
#[cfg_attr(feature = "serde", derive(Serialize))]
pub struct ObservableSeries {
    pub times: Vec<f64>,
    pub norm: Vec<f64>,
    pub inversion: Vec<f64>,
    pub mean_x: Vec<f64>,
    pub mean_x_lower: Vec<f64>,
    pub var_x: Vec<f64>,
    pub var_x_lower: Vec<f64>,
    /// Exclusion cut used for the conditional columns, if any.
    pub exclusion_cut: Option<f64>,
    /// Momentum bin centres (FFT ordering) for the snapshots below; empty
    /// when no snapshots were requested. Bulk arrays are emitted as CSV by
    /// the CLI rather than serialized inline.
    #[cfg_attr(feature = "serde", serde(skip))]
    pub momentum_grid: Vec<f64>,
    #[cfg_attr(feature = "serde", serde(skip))]
    pub momentum_samples: Vec<MomentumSnapshot>,
}

impl ObservableSeries {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn push_sample(&mut self, t: f64, m: &Measurement) {
        self.times.push(t);
        self.norm.push(m.norm);
        self.inversion.push(m.inversion);
        self.mean_x.push(m.mean_x);
        self.var_x.push(m.var_x);
        self.mean_x_lower.push(m.mean_x_cond.unwrap_or(f64::NAN));
        self.var_x_lower.push(m.var_x_cond.unwrap_or(f64::NAN));
    }

    /// Appends `other` onto `self` (used when an evolution is driven in
    /// chunks).
    pub fn extend_from(&mut self, other: ObservableSeries) {
        self.times.extend(other.times);
        self.norm.extend(other.norm);
        self.inversion.extend(other.inversion);
        self.mean_x.extend(other.mean_x);
        self.mean_x_lower.extend(other.mean_x_lower);
        self.var_x.extend(other.var_x);
        self.var_x_lower.extend(other.var_x_lower);
        if self.momentum_grid.is_empty() {
            self.momentum_grid = other.momentum_grid;
        }
        self.momentum_samples.extend(other.momentum_samples);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_basics() {
        let g = make_grid(8, 0.0, 8.0).unwrap();
        assert_eq!(g.dx(), 1.0);
        assert!((g.dk() - core::f64::consts::PI / 4.0).abs() < 1e-15);
        assert_eq!(g.momentum(0), 0.0);
        assert!((g.momentum(1) - g.dk()).abs() < 1e-15);
        assert!((g.momentum(7) + g.dk()).abs() < 1e-15);
        assert!((g.nyquist() - 4.0 * g.dk()).abs() < 1e-15);
    }

    #[test]
    fn scattering_grid_spacing() {
        let g = make_grid(1 << 13, -4000.0, 4000.0).unwrap();
        assert!((g.dx() - 0.9766).abs() < 1e-4);
        // Band-4 work needs momenta out to ≥ 4q resolved.
        assert!(g.nyquist() > 3.0);
    }

    #[test]
    fn grid_rejects_bad_inputs() {
        assert_eq!(make_grid(12, 0.0, 1.0).unwrap_err(), WavepacketError::BadExtent);
        assert_eq!(make_grid(8, 1.0, 1.0).unwrap_err(), WavepacketError::BadExtent);
        assert_eq!(make_grid(0, 0.0, 1.0).unwrap_err(), WavepacketError::BadExtent);
    }

    #[test]
    fn envelope_shape() {
        let p = CouplingProfile::enveloped(0.01, 1.0, 1500.0, 50.0);
        assert!((p.envelope_at(0.0) - 1.0).abs() < 1e-10);
        assert!(p.envelope_at(1500.0) > 0.49 && p.envelope_at(1500.0) < 0.51);
        assert!(p.envelope_at(1750.0) < 1e-4);
        assert!(p.envelope_at(-1750.0) < 1e-4);
        for x in [-2000.0, -100.0, 0.0, 300.0, 1600.0] {
            let v = p.envelope_at(x);
            assert!((0.0..=1.0 + 1e-12).contains(&v));
        }
    }

    #[test]
    fn ramp_endpoints() {
        let p = CouplingProfile::uniform(0.05, 1.0).with_ramp(100.0);
        assert_eq!(p.ramp_factor(0.0), 0.0);
        assert_eq!(p.ramp_factor(100.0), 1.0);
        assert_eq!(p.ramp_factor(1e9), 1.0);
        let half = p.ramp_factor(50.0);
        assert!((half - 0.5).abs() < 1e-12);
    }

    #[test]
    fn commensurability() {
        let lam = 2.0 * core::f64::consts::PI;
        let g = make_grid(1024, -64.0 * lam, 64.0 * lam).unwrap();
        assert!(g.commensurate_with(1.0));
        let g2 = make_grid(1024, -400.0, 400.0).unwrap();
        assert!(!g2.commensurate_with(1.0));
    }
}
