//! Mass parameters from the local Taylor expansion of a dispersion curve,
//! plus conversion between scaled and laboratory units.


use super::{build_matrix, FloquetError, ModelParams, TruncationSpec};
use crate::numerics::{central_difference, eigenvalues_sym_tridiag, DiffOrder};

#[cfg(feature = "serde")]
use serde::Serialize;

/// Reduced Planck constant, J·s.
pub const HBAR: f64 = 1.054_571_817e-34;

/// Group velocities below this are treated as vanishing (band edge) and leave
/// `m1` undefined. Sits well above the finite-difference noise floor of the
/// eigensolver and well below any resolvable group velocity.
const VG_FLOOR: f64 = 1e-9;

/// Expansion of `E^ν(k)` about `k0`:
/// `E(k) ≈ E0 + k0²/(2m0) + k0(k-k0)/m1 + (k-k0)²/(2m2)`.
///
/// `m1 = k0/v_g` is the group-velocity mass, `m2 = 1/E''(k0)` the curvature
/// (conventional effective) mass. `m0` relates the state energy to the
/// zone-centre energy `E0 = E(0)`; it depends on the zero of energy and is
/// reported for completeness only (see [`EffectiveMasses::M0_NOTE`]). `m0`
/// and `m1` are absent at `k0 = 0`, and `m1` is also absent wherever the
/// group velocity vanishes (band edges).
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize))]
pub struct EffectiveMasses {
    pub k0: f64,
    pub band: usize,
    /// Zone-centre energy `E(0)` of the band.
    pub e0: f64,
    /// Band energy at `k0`.
    pub energy: f64,
    /// Group velocity `E'(k0)`.
    pub v_g: f64,
    pub m0: Option<f64>,
    pub m1: Option<f64>,
    pub m2: f64,
}

impl EffectiveMasses {
    /// Caveat attached to `m0` wherever it is reported.
    pub const M0_NOTE: &'static str =
        "m0 is zero-point dependent (nonphysical); it does not affect propagation";
}

/// Curvature and group-velocity parameters of band `band` at `k0`, from
/// Richardson-extrapolated central differences on the dispersion curve with
/// full step `fd_step` (pass `1e-3 * q` unless there is a reason not to).
///
/// `k0 ± fd_step` must stay inside the zone `(-q, q]`.
pub fn effective_masses(
    p: &ModelParams,
    t: &TruncationSpec,
    k0: f64,
    band: usize,
    fd_step: f64,
) -> Result<EffectiveMasses, FloquetError> {
    if band == 0 || band > t.n_states() {
        return Err(FloquetError::OutOfWindow);
    }
    assert!(fd_step > 0.0, "finite-difference step must be positive");
    let b = band - 1;
    let energy_at = |k: f64| -> Result<f64, FloquetError> {
        Ok(eigenvalues_sym_tridiag(&build_matrix(k, p, t))?[b])
    };

    // Five-point sample at spacing fd_step/2 for one Richardson step.
    let h = 0.5 * fd_step;
    let mut samples = [0.0f64; 5];
    for (i, s) in samples.iter_mut().enumerate() {
        *s = energy_at(k0 + h * (i as f64 - 2.0))?;
    }
    let v_g = central_difference(&samples, h, DiffOrder::First, true)
        .expect("5 symmetric samples by construction");
    let d2 = central_difference(&samples, h, DiffOrder::Second, true)
        .expect("5 symmetric samples by construction");

    let energy = samples[2];
    let e0 = if k0 == 0.0 { energy } else { energy_at(0.0)? };

    let m1 = (k0 != 0.0 && v_g.abs() >= VG_FLOOR).then(|| k0 / v_g);
    let m0 = (k0 != 0.0).then(|| k0 * k0 / (2.0 * (energy - e0)));

    Ok(EffectiveMasses { k0, band, e0, energy, v_g, m0, m1, m2: 1.0 / d2 })
}

/// What a scaled number means, for unit restoration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quantity {
    /// Energies and couplings (angular-frequency-like): divide by `T_s`.
    Energy,
    /// Durations: multiply by `T_s`.
    Time,
    /// Lengths: multiply by `X_s`.
    Length,
}

/// Laboratory scales of a concrete realization: mode wavelength and atomic
/// mass fix `X_s = 1/q̃ = λ/2π` and `T_s = m·X_s²/ħ`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize))]
pub struct PhysicalUnits {
    /// Mode wavelength λ̃, metres.
    pub wavelength: f64,
    /// Atomic mass, kilograms.
    pub atomic_mass: f64,
}

impl PhysicalUnits {
    pub fn new(wavelength: f64, atomic_mass: f64) -> Result<Self, &'static str> {
        if !(wavelength > 0.0) || !(atomic_mass > 0.0) {
            return Err("wavelength and mass must be positive");
        }
        Ok(Self { wavelength, atomic_mass })
    }

    /// Mode wave number q̃ = 2π/λ̃, 1/m.
    pub fn wave_number(&self) -> f64 {
        2.0 * core::f64::consts::PI / self.wavelength
    }

    /// Length scale X_s = 1/q̃, metres.
    pub fn length_scale(&self) -> f64 {
        1.0 / self.wave_number()
    }

    /// Time scale T_s = m·X_s²/ħ, seconds.
    pub fn time_scale(&self) -> f64 {
        let xs = self.length_scale();
        self.atomic_mass * xs * xs / HBAR
    }

    /// Restores laboratory units on a scaled value: energies (and couplings,
    /// detunings) become angular frequencies in 1/s, times become seconds,
    /// lengths become metres.
    pub fn to_physical(&self, scaled_value: f64, kind: Quantity) -> f64 {
        match kind {
            Quantity::Energy => scaled_value / self.time_scale(),
            Quantity::Time => scaled_value * self.time_scale(),
            Quantity::Length => scaled_value * self.length_scale(),
        }
    }
}
