//! Quasi-momentum band structure of the coupled atom-mode problem.
//!
//! In the scaled units of the crate the two-component Hamiltonian is
//!
//! ```text
//! H = -(1/2) d²/dx² + [[ Δ/2,            2 g₀√n cos(qx) ],
//!                      [ 2 g₀√n cos(qx), -Δ/2           ]]
//! ```
//!
//! Expanded over the bare states `|k + μq⟩` (internal `|-⟩` for even μ,
//! `|+⟩` for odd μ) it becomes, per quasi-momentum `k`, a real symmetric
//! tridiagonal matrix with diagonal `(k + μq)²/2 − (−1)^μ Δ/2` and constant
//! off-diagonal `g₀√n`. Everything in this module is a view on that matrix:
//! dispersion curves, dressed-state coefficients, fidelities, gap sizes,
//! closed-form approximations and the mass parameters read off the band
//! curvature.
//!
//! Quasi-momenta live in the zone `(-q, q]`; the zone is `2q` wide because a
//! half-period displacement combined with an internal inversion commutes with
//! the Hamiltonian. Bands are numbered `1, 2, 3, …` by ascending energy at
//! each `k` (no adiabatic continuation through avoided crossings).

mod analytic;
mod masses;

pub use analytic::{
    continued_fraction_energy, perturbative_energy_band1, truncation_error,
    ContinuedFractionEnergy,
};
pub use masses::{effective_masses, EffectiveMasses, PhysicalUnits, Quantity, HBAR};

use alloc::vec::Vec;
use core::fmt;

use crate::numerics::{
    eig_sym_tridiag, eigenvalues_sym_tridiag, NumericsError, SymTridiag,
};

#[cfg(feature = "serde")]
use serde::Serialize;

/// Errors from band-structure operations.
#[derive(Debug, Clone, PartialEq)]
pub enum FloquetError {
    /// Propagated eigensolver failure.
    Numerics(NumericsError),
    /// Continued-fraction iterates left the trust region (started too close
    /// to a pole or a crossing).
    Diverged { last: f64 },
    /// The closed-form band-1 expansion has a pole at `q² + 2Δ = 0`.
    ExpansionPole,
    /// Requested band or bare index outside the truncation window.
    OutOfWindow,
}

impl fmt::Display for FloquetError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Numerics(e) => write!(f, "numerics: {e}"),
            Self::Diverged { last } => {
                write!(f, "continued-fraction iteration diverged (last iterate {last:e})")
            }
            Self::ExpansionPole => write!(f, "expansion pole: q² + 2Δ too close to zero"),
            Self::OutOfWindow => write!(f, "band or bare index outside the truncation window"),
        }
    }
}

impl core::error::Error for FloquetError {}

impl From<NumericsError> for FloquetError {
    fn from(e: NumericsError) -> Self {
        Self::Numerics(e)
    }
}

/// Scaled model parameters of one excitation sector.
///
/// `g0` and `delta` are in recoil units (`q = 1` convention); the matrix
/// off-diagonal is the effective coupling `g0·√n` for the sector with `n`
/// photons in the relevant bare state pair.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize))]
pub struct ModelParams {
    pub g0: f64,
    pub delta: f64,
    pub q: f64,
    pub n_photons: u32,
}

impl ModelParams {
    /// Plain constructor with `q = 1`, one photon.
    pub fn new(g0: f64, delta: f64) -> Self {
        Self { g0, delta, q: 1.0, n_photons: 1 }
    }

    pub fn with_q(mut self, q: f64) -> Self {
        self.q = q;
        self
    }

    pub fn with_photons(mut self, n: u32) -> Self {
        self.n_photons = n;
        self
    }

    /// Effective matrix coupling `g0·√n`.
    pub fn g_eff(&self) -> f64 {
        self.g0 * (self.n_photons as f64).sqrt()
    }

    pub fn validate(&self) -> Result<(), &'static str> {
        if !(self.q > 0.0) {
            return Err("q must be positive");
        }
        if self.n_photons < 1 {
            return Err("n_photons must be at least 1");
        }
        if !(self.g0 >= 0.0) {
            return Err("g0 must be non-negative");
        }
        if !self.delta.is_finite() || !self.g0.is_finite() {
            return Err("parameters must be finite");
        }
        Ok(())
    }
}

/// Size of the bare-state window `μ ∈ [-(n-1)/2, (n-1)/2]`, centred on μ = 0.
/// Chosen odd so the centre state couples to equally many states on both
/// sides.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(Serialize))]
pub struct TruncationSpec {
    n_states: usize,
}

impl TruncationSpec {
    pub fn new(n_states: usize) -> Result<Self, &'static str> {
        if n_states == 0 || n_states % 2 == 0 {
            return Err("n_states must be odd and positive");
        }
        Ok(Self { n_states })
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    /// Half-width of the window: largest |μ| included.
    pub fn half_width(&self) -> i32 {
        ((self.n_states - 1) / 2) as i32
    }

    /// Bare index of matrix row `j`.
    pub fn mu_of_row(&self, j: usize) -> i32 {
        j as i32 - self.half_width()
    }

    /// Matrix row of bare index μ, if inside the window.
    pub fn row_of_mu(&self, mu: i32) -> Option<usize> {
        let j = mu + self.half_width();
        (0..self.n_states as i32).contains(&j).then_some(j as usize)
    }
}

/// One eigenstate of the truncated matrix: band `ν ≥ 1` at quasi-momentum
/// `k`, with the bare-state expansion coefficients over the window.
#[derive(Debug, Clone)]
pub struct DressedState {
    pub k: f64,
    /// 1-based band index, ascending energy.
    pub band: usize,
    pub energy: f64,
    coeffs: Vec<f64>,
    half_width: i32,
}

impl DressedState {
    /// Coefficient of bare state μ (zero outside the window).
    pub fn coeff(&self, mu: i32) -> f64 {
        let j = mu + self.half_width;
        if (0..self.coeffs.len() as i32).contains(&j) {
            self.coeffs[j as usize]
        } else {
            0.0
        }
    }

    /// Coefficients over the window, `μ = -half_width ..= half_width`.
    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn half_width(&self) -> i32 {
        self.half_width
    }
}

/// Band energies sampled on a quasi-momentum grid.
#[derive(Debug, Clone)]
#[cfg_attr(feature = "serde", derive(Serialize))]
pub struct DispersionTable {
    pub k_grid: Vec<f64>,
    /// 1-based band indices, ascending.
    pub bands: Vec<usize>,
    /// `energies[b][i]` pairs `bands[b]` with `k_grid[i]`.
    pub energies: Vec<Vec<f64>>,
}

impl DispersionTable {
    pub fn band_curve(&self, band: usize) -> Option<&[f64]> {
        let idx = self.bands.iter().position(|&b| b == band)?;
        Some(&self.energies[idx])
    }
}

/// Folds `k` into the first zone `(-q, q]`.
pub fn reduce_to_zone(k: f64, q: f64) -> f64 {
    let width = 2.0 * q;
    let r = (q - k) % width;
    let r = if r < 0.0 { r + width } else { r };
    q - r
}

/// Bare-state energy `(k + μq)²/2 − (−1)^μ Δ/2`.
pub fn bare_energy(mu: i32, k: f64, p: &ModelParams) -> f64 {
    let kin = k + mu as f64 * p.q;
    let sign = if mu % 2 == 0 { 1.0 } else { -1.0 };
    0.5 * kin * kin - sign * 0.5 * p.delta
}

/// Builds the truncated matrix at quasi-momentum `k`: diagonal entries are
/// the bare energies over the window, every off-diagonal entry is `g_eff`.
pub fn build_matrix(k: f64, p: &ModelParams, t: &TruncationSpec) -> SymTridiag {
    let n = t.n_states();
    let mut diag = Vec::with_capacity(n);
    for j in 0..n {
        diag.push(bare_energy(t.mu_of_row(j), k, p));
    }
    let offdiag = alloc::vec![p.g_eff(); n - 1];
    SymTridiag::new(diag, offdiag)
}

/// Lowest `num_bands` dressed states at `k`, bands numbered from 1 by
/// ascending energy.
pub fn dressed_states(
    k: f64,
    p: &ModelParams,
    t: &TruncationSpec,
    num_bands: usize,
) -> Result<Vec<DressedState>, FloquetError> {
    if num_bands > t.n_states() {
        return Err(FloquetError::OutOfWindow);
    }
    let dec = eig_sym_tridiag(&build_matrix(k, p, t))?;
    Ok((0..num_bands)
        .map(|j| DressedState {
            k,
            band: j + 1,
            energy: dec.values()[j],
            coeffs: dec.vector(j).to_vec(),
            half_width: t.half_width(),
        })
        .collect())
}

/// Band energies over a quasi-momentum grid (eigenvalues only; no vectors).
pub fn dispersion(
    p: &ModelParams,
    t: &TruncationSpec,
    k_grid: &[f64],
    num_bands: usize,
) -> Result<DispersionTable, FloquetError> {
    if num_bands > t.n_states() {
        return Err(FloquetError::OutOfWindow);
    }
    let mut energies = alloc::vec![Vec::with_capacity(k_grid.len()); num_bands];
    for &k in k_grid {
        let vals = eigenvalues_sym_tridiag(&build_matrix(k, p, t))?;
        for (b, row) in energies.iter_mut().enumerate() {
            row.push(vals[b]);
        }
    }
    Ok(DispersionTable {
        k_grid: k_grid.to_vec(),
        bands: (1..=num_bands).collect(),
        energies,
    })
}

/// Gap `E^{ν+1}(k*) − E^ν(k*)` above band `lower_band` at `k_star`.
pub fn band_gap(
    p: &ModelParams,
    t: &TruncationSpec,
    k_star: f64,
    lower_band: usize,
) -> Result<f64, FloquetError> {
    if lower_band == 0 || lower_band + 1 > t.n_states() {
        return Err(FloquetError::OutOfWindow);
    }
    let vals = eigenvalues_sym_tridiag(&build_matrix(k_star, p, t))?;
    Ok(vals[lower_band] - vals[lower_band - 1])
}

/// Squared overlap `F^{ν,μ}(k) = |c_μ^ν(k)|²` between dressed state ν and
/// bare state μ.
pub fn fidelity(
    nu: usize,
    mu: i32,
    k: f64,
    p: &ModelParams,
    t: &TruncationSpec,
) -> Result<f64, FloquetError> {
    if t.row_of_mu(mu).is_none() || nu == 0 || nu > t.n_states() {
        return Err(FloquetError::OutOfWindow);
    }
    let dec = eig_sym_tridiag(&build_matrix(k, p, t))?;
    let c = dec.vector(nu - 1)[t.row_of_mu(mu).unwrap()];
    Ok(c * c)
}

/// Band index ν maximizing `F^{ν,μ}(k)`; ties resolve toward the lower band.
pub fn dominant_band(
    p: &ModelParams,
    t: &TruncationSpec,
    k: f64,
    mu: i32,
) -> Result<usize, FloquetError> {
    let row = t.row_of_mu(mu).ok_or(FloquetError::OutOfWindow)?;
    let dec = eig_sym_tridiag(&build_matrix(k, p, t))?;
    let mut best = (0usize, -1.0f64);
    for j in 0..t.n_states() {
        let f = dec.vector(j)[row].powi(2);
        if f > best.1 {
            best = (j, f);
        }
    }
    Ok(best.0 + 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    const T3: fn() -> TruncationSpec = || TruncationSpec::new(3).unwrap();

    #[test]
    fn bare_energy_values() {
        let p = ModelParams::new(0.0, 0.0);
        assert_eq!(bare_energy(0, 0.0, &p), 0.0);
        assert_eq!(bare_energy(1, 0.0, &p), 0.5);
        let pd = ModelParams::new(0.0, 1.0);
        assert_eq!(bare_energy(0, 0.0, &pd), -0.5);
        assert_eq!(bare_energy(1, 0.0, &pd), 1.0);
        assert_eq!(bare_energy(-1, 0.0, &pd), 1.0);
    }

    #[test]
    fn matrix_entries() {
        let p = ModelParams::new(0.05, 0.0);
        let m = build_matrix(0.0, &p, &T3());
        assert_eq!(m.diag(), &[0.5, 0.0, 0.5]);
        assert_eq!(m.offdiag(), &[0.05, 0.05]);

        let pd = ModelParams::new(0.05, 1.0);
        let md = build_matrix(0.0, &pd, &T3());
        assert_eq!(md.diag(), &[1.0, -0.5, 1.0]);

        let p0 = ModelParams::new(0.0, 0.3);
        let m0 = build_matrix(0.2, &p0, &T3());
        assert_eq!(m0.offdiag(), &[0.0, 0.0]);
    }

    #[test]
    fn photon_number_scales_coupling() {
        let p = ModelParams::new(0.05, 0.0).with_photons(4);
        assert!((p.g_eff() - 0.1).abs() < 1e-15);
        let m = build_matrix(0.0, &p, &T3());
        assert_eq!(m.offdiag(), &[0.1, 0.1]);
    }

    #[test]
    fn uncoupled_limit_band_one_is_pure() {
        let p = ModelParams::new(1e-9, 0.0);
        let t = TruncationSpec::new(21).unwrap();
        let states = dressed_states(0.25, &p, &t, 1).unwrap();
        assert!((states[0].coeff(0).abs() - 1.0).abs() < 1e-9);
        for mu in [-2, -1, 1, 2] {
            assert!(states[0].coeff(mu).abs() < 1e-6);
        }
    }

    #[test]
    fn coefficient_parity_at_k_zero() {
        // Centred avoided crossings make the k = 0 solutions even or odd in μ.
        // Bands 4 and 5 form a quasi-degenerate |μ|=2 pair (split ~ g⁴), which
        // bounds how cleanly finite arithmetic can keep them parity-pure.
        let p = ModelParams::new(0.05, 0.0);
        let t = TruncationSpec::new(41).unwrap();
        let states = dressed_states(0.0, &p, &t, 4).unwrap();
        for st in &states {
            let tol = if st.band <= 3 { 1e-10 } else { 1e-6 };
            // Classify parity off the strongest ± pair.
            let mut strongest = 1;
            let mut best = -1.0f64;
            for mu in 1..=t.half_width() {
                let s = st.coeff(mu).abs() + st.coeff(-mu).abs();
                if s > best {
                    best = s;
                    strongest = mu;
                }
            }
            let even =
                (st.coeff(strongest) - st.coeff(-strongest)).abs() < (st.coeff(strongest)).abs();
            for mu in 1..=t.half_width() {
                let diff = if even {
                    (st.coeff(mu) - st.coeff(-mu)).abs()
                } else {
                    (st.coeff(mu) + st.coeff(-mu)).abs()
                };
                assert!(diff < tol, "band {} μ={mu}: parity residual {diff:e}", st.band);
            }
        }
        // Band 1 even, band 2 odd at Δ=0.
        assert!((states[0].coeff(1) - states[0].coeff(-1)).abs() < 1e-10);
        assert!((states[1].coeff(1) + states[1].coeff(-1)).abs() < 1e-10);
    }

    #[test]
    fn coefficients_asymmetric_off_zone_centre() {
        let p = ModelParams::new(0.05, 0.0);
        let t = TruncationSpec::new(41).unwrap();
        let states = dressed_states(0.25, &p, &t, 1).unwrap();
        let asym = (states[0].coeff(1).abs() - states[0].coeff(-1).abs()).abs();
        assert!(asym > 1e-4, "coefficients should lose the μ → -μ symmetry");
    }

    #[test]
    fn free_dispersion_and_k_parity() {
        let p = ModelParams::new(0.0, 0.0);
        let t = TruncationSpec::new(21).unwrap();
        let table = dispersion(&p, &t, &[0.3], 1).unwrap();
        assert!((table.energies[0][0] - 0.045).abs() < 1e-14);

        let pg = ModelParams::new(0.07, 0.4);
        let plus = eigenvalues_sym_tridiag(&build_matrix(0.37, &pg, &t)).unwrap();
        let minus = eigenvalues_sym_tridiag(&build_matrix(-0.37, &pg, &t)).unwrap();
        for (a, b) in plus.iter().zip(&minus) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn gap_is_two_g0_at_weak_coupling() {
        let t = TruncationSpec::new(201).unwrap();
        for g0 in [0.005, 0.01, 0.02] {
            let p = ModelParams::new(g0, 0.0);
            let gap = band_gap(&p, &t, 0.5, 1).unwrap();
            assert!((gap - 2.0 * g0).abs() < 5.0 * g0 * g0, "g0={g0}: gap={gap}");
        }
        let p0 = ModelParams::new(0.0, 0.0);
        assert!(band_gap(&p0, &t, 0.5, 1).unwrap().abs() < 1e-12);
    }

    #[test]
    fn fidelity_point_and_normalization() {
        let p = ModelParams::new(0.01, 0.0);
        let t = TruncationSpec::new(201).unwrap();
        let f = fidelity(1, 0, 0.25, &p, &t).unwrap();
        assert!((f - 0.998).abs() < 1e-3, "F = {f}");
        let total: f64 = (-t.half_width()..=t.half_width())
            .map(|mu| fidelity(1, mu, 0.25, &p, &t).unwrap())
            .sum();
        assert!((total - 1.0).abs() < 1e-10);
    }

    #[test]
    fn dominant_band_cases() {
        let t = TruncationSpec::new(201).unwrap();
        let p = ModelParams::new(0.01, 0.0);
        assert_eq!(dominant_band(&p, &t, 0.25, 0).unwrap(), 1);
        // In the detuning window (-3q²/4, -q²/4) the lowest band is μ = -1.
        let pd = ModelParams::new(0.01, -0.5);
        assert_eq!(dominant_band(&pd, &t, 0.25, -1).unwrap(), 1);
        // Uncoupled: exact bare ordering at k = q/4.
        let p0 = ModelParams::new(0.0, 0.0);
        assert_eq!(dominant_band(&p0, &t, 0.25, 0).unwrap(), 1);
        assert_eq!(dominant_band(&p0, &t, 0.25, -1).unwrap(), 2);
        assert_eq!(dominant_band(&p0, &t, 0.25, 1).unwrap(), 3);
    }

    #[test]
    fn half_period_shift_symmetry() {
        // At Δ=0 the matrix is invariant under μ → μ+1 with k → k−q: compare
        // overlapping diagonal entries exactly.
        let p = ModelParams::new(0.13, 0.0);
        let t = TruncationSpec::new(21).unwrap();
        let a = build_matrix(0.4, &p, &t);
        let b = build_matrix(0.4 - 1.0, &p, &t);
        // Row j of `a` (bare index μ) matches row j+1 of `b` (bare index μ+1).
        for j in 0..t.n_states() - 1 {
            assert_eq!(a.diag()[j], b.diag()[j + 1]);
        }
    }

    #[test]
    fn zone_reduction() {
        let q = 1.0;
        assert!((reduce_to_zone(0.3, q) - 0.3).abs() < 1e-15);
        assert!((reduce_to_zone(1.0, q) - 1.0).abs() < 1e-15);
        assert!((reduce_to_zone(-1.0, q) - 1.0).abs() < 1e-15);
        assert!((reduce_to_zone(2.3, q) - 0.3).abs() < 1e-12);
        assert!((reduce_to_zone(-2.7, q) - (-0.7)).abs() < 1e-12);
    }
}
