//! Gaussian state preparation, in the bare and the dressed basis, plus the
//! band-population diagnostic.

use alloc::vec::Vec;
use num_complex::Complex64;

use super::{Component, SpatialGrid, SpinorField, WavepacketError};
use crate::floquet::{build_matrix, reduce_to_zone, ModelParams, TruncationSpec};
use crate::numerics::{eig_sym_tridiag, Fft};

/// Boundary probability above which a packet is rejected as not fitting.
const TAIL_TOL: f64 = 1e-8;
/// Synthesis keeps momentum components within this many widths of `k0`.
const SUPPORT_WIDTHS: f64 = 8.0;

/// Gaussian momentum amplitude `exp(-(p-k0)²/(4Δk²))`, centred in position at
/// `x0` (spatial width `Δx = 1/(2Δk)`, a minimum-uncertainty packet).
fn gaussian_amplitude(p: f64, k0: f64, delta_k: f64, x0: f64, x_min: f64) -> Complex64 {
    let arg = (p - k0) / (2.0 * delta_k);
    let mag = (-arg * arg).exp();
    // The library FFT pairs bin j with exp(+i p (x - x_min)) on inversion, so
    // anchoring to absolute coordinates costs a phase e^{i p x_min}; centring
    // at x0 costs e^{-i p x0}.
    let phase = p * (x_min - x0);
    mag * Complex64::new(phase.cos(), phase.sin())
}

fn check_fits(state: &SpinorField) -> Result<(), WavepacketError> {
    // Position-space tails at the (periodic) boundary.
    let n = state.grid.n();
    let cells = 4.min(n / 2);
    let mut edge = 0.0;
    for j in (0..cells).chain(n - cells..n) {
        edge += state.psi_plus[j].norm_sqr() + state.psi_minus[j].norm_sqr();
    }
    if edge * state.grid.dx() > TAIL_TOL {
        return Err(WavepacketError::PacketTooWide);
    }
    Ok(())
}

/// Minimum-uncertainty Gaussian in a single internal component: momentum
/// centre `k0`, momentum width `delta_k`, position centre `x0`.
pub fn init_bare_gaussian(
    grid: &SpatialGrid,
    k0: f64,
    delta_k: f64,
    x0: f64,
    component: Component,
) -> Result<SpinorField, WavepacketError> {
    assert!(delta_k > 0.0, "momentum width must be positive");
    // Momentum-space tail at the Nyquist edge.
    if ((grid.nyquist() - k0.abs()) / (2.0 * delta_k)).powi(2) < -(TAIL_TOL.ln()) {
        return Err(WavepacketError::PacketTooWide);
    }

    let mut buf: Vec<Complex64> = grid
        .momenta()
        .iter()
        .map(|&p| gaussian_amplitude(p, k0, delta_k, x0, grid.x_min()))
        .collect();
    let plan = Fft::new(grid.n()).expect("grid n is a power of two");
    plan.inverse(&mut buf);

    let mut state = SpinorField::zero(grid.clone());
    match component {
        Component::Plus => state.psi_plus = buf,
        Component::Minus => state.psi_minus = buf,
    }
    state.normalize();
    check_fits(&state)?;
    Ok(state)
}

/// For physical momentum `p`, the unique `(μ, k)` with the requested μ
/// parity and `k = p − μq ∈ (-q, q]`.
fn zone_decompose(p: f64, q: f64, want_odd: bool) -> (i32, f64) {
    let k_any = reduce_to_zone(p, q);
    // μ0 is even by construction of the 2q-wide zone fold.
    let mu0 = ((p - k_any) / q).round() as i32;
    debug_assert!(mu0 % 2 == 0);
    if !want_odd {
        return (mu0, k_any);
    }
    // Step μ by one, keeping k inside (-q, q].
    let k_dn = k_any + q; // μ0 - 1
    if k_dn <= q {
        (mu0 - 1, k_dn)
    } else {
        (mu0 + 1, k_any - q)
    }
}

/// Dressed coefficients `c_μ^ν(k)` for the sampled zone momenta, sign-aligned
/// along ascending `k` so the synthesized packet sees a smooth gauge.
struct CoeffTable {
    ks: Vec<f64>,
    /// One window-sized coefficient vector per `k`.
    coeffs: Vec<Vec<f64>>,
    half_width: i32,
}

impl CoeffTable {
    fn build(
        ks: &mut Vec<f64>,
        p: &ModelParams,
        t: &TruncationSpec,
        band: usize,
    ) -> Result<Self, WavepacketError> {
        ks.sort_by(|a, b| a.partial_cmp(b).unwrap_or(core::cmp::Ordering::Equal));
        ks.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
        let mut coeffs: Vec<Vec<f64>> = Vec::with_capacity(ks.len());
        for &k in ks.iter() {
            let dec = eig_sym_tridiag(&build_matrix(k, p, t)).map_err(crate::floquet::FloquetError::from)?;
            let mut v = dec.vector(band - 1).to_vec();
            if let Some(prev) = coeffs.last() {
                let dot: f64 = prev.iter().zip(&v).map(|(a, b)| a * b).sum();
                if dot < 0.0 {
                    for c in v.iter_mut() {
                        *c = -*c;
                    }
                }
            }
            coeffs.push(v);
        }
        Ok(Self { ks: core::mem::take(ks), coeffs, half_width: t.half_width() })
    }

    fn coeff(&self, k: f64, mu: i32) -> f64 {
        let idx = match self.ks.binary_search_by(|v| v.partial_cmp(&k).unwrap()) {
            Ok(i) => i,
            Err(i) => {
                // Nearest sampled k (they are exact grid values, so this only
                // resolves float noise).
                if i == 0 {
                    0
                } else if i >= self.ks.len() {
                    self.ks.len() - 1
                } else if (self.ks[i] - k).abs() < (k - self.ks[i - 1]).abs() {
                    i
                } else {
                    i - 1
                }
            }
        };
        let j = mu + self.half_width;
        if (0..self.coeffs[idx].len() as i32).contains(&j) {
            self.coeffs[idx][j as usize]
        } else {
            0.0
        }
    }
}

/// Spectral synthesis of a Gaussian packet within one band: every grid
/// momentum `p = k + μq` in the truncation window receives amplitude
/// `φ(k)·c_μ^ν(k)` in the component fixed by the μ parity. The packet is
/// centred at `x = 0` and normalized.
pub fn init_dressed_gaussian(
    grid: &SpatialGrid,
    p: &ModelParams,
    t: &TruncationSpec,
    band: usize,
    k0: f64,
    delta_k: f64,
) -> Result<SpinorField, WavepacketError> {
    assert!(delta_k > 0.0, "momentum width must be positive");
    assert!(band >= 1 && band <= t.n_states(), "band outside the window");
    let q = p.q;

    // Mass of |φ|² outside the zone (-q, q]: the synthesis folds momenta by
    // construction, so reject packets that straddle a zone edge.
    let tail = |edge: f64| 0.5 * libm::erfc((edge / delta_k) / core::f64::consts::SQRT_2);
    let outside = tail(q - k0) + tail(q + k0);
    if outside > 1e-6 {
        return Err(WavepacketError::ZoneBoundaryOverlap { outside_mass: outside });
    }

    // Collect the distinct zone momenta feeding the packet.
    let support = SUPPORT_WIDTHS * delta_k;
    let mut ks: Vec<f64> = Vec::new();
    for &pm in grid.momenta() {
        for want_odd in [false, true] {
            let (mu, k) = zone_decompose(pm, q, want_odd);
            if (k - k0).abs() <= support && t.row_of_mu(mu).is_some() {
                ks.push(k);
            }
        }
    }
    if ks.is_empty() {
        return Err(WavepacketError::PacketTooWide);
    }
    let table = CoeffTable::build(&mut ks, p, t, band)?;

    let mut plus: Vec<Complex64> = alloc::vec![Complex64::default(); grid.n()];
    let mut minus = plus.clone();
    for (j, &pm) in grid.momenta().iter().enumerate() {
        for want_odd in [false, true] {
            let (mu, k) = zone_decompose(pm, q, want_odd);
            if (k - k0).abs() > support || t.row_of_mu(mu).is_none() {
                continue;
            }
            // φ is evaluated at the zone momentum; the anchoring phase at
            // the physical one.
            let arg = (k - k0) / (2.0 * delta_k);
            let mag = (-arg * arg).exp();
            let phase = pm * grid.x_min();
            let a = mag
                * table.coeff(k, mu)
                * Complex64::new(phase.cos(), phase.sin());
            if want_odd {
                plus[j] += a;
            } else {
                minus[j] += a;
            }
        }
    }

    let plan = Fft::new(grid.n()).expect("grid n is a power of two");
    plan.inverse(&mut plus);
    plan.inverse(&mut minus);
    let mut state = SpinorField::zero(grid.clone());
    state.psi_plus = plus;
    state.psi_minus = minus;
    state.normalize();
    check_fits(&state)?;
    Ok(state)
}

/// Projects a state onto the dressed bands: returns the population of bands
/// `1..=num_bands` (their sum approaches the norm as `num_bands` grows).
///
/// Requires a grid commensurate with the mode (`q` on the momentum grid), so
/// every fiber `{k + μq}` lands on exact bins.
pub fn band_populations(
    state: &SpinorField,
    p: &ModelParams,
    t: &TruncationSpec,
    num_bands: usize,
) -> Result<Vec<f64>, WavepacketError> {
    let grid = &state.grid;
    let q = p.q;
    if !grid.commensurate_with(q) {
        return Err(WavepacketError::IncommensurateGrid);
    }
    let n = grid.n();
    let q_bins = (q / grid.dk()).round() as i64;

    let mut plus = state.psi_plus.clone();
    let mut minus = state.psi_minus.clone();
    let plan = Fft::new(n).expect("grid n is a power of two");
    plan.forward(&mut plus);
    plan.forward(&mut minus);
    // Momentum-space normalization so Σ|a|² over all bins equals the norm.
    let w = (grid.dx() / n as f64).sqrt();

    let half = t.half_width();
    let dk = grid.dk();
    let mut pops = alloc::vec![0.0f64; num_bands];

    // Enumerate fibers by their zone momentum bins: k ∈ (-q, q].
    for jk in 0..n {
        let k = grid.momentum(jk);
        if !(k > -q && k <= q) {
            continue;
        }
        // Gather the fiber amplitude over the window; skip empty fibers fast.
        let mut fiber: Vec<Complex64> = Vec::with_capacity(t.n_states());
        let mut weight = 0.0;
        for mu in -half..=half {
            let pm = k + mu as f64 * q;
            if pm.abs() > grid.nyquist() - 0.5 * dk {
                fiber.push(Complex64::default());
                continue;
            }
            // Bin of physical momentum pm.
            let bin_signed = jk as i64 + mu as i64 * q_bins;
            let bin = bin_signed.rem_euclid(n as i64) as usize;
            let a = if mu % 2 == 0 { minus[bin] } else { plus[bin] } * w;
            weight += a.norm_sqr();
            fiber.push(a);
        }
        if weight < 1e-300 {
            continue;
        }
        let dec = eig_sym_tridiag(&build_matrix(k, p, t)).map_err(crate::floquet::FloquetError::from)?;
        for (b, pop) in pops.iter_mut().enumerate() {
            let mut acc = Complex64::default();
            for (c, a) in dec.vector(b).iter().zip(&fiber) {
                acc += a * c;
            }
            *pop += acc.norm_sqr();
        }
    }
    Ok(pops)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wavepacket::make_grid;

    fn lam() -> f64 {
        2.0 * core::f64::consts::PI
    }

    #[test]
    fn bare_gaussian_norm_and_center() {
        let grid = make_grid(2048, -128.0 * lam(), 128.0 * lam()).unwrap();
        let st = init_bare_gaussian(&grid, 0.25, 0.01, 0.0, Component::Minus).unwrap();
        assert!((st.norm() - 1.0).abs() < 1e-12);
        assert_eq!(st.probability_within(Some(Component::Plus), None), 0.0);

        // Measured ⟨k⟩ and momentum variance against construction.
        let probs = st.momentum_probabilities(Component::Minus);
        let mut mean = 0.0;
        let mut m2 = 0.0;
        for (j, &w) in probs.iter().enumerate() {
            mean += grid.momentum(j) * w;
        }
        for (j, &w) in probs.iter().enumerate() {
            m2 += (grid.momentum(j) - mean).powi(2) * w;
        }
        assert!((mean - 0.25).abs() < 1e-6, "⟨k⟩ = {mean}");
        assert!((m2 - 1e-4).abs() < 1e-7, "Δk² = {m2}");
    }

    #[test]
    fn bare_gaussian_positions_at_x0() {
        let grid = make_grid(2048, -128.0 * lam(), 128.0 * lam()).unwrap();
        let st = init_bare_gaussian(&grid, 0.0, 0.02, -200.0, Component::Minus).unwrap();
        let mut mean = 0.0;
        for j in 0..grid.n() {
            mean += grid.x(j) * st.psi_minus[j].norm_sqr() * grid.dx();
        }
        assert!((mean + 200.0).abs() < 1e-6, "⟨x⟩ = {mean}");
    }

    #[test]
    fn too_wide_packets_are_rejected() {
        let grid = make_grid(256, -20.0, 20.0).unwrap();
        // Spatial width 1/(2Δk) = 50 ≫ the domain.
        assert_eq!(
            init_bare_gaussian(&grid, 0.0, 0.01, 0.0, Component::Minus).unwrap_err(),
            WavepacketError::PacketTooWide
        );
        // Packet centred at the edge.
        let grid2 = make_grid(2048, -100.0, 100.0).unwrap();
        assert_eq!(
            init_bare_gaussian(&grid2, 0.0, 0.1, 99.0, Component::Minus).unwrap_err(),
            WavepacketError::PacketTooWide
        );
    }

    #[test]
    fn zone_decomposition() {
        let q = 1.0;
        let (mu, k) = zone_decompose(0.25, q, false);
        assert_eq!(mu, 0);
        assert!((k - 0.25).abs() < 1e-12);
        let (mu, k) = zone_decompose(0.25, q, true);
        assert!((mu, k) == (-1, 1.25) || (mu, k) == (1, -0.75));
        assert!(k > -q && k <= q);
        let (mu, k) = zone_decompose(-1.75, q, false);
        assert_eq!(mu, -2);
        assert!((k - 0.25).abs() < 1e-12);
        let (mu, k) = zone_decompose(2.25, q, true);
        assert_eq!(mu % 2 != 0, true);
        assert!(k > -q && k <= q);
        assert!((k + mu as f64 * q - 2.25).abs() < 1e-12);
    }

    #[test]
    fn dressed_reduces_to_bare_at_zero_coupling() {
        let grid = make_grid(2048, -128.0 * lam(), 128.0 * lam()).unwrap();
        let p = ModelParams::new(0.0, 0.0);
        let t = TruncationSpec::new(21).unwrap();
        let dressed = init_dressed_gaussian(&grid, &p, &t, 1, 0.25, 0.01).unwrap();
        let bare = init_bare_gaussian(&grid, 0.25, 0.01, 0.0, Component::Minus).unwrap();
        let mut overlap = Complex64::default();
        for j in 0..grid.n() {
            overlap += bare.psi_minus[j].conj() * dressed.psi_minus[j];
        }
        let f = (overlap * grid.dx()).norm();
        assert!((f - 1.0).abs() < 1e-9, "overlap {f}");
        assert!(dressed.probability_within(Some(Component::Plus), None) < 1e-20);
    }

    #[test]
    fn dressed_overlap_with_bare_matches_fidelity() {
        let grid = make_grid(2048, -128.0 * lam(), 128.0 * lam()).unwrap();
        let p = ModelParams::new(0.01, 0.0);
        let t = TruncationSpec::new(41).unwrap();
        let dressed = init_dressed_gaussian(&grid, &p, &t, 1, 0.25, 0.01).unwrap();
        let bare = init_bare_gaussian(&grid, 0.25, 0.01, 0.0, Component::Minus).unwrap();
        let mut overlap = Complex64::default();
        for j in 0..grid.n() {
            overlap += bare.psi_minus[j].conj() * dressed.psi_minus[j];
        }
        let f = (overlap * grid.dx()).norm_sqr();
        assert!((f - 0.998).abs() < 1e-3, "squared overlap {f}");
    }

    #[test]
    fn zone_boundary_overlap_rejected() {
        let grid = make_grid(2048, -128.0 * lam(), 128.0 * lam()).unwrap();
        let p = ModelParams::new(0.01, 0.0);
        let t = TruncationSpec::new(21).unwrap();
        match init_dressed_gaussian(&grid, &p, &t, 1, 0.999, 0.05) {
            Err(WavepacketError::ZoneBoundaryOverlap { outside_mass }) => {
                assert!(outside_mass > 1e-6);
            }
            other => panic!("expected zone overlap, got {other:?}"),
        }
    }

    #[test]
    fn band_populations_of_synthesized_packet() {
        let grid = make_grid(2048, -128.0 * lam(), 128.0 * lam()).unwrap();
        let p = ModelParams::new(0.05, 0.0);
        let t = TruncationSpec::new(21).unwrap();
        let st = init_dressed_gaussian(&grid, &p, &t, 1, 0.25, 0.01).unwrap();
        let pops = band_populations(&st, &p, &t, 4).unwrap();
        assert!(pops[0] > 0.999999, "band-1 population {}", pops[0]);
        assert!(pops[1] < 1e-6);

        let st2 = init_dressed_gaussian(&grid, &p, &t, 2, 0.25, 0.01).unwrap();
        let pops2 = band_populations(&st2, &p, &t, 4).unwrap();
        assert!(pops2[1] > 0.999999, "band-2 population {}", pops2[1]);
    }

    #[test]
    fn band_populations_need_commensurate_grid() {
        let grid = make_grid(1024, -400.0, 400.0).unwrap();
        let p = ModelParams::new(0.05, 0.0);
        let t = TruncationSpec::new(9).unwrap();
        let st = init_bare_gaussian(&grid, 0.25, 0.05, 0.0, Component::Minus).unwrap();
        assert_eq!(
            band_populations(&st, &p, &t, 2).unwrap_err(),
            WavepacketError::IncommensurateGrid
        );
    }

    #[test]
    fn bare_packet_band_split_at_gap() {
        // A bare packet at the zone edge decomposes 50/50 into bands 1 and 2.
        let grid = make_grid(1024, -64.0 * lam(), 64.0 * lam()).unwrap();
        let p = ModelParams::new(0.05, 0.0);
        let t = TruncationSpec::new(21).unwrap();
        let st = init_bare_gaussian(&grid, 0.5, 0.02, 0.0, Component::Minus).unwrap();
        let pops = band_populations(&st, &p, &t, 3).unwrap();
        assert!((pops[0] - 0.5).abs() < 0.02, "band 1 {}", pops[0]);
        assert!((pops[1] - 0.5).abs() < 0.02, "band 2 {}", pops[1]);
    }
}
