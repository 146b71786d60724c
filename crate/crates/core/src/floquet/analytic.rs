//! Continued-fraction and series approximations to the band energies.


use super::{bare_energy, FloquetError, ModelParams};
use crate::numerics::eigenvalues_sym_tridiag;

/// Iterates overflow past this magnitude count as divergence.
const DIVERGENCE_BOUND: f64 = 1e8;
/// Fixed-point convergence threshold on |ΔE| between iterates.
const CONVERGENCE_TOL: f64 = 1e-12;

/// Result of the fixed-point continued-fraction iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContinuedFractionEnergy {
    pub energy: f64,
    pub converged: bool,
    pub iterations: usize,
}

/// Eliminating the expansion coefficients of the recursion
/// `𝓔^μ c_μ + g(c_{μ+1} + c_{μ-1}) = E c_μ`, truncated symmetrically `depth`
/// levels around `center_mu`, gives
///
/// ```text
/// E = 𝓔^c + g²/(E − 𝓔^{c-1} − g²/(E − 𝓔^{c-2} − …))
///         + g²/(E − 𝓔^{c+1} − g²/(E − 𝓔^{c+2} − …))
/// ```
///
/// evaluated here as a plain fixed-point iteration `E ← RHS(E)` starting from
/// `e_start`. The truncation matches an `n = 2·depth + 1` matrix; a converged
/// iterate (|ΔE| < 1e-12) equals the corresponding eigenvalue of that matrix.
pub fn continued_fraction_energy(
    k: f64,
    p: &ModelParams,
    center_mu: i32,
    depth: usize,
    e_start: f64,
    iters: usize,
) -> Result<ContinuedFractionEnergy, FloquetError> {
    assert!(depth >= 1, "depth must be at least 1");
    assert!(iters >= 1, "need at least one iteration");
    let g = p.g_eff();
    let g2 = g * g;
    let center = bare_energy(center_mu, k, p);
    if g == 0.0 {
        return Ok(ContinuedFractionEnergy { energy: center, converged: true, iterations: 0 });
    }

    let side = |e: f64, dir: i32| -> f64 {
        // Innermost level first: μ = center ± depth inward to center ± 1.
        let mut t = g2 / (e - bare_energy(center_mu + dir * depth as i32, k, p));
        for step in (1..depth as i32).rev() {
            t = g2 / (e - bare_energy(center_mu + dir * step, k, p) - t);
        }
        t
    };

    let mut e = e_start;
    for it in 1..=iters {
        let next = center + side(e, -1) + side(e, 1);
        if !next.is_finite() || next.abs() > DIVERGENCE_BOUND {
            return Err(FloquetError::Diverged { last: next });
        }
        let delta = (next - e).abs();
        e = next;
        if delta < CONVERGENCE_TOL {
            return Ok(ContinuedFractionEnergy { energy: e, converged: true, iterations: it });
        }
    }
    Ok(ContinuedFractionEnergy { energy: e, converged: false, iterations: iters })
}

/// Closed-form band-1 energy around `k = 0`, through fourth order in the
/// coupling and second order in `k`:
///
/// ```text
/// E¹(k) ≈ -Δ/2 − 4g²/(q²+2Δ) + 4(7q² − 2Δ)g⁴/(q²(q²+2Δ))
///       + [1/2 − 16q²g²/(q²+2Δ)³
///          + 4(111q⁶ − 46Δq⁴ − 28Δ²q² − 8Δ³)g⁴/(q⁴(q²+2Δ)⁵)]·k²
/// ```
///
/// with `g = g0·√n`. Valid for |k| ≪ q and away from the pole `q² + 2Δ = 0`.
pub fn perturbative_energy_band1(k: f64, p: &ModelParams) -> Result<f64, FloquetError> {
    let q = p.q;
    let q2 = q * q;
    let d = p.delta;
    let pole = q2 + 2.0 * d;
    if pole.abs() < 1e-6 * q2 {
        return Err(FloquetError::ExpansionPole);
    }
    let g = p.g_eff();
    let g2 = g * g;
    let g4 = g2 * g2;

    let constant = -0.5 * d - 4.0 * g2 / pole + 4.0 * (7.0 * q2 - 2.0 * d) * g4 / (q2 * pole);
    let k2_coeff = 0.5 - 16.0 * q2 * g2 / pole.powi(3)
        + 4.0 * (111.0 * q2.powi(3) - 46.0 * d * q2.powi(2) - 28.0 * d * d * q2
            - 8.0 * d.powi(3))
            * g4
            / (q2.powi(2) * pole.powi(5));
    Ok(constant + k2_coeff * k * k)
}

/// Truncation error `δ = |E¹_{n_ref}(k) − E¹_{n_small}(k)|` of the band-1
/// energy between a small window and a reference window.
pub fn truncation_error(
    p: &ModelParams,
    k: f64,
    n_small: &super::TruncationSpec,
    n_ref: &super::TruncationSpec,
) -> Result<f64, FloquetError> {
    let small = eigenvalues_sym_tridiag(&super::build_matrix(k, p, n_small))?;
    let reference = eigenvalues_sym_tridiag(&super::build_matrix(k, p, n_ref))?;
    Ok((reference[0] - small[0]).abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::floquet::TruncationSpec;

    #[test]
    fn hand_iterates_depth_one() {
        // 𝓔^{±1} = 0.5 at k=0, Δ=0: first two iterates from E=0.
        let p = ModelParams::new(0.05, 0.0);
        let one = continued_fraction_energy(0.0, &p, 0, 1, 0.0, 1).unwrap();
        assert!((one.energy + 0.01).abs() < 1e-15);
        let two = continued_fraction_energy(0.0, &p, 0, 1, 0.0, 2).unwrap();
        assert!((two.energy + 0.009804).abs() < 1e-6);
    }

    #[test]
    fn converges_to_small_matrix_eigenvalue() {
        let p = ModelParams::new(0.05, 0.0);
        let res = continued_fraction_energy(0.0, &p, 0, 1, 0.0, 200).unwrap();
        assert!(res.converged);
        let closed = 0.25 - (0.0625f64 + 2.0 * 0.05 * 0.05).sqrt();
        assert!((res.energy - closed).abs() < 1e-10);

        // Depth 2 against the 5x5 spectrum at Δ=2.
        let p2 = ModelParams::new(0.01, 2.0);
        let start = bare_energy(0, 0.0, &p2);
        let res2 = continued_fraction_energy(0.0, &p2, 0, 2, start, 50).unwrap();
        assert!(res2.converged && res2.iterations <= 50);
        let t5 = TruncationSpec::new(5).unwrap();
        let eigs = eigenvalues_sym_tridiag(&crate::floquet::build_matrix(0.0, &p2, &t5)).unwrap();
        assert!((res2.energy - eigs[0]).abs() < 1e-8);
    }

    #[test]
    fn zero_coupling_returns_bare() {
        let p = ModelParams::new(0.0, 0.7);
        let res = continued_fraction_energy(0.2, &p, -1, 3, 123.0, 10).unwrap();
        assert!(res.converged);
        assert_eq!(res.energy, bare_energy(-1, 0.2, &p));
    }

    #[test]
    fn divergence_at_pole() {
        // Starting on top of a resonant denominator blows the iterates up.
        let p = ModelParams::new(0.05, 0.0);
        let bad = bare_energy(1, 0.0, &p);
        let out = continued_fraction_energy(0.0, &p, 0, 1, bad, 100);
        match out {
            Err(FloquetError::Diverged { .. }) => {}
            Ok(r) => assert!(r.converged, "either diverges or converges away from the pole"),
            Err(e) => panic!("unexpected error {e:?}"),
        }
    }

    #[test]
    fn perturbative_values() {
        // Δ=0, g0=0.05: -4g² + 28g⁴.
        let p = ModelParams::new(0.05, 0.0);
        let e = perturbative_energy_band1(0.0, &p).unwrap();
        assert!((e + 0.0098250).abs() < 1e-9, "E = {e}");

        // Uncoupled: free bare band.
        let p0 = ModelParams::new(0.0, 0.6);
        let e0 = perturbative_energy_band1(0.2, &p0).unwrap();
        assert!((e0 - (-0.3 + 0.02)).abs() < 1e-14);

        // Large detuning: -Δ/2 − 4g²/21 to O(g⁴).
        let pd = ModelParams::new(0.05, 10.0);
        let ed = perturbative_energy_band1(0.0, &pd).unwrap();
        assert!((ed + 5.000476).abs() < 5e-5, "E = {ed}");

        // Pole detection.
        let ppole = ModelParams::new(0.05, -0.5);
        assert_eq!(
            perturbative_energy_band1(0.0, &ppole).unwrap_err(),
            FloquetError::ExpansionPole
        );
    }

    #[test]
    fn truncation_error_trends() {
        let t5 = TruncationSpec::new(5).unwrap();
        let t201 = TruncationSpec::new(201).unwrap();
        let p0 = ModelParams::new(0.0, 0.0);
        assert_eq!(truncation_error(&p0, 0.0, &t5, &t201).unwrap(), 0.0);

        // δ grows with g0 at fixed Δ.
        let d1 = truncation_error(&ModelParams::new(0.05, 0.0), 0.0, &t5, &t201).unwrap();
        let d2 = truncation_error(&ModelParams::new(0.2, 0.0), 0.0, &t5, &t201).unwrap();
        let d3 = truncation_error(&ModelParams::new(0.5, 0.0), 0.0, &t5, &t201).unwrap();
        assert!(d1 < d2 && d2 < d3, "{d1} {d2} {d3}");

        // δ shrinks with growing Δ at fixed g0.
        let e1 = truncation_error(&ModelParams::new(0.2, 0.5), 0.0, &t5, &t201).unwrap();
        let e2 = truncation_error(&ModelParams::new(0.2, 2.0), 0.0, &t5, &t201).unwrap();
        assert!(e2 < e1, "{e2} !< {e1}");
    }
}
