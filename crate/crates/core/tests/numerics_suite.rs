//! Property suites for the numeric kernels, checked against independent
//! oracles (Sturm-sequence bisection for the eigensolver, the defining sums
//! for the FFT).

use cavityband_core::numerics::{
    eig_sym_tridiag, fft_forward, fft_inverse, polyfit_least_squares, ComplexArray, Fft,
    SymTridiag,
};
use cavityband_core::Complex64;
use proptest::prelude::*;

// ---------------------------------------------------------------------------
// Sturm-sequence bisection oracle: counts eigenvalues below x through the
// signs of the leading principal minors, then bisects each index. Entirely
// independent of the QL path.

fn sturm_count_below(diag: &[f64], off: &[f64], x: f64) -> usize {
    let n = diag.len();
    let mut count = 0;
    let mut q = diag[0] - x;
    if q < 0.0 {
        count += 1;
    }
    for i in 1..n {
        let e2 = off[i - 1] * off[i - 1];
        let denom = if q.abs() < 1e-300 { 1e-300f64.copysign(q) } else { q };
        q = diag[i] - x - e2 / denom;
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

fn sturm_eigenvalue(diag: &[f64], off: &[f64], index: usize) -> f64 {
    // Gershgorin bounds.
    let n = diag.len();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let mut r = 0.0;
        if i > 0 {
            r += off[i - 1].abs();
        }
        if i < n - 1 {
            r += off[i].abs();
        }
        lo = lo.min(diag[i] - r);
        hi = hi.max(diag[i] + r);
    }
    let (mut lo, mut hi) = (lo - 1.0, hi + 1.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if sturm_count_below(diag, off, mid) <= index {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-14 * hi.abs().max(1.0) {
            break;
        }
    }
    0.5 * (lo + hi)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn eigenvalues_match_sturm_bisection(
        n in 2usize..50,
        seed in any::<u64>(),
    ) {
        let mut state = seed | 1;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64 * 8.0 - 4.0
        };
        let diag: Vec<f64> = (0..n).map(|_| next()).collect();
        let off: Vec<f64> = (0..n - 1).map(|_| next()).collect();
        let m = SymTridiag::new(diag.clone(), off.clone());
        let dec = eig_sym_tridiag(&m).unwrap();
        let scale = diag.iter().chain(off.iter()).fold(1.0f64, |a, v| a.max(v.abs()));
        for j in 0..n {
            let oracle = sturm_eigenvalue(&diag, &off, j);
            prop_assert!(
                (dec.values()[j] - oracle).abs() <= 1e-10 * scale,
                "index {}: QL {} vs Sturm {}", j, dec.values()[j], oracle
            );
        }
    }

    #[test]
    fn eigenvector_orthonormality(
        n in 2usize..40,
        seed in any::<u64>(),
    ) {
        let mut state = seed | 1;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64 * 4.0 - 2.0
        };
        let diag: Vec<f64> = (0..n).map(|_| next()).collect();
        let off: Vec<f64> = (0..n - 1).map(|_| next()).collect();
        let dec = eig_sym_tridiag(&SymTridiag::new(diag, off)).unwrap();
        for i in 0..n {
            for j in i..n {
                let dot: f64 = dec.vector(i).iter().zip(dec.vector(j)).map(|(a, b)| a * b).sum();
                let expect = if i == j { 1.0 } else { 0.0 };
                prop_assert!((dot - expect).abs() <= 1e-10, "V^T V [{i},{j}] = {dot}");
            }
        }
    }
}

// ---------------------------------------------------------------------------
// FFT properties on pseudo-random data.

fn random_array(n: usize, seed: u64) -> Vec<Complex64> {
    let mut state = seed | 1;
    let mut next = move || {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
    };
    (0..n).map(|_| Complex64::new(next(), next())).collect()
}

#[test]
fn fft_linearity_parseval_shift_up_to_2_16() {
    for (n, seed) in [(8usize, 11u64), (256, 5), (4096, 7), (1 << 16, 3)] {
        let x = random_array(n, seed);
        let y = random_array(n, seed.wrapping_mul(97));
        let plan = Fft::new(n).unwrap();

        // Linearity: F(a x + b y) = a F(x) + b F(y).
        let (a, b) = (Complex64::new(0.7, -0.2), Complex64::new(-1.3, 0.4));
        let mut comb: Vec<Complex64> =
            x.iter().zip(&y).map(|(&xv, &yv)| a * xv + b * yv).collect();
        plan.forward(&mut comb);
        let mut fx = x.clone();
        let mut fy = y.clone();
        plan.forward(&mut fx);
        plan.forward(&mut fy);
        let scale: f64 = fx.iter().map(|v| v.norm()).fold(0.0, f64::max);
        for i in 0..n {
            let expect = a * fx[i] + b * fy[i];
            assert!(
                (comb[i] - expect).norm() <= 1e-12 * scale.max(1.0),
                "linearity at n={n}, bin {i}"
            );
        }

        // Parseval under the unitary-pair convention: Σ|x|² = (1/N)Σ|X|².
        let time_energy: f64 = x.iter().map(|v| v.norm_sqr()).sum();
        let freq_energy: f64 = fx.iter().map(|v| v.norm_sqr()).sum::<f64>() / n as f64;
        assert!(
            (time_energy - freq_energy).abs() <= 1e-12 * time_energy,
            "parseval at n={n}"
        );

        // Shift theorem: rotating the samples multiplies spectra by a phase.
        let shift = n / 3;
        let mut shifted: Vec<Complex64> = (0..n).map(|i| x[(i + shift) % n]).collect();
        plan.forward(&mut shifted);
        for m in 0..n {
            let phase = 2.0 * std::f64::consts::PI * (m * shift % n) as f64 / n as f64;
            let expect = fx[m] * Complex64::new(phase.cos(), phase.sin());
            assert!(
                (shifted[m] - expect).norm() <= 1e-11 * scale.max(1.0),
                "shift theorem at n={n}, bin {m}"
            );
        }
    }
}

#[test]
fn fft_round_trip_large() {
    let n = 1 << 16;
    let data = random_array(n, 42);
    let x = ComplexArray::new(data.clone()).unwrap();
    let back = fft_inverse(&fft_forward(&x));
    let scale: f64 = data.iter().map(|v| v.norm()).fold(0.0, f64::max);
    for (a, b) in back.iter().zip(&data) {
        assert!((a - b).norm() <= 1e-12 * scale);
    }
}

// ---------------------------------------------------------------------------
// Polyfit exactness on noiseless polynomials.

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn polyfit_exact_on_noiseless_polynomials(
        degree in 0usize..=6,
        coeffs in prop::collection::vec(-3.0f64..3.0, 7),
        x0 in -5.0f64..5.0,
        span in 0.5f64..10.0,
    ) {
        let m = 4 * (degree + 2);
        let x: Vec<f64> = (0..m).map(|i| x0 + span * i as f64 / m as f64).collect();
        let y: Vec<f64> = x
            .iter()
            .map(|&v| coeffs[..=degree].iter().rev().fold(0.0, |acc, c| acc * v + c))
            .collect();
        let fit = polyfit_least_squares(&x, &y, degree).unwrap();
        let cmax = coeffs.iter().fold(1.0f64, |a, v| a.max(v.abs()));
        for (got, want) in fit.iter().zip(&coeffs[..=degree]) {
            prop_assert!((got - want).abs() <= 1e-7 * cmax, "{got} vs {want} (deg {degree})");
        }
    }
}
