//! Polynomial least squares via Householder QR on the Vandermonde matrix.

use alloc::vec;
use alloc::vec::Vec;

use super::NumericsError;

/// Relative pivot ratio below which the triangular factor is treated as rank
/// deficient. Corresponds to a normal-matrix condition estimate of roughly
/// `ratio⁻²`.
const PIVOT_RATIO_FLOOR: f64 = 1e-12;

/// Fits `y ≈ Σ c_i x^i` for `i = 0..=degree`, minimizing the sum of squared
/// residuals. Returns the coefficients in the monomial basis, constant term
/// first.
///
/// The abscissas are centred and scaled internally before the QR solve; the
/// result is mapped back, so polynomials up to degree ~6 are recovered
/// exactly on noiseless data.
pub fn polyfit_least_squares(
    x: &[f64],
    y: &[f64],
    degree: usize,
) -> Result<Vec<f64>, NumericsError> {
    assert_eq!(x.len(), y.len(), "x and y lengths must match");
    let m = x.len();
    let cols = degree + 1;
    if m < cols {
        return Err(NumericsError::UnderdeterminedFit);
    }

    // Centre and scale to [-1, 1] to keep the Vandermonde factor tame.
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for &v in x {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    let mid = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let scale = if half > 0.0 { half } else { 1.0 };

    // Column-major Vandermonde in the scaled variable.
    let mut a = vec![0.0f64; m * cols];
    for (i, &xv) in x.iter().enumerate() {
        let t = (xv - mid) / scale;
        let mut p = 1.0;
        for j in 0..cols {
            a[j * m + i] = p;
            p *= t;
        }
    }
    let mut rhs: Vec<f64> = y.to_vec();

    // Householder QR, applying the reflectors to the right-hand side as we go.
    let mut rdiag = vec![0.0f64; cols];
    for j in 0..cols {
        let col_norm = {
            let col = &a[j * m + j..(j + 1) * m];
            col.iter().map(|v| v * v).sum::<f64>().sqrt()
        };
        let alpha = if a[j * m + j] >= 0.0 { -col_norm } else { col_norm };
        rdiag[j] = alpha;
        if col_norm == 0.0 {
            continue;
        }
        a[j * m + j] -= alpha;
        let vnorm2: f64 = a[j * m + j..(j + 1) * m].iter().map(|v| v * v).sum();
        if vnorm2 == 0.0 {
            continue;
        }
        for k in j + 1..cols {
            let mut dot = 0.0;
            for i in j..m {
                dot += a[j * m + i] * a[k * m + i];
            }
            let beta = 2.0 * dot / vnorm2;
            for i in j..m {
                a[k * m + i] -= beta * a[j * m + i];
            }
        }
        let mut dot = 0.0;
        for i in j..m {
            dot += a[j * m + i] * rhs[i];
        }
        let beta = 2.0 * dot / vnorm2;
        for i in j..m {
            rhs[i] -= beta * a[j * m + i];
        }
    }

    let rmax = rdiag.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    let rmin = rdiag.iter().fold(f64::INFINITY, |acc, v| acc.min(v.abs()));
    if rmax == 0.0 || rmin / rmax < PIVOT_RATIO_FLOOR {
        return Err(NumericsError::IllConditioned);
    }

    // Back substitution against R (upper triangle lives above rdiag).
    let mut coeffs_scaled = vec![0.0f64; cols];
    for j in (0..cols).rev() {
        let mut s = rhs[j];
        for k in j + 1..cols {
            s -= a[k * m + j] * coeffs_scaled[k];
        }
        coeffs_scaled[j] = s / rdiag[j];
    }

    Ok(unscale_coefficients(&coeffs_scaled, mid, scale))
}

/// Expands `q((x - mid)/scale)` back to monomial coefficients in `x` by
/// synthetic Horner composition.
fn unscale_coefficients(q: &[f64], mid: f64, scale: f64) -> Vec<f64> {
    // p(x) = q_n; p = p*(x-mid)/scale + q_{n-1}; ... carried as coefficient
    // arrays in x.
    let mut p = vec![q[q.len() - 1]];
    for &qk in q.iter().rev().skip(1) {
        // Multiply p by (x - mid)/scale.
        let mut next = vec![0.0f64; p.len() + 1];
        for (i, &c) in p.iter().enumerate() {
            next[i + 1] += c / scale;
            next[i] -= c * mid / scale;
        }
        next[0] += qk;
        p = next;
    }
    p
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_quadratic() {
        let x: Vec<f64> = (0..5).map(|i| i as f64).collect();
        let y: Vec<f64> = x.iter().map(|&v| 2.0 + 3.0 * v * v).collect();
        let c = polyfit_least_squares(&x, &y, 2).unwrap();
        assert!((c[0] - 2.0).abs() < 1e-10);
        assert!(c[1].abs() < 1e-10);
        assert!((c[2] - 3.0).abs() < 1e-10);
    }

    #[test]
    fn constant_fit() {
        let x = [0.0, 1.0, 2.0];
        let y = [4.25, 4.25, 4.25];
        let c = polyfit_least_squares(&x, &y, 0).unwrap();
        assert_eq!(c.len(), 1);
        assert!((c[0] - 4.25).abs() < 1e-13);
    }

    #[test]
    fn noisy_quadratic_coefficient() {
        // Deterministic "uniform noise" at the 1e-6 level; checked against the
        // brute-force normal equations below.
        let n = 41;
        let x: Vec<f64> = (0..n).map(|i| -1.0 + 0.05 * i as f64).collect();
        let mut state = 0x9E3779B97F4A7C15u64;
        let mut noise = move || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 11) as f64 / (1u64 << 53) as f64 - 0.5) * 2e-6
        };
        let y: Vec<f64> = x.iter().map(|&v| v * v + noise()).collect();
        let c = polyfit_least_squares(&x, &y, 2).unwrap();
        assert!((c[2] - 1.0).abs() < 1e-4, "quadratic coefficient {}", c[2]);

        // Brute-force normal equations oracle (3x3 solve).
        let mut s = [0.0f64; 5];
        let mut b = [0.0f64; 3];
        for (&xv, &yv) in x.iter().zip(&y) {
            let mut p = 1.0;
            for (k, sv) in s.iter_mut().enumerate() {
                *sv += p;
                if k < 3 {
                    b[k] += yv * p;
                }
                p *= xv;
            }
        }
        let mut m = [[s[0], s[1], s[2]], [s[1], s[2], s[3]], [s[2], s[3], s[4]]];
        // Gaussian elimination.
        for col in 0..3 {
            let piv = m[col][col];
            for row in col + 1..3 {
                let f = m[row][col] / piv;
                for k in col..3 {
                    m[row][k] -= f * m[col][k];
                }
                b[row] -= f * b[col];
            }
        }
        let c2 = b[2] / m[2][2];
        assert!((c[2] - c2).abs() < 1e-9);
    }

    #[test]
    fn underdetermined_and_degenerate() {
        assert_eq!(
            polyfit_least_squares(&[1.0, 2.0], &[0.0, 1.0], 2).unwrap_err(),
            NumericsError::UnderdeterminedFit
        );
        // All abscissas identical: rank deficient for degree >= 1.
        assert_eq!(
            polyfit_least_squares(&[2.0, 2.0, 2.0], &[1.0, 1.0, 1.0], 1).unwrap_err(),
            NumericsError::IllConditioned
        );
    }

    #[test]
    fn exact_degree_six() {
        let coeffs = [0.5, -1.0, 2.0, 0.25, -0.125, 1.5, -0.75];
        let x: Vec<f64> = (0..25).map(|i| -2.0 + i as f64 / 6.0).collect();
        let y: Vec<f64> = x
            .iter()
            .map(|&v| coeffs.iter().rev().fold(0.0, |acc, c| acc * v + c))
            .collect();
        let c = polyfit_least_squares(&x, &y, 6).unwrap();
        for (got, want) in c.iter().zip(&coeffs) {
            assert!((got - want).abs() < 1e-9, "got {got}, want {want}");
        }
    }
}
