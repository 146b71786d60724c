//! Extraction of transport parameters from sampled trajectories.

use alloc::vec::Vec;

use super::{ObservableSeries, WavepacketError};

/// How the propagation velocity is read off the mean-position series.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitMode {
    /// Least-squares slope over the window (default; robust against
    /// residual oscillations).
    LeastSquares,
    /// Plain (⟨x_f⟩ − ⟨x_0⟩)/(t_f − t_0) between the window endpoints.
    TwoPoint,
}

/// Which mean-position column to fit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeanSource {
    Total,
    /// Conditional on the lower component (with the series' exclusion
    /// window).
    Lower,
}

fn window_indices(series: &ObservableSeries, t0: f64, t1: f64) -> Vec<usize> {
    series
        .times
        .iter()
        .enumerate()
        .filter(|(_, &t)| t >= t0 && t <= t1)
        .map(|(i, _)| i)
        .collect()
}

/// Propagation velocity from the mean-position series inside `[t0, t1]`.
pub fn extract_group_velocity(
    series: &ObservableSeries,
    t0: f64,
    t1: f64,
    source: MeanSource,
    mode: FitMode,
) -> Result<f64, WavepacketError> {
    let idx = window_indices(series, t0, t1);
    if idx.len() < 2 {
        return Err(WavepacketError::FitDegenerate);
    }
    let ys = |i: usize| match source {
        MeanSource::Total => series.mean_x[i],
        MeanSource::Lower => series.mean_x_lower[i],
    };
    if idx.iter().any(|&i| !ys(i).is_finite()) {
        return Err(WavepacketError::EmptySelection);
    }
    match mode {
        FitMode::TwoPoint => {
            let (a, b) = (idx[0], idx[idx.len() - 1]);
            let dt = series.times[b] - series.times[a];
            if dt <= 0.0 {
                return Err(WavepacketError::FitDegenerate);
            }
            Ok((ys(b) - ys(a)) / dt)
        }
        FitMode::LeastSquares => {
            // Centred slope formula.
            let n = idx.len() as f64;
            let tbar = idx.iter().map(|&i| series.times[i]).sum::<f64>() / n;
            let ybar = idx.iter().map(|&i| ys(i)).sum::<f64>() / n;
            let mut num = 0.0;
            let mut den = 0.0;
            for &i in &idx {
                let dt = series.times[i] - tbar;
                num += dt * (ys(i) - ybar);
                den += dt * dt;
            }
            if den == 0.0 {
                return Err(WavepacketError::FitDegenerate);
            }
            Ok(num / den)
        }
    }
}

/// Result of the broadening fit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct M2Fit {
    pub m2: f64,
    pub t_eff: f64,
}

/// Fits the broadening law `Δx²(t) = 1/(4Δk²) + (Δk/m2)²·(t_eff + t)²` to a
/// variance series (a constant-coupling run; `source` picks the total or the
/// conditional column).
///
/// With `fit_teff` the quadratic `a + 2bc·t + b·t²` is fitted and
/// `t_eff = c`; without it (states prepared by direct synthesis need no
/// turn-on correction) `t_eff` is pinned to zero and only `a + b·t²` is
/// fitted. `m2 = Δk/√b`; the broadening fixes only |m2|, so the value is
/// reported positive.
pub fn extract_m2(
    series: &ObservableSeries,
    delta_k: f64,
    source: MeanSource,
    fit_teff: bool,
) -> Result<M2Fit, WavepacketError> {
    assert!(delta_k > 0.0, "momentum width must be positive");
    let var = |i: usize| match source {
        MeanSource::Total => series.var_x[i],
        MeanSource::Lower => series.var_x_lower[i],
    };
    let n = series.len();
    if n < 3 {
        return Err(WavepacketError::FitDegenerate);
    }
    let v0 = var(0);
    if (0..n).all(|i| (var(i) - v0).abs() < 1e-12 * v0.abs().max(1.0)) {
        return Err(WavepacketError::FitDegenerate);
    }
    if (0..n).any(|i| !var(i).is_finite()) {
        return Err(WavepacketError::EmptySelection);
    }

    // Scale times to O(1) before forming normal equations.
    let tmax = series.times[n - 1].abs().max(1e-300);
    let b = if fit_teff {
        // Quadratic in t: var = p0 + p1 t + p2 t².
        let (mut s0, mut s1, mut s2, mut s3, mut s4) = (0.0f64, 0.0, 0.0, 0.0, 0.0);
        let (mut r0, mut r1, mut r2) = (0.0f64, 0.0, 0.0);
        for i in 0..n {
            let t = series.times[i] / tmax;
            let v = var(i);
            let t2 = t * t;
            s0 += 1.0;
            s1 += t;
            s2 += t2;
            s3 += t2 * t;
            s4 += t2 * t2;
            r0 += v;
            r1 += v * t;
            r2 += v * t2;
        }
        let mut m = [[s0, s1, s2, r0], [s1, s2, s3, r1], [s2, s3, s4, r2]];
        for col in 0..3 {
            // Partial pivot.
            let mut piv = col;
            for row in col + 1..3 {
                if m[row][col].abs() > m[piv][col].abs() {
                    piv = row;
                }
            }
            m.swap(col, piv);
            if m[col][col] == 0.0 {
                return Err(WavepacketError::FitDegenerate);
            }
            for row in col + 1..3 {
                let f = m[row][col] / m[col][col];
                for k in col..4 {
                    m[row][k] -= f * m[col][k];
                }
            }
        }
        let p2 = m[2][3] / m[2][2];
        let p1 = (m[1][3] - m[1][2] * p2) / m[1][1];
        if p2 <= 0.0 {
            return Err(WavepacketError::FitDegenerate);
        }
        let b = p2 / (tmax * tmax);
        let t_eff = (p1 / (2.0 * p2)) * tmax;
        (b, t_eff)
    } else {
        // var = p0 + b t²: 2x2 normal equations in (1, t²).
        let (mut s0, mut s2, mut s4) = (0.0f64, 0.0, 0.0);
        let (mut r0, mut r2) = (0.0f64, 0.0);
        for i in 0..n {
            let t2 = (series.times[i] / tmax).powi(2);
            let v = var(i);
            s0 += 1.0;
            s2 += t2;
            s4 += t2 * t2;
            r0 += v;
            r2 += v * t2;
        }
        let det = s0 * s4 - s2 * s2;
        if det.abs() < 1e-300 {
            return Err(WavepacketError::FitDegenerate);
        }
        let b_scaled = (s0 * r2 - s2 * r0) / det;
        if b_scaled <= 0.0 {
            return Err(WavepacketError::FitDegenerate);
        }
        (b_scaled / (tmax * tmax), 0.0)
    };
    let (bcoef, t_eff) = b;
    Ok(M2Fit { m2: delta_k / bcoef.sqrt(), t_eff })
}

/// Oscillation period from the sign changes of the inversion series: twice
/// the mean spacing of its (linearly interpolated) zero crossings. Needs at
/// least two full oscillations.
pub fn rabi_period(series: &ObservableSeries) -> Result<f64, WavepacketError> {
    let mut crossings: Vec<f64> = Vec::new();
    for i in 1..series.len() {
        let (a, b) = (series.inversion[i - 1], series.inversion[i]);
        if a == 0.0 || a.signum() == b.signum() {
            continue;
        }
        let f = a / (a - b);
        crossings.push(series.times[i - 1] + f * (series.times[i] - series.times[i - 1]));
    }
    // Two full oscillations span four half-period crossings.
    if crossings.len() < 4 {
        return Err(WavepacketError::TooFewOscillations);
    }
    let spans: f64 = crossings.last().unwrap() - crossings[0];
    Ok(2.0 * spans / (crossings.len() - 1) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series_from(times: Vec<f64>, mean_x: Vec<f64>, var_x: Vec<f64>, inv: Vec<f64>) -> ObservableSeries {
        let n = times.len();
        ObservableSeries {
            times,
            norm: alloc::vec![1.0; n],
            inversion: inv,
            mean_x: mean_x.clone(),
            mean_x_lower: mean_x,
            var_x: var_x.clone(),
            var_x_lower: var_x,
            ..ObservableSeries::default()
        }
    }

    #[test]
    fn slope_and_two_point() {
        let times: Vec<f64> = (0..50).map(|i| i as f64).collect();
        let xs: Vec<f64> = times.iter().map(|t| 3.0 + 0.25 * t).collect();
        let s = series_from(times, xs, alloc::vec![1.0; 50], alloc::vec![-1.0; 50]);
        let v = extract_group_velocity(&s, 0.0, 49.0, MeanSource::Total, FitMode::LeastSquares)
            .unwrap();
        assert!((v - 0.25).abs() < 1e-12);
        let v2 =
            extract_group_velocity(&s, 10.0, 40.0, MeanSource::Lower, FitMode::TwoPoint).unwrap();
        assert!((v2 - 0.25).abs() < 1e-12);
    }

    #[test]
    fn m2_fit_recovers_broadening_law() {
        let dk = 0.02f64;
        let m2 = 1.25f64;
        let teff = 30.0f64;
        let times: Vec<f64> = (0..100).map(|i| 10.0 * i as f64).collect();
        let var: Vec<f64> = times
            .iter()
            .map(|t| 1.0 / (4.0 * dk * dk) + (dk / m2).powi(2) * (teff + t).powi(2))
            .collect();
        let s = series_from(times.clone(), alloc::vec![0.0; 100], var.clone(), alloc::vec![-1.0; 100]);
        let fit = extract_m2(&s, dk, MeanSource::Total, true).unwrap();
        assert!((fit.m2 - m2).abs() < 1e-9, "m2 {}", fit.m2);
        assert!((fit.t_eff - teff).abs() < 1e-6, "t_eff {}", fit.t_eff);

        // Without the turn-on correction on a teff-free law.
        let var0: Vec<f64> = times
            .iter()
            .map(|t| 1.0 / (4.0 * dk * dk) + (dk / m2).powi(2) * t.powi(2))
            .collect();
        let s0 = series_from(times, alloc::vec![0.0; 100], var0, alloc::vec![-1.0; 100]);
        let fit0 = extract_m2(&s0, dk, MeanSource::Total, false).unwrap();
        assert!((fit0.m2 - m2).abs() < 1e-9);
        assert_eq!(fit0.t_eff, 0.0);
    }

    #[test]
    fn constant_variance_is_degenerate() {
        let times: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let s = series_from(times, alloc::vec![0.0; 10], alloc::vec![5.0; 10], alloc::vec![-1.0; 10]);
        assert_eq!(
            extract_m2(&s, 0.1, MeanSource::Total, false).unwrap_err(),
            WavepacketError::FitDegenerate
        );
    }

    #[test]
    fn rabi_period_from_cosine() {
        let period = 62.8f64;
        let times: Vec<f64> = (0..400).map(|i| 0.5 * i as f64).collect();
        let inv: Vec<f64> = times
            .iter()
            .map(|t| -(2.0 * core::f64::consts::PI * t / period).cos())
            .collect();
        let s = series_from(times, alloc::vec![0.0; 400], alloc::vec![1.0; 400], inv);
        let p = rabi_period(&s).unwrap();
        assert!((p - period).abs() < 0.05, "period {p}");
    }

    #[test]
    fn constant_inversion_has_no_period() {
        let times: Vec<f64> = (0..100).map(|i| i as f64).collect();
        let s = series_from(times, alloc::vec![0.0; 100], alloc::vec![1.0; 100], alloc::vec![-1.0; 100]);
        assert_eq!(rabi_period(&s).unwrap_err(), WavepacketError::TooFewOscillations);
    }
}
