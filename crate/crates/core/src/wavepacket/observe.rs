//! Moments and populations of a spinor field.


use super::{Component, SpinorField, WavepacketError};

/// What to condition the `*_cond` moments on.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MeasureOptions {
    /// Component selected for the conditional moments (projective
    /// measurement); `None` reuses the total density.
    pub conditional_component: Option<Component>,
    /// Cells with `|x| > cut` are dropped from the conditional moments
    /// (side packets far from the centre otherwise dominate the variance).
    pub exclusion_cut: Option<f64>,
}

/// Snapshot of the standard observables.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Measurement {
    pub norm: f64,
    /// ⟨σ₃⟩ = (P₊ − P₋)/norm ∈ [-1, 1].
    pub inversion: f64,
    pub mean_x: f64,
    pub var_x: f64,
    /// Probability caught by the conditional selection.
    pub cond_norm: Option<f64>,
    pub mean_x_cond: Option<f64>,
    pub var_x_cond: Option<f64>,
}

/// Total and conditional position moments. Conditional moments renormalize
/// within the selected component and window; `EmptySelection` if that
/// probability is below 1e-12.
pub fn measure(state: &SpinorField, options: &MeasureOptions) -> Result<Measurement, WavepacketError> {
    let grid = &state.grid;
    let dx = grid.dx();
    let n = grid.n();

    let mut p_plus = 0.0f64;
    let mut p_minus = 0.0f64;
    let mut sx = 0.0f64;
    let mut sxx = 0.0f64;
    let mut c_nrm = 0.0f64;
    let mut c_sx = 0.0f64;
    let mut c_sxx = 0.0f64;
    for j in 0..n {
        let x = grid.x(j);
        let dp = state.psi_plus[j].norm_sqr();
        let dm = state.psi_minus[j].norm_sqr();
        let d = dp + dm;
        p_plus += dp;
        p_minus += dm;
        sx += x * d;
        sxx += x * x * d;

        if options.exclusion_cut.map_or(true, |cut| x.abs() <= cut) {
            let dc = match options.conditional_component {
                Some(Component::Plus) => dp,
                Some(Component::Minus) => dm,
                None => d,
            };
            c_nrm += dc;
            c_sx += x * dc;
            c_sxx += x * x * dc;
        }
    }
    let norm = (p_plus + p_minus) * dx;
    let mean_x = sx / (p_plus + p_minus);
    let var_x = sxx / (p_plus + p_minus) - mean_x * mean_x;
    let inversion = (p_plus - p_minus) / (p_plus + p_minus);

    let conditional = if options.conditional_component.is_some() || options.exclusion_cut.is_some()
    {
        if c_nrm * dx < 1e-12 {
            return Err(WavepacketError::EmptySelection);
        }
        let m = c_sx / c_nrm;
        Some((c_nrm * dx, m, c_sxx / c_nrm - m * m))
    } else {
        Some((norm, mean_x, var_x))
    };
    let (cn, cm, cv) = conditional.unwrap();

    Ok(Measurement {
        norm,
        inversion,
        mean_x,
        var_x,
        cond_norm: Some(cn),
        mean_x_cond: Some(cm),
        var_x_cond: Some(cv),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wavepacket::{init_bare_gaussian, make_grid};

    #[test]
    fn symmetric_packet_centred() {
        let grid = make_grid(2048, -128.0, 128.0).unwrap();
        let st = init_bare_gaussian(&grid, 0.0, 0.1, 0.0, Component::Minus).unwrap();
        let m = measure(&st, &MeasureOptions::default()).unwrap();
        assert!(m.mean_x.abs() < grid.dx() / 100.0);
        assert!((m.norm - 1.0).abs() < 1e-12);
        assert!((m.inversion + 1.0).abs() < 1e-12);
        // Δx = 1/(2Δk) = 5 → var 25.
        assert!((m.var_x - 25.0).abs() < 0.01);
    }

    #[test]
    fn pure_minus_conditional_equals_total() {
        let grid = make_grid(2048, -128.0, 128.0).unwrap();
        let st = init_bare_gaussian(&grid, 0.3, 0.1, 10.0, Component::Minus).unwrap();
        let m = measure(
            &st,
            &MeasureOptions { conditional_component: Some(Component::Minus), exclusion_cut: None },
        )
        .unwrap();
        assert!((m.mean_x_cond.unwrap() - m.mean_x).abs() < 1e-12);
        assert!((m.var_x_cond.unwrap() - m.var_x).abs() < 1e-10);
    }

    #[test]
    fn empty_selection_errors() {
        let grid = make_grid(1024, -64.0, 64.0).unwrap();
        let st = init_bare_gaussian(&grid, 0.0, 0.1, 0.0, Component::Minus).unwrap();
        let err = measure(
            &st,
            &MeasureOptions { conditional_component: Some(Component::Plus), exclusion_cut: None },
        )
        .unwrap_err();
        assert_eq!(err, WavepacketError::EmptySelection);
    }

    #[test]
    fn exclusion_window_drops_far_mass() {
        let grid = make_grid(4096, -256.0, 256.0).unwrap();
        // Two packets: one at 0 in |-⟩, one at 120 in |+⟩.
        let a = init_bare_gaussian(&grid, 0.0, 0.1, 0.0, Component::Minus).unwrap();
        let b = init_bare_gaussian(&grid, 0.0, 0.1, 120.0, Component::Plus).unwrap();
        let mut st = a;
        st.psi_plus = b.psi_plus;
        st.normalize();
        let total = measure(&st, &MeasureOptions::default()).unwrap();
        assert!(total.var_x > 1000.0, "two-packet variance {}", total.var_x);
        let windowed = measure(
            &st,
            &MeasureOptions {
                conditional_component: Some(Component::Minus),
                exclusion_cut: Some(60.0),
            },
        )
        .unwrap();
        assert!((windowed.var_x_cond.unwrap() - 25.0).abs() < 0.05);
        assert!(windowed.mean_x_cond.unwrap().abs() < 1e-6);
    }
}
