//! Central finite differences on uniformly sampled data.

use super::NumericsError;

/// Which derivative the stencil evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiffOrder {
    First,
    Second,
}

/// Central-difference derivative at the midpoint of `samples`.
///
/// `samples` must have odd length with the target point in the middle and
/// uniform spacing `h`. The plain stencils are O(h²); with `richardson` set
/// (length ≥ 5) one extrapolation step combines the ±h and ±2h stencils to
/// O(h⁴).
pub fn central_difference(
    samples: &[f64],
    h: f64,
    order: DiffOrder,
    richardson: bool,
) -> Result<f64, NumericsError> {
    let n = samples.len();
    let need = if richardson { 5 } else { 3 };
    if n < need || n % 2 == 0 {
        return Err(NumericsError::InsufficientSamples);
    }
    let c = n / 2;
    let stencil = |step: usize| -> f64 {
        let hh = h * step as f64;
        match order {
            DiffOrder::First => (samples[c + step] - samples[c - step]) / (2.0 * hh),
            DiffOrder::Second => {
                (samples[c + step] - 2.0 * samples[c] + samples[c - step]) / (hh * hh)
            }
        }
    };
    if richardson {
        Ok((4.0 * stencil(1) - stencil(2)) / 3.0)
    } else {
        Ok(stencil(1))
    }
}
