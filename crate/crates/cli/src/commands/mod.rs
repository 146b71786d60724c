//! One module per subcommand, plus the shared summary scaffolding.

pub mod bands;
pub mod masses;
pub mod maps;
pub mod propagate;
pub mod scatter;
pub mod sweep;

use serde::Serialize;

use crate::config::RunConfig;

/// Every run writes a `summary.json` of this shape: the resolved inputs, the
/// command's derived quantities, and provenance.
#[derive(Serialize)]
pub struct Summary<'a, T: Serialize> {
    pub command: &'static str,
    pub config: &'a RunConfig,
    pub results: &'a T,
    pub provenance: Provenance,
}

#[derive(Serialize)]
pub struct Provenance {
    pub name: &'static str,
    pub version: &'static str,
    pub determinism: &'static str,
}

impl Provenance {
    pub fn new() -> Self {
        Self {
            name: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            determinism: "seed-free; identical inputs produce byte-identical outputs",
        }
    }
}

/// Inclusive linear grid with `n ≥ 1` points.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n <= 1 {
        return vec![lo];
    }
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

/// Expands a `[lo, hi, n]` range spec.
pub fn range_spec(spec: [f64; 3]) -> Vec<f64> {
    linspace(spec[0], spec[1], spec[2] as usize)
}
