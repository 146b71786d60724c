//! Band structure and wave-packet dynamics of a two-level atom coupled to a
//! standing-wave mode.
//!
//! The crate works throughout in recoil-scaled units: lengths in units of
//! `1/q̃` (inverse mode wave number), times in units of `T_s = m/(ħ q̃²)`, and
//! `ħ = m = 1`. With the default `q = 1` every energy is then measured in
//! recoil energies and the free dispersion is `k²/2`.
//!
//! Layout:
//!
//! * [`numerics`] — self-contained kernels: a symmetric tridiagonal
//!   eigensolver, a radix-2 FFT pair, polynomial least squares and central
//!   finite differences.
//! * [`floquet`] — the truncated quasi-momentum matrix of the coupled
//!   atom-mode problem, dispersion curves, dressed states, fidelities,
//!   continued-fraction and series energies, and effective-mass parameters.
//! * [`wavepacket`] — split-operator propagation of the two-component spinor
//!   field, Gaussian state preparation, observables, and extraction of group
//!   velocity, curvature mass and Rabi periods from trajectories.
//! * [`scattering`] — reflection/transmission scenarios against a finite
//!   (enveloped) mode region, report generation and sector composition.
//!
//! The crate is `no_std` (with `alloc`); all float math goes through `libm`.
//! Everything here is deterministic: identical inputs produce bit-identical
//! outputs, with no RNG and no threading inside the library. Independent
//! evaluations (parameter sweeps, per-`k` diagonalizations) may be run
//! concurrently by the caller; no operation keeps shared mutable state.

#![no_std]

extern crate alloc;

pub mod floquet;
pub mod numerics;
pub mod scattering;
pub mod wavepacket;

pub use num_complex::Complex64;
