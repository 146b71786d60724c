//! Radix-2 FFT pair for power-of-two lengths.
//!
//! Normalization is the unitary-pair convention used everywhere in this
//! crate: the forward transform is unnormalized,
//! `X[m] = Σ_j x[j]·exp(-2πi·jm/N)`, and the inverse carries the `1/N`
//! factor, so `fft_inverse(fft_forward(x)) == x` and Parseval reads
//! `Σ|x|² = (1/N)·Σ|X|²`.

use alloc::vec::Vec;
use core::f64::consts::PI;
use core::ops::Deref;
use num_complex::Complex64;

use super::NumericsError;

/// Contiguous complex samples with power-of-two length.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexArray(Vec<Complex64>);

impl ComplexArray {
    pub fn new(data: Vec<Complex64>) -> Result<Self, NumericsError> {
        if data.is_empty() || !data.len().is_power_of_two() {
            return Err(NumericsError::LengthNotPowerOfTwo);
        }
        Ok(Self(data))
    }

    pub fn into_inner(self) -> Vec<Complex64> {
        self.0
    }
}

impl Deref for ComplexArray {
    type Target = [Complex64];

    fn deref(&self) -> &[Complex64] {
        &self.0
    }
}

/// Precomputed plan (per-stage twiddle tables + bit-reversal table) for one
/// transform size. The propagator keeps one of these per run; the free
/// functions below build a throwaway plan per call.
#[derive(Debug, Clone)]
pub struct Fft {
    n: usize,
    /// One contiguous table of exp(-2πi·j/len) per stage with len ≥ 8.
    stages: Vec<Vec<Complex64>>,
    bitrev: Vec<u32>,
}

impl Fft {
    pub fn new(n: usize) -> Result<Self, NumericsError> {
        if n == 0 || !n.is_power_of_two() {
            return Err(NumericsError::LengthNotPowerOfTwo);
        }
        let mut stages = Vec::new();
        let mut len = 8;
        while len <= n {
            let table = (0..len / 2)
                .map(|j| {
                    let phase = -2.0 * PI * (j as f64) / (len as f64);
                    Complex64::new(phase.cos(), phase.sin())
                })
                .collect();
            stages.push(table);
            len <<= 1;
        }
        let bits = n.trailing_zeros();
        let bitrev = (0..n as u32)
            .map(|i| i.reverse_bits() >> (32 - bits.max(1)))
            .collect::<Vec<_>>();
        let bitrev = if bits == 0 { alloc::vec![0] } else { bitrev };
        Ok(Self { n, stages, bitrev })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// In-place forward transform (unnormalized).
    pub fn forward(&self, data: &mut [Complex64]) {
        assert_eq!(data.len(), self.n, "buffer length must match the plan");
        self.permute(data);
        self.butterflies::<false>(data);
    }

    /// In-place inverse transform (scaled by `1/N`).
    pub fn inverse(&self, data: &mut [Complex64]) {
        assert_eq!(data.len(), self.n, "buffer length must match the plan");
        self.permute(data);
        self.butterflies::<true>(data);
        let scale = 1.0 / self.n as f64;
        for v in data.iter_mut() {
            *v *= scale;
        }
    }

    fn permute(&self, data: &mut [Complex64]) {
        for i in 0..self.n {
            let j = self.bitrev[i] as usize;
            if i < j {
                data.swap(i, j);
            }
        }
    }

    fn butterflies<const INV: bool>(&self, data: &mut [Complex64]) {
        let n = self.n;
        // len = 2: twiddle is 1.
        if n >= 2 {
            for chunk in data.chunks_exact_mut(2) {
                let t = chunk[1];
                chunk[1] = chunk[0] - t;
                chunk[0] += t;
            }
        }
        // len = 4: twiddles are 1 and ∓i.
        if n >= 4 {
            for chunk in data.chunks_exact_mut(4) {
                let t0 = chunk[2];
                chunk[2] = chunk[0] - t0;
                chunk[0] += t0;
                let b = chunk[3];
                let t1 = if INV {
                    Complex64::new(-b.im, b.re)
                } else {
                    Complex64::new(b.im, -b.re)
                };
                chunk[3] = chunk[1] - t1;
                chunk[1] += t1;
            }
        }
        let mut len = 8;
        for table in &self.stages {
            let half = len / 2;
            for chunk in data.chunks_exact_mut(len) {
                let (lo, hi) = chunk.split_at_mut(half);
                for ((a, b), &w) in lo.iter_mut().zip(hi.iter_mut()).zip(table.iter()) {
                    let w = if INV { w.conj() } else { w };
                    let t = w * *b;
                    *b = *a - t;
                    *a += t;
                }
            }
            len <<= 1;
        }
    }
}

/// Forward transform of a [`ComplexArray`] (unnormalized; see module docs).
pub fn fft_forward(x: &ComplexArray) -> ComplexArray {
    let plan = Fft::new(x.len()).expect("ComplexArray guarantees a power-of-two length");
    let mut data = x.0.clone();
    plan.forward(&mut data);
    ComplexArray(data)
}

/// Inverse transform of a [`ComplexArray`] (carries the `1/N`).
pub fn fft_inverse(x: &ComplexArray) -> ComplexArray {
    let plan = Fft::new(x.len()).expect("ComplexArray guarantees a power-of-two length");
    let mut data = x.0.clone();
    plan.inverse(&mut data);
    ComplexArray(data)
}
