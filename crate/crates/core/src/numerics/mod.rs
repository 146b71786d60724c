//! Self-contained numeric kernels.
//!
//! Nothing in here knows about the physics; the kernels are exactly the four
//! pieces the rest of the crate needs: a full-spectrum symmetric tridiagonal
//! eigensolver (implicit-shift QL), a radix-2 FFT pair, polynomial least
//! squares, and central finite differences with optional Richardson
//! extrapolation. All operations are pure functions of their inputs and are
//! safe to call concurrently.

mod diff;
mod eig;
mod fft;
mod fit;

pub use diff::{central_difference, DiffOrder};
pub use eig::{eig_sym_tridiag, eigenvalues_sym_tridiag, EigenDecomposition, SymTridiag};
pub use fft::{fft_forward, fft_inverse, ComplexArray, Fft};
pub use fit::polyfit_least_squares;

use core::fmt;

/// Errors reported by the numeric kernels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NumericsError {
    /// An eigenvalue failed to converge within the iteration budget.
    NonConvergence,
    /// FFT input length is not a power of two.
    LengthNotPowerOfTwo,
    /// Fewer sample points than fit coefficients.
    UnderdeterminedFit,
    /// The least-squares system is numerically rank deficient (degenerate
    /// abscissa set).
    IllConditioned,
    /// Not enough symmetric samples around the stencil centre.
    InsufficientSamples,
}

impl fmt::Display for NumericsError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::NonConvergence => write!(f, "eigenvalue iteration did not converge"),
            Self::LengthNotPowerOfTwo => write!(f, "sample length is not a power of two"),
            Self::UnderdeterminedFit => write!(f, "fewer points than fit coefficients"),
            Self::IllConditioned => write!(f, "least-squares system is rank deficient"),
            Self::InsufficientSamples => write!(f, "not enough samples for the stencil"),
        }
    }
}

impl core::error::Error for NumericsError {}
