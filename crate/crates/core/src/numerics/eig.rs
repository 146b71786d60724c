//! Implicit-shift QL eigensolver for real symmetric tridiagonal matrices.

use alloc::vec;
use alloc::vec::Vec;

use super::NumericsError;

/// Maximum QL sweeps per eigenvalue before giving up.
const MAX_SWEEPS: usize = 50;

/// A real symmetric tridiagonal matrix stored as its diagonal and
/// off-diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct SymTridiag {
    diag: Vec<f64>,
    offdiag: Vec<f64>,
}

impl SymTridiag {
    /// Builds the matrix from its diagonal (length `n ≥ 1`) and off-diagonal
    /// (length `n − 1`).
    ///
    /// Panics if the lengths are inconsistent or `n == 0`; the dimensions are
    /// a construction-site bug, not a runtime condition.
    pub fn new(diag: Vec<f64>, offdiag: Vec<f64>) -> Self {
        assert!(!diag.is_empty(), "matrix dimension must be at least 1");
        assert_eq!(
            offdiag.len(),
            diag.len() - 1,
            "off-diagonal length must be n - 1"
        );
        Self { diag, offdiag }
    }

    pub fn n(&self) -> usize {
        self.diag.len()
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn offdiag(&self) -> &[f64] {
        &self.offdiag
    }
}

/// Full spectrum of a [`SymTridiag`]: eigenvalues in ascending order with the
/// matching orthonormal eigenvectors.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    n: usize,
    values: Vec<f64>,
    /// Column-major `n × n`; column `j` pairs with `values[j]`.
    vectors: Vec<f64>,
}

impl EigenDecomposition {
    pub fn n(&self) -> usize {
        self.n
    }

    /// Eigenvalues, ascending.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Eigenvector paired with `values[j]`.
    pub fn vector(&self, j: usize) -> &[f64] {
        &self.vectors[j * self.n..(j + 1) * self.n]
    }
}

/// Diagonalizes a symmetric tridiagonal matrix, returning the full spectrum
/// and orthonormal eigenvectors.
///
/// Output is deterministic: eigenvalues are sorted ascending and each
/// eigenvector is normalized with its largest-magnitude component (first such
/// index on ties) made positive.
pub fn eig_sym_tridiag(m: &SymTridiag) -> Result<EigenDecomposition, NumericsError> {
    let n = m.n();
    let mut d = m.diag.clone();
    let mut e = padded_offdiag(m);
    let mut z = vec![0.0f64; n * n];
    for j in 0..n {
        z[j * n + j] = 1.0;
    }
    ql_implicit(&mut d, &mut e, Some(&mut z), n)?;

    // Sort ascending, permuting columns along.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| d[a].partial_cmp(&d[b]).unwrap_or(core::cmp::Ordering::Equal));
    let mut values = Vec::with_capacity(n);
    let mut vectors = vec![0.0f64; n * n];
    for (dst, &src) in order.iter().enumerate() {
        values.push(d[src]);
        let col = &z[src * n..(src + 1) * n];
        vectors[dst * n..(dst + 1) * n].copy_from_slice(col);
    }

    // Fixed sign convention.
    for j in 0..n {
        let col = &mut vectors[j * n..(j + 1) * n];
        let mut imax = 0;
        let mut vmax = 0.0f64;
        for (i, &v) in col.iter().enumerate() {
            if v.abs() > vmax {
                vmax = v.abs();
                imax = i;
            }
        }
        if col[imax] < 0.0 {
            for v in col.iter_mut() {
                *v = -*v;
            }
        }
    }

    Ok(EigenDecomposition { n, values, vectors })
}

/// Eigenvalues only (ascending). Skips the O(n³) vector accumulation; used by
/// dispersion-curve sweeps where only energies are needed.
pub fn eigenvalues_sym_tridiag(m: &SymTridiag) -> Result<Vec<f64>, NumericsError> {
    let n = m.n();
    let mut d = m.diag.clone();
    let mut e = padded_offdiag(m);
    ql_implicit(&mut d, &mut e, None, n)?;
    d.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap_or(core::cmp::Ordering::Equal));
    Ok(d)
}

fn padded_offdiag(m: &SymTridiag) -> Vec<f64> {
    let mut e = Vec::with_capacity(m.n());
    e.extend_from_slice(&m.offdiag);
    e.push(0.0);
    e
}

/// QL with implicit shifts (EISPACK `tql2` lineage). `e` carries the
/// off-diagonal in `e[0..n-1]` and scratch in `e[n-1]`. When `z` is given the
/// plane rotations are accumulated into its columns.
fn ql_implicit(
    d: &mut [f64],
    e: &mut [f64],
    mut z: Option<&mut [f64]>,
    n: usize,
) -> Result<(), NumericsError> {
    if n == 1 {
        return Ok(());
    }
    for l in 0..n {
        let mut iter = 0;
        loop {
            // Look for a negligible off-diagonal element to split at.
            let mut m_split = n - 1;
            for mm in l..n - 1 {
                let dd = d[mm].abs() + d[mm + 1].abs();
                if e[mm].abs() <= f64::EPSILON * dd {
                    m_split = mm;
                    break;
                }
            }
            if m_split == l {
                break;
            }
            iter += 1;
            if iter > MAX_SWEEPS {
                return Err(NumericsError::NonConvergence);
            }

            // Implicit shift from the leading 2x2.
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m_split] - d[l] + e[l] / (g + r.copysign(g));
            let mut s = 1.0f64;
            let mut c = 1.0f64;
            let mut p = 0.0f64;
            let mut underflow = false;
            for i in (l..m_split).rev() {
                let mut f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    // Deflate: rotation chain underflowed.
                    d[i + 1] -= p;
                    e[m_split] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                if let Some(zs) = z.as_deref_mut() {
                    // Rotate columns i and i+1.
                    let (lo, hi) = zs.split_at_mut((i + 1) * n);
                    let col_i = &mut lo[i * n..(i + 1) * n];
                    let col_j = &mut hi[..n];
                    for (a, bb) in col_i.iter_mut().zip(col_j.iter_mut()) {
                        f = *bb;
                        *bb = s * *a + c * f;
                        *a = c * *a - s * f;
                    }
                }
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m_split] = 0.0;
        }
    }
    Ok(())
}
