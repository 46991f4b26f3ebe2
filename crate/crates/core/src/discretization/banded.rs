//! Symmetric pentadiagonal systems, factored once as `L D Lᵀ`.

use crate::error::{Error, Result};
use crate::scalar::{Cplx, Real};

/// Symmetric pentadiagonal matrix stored by diagonals.
#[derive(Debug, Clone, PartialEq)]
pub struct SymPentadiagonal<T> {
    /// `A[i][i]`
    pub diag: Vec<T>,
    /// `A[i+1][i]`, length `n - 1`
    pub sub1: Vec<T>,
    /// `A[i+2][i]`, length `n - 2`
    pub sub2: Vec<T>,
}

impl<T: Real> SymPentadiagonal<T> {
    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// `c0·I + c1·self`
    pub fn affine(&self, c0: T, c1: T) -> Self {
        SymPentadiagonal {
            diag: self.diag.iter().map(|&d| c0 + c1 * d).collect(),
            sub1: self.sub1.iter().map(|&d| c1 * d).collect(),
            sub2: self.sub2.iter().map(|&d| c1 * d).collect(),
        }
    }

    pub fn matvec(&self, x: &[Cplx<T>], out: &mut [Cplx<T>]) {
        let n = self.len();
        assert_eq!(x.len(), n);
        assert_eq!(out.len(), n);
        for i in 0..n {
            let mut acc = x[i] * self.diag[i];
            if i >= 1 {
                acc = acc + x[i - 1] * self.sub1[i - 1];
            }
            if i >= 2 {
                acc = acc + x[i - 2] * self.sub2[i - 2];
            }
            if i + 1 < n {
                acc = acc + x[i + 1] * self.sub1[i];
            }
            if i + 2 < n {
                acc = acc + x[i + 2] * self.sub2[i];
            }
            out[i] = acc;
        }
    }

    /// `L D Lᵀ` factorization without pivoting; requires positive definiteness.
    pub fn factor(&self) -> Result<PentaFactor<T>> {
        let n = self.len();
        if n < 3 || self.sub1.len() + 1 != n || self.sub2.len() + 2 != n {
            return Err(Error::SolveFailure(format!(
                "malformed pentadiagonal system of order {n}"
            )));
        }
        let mut d = vec![T::zero(); n];
        let mut l1 = vec![T::zero(); n]; // l1[i] = L[i][i-1]
        let mut l2 = vec![T::zero(); n]; // l2[i] = L[i][i-2]
        for i in 0..n {
            let mut di = self.diag[i];
            if i >= 1 {
                di = di - l1[i] * l1[i] * d[i - 1];
            }
            if i >= 2 {
                di = di - l2[i] * l2[i] * d[i - 2];
            }
            if !(di > T::zero()) || !di.is_finite() {
                return Err(Error::SolveFailure(format!(
                    "non-positive pivot {di} at row {i}"
                )));
            }
            d[i] = di;
            if i + 2 < n {
                l2[i + 2] = self.sub2[i] / di;
            }
            if i + 1 < n {
                let mut b = self.sub1[i];
                if i >= 1 {
                    b = b - l2[i + 1] * l1[i] * d[i - 1];
                }
                l1[i + 1] = b / di;
            }
        }
        Ok(PentaFactor { d, l1, l2 })
    }
}

#[derive(Debug, Clone)]
pub struct PentaFactor<T> {
    d: Vec<T>,
    l1: Vec<T>,
    l2: Vec<T>,
}

impl<T: Real> PentaFactor<T> {
    pub fn len(&self) -> usize {
        self.d.len()
    }

    pub fn is_empty(&self) -> bool {
        self.d.is_empty()
    }

    /// Solves in place.
    pub fn solve(&self, rhs: &mut [Cplx<T>]) {
        let n = self.len();
        assert_eq!(rhs.len(), n);
        for i in 1..n {
            let mut z = rhs[i] - rhs[i - 1] * self.l1[i];
            if i >= 2 {
                z = z - rhs[i - 2] * self.l2[i];
            }
            rhs[i] = z;
        }
        for i in 0..n {
            rhs[i] = rhs[i] / self.d[i];
        }
        for i in (0..n.saturating_sub(1)).rev() {
            let mut x = rhs[i] - rhs[i + 1] * self.l1[i + 1];
            if i + 2 < n {
                x = x - rhs[i + 2] * self.l2[i + 2];
            }
            rhs[i] = x;
        }
    }
}
