//! Dense complex linear algebra on small square matrices.
//!
//! Everything here operates at desk scale (dimension at most a few
//! thousand); the algorithms are written for clarity and determinism, not
//! for large-matrix throughput. Products use a fixed summation order so
//! results are bit-identical from run to run.

use num_complex::Complex64;
use std::ops::{Index, IndexMut};

use crate::error::{Error, Result};

/// A square complex matrix in row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl CMatrix {
    pub fn zeros(dim: usize) -> Self {
        CMatrix {
            dim,
            data: vec![Complex64::new(0.0, 0.0); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = CMatrix::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    /// Builds a matrix from rows of (re, im) pairs.
    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self> {
        let dim = rows.len();
        let mut m = CMatrix::zeros(dim);
        for (r, row) in rows.iter().enumerate() {
            if row.len() != dim {
                return Err(Error::DimensionMismatch(format!(
                    "row {r} has {} entries, expected {dim}",
                    row.len()
                )));
            }
            for (c, z) in row.iter().enumerate() {
                m[(r, c)] = *z;
            }
        }
        Ok(m)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn row(&self, r: usize) -> &[Complex64] {
        &self.data[r * self.dim..(r + 1) * self.dim]
    }

    pub fn column(&self, c: usize) -> Vec<Complex64> {
        (0..self.dim).map(|r| self[(r, c)]).collect()
    }

    pub fn adjoint(&self) -> CMatrix {
        let mut out = CMatrix::zeros(self.dim);
        for r in 0..self.dim {
            for c in 0..self.dim {
                out[(c, r)] = self[(r, c)].conj();
            }
        }
        out
    }

    /// Matrix product `self * rhs`.
    pub fn mul(&self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.dim, rhs.dim, "matrix dimensions must agree");
        let n = self.dim;
        let mut out = CMatrix::zeros(n);
        for r in 0..n {
            for k in 0..n {
                let a = self[(r, k)];
                if a.re == 0.0 && a.im == 0.0 {
                    continue;
                }
                for c in 0..n {
                    out[(r, c)] += a * rhs[(k, c)];
                }
            }
        }
        out
    }

    /// Matrix-vector product `self * v`.
    pub fn mul_vec(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(self.dim, v.len(), "matrix and vector dimensions must agree");
        let n = self.dim;
        let mut out = vec![Complex64::new(0.0, 0.0); n];
        for r in 0..n {
            let mut acc = Complex64::new(0.0, 0.0);
            for c in 0..n {
                acc += self[(r, c)] * v[c];
            }
            out[r] = acc;
        }
        out
    }

    pub fn scale(&self, z: Complex64) -> CMatrix {
        CMatrix {
            dim: self.dim,
            data: self.data.iter().map(|a| a * z).collect(),
        }
    }

    pub fn sub(&self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.dim, rhs.dim);
        CMatrix {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(rhs.data.iter())
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Frobenius distance to another matrix.
    pub fn frobenius_distance(&self, rhs: &CMatrix) -> f64 {
        self.sub(rhs).frobenius_norm()
    }

    /// `|| A^dagger A - I ||_F`, the measure used by every unitarity check.
    pub fn unitarity_defect(&self) -> f64 {
        let prod = self.adjoint().mul(self);
        prod.frobenius_distance(&CMatrix::identity(self.dim))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Frobenius distance to the identity, used when pruning trivial gates.
    pub fn identity_defect(&self) -> f64 {
        self.frobenius_distance(&CMatrix::identity(self.dim))
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = Complex64;
    fn index(&self, (r, c): (usize, usize)) -> &Complex64 {
        &self.data[r * self.dim + c]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Complex64 {
        &mut self.data[r * self.dim + c]
    }
}

/// A matrix validated to be unitary on ingestion.
///
/// The check is `||U^dagger U - I||_F <= 1e-10 * dim`; construction fails
/// otherwise. Internal algorithm code works on raw [`CMatrix`] values and
/// re-validates only at module boundaries.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryMatrix(CMatrix);

impl UnitaryMatrix {
    pub fn new(m: CMatrix) -> Result<Self> {
        if !m.is_finite() {
            return Err(Error::InvalidArgument("matrix has non-finite entries".into()));
        }
        let tol = crate::tol::UNITARY_PER_DIM * m.dim() as f64;
        let defect = m.unitarity_defect();
        if defect > tol {
            return Err(Error::NotUnitary { defect, tol });
        }
        Ok(UnitaryMatrix(m))
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }
}

impl std::ops::Deref for UnitaryMatrix {
    type Target = CMatrix;
    fn deref(&self) -> &CMatrix {
        &self.0
    }
}

pub(crate) fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub(crate) fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}
