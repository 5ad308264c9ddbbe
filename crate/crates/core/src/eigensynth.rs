//! Universal synthesis through the spectral decomposition
//! `U = prod_j W_j P_j W_j^dagger`, where `W_j` carries `|j>` to the `j`-th
//! eigenvector and `P_j` phases `|j>` by the eigenvalue.
//!
//! Each `W_j` block is a club-Householder reduction run in reverse, so the
//! whole path exercises the state synthesizer `d^n` times. It exists to
//! validate the spectral route; the QR reduction is the flagship
//! synthesizer.
//!
//! Eigenvectors come from a unitary-safe route: complex Jacobi on the
//! Hermitian part, then Jacobi again on the skew part restricted to each
//! eigenvalue cluster. The basis stays orthonormal to machine precision
//! even under degeneracies because it is only ever touched by rotations.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::gate::Circuit;
use crate::householder::club_householder_onto;
use crate::linalg::{CMatrix, UnitaryMatrix};
use crate::state::{pow, DitString, StateVector};
use crate::triangle::relative_phase_gate;

/// Unit-modulus eigenvalues and an orthonormal eigenvector matrix
/// (eigenvectors are the columns).
#[derive(Debug, Clone)]
pub struct EigenSystem {
    pub eigenvalues: Vec<Complex64>,
    pub vectors: CMatrix,
}

impl EigenSystem {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn vector(&self, j: usize) -> Vec<Complex64> {
        self.vectors.column(j)
    }

    /// Largest eigen-equation residual `||U v - lambda v||`.
    pub fn residual(&self, u: &CMatrix) -> f64 {
        let mut worst = 0.0f64;
        for j in 0..self.dim() {
            let v = self.vector(j);
            let uv = u.mul_vec(&v);
            let r: f64 = uv
                .iter()
                .zip(&v)
                .map(|(a, b)| (a - self.eigenvalues[j] * b).norm_sqr())
                .sum::<f64>()
                .sqrt();
            worst = worst.max(r);
        }
        worst
    }
}

/// Cyclic complex Jacobi diagonalization of a Hermitian matrix. Returns the
/// real eigenvalues (diagonal order) and the accumulated rotation matrix
/// whose columns are eigenvectors.
fn hermitian_jacobi(a: &CMatrix) -> (Vec<f64>, CMatrix) {
    let n = a.dim();
    let mut m = a.clone();
    let mut v = CMatrix::identity(n);
    let scale = m.frobenius_norm() + 1.0;
    for _sweep in 0..200 {
        let mut off = 0.0f64;
        for p in 0..n {
            for q in (p + 1)..n {
                off += m[(p, q)].norm_sqr();
            }
        }
        if (2.0 * off).sqrt() <= 1e-14 * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let beta = m[(p, q)];
                let b = beta.norm();
                if b <= 1e-18 * scale {
                    continue;
                }
                let phase = beta / b; // e^{i phi}
                let u = phase.conj();
                let alpha = m[(p, p)].re;
                let gamma = m[(q, q)].re;
                let tau = (gamma - alpha) / (2.0 * b);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;

                // right-multiply m and v by J, left-multiply m by J^dagger
                for i in 0..n {
                    let aip = m[(i, p)];
                    let aiq = m[(i, q)];
                    m[(i, p)] = aip * c - aiq * (u * s);
                    m[(i, q)] = aip * s + aiq * (u * c);
                    let vip = v[(i, p)];
                    let viq = v[(i, q)];
                    v[(i, p)] = vip * c - viq * (u * s);
                    v[(i, q)] = vip * s + viq * (u * c);
                }
                for j in 0..n {
                    let apj = m[(p, j)];
                    let aqj = m[(q, j)];
                    m[(p, j)] = apj * c - aqj * (u.conj() * s);
                    m[(q, j)] = apj * s + aqj * (u.conj() * c);
                }
            }
        }
    }
    let vals = (0..n).map(|i| m[(i, i)].re).collect();
    (vals, v)
}

/// Eigendecomposition of a unitary via its commuting Hermitian and skew
/// parts, with cluster-wise re-diagonalization.
pub fn unitary_eigendecompose(u: &UnitaryMatrix) -> Result<EigenSystem> {
    let dim = u.dim();
    let m = u.matrix();
    let madj = m.adjoint();
    let mut herm = CMatrix::zeros(dim);
    let mut skew = CMatrix::zeros(dim);
    let half = Complex64::new(0.5, 0.0);
    let nih = Complex64::new(0.0, -0.5); // -i/2
    for r in 0..dim {
        for c in 0..dim {
            herm[(r, c)] = (m[(r, c)] + madj[(r, c)]) * half;
            skew[(r, c)] = (m[(r, c)] - madj[(r, c)]) * nih;
        }
    }

    let (hvals, hvecs) = hermitian_jacobi(&herm);
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| hvals[b].partial_cmp(&hvals[a]).unwrap());

    let mut vectors = CMatrix::zeros(dim);
    for (new, &old) in order.iter().enumerate() {
        for r in 0..dim {
            vectors[(r, new)] = hvecs[(r, old)];
        }
    }
    let sorted_h: Vec<f64> = order.iter().map(|&i| hvals[i]).collect();

    // split into clusters of equal cos(theta), then separate the conjugate
    // branches with the skew part
    let mut start = 0usize;
    while start < dim {
        let mut end = start + 1;
        while end < dim && (sorted_h[end] - sorted_h[start]).abs() <= crate::tol::EIGEN_CLUSTER {
            end += 1;
        }
        let width = end - start;
        if width > 1 {
            let mut kc = CMatrix::zeros(width);
            // K restricted to the cluster basis
            let cols: Vec<Vec<Complex64>> =
                (start..end).map(|j| vectors.column(j)).collect();
            let kcols: Vec<Vec<Complex64>> = cols.iter().map(|c| skew.mul_vec(c)).collect();
            for a in 0..width {
                for b in 0..width {
                    kc[(a, b)] = crate::linalg::inner(&cols[a], &kcols[b]);
                }
            }
            let (_kvals, w) = hermitian_jacobi(&kc);
            for r in 0..dim {
                let old: Vec<Complex64> = (0..width).map(|j| vectors[(r, start + j)]).collect();
                for j in 0..width {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for (i, o) in old.iter().enumerate() {
                        acc += o * w[(i, j)];
                    }
                    vectors[(r, start + j)] = acc;
                }
            }
        }
        start = end;
    }

    // Rayleigh quotients, projected to unit modulus
    let mut eigenvalues = Vec::with_capacity(dim);
    for j in 0..dim {
        let v = vectors.column(j);
        let uv = m.mul_vec(&v);
        let lambda = crate::linalg::inner(&v, &uv);
        let lambda = if lambda.norm() > 0.0 {
            lambda / lambda.norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        eigenvalues.push(lambda);
    }

    let system = EigenSystem {
        eigenvalues,
        vectors,
    };
    let residual = system.residual(m);
    if residual > crate::tol::EIGEN_RESIDUAL {
        return Err(Error::EigenResidual {
            residual,
            tol: crate::tol::EIGEN_RESIDUAL,
        });
    }
    Ok(system)
}

/// The `j`-th spectral block `W_j P_j W_j^dagger` as a gate list: reduce the
/// eigenvector onto `|j>`, phase `|j>`, and undo the reduction. The
/// reduction's global phase cancels between the two wings.
pub fn eigen_blocks(u: &UnitaryMatrix, d: usize, n: usize) -> Result<Vec<Circuit>> {
    let dim = pow(d, n);
    if u.dim() != dim {
        return Err(Error::DimensionMismatch(format!(
            "unitary has dimension {} but d^n = {dim}",
            u.dim()
        )));
    }
    let system = unitary_eigendecompose(u)?;
    let mut blocks = Vec::with_capacity(dim);
    for j in 0..dim {
        let jd = DitString::from_index(d, n, j)?;
        let eigvec = StateVector::new(d, n, system.vector(j))?;
        let reduce = club_householder_onto(&eigvec, &jd)?;
        let theta = system.eigenvalues[j].arg();
        let mut block = Circuit::new(d, n)?;
        block.extend(reduce.gates().iter().cloned())?;
        block.push(relative_phase_gate(&jd, theta)?)?;
        block.extend(reduce.adjoint().gates().iter().cloned())?;
        blocks.push(block);
    }
    Ok(blocks)
}

/// Full spectral synthesis: the concatenation of all `d^n` blocks.
pub fn eigen_synthesize(u: &UnitaryMatrix, d: usize, n: usize) -> Result<Circuit> {
    let mut circuit = Circuit::new(d, n)?;
    for block in eigen_blocks(u, d, n)? {
        circuit.extend(block.gates().iter().cloned())?;
    }
    Ok(circuit)
}
