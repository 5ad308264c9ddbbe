//! Recursive QR-style reduction of an `n`-qudit unitary to a diagonal, plus
//! the diagonal-phase circuit and the composed synthesizer.
//!
//! The reduction processes the matrix in `d^(n-1)`-wide block-columns. For
//! each block-column `k`: every subcolumn below the block diagonal is
//! collapsed onto its local diagonal position by a club-Householder
//! sub-reduction carrying a value control on the current most significant
//! qudit; the per-block leftovers in each column are cleared by one fully
//! controlled fiber reflection pivoted at the diagonal; and the next
//! diagonal block is reduced recursively with one more control. The
//! top-left block is reduced first with no control at all, acting
//! identically on every block-row.
//!
//! Identity-payload gates are emitted rather than skipped, so the control
//! arity histogram of the output is an exact combinatorial function of
//! `(d, n)`; pruning is an explicit post-pass.

use num_complex::Complex64;

use crate::counting::pow_big_guard;
use crate::error::{Error, Result};
use crate::gate::{apply_gate_to_matrix, Circuit, ControlWord, ControlledGate, Letter};
use crate::householder::{householder_matrix, reduce_raw_onto};
use crate::linalg::{CMatrix, UnitaryMatrix};
use crate::state::{pow, DitString};
use crate::DEFAULT_DENSE_LIMIT;

/// Phases of a diagonal unitary, one angle per basis index, each in
/// `(-pi, pi]`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalPhases {
    angles: Vec<f64>,
}

impl DiagonalPhases {
    /// Wraps every angle into `(-pi, pi]`.
    pub fn new(angles: Vec<f64>) -> Self {
        let tau = std::f64::consts::TAU;
        let pi = std::f64::consts::PI;
        let angles = angles
            .into_iter()
            .map(|a| {
                let mut a = a.rem_euclid(tau);
                if a > pi {
                    a -= tau;
                }
                a
            })
            .collect();
        DiagonalPhases { angles }
    }

    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    pub fn len(&self) -> usize {
        self.angles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.angles.is_empty()
    }

    /// The diagonal unitary `sum_j e^{i theta_j} |j><j|` as a dense matrix.
    pub fn matrix(&self) -> CMatrix {
        let mut m = CMatrix::zeros(self.angles.len());
        for (j, &a) in self.angles.iter().enumerate() {
            m[(j, j)] = Complex64::from_polar(1.0, a);
        }
        m
    }
}

/// Output of the reduction: gates in time order and the residual diagonal,
/// so that `matrix(reduction) * U = diag(e^{i theta})`.
#[derive(Debug, Clone)]
pub struct TriangleResult {
    pub reduction: Circuit,
    pub phases: DiagonalPhases,
}

/// Reduces `u` to a diagonal unitary with controlled one-qudit gates.
pub fn triangle_reduce(u: &UnitaryMatrix, d: usize, n: usize) -> Result<TriangleResult> {
    Ok(reduce_with_audit(u, d, n, None)?.0)
}

/// Per-column audit record emitted while reducing: after finishing column
/// `column`, the largest deviation of columns `0..=column` from phase-scaled
/// standard basis vectors.
#[derive(Debug, Clone)]
pub struct ColumnAudit {
    pub column: usize,
    pub pinned_residual: f64,
}

/// Like [`triangle_reduce`], also reporting the intermediate pinned-column
/// residuals used by the correctness tripwires.
pub fn triangle_reduce_audited(
    u: &UnitaryMatrix,
    d: usize,
    n: usize,
) -> Result<(TriangleResult, Vec<ColumnAudit>)> {
    let mut audits = Vec::new();
    let result = reduce_with_audit(u, d, n, Some(&mut audits))?;
    Ok((result.0, audits))
}

fn reduce_with_audit(
    u: &UnitaryMatrix,
    d: usize,
    n: usize,
    mut audits: Option<&mut Vec<ColumnAudit>>,
) -> Result<(TriangleResult, ())> {
    if d < 2 || n == 0 {
        return Err(Error::InvalidArgument(format!(
            "invalid register shape d = {d}, n = {n}"
        )));
    }
    pow_big_guard(d, n)?;
    let dim = pow(d, n);
    if u.dim() != dim {
        return Err(Error::DimensionMismatch(format!(
            "unitary has dimension {} but d^n = {dim}",
            u.dim()
        )));
    }
    if dim > DEFAULT_DENSE_LIMIT {
        return Err(Error::DenseLimitExceeded {
            dim,
            limit: DEFAULT_DENSE_LIMIT,
        });
    }
    let mut m = u.matrix().clone();
    let mut gates = Vec::new();
    let mut prefix: Vec<Letter> = Vec::new();
    reduce_block(d, n, &mut m, &mut gates, &mut prefix, true, &mut audits)?;
    let angles = (0..dim).map(|j| m[(j, j)].arg()).collect();
    let reduction = Circuit::from_gates(d, n, gates)?;
    Ok((
        TriangleResult {
            reduction,
            phases: DiagonalPhases::new(angles),
        },
        (),
    ))
}

/// One level of the recursion. `prefix` carries the letters accumulated on
/// the qudits above this level: a digit for diagonal-block calls, a star for
/// the uncontrolled top-left call. Reads address the diagonal block with
/// stars read as digit zero. `top` marks the outermost call, the only level
/// at which column audits fire.
#[allow(clippy::too_many_arguments)]
fn reduce_block(
    d: usize,
    n: usize,
    m: &mut CMatrix,
    gates: &mut Vec<ControlledGate>,
    prefix: &mut Vec<Letter>,
    top: bool,
    audits: &mut Option<&mut Vec<ColumnAudit>>,
) -> Result<()> {
    let level = n - prefix.len();
    let read: Vec<u8> = prefix
        .iter()
        .map(|l| match l {
            Letter::Digit(v) => *v,
            _ => 0,
        })
        .collect();

    if level == 1 {
        let payload = base_case_payload(d, n, m, &read);
        let mut letters = prefix.clone();
        letters.push(Letter::Target);
        let gate = ControlledGate::new(ControlWord::new(d, letters)?, payload)?;
        apply_gate_to_matrix(&gate, m);
        gates.push(gate);
        return Ok(());
    }

    // Top-left block, written uncontrolled to the lower lines.
    prefix.push(Letter::Star);
    reduce_block(d, n, m, gates, prefix, false, audits)?;
    prefix.pop();

    let sub = pow(d, level - 1);
    let mut jd = vec![0u8; level - 1];
    for k in 0..d {
        for j_local in 0..sub {
            crate::gate::decompose(j_local, d, level - 1, &mut jd);
            let col = mixed_index(d, n, &read, k as u8, &jd);
            for r in (k + 1)..d {
                let v: Vec<Complex64> = (0..sub)
                    .map(|x| {
                        let mut xd = vec![0u8; level - 1];
                        crate::gate::decompose(x, d, level - 1, &mut xd);
                        m[(mixed_index(d, n, &read, r as u8, &xd), col)]
                    })
                    .collect();
                for (_, word, payload, _) in reduce_raw_onto(d, level - 1, &v, &jd)? {
                    let mut letters = prefix.clone();
                    letters.push(Letter::Digit(r as u8));
                    letters.extend_from_slice(word.letters());
                    let gate = ControlledGate::new(ControlWord::new(d, letters)?, payload)?;
                    apply_gate_to_matrix(&gate, m);
                    gates.push(gate);
                }
            }
            if k < d - 1 {
                // Clear the per-block leftovers on the column's fiber over
                // this qudit. Entries above the block diagonal are excluded
                // from the reflection, so basis vectors below the pivot's
                // truncation stay fixed exactly.
                let mut fiber: Vec<Complex64> = (0..d)
                    .map(|c| m[(mixed_index(d, n, &read, c as u8, &jd), col)])
                    .collect();
                for f in fiber.iter_mut().take(k) {
                    *f = Complex64::new(0.0, 0.0);
                }
                let payload = householder_matrix(&fiber, k).matrix;
                let mut letters = prefix.clone();
                letters.push(Letter::Target);
                letters.extend(jd.iter().map(|&v| Letter::Digit(v)));
                let gate = ControlledGate::new(ControlWord::new(d, letters)?, payload)?;
                apply_gate_to_matrix(&gate, m);
                gates.push(gate);
            }
            if top {
                if let Some(audits) = audits.as_deref_mut() {
                    audits.push(ColumnAudit {
                        column: col,
                        pinned_residual: pinned_residual(m, col),
                    });
                }
            }
        }
        if k + 1 < d {
            prefix.push(Letter::Digit((k + 1) as u8));
            reduce_block(d, n, m, gates, prefix, false, audits)?;
            prefix.pop();
        }
    }
    Ok(())
}

/// QR of the `d x d` diagonal block at `read`, returned as a single payload
/// `V` with `V * block` upper triangular.
fn base_case_payload(d: usize, n: usize, m: &CMatrix, read: &[u8]) -> CMatrix {
    let rows: Vec<usize> = (0..d).map(|i| mixed_index(d, n, read, i as u8, &[])).collect();
    let mut block = CMatrix::zeros(d);
    for (bi, &ri) in rows.iter().enumerate() {
        for (bj, &rj) in rows.iter().enumerate() {
            block[(bi, bj)] = m[(ri, rj)];
        }
    }
    let mut v = CMatrix::identity(d);
    for c in 0..d.saturating_sub(1) {
        let mut phi = block.column(c);
        for p in phi.iter_mut().take(c) {
            *p = Complex64::new(0.0, 0.0);
        }
        let h = householder_matrix(&phi, c).matrix;
        block = h.mul(&block);
        v = h.mul(&v);
    }
    v
}

/// Basis index of `read_prefix ++ [mid] ++ tail`.
fn mixed_index(d: usize, n: usize, read: &[u8], mid: u8, tail: &[u8]) -> usize {
    debug_assert_eq!(read.len() + 1 + tail.len(), n);
    let mut idx = 0usize;
    for &c in read {
        idx = idx * d + c as usize;
    }
    idx = idx * d + mid as usize;
    for &c in tail {
        idx = idx * d + c as usize;
    }
    idx
}

/// Largest deviation of columns `0..=col` from phase-scaled basis vectors.
fn pinned_residual(m: &CMatrix, col: usize) -> f64 {
    let mut worst: f64 = 0.0;
    for c in 0..=col {
        let mut off = 0.0;
        for r in 0..m.dim() {
            if r != c {
                off += m[(r, c)].norm_sqr();
            }
        }
        let diag = (m[(c, c)].norm() - 1.0).abs();
        worst = worst.max(off.sqrt()).max(diag);
    }
    worst
}

/// One controlled relative-phase gate placing `e^{i theta}` on basis state
/// `|j>`: controls on the lower qudits pick the tail digits, the payload
/// phases the leading digit.
pub fn relative_phase_gate(j: &DitString, theta: f64) -> Result<ControlledGate> {
    let d = j.d();
    let mut letters = vec![Letter::Target];
    letters.extend(j.digits()[1..].iter().map(|&v| Letter::Digit(v)));
    let mut payload = CMatrix::identity(d);
    let c1 = j.digit(0) as usize;
    payload[(c1, c1)] = Complex64::from_polar(1.0, theta);
    ControlledGate::new(ControlWord::new(d, letters)?, payload)
}

/// Circuit realizing `diag(e^{i theta_j})`: one relative-phase gate per
/// nonzero angle.
pub fn diagonal_circuit(phases: &DiagonalPhases, d: usize, n: usize) -> Result<Circuit> {
    if phases.len() != pow(d, n) {
        return Err(Error::DimensionMismatch(format!(
            "{} phases but d^n = {}",
            phases.len(),
            pow(d, n)
        )));
    }
    let mut circuit = Circuit::new(d, n)?;
    for (j, &theta) in phases.angles().iter().enumerate() {
        if theta != 0.0 {
            let jd = DitString::from_index(d, n, j)?;
            circuit.push(relative_phase_gate(&jd, theta)?)?;
        }
    }
    Ok(circuit)
}

/// Full synthesis: `U = (reduction gates)^dagger * diag(e^{i theta})`, laid
/// out as the diagonal circuit followed by the adjoint reduction gates in
/// reverse time order.
pub fn synthesize(u: &UnitaryMatrix, d: usize, n: usize) -> Result<Circuit> {
    let result = triangle_reduce(u, d, n)?;
    let mut circuit = diagonal_circuit(&result.phases, d, n)?;
    for gate in result.reduction.adjoint().gates() {
        circuit.push(gate.clone())?;
    }
    Ok(circuit)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::counting::circuit_histogram;
    use crate::verify;
    use num_bigint::BigUint;
    use std::f64::consts::PI;

    #[test]
    fn base_case_reduces_one_qudit_unitary() {
        let u = verify::haar_random_unitary(4, 41).unwrap();
        let result = triangle_reduce(&u, 4, 1).unwrap();
        assert_eq!(result.reduction.len(), 1);
        assert_eq!(result.reduction.gates()[0].word().control_count(), 0);
        let reduced = result.reduction.matrix().unwrap().mul(u.matrix());
        assert!(reduced.frobenius_distance(&result.phases.matrix()) < 1e-10);
    }

    #[test]
    fn identity_input_gives_identity_payloads_and_zero_phases() {
        let u = UnitaryMatrix::new(CMatrix::identity(9)).unwrap();
        let result = triangle_reduce(&u, 3, 2).unwrap();
        assert!(result
            .reduction
            .gates()
            .iter()
            .all(|g| g.is_identity(1e-12)));
        assert!(result.phases.angles().iter().all(|&a| a == 0.0));
        assert!(diagonal_circuit(&result.phases, 3, 2).unwrap().is_empty());
    }

    #[test]
    fn haar_two_qubit_reduction() {
        let u = verify::haar_random_unitary(4, 7).unwrap();
        let (result, audits) = triangle_reduce_audited(&u, 2, 2).unwrap();
        let reduced = result.reduction.matrix().unwrap().mul(u.matrix());
        assert!(reduced.frobenius_distance(&result.phases.matrix()) < 1e-9);
        for a in &audits {
            assert!(
                a.pinned_residual < 1e-9,
                "column {} residual {}",
                a.column,
                a.pinned_residual
            );
        }
    }

    #[test]
    fn diagonal_circuit_examples() {
        // all-zero phases: empty circuit
        let p = DiagonalPhases::new(vec![0.0; 4]);
        assert!(diagonal_circuit(&p, 2, 2).unwrap().is_empty());

        // theta = (pi, 0, 0, 0): one gate, word T0, payload diag(-1, 1)
        let p = DiagonalPhases::new(vec![PI, 0.0, 0.0, 0.0]);
        let c = diagonal_circuit(&p, 2, 2).unwrap();
        assert_eq!(c.len(), 1);
        assert_eq!(c.gates()[0].word().to_string(), "T0");
        let m = c.matrix().unwrap();
        assert!(m.frobenius_distance(&p.matrix()) < 1e-12);

        // random phases, d = 3, n = 2: at most 9 gates, exact diagonal
        let angles: Vec<f64> = (0..9).map(|i| (i as f64) * 0.37 - 1.1).collect();
        let p = DiagonalPhases::new(angles);
        let c = diagonal_circuit(&p, 3, 2).unwrap();
        assert!(c.len() <= 9);
        assert!(c.matrix().unwrap().frobenius_distance(&p.matrix()) < 1e-10);
    }

    #[test]
    fn phases_wrap_into_half_open_interval() {
        let p = DiagonalPhases::new(vec![3.0 * PI, -PI, 0.0]);
        assert!((p.angles()[0] - PI).abs() < 1e-12);
        assert!((p.angles()[1] - PI).abs() < 1e-12);
        assert_eq!(p.angles()[2], 0.0);
        assert!(p.angles().iter().all(|&a| a > -PI && a <= PI));
    }

    #[test]
    fn synthesize_reconstructs_haar_unitaries() {
        for (d, n, seed) in [(2usize, 2usize, 1u64), (3, 2, 2), (2, 3, 3)] {
            let u = verify::haar_random_unitary(pow(d, n), seed).unwrap();
            let c = synthesize(&u, d, n).unwrap();
            let dist = c.matrix().unwrap().frobenius_distance(u.matrix());
            assert!(dist <= 1e-9, "d = {d}, n = {n}: {dist:.2e}");
        }
    }

    #[test]
    fn reduction_histograms_match_fig6_totals() {
        for (d, n, want) in [(3usize, 2usize, 17u64), (2, 3, 40)] {
            let u = verify::haar_random_unitary(pow(d, n), 5).unwrap();
            let result = triangle_reduce(&u, d, n).unwrap();
            let hist = circuit_histogram(&result.reduction);
            let weighted: BigUint = hist
                .counts()
                .iter()
                .map(|(&k, v)| v * BigUint::from(k))
                .sum();
            assert_eq!(weighted, BigUint::from(want), "d = {d}, n = {n}");
        }
    }

    #[test]
    fn cleanup_gates_fix_rows_above_the_block_diagonal() {
        // every fully controlled gate in the reduction must act as the exact
        // identity on basis vectors below its truncation pivot
        let d = 3;
        let n = 2;
        let u = verify::haar_random_unitary(9, 33).unwrap();
        let result = triangle_reduce(&u, d, n).unwrap();
        let mut saw_cleanup = false;
        for g in result.reduction.gates() {
            if g.word().target_position() == 0 && g.word().control_count() == n - 1 {
                saw_cleanup = true;
                let p = g.payload();
                // rows/cols strictly above the first non-identity diagonal
                // entry are exact unit vectors
                let pivot = (0..d)
                    .find(|&r| {
                        (0..d).any(|c| {
                            let want = if r == c { 1.0 } else { 0.0 };
                            (p[(r, c)] - Complex64::new(want, 0.0)).norm() > 0.0
                        })
                    })
                    .unwrap_or(d);
                for r in 0..pivot {
                    for c in 0..d {
                        let want = if r == c { 1.0 } else { 0.0 };
                        assert_eq!(p[(r, c)], Complex64::new(want, 0.0));
                        assert_eq!(p[(c, r)], Complex64::new(want, 0.0));
                    }
                }
            }
        }
        assert!(saw_cleanup);
    }

    #[test]
    fn rejects_wrong_dimension() {
        let u = verify::haar_random_unitary(4, 1).unwrap();
        assert!(matches!(
            triangle_reduce(&u, 3, 2),
            Err(Error::DimensionMismatch(_))
        ));
    }
}
