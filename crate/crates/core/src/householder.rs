//! One-qudit complex Householder reflections and the club-scheduled
//! state-synthesis reductions built from them.
//!
//! Given an amplitude vector `phi` on one qudit, the reflection
//!
//! ```text
//! eta = phi - ||phi|| * (phi_pivot / |phi_pivot|) * e_pivot
//! W   = I - (2 / <eta|eta>) |eta><eta|
//! ```
//!
//! maps `phi` to a multiple of `e_pivot` and fixes, exactly, every basis
//! vector outside `supp(phi) + {pivot}`. Scheduling these reflections over
//! the club sequence collapses an `n`-qudit state onto `|0...0>` with
//! `(d^n - 1)/(d - 1)` gates carrying at most one control each.

use num_complex::Complex64;

use crate::clubseq::{club_sequence_iter, sequence_len, ClubTerm};
use crate::error::{Error, Result};
use crate::gate::{inc_power, Circuit, ControlWord, ControlledGate, Letter};
use crate::linalg::CMatrix;
use crate::state::{pow, DitString, StateVector};

/// A reflection payload plus a flag marking the degenerate (already
/// collapsed) case, where the identity is returned instead.
#[derive(Debug, Clone)]
pub struct HouseholderResult {
    pub matrix: CMatrix,
    pub degenerate: bool,
}

/// One scheduled reduction step: the club term, the gate it produced, and
/// its position in the sequence.
#[derive(Debug, Clone)]
pub struct SynthesisStep {
    pub term: ClubTerm,
    pub gate: ControlledGate,
    pub step_index: usize,
    pub degenerate: bool,
}

/// Builds the reflection collapsing `phi` onto `e_pivot`.
///
/// The zero vector and fibers already collapsed onto the pivot yield the
/// identity with the degenerate flag set. When the pivot amplitude
/// vanishes, its phase factor is taken to be 1.
pub fn one_qudit_householder(phi: &[Complex64], pivot: usize) -> Result<HouseholderResult> {
    let d = phi.len();
    if d < 2 {
        return Err(Error::InvalidArgument(format!(
            "fiber must have at least 2 entries, got {d}"
        )));
    }
    if pivot >= d {
        return Err(Error::InvalidArgument(format!(
            "pivot {pivot} out of range for d = {d}"
        )));
    }
    if phi.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::InvalidArgument("fiber has non-finite entries".into()));
    }
    Ok(householder_matrix(phi, pivot))
}

/// Core reflection construction on a raw fiber; see [`one_qudit_householder`].
///
/// `delta = ||phi|| - |phi_pivot|` is computed as
/// `rest^2 / (||phi|| + |phi_pivot|)` to avoid cancellation when the fiber
/// is nearly collapsed.
pub(crate) fn householder_matrix(phi: &[Complex64], pivot: usize) -> HouseholderResult {
    let d = phi.len();
    let s2: f64 = phi.iter().map(|z| z.norm_sqr()).sum();
    let s = s2.sqrt();
    let identity = HouseholderResult {
        matrix: CMatrix::identity(d),
        degenerate: true,
    };
    if s == 0.0 {
        return identity;
    }
    let ap2 = phi[pivot].norm_sqr();
    let rest2 = (s2 - ap2).max(0.0);
    if rest2.sqrt() <= crate::tol::DEGENERATE_FIBER * s {
        return identity;
    }
    let ap = ap2.sqrt();
    let phase = if ap > 0.0 {
        phi[pivot] / ap
    } else {
        Complex64::new(1.0, 0.0)
    };
    let delta = rest2 / (s + ap);
    let mut eta = phi.to_vec();
    eta[pivot] = -phase * delta;
    let coef = 2.0 / (2.0 * s * delta);
    let mut w = CMatrix::identity(d);
    for r in 0..d {
        for c in 0..d {
            w[(r, c)] -= coef * eta[r] * eta[c].conj();
        }
    }
    HouseholderResult {
        matrix: w,
        degenerate: false,
    }
}

/// Derives the control word for a club term: target on the leftmost club,
/// one numeric control on the rightmost nonzero digit if the term has one.
pub fn word_for_term(term: &ClubTerm) -> Result<ControlWord> {
    let n = term.n();
    let mut letters = vec![Letter::Star; n];
    letters[term.leftmost_club()] = Letter::Target;
    if let Some(q) = term.rightmost_nonzero() {
        letters[q] = Letter::Digit(term.prefix()[q]);
    }
    ControlWord::new(term.d(), letters)
}

/// Runs Single-club-Householder for one term against the running state.
pub fn single_club_householder(
    term: &ClubTerm,
    psi: &StateVector,
    step_index: usize,
) -> Result<SynthesisStep> {
    if psi.d() != term.d() || psi.n() != term.n() {
        return Err(Error::DimensionMismatch(format!(
            "term is ({}, {}) but state is ({}, {})",
            term.d(),
            term.n(),
            psi.d(),
            psi.n()
        )));
    }
    let (word, payload, degenerate) = step_for_term(term, psi.amplitudes())?;
    Ok(SynthesisStep {
        term: term.clone(),
        gate: ControlledGate::new(word, payload)?,
        step_index,
        degenerate,
    })
}

/// Word and payload for one term, reading the fiber
/// `phi_k = <t_1 .. t_{l-1} k 0 .. 0 | psi>` from a raw amplitude slice.
fn step_for_term(
    term: &ClubTerm,
    amps: &[Complex64],
) -> Result<(ControlWord, CMatrix, bool)> {
    let d = term.d();
    let n = term.n();
    let ell = term.leftmost_club();
    let stride = pow(d, n - 1 - ell);
    let prefix = term.prefix();
    let mut base = 0usize;
    for &c in &prefix {
        base = base * d + c as usize;
    }
    base *= pow(d, n - ell); // zero-fill positions ell..n
    let fiber: Vec<Complex64> = (0..d).map(|k| amps[base + k * stride]).collect();
    let hh = householder_matrix(&fiber, 0);
    Ok((word_for_term(term)?, hh.matrix, hh.degenerate))
}

/// Permutes amplitudes by the digit shifts `c_i -> (c_i - shift_i) mod d`,
/// the index action of the local operator that carries `|j>` to `|0...0>`.
fn shift_down(d: usize, n: usize, amps: &[Complex64], shifts: &[u8]) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); amps.len()];
    let mut digits = vec![0u8; n];
    for (idx, &z) in amps.iter().enumerate() {
        crate::gate::decompose(idx, d, n, &mut digits);
        let mut shifted = 0usize;
        for (pos, &c) in digits.iter().enumerate() {
            let c2 = (c as usize + d - shifts[pos] as usize) % d;
            shifted = shifted * d + c2;
        }
        out[shifted] = z;
    }
    out
}

/// Raw club reduction collapsing an amplitude vector onto basis index
/// `target` (digits). The vector need not be normalized. Emitted gates are
/// already conjugated per the shift similarity, so no explicit shift gates
/// appear. Degenerate fibers still emit identity-payload steps.
pub(crate) fn reduce_raw_onto(
    d: usize,
    n: usize,
    amps: &[Complex64],
    target: &[u8],
) -> Result<Vec<(ClubTerm, ControlWord, CMatrix, bool)>> {
    let all_zero = target.iter().all(|&t| t == 0);
    let mut work = if all_zero {
        amps.to_vec()
    } else {
        shift_down(d, n, amps, target)
    };
    let mut steps = Vec::with_capacity(sequence_len(d, n)?);
    for term in club_sequence_iter(d, n)? {
        let (word, payload, degenerate) = step_for_term(&term, &work)?;
        apply_raw(&word, &payload, d, n, &mut work);
        let (word, payload) = if all_zero {
            (word, payload)
        } else {
            conjugate_step(&word, &payload, target)?
        };
        steps.push((term, word, payload, degenerate));
    }
    Ok(steps)
}

/// Applies a word/payload pair to a raw amplitude slice.
fn apply_raw(word: &ControlWord, payload: &CMatrix, d: usize, n: usize, amps: &mut [Complex64]) {
    // built unchecked: payload comes straight from householder_matrix
    let gate = ControlledGate::new(word.clone(), payload.clone())
        .expect("reflection payloads are unitary");
    let _ = (d, n);
    gate.apply_in_place(amps);
}

/// Shift similarity: word letters move by the target digits, the payload is
/// conjugated by the cyclic shift on the target line.
fn conjugate_step(
    word: &ControlWord,
    payload: &CMatrix,
    shifts: &[u8],
) -> Result<(ControlWord, CMatrix)> {
    let d = word.d();
    let letters: Vec<Letter> = word
        .letters()
        .iter()
        .enumerate()
        .map(|(pos, l)| match l {
            Letter::Digit(v) => Letter::Digit(((*v as usize + shifts[pos] as usize) % d) as u8),
            other => *other,
        })
        .collect();
    let new_word = ControlWord::new(d, letters)?;
    let dl = shifts[word.target_position()] as usize;
    let payload = if dl == 0 {
        payload.clone()
    } else {
        inc_power(dl, d).mul(payload).mul(&inc_power(d - dl, d))
    };
    Ok((new_word, payload))
}

/// Everything produced by one synthesis run: the circuit, the per-step
/// records, and the trace of intermediate states (`trace[j]` is the state
/// after `j` gates, so `trace[0]` is the input).
#[derive(Debug, Clone)]
pub struct SynthesisRun {
    pub circuit: Circuit,
    pub steps: Vec<SynthesisStep>,
    pub trace: Vec<StateVector>,
}

/// Club-Householder reduction of a normalized state to `|0...0>` up to a
/// global phase, recording the full trace.
pub fn state_synthesis_run(psi: &StateVector) -> Result<SynthesisRun> {
    psi.check_normalized()?;
    let d = psi.d();
    let n = psi.n();
    let mut circuit = Circuit::new(d, n)?;
    let mut steps = Vec::new();
    let mut trace = vec![psi.clone()];
    let mut current = psi.clone();
    for (j, term) in club_sequence_iter(d, n)?.enumerate() {
        let step = single_club_householder(&term, &current, j)?;
        current = step.gate.apply(&current)?;
        trace.push(current.clone());
        circuit.push(step.gate.clone())?;
        steps.push(step);
    }
    Ok(SynthesisRun {
        circuit,
        steps,
        trace,
    })
}

/// The reduction circuit alone: `p` gates carrying at most one control each,
/// with `circuit * psi = e^{i phi} |0...0>`.
pub fn state_synthesis_to_zero(psi: &StateVector) -> Result<Circuit> {
    Ok(state_synthesis_run(psi)?.circuit)
}

/// Reduction onto an arbitrary basis state `|j>`; gates are the `|0>`-target
/// gates conjugated by cyclic shifts, absorbed into words and payloads.
pub fn club_householder_onto(psi: &StateVector, j: &DitString) -> Result<Circuit> {
    psi.check_normalized()?;
    if j.d() != psi.d() || j.n() != psi.n() {
        return Err(Error::DimensionMismatch(format!(
            "target is ({}, {}) but state is ({}, {})",
            j.d(),
            j.n(),
            psi.d(),
            psi.n()
        )));
    }
    let steps = reduce_raw_onto(psi.d(), psi.n(), psi.amplitudes(), j.digits())?;
    let mut circuit = Circuit::new(psi.d(), psi.n())?;
    for (_, word, payload, _) in steps {
        circuit.push(ControlledGate::new(word, payload)?)?;
    }
    Ok(circuit)
}

/// Preparation circuit: the adjoints of the reduction gates in reverse
/// order, so that `circuit * |0...0> = e^{i phi} psi`.
pub fn state_synthesis_from_zero(psi: &StateVector) -> Result<Circuit> {
    Ok(state_synthesis_to_zero(psi)?.adjoint())
}

/// An uncontrolled gate whose payload is the scalar `e^{i theta} I`, used to
/// cancel the global phase of a synthesized state on request.
pub fn global_phase_gate(d: usize, n: usize, theta: f64) -> Result<ControlledGate> {
    let z = Complex64::from_polar(1.0, theta);
    ControlledGate::new(
        ControlWord::uncontrolled(d, n, 0)?,
        CMatrix::identity(d).scale(z),
    )
}
