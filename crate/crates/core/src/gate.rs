//! Controlled one-qudit gates and circuits.
//!
//! A gate is a control word over `{0..d-1, *, T}` with exactly one target
//! letter, plus a `d x d` unitary payload. Applying the gate multiplies the
//! payload into every fiber of `d` basis amplitudes that differ only in the
//! target digit and whose other digits match the numeric controls.
//!
//! Circuits hold gates in time order: `gates[0]` acts first, so the dense
//! matrix of a circuit is the reversed product `G_m ... G_1`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::state::{pow, DitString, StateVector};
use crate::DEFAULT_DENSE_LIMIT;

/// One letter of a control word.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Letter {
    /// Control on a specific digit value.
    Digit(u8),
    /// No constraint on this line.
    Star,
    /// The line the payload acts on.
    Target,
}

/// A length-`n` word over `{0..d-1, *, T}` with exactly one `T`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ControlWord {
    d: usize,
    letters: Vec<Letter>,
}

impl ControlWord {
    pub fn new(d: usize, letters: Vec<Letter>) -> Result<Self> {
        if d < 2 {
            return Err(Error::InvalidArgument(format!("d must be >= 2, got {d}")));
        }
        let targets = letters.iter().filter(|l| **l == Letter::Target).count();
        if targets != 1 {
            return Err(Error::InvalidArgument(format!(
                "control word must have exactly one target, found {targets}"
            )));
        }
        if let Some(bad) = letters.iter().find_map(|l| match l {
            Letter::Digit(v) if *v as usize >= d => Some(*v),
            _ => None,
        }) {
            return Err(Error::InvalidArgument(format!(
                "control value {bad} out of range for d = {d}"
            )));
        }
        Ok(ControlWord { d, letters })
    }

    /// Word with the target at `target` and stars elsewhere.
    pub fn uncontrolled(d: usize, n: usize, target: usize) -> Result<Self> {
        if target >= n {
            return Err(Error::InvalidArgument(format!(
                "target {target} out of range for n = {n}"
            )));
        }
        let mut letters = vec![Letter::Star; n];
        letters[target] = Letter::Target;
        ControlWord::new(d, letters)
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n(&self) -> usize {
        self.letters.len()
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn target_position(&self) -> usize {
        self.letters
            .iter()
            .position(|l| *l == Letter::Target)
            .expect("validated word has a target")
    }

    /// Number of numeric control letters (the paper's `#C`).
    pub fn control_count(&self) -> usize {
        self.letters
            .iter()
            .filter(|l| matches!(l, Letter::Digit(_)))
            .count()
    }

    /// True iff every numeric letter equals the corresponding digit of `s`.
    pub fn matches(&self, s: &DitString) -> Result<bool> {
        if s.n() != self.n() || s.d() != self.d {
            return Err(Error::DimensionMismatch(format!(
                "word is ({}, {}) but dit string is ({}, {})",
                self.d,
                self.n(),
                s.d(),
                s.n()
            )));
        }
        Ok(self.matches_digits(s.digits()))
    }

    pub(crate) fn matches_digits(&self, digits: &[u8]) -> bool {
        self.letters.iter().zip(digits).all(|(l, &c)| match l {
            Letter::Digit(v) => *v == c,
            _ => true,
        })
    }
}

impl std::fmt::Display for ControlWord {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for l in &self.letters {
            match l {
                Letter::Digit(v) => write!(f, "{v}")?,
                Letter::Star => write!(f, "*")?,
                Letter::Target => write!(f, "T")?,
            }
        }
        Ok(())
    }
}

/// A controlled one-qudit operator: a control word plus a `d x d` unitary
/// payload.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlledGate {
    word: ControlWord,
    payload: CMatrix,
}

impl ControlledGate {
    pub fn new(word: ControlWord, payload: CMatrix) -> Result<Self> {
        if payload.dim() != word.d() {
            return Err(Error::DimensionMismatch(format!(
                "payload is {}x{} but word has d = {}",
                payload.dim(),
                payload.dim(),
                word.d()
            )));
        }
        let defect = payload.unitarity_defect();
        if defect > crate::tol::UNITARY_ABS {
            return Err(Error::NotUnitary {
                defect,
                tol: crate::tol::UNITARY_ABS,
            });
        }
        Ok(ControlledGate { word, payload })
    }

    pub fn word(&self) -> &ControlWord {
        &self.word
    }

    pub fn payload(&self) -> &CMatrix {
        &self.payload
    }

    pub fn d(&self) -> usize {
        self.word.d()
    }

    pub fn n(&self) -> usize {
        self.word.n()
    }

    /// Same word, conjugate-transposed payload.
    pub fn adjoint(&self) -> ControlledGate {
        ControlledGate {
            word: self.word.clone(),
            payload: self.payload.adjoint(),
        }
    }

    pub fn is_identity(&self, tol: f64) -> bool {
        self.payload.identity_defect() <= tol
    }

    /// Applies the gate to a state, fiber by fiber.
    ///
    /// Not capped by the dense limit; the work is `O(d^n * d)` regardless of
    /// the number of controls.
    pub fn apply(&self, psi: &StateVector) -> Result<StateVector> {
        if psi.d() != self.d() || psi.n() != self.n() {
            return Err(Error::DimensionMismatch(format!(
                "gate is ({}, {}) but state is ({}, {})",
                self.d(),
                self.n(),
                psi.d(),
                psi.n()
            )));
        }
        let mut out = psi.clone();
        self.apply_in_place(out.amplitudes_mut());
        Ok(out)
    }

    /// Fiber-wise application to a raw amplitude slice of length `d^n`.
    pub(crate) fn apply_in_place(&self, amps: &mut [Complex64]) {
        let d = self.d();
        let n = self.n();
        let t = self.word.target_position();
        let stride = pow(d, n - 1 - t);
        let mut digits = vec![0u8; n];
        let mut fiber = vec![Complex64::new(0.0, 0.0); d];
        // Fibers are enumerated by (high, low) around the target digit.
        for high in 0..pow(d, t) {
            for low in 0..stride {
                let base = high * stride * d + low;
                decompose(base, d, n, &mut digits);
                if !self.word.matches_digits(&digits) {
                    continue;
                }
                for k in 0..d {
                    fiber[k] = amps[base + k * stride];
                }
                for (r, slot) in fiber.iter().enumerate() {
                    let _ = slot;
                    let mut acc = Complex64::new(0.0, 0.0);
                    for (c, f) in fiber.iter().enumerate() {
                        acc += self.payload[(r, c)] * f;
                    }
                    amps[base + r * stride] = acc;
                }
            }
        }
    }

    /// Dense `d^n x d^n` realization: identity on non-matching fibers, the
    /// payload on matching ones.
    pub fn embed(&self) -> Result<CMatrix> {
        self.embed_with_limit(DEFAULT_DENSE_LIMIT)
    }

    pub fn embed_with_limit(&self, limit: usize) -> Result<CMatrix> {
        let dim = pow(self.d(), self.n());
        if dim > limit {
            return Err(Error::DenseLimitExceeded { dim, limit });
        }
        let mut m = CMatrix::identity(dim);
        apply_gate_to_matrix(self, &mut m);
        Ok(m)
    }
}

/// Writes the base-`d` digits of `index` into `digits` (position 0 most
/// significant).
pub(crate) fn decompose(mut index: usize, d: usize, n: usize, digits: &mut [u8]) {
    for pos in (0..n).rev() {
        digits[pos] = (index % d) as u8;
        index /= d;
    }
}

/// Applies `gate` to every column of `m` in place, i.e. `m <- embed(gate) * m`.
pub(crate) fn apply_gate_to_matrix(gate: &ControlledGate, m: &mut CMatrix) {
    let dim = m.dim();
    let d = gate.d();
    let n = gate.n();
    let t = gate.word().target_position();
    let stride = pow(d, n - 1 - t);
    let mut digits = vec![0u8; n];
    let mut fiber = vec![Complex64::new(0.0, 0.0); d];
    for high in 0..pow(d, t) {
        for low in 0..stride {
            let base = high * stride * d + low;
            decompose(base, d, n, &mut digits);
            if !gate.word().matches_digits(&digits) {
                continue;
            }
            for col in 0..dim {
                for k in 0..d {
                    fiber[k] = m[(base + k * stride, col)];
                }
                for r in 0..d {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for (c, f) in fiber.iter().enumerate() {
                        acc += gate.payload()[(r, c)] * f;
                    }
                    m[(base + r * stride, col)] = acc;
                }
            }
        }
    }
}

/// An ordered list of controlled one-qudit gates on a fixed `(d, n)`
/// register. `gates[0]` is applied first.
#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    d: usize,
    n: usize,
    gates: Vec<ControlledGate>,
}

impl Circuit {
    pub fn new(d: usize, n: usize) -> Result<Self> {
        if d < 2 || n == 0 {
            return Err(Error::InvalidArgument(format!(
                "invalid register shape d = {d}, n = {n}"
            )));
        }
        Ok(Circuit {
            d,
            n,
            gates: Vec::new(),
        })
    }

    pub fn from_gates(d: usize, n: usize, gates: Vec<ControlledGate>) -> Result<Self> {
        let mut c = Circuit::new(d, n)?;
        for g in gates {
            c.push(g)?;
        }
        Ok(c)
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn gates(&self) -> &[ControlledGate] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn push(&mut self, gate: ControlledGate) -> Result<()> {
        if gate.d() != self.d || gate.n() != self.n {
            return Err(Error::DimensionMismatch(format!(
                "gate is ({}, {}) but circuit is ({}, {})",
                gate.d(),
                gate.n(),
                self.d,
                self.n
            )));
        }
        self.gates.push(gate);
        Ok(())
    }

    pub fn extend(&mut self, gates: impl IntoIterator<Item = ControlledGate>) -> Result<()> {
        for g in gates {
            self.push(g)?;
        }
        Ok(())
    }

    /// Applies the gates in list order.
    pub fn apply(&self, psi: &StateVector) -> Result<StateVector> {
        let mut st = psi.clone();
        for g in &self.gates {
            st = g.apply(&st)?;
        }
        Ok(st)
    }

    /// Dense product `G_m ... G_1` of the embedded gates.
    pub fn matrix(&self) -> Result<CMatrix> {
        self.matrix_with_limit(DEFAULT_DENSE_LIMIT)
    }

    pub fn matrix_with_limit(&self, limit: usize) -> Result<CMatrix> {
        let dim = pow(self.d, self.n);
        if dim > limit {
            return Err(Error::DenseLimitExceeded { dim, limit });
        }
        let mut m = CMatrix::identity(dim);
        for g in &self.gates {
            apply_gate_to_matrix(g, &mut m);
        }
        let defect = m.unitarity_defect();
        if defect > crate::tol::UNITARY_PER_DIM * dim as f64 {
            log::warn!("circuit product drifted from unitarity: defect {defect:.3e}");
        }
        Ok(m)
    }

    /// The inverse circuit: adjoint gates in reverse order.
    pub fn adjoint(&self) -> Circuit {
        Circuit {
            d: self.d,
            n: self.n,
            gates: self.gates.iter().rev().map(|g| g.adjoint()).collect(),
        }
    }

    /// Copy with identity-payload gates removed.
    pub fn pruned(&self, tol: f64) -> Circuit {
        Circuit {
            d: self.d,
            n: self.n,
            gates: self
                .gates
                .iter()
                .filter(|g| !g.is_identity(tol))
                .cloned()
                .collect(),
        }
    }
}

/// The cyclic-shift permutation `(+c) mod d` as a one-qudit unitary.
pub fn inc_power(c: usize, d: usize) -> CMatrix {
    let mut m = CMatrix::zeros(d);
    for j in 0..d {
        m[((j + c) % d, j)] = Complex64::new(1.0, 0.0);
    }
    m
}

/// The negation permutation `k -> (d - k) mod d`.
pub fn negate_mod(d: usize) -> CMatrix {
    let mut m = CMatrix::zeros(d);
    for j in 0..d {
        m[((d - j) % d, j)] = Complex64::new(1.0, 0.0);
    }
    m
}

/// A circuit realizing the qudit swap `chi_j^k` as controlled one-qudit
/// gates: subtract line `j` into `k`, add `k` back into `j`, subtract
/// again, then negate line `k`.
pub fn swap_gate(j: usize, k: usize, d: usize, n: usize) -> Result<Circuit> {
    if j >= n || k >= n || j == k {
        return Err(Error::InvalidArgument(format!(
            "swap lines ({j}, {k}) invalid for n = {n}"
        )));
    }
    let mut c = Circuit::new(d, n)?;
    let ctrl_shift = |src: usize, dst: usize, sub: bool, c: &mut Circuit| -> Result<()> {
        for v in 1..d {
            let mut letters = vec![Letter::Star; n];
            letters[src] = Letter::Digit(v as u8);
            letters[dst] = Letter::Target;
            let shift = if sub { d - v } else { v };
            c.push(ControlledGate::new(
                ControlWord::new(d, letters)?,
                inc_power(shift, d),
            )?)?;
        }
        Ok(())
    };
    ctrl_shift(j, k, true, &mut c)?;
    ctrl_shift(k, j, false, &mut c)?;
    ctrl_shift(j, k, true, &mut c)?;
    if d > 2 {
        c.push(ControlledGate::new(
            ControlWord::uncontrolled(d, n, k)?,
            negate_mod(d),
        )?)?;
    }
    Ok(c)
}
