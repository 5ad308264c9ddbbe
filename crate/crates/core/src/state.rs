//! Basis indexing and state vectors for registers of `n` qudits with `d`
//! levels each.
//!
//! Position 0 of a dit string is the most significant dit, so the basis
//! index of `c_1 c_2 ... c_n` is `sum c_i d^(n-i)`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg;

/// A length-`n` word of base-`d` digits identifying a computational basis
/// state.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DitString {
    d: usize,
    digits: Vec<u8>,
}

impl DitString {
    pub fn new(d: usize, digits: Vec<u8>) -> Result<Self> {
        if d < 2 {
            return Err(Error::InvalidArgument(format!("d must be >= 2, got {d}")));
        }
        if digits.is_empty() {
            return Err(Error::InvalidArgument("dit string must be non-empty".into()));
        }
        if let Some(&bad) = digits.iter().find(|&&c| c as usize >= d) {
            return Err(Error::InvalidArgument(format!(
                "digit {bad} out of range for d = {d}"
            )));
        }
        Ok(DitString { d, digits })
    }

    pub fn from_index(d: usize, n: usize, mut index: usize) -> Result<Self> {
        if d < 2 || n == 0 {
            return Err(Error::InvalidArgument(format!(
                "invalid register shape d = {d}, n = {n}"
            )));
        }
        if index >= pow(d, n) {
            return Err(Error::InvalidArgument(format!(
                "index {index} out of range for d^n = {}",
                pow(d, n)
            )));
        }
        let mut digits = vec![0u8; n];
        for pos in (0..n).rev() {
            digits[pos] = (index % d) as u8;
            index /= d;
        }
        Ok(DitString { d, digits })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n(&self) -> usize {
        self.digits.len()
    }

    pub fn digits(&self) -> &[u8] {
        &self.digits
    }

    pub fn digit(&self, pos: usize) -> u8 {
        self.digits[pos]
    }

    /// The basis index, with position 0 most significant.
    pub fn index(&self) -> usize {
        self.digits
            .iter()
            .fold(0usize, |acc, &c| acc * self.d + c as usize)
    }
}

impl std::fmt::Display for DitString {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for &c in &self.digits {
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

/// `d^n` as a register dimension; panics on usize overflow.
pub fn pow(d: usize, n: usize) -> usize {
    d.checked_pow(n as u32).expect("d^n overflows usize")
}

/// An `n`-qudit state vector of `d^n` complex amplitudes in dit-string
/// index order.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    d: usize,
    n: usize,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    pub fn new(d: usize, n: usize, amplitudes: Vec<Complex64>) -> Result<Self> {
        if d < 2 || n == 0 {
            return Err(Error::InvalidArgument(format!(
                "invalid register shape d = {d}, n = {n}"
            )));
        }
        if amplitudes.len() != pow(d, n) {
            return Err(Error::DimensionMismatch(format!(
                "state has {} amplitudes, expected d^n = {}",
                amplitudes.len(),
                pow(d, n)
            )));
        }
        if amplitudes
            .iter()
            .any(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(Error::InvalidArgument(
                "state has non-finite amplitudes".into(),
            ));
        }
        Ok(StateVector { d, n, amplitudes })
    }

    /// The all-zeros basis state `|0...0>`.
    pub fn zero_state(d: usize, n: usize) -> Result<Self> {
        let mut amps = vec![Complex64::new(0.0, 0.0); pow(d, n)];
        amps[0] = Complex64::new(1.0, 0.0);
        StateVector::new(d, n, amps)
    }

    pub fn basis_state(s: &DitString) -> Self {
        let mut amps = vec![Complex64::new(0.0, 0.0); pow(s.d(), s.n())];
        amps[s.index()] = Complex64::new(1.0, 0.0);
        StateVector {
            d: s.d(),
            n: s.n(),
            amplitudes: amps,
        }
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub(crate) fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amplitudes
    }

    pub fn amplitude(&self, index: usize) -> Complex64 {
        self.amplitudes[index]
    }

    pub fn norm(&self) -> f64 {
        linalg::norm(&self.amplitudes)
    }

    pub fn inner(&self, other: &StateVector) -> Complex64 {
        linalg::inner(&self.amplitudes, &other.amplitudes)
    }

    /// Fails unless `|<psi|psi> - 1|` is within the normalization tolerance.
    pub fn check_normalized(&self) -> Result<()> {
        let defect = (self.norm().powi(2) - 1.0).abs();
        if defect > crate::tol::STATE_NORM {
            return Err(Error::NotNormalized { defect });
        }
        Ok(())
    }

    pub fn normalized(&self) -> Result<StateVector> {
        let nrm = self.norm();
        if nrm == 0.0 {
            return Err(Error::InvalidArgument("cannot normalize zero state".into()));
        }
        let amps = self.amplitudes.iter().map(|z| z / nrm).collect();
        StateVector::new(self.d, self.n, amps)
    }

    /// Indices whose amplitude magnitude exceeds the oracle zero threshold.
    pub fn support(&self, zero_tol: f64) -> Vec<usize> {
        self.amplitudes
            .iter()
            .enumerate()
            .filter(|(_, z)| z.norm() > zero_tol)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn zero_count(&self, zero_tol: f64) -> usize {
        self.dim() - self.support(zero_tol).len()
    }
}
