//! JSON file formats for matrices, states, and circuits.
//!
//! Complex entries are `[re, im]` pairs; matrix entries are row-major and
//! state amplitudes follow the dit-string index order. Words mix integers
//! with the strings `"*"` and `"T"`. Floating-point values round-trip
//! exactly (the writer emits the shortest decimal that reads back to the
//! same double).

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use quditsynth::gate::{Circuit, ControlWord, ControlledGate, Letter};
use quditsynth::lowering::LoweredCircuit;
use quditsynth::state::pow;
use quditsynth::{CMatrix, Error, Result, StateVector, UnitaryMatrix};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatrixFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    pub entries: Vec<Vec<[f64; 2]>>,
}

impl MatrixFile {
    pub fn from_matrix(d: Option<usize>, n: Option<usize>, m: &CMatrix) -> Self {
        let entries = (0..m.dim())
            .map(|r| (0..m.dim()).map(|c| [m[(r, c)].re, m[(r, c)].im]).collect())
            .collect();
        MatrixFile { d, n, entries }
    }

    pub fn to_cmatrix(&self) -> Result<CMatrix> {
        let rows: Vec<Vec<Complex64>> = self
            .entries
            .iter()
            .map(|row| row.iter().map(|&[re, im]| Complex64::new(re, im)).collect())
            .collect();
        CMatrix::from_rows(&rows)
    }

    /// Interprets the file as a `(d, n)` unitary; the flags win over the
    /// stamped shape as long as the total dimension agrees.
    pub fn to_unitary(&self, d: usize, n: usize) -> Result<UnitaryMatrix> {
        let m = self.to_cmatrix()?;
        if m.dim() != pow(d, n) {
            return Err(Error::DimensionMismatch(format!(
                "matrix is {}x{} but d^n = {}",
                m.dim(),
                m.dim(),
                pow(d, n)
            )));
        }
        UnitaryMatrix::new(m)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StateFile {
    pub d: usize,
    pub n: usize,
    pub entries: Vec<[f64; 2]>,
    /// Intermediate states after each gate, present when a simulation is
    /// run with tracing.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace: Option<Vec<Vec<[f64; 2]>>>,
}

impl StateFile {
    pub fn from_state(psi: &StateVector) -> Self {
        StateFile {
            d: psi.d(),
            n: psi.n(),
            entries: amps_to_pairs(psi.amplitudes()),
            trace: None,
        }
    }

    pub fn to_state(&self) -> Result<StateVector> {
        let amps = self
            .entries
            .iter()
            .map(|&[re, im]| Complex64::new(re, im))
            .collect();
        StateVector::new(self.d, self.n, amps)
    }
}

pub fn amps_to_pairs(amps: &[Complex64]) -> Vec<[f64; 2]> {
    amps.iter().map(|z| [z.re, z.im]).collect()
}

/// One word letter: a numeric control value, `"*"`, or `"T"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum WordLetter {
    Value(u8),
    Symbol(String),
}

impl WordLetter {
    fn to_letter(&self) -> Result<Letter> {
        match self {
            WordLetter::Value(v) => Ok(Letter::Digit(*v)),
            WordLetter::Symbol(s) => match s.as_str() {
                "*" => Ok(Letter::Star),
                "T" => Ok(Letter::Target),
                other => Err(Error::InvalidArgument(format!(
                    "invalid word letter {other:?} (expected digit, \"*\", or \"T\")"
                ))),
            },
        }
    }

    fn from_letter(l: &Letter) -> Self {
        match l {
            Letter::Digit(v) => WordLetter::Value(*v),
            Letter::Star => WordLetter::Symbol("*".into()),
            Letter::Target => WordLetter::Symbol("T".into()),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GateEntry {
    pub word: Vec<WordLetter>,
    /// The d x d payload, row-major.
    pub matrix: Vec<Vec<[f64; 2]>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CircuitFile {
    pub d: usize,
    pub n: usize,
    #[serde(default, skip_serializing_if = "is_zero")]
    pub ancillas: usize,
    pub gates: Vec<GateEntry>,
}

fn is_zero(v: &usize) -> bool {
    *v == 0
}

impl CircuitFile {
    pub fn from_circuit(c: &Circuit) -> Self {
        CircuitFile {
            d: c.d(),
            n: c.n(),
            ancillas: 0,
            gates: c.gates().iter().map(gate_entry).collect(),
        }
    }

    pub fn from_lowered(lc: &LoweredCircuit) -> Result<Self> {
        let circuit = lc.as_circuit()?;
        Ok(CircuitFile {
            d: lc.d,
            n: lc.n,
            ancillas: lc.ancillas,
            gates: circuit.gates().iter().map(gate_entry).collect(),
        })
    }

    /// Validates and rebuilds the circuit on `n + ancillas` lines; payload
    /// unitarity and the one-target word shape are checked on load.
    pub fn to_circuit(&self) -> Result<Circuit> {
        let lines = self.n + self.ancillas;
        let mut circuit = Circuit::new(self.d, lines)?;
        for (i, entry) in self.gates.iter().enumerate() {
            let letters: Vec<Letter> = entry
                .word
                .iter()
                .map(|w| w.to_letter())
                .collect::<Result<_>>()?;
            if letters.len() != lines {
                return Err(Error::DimensionMismatch(format!(
                    "gate {i}: word has {} letters, register has {lines} lines",
                    letters.len()
                )));
            }
            let word = ControlWord::new(self.d, letters)?;
            let rows: Vec<Vec<Complex64>> = entry
                .matrix
                .iter()
                .map(|row| row.iter().map(|&[re, im]| Complex64::new(re, im)).collect())
                .collect();
            let payload = CMatrix::from_rows(&rows)?;
            circuit.push(ControlledGate::new(word, payload)?)?;
        }
        Ok(circuit)
    }
}

fn gate_entry(g: &ControlledGate) -> GateEntry {
    GateEntry {
        word: g.word().letters().iter().map(WordLetter::from_letter).collect(),
        matrix: (0..g.d())
            .map(|r| {
                (0..g.d())
                    .map(|c| [g.payload()[(r, c)].re, g.payload()[(r, c)].im])
                    .collect()
            })
            .collect(),
    }
}
