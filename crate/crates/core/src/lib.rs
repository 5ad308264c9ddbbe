//! Exact synthesis of `d`-level quantum logic circuits.
//!
//! This crate compiles arbitrary `n`-qudit unitaries and state vectors into
//! sequences of controlled one-qudit gates using club-scheduled complex
//! Householder reflections and a recursive QR block reduction, lowers
//! multi-controlled gates to two-qudit gates with ancillas, and carries the
//! exact big-integer gate-count analytics that make the constructions
//! auditable.
//!
//! The main entry points:
//!
//! - [`householder::state_synthesis_from_zero`] / `state_synthesis_to_zero`
//!   prepare or unprepare a state in `(d^n - 1)/(d - 1)` gates with at most
//!   one control each.
//! - [`triangle::synthesize`] compiles any unitary exactly, via
//!   [`triangle::triangle_reduce`] and the diagonal phase circuit.
//! - [`eigensynth::eigen_synthesize`] is the alternative spectral route.
//! - [`lowering::lower`] expands a `k`-controlled gate into local and
//!   two-qudit gates using `ceil((k-1)/(d-2))` ancillas.
//! - [`counting`] reproduces the control-box tables exactly in arbitrary
//!   precision; [`verify`] holds the zero-pattern oracle, Haar sampling,
//!   and dense comparison reports.

pub mod clubseq;
pub mod counting;
pub mod eigensynth;
pub mod error;
pub mod gate;
pub mod householder;
pub mod linalg;
pub mod lowering;
pub mod state;
pub mod triangle;
pub mod verify;

pub use error::{Error, Result};
pub use gate::{Circuit, ControlWord, ControlledGate, Letter};
pub use linalg::{CMatrix, UnitaryMatrix};
pub use state::{DitString, StateVector};

/// Largest `d^n` realized as a dense matrix by default; fiber-wise gate
/// application is not capped.
pub const DEFAULT_DENSE_LIMIT: usize = 4096;

/// The tolerance ladder. Internal zero tests are tightest, per-gate
/// unitarity next, end-to-end reconstruction loosest.
pub mod tol {
    /// Absolute unitarity tolerance for gate payloads.
    pub const UNITARY_ABS: f64 = 1e-10;
    /// Per-dimension unitarity tolerance for matrix ingestion
    /// (`defect <= 1e-10 * dim`).
    pub const UNITARY_PER_DIM: f64 = 1e-10;
    /// `| <psi|psi> - 1 |` bound for states flagged normalized.
    pub const STATE_NORM: f64 = 1e-12;
    /// An amplitude counts as zero for the pattern oracles below this.
    pub const ZERO_AMPLITUDE: f64 = 1e-11;
    /// End-to-end reconstruction tolerance for the QR synthesizer.
    pub const RECONSTRUCTION: f64 = 1e-9;
    /// End-to-end tolerance for the spectral synthesizer.
    pub const EIGEN_RECONSTRUCTION: f64 = 1e-8;
    /// Eigen-equation residual bound.
    pub const EIGEN_RESIDUAL: f64 = 1e-8;
    /// Eigenvalues closer than this share a cluster.
    pub const EIGEN_CLUSTER: f64 = 1e-8;
    /// Relative off-pivot mass below which a fiber counts as collapsed.
    pub const DEGENERATE_FIBER: f64 = 1e-14;
    /// Smallest amplitude magnitude for a state to count as generic.
    pub const GENERIC_MIN_AMPLITUDE: f64 = 1e-6;
}
