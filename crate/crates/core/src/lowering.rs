//! Expansion of multi-controlled one-qudit gates into local and two-qudit
//! gates on a register extended by ancilla qudits.
//!
//! For `d >= 3`, each control line is shift-conjugated so it triggers on
//! `|d-1>`, a cascade of controlled increments counts matches into
//! `r = ceil((k-1)/(d-2))` ancillas (padded with unconditional increments so
//! a fully matched ancilla reads exactly `d-1`), the payload fires from the
//! last ancilla, and the cascade is mirrored with controlled decrements to
//! restore every ancilla to `|0>`. All bookkeeping gates are permutations,
//! so restoration is exact, not just within tolerance.
//!
//! For `d = 2` the counting construction degenerates (it divides by
//! `d - 2`); the standard qubit ladder with `r = k - 1` ancillas is used
//! instead, with each ladder step expanded into five two-qubit gates via
//! the square-root-of-X decomposition.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::gate::{inc_power, Circuit, ControlWord, ControlledGate, Letter};
use crate::linalg::CMatrix;
use crate::state::pow;

/// A gate coupling two lines of the extended register, stored as a dense
/// `d^2 x d^2` operator. The first line is the more significant index.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoQuditGate {
    pub lines: (usize, usize),
    pub op: CMatrix,
}

impl TwoQuditGate {
    pub fn new(lines: (usize, usize), op: CMatrix) -> Result<Self> {
        if lines.0 == lines.1 {
            return Err(Error::InvalidArgument(
                "two-qudit gate lines must be distinct".into(),
            ));
        }
        let defect = op.unitarity_defect();
        if defect > crate::tol::UNITARY_ABS {
            return Err(Error::NotUnitary {
                defect,
                tol: crate::tol::UNITARY_ABS,
            });
        }
        Ok(TwoQuditGate { lines, op })
    }
}

/// One element of a lowered circuit. Every gate the construction emits is
/// either local or a value-controlled one-qudit gate between two lines, so
/// the structured form is kept; [`LoweredGate::dense_pair`] produces the
/// `d^2 x d^2` realization of the coupled case.
#[derive(Debug, Clone, PartialEq)]
pub enum LoweredGate {
    Local {
        line: usize,
        op: CMatrix,
    },
    Controlled {
        control: usize,
        trigger: u8,
        target: usize,
        op: CMatrix,
    },
}

impl LoweredGate {
    pub fn lines(&self) -> Vec<usize> {
        match self {
            LoweredGate::Local { line, .. } => vec![*line],
            LoweredGate::Controlled {
                control, target, ..
            } => vec![*control, *target],
        }
    }

    /// The dense two-qudit operator on `(control, target)`, when coupled.
    pub fn dense_pair(&self, d: usize) -> Option<TwoQuditGate> {
        match self {
            LoweredGate::Local { .. } => None,
            LoweredGate::Controlled {
                control,
                trigger,
                target,
                op,
            } => {
                let mut m = CMatrix::identity(d * d);
                let t = *trigger as usize;
                for r in 0..d {
                    for c in 0..d {
                        m[(t * d + r, t * d + c)] = op[(r, c)];
                    }
                }
                Some(TwoQuditGate::new((*control, *target), m).expect("controlled op is unitary"))
            }
        }
    }

    fn inverse(&self) -> LoweredGate {
        match self {
            LoweredGate::Local { line, op } => LoweredGate::Local {
                line: *line,
                op: op.adjoint(),
            },
            LoweredGate::Controlled {
                control,
                trigger,
                target,
                op,
            } => LoweredGate::Controlled {
                control: *control,
                trigger: *trigger,
                target: *target,
                op: op.adjoint(),
            },
        }
    }

    /// The gate as a controlled one-qudit gate on an `lines`-wide register.
    pub fn as_controlled(&self, d: usize, lines: usize) -> Result<ControlledGate> {
        let mut letters = vec![Letter::Star; lines];
        match self {
            LoweredGate::Local { line, op } => {
                letters[*line] = Letter::Target;
                ControlledGate::new(ControlWord::new(d, letters)?, op.clone())
            }
            LoweredGate::Controlled {
                control,
                trigger,
                target,
                op,
            } => {
                letters[*control] = Letter::Digit(*trigger);
                letters[*target] = Letter::Target;
                ControlledGate::new(ControlWord::new(d, letters)?, op.clone())
            }
        }
    }
}

/// A circuit of local and two-qudit gates on `n` data lines plus `r`
/// ancilla lines (indices `n..n+r`), which begin and end in `|0>` on the
/// data tensor `|0...0>` subspace.
#[derive(Debug, Clone, PartialEq)]
pub struct LoweredCircuit {
    pub d: usize,
    pub n: usize,
    pub ancillas: usize,
    pub gates: Vec<LoweredGate>,
}

impl LoweredCircuit {
    pub fn total_lines(&self) -> usize {
        self.n + self.ancillas
    }

    /// The same gates as a plain circuit on the extended register; every
    /// word carries at most one control.
    pub fn as_circuit(&self) -> Result<Circuit> {
        let lines = self.total_lines();
        let mut c = Circuit::new(self.d, lines)?;
        for g in &self.gates {
            c.push(g.as_controlled(self.d, lines)?)?;
        }
        Ok(c)
    }

    /// Applies the gate list to a raw amplitude vector on the extended
    /// register of `d^(n + r)` amplitudes.
    pub fn apply_in_place(&self, amps: &mut [Complex64]) -> Result<()> {
        let lines = self.total_lines();
        let dim = pow(self.d, lines);
        if amps.len() != dim {
            return Err(Error::DimensionMismatch(format!(
                "state has {} amplitudes, extended register needs {dim}",
                amps.len()
            )));
        }
        for g in &self.gates {
            g.as_controlled(self.d, lines)?.apply_in_place(amps);
        }
        Ok(())
    }
}

/// Two-qudit operator applying `op` to the second line iff the first reads
/// `trigger`.
pub fn controlled_op(
    d: usize,
    lines: (usize, usize),
    trigger: usize,
    op: &CMatrix,
) -> Result<TwoQuditGate> {
    LoweredGate::Controlled {
        control: lines.0,
        trigger: trigger as u8,
        target: lines.1,
        op: op.clone(),
    }
    .dense_pair(d)
    .ok_or_else(|| Error::InvalidArgument("not a coupled gate".into()))
}

/// The controlled increment: applies the cyclic shift iff the control
/// (first line) reads `d - 1`.
pub fn cinc(d: usize) -> TwoQuditGate {
    controlled_op(d, (0, 1), d - 1, &inc_power(1, d)).expect("cinc is unitary")
}

fn ctrl(control: usize, trigger: usize, target: usize, op: CMatrix) -> LoweredGate {
    LoweredGate::Controlled {
        control,
        trigger: trigger as u8,
        target,
        op,
    }
}

/// Lowers a controlled one-qudit gate to local and two-qudit gates.
pub fn lower(gate: &ControlledGate) -> Result<LoweredCircuit> {
    lower_with_budget(gate, None)
}

/// Like [`lower`], failing if the required ancilla count exceeds `budget`.
pub fn lower_with_budget(gate: &ControlledGate, budget: Option<usize>) -> Result<LoweredCircuit> {
    let d = gate.d();
    let n = gate.n();
    let target = gate.word().target_position();
    let controls: Vec<(usize, usize)> = gate
        .word()
        .letters()
        .iter()
        .enumerate()
        .filter_map(|(line, l)| match l {
            Letter::Digit(v) => Some((line, *v as usize)),
            _ => None,
        })
        .collect();
    let k = controls.len();

    let required = required_ancillas(d, k);
    if let Some(cap) = budget {
        if required > cap {
            return Err(Error::AncillaBudget { required, cap });
        }
    }

    if k == 0 {
        return Ok(LoweredCircuit {
            d,
            n,
            ancillas: 0,
            gates: vec![LoweredGate::Local {
                line: target,
                op: gate.payload().clone(),
            }],
        });
    }
    if k == 1 {
        let (line, value) = controls[0];
        return Ok(LoweredCircuit {
            d,
            n,
            ancillas: 0,
            gates: vec![ctrl(line, value, target, gate.payload().clone())],
        });
    }
    if d == 2 {
        lower_qubit_ladder(gate, &controls, target)
    } else {
        lower_cascade(gate, &controls, target, required)
    }
}

/// Ancillas needed to lower a `k`-controlled gate.
pub fn required_ancillas(d: usize, k: usize) -> usize {
    if k <= 1 {
        0
    } else if d == 2 {
        k - 1
    } else {
        (k - 1).div_ceil(d - 2)
    }
}

fn lower_cascade(
    gate: &ControlledGate,
    controls: &[(usize, usize)],
    target: usize,
    r: usize,
) -> Result<LoweredCircuit> {
    let d = gate.d();
    let n = gate.n();
    let k = controls.len();
    let anc = |i: usize| n + i;
    let inc = inc_power(1, d);

    let mut shifts = Vec::new();
    for &(line, value) in controls {
        if value != d - 1 {
            shifts.push(LoweredGate::Local {
                line,
                op: inc_power(d - 1 - value, d),
            });
        }
    }

    // Feed min(k, d-1) controls into the first ancilla, then one carry plus
    // up to d-2 controls into each subsequent one; pad short ancillas with
    // unconditional increments so a full match always reads d-1.
    let mut cascade = Vec::new();
    let mut next_control = 0usize;
    for i in 0..r {
        let mut increments = 0usize;
        if i > 0 {
            cascade.push(ctrl(anc(i - 1), d - 1, anc(i), inc.clone()));
            increments += 1;
        }
        let capacity = if i == 0 { d - 1 } else { d - 2 };
        let take = capacity.min(k - next_control);
        for &(line, _) in &controls[next_control..next_control + take] {
            cascade.push(ctrl(line, d - 1, anc(i), inc.clone()));
            increments += 1;
        }
        next_control += take;
        if increments < d - 1 {
            cascade.push(LoweredGate::Local {
                line: anc(i),
                op: inc_power(d - 1 - increments, d),
            });
        }
    }
    debug_assert_eq!(next_control, k);

    let mut gates = Vec::new();
    gates.extend(shifts.iter().cloned());
    gates.extend(cascade.iter().cloned());
    gates.push(ctrl(anc(r - 1), d - 1, target, gate.payload().clone()));
    gates.extend(cascade.iter().rev().map(|g| g.inverse()));
    gates.extend(shifts.iter().rev().map(|g| g.inverse()));

    Ok(LoweredCircuit {
        d,
        n,
        ancillas: r,
        gates,
    })
}

fn sqrt_x() -> CMatrix {
    let mut m = CMatrix::zeros(2);
    let p = Complex64::new(0.5, 0.5);
    let q = Complex64::new(0.5, -0.5);
    m[(0, 0)] = p;
    m[(0, 1)] = q;
    m[(1, 0)] = q;
    m[(1, 1)] = p;
    m
}

/// Toffoli on `(x, y) -> z` as five two-qubit gates.
fn toffoli_5(x: usize, y: usize, z: usize) -> Vec<LoweredGate> {
    let v = sqrt_x();
    let vd = v.adjoint();
    let not = inc_power(1, 2);
    vec![
        ctrl(y, 1, z, v.clone()),
        ctrl(x, 1, y, not.clone()),
        ctrl(y, 1, z, vd),
        ctrl(x, 1, y, not),
        ctrl(x, 1, z, v),
    ]
}

fn lower_qubit_ladder(
    gate: &ControlledGate,
    controls: &[(usize, usize)],
    target: usize,
) -> Result<LoweredCircuit> {
    let n = gate.n();
    let k = controls.len();
    let r = k - 1;
    let anc = |i: usize| n + i;

    let mut shifts = Vec::new();
    for &(line, value) in controls {
        if value == 0 {
            shifts.push(LoweredGate::Local {
                line,
                op: inc_power(1, 2),
            });
        }
    }

    let mut ladder = Vec::new();
    ladder.extend(toffoli_5(controls[0].0, controls[1].0, anc(0)));
    for i in 1..r {
        ladder.extend(toffoli_5(anc(i - 1), controls[i + 1].0, anc(i)));
    }

    let mut gates = Vec::new();
    gates.extend(shifts.iter().cloned());
    gates.extend(ladder.iter().cloned());
    gates.push(ctrl(anc(r - 1), 1, target, gate.payload().clone()));
    gates.extend(ladder.iter().rev().map(|g| g.inverse()));
    gates.extend(shifts.iter().rev().map(|g| g.inverse()));

    Ok(LoweredCircuit {
        d: 2,
        n,
        ancillas: r,
        gates,
    })
}

/// Measures how far a lowered circuit strays from the lifted gate on the
/// `data (x) |0...0>` subspace: returns the worst deviation from
/// `embed(gate) (x) I` over the supplied probe states, and the worst leaked
/// amplitude magnitude left outside the ancilla-zero sector.
pub fn subspace_deviation(
    gate: &ControlledGate,
    lowered: &LoweredCircuit,
    probes: &[Vec<Complex64>],
) -> Result<(f64, f64)> {
    let d = gate.d();
    let n = gate.n();
    let data_dim = pow(d, n);
    let anc_dim = pow(d, lowered.ancillas);
    let mut worst_dev = 0.0f64;
    let mut worst_leak = 0.0f64;
    for probe in probes {
        if probe.len() != data_dim {
            return Err(Error::DimensionMismatch(format!(
                "probe has {} amplitudes, expected {data_dim}",
                probe.len()
            )));
        }
        let mut extended = vec![Complex64::new(0.0, 0.0); data_dim * anc_dim];
        for (i, &z) in probe.iter().enumerate() {
            extended[i * anc_dim] = z;
        }
        lowered.apply_in_place(&mut extended)?;
        let mut expected = probe.clone();
        gate.apply_in_place(&mut expected);
        for i in 0..data_dim {
            worst_dev = worst_dev.max((extended[i * anc_dim] - expected[i]).norm());
            for a in 1..anc_dim {
                worst_leak = worst_leak.max(extended[i * anc_dim + a].norm());
            }
        }
    }
    Ok((worst_dev, worst_leak))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gate::{ControlWord, Letter};
    use crate::verify;

    fn c64(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn multi_controlled(d: usize, values: &[usize], seed: u64) -> ControlledGate {
        let k = values.len();
        let n = k + 1;
        let mut letters: Vec<Letter> =
            values.iter().map(|&v| Letter::Digit(v as u8)).collect();
        letters.push(Letter::Target);
        let payload = verify::haar_random_unitary(d, seed).unwrap().into_matrix();
        ControlledGate::new(ControlWord::new(d, letters).unwrap(), payload).unwrap()
    }

    #[test]
    fn inc_power_displayed_matrix() {
        let m = inc_power(1, 3);
        let want = [[0., 0., 1.], [1., 0., 0.], [0., 1., 0.]];
        for r in 0..3 {
            for c in 0..3 {
                assert_eq!(m[(r, c)], c64(want[r][c], 0.0));
            }
        }
        for d in 2..=5 {
            assert_eq!(inc_power(0, d), CMatrix::identity(d));
        }
    }

    #[test]
    fn cinc_action() {
        let g = cinc(3);
        assert_eq!(g.lines, (0, 1));
        assert!(g.op.unitarity_defect() < 1e-15);
        // |2,1> -> |2,2>, |1,1> fixed
        let col = g.op.column(2 * 3 + 1);
        assert_eq!(col[2 * 3 + 2], c64(1.0, 0.0));
        let col = g.op.column(1 * 3 + 1);
        assert_eq!(col[1 * 3 + 1], c64(1.0, 0.0));
    }

    #[test]
    fn uncontrolled_gate_passes_through() {
        let g = multi_controlled(3, &[], 1);
        let low = lower(&g).unwrap();
        assert_eq!(low.ancillas, 0);
        assert_eq!(low.gates.len(), 1);
        assert!(matches!(low.gates[0], LoweredGate::Local { line: 0, .. }));
    }

    #[test]
    fn single_control_is_one_pair() {
        let g = multi_controlled(3, &[1], 2);
        let low = lower(&g).unwrap();
        assert_eq!(low.ancillas, 0);
        assert_eq!(low.gates.len(), 1);
        assert!(low.gates[0].dense_pair(3).is_some());
        let probes = vec![verify::random_state(3, 2, 5).unwrap().amplitudes().to_vec()];
        let (dev, leak) = subspace_deviation(&g, &low, &probes).unwrap();
        assert!(dev < 1e-12);
        assert_eq!(leak, 0.0);
    }

    #[test]
    fn three_controls_need_two_ancillas_for_qutrits() {
        let g = multi_controlled(3, &[2, 0, 1], 3);
        let low = lower(&g).unwrap();
        assert_eq!(low.ancillas, 2);
    }

    #[test]
    fn ancilla_formula() {
        assert_eq!(required_ancillas(3, 2), 1);
        assert_eq!(required_ancillas(3, 5), 4);
        assert_eq!(required_ancillas(4, 4), 2);
        assert_eq!(required_ancillas(5, 6), 2);
        assert_eq!(required_ancillas(2, 4), 3);
        assert_eq!(required_ancillas(7, 1), 0);
    }

    #[test]
    fn budget_cap_rejected() {
        let g = multi_controlled(3, &[2, 0, 1], 4);
        assert!(matches!(
            lower_with_budget(&g, Some(1)),
            Err(Error::AncillaBudget {
                required: 2,
                cap: 1
            })
        ));
        assert!(lower_with_budget(&g, Some(2)).is_ok());
    }

    #[test]
    fn cascade_matches_gate_on_subspace_d3() {
        for (k, seed) in [(2usize, 10u64), (3, 11), (4, 12)] {
            let values: Vec<usize> = (0..k).map(|i| i % 3).collect();
            let g = multi_controlled(3, &values, seed);
            let low = lower(&g).unwrap();
            let probes: Vec<Vec<Complex64>> = (0..3)
                .map(|s| {
                    verify::random_state(3, k + 1, seed + s)
                        .unwrap()
                        .amplitudes()
                        .to_vec()
                })
                .collect();
            let (dev, leak) = subspace_deviation(&g, &low, &probes).unwrap();
            assert!(dev < 1e-10, "k = {k}: deviation {dev:.2e}");
            assert_eq!(leak, 0.0, "k = {k}: ancillas leaked");
        }
    }

    #[test]
    fn cascade_restores_ancillas_exactly_on_basis_states() {
        let g = multi_controlled(4, &[3, 1, 2, 0], 13);
        let low = lower(&g).unwrap();
        let data_dim = pow(4, 5);
        let anc_dim = pow(4, low.ancillas);
        for idx in (0..data_dim).step_by(37) {
            let mut amps = vec![c64(0.0, 0.0); data_dim * anc_dim];
            amps[idx * anc_dim] = c64(1.0, 0.0);
            low.apply_in_place(&mut amps).unwrap();
            for i in 0..data_dim {
                for a in 1..anc_dim {
                    assert_eq!(amps[i * anc_dim + a], c64(0.0, 0.0), "leak at {i},{a}");
                }
            }
        }
    }

    #[test]
    fn qubit_ladder_matches_gate_on_subspace() {
        for (k, seed) in [(2usize, 20u64), (3, 21), (4, 22)] {
            let values: Vec<usize> = (0..k).map(|i| i % 2).collect();
            let g = multi_controlled(2, &values, seed);
            let low = lower(&g).unwrap();
            assert_eq!(low.ancillas, k - 1);
            let probes: Vec<Vec<Complex64>> = (0..3)
                .map(|s| {
                    verify::random_state(2, k + 1, seed + s)
                        .unwrap()
                        .amplitudes()
                        .to_vec()
                })
                .collect();
            let (dev, leak) = subspace_deviation(&g, &low, &probes).unwrap();
            assert!(dev < 1e-10, "k = {k}: deviation {dev:.2e}");
            assert!(leak < 1e-13, "k = {k}: leak {leak:.2e}");
        }
    }

    #[test]
    fn toffoli_decomposition_is_exact() {
        let lc = LoweredCircuit {
            d: 2,
            n: 3,
            ancillas: 0,
            gates: toffoli_5(0, 1, 2),
        };
        for idx in 0..8usize {
            let mut amps = vec![c64(0.0, 0.0); 8];
            amps[idx] = c64(1.0, 0.0);
            lc.apply_in_place(&mut amps).unwrap();
            let want = if idx >> 1 == 0b11 { idx ^ 1 } else { idx };
            for (i, z) in amps.iter().enumerate() {
                let expect = if i == want { 1.0 } else { 0.0 };
                assert!(
                    (z - c64(expect, 0.0)).norm() < 1e-15,
                    "idx {idx}: amp[{i}] = {z}"
                );
            }
        }
    }

    #[test]
    fn as_circuit_matches_direct_application() {
        let g = multi_controlled(3, &[2, 1], 31);
        let low = lower(&g).unwrap();
        let circuit = low.as_circuit().unwrap();
        assert_eq!(circuit.n(), low.total_lines());
        assert!(circuit.gates().iter().all(|g| g.word().control_count() <= 1));
        let psi = verify::random_state(3, low.total_lines(), 8).unwrap();
        let via_circuit = circuit.apply(&psi).unwrap();
        let mut raw = psi.amplitudes().to_vec();
        low.apply_in_place(&mut raw).unwrap();
        for (a, b) in via_circuit.amplitudes().iter().zip(&raw) {
            assert_eq!(a, b);
        }
    }

    #[test]
    fn gate_counts_affine_for_d2_and_d3() {
        for d in [2usize, 3] {
            let counts: Vec<usize> = (2..=6)
                .map(|k| {
                    let values = vec![0usize; k];
                    let g = multi_controlled(d, &values, 30 + k as u64);
                    lower(&g).unwrap().gates.len()
                })
                .collect();
            let diffs: Vec<isize> = counts
                .windows(2)
                .map(|w| w[1] as isize - w[0] as isize)
                .collect();
            assert!(
                diffs.windows(2).all(|w| w[0] == w[1]),
                "d = {d}: counts {counts:?}"
            );
        }
    }
}
