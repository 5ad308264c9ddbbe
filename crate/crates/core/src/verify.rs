//! Verification oracles: zero-pattern sets for the state reduction, dense
//! comparison of circuits against target unitaries, and seeded random
//! inputs for tests.

use std::collections::BTreeSet;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::clubseq::{club_sequence_iter, sequence_len, ClubTerm};
use crate::error::{Error, Result};
use crate::gate::Circuit;
use crate::householder::word_for_term;
use crate::linalg::{CMatrix, UnitaryMatrix};
use crate::state::{pow, StateVector};

/// The index sets tracking which amplitudes may still be nonzero at step
/// `j` of the state reduction, and the set the step zeroes.
///
/// `r1` holds prefix-truncations with a smaller branch digit and zero tail
/// (group leaders already used and still nonzero), `r2` the current fiber,
/// and `r3` everything with a lexicographically greater prefix (not yet
/// touched). Their disjoint union shrinks by exactly `zeroed` from one step
/// to the next.
#[derive(Debug, Clone, Serialize)]
pub struct ZeroPatternOracle {
    pub step: usize,
    pub r1: BTreeSet<usize>,
    pub r2: BTreeSet<usize>,
    pub r3: BTreeSet<usize>,
    pub zeroed: BTreeSet<usize>,
}

impl ZeroPatternOracle {
    pub fn union(&self) -> BTreeSet<usize> {
        let mut u = self.r1.clone();
        u.extend(&self.r2);
        u.extend(&self.r3);
        u
    }

    pub fn pairwise_disjoint(&self) -> bool {
        self.r1.is_disjoint(&self.r2)
            && self.r1.is_disjoint(&self.r3)
            && self.r2.is_disjoint(&self.r3)
    }
}

fn nth_term(d: usize, n: usize, j: usize) -> Result<ClubTerm> {
    let p = sequence_len(d, n)?;
    if j == 0 || j > p {
        return Err(Error::InvalidArgument(format!(
            "step {j} out of range 1..={p}"
        )));
    }
    club_sequence_iter(d, n)?
        .nth(j - 1)
        .ok_or_else(|| Error::InvalidArgument(format!("no club term at step {j}")))
}

/// Builds the zero-pattern sets for the `j`-th step (1-based) by direct
/// enumeration.
pub fn rsets(d: usize, n: usize, j: usize) -> Result<ZeroPatternOracle> {
    let term = nth_term(d, n, j)?;
    let prefix = term.prefix();
    let ell = prefix.len();
    let tail = pow(d, n - ell); // weight of positions ell..n

    let index_of = |digits: &[u8]| -> usize {
        digits.iter().fold(0usize, |acc, &c| acc * d + c as usize)
    };

    let mut r1 = BTreeSet::new();
    for q in 0..ell {
        // kept prefix c_0..c_{q-1}, branch digit k < c_q, zero tail
        let weight = pow(d, n - q - 1);
        let base = index_of(&prefix[..q]) * pow(d, n - q);
        for k in 0..prefix[q] as usize {
            r1.insert(base + k * weight);
        }
    }

    let mut r2 = BTreeSet::new();
    let fiber_weight = pow(d, n - ell - 1);
    let base = index_of(&prefix) * tail;
    for k in 0..d {
        r2.insert(base + k * fiber_weight);
    }

    let mut r3 = BTreeSet::new();
    let prefix_value = index_of(&prefix);
    for p in (prefix_value + 1)..pow(d, ell) {
        for t in 0..tail {
            r3.insert(p * tail + t);
        }
    }

    let mut zeroed = BTreeSet::new();
    for k in 1..d {
        zeroed.insert(base + k * fiber_weight);
    }

    Ok(ZeroPatternOracle {
        step: j,
        r1,
        r2,
        r3,
        zeroed,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ZeroPatternStep {
    pub step: usize,
    pub containment_ok: bool,
    pub zero_count: usize,
    /// None when the growth check is skipped on non-generic input.
    pub growth_ok: Option<bool>,
    pub escaped_indices: Vec<usize>,
}

/// Step-by-step report of a reduction trace against the zero-pattern
/// oracle. This is the primary correctness tripwire for state synthesis.
#[derive(Debug, Clone, Serialize)]
pub struct ZeroPatternReport {
    pub d: usize,
    pub n: usize,
    pub generic: bool,
    pub steps: Vec<ZeroPatternStep>,
    pub final_ok: bool,
}

impl ZeroPatternReport {
    pub fn pass(&self) -> bool {
        self.final_ok
            && self.steps.iter().all(|s| {
                s.containment_ok && (!self.generic || s.growth_ok.unwrap_or(false))
            })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

impl std::fmt::Display for ZeroPatternReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(
            f,
            "zero-pattern check d = {}, n = {} ({}): {}",
            self.d,
            self.n,
            if self.generic { "generic" } else { "non-generic" },
            if self.pass() { "pass" } else { "FAIL" }
        )?;
        for s in &self.steps {
            writeln!(
                f,
                "  step {:>3}: containment {} zeros {:>4} growth {}",
                s.step,
                if s.containment_ok { "ok " } else { "BAD" },
                s.zero_count,
                match s.growth_ok {
                    Some(true) => "ok",
                    Some(false) => "BAD",
                    None => "skipped",
                }
            )?;
            if !s.escaped_indices.is_empty() {
                writeln!(f, "    support escaped at indices {:?}", s.escaped_indices)?;
            }
        }
        Ok(())
    }
}

/// Checks a state-synthesis trace (`trace[j]` = state after `j` gates)
/// against the oracle: support containment at every step, zero growth of
/// exactly `d - 1` per step on generic input, and final support `{0}`.
pub fn check_zero_pattern(d: usize, n: usize, trace: &[StateVector]) -> Result<ZeroPatternReport> {
    let p = sequence_len(d, n)?;
    if trace.len() != p + 1 {
        return Err(Error::DimensionMismatch(format!(
            "trace has {} states, expected p + 1 = {}",
            trace.len(),
            p + 1
        )));
    }
    let zero_tol = crate::tol::ZERO_AMPLITUDE;
    let generic = trace[0]
        .amplitudes()
        .iter()
        .all(|z| z.norm() >= crate::tol::GENERIC_MIN_AMPLITUDE);
    let mut steps = Vec::with_capacity(p);
    let mut prev_zeros = trace[0].zero_count(zero_tol);
    for j in 1..=p {
        let oracle = rsets(d, n, j)?;
        let allowed = oracle.union();
        let support = trace[j - 1].support(zero_tol);
        let escaped: Vec<usize> = support
            .iter()
            .copied()
            .filter(|i| !allowed.contains(i))
            .collect();
        let zero_count = trace[j].zero_count(zero_tol);
        let growth_ok = if generic {
            Some(zero_count == prev_zeros + (d - 1))
        } else {
            None
        };
        steps.push(ZeroPatternStep {
            step: j,
            containment_ok: escaped.is_empty(),
            zero_count,
            growth_ok,
            escaped_indices: escaped,
        });
        prev_zeros = zero_count;
    }
    let final_support = trace[p].support(zero_tol);
    let final_ok = final_support.iter().all(|&i| i == 0);
    Ok(ZeroPatternReport {
        d,
        n,
        generic,
        steps,
        final_ok,
    })
}

/// Control word of the `j`-th scheduled gate, exposed for oracle tests.
pub fn scheduled_word(d: usize, n: usize, j: usize) -> Result<crate::gate::ControlWord> {
    word_for_term(&nth_term(d, n, j)?)
}

fn complex_gaussian(rng: &mut ChaCha20Rng) -> Complex64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re, im)
}

/// Haar-random unitary: QR of a complex Gaussian matrix with the diagonal
/// phase correction. Deterministic per seed.
pub fn haar_random_unitary(dim: usize, seed: u64) -> Result<UnitaryMatrix> {
    if dim == 0 {
        return Err(Error::InvalidArgument("dimension must be positive".into()));
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut z = CMatrix::zeros(dim);
    for r in 0..dim {
        for c in 0..dim {
            z[(r, c)] = complex_gaussian(&mut rng);
        }
    }
    // Householder QR: q_adj * z = r upper triangular
    let mut q_adj = CMatrix::identity(dim);
    for c in 0..dim.saturating_sub(1) {
        let mut phi = z.column(c);
        for p in phi.iter_mut().take(c) {
            *p = Complex64::new(0.0, 0.0);
        }
        let h = crate::householder::householder_matrix(&phi, c).matrix;
        z = h.mul(&z);
        q_adj = h.mul(&q_adj);
    }
    // correct column phases so the distribution is Haar
    let mut u = q_adj.adjoint();
    for c in 0..dim {
        let rcc = z[(c, c)];
        let phase = if rcc.norm() > 0.0 {
            rcc / rcc.norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        for r in 0..dim {
            let v = u[(r, c)] * phase;
            u[(r, c)] = v;
        }
    }
    UnitaryMatrix::new(u)
}

/// Seeded random normalized state with every amplitude at least `1e-6` in
/// magnitude (resampled otherwise), so the zero-growth oracle applies.
pub fn random_state(d: usize, n: usize, seed: u64) -> Result<StateVector> {
    let dim = pow(d, n);
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    for _ in 0..1000 {
        let amps: Vec<Complex64> = (0..dim).map(|_| complex_gaussian(&mut rng)).collect();
        let state = StateVector::new(d, n, amps)?.normalized()?;
        if state
            .amplitudes()
            .iter()
            .all(|z| z.norm() >= crate::tol::GENERIC_MIN_AMPLITUDE)
        {
            return Ok(state);
        }
    }
    Err(Error::InvalidArgument(
        "failed to sample a generic state in 1000 attempts".into(),
    ))
}

/// Result of comparing a circuit against a target unitary.
#[derive(Debug, Clone, Serialize)]
pub struct CompareReport {
    pub residual: f64,
    pub tol: f64,
    pub pass: bool,
    pub up_to_phase: bool,
    /// Phase angle divided out in up-to-phase mode.
    pub phase: Option<f64>,
}

impl CompareReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

impl std::fmt::Display for CompareReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "compare: residual {:.3e} vs tol {:.1e} -> {}{}",
            self.residual,
            self.tol,
            if self.pass { "pass" } else { "FAIL" },
            match self.phase {
                Some(a) => format!(" (global phase {a:.6} divided out)"),
                None => String::new(),
            }
        )
    }
}

/// Frobenius distance between `circuit_matrix(c)` and `u`, optionally up to
/// a global phase (the phase maximizing the overlap is divided out).
pub fn compare(u: &UnitaryMatrix, c: &Circuit, tol: f64, up_to_phase: bool) -> Result<CompareReport> {
    let dim = pow(c.d(), c.n());
    if u.dim() != dim {
        return Err(Error::DimensionMismatch(format!(
            "unitary has dimension {} but circuit realizes {dim}",
            u.dim()
        )));
    }
    let m = c.matrix()?;
    let (m, phase) = if up_to_phase {
        let overlap: Complex64 = (0..dim)
            .flat_map(|r| (0..dim).map(move |c2| (r, c2)))
            .map(|(r, c2)| m[(r, c2)].conj() * u.matrix()[(r, c2)])
            .sum();
        if overlap.norm() > 0.0 {
            let z = overlap / overlap.norm();
            (m.scale(z), Some(z.arg()))
        } else {
            (m, Some(0.0))
        }
    } else {
        (m, None)
    };
    let residual = m.frobenius_distance(u.matrix());
    Ok(CompareReport {
        residual,
        tol,
        pass: residual <= tol,
        up_to_phase,
        phase,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::householder::state_synthesis_run;
    use crate::state::DitString;

    #[test]
    fn rsets_first_step_covers_everything() {
        for (d, n) in [(2usize, 3usize), (3, 2), (3, 3)] {
            let o = rsets(d, n, 1).unwrap();
            assert!(o.r1.is_empty());
            assert!(o.pairwise_disjoint());
            assert_eq!(o.union().len(), pow(d, n));
        }
    }

    #[test]
    fn rsets_match_enumerated_example() {
        // d = 3, n = 2, step 2 is term 1c
        let o = rsets(3, 2, 2).unwrap();
        let idx = |a: u8, b: u8| DitString::new(3, vec![a, b]).unwrap().index();
        assert_eq!(o.r2, [idx(1, 0), idx(1, 1), idx(1, 2)].into_iter().collect());
        assert_eq!(o.r3, [idx(2, 0), idx(2, 1), idx(2, 2)].into_iter().collect());
        assert_eq!(o.r1, [idx(0, 0)].into_iter().collect());
    }

    #[test]
    fn rsets_final_step_has_no_r3() {
        let d = 3;
        let n = 3;
        let p = sequence_len(d, n).unwrap();
        let o = rsets(d, n, p).unwrap();
        assert!(o.r3.is_empty());
        assert!(o.r1.union(&o.r2).count() >= d);
    }

    #[test]
    fn rset_partition_identity_all_steps() {
        // R(j) = R(j+1) + Z(j), both branch cases of the successor rule
        for d in [2usize, 3] {
            for n in 1..=4 {
                let p = sequence_len(d, n).unwrap();
                for j in 1..p {
                    let here = rsets(d, n, j).unwrap();
                    let next = rsets(d, n, j + 1).unwrap();
                    assert!(here.pairwise_disjoint());
                    let mut rebuilt = next.union();
                    assert!(rebuilt.is_disjoint(&here.zeroed), "d={d} n={n} j={j}");
                    rebuilt.extend(&here.zeroed);
                    assert_eq!(here.union(), rebuilt, "d={d} n={n} j={j}");
                }
            }
        }
    }

    #[test]
    fn orbit_closure_inside_matching_set() {
        // the Z/dZ orbit on the target digit maps the allowed-and-matching
        // set into itself
        for d in [2usize, 3] {
            for n in 1..=4 {
                let p = sequence_len(d, n).unwrap();
                for j in 1..=p {
                    let o = rsets(d, n, j).unwrap();
                    let word = scheduled_word(d, n, j).unwrap();
                    let t = word.target_position();
                    let weight = pow(d, n - 1 - t);
                    let allowed = o.union();
                    for &idx in &allowed {
                        let s = DitString::from_index(d, n, idx).unwrap();
                        if !word.matches(&s).unwrap() {
                            continue;
                        }
                        let digit = s.digit(t) as usize;
                        for c in 0..d {
                            let shifted =
                                idx - digit * weight + ((digit + c) % d) * weight;
                            let s2 = DitString::from_index(d, n, shifted).unwrap();
                            assert!(
                                allowed.contains(&shifted) && word.matches(&s2).unwrap(),
                                "orbit escaped at d={d} n={n} j={j} idx={idx} c={c}"
                            );
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn zero_pattern_report_on_random_state() {
        let d = 3;
        let n = 2;
        let psi = random_state(d, n, 42).unwrap();
        let run = state_synthesis_run(&psi).unwrap();
        let report = check_zero_pattern(d, n, &run.trace).unwrap();
        assert!(report.generic);
        assert!(report.pass(), "{report}");
        let zeros: Vec<usize> = report.steps.iter().map(|s| s.zero_count).collect();
        assert_eq!(zeros, vec![2, 4, 6, 8]);
    }

    #[test]
    fn zero_pattern_on_basis_state_skips_growth() {
        let d = 3;
        let n = 2;
        let psi = StateVector::zero_state(d, n).unwrap();
        let run = state_synthesis_run(&psi).unwrap();
        let report = check_zero_pattern(d, n, &run.trace).unwrap();
        assert!(!report.generic);
        assert!(report.pass(), "{report}");
        assert!(report.steps.iter().all(|s| s.growth_ok.is_none()));
    }

    #[test]
    fn crafted_zero_keeps_containment() {
        // zero out one amplitude of a generic state; containment must hold,
        // growth is skipped
        let d = 3;
        let n = 2;
        let mut psi = random_state(d, n, 7).unwrap();
        psi.amplitudes_mut()[4] = Complex64::new(0.0, 0.0);
        let psi = psi.normalized().unwrap();
        let run = state_synthesis_run(&psi).unwrap();
        let report = check_zero_pattern(d, n, &run.trace).unwrap();
        assert!(!report.generic);
        assert!(report.steps.iter().all(|s| s.containment_ok), "{report}");
        assert!(report.final_ok);
    }

    #[test]
    fn haar_unitary_is_deterministic_and_unitary() {
        let a = haar_random_unitary(9, 123).unwrap();
        let b = haar_random_unitary(9, 123).unwrap();
        assert_eq!(a.matrix(), b.matrix());
        assert!(a.unitarity_defect() < 1e-12);
        let c = haar_random_unitary(9, 124).unwrap();
        assert_ne!(a.matrix(), c.matrix());
    }

    #[test]
    fn haar_dimension_one_is_unit_scalar() {
        let u = haar_random_unitary(1, 5).unwrap();
        assert!((u.matrix()[(0, 0)].norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn haar_column_norms_are_one() {
        let u = haar_random_unitary(8, 77).unwrap();
        for c in 0..8 {
            let nrm: f64 = u.column(c).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            assert!((nrm - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn random_state_is_generic_and_deterministic() {
        let a = random_state(3, 3, 9).unwrap();
        let b = random_state(3, 3, 9).unwrap();
        assert_eq!(a, b);
        a.check_normalized().unwrap();
        assert!(a
            .amplitudes()
            .iter()
            .all(|z| z.norm() >= crate::tol::GENERIC_MIN_AMPLITUDE));
    }

    #[test]
    fn compare_empty_circuit_to_identity() {
        let u = UnitaryMatrix::new(CMatrix::identity(9)).unwrap();
        let c = Circuit::new(3, 2).unwrap();
        let r = compare(&u, &c, 1e-15, false).unwrap();
        assert!(r.pass);
        assert_eq!(r.residual, 0.0);
    }

    #[test]
    fn compare_detects_perturbation() {
        use crate::gate::{ControlWord, ControlledGate};
        let d = 2;
        let u = haar_random_unitary(2, 3).unwrap();
        let g = ControlledGate::new(
            ControlWord::uncontrolled(d, 1, 0).unwrap(),
            u.matrix().clone(),
        )
        .unwrap();
        let c = Circuit::from_gates(d, 1, vec![g]).unwrap();
        assert!(compare(&u, &c, 1e-12, false).unwrap().pass);

        // perturb one payload entry by ~1e-3 (renormalized rotation)
        let eps = 1e-3f64;
        let rot = {
            let mut m = CMatrix::identity(2);
            m[(0, 0)] = Complex64::new(eps.cos(), 0.0);
            m[(0, 1)] = Complex64::new(eps.sin(), 0.0);
            m[(1, 0)] = Complex64::new(-eps.sin(), 0.0);
            m[(1, 1)] = Complex64::new(eps.cos(), 0.0);
            m
        };
        let g2 = ControlledGate::new(
            ControlWord::uncontrolled(d, 1, 0).unwrap(),
            rot.mul(u.matrix()),
        )
        .unwrap();
        let c2 = Circuit::from_gates(d, 1, vec![g2]).unwrap();
        let r = compare(&u, &c2, 1e-6, false).unwrap();
        assert!(!r.pass);
    }

    #[test]
    fn compare_up_to_phase_divides_global_phase() {
        let u = haar_random_unitary(4, 8).unwrap();
        let phased =
            UnitaryMatrix::new(u.matrix().scale(Complex64::from_polar(1.0, 0.7))).unwrap();
        let g = crate::gate::ControlledGate::new(
            crate::gate::ControlWord::uncontrolled(4, 1, 0).unwrap(),
            phased.matrix().clone(),
        )
        .unwrap();
        let c = Circuit::from_gates(4, 1, vec![g]).unwrap();
        assert!(!compare(&u, &c, 1e-9, false).unwrap().pass);
        let r = compare(&u, &c, 1e-9, true).unwrap();
        assert!(r.pass, "{r}");
    }
}
