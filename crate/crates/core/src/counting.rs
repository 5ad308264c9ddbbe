//! Exact integer gate-count analytics in arbitrary precision.
//!
//! `h` counts controls in the club-Householder state reduction, `g` the
//! work below the block diagonal of the matrix reduction, and `f` the full
//! reduction including the diagonal blocks:
//!
//! ```text
//! h(n, 1) = (d^n - 1)/(d - 1) - n        h(n, 0) = n        h(n, k>=2) = 0
//! g(n, k) = [k = n-1] (d^n - d^(n-1)) + (d(d-1)/2) d^(n-1) h(n-1, k-1)
//! f(n, k) = g(n, k) + f(n-1, k) + (d-1) f(n-1, k-1),   f(n, 0) = 1
//! ```
//!
//! All values are exact `BigUint`s; the reference tables this reproduces
//! were printed by a 32-bit implementation and overflow past ten digits.

use std::collections::BTreeMap;

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gate::Circuit;

pub(crate) fn pow_big_guard(d: usize, n: usize) -> Result<()> {
    d.checked_pow(n as u32)
        .map(|_| ())
        .ok_or_else(|| Error::InvalidArgument(format!("d^n overflows for d = {d}, n = {n}")))
}

fn big_pow(d: usize, n: usize) -> BigUint {
    BigUint::from(d).pow(n as u32)
}

/// `(d^n - 1)/(d - 1)`, the club sequence length.
pub fn sequence_len_big(d: usize, n: usize) -> BigUint {
    (big_pow(d, n) - 1u32) / BigUint::from(d - 1)
}

fn check_shape(d: usize, n: usize) -> Result<()> {
    if d < 2 || n == 0 {
        return Err(Error::InvalidArgument(format!(
            "invalid count arguments d = {d}, n = {n}"
        )));
    }
    Ok(())
}

/// Number of `k`-controlled gates in the state reduction.
pub fn h(d: usize, n: usize, k: usize) -> Result<BigUint> {
    check_shape(d, n)?;
    Ok(match k {
        0 => BigUint::from(n),
        1 => sequence_len_big(d, n) - BigUint::from(n),
        _ => BigUint::ZERO,
    })
}

/// Number of `k`-controlled gates spent zeroing below the block diagonal.
pub fn g(d: usize, n: usize, k: usize) -> Result<BigUint> {
    check_shape(d, n)?;
    if n < 2 {
        return Err(Error::InvalidArgument(
            "g is defined for n >= 2 only".into(),
        ));
    }
    let mut total = BigUint::ZERO;
    if k == n - 1 {
        total += big_pow(d, n) - big_pow(d, n - 1);
    }
    if k >= 1 {
        let calls = BigUint::from(d * (d - 1) / 2) * big_pow(d, n - 1);
        total += calls * h(d, n - 1, k - 1)?;
    }
    Ok(total)
}

/// Row `f(n, 0..=n)` computed bottom-up.
fn f_row(d: usize, n: usize) -> Result<Vec<BigUint>> {
    check_shape(d, n)?;
    let mut row = vec![BigUint::ZERO; n + 1];
    row[0] = BigUint::from(1u32);
    for m in 2..=n {
        let mut next = vec![BigUint::ZERO; n + 1];
        next[0] = BigUint::from(1u32);
        for k in 1..=n {
            next[k] =
                g(d, m, k)? + &row[k] + BigUint::from(d - 1) * &row[k - 1];
        }
        row = next;
    }
    Ok(row)
}

/// Total number of `k`-controlled gates in the full matrix reduction.
pub fn f(d: usize, n: usize, k: usize) -> Result<BigUint> {
    let row = f_row(d, n)?;
    Ok(row.get(k).cloned().unwrap_or(BigUint::ZERO))
}

/// The table entry: `sum_k k * f(n, k)`, the total number of control boxes.
pub fn total_control_boxes(d: usize, n: usize) -> Result<BigUint> {
    let row = f_row(d, n)?;
    Ok(row
        .iter()
        .enumerate()
        .map(|(k, v)| v * BigUint::from(k))
        .sum())
}

/// All counts for one register shape as an exact table. Serializes counts
/// as decimal strings so no consumer can overflow reading them back.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountTable {
    pub d: usize,
    pub n: usize,
    counts: BTreeMap<usize, BigUint>,
}

impl Serialize for CountTable {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut s = serializer.serialize_struct("CountTable", 3)?;
        s.serialize_field("d", &self.d)?;
        s.serialize_field("n", &self.n)?;
        let as_strings: BTreeMap<usize, String> = self
            .counts
            .iter()
            .map(|(&k, v)| (k, v.to_string()))
            .collect();
        s.serialize_field("counts", &as_strings)?;
        s.end()
    }
}

impl CountTable {
    pub fn new(d: usize, n: usize, counts: BTreeMap<usize, BigUint>) -> Result<Self> {
        check_shape(d, n)?;
        if counts.keys().any(|&k| k >= n) {
            return Err(Error::InvalidArgument(format!(
                "count table key exceeds n - 1 = {}",
                n - 1
            )));
        }
        Ok(CountTable { d, n, counts })
    }

    pub fn counts(&self) -> &BTreeMap<usize, BigUint> {
        &self.counts
    }

    pub fn get(&self, k: usize) -> BigUint {
        self.counts.get(&k).cloned().unwrap_or(BigUint::ZERO)
    }

    /// `sum_k k * counts[k]`.
    pub fn weighted_total(&self) -> BigUint {
        self.counts
            .iter()
            .map(|(&k, v)| v * BigUint::from(k))
            .sum()
    }

    pub fn total(&self) -> BigUint {
        self.counts.values().sum()
    }
}

/// Predicted control-arity table of the matrix reduction.
pub fn f_table(d: usize, n: usize) -> Result<CountTable> {
    let row = f_row(d, n)?;
    let counts = row
        .into_iter()
        .enumerate()
        .take(n)
        .filter(|(_, v)| *v != BigUint::ZERO)
        .collect();
    CountTable::new(d, n, counts)
}

/// Predicted control-arity table of the state reduction.
pub fn h_table(d: usize, n: usize) -> Result<CountTable> {
    let mut counts = BTreeMap::new();
    counts.insert(0, h(d, n, 0)?);
    let h1 = h(d, n, 1)?;
    if h1 != BigUint::ZERO {
        counts.insert(1, h1);
    }
    CountTable::new(d, n, counts)
}

/// Histogram of a circuit's gates by number of controls.
pub fn circuit_histogram(c: &Circuit) -> CountTable {
    let mut counts: BTreeMap<usize, BigUint> = BTreeMap::new();
    for gate in c.gates() {
        *counts.entry(gate.word().control_count()).or_default() += 1u32;
    }
    CountTable {
        d: c.d(),
        n: c.n(),
        counts,
    }
}

/// Gate counts of the club reduction on a nearest-neighbor chain, where a
/// singly controlled gate spanning `k` lines has length `k`. The recursion
///
/// ```text
/// a(d, n+1, k) = (d - 1) + d a(d, n, k),    a(d, n, 0) = n
/// ```
///
/// is anchored at `a(d, n, k) = 0` for `k >= n` and closes to `d^(n-k) - 1`.
pub fn chain_a(d: usize, n: usize, k: usize) -> Result<BigUint> {
    check_shape(d, n)?;
    if k == 0 {
        return Ok(BigUint::from(n));
    }
    if k >= n {
        return Ok(BigUint::ZERO);
    }
    let mut acc = BigUint::ZERO; // a(d, k, k)
    for _ in k..n {
        acc = BigUint::from(d - 1) + BigUint::from(d) * acc;
    }
    Ok(acc)
}

/// The closed form `d^(n-k) - 1` for `1 <= k <= n - 1`.
pub fn chain_a_closed(d: usize, n: usize, k: usize) -> Result<BigUint> {
    check_shape(d, n)?;
    if k == 0 {
        return Ok(BigUint::from(n));
    }
    if k >= n {
        return Ok(BigUint::ZERO);
    }
    Ok(big_pow(d, n - k) - 1u32)
}

/// `sum_k k * a(d, n, k)`.
pub fn chain_total(d: usize, n: usize) -> Result<BigUint> {
    check_shape(d, n)?;
    let mut total = BigUint::ZERO;
    for k in 1..n {
        total += BigUint::from(k) * chain_a(d, n, k)?;
    }
    Ok(total)
}

/// Desk-scale check of the two count lemmas: the per-arity bound
/// `f(n, k) <= d^(2n - k + 4)` for `3 <= n <= n_max`, and boundedness of
/// the weighted total against `2 d^(2n)` with the largest observed ratio
/// reported.
#[derive(Debug, Clone, Serialize)]
pub struct BoundReport {
    pub d: usize,
    pub n_max: usize,
    pub per_arity_bound_ok: bool,
    pub violations: Vec<(usize, usize)>,
    pub weighted_ratio_max: f64,
    pub weighted_ratio_bounded: bool,
}

impl BoundReport {
    pub fn pass(&self) -> bool {
        self.per_arity_bound_ok && self.weighted_ratio_bounded
    }
}

impl std::fmt::Display for BoundReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(
            f,
            "bound check d = {}, n <= {}: per-arity bound {}, weighted ratio max {:.6} ({})",
            self.d,
            self.n_max,
            if self.per_arity_bound_ok { "ok" } else { "VIOLATED" },
            self.weighted_ratio_max,
            if self.weighted_ratio_bounded {
                "bounded"
            } else {
                "UNBOUNDED"
            },
        )?;
        for (n, k) in &self.violations {
            writeln!(f, "  violation at n = {n}, k = {k}")?;
        }
        Ok(())
    }
}

pub fn bound_check(d: usize, n_max: usize) -> Result<BoundReport> {
    check_shape(d, n_max)?;
    let mut violations = Vec::new();
    let mut ratio_max: f64 = 0.0;
    let mut bounded = true;
    for n in 2..=n_max {
        let row = f_row(d, n)?;
        if n >= 3 {
            for (k, value) in row.iter().enumerate() {
                if *value != BigUint::ZERO && 2 * n + 4 >= k {
                    let bound = big_pow(d, 2 * n - k + 4);
                    if *value > bound {
                        violations.push((n, k));
                    }
                }
            }
        }
        let total = total_control_boxes(d, n)?;
        let denom = big_pow(d, 2 * n);
        if total > BigUint::from(2u32) * &denom {
            bounded = false;
        }
        let ratio = total.to_f64().unwrap_or(f64::INFINITY)
            / denom.to_f64().unwrap_or(f64::INFINITY);
        ratio_max = ratio_max.max(ratio);
    }
    Ok(BoundReport {
        d,
        n_max,
        per_arity_bound_ok: violations.is_empty(),
        violations,
        weighted_ratio_max: ratio_max,
        weighted_ratio_bounded: bounded,
    })
}
