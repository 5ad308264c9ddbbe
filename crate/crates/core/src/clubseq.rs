//! The club sequence that schedules Householder reflections.
//!
//! A term is a length-`n` word over `{0..d-1, club}` whose club letters form
//! a non-empty contiguous suffix. The sequence for `(d, n)` consists of the
//! `d` prefixed copies of the `(d, n-1)` sequence followed by the all-club
//! term, for a total of `(d^n - 1)/(d - 1)` terms.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ClubLetter {
    Digit(u8),
    Club,
}

/// One term of the club sequence.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ClubTerm {
    d: usize,
    letters: Vec<ClubLetter>,
}

impl ClubTerm {
    pub fn new(d: usize, letters: Vec<ClubLetter>) -> Result<Self> {
        if d < 2 {
            return Err(Error::InvalidArgument(format!("d must be >= 2, got {d}")));
        }
        let first_club = letters.iter().position(|l| *l == ClubLetter::Club);
        let Some(first_club) = first_club else {
            return Err(Error::InvalidArgument(
                "club term must contain at least one club letter".into(),
            ));
        };
        for (i, l) in letters.iter().enumerate() {
            match l {
                ClubLetter::Club if i < first_club => unreachable!(),
                ClubLetter::Digit(v) => {
                    if i > first_club {
                        return Err(Error::InvalidArgument(
                            "club letters must form a contiguous suffix".into(),
                        ));
                    }
                    if *v as usize >= d {
                        return Err(Error::InvalidArgument(format!(
                            "digit {v} out of range for d = {d}"
                        )));
                    }
                }
                _ => {}
            }
        }
        Ok(ClubTerm { d, letters })
    }

    fn from_prefix(d: usize, n: usize, prefix: &[u8]) -> Self {
        let mut letters: Vec<ClubLetter> =
            prefix.iter().map(|&v| ClubLetter::Digit(v)).collect();
        letters.resize(n, ClubLetter::Club);
        ClubTerm { d, letters }
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n(&self) -> usize {
        self.letters.len()
    }

    pub fn letters(&self) -> &[ClubLetter] {
        &self.letters
    }

    /// Digits before the first club letter.
    pub fn prefix(&self) -> Vec<u8> {
        self.letters
            .iter()
            .take_while(|l| matches!(l, ClubLetter::Digit(_)))
            .map(|l| match l {
                ClubLetter::Digit(v) => *v,
                ClubLetter::Club => unreachable!(),
            })
            .collect()
    }

    /// Position of the leftmost club letter.
    pub fn leftmost_club(&self) -> usize {
        self.letters
            .iter()
            .position(|l| *l == ClubLetter::Club)
            .expect("club term invariant guarantees a club")
    }

    /// Largest position carrying a numeric value greater than zero, if any.
    pub fn rightmost_nonzero(&self) -> Option<usize> {
        self.letters.iter().rposition(|l| match l {
            ClubLetter::Digit(v) => *v > 0,
            ClubLetter::Club => false,
        })
    }

    /// Text rendering; clubs print as `c` in ASCII mode. `*` is reserved for
    /// control words and never appears in a term.
    pub fn render(&self, utf8: bool) -> String {
        self.letters
            .iter()
            .map(|l| match l {
                ClubLetter::Digit(v) => char::from_digit(*v as u32, 36).unwrap().to_string(),
                ClubLetter::Club => if utf8 { "\u{2663}" } else { "c" }.to_string(),
            })
            .collect()
    }
}

impl std::fmt::Display for ClubTerm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.render(false))
    }
}

/// Number of terms, `(d^n - 1)/(d - 1)`.
pub fn sequence_len(d: usize, n: usize) -> Result<usize> {
    if d < 2 || n == 0 {
        return Err(Error::InvalidArgument(format!(
            "invalid club sequence shape d = {d}, n = {n}"
        )));
    }
    Ok((crate::state::pow(d, n) - 1) / (d - 1))
}

/// Materializes the whole sequence via the prefix recursion.
pub fn make_club_sequence(d: usize, n: usize) -> Result<Vec<ClubTerm>> {
    if d < 2 || n == 0 {
        return Err(Error::InvalidArgument(format!(
            "invalid club sequence shape d = {d}, n = {n}"
        )));
    }
    if n == 1 {
        return Ok(vec![ClubTerm::from_prefix(d, 1, &[])]);
    }
    let sub = make_club_sequence(d, n - 1)?;
    let mut seq = Vec::with_capacity(sequence_len(d, n)?);
    for q in 0..d as u8 {
        for t in &sub {
            let mut letters = Vec::with_capacity(n);
            letters.push(ClubLetter::Digit(q));
            letters.extend_from_slice(t.letters());
            seq.push(ClubTerm { d, letters });
        }
    }
    seq.push(ClubTerm::from_prefix(d, n, &[]));
    Ok(seq)
}

/// Lazy enumeration of the sequence without materializing it, for counting
/// at large `n`. Terms are produced in sequence order by the successor rule:
/// if the last prefix digit is below `d - 1`, increment it and pad with
/// zeros down to a single trailing club; otherwise drop it and grow the club
/// suffix.
pub struct ClubSequenceIter {
    d: usize,
    n: usize,
    prefix: Option<Vec<u8>>,
}

impl Iterator for ClubSequenceIter {
    type Item = ClubTerm;

    fn next(&mut self) -> Option<ClubTerm> {
        let prefix = self.prefix.as_mut()?;
        let term = ClubTerm::from_prefix(self.d, self.n, prefix);
        loop {
            match prefix.last() {
                None => {
                    self.prefix = None;
                    break;
                }
                Some(&v) if (v as usize) < self.d - 1 => {
                    *prefix.last_mut().unwrap() = v + 1;
                    prefix.resize(self.n - 1, 0);
                    break;
                }
                Some(_) => {
                    prefix.pop();
                    break;
                }
            }
        }
        Some(term)
    }
}

pub fn club_sequence_iter(d: usize, n: usize) -> Result<ClubSequenceIter> {
    if d < 2 || n == 0 {
        return Err(Error::InvalidArgument(format!(
            "invalid club sequence shape d = {d}, n = {n}"
        )));
    }
    Ok(ClubSequenceIter {
        d,
        n,
        prefix: Some(vec![0; n - 1]),
    })
}
