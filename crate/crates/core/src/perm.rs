//! Permutations of `1..=n`, their codes, and order statistics.
//!
//! Everything downstream routes chips by a permutation, so this module keeps
//! the invariants tight: a [`Permutation`] always holds each of `1..=n`
//! exactly once, and a [`LehmerCode`] always satisfies `code[i] <= n - 1 - i`
//! (zero-based `i`). Constructors validate; accessors never re-check.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A permutation of `1..=n`, one-based values in one-based positions.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct Permutation {
    values: Vec<usize>,
}

impl Permutation {
    /// Validates that `values` is a rearrangement of `1..=n`.
    pub fn new(values: Vec<usize>) -> Result<Self> {
        let n = values.len();
        let mut seen = vec![false; n];
        for &v in &values {
            if v < 1 || v > n {
                return Err(Error::InvalidPermutation(format!(
                    "value {v} outside 1..={n}"
                )));
            }
            if seen[v - 1] {
                return Err(Error::InvalidPermutation(format!("value {v} repeated")));
            }
            seen[v - 1] = true;
        }
        Ok(Self { values })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            values: (1..=n).collect(),
        }
    }

    /// `n, n-1, ..., 1`. Maximizes the inversion count of the resulting
    /// stable configuration among all strategies of the same length.
    pub fn reversal(n: usize) -> Self {
        Self {
            values: (1..=n).rev().collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[usize] {
        &self.values
    }

    /// Value at one-based position `i`.
    pub fn at(&self, i: usize) -> usize {
        self.values[i - 1]
    }

    /// Count of positions `i` such that a larger value appears before a
    /// smaller one, i.e. pairs `i < j` with `p(i) > p(j)`.
    pub fn inversions(&self) -> u64 {
        let mut count = 0u64;
        for i in 0..self.values.len() {
            for j in i + 1..self.values.len() {
                if self.values[i] > self.values[j] {
                    count += 1;
                }
            }
        }
        count
    }

    /// One-based positions `i` with `p(i) > p(i+1)`.
    pub fn descent_set(&self) -> BTreeSet<usize> {
        self.values
            .windows(2)
            .enumerate()
            .filter(|(_, w)| w[0] > w[1])
            .map(|(i, _)| i + 1)
            .collect()
    }

    /// The code `c` with `c[i] = #{j > i : p(j) < p(i)}` (zero-based here,
    /// one-based in the mathematical reading). Bijective with permutations.
    pub fn lehmer_code(&self) -> LehmerCode {
        let n = self.values.len();
        let mut codes = Vec::with_capacity(n);
        for i in 0..n {
            let c = (i + 1..n).filter(|&j| self.values[j] < self.values[i]).count();
            codes.push(c);
        }
        LehmerCode { codes }
    }

    /// Reverses the entries and complements each against `n + 1`:
    /// `q(i) = n + 1 - p(n + 1 - i)`.
    ///
    /// This is the involution that transports lexicographic order on
    /// strategies to lexicographic order on their stable configurations.
    pub fn reverse_complement(&self) -> Permutation {
        let n = self.values.len();
        Permutation {
            values: self.values.iter().rev().map(|&v| n + 1 - v).collect(),
        }
    }

    /// Smallest one-based `i0` such that positions `i0..=n` are strictly
    /// increasing. The trailing run is empty only for `n = 0`; otherwise
    /// `i0 <= n`.
    pub fn increasing_tail_start(&self) -> usize {
        let n = self.values.len();
        let mut i0 = n;
        while i0 > 1 && self.values[i0 - 2] < self.values[i0 - 1] {
            i0 -= 1;
        }
        i0
    }

    /// Smallest one-based `i0` such that positions `i0..=n` are strictly
    /// decreasing.
    pub fn decreasing_tail_start(&self) -> usize {
        let n = self.values.len();
        let mut i0 = n;
        while i0 > 1 && self.values[i0 - 2] > self.values[i0 - 1] {
            i0 -= 1;
        }
        i0
    }

    /// Iterator over all permutations of `1..=n` in lexicographic order.
    pub fn all(n: usize) -> Permutations {
        Permutations {
            next: Some((1..=n).collect()),
        }
    }

    /// Digit string like `"231"` when every value is a single digit,
    /// otherwise comma-separated.
    pub fn compact(&self) -> String {
        compact_seq(&self.values)
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_comma_seq(f, &self.values)
    }
}

impl FromStr for Permutation {
    type Err = Error;

    /// Accepts `"3,1,2"` or, for `n <= 9`, the digit string `"312"`.
    fn from_str(s: &str) -> Result<Self> {
        Permutation::new(parse_seq(s)?)
    }
}

impl TryFrom<Vec<usize>> for Permutation {
    type Error = Error;
    fn try_from(values: Vec<usize>) -> Result<Self> {
        Permutation::new(values)
    }
}

impl From<Permutation> for Vec<usize> {
    fn from(p: Permutation) -> Self {
        p.values
    }
}

/// Lexicographic stream of permutations; see [`Permutation::all`].
pub struct Permutations {
    next: Option<Vec<usize>>,
}

impl Iterator for Permutations {
    type Item = Permutation;

    fn next(&mut self) -> Option<Permutation> {
        let current = self.next.take()?;
        let mut succ = current.clone();
        if next_lex(&mut succ) {
            self.next = Some(succ);
        }
        Some(Permutation { values: current })
    }
}

/// In-place lexicographic successor; false when already at the maximum.
fn next_lex(vals: &mut [usize]) -> bool {
    let n = vals.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && vals[i - 1] >= vals[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while vals[j] <= vals[i - 1] {
        j -= 1;
    }
    vals.swap(i - 1, j);
    vals[i..].reverse();
    true
}

/// The Lehmer code of a permutation of `1..=n`: entry `i` (zero-based) lies
/// in `0..=n-1-i`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct LehmerCode {
    codes: Vec<usize>,
}

impl LehmerCode {
    pub fn new(codes: Vec<usize>) -> Result<Self> {
        let n = codes.len();
        for (i, &c) in codes.iter().enumerate() {
            if c > n - 1 - i {
                return Err(Error::InvalidCode(format!(
                    "entry {c} at position {} exceeds bound {}",
                    i + 1,
                    n - 1 - i
                )));
            }
        }
        Ok(Self { codes })
    }

    pub fn zero(n: usize) -> Self {
        Self {
            codes: vec![0; n],
        }
    }

    pub fn len(&self) -> usize {
        self.codes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codes.is_empty()
    }

    pub fn codes(&self) -> &[usize] {
        &self.codes
    }

    /// Entry at one-based position `i`.
    pub fn at(&self, i: usize) -> usize {
        self.codes[i - 1]
    }

    pub fn sum(&self) -> u64 {
        self.codes.iter().map(|&c| c as u64).sum()
    }

    /// One-based positions with a nonzero entry.
    pub fn support(&self) -> SupportSet {
        SupportSet {
            positions: self
                .codes
                .iter()
                .enumerate()
                .filter(|(_, &c)| c != 0)
                .map(|(i, _)| i + 1)
                .collect(),
        }
    }

    /// Inverts the code: entry `i` picks the `c[i]`-th smallest of the values
    /// not yet used. Total when the code is valid, which `new` guarantees.
    pub fn permutation(&self) -> Permutation {
        let n = self.codes.len();
        let mut remaining: Vec<usize> = (1..=n).collect();
        let values = self
            .codes
            .iter()
            .map(|&c| remaining.remove(c))
            .collect();
        Permutation { values }
    }

    /// Entrywise `<=` against `other`. Errors on length mismatch.
    pub fn is_dominated_by(&self, other: &LehmerCode) -> Result<bool> {
        if self.len() != other.len() {
            return Err(Error::LengthMismatch {
                expected: self.len(),
                got: other.len(),
            });
        }
        Ok(self
            .codes
            .iter()
            .zip(&other.codes)
            .all(|(a, b)| a <= b))
    }

    /// Iterator over all valid codes of length `n` in lexicographic order.
    pub fn all(n: usize) -> LehmerCodes {
        LehmerCodes {
            next: Some(vec![0; n]),
        }
    }

    pub fn compact(&self) -> String {
        compact_seq(&self.codes)
    }
}

impl fmt::Display for LehmerCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_comma_seq(f, &self.codes)
    }
}

impl FromStr for LehmerCode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        LehmerCode::new(parse_seq(s)?)
    }
}

impl TryFrom<Vec<usize>> for LehmerCode {
    type Error = Error;
    fn try_from(codes: Vec<usize>) -> Result<Self> {
        LehmerCode::new(codes)
    }
}

impl From<LehmerCode> for Vec<usize> {
    fn from(c: LehmerCode) -> Self {
        c.codes
    }
}

/// Mixed-radix counter over valid codes; see [`LehmerCode::all`].
pub struct LehmerCodes {
    next: Option<Vec<usize>>,
}

impl Iterator for LehmerCodes {
    type Item = LehmerCode;

    fn next(&mut self) -> Option<LehmerCode> {
        let current = self.next.take()?;
        let n = current.len();
        let mut succ = current.clone();
        // Rightmost position that can still grow; entry i is capped at n-1-i.
        let mut i = n;
        loop {
            if i == 0 {
                self.next = None;
                break;
            }
            if succ[i - 1] < n - i {
                succ[i - 1] += 1;
                succ[i..].iter_mut().for_each(|c| *c = 0);
                self.next = Some(succ);
                break;
            }
            i -= 1;
        }
        Some(LehmerCode { codes: current })
    }
}

/// Set of one-based code positions, ordered ascending.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SupportSet {
    positions: BTreeSet<usize>,
}

impl SupportSet {
    pub fn positions(&self) -> &BTreeSet<usize> {
        &self.positions
    }

    pub fn contains(&self, i: usize) -> bool {
        self.positions.contains(&i)
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// `'1'` at position `i` (left to right) iff `i` is in the set.
    pub fn indicator(&self, n: usize) -> String {
        (1..=n)
            .map(|i| if self.contains(i) { '1' } else { '0' })
            .collect()
    }

    /// The indicator read right to left. Comparing two supports by this
    /// string (as a binary numeral) orders their descent counts.
    pub fn reversed_indicator(&self, n: usize) -> String {
        self.indicator(n).chars().rev().collect()
    }

    /// Compares reversed indicators numerically: the set whose highest
    /// position wins is larger.
    pub fn reversed_indicator_cmp(&self, other: &SupportSet) -> Ordering {
        let a = self.positions.iter().rev();
        let b = other.positions.iter().rev();
        a.cmp(b)
    }
}

impl FromIterator<usize> for SupportSet {
    fn from_iter<T: IntoIterator<Item = usize>>(iter: T) -> Self {
        Self {
            positions: iter.into_iter().collect(),
        }
    }
}

impl fmt::Display for SupportSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, p) in self.positions.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{p}")?;
        }
        write!(f, "}}")
    }
}

fn parse_seq(s: &str) -> Result<Vec<usize>> {
    let s = s.trim();
    if s.is_empty() {
        return Ok(Vec::new());
    }
    if s.contains(',') {
        s.split(',')
            .map(|part| {
                part.trim()
                    .parse::<usize>()
                    .map_err(|e| Error::Parse(format!("bad entry {part:?}: {e}")))
            })
            .collect()
    } else {
        // Digit form is only unambiguous through 9.
        s.chars()
            .map(|ch| {
                ch.to_digit(10)
                    .map(|d| d as usize)
                    .ok_or_else(|| Error::Parse(format!("bad digit {ch:?}")))
            })
            .collect()
    }
}

fn compact_seq(vals: &[usize]) -> String {
    if vals.iter().all(|&v| v <= 9) {
        vals.iter().map(|v| char::from(b'0' + *v as u8)).collect()
    } else {
        vals.iter()
            .map(|v| v.to_string())
            .collect::<Vec<_>>()
            .join(",")
    }
}

fn write_comma_seq(f: &mut fmt::Formatter<'_>, vals: &[usize]) -> fmt::Result {
    for (i, v) in vals.iter().enumerate() {
        if i > 0 {
            write!(f, ",")?;
        }
        write!(f, "{v}")?;
    }
    Ok(())
}
