//! The board: an infinite rooted tree where every vertex has `k` ordered
//! children, `k^n` labeled chips starting at the root, and base-`k` digit
//! bookkeeping for where each chip can go.
//!
//! Positions within a layer are one-based and count left to right. A chip's
//! label is read as `n` base-`k` digits, most significant first; digit
//! positions are one-based from the most significant end.

use std::fmt;

use serde::ser::SerializeSeq;
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};

/// Default ceiling on materialized chip vectors (`2^24` chips).
pub const DEFAULT_SIM_CAP: u64 = 1 << 24;

/// Branching factor `k >= 2` and exponent `n >= 0`, plus the local cap on
/// how many chips a single run may materialize.
///
/// Equality and hashing ignore the cap: two parameter sets describe the same
/// tree if `k` and `n` agree.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct TreeParams {
    k: u32,
    n: u32,
    #[serde(skip, default = "default_sim_cap")]
    sim_cap: u64,
}

fn default_sim_cap() -> u64 {
    DEFAULT_SIM_CAP
}

impl PartialEq for TreeParams {
    fn eq(&self, other: &Self) -> bool {
        self.k == other.k && self.n == other.n
    }
}

impl Eq for TreeParams {}

impl std::hash::Hash for TreeParams {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.k.hash(state);
        self.n.hash(state);
    }
}

impl TreeParams {
    pub fn new(k: u32, n: u32) -> Result<Self> {
        if k < 2 {
            return Err(Error::InvalidParams(format!(
                "branching factor must be at least 2, got {k}"
            )));
        }
        Ok(Self {
            k,
            n,
            sim_cap: DEFAULT_SIM_CAP,
        })
    }

    pub fn with_sim_cap(mut self, cap: u64) -> Self {
        self.sim_cap = cap;
        self
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn sim_cap(&self) -> u64 {
        self.sim_cap
    }

    /// `k^n` as a width-checked `u128`.
    pub fn chip_count(&self) -> Result<u128> {
        (self.k as u128)
            .checked_pow(self.n)
            .ok_or(Error::Overflow("chip count"))
    }

    /// `k^n` when it fits in `u64`; chip labels live in this range.
    pub fn chip_count_u64(&self) -> Result<u64> {
        let m = self.chip_count()?;
        u64::try_from(m).map_err(|_| Error::Overflow("chip count"))
    }

    /// `k^n` checked against the materialization cap. Every code path that
    /// allocates one slot per chip calls this first.
    pub fn materialized_chip_count(&self) -> Result<u64> {
        let m = self.chip_count()?;
        if m > self.sim_cap as u128 {
            return Err(Error::ResourceCap {
                resource: "materialized chips",
                required: m,
                cap: self.sim_cap as u128,
            });
        }
        Ok(m as u64)
    }

    /// `k^e` in `u64`, for exponents within this tree's digit range.
    pub(crate) fn pow_u64(&self, e: u32) -> Result<u64> {
        (self.k as u64)
            .checked_pow(e)
            .ok_or(Error::Overflow("power of k"))
    }

    /// The `n` base-`k` digits of `label`, most significant first.
    pub fn digits(&self, chip: ChipLabel) -> Result<Vec<u32>> {
        let m = self.chip_count()?;
        if (chip.0 as u128) >= m {
            return Err(Error::OutOfRange {
                what: "chip label",
                value: chip.0 as u128,
                limit: m - 1,
            });
        }
        let mut rest = chip.0;
        let mut digits = vec![0u32; self.n as usize];
        for slot in digits.iter_mut().rev() {
            *slot = (rest % self.k as u64) as u32;
            rest /= self.k as u64;
        }
        Ok(digits)
    }

    /// Reassembles a label from `n` digits, most significant first.
    pub fn chip_from_digits(&self, digits: &[u32]) -> Result<ChipLabel> {
        if digits.len() != self.n as usize {
            return Err(Error::LengthMismatch {
                expected: self.n as usize,
                got: digits.len(),
            });
        }
        let mut value: u64 = 0;
        for &d in digits {
            if d >= self.k {
                return Err(Error::OutOfRange {
                    what: "digit",
                    value: d as u128,
                    limit: (self.k - 1) as u128,
                });
            }
            value = value
                .checked_mul(self.k as u64)
                .and_then(|v| v.checked_add(d as u64))
                .ok_or(Error::Overflow("chip label"))?;
        }
        Ok(ChipLabel(value))
    }
}

impl fmt::Display for TreeParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "k={}, n={}", self.k, self.n)
    }
}

/// A chip's label, one of `0..k^n`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ChipLabel(pub u64);

impl fmt::Debug for ChipLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for ChipLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl From<u64> for ChipLabel {
    fn from(v: u64) -> Self {
        ChipLabel(v)
    }
}

/// A root-to-vertex walk: step `t_i` picks the `t_i`-th child, `1..=k`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TraversalString {
    steps: Vec<u32>,
}

impl TraversalString {
    pub fn new(steps: Vec<u32>, params: &TreeParams) -> Result<Self> {
        for &t in &steps {
            if t < 1 || t > params.k() {
                return Err(Error::OutOfRange {
                    what: "traversal step",
                    value: t as u128,
                    limit: params.k() as u128,
                });
            }
        }
        Ok(Self { steps })
    }

    pub fn steps(&self) -> &[u32] {
        &self.steps
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// One-based left-to-right index of the endpoint within its layer:
    /// `1 + sum_i (t_i - 1) k^(len - i)`. Inverts the walk for layers up to
    /// `n`, which is as deep as any chip here travels.
    pub fn layer_position(&self, params: &TreeParams) -> Result<u64> {
        let depth = self.len() as u32;
        if depth > params.n() {
            return Err(Error::OutOfRange {
                what: "traversal depth",
                value: depth as u128,
                limit: params.n() as u128,
            });
        }
        let mut pos: u64 = 0;
        for (i, &t) in self.steps.iter().enumerate() {
            let weight = params.pow_u64(depth - 1 - i as u32)?;
            pos = pos
                .checked_add((t as u64 - 1) * weight)
                .ok_or(Error::Overflow("layer position"))?;
        }
        Ok(pos + 1)
    }
}

impl fmt::Display for TraversalString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, t) in self.steps.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{t}")?;
        }
        write!(f, ")")
    }
}

/// A stable arrangement: every chip on one layer, one chip per vertex,
/// recorded left to right. Always a rearrangement of `0..k^n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Configuration {
    params: TreeParams,
    chips: Vec<ChipLabel>,
}

impl Configuration {
    pub fn new(params: TreeParams, chips: Vec<ChipLabel>) -> Result<Self> {
        let m = params.materialized_chip_count()?;
        if chips.len() as u64 != m {
            return Err(Error::LengthMismatch {
                expected: m as usize,
                got: chips.len(),
            });
        }
        let mut seen = vec![false; chips.len()];
        for &c in &chips {
            let idx = c.0 as usize;
            if c.0 >= m {
                return Err(Error::InvalidConfiguration(format!(
                    "chip {c} outside 0..{m}"
                )));
            }
            if seen[idx] {
                return Err(Error::InvalidConfiguration(format!("chip {c} repeated")));
            }
            seen[idx] = true;
        }
        Ok(Self { params, chips })
    }

    pub fn params(&self) -> &TreeParams {
        &self.params
    }

    pub fn chips(&self) -> &[ChipLabel] {
        &self.chips
    }

    /// Chip at one-based position `i`.
    pub fn at(&self, i: u64) -> ChipLabel {
        self.chips[(i - 1) as usize]
    }

    /// Count of pairs of positions holding chips in decreasing order.
    /// Merge-based, `O(m log m)`.
    pub fn inversions(&self) -> u64 {
        let mut work: Vec<u64> = self.chips.iter().map(|c| c.0).collect();
        let mut buf = vec![0u64; work.len()];
        count_inversions(&mut work, &mut buf)
    }

    /// One-based positions `i` with a larger chip before position `i + 1`.
    pub fn descent_set(&self) -> Vec<u64> {
        self.chips
            .windows(2)
            .enumerate()
            .filter(|(_, w)| w[0] > w[1])
            .map(|(i, _)| i as u64 + 1)
            .collect()
    }

    pub fn descent_count(&self) -> u64 {
        self.descent_set().len() as u64
    }

    /// Compares the chip sequences of two same-shape configurations.
    pub fn lex_cmp(&self, other: &Configuration) -> Result<std::cmp::Ordering> {
        if self.params != other.params {
            return Err(Error::ParamsMismatch(format!(
                "cannot compare ({}) with ({})",
                self.params, other.params
            )));
        }
        Ok(self.chips.cmp(&other.chips))
    }

    /// Flat JSON object with `k`, `n`, and the chip sequence.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "k": self.params.k(),
            "n": self.params.n(),
            "chips": self.chips.iter().map(|c| c.0).collect::<Vec<_>>(),
        })
    }
}

impl fmt::Display for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.chips.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

impl Serialize for Configuration {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = serializer.serialize_seq(Some(self.chips.len()))?;
        for c in &self.chips {
            seq.serialize_element(&c.0)?;
        }
        seq.end()
    }
}

/// Sorts `vals` while counting the swaps a sort would need across the merge
/// boundary, which is exactly the inversion count.
fn count_inversions(vals: &mut [u64], buf: &mut [u64]) -> u64 {
    let n = vals.len();
    if n < 2 {
        return 0;
    }
    let mid = n / 2;
    let (left, right) = vals.split_at_mut(mid);
    let (lbuf, rbuf) = buf.split_at_mut(mid);
    let mut count = count_inversions(left, lbuf) + count_inversions(right, rbuf);

    let (mut i, mut j) = (0, 0);
    for slot in buf.iter_mut().take(n) {
        if i < left.len() && (j >= right.len() || left[i] <= right[j]) {
            *slot = left[i];
            i += 1;
        } else {
            *slot = right[j];
            j += 1;
            count += (left.len() - i) as u64;
        }
    }
    vals.copy_from_slice(&buf[..n]);
    count
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(k: u32, n: u32, chips: &[u64]) -> Configuration {
        let params = TreeParams::new(k, n).unwrap();
        Configuration::new(params, chips.iter().map(|&c| ChipLabel(c)).collect()).unwrap()
    }

    #[test]
    fn digits_round_trip() {
        let params = TreeParams::new(3, 4).unwrap();
        for label in 0..81u64 {
            let ds = params.digits(ChipLabel(label)).unwrap();
            assert_eq!(ds.len(), 4);
            assert_eq!(params.chip_from_digits(&ds).unwrap(), ChipLabel(label));
        }
        assert!(params.digits(ChipLabel(81)).is_err());
    }

    #[test]
    fn digits_most_significant_first() {
        let params = TreeParams::new(2, 3).unwrap();
        assert_eq!(params.digits(ChipLabel(5)).unwrap(), vec![1, 0, 1]);
        assert_eq!(params.digits(ChipLabel(1)).unwrap(), vec![0, 0, 1]);
    }

    #[test]
    fn rejects_unary_trees() {
        assert!(TreeParams::new(1, 3).is_err());
        assert!(TreeParams::new(0, 0).is_err());
    }

    #[test]
    fn layer_position_enumerates_layer() {
        // Walks of length 2 in a ternary tree hit 1..=9, each exactly once.
        let params = TreeParams::new(3, 2).unwrap();
        let mut seen = Vec::new();
        for a in 1..=3 {
            for b in 1..=3 {
                let t = TraversalString::new(vec![a, b], &params).unwrap();
                seen.push(t.layer_position(&params).unwrap());
            }
        }
        assert_eq!(seen, (1..=9).collect::<Vec<u64>>());
    }

    #[test]
    fn traversal_validation() {
        let params = TreeParams::new(2, 3).unwrap();
        assert!(TraversalString::new(vec![1, 2, 2], &params).is_ok());
        assert!(TraversalString::new(vec![0, 1], &params).is_err());
        assert!(TraversalString::new(vec![3], &params).is_err());
        let too_deep = TraversalString::new(vec![1, 1, 1, 1], &params).unwrap();
        assert!(too_deep.layer_position(&params).is_err());
    }

    #[test]
    fn configuration_validation() {
        let params = TreeParams::new(2, 2).unwrap();
        let ok = Configuration::new(
            params,
            vec![ChipLabel(3), ChipLabel(1), ChipLabel(0), ChipLabel(2)],
        );
        assert!(ok.is_ok());
        let dup = Configuration::new(
            params,
            vec![ChipLabel(3), ChipLabel(1), ChipLabel(1), ChipLabel(2)],
        );
        assert!(dup.is_err());
        let short = Configuration::new(params, vec![ChipLabel(0)]);
        assert!(short.is_err());
    }

    #[test]
    fn inversion_counting_matches_pairwise() {
        let c = cfg(2, 3, &[0, 4, 2, 6, 1, 5, 3, 7]);
        let chips = c.chips();
        let mut pairwise = 0;
        for i in 0..chips.len() {
            for j in i + 1..chips.len() {
                if chips[i] > chips[j] {
                    pairwise += 1;
                }
            }
        }
        assert_eq!(c.inversions(), pairwise);
        assert_eq!(c.inversions(), 8);
    }

    #[test]
    fn descents_of_known_configuration() {
        let c = cfg(2, 3, &[0, 4, 2, 6, 1, 5, 3, 7]);
        assert_eq!(c.descent_set(), vec![2, 4, 6]);
        assert_eq!(c.descent_count(), 3);
    }

    #[test]
    fn sim_cap_blocks_materialization() {
        let params = TreeParams::new(2, 30).unwrap().with_sim_cap(1 << 10);
        match params.materialized_chip_count() {
            Err(Error::ResourceCap { required, cap, .. }) => {
                assert_eq!(required, 1 << 30);
                assert_eq!(cap, 1 << 10);
            }
            other => panic!("expected cap error, got {other:?}"),
        }
    }

    #[test]
    fn params_equality_ignores_cap() {
        let a = TreeParams::new(2, 3).unwrap();
        let b = TreeParams::new(2, 3).unwrap().with_sim_cap(16);
        assert_eq!(a, b);
    }
}
