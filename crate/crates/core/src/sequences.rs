//! Value spectra: the sets of inversion and descent counts attainable at a
//! fixed shape, and the integer sequences they stabilize to as `n` grows.

use std::collections::BTreeSet;

use num_bigint::BigUint;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::formulas;
use crate::perm::LehmerCode;
use crate::tree::TreeParams;

/// Spectrum enumeration walks all `n!` codes; beyond this exponent that is
/// no longer a desk-scale computation.
pub const DEFAULT_SPECTRUM_EXPONENT_CAP: u32 = 10;

/// A sorted, duplicate-free set of attainable values at one shape.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Spectrum {
    params: TreeParams,
    values: Vec<BigUint>,
}

impl Spectrum {
    fn from_set(params: TreeParams, set: BTreeSet<BigUint>) -> Self {
        Self {
            params,
            values: set.into_iter().collect(),
        }
    }

    fn from_sorted(params: TreeParams, values: Vec<BigUint>) -> Result<Self> {
        if values.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::SelfCheck(
                "spectrum values not strictly increasing".into(),
            ));
        }
        Ok(Self { params, values })
    }

    pub fn params(&self) -> &TreeParams {
        &self.params
    }

    pub fn values(&self) -> &[BigUint] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn contains(&self, v: &BigUint) -> bool {
        self.values.binary_search(v).is_ok()
    }

    pub fn max(&self) -> Option<&BigUint> {
        self.values.last()
    }

    /// True when `self.values` is an initial segment of `other.values`.
    pub fn is_prefix_of(&self, other: &Spectrum) -> bool {
        other.values.len() >= self.values.len()
            && other.values[..self.values.len()] == self.values[..]
    }
}

fn check_spectrum_exponent(params: &TreeParams, cap: u32) -> Result<()> {
    if params.n() > cap {
        return Err(Error::ResourceCap {
            resource: "spectrum exponent",
            required: params.n() as u128,
            cap: cap as u128,
        });
    }
    Ok(())
}

/// Every inversion count attainable at this shape, over all `n!` strategies.
pub fn inversion_spectrum(params: &TreeParams) -> Result<Spectrum> {
    inversion_spectrum_capped(params, DEFAULT_SPECTRUM_EXPONENT_CAP)
}

pub fn inversion_spectrum_capped(params: &TreeParams, cap: u32) -> Result<Spectrum> {
    check_spectrum_exponent(params, cap)?;
    let mut set = BTreeSet::new();
    for code in LehmerCode::all(params.n() as usize) {
        set.insert(formulas::inversion_count(params, &code)?);
    }
    Ok(Spectrum::from_set(*params, set))
}

/// The inversion spectrum with the shared factor `k^n (k-1)^2 / 4` divided
/// out. These are the values that stabilize as `n` grows.
pub fn normalized_spectrum(params: &TreeParams) -> Result<Spectrum> {
    normalized_spectrum_capped(params, DEFAULT_SPECTRUM_EXPONENT_CAP)
}

pub fn normalized_spectrum_capped(params: &TreeParams, cap: u32) -> Result<Spectrum> {
    check_spectrum_exponent(params, cap)?;
    let mut set = BTreeSet::new();
    for code in LehmerCode::all(params.n() as usize) {
        set.insert(formulas::normalized_inversion_count(params, &code)?);
    }
    Ok(Spectrum::from_set(*params, set))
}

/// First `m` terms of the sorted set the normalized spectra converge to.
///
/// Grows `n` until the spectrum has `m` terms, checking at each step that
/// the previous spectrum is a prefix of the next, so the returned terms are
/// final. Errors with a resource cap if `m` terms need a deeper spectrum
/// than the cap allows.
pub fn limit_sequence_prefix(k: u32, m: usize) -> Result<Vec<BigUint>> {
    limit_sequence_prefix_capped(k, m, DEFAULT_SPECTRUM_EXPONENT_CAP)
}

pub fn limit_sequence_prefix_capped(k: u32, m: usize, cap: u32) -> Result<Vec<BigUint>> {
    let mut prev: Option<Spectrum> = None;
    for n in 2..=cap {
        let params = TreeParams::new(k, n)?;
        let spectrum = normalized_spectrum_capped(&params, cap)?;
        if let Some(prev) = &prev {
            if !prev.is_prefix_of(&spectrum) {
                return Err(Error::SelfCheck(format!(
                    "normalized spectrum at n={} is not a prefix of n={n}",
                    n - 1
                )));
            }
        }
        if spectrum.len() >= m {
            return Ok(spectrum.values()[..m].to_vec());
        }
        prev = Some(spectrum);
    }
    Err(Error::ResourceCap {
        resource: "limit sequence terms",
        required: m as u128,
        cap: prev.map(|s| s.len() as u128).unwrap_or(0),
    })
}

/// Every descent count attainable at this shape: the subset sums of
/// `(k-1) k^(j-1)` over support sets `S` inside `1..n`. Exactly `2^(n-1)`
/// values for `n >= 1`.
pub fn descent_spectrum(params: &TreeParams) -> Result<Spectrum> {
    let n = params.n();
    if n == 0 {
        return Spectrum::from_sorted(*params, vec![BigUint::zero()]);
    }
    let bits = n - 1;
    let masks: u128 = 1u128
        .checked_shl(bits)
        .ok_or(Error::Overflow("descent spectrum size"))?;
    if masks > params.sim_cap() as u128 {
        return Err(Error::ResourceCap {
            resource: "descent spectrum",
            required: masks,
            cap: params.sim_cap() as u128,
        });
    }
    let k = params.k();
    let weights: Vec<BigUint> = (1..=bits as u64)
        .map(|j| BigUint::from(k - 1) * BigUint::from(k).pow((j - 1) as u32))
        .collect();
    // Ascending masks give ascending sums: the digits are 0 or k-1, so the
    // base-k comparison reduces to the binary one.
    let mut values = Vec::with_capacity(masks as usize);
    for mask in 0..masks {
        let mut sum = BigUint::zero();
        for (j, weight) in weights.iter().enumerate() {
            if mask >> j & 1 == 1 {
                sum += weight;
            }
        }
        values.push(sum);
    }
    Spectrum::from_sorted(*params, values)
}

/// First `m` terms of the sequence of naturals whose base-3 expansion uses
/// only digits 0 and 1: term `i` is the binary expansion of `i` reread in
/// base 3.
pub fn stanley_prefix(m: usize) -> Vec<BigUint> {
    (0..m as u64)
        .map(|i| {
            let mut value = BigUint::zero();
            let mut bit = 0u32;
            let mut rest = i;
            while rest > 0 {
                if rest & 1 == 1 {
                    value += BigUint::from(3u32).pow(bit);
                }
                rest >>= 1;
                bit += 1;
            }
            value
        })
        .collect()
}

/// How the spectrum at `n` sits inside the spectrum at `n + 1`.
#[derive(Debug, Clone)]
pub struct EmbeddingReport {
    pub k: u32,
    pub n: u32,
    /// `k * A(n)` is a subset of `A(n+1)`.
    pub scaled_contained: bool,
    /// Every element of `A(n+1)` outside `k * A(n)` exceeds `k * max A(n)`.
    pub boundary_ok: bool,
    /// The normalized spectrum at `n` is an initial segment of the one at `n+1`.
    pub normalized_prefix_ok: bool,
    pub base_len: usize,
    pub next_len: usize,
    pub violations: Vec<String>,
}

impl EmbeddingReport {
    pub fn pass(&self) -> bool {
        self.scaled_contained && self.boundary_ok && self.normalized_prefix_ok
    }
}

/// Checks the containment `k * A(n)` inside `A(n+1)`, the strict boundary
/// between old and new values, and the prefix property of the normalized
/// spectra. All comparisons are exact integers.
pub fn check_spectrum_embedding(k: u32, n: u32) -> Result<EmbeddingReport> {
    let base = TreeParams::new(k, n)?;
    let next = TreeParams::new(k, n + 1)?;
    let spec_base = inversion_spectrum(&base)?;
    let spec_next = inversion_spectrum(&next)?;

    let mut violations = Vec::new();
    let scaled: BTreeSet<BigUint> = spec_base
        .values()
        .iter()
        .map(|v| v * BigUint::from(k))
        .collect();

    let mut scaled_contained = true;
    for v in &scaled {
        if !spec_next.contains(v) {
            scaled_contained = false;
            violations.push(format!("{v} scaled from level {n} missing at level {}", n + 1));
        }
    }

    let threshold = scaled.iter().next_back().cloned().unwrap_or_default();
    let mut boundary_ok = true;
    for v in spec_next.values() {
        if !scaled.contains(v) && *v <= threshold {
            boundary_ok = false;
            violations.push(format!(
                "new value {v} at level {} does not clear the scaled maximum {threshold}",
                n + 1
            ));
        }
    }

    let norm_base = normalized_spectrum(&base)?;
    let norm_next = normalized_spectrum(&next)?;
    let normalized_prefix_ok = norm_base.is_prefix_of(&norm_next);
    if !normalized_prefix_ok {
        violations.push(format!(
            "normalized spectrum at n={n} is not a prefix of n={}",
            n + 1
        ));
    }

    Ok(EmbeddingReport {
        k,
        n,
        scaled_contained,
        boundary_ok,
        normalized_prefix_ok,
        base_len: spec_base.len(),
        next_len: spec_next.len(),
        violations,
    })
}

/// OEIS b-file text: one `index value` pair per line.
pub fn format_bfile(values: &[BigUint], start_index: u64) -> String {
    let mut out = String::new();
    for (i, v) in values.iter().enumerate() {
        out.push_str(&format!("{} {v}\n", start_index + i as u64));
    }
    out
}

/// `index,value` lines, same indexing convention as [`format_bfile`].
pub fn format_csv(values: &[BigUint], start_index: u64) -> String {
    let mut out = String::from("index,value\n");
    for (i, v) in values.iter().enumerate() {
        out.push_str(&format!("{},{v}\n", start_index + i as u64));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(k: u32, n: u32) -> TreeParams {
        TreeParams::new(k, n).unwrap()
    }

    fn nums(vals: &[u64]) -> Vec<BigUint> {
        vals.iter().map(|&v| BigUint::from(v)).collect()
    }

    #[test]
    fn spectrum_k2_n3() {
        let s = inversion_spectrum(&params(2, 3)).unwrap();
        assert_eq!(s.values(), &nums(&[0, 2, 4, 6, 8]));
    }

    #[test]
    fn spectrum_k3_n3() {
        let s = inversion_spectrum(&params(3, 3)).unwrap();
        assert_eq!(s.values(), &nums(&[0, 27, 81, 108, 135]));
        let n = normalized_spectrum(&params(3, 3)).unwrap();
        assert_eq!(n.values(), &nums(&[0, 1, 3, 4, 5]));
    }

    #[test]
    fn binary_spectrum_is_a_progression() {
        // At k = 2 the spectrum is 2^(n-2) times 0..=2^n - 1 - n.
        for n in 2..=6u32 {
            let s = inversion_spectrum(&params(2, n)).unwrap();
            let step = BigUint::from(2u32).pow(n - 2);
            let top = 2u64.pow(n) - 1 - n as u64;
            let want: Vec<BigUint> = (0..=top).map(|m| BigUint::from(m) * &step).collect();
            assert_eq!(s.values(), &want[..], "n={n}");
        }
    }

    #[test]
    fn normalized_prefix_property() {
        for k in 2..=4u32 {
            let small = normalized_spectrum(&params(k, 3)).unwrap();
            let large = normalized_spectrum(&params(k, 4)).unwrap();
            assert!(small.is_prefix_of(&large), "k={k}");
            assert!(!large.is_prefix_of(&small));
        }
    }

    #[test]
    fn limit_prefixes_match_known_sequences() {
        let base3 = limit_sequence_prefix(3, 14).unwrap();
        assert_eq!(
            base3,
            nums(&[0, 1, 3, 4, 5, 9, 10, 12, 13, 14, 15, 16, 17, 18])
        );
        let base4 = limit_sequence_prefix(4, 14).unwrap();
        assert_eq!(
            base4,
            nums(&[0, 1, 4, 5, 6, 16, 17, 20, 21, 22, 24, 25, 26, 27])
        );
    }

    #[test]
    fn limit_prefix_of_binary_tree_is_naturals() {
        let got = limit_sequence_prefix(2, 10).unwrap();
        assert_eq!(got, nums(&[0, 1, 2, 3, 4, 5, 6, 7, 8, 9]));
    }

    #[test]
    fn descent_spectrum_sizes_and_values() {
        let s = descent_spectrum(&params(2, 3)).unwrap();
        assert_eq!(s.values(), &nums(&[0, 1, 2, 3]));
        let s = descent_spectrum(&params(3, 3)).unwrap();
        assert_eq!(s.values(), &nums(&[0, 2, 6, 8]));
        for n in 1..=6u32 {
            let s = descent_spectrum(&params(3, n)).unwrap();
            assert_eq!(s.len(), 1usize << (n - 1), "n={n}");
        }
        assert_eq!(descent_spectrum(&params(5, 0)).unwrap().values(), &nums(&[0]));
    }

    #[test]
    fn ternary_descent_spectrum_doubles_stanley() {
        for n in 1..=7u32 {
            let s = descent_spectrum(&params(3, n)).unwrap();
            let doubled: Vec<BigUint> = stanley_prefix(s.len())
                .into_iter()
                .map(|v| v * 2u32)
                .collect();
            assert_eq!(s.values(), &doubled[..], "n={n}");
        }
    }

    #[test]
    fn stanley_first_terms() {
        assert_eq!(
            stanley_prefix(10),
            nums(&[0, 1, 3, 4, 9, 10, 12, 13, 27, 28])
        );
    }

    #[test]
    fn embedding_small_cases() {
        for k in 2..=3u32 {
            for n in 0..=4u32 {
                let r = check_spectrum_embedding(k, n).unwrap();
                assert!(r.pass(), "k={k} n={n}: {:?}", r.violations);
                assert!(r.next_len >= r.base_len);
            }
        }
    }

    #[test]
    fn file_formats() {
        let vals = nums(&[0, 5, 7]);
        assert_eq!(format_bfile(&vals, 1), "1 0\n2 5\n3 7\n");
        assert_eq!(format_bfile(&vals, 0), "0 0\n1 5\n2 7\n");
        assert_eq!(format_csv(&vals, 1), "index,value\n1,0\n2,5\n3,7\n");
    }

    #[test]
    fn spectrum_depth_is_capped() {
        let deep = params(2, DEFAULT_SPECTRUM_EXPONENT_CAP + 1);
        assert!(matches!(
            inversion_spectrum(&deep),
            Err(Error::ResourceCap { .. })
        ));
        assert!(matches!(
            limit_sequence_prefix_capped(2, 100_000, 5),
            Err(Error::ResourceCap { .. })
        ));
    }
}
