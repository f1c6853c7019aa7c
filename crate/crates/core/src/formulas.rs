//! Closed forms for everything the simulator can measure.
//!
//! Each function here is an arithmetic shortcut past the simulation: where
//! `simulate::run_strategy` moves `k^n` chips layer by layer, these evaluate
//! the final answer directly from the routing permutation or its code. The
//! verification harness exists to show the two agree.
//!
//! Counts are `BigUint` because they grow like `k^2n` and the interesting
//! regimes overflow `u64` well before the simulator runs out of memory.

use std::collections::BTreeSet;

use num_bigint::{BigInt, BigUint, Sign};
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::perm::{LehmerCode, Permutation};
use crate::tree::{ChipLabel, Configuration, TraversalString, TreeParams};

fn big_pow(k: u32, e: u64) -> BigUint {
    BigUint::from(k).pow(e.try_into().expect("exponent fits u32"))
}

/// `x * (x - 1) / 2`, the number of unordered pairs.
fn pairs(x: &BigUint) -> BigUint {
    if x.is_zero() {
        return BigUint::zero();
    }
    x * (x - 1u32) / 2u32
}

fn factorial(n: u64) -> BigUint {
    (1..=n).map(BigUint::from).product()
}

/// Division that must leave no remainder; a remainder means a formula was
/// applied outside its stated scope.
fn exact_div(numerator: BigUint, divisor: &BigUint, context: &str) -> Result<BigUint> {
    use num_integer::Integer;
    let (q, r) = numerator.div_rem(divisor);
    if !r.is_zero() {
        return Err(Error::SelfCheck(format!(
            "{context}: {r} left over dividing by {divisor}"
        )));
    }
    Ok(q)
}

fn check_strategy_len(params: &TreeParams, len: usize) -> Result<()> {
    if len != params.n() as usize {
        return Err(Error::LengthMismatch {
            expected: params.n() as usize,
            got: len,
        });
    }
    Ok(())
}

/// Where a chip ends up: step `i` of the walk is the digit of the chip at
/// position `w(i)`, plus one.
pub fn destination(
    params: &TreeParams,
    w: &Permutation,
    chip: ChipLabel,
) -> Result<TraversalString> {
    check_strategy_len(params, w.len())?;
    let digits = params.digits(chip)?;
    let steps = w.values().iter().map(|&wi| digits[wi - 1] + 1).collect();
    TraversalString::new(steps, params)
}

/// The stable arrangement computed without moving any chips: each chip is
/// placed at `1 + sum_i digit(chip, w(i)) * k^(n-i)`.
pub fn stable_config(params: &TreeParams, w: &Permutation) -> Result<Configuration> {
    check_strategy_len(params, w.len())?;
    let m = params.materialized_chip_count()?;
    let n = params.n();
    let k = params.k() as u64;

    // weight[i] scales the step at walk position i+1; digit_weight[i] pulls
    // out the digit of the chip that position reads.
    let mut place_weight = Vec::with_capacity(n as usize);
    let mut digit_weight = Vec::with_capacity(n as usize);
    for (i, &wi) in w.values().iter().enumerate() {
        place_weight.push(k.pow(n - 1 - i as u32));
        digit_weight.push(k.pow(n - wi as u32));
    }

    let mut chips = vec![ChipLabel(0); m as usize];
    let mut filled = vec![false; m as usize];
    for label in 0..m {
        let mut pos = 0u64;
        for i in 0..n as usize {
            pos += ((label / digit_weight[i]) % k) * place_weight[i];
        }
        if filled[pos as usize] {
            return Err(Error::SelfCheck(format!(
                "chips {label} and {} both map to position {}",
                chips[pos as usize],
                pos + 1
            )));
        }
        filled[pos as usize] = true;
        chips[pos as usize] = ChipLabel(label);
    }
    Configuration::new(*params, chips)
}

/// How many distinct layer-`n+1` vertices the chip can reach across all
/// strategies: permutations of its digit string, `n! / prod(mult_d!)`.
pub fn num_final_positions(params: &TreeParams, chip: ChipLabel) -> Result<BigUint> {
    let digits = params.digits(chip)?;
    let mut mult = vec![0u64; params.k() as usize];
    for d in digits {
        mult[d as usize] += 1;
    }
    let mut denom = BigUint::one();
    for m in mult {
        denom *= factorial(m);
    }
    exact_div(factorial(params.n() as u64), &denom, "digit multiset count")
}

/// Inversions of the stable arrangement, as a sum of binomial terms over the
/// code: `C(k,2) * sum_i C(k^c_i, 2) * k^(2n - i - 2c_i - 1)`.
pub fn inversion_count_binomial_form(params: &TreeParams, code: &LehmerCode) -> Result<BigUint> {
    check_strategy_len(params, code.len())?;
    let n = code.len() as u64;
    let k = params.k();
    let mut sum = BigUint::zero();
    for (i0, &c) in code.codes().iter().enumerate() {
        let i = i0 as u64 + 1;
        let c = c as u64;
        // c <= n - i keeps the exponent nonnegative.
        let exp = 2 * n - i - 2 * c - 1;
        sum += pairs(&big_pow(k, c)) * big_pow(k, exp);
    }
    Ok(sum * pairs(&BigUint::from(k)))
}

/// The same count as a scaled sum of power gaps:
/// `k^n (k-1) / 4 * sum_i (k^(n-i) - k^(n-i-c_i))`.
pub fn inversion_count_powersum_form(params: &TreeParams, code: &LehmerCode) -> Result<BigUint> {
    check_strategy_len(params, code.len())?;
    let n = code.len() as u64;
    let k = params.k();
    let mut sum = BigUint::zero();
    for (i0, &c) in code.codes().iter().enumerate() {
        let i = i0 as u64 + 1;
        sum += big_pow(k, n - i) - big_pow(k, n - i - c as u64);
    }
    let scaled = big_pow(k, n) * BigUint::from(k - 1) * sum;
    exact_div(scaled, &BigUint::from(4u32), "inversion count")
}

/// Inversion count of the stable arrangement routed by the permutation with
/// this code. Evaluates both closed forms and insists they agree.
pub fn inversion_count(params: &TreeParams, code: &LehmerCode) -> Result<BigUint> {
    let a = inversion_count_binomial_form(params, code)?;
    let b = inversion_count_powersum_form(params, code)?;
    if a != b {
        return Err(Error::SelfCheck(format!(
            "inversion forms disagree for code {code}: {a} vs {b}"
        )));
    }
    Ok(a)
}

/// [`inversion_count`] addressed by the permutation itself.
pub fn inversion_count_of(params: &TreeParams, w: &Permutation) -> Result<BigUint> {
    inversion_count(params, &w.lehmer_code())
}

/// The inversion count divided by `k^n (k-1)^2 / 4`, which clears the shared
/// factor and leaves `sum_i sum_(0 <= t < c_i) k^(n - i - c_i + t)`. The
/// division is always exact.
pub fn normalized_inversion_count(params: &TreeParams, code: &LehmerCode) -> Result<BigUint> {
    check_strategy_len(params, code.len())?;
    let n = code.len() as u64;
    let k = params.k();
    let mut sum = BigUint::zero();
    for (i0, &c) in code.codes().iter().enumerate() {
        let i = i0 as u64 + 1;
        let c = c as u64;
        for t in 0..c {
            sum += big_pow(k, n - i - c + t);
        }
    }
    Ok(sum)
}

/// The divisor relating [`inversion_count`] to its normalized value.
pub fn normalization_divisor(params: &TreeParams) -> BigUint {
    let km1 = BigUint::from(params.k() - 1);
    big_pow(params.k(), params.n() as u64) * &km1 * &km1
}

/// Largest inversion count over all strategies of this shape:
/// `(k^2n - n k^(n+1) + (n-1) k^n) / 4`. Attained by the reversal.
pub fn max_inversions(params: &TreeParams) -> Result<BigUint> {
    let n = params.n() as u64;
    let k = params.k();
    let a = BigInt::from(big_pow(k, 2 * n));
    let b = BigInt::from(n) * BigInt::from(big_pow(k, n + 1));
    let c = (BigInt::from(n) - BigInt::one()) * BigInt::from(big_pow(k, n));
    let total = a - b + c;
    if total.sign() == Sign::Minus {
        return Err(Error::SelfCheck(format!(
            "maximum inversion formula went negative: {total}"
        )));
    }
    let total = total.to_biguint().expect("checked nonnegative");
    exact_div(total, &BigUint::from(4u32), "maximum inversion count")
}

/// Descent positions of the stable arrangement, straight from the code's
/// support: for each `s` in the support, every position
/// `(v k + d) * k^(n-s)` with `0 <= v < k^(s-1)` and `1 <= d <= k-1`.
///
/// The set has `sum_s (k-1) k^(s-1)` elements, so it is gated by the
/// materialization cap like any other bulk output.
pub fn descent_set(params: &TreeParams, code: &LehmerCode) -> Result<BTreeSet<u128>> {
    check_strategy_len(params, code.len())?;
    params.chip_count()?; // positions fit u128
    let n = params.n();
    let k = params.k() as u128;
    let support = code.support();

    let mut size: u128 = 0;
    for &s in support.positions() {
        size += (k - 1) * k.pow(s as u32 - 1);
    }
    if size > params.sim_cap() as u128 {
        return Err(Error::ResourceCap {
            resource: "descent set",
            required: size,
            cap: params.sim_cap() as u128,
        });
    }

    let mut set = BTreeSet::new();
    for &s in support.positions() {
        let scale = k.pow(n - s as u32);
        for v in 0..k.pow(s as u32 - 1) {
            for d in 1..k {
                set.insert((v * k + d) * scale);
            }
        }
    }
    Ok(set)
}

/// Number of descents of the stable arrangement:
/// `sum over support positions s of (k-1) k^(s-1)`.
pub fn descent_count(params: &TreeParams, code: &LehmerCode) -> Result<BigUint> {
    check_strategy_len(params, code.len())?;
    let k = params.k();
    let mut total = BigUint::zero();
    for &s in code.support().positions() {
        total += BigUint::from(k - 1) * big_pow(k, s as u64 - 1);
    }
    Ok(total)
}

/// Positions at which some strategy produces a descent: exactly the
/// multiples of `k` up to `k^n - k`. Gated by the materialization cap.
pub fn possible_descent_positions(params: &TreeParams) -> Result<BTreeSet<u128>> {
    if params.n() == 0 {
        return Ok(BTreeSet::new());
    }
    let k = params.k() as u128;
    let count = k.pow(params.n() - 1) - 1;
    if count > params.sim_cap() as u128 {
        return Err(Error::ResourceCap {
            resource: "possible descent positions",
            required: count,
            cap: params.sim_cap() as u128,
        });
    }
    Ok((1..=count).map(|i| i * k).collect())
}

/// Upper bounds `(descents, inversions)` shared by every strategy whose
/// entries from position `i0` on are increasing.
pub fn increasing_tail_bounds(params: &TreeParams, i0: u32) -> Result<(BigUint, BigUint)> {
    check_tail_index(params, i0)?;
    let n = params.n() as u64;
    let k = params.k();

    let mut desc = BigUint::zero();
    for j in 1..i0 as u64 {
        desc += BigUint::from(k - 1) * big_pow(k, j - 1);
    }
    let mut inv = BigUint::zero();
    for i in 1..i0 as u64 {
        inv += big_pow(k, i - 1) * pairs(&big_pow(k, n - i));
    }
    Ok((desc, pairs(&BigUint::from(k)) * inv))
}

/// Lower bounds `(descents, inversions)` shared by every strategy whose
/// entries from position `i0` on are decreasing.
pub fn decreasing_tail_bounds(params: &TreeParams, i0: u32) -> Result<(BigUint, BigUint)> {
    check_tail_index(params, i0)?;
    let n = params.n() as u64;
    let k = params.k();

    let mut desc = BigUint::zero();
    for j in i0 as u64..n {
        desc += BigUint::from(k - 1) * big_pow(k, j - 1);
    }
    let tail_len = n - i0 as u64 + 1;
    let geometric: BigUint = (0..tail_len).map(|t| big_pow(k, t)).sum();
    let scaled = big_pow(k, n) * BigUint::from(k - 1) * (geometric - BigUint::from(tail_len));
    let inv = exact_div(scaled, &BigUint::from(4u32), "decreasing tail bound")?;
    Ok((desc, inv))
}

fn check_tail_index(params: &TreeParams, i0: u32) -> Result<()> {
    if i0 < 1 || i0 > params.n() {
        return Err(Error::OutOfRange {
            what: "tail start",
            value: i0 as u128,
            limit: params.n() as u128,
        });
    }
    Ok(())
}

/// A strategy meeting [`increasing_tail_bounds`] with equality: the largest
/// `i0 - 1` values descending, then everything else ascending.
pub fn increasing_tail_witness(n: u32, i0: u32) -> Result<Permutation> {
    check_witness_index(n, i0)?;
    let n = n as usize;
    let i0 = i0 as usize;
    let mut values = Vec::with_capacity(n);
    for i in 1..i0 {
        values.push(n + 1 - i);
    }
    for i in i0..=n {
        values.push(i - i0 + 1);
    }
    Permutation::new(values)
}

/// A strategy meeting [`decreasing_tail_bounds`] with equality: the smallest
/// `i0 - 1` values ascending, then everything else descending.
pub fn decreasing_tail_witness(n: u32, i0: u32) -> Result<Permutation> {
    check_witness_index(n, i0)?;
    let n = n as usize;
    let i0 = i0 as usize;
    let mut values = Vec::with_capacity(n);
    for i in 1..i0 {
        values.push(i);
    }
    for i in i0..=n {
        values.push(n + i0 - i);
    }
    Permutation::new(values)
}

fn check_witness_index(n: u32, i0: u32) -> Result<()> {
    if i0 < 1 || i0 > n {
        return Err(Error::OutOfRange {
            what: "tail start",
            value: i0 as u128,
            limit: n as u128,
        });
    }
    Ok(())
}

/// `n` chips whose relative order in the stable arrangement copies `w`:
/// chip `j` has digit `0` at position `w(j)` and digit `k-1` elsewhere, i.e.
/// label `(k^n - 1) - (k-1) k^(n - w(j))`.
///
/// Their positions in the arrangement strictly increase with `j`, and their
/// labels sort the same way as the entries of `w`.
pub fn pattern_witness(params: &TreeParams, w: &Permutation) -> Result<Vec<ChipLabel>> {
    check_strategy_len(params, w.len())?;
    let m = params.chip_count_u64()?;
    if params.n() == 0 {
        return Ok(Vec::new());
    }
    let k = params.k() as u64;
    let chips = w
        .values()
        .iter()
        .map(|&wj| ChipLabel(m - 1 - (k - 1) * k.pow(params.n() - wj as u32)))
        .collect();
    Ok(chips)
}
