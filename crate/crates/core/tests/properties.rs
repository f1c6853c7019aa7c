//! Randomized and exhaustive cross-checks between the independent routes to
//! each quantity: simulation versus closed forms, merge counting versus
//! pairwise counting, codes versus permutations.

use std::cmp::Ordering;

use num_bigint::BigUint;
use proptest::prelude::*;

use chipfire::{formulas, sequences, simulate};
use chipfire::{LehmerCode, Permutation, TreeParams};

fn code_from_raw(raw: &[u64]) -> LehmerCode {
    let n = raw.len();
    let codes = raw
        .iter()
        .enumerate()
        .map(|(i, r)| (*r as usize) % (n - i))
        .collect();
    LehmerCode::new(codes).expect("entries reduced into bounds")
}

/// Uniformly distributed codes of length `n` (hence uniform permutations).
fn arb_code(n: usize) -> impl Strategy<Value = LehmerCode> {
    prop::collection::vec(any::<u64>(), n).prop_map(|raw| code_from_raw(&raw))
}

fn arb_shape(max_k: u32, max_n: u32) -> impl Strategy<Value = (TreeParams, LehmerCode)> {
    (2..=max_k, 0..=max_n).prop_flat_map(|(k, n)| {
        arb_code(n as usize).prop_map(move |code| {
            (TreeParams::new(k, n).expect("k >= 2"), code)
        })
    })
}

/// Like [`arb_shape`] plus a raw vector of the same length for deriving a
/// second, related code.
fn arb_shape_with_raw(
    max_k: u32,
    max_n: u32,
) -> impl Strategy<Value = (TreeParams, LehmerCode, Vec<u64>)> {
    (2..=max_k, 0..=max_n).prop_flat_map(|(k, n)| {
        (
            arb_code(n as usize),
            prop::collection::vec(any::<u64>(), n as usize),
        )
            .prop_map(move |(code, raw)| (TreeParams::new(k, n).expect("k >= 2"), code, raw))
    })
}

fn pairwise_inversions(chips: &[chipfire::ChipLabel]) -> u64 {
    let mut count = 0;
    for i in 0..chips.len() {
        for j in i + 1..chips.len() {
            if chips[i] > chips[j] {
                count += 1;
            }
        }
    }
    count
}

proptest! {
    #[test]
    fn simulation_matches_every_closed_form((params, code) in arb_shape(3, 4)) {
        let w = code.permutation();
        let simulated = simulate::run_strategy(&params, &w).unwrap();
        let placed = formulas::stable_config(&params, &w).unwrap();
        prop_assert_eq!(&simulated, &placed);

        let merge = simulated.inversions();
        prop_assert_eq!(merge, pairwise_inversions(simulated.chips()));
        prop_assert_eq!(
            formulas::inversion_count(&params, &code).unwrap(),
            BigUint::from(merge)
        );

        let set: Vec<u128> = simulated.descent_set().into_iter().map(u128::from).collect();
        let formula_set: Vec<u128> =
            formulas::descent_set(&params, &code).unwrap().into_iter().collect();
        prop_assert_eq!(set, formula_set);
        prop_assert_eq!(
            formulas::descent_count(&params, &code).unwrap(),
            BigUint::from(simulated.descent_count())
        );
    }

    #[test]
    fn destination_names_the_final_slot((params, code) in arb_shape(3, 4)) {
        let w = code.permutation();
        let config = formulas::stable_config(&params, &w).unwrap();
        for (idx, chip) in config.chips().iter().enumerate() {
            let walk = formulas::destination(&params, &w, *chip).unwrap();
            prop_assert_eq!(walk.len(), params.n() as usize);
            prop_assert_eq!(walk.layer_position(&params).unwrap(), idx as u64 + 1);
        }
    }

    #[test]
    fn lehmer_code_round_trips(code in (0usize..=8).prop_flat_map(arb_code)) {
        let w = code.permutation();
        prop_assert_eq!(w.lehmer_code(), code);
        // The code totals the inversions of w itself.
        prop_assert_eq!(w.lehmer_code().sum(), w.inversions());
    }

    #[test]
    fn order_transport_through_reverse_complement(
        (params, a, raw) in arb_shape_with_raw(3, 4),
    ) {
        let b = code_from_raw(&raw);
        let (wa, wb) = (a.permutation(), b.permutation());
        let ca = formulas::stable_config(&params, &wa).unwrap();
        let cb = formulas::stable_config(&params, &wb).unwrap();
        let config_order = ca.lex_cmp(&cb).unwrap();
        let transported_order = wa.reverse_complement().cmp(&wb.reverse_complement());
        prop_assert_eq!(config_order, transported_order);
        // Equality only for identical strategies.
        prop_assert_eq!(config_order == Ordering::Equal, wa == wb);
    }

    #[test]
    fn dominated_codes_never_gain_inversions(
        (params, lower, raw) in arb_shape_with_raw(4, 6),
    ) {
        let n = lower.len();
        // Raise each entry of `lower` within its positional bound.
        let upper: Vec<usize> = lower
            .codes()
            .iter()
            .enumerate()
            .map(|(i, &c)| c + (raw[i] as usize) % (n - i - c))
            .collect();
        let upper = LehmerCode::new(upper).unwrap();
        prop_assert!(lower.is_dominated_by(&upper).unwrap());
        let il = formulas::inversion_count(&params, &lower).unwrap();
        let iu = formulas::inversion_count(&params, &upper).unwrap();
        prop_assert!(il <= iu);
    }

    #[test]
    fn inversions_bounded_and_divisible((params, code) in arb_shape(5, 6)) {
        let inv = formulas::inversion_count(&params, &code).unwrap();
        let top = formulas::max_inversions(&params).unwrap();
        prop_assert!(inv <= top);

        // The ceiling is hit exactly at the entrywise-maximal code.
        let n = code.len();
        let maximal: Vec<usize> = (0..n).map(|i| n - 1 - i).collect();
        if code.codes() == maximal {
            prop_assert_eq!(&inv, &top);
        } else {
            prop_assert!(inv < top);
        }

        let four_i = BigUint::from(4u32) * &inv;
        let divisor = formulas::normalization_divisor(&params);
        prop_assert_eq!(&four_i % &divisor, BigUint::from(0u32));
        prop_assert_eq!(
            four_i / divisor,
            formulas::normalized_inversion_count(&params, &code).unwrap()
        );
    }

    #[test]
    fn tail_bounds_hold_for_every_strategy((params, code) in arb_shape(4, 6)) {
        prop_assume!(params.n() > 0);
        let w = code.permutation();
        let d = formulas::descent_count(&params, &code).unwrap();
        let i = formulas::inversion_count(&params, &code).unwrap();

        let start = w.increasing_tail_start() as u32;
        let (dmax, imax) = formulas::increasing_tail_bounds(&params, start).unwrap();
        prop_assert!(d <= dmax);
        prop_assert!(i <= imax);

        let start = w.decreasing_tail_start() as u32;
        let (dmin, imin) = formulas::decreasing_tail_bounds(&params, start).unwrap();
        prop_assert!(d >= dmin);
        prop_assert!(i >= imin);
    }

    #[test]
    fn witness_chips_spell_out_the_pattern((params, code) in arb_shape(3, 4)) {
        let w = code.permutation();
        let witness = formulas::pattern_witness(&params, &w).unwrap();
        let config = formulas::stable_config(&params, &w).unwrap();
        let positions: Vec<usize> = witness
            .iter()
            .map(|chip| {
                config
                    .chips()
                    .iter()
                    .position(|c| c == chip)
                    .expect("witness chips exist")
            })
            .collect();
        prop_assert!(positions.windows(2).all(|p| p[0] < p[1]));

        let ranks: Vec<usize> = witness
            .iter()
            .map(|c| 1 + witness.iter().filter(|o| o.0 < c.0).count())
            .collect();
        prop_assert_eq!(ranks, w.values().to_vec());
    }

    #[test]
    fn digits_round_trip(k in 2u32..=6, n in 0u32..=10, raw in any::<u64>()) {
        let params = TreeParams::new(k, n).unwrap();
        let m = params.chip_count_u64().unwrap();
        let chip = chipfire::ChipLabel(raw % m);
        let digits = params.digits(chip).unwrap();
        prop_assert_eq!(digits.len(), n as usize);
        prop_assert!(digits.iter().all(|&d| d < k));
        prop_assert_eq!(params.chip_from_digits(&digits).unwrap(), chip);
    }

    #[test]
    fn descent_count_is_the_set_size((params, code) in arb_shape(3, 5)) {
        let count = formulas::descent_count(&params, &code).unwrap();
        let set = formulas::descent_set(&params, &code).unwrap();
        prop_assert_eq!(BigUint::from(set.len()), count);
        let k = params.k() as u128;
        prop_assert!(set.iter().all(|p| p % k == 0));
    }
}

#[test]
fn more_descents_forces_later_reversed_support() {
    // Pairwise over every strategy at several small shapes.
    for (k, n) in [(2u32, 5u32), (3, 4), (5, 3)] {
        let params = TreeParams::new(k, n).unwrap();
        let all: Vec<(LehmerCode, BigUint)> = LehmerCode::all(n as usize)
            .map(|c| {
                let d = formulas::descent_count(&params, &c).unwrap();
                (c, d)
            })
            .collect();
        for (ca, da) in &all {
            for (cb, db) in &all {
                if da > db {
                    let ra = ca.support().reversed_indicator(n as usize);
                    let rb = cb.support().reversed_indicator(n as usize);
                    assert!(
                        ra > rb,
                        "k={k} n={n}: {} vs {}: {ra} not later than {rb}",
                        ca.compact(),
                        cb.compact()
                    );
                }
            }
        }
    }
}

#[test]
fn known_support_order_pair() {
    // Strategies 34125 and 14523 have codes 22000 and 02200; their reversed
    // support indicators are 00011 and 00110, ordered like their descent
    // counts.
    let a: Permutation = "34125".parse().unwrap();
    let b: Permutation = "14523".parse().unwrap();
    assert_eq!(a.lehmer_code().codes(), &[2, 2, 0, 0, 0]);
    assert_eq!(b.lehmer_code().codes(), &[0, 2, 2, 0, 0]);
    assert_eq!(a.lehmer_code().support().reversed_indicator(5), "00011");
    assert_eq!(b.lehmer_code().support().reversed_indicator(5), "00110");

    let params = TreeParams::new(2, 5).unwrap();
    let da = formulas::descent_count(&params, &a.lehmer_code()).unwrap();
    let db = formulas::descent_count(&params, &b.lehmer_code()).unwrap();
    assert!(da < db);
}

#[test]
fn every_possible_descent_position_is_attained() {
    for (k, n) in [(2u32, 4u32), (3, 3), (4, 2)] {
        let params = TreeParams::new(k, n).unwrap();
        let possible = formulas::possible_descent_positions(&params).unwrap();
        let mut union = std::collections::BTreeSet::new();
        for code in LehmerCode::all(n as usize) {
            union.extend(formulas::descent_set(&params, &code).unwrap());
        }
        assert_eq!(union, possible, "k={k} n={n}");
    }
}

#[test]
fn final_position_counts_are_exact() {
    for (k, n) in [(2u32, 4u32), (3, 3)] {
        let params = TreeParams::new(k, n).unwrap();
        let m = params.chip_count_u64().unwrap();
        let mut seen = vec![std::collections::BTreeSet::new(); m as usize];
        for code in LehmerCode::all(n as usize) {
            let config = formulas::stable_config(&params, &code.permutation()).unwrap();
            for (idx, chip) in config.chips().iter().enumerate() {
                seen[chip.0 as usize].insert(idx);
            }
        }
        for chip in 0..m {
            let expected =
                formulas::num_final_positions(&params, chipfire::ChipLabel(chip)).unwrap();
            assert_eq!(
                BigUint::from(seen[chip as usize].len()),
                expected,
                "k={k} n={n} chip={chip}"
            );
        }
    }
}

#[test]
fn spectra_embed_and_stay_prefixes() {
    for k in 2..=4u32 {
        for n in 0..=4u32 {
            let report = sequences::check_spectrum_embedding(k, n).unwrap();
            assert!(report.pass(), "k={k} n={n}: {:?}", report.violations);
        }
    }
}

#[test]
fn distinct_strategies_distinct_configurations() {
    for (k, n) in [(2u32, 5u32), (3, 3)] {
        let params = TreeParams::new(k, n).unwrap();
        let mut seen = std::collections::BTreeSet::new();
        let mut count = 0usize;
        for code in LehmerCode::all(n as usize) {
            let config = formulas::stable_config(&params, &code.permutation()).unwrap();
            seen.insert(config.chips().to_vec());
            count += 1;
        }
        assert_eq!(seen.len(), count, "k={k} n={n}");
    }
}
