//! The reproduction harness: every structural claim the library encodes,
//! run as a named check over a grid of shapes, with machine-readable
//! reports.
//!
//! Checks are exhaustive over all `n!` strategies when the step budget
//! allows and fall back to seeded uniform sampling otherwise, so the same
//! invocation is always the same computation. Failures carry the inputs and
//! both sides' values; an empty failure list is a pass.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::ops::RangeInclusive;
use std::time::Instant;

use num_bigint::BigUint;
use num_traits::Zero;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::formulas;
use crate::perm::{LehmerCode, Permutation};
use crate::sequences;
use crate::simulate;
use crate::tree::{ChipLabel, TreeParams};

/// Work limits for one check: `max_steps` decides exhaustive versus sampled
/// (a step is one code times one chip movement), `samples` sizes the
/// fallback.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Budget {
    pub max_steps: u64,
    pub samples: u32,
}

impl Budget {
    pub const LOW: Budget = Budget {
        max_steps: 1_000_000,
        samples: 2_000,
    };
    pub const NORMAL: Budget = Budget {
        max_steps: 100_000_000,
        samples: 10_000,
    };
    pub const HIGH: Budget = Budget {
        max_steps: 10_000_000_000,
        samples: 100_000,
    };
}

impl Default for Budget {
    fn default() -> Self {
        Budget::NORMAL
    }
}

impl std::str::FromStr for Budget {
    type Err = Error;

    /// `low`, `normal`, `high`, or a bare step count.
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "low" => Ok(Budget::LOW),
            "normal" => Ok(Budget::NORMAL),
            "high" => Ok(Budget::HIGH),
            other => {
                let max_steps = other
                    .parse::<u64>()
                    .map_err(|_| Error::Parse(format!("bad budget {other:?}")))?;
                Ok(Budget {
                    max_steps,
                    samples: Budget::NORMAL.samples,
                })
            }
        }
    }
}

/// Grid bounds a report covers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ReportParams {
    pub k_min: u32,
    pub k_max: u32,
    pub n_min: u32,
    pub n_max: u32,
}

/// Outcome of one named check over the whole grid.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CheckReport {
    pub check: String,
    pub params: ReportParams,
    pub cases: u64,
    pub failures: Vec<String>,
    pub seed: u64,
    pub ms: u64,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

pub fn any_failures(reports: &[CheckReport]) -> bool {
    reports.iter().any(|r| !r.passed())
}

const MAX_FAILURES_PER_CHECK: usize = 25;

struct CheckDef {
    name: &'static str,
    summary: &'static str,
    run: fn(&TreeParams, &mut CheckCtx),
}

/// Fixed check order; reports always come back in this order.
static CHECKS: &[CheckDef] = &[
    CheckDef {
        name: "stable-config-oracle",
        summary: "formula placement equals the simulated stable arrangement",
        run: check_stable_config_oracle,
    },
    CheckDef {
        name: "inversion-oracle",
        summary: "closed-form inversion count equals the simulated count",
        run: check_inversion_oracle,
    },
    CheckDef {
        name: "two-formula-consistency",
        summary: "binomial and power-sum inversion forms agree, and normalize exactly",
        run: check_two_formula_consistency,
    },
    CheckDef {
        name: "descent-set-oracle",
        summary: "descent positions from the code equal the simulated ones",
        run: check_descent_set_oracle,
    },
    CheckDef {
        name: "descent-count-oracle",
        summary: "descent count from the support equals the simulated count",
        run: check_descent_count_oracle,
    },
    CheckDef {
        name: "lex-order-transport",
        summary: "configurations sort like the reverse-complemented strategies",
        run: check_lex_order_transport,
    },
    CheckDef {
        name: "config-distinctness",
        summary: "distinct strategies give distinct stable arrangements",
        run: check_config_distinctness,
    },
    CheckDef {
        name: "pattern-containment",
        summary: "the witness chips occur in the arrangement in the order of w",
        run: check_pattern_containment,
    },
    CheckDef {
        name: "final-position-counts",
        summary: "a chip's reachable final positions are counted by its digit multiset",
        run: check_final_position_counts,
    },
    CheckDef {
        name: "domination-monotonicity",
        summary: "entrywise larger codes never lose inversions",
        run: check_domination_monotonicity,
    },
    CheckDef {
        name: "inversion-divisibility",
        summary: "every inversion count is a multiple of k^n (k-1)^2 / 4",
        run: check_inversion_divisibility,
    },
    CheckDef {
        name: "binary-progression",
        summary: "at k=2 the spectrum is the arithmetic progression of step 2^(n-2)",
        run: check_binary_progression,
    },
    CheckDef {
        name: "spectrum-embedding",
        summary: "k times the level-n spectrum embeds below the new level-(n+1) values",
        run: check_spectrum_embedding,
    },
    CheckDef {
        name: "spectrum-prefix",
        summary: "normalized spectra grow only by appending",
        run: check_spectrum_prefix,
    },
    CheckDef {
        name: "descent-spectrum",
        summary: "attainable descent counts are exactly the support subset sums",
        run: check_descent_spectrum,
    },
    CheckDef {
        name: "possible-descents",
        summary: "descents happen exactly at multiples of k up to k^n - k",
        run: check_possible_descents,
    },
    CheckDef {
        name: "rev-support-order",
        summary: "more descents forces a later reversed support indicator",
        run: check_rev_support_order,
    },
    CheckDef {
        name: "tail-bounds",
        summary: "monotone tails bound descents and inversions",
        run: check_tail_bounds,
    },
    CheckDef {
        name: "tail-tightness",
        summary: "the tail bounds are attained by explicit strategies",
        run: check_tail_tightness,
    },
    CheckDef {
        name: "firing-counts",
        summary: "layer-i vertices fire k^(n-i) times and the slow path agrees",
        run: check_firing_counts,
    },
];

pub fn check_names() -> Vec<&'static str> {
    CHECKS.iter().map(|c| c.name).collect()
}

pub fn check_summaries() -> Vec<(&'static str, &'static str)> {
    CHECKS.iter().map(|c| (c.name, c.summary)).collect()
}

/// Runs every registered check over the `(k, n)` grid. Checks run in
/// parallel; the report order and contents depend only on the arguments.
pub fn check_all(
    ks: RangeInclusive<u32>,
    ns: RangeInclusive<u32>,
    budget: &Budget,
    seed: u64,
) -> Vec<CheckReport> {
    (0..CHECKS.len())
        .into_par_iter()
        .map(|i| run_single(i, ks.clone(), ns.clone(), budget, seed))
        .collect()
}

fn run_single(
    index: usize,
    ks: RangeInclusive<u32>,
    ns: RangeInclusive<u32>,
    budget: &Budget,
    seed: u64,
) -> CheckReport {
    let def = &CHECKS[index];
    let started = Instant::now();
    let mut ctx = CheckCtx {
        budget: *budget,
        rng: ChaCha8Rng::seed_from_u64(
            seed ^ (index as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15),
        ),
        cases: 0,
        failures: Vec::new(),
        overflow: 0,
    };
    for k in ks.clone() {
        for n in ns.clone() {
            let Ok(params) = TreeParams::new(k, n) else {
                continue;
            };
            (def.run)(&params, &mut ctx);
        }
    }
    let mut failures = ctx.failures;
    if ctx.overflow > 0 {
        failures.push(format!("... {} further failures suppressed", ctx.overflow));
    }
    CheckReport {
        check: def.name.to_string(),
        params: ReportParams {
            k_min: *ks.start(),
            k_max: *ks.end(),
            n_min: *ns.start(),
            n_max: *ns.end(),
        },
        cases: ctx.cases,
        failures,
        seed,
        ms: started.elapsed().as_millis() as u64,
    }
}

struct CheckCtx {
    budget: Budget,
    rng: ChaCha8Rng,
    cases: u64,
    failures: Vec<String>,
    overflow: u64,
}

impl CheckCtx {
    fn case(&mut self) {
        self.cases += 1;
    }

    fn fail(&mut self, message: String) {
        if self.failures.len() < MAX_FAILURES_PER_CHECK {
            self.failures.push(message);
        } else {
            self.overflow += 1;
        }
    }

    /// Exhaustive when `n! * weight` fits the step budget.
    fn exhaustive(&self, n: u32, weight: u128) -> bool {
        factorial(n)
            .and_then(|f| f.checked_mul(weight.max(1)))
            .map(|steps| steps <= self.budget.max_steps as u128)
            .unwrap_or(false)
    }

    /// All codes of length `n`, or a seeded sample of them.
    fn code_sweep(&mut self, n: u32, weight: u128) -> (Vec<LehmerCode>, bool) {
        if self.exhaustive(n, weight) {
            (LehmerCode::all(n as usize).collect(), true)
        } else {
            let codes = (0..self.budget.samples)
                .map(|_| sample_code(&mut self.rng, n))
                .collect();
            (codes, false)
        }
    }

    /// Sorted, duplicate-free codes; in lexicographic code order, which is
    /// also lexicographic permutation order.
    fn sorted_code_sweep(&mut self, n: u32, weight: u128) -> Vec<LehmerCode> {
        let (codes, exhaustive) = self.code_sweep(n, weight);
        if exhaustive {
            codes
        } else {
            let set: BTreeSet<LehmerCode> = codes.into_iter().collect();
            set.into_iter().collect()
        }
    }
}

fn factorial(n: u32) -> Option<u128> {
    let mut f: u128 = 1;
    for i in 2..=n as u128 {
        f = f.checked_mul(i)?;
    }
    Some(f)
}

fn sample_code(rng: &mut ChaCha8Rng, n: u32) -> LehmerCode {
    let codes = (0..n)
        .map(|i| rng.gen_range(0..=(n - 1 - i) as usize))
        .collect();
    LehmerCode::new(codes).expect("sampled entries are within bounds")
}

/// Chips the cell would materialize, or `None` when it is over the cap and
/// simulation-backed checks should skip it.
fn cell_chips(params: &TreeParams) -> Option<u64> {
    params.materialized_chip_count().ok()
}

fn sim_weight(params: &TreeParams) -> u128 {
    params.chip_count().unwrap_or(u128::MAX)
}

fn label(params: &TreeParams, detail: impl std::fmt::Display) -> String {
    format!("k={} n={} {detail}", params.k(), params.n())
}

// --- checks -----------------------------------------------------------

fn check_stable_config_oracle(params: &TreeParams, ctx: &mut CheckCtx) {
    if cell_chips(params).is_none() {
        return;
    }
    let (codes, _) = ctx.code_sweep(params.n(), sim_weight(params));
    for code in codes {
        let w = code.permutation();
        match (
            simulate::run_strategy(params, &w),
            formulas::stable_config(params, &w),
        ) {
            (Ok(sim), Ok(form)) => {
                if sim != form {
                    ctx.fail(label(
                        params,
                        format_args!("w={}: simulated={sim} formula={form}", w.compact()),
                    ));
                }
            }
            (sim, form) => ctx.fail(label(
                params,
                format_args!("w={}: error sim={sim:?} formula={form:?}", w.compact()),
            )),
        }
        ctx.case();
    }
}

fn check_inversion_oracle(params: &TreeParams, ctx: &mut CheckCtx) {
    if cell_chips(params).is_none() {
        return;
    }
    let (codes, _) = ctx.code_sweep(params.n(), sim_weight(params));
    for code in codes {
        let w = code.permutation();
        let simulated = match simulate::run_strategy(params, &w) {
            Ok(c) => BigUint::from(c.inversions()),
            Err(e) => {
                ctx.fail(label(params, format_args!("w={}: {e}", w.compact())));
                continue;
            }
        };
        match formulas::inversion_count(params, &code) {
            Ok(formula) if formula == simulated => {}
            Ok(formula) => ctx.fail(label(
                params,
                format_args!(
                    "w={}: simulated={simulated} formula={formula}",
                    w.compact()
                ),
            )),
            Err(e) => ctx.fail(label(params, format_args!("w={}: {e}", w.compact()))),
        }
        ctx.case();
    }
}

fn check_two_formula_consistency(params: &TreeParams, ctx: &mut CheckCtx) {
    let (codes, _) = ctx.code_sweep(params.n(), params.n() as u128);
    let divisor = formulas::normalization_divisor(params);
    for code in codes {
        let binomial = formulas::inversion_count_binomial_form(params, &code);
        let powersum = formulas::inversion_count_powersum_form(params, &code);
        match (binomial, powersum) {
            (Ok(a), Ok(b)) => {
                if a != b {
                    ctx.fail(label(
                        params,
                        format_args!("code={}: binomial={a} powersum={b}", code.compact()),
                    ));
                }
                let normalized = formulas::normalized_inversion_count(params, &code)
                    .expect("same length as code");
                if BigUint::from(4u32) * &a != normalized.clone() * &divisor {
                    ctx.fail(label(
                        params,
                        format_args!(
                            "code={}: 4*{a} is not {normalized} times {divisor}",
                            code.compact()
                        ),
                    ));
                }
            }
            (a, b) => ctx.fail(label(
                params,
                format_args!("code={}: error binomial={a:?} powersum={b:?}", code.compact()),
            )),
        }
        ctx.case();
    }
}

fn check_descent_set_oracle(params: &TreeParams, ctx: &mut CheckCtx) {
    if cell_chips(params).is_none() {
        return;
    }
    let (codes, _) = ctx.code_sweep(params.n(), sim_weight(params));
    for code in codes {
        let w = code.permutation();
        let simulated: Vec<u128> = match simulate::run_strategy(params, &w) {
            Ok(c) => c.descent_set().into_iter().map(u128::from).collect(),
            Err(e) => {
                ctx.fail(label(params, format_args!("w={}: {e}", w.compact())));
                continue;
            }
        };
        match formulas::descent_set(params, &code) {
            Ok(formula) => {
                let formula: Vec<u128> = formula.into_iter().collect();
                if formula != simulated {
                    ctx.fail(label(
                        params,
                        format_args!(
                            "w={}: simulated={simulated:?} formula={formula:?}",
                            w.compact()
                        ),
                    ));
                }
            }
            Err(e) => ctx.fail(label(params, format_args!("w={}: {e}", w.compact()))),
        }
        ctx.case();
    }
}

fn check_descent_count_oracle(params: &TreeParams, ctx: &mut CheckCtx) {
    if cell_chips(params).is_none() {
        return;
    }
    let (codes, _) = ctx.code_sweep(params.n(), sim_weight(params));
    for code in codes {
        let w = code.permutation();
        let simulated = match simulate::run_strategy(params, &w) {
            Ok(c) => BigUint::from(c.descent_count()),
            Err(e) => {
                ctx.fail(label(params, format_args!("w={}: {e}", w.compact())));
                continue;
            }
        };
        match formulas::descent_count(params, &code) {
            Ok(formula) if formula == simulated => {}
            Ok(formula) => ctx.fail(label(
                params,
                format_args!(
                    "w={}: simulated={simulated} formula={formula}",
                    w.compact()
                ),
            )),
            Err(e) => ctx.fail(label(params, format_args!("w={}: {e}", w.compact()))),
        }
        ctx.case();
    }
}

fn check_lex_order_transport(params: &TreeParams, ctx: &mut CheckCtx) {
    if cell_chips(params).is_none() {
        return;
    }
    // Enumerate v in lexicographic order; the arrangements routed by the
    // reverse-complement of v must then be strictly increasing.
    let codes = ctx.sorted_code_sweep(params.n(), sim_weight(params));
    let mut previous: Option<(Permutation, crate::tree::Configuration)> = None;
    for code in codes {
        let v = code.permutation();
        let config = match formulas::stable_config(params, &v.reverse_complement()) {
            Ok(c) => c,
            Err(e) => {
                ctx.fail(label(params, format_args!("v={}: {e}", v.compact())));
                continue;
            }
        };
        if let Some((pv, pc)) = &previous {
            if pc.chips() >= config.chips() {
                ctx.fail(label(
                    params,
                    format_args!(
                        "v={} then v={}: arrangements out of order: {pc} then {config}",
                        pv.compact(),
                        v.compact()
                    ),
                ));
            }
            ctx.case();
        }
        previous = Some((v, config));
    }
}

fn check_config_distinctness(params: &TreeParams, ctx: &mut CheckCtx) {
    if cell_chips(params).is_none() {
        return;
    }
    let codes = ctx.sorted_code_sweep(params.n(), sim_weight(params));
    let mut seen: BTreeMap<Vec<ChipLabel>, Permutation> = BTreeMap::new();
    for code in codes {
        let w = code.permutation();
        let config = match formulas::stable_config(params, &w) {
            Ok(c) => c,
            Err(e) => {
                ctx.fail(label(params, format_args!("w={}: {e}", w.compact())));
                continue;
            }
        };
        if let Some(prior) = seen.insert(config.chips().to_vec(), w.clone()) {
            ctx.fail(label(
                params,
                format_args!(
                    "w={} and w={} share the arrangement {config}",
                    prior.compact(),
                    w.compact()
                ),
            ));
        }
        ctx.case();
    }
}

fn check_pattern_containment(params: &TreeParams, ctx: &mut CheckCtx) {
    let Some(m) = cell_chips(params) else {
        return;
    };
    let (codes, _) = ctx.code_sweep(params.n(), sim_weight(params));
    for code in codes {
        let w = code.permutation();
        let witness = match formulas::pattern_witness(params, &w) {
            Ok(chips) => chips,
            Err(e) => {
                ctx.fail(label(params, format_args!("w={}: {e}", w.compact())));
                continue;
            }
        };
        let config = match formulas::stable_config(params, &w) {
            Ok(c) => c,
            Err(e) => {
                ctx.fail(label(params, format_args!("w={}: {e}", w.compact())));
                continue;
            }
        };
        let mut position_of = vec![0u64; m as usize];
        for (idx, chip) in config.chips().iter().enumerate() {
            position_of[chip.0 as usize] = idx as u64 + 1;
        }
        let positions: Vec<u64> = witness.iter().map(|c| position_of[c.0 as usize]).collect();
        if positions.windows(2).any(|p| p[0] >= p[1]) {
            ctx.fail(label(
                params,
                format_args!(
                    "w={}: witness positions not increasing: {positions:?}",
                    w.compact()
                ),
            ));
        }
        // Standardize the witness labels; their pattern must be w itself.
        let ranks: Vec<usize> = witness
            .iter()
            .map(|c| 1 + witness.iter().filter(|o| o.0 < c.0).count())
            .collect();
        if ranks != w.values() {
            ctx.fail(label(
                params,
                format_args!(
                    "w={}: witness {witness:?} standardizes to {ranks:?}",
                    w.compact()
                ),
            ));
        }
        ctx.case();
    }
}

fn check_final_position_counts(params: &TreeParams, ctx: &mut CheckCtx) {
    let Some(m) = cell_chips(params) else {
        return;
    };
    let (codes, exhaustive) = ctx.code_sweep(params.n(), sim_weight(params));
    let mut positions: Vec<BTreeSet<u64>> = vec![BTreeSet::new(); m as usize];
    for code in &codes {
        let w = code.permutation();
        match formulas::stable_config(params, &w) {
            Ok(config) => {
                for (idx, chip) in config.chips().iter().enumerate() {
                    positions[chip.0 as usize].insert(idx as u64 + 1);
                }
            }
            Err(e) => ctx.fail(label(params, format_args!("w={}: {e}", w.compact()))),
        }
    }
    for chip in 0..m {
        let seen = BigUint::from(positions[chip as usize].len());
        let counted = match formulas::num_final_positions(params, ChipLabel(chip)) {
            Ok(c) => c,
            Err(e) => {
                ctx.fail(label(params, format_args!("chip {chip}: {e}")));
                continue;
            }
        };
        let bad = if exhaustive {
            seen != counted
        } else {
            seen > counted
        };
        if bad {
            ctx.fail(label(
                params,
                format_args!(
                    "chip {chip}: saw {seen} final positions, digit count says {counted} \
                     ({})",
                    if exhaustive { "exact" } else { "upper bound" }
                ),
            ));
        }
        ctx.case();
    }
}

fn check_domination_monotonicity(params: &TreeParams, ctx: &mut CheckCtx) {
    let n = params.n();
    let pairwise = factorial(n)
        .and_then(|f| f.checked_mul(f))
        .and_then(|p| p.checked_mul(n.max(1) as u128))
        .map(|steps| steps <= ctx.budget.max_steps as u128)
        .unwrap_or(false);

    if pairwise {
        let all: Vec<(LehmerCode, BigUint)> = LehmerCode::all(n as usize)
            .map(|code| {
                let inv = formulas::inversion_count(params, &code)
                    .expect("codes from the enumerator are valid");
                (code, inv)
            })
            .collect();
        for (a, ia) in &all {
            for (b, ib) in &all {
                if a.is_dominated_by(b).expect("equal lengths") {
                    if ia > ib {
                        ctx.fail(label(
                            params,
                            format_args!(
                                "code {} dominated by {} yet {ia} > {ib}",
                                a.compact(),
                                b.compact()
                            ),
                        ));
                    }
                    ctx.case();
                }
            }
        }
    } else {
        for _ in 0..ctx.budget.samples {
            let lower = sample_code(&mut ctx.rng, n);
            // Raise each entry within its bound to get a dominating code.
            let raised: Vec<usize> = lower
                .codes()
                .iter()
                .enumerate()
                .map(|(i, &c)| ctx.rng.gen_range(c..=(n as usize - 1 - i)))
                .collect();
            let upper = LehmerCode::new(raised).expect("raised entries stay in bounds");
            let ia = formulas::inversion_count(params, &lower).expect("valid code");
            let ib = formulas::inversion_count(params, &upper).expect("valid code");
            if ia > ib {
                ctx.fail(label(
                    params,
                    format_args!(
                        "code {} dominated by {} yet {ia} > {ib}",
                        lower.compact(),
                        upper.compact()
                    ),
                ));
            }
            ctx.case();
        }
    }
}

fn check_inversion_divisibility(params: &TreeParams, ctx: &mut CheckCtx) {
    let (codes, _) = ctx.code_sweep(params.n(), params.n() as u128);
    let divisor = formulas::normalization_divisor(params);
    for code in codes {
        let inv = formulas::inversion_count(params, &code).expect("valid code");
        let scaled = BigUint::from(4u32) * &inv;
        if &scaled % &divisor != BigUint::zero() {
            ctx.fail(label(
                params,
                format_args!(
                    "code={}: 4 * {inv} not divisible by {divisor}",
                    code.compact()
                ),
            ));
        }
        ctx.case();
    }
}

fn check_binary_progression(params: &TreeParams, ctx: &mut CheckCtx) {
    if params.k() != 2 {
        return;
    }
    let n = params.n();
    if n > sequences::DEFAULT_SPECTRUM_EXPONENT_CAP || !ctx.exhaustive(n, n as u128) {
        return;
    }
    let spectrum = match sequences::inversion_spectrum(params) {
        Ok(s) => s,
        Err(e) => {
            ctx.fail(label(params, format_args!("spectrum: {e}")));
            return;
        }
    };
    let expected: Vec<BigUint> = if n < 2 {
        vec![BigUint::zero()]
    } else {
        let step = BigUint::from(2u32).pow(n - 2);
        let top = 2u64.pow(n) - 1 - n as u64;
        (0..=top).map(|m| BigUint::from(m) * &step).collect()
    };
    if spectrum.values() != &expected[..] {
        ctx.fail(label(
            params,
            format_args!(
                "spectrum {:?} differs from progression {:?}",
                spectrum.values(),
                expected
            ),
        ));
    }
    ctx.cases += expected.len() as u64;
}

fn spectrum_pair_feasible(ctx: &CheckCtx, n: u32) -> bool {
    n + 1 <= sequences::DEFAULT_SPECTRUM_EXPONENT_CAP
        && ctx.exhaustive(n + 1, (n + 1) as u128)
}

fn check_spectrum_embedding(params: &TreeParams, ctx: &mut CheckCtx) {
    if !spectrum_pair_feasible(ctx, params.n()) {
        return;
    }
    match sequences::check_spectrum_embedding(params.k(), params.n()) {
        Ok(report) => {
            for v in &report.violations {
                ctx.fail(label(params, v));
            }
            ctx.case();
        }
        Err(e) => ctx.fail(label(params, format_args!("embedding: {e}"))),
    }
}

fn check_spectrum_prefix(params: &TreeParams, ctx: &mut CheckCtx) {
    if !spectrum_pair_feasible(ctx, params.n()) {
        return;
    }
    let next = TreeParams::new(params.k(), params.n() + 1).expect("k unchanged");
    match (
        sequences::normalized_spectrum(params),
        sequences::normalized_spectrum(&next),
    ) {
        (Ok(base), Ok(bigger)) => {
            if !base.is_prefix_of(&bigger) {
                ctx.fail(label(
                    params,
                    format_args!(
                        "normalized spectrum is not a prefix of level {}",
                        params.n() + 1
                    ),
                ));
            }
            ctx.case();
        }
        (a, b) => ctx.fail(label(
            params,
            format_args!("spectra failed: {:?} / {:?}", a.err(), b.err()),
        )),
    }
}

fn check_descent_spectrum(params: &TreeParams, ctx: &mut CheckCtx) {
    let formula = match sequences::descent_spectrum(params) {
        Ok(s) => s,
        Err(Error::ResourceCap { .. }) => return,
        Err(e) => {
            ctx.fail(label(params, format_args!("descent spectrum: {e}")));
            return;
        }
    };
    let n = params.n();
    let expected_len = if n == 0 { 1 } else { 1u64 << (n - 1) };
    if formula.len() as u64 != expected_len {
        ctx.fail(label(
            params,
            format_args!("descent spectrum has {} values, want {expected_len}", formula.len()),
        ));
    }
    ctx.case();

    if params.k() == 3 {
        let doubled: Vec<BigUint> = sequences::stanley_prefix(formula.len())
            .into_iter()
            .map(|v| v * 2u32)
            .collect();
        if formula.values() != &doubled[..] {
            ctx.fail(label(
                params,
                "ternary descent counts are not twice the base-3 digit-{0,1} sequence"
                    .to_string(),
            ));
        }
        ctx.case();
    }

    let (codes, exhaustive) = ctx.code_sweep(n, n as u128);
    let mut attained: BTreeSet<BigUint> = BTreeSet::new();
    for code in &codes {
        attained.insert(formulas::descent_count(params, code).expect("valid code"));
        ctx.case();
    }
    if exhaustive {
        let attained: Vec<BigUint> = attained.into_iter().collect();
        if attained != formula.values() {
            ctx.fail(label(
                params,
                format_args!(
                    "attained descent counts {attained:?} differ from subset sums {:?}",
                    formula.values()
                ),
            ));
        }
    } else {
        for value in &attained {
            if !formula.contains(value) {
                ctx.fail(label(
                    params,
                    format_args!("descent count {value} outside the subset sums"),
                ));
            }
        }
    }
}

fn check_possible_descents(params: &TreeParams, ctx: &mut CheckCtx) {
    if cell_chips(params).is_none() {
        return;
    }
    let possible = match formulas::possible_descent_positions(params) {
        Ok(p) => p,
        Err(Error::ResourceCap { .. }) => return,
        Err(e) => {
            ctx.fail(label(params, format_args!("possible positions: {e}")));
            return;
        }
    };
    let (codes, exhaustive) = ctx.code_sweep(params.n(), sim_weight(params));
    let mut union: BTreeSet<u128> = BTreeSet::new();
    for code in &codes {
        match formulas::descent_set(params, code) {
            Ok(set) => {
                for p in &set {
                    if !possible.contains(p) {
                        ctx.fail(label(
                            params,
                            format_args!(
                                "code={}: descent at {p} outside the k-multiples",
                                code.compact()
                            ),
                        ));
                    }
                }
                union.extend(set);
            }
            Err(e) => ctx.fail(label(params, format_args!("code={}: {e}", code.compact()))),
        }
        ctx.case();
    }
    if exhaustive && union != possible {
        let missing: Vec<&u128> = possible.difference(&union).take(10).collect();
        ctx.fail(label(
            params,
            format_args!("positions never attained: {missing:?}"),
        ));
    }
}

fn check_rev_support_order(params: &TreeParams, ctx: &mut CheckCtx) {
    let n = params.n();
    let pairwise = factorial(n)
        .and_then(|f| f.checked_mul(f))
        .map(|p| p <= ctx.budget.max_steps as u128)
        .unwrap_or(false);

    let verify_pair =
        |params: &TreeParams,
         ctx: &mut CheckCtx,
         a: (&LehmerCode, &BigUint),
         b: (&LehmerCode, &BigUint)| {
            if a.1 > b.1 {
                let ra = a.0.support().reversed_indicator(n as usize);
                let rb = b.0.support().reversed_indicator(n as usize);
                if ra <= rb {
                    ctx.fail(label(
                        params,
                        format_args!(
                            "code {} has more descents than {} but indicator {ra} <= {rb}",
                            a.0.compact(),
                            b.0.compact()
                        ),
                    ));
                }
            }
            ctx.case();
        };

    if pairwise {
        let all: Vec<(LehmerCode, BigUint)> = LehmerCode::all(n as usize)
            .map(|code| {
                let d = formulas::descent_count(params, &code).expect("valid code");
                (code, d)
            })
            .collect();
        for a in &all {
            for b in &all {
                verify_pair(params, ctx, (&a.0, &a.1), (&b.0, &b.1));
            }
        }
    } else {
        for _ in 0..ctx.budget.samples {
            let a = sample_code(&mut ctx.rng, n);
            let b = sample_code(&mut ctx.rng, n);
            let da = formulas::descent_count(params, &a).expect("valid code");
            let db = formulas::descent_count(params, &b).expect("valid code");
            verify_pair(params, ctx, (&a, &da), (&b, &db));
        }
    }
}

fn check_tail_bounds(params: &TreeParams, ctx: &mut CheckCtx) {
    if params.n() == 0 {
        return;
    }
    let (codes, _) = ctx.code_sweep(params.n(), params.n() as u128);
    for code in codes {
        let w = code.permutation();
        let descents = formulas::descent_count(params, &code).expect("valid code");
        let inversions = formulas::inversion_count(params, &code).expect("valid code");

        let i0 = w.increasing_tail_start() as u32;
        let (max_d, max_i) =
            formulas::increasing_tail_bounds(params, i0).expect("tail start in range");
        if descents > max_d || inversions > max_i {
            ctx.fail(label(
                params,
                format_args!(
                    "w={} increasing from {i0}: ({descents}, {inversions}) exceeds \
                     ({max_d}, {max_i})",
                    w.compact()
                ),
            ));
        }
        ctx.case();

        let j0 = w.decreasing_tail_start() as u32;
        let (min_d, min_i) =
            formulas::decreasing_tail_bounds(params, j0).expect("tail start in range");
        if descents < min_d || inversions < min_i {
            ctx.fail(label(
                params,
                format_args!(
                    "w={} decreasing from {j0}: ({descents}, {inversions}) under \
                     ({min_d}, {min_i})",
                    w.compact()
                ),
            ));
        }
        ctx.case();
    }
}

fn check_tail_tightness(params: &TreeParams, ctx: &mut CheckCtx) {
    let n = params.n();
    for i0 in 1..=n {
        let w = formulas::increasing_tail_witness(n, i0).expect("index in range");
        let code = w.lehmer_code();
        let (want_d, want_i) =
            formulas::increasing_tail_bounds(params, i0).expect("index in range");
        let d = formulas::descent_count(params, &code).expect("valid code");
        let i = formulas::inversion_count(params, &code).expect("valid code");
        if d != want_d || i != want_i || w.increasing_tail_start() != i0 as usize {
            ctx.fail(label(
                params,
                format_args!(
                    "increasing witness {} at i0={i0}: got ({d}, {i}), bound ({want_d}, {want_i})",
                    w.compact()
                ),
            ));
        }
        ctx.case();

        let w = formulas::decreasing_tail_witness(n, i0).expect("index in range");
        let code = w.lehmer_code();
        let (want_d, want_i) =
            formulas::decreasing_tail_bounds(params, i0).expect("index in range");
        let d = formulas::descent_count(params, &code).expect("valid code");
        let i = formulas::inversion_count(params, &code).expect("valid code");
        if d != want_d || i != want_i || w.decreasing_tail_start() != i0 as usize {
            ctx.fail(label(
                params,
                format_args!(
                    "decreasing witness {} at i0={i0}: got ({d}, {i}), bound ({want_d}, {want_i})",
                    w.compact()
                ),
            ));
        }
        ctx.case();
    }
}

/// Chip ceiling under which the one-firing-at-a-time path is re-run for
/// comparison inside `firing-counts`.
const CHIPWISE_LIMIT: u64 = 1024;

fn check_firing_counts(params: &TreeParams, ctx: &mut CheckCtx) {
    let Some(m) = cell_chips(params) else {
        return;
    };
    let (codes, _) = ctx.code_sweep(params.n(), sim_weight(params));
    for code in codes {
        let w = code.permutation();
        let (config, snapshots) = match simulate::run_strategy_traced(params, &w) {
            Ok(r) => r,
            Err(e) => {
                ctx.fail(label(params, format_args!("w={}: {e}", w.compact())));
                continue;
            }
        };
        for snap in &snapshots {
            let fired_layer = snap.layer - 1;
            let fires = simulate::fires_per_vertex(params, fired_layer)
                .expect("snapshot layers stay in range");
            let vertex_count = (params.k() as u64).pow(snap.layer - 1);
            if snap.buckets.len() as u64 != vertex_count {
                ctx.fail(label(
                    params,
                    format_args!(
                        "w={}: layer {} has {} buckets, want {vertex_count}",
                        w.compact(),
                        snap.layer,
                        snap.buckets.len()
                    ),
                ));
            }
            for bucket in &snap.buckets {
                // Each parent fired `fires` times, one chip per firing.
                if bucket.len() as u64 != fires {
                    ctx.fail(label(
                        params,
                        format_args!(
                            "w={}: layer {} bucket holds {} chips, want {fires}",
                            w.compact(),
                            snap.layer,
                            bucket.len()
                        ),
                    ));
                }
                if bucket.windows(2).any(|p| p[0] >= p[1]) {
                    ctx.fail(label(
                        params,
                        format_args!("w={}: layer {} bucket unsorted", w.compact(), snap.layer),
                    ));
                }
            }
        }
        if let Some(last) = snapshots.last() {
            let flat: Vec<ChipLabel> = last.buckets.iter().flatten().copied().collect();
            if flat != config.chips() {
                ctx.fail(label(
                    params,
                    format_args!("w={}: last snapshot disagrees with result", w.compact()),
                ));
            }
        }
        if m <= CHIPWISE_LIMIT {
            match simulate::run_strategy_chipwise(params, &w) {
                Ok(slow) if slow == config => {}
                Ok(slow) => ctx.fail(label(
                    params,
                    format_args!("w={}: chipwise={slow} batched={config}", w.compact()),
                )),
                Err(e) => ctx.fail(label(params, format_args!("w={}: {e}", w.compact()))),
            }
            ctx.case();
        }
        ctx.case();
    }
}

// --- table ------------------------------------------------------------

/// Largest exponent the table renderer will enumerate (`8! = 40320` rows).
pub const TABLE_EXPONENT_CAP: u32 = 8;

/// One row of the per-strategy summary table.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TableRow {
    pub w: String,
    pub code: String,
    pub rev_support: String,
    pub config: String,
    pub inversions: String,
    pub descents: String,
    pub descent_set: String,
}

/// All `n!` strategies at this shape, one row each, in lexicographic order.
pub fn table_rows(params: &TreeParams) -> Result<Vec<TableRow>> {
    if params.n() > TABLE_EXPONENT_CAP {
        return Err(Error::ResourceCap {
            resource: "table rows",
            required: factorial(params.n()).unwrap_or(u128::MAX),
            cap: factorial(TABLE_EXPONENT_CAP).expect("small"),
        });
    }
    params.materialized_chip_count()?;
    let n = params.n() as usize;
    let mut rows = Vec::new();
    for code in LehmerCode::all(n) {
        let w = code.permutation();
        let config = formulas::stable_config(params, &w)?;
        let inversions = formulas::inversion_count(params, &code)?;
        let descents = formulas::descent_count(params, &code)?;
        let descent_set = formulas::descent_set(params, &code)?;
        rows.push(TableRow {
            w: w.compact(),
            code: code.compact(),
            rev_support: code.support().reversed_indicator(n),
            config: config.to_string(),
            inversions: inversions.to_string(),
            descents: descents.to_string(),
            descent_set: format_set(&descent_set),
        });
    }
    Ok(rows)
}

fn format_set(set: &BTreeSet<u128>) -> String {
    let mut out = String::from("{");
    for (i, v) in set.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        let _ = write!(out, "{v}");
    }
    out.push('}');
    out
}

const TABLE_HEADERS: [&str; 7] = [
    "w",
    "code",
    "rev_support",
    "config",
    "inversions",
    "descents",
    "descent_set",
];

pub fn render_table_plain(rows: &[TableRow]) -> String {
    let cells = |r: &TableRow| -> [String; 7] {
        [
            r.w.clone(),
            r.code.clone(),
            r.rev_support.clone(),
            r.config.clone(),
            r.inversions.clone(),
            r.descents.clone(),
            r.descent_set.clone(),
        ]
    };
    let mut widths: Vec<usize> = TABLE_HEADERS.iter().map(|h| h.len()).collect();
    for row in rows {
        for (i, cell) in cells(row).iter().enumerate() {
            widths[i] = widths[i].max(cell.len());
        }
    }
    let mut out = String::new();
    let mut line = |cols: &[String]| {
        let mut s = String::new();
        for (i, c) in cols.iter().enumerate() {
            if i > 0 {
                s.push_str("  ");
            }
            let _ = write!(s, "{c:<width$}", width = widths[i]);
        }
        out.push_str(s.trim_end());
        out.push('\n');
    };
    line(&TABLE_HEADERS.map(String::from));
    for row in rows {
        line(&cells(row));
    }
    out
}

pub fn render_table_csv(rows: &[TableRow]) -> String {
    let mut out = String::new();
    out.push_str(&TABLE_HEADERS.join(","));
    out.push('\n');
    for r in rows {
        // Configurations and sets contain commas; quote them.
        let _ = writeln!(
            out,
            "{},{},{},\"{}\",{},{},\"{}\"",
            r.w, r.code, r.rev_support, r.config, r.inversions, r.descents, r.descent_set
        );
    }
    out
}

pub fn table_json(rows: &[TableRow]) -> serde_json::Value {
    serde_json::to_value(rows).expect("rows serialize")
}
