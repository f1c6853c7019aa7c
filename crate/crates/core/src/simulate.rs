//! Explicit simulation of the firing process.
//!
//! `run_strategy` moves whole layers at once: every vertex on the current
//! layer partitions its chips by one base-`k` digit and hands each digit
//! class to the matching child. That is the aggregate effect of firing each
//! vertex until empty, and it is what the closed forms are checked against.
//!
//! `run_strategy_chipwise` takes the slow road through [`fire_vertex`], one
//! firing at a time, so the local rule (remove `k` chips, send the `i`-th
//! smallest to the `i`-th child) is itself under test rather than assumed.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::perm::Permutation;
use crate::tree::{ChipLabel, Configuration, TreeParams};

/// Snapshot of one fully occupied layer, buckets left to right.
///
/// `layer` is the layer the chips sit on, so a run with exponent `n` emits
/// snapshots for layers `2..=n+1`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LayerState {
    pub layer: u32,
    pub buckets: Vec<Vec<ChipLabel>>,
}

/// Number of times each vertex on `layer` fires, `k^(n - layer)`.
pub fn fires_per_vertex(params: &TreeParams, layer: u32) -> Result<u64> {
    if layer < 1 || layer > params.n() {
        return Err(Error::OutOfRange {
            what: "layer",
            value: layer as u128,
            limit: params.n() as u128,
        });
    }
    params_pow(params, params.n() - layer)
}

fn params_pow(params: &TreeParams, e: u32) -> Result<u64> {
    (params.k() as u64)
        .checked_pow(e)
        .ok_or(Error::Overflow("fires per vertex"))
}

/// Runs the routing strategy `w` to completion and returns the stable
/// arrangement on layer `n + 1`.
pub fn run_strategy(params: &TreeParams, w: &Permutation) -> Result<Configuration> {
    let chips = route_layers(params, w, None)?;
    Configuration::new(*params, chips)
}

/// Like [`run_strategy`], also returning a snapshot after each layer settles.
pub fn run_strategy_traced(
    params: &TreeParams,
    w: &Permutation,
) -> Result<(Configuration, Vec<LayerState>)> {
    let mut snapshots = Vec::with_capacity(params.n() as usize);
    let chips = route_layers(params, w, Some(&mut snapshots))?;
    Ok((Configuration::new(*params, chips)?, snapshots))
}

fn route_layers(
    params: &TreeParams,
    w: &Permutation,
    mut snapshots: Option<&mut Vec<LayerState>>,
) -> Result<Vec<ChipLabel>> {
    let m = params.materialized_chip_count()?;
    if w.len() != params.n() as usize {
        return Err(Error::LengthMismatch {
            expected: params.n() as usize,
            got: w.len(),
        });
    }
    let k = params.k() as u64;
    let mut buckets: Vec<Vec<ChipLabel>> = vec![(0..m).map(ChipLabel).collect()];

    for layer in 1..=params.n() {
        let digit_pos = w.at(layer as usize) as u32;
        let weight = params_pow(params, params.n() - digit_pos)?;
        let per_child = fires_per_vertex(params, layer)?;
        let mut next = Vec::with_capacity(buckets.len() * k as usize);

        for bucket in &buckets {
            let mut classes: Vec<Vec<ChipLabel>> =
                vec![Vec::with_capacity(per_child as usize); k as usize];
            for &chip in bucket {
                classes[((chip.0 / weight) % k) as usize].push(chip);
            }
            // Every vertex fires k^(n - layer) times, so every child
            // receives exactly that many chips.
            for class in &classes {
                if class.len() as u64 != per_child {
                    return Err(Error::SelfCheck(format!(
                        "layer {layer}: digit class holds {} chips, expected {per_child}",
                        class.len()
                    )));
                }
            }
            next.extend(classes);
        }
        buckets = next;
        if let Some(snaps) = snapshots.as_deref_mut() {
            snaps.push(LayerState {
                layer: layer + 1,
                buckets: buckets.clone(),
            });
        }
    }
    Ok(buckets.into_iter().flatten().collect())
}

/// Fires a single vertex once: removes `selection` from `bucket` and returns
/// it sorted, the `i`-th entry bound for the `i`-th child.
///
/// `bucket` must be sorted ascending and stays so. The selection must hold
/// exactly `k` distinct chips, all present at the vertex.
pub fn fire_vertex(
    bucket: &mut Vec<ChipLabel>,
    selection: &[ChipLabel],
    params: &TreeParams,
) -> Result<Vec<ChipLabel>> {
    if selection.len() != params.k() as usize {
        return Err(Error::WrongSelectionSize {
            expected: params.k() as usize,
            got: selection.len(),
        });
    }
    let mut chosen = selection.to_vec();
    chosen.sort_unstable();
    if chosen.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::InvalidConfiguration(
            "firing selection repeats a chip".into(),
        ));
    }
    // Locate everything before touching the bucket, so an illegal firing
    // leaves it intact.
    let mut indices = Vec::with_capacity(chosen.len());
    for &chip in &chosen {
        match bucket.binary_search(&chip) {
            Ok(idx) => indices.push(idx),
            Err(_) => return Err(Error::ChipNotPresent(chip.0)),
        }
    }
    for idx in indices.into_iter().rev() {
        bucket.remove(idx);
    }
    Ok(chosen)
}

/// Replays the strategy one firing at a time. Each firing takes the least
/// remaining chip of every digit class, which keeps the classes aligned so
/// the sorted selection lands digit `d` on child `d + 1`.
///
/// Orders of magnitude slower than [`run_strategy`]; kept as an independent
/// route to the same answer.
pub fn run_strategy_chipwise(params: &TreeParams, w: &Permutation) -> Result<Configuration> {
    let m = params.materialized_chip_count()?;
    if w.len() != params.n() as usize {
        return Err(Error::LengthMismatch {
            expected: params.n() as usize,
            got: w.len(),
        });
    }
    let k = params.k() as u64;
    let mut buckets: Vec<Vec<ChipLabel>> = vec![(0..m).map(ChipLabel).collect()];

    for layer in 1..=params.n() {
        let digit_pos = w.at(layer as usize) as u32;
        let weight = params_pow(params, params.n() - digit_pos)?;
        let fires = fires_per_vertex(params, layer)?;
        let mut next = Vec::with_capacity(buckets.len() * k as usize);

        for mut bucket in buckets {
            let mut classes: Vec<Vec<ChipLabel>> = vec![Vec::new(); k as usize];
            for &chip in &bucket {
                classes[((chip.0 / weight) % k) as usize].push(chip);
            }
            let mut children: Vec<Vec<ChipLabel>> =
                vec![Vec::with_capacity(fires as usize); k as usize];
            for f in 0..fires as usize {
                let selection: Vec<ChipLabel> =
                    classes.iter().map(|class| class[f]).collect();
                let dispatched = fire_vertex(&mut bucket, &selection, params)?;
                for (child, &chip) in dispatched.iter().enumerate() {
                    if ((chip.0 / weight) % k) as usize != child {
                        return Err(Error::SelfCheck(format!(
                            "layer {layer}, firing {f}: chip {chip} sent to child {} \
                             against its digit",
                            child + 1
                        )));
                    }
                    children[child].push(chip);
                }
            }
            if !bucket.is_empty() {
                return Err(Error::SelfCheck(format!(
                    "layer {layer}: {} chips left after all firings",
                    bucket.len()
                )));
            }
            next.extend(children);
        }
        buckets = next;
    }
    Configuration::new(*params, buckets.into_iter().flatten().collect())
}
