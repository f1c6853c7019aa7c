//! Labeled chip-firing on infinite directed `k`-ary trees.
//!
//! Start with `k^n` chips, labeled `0` through `k^n - 1`, on the root of an
//! infinite tree in which every vertex has `k` ordered children. A vertex
//! holding at least `k` chips may fire: it picks `k` of them and sends the
//! `i`-th smallest to its `i`-th child. A permutation `w` of `1..=n` drives
//! the whole process deterministically: while clearing layer `i`, chips are
//! routed by their `w(i)`-th most significant base-`k` digit. The game
//! stabilizes with one chip on each vertex of layer `n + 1`, read off as a
//! rearrangement of `0..k^n`.
//!
//! The crate computes these stable arrangements two independent ways, by
//! explicit simulation ([`simulate`]) and by closed-form placement
//! ([`formulas`]), along with the statistics that make the arrangements
//! interesting: inversion counts, descent sets, attainable-value spectra
//! ([`sequences`]), and bounds tied to monotone tails of `w`. The
//! [`verify`] module replays every one of those structural claims as a
//! named, budgeted check suite.
//!
//! ```
//! use chipfire::{formulas, simulate, Permutation, TreeParams};
//!
//! let params = TreeParams::new(2, 3)?;
//! let w: Permutation = "132".parse()?;
//! let fired = simulate::run_strategy(&params, &w)?;
//! let placed = formulas::stable_config(&params, &w)?;
//! assert_eq!(fired, placed);
//! assert_eq!(placed.to_string(), "(0,2,1,3,4,6,5,7)");
//! # Ok::<(), chipfire::Error>(())
//! ```

pub mod error;
pub mod formulas;
pub mod perm;
pub mod sequences;
pub mod simulate;
pub mod tree;
pub mod verify;

pub use error::{Error, Result};
pub use perm::{LehmerCode, Permutation, SupportSet};
pub use tree::{ChipLabel, Configuration, TraversalString, TreeParams, DEFAULT_SIM_CAP};
