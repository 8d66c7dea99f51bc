//! Collection-time distributions for coupon drawing with unequal
//! probabilities and a null coupon.
//!
//! The crate answers one family of questions: if symbols are drawn with
//! replacement from `(p_0, p_1, ..., p_n)` — where symbol `0` never counts —
//! how long until `c` distinct counting symbols have been seen? It provides:
//!
//! - exact evaluators for the survival function `Pr{T > k}` along three
//!   independent algebraic routes ([`exact`]);
//! - ground-truth oracles: an absorbing-chain iterator, exhaustive sequence
//!   enumeration, and a seeded Monte-Carlo sampler ([`oracle`]);
//! - the two-entry mixing transforms that drive any distribution down to the
//!   almost uniform vector or up to the extremal floor-family member, with
//!   full step traces ([`probmodel`]);
//! - stochastic-order verdicts between survival curves and randomized
//!   verification suites for the minimizing/maximizing claims ([`ordering`]);
//! - a slot-synchronous simulator of distributed iceberg monitoring with
//!   worst-case flush-timer dimensioning ([`icebergsim`]);
//! - a thin command-line front end ([`cli`], `cct` binary).
//!
//! Every kernel is generic over [`scalar::Scalar`]: big-rational arithmetic
//! for exact results (fraction literals select it automatically on the CLI)
//! and `f64` with compensated summation elsewhere.

pub mod cli;
pub mod error;
pub mod exact;
pub mod icebergsim;
pub mod oracle;
pub mod ordering;
pub mod probmodel;
pub mod rng;
pub mod scalar;

pub use error::{Error, Result};
