//! Closed-form evaluation of the collection-time distribution.
//!
//! Three independent algebraic routes compute `Pr{T > k}`, the probability
//! that more than `k` draws are needed to collect `c` distinct non-null
//! coupons:
//!
//! - [`survival_inclusion_exclusion`]: the alternating subset sum
//!   `sum_i (-1)^{c-1-i} C(n-i-1, n-c) sum_{|J|=i} (p0 + P_J)^k`;
//! - [`survival_by_compositions`]: multinomial sums over compositions of `k`
//!   into positive parts, conditioned on the null-draw count when `p0 > 0`;
//! - [`survival_by_decomposition`]: a binomial mixture over the normalized
//!   (null-free) distribution.
//!
//! All three must agree — exactly in rational mode, within `1e-10` in float
//! mode — and the oracle module cross-checks them against an absorbing chain
//! and exhaustive enumeration. Expectations and quantiles are derived from
//! the same machinery.
//!
//! Float mode accumulates the alternating sums with compensated summation and
//! walks the `i`-layers in increasing order; subsets are enumerated in a
//! fixed lexicographic order so results are reproducible bit for bit.

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde_json::json;

use crate::error::{Error, Result};
use crate::probmodel::CouponDistribution;
use crate::scalar::{Accumulator, ArithmeticMode, Scalar};

/// Cap on the number of summed terms in any single closed-form call; beyond
/// it the error suggests the Monte-Carlo oracle. Keeps calls under ~10 s on
/// commodity hardware.
pub const WORKLOAD_GUARD: u128 = 20_000_000;

/// Hard cap on adaptive curve length, guarding near-one tail rates.
const MAX_CURVE_LEN: u64 = 5_000_000;

/// Exact binomial coefficient.
pub fn binomial(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut result = BigInt::one();
    for step in 0..k {
        result *= BigInt::from(n - step);
        result /= BigInt::from(step + 1);
    }
    result
}

fn binomial_u128(n: u64, k: u64) -> u128 {
    // Saturating variant for workload estimates only.
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut result: u128 = 1;
    for step in 0..k {
        result = result.saturating_mul((n - step) as u128) / (step as u128 + 1);
        if result > WORKLOAD_GUARD * WORKLOAD_GUARD {
            return u128::MAX / 4;
        }
    }
    result
}

/// Size-`i` subsets of `{1, ..., n}` in lexicographic order of their sorted
/// member lists.
struct Combinations {
    n: usize,
    indices: Vec<usize>,
    started: bool,
    done: bool,
}

impl Combinations {
    fn new(n: usize, size: usize) -> Self {
        Combinations {
            n,
            indices: (0..size).collect(),
            started: false,
            done: size > n,
        }
    }
}

impl Iterator for Combinations {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        if self.done {
            return None;
        }
        if !self.started {
            self.started = true;
            return Some(self.indices.clone());
        }
        let size = self.indices.len();
        if size == 0 {
            self.done = true;
            return None;
        }
        // Advance the rightmost index that still has room.
        let mut slot = size;
        loop {
            if slot == 0 {
                self.done = true;
                return None;
            }
            slot -= 1;
            if self.indices[slot] < self.n - (size - slot) {
                self.indices[slot] += 1;
                for later in slot + 1..size {
                    self.indices[later] = self.indices[later - 1] + 1;
                }
                return Some(self.indices.clone());
            }
        }
    }
}

/// One inclusion–exclusion summand: a subset `J` of coupon positions
/// (1-based) and its mass `P_J = sum_{j in J} p_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct SubsetTerm<S: Scalar> {
    pub members: Vec<usize>,
    pub mass: S,
}

/// All size-`i` subset terms of `p`, in lexicographic member order.
pub fn subset_terms<S: Scalar>(p: &CouponDistribution<S>, size: usize) -> Vec<SubsetTerm<S>> {
    subset_terms_raw(p.entries(), size)
}

fn subset_terms_raw<S: Scalar>(entries: &[S], size: usize) -> Vec<SubsetTerm<S>> {
    Combinations::new(entries.len(), size)
        .map(|zero_based| {
            let mass = S::sum(zero_based.iter().map(|&idx| entries[idx].clone()));
            SubsetTerm {
                members: zero_based.iter().map(|idx| idx + 1).collect(),
                mass,
            }
        })
        .collect()
}

fn check_c_raw(n: usize, c: usize) -> Result<()> {
    if c == 0 || c > n {
        return Err(Error::InvalidC { c, n });
    }
    Ok(())
}

fn check_c<S: Scalar>(p: &CouponDistribution<S>, c: usize) -> Result<()> {
    check_c_raw(p.n(), c)
}

/// Entries rescaled by `1/(1 - p0)`, without constructing a distribution
/// value. Needed internally because normalizing an `n = 1` vector yields the
/// point mass `(1)`, which lies outside the open-interval domain of
/// [`CouponDistribution`] even though every formula below handles it.
fn normalized_entries<S: Scalar>(p: &CouponDistribution<S>) -> Result<Vec<S>> {
    let keep = p.entry_mass();
    if keep.to_f64() <= crate::scalar::TOLERANCE {
        return Err(Error::DegenerateNullMass);
    }
    Ok(p.entries()
        .iter()
        .map(|e| e.clone() / keep.clone())
        .collect())
}

fn subset_workload(n: usize, c: usize) -> u128 {
    (0..c).fold(0u128, |acc, i| {
        acc.saturating_add(binomial_u128(n as u64, i as u64))
    })
}

/// Signed geometric term of the inclusion–exclusion sum: the survival equals
/// `sum over terms of coeff * base^k`.
struct SignedTerm<S> {
    coeff: S,
    base: S,
}

fn inclusion_exclusion_terms_raw<S: Scalar>(
    entries: &[S],
    null_mass: &S,
    c: usize,
) -> Result<Vec<SignedTerm<S>>> {
    let n = entries.len();
    check_c_raw(n, c)?;
    let workload = subset_workload(n, c);
    if workload > WORKLOAD_GUARD {
        return Err(Error::WorkloadExceeded {
            terms: workload,
            guard: WORKLOAD_GUARD,
        });
    }
    let mut terms = Vec::with_capacity(workload as usize);
    for i in 0..c {
        // Binomial coefficients are computed exactly and converted late; the
        // powers of (p0 + P_J) carry all the rounding.
        let mut coeff = binomial((n - i - 1) as u64, (n - c) as u64);
        if (c - 1 - i) % 2 == 1 {
            coeff = -coeff;
        }
        let coeff = S::from_bigint(&coeff);
        for subset in subset_terms_raw(entries, i) {
            terms.push(SignedTerm {
                coeff: coeff.clone(),
                base: null_mass.clone() + subset.mass,
            });
        }
    }
    Ok(terms)
}

fn inclusion_exclusion_terms<S: Scalar>(
    p: &CouponDistribution<S>,
    c: usize,
) -> Result<Vec<SignedTerm<S>>> {
    inclusion_exclusion_terms_raw(p.entries(), p.null_mass(), c)
}

fn survival_ie_raw<S: Scalar>(entries: &[S], null_mass: &S, c: usize, k: u64) -> Result<S> {
    let terms = inclusion_exclusion_terms_raw(entries, null_mass, c)?;
    let mut acc = S::Accum::default();
    for term in &terms {
        acc.push(term.coeff.clone() * term.base.powi(k));
    }
    Ok(acc.total().clamp01())
}

/// `Pr{T > k}` by the alternating subset sum.
pub fn survival_inclusion_exclusion<S: Scalar>(
    p: &CouponDistribution<S>,
    c: usize,
    k: u64,
) -> Result<S> {
    survival_ie_raw(p.entries(), p.null_mass(), c, k)
}

/// The worst per-step no-progress probability `r = p0 + sum of the c-1
/// largest entries`: from any state with fewer than `c` collected coupons the
/// chance of drawing nothing new is at most `r`.
pub fn no_progress_rate<S: Scalar>(p: &CouponDistribution<S>, c: usize) -> Result<S> {
    check_c(p, c)?;
    let mut sorted = p.entries().to_vec();
    sorted.sort_by(|a, b| b.partial_cmp(a).expect("entries are ordered"));
    let mut rate = p.null_mass().clone();
    for entry in sorted.into_iter().take(c - 1) {
        rate = rate + entry;
    }
    Ok(rate)
}

/// A truncated survival sequence `Pr{T > k}` for `k = 0..=truncation_k`,
/// with a geometric tail certificate for everything beyond.
///
/// `tail_bound_at_k` is the remaining series sum `sum_{k > K} Pr{T > k}`,
/// evaluated term by term from the same geometric components as the values
/// themselves; since survival is non-increasing and non-negative it also
/// bounds every individual value beyond the truncation.
#[derive(Debug, Clone, PartialEq)]
pub struct SurvivalCurve<S: Scalar> {
    values: Vec<S>,
    tail_rate: S,
    tail_bound: S,
}

impl<S: Scalar> SurvivalCurve<S> {
    /// `Pr{T > k}`, if `k` is within the truncation.
    pub fn value(&self, k: u64) -> Option<&S> {
        self.values.get(k as usize)
    }

    pub fn values(&self) -> &[S] {
        &self.values
    }

    pub fn truncation_k(&self) -> u64 {
        (self.values.len() - 1) as u64
    }

    /// Geometric decay rate `r` of the dominant term.
    pub fn tail_rate(&self) -> &S {
        &self.tail_rate
    }

    /// Upper bound on `sum_{k > truncation_k} Pr{T > k}` (and hence on any
    /// single value beyond the truncation).
    pub fn tail_bound_at_k(&self) -> &S {
        &self.tail_bound
    }

    /// CSV with columns `k,survival,cumulative`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("k,survival,cumulative\n");
        for (k, v) in self.values.iter().enumerate() {
            let cumulative = S::one() - v.clone();
            out.push_str(&format!("{k},{v},{cumulative}\n"));
        }
        out
    }

    /// JSON record with the tail certificate and the arithmetic mode.
    pub fn to_json(&self) -> serde_json::Value {
        let render = |s: &S| -> serde_json::Value {
            match S::MODE {
                ArithmeticMode::Float64 => json!(s.to_f64()),
                ArithmeticMode::Rational => json!(s.to_string()),
            }
        };
        json!({
            "mode": S::MODE.to_string(),
            "truncation_k": self.truncation_k(),
            "tail_rate": render(&self.tail_rate),
            "tail_bound_at_k": render(&self.tail_bound),
            "values": self.values.iter().map(render).collect::<Vec<_>>(),
        })
    }
}

struct CurveBuilder<S: Scalar> {
    terms: Vec<SignedTerm<S>>,
    // Per-term factor coeff / (1 - base): multiplied by base^{k+1} it is that
    // term's contribution to the exact remaining series sum beyond k.
    tail_factors: Vec<S>,
    powers: Vec<S>,
    tail_rate: S,
}

impl<S: Scalar> CurveBuilder<S> {
    fn new(p: &CouponDistribution<S>, c: usize) -> Result<Self> {
        let tail_rate = no_progress_rate(p, c)?;
        if tail_rate.to_f64() >= 1.0 - 1e-12 {
            return Err(Error::TailRateOne { c });
        }
        let terms = inclusion_exclusion_terms(p, c)?;
        let tail_factors = terms
            .iter()
            .map(|t| t.coeff.clone() / (S::one() - t.base.clone()))
            .collect();
        let powers = vec![S::one(); terms.len()];
        Ok(CurveBuilder {
            terms,
            tail_factors,
            powers,
            tail_rate,
        })
    }

    /// Value at the current `k`, then advances the powers to `k + 1`.
    fn next_value(&mut self) -> S {
        let mut acc = S::Accum::default();
        for (term, power) in self.terms.iter().zip(&self.powers) {
            acc.push(term.coeff.clone() * power.clone());
        }
        for (power, term) in self.powers.iter_mut().zip(&self.terms) {
            *power = power.clone() * term.base.clone();
        }
        acc.total().clamp01()
    }

    /// Remaining series sum beyond the current `k` (powers already advanced
    /// to `base^{k+1}` by [`Self::next_value`]).
    fn residual(&self) -> S {
        let mut acc = S::Accum::default();
        for (factor, power) in self.tail_factors.iter().zip(&self.powers) {
            acc.push(factor.clone() * power.clone());
        }
        acc.total().clamp01()
    }
}

fn check_unit_interval(name: &str, value: f64) -> Result<()> {
    if !(value > 0.0 && value < 1.0) {
        return Err(Error::ConfigInvalid(format!(
            "{name} must lie strictly inside (0, 1), got {value}"
        )));
    }
    Ok(())
}

/// Survival curve truncated at the smallest `K` whose remaining series sum is
/// below `delta`.
pub fn survival_curve<S: Scalar>(
    p: &CouponDistribution<S>,
    c: usize,
    delta: f64,
) -> Result<SurvivalCurve<S>> {
    check_unit_interval("delta", delta)?;
    let mut builder = CurveBuilder::new(p, c)?;
    let mut values = Vec::new();
    loop {
        values.push(builder.next_value());
        let residual = builder.residual();
        if residual.to_f64() < delta {
            return Ok(SurvivalCurve {
                values,
                tail_rate: builder.tail_rate,
                tail_bound: residual,
            });
        }
        if values.len() as u64 >= MAX_CURVE_LEN {
            return Err(Error::WorkloadExceeded {
                terms: MAX_CURVE_LEN as u128,
                guard: MAX_CURVE_LEN as u128,
            });
        }
    }
}

/// Survival curve with a fixed truncation `k = 0..=k_max`; the tail
/// certificate is recorded at `k_max`.
pub fn survival_curve_to_k<S: Scalar>(
    p: &CouponDistribution<S>,
    c: usize,
    k_max: u64,
) -> Result<SurvivalCurve<S>> {
    let mut builder = CurveBuilder::new(p, c)?;
    let values = (0..=k_max).map(|_| builder.next_value()).collect();
    let tail_bound = builder.residual();
    Ok(SurvivalCurve {
        values,
        tail_rate: builder.tail_rate,
        tail_bound,
    })
}

/// Compositions of `k` into a fixed number of strictly positive parts,
/// generated in lexicographic cut-point order.
pub struct CompositionIterator {
    total: u64,
    cuts: Vec<u64>,
    started: bool,
    done: bool,
}

impl CompositionIterator {
    /// Compositions of `total` into `parts` positive parts. Empty iteration
    /// when impossible; the single empty composition when `parts == 0` and
    /// `total == 0`.
    pub fn new(total: u64, parts: usize) -> Self {
        let impossible = (parts as u64) > total && !(parts == 0 && total == 0);
        CompositionIterator {
            total,
            cuts: (1..parts as u64).collect(),
            started: false,
            done: impossible,
        }
    }

    fn emit(&self) -> Vec<u64> {
        if self.cuts.is_empty() {
            if self.total == 0 {
                return Vec::new();
            }
            return vec![self.total];
        }
        let mut parts = Vec::with_capacity(self.cuts.len() + 1);
        let mut prev = 0;
        for &cut in &self.cuts {
            parts.push(cut - prev);
            prev = cut;
        }
        parts.push(self.total - prev);
        parts
    }
}

impl Iterator for CompositionIterator {
    type Item = Vec<u64>;

    fn next(&mut self) -> Option<Vec<u64>> {
        if self.done {
            return None;
        }
        if !self.started {
            self.started = true;
            return Some(self.emit());
        }
        let m = self.cuts.len();
        if m == 0 {
            self.done = true;
            return None;
        }
        let mut slot = m;
        loop {
            if slot == 0 {
                self.done = true;
                return None;
            }
            slot -= 1;
            if self.cuts[slot] < self.total - (m - slot) as u64 {
                self.cuts[slot] += 1;
                for later in slot + 1..m {
                    self.cuts[later] = self.cuts[later - 1] + 1;
                }
                return Some(self.emit());
            }
        }
    }
}

/// `k! / (k_1! ... k_m!)` for a composition of `k`.
fn multinomial(parts: &[u64]) -> BigInt {
    let mut remaining: u64 = parts.iter().sum();
    let mut result = BigInt::one();
    for &part in parts {
        result *= binomial(remaining, part);
        remaining -= part;
    }
    result
}

fn composition_workload(n: usize, c: usize, k: u64) -> u128 {
    (1..c).fold(0u128, |acc, i| {
        acc.saturating_add(
            binomial_u128(n as u64, i as u64)
                .saturating_mul(binomial_u128(k.saturating_sub(1), (i - 1) as u64)),
        )
    })
}

/// Direct composition sum over null-free entries.
fn survival_compositions_nullfree<S: Scalar>(entries: &[S], c: usize, k: u64) -> S {
    if k == 0 {
        return S::one();
    }
    let mut acc = S::Accum::default();
    for i in 1..c {
        for subset in subset_terms_raw(entries, i) {
            for parts in CompositionIterator::new(k, i) {
                let mut product = S::from_bigint(&multinomial(&parts));
                for (member, &count) in subset.members.iter().zip(&parts) {
                    product = product * entries[member - 1].powi(count);
                }
                acc.push(product);
            }
        }
    }
    acc.total().clamp01()
}

/// `Pr{T > k}` by composition sums: the multinomial route when `p0 = 0`, and
/// the same route conditioned on the number of null draws, mixed binomially,
/// when `p0 > 0`.
pub fn survival_by_compositions<S: Scalar>(
    p: &CouponDistribution<S>,
    c: usize,
    k: u64,
) -> Result<S> {
    check_c(p, c)?;
    if p.null_mass().is_zero() {
        let workload = composition_workload(p.n(), c, k);
        if workload > WORKLOAD_GUARD {
            return Err(Error::WorkloadExceeded {
                terms: workload,
                guard: WORKLOAD_GUARD,
            });
        }
        return Ok(survival_compositions_nullfree(p.entries(), c, k));
    }
    let workload = (0..=k).fold(0u128, |acc, k0| {
        acc.saturating_add(composition_workload(p.n(), c, k - k0))
    });
    if workload > WORKLOAD_GUARD {
        return Err(Error::WorkloadExceeded {
            terms: workload,
            guard: WORKLOAD_GUARD,
        });
    }
    let normalized = normalized_entries(p)?;
    let p0 = p.null_mass().clone();
    let keep = S::one() - p0.clone();
    let mut acc = S::Accum::default();
    for null_draws in 0..=k {
        let weight = S::from_bigint(&binomial(k, null_draws))
            * p0.powi(null_draws)
            * keep.powi(k - null_draws);
        acc.push(weight * survival_compositions_nullfree(&normalized, c, k - null_draws));
    }
    Ok(acc.total().clamp01())
}

/// `Pr{T > k}` by conditioning on the null-draw count: a binomial mixture of
/// the normalized distribution's survival at shifted arguments.
pub fn survival_by_decomposition<S: Scalar>(
    p: &CouponDistribution<S>,
    c: usize,
    k: u64,
) -> Result<S> {
    check_c(p, c)?;
    let normalized = normalized_entries(p)?;
    let zero = S::zero();
    let p0 = p.null_mass().clone();
    let keep = S::one() - p0.clone();
    let mut acc = S::Accum::default();
    for null_draws in 0..=k {
        let weight = S::from_bigint(&binomial(k, null_draws))
            * p0.powi(null_draws)
            * keep.powi(k - null_draws);
        acc.push(weight * survival_ie_raw(&normalized, &zero, c, k - null_draws)?);
    }
    Ok(acc.total().clamp01())
}

/// Expected number of draws, by summing each geometric term of the
/// inclusion–exclusion sum in closed form: `E[T] = sum coeff / (1 - base)`.
pub fn expectation<S: Scalar>(p: &CouponDistribution<S>, c: usize) -> Result<S> {
    let rate = no_progress_rate(p, c)?;
    if rate.to_f64() >= 1.0 - 1e-12 {
        return Err(Error::TailRateOne { c });
    }
    let terms = inclusion_exclusion_terms(p, c)?;
    let mut acc = S::Accum::default();
    for term in &terms {
        acc.push(term.coeff.clone() / (S::one() - term.base.clone()));
    }
    Ok(acc.total())
}

/// Smallest `k` with `Pr{T > k} <= delta`.
pub fn quantile<S: Scalar>(p: &CouponDistribution<S>, c: usize, delta: f64) -> Result<u64> {
    check_unit_interval("delta", delta)?;
    let mut builder = CurveBuilder::new(p, c)?;
    let threshold =
        S::from_rational(&num_rational::BigRational::from_float(delta).expect("delta is finite"));
    let mut k = 0u64;
    loop {
        let value = builder.next_value();
        if value <= threshold {
            return Ok(k);
        }
        k += 1;
        if k >= MAX_CURVE_LEN {
            return Err(Error::WorkloadExceeded {
                terms: MAX_CURVE_LEN as u128,
                guard: MAX_CURVE_LEN as u128,
            });
        }
    }
}
