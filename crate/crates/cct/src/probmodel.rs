//! Probability vectors with a null coupon, the theta-floor family and its
//! extremal members, majorization, and the constructive two-entry mixing
//! transforms.
//!
//! A drawing distribution is a vector `p = (p_1, ..., p_n)` of strictly
//! positive entries summing to at most one; the complement `p0 = 1 - sum(p)`
//! is the probability of the null coupon, which never joins a collection.
//! Positions are 1-based throughout this module, matching the CLI surface.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::scalar::{at_least, strictly_below, Scalar, TOLERANCE};

/// A validated drawing distribution over coupons `1..=n` plus the null coupon.
#[derive(Debug, Clone, PartialEq)]
pub struct CouponDistribution<S: Scalar> {
    entries: Vec<S>,
    null_mass: S,
}

impl<S: Scalar> CouponDistribution<S> {
    /// Validates entries and derives the null mass `p0 = 1 - sum(entries)`.
    ///
    /// Every entry must lie strictly inside `(0, 1)` and the sum must not
    /// exceed one (float mode allows a [`TOLERANCE`] excursion, which is
    /// clamped away).
    pub fn validate(entries: Vec<S>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::EmptyVector);
        }
        let one = S::one();
        for (idx, e) in entries.iter().enumerate() {
            if *e <= S::zero() {
                return Err(Error::NonPositiveEntry { index: idx + 1 });
            }
            if *e >= one {
                return Err(Error::EntryAtLeastOne { index: idx + 1 });
            }
        }
        let sum = S::sum(entries.iter().cloned());
        let exceeds = if S::is_exact() {
            sum > one
        } else {
            sum.to_f64() > 1.0 + TOLERANCE
        };
        if exceeds {
            return Err(Error::MassExceedsOne { sum: sum.to_f64() });
        }
        let null_mass = (one - sum).clamp01();
        Ok(CouponDistribution { entries, null_mass })
    }

    /// Parses a comma-separated literal such as `"1/16,1/6,1/4,1/8,19/48"` or
    /// `"0.5,0.3"` into the scalar type of the caller.
    pub fn parse(text: &str) -> Result<Self> {
        let parsed = parse_distribution_literal(text)?;
        Self::validate(parsed.values.iter().map(S::from_rational).collect())
    }

    pub fn n(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[S] {
        &self.entries
    }

    /// Entry at a 1-based position.
    pub fn entry(&self, position: usize) -> Result<&S> {
        self.check_position(position)?;
        Ok(&self.entries[position - 1])
    }

    pub fn null_mass(&self) -> &S {
        &self.null_mass
    }

    /// `1 - p0`, the mass carried by collectible coupons.
    pub fn entry_mass(&self) -> S {
        S::one() - self.null_mass.clone()
    }

    /// Rescales by `1/(1 - p0)` so the result has zero null mass.
    pub fn normalize(&self) -> Result<Self> {
        let denom = self.entry_mass();
        if denom.to_f64() <= TOLERANCE {
            return Err(Error::DegenerateNullMass);
        }
        let entries = self
            .entries
            .iter()
            .map(|e| e.clone() / denom.clone())
            .collect();
        CouponDistribution::validate(entries)
    }

    fn check_position(&self, position: usize) -> Result<()> {
        if position == 0 || position > self.n() {
            return Err(Error::IndexOutOfRange {
                position,
                n: self.n(),
            });
        }
        Ok(())
    }

    fn with_two_replaced(&self, i: usize, j: usize, vi: S, vj: S) -> Self {
        let mut entries = self.entries.clone();
        entries[i - 1] = vi;
        entries[j - 1] = vj;
        CouponDistribution {
            entries,
            null_mass: self.null_mass.clone(),
        }
    }
}

/// The almost uniform distribution: `n` entries all equal to `(1 - p0)/n`.
pub fn almost_uniform<S: Scalar>(n: usize, null_mass: &S) -> Result<CouponDistribution<S>> {
    if n == 0 {
        return Err(Error::EmptyVector);
    }
    let share = (S::one() - null_mass.clone()) / S::from_u64(n as u64);
    CouponDistribution::validate(vec![share; n])
}

/// True iff the sorted partial sums of `a` dominate those of `b`.
///
/// This is the majorization order on equal-mass vectors; the uniform vector is
/// its minimum. Float mode compares within [`TOLERANCE`].
pub fn majorizes<S: Scalar>(a: &CouponDistribution<S>, b: &CouponDistribution<S>) -> Result<bool> {
    if a.n() != b.n() {
        return Err(Error::LengthMismatch {
            left: a.n(),
            right: b.n(),
        });
    }
    let mass_a = S::sum(a.entries.iter().cloned());
    let mass_b = S::sum(b.entries.iter().cloned());
    if !mass_a.close_to(&mass_b) {
        return Err(Error::MassMismatch {
            left: mass_a.to_f64(),
            right: mass_b.to_f64(),
        });
    }
    let mut sa = a.entries.to_vec();
    let mut sb = b.entries.to_vec();
    sa.sort_by(|x, y| y.partial_cmp(x).expect("entries are ordered"));
    sb.sort_by(|x, y| y.partial_cmp(x).expect("entries are ordered"));
    let mut prefix_a = S::zero();
    let mut prefix_b = S::zero();
    for (x, y) in sa.into_iter().zip(sb) {
        prefix_a = prefix_a + x;
        prefix_b = prefix_b + y;
        if !at_least(&prefix_a, &prefix_b) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// One recorded mixing step: positions touched, the mixing weight, and the
/// resulting distribution.
///
/// For uniformizing traces, `result` equals
/// `lambda_transform(predecessor, i, j, lambda)`. For maximizing traces the
/// orientation is reversed: `predecessor = lambda_transform(result, i, j,
/// lambda)`, which is the certificate that each step moves the collection
/// time up in the stochastic order.
#[derive(Debug, Clone, PartialEq)]
pub struct TransformStep<S: Scalar> {
    pub i: usize,
    pub j: usize,
    pub lambda: S,
    pub result: CouponDistribution<S>,
}

/// A chained sequence of mixing steps starting from `start`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransformTrace<S: Scalar> {
    pub start: CouponDistribution<S>,
    pub steps: Vec<TransformStep<S>>,
}

impl<S: Scalar> TransformTrace<S> {
    pub fn final_distribution(&self) -> &CouponDistribution<S> {
        self.steps.last().map_or(&self.start, |s| &s.result)
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }
}

/// Replaces entries `i` and `j` (1-based) by their convex mixtures
/// `p'_i = lambda p_i + (1-lambda) p_j` and
/// `p'_j = (1-lambda) p_i + lambda p_j`, leaving all other entries unchanged.
///
/// The result is majorized by the input, so its collection time is
/// stochastically smaller.
pub fn lambda_transform<S: Scalar>(
    p: &CouponDistribution<S>,
    i: usize,
    j: usize,
    lambda: &S,
) -> Result<CouponDistribution<S>> {
    p.check_position(i)?;
    p.check_position(j)?;
    if i == j {
        return Err(Error::IndexOutOfRange {
            position: j,
            n: p.n(),
        });
    }
    if *lambda < S::zero() || *lambda > S::one() {
        return Err(Error::LambdaOutOfRange {
            lambda: lambda.to_f64(),
        });
    }
    let pi = p.entries[i - 1].clone();
    let pj = p.entries[j - 1].clone();
    let co = S::one() - lambda.clone();
    let vi = lambda.clone() * pi.clone() + co.clone() * pj.clone();
    let vj = co * pi + lambda.clone() * pj;
    Ok(p.with_two_replaced(i, j, vi, vj))
}

/// Drives `p` to the almost uniform vector by repeatedly pinning one entry to
/// the per-entry mean `(1 - p0)/n`.
///
/// Each step picks the lowest-index entry below the mean as `i` and the
/// lowest-index entry above it as `j`; the recorded weight is
/// `lambda = (p_j - mean)/(p_j - p_i)`. At most `n - 1` steps are needed, and
/// an already-uniform input yields an empty trace. The endpoint does not
/// depend on the selection rule; see [`uniformize_trace_with_pairs`] to
/// reproduce a specific step order.
pub fn uniformize_trace<S: Scalar>(p: &CouponDistribution<S>) -> TransformTrace<S> {
    let mean = p.entry_mass() / S::from_u64(p.n() as u64);
    let mut steps = Vec::new();
    let mut current = p.clone();
    loop {
        let i = current
            .entries
            .iter()
            .position(|e| strictly_below(e, &mean));
        let j = current
            .entries
            .iter()
            .position(|e| strictly_below(&mean, e));
        let (Some(i), Some(j)) = (i, j) else { break };
        let step = pin_to_mean(&current, i + 1, j + 1, &mean);
        current = step.result.clone();
        steps.push(step);
        debug_assert!(steps.len() < p.n());
    }
    TransformTrace {
        start: p.clone(),
        steps,
    }
}

/// Same construction as [`uniformize_trace`], but the `(i, j)` pair of every
/// step is supplied by the caller. Each pair must straddle the mean at the
/// time it is applied; fewer pairs than needed leaves the trace short of
/// uniform, surplus pairs are rejected.
pub fn uniformize_trace_with_pairs<S: Scalar>(
    p: &CouponDistribution<S>,
    pairs: &[(usize, usize)],
) -> Result<TransformTrace<S>> {
    let mean = p.entry_mass() / S::from_u64(p.n() as u64);
    let mut steps = Vec::new();
    let mut current = p.clone();
    for &(i, j) in pairs {
        current.check_position(i)?;
        current.check_position(j)?;
        let pi = &current.entries[i - 1];
        let pj = &current.entries[j - 1];
        if !(strictly_below(pi, &mean) && strictly_below(&mean, pj)) {
            return Err(Error::PairNotCrossing { i, j });
        }
        let step = pin_to_mean(&current, i, j, &mean);
        current = step.result.clone();
        steps.push(step);
    }
    Ok(TransformTrace {
        start: p.clone(),
        steps,
    })
}

/// Pins entry `i` to `target`, moving the excess onto entry `j`, and records
/// the mixing weight that realizes the step. Requires `p_i < target < p_j`.
fn pin_to_mean<S: Scalar>(
    p: &CouponDistribution<S>,
    i: usize,
    j: usize,
    target: &S,
) -> TransformStep<S> {
    let pi = p.entries[i - 1].clone();
    let pj = p.entries[j - 1].clone();
    let lambda = (pj.clone() - target.clone()) / (pj.clone() - pi.clone());
    let vj = pi + pj - target.clone();
    TransformStep {
        i,
        j,
        lambda,
        result: p.with_two_replaced(i, j, target.clone(), vj),
    }
}

/// Drives a member of the theta-floor family onto the extremal member whose
/// position `j` carries all the surplus mass.
///
/// Each step pins the first (lowest-index) entry `i != j` with `p_i > theta`
/// down to `theta`, moving the excess onto `j`; the recorded weight is
/// `lambda = (p_j - theta)/((p_j - theta) + (p_i - theta))`, which certifies
/// that the predecessor is a two-entry mixture of the result. At most `n - 1`
/// steps are needed.
pub fn maximize_trace<S: Scalar>(
    p: &CouponDistribution<S>,
    theta: &S,
    j: usize,
) -> Result<TransformTrace<S>> {
    p.check_position(j)?;
    for (idx, e) in p.entries.iter().enumerate() {
        if strictly_below(e, theta) {
            return Err(Error::NotInFamily { index: idx + 1 });
        }
    }
    let mut steps = Vec::new();
    let mut current = p.clone();
    loop {
        let i = current
            .entries
            .iter()
            .enumerate()
            .position(|(idx, e)| idx + 1 != j && strictly_below(theta, e));
        let Some(i) = i.map(|idx| idx + 1) else { break };
        let pi = current.entries[i - 1].clone();
        let pj = current.entries[j - 1].clone();
        let slack_i = pi.clone() - theta.clone();
        let slack_j = pj.clone() - theta.clone();
        let lambda = slack_j.clone() / (slack_i + slack_j);
        let vj = pi + pj - theta.clone();
        let step = TransformStep {
            i,
            j,
            lambda,
            result: current.with_two_replaced(i, j, theta.clone(), vj),
        };
        current = step.result.clone();
        steps.push(step);
        debug_assert!(steps.len() < p.n());
    }
    Ok(TransformTrace {
        start: p.clone(),
        steps,
    })
}

/// The constraint family of distributions with a fixed null mass whose
/// entries all sit on or above a floor `theta`, together with the surplus
/// value `gamma = 1 - p0 - (n-1) theta` carried by its extremal members.
#[derive(Debug, Clone, PartialEq)]
pub struct ThetaFamily<S: Scalar> {
    n: usize,
    null_mass: S,
    theta: S,
    gamma: S,
}

impl<S: Scalar> ThetaFamily<S> {
    /// Requires `theta` in `(0, (1 - p0)/n]`; the boundary value collapses the
    /// extremal set onto the almost uniform vector.
    pub fn new(n: usize, null_mass: S, theta: S) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyVector);
        }
        let share = (S::one() - null_mass.clone()) / S::from_u64(n as u64);
        let positive = theta > S::zero();
        let within = at_least(&share, &theta);
        if !positive || !within {
            return Err(Error::ThetaOutOfRange {
                theta: theta.to_f64(),
            });
        }
        let gamma = S::one() - null_mass.clone() - S::from_u64((n - 1) as u64) * theta.clone();
        if !at_least(&gamma, &theta) {
            return Err(Error::ThetaOutOfRange {
                theta: theta.to_f64(),
            });
        }
        Ok(ThetaFamily {
            n,
            null_mass,
            theta,
            gamma,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn null_mass(&self) -> &S {
        &self.null_mass
    }

    pub fn theta(&self) -> &S {
        &self.theta
    }

    pub fn gamma(&self) -> &S {
        &self.gamma
    }

    /// The family member whose position `j` holds `gamma` while every other
    /// entry sits at `theta`. All members share one collection-time law by
    /// symmetry.
    pub fn extremal_member(&self, j: usize) -> Result<CouponDistribution<S>> {
        if j == 0 || j > self.n {
            return Err(Error::IndexOutOfRange {
                position: j,
                n: self.n,
            });
        }
        let mut entries = vec![self.theta.clone(); self.n];
        entries[j - 1] = self.gamma.clone();
        CouponDistribution::validate(entries)
    }

    /// True iff every entry of `p` sits on or above the floor (within
    /// tolerance) and the null masses agree.
    pub fn contains(&self, p: &CouponDistribution<S>) -> bool {
        p.n() == self.n
            && p.null_mass().close_to(&self.null_mass)
            && p.entries().iter().all(|e| at_least(e, &self.theta))
    }
}

/// A probability literal: either a fraction `"19/48"` or a decimal `"0.25"`.
pub fn parse_probability_literal(text: &str) -> Result<BigRational> {
    let bad = || Error::BadLiteral(text.to_string());
    let t = text.trim();
    if let Some((num, den)) = t.split_once('/') {
        let num: BigInt = num.trim().parse().map_err(|_| bad())?;
        let den: BigInt = den.trim().parse().map_err(|_| bad())?;
        if den.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(num, den));
    }
    let (int_part, frac_part) = match t.split_once('.') {
        Some((i, f)) => (i, f),
        None => (t, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    let digits: String = [int_part, frac_part].concat();
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return Err(bad());
    }
    let num: BigInt = digits.parse().map_err(|_| bad())?;
    let den = num_traits::pow(BigInt::from(10), frac_part.len());
    Ok(BigRational::new(num, den))
}

/// A parsed distribution literal, remembering whether any component was a
/// slash fraction (fractions force rational mode downstream).
#[derive(Debug, Clone)]
pub struct ParsedDistribution {
    pub values: Vec<BigRational>,
    pub has_fraction: bool,
}

pub fn parse_distribution_literal(text: &str) -> Result<ParsedDistribution> {
    if text.trim().is_empty() {
        return Err(Error::EmptyVector);
    }
    let mut values = Vec::new();
    let mut has_fraction = false;
    for part in text.split(',') {
        has_fraction |= part.contains('/');
        values.push(parse_probability_literal(part)?);
    }
    Ok(ParsedDistribution {
        values,
        has_fraction,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SplitMix64;

    fn rat(num: i64, den: i64) -> BigRational {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }

    fn dist_f64(entries: &[f64]) -> CouponDistribution<f64> {
        CouponDistribution::validate(entries.to_vec()).unwrap()
    }

    fn dist_rat(entries: &[(i64, i64)]) -> CouponDistribution<BigRational> {
        CouponDistribution::validate(entries.iter().map(|&(n, d)| rat(n, d)).collect()).unwrap()
    }

    #[test]
    fn validate_derives_null_mass() {
        let p = dist_f64(&[0.5, 0.3]);
        assert!((p.null_mass() - 0.2).abs() < 1e-15);
        let q = dist_f64(&[0.25, 0.25, 0.25, 0.25]);
        assert_eq!(*q.null_mass(), 0.0);
    }

    #[test]
    fn validate_rejects_bad_inputs() {
        assert_eq!(
            CouponDistribution::validate(vec![0.7, 0.4]),
            Err(Error::MassExceedsOne { sum: 1.1 })
        );
        assert_eq!(
            CouponDistribution::validate(vec![0.5, 0.0]),
            Err(Error::NonPositiveEntry { index: 2 })
        );
        assert_eq!(
            CouponDistribution::validate(vec![1.0]),
            Err(Error::EntryAtLeastOne { index: 1 })
        );
        assert_eq!(
            CouponDistribution::<f64>::validate(vec![]),
            Err(Error::EmptyVector)
        );
    }

    #[test]
    fn normalize_examples() {
        let p = dist_f64(&[0.4, 0.4]);
        let q = p.normalize().unwrap();
        assert!(q.entries().iter().all(|e| (e - 0.5).abs() < 1e-15));
        assert_eq!(*q.null_mass(), 0.0);

        let u = dist_f64(&[0.5, 0.5]);
        assert_eq!(u.normalize().unwrap(), u);

        let p = dist_rat(&[(1, 20), (1, 20), (1, 20), (7, 10), (1, 20)]);
        let q = p.normalize().unwrap();
        assert_eq!(
            q.entries(),
            &[rat(1, 18), rat(1, 18), rat(1, 18), rat(7, 9), rat(1, 18)]
        );
    }

    #[test]
    fn majorization_examples() {
        let spread = dist_f64(&[0.7, 0.1, 0.1, 0.1]);
        let uniform = dist_f64(&[0.25, 0.25, 0.25, 0.25]);
        assert!(majorizes(&spread, &uniform).unwrap());
        assert!(!majorizes(&uniform, &spread).unwrap());
        assert!(majorizes(&spread, &spread).unwrap());

        let a = dist_f64(&[0.5, 0.3, 0.2]);
        let b = dist_f64(&[0.4, 0.4, 0.2]);
        assert!(majorizes(&a, &b).unwrap());
    }

    #[test]
    fn majorization_errors() {
        let a = dist_f64(&[0.5, 0.5]);
        let b = dist_f64(&[0.3, 0.3, 0.3]);
        assert!(matches!(
            majorizes(&a, &b),
            Err(Error::LengthMismatch { .. })
        ));
        let c = dist_f64(&[0.2, 0.2]);
        assert!(matches!(majorizes(&a, &c), Err(Error::MassMismatch { .. })));
    }

    #[test]
    fn lambda_transform_paper_step() {
        let p = dist_rat(&[(1, 16), (1, 6), (1, 4), (1, 8), (19, 48)]);
        let out = lambda_transform(&p, 4, 5, &rat(47, 65)).unwrap();
        assert_eq!(
            out.entries(),
            &[rat(1, 16), rat(1, 6), rat(1, 4), rat(1, 5), rat(77, 240)]
        );
    }

    #[test]
    fn lambda_transform_identity_and_average() {
        let p = dist_f64(&[0.3, 0.5]);
        assert_eq!(lambda_transform(&p, 1, 2, &1.0).unwrap(), p);
        let avg = lambda_transform(&p, 1, 2, &0.5).unwrap();
        assert!(avg.entries().iter().all(|e| (e - 0.4).abs() < 1e-15));
    }

    #[test]
    fn lambda_transform_validargs() {
        let p = dist_f64(&[0.3, 0.5]);
        assert!(matches!(
            lambda_transform(&p, 1, 1, &0.5),
            Err(Error::IndexOutOfRange { .. })
        ));
        assert!(matches!(
            lambda_transform(&p, 0, 2, &0.5),
            Err(Error::IndexOutOfRange { .. })
        ));
        assert!(matches!(
            lambda_transform(&p, 1, 2, &1.5),
            Err(Error::LambdaOutOfRange { .. })
        ));
    }

    #[test]
    fn lambda_transform_is_majorization_decreasing() {
        let mut rng = SplitMix64::new(31);
        for _ in 0..200 {
            let n = 2 + (rng.next_below(5) as usize);
            let raw: Vec<f64> = (0..n).map(|_| 0.05 + rng.next_f64()).collect();
            let total: f64 = raw.iter().sum::<f64>() * (1.0 + rng.next_f64());
            let p = dist_f64(&raw.iter().map(|x| x / total).collect::<Vec<_>>());
            let i = 1 + rng.next_below(n as u64) as usize;
            let mut j = 1 + rng.next_below(n as u64) as usize;
            if j == i {
                j = if i == n { 1 } else { i + 1 };
            }
            let lambda = rng.next_f64();
            let q = lambda_transform(&p, i, j, &lambda).unwrap();
            assert!(majorizes(&p, &q).unwrap());
            let mass_p: f64 = p.entries().iter().sum();
            let mass_q: f64 = q.entries().iter().sum();
            assert!((mass_p - mass_q).abs() <= TOLERANCE);
        }
    }

    #[test]
    fn uniformize_paper_fixture_with_pairs() {
        let p = dist_rat(&[(1, 16), (1, 6), (1, 4), (1, 8), (19, 48)]);
        let trace = uniformize_trace_with_pairs(&p, &[(4, 5), (2, 5), (1, 3), (3, 5)]).unwrap();
        let expected = [
            dist_rat(&[(1, 16), (1, 6), (1, 4), (1, 5), (77, 240)]),
            dist_rat(&[(1, 16), (1, 5), (1, 4), (1, 5), (69, 240)]),
            dist_rat(&[(1, 5), (1, 5), (9, 80), (1, 5), (69, 240)]),
            dist_rat(&[(1, 5), (1, 5), (1, 5), (1, 5), (1, 5)]),
        ];
        assert_eq!(trace.len(), 4);
        for (step, want) in trace.steps.iter().zip(&expected) {
            assert_eq!(&step.result, want);
        }
        // Every recorded weight certifies its step as a two-entry mixture.
        let mut prev = trace.start.clone();
        for step in &trace.steps {
            let redo = lambda_transform(&prev, step.i, step.j, &step.lambda).unwrap();
            assert_eq!(redo, step.result);
            prev = step.result.clone();
        }
    }

    #[test]
    fn uniformize_default_policy_reaches_uniform() {
        let p = dist_rat(&[(1, 16), (1, 6), (1, 4), (1, 8), (19, 48)]);
        let trace = uniformize_trace(&p);
        assert!(trace.len() <= 4);
        let v = almost_uniform(5, &BigRational::zero()).unwrap();
        assert_eq!(trace.final_distribution(), &v);
    }

    #[test]
    fn uniformize_already_uniform_is_empty() {
        let u = dist_f64(&[0.5, 0.5]);
        assert!(uniformize_trace(&u).is_empty());
        let v = dist_f64(&[0.4, 0.4]);
        assert!(uniformize_trace(&v).is_empty());
    }

    #[test]
    fn uniformize_rejects_noncrossing_pairs() {
        let p = dist_f64(&[0.1, 0.4, 0.5]);
        assert!(matches!(
            uniformize_trace_with_pairs(&p, &[(2, 3)]),
            Err(Error::PairNotCrossing { i: 2, j: 3 })
        ));
    }

    #[test]
    fn maximize_paper_fixture() {
        let p = dist_rat(&[(1, 16), (1, 6), (1, 4), (1, 8), (71, 240)]);
        let theta = rat(1, 20);
        let trace = maximize_trace(&p, &theta, 4).unwrap();
        let expected = [
            dist_rat(&[(1, 20), (1, 6), (1, 4), (11, 80), (71, 240)]),
            dist_rat(&[(1, 20), (1, 20), (1, 4), (61, 240), (71, 240)]),
            dist_rat(&[(1, 20), (1, 20), (1, 20), (109, 240), (71, 240)]),
            dist_rat(&[(1, 20), (1, 20), (1, 20), (7, 10), (1, 20)]),
        ];
        assert_eq!(trace.len(), 4);
        for (step, want) in trace.steps.iter().zip(&expected) {
            assert_eq!(&step.result, want);
        }
        // Reversed certificate: predecessor = mix(result).
        let mut prev = trace.start.clone();
        for step in &trace.steps {
            let undo = lambda_transform(&step.result, step.i, step.j, &step.lambda).unwrap();
            assert_eq!(undo, prev);
            assert!(majorizes(&step.result, &prev).unwrap());
            prev = step.result.clone();
        }
        let family = ThetaFamily::new(5, rat(1, 10), theta).unwrap();
        assert_eq!(
            trace.final_distribution(),
            &family.extremal_member(4).unwrap()
        );
        // Intermediate vectors never leave the family.
        for step in &trace.steps {
            assert!(family.contains(&step.result));
        }
    }

    #[test]
    fn maximize_already_extremal_is_empty() {
        let family = ThetaFamily::new(5, rat(1, 10), rat(1, 20)).unwrap();
        let q = family.extremal_member(4).unwrap();
        let trace = maximize_trace(&q, &rat(1, 20), 4).unwrap();
        assert!(trace.is_empty());
    }

    #[test]
    fn maximize_single_pin() {
        // Null mass is derived from the entries (here 0.1), so the surplus
        // entry ends at 1 - 0.1 - 0.25 = 0.65.
        let p = dist_f64(&[0.45, 0.45]);
        let trace = maximize_trace(&p, &0.25, 1).unwrap();
        assert_eq!(trace.len(), 1);
        let q = trace.final_distribution();
        assert!((q.entries()[0] - 0.65).abs() < 1e-15);
        assert!((q.entries()[1] - 0.25).abs() < 1e-15);
    }

    #[test]
    fn maximize_intermediates_stay_in_family() {
        let mut rng = SplitMix64::new(53);
        for _ in 0..50 {
            let n = 2 + rng.next_below(5) as usize;
            let null_mass = 0.3 * rng.next_f64();
            let share = (1.0 - null_mass) / n as f64;
            let theta = share * (0.2 + 0.7 * rng.next_f64());
            let weights: Vec<f64> = (0..n).map(|_| rng.next_f64() + 0.01).collect();
            let total: f64 = weights.iter().sum();
            let leftover = 1.0 - null_mass - n as f64 * theta;
            let p = dist_f64(
                &weights
                    .iter()
                    .map(|w| theta + leftover * w / total)
                    .collect::<Vec<_>>(),
            );
            let j = 1 + rng.next_below(n as u64) as usize;
            let trace = maximize_trace(&p, &theta, j).unwrap();
            assert!(trace.len() <= n - 1);
            for step in &trace.steps {
                assert!(step.result.entries().iter().all(|e| *e >= theta - 1e-12));
            }
        }
    }

    #[test]
    fn maximize_rejects_entries_below_floor() {
        let p = dist_f64(&[0.02, 0.45, 0.45]);
        assert_eq!(
            maximize_trace(&p, &0.05, 2),
            Err(Error::NotInFamily { index: 1 })
        );
    }

    #[test]
    fn almost_uniform_examples() {
        let v = almost_uniform(5, &0.0).unwrap();
        assert!(v.entries().iter().all(|e| (e - 0.2).abs() < 1e-15));
        let v = almost_uniform(2, &0.2).unwrap();
        assert!(v.entries().iter().all(|e| (e - 0.4).abs() < 1e-15));
        let v = almost_uniform(3, &0.1).unwrap();
        assert!(v.entries().iter().all(|e| (e - 0.3).abs() < 1e-15));
    }

    #[test]
    fn extremal_member_examples() {
        let family = ThetaFamily::new(5, rat(1, 10), rat(1, 20)).unwrap();
        assert_eq!(family.gamma(), &rat(7, 10));
        let q = family.extremal_member(4).unwrap();
        assert_eq!(
            q.entries(),
            &[rat(1, 20), rat(1, 20), rat(1, 20), rat(7, 10), rat(1, 20)]
        );

        let family = ThetaFamily::new(2, 0.2_f64, 0.25).unwrap();
        let q = family.extremal_member(1).unwrap();
        assert!((q.entries()[0] - 0.55).abs() < 1e-15);
        assert!((q.entries()[1] - 0.25).abs() < 1e-15);

        // Boundary theta = (1-p0)/n collapses onto the almost uniform vector.
        let family = ThetaFamily::new(4, 0.2_f64, 0.2).unwrap();
        let v = almost_uniform(4, &0.2).unwrap();
        for j in 1..=4 {
            let member = family.extremal_member(j).unwrap();
            for (a, b) in member.entries().iter().zip(v.entries()) {
                assert!((a - b).abs() < 1e-12);
            }
        }
        assert!(matches!(
            family.extremal_member(5),
            Err(Error::IndexOutOfRange { .. })
        ));
    }

    #[test]
    fn theta_family_bounds() {
        assert!(matches!(
            ThetaFamily::new(2, 0.2_f64, 0.0),
            Err(Error::ThetaOutOfRange { .. })
        ));
        assert!(matches!(
            ThetaFamily::new(2, 0.2_f64, 0.41),
            Err(Error::ThetaOutOfRange { .. })
        ));
    }

    #[test]
    fn literal_parsing() {
        let parsed = parse_distribution_literal("1/16,1/6,1/4,1/8,19/48").unwrap();
        assert!(parsed.has_fraction);
        assert_eq!(parsed.values[4], rat(19, 48));

        let parsed = parse_distribution_literal("0.5, 0.3").unwrap();
        assert!(!parsed.has_fraction);
        assert_eq!(parsed.values[1], rat(3, 10));

        assert!(parse_distribution_literal("0.5,oops").is_err());
        assert!(parse_probability_literal("1/0").is_err());

        let p: CouponDistribution<BigRational> = CouponDistribution::parse("1/2,1/2").unwrap();
        assert_eq!(p.null_mass(), &BigRational::zero());
        let q: CouponDistribution<f64> = CouponDistribution::parse("0.5,0.3").unwrap();
        assert!((q.null_mass() - 0.2).abs() < 1e-15);
    }

    #[test]
    fn majorization_is_a_partial_order() {
        let mut rng = SplitMix64::new(77);
        for _ in 0..100 {
            let n = 2 + (rng.next_below(4) as usize);
            let mass = 0.5 + 0.5 * rng.next_f64();
            let make = |rng: &mut SplitMix64| {
                let raw: Vec<f64> = (0..n).map(|_| 0.05 + rng.next_f64()).collect();
                let total: f64 = raw.iter().sum();
                dist_f64(&raw.iter().map(|x| x / total * mass).collect::<Vec<_>>())
            };
            let a = make(&mut rng);
            let b = make(&mut rng);
            let c = make(&mut rng);
            // Reflexive.
            assert!(majorizes(&a, &a).unwrap());
            // Antisymmetric up to permutation.
            if majorizes(&a, &b).unwrap() && majorizes(&b, &a).unwrap() {
                let mut sa = a.entries().to_vec();
                let mut sb = b.entries().to_vec();
                sa.sort_by(|x, y| x.partial_cmp(y).unwrap());
                sb.sort_by(|x, y| x.partial_cmp(y).unwrap());
                for (x, y) in sa.iter().zip(&sb) {
                    assert!((x - y).abs() <= 1e-9);
                }
            }
            // Transitive.
            if majorizes(&a, &b).unwrap() && majorizes(&b, &c).unwrap() {
                assert!(majorizes(&a, &c).unwrap());
            }
        }
    }
}
