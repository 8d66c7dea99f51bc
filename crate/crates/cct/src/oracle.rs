//! Independent ground-truth computations.
//!
//! Nothing in here shares code with the closed-form evaluators in
//! [`crate::exact`]; that independence is the point. Three oracles are
//! provided:
//!
//! - an absorbing chain over collected-subset states, iterated step by step;
//! - exhaustive enumeration of every draw sequence (tiny horizons only);
//! - a seeded Monte-Carlo sampler with normal-approximation intervals.
//!
//! The first two agree with the exact module to working precision (exactly in
//! rational mode); the sampler converges to it and doubles as the simulator's
//! randomness source.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::probmodel::CouponDistribution;
use crate::rng::SplitMix64;
use crate::scalar::{Accumulator, Scalar};

/// Cap on chain states and on enumerated sequences.
pub const STATE_GUARD: u128 = 10_000_000;

/// One transient state of the collection chain: the set of distinct non-null
/// coupons seen so far (as a bit mask over positions `1..=n`) and the
/// probability mass currently sitting on it.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainState<S: Scalar> {
    pub collected: u64,
    pub mass: S,
}

impl<S: Scalar> ChainState<S> {
    /// 1-based positions of the collected coupons.
    pub fn members(&self) -> Vec<usize> {
        (0..64)
            .filter(|bit| self.collected & (1 << bit) != 0)
            .map(|bit| bit + 1)
            .collect()
    }
}

/// The collection chain: transient states are the subsets with fewer than `c`
/// coupons; every size-`c` subset collapses into one absorbing state, which
/// shrinks the space from `2^n` to `sum_{i<c} C(n,i) + 1`.
pub struct AbsorbingChain<S: Scalar> {
    entries: Vec<S>,
    c: usize,
    masks: Vec<u64>,
    index: HashMap<u64, usize>,
    stay: Vec<S>,
    mass: Vec<S>,
    absorbed: S,
}

impl<S: Scalar> AbsorbingChain<S> {
    pub fn new(p: &CouponDistribution<S>, c: usize) -> Result<Self> {
        let n = p.n();
        if c == 0 || c > n {
            return Err(Error::InvalidC { c, n });
        }
        if n > 63 {
            return Err(Error::WorkloadExceeded {
                terms: 1 << 20,
                guard: STATE_GUARD,
            });
        }
        let mut masks = Vec::new();
        collect_masks(n, c, &mut masks)?;
        let index: HashMap<u64, usize> = masks.iter().enumerate().map(|(i, &m)| (m, i)).collect();
        let stay = masks
            .iter()
            .map(|&mask| {
                let mut s = p.null_mass().clone();
                for bit in 0..n {
                    if mask & (1 << bit) != 0 {
                        s = s + p.entries()[bit].clone();
                    }
                }
                s
            })
            .collect();
        let mut mass = vec![S::zero(); masks.len()];
        mass[0] = S::one();
        Ok(AbsorbingChain {
            entries: p.entries().to_vec(),
            c,
            masks,
            index,
            stay,
            mass,
            absorbed: S::zero(),
        })
    }

    /// Advances the chain by one draw.
    pub fn step(&mut self) {
        let n = self.entries.len();
        let mut next = vec![S::zero(); self.masks.len()];
        for (idx, mask) in self.masks.iter().enumerate() {
            if self.mass[idx].is_zero() {
                continue;
            }
            let here = self.mass[idx].clone();
            next[idx] = next[idx].clone() + here.clone() * self.stay[idx].clone();
            let size = mask.count_ones() as usize;
            for bit in 0..n {
                if mask & (1 << bit) != 0 {
                    continue;
                }
                let moved = here.clone() * self.entries[bit].clone();
                if size + 1 == self.c {
                    self.absorbed = self.absorbed.clone() + moved;
                } else {
                    let target = self.index[&(mask | (1 << bit))];
                    next[target] = next[target].clone() + moved;
                }
            }
        }
        self.mass = next;
    }

    /// Mass not yet absorbed.
    pub fn survival(&self) -> S {
        let mut acc = S::Accum::default();
        for m in &self.mass {
            acc.push(m.clone());
        }
        acc.total().clamp01()
    }

    /// Transient mass plus absorbed mass; one, up to rounding.
    pub fn total_mass(&self) -> S {
        self.survival() + self.absorbed.clone()
    }

    pub fn states(&self) -> Vec<ChainState<S>> {
        self.masks
            .iter()
            .zip(&self.mass)
            .map(|(&collected, mass)| ChainState {
                collected,
                mass: mass.clone(),
            })
            .collect()
    }
}

/// Masks of all subsets with fewer than `c` members, ordered by size then
/// lexicographically by member list.
fn collect_masks(n: usize, c: usize, masks: &mut Vec<u64>) -> Result<()> {
    let mut count: u128 = 0;
    for size in 0..c {
        if size > n {
            break;
        }
        let mut indices: Vec<usize> = (0..size).collect();
        loop {
            count += 1;
            if count > STATE_GUARD {
                return Err(Error::WorkloadExceeded {
                    terms: count,
                    guard: STATE_GUARD,
                });
            }
            masks.push(indices.iter().fold(0u64, |m, &i| m | (1 << i)));
            // Advance to the next combination.
            let mut slot = size;
            let mut advanced = false;
            while slot > 0 {
                slot -= 1;
                if indices[slot] < n - (size - slot) {
                    indices[slot] += 1;
                    for later in slot + 1..size {
                        indices[later] = indices[later - 1] + 1;
                    }
                    advanced = true;
                    break;
                }
            }
            if !advanced {
                break;
            }
        }
    }
    Ok(())
}

/// `Pr{T > k}` by iterating the absorbing chain `k` steps.
pub fn survival_markov<S: Scalar>(p: &CouponDistribution<S>, c: usize, k: u64) -> Result<S> {
    Ok(survival_markov_curve(p, c, k)?.pop().expect("k+1 values"))
}

/// `Pr{T > k}` for every `k = 0..=k_max` from a single chain run.
pub fn survival_markov_curve<S: Scalar>(
    p: &CouponDistribution<S>,
    c: usize,
    k_max: u64,
) -> Result<Vec<S>> {
    let mut chain = AbsorbingChain::new(p, c)?;
    let mut values = Vec::with_capacity(k_max as usize + 1);
    values.push(chain.survival());
    for _ in 0..k_max {
        chain.step();
        values.push(chain.survival());
        debug_assert!(chain.total_mass().close_to(&S::one()));
    }
    Ok(values)
}

/// `Pr{T > k}` by summing the probability of every length-`k` draw sequence
/// over `{0, 1, ..., n}` that contains fewer than `c` distinct non-null
/// symbols. Exact in rational mode; feasible only for `(n+1)^k` small.
pub fn survival_enumeration<S: Scalar>(p: &CouponDistribution<S>, c: usize, k: u64) -> Result<S> {
    Ok(survival_enumeration_curve(p, c, k)?
        .pop()
        .expect("k+1 values"))
}

/// Enumeration oracle for all horizons `0..=k_max` in one prefix-tree walk.
///
/// The walk records, per depth, the probability that the collection completes
/// exactly there; a completed prefix accounts for all of its extensions, so
/// the subtree is pruned.
pub fn survival_enumeration_curve<S: Scalar>(
    p: &CouponDistribution<S>,
    c: usize,
    k_max: u64,
) -> Result<Vec<S>> {
    let n = p.n();
    if c == 0 || c > n {
        return Err(Error::InvalidC { c, n });
    }
    if n > 63 {
        return Err(Error::WorkloadExceeded {
            terms: 1 << 20,
            guard: STATE_GUARD,
        });
    }
    let sequences = (n as u128 + 1).checked_pow(k_max as u32);
    match sequences {
        Some(count) if count <= STATE_GUARD => {}
        _ => {
            return Err(Error::WorkloadExceeded {
                terms: sequences.unwrap_or(u128::MAX),
                guard: STATE_GUARD,
            })
        }
    }
    let mut absorbed_at = vec![S::zero(); k_max as usize + 1];
    walk(p, c, k_max, 0, S::one(), 0, 0, &mut absorbed_at);
    let mut values = Vec::with_capacity(k_max as usize + 1);
    let mut collected_so_far = S::zero();
    for done in absorbed_at {
        collected_so_far = collected_so_far + done;
        values.push((S::one() - collected_so_far.clone()).clamp01());
    }
    Ok(values)
}

#[allow(clippy::too_many_arguments)]
fn walk<S: Scalar>(
    p: &CouponDistribution<S>,
    c: usize,
    k_max: u64,
    depth: u64,
    prob: S,
    mask: u64,
    distinct: usize,
    absorbed_at: &mut [S],
) {
    if distinct == c {
        absorbed_at[depth as usize] = absorbed_at[depth as usize].clone() + prob;
        return;
    }
    if depth == k_max {
        return;
    }
    if !p.null_mass().is_zero() {
        walk(
            p,
            c,
            k_max,
            depth + 1,
            prob.clone() * p.null_mass().clone(),
            mask,
            distinct,
            absorbed_at,
        );
    }
    for (bit, entry) in p.entries().iter().enumerate() {
        let seen = mask & (1 << bit) != 0;
        walk(
            p,
            c,
            k_max,
            depth + 1,
            prob.clone() * entry.clone(),
            mask | (1 << bit),
            if seen { distinct } else { distinct + 1 },
            absorbed_at,
        );
    }
}

/// Draws single symbols by cumulative-probability inversion over
/// `(p0, p1, ..., pn)` and samples full collection times.
#[derive(Debug, Clone)]
pub struct CollectionSampler {
    cumulative: Vec<f64>,
    n: usize,
    c: usize,
}

impl CollectionSampler {
    pub fn new(p: &CouponDistribution<f64>, c: usize) -> Result<Self> {
        if c == 0 || c > p.n() {
            return Err(Error::InvalidC { c, n: p.n() });
        }
        let mut cumulative = Vec::with_capacity(p.n() + 1);
        let mut acc = *p.null_mass();
        cumulative.push(acc);
        for e in p.entries() {
            acc += e;
            cumulative.push(acc);
        }
        Ok(CollectionSampler {
            cumulative,
            n: p.n(),
            c,
        })
    }

    /// One draw: `0` is the null symbol, `1..=n` are coupons.
    pub fn draw(&self, rng: &mut SplitMix64) -> usize {
        let u = rng.next_f64();
        match self.cumulative.iter().position(|&threshold| u < threshold) {
            Some(symbol) => symbol,
            None => self.n,
        }
    }

    /// One realization of the collection time: draws until `c` distinct
    /// non-null symbols have been seen, returns the number of draws.
    /// Termination is almost sure because every entry is positive.
    pub fn sample(&self, rng: &mut SplitMix64) -> u64 {
        let mut draws = 0u64;
        let mut distinct = 0usize;
        if self.n <= 128 {
            let mut mask: u128 = 0;
            loop {
                draws += 1;
                let symbol = self.draw(rng);
                if symbol > 0 {
                    let bit = 1u128 << (symbol - 1);
                    if mask & bit == 0 {
                        mask |= bit;
                        distinct += 1;
                        if distinct == self.c {
                            return draws;
                        }
                    }
                }
            }
        }
        let mut seen = vec![false; self.n];
        loop {
            draws += 1;
            let symbol = self.draw(rng);
            if symbol > 0 && !seen[symbol - 1] {
                seen[symbol - 1] = true;
                distinct += 1;
                if distinct == self.c {
                    return draws;
                }
            }
        }
    }
}

/// One realization of the collection time for `p`.
pub fn sample_collection_time(
    p: &CouponDistribution<f64>,
    c: usize,
    rng: &mut SplitMix64,
) -> Result<u64> {
    Ok(CollectionSampler::new(p, c)?.sample(rng))
}

/// A Monte-Carlo point estimate with a 95% normal-approximation interval.
/// The normal interval is optimistic for counts below ~10; callers sizing
/// studies near the tail should budget replicates accordingly.
#[derive(Debug, Clone, PartialEq)]
pub struct McEstimate {
    pub estimate: f64,
    pub half_width: f64,
    pub replicates: u64,
    pub seed: u64,
}

impl McEstimate {
    pub fn ci_low(&self) -> f64 {
        self.estimate - self.half_width
    }

    pub fn ci_high(&self) -> f64 {
        self.estimate + self.half_width
    }
}

/// Estimates `Pr{T > k}` for `k = 0..=k_max` from `replicates` independent
/// collection times. Replicate `i` owns generator stream `(seed, i)`, so the
/// output is deterministic per seed and invariant under replicate-level
/// parallel execution.
pub fn mc_survival_curve(
    p: &CouponDistribution<f64>,
    c: usize,
    k_max: u64,
    replicates: u64,
    seed: u64,
) -> Result<Vec<McEstimate>> {
    debug_assert!(replicates >= 1);
    let sampler = CollectionSampler::new(p, c)?;
    // histogram[t] counts samples with T = t, capped at k_max + 1.
    let mut histogram = vec![0u64; k_max as usize + 2];
    for replicate in 0..replicates {
        let mut rng = SplitMix64::split(seed, replicate);
        let t = sampler.sample(&mut rng).min(k_max + 1);
        histogram[t as usize] += 1;
    }
    let mut exceeding = replicates;
    let mut estimates = Vec::with_capacity(k_max as usize + 1);
    for k in 0..=k_max {
        // Samples with T > k remain after removing T <= k.
        if k > 0 {
            exceeding -= histogram[k as usize];
        }
        let estimate = exceeding as f64 / replicates as f64;
        let half_width = 1.96 * (estimate * (1.0 - estimate) / replicates as f64).sqrt();
        estimates.push(McEstimate {
            estimate,
            half_width,
            replicates,
            seed,
        });
    }
    Ok(estimates)
}

/// CSV rows `k,estimate,ci_low,ci_high,replicates,seed`.
pub fn mc_curve_to_csv(estimates: &[McEstimate]) -> String {
    let mut out = String::from("k,estimate,ci_low,ci_high,replicates,seed\n");
    for (k, e) in estimates.iter().enumerate() {
        out.push_str(&format!(
            "{k},{},{},{},{},{}\n",
            e.estimate,
            e.ci_low(),
            e.ci_high(),
            e.replicates,
            e.seed
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::survival_inclusion_exclusion;
    use num_bigint::BigInt;
    use num_rational::BigRational;

    fn rat(num: i64, den: i64) -> BigRational {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }

    fn dist_f64(entries: &[f64]) -> CouponDistribution<f64> {
        CouponDistribution::validate(entries.to_vec()).unwrap()
    }

    fn dist_rat(entries: &[(i64, i64)]) -> CouponDistribution<BigRational> {
        CouponDistribution::validate(entries.iter().map(|&(n, d)| rat(n, d)).collect()).unwrap()
    }

    fn random_dist(rng: &mut SplitMix64, n: usize, with_null: bool) -> CouponDistribution<f64> {
        let raw: Vec<f64> = (0..n).map(|_| 0.05 + rng.next_f64()).collect();
        let total: f64 = raw.iter().sum();
        let scale = if with_null || n == 1 {
            (1.0 - (0.05 + 0.4 * rng.next_f64())) / total
        } else {
            1.0 / total
        };
        dist_f64(&raw.iter().map(|x| x * scale).collect::<Vec<_>>())
    }

    #[test]
    fn markov_examples() {
        let u = dist_f64(&[0.5, 0.5]);
        assert!((survival_markov(&u, 2, 3).unwrap() - 0.25).abs() < 1e-15);
        assert_eq!(survival_markov(&u, 2, 0).unwrap(), 1.0);

        let p = dist_f64(&[0.5, 0.3]);
        assert!((survival_markov(&p, 2, 2).unwrap() - 0.70).abs() < 1e-12);
    }

    #[test]
    fn markov_state_space_is_collapsed() {
        let p = dist_f64(&[0.2, 0.2, 0.2, 0.2]);
        let chain = AbsorbingChain::new(&p, 3).unwrap();
        // 1 empty + 4 singletons + 6 pairs.
        assert_eq!(chain.states().len(), 11);
        assert_eq!(chain.states()[0].members(), Vec::<usize>::new());
    }

    #[test]
    fn markov_conserves_mass() {
        let p = dist_rat(&[(1, 6), (1, 3), (1, 4)]);
        let mut chain = AbsorbingChain::new(&p, 2).unwrap();
        for _ in 0..12 {
            chain.step();
            assert_eq!(
                chain.total_mass(),
                BigRational::from_integer(BigInt::from(1))
            );
        }
    }

    #[test]
    fn markov_matches_inclusion_exclusion() {
        let mut rng = SplitMix64::new(41);
        for _ in 0..50 {
            let n = 1 + rng.next_below(6) as usize;
            let with_null = rng.next_u64().is_multiple_of(2);
            let p = random_dist(&mut rng, n, with_null);
            for c in 1..=n {
                let chain_curve = survival_markov_curve(&p, c, 10).unwrap();
                for (k, chain_value) in chain_curve.iter().enumerate() {
                    let exact = survival_inclusion_exclusion(&p, c, k as u64).unwrap();
                    assert!(
                        (chain_value - exact).abs() < 1e-12,
                        "n={n} c={c} k={k}: {chain_value} vs {exact}"
                    );
                }
            }
        }
    }

    #[test]
    fn enumeration_examples() {
        let u = dist_f64(&[0.5, 0.5]);
        assert!((survival_enumeration(&u, 2, 3).unwrap() - 0.25).abs() < 1e-15);

        // c = 1 with nulls: only the all-null sequence avoids collecting.
        let p = dist_f64(&[0.4, 0.3]);
        assert!((survival_enumeration(&p, 1, 2).unwrap() - 0.09).abs() < 1e-15);

        let third = dist_rat(&[(1, 3), (1, 3), (1, 3)]);
        assert_eq!(survival_enumeration(&third, 2, 2).unwrap(), rat(1, 3));
    }

    #[test]
    fn enumeration_matches_markov_exactly() {
        let cases = [
            dist_rat(&[(1, 2), (3, 10)]),
            dist_rat(&[(1, 6), (1, 3), (1, 4)]),
            dist_rat(&[(1, 4), (1, 4), (1, 4), (1, 4)]),
        ];
        for p in &cases {
            for c in 1..=p.n() {
                let enumerated = survival_enumeration_curve(p, c, 7).unwrap();
                let chained = survival_markov_curve(p, c, 7).unwrap();
                assert_eq!(enumerated, chained);
            }
        }
    }

    #[test]
    fn enumeration_workload_guard() {
        let p = dist_f64(&[0.1; 9]);
        assert!(matches!(
            survival_enumeration(&p, 2, 30),
            Err(Error::WorkloadExceeded { .. })
        ));
    }

    #[test]
    fn sampler_degenerate_cases() {
        let u = dist_f64(&[0.5, 0.5]);
        let sampler = CollectionSampler::new(&u, 1).unwrap();
        let mut rng = SplitMix64::new(3);
        for _ in 0..100 {
            // With p0 = 0 and c = 1, the first draw always completes.
            assert_eq!(sampler.sample(&mut rng), 1);
        }

        let p = dist_f64(&[0.2, 0.3, 0.1]);
        let sampler = CollectionSampler::new(&p, 3).unwrap();
        for _ in 0..100 {
            assert!(sampler.sample(&mut rng) >= 3);
        }
    }

    #[test]
    fn sampler_mean_matches_expectation() {
        let u = dist_f64(&[0.5, 0.5]);
        let sampler = CollectionSampler::new(&u, 2).unwrap();
        let mut rng = SplitMix64::split(2024, 0);
        let reps = 100_000u64;
        let total: u64 = (0..reps).map(|_| sampler.sample(&mut rng)).sum();
        let mean = total as f64 / reps as f64;
        // E[T] = 3, sd(T) = sqrt(2); allow 3 sigma of the sample mean.
        let tolerance = 3.0 * (2.0f64).sqrt() / (reps as f64).sqrt();
        assert!((mean - 3.0).abs() < tolerance, "mean {mean}");
    }

    #[test]
    fn mc_curve_is_deterministic_and_calibrated() {
        let u = dist_f64(&[0.5, 0.5]);
        let a = mc_survival_curve(&u, 2, 6, 50_000, 99).unwrap();
        let b = mc_survival_curve(&u, 2, 6, 50_000, 99).unwrap();
        assert_eq!(a, b);

        let exact = survival_inclusion_exclusion(&u, 2, 3).unwrap();
        let point = &a[3];
        let sigma = (exact * (1.0 - exact) / 50_000f64).sqrt();
        assert!((point.estimate - exact).abs() <= 3.0 * sigma);
        assert!(point.half_width > 0.0);
        assert_eq!(a[0].estimate, 1.0);
    }

    #[test]
    fn mc_csv_shape() {
        let u = dist_f64(&[0.5, 0.5]);
        let estimates = mc_survival_curve(&u, 2, 2, 1000, 7).unwrap();
        let csv = mc_curve_to_csv(&estimates);
        let lines: Vec<_> = csv.lines().collect();
        assert_eq!(lines[0], "k,estimate,ci_low,ci_high,replicates,seed");
        assert_eq!(lines.len(), 4);
        assert!(lines[1].starts_with("0,1,"));
    }
}
