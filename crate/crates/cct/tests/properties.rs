//! Property-based invariants over randomly generated distributions.

use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;

use cct::exact::{expectation, quantile, survival_by_decomposition, survival_inclusion_exclusion};
use cct::oracle::survival_markov;
use cct::probmodel::{lambda_transform, majorizes, uniformize_trace, CouponDistribution};
use cct::scalar::Scalar;

fn rational_dist_strategy() -> impl Strategy<Value = CouponDistribution<BigRational>> {
    (2usize..=5, any::<u64>()).prop_map(|(n, seed)| {
        let mut rng = cct::rng::SplitMix64::new(seed);
        let numerators: Vec<u64> = (0..n).map(|_| 1 + rng.next_below(30)).collect();
        let total: u64 = numerators.iter().sum();
        let denominator = total + 1 + rng.next_below(total);
        CouponDistribution::validate(
            numerators
                .iter()
                .map(|&a| BigRational::new(BigInt::from(a), BigInt::from(denominator)))
                .collect(),
        )
        .unwrap()
    })
}

fn float_dist_strategy() -> impl Strategy<Value = CouponDistribution<f64>> {
    (proptest::collection::vec(0.05f64..1.0, 2..=6), 0.0f64..0.45).prop_map(|(raw, null_mass)| {
        let total: f64 = raw.iter().sum();
        let scale = (1.0 - null_mass) / total;
        CouponDistribution::validate(raw.iter().map(|x| x * scale).collect()).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, ..ProptestConfig::default() })]

    /// Survival is a probability, non-increasing in k, and agrees with the
    /// absorbing-chain oracle.
    #[test]
    fn survival_is_monotone_and_matches_chain(
        p in float_dist_strategy(),
        c_pick in 0usize..6,
        k in 0u64..10,
    ) {
        let c = 1 + c_pick % p.n();
        let here = survival_inclusion_exclusion(&p, c, k).unwrap();
        let next = survival_inclusion_exclusion(&p, c, k + 1).unwrap();
        prop_assert!((0.0..=1.0).contains(&here));
        prop_assert!(next <= here + 1e-12);
        let chain = survival_markov(&p, c, k).unwrap();
        prop_assert!((here - chain).abs() < 1e-12);
    }

    /// Two-entry mixing preserves mass exactly (rational mode) and lands
    /// below the original in the majorization order.
    #[test]
    fn mixing_preserves_mass_and_majorization(
        p in rational_dist_strategy(),
        i_pick in 0usize..6,
        j_pick in 0usize..6,
        num in 0u32..=100,
    ) {
        let n = p.n();
        let i = 1 + i_pick % n;
        let mut j = 1 + j_pick % n;
        if i == j {
            j = if i == n { 1 } else { i + 1 };
        }
        let lambda = BigRational::new(BigInt::from(num), BigInt::from(100));
        let mixed = lambda_transform(&p, i, j, &lambda).unwrap();
        let mass = |d: &CouponDistribution<BigRational>| -> BigRational {
            d.entries()
                .iter()
                .cloned()
                .fold(<BigRational as num_traits::Zero>::zero(), |a, b| a + b)
        };
        prop_assert_eq!(mass(&p), mass(&mixed));
        prop_assert!(majorizes(&p, &mixed).unwrap());
    }

    /// A full uniformizing trace never needs more than n - 1 steps and every
    /// step keeps the two untouched-entry sums intact.
    #[test]
    fn uniformize_is_short_and_chained(p in float_dist_strategy()) {
        let trace = uniformize_trace(&p);
        prop_assert!(trace.len() < p.n());
        let mut previous = trace.start.clone();
        for step in &trace.steps {
            let mut touched = 0;
            for (idx, (a, b)) in previous.entries().iter().zip(step.result.entries()).enumerate() {
                if (a - b).abs() > 1e-15 {
                    prop_assert!(idx + 1 == step.i || idx + 1 == step.j);
                    touched += 1;
                }
            }
            prop_assert!(touched <= 2);
            previous = step.result.clone();
        }
    }

    /// The decomposition route agrees with the plain evaluator, and the
    /// quantile is the minimal threshold index.
    #[test]
    fn decomposition_agrees_and_quantile_minimal(
        p in float_dist_strategy(),
        c_pick in 0usize..6,
        delta in 0.01f64..0.9,
    ) {
        let c = 1 + c_pick % p.n();
        for k in 0..=6 {
            let a = survival_inclusion_exclusion(&p, c, k).unwrap();
            let b = survival_by_decomposition(&p, c, k).unwrap();
            prop_assert!((a - b).abs() < 1e-10);
        }
        let k_star = quantile(&p, c, delta).unwrap();
        prop_assert!(survival_inclusion_exclusion(&p, c, k_star).unwrap() <= delta);
        if k_star > 0 {
            prop_assert!(survival_inclusion_exclusion(&p, c, k_star - 1).unwrap() > delta);
        }
    }

    /// The expectation equals the survival series termwise to high accuracy.
    #[test]
    fn expectation_is_series_sum(p in float_dist_strategy(), c_pick in 0usize..6) {
        let c = 1 + c_pick % p.n();
        let closed = expectation(&p, c).unwrap();
        let curve = cct::exact::survival_curve(&p, c, 1e-13).unwrap();
        let series: f64 = curve.values().iter().sum::<f64>() + curve.tail_bound_at_k().to_f64();
        prop_assert!((closed - series).abs() < 1e-9);
    }
}
