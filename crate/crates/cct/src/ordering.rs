//! Stochastic dominance between survival curves, and randomized verification
//! suites for the structural claims the transforms rely on: two-entry mixing
//! never increases the collection time, the almost uniform vector minimizes
//! it, and the floor-family extremal members maximize it.
//!
//! "For all k" is certified finitely: curves are compared pointwise through
//! their truncations, and beyond them every value is below the recorded tail
//! bound, so dominance within `tol` is implied. A decided verdict records the
//! residual bound it relied on.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{expectation, quantile, survival_curve, SurvivalCurve};
use crate::probmodel::{
    almost_uniform, lambda_transform, uniformize_trace, CouponDistribution, ThetaFamily,
};
use crate::rng::SplitMix64;
use crate::scalar::Scalar;

/// Default pointwise tolerance for float-mode comparisons.
pub const DEFAULT_TOL: f64 = 1e-9;

/// How two survival curves relate under the strong stochastic order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    /// The left variable is stochastically smaller: left values never exceed
    /// right values by more than the tolerance.
    LeftStSmaller,
    RightStSmaller,
    Equal,
    /// Each side exceeds the other somewhere; `witness_k` holds the first
    /// violating index.
    Crossing,
    /// Truncation left a gray zone that prevents certification.
    Undecided,
}

/// Outcome of a curve comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DominanceVerdict {
    pub relation: Relation,
    pub witness_k: Option<u64>,
    pub checked_up_to: u64,
    pub residual_bound: f64,
}

impl DominanceVerdict {
    pub fn holds_left(&self) -> bool {
        matches!(self.relation, Relation::LeftStSmaller | Relation::Equal)
    }
}

/// Compares `Pr{T_a > k}` against `Pr{T_b > k}` for every `k`.
///
/// Pointwise checks run through the longer truncation; where one curve has
/// ended, its tail bound stands in for the unknown values. With `tol > 0`
/// both tails must already be below `tol` (`InsufficientTruncation`
/// otherwise). With `tol = 0` — exact rational comparisons — the verdict is
/// decided on the checked range and `residual_bound` reports what remains
/// beyond it.
pub fn stochastic_compare<S: Scalar>(
    a: &SurvivalCurve<S>,
    b: &SurvivalCurve<S>,
    tol: f64,
) -> Result<DominanceVerdict> {
    let tail_a = a.tail_bound_at_k().to_f64();
    let tail_b = b.tail_bound_at_k().to_f64();
    if tol > 0.0 {
        for residual in [tail_a, tail_b] {
            if residual >= tol {
                return Err(Error::InsufficientTruncation { residual, tol });
            }
        }
    }
    let last = a.truncation_k().max(b.truncation_k());
    // Per direction: the first k with a certain violation, and whether some k
    // could hide one behind a truncation (so the direction cannot be
    // certified clean either).
    let mut above_b = Violations::default(); // a exceeds b somewhere
    let mut above_a = Violations::default(); // b exceeds a somewhere
    for k in 0..=last {
        match (a.value(k), b.value(k)) {
            (Some(av), Some(bv)) => {
                let av = av.to_f64();
                let bv = bv.to_f64();
                above_b.observe(k, av > bv + tol, false);
                above_a.observe(k, bv > av + tol, false);
            }
            // One curve truncated: its value lies somewhere in [0, tail].
            (Some(av), None) => {
                let av = av.to_f64();
                above_b.observe(k, av > tail_b + tol, av > tol);
            }
            (None, Some(bv)) => {
                let bv = bv.to_f64();
                above_a.observe(k, bv > tail_a + tol, bv > tol);
            }
            (None, None) => {}
        }
    }
    // A side is certified clean only with no certain and no possible
    // violation; verdicts claim exactly what is certified.
    let relation = match (above_b.clean(), above_a.clean()) {
        (true, true) => Relation::Equal,
        (true, false) => Relation::LeftStSmaller,
        (false, true) => Relation::RightStSmaller,
        (false, false) => {
            if above_b.certain.is_some() && above_a.certain.is_some() {
                Relation::Crossing
            } else {
                Relation::Undecided
            }
        }
    };
    let witness_k = if relation == Relation::Crossing {
        above_b.certain.into_iter().chain(above_a.certain).min()
    } else {
        None
    };
    Ok(DominanceVerdict {
        relation,
        witness_k,
        checked_up_to: last,
        residual_bound: tail_a.max(tail_b),
    })
}

#[derive(Default)]
struct Violations {
    certain: Option<u64>,
    possible: bool,
}

impl Violations {
    fn observe(&mut self, k: u64, certain: bool, possible: bool) {
        if certain && self.certain.is_none() {
            self.certain = Some(k);
        }
        self.possible |= possible && !certain;
    }

    fn clean(&self) -> bool {
        self.certain.is_none() && !self.possible
    }
}

fn curve_pair<S: Scalar>(
    a: &CouponDistribution<S>,
    b: &CouponDistribution<S>,
    c: usize,
    tol: f64,
) -> Result<(SurvivalCurve<S>, SurvivalCurve<S>)> {
    // Truncate strictly below the comparison tolerance.
    let delta = if tol > 0.0 { tol / 2.0 } else { DEFAULT_TOL };
    Ok((survival_curve(a, c, delta)?, survival_curve(b, c, delta)?))
}

/// Checks that mixing entries `i` and `j` with weight `lambda` yields a
/// stochastically smaller collection time: expected `LeftStSmaller`, or
/// `Equal` when `lambda` is 0/1 or the entries already agree.
pub fn verify_lambda_transform<S: Scalar>(
    p: &CouponDistribution<S>,
    i: usize,
    j: usize,
    lambda: &S,
    c: usize,
    tol: f64,
) -> Result<DominanceVerdict> {
    let mixed = lambda_transform(p, i, j, lambda)?;
    let (curve_mixed, curve_original) = curve_pair(&mixed, p, c, tol)?;
    stochastic_compare(&curve_mixed, &curve_original, tol)
}

/// Checks the two-sided bound `T(u) <= T(v) <= T(p)` where `v` is the almost
/// uniform vector with `p`'s null mass and `u` is the null-free uniform.
/// Returns the `(u vs v, v vs p)` verdicts.
pub fn verify_sandwich<S: Scalar>(
    p: &CouponDistribution<S>,
    c: usize,
    tol: f64,
) -> Result<(DominanceVerdict, DominanceVerdict)> {
    let uniform = almost_uniform(p.n(), &S::zero())?;
    let almost = almost_uniform(p.n(), p.null_mass())?;
    let (curve_u, curve_v) = curve_pair(&uniform, &almost, c, tol)?;
    let curve_p = survival_curve(p, c, if tol > 0.0 { tol / 2.0 } else { DEFAULT_TOL })?;
    let lower = stochastic_compare(&curve_u, &curve_v, tol)?;
    let upper = stochastic_compare(&curve_v, &curve_p, tol)?;
    Ok((lower, upper))
}

/// Checks that every floor-family member is dominated by the extremal member
/// carrying all surplus mass in one entry: expected `LeftStSmaller` (curve of
/// `p` below curve of the extremal member), or `Equal` when `p` is extremal.
pub fn verify_maximal<S: Scalar>(
    p: &CouponDistribution<S>,
    theta: &S,
    c: usize,
    tol: f64,
) -> Result<DominanceVerdict> {
    for (idx, e) in p.entries().iter().enumerate() {
        if crate::scalar::strictly_below(e, theta) {
            return Err(Error::NotInFamily { index: idx + 1 });
        }
    }
    let family = ThetaFamily::new(p.n(), p.null_mass().clone(), theta.clone())?;
    let extremal = family.extremal_member(1)?;
    let (curve_p, curve_q) = curve_pair(p, &extremal, c, tol)?;
    stochastic_compare(&curve_p, &curve_q, tol)
}

/// `(E[T(u)], E[T(v)], E[T(p)])`, which must come out non-decreasing.
pub fn expectation_sandwich<S: Scalar>(p: &CouponDistribution<S>, c: usize) -> Result<(S, S, S)> {
    let uniform = almost_uniform(p.n(), &S::zero())?;
    let almost = almost_uniform(p.n(), p.null_mass())?;
    Ok((
        expectation(&uniform, c)?,
        expectation(&almost, c)?,
        expectation(p, c)?,
    ))
}

/// Result of one randomized verification suite.
#[derive(Debug, Clone, Serialize)]
pub struct SuiteOutcome {
    pub name: &'static str,
    pub instances: usize,
    pub failures: Vec<String>,
}

impl SuiteOutcome {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

fn random_distribution(rng: &mut SplitMix64, n: usize, null_mass: f64) -> CouponDistribution<f64> {
    let raw: Vec<f64> = (0..n).map(|_| 0.05 + rng.next_f64()).collect();
    let total: f64 = raw.iter().sum();
    let scale = (1.0 - null_mass) / total;
    CouponDistribution::validate(raw.iter().map(|x| x * scale).collect())
        .expect("generated entries are valid")
}

/// Mixing dominance on random `(p, i, j, lambda, c)` instances.
pub fn lambda_transform_suite(seed: u64, instances: usize, tol: f64) -> SuiteOutcome {
    let mut rng = SplitMix64::split(seed, 1);
    let mut failures = Vec::new();
    for trial in 0..instances {
        let n = 2 + rng.next_below(5) as usize;
        let null_mass = if rng.next_u64().is_multiple_of(2) {
            0.0
        } else {
            0.05 + 0.35 * rng.next_f64()
        };
        let p = random_distribution(&mut rng, n, null_mass);
        let i = 1 + rng.next_below(n as u64) as usize;
        let mut j = 1 + rng.next_below(n as u64) as usize;
        if j == i {
            j = if i == n { 1 } else { i + 1 };
        }
        let lambda = rng.next_f64();
        let c = 2 + rng.next_below(n as u64 - 1) as usize;
        match verify_lambda_transform(&p, i, j, &lambda, c, tol) {
            Ok(verdict) if verdict.holds_left() => {}
            Ok(verdict) => failures.push(format!(
                "trial {trial}: n={n} c={c} i={i} j={j} lambda={lambda:.6}: {:?} at k={:?}",
                verdict.relation, verdict.witness_k
            )),
            Err(err) => failures.push(format!("trial {trial}: error {err}")),
        }
    }
    SuiteOutcome {
        name: "lambda_transform_dominance",
        instances,
        failures,
    }
}

/// Stepwise dominance along full uniformizing traces: every step's curve must
/// sit below its predecessor's, and the composition reaches the almost
/// uniform endpoint.
pub fn uniformization_suite(seed: u64, instances: usize, tol: f64) -> SuiteOutcome {
    let mut rng = SplitMix64::split(seed, 2);
    let mut failures = Vec::new();
    for trial in 0..instances {
        let n = 2 + rng.next_below(5) as usize;
        let null_mass = if rng.next_u64().is_multiple_of(2) {
            0.0
        } else {
            0.05 + 0.35 * rng.next_f64()
        };
        let p = random_distribution(&mut rng, n, null_mass);
        let c = 2 + rng.next_below(n as u64 - 1) as usize;
        let trace = uniformize_trace(&p);
        let mut previous = p.clone();
        for (step_no, step) in trace.steps.iter().enumerate() {
            let pair = curve_pair(&step.result, &previous, c, tol)
                .and_then(|(sc, pc)| stochastic_compare(&sc, &pc, tol));
            match pair {
                Ok(verdict) if verdict.holds_left() => {}
                Ok(verdict) => failures.push(format!(
                    "trial {trial} step {step_no}: {:?} at k={:?}",
                    verdict.relation, verdict.witness_k
                )),
                Err(err) => failures.push(format!("trial {trial} step {step_no}: error {err}")),
            }
            previous = step.result.clone();
        }
        let target = almost_uniform(p.n(), p.null_mass()).expect("valid target");
        let endpoint = trace.final_distribution();
        let off = endpoint
            .entries()
            .iter()
            .zip(target.entries())
            .any(|(a, b)| (a - b).abs() > 1e-12);
        if off {
            failures.push(format!(
                "trial {trial}: endpoint {endpoint:?} is not almost uniform"
            ));
        }
    }
    SuiteOutcome {
        name: "uniformize_stepwise_dominance",
        instances,
        failures,
    }
}

/// Sandwich bound on random instances with positive null mass.
pub fn sandwich_suite(seed: u64, instances: usize, tol: f64) -> SuiteOutcome {
    let mut rng = SplitMix64::split(seed, 3);
    let mut failures = Vec::new();
    for trial in 0..instances {
        let n = 2 + rng.next_below(4) as usize;
        let null_mass = 0.05 + 0.45 * rng.next_f64();
        let p = random_distribution(&mut rng, n, null_mass);
        let c = 1 + rng.next_below(n as u64) as usize;
        match verify_sandwich(&p, c, tol) {
            Ok((lower, upper)) => {
                if !lower.holds_left() {
                    failures.push(format!(
                        "trial {trial}: uniform vs almost-uniform {:?} at k={:?}",
                        lower.relation, lower.witness_k
                    ));
                }
                if !upper.holds_left() {
                    failures.push(format!(
                        "trial {trial}: almost-uniform vs p {:?} at k={:?}",
                        upper.relation, upper.witness_k
                    ));
                }
            }
            Err(err) => failures.push(format!("trial {trial}: error {err}")),
        }
    }
    SuiteOutcome {
        name: "almost_uniform_sandwich",
        instances,
        failures,
    }
}

/// Extremal-member dominance over random floor-family members with random
/// feasible floors.
pub fn maximal_suite(seed: u64, instances: usize, tol: f64) -> SuiteOutcome {
    let mut rng = SplitMix64::split(seed, 4);
    let mut failures = Vec::new();
    for trial in 0..instances {
        let n = 2 + rng.next_below(5) as usize;
        let null_mass = if rng.next_u64().is_multiple_of(2) {
            0.0
        } else {
            0.05 + 0.3 * rng.next_f64()
        };
        // Feasible floor, bounded away from the collapse point.
        let share = (1.0 - null_mass) / n as f64;
        let theta = share * (0.2 + 0.7 * rng.next_f64());
        // Random member: floor plus a random split of the leftover mass.
        let weights: Vec<f64> = (0..n).map(|_| rng.next_f64() + 0.01).collect();
        let weight_total: f64 = weights.iter().sum();
        let leftover = 1.0 - null_mass - n as f64 * theta;
        let entries: Vec<f64> = weights
            .iter()
            .map(|w| theta + leftover * w / weight_total)
            .collect();
        let p = CouponDistribution::validate(entries).expect("generated entries are valid");
        let c = 1 + rng.next_below(n as u64) as usize;
        match verify_maximal(&p, &theta, c, tol) {
            Ok(verdict) if verdict.holds_left() => {}
            Ok(verdict) => failures.push(format!(
                "trial {trial}: n={n} c={c} theta={theta:.6}: {:?} at k={:?}",
                verdict.relation, verdict.witness_k
            )),
            Err(err) => failures.push(format!("trial {trial}: error {err}")),
        }
    }
    SuiteOutcome {
        name: "extremal_member_maximality",
        instances,
        failures,
    }
}

/// Expectation ordering `E[T(u)] <= E[T(v)] <= E[T(p)]` on random instances.
pub fn expectation_suite(seed: u64, instances: usize) -> SuiteOutcome {
    let mut rng = SplitMix64::split(seed, 5);
    let mut failures = Vec::new();
    for trial in 0..instances {
        let n = 2 + rng.next_below(4) as usize;
        let null_mass = 0.05 + 0.4 * rng.next_f64();
        let p = random_distribution(&mut rng, n, null_mass);
        let c = 1 + rng.next_below(n as u64) as usize;
        match expectation_sandwich(&p, c) {
            Ok((eu, ev, ep)) => {
                if eu > ev + 1e-9 || ev > ep + 1e-9 {
                    failures.push(format!("trial {trial}: {eu} <= {ev} <= {ep} fails"));
                }
            }
            Err(err) => failures.push(format!("trial {trial}: error {err}")),
        }
    }
    SuiteOutcome {
        name: "expectation_sandwich",
        instances,
        failures,
    }
}

/// The full randomized verification battery with the canonical sizes.
pub fn run_all_suites(seed: u64, tol: f64) -> Vec<SuiteOutcome> {
    vec![
        lambda_transform_suite(seed, 200, tol),
        uniformization_suite(seed, 50, tol),
        sandwich_suite(seed, 100, tol),
        maximal_suite(seed, 100, tol),
        expectation_suite(seed, 100),
    ]
}

/// Worst-case flush deadline: the delta-quantile of the extremal member's
/// collection time. Under any distribution of the floor family, the chance of
/// not finishing a collection within the returned number of draws is at most
/// `delta`.
pub fn worst_case_quantile<S: Scalar>(
    family: &ThetaFamily<S>,
    c: usize,
    delta: f64,
) -> Result<u64> {
    quantile(&family.extremal_member(1)?, c, delta)
}
