//! Certify stochastic-order bounds between collection times: the almost
//! uniform sandwich from below, the floor-family extremal member from above,
//! and the matching expectation ordering.
//!
//! ```bash
//! cargo run -p cct --example stochastic_bounds
//! ```

use cct::exact::survival_curve;
use cct::ordering::{expectation_sandwich, stochastic_compare, verify_maximal, verify_sandwich};
use cct::probmodel::{CouponDistribution, ThetaFamily};

fn main() -> cct::Result<()> {
    let p: CouponDistribution<f64> = CouponDistribution::parse("0.5,0.3")?;
    let c = 2;

    // T(u) <= T(v) <= T(p): the uniform distribution collects fastest, and
    // spreading the null mass uniformly is second best.
    let (lower, upper) = verify_sandwich(&p, c, 1e-9)?;
    println!("uniform vs almost-uniform: {:?}", lower.relation);
    println!("almost-uniform vs p:       {:?}", upper.relation);

    let (eu, ev, ep) = expectation_sandwich(&p, c)?;
    println!("expectations: E[T(u)] = {eu:.6} <= E[T(v)] = {ev:.6} <= E[T(p)] = {ep:.6}");
    println!();

    // Within the floor family (every entry >= theta), the distribution that
    // parks all surplus on one signature is the stochastic maximum.
    let theta = 0.25;
    let verdict = verify_maximal(&p, &theta, c, 1e-9)?;
    println!(
        "p vs extremal member (theta = {theta}): {:?}",
        verdict.relation
    );

    let family = ThetaFamily::new(p.n(), *p.null_mass(), theta)?;
    let extremal = family.extremal_member(1)?;
    println!(
        "extremal member: ({}), gamma = {}",
        extremal
            .entries()
            .iter()
            .map(|e| format!("{e:.2}"))
            .collect::<Vec<_>>()
            .join(", "),
        family.gamma()
    );
    println!();

    // Raw verdicts are plain data, ready for CI consumption.
    let a = survival_curve(&p, c, 1e-10)?;
    let b = survival_curve(&extremal, c, 1e-10)?;
    let verdict = stochastic_compare(&a, &b, 1e-9)?;
    println!("verdict JSON: {}", serde_json::to_string(&verdict).unwrap());
    Ok(())
}
