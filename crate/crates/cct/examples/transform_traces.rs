//! Exact-arithmetic transform traces: drive a distribution down to the
//! almost uniform vector, and up to the extremal member of its floor family,
//! one two-entry mix at a time.
//!
//! ```bash
//! cargo run -p cct --example transform_traces
//! ```

use num_rational::BigRational;

use cct::probmodel::{
    maximize_trace, uniformize_trace_with_pairs, CouponDistribution, TransformTrace,
};

fn show(label: &str, trace: &TransformTrace<BigRational>) {
    println!("{label}");
    let fmt = |d: &CouponDistribution<BigRational>| {
        d.entries()
            .iter()
            .map(ToString::to_string)
            .collect::<Vec<_>>()
            .join(", ")
    };
    println!("  start: ({})", fmt(&trace.start));
    for (idx, step) in trace.steps.iter().enumerate() {
        println!(
            "  step {}: mix entries {} and {} with lambda = {}  ->  ({})",
            idx + 1,
            step.i,
            step.j,
            step.lambda,
            fmt(&step.result)
        );
    }
    println!();
}

fn main() -> cct::Result<()> {
    // Pin one entry per step to the per-entry mean (1 - p0)/n = 1/5. The
    // step order is free; the endpoint is always the uniform vector.
    let p: CouponDistribution<BigRational> = CouponDistribution::parse("1/16,1/6,1/4,1/8,19/48")?;
    let trace = uniformize_trace_with_pairs(&p, &[(4, 5), (2, 5), (1, 3), (3, 5)])?;
    show("uniformize (stochastically minimizing):", &trace);

    // Pin every other entry to the floor theta = 1/20; position 4 collects
    // the surplus gamma = 1 - p0 - (n-1) theta = 7/10.
    let p: CouponDistribution<BigRational> = CouponDistribution::parse("1/16,1/6,1/4,1/8,71/240")?;
    let theta = BigRational::new(1.into(), 20.into());
    let trace = maximize_trace(&p, &theta, 4)?;
    show("maximize (stochastically maximizing, floor 1/20):", &trace);
    Ok(())
}
