//! Evaluate the collection-time survival function along every route the
//! crate offers and show they agree.
//!
//! ```bash
//! cargo run -p cct --example survival_curves
//! ```

use cct::exact::{
    survival_by_compositions, survival_by_decomposition, survival_curve,
    survival_inclusion_exclusion,
};
use cct::oracle::{survival_enumeration, survival_markov};
use cct::probmodel::CouponDistribution;

fn main() -> cct::Result<()> {
    // Two coupons at 0.5/0.3; the remaining 0.2 is null traffic that never
    // joins a collection.
    let p: CouponDistribution<f64> = CouponDistribution::parse("0.5,0.3")?;
    let c = 2;

    println!(
        "p = (0.5, 0.3), p0 = {:.1}, collecting c = {c}",
        p.null_mass()
    );
    println!();
    println!(
        "{:>3} {:>12} {:>12} {:>12} {:>12} {:>12}",
        "k", "subset-sum", "compositions", "decomposed", "chain", "enumeration"
    );
    for k in 0..=8 {
        println!(
            "{k:>3} {:>12.8} {:>12.8} {:>12.8} {:>12.8} {:>12.8}",
            survival_inclusion_exclusion(&p, c, k)?,
            survival_by_compositions(&p, c, k)?,
            survival_by_decomposition(&p, c, k)?,
            survival_markov(&p, c, k)?,
            survival_enumeration(&p, c, k)?,
        );
    }

    // The adaptive curve truncates itself once the remaining tail is
    // certified below the requested resolution.
    let curve = survival_curve(&p, c, 1e-9)?;
    println!();
    println!(
        "adaptive curve: {} points, tail rate {}, residual {:.2e}",
        curve.values().len(),
        curve.tail_rate(),
        curve.tail_bound_at_k()
    );
    println!();
    print!(
        "{}",
        curve
            .to_csv()
            .lines()
            .take(6)
            .collect::<Vec<_>>()
            .join("\n")
    );
    println!("\n...");
    Ok(())
}
