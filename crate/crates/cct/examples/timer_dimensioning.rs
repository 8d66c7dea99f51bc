//! Dimension a worst-case flush timer: the deadline is a quantile of the
//! slowest admissible distribution's collection time, so the miss rate is
//! bounded for the whole floor family at once.
//!
//! ```bash
//! cargo run -p cct --example timer_dimensioning
//! ```

use cct::exact::{expectation, quantile};
use cct::icebergsim::dimension_timer;
use cct::probmodel::{almost_uniform, ThetaFamily};

fn main() -> cct::Result<()> {
    let (n, c, theta, p0) = (2, 2, 0.25, 0.2);
    let family = ThetaFamily::new(n, p0, theta)?;
    let worst = family.extremal_member(1)?;
    let best = almost_uniform(n, &p0)?;

    println!("n = {n}, c = {c}, theta = {theta}, p0 = {p0}");
    println!(
        "fastest admissible router (almost uniform): E[T] = {:.4}",
        expectation(&best, c)?
    );
    println!(
        "slowest admissible router (extremal):       E[T] = {:.4}",
        expectation(&worst, c)?
    );
    println!();
    println!(
        "{:>10} {:>18} {:>22}",
        "delta", "worst-case k*", "almost-uniform k*"
    );
    for delta in [0.2, 0.1, 0.05, 0.01, 1e-3, 1e-6] {
        println!(
            "{delta:>10} {:>18} {:>22}",
            dimension_timer(n, c, theta, p0, delta)?,
            quantile(&best, c, delta)?,
        );
    }
    println!();
    println!("a timer set to the worst-case k* fires in at most a delta");
    println!("fraction of cycles under ANY distribution with entries >= theta");
    Ok(())
}
