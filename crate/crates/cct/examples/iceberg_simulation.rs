//! Full iceberg-monitoring scenario: a fleet of routers watches balanced
//! traffic, a dimensioned flush timer bounds reporting delay, and halfway
//! through the run a burst is injected that the aggregation server must
//! detect.
//!
//! ```bash
//! cargo run -p cct --example iceberg_simulation
//! ```

use cct::exact::survival_curve;
use cct::icebergsim::{
    dimension_timer, empirical_vs_theory, run_simulation, InjectionSpec, RouterSpec, SimConfig,
};
use cct::probmodel::almost_uniform;

fn main() -> cct::Result<()> {
    // Three signatures clear the local floor theta; 70% of each stream is
    // sub-threshold noise lumped into the null symbol.
    let (n, c, theta, p0) = (3, 3, 0.05, 0.7);
    let deadline = dimension_timer(n, c, theta, p0, 0.05)?;
    println!("flush deadline for a 5% miss rate: {deadline} slots");

    let uniform_router = RouterSpec {
        preset: Some("uniform".into()),
        j: None,
        entries: None,
        timer_k: Some(deadline),
    };
    let config = SimConfig {
        n,
        c,
        theta,
        p0,
        routers: vec![uniform_router.clone(); 8],
        horizon: 40_000,
        seed: 7,
        global_threshold: 0.6,
        // At slot 20000 every router sees signature 2 surge: 0.6 of its null
        // traffic turns into requests for it, pushing its share of counted
        // traffic toward 0.78 — an iceberg invisible to any single cycle.
        injection: Some(InjectionSpec {
            slot: 20_000,
            signature: 2,
            boost: 0.6,
            routers: (0..8).collect(),
        }),
    };

    let report = run_simulation(&config)?;
    let cycles: usize = report.inter_flush_samples.iter().map(Vec::len).sum();
    let mean = report.inter_flush_samples.iter().flatten().sum::<u64>() as f64 / cycles as f64;
    println!("{cycles} collection cycles, mean inter-flush {mean:.2} slots");
    println!(
        "messages: {}, timer firings: {} ({:.2}% of cycles)",
        report.message_count,
        report.timer_firings,
        100.0 * report.timer_firings as f64 / cycles as f64
    );
    println!("alarm slots: {:?}", report.alarm_slots);
    println!(
        "detection latency (slots after injection): {:?}",
        report.detection_latencies
    );

    // Sanity: without a timer, uniform-router cycles follow the almost
    // uniform collection-time law exactly.
    let mut timer_free = config.clone();
    timer_free.routers = vec![RouterSpec {
        preset: Some("uniform".into()),
        j: None,
        entries: None,
        timer_k: None,
    }];
    timer_free.injection = None;
    timer_free.horizon = 400_000;
    let clean = run_simulation(&timer_free)?;
    let v = almost_uniform(n, &p0)?;
    let curve = survival_curve(&v, c, 1e-9)?;
    println!(
        "timer-free uniform router vs exact curve: sup distance {:.5}",
        empirical_vs_theory(&clean, &curve)?
    );
    Ok(())
}
