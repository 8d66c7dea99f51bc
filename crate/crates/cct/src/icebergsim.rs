//! Slot-synchronous simulation of distributed iceberg monitoring.
//!
//! Routers watch their local request streams. Requests rarer than the floor
//! `theta` are lumped into the null symbol with total probability `p0`; the
//! `n` remaining signatures each occur with probability at least `theta`. A
//! router accumulates distinct signatures and flushes its counts to the
//! aggregation server once it holds `c` of them — or when a flush timer
//! expires, in which case the partial collection is sent so the server's view
//! stays complete. The server accumulates counts over the whole run and
//! raises an alarm the first time a signature's share of everything received
//! reaches `global_threshold`.
//!
//! Per-cycle flush times are exactly the collection times studied in
//! [`crate::exact`], which is what makes worst-case timer dimensioning
//! possible: [`dimension_timer`] picks the deadline as a quantile of the
//! floor-family extremal member, so under any admissible local distribution
//! the timer fires in at most a `delta` fraction of cycles.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::SurvivalCurve;
use crate::oracle::CollectionSampler;
use crate::ordering::worst_case_quantile;
use crate::probmodel::{almost_uniform, CouponDistribution, ThetaFamily};
use crate::rng::SplitMix64;

/// One router's resolved configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RouterConfig {
    pub distribution: CouponDistribution<f64>,
    pub collection_size: usize,
    /// Slots before a forced partial flush; `None` disables the timer.
    pub timer_k: Option<u64>,
}

/// Router entry as it appears in a config file: either a preset or explicit
/// entries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RouterSpec {
    /// `"uniform"` (almost uniform) or `"extremal"` (floor-family member).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    /// Position receiving the surplus mass for the `"extremal"` preset.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub j: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub entries: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timer_k: Option<u64>,
}

/// An injected iceberg: at `slot`, the listed routers move `boost` mass from
/// their sub-threshold noise onto `signature`, so a previously inconspicuous
/// request becomes locally frequent without disturbing the other entries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InjectionSpec {
    pub slot: u64,
    /// 1-based signature position.
    pub signature: usize,
    /// Probability mass moved from the null symbol onto the signature.
    pub boost: f64,
    /// 0-based indices into `routers`.
    pub routers: Vec<usize>,
}

/// Scenario description, readable from JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub n: usize,
    pub c: usize,
    pub theta: f64,
    pub p0: f64,
    pub routers: Vec<RouterSpec>,
    pub horizon: u64,
    pub seed: u64,
    pub global_threshold: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub injection: Option<InjectionSpec>,
}

impl SimConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::ConfigInvalid(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Resolves presets and validates every cross-field constraint.
    pub fn resolve(&self) -> Result<Vec<RouterConfig>> {
        let bad = |msg: String| Error::ConfigInvalid(msg);
        if self.horizon < 1 {
            return Err(bad("horizon must be at least 1".into()));
        }
        if !(self.global_threshold > 0.0 && self.global_threshold < 1.0) {
            return Err(bad(format!(
                "global_threshold must lie in (0, 1), got {}",
                self.global_threshold
            )));
        }
        if self.routers.is_empty() {
            return Err(bad("at least one router is required".into()));
        }
        if self.c == 0 || self.c > self.n {
            return Err(bad(format!("c={} must lie in 1..={}", self.c, self.n)));
        }
        // Validates theta in (0, (1-p0)/n] as a side effect.
        let family = ThetaFamily::new(self.n, self.p0, self.theta)
            .map_err(|e| bad(format!("theta/p0: {e}")))?;
        let mut resolved = Vec::with_capacity(self.routers.len());
        for (idx, spec) in self.routers.iter().enumerate() {
            let distribution = match (&spec.preset, &spec.entries) {
                (Some(name), None) if name == "uniform" => almost_uniform(self.n, &self.p0)
                    .map_err(|e| bad(format!("router {idx}: {e}")))?,
                (Some(name), None) if name == "extremal" => family
                    .extremal_member(spec.j.unwrap_or(1))
                    .map_err(|e| bad(format!("router {idx}: {e}")))?,
                (Some(name), None) => {
                    return Err(bad(format!(
                    "router {idx}: unknown preset {name:?} (expected \"uniform\" or \"extremal\")"
                )))
                }
                (None, Some(entries)) => {
                    let dist = CouponDistribution::validate(entries.clone())
                        .map_err(|e| bad(format!("router {idx}: {e}")))?;
                    if dist.n() != self.n {
                        return Err(bad(format!(
                            "router {idx}: {} entries for n={}",
                            dist.n(),
                            self.n
                        )));
                    }
                    if (dist.null_mass() - self.p0).abs() > 1e-9 {
                        return Err(bad(format!(
                            "router {idx}: entries imply p0={}, scenario says {}",
                            dist.null_mass(),
                            self.p0
                        )));
                    }
                    dist
                }
                _ => {
                    return Err(bad(format!(
                        "router {idx}: give exactly one of preset or entries"
                    )))
                }
            };
            // Frequent signatures must clear the floor.
            for (pos, entry) in distribution.entries().iter().enumerate() {
                if *entry < self.theta - 1e-12 {
                    return Err(bad(format!(
                        "router {idx}: entry {} = {entry} is below theta = {}",
                        pos + 1,
                        self.theta
                    )));
                }
            }
            if spec.timer_k == Some(0) {
                return Err(bad(format!("router {idx}: timer_k must be positive")));
            }
            resolved.push(RouterConfig {
                distribution,
                collection_size: self.c,
                timer_k: spec.timer_k,
            });
        }
        if let Some(injection) = &self.injection {
            if injection.signature == 0 || injection.signature > self.n {
                return Err(bad(format!(
                    "injection: signature {} out of range 1..={}",
                    injection.signature, self.n
                )));
            }
            if injection.slot < 1 || injection.slot > self.horizon {
                return Err(bad("injection: slot outside the horizon".into()));
            }
            for &target in &injection.routers {
                if target >= resolved.len() {
                    return Err(bad(format!(
                        "injection: router index {target} out of range"
                    )));
                }
                let available = *resolved[target].distribution.null_mass();
                if injection.boost <= 0.0 || injection.boost > available - 1e-12 {
                    return Err(bad(format!(
                        "injection: boost {} must come out of router {target}'s null mass {}",
                        injection.boost, available
                    )));
                }
            }
        }
        Ok(resolved)
    }
}

/// What a run produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimReport {
    /// Completed collection cycles per router, in slots.
    pub inter_flush_samples: Vec<Vec<u64>>,
    /// Flushes forced by timer expiry, across all routers.
    pub timer_firings: u64,
    /// First slot each signature's aggregate share reached the threshold.
    pub alarm_slots: Vec<u64>,
    /// Total flushes sent to the server.
    pub message_count: u64,
    /// Alarm slot minus injection slot, for the injected signature.
    pub detection_latencies: Vec<u64>,
}

impl SimReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::ConfigInvalid(e.to_string()))
    }

    /// CSV rows `router,sample` of all completed cycles.
    pub fn samples_to_csv(&self) -> String {
        let mut out = String::from("router,sample\n");
        for (router, samples) in self.inter_flush_samples.iter().enumerate() {
            for sample in samples {
                out.push_str(&format!("{router},{sample}\n"));
            }
        }
        out
    }
}

/// Worst-case flush deadline: the `delta`-quantile of the collection time of
/// the floor-family extremal member. Under any admissible distribution the
/// probability of no flush within the returned number of slots is at most
/// `delta`.
pub fn dimension_timer(n: usize, c: usize, theta: f64, p0: f64, delta: f64) -> Result<u64> {
    let family = ThetaFamily::new(n, p0, theta)?;
    worst_case_quantile(&family, c, delta)
}

struct RouterState {
    sampler: CollectionSampler,
    rng: SplitMix64,
    tally: Vec<u64>,
    distinct: usize,
    slots_since_flush: u64,
}

/// Runs the scenario; one draw per router per slot, all randomness derived
/// from the seed (router `i` owns stream `(seed, i)`).
pub fn run_simulation(config: &SimConfig) -> Result<SimReport> {
    let routers = config.resolve()?;
    let mut states: Vec<RouterState> = routers
        .iter()
        .enumerate()
        .map(|(idx, router)| {
            Ok(RouterState {
                sampler: CollectionSampler::new(&router.distribution, router.collection_size)?,
                rng: SplitMix64::split(config.seed, idx as u64),
                tally: vec![0; config.n],
                distinct: 0,
                slots_since_flush: 0,
            })
        })
        .collect::<Result<_>>()?;

    // Post-injection distributions, precomputed.
    let injected: Vec<Option<CollectionSampler>> = match &config.injection {
        Some(injection) => routers
            .iter()
            .enumerate()
            .map(|(idx, router)| {
                if !injection.routers.contains(&idx) {
                    return Ok(None);
                }
                let mut entries = router.distribution.entries().to_vec();
                entries[injection.signature - 1] += injection.boost;
                let boosted = CouponDistribution::validate(entries)
                    .map_err(|e| Error::ConfigInvalid(format!("injection: {e}")))?;
                Ok(Some(CollectionSampler::new(
                    &boosted,
                    router.collection_size,
                )?))
            })
            .collect::<Result<_>>()?,
        None => vec![None; routers.len()],
    };

    let mut report = SimReport {
        inter_flush_samples: vec![Vec::new(); routers.len()],
        timer_firings: 0,
        alarm_slots: Vec::new(),
        message_count: 0,
        detection_latencies: Vec::new(),
    };
    let mut server_counts = vec![0u64; config.n];
    let mut server_total = 0u64;
    let mut alarmed = vec![false; config.n];

    for slot in 1..=config.horizon {
        for (idx, state) in states.iter_mut().enumerate() {
            if let Some(injection) = &config.injection {
                if slot == injection.slot {
                    if let Some(sampler) = &injected[idx] {
                        state.sampler = sampler.clone();
                    }
                }
            }
            let symbol = state.sampler.draw(&mut state.rng);
            state.slots_since_flush += 1;
            if symbol > 0 {
                if state.tally[symbol - 1] == 0 {
                    state.distinct += 1;
                }
                state.tally[symbol - 1] += 1;
            }
            let complete = state.distinct >= routers[idx].collection_size;
            let expired = routers[idx]
                .timer_k
                .is_some_and(|deadline| state.slots_since_flush >= deadline);
            if !complete && !expired {
                continue;
            }
            // Flush: completed collections and timer-forced partials both
            // send their tallies, so every non-null draw reaches the server
            // exactly once.
            report.inter_flush_samples[idx].push(state.slots_since_flush);
            report.message_count += 1;
            if !complete {
                report.timer_firings += 1;
            }
            for (sig, tally) in state.tally.iter_mut().enumerate() {
                if *tally == 0 {
                    continue;
                }
                server_counts[sig] += *tally;
                server_total += *tally;
                *tally = 0;
            }
            for sig in 0..config.n {
                if alarmed[sig] || server_counts[sig] == 0 {
                    continue;
                }
                let share = server_counts[sig] as f64 / server_total as f64;
                if share >= config.global_threshold {
                    alarmed[sig] = true;
                    report.alarm_slots.push(slot);
                    if let Some(injection) = &config.injection {
                        if sig + 1 == injection.signature && slot >= injection.slot {
                            report.detection_latencies.push(slot - injection.slot);
                        }
                    }
                }
            }
            state.distinct = 0;
            state.slots_since_flush = 0;
        }
    }
    Ok(report)
}

/// Kolmogorov–Smirnov-style sup distance between the empirical survival of
/// the report's pooled inter-flush samples and a reference curve. Meant for
/// timer-free runs, where cycles are exactly collection times.
pub fn empirical_vs_theory(report: &SimReport, curve: &SurvivalCurve<f64>) -> Result<f64> {
    let total: usize = report.inter_flush_samples.iter().map(Vec::len).sum();
    if total < 100 {
        return Err(Error::TooFewSamples {
            needed: 100,
            got: total,
        });
    }
    let k_max = curve.truncation_k();
    // exceeding[k] counts samples strictly greater than k.
    let mut histogram = vec![0u64; k_max as usize + 2];
    for samples in &report.inter_flush_samples {
        for &sample in samples {
            histogram[sample.min(k_max + 1) as usize] += 1;
        }
    }
    let mut exceeding = total as u64;
    let mut sup = 0.0f64;
    for k in 0..=k_max {
        if k > 0 {
            exceeding -= histogram[k as usize];
        }
        let empirical = exceeding as f64 / total as f64;
        let theoretical = curve.value(k).copied().unwrap_or(0.0);
        sup = sup.max((empirical - theoretical).abs());
    }
    Ok(sup)
}
