//! Monte-Carlo estimation of handover latency, hop delay, packet density and
//! packet loss.
//!
//! A replication first simulates one node's M/M/1 queue fed by Poisson data
//! arrivals (Lindley recursion over `arrivals_per_run` packets). The
//! technique's handover messages are then walked leg by leg: each leg draws
//! a link delay uniform on `mean * (1 +/- jitter)` and, at every hop, the
//! message waits behind the queue's virtual workload at an independent random
//! probe instant before its own exponential service. With packet density
//! ratio `k`, each message is lost with probability `k` and resent, so the
//! expected latency scales with `1 / (1 - k)`. Data packets that arrive
//! while the handover is in progress are counted as lost.
//!
//! Replication `r` draws from `ChaCha8Rng::seed_from_u64(seed)` on stream
//! `r`, so results do not depend on how replications are spread over
//! workers.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};
use rayon::prelude::*;
use thiserror::Error;

use crate::scenario::{handover_legs, FormulaMode, Leg};
use crate::technique::Technique;
use crate::topology::{Topology, TopologyError};

/// Recorded in experiment metadata.
pub const RNG_ALGORITHM: &str = "ChaCha8Rng::seed_from_u64(seed), set_stream(replication)";

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "FLOWMOB_THREADS";

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("invalid simulation config: {field} {reason}")]
    InvalidConfig { field: &'static str, reason: String },
    #[error(transparent)]
    Topology(#[from] TopologyError),
    #[error("cannot start worker pool: {0}")]
    Pool(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    /// Poisson data arrival rate (packets/s).
    pub arrival_rate: f64,
    /// Per-node exponential service rate (packets/s).
    pub service_rate: f64,
    pub delay_means: Topology,
    /// Link delays are uniform on `mean * [1 - jitter, 1 + jitter]`.
    pub jitter: f64,
    pub arrivals_per_run: usize,
    pub replications: usize,
    pub seed: u64,
    pub technique: Technique,
    /// Packet density ratio K / K_max, the per-message loss probability.
    pub density_ratio: f64,
    pub formula_mode: FormulaMode,
    /// Worker threads; `None` falls back to `FLOWMOB_THREADS`, then to all cores.
    pub workers: Option<usize>,
}

impl SimConfig {
    pub fn new(technique: Technique) -> Self {
        SimConfig {
            arrival_rate: 100.0,
            service_rate: 150.0,
            delay_means: Topology::default(),
            jitter: 0.5,
            arrivals_per_run: 10_000,
            replications: 1000,
            seed: 0,
            technique,
            density_ratio: 0.0,
            formula_mode: FormulaMode::Verbatim,
            workers: None,
        }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |field, reason: &str| {
            Err(SimError::InvalidConfig {
                field,
                reason: reason.to_string(),
            })
        };
        if !(self.arrival_rate >= 0.0 && self.arrival_rate.is_finite()) {
            return bad("arrival_rate", "must be finite and non-negative");
        }
        if !(self.service_rate > 0.0 && self.service_rate.is_finite()) {
            return bad("service_rate", "must be finite and positive");
        }
        if self.arrival_rate >= self.service_rate {
            return bad("arrival_rate", "must be below service_rate");
        }
        if !(0.0..1.0).contains(&self.jitter) {
            return bad("jitter", "must lie in [0, 1)");
        }
        if !(0.0..1.0).contains(&self.density_ratio) {
            return bad("density_ratio", "must lie in [0, 1)");
        }
        if self.replications == 0 {
            return bad("replications", "must be at least 1");
        }
        if self.workers == Some(0) {
            return bad("workers", "must be at least 1");
        }
        self.delay_means.validate()?;
        Ok(())
    }
}

/// Outcome of one replication.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunSample {
    pub latency_ms: f64,
    /// Link (propagation) part of the latency.
    pub link_delay_ms: f64,
    /// Queueing plus service part of the latency.
    pub service_delay_ms: f64,
    pub hops: u32,
    pub hop_delay_ms: f64,
    /// Message transmissions including resends.
    pub transmissions: u32,
    /// Data packets that arrived during the handover.
    pub packets_in_window: u64,
    pub packet_density: f64,
    /// Time-average number of packets at the simulated node.
    pub mean_queue_occupancy: f64,
}

/// 95% normal-approximation half-widths.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ci95 {
    pub latency_ms: f64,
    pub hop_delay_ms: f64,
    pub packet_density: f64,
    pub packets_lost: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimResult {
    pub mean_handover_latency: f64,
    pub mean_hop_delay: f64,
    pub packet_density: f64,
    pub packets_lost: f64,
    pub mean_queue_occupancy: f64,
    pub replications: usize,
    /// `None` for a single replication.
    pub ci95: Option<Ci95>,
}

/// Running mean and squared deviations (Welford), mergeable (Chan et al.).
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Moments {
    n: u64,
    mean: f64,
    m2: f64,
}

impl Moments {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    pub fn merge(&self, other: &Moments) -> Moments {
        if self.n == 0 {
            return *other;
        }
        if other.n == 0 {
            return *self;
        }
        let n = self.n + other.n;
        let d = other.mean - self.mean;
        Moments {
            n,
            mean: self.mean + d * other.n as f64 / n as f64,
            m2: self.m2 + other.m2 + d * d * (self.n as f64 * other.n as f64) / n as f64,
        }
    }

    pub fn count(&self) -> u64 {
        self.n
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn sample_variance(&self) -> Option<f64> {
        (self.n > 1).then(|| self.m2 / (self.n - 1) as f64)
    }

    pub fn ci95(&self) -> Option<f64> {
        self.sample_variance()
            .map(|v| 1.96 * (v / self.n as f64).sqrt())
    }
}

/// One node's queue over a replication: arrival instants and the workload
/// just after each arrival (that packet's sojourn time), in ms.
struct NodeQueue {
    arrivals: Vec<f64>,
    workload: Vec<f64>,
    horizon: f64,
}

impl NodeQueue {
    fn simulate(lambda: f64, mu: f64, n: usize, rng: &mut ChaCha8Rng) -> Self {
        if lambda == 0.0 {
            return NodeQueue {
                arrivals: Vec::new(),
                workload: Vec::new(),
                horizon: 0.0,
            };
        }
        let mut arrivals = Vec::with_capacity(n);
        let mut workload = Vec::with_capacity(n);
        let (mut t, mut w) = (0.0f64, 0.0f64);
        for _ in 0..n {
            let gap = exp_ms(rng, lambda);
            t += gap;
            w = (w - gap).max(0.0) + exp_ms(rng, mu);
            arrivals.push(t);
            workload.push(w);
        }
        NodeQueue {
            arrivals,
            workload,
            horizon: t,
        }
    }

    /// Work an arrival at `t` would find ahead of it.
    fn virtual_wait(&self, t: f64) -> f64 {
        match self.arrivals.partition_point(|&a| a <= t) {
            0 => 0.0,
            i => (self.workload[i - 1] - (t - self.arrivals[i - 1])).max(0.0),
        }
    }

    fn arrivals_between(&self, from: f64, to: f64) -> u64 {
        let lo = self.arrivals.partition_point(|&a| a < from);
        let hi = self.arrivals.partition_point(|&a| a <= to);
        (hi - lo) as u64
    }

    fn mean_occupancy(&self) -> f64 {
        if self.horizon > 0.0 {
            self.workload.iter().sum::<f64>() / self.horizon
        } else {
            0.0
        }
    }
}

/// Exponential draw with `rate` per second, in milliseconds.
#[inline]
fn exp_ms(rng: &mut ChaCha8Rng, rate: f64) -> f64 {
    let e: f64 = Exp1.sample(rng);
    1e3 * e / rate
}

#[inline]
fn jittered(rng: &mut ChaCha8Rng, mean: f64, jitter: f64) -> f64 {
    if jitter == 0.0 || mean == 0.0 {
        mean
    } else {
        rng.random_range(mean * (1.0 - jitter)..=mean * (1.0 + jitter))
    }
}

fn replication_rng(seed: u64, replication: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replication as u64);
    rng
}

/// Runs replication `replication` of `config`.
pub fn simulate_once(config: &SimConfig, replication: usize) -> Result<RunSample, SimError> {
    config.validate()?;
    let legs = handover_legs(config.technique, &config.delay_means, config.formula_mode);
    Ok(sample(config, &legs, replication))
}

fn sample(config: &SimConfig, legs: &[Leg], replication: usize) -> RunSample {
    let mut rng = replication_rng(config.seed, replication);
    let queue = NodeQueue::simulate(
        config.arrival_rate,
        config.service_rate,
        config.arrivals_per_run,
        &mut rng,
    );
    // Start after the empty-queue warm-up.
    let start = if queue.horizon > 0.0 {
        queue.horizon * rng.random_range(0.25..0.5)
    } else {
        0.0
    };

    let (mut link, mut service) = (0.0, 0.0);
    let mut transmissions = 0;
    for leg in legs {
        loop {
            transmissions += 1;
            link += jittered(&mut rng, leg.delay_ms, config.jitter);
            for _ in 0..leg.hops {
                let probe = queue.horizon * rng.random::<f64>();
                service += queue.virtual_wait(probe) + exp_ms(&mut rng, config.service_rate);
            }
            if config.density_ratio == 0.0 || rng.random::<f64>() >= config.density_ratio {
                break;
            }
        }
    }

    let hops: u32 = legs.iter().map(|l| l.hops).sum();
    let latency = link + service;
    let in_window = queue.arrivals_between(start, start + latency);
    RunSample {
        latency_ms: latency,
        link_delay_ms: link,
        service_delay_ms: service,
        hops,
        hop_delay_ms: latency / f64::from(hops),
        transmissions,
        packets_in_window: in_window,
        packet_density: in_window as f64 / f64::from(hops),
        mean_queue_occupancy: queue.mean_occupancy(),
    }
}

/// Worker count from `configured`, else `FLOWMOB_THREADS`.
pub fn resolve_workers(configured: Option<usize>) -> Option<usize> {
    configured.or_else(|| {
        std::env::var(THREADS_ENV)
            .ok()
            .and_then(|v| v.trim().parse::<usize>().ok())
            .filter(|n| *n > 0)
    })
}

/// Runs `work` on a pool of `workers` threads, or on the global pool.
pub fn with_workers<T: Send>(
    workers: Option<usize>,
    work: impl FnOnce() -> T + Send,
) -> Result<T, SimError> {
    match workers {
        Some(n) => Ok(rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| SimError::Pool(e.to_string()))?
            .install(work)),
        None => Ok(work()),
    }
}

/// Runs all replications and aggregates them.
pub fn run_campaign(config: &SimConfig) -> Result<SimResult, SimError> {
    config.validate()?;
    with_workers(resolve_workers(config.workers), || campaign(config))
}

/// Campaign on whatever pool is current; `config` must be valid.
pub(crate) fn campaign(config: &SimConfig) -> SimResult {
    let legs = handover_legs(config.technique, &config.delay_means, config.formula_mode);
    let samples: Vec<RunSample> = (0..config.replications)
        .into_par_iter()
        .map(|r| sample(config, &legs, r))
        .collect();
    aggregate(&samples)
}

/// Folds samples in replication order, so the result is bit-identical for
/// any worker count.
pub fn aggregate(samples: &[RunSample]) -> SimResult {
    let mut latency = Moments::default();
    let mut hop = Moments::default();
    let mut density = Moments::default();
    let mut lost = Moments::default();
    let mut occupancy = Moments::default();
    for s in samples {
        latency.push(s.latency_ms);
        hop.push(s.hop_delay_ms);
        density.push(s.packet_density);
        lost.push(s.packets_in_window as f64);
        occupancy.push(s.mean_queue_occupancy);
    }
    let ci95 = match (latency.ci95(), hop.ci95(), density.ci95(), lost.ci95()) {
        (Some(l), Some(h), Some(d), Some(p)) => Some(Ci95 {
            latency_ms: l,
            hop_delay_ms: h,
            packet_density: d,
            packets_lost: p,
        }),
        _ => None,
    };
    SimResult {
        mean_handover_latency: latency.mean(),
        mean_hop_delay: hop.mean(),
        packet_density: density.mean(),
        packets_lost: lost.mean(),
        mean_queue_occupancy: occupancy.mean(),
        replications: samples.len(),
        ci95,
    }
}
