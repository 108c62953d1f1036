//! Frame-level Monte Carlo simulator.
//!
//! Each frame draws Rayleigh fading on every link a packet may use, turns
//! the instantaneous SNRs into integer symbol costs, picks the cheaper of
//! the direct and the best relayed path, schedules packets in order against
//! the symbol budget and finally draws decoding failures.
//!
//! Randomness comes from ChaCha8 keyed by the seed, with the frame index
//! selecting the stream. A frame's outcome therefore depends only on
//! `(seed, frame index)`, and splitting frames across threads cannot change
//! the estimate.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use rayon::prelude::*;

use crate::error::{domain, Error, Result};
use crate::fbl::{shannon_capacity, FblCost};
use crate::overhead::{Regime, SystemConfig, Variant};
use crate::path::TopologySnr;
use crate::per::{receiver_of, relay_terminals};

/// Cost assigned to any path that cannot fit the budget. Small enough that
/// adding two of them does not overflow.
pub const UNSCHEDULABLE: u64 = u64::MAX / 4;

const CHUNK: u64 = 1 << 14;

/// Symbol costs of one packet in one frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PathCosts {
    pub m_direct: u64,
    /// Hops of the selected relay path (zero when there is none).
    pub m_r1: u64,
    pub m_r2: u64,
    pub m_relay: u64,
    pub m_min: u64,
    pub chose_relay: bool,
}

impl PathCosts {
    fn new(m_direct: u64, relay: Option<(u64, u64)>) -> Self {
        let (m_r1, m_r2, m_relay) = match relay {
            Some((a, b)) => (a, b, a.saturating_add(b).min(UNSCHEDULABLE)),
            None => (0, 0, UNSCHEDULABLE),
        };
        let chose_relay = m_relay < m_direct;
        Self {
            m_direct,
            m_r1,
            m_r2,
            m_relay,
            m_min: m_direct.min(m_relay),
            chose_relay,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PacketOutcome {
    pub costs: PathCosts,
    pub scheduled: bool,
    pub decoded: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimOptions {
    /// Draw decoding failures for scheduled packets under FBL. Disabling
    /// it leaves scheduling failures as the only error source.
    pub decoding_failures: bool,
}

impl Default for SimOptions {
    fn default() -> Self {
        Self {
            decoding_failures: true,
        }
    }
}

#[derive(Debug, Clone)]
enum CostModel {
    Fbl(FblCost),
    Ibl { payload_bits: f64 },
}

/// Relay options of a packet, as average SNRs of the hops.
#[derive(Debug, Clone)]
enum RelayPlan {
    None,
    /// Independent two-hop paths; the cheapest total wins.
    Paths(Vec<(f64, f64)>),
    /// `j` AP antennas picked separately on each hop.
    Antennas {
        up: f64,
        down: f64,
        j: usize,
    },
}

#[derive(Debug, Clone)]
struct PacketPlan {
    direct: f64,
    relay: RelayPlan,
}

/// A configuration resolved into per-packet link plans.
#[derive(Debug, Clone)]
pub struct Simulator {
    regime: Regime,
    eps_star: f64,
    budget: u64,
    cost: CostModel,
    packets: Vec<PacketPlan>,
    options: SimOptions,
}

impl Simulator {
    pub fn new(config: &SystemConfig, regime: Regime, options: SimOptions) -> Result<Self> {
        config.validate()?;
        let payload_bits = config.payload_bits();
        let cost = match regime {
            Regime::Fbl => CostModel::Fbl(FblCost::new(payload_bits, config.eps_star)?),
            Regime::Ibl => CostModel::Ibl { payload_bits },
        };
        let topology = config.topology()?;
        let n = config.terminals;
        let packets = (1..=n)
            .map(|tx| plan_packet(config, &topology, tx))
            .collect();
        Ok(Self {
            regime,
            eps_star: config.eps_star,
            budget: config.effective_budget()? as u64,
            cost,
            packets,
            options,
        })
    }

    pub fn budget(&self) -> u64 {
        self.budget
    }

    pub fn packets(&self) -> usize {
        self.packets.len()
    }

    /// Integer symbol cost of a link with instantaneous SNR `gamma`.
    pub fn link_cost(&self, gamma: f64) -> u64 {
        let m = match &self.cost {
            CostModel::Fbl(c) => c.blocklength_unchecked(gamma),
            CostModel::Ibl { payload_bits } => match shannon_capacity(gamma) {
                Ok(c) if c > 0.0 => payload_bits / c,
                _ => f64::INFINITY,
            },
        };
        let m = m.ceil();
        if m.is_finite() && m <= self.budget as f64 {
            m as u64
        } else {
            UNSCHEDULABLE
        }
    }

    fn draw_cost<R: Rng>(&self, gamma_bar: f64, rng: &mut R) -> u64 {
        let z: f64 = rng.sample(Exp1);
        self.link_cost(z * gamma_bar)
    }

    fn draw_paths<R: Rng>(&self, plan: &PacketPlan, rng: &mut R) -> PathCosts {
        let m_direct = self.draw_cost(plan.direct, rng);
        let relay = match &plan.relay {
            RelayPlan::None => None,
            RelayPlan::Paths(hops) => {
                let mut best: Option<(u64, u64)> = None;
                for &(a, b) in hops {
                    let pair = (self.draw_cost(a, rng), self.draw_cost(b, rng));
                    let total = pair.0.saturating_add(pair.1);
                    if best.is_none_or(|(x, y)| total < x.saturating_add(y)) {
                        best = Some(pair);
                    }
                }
                best
            }
            RelayPlan::Antennas { up, down, j } => {
                let first = (0..*j).map(|_| self.draw_cost(*up, rng)).min();
                let second = (0..*j).map(|_| self.draw_cost(*down, rng)).min();
                first.zip(second)
            }
        };
        PathCosts::new(m_direct, relay)
    }

    /// Simulates one frame. All fading is drawn before any decoding
    /// failure, in packet order.
    pub fn simulate_frame<R: Rng>(&self, rng: &mut R) -> Vec<PacketOutcome> {
        let costs: Vec<PathCosts> = self
            .packets
            .iter()
            .map(|p| self.draw_paths(p, rng))
            .collect();
        let mut used = 0u64;
        let mut fits = true;
        costs
            .into_iter()
            .map(|c| {
                if fits {
                    used = used.saturating_add(c.m_min);
                    fits = used <= self.budget;
                }
                let decoded = fits && self.decodes(c.chose_relay, rng);
                PacketOutcome {
                    costs: c,
                    scheduled: fits,
                    decoded,
                }
            })
            .collect()
    }

    fn decodes<R: Rng>(&self, two_hop: bool, rng: &mut R) -> bool {
        if self.regime == Regime::Ibl || !self.options.decoding_failures {
            return true;
        }
        let hops = if two_hop { 2 } else { 1 };
        (0..hops).all(|_| rng.random::<f64>() >= self.eps_star)
    }

    fn run_frames(&self, seed: u64, frames: std::ops::Range<u64>) -> Tally {
        let mut tally = Tally::new(self.packets.len());
        let base = ChaCha8Rng::seed_from_u64(seed);
        for frame in frames {
            let mut rng = base.clone();
            rng.set_stream(frame);
            tally.add(&self.simulate_frame(&mut rng));
        }
        tally
    }
}

fn plan_packet(config: &SystemConfig, topology: &TopologySnr, tx: usize) -> PacketPlan {
    let n = config.terminals;
    let rx = if topology.is_homogeneous() {
        receiver_of(tx, n.max(2))
    } else {
        receiver_of(tx, n)
    };
    let common = topology.common_gamma_bar();
    let link = |a: usize, b: usize| common.unwrap_or_else(|| topology.link(a, b));
    let relay = match config.variant {
        Variant::Direct => RelayPlan::None,
        Variant::BestAntenna => RelayPlan::Antennas {
            up: link(tx, 0),
            down: link(0, rx),
            j: config.j,
        },
        Variant::BestRelay | Variant::BestRelayMax => {
            let limit = if config.variant == Variant::BestRelay {
                config.j
            } else {
                usize::MAX
            };
            let mut hops: Vec<(f64, f64)> = relay_terminals(tx, rx, n)
                .take(limit)
                .map(|r| (link(tx, r), link(r, rx)))
                .collect();
            if config.variant == Variant::BestRelayMax {
                hops.push((link(tx, 0), link(0, rx)));
            }
            if hops.is_empty() {
                RelayPlan::None
            } else {
                RelayPlan::Paths(hops)
            }
        }
    };
    PacketPlan {
        direct: link(tx, rx),
        relay,
    }
}

/// Integer counters; merging is exact and order-independent.
#[derive(Debug, Clone, PartialEq, Eq)]
struct Tally {
    frames: u64,
    scheduled: Vec<u64>,
    errors: Vec<u64>,
    relayed: u64,
    relayed_failures: u64,
}

impl Tally {
    fn new(packets: usize) -> Self {
        Self {
            frames: 0,
            scheduled: vec![0; packets],
            errors: vec![0; packets],
            relayed: 0,
            relayed_failures: 0,
        }
    }

    fn add(&mut self, outcomes: &[PacketOutcome]) {
        self.frames += 1;
        for (i, o) in outcomes.iter().enumerate() {
            self.scheduled[i] += o.scheduled as u64;
            self.errors[i] += !o.decoded as u64;
            if o.scheduled && o.costs.chose_relay {
                self.relayed += 1;
                self.relayed_failures += !o.decoded as u64;
            }
        }
    }

    fn merge(mut self, other: Self) -> Self {
        self.frames += other.frames;
        for (a, b) in self.scheduled.iter_mut().zip(other.scheduled) {
            *a += b;
        }
        for (a, b) in self.errors.iter_mut().zip(other.errors) {
            *a += b;
        }
        self.relayed += other.relayed;
        self.relayed_failures += other.relayed_failures;
        self
    }
}

/// Result of a Monte Carlo run.
#[derive(Debug, Clone, PartialEq)]
pub struct McEstimate {
    pub frames: u64,
    pub seed: u64,
    pub per_hat: f64,
    /// 95% half-width `1.96·sqrt(p̂(1−p̂)/frames)`. Packets of one frame
    /// are positively correlated, so counting frames rather than packets
    /// keeps the interval conservative.
    pub ci_halfwidth: f64,
    pub per_packet_hat: Vec<f64>,
    /// Fraction of frames in which packet `i` was scheduled.
    pub scheduled_hat: Vec<f64>,
    pub errors: Vec<u64>,
    /// Scheduled packets that went over a relay, and how many of them failed.
    pub relayed: u64,
    pub relayed_failures: u64,
}

/// Runs `frames` frames with `workers` threads (`None` = rayon default).
pub fn estimate_per(
    config: &SystemConfig,
    regime: Regime,
    frames: u64,
    seed: u64,
    workers: Option<usize>,
    options: SimOptions,
) -> Result<McEstimate> {
    if frames == 0 {
        return Err(domain("frames", 0.0));
    }
    let sim = Simulator::new(config, regime, options)?;
    let chunks = frames.div_ceil(CHUNK);
    let run = || {
        (0..chunks)
            .into_par_iter()
            .map(|c| sim.run_frames(seed, c * CHUNK..((c + 1) * CHUNK).min(frames)))
            .reduce(|| Tally::new(sim.packets()), Tally::merge)
    };
    let tally = match workers {
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w.max(1))
            .build()
            .map_err(|e| Error::Config(format!("worker pool: {e}")))?
            .install(run),
        None => run(),
    };
    Ok(summarize(tally, seed))
}

fn summarize(t: Tally, seed: u64) -> McEstimate {
    let f = t.frames as f64;
    let n = t.errors.len() as f64;
    let per_hat = t.errors.iter().sum::<u64>() as f64 / (f * n);
    McEstimate {
        frames: t.frames,
        seed,
        per_hat,
        ci_halfwidth: 1.96 * (per_hat * (1.0 - per_hat) / f).sqrt(),
        per_packet_hat: t.errors.iter().map(|e| *e as f64 / f).collect(),
        scheduled_hat: t.scheduled.iter().map(|s| *s as f64 / f).collect(),
        errors: t.errors,
        relayed: t.relayed,
        relayed_failures: t.relayed_failures,
    }
}
