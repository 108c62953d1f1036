//! Scheduling probabilities, expected per-link decoding error and the
//! resulting packet error rates.
//!
//! Packets are scheduled in the fixed order `1..=N`; packet `i` makes it
//! into the frame iff the chosen costs of packets `1..=i` fit the budget,
//! so `p_i = P(Σ_{j≤i} M_min,j ≤ S)`. The miss probability `1 − p_i` is
//! carried separately to keep its relative accuracy when it is tiny.

use std::collections::HashMap;

use crate::dist::{convolve, single_hop_dist_fbl, single_hop_dist_ibl, BlocklengthDistribution};
use crate::error::{domain, Error, Result};
use crate::overhead::{Regime, SystemConfig, Variant};
use crate::path::{
    best_antenna_dist, best_relay_dist, chosen_cost_dist, relay_choice_probs, two_hop_relay_dist,
    TopologySnr,
};

/// Direct and relayed cost distributions for one packet.
#[derive(Debug, Clone, PartialEq)]
pub struct PacketPaths {
    pub direct: BlocklengthDistribution,
    pub relay: BlocklengthDistribution,
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct AnalyticOptions {
    /// Use `1 − (1 − ε*)²` for a two-hop path instead of `2ε*`.
    pub exact_two_hop: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PerResult {
    pub regime: Regime,
    /// `p_i`, probability that packet `i` is scheduled.
    pub p: Vec<f64>,
    /// `1 − p_i`, computed directly.
    pub unscheduled: Vec<f64>,
    /// Expected decoding error of a scheduled packet (zero under IBL).
    pub eps_ave: Vec<f64>,
    pub per_packet: Vec<f64>,
    pub per_avg: f64,
}

impl PerResult {
    /// `PER_i = (1 − p_i) + p_i·ε_ave,i` and its mean over packets.
    pub fn from_parts(regime: Regime, unscheduled: Vec<f64>, eps_ave: Vec<f64>) -> Self {
        let per_packet: Vec<f64> = unscheduled
            .iter()
            .zip(&eps_ave)
            .map(|(u, e)| u + (1.0 - u) * e)
            .collect();
        let per_avg = per_packet.iter().sum::<f64>() / per_packet.len().max(1) as f64;
        Self {
            regime,
            p: unscheduled.iter().map(|u| 1.0 - u).collect(),
            unscheduled,
            eps_ave,
            per_packet,
            per_avg,
        }
    }
}

/// `1 − p_i` for each packet, given the chosen-cost distributions in
/// scheduling order.
pub fn schedule_miss(min_cost: &[BlocklengthDistribution]) -> Result<Vec<f64>> {
    let (first, rest) = min_cost
        .split_first()
        .ok_or_else(|| domain("packets", 0.0))?;
    let mut out = Vec::with_capacity(min_cost.len());
    out.push(first.tail_mass());
    let mut prefix = first.clone();
    for d in rest {
        // once nothing fits, every later packet is dropped as well
        if prefix.tail_mass() >= 1.0 {
            if d.grid_max() != prefix.grid_max() {
                return Err(Error::GridMismatch {
                    left: prefix.grid_max(),
                    right: d.grid_max(),
                });
            }
            out.push(1.0);
            continue;
        }
        prefix = convolve(&prefix, d)?;
        out.push(prefix.tail_mass());
    }
    Ok(out)
}

/// `p_i = F_{M_sum,i}(S)`.
pub fn schedule_probs(min_cost: &[BlocklengthDistribution]) -> Result<Vec<f64>> {
    Ok(schedule_miss(min_cost)?
        .into_iter()
        .map(|u| 1.0 - u)
        .collect())
}

/// Expected decoding error of a scheduled packet: the direct/relay split
/// of [`relay_choice_probs`], renormalized over the outcomes where some
/// path fits, weighted by `ε*` and the two-hop error.
pub fn expected_link_error(
    direct: &BlocklengthDistribution,
    relay: &BlocklengthDistribution,
    eps_star: f64,
    exact_two_hop: bool,
) -> Result<f64> {
    if !(eps_star > 0.0 && eps_star < 0.5) {
        return Err(domain("eps_star", eps_star));
    }
    let two_hop = if exact_two_hop {
        1.0 - (1.0 - eps_star) * (1.0 - eps_star)
    } else {
        2.0 * eps_star
    };
    let choice = relay_choice_probs(direct, relay)?;
    Ok(match choice.relay_share() {
        Some(r) => (1.0 - r) * eps_star + r * two_hop,
        None => eps_star,
    })
}

/// PER under finite blocklengths.
pub fn per_fbl(paths: &[PacketPaths], eps_star: f64, opts: AnalyticOptions) -> Result<PerResult> {
    let chosen = chosen_costs(paths)?;
    let unscheduled = schedule_miss(&chosen)?;
    let eps_ave = paths
        .iter()
        .map(|p| expected_link_error(&p.direct, &p.relay, eps_star, opts.exact_two_hop))
        .collect::<Result<Vec<_>>>()?;
    Ok(PerResult::from_parts(Regime::Fbl, unscheduled, eps_ave))
}

/// PER under infinite blocklengths: scheduling misses only.
pub fn per_ibl(paths: &[PacketPaths]) -> Result<PerResult> {
    let chosen = chosen_costs(paths)?;
    let unscheduled = schedule_miss(&chosen)?;
    let zeros = vec![0.0; unscheduled.len()];
    Ok(PerResult::from_parts(Regime::Ibl, unscheduled, zeros))
}

fn chosen_costs(paths: &[PacketPaths]) -> Result<Vec<BlocklengthDistribution>> {
    let mut out: Vec<BlocklengthDistribution> = Vec::with_capacity(paths.len());
    for (i, p) in paths.iter().enumerate() {
        // homogeneous scenarios repeat the same pair for every packet
        if i > 0 && paths[i - 1] == *p {
            let prev = out[i - 1].clone();
            out.push(prev);
        } else {
            out.push(chosen_cost_dist(&p.direct, &p.relay)?);
        }
    }
    Ok(out)
}

/// Runs the analytic pipeline for one scenario.
pub fn evaluate(config: &SystemConfig, regime: Regime, opts: AnalyticOptions) -> Result<PerResult> {
    config.validate()?;
    let paths = resolve_paths(config, regime)?;
    match regime {
        Regime::Fbl => per_fbl(&paths, config.eps_star, opts),
        Regime::Ibl => per_ibl(&paths),
    }
}

/// Receiver of packet `i`: the next terminal in a ring.
pub fn receiver_of(tx: usize, terminals: usize) -> usize {
    tx % terminals + 1
}

/// Relay terminals available to the packet `tx → rx`, in index order.
pub fn relay_terminals(tx: usize, rx: usize, terminals: usize) -> impl Iterator<Item = usize> {
    (1..=terminals).filter(move |r| *r != tx && *r != rx)
}

struct HopCache<'a> {
    config: &'a SystemConfig,
    regime: Regime,
    payload: f64,
    budget: usize,
    single: HashMap<u64, BlocklengthDistribution>,
    two_hop: HashMap<(u64, u64), BlocklengthDistribution>,
}

impl HopCache<'_> {
    fn hop(&mut self, gamma_bar: f64) -> Result<BlocklengthDistribution> {
        if let Some(d) = self.single.get(&gamma_bar.to_bits()) {
            return Ok(d.clone());
        }
        let d = match self.regime {
            Regime::Fbl => {
                single_hop_dist_fbl(gamma_bar, self.payload, self.config.eps_star, self.budget)?
            }
            Regime::Ibl => single_hop_dist_ibl(gamma_bar, self.payload, self.budget)?,
        };
        self.single.insert(gamma_bar.to_bits(), d.clone());
        Ok(d)
    }

    fn two_hop(&mut self, first: f64, second: f64) -> Result<BlocklengthDistribution> {
        let key = (first.to_bits(), second.to_bits());
        if let Some(d) = self.two_hop.get(&key) {
            return Ok(d.clone());
        }
        let d = two_hop_relay_dist(&self.hop(first)?, &self.hop(second)?)?;
        self.two_hop.insert(key, d.clone());
        Ok(d)
    }
}

/// Direct and relay cost distributions of every packet in the scenario.
pub fn resolve_paths(config: &SystemConfig, regime: Regime) -> Result<Vec<PacketPaths>> {
    if regime == Regime::Fbl && !(config.eps_star > 0.0) {
        return Err(domain("eps_star", config.eps_star));
    }
    let topology = config.topology()?;
    let n = config.terminals;
    let mut cache = HopCache {
        config,
        regime,
        payload: config.payload_bits(),
        budget: config.effective_budget()?,
        single: HashMap::new(),
        two_hop: HashMap::new(),
    };

    if topology.is_homogeneous() {
        let paths = packet_paths(config, &topology, &mut cache, 1, receiver_of(1, n.max(2)))?;
        return Ok(vec![paths; n]);
    }
    (1..=n)
        .map(|tx| packet_paths(config, &topology, &mut cache, tx, receiver_of(tx, n)))
        .collect()
}

fn packet_paths(
    config: &SystemConfig,
    topology: &TopologySnr,
    cache: &mut HopCache<'_>,
    tx: usize,
    rx: usize,
) -> Result<PacketPaths> {
    let common = topology.common_gamma_bar();
    let link = |a: usize, b: usize| common.unwrap_or_else(|| topology.link(a, b));
    let n = config.terminals;
    let direct = cache.hop(link(tx, rx))?;
    let relay = match config.variant {
        Variant::Direct => BlocklengthDistribution::unschedulable(cache.budget),
        Variant::BestAntenna => {
            let up = cache.hop(link(tx, 0))?;
            let down = cache.hop(link(0, rx))?;
            best_antenna_dist(&up, &down, config.j)?
        }
        Variant::BestRelay | Variant::BestRelayMax => {
            let mut candidates = relay_terminals(tx, rx, n)
                .map(|r| cache.two_hop(link(tx, r), link(r, rx)))
                .take(if config.variant == Variant::BestRelay {
                    config.j
                } else {
                    usize::MAX
                })
                .collect::<Result<Vec<_>>>()?;
            if config.variant == Variant::BestRelayMax {
                candidates.push(cache.two_hop(link(tx, 0), link(0, rx))?);
            }
            if candidates.is_empty() {
                BlocklengthDistribution::unschedulable(cache.budget)
            } else {
                best_relay_dist(&candidates)?
            }
        }
    };
    Ok(PacketPaths { direct, relay })
}

/// Convexity slack of `ys` over an increasing, possibly uneven grid `xs`:
/// `λ·y[k−1] + (1−λ)·y[k+1] − y[k]` with `λ = (x[k+1]−x[k])/(x[k+1]−x[k−1])`.
/// Nonnegative everywhere iff the sampled curve is convex.
pub fn chord_gaps(xs: &[f64], ys: &[f64]) -> Vec<f64> {
    assert_eq!(xs.len(), ys.len());
    (1..xs.len().saturating_sub(1))
        .map(|k| {
            let lambda = (xs[k + 1] - xs[k]) / (xs[k + 1] - xs[k - 1]);
            lambda * ys[k - 1] + (1.0 - lambda) * ys[k + 1] - ys[k]
        })
        .collect()
}
