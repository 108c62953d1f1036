//! Relaying cost and the scheduler's chosen cost for the cooperative
//! variants, built from single-hop cost distributions.

use crate::dist::{best_of_iid, convolve, min_of, BlocklengthDistribution};
use crate::error::{domain, Error, Result};

/// Average SNRs of every link in the cell. Index 0 is the access point,
/// terminals are `1..=N`. Links are reciprocal.
#[derive(Debug, Clone, PartialEq)]
pub struct TopologySnr {
    ap_terminal: Vec<f64>,
    terminal_terminal: Vec<Vec<f64>>,
    homogeneous: bool,
}

impl TopologySnr {
    /// Every link, including those to the AP, at the same linear SNR.
    pub fn homogeneous(terminals: usize, gamma_bar: f64) -> Result<Self> {
        if !(gamma_bar > 0.0) || !gamma_bar.is_finite() {
            return Err(domain("gamma_bar", gamma_bar));
        }
        Ok(Self {
            ap_terminal: vec![gamma_bar; terminals],
            terminal_terminal: vec![vec![gamma_bar; terminals]; terminals],
            homogeneous: true,
        })
    }

    /// From an `(N+1)×(N+1)` matrix of average SNRs in dB, row/column 0
    /// being the AP. The diagonal is ignored.
    pub fn from_matrix_db(matrix: &[Vec<f64>]) -> Result<Self> {
        let size = matrix.len();
        if size < 2 {
            return Err(Error::Config(
                "snr_matrix_db needs at least the AP and one terminal".into(),
            ));
        }
        if matrix.iter().any(|row| row.len() != size) {
            return Err(Error::Config("snr_matrix_db must be square".into()));
        }
        let lin = |db: f64| 10f64.powf(db / 10.0);
        for i in 0..size {
            for j in 0..size {
                if i == j {
                    continue;
                }
                if !matrix[i][j].is_finite() {
                    return Err(Error::Config(format!(
                        "snr_matrix_db[{i}][{j}] is not finite"
                    )));
                }
                if matrix[i][j] != matrix[j][i] {
                    return Err(Error::Config(format!(
                        "snr_matrix_db is not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        let n = size - 1;
        let ap_terminal = (1..=n).map(|i| lin(matrix[0][i])).collect::<Vec<_>>();
        let terminal_terminal = (1..=n)
            .map(|i| {
                (1..=n)
                    .map(|j| if i == j { 0.0 } else { lin(matrix[i][j]) })
                    .collect()
            })
            .collect::<Vec<Vec<f64>>>();
        let first = ap_terminal[0];
        let homogeneous = ap_terminal.iter().all(|g| *g == first)
            && (0..n).all(|i| (0..n).all(|j| i == j || terminal_terminal[i][j] == first));
        Ok(Self {
            ap_terminal,
            terminal_terminal,
            homogeneous,
        })
    }

    pub fn terminals(&self) -> usize {
        self.ap_terminal.len()
    }

    pub fn is_homogeneous(&self) -> bool {
        self.homogeneous
    }

    /// The common SNR when the topology is homogeneous.
    pub fn common_gamma_bar(&self) -> Option<f64> {
        self.homogeneous.then(|| self.ap_terminal[0])
    }

    /// Average SNR between nodes `i` and `j` (0 = AP).
    pub fn link(&self, i: usize, j: usize) -> f64 {
        match (i, j) {
            (0, 0) => f64::NAN,
            (0, t) | (t, 0) => self.ap_terminal[t - 1],
            (a, b) => self.terminal_terminal[a - 1][b - 1],
        }
    }
}

/// Cost of a two-hop path: `M_R = M_R1 + M_R2`.
pub fn two_hop_relay_dist(
    first_hop: &BlocklengthDistribution,
    second_hop: &BlocklengthDistribution,
) -> Result<BlocklengthDistribution> {
    convolve(first_hop, second_hop)
}

/// Cost of the cheapest among independent two-hop relay paths:
/// `1 − F = Π_j (1 − F_j)`.
pub fn best_relay_dist(candidates: &[BlocklengthDistribution]) -> Result<BlocklengthDistribution> {
    let (first, rest) = candidates.split_first().ok_or(Error::NoCandidates)?;
    rest.iter()
        .try_fold(first.clone(), |acc, d| min_of(&acc, d))
}

/// Relaying through a `j`-antenna AP that picks the best antenna separately
/// for the incoming and the outgoing hop.
pub fn best_antenna_dist(
    uplink: &BlocklengthDistribution,
    downlink: &BlocklengthDistribution,
    j: usize,
) -> Result<BlocklengthDistribution> {
    convolve(&best_of_iid(uplink, j)?, &best_of_iid(downlink, j)?)
}

/// Cost actually spent by the scheduler: `min(M_D, M_R)`.
pub fn chosen_cost_dist(
    direct: &BlocklengthDistribution,
    relay: &BlocklengthDistribution,
) -> Result<BlocklengthDistribution> {
    min_of(direct, relay)
}

/// How the scheduler's choice between direct and relayed transmission splits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChoiceProbs {
    /// `P(M_D ≤ M_R, M_D schedulable)`; ties go to the direct path.
    pub direct: f64,
    /// `P(M_R < M_D, M_R schedulable)`.
    pub relay: f64,
    /// Both options exceed the budget.
    pub both_tail: f64,
}

impl ChoiceProbs {
    /// Relay share among the outcomes where some path fits.
    pub fn relay_share(&self) -> Option<f64> {
        let total = self.direct + self.relay;
        (total > 0.0).then(|| self.relay / total)
    }
}

pub fn relay_choice_probs(
    direct: &BlocklengthDistribution,
    relay: &BlocklengthDistribution,
) -> Result<ChoiceProbs> {
    if direct.grid_max() != relay.grid_max() {
        return Err(Error::GridMismatch {
            left: direct.grid_max(),
            right: relay.grid_max(),
        });
    }
    let sd = direct.survival();
    let sr = relay.survival();
    let pd = direct.pmf();
    let pr = relay.pmf();
    let mut p_direct = 0.0;
    let mut p_relay = 0.0;
    for m in 0..pd.len() {
        let relay_at_least_m = if m == 0 { 1.0 } else { sr[m - 1] };
        p_direct += pd[m] * relay_at_least_m;
        p_relay += pr[m] * sd[m];
    }
    Ok(ChoiceProbs {
        direct: p_direct,
        relay: p_relay,
        both_tail: direct.tail_mass() * relay.tail_mass(),
    })
}
