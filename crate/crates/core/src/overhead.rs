//! Scenario parameters and the CSI acquisition cost model.
//!
//! Link estimation costs `α` reference symbols per transmission, charged
//! once per packet off the top of the frame. Reporting link qualities to the
//! AP inflates each payload by a variant-dependent number of `β`-bit
//! reports.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::path::TopologySnr;

/// Path selection scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Variant {
    /// Direct transmissions only.
    Direct,
    /// Relaying through a multi-antenna AP with per-hop antenna selection.
    BestAntenna,
    /// Relaying through the best of `J` overhearing terminals.
    BestRelay,
    /// Every terminal other than sender and receiver, plus the AP, is a
    /// relay candidate.
    BestRelayMax,
}

impl Variant {
    pub const ALL: [Variant; 4] = [
        Variant::Direct,
        Variant::BestAntenna,
        Variant::BestRelay,
        Variant::BestRelayMax,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Variant::Direct => "direct",
            Variant::BestAntenna => "best-antenna",
            Variant::BestRelay => "best-relay",
            Variant::BestRelayMax => "best-relay-max",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('_', "-").as_str() {
            "direct" => Ok(Variant::Direct),
            "best-antenna" | "antenna" => Ok(Variant::BestAntenna),
            "best-relay" | "relay" => Ok(Variant::BestRelay),
            "best-relay-max" | "max-relay" => Ok(Variant::BestRelayMax),
            other => Err(Error::Config(format!("unknown variant `{other}`"))),
        }
    }
}

/// Error model used to derive symbol costs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Regime {
    Fbl,
    Ibl,
}

impl Regime {
    pub fn name(self) -> &'static str {
        match self {
            Regime::Fbl => "fbl",
            Regime::Ibl => "ibl",
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Average link SNRs of a scenario.
#[derive(Debug, Clone, PartialEq)]
pub enum SnrSpec {
    /// All links share this average SNR (dB).
    Homogeneous { db: f64 },
    /// Per-link average SNRs; see [`TopologySnr::from_matrix_db`].
    Matrix(TopologySnr),
}

/// Full scenario parameterization.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemConfig {
    pub bandwidth_hz: f64,
    pub cycle_s: f64,
    pub terminals: usize,
    /// Payload before CSI reports are piggybacked.
    pub base_payload_bits: f64,
    pub alpha_symbols: f64,
    pub beta_bits: f64,
    pub eps_star: f64,
    pub variant: Variant,
    /// AP antennas (best-antenna) or relay candidates (best-relay).
    pub j: usize,
    pub snr: SnrSpec,
}

impl Default for SystemConfig {
    /// 5 MHz, 1 ms cycle (5000 symbols), five terminals, 128-bit base
    /// payload, `α = S/100`, `β = 8` bits, 15 dB on every link.
    fn default() -> Self {
        Self {
            bandwidth_hz: 5e6,
            cycle_s: 1e-3,
            terminals: 5,
            base_payload_bits: 128.0,
            alpha_symbols: 50.0,
            beta_bits: 8.0,
            eps_star: 1e-9,
            variant: Variant::Direct,
            j: 1,
            snr: SnrSpec::Homogeneous { db: 15.0 },
        }
    }
}

impl SystemConfig {
    /// `S = round(B · T_cyc)`.
    pub fn frame_symbols(&self) -> u64 {
        (self.bandwidth_hz * self.cycle_s).round() as u64
    }

    /// Payload including the piggybacked CSI reports.
    pub fn payload_bits(&self) -> f64 {
        let n = self.terminals as f64;
        match self.variant {
            Variant::Direct | Variant::BestAntenna => self.base_payload_bits + n * self.beta_bits,
            Variant::BestRelay | Variant::BestRelayMax => {
                self.base_payload_bits + (n - 1.0) / 2.0 * self.beta_bits
            }
        }
    }

    /// Symbols left for payload after `N·α` reference symbols.
    pub fn effective_budget(&self) -> Result<usize> {
        let frame = self.frame_symbols();
        let overhead = self.terminals as f64 * self.alpha_symbols;
        let left = (frame as f64 - overhead).floor();
        if !(left >= 1.0) {
            return Err(Error::OverheadExceedsFrame { overhead, frame });
        }
        Ok(left as usize)
    }

    /// Number of relay paths offered to each packet.
    pub fn relay_candidates(&self) -> usize {
        match self.variant {
            Variant::Direct => 0,
            Variant::BestAntenna | Variant::BestRelay => self.j,
            Variant::BestRelayMax => self.terminals.saturating_sub(2) + 1,
        }
    }

    pub fn topology(&self) -> Result<TopologySnr> {
        match &self.snr {
            SnrSpec::Homogeneous { db } => {
                TopologySnr::homogeneous(self.terminals, 10f64.powf(db / 10.0))
            }
            SnrSpec::Matrix(t) => Ok(t.clone()),
        }
    }

    /// Homogeneous SNR in dB, if any.
    pub fn snr_db(&self) -> Option<f64> {
        match &self.snr {
            SnrSpec::Homogeneous { db } => Some(*db),
            SnrSpec::Matrix(t) => t.common_gamma_bar().map(|g| 10.0 * g.log10()),
        }
    }

    /// Checks the scenario invariants. `eps_star = 0` passes here and is
    /// rejected later by the finite-blocklength path only.
    pub fn validate(&self) -> Result<()> {
        let bad = |key: &str, why: String| Err(Error::Config(format!("`{key}`: {why}")));
        if !(self.bandwidth_hz > 0.0) || !self.bandwidth_hz.is_finite() {
            return bad(
                "bandwidth_hz",
                format!("must be positive, got {}", self.bandwidth_hz),
            );
        }
        if !(self.cycle_s > 0.0) || !self.cycle_s.is_finite() {
            return bad("cycle_s", format!("must be positive, got {}", self.cycle_s));
        }
        if self.frame_symbols() < 1 {
            return bad("bandwidth_hz", "frame holds no symbols".into());
        }
        if self.terminals < 1 {
            return bad("terminals", "at least one terminal is required".into());
        }
        if !(self.base_payload_bits > 0.0) || !self.base_payload_bits.is_finite() {
            return bad(
                "payload_bits",
                format!("must be positive, got {}", self.base_payload_bits),
            );
        }
        if !(self.alpha_symbols >= 0.0) || !self.alpha_symbols.is_finite() {
            return bad(
                "alpha_symbols",
                format!("must be ≥ 0, got {}", self.alpha_symbols),
            );
        }
        if !(self.beta_bits >= 0.0) || !self.beta_bits.is_finite() {
            return bad("beta_bits", format!("must be ≥ 0, got {}", self.beta_bits));
        }
        if !(self.eps_star >= 0.0 && self.eps_star < 0.5) {
            return bad(
                "eps_star",
                format!("must lie in [0, 0.5), got {}", self.eps_star),
            );
        }
        match self.variant {
            Variant::BestAntenna | Variant::BestRelay if self.j < 1 => {
                return bad("j", "cooperative variants need j ≥ 1".into());
            }
            Variant::BestRelay if self.j + 2 > self.terminals => {
                return bad(
                    "j",
                    format!(
                        "best-relay offers at most terminals − 2 = {} candidates, got {}",
                        self.terminals.saturating_sub(2),
                        self.j
                    ),
                );
            }
            _ => {}
        }
        match &self.snr {
            SnrSpec::Homogeneous { db } if !db.is_finite() => {
                return bad("snr_db", format!("must be finite, got {db}"));
            }
            SnrSpec::Matrix(t) if t.terminals() != self.terminals => {
                return bad(
                    "snr_matrix_db",
                    format!(
                        "describes {} terminals, config has {}",
                        t.terminals(),
                        self.terminals
                    ),
                );
            }
            SnrSpec::Matrix(t) if self.terminals < 2 && !t.is_homogeneous() => {
                return bad(
                    "snr_matrix_db",
                    "heterogeneous topologies need two terminals".into(),
                );
            }
            _ => {}
        }
        self.effective_budget()?;
        Ok(())
    }
}
