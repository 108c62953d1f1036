//! Parameter sweeps and their CSV rows.

use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::montecarlo::McEstimate;
use crate::overhead::{Regime, SnrSpec, SystemConfig, Variant};
use crate::per::{chord_gaps, evaluate, AnalyticOptions, PerResult};

/// Slack allowed on chord gaps before a curve counts as non-convex.
pub const CONVEXITY_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    EpsStar,
    PayloadBits,
    SnrDb,
    Terminals,
    BandwidthHz,
    AlphaSymbols,
    BetaBits,
}

impl Axis {
    pub fn name(self) -> &'static str {
        match self {
            Axis::EpsStar => "eps_star",
            Axis::PayloadBits => "payload_bits",
            Axis::SnrDb => "snr_db",
            Axis::Terminals => "terminals",
            Axis::BandwidthHz => "bandwidth_hz",
            Axis::AlphaSymbols => "alpha_symbols",
            Axis::BetaBits => "beta_bits",
        }
    }

    fn check(self, v: f64) -> Result<()> {
        let ok = match self {
            Axis::EpsStar => v > 0.0 && v < 0.5,
            Axis::SnrDb => v.is_finite(),
            Axis::Terminals => v >= 1.0 && v.fract() == 0.0 && v < 1e6,
            Axis::PayloadBits | Axis::BandwidthHz => v > 0.0 && v.is_finite(),
            Axis::AlphaSymbols | Axis::BetaBits => v >= 0.0 && v.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!(
                "`{}`: value {v} out of range",
                self.name()
            )))
        }
    }

    /// Copy of `config` with this axis set to `v`.
    pub fn apply(self, config: &SystemConfig, v: f64) -> SystemConfig {
        let mut c = config.clone();
        match self {
            Axis::EpsStar => c.eps_star = v,
            Axis::PayloadBits => c.base_payload_bits = v,
            Axis::SnrDb => c.snr = SnrSpec::Homogeneous { db: v },
            Axis::Terminals => c.terminals = v as usize,
            Axis::BandwidthHz => c.bandwidth_hz = v,
            Axis::AlphaSymbols => c.alpha_symbols = v,
            Axis::BetaBits => c.beta_bits = v,
        }
        c
    }
}

impl FromStr for Axis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.trim().replace('-', "_").as_str() {
            "eps_star" => Axis::EpsStar,
            "payload_bits" => Axis::PayloadBits,
            "snr_db" => Axis::SnrDb,
            "terminals" => Axis::Terminals,
            "bandwidth_hz" => Axis::BandwidthHz,
            "alpha_symbols" => Axis::AlphaSymbols,
            "beta_bits" => Axis::BetaBits,
            other => return Err(Error::Config(format!("unknown sweep axis `{other}`"))),
        })
    }
}

/// Parses `a,b,c` or `start:stop:count[:lin|log]`.
pub fn parse_values(spec: &str) -> Result<Vec<f64>> {
    let bad = |why: &str| Error::Config(format!("`values`: {why} in `{spec}`"));
    let num = |s: &str| s.trim().parse::<f64>().map_err(|_| bad("not a number"));
    let values = if spec.contains(':') {
        let parts: Vec<&str> = spec.split(':').collect();
        if !(3..=4).contains(&parts.len()) {
            return Err(bad("expected start:stop:count[:lin|log]"));
        }
        let (start, stop) = (num(parts[0])?, num(parts[1])?);
        let count: usize = parts[2]
            .trim()
            .parse()
            .map_err(|_| bad("count is not an integer"))?;
        let log = match parts.get(3).map(|s| s.trim()) {
            None | Some("lin") => false,
            Some("log") => true,
            Some(_) => return Err(bad("scale must be lin or log")),
        };
        if count == 0 {
            return Err(bad("count must be at least 1"));
        }
        if log && !(start > 0.0 && stop > 0.0) {
            return Err(bad("log spacing needs positive endpoints"));
        }
        grid(start, stop, count, log)
    } else {
        spec.split(',').map(num).collect::<Result<Vec<_>>>()?
    };
    if values.is_empty() {
        return Err(bad("no values"));
    }
    Ok(values)
}

/// `count` points from `start` to `stop`, evenly spaced in value or in log.
pub fn grid(start: f64, stop: f64, count: usize, log: bool) -> Vec<f64> {
    if count == 1 {
        return vec![start];
    }
    let (a, b) = if log {
        (start.ln(), stop.ln())
    } else {
        (start, stop)
    };
    let mut out: Vec<f64> = (0..count)
        .map(|k| {
            let x = a + (b - a) * k as f64 / (count - 1) as f64;
            if log {
                x.exp()
            } else {
                x
            }
        })
        .collect();
    // exact endpoints
    out[0] = start;
    out[count - 1] = stop;
    out
}

#[derive(Debug, Clone, PartialEq)]
pub enum Status {
    Ok,
    Infeasible,
}

impl Status {
    pub fn name(&self) -> &'static str {
        match self {
            Status::Ok => "ok",
            Status::Infeasible => "infeasible",
        }
    }
}

/// One CSV row.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub regime: Regime,
    pub variant: Variant,
    pub j: usize,
    pub terminals: usize,
    pub frame_symbols: u64,
    pub payload_bits: f64,
    pub gamma_bar_db: Option<f64>,
    pub eps_star: Option<f64>,
    pub p: Vec<f64>,
    pub per_packet: Vec<f64>,
    pub per_avg: Option<f64>,
    pub status: Status,
    pub mc: Option<McColumns>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McColumns {
    pub frames: u64,
    pub seed: u64,
    pub ci_halfwidth: f64,
}

impl Row {
    fn skeleton(config: &SystemConfig, regime: Regime, status: Status) -> Self {
        Self {
            regime,
            variant: config.variant,
            j: config.relay_candidates(),
            terminals: config.terminals,
            frame_symbols: config.frame_symbols(),
            payload_bits: config.payload_bits(),
            gamma_bar_db: config.snr_db(),
            eps_star: (regime == Regime::Fbl).then_some(config.eps_star),
            p: Vec::new(),
            per_packet: Vec::new(),
            per_avg: None,
            status,
            mc: None,
        }
    }

    pub fn analytic(config: &SystemConfig, r: &PerResult) -> Self {
        Self {
            p: r.p.clone(),
            per_packet: r.per_packet.clone(),
            per_avg: Some(r.per_avg),
            ..Self::skeleton(config, r.regime, Status::Ok)
        }
    }

    pub fn infeasible(config: &SystemConfig, regime: Regime) -> Self {
        Self::skeleton(config, regime, Status::Infeasible)
    }

    pub fn monte_carlo(config: &SystemConfig, regime: Regime, est: &McEstimate) -> Self {
        Self {
            p: est.scheduled_hat.clone(),
            per_packet: est.per_packet_hat.clone(),
            per_avg: Some(est.per_hat),
            mc: Some(McColumns {
                frames: est.frames,
                seed: est.seed,
                ci_halfwidth: est.ci_halfwidth,
            }),
            ..Self::skeleton(config, regime, Status::Ok)
        }
    }
}

fn opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

/// Writes `rows` as CSV with `p_1..p_K` for the largest `K` present.
pub fn write_rows<W: Write>(out: W, rows: &[Row]) -> Result<()> {
    let width = rows.iter().map(|r| r.terminals).max().unwrap_or(0);
    let mc = rows.iter().any(|r| r.mc.is_some());
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<String> = [
        "regime",
        "variant",
        "J",
        "N",
        "S",
        "D",
        "gamma_bar_db",
        "eps_star",
    ]
    .map(String::from)
    .to_vec();
    header.extend((1..=width).map(|i| format!("p_{i}")));
    header.extend(["per_avg", "status"].map(String::from));
    if mc {
        header.extend(["frames", "seed", "ci_halfwidth"].map(String::from));
    }
    w.write_record(&header).map_err(csv_err)?;
    for r in rows {
        let mut rec = vec![
            r.regime.to_string(),
            r.variant.to_string(),
            r.j.to_string(),
            r.terminals.to_string(),
            r.frame_symbols.to_string(),
            r.payload_bits.to_string(),
            opt(r.gamma_bar_db),
            opt(r.eps_star),
        ];
        rec.extend((0..width).map(|i| opt(r.p.get(i).copied())));
        rec.push(opt(r.per_avg));
        rec.push(r.status.name().to_string());
        if mc {
            let m = r.mc;
            rec.push(m.map(|m| m.frames.to_string()).unwrap_or_default());
            rec.push(m.map(|m| m.seed.to_string()).unwrap_or_default());
            rec.push(opt(m.map(|m| m.ci_halfwidth)));
        }
        w.write_record(&rec).map_err(csv_err)?;
    }
    w.flush()
        .map_err(|e| Error::Config(format!("write failed: {e}")))?;
    Ok(())
}

fn csv_err(e: csv::Error) -> Error {
    Error::Config(format!("write failed: {e}"))
}

/// Evaluates one analytic point. Points that violate the scenario
/// invariants become infeasible rows.
pub fn analytic_row(config: &SystemConfig, regime: Regime, opts: AnalyticOptions) -> Result<Row> {
    if config.validate().is_err() {
        return Ok(Row::infeasible(config, regime));
    }
    Ok(Row::analytic(config, &evaluate(config, regime, opts)?))
}

/// Scenario variations crossed with the axis, in output order.
#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub axis: Axis,
    pub values: Vec<f64>,
    pub variants: Vec<Variant>,
    pub js: Vec<usize>,
    pub regimes: Vec<Regime>,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.values.is_empty() {
            return Err(Error::Config("`values`: no values".into()));
        }
        for v in &self.values {
            self.axis.check(*v)?;
        }
        if self.variants.is_empty() || self.js.is_empty() || self.regimes.is_empty() {
            return Err(Error::Config(
                "sweep needs at least one variant, j and regime".into(),
            ));
        }
        Ok(())
    }

    /// `(variant, j, regime)` groups; `j` only varies for variants that use it.
    pub fn groups(&self) -> Vec<(Variant, usize, Regime)> {
        let mut out = Vec::new();
        for &v in &self.variants {
            let js: &[usize] = match v {
                Variant::BestAntenna | Variant::BestRelay => &self.js,
                Variant::Direct | Variant::BestRelayMax => &self.js[..1],
            };
            for &j in js {
                for &r in &self.regimes {
                    out.push((v, j, r));
                }
            }
        }
        out
    }

    /// Configs in output order: groups outermost, axis values innermost.
    pub fn points(&self, base: &SystemConfig) -> Vec<(SystemConfig, Regime)> {
        self.groups()
            .into_iter()
            .flat_map(|(variant, j, regime)| {
                self.values.iter().map(move |v| {
                    let c = SystemConfig {
                        variant,
                        j,
                        ..base.clone()
                    };
                    (self.axis.apply(&c, *v), regime)
                })
            })
            .collect()
    }
}

/// Evaluates every point in parallel, keeping output order.
pub fn run_sweep(base: &SystemConfig, spec: &SweepSpec, opts: AnalyticOptions) -> Result<Vec<Row>> {
    spec.validate()?;
    spec.points(base)
        .par_iter()
        .map(|(c, r)| analytic_row(c, *r, opts))
        .collect()
}

/// Smallest chord gap of one curve.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvexityVerdict {
    pub variant: Variant,
    pub j: usize,
    pub regime: Regime,
    pub min_gap: f64,
}

impl ConvexityVerdict {
    pub fn pass(&self) -> bool {
        self.min_gap >= -CONVEXITY_SLACK
    }
}

/// Convexity of `per_avg` and every `PER_i` in `eps_star` for each FBL
/// group of an `eps_star` sweep. Infeasible points are left out.
pub fn convexity_verdicts(spec: &SweepSpec, rows: &[Row]) -> Vec<ConvexityVerdict> {
    let n = spec.values.len();
    spec.groups()
        .into_iter()
        .zip(rows.chunks(n))
        .filter(|((_, _, regime), _)| *regime == Regime::Fbl)
        .map(|((variant, _, regime), chunk)| {
            let mut pts: Vec<(f64, &Row)> = spec
                .values
                .iter()
                .copied()
                .zip(chunk)
                .filter(|(_, r)| r.status == Status::Ok)
                .collect();
            pts.sort_by(|a, b| a.0.total_cmp(&b.0));
            let xs: Vec<f64> = pts.iter().map(|p| p.0).collect();
            let mut curves: Vec<Vec<f64>> =
                vec![pts.iter().map(|p| p.1.per_avg.unwrap_or(0.0)).collect()];
            let width = pts.first().map(|p| p.1.per_packet.len()).unwrap_or(0);
            for i in 0..width {
                curves.push(pts.iter().map(|p| p.1.per_packet[i]).collect());
            }
            let min_gap = curves
                .iter()
                .flat_map(|ys| chord_gaps(&xs, ys))
                .fold(f64::INFINITY, f64::min);
            ConvexityVerdict {
                variant,
                j: chunk.first().map(|r| r.j).unwrap_or(0),
                regime,
                min_gap,
            }
        })
        .collect()
}

/// Verdict lines, `#`-prefixed so CSV readers can skip them as comments.
pub fn write_verdicts<W: Write>(mut out: W, verdicts: &[ConvexityVerdict]) -> Result<()> {
    for v in verdicts {
        writeln!(
            out,
            "#convexity,{},{},{},{},{}",
            v.variant,
            v.j,
            v.regime,
            v.min_gap,
            if v.pass() { "pass" } else { "fail" }
        )
        .map_err(|e| Error::Config(format!("write failed: {e}")))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn value_specs() {
        assert_eq!(parse_values("1,2,3").unwrap(), vec![1.0, 2.0, 3.0]);
        assert_eq!(parse_values("0:10:3").unwrap(), vec![0.0, 5.0, 10.0]);
        let g = parse_values("1e-8:0.4:60:log").unwrap();
        assert_eq!(g.len(), 60);
        assert_eq!(g[0], 1e-8);
        assert_eq!(g[59], 0.4);
        assert!(g.windows(2).all(|w| w[1] > w[0]));
        for bad in ["", "1,x", "1:2", "1:2:0", "0:1:5:log", "1:2:3:cubic"] {
            assert!(parse_values(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn axis_bounds() {
        assert!(Axis::EpsStar.check(0.5).is_err());
        assert!(Axis::Terminals.check(2.5).is_err());
        assert!(Axis::SnrDb.check(-40.0).is_ok());
        assert_eq!("snr-db".parse::<Axis>().unwrap(), Axis::SnrDb);
    }

    #[test]
    fn groups_skip_unused_j() {
        let spec = SweepSpec {
            axis: Axis::EpsStar,
            values: vec![1e-3],
            variants: vec![Variant::Direct, Variant::BestRelay],
            js: vec![1, 2],
            regimes: vec![Regime::Fbl],
        };
        assert_eq!(spec.groups().len(), 3);
    }

    #[test]
    fn overloaded_frame_is_reported_not_fatal() {
        let spec = SweepSpec {
            axis: Axis::Terminals,
            values: vec![5.0, 150.0],
            variants: vec![Variant::Direct],
            js: vec![1],
            regimes: vec![Regime::Ibl],
        };
        let rows = run_sweep(&SystemConfig::default(), &spec, AnalyticOptions::default()).unwrap();
        assert_eq!(rows[0].status, Status::Ok);
        assert_eq!(rows[1].status, Status::Infeasible);
        let mut buf = Vec::new();
        write_rows(&mut buf, &rows).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.lines().nth(2).unwrap().ends_with(",infeasible"));
        assert!(text.starts_with("regime,variant,J,N,S,D,gamma_bar_db,eps_star,p_1,"));
    }
}
