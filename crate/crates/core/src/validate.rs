//! Built-in invariant suite behind `fblnet validate`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dist::{min_of, BlocklengthDistribution};
use crate::error::Result;
use crate::fbl::{fbl_error_prob, minimal_blocklength, snr_for_blocklength};
use crate::montecarlo::{estimate_per, SimOptions};
use crate::overhead::{Regime, SnrSpec, SystemConfig, Variant};
use crate::per::{evaluate, schedule_probs, AnalyticOptions};
use crate::sweep::{convexity_verdicts, grid, run_sweep, Axis, SweepSpec};

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

fn check(name: &'static str, pass: bool, detail: String) -> Check {
    Check { name, pass, detail }
}

/// Runs every check against `base`. `frames` sizes the simulation check.
pub fn run_all(base: &SystemConfig, frames: u64, workers: Option<usize>) -> Result<Vec<Check>> {
    Ok(vec![
        payloads(base),
        inversion()?,
        enumeration()?,
        convexity(base)?,
        regime_ordering(base)?,
        simulation(base, frames, workers)?,
    ])
}

fn payloads(base: &SystemConfig) -> Check {
    let a = SystemConfig {
        variant: Variant::BestAntenna,
        ..base.clone()
    };
    let r = SystemConfig {
        variant: Variant::BestRelay,
        ..base.clone()
    };
    let pass = base.terminals < 2 || r.payload_bits() < a.payload_bits();
    check(
        "relay_payload_below_antenna_payload",
        pass,
        format!(
            "best-relay {} bits, best-antenna {} bits",
            r.payload_bits(),
            a.payload_bits()
        ),
    )
}

fn inversion() -> Result<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut worst = 0f64;
    for _ in 0..200 {
        let gamma = 10f64.powf(rng.random_range(-1.0..3.0));
        let d = rng.random_range(16.0..4096.0);
        let eps = 10f64.powf(rng.random_range(-9.0..-1.0));
        let m = minimal_blocklength(gamma, d, eps)?;
        worst = worst.max(((fbl_error_prob(gamma, d, m)? - eps) / eps).abs());
        worst = worst.max(((snr_for_blocklength(m, d, eps)? - gamma) / gamma).abs());
    }
    Ok(check(
        "inversion_identities",
        worst <= 1e-9,
        format!("max relative error {worst}"),
    ))
}

fn enumeration() -> Result<Check> {
    let a = BlocklengthDistribution::new(vec![0.0, 0.2, 0.3, 0.1], 0.4)?;
    let b = BlocklengthDistribution::new(vec![0.1, 0.0, 0.4, 0.2], 0.3)?;
    let outcomes = |d: &BlocklengthDistribution| {
        let mut v: Vec<(usize, f64)> = d.pmf().iter().copied().enumerate().collect();
        v.push((usize::MAX, d.tail_mass()));
        v
    };
    let mut pmf = [0.0; 4];
    let mut tail = 0.0;
    let mut fits = [0.0; 2];
    for (x, px) in outcomes(&a) {
        for (y, py) in outcomes(&b) {
            match x.min(y) {
                usize::MAX => tail += px * py,
                m => pmf[m] += px * py,
            }
            if x <= 3 {
                fits[0] += px * py;
                if y <= 3 && x + y <= 3 {
                    fits[1] += px * py;
                }
            }
        }
    }
    let m = min_of(&a, &b)?;
    let p = schedule_probs(&[a, b])?;
    let err = m
        .pmf()
        .iter()
        .zip(pmf)
        .map(|(x, y)| (x - y).abs())
        .chain([
            (m.tail_mass() - tail).abs(),
            (p[0] - fits[0]).abs(),
            (p[1] - fits[1]).abs(),
        ])
        .fold(0.0, f64::max);
    Ok(check(
        "enumeration_oracle",
        err <= 1e-12,
        format!("max deviation {err}"),
    ))
}

fn convexity(base: &SystemConfig) -> Result<Check> {
    let spec = SweepSpec {
        axis: Axis::EpsStar,
        values: grid(1e-8, 0.4, 24, true),
        variants: Variant::ALL.to_vec(),
        js: vec![2],
        regimes: vec![Regime::Fbl],
    };
    let base = SystemConfig {
        terminals: base.terminals.max(4),
        ..base.clone()
    };
    let rows = run_sweep(&base, &spec, AnalyticOptions::default())?;
    let verdicts = convexity_verdicts(&spec, &rows);
    let worst = verdicts
        .iter()
        .map(|v| v.min_gap)
        .fold(f64::INFINITY, f64::min);
    Ok(check(
        "convexity_in_eps_star",
        verdicts.iter().all(|v| v.pass()),
        format!("smallest chord gap {worst}"),
    ))
}

fn regime_ordering(base: &SystemConfig) -> Result<Check> {
    let mut worst = f64::INFINITY;
    for db in [-10.0, 0.0, 10.0, 20.0, 30.0] {
        let c = SystemConfig {
            snr: SnrSpec::Homogeneous { db },
            ..base.clone()
        };
        if c.validate().is_err() {
            continue;
        }
        let f = evaluate(&c, Regime::Fbl, AnalyticOptions::default())?.per_avg;
        let i = evaluate(&c, Regime::Ibl, AnalyticOptions::default())?.per_avg;
        worst = worst.min(f - i);
    }
    Ok(check(
        "fbl_not_below_ibl",
        worst >= 0.0,
        format!("smallest PER gap {worst}"),
    ))
}

fn simulation(base: &SystemConfig, frames: u64, workers: Option<usize>) -> Result<Check> {
    let c = SystemConfig {
        eps_star: 1e-2,
        ..base.clone()
    };
    let analytic = evaluate(&c, Regime::Fbl, AnalyticOptions::default())?.per_avg;
    let est = estimate_per(&c, Regime::Fbl, frames, 1, workers, SimOptions::default())?;
    let se = (analytic * (1.0 - analytic) / frames as f64).sqrt();
    let slack = 4.0 * se + c.eps_star * c.eps_star;
    let diff = (est.per_hat - analytic).abs();
    Ok(check(
        "simulation_matches_analytic",
        diff <= slack,
        format!(
            "simulated {} analytic {analytic} allowed {slack}",
            est.per_hat
        ),
    ))
}
