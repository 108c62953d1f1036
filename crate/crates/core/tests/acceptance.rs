//! Acceptance suite. Prints one `PASS`/`FAIL` line per criterion, with
//! `info` lines for supporting numbers, and exits nonzero if any fails.

mod common;

use std::process::Command;

use common::*;
use fblnet::dist::{convolve, min_of};
use fblnet::fbl::{fbl_error_prob, minimal_blocklength, snr_for_blocklength};
use fblnet::montecarlo::{estimate_per, SimOptions};
use fblnet::overhead::{Regime, SnrSpec, SystemConfig, Variant};
use fblnet::path::{best_antenna_dist, best_relay_dist};
use fblnet::per::{chord_gaps, evaluate, schedule_probs, AnalyticOptions, PerResult};
use fblnet::sweep::grid;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SLACK: f64 = 1e-12;

fn per(c: &SystemConfig, regime: Regime) -> PerResult {
    evaluate(c, regime, AnalyticOptions::default()).unwrap()
}

fn with(variant: Variant, j: usize) -> SystemConfig {
    SystemConfig {
        variant,
        j,
        ..SystemConfig::default()
    }
}

/// Direct plus the cooperative variants at each of `js`.
fn variants(js: &[usize]) -> Vec<(Variant, usize)> {
    let mut v = vec![(Variant::Direct, 1)];
    for &j in js {
        v.push((Variant::BestRelay, j));
        v.push((Variant::BestAntenna, j));
    }
    v.push((Variant::BestRelayMax, 1));
    v
}

fn label(v: Variant, j: usize) -> String {
    match v {
        Variant::BestRelay | Variant::BestAntenna => format!("{v} J={j}"),
        _ => v.to_string(),
    }
}

struct Report {
    failed: Vec<&'static str>,
}

impl Report {
    fn verdict(&mut self, id: &'static str, pass: bool, detail: String) {
        println!(
            "{} criterion {id}: {detail}",
            if pass { "PASS" } else { "FAIL" }
        );
        if !pass {
            self.failed.push(id);
        }
    }
}

fn info(msg: String) {
    println!("  info: {msg}");
}

fn simulation_parity(r: &mut Report) {
    let frames = 10_000_000u64;
    let mut worst = f64::NEG_INFINITY;
    for (k, eps) in [1e-2, 1e-3, 1e-4].into_iter().enumerate() {
        let cases = [
            (Variant::Direct, 1),
            (Variant::BestRelay, 1),
            (Variant::BestRelay, 2),
            (Variant::BestAntenna, 1),
            (Variant::BestAntenna, 2),
        ];
        for (m, (v, j)) in cases.into_iter().enumerate() {
            let c = SystemConfig {
                eps_star: eps,
                ..with(v, j)
            };
            let analytic = per(&c, Regime::Fbl).per_avg;
            let seed = 1000 + (5 * k + m) as u64;
            let est =
                estimate_per(&c, Regime::Fbl, frames, seed, None, SimOptions::default()).unwrap();
            let trials = (frames * c.terminals as u64) as f64;
            let se = (analytic * (1.0 - analytic) / trials).sqrt();
            let allowed = 3.0 * se + eps * eps;
            let diff = (est.per_hat - analytic).abs();
            worst = worst.max(diff / allowed);
            info(format!(
                "ε*={eps:e} {:<17} analytic {analytic:.6e} simulated {:.6e} |Δ| {diff:.2e} allowed {allowed:.2e}",
                label(v, j),
                est.per_hat
            ));
        }
    }
    r.verdict(
        "1 simulation parity",
        worst <= 1.0,
        format!("15 points at 10^7 frames, worst |Δ|/allowance {worst:.3}"),
    );
}

fn convexity(r: &mut Report) {
    let eps = grid(1e-8, 0.4, 60, true);
    let log_eps: Vec<f64> = eps.iter().map(|e| e.ln()).collect();
    let mut all = true;
    for (v, j) in variants(&[1, 2]) {
        let results: Vec<PerResult> = eps
            .iter()
            .map(|&e| {
                per(
                    &SystemConfig {
                        eps_star: e,
                        ..with(v, j)
                    },
                    Regime::Fbl,
                )
            })
            .collect();
        let mut curves = vec![results.iter().map(|p| p.per_avg).collect::<Vec<_>>()];
        for i in 0..results[0].per_packet.len() {
            curves.push(results.iter().map(|p| p.per_packet[i]).collect());
        }
        let worst = |xs: &[f64]| {
            let mut w = (f64::INFINITY, 0.0);
            for ys in &curves {
                for (k, g) in chord_gaps(xs, ys).into_iter().enumerate() {
                    if g < w.0 {
                        w = (g, eps[k + 1]);
                    }
                }
            }
            w
        };
        let (in_eps, at) = worst(&eps);
        let (in_log, at_log) = worst(&log_eps);
        let ok = in_eps >= -SLACK;
        all &= ok;
        info(format!(
            "{:<17} smallest chord gap in ε* {in_eps:.3e} at {at:.2e} {}; second difference over ln ε* {in_log:.3e} at {at_log:.2e}",
            label(v, j),
            if ok { "convex" } else { "NOT convex" }
        ));
    }
    r.verdict(
        "2 convexity in ε*",
        all,
        "per_avg and every PER_i over 60 log-spaced ε* in [1e-8, 0.4]".into(),
    );
}

fn nondecreasing(ys: &[f64]) -> bool {
    ys.windows(2).all(|w| w[1] >= w[0] - SLACK)
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Checks FBL ≥ IBL at every point and returns the curves `(fbl, ibl)`.
fn ordered(configs: &[SystemConfig]) -> (bool, Vec<PerResult>, Vec<PerResult>) {
    let f: Vec<PerResult> = configs.iter().map(|c| per(c, Regime::Fbl)).collect();
    let i: Vec<PerResult> = configs.iter().map(|c| per(c, Regime::Ibl)).collect();
    let ok = f.iter().zip(&i).all(|(a, b)| {
        a.per_avg >= b.per_avg - SLACK
            && a.per_packet
                .iter()
                .zip(&b.per_packet)
                .all(|(x, y)| *x >= y - SLACK)
    });
    (ok, f, i)
}

fn regime_ordering(r: &mut Report) {
    let mut ok = true;
    let ds: Vec<f64> = (8..=28).map(|k| 2f64.powf(k as f64 / 2.0)).collect();
    let snrs: Vec<f64> = (-20..=30).map(f64::from).collect();
    let ns: Vec<usize> = (2..=99).collect();
    for (v, j) in variants(&[1, 2]) {
        let base = with(v, j);
        // payload sweep
        let cs: Vec<SystemConfig> = ds
            .iter()
            .map(|&d| SystemConfig {
                base_payload_bits: d,
                ..base.clone()
            })
            .collect();
        let (ord, f, i) = ordered(&cs);
        let ibl: Vec<f64> = i.iter().map(|p| p.per_avg).collect();
        let miss: Vec<f64> = f.iter().map(|p| mean(&p.unscheduled)).collect();
        let above_1e4: Vec<f64> = ds
            .iter()
            .zip(&i)
            .filter(|(d, _)| **d >= 1e4)
            .map(|(_, p)| p.per_avg)
            .collect();
        let d_ok = ord
            && nondecreasing(&ibl)
            && nondecreasing(&miss)
            && above_1e4.iter().all(|p| *p >= 0.8);
        info(format!(
            "{:<17} payload 2^4..2^14: order {ord}, monotone {}, smallest IBL PER at D0 ≥ 1e4 {:.4} (need ≥ 0.8)",
            label(v, j),
            nondecreasing(&ibl) && nondecreasing(&miss),
            above_1e4.iter().copied().fold(1.0, f64::min)
        ));
        // SNR sweep
        let cs: Vec<SystemConfig> = snrs
            .iter()
            .map(|&db| SystemConfig {
                snr: SnrSpec::Homogeneous { db },
                ..base.clone()
            })
            .collect();
        let (ord_s, f, i) = ordered(&cs);
        let ibl: Vec<f64> = i.iter().map(|p| -p.per_avg).collect();
        let miss: Vec<f64> = f.iter().map(|p| -mean(&p.unscheduled)).collect();
        let s_ok = ord_s && nondecreasing(&ibl) && nondecreasing(&miss);
        info(format!(
            "{:<17} SNR -20..30 dB: order {ord_s}, monotone {}",
            label(v, j),
            nondecreasing(&ibl) && nondecreasing(&miss)
        ));
        // terminal-count sweep
        let cs: Vec<SystemConfig> = ns
            .iter()
            .filter(|&&n| v != Variant::BestRelay || j + 2 <= n)
            .map(|&n| SystemConfig {
                terminals: n,
                ..base.clone()
            })
            .collect();
        let (ord_n, _, _) = ordered(&cs);
        info(format!("{:<17} N 2..99: order {ord_n}", label(v, j)));
        ok &= d_ok && s_ok && ord_n;
    }

    // gap between the regimes at high SNR, in decades
    let spread = |c: &SystemConfig| {
        let gaps: Vec<f64> = (20..=30)
            .map(|db| {
                let c = SystemConfig {
                    snr: SnrSpec::Homogeneous { db: f64::from(db) },
                    ..c.clone()
                };
                (per(&c, Regime::Fbl).per_avg / per(&c, Regime::Ibl).per_avg).log10()
            })
            .collect();
        let lo = gaps.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = gaps.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        (lo, hi)
    };
    for (v, j) in [
        (Variant::Direct, 1),
        (Variant::BestRelay, 2),
        (Variant::BestAntenna, 2),
    ] {
        let (lo, hi) = spread(&with(v, j));
        ok &= hi - lo <= 0.05;
        info(format!(
            "{:<17} FBL/IBL gap over 20..30 dB spans {lo:.3}..{hi:.3} decades (need a spread ≤ 0.05)",
            label(v, j)
        ));
    }
    for v in [Variant::BestRelay, Variant::BestAntenna] {
        let (lo, hi) = spread(&SystemConfig {
            eps_star: 1e-20,
            ..with(v, 2)
        });
        info(format!(
            "{:<17} with the decoding floor pushed down to ε*=1e-20 the gap spans {lo:.3}..{hi:.3} decades",
            label(v, 2)
        ));
    }
    r.verdict(
        "3 regime ordering",
        ok,
        "FBL ≥ IBL on payload, SNR and terminal sweeps, with monotonicity, saturation and a flat high-SNR gap".into(),
    );
}

fn dominance(r: &mut Report) {
    let ds: Vec<f64> = (8..=28).map(|k| 2f64.powf(k as f64 / 2.0)).collect();
    let mut ok = true;
    for j in [2, 3] {
        for regime in [Regime::Ibl, Regime::Fbl] {
            for beta in [0.0, 8.0] {
                let mut worst = (f64::NEG_INFINITY, 0.0);
                for &d in &ds {
                    let at = |v| SystemConfig {
                        base_payload_bits: d,
                        beta_bits: beta,
                        ..with(v, j)
                    };
                    let a = per(&at(Variant::BestAntenna), regime).per_avg;
                    let b = per(&at(Variant::BestRelay), regime).per_avg;
                    if a - b > worst.0 {
                        worst = (a - b, d);
                    }
                }
                let pass = worst.0 <= SLACK;
                ok &= pass;
                info(format!(
                    "J={j} {regime} β={beta}: max PER(BA) − PER(BR) {:.3e} at D0={:.0} {}",
                    worst.0,
                    worst.1,
                    if pass { "ok" } else { "violated" }
                ));
            }
        }
    }
    r.verdict(
        "4 best-antenna dominance",
        ok,
        "PER(BA) ≤ PER(BR) at 15 dB, J ∈ {2,3}, D0 = 2^4..2^14 bits, β ∈ {0, 8}, both regimes"
            .into(),
    );
}

fn sign_changes(ys: &[f64]) -> (usize, Option<usize>) {
    let signs: Vec<(usize, f64)> = ys
        .windows(2)
        .enumerate()
        .map(|(k, w)| (k, w[1] - w[0]))
        .filter(|(_, d)| d.abs() > SLACK)
        .collect();
    let changes = signs
        .windows(2)
        .filter(|w| w[0].1.signum() != w[1].1.signum())
        .count();
    let turn = signs.iter().find(|(_, d)| *d > 0.0).map(|(k, _)| *k);
    (changes, turn)
}

fn max_relay_shape(r: &mut Report) {
    let ns: Vec<usize> = (2..=99).collect();
    let curve = |regime| -> Vec<f64> {
        ns.iter()
            .map(|&n| {
                per(
                    &SystemConfig {
                        terminals: n,
                        ..with(Variant::BestRelayMax, 1)
                    },
                    regime,
                )
                .per_avg
            })
            .collect()
    };
    let fbl = curve(Regime::Fbl);
    let (changes, turn) = sign_changes(&fbl);
    let first_down = fbl.windows(2).position(|w| w[1] < w[0] - SLACK);
    let argmin = fbl
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(k, p)| (ns[k], *p))
        .unwrap();
    info(format!(
        "FBL minimum PER {:.3e} at N={}, first rise after N={:?}",
        argmin.1,
        argmin.0,
        turn.map(|k| ns[k])
    ));
    let (ibl_changes, _) = sign_changes(&curve(Regime::Ibl));
    info(format!(
        "IBL sign changes {ibl_changes} (not part of the verdict)"
    ));
    r.verdict(
        "5 max-relay quasi-convexity",
        changes == 1 && first_down == Some(0),
        format!("FBL PER over N=2..99 has {changes} sign change(s) in its successive differences"),
    );
}

fn enumeration(r: &mut Report) {
    let ds = handmade();
    let mut worst = 0f64;
    for a in &ds {
        for b in &ds {
            let items = joint(&[a, b]);
            let (pmf, tail) = histogram(7, items.iter().map(|(x, p)| (min(x[0], x[1]), *p)));
            worst = worst.max(max_deviation(&min_of(a, b).unwrap(), &pmf, tail));
        }
    }
    for (up, down) in [(&ds[0], &ds[4]), (&ds[2], &ds[1]), (&ds[3], &ds[3])] {
        let items = joint(&[up, up, down, down]);
        let (pmf, tail) = histogram(
            7,
            items
                .iter()
                .map(|(x, p)| (add(min(x[0], x[1]), min(x[2], x[3])), *p)),
        );
        worst = worst.max(max_deviation(
            &best_antenna_dist(up, down, 2).unwrap(),
            &pmf,
            tail,
        ));
    }
    let hops = [(&ds[0], &ds[4]), (&ds[1], &ds[0]), (&ds[4], &ds[3])];
    let paths: Vec<_> = hops.iter().map(|(a, b)| convolve(a, b).unwrap()).collect();
    let items = joint(&[
        hops[0].0, hops[0].1, hops[1].0, hops[1].1, hops[2].0, hops[2].1,
    ]);
    let (pmf, tail) = histogram(
        7,
        items.iter().map(|(x, p)| {
            (
                min(min(add(x[0], x[1]), add(x[2], x[3])), add(x[4], x[5])),
                *p,
            )
        }),
    );
    worst = worst.max(max_deviation(&best_relay_dist(&paths).unwrap(), &pmf, tail));
    for triple in [[0, 1, 4], [4, 4, 4], [1, 0, 3], [3, 2, 1]] {
        let chosen: Vec<_> = triple.iter().map(|&i| ds[i].clone()).collect();
        let mut want = [0.0; 3];
        for (x, p) in joint(&[&chosen[0], &chosen[1], &chosen[2]]) {
            let mut sum = Some(0);
            for i in 0..3 {
                sum = add(sum, x[i]);
                if sum.is_some_and(|s| s <= 7) {
                    want[i] += p;
                }
            }
        }
        let got = schedule_probs(&chosen).unwrap();
        for i in 0..3 {
            worst = worst.max((got[i] - want[i]).abs());
        }
    }
    r.verdict(
        "6 enumeration oracles",
        worst <= 1e-12,
        format!("min, best-antenna, best-relay and scheduling on 8-point grids, max deviation {worst:.2e}"),
    );
}

fn inversion(r: &mut Report) {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (mut we, mut wg) = (0f64, 0f64);
    for _ in 0..1000 {
        let gamma = 10f64.powf(rng.random_range(-2.0..3.0));
        let d = 2f64.powf(rng.random_range(4.0..14.0));
        let eps = 10f64.powf(rng.random_range(-12.0..-0.4));
        let m = minimal_blocklength(gamma, d, eps).unwrap();
        we = we.max(((fbl_error_prob(gamma, d, m).unwrap() - eps) / eps).abs());
        wg = wg.max(((snr_for_blocklength(m, d, eps).unwrap() - gamma) / gamma).abs());
    }
    r.verdict(
        "7 inversion identities",
        we <= 1e-9 && wg <= 1e-9,
        format!("1000 triples, worst relative error ε* {we:.2e}, γ {wg:.2e}"),
    );
}

fn determinism(r: &mut Report) {
    let run = |workers: &str| {
        let out = Command::new(env!("CARGO_BIN_EXE_fblnet"))
            .args([
                "simulate",
                "--variant",
                "direct,best-relay,best-antenna,best-relay-max",
                "--j",
                "2",
                "--eps-star",
                "1e-3",
                "--frames",
                "300000",
                "--seed",
                "42",
            ])
            .env("FBLNET_WORKERS", workers)
            .output()
            .unwrap();
        assert!(out.status.success());
        out.stdout
    };
    let reference = run("1");
    let same = ["1", "2", "3", "8"].iter().all(|w| run(w) == reference);
    r.verdict(
        "8 determinism",
        same && !reference.is_empty(),
        format!(
            "simulate output identical across repeated runs and 1, 2, 3, 8 workers ({} bytes)",
            reference.len()
        ),
    );
}

fn main() {
    let mut r = Report { failed: Vec::new() };
    simulation_parity(&mut r);
    convexity(&mut r);
    regime_ordering(&mut r);
    dominance(&mut r);
    max_relay_shape(&mut r);
    enumeration(&mut r);
    inversion(&mut r);
    determinism(&mut r);
    if !r.failed.is_empty() {
        println!("failed: {}", r.failed.join(", "));
        std::process::exit(1);
    }
}
