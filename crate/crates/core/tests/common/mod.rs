//! Brute-force reference implementations shared by the integration tests.
#![allow(dead_code)]

use fblnet::dist::BlocklengthDistribution;

/// `None` marks a cost beyond the budget.
pub type Outcome = (Option<usize>, f64);

pub fn outcomes(d: &BlocklengthDistribution) -> Vec<Outcome> {
    let mut v: Vec<Outcome> = d
        .pmf()
        .iter()
        .copied()
        .enumerate()
        .map(|(m, p)| (Some(m), p))
        .collect();
    v.push((None, d.tail_mass()));
    v
}

/// Cartesian product of the outcomes of several independent variables.
pub fn joint(dists: &[&BlocklengthDistribution]) -> Vec<(Vec<Option<usize>>, f64)> {
    let mut acc: Vec<(Vec<Option<usize>>, f64)> = vec![(Vec::new(), 1.0)];
    for d in dists {
        let mut next = Vec::new();
        for (xs, p) in &acc {
            for (x, q) in outcomes(d) {
                let mut ys = xs.clone();
                ys.push(x);
                next.push((ys, p * q));
            }
        }
        acc = next;
    }
    acc
}

pub fn add(a: Option<usize>, b: Option<usize>) -> Option<usize> {
    Some(a? + b?)
}

pub fn min(a: Option<usize>, b: Option<usize>) -> Option<usize> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (Some(x), None) | (None, Some(x)) => Some(x),
        (None, None) => None,
    }
}

/// Accumulates weighted outcomes into `(pmf, tail)` on `0..=grid_max`.
pub fn histogram(grid_max: usize, items: impl IntoIterator<Item = Outcome>) -> (Vec<f64>, f64) {
    let mut pmf = vec![0.0; grid_max + 1];
    let mut tail = 0.0;
    for (x, p) in items {
        match x {
            Some(m) if m <= grid_max => pmf[m] += p,
            _ => tail += p,
        }
    }
    (pmf, tail)
}

pub fn max_deviation(d: &BlocklengthDistribution, pmf: &[f64], tail: f64) -> f64 {
    assert_eq!(d.pmf().len(), pmf.len());
    d.pmf()
        .iter()
        .zip(pmf)
        .map(|(a, b)| (a - b).abs())
        .fold((d.tail_mass() - tail).abs(), f64::max)
}

/// A distribution on `0..=grid_max` from unnormalized weights (last one is the tail).
pub fn from_weights(weights: &[f64]) -> BlocklengthDistribution {
    let total: f64 = weights.iter().sum();
    let mut pmf: Vec<f64> = weights.iter().map(|w| w / total).collect();
    let tail = pmf.pop().unwrap();
    let drift = 1.0 - pmf.iter().sum::<f64>() - tail;
    BlocklengthDistribution::new(pmf, (tail + drift).clamp(0.0, 1.0)).unwrap()
}

/// Handmade distributions on grids of eight points.
pub fn handmade() -> Vec<BlocklengthDistribution> {
    vec![
        from_weights(&[0.0, 0.05, 0.2, 0.25, 0.1, 0.1, 0.05, 0.05, 0.2]),
        from_weights(&[0.1, 0.0, 0.0, 0.3, 0.3, 0.0, 0.2, 0.1, 0.0]),
        from_weights(&[0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0]),
        from_weights(&[0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]),
        from_weights(&[0.02, 0.08, 0.15, 0.15, 0.15, 0.15, 0.1, 0.1, 0.1]),
    ]
}

/// Minimal blocklength by bisection on the error probability: the `M` at
/// which `fbl_error_prob(γ, D, M) = ε`.
pub fn blocklength_by_bisection(gamma: f64, d: f64, eps: f64) -> f64 {
    let err = |m: f64| fblnet::fbl::fbl_error_prob(gamma, d, m).unwrap();
    let mut lo = 1.0;
    let mut hi = 2.0;
    while err(hi) > eps {
        hi *= 2.0;
    }
    if err(lo) <= eps {
        return lo;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if err(mid) > eps {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// SNR needed for `eps` at blocklength `m`, by bisection in `log γ` on the
/// error probability.
pub fn snr_by_bisection(m: f64, d: f64, eps: f64) -> f64 {
    let err = |lg: f64| fblnet::fbl::fbl_error_prob(lg.exp(), d, m).unwrap();
    let (mut lo, mut hi) = (-30f64, 30f64);
    for _ in 0..300 {
        let mid = 0.5 * (lo + hi);
        if err(mid) > eps {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (0.5 * (lo + hi)).exp()
}
