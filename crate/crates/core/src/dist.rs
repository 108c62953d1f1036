//! Discrete distributions of the integer symbol cost of a transmission.
//!
//! A [`BlocklengthDistribution`] lives on the grid `0..=grid_max` where
//! `grid_max` is the symbol budget of a frame. Mass that cannot fit in the
//! budget is kept apart as `tail_mass`; any combination involving a tail
//! outcome is again a tail outcome.
//!
//! Single-hop costs are rounded up to whole symbols, so the mass at `m` is
//! `F(m) − F(m−1)` where `F` is the continuous CDF of the minimal
//! blocklength. All operators are written in terms of survival functions
//! so that tiny tail probabilities keep their relative accuracy.

use std::io::Write;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::error::{domain, Error, Result};
use crate::fbl::FblCost;

/// Allowed deviation of `Σ pmf + tail_mass` from one.
pub const MASS_TOLERANCE: f64 = 1e-9;

/// Grids above this size are convolved through an FFT.
pub const FFT_THRESHOLD: usize = 12_000;

#[derive(Debug, Clone, PartialEq)]
pub struct BlocklengthDistribution {
    pmf: Vec<f64>,
    tail_mass: f64,
}

impl BlocklengthDistribution {
    /// Builds a distribution from masses at `0..=grid_max` and the tail mass.
    pub fn new(mut pmf: Vec<f64>, tail_mass: f64) -> Result<Self> {
        if pmf.is_empty() {
            return Err(Error::Config(
                "distribution grid must contain at least one point".into(),
            ));
        }
        for p in pmf.iter_mut() {
            *p = unit(*p).ok_or_else(|| domain("pmf", *p))?;
        }
        let tail_mass = unit(tail_mass).ok_or_else(|| domain("tail_mass", tail_mass))?;
        let d = Self { pmf, tail_mass };
        d.check_mass()?;
        Ok(d)
    }

    /// All mass at blocklength `m` (`m > grid_max` puts it in the tail).
    pub fn point_mass(grid_max: usize, m: usize) -> Self {
        let mut pmf = vec![0.0; grid_max + 1];
        if m <= grid_max {
            pmf[m] = 1.0;
            Self {
                pmf,
                tail_mass: 0.0,
            }
        } else {
            Self {
                pmf,
                tail_mass: 1.0,
            }
        }
    }

    /// A path that can never be scheduled.
    pub fn unschedulable(grid_max: usize) -> Self {
        Self::point_mass(grid_max, grid_max + 1)
    }

    pub fn grid_max(&self) -> usize {
        self.pmf.len() - 1
    }

    pub fn pmf(&self) -> &[f64] {
        &self.pmf
    }

    pub fn tail_mass(&self) -> f64 {
        self.tail_mass
    }

    /// Probability that the cost fits the grid.
    pub fn schedulable_mass(&self) -> f64 {
        self.pmf.iter().sum()
    }

    /// `P(M ≤ m)` for `m = 0..=grid_max`.
    pub fn cdf(&self) -> Vec<f64> {
        self.pmf
            .iter()
            .scan(0.0, |acc, p| {
                *acc += p;
                Some(*acc)
            })
            .collect()
    }

    /// `P(M > m)` for `m = 0..=grid_max`, tail included.
    pub fn survival(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.pmf.len()];
        let mut acc = self.tail_mass;
        for m in (0..self.pmf.len()).rev() {
            out[m] = acc;
            acc += self.pmf[m];
        }
        out
    }

    pub fn mass_drift(&self) -> f64 {
        self.schedulable_mass() + self.tail_mass - 1.0
    }

    fn check_mass(&self) -> Result<()> {
        let drift = self.mass_drift();
        if drift.abs() > MASS_TOLERANCE || !drift.is_finite() {
            return Err(Error::MassDrift { drift });
        }
        Ok(())
    }

    fn same_grid(&self, other: &Self) -> Result<()> {
        if self.pmf.len() != other.pmf.len() {
            return Err(Error::GridMismatch {
                left: self.grid_max(),
                right: other.grid_max(),
            });
        }
        Ok(())
    }

    /// True when `self` is stochastically smaller than or equal to `other`,
    /// i.e. its CDF is pointwise at least `other`'s (up to `tol`).
    pub fn dominates(&self, other: &Self, tol: f64) -> bool {
        self.pmf.len() == other.pmf.len()
            && self
                .survival()
                .iter()
                .zip(other.survival())
                .all(|(a, b)| *a <= b + tol)
    }

    /// Writes `m,pmf,cdf` rows followed by a `tail_mass` footer row.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let io = |e: csv::Error| Error::Config(format!("csv output: {e}"));
        w.write_record(["m", "pmf", "cdf"]).map_err(io)?;
        for (m, (p, c)) in self.pmf.iter().zip(self.cdf()).enumerate() {
            w.write_record([m.to_string(), p.to_string(), c.to_string()])
                .map_err(io)?;
        }
        w.write_record([
            "tail_mass".to_string(),
            self.tail_mass.to_string(),
            "1".to_string(),
        ])
        .map_err(io)?;
        w.flush()
            .map_err(|e| Error::Config(format!("csv output: {e}")))?;
        Ok(())
    }

    /// Builds a distribution from `x[m] = −ln F(m)` for `m = 1..=grid_max`,
    /// where `F` is the continuous CDF and `F(0) = 0`. `x = +∞` marks
    /// blocklengths that no channel state achieves.
    fn from_neg_log_cdf(x: &[f64]) -> Result<Self> {
        let grid_max = x.len();
        let mut pmf = vec![0.0; grid_max + 1];
        let mut prev = f64::INFINITY;
        for (i, &xm) in x.iter().enumerate() {
            pmf[i + 1] = if xm.is_infinite() {
                0.0
            } else if prev.is_infinite() {
                (-xm).exp()
            } else {
                (-xm).exp() * -(-(prev - xm)).exp_m1()
            };
            prev = xm;
        }
        let tail_mass = match x.last() {
            Some(xl) if xl.is_finite() => -(-xl).exp_m1(),
            _ => 1.0,
        };
        Self::new(pmf, tail_mass)
    }
}

/// Snaps rounding excursions just outside `[0, 1]` back in.
fn unit(p: f64) -> Option<f64> {
    const SLACK: f64 = 1e-12;
    (-SLACK..=1.0 + SLACK)
        .contains(&p)
        .then(|| p.clamp(0.0, 1.0))
}

fn check_grid_max(grid_max: usize) -> Result<()> {
    if grid_max < 1 {
        return Err(domain("grid_max", grid_max as f64));
    }
    Ok(())
}

/// Cost of one hop under Rayleigh fading in the finite-blocklength regime.
///
/// `F(m) = P(M* ≤ m) = P(γ ≥ g⁻¹(m)) = exp(−g⁻¹(m)/γ̄)` since `g` is
/// decreasing in γ.
pub fn single_hop_dist_fbl(
    gamma_bar: f64,
    payload_bits: f64,
    eps_star: f64,
    grid_max: usize,
) -> Result<BlocklengthDistribution> {
    if !(gamma_bar > 0.0) || !gamma_bar.is_finite() {
        return Err(domain("gamma_bar", gamma_bar));
    }
    check_grid_max(grid_max)?;
    let cost = FblCost::new(payload_bits, eps_star)?;
    let infimum = cost.infimum_blocklength();
    let x = (1..=grid_max)
        .map(|m| {
            let m = m as f64;
            if m <= infimum {
                Ok(f64::INFINITY)
            } else {
                cost.snr_for(m).map(|g| g / gamma_bar)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    BlocklengthDistribution::from_neg_log_cdf(&x)
}

/// Cost of one hop under Rayleigh fading in the infinite-blocklength regime:
/// `F(m) = exp(−(2^{D/m} − 1)/γ̄)`.
pub fn single_hop_dist_ibl(
    gamma_bar: f64,
    payload_bits: f64,
    grid_max: usize,
) -> Result<BlocklengthDistribution> {
    if !(gamma_bar > 0.0) || !gamma_bar.is_finite() {
        return Err(domain("gamma_bar", gamma_bar));
    }
    if !(payload_bits > 0.0) || !payload_bits.is_finite() {
        return Err(domain("payload_bits", payload_bits));
    }
    check_grid_max(grid_max)?;
    let x: Vec<f64> = (1..=grid_max)
        .map(|m| (payload_bits * std::f64::consts::LN_2 / m as f64).exp_m1() / gamma_bar)
        .collect();
    BlocklengthDistribution::from_neg_log_cdf(&x)
}

/// Distribution of the sum of two independent costs.
pub fn convolve(
    a: &BlocklengthDistribution,
    b: &BlocklengthDistribution,
) -> Result<BlocklengthDistribution> {
    a.same_grid(b)?;
    let g = a.grid_max();

    // P(sum > G) over in-grid pairs, from the in-grid survival of b
    let mut b_over = vec![0.0; g + 1];
    let mut acc = 0.0;
    for j in (0..=g).rev() {
        b_over[j] = acc;
        acc += b.pmf[j];
    }
    let overflow: f64 = a
        .pmf
        .iter()
        .zip(b_over.iter().rev())
        .map(|(p, s)| p * s)
        .sum();
    let either_tail = a.tail_mass + b.tail_mass * (1.0 - a.tail_mass);
    let tail_mass = (either_tail + overflow).min(1.0);

    if g + 1 > FFT_THRESHOLD {
        return convolve_fft(a, b, tail_mass);
    }

    let mut pmf = vec![0.0; g + 1];
    for (k, &pa) in a.pmf.iter().enumerate() {
        if pa == 0.0 {
            continue;
        }
        for (out, &pb) in pmf[k..].iter_mut().zip(&b.pmf) {
            *out += pa * pb;
        }
    }
    BlocklengthDistribution::new(pmf, tail_mass)
}

fn convolve_fft(
    a: &BlocklengthDistribution,
    b: &BlocklengthDistribution,
    tail_mass: f64,
) -> Result<BlocklengthDistribution> {
    let len = a.pmf.len();
    let n = (2 * len).next_power_of_two();
    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(n);
    let inv = planner.plan_fft_inverse(n);
    let lift = |p: &[f64]| {
        let mut v: Vec<Complex<f64>> = p.iter().map(|&x| Complex::new(x, 0.0)).collect();
        v.resize(n, Complex::new(0.0, 0.0));
        v
    };
    let mut fa = lift(&a.pmf);
    let mut fb = lift(&b.pmf);
    fwd.process(&mut fa);
    fwd.process(&mut fb);
    for (x, y) in fa.iter_mut().zip(&fb) {
        *x *= y;
    }
    inv.process(&mut fa);
    let scale = 1.0 / n as f64;
    let mut pmf: Vec<f64> = fa[..len].iter().map(|c| (c.re * scale).max(0.0)).collect();

    let target = 1.0 - tail_mass;
    let total: f64 = pmf.iter().sum();
    if (total - target).abs() > MASS_TOLERANCE {
        return Err(Error::MassDrift {
            drift: total - target,
        });
    }
    if total > 0.0 {
        let k = target / total;
        pmf.iter_mut().for_each(|p| *p *= k);
    }
    BlocklengthDistribution::new(pmf, tail_mass)
}

/// Distribution of `min(A, B)` for independent `A`, `B`:
/// `1 − F = (1 − F_a)(1 − F_b)`.
pub fn min_of(
    a: &BlocklengthDistribution,
    b: &BlocklengthDistribution,
) -> Result<BlocklengthDistribution> {
    a.same_grid(b)?;
    let sa = a.survival();
    let sb = b.survival();
    let pmf = (0..a.pmf.len())
        .map(|m| {
            let sb_prev = if m == 0 { 1.0 } else { sb[m - 1] };
            a.pmf[m] * sb_prev + sa[m] * b.pmf[m]
        })
        .collect();
    BlocklengthDistribution::new(pmf, a.tail_mass * b.tail_mass)
}

/// Minimum of `j` independent copies of `d`: `1 − F = (1 − F_d)^j`.
pub fn best_of_iid(d: &BlocklengthDistribution, j: usize) -> Result<BlocklengthDistribution> {
    if j == 0 {
        return Err(domain("j", 0.0));
    }
    let mut out = d.clone();
    for _ in 1..j {
        out = min_of(&out, d)?;
    }
    Ok(out)
}
