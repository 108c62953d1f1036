//! Scalar channel mathematics for a complex quasi-static fading link.
//!
//! Covers the Shannon capacity and channel dispersion, the Gaussian Q-function
//! pair, the normal-approximation error probability at finite blocklength,
//! and the minimal blocklength map `g(γ)` together with its numerical
//! inverse.
//!
//! The normal approximation is only tight for blocklengths of roughly a
//! hundred symbols and more. No lower bound on `M` is enforced here.

use std::f64::consts::{LN_2, LOG2_E, SQRT_2};

use crate::error::{domain, Error, Result};
use crate::roots::brent;

/// Lower end of the SNR search bracket used by [`snr_for_blocklength`].
pub const SNR_FLOOR: f64 = 1e-12;
/// Upper end of the SNR search bracket. Blocklengths below `g(SNR_CEILING)`
/// are treated as unreachable.
pub const SNR_CEILING: f64 = 1e12;

const FRAC_1_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Instantaneous SNR of a link together with the fading draw that produced it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkSnr {
    pub gamma: f64,
    pub gamma_bar: f64,
    pub z: f64,
}

impl LinkSnr {
    /// `γ = z·γ̄` for a fading gain `z ≥ 0` and an average SNR `γ̄ > 0`.
    pub fn from_fading(gamma_bar: f64, z: f64) -> Result<Self> {
        if !(gamma_bar > 0.0) || !gamma_bar.is_finite() {
            return Err(domain("gamma_bar", gamma_bar));
        }
        if !(z >= 0.0) || !z.is_finite() {
            return Err(domain("z", z));
        }
        Ok(Self {
            gamma: z * gamma_bar,
            gamma_bar,
            z,
        })
    }
}

/// One operating point of a finite-blocklength transmission.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FblPoint {
    pub blocklength: f64,
    pub rate: f64,
    pub error: f64,
    pub capacity: f64,
    pub dispersion: f64,
}

impl FblPoint {
    /// Evaluates the error probability of sending `payload_bits` over
    /// `blocklength` symbols at SNR `gamma`.
    pub fn evaluate(gamma: f64, payload_bits: f64, blocklength: f64) -> Result<Self> {
        let error = fbl_error_prob(gamma, payload_bits, blocklength)?;
        Ok(Self {
            blocklength,
            rate: payload_bits / blocklength,
            error,
            capacity: shannon_capacity(gamma)?,
            dispersion: channel_dispersion(gamma)?,
        })
    }
}

/// `log2(1 + γ)` in bits per channel use.
pub fn shannon_capacity(gamma: f64) -> Result<f64> {
    if !(gamma >= 0.0) {
        return Err(domain("gamma", gamma));
    }
    Ok(capacity_unchecked(gamma))
}

/// `(1 − (1+γ)^{-2}) · (log2 e)²` in squared bits per channel use.
pub fn channel_dispersion(gamma: f64) -> Result<f64> {
    if !(gamma >= 0.0) {
        return Err(domain("gamma", gamma));
    }
    let s = dispersion_sqrt_factor(gamma);
    Ok(s * s * LOG2_E * LOG2_E)
}

#[inline]
fn capacity_unchecked(gamma: f64) -> f64 {
    gamma.ln_1p() / LN_2
}

/// `sqrt(1 − (1+γ)^{-2})`, written as `sqrt(γ(2+γ))/(1+γ)` to stay accurate
/// for small γ.
#[inline]
fn dispersion_sqrt_factor(gamma: f64) -> f64 {
    if gamma.is_infinite() {
        return 1.0;
    }
    (gamma * (2.0 + gamma)).sqrt() / (1.0 + gamma)
}

/// Gaussian tail probability `Q(w) = P(X > w)` for standard normal `X`.
pub fn q_func(w: f64) -> f64 {
    0.5 * libm::erfc(w / SQRT_2)
}

/// Inverse of [`q_func`] on `(0, 1)`.
///
/// Wichura's AS241 rational approximation followed by one Newton step on
/// the complementary error function.
pub fn q_inv(eps: f64) -> Result<f64> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(domain("eps", eps));
    }
    let mut x = -normal_quantile_as241(eps);
    let density = FRAC_1_SQRT_2PI * (-0.5 * x * x).exp();
    if density > 0.0 {
        x += (q_func(x) - eps) / density;
    }
    Ok(x)
}

/// Lower-tail standard normal quantile, algorithm AS241 (PPND16).
#[allow(clippy::excessive_precision)]
fn normal_quantile_as241(p: f64) -> f64 {
    let q = p - 0.5;
    if q.abs() <= 0.425 {
        let r = 0.180625 - q * q;
        let num = ((((((2.509_080_928_730_122_7e3 * r + 3.343_057_558_358_813e4) * r
            + 6.726_577_092_700_87e4)
            * r
            + 4.592_195_393_154_987e4)
            * r
            + 1.373_169_376_550_946e4)
            * r
            + 1.971_590_950_306_551_3e3)
            * r
            + 1.331_416_678_917_843_8e2)
            * r
            + 3.387_132_872_796_366_5;
        let den = ((((((5.226_495_278_852_854_5e3 * r + 2.872_908_573_572_194_3e4) * r
            + 3.930_789_580_009_271e4)
            * r
            + 2.121_379_430_158_659_7e4)
            * r
            + 5.394_196_021_424_751e3)
            * r
            + 6.871_870_074_920_579e2)
            * r
            + 4.231_333_070_160_091e1)
            * r
            + 1.0;
        return q * num / den;
    }

    let tail = if q < 0.0 { p } else { 1.0 - p };
    let mut r = (-tail.ln()).sqrt();
    let value = if r <= 5.0 {
        r -= 1.6;
        let num = ((((((7.745_450_142_783_414e-4 * r + 2.272_384_498_926_918_4e-2) * r
            + 2.417_807_251_774_506e-1)
            * r
            + 1.270_458_252_452_368_4)
            * r
            + 3.647_848_324_763_204_5)
            * r
            + 5.769_497_221_460_691)
            * r
            + 4.630_337_846_156_546)
            * r
            + 1.423_437_110_749_683_5;
        let den = ((((((1.050_750_071_644_416_8e-9 * r + 5.475_938_084_995_345e-4) * r
            + 1.519_866_656_361_645_7e-2)
            * r
            + 1.481_039_764_274_800_8e-1)
            * r
            + 6.897_673_349_851e-1)
            * r
            + 1.676_384_830_183_803_8)
            * r
            + 2.053_191_626_637_758_8)
            * r
            + 1.0;
        num / den
    } else {
        r -= 5.0;
        let num = ((((((2.010_334_399_292_288_1e-7 * r + 2.711_555_568_743_487_6e-5) * r
            + 1.242_660_947_388_078_4e-3)
            * r
            + 2.653_218_952_657_612_4e-2)
            * r
            + 2.965_605_718_285_048_7e-1)
            * r
            + 1.784_826_539_917_291_3)
            * r
            + 5.463_784_911_164_114)
            * r
            + 6.657_904_643_501_103;
        let den = ((((((2.044_263_103_389_939_7e-15 * r + 1.421_511_758_316_446e-7) * r
            + 1.846_318_317_510_054_8e-5)
            * r
            + 7.868_691_311_456_133e-4)
            * r
            + 1.487_536_129_085_061_5e-2)
            * r
            + 1.369_298_809_227_358e-1)
            * r
            + 5.998_322_065_558_88e-1)
            * r
            + 1.0;
        num / den
    };
    if q < 0.0 {
        -value
    } else {
        value
    }
}

/// Normal-approximation decoding error of `payload_bits` sent over
/// `blocklength` symbols at SNR `gamma`:
/// `Q((C(γ) − D/M) / sqrt(V(γ)/M))`.
pub fn fbl_error_prob(gamma: f64, payload_bits: f64, blocklength: f64) -> Result<f64> {
    if !(gamma > 0.0) {
        return Err(domain("gamma", gamma));
    }
    if !(payload_bits > 0.0) {
        return Err(domain("payload_bits", payload_bits));
    }
    if !(blocklength >= 1.0) {
        return Err(domain("blocklength", blocklength));
    }
    let c = capacity_unchecked(gamma);
    let sd = LOG2_E * dispersion_sqrt_factor(gamma) / blocklength.sqrt();
    Ok(q_func((c - payload_bits / blocklength) / sd))
}

/// Blocklength `D / log2(1+γ)` needed under the infinite-blocklength model.
pub fn ibl_min_blocklength(gamma: f64, payload_bits: f64) -> Result<f64> {
    if !(gamma > 0.0) {
        return Err(domain("gamma", gamma));
    }
    if !(payload_bits > 0.0) {
        return Err(domain("payload_bits", payload_bits));
    }
    Ok(payload_bits / capacity_unchecked(gamma))
}

/// Minimal blocklength `M*` that meets the target decoding error `eps_star`.
///
/// `M* = D/C + v²/2 + v·sqrt(D/C + v²/4)` with
/// `v = Q⁻¹(ε*)·log2(e)·sqrt(1−(1+γ)^{-2}) / C`.
pub fn minimal_blocklength(gamma: f64, payload_bits: f64, eps_star: f64) -> Result<f64> {
    FblCost::new(payload_bits, eps_star)?.blocklength(gamma)
}

/// Inverse of [`minimal_blocklength`] in `γ`: the SNR at which exactly `m`
/// symbols are needed.
pub fn snr_for_blocklength(m: f64, payload_bits: f64, eps_star: f64) -> Result<f64> {
    FblCost::new(payload_bits, eps_star)?.snr_for(m)
}

/// Minimal-blocklength map for a fixed payload and target error.
///
/// Caches `Q⁻¹(ε*)` so that per-draw evaluation in the simulator is cheap.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FblCost {
    payload_bits: f64,
    eps_star: f64,
    q_inv_eps: f64,
}

impl FblCost {
    pub fn new(payload_bits: f64, eps_star: f64) -> Result<Self> {
        if !(payload_bits > 0.0) || !payload_bits.is_finite() {
            return Err(domain("payload_bits", payload_bits));
        }
        if !(eps_star > 0.0 && eps_star < 0.5) {
            return Err(domain("eps_star", eps_star));
        }
        Ok(Self {
            payload_bits,
            eps_star,
            q_inv_eps: q_inv(eps_star)?,
        })
    }

    pub fn payload_bits(&self) -> f64 {
        self.payload_bits
    }

    pub fn eps_star(&self) -> f64 {
        self.eps_star
    }

    pub fn blocklength(&self, gamma: f64) -> Result<f64> {
        if !(gamma > 0.0) {
            return Err(domain("gamma", gamma));
        }
        Ok(self.blocklength_unchecked(gamma))
    }

    /// `g(γ)` without argument checks; `γ = 0` yields `+∞`.
    #[inline]
    pub fn blocklength_unchecked(&self, gamma: f64) -> f64 {
        let c = capacity_unchecked(gamma);
        let base = self.payload_bits / c;
        let v = self.q_inv_eps * LOG2_E * dispersion_sqrt_factor(gamma) / c;
        if !base.is_finite() || !v.is_finite() {
            return f64::INFINITY;
        }
        base + 0.5 * v * v + v * (base + 0.25 * v * v).sqrt()
    }

    /// Smallest blocklength reachable inside the SNR search bracket.
    pub fn infimum_blocklength(&self) -> f64 {
        self.blocklength_unchecked(SNR_CEILING)
    }

    /// `g⁻¹(m)`; fails with [`Error::Infeasible`] when `m` is at or below
    /// [`FblCost::infimum_blocklength`].
    pub fn snr_for(&self, m: f64) -> Result<f64> {
        if !(m > 0.0) {
            return Err(domain("m", m));
        }
        let infimum = self.infimum_blocklength();
        if m <= infimum {
            return Err(Error::Infeasible { m, infimum });
        }
        let lo = SNR_FLOOR.ln();
        let hi = SNR_CEILING.ln();
        if m >= self.blocklength_unchecked(SNR_FLOOR) {
            return Err(domain("m", m));
        }
        let target = m.ln();
        let x = brent(
            |x| self.blocklength_unchecked(x.exp()).ln() - target,
            lo,
            hi,
            1e-15,
            200,
        )?;
        Ok(x.exp())
    }
}
