//! Achievable symmetric rates for the same-linear-code MAC and the K-user
//! integer-interference channel.
//!
//! Rates are in bits per real channel use. Exponentials are natural, logs
//! base two. SNRs are linear.

use std::f64::consts::PI;

use crate::diophantine::{self, is_admissible, primes_up_to, ConvergentProfile, Fraction, Gain};
use crate::network::ChannelMatrix;
use crate::{par, Error, Result};

/// Default hard cap on the prime search.
pub const DEFAULT_P_CAP: u64 = 100_000;

/// Smallest prime search bound used by the default rule.
pub const MIN_P_MAX: u64 = 101;

/// Default prime search bound: `max(101, ceil(sqrt(snr)))`, capped.
pub fn default_p_max(snr: f64, cap: u64) -> u64 {
    let root = snr.max(0.0).sqrt().ceil();
    let bound = if root >= cap as f64 { cap } else { (root as u64).max(MIN_P_MAX) };
    bound.min(cap)
}

/// How the prime search bound is chosen at each SNR of a scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PMaxRule {
    /// [`default_p_max`] with the given cap.
    Default { cap: u64 },
    /// A fixed bound at every SNR.
    Fixed(u64),
    /// `ceil(snr^exponent)`, at least 2, capped.
    SnrPower { exponent: f64, cap: u64 },
}

impl Default for PMaxRule {
    fn default() -> Self {
        PMaxRule::Default { cap: DEFAULT_P_CAP }
    }
}

impl PMaxRule {
    pub fn resolve(&self, snr: f64) -> u64 {
        match *self {
            PMaxRule::Default { cap } => default_p_max(snr, cap),
            PMaxRule::Fixed(p) => p,
            PMaxRule::SnrPower { exponent, cap } => {
                let b = snr.max(1.0).powf(exponent).ceil();
                if b >= cap as f64 { cap } else { (b as u64).max(2) }
            }
        }
    }
}

/// The four case bounds of the pairwise error analysis at one prime.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OmegaBreakdown {
    pub p: u64,
    pub gamma: Gain,
    pub snr: f64,
    pub delta: f64,
    pub omega_a: f64,
    pub omega_b: f64,
    pub omega_c: f64,
    pub omega_d: f64,
}

impl OmegaBreakdown {
    /// Case bounds for a precomputed `delta(p, gamma)`.
    pub fn with_delta(p: u64, gamma: Gain, snr: f64, delta: f64) -> Self {
        let pf = p as f64;
        let tail = 2.0 * (-3.0 * snr / 8.0).exp();
        let scale = 3.0 * snr / (2.0 * pf * pf);
        let omega_a = 1.0 / (pf * pf)
            + (2.0 * PI / (3.0 * snr)).sqrt()
            + (-scale * delta * delta).exp() / pf
            + tail;
        // delta = 0 gives +inf here
        let omega_b = 1.0 / pf + (2.0 * PI / (3.0 * delta * delta * snr)).sqrt() + tail;
        let g = gamma.centered_quarter();
        let case_d = (pf - 1.0) / pf + (-scale * g * g).exp() / pf + tail;
        Self {
            p,
            gamma,
            snr,
            delta,
            omega_a,
            omega_b,
            omega_c: omega_b,
            omega_d: omega_b.max(case_d),
        }
    }

    /// `min(-log2(omega_a)/2, -log2(omega_b))`, unclamped.
    pub fn raw_rate(&self) -> f64 {
        (-0.5 * self.omega_a.log2()).min(-self.omega_b.log2())
    }
}

/// Case bounds at prime `p`.
pub fn omega_breakdown(p: u64, gamma: Gain, snr: f64) -> Result<OmegaBreakdown> {
    let d = diophantine::delta(p, &gamma)?;
    Ok(OmegaBreakdown::with_delta(p, gamma, snr, d))
}

fn clamp_rate(r: f64) -> f64 {
    if r > 0.0 {
        r
    } else {
        0.0
    }
}

fn rate_with_delta(p: u64, gamma: Gain, snr: f64, delta: f64) -> (f64, OmegaBreakdown) {
    let b = OmegaBreakdown::with_delta(p, gamma, snr, delta);
    if !is_admissible(p, &gamma, snr) {
        return (0.0, b);
    }
    (clamp_rate(b.raw_rate()), b)
}

/// Achievable rate at a fixed prime; zero when `p` is not admissible or the
/// bound is negative.
pub fn rate_for_p(p: u64, gamma: Gain, snr: f64) -> Result<f64> {
    let d = diophantine::delta(p, &gamma)?;
    Ok(rate_with_delta(p, gamma, snr, d).0)
}

/// A rate maximized over primes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatePoint {
    pub gamma: Gain,
    pub snr: f64,
    pub p_star: Option<u64>,
    pub rate: f64,
    /// Case bounds at `p_star`.
    pub breakdown: Option<OmegaBreakdown>,
}

impl RatePoint {
    fn zero(gamma: Gain, snr: f64) -> Self {
        Self {
            gamma,
            snr,
            p_star: None,
            rate: 0.0,
            breakdown: None,
        }
    }
}

/// Two-user same-code rate: the best [`rate_for_p`] over admissible primes
/// up to `p_max`, smallest prime on ties.
pub fn theorem1_rate(gamma: Gain, snr: f64, p_max: u64) -> RatePoint {
    let profile = ConvergentProfile::new(gamma, p_max);
    let mut best = RatePoint::zero(gamma, snr);
    for p in primes_up_to(p_max) {
        let (r, b) = rate_with_delta(p, gamma, snr, profile.delta(p));
        if r > best.rate {
            best = RatePoint {
                gamma,
                snr,
                p_star: Some(p),
                rate: r,
                breakdown: Some(b),
            };
        }
    }
    best
}

/// Symmetric capacity of the Gaussian MAC with independent random codebooks.
pub fn random_sym_capacity(gamma: Gain, snr: f64) -> f64 {
    let g2 = gamma.value().powi(2);
    let a = 0.5 * (1.0 + snr).log2();
    let b = 0.5 * (1.0 + g2 * snr).log2();
    let c = 0.25 * (1.0 + (1.0 + g2) * snr).log2();
    a.min(b).min(c)
}

/// `theorem1_rate / random_sym_capacity`, zero when the denominator is zero.
pub fn normalized_rate(gamma: Gain, snr: f64, p_max: u64) -> f64 {
    let den = random_sym_capacity(gamma, snr);
    if den <= 0.0 {
        return 0.0;
    }
    theorem1_rate(gamma, snr, p_max).rate / den
}

/// K-user integer-interference symmetric rate for the direct gains of `h`.
pub fn theorem2_sym_rate(h: &ChannelMatrix, snr: f64, p_max: u64) -> RatePoint {
    theorem2_sym_rate_for_gains(h.diagonal(), snr, p_max)
}

/// [`theorem2_sym_rate`] given only the direct gains. Off-diagonal gains
/// enter only through the requirement that they are integers. The returned
/// point carries the bottleneck direct gain and its case bounds.
pub fn theorem2_sym_rate_for_gains(diag: &[Gain], snr: f64, p_max: u64) -> RatePoint {
    let Some(&first) = diag.first() else {
        return RatePoint::zero(Gain::Float(0.0), snr);
    };
    let profiles: Vec<ConvergentProfile> =
        diag.iter().map(|&g| ConvergentProfile::new(g, p_max)).collect();
    let mut best = RatePoint::zero(first, snr);
    for p in primes_up_to(p_max) {
        if !diag.iter().all(|g| is_admissible(p, g, snr)) {
            continue;
        }
        let mut worst: Option<(f64, OmegaBreakdown)> = None;
        for (g, prof) in diag.iter().zip(&profiles) {
            let (r, b) = rate_with_delta(p, *g, snr, prof.delta(p));
            if worst.is_none_or(|(w, _)| r < w) {
                worst = Some((r, b));
            }
        }
        let (r, b) = worst.expect("nonempty diagonal");
        if r > best.rate {
            best = RatePoint {
                gamma: b.gamma,
                snr,
                p_star: Some(p),
                rate: r,
                breakdown: Some(b),
            };
        }
    }
    best
}

/// Time-sharing baseline sum rate: each user active `1/K` of the time at
/// unit power.
pub fn time_sharing_sum_rate(k: usize, snr: f64) -> f64 {
    let _ = k;
    0.5 * (1.0 + snr).log2()
}

/// `(K/2) * (1/2) log2(1 + (1 + h^2) snr)`.
pub fn dof_benchmark(k: usize, h: f64, snr: f64) -> f64 {
    k as f64 / 2.0 * 0.5 * (1.0 + (1.0 + h * h) * snr).log2()
}

/// One point of a DoF scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DofPoint {
    pub snr: f64,
    pub p_max: u64,
    pub point: RatePoint,
    /// `rate / (log2(snr) / 4)`, zero when the rate or `log2(snr)` is not
    /// positive.
    pub ratio: f64,
}

/// Ratio of the two-user rate to `log2(snr)/4` over an SNR grid.
pub fn dof_ratio_scan(gamma: Gain, snr_grid: &[f64], rule: PMaxRule) -> Vec<DofPoint> {
    par::map_indexed(snr_grid.len(), |i| {
        let snr = snr_grid[i];
        let p_max = rule.resolve(snr);
        let point = theorem1_rate(gamma, snr, p_max);
        let scale = 0.25 * snr.log2();
        let ratio = if scale > 0.0 { point.rate / scale } else { 0.0 };
        DofPoint {
            snr,
            p_max,
            point,
            ratio,
        }
    })
}

/// One grid point of a normalized-rate sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub gamma: Gain,
    pub snr: f64,
    pub p_max: u64,
    pub point: RatePoint,
    pub rate_rand: f64,
    pub r_norm: f64,
}

/// Evaluates the normalized rate on the product grid `snrs x gammas`
/// (SNR-major), with the prime bound chosen per SNR.
pub fn sweep_normalized(gammas: &[Gain], snrs: &[f64], rule: PMaxRule) -> Vec<SweepPoint> {
    let ng = gammas.len();
    par::map_indexed(ng * snrs.len(), |i| {
        let (snr, gamma) = (snrs[i / ng], gammas[i % ng]);
        let p_max = rule.resolve(snr);
        let point = theorem1_rate(gamma, snr, p_max);
        let rate_rand = random_sym_capacity(gamma, snr);
        let r_norm = if rate_rand > 0.0 { point.rate / rate_rand } else { 0.0 };
        SweepPoint {
            gamma,
            snr,
            p_max,
            point,
            rate_rand,
            r_norm,
        }
    })
}

/// Probability that two uniform messages in `Z_p^k` are linearly dependent,
/// as an exact fraction: `(p+1)/p^k - p/p^(2k)`.
pub fn dependent_message_fraction(p: u64, k: u32) -> Result<Fraction> {
    if k == 0 {
        return Err(Error::InvalidArgument("k must be at least 1".into()));
    }
    let overflow = || Error::InvalidArgument(format!("p^(2k) overflows for p={p}, k={k}"));
    let pk = (p as u128).checked_pow(k).ok_or_else(overflow)?;
    let p2k = pk.checked_mul(pk).ok_or_else(overflow)?;
    let num = (p as u128 + 1) * pk - p as u128;
    let g = gcd(num, p2k);
    let (num, den) = (num / g, p2k / g);
    let num = i64::try_from(num).map_err(|_| overflow())?;
    let den = u64::try_from(den).map_err(|_| overflow())?;
    Fraction::new(num, den)
}

fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Floating form of [`dependent_message_fraction`]; valid for any `k` and
/// tends to zero as `k` grows.
pub fn dependent_message_prob(p: u64, k: u32) -> f64 {
    if let Ok(f) = dependent_message_fraction(p, k) {
        return f.to_f64();
    }
    let pf = p as f64;
    let pk = pf.powi(k as i32);
    (pf + 1.0) / pk - pf / (pk * pk)
}
