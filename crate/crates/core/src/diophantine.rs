//! Rational approximation quality, primes, and the admissible prime set.
//!
//! `delta(p, gamma)` is the distance `min_l |l*gamma - round(l*gamma)|` over
//! `l = 1..p-1`. It is zero exactly when `gamma` is a rational whose reduced
//! denominator is below `p`, and it acts as an SNR penalty in every rate
//! bound of [`crate::rates`].
//!
//! Two independent routes compute it: [`delta`] enumerates every `l`, while
//! [`ConvergentProfile`] and [`best_rational_oracle`] only visit continued
//! fraction convergent denominators, which are exactly the record holders of
//! `|l*gamma - round(l*gamma)|`.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Float, One, ToPrimitive, Zero};

use crate::{Error, Result};

/// A reduced fraction with positive denominator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Fraction {
    num: i64,
    den: u64,
}

impl Fraction {
    pub fn new(num: i64, den: u64) -> Result<Self> {
        if den == 0 {
            return Err(Error::InvalidArgument("zero denominator".into()));
        }
        let g = num.unsigned_abs().gcd(&den).max(1);
        Ok(Self {
            num: num / g as i64,
            den: den / g,
        })
    }

    pub fn numerator(&self) -> i64 {
        self.num
    }

    pub fn denominator(&self) -> u64 {
        self.den
    }

    pub fn to_f64(&self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

impl fmt::Display for Fraction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

/// A channel gain: either an exact rational or a floating real treated as
/// the exact binary value it holds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Gain {
    Exact(Fraction),
    Float(f64),
}

impl Gain {
    pub fn value(&self) -> f64 {
        match self {
            Gain::Exact(f) => f.to_f64(),
            Gain::Float(x) => *x,
        }
    }

    /// `|l*gamma - round(l*gamma)|`, exact on the rational path.
    #[inline]
    pub fn frac_dist(&self, l: u64) -> f64 {
        match self {
            Gain::Float(g) => {
                let x = l as f64 * g;
                (x - x.round()).abs()
            }
            Gain::Exact(f) => {
                let q = f.den as i128;
                let m = (l as i128 * f.num as i128).rem_euclid(q);
                m.min(q - m) as f64 / q as f64
            }
        }
    }

    /// `gamma` reduced modulo `[-1/4, 1/4)`.
    pub fn centered_quarter(&self) -> f64 {
        match self {
            Gain::Float(g) => crate::modarith::reduce_centered(*g, 0.5),
            Gain::Exact(f) => {
                // in units of 1/(4q) the interval is [-q, q) with period 2q
                let q = f.den as i128;
                let t = 4 * f.num as i128;
                let m = (t + q).div_euclid(2 * q);
                let rem = t - m * 2 * q;
                rem as f64 / (4 * q) as f64
            }
        }
    }
}

impl From<f64> for Gain {
    fn from(x: f64) -> Self {
        Gain::Float(x)
    }
}

impl From<Fraction> for Gain {
    fn from(f: Fraction) -> Self {
        Gain::Exact(f)
    }
}

impl fmt::Display for Gain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Gain::Exact(fr) => write!(f, "{fr}"),
            Gain::Float(x) => write!(f, "{x}"),
        }
    }
}

impl FromStr for Gain {
    type Err = Error;

    /// `"r/q"` parses to an exact fraction, anything else to a float.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::ParseGain(s.to_string());
        if let Some((n, d)) = s.split_once('/') {
            let num: i64 = n.trim().parse().map_err(|_| bad())?;
            let den: u64 = d.trim().parse().map_err(|_| bad())?;
            return Fraction::new(num, den).map(Gain::Exact).map_err(|_| bad());
        }
        let x: f64 = s.parse().map_err(|_| bad())?;
        if !x.is_finite() {
            return Err(bad());
        }
        Ok(Gain::Float(x))
    }
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n % 2 == 0 {
        return n == 2;
    }
    let mut d = 3;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

/// All primes `<= n` in ascending order (sieve of Eratosthenes).
pub fn primes_up_to(n: u64) -> Vec<u64> {
    if n < 2 {
        return Vec::new();
    }
    let n = n as usize;
    let mut composite = vec![false; n + 1];
    let mut out = Vec::new();
    for i in 2..=n {
        if composite[i] {
            continue;
        }
        out.push(i as u64);
        let mut j = i * i;
        while j <= n {
            composite[j] = true;
            j += i;
        }
    }
    out
}

/// `delta(p, gamma)` by direct enumeration of `l = 1..p-1`.
pub fn delta(p: u64, gamma: &Gain) -> Result<f64> {
    if !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    Ok((1..p).map(|l| gamma.frac_dist(l)).fold(f64::INFINITY, f64::min))
}

/// Exact rational value of a gain as a big-integer pair `(num, den)`.
fn exact_parts(gamma: &Gain) -> (BigInt, BigInt) {
    match gamma {
        Gain::Exact(f) => (BigInt::from(f.num), BigInt::from(f.den)),
        Gain::Float(x) => {
            let (mantissa, exp, sign) = x.integer_decode();
            let mut num = BigInt::from(mantissa) * BigInt::from(sign);
            let mut den = BigInt::one();
            if exp >= 0 {
                num <<= exp as usize;
            } else {
                den <<= (-exp) as usize;
            }
            (num, den)
        }
    }
}

/// Continued fraction convergent denominators of `gamma` that are below
/// `bound`, in increasing order, computed exactly.
pub fn convergent_denominators(gamma: &Gain, bound: u64) -> Vec<u64> {
    let (mut num, mut den) = exact_parts(gamma);
    let (mut k_prev, mut k) = (0u128, 1u128);
    let mut out = Vec::new();
    if bound <= 1 {
        return out;
    }
    out.push(1);
    // a0 = floor(gamma); its denominator is 1
    let (_, rem) = num.div_mod_floor(&den);
    num = den;
    den = rem;
    while !den.is_zero() {
        let (a, rem) = num.div_mod_floor(&den);
        let next = a
            .to_u128()
            .and_then(|a| a.checked_mul(k))
            .and_then(|ak| ak.checked_add(k_prev));
        match next {
            Some(next) if next < bound as u128 => {
                out.push(next as u64);
                k_prev = k;
                k = next;
            }
            _ => break,
        }
        num = den;
        den = rem;
    }
    out
}

/// The best approximation `a/l` with `1 <= l < p` in the sense of
/// `l * |gamma - a/l|`, together with that error. Computed from continued
/// fraction convergents; used as an independent check on [`delta`].
pub fn best_rational_oracle(gamma: f64, p: u64) -> (Fraction, f64) {
    best_rational_oracle_gain(&Gain::Float(gamma), p)
}

/// [`best_rational_oracle`] for either gain representation.
pub fn best_rational_oracle_gain(gamma: &Gain, p: u64) -> (Fraction, f64) {
    let mut best: Option<(u64, f64)> = None;
    for q in convergent_denominators(gamma, p.max(2)) {
        let d = gamma.frac_dist(q);
        if best.is_none_or(|(_, bd)| d < bd) {
            best = Some((q, d));
        }
    }
    let (q, d) = best.unwrap_or((1, gamma.frac_dist(1)));
    let a = match gamma {
        Gain::Float(g) => (q as f64 * g).round() as i64,
        Gain::Exact(f) => {
            // round half away from zero on l*r/q
            let t = q as i128 * f.num as i128;
            let den = f.den as i128;
            let twice = 2 * t.abs() + den;
            (t.signum() * (twice / (2 * den))) as i64
        }
    };
    (Fraction::new(a, q).expect("q >= 1"), d)
}

/// `delta(p, gamma)` for every `p` up to a bound, answered from the
/// convergent records in `O(log p)` per query.
#[derive(Debug, Clone)]
pub struct ConvergentProfile {
    gamma: Gain,
    // (denominator, running minimum of the distance up to this denominator)
    records: Vec<(u64, f64)>,
}

impl ConvergentProfile {
    /// Profile valid for all `p <= p_max`.
    pub fn new(gamma: Gain, p_max: u64) -> Self {
        let mut records = Vec::new();
        let mut run = f64::INFINITY;
        for q in convergent_denominators(&gamma, p_max.max(2)) {
            run = run.min(gamma.frac_dist(q));
            records.push((q, run));
        }
        Self { gamma, records }
    }

    pub fn gamma(&self) -> Gain {
        self.gamma
    }

    /// `delta(p, gamma)` for `p >= 2` within the bound the profile was built
    /// for. Primality is not checked.
    pub fn delta(&self, p: u64) -> f64 {
        let idx = self.records.partition_point(|&(q, _)| q < p);
        if idx == 0 {
            return self.gamma.frac_dist(1);
        }
        self.records[idx - 1].1
    }
}

/// The admissibility test for prime `p`:
/// `exp(-(3 snr / (2 p^2)) g^2) < 1 - 2 p exp(-3 snr / 8)` with
/// `g = gamma mod [-1/4, 1/4)`.
pub fn is_admissible(p: u64, gamma: &Gain, snr: f64) -> bool {
    let g = gamma.centered_quarter();
    let pf = p as f64;
    let lhs = (-(3.0 * snr / (2.0 * pf * pf)) * g * g).exp();
    let rhs = 1.0 - 2.0 * pf * (-3.0 * snr / 8.0).exp();
    lhs < rhs
}

/// All primes `p <= p_max` passing [`is_admissible`].
pub fn admissible_primes(gamma: &Gain, snr: f64, p_max: u64) -> Vec<u64> {
    primes_up_to(p_max)
        .into_iter()
        .filter(|&p| is_admissible(p, gamma, snr))
        .collect()
}
