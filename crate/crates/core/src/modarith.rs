//! Arithmetic modulo the basic interval `[-L/2, L/2)` with `L = sqrt(12)`,
//! and on the scaled prime grid `(L/p) * Z_p` reduced into that interval.
//!
//! Codeword algebra is done on residues. The real form of a grid point is a
//! pure function of its residue, so sums and integer multiples never drift.

use crate::{Error, Result};

/// Length of the basic interval. A uniform variable on `[-L/2, L/2)` has
/// unit power.
pub const L: f64 = 3.464_101_615_137_754_5;

const HALF_L: f64 = L / 2.0;

/// A real number reduced into `[-L/2, L/2)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct ModScalar(f64);

impl ModScalar {
    pub fn value(self) -> f64 {
        self.0
    }
}

impl From<ModScalar> for f64 {
    fn from(m: ModScalar) -> f64 {
        m.0
    }
}

/// Reduces `x` modulo the basic interval.
pub fn mod_interval(x: f64) -> Result<ModScalar> {
    if !x.is_finite() {
        return Err(Error::NonFinite(x));
    }
    Ok(ModScalar(reduce(x)))
}

/// Infallible reduction used on hot paths. Non-finite input yields NaN.
#[inline]
pub fn reduce(x: f64) -> f64 {
    if (-HALF_L..HALF_L).contains(&x) {
        return x;
    }
    let m = ((x + HALF_L) / L).floor();
    let mut r = x - m * L;
    // floor of a rounded quotient can be off by one at the boundaries
    if r >= HALF_L {
        r -= L;
    } else if r < -HALF_L {
        r += L;
    }
    r
}

/// Reduces `x` modulo the centered interval `[-width/2, width/2)`.
#[inline]
pub fn reduce_centered(x: f64, width: f64) -> f64 {
    let half = width / 2.0;
    if (-half..half).contains(&x) {
        return x;
    }
    let m = ((x + half) / width).floor();
    let mut r = x - m * width;
    if r >= half {
        r -= width;
    } else if r < -half {
        r += width;
    }
    r
}

/// An element of `Z_p` for prime `p`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Residue {
    value: u32,
    modulus: u32,
}

impl Residue {
    /// Builds `value mod modulus`. The modulus must be prime.
    pub fn new(value: i64, modulus: u32) -> Result<Self> {
        if !crate::diophantine::is_prime(modulus as u64) {
            return Err(Error::NotPrime(modulus as u64));
        }
        Ok(Self::new_unchecked(value, modulus))
    }

    pub(crate) fn new_unchecked(value: i64, modulus: u32) -> Self {
        let value = value.rem_euclid(modulus as i64) as u32;
        Self { value, modulus }
    }

    pub fn value(self) -> u32 {
        self.value
    }

    pub fn modulus(self) -> u32 {
        self.modulus
    }
}

/// Real coordinate of residue `r` on the grid `(L/p) * Z_p` reduced into the
/// basic interval: `L * c / p` where `c` is `r` lifted to `[-p/2, p/2)`.
#[inline]
pub fn grid_real(r: u32, p: u32) -> f64 {
    let c = if 2 * r as u64 >= p as u64 {
        r as i64 - p as i64
    } else {
        r as i64
    };
    L * c as f64 / p as f64
}

/// A point of the reduced constellation, carrying both its residue and its
/// real coordinate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridPoint {
    residue: Residue,
    real: f64,
}

impl GridPoint {
    pub fn new(residue: Residue) -> Self {
        Self {
            residue,
            real: grid_real(residue.value, residue.modulus),
        }
    }

    pub fn residue(&self) -> Residue {
        self.residue
    }

    pub fn real(&self) -> f64 {
        self.real
    }
}

/// Adds two grid points in the residue domain.
pub fn grid_add(a: GridPoint, b: GridPoint) -> Result<GridPoint> {
    let (p, q) = (a.residue.modulus, b.residue.modulus);
    if p != q {
        return Err(Error::ModulusMismatch(p as u64, q as u64));
    }
    let sum = a.residue.value as i64 + b.residue.value as i64;
    Ok(GridPoint::new(Residue::new_unchecked(sum, p)))
}

/// Multiplies a grid point by an integer in the residue domain.
pub fn grid_scale(a: GridPoint, m: i64) -> GridPoint {
    let p = a.residue.modulus as i64;
    let prod = (m.rem_euclid(p) * a.residue.value as i64) % p;
    GridPoint::new(Residue::new_unchecked(prod, a.residue.modulus))
}
