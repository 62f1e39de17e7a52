//! Construction-A linear codes over `Z_p`.
//!
//! A code is a `k x n` generator matrix `G` with entries drawn uniformly from
//! `Z_p`. Message `w` maps to the residue vector `w^T G mod p`, whose real
//! form is the grid point `[(L/p) w^T G]*` componentwise.

use std::fmt::Write as _;

use rand::Rng;

use crate::diophantine::is_prime;
use crate::modarith::{GridPoint, Residue};
use crate::rng::{seeded, SeedSplit};
use crate::{Error, Result};

/// Default bound on `p^k` for exhaustive enumeration and decoding.
pub const DEFAULT_ENUM_CAP: u64 = 3_000;

/// A message: `k` residues mod `p`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MessageVector(pub Vec<u32>);

impl MessageVector {
    pub fn zeros(k: usize) -> Self {
        Self(vec![0; k])
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&x| x == 0)
    }

    /// Componentwise `(self + other) mod p`.
    pub fn add_mod(&self, other: &Self, p: u32) -> Self {
        Self(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(&a, &b)| ((a as u64 + b as u64) % p as u64) as u32)
                .collect(),
        )
    }

    /// Componentwise `(m * self) mod p`.
    pub fn scale_mod(&self, m: i64, p: u32) -> Self {
        let m = m.rem_euclid(p as i64) as u64;
        Self(
            self.0
                .iter()
                .map(|&a| ((a as u64 * m) % p as u64) as u32)
                .collect(),
        )
    }
}

/// A codeword: `n` points of the reduced grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Codeword(pub Vec<GridPoint>);

impl Codeword {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn residues(&self) -> Vec<u32> {
        self.0.iter().map(|g| g.residue().value()).collect()
    }

    pub fn reals(&self) -> Vec<f64> {
        self.0.iter().map(|g| g.real()).collect()
    }

    /// Empirical power `(1/n) * ||x||^2`.
    pub fn power(&self) -> f64 {
        self.0.iter().map(|g| g.real() * g.real()).sum::<f64>() / self.0.len() as f64
    }
}

/// `w1, w2` are linearly independent over `Z_p` iff neither is zero and
/// neither is a multiple of the other.
pub fn linearly_independent(w1: &[u32], w2: &[u32], p: u32) -> bool {
    let Some(i) = w1.iter().position(|&x| x != 0) else {
        return false;
    };
    if w2.iter().all(|&x| x == 0) {
        return false;
    }
    let p64 = p as u64;
    // c = w2[i] / w1[i]; dependent iff w2 == c * w1
    let c = (w2[i] as u64 * inv_mod(w1[i] as u64, p64)) % p64;
    w1.iter()
        .zip(w2)
        .any(|(&a, &b)| (a as u64 * c) % p64 != b as u64)
}

fn inv_mod(a: u64, p: u64) -> u64 {
    let (mut base, mut exp, mut acc) = (a % p, p - 2, 1u64);
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * base % p;
        }
        base = base * base % p;
        exp >>= 1;
    }
    acc
}

/// A sampled Construction-A code.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearCode {
    p: u32,
    n: usize,
    k: usize,
    g: Vec<u32>,
    seed: u64,
}

impl LinearCode {
    /// Draws `G` with i.i.d. uniform entries from a generator seeded by `seed`.
    pub fn sample(p: u32, n: usize, k: usize, seed: u64) -> Result<Self> {
        validate(p, n, k)?;
        let mut rng = seeded(seed);
        let g = (0..n * k).map(|_| rng.random_range(0..p)).collect();
        Ok(Self { p, n, k, g, seed })
    }

    /// A code from an explicit row-major `k x n` generator matrix.
    pub fn from_matrix(p: u32, n: usize, k: usize, g: Vec<u32>, seed: u64) -> Result<Self> {
        validate(p, n, k)?;
        if g.len() != n * k {
            return Err(Error::DimensionMismatch {
                expected: n * k,
                got: g.len(),
            });
        }
        if let Some(&bad) = g.iter().find(|&&x| x >= p) {
            return Err(Error::InvalidCode(format!("entry {bad} not below p = {p}")));
        }
        Ok(Self { p, n, k, g, seed })
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn generator(&self) -> &[u32] {
        &self.g
    }

    /// Rate in bits per channel use, `k log2(p) / n`.
    pub fn rate(&self) -> f64 {
        self.k as f64 * (self.p as f64).log2() / self.n as f64
    }

    /// Number of messages `p^k`, saturating.
    pub fn num_messages(&self) -> u128 {
        (self.p as u128).checked_pow(self.k as u32).unwrap_or(u128::MAX)
    }

    /// The `idx`-th message in lexicographic order (first entry most
    /// significant).
    pub fn message_at(&self, mut idx: u64) -> MessageVector {
        let mut w = vec![0; self.k];
        for slot in w.iter_mut().rev() {
            *slot = (idx % self.p as u64) as u32;
            idx /= self.p as u64;
        }
        MessageVector(w)
    }

    /// Inverse of [`LinearCode::message_at`].
    pub fn index_of(&self, w: &MessageVector) -> u64 {
        w.0.iter().fold(0, |acc, &x| acc * self.p as u64 + x as u64)
    }

    /// Draws a uniform message.
    pub fn random_message<R: Rng + ?Sized>(&self, rng: &mut R) -> MessageVector {
        MessageVector((0..self.k).map(|_| rng.random_range(0..self.p)).collect())
    }

    pub(crate) fn check_message(&self, w: &MessageVector) -> Result<()> {
        if w.0.len() != self.k {
            return Err(Error::DimensionMismatch {
                expected: self.k,
                got: w.0.len(),
            });
        }
        if let Some(&bad) = w.0.iter().find(|&&x| x >= self.p) {
            return Err(Error::InvalidArgument(format!(
                "message entry {bad} not below p = {}",
                self.p
            )));
        }
        Ok(())
    }

    /// `w^T G mod p` without validation.
    pub(crate) fn encode_residues(&self, w: &[u32]) -> Vec<u32> {
        let p = self.p as u64;
        let mut out = vec![0u64; self.n];
        for (row, &wi) in self.g.chunks_exact(self.n).zip(w) {
            if wi == 0 {
                continue;
            }
            for (acc, &gij) in out.iter_mut().zip(row) {
                *acc = (*acc + wi as u64 * gij as u64) % p;
            }
        }
        out.into_iter().map(|x| x as u32).collect()
    }

    /// Encodes a message into its codeword.
    pub fn encode(&self, w: &MessageVector) -> Result<Codeword> {
        self.check_message(w)?;
        Ok(self.codeword_from_residues(&self.encode_residues(&w.0)))
    }

    pub(crate) fn codeword_from_residues(&self, r: &[u32]) -> Codeword {
        Codeword(
            r.iter()
                .map(|&x| GridPoint::new(Residue::new_unchecked(x as i64, self.p)))
                .collect(),
        )
    }

    /// Errors unless `p^k <= cap`.
    pub fn ensure_enumerable(&self, cap: u64) -> Result<u64> {
        let size = self.num_messages();
        if size > cap as u128 {
            return Err(Error::CapExceeded { size, cap });
        }
        Ok(size as u64)
    }

    /// Every message with its codeword, in lexicographic message order.
    pub fn all_codewords(&self, cap: u64) -> Result<Vec<(MessageVector, Codeword)>> {
        let size = self.ensure_enumerable(cap)?;
        Ok((0..size)
            .map(|i| {
                let w = self.message_at(i);
                let c = self.codeword_from_residues(&self.encode_residues(&w.0));
                (w, c)
            })
            .collect())
    }

    /// Serializes as a `p n k seed` header followed by `k` rows of `n`
    /// residues.
    pub fn to_text(&self) -> String {
        let mut s = format!("{} {} {} {}\n", self.p, self.n, self.k, self.seed);
        for row in self.g.chunks_exact(self.n) {
            let line: Vec<String> = row.iter().map(u32::to_string).collect();
            let _ = writeln!(s, "{}", line.join(" "));
        }
        s
    }

    /// Parses the format written by [`LinearCode::to_text`].
    pub fn from_text(text: &str) -> Result<Self> {
        let bad = |m: &str| Error::InvalidCode(m.to_string());
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header: Vec<&str> = lines
            .next()
            .ok_or_else(|| bad("missing header"))?
            .split_whitespace()
            .collect();
        if header.len() != 4 {
            return Err(bad("header must be `p n k seed`"));
        }
        let p: u32 = header[0].parse().map_err(|_| bad("bad p"))?;
        let n: usize = header[1].parse().map_err(|_| bad("bad n"))?;
        let k: usize = header[2].parse().map_err(|_| bad("bad k"))?;
        let seed: u64 = header[3].parse().map_err(|_| bad("bad seed"))?;
        let mut g = Vec::with_capacity(n * k);
        for _ in 0..k {
            let row = lines.next().ok_or_else(|| bad("missing row"))?;
            let vals = row
                .split_whitespace()
                .map(|t| t.parse::<u32>().map_err(|_| bad("bad entry")))
                .collect::<Result<Vec<_>>>()?;
            if vals.len() != n {
                return Err(bad("row length differs from n"));
            }
            g.extend(vals);
        }
        if lines.next().is_some() {
            return Err(bad("trailing rows"));
        }
        Self::from_matrix(p, n, k, g, seed)
    }
}

fn validate(p: u32, n: usize, k: usize) -> Result<()> {
    if !is_prime(p as u64) {
        return Err(Error::NotPrime(p as u64));
    }
    if n == 0 || k == 0 {
        return Err(Error::InvalidCode("n and k must be at least 1".into()));
    }
    if k > n {
        return Err(Error::InvalidCode(format!("k = {k} exceeds n = {n}")));
    }
    Ok(())
}

/// Outcome of a linearity check.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearityReport {
    pub trials: usize,
    pub failures: usize,
    pub first_failure: Option<(MessageVector, MessageVector)>,
}

impl LinearityReport {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

/// Checks `[f(w1) + f(w2)]* = f(w1 + w2 mod p)` on random pairs, exactly in
/// the residue domain.
pub fn check_linearity(code: &LinearCode, trials: usize, seed: u64) -> LinearityReport {
    check_linearity_with(code.p, code.k, |w| code.encode(w).expect("valid message"), trials, seed)
}

/// [`check_linearity`] for an arbitrary encoder over messages in `Z_p^k`.
pub fn check_linearity_with<F>(p: u32, k: usize, encode: F, trials: usize, seed: u64) -> LinearityReport
where
    F: Fn(&MessageVector) -> Codeword,
{
    let split = SeedSplit::new(seed);
    let mut report = LinearityReport {
        trials,
        failures: 0,
        first_failure: None,
    };
    for t in 0..trials {
        let mut rng = split.stream(t as u64, 0);
        let draw = |rng: &mut rand_chacha::ChaCha8Rng| {
            MessageVector((0..k).map(|_| rng.random_range(0..p)).collect())
        };
        let w1 = draw(&mut rng);
        let w2 = draw(&mut rng);
        let w3 = w1.add_mod(&w2, p);
        let (c1, c2, c3) = (encode(&w1), encode(&w2), encode(&w3));
        let ok = c1.len() == c3.len()
            && c1
                .0
                .iter()
                .zip(&c2.0)
                .zip(&c3.0)
                .all(|((a, b), c)| crate::modarith::grid_add(*a, *b).is_ok_and(|s| s == *c));
        if !ok {
            report.failures += 1;
            report.first_failure.get_or_insert((w1, w2));
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modarith::L;
    use proptest::prelude::*;

    #[test]
    fn sampling_is_deterministic_and_shaped() {
        let a = LinearCode::sample(3, 4, 2, 9).unwrap();
        let b = LinearCode::sample(3, 4, 2, 9).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.generator().len(), 8);
        assert!(a.generator().iter().all(|&x| x < 3));
        assert_ne!(a, LinearCode::sample(3, 4, 2, 10).unwrap());
    }

    #[test]
    fn sampling_rejects_bad_parameters() {
        assert!(matches!(LinearCode::sample(3, 2, 3, 0), Err(Error::InvalidCode(_))));
        assert_eq!(LinearCode::sample(4, 4, 2, 0), Err(Error::NotPrime(4)));
        assert!(LinearCode::sample(3, 0, 1, 0).is_err());
        assert!(LinearCode::sample(3, 4, 0, 0).is_err());
    }

    #[test]
    fn entry_histogram_is_uniform() {
        let p = 7u32;
        let code = LinearCode::sample(p, 50_000, 2, 1).unwrap();
        let mut hist = vec![0f64; p as usize];
        for &x in code.generator() {
            hist[x as usize] += 1.0;
        }
        let total = code.generator().len() as f64;
        let mean = total / p as f64;
        let sd = (total * (1.0 / p as f64) * (1.0 - 1.0 / p as f64)).sqrt();
        for h in hist {
            assert!((h - mean).abs() < 3.0 * sd, "{h} vs {mean} +- {sd}");
        }
    }

    #[test]
    fn encode_examples() {
        let code = LinearCode::from_matrix(3, 2, 1, vec![2, 1], 0).unwrap();
        let c = code.encode(&MessageVector(vec![1])).unwrap();
        assert_eq!(c.residues(), vec![2, 1]);
        let r = c.reals();
        assert!((r[0] + 1.154_700_538_379_251_5).abs() < 1e-12);
        assert!((r[1] - 1.154_700_538_379_251_5).abs() < 1e-12);

        let code = LinearCode::sample(5, 6, 3, 4).unwrap();
        let z = code.encode(&MessageVector::zeros(3)).unwrap();
        assert!(z.residues().iter().all(|&x| x == 0));
        assert!(z.reals().iter().all(|&x| x == 0.0));

        assert!(matches!(
            code.encode(&MessageVector(vec![1, 2])),
            Err(Error::DimensionMismatch { expected: 3, got: 2 })
        ));
        assert!(code.encode(&MessageVector(vec![1, 2, 5])).is_err());
    }

    #[test]
    fn enumeration() {
        let code = LinearCode::sample(3, 4, 2, 0).unwrap();
        let all = code.all_codewords(DEFAULT_ENUM_CAP).unwrap();
        assert_eq!(all.len(), 9);
        assert!(all[0].0.is_zero());
        assert_eq!(all[1].0, MessageVector(vec![0, 1]));
        assert_eq!(all[3].0, MessageVector(vec![1, 0]));
        let code = LinearCode::sample(5, 4, 2, 0).unwrap();
        assert_eq!(code.all_codewords(DEFAULT_ENUM_CAP).unwrap().len(), 25);
        let big = LinearCode::sample(5, 8, 5, 0).unwrap();
        assert_eq!(
            big.all_codewords(DEFAULT_ENUM_CAP),
            Err(Error::CapExceeded { size: 3125, cap: 3000 })
        );
        for i in 0..25 {
            assert_eq!(code.index_of(&code.message_at(i)), i);
        }
    }

    #[test]
    fn linearity_holds_for_sampled_codes() {
        for s in 0..20 {
            let code = LinearCode::sample([2, 3, 5, 7, 11][s % 5], 12, 3, s as u64).unwrap();
            let rep = check_linearity(&code, 1_000, 100 + s as u64);
            assert!(rep.passed(), "code {s}: {rep:?}");
        }
    }

    #[test]
    fn linearity_zero_pair() {
        let code = LinearCode::sample(3, 4, 2, 0).unwrap();
        let z = MessageVector::zeros(2);
        let c = code.encode(&z).unwrap();
        let s: Vec<_> = c
            .0
            .iter()
            .map(|g| crate::modarith::grid_add(*g, *g).unwrap())
            .collect();
        assert_eq!(Codeword(s), code.encode(&z.add_mod(&z, 3)).unwrap());
    }

    #[test]
    fn linearity_negative_control() {
        let code = LinearCode::sample(5, 6, 2, 3).unwrap();
        let mut corrupted = code.generator().to_vec();
        corrupted[0] = (corrupted[0] + 1) % 5;
        let bad = LinearCode::from_matrix(5, 6, 2, corrupted, 3).unwrap();
        // fresh encoder for most messages, corrupted copy whenever w[0] == 1
        let mixed = |w: &MessageVector| {
            if w.0[0] == 1 {
                bad.encode(w).unwrap()
            } else {
                code.encode(w).unwrap()
            }
        };
        let rep = check_linearity_with(5, 2, mixed, 1_000, 0);
        assert!(!rep.passed());
        assert!(rep.first_failure.is_some());
    }

    #[test]
    fn independence_test() {
        assert!(!linearly_independent(&[0, 0], &[1, 2], 3));
        assert!(!linearly_independent(&[1, 2], &[0, 0], 3));
        assert!(!linearly_independent(&[1, 2], &[2, 1], 3));
        assert!(linearly_independent(&[1, 0], &[0, 1], 3));
        assert!(linearly_independent(&[1, 2], &[1, 1], 3));
    }

    #[test]
    fn codeword_components_are_uniform() {
        // chi-square at 1% for marginals and for the joint of two components
        let p = 5u32;
        let w = MessageVector(vec![2, 3]);
        let mut marg = vec![0f64; p as usize];
        let mut joint = vec![0f64; (p * p) as usize];
        let draws = 10_000;
        for s in 0..draws {
            let code = LinearCode::sample(p, 4, 2, 1_000 + s).unwrap();
            let r = code.encode(&w).unwrap().residues();
            marg[r[0] as usize] += 1.0;
            joint[(r[1] * p + r[2]) as usize] += 1.0;
        }
        let chi = |h: &[f64]| {
            let e = draws as f64 / h.len() as f64;
            h.iter().map(|o| (o - e) * (o - e) / e).sum::<f64>()
        };
        // 99th percentiles of chi-square with 4 and 24 degrees of freedom
        assert!(chi(&marg) < 13.277, "{}", chi(&marg));
        assert!(chi(&joint) < 42.980, "{}", chi(&joint));
    }

    #[test]
    fn ensemble_power() {
        let p = 3u32;
        let mut total = 0.0;
        let mut count = 0;
        let mut s = 0;
        while count < 10_000 {
            let code = LinearCode::sample(p, 16, 2, 50_000 + s).unwrap();
            s += 1;
            for i in 1..9 {
                total += code.encode(&code.message_at(i)).unwrap().power();
                count += 1;
            }
        }
        let expect = L * L / 12.0 * (p * p - 1) as f64 / (p * p) as f64;
        let avg = total / count as f64;
        assert!((avg - expect).abs() < 0.02 * expect, "{avg} vs {expect}");
        assert!(expect <= 1.0);
    }

    #[test]
    fn text_format_rejects_garbage() {
        assert!(LinearCode::from_text("").is_err());
        assert!(LinearCode::from_text("3 2 1 0\n1 2 3\n").is_err());
        assert!(LinearCode::from_text("3 2 1 0\n1 5\n").is_err());
        assert!(LinearCode::from_text("3 2 1 0\n1 2\n0 0\n").is_err());
    }

    proptest! {
        #[test]
        fn text_round_trip(pi in 0usize..5, n in 1usize..12, kk in 1usize..12, seed in any::<u64>()) {
            let p = [2u32, 3, 5, 7, 13][pi];
            let k = kk.min(n);
            let code = LinearCode::sample(p, n, k, seed).unwrap();
            prop_assert_eq!(LinearCode::from_text(&code.to_text()).unwrap(), code);
        }

        #[test]
        fn encoding_is_linear(seed in any::<u64>(), a in 0u64..125, b in 0u64..125, m in -10i64..10) {
            let code = LinearCode::sample(5, 7, 3, seed).unwrap();
            let (w1, w2) = (code.message_at(a), code.message_at(b));
            let c1 = code.encode(&w1).unwrap();
            let c2 = code.encode(&w2).unwrap();
            let sum: Vec<_> = c1.0.iter().zip(&c2.0)
                .map(|(x, y)| crate::modarith::grid_add(*x, *y).unwrap()).collect();
            prop_assert_eq!(Codeword(sum), code.encode(&w1.add_mod(&w2, 5)).unwrap());
            let scaled: Vec<_> = c1.0.iter().map(|x| crate::modarith::grid_scale(*x, m)).collect();
            prop_assert_eq!(Codeword(scaled), code.encode(&w1.scale_mod(m, 5)).unwrap());
        }
    }
}
