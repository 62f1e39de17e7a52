//! Monte Carlo simulation of the two-user modulo MAC
//! `y = [x1 + gamma * x2 + z]*` with both users on the same linear code, and
//! the exhaustive joint decoder that picks the pair `(i, j)` minimizing
//! `sum_t ([y_t - psi_t(i, j)]*)^2` with `psi(i, j) = [x_i + gamma * x_j]*`.

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::code::{linearly_independent, Codeword, LinearCode, DEFAULT_ENUM_CAP};
use crate::diophantine::Gain;
use crate::modarith::{reduce, ModScalar};
use crate::rng::{SeedSplit, LANE_MESSAGES, LANE_NOISE};
use crate::{par, Error, Result};

/// Two-sided 95% normal quantile.
const Z95: f64 = 1.959_963_984_540_054;

/// Wilson score interval at 95% for `errors` out of `trials`.
pub fn wilson_interval(errors: u64, trials: u64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let phat = errors as f64 / n;
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / n;
    let center = (phat + z2 / (2.0 * n)) / denom;
    let half = Z95 / denom * (phat * (1.0 - phat) / n + z2 / (4.0 * n * n)).sqrt();
    ((center - half).clamp(0.0, phat), (center + half).clamp(phat, 1.0))
}

/// Componentwise `[x1 + gamma * x2 + z]*`.
pub fn mod_mac_channel(
    x1: &Codeword,
    x2: &Codeword,
    gamma: f64,
    noise: &[f64],
) -> Result<Vec<ModScalar>> {
    for len in [x2.len(), noise.len()] {
        if len != x1.len() {
            return Err(Error::DimensionMismatch {
                expected: x1.len(),
                got: len,
            });
        }
    }
    x1.0.iter()
        .zip(&x2.0)
        .zip(noise)
        .map(|((a, b), z)| crate::modarith::mod_interval(a.real() + gamma * b.real() + z))
        .collect()
}

/// Which ordered message pairs the decoder searches.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairSearch {
    /// Only linearly independent pairs.
    Independent,
    /// Every ordered pair, dependent ones included.
    All,
}

/// Decoder output, as lexicographic message indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decision {
    /// `first` has unit gain, `second` has gain `gamma`.
    Pair { first: u64, second: u64 },
    /// The minimum metric was attained by more than one pair.
    Ambiguous,
}

/// Exhaustive joint decoder with the codebook tables precomputed.
#[derive(Debug, Clone)]
pub struct JointDecoder {
    n: usize,
    reals: Vec<f64>,
    scaled: Vec<f64>,
    pairs: Vec<(u32, u32)>,
}

impl JointDecoder {
    pub fn new(code: &LinearCode, gamma: f64, search: PairSearch, cap: u64) -> Result<Self> {
        let size = code.ensure_enumerable(cap)?;
        if search == PairSearch::Independent && code.k() < 2 {
            return Err(Error::EmptySearchSpace(code.k()));
        }
        let n = code.n();
        let mut reals = Vec::with_capacity(size as usize * n);
        let mut messages = Vec::with_capacity(size as usize);
        for (w, c) in code.all_codewords(cap)? {
            reals.extend(c.reals());
            messages.push(w);
        }
        let scaled = reals.iter().map(|x| gamma * x).collect();
        let mut pairs = Vec::new();
        for i in 0..size as u32 {
            for j in 0..size as u32 {
                if search == PairSearch::All
                    || linearly_independent(&messages[i as usize].0, &messages[j as usize].0, code.p())
                {
                    pairs.push((i, j));
                }
            }
        }
        Ok(Self {
            n,
            reals,
            scaled,
            pairs,
        })
    }

    /// Number of ordered pairs searched.
    pub fn num_pairs(&self) -> usize {
        self.pairs.len()
    }

    /// Real form of codeword `i`.
    pub fn codeword(&self, i: u64) -> &[f64] {
        let i = i as usize;
        &self.reals[i * self.n..(i + 1) * self.n]
    }

    /// `sum_t ([y_t - psi_t(i, j)]*)^2`.
    pub fn metric(&self, y: &[f64], i: u64, j: u64) -> f64 {
        self.metric_bounded(y, i as usize, j as usize, f64::INFINITY)
    }

    #[inline]
    fn metric_bounded(&self, y: &[f64], i: usize, j: usize, bound: f64) -> f64 {
        let xi = &self.reals[i * self.n..(i + 1) * self.n];
        let gj = &self.scaled[j * self.n..(j + 1) * self.n];
        let mut acc = 0.0;
        for ((&yt, &a), &b) in y.iter().zip(xi).zip(gj) {
            let psi = reduce(a + b);
            let d = reduce(yt - psi);
            acc += d * d;
            if acc > bound {
                break;
            }
        }
        acc
    }

    /// Decodes a received vector of length `n`.
    pub fn decode(&self, y: &[f64]) -> Result<Decision> {
        if y.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: y.len(),
            });
        }
        let mut best = f64::INFINITY;
        let mut arg = (0u32, 0u32);
        let mut ties = 0usize;
        for &(i, j) in &self.pairs {
            let m = self.metric_bounded(y, i as usize, j as usize, best);
            if m < best {
                best = m;
                arg = (i, j);
                ties = 1;
            } else if m == best {
                ties += 1;
            }
        }
        if ties != 1 {
            return Ok(Decision::Ambiguous);
        }
        Ok(Decision::Pair {
            first: arg.0 as u64,
            second: arg.1 as u64,
        })
    }
}

/// Decodes `y` over linearly independent pairs of `code`.
pub fn joint_decode(code: &LinearCode, y: &[ModScalar], gamma: f64) -> Result<Decision> {
    let dec = JointDecoder::new(code, gamma, PairSearch::Independent, DEFAULT_ENUM_CAP)?;
    let y: Vec<f64> = y.iter().map(|m| m.value()).collect();
    dec.decode(&y)
}

/// Parameters of a MAC Monte Carlo run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MacConfig {
    pub gamma: Gain,
    /// Linear SNR; the noise variance is `1/snr`.
    pub snr: f64,
    pub trials: u64,
    pub seed: u64,
}

impl MacConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidArgument("trials must be at least 1".into()));
        }
        if !(self.snr > 0.0) || !self.snr.is_finite() {
            return Err(Error::InvalidArgument(format!("snr must be positive, got {}", self.snr)));
        }
        Ok(())
    }
}

/// Aggregate outcome of a simulation run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimResult {
    pub trials: u64,
    pub errors: u64,
    /// Trials whose messages were linearly dependent (all counted as errors).
    pub dependent: u64,
    /// Trials where the decoder declared a tie (all counted as errors).
    pub ambiguous: u64,
    pub p_e: f64,
    pub ci95: (f64, f64),
}

impl SimResult {
    pub fn from_counts(trials: u64, errors: u64, dependent: u64, ambiguous: u64) -> Self {
        Self {
            trials,
            errors,
            dependent,
            ambiguous,
            p_e: errors as f64 / trials as f64,
            ci95: wilson_interval(errors, trials),
        }
    }

    /// Error rate over trials with independent messages.
    pub fn conditional_p_e(&self) -> f64 {
        let n = self.trials - self.dependent;
        if n == 0 {
            return 0.0;
        }
        (self.errors - self.dependent) as f64 / n as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Outcome {
    Correct,
    Dependent,
    Wrong,
    Ambiguous,
}

/// Draws `n` Gaussian samples of variance `1/snr`.
pub(crate) fn noise_vector<R: Rng + ?Sized>(rng: &mut R, n: usize, snr: f64) -> Vec<f64> {
    let normal = Normal::new(0.0, 1.0 / snr.sqrt()).expect("finite positive sigma");
    (0..n).map(|_| normal.sample(rng)).collect()
}

/// Estimates the MAC error probability of `code` under `cfg`.
///
/// Trial `t` draws both messages from lane 0 and the noise from lane 1 of
/// substream `t`, so results do not depend on worker count.
pub fn estimate_error_prob(code: &LinearCode, cfg: &MacConfig) -> Result<SimResult> {
    cfg.validate()?;
    let gamma = cfg.gamma.value();
    let dec = JointDecoder::new(code, gamma, PairSearch::Independent, DEFAULT_ENUM_CAP)?;
    let split = SeedSplit::new(cfg.seed);
    let p = code.p();
    let outcomes = par::map_indexed(cfg.trials as usize, |t| {
        let mut rng = split.stream(t as u64, LANE_MESSAGES);
        let w1 = code.random_message(&mut rng);
        let w2 = code.random_message(&mut rng);
        if !linearly_independent(&w1.0, &w2.0, p) {
            return Outcome::Dependent;
        }
        let (i1, i2) = (code.index_of(&w1), code.index_of(&w2));
        let mut rng = split.stream(t as u64, LANE_NOISE);
        let z = noise_vector(&mut rng, code.n(), cfg.snr);
        let y: Vec<f64> = dec
            .codeword(i1)
            .iter()
            .zip(dec.codeword(i2))
            .zip(&z)
            .map(|((a, b), z)| reduce(a + gamma * b + z))
            .collect();
        match dec.decode(&y).expect("length n") {
            Decision::Pair { first, second } if first == i1 && second == i2 => Outcome::Correct,
            Decision::Pair { .. } => Outcome::Wrong,
            Decision::Ambiguous => Outcome::Ambiguous,
        }
    });
    let count = |o: Outcome| outcomes.iter().filter(|&&x| x == o).count() as u64;
    let (dependent, ambiguous) = (count(Outcome::Dependent), count(Outcome::Ambiguous));
    let errors = dependent + ambiguous + count(Outcome::Wrong);
    Ok(SimResult::from_counts(cfg.trials, errors, dependent, ambiguous))
}
