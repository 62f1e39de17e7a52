//! K-user integer-interference channel. Receiver `j` sees
//! `[h_jj x_j + sum_{k != j} a_jk x_k + z_j]*`; because the cross gains are
//! integers, the interference collapses to one codeword of the shared code
//! and each receiver runs a two-user joint decoder.

use std::fmt;

use crate::code::{Codeword, LinearCode, MessageVector, DEFAULT_ENUM_CAP};
use crate::diophantine::Gain;
use crate::mac::{noise_vector, wilson_interval, Decision, JointDecoder, PairSearch};
use crate::modarith::reduce;
use crate::rates::{dof_benchmark, theorem2_sym_rate, time_sharing_sum_rate, PMaxRule};
use crate::rng::{SeedSplit, LANE_MESSAGES, LANE_NOISE};
use crate::{db_to_linear, par, Error, Result};

/// Gains of a K-user channel with real direct gains and integer cross gains.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelMatrix {
    k: usize,
    diag: Vec<Gain>,
    off: Vec<i64>,
}

impl ChannelMatrix {
    /// `off` is the full row-major `k x k` matrix; its diagonal is ignored.
    pub fn new(diag: Vec<Gain>, off: Vec<i64>) -> Result<Self> {
        let k = diag.len();
        if k < 2 {
            return Err(Error::InvalidChannel(format!("need at least 2 users, got {k}")));
        }
        if off.len() != k * k {
            return Err(Error::DimensionMismatch {
                expected: k * k,
                got: off.len(),
            });
        }
        Ok(Self { k, diag, off })
    }

    /// Builds from a row-major real matrix; off-diagonal entries must be
    /// integers.
    pub fn from_reals(k: usize, entries: &[f64]) -> Result<Self> {
        if entries.len() != k * k {
            return Err(Error::DimensionMismatch {
                expected: k * k,
                got: entries.len(),
            });
        }
        let mut diag = Vec::with_capacity(k);
        let mut off = vec![0; k * k];
        for r in 0..k {
            for c in 0..k {
                let v = entries[r * k + c];
                if !v.is_finite() {
                    return Err(Error::NonFinite(v));
                }
                if r == c {
                    diag.push(Gain::Float(v));
                } else {
                    off[r * k + c] = integer_gain(v)?;
                }
            }
        }
        Self::new(diag, off)
    }

    /// Parses the text format: a line with `K`, then `K` rows of `K`
    /// whitespace-separated entries. Diagonal entries may be `a/b` or
    /// decimal; off-diagonal entries must be integers. Blank lines and
    /// `#` comments are skipped.
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .map(|l| l.split('#').next().unwrap_or("").trim())
            .filter(|l| !l.is_empty());
        let header = lines
            .next()
            .ok_or_else(|| Error::InvalidChannel("empty channel file".into()))?;
        let k: usize = header
            .parse()
            .map_err(|_| Error::InvalidChannel(format!("bad user count '{header}'")))?;
        if k < 2 {
            return Err(Error::InvalidChannel(format!("need at least 2 users, got {k}")));
        }
        let mut diag = Vec::with_capacity(k);
        let mut off = vec![0; k * k];
        for r in 0..k {
            let line = lines
                .next()
                .ok_or_else(|| Error::InvalidChannel(format!("expected {k} rows, got {r}")))?;
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != k {
                return Err(Error::InvalidChannel(format!(
                    "row {} has {} entries, expected {k}",
                    r + 1,
                    fields.len()
                )));
            }
            for (c, f) in fields.into_iter().enumerate() {
                if r == c {
                    diag.push(f.parse::<Gain>()?);
                } else {
                    off[r * k + c] = f.parse().map_err(|_| {
                        Error::InvalidChannel(format!(
                            "entry ({}, {}) = '{f}' is not an integer",
                            r + 1,
                            c + 1
                        ))
                    })?;
                }
            }
        }
        if let Some(extra) = lines.next() {
            return Err(Error::InvalidChannel(format!("unexpected trailing line '{extra}'")));
        }
        Self::new(diag, off)
    }

    /// The 5-user example channel with direct gain `h`.
    pub fn five_user_example(h: Gain) -> Self {
        #[rustfmt::skip]
        let off = vec![
            0, 1, 2, 3, 4,
            5, 0, 3, 6, 7,
            2, 11, 0, 1, 3,
            3, 7, 6, 0, 9,
            11, 2, 6, 4, 0,
        ];
        Self::new(vec![h; 5], off).expect("static shape")
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn diagonal(&self) -> &[Gain] {
        &self.diag
    }

    /// Integer cross gain from transmitter `c` to receiver `r`.
    pub fn off(&self, r: usize, c: usize) -> i64 {
        if r == c {
            0
        } else {
            self.off[r * self.k + c]
        }
    }

    /// Cross gains seen by receiver `r`, zero in position `r`.
    pub fn interference_row(&self, r: usize) -> Vec<i64> {
        (0..self.k).map(|c| self.off(r, c)).collect()
    }
}

impl fmt::Display for ChannelMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}", self.k)?;
        for r in 0..self.k {
            let row: Vec<String> = (0..self.k)
                .map(|c| {
                    if r == c {
                        self.diag[r].to_string()
                    } else {
                        self.off(r, c).to_string()
                    }
                })
                .collect();
            writeln!(f, "{}", row.join(" "))?;
        }
        Ok(())
    }
}

fn integer_gain(v: f64) -> Result<i64> {
    if v.fract() != 0.0 || v.abs() > (1u64 << 53) as f64 {
        return Err(Error::InvalidChannel(format!("cross gain {v} is not an integer")));
    }
    Ok(v as i64)
}

/// Aligns integer-weighted codewords into a single codeword of the code:
/// returns `w = sum_k a_k w_k mod p` and its codeword, which equals
/// `[sum_k a_k x_k]*` componentwise.
pub fn align_interference(
    code: &LinearCode,
    gains: &[f64],
    messages: &[MessageVector],
) -> Result<(MessageVector, Codeword)> {
    let ints = gains
        .iter()
        .map(|&g| integer_gain(g))
        .collect::<Result<Vec<_>>>()?;
    align_integer(code, &ints, messages)
}

fn align_integer(
    code: &LinearCode,
    gains: &[i64],
    messages: &[MessageVector],
) -> Result<(MessageVector, Codeword)> {
    if gains.len() != messages.len() {
        return Err(Error::DimensionMismatch {
            expected: gains.len(),
            got: messages.len(),
        });
    }
    let p = code.p();
    let mut acc = MessageVector::zeros(code.k());
    for (&a, w) in gains.iter().zip(messages) {
        code.check_message(w)?;
        acc = acc.add_mod(&w.scale_mod(a, p), p);
    }
    let cw = code.codeword_from_residues(&code.encode_residues(&acc.0));
    Ok((acc, cw))
}

/// Per-receiver and network-wide error statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkSimResult {
    pub trials: u64,
    pub receiver_errors: Vec<u64>,
    pub receiver_p_e: Vec<f64>,
    /// Trials where at least one receiver missed its own message.
    pub network_errors: u64,
    pub network_p_e: f64,
    pub network_ci95: (f64, f64),
}

/// Simulates every receiver of `h` using the shared `code`.
///
/// Receiver `j` decodes over all ordered pairs (interference at unit gain,
/// desired at gain `h_jj`) and is scored on its own message only. Trial `t`
/// draws the `K` messages from lane 0 and receiver `j`'s noise from lane
/// `1 + j`.
pub fn simulate_network(
    h: &ChannelMatrix,
    code: &LinearCode,
    snr: f64,
    trials: u64,
    seed: u64,
) -> Result<NetworkSimResult> {
    let order: Vec<usize> = (0..h.k()).collect();
    simulate_in_order(h, code, snr, trials, seed, &order)
}

fn simulate_in_order(
    h: &ChannelMatrix,
    code: &LinearCode,
    snr: f64,
    trials: u64,
    seed: u64,
    order: &[usize],
) -> Result<NetworkSimResult> {
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be at least 1".into()));
    }
    if !(snr > 0.0) || !snr.is_finite() {
        return Err(Error::InvalidArgument(format!("snr must be positive, got {snr}")));
    }
    let k = h.k();
    let decoders = h
        .diagonal()
        .iter()
        .map(|g| JointDecoder::new(code, g.value(), PairSearch::All, DEFAULT_ENUM_CAP))
        .collect::<Result<Vec<_>>>()?;
    let rows: Vec<Vec<i64>> = (0..k).map(|j| h.interference_row(j)).collect();
    let split = SeedSplit::new(seed);
    let n = code.n();

    let outcomes: Vec<Vec<bool>> = par::map_indexed(trials as usize, |t| {
        let mut rng = split.stream(t as u64, LANE_MESSAGES);
        let msgs: Vec<MessageVector> = (0..k).map(|_| code.random_message(&mut rng)).collect();
        let mut failed = vec![false; k];
        for &j in order {
            let (w_if, _) = align_integer(code, &rows[j], &msgs).expect("validated shapes");
            let dec = &decoders[j];
            let (i_if, i_d) = (code.index_of(&w_if), code.index_of(&msgs[j]));
            let gain = h.diagonal()[j].value();
            let mut rng = split.stream(t as u64, LANE_NOISE + j as u32);
            let z = noise_vector(&mut rng, n, snr);
            let y: Vec<f64> = dec
                .codeword(i_if)
                .iter()
                .zip(dec.codeword(i_d))
                .zip(&z)
                .map(|((a, b), z)| reduce(a + gain * b + z))
                .collect();
            failed[j] = match dec.decode(&y).expect("length n") {
                Decision::Pair { second, .. } => second != i_d,
                Decision::Ambiguous => true,
            };
        }
        failed
    });

    let mut receiver_errors = vec![0u64; k];
    let mut network_errors = 0u64;
    for f in &outcomes {
        for (e, &bad) in receiver_errors.iter_mut().zip(f) {
            *e += bad as u64;
        }
        network_errors += f.iter().any(|&b| b) as u64;
    }
    let receiver_p_e = receiver_errors.iter().map(|&e| e as f64 / trials as f64).collect();
    Ok(NetworkSimResult {
        trials,
        receiver_errors,
        receiver_p_e,
        network_errors,
        network_p_e: network_errors as f64 / trials as f64,
        network_ci95: wilson_interval(network_errors, trials),
    })
}

/// One row of the sum-rate comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SumRateRow {
    pub snr_db: f64,
    pub p_max: u64,
    /// `K` times the symmetric alignment rate.
    pub alignment: f64,
    pub time_sharing: f64,
    pub benchmark: f64,
}

/// Alignment, time-sharing and benchmark sum rates over an SNR grid in dB.
/// The benchmark uses the largest direct gain.
pub fn sum_rate_curves(h: &ChannelMatrix, snr_db_grid: &[f64], rule: PMaxRule) -> Vec<SumRateRow> {
    let k = h.k();
    let h_max = h
        .diagonal()
        .iter()
        .map(|g| g.value())
        .fold(f64::NEG_INFINITY, f64::max);
    par::map_indexed(snr_db_grid.len(), |i| {
        let snr_db = snr_db_grid[i];
        let snr = db_to_linear(snr_db);
        let p_max = rule.resolve(snr);
        SumRateRow {
            snr_db,
            p_max,
            alignment: k as f64 * theorem2_sym_rate(h, snr, p_max).rate,
            time_sharing: time_sharing_sum_rate(k, snr),
            benchmark: dof_benchmark(k, h_max, snr),
        }
    })
}
