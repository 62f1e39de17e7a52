//! Three-user power-time code: four frames of `n` channel uses carry three
//! codewords per user. In frame `t` (t = 1, 2, 3) one transmitter backs off
//! its power so that receiver `t` sees its two interferers with equal gain;
//! frame 4 repeats each user's aligned codeword. Every decode step is a
//! two-user modulo MAC evaluated with the single-code rate.

use std::fmt;

use crate::diophantine::Gain;
use crate::rates::{theorem1_rate, PMaxRule, RatePoint};
use crate::{Error, Result};

/// Three data frames per four frames.
pub const SYMBOL_RATE: f64 = 0.75;

/// Tolerance for the alignment invariant.
const ALIGN_TOL: f64 = 1e-12;

/// Row-major 3x3 gain matrix; entry `[r][c]` is the gain from transmitter
/// `c` to receiver `r`.
pub type Gains3 = [[f64; 3]; 3];

/// Small integer channel on the boundary of the gain orderings. Its
/// frame-4 step at receiver 1 has gain ratio exactly 1/2, so its rate is 0.
pub const INTEGER_EXAMPLE: Gains3 = [[1.0, 1.0, 2.0], [3.0, 1.0, 1.0], [1.0, 2.0, 1.0]];

/// Generic channel built from square roots of the first nine non-squares,
/// arranged to satisfy the gain orderings.
pub fn surd_example() -> Gains3 {
    let s = f64::sqrt;
    [
        [s(2.0), s(3.0), s(7.0)],
        [s(8.0), s(10.0), s(5.0)],
        [s(6.0), s(11.0), s(12.0)],
    ]
}

/// The orderings the canonical schedule requires.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GainAssumption {
    pub h13_ge_h12: bool,
    pub h22_ge_h23: bool,
    pub h32_ge_h31: bool,
}

impl GainAssumption {
    pub fn of(h: &Gains3) -> Self {
        Self {
            h13_ge_h12: h[0][2] >= h[0][1],
            h22_ge_h23: h[1][1] >= h[1][2],
            h32_ge_h31: h[2][1] >= h[2][0],
        }
    }

    pub fn holds(&self) -> bool {
        self.h13_ge_h12 && self.h22_ge_h23 && self.h32_ge_h31
    }

    /// Name of the first violated inequality.
    pub fn first_violation(&self) -> Option<&'static str> {
        if !self.h13_ge_h12 {
            Some("h13 >= h12")
        } else if !self.h22_ge_h23 {
            Some("h22 >= h23")
        } else if !self.h32_ge_h31 {
            Some("h32 >= h31")
        } else {
            None
        }
    }
}

/// Role of a decode step within the schedule.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepKind {
    /// Own codeword against the aligned interference sum.
    Aligned,
    /// The two other users' repeated codewords after removing one's own.
    Repeat,
    /// Own codeword against the one interferer left after removing side
    /// information.
    Residual,
}

/// One two-user decode, in original channel units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecodeStep {
    pub receiver: usize,
    /// Frame number, 1 to 4.
    pub frame: usize,
    pub kind: StepKind,
    /// Gains of the two superimposed codewords at the receiver, before any
    /// receiver scaling.
    pub gains: (f64, f64),
}

impl DecodeStep {
    /// The stronger gain (by magnitude) is normalized to one.
    pub fn unit_gain(&self) -> f64 {
        let (a, b) = self.gains;
        if a.abs() >= b.abs() {
            a
        } else {
            b
        }
    }

    /// Weaker gain over stronger gain.
    pub fn gamma_eff(&self) -> f64 {
        let (a, b) = self.gains;
        let u = self.unit_gain();
        if u == a {
            b / a
        } else {
            a / b
        }
    }

    /// Multiplier from the receiver's SNR to the step's effective SNR.
    pub fn snr_factor(&self) -> f64 {
        self.unit_gain().powi(2)
    }
}

/// The full frame schedule for one channel.
#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    pub h: Gains3,
    /// `1/h12, 1/h23, 1/h31`.
    pub receiver_scaling: [f64; 3],
    /// `h` with each row multiplied by its receiver scaling.
    pub h_tilde: Gains3,
    /// Transmitter scalings per frame.
    pub alpha: [[f64; 3]; 4],
    /// Equivalent channel of each frame after receiver and transmitter
    /// scaling.
    pub equivalent: [Gains3; 4],
    pub steps: Vec<DecodeStep>,
}

/// Builds the schedule, checking gain orderings, the power constraint and
/// the alignment invariant.
pub fn build_schedule(h: &Gains3) -> Result<Schedule> {
    for row in h {
        for &v in row {
            if !v.is_finite() {
                return Err(Error::NonFinite(v));
            }
            if v == 0.0 {
                return Err(Error::GainAssumption("all gains must be nonzero".into()));
            }
        }
    }
    if let Some(v) = GainAssumption::of(h).first_violation() {
        return Err(Error::GainAssumption(format!("requires {v}")));
    }
    let receiver_scaling = [1.0 / h[0][1], 1.0 / h[1][2], 1.0 / h[2][0]];
    let mut h_tilde = *h;
    for (row, s) in h_tilde.iter_mut().zip(receiver_scaling) {
        for v in row.iter_mut() {
            *v *= s;
        }
    }
    let a3 = 1.0 / h_tilde[0][2];
    let a1 = 1.0 / h_tilde[1][0];
    let a2 = 1.0 / h_tilde[2][1];
    for (name, a) in [("alpha3 = h12/h13", a3), ("alpha1 = h23/h21", a1), ("alpha2 = h31/h32", a2)] {
        if a.abs() > 1.0 {
            return Err(Error::GainAssumption(format!(
                "power back-off {name} = {a} exceeds 1 in magnitude"
            )));
        }
    }
    let alpha = [
        [1.0, 1.0, a3],
        [a1, 1.0, 1.0],
        [1.0, a2, 1.0],
        [1.0, 1.0, 1.0],
    ];
    let mut equivalent = [[[0.0; 3]; 3]; 4];
    for (t, eq) in equivalent.iter_mut().enumerate() {
        for r in 0..3 {
            for c in 0..3 {
                eq[r][c] = h_tilde[r][c] * alpha[t][c];
            }
        }
    }
    for t in 0..3 {
        for c in (0..3).filter(|&c| c != t) {
            let g = equivalent[t][t][c];
            if (g - 1.0).abs() > ALIGN_TOL {
                return Err(Error::GainAssumption(format!(
                    "alignment failed at receiver {} frame {}: gain {g}",
                    t + 1,
                    t + 1
                )));
            }
        }
    }

    // gain of transmitter c at receiver r in frame t, original units
    let g = |t: usize, r: usize, c: usize| h[r][c] * alpha[t][c];
    let mut steps = Vec::with_capacity(12);
    for r in 0..3 {
        let others: Vec<usize> = (0..3).filter(|&c| c != r).collect();
        steps.push(DecodeStep {
            receiver: r,
            frame: r + 1,
            kind: StepKind::Aligned,
            gains: (g(r, r, r), g(r, r, others[0])),
        });
        steps.push(DecodeStep {
            receiver: r,
            frame: 4,
            kind: StepKind::Repeat,
            gains: (g(3, r, others[0]), g(3, r, others[1])),
        });
        // in frame t the user aligned in that frame is known from frame 4,
        // leaving the receiver's own codeword and the remaining user
        for &t in &others {
            let remaining = (0..3).find(|&c| c != r && c != t).expect("three users");
            steps.push(DecodeStep {
                receiver: r,
                frame: t + 1,
                kind: StepKind::Residual,
                gains: (g(t, r, r), g(t, r, remaining)),
            });
        }
    }
    Ok(Schedule {
        h: *h,
        receiver_scaling,
        h_tilde,
        alpha,
        equivalent,
        steps,
    })
}

/// Rate of each decode step at per-receiver SNRs.
pub fn step_rates(schedule: &Schedule, snr: [f64; 3], p_max: u64) -> Vec<RatePoint> {
    schedule
        .steps
        .iter()
        .map(|s| {
            theorem1_rate(
                Gain::Float(s.gamma_eff()),
                snr[s.receiver] * s.snr_factor(),
                p_max,
            )
        })
        .collect()
}

/// Symmetric rate per user with a separate SNR at each receiver.
pub fn schedule_rate_per_receiver(h: &Gains3, snr: [f64; 3], p_max: u64) -> Result<f64> {
    let schedule = build_schedule(h)?;
    let min = step_rates(&schedule, snr, p_max)
        .iter()
        .map(|r| r.rate)
        .fold(f64::INFINITY, f64::min);
    Ok((SYMBOL_RATE * min).max(0.0))
}

/// Symmetric rate per user at a common SNR.
pub fn schedule_rate(h: &Gains3, snr: f64, p_max: u64) -> Result<f64> {
    schedule_rate_per_receiver(h, [snr; 3], p_max)
}

/// Sum rate relative to half the log SNR at one grid point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DofFactorPoint {
    pub snr: f64,
    pub p_max: u64,
    pub rate: f64,
    pub factor: f64,
}

/// `3 * schedule_rate / (1/2 log2 SNR)` over an ascending SNR grid.
pub fn dof_factor(h: &Gains3, snr_grid: &[f64], rule: PMaxRule) -> Result<Vec<DofFactorPoint>> {
    if snr_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument("snr grid must be ascending".into()));
    }
    let schedule = build_schedule(h)?;
    let points = crate::par::map_indexed(snr_grid.len(), |i| {
        let snr = snr_grid[i];
        let p_max = rule.resolve(snr);
        let min = step_rates(&schedule, [snr; 3], p_max)
            .iter()
            .map(|r| r.rate)
            .fold(f64::INFINITY, f64::min);
        let rate = (SYMBOL_RATE * min).max(0.0);
        let half_log = 0.5 * snr.log2();
        let factor = if half_log > 0.0 { 3.0 * rate / half_log } else { 0.0 };
        DofFactorPoint {
            snr,
            p_max,
            rate,
            factor,
        }
    });
    Ok(points)
}

/// Parses a 3x3 real matrix in the channel-file layout: a line `3`, then
/// three rows. Entries may be decimals or `a/b`.
pub fn parse_gains3(text: &str) -> Result<Gains3> {
    let mut lines = text
        .lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .filter(|l| !l.is_empty());
    match lines.next() {
        Some("3") => {}
        Some(other) => {
            return Err(Error::InvalidChannel(format!(
                "power-time channels have 3 users, got '{other}'"
            )))
        }
        None => return Err(Error::InvalidChannel("empty channel file".into())),
    }
    let mut h = [[0.0; 3]; 3];
    for (r, row) in h.iter_mut().enumerate() {
        let line = lines
            .next()
            .ok_or_else(|| Error::InvalidChannel(format!("expected 3 rows, got {r}")))?;
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 3 {
            return Err(Error::InvalidChannel(format!(
                "row {} has {} entries, expected 3",
                r + 1,
                fields.len()
            )));
        }
        for (v, f) in row.iter_mut().zip(fields) {
            *v = f.parse::<Gain>()?.value();
        }
    }
    if let Some(extra) = lines.next() {
        return Err(Error::InvalidChannel(format!("unexpected trailing line '{extra}'")));
    }
    Ok(h)
}

impl fmt::Display for StepKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StepKind::Aligned => "aligned",
            StepKind::Repeat => "repeat",
            StepKind::Residual => "residual",
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const EXAMPLE: Gains3 = INTEGER_EXAMPLE;

    fn generic() -> Gains3 {
        surd_example()
    }

    #[test]
    fn example_schedule() {
        let s = build_schedule(&EXAMPLE).unwrap();
        assert_eq!(s.receiver_scaling, [1.0, 1.0, 1.0]);
        assert_eq!(s.h_tilde, EXAMPLE);
        assert_eq!(s.alpha[0], [1.0, 1.0, 0.5]);
        assert_eq!(s.equivalent[0][0], [1.0, 1.0, 1.0]);
        assert_eq!(s.alpha[1], [1.0 / 3.0, 1.0, 1.0]);
        assert_eq!(s.alpha[2], [1.0, 0.5, 1.0]);
        assert_eq!(s.steps.len(), 12);
        let repeat = s
            .steps
            .iter()
            .find(|st| st.receiver == 0 && st.kind == StepKind::Repeat)
            .unwrap();
        assert_eq!(repeat.gains, (1.0, 2.0));
        assert_eq!(repeat.gamma_eff(), 0.5);
        assert_eq!(repeat.snr_factor(), 4.0);
        assert_eq!(schedule_rate(&EXAMPLE, 1e20, 1000).unwrap(), 0.0);
    }

    #[test]
    fn equal_cross_gains_need_no_back_off() {
        let h = [[1.3, 2.0, 2.0], [3.0, 1.0, 1.0], [1.0, 2.0, 1.0]];
        assert_eq!(build_schedule(&h).unwrap().alpha[0][2], 1.0);
    }

    #[test]
    fn violations_are_named() {
        let mut h = EXAMPLE;
        h[0][2] = 0.5;
        let e = build_schedule(&h).unwrap_err();
        assert!(e.to_string().contains("h13 >= h12"), "{e}");
        let mut h = EXAMPLE;
        h[1][2] = 5.0;
        h[1][0] = 6.0;
        assert!(build_schedule(&h).unwrap_err().to_string().contains("h22 >= h23"));
        let mut h = EXAMPLE;
        h[2][0] = 3.0;
        assert!(build_schedule(&h).unwrap_err().to_string().contains("h32 >= h31"));
        let mut h = EXAMPLE;
        h[1][0] = 0.5;
        assert!(build_schedule(&h).unwrap_err().to_string().contains("alpha1"));
        let mut h = EXAMPLE;
        h[2][2] = 0.0;
        assert!(build_schedule(&h).is_err());
    }

    #[test]
    fn step_inventory_covers_every_frame() {
        let s = build_schedule(&generic()).unwrap();
        for r in 0..3 {
            let mine: Vec<&DecodeStep> = s.steps.iter().filter(|st| st.receiver == r).collect();
            assert_eq!(mine.len(), 4);
            let mut frames: Vec<usize> = mine.iter().map(|st| st.frame).collect();
            frames.sort();
            assert_eq!(frames, vec![1, 2, 3, 4]);
            let aligned = mine.iter().find(|st| st.kind == StepKind::Aligned).unwrap();
            assert_eq!(aligned.frame, r + 1);
        }
        for st in &s.steps {
            assert!(st.gamma_eff().abs() <= 1.0);
        }
    }

    #[test]
    fn aligned_steps_match_scaled_equivalents() {
        let h = generic();
        let s = build_schedule(&h).unwrap();
        for st in s.steps.iter().filter(|st| st.kind == StepKind::Aligned) {
            let r = st.receiver;
            let eq = s.equivalent[r][r];
            let scale = s.receiver_scaling[r];
            assert!((st.gains.0 * scale - eq[r]).abs() < 1e-12);
            assert!((st.gains.1 * scale - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn positive_rate_at_high_snr_and_growth() {
        let h = generic();
        let lo = schedule_rate(&h, 1e12, 10_000).unwrap();
        let hi = schedule_rate(&h, 1e20, 100_000).unwrap();
        assert!(hi > 0.0);
        assert!(3.0 * hi > 3.0 * lo);
        assert_eq!(schedule_rate(&h, 1.0, 101).unwrap(), 0.0);
    }

    #[test]
    fn symbol_rate_is_three_quarters() {
        let h = generic();
        let s = build_schedule(&h).unwrap();
        let snr = 1e16;
        let min = step_rates(&s, [snr; 3], 10_000)
            .iter()
            .map(|r| r.rate)
            .fold(f64::INFINITY, f64::min);
        assert!(min > 0.0);
        assert_eq!(schedule_rate(&h, snr, 10_000).unwrap(), 0.75 * min);
    }

    #[test]
    fn receiver_scaling_absorbs_row_scaling() {
        let h = generic();
        let mut scaled = h;
        for v in scaled[0].iter_mut() {
            *v *= 2.0;
        }
        for snr in [1e10, 1e16, 1e20] {
            let a = schedule_rate_per_receiver(&h, [snr; 3], 10_000).unwrap();
            let b = schedule_rate_per_receiver(&scaled, [snr / 4.0, snr, snr], 10_000).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn dof_factor_trend() {
        let grid = [1e8, 1e12, 1e16, 1e20];
        let pts = dof_factor(&generic(), &grid, PMaxRule::Default { cap: 100_000 }).unwrap();
        assert!(pts.windows(2).all(|w| w[1].factor >= w[0].factor), "{pts:?}");
        let zero = dof_factor(&generic(), &[2.0], PMaxRule::Fixed(101)).unwrap();
        assert_eq!(zero[0].factor, 0.0);
        assert!(dof_factor(&generic(), &[1e10, 1e8], PMaxRule::Fixed(101)).is_err());
    }

    #[test]
    fn parse_gains3_formats() {
        let h = parse_gains3("# c\n3\n1 1 2\n3 1 1/1\n1 2 1\n").unwrap();
        assert_eq!(h, EXAMPLE);
        for bad in ["", "2\n1 1\n1 1\n", "3\n1 1 2\n3 1 1\n", "3\n1 1 2\n3 1\n1 2 1\n", "3\n1 1 x\n3 1 1\n1 2 1\n"] {
            assert!(parse_gains3(bad).is_err(), "{bad:?}");
        }
    }

    fn ordered_matrix() -> impl Strategy<Value = Gains3> {
        // draws each constrained pair as (smaller, larger) so the canonical
        // orderings and back-off bounds hold
        prop::array::uniform9(0.2f64..4.0).prop_map(|v| {
            let mm = |a: f64, b: f64| (a.min(b), a.max(b));
            let (h12, h13) = mm(v[0], v[1]);
            let (h23, h21) = mm(v[2], v[3]);
            let h22 = h23.max(v[4]);
            let (h31, h32) = mm(v[5], v[6]);
            [[v[7], h12, h13], [h21, h22, h23], [h31, h32, v[8]]]
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn alignment_invariant_holds(h in ordered_matrix()) {
            let s = build_schedule(&h).unwrap();
            for t in 0..3 {
                for c in (0..3).filter(|&c| c != t) {
                    prop_assert!((s.equivalent[t][t][c] - 1.0).abs() <= 1e-12);
                }
            }
            for a in s.alpha.iter().flatten() {
                prop_assert!(a.abs() <= 1.0);
            }
        }

        #[test]
        fn rate_is_nonnegative_and_bounded(h in ordered_matrix(), db in 0.0f64..120.0) {
            let snr = 10f64.powf(db / 10.0);
            let r = schedule_rate(&h, snr, 200).unwrap();
            prop_assert!(r >= 0.0);
            prop_assert!(r <= 0.75 * 0.5 * (1.0 + 16.0 * snr).log2());
        }
    }
}
