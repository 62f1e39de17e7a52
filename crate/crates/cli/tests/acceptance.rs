//! Acceptance suite: one line per criterion, non-zero exit if any fails.

use std::f64::consts::FRAC_1_SQRT_2;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::Command;
use std::time::{Duration, Instant};

use rand::Rng;

use lattice_align::code::{LinearCode, MessageVector};
use lattice_align::db_to_linear;
use lattice_align::diophantine::{best_rational_oracle, delta, primes_up_to, Fraction, Gain};
use lattice_align::mac::{estimate_error_prob, MacConfig};
use lattice_align::modarith::{reduce, L};
use lattice_align::network::{align_interference, ChannelMatrix};
use lattice_align::power_time::{dof_factor, surd_example};
use lattice_align::rates::{
    dependent_message_fraction, dof_ratio_scan, sweep_normalized, theorem1_rate, PMaxRule,
};
use lattice_align::rng::seeded;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

fn sqrt2_half() -> Gain {
    Gain::Float(FRAC_1_SQRT_2)
}

fn delta_oracle() -> Verdict {
    let start = Instant::now();
    let mut rng = seeded(1001);
    let primes = primes_up_to(101);
    let mut worst = 0.0f64;
    let mut count = 0;
    while count < 1000 {
        let g: f64 = rng.random_range(0.0..0.5);
        if g == 0.0 {
            continue;
        }
        count += 1;
        for &p in &primes {
            let direct = delta(p, &Gain::Float(g)).unwrap();
            let (_, oracle) = best_rational_oracle(g, p);
            worst = worst.max((direct - oracle).abs());
        }
    }
    let elapsed = start.elapsed();
    verdict(
        worst <= 1e-12 && elapsed < Duration::from_secs(10),
        format!("1000 gains x {} primes, max diff {worst:e}, {elapsed:.2?}", primes.len()),
    )
}

fn rational_saturation() -> Verdict {
    let mut ok = true;
    let mut notes = Vec::new();
    for (r, q) in [(1i64, 3u64), (6, 25), (707, 1000)] {
        let g = Gain::Exact(Fraction::new(r, q).unwrap());
        let ceiling = (q as f64).log2();
        let mut max = 0.0f64;
        for db in 0..=200 {
            let snr = db_to_linear(db as f64);
            let rate = theorem1_rate(g, snr, PMaxRule::default().resolve(snr)).rate;
            ok &= rate < ceiling;
            max = max.max(rate);
        }
        notes.push(format!("{r}/{q}: max {max:.6} < {ceiling:.6}"));
    }
    verdict(ok, notes.join("; "))
}

fn strict_local_min(r: &[f64], i: usize) -> bool {
    r[i] < r[i - 1] && r[i] < r[i + 1]
}

fn degradedness() -> Verdict {
    let gammas: Vec<Gain> = (1..=49)
        .map(|i| Gain::Float(format!("0.{i:02}").parse().unwrap()))
        .collect();
    let dbs = [20.0, 30.0, 40.0, 100.0, 110.0, 120.0];
    let snrs: Vec<f64> = dbs.iter().map(|&d| db_to_linear(d)).collect();
    let pts = sweep_normalized(&gammas, &snrs, PMaxRule::default());
    let max = pts.iter().map(|p| p.r_norm).fold(0.0, f64::max);
    let mut ok = max <= 1.0;
    // grid index i holds gamma = (i + 1) / 100
    let small_q = [9usize, 19, 24, 29, 39];
    for j in 3..6 {
        let row: Vec<f64> = pts[j * 49..(j + 1) * 49].iter().map(|p| p.r_norm).collect();
        ok &= small_q.iter().all(|&i| strict_local_min(&row, i));
        let near_half = (44..48).any(|i| strict_local_min(&row, i));
        let mut sorted = row.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let median = sorted[24];
        let window_min = row[44..49].iter().cloned().fold(f64::INFINITY, f64::min);
        ok &= near_half && window_min < median;
    }
    verdict(
        ok,
        format!(
            "max r_norm {max:.4}; dips at 0.10/0.20/0.25/0.30/0.40 and in 0.45-0.49 at 100-120 dB"
        ),
    )
}

fn digits(mut idx: u64, p: u64, k: u32) -> Vec<u64> {
    (0..k)
        .map(|_| {
            let d = idx % p;
            idx /= p;
            d
        })
        .collect()
}

fn dependent_by_enumeration(p: u64, k: u32) -> u64 {
    let size = p.pow(k);
    let mut count = 0;
    for a in 0..size {
        let w1 = digits(a, p, k);
        for b in 0..size {
            let w2 = digits(b, p, k);
            let dependent = (0..p).any(|s| {
                (0..p).any(|t| {
                    (s, t) != (0, 0) && w1.iter().zip(&w2).all(|(x, y)| (s * x + t * y) % p == 0)
                })
            });
            count += dependent as u64;
        }
    }
    count
}

fn dependent_probability() -> Verdict {
    let f = dependent_message_fraction(3, 2).unwrap();
    let mut ok = (f.numerator(), f.denominator()) == (11, 27);
    for p in [2u64, 3, 5] {
        for k in [1u32, 2, 3] {
            let f = dependent_message_fraction(p, k).unwrap();
            let total = p.pow(2 * k) as u128;
            let count = dependent_by_enumeration(p, k) as u128;
            ok &= count * f.denominator() as u128 == f.numerator() as u128 * total;
        }
    }
    verdict(ok, format!("p=3,k=2 gives {f}; 9 (p,k) pairs match enumeration"))
}

fn noiseless_floor() -> Verdict {
    let start = Instant::now();
    let code = LinearCode::sample(3, 8, 2, 5).unwrap();
    let cfg = MacConfig {
        gamma: sqrt2_half(),
        snr: db_to_linear(200.0),
        trials: 5_000,
        seed: 55,
    };
    let r = estimate_error_prob(&code, &cfg).unwrap();
    let target = 11.0 / 27.0;
    let elapsed = start.elapsed();
    verdict(
        r.ci95.0 <= target && target <= r.ci95.1 && elapsed < Duration::from_secs(60),
        format!(
            "p_e {:.4}, 95% CI [{:.4}, {:.4}] vs {target:.4}, {elapsed:.2?}",
            r.p_e, r.ci95.0, r.ci95.1
        ),
    )
}

fn conditional_trend(db: f64) -> Vec<f64> {
    [32usize, 64, 128]
        .iter()
        .map(|&n| {
            let code = LinearCode::sample(5, n, 2, 7).unwrap();
            let cfg = MacConfig {
                gamma: sqrt2_half(),
                snr: db_to_linear(db),
                trials: 2_000,
                seed: 1,
            };
            estimate_error_prob(&code, &cfg).unwrap().conditional_p_e()
        })
        .collect()
}

fn error_trend() -> Verdict {
    let db = 18.0;
    let snr = db_to_linear(db);
    let rate = theorem1_rate(sqrt2_half(), snr, PMaxRule::default().resolve(snr)).rate;
    let main = conditional_trend(db);
    let low = conditional_trend(3.0);
    let nonincreasing = |v: &[f64]| v.windows(2).all(|w| w[1] <= w[0]);
    verdict(
        rate > 0.0 && nonincreasing(&main),
        format!(
            "{db} dB (rate {rate:.4}): p_e over n=32/64/128 {main:?}; at 3 dB {:?}",
            low.iter().map(|x| (x * 1e4).round() / 1e4).collect::<Vec<_>>()
        ),
    )
}

fn residue_of(x: f64, p: u32) -> u32 {
    ((x * p as f64 / L).round() as i64).rem_euclid(p as i64) as u32
}

fn alignment_exactness() -> Verdict {
    let h = ChannelMatrix::five_user_example(sqrt2_half());
    let code = LinearCode::sample(3, 8, 2, 12).unwrap();
    let p = code.p();
    let mut rng = seeded(77);
    let mut mismatches = 0;
    for _ in 0..100 {
        let msgs: Vec<MessageVector> = (0..5).map(|_| code.random_message(&mut rng)).collect();
        let cws: Vec<Vec<f64>> = msgs.iter().map(|m| code.encode(m).unwrap().reals()).collect();
        for j in 0..5 {
            let row = h.interference_row(j);
            let gains: Vec<f64> = row.iter().map(|&a| a as f64).collect();
            let (w, cw) = align_interference(&code, &gains, &msgs).unwrap();
            let expect: Vec<u32> = (0..code.k())
                .map(|i| {
                    let s: i64 = row.iter().zip(&msgs).map(|(a, m)| a * m.0[i] as i64).sum();
                    s.rem_euclid(p as i64) as u32
                })
                .collect();
            mismatches += (w.0 != expect) as u32;
            for (t, r) in cw.residues().iter().enumerate() {
                let s: f64 = row.iter().zip(&cws).map(|(&a, x)| a as f64 * x[t]).sum();
                mismatches += (residue_of(reduce(s), p) != *r) as u32;
            }
        }
    }
    verdict(mismatches == 0, format!("500 aligned codewords, {mismatches} residue mismatches"))
}

fn matches_anchors(values: &[f64], anchors: &[f64]) -> bool {
    values
        .iter()
        .zip(anchors)
        .all(|(v, a)| (v - a).abs() <= 1e-8)
}

fn dof_trend() -> Verdict {
    const ANCHORS: [f64; 5] = [0.581458677, 0.751930822, 0.855601769, 0.862580545, 0.907050409];
    let snrs: Vec<f64> = [40.0, 80.0, 120.0, 160.0, 200.0]
        .iter()
        .map(|&d| db_to_linear(d))
        .collect();
    let ratios: Vec<f64> = dof_ratio_scan(sqrt2_half(), &snrs, PMaxRule::default())
        .iter()
        .map(|p| p.ratio)
        .collect();
    let ok = ratios.windows(2).all(|w| w[1] >= w[0])
        && ratios[4] > ratios[0]
        && matches_anchors(&ratios, &ANCHORS);
    verdict(ok, format!("ratios {ratios:.6?}"))
}

fn power_time_dof() -> Verdict {
    const ANCHORS: [f64; 4] = [0.770605079, 0.934773692, 1.01188492, 1.01943379];
    let snrs: Vec<f64> = [80.0, 120.0, 160.0, 200.0]
        .iter()
        .map(|&d| db_to_linear(d))
        .collect();
    let factors: Vec<f64> = dof_factor(&surd_example(), &snrs, PMaxRule::default())
        .unwrap()
        .iter()
        .map(|p| p.factor)
        .collect();
    let ok = factors.windows(2).all(|w| w[1] >= w[0])
        && (factors[3] - 1.125).abs() <= 0.2
        && matches_anchors(&factors, &ANCHORS);
    verdict(ok, format!("factors {factors:.6?}, target 1.125 +- 0.2"))
}

fn run_binary(args: &[String]) -> (bool, Vec<u8>) {
    let out = Command::new(env!("CARGO_BIN_EXE_lattice-align"))
        .args(args)
        .output()
        .expect("spawn binary");
    (out.status.success(), out.stdout)
}

fn determinism() -> Verdict {
    let dir = std::env::temp_dir().join(format!("lattice-align-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let runs: Vec<Vec<&str>> = vec![
        vec!["rate", "--gamma", "0.4", "--snr-db", "20"],
        vec!["sweep", "--gamma", "0.01:0.49:0.04", "--snr-db", "20,100"],
        vec!["mac-sim", "--gamma", "0.7071067811865476", "--snr-db", "0,5", "--p", "5", "--n", "16", "--trials", "300", "--seed", "9"],
        vec!["network", "--example-h", "707/1000", "--snr-db", "0:200:50"],
        vec!["network", "--example-h", "0.7071067811865476", "--mode", "sim", "--snr-db", "8", "--trials", "200", "--seed", "3"],
        vec!["power-time", "--example", "surd"],
        vec!["power-time", "--example", "surd", "--steps", "--snr-db", "120"],
        vec!["dof-scan", "--gamma", "0.7071067811865476"],
    ];
    let mut ok = true;
    let mut checked = 0;
    for args in &runs {
        let mut outputs = Vec::new();
        for threads in [None, Some("1"), Some("3")] {
            let mut argv: Vec<String> = Vec::new();
            if let Some(t) = threads {
                argv.extend(["--threads".to_string(), t.to_string()]);
            }
            argv.extend(args.iter().map(|s| s.to_string()));
            for _ in 0..2 {
                let (success, stdout) = run_binary(&argv);
                ok &= success && !stdout.is_empty();
                outputs.push(stdout);
            }
        }
        ok &= outputs.windows(2).all(|w| w[0] == w[1]);
        checked += 1;
    }
    let mut files = Vec::new();
    for (i, threads) in ["1", "3"].iter().enumerate() {
        let path = dir.join(format!("sweep{i}.csv"));
        let argv: Vec<String> = [
            "--threads", threads, "sweep", "--gamma", "0.1:0.4:0.1", "--snr-db", "30", "--out",
        ]
        .iter()
        .map(|s| s.to_string())
        .chain(std::iter::once(path.display().to_string()))
        .collect();
        let (success, _) = run_binary(&argv);
        ok &= success;
        files.push(std::fs::read(&path).unwrap_or_default());
    }
    // headers name their own output path, so compare the data only
    let data = |b: &[u8]| {
        String::from_utf8_lossy(b)
            .lines()
            .filter(|l| !l.starts_with('#'))
            .collect::<Vec<_>>()
            .join("\n")
    };
    ok &= !files[0].is_empty() && data(&files[0]) == data(&files[1]);
    let _ = std::fs::remove_dir_all(&dir);
    verdict(ok, format!("{checked} invocations x 3 thread settings x 2 runs, plus --out files"))
}

fn main() {
    let criteria: [(u32, &str, fn() -> Verdict); 10] = [
        (1, "delta enumeration equals continued-fraction oracle", delta_oracle),
        (2, "rational gains never reach log2 q", rational_saturation),
        (3, "normalized rate at most 1, dips near rationals", degradedness),
        (4, "dependent-message probability", dependent_probability),
        (5, "noiseless simulator floor at 11/27", noiseless_floor),
        (6, "error probability nonincreasing in n", error_trend),
        (7, "interference alignment is residue-exact", alignment_exactness),
        (8, "two-user DoF ratio trend", dof_trend),
        (9, "power-time DoF factor near 9/8", power_time_dof),
        (10, "CLI output deterministic", determinism),
    ];
    let mut failed = 0;
    for (n, name, check) in criteria {
        let start = Instant::now();
        let v = catch_unwind(AssertUnwindSafe(check))
            .unwrap_or_else(|_| verdict(false, "panicked"));
        failed += !v.pass as u32;
        println!(
            "[{}] criterion {n}: {name} ({}; {:.2?})",
            if v.pass { "PASS" } else { "FAIL" },
            v.detail,
            start.elapsed()
        );
    }
    println!("acceptance: {} of 10 criteria passed", 10 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
