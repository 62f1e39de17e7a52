//! Command-line front end for `lattice-align`.
//!
//! Every subcommand writes CSV: a `#` comment line holding the full resolved
//! invocation (paste it back after the program name to rerun), a column
//! header, then data rows. Numbers carry 9 significant digits.
//!
//! Exit statuses: 0 success, 2 usage error, 3 input or output file error,
//! 4 precondition violation.

mod format;
mod grid;

use std::ffi::OsString;
use std::fmt::Display;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use lattice_align::code::{LinearCode, DEFAULT_ENUM_CAP};
use lattice_align::diophantine::Gain;
use lattice_align::mac::{estimate_error_prob, wilson_interval, MacConfig};
use lattice_align::network::{simulate_network, sum_rate_curves, ChannelMatrix};
use lattice_align::power_time::{
    build_schedule, dof_factor, parse_gains3, step_rates, surd_example, Gains3, INTEGER_EXAMPLE,
};
use lattice_align::rates::{
    dof_ratio_scan, random_sym_capacity, sweep_normalized, theorem1_rate, PMaxRule, DEFAULT_P_CAP,
};
use lattice_align::{db_to_linear, par};

pub use format::fmt_g;
use format::Csv;

const PROGRAM: &str = "lattice-align";

/// A failure with its exit status.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Precondition(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Input(_) => 3,
            CliError::Precondition(_) => 4,
        }
    }
}

impl From<lattice_align::Error> for CliError {
    fn from(e: lattice_align::Error) -> Self {
        CliError::Precondition(e.to_string())
    }
}

#[derive(Parser, Debug)]
#[command(
    name = PROGRAM,
    version,
    about = "Achievable rates and simulations for lattice interference alignment"
)]
struct Cli {
    /// Worker threads; 0 uses every core. Output does not depend on it.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Two-user same-code rate at one gain and SNR
    Rate(RateArgs),
    /// Normalized rate over a grid of gains and SNRs
    Sweep(SweepArgs),
    /// Monte Carlo error probability of the two-user joint decoder
    MacSim(MacSimArgs),
    /// Integer-interference channel: sum-rate curves or simulation
    Network(NetworkArgs),
    /// Three-user power-time code rates and DoF factor
    PowerTime(PowerTimeArgs),
    /// Rate relative to a quarter log SNR over an SNR grid
    DofScan(DofScanArgs),
}

#[derive(Args, Debug, Clone)]
struct PrimeArgs {
    /// Largest prime searched, or "auto" for max(101, ceil(sqrt(SNR)))
    #[arg(long, default_value = "auto")]
    p_max: String,

    /// Cap on the automatic prime bound
    #[arg(long, default_value_t = DEFAULT_P_CAP)]
    p_cap: u64,
}

impl PrimeArgs {
    fn rule(&self) -> Result<PMaxRule, CliError> {
        if self.p_cap < 2 {
            return Err(CliError::Usage("--p-cap must be at least 2".into()));
        }
        if self.p_max == "auto" {
            return Ok(PMaxRule::Default { cap: self.p_cap });
        }
        match self.p_max.parse::<u64>() {
            Ok(p) if p >= 2 => Ok(PMaxRule::Fixed(p)),
            _ => Err(CliError::Usage(format!(
                "--p-max must be 'auto' or an integer >= 2, got '{}'",
                self.p_max
            ))),
        }
    }

    fn echo(&self, e: &mut Echo) {
        e.push("p-max", &self.p_max);
        e.push("p-cap", self.p_cap);
    }
}

#[derive(Args, Debug, Clone)]
struct SimArgs {
    /// Field size of the code (prime)
    #[arg(long, default_value_t = 3)]
    p: u32,

    /// Block length
    #[arg(long, default_value_t = 8)]
    n: usize,

    /// Message length
    #[arg(long, default_value_t = 2)]
    k: usize,

    /// Monte Carlo trials per SNR point
    #[arg(long, default_value_t = 1000)]
    trials: u64,

    /// Seed of the message and noise streams
    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Seed of the generator matrix; defaults to --seed
    #[arg(long)]
    code_seed: Option<u64>,
}

impl SimArgs {
    fn code_seed(&self) -> u64 {
        self.code_seed.unwrap_or(self.seed)
    }

    fn code(&self, min_k: usize) -> Result<LinearCode, CliError> {
        if self.trials == 0 {
            return Err(CliError::Usage("--trials must be at least 1".into()));
        }
        let code = LinearCode::sample(self.p, self.n, self.k, self.code_seed())?;
        code.ensure_enumerable(DEFAULT_ENUM_CAP)?;
        if self.k < min_k {
            return Err(CliError::Precondition(format!(
                "--k must be at least {min_k} for this decoder"
            )));
        }
        Ok(code)
    }

    fn echo(&self, e: &mut Echo) {
        e.push("p", self.p);
        e.push("n", self.n);
        e.push("k", self.k);
        e.push("trials", self.trials);
        e.push("seed", self.seed);
        e.push("code-seed", self.code_seed());
    }
}

#[derive(Args, Debug)]
struct RateArgs {
    /// Cross gain, decimal or r/q
    #[arg(long, allow_hyphen_values = true)]
    gamma: String,

    /// SNR in dB
    #[arg(long, allow_hyphen_values = true)]
    snr_db: f64,

    #[command(flatten)]
    primes: PrimeArgs,
}

#[derive(Args, Debug)]
struct SweepArgs {
    /// Gains: comma list of decimals, r/q and start:stop:step ranges
    #[arg(long, allow_hyphen_values = true)]
    gamma: String,

    /// SNRs in dB: comma list and ranges
    #[arg(long, allow_hyphen_values = true)]
    snr_db: String,

    #[command(flatten)]
    primes: PrimeArgs,

    /// Output file; standard output when absent
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct MacSimArgs {
    /// Cross gain, decimal or r/q
    #[arg(long, allow_hyphen_values = true)]
    gamma: String,

    /// SNRs in dB: comma list and ranges
    #[arg(long, allow_hyphen_values = true)]
    snr_db: String,

    #[command(flatten)]
    sim: SimArgs,

    /// Output file; standard output when absent
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum NetworkMode {
    /// Alignment, time-sharing and benchmark sum rates
    Curves,
    /// Per-receiver Monte Carlo error rates
    Sim,
}

#[derive(Args, Debug)]
struct NetworkArgs {
    /// Channel file: K, then K rows; integer off-diagonal entries
    #[arg(long, conflicts_with = "example_h")]
    channel: Option<PathBuf>,

    /// Use the built-in 5-user channel with this direct gain
    #[arg(long, allow_hyphen_values = true)]
    example_h: Option<String>,

    #[arg(long, value_enum, default_value_t = NetworkMode::Curves)]
    mode: NetworkMode,

    /// SNRs in dB: comma list and ranges
    #[arg(long, allow_hyphen_values = true, default_value = "0:200:10")]
    snr_db: String,

    #[command(flatten)]
    primes: PrimeArgs,

    #[command(flatten)]
    sim: SimArgs,

    /// Output file; standard output when absent
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum MatrixExample {
    /// Square roots of the first nine non-squares
    Surd,
    /// [[1,1,2],[3,1,1],[1,2,1]]
    Integer,
}

impl MatrixExample {
    fn gains(self) -> Gains3 {
        match self {
            MatrixExample::Surd => surd_example(),
            MatrixExample::Integer => INTEGER_EXAMPLE,
        }
    }

    fn name(self) -> &'static str {
        match self {
            MatrixExample::Surd => "surd",
            MatrixExample::Integer => "integer",
        }
    }
}

#[derive(Args, Debug)]
struct PowerTimeArgs {
    /// Channel file with K = 3 and real entries
    #[arg(long, conflicts_with = "example")]
    channel: Option<PathBuf>,

    /// Use a built-in channel
    #[arg(long, value_enum)]
    example: Option<MatrixExample>,

    /// SNRs in dB, ascending
    #[arg(long, allow_hyphen_values = true, default_value = "80:200:40")]
    snr_db: String,

    /// Report every decode step instead of the schedule totals
    #[arg(long)]
    steps: bool,

    #[command(flatten)]
    primes: PrimeArgs,

    /// Output file; standard output when absent
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct DofScanArgs {
    /// Cross gain, decimal or r/q
    #[arg(long, allow_hyphen_values = true)]
    gamma: String,

    /// SNRs in dB: comma list and ranges
    #[arg(long, allow_hyphen_values = true, default_value = "40:200:40")]
    snr_db: String,

    #[command(flatten)]
    primes: PrimeArgs,

    /// Output file; standard output when absent
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Resolved flags, rendered as `--name=value`.
struct Echo {
    parts: Vec<String>,
}

impl Echo {
    fn new(sub: &str) -> Self {
        Self {
            parts: vec![PROGRAM.into(), sub.into()],
        }
    }

    fn push(&mut self, name: &str, value: impl Display) {
        self.parts.push(format!("--{name}={value}"));
    }

    fn flag(&mut self, name: &str, on: bool) {
        if on {
            self.parts.push(format!("--{name}"));
        }
    }

    fn path(&mut self, name: &str, p: &Option<PathBuf>) {
        if let Some(p) = p {
            self.push(name, p.display());
        }
    }

    fn line(&self) -> String {
        self.parts.join(" ")
    }
}

struct Output {
    text: String,
    path: Option<PathBuf>,
}

fn gain(text: &str) -> Result<Gain, CliError> {
    text.parse::<Gain>()
        .map_err(|e| CliError::Usage(format!("--gamma: {e}")))
}

fn gains(text: &str) -> Result<Vec<Gain>, CliError> {
    grid::parse_gains(text).map_err(|e| CliError::Usage(format!("--gamma: {e}")))
}

fn snr_list(text: &str) -> Result<Vec<f64>, CliError> {
    grid::parse_reals(text).map_err(|e| CliError::Usage(format!("--snr-db: {e}")))
}

fn finite_db(db: f64) -> Result<f64, CliError> {
    if !db.is_finite() {
        return Err(CliError::Usage(format!("--snr-db: '{db}' is not finite")));
    }
    Ok(db)
}

fn read_file(path: &PathBuf) -> Result<String, CliError> {
    std::fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))
}

fn opt(p: Option<u64>) -> String {
    p.map(|p| p.to_string()).unwrap_or_default()
}

fn rate(a: &RateArgs) -> Result<Output, CliError> {
    let g = gain(&a.gamma)?;
    let db = finite_db(a.snr_db)?;
    let rule = a.primes.rule()?;
    let mut e = Echo::new("rate");
    e.push("gamma", &a.gamma);
    e.push("snr-db", db);
    a.primes.echo(&mut e);

    let snr = db_to_linear(db);
    let pt = theorem1_rate(g, snr, rule.resolve(snr));
    let cap = random_sym_capacity(g, snr);
    let r_norm = if cap > 0.0 { pt.rate / cap } else { 0.0 };
    let mut csv = Csv::new(&e.line(), &["gamma", "snr_db", "p_star", "rate_lin", "rate_rand", "r_norm"]);
    csv.row(&[
        fmt_g(g.value()),
        fmt_g(db),
        opt(pt.p_star),
        fmt_g(pt.rate),
        fmt_g(cap),
        fmt_g(r_norm),
    ]);
    Ok(Output {
        text: csv.into_string(),
        path: None,
    })
}

fn sweep(a: &SweepArgs) -> Result<Output, CliError> {
    let gs = gains(&a.gamma)?;
    let dbs = snr_list(&a.snr_db)?;
    let rule = a.primes.rule()?;
    let mut e = Echo::new("sweep");
    e.push("gamma", &a.gamma);
    e.push("snr-db", &a.snr_db);
    a.primes.echo(&mut e);
    e.path("out", &a.out);

    let snrs: Vec<f64> = dbs.iter().map(|&d| db_to_linear(d)).collect();
    let pts = sweep_normalized(&gs, &snrs, rule);
    let mut csv = Csv::new(
        &e.line(),
        &["gamma", "snr_db", "p_max", "p_star", "rate_lin", "rate_rand", "r_norm"],
    );
    for (i, pt) in pts.iter().enumerate() {
        csv.row(&[
            fmt_g(pt.gamma.value()),
            fmt_g(dbs[i / gs.len()]),
            pt.p_max.to_string(),
            opt(pt.point.p_star),
            fmt_g(pt.point.rate),
            fmt_g(pt.rate_rand),
            fmt_g(pt.r_norm),
        ]);
    }
    Ok(Output {
        text: csv.into_string(),
        path: a.out.clone(),
    })
}

fn mac_sim(a: &MacSimArgs) -> Result<Output, CliError> {
    let g = gain(&a.gamma)?;
    let dbs = snr_list(&a.snr_db)?;
    let code = a.sim.code(2)?;
    let mut e = Echo::new("mac-sim");
    e.push("gamma", &a.gamma);
    e.push("snr-db", &a.snr_db);
    a.sim.echo(&mut e);
    e.path("out", &a.out);

    let mut csv = Csv::new(
        &e.line(),
        &["gamma", "snr_db", "p", "n", "k", "trials", "errors", "p_e", "ci_lo", "ci_hi"],
    );
    for &db in &dbs {
        let cfg = MacConfig {
            gamma: g,
            snr: db_to_linear(db),
            trials: a.sim.trials,
            seed: a.sim.seed,
        };
        let r = estimate_error_prob(&code, &cfg)?;
        csv.row(&[
            fmt_g(g.value()),
            fmt_g(db),
            a.sim.p.to_string(),
            a.sim.n.to_string(),
            a.sim.k.to_string(),
            r.trials.to_string(),
            r.errors.to_string(),
            fmt_g(r.p_e),
            fmt_g(r.ci95.0),
            fmt_g(r.ci95.1),
        ]);
    }
    Ok(Output {
        text: csv.into_string(),
        path: a.out.clone(),
    })
}

fn network(a: &NetworkArgs) -> Result<Output, CliError> {
    let h = match (&a.channel, &a.example_h) {
        (Some(path), _) => ChannelMatrix::parse(&read_file(path)?)
            .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?,
        (None, Some(text)) => ChannelMatrix::five_user_example(
            text.parse::<Gain>()
                .map_err(|e| CliError::Usage(format!("--example-h: {e}")))?,
        ),
        (None, None) => {
            return Err(CliError::Usage("one of --channel or --example-h is required".into()))
        }
    };
    let dbs = snr_list(&a.snr_db)?;
    let rule = a.primes.rule()?;
    let code = match a.mode {
        NetworkMode::Sim => Some(a.sim.code(1)?),
        NetworkMode::Curves => None,
    };
    let mut e = Echo::new("network");
    e.path("channel", &a.channel);
    if let Some(h) = &a.example_h {
        e.push("example-h", h);
    }
    e.push("mode", if code.is_some() { "sim" } else { "curves" });
    e.push("snr-db", &a.snr_db);
    match code {
        None => a.primes.echo(&mut e),
        Some(_) => a.sim.echo(&mut e),
    }
    e.path("out", &a.out);

    let text = match code {
        None => {
            let mut csv = Csv::new(
                &e.line(),
                &["snr_db", "p_max", "alignment_sum_rate", "time_sharing_sum_rate", "benchmark_sum_rate"],
            );
            for r in sum_rate_curves(&h, &dbs, rule) {
                csv.row(&[
                    fmt_g(r.snr_db),
                    r.p_max.to_string(),
                    fmt_g(r.alignment),
                    fmt_g(r.time_sharing),
                    fmt_g(r.benchmark),
                ]);
            }
            csv.into_string()
        }
        Some(code) => {
            let mut csv = Csv::new(
                &e.line(),
                &["snr_db", "receiver", "trials", "errors", "p_e", "ci_lo", "ci_hi"],
            );
            for &db in &dbs {
                let r = simulate_network(&h, &code, db_to_linear(db), a.sim.trials, a.sim.seed)?;
                let rows = r
                    .receiver_errors
                    .iter()
                    .enumerate()
                    .map(|(j, &err)| ((j + 1).to_string(), err))
                    .chain(std::iter::once(("all".to_string(), r.network_errors)));
                for (label, err) in rows {
                    let (lo, hi) = wilson_interval(err, r.trials);
                    csv.row(&[
                        fmt_g(db),
                        label,
                        r.trials.to_string(),
                        err.to_string(),
                        fmt_g(err as f64 / r.trials as f64),
                        fmt_g(lo),
                        fmt_g(hi),
                    ]);
                }
            }
            csv.into_string()
        }
    };
    Ok(Output {
        text,
        path: a.out.clone(),
    })
}

fn power_time(a: &PowerTimeArgs) -> Result<Output, CliError> {
    let h = match (&a.channel, a.example) {
        (Some(path), _) => parse_gains3(&read_file(path)?)
            .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?,
        (None, Some(ex)) => ex.gains(),
        (None, None) => {
            return Err(CliError::Usage("one of --channel or --example is required".into()))
        }
    };
    let dbs = snr_list(&a.snr_db)?;
    let rule = a.primes.rule()?;
    let schedule = build_schedule(&h)?;
    if dbs.windows(2).any(|w| w[0] >= w[1]) {
        return Err(CliError::Precondition("--snr-db must be strictly ascending".into()));
    }
    let mut e = Echo::new("power-time");
    e.path("channel", &a.channel);
    if let Some(ex) = a.example {
        e.push("example", ex.name());
    }
    e.push("snr-db", &a.snr_db);
    e.flag("steps", a.steps);
    a.primes.echo(&mut e);
    e.path("out", &a.out);

    let snrs: Vec<f64> = dbs.iter().map(|&d| db_to_linear(d)).collect();
    let text = if a.steps {
        let mut csv = Csv::new(
            &e.line(),
            &[
                "snr_db", "receiver", "frame", "kind", "gain_a", "gain_b", "gamma_eff", "snr_eff_db",
                "p_star", "rate_lin",
            ],
        );
        let rows = par::map_indexed(snrs.len(), |i| {
            step_rates(&schedule, [snrs[i]; 3], rule.resolve(snrs[i]))
        });
        for ((db, snr), rates) in dbs.iter().zip(&snrs).zip(rows) {
            for (st, r) in schedule.steps.iter().zip(rates) {
                csv.row(&[
                    fmt_g(*db),
                    (st.receiver + 1).to_string(),
                    st.frame.to_string(),
                    st.kind.to_string(),
                    fmt_g(st.gains.0),
                    fmt_g(st.gains.1),
                    fmt_g(st.gamma_eff()),
                    fmt_g(10.0 * (snr * st.snr_factor()).log10()),
                    opt(r.p_star),
                    fmt_g(r.rate),
                ]);
            }
        }
        csv.into_string()
    } else {
        let mut csv = Csv::new(
            &e.line(),
            &["snr_db", "p_max", "rate_sym", "sum_rate", "dof_factor"],
        );
        for (db, pt) in dbs.iter().zip(dof_factor(&h, &snrs, rule)?) {
            csv.row(&[
                fmt_g(*db),
                pt.p_max.to_string(),
                fmt_g(pt.rate),
                fmt_g(3.0 * pt.rate),
                fmt_g(pt.factor),
            ]);
        }
        csv.into_string()
    };
    Ok(Output {
        text,
        path: a.out.clone(),
    })
}

fn dof_scan(a: &DofScanArgs) -> Result<Output, CliError> {
    let g = gain(&a.gamma)?;
    let dbs = snr_list(&a.snr_db)?;
    let rule = a.primes.rule()?;
    let mut e = Echo::new("dof-scan");
    e.push("gamma", &a.gamma);
    e.push("snr-db", &a.snr_db);
    a.primes.echo(&mut e);
    e.path("out", &a.out);

    let snrs: Vec<f64> = dbs.iter().map(|&d| db_to_linear(d)).collect();
    let mut csv = Csv::new(&e.line(), &["snr_db", "p_max", "p_star", "rate_lin", "ratio"]);
    for (db, pt) in dbs.iter().zip(dof_ratio_scan(g, &snrs, rule)) {
        csv.row(&[
            fmt_g(*db),
            pt.p_max.to_string(),
            opt(pt.point.p_star),
            fmt_g(pt.point.rate),
            fmt_g(pt.ratio),
        ]);
    }
    Ok(Output {
        text: csv.into_string(),
        path: a.out.clone(),
    })
}

fn execute(cmd: &Command) -> Result<Output, CliError> {
    match cmd {
        Command::Rate(a) => rate(a),
        Command::Sweep(a) => sweep(a),
        Command::MacSim(a) => mac_sim(a),
        Command::Network(a) => network(a),
        Command::PowerTime(a) => power_time(a),
        Command::DofScan(a) => dof_scan(a),
    }
}

/// Runs the program on `args` (program name first) and returns the exit
/// status. CSV goes to `out` unless `--out` names a file; diagnostics go to
/// `err` as a single line.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(out, "{e}");
                return 0;
            }
            let msg = e.to_string();
            let first = msg.lines().next().unwrap_or("usage error");
            let _ = writeln!(err, "{first}");
            return 2;
        }
    };
    let result = par::with_threads(cli.threads, || execute(&cli.command));
    let written = result.and_then(|o| match o.path {
        Some(path) => std::fs::write(&path, o.text)
            .map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display()))),
        None => out
            .write_all(o.text.as_bytes())
            .map_err(|e| CliError::Input(format!("cannot write output: {e}"))),
    });
    match written {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}
