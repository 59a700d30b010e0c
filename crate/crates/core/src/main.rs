//! `awtc-lab`: capacity bounds, binned stochastic codes, adversarial
//! simulation, and secrecy metrics for the binary limited-view channel.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use awtc_lab::adversary::{Strategy, StrategyKind};
use awtc_lab::bounds::{bounds_grid, grid_to_csv};
use awtc_lab::code::{bin_codebook, codebook_size, sample_codebook, Word};
use awtc_lab::harness::{
    conflict_count, load_codebook, records_to_jsonl, reduction_to_csv, reliability_to_csv,
    run_random_wtc_on, run_reliability_on, save_codebook, ExperimentConfig, ExperimentMode,
};
use awtc_lab::secrecy::{min_equivocation, min_equivocation_sampled, report_to_csv, secrecy_report};
use awtc_lab::{Error, Result};

#[derive(Parser)]
#[command(name = "awtc-lab", version, about = "limited-view adversarial channel lab")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Tabulate capacity lower/upper bounds over a (rho_r, rho_w) grid.
    Bounds(BoundsArgs),
    /// Sample a binned stochastic codebook and write it to a file.
    Build(BuildArgs),
    /// Compute secrecy metrics for a saved codebook.
    Secrecy(SecrecyArgs),
    /// Monte Carlo decoding-error estimate against a chosen adversary.
    Reliability(ReliabilityArgs),
    /// Compare the adversarial run to the random-wiretap arm on one code.
    Reduce(ReduceArgs),
    /// Count conflicted codewords for a fixed error pattern.
    Conflicts(ConflictsArgs),
}

/// `key=value` lines; values here override the flags.
fn load_config(path: &PathBuf) -> Result<Vec<(String, String)>> {
    let text = fs::read_to_string(path)?;
    let mut pairs = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| Error::Config(format!(
            "config line {}: expected key=value, got {line:?}",
            i + 1
        )))?;
        pairs.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(pairs)
}

fn parse_as<T: std::str::FromStr>(key: &str, value: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    value
        .parse()
        .map_err(|e| Error::Config(format!("config key {key}: {e}")))
}

fn write_out(out: &Option<PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

#[derive(Args)]
struct BoundsArgs {
    /// Comma-separated rho_w values.
    #[arg(long, value_delimiter = ',', default_value = "0.05,0.1,0.2")]
    rho_w: Vec<f64>,
    /// Grid step over rho_r in (0, 1).
    #[arg(long, default_value_t = 0.01)]
    rho_r_step: f64,
    /// Output CSV path (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    /// key=value overrides for the flags above.
    #[arg(long)]
    config: Option<PathBuf>,
}

fn cmd_bounds(mut a: BoundsArgs) -> Result<()> {
    if let Some(path) = &a.config {
        for (k, v) in load_config(path)? {
            match k.as_str() {
                "rho_w" => {
                    a.rho_w = v
                        .split(',')
                        .map(|s| parse_as("rho_w", s.trim()))
                        .collect::<Result<_>>()?
                }
                "rho_r_step" => a.rho_r_step = parse_as(&k, &v)?,
                "out" => a.out = Some(PathBuf::from(v)),
                other => return Err(Error::Config(format!("unknown config key {other:?}"))),
            }
        }
    }
    let rows = bounds_grid(&a.rho_w, a.rho_r_step)?;
    write_out(&a.out, &grid_to_csv(&rows))
}

#[derive(Args)]
struct BuildArgs {
    /// Block length (1..=64).
    #[arg(long)]
    n: usize,
    /// Write fraction; the code rate is 1 - h(rho_w) - epsilon.
    #[arg(long)]
    rho_w: f64,
    /// Rate slack epsilon.
    #[arg(long)]
    epsilon: f64,
    /// Bin size exponent: bins hold 2^ell words.
    #[arg(long)]
    ell: u32,
    /// Codebook sampler seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Destination codebook file.
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    config: Option<PathBuf>,
}

fn cmd_build(mut a: BuildArgs) -> Result<()> {
    if let Some(path) = &a.config {
        for (k, v) in load_config(path)? {
            match k.as_str() {
                "n" => a.n = parse_as(&k, &v)?,
                "rho_w" => a.rho_w = parse_as(&k, &v)?,
                "epsilon" => a.epsilon = parse_as(&k, &v)?,
                "ell" => a.ell = parse_as(&k, &v)?,
                "seed" => a.seed = parse_as(&k, &v)?,
                "out" => a.out = PathBuf::from(v),
                other => return Err(Error::Config(format!("unknown config key {other:?}"))),
            }
        }
    }
    if !(0.0..0.5).contains(&a.rho_w) {
        return Err(Error::Config("need 0 <= rho_w < 1/2".into()));
    }
    let rate = 1.0 - awtc_lab::bounds::binary_entropy(a.rho_w)? - a.epsilon;
    let words = codebook_size(rate, a.n).map_err(|e| Error::Config(e.to_string()))?;
    let cb = sample_codebook(a.n, words, a.seed)?;
    let bc = bin_codebook(cb, a.ell).map_err(|e| Error::Config(e.to_string()))?;
    save_codebook(&bc, &a.out)?;
    eprintln!(
        "wrote {} words (n={}, ell={}, R'={:.6}) to {}",
        bc.base().words().len(),
        bc.n(),
        bc.ell(),
        bc.stochastic_rate(),
        a.out.display()
    );
    Ok(())
}

#[derive(Args)]
struct SecrecyArgs {
    /// Codebook file produced by `build`.
    #[arg(long)]
    codebook: PathBuf,
    /// Number of coordinates the adversary reads.
    #[arg(long)]
    read_budget: usize,
    /// exact | sampled
    #[arg(long, default_value = "exact")]
    mode: String,
    /// Support samples in sampled mode.
    #[arg(long, default_value_t = 200)]
    samples: usize,
    /// RNG seed for sampled mode.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    config: Option<PathBuf>,
}

fn cmd_secrecy(mut a: SecrecyArgs) -> Result<()> {
    if let Some(path) = &a.config {
        for (k, v) in load_config(path)? {
            match k.as_str() {
                "codebook" => a.codebook = PathBuf::from(v),
                "read_budget" => a.read_budget = parse_as(&k, &v)?,
                "mode" => a.mode = v,
                "samples" => a.samples = parse_as(&k, &v)?,
                "seed" => a.seed = parse_as(&k, &v)?,
                "out" => a.out = Some(PathBuf::from(v)),
                other => return Err(Error::Config(format!("unknown config key {other:?}"))),
            }
        }
    }
    let exact = match a.mode.as_str() {
        "exact" => true,
        "sampled" => false,
        other => return Err(Error::Config(format!("mode must be exact|sampled, got {other:?}"))),
    };
    let bc = load_codebook(&a.codebook)?;
    let mut rng = ChaCha12Rng::seed_from_u64(a.seed);
    let report = secrecy_report(&bc, a.read_budget, exact, a.samples, &mut rng)?;
    write_out(&a.out, &report_to_csv(&report))
}

#[derive(Args)]
struct ExperimentArgs {
    /// Block length; ignored when --codebook is given.
    #[arg(long, default_value_t = 12)]
    n: usize,
    /// Adversary read fraction.
    #[arg(long, default_value_t = 0.25)]
    rho_r: f64,
    /// Adversary write fraction.
    #[arg(long, default_value_t = 0.1)]
    rho_w: f64,
    /// Rate slack epsilon; ignored when --codebook is given.
    #[arg(long, default_value_t = 0.1)]
    epsilon: f64,
    /// Bin exponent; ignored when --codebook is given.
    #[arg(long, default_value_t = 1)]
    ell: u32,
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// random | greedy | exhaustive | omniscient
    #[arg(long, default_value = "exhaustive")]
    adversary: String,
    /// Candidate cap for the exhaustive strategy outside its envelope.
    #[arg(long)]
    max_enum: Option<usize>,
    /// Reuse a saved codebook instead of sampling one.
    #[arg(long)]
    codebook: Option<PathBuf>,
    /// Report exact Clopper-Pearson intervals.
    #[arg(long, default_value_t = false)]
    exact_ci: bool,
}

impl ExperimentArgs {
    fn apply(&mut self, k: &str, v: String) -> Result<bool> {
        match k {
            "n" => self.n = parse_as(k, &v)?,
            "rho_r" => self.rho_r = parse_as(k, &v)?,
            "rho_w" => self.rho_w = parse_as(k, &v)?,
            "epsilon" => self.epsilon = parse_as(k, &v)?,
            "ell" => self.ell = parse_as(k, &v)?,
            "trials" => self.trials = parse_as(k, &v)?,
            "seed" => self.seed = parse_as(k, &v)?,
            "adversary" => self.adversary = v,
            "max_enum" => self.max_enum = Some(parse_as(k, &v)?),
            "codebook" => self.codebook = Some(PathBuf::from(v)),
            "exact_ci" => self.exact_ci = parse_as(k, &v)?,
            _ => return Ok(false),
        }
        Ok(true)
    }

    fn to_config(&self, mode: ExperimentMode, xi: f64) -> Result<ExperimentConfig> {
        let mut strategy = Strategy::new(StrategyKind::parse(&self.adversary)?);
        strategy.max_enum = self.max_enum;
        let mut cfg = ExperimentConfig::new(self.n, self.rho_r, self.rho_w, self.epsilon, self.ell);
        cfg.trials = self.trials;
        cfg.master_seed = self.seed;
        cfg.strategy = strategy;
        cfg.mode = mode;
        cfg.xi = xi;
        cfg.exact_ci = self.exact_ci;
        Ok(cfg)
    }
}

#[derive(Args)]
struct ReliabilityArgs {
    #[command(flatten)]
    exp: ExperimentArgs,
    /// Summary CSV path (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Per-trial JSONL log path.
    #[arg(long)]
    jsonl: Option<PathBuf>,
    #[arg(long)]
    config: Option<PathBuf>,
}

fn cmd_reliability(mut a: ReliabilityArgs) -> Result<()> {
    if let Some(path) = &a.config {
        for (k, v) in load_config(path)? {
            if a.exp.apply(&k, v.clone())? {
                continue;
            }
            match k.as_str() {
                "out" => a.out = Some(PathBuf::from(v)),
                "jsonl" => a.jsonl = Some(PathBuf::from(v)),
                other => return Err(Error::Config(format!("unknown config key {other:?}"))),
            }
        }
    }
    let mut cfg = a.exp.to_config(ExperimentMode::Awtc, 0.0)?;
    let bc = match &a.exp.codebook {
        Some(path) => {
            let bc = load_codebook(path)?;
            cfg.n = bc.n();
            cfg.ell = bc.ell();
            cfg.epsilon = 1.0 - awtc_lab::bounds::binary_entropy(cfg.rho_w)? - bc.base().rate();
            bc
        }
        None => cfg.build_code()?,
    };
    let report = run_reliability_on(&cfg, &bc)?;
    if let Some(path) = &a.jsonl {
        fs::write(path, records_to_jsonl(&report.records))?;
    }
    write_out(&a.out, &reliability_to_csv(&cfg, &report))
}

#[derive(Args)]
struct ReduceArgs {
    #[command(flatten)]
    exp: ExperimentArgs,
    /// Reduction slack: BSC(rho_w - xi) main channel, BEC(1 - rho_r + xi)
    /// eavesdropper.
    #[arg(long, default_value_t = 0.0)]
    xi: f64,
    /// Support samples for the adversarial-arm equivocation when exact
    /// enumeration is too large.
    #[arg(long, default_value_t = 200)]
    samples: usize,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    config: Option<PathBuf>,
}

fn cmd_reduce(mut a: ReduceArgs) -> Result<()> {
    if let Some(path) = &a.config {
        for (k, v) in load_config(path)? {
            if a.exp.apply(&k, v.clone())? {
                continue;
            }
            match k.as_str() {
                "xi" => a.xi = parse_as(&k, &v)?,
                "samples" => a.samples = parse_as(&k, &v)?,
                "out" => a.out = Some(PathBuf::from(v)),
                other => return Err(Error::Config(format!("unknown config key {other:?}"))),
            }
        }
    }
    let awtc_cfg = a.exp.to_config(ExperimentMode::Awtc, 0.0)?;
    let mut wtc_cfg = a.exp.to_config(ExperimentMode::RandomWtc, a.xi)?;
    wtc_cfg.master_seed = awtc_cfg.master_seed.wrapping_add(1);
    let bc = match &a.exp.codebook {
        Some(path) => load_codebook(path)?,
        None => awtc_cfg.build_code()?,
    };
    let awtc = run_reliability_on(&awtc_cfg, &bc)?;
    // worst-case equivocation for the adversarial arm, sampled past the cap
    let read_budget = awtc_cfg.read_budget();
    let awtc_eta = match min_equivocation(&bc, read_budget) {
        Ok((delta, _)) => delta / bc.n() as f64,
        Err(Error::Resource(_)) => {
            let mut rng = ChaCha12Rng::seed_from_u64(awtc_cfg.master_seed.wrapping_add(2));
            min_equivocation_sampled(&bc, read_budget, a.samples, &mut rng)?.0 / bc.n() as f64
        }
        Err(e) => return Err(e),
    };
    let random = run_random_wtc_on(&wtc_cfg, &bc)?;
    write_out(&a.out, &reduction_to_csv(&wtc_cfg, &awtc, awtc_eta, &random))
}

#[derive(Args)]
struct ConflictsArgs {
    #[arg(long)]
    codebook: PathBuf,
    /// Error pattern as hex (same digit convention as codebook files).
    #[arg(long)]
    error: String,
    /// Write budget floor(rho_w * n); errors above it are rejected.
    #[arg(long)]
    write_budget: u32,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    config: Option<PathBuf>,
}

fn cmd_conflicts(mut a: ConflictsArgs) -> Result<()> {
    if let Some(path) = &a.config {
        for (k, v) in load_config(path)? {
            match k.as_str() {
                "codebook" => a.codebook = PathBuf::from(v),
                "error" => a.error = v,
                "write_budget" => a.write_budget = parse_as(&k, &v)?,
                "out" => a.out = Some(PathBuf::from(v)),
                other => return Err(Error::Config(format!("unknown config key {other:?}"))),
            }
        }
    }
    let bc = load_codebook(&a.codebook)?;
    let e = Word::from_hex(&a.error, bc.n()).map_err(|err| Error::Config(err.to_string()))?;
    let all: Vec<usize> = (0..bc.base().words().len()).collect();
    let count = conflict_count(bc.base(), &all, &e, a.write_budget)?;
    let text = format!(
        "error,weight,subset_size,conflicts\n{},{},{},{}\n",
        e.to_hex(),
        e.weight(),
        all.len(),
        count
    );
    write_out(&a.out, &text)
}

fn run() -> Result<()> {
    match Cli::parse().command {
        Command::Bounds(a) => cmd_bounds(a),
        Command::Build(a) => cmd_build(a),
        Command::Secrecy(a) => cmd_secrecy(a),
        Command::Reliability(a) => cmd_reliability(a),
        Command::Reduce(a) => cmd_reduce(a),
        Command::Conflicts(a) => cmd_conflicts(a),
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
