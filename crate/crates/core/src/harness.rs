//! Experiment orchestration: reliability Monte Carlo, the random-wiretap
//! reduction check, consistent-set sizing, conflict counting, codebook
//! persistence, and CSV/JSONL reporting.
//!
//! Reproducibility contract: every experiment is a pure function of its
//! config. Per-trial RNGs are seeded by `derive_seed(master_seed, stream)`,
//! a splitmix64 mix, so trial sets are stable regardless of execution order.

use std::fmt::Write as _;
use std::fs;
use std::io::{BufRead, BufReader};
use std::path::Path;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::adversary::{choose_error, choose_support, Strategy, StrategyKind};
use crate::bounds::binary_entropy;
use crate::channel::{apply_error, bec_observe, bsc_transmit, observe};
use crate::code::{
    bin_codebook, codebook_size, consistent_subset, decode_nearest, encode_random,
    sample_codebook, BinnedCode, Codebook, Word,
};
use crate::error::{Error, Result};
use crate::secrecy::equivocation_for_mask;

/// splitmix64 finalizer.
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Documented per-stream seed split: `splitmix64(master XOR splitmix64(stream))`.
/// Stream 0 seeds the codebook; stream `t + 1` seeds trial `t`.
pub fn derive_seed(master_seed: u64, stream: u64) -> u64 {
    splitmix64(master_seed ^ splitmix64(stream))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentMode {
    Awtc,
    RandomWtc,
}

/// Parameters for one experiment run.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub n: usize,
    pub rho_r: f64,
    pub rho_w: f64,
    /// Rate slack: the codebook rate is `1 - h(rho_w) - epsilon`.
    pub epsilon: f64,
    pub ell: u32,
    pub trials: usize,
    pub master_seed: u64,
    pub strategy: Strategy,
    pub mode: ExperimentMode,
    /// Slack for the random-wiretap reduction: BSC(rho_w - xi) main channel,
    /// BEC(1 - rho_r + xi) eavesdropper.
    pub xi: f64,
    /// Report Clopper-Pearson intervals instead of the normal approximation.
    pub exact_ci: bool,
}

impl ExperimentConfig {
    pub fn new(n: usize, rho_r: f64, rho_w: f64, epsilon: f64, ell: u32) -> Self {
        Self {
            n,
            rho_r,
            rho_w,
            epsilon,
            ell,
            trials: 1000,
            master_seed: 0,
            strategy: Strategy::new(StrategyKind::WithinViewExhaustive),
            mode: ExperimentMode::Awtc,
            xi: 0.0,
            exact_ci: false,
        }
    }

    /// Nominal code rate `1 - h(rho_w) - epsilon`.
    pub fn rate(&self) -> Result<f64> {
        Ok(1.0 - binary_entropy(self.rho_w)? - self.epsilon)
    }

    /// Adversary read budget `floor(rho_r * n)`.
    pub fn read_budget(&self) -> usize {
        (self.rho_r * self.n as f64).floor() as usize
    }

    /// Adversary write budget `floor(rho_w * n)`.
    pub fn write_budget(&self) -> u32 {
        (self.rho_w * self.n as f64).floor() as u32
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.n > 64 {
            return Err(Error::Config(format!("n={} outside 1..=64", self.n)));
        }
        if !(0.0..1.0).contains(&self.rho_r) || !(0.0..0.5).contains(&self.rho_w) {
            return Err(Error::Config(
                "need 0 <= rho_r < 1 and 0 <= rho_w < 1/2".into(),
            ));
        }
        if self.trials == 0 {
            return Err(Error::Config("trials must be >= 1".into()));
        }
        let rate = self.rate()?;
        let words = codebook_size(rate, self.n).map_err(|e| Error::Config(e.to_string()))?;
        let rn_bits = words.trailing_zeros();
        if self.ell > rn_bits {
            return Err(Error::Config(format!(
                "ell={} exceeds the {rn_bits} codeword-index bits (R'n would be negative)",
                self.ell
            )));
        }
        if self.mode == ExperimentMode::RandomWtc {
            if self.xi < 0.0 || self.rho_w - self.xi < 0.0 || 1.0 - self.rho_r + self.xi > 1.0 {
                return Err(Error::Config(format!("xi={} out of range", self.xi)));
            }
        }
        Ok(())
    }

    /// Sample and bin the codebook of record for this config.
    pub fn build_code(&self) -> Result<BinnedCode> {
        self.validate()?;
        let words = codebook_size(self.rate()?, self.n)?;
        let cb = sample_codebook(self.n, words, derive_seed(self.master_seed, 0))?;
        bin_codebook(cb, self.ell)
    }
}

/// Log of one adversarial trial.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub message: usize,
    pub r: usize,
    pub support: Vec<usize>,
    pub error_weight: u32,
    pub decoded: usize,
    pub success: bool,
}

/// Monte Carlo reliability estimate.
#[derive(Debug, Clone)]
pub struct ReliabilityReport {
    pub trials: usize,
    pub failures: usize,
    pub error_rate: f64,
    /// 95% interval half-width (normal approximation).
    pub ci95: f64,
    /// 95% interval endpoints; Clopper-Pearson when `exact_ci` was set.
    pub ci_low: f64,
    pub ci_high: f64,
    pub records: Vec<TrialRecord>,
}

/// Normal-approximation 95% half-width.
pub fn normal_ci95(failures: usize, trials: usize) -> f64 {
    let p = failures as f64 / trials as f64;
    1.96 * (p * (1.0 - p) / trials as f64).sqrt()
}

/// Exact Clopper-Pearson 95% interval, by bisection on the binomial tails.
pub fn clopper_pearson95(failures: usize, trials: usize) -> (f64, f64) {
    let alpha = 0.05;
    let k = failures;
    let n = trials;
    // P(X <= k) under Binomial(n, p)
    let cdf = |p: f64, k: usize| -> f64 {
        if p <= 0.0 {
            return 1.0;
        }
        if p >= 1.0 {
            return if k >= n { 1.0 } else { 0.0 };
        }
        let mut pmf = (1.0 - p).powi(n as i32);
        let mut acc = pmf;
        for i in 1..=k {
            pmf *= (n - i + 1) as f64 / i as f64 * p / (1.0 - p);
            acc += pmf;
        }
        acc.min(1.0)
    };
    let bisect = |f: &dyn Fn(f64) -> f64| -> f64 {
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if f(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    };
    let low = if k == 0 {
        0.0
    } else {
        // largest p with P(X >= k) <= alpha/2
        bisect(&|p| alpha / 2.0 - (1.0 - cdf(p, k - 1)))
    };
    let high = if k == n {
        1.0
    } else {
        // smallest p with P(X <= k) <= alpha/2
        bisect(&|p| cdf(p, k) - alpha / 2.0)
    };
    (low, high)
}

fn finish_report(
    trials: usize,
    failures: usize,
    exact_ci: bool,
    records: Vec<TrialRecord>,
) -> ReliabilityReport {
    let error_rate = failures as f64 / trials as f64;
    let ci95 = normal_ci95(failures, trials);
    let (ci_low, ci_high) = if exact_ci {
        clopper_pearson95(failures, trials)
    } else {
        ((error_rate - ci95).max(0.0), (error_rate + ci95).min(1.0))
    };
    ReliabilityReport { trials, failures, error_rate, ci95, ci_low, ci_high, records }
}

/// Reliability Monte Carlo against the configured adversary: uniform
/// message, uniform encoder seed, adversary support + error, nearest
/// neighbor decode.
pub fn run_reliability(config: &ExperimentConfig) -> Result<ReliabilityReport> {
    run_reliability_on(config, &config.build_code()?)
}

/// Same, with a caller-supplied code (for matched-codebook comparisons).
pub fn run_reliability_on(
    config: &ExperimentConfig,
    bc: &BinnedCode,
) -> Result<ReliabilityReport> {
    config.validate()?;
    let read_budget = config.read_budget();
    let write_budget = config.write_budget();
    let mut failures = 0usize;
    let mut records = Vec::with_capacity(config.trials);
    for trial in 0..config.trials {
        let mut rng = ChaCha12Rng::seed_from_u64(derive_seed(config.master_seed, trial as u64 + 1));
        let message = rng.gen_range(0..bc.num_messages());
        let (x, r) = encode_random(bc, message, &mut rng)?;
        let support = choose_support(&config.strategy, bc.n(), read_budget, &mut rng)?;
        let view = observe(&x, &support)?;
        let e = choose_error(&config.strategy, bc, &view, write_budget, &mut rng)?;
        let y = apply_error(&x, &e, write_budget)?;
        let decoded = decode_nearest(bc, &y)?;
        let success = decoded == message;
        if !success {
            failures += 1;
        }
        records.push(TrialRecord {
            trial,
            message,
            r,
            support,
            error_weight: e.weight(),
            decoded,
            success,
        });
    }
    Ok(finish_report(config.trials, failures, config.exact_ci, records))
}

/// Random-wiretap arm of the reduction check.
#[derive(Debug, Clone)]
pub struct RandomWtcReport {
    pub reliability: ReliabilityReport,
    /// Monte Carlo average of `H(S|V(support))/n` over BEC-realized
    /// supports, weighted as drawn.
    pub eta_hat: f64,
}

/// Evaluate the same code over the `(rho_r - xi, rho_w - xi)` random wiretap
/// channel: BSC main channel for reliability, BEC eavesdropper for secrecy.
pub fn run_random_wtc(config: &ExperimentConfig) -> Result<RandomWtcReport> {
    run_random_wtc_on(config, &config.build_code()?)
}

pub fn run_random_wtc_on(config: &ExperimentConfig, bc: &BinnedCode) -> Result<RandomWtcReport> {
    config.validate()?;
    if config.mode != ExperimentMode::RandomWtc {
        return Err(Error::Config("run_random_wtc requires mode=random-wtc".into()));
    }
    let flip_prob = config.rho_w - config.xi;
    let erase_prob = 1.0 - config.rho_r + config.xi;
    let mut failures = 0usize;
    let mut records = Vec::with_capacity(config.trials);
    let mut eta_sum = 0.0f64;
    for trial in 0..config.trials {
        let mut rng = ChaCha12Rng::seed_from_u64(derive_seed(config.master_seed, trial as u64 + 1));
        let message = rng.gen_range(0..bc.num_messages());
        let (x, r) = encode_random(bc, message, &mut rng)?;
        let y = bsc_transmit(&x, flip_prob, &mut rng)?;
        let decoded = decode_nearest(bc, &y)?;
        let success = decoded == message;
        if !success {
            failures += 1;
        }
        let view = bec_observe(&x, erase_prob, &mut rng)?;
        eta_sum += equivocation_for_mask(bc, view.support_mask())? / bc.n() as f64;
        records.push(TrialRecord {
            trial,
            message,
            r,
            support: view.support(),
            error_weight: (x.bits() ^ y.bits()).count_ones(),
            decoded,
            success,
        });
    }
    Ok(RandomWtcReport {
        reliability: finish_report(config.trials, failures, config.exact_ci, records),
        eta_hat: eta_sum / config.trials as f64,
    })
}

/// Fraction of sampled views whose consistent-set size lands in the
/// concentration window `[2^{(R - rho_r - eps/2) n}, 2^{(R - rho_r + eps/2) n}]`,
/// with `R` the codebook's actual rate. Views pair a random support with the
/// symbols of a random codeword.
pub fn event_e0_check(
    cb: &Codebook,
    read_budget: usize,
    epsilon: f64,
    samples: usize,
    seed: u64,
) -> Result<f64> {
    if samples == 0 {
        return Err(Error::Config("samples must be >= 1".into()));
    }
    let n = cb.n();
    if read_budget > n {
        return Err(Error::Range(format!("read budget {read_budget} exceeds n={n}")));
    }
    let rho_r = read_budget as f64 / n as f64;
    let low = ((cb.rate() - rho_r - epsilon / 2.0) * n as f64).exp2();
    let high = ((cb.rate() - rho_r + epsilon / 2.0) * n as f64).exp2();
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut passes = 0usize;
    for _ in 0..samples {
        let support = crate::secrecy::random_support(n, read_budget, &mut rng);
        let x = cb.words()[rng.gen_range(0..cb.words().len())];
        let view = observe(&x, &support)?;
        let size = consistent_subset(cb.words(), &view)?.len() as f64;
        if size >= low && size <= high {
            passes += 1;
        }
    }
    Ok(passes as f64 / samples as f64)
}

/// Number of codewords `x` (by index) in `subset` such that `x + e`
/// conflicts with some other codebook entry: another index within Hamming
/// distance `write_budget` of `x + e`.
pub fn conflict_count(
    cb: &Codebook,
    subset: &[usize],
    e: &Word,
    write_budget: u32,
) -> Result<usize> {
    if e.weight() > write_budget {
        return Err(Error::Range(format!(
            "error weight {} exceeds budget {write_budget}",
            e.weight()
        )));
    }
    let words = cb.words();
    let mut count = 0usize;
    for &i in subset {
        if i >= words.len() {
            return Err(Error::Range(format!("subset index {i} out of range")));
        }
        let shifted = words[i].xor(e)?;
        let conflicted = words.iter().enumerate().any(|(j, w)| {
            j != i && (w.bits() ^ shifted.bits()).count_ones() <= write_budget
        });
        if conflicted {
            count += 1;
        }
    }
    Ok(count)
}

// --- codebook persistence -------------------------------------------------

const CODEBOOK_MAGIC: &str = "AWTC-CODEBOOK v1";

/// Serialize a binned code in the line-oriented hex format.
pub fn codebook_to_string(bc: &BinnedCode) -> String {
    let cb = bc.base();
    let mut out = String::new();
    let _ = writeln!(out, "{CODEBOOK_MAGIC}");
    let _ = writeln!(
        out,
        "n={} words={} ell={} seed={}",
        cb.n(),
        cb.words().len(),
        bc.ell(),
        cb.seed()
    );
    for w in cb.words() {
        let _ = writeln!(out, "{}", w.to_hex());
    }
    out
}

pub fn save_codebook(bc: &BinnedCode, path: &Path) -> Result<()> {
    fs::write(path, codebook_to_string(bc))?;
    Ok(())
}

/// Parse the hex format, rejecting header, count, and length mismatches
/// with the offending line number.
pub fn codebook_from_reader<R: BufRead>(reader: R) -> Result<BinnedCode> {
    let mut lines = reader.lines().enumerate();
    let (_, magic) = lines
        .next()
        .ok_or(Error::Format { line: 1, msg: "empty file".into() })
        .and_then(|(i, r)| r.map(|l| (i, l)).map_err(Error::Io))?;
    if magic != CODEBOOK_MAGIC {
        return Err(Error::Format {
            line: 1,
            msg: format!("bad magic {magic:?}, expected {CODEBOOK_MAGIC:?}"),
        });
    }
    let header = lines
        .next()
        .ok_or(Error::Format { line: 2, msg: "missing header".into() })
        .and_then(|(_, r)| r.map_err(Error::Io))?;
    let mut n = None;
    let mut words_expected = None;
    let mut ell = None;
    let mut seed = None;
    for field in header.split_whitespace() {
        let (key, value) = field.split_once('=').ok_or_else(|| Error::Format {
            line: 2,
            msg: format!("bad header field {field:?}"),
        })?;
        let parse_err = |e: std::num::ParseIntError| Error::Format {
            line: 2,
            msg: format!("bad {key} value: {e}"),
        };
        match key {
            "n" => n = Some(value.parse::<usize>().map_err(parse_err)?),
            "words" => words_expected = Some(value.parse::<usize>().map_err(parse_err)?),
            "ell" => ell = Some(value.parse::<u32>().map_err(parse_err)?),
            "seed" => seed = Some(value.parse::<u64>().map_err(parse_err)?),
            other => {
                return Err(Error::Format { line: 2, msg: format!("unknown header key {other:?}") })
            }
        }
    }
    let (Some(n), Some(words_expected), Some(ell), Some(seed)) = (n, words_expected, ell, seed)
    else {
        return Err(Error::Format { line: 2, msg: "header must set n, words, ell, seed".into() });
    };
    let mut words = Vec::with_capacity(words_expected);
    for (idx, line) in lines {
        let line = line.map_err(Error::Io)?;
        if line.is_empty() {
            continue;
        }
        let w = Word::from_hex(&line, n)
            .map_err(|e| Error::Format { line: idx + 1, msg: e.to_string() })?;
        words.push(w);
    }
    if words.len() != words_expected {
        return Err(Error::Format {
            line: words.len() + 2,
            msg: format!("expected {words_expected} words, found {}", words.len()),
        });
    }
    let rate = (words_expected as f64).log2() / n as f64;
    let cb = Codebook::from_words(n, words, rate, seed)
        .map_err(|e| Error::Format { line: 2, msg: e.to_string() })?;
    bin_codebook(cb, ell).map_err(|e| Error::Format { line: 2, msg: e.to_string() })
}

pub fn load_codebook(path: &Path) -> Result<BinnedCode> {
    let file = fs::File::open(path)?;
    codebook_from_reader(BufReader::new(file))
}

// --- report rendering -----------------------------------------------------

/// JSONL trial log, one record per line, in trial order.
pub fn records_to_jsonl(records: &[TrialRecord]) -> String {
    let mut out = String::new();
    for r in records {
        out.push_str(&serde_json::to_string(r).expect("plain struct serializes"));
        out.push('\n');
    }
    out
}

/// Summary CSV for a reliability run.
pub fn reliability_to_csv(config: &ExperimentConfig, report: &ReliabilityReport) -> String {
    let mut out = String::from(
        "n,rho_r,rho_w,epsilon,ell,adversary,trials,failures,error_rate,ci95,ci_low,ci_high,master_seed\n",
    );
    let _ = writeln!(
        out,
        "{},{:.9},{:.9},{:.9},{},{},{},{},{:.9},{:.9},{:.9},{:.9},{}",
        config.n,
        config.rho_r,
        config.rho_w,
        config.epsilon,
        config.ell,
        config.strategy.kind.name(),
        report.trials,
        report.failures,
        report.error_rate,
        report.ci95,
        report.ci_low,
        report.ci_high,
        config.master_seed,
    );
    out
}

/// Side-by-side CSV for the reduction check.
pub fn reduction_to_csv(
    config: &ExperimentConfig,
    awtc: &ReliabilityReport,
    awtc_eta: f64,
    random: &RandomWtcReport,
) -> String {
    let mut out =
        String::from("arm,trials,failures,error_rate,ci95,eta,n,rho_r,rho_w,xi,master_seed\n");
    let _ = writeln!(
        out,
        "awtc,{},{},{:.9},{:.9},{:.9},{},{:.9},{:.9},{:.9},{}",
        awtc.trials,
        awtc.failures,
        awtc.error_rate,
        awtc.ci95,
        awtc_eta,
        config.n,
        config.rho_r,
        config.rho_w,
        config.xi,
        config.master_seed,
    );
    let rel = &random.reliability;
    let _ = writeln!(
        out,
        "random-wtc,{},{},{:.9},{:.9},{:.9},{},{:.9},{:.9},{:.9},{}",
        rel.trials,
        rel.failures,
        rel.error_rate,
        rel.ci95,
        random.eta_hat,
        config.n,
        config.rho_r,
        config.rho_w,
        config.xi,
        config.master_seed,
    );
    out
}
