//! Exact desk-scale secrecy metrics.
//!
//! Everything here enumerates the code directly: conditional entropy of the
//! message given a view, the minimum over read supports (equivocation), the
//! per-bin consistency count and its counting bound, the soft-covering
//! divergence of a bin from uniform, and the semantic-secrecy surrogate.
//! Entropies and divergences are in bits. Duplicate codewords carry
//! multiplicity weight throughout, matching the i.i.d. sampling semantics.

use std::collections::HashMap;

use itertools::Itertools;
use rand::Rng;

use crate::channel::{support_mask, View};
use crate::code::{BinnedCode, Word};
use crate::error::{Error, Result};

/// Exact-mode caps.
const EXACT_WORD_CAP: usize = 1 << 16;
const EXACT_SUPPORT_CAP: usize = 16;
const DIVERGENCE_SUPPORT_CAP: usize = 20;
/// Largest number of supports the exhaustive minimum will enumerate.
const SUPPORT_ENUM_CAP: u64 = 2_000_000;

fn check_exact_caps(bc: &BinnedCode, support_size: usize) -> Result<()> {
    if bc.base().words().len() > EXACT_WORD_CAP {
        return Err(Error::Resource(format!(
            "exact secrecy mode caps the codebook at {EXACT_WORD_CAP} words"
        )));
    }
    if support_size > EXACT_SUPPORT_CAP {
        return Err(Error::Resource(format!(
            "exact secrecy mode caps the support at {EXACT_SUPPORT_CAP} coordinates"
        )));
    }
    Ok(())
}

/// Exact conditional entropy `H(S | V(support))` in bits, under a uniform
/// message and uniform seed (i.e. uniform over codeword indices).
pub fn equivocation_for_support(bc: &BinnedCode, support: &[usize]) -> Result<f64> {
    let mask = support_mask(bc.n(), support)?;
    equivocation_for_mask(bc, mask)
}

/// Same as [`equivocation_for_support`] on a precomputed bitmask.
pub fn equivocation_for_mask(bc: &BinnedCode, mask: u64) -> Result<f64> {
    check_exact_caps(bc, mask.count_ones() as usize)?;
    // group indices by the view value; within a group, count per message
    let mut groups: HashMap<u64, HashMap<usize, u64>> = HashMap::new();
    for (i, w) in bc.base().words().iter().enumerate() {
        *groups
            .entry(w.bits() & mask)
            .or_default()
            .entry(bc.bin_of(i))
            .or_insert(0) += 1;
    }
    let total = bc.base().words().len() as f64;
    let mut h = 0.0;
    for msg_counts in groups.values() {
        let group_total: u64 = msg_counts.values().sum();
        let gt = group_total as f64;
        let mut h_cond = 0.0;
        for &c in msg_counts.values() {
            let p = c as f64 / gt;
            h_cond -= p * p.log2();
        }
        h += (gt / total) * h_cond;
    }
    Ok(h)
}

/// Exact minimum of the equivocation over all supports of the given size.
/// Ties resolve to the lexicographically smallest support.
pub fn min_equivocation(bc: &BinnedCode, read_budget: usize) -> Result<(f64, Vec<usize>)> {
    let n = bc.n();
    if read_budget > n {
        return Err(Error::Range(format!("read budget {read_budget} exceeds n={n}")));
    }
    if binomial(n, read_budget) > SUPPORT_ENUM_CAP {
        return Err(Error::Resource(format!(
            "C({n},{read_budget}) supports exceed the enumeration cap; use the sampled mode"
        )));
    }
    check_exact_caps(bc, read_budget)?;
    let mut best: Option<(f64, Vec<usize>)> = None;
    for support in (0..n).combinations(read_budget) {
        let h = equivocation_for_support(bc, &support)?;
        // strict improvement only: combinations() yields lexicographic order
        if best.as_ref().map_or(true, |(bh, _)| h < *bh) {
            best = Some((h, support));
        }
    }
    Ok(best.expect("at least the empty support exists"))
}

/// Sampling fallback: the minimum over `samples` random supports, which only
/// upper-bounds the true equivocation minimum. Flagged by the caller.
pub fn min_equivocation_sampled<R: Rng>(
    bc: &BinnedCode,
    read_budget: usize,
    samples: usize,
    rng: &mut R,
) -> Result<(f64, Vec<usize>)> {
    let n = bc.n();
    if read_budget > n {
        return Err(Error::Range(format!("read budget {read_budget} exceeds n={n}")));
    }
    let mut best: Option<(f64, Vec<usize>)> = None;
    for _ in 0..samples.max(1) {
        let support = random_support(n, read_budget, rng);
        let h = equivocation_for_support(bc, &support)?;
        if best.as_ref().map_or(true, |(bh, _)| h < *bh) {
            best = Some((h, support));
        }
    }
    Ok(best.unwrap())
}

/// Uniform random support of size `k`, sorted.
pub fn random_support<R: Rng>(n: usize, k: usize, rng: &mut R) -> Vec<usize> {
    let mut coords: Vec<usize> = (0..n).collect();
    for i in 0..k {
        let j = rng.gen_range(i..n);
        coords.swap(i, j);
    }
    let mut s = coords[..k].to_vec();
    s.sort_unstable();
    s
}

/// Worst-case consistency count: the maximum, over bins and views, of the
/// number of bin members consistent with the view.
#[derive(Debug, Clone)]
pub struct ConsistencyMax {
    pub l_max: u64,
    pub worst_view: View,
    pub worst_bin: usize,
}

/// Exhaustively find the worst (bin, view) consistency count at the given
/// support size. Only views realized by at least one bin member can attain
/// the maximum (unrealized symbol patterns count zero), with the one
/// exception of the empty support, whose single view captures whole bins.
pub fn consistency_max(bc: &BinnedCode, read_budget: usize) -> Result<ConsistencyMax> {
    let n = bc.n();
    if read_budget > n {
        return Err(Error::Range(format!("read budget {read_budget} exceeds n={n}")));
    }
    if binomial(n, read_budget) > SUPPORT_ENUM_CAP {
        return Err(Error::Resource("support enumeration cap exceeded".into()));
    }
    check_exact_caps(bc, read_budget)?;
    let mut best: Option<ConsistencyMax> = None;
    for support in (0..n).combinations(read_budget) {
        let mask = support_mask(n, &support)?;
        for m in 0..bc.num_messages() {
            let mut counts: HashMap<u64, u64> = HashMap::new();
            for w in bc.bin(m) {
                *counts.entry(w.bits() & mask).or_insert(0) += 1;
            }
            // deterministic scan order for tie-breaking
            let mut entries: Vec<(u64, u64)> = counts.into_iter().collect();
            entries.sort_unstable();
            for (symbols, count) in entries {
                if best.as_ref().map_or(true, |b| count > b.l_max) {
                    best = Some(ConsistencyMax {
                        l_max: count,
                        worst_view: View::new(n, mask, symbols)?,
                        worst_bin: m,
                    });
                }
            }
        }
    }
    Ok(best.expect("codebooks are non-empty"))
}

/// The counting-argument equivocation bound `Rn - read_budget - log2 L` in
/// bits. May be negative; reported raw.
pub fn counting_bound(rn_bits: u32, read_budget: u32, l: u64) -> Result<f64> {
    if l < 1 {
        return Err(Error::Domain("counting bound needs L >= 1".into()));
    }
    Ok(rn_bits as f64 - read_budget as f64 - (l as f64).log2())
}

/// Exact relative entropy (bits) between the empirical distribution of
/// `bin` restricted to the support and the uniform distribution on the
/// `2^|support|` restricted strings.
pub fn soft_cover_divergence(bin: &[Word], support: &[usize]) -> Result<f64> {
    if bin.is_empty() {
        return Err(Error::Range("empty bin".into()));
    }
    let n = bin[0].len();
    let mask = support_mask(n, support)?;
    soft_cover_divergence_mask(bin, mask)
}

/// [`soft_cover_divergence`] on a precomputed bitmask.
pub fn soft_cover_divergence_mask(bin: &[Word], mask: u64) -> Result<f64> {
    let k = mask.count_ones() as usize;
    if k > DIVERGENCE_SUPPORT_CAP {
        return Err(Error::Resource(format!(
            "divergence support capped at {DIVERGENCE_SUPPORT_CAP} coordinates"
        )));
    }
    let mut counts: HashMap<u64, u64> = HashMap::new();
    for w in bin {
        if w.len() != bin[0].len() {
            return Err(Error::LengthMismatch { expected: bin[0].len(), got: w.len() });
        }
        *counts.entry(w.bits() & mask).or_insert(0) += 1;
    }
    let total = bin.len() as f64;
    let uniform_inv = (1u64 << k) as f64; // 1/Q(v)
    let mut d = 0.0;
    for &c in counts.values() {
        let p = c as f64 / total;
        d += p * (p * uniform_inv).log2();
    }
    Ok(d)
}

/// Full-string route for the restriction identity: the divergence between
/// the distribution of whole `?`-padded views and the uniform distribution
/// over all padded strings with the same support. Kept as a separate code
/// path so the identity can be checked rather than assumed.
pub fn soft_cover_divergence_full(bin: &[Word], support: &[usize]) -> Result<f64> {
    if bin.is_empty() {
        return Err(Error::Range("empty bin".into()));
    }
    let n = bin[0].len();
    let mask = support_mask(n, support)?;
    let k = mask.count_ones() as usize;
    if k > DIVERGENCE_SUPPORT_CAP {
        return Err(Error::Resource("divergence support cap exceeded".into()));
    }
    let mut counts: HashMap<View, u64> = HashMap::new();
    for w in bin {
        let v = crate::channel::observe_mask(w, mask)?;
        *counts.entry(v).or_insert(0) += 1;
    }
    let total = bin.len() as f64;
    let q = 1.0 / (1u64 << k) as f64; // uniform over padded strings with this support
    let mut d = 0.0;
    for &c in counts.values() {
        let p = c as f64 / total;
        d += p * (p / q).log2();
    }
    Ok(d)
}

/// Semantic-secrecy surrogate: the maximum over messages and all
/// `read_budget`-sized supports of the bin's soft-covering divergence.
pub fn sem_surrogate(bc: &BinnedCode, read_budget: usize) -> Result<f64> {
    let n = bc.n();
    if read_budget > n {
        return Err(Error::Range(format!("read budget {read_budget} exceeds n={n}")));
    }
    if binomial(n, read_budget) > SUPPORT_ENUM_CAP {
        return Err(Error::Resource("support enumeration cap exceeded".into()));
    }
    let mut max_d = 0.0f64;
    for support in (0..n).combinations(read_budget) {
        let mask = support_mask(n, &support)?;
        for m in 0..bc.num_messages() {
            let d = soft_cover_divergence_mask(bc.bin(m), mask)?;
            if d > max_d {
                max_d = d;
            }
        }
    }
    Ok(max_d)
}

/// Mutual information `I(S; V(support))` under a uniform message, exact:
/// `R'n - H(S|V)`.
pub fn mutual_info_uniform(bc: &BinnedCode, support: &[usize]) -> Result<f64> {
    Ok(bc.message_bits() as f64 - equivocation_for_support(bc, support)?)
}

fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc = 1u64;
    for i in 1..=k {
        acc = acc.saturating_mul((n - k + i) as u64) / i as u64;
    }
    acc
}

/// One metric row of a secrecy report.
#[derive(Debug, Clone)]
pub struct MetricRow {
    pub metric: String,
    /// Support rendered as `;`-joined 0-based coordinates, empty for
    /// support-independent metrics.
    pub support: String,
    pub value: f64,
    pub exact: bool,
}

/// Aggregated secrecy metrics for one binned code at one read budget.
#[derive(Debug, Clone)]
pub struct SecrecyReport {
    pub rows: Vec<MetricRow>,
    pub min_equivocation: f64,
    pub eta: f64,
    pub l_max: u64,
    pub counting_bound: f64,
    pub sem_surrogate: f64,
    /// False when any sampled fallback was used.
    pub exact: bool,
}

fn support_label(support: &[usize]) -> String {
    support.iter().map(|c| c.to_string()).join(";")
}

/// Compute the full report. `samples` only matters in sampled mode, where
/// minima/maxima over supports become flagged bounds.
pub fn secrecy_report<R: Rng>(
    bc: &BinnedCode,
    read_budget: usize,
    exact: bool,
    samples: usize,
    rng: &mut R,
) -> Result<SecrecyReport> {
    let n = bc.n();
    let mut rows = Vec::new();

    let (delta, argmin, l_max, sem) = if exact {
        if binomial(n, read_budget) > SUPPORT_ENUM_CAP {
            return Err(Error::Resource("support enumeration cap exceeded".into()));
        }
        // per-support equivocation rows
        for support in (0..n).combinations(read_budget) {
            let h = equivocation_for_support(bc, &support)?;
            rows.push(MetricRow {
                metric: "equivocation".into(),
                support: support_label(&support),
                value: h,
                exact: true,
            });
        }
        let (delta, argmin) = min_equivocation(bc, read_budget)?;
        let cons = consistency_max(bc, read_budget)?;
        let sem = sem_surrogate(bc, read_budget)?;
        (delta, argmin, cons.l_max, sem)
    } else {
        let (delta, argmin) = min_equivocation_sampled(bc, read_budget, samples, rng)?;
        let mut l_max = 0u64;
        let mut sem = 0.0f64;
        for _ in 0..samples.max(1) {
            let support = random_support(n, read_budget, rng);
            let mask = support_mask(n, &support)?;
            let h = equivocation_for_support(bc, &support)?;
            rows.push(MetricRow {
                metric: "equivocation".into(),
                support: support_label(&support),
                value: h,
                exact: true, // the per-support value is exact; the min is not
            });
            for m in 0..bc.num_messages() {
                let mut counts: HashMap<u64, u64> = HashMap::new();
                for w in bc.bin(m) {
                    *counts.entry(w.bits() & mask).or_insert(0) += 1;
                }
                l_max = l_max.max(counts.values().copied().max().unwrap_or(0));
                sem = sem.max(soft_cover_divergence_mask(bc.bin(m), mask)?);
            }
        }
        (delta, argmin, l_max, sem)
    };

    let rn_bits = bc.base().words().len().trailing_zeros();
    let bound = counting_bound(rn_bits, read_budget as u32, l_max.max(1))?;
    let eta = delta / n as f64;

    rows.push(MetricRow {
        metric: "min_equivocation".into(),
        support: support_label(&argmin),
        value: delta,
        exact,
    });
    rows.push(MetricRow { metric: "eta".into(), support: String::new(), value: eta, exact });
    rows.push(MetricRow {
        metric: "l_max".into(),
        support: String::new(),
        value: l_max as f64,
        exact,
    });
    rows.push(MetricRow {
        metric: "counting_bound".into(),
        support: String::new(),
        value: bound,
        exact,
    });
    rows.push(MetricRow {
        metric: "sem_surrogate".into(),
        support: String::new(),
        value: sem,
        exact,
    });

    Ok(SecrecyReport {
        rows,
        min_equivocation: delta,
        eta,
        l_max,
        counting_bound: bound,
        sem_surrogate: sem,
        exact,
    })
}

/// CSV rendering: `metric,support,value,exact_flag`.
pub fn report_to_csv(report: &SecrecyReport) -> String {
    let mut out = String::from("metric,support,value,exact_flag\n");
    for row in &report.rows {
        out.push_str(&format!(
            "{},{},{:.9},{}\n",
            row.metric, row.support, row.value, row.exact
        ));
    }
    out
}
