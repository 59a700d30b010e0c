//! Pluggable adversary strategies.
//!
//! The AWTC information constraint is enforced structurally: error selection
//! receives the code description and the view, never the transmitted word.
//! The one exception, `FullViewMidpoint`, is a deliberately non-AWTC
//! omniscient baseline (its "view" is the whole codeword) kept around to
//! demonstrate the rate gap against a full-knowledge adversary.

use rand::Rng;

use crate::code::{consistent_subset, hamming_distance, BinnedCode, Word};
use crate::error::{Error, Result};

/// Full enumeration limits for the exhaustive strategy.
const EXHAUSTIVE_N_CAP: usize = 14;
const EXHAUSTIVE_BUDGET_CAP: u32 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StrategyKind {
    /// Uniform random support, uniform error of exactly the budget weight.
    ObliviousRandom,
    /// Deterministic support; heuristic error aimed at the nearest rival of
    /// a posterior-sampled consistent codeword.
    WithinViewGreedy,
    /// Deterministic support; picks the error maximizing the exact posterior
    /// decoding-error probability over the consistent set.
    WithinViewExhaustive,
    /// Omniscient baseline (support = whole word); violates the AWTC
    /// constraint on purpose and is labeled as such.
    FullViewMidpoint,
}

impl StrategyKind {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "random" => Ok(Self::ObliviousRandom),
            "greedy" => Ok(Self::WithinViewGreedy),
            "exhaustive" => Ok(Self::WithinViewExhaustive),
            "omniscient" => Ok(Self::FullViewMidpoint),
            other => Err(Error::Config(format!(
                "unknown adversary {other:?} (expected random|greedy|exhaustive|omniscient)"
            ))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::ObliviousRandom => "random",
            Self::WithinViewGreedy => "greedy",
            Self::WithinViewExhaustive => "exhaustive",
            Self::FullViewMidpoint => "omniscient",
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Strategy {
    pub kind: StrategyKind,
    /// Cap on the number of candidate errors the exhaustive kind may score
    /// when outside its full-enumeration envelope.
    pub max_enum: Option<usize>,
}

impl Strategy {
    pub fn new(kind: StrategyKind) -> Self {
        Self { kind, max_enum: None }
    }
}

/// Choose the read support.
///
/// The deterministic kinds take the first `read_budget` coordinates: i.i.d.
/// codebooks are coordinate-exchangeable, so a fixed support loses no
/// adversarial power in distribution. The omniscient baseline reads
/// everything regardless of the budget.
pub fn choose_support<R: Rng>(
    strategy: &Strategy,
    n: usize,
    read_budget: usize,
    rng: &mut R,
) -> Result<Vec<usize>> {
    if read_budget > n {
        return Err(Error::Range(format!("read budget {read_budget} exceeds n={n}")));
    }
    match strategy.kind {
        StrategyKind::ObliviousRandom => {
            let mut coords: Vec<usize> = (0..n).collect();
            // partial Fisher-Yates for the first read_budget positions
            for i in 0..read_budget {
                let j = rng.gen_range(i..n);
                coords.swap(i, j);
            }
            let mut chosen = coords[..read_budget].to_vec();
            chosen.sort_unstable();
            Ok(chosen)
        }
        StrategyKind::WithinViewGreedy | StrategyKind::WithinViewExhaustive => {
            Ok((0..read_budget).collect())
        }
        StrategyKind::FullViewMidpoint => Ok((0..n).collect()),
    }
}

/// Choose the error word. Reads only (code, view, budget, RNG).
pub fn choose_error<R: Rng>(
    strategy: &Strategy,
    bc: &BinnedCode,
    view: &crate::channel::View,
    write_budget: u32,
    rng: &mut R,
) -> Result<Word> {
    if view.n() != bc.n() {
        return Err(Error::LengthMismatch { expected: bc.n(), got: view.n() });
    }
    if write_budget == 0 {
        return Ok(Word::zero(bc.n()));
    }
    match strategy.kind {
        StrategyKind::ObliviousRandom => {
            Ok(crate::code::random_error_of_weight(bc.n(), write_budget, rng))
        }
        StrategyKind::WithinViewGreedy => greedy_error(bc, view, write_budget, rng),
        StrategyKind::WithinViewExhaustive => {
            let scores = exhaustive_error_scores(bc, view, write_budget, strategy.max_enum)?;
            Ok(pick_best(&scores))
        }
        StrategyKind::FullViewMidpoint => midpoint_error(bc, view, write_budget),
    }
}

/// Best-scoring error; ties go to the smallest packed value, which the
/// ascending enumeration order makes automatic.
fn pick_best(scores: &[(Word, f64)]) -> Word {
    let mut best = scores[0];
    for &(e, s) in &scores[1..] {
        if s > best.1 {
            best = (e, s);
        }
    }
    best.0
}

/// Score every candidate error of weight `<= write_budget` by the exact
/// posterior decoding-error probability: the fraction of codewords in the
/// consistent set `C|_V` (with multiplicity) that decode outside their own
/// bin after the error is applied. Candidates are enumerated in ascending
/// packed-integer order; `max_enum`, when given, truncates that enumeration.
pub fn exhaustive_error_scores(
    bc: &BinnedCode,
    view: &crate::channel::View,
    write_budget: u32,
    max_enum: Option<usize>,
) -> Result<Vec<(Word, f64)>> {
    let n = bc.n();
    let full_mode = n <= EXHAUSTIVE_N_CAP && write_budget <= EXHAUSTIVE_BUDGET_CAP;
    if !full_mode && max_enum.is_none() {
        return Err(Error::Resource(format!(
            "exhaustive adversary needs n <= {EXHAUSTIVE_N_CAP} and budget <= \
             {EXHAUSTIVE_BUDGET_CAP}, or an explicit --max-enum cap"
        )));
    }
    if n > 24 {
        return Err(Error::Resource("exhaustive enumeration needs n <= 24".into()));
    }
    let consistent = consistent_subset(bc.base().words(), view)?;
    let cap = max_enum.unwrap_or(usize::MAX);
    let mut scores = Vec::new();
    for bits in 0..(1u64 << n) {
        if bits.count_ones() > write_budget {
            continue;
        }
        let e = Word::new(bits, n)?;
        let mut errors = 0usize;
        for &i in &consistent {
            let y = bc.base().words()[i].xor(&e)?;
            if crate::code::decode_nearest(bc, &y)? != bc.bin_of(i) {
                errors += 1;
            }
        }
        let score = if consistent.is_empty() {
            0.0
        } else {
            errors as f64 / consistent.len() as f64
        };
        scores.push((e, score));
        if scores.len() >= cap {
            break;
        }
    }
    Ok(scores)
}

/// Heuristic: sample a candidate from the posterior `C|_V`, find its nearest
/// codeword in another bin, and flip off-support bits toward it.
fn greedy_error<R: Rng>(
    bc: &BinnedCode,
    view: &crate::channel::View,
    write_budget: u32,
    rng: &mut R,
) -> Result<Word> {
    let consistent = consistent_subset(bc.base().words(), view)?;
    if consistent.is_empty() {
        return Ok(Word::zero(bc.n()));
    }
    let cand_idx = consistent[rng.gen_range(0..consistent.len())];
    let cand = bc.base().words()[cand_idx];
    let target = nearest_in_other_bin(bc, cand_idx)?;
    let Some(target) = target else {
        return Ok(Word::zero(bc.n()));
    };
    // flip positions where the candidate differs from the target, outside
    // the view, lowest coordinates first, up to the budget
    let diff = cand.bits() ^ target.bits();
    let off_view = diff & !view.support_mask();
    Ok(take_low_bits(off_view, write_budget, bc.n()))
}

/// Omniscient baseline: reconstruct the transmitted word from the full view
/// and flip up to `write_budget` bits toward its nearest distinct codeword.
fn midpoint_error(bc: &BinnedCode, view: &crate::channel::View, write_budget: u32) -> Result<Word> {
    if view.support_size() != bc.n() {
        return Err(Error::Range(
            "the omniscient baseline requires a full-support view".into(),
        ));
    }
    let x = Word::new(view.symbols(), bc.n())?;
    let mut best: Option<(u32, Word)> = None;
    for w in bc.base().words() {
        let d = hamming_distance(w, &x)?;
        if d == 0 {
            continue;
        }
        if best.map_or(true, |(bd, _)| d < bd) {
            best = Some((d, *w));
        }
    }
    let Some((_, target)) = best else {
        return Ok(Word::zero(bc.n()));
    };
    Ok(take_low_bits(x.bits() ^ target.bits(), write_budget, bc.n()))
}

fn nearest_in_other_bin(bc: &BinnedCode, idx: usize) -> Result<Option<Word>> {
    let from = bc.base().words()[idx];
    let my_bin = bc.bin_of(idx);
    let mut best: Option<(u32, Word)> = None;
    for (j, w) in bc.base().words().iter().enumerate() {
        if bc.bin_of(j) == my_bin {
            continue;
        }
        let d = hamming_distance(w, &from)?;
        if best.map_or(true, |(bd, _)| d < bd) {
            best = Some((d, *w));
        }
    }
    Ok(best.map(|(_, w)| w))
}

/// Keep at most `budget` of the lowest set bits of `bits`.
fn take_low_bits(bits: u64, budget: u32, n: usize) -> Word {
    let mut out = 0u64;
    let mut remaining = bits;
    let mut taken = 0;
    while remaining != 0 && taken < budget {
        let low = remaining & remaining.wrapping_neg();
        out |= low;
        remaining ^= low;
        taken += 1;
    }
    Word::new(out, n).expect("subset of a valid word")
}
