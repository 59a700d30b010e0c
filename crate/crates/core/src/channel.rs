//! The adversary's observation mechanism and the stochastic comparison
//! channels (BSC to the receiver, BEC to the eavesdropper).

use rand::Rng;

use crate::code::Word;
use crate::error::{Error, Result};

/// The adversary's view: the codeword revealed on a support, `?` elsewhere.
/// Stored as a support bitmask plus the observed bits (zero off support).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct View {
    n: usize,
    support_mask: u64,
    symbols: u64,
}

impl View {
    pub fn new(n: usize, support_mask: u64, symbols: u64) -> Result<Self> {
        if n == 0 || n > 64 {
            return Err(Error::Range(format!("block length {n} outside 1..=64")));
        }
        if n < 64 && support_mask >> n != 0 {
            return Err(Error::Range("support coordinate out of range".into()));
        }
        if symbols & !support_mask != 0 {
            return Err(Error::Range("symbols set outside the support".into()));
        }
        Ok(Self { n, support_mask, symbols })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn support_mask(&self) -> u64 {
        self.support_mask
    }

    #[inline]
    pub fn symbols(&self) -> u64 {
        self.symbols
    }

    pub fn support_size(&self) -> usize {
        self.support_mask.count_ones() as usize
    }

    /// 0-based support coordinates, ascending.
    pub fn support(&self) -> Vec<usize> {
        (0..self.n).filter(|&i| self.support_mask >> i & 1 == 1).collect()
    }

    /// Does `w` agree with this view on every observed coordinate?
    #[inline]
    pub fn consistent_with(&self, w: &Word) -> bool {
        (w.bits() ^ self.symbols) & self.support_mask == 0
    }

    /// Render as a `{0,1,?}` string, coordinate 1 first.
    pub fn to_symbol_string(&self) -> String {
        (0..self.n)
            .map(|i| {
                if self.support_mask >> i & 1 == 0 {
                    '?'
                } else if self.symbols >> i & 1 == 1 {
                    '1'
                } else {
                    '0'
                }
            })
            .collect()
    }
}

/// Bitmask over 0-based coordinates; rejects out-of-range entries.
pub fn support_mask(n: usize, support: &[usize]) -> Result<u64> {
    let mut mask = 0u64;
    for &i in support {
        if i >= n {
            return Err(Error::Range(format!("coordinate {i} out of range for n={n}")));
        }
        mask |= 1 << i;
    }
    Ok(mask)
}

/// Observe `x` on the given 0-based coordinates.
pub fn observe(x: &Word, support: &[usize]) -> Result<View> {
    let mask = support_mask(x.len(), support)?;
    View::new(x.len(), mask, x.bits() & mask)
}

/// Observe `x` on a precomputed support mask.
pub fn observe_mask(x: &Word, mask: u64) -> Result<View> {
    View::new(x.len(), mask, x.bits() & mask)
}

/// Apply an adversarial error: `x XOR e`, with a hard weight-budget check.
/// The harness must never deliver an over-weight error.
pub fn apply_error(x: &Word, e: &Word, budget: u32) -> Result<Word> {
    if e.weight() > budget {
        return Err(Error::Range(format!(
            "error weight {} exceeds budget {budget}",
            e.weight()
        )));
    }
    x.xor(e)
}

/// Transmit over a binary symmetric channel: each bit flips independently
/// with probability `flip_prob`.
pub fn bsc_transmit<R: Rng>(x: &Word, flip_prob: f64, rng: &mut R) -> Result<Word> {
    if !(0.0..=0.5).contains(&flip_prob) {
        return Err(Error::Domain(format!("flip_prob {flip_prob} outside [0, 1/2]")));
    }
    let mut bits = x.bits();
    for i in 0..x.len() {
        if rng.gen::<f64>() < flip_prob {
            bits ^= 1 << i;
        }
    }
    Word::new(bits, x.len())
}

/// Observe through a binary erasure channel: each coordinate erased
/// independently with probability `erase_prob`; survivors form the support.
pub fn bec_observe<R: Rng>(x: &Word, erase_prob: f64, rng: &mut R) -> Result<View> {
    if !(0.0..=1.0).contains(&erase_prob) {
        return Err(Error::Domain(format!("erase_prob {erase_prob} outside [0,1]")));
    }
    let mut mask = 0u64;
    for i in 0..x.len() {
        if rng.gen::<f64>() >= erase_prob {
            mask |= 1 << i;
        }
    }
    observe_mask(x, mask)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    #[test]
    fn observe_edges() {
        let x = Word::from_bit_str("1010").unwrap();
        let empty = observe(&x, &[]).unwrap();
        assert_eq!(empty.to_symbol_string(), "????");
        let full = observe(&x, &[0, 1, 2, 3]).unwrap();
        assert_eq!(full.to_symbol_string(), "1010");
        // support {1,3} in the spec's 1-indexed convention = {0,2} here
        let v = observe(&x, &[0, 2]).unwrap();
        assert_eq!(v.to_symbol_string(), "1?1?");
        assert!(observe(&x, &[4]).is_err());
    }

    #[test]
    fn apply_error_contract() {
        let x = Word::from_bit_str("10110").unwrap();
        let zero = Word::zero(5);
        assert_eq!(apply_error(&x, &zero, 0).unwrap(), x);
        let e = Word::from_bit_str("01100").unwrap();
        let y = apply_error(&x, &e, 2).unwrap();
        assert_eq!(apply_error(&y, &e, 2).unwrap(), x, "XOR involution");
        assert!(apply_error(&x, &e, 1).is_err(), "budget+1 weight is a hard error");
    }

    #[test]
    fn bsc_no_flip_and_domain() {
        let mut rng = ChaCha12Rng::seed_from_u64(0);
        let x = Word::from_bit_str("110010").unwrap();
        assert_eq!(bsc_transmit(&x, 0.0, &mut rng).unwrap(), x);
        assert!(bsc_transmit(&x, 0.6, &mut rng).is_err());
    }

    #[test]
    fn bsc_mean_flip_count() {
        let mut rng = ChaCha12Rng::seed_from_u64(1);
        let x = Word::zero(16);
        let trials = 100_000;
        let total: u64 = (0..trials)
            .map(|_| bsc_transmit(&x, 0.5, &mut rng).unwrap().weight() as u64)
            .sum();
        let mean = total as f64 / trials as f64;
        assert!((mean - 8.0).abs() < 0.1, "mean flip count {mean}");
    }

    #[test]
    fn bsc_tail_matches_binomial() {
        // P(wt >= 5) for Binomial(20, 0.1), the tail in the reduction's
        // reliability step, computed exactly as the oracle.
        let n = 20usize;
        let p = 0.1f64;
        let exact: f64 = (5..=n)
            .map(|i| binom(n, i) * p.powi(i as i32) * (1.0 - p).powi((n - i) as i32))
            .sum();
        let mut rng = ChaCha12Rng::seed_from_u64(2);
        let x = Word::zero(20);
        let trials = 100_000u32;
        let hits = (0..trials)
            .filter(|_| bsc_transmit(&x, p, &mut rng).unwrap().weight() >= 5)
            .count() as f64;
        let est = hits / trials as f64;
        let sigma = (exact * (1.0 - exact) / trials as f64).sqrt();
        assert!((est - exact).abs() <= 3.0 * sigma, "est {est} vs exact {exact}");
    }

    fn binom(n: usize, k: usize) -> f64 {
        (1..=k).fold(1.0, |acc, i| acc * (n - k + i) as f64 / i as f64)
    }

    #[test]
    fn bec_edges_and_mean_support() {
        let mut rng = ChaCha12Rng::seed_from_u64(3);
        let x = Word::from_bit_str("1011001101").unwrap();
        assert_eq!(bec_observe(&x, 1.0, &mut rng).unwrap().support_size(), 0);
        let full = bec_observe(&x, 0.0, &mut rng).unwrap();
        assert_eq!(full.support_size(), 10);
        assert_eq!(full.symbols(), x.bits());
        assert!(bec_observe(&x, 1.5, &mut rng).is_err());

        let y = Word::zero(25);
        let trials = 100_000;
        let total: usize = (0..trials)
            .map(|_| bec_observe(&y, 0.8, &mut rng).unwrap().support_size())
            .sum();
        let mean = total as f64 / trials as f64;
        assert!((mean - 5.0).abs() < 0.05, "mean support size {mean}");
    }

    #[test]
    fn own_view_is_consistent() {
        let x = Word::from_bit_str("011010").unwrap();
        let v = observe(&x, &[1, 3, 5]).unwrap();
        assert!(v.consistent_with(&x));
    }
}
