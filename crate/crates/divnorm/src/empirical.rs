//! Streaming block statistics.
//!
//! A length-l block of a sequence S is S[m*l .. (m+1)*l] for m = 0, 1, 2, ...
//! Blocks are aligned and non-overlapping, always anchored at position 0; a
//! trailing partial block is held in a carry and never counted. After n
//! complete blocks the empirical measure assigns each word w the exact
//! rational count(w) / n.

use num_bigint::BigInt;
use num_rational::BigRational;

use crate::alphabet::{Alphabet, Space};
use crate::error::{Error, Result};
use crate::measures::Prob;

/// Number of aligned, non-overlapping occurrences of `word` in `text`:
/// the count of m with text[m*|word| .. (m+1)*|word|] == word.
pub fn block_occurrences(word: &str, text: &str) -> Result<u64> {
    let w: Vec<char> = word.chars().collect();
    let t: Vec<char> = text.chars().collect();
    if w.is_empty() {
        return Err(Error::InvalidParam("block word must be nonempty".into()));
    }
    let l = w.len();
    let mut count = 0u64;
    let mut m = 0usize;
    while (m + 1) * l <= t.len() {
        if t[m * l..(m + 1) * l] == w[..] {
            count += 1;
        }
        m += 1;
    }
    Ok(count)
}

/// Incremental counter of aligned l-blocks over a fixed alphabet.
///
/// State is one u64 per word plus the carry, O(|alphabet|^l) total; feeding
/// in chunks of any size gives identical counts to feeding symbol by symbol.
#[derive(Clone, Debug)]
pub struct BlockCounter {
    space: Space,
    counts: Vec<u64>,
    blocks: u64,
    carry_index: usize,
    carry_len: usize,
    symbols_fed: u64,
}

impl BlockCounter {
    pub fn new(alphabet: Alphabet, block_len: usize) -> Result<Self> {
        let space = Space::new(alphabet, block_len)?;
        let counts = vec![0u64; space.outcome_count()];
        Ok(BlockCounter {
            space,
            counts,
            blocks: 0,
            carry_index: 0,
            carry_len: 0,
            symbols_fed: 0,
        })
    }

    pub fn space(&self) -> &Space {
        &self.space
    }

    pub fn block_len(&self) -> usize {
        self.space.word_len()
    }

    /// Complete blocks counted so far (the n of the empirical measure).
    pub fn blocks(&self) -> u64 {
        self.blocks
    }

    pub fn symbols_fed(&self) -> u64 {
        self.symbols_fed
    }

    /// Length of the held partial block; always < block_len.
    pub fn carry_len(&self) -> usize {
        self.carry_len
    }

    /// Symbols of the held partial block.
    pub fn carry(&self) -> Vec<u8> {
        let k = self.space.alphabet().size();
        let mut digits = vec![0u8; self.carry_len];
        let mut rem = self.carry_index;
        for slot in digits.iter_mut().rev() {
            *slot = (rem % k) as u8;
            rem /= k;
        }
        digits
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn count_of_word(&self, word: &str) -> Result<u64> {
        Ok(self.counts[self.space.word_index_str(word)?])
    }

    /// Feed symbol indices. Indices are validated against the alphabet size;
    /// the error position is the absolute symbol offset since construction.
    pub fn feed(&mut self, symbols: &[u8]) -> Result<()> {
        let k = self.space.alphabet().size();
        let l = self.space.word_len();
        for &s in symbols {
            if s as usize >= k {
                return Err(Error::ForeignSymbol {
                    symbol: char::from_u32(s as u32).unwrap_or('?'),
                    position: self.symbols_fed,
                });
            }
            self.carry_index = self.carry_index * k + s as usize;
            self.carry_len += 1;
            self.symbols_fed += 1;
            if self.carry_len == l {
                self.counts[self.carry_index] += 1;
                self.blocks += 1;
                self.carry_index = 0;
                self.carry_len = 0;
            }
        }
        Ok(())
    }

    /// Feed characters, validating membership in the alphabet. The error
    /// position is the absolute symbol offset since construction.
    pub fn feed_str(&mut self, text: &str) -> Result<()> {
        for c in text.chars() {
            match self.space.alphabet().index_of(c) {
                Some(i) => self.feed(&[i])?,
                None => {
                    return Err(Error::ForeignSymbol {
                        symbol: c,
                        position: self.symbols_fed,
                    })
                }
            }
        }
        Ok(())
    }

    /// Empirical measure over the n complete blocks seen so far.
    pub fn empirical_measure(&self) -> Result<EmpiricalMeasure> {
        if self.blocks == 0 {
            return Err(Error::InvalidParam(
                "empirical measure needs at least one complete block".into(),
            ));
        }
        let n = BigInt::from(self.blocks);
        let weights: Vec<BigRational> = self
            .counts
            .iter()
            .map(|&c| BigRational::new(BigInt::from(c), n.clone()))
            .collect();
        Ok(EmpiricalMeasure {
            measure: Prob::from_rationals(self.space.clone(), weights)?,
            blocks: self.blocks,
        })
    }
}

/// Exact empirical block measure together with the block count it came from.
#[derive(Clone, Debug)]
pub struct EmpiricalMeasure {
    pub measure: Prob,
    pub blocks: u64,
}
