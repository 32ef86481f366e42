//! Alphabets and finite outcome spaces.
//!
//! An outcome space is the set of words of a fixed length over an alphabet,
//! enumerated lexicographically by symbol order. Word indices are plain
//! integers in base |alphabet| with the most significant digit first, so the
//! binary length-2 space enumerates 00, 01, 10, 11.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Hard cap on enumerated outcome spaces: |alphabet|^len must stay within
/// 2^24 words so counters and weight vectors stay desk-sized.
pub const MAX_OUTCOMES: u64 = 1 << 24;

#[derive(Debug)]
struct AlphabetInner {
    symbols: Vec<char>,
}

/// Ordered set of distinct symbols. Cheap to clone; compared by symbol
/// content, not identity.
#[derive(Clone, Debug)]
pub struct Alphabet {
    inner: Arc<AlphabetInner>,
}

impl PartialEq for Alphabet {
    fn eq(&self, other: &Self) -> bool {
        self.inner.symbols == other.inner.symbols
    }
}
impl Eq for Alphabet {}

impl Alphabet {
    pub fn new(symbols: &str) -> Result<Self> {
        let chars: Vec<char> = symbols.chars().collect();
        if chars.len() < 2 {
            return Err(Error::InvalidAlphabet(format!(
                "need at least 2 symbols, got {}",
                chars.len()
            )));
        }
        if chars.len() > 256 {
            return Err(Error::InvalidAlphabet(format!(
                "at most 256 symbols supported, got {}",
                chars.len()
            )));
        }
        for (i, c) in chars.iter().enumerate() {
            if c.is_whitespace() || *c == '#' {
                return Err(Error::InvalidAlphabet(format!(
                    "symbol {i} is reserved (whitespace and '#' cannot be symbols)"
                )));
            }
            if chars[..i].contains(c) {
                return Err(Error::InvalidAlphabet(format!("duplicate symbol '{c}'")));
            }
        }
        Ok(Alphabet {
            inner: Arc::new(AlphabetInner { symbols: chars }),
        })
    }

    pub fn size(&self) -> usize {
        self.inner.symbols.len()
    }

    pub fn symbols(&self) -> &[char] {
        &self.inner.symbols
    }

    pub fn symbol(&self, index: u8) -> char {
        self.inner.symbols[index as usize]
    }

    pub fn index_of(&self, c: char) -> Option<u8> {
        self.inner
            .symbols
            .iter()
            .position(|s| *s == c)
            .map(|i| i as u8)
    }

    /// Symbol indices of a string, or the first foreign character with its
    /// 0-based position.
    pub fn index_str(&self, s: &str) -> Result<Vec<u8>> {
        let mut out = Vec::with_capacity(s.len());
        for (pos, c) in s.chars().enumerate() {
            match self.index_of(c) {
                Some(i) => out.push(i),
                None => {
                    return Err(Error::ForeignSymbol {
                        symbol: c,
                        position: pos as u64,
                    })
                }
            }
        }
        Ok(out)
    }

    pub fn as_string(&self) -> String {
        self.inner.symbols.iter().collect()
    }
}

impl fmt::Display for Alphabet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_string())
    }
}

/// Outcome space: all words of length `word_len` over `alphabet`.
/// Value-compared; two spaces agree iff the alphabets and lengths agree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Space {
    alphabet: Alphabet,
    word_len: usize,
}

impl Space {
    pub fn new(alphabet: Alphabet, word_len: usize) -> Result<Self> {
        if word_len == 0 {
            return Err(Error::InvalidParam("word length must be at least 1".into()));
        }
        let k = alphabet.size() as u64;
        let mut count: u64 = 1;
        for _ in 0..word_len {
            count = count.checked_mul(k).unwrap_or(u64::MAX);
            if count > MAX_OUTCOMES {
                return Err(Error::SpaceTooLarge {
                    block_len: word_len,
                    limit: MAX_OUTCOMES,
                });
            }
        }
        Ok(Space { alphabet, word_len })
    }

    /// The space of single symbols.
    pub fn symbols(alphabet: Alphabet) -> Self {
        // |alphabet| <= 256 <= MAX_OUTCOMES, so this cannot fail.
        Space::new(alphabet, 1).unwrap()
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn word_len(&self) -> usize {
        self.word_len
    }

    pub fn outcome_count(&self) -> usize {
        self.alphabet.size().pow(self.word_len as u32)
    }

    /// Canonical index of a word given as symbol indices, MSB first.
    pub fn word_index(&self, word: &[u8]) -> Result<usize> {
        if word.len() != self.word_len {
            return Err(Error::InvalidParam(format!(
                "word length {} does not match space length {}",
                word.len(),
                self.word_len
            )));
        }
        let k = self.alphabet.size();
        let mut idx = 0usize;
        for &d in word {
            if d as usize >= k {
                return Err(Error::InvalidParam(format!(
                    "symbol index {d} out of range for alphabet of size {k}"
                )));
            }
            idx = idx * k + d as usize;
        }
        Ok(idx)
    }

    pub fn word_index_str(&self, word: &str) -> Result<usize> {
        let digits = self.alphabet.index_str(word)?;
        self.word_index(&digits)
    }

    /// Symbol indices of the word at `index`, MSB first.
    pub fn word_digits(&self, index: usize) -> Vec<u8> {
        let k = self.alphabet.size();
        let mut digits = vec![0u8; self.word_len];
        let mut rem = index;
        for slot in digits.iter_mut().rev() {
            *slot = (rem % k) as u8;
            rem /= k;
        }
        digits
    }

    pub fn word_string(&self, index: usize) -> String {
        self.word_digits(index)
            .iter()
            .map(|&d| self.alphabet.symbol(d))
            .collect()
    }

    /// Short human-readable description used in mismatch errors.
    pub fn describe(&self) -> String {
        format!("words of length {} over \"{}\"", self.word_len, self.alphabet)
    }
}
