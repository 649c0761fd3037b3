//! Fixed-length bit vectors packed into 64-bit words.
//!
//! Bit `i` lives in word `i / 64` at position `i % 64`. Bits past `len` in the
//! last word are always zero, so word-wise equality and popcounts are exact.

use std::fmt;

const WORD: usize = 64;

#[inline]
fn words_for(len: usize) -> usize {
    len.div_ceil(WORD)
}

#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct BitString {
    len: usize,
    words: Vec<u64>,
}

impl BitString {
    pub fn zeros(len: usize) -> Self {
        Self {
            len,
            words: vec![0; words_for(len)],
        }
    }

    /// Low `len` bits of `value`; higher bits are discarded.
    pub fn from_u64(len: usize, value: u64) -> Self {
        let mut b = Self::zeros(len);
        if let Some(w) = b.words.first_mut() {
            *w = value;
        }
        b.clear_tail();
        b
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        let mut b = Self::zeros(bits.len());
        for (i, &v) in bits.iter().enumerate() {
            if v {
                b.set(i, true);
            }
        }
        b
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn words(&self) -> &[u64] {
        &self.words
    }

    #[inline]
    pub(crate) fn words_mut(&mut self) -> &mut [u64] {
        &mut self.words
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        (self.words[i / WORD] >> (i % WORD)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        debug_assert!(i < self.len);
        let mask = 1u64 << (i % WORD);
        if value {
            self.words[i / WORD] |= mask;
        } else {
            self.words[i / WORD] &= !mask;
        }
    }

    #[inline]
    pub fn flip(&mut self, i: usize) {
        debug_assert!(i < self.len);
        self.words[i / WORD] ^= 1u64 << (i % WORD);
    }

    pub fn xor_assign(&mut self, other: &BitString) {
        debug_assert_eq!(self.len, other.len);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    pub fn and_assign(&mut self, other: &BitString) {
        debug_assert_eq!(self.len, other.len);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a &= b;
        }
    }

    pub fn or_assign(&mut self, other: &BitString) {
        debug_assert_eq!(self.len, other.len);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a |= b;
        }
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Parity of `popcount(self AND other)`.
    #[inline]
    pub fn and_parity(&self, other: &BitString) -> bool {
        let mut acc = 0u64;
        for (a, b) in self.words.iter().zip(&other.words) {
            acc ^= a & b;
        }
        acc.count_ones() & 1 == 1
    }

    pub fn and_count(&self, other: &BitString) -> usize {
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones() as usize)
            .sum()
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn any(&self) -> bool {
        !self.is_zero()
    }

    /// Value as a single word; `None` when more than 64 bits are in use.
    pub fn to_u64(&self) -> Option<u64> {
        match self.words.as_slice() {
            [] => Some(0),
            [w] => Some(*w),
            [w, rest @ ..] if rest.iter().all(|&r| r == 0) => Some(*w),
            _ => None,
        }
    }

    pub fn iter_ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    None
                } else {
                    let tz = w.trailing_zeros() as usize;
                    w &= w - 1;
                    Some(wi * WORD + tz)
                }
            })
        })
    }

    pub fn first_one(&self) -> Option<usize> {
        self.iter_ones().next()
    }

    /// Hexadecimal value with bit 0 as the least significant bit, `0x` prefixed.
    pub fn to_hex(&self) -> String {
        let mut digits = String::new();
        for w in self.words.iter().rev() {
            if digits.is_empty() {
                if *w != 0 {
                    digits = format!("{w:x}");
                }
            } else {
                digits.push_str(&format!("{w:016x}"));
            }
        }
        if digits.is_empty() {
            digits.push('0');
        }
        format!("0x{digits}")
    }

    pub fn from_hex(len: usize, text: &str) -> Option<Self> {
        let digits = text
            .strip_prefix("0x")
            .or_else(|| text.strip_prefix("0X"))
            .unwrap_or(text);
        let mut b = Self::zeros(len);
        for (pos, ch) in digits.chars().rev().enumerate() {
            let nibble = ch.to_digit(16)? as u64;
            for k in 0..4 {
                if nibble >> k & 1 == 1 {
                    let bit = pos * 4 + k;
                    if bit >= len {
                        return None;
                    }
                    b.set(bit, true);
                }
            }
        }
        Some(b)
    }

    fn clear_tail(&mut self) {
        let rem = self.len % WORD;
        if rem != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << rem) - 1;
            }
        }
        if self.len == 0 {
            self.words.clear();
        }
    }

    pub(crate) fn swap_bits(&mut self, i: usize, j: usize) {
        let (a, b) = (self.get(i), self.get(j));
        if a != b {
            self.flip(i);
            self.flip(j);
        }
    }
}

/// Bits printed in index order, bit 0 first.
impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.len {
            f.write_str(if self.get(i) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitString({self})")
    }
}
