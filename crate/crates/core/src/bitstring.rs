//! Packed ±1 strings, the binary Champernowne stream, and the fractional flip rule.
//!
//! Entries are stored one bit each, least significant bit first within a
//! word. A set bit is `+1`, a clear bit `−1`, so the Champernowne digit `c`
//! maps to the spin `2c − 1` with no translation at all. Bits past the end of
//! the last word are kept clear; the popcount routines rely on that.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::dyadic::Dyadic;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BitStringError {
    #[error("bit strings must be non-empty")]
    Empty,
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("length {0} is not a power of two")]
    NotPowerOfTwo(usize),
    #[error("flip fraction {0} is outside [0, 1]")]
    FractionOutOfRange(Dyadic),
    #[error("invalid bit text at position {position}: {reason}")]
    Parse { position: usize, reason: String },
    #[error("spin value {0} is not +1 or -1")]
    InvalidSpin(i64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Spin {
    Down,
    Up,
}

impl Spin {
    pub fn from_bit(bit: bool) -> Spin {
        if bit {
            Spin::Up
        } else {
            Spin::Down
        }
    }

    pub fn is_up(self) -> bool {
        self == Spin::Up
    }

    pub fn value(self) -> i8 {
        match self {
            Spin::Up => 1,
            Spin::Down => -1,
        }
    }

    pub fn flip(self) -> Spin {
        match self {
            Spin::Up => Spin::Down,
            Spin::Down => Spin::Up,
        }
    }
}

impl Serialize for Spin {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_i8(self.value())
    }
}

impl std::ops::Neg for Spin {
    type Output = Spin;
    fn neg(self) -> Spin {
        self.flip()
    }
}

impl std::ops::Mul for Spin {
    type Output = Spin;
    fn mul(self, rhs: Spin) -> Spin {
        Spin::from_bit(self == rhs)
    }
}

impl fmt::Display for Spin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(if self.is_up() { "+1" } else { "-1" })
    }
}

fn words_for(len: usize) -> usize {
    len.div_ceil(64)
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitString {
    len: usize,
    words: Vec<u64>,
}

/// Appends bits to a packed buffer; used by every constructor.
struct Builder {
    len: usize,
    words: Vec<u64>,
}

impl Builder {
    fn with_capacity(len: usize) -> Builder {
        Builder {
            len: 0,
            words: Vec::with_capacity(words_for(len)),
        }
    }

    #[inline]
    fn push(&mut self, bit: bool) {
        let off = self.len & 63;
        if off == 0 {
            self.words.push(0);
        }
        if bit {
            *self.words.last_mut().unwrap() |= 1 << off;
        }
        self.len += 1;
    }

    fn finish(self) -> Result<BitString, BitStringError> {
        if self.len == 0 {
            return Err(BitStringError::Empty);
        }
        Ok(BitString {
            len: self.len,
            words: self.words,
        })
    }
}

impl BitString {
    /// Builds a string of `len` entries, entry `i` being `+1` when `up(i)`.
    pub fn from_fn(len: usize, mut up: impl FnMut(usize) -> bool) -> Result<BitString, BitStringError> {
        let mut b = Builder::with_capacity(len);
        for i in 0..len {
            b.push(up(i));
        }
        b.finish()
    }

    pub fn from_bits(bits: &[u8]) -> Result<BitString, BitStringError> {
        let mut b = Builder::with_capacity(bits.len());
        for (i, &x) in bits.iter().enumerate() {
            match x {
                0 => b.push(false),
                1 => b.push(true),
                _ => {
                    return Err(BitStringError::Parse {
                        position: i,
                        reason: format!("bit value {x}"),
                    })
                }
            }
        }
        b.finish()
    }

    pub fn from_spins(spins: &[i8]) -> Result<BitString, BitStringError> {
        let mut b = Builder::with_capacity(spins.len());
        for &s in spins {
            match s {
                1 => b.push(true),
                -1 => b.push(false),
                other => return Err(BitStringError::InvalidSpin(other.into())),
            }
        }
        b.finish()
    }

    pub fn from_spin_iter(it: impl IntoIterator<Item = Spin>) -> Result<BitString, BitStringError> {
        let it = it.into_iter();
        let mut b = Builder::with_capacity(it.size_hint().0);
        for s in it {
            b.push(s.is_up());
        }
        b.finish()
    }

    /// All `+1`.
    pub fn ones(len: usize) -> Result<BitString, BitStringError> {
        BitString::from_fn(len, |_| true)
    }

    /// All `−1`.
    pub fn minus_ones(len: usize) -> Result<BitString, BitStringError> {
        BitString::from_fn(len, |_| false)
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// `N` when the length is `2^N`.
    pub fn level(&self) -> Option<u32> {
        self.len.is_power_of_two().then(|| self.len.trailing_zeros())
    }

    #[inline]
    pub fn bit(&self, i: usize) -> bool {
        assert!(i < self.len, "index {i} out of range for length {}", self.len);
        (self.words[i >> 6] >> (i & 63)) & 1 == 1
    }

    #[inline]
    pub fn get(&self, i: usize) -> Spin {
        Spin::from_bit(self.bit(i))
    }

    pub fn iter(&self) -> impl Iterator<Item = Spin> + '_ {
        (0..self.len).map(|i| self.get(i))
    }

    pub fn to_bits(&self) -> Vec<u8> {
        (0..self.len).map(|i| self.bit(i) as u8).collect()
    }

    pub fn to_spins(&self) -> Vec<i8> {
        self.iter().map(Spin::value).collect()
    }

    /// Renders as `0`/`1` characters, first entry first.
    pub fn to_bit_string(&self) -> String {
        (0..self.len).map(|i| if self.bit(i) { '1' } else { '0' }).collect()
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    fn tail_mask(&self) -> u64 {
        match self.len & 63 {
            0 => u64::MAX,
            r => (1u64 << r) - 1,
        }
    }

    fn check_len(&self, other: &BitString) -> Result<(), BitStringError> {
        if self.len != other.len {
            return Err(BitStringError::LengthMismatch {
                left: self.len,
                right: other.len,
            });
        }
        Ok(())
    }

    fn power_of_two_scale(&self) -> Result<u32, BitStringError> {
        self.level().ok_or(BitStringError::NotPowerOfTwo(self.len))
    }

    /// Entrywise negation.
    pub fn negated(&self) -> BitString {
        let mut words: Vec<u64> = self.words.iter().map(|w| !w).collect();
        if let Some(last) = words.last_mut() {
            *last &= self.tail_mask();
        }
        BitString {
            len: self.len,
            words,
        }
    }

    /// Entrywise product `sᵢ·tᵢ`.
    pub fn product(&self, other: &BitString) -> Result<BitString, BitStringError> {
        self.check_len(other)?;
        let mut words: Vec<u64> = self
            .words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| !(a ^ b))
            .collect();
        if let Some(last) = words.last_mut() {
            *last &= self.tail_mask();
        }
        Ok(BitString {
            len: self.len,
            words,
        })
    }

    /// Entry `n` from `self` where `mask` is `+1`, from `other` elsewhere.
    pub fn select(&self, other: &BitString, mask: &BitString) -> Result<BitString, BitStringError> {
        self.check_len(other)?;
        self.check_len(mask)?;
        let words = self
            .words
            .iter()
            .zip(&other.words)
            .zip(&mask.words)
            .map(|((a, b), m)| (a & m) | (b & !m))
            .collect();
        Ok(BitString {
            len: self.len,
            words,
        })
    }

    pub fn count_up(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Number of positions where the two strings differ.
    pub fn hamming(&self, other: &BitString) -> Result<usize, BitStringError> {
        self.check_len(other)?;
        Ok(self
            .words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a ^ b).count_ones() as usize)
            .sum())
    }

    /// Σ sᵢtᵢ as an integer.
    pub fn dot(&self, other: &BitString) -> Result<i64, BitStringError> {
        let d = self.hamming(other)? as i64;
        Ok(self.len as i64 - 2 * d)
    }

    /// `(1/L) Σ sᵢtᵢ`, exact.
    pub fn correlation(&self, other: &BitString) -> Result<Dyadic, BitStringError> {
        let dot = self.dot(other)?;
        let k = self.power_of_two_scale()?;
        Ok(Dyadic::new(dot, k))
    }

    /// Mean of the entries, exact.
    pub fn balance(&self) -> Result<Dyadic, BitStringError> {
        let k = self.power_of_two_scale()?;
        let up = self.count_up() as i64;
        Ok(Dyadic::new(2 * up - self.len as i64, k))
    }

    /// Zero-based positions `⌈j/f⌉ − 1`, `j = 1, 2, …`, that the flip rule negates.
    pub fn flip_positions(len: usize, f: &Dyadic) -> Result<Vec<usize>, BitStringError> {
        let mut out = Vec::new();
        for_each_flip(len, f, |i| out.push(i))?;
        Ok(out)
    }

    /// Negates entries at 1-indexed positions `⌈j/f⌉`.
    pub fn flip_fraction(&self, f: &Dyadic) -> Result<BitString, BitStringError> {
        let mut words = self.words.clone();
        for_each_flip(self.len, f, |i| words[i >> 6] ^= 1 << (i & 63))?;
        Ok(BitString {
            len: self.len,
            words,
        })
    }

    /// Shift by `m` places in the sign-extended sequence `S[i+L] = −S[i]`.
    ///
    /// Output entry `n` is `S_ext[n − m]`; `m = 1` moves the negated last
    /// entry to the front.
    pub fn negacyclic_shift(&self, m: i64) -> BitString {
        let len = self.len as i64;
        let m = m.rem_euclid(2 * len);
        let (m, negate) = if m >= len { (m - len, true) } else { (m, false) };
        let m = m as usize;
        let mut b = Builder::with_capacity(self.len);
        for n in 0..self.len {
            let bit = if n >= m {
                self.bit(n - m) ^ negate
            } else {
                !self.bit(n + self.len - m) ^ negate
            };
            b.push(bit);
        }
        b.finish().expect("non-empty")
    }

    /// Hex packing, four entries per digit, first entry in the high bit.
    pub fn to_hex(&self) -> String {
        let mut s = String::with_capacity(self.len.div_ceil(4));
        for chunk in 0..self.len.div_ceil(4) {
            let mut nib = 0u32;
            for t in 0..4 {
                let i = chunk * 4 + t;
                nib <<= 1;
                if i < self.len && self.bit(i) {
                    nib |= 1;
                }
            }
            s.push(char::from_digit(nib, 16).unwrap());
        }
        s
    }

    pub fn from_hex(len: usize, hex: &str) -> Result<BitString, BitStringError> {
        if hex.len() != len.div_ceil(4) {
            return Err(BitStringError::Parse {
                position: hex.len().min(len.div_ceil(4)),
                reason: format!("expected {} hex digits for length {len}", len.div_ceil(4)),
            });
        }
        let mut b = Builder::with_capacity(len);
        for (pos, ch) in hex.chars().enumerate() {
            let nib = ch.to_digit(16).ok_or_else(|| BitStringError::Parse {
                position: pos,
                reason: format!("`{ch}` is not a hex digit"),
            })?;
            for t in 0..4 {
                let i = pos * 4 + t;
                let bit = (nib >> (3 - t)) & 1 == 1;
                if i < len {
                    b.push(bit);
                } else if bit {
                    return Err(BitStringError::Parse {
                        position: pos,
                        reason: "padding bits must be zero".into(),
                    });
                }
            }
        }
        b.finish()
    }
}

/// Visits the zero-based flip positions in increasing order; returns their count.
fn for_each_flip(len: usize, f: &Dyadic, mut visit: impl FnMut(usize)) -> Result<usize, BitStringError> {
    if f.is_negative() || *f > Dyadic::one() {
        return Err(BitStringError::FractionOutOfRange(f.clone()));
    }
    if f.is_zero() {
        return Ok(0);
    }
    let p = f.numerator();
    let k = f.scale();
    // ⌈j/f⌉ ≤ L exactly when j ≤ L·f, so the count is ⌊L·f⌋.
    let count = ((BigInt::from(len) * p) >> k).to_usize().unwrap_or(0);
    let bits_needed = 64 - (len as u64).leading_zeros() + k;
    if let (Some(p), true) = (p.to_u64(), bits_needed < 64) {
        for j in 1..=count as u64 {
            visit(((j << k).div_ceil(p) - 1) as usize);
        }
    } else if let (Some(p), true) = (p.to_u128(), bits_needed < 127) {
        for j in 1..=count as u128 {
            visit(((j << k).div_ceil(p) - 1) as usize);
        }
    } else {
        for j in 1..=count {
            let (q, r) = (BigInt::from(j) << k).div_rem(p);
            let n = if r.is_zero() { q } else { q + BigInt::one() };
            visit(n.to_usize().expect("position fits in usize") - 1);
        }
    }
    Ok(count)
}

impl fmt::Debug for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.len <= 64 {
            write!(f, "BitString({})", self.to_bit_string())
        } else {
            write!(f, "BitString(len={}, hex={}…)", self.len, &self.to_hex()[..16])
        }
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_bit_string())
    }
}

/// Raw `0`/`1` text; whitespace and `_` are ignored.
impl FromStr for BitString {
    type Err = BitStringError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut b = Builder::with_capacity(s.len());
        for (pos, ch) in s.char_indices() {
            match ch {
                '0' => b.push(false),
                '1' => b.push(true),
                '_' => {}
                c if c.is_whitespace() => {}
                c => {
                    return Err(BitStringError::Parse {
                        position: pos,
                        reason: format!("unexpected `{c}`"),
                    })
                }
            }
        }
        b.finish()
    }
}

#[derive(Serialize, Deserialize)]
struct HexForm {
    len: usize,
    hex: String,
}

impl Serialize for BitString {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        HexForm {
            len: self.len,
            hex: self.to_hex(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for BitString {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let h = HexForm::deserialize(deserializer)?;
        BitString::from_hex(h.len, &h.hex).map_err(serde::de::Error::custom)
    }
}

/// Bits of `.110111001011…`: 1, 2, 3, … written in binary and concatenated.
#[derive(Debug, Clone)]
pub struct ChampernowneBits {
    current: u64,
    width: u32,
    pos: u32,
}

impl ChampernowneBits {
    /// Starts at bit `offset` (zero-based) without generating the skipped prefix.
    pub fn new(offset: u64) -> ChampernowneBits {
        let mut rem = offset;
        let mut width = 1u32;
        loop {
            // 2^(width-1) numbers of `width` bits each.
            let block = (width as u64) << (width - 1);
            if rem < block {
                break;
            }
            rem -= block;
            width += 1;
        }
        let w = width as u64;
        ChampernowneBits {
            current: (1u64 << (width - 1)) + rem / w,
            width,
            pos: (rem % w) as u32,
        }
    }
}

impl Iterator for ChampernowneBits {
    type Item = bool;

    fn next(&mut self) -> Option<bool> {
        let bit = (self.current >> (self.width - 1 - self.pos)) & 1 == 1;
        self.pos += 1;
        if self.pos == self.width {
            self.pos = 0;
            self.current += 1;
            if self.current.is_power_of_two() {
                self.width += 1;
            }
        }
        Some(bit)
    }
}

/// Bits `offset .. offset + length` of the binary Champernowne constant.
pub fn champernowne_bits(length: usize, offset: u64) -> Vec<u8> {
    ChampernowneBits::new(offset).take(length).map(u8::from).collect()
}

/// The spin string of a Champernowne segment.
pub fn champernowne_spins(length: usize, offset: u64) -> Result<BitString, BitStringError> {
    let mut it = ChampernowneBits::new(offset);
    BitString::from_fn(length, |_| it.next().unwrap())
}

/// `0 → −1`, `1 → +1`.
pub fn to_spin(bits: &[u8]) -> Result<BitString, BitStringError> {
    BitString::from_bits(bits)
}
