//! Hard (bit) and soft (real-valued) words.
//!
//! Bit `i` of a word is the coefficient of `x^i` when the word is read as a
//! polynomial. The BPSK mapping is fixed: bit 0 ↔ +1.0, bit 1 ↔ −1.0.

use std::ops::{Deref, DerefMut};

use crate::algebra::BinaryPolynomial;
use crate::error::{Error, Result};

/// A vector of bits, one `u8` (0 or 1) per coordinate.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct HardWord(Vec<u8>);

impl HardWord {
    pub fn zeros(len: usize) -> Self {
        HardWord(vec![0; len])
    }

    /// Builds a word from arbitrary bytes, mapping every nonzero byte to 1.
    pub fn from_bits(bits: impl IntoIterator<Item = u8>) -> Self {
        HardWord(bits.into_iter().map(|b| (b != 0) as u8).collect())
    }

    pub fn bits(&self) -> &[u8] {
        &self.0
    }

    pub fn into_bits(self) -> Vec<u8> {
        self.0
    }

    pub fn weight(&self) -> usize {
        self.0.iter().filter(|&&b| b != 0).count()
    }

    /// Number of coordinates in which `self` and `other` differ.
    pub fn hamming_distance(&self, other: &HardWord) -> usize {
        self.0.iter().zip(&other.0).filter(|(a, b)| a != b).count()
    }

    pub fn xor(&self, other: &HardWord) -> Result<HardWord> {
        check_len(self.len(), other.len())?;
        Ok(HardWord(
            self.0.iter().zip(&other.0).map(|(a, b)| a ^ b).collect(),
        ))
    }

    /// ±1 image of the word.
    pub fn to_bpsk(&self) -> SoftWord {
        SoftWord(self.0.iter().map(|&b| bit_to_symbol(b)).collect())
    }

    pub fn to_polynomial(&self) -> BinaryPolynomial {
        BinaryPolynomial::from_bits(&self.0)
    }

    /// Parses a string of `0`/`1` characters (whitespace ignored).
    pub fn parse_binary(s: &str) -> Result<Self> {
        s.chars()
            .filter(|c| !c.is_whitespace())
            .map(|c| match c {
                '0' => Ok(0),
                '1' => Ok(1),
                other => Err(Error::Parse {
                    what: "binary word",
                    detail: format!("unexpected character {other:?}"),
                }),
            })
            .collect::<Result<Vec<u8>>>()
            .map(HardWord)
    }

    pub fn to_binary_string(&self) -> String {
        self.0
            .iter()
            .map(|&b| if b != 0 { '1' } else { '0' })
            .collect()
    }

    /// Parses a hexadecimal number whose bit `i` (LSB = 0) becomes coordinate
    /// `i`; the result is truncated or zero-padded to `len` coordinates.
    pub fn parse_hex(s: &str, len: usize) -> Result<Self> {
        let digits = s.trim().trim_start_matches("0x").trim_start_matches("0X");
        let mut bits = Vec::with_capacity(digits.len() * 4);
        for c in digits.chars().rev() {
            let v = c.to_digit(16).ok_or_else(|| Error::Parse {
                what: "hex word",
                detail: format!("unexpected character {c:?}"),
            })?;
            bits.extend((0..4).map(|i| ((v >> i) & 1) as u8));
        }
        if bits[len.min(bits.len())..].iter().any(|&b| b != 0) {
            return Err(Error::Parse {
                what: "hex word",
                detail: format!("value does not fit in {len} bits"),
            });
        }
        bits.resize(len, 0);
        Ok(HardWord(bits))
    }

    pub fn to_hex_string(&self) -> String {
        let nibbles = self.0.len().div_ceil(4).max(1);
        let mut out = String::with_capacity(nibbles);
        for nib in (0..nibbles).rev() {
            let v = (0..4)
                .filter(|i| self.0.get(nib * 4 + i).copied().unwrap_or(0) != 0)
                .fold(0u32, |acc, i| acc | (1 << i));
            out.push(char::from_digit(v, 16).unwrap());
        }
        out
    }
}

impl Deref for HardWord {
    type Target = [u8];
    fn deref(&self) -> &[u8] {
        &self.0
    }
}

impl DerefMut for HardWord {
    fn deref_mut(&mut self) -> &mut [u8] {
        &mut self.0
    }
}

impl From<Vec<u8>> for HardWord {
    fn from(bits: Vec<u8>) -> Self {
        HardWord::from_bits(bits)
    }
}

/// Real-valued received word or reliability vector.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SoftWord(Vec<f64>);

impl SoftWord {
    pub fn new(values: Vec<f64>) -> Self {
        SoftWord(values)
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn into_values(self) -> Vec<f64> {
        self.0
    }

    /// Index of the first non-finite entry, if any.
    pub fn first_non_finite(&self) -> Option<usize> {
        self.0.iter().position(|v| !v.is_finite())
    }

    pub fn ensure_finite(&self) -> Result<()> {
        match self.first_non_finite() {
            Some(i) => Err(Error::NonFinite(i)),
            None => Ok(()),
        }
    }

    /// Sign decision: `v >= 0` → bit 0, `v < 0` → bit 1.
    pub fn hard_decision(&self) -> HardWord {
        HardWord(self.0.iter().map(|&v| hard_bit(v)).collect())
    }
}

impl Deref for SoftWord {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl DerefMut for SoftWord {
    fn deref_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }
}

impl From<Vec<f64>> for SoftWord {
    fn from(values: Vec<f64>) -> Self {
        SoftWord(values)
    }
}

#[inline]
pub fn hard_bit(v: f64) -> u8 {
    (v < 0.0) as u8
}

#[inline]
pub fn bit_to_symbol(b: u8) -> f64 {
    if b != 0 {
        -1.0
    } else {
        1.0
    }
}

/// Cyclic rotation shared by hard and soft words.
pub trait CyclicShift {
    /// Right rotation by `s` (reduced mod the length): `out[i] = in[(i - s) mod n]`.
    /// Negative `s` rotates left.
    fn cyclic_shift(&self, s: i64) -> Self;
}

fn rotate<T: Clone>(v: &[T], s: i64) -> Vec<T> {
    let mut out = v.to_vec();
    if !out.is_empty() {
        let n = out.len() as i64;
        out.rotate_right(s.rem_euclid(n) as usize);
    }
    out
}

impl CyclicShift for HardWord {
    fn cyclic_shift(&self, s: i64) -> Self {
        HardWord(rotate(&self.0, s))
    }
}

impl CyclicShift for SoftWord {
    fn cyclic_shift(&self, s: i64) -> Self {
        SoftWord(rotate(&self.0, s))
    }
}

pub(crate) fn check_len(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::LengthMismatch { expected, found })
    }
}
