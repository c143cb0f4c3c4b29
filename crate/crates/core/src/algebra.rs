//! GF(2) polynomial arithmetic and GF(2^m) field tables.

use std::fmt;

use crate::error::{Error, Result};

/// Polynomial over GF(2), coefficients packed lowest degree first.
///
/// The word vector is kept trimmed so that the highest stored word is nonzero;
/// the zero polynomial has no words at all.
#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct BinaryPolynomial {
    words: Vec<u64>,
}

impl BinaryPolynomial {
    pub fn zero() -> Self {
        BinaryPolynomial { words: Vec::new() }
    }

    pub fn one() -> Self {
        Self::from_u64(1)
    }

    /// Polynomial whose coefficient `i` is bit `i` of `bits`.
    pub fn from_u64(bits: u64) -> Self {
        let mut p = BinaryPolynomial { words: vec![bits] };
        p.trim();
        p
    }

    pub fn from_u128(bits: u128) -> Self {
        let mut p = BinaryPolynomial {
            words: vec![bits as u64, (bits >> 64) as u64],
        };
        p.trim();
        p
    }

    /// `x^e1 + x^e2 + ...`; repeated exponents cancel.
    pub fn from_exponents(exponents: &[usize]) -> Self {
        let mut p = Self::zero();
        for &e in exponents {
            p.flip(e);
        }
        p
    }

    /// Coefficient `i` is `bits[i] != 0`.
    pub fn from_bits(bits: &[u8]) -> Self {
        let mut p = BinaryPolynomial {
            words: vec![0; bits.len().div_ceil(64)],
        };
        for (i, _) in bits.iter().enumerate().filter(|(_, &b)| b != 0) {
            p.words[i / 64] |= 1 << (i % 64);
        }
        p.trim();
        p
    }

    /// `x^e`.
    pub fn monomial(e: usize) -> Self {
        Self::from_exponents(&[e])
    }

    fn trim(&mut self) {
        while self.words.last() == Some(&0) {
            self.words.pop();
        }
    }

    pub fn is_zero(&self) -> bool {
        self.words.is_empty()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        let top = *self.words.last()?;
        Some((self.words.len() - 1) * 64 + 63 - top.leading_zeros() as usize)
    }

    pub fn coeff(&self, i: usize) -> u8 {
        self.words
            .get(i / 64)
            .map_or(0, |w| ((w >> (i % 64)) & 1) as u8)
    }

    fn flip(&mut self, i: usize) {
        if self.words.len() <= i / 64 {
            self.words.resize(i / 64 + 1, 0);
        }
        self.words[i / 64] ^= 1 << (i % 64);
        self.trim();
    }

    /// Coefficients `0..len` as bytes (zero padded).
    pub fn to_bits(&self, len: usize) -> Vec<u8> {
        (0..len).map(|i| self.coeff(i)).collect()
    }

    /// Low 128 coefficients packed into an integer.
    pub fn to_u128(&self) -> u128 {
        let lo = self.words.first().copied().unwrap_or(0) as u128;
        let hi = self.words.get(1).copied().unwrap_or(0) as u128;
        lo | (hi << 64)
    }

    pub fn weight(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// `self ^= other · x^shift`.
    fn xor_shifted(&mut self, other: &BinaryPolynomial, shift: usize) {
        if other.is_zero() {
            return;
        }
        let word_shift = shift / 64;
        let bit_shift = shift % 64;
        let needed = other.words.len() + word_shift + 1;
        if self.words.len() < needed {
            self.words.resize(needed, 0);
        }
        for (i, &w) in other.words.iter().enumerate() {
            self.words[i + word_shift] ^= w << bit_shift;
            if bit_shift != 0 {
                self.words[i + word_shift + 1] ^= w >> (64 - bit_shift);
            }
        }
        self.trim();
    }

    pub fn add(&self, other: &BinaryPolynomial) -> BinaryPolynomial {
        let mut out = self.clone();
        out.xor_shifted(other, 0);
        out
    }

    pub fn mul(&self, other: &BinaryPolynomial) -> BinaryPolynomial {
        let mut out = BinaryPolynomial::zero();
        let Some(deg) = self.degree() else {
            return out;
        };
        for i in (0..=deg).filter(|&i| self.coeff(i) == 1) {
            out.xor_shifted(other, i);
        }
        out
    }

    /// Long division: returns `(q, r)` with `self = divisor·q + r`, `deg r < deg divisor`.
    pub fn divmod(
        &self,
        divisor: &BinaryPolynomial,
    ) -> Result<(BinaryPolynomial, BinaryPolynomial)> {
        let dd = divisor.degree().ok_or(Error::DivisionByZero)?;
        let mut rem = self.clone();
        let mut quot = BinaryPolynomial::zero();
        while let Some(dr) = rem.degree() {
            if dr < dd {
                break;
            }
            quot.flip(dr - dd);
            rem.xor_shifted(divisor, dr - dd);
        }
        Ok((quot, rem))
    }

    pub fn rem(&self, divisor: &BinaryPolynomial) -> Result<BinaryPolynomial> {
        self.divmod(divisor).map(|(_, r)| r)
    }

    pub fn gcd(&self, other: &BinaryPolynomial) -> BinaryPolynomial {
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let r = a.rem(&b).expect("nonzero divisor");
            a = b;
            b = r;
        }
        a
    }
}

impl fmt::Display for BinaryPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let Some(deg) = self.degree() else {
            return write!(f, "0");
        };
        let terms: Vec<String> = (0..=deg)
            .rev()
            .filter(|&i| self.coeff(i) == 1)
            .map(|i| match i {
                0 => "1".to_string(),
                1 => "x".to_string(),
                _ => format!("x^{i}"),
            })
            .collect();
        write!(f, "{}", terms.join(" + "))
    }
}

impl fmt::Debug for BinaryPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BinaryPolynomial({self})")
    }
}

/// Default primitive polynomials, bit `i` = coefficient of `x^i`, indexed by m.
const PRIMITIVE_POLYNOMIALS: [u64; 33] = [
    0,
    0b11,          // x + 1
    0b111,         // x^2 + x + 1
    0b1011,        // x^3 + x + 1
    0b1_0011,      // x^4 + x + 1
    0b10_0101,     // x^5 + x^2 + 1
    0b100_0011,    // x^6 + x + 1
    0b1000_1001,   // x^7 + x^3 + 1
    0x11d,         // x^8 + x^4 + x^3 + x^2 + 1
    0x211,         // x^9 + x^4 + 1
    0x409,         // x^10 + x^3 + 1
    0x805,         // x^11 + x^2 + 1
    0x1053,        // x^12 + x^6 + x^4 + x + 1
    0x201b,        // x^13 + x^4 + x^3 + x + 1
    0x4443,        // x^14 + x^10 + x^6 + x + 1
    0x8003,        // x^15 + x + 1
    0x1100b,       // x^16 + x^12 + x^3 + x + 1
    0x20009,       // x^17 + x^3 + 1
    0x40081,       // x^18 + x^7 + 1
    0x80027,       // x^19 + x^5 + x^2 + x + 1
    0x100009,      // x^20 + x^3 + 1
    0x200005,      // x^21 + x^2 + 1
    0x400003,      // x^22 + x + 1
    0x800021,      // x^23 + x^5 + 1
    0x1000087,     // x^24 + x^7 + x^2 + x + 1
    0x2000009,     // x^25 + x^3 + 1
    0x4000047,     // x^26 + x^6 + x^2 + x + 1
    0x8000027,     // x^27 + x^5 + x^2 + x + 1
    0x10000009,    // x^28 + x^3 + 1
    0x20000005,    // x^29 + x^2 + 1
    0x40800007,    // x^30 + x^23 + x^2 + x + 1
    0x80000009,    // x^31 + x^3 + 1
    0x1_0040_0007, // x^32 + x^22 + x^2 + x + 1
];

/// Largest extension degree served by [`default_primitive_polynomial`].
pub const MAX_EXTENSION_DEGREE: u32 = 32;

/// Largest extension degree for which [`GaloisField`] builds log tables.
pub const MAX_TABLE_DEGREE: u32 = 16;

/// The built-in primitive polynomial of degree `m` (1..=32).
pub fn default_primitive_polynomial(m: u32) -> Result<BinaryPolynomial> {
    if !(1..=MAX_EXTENSION_DEGREE).contains(&m) {
        return Err(Error::InvalidParameter(format!(
            "extension degree {m} outside 1..={MAX_EXTENSION_DEGREE}"
        )));
    }
    Ok(BinaryPolynomial::from_u64(
        PRIMITIVE_POLYNOMIALS[m as usize],
    ))
}

/// GF(2^m) for m ≤ 16 with log/antilog tables.
///
/// Elements are integers whose bit `i` is the coefficient of `α^i` in the
/// polynomial basis.
#[derive(Clone, Debug)]
pub struct GaloisField {
    m: u32,
    primitive: BinaryPolynomial,
    /// `antilog[i] = α^i` for `0 <= i < 2^m - 1`.
    antilog: Vec<u32>,
    /// `log[x]` for nonzero `x`; `log[0]` is unused.
    log: Vec<u32>,
}

impl GaloisField {
    /// Builds the field, verifying that `primitive` really generates a cyclic
    /// group of order `2^m - 1`.
    pub fn new(m: u32, primitive: BinaryPolynomial) -> Result<Self> {
        let not_primitive = |reason: String| Error::NotPrimitive {
            poly: primitive.to_string(),
            m,
            reason,
        };
        if !(1..=MAX_TABLE_DEGREE).contains(&m) {
            return Err(Error::InvalidParameter(format!(
                "table field degree {m} outside 1..={MAX_TABLE_DEGREE}"
            )));
        }
        if primitive.degree() != Some(m as usize) {
            return Err(not_primitive(format!("degree is {:?}", primitive.degree())));
        }
        let poly = primitive.to_u128() as u32;
        let order = (1u32 << m) - 1;
        let mut antilog = vec![0u32; order as usize];
        let mut log = vec![u32::MAX; 1 << m];
        let mut x = 1u32;
        for i in 0..order {
            if x == 0 || log[x as usize] != u32::MAX {
                return Err(not_primitive(format!("α has order {i}")));
            }
            antilog[i as usize] = x;
            log[x as usize] = i;
            x <<= 1;
            if x & (1 << m) != 0 {
                x ^= poly;
            }
        }
        if x != 1 {
            return Err(not_primitive("α^(2^m-1) != 1".into()));
        }
        Ok(GaloisField {
            m,
            primitive,
            antilog,
            log,
        })
    }

    /// Field with the built-in primitive polynomial of degree `m`.
    pub fn with_default_polynomial(m: u32) -> Result<Self> {
        Self::new(m, default_primitive_polynomial(m)?)
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn primitive_polynomial(&self) -> &BinaryPolynomial {
        &self.primitive
    }

    /// Multiplicative group order `2^m - 1`.
    pub fn order(&self) -> u32 {
        self.antilog.len() as u32
    }

    /// `α^e` for any integer exponent.
    pub fn alpha_pow(&self, e: i64) -> u32 {
        self.antilog[e.rem_euclid(self.order() as i64) as usize]
    }

    /// Discrete log of a nonzero element.
    pub fn log(&self, x: u32) -> Option<u32> {
        (x != 0 && (x as usize) < self.log.len()).then(|| self.log[x as usize])
    }

    pub fn mul(&self, a: u32, b: u32) -> u32 {
        if a == 0 || b == 0 {
            return 0;
        }
        let s = self.log[a as usize] + self.log[b as usize];
        self.antilog[(s % self.order()) as usize]
    }

    pub fn inv(&self, a: u32) -> Option<u32> {
        let l = self.log(a)?;
        Some(self.antilog[((self.order() - l) % self.order()) as usize])
    }

    /// Evaluates a binary polynomial at a field element.
    pub fn eval(&self, p: &BinaryPolynomial, x: u32) -> u32 {
        let Some(deg) = p.degree() else { return 0 };
        (0..=deg)
            .rev()
            .fold(0, |acc, i| self.mul(acc, x) ^ p.coeff(i) as u32)
    }

    /// Exponents of the cyclotomic coset `{e·2^i mod (2^m - 1)}`, in generation order.
    pub fn cyclotomic_coset(&self, exponent: u32) -> Vec<u32> {
        cyclotomic_coset(exponent, self.order())
    }

    /// Minimal polynomial of `α^exponent` over GF(2).
    pub fn minimal_polynomial(&self, exponent: u32) -> BinaryPolynomial {
        let roots: Vec<u32> = self
            .cyclotomic_coset(exponent)
            .into_iter()
            .map(|e| self.alpha_pow(e as i64))
            .collect();
        product_of_linear_factors(&roots, |a, b| self.mul(a, b))
            .expect("conjugate-closed root set yields binary coefficients")
    }
}

/// Free-standing form of [`GaloisField::minimal_polynomial`].
pub fn minimal_polynomial(field: &GaloisField, exponent: u32) -> BinaryPolynomial {
    field.minimal_polynomial(exponent)
}

/// `{e·2^i mod modulus}` in generation order.
pub fn cyclotomic_coset(exponent: u32, modulus: u32) -> Vec<u32> {
    let start = exponent % modulus;
    let mut coset = vec![start];
    let mut e = ((start as u64 * 2) % modulus as u64) as u32;
    while e != start {
        coset.push(e);
        e = ((e as u64 * 2) % modulus as u64) as u32;
    }
    coset
}

/// `∏ (x + root)` computed in the extension field; fails if any coefficient
/// falls outside GF(2).
fn product_of_linear_factors(
    roots: &[u32],
    mul: impl Fn(u32, u32) -> u32,
) -> Result<BinaryPolynomial> {
    // coeffs[i] is the coefficient of x^i
    let mut coeffs = vec![1u32];
    for &root in roots {
        let mut next = vec![0u32; coeffs.len() + 1];
        for (i, &c) in coeffs.iter().enumerate() {
            next[i + 1] ^= c;
            next[i] ^= mul(c, root);
        }
        coeffs = next;
    }
    if let Some(c) = coeffs.iter().find(|&&c| c > 1) {
        return Err(Error::InvalidCode(format!(
            "root set is not closed under conjugation (coefficient {c:#x})"
        )));
    }
    let bits: Vec<u8> = coeffs.iter().map(|&c| c as u8).collect();
    Ok(BinaryPolynomial::from_bits(&bits))
}

/// Table-free GF(2^m) arithmetic for m ≤ 32, used where the field is too
/// large for log tables (e.g. the degree-23 field of the length-47 QR code).
#[derive(Clone, Copy, Debug)]
pub(crate) struct ModularField {
    m: u32,
    modulus: u64,
}

impl ModularField {
    pub(crate) fn new(m: u32) -> Result<Self> {
        let modulus = PRIMITIVE_POLYNOMIALS
            .get(m as usize)
            .copied()
            .filter(|&p| p != 0)
            .ok_or_else(|| Error::InvalidParameter(format!("no built-in field of degree {m}")))?;
        Ok(ModularField { m, modulus })
    }

    pub(crate) fn mul(&self, a: u32, b: u32) -> u32 {
        let (a, b) = (a as u64, b as u64);
        let mut prod = 0u64;
        for i in 0..self.m {
            if (b >> i) & 1 == 1 {
                prod ^= a << i;
            }
        }
        for i in (self.m..2 * self.m).rev() {
            if (prod >> i) & 1 == 1 {
                prod ^= self.modulus << (i - self.m);
            }
        }
        prod as u32
    }

    pub(crate) fn pow(&self, base: u32, mut e: u64) -> u32 {
        let (mut acc, mut b) = (1u32, base);
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, b);
            }
            b = self.mul(b, b);
            e >>= 1;
        }
        acc
    }

    /// `∏ (x + root)` with binary coefficients.
    pub(crate) fn product_of_linear_factors(&self, roots: &[u32]) -> Result<BinaryPolynomial> {
        product_of_linear_factors(roots, |a, b| self.mul(a, b))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(exps: &[usize]) -> BinaryPolynomial {
        BinaryPolynomial::from_exponents(exps)
    }

    #[test]
    fn degree_and_display() {
        assert_eq!(BinaryPolynomial::zero().degree(), None);
        assert_eq!(BinaryPolynomial::one().degree(), Some(0));
        assert_eq!(p(&[130, 3]).degree(), Some(130));
        assert_eq!(p(&[3, 1, 0]).to_string(), "x^3 + x + 1");
        assert_eq!(p(&[2, 2]), BinaryPolynomial::zero());
    }

    #[test]
    fn divmod_examples() {
        let a = p(&[5, 2, 0]);
        assert_eq!(
            a.divmod(&BinaryPolynomial::one()).unwrap(),
            (a.clone(), BinaryPolynomial::zero())
        );
        assert_eq!(
            p(&[3, 1, 0]).divmod(&p(&[1, 0])).unwrap(),
            (p(&[2, 1]), p(&[0]))
        );
        assert_eq!(
            p(&[2, 0]).divmod(&p(&[1, 0])).unwrap(),
            (p(&[1, 0]), BinaryPolynomial::zero())
        );
        assert!(matches!(
            a.divmod(&BinaryPolynomial::zero()),
            Err(Error::DivisionByZero)
        ));
    }

    #[test]
    fn divmod_recomposes_exhaustively_up_to_degree_8() {
        // every a of degree <= 8 against every nonzero b of degree <= 4,
        // plus a sample of larger divisors
        for a in 0u64..512 {
            for b in (1u64..32).chain([0x1ff, 0x13b, 0x100]) {
                let (pa, pb) = (BinaryPolynomial::from_u64(a), BinaryPolynomial::from_u64(b));
                let (q, r) = pa.divmod(&pb).unwrap();
                assert_eq!(pb.mul(&q).add(&r), pa);
                assert!(r.degree().map_or(true, |dr| dr < pb.degree().unwrap()));
            }
        }
    }

    #[test]
    fn multiword_shift_arithmetic() {
        let a = p(&[100, 64, 63, 0]);
        let b = p(&[70, 1]);
        let prod = a.mul(&b);
        assert_eq!(prod.degree(), Some(170));
        let (q, r) = prod.divmod(&b).unwrap();
        assert_eq!((q, r), (a, BinaryPolynomial::zero()));
    }

    #[test]
    fn gf2_trivial_field() {
        let f = GaloisField::new(1, p(&[1, 0])).unwrap();
        assert_eq!(f.order(), 1);
        assert_eq!(f.alpha_pow(0), 1);
        assert_eq!(f.mul(1, 1), 1);
    }

    #[test]
    fn gf16_table_walk() {
        let f = GaloisField::new(4, p(&[4, 1, 0])).unwrap();
        // α^4 = α + 1
        assert_eq!(f.alpha_pow(4), 0b0011);
        assert_eq!(f.alpha_pow(15), 1);
        assert_eq!(f.order(), 15);
    }

    #[test]
    fn rejects_non_primitive() {
        // x^4 + x^3 + x^2 + x + 1 is irreducible but α has order 5
        assert!(matches!(
            GaloisField::new(4, p(&[4, 3, 2, 1, 0])),
            Err(Error::NotPrimitive { .. })
        ));
        // reducible: x^4 + 1
        assert!(GaloisField::new(4, p(&[4, 0])).is_err());
        // wrong degree
        assert!(GaloisField::new(4, p(&[3, 1, 0])).is_err());
    }

    #[test]
    fn all_default_table_fields_are_primitive() {
        for m in 1..=MAX_TABLE_DEGREE {
            let f = GaloisField::with_default_polynomial(m).unwrap();
            assert_eq!(f.order(), (1 << m) - 1);
            for x in 1..(1u32 << m).min(4096) {
                assert_eq!(f.alpha_pow(f.log(x).unwrap() as i64), x);
            }
            for i in 0..f.order().min(4096) {
                assert_eq!(f.log(f.alpha_pow(i as i64)), Some(i));
            }
        }
    }

    #[test]
    fn gf64_has_63_nonzero_elements() {
        let f = GaloisField::with_default_polynomial(6).unwrap();
        let mut seen: Vec<u32> = (0..63).map(|i| f.alpha_pow(i)).collect();
        seen.sort_unstable();
        seen.dedup();
        assert_eq!(seen.len(), 63);
        assert!(!seen.contains(&0));
    }

    #[test]
    fn modular_field_matches_tables() {
        for m in [3u32, 8, 11, 16] {
            let tf = GaloisField::with_default_polynomial(m).unwrap();
            let mf = ModularField::new(m).unwrap();
            for a in (1..(1u32 << m)).step_by(97) {
                for b in (1..(1u32 << m)).step_by(89) {
                    assert_eq!(mf.mul(a, b), tf.mul(a, b));
                }
            }
            assert_eq!(mf.pow(2, (1u64 << m) - 1), 1);
        }
    }

    #[test]
    fn large_default_polynomials_give_full_order() {
        // α^(2^m - 1) = 1 and α^((2^m - 1)/q) != 1 for each prime q dividing 2^m - 1
        fn prime_factors(mut n: u64) -> Vec<u64> {
            let mut out = Vec::new();
            let mut d = 2;
            while d * d <= n {
                if n % d == 0 {
                    out.push(d);
                    while n % d == 0 {
                        n /= d;
                    }
                }
                d += 1;
            }
            if n > 1 {
                out.push(n);
            }
            out
        }
        for m in 17..=MAX_EXTENSION_DEGREE {
            let f = ModularField::new(m).unwrap();
            let order = (1u64 << m) - 1;
            assert_eq!(f.pow(2, order), 1, "m = {m}");
            for q in prime_factors(order) {
                assert_ne!(f.pow(2, order / q), 1, "m = {m}, q = {q}");
            }
        }
    }

    #[test]
    fn minimal_polynomial_examples() {
        let f16 = GaloisField::with_default_polynomial(4).unwrap();
        assert_eq!(f16.minimal_polynomial(0), p(&[1, 0]));
        assert_eq!(f16.minimal_polynomial(1), p(&[4, 1, 0]));
        assert_eq!(f16.minimal_polynomial(3), p(&[4, 3, 2, 1, 0]));
        assert_eq!(f16.cyclotomic_coset(3), vec![3, 6, 12, 9]);
    }

    /// Independent route: the lowest-degree binary polynomial vanishing at
    /// α^e, found by brute-force enumeration of all monic polynomials.
    fn brute_minimal(f: &GaloisField, e: u32) -> BinaryPolynomial {
        let x = f.alpha_pow(e as i64);
        for deg in 1..=f.m() {
            for low in 0..(1u64 << deg) {
                let cand = BinaryPolynomial::from_u64((1 << deg) | low);
                if f.eval(&cand, x) == 0 {
                    return cand;
                }
            }
        }
        unreachable!()
    }

    #[test]
    fn minimal_polynomials_match_brute_force() {
        for m in 2..=7 {
            let f = GaloisField::with_default_polynomial(m).unwrap();
            for e in 0..f.order() {
                let mp = f.minimal_polynomial(e);
                assert_eq!(mp, brute_minimal(&f, e), "m = {m}, e = {e}");
                assert_eq!(f.eval(&mp, f.alpha_pow(e as i64)), 0);
                assert_eq!(m as usize % mp.degree().unwrap(), 0);
            }
        }
    }
}
