//! Binary cyclic codes (BCH and quadratic residue) in systematic form.
//!
//! Codeword layout: parity occupies coordinates `0..n-k`, the message the
//! high-order coordinates `n-k..n`. The parity of message `m(x)` is
//! `x^(n-k)·m(x) mod g(x)`.

use std::fmt;

use crate::algebra::{cyclotomic_coset, BinaryPolynomial, GaloisField, ModularField};
use crate::error::{Error, Result};
use crate::word::{check_len, HardWord};

/// Widest parity field supported by the packed encoder.
pub const MAX_PARITY_BITS: usize = 128;

/// An `(n, k, d)` binary cyclic code with a systematic encoder.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CyclicCode {
    name: String,
    n: usize,
    k: usize,
    d: usize,
    generator: BinaryPolynomial,
    /// `parity_rows[i] = x^(n-k+i) mod g(x)`, packed.
    parity_rows: Vec<u128>,
}

impl CyclicCode {
    /// Builds a code from a generator polynomial dividing `x^n - 1`.
    ///
    /// `d` is informational only.
    pub fn from_generator(
        name: impl Into<String>,
        n: usize,
        d: usize,
        generator: BinaryPolynomial,
    ) -> Result<Self> {
        let deg = generator
            .degree()
            .ok_or_else(|| Error::InvalidCode("zero generator".into()))?;
        if deg >= n {
            return Err(Error::InvalidCode(format!(
                "generator degree {deg} leaves no message bits at length {n}"
            )));
        }
        if deg > MAX_PARITY_BITS {
            return Err(Error::InvalidCode(format!(
                "{deg} parity bits exceed the supported {MAX_PARITY_BITS}"
            )));
        }
        let xn1 = BinaryPolynomial::from_exponents(&[n, 0]);
        if !xn1.rem(&generator)?.is_zero() {
            return Err(Error::InvalidCode(format!(
                "generator {generator} does not divide x^{n} + 1"
            )));
        }
        let k = n - deg;
        let parity_rows = (0..k)
            .map(|i| {
                BinaryPolynomial::monomial(deg + i)
                    .rem(&generator)
                    .map(|r| r.to_u128())
            })
            .collect::<Result<Vec<u128>>>()?;
        Ok(CyclicCode {
            name: name.into(),
            n,
            k,
            d,
            generator,
            parity_rows,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Known or designed minimum distance (metadata; never used by decoders).
    pub fn d(&self) -> usize {
        self.d
    }

    pub fn parity_len(&self) -> usize {
        self.n - self.k
    }

    pub fn rate(&self) -> f64 {
        self.k as f64 / self.n as f64
    }

    pub fn generator(&self) -> &BinaryPolynomial {
        &self.generator
    }

    /// Coordinates carrying the message: `n-k..n`.
    pub fn info_positions(&self) -> std::ops::Range<usize> {
        self.n - self.k..self.n
    }

    pub(crate) fn parity_rows(&self) -> &[u128] {
        &self.parity_rows
    }

    /// Packed parity of a message given as bytes (nonzero = 1).
    #[inline]
    pub(crate) fn parity_of(&self, message: &[u8]) -> u128 {
        message
            .iter()
            .zip(&self.parity_rows)
            .filter(|(&b, _)| b != 0)
            .fold(0, |acc, (_, &row)| acc ^ row)
    }

    /// Systematic encoding: `[parity | message]`.
    pub fn encode_systematic(&self, message: &HardWord) -> Result<HardWord> {
        check_len(self.k, message.len())?;
        let parity = self.parity_of(message);
        let mut bits = Vec::with_capacity(self.n);
        bits.extend((0..self.parity_len()).map(|j| ((parity >> j) & 1) as u8));
        bits.extend_from_slice(message);
        Ok(HardWord::from_bits(bits))
    }

    /// Systematic encoding by explicit polynomial division.
    pub fn encode_by_division(&self, message: &HardWord) -> Result<HardWord> {
        check_len(self.k, message.len())?;
        let shifted = BinaryPolynomial::from_bits(message)
            .mul(&BinaryPolynomial::monomial(self.parity_len()));
        let parity = shifted.rem(&self.generator)?;
        Ok(HardWord::from_bits(parity.add(&shifted).to_bits(self.n)))
    }

    /// Message bits of a codeword.
    pub fn extract_message(&self, word: &HardWord) -> Result<HardWord> {
        check_len(self.n, word.len())?;
        Ok(HardWord::from_bits(
            word[self.info_positions()].iter().copied(),
        ))
    }

    /// Whether `word` is a codeword (its parity matches its message part).
    pub fn is_codeword(&self, word: &[u8]) -> bool {
        if word.len() != self.n {
            return false;
        }
        let parity = self.parity_of(&word[self.n - self.k..]);
        (0..self.parity_len()).all(|j| ((parity >> j) & 1) as u8 == (word[j] != 0) as u8)
    }
}

impl fmt::Display for CyclicCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({}, {}, {})", self.name, self.n, self.k, self.d)
    }
}

/// Narrow-sense primitive BCH code of length `2^m - 1` correcting `t` errors.
pub fn build_bch(m: u32, t: usize) -> Result<CyclicCode> {
    if t == 0 {
        return Err(Error::InvalidCode("BCH needs t >= 1".into()));
    }
    let field = GaloisField::with_default_polynomial(m)?;
    let n = field.order() as usize;
    if 2 * t >= n {
        return Err(Error::InvalidCode(format!(
            "t = {t} too large for BCH length {n}"
        )));
    }
    let mut covered = vec![false; n];
    let mut generator = BinaryPolynomial::one();
    for e in 1..=2 * t {
        if covered[e] {
            continue;
        }
        for c in field.cyclotomic_coset(e as u32) {
            covered[c as usize] = true;
        }
        generator = generator.mul(&field.minimal_polynomial(e as u32));
    }
    let deg = generator.degree().unwrap_or(0);
    if deg >= n {
        return Err(Error::InvalidCode(format!(
            "t = {t} leaves k <= 0 at length {n}"
        )));
    }
    let name = format!("bch-{}-{}", n, n - deg);
    CyclicCode::from_generator(name, n, 2 * t + 1, generator)
}

fn is_prime(n: usize) -> bool {
    n >= 2
        && (2..)
            .take_while(|d| d * d <= n)
            .all(|d| !n.is_multiple_of(d))
}

/// Multiplicative order of 2 modulo odd `n`.
fn order_of_two(n: usize) -> u32 {
    let mut x = 2 % n;
    let mut ord = 1;
    while x != 1 {
        x = (x * 2) % n;
        ord += 1;
    }
    ord
}

/// Known minimum distances of binary QR codes.
fn qr_distance(n: usize) -> usize {
    match n {
        7 => 3,
        17 => 5,
        23 => 7,
        31 => 7,
        41 => 9,
        47 => 11,
        71 => 11,
        73 => 13,
        79 => 15,
        89 => 17,
        97 => 15,
        103 => 19,
        113 => 15,
        127 => 19,
        // square-root bound
        _ => (n as f64).sqrt().ceil() as usize,
    }
}

/// Binary quadratic-residue code of prime length `n ≡ ±1 (mod 8)`.
///
/// The generator is `∏ (x - β^r)` over the quadratic residues `r`, where `β`
/// is `α^((2^m-1)/n)` for the built-in primitive element `α` of GF(2^m),
/// `m = ord_n(2)`.
pub fn build_qr(n: usize) -> Result<CyclicCode> {
    if !is_prime(n) || !(n % 8 == 1 || n % 8 == 7) {
        return Err(Error::InvalidCode(format!(
            "QR length {n} must be a prime with 2 a quadratic residue (n ≡ ±1 mod 8)"
        )));
    }
    if (n - 1) / 2 > MAX_PARITY_BITS {
        return Err(Error::InvalidCode(format!("QR length {n} too large")));
    }
    let m = order_of_two(n);
    let field = ModularField::new(m)
        .map_err(|_| Error::InvalidCode(format!("QR length {n} needs GF(2^{m}), unsupported")))?;
    let group_order = (1u64 << m) - 1;
    let beta = field.pow(2, group_order / n as u64);
    let mut residues: Vec<usize> = (1..n).map(|i| (i * i) % n).collect();
    residues.sort_unstable();
    residues.dedup();
    debug_assert!(cyclotomic_coset(1, n as u32)
        .iter()
        .all(|c| residues.contains(&(*c as usize))));
    let roots: Vec<u32> = residues
        .iter()
        .map(|&r| field.pow(beta, r as u64))
        .collect();
    let generator = field.product_of_linear_factors(&roots)?;
    let k = n.div_ceil(2);
    CyclicCode::from_generator(format!("qr-{n}-{k}"), n, qr_distance(n), generator)
}

/// Codes listed by the `codes` command.
pub const REGISTERED_CODES: &[&str] = &[
    "bch-15-7",
    "bch-31-21",
    "bch-63-51",
    "bch-127-106",
    "bch-255-215",
    "qr-7-4",
    "qr-17-9",
    "qr-23-12",
    "qr-31-16",
    "qr-47-24",
];

/// Looks up a code by name: `bch-<n>-<k>`, `qr-<n>-<k>` (alias `rq-...`),
/// or `golay-23-12`.
pub fn code_by_name(name: &str) -> Result<CyclicCode> {
    let unknown = || Error::UnknownCode {
        name: name.to_string(),
        known: REGISTERED_CODES.join(", "),
    };
    let lower = name.trim().to_ascii_lowercase();
    let parts: Vec<&str> = lower.split('-').collect();
    let [family, n, k] = parts[..] else {
        return Err(unknown());
    };
    let n: usize = n.parse().map_err(|_| unknown())?;
    let k: usize = k.parse().map_err(|_| unknown())?;
    match family {
        "bch" => {
            if !(n + 1).is_power_of_two() || n < 3 {
                return Err(unknown());
            }
            let m = (n + 1).trailing_zeros();
            for t in 1..n / 2 {
                let code = build_bch(m, t)?;
                if code.k() == k {
                    return Ok(code);
                }
                if code.k() < k {
                    break;
                }
            }
            Err(unknown())
        }
        "qr" | "rq" | "golay" => {
            if family == "golay" && n != 23 {
                return Err(unknown());
            }
            let code = build_qr(n).map_err(|_| unknown())?;
            if code.k() == k {
                Ok(code)
            } else {
                Err(unknown())
            }
        }
        _ => Err(unknown()),
    }
}
