//! Generalized parallel concatenated block codes.
//!
//! `N = M·k` message bits are split into `M` sub-blocks of `k`. The first
//! encoder adds the parity of every direct sub-block, the second the parity
//! of every sub-block of the interleaved message. The transmitted word is
//! `[message | P1 | P2]`, of length `L = M·(n1 + n2 − k)`.

use std::fmt;

use crate::cyclic::CyclicCode;
use crate::error::{Error, Result};
use crate::interleaver::{Interleaver, InterleaverKind};
use crate::word::{check_len, HardWord};

/// Exact code rate as a reduced fraction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Rate {
    num: u64,
    den: u64,
}

impl Rate {
    pub fn new(num: u64, den: u64) -> Result<Self> {
        if den == 0 || num == 0 {
            return Err(Error::InvalidParameter(format!(
                "rate {num}/{den} is degenerate"
            )));
        }
        let g = gcd(num, den);
        Ok(Rate {
            num: num / g,
            den: den / g,
        })
    }

    pub fn numerator(&self) -> u64 {
        self.num
    }

    pub fn denominator(&self) -> u64 {
        self.den
    }

    pub fn as_f64(&self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

impl fmt::Display for Rate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

#[derive(Clone, Debug)]
pub struct GpcbCode {
    c1: CyclicCode,
    c2: CyclicCode,
    m: usize,
    interleaver: Interleaver,
}

impl GpcbCode {
    pub fn new(c1: CyclicCode, c2: CyclicCode, m: usize, interleaver: Interleaver) -> Result<Self> {
        if c1.k() != c2.k() {
            return Err(Error::InvalidCode(format!(
                "component codes must share k (got {} and {})",
                c1.k(),
                c2.k()
            )));
        }
        if m == 0 {
            return Err(Error::InvalidParameter(
                "sub-block count M must be at least 1".into(),
            ));
        }
        if interleaver.len() != m * c1.k() {
            return Err(Error::InvalidInterleaver(format!(
                "interleaver size {} differs from M·k = {}",
                interleaver.len(),
                m * c1.k()
            )));
        }
        Ok(GpcbCode {
            c1,
            c2,
            m,
            interleaver,
        })
    }

    /// Builds the interleaver on the `M × k` message matrix.
    pub fn with_kind(
        c1: CyclicCode,
        c2: CyclicCode,
        m: usize,
        kind: InterleaverKind,
        seed: u64,
    ) -> Result<Self> {
        let interleaver = Interleaver::new(kind, m, c1.k(), seed)?;
        Self::new(c1, c2, m, interleaver)
    }

    pub fn c1(&self) -> &CyclicCode {
        &self.c1
    }

    pub fn c2(&self) -> &CyclicCode {
        &self.c2
    }

    pub fn k(&self) -> usize {
        self.c1.k()
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn interleaver(&self) -> &Interleaver {
        &self.interleaver
    }

    /// Message length `N = M·k`.
    pub fn info_len(&self) -> usize {
        self.m * self.k()
    }

    pub fn p1_len(&self) -> usize {
        self.m * self.c1.parity_len()
    }

    pub fn p2_len(&self) -> usize {
        self.m * self.c2.parity_len()
    }

    /// Codeword length `L`.
    pub fn len(&self) -> usize {
        self.info_len() + self.p1_len() + self.p2_len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn rate(&self) -> Rate {
        gpcb_rate(self)
    }

    /// `GPCB-<family>(L, N)` when both components share a family.
    pub fn name(&self) -> String {
        let family = |c: &CyclicCode| {
            c.name()
                .split('-')
                .next()
                .unwrap_or("")
                .to_ascii_uppercase()
        };
        let (f1, f2) = (family(&self.c1), family(&self.c2));
        let tag = if f1 == f2 { f1 } else { format!("{f1}/{f2}") };
        format!("GPCB-{tag}({}, {})", self.len(), self.info_len())
    }

    pub fn encode(&self, message: &[u8]) -> Result<HardWord> {
        gpcb_encode(self, message)
    }
}

impl fmt::Display for GpcbCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} from {} + {}, M = {}, {} interleaver",
            self.name(),
            self.c1.name(),
            self.c2.name(),
            self.m,
            self.interleaver.kind()
        )
    }
}

/// `k / (n1 + n2 − k)`.
pub fn gpcb_rate(code: &GpcbCode) -> Rate {
    let k = code.k() as u64;
    Rate::new(k, (code.c1.n() + code.c2.n()) as u64 - k).expect("components have k >= 1")
}

/// `[message | P1 | P2]`.
pub fn gpcb_encode(code: &GpcbCode, message: &[u8]) -> Result<HardWord> {
    check_len(code.info_len(), message.len())?;
    let k = code.k();
    let interleaved = code.interleaver.interleave(message)?;
    let mut out = Vec::with_capacity(code.len());
    out.extend_from_slice(message);
    for (c, source) in [(&code.c1, message), (&code.c2, &interleaved[..])] {
        let np = c.parity_len();
        for block in source.chunks(k) {
            let parity = c.parity_of(block);
            out.extend((0..np).map(|j| (parity >> j & 1) as u8));
        }
    }
    Ok(HardWord::from(out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cyclic::code_by_name;
    use proptest::prelude::*;

    fn twin(name: &str, m: usize, kind: InterleaverKind) -> GpcbCode {
        let c = code_by_name(name).unwrap();
        GpcbCode::with_kind(c.clone(), c, m, kind, 1).unwrap()
    }

    #[test]
    fn published_lengths() {
        // (component, M, L, N); the M = 200 BCH(63,51) length follows the formula
        let rows = [
            ("bch-63-51", 1, 75, 51),
            ("bch-63-51", 10, 750, 510),
            ("bch-63-51", 100, 7500, 5100),
            ("bch-63-51", 200, 15000, 10200),
            ("qr-47-24", 1, 70, 24),
            ("qr-47-24", 10, 700, 240),
            ("qr-47-24", 100, 7000, 2400),
            ("qr-47-24", 200, 14000, 4800),
            ("bch-127-106", 1, 148, 106),
            ("bch-127-106", 10, 1480, 1060),
            ("bch-127-106", 100, 14800, 10600),
            ("bch-127-106", 200, 29600, 21200),
            ("bch-255-215", 1, 295, 215),
            ("bch-255-215", 10, 2950, 2150),
            ("bch-255-215", 100, 29500, 21500),
            ("bch-255-215", 200, 59000, 43000),
        ];
        for (name, m, l, n) in rows {
            let g = twin(name, m, InterleaverKind::Identity);
            assert_eq!((g.len(), g.info_len()), (l, n), "{name} M={m}");
            assert_eq!(g.rate().as_f64(), n as f64 / l as f64);
        }
    }

    #[test]
    fn rates() {
        assert_eq!(
            twin("bch-63-51", 1, InterleaverKind::Identity).rate(),
            Rate::new(51, 75).unwrap()
        );
        assert_eq!(
            twin("bch-63-51", 1, InterleaverKind::Identity)
                .rate()
                .as_f64(),
            0.68
        );
        assert_eq!(
            twin("qr-47-24", 1, InterleaverKind::Identity)
                .rate()
                .to_string(),
            "12/35"
        );
        assert_eq!(
            twin("bch-63-51", 1, InterleaverKind::Identity).rate(),
            twin("bch-63-51", 200, InterleaverKind::Block).rate()
        );
        assert_eq!(
            twin("bch-63-51", 10, InterleaverKind::Block).name(),
            "GPCB-BCH(750, 510)"
        );
    }

    #[test]
    fn single_block_identity_repeats_the_parity() {
        let g = twin("bch-63-51", 1, InterleaverKind::Identity);
        let msg: Vec<u8> = (0..51).map(|i| ((i * 7 + 3) % 5 == 0) as u8).collect();
        let cw = g.encode(&msg).unwrap();
        assert_eq!(cw.len(), 75);
        assert_eq!(&cw[..51], &msg[..]);
        assert_eq!(&cw[51..63], &cw[63..75]);
        let direct = g.c1().encode_systematic(&HardWord::from(msg)).unwrap();
        assert_eq!(&cw[51..63], &direct[..12]);
        assert!(g.c1().is_codeword(&direct));
    }

    #[test]
    fn parity_fields_follow_the_interleaver() {
        let g = twin("bch-15-7", 3, InterleaverKind::SRandom);
        let msg: Vec<u8> = (0..21).map(|i| (i % 3 == 1) as u8).collect();
        let cw = g.encode(&msg).unwrap();
        let pi = g.interleaver().interleave(&msg).unwrap();
        for b in 0..3 {
            let mut w1 = cw[21 + 8 * b..21 + 8 * (b + 1)].to_vec();
            w1.extend_from_slice(&msg[7 * b..7 * (b + 1)]);
            assert!(g.c1().is_codeword(&w1));
            let mut w2 = cw[45 + 8 * b..45 + 8 * (b + 1)].to_vec();
            w2.extend_from_slice(&pi[7 * b..7 * (b + 1)]);
            assert!(g.c2().is_codeword(&w2));
        }
    }

    #[test]
    fn zero_message_and_errors() {
        let g = twin("qr-47-24", 2, InterleaverKind::Random);
        assert_eq!(g.encode(&[0; 48]).unwrap().weight(), 0);
        assert!(g.encode(&[0; 47]).is_err());
        let a = code_by_name("bch-15-7").unwrap();
        let b = code_by_name("bch-31-21").unwrap();
        assert!(GpcbCode::with_kind(a.clone(), b, 1, InterleaverKind::Identity, 0).is_err());
        assert!(
            GpcbCode::with_kind(a.clone(), a.clone(), 0, InterleaverKind::Identity, 0).is_err()
        );
        let wrong = Interleaver::new(InterleaverKind::Identity, 1, 8, 0).unwrap();
        assert!(GpcbCode::new(a.clone(), a, 1, wrong).is_err());
    }

    #[test]
    fn unequal_lengths_with_shared_k() {
        let c1 = code_by_name("qr-7-4").unwrap();
        // (15, 4) simplex code: generator (x^15 + 1) / (x^4 + x + 1)
        use crate::algebra::BinaryPolynomial;
        let full = BinaryPolynomial::from_exponents(&[15, 0]);
        let (g, rem) = full
            .divmod(&BinaryPolynomial::from_exponents(&[4, 1, 0]))
            .unwrap();
        assert!(rem.is_zero());
        let c2 = crate::cyclic::CyclicCode::from_generator("simplex-15-4", 15, 8, g).unwrap();
        let g = GpcbCode::with_kind(c1, c2, 2, InterleaverKind::Block, 0).unwrap();
        assert_eq!(g.len(), 2 * (7 + 15 - 4));
        assert_eq!(g.rate(), Rate::new(4, 18).unwrap());
        let msg = [1, 0, 1, 1, 0, 0, 1, 0];
        let cw = g.encode(&msg).unwrap();
        assert_eq!(cw.len(), 36);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn encoding_is_linear(a in proptest::collection::vec(0u8..2, 153), b in proptest::collection::vec(0u8..2, 153), seed: u64) {
            let c = code_by_name("bch-63-51").unwrap();
            let g = GpcbCode::with_kind(c.clone(), c, 3, InterleaverKind::Random, seed).unwrap();
            let sum: Vec<u8> = a.iter().zip(&b).map(|(x, y)| x ^ y).collect();
            let lhs = g.encode(&sum).unwrap();
            let rhs = g.encode(&a).unwrap().xor(&g.encode(&b).unwrap()).unwrap();
            prop_assert_eq!(lhs, rhs);
        }
    }
}
