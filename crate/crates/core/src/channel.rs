//! BPSK over AWGN with counter-based noise streams.
//!
//! Every random draw of a simulation comes from a ChaCha stream keyed by
//! `(seed, frame, role)`, so a frame sees the same message and noise whether
//! it runs first, last or on another thread.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::word::{HardWord, SoftWord};

/// What a random stream is used for within one frame.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Role {
    Message = 0,
    Noise = 1,
}

const ROLES: u64 = 4;

/// Identifies one deterministic random stream.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct StreamKey {
    pub seed: u64,
    pub frame: u64,
    pub role: Role,
}

impl StreamKey {
    pub fn new(seed: u64, frame: u64, role: Role) -> Self {
        StreamKey { seed, frame, role }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.frame * ROLES + self.role as u64);
        rng
    }
}

/// Noise standard deviation for unit-energy BPSK at a given Eb/N0 (dB)
/// per information bit: `σ² = 1 / (2·R·10^(Eb/N0/10))`.
pub fn sigma_from_ebn0(rate: f64, ebn0_db: f64) -> Result<f64> {
    if !(rate > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "code rate {rate} must be positive"
        )));
    }
    Ok((1.0 / (2.0 * rate * 10f64.powf(ebn0_db / 10.0))).sqrt())
}

/// Bit 0 → +1.0, bit 1 → −1.0.
pub fn bpsk_modulate(bits: &HardWord) -> SoftWord {
    bits.to_bpsk()
}

/// Adds white Gaussian noise of standard deviation `sigma` drawn from `rng`.
pub fn awgn_add<R: Rng + ?Sized>(x: &SoftWord, sigma: f64, rng: &mut R) -> SoftWord {
    if sigma == 0.0 {
        return x.clone();
    }
    SoftWord::new(
        x.iter()
            .map(|&v| v + sigma * rng.sample::<f64, _>(StandardNormal))
            .collect(),
    )
}

/// [`awgn_add`] on the stream named by `key`.
pub fn awgn_add_stream(x: &SoftWord, sigma: f64, key: StreamKey) -> SoftWord {
    awgn_add(x, sigma, &mut key.rng())
}

/// Uniform random bits.
pub fn random_bits<R: Rng + ?Sized>(len: usize, rng: &mut R) -> HardWord {
    HardWord::from_bits((0..len).map(|_| rng.random::<bool>() as u8))
}
