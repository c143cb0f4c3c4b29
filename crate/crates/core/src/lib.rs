//! Iterative decoding of generalized parallel concatenated block (GPCB) codes
//! built from binary cyclic component codes.
//!
//! The component decoder is a soft-input hard-output search over cyclic
//! shifts of the received word and Chase-style test patterns on the least
//! reliable information bits, with a threshold early exit. Its hard decision
//! is turned into extrinsic information through an empirically calibrated
//! confidence value, and two such decoders exchange extrinsics through the
//! GPCB interleaver.

pub mod algebra;
pub mod channel;
pub mod cyclic;
pub mod error;
pub mod gpcb;
pub mod interleaver;
pub mod shannon;
pub mod siho;
pub mod sim;
pub mod soft_output;
pub mod turbo;
pub mod word;

pub use algebra::{minimal_polynomial, BinaryPolynomial, GaloisField};
pub use channel::{awgn_add, bpsk_modulate, sigma_from_ebn0, Role, StreamKey};
pub use cyclic::{build_bch, build_qr, code_by_name, CyclicCode, REGISTERED_CODES};
pub use error::{Error, Result};
pub use gpcb::{gpcb_encode, gpcb_rate, GpcbCode, Rate};
pub use interleaver::{Interleaver, InterleaverKind};
pub use shannon::{shannon_limit, Capacity};
pub use siho::{siho_decode, DecodeResult, DecoderConfig, SihoDecoder, Threshold};
pub use sim::{ebn0_at_ber, run_ber, sweep, BerRecord, ChannelConfig, FrameCodec, Uncoded};
pub use soft_output::{
    aposteriori, calibrate_confidence, destructive_distance, extrinsic_vector, CalibrationSpec,
    ConfidenceTable,
};
pub use turbo::{turbo_decode, OutputTap, TurboConfig, TurboDecoder};
pub use word::{CyclicShift, HardWord, SoftWord};
