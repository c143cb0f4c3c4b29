//! Monte-Carlo BER/FER measurement.
//!
//! Frames are simulated in parallel batches and merged in frame order, so the
//! early stop on accumulated bit errors lands on the same frame however many
//! threads run. Errors are counted on the information bits only.

use std::fmt::Write as _;
use std::io;
use std::path::Path;

use rayon::prelude::*;

use crate::channel::{awgn_add, bpsk_modulate, random_bits, sigma_from_ebn0, Role, StreamKey};
use crate::error::{Error, Result};
use crate::siho::SihoDecoder;
use crate::turbo::TurboDecoder;
use crate::word::HardWord;

pub const CSV_HEADER: &str =
    "ebn0_db,iteration,frames,bits,bit_errors,frame_errors,ber,fer,mean_test_sequences";

/// Decoder output for one frame.
#[derive(Clone, Debug, PartialEq)]
pub struct FrameResult {
    /// Message estimate after each iteration (a single entry for
    /// non-iterative decoders).
    pub decisions: Vec<HardWord>,
    pub test_sequences: u64,
    pub component_decodes: u64,
}

/// Anything that maps a message to a transmitted word and back.
pub trait FrameCodec: Sync {
    fn label(&self) -> String;
    fn info_len(&self) -> usize;
    fn code_len(&self) -> usize;
    /// Rate used to convert Eb/N0 into a noise level.
    fn rate(&self) -> f64;
    fn iterations(&self) -> usize {
        1
    }
    fn encode(&self, message: &[u8]) -> Result<HardWord>;
    fn decode(&self, received: &[f64], sigma: f64) -> Result<FrameResult>;
}

/// Plain BPSK with symbol-by-symbol hard decisions.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Uncoded {
    pub len: usize,
}

impl FrameCodec for Uncoded {
    fn label(&self) -> String {
        format!("uncoded({})", self.len)
    }

    fn info_len(&self) -> usize {
        self.len
    }

    fn code_len(&self) -> usize {
        self.len
    }

    fn rate(&self) -> f64 {
        1.0
    }

    fn encode(&self, message: &[u8]) -> Result<HardWord> {
        crate::word::check_len(self.len, message.len())?;
        Ok(HardWord::from(message.to_vec()))
    }

    fn decode(&self, received: &[f64], _sigma: f64) -> Result<FrameResult> {
        crate::word::check_len(self.len, received.len())?;
        Ok(FrameResult {
            decisions: vec![HardWord::from_bits(
                received.iter().map(|&v| crate::word::hard_bit(v)),
            )],
            test_sequences: 0,
            component_decodes: 0,
        })
    }
}

/// A single cyclic code with the soft-input hard-output decoder.
impl FrameCodec for SihoDecoder {
    fn label(&self) -> String {
        self.code().name().to_string()
    }

    fn info_len(&self) -> usize {
        self.code().k()
    }

    fn code_len(&self) -> usize {
        self.code().n()
    }

    fn rate(&self) -> f64 {
        self.code().rate()
    }

    fn encode(&self, message: &[u8]) -> Result<HardWord> {
        self.code()
            .encode_systematic(&HardWord::from(message.to_vec()))
    }

    fn decode(&self, received: &[f64], sigma: f64) -> Result<FrameResult> {
        let res = SihoDecoder::decode(self, received, sigma)?;
        Ok(FrameResult {
            decisions: vec![self.code().extract_message(&res.decision)?],
            test_sequences: res.test_sequences_used as u64,
            component_decodes: 1,
        })
    }
}

impl FrameCodec for TurboDecoder {
    fn label(&self) -> String {
        self.code().name()
    }

    fn info_len(&self) -> usize {
        self.code().info_len()
    }

    fn code_len(&self) -> usize {
        self.code().len()
    }

    fn rate(&self) -> f64 {
        self.code().rate().as_f64()
    }

    fn iterations(&self) -> usize {
        self.config().max_iterations
    }

    fn encode(&self, message: &[u8]) -> Result<HardWord> {
        self.code().encode(message)
    }

    fn decode(&self, received: &[f64], sigma: f64) -> Result<FrameResult> {
        let out = TurboDecoder::decode(self, received, sigma)?;
        Ok(FrameResult {
            decisions: out.per_iteration,
            test_sequences: out.stats.test_sequences,
            component_decodes: out.stats.component_decodes,
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChannelConfig {
    pub ebn0_db: f64,
    pub seed: u64,
    pub max_frames: u64,
    /// Stop after the frame that brings the final-iteration bit errors to
    /// this count; 0 disables the early stop.
    pub target_bit_errors: u64,
    /// Frames simulated per parallel batch; does not affect results.
    pub batch_frames: usize,
}

impl ChannelConfig {
    pub const DEFAULT_TARGET_BIT_ERRORS: u64 = 100;

    pub fn new(ebn0_db: f64, seed: u64, max_frames: u64) -> Self {
        ChannelConfig {
            ebn0_db,
            seed,
            max_frames,
            target_bit_errors: Self::DEFAULT_TARGET_BIT_ERRORS,
            batch_frames: 256,
        }
    }

    pub fn with_target(self, target_bit_errors: u64) -> Self {
        ChannelConfig {
            target_bit_errors,
            ..self
        }
    }

    pub fn sigma(&self, rate: f64) -> Result<f64> {
        sigma_from_ebn0(rate, self.ebn0_db)
    }

    pub fn validate(&self) -> Result<()> {
        if self.ebn0_db.is_nan() {
            return Err(Error::InvalidParameter("Eb/N0 is NaN".into()));
        }
        if self.max_frames == 0 {
            return Err(Error::InvalidParameter(
                "max_frames must be at least 1".into(),
            ));
        }
        if self.batch_frames == 0 {
            return Err(Error::InvalidParameter(
                "batch_frames must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BerRecord {
    pub ebn0_db: f64,
    /// 1-based.
    pub iteration: usize,
    pub frames: u64,
    pub bits: u64,
    pub bit_errors: u64,
    pub frame_errors: u64,
    pub ber: f64,
    pub fer: f64,
    /// Test sequences per component decode.
    pub mean_test_sequences: f64,
}

/// Bit errors of one frame at each iteration.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FrameTrace {
    pub frame: u64,
    pub bit_errors: Vec<u32>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PointResult {
    pub records: Vec<BerRecord>,
    /// Per-frame errors, when requested.
    pub trace: Vec<FrameTrace>,
}

struct Outcome {
    errors: Vec<u32>,
    test_sequences: u64,
    component_decodes: u64,
}

fn simulate_frame<C: FrameCodec + ?Sized>(
    codec: &C,
    seed: u64,
    frame: u64,
    sigma: f64,
) -> Result<Outcome> {
    let msg = random_bits(
        codec.info_len(),
        &mut StreamKey::new(seed, frame, Role::Message).rng(),
    );
    let cw = codec.encode(&msg)?;
    let r = awgn_add(
        &bpsk_modulate(&cw),
        sigma,
        &mut StreamKey::new(seed, frame, Role::Noise).rng(),
    );
    let res = codec.decode(&r, sigma)?;
    if res.decisions.len() != codec.iterations() {
        return Err(Error::InvalidParameter(format!(
            "decoder returned {} decisions for {} iterations",
            res.decisions.len(),
            codec.iterations()
        )));
    }
    let errors = res
        .decisions
        .iter()
        .map(|d| {
            crate::word::check_len(msg.len(), d.len())?;
            Ok(d.hamming_distance(&msg) as u32)
        })
        .collect::<Result<Vec<u32>>>()?;
    Ok(Outcome {
        errors,
        test_sequences: res.test_sequences,
        component_decodes: res.component_decodes,
    })
}

/// Simulates one Eb/N0 point, optionally keeping per-frame errors.
pub fn simulate_point<C: FrameCodec + ?Sized>(
    codec: &C,
    cfg: &ChannelConfig,
    keep_trace: bool,
) -> Result<PointResult> {
    cfg.validate()?;
    let sigma = cfg.sigma(codec.rate())?;
    let iters = codec.iterations();
    let mut bit_errors = vec![0u64; iters];
    let mut frame_errors = vec![0u64; iters];
    let (mut frames, mut tests, mut decodes) = (0u64, 0u64, 0u64);
    let mut trace = Vec::new();
    let mut done = false;
    while !done && frames < cfg.max_frames {
        let end = (frames + cfg.batch_frames as u64).min(cfg.max_frames);
        let batch = (frames..end)
            .into_par_iter()
            .map(|f| simulate_frame(codec, cfg.seed, f, sigma))
            .collect::<Result<Vec<Outcome>>>()?;
        for out in batch {
            for (i, &e) in out.errors.iter().enumerate() {
                bit_errors[i] += e as u64;
                frame_errors[i] += (e > 0) as u64;
            }
            tests += out.test_sequences;
            decodes += out.component_decodes;
            if keep_trace {
                trace.push(FrameTrace {
                    frame: frames,
                    bit_errors: out.errors,
                });
            }
            frames += 1;
            if cfg.target_bit_errors > 0 && bit_errors[iters - 1] >= cfg.target_bit_errors {
                done = true;
                break;
            }
        }
    }
    let bits = frames * codec.info_len() as u64;
    let mean_tests = if decodes == 0 {
        0.0
    } else {
        tests as f64 / decodes as f64
    };
    let records = (0..iters)
        .map(|i| BerRecord {
            ebn0_db: cfg.ebn0_db,
            iteration: i + 1,
            frames,
            bits,
            bit_errors: bit_errors[i],
            frame_errors: frame_errors[i],
            ber: bit_errors[i] as f64 / bits as f64,
            fer: frame_errors[i] as f64 / frames as f64,
            mean_test_sequences: mean_tests,
        })
        .collect();
    Ok(PointResult { records, trace })
}

/// One record per iteration at `cfg.ebn0_db`.
pub fn run_ber<C: FrameCodec + ?Sized>(codec: &C, cfg: &ChannelConfig) -> Result<Vec<BerRecord>> {
    Ok(simulate_point(codec, cfg, false)?.records)
}

/// [`run_ber`] over a grid, all points sharing `base`'s seed and limits.
pub fn sweep<C: FrameCodec + ?Sized>(
    codec: &C,
    grid: &[f64],
    base: &ChannelConfig,
) -> Result<Vec<BerRecord>> {
    let mut out = Vec::new();
    for &e in grid {
        out.extend(run_ber(
            codec,
            &ChannelConfig {
                ebn0_db: e,
                ..base.clone()
            },
        )?);
    }
    Ok(out)
}

/// Comma-separated records under [`CSV_HEADER`], newline-terminated.
pub fn records_to_csv(records: &[BerRecord]) -> String {
    let mut s = format!("{CSV_HEADER}\n");
    for r in records {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{}",
            r.ebn0_db,
            r.iteration,
            r.frames,
            r.bits,
            r.bit_errors,
            r.frame_errors,
            r.ber,
            r.fer,
            r.mean_test_sequences
        );
    }
    s
}

pub fn write_csv<W: io::Write>(records: &[BerRecord], mut out: W) -> io::Result<()> {
    out.write_all(records_to_csv(records).as_bytes())
}

pub fn write_csv_file(records: &[BerRecord], path: &Path) -> Result<()> {
    std::fs::write(path, records_to_csv(records)).map_err(|e| Error::io(path, e))
}

/// Per-frame trace as `frame,iteration,bit_errors` rows.
pub fn trace_to_csv(trace: &[FrameTrace]) -> String {
    let mut s = String::from("frame,iteration,bit_errors\n");
    for t in trace {
        for (i, e) in t.bit_errors.iter().enumerate() {
            let _ = writeln!(s, "{},{},{}", t.frame, i + 1, e);
        }
    }
    s
}

pub fn parse_csv(text: &str) -> Result<Vec<BerRecord>> {
    let bad = |detail: String| Error::Parse {
        what: "BER table",
        detail,
    };
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h.trim() == CSV_HEADER => {}
        other => {
            return Err(bad(format!(
                "expected header {CSV_HEADER:?}, found {other:?}"
            )))
        }
    }
    lines
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, line)| {
            let row = i + 2;
            let c: Vec<&str> = line.split(',').map(str::trim).collect();
            if c.len() != 9 {
                return Err(bad(format!(
                    "row {row}: expected 9 columns, found {}",
                    c.len()
                )));
            }
            let f = |s: &str| s.parse::<f64>().map_err(|e| bad(format!("row {row}: {e}")));
            let u = |s: &str| s.parse::<u64>().map_err(|e| bad(format!("row {row}: {e}")));
            Ok(BerRecord {
                ebn0_db: f(c[0])?,
                iteration: u(c[1])? as usize,
                frames: u(c[2])?,
                bits: u(c[3])?,
                bit_errors: u(c[4])?,
                frame_errors: u(c[5])?,
                ber: f(c[6])?,
                fer: f(c[7])?,
                mean_test_sequences: f(c[8])?,
            })
        })
        .collect()
}

/// Eb/N0 at which the BER curve of `iteration` crosses `target`, by linear
/// interpolation of `log10(BER)` between the bracketing grid points. Points
/// without errors count as `0.5 / bits`.
pub fn ebn0_at_ber(records: &[BerRecord], iteration: usize, target: f64) -> Option<f64> {
    let mut pts: Vec<(f64, f64)> = records
        .iter()
        .filter(|r| r.iteration == iteration && r.bits > 0)
        .map(|r| {
            let ber = if r.bit_errors == 0 {
                0.5 / r.bits as f64
            } else {
                r.ber
            };
            (r.ebn0_db, ber.log10())
        })
        .collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let t = target.log10();
    pts.windows(2).find_map(|w| {
        let ((x0, y0), (x1, y1)) = (w[0], w[1]);
        if y0 >= t && y1 <= t && y0 != y1 {
            Some(x0 + (t - y0) * (x1 - x0) / (y1 - y0))
        } else if y0 == t {
            Some(x0)
        } else {
            None
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cyclic::code_by_name;
    use crate::siho::DecoderConfig;

    fn rec(ebn0_db: f64, iteration: usize, bits: u64, bit_errors: u64) -> BerRecord {
        BerRecord {
            ebn0_db,
            iteration,
            frames: bits / 10,
            bits,
            bit_errors,
            frame_errors: bit_errors.min(bits / 10),
            ber: bit_errors as f64 / bits as f64,
            fer: bit_errors.min(bits / 10) as f64 / (bits / 10) as f64,
            mean_test_sequences: 1.5,
        }
    }

    #[test]
    fn noiseless_channel_has_no_errors() {
        let dec =
            SihoDecoder::new(code_by_name("bch-31-21").unwrap(), DecoderConfig::default()).unwrap();
        let recs = run_ber(&dec, &ChannelConfig::new(f64::INFINITY, 1, 300)).unwrap();
        assert_eq!(recs.len(), 1);
        assert_eq!(
            (recs[0].frames, recs[0].bits, recs[0].bit_errors),
            (300, 6300, 0)
        );
        assert_eq!(recs[0].ber, 0.0);
    }

    #[test]
    fn early_stop_is_independent_of_batching() {
        let codec = Uncoded { len: 100 };
        let mut cfg = ChannelConfig::new(0.0, 7, 100_000).with_target(500);
        cfg.batch_frames = 1;
        let a = simulate_point(&codec, &cfg, true).unwrap();
        cfg.batch_frames = 999;
        let b = simulate_point(&codec, &cfg, true).unwrap();
        assert_eq!(a, b);
        let r = &a.records[0];
        assert!(r.bit_errors >= 500 && r.bit_errors - 500 < 100);
        assert_eq!(a.trace.len() as u64, r.frames);
        let before_last: u64 = a.trace[..a.trace.len() - 1]
            .iter()
            .map(|t| t.bit_errors[0] as u64)
            .sum();
        assert!(before_last < 500);
    }

    #[test]
    fn csv_round_trip() {
        assert_eq!(records_to_csv(&[]), format!("{CSV_HEADER}\n"));
        let recs = vec![
            rec(1.25, 1, 5100, 37),
            rec(1.25, 2, 5100, 0),
            rec(-0.1, 3, 1 << 40, 3),
        ];
        let text = records_to_csv(&recs);
        assert!(text.ends_with('\n'));
        assert_eq!(text.lines().count(), 4);
        assert_eq!(parse_csv(&text).unwrap(), recs);
        assert!(parse_csv("nope\n").is_err());
        assert!(parse_csv(&format!("{CSV_HEADER}\n1,2,3\n")).is_err());
    }

    #[test]
    fn trace_rows() {
        let t = vec![FrameTrace {
            frame: 0,
            bit_errors: vec![2, 0],
        }];
        assert_eq!(
            trace_to_csv(&t),
            "frame,iteration,bit_errors\n0,1,2\n0,2,0\n"
        );
    }

    #[test]
    fn threshold_interpolation() {
        let recs = vec![
            rec(1.0, 1, 1000, 100),
            rec(2.0, 1, 1000, 1),
            rec(3.0, 1, 1000, 0),
        ];
        // log10 BER falls from -1 to -3 between 1 and 2 dB
        assert!((ebn0_at_ber(&recs, 1, 1e-2).unwrap() - 1.5).abs() < 1e-12);
        // the error-free point is floored at 5e-4
        let x = ebn0_at_ber(&recs, 1, 7e-4).unwrap();
        assert!(x > 2.0 && x < 3.0);
        assert_eq!(ebn0_at_ber(&recs, 1, 1e-5), None);
        assert_eq!(ebn0_at_ber(&recs, 2, 1e-2), None);
        assert_eq!(ebn0_at_ber(&recs, 1, 0.5), None);
    }

    #[test]
    fn invalid_channel_config() {
        let codec = Uncoded { len: 8 };
        assert!(run_ber(&codec, &ChannelConfig::new(1.0, 0, 0)).is_err());
        assert!(run_ber(&codec, &ChannelConfig::new(f64::NAN, 0, 10)).is_err());
    }
}
