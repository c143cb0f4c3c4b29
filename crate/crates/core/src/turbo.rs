//! Iterative decoding of GPCB codes.
//!
//! Each iteration runs the first component decoder on every direct
//! sub-block, then the second on every sub-block of the interleaved message.
//! A side's input is the channel value plus the other side's latest
//! extrinsic, with unit weight. Extrinsics are kept in natural order.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::gpcb::GpcbCode;
use crate::siho::{DecoderConfig, SihoDecoder};
use crate::soft_output::{destructive_distance, extrinsic_vector, ConfidenceTable};
use crate::word::{check_len, hard_bit, HardWord};

/// Noise level assumed when the channel reports none.
pub const NOISELESS_SIGMA: f64 = 1e-3;

/// Which signal is hard-decided after every iteration.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum OutputTap {
    /// `sign(channel + extrinsic1 + extrinsic2)`.
    #[default]
    Sum,
    /// The information part of the second decoder's codeword decisions.
    LastDecision,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TurboConfig {
    pub max_iterations: usize,
    pub component: DecoderConfig,
    pub output_tap: OutputTap,
    /// Stop once an iteration leaves the decision unchanged; later
    /// iterations then repeat the final decision in the trace.
    pub stop_on_convergence: bool,
}

impl TurboConfig {
    pub const DEFAULT_ITERATIONS: usize = 6;

    pub fn with_iterations(max_iterations: usize) -> Self {
        TurboConfig {
            max_iterations,
            ..Self::default()
        }
    }
}

impl Default for TurboConfig {
    fn default() -> Self {
        TurboConfig {
            max_iterations: Self::DEFAULT_ITERATIONS,
            component: DecoderConfig::default(),
            output_tap: OutputTap::Sum,
            stop_on_convergence: false,
        }
    }
}

/// Received values split by field, plus the exchanged extrinsics.
#[derive(Clone, Debug, PartialEq)]
pub struct TurboState {
    systematic: Vec<f64>,
    parity1: Vec<f64>,
    parity2: Vec<f64>,
    pub extrinsic1: Vec<f64>,
    pub extrinsic2: Vec<f64>,
    pub iteration: usize,
}

impl TurboState {
    pub fn new(code: &GpcbCode, received: &[f64]) -> Result<Self> {
        check_len(code.len(), received.len())?;
        if let Some(i) = received.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        let n = code.info_len();
        let (sys, rest) = received.split_at(n);
        let (p1, p2) = rest.split_at(code.p1_len());
        Ok(TurboState {
            systematic: sys.to_vec(),
            parity1: p1.to_vec(),
            parity2: p2.to_vec(),
            extrinsic1: vec![0.0; n],
            extrinsic2: vec![0.0; n],
            iteration: 0,
        })
    }

    pub fn systematic(&self) -> &[f64] {
        &self.systematic
    }

    pub fn parity1(&self) -> &[f64] {
        &self.parity1
    }

    pub fn parity2(&self) -> &[f64] {
        &self.parity2
    }

    /// `sign(channel + extrinsic1 + extrinsic2)` per message bit.
    pub fn sum_decision(&self) -> HardWord {
        HardWord::from_bits(
            (0..self.systematic.len())
                .map(|i| hard_bit(self.systematic[i] + self.extrinsic1[i] + self.extrinsic2[i])),
        )
    }
}

/// Work done by one half-iteration or one frame.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct TurboStats {
    pub component_decodes: u64,
    pub test_sequences: u64,
    pub phi_clamps: u64,
}

impl std::ops::AddAssign for TurboStats {
    fn add_assign(&mut self, o: Self) {
        self.component_decodes += o.component_decodes;
        self.test_sequences += o.test_sequences;
        self.phi_clamps += o.phi_clamps;
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TurboOutput {
    pub message: HardWord,
    /// Decision after each of the `max_iterations` iterations.
    pub per_iteration: Vec<HardWord>,
    pub iterations_run: usize,
    pub stats: TurboStats,
}

/// A GPCB decoder with its component decoders and confidence tables bound.
#[derive(Clone, Debug)]
pub struct TurboDecoder {
    code: GpcbCode,
    cfg: TurboConfig,
    dec: [SihoDecoder; 2],
    tables: [Arc<ConfidenceTable>; 2],
}

impl TurboDecoder {
    /// `tables` hold the confidence table of the first and second component
    /// code; a missing one is reported with the calibration hint.
    pub fn new(
        code: GpcbCode,
        cfg: TurboConfig,
        tables: [Option<Arc<ConfidenceTable>>; 2],
    ) -> Result<Self> {
        if cfg.max_iterations == 0 {
            return Err(Error::InvalidParameter(
                "max_iterations must be at least 1".into(),
            ));
        }
        let comps = [code.c1().clone(), code.c2().clone()];
        let [t1, t2] = tables;
        let mut bound = Vec::with_capacity(2);
        for (c, t) in comps.iter().zip([t1, t2]) {
            let t = t.ok_or_else(|| Error::MissingConfidenceTable {
                code: c.name().to_string(),
            })?;
            if t.code() != c.name() || t.p() != cfg.component.p {
                return Err(Error::InvalidParameter(format!(
                    "confidence table for {} with p = {} does not match component {} with p = {}",
                    t.code(),
                    t.p(),
                    c.name(),
                    cfg.component.p
                )));
            }
            bound.push(t);
        }
        let dec = [
            SihoDecoder::new(comps[0].clone(), cfg.component)?,
            SihoDecoder::new(comps[1].clone(), cfg.component)?,
        ];
        let t2 = bound.pop().expect("two tables");
        let t1 = bound.pop().expect("two tables");
        Ok(TurboDecoder {
            code,
            cfg,
            dec,
            tables: [t1, t2],
        })
    }

    pub fn code(&self) -> &GpcbCode {
        &self.code
    }

    pub fn config(&self) -> &TurboConfig {
        &self.cfg
    }

    /// Input seen by `side` (1 or 2): the channel plus the other side's
    /// extrinsic, interleaved for side 2.
    pub fn side_input(&self, side: usize, state: &TurboState) -> Result<Vec<f64>> {
        let other = match side {
            1 => &state.extrinsic2,
            2 => &state.extrinsic1,
            _ => {
                return Err(Error::InvalidParameter(format!(
                    "side must be 1 or 2, got {side}"
                )))
            }
        };
        let natural: Vec<f64> = state
            .systematic
            .iter()
            .zip(other)
            .map(|(a, b)| a + b)
            .collect();
        if side == 1 {
            Ok(natural)
        } else {
            self.code.interleaver().interleave(&natural)
        }
    }

    /// Decodes every sub-block of one side and replaces that side's extrinsic.
    /// Returns the side's information-bit decisions (in that side's order).
    pub fn half_iteration(
        &self,
        side: usize,
        state: &mut TurboState,
        sigma: f64,
    ) -> Result<(Vec<u8>, TurboStats)> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "noise standard deviation {sigma} must be positive"
            )));
        }
        let input = self.side_input(side, state)?;
        let (dec, table, parity) = match side {
            1 => (&self.dec[0], &self.tables[0], &state.parity1),
            _ => (&self.dec[1], &self.tables[1], &state.parity2),
        };
        let k = self.code.k();
        let np = dec.code().parity_len();
        let mut ext = vec![0.0; input.len()];
        let mut bits = vec![0u8; input.len()];
        let mut stats = TurboStats::default();
        let mut word = vec![0.0; dec.code().n()];
        for b in 0..self.code.m() {
            word[..np].copy_from_slice(&parity[b * np..(b + 1) * np]);
            word[np..].copy_from_slice(&input[b * k..(b + 1) * k]);
            let res = dec.decode(&word, sigma)?;
            let phi = table.phi(destructive_distance(&word, &res.decision)?);
            let (omega, clamped) = extrinsic_vector(&word, &res.decision, phi, sigma)?;
            ext[b * k..(b + 1) * k].copy_from_slice(&omega[np..]);
            bits[b * k..(b + 1) * k].copy_from_slice(&res.decision[np..]);
            stats.component_decodes += 1;
            stats.test_sequences += res.test_sequences_used as u64;
            stats.phi_clamps += clamped as u64;
        }
        if side == 1 {
            state.extrinsic1 = ext;
        } else {
            state.extrinsic2 = self.code.interleaver().deinterleave(&ext)?;
        }
        Ok((bits, stats))
    }

    /// Runs `max_iterations` iterations. A noiseless channel (`sigma = 0`)
    /// is decoded as if `sigma` were [`NOISELESS_SIGMA`].
    pub fn decode(&self, received: &[f64], sigma: f64) -> Result<TurboOutput> {
        let sigma = if sigma == 0.0 { NOISELESS_SIGMA } else { sigma };
        let mut state = TurboState::new(&self.code, received)?;
        let iters = self.cfg.max_iterations;
        let mut per_iteration: Vec<HardWord> = Vec::with_capacity(iters);
        let mut stats = TurboStats::default();
        let mut iterations_run = 0;
        while per_iteration.len() < iters {
            self.half_iteration(1, &mut state, sigma)
                .map(|(_, s)| stats += s)?;
            let (bits2, s) = self.half_iteration(2, &mut state, sigma)?;
            stats += s;
            state.iteration += 1;
            iterations_run += 1;
            let decision = match self.cfg.output_tap {
                OutputTap::Sum => state.sum_decision(),
                OutputTap::LastDecision => {
                    HardWord::from(self.code.interleaver().deinterleave(&bits2)?)
                }
            };
            let converged = self.cfg.stop_on_convergence && per_iteration.last() == Some(&decision);
            per_iteration.push(decision);
            if converged {
                let last = per_iteration.last().cloned().expect("nonempty");
                per_iteration.resize(iters, last);
            }
        }
        Ok(TurboOutput {
            message: per_iteration
                .last()
                .cloned()
                .expect("at least one iteration"),
            per_iteration,
            iterations_run,
            stats,
        })
    }
}

/// One-shot [`TurboDecoder::decode`].
pub fn turbo_decode(
    code: &GpcbCode,
    received: &[f64],
    cfg: &TurboConfig,
    tables: [Option<Arc<ConfidenceTable>>; 2],
    sigma: f64,
) -> Result<TurboOutput> {
    TurboDecoder::new(code.clone(), cfg.clone(), tables)?.decode(received, sigma)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{awgn_add, bpsk_modulate, sigma_from_ebn0, Role, StreamKey};
    use crate::cyclic::code_by_name;
    use crate::interleaver::InterleaverKind;
    use crate::siho::siho_decode;
    use crate::soft_output::CalibrationSample;

    /// A hand-made table: confidence falls linearly with distance.
    fn table(code: &str, p: usize) -> Arc<ConfidenceTable> {
        let samples: Vec<_> = (0..400)
            .map(|i| CalibrationSample {
                distance: i as f64 / 40.0,
                correct: (i * 37 % 400) as f64 > i as f64,
            })
            .collect();
        Arc::new(ConfidenceTable::fit(code, p, "test", &samples, 8).unwrap())
    }

    fn decoder(name: &str, m: usize, kind: InterleaverKind, iters: usize) -> TurboDecoder {
        let c = code_by_name(name).unwrap();
        let g = GpcbCode::with_kind(c.clone(), c, m, kind, 3).unwrap();
        let t = table(name, 4);
        TurboDecoder::new(
            g,
            TurboConfig::with_iterations(iters),
            [Some(t.clone()), Some(t)],
        )
        .unwrap()
    }

    fn frame(d: &TurboDecoder, sigma: f64, seed: u64) -> (Vec<u8>, Vec<f64>) {
        let n = d.code().info_len();
        let msg: Vec<u8> = (0..n)
            .map(|i| ((i as u64 * 2654435761 + seed) >> 7 & 1) as u8)
            .collect();
        let cw = d.code().encode(&msg).unwrap();
        let r = awgn_add(
            &bpsk_modulate(&cw),
            sigma,
            &mut StreamKey::new(seed, 0, Role::Noise).rng(),
        );
        (msg, r.into_values())
    }

    #[test]
    fn noiseless_frame_is_recovered_immediately() {
        let d = decoder("bch-63-51", 4, InterleaverKind::Block, 3);
        let (msg, r) = frame(&d, 0.0, 1);
        let out = d.decode(&r, 0.5).unwrap();
        for dec in &out.per_iteration {
            assert_eq!(dec.bits(), &msg[..]);
        }
        let mut state = TurboState::new(d.code(), &r).unwrap();
        d.half_iteration(1, &mut state, 0.5).unwrap();
        for (e, &b) in state.extrinsic1.iter().zip(&msg) {
            assert!(e * crate::word::bit_to_symbol(b) >= 0.0);
        }
    }

    #[test]
    fn single_block_side_one_matches_the_component_decoder() {
        let d = decoder("bch-63-51", 1, InterleaverKind::Identity, 1);
        let sigma = sigma_from_ebn0(0.68, 2.0).unwrap();
        let (_, r) = frame(&d, sigma, 5);
        let mut state = TurboState::new(d.code(), &r).unwrap();
        assert_eq!(d.side_input(1, &state).unwrap(), state.systematic());
        d.half_iteration(1, &mut state, sigma).unwrap();

        let mut word = r[51..63].to_vec();
        word.extend_from_slice(&r[..51]);
        let c = d.code().c1();
        let res = siho_decode(c, &word, &DecoderConfig::default(), sigma).unwrap();
        let phi = table("bch-63-51", 4).phi(destructive_distance(&word, &res.decision).unwrap());
        let (omega, _) = extrinsic_vector(&word, &res.decision, phi, sigma).unwrap();
        assert_eq!(state.extrinsic1, omega[12..].to_vec());
    }

    #[test]
    fn one_iteration_single_block_last_decision_is_side_one_or_two() {
        let c = code_by_name("bch-63-51").unwrap();
        let g = GpcbCode::with_kind(c.clone(), c.clone(), 1, InterleaverKind::Identity, 0).unwrap();
        let t = table("bch-63-51", 4);
        let cfg = TurboConfig {
            max_iterations: 1,
            output_tap: OutputTap::LastDecision,
            ..TurboConfig::default()
        };
        let d = TurboDecoder::new(g, cfg, [Some(t.clone()), Some(t)]).unwrap();
        let sigma = sigma_from_ebn0(0.68, 1.0).unwrap();
        let (_, r) = frame(&d, sigma, 8);
        let mut state = TurboState::new(d.code(), &r).unwrap();
        d.half_iteration(1, &mut state, sigma).unwrap();
        let input2 = d.side_input(2, &state).unwrap();
        let mut word = r[63..75].to_vec();
        word.extend_from_slice(&input2);
        let res = siho_decode(&c, &word, &DecoderConfig::default(), sigma).unwrap();
        let out = d.decode(&r, sigma).unwrap();
        assert_eq!(out.message.bits(), &res.decision[12..]);
    }

    #[test]
    fn channel_values_are_never_modified() {
        let d = decoder("qr-17-9", 6, InterleaverKind::SRandom, 1);
        let sigma = 0.9;
        let (_, r) = frame(&d, sigma, 2);
        let mut state = TurboState::new(d.code(), &r).unwrap();
        let before = (
            state.systematic().to_vec(),
            state.parity1().to_vec(),
            state.parity2().to_vec(),
        );
        for _ in 0..4 {
            d.half_iteration(1, &mut state, sigma).unwrap();
            // side 2 sees exactly channel + extrinsic1, interleaved, with unit weight
            let expect: Vec<f64> = d
                .code()
                .interleaver()
                .interleave(
                    &(0..54)
                        .map(|i| r[i] + state.extrinsic1[i])
                        .collect::<Vec<_>>(),
                )
                .unwrap();
            assert_eq!(d.side_input(2, &state).unwrap(), expect);
            d.half_iteration(2, &mut state, sigma).unwrap();
            assert!(state
                .extrinsic1
                .iter()
                .chain(&state.extrinsic2)
                .all(|v| v.is_finite()));
        }
        assert_eq!(
            before,
            (
                state.systematic().to_vec(),
                state.parity1().to_vec(),
                state.parity2().to_vec()
            )
        );
    }

    #[test]
    fn decoding_is_deterministic() {
        let d = decoder("bch-31-21", 5, InterleaverKind::Random, 4);
        let (_, r) = frame(&d, 0.8, 9);
        assert_eq!(d.decode(&r, 0.8).unwrap(), d.decode(&r, 0.8).unwrap());
    }

    #[test]
    fn convergence_stop_pads_the_trace() {
        let c = code_by_name("bch-31-21").unwrap();
        let g = GpcbCode::with_kind(c.clone(), c, 3, InterleaverKind::Block, 0).unwrap();
        let t = table("bch-31-21", 4);
        let cfg = TurboConfig {
            max_iterations: 6,
            stop_on_convergence: true,
            ..TurboConfig::default()
        };
        let d = TurboDecoder::new(g, cfg, [Some(t.clone()), Some(t)]).unwrap();
        let (msg, r) = frame(&d, 0.0, 4);
        let out = d.decode(&r, 0.5).unwrap();
        assert_eq!(out.iterations_run, 2);
        assert_eq!(out.per_iteration.len(), 6);
        assert!(out.per_iteration.iter().all(|w| w.bits() == &msg[..]));
    }

    #[test]
    fn configuration_errors() {
        let c = code_by_name("bch-15-7").unwrap();
        let g = GpcbCode::with_kind(c.clone(), c, 2, InterleaverKind::Block, 0).unwrap();
        let t = table("bch-15-7", 4);
        let err = TurboDecoder::new(g.clone(), TurboConfig::default(), [Some(t.clone()), None])
            .unwrap_err();
        assert!(err.to_string().contains("gpcb calibrate"), "{err}");
        let wrong = table("qr-7-4", 4);
        assert!(TurboDecoder::new(
            g.clone(),
            TurboConfig::default(),
            [Some(t.clone()), Some(wrong)]
        )
        .is_err());
        let d = TurboDecoder::new(
            g.clone(),
            TurboConfig::default(),
            [Some(t.clone()), Some(t.clone())],
        )
        .unwrap();
        assert!(d.decode(&[0.0; 10], 0.5).is_err());
        let mut r = vec![1.0; g.len()];
        r[3] = f64::NAN;
        assert!(d.decode(&r, 0.5).is_err());
        assert!(d.decode(&vec![1.0; g.len()], -1.0).is_err());
        assert_eq!(
            d.decode(&vec![1.0; g.len()], 0.0).unwrap().message.weight(),
            0
        );
        assert!(TurboDecoder::new(
            g,
            TurboConfig::with_iterations(0),
            [Some(t.clone()), Some(t)]
        )
        .is_err());
    }
}
