//! Soft-input hard-output component decoder over cyclic shifts.
//!
//! For each of the best-ranked cyclic shifts of the received word the decoder
//! hard-decides the information positions, flips every subset of the `p`
//! least reliable of them, re-encodes systematically and keeps the candidate
//! closest (in squared Euclidean distance) to the received word. With a
//! threshold enabled, the search stops at the first candidate whose distance
//! falls below it. The optimality stop ends the search at a candidate whose
//! discrepancy from the hard decision is smaller than any other codeword's
//! could be.

use crate::cyclic::CyclicCode;
use crate::error::{Error, Result};
use crate::word::{bit_to_symbol, check_len, HardWord};

/// Hard cap on the number of flipped positions (`2^p` patterns).
pub const MAX_P: usize = 20;

/// Early-exit rule applied to every generated candidate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Threshold {
    Disabled,
    /// `n·σ² + slack·σ²·√(2n)`: mean plus `slack` standard deviations of the
    /// squared noise norm of the transmitted codeword.
    Adaptive {
        slack: f64,
    },
    /// Absolute bound on the squared distance.
    Fixed(f64),
}

impl Threshold {
    /// Slack used by [`DecoderConfig::default`].
    pub const DEFAULT_SLACK: f64 = 0.0;

    pub fn value(&self, n: usize, sigma: f64) -> Option<f64> {
        match *self {
            Threshold::Disabled => None,
            Threshold::Adaptive { slack } => {
                let var = sigma * sigma;
                Some(n as f64 * var + slack * var * (2.0 * n as f64).sqrt())
            }
            Threshold::Fixed(t) => Some(t),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DecoderConfig {
    /// Number of least reliable information bits eligible for flipping.
    pub p: usize,
    /// Budget of cyclic shifts; `None` means `k`.
    pub max_shifts: Option<usize>,
    pub threshold: Threshold,
    /// Also stop at a candidate that no other codeword can beat, judged from
    /// the minimum distance and the least reliable positions it agrees on.
    pub optimality_stop: bool,
}

impl Default for DecoderConfig {
    fn default() -> Self {
        DecoderConfig {
            p: 4,
            max_shifts: None,
            threshold: Threshold::Adaptive {
                slack: Threshold::DEFAULT_SLACK,
            },
            optimality_stop: true,
        }
    }
}

impl DecoderConfig {
    pub fn without_threshold(self) -> Self {
        DecoderConfig {
            threshold: Threshold::Disabled,
            optimality_stop: false,
            ..self
        }
    }

    /// The unrestricted search: all `n` shifts, no early exit.
    pub fn full_search(p: usize, n: usize) -> Self {
        DecoderConfig {
            p,
            max_shifts: Some(n),
            threshold: Threshold::Disabled,
            optimality_stop: false,
        }
    }

    pub fn validate(&self, code: &CyclicCode) -> Result<()> {
        if self.p > MAX_P || self.p > code.k() {
            return Err(Error::InvalidParameter(format!(
                "p = {} must not exceed k = {} or {MAX_P}",
                self.p,
                code.k()
            )));
        }
        if self.max_shifts == Some(0) {
            return Err(Error::InvalidParameter("max_shifts must be >= 1".into()));
        }
        match self.threshold {
            Threshold::Fixed(t) if !(t >= 0.0) => Err(Error::InvalidParameter(format!(
                "threshold {t} must be nonnegative"
            ))),
            Threshold::Adaptive { slack } if !slack.is_finite() => Err(Error::InvalidParameter(
                format!("threshold slack {slack} must be finite"),
            )),
            _ => Ok(()),
        }
    }

    pub fn shift_budget(&self, code: &CyclicCode) -> usize {
        self.max_shifts.unwrap_or(code.k()).min(code.n())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DecodeResult {
    /// A codeword of the component code.
    pub decision: HardWord,
    /// Squared Euclidean distance between the input and the ±1 image of `decision`.
    pub metric: f64,
    pub test_sequences_used: usize,
    pub shifts_used: usize,
    pub stopped_early: bool,
}

/// One generated candidate, reported to a trace observer.
#[derive(Clone, Debug, PartialEq)]
pub struct Candidate {
    pub shift: usize,
    pub pattern_index: usize,
    /// Candidate codeword in the original (unshifted) coordinates.
    pub codeword: HardWord,
    /// Squared distance as computed incrementally by the search.
    pub metric: f64,
}

/// Permutation sorting `r` by decreasing magnitude; ties keep index order.
pub fn reliability_sort(r: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..r.len()).collect();
    idx.sort_by(|&a, &b| r[b].abs().total_cmp(&r[a].abs()));
    idx
}

/// Reliability mass of the information set after right-rotating `r` by `s`.
fn shift_score(code: &CyclicCode, abs: &[f64], s: usize) -> f64 {
    let n = code.n();
    code.info_positions().map(|i| abs[(i + n - s) % n]).sum()
}

/// The `max_shifts` best cyclic shifts, by decreasing information-set
/// reliability; ties go to the smaller shift.
pub fn rank_shifts(code: &CyclicCode, r: &[f64], max_shifts: usize) -> Result<Vec<usize>> {
    check_len(code.n(), r.len())?;
    let abs: Vec<f64> = r.iter().map(|v| v.abs()).collect();
    let scores: Vec<f64> = (0..code.n()).map(|s| shift_score(code, &abs, s)).collect();
    let mut shifts: Vec<usize> = (0..code.n()).collect();
    shifts.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    shifts.truncate(max_shifts.min(code.n()));
    Ok(shifts)
}

/// Flip masks over the `p` least reliable information positions: the empty
/// mask first, then by increasing weight, ties by numeric value.
pub fn error_patterns(p: usize) -> Vec<u32> {
    assert!(p <= MAX_P, "p = {p} exceeds {MAX_P}");
    let mut masks: Vec<u32> = (0..1u32 << p).collect();
    masks.sort_by_key(|&m| (m.count_ones(), m));
    masks
}

/// Decodes `r` with the shift-and-flip search; `sigma` scales the adaptive threshold.
pub fn siho_decode(
    code: &CyclicCode,
    r: &[f64],
    cfg: &DecoderConfig,
    sigma: f64,
) -> Result<DecodeResult> {
    let patterns = error_patterns(cfg.p);
    decode_with(code, r, cfg, sigma, &patterns, None)
}

/// [`siho_decode`] that also returns every candidate it generated.
pub fn siho_decode_traced(
    code: &CyclicCode,
    r: &[f64],
    cfg: &DecoderConfig,
    sigma: f64,
) -> Result<(DecodeResult, Vec<Candidate>)> {
    let patterns = error_patterns(cfg.p);
    let mut log = Vec::new();
    let res = decode_with(code, r, cfg, sigma, &patterns, Some(&mut log))?;
    Ok((res, log))
}

/// Reusable decoder holding the pattern list for one configuration.
#[derive(Clone, Debug)]
pub struct SihoDecoder {
    code: CyclicCode,
    cfg: DecoderConfig,
    patterns: Vec<u32>,
}

impl SihoDecoder {
    pub fn new(code: CyclicCode, cfg: DecoderConfig) -> Result<Self> {
        cfg.validate(&code)?;
        let patterns = error_patterns(cfg.p);
        Ok(SihoDecoder {
            code,
            cfg,
            patterns,
        })
    }

    pub fn code(&self) -> &CyclicCode {
        &self.code
    }

    pub fn config(&self) -> &DecoderConfig {
        &self.cfg
    }

    pub fn decode(&self, r: &[f64], sigma: f64) -> Result<DecodeResult> {
        decode_with(&self.code, r, &self.cfg, sigma, &self.patterns, None)
    }
}

fn decode_with(
    code: &CyclicCode,
    r: &[f64],
    cfg: &DecoderConfig,
    sigma: f64,
    patterns: &[u32],
    mut trace: Option<&mut Vec<Candidate>>,
) -> Result<DecodeResult> {
    let n = code.n();
    let k = code.k();
    let np = code.parity_len();
    if r.is_empty() {
        return Err(Error::InvalidParameter("empty received word".into()));
    }
    check_len(n, r.len())?;
    if let Some(i) = r.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite(i));
    }
    cfg.validate(code)?;
    let threshold = cfg.threshold.value(n, sigma);
    if threshold.is_some() && !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "noise standard deviation {sigma} must be finite and nonnegative"
        )));
    }

    let abs: Vec<f64> = r.iter().map(|v| v.abs()).collect();
    // distance from r to the ±1 image of its own sign decision
    let base: f64 = abs.iter().map(|a| (a - 1.0) * (a - 1.0)).sum();
    let shifts = rank_shifts(code, r, cfg.shift_budget(code))?;
    let d = code.d();
    let ascending: Vec<usize> = if cfg.optimality_stop {
        reliability_sort(r).into_iter().rev().collect()
    } else {
        Vec::new()
    };
    let mut disagree: Vec<usize> = Vec::with_capacity(cfg.p + np);
    let rows = code.parity_rows();
    let p = cfg.p;

    let mut info_abs = vec![0.0; k];
    let mut info_bits = vec![0u8; k];
    let mut par_abs = vec![0.0; np];
    let mut order: Vec<usize> = (0..k).collect();

    // best = (cost, shift, message, parity)
    let mut best: Option<(f64, usize, Vec<u8>, u128)> = None;
    let mut tested = 0usize;
    let mut shifts_used = 0usize;
    let mut stopped_early = false;

    'shifts: for &s in &shifts {
        shifts_used += 1;
        // rotated word r'[i] = r[(i - s) mod n]
        let src = |i: usize| (i + n - s) % n;
        let mut hard_parity = 0u128;
        for j in 0..np {
            let v = r[src(j)];
            par_abs[j] = v.abs();
            if v < 0.0 {
                hard_parity |= 1 << j;
            }
        }
        for i in 0..k {
            let v = r[src(np + i)];
            info_abs[i] = v.abs();
            info_bits[i] = (v < 0.0) as u8;
        }
        let base_parity = code.parity_of(&info_bits);

        // p least reliable information positions, least reliable first
        for (i, o) in order.iter_mut().enumerate() {
            *o = i;
        }
        let by_reliability =
            |a: &usize, b: &usize| info_abs[*a].total_cmp(&info_abs[*b]).then(a.cmp(b));
        if p > 0 && p < k {
            order.select_nth_unstable_by(p - 1, by_reliability);
        }
        order[..p].sort_by(by_reliability);
        let flip_pos = &order[..p];

        for (pi, &mask) in patterns.iter().enumerate() {
            let mut parity = base_parity;
            let mut cost = 0.0;
            let mut m = mask;
            while m != 0 {
                let b = m.trailing_zeros() as usize;
                m &= m - 1;
                let pos = flip_pos[b];
                parity ^= rows[pos];
                cost += info_abs[pos];
            }
            let mut diff = parity ^ hard_parity;
            while diff != 0 {
                let j = diff.trailing_zeros() as usize;
                diff &= diff - 1;
                cost += par_abs[j];
            }
            tested += 1;
            let metric = base + 4.0 * cost;

            let improves = best.as_ref().is_none_or(|b| cost < b.0);
            let mut below = threshold.is_some_and(|t| metric < t);
            let flips = mask.count_ones() as usize + (parity ^ hard_parity).count_ones() as usize;
            if improves && !below && cfg.optimality_stop && flips < d {
                disagree.clear();
                let mut m = mask;
                while m != 0 {
                    disagree.push(src(np + flip_pos[m.trailing_zeros() as usize]));
                    m &= m - 1;
                }
                let mut diff = parity ^ hard_parity;
                while diff != 0 {
                    disagree.push(src(diff.trailing_zeros() as usize));
                    diff &= diff - 1;
                }
                // any other codeword disagrees with the hard decision on at
                // least d - flips positions where this candidate agrees with it
                let bound: f64 = ascending
                    .iter()
                    .filter(|i| !disagree.contains(i))
                    .take(d - flips)
                    .map(|&i| abs[i])
                    .sum();
                below = cost < bound;
            }
            if improves || trace.is_some() {
                let mut msg = info_bits.clone();
                let mut m = mask;
                while m != 0 {
                    let b = m.trailing_zeros() as usize;
                    m &= m - 1;
                    msg[flip_pos[b]] ^= 1;
                }
                if let Some(log) = trace.as_deref_mut() {
                    log.push(Candidate {
                        shift: s,
                        pattern_index: pi,
                        codeword: assemble(code, s, &msg, parity),
                        metric,
                    });
                }
                if improves {
                    best = Some((cost, s, msg, parity));
                }
            }
            if below {
                stopped_early = true;
                break 'shifts;
            }
        }
    }

    let (_, s, msg, parity) = best.expect("at least one candidate is generated");
    let decision = assemble(code, s, &msg, parity);
    let metric = r
        .iter()
        .zip(decision.iter())
        .map(|(&v, &b)| {
            let e = v - bit_to_symbol(b);
            e * e
        })
        .sum();
    Ok(DecodeResult {
        decision,
        metric,
        test_sequences_used: tested,
        shifts_used,
        stopped_early,
    })
}

/// Codeword `[parity | message]` built in the rotated frame, rotated back by `-s`.
fn assemble(code: &CyclicCode, s: usize, message: &[u8], parity: u128) -> HardWord {
    let n = code.n();
    let np = code.parity_len();
    let mut out = vec![0u8; n];
    for (i, slot) in out.iter_mut().enumerate() {
        // original coordinate i sits at rotated coordinate (i + s) mod n
        let j = (i + s) % n;
        *slot = if j < np {
            ((parity >> j) & 1) as u8
        } else {
            message[j - np]
        };
    }
    HardWord::from_bits(out)
}
