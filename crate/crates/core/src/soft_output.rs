//! Soft output of the component decoder.
//!
//! The decoder's confidence `Φ` (probability that its decision equals the
//! transmitted codeword) is read from a table indexed by the destructive
//! distance between the input and the decision. The a posteriori bit
//! probabilities mix `Φ` with the Gaussian channel posterior, and the
//! extrinsic value is
//!
//! ```text
//! ω_j = d_j · [ (σ²/2)·ln((Φ + exp(2·r_j·d_j/σ²)) / (1 − Φ)) − r_j·d_j ]
//! ```
//!
//! which enters the partner decoder unscaled.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::channel::{awgn_add, bpsk_modulate, random_bits, sigma_from_ebn0, Role, StreamKey};
use crate::cyclic::CyclicCode;
use crate::error::{Error, Result};
use crate::siho::{DecoderConfig, SihoDecoder};
use crate::word::{bit_to_symbol, check_len, HardWord};

/// Clamp applied to `Φ` so the logarithms stay finite.
pub const PHI_EPSILON: f64 = 1e-6;

/// Bins used when none are given.
pub const DEFAULT_BINS: usize = 32;

const TABLE_MAGIC: &str = "gpcb-confidence-table";
const TABLE_VERSION: u32 = 1;

/// Which coordinates count toward the destructive distance.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum DestructiveRule {
    /// `(r_j − d_j)·d_j < 0`: the noise pushes `r_j` toward or past zero.
    #[default]
    Printed,
    /// Only coordinates where `r_j` has the opposite sign to `d_j`.
    OppositePolarity,
}

/// `Σ (r_j − d_j)²` over the coordinates where the noise opposes the decision.
pub fn destructive_distance(r: &[f64], decision: &[u8]) -> Result<f64> {
    destructive_distance_with(r, decision, DestructiveRule::Printed)
}

pub fn destructive_distance_with(r: &[f64], decision: &[u8], rule: DestructiveRule) -> Result<f64> {
    check_len(r.len(), decision.len())?;
    Ok(r.iter()
        .zip(decision)
        .map(|(&rj, &b)| {
            let d = bit_to_symbol(b);
            let e = rj - d;
            let counts = match rule {
                DestructiveRule::Printed => e * d < 0.0,
                DestructiveRule::OppositePolarity => rj * d < 0.0,
            };
            if counts {
                e * e
            } else {
                0.0
            }
        })
        .sum())
}

/// `e^x / (1 + e^x)` without overflow.
fn logistic(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// A posteriori `(P(x_j = +1 | R), P(x_j = −1 | R))` given the decision bit,
/// the confidence `phi ∈ [0, 1]` and the channel noise `sigma`.
pub fn aposteriori(r: f64, decision_bit: u8, phi: f64, sigma: f64) -> Result<(f64, f64)> {
    if !(sigma > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "noise standard deviation {sigma} must be positive"
        )));
    }
    if !(0.0..=1.0).contains(&phi) {
        return Err(Error::InvalidParameter(format!(
            "confidence {phi} outside [0, 1]"
        )));
    }
    let y = 2.0 * r / (sigma * sigma);
    let plus = (1.0 - phi) * logistic(y);
    let minus = (1.0 - phi) * logistic(-y);
    Ok(if decision_bit == 0 {
        (phi + plus, minus)
    } else {
        (plus, phi + minus)
    })
}

/// Clamps `phi` into `[ε, 1 − ε]`; the flag reports whether it moved.
pub fn clamp_phi(phi: f64) -> (f64, bool) {
    let c = phi.clamp(PHI_EPSILON, 1.0 - PHI_EPSILON);
    (c, c != phi)
}

/// Extrinsic value for one coordinate. `phi` must already be clamped.
#[inline]
pub fn extrinsic(r: f64, decision_bit: u8, phi: f64, sigma: f64) -> f64 {
    let d = bit_to_symbol(decision_bit);
    let half_var = 0.5 * sigma * sigma;
    let x = 2.0 * r * d / (sigma * sigma);
    // (σ²/2)·ln(Φ + e^x) − r·d, with the x term cancelled analytically when large
    let inner = if x > 0.0 {
        half_var * (phi * (-x).exp()).ln_1p()
    } else {
        half_var * (phi + x.exp()).ln() - r * d
    };
    d * (inner - half_var * (1.0 - phi).ln())
}

/// Extrinsic vector of a whole word. Returns the values and whether `phi`
/// had to be clamped.
pub fn extrinsic_vector(
    r: &[f64],
    decision: &[u8],
    phi: f64,
    sigma: f64,
) -> Result<(Vec<f64>, bool)> {
    check_len(r.len(), decision.len())?;
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "noise standard deviation {sigma} must be positive"
        )));
    }
    if let Some(i) = r.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite(i));
    }
    let (phi, clamped) = clamp_phi(if phi.is_nan() { PHI_EPSILON } else { phi });
    Ok((
        r.iter()
            .zip(decision)
            .map(|(&rj, &b)| extrinsic(rj, b, phi, sigma))
            .collect(),
        clamped,
    ))
}

/// Hard decision together with its extrinsic output.
#[derive(Clone, Debug, PartialEq)]
pub struct SoftDecision {
    pub decision: HardWord,
    pub extrinsic: Vec<f64>,
    pub phi: f64,
    pub phi_clamped: bool,
}

/// Empirical map from destructive distance to confidence `Φ`.
#[derive(Clone, Debug, PartialEq)]
pub struct ConfidenceTable {
    code: String,
    p: usize,
    key: String,
    /// `bins + 1` strictly increasing edges; bin `i` is `[edges[i], edges[i+1])`.
    edges: Vec<f64>,
    phi: Vec<f64>,
    samples: Vec<u64>,
    /// Per-bin fraction of correct decisions before smoothing (`NaN` for
    /// empty bins); only available on freshly calibrated tables.
    raw_phi: Option<Vec<f64>>,
}

/// One calibration observation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CalibrationSample {
    pub distance: f64,
    pub correct: bool,
}

impl ConfidenceTable {
    /// Fits a table with edges at empirical quantiles of the observed distances.
    pub fn fit(
        code: &str,
        p: usize,
        key: &str,
        samples: &[CalibrationSample],
        bins: usize,
    ) -> Result<Self> {
        if bins < 2 {
            return Err(Error::InvalidParameter(format!(
                "need at least 2 bins, got {bins}"
            )));
        }
        if samples.is_empty() {
            return Err(Error::InvalidParameter("no calibration samples".into()));
        }
        let mut d: Vec<f64> = samples.iter().map(|s| s.distance).collect();
        d.sort_by(f64::total_cmp);
        let last = d.len() - 1;
        let mut edges: Vec<f64> = (0..=bins).map(|i| d[i * last / bins]).collect();
        let step = 1e-9 * d[last].abs().max(1.0);
        for i in 1..edges.len() {
            if edges[i] <= edges[i - 1] {
                edges[i] = edges[i - 1] + step;
            }
        }
        Self::fit_with_edges(code, p, key, samples, edges)
    }

    /// Fits a table on fixed edges.
    pub fn fit_with_edges(
        code: &str,
        p: usize,
        key: &str,
        samples: &[CalibrationSample],
        edges: Vec<f64>,
    ) -> Result<Self> {
        validate_edges(&edges)?;
        let bins = edges.len() - 1;
        let mut counts = vec![0u64; bins];
        let mut correct = vec![0u64; bins];
        for s in samples {
            let b = bin_of(&edges, s.distance);
            counts[b] += 1;
            correct[b] += s.correct as u64;
        }
        let raw: Vec<f64> = counts
            .iter()
            .zip(&correct)
            .map(|(&n, &c)| {
                if n == 0 {
                    f64::NAN
                } else {
                    c as f64 / n as f64
                }
            })
            .collect();
        let phi = smooth(&raw, &counts);
        Ok(ConfidenceTable {
            code: code.to_string(),
            p,
            key: key.to_string(),
            edges,
            phi,
            samples: counts,
            raw_phi: Some(raw),
        })
    }

    pub fn code(&self) -> &str {
        &self.code
    }

    pub fn p(&self) -> usize {
        self.p
    }

    /// Hash of the calibration recipe this table came from.
    pub fn key(&self) -> &str {
        &self.key
    }

    pub fn bins(&self) -> usize {
        self.phi.len()
    }

    pub fn edges(&self) -> &[f64] {
        &self.edges
    }

    pub fn phi_values(&self) -> &[f64] {
        &self.phi
    }

    pub fn sample_counts(&self) -> &[u64] {
        &self.samples
    }

    pub fn raw_phi(&self) -> Option<&[f64]> {
        self.raw_phi.as_deref()
    }

    pub fn bin_of(&self, distance: f64) -> usize {
        bin_of(&self.edges, distance)
    }

    /// `Φ` for a destructive distance; values outside the edges use the end bins.
    pub fn phi(&self, distance: f64) -> f64 {
        self.phi[self.bin_of(distance)]
    }

    /// Text form: one header line, then `lower,upper,phi,samples` per bin.
    pub fn to_text(&self) -> String {
        let mut out = format!(
            "{TABLE_MAGIC} v{TABLE_VERSION} code={} p={} key={}\n",
            self.code, self.p, self.key
        );
        for i in 0..self.bins() {
            let _ = writeln!(
                out,
                "{},{},{},{}",
                self.edges[i],
                self.edges[i + 1],
                self.phi[i],
                self.samples[i]
            );
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let bad = |detail: String| Error::Parse {
            what: "confidence table",
            detail,
        };
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| bad("empty input".into()))?;
        let mut fields = header.split_whitespace();
        if fields.next() != Some(TABLE_MAGIC) {
            return Err(bad(format!("unrecognized header {header:?}")));
        }
        if fields.next() != Some(&format!("v{TABLE_VERSION}")) {
            return Err(bad(format!("unsupported version in {header:?}")));
        }
        let (mut code, mut p, mut key) = (None, None, None);
        for f in fields {
            match f.split_once('=') {
                Some(("code", v)) => code = Some(v.to_string()),
                Some(("p", v)) => p = v.parse::<usize>().ok(),
                Some(("key", v)) => key = Some(v.to_string()),
                _ => return Err(bad(format!("unexpected header field {f:?}"))),
            }
        }
        let (code, p, key) = match (code, p, key) {
            (Some(c), Some(p), Some(k)) => (c, p, k),
            _ => return Err(bad("header needs code=, p= and key=".into())),
        };
        let mut edges = Vec::new();
        let mut phi = Vec::new();
        let mut samples = Vec::new();
        for (ln, line) in lines.enumerate().filter(|(_, l)| !l.trim().is_empty()) {
            let cols: Vec<&str> = line.split(',').map(str::trim).collect();
            let [lo, hi, ph, n] = cols[..] else {
                return Err(bad(format!("row {}: expected 4 columns", ln + 2)));
            };
            let num = |s: &str| {
                s.parse::<f64>()
                    .map_err(|e| bad(format!("row {}: {e}", ln + 2)))
            };
            let (lo, hi, ph) = (num(lo)?, num(hi)?, num(ph)?);
            let n = n
                .parse::<u64>()
                .map_err(|e| bad(format!("row {}: {e}", ln + 2)))?;
            match edges.last() {
                None => edges.push(lo),
                Some(&prev) if prev.to_bits() != lo.to_bits() => {
                    return Err(bad(format!("row {}: bins are not contiguous", ln + 2)))
                }
                _ => {}
            }
            if !(PHI_EPSILON..=1.0 - PHI_EPSILON).contains(&ph) {
                return Err(bad(format!("row {}: phi {ph} outside [ε, 1-ε]", ln + 2)));
            }
            edges.push(hi);
            phi.push(ph);
            samples.push(n);
        }
        if phi.len() < 2 {
            return Err(bad("need at least 2 bins".into()));
        }
        validate_edges(&edges).map_err(|e| bad(e.to_string()))?;
        Ok(ConfidenceTable {
            code,
            p,
            key,
            edges,
            phi,
            samples,
            raw_phi: None,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
        std::fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_text(&text)
    }
}

fn validate_edges(edges: &[f64]) -> Result<()> {
    if edges.len() < 3 {
        return Err(Error::InvalidParameter("need at least 2 bins".into()));
    }
    if edges.iter().any(|e| !e.is_finite()) || edges.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter(
            "bin edges must be finite and strictly increasing".into(),
        ));
    }
    Ok(())
}

fn bin_of(edges: &[f64], distance: f64) -> usize {
    let inner = &edges[1..edges.len() - 1];
    inner.partition_point(|&e| e <= distance)
}

/// Weighted non-increasing isotonic fit of the nonempty bins, linear
/// interpolation across empty ones, then the `[ε, 1 − ε]` clamp.
fn smooth(raw: &[f64], counts: &[u64]) -> Vec<f64> {
    let filled: Vec<usize> = (0..raw.len()).filter(|&i| counts[i] > 0).collect();
    // pool-adjacent-violators on (value, weight, span)
    let mut blocks: Vec<(f64, f64, usize)> = Vec::new();
    for &i in &filled {
        let mut block = (raw[i], counts[i] as f64, 1usize);
        while let Some(&(v, w, len)) = blocks.last() {
            if v >= block.0 {
                break;
            }
            blocks.pop();
            let total = w + block.1;
            block = ((v * w + block.0 * block.1) / total, total, len + block.2);
        }
        blocks.push(block);
    }
    let fitted: Vec<f64> = blocks
        .iter()
        .flat_map(|&(v, _, len)| std::iter::repeat_n(v, len))
        .collect();

    let mut out = vec![1.0 - PHI_EPSILON; raw.len()];
    if !filled.is_empty() {
        for (slot, &i) in filled.iter().enumerate() {
            out[i] = fitted[slot];
        }
        for i in 0..raw.len() {
            if counts[i] > 0 {
                continue;
            }
            let left = filled.iter().rposition(|&j| j < i);
            let right = filled.iter().position(|&j| j > i);
            out[i] = match (left, right) {
                (Some(l), Some(r)) => {
                    let (jl, jr) = (filled[l], filled[r]);
                    let t = (i - jl) as f64 / (jr - jl) as f64;
                    fitted[l] + t * (fitted[r] - fitted[l])
                }
                (Some(l), None) => fitted[l],
                (None, Some(r)) => fitted[r],
                (None, None) => unreachable!(),
            };
        }
    }
    out.into_iter().map(|v| clamp_phi(v).0).collect()
}

/// Recipe for [`calibrate_confidence`].
#[derive(Clone, Debug, PartialEq)]
pub struct CalibrationSpec {
    pub ebn0_grid: Vec<f64>,
    pub frames_per_point: usize,
    pub bins: usize,
    pub seed: u64,
}

impl CalibrationSpec {
    /// Minimum frames per grid point.
    pub const MIN_FRAMES: usize = 1000;

    pub fn validate(&self) -> Result<()> {
        if self.ebn0_grid.is_empty() || self.ebn0_grid.iter().any(|e| e.is_nan()) {
            return Err(Error::InvalidParameter(
                "calibration grid must be a nonempty list of Eb/N0 values".into(),
            ));
        }
        if self.frames_per_point < Self::MIN_FRAMES {
            return Err(Error::InvalidParameter(format!(
                "calibration needs at least {} frames per point, got {}",
                Self::MIN_FRAMES,
                self.frames_per_point
            )));
        }
        if self.bins < 2 {
            return Err(Error::InvalidParameter(format!(
                "need at least 2 bins, got {}",
                self.bins
            )));
        }
        Ok(())
    }

    /// Stable hash of everything that influences the calibrated table.
    pub fn key(&self, code: &CyclicCode, cfg: &DecoderConfig) -> String {
        let mut recipe = format!(
            "{}|p={}|shifts={:?}|threshold={:?}|optimality_stop={}|frames={}|bins={}|seed={}|grid=",
            code.name(),
            cfg.p,
            cfg.max_shifts,
            cfg.threshold,
            cfg.optimality_stop,
            self.frames_per_point,
            self.bins,
            self.seed
        );
        for e in &self.ebn0_grid {
            let _ = write!(recipe, "{:016x},", e.to_bits());
        }
        let digest = Sha256::digest(recipe.as_bytes());
        digest[..8].iter().map(|b| format!("{b:02x}")).collect()
    }

    /// File under `dir` holding the table for this recipe.
    pub fn table_path(&self, dir: &Path, code: &CyclicCode, cfg: &DecoderConfig) -> PathBuf {
        dir.join(format!(
            "conf-{}-p{}-{}.csv",
            code.name(),
            cfg.p,
            self.key(code, cfg)
        ))
    }
}

/// Transmits random codewords at each grid point, decodes them and records
/// `(destructive distance, decision correct)`.
pub fn collect_calibration_samples(
    code: &CyclicCode,
    cfg: &DecoderConfig,
    spec: &CalibrationSpec,
) -> Result<Vec<CalibrationSample>> {
    spec.validate()?;
    let decoder = SihoDecoder::new(code.clone(), *cfg)?;
    let sigmas = spec
        .ebn0_grid
        .iter()
        .map(|&e| sigma_from_ebn0(code.rate(), e))
        .collect::<Result<Vec<f64>>>()?;
    let frames = spec.frames_per_point;
    (0..sigmas.len() * frames)
        .into_par_iter()
        .map(|idx| {
            let sigma = sigmas[idx / frames];
            let frame = idx as u64;
            let msg = random_bits(
                code.k(),
                &mut StreamKey::new(spec.seed, frame, Role::Message).rng(),
            );
            let cw = code.encode_systematic(&msg)?;
            let r = awgn_add(
                &bpsk_modulate(&cw),
                sigma,
                &mut StreamKey::new(spec.seed, frame, Role::Noise).rng(),
            );
            let res = decoder.decode(&r, sigma)?;
            Ok(CalibrationSample {
                distance: destructive_distance(&r, &res.decision)?,
                correct: res.decision == cw,
            })
        })
        .collect()
}

/// Calibrates the SNR-pooled confidence table of a component code.
pub fn calibrate_confidence(
    code: &CyclicCode,
    cfg: &DecoderConfig,
    spec: &CalibrationSpec,
) -> Result<ConfidenceTable> {
    let samples = collect_calibration_samples(code, cfg, spec)?;
    ConfidenceTable::fit(
        code.name(),
        cfg.p,
        &spec.key(code, cfg),
        &samples,
        spec.bins,
    )
}
