//! Permutations between the natural message order and the order seen by
//! the second component encoder.
//!
//! The message of `N = rows·cols` bits is viewed as a `rows × cols` matrix
//! written row by row (row `i` is sub-block `i`). `forward[t]` is the natural
//! index of the `t`-th interleaved bit.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Restarts at a given spread before the spread is lowered.
const S_RANDOM_ATTEMPTS: usize = 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum InterleaverKind {
    Identity,
    /// Write row-wise, read column-wise.
    Block,
    /// Output sub-block `i` takes element `j` from row `(i + j) mod rows`, column `j`.
    Diagonal,
    /// Row `i` rotated right by `i`, then read column-wise.
    Cyclic,
    /// Column-wise, with the starting row advanced by one per column.
    Helical,
    Random,
    /// S-random with `S = floor(√(N/2))`.
    SRandom,
}

impl InterleaverKind {
    pub const ALL: [InterleaverKind; 7] = [
        InterleaverKind::Identity,
        InterleaverKind::Block,
        InterleaverKind::Diagonal,
        InterleaverKind::Cyclic,
        InterleaverKind::Helical,
        InterleaverKind::Random,
        InterleaverKind::SRandom,
    ];

    pub fn name(self) -> &'static str {
        match self {
            InterleaverKind::Identity => "identity",
            InterleaverKind::Block => "block",
            InterleaverKind::Diagonal => "diagonal",
            InterleaverKind::Cyclic => "cyclic",
            InterleaverKind::Helical => "helical",
            InterleaverKind::Random => "random",
            InterleaverKind::SRandom => "s_random",
        }
    }

    pub fn is_random(self) -> bool {
        matches!(self, InterleaverKind::Random | InterleaverKind::SRandom)
    }
}

impl fmt::Display for InterleaverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for InterleaverKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace('-', "_");
        let kind = match key.as_str() {
            "identity" | "none" => InterleaverKind::Identity,
            "block" => InterleaverKind::Block,
            "diagonal" => InterleaverKind::Diagonal,
            "cyclic" => InterleaverKind::Cyclic,
            "helical" => InterleaverKind::Helical,
            "random" => InterleaverKind::Random,
            "s_random" | "srandom" | "semi_random" | "semirandom" => InterleaverKind::SRandom,
            _ => {
                let known: Vec<&str> = Self::ALL.iter().map(|k| k.name()).collect();
                return Err(Error::InvalidInterleaver(format!(
                    "unknown interleaver {s:?}; supported: {}",
                    known.join(", ")
                )));
            }
        };
        Ok(kind)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Interleaver {
    kind: InterleaverKind,
    rows: usize,
    cols: usize,
    seed: u64,
    forward: Vec<usize>,
    inverse: Vec<usize>,
    spread: Option<usize>,
}

impl Interleaver {
    /// Builds an interleaver of size `rows · cols`.
    pub fn new(kind: InterleaverKind, rows: usize, cols: usize, seed: u64) -> Result<Self> {
        let n = rows
            .checked_mul(cols)
            .ok_or_else(|| Error::InvalidInterleaver("size overflows".into()))?;
        if n == 0 {
            return Err(Error::InvalidInterleaver(format!(
                "{rows} x {cols} is empty; size must be at least 1"
            )));
        }
        let at = |r: usize, c: usize| r * cols + c;
        let mut spread = None;
        let forward: Vec<usize> = match kind {
            InterleaverKind::Identity => (0..n).collect(),
            InterleaverKind::Block => (0..n).map(|t| at(t % rows, t / rows)).collect(),
            InterleaverKind::Diagonal => (0..n)
                .map(|t| {
                    let (i, j) = (t / cols, t % cols);
                    at((i + j) % rows, j)
                })
                .collect(),
            InterleaverKind::Cyclic => (0..n)
                .map(|t| {
                    let (c, r) = (t / rows, t % rows);
                    at(r, (c + cols - r % cols) % cols)
                })
                .collect(),
            InterleaverKind::Helical => (0..n)
                .map(|t| {
                    let (c, r) = (t / rows, t % rows);
                    at((r + c) % rows, c)
                })
                .collect(),
            InterleaverKind::Random => {
                let mut p: Vec<usize> = (0..n).collect();
                p.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
                p
            }
            InterleaverKind::SRandom => {
                let target = ((n / 2) as f64).sqrt().floor() as usize;
                let (p, s) = build_s_random(n, target, seed);
                spread = Some(s);
                p
            }
        };
        let inverse = invert(&forward);
        Ok(Interleaver {
            kind,
            rows,
            cols,
            seed,
            forward,
            inverse,
            spread,
        })
    }

    /// S-random interleaver of size `n` with an explicit target spread.
    pub fn s_random(n: usize, spread: usize, seed: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidInterleaver("size must be at least 1".into()));
        }
        let (forward, s) = build_s_random(n, spread, seed);
        let inverse = invert(&forward);
        Ok(Interleaver {
            kind: InterleaverKind::SRandom,
            rows: 1,
            cols: n,
            seed,
            forward,
            inverse,
            spread: Some(s),
        })
    }

    pub fn kind(&self) -> InterleaverKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.forward.len()
    }

    pub fn is_empty(&self) -> bool {
        self.forward.is_empty()
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn forward(&self) -> &[usize] {
        &self.forward
    }

    pub fn inverse(&self) -> &[usize] {
        &self.inverse
    }

    /// Spread actually achieved by an S-random construction.
    pub fn spread(&self) -> Option<usize> {
        self.spread
    }

    /// `out[t] = x[forward[t]]`.
    pub fn interleave<T: Copy>(&self, x: &[T]) -> Result<Vec<T>> {
        crate::word::check_len(self.len(), x.len())?;
        Ok(self.forward.iter().map(|&i| x[i]).collect())
    }

    /// Inverse of [`Interleaver::interleave`].
    pub fn deinterleave<T: Copy>(&self, y: &[T]) -> Result<Vec<T>> {
        crate::word::check_len(self.len(), y.len())?;
        Ok(self.inverse.iter().map(|&t| y[t]).collect())
    }
}

fn invert(forward: &[usize]) -> Vec<usize> {
    let mut inverse = vec![0; forward.len()];
    for (t, &i) in forward.iter().enumerate() {
        inverse[i] = t;
    }
    inverse
}

/// Whether `|π(i) − π(j)| > s` for all `0 < |i − j| ≤ s`.
pub fn satisfies_spread(forward: &[usize], s: usize) -> bool {
    forward.iter().enumerate().all(|(i, &a)| {
        forward[i + 1..forward.len().min(i + s + 1)]
            .iter()
            .all(|&b| a.abs_diff(b) > s)
    })
}

fn build_s_random(n: usize, target: usize, seed: u64) -> (Vec<usize>, usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut s = target;
    loop {
        for _ in 0..S_RANDOM_ATTEMPTS {
            if let Some(p) = try_s_random(n, s, &mut rng) {
                return (p, s);
            }
        }
        if s == 0 {
            unreachable!("spread 0 always succeeds");
        }
        s -= 1;
    }
}

fn try_s_random(n: usize, s: usize, rng: &mut impl Rng) -> Option<Vec<usize>> {
    let mut pool: Vec<usize> = (0..n).collect();
    pool.shuffle(rng);
    let mut out: Vec<usize> = Vec::with_capacity(n);
    while !pool.is_empty() {
        let len = out.len();
        if let Some(pick) = pool.iter().position(|&c| fits(&out, len, c, s)) {
            out.push(pool.remove(pick));
            continue;
        }
        // stuck: place a remaining value at an earlier slot and move that
        // slot's value to the end
        let (pick, t) = (0..pool.len()).find_map(|pi| {
            let c = pool[pi];
            (0..len.saturating_sub(s))
                .find(|&t| fits(&out, t, c, s) && fits(&out, len, out[t], s))
                .map(|t| (pi, t))
        })?;
        let moved = std::mem::replace(&mut out[t], pool.remove(pick));
        out.push(moved);
    }
    Some(out)
}

/// Whether `value` at `pos` keeps the spread against every other placed
/// entry within distance `s`.
fn fits(out: &[usize], pos: usize, value: usize, s: usize) -> bool {
    let lo = pos.saturating_sub(s);
    let hi = (pos + s + 1).min(out.len());
    (lo..hi).all(|q| q == pos || value.abs_diff(out[q]) > s)
}
