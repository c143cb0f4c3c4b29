//! Minimum Eb/N0 for reliable transmission at a given rate.

use crate::error::{Error, Result};

/// Which channel capacity the limit refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Capacity {
    /// Real AWGN channel with Gaussian input.
    Unconstrained,
    /// AWGN channel with equiprobable ±1 input.
    Bpsk,
}

/// Half-width of the integration range, in noise standard deviations.
const SPAN: f64 = 12.0;
const PANELS: usize = 2000;

/// Capacity in bits per channel use of the BPSK-input AWGN channel with noise
/// variance `sigma2`: `1 − E[log2(1 + exp(−2Y/σ²))]`, `Y ~ N(1, σ²)`.
pub fn bpsk_capacity(sigma2: f64) -> f64 {
    let sigma = sigma2.sqrt();
    let f = |z: f64| {
        let y = 1.0 + sigma * z;
        let t = -2.0 * y / sigma2;
        // log(1 + e^t) without overflow
        let softplus = if t > 0.0 {
            t + (-t).exp().ln_1p()
        } else {
            t.exp().ln_1p()
        };
        (-0.5 * z * z).exp() * softplus
    };
    let h = 2.0 * SPAN / PANELS as f64;
    let mut acc = f(-SPAN) + f(SPAN);
    for i in 1..PANELS {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(-SPAN + i as f64 * h);
    }
    let expectation = acc * h / 3.0 / (2.0 * std::f64::consts::PI).sqrt();
    1.0 - expectation / std::f64::consts::LN_2
}

/// Shannon limit in dB for code rate `rate ∈ (0, 1)`.
pub fn shannon_limit(rate: f64, capacity: Capacity) -> Result<f64> {
    if !(rate > 0.0 && rate < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "rate {rate} must lie in (0, 1)"
        )));
    }
    match capacity {
        Capacity::Unconstrained => {
            let x = 2.0 * rate * std::f64::consts::LN_2;
            Ok(10.0 * (x.exp_m1() / (2.0 * rate)).log10())
        }
        Capacity::Bpsk => {
            let gap = |db: f64| bpsk_capacity(1.0 / (2.0 * rate * 10f64.powf(db / 10.0))) - rate;
            let (mut lo, mut hi) = (-2.0, 20.0);
            while hi - lo > 1e-10 {
                let mid = 0.5 * (lo + hi);
                if gap(mid) < 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            Ok(0.5 * (lo + hi))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const ULTIMATE: f64 = -1.591_745_389_548_616;

    #[test]
    fn low_rate_limit() {
        assert!((10.0 * std::f64::consts::LN_2.log10() - ULTIMATE).abs() < 1e-12);
        for cap in [Capacity::Unconstrained, Capacity::Bpsk] {
            let l = shannon_limit(1e-4, cap).unwrap();
            assert!((l - ULTIMATE).abs() < 0.01, "{cap:?}: {l}");
        }
    }

    #[test]
    fn reference_values() {
        // computed independently with adaptive quadrature and Brent's method
        let cases = [
            (0.01, -1.561_605_723_485_971, -1.561_607_613_689_133),
            (0.5, 0.187_060_377_377_661_8, 0.0),
            (51.0 / 75.0, 1.142_380_470_118_456, 0.614_890_111_341_073_3),
            (
                12.0 / 35.0,
                -0.459_755_022_428_612_4,
                -0.518_839_279_845_702_2,
            ),
            (0.9, 3.197_745_168_242_472_4, 1.395_646_604_007_911_6),
        ];
        for (rate, bpsk, awgn) in cases {
            let b = shannon_limit(rate, Capacity::Bpsk).unwrap();
            let a = shannon_limit(rate, Capacity::Unconstrained).unwrap();
            assert!((b - bpsk).abs() < 1e-6, "rate {rate}: {b} vs {bpsk}");
            assert!((a - awgn).abs() < 1e-9, "rate {rate}: {a} vs {awgn}");
        }
    }

    #[test]
    fn constrained_limit_is_never_below_unconstrained() {
        for i in 1..100 {
            let r = i as f64 / 100.0;
            let b = shannon_limit(r, Capacity::Bpsk).unwrap();
            let a = shannon_limit(r, Capacity::Unconstrained).unwrap();
            assert!(b >= a - 1e-9, "rate {r}: {b} < {a}");
        }
    }

    #[test]
    fn capacity_endpoints() {
        assert!((bpsk_capacity(1e-3) - 1.0).abs() < 1e-9);
        assert!(bpsk_capacity(1e4) < 1e-3);
        assert!(shannon_limit(0.0, Capacity::Bpsk).is_err());
        assert!(shannon_limit(1.0, Capacity::Unconstrained).is_err());
    }
}
