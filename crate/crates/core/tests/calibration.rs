use std::sync::Arc;

use gpcb_core::sim::{parse_csv, records_to_csv};
use gpcb_core::soft_output::{collect_calibration_samples, PHI_EPSILON};
use gpcb_core::{
    calibrate_confidence, code_by_name, sweep, CalibrationSpec, ChannelConfig, ConfidenceTable,
    DecoderConfig, GpcbCode, InterleaverKind, TurboConfig, TurboDecoder,
};

fn spec(grid: Vec<f64>, frames: usize, seed: u64) -> CalibrationSpec {
    CalibrationSpec {
        ebn0_grid: grid,
        frames_per_point: frames,
        bins: 32,
        seed,
    }
}

#[test]
fn independent_seeds_agree_within_binomial_noise() {
    let code = code_by_name("bch-63-51").unwrap();
    let cfg = DecoderConfig::default();
    let grid = vec![1.0, 2.0, 3.0, 4.0, 5.0];
    let a = collect_calibration_samples(&code, &cfg, &spec(grid.clone(), 4000, 1)).unwrap();
    let b = collect_calibration_samples(&code, &cfg, &spec(grid, 4000, 2)).unwrap();
    let ta = ConfidenceTable::fit("bch-63-51", 4, "a", &a, 32).unwrap();
    let tb = ConfidenceTable::fit_with_edges("bch-63-51", 4, "b", &b, ta.edges().to_vec()).unwrap();
    let (ra, rb) = (ta.raw_phi().unwrap(), tb.raw_phi().unwrap());
    for i in 0..32 {
        let (na, nb) = (ta.sample_counts()[i] as f64, tb.sample_counts()[i] as f64);
        if na == 0.0 || nb == 0.0 {
            continue;
        }
        let pooled = (ra[i] * na + rb[i] * nb) / (na + nb);
        let sd = (pooled * (1.0 - pooled) * (1.0 / na + 1.0 / nb)).sqrt();
        assert!(
            (ra[i] - rb[i]).abs() <= 3.0 * sd + 1e-12,
            "bin {i}: {} vs {} (sd {sd})",
            ra[i],
            rb[i]
        );
    }
}

#[test]
fn same_seed_gives_identical_table_text() {
    let code = code_by_name("qr-23-12").unwrap();
    let s = spec(vec![2.0, 4.0], 1000, 9);
    let a = calibrate_confidence(&code, &DecoderConfig::default(), &s).unwrap();
    let b = calibrate_confidence(&code, &DecoderConfig::default(), &s).unwrap();
    assert_eq!(a.to_text(), b.to_text());
    let other = calibrate_confidence(
        &code,
        &DecoderConfig::default(),
        &spec(vec![2.0, 4.0], 1000, 10),
    )
    .unwrap();
    assert_ne!(a.key(), other.key());
}

#[test]
fn pooled_bch_table_decreases_with_distance() {
    let code = code_by_name("bch-63-51").unwrap();
    let t = calibrate_confidence(
        &code,
        &DecoderConfig::default(),
        &spec(vec![1.0, 2.0, 3.0, 4.0, 5.0], 10_000, 3),
    )
    .unwrap();
    let phi = t.phi_values();
    assert!(phi.windows(2).all(|w| w[1] <= w[0]));
    assert!(phi
        .iter()
        .all(|&p| (PHI_EPSILON..=1.0 - PHI_EPSILON).contains(&p)));
    assert!(phi[0] > 0.95, "{phi:?}");
    assert!(phi[31] < 0.5, "{phi:?}");
    assert_eq!(t.sample_counts().iter().sum::<u64>(), 50_000);
}

#[test]
fn noiseless_calibration_is_fully_confident() {
    let code = code_by_name("bch-31-21").unwrap();
    let t = calibrate_confidence(
        &code,
        &DecoderConfig::default(),
        &spec(vec![300.0], 1000, 4),
    )
    .unwrap();
    assert_eq!(t.phi_values()[0], 1.0 - PHI_EPSILON);
    assert_eq!(t.phi(0.0), 1.0 - PHI_EPSILON);
}

#[test]
fn recipe_key_tracks_every_decoder_setting() {
    let code = code_by_name("bch-63-51").unwrap();
    let s = spec(vec![1.0], 1000, 1);
    let base = DecoderConfig::default();
    let keys = [
        s.key(&code, &base),
        s.key(&code, &base.without_threshold()),
        s.key(
            &code,
            &DecoderConfig {
                optimality_stop: false,
                ..base
            },
        ),
        s.key(&code, &DecoderConfig { p: 3, ..base }),
        s.key(
            &code,
            &DecoderConfig {
                max_shifts: Some(7),
                ..base
            },
        ),
        spec(vec![1.0], 1000, 2).key(&code, &base),
        spec(vec![1.5], 1000, 1).key(&code, &base),
    ];
    for i in 0..keys.len() {
        for j in i + 1..keys.len() {
            assert_ne!(keys[i], keys[j], "{i} {j}");
        }
    }
}

#[test]
fn turbo_sweep_csv_round_trips() {
    let comp = code_by_name("qr-23-12").unwrap();
    let t = Arc::new(
        calibrate_confidence(
            &comp,
            &DecoderConfig::default(),
            &spec(vec![2.0, 3.0], 1000, 5),
        )
        .unwrap(),
    );
    let code = GpcbCode::with_kind(comp.clone(), comp, 4, InterleaverKind::Random, 6).unwrap();
    let dec = TurboDecoder::new(
        code,
        TurboConfig::with_iterations(3),
        [Some(t.clone()), Some(t)],
    )
    .unwrap();
    let records = sweep(&dec, &[1.0, 3.0], &ChannelConfig::new(0.0, 8, 200)).unwrap();
    assert_eq!(records.len(), 6);
    let text = records_to_csv(&records);
    assert_eq!(parse_csv(&text).unwrap(), records);
    assert_eq!(records_to_csv(&parse_csv(&text).unwrap()), text);
}
