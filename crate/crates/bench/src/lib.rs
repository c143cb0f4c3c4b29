//! Fixtures shared by the benchmarks.

use gpcb_core::channel::random_bits;
use gpcb_core::{awgn_add, bpsk_modulate, sigma_from_ebn0, FrameCodec, Role, StreamKey};

/// `count` received words for `codec` at `ebn0_db`, with the noise level used.
pub fn noisy_frames<C: FrameCodec>(
    codec: &C,
    ebn0_db: f64,
    count: u64,
    seed: u64,
) -> (Vec<Vec<f64>>, f64) {
    let sigma = sigma_from_ebn0(codec.rate(), ebn0_db).expect("valid rate");
    let frames = (0..count)
        .map(|f| {
            let msg = random_bits(
                codec.info_len(),
                &mut StreamKey::new(seed, f, Role::Message).rng(),
            );
            let cw = codec.encode(msg.bits()).expect("message length matches");
            awgn_add(
                &bpsk_modulate(&cw),
                sigma,
                &mut StreamKey::new(seed, f, Role::Noise).rng(),
            )
            .into_values()
        })
        .collect();
    (frames, sigma)
}
