//! Regenerates the stored condition-A constants. Run with
//! `cargo test -p unimap --release --test fit_constants -- --ignored --nocapture`.

use rayon::prelude::*;
use unimap::quotient::ConditionAConstants;
use unimap::sample::{parts_for_genus, OddCompositionSampler};
use unimap::stats::stream_rng;

const N: usize = 100_000;
const SAMPLES: usize = 10_000;
const MARGIN: f64 = 0.1;
const FIT_SEED: u64 = 0x5eed_f17;

#[test]
#[ignore]
fn fit_condition_a_constants() {
    for theta in [0.10, 0.25, 0.40] {
        let g = (theta * N as f64).round() as usize;
        let sampler = OddCompositionSampler::new(N, parts_for_genus(N, g).unwrap()).unwrap();
        let samples: Vec<_> = (0..SAMPLES)
            .into_par_iter()
            .map(|i| sampler.sample(&mut stream_rng(FIT_SEED, g as u64, i as u64)).unwrap().0)
            .collect();
        let k = ConditionAConstants::fit(&samples, N, MARGIN).unwrap();
        println!("({theta:.2}, {k:?}),");
    }
}
