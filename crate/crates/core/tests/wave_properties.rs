use std::f64::consts::TAU;

use dcplab::wave::{self, fourier_series, frequency_displace, position_displace};
use dcplab::{phase, Complex64, SampledWave};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const L: f64 = 3.0;
const N: usize = 128;

fn random_wave(seed: u64) -> SampledWave {
    SampledWave::random_band_limited(L, N, N / 4 - 1, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn displacements_invert(seed in any::<u64>(), x in -10.0f64..10.0, m in -(N as i64 / 4)..=(N as i64 / 4)) {
        let w = random_wave(seed);
        let back = position_displace(&position_displace(&w, x).unwrap(), -x).unwrap();
        prop_assert!(back.max_abs_diff(&w) < 1e-12 * w.norm());
        let k = TAU * m as f64 / L;
        let back = frequency_displace(&frequency_displace(&w, k).unwrap(), -k).unwrap();
        prop_assert!(back.max_abs_diff(&w) < 1e-12 * w.norm());
    }

    #[test]
    fn shift_theorem_per_coefficient(seed in any::<u64>(), x in -5.0f64..5.0) {
        let w = random_wave(seed);
        let before = fourier_series(&w);
        let after = fourier_series(&position_displace(&w, x).unwrap());
        for (n, c) in before.modes() {
            let expect = c * Complex64::from_polar(1.0, -TAU * n as f64 * x / L);
            prop_assert!((after.coeff(n) - expect).norm() < 1e-12);
        }
    }

    #[test]
    fn loop_phase_additive_in_x(seed in any::<u64>(), x1 in -2.0f64..2.0, x2 in -2.0f64..2.0, m in 1i64..=8) {
        let w = random_wave(seed);
        let k = TAU * m as f64 / L;
        let p1 = wave::loop_phase(&w, x1, k).unwrap().phi;
        let p2 = wave::loop_phase(&w, x2, k).unwrap().phi;
        let p12 = wave::loop_phase(&w, x1 + x2, k).unwrap().phi;
        prop_assert!(phase::distance(p12, p1 + p2).abs() < 1e-10);
    }
}

#[test]
fn loop_phase_is_wave_independent() {
    let (x, k) = (0.37 * L, TAU * 5.0 / L);
    let phis: Vec<f64> = (0..12).map(|s| wave::loop_phase(&random_wave(s), x, k).unwrap().phi).collect();
    let lo = phis.iter().copied().fold(f64::MAX, f64::min);
    let hi = phis.iter().copied().fold(f64::MIN, f64::max);
    assert!(hi - lo < 1e-10);
    assert!(phase::distance(phis[0], x * k).abs() < 1e-10);
}
