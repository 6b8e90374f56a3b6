//! Test-signal synthesis: seeded noise, tones, and additive mixtures `x = s + z`.

use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

/// Gaussian white noise with standard deviation `std`, reproducible from `seed`.
pub fn white_noise(len: usize, seed: u64, std: f32) -> Vec<f32> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dist = Normal::new(0.0f32, std).expect("finite std");
    (0..len).map(|_| dist.sample(&mut rng)).collect()
}

pub fn sine(freq_hz: f64, amplitude: f32, sample_rate_hz: u32, len: usize) -> Vec<f32> {
    let w = 2.0 * PI * freq_hz / sample_rate_hz as f64;
    (0..len).map(|n| amplitude * (w * n as f64).sin() as f32).collect()
}

pub fn energy(x: &[f32]) -> f64 {
    x.iter().map(|&v| (v as f64).powi(2)).sum()
}

/// Scales `noise` so that `clean` / `noise` has the requested SNR and returns the
/// mixture together with the scaled noise.
pub fn mix_at_snr(clean: &[f32], noise: &[f32], snr_db: f64) -> (Vec<f32>, Vec<f32>) {
    assert_eq!(clean.len(), noise.len(), "clean and noise must have equal length");
    let es = energy(clean);
    let en = energy(noise).max(1e-20);
    let gain = (es / en / 10f64.powf(snr_db / 10.0)).sqrt() as f32;
    let noise: Vec<f32> = noise.iter().map(|&v| v * gain).collect();
    let mix = clean.iter().zip(&noise).map(|(&s, &z)| s + z).collect();
    (mix, noise)
}
