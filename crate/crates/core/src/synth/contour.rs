use rand::Rng;
use rand_distr::{Distribution, Normal};

use super::spec::ToneTarget;

/// Noise-free pitch over consecutive unit-duration syllables, sampled at
/// `u = k / samples_per_syllable` for `k = 0..=samples_per_syllable` within
/// each syllable. Syllable boundaries are shared, so the output holds
/// `targets.len() * samples_per_syllable + 1` values.
pub fn trajectory(targets: &[ToneTarget], start_pitch: f64, approach_rate: f64, samples_per_syllable: usize) -> Vec<f64> {
    let s = samples_per_syllable.max(1);
    let mut out = Vec::with_capacity(targets.len() * s + 1);
    out.push(start_pitch);
    let mut entry = start_pitch;
    for t in targets {
        let gap = entry - t.intercept;
        for k in 1..=s {
            let u = k as f64 / s as f64;
            out.push(t.at(u) + gap * (-approach_rate * u).exp());
        }
        entry = *out.last().expect("non-empty");
    }
    out
}

/// [`trajectory`] plus independent Gaussian noise of std `noise_std` on every sample.
pub fn generate_contour<R: Rng + ?Sized>(
    targets: &[ToneTarget],
    start_pitch: f64,
    approach_rate: f64,
    noise_std: f64,
    samples_per_syllable: usize,
    rng: &mut R,
) -> Vec<f64> {
    let mut f = trajectory(targets, start_pitch, approach_rate, samples_per_syllable);
    if noise_std > 0.0 {
        let noise = Normal::new(0.0, noise_std).expect("noise std is finite and non-negative");
        for v in &mut f {
            *v += noise.sample(rng);
        }
    }
    f
}
