use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::audio::Waveform;
use crate::error::Result;

/// Partial frequencies a clip can draw from: 16 tones in whole-tone steps
/// from 220 Hz.
pub fn partial_palette() -> Vec<f64> {
    (0..16).map(|i| 220.0 * 2f64.powf(i as f64 / 6.0)).collect()
}

/// One synthetic clip: two to four decaying sinusoids from
/// [`partial_palette`] plus one-pole low-passed noise, peak-normalized to 0.5.
pub fn synthetic_clip(seconds: f64, sample_rate_hz: u32, seed: u64) -> Result<Waveform> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = (seconds * sample_rate_hz as f64).round() as usize;
    let sr = sample_rate_hz as f64;
    let mut x = vec![0f64; n];
    let palette = partial_palette();
    for _ in 0..rng.random_range(2..=4) {
        let f = palette[rng.random_range(0..palette.len())];
        let amp = rng.random_range(0.2..1.0);
        let phase = rng.random_range(0.0..2.0 * PI);
        let decay = rng.random_range(0.0..3.0);
        for (i, v) in x.iter_mut().enumerate() {
            let t = i as f64 / sr;
            *v += amp * (-decay * t).exp() * (2.0 * PI * f * t + phase).sin();
        }
    }
    let pole: f64 = rng.random_range(0.5..0.95);
    let noise_gain = rng.random_range(0.05..0.3);
    let mut state = 0.0;
    for v in x.iter_mut() {
        state = pole * state + (1.0 - pole) * rng.random_range(-1.0..1.0);
        *v += noise_gain * state / (1.0 - pole).sqrt();
    }
    let peak = x.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-9);
    Waveform::new(x.iter().map(|v| (0.5 * v / peak) as f32).collect(), sample_rate_hz)
}

/// `count` clips with seeds derived from `seed`.
pub fn synthetic_corpus(count: usize, seconds: f64, sample_rate_hz: u32, seed: u64) -> Result<Vec<Waveform>> {
    (0..count)
        .map(|i| synthetic_clip(seconds, sample_rate_hz, seed.wrapping_mul(1_000_003).wrapping_add(i as u64)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_and_bounded() {
        let a = synthetic_clip(0.5, 24_000, 7).unwrap();
        assert_eq!(a, synthetic_clip(0.5, 24_000, 7).unwrap());
        assert_ne!(a, synthetic_clip(0.5, 24_000, 8).unwrap());
        assert_eq!(a.len(), 12_000);
        let peak = a.samples().iter().fold(0.0f32, |m, v| m.max(v.abs()));
        assert!((peak - 0.5).abs() < 1e-6);
    }

    #[test]
    fn dominant_partial_comes_from_the_palette() {
        let palette = partial_palette();
        assert_eq!(palette.len(), 16);
        assert!((palette[6] - 440.0).abs() < 1e-9);
        let x = synthetic_clip(1.0, 24_000, 3).unwrap();
        // 1 s at 24 kHz: DFT bin k is k Hz
        let mag = |f: f64| {
            let (mut re, mut im) = (0.0, 0.0);
            for (i, v) in x.samples().iter().enumerate() {
                let ph = 2.0 * PI * f * i as f64 / 24_000.0;
                re += *v as f64 * ph.cos();
                im += *v as f64 * ph.sin();
            }
            re.hypot(im)
        };
        let best = (80..4000).map(|k| k as f64).max_by(|a, b| mag(*a).total_cmp(&mag(*b))).unwrap();
        assert!(palette.iter().any(|p| (p - best).abs() <= 1.5), "peak at {best} Hz");
    }
}
