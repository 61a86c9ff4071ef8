use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::audio::Waveform;
use crate::error::{Error, Result};

/// Fixed-length segment at a seed-determined offset; shorter input is
/// right-padded with zeros.
pub fn crop_random(w: &Waveform, seconds: f64, seed: u64) -> Result<Waveform> {
    if !(seconds > 0.0) || !seconds.is_finite() {
        return Err(Error::Config(format!("crop length must be positive, got {seconds}")));
    }
    let n = (seconds * w.sample_rate_hz() as f64).round() as usize;
    let x = w.samples();
    let out = if x.len() <= n {
        let mut v = x.to_vec();
        v.resize(n, 0.0);
        v
    } else {
        let offset = ChaCha8Rng::seed_from_u64(seed).random_range(0..=x.len() - n);
        x[offset..offset + n].to_vec()
    };
    Waveform::new(out, w.sample_rate_hz())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ramp(n: usize, rate: u32) -> Waveform {
        Waveform::new((0..n).map(|i| i as f32 / n as f32).collect(), rate).unwrap()
    }

    #[test]
    fn ten_seconds_to_five() {
        let out = crop_random(&ramp(240_000, 24_000), 5.0, 1).unwrap();
        assert_eq!(out.len(), 120_000);
        assert_eq!(out.sample_rate_hz(), 24_000);
    }

    #[test]
    fn short_input_is_zero_padded() {
        let w = ramp(72_000, 24_000);
        let out = crop_random(&w, 5.0, 1).unwrap();
        assert_eq!(out.len(), 120_000);
        assert_eq!(&out.samples()[..72_000], w.samples());
        assert!(out.samples()[72_000..].iter().all(|s| *s == 0.0));
    }

    #[test]
    fn same_seed_same_offset() {
        let w = ramp(240_000, 24_000);
        assert_eq!(crop_random(&w, 1.0, 42).unwrap(), crop_random(&w, 1.0, 42).unwrap());
        assert!(crop_random(&w, 0.0, 42).is_err());
    }

    proptest! {
        #[test]
        fn length_is_always_rounded_duration(n in 1usize..5000, seconds in 0.001f64..0.5, seed in any::<u64>()) {
            let out = crop_random(&ramp(n, 8_000), seconds, seed).unwrap();
            prop_assert_eq!(out.len(), (seconds * 8_000.0).round() as usize);
        }
    }
}
