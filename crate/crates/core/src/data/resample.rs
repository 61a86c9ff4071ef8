use std::f64::consts::PI;

use crate::audio::Waveform;
use crate::error::{Error, Result};

/// Zero crossings of the sinc kernel on each side, at the narrower of the two rates.
const ZERO_CROSSINGS: f64 = 24.0;
/// Passband edge as a fraction of the lower Nyquist frequency.
const ROLLOFF: f64 = 0.95;
const KAISER_BETA: f64 = 8.0;

fn bessel_i0(x: f64) -> f64 {
    let mut sum = 1.0;
    let mut term = 1.0;
    let q = x * x / 4.0;
    for k in 1..64 {
        term *= q / (k * k) as f64;
        sum += term;
        if term < sum * 1e-17 {
            break;
        }
    }
    sum
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        (PI * x).sin() / (PI * x)
    }
}

/// Band-limited resampling with a Kaiser-windowed sinc kernel.
///
/// Output length is `round(len * target / source)`; same-rate input is
/// returned unchanged.
pub fn resample(w: &Waveform, target_hz: u32) -> Result<Waveform> {
    if target_hz == 0 {
        return Err(Error::Config("target sample rate must be positive".into()));
    }
    let src_hz = w.sample_rate_hz();
    if src_hz == target_hz {
        return Ok(w.clone());
    }
    let x = w.samples();
    let n = x.len() as u64;
    let (src, dst) = (src_hz as u64, target_hz as u64);
    let out_len = ((n * dst + src / 2) / src) as usize;

    // Cutoff in cycles per input sample (relative to input Nyquist = 1).
    let cutoff = ROLLOFF * (target_hz as f64 / src_hz as f64).min(1.0);
    let half_width = ZERO_CROSSINGS / cutoff;
    let reach = half_width.ceil() as i64;
    let i0_beta = bessel_i0(KAISER_BETA);
    let kernel = |d: f64| -> f64 {
        let r = d / half_width;
        if r.abs() >= 1.0 {
            return 0.0;
        }
        cutoff * sinc(cutoff * d) * bessel_i0(KAISER_BETA * (1.0 - r * r).sqrt()) / i0_beta
    };

    // Output i sits at input position (i * src) / dst; its fractional part
    // cycles with period dst / gcd, so the taps are tabulated per phase.
    let phases = dst / gcd(src, dst);
    let taps = (2 * reach + 1) as usize;
    let table: Vec<f64> = (0..phases)
        .flat_map(|p| {
            let frac = ((p * src) % dst) as f64 / dst as f64;
            (-reach..=reach).map(move |m| frac - m as f64)
        })
        .map(kernel)
        .collect();

    let out = (0..out_len as u64)
        .map(|i| {
            let base = (i * src / dst) as i64;
            let row = &table[(i % phases) as usize * taps..][..taps];
            let mut acc = 0.0f64;
            for (m, weight) in (-reach..=reach).zip(row) {
                let j = base + m;
                if j >= 0 && (j as u64) < n {
                    acc += x[j as usize] as f64 * weight;
                }
            }
            acc as f32
        })
        .collect();
    Ok(Waveform::clamped(out, target_hz))
}
