use std::f64::consts::LN_10;

use candle_core::{Device, Tensor};
use serde::{Deserialize, Serialize};

use super::stft::StftMagnitude;
use crate::audio::Waveform;
use crate::error::{Error, Result};

/// Floor applied to mel energies before the log.
pub const LOG_FLOOR: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MelResolution {
    pub win: usize,
    pub hop: usize,
    pub n_mels: usize,
}

/// Windows 512 / 1024 / 2048 with hop = win / 4 and 40 / 80 / 120 mel bands.
pub fn default_resolutions() -> Vec<MelResolution> {
    [(512, 40), (1024, 80), (2048, 120)]
        .into_iter()
        .map(|(win, n_mels)| MelResolution {
            win,
            hop: win / 4,
            n_mels,
        })
        .collect()
}

fn hz_to_mel(f: f64) -> f64 {
    2595.0 * (1.0 + f / 700.0).log10()
}

fn mel_to_hz(m: f64) -> f64 {
    700.0 * (10f64.powf(m / 2595.0) - 1.0)
}

/// HTK-scale triangular filters spanning 0 Hz to Nyquist, unnormalized.
/// Row-major `[win / 2 + 1, n_mels]`.
pub fn mel_filterbank(sample_rate_hz: u32, win: usize, n_mels: usize) -> Vec<f64> {
    let bins = win / 2 + 1;
    let top = hz_to_mel(sample_rate_hz as f64 / 2.0);
    let edges: Vec<f64> = (0..n_mels + 2)
        .map(|i| mel_to_hz(top * i as f64 / (n_mels + 1) as f64))
        .collect();
    let mut fb = vec![0f64; bins * n_mels];
    for k in 0..bins {
        let f = k as f64 * sample_rate_hz as f64 / win as f64;
        for m in 0..n_mels {
            let (lo, mid, hi) = (edges[m], edges[m + 1], edges[m + 2]);
            let v = if f > lo && f <= mid {
                (f - lo) / (mid - lo)
            } else if f > mid && f < hi {
                (hi - f) / (hi - mid)
            } else {
                0.0
            };
            fb[k * n_mels + m] = v;
        }
    }
    fb
}

#[derive(Debug, Clone)]
struct Band {
    stft: StftMagnitude,
    res: MelResolution,
    filters: Vec<f64>,
}

/// Multi-resolution log-mel L1 distance.
#[derive(Debug, Clone)]
pub struct MelLoss {
    sample_rate_hz: u32,
    bands: Vec<Band>,
}

impl MelLoss {
    pub fn new(sample_rate_hz: u32, resolutions: &[MelResolution]) -> Result<Self> {
        if resolutions.is_empty() {
            return Err(Error::Config("mel loss needs at least one resolution".into()));
        }
        let bands = resolutions
            .iter()
            .map(|&res| {
                if res.win < 2 || res.win % 2 != 0 || res.hop == 0 || res.n_mels == 0 {
                    return Err(Error::Config(format!("invalid mel resolution {res:?}")));
                }
                Ok(Band {
                    stft: StftMagnitude::new(res.win, res.hop),
                    res,
                    filters: mel_filterbank(sample_rate_hz, res.win, res.n_mels),
                })
            })
            .collect::<Result<_>>()?;
        Ok(Self {
            sample_rate_hz,
            bands,
        })
    }

    pub fn sample_rate_hz(&self) -> u32 {
        self.sample_rate_hz
    }

    fn log_mel(&self, band: &Band, x: &Tensor) -> Result<Tensor> {
        let fb = Tensor::from_slice(
            &band.filters,
            (band.res.win / 2 + 1, band.res.n_mels),
            &Device::Cpu,
        )?
        .to_dtype(x.dtype())?;
        let mel = x.apply_op1(band.stft.clone())?.broadcast_matmul(&fb)?;
        Ok((mel.maximum(LOG_FLOOR)?.log()? / LN_10)?)
    }

    /// Scalar loss on `[B, N]` batches; gradients flow into `rec`.
    pub fn loss_tensor(&self, reference: &Tensor, rec: &Tensor) -> Result<Tensor> {
        if reference.dims() != rec.dims() {
            return Err(Error::Shape(format!(
                "mel loss inputs differ: {:?} vs {:?}",
                reference.dims(),
                rec.dims()
            )));
        }
        let reference = reference.to_dtype(rec.dtype())?.detach();
        let mut total: Option<Tensor> = None;
        for band in &self.bands {
            let a = self.log_mel(band, &reference)?;
            let b = self.log_mel(band, rec)?;
            let l = (a - b)?.abs()?.mean_all()?;
            total = Some(match total {
                None => l,
                Some(t) => (t + l)?,
            });
        }
        let total = total.expect("at least one band");
        Ok((total / self.bands.len() as f64)?)
    }

    /// Waveform-level loss, computed in f64.
    pub fn loss(&self, reference: &Waveform, rec: &Waveform) -> Result<f64> {
        reference.require_rate(self.sample_rate_hz)?;
        rec.require_rate(self.sample_rate_hz)?;
        if reference.len() != rec.len() {
            return Err(Error::Shape(format!(
                "mel loss needs equal lengths, got {} and {}",
                reference.len(),
                rec.len()
            )));
        }
        reference.require_nonempty("mel loss input")?;
        let to_t = |w: &Waveform| -> Result<Tensor> {
            let v: Vec<f64> = w.samples().iter().map(|&s| s as f64).collect();
            Ok(Tensor::from_vec(v, (1, w.len()), &Device::Cpu)?)
        };
        Ok(self.loss_tensor(&to_t(reference)?, &to_t(rec)?)?.to_scalar::<f64>()?)
    }
}

/// Mean over `resolutions` of the L1 distance between log-mel spectrograms.
pub fn mel_loss(reference: &Waveform, rec: &Waveform, resolutions: &[MelResolution]) -> Result<f64> {
    MelLoss::new(reference.sample_rate_hz(), resolutions)?.loss(reference, rec)
}
