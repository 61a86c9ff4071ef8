use serde::{Deserialize, Serialize};

use crate::audio::Waveform;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VadConfig {
    pub frame_ms: u32,
    pub energy_threshold_db: f64,
    pub min_silence_s: f64,
}

impl Default for VadConfig {
    fn default() -> Self {
        Self {
            frame_ms: 20,
            energy_threshold_db: -40.0,
            min_silence_s: 0.2,
        }
    }
}

impl VadConfig {
    pub fn validate(&self) -> Result<()> {
        if !(10..=40).contains(&self.frame_ms) {
            return Err(Error::Config(format!("frame_ms {} outside [10, 40]", self.frame_ms)));
        }
        if !(self.min_silence_s > 0.0) {
            return Err(Error::Config("min_silence_s must be positive".into()));
        }
        Ok(())
    }
}

/// Per-frame speech/non-speech decision. The energy gate below is the default;
/// any other detector can be plugged into [`trim_silence`].
pub trait FrameClassifier {
    fn frame_len(&self, sample_rate_hz: u32) -> usize;
    fn is_speech(&self, frame: &[f32]) -> bool;
}

/// Frame RMS in dBFS compared against a fixed threshold.
#[derive(Debug, Clone, Copy)]
pub struct EnergyGate {
    pub frame_ms: u32,
    pub threshold_db: f64,
}

impl From<&VadConfig> for EnergyGate {
    fn from(vc: &VadConfig) -> Self {
        Self {
            frame_ms: vc.frame_ms,
            threshold_db: vc.energy_threshold_db,
        }
    }
}

pub fn rms_dbfs(frame: &[f32]) -> f64 {
    if frame.is_empty() {
        return f64::NEG_INFINITY;
    }
    let ms = frame.iter().map(|v| (*v as f64).powi(2)).sum::<f64>() / frame.len() as f64;
    10.0 * ms.log10()
}

impl FrameClassifier for EnergyGate {
    fn frame_len(&self, sample_rate_hz: u32) -> usize {
        ((self.frame_ms as u64 * sample_rate_hz as u64 + 500) / 1000).max(1) as usize
    }

    fn is_speech(&self, frame: &[f32]) -> bool {
        rms_dbfs(frame) >= self.threshold_db
    }
}

/// Removes every run of consecutive non-speech frames lasting at least
/// `min_silence_s`; shorter runs stay. Retained audio keeps its order.
pub fn trim_silence(
    w: &Waveform,
    classifier: &impl FrameClassifier,
    min_silence_s: f64,
) -> Result<Waveform> {
    w.require_nonempty("vad input")?;
    let frame_len = classifier.frame_len(w.sample_rate_hz());
    let min_run = (min_silence_s * w.sample_rate_hz() as f64).round() as usize;
    let x = w.samples();
    let mut out = Vec::with_capacity(x.len());
    let mut run_start: Option<usize> = None;
    let flush = |out: &mut Vec<f32>, start: usize, end: usize| {
        if end - start < min_run {
            out.extend_from_slice(&x[start..end]);
        }
    };
    for (i, frame) in x.chunks(frame_len).enumerate() {
        let start = i * frame_len;
        if classifier.is_speech(frame) {
            if let Some(s) = run_start.take() {
                flush(&mut out, s, start);
            }
            out.extend_from_slice(frame);
        } else if run_start.is_none() {
            run_start = Some(start);
        }
    }
    if let Some(s) = run_start {
        flush(&mut out, s, x.len());
    }
    if out.is_empty() {
        return Err(Error::AllSilence);
    }
    Waveform::new(out, w.sample_rate_hz())
}

pub fn vad_trim(w: &Waveform, vc: &VadConfig) -> Result<Waveform> {
    vc.validate()?;
    trim_silence(w, &EnergyGate::from(vc), vc.min_silence_s)
}
