use candle_core::DType;

use super::checkpoint::Checkpoint;
use crate::codec::Codec;
use crate::config::CodecConfig;
use crate::error::Result;
use crate::train::freeze::FreezePolicy;
use crate::train::synth::synthetic_corpus;

pub const CALIBRATION_CLIPS: usize = 64;
pub const CALIBRATION_SECONDS: f64 = 1.0;
pub const CALIBRATION_ITERS: usize = 10;

/// Seeded stand-in for a pretrained 50 Hz / 16 kHz model: frozen encoders
/// from the seed, a codebook fitted by k-means to the latents of a synthetic
/// corpus, and a freshly initialized decoder.
pub fn desk_baseline(seed: u64) -> Result<Checkpoint> {
    let cfg = CodecConfig::baseline_desk(seed);
    let codec = Codec::init(cfg, DType::F32)?;
    let corpus = synthetic_corpus(
        CALIBRATION_CLIPS,
        CALIBRATION_SECONDS,
        cfg.encoder_sample_rate_hz,
        seed.wrapping_add(777),
    )?;
    let codec = codec.calibrate_codebook(&corpus, CALIBRATION_ITERS)?;
    Checkpoint::from_codec(&codec, FreezePolicy::DecoderOnly)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_and_retargetable() {
        let a = desk_baseline(4).unwrap();
        assert_eq!(a.to_bytes().unwrap(), desk_baseline(4).unwrap().to_bytes().unwrap());
        assert_ne!(a.frozen_digest().unwrap(), desk_baseline(5).unwrap().frozen_digest().unwrap());
        let out = super::super::retarget(&a, &super::super::RetargetPlan::hop320_to_hop960()).unwrap();
        assert_eq!(out.config.latent_rate_hz(), 25);
    }
}
