use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Rate and shape hyperparameters of a codec.
///
/// The latent rate is derived (`encoder_frame_rate_hz / pool_stride`) and must
/// satisfy `latent_rate_hz * hop_samples == target_sample_rate_hz` exactly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CodecConfig {
    pub target_sample_rate_hz: u32,
    pub encoder_sample_rate_hz: u32,
    pub encoder_frame_rate_hz: u32,
    pub pool_kernel: usize,
    pub pool_stride: usize,
    pub hop_samples: usize,
    pub codebook_size: usize,
    pub latent_dim: usize,
    pub hidden_dim: usize,
    pub seed: u64,
}

pub const FULL_SCALE_CODEBOOK: usize = 65536;
pub const DESK_CODEBOOK: usize = 256;

impl CodecConfig {
    /// Desk-scale stand-in for the pretrained 50 Hz / 16 kHz model (hop 320, no pooling).
    pub fn baseline_desk(seed: u64) -> Self {
        Self {
            target_sample_rate_hz: 16_000,
            encoder_sample_rate_hz: 16_000,
            encoder_frame_rate_hz: 50,
            pool_kernel: 1,
            pool_stride: 1,
            hop_samples: 320,
            codebook_size: DESK_CODEBOOK,
            latent_dim: 8,
            hidden_dim: 32,
            seed,
        }
    }

    /// The retargeted 25 Hz / 24 kHz geometry (hop 960, pool k=2 s=2).
    pub fn retargeted_desk(seed: u64) -> Self {
        Self {
            target_sample_rate_hz: 24_000,
            pool_kernel: 2,
            pool_stride: 2,
            hop_samples: 960,
            ..Self::baseline_desk(seed)
        }
    }

    pub fn validated(self) -> Result<Self> {
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("target_sample_rate_hz", self.target_sample_rate_hz as usize),
            ("encoder_sample_rate_hz", self.encoder_sample_rate_hz as usize),
            ("encoder_frame_rate_hz", self.encoder_frame_rate_hz as usize),
            ("pool_kernel", self.pool_kernel),
            ("pool_stride", self.pool_stride),
            ("hop_samples", self.hop_samples),
            ("latent_dim", self.latent_dim),
            ("hidden_dim", self.hidden_dim),
        ];
        for (name, v) in positive {
            if v == 0 {
                return Err(Error::Config(format!("{name} must be >= 1")));
            }
        }
        if self.codebook_size < 2 {
            return Err(Error::Config(format!(
                "codebook_size must be >= 2, got {}",
                self.codebook_size
            )));
        }
        if self.codebook_size > u32::MAX as usize {
            return Err(Error::Config("codebook_size exceeds token range".into()));
        }
        if self.encoder_sample_rate_hz % self.encoder_frame_rate_hz != 0 {
            return Err(Error::Config(format!(
                "encoder rate {} Hz is not a whole multiple of frame rate {} Hz",
                self.encoder_sample_rate_hz, self.encoder_frame_rate_hz
            )));
        }
        if self.encoder_hop() % crate::codec::SUBFRAMES != 0 {
            return Err(Error::Config(format!(
                "encoder hop {} is not divisible into {} sub-frames",
                self.encoder_hop(),
                crate::codec::SUBFRAMES
            )));
        }
        if self.encoder_frame_rate_hz as usize % self.pool_stride != 0 {
            return Err(Error::Config(format!(
                "frame rate {} Hz is not divisible by pool stride {}",
                self.encoder_frame_rate_hz, self.pool_stride
            )));
        }
        let produced = self.latent_rate_hz() as u64 * self.hop_samples as u64;
        if produced != self.target_sample_rate_hz as u64 {
            return Err(Error::Config(format!(
                "rate identity violated: {} Hz x hop {} = {} != {} Hz",
                self.latent_rate_hz(),
                self.hop_samples,
                produced,
                self.target_sample_rate_hz
            )));
        }
        Ok(())
    }

    pub fn latent_rate_hz(&self) -> u32 {
        self.encoder_frame_rate_hz / self.pool_stride.max(1) as u32
    }

    /// Encoder-rate samples consumed per encoder frame (320 at 16 kHz / 50 Hz).
    pub fn encoder_hop(&self) -> usize {
        (self.encoder_sample_rate_hz / self.encoder_frame_rate_hz) as usize
    }

    /// Encoder frames produced from `n_samples` encoder-rate samples.
    pub fn encoder_frames(&self, n_samples: usize) -> usize {
        (n_samples as u64 * self.encoder_frame_rate_hz as u64 / self.encoder_sample_rate_hz as u64)
            as usize
    }

    /// Tokens produced from `n_samples` encoder-rate samples (floor rules at both stages).
    pub fn token_count(&self, n_samples: usize) -> usize {
        let frames = self.encoder_frames(n_samples);
        if frames < self.pool_kernel {
            0
        } else {
            (frames - self.pool_kernel) / self.pool_stride + 1
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_scale_geometry_satisfies_rate_identity() {
        let cfg = CodecConfig::retargeted_desk(0).validated().unwrap();
        assert_eq!(cfg.latent_rate_hz(), 25);
        assert_eq!(cfg.latent_rate_hz() as usize * cfg.hop_samples, 24_000);
        let base = CodecConfig::baseline_desk(0).validated().unwrap();
        assert_eq!(base.latent_rate_hz(), 50);
        assert_eq!(base.encoder_hop(), 320);
    }

    #[test]
    fn full_scale_codebook_is_accepted() {
        let cfg = CodecConfig {
            codebook_size: FULL_SCALE_CODEBOOK,
            ..CodecConfig::retargeted_desk(1)
        };
        assert!(cfg.validate().is_ok());
    }

    #[test]
    fn rejects_broken_rate_identity() {
        let cfg = CodecConfig {
            hop_samples: 320,
            ..CodecConfig::retargeted_desk(0)
        };
        assert!(matches!(cfg.validate(), Err(Error::Config(_))));
        let cfg = CodecConfig {
            codebook_size: 1,
            ..CodecConfig::retargeted_desk(0)
        };
        assert!(cfg.validate().is_err());
        let cfg = CodecConfig {
            latent_dim: 0,
            ..CodecConfig::retargeted_desk(0)
        };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn token_count_uses_floor_rules() {
        let cfg = CodecConfig::retargeted_desk(0);
        assert_eq!(cfg.token_count(16_000), 25);
        assert_eq!(cfg.token_count(32_000), 50);
        // 51 frames -> 25 tokens
        assert_eq!(cfg.token_count(51 * 320), 25);
        assert_eq!(cfg.token_count(319), 0);
    }
}
