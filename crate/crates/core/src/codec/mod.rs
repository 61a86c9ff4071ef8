//! The codec: frozen encoders, fusion, temporal pooling, single-codebook
//! quantization and the hop-parameterized generator.

mod model;
mod params;
mod pool;
mod quantizer;

pub use model::{Codec, EncodedBatch, CODEBOOK, HEAD_BIAS, HEAD_WEIGHT, SUBFRAMES};
pub use params::{Init, ParamSpec, ParamStore, ParamTensor};
pub use pool::{pool_matrix, temporal_pool};
pub use quantizer::{commitment_loss, dequantize, quantize, straight_through, Codebook};

use crate::error::{Error, Result};

/// A `[n_frames x dim]` matrix of frame features at a fixed frame rate.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSequence {
    data: Vec<f32>,
    dim: usize,
    frame_rate_hz: u32,
}

impl FeatureSequence {
    pub fn new(data: Vec<f32>, dim: usize, frame_rate_hz: u32) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Shape("feature dim must be >= 1".into()));
        }
        if data.len() % dim != 0 {
            return Err(Error::Shape(format!(
                "{} values do not form whole frames of dim {dim}",
                data.len()
            )));
        }
        Ok(Self {
            data,
            dim,
            frame_rate_hz,
        })
    }

    pub fn from_frames(frames: &[Vec<f32>], frame_rate_hz: u32) -> Result<Self> {
        let dim = frames
            .first()
            .map(Vec::len)
            .ok_or_else(|| Error::Shape("cannot infer dim from zero frames".into()))?;
        if frames.iter().any(|f| f.len() != dim) {
            return Err(Error::Shape("ragged frames".into()));
        }
        Self::new(frames.concat(), dim, frame_rate_hz)
    }

    pub fn empty(dim: usize, frame_rate_hz: u32) -> Self {
        Self {
            data: Vec::new(),
            dim: dim.max(1),
            frame_rate_hz,
        }
    }

    pub fn n_frames(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn frame_rate_hz(&self) -> u32 {
        self.frame_rate_hz
    }

    pub fn frame(&self, i: usize) -> &[f32] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn frames(&self) -> impl Iterator<Item = &[f32]> {
        self.data.chunks_exact(self.dim)
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn to_frames(&self) -> Vec<Vec<f32>> {
        self.frames().map(<[f32]>::to_vec).collect()
    }
}

/// Single-stream codec tokens (Nq = 1).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenSequence {
    tokens: Vec<u32>,
    latent_rate_hz: u32,
    codebook_size: usize,
}

impl TokenSequence {
    pub fn new(tokens: Vec<u32>, latent_rate_hz: u32, codebook_size: usize) -> Result<Self> {
        if let Some((position, &token)) = tokens
            .iter()
            .enumerate()
            .find(|(_, &t)| t as usize >= codebook_size)
        {
            return Err(Error::TokenOutOfRange {
                position,
                token,
                codebook_size,
            });
        }
        Ok(Self {
            tokens,
            latent_rate_hz,
            codebook_size,
        })
    }

    pub fn tokens(&self) -> &[u32] {
        &self.tokens
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn latent_rate_hz(&self) -> u32 {
        self.latent_rate_hz
    }

    pub fn codebook_size(&self) -> usize {
        self.codebook_size
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn feature_sequence_shape_checks() {
        assert!(FeatureSequence::new(vec![1.0; 5], 2, 50).is_err());
        assert!(FeatureSequence::new(vec![], 0, 50).is_err());
        assert!(FeatureSequence::from_frames(&[vec![1.0], vec![1.0, 2.0]], 50).is_err());
        let f = FeatureSequence::from_frames(&[vec![1.0, 2.0], vec![3.0, 4.0]], 50).unwrap();
        assert_eq!(f.n_frames(), 2);
        assert_eq!(f.frame(1), &[3.0, 4.0]);
    }

    #[test]
    fn token_sequence_rejects_out_of_range() {
        let err = TokenSequence::new(vec![0, 3, 4], 25, 4).unwrap_err();
        assert!(matches!(
            err,
            Error::TokenOutOfRange {
                position: 2,
                token: 4,
                ..
            }
        ));
    }
}
