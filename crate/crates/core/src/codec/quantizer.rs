use candle_core::Tensor;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{FeatureSequence, TokenSequence};
use crate::error::{Error, Result};

/// `[codebook_size x dim]` code vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct Codebook {
    entries: Vec<f32>,
    dim: usize,
}

impl Codebook {
    pub fn new(entries: Vec<f32>, dim: usize) -> Result<Self> {
        if dim == 0 || entries.is_empty() || entries.len() % dim != 0 {
            return Err(Error::Shape(format!(
                "codebook of {} values is not a whole number of dim-{dim} entries",
                entries.len()
            )));
        }
        if entries.iter().any(|v| !v.is_finite()) {
            return Err(Error::Shape("codebook contains non-finite values".into()));
        }
        let cb = Self { entries, dim };
        let mut rows: Vec<Vec<u32>> = cb
            .rows()
            .map(|r| r.iter().map(|v| v.to_bits()).collect())
            .collect();
        rows.sort_unstable();
        if rows.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Shape("codebook has duplicate entries".into()));
        }
        Ok(cb)
    }

    /// Entries uniform in `[-1, 1]^dim`, redrawn on the (vanishingly rare) collision.
    pub fn uniform(size: usize, dim: usize, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        loop {
            let entries = (0..size * dim)
                .map(|_| rng.random_range(-1.0f32..=1.0))
                .collect();
            match Self::new(entries, dim) {
                Err(Error::Shape(msg)) if msg.contains("duplicate") => continue,
                other => return other,
            }
        }
    }

    /// `size` distinct frames of `data` drawn with a seeded shuffle, then
    /// refined with `iters` Lloyd iterations.
    pub fn from_data(data: &FeatureSequence, size: usize, iters: usize, seed: u64) -> Result<Self> {
        let mut order: Vec<usize> = (0..data.n_frames()).collect();
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let mut entries: Vec<f32> = Vec::with_capacity(size * data.dim());
        let mut seen = std::collections::HashSet::new();
        for i in order {
            if entries.len() == size * data.dim() {
                break;
            }
            let frame = data.frame(i);
            if frame.iter().all(|v| v.is_finite()) && seen.insert(bits(frame)) {
                entries.extend_from_slice(frame);
            }
        }
        if entries.len() < size * data.dim() {
            return Err(Error::Config(format!(
                "need {size} distinct frames to seed the codebook, found {}",
                entries.len() / data.dim()
            )));
        }
        Self::new(entries, data.dim())?.kmeans_refined(data, iters)
    }

    /// Lloyd iterations starting from `self`; clusters that lose every point
    /// keep their previous centroid.
    pub fn kmeans_refined(&self, data: &FeatureSequence, iters: usize) -> Result<Self> {
        check_dim(data, self)?;
        let mut entries = self.entries.clone();
        for _ in 0..iters {
            let cb = Codebook {
                entries: entries.clone(),
                dim: self.dim,
            };
            let tokens = quantize(data, &cb)?;
            let mut sums = vec![0f64; entries.len()];
            let mut counts = vec![0usize; self.size()];
            for (frame, &t) in data.frames().zip(tokens.tokens()) {
                let t = t as usize;
                counts[t] += 1;
                for (s, v) in sums[t * self.dim..(t + 1) * self.dim].iter_mut().zip(frame) {
                    *s += *v as f64;
                }
            }
            for (k, &c) in counts.iter().enumerate() {
                if c > 0 {
                    for d in 0..self.dim {
                        entries[k * self.dim + d] = (sums[k * self.dim + d] / c as f64) as f32;
                    }
                }
            }
        }
        Self::new(entries, self.dim)
    }

    pub fn size(&self) -> usize {
        self.entries.len() / self.dim
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entry(&self, k: usize) -> &[f32] {
        &self.entries[k * self.dim..(k + 1) * self.dim]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f32]> {
        self.entries.chunks_exact(self.dim)
    }

    pub fn entries(&self) -> &[f32] {
        &self.entries
    }

    /// The entries themselves as a feature sequence.
    pub fn as_features(&self, frame_rate_hz: u32) -> FeatureSequence {
        FeatureSequence::new(self.entries.clone(), self.dim, frame_rate_hz)
            .expect("codebook shape already validated")
    }
}

fn bits(frame: &[f32]) -> Vec<u32> {
    frame.iter().map(|v| v.to_bits()).collect()
}

fn check_dim(f: &FeatureSequence, cb: &Codebook) -> Result<()> {
    if f.dim() != cb.dim() {
        return Err(Error::Shape(format!(
            "feature dim {} != codebook dim {}",
            f.dim(),
            cb.dim()
        )));
    }
    Ok(())
}

/// Nearest codebook entry per frame (squared Euclidean distance, accumulated
/// in f64); ties go to the lowest index.
pub fn quantize(f: &FeatureSequence, cb: &Codebook) -> Result<TokenSequence> {
    check_dim(f, cb)?;
    let tokens = f
        .frames()
        .map(|frame| {
            let mut best = 0usize;
            let mut best_d = f64::INFINITY;
            for (k, entry) in cb.rows().enumerate() {
                let d: f64 = frame
                    .iter()
                    .zip(entry)
                    .map(|(a, b)| {
                        let diff = *a as f64 - *b as f64;
                        diff * diff
                    })
                    .sum();
                if d < best_d {
                    best_d = d;
                    best = k;
                }
            }
            best as u32
        })
        .collect();
    TokenSequence::new(tokens, f.frame_rate_hz(), cb.size())
}

pub fn dequantize(t: &TokenSequence, cb: &Codebook) -> Result<FeatureSequence> {
    let mut data = Vec::with_capacity(t.len() * cb.dim());
    for (position, &token) in t.tokens().iter().enumerate() {
        if token as usize >= cb.size() {
            return Err(Error::TokenOutOfRange {
                position,
                token,
                codebook_size: cb.size(),
            });
        }
        data.extend_from_slice(cb.entry(token as usize));
    }
    FeatureSequence::new(data, cb.dim(), t.latent_rate_hz())
}

/// Forward value of `quantized`, gradient of identity w.r.t. `latent`.
pub fn straight_through(latent: &Tensor, quantized: &Tensor) -> Result<Tensor> {
    Ok((latent + (quantized - latent)?.detach())?)
}

/// Mean squared distance pulling `latent` toward its (stopped) code vectors.
pub fn commitment_loss(latent: &Tensor, quantized: &Tensor) -> Result<Tensor> {
    Ok((latent - quantized.detach())?.sqr()?.mean_all()?)
}
