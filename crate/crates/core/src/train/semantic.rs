use candle_core::Tensor;

use crate::codec::FeatureSequence;
use crate::error::{Error, Result};

/// `1 - cos` between aligned frames, averaged. A frame where either vector
/// has zero norm contributes 1.
pub fn semantic_loss(ref_feats: &FeatureSequence, latent: &FeatureSequence) -> Result<f64> {
    if ref_feats.n_frames() != latent.n_frames() || ref_feats.dim() != latent.dim() {
        return Err(Error::Alignment(format!(
            "semantic loss over {}x{} vs {}x{}",
            ref_feats.n_frames(),
            ref_feats.dim(),
            latent.n_frames(),
            latent.dim()
        )));
    }
    if ref_feats.n_frames() == 0 {
        return Err(Error::EmptyInput("semantic loss frames".into()));
    }
    let sum: f64 = ref_feats
        .frames()
        .zip(latent.frames())
        .map(|(a, b)| 1.0 - cosine(a, b))
        .sum();
    Ok(sum / ref_feats.n_frames() as f64)
}

fn cosine(a: &[f32], b: &[f32]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| *x as f64 * *y as f64).sum();
    let na: f64 = a.iter().map(|x| (*x as f64).powi(2)).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|x| (*x as f64).powi(2)).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        (dot / (na * nb)).clamp(-1.0, 1.0)
    }
}

/// Batched form over `[B, D, T]` tensors, averaged over every frame.
pub fn semantic_loss_tensor(ref_feats: &Tensor, latent: &Tensor) -> Result<Tensor> {
    if ref_feats.dims() != latent.dims() {
        return Err(Error::Alignment(format!(
            "semantic loss over {:?} vs {:?}",
            ref_feats.dims(),
            latent.dims()
        )));
    }
    let a = ref_feats.to_dtype(latent.dtype())?;
    let dot = (&a * latent)?.sum(1)?;
    let na = a.sqr()?.sum(1)?.sqrt()?;
    let nb = latent.sqr()?.sum(1)?.sqrt()?;
    // zero-norm frames have dot = 0, so the floor only guards the division
    let denom = (na * nb)?.maximum(1e-30)?;
    let cos = (dot / denom)?.clamp(-1.0, 1.0)?;
    Ok((1.0 - cos.mean_all()?)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use candle_core::Device;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn seq(frames: &[Vec<f32>]) -> FeatureSequence {
        FeatureSequence::from_frames(frames, 25).unwrap()
    }

    #[test]
    fn parallel_and_antiparallel() {
        let a = seq(&[vec![1.0, 2.0], vec![-3.0, 0.5]]);
        let scaled = seq(&[vec![2.0, 4.0], vec![-6.0, 1.0]]);
        let neg = seq(&[vec![-1.0, -2.0], vec![3.0, -0.5]]);
        assert!(semantic_loss(&a, &scaled).unwrap().abs() < 1e-12);
        assert!((semantic_loss(&a, &neg).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn zero_frame_counts_as_one() {
        let a = seq(&[vec![1.0, 0.0], vec![0.0, 0.0]]);
        let b = seq(&[vec![1.0, 0.0], vec![1.0, 1.0]]);
        assert!((semantic_loss(&a, &b).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn errors() {
        let a = seq(&[vec![1.0, 0.0]]);
        let b = seq(&[vec![1.0, 0.0], vec![1.0, 0.0]]);
        assert!(matches!(semantic_loss(&a, &b), Err(Error::Alignment(_))));
    }

    #[test]
    fn batched_form_matches_frame_loop() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let (d, t) = (6, 9);
        let a: Vec<f32> = (0..d * t).map(|_| rng.random_range(-1.0..1.0)).collect();
        let mut b: Vec<f32> = (0..d * t).map(|_| rng.random_range(-1.0..1.0)).collect();
        for c in 0..d {
            b[c * t + 4] = 0.0; // frame 4 of b is silent
        }
        // [D, T] channel-major tensors, frame-major sequences
        let frames = |v: &[f32]| -> Vec<Vec<f32>> {
            (0..t).map(|j| (0..d).map(|c| v[c * t + j]).collect()).collect()
        };
        let expected = semantic_loss(&seq(&frames(&a)), &seq(&frames(&b))).unwrap();
        let ta = Tensor::from_vec(a, (1, d, t), &Device::Cpu).unwrap();
        let tb = Tensor::from_vec(b, (1, d, t), &Device::Cpu).unwrap();
        let got = semantic_loss_tensor(&ta, &tb).unwrap().to_scalar::<f32>().unwrap() as f64;
        assert!((got - expected).abs() < 1e-6, "{got} vs {expected}");
    }
}
