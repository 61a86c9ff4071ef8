use candle_core::{DType, Device, Tensor};

use super::FeatureSequence;
use crate::error::{Error, Result};

/// Average pooling along time: frame `i` of the output is the mean of input
/// frames `[i*stride, i*stride + kernel)`. Trailing frames that do not fill a
/// window are dropped.
pub fn temporal_pool(f: &FeatureSequence, kernel: usize, stride: usize) -> Result<FeatureSequence> {
    if kernel == 0 || stride == 0 {
        return Err(Error::Config(format!(
            "pool kernel and stride must be >= 1 (got {kernel}, {stride})"
        )));
    }
    if f.frame_rate_hz() % stride as u32 != 0 {
        return Err(Error::Config(format!(
            "frame rate {} Hz not divisible by stride {stride}",
            f.frame_rate_hz()
        )));
    }
    let n = f.n_frames();
    if n < kernel {
        return Err(Error::EmptyPool { frames: n, kernel });
    }
    let out_frames = (n - kernel) / stride + 1;
    let dim = f.dim();
    let mut out = vec![0f32; out_frames * dim];
    for (i, dst) in out.chunks_exact_mut(dim).enumerate() {
        for j in i * stride..i * stride + kernel {
            for (d, s) in dst.iter_mut().zip(f.frame(j)) {
                *d += *s;
            }
        }
        for d in dst.iter_mut() {
            *d /= kernel as f32;
        }
    }
    FeatureSequence::new(out, dim, f.frame_rate_hz() / stride as u32)
}

/// `[n_frames, out_frames]` averaging matrix so that `x.matmul(P)` pools a
/// `[.., C, n_frames]` tensor along its last axis.
pub fn pool_matrix(
    n_frames: usize,
    kernel: usize,
    stride: usize,
    dtype: DType,
    device: &Device,
) -> Result<Tensor> {
    if kernel == 0 || stride == 0 {
        return Err(Error::Config("pool kernel and stride must be >= 1".into()));
    }
    if n_frames < kernel {
        return Err(Error::EmptyPool {
            frames: n_frames,
            kernel,
        });
    }
    let out_frames = (n_frames - kernel) / stride + 1;
    let mut m = vec![0f64; n_frames * out_frames];
    for i in 0..out_frames {
        for j in i * stride..i * stride + kernel {
            m[j * out_frames + i] = 1.0 / kernel as f64;
        }
    }
    Ok(Tensor::from_vec(m, (n_frames, out_frames), device)?.to_dtype(dtype)?)
}
