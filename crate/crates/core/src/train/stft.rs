use std::f64::consts::PI;
use std::sync::Arc;

use candle_core::{CpuStorage, CustomOp1, DType, Layout, Shape, Tensor};
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

/// Added under the square root so the magnitude stays differentiable at zero.
const MAG_EPS: f64 = 1e-10;

/// Magnitude STFT as a differentiable op: `[B, N] -> [B, frames, bins]`.
///
/// Frames are centered (input zero-padded by `win / 2` on both sides), the
/// window is a periodic Hann of length `win` and the FFT size equals `win`.
/// `frames = 1 + N / hop`, `bins = win / 2 + 1`.
#[derive(Clone)]
pub struct StftMagnitude {
    win: usize,
    hop: usize,
    window: Arc<Vec<f64>>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for StftMagnitude {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("StftMagnitude")
            .field("win", &self.win)
            .field("hop", &self.hop)
            .finish()
    }
}

pub fn hann(win: usize) -> Vec<f64> {
    (0..win)
        .map(|k| 0.5 - 0.5 * (2.0 * PI * k as f64 / win as f64).cos())
        .collect()
}

impl StftMagnitude {
    pub fn new(win: usize, hop: usize) -> Self {
        assert!(win >= 2 && win % 2 == 0 && hop >= 1, "bad STFT geometry {win}/{hop}");
        let mut planner = FftPlanner::new();
        Self {
            win,
            hop,
            window: Arc::new(hann(win)),
            forward: planner.plan_fft_forward(win),
            inverse: planner.plan_fft_inverse(win),
        }
    }

    pub fn bins(&self) -> usize {
        self.win / 2 + 1
    }

    pub fn frames(&self, n: usize) -> usize {
        1 + n / self.hop
    }

    /// Windowed, zero-padded frame `t` of `x` into `buf`.
    fn load_frame(&self, x: &[f64], t: usize, buf: &mut [Complex64]) {
        let start = (t * self.hop) as isize - (self.win / 2) as isize;
        for (k, slot) in buf.iter_mut().enumerate() {
            let j = start + k as isize;
            let v = if j >= 0 && (j as usize) < x.len() {
                x[j as usize] * self.window[k]
            } else {
                0.0
            };
            *slot = Complex64::new(v, 0.0);
        }
    }

    /// Forward pass on one signal, returning `frames * bins` magnitudes.
    pub fn magnitudes(&self, x: &[f64]) -> Vec<f64> {
        let bins = self.bins();
        let frames = self.frames(x.len());
        let mut buf = vec![Complex64::default(); self.win];
        let mut out = Vec::with_capacity(frames * bins);
        for t in 0..frames {
            self.load_frame(x, t, &mut buf);
            self.forward.process(&mut buf);
            out.extend(buf[..bins].iter().map(|c| (c.norm_sqr() + MAG_EPS).sqrt()));
        }
        out
    }

    /// Vector-Jacobian product for one signal.
    fn backward(&self, x: &[f64], grad: &[f64]) -> Vec<f64> {
        let bins = self.bins();
        let mut out = vec![0f64; x.len()];
        let mut buf = vec![Complex64::default(); self.win];
        for t in 0..self.frames(x.len()) {
            self.load_frame(x, t, &mut buf);
            self.forward.process(&mut buf);
            // d|X_f| / d frame_k = Re(X_f e^{+i 2 pi f k / W}) / |X_f|, so the
            // product with g is the real part of an inverse DFT.
            let g = &grad[t * bins..(t + 1) * bins];
            for (f, c) in buf.iter_mut().enumerate() {
                *c = if f < bins {
                    *c * (g[f] / (c.norm_sqr() + MAG_EPS).sqrt())
                } else {
                    Complex64::default()
                };
            }
            self.inverse.process(&mut buf);
            let start = (t * self.hop) as isize - (self.win / 2) as isize;
            for (k, c) in buf.iter().enumerate() {
                let j = start + k as isize;
                if j >= 0 && (j as usize) < x.len() {
                    out[j as usize] += c.re * self.window[k];
                }
            }
        }
        out
    }
}

fn rows_f64(storage: &CpuStorage, layout: &Layout) -> candle_core::Result<(usize, usize, Vec<f64>)> {
    let (b, n) = layout.shape().dims2()?;
    let (start, end) = layout
        .contiguous_offsets()
        .ok_or_else(|| candle_core::Error::Msg("stft input must be contiguous".into()))?;
    let data = match storage {
        CpuStorage::F32(v) => v[start..end].iter().map(|&s| s as f64).collect(),
        CpuStorage::F64(v) => v[start..end].to_vec(),
        _ => return Err(candle_core::Error::Msg("stft supports f32 and f64".into())),
    };
    Ok((b, n, data))
}

impl CustomOp1 for StftMagnitude {
    fn name(&self) -> &'static str {
        "stft-magnitude"
    }

    fn cpu_fwd(&self, storage: &CpuStorage, layout: &Layout) -> candle_core::Result<(CpuStorage, Shape)> {
        let (b, n, data) = rows_f64(storage, layout)?;
        let mut out = Vec::with_capacity(b * self.frames(n) * self.bins());
        for row in data.chunks_exact(n.max(1)).take(b) {
            out.extend(self.magnitudes(row));
        }
        let shape = Shape::from((b, self.frames(n), self.bins()));
        let storage = match storage {
            CpuStorage::F32(_) => CpuStorage::F32(out.into_iter().map(|v| v as f32).collect()),
            _ => CpuStorage::F64(out),
        };
        Ok((storage, shape))
    }

    fn bwd(&self, arg: &Tensor, _res: &Tensor, grad_res: &Tensor) -> candle_core::Result<Option<Tensor>> {
        let (b, n) = arg.dims2()?;
        let x = arg.to_dtype(DType::F64)?.contiguous()?.flatten_all()?.to_vec1::<f64>()?;
        let g = grad_res
            .to_dtype(DType::F64)?
            .contiguous()?
            .flatten_all()?
            .to_vec1::<f64>()?;
        let per = self.frames(n) * self.bins();
        let mut out = Vec::with_capacity(b * n);
        for i in 0..b {
            out.extend(self.backward(&x[i * n..(i + 1) * n], &g[i * per..(i + 1) * per]));
        }
        let grad = Tensor::from_vec(out, (b, n), arg.device())?.to_dtype(arg.dtype())?;
        Ok(Some(grad))
    }
}
