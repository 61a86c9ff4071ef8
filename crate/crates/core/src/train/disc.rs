use std::collections::BTreeMap;

use candle_core::{DType, Tensor, Var};

use crate::codec::{Init, ParamSpec, ParamStore, ParamTensor};
use crate::error::{Error, Result};

pub const PERIODS: [usize; 3] = [2, 3, 5];
const LEAK: f64 = 0.1;
const POWER_ITERATIONS: usize = 8;

/// `(patch, in, out)` per layer. Each layer is a convolution whose kernel
/// equals its stride, so it runs as a reshape plus one matmul.
type Layers = Vec<(usize, usize, usize)>;

#[derive(Debug, Clone, Copy)]
enum Sub {
    Period(usize),
    Scale,
}

impl Sub {
    fn all() -> Vec<Sub> {
        let mut out: Vec<Sub> = PERIODS.iter().map(|&p| Sub::Period(p)).collect();
        out.push(Sub::Scale);
        out
    }

    fn prefix(self) -> String {
        match self {
            Sub::Period(p) => format!("discriminator.period{p}"),
            Sub::Scale => "discriminator.scale".into(),
        }
    }

    fn layers(self) -> Layers {
        match self {
            Sub::Period(_) => vec![(8, 1, 16), (4, 16, 32), (1, 32, 1)],
            Sub::Scale => vec![(16, 1, 16), (8, 16, 32), (1, 32, 1)],
        }
    }
}

/// Small multi-period plus single-scale discriminator ensemble.
///
/// A period-`p` discriminator folds the waveform into `p` interleaved
/// columns and runs the same strided stack down each column; the scale
/// discriminator runs on the raw waveform with coarser strides.
#[derive(Debug, Clone)]
pub struct Discriminator {
    params: ParamStore,
}

impl Discriminator {
    pub fn param_specs() -> Vec<ParamSpec> {
        let mut specs = Vec::new();
        for sub in Sub::all() {
            let prefix = sub.prefix();
            for (i, &(patch, cin, cout)) in sub.layers().iter().enumerate() {
                let bound = 1.0 / ((cin * patch) as f32).sqrt();
                specs.push(ParamSpec::new(
                    format!("{prefix}.layer{i}.weight"),
                    &[cout, cin * patch],
                    Init::Uniform(bound),
                ));
                specs.push(ParamSpec::new(
                    format!("{prefix}.layer{i}.bias"),
                    &[cout],
                    Init::Zeros,
                ));
            }
        }
        specs
    }

    pub fn init(seed: u64, dtype: DType) -> Result<Self> {
        let tensors: BTreeMap<String, ParamTensor> = Self::param_specs()
            .iter()
            .map(|s| (s.name.clone(), s.initialize(seed)))
            .collect();
        Ok(Self {
            params: ParamStore::from_tensors(&tensors, dtype)?,
        })
    }

    pub fn params(&self) -> &ParamStore {
        &self.params
    }

    pub fn vars(&self) -> Vec<Var> {
        self.params.iter().map(|(_, v)| v.clone()).collect()
    }

    /// `x` is `[M, L]`; returns logits `[M, L / prod(patch)]`.
    fn stack(&self, prefix: &str, layers: &Layers, x: &Tensor) -> Result<Tensor> {
        let span: usize = layers.iter().map(|l| l.0).product();
        let (m, l) = x.dims2()?;
        let padded = l.div_ceil(span) * span;
        let mut h = x.pad_with_zeros(1, 0, padded - l)?.reshape((m, padded, 1))?;
        for (i, &(patch, cin, _)) in layers.iter().enumerate() {
            let w = self.params.get(&format!("{prefix}.layer{i}.weight"))?;
            let b = self.params.get(&format!("{prefix}.layer{i}.bias"))?;
            let steps = h.dim(1)? / patch;
            let w = spectral_normalized(w.as_tensor())?;
            h = h
                .reshape((m, steps, patch * cin))?
                .broadcast_matmul(&w.t()?)?
                .broadcast_add(b.as_tensor())?;
            if i + 1 < layers.len() {
                // leaky relu as LEAK * x + (1 - LEAK) * relu(x)
                h = ((&h * LEAK)? + (h.relu()? * (1.0 - LEAK))?)?;
            }
        }
        Ok(h.squeeze(2)?)
    }

    /// Logits of every sub-discriminator for a `[B, N]` batch, in the order
    /// periods 2, 3, 5 then the scale discriminator.
    pub fn forward(&self, x: &Tensor) -> Result<Vec<Tensor>> {
        let (b, n) = x.dims2()?;
        if n == 0 {
            return Err(Error::EmptyInput("discriminator input".into()));
        }
        let x = x.to_dtype(self.params.dtype())?;
        let mut out = Vec::new();
        for sub in Sub::all() {
            let layers = sub.layers();
            let logits = match sub {
                Sub::Period(p) => {
                    let padded_len = n.div_ceil(p) * p;
                    // [B, N/p, p] -> [B, p, N/p] -> [B*p, N/p]
                    let folded = x
                        .pad_with_zeros(1, 0, padded_len - n)?
                        .reshape((b, padded_len / p, p))?
                        .transpose(1, 2)?
                        .contiguous()?
                        .reshape((b * p, padded_len / p))?;
                    self.stack(&sub.prefix(), &layers, &folded)?
                }
                Sub::Scale => self.stack(&sub.prefix(), &layers, &x)?,
            };
            out.push(logits);
        }
        Ok(out)
    }
}

/// `w / sigma(w)` where `sigma` is the largest singular value, found by power
/// iteration on a detached copy and applied as `u^T w v` so the gradient sees
/// the normalization.
fn spectral_normalized(w: &Tensor) -> Result<Tensor> {
    let (rows, cols) = w.dims2()?;
    let data = w.to_dtype(DType::F64)?.flatten_all()?.to_vec1::<f64>()?;
    let mut v = vec![1.0 / (cols as f64).sqrt(); cols];
    let mut u = vec![0.0; rows];
    for _ in 0..POWER_ITERATIONS {
        for (r, ur) in u.iter_mut().enumerate() {
            *ur = data[r * cols..(r + 1) * cols].iter().zip(&v).map(|(a, b)| a * b).sum();
        }
        normalize(&mut u);
        v.iter_mut().enumerate().for_each(|(c, vc)| {
            *vc = (0..rows).map(|r| data[r * cols + c] * u[r]).sum();
        });
        normalize(&mut v);
    }
    let device = w.device();
    let u = Tensor::from_vec(u, (1, rows), device)?.to_dtype(w.dtype())?;
    let v = Tensor::from_vec(v, (cols, 1), device)?.to_dtype(w.dtype())?;
    let sigma = u.matmul(w)?.matmul(&v)?.reshape(())?;
    Ok(w.broadcast_div(&sigma)?)
}

fn normalize(x: &mut [f64]) {
    let n = x.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-12);
    x.iter_mut().for_each(|v| *v /= n);
}

/// Sum over sub-discriminators of `mean(relu(1 - real)) + mean(relu(1 + fake))`.
pub fn hinge_disc_loss(real: &[Tensor], fake: &[Tensor]) -> Result<Tensor> {
    if real.len() != fake.len() || real.is_empty() {
        return Err(Error::Shape("mismatched discriminator outputs".into()));
    }
    let mut total: Option<Tensor> = None;
    for (r, f) in real.iter().zip(fake) {
        let l = ((1.0 - r)?.relu()?.mean_all()? + (f + 1.0)?.relu()?.mean_all()?)?;
        total = Some(match total {
            None => l,
            Some(t) => (t + l)?,
        });
    }
    Ok(total.expect("nonempty"))
}

/// Sum over sub-discriminators of `-mean(fake)`.
pub fn hinge_gen_loss(fake: &[Tensor]) -> Result<Tensor> {
    if fake.is_empty() {
        return Err(Error::Shape("no discriminator outputs".into()));
    }
    let mut total: Option<Tensor> = None;
    for f in fake {
        let l = f.mean_all()?.neg()?;
        total = Some(match total {
            None => l,
            Some(t) => (t + l)?,
        });
    }
    Ok(total.expect("nonempty"))
}

/// `(gen_adv, disc_loss)` for one reference/reconstruction pair.
pub fn adversarial_losses(disc: &Discriminator, reference: &Tensor, rec: &Tensor) -> Result<(Tensor, Tensor)> {
    if reference.dims() != rec.dims() {
        return Err(Error::Shape(format!(
            "adversarial inputs differ: {:?} vs {:?}",
            reference.dims(),
            rec.dims()
        )));
    }
    let real = disc.forward(reference)?;
    let fake = disc.forward(rec)?;
    let fake_detached: Vec<Tensor> = disc.forward(&rec.detach())?;
    Ok((hinge_gen_loss(&fake)?, hinge_disc_loss(&real, &fake_detached)?))
}
