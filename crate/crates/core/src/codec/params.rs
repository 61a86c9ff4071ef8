use std::collections::BTreeMap;

use candle_core::{DType, Device, Tensor, Var};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A named parameter's value, independent of any compute backend.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamTensor {
    pub shape: Vec<usize>,
    pub data: Vec<f32>,
}

impl ParamTensor {
    pub fn new(shape: Vec<usize>, data: Vec<f32>) -> Result<Self> {
        let n: usize = shape.iter().product();
        if n != data.len() {
            return Err(Error::Shape(format!(
                "shape {shape:?} needs {n} values, got {}",
                data.len()
            )));
        }
        Ok(Self { shape, data })
    }

    pub fn numel(&self) -> usize {
        self.data.len()
    }

    pub fn to_le_bytes(&self) -> Vec<u8> {
        self.data.iter().flat_map(|v| v.to_le_bytes()).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Init {
    /// Uniform in `[-bound, bound]`.
    Uniform(f32),
    Zeros,
    /// Hann-windowed cosines with mel-spaced centre frequencies, one per
    /// output channel, each scaled to unit L2 norm. Shape `[out, 1, kernel]`.
    Gabor { sample_rate_hz: u32 },
}

fn gabor_bank(out: usize, kernel: usize, sample_rate_hz: u32) -> Vec<f32> {
    let sr = sample_rate_hz as f64;
    let mel = |f: f64| 2595.0 * (1.0 + f / 700.0).log10();
    let hz = |m: f64| 700.0 * (10f64.powf(m / 2595.0) - 1.0);
    let (lo, hi) = (mel(60.0), mel(0.45 * sr));
    let mut data = Vec::with_capacity(out * kernel);
    for i in 0..out {
        let f = hz(lo + (hi - lo) * (i as f64 + 0.5) / out as f64);
        let taps: Vec<f64> = (0..kernel)
            .map(|k| {
                let w = 0.5 - 0.5 * (2.0 * std::f64::consts::PI * (k as f64 + 0.5) / kernel as f64).cos();
                w * (2.0 * std::f64::consts::PI * f * k as f64 / sr).cos()
            })
            .collect();
        let norm = taps.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-12);
        data.extend(taps.iter().map(|v| (v / norm) as f32));
    }
    data
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParamSpec {
    pub name: String,
    pub shape: Vec<usize>,
    pub init: Init,
}

impl ParamSpec {
    pub fn new(name: impl Into<String>, shape: &[usize], init: Init) -> Self {
        Self {
            name: name.into(),
            shape: shape.to_vec(),
            init,
        }
    }

    /// Each parameter draws from its own stream keyed by `(seed, name)`, so a
    /// parameter's initial value does not depend on what else exists.
    pub fn initialize(&self, seed: u64) -> ParamTensor {
        let n: usize = self.shape.iter().product();
        let data = match self.init {
            Init::Zeros => vec![0.0; n],
            Init::Gabor { sample_rate_hz } => {
                let kernel = *self.shape.last().unwrap_or(&1);
                gabor_bank(n / kernel.max(1), kernel, sample_rate_hz)
            }
            Init::Uniform(bound) => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed ^ fnv1a(self.name.as_bytes()));
                (0..n).map(|_| rng.random_range(-bound..=bound)).collect()
            }
        };
        ParamTensor {
            shape: self.shape.clone(),
            data,
        }
    }
}

fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf29ce484222325u64, |h, b| {
        (h ^ *b as u64).wrapping_mul(0x100000001b3)
    })
}

/// Parameters as tracked variables, keyed by dotted name in sorted order.
#[derive(Debug, Clone)]
pub struct ParamStore {
    vars: BTreeMap<String, Var>,
    dtype: DType,
    device: Device,
}

impl ParamStore {
    pub fn from_tensors(tensors: &BTreeMap<String, ParamTensor>, dtype: DType) -> Result<Self> {
        let device = Device::Cpu;
        let mut vars = BTreeMap::new();
        for (name, p) in tensors {
            let t = Tensor::from_vec(p.data.clone(), p.shape.as_slice(), &device)?.to_dtype(dtype)?;
            vars.insert(name.clone(), Var::from_tensor(&t)?);
        }
        Ok(Self {
            vars,
            dtype,
            device,
        })
    }

    pub fn get(&self, name: &str) -> Result<&Var> {
        self.vars
            .get(name)
            .ok_or_else(|| Error::MissingParam(name.to_string()))
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.vars.keys().map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Var)> {
        self.vars.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn dtype(&self) -> DType {
        self.dtype
    }

    pub fn device(&self) -> &Device {
        &self.device
    }

    pub fn to_param_tensor(&self, name: &str) -> Result<ParamTensor> {
        let v = self.get(name)?;
        let data = v
            .as_tensor()
            .to_dtype(DType::F32)?
            .flatten_all()?
            .to_vec1::<f32>()?;
        ParamTensor::new(v.dims().to_vec(), data)
    }

    pub fn to_tensors(&self) -> Result<BTreeMap<String, ParamTensor>> {
        self.vars
            .keys()
            .map(|k| Ok((k.clone(), self.to_param_tensor(k)?)))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn initialization_is_keyed_by_name() {
        let a = ParamSpec::new("decoder.head.weight", &[4, 3], Init::Uniform(0.5));
        let b = ParamSpec::new("decoder.head.bias", &[4, 3], Init::Uniform(0.5));
        assert_eq!(a.initialize(7), a.initialize(7));
        assert_ne!(a.initialize(7), a.initialize(8));
        assert_ne!(a.initialize(7).data, b.initialize(7).data);
        assert!(a.initialize(7).data.iter().all(|v| v.abs() <= 0.5));
    }

    #[test]
    fn store_round_trip() {
        let mut m = BTreeMap::new();
        m.insert(
            "x".to_string(),
            ParamTensor::new(vec![2, 2], vec![1.0, -2.5, 3.25, 0.0]).unwrap(),
        );
        for dtype in [DType::F32, DType::F64] {
            let store = ParamStore::from_tensors(&m, dtype).unwrap();
            assert_eq!(store.to_tensors().unwrap(), m);
        }
        assert!(ParamTensor::new(vec![3], vec![0.0; 2]).is_err());
    }

    #[test]
    fn gabor_filters_are_unit_norm_and_tuned() {
        let spec = ParamSpec::new("enc.weight", &[8, 1, 320], Init::Gabor { sample_rate_hz: 16_000 });
        let t = spec.initialize(0);
        assert_eq!(t, spec.initialize(99));
        let mut peaks = Vec::new();
        for row in t.data.chunks(320) {
            let norm: f64 = row.iter().map(|v| (*v as f64).powi(2)).sum();
            assert!((norm - 1.0).abs() < 1e-5);
            // strongest DFT bin of the filter
            let peak = (0..160)
                .max_by(|&a, &b| {
                    let mag = |k: usize| {
                        let (mut re, mut im) = (0.0, 0.0);
                        for (n, v) in row.iter().enumerate() {
                            let ph = 2.0 * std::f64::consts::PI * (k * n) as f64 / 320.0;
                            re += *v as f64 * ph.cos();
                            im -= *v as f64 * ph.sin();
                        }
                        re * re + im * im
                    };
                    mag(a).total_cmp(&mag(b))
                })
                .unwrap();
            peaks.push(peak);
        }
        assert!(peaks.windows(2).all(|w| w[0] <= w[1]), "{peaks:?}");
        // 50 Hz bins: first centre above 60 Hz, last below 0.45 * 16 kHz
        assert!(peaks[0] >= 1 && peaks[7] <= 144, "{peaks:?}");
    }
}
