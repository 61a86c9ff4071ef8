use std::collections::BTreeMap;

use candle_core::{DType, Tensor};

use super::params::{Init, ParamSpec, ParamStore, ParamTensor};
use super::{
    dequantize, pool_matrix, quantize, straight_through, temporal_pool, Codebook, FeatureSequence,
    TokenSequence,
};
use crate::audio::Waveform;
use crate::config::CodecConfig;
use crate::error::{Error, Result};

pub const HEAD_WEIGHT: &str = "decoder.head.weight";
pub const HEAD_BIAS: &str = "decoder.head.bias";
pub const CODEBOOK: &str = "quantizer.codebook";

/// Sub-frames per encoder frame in the band-energy front end.
pub const SUBFRAMES: usize = 8;

/// Dilations of the residual blocks in the decoder backbone.
const DECODER_DILATIONS: [usize; 2] = [1, 3];

/// Batch-level encoder outputs used by training.
#[derive(Debug)]
pub struct EncodedBatch {
    /// Frozen semantic features pooled to the latent rate, `[B, latent_dim, T]`.
    pub semantic_pooled: Tensor,
    /// Pooled pre-quantization latent, `[B, latent_dim, T]`.
    pub latent: Tensor,
    /// Code vectors with straight-through gradient to `latent`.
    pub quantized: Tensor,
    pub tokens: Vec<TokenSequence>,
}

#[derive(Debug, Clone)]
pub struct Codec {
    cfg: CodecConfig,
    params: ParamStore,
    codebook: Codebook,
}

fn uniform_fan_in(fan_in: usize) -> Init {
    Init::Uniform(1.0 / (fan_in as f32).sqrt())
}

impl Codec {
    /// Every parameter the codec owns, with its shape and initializer.
    pub fn param_specs(cfg: &CodecConfig) -> Vec<ParamSpec> {
        let (h, d, k) = (cfg.hidden_dim, cfg.latent_dim, cfg.encoder_hop());
        let conv = |name: &str, out: usize, inp: usize, kernel: usize| {
            let init = uniform_fan_in(inp * kernel);
            [
                ParamSpec::new(format!("{name}.weight"), &[out, inp, kernel], init),
                ParamSpec::new(format!("{name}.bias"), &[out], init),
            ]
        };
        let mut specs = Vec::new();
        let gabor = Init::Gabor {
            sample_rate_hz: cfg.encoder_sample_rate_hz,
        };
        specs.push(ParamSpec::new("semantic_encoder.conv1.weight", &[h, 1, k], gabor));
        specs.push(ParamSpec::new("semantic_encoder.conv1.bias", &[h], Init::Zeros));
        specs.extend(conv("semantic_encoder.conv2", d, h, 3));
        specs.extend(conv("acoustic_encoder.conv1", h, 1, k));
        specs.extend(conv("acoustic_encoder.conv2", h, h, 3));
        specs.push(ParamSpec::new("fusion.proj.weight", &[d, d + h], uniform_fan_in(d + h)));
        specs.push(ParamSpec::new("fusion.proj.bias", &[d], Init::Zeros));
        specs.push(ParamSpec::new(CODEBOOK, &[cfg.codebook_size, d], Init::Uniform(1.0)));
        specs.extend(conv("decoder.input", h, d, 3));
        for i in 0..DECODER_DILATIONS.len() {
            specs.extend(conv(&format!("decoder.block{i}.conv"), h, h, 3));
        }
        specs.push(ParamSpec::new(HEAD_WEIGHT, &[cfg.hop_samples, h], uniform_fan_in(h)));
        specs.push(ParamSpec::new(HEAD_BIAS, &[cfg.hop_samples], uniform_fan_in(h)));
        specs
    }

    pub fn init_params(cfg: &CodecConfig) -> Result<BTreeMap<String, ParamTensor>> {
        cfg.validate()?;
        let mut out = BTreeMap::new();
        for spec in Self::param_specs(cfg) {
            let value = if spec.name == CODEBOOK {
                let cb = Codebook::uniform(cfg.codebook_size, cfg.latent_dim, cfg.seed)?;
                ParamTensor::new(spec.shape.clone(), cb.entries().to_vec())?
            } else {
                spec.initialize(cfg.seed)
            };
            out.insert(spec.name, value);
        }
        Ok(out)
    }

    /// Fresh codec with every parameter drawn from `cfg.seed`.
    pub fn init(cfg: CodecConfig, dtype: DType) -> Result<Self> {
        Self::from_params(cfg, &Self::init_params(&cfg)?, dtype)
    }

    pub fn from_params(
        cfg: CodecConfig,
        tensors: &BTreeMap<String, ParamTensor>,
        dtype: DType,
    ) -> Result<Self> {
        cfg.validate()?;
        let specs = Self::param_specs(&cfg);
        for spec in &specs {
            let p = tensors
                .get(&spec.name)
                .ok_or_else(|| Error::MissingParam(spec.name.clone()))?;
            if p.shape != spec.shape {
                return Err(Error::Shape(format!(
                    "`{}` has shape {:?}, config implies {:?}",
                    spec.name, p.shape, spec.shape
                )));
            }
        }
        if tensors.len() != specs.len() {
            let extra = tensors
                .keys()
                .find(|k| !specs.iter().any(|s| &s.name == *k))
                .cloned()
                .unwrap_or_default();
            return Err(Error::Shape(format!("unexpected parameter `{extra}`")));
        }
        let codebook = Codebook::new(tensors[CODEBOOK].data.clone(), cfg.latent_dim)?;
        Ok(Self {
            cfg,
            params: ParamStore::from_tensors(tensors, dtype)?,
            codebook,
        })
    }

    pub fn config(&self) -> &CodecConfig {
        &self.cfg
    }

    pub fn params(&self) -> &ParamStore {
        &self.params
    }

    pub fn codebook(&self) -> &Codebook {
        &self.codebook
    }

    pub fn dtype(&self) -> DType {
        self.params.dtype()
    }

    fn conv(&self, x: &Tensor, name: &str, padding: usize, stride: usize, dilation: usize) -> Result<Tensor> {
        let w = self.params.get(&format!("{name}.weight"))?;
        let b = self.params.get(&format!("{name}.bias"))?;
        // Explicit padding: candle's conv1d backward underflows when the
        // padding exceeds the input length.
        let y = x
            .pad_with_zeros(2, padding, padding)?
            .conv1d(w.as_tensor(), 0, stride, dilation, 1)?;
        Ok(y.broadcast_add(&b.as_tensor().reshape((1, (), 1))?)?)
    }

    /// `[B, N]` encoder-rate samples to a `[B, 1, frames * hop]` view; trailing
    /// samples that do not fill a frame are dropped.
    fn framed_input(&self, x: &Tensor) -> Result<Tensor> {
        let n = x.dim(1)?;
        let frames = self.cfg.encoder_frames(n);
        let used = frames * self.cfg.encoder_hop();
        Ok(x.narrow(1, 0, used)?.to_dtype(self.dtype())?.unsqueeze(1)?)
    }

    /// Log energies of `hidden_dim` frame-length filters evaluated every
    /// sub-frame (centred) and averaged over each encoder frame:
    /// `[B, N] -> [B, hidden_dim, frames]`.
    fn band_energy(&self, x: &Tensor, name: &str) -> Result<Tensor> {
        let sub = self.cfg.encoder_hop() / SUBFRAMES;
        let framed = self.framed_input(x)?;
        let (b, _, n) = framed.dims3()?;
        let frames = n / self.cfg.encoder_hop();
        let w = self.params.get(&format!("{name}.weight"))?;
        let bias = self.params.get(&format!("{name}.bias"))?;
        let k = w.dim(2)?;
        let y = framed
            .pad_with_zeros(2, (k - sub) / 2, (k - sub) / 2)?
            .conv1d(w.as_tensor(), 0, sub, 1, 1)?
            .broadcast_add(&bias.as_tensor().reshape((1, (), 1))?)?;
        let e = (y.sqr()? + 1.0)?.log()?;
        Ok(e.reshape((b, self.cfg.hidden_dim, frames, SUBFRAMES))?.mean(3)?)
    }

    /// Frozen semantic stand-in: `[B, N] -> [B, latent_dim, frames]`.
    pub fn semantic_features(&self, x: &Tensor) -> Result<Tensor> {
        let h = self.band_energy(x, "semantic_encoder.conv1")?;
        self.conv(&h, "semantic_encoder.conv2", 1, 1, 1)
    }

    /// `[B, N] -> [B, hidden_dim, frames]`.
    pub fn acoustic_features(&self, x: &Tensor) -> Result<Tensor> {
        let h = self.band_energy(x, "acoustic_encoder.conv1")?;
        Ok(self.conv(&h, "acoustic_encoder.conv2", 1, 1, 1)?.tanh()?)
    }

    /// Channel concat, per-frame linear projection to `latent_dim`, tanh.
    pub fn fuse(&self, sem: &Tensor, ac: &Tensor) -> Result<Tensor> {
        if sem.dim(2)? != ac.dim(2)? {
            return Err(Error::Alignment(format!(
                "semantic has {} frames, acoustic has {}",
                sem.dim(2)?,
                ac.dim(2)?
            )));
        }
        let x = Tensor::cat(&[sem, ac], 1)?;
        let w = self.params.get("fusion.proj.weight")?.as_tensor();
        let b = self.params.get("fusion.proj.bias")?.as_tensor();
        Ok(w.broadcast_matmul(&x)?.broadcast_add(&b.reshape((1, (), 1))?)?.tanh()?)
    }

    /// Runs the frozen front end on a `[B, N]` batch of encoder-rate audio.
    /// Everything upstream of the quantizer is detached.
    pub fn encode_batch(&self, x16: &Tensor) -> Result<EncodedBatch> {
        let sem = self.semantic_features(x16)?.detach();
        let ac = self.acoustic_features(x16)?.detach();
        let fused = self.fuse(&sem, &ac)?.detach();
        let frames = fused.dim(2)?;
        let pool = pool_matrix(
            frames,
            self.cfg.pool_kernel,
            self.cfg.pool_stride,
            self.dtype(),
            self.params.device(),
        )?;
        let latent = fused.broadcast_matmul(&pool)?;
        let semantic_pooled = sem.broadcast_matmul(&pool)?;

        let batch = latent.dim(0)?;
        let mut tokens = Vec::with_capacity(batch);
        let mut code_vectors = Vec::with_capacity(batch);
        for b in 0..batch {
            let f = self.tensor_to_features(&latent.get(b)?, self.cfg.latent_rate_hz())?;
            let t = quantize(&f, &self.codebook)?;
            code_vectors.push(self.features_to_tensor(&dequantize(&t, &self.codebook)?)?);
            tokens.push(t);
        }
        let q = Tensor::stack(&code_vectors, 0)?;
        Ok(EncodedBatch {
            quantized: straight_through(&latent, &q)?,
            semantic_pooled,
            latent,
            tokens,
        })
    }

    /// Generator: `[B, latent_dim, T] -> [B, T * hop]`, unclamped.
    pub fn decode_tensor(&self, z: &Tensor) -> Result<Tensor> {
        let (b, _, t) = z.dims3()?;
        let mut x = self.conv(&z.to_dtype(self.dtype())?, "decoder.input", 1, 1, 1)?;
        for (i, &dil) in DECODER_DILATIONS.iter().enumerate() {
            let r = self.conv(&x.gelu()?, &format!("decoder.block{i}.conv"), dil, 1, dil)?;
            x = (x + r)?;
        }
        let h = x.gelu()?.transpose(1, 2)?;
        let w = self.params.get(HEAD_WEIGHT)?.as_tensor();
        let bias = self.params.get(HEAD_BIAS)?.as_tensor();
        let y = h.broadcast_matmul(&w.t()?)?.broadcast_add(bias)?;
        Ok(y.reshape((b, t * self.cfg.hop_samples))?)
    }

    fn waveform_tensor(&self, w: &Waveform) -> Result<Tensor> {
        w.require_nonempty("encoder input")?;
        w.require_rate(self.cfg.encoder_sample_rate_hz)?;
        Ok(Tensor::from_slice(w.samples(), (1, w.len()), self.params.device())?)
    }

    fn features_to_tensor(&self, f: &FeatureSequence) -> Result<Tensor> {
        let t = Tensor::from_slice(f.data(), (f.n_frames(), f.dim()), self.params.device())?;
        Ok(t.t()?.contiguous()?.to_dtype(self.dtype())?)
    }

    /// `[C, T]` to a frame-major sequence.
    fn tensor_to_features(&self, t: &Tensor, rate: u32) -> Result<FeatureSequence> {
        let dim = t.dim(0)?;
        let data = t.t()?.to_dtype(DType::F32)?.flatten_all()?.to_vec1::<f32>()?;
        FeatureSequence::new(data, dim, rate)
    }

    fn encoder_stage(
        &self,
        w: &Waveform,
        dim: usize,
        f: impl Fn(&Tensor) -> Result<Tensor>,
    ) -> Result<FeatureSequence> {
        let x = self.waveform_tensor(w)?;
        let rate = self.cfg.encoder_frame_rate_hz;
        if self.cfg.encoder_frames(w.len()) == 0 {
            return Ok(FeatureSequence::empty(dim, rate));
        }
        self.tensor_to_features(&f(&x)?.get(0)?, rate)
    }

    pub fn semantic_encode(&self, w: &Waveform) -> Result<FeatureSequence> {
        self.encoder_stage(w, self.cfg.latent_dim, |x| self.semantic_features(x))
    }

    pub fn acoustic_encode(&self, w: &Waveform) -> Result<FeatureSequence> {
        self.encoder_stage(w, self.cfg.hidden_dim, |x| self.acoustic_features(x))
    }

    pub fn fuse_project(&self, sem: &FeatureSequence, ac: &FeatureSequence) -> Result<FeatureSequence> {
        if sem.n_frames() != ac.n_frames() || sem.frame_rate_hz() != ac.frame_rate_hz() {
            return Err(Error::Alignment(format!(
                "{} frames @ {} Hz vs {} frames @ {} Hz",
                sem.n_frames(),
                sem.frame_rate_hz(),
                ac.n_frames(),
                ac.frame_rate_hz()
            )));
        }
        if sem.dim() != self.cfg.latent_dim || ac.dim() != self.cfg.hidden_dim {
            return Err(Error::Shape(format!(
                "fusion expects dims ({}, {}), got ({}, {})",
                self.cfg.latent_dim,
                self.cfg.hidden_dim,
                sem.dim(),
                ac.dim()
            )));
        }
        if sem.n_frames() == 0 {
            return Ok(FeatureSequence::empty(self.cfg.latent_dim, sem.frame_rate_hz()));
        }
        let s = self.features_to_tensor(sem)?.unsqueeze(0)?;
        let a = self.features_to_tensor(ac)?.unsqueeze(0)?;
        self.tensor_to_features(&self.fuse(&s, &a)?.get(0)?, sem.frame_rate_hz())
    }

    /// Pooled pre-quantization latent for one waveform.
    pub fn latent(&self, w: &Waveform) -> Result<FeatureSequence> {
        let sem = self.semantic_encode(w)?;
        let ac = self.acoustic_encode(w)?;
        let fused = self.fuse_project(&sem, &ac)?;
        temporal_pool(&fused, self.cfg.pool_kernel, self.cfg.pool_stride)
    }

    /// Waveform at the encoder rate to tokens at the latent rate.
    pub fn encode(&self, w: &Waveform) -> Result<TokenSequence> {
        quantize(&self.latent(w)?, &self.codebook)
    }

    pub fn dequantize(&self, t: &TokenSequence) -> Result<FeatureSequence> {
        dequantize(t, &self.codebook)
    }

    /// Latent frames to a waveform at the target rate, clamped to `[-1, 1]`.
    pub fn decode(&self, f: &FeatureSequence) -> Result<Waveform> {
        let produced = f.frame_rate_hz() as u64 * self.cfg.hop_samples as u64;
        if produced != self.cfg.target_sample_rate_hz as u64 {
            return Err(Error::Config(format!(
                "{} Hz frames x hop {} = {produced} Hz, decoder targets {} Hz",
                f.frame_rate_hz(),
                self.cfg.hop_samples,
                self.cfg.target_sample_rate_hz
            )));
        }
        if f.dim() != self.cfg.latent_dim {
            return Err(Error::Shape(format!(
                "decoder expects dim {}, got {}",
                self.cfg.latent_dim,
                f.dim()
            )));
        }
        if f.n_frames() == 0 {
            return Ok(Waveform::silence(0, self.cfg.target_sample_rate_hz));
        }
        let z = self.features_to_tensor(f)?.unsqueeze(0)?;
        let y = self.decode_tensor(&z)?.get(0)?.to_dtype(DType::F32)?.to_vec1::<f32>()?;
        Ok(Waveform::clamped(y, self.cfg.target_sample_rate_hz))
    }

    pub fn decode_tokens(&self, t: &TokenSequence) -> Result<Waveform> {
        self.decode(&self.dequantize(t)?)
    }

    pub fn to_param_tensors(&self) -> Result<BTreeMap<String, ParamTensor>> {
        self.params.to_tensors()
    }

    /// Copy of this codec whose codebook is fitted to the latents of
    /// `clips` (encoder-rate audio): seeded from distinct latent frames, then
    /// `iters` Lloyd iterations.
    pub fn calibrate_codebook(&self, clips: &[Waveform], iters: usize) -> Result<Self> {
        let mut data = Vec::new();
        for c in clips {
            data.extend_from_slice(self.latent(c)?.data());
        }
        let latents = FeatureSequence::new(data, self.cfg.latent_dim, self.cfg.latent_rate_hz())?;
        let cb = Codebook::from_data(&latents, self.cfg.codebook_size, iters, self.cfg.seed)?;
        let mut tensors = self.to_param_tensors()?;
        tensors.insert(
            CODEBOOK.to_string(),
            ParamTensor::new(vec![cb.size(), cb.dim()], cb.entries().to_vec())?,
        );
        Self::from_params(self.cfg, &tensors, self.dtype())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use candle_core::Device;

    fn sine(seconds: f64, rate: u32) -> Waveform {
        let n = (seconds * rate as f64).round() as usize;
        let s = (0..n)
            .map(|i| 0.5 * (2.0 * std::f64::consts::PI * 220.0 * i as f64 / rate as f64).sin() as f32)
            .collect();
        Waveform::new(s, rate).unwrap()
    }

    fn codec() -> Codec {
        Codec::init(CodecConfig::retargeted_desk(11), DType::F32).unwrap()
    }

    #[test]
    fn encoder_frame_counts() {
        let c = codec();
        assert_eq!(c.semantic_encode(&sine(1.0, 16_000)).unwrap().n_frames(), 50);
        assert_eq!(c.semantic_encode(&sine(2.5, 16_000)).unwrap().n_frames(), 125);
        let ac = c.acoustic_encode(&sine(0.5, 16_000)).unwrap();
        assert_eq!((ac.n_frames(), ac.frame_rate_hz()), (25, 50));
        assert_eq!(c.acoustic_encode(&sine(1.0, 16_000)).unwrap().n_frames(), 50);
    }

    #[test]
    fn encoders_reject_bad_input() {
        let c = codec();
        let empty = Waveform::silence(0, 16_000);
        assert!(matches!(c.semantic_encode(&empty), Err(Error::EmptyInput(_))));
        assert!(matches!(
            c.acoustic_encode(&sine(1.0, 24_000)),
            Err(Error::RateMismatch { expected: 16_000, actual: 24_000 })
        ));
        assert!(c.encode(&empty).is_err());
    }

    #[test]
    fn inference_is_deterministic() {
        let c = codec();
        let w = sine(0.7, 16_000);
        assert_eq!(c.acoustic_encode(&w).unwrap(), c.acoustic_encode(&w).unwrap());
        let again = Codec::init(CodecConfig::retargeted_desk(11), DType::F32).unwrap();
        assert_eq!(c.encode(&w).unwrap(), again.encode(&w).unwrap());
    }

    #[test]
    fn fusion_contract() {
        let c = codec();
        let w = sine(1.0, 16_000);
        let sem = c.semantic_encode(&w).unwrap();
        let ac = c.acoustic_encode(&w).unwrap();
        let fused = c.fuse_project(&sem, &ac).unwrap();
        assert_eq!((fused.n_frames(), fused.dim()), (50, 8));

        let short = c.acoustic_encode(&sine(49.0 / 50.0, 16_000)).unwrap();
        assert_eq!(short.n_frames(), 49);
        assert!(matches!(c.fuse_project(&sem, &short), Err(Error::Alignment(_))));

        let zs = FeatureSequence::new(vec![0.0; 50 * 8], 8, 50).unwrap();
        let za = FeatureSequence::new(vec![0.0; 50 * 32], 32, 50).unwrap();
        assert!(c.fuse_project(&zs, &za).unwrap().data().iter().all(|v| v.is_finite()));
    }

    #[test]
    fn rate_geometry() {
        let c = codec();
        assert_eq!(c.encode(&sine(1.0, 16_000)).unwrap().len(), 25);
        assert_eq!(c.encode(&sine(2.0, 16_000)).unwrap().len(), 50);
        let t = c.encode(&sine(1.0, 16_000)).unwrap();
        let w = c.decode_tokens(&t).unwrap();
        assert_eq!((w.len(), w.sample_rate_hz()), (24_000, 24_000));
        assert!(w.samples().iter().all(|s| s.abs() <= 1.0));

        let none = FeatureSequence::empty(8, 25);
        assert_eq!(c.decode(&none).unwrap().len(), 0);
        let wrong_rate = FeatureSequence::new(vec![0.0; 8], 8, 50).unwrap();
        assert!(matches!(c.decode(&wrong_rate), Err(Error::Config(_))));
    }

    #[test]
    fn baseline_geometry_decodes_at_16k() {
        let c = Codec::init(CodecConfig::baseline_desk(2), DType::F32).unwrap();
        let f = FeatureSequence::new(vec![0.1; 50 * 8], 8, 50).unwrap();
        let w = c.decode(&f).unwrap();
        assert_eq!((w.len(), w.sample_rate_hz()), (16_000, 16_000));
    }

    #[test]
    fn batch_path_matches_single_path() {
        let c = codec();
        let w = sine(0.8, 16_000);
        let x = Tensor::from_slice(w.samples(), (1, w.len()), &Device::Cpu).unwrap();
        let enc = c.encode_batch(&x).unwrap();
        assert_eq!(enc.tokens[0], c.encode(&w).unwrap());
        let lat: Vec<f32> = enc.latent.get(0).unwrap().t().unwrap().flatten_all().unwrap().to_vec1().unwrap();
        for (a, b) in lat.iter().zip(c.latent(&w).unwrap().data()) {
            assert!((a - b).abs() < 1e-6);
        }
    }

    #[test]
    fn rejects_mismatched_params() {
        let cfg = CodecConfig::retargeted_desk(0);
        let mut p = Codec::init_params(&cfg).unwrap();
        p.get_mut(HEAD_BIAS).unwrap().shape = vec![959];
        assert!(Codec::from_params(cfg, &p, DType::F32).is_err());
        let mut p = Codec::init_params(&cfg).unwrap();
        p.remove(HEAD_BIAS);
        assert!(matches!(Codec::from_params(cfg, &p, DType::F32), Err(Error::MissingParam(_))));
    }

    #[test]
    fn calibrated_codebook_spreads_tokens() {
        let base = Codec::init(CodecConfig::baseline_desk(3), DType::F32).unwrap();
        let clips: Vec<Waveform> = [110.0, 220.0, 440.0, 880.0, 1760.0, 3520.0]
            .iter()
            .map(|f| {
                let s = (0..16_000)
                    .map(|i| 0.5 * (2.0 * std::f64::consts::PI * f * i as f64 / 16_000.0).sin() as f32)
                    .collect();
                Waveform::new(s, 16_000).unwrap()
            })
            .collect();
        let mut cfg = *base.config();
        cfg.codebook_size = 4;
        let small = Codec::init(cfg, DType::F32).unwrap();
        let cal = small.calibrate_codebook(&clips, 5).unwrap();
        assert_eq!(cal.codebook(), small.calibrate_codebook(&clips, 5).unwrap().codebook());
        let used: std::collections::BTreeSet<u32> =
            clips.iter().flat_map(|c| cal.encode(c).unwrap().tokens().to_vec()).collect();
        assert_eq!(used.len(), 4);
        // every other parameter is untouched
        let before = small.to_param_tensors().unwrap();
        let after = cal.to_param_tensors().unwrap();
        for (name, t) in &before {
            if name != CODEBOOK {
                assert_eq!(t, &after[name], "{name}");
            }
        }
    }

    #[test]
    fn semantic_features_separate_pitches() {
        let c = codec();
        let a = c.semantic_encode(&sine(0.2, 16_000)).unwrap();
        let s = (0..3200)
            .map(|i| 0.5 * (2.0 * std::f64::consts::PI * 2000.0 * i as f64 / 16_000.0).sin() as f32)
            .collect();
        let b = c.semantic_encode(&Waveform::new(s, 16_000).unwrap()).unwrap();
        let dist: f32 = a.frame(5).iter().zip(b.frame(5)).map(|(x, y)| (x - y).abs()).sum();
        assert!(dist > 0.1, "{dist}");
        // stationary input gives near-stationary interior frames
        let drift: f32 = a.frame(4).iter().zip(a.frame(6)).map(|(x, y)| (x - y).abs()).sum();
        assert!(drift < dist / 2.0, "{drift} vs {dist}");
    }
}
