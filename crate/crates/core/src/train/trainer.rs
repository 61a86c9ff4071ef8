use std::io::Write;
use std::path::Path;

use candle_core::backprop::GradStore;
use candle_core::{DType, Tensor, Var};
use candle_nn::{AdamW, Optimizer, ParamsAdamW};
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::config::{LossReport, LossWeights, TrainConfig};
use super::disc::{hinge_disc_loss, hinge_gen_loss, Discriminator};
use super::freeze::{is_frozen, FreezePolicy};
use super::mel::{default_resolutions, MelLoss};
use super::schedule::lr_at;
use super::semantic::semantic_loss_tensor;
use crate::audio::Waveform;
use crate::codec::Codec;
use crate::config::CodecConfig;
use crate::data::{crop_random, resample};
use crate::error::{Error, Result};
use crate::transfer::Checkpoint;

/// A target-rate clip with its aligned encoder-rate copy.
#[derive(Debug, Clone, PartialEq)]
pub struct Example {
    pub audio: Waveform,
    pub encoder_input: Waveform,
}

impl Example {
    pub fn new(audio: Waveform, cfg: &CodecConfig) -> Result<Self> {
        audio.require_rate(cfg.target_sample_rate_hz)?;
        let encoder_input = resample(&audio, cfg.encoder_sample_rate_hz)?;
        Ok(Self {
            audio,
            encoder_input,
        })
    }
}

/// Equal-length examples stacked into `[B, N]` tensors.
#[derive(Debug, Clone)]
pub struct Batch {
    pub audio: Tensor,
    pub encoder_input: Tensor,
}

impl Batch {
    pub fn from_examples(examples: &[Example], dtype: DType) -> Result<Self> {
        let first = examples
            .first()
            .ok_or_else(|| Error::EmptyInput("batch".into()))?;
        let (n, m) = (first.audio.len(), first.encoder_input.len());
        if examples
            .iter()
            .any(|e| e.audio.len() != n || e.encoder_input.len() != m)
        {
            return Err(Error::Shape("batch examples differ in length".into()));
        }
        let stack = |f: &dyn Fn(&Example) -> &Waveform, len: usize| -> Result<Tensor> {
            let data: Vec<f32> = examples.iter().flat_map(|e| f(e).samples().to_vec()).collect();
            Ok(Tensor::from_vec(data, (examples.len(), len), &candle_core::Device::Cpu)?.to_dtype(dtype)?)
        };
        Ok(Self {
            audio: stack(&|e| &e.audio, n)?,
            encoder_input: stack(&|e| &e.encoder_input, m)?,
        })
    }
}

/// Draws fixed-length crops from a clip pool; the batch for a given step
/// depends only on the seed and the step index.
#[derive(Debug, Clone)]
pub struct ClipSampler {
    clips: Vec<Waveform>,
    cfg: CodecConfig,
    crop_seconds: f64,
    batch_size: usize,
    seed: u64,
}

impl ClipSampler {
    pub fn new(clips: Vec<Waveform>, cfg: CodecConfig, tc: &TrainConfig) -> Result<Self> {
        if clips.is_empty() {
            return Err(Error::EmptyInput("training clips".into()));
        }
        for c in &clips {
            c.require_rate(cfg.target_sample_rate_hz)?;
        }
        Ok(Self {
            clips,
            cfg,
            crop_seconds: tc.crop_seconds,
            batch_size: tc.batch_size,
            seed: tc.seed,
        })
    }

    pub fn batch_at(&self, step: u64) -> Result<Vec<Example>> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(step);
        (0..self.batch_size)
            .map(|_| {
                let clip = &self.clips[rng.random_range(0..self.clips.len())];
                let crop = crop_random(clip, self.crop_seconds, rng.next_u64())?;
                Example::new(crop, &self.cfg)
            })
            .collect()
    }
}

/// One line of the step metrics log.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StepReport {
    pub step: u64,
    pub lr: f64,
    pub mel: f64,
    pub adv: f64,
    pub sem: f64,
    pub total: f64,
    /// Generator gradient norm after clipping.
    pub grad_norm: f64,
    pub disc_loss: f64,
    pub disc_grad_norm: f64,
}

impl StepReport {
    pub fn loss(&self) -> LossReport {
        LossReport {
            mel: self.mel,
            adv: self.adv,
            sem: self.sem,
            total: self.total,
            step: self.step,
        }
    }
}

struct Forward {
    reference: Tensor,
    rec: Tensor,
    sem: Tensor,
}

fn scalar(t: &Tensor) -> Result<f64> {
    Ok(t.to_dtype(DType::F64)?.to_scalar::<f64>()?)
}

fn check_finite(terms: &[(&'static str, f64)], step: u64) -> Result<()> {
    match terms.iter().find(|(_, v)| !v.is_finite()) {
        Some((term, _)) => Err(Error::NonFiniteLoss { term, step }),
        None => Ok(()),
    }
}

/// Rescales the gradients of `vars` so their global L2 norm is at most
/// `max_norm`; returns the norm after clipping.
pub fn clip_grad_norm(grads: &mut GradStore, vars: &[Var], max_norm: f64) -> Result<f64> {
    let norm = |grads: &GradStore| -> Result<f64> {
        let mut sq = 0.0;
        for v in vars {
            if let Some(g) = grads.get(v.as_tensor()) {
                sq += scalar(&g.sqr()?.sum_all()?)?;
            }
        }
        Ok(sq.sqrt())
    };
    let before = norm(grads)?;
    if before <= max_norm || !before.is_finite() {
        return Ok(before);
    }
    let scale = max_norm / before;
    for v in vars {
        if let Some(g) = grads.remove(v.as_tensor()) {
            grads.insert(v.as_tensor(), (g * scale)?);
        }
    }
    norm(grads)
}

/// Decoder-only fine-tuning: the codec's frozen stages never receive an
/// optimizer step, the generator and discriminator each get one Adam update
/// per step.
pub struct Trainer {
    codec: Codec,
    disc: Discriminator,
    mel: MelLoss,
    tc: TrainConfig,
    lw: LossWeights,
    gen_vars: Vec<Var>,
    disc_vars: Vec<Var>,
    gen_opt: AdamW,
    disc_opt: AdamW,
    step: u64,
}

impl Trainer {
    pub fn new(codec: Codec, tc: TrainConfig, lw: LossWeights) -> Result<Self> {
        tc.validate()?;
        lw.validate()?;
        let mut gen_vars = Vec::new();
        for (name, var) in codec.params().iter() {
            if !is_frozen(name, FreezePolicy::DecoderOnly)? {
                gen_vars.push(var.clone());
            }
        }
        let disc = Discriminator::init(tc.seed, codec.dtype())?;
        let disc_vars = disc.vars();
        let adam = ParamsAdamW {
            lr: lr_at(0, &tc),
            beta1: tc.beta1,
            beta2: tc.beta2,
            eps: 1e-8,
            weight_decay: 0.0,
        };
        let mel = MelLoss::new(codec.config().target_sample_rate_hz, &default_resolutions())?;
        Ok(Self {
            gen_opt: AdamW::new(gen_vars.clone(), adam.clone())?,
            disc_opt: AdamW::new(disc_vars.clone(), adam)?,
            codec,
            disc,
            mel,
            tc,
            lw,
            gen_vars,
            disc_vars,
            step: 0,
        })
    }

    pub fn codec(&self) -> &Codec {
        &self.codec
    }

    pub fn discriminator(&self) -> &Discriminator {
        &self.disc
    }

    pub fn mel(&self) -> &MelLoss {
        &self.mel
    }

    pub fn step(&self) -> u64 {
        self.step
    }

    pub fn train_config(&self) -> &TrainConfig {
        &self.tc
    }

    fn forward(&self, batch: &Batch) -> Result<Forward> {
        let enc = self.codec.encode_batch(&batch.encoder_input)?;
        if enc.latent.dim(2)? == 0 {
            return Err(Error::EmptyInput("batch too short for one latent frame".into()));
        }
        let rec = self.codec.decode_tensor(&enc.quantized)?;
        let len = rec.dim(1)?;
        let available = batch.audio.dim(1)?;
        if len > available {
            return Err(Error::Alignment(format!(
                "decoded {len} samples from {available} reference samples"
            )));
        }
        Ok(Forward {
            reference: batch.audio.narrow(1, 0, len)?.to_dtype(self.codec.dtype())?,
            sem: semantic_loss_tensor(&enc.semantic_pooled, &enc.latent)?,
            rec,
        })
    }

    fn generator_terms(&self, fwd: &Forward) -> Result<(Tensor, Tensor)> {
        let mel = self.mel.loss_tensor(&fwd.reference, &fwd.rec)?;
        let adv = hinge_gen_loss(&self.disc.forward(&fwd.rec)?)?;
        Ok((mel, adv))
    }

    pub fn train_step(&mut self, batch: &Batch) -> Result<StepReport> {
        let step = self.step;
        let lr = lr_at(step, &self.tc);
        self.gen_opt.set_learning_rate(lr);
        self.disc_opt.set_learning_rate(lr * self.tc.disc_lr_scale);
        let fwd = self.forward(batch)?;

        let real = self.disc.forward(&fwd.reference)?;
        let fake = self.disc.forward(&fwd.rec.detach())?;
        let disc_loss = hinge_disc_loss(&real, &fake)?;
        let disc_value = scalar(&disc_loss)?;
        check_finite(&[("disc", disc_value)], step)?;
        let mut grads = disc_loss.backward()?;
        let disc_grad_norm = clip_grad_norm(&mut grads, &self.disc_vars, self.tc.grad_clip_norm)?;
        self.disc_opt.step(&grads)?;

        let (mel, adv) = self.generator_terms(&fwd)?;
        let (mel_v, adv_v, sem_v) = (scalar(&mel)?, scalar(&adv)?, scalar(&fwd.sem)?);
        check_finite(&[("mel", mel_v), ("adv", adv_v), ("sem", sem_v)], step)?;
        let total = (((mel * self.lw.lambda_mel)? + (adv * self.lw.lambda_adv)?)?
            + (&fwd.sem * self.lw.lambda_sem)?)?;
        let mut grads = total.backward()?;
        let grad_norm = clip_grad_norm(&mut grads, &self.gen_vars, self.tc.grad_clip_norm)?;
        self.gen_opt.step(&grads)?;

        self.step += 1;
        let loss = self.lw.report(mel_v, adv_v, sem_v, step);
        Ok(StepReport {
            step,
            lr,
            mel: loss.mel,
            adv: loss.adv,
            sem: loss.sem,
            total: loss.total,
            grad_norm,
            disc_loss: disc_value,
            disc_grad_norm,
        })
    }

    /// Loss terms averaged over `val`, one example at a time. Parameters and
    /// optimizer state are untouched.
    pub fn validate(&self, val: &[Example]) -> Result<LossReport> {
        if val.is_empty() {
            return Err(Error::EmptyInput("validation set".into()));
        }
        let (mut mel, mut adv, mut sem) = (0.0, 0.0, 0.0);
        for e in val {
            let fwd = self.forward(&Batch::from_examples(std::slice::from_ref(e), self.codec.dtype())?)?;
            let (m, a) = self.generator_terms(&fwd)?;
            mel += scalar(&m)?;
            adv += scalar(&a)?;
            sem += scalar(&fwd.sem)?;
        }
        let n = val.len() as f64;
        Ok(self.lw.report(mel / n, adv / n, sem / n, self.step))
    }

    pub fn checkpoint(&self) -> Result<Checkpoint> {
        Checkpoint::from_codec(&self.codec, FreezePolicy::DecoderOnly)
    }

    /// Trains up to `total_steps`, validating at step 0, every
    /// `validate_every` steps and at the end. Each step appends one JSON line
    /// to `metrics`; each validation after step 0 writes a checkpoint when a
    /// directory is given. Returns the validation reports.
    pub fn run(
        &mut self,
        sampler: &ClipSampler,
        val: &[Example],
        metrics: &mut dyn Write,
        checkpoint_dir: Option<&Path>,
    ) -> Result<Vec<LossReport>> {
        let mut reports = Vec::new();
        let dtype = self.codec.dtype();
        let validate = |this: &Self, reports: &mut Vec<LossReport>| -> Result<()> {
            let r = this.validate(val)?;
            log::info!("step {} validation total {:.5} mel {:.5}", r.step, r.total, r.mel);
            reports.push(r);
            if let (Some(dir), true) = (checkpoint_dir, this.step > 0) {
                this.checkpoint()?.save(dir.join(format!("step{:08}.ckpt", this.step)))?;
            }
            Ok(())
        };
        while self.step < self.tc.total_steps {
            if self.step % self.tc.validate_every == 0 {
                validate(self, &mut reports)?;
            }
            let batch = Batch::from_examples(&sampler.batch_at(self.step)?, dtype)?;
            let report = self.train_step(&batch)?;
            serde_json::to_writer(&mut *metrics, &report)?;
            metrics.write_all(b"\n")?;
        }
        validate(self, &mut reports)?;
        Ok(reports)
    }
}
