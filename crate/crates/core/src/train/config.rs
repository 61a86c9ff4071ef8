use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossWeights {
    pub lambda_mel: f64,
    pub lambda_adv: f64,
    pub lambda_sem: f64,
}

impl Default for LossWeights {
    fn default() -> Self {
        Self {
            lambda_mel: 15.0,
            lambda_adv: 1.0,
            lambda_sem: 5.0,
        }
    }
}

impl LossWeights {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("lambda_mel", self.lambda_mel),
            ("lambda_adv", self.lambda_adv),
            ("lambda_sem", self.lambda_sem),
        ] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::Config(format!("{name} must be finite and >= 0, got {v}")));
            }
        }
        Ok(())
    }

    pub fn combine(&self, mel: f64, adv: f64, sem: f64) -> f64 {
        self.lambda_mel * mel + self.lambda_adv * adv + self.lambda_sem * sem
    }

    pub fn report(&self, mel: f64, adv: f64, sem: f64, step: u64) -> LossReport {
        LossReport {
            mel,
            adv,
            sem,
            total: self.combine(mel, adv, sem),
            step,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub max_lr: f64,
    pub min_lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub batch_size: usize,
    pub grad_clip_norm: f64,
    pub total_steps: u64,
    pub warmup_steps: u64,
    pub cycle_steps: u64,
    /// Discriminator learning rate as a multiple of the shared schedule.
    pub disc_lr_scale: f64,
    pub validate_every: u64,
    /// Length of each training crop at the target rate.
    pub crop_seconds: f64,
    pub seed: u64,
}

impl TrainConfig {
    /// Toy-scale defaults.
    pub fn desk(seed: u64) -> Self {
        Self {
            max_lr: 1e-4,
            min_lr: 2e-5,
            beta1: 0.8,
            beta2: 0.9,
            batch_size: 4,
            grad_clip_norm: 1.0,
            total_steps: 2000,
            warmup_steps: 100,
            cycle_steps: 2000,
            disc_lr_scale: 1.0,
            validate_every: 200,
            crop_seconds: 2.0,
            seed,
        }
    }

    /// Full-scale values.
    pub fn full(seed: u64) -> Self {
        Self {
            batch_size: 20,
            total_steps: 3_000_000,
            warmup_steps: 10_000,
            cycle_steps: 1_000_000,
            validate_every: 4000,
            crop_seconds: 5.0,
            ..Self::desk(seed)
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if !(self.min_lr > 0.0 && self.min_lr <= self.max_lr) || !self.max_lr.is_finite() {
            return bad(format!("need 0 < min_lr <= max_lr, got {} / {}", self.min_lr, self.max_lr));
        }
        if !(self.warmup_steps < self.cycle_steps && self.cycle_steps <= self.total_steps) {
            return bad(format!(
                "need warmup_steps < cycle_steps <= total_steps, got {} / {} / {}",
                self.warmup_steps, self.cycle_steps, self.total_steps
            ));
        }
        if !(self.grad_clip_norm > 0.0) {
            return bad(format!("grad_clip_norm must be positive, got {}", self.grad_clip_norm));
        }
        if !((0.0..1.0).contains(&self.beta1) && (0.0..1.0).contains(&self.beta2)) {
            return bad(format!("betas must lie in [0, 1), got {} / {}", self.beta1, self.beta2));
        }
        if self.batch_size == 0 || self.validate_every == 0 {
            return bad("batch_size and validate_every must be >= 1".into());
        }
        if !(self.disc_lr_scale > 0.0 && self.disc_lr_scale.is_finite()) {
            return bad(format!("disc_lr_scale must be positive, got {}", self.disc_lr_scale));
        }
        if !(self.crop_seconds > 0.0) {
            return bad(format!("crop_seconds must be positive, got {}", self.crop_seconds));
        }
        Ok(())
    }
}

/// Loss terms for one step or one validation pass. `total` is always the
/// weighted sum of the three terms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossReport {
    pub mel: f64,
    pub adv: f64,
    pub sem: f64,
    pub total: f64,
    pub step: u64,
}
