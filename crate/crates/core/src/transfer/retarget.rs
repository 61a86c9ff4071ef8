use log::warn;
use serde::{Deserialize, Serialize};

use super::checkpoint::Checkpoint;
use super::interp::{interp1d, interp_axis};
use crate::codec::{Codec, ParamTensor};
use crate::config::CodecConfig;
use crate::error::{Error, Result};
use crate::train::freeze::{freeze_mask, FreezePolicy};

/// How the new generator head is initialized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HeadInit {
    /// Linear interpolation of the pretrained head along its hop axis.
    #[default]
    Interpolate,
    /// Fresh draw from the config seed (A/B control).
    Reinitialize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RetargetPlan {
    pub source_hop: usize,
    pub target_hop: usize,
    pub target_sample_rate_hz: u32,
    pub head_weight_name: String,
    pub head_bias_name: String,
    pub pool_kernel: usize,
    pub pool_stride: usize,
    pub head_init: HeadInit,
}

impl RetargetPlan {
    /// 50 Hz / 16 kHz / hop 320 to 25 Hz / 24 kHz / hop 960 with k=2, s=2 pooling.
    pub fn hop320_to_hop960() -> Self {
        Self {
            source_hop: 320,
            target_hop: 960,
            target_sample_rate_hz: 24_000,
            head_weight_name: crate::codec::HEAD_WEIGHT.into(),
            head_bias_name: crate::codec::HEAD_BIAS.into(),
            pool_kernel: 2,
            pool_stride: 2,
            head_init: HeadInit::Interpolate,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.source_hop < 2 {
            return Err(Error::DegenerateLength(self.source_hop));
        }
        if self.target_hop < 2 {
            return Err(Error::DegenerateLength(self.target_hop));
        }
        Ok(())
    }
}

/// Moves a checkpoint to a new hop geometry.
///
/// The head weight (`[hop, hidden]`) is resampled along axis 0 and the bias
/// along its only axis. Every other tensor is copied bitwise unless its shape
/// changes under the new config, in which case it is redrawn from the seed
/// with a warning. The frozen map is reset to decoder-only training.
pub fn retarget(src: &Checkpoint, plan: &RetargetPlan) -> Result<Checkpoint> {
    plan.validate()?;
    if src.config.hop_samples != plan.source_hop {
        return Err(Error::Config(format!(
            "checkpoint hop is {}, plan expects {}",
            src.config.hop_samples, plan.source_hop
        )));
    }
    let weight = src
        .params
        .get(&plan.head_weight_name)
        .ok_or_else(|| Error::MissingParam(plan.head_weight_name.clone()))?;
    let bias = src
        .params
        .get(&plan.head_bias_name)
        .ok_or_else(|| Error::MissingParam(plan.head_bias_name.clone()))?;
    if weight.shape.first() != Some(&plan.source_hop) || bias.shape != [plan.source_hop] {
        return Err(Error::Shape(format!(
            "head tensors {:?} / {:?} do not have hop axis {}",
            weight.shape, bias.shape, plan.source_hop
        )));
    }

    let config = CodecConfig {
        hop_samples: plan.target_hop,
        target_sample_rate_hz: plan.target_sample_rate_hz,
        pool_kernel: plan.pool_kernel,
        pool_stride: plan.pool_stride,
        ..src.config
    };
    config.validate()?;

    let mut params = src.params.clone();
    let specs = Codec::param_specs(&config);
    match plan.head_init {
        HeadInit::Interpolate => {
            params.insert(
                plan.head_weight_name.clone(),
                interp_axis(weight, 0, plan.target_hop)?,
            );
            let b: Vec<f64> = bias.data.iter().map(|&v| v as f64).collect();
            let b = interp1d(&b, plan.target_hop)?;
            params.insert(
                plan.head_bias_name.clone(),
                ParamTensor::new(vec![plan.target_hop], b.into_iter().map(|v| v as f32).collect())?,
            );
        }
        HeadInit::Reinitialize => {
            for name in [&plan.head_weight_name, &plan.head_bias_name] {
                let spec = specs
                    .iter()
                    .find(|s| &s.name == name)
                    .ok_or_else(|| Error::MissingParam(name.clone()))?;
                params.insert(name.clone(), spec.initialize(config.seed));
            }
        }
    }
    for spec in &specs {
        if spec.name == plan.head_weight_name || spec.name == plan.head_bias_name {
            continue;
        }
        match params.get(&spec.name) {
            Some(p) if p.shape == spec.shape => {}
            _ => {
                warn!(
                    "`{}` does not fit the retargeted geometry; re-initializing from seed {}",
                    spec.name, config.seed
                );
                params.insert(spec.name.clone(), spec.initialize(config.seed));
            }
        }
    }
    let frozen = freeze_mask(params.keys().map(String::as_str), FreezePolicy::DecoderOnly)?;
    Checkpoint::new(config, params, frozen)
}
