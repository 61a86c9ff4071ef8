//! Decoder-only fine-tuning: losses, schedule, discriminators and the loop.

pub mod config;
pub mod disc;
pub mod freeze;
pub mod mel;
pub mod schedule;
pub mod semantic;
pub mod stft;
pub mod synth;
pub mod trainer;

pub use config::{LossReport, LossWeights, TrainConfig};
pub use disc::{adversarial_losses, hinge_disc_loss, hinge_gen_loss, Discriminator};
pub use freeze::{freeze_mask, is_frozen, FreezePolicy};
pub use mel::{default_resolutions, mel_loss, MelLoss, MelResolution};
pub use schedule::lr_at;
pub use semantic::{semantic_loss, semantic_loss_tensor};
pub use synth::{synthetic_clip, synthetic_corpus};
pub use trainer::{clip_grad_norm, Batch, ClipSampler, Example, StepReport, Trainer};
