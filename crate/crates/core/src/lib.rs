//! Single-codebook speech codec retargeted from 50 Hz / 16 kHz to 25 Hz / 24 kHz.
//!
//! The crate covers the codec itself ([`codec`]), checkpoint surgery that
//! moves a pretrained generator head to a new hop size ([`transfer`]),
//! decoder-only fine-tuning ([`train`]), corpus preparation ([`data`]), the
//! per-language evaluation harness ([`eval`]) and run profiles ([`profile`]).

pub mod audio;
pub mod codec;
pub mod config;
pub mod data;
pub mod error;
pub mod eval;
pub mod profile;
pub mod train;
pub mod transfer;

pub use candle_core::DType;

pub use audio::{read_wav, write_wav, WavEncoding, Waveform};
pub use codec::{Codebook, Codec, FeatureSequence, TokenSequence};
pub use config::CodecConfig;
pub use error::{Error, Result};
