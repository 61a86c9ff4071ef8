use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which parameter groups receive updates during fine-tuning.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FreezePolicy {
    /// Only the generator (and the discriminators' own optimizer) train.
    #[default]
    DecoderOnly,
}

const FROZEN_STAGES: [&str; 4] = ["semantic_encoder", "acoustic_encoder", "fusion", "quantizer"];
const TRAINABLE_STAGES: [&str; 2] = ["decoder", "discriminator"];

/// `true` when the parameter must stay bitwise-fixed under `policy`.
pub fn is_frozen(name: &str, policy: FreezePolicy) -> Result<bool> {
    let stage = name.split('.').next().unwrap_or_default();
    match policy {
        FreezePolicy::DecoderOnly => {
            if FROZEN_STAGES.contains(&stage) {
                Ok(true)
            } else if TRAINABLE_STAGES.contains(&stage) {
                Ok(false)
            } else {
                Err(Error::UnknownPrefix(name.to_string()))
            }
        }
    }
}

pub fn freeze_mask<'a>(
    names: impl IntoIterator<Item = &'a str>,
    policy: FreezePolicy,
) -> Result<BTreeMap<String, bool>> {
    names
        .into_iter()
        .map(|n| Ok((n.to_string(), is_frozen(n, policy)?)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decoder_only_policy() {
        let p = FreezePolicy::DecoderOnly;
        assert!(is_frozen("semantic_encoder.conv1.weight", p).unwrap());
        assert!(is_frozen("acoustic_encoder.conv2.bias", p).unwrap());
        assert!(is_frozen("fusion.proj.weight", p).unwrap());
        assert!(is_frozen("quantizer.codebook", p).unwrap());
        assert!(!is_frozen("decoder.head.weight", p).unwrap());
        assert!(!is_frozen("discriminator.period2.conv0.weight", p).unwrap());
        assert!(matches!(is_frozen("mystery.weight", p), Err(Error::UnknownPrefix(_))));
        // prefix match is on the whole first component
        assert!(is_frozen("decoderx.weight", p).is_err());
    }

    #[test]
    fn mask_covers_every_name() {
        let m = freeze_mask(["decoder.a", "fusion.b"], FreezePolicy::DecoderOnly).unwrap();
        assert_eq!(m.len(), 2);
        assert!(m["fusion.b"] && !m["decoder.a"]);
        assert!(freeze_mask(["decoder.a", "x"], FreezePolicy::DecoderOnly).is_err());
    }
}
