//! Checkpoint container.
//!
//! Byte layout (all integers little-endian):
//!
//! ```text
//! offset  size  field
//! 0       8     magic  b"C25CKPT\0"
//! 8       4     format_version (u32)
//! 12      8     header_len (u64)
//! 20      H     header: UTF-8 JSON {config, frozen, tensors: [{name, shape, dtype, offset, len}]}
//! 20+H    D     tensor data, f32 LE, tensors back to back in header order
//! 20+H+D  32    SHA-256 of bytes [0, 20+H+D)
//! ```
//!
//! `offset` is relative to the start of the data section and `len` counts
//! elements. Tensors are written in ascending name order.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use candle_core::DType;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::codec::{Codec, ParamTensor};
use crate::config::CodecConfig;
use crate::error::{Error, Result};
use crate::train::freeze::{freeze_mask, FreezePolicy};

pub const MAGIC: &[u8; 8] = b"C25CKPT\0";
pub const FORMAT_VERSION: u32 = 1;
const PREAMBLE: usize = 20;
const DIGEST: usize = 32;

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub params: BTreeMap<String, ParamTensor>,
    pub config: CodecConfig,
    pub frozen: BTreeMap<String, bool>,
    pub format_version: u32,
}

#[derive(Serialize, Deserialize)]
struct Header {
    config: CodecConfig,
    frozen: BTreeMap<String, bool>,
    tensors: Vec<TensorEntry>,
}

#[derive(Serialize, Deserialize)]
struct TensorEntry {
    name: String,
    shape: Vec<usize>,
    dtype: String,
    offset: u64,
    len: u64,
}

impl Checkpoint {
    pub fn new(
        config: CodecConfig,
        params: BTreeMap<String, ParamTensor>,
        frozen: BTreeMap<String, bool>,
    ) -> Result<Self> {
        let ck = Self {
            params,
            config,
            frozen,
            format_version: FORMAT_VERSION,
        };
        ck.validate()?;
        Ok(ck)
    }

    /// Snapshot of a codec with its frozen map derived from `policy`.
    pub fn from_codec(codec: &Codec, policy: FreezePolicy) -> Result<Self> {
        let params = codec.to_param_tensors()?;
        let frozen = freeze_mask(params.keys().map(String::as_str), policy)?;
        Self::new(*codec.config(), params, frozen)
    }

    /// Seed-initialized checkpoint for `cfg`.
    pub fn initialized(cfg: CodecConfig) -> Result<Self> {
        let params = Codec::init_params(&cfg)?;
        let frozen = freeze_mask(params.keys().map(String::as_str), FreezePolicy::DecoderOnly)?;
        Self::new(cfg, params, frozen)
    }

    pub fn to_codec(&self, dtype: DType) -> Result<Codec> {
        Codec::from_params(self.config, &self.params, dtype)
    }

    pub fn validate(&self) -> Result<()> {
        self.config
            .validate()
            .map_err(|e| Error::Inconsistent(e.to_string()))?;
        if !self.frozen.keys().eq(self.params.keys()) {
            return Err(Error::Inconsistent(
                "frozen map does not cover exactly the parameter names".into(),
            ));
        }
        for (name, p) in &self.params {
            if p.shape.iter().product::<usize>() != p.data.len() {
                return Err(Error::Inconsistent(format!("`{name}` data/shape mismatch")));
            }
        }
        let specs = Codec::param_specs(&self.config);
        if specs.len() != self.params.len() {
            return Err(Error::Inconsistent(format!(
                "config implies {} tensors, checkpoint has {}",
                specs.len(),
                self.params.len()
            )));
        }
        for spec in specs {
            match self.params.get(&spec.name) {
                None => return Err(Error::Inconsistent(format!("missing `{}`", spec.name))),
                Some(p) if p.shape != spec.shape => {
                    return Err(Error::Inconsistent(format!(
                        "`{}` has shape {:?}, config implies {:?}",
                        spec.name, p.shape, spec.shape
                    )))
                }
                Some(_) => {}
            }
        }
        Ok(())
    }

    pub fn frozen_names(&self) -> impl Iterator<Item = &str> {
        self.frozen
            .iter()
            .filter(|(_, f)| **f)
            .map(|(n, _)| n.as_str())
    }

    /// SHA-256 over (name, shape, f32 LE data) of the selected parameters in name order.
    pub fn digest_of<'a>(&self, names: impl IntoIterator<Item = &'a str>) -> Result<[u8; 32]> {
        let mut h = Sha256::new();
        for name in names {
            let p = self
                .params
                .get(name)
                .ok_or_else(|| Error::MissingParam(name.to_string()))?;
            h.update(name.as_bytes());
            for d in &p.shape {
                h.update((*d as u64).to_le_bytes());
            }
            h.update(p.to_le_bytes());
        }
        Ok(h.finalize().into())
    }

    pub fn frozen_digest(&self) -> Result<[u8; 32]> {
        let names: Vec<&str> = self.frozen_names().collect();
        self.digest_of(names)
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let mut tensors = Vec::with_capacity(self.params.len());
        let mut offset = 0u64;
        for (name, p) in &self.params {
            tensors.push(TensorEntry {
                name: name.clone(),
                shape: p.shape.clone(),
                dtype: "f32".into(),
                offset,
                len: p.numel() as u64,
            });
            offset += p.numel() as u64 * 4;
        }
        let header = serde_json::to_vec(&Header {
            config: self.config,
            frozen: self.frozen.clone(),
            tensors,
        })?;
        let mut out = Vec::with_capacity(PREAMBLE + header.len() + offset as usize + DIGEST);
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&self.format_version.to_le_bytes());
        out.extend_from_slice(&(header.len() as u64).to_le_bytes());
        out.extend_from_slice(&header);
        for p in self.params.values() {
            out.extend_from_slice(&p.to_le_bytes());
        }
        let digest: [u8; 32] = Sha256::digest(&out).into();
        out.extend_from_slice(&digest);
        Ok(out)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let found = bytes.len() as u64;
        if bytes.len() < PREAMBLE {
            return Err(Error::Truncated {
                expected: PREAMBLE as u64,
                found,
            });
        }
        if &bytes[..8] != MAGIC {
            return Err(Error::Corrupt("bad magic".into()));
        }
        let version = u32::from_le_bytes(bytes[8..12].try_into().unwrap());
        if version != FORMAT_VERSION {
            return Err(Error::UnsupportedVersion {
                found: version,
                supported: FORMAT_VERSION,
            });
        }
        let header_len = u64::from_le_bytes(bytes[12..20].try_into().unwrap());
        let header_end = (PREAMBLE as u64).saturating_add(header_len);
        if found < header_end {
            return Err(Error::Truncated {
                expected: header_end,
                found,
            });
        }
        let header: Header = serde_json::from_slice(&bytes[PREAMBLE..header_end as usize])
            .map_err(|e| Error::Corrupt(format!("header: {e}")))?;
        let data_len: u64 = header.tensors.iter().map(|t| t.len * 4).sum();
        let expected = header_end + data_len + DIGEST as u64;
        if found < expected {
            return Err(Error::Truncated { expected, found });
        }
        if found > expected {
            return Err(Error::Corrupt(format!(
                "{} trailing bytes",
                found - expected
            )));
        }
        let body_end = (header_end + data_len) as usize;
        let digest: [u8; 32] = Sha256::digest(&bytes[..body_end]).into();
        if digest[..] != bytes[body_end..] {
            return Err(Error::Corrupt("checksum mismatch".into()));
        }

        let data = &bytes[header_end as usize..body_end];
        let mut params = BTreeMap::new();
        let mut cursor = 0u64;
        for t in header.tensors {
            if t.dtype != "f32" {
                return Err(Error::Inconsistent(format!("`{}` has dtype {}", t.name, t.dtype)));
            }
            if t.offset != cursor {
                return Err(Error::Inconsistent(format!("`{}` is not contiguous", t.name)));
            }
            if t.shape.iter().product::<usize>() as u64 != t.len {
                return Err(Error::Inconsistent(format!("`{}` shape/len mismatch", t.name)));
            }
            let raw = &data[t.offset as usize..(t.offset + t.len * 4) as usize];
            let values = raw
                .chunks_exact(4)
                .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
                .collect();
            cursor += t.len * 4;
            if params
                .insert(t.name.clone(), ParamTensor { shape: t.shape, data: values })
                .is_some()
            {
                return Err(Error::Inconsistent(format!("duplicate tensor `{}`", t.name)));
            }
        }
        let ck = Checkpoint {
            params,
            config: header.config,
            frozen: header.frozen,
            format_version: version,
        };
        ck.validate()?;
        Ok(ck)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let bytes = self.to_bytes()?;
        let mut f = fs::File::create(path.as_ref())?;
        f.write_all(&bytes)?;
        f.sync_all()?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_bytes(&fs::read(path.as_ref())?)
    }
}
