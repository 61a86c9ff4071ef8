use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::aggregate::{aggregate, LanguageReport};
use super::report::ModelSummary;
use super::scorer::ScorerSpec;
use crate::audio::{read_wav, write_wav, WavEncoding, Waveform};
use crate::codec::Codec;
use crate::config::CodecConfig;
use crate::data::{canonical_sort, resample, ManifestEntry};
use crate::error::{Error, Result};

/// Sidecar file written next to the reconstructions.
pub const SIDECAR: &str = "eval.json";
/// Subdirectory of the output directory holding reconstructed wavs.
pub const RECON_DIR: &str = "recon";

/// Encode then decode one encoder-rate clip. Errors carry `path`.
pub fn roundtrip(clip: &Waveform, codec: &Codec, path: &Path) -> Result<Waveform> {
    let run = || -> Result<Waveform> {
        let tokens = codec.encode(clip)?;
        if tokens.is_empty() {
            return Err(Error::EmptyInput(format!(
                "{} samples are too short for one token",
                clip.len()
            )));
        }
        codec.decode_tokens(&tokens)
    };
    run().map_err(|e| e.in_clip(path))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClipScore {
    pub path: String,
    pub language: String,
    /// Relative to the output directory.
    pub reconstruction: String,
    pub tokens: usize,
    pub samples: usize,
    pub original_mos: f64,
    pub reconstruction_mos: f64,
}

/// Everything an evaluation run produced. Reconstruction scores feed the
/// table; original scores are kept here.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRun {
    pub summary: ModelSummary,
    pub original_reports: Vec<LanguageReport>,
    pub scorer: ScorerSpec,
    pub config: CodecConfig,
    pub clips: Vec<ClipScore>,
}

impl EvalRun {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Ok(serde_json::from_slice(&std::fs::read(path)?)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        Ok(std::fs::write(path, text)?)
    }
}

fn recon_name(index: usize, e: &ManifestEntry) -> String {
    let stem = Path::new(&e.path)
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    format!("{index:05}_{}_{stem}.wav", e.language)
}

/// Round-trips every manifest clip (canonical order), writes the
/// reconstructions under `out_dir/recon`, scores originals and
/// reconstructions, and writes the sidecar.
pub fn evaluate(
    entries: &[ManifestEntry],
    codec: &Codec,
    model_id: &str,
    scorer: &ScorerSpec,
    out_dir: &Path,
) -> Result<EvalRun> {
    if entries.is_empty() {
        return Err(Error::EmptyInput("empty evaluation manifest".into()));
    }
    let cfg = *codec.config();
    let mut entries = entries.to_vec();
    canonical_sort(&mut entries);
    std::fs::create_dir_all(out_dir.join(RECON_DIR))?;

    let mut clips = Vec::with_capacity(entries.len());
    for (i, e) in entries.iter().enumerate() {
        let path = PathBuf::from(&e.path);
        let clip = read_wav(&path)
            .and_then(|w| resample(&w, cfg.encoder_sample_rate_hz))
            .map_err(|err| err.in_clip(&path))?;
        let rec = roundtrip(&clip, codec, &path)?;
        let tokens = cfg.token_count(clip.len());
        if rec.len() != tokens * cfg.hop_samples {
            return Err(Error::Alignment(format!(
                "{}: {} samples from {tokens} tokens at hop {}",
                e.path,
                rec.len(),
                cfg.hop_samples
            )));
        }
        let name = format!("{RECON_DIR}/{}", recon_name(i, e));
        let rec_path = out_dir.join(&name);
        write_wav(&rec_path, &rec, WavEncoding::Pcm16)?;
        let original_mos = scorer.score_file(&path).map_err(|err| err.in_clip(&path))?;
        let reconstruction_mos = scorer.score_file(&rec_path).map_err(|err| err.in_clip(&rec_path))?;
        clips.push(ClipScore {
            path: e.path.clone(),
            language: e.language.clone(),
            reconstruction: name,
            tokens,
            samples: rec.len(),
            original_mos,
            reconstruction_mos,
        });
    }

    let rec_scores: Vec<(String, f64)> = clips.iter().map(|c| (c.language.clone(), c.reconstruction_mos)).collect();
    let orig_scores: Vec<(String, f64)> = clips.iter().map(|c| (c.language.clone(), c.original_mos)).collect();
    let run = EvalRun {
        summary: ModelSummary {
            model_id: model_id.to_string(),
            codebook_size: cfg.codebook_size,
            nq: 1,
            rate_hz: cfg.latent_rate_hz(),
            reports: aggregate(&rec_scores, model_id)?,
        },
        original_reports: aggregate(&orig_scores, &format!("{model_id}/original"))?,
        scorer: scorer.clone(),
        config: cfg,
        clips,
    };
    run.save(out_dir.join(SIDECAR))?;
    Ok(run)
}
