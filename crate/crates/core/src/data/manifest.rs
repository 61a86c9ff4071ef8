use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One line of a JSONL clip manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub path: String,
    pub language: String,
    pub duration_s: f64,
    pub sample_rate_hz: u32,
}

/// Language, then path; the order every manifest is written in.
pub fn canonical_sort(entries: &mut [ManifestEntry]) {
    entries.sort_by(|a, b| a.language.cmp(&b.language).then_with(|| a.path.cmp(&b.path)));
}

pub fn parse_manifest(text: &str) -> Result<Vec<ManifestEntry>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            let e: ManifestEntry = serde_json::from_str(l)
                .map_err(|err| Error::Config(format!("manifest line {}: {err}", i + 1)))?;
            if e.path.is_empty() {
                return Err(Error::Config(format!("manifest line {}: empty path", i + 1)));
            }
            if !(e.duration_s > 0.0) || !e.duration_s.is_finite() {
                return Err(Error::Config(format!(
                    "manifest line {}: bad duration {}",
                    i + 1,
                    e.duration_s
                )));
            }
            Ok(e)
        })
        .collect()
}

pub fn read_manifest(path: impl AsRef<Path>) -> Result<Vec<ManifestEntry>> {
    let mut text = String::new();
    for line in BufReader::new(std::fs::File::open(path)?).lines() {
        text.push_str(&line?);
        text.push('\n');
    }
    parse_manifest(&text)
}

pub fn manifest_to_string(entries: &[ManifestEntry]) -> Result<String> {
    let mut sorted = entries.to_vec();
    canonical_sort(&mut sorted);
    let mut out = String::new();
    for e in &sorted {
        out.push_str(&serde_json::to_string(e)?);
        out.push('\n');
    }
    Ok(out)
}

pub fn write_manifest(path: impl AsRef<Path>, entries: &[ManifestEntry]) -> Result<()> {
    let mut f = std::fs::File::create(path)?;
    f.write_all(manifest_to_string(entries)?.as_bytes())?;
    Ok(())
}
