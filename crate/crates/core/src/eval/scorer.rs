use std::path::Path;
use std::process::Command;

use serde::{Deserialize, Serialize};

use crate::audio::{read_wav, Waveform};
use crate::data::rms_dbfs;
use crate::error::{Error, Result};
use crate::train::stft::StftMagnitude;

/// Placeholder replaced by the input path in an external command template.
pub const PATH_PLACEHOLDER: &str = "{path}";

pub const MOS_RANGE: (f64, f64) = (1.0, 5.0);

/// Where MOS scores come from.
///
/// `ExternalCommand` runs `command_template` split on whitespace, with every
/// `{path}` argument replaced by the wav path (or the path appended when the
/// template has no placeholder). The command must exit 0 and print exactly
/// one number.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScorerSpec {
    ExternalCommand { command_template: String },
    /// Deterministic pseudo-MOS from spectral statistics. Not perceptual;
    /// for pipeline tests only.
    BuiltinStub { seed: u64 },
}

impl ScorerSpec {
    pub fn id(&self) -> String {
        match self {
            ScorerSpec::ExternalCommand { command_template } => format!("external:{command_template}"),
            ScorerSpec::BuiltinStub { seed } => format!("stub:{seed}"),
        }
    }

    pub fn score_file(&self, path: &Path) -> Result<f64> {
        match self {
            ScorerSpec::BuiltinStub { seed } => stub_score(&read_wav(path)?, *seed),
            ScorerSpec::ExternalCommand { command_template } => run_external(command_template, path),
        }
    }
}

fn run_external(template: &str, path: &Path) -> Result<f64> {
    let mut parts = template.split_whitespace();
    let program = parts.next().ok_or_else(|| Error::Scorer {
        message: "empty command template".into(),
        output: String::new(),
    })?;
    let mut args: Vec<std::ffi::OsString> = Vec::new();
    let mut substituted = false;
    for p in parts {
        if p == PATH_PLACEHOLDER {
            args.push(path.as_os_str().to_owned());
            substituted = true;
        } else {
            args.push(p.into());
        }
    }
    if !substituted {
        args.push(path.as_os_str().to_owned());
    }
    let out = Command::new(program).args(&args).output().map_err(|e| Error::Scorer {
        message: format!("cannot run `{program}`: {e}"),
        output: String::new(),
    })?;
    let stdout = String::from_utf8_lossy(&out.stdout).into_owned();
    let captured = || format!("stdout: {}\nstderr: {}", stdout.trim(), String::from_utf8_lossy(&out.stderr).trim());
    if !out.status.success() {
        return Err(Error::Scorer {
            message: format!("`{program}` exited with {}", out.status),
            output: captured(),
        });
    }
    parse_score(&stdout).ok_or_else(|| Error::Scorer {
        message: "expected exactly one number on stdout".into(),
        output: captured(),
    })
}

fn parse_score(stdout: &str) -> Option<f64> {
    let mut tokens = stdout.split_whitespace();
    let v: f64 = tokens.next()?.parse().ok()?;
    (tokens.next().is_none() && v.is_finite()).then_some(v)
}

/// Pseudo-MOS in `[1, 5]`: tonal, moderately loud audio scores high; flat
/// (noise-like), very quiet or very loud audio scores low. The seed shifts
/// every score by a fixed offset.
pub fn stub_score(w: &Waveform, seed: u64) -> Result<f64> {
    w.require_nonempty("scorer input")?;
    let x: Vec<f64> = w.samples().iter().map(|&v| v as f64).collect();
    let stft = StftMagnitude::new(1024, 512);
    let bins = stft.bins();
    let mags = stft.magnitudes(&x);
    let frames = mags.len() / bins;
    let mut flatness = 0.0;
    for frame in mags.chunks_exact(bins) {
        let power: Vec<f64> = frame.iter().map(|m| m * m).collect();
        let arith = power.iter().sum::<f64>() / bins as f64;
        let geo = (power.iter().map(|p| p.ln()).sum::<f64>() / bins as f64).exp();
        flatness += geo / arith / frames as f64;
    }
    let level = rms_dbfs(w.samples());
    let offset = (seed % 1000) as f64 / 1000.0 * 0.2 - 0.1;
    let z = 3.0 * (1.0 - flatness) - (level + 20.0).abs() / 15.0 + offset;
    let (lo, hi) = MOS_RANGE;
    Ok(lo + (hi - lo) / (1.0 + (-z).exp()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::audio::{write_wav, WavEncoding};

    fn tone() -> Waveform {
        let s = (0..24_000)
            .map(|i| 0.1 * (2.0 * std::f64::consts::PI * 300.0 * i as f64 / 24_000.0).sin() as f32)
            .collect();
        Waveform::new(s, 24_000).unwrap()
    }

    #[test]
    fn stub_is_deterministic_and_in_range() {
        let t = tone();
        let a = stub_score(&t, 0).unwrap();
        assert_eq!(a.to_bits(), stub_score(&t, 0).unwrap().to_bits());
        assert!((1.0..=5.0).contains(&a));
        assert!(stub_score(&Waveform::silence(0, 24_000), 0).is_err());

        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let noise: Vec<f32> = (0..24_000).map(|_| rng.random_range(-0.17..0.17)).collect();
        let n = stub_score(&Waveform::new(noise, 24_000).unwrap(), 0).unwrap();
        assert!(a > n, "tone {a} vs noise {n}");
    }

    #[test]
    fn parse_contract() {
        assert_eq!(parse_score("3.25\n"), Some(3.25));
        assert_eq!(parse_score("  4 "), Some(4.0));
        assert_eq!(parse_score("abc"), None);
        assert_eq!(parse_score("1 2"), None);
        assert_eq!(parse_score(""), None);
        assert_eq!(parse_score("NaN"), None);
    }

    #[test]
    fn external_commands() {
        let dir = tempfile::tempdir().unwrap();
        let wav = dir.path().join("a.wav");
        write_wav(&wav, &tone(), WavEncoding::Pcm16).unwrap();

        let echo = ScorerSpec::ExternalCommand {
            command_template: "echo 3.25".into(),
        };
        // echo also prints the appended path, so the output is two tokens
        assert!(matches!(echo.score_file(&wav), Err(Error::Scorer { .. })));

        let script = dir.path().join("score.sh");
        std::fs::write(&script, "#!/bin/sh\ntest -f \"$1\" && echo 3.25\n").unwrap();
        let sh = ScorerSpec::ExternalCommand {
            command_template: format!("sh {} {{path}}", script.display()),
        };
        assert_eq!(sh.score_file(&wav).unwrap(), 3.25);

        let bad = ScorerSpec::ExternalCommand {
            command_template: "sh -c \"echo\"".into(),
        };
        assert!(bad.score_file(&wav).is_err());

        std::fs::write(&script, "#!/bin/sh\necho abc\n").unwrap();
        let err = sh.score_file(&wav).unwrap_err();
        assert!(matches!(&err, Error::Scorer { output, .. } if output.contains("abc")));

        std::fs::write(&script, "#!/bin/sh\necho boom >&2\nexit 3\n").unwrap();
        let err = sh.score_file(&wav).unwrap_err();
        assert!(matches!(&err, Error::Scorer { output, .. } if output.contains("boom")));

        let missing = ScorerSpec::ExternalCommand {
            command_template: "/nonexistent/scorer".into(),
        };
        assert_eq!(missing.score_file(&wav).unwrap_err().category(), "scorer");
    }

    #[test]
    fn stub_file_matches_in_memory() {
        let dir = tempfile::tempdir().unwrap();
        let wav = dir.path().join("a.wav");
        write_wav(&wav, &tone(), WavEncoding::Float32).unwrap();
        let spec = ScorerSpec::BuiltinStub { seed: 5 };
        assert_eq!(spec.score_file(&wav).unwrap(), stub_score(&tone(), 5).unwrap());
    }
}
