//! Subcommands run in-process against temporary directories. Process-level
//! behaviour (exit codes, stderr, env) is covered in `tests/cli.rs`.

use std::path::PathBuf;

use clap::Parser;
use codec25::data::{read_manifest, write_manifest, ManifestEntry};
use codec25::eval::{LanguageReport, ModelSummary, ALL};
use codec25::train::synthetic_clip;
use codec25::transfer::Checkpoint;
use codec25::{read_wav, write_wav, Error, WavEncoding, Waveform};

use crate::{commands, error_line, Cli};

fn run(args: &[&str]) -> codec25::Result<()> {
    let cli = Cli::try_parse_from(std::iter::once("codec25").chain(args.iter().copied()))
        .map_err(|e| Error::Config(e.to_string()))?;
    commands::run(cli)
}

struct Dir(tempfile::TempDir);

impl Dir {
    fn new() -> Self {
        Self(tempfile::tempdir().unwrap())
    }

    fn p(&self, name: &str) -> String {
        self.path(name).to_string_lossy().into_owned()
    }

    fn path(&self, name: &str) -> PathBuf {
        self.0.path().join(name)
    }

    /// `base.ckpt` (50 Hz / 16 kHz) and `ours.ckpt` (25 Hz / 24 kHz).
    fn with_models(self) -> Self {
        run(&["--seed", "0", "init", "--dst", &self.p("base.ckpt")]).unwrap();
        run(&["transfer", "--src", &self.p("base.ckpt"), "--dst", &self.p("ours.ckpt")]).unwrap();
        self
    }
}

fn category(r: codec25::Result<()>) -> &'static str {
    r.unwrap_err().category()
}

#[test]
fn error_lines_are_single_lines() {
    let e = Error::Scorer {
        message: "`mos` exited with 3".into(),
        output: "stdout: \nstderr: boom\nmore".into(),
    };
    assert_eq!(error_line(&e), "error[scorer]: scorer failed: `mos` exited with 3 | stdout: | stderr: boom | more");
    let clip = Error::AllSilence.in_clip("a.wav");
    assert_eq!(error_line(&clip), "error[all-silence]: a.wav: vad removed every frame");
}

#[test]
fn transfer_geometry_and_flags() {
    let d = Dir::new().with_models();
    let base = Checkpoint::load(d.path("base.ckpt")).unwrap();
    let ours = Checkpoint::load(d.path("ours.ckpt")).unwrap();
    assert_eq!((base.config.hop_samples, base.config.latent_rate_hz()), (320, 50));
    assert_eq!((ours.config.hop_samples, ours.config.latent_rate_hz()), (960, 25));
    assert_eq!(ours.config.target_sample_rate_hz, 24_000);

    let y = d.p("y.ckpt");
    let src = d.p("base.ckpt");
    assert_eq!(category(run(&["transfer", "--src", &src, "--dst", &y, "--pool", "2by2"])), "config");
    // hop 960 at 24 kHz is 25 Hz, which a 50 Hz encoder reaches only with stride 2
    assert!(run(&["transfer", "--src", &src, "--dst", &y, "--pool", "1x1"]).is_err());
    assert_eq!(category(run(&["transfer", "--src", &d.p("missing.ckpt"), "--dst", &y])), "io");
    std::fs::write(d.path("junk.ckpt"), b"not a checkpoint").unwrap();
    assert!(matches!(
        category(run(&["transfer", "--src", &d.p("junk.ckpt"), "--dst", &y])),
        "corrupt" | "truncated"
    ));

    run(&["transfer", "--src", &src, "--dst", &y, "--head-init", "reinitialize"]).unwrap();
    let fresh = Checkpoint::load(d.path("y.ckpt")).unwrap();
    assert_eq!(fresh.frozen_digest().unwrap(), ours.frozen_digest().unwrap());
    assert_ne!(fresh.params[codec25::codec::HEAD_WEIGHT], ours.params[codec25::codec::HEAD_WEIGHT]);
}

#[test]
fn tokens_round_trip_and_reject_foreign_rates() {
    let d = Dir::new().with_models();
    write_wav(d.path("a.wav"), &synthetic_clip(2.0, 44_100, 1).unwrap(), WavEncoding::Pcm16).unwrap();
    let (ours, base, t) = (d.p("ours.ckpt"), d.p("base.ckpt"), d.p("t.txt"));
    run(&["encode", "--model", &ours, &d.p("a.wav"), "--out", &t]).unwrap();
    let text = std::fs::read_to_string(&t).unwrap();
    assert!(text.starts_with("# codec25 tokens model=ours rate_hz=25 codebook=256\n"));
    assert_eq!(text.lines().count(), 1 + 50);

    run(&["decode", "--model", &ours, &t, "--out", &d.p("r.wav")]).unwrap();
    let r = read_wav(d.path("r.wav")).unwrap();
    assert_eq!((r.len(), r.sample_rate_hz()), (48_000, 24_000));

    let err = run(&["decode", "--model", &base, &t, "--out", &d.p("r.wav")]).unwrap_err();
    assert_eq!(err.category(), "rate-mismatch");
    assert!(err.to_string().starts_with(&t));

    std::fs::write(d.path("bad.txt"), "# rate_hz=25\n1\n999\n").unwrap();
    assert_eq!(category(run(&["decode", "--model", &ours, &d.p("bad.txt"), "--out", &d.p("r.wav")])), "token-range");
    std::fs::write(d.path("empty.txt"), "# rate_hz=25\n").unwrap();
    assert_eq!(category(run(&["decode", "--model", &ours, &d.p("empty.txt"), "--out", &d.p("r.wav")])), "empty-input");
}

#[test]
fn config_layers() {
    let d = Dir::new();
    std::fs::write(d.path("run.toml"), "profile = \"full\"\nbatch_size = 8\n").unwrap();
    let cli = Cli::try_parse_from(["codec25", "config", "--config", &d.p("run.toml"), "--set", "batch_size=2"]).unwrap();
    let crate::Command::Config(args) = cli.command else { unreachable!() };
    let c = commands::effective_config(&args, Some(9)).unwrap();
    assert_eq!((c.train.batch_size, c.train.total_steps, c.train.seed), (2, 3_000_000, 9));
    let c = commands::effective_config(&args, None).unwrap();
    assert_eq!(c.train.seed, 0);
    assert_eq!(category(run(&["config", "--set", "max_lr=-1"])), "config");
    assert_eq!(category(run(&["config", "--profile", "huge"])), "config");
}

#[test]
fn train_writes_its_outputs() {
    let d = Dir::new().with_models();
    run(&[
        "train", "--model", &d.p("ours.ckpt"), "--out-dir", &d.p("run"), "--synthetic", "4", "--val-synthetic", "2",
        "--set", "total_steps=6", "--set", "warmup_steps=1", "--set", "cycle_steps=3", "--set", "validate_every=3",
        "--set", "crop_seconds=0.24", "--set", "batch_size=2",
    ])
    .unwrap();
    let run_dir = d.path("run");
    for f in ["config.toml", "metrics.jsonl", "validation.jsonl", "final.ckpt", "checkpoints/step00000006.ckpt"] {
        assert!(run_dir.join(f).exists(), "{f}");
    }
    let metrics = std::fs::read_to_string(run_dir.join("metrics.jsonl")).unwrap();
    assert_eq!(metrics.lines().count(), 6);
    assert_eq!(std::fs::read_to_string(run_dir.join("validation.jsonl")).unwrap().lines().count(), 3);
    let saved = codec25::profile::RunConfig::from_toml(&std::fs::read_to_string(run_dir.join("config.toml")).unwrap());
    assert_eq!(saved.unwrap().train.total_steps, 6);

    let base = Checkpoint::load(d.path("ours.ckpt")).unwrap();
    let tuned = Checkpoint::load(run_dir.join("final.ckpt")).unwrap();
    assert_eq!(base.frozen_digest().unwrap(), tuned.frozen_digest().unwrap());
    assert_ne!(base, tuned);

    let bad = run(&["train", "--model", &d.p("ours.ckpt"), "--out-dir", &d.p("bad"), "--set", "total_steps=0"]);
    assert_eq!(category(bad), "config");
}

fn raw_manifest(d: &Dir, clips: &[(&str, &str, Waveform)]) -> PathBuf {
    std::fs::create_dir_all(d.path("raw")).unwrap();
    let entries: Vec<ManifestEntry> = clips
        .iter()
        .map(|(name, lang, w)| {
            let path = d.path(&format!("raw/{name}.wav"));
            write_wav(&path, w, WavEncoding::Pcm16).unwrap();
            ManifestEntry {
                path: path.to_string_lossy().into_owned(),
                language: lang.to_string(),
                duration_s: w.duration_s(),
                sample_rate_hz: w.sample_rate_hz(),
            }
        })
        .collect();
    let m = d.path("raw.jsonl");
    write_manifest(&m, &entries).unwrap();
    m
}

#[test]
fn prep_skips_silent_clips_and_selects() {
    let d = Dir::new();
    let m = raw_manifest(
        &d,
        &[
            ("speech", "en", synthetic_clip(1.0, 16_000, 3).unwrap()),
            ("long", "en", synthetic_clip(3.0, 16_000, 4).unwrap()),
            ("silent", "en", Waveform::silence(16_000, 16_000)),
        ],
    );
    run(&["prep", "--manifest", &m.to_string_lossy(), "--out-dir", &d.p("out"), "--max-dur", "2"]).unwrap();
    let kept = read_manifest(d.path("out/manifest.jsonl")).unwrap();
    let eval = read_manifest(d.path("out/eval.jsonl")).unwrap();
    assert_eq!(kept.len(), 2);
    assert!(kept.iter().all(|e| e.sample_rate_hz == 24_000));
    assert_eq!(eval.len(), 1);
    assert!(eval[0].path.ends_with("speech.wav"));
    let w = read_wav(&eval[0].path).unwrap();
    assert_eq!(w.sample_rate_hz(), 24_000);
    assert!((w.duration_s() - eval[0].duration_s).abs() < 1e-9);

    let only_silence = Dir::new();
    let m = raw_manifest(&only_silence, &[("silent", "en", Waveform::silence(16_000, 16_000))]);
    let r = run(&["prep", "--manifest", &m.to_string_lossy(), "--out-dir", &only_silence.p("out")]);
    assert_eq!(category(r), "empty-input");
}

#[test]
fn eval_and_report() {
    let d = Dir::new().with_models();
    let m = raw_manifest(
        &d,
        &[
            ("a", "en", synthetic_clip(1.0, 24_000, 1).unwrap()),
            ("b", "fr", synthetic_clip(1.2, 24_000, 2).unwrap()),
        ],
    );
    let m = m.to_string_lossy().into_owned();
    run(&["eval", "--model", &d.p("ours.ckpt"), "--manifest", &m, "--out-dir", &d.p("e1")]).unwrap();
    let sidecar = codec25::eval::EvalRun::load(d.path("e1/eval.json")).unwrap();
    assert_eq!(sidecar.summary.model_id, "ours");
    assert_eq!(sidecar.scorer, codec25::eval::ScorerSpec::BuiltinStub { seed: 0 });
    assert_eq!(sidecar.clips.len(), 2);

    let script = d.path("mos.sh");
    std::fs::write(&script, "#!/bin/sh\necho 4.5\n").unwrap();
    let cmd = format!("sh {} {{path}}", script.display());
    run(&["eval", "--model", &d.p("base.ckpt"), "--manifest", &m, "--out-dir", &d.p("e2"), "--scorer-cmd", &cmd])
        .unwrap();
    let external = codec25::eval::EvalRun::load(d.path("e2/eval.json")).unwrap();
    assert!(external.clips.iter().all(|c| c.reconstruction_mos == 4.5));

    let summary = ModelSummary {
        model_id: "other-codec".into(),
        codebook_size: 1024,
        nq: 8,
        rate_hz: 75,
        reports: vec![LanguageReport {
            language: ALL.into(),
            n: 10,
            mean_mos: 3.5,
            std_mos: 0.2,
            model_id: "other-codec".into(),
        }],
    };
    std::fs::write(d.path("other.json"), serde_json::to_string(&summary).unwrap()).unwrap();
    let (t, f) = (d.p("t.tsv"), d.p("f.png"));
    run(&["report", "--table", &t, "--figure", &f, &d.p("e1/eval.json"), &d.p("e2/eval.json"), &d.p("other.json")])
        .unwrap();
    let table = std::fs::read_to_string(&t).unwrap();
    let rows: Vec<&str> = table.lines().skip(2).collect();
    assert_eq!(rows.len(), 3);
    assert!(rows[0].starts_with("base\t256\t1\t50\t4.500\t4.500\t4.500"), "{table}");
    assert!(rows[1].starts_with("other-codec\t1024\t8\t75\t\t\t3.500"), "{table}");
    assert!(rows[2].starts_with("ours\t256\t1\t25\t"), "{table}");

    std::fs::write(d.path("junk.json"), "{}").unwrap();
    let err = run(&["report", "--table", &t, "--figure", &f, &d.p("junk.json")]).unwrap_err();
    assert_eq!(err.category(), "config");
    assert!(err.to_string().contains("junk.json"));
    let dup = run(&["report", "--table", &t, "--figure", &f, &d.p("e1/eval.json"), &d.p("e1/eval.json")]);
    assert_eq!(category(dup), "config");
}
