use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use codec25::data::{read_manifest, resample, select_eval, vad_trim, write_manifest, ManifestEntry, SelectionRule, VadConfig};
use codec25::eval::{evaluate, render_report, EvalRun, ModelSummary, ScorerSpec};
use codec25::profile::{parse_override, read_config_file, RunConfig};
use codec25::train::{synthetic_corpus, ClipSampler, Example, Trainer};
use codec25::transfer::{desk_baseline, retarget, Checkpoint, HeadInit, RetargetPlan};
use codec25::{read_wav, write_wav, CodecConfig, DType, Error, Result, TokenSequence, WavEncoding, Waveform};
use toml::{Table, Value};

use crate::tokens;
use crate::{Cli, Command, ConfigArgs, Encoding, EvalArgs, HeadInitArg, PrepArgs, TrainArgs, TransferArgs};

pub fn run(cli: Cli) -> Result<()> {
    let seed = cli.seed;
    match cli.command {
        Command::Init { dst } => desk_baseline(seed.unwrap_or(0))?.save(dst),
        Command::Transfer(a) => transfer(a),
        Command::Train(a) => train(a, seed),
        Command::Prep(a) => prep(a),
        Command::Encode { model, input, out } => encode(&model, &input, out.as_deref()),
        Command::Decode { model, input, out, encoding } => decode(&model, &input, &out, encoding),
        Command::Eval(a) => eval(a, seed.unwrap_or(0)),
        Command::Report { table, figure, inputs } => report(&table, &figure, &inputs),
        Command::Config(a) => {
            print!("{}", effective_config(&a, seed)?.to_toml()?);
            Ok(())
        }
    }
}

fn model_stem(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "model".into())
}

fn parse_pool(s: &str) -> Result<(usize, usize)> {
    let bad = || Error::Config(format!("pool `{s}` is not KERNELxSTRIDE"));
    let (k, st) = s.split_once('x').ok_or_else(bad)?;
    Ok((k.trim().parse().map_err(|_| bad())?, st.trim().parse().map_err(|_| bad())?))
}

fn transfer(a: TransferArgs) -> Result<()> {
    let src = Checkpoint::load(&a.src)?;
    let (pool_kernel, pool_stride) = parse_pool(&a.pool)?;
    let plan = RetargetPlan {
        source_hop: src.config.hop_samples,
        target_hop: a.target_hop,
        target_sample_rate_hz: a.target_rate,
        pool_kernel,
        pool_stride,
        head_init: match a.head_init {
            HeadInitArg::Interpolate => HeadInit::Interpolate,
            HeadInitArg::Reinitialize => HeadInit::Reinitialize,
        },
        ..RetargetPlan::hop320_to_hop960()
    };
    let dst = retarget(&src, &plan)?;
    log::info!(
        "hop {} -> {}, latent rate {} Hz",
        src.config.hop_samples,
        dst.config.hop_samples,
        dst.config.latent_rate_hz()
    );
    dst.save(&a.dst)
}

pub(crate) fn effective_config(a: &ConfigArgs, seed: Option<u64>) -> Result<RunConfig> {
    let file = a.config.as_ref().map(read_config_file).transpose()?;
    let mut flags = Table::new();
    if let Some(s) = seed {
        let s = i64::try_from(s).map_err(|_| Error::Config(format!("seed {s} does not fit a config value")))?;
        flags.insert("seed".into(), Value::Integer(s));
    }
    if let Some(p) = &a.profile {
        flags.insert("profile".into(), Value::String(p.clone()));
    }
    for o in &a.overrides {
        let (k, v) = parse_override(o)?;
        flags.insert(k, v);
    }
    RunConfig::resolve(file.as_ref(), &flags)
}

/// Manifest clips resampled to `rate`.
fn load_clips(manifest: &Path, rate: u32) -> Result<Vec<Waveform>> {
    read_manifest(manifest)?
        .iter()
        .map(|e| read_wav(&e.path).and_then(|w| resample(&w, rate)).map_err(|err| err.in_clip(&e.path)))
        .collect()
}

fn train(a: TrainArgs, seed: Option<u64>) -> Result<()> {
    let rc = effective_config(&a.config, seed)?;
    let tc = rc.train;
    let codec = Checkpoint::load(&a.model)?.to_codec(DType::F32)?;
    let cfg = *codec.config();
    let rate = cfg.target_sample_rate_hz;

    let clips = match &a.train_manifest {
        Some(m) => load_clips(m, rate)?,
        None => synthetic_corpus(a.synthetic, a.synthetic_seconds.unwrap_or(tc.crop_seconds), rate, tc.seed)?,
    };
    let val_clips = match &a.val_manifest {
        Some(m) => load_clips(m, rate)?,
        None => synthetic_corpus(
            a.val_synthetic,
            a.synthetic_seconds.unwrap_or(tc.crop_seconds),
            rate,
            tc.seed + 1000,
        )?,
    };
    let val = val_clips.into_iter().map(|w| Example::new(w, &cfg)).collect::<Result<Vec<_>>>()?;
    let sampler = ClipSampler::new(clips, cfg, &tc)?;

    let ckpt_dir = a.out_dir.join("checkpoints");
    fs::create_dir_all(&ckpt_dir)?;
    fs::write(a.out_dir.join("config.toml"), rc.to_toml()?)?;
    let mut metrics = BufWriter::new(fs::File::create(a.out_dir.join("metrics.jsonl"))?);
    let mut trainer = Trainer::new(codec, tc, rc.loss)?;
    let reports = trainer.run(&sampler, &val, &mut metrics, Some(&ckpt_dir))?;
    metrics.flush()?;

    let mut lines = String::new();
    for r in &reports {
        lines.push_str(&serde_json::to_string(r)?);
        lines.push('\n');
    }
    fs::write(a.out_dir.join("validation.jsonl"), lines)?;
    trainer.checkpoint()?.save(a.out_dir.join("final.ckpt"))?;
    if let (Some(first), Some(last)) = (reports.first(), reports.last()) {
        eprintln!("validation mel {:.5} -> {:.5} over {} steps", first.mel, last.mel, last.step);
    }
    Ok(())
}

fn prep(a: PrepArgs) -> Result<()> {
    let vc = VadConfig {
        frame_ms: a.frame_ms,
        energy_threshold_db: a.threshold_db,
        min_silence_s: a.min_silence,
    };
    vc.validate()?;
    let rule = SelectionRule {
        cap: a.cap,
        max_duration_s: a.max_dur,
        ..SelectionRule::default()
    };
    let mut input = read_manifest(&a.manifest)?;
    codec25::data::canonical_sort(&mut input);

    let mut kept = Vec::with_capacity(input.len());
    let mut silent = 0;
    for (i, e) in input.iter().enumerate() {
        let trimmed = match read_wav(&e.path)
            .and_then(|w| resample(&w, a.target_rate))
            .and_then(|w| vad_trim(&w, &vc))
        {
            Ok(w) => w,
            Err(Error::AllSilence) => {
                log::warn!("{}: no speech after trimming, skipped", e.path);
                silent += 1;
                continue;
            }
            Err(err) => return Err(err.in_clip(&e.path)),
        };
        let stem = model_stem(Path::new(&e.path));
        let dir = a.out_dir.join("audio").join(&e.language);
        fs::create_dir_all(&dir)?;
        let path = dir.join(format!("{i:05}_{stem}.wav"));
        write_wav(&path, &trimmed, WavEncoding::Pcm16)?;
        kept.push(ManifestEntry {
            path: path.to_string_lossy().into_owned(),
            language: e.language.clone(),
            duration_s: trimmed.duration_s(),
            sample_rate_hz: a.target_rate,
        });
    }
    if kept.is_empty() {
        return Err(Error::EmptyInput("every clip was silent".into()));
    }
    let selected = select_eval(&kept, &rule)?;
    write_manifest(a.out_dir.join("manifest.jsonl"), &kept)?;
    write_manifest(a.out_dir.join("eval.jsonl"), &selected)?;
    eprintln!(
        "kept {} of {} clips ({silent} silent), {} selected for evaluation",
        kept.len(),
        input.len(),
        selected.len()
    );
    Ok(())
}

fn encode(model: &Path, input: &Path, out: Option<&Path>) -> Result<()> {
    let codec = Checkpoint::load(model)?.to_codec(DType::F32)?;
    let rate = codec.config().encoder_sample_rate_hz;
    let clip = read_wav(input).and_then(|w| resample(&w, rate)).map_err(|e| e.in_clip(input))?;
    let t = codec.encode(&clip).map_err(|e| e.in_clip(input))?;
    let text = tokens::to_text(&t, &model_stem(model));
    match out {
        Some(p) => fs::write(p, text)?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn check_header(h: &tokens::Header, cfg: &CodecConfig) -> Result<()> {
    if let Some(r) = h.rate_hz.filter(|&r| r != cfg.latent_rate_hz()) {
        return Err(Error::RateMismatch {
            expected: cfg.latent_rate_hz(),
            actual: r,
        });
    }
    if let Some(c) = h.codebook.filter(|&c| c != cfg.codebook_size) {
        return Err(Error::Config(format!(
            "tokens use a codebook of {c}, the model has {}",
            cfg.codebook_size
        )));
    }
    Ok(())
}

fn decode(model: &Path, input: &Path, out: &Path, encoding: Encoding) -> Result<()> {
    let codec = Checkpoint::load(model)?.to_codec(DType::F32)?;
    let cfg = *codec.config();
    let (header, ids) = tokens::from_text(&fs::read_to_string(input)?).map_err(|e| e.in_clip(input))?;
    check_header(&header, &cfg).map_err(|e| e.in_clip(input))?;
    if ids.is_empty() {
        return Err(Error::EmptyInput("no tokens".into()).in_clip(input));
    }
    let t = TokenSequence::new(ids, cfg.latent_rate_hz(), cfg.codebook_size)?;
    let w = codec.decode_tokens(&t)?;
    let encoding = match encoding {
        Encoding::Pcm16 => WavEncoding::Pcm16,
        Encoding::Float32 => WavEncoding::Float32,
    };
    write_wav(out, &w, encoding)
}

fn eval(a: EvalArgs, seed: u64) -> Result<()> {
    let codec = Checkpoint::load(&a.model)?.to_codec(DType::F32)?;
    let scorer = match a.scorer_cmd {
        Some(command_template) => ScorerSpec::ExternalCommand { command_template },
        None => ScorerSpec::BuiltinStub { seed },
    };
    let id = a.model_id.unwrap_or_else(|| model_stem(&a.model));
    let entries = read_manifest(&a.manifest)?;
    let run = evaluate(&entries, &codec, &id, &scorer, &a.out_dir)?;
    for r in &run.summary.reports {
        eprintln!("{}\tn={}\tmos={:.3}", r.language, r.n, r.mean_mos);
    }
    Ok(())
}

fn load_summary(path: &PathBuf) -> Result<ModelSummary> {
    let bytes = fs::read(path)?;
    if let Ok(run) = serde_json::from_slice::<EvalRun>(&bytes) {
        return Ok(run.summary);
    }
    serde_json::from_slice::<ModelSummary>(&bytes)
        .map_err(|e| Error::Config(format!("{}: neither an eval sidecar nor a model summary ({e})", path.display())))
}

fn report(table: &Path, figure: &Path, inputs: &[PathBuf]) -> Result<()> {
    let models = inputs.iter().map(load_summary).collect::<Result<Vec<_>>>()?;
    render_report(&models, table, figure)
}
