use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use vfnet::data::{load_manifest, preprocess_corpus, split_by_speaker, synth_dataset, write_manifest, ManifestEntry};
use vfnet::dsp::{decode_wav, encode_wav, segments_of, StftFrames};
use vfnet::model::{load_params_for, predict_clip_posterior, save_params};
use vfnet::optim::{train_with, write_metrics_csv};
use vfnet::rng::{derive_seed, seed_offset};
use vfnet::{evaluate, Error, Label, Result, SegmentStore};

use crate::config::RunConfig;

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::from(e).at_path(dir))
}

fn write_file(path: &Path, bytes: impl AsRef<[u8]>) -> Result<()> {
    fs::write(path, bytes).map_err(|e| Error::from(e).at_path(path))
}

fn label_summary(store: &SegmentStore) -> String {
    let counts = store.label_counts();
    let mut s: String = Label::ALL
        .iter()
        .map(|l| format!("{} {}\n", l.name(), counts[l.index()]))
        .collect();
    s.push_str(&format!("total {}\n", store.len()));
    s
}

/// `<file>.config` next to a single-file output.
fn sidecar(path: &Path) -> PathBuf {
    let mut name = path.file_name().unwrap_or_default().to_os_string();
    name.push(".config");
    path.with_file_name(name)
}

pub fn synth(cfg: &RunConfig) -> Result<()> {
    let out_dir = cfg.path("out_dir")?;
    let train = cfg.train_config()?;
    let n = cfg.clips_per_class()?;
    create_dir(&out_dir)?;
    let clips = synth_dataset(derive_seed(train.seed, seed_offset::SYNTH), n, train.dsp.sample_rate_hz);
    let mut entries = Vec::with_capacity(clips.len());
    for c in &clips {
        let file = format!("{}.wav", c.speaker_id);
        write_file(&out_dir.join(&file), encode_wav(&c.clip)?)?;
        entries.push(ManifestEntry {
            path: PathBuf::from(file),
            label: c.label,
            speaker_id: c.speaker_id.clone(),
        });
    }
    write_manifest(out_dir.join("manifest.csv"), &entries)?;
    cfg.echo_to(&out_dir.join("effective_config.txt"))?;
    println!("wrote {} clips and manifest.csv to {}", entries.len(), out_dir.display());
    Ok(())
}

pub fn preprocess(cfg: &RunConfig) -> Result<()> {
    let manifest = cfg.path("manifest")?;
    let out = cfg.path("store")?;
    let train = cfg.train_config()?;
    let entries = load_manifest(&manifest)?;
    let done = preprocess_corpus(&entries, &train, &out)?;
    cfg.echo_to(&sidecar(&out))?;
    for path in &done.skipped {
        eprintln!("warning: {} produced no segments", path.display());
    }
    print!("{}", label_summary(&done.store));
    Ok(())
}

pub fn split(cfg: &RunConfig) -> Result<()> {
    let store = SegmentStore::read(cfg.path("store")?)?;
    let train_out = cfg.path("train_out")?;
    let test_out = cfg.path("test_out")?;
    let t = cfg.train_config()?;
    let (train, test) = split_by_speaker(&store, t.test_fraction, derive_seed(t.seed, seed_offset::SPLIT))?;
    train.write(&train_out)?;
    test.write(&test_out)?;
    cfg.echo_to(&sidecar(&train_out))?;
    println!("train: {} speakers", train.speakers().len());
    print!("{}", label_summary(&train));
    println!("test: {} speakers", test.speakers().len());
    print!("{}", label_summary(&test));
    Ok(())
}

pub fn train(cfg: &RunConfig) -> Result<()> {
    let t = cfg.train_config()?;
    let train_store = SegmentStore::read(cfg.path("train_store")?)?;
    let eval_store = SegmentStore::read(cfg.path("eval_store")?)?;
    let out_dir = cfg.path("out_dir")?;
    create_dir(&out_dir)?;
    cfg.echo_to(&out_dir.join("effective_config.txt"))?;
    let outcome = train_with(&t, &train_store, &eval_store, |m| {
        println!(
            "epoch {:>3}  train_loss {:.6}  eval_segment_accuracy {:.4}",
            m.epoch, m.train_loss, m.eval_segment_accuracy
        );
    })?;
    let mut csv = Vec::new();
    write_metrics_csv(&outcome.log, &mut csv)?;
    write_file(&out_dir.join("metrics.csv"), csv)?;
    save_params(&outcome.params, out_dir.join("params.bin"))?;
    if let Some(last) = outcome.log.last() {
        println!("final eval segment accuracy: {:.2}%", 100.0 * last.eval_segment_accuracy);
    }
    Ok(())
}

pub fn eval(cfg: &RunConfig) -> Result<()> {
    let t = cfg.train_config()?;
    let params = load_params_for(cfg.path("params")?, &t.model_config())?;
    let store = SegmentStore::read(cfg.path("store")?)?;
    let result = evaluate(&params, &store)?;
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    write!(out, "{}", result.segments.report("segment-level confusion"))?;
    writeln!(out)?;
    write!(out, "{}", result.clips.report("clip-level confusion"))?;
    if let Some(dir) = cfg.optional_path("out_dir") {
        create_dir(&dir)?;
        write_file(&dir.join("segment_confusion.csv"), result.segments.to_csv())?;
        write_file(&dir.join("clip_confusion.csv"), result.clips.to_csv())?;
        cfg.echo_to(&dir.join("effective_config.txt"))?;
    }
    Ok(())
}

pub fn infer(cfg: &RunConfig) -> Result<()> {
    let t = cfg.train_config()?;
    let params = load_params_for(cfg.path("params")?, &t.model_config())?;
    let wav = cfg.path("wav")?;
    let bytes = fs::read(&wav).map_err(|e| Error::from(e).at_path(&wav))?;
    let clip = decode_wav(&bytes).map_err(|e| e.at_path(&wav))?;
    let segments = segments_of(&clip, &t.dsp).map_err(|e| e.at_path(&wav))?;
    if segments.is_empty() {
        let d = &t.dsp;
        let frames_needed = d.segment_width;
        let needed = d.window_size + (frames_needed - 1) * d.hop;
        let have = vfnet::dsp::resample(&clip, d.sample_rate_hz).len();
        debug_assert!(StftFrames::frame_count(have, d.window_size, d.hop) < frames_needed);
        return Err(Error::ClipTooShort { samples: have, needed }.at_path(&wav));
    }
    let (class, posterior) = predict_clip_posterior(&params, &segments)?;
    println!("predicted {}", Label::ALL[class]);
    let parts: Vec<String> = Label::ALL
        .iter()
        .zip(&posterior)
        .map(|(l, p)| format!("{}={p:.4}", l.name()))
        .collect();
    println!("posterior {}", parts.join(" "));
    Ok(())
}
