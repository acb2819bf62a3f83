//! Synthetic corpus end to end: generate, preprocess, split, train, evaluate.

use std::fs;

use vfnet::data::{preprocess_corpus, split_by_speaker, synth_dataset, ManifestEntry};
use vfnet::dsp::encode_wav;
use vfnet::rng::{derive_seed, seed_offset};
use vfnet::{evaluate, optim, TrainConfig};

fn main() -> vfnet::Result<()> {
    let cfg = TrainConfig::default();
    let dir = std::env::temp_dir().join("vfnet-synthetic-run");
    fs::create_dir_all(&dir)?;
    let entries: Vec<ManifestEntry> = synth_dataset(derive_seed(cfg.seed, seed_offset::SYNTH), 10, cfg.dsp.sample_rate_hz)
        .into_iter()
        .map(|c| {
            let path = dir.join(format!("{}.wav", c.speaker_id));
            fs::write(&path, encode_wav(&c.clip)?)?;
            Ok(ManifestEntry { path, label: c.label, speaker_id: c.speaker_id })
        })
        .collect::<vfnet::Result<_>>()?;
    let all = preprocess_corpus(&entries, &cfg, dir.join("all.store"))?.store;
    let (train, test) = split_by_speaker(&all, cfg.test_fraction, derive_seed(cfg.seed, seed_offset::SPLIT))?;
    println!("{} train / {} test segments", train.len(), test.len());
    let out = optim::train_with(&cfg, &train, &test, |m| {
        println!("epoch {:>3}  loss {:.6}  eval {:.4}", m.epoch, m.train_loss, m.eval_segment_accuracy)
    })?;
    let on_train = evaluate(&out.params, &train)?;
    let on_test = evaluate(&out.params, &test)?;
    print!("{}", on_train.segments.report("train segments"));
    print!("{}", on_test.clips.report("test clips"));
    Ok(())
}
