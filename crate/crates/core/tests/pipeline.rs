use std::collections::BTreeSet;
use std::fs;
use std::path::PathBuf;

use sha2::{Digest, Sha256};
use vfnet::data::{load_manifest, preprocess_corpus, split_by_speaker, write_manifest};
use vfnet::dsp::{decode_wav, encode_wav, segments_of};
use vfnet::{AudioClip, Label, ManifestEntry, SegmentStore, TrainConfig};

fn tone(seconds: f64, hz: f64) -> AudioClip {
    let n = (seconds * 16000.0) as usize;
    let samples = (0..n)
        .map(|i| 0.5 * (2.0 * std::f64::consts::PI * hz * i as f64 / 16000.0).sin())
        .collect();
    AudioClip::new(samples, 16000).unwrap()
}

fn expected_segments(samples: usize, cfg: &TrainConfig) -> usize {
    let d = &cfg.dsp;
    if samples < d.window_size {
        return 0;
    }
    ((samples - d.window_size) / d.hop + 1) / d.segment_width
}

#[test]
fn preprocess_record_counts_and_rerun_hash() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = TrainConfig::default();
    let clips = [
        ("a.wav", Label::Eng, "s1", tone(1.0, 300.0)),
        ("b.wav", Label::Ara, "s2", tone(2.5, 1500.0)),
        ("c.wav", Label::Man, "s3", tone(1.2, 3000.0)),
        ("short.wav", Label::Man, "s4", tone(0.01, 3000.0)),
    ];
    let mut entries = Vec::new();
    let mut expected = 0;
    for (name, label, speaker, clip) in &clips {
        fs::write(dir.path().join(name), encode_wav(clip).unwrap()).unwrap();
        entries.push(ManifestEntry { path: PathBuf::from(name), label: *label, speaker_id: speaker.to_string() });
        expected += expected_segments(clip.len(), &cfg);
    }
    write_manifest(dir.path().join("m.csv"), &entries).unwrap();
    let loaded = load_manifest(dir.path().join("m.csv")).unwrap();

    let a = preprocess_corpus(&loaded, &cfg, dir.path().join("a.store")).unwrap();
    let b = preprocess_corpus(&loaded, &cfg, dir.path().join("b.store")).unwrap();
    assert_eq!(a.store.len(), expected);
    assert_eq!(a.skipped.len(), 1);
    assert!(a.skipped[0].ends_with("short.wav"));

    let ha = Sha256::digest(fs::read(dir.path().join("a.store")).unwrap());
    let hb = Sha256::digest(fs::read(dir.path().join("b.store")).unwrap());
    assert_eq!(ha, hb);

    // The stored records match segments computed directly from the decoded file.
    let read = SegmentStore::read(dir.path().join("a.store")).unwrap();
    assert_eq!(read.len(), b.store.len());
    let decoded = decode_wav(&fs::read(dir.path().join("a.wav")).unwrap()).unwrap();
    let direct = segments_of(&decoded, &cfg.dsp).unwrap();
    for (i, seg) in direct.iter().enumerate() {
        let stored = read.spectrogram(i);
        assert_eq!(read.records()[i].label, Label::Eng);
        for (x, y) in stored.values().iter().zip(seg.values()) {
            assert_eq!(*x, *y as f32 as f64);
        }
    }
}

#[test]
fn split_is_speaker_disjoint_and_covers_every_record() {
    let cfg = TrainConfig::default();
    let mut store = SegmentStore::new(cfg.dsp.freq_bins(), cfg.dsp.segment_width);
    for label in Label::ALL {
        for s in 0..5 {
            let clip = tone(1.0 + 0.2 * s as f64, 200.0 + 500.0 * label.index() as f64);
            for seg in segments_of(&clip, &cfg.dsp).unwrap() {
                store.push(&seg, label, &format!("{}_{s}", label.name())).unwrap();
            }
        }
    }
    let (train, test) = split_by_speaker(&store, 0.2, 9).unwrap();
    assert_eq!(train.len() + test.len(), store.len());
    let names = |s: &SegmentStore| -> BTreeSet<String> {
        s.records().iter().map(|r| s.speaker_name(r.speaker).to_string()).collect()
    };
    let (tr, te) = (names(&train), names(&test));
    assert!(tr.is_disjoint(&te));
    assert_eq!(te.len(), 3);
    for label in Label::ALL {
        assert!(test.label_counts()[label.index()] > 0);
        assert!(train.label_counts()[label.index()] > 0);
    }
}
