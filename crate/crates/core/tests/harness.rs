use std::collections::HashSet;
use std::path::PathBuf;

use semosd::corpus::{load_sentences, split_train_test};
use semosd::harness::{DecoderKind, PriorKind, RunConfig, Simulation, CSV_HEADER};

fn corpus() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/lee_lines.txt")
}

fn small(decoder: DecoderKind) -> RunConfig {
    RunConfig {
        decoder,
        m: 2,
        corpus: decoder.uses_prior().then(corpus),
        ebn0_db: vec![0.0, 2.0],
        max_blocks: 600,
        min_block_errors: 0,
        ..RunConfig::default()
    }
}

#[test]
fn repeated_runs_are_identical() {
    for decoder in [DecoderKind::Bm, DecoderKind::Osd, DecoderKind::SemOsd] {
        let cfg = RunConfig { prior: PriorKind::Ngram, ..small(decoder) };
        let a = Simulation::new(cfg.clone()).unwrap().run_sweep().unwrap();
        let b = Simulation::new(RunConfig { workers: 1, ..cfg.clone() }).unwrap().run_sweep().unwrap();
        let c = Simulation::new(RunConfig { workers: 3, ..cfg }).unwrap().run_sweep().unwrap();
        for ((x, y), z) in a.iter().zip(&b).zip(&c) {
            assert!(x.same_counters(y) && x.same_counters(z), "{decoder:?}");
        }
    }
}

#[test]
fn seed_changes_the_draws() {
    let a = Simulation::new(small(DecoderKind::Bm)).unwrap().run_point(0, 1.0).unwrap();
    let b = Simulation::new(RunConfig { seed: 2, ..small(DecoderKind::Bm) }).unwrap().run_point(0, 1.0).unwrap();
    assert!(!a.same_counters(&b));
}

#[test]
fn error_target_stops_early() {
    let cfg = RunConfig { max_blocks: 100_000, min_block_errors: 50, ..small(DecoderKind::Bm) };
    let s = Simulation::new(cfg).unwrap().run_point(0, 0.0).unwrap();
    assert_eq!(s.block_errors, 50);
    assert!(s.blocks < 100);
}

#[test]
fn family_counters_cover_every_block() {
    let cfg = RunConfig { prior: PriorKind::Oracle, ..small(DecoderKind::SemOsd) };
    for s in Simulation::new(cfg).unwrap().run_sweep().unwrap() {
        assert_eq!(s.wins_bit + s.wins_byte + s.ties, s.blocks);
        assert!(s.p50_teps <= s.p95_teps);
        assert!(s.ber <= s.byte_error_rate && s.byte_error_rate <= s.bler);
    }
}

#[test]
fn held_out_sentences_are_unseen() {
    let cfg = RunConfig { prior: PriorKind::Ngram, ..small(DecoderKind::SemOsd) };
    let sim = Simulation::new(cfg.clone()).unwrap();
    let all = load_sentences(&corpus(), cfg.min_len, cfg.max_len).unwrap();
    let (train, test) = split_train_test(&all, cfg.train_ratio, cfg.seed).unwrap();
    assert_eq!(sim.sentences(), &test[..]);
    let seen: HashSet<&Vec<u8>> = train.iter().collect();
    assert!(sim.sentences().iter().all(|s| !seen.contains(s)));
}

#[test]
fn outputs_are_written() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("bler.csv");
    let json = dir.path().join("bler.json");
    let cfg = RunConfig { output: Some(csv.clone()), json: Some(json.clone()), ..small(DecoderKind::Osd) };
    let points = Simulation::new(cfg).unwrap().run_sweep().unwrap();
    let text = std::fs::read_to_string(csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], CSV_HEADER);
    assert_eq!(lines.len(), 1 + points.len());
    assert!(lines[1].starts_with("0,600,"));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(json).unwrap()).unwrap();
    assert_eq!(v["points"][1]["block_errors"], points[1].block_errors);
}

#[test]
fn missing_corpus_is_a_configuration_error() {
    let cfg = RunConfig { corpus: None, ..small(DecoderKind::SemOsd) };
    assert!(Simulation::new(cfg).is_err());
    let cfg = RunConfig { corpus: Some("/nonexistent/corpus.txt".into()), ..small(DecoderKind::SemOsd) };
    assert!(Simulation::new(cfg).is_err());
}

#[test]
fn hamming_is_rejected_for_text_and_algebraic_decoding() {
    let text = RunConfig { code: "hamming74".into(), ..small(DecoderKind::SemOsd) };
    assert!(Simulation::new(text).is_err());
    let bm = RunConfig { code: "hamming74".into(), ..small(DecoderKind::Bm) };
    assert!(Simulation::new(bm).is_err());
    let osd = RunConfig { code: "hamming74".into(), m: 4, ..small(DecoderKind::Osd) };
    let s = Simulation::new(osd).unwrap().run_point(0, 4.0).unwrap();
    assert_eq!(s.blocks, 600);
}
