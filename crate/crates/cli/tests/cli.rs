use std::path::PathBuf;
use std::process::{Command, Output};

fn semosd(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_semosd")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    assert!(o.status.success(), "stderr: {}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn corpus() -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/lee_lines.txt").display().to_string()
}

#[test]
fn tepcount_prints_family_sizes() {
    let out = stdout(&semosd(&["tepcount", "--kb", "64", "--m", "4", "--k", "8", "--omega", "2", "--T", "16"]));
    assert_eq!(out.trim(), "679121 7297 686418");
}

#[test]
fn bound_prints_one_line_per_point() {
    let out = stdout(&semosd(&["bound", "--n", "128", "--k", "64", "--ebn0", "0:1:3"]));
    let rows: Vec<(f64, f64)> = out
        .lines()
        .map(|l| {
            let (a, b) = l.split_once(' ').unwrap();
            (a.parse().unwrap(), b.parse().unwrap())
        })
        .collect();
    assert_eq!(rows.len(), 4);
    assert!((rows[1].1 - 0.1027).abs() < 0.01 * 0.1027);
    assert!(rows.windows(2).all(|w| w[1].1 < w[0].1));
}

#[test]
fn simulate_prints_csv() {
    let out = stdout(&semosd(&["simulate", "--decoder", "bm", "--ebn0", "1,2", "--max-blocks", "200"]));
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "ebn0_db,blocks,block_errors,bler,ci_halfwidth,ber,mean_teps,mean_ms,wins_bit,wins_byte");
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("1,"));
}

#[test]
fn text_decoder_without_corpus_fails() {
    let o = semosd(&["simulate", "--decoder", "semosd", "--max-blocks", "10"]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("corpus"));
}

#[test]
fn unknown_keys_and_values_fail() {
    assert!(!semosd(&["simulate", "--set", "colour=blue"]).status.success());
    assert!(!semosd(&["simulate", "--decoder", "viterbi"]).status.success());
    assert!(!semosd(&["simulate", "--alpha", "1.5", "--max-blocks", "1"]).status.success());
}

#[test]
fn flags_override_config_file_and_set_overrides_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    let csv = dir.path().join("out.csv");
    std::fs::write(&cfg, "# baseline\ndecoder = bm\nebn0 = 0:1:3\nmax_blocks = 50\nseed = 9\n").unwrap();
    let path = cfg.display().to_string();

    let file_only = stdout(&semosd(&["simulate", "--config", &path]));
    assert_eq!(file_only.lines().count(), 1 + 4);

    let flagged = stdout(&semosd(&["simulate", "--config", &path, "--ebn0", "2", "--max-blocks", "70"]));
    assert_eq!(flagged.lines().count(), 2);
    assert!(flagged.lines().nth(1).unwrap().starts_with("2,70,"));

    let set = stdout(&semosd(&[
        "simulate",
        "--config",
        &path,
        "--max-blocks",
        "70",
        "--set",
        "max_blocks=30",
        "--output",
        &csv.display().to_string(),
    ]));
    assert!(set.lines().skip(1).all(|l| l.split(',').nth(1) == Some("30")));
    assert_eq!(std::fs::read_to_string(&csv).unwrap().lines().count(), 1 + 4);
}

#[test]
fn trained_prior_serves_over_stdio() {
    let dir = tempfile::tempdir().unwrap();
    let model = dir.path().join("model.json");
    let model_path = model.display().to_string();
    let trained = stdout(&semosd(&["train-prior", "--corpus", &corpus(), "--out", &model_path, "--order", "4"]));
    assert!(trained.contains("held out"));

    let endpoint = format!("exec:{} serve --model {model_path}", env!("CARGO_BIN_EXE_semosd"));
    let check = stdout(&semosd(&[
        "serve-check",
        "--endpoint",
        &endpoint,
        "--count",
        "20",
        "--ctx",
        "The man is walking ",
        "--hd",
        "tje dog ",
    ]));
    assert!(check.starts_with("ok: 20 requests, 0 rows renormalised"), "{check}");
}

#[test]
fn simulate_with_served_prior() {
    let dir = tempfile::tempdir().unwrap();
    let model = dir.path().join("model.json");
    let model_path = model.display().to_string();
    stdout(&semosd(&["train-prior", "--corpus", &corpus(), "--out", &model_path]));
    let endpoint = format!("exec:{} serve --model {model_path}", env!("CARGO_BIN_EXE_semosd"));
    let remote = stdout(&semosd(&[
        "simulate",
        "--decoder",
        "semosd",
        "--prior",
        "remote",
        "--prior-endpoint",
        &endpoint,
        "--corpus",
        &corpus(),
        "--ebn0",
        "1",
        "--max-blocks",
        "100",
        "--workers",
        "2",
    ]));
    let local = stdout(&semosd(&[
        "simulate",
        "--decoder",
        "semosd",
        "--prior",
        "ngram",
        "--prior-model",
        &model_path,
        "--corpus",
        &corpus(),
        "--ebn0",
        "1",
        "--max-blocks",
        "100",
    ]));
    // Same prior, same trials: the counters agree; only timing differs.
    let counters = |s: &str| {
        let f: Vec<String> = s.lines().nth(1).unwrap().split(',').map(String::from).collect();
        [0, 1, 2, 3, 5, 6, 8, 9].map(|i| f[i].clone())
    };
    assert_eq!(counters(&remote), counters(&local));
}
