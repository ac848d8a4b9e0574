use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use layerfuse::ingest::{write_lwe, LayerStack, LweFile, SentenceRecord, Token, TokenFlags};
use serde_json::Value;

fn layerfuse(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_layerfuse"))
        .args(args)
        .env_remove("LAYERFUSE_THREADS")
        .output()
        .unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = layerfuse(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn fails(args: &[&str], status: i32, code: &str) {
    let out = layerfuse(args);
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert_eq!(out.status.code(), Some(status), "{args:?}: {stderr}");
    assert!(
        stderr.contains(&format!("error[{code}]")),
        "{args:?}: {stderr}"
    );
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn constant_token(text: &str, flags: TokenFlags, v: [f32; 2]) -> Token<f32> {
    Token {
        text: text.into(),
        flags,
        stack: LayerStack::from_layers(&[v; 13]).unwrap(),
    }
}

fn at(deg: f32) -> [f32; 2] {
    let r = deg.to_radians();
    [r.cos(), r.sin()]
}

/// Four pairs of one-word sentences with constant stacks, so each sentence
/// embedding is its word vector. Pair cosines are 1, 1/2, 0 and -1.
fn four_pairs(dir: &Path) -> (PathBuf, PathBuf) {
    let mut file = LweFile::new(13, 2);
    let angles = [(0.0, 0.0), (0.0, 60.0), (0.0, 90.0), (0.0, 180.0)];
    for (k, (a, b)) in angles.iter().enumerate() {
        for (j, deg) in [a, b].into_iter().enumerate() {
            file.records.push(SentenceRecord {
                tokens: vec![
                    constant_token("[CLS]", TokenFlags::SPECIAL, [3.0, 7.0]),
                    constant_token("word", TokenFlags::WORD, at(*deg)),
                ],
                source_index: 2 * k + j,
            });
        }
    }
    let lwe = dir.join("four.lwe");
    write_lwe(&file, &lwe).unwrap();
    let gold = dir.join("four.tsv");
    std::fs::write(&gold, "5\tw\tw\n2\tw\tw\n3\tw\tw\n0\tw\tw\n").unwrap();
    (lwe, gold)
}

fn synth_pairs(dir: &Path) -> (PathBuf, PathBuf) {
    let lwe = dir.join("pairs.lwe");
    let gold = dir.join("pairs.tsv");
    ok(&[
        "synth",
        "--pairs",
        "12",
        "--dim",
        "24",
        "--vocabulary",
        "30",
        "--seed",
        "3",
        "--output",
        s(&lwe),
        "--gold",
        s(&gold),
    ]);
    (lwe, gold)
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn eval_sts_matches_hand_oracle() {
    let dir = tempfile::tempdir().unwrap();
    let (lwe, gold) = four_pairs(dir.path());
    let out = dir.path().join("report.json");
    let stdout = ok(&[
        "eval-sts",
        "--input",
        s(&lwe),
        "--gold",
        s(&gold),
        "--output",
        s(&out),
    ]);
    assert!(stdout.contains("four"));

    // x = (1, 0.5, 0, -1), y = (5, 2, 3, 0): sxy = 4.75, sxx = 2.1875, syy = 13.
    let pearson = 4.75 / (2.1875f64 * 13.0).sqrt();
    // Ranks (4, 3, 2, 1) and (4, 2, 3, 1): 1 - 6 * 2 / (4 * 15).
    let spearman = 0.8;
    let report = read_json(&out);
    let d = &report["datasets"][0];
    assert_eq!(d["n"], 4);
    assert!((d["pearson_raw"].as_f64().unwrap() - pearson).abs() < 1e-6);
    assert!((d["spearman_raw"].as_f64().unwrap() - spearman).abs() < 1e-12);
    assert_eq!(d["pearson"].as_f64().unwrap(), 89.07);
    assert_eq!(d["spearman"].as_f64().unwrap(), 80.0);
    assert_eq!(report["run_manifest"], "report.json.run.json");
    assert_eq!(report["config"]["omega"], 0.5);

    let manifest = read_json(&dir.path().join("report.json.run.json"));
    assert_eq!(manifest["command"], "eval-sts");
    assert_eq!(manifest["configs"][0]["start_layer"], 4);
    assert!(manifest["timings_ms"]["evaluate"].is_number());
}

#[test]
fn outputs_do_not_depend_on_thread_count() {
    let dir = tempfile::tempdir().unwrap();
    let (lwe, gold) = synth_pairs(dir.path());
    let mut embs = Vec::new();
    let mut reports = Vec::new();
    for threads in ["1", "3", "1", "8"] {
        let emb = dir.path().join(format!("e{}.emb", embs.len()));
        let rep = dir.path().join(format!("r{}.json", reports.len()));
        ok(&[
            "embed",
            "--threads",
            threads,
            "--input",
            s(&lwe),
            "--output",
            s(&emb),
        ]);
        ok(&[
            "eval-sts",
            "--threads",
            threads,
            "--input",
            s(&lwe),
            "--gold",
            s(&gold),
            "--output",
            s(&rep),
        ]);
        embs.push(std::fs::read(&emb).unwrap());
        let mut r = read_json(&rep);
        r.as_object_mut().unwrap().remove("run_manifest");
        reports.push(r);
    }
    assert!(embs.windows(2).all(|w| w[0] == w[1]));
    assert!(reports.windows(2).all(|w| w[0] == w[1]));
    let emb = layerfuse::ingest::EmbeddingFile::decode(&embs[0]).unwrap();
    assert_eq!((emb.count(), emb.dim), (24, 24));
}

#[test]
fn threads_fall_back_to_environment() {
    let dir = tempfile::tempdir().unwrap();
    let (lwe, _) = synth_pairs(dir.path());
    let emb = dir.path().join("e.emb");
    let out = Command::new(env!("CARGO_BIN_EXE_layerfuse"))
        .args(["embed", "--input", s(&lwe), "--output", s(&emb)])
        .env("LAYERFUSE_THREADS", "2")
        .output()
        .unwrap();
    assert!(out.status.success());
    let manifest = read_json(&dir.path().join("e.emb.run.json"));
    assert_eq!(manifest["threads"], 2);
}

#[test]
fn token_weight_dump() {
    let dir = tempfile::tempdir().unwrap();
    let (lwe, _) = synth_pairs(dir.path());
    let emb = dir.path().join("e.emb");
    let tsv = dir.path().join("w.tsv");
    ok(&[
        "embed",
        "--input",
        s(&lwe),
        "--output",
        s(&emb),
        "--dump-token-weights",
        s(&tsv),
        "--merge-subwords",
    ]);
    let text = std::fs::read_to_string(&tsv).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("sentence\ttoken\ttext\tvariance\tweight")
    );
    let mut sums = vec![0.0f64; 24];
    for line in lines {
        let f: Vec<&str> = line.split('\t').collect();
        assert_eq!(f.len(), 5);
        assert_ne!(f[2], "[CLS]");
        assert!(!f[2].starts_with("##"));
        sums[f[0].parse::<usize>().unwrap()] += f[4].parse::<f64>().unwrap();
    }
    assert!(sums.iter().all(|x| (x - 1.0).abs() < 1e-9), "{sums:?}");
}

#[test]
fn omega_endpoint_and_sweep_grid() {
    let dir = tempfile::tempdir().unwrap();
    let (lwe, gold) = synth_pairs(dir.path());
    let grid = dir.path().join("grid.json");
    let stdout = ok(&[
        "eval-sts",
        "--input",
        s(&lwe),
        "--gold",
        s(&gold),
        "--output",
        s(&grid),
        "--sweep",
        "omega=0,1",
        "--sweep",
        "window=1..2",
    ]);
    assert_eq!(stdout.lines().count(), 5);
    let runs = read_json(&grid)["runs"].as_array().unwrap().clone();
    assert_eq!(runs.len(), 4);

    let single = dir.path().join("single.json");
    ok(&[
        "eval-sts",
        "--input",
        s(&lwe),
        "--gold",
        s(&gold),
        "--output",
        s(&single),
        "--omega",
        "1",
        "--window",
        "2",
    ]);
    let mut single = read_json(&single);
    single.as_object_mut().unwrap().remove("run_manifest");
    assert_eq!(runs[3], single);
}

#[test]
fn several_datasets_report_a_mean() {
    let dir = tempfile::tempdir().unwrap();
    let (a, ga) = synth_pairs(dir.path());
    let (b, gb) = four_pairs(dir.path());
    let out = dir.path().join("r.json");
    ok(&[
        "eval-sts",
        "--input",
        s(&a),
        "--gold",
        s(&ga),
        "--input",
        s(&b),
        "--gold",
        s(&gb),
        "--output",
        s(&out),
        "--start-layer",
        "0",
    ]);
    let r = read_json(&out);
    assert_eq!(r["datasets"].as_array().unwrap().len(), 2);
    let mean = r["mean"]["pearson_raw"].as_f64().unwrap();
    let each: f64 = (0..2)
        .map(|i| r["datasets"][i]["pearson_raw"].as_f64().unwrap())
        .sum();
    assert!((mean - each / 2.0).abs() < 1e-12);
}

#[test]
fn analyze_writes_expected_shapes() {
    let dir = tempfile::tempdir().unwrap();
    let lwe = dir.path().join("corpus.lwe");
    ok(&[
        "synth",
        "--sentences",
        "40",
        "--dim",
        "16",
        "--layers",
        "7",
        "--vocabulary",
        "15",
        "--output",
        s(&lwe),
    ]);
    let out = dir.path().join("analysis");
    ok(&[
        "analyze",
        "--input",
        s(&lwe),
        "--output-dir",
        s(&out),
        "--min-occurrences",
        "3",
    ]);

    let grid = std::fs::read_to_string(out.join("similarity.csv")).unwrap();
    let rows: Vec<&str> = grid.lines().collect();
    assert_eq!(rows.len(), 8);
    assert!(rows[1..].iter().all(|r| r.split(',').count() == 8));
    assert_eq!(rows[1].split(',').nth(1), Some("1"));

    let offsets = std::fs::read_to_string(out.join("offsets.csv")).unwrap();
    assert_eq!(offsets.lines().filter(|l| l.starts_with("1,")).count(), 6);

    let table = std::fs::read_to_string(out.join("word_variance.csv")).unwrap();
    assert!(table.starts_with("rank,word,mean_variance,occurrences,idf,tertile"));
    assert!(table.lines().count() > 3);

    let corr = read_json(&out.join("idf_correlation.json"));
    for key in ["rho", "p", "n"] {
        assert!(corr.get(key).is_some(), "missing {key}");
    }
    assert!(out.join("run.json").exists());
}

#[test]
fn bench_reports_both_backends() {
    let dir = tempfile::tempdir().unwrap();
    let (lwe, _) = synth_pairs(dir.path());
    let out = dir.path().join("bench.json");
    ok(&[
        "bench",
        "--input",
        s(&lwe),
        "--trials",
        "2",
        "--output",
        s(&out),
    ]);
    let r = read_json(&out);
    let backends = r["backends"].as_array().unwrap();
    assert_eq!(backends[0]["backend"], "qr");
    assert_eq!(backends[1]["backend"], "svd");
    assert!(backends
        .iter()
        .all(|b| b["trials"] == 2 && b["mean_ms"].as_f64().unwrap() > 0.0));
    assert_eq!(r["sentences"], 24);
    fails(&["bench", "--input", s(&lwe), "--trials", "0"], 2, "USAGE");
}

#[test]
fn synth_is_seeded() {
    let dir = tempfile::tempdir().unwrap();
    let p = |n: &str| dir.path().join(n);
    for (name, seed) in [("a.lwe", "5"), ("b.lwe", "5"), ("c.lwe", "6")] {
        ok(&[
            "synth",
            "--sentences",
            "3",
            "--dim",
            "8",
            "--seed",
            seed,
            "--output",
            s(&p(name)),
        ]);
    }
    let read = |n: &str| std::fs::read(p(n)).unwrap();
    assert_eq!(read("a.lwe"), read("b.lwe"));
    assert_ne!(read("a.lwe"), read("c.lwe"));
}

#[test]
fn exit_codes_and_error_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let (lwe, gold) = four_pairs(d);
    let out = d.join("o.emb");

    fails(
        &["embed", "--input", "missing.lwe", "--output", s(&out)],
        3,
        "IO_FAILURE",
    );
    fails(&["embed", "--bogus"], 2, "USAGE");
    fails(
        &[
            "embed",
            "--input",
            s(&lwe),
            "--output",
            s(&out),
            "--omega",
            "1.5",
        ],
        2,
        "INVALID_CONFIG",
    );
    fails(
        &[
            "embed",
            "--input",
            s(&lwe),
            "--output",
            s(&out),
            "--start-layer",
            "13",
        ],
        2,
        "INVALID_CONFIG",
    );
    fails(
        &[
            "embed",
            "--input",
            s(&lwe),
            "--output",
            s(&out),
            "--novelty",
            "lu",
        ],
        2,
        "USAGE",
    );

    let junk = d.join("junk.lwe");
    std::fs::write(&junk, b"NOPE0000000000000000").unwrap();
    fails(
        &["embed", "--input", s(&junk), "--output", s(&out)],
        3,
        "BAD_MAGIC",
    );

    let short_gold = d.join("short.tsv");
    std::fs::write(&short_gold, "1\ta\tb\n").unwrap();
    let r = d.join("r.json");
    fails(
        &[
            "eval-sts",
            "--input",
            s(&lwe),
            "--gold",
            s(&short_gold),
            "--output",
            s(&r),
        ],
        3,
        "MISMATCH",
    );
    fails(
        &[
            "eval-sts",
            "--input",
            s(&lwe),
            "--input",
            s(&lwe),
            "--gold",
            s(&gold),
            "--output",
            s(&r),
        ],
        2,
        "USAGE",
    );

    let mut zero = LweFile::new(13, 2);
    zero.records.push(SentenceRecord {
        tokens: vec![constant_token("nil", TokenFlags::WORD, [0.0, 0.0])],
        source_index: 0,
    });
    let zero_path = d.join("zero.lwe");
    write_lwe(&zero, &zero_path).unwrap();
    fails(
        &["embed", "--input", s(&zero_path), "--output", s(&out)],
        4,
        "ZERO_NORM_VECTOR",
    );

    let out = layerfuse(&["--help"]);
    assert!(out.status.success());
}
