//! End-to-end tests of the command-line interface.

use std::path::Path;
use std::process::{Command, Output};

fn bnbp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bnbp"))
        .args(args)
        .env_remove("BNBP_SEED")
        .output()
        .unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn write_two_group_corpus(p: &Path) {
    let mut text = String::from("#vocab_sizes=8\n");
    for i in 0..12 {
        let (group, words) = if i % 2 == 0 {
            ("x", [0, 1, 2, 3])
        } else {
            ("y", [4, 5, 6, 7])
        };
        let toks: Vec<String> = words
            .iter()
            .map(|w| format!("{w}:{}", 2 + (i + w) % 4))
            .collect();
        text.push_str(&format!("doc{i}\t{group}\t{}\n", toks.join(" ")));
    }
    std::fs::write(p, text).unwrap();
}

#[test]
fn toy_bars_train_is_reproducible_and_resumable() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("bars.txt");
    let out = bnbp(&[
        "make-toy-bars",
        "--documents",
        "8",
        "--words",
        "30",
        "--seed",
        "3",
        "-o",
        path(&corpus),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(dir.path().join("bars.txt.manifest.json").exists());

    let run = |name: &str, iterations: &str| {
        let model = dir.path().join(name);
        let out = bnbp(&[
            "train",
            path(&corpus),
            "--set",
            &format!("iterations={iterations}"),
            "--set",
            "mode=finite-k",
            "--set",
            "K=20",
            "--seed",
            "9",
            "--checkpoint-every",
            "5",
            "-o",
            path(&model),
        ]);
        assert!(
            out.status.success(),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
        model
    };
    let a = run("a", "20");
    let b = run("b", "20");
    for file in ["samples.jsonl", "trace.csv"] {
        assert_eq!(
            std::fs::read_to_string(a.join(file)).unwrap(),
            std::fs::read_to_string(b.join(file)).unwrap(),
            "{file}"
        );
    }
    for file in ["model.json", "checkpoint.json", "manifest.json"] {
        assert!(a.join(file).exists(), "{file}");
    }

    // Ten iterations, then resume to twenty: same chain as the direct run.
    let c = run("c", "10");
    let out = bnbp(&[
        "train",
        path(&corpus),
        "--set",
        "iterations=20",
        "--resume",
        "-o",
        path(&c),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert_eq!(
        std::fs::read_to_string(a.join("trace.csv")).unwrap(),
        std::fs::read_to_string(c.join("trace.csv")).unwrap()
    );
    assert_eq!(
        std::fs::read_to_string(a.join("samples.jsonl")).unwrap(),
        std::fs::read_to_string(c.join("samples.jsonl")).unwrap()
    );
}

#[test]
fn train_and_classify_two_groups() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("groups.txt");
    write_two_group_corpus(&corpus);
    let mut models = Vec::new();
    for group in ["x", "y"] {
        let model = dir.path().join(group);
        let out = bnbp(&[
            "train",
            path(&corpus),
            "--group",
            group,
            "--set",
            "iterations=60",
            "-o",
            path(&model),
        ]);
        assert!(
            out.status.success(),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
        models.push(model);
    }
    let results = dir.path().join("results");
    let out = bnbp(&[
        "classify",
        path(&corpus),
        "--model",
        path(&models[0]),
        "--model",
        path(&models[1]),
        "--inner-samples",
        "5",
        "-o",
        path(&results),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "accuracy=1");
    let confusion = std::fs::read_to_string(results.join("confusion.csv")).unwrap();
    assert!(confusion.lines().count() == 3, "{confusion}");
    let predictions = std::fs::read_to_string(results.join("predictions.csv")).unwrap();
    assert_eq!(predictions.lines().count(), 13);
}

#[test]
fn asymptotics_writes_tables() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("asym");
    let out = bnbp(&[
        "simulate-asymptotics",
        "--r-min",
        "10",
        "--r-max",
        "100",
        "--points",
        "4",
        "--replicates",
        "3",
        "--epsilon",
        "1e-4",
        "-o",
        path(&out_dir),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    for d in ["0", "0.5"] {
        for stem in ["triples", "size_counts", "summary"] {
            assert!(
                out_dir.join(format!("{stem}_discount_{d}.csv")).exists(),
                "{stem} {d}"
            );
        }
    }
    let fits = std::fs::read_to_string(out_dir.join("fits.csv")).unwrap();
    assert_eq!(fits.lines().count(), 5, "{fits}");
}

#[test]
fn errors_map_to_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("c.txt");
    write_two_group_corpus(&corpus);
    let model = dir.path().join("m");

    let unknown = bnbp(&[
        "train",
        path(&corpus),
        "--set",
        "colour=blue",
        "-o",
        path(&model),
    ]);
    assert_eq!(unknown.status.code(), Some(2));
    let invalid = bnbp(&[
        "train",
        path(&corpus),
        "--set",
        "gamma_d=2",
        "-o",
        path(&model),
    ]);
    assert_eq!(invalid.status.code(), Some(2));

    let missing = bnbp(&[
        "train",
        path(&dir.path().join("nope.txt")),
        "-o",
        path(&model),
    ]);
    assert_eq!(missing.status.code(), Some(3));

    std::fs::write(&corpus, "#vocab_sizes=4\ndoc\t\t9:1\n").unwrap();
    let out_of_range = bnbp(&["train", path(&corpus), "-o", path(&model)]);
    assert_eq!(out_of_range.status.code(), Some(3));

    let no_model = bnbp(&[
        "classify",
        path(&corpus),
        "--model",
        path(&dir.path().join("none")),
        "-o",
        path(&model),
    ]);
    assert_eq!(no_model.status.code(), Some(3));
}
