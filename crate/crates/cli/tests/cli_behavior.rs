//! Exit-status and artifact behavior of the command-line interface.

use std::path::Path;
use std::process::{Command, Output};

fn lexnet(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lexnet"))
        .current_dir(cwd)
        .args(args)
        .output()
        .expect("binary runs")
}

fn stderr(output: &Output) -> String {
    String::from_utf8_lossy(&output.stderr).into_owned()
}

#[test]
fn missing_upstream_artifacts_name_the_prior_subcommand() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let set_out = format!("output.dir={}", out.display());

    let result = lexnet(&["--set", &set_out, "vocab"], dir.path());
    assert_eq!(result.status.code(), Some(1));
    assert!(
        stderr(&result).contains("run ingest"),
        "{}",
        stderr(&result)
    );

    std::fs::create_dir_all(&out).unwrap();
    std::fs::write(
        out.join("corpus.jsonl"),
        "{\"id\":\"1\",\"tokens\":[\"a\",\"b\"]}\n",
    )
    .unwrap();
    let result = lexnet(
        &["--set", &set_out, "vocab", "--set", "vocab.min_count=0"],
        dir.path(),
    );
    assert_eq!(result.status.code(), Some(0), "{}", stderr(&result));

    let result = lexnet(&["--set", &set_out, "build-wsn"], dir.path());
    assert_eq!(result.status.code(), Some(1));
    assert!(stderr(&result).contains("run train"), "{}", stderr(&result));
}

#[test]
fn stats_on_triangle_graph_reports_undefined_fields() {
    let dir = tempfile::tempdir().unwrap();
    let graph = dir.path().join("triangle.graph");
    std::fs::write(&graph, "3 3\n0 a\n1 b\n2 c\n#edges\n0 1\n0 2\n1 2\n").unwrap();
    let out = dir.path().join("out");
    let set_out = format!("output.dir={}", out.display());

    let result = lexnet(
        &["--set", &set_out, "stats", "--graph", "triangle.graph"],
        dir.path(),
    );
    assert_eq!(result.status.code(), Some(0), "{}", stderr(&result));

    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("triangle_report.json")).unwrap())
            .unwrap();
    assert_eq!(report["cc"], 1.0);
    assert_eq!(report["dac"], "undefined");
    assert_eq!(report["assortativity_class"], "undefined");
    assert_eq!(report["degree_class"], "undefined");
    assert_eq!(report["small_world"], false);

    let plot = std::fs::read_to_string(out.join("triangle_plot.csv")).unwrap();
    assert!(plot.starts_with("k,p,power_fit,two_regime_fit\n"));

    // The summary renders the undefined cells.
    let result = lexnet(&["--set", &set_out, "report"], dir.path());
    assert_eq!(result.status.code(), Some(0), "{}", stderr(&result));
    let summary = std::fs::read_to_string(out.join("summary.csv")).unwrap();
    let row = summary.lines().nth(1).unwrap();
    assert!(row.starts_with("triangle,3,3,undefined"), "{row}");
    assert!(row.contains("undefined"), "{row}");
}

#[test]
fn config_violations_are_reported_together() {
    let dir = tempfile::tempdir().unwrap();
    let result = lexnet(
        &[
            "--set",
            "wsn.sample_fraction=2.0",
            "--set",
            "threshold.sample_size=5",
            "ingest",
        ],
        dir.path(),
    );
    assert_eq!(result.status.code(), Some(1));
    let err = stderr(&result);
    assert!(err.contains("wsn.sample_fraction"), "{err}");
    assert!(err.contains("threshold.sample_size"), "{err}");
}

#[test]
fn unknown_config_key_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let result = lexnet(&["--set", "no.such.key=1", "ingest"], dir.path());
    assert_eq!(result.status.code(), Some(1));
    assert!(stderr(&result).contains("unknown key"));

    let result = lexnet(&["--set", "garbage", "ingest"], dir.path());
    assert_eq!(result.status.code(), Some(1));
    assert!(stderr(&result).contains("KEY=VALUE"));
}

#[test]
fn runtime_failures_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    // Malformed token-json-lines record: ingest starts (validation passed)
    // and fails at parse time.
    let corpus = dir.path().join("bad.jsonl");
    std::fs::write(&corpus, "not json at all\n").unwrap();
    let result = lexnet(
        &[
            "--set",
            &format!("corpus.path={}", corpus.display()),
            "--set",
            "corpus.format=token-json-lines",
            "--set",
            &format!("output.dir={}", dir.path().join("out").display()),
            "ingest",
        ],
        dir.path(),
    );
    assert_eq!(result.status.code(), Some(2), "{}", stderr(&result));
    assert!(
        stderr(&result).contains("bad.jsonl:1"),
        "{}",
        stderr(&result)
    );

    // A corpus path that does not exist is caught by validation instead.
    let result = lexnet(
        &["--set", "corpus.path=/no/such/file", "ingest"],
        dir.path(),
    );
    assert_eq!(result.status.code(), Some(1));
}

#[test]
fn sidecars_carry_the_producing_config_hash() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("c.txt");
    std::fs::write(&corpus, "a b c\nb c d\nc d e\na c e\n").unwrap();
    let out = dir.path().join("out");
    let base = [
        "--set".to_string(),
        format!("corpus.path={}", corpus.display()),
        "--set".to_string(),
        format!("output.dir={}", out.display()),
        "--set".to_string(),
        "vocab.min_count=0".to_string(),
    ];

    let run = |extra: &[&str]| {
        let mut args: Vec<String> = base.to_vec();
        args.extend(extra.iter().map(|s| s.to_string()));
        args.push("ingest".to_string());
        let arg_refs: Vec<&str> = args.iter().map(String::as_str).collect();
        let result = lexnet(&arg_refs, dir.path());
        assert_eq!(result.status.code(), Some(0), "{}", stderr(&result));
        let meta: serde_json::Value = serde_json::from_str(
            &std::fs::read_to_string(out.join("corpus.jsonl.meta.json")).unwrap(),
        )
        .unwrap();
        meta["config_hash"].as_str().unwrap().to_string()
    };

    let first = run(&[]);
    let again = run(&[]);
    assert_eq!(first, again, "same config, same hash");
    let changed = run(&["--seed", "7"]);
    assert_ne!(first, changed, "seed override must change the hash");
    assert_eq!(first.len(), 64);
}

#[test]
fn help_and_version_exit_zero() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(lexnet(&["--help"], dir.path()).status.code(), Some(0));
    assert_eq!(lexnet(&["--version"], dir.path()).status.code(), Some(0));
    // No subcommand is a usage error.
    assert_eq!(lexnet(&[], dir.path()).status.code(), Some(1));
}

#[test]
fn pipeline_produces_the_full_artifact_set() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("c.txt");
    let lines: Vec<String> = (0..80)
        .map(|i| {
            if i % 2 == 0 {
                "apple berry cherry date".to_string()
            } else {
                "xenon yttrium zinc tungsten".to_string()
            }
        })
        .collect();
    std::fs::write(&corpus, lines.join("\n") + "\n").unwrap();
    let out = dir.path().join("out");

    let result = lexnet(
        &[
            "--set",
            &format!("corpus.path={}", corpus.display()),
            "--set",
            &format!("output.dir={}", out.display()),
            "--set",
            "embedding.dim=8",
            "--set",
            "embedding.epochs=2",
            "--set",
            "threshold.percentile=75",
            "pipeline",
        ],
        dir.path(),
    );
    assert_eq!(result.status.code(), Some(0), "{}", stderr(&result));
    for name in [
        "corpus.jsonl",
        "vocab.tsv",
        "embeddings.txt",
        "wcn.graph",
        "wsn.graph",
        "wsn_threshold.json",
        "wcn_report.json",
        "wsn_report.json",
        "wcn_plot.csv",
        "wsn_plot.csv",
        "summary.txt",
        "summary.csv",
    ] {
        let path = out.join(name);
        assert!(path.exists(), "missing artifact {name}");
        let sidecar = out.join(format!("{name}.meta.json"));
        assert!(sidecar.exists(), "missing sidecar for {name}");
    }
    let summary = std::fs::read_to_string(out.join("summary.txt")).unwrap();
    assert!(summary.lines().count() >= 3, "{summary}");
}
