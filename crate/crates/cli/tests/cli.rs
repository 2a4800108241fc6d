use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn harmonize(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_harmonize")).args(args).output().expect("binary runs")
}

fn ok(out: Output) -> Output {
    assert!(out.status.success(), "exit {:?}\nstderr: {}", out.status.code(), String::from_utf8_lossy(&out.stderr));
    out
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// (slug, rules file)
const SOURCES: [(&str, Option<&str>); 7] = [
    ("sra", None),
    ("geo", Some("geo.rules")),
    ("immport", Some("immport.rules")),
    ("accessclinicaldata", Some("accessclinicaldata.rules")),
    ("veupathdb", Some("veupathdb.rules")),
    ("zenodo", None),
    ("massive", Some("massive.rules")),
];

/// harvest every fixture source, then augment; returns (corpus, report).
fn chain(dir: &Path, extra: &[&str]) -> (PathBuf, PathBuf) {
    let fx = fixtures();
    let mut harvested = Vec::new();
    for (slug, rules) in SOURCES {
        let out = dir.join(format!("{slug}.ndjson"));
        let input = fx.join(slug);
        let mut args = vec!["harvest", "--source", slug, "--in", s(&input), "--out", s(&out)];
        let rules_path = rules.map(|r| fx.join("rules").join(r));
        if let Some(r) = &rules_path {
            args.extend(["--rules", s(r)]);
        }
        args.extend(extra);
        ok(harmonize(&args));
        harvested.push(out);
    }
    let corpus = dir.join("augmented.ndjson");
    let report = dir.join("coverage.tsv");
    let (lex, ann, cor) = (fx.join("lexicons"), fx.join("annotations"), fx.join("corrections.tsv"));
    let mut args = vec!["augment"];
    for h in &harvested {
        args.extend(["--in", s(h)]);
    }
    args.extend(["--out", s(&corpus), "--lexicons", s(&lex), "--annotations", s(&ann)]);
    args.extend(["--corrections", s(&cor), "--report", s(&report)]);
    args.extend(extra);
    ok(harmonize(&args));
    (corpus, report)
}

#[test]
fn full_chain_reproduces_golden_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let (corpus, report) = chain(dir.path(), &[]);
    let golden = fixtures().join("golden");
    assert_eq!(std::fs::read_to_string(&report).unwrap(), std::fs::read_to_string(golden.join("coverage.tsv")).unwrap());
    assert_eq!(
        std::fs::read_to_string(&corpus).unwrap(),
        std::fs::read_to_string(fixtures().join("corpus/fixture25.ndjson")).unwrap()
    );
    let check = ok(harmonize(&["index", "--in", s(&corpus), "--check"]));
    assert!(String::from_utf8_lossy(&check.stderr).contains("index check passed"));
    let printed = ok(harmonize(&["report", "--in", s(&corpus)])).stdout;
    assert_eq!(String::from_utf8(printed).unwrap(), std::fs::read_to_string(golden.join("report.tsv")).unwrap());
}

#[test]
fn chain_output_does_not_depend_on_thread_count() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let (corpus_a, report_a) = chain(a.path(), &["--jobs", "1"]);
    let (corpus_b, report_b) = chain(b.path(), &["--jobs", "4"]);
    assert_eq!(std::fs::read(corpus_a).unwrap(), std::fs::read(corpus_b).unwrap());
    assert_eq!(std::fs::read(report_a).unwrap(), std::fs::read(report_b).unwrap());
}

#[test]
fn validate_exit_codes() {
    let good = fixtures().join("corpus/fixture25.ndjson");
    ok(harmonize(&["validate", "--in", s(&good)]));

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.ndjson");
    let text = std::fs::read_to_string(&good).unwrap();
    let mut lines: Vec<serde_json::Value> = text.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    lines[3].as_object_mut().unwrap().remove("name");
    let id = lines[3]["_id"].as_str().unwrap().to_string();
    let body: String = lines.iter().map(|v| format!("{v}\n")).collect();
    std::fs::write(&bad, body).unwrap();
    let out = harmonize(&["validate", "--in", s(&bad)]);
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains(&id) && stderr.contains("name"), "{stderr}");
}

#[test]
fn wrong_stage_order_is_a_usage_error() {
    let fx = fixtures();
    let corpus = fx.join("corpus/fixture25.ndjson");
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("out.ndjson");
    let lex = fx.join("lexicons");
    let out = harmonize(&[
        "augment", "--in", s(&corpus), "--out", s(&out_path), "--stages", "citation,standardize", "--lexicons", s(&lex),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("cannot run after"));
    assert!(!out_path.exists());

    let out = harmonize(&["augment", "--in", s(&corpus), "--out", s(&out_path), "--stages", "standardize"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--lexicons"));

    let out = harmonize(&["augment", "--in", s(&corpus), "--out", s(&out_path), "--stages", "bogus"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn search_prints_ndjson_hits() {
    let corpus = fixtures().join("corpus/fixture25.ndjson");
    let out = ok(harmonize(&[
        "search",
        "--in",
        s(&corpus),
        "--q",
        "Zika virus",
        "--filter",
        "species.label:Homo sapiens",
        "--filter",
        "measurementTechnique.label:Proteomics",
    ]))
    .stdout;
    let text = String::from_utf8(out).unwrap();
    let hits: Vec<serde_json::Value> = text.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(hits.len(), 1);
    assert_eq!(hits[0]["_id"], "massive_MSV000090001");

    let all = ok(harmonize(&["search", "--in", s(&corpus), "--size", "100"])).stdout;
    let text = String::from_utf8(all).unwrap();
    assert_eq!(text.lines().count(), 25);
    assert!(text.lines().all(|l| serde_json::from_str::<serde_json::Value>(l).is_ok()));
}

#[test]
fn bad_queries_and_arguments_exit_two() {
    let corpus = fixtures().join("corpus/fixture25.ndjson");
    assert_eq!(harmonize(&["search", "--in", s(&corpus), "--advanced", "(bad"]).status.code(), Some(2));
    assert_eq!(harmonize(&["search", "--in", s(&corpus), "--filter", "name:x"]).status.code(), Some(2));
    assert_eq!(harmonize(&["search", "--in", s(&corpus), "--q", "a", "--advanced", "b"]).status.code(), Some(2));
    assert_eq!(harmonize(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(harmonize(&["validate"]).status.code(), Some(2));
    assert_eq!(harmonize(&["harvest", "--source", "nosuch", "--in", ".", "--out", "x"]).status.code(), Some(2));
}

#[test]
fn duplicate_ids_fail_index_and_validate() {
    let corpus = fixtures().join("corpus/fixture25.ndjson");
    let out = harmonize(&["index", "--in", s(&corpus), "--in", s(&corpus)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("duplicate _id"));
    assert_eq!(harmonize(&["validate", "--in", s(&corpus), "--in", s(&corpus)]).status.code(), Some(1));
}

#[test]
fn missing_corpus_is_a_data_error() {
    assert_eq!(harmonize(&["report", "--in", "/nonexistent/c.ndjson"]).status.code(), Some(1));
}

#[test]
fn version_is_machine_readable() {
    let out = ok(harmonize(&["--version"])).stdout;
    assert_eq!(String::from_utf8(out).unwrap().trim(), format!("harmonize {}", env!("CARGO_PKG_VERSION")));
}
