use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use clap::CommandFactory;
use serde_json::Value;

use revkit_cli::args::Cli;

fn fixture() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/data/human_fixture.jsonl")
}

fn revkit(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_revkit"))
        .args(args)
        .current_dir(dir)
        .env_remove("REVKIT_CACHE_DIR")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn version_is_semver() {
    let d = tempfile::tempdir().unwrap();
    let o = revkit(&["--version"], d.path());
    assert_eq!(o.status.code(), Some(0));
    let v = stdout(&o);
    let ver = v.trim().strip_prefix("revkit ").unwrap();
    assert_eq!(ver.split('.').filter(|p| p.parse::<u32>().is_ok()).count(), 3, "{ver}");
}

#[test]
fn exit_codes_and_json_errors() {
    let d = tempfile::tempdir().unwrap();
    let o = revkit(&["stats", "--in", "missing.jsonl"], d.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("missing.jsonl"));

    let o = revkit(&["stats", "--in", "missing.jsonl", "--json-errors"], d.path());
    assert_eq!(o.status.code(), Some(1));
    let v: Value = serde_json::from_str(stderr(&o).trim()).unwrap();
    assert_eq!(v["error"], "data");
    assert_eq!(v["path"], "missing.jsonl");

    let o = revkit(&["stats", "--no-such-flag"], d.path());
    assert_eq!(o.status.code(), Some(2));
    let o = revkit(&["--json-errors", "revise", "--in", "x", "--intent-refresh", "sometimes"], d.path());
    assert_eq!(o.status.code(), Some(2));
    let v: Value = serde_json::from_str(stderr(&o).trim()).unwrap();
    assert_eq!(v["error"], "usage");
}

#[test]
fn help_lists_every_flag() {
    let d = tempfile::tempdir().unwrap();
    let cmd = Cli::command();
    for sub in cmd.get_subcommands() {
        let o = revkit(&[sub.get_name(), "--help"], d.path());
        assert_eq!(o.status.code(), Some(0));
        let text = stdout(&o);
        for arg in sub.get_arguments().chain(cmd.get_arguments()) {
            if let Some(long) = arg.get_long() {
                assert!(text.contains(&format!("--{long}")), "{} --help lacks --{long}", sub.get_name());
            }
        }
    }
}

#[test]
fn stats_formats_agree() {
    let d = tempfile::tempdir().unwrap();
    let f = fixture();
    let f = f.to_str().unwrap();
    let table = stdout(&revkit(&["stats", "--in", f], d.path()));
    assert!(table.contains("  Total |       178     1,177 |       179     1,432 |       202     1,409"), "{table}");
    assert!(table.contains("Clarity          1,601 (39.85%)"));
    let json: Value = serde_json::from_str(&stdout(&revkit(&["stats", "--in", f, "--format", "json"], d.path()))).unwrap();
    assert_eq!(json["domains"]["wikinews"]["total"]["edits"], 1409);
    assert_eq!(json["intentions"]["clarity"]["count"], 1601);
    let tsv = stdout(&revkit(&["stats", "--in", f, "--format", "tsv"], d.path()));
    assert!(tsv.lines().all(|l| l.contains('\t')));
}

#[test]
fn outputs_are_reproducible_and_manifested() {
    let d = tempfile::tempdir().unwrap();
    let f = fixture();
    let f = f.to_str().unwrap();
    for out in ["a.jsonl", "b.jsonl"] {
        let o = revkit(&["extract", "--in", f, "--out", out, "--granularity", "sentence", "--threads", "3"], d.path());
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    }
    let a = std::fs::read(d.path().join("a.jsonl")).unwrap();
    assert_eq!(a, std::fs::read(d.path().join("b.jsonl")).unwrap());
    let m: Value = serde_json::from_str(&std::fs::read_to_string(d.path().join("a.jsonl.manifest.json")).unwrap()).unwrap();
    let m2: Value = serde_json::from_str(&std::fs::read_to_string(d.path().join("b.jsonl.manifest.json")).unwrap()).unwrap();
    assert_eq!(m["command"], "extract");
    assert_eq!(m["config_hash"].as_str().unwrap().len(), 64);
    assert_ne!(m["config_hash"], m2["config_hash"], "the output path is part of the configuration");
    assert_eq!(m["inputs"][0]["sha256"], m2["inputs"][0]["sha256"]);
    assert_eq!(m["outputs"][0]["sha256"], m2["outputs"][0]["sha256"]);
    assert_eq!(m["metadata"]["segmenter"], "rules-v1");

    for out in ["m1.json", "m2.json"] {
        let o = revkit(&["train-intent", "--in", f, "--seed", "5", "--out", out, "--max-epochs", "20"], d.path());
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        assert!(stdout(&o).contains("3254/400/364"));
    }
    assert_eq!(
        std::fs::read(d.path().join("m1.json")).unwrap(),
        std::fs::read(d.path().join("m2.json")).unwrap()
    );
}

#[test]
fn failed_runs_leave_no_partial_output() {
    let d = tempfile::tempdir().unwrap();
    let good = std::fs::read_to_string(fixture()).unwrap();
    let mut bad: String = good.lines().take(700).collect::<Vec<_>>().join("\n");
    bad.push_str("\n{not json\n");
    std::fs::write(d.path().join("bad.jsonl"), bad).unwrap();
    let o = revkit(&["extract", "--in", "bad.jsonl", "--out", "out.jsonl"], d.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(!d.path().join("out.jsonl").exists());
    let leftovers: Vec<_> = std::fs::read_dir(d.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
    assert_eq!(leftovers.len(), 1, "{leftovers:?}");
}

fn traces(path: &Path) -> Vec<Value> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect()
}

#[test]
fn config_file_supplies_defaults() {
    let d = tempfile::tempdir().unwrap();
    std::fs::write(
        d.path().join("docs.jsonl"),
        "{\"id\":\"a\",\"text\":\"the the  cat sat. it ran.\"}\n{\"id\":\"b\",\"text\":\"Fine.\"}\n",
    )
    .unwrap();
    std::fs::write(d.path().join("run.conf"), "# pipeline\nseed = 3\nrevise.max-depth = 1\ntrace_out = t.jsonl\n").unwrap();
    let o = revkit(&["--config", "run.conf", "revise", "--in", "docs.jsonl"], d.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let t = traces(&d.path().join("t.jsonl"));
    assert_eq!(t[0]["iterations"].as_array().unwrap().len(), 1);
    assert_eq!(t[0]["stop_reason"], "DepthCutoff");

    // the command line wins
    let o = revkit(&["revise", "--config", "run.conf", "--in", "docs.jsonl", "--max-depth", "5"], d.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let t = traces(&d.path().join("t.jsonl"));
    assert_eq!(t[0]["stop_reason"], "Converged");
    assert_eq!(t[0]["iterations"].as_array().unwrap().len(), 2);
    let m: Value = serde_json::from_str(&std::fs::read_to_string(d.path().join("t.jsonl.manifest.json")).unwrap()).unwrap();
    assert_eq!(m["seed"], 3);

    std::fs::write(d.path().join("bad.conf"), "max-dept = 2\n").unwrap();
    let o = revkit(&["--config", "bad.conf", "revise", "--in", "docs.jsonl"], d.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("max-dept"));
}

#[test]
fn exec_reviser_and_intent_template() {
    let d = tempfile::tempdir().unwrap();
    std::fs::write(d.path().join("docs.jsonl"), "{\"id\":\"x\",\"text\":\"hello\",\"intents\":[\"fluency\"]}\n").unwrap();
    // echoes its conditioned input, so each depth grows by the prefix
    let o = revkit(
        &[
            "revise", "--in", "docs.jsonl", "--reviser", "exec:cat", "--max-depth", "3", "--intent-template", "[{intent}] {text}",
            "--trace-out", "t.jsonl", "--out", "final.jsonl",
        ],
        d.path(),
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let t = traces(&d.path().join("t.jsonl"));
    assert_eq!(t[0]["reviser"], "exec:cat");
    assert_eq!(t[0]["iterations"][2]["text"], "[fluency] [fluency] [fluency] hello");
    assert_eq!(t[0]["stop_reason"], "DepthCutoff");
    let fin: Value = serde_json::from_str(std::fs::read_to_string(d.path().join("final.jsonl")).unwrap().trim()).unwrap();
    assert_eq!(fin["text"], "[fluency] [fluency] [fluency] hello");

    let o = revkit(&["revise", "--in", "docs.jsonl", "--reviser", "exec:exit 3"], d.path());
    assert_eq!(o.status.code(), Some(1));
    let o = revkit(&["revise", "--in", "docs.jsonl", "--reviser", "neural"], d.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn local_ingest_then_extract() {
    let d = tempfile::tempdir().unwrap();
    let src = d.path().join("versions");
    std::fs::create_dir(&src).unwrap();
    for (n, t) in [
        (1, "The cat sat on the mat."),
        (2, "The cat sat on the mat."),
        (3, "The black cat sat on the mat."),
        (4, "The black cat sat on a mat. It purred."),
    ] {
        std::fs::write(src.join(format!("cat.v{n}.txt")), t).unwrap();
    }
    let o = revkit(&["ingest", "--source", "local", "--input-dir", "versions", "--out", "pairs.jsonl"], d.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let o = revkit(&["extract", "--in", "pairs.jsonl", "--out", "revs.jsonl"], d.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let recs = traces(&d.path().join("revs.jsonl"));
    assert_eq!(recs.len(), 2);
    assert_eq!(recs[0]["depth"], 1);
    assert_eq!(recs[0]["edit_actions"][0]["revised"], "black ");
    assert_eq!(recs[1]["edit_actions"].as_array().unwrap().len(), 2);

    let o = revkit(&["ingest", "--source", "wikipedia", "--out", "x.jsonl"], d.path());
    assert_eq!(o.status.code(), Some(2), "a seed list is required");
}

#[test]
fn evaluate_no_edit_baseline() {
    let d = tempfile::tempdir().unwrap();
    std::fs::write(
        d.path().join("pred.jsonl"),
        "{\"id\":1,\"source\":\"the cat sat on the mat .\",\"prediction\":\"the cat sat on the mat .\"}\n",
    )
    .unwrap();
    std::fs::write(d.path().join("ref.jsonl"), "{\"id\":1,\"references\":[\"the cat sat on a mat .\"]}\n").unwrap();
    let o = revkit(
        &["evaluate", "--in", "pred.jsonl", "--ref", "ref.jsonl", "--metrics", "sari,bleu,rouge,dist", "--out", "r.json"],
        d.path(),
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let r: Value = serde_json::from_str(&std::fs::read_to_string(d.path().join("r.json")).unwrap()).unwrap();
    assert_eq!(r["sentence_level"]["ADD"], 0.0);
    assert_eq!(r["sentence_level"]["DEL"], 0.0);
    assert_eq!(r["sentence_level"]["Dist"], 0.0);
    assert!(r["corpus_level"]["BLEU"].as_f64().unwrap() > 0.0);

    let o = revkit(&["evaluate", "--in", "pred.jsonl", "--metrics", "sari"], d.path());
    assert_eq!(o.status.code(), Some(2));
    std::fs::write(d.path().join("other.jsonl"), "{\"id\":2,\"reference\":\"x\"}\n").unwrap();
    let o = revkit(&["evaluate", "--in", "pred.jsonl", "--ref", "other.jsonl"], d.path());
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn classify_keeps_human_labels() {
    let d = tempfile::tempdir().unwrap();
    let f = fixture();
    let f = f.to_str().unwrap();
    let o = revkit(&["train-intent", "--in", f, "--out", "m.json", "--max-epochs", "10"], d.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let o = revkit(&["classify", "--model", "m.json", "--in", f, "--out", "l.jsonl"], d.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(
        std::fs::read_to_string(d.path().join("l.jsonl")).unwrap(),
        std::fs::read_to_string(f).unwrap(),
        "every fixture action is already labeled"
    );
    std::fs::write(d.path().join("broken.json"), "{}").unwrap();
    let o = revkit(&["classify", "--model", "broken.json", "--in", f, "--out", "l2.jsonl"], d.path());
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn agreement_and_language_model() {
    let d = tempfile::tempdir().unwrap();
    let f = fixture();
    let f = f.to_str().unwrap();
    let o = revkit(&["agreement", "--in", f, "--by", "domain", "--format", "json"], d.path());
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v.as_array().unwrap().len(), 3);
    assert!(v[1]["all"]["kappa"].as_f64().unwrap() > 0.4);
    let o = revkit(&["train-lm", "--in", f, "--order", "2", "--out", "m.lm"], d.path());
    assert_eq!(o.status.code(), Some(0));
    let o = revkit(&["train-lm", "--in", f, "--order", "9", "--out", "m9.lm"], d.path());
    assert_eq!(o.status.code(), Some(2));
}
