use std::path::Path;
use std::process::{Command, Output};

use twoinf_bench::ExperimentConfig;

fn twoinf(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_twoinf")).current_dir(dir).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

const SMALL_GAUSSIAN: &str = r#"
scenario = "gaussian"
modes = ["direct", "symmetrized"]
bounds = ["dk", "thm2", "thm4", "thm5"]
replicates = 3
master_seed = 5

[gaussian]
n = 60
m = 40
r = 2
"#;

#[test]
fn print_config_shows_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let out = twoinf(dir.path(), &["simulate", "--print-config"]);
    assert!(out.status.success());
    let cfg = ExperimentConfig::from_toml(&stdout(&out)).unwrap();
    assert_eq!(cfg, ExperimentConfig::default());

    std::fs::write(dir.path().join("c.toml"), SMALL_GAUSSIAN).unwrap();
    let out = twoinf(dir.path(), &["simulate", "--config", "c.toml", "--seed", "9", "--print-config"]);
    let cfg = ExperimentConfig::from_toml(&stdout(&out)).unwrap();
    assert_eq!((cfg.gaussian.n, cfg.master_seed, cfg.kmeans.restarts), (60, 9, 20));
}

#[test]
fn configuration_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        ("replicates = 0\n", "replicates"),
        ("bogus_key = 1\n", "bogus_key"),
        ("modes = [\"direct\"]\nbounds = [\"thm5\"]\n", "symmetrized"),
        ("[gaussian]\nn = 100000\n", "--no-limits"),
        ("scenario = \"matrix-files\"\n[files]\nxhat = \"missing.csv\"\nr = 2\n", "file not found"),
    ];
    for (text, needle) in cases {
        std::fs::write(dir.path().join("bad.toml"), text).unwrap();
        let out = twoinf(dir.path(), &["simulate", "--config", "bad.toml"]);
        assert_eq!(out.status.code(), Some(2), "{text}");
        assert!(stderr(&out).contains(needle), "{text}: {}", stderr(&out));
    }
    let out = twoinf(dir.path(), &["simulate", "--config", "nowhere.toml"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn several_problems_reported_together() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.toml"), "replicates = 0\n[kmeans]\nrestarts = 0\n").unwrap();
    let err = stderr(&twoinf(dir.path(), &["simulate", "--config", "bad.toml"]));
    assert!(err.contains("replicates") && err.contains("restarts"), "{err}");
}

#[test]
fn unreadable_matrix_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("xhat.csv"), "1,2\n3,oops\n").unwrap();
    std::fs::write(dir.path().join("c.toml"), "scenario = \"matrix-files\"\n[files]\nxhat = \"xhat.csv\"\nr = 1\n").unwrap();
    let out = twoinf(dir.path(), &["cluster", "--config", "c.toml"]);
    assert_eq!(out.status.code(), Some(3), "{}", stderr(&out));
}

#[test]
fn simulate_writes_rows_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("c.toml"), SMALL_GAUSSIAN).unwrap();
    let out = twoinf(dir.path(), &["simulate", "--config", "c.toml", "--out", "rows.csv", "--threads", "2"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let rows = std::fs::read_to_string(dir.path().join("rows.csv")).unwrap();
    let mut reader = csv::Reader::from_reader(rows.as_bytes());
    let header = reader.headers().unwrap().clone();
    assert_eq!(&header[0], "replicate");
    assert!(header.iter().any(|h| h == "bound.thm2.value"));
    assert!(header.iter().any(|h| h == "bound.thm4.term.v_two_inf"));
    let records: Vec<_> = reader.records().map(|r| r.unwrap()).collect();
    assert_eq!(records.len(), 6);
    let status = header.iter().position(|h| h == "status").unwrap();
    assert!(records.iter().all(|r| &r[status] == "ok"));

    let summary = std::fs::read_to_string(dir.path().join("rows.summary.csv")).unwrap();
    assert_eq!(summary, stdout(&out));
    assert!(summary.lines().count() > 1);

    // no --out: rows go to stdout and match the file
    let again = twoinf(dir.path(), &["simulate", "--config", "c.toml", "--out", "again.csv"]);
    assert!(again.status.success());
    assert_eq!(std::fs::read_to_string(dir.path().join("again.csv")).unwrap(), rows);
    let piped = twoinf(dir.path(), &["simulate", "--config", "c.toml"]);
    assert_eq!(stdout(&piped), rows);
}

#[test]
fn cluster_dump_then_bounds_from_files() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("c.toml"), SMALL_GAUSSIAN).unwrap();
    let out = twoinf(dir.path(), &["cluster", "--config", "c.toml", "--dump", "inst"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("direct") && text.contains("misclustered"), "{text}");

    let inst = dir.path().join("inst");
    let meta: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(inst.join("meta.json")).unwrap()).unwrap();
    assert_eq!(meta["representation"], "rect");
    assert_eq!(meta["rank"], 2);
    assert_eq!(meta["config_sha256"].as_str().unwrap().len(), 64);
    for f in meta["files"].as_array().unwrap() {
        assert!(inst.join(f.as_str().unwrap()).is_file(), "{f}");
    }
    let labels = std::fs::read_to_string(inst.join("labels.txt")).unwrap();
    assert!(labels.lines().all(|l| l == "1" || l == "2"));
    assert_eq!(labels.lines().count(), 60);

    let files = r#"
scenario = "matrix-files"
bounds = ["dk", "thm2", "thm4", "thm6"]

[files]
xhat = "inst/xhat.csv"
x = "inst/x.csv"
labels = "inst/labels.txt"
r = 2

[knobs]
eps1 = 0.05
t_eps1 = 0.05
"#;
    std::fs::write(dir.path().join("f.toml"), files).unwrap();
    let out = twoinf(dir.path(), &["bounds", "--config", "f.toml"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let reports: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let reports = reports.as_array().unwrap();
    let bound_of = |v: &serde_json::Value| v["report"]["bound"].as_str().map(str::to_string);
    for id in ["dk", "thm2", "thm4", "thm6"] {
        assert!(reports.iter().any(|r| bound_of(r).as_deref() == Some(id)), "{id} missing");
    }
    let thm4 = reports.iter().find(|r| bound_of(r).as_deref() == Some("thm4")).unwrap();
    assert_eq!(thm4["mode"], "direct");

    // constant-free bounds without knobs is a configuration error
    std::fs::write(dir.path().join("g.toml"), files.split("[knobs]").next().unwrap()).unwrap();
    let out = twoinf(dir.path(), &["bounds", "--config", "g.toml"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("[knobs]"));
}

#[test]
fn calibrate_and_sweep_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let calib = r#"
scenario = "gaussian"
modes = ["direct"]
bounds = ["thm4"]

[gaussian]
n = 40
m = 30
r = 2

[calibration]
calib_seeds = [0, 50]
valid_seeds = [50, 70]
"#;
    std::fs::write(dir.path().join("c.toml"), calib).unwrap();
    let out = twoinf(dir.path(), &["calibrate", "--config", "c.toml"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    let line = text.lines().nth(1).unwrap();
    assert!(line.starts_with("thm4,direct,ok,50,"), "{line}");

    std::fs::write(dir.path().join("bad.toml"), calib.replace("[50, 70]", "[40, 70]")).unwrap();
    let out = twoinf(dir.path(), &["calibrate", "--config", "bad.toml"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("overlap"));

    let sweep = r#"
scenario = "gaussian"
modes = ["direct", "symmetrized-hollow"]
replicates = 4

[gaussian]
m = 40
r = 2

[sweep]
gamma = [1.0]
nu = [-0.5, 0.5]
"#;
    std::fs::write(dir.path().join("s.toml"), sweep).unwrap();
    let out = twoinf(dir.path(), &["sweep", "--config", "s.toml", "--out", "grid.csv"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let grid = std::fs::read_to_string(dir.path().join("grid.csv")).unwrap();
    let mut lines = grid.lines();
    assert!(lines.next().unwrap().starts_with("gamma,nu,mode,"));
    assert_eq!(lines.count(), 4);
    assert!(stderr(&out).contains("trend check"));
}
