use std::collections::BTreeSet;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use flbench::RunRecord;
use tempfile::TempDir;

fn flbench(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_flbench")).args(args).output().expect("binary runs")
}

fn ok(out: Output) -> Output {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    out
}

fn write_config(dir: &Path, body: &str) -> String {
    let p = dir.join("exp.cfg");
    fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_string()
}

fn records(dir: &Path) -> Vec<RunRecord> {
    fs::read_to_string(dir.join("results.jsonl"))
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect()
}

fn sorted_lines(path: &Path) -> Vec<String> {
    let mut v: Vec<String> = fs::read_to_string(path).unwrap().lines().map(String::from).collect();
    v.sort();
    v
}

fn snapshot(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files = vec![];
    for sub in [dir.to_path_buf(), dir.join("instances")] {
        for e in fs::read_dir(&sub).unwrap() {
            let p = e.unwrap().path();
            if p.is_file() {
                files.push((p.strip_prefix(dir).unwrap().display().to_string(), fs::read(&p).unwrap()));
            }
        }
    }
    files.sort();
    files
}

const TOY: &str = "sizes = 2\nalphas = 0.25\nranges = 2\ninstances_per_class = 2\nmaster_seed = 11\n\
                   solver = sas sweeps=32,128\n";

#[test]
fn generate_is_deterministic_and_complete() {
    let (a, b) = (TempDir::new().unwrap(), TempDir::new().unwrap());
    let args = ["--set", "sizes=4", "--set", "alphas=0.25", "--set", "ranges=2", "--set", "instances=100", "--seed", "5"];
    for d in [&a, &b] {
        let mut v = vec!["--out", d.path().to_str().unwrap()];
        v.extend(args);
        v.push("generate");
        ok(flbench(&v));
    }
    let snap = snapshot(a.path());
    assert_eq!(snap.iter().filter(|(n, _)| n.ends_with(".flq")).count(), 100);
    let manifest = fs::read_to_string(a.path().join("manifest.csv")).unwrap();
    assert_eq!(manifest.lines().count(), 101);
    assert_eq!(snap, snapshot(b.path()));

    // rerunning in place leaves everything untouched
    let mut v = vec!["--out", a.path().to_str().unwrap()];
    v.extend(args);
    v.push("generate");
    let out = ok(flbench(&v));
    assert!(String::from_utf8_lossy(&out.stderr).contains("100 unchanged"));
    assert_eq!(snap, snapshot(a.path()));
}

#[test]
fn single_class_single_instance_writes_one_file() {
    let d = TempDir::new().unwrap();
    ok(flbench(&["--out", d.path().to_str().unwrap(), "--set", "sizes=3", "--set", "alphas=0.3", "--set", "ranges=inf", "generate"]));
    assert_eq!(fs::read_dir(d.path().join("instances")).unwrap().count(), 1);
}

#[test]
fn different_seed_into_same_directory_is_refused() {
    let d = TempDir::new().unwrap();
    let out = d.path().to_str().unwrap();
    let base = ["--out", out, "--set", "sizes=2", "--set", "alphas=0.25", "--set", "ranges=2"];
    ok(flbench(&[&base[..], &["--seed", "1", "generate"]].concat()));
    let again = flbench(&[&base[..], &["--seed", "2", "generate"]].concat());
    assert_eq!(again.status.code(), Some(4));
}

#[test]
fn unwritable_output_is_an_io_error() {
    let d = TempDir::new().unwrap();
    let blocker = d.path().join("file");
    fs::write(&blocker, "x").unwrap();
    let out = flbench(&["--out", blocker.join("sub").to_str().unwrap(), "--set", "sizes=2", "--set", "alphas=0.25", "--set", "ranges=2", "generate"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(!blocker.join("sub").exists());
}

#[test]
fn bad_config_is_exit_code_two() {
    let d = TempDir::new().unwrap();
    let cfg = write_config(d.path(), "sizes = 2\nbogus = 1\n");
    let out = flbench(&["--config", &cfg, "generate"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));
    // empty lists
    let out = flbench(&["--out", d.path().to_str().unwrap(), "generate"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn brute_force_recovers_manifest_planted_energy() {
    let d = TempDir::new().unwrap();
    let out = d.path().to_str().unwrap();
    // C_1 has 8 qubits; the cell-rejection policy cannot place loops there
    ok(flbench(&["--out", out, "--set", "sizes=1", "--set", "alphas=0.25,0.5", "--set", "ranges=2", "--set", "instances=3", "--set", "policy=hen", "generate"]));
    let manifest = fs::read_to_string(d.path().join("manifest.csv")).unwrap();
    let mut checked = 0;
    for row in manifest.lines().skip(1) {
        let f: Vec<&str> = row.split(',').collect();
        if f[10] != "ok" {
            continue;
        }
        let file = d.path().join("instances").join(format!("{}.flq", f[0]));
        let res = ok(flbench(&["solve", "--solver", "brute", file.to_str().unwrap()])).stdout;
        let rec: RunRecord = serde_json::from_slice(&res).unwrap();
        assert_eq!(rec.instance_id, f[0]);
        assert_eq!(rec.best_energy, f[9].parse::<i64>().unwrap());
        assert!(rec.success);
        checked += 1;
    }
    assert!(checked >= 3);
}

#[test]
fn solve_streams_one_record_per_run() {
    let d = TempDir::new().unwrap();
    let out = d.path().to_str().unwrap();
    ok(flbench(&["--out", out, "--set", "sizes=2", "--set", "alphas=0.25", "--set", "ranges=2", "generate"]));
    let file = fs::read_dir(d.path().join("instances")).unwrap().next().unwrap().unwrap().path();
    let f = file.to_str().unwrap();

    let res = ok(flbench(&["solve", "--solver", "sas", "--sweeps", "1,64", "--runs", "3", f])).stdout;
    let recs: Vec<RunRecord> = String::from_utf8(res).unwrap().lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(recs.len(), 6);
    assert_eq!(recs.iter().map(|r| r.sweeps).collect::<BTreeSet<_>>(), BTreeSet::from([Some(1), Some(64)]));

    let res = ok(flbench(&["solve", "--solver", "saa", "--beta-final", "5", "--repetitions", "1000", "--sweeps", "200", f])).stdout;
    let rec: RunRecord = serde_json::from_slice(&res).unwrap();
    assert_eq!(rec.restarts, 1000);
    assert!(rec.successes <= 1000);

    let res = ok(flbench(&["solve", "--solver", "hfs", "--stall-rounds", "5", f])).stdout;
    let rec: RunRecord = serde_json::from_slice(&res).unwrap();
    assert_eq!(rec.params, "stall_rounds=5");

    // same invocation, same bytes
    let again = ok(flbench(&["solve", "--solver", "hfs", "--stall-rounds", "5", f])).stdout;
    assert_eq!(res, again);
}

#[test]
fn solve_rejects_unknown_solver_and_bad_files() {
    let d = TempDir::new().unwrap();
    let bad = d.path().join("bad.flq");
    fs::write(&bad, "not an instance\n").unwrap();
    let out = flbench(&["solve", "--solver", "tabu", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("tabu"));
    let out = flbench(&["solve", "--solver", "sas", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(4));
    let out = flbench(&["solve", "--solver", "sas", d.path().join("missing.flq").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn toy_sweep_has_four_sas_groups() {
    let d = TempDir::new().unwrap();
    let cfg = write_config(d.path(), TOY);
    ok(flbench(&["--config", &cfg, "--out", d.path().to_str().unwrap(), "sweep"]));
    let recs = records(d.path());
    let groups: BTreeSet<(String, String)> = recs.iter().map(|r| (r.instance_id.clone(), r.params.clone())).collect();
    assert_eq!(groups.len(), 4);
    assert_eq!(recs.len(), 4);
}

#[test]
fn duplicate_solver_entries_are_merged_with_a_warning() {
    let d = TempDir::new().unwrap();
    let cfg = write_config(d.path(), &format!("{TOY}solver = sas sweeps=128 max_restarts=1\n"));
    let out = ok(flbench(&["--config", &cfg, "--out", d.path().to_str().unwrap(), "sweep"])).stderr;
    assert!(String::from_utf8_lossy(&out).contains("duplicate solver entry"));
    assert_eq!(records(d.path()).len(), 4);
}

#[test]
fn interrupted_sweep_resumes_to_the_same_results() {
    let body = "sizes = 2\nalphas = 0.2,0.3\nranges = 2\ninstances_per_class = 3\nmaster_seed = 3\nruns = 2\n\
                solver = sas sweeps=16,64\nsolver = hfs\nworkers = 2\n";
    let full = TempDir::new().unwrap();
    let cfg = write_config(full.path(), body);
    ok(flbench(&["--config", &cfg, "--out", full.path().to_str().unwrap(), "sweep"]));

    let part = TempDir::new().unwrap();
    let p = part.path().to_str().unwrap();
    ok(flbench(&["--config", &cfg, "--out", p, "sweep", "--limit", "4"]));
    assert_eq!(records(part.path()).len(), 8);
    // a writer killed mid-line leaves a torn record behind
    let log = part.path().join("results.jsonl");
    let mut text = fs::read_to_string(&log).unwrap();
    text.push_str("{\"solver\":\"sas\",\"inst");
    fs::write(&log, text).unwrap();
    ok(flbench(&["--config", &cfg, "--out", p, "sweep", "--limit", "5"]));
    let out = ok(flbench(&["--config", &cfg, "--out", p, "sweep"])).stderr;
    assert!(String::from_utf8_lossy(&out).contains("0 failed"));

    assert_eq!(sorted_lines(&log), sorted_lines(&full.path().join("results.jsonl")));
    assert_eq!(records(part.path()).len(), 2 * 3 * 3 * 2);

    // nothing left to do
    let out = ok(flbench(&["--config", &cfg, "--out", p, "sweep"])).stderr;
    assert!(String::from_utf8_lossy(&out).contains(" 0 run"));
}

#[test]
fn analyze_tables_are_deterministic_and_sorted() {
    let d = TempDir::new().unwrap();
    let body = "sizes = 2,3,4\nalphas = 0.25\nranges = 2\ninstances_per_class = 4\nmaster_seed = 21\nruns = 2\n\
                solver = sas sweeps=32,128\nsolver = hfs\nbootstrap_seed = 4\nresamples = 200\n";
    let cfg = write_config(d.path(), body);
    let out = d.path().to_str().unwrap();
    ok(flbench(&["--config", &cfg, "--out", out, "sweep"]));
    let summary = ok(flbench(&["--config", &cfg, "--out", out, "analyze"])).stdout;
    let tables = ["tts_median.csv", "ratio.csv", "scaling.csv", "scatter.csv", "provenance.csv"];
    let first: Vec<Vec<u8>> = tables.iter().map(|t| fs::read(d.path().join(t)).unwrap()).collect();
    ok(flbench(&["--config", &cfg, "--out", out, "analyze"]));
    let second: Vec<Vec<u8>> = tables.iter().map(|t| fs::read(d.path().join(t)).unwrap()).collect();
    assert_eq!(first, second);

    let tts = String::from_utf8(first[0].clone()).unwrap();
    assert_eq!(tts.lines().next().unwrap(), "solver,L,alpha,R,median_us,boot_std,unsolved_frac");
    assert_eq!(tts.lines().count(), 1 + 2 * 3);
    let scaling = String::from_utf8(first[2].clone()).unwrap();
    assert_eq!(scaling.lines().next().unwrap(), "solver,alpha,b,b_1sigma,b_2sigma");
    let solvers: BTreeSet<&str> = scaling.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(solvers, BTreeSet::from(["hfs/R2", "sas/R2"]));
    assert!(String::from_utf8(summary).unwrap().contains("hardest alpha"));
    let scatter = String::from_utf8(first[3].clone()).unwrap();
    assert_eq!(scatter.lines().count(), 1 + 12);
}

#[test]
fn identical_runs_under_two_names_have_unit_ratio() {
    let d = TempDir::new().unwrap();
    let body = "sizes = 2,3\nalphas = 0.25\nranges = 2\ninstances_per_class = 5\nmaster_seed = 8\nruns = 3\n\
                solver = sas sweeps=8,32\n";
    let cfg = write_config(d.path(), body);
    let out = d.path().to_str().unwrap();
    ok(flbench(&["--config", &cfg, "--out", out, "sweep"]));
    let log = d.path().join("results.jsonl");
    let mut text = fs::read_to_string(&log).unwrap();
    for mut r in records(d.path()) {
        r.solver = "sas@copy".into();
        text.push_str(&serde_json::to_string(&r).unwrap());
        text.push('\n');
    }
    fs::write(&log, text).unwrap();
    ok(flbench(&["--config", &cfg, "--out", out, "analyze"]));
    let ratio = fs::read_to_string(d.path().join("ratio.csv")).unwrap();
    let rows: Vec<&str> = ratio.lines().skip(1).collect();
    assert_eq!(rows.len(), 2);
    for row in rows {
        let f: Vec<&str> = row.split(',').collect();
        assert_eq!((f[0], f[1]), ("sas", "sas@copy"));
        assert_eq!(f[5], "1", "{row}");
        assert_eq!(f[6], "0", "{row}");
    }
}

#[test]
fn analyze_reports_misaligned_instance_ids() {
    let d = TempDir::new().unwrap();
    let cfg = write_config(d.path(), TOY);
    let out = d.path().to_str().unwrap();
    ok(flbench(&["--config", &cfg, "--out", out, "sweep"]));
    let log = d.path().join("results.jsonl");
    let mut rec = records(d.path()).remove(0);
    rec.instance_id = "L9_a0.1_R2_0042".into();
    let mut text = fs::read_to_string(&log).unwrap();
    text.push_str(&serde_json::to_string(&rec).unwrap());
    text.push('\n');
    fs::write(&log, text).unwrap();
    let res = flbench(&["--config", &cfg, "--out", out, "analyze"]);
    assert_eq!(res.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&res.stderr).contains("L9_a0.1_R2_0042"));
}

#[test]
fn analyze_without_results_fails() {
    let d = TempDir::new().unwrap();
    let out = d.path().to_str().unwrap();
    ok(flbench(&["--out", out, "--set", "sizes=2", "--set", "alphas=0.25", "--set", "ranges=2", "generate"]));
    assert_eq!(flbench(&["--out", out, "analyze"]).status.code(), Some(4));
}
