use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::sync::atomic::{AtomicUsize, Ordering};

use sfc_coverage::EpisodeTrace;

const WALKTHROUGH: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/../../fixtures/walkthrough.scn");

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_sfc-coverage"));
    cmd.env_remove("SFC_COVERAGE_OUT");
    cmd
}

fn tempdir(tag: &str) -> PathBuf {
    static COUNTER: AtomicUsize = AtomicUsize::new(0);
    let dir = std::env::temp_dir().join(format!(
        "sfc-cli-{tag}-{}-{}",
        std::process::id(),
        COUNTER.fetch_add(1, Ordering::SeqCst)
    ));
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn run(cmd: &mut Command) -> (i32, String, String) {
    let out = cmd.output().unwrap();
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

fn plan(scenario: &Path, out: &Path) -> (i32, String, String) {
    run(bin().arg("plan").arg("--scenario").arg(scenario).arg("--out").arg(out))
}

#[test]
fn plan_writes_trace_and_report() {
    let dir = tempdir("plan");
    let out = dir.join("walk.trace.txt");
    let (code, stdout, stderr) = plan(Path::new(WALKTHROUGH), &out);
    assert_eq!(code, 0, "stderr: {stderr}");

    let trace = fs::read_to_string(&out).unwrap();
    assert!(trace.starts_with("sfc-trace v1\nmode,uniform\nk,3\nstart,0\n"));
    for line in [
        "total_moves,65",
        "unique_visited,60",
        "revisit_count,6",
        "detected_obstacles,4",
        "coverage_ratio,1",
        "lemma,pass",
    ] {
        assert!(trace.contains(line), "missing {line} in trace");
    }

    assert!(stdout.contains("grid: uniform k=3"));
    assert!(stdout.contains("total_moves: 65"));
    assert!(stdout.contains("lemma: pass"));

    let out2 = dir.join("walk2.trace.txt");
    let (code2, _, _) = plan(Path::new(WALKTHROUGH), &out2);
    assert_eq!(code2, 0);
    assert_eq!(fs::read(&out).unwrap(), fs::read(&out2).unwrap());
}

#[test]
fn plan_rejects_malformed_scenario() {
    let dir = tempdir("malformed");
    let scn = dir.join("bad.scn");
    fs::write(&scn, "sfc-scenario v2\nk 3\n").unwrap();
    let out = dir.join("bad.trace.txt");
    let (code, _, stderr) = plan(&scn, &out);
    assert_eq!(code, 2);
    assert!(stderr.contains("error:"));
    assert!(!out.exists());
}

#[test]
fn plan_rejects_blocked_start() {
    let dir = tempdir("blocked-start");
    let scn = dir.join("blocked.scn");
    fs::write(&scn, "sfc-scenario v1\nk 2\ncells 0,0\n").unwrap();
    let (code, _, stderr) = plan(&scn, &dir.join("blocked.trace.txt"));
    assert_eq!(code, 3, "stderr: {stderr}");
}

#[test]
fn plan_commands_check_the_grid_kind() {
    let dir = tempdir("grid-kind");
    let quad = dir.join("quad.scn");
    fs::write(&quad, "sfc-scenario v1\nquadrants 2 2 2 2\n").unwrap();
    let (code, _, stderr) = plan(&quad, &dir.join("quad.trace.txt"));
    assert_eq!(code, 3);
    assert!(stderr.contains("plan-nonuniform"));

    let (code, _, stderr) = run(bin()
        .arg("plan-nonuniform")
        .arg("--scenario")
        .arg(WALKTHROUGH)
        .arg("--out")
        .arg(dir.join("walk.trace.txt")));
    assert_eq!(code, 3);
    assert!(stderr.contains("uniform"));
}

#[test]
fn plan_nonuniform_runs_quadrant_scenarios() {
    let dir = tempdir("nonuniform");
    let scn = dir.join("quad.scn");
    fs::write(&scn, "sfc-scenario v1\nquadrants 2 3 2 2\nrect 9 9 11 11\n").unwrap();
    let out = dir.join("quad.trace.txt");
    let (code, stdout, stderr) = run(bin()
        .arg("plan-nonuniform")
        .arg("--scenario")
        .arg(&scn)
        .arg("--out")
        .arg(&out));
    assert_eq!(code, 0, "stderr: {stderr}");
    assert!(stdout.contains("grid: quadrants 2/3/2/2"));

    let trace = fs::read_to_string(&out).unwrap();
    assert!(trace.starts_with("sfc-trace v1\nmode,nonuniform\nquadrants,2,3,2,2\nstart,0\n"));
    assert!(trace.contains("step,kind,waypoint,x,y,quadrant"));
    for label in ["quadrant,BL,", "quadrant,TL,", "quadrant,TR,", "quadrant,BR,"] {
        assert!(trace.contains(label), "missing report for {label}");
    }
}

#[test]
fn generate_is_deterministic_and_validates_counts() {
    let dir = tempdir("generate");
    let a = dir.join("a.scn");
    let b = dir.join("b.scn");
    for path in [&a, &b] {
        let (code, _, stderr) = run(bin()
            .args(["generate", "--k", "3", "--blocked", "12", "--seed", "42", "--out"])
            .arg(path));
        assert_eq!(code, 0, "stderr: {stderr}");
    }
    let text = fs::read_to_string(&a).unwrap();
    assert_eq!(text, fs::read_to_string(&b).unwrap());
    assert!(text.starts_with("sfc-scenario v1\nk 3\n"));
    assert!(text.contains("cells "));

    let (code, _, _) = run(bin()
        .args(["generate", "--k", "3", "--blocked", "64", "--out"])
        .arg(dir.join("c.scn")));
    assert_eq!(code, 2);
    let (code, _, _) = run(bin()
        .args(["generate", "--k", "16", "--blocked", "1", "--out"])
        .arg(dir.join("d.scn")));
    assert_eq!(code, 2);
}

#[test]
fn generated_scenarios_plan_cleanly_and_traces_round_trip() {
    let dir = tempdir("round-trip");
    let scn = dir.join("gen.scn");
    let (code, _, _) = run(bin()
        .args(["generate", "--k", "4", "--blocked", "30", "--seed", "7", "--out"])
        .arg(&scn));
    assert_eq!(code, 0);

    let out = dir.join("gen.trace.txt");
    let (code, stdout, stderr) = plan(&scn, &out);
    assert_eq!(code, 0, "stderr: {stderr}");
    assert!(stdout.contains("lemma: pass"));

    let text = fs::read_to_string(&out).unwrap();
    let parsed = EpisodeTrace::parse(&text).unwrap();
    assert_eq!(parsed.to_text(), text);
}

#[test]
fn render_produces_svg() {
    let dir = tempdir("render");
    let trace = dir.join("walk.trace.txt");
    let (code, _, _) = plan(Path::new(WALKTHROUGH), &trace);
    assert_eq!(code, 0);

    let plain = dir.join("plain.svg");
    let (code, stdout, stderr) = run(bin().arg("render").arg(&trace).arg("--out").arg(&plain));
    assert_eq!(code, 0, "stderr: {stderr}");
    assert!(stdout.contains("svg:"));
    let svg = fs::read_to_string(&plain).unwrap();
    assert!(svg.starts_with("<svg"));
    assert!(svg.contains("class=\"walk\""));
    assert!(!svg.contains("class=\"label\""));
    assert!(!svg.contains("class=\"obstacle\""));

    let labeled = dir.join("labeled.svg");
    let (code, _, _) =
        run(bin().arg("render").arg(&trace).arg("--labels").arg("--out").arg(&labeled));
    assert_eq!(code, 0);
    assert!(fs::read_to_string(&labeled).unwrap().contains("class=\"label\""));

    let overlay = dir.join("overlay.svg");
    let (code, _, _) = run(bin()
        .arg("render")
        .arg(&trace)
        .arg("--scenario")
        .arg(WALKTHROUGH)
        .arg("--out")
        .arg(&overlay));
    assert_eq!(code, 0);
    assert!(fs::read_to_string(&overlay).unwrap().contains("class=\"obstacle\""));

    let again = dir.join("again.svg");
    let (code, _, _) = run(bin().arg("render").arg(&trace).arg("--out").arg(&again));
    assert_eq!(code, 0);
    assert_eq!(fs::read(&plain).unwrap(), fs::read(&again).unwrap());
}

#[test]
fn render_rejects_malformed_traces() {
    let dir = tempdir("render-bad");
    let trace = dir.join("junk.trace.txt");
    fs::write(&trace, "not a trace\n").unwrap();
    let (code, _, _) = run(bin().arg("render").arg(&trace).arg("--out").arg(dir.join("junk.svg")));
    assert_eq!(code, 2);
}

#[test]
fn verify_reports_a_batch() {
    let dir = tempdir("verify");
    fs::copy(WALKTHROUGH, dir.join("a-walkthrough.scn")).unwrap();
    let (code, _, _) = run(bin()
        .args(["generate", "--k", "3", "--blocked", "10", "--seed", "1", "--out"])
        .arg(dir.join("b-random.scn")));
    assert_eq!(code, 0);
    fs::write(dir.join("c-quad.scn"), "sfc-scenario v1\nquadrants 2 2 2 2\n").unwrap();
    fs::write(dir.join("notes.txt"), "ignored\n").unwrap();

    let (code, stdout, stderr) = run(bin().arg("verify").arg(&dir));
    assert_eq!(code, 0, "stderr: {stderr}");
    let lines: Vec<&str> = stdout.lines().collect();
    assert!(lines[0].starts_with("PASS a-walkthrough.scn moves=65 unique=60 revisits=6 ratio=1"));
    assert!(lines[1].starts_with("PASS b-random.scn "));
    assert!(lines[2].starts_with("PASS c-quad.scn "));
    assert!(stdout.contains("scenarios: 3 pass=3 fail=0 error=0"));
    assert!(stdout.contains("total_moves: p50="));
    assert!(stdout.contains("revisit_count: p50="));
    assert!(stdout.contains("coverage_ratio: p50="));

    let (code, parallel, _) = run(bin().arg("verify").arg(&dir).args(["--jobs", "3"]));
    assert_eq!(code, 0);
    assert_eq!(stdout, parallel);
}

#[test]
fn verify_reports_problems_and_keeps_going() {
    let dir = tempdir("verify-mixed");
    fs::copy(WALKTHROUGH, dir.join("a-good.scn")).unwrap();
    fs::write(dir.join("b-blocked.scn"), "sfc-scenario v1\nk 2\ncells 0,0\n").unwrap();
    fs::write(dir.join("c-bad.scn"), "k 3\n").unwrap();

    let (code, stdout, _) = run(bin().arg("verify").arg(&dir));
    assert_eq!(code, 3);
    assert!(stdout.contains("PASS a-good.scn"));
    assert!(stdout.contains("ERROR b-blocked.scn"));
    assert!(stdout.contains("ERROR c-bad.scn"));
    assert!(stdout.contains("scenarios: 3 pass=1 fail=0 error=2"));
}

#[test]
fn verify_requires_scenarios() {
    let dir = tempdir("verify-empty");
    let (code, _, stderr) = run(bin().arg("verify").arg(&dir));
    assert_eq!(code, 2);
    assert!(stderr.contains("no .scn scenarios"));
}

#[test]
fn out_dir_env_var_sets_the_default_location() {
    let work = tempdir("env-cwd");
    let sink = tempdir("env-sink");
    let (code, stdout, stderr) = run(bin()
        .arg("plan")
        .arg("--scenario")
        .arg(WALKTHROUGH)
        .current_dir(&work)
        .env("SFC_COVERAGE_OUT", &sink));
    assert_eq!(code, 0, "stderr: {stderr}");
    let expected = sink.join("walkthrough.trace.txt");
    assert!(expected.exists());
    assert!(stdout.contains("walkthrough.trace.txt"));
    assert!(!work.join("walkthrough.trace.txt").exists());

    let (code, _, _) = run(bin()
        .arg("plan")
        .arg("--scenario")
        .arg(WALKTHROUGH)
        .current_dir(&work));
    assert_eq!(code, 0);
    assert!(work.join("walkthrough.trace.txt").exists());
}
