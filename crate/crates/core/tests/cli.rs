use std::path::Path;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_cylpatch");

fn cylpatch(args: &[&str]) -> Output {
    Command::new(BIN)
        .args(args)
        .env_remove("CYLPATCH_OUT")
        .output()
        .expect("spawn cylpatch")
}

fn text(out: &Output) -> String {
    format!(
        "{}{}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    )
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

#[test]
fn unknown_flag_is_a_usage_error() {
    let out = cylpatch(&["stability", "--bogus"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(
        text(&out).to_lowercase().contains("usage"),
        "{}",
        text(&out)
    );
}

#[test]
fn malformed_config_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "kind = \"stability\"\n[run]\nnot_a_field = 3\n").unwrap();
    let out = cylpatch(&[
        "stability",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.path().join("o").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2), "{}", text(&out));

    let out = cylpatch(&[
        "stability",
        "--dt",
        "-1",
        "--out",
        dir.path().join("o").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2), "{}", text(&out));
}

#[test]
fn output_directory_comes_from_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(BIN)
        .args(["rearrange-test", "--cases", "5"])
        .env("CYLPATCH_OUT", dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", text(&out));
    assert!(dir.path().join("report.json").is_file());
    assert!(dir.path().join("config.echo").is_file());
}

#[test]
fn kernel_table_writes_csv_and_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = cylpatch(&["kernel-table", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", text(&out));
    assert!(read(&dir.path().join("kernel_table.csv")).starts_with("dx1,dx2,gamma_s,ks1,ks2\n"));
    let report: serde_json::Value =
        serde_json::from_str(&read(&dir.path().join("report.json"))).unwrap();
    assert_eq!(report["pass"], serde_json::Value::Bool(true));
}

#[test]
fn steady_check_passes_with_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let out = cylpatch(&["steady-check", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", text(&out));
    let series = read(&dir.path().join("series.csv"));
    assert!(series.starts_with("t,mass,impulse,k,perimeter,j1dist,wsymdiff,maxspeed\n"));
    assert!(series.lines().count() > 2);
    // the echoed configuration reproduces the run
    let echo = dir.path().join("config.echo");
    let again = dir.path().join("again");
    let out = cylpatch(&[
        "steady-check",
        "--config",
        echo.to_str().unwrap(),
        "--out",
        again.to_str().unwrap(),
        "--T",
        "0.5",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", text(&out));
    assert!(series.starts_with(&read(&again.join("series.csv"))));
}

fn copy_dir(from: &Path, to: &Path) {
    std::fs::create_dir_all(to).unwrap();
    for entry in std::fs::read_dir(from).unwrap() {
        let entry = entry.unwrap();
        let target = to.join(entry.file_name());
        if entry.file_type().unwrap().is_dir() {
            copy_dir(&entry.path(), &target);
        } else {
            std::fs::copy(entry.path(), target).unwrap();
        }
    }
}

#[test]
fn resumed_run_matches_uninterrupted_run() {
    let dir = tempfile::tempdir().unwrap();
    let full = dir.path().join("full");
    let out = cylpatch(&[
        "stability",
        "--h",
        "0.2",
        "--T",
        "1",
        "--nodes0",
        "128",
        "--output-every",
        "5",
        "--out",
        full.to_str().unwrap(),
    ]);
    assert!(matches!(out.status.code(), Some(0 | 1)), "{}", text(&out));

    // simulate an interruption after step 10
    let cut = dir.path().join("cut");
    copy_dir(&full, &cut);
    std::fs::remove_file(cut.join("report.json")).unwrap();
    for entry in std::fs::read_dir(cut.join("checkpoints")).unwrap() {
        let path = entry.unwrap().path();
        let stem = path.file_stem().unwrap().to_str().unwrap().to_owned();
        let step: u64 = stem.trim_start_matches("step_").parse().unwrap();
        if step > 10 {
            std::fs::remove_file(path).unwrap();
        }
    }
    let resumed = cylpatch(&["resume", "--out", cut.to_str().unwrap()]);
    assert_eq!(
        resumed.status.code(),
        out.status.code(),
        "{}",
        text(&resumed)
    );
    for name in ["series.csv", "tracks.csv"] {
        assert_eq!(
            read(&full.join(name)),
            read(&cut.join(name)),
            "{name} differs"
        );
    }
}

#[test]
fn resume_without_checkpoint_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = cylpatch(&["resume", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2), "{}", text(&out));
}
