use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn vcwidth(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vcwidth")).args(args).output().expect("binary runs")
}

fn data_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn bounds_prints_the_bracket() {
    let o = vcwidth(&["bounds", "--n", "14", "--r", "214"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).lines().any(|l| l == "lo=1 hi=31"));
}

#[test]
fn bounds_domain_error_exits_1() {
    let o = vcwidth(&["bounds", "--n", "8", "--r", "100"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("n > 8"));
}

#[test]
fn usage_errors_exit_1_and_name_the_flag() {
    let o = vcwidth(&["bounds", "--n", "14", "--rr", "214"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("--rr"));
    assert_eq!(vcwidth(&["--help"]).status.code(), Some(0));
    assert_eq!(vcwidth(&["table", "--r", "214", "--n-from", "9", "--n-to", "10", "--format", "xml"]).status.code(), Some(1));
}

#[test]
fn io_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let o = vcwidth(&["train", "--dataset", "glass", "--width", "1", "--data-dir", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let o = vcwidth(&["shatter", "--points-file", "/nonexistent/points.txt", "--width", "1", "--epsilon", "0.3"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn thyroid_table_matches_known_ranges() {
    let o = vcwidth(&["table", "--r", "7200", "--n-from", "22", "--n-to", "50"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 30);
    assert!(lines[1].starts_with("22,") && lines[1].ends_with(",1,373"));
    assert!(lines[29].starts_with("50,") && lines[29].ends_with(",1,53"));
}

#[test]
fn table_writes_to_a_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("t.md");
    let o = vcwidth(&["table", "--r", "178", "--n-from", "40", "--n-to", "43", "--format", "markdown", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let text = std::fs::read_to_string(out).unwrap();
    assert!(text.contains("| 42 |") && text.trim_end().ends_with("| 0 |"));
}

#[test]
fn train_save_and_load_roundtrip() {
    let dir = tempfile::tempdir().unwrap();
    let weights = dir.path().join("net.txt");
    let trace = dir.path().join("trace.csv");
    let d = data_dir();
    let o = vcwidth(&[
        "train", "--dataset", "glass", "--width", "2", "--epochs", "50", "--data-dir", d.to_str().unwrap(),
        "--save", weights.to_str().unwrap(), "--trace", trace.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(std::fs::read_to_string(&weights).unwrap().starts_with("# sigmoid-network n=9 m=2"));
    assert_eq!(std::fs::read_to_string(&trace).unwrap().lines().count(), 51);

    let o = vcwidth(&[
        "train", "--dataset", "glass", "--load", weights.to_str().unwrap(), "--epochs", "10", "--data-dir", d.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("width=2"));
    let o = vcwidth(&["train", "--dataset", "glass", "--data-dir", d.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn sweep_from_config_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("sweep.toml");
    std::fs::write(
        &config,
        format!(
            "[dataset]\nbuiltin = \"wine\"\ndata_dir = \"{}\"\n\n[train]\nmax_epochs = 150\nseed = 4\n\n[sweep]\nwidths = [1, 3]\nseeds_per_width = 2\n",
            data_dir().display()
        ),
    )
    .unwrap();
    let run = |name: &str, jobs: &str| {
        let out = dir.path().join(name);
        let o = vcwidth(&["sweep", "--config", config.to_str().unwrap(), "--jobs", jobs, "--out", out.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
        std::fs::read(out).unwrap()
    };
    let a = run("a.csv", "0");
    let b = run("b.csv", "1");
    assert_eq!(a, b);
    let text = String::from_utf8(a).unwrap();
    assert!(text.starts_with("# vcwidth sweep report v1\n# dataset=wine r=178 n=13 bracket=[1,21]"));
    assert_eq!(text.lines().count(), 3 + 4);
}

#[test]
fn sweep_auto_writes_plot_and_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let plot = dir.path().join("glass.svg");
    let out = dir.path().join("glass.csv");
    let d = data_dir();
    let o = vcwidth(&[
        "sweep", "--dataset", "glass", "--auto", "--extra-widths", "7", "--epochs", "40", "--data-dir", d.to_str().unwrap(),
        "--out", out.to_str().unwrap(), "--plot", plot.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).starts_with("best_width="));
    let svg = std::fs::read_to_string(&plot).unwrap();
    assert_eq!(svg.matches("<rect class=\"bar").count(), 10);
    let report = std::fs::read_to_string(&out).unwrap();
    assert_eq!(std::fs::read_to_string(dir.path().join("glass_values.csv")).unwrap(), report);
    let flags: Vec<&str> = report.lines().skip(3).map(|l| l.split(',').nth(2).unwrap()).collect();
    assert_eq!(flags, ["true", "true", "true", "true", "false"]);
}

#[test]
fn shatter_three_points() {
    let dir = tempfile::tempdir().unwrap();
    let pts = dir.path().join("pts.txt");
    std::fs::write(&pts, "0,0\n1,0\n0,1\n").unwrap();
    let o = vcwidth(&["shatter", "--points-file", pts.to_str().unwrap(), "--width", "2", "--epsilon", "0.3"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("identified=8/8"));
    let o = vcwidth(&["shatter", "--points-file", pts.to_str().unwrap(), "--width", "2", "--epsilon", "0.6"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn fetch_rejects_unknown_names() {
    let dir = tempfile::tempdir().unwrap();
    let o = vcwidth(&["fetch", "--name", "iris", "--data-dir", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
}
