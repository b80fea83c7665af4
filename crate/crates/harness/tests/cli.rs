use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("scenarios")
        .join(name)
}

fn qrelent(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qrelent"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn run_with(sub: &str, path: &Path, out: &Path, extra: &[&str]) -> Output {
    let mut args = vec![
        sub,
        "--scenario",
        path.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ];
    args.extend_from_slice(extra);
    qrelent(&args)
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

fn records(path: &Path) -> Vec<csv::StringRecord> {
    csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_path(path)
        .unwrap()
        .records()
        .map(Result::unwrap)
        .collect()
}

#[test]
fn entropy_growth_scenario_passes_with_nonnegative_margins() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run_with("verify", &scenario("entropy-growth.toml"), tmp.path(), &[]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let path = tmp.path().join("entropy-growth-d2-n3.csv");
    let text = fs::read_to_string(&path).unwrap();
    assert!(text.starts_with(
        "# schema=qrelent/1 scenario=entropy-growth-d2-n3 kind=verify-theorem3 seed=0\n"
    ));
    let rows = records(&path);
    assert!(rows.len() > 50);
    for r in &rows {
        assert!(r[5].parse::<f64>().unwrap() >= 0.0);
        assert_eq!(&r[7], "true");
    }
}

#[test]
fn enumerate_matches_known_counts() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run_with("enumerate", &scenario("enumerate.toml"), tmp.path(), &[]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let rows = records(&tmp.path().join("enumerate-m3-n5.csv"));
    let find = |m: &str, n: &str| {
        rows.iter()
            .find(|r| &r[1] == m && &r[2] == n)
            .unwrap()
            .clone()
    };
    for n in 1..=5 {
        assert_eq!(&find("1", &n.to_string())[3], "0");
        assert_eq!(
            find("2", &n.to_string())[3].parse::<usize>().unwrap(),
            2 * n * (n - 1)
        );
    }
    let r = find("2", "3");
    assert_eq!((&r[3], &r[4], &r[5]), ("12", "21", "1152"));
    let r = find("3", "2");
    assert_eq!((&r[4], &r[6]), ("64", "large"));
    assert!(rows.iter().any(|r| &r[1] == "4" && &r[2] == "4"));
}

#[test]
fn oversized_step_is_a_numerical_error() {
    let tmp = tempfile::tempdir().unwrap();
    let text = fs::read_to_string(scenario("simulate-random.toml"))
        .unwrap()
        .replace("horizon = 0.5", "horizon = 4.0")
        .replace("dt = 1e-3", "dt = 1.0");
    let p = write(tmp.path(), "big.toml", &text);
    let o = run_with("simulate", &p, tmp.path(), &[]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    let csv = fs::read_to_string(tmp.path().join("simulate-random.csv")).unwrap();
    assert!(csv.contains("stage,error"));
    assert!(csv.contains("positivity"));
}

#[test]
fn schema_errors_exit_64() {
    let tmp = tempfile::tempdir().unwrap();
    let base = fs::read_to_string(scenario("simulate-random.toml")).unwrap();

    let typo = write(
        tmp.path(),
        "typo.toml",
        &base.replace("jump = ", "potental = 1.0\njump = "),
    );
    let o = run_with("simulate", &typo, tmp.path(), &[]);
    assert_eq!(o.status.code(), Some(64));
    assert!(stderr(&o).contains("potental"), "{}", stderr(&o));

    let unseeded = write(
        tmp.path(),
        "unseeded.toml",
        &base.replace("seed = 11\n", ""),
    );
    let o = run_with("simulate", &unseeded, tmp.path(), &[]);
    assert_eq!(o.status.code(), Some(64));
    assert!(stderr(&o).contains("seed"), "{}", stderr(&o));

    let o = run_with(
        "simulate",
        &scenario("simulate-random.toml"),
        tmp.path(),
        &["--cap", "4"],
    );
    assert_eq!(o.status.code(), Some(64));
    assert!(stderr(&o).contains("cap"));

    let o = run_with("verify", &scenario("simulate-random.toml"), tmp.path(), &[]);
    assert_eq!(o.status.code(), Some(64));

    assert!(!tmp.path().join("simulate-random.csv").exists());
}

#[test]
fn usage_errors_exit_64() {
    assert_eq!(qrelent(&[]).status.code(), Some(64));
    assert_eq!(qrelent(&["frobnicate"]).status.code(), Some(64));
    assert_eq!(qrelent(&["suite", "--only", "13"]).status.code(), Some(64));
    assert_eq!(qrelent(&["simulate", "--scenario"]).status.code(), Some(64));
    assert_eq!(qrelent(&["--help"]).status.code(), Some(0));
}

#[test]
fn missing_file_is_io_error() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run_with("simulate", &tmp.path().join("absent.toml"), tmp.path(), &[]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn seed_override_changes_output_and_reruns_are_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let path = scenario("simulate-random.toml");
    let read = |dir: &Path| fs::read(dir.join("simulate-random.csv")).unwrap();
    let (a, b, c) = (
        tmp.path().join("a"),
        tmp.path().join("b"),
        tmp.path().join("c"),
    );
    for d in [&a, &b, &c] {
        fs::create_dir(d).unwrap();
    }
    assert_eq!(run_with("simulate", &path, &a, &[]).status.code(), Some(0));
    assert_eq!(run_with("simulate", &path, &b, &[]).status.code(), Some(0));
    assert_eq!(
        run_with("simulate", &path, &c, &["--seed-override", "12"])
            .status
            .code(),
        Some(0)
    );
    assert_eq!(read(&a), read(&b));
    assert_ne!(read(&a), read(&c));
    assert!(String::from_utf8(read(&c))
        .unwrap()
        .starts_with("# schema=qrelent/1 scenario=simulate-random kind=simulate seed=12\n"));
}

#[test]
fn every_bundled_scenario_passes() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios");
    let mut count = 0;
    for entry in fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        let text = fs::read_to_string(&path).unwrap();
        let kind = text
            .lines()
            .find_map(|l| l.strip_prefix("kind = "))
            .unwrap()
            .trim_matches('"');
        let sub = match kind {
            "simulate" => "simulate",
            "enumerate" => "enumerate",
            "semiclassical-bounds" | "quantization-checks" => "semiclassical",
            _ => "verify",
        };
        let o = run_with(sub, &path, tmp.path(), &[]);
        assert_eq!(
            o.status.code(),
            Some(0),
            "{}: {}",
            path.display(),
            stderr(&o)
        );
        count += 1;
    }
    assert!(count >= 8);
}

#[test]
fn tightened_tolerances_fail_in_a_controlled_way() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().to_str().unwrap();
    let o = qrelent(&[
        "suite",
        "--only",
        "3,5,10",
        "--tolerance-override",
        "1e-16",
        "--out",
        out,
    ]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
    let rows = records(&tmp.path().join("summary.csv"));
    assert_eq!(rows.len(), 3);
    for r in &rows {
        assert_eq!(&r[5], "false", "criterion {} should fail", &r[0]);
        assert!(r[3].parse::<usize>().unwrap() > 0);
    }
}

#[test]
fn partial_selection_writes_only_selected_files() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().to_str().unwrap();
    let o = qrelent(&["suite", "--only", "2,9", "--out", out]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let mut names: Vec<String> = fs::read_dir(tmp.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    names.sort();
    assert_eq!(
        names,
        ["criterion-02.csv", "criterion-09.csv", "summary.csv"]
    );
}
