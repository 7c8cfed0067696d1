use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

const BIN: &str = env!("CARGO_BIN_EXE_twovar");

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("spawn twovar")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

fn params_file(dir: &Path, name: &str, n: usize, b: f64, costs: &[f64]) -> PathBuf {
    let path = dir.join(name);
    let costs: Vec<String> = costs.iter().map(|c| format!("{c:?}")).collect();
    fs::write(&path, format!(r#"{{"n": {n}, "a": 2.0, "b": {b:?}, "costs": [{}]}}"#, costs.join(", "))).unwrap();
    path
}

fn standard(dir: &Path) -> PathBuf {
    params_file(dir, "standard.json", 4, 0.5, &[1.0, 1.0, 1.0, 1.2])
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn solve_prints_table_and_writes_csv() {
    let dir = TempDir::new().unwrap();
    let params = standard(dir.path());
    let csv = dir.path().join("out.csv");
    let out = run(&["solve", "--params", s(&params), "--pattern", "QQQP", "--csv", s(&csv)]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("0.346666667"), "{text}");
    assert!(text.contains("0.226666667"), "{text}");
    assert!(text.contains("1.25333333"), "{text}");

    let rows = fs::read_to_string(&csv).unwrap();
    let mut lines = rows.lines();
    assert_eq!(lines.next(), Some("pattern,player,variable,strategy,x,p,pi,phi"));
    let alien: Vec<&str> = lines.nth(3).unwrap().split(',').collect();
    assert_eq!(&alien[..3], &["QQQP", "3", "price"]);
    let x: f64 = alien[4].parse().unwrap();
    assert!((x - 17.0 / 75.0).abs() < 1e-12);
}

#[test]
fn solve_with_best_response_matches() {
    let dir = TempDir::new().unwrap();
    let params = standard(dir.path());
    let out = run(&["solve", "--params", s(&params), "--pattern", "PPPP", "--method", "br", "--damping", "0.5"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(stdout(&out).contains("best-response"));
    assert!(stdout(&out).contains("0.358974359"));
}

#[test]
fn invalid_substitutability_is_a_config_error() {
    let dir = TempDir::new().unwrap();
    let params = params_file(dir.path(), "b1.json", 4, 1.0, &[1.0, 1.0, 1.0, 1.2]);
    let out = run(&["solve", "--params", s(&params), "--pattern", "QQQP"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("b must lie in (0,1)"));
}

#[test]
fn short_pattern_is_a_config_error() {
    let dir = TempDir::new().unwrap();
    let out = run(&["solve", "--params", s(&standard(dir.path())), "--pattern", "QQQ"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("pattern length 3"));
}

#[test]
fn missing_params_file_is_an_io_error() {
    let dir = TempDir::new().unwrap();
    let out = run(&["solve", "--params", s(&dir.path().join("absent.json")), "--pattern", "QQQQ"]);
    assert_eq!(code(&out), 4);
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(code(&run(&["no-such-command"])), 2);
    assert_eq!(code(&run(&["solve"])), 2);
    assert_eq!(code(&run(&["--help"])), 0);
}

#[test]
fn compare_exit_codes() {
    let dir = TempDir::new().unwrap();
    let params = standard(dir.path());
    let eq = run(&["compare", "--params", s(&params), "--patterns", "QQQQ,QQQP"]);
    assert_eq!(code(&eq), 0, "{}", stdout(&eq));
    assert!(stdout(&eq).contains("equivalent"));

    let neq = run(&["compare", "--params", s(&params), "--patterns", "QQQQ", "PPPP"]);
    assert_eq!(code(&neq), 1);
    // x_A moves from 26/75 to 14/39
    assert!(stdout(&neq).contains("0.0123076923"), "{}", stdout(&neq));

    let two = params_file(dir.path(), "two.json", 4, 0.5, &[1.0, 1.0, 1.2, 1.2]);
    let out = run(&["compare", "--params", s(&two), "--patterns", "QQQQ,QQPP"]);
    assert_eq!(code(&out), 1);
    assert!(stdout(&out).contains("0.377777778"));

    let one = run(&["compare", "--params", s(&params), "--patterns", "QQQQ"]);
    assert_eq!(code(&one), 2);
}

#[test]
fn verify_minimax_standard_and_symmetric() {
    let dir = TempDir::new().unwrap();
    let out = run(&["verify-minimax", "--params", s(&standard(dir.path()))]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));
    assert!(stdout(&out).contains("all spreads within tolerance"));
    assert!(stdout(&out).contains("0.0183111111"));

    let sym = params_file(dir.path(), "sym.json", 4, 0.5, &[1.0; 4]);
    let csv = dir.path().join("mm.csv");
    let out = run(&["verify-minimax", "--params", s(&sym), "--samples", "0", "--csv", s(&csv)]);
    assert_eq!(code(&out), 0);
    let text = fs::read_to_string(&csv).unwrap();
    for line in text.lines().skip(1) {
        let fields: Vec<f64> = line.split(',').skip(2).take(4).map(|v| v.parse().unwrap()).collect();
        assert!(fields.iter().all(|v| v.abs() < 1e-12), "{line}");
    }
}

#[test]
fn verify_minimax_extreme_substitutability() {
    let dir = TempDir::new().unwrap();
    let params = params_file(dir.path(), "ext.json", 4, 0.95, &[1.0, 1.0, 1.0, 1.2]);
    let out = run(&["verify-minimax", "--params", s(&params)]);
    let c = code(&out);
    assert!(c == 0 || stdout(&out).contains("shape violation"), "{}", stdout(&out));
}

#[test]
fn closed_form_audit() {
    let dir = TempDir::new().unwrap();
    let out = run(&["closed-form", "--params", s(&standard(dir.path()))]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));
    let text = stdout(&out);
    assert_eq!(text.matches("erratum").count(), 3, "{text}");
    assert!(text.contains("0.120000000"));

    let n5 = params_file(dir.path(), "n5.json", 5, 0.5, &[1.0, 1.0, 1.0, 1.0, 1.2]);
    assert_eq!(code(&run(&["closed-form", "--params", s(&n5)])), 2);
    let odd = params_file(dir.path(), "odd.json", 4, 0.5, &[1.0, 1.1, 1.0, 1.2]);
    assert_eq!(code(&run(&["closed-form", "--params", s(&odd)])), 2);
}

fn column(csv: &str, name: &str) -> Vec<f64> {
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let idx = header.iter().position(|h| *h == name).unwrap_or_else(|| panic!("no column {name}"));
    lines.map(|l| l.split(',').nth(idx).unwrap().parse().unwrap()).collect()
}

#[test]
fn sweep_over_substitutability() {
    let dir = TempDir::new().unwrap();
    let out = run(&["sweep", "--params", s(&standard(dir.path())), "--sweep", "b:0.1:0.9:0.1"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let csv = stdout(&out);
    let b = column(&csv, "param");
    assert_eq!(b.len(), 9);
    assert!(b.windows(2).all(|w| w[0] < w[1]));
    assert!(column(&csv, "dev_QQQQ_PPPP").iter().all(|&d| d > 0.0));
    assert!(column(&csv, "dev_QQQQ_QQQP").iter().all(|&d| d < 1e-7));
}

#[test]
fn sweep_gap_vanishes_with_cost_difference() {
    let dir = TempDir::new().unwrap();
    let out = run(&["sweep", "--params", s(&standard(dir.path())), "--sweep", "cost_gap:-0.3:0.3:0.05"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let csv = stdout(&out);
    let gaps = column(&csv, "param");
    let devs = column(&csv, "dev_QQQQ_PPPP");
    for (g, d) in gaps.iter().zip(&devs) {
        if g.abs() < 1e-12 {
            assert!(*d < 1e-12, "gap {g}: {d}");
        } else {
            assert!(*d > 0.0);
        }
    }
    // shrinks monotonically towards zero gap
    let mid = gaps.iter().position(|g| g.abs() < 1e-12).unwrap();
    assert!(devs[..mid].windows(2).all(|w| w[0] > w[1]));
    assert!(devs[mid..].windows(2).all(|w| w[0] < w[1]));
}

#[test]
fn sweep_per_player_header() {
    let dir = TempDir::new().unwrap();
    let csv = dir.path().join("pp.csv");
    let out = run(&[
        "sweep", "--params", s(&standard(dir.path())), "--sweep", "a:1.5:2.5:0.5", "--patterns", "QQQQ,PPPP",
        "--per-player", "--csv", s(&csv),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().next(), Some("param,pattern,player,x,p,pi,phi"));
    assert_eq!(text.lines().count(), 1 + 3 * 2 * 4);
}

#[test]
fn sweep_rejects_bad_ranges_and_paths() {
    let dir = TempDir::new().unwrap();
    let params = standard(dir.path());
    for spec in ["b:0.1:0.9:0", "b:0.1:0.9:-0.1", "b:0.9:0.1:0.1", "z:0:1:0.1"] {
        assert_eq!(code(&run(&["sweep", "--params", s(&params), "--sweep", spec])), 2, "{spec}");
    }
    // beyond the admissible range of b
    assert_eq!(code(&run(&["sweep", "--params", s(&params), "--sweep", "b:0.5:1.2:0.1"])), 2);
    let unwritable = dir.path().join("missing").join("out.csv");
    let out = run(&["sweep", "--params", s(&params), "--sweep", "b:0.1:0.9:0.1", "--csv", s(&unwritable)]);
    assert_eq!(code(&out), 4);
    assert!(stderr(&out).contains("I/O error"));
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = TempDir::new().unwrap();
    let params = standard(dir.path());
    let runs: Vec<(Vec<u8>, Vec<u8>)> = (0..2)
        .map(|_| {
            let csv = dir.path().join("sweep.csv");
            let mut stdout = Vec::new();
            for args in [
                vec!["solve", "--params", s(&params), "--pattern", "QPQP"],
                vec!["compare", "--params", s(&params), "--patterns", "PPPP,PPPQ"],
                vec!["verify-minimax", "--params", s(&params), "--seed", "11"],
                vec!["closed-form", "--params", s(&params)],
                vec!["sweep", "--params", s(&params), "--sweep", "b:0.05:0.95:0.05", "--per-player", "--csv", s(&csv)],
            ] {
                stdout.extend(run(&args).stdout);
            }
            (stdout, fs::read(&csv).unwrap())
        })
        .collect();
    assert_eq!(runs[0].0, runs[1].0);
    assert_eq!(runs[0].1, runs[1].1);
}
