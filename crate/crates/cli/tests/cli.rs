use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use ifs_jacobi::io::{load_atoms, load_jacobi};
use ifs_jacobi::{Jacobi, JacobiMatrix};
use tempfile::TempDir;

fn ifsjac(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ifsjac"))
        .args(args)
        .current_dir(dir)
        .env_remove("IFSJAC_CONFIG")
        .output()
        .expect("spawn ifsjac")
}

fn ok(args: &[&str], dir: &Path) -> Output {
    let out = ifsjac(args, dir);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    out
}

fn fixtures(size: usize) -> TempDir {
    let dir = TempDir::new().unwrap();
    ok(&["fixtures", "--out-dir", ".", "--size", &size.to_string()], dir.path());
    dir
}

fn legendre_b(j: usize) -> f64 {
    let j = j as f64;
    j / (4.0 * j * j - 1.0).sqrt()
}

#[test]
fn closure_two_atoms_gives_legendre() {
    let dir = fixtures(8);
    ok(&["closure", "--sigma", "two-atom.atoms", "--delta", "0.5", "--size", "64", "-o", "out.jac"], dir.path());
    let j: Jacobi = load_jacobi(dir.path().join("out.jac")).unwrap();
    assert_eq!(j.size(), 64);
    for k in 0..64 {
        assert!(j.a(k).abs() <= 1e-13);
    }
    for k in 1..64 {
        assert!((j.b(k) - legendre_b(k)).abs() <= 1e-13, "b_{k}");
    }
}

#[test]
fn single_atom_closure_is_degenerate() {
    let dir = TempDir::new().unwrap();
    fs::write(dir.path().join("single-atom.atoms"), "atoms v1 1\n0.25 1\n").unwrap();
    let out = ifsjac(&["closure", "--sigma", "single-atom.atoms", "--delta", "0.3", "--size", "4"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("DegenerateStep"), "{err}");
    assert!(err.contains("n=0"), "{err}");
    assert!(out.stdout.is_empty());
}

#[test]
fn usage_errors_exit_two() {
    let dir = TempDir::new().unwrap();
    for args in [&["closure", "--delta", "0.5"][..], &["nonsense"], &["analyze", "--jacobi", "x", "--sigma", "y"]] {
        let out = ifsjac(args, dir.path());
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"), "{args:?}");
    }
}

#[test]
fn bad_config_exits_two() {
    let dir = fixtures(8);
    fs::write(dir.path().join("bad.toml"), "[fixpoint]\nunknown_key = 1\n").unwrap();
    let out = ifsjac(&["--config", "bad.toml", "gauss", "--jacobi", "lebesgue.jac", "--size", "2"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn parse_errors_name_file_and_line() {
    let dir = TempDir::new().unwrap();
    fs::write(dir.path().join("bad.jac"), "jacobi v1 3\n0 0 0\n1 0 0.5\n").unwrap();
    let out = ifsjac(&["gauss", "--jacobi", "bad.jac", "--size", "2"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("bad.jac") && err.contains("ParseError"), "{err}");
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    let dir = fixtures(300);
    let runs: Vec<(Vec<&str>, &str)> = vec![
        (vec!["closure", "--sigma", "bernoulli-pisot.atoms", "--delta", "0.7548776662467", "--size", "200"], ""),
        (vec!["frontier", "--mu", "fibonacci.jac", "--sizes", "20,60,100"], ""),
        (vec!["analyze", "--jacobi", "lebesgue.jac", "--plot-dir", "plots"], "plots/partial_sums.dat"),
        (
            vec![
                "convolve",
                "--sigma",
                "two-atom.atoms",
                "--eta",
                "lebesgue.jac",
                "--delta",
                "0.3",
                "--size",
                "30",
                "--method",
                "spectral",
            ],
            "",
        ),
    ];
    for (args, extra) in runs {
        let first = ok(&args, dir.path());
        let first_extra = (!extra.is_empty()).then(|| fs::read(dir.path().join(extra)).unwrap());
        let second = ok(&args, dir.path());
        assert_eq!(first.stdout, second.stdout, "{args:?}");
        assert!(!first.stdout.is_empty());
        if let Some(bytes) = first_extra {
            assert_eq!(bytes, fs::read(dir.path().join(extra)).unwrap());
        }
    }
}

#[test]
fn fixtures_index_lists_every_fixture() {
    let dir = fixtures(16);
    let index: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("index.json")).unwrap()).unwrap();
    let names: Vec<&str> = index.as_array().unwrap().iter().map(|e| e["name"].as_str().unwrap()).collect();
    assert_eq!(
        names,
        ["lebesgue", "two-atom", "bernoulli-sqrt2", "bernoulli-3q4", "bernoulli-pisot", "refinable-1", "fibonacci"]
    );
    for e in index.as_array().unwrap() {
        assert!(dir.path().join(e["file"].as_str().unwrap()).exists());
    }
    let refinable = load_atoms::<f64>(dir.path().join("refinable-1.atoms")).unwrap();
    assert_eq!(refinable.nodes(), [0.0, 1.0, 2.0, 3.0]);
}

#[test]
fn convolve_methods_agree() {
    let dir = fixtures(40);
    for method in ["direct", "spectral"] {
        let out = format!("{method}.jac");
        ok(
            &[
                "convolve",
                "--sigma",
                "lebesgue.jac",
                "--eta",
                "lebesgue.jac",
                "--delta",
                "0.25",
                "--size",
                "40",
                "--method",
                method,
                "-o",
                &out,
            ],
            dir.path(),
        );
    }
    let d: Jacobi = load_jacobi(dir.path().join("direct.jac")).unwrap();
    let s: Jacobi = load_jacobi(dir.path().join("spectral.jac")).unwrap();
    assert!(ifs_jacobi::frobenius_distance(&d, &s).unwrap() <= 1e-10);
}

#[test]
fn fixpoint_writes_distances_and_honours_config() {
    let dir = fixtures(8);
    ok(
        &[
            "fixpoint",
            "--sigma",
            "two-atom.atoms",
            "--delta",
            "0.3",
            "--size",
            "64",
            "--distances",
            "d.dat",
            "-o",
            "fp.jac",
        ],
        dir.path(),
    );
    let rows: Vec<(usize, f64)> = fs::read_to_string(dir.path().join("d.dat"))
        .unwrap()
        .lines()
        .map(|l| {
            let (m, d) = l.split_once(' ').unwrap();
            (m.parse().unwrap(), d.parse().unwrap())
        })
        .collect();
    assert_eq!(rows[0].0, 1);
    assert!(rows.last().unwrap().1 <= 1e-13 * 8.0);

    fs::write(dir.path().join("cfg.toml"), "[fixpoint]\nmax_iterations = 2\n").unwrap();
    let out = ifsjac(
        &["--config", "cfg.toml", "fixpoint", "--sigma", "two-atom.atoms", "--delta", "0.3", "--size", "64"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("NoConvergence"));

    let out = Command::new(env!("CARGO_BIN_EXE_ifsjac"))
        .args(["fixpoint", "--sigma", "two-atom.atoms", "--delta", "0.3", "--size", "64", "--max-iterations", "100"])
        .current_dir(dir.path())
        .env("IFSJAC_CONFIG", "cfg.toml")
        .output()
        .unwrap();
    assert!(out.status.success(), "flag must override config");
}

#[test]
fn analyze_report_and_series() {
    let dir = fixtures(8);
    ok(&["closure", "--sigma", "two-atom.atoms", "--delta", "0.5", "--size", "400", "-o", "leg.jac"], dir.path());
    let out = ok(
        &[
            "analyze",
            "--jacobi",
            "leg.jac",
            "--a-inf",
            "0",
            "--b-inf",
            "0.5",
            "--fit-window",
            "40:399",
            "--plot-dir",
            "plots",
        ],
        dir.path(),
    );
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["fit_window"], serde_json::json!([40, 399]));
    assert!((report["fit"]["exponent"].as_f64().unwrap() + 2.0).abs() < 0.05);
    assert!((report["capacity"].as_f64().unwrap() - 2f64.ln()).abs() < 5e-3);
    for name in ["a_deviations", "b_deviations", "deviations", "partial_sums", "capacity"] {
        let text = fs::read_to_string(dir.path().join("plots").join(format!("{name}.dat"))).unwrap();
        assert_eq!(text.lines().count(), 399, "{name}");
        assert!(text.starts_with("1 "));
    }

    ok(&["fixpoint", "--sigma", "two-atom.atoms", "--delta", "0.5", "--size", "400", "-o", "fp.jac"], dir.path());
    let out = ok(&["analyze", "--jacobi", "leg.jac", "--reference", "fp.jac", "--plot-dir", "cmp"], dir.path());
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(report["reference_max_b_difference"].as_f64().unwrap() <= 1e-10);
    let text = fs::read_to_string(dir.path().join("cmp").join("a_differences.dat")).unwrap();
    assert!(text.starts_with("0 ") && text.lines().count() == 400);

    let out = ok(&["analyze", "--jacobi", "leg.jac", "--sigma", "two-atom.atoms", "--delta", "0.5"], dir.path());
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let bounds = report["capacity_bounds"].as_array().unwrap();
    assert!((bounds[1].as_f64().unwrap() - bounds[0].as_f64().unwrap() - 2f64.ln()).abs() < 1e-12);
}

#[test]
fn gauss_rule_of_legendre() {
    let dir = fixtures(8);
    let out = ok(&["gauss", "--jacobi", "lebesgue.jac", "--size", "2"], dir.path());
    let text = String::from_utf8(out.stdout).unwrap();
    let rule = ifs_jacobi::io::parse_atoms::<f64>(&text).unwrap();
    let x = 1.0 / 3f64.sqrt();
    assert!((rule.nodes()[0] + x).abs() < 1e-15 && (rule.nodes()[1] - x).abs() < 1e-15);
    assert!(rule.weights().iter().all(|w| (w - 0.5).abs() < 1e-15));
}

#[test]
fn json_output_round_trips() {
    let dir = fixtures(8);
    let out =
        ok(&["closure", "--sigma", "two-atom.atoms", "--delta", "0.5", "--size", "10", "--format", "json"], dir.path());
    let j: Jacobi = ifs_jacobi::io::parse_jacobi_any(std::str::from_utf8(&out.stdout).unwrap()).unwrap();
    assert!((j.b(9) - legendre_b(9)).abs() < 1e-14);
}

#[test]
fn invert_then_close_recovers_target() {
    let dir = fixtures(200);
    ok(
        &[
            "invert",
            "--mu",
            "fibonacci.jac",
            "--delta",
            "1e-3",
            "--size",
            "80",
            "-o",
            "sigma.jac",
            "--roundtrip-errors",
            "rt.dat",
        ],
        dir.path(),
    );
    let sigma: Jacobi = load_jacobi(dir.path().join("sigma.jac")).unwrap();
    assert_eq!(sigma.size(), 80);
    let worst = fs::read_to_string(dir.path().join("rt.dat"))
        .unwrap()
        .lines()
        .map(|l| l.split_once(' ').unwrap().1.parse::<f64>().unwrap())
        .fold(0.0, f64::max);
    assert!(worst <= 1e-12, "{worst}");
}

#[test]
fn invert_fibonacci_at_3500() {
    let dir = fixtures(3500);
    let out = ok(
        &["invert", "--mu", "fibonacci.jac", "--delta", "1.119837e-6", "--size", "3500", "-o", "sigma.jac"],
        dir.path(),
    );
    assert!(String::from_utf8_lossy(&out.stderr).contains("feasible size: 3500 of 3500"));
    let sigma: JacobiMatrix<f64> = load_jacobi(dir.path().join("sigma.jac")).unwrap();
    assert_eq!(sigma.size(), 3500);
}
