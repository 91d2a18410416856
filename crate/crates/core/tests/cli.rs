use std::fs;
use std::io::BufReader;
use std::path::Path;
use std::process::{Command, Output};

use hjb_c0ip::Mesh;

fn hjb(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hjb")).args(args).output().expect("binary runs")
}

fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    fs::read_to_string(path).unwrap().lines().map(|l| l.split(',').map(str::to_string).collect()).collect()
}

#[test]
fn exp1_uniform_table_has_one_row_per_level() {
    let dir = tempfile::tempdir().unwrap();
    let out = hjb(&["--problem", "exp1", "--s", "0.5", "--degree", "3", "--itermax", "4", "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = csv_rows(&dir.path().join("summary.csv"));
    assert_eq!(rows[0], ["ndofs", "err_h", "EOC_h", "err_H1", "EOC_H1", "err_L2", "EOC_L2", "eta", "EOC_eta", "effectivity"]);
    assert_eq!(rows.len(), 5);
    assert!(rows[1][2].is_empty());
    for row in &rows[2..] {
        let eoc: f64 = row[2].parse().unwrap();
        assert!(eoc.is_finite());
    }
    // 15 significant digits
    assert_eq!(rows[1][1].split('e').next().unwrap().len(), 16);
    assert_eq!(String::from_utf8(out.stdout).unwrap(), fs::read_to_string(dir.path().join("summary.csv")).unwrap());
    for file in ["trace.csv", "mesh_final.txt", "solution_final.txt", "indicators_final.csv"] {
        assert!(dir.path().join(file).exists(), "{file}");
    }
    let trace = fs::read_to_string(dir.path().join("trace.csv")).unwrap();
    assert!(trace.starts_with("k,r,nonlinear_residual\n1,"));
}

#[test]
fn adaptive_refinement_concentrates_at_the_origin() {
    let dir = tempfile::tempdir().unwrap();
    let out = hjb(&[
        "--problem", "exp1", "--s", "0.01", "--n", "4", "--degree", "4", "--refine", "adaptive", "--itermax", "8", "--max-dofs",
        "20000", "--out", dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let mesh = Mesh::read_from(BufReader::new(fs::File::open(dir.path().join("mesh_final.txt")).unwrap())).unwrap();
    let min_area = (0..mesh.num_triangles()).map(|t| mesh.area(t)).fold(f64::INFINITY, f64::min);
    let smallest: Vec<usize> = (0..mesh.num_triangles()).filter(|&t| mesh.area(t) == min_area).collect();
    assert!(smallest.iter().any(|&t| mesh.corners(t).iter().any(|c| c[0] == 0.0 && c[1] == 0.0)));
    // the initial 4 x 4 grid has triangles of area 1/32
    assert!(min_area <= 1.0 / 32.0 / 64.0);
}

#[test]
fn sequential_runs_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [&a, &b] {
        let out = hjb(&[
            "--problem", "exp2", "--n", "4", "--refine", "adaptive", "--itermax", "4", "--sequential", "--out",
            dir.path().to_str().unwrap(),
        ]);
        assert!(out.status.success());
    }
    for file in ["summary.csv", "trace.csv", "mesh_final.txt", "solution_final.txt", "indicators_final.csv"] {
        assert_eq!(fs::read(a.path().join(file)).unwrap(), fs::read(b.path().join(file)).unwrap(), "{file}");
    }
}

#[test]
fn exp2_reports_incremental_norms() {
    let dir = tempfile::tempdir().unwrap();
    let out = hjb(&["--problem", "exp2", "--n", "2", "--itermax", "3", "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success());
    let rows = csv_rows(&dir.path().join("summary.csv"));
    assert!(rows[1][1].is_empty());
    for row in &rows[2..] {
        for col in [1, 3, 5] {
            assert!(row[col].parse::<f64>().unwrap() >= 0.0);
        }
    }
    let ind = fs::read_to_string(dir.path().join("indicators_final.csv")).unwrap();
    for line in ind.lines().skip(1) {
        assert_eq!(line.rsplit(',').next().unwrap().parse::<f64>().unwrap(), 0.0);
    }
}

const CUSTOM: &str = r#"
[problem]
kind = "custom"

[domain]
vertices = [[0, 0], [2, 0], [2, 1], [0, 1]]
refinements = 1

[[controls]]
a11 = "2 + x"
a12 = "0.1"
a22 = "1"
f = "2*(2 + x) + 0.2 - 4"

[[controls]]
a11 = "1"
a22 = "1"
f = "2 - 4 + 10"

[boundary]
g = "x^2 + x*y - 2*y^2"

[exact]
u = "x^2 + x*y - 2*y^2"
ux = "2*x + y"
uy = "x - 4*y"
uxx = "2"
uxy = "1"
uyy = "-4"

[scheme]
degree = 3

[refinement]
itermax = 2
tol = 0.0
"#;

#[test]
fn config_file_overrides_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("problem.toml");
    fs::write(&cfg, CUSTOM).unwrap();
    let out = hjb(&["--config", cfg.to_str().unwrap(), "--degree", "2", "--itermax", "7", "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = csv_rows(&dir.path().join("summary.csv"));
    assert_eq!(rows.len(), 3);
    for row in &rows[1..] {
        assert!(row[1].parse::<f64>().unwrap() < 1e-8, "{row:?}");
    }
    let solution = fs::read_to_string(dir.path().join("solution_final.txt")).unwrap();
    assert!(solution.lines().next().unwrap().ends_with(" 3"));
}

#[test]
fn monge_ampere_output_is_the_convex_solution() {
    let dir = tempfile::tempdir().unwrap();
    let out = hjb(&["--problem", "exp3", "--grid", "8x8", "--itermax", "2", "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let values: Vec<f64> = fs::read_to_string(dir.path().join("solution_final.txt")).unwrap().lines().skip(1).map(|l| l.trim().parse().unwrap()).collect();
    assert!(values.iter().all(|&v| v <= 1e-8));
    assert!(values.iter().any(|&v| v < -1e-3));
}

#[test]
fn errors_give_nonzero_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    fs::write(&bad, "[problem]\nkind = \"custom\"\n[[controls]]\na11 = \"x +\"\na22 = \"1\"\nf = \"0\"\n").unwrap();
    let out = hjb(&["--config", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("error"));

    let out = hjb(&["--grid", "16"]);
    assert!(!out.status.success());

    let out = hjb(&["--problem", "exp1", "--s", "1.5"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("s must lie in (0, 1)"));

    let out = hjb(&["--problem", "exp3", "--xi", "0.3", "--itermax", "1"]);
    assert_eq!(out.status.code(), Some(1));

    let unconverged = dir.path().join("unconverged.toml");
    fs::write(&unconverged, "[scheme]\nitermax = 1\n").unwrap();
    let out = hjb(&["--problem", "exp3", "--a", "0.4", "--itermax", "1", "--config", unconverged.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}
