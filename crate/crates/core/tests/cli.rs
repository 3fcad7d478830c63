use std::path::{Path, PathBuf};
use std::process::Command;

use isoembed::cli::{RunReport, SectionBody};

const SPHERE: &str = r#"
seed = 3
[family]
kind = "round-sphere"
dim = 3
radius = 1.0
[grid]
resolution = 7
"#;

const ELLIPSOID: &str = r#"
seed = 5
[family]
kind = "ellipsoid"
axes = [1.0, 1.3, 0.8, 1.1]
[grid]
resolution = 7
random_samples = 16
"#;

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn run(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_isoembed")).args(args).output().unwrap();
    (
        out.status.code().unwrap(),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

fn report(path: &Path) -> RunReport {
    RunReport::from_json(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn sphere_verify_passes_every_check() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "s.toml", SPHERE);
    let out = dir.path().join("r.json");
    let (code, stdout, _) = run(&["verify", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code, 0, "{stdout}");
    let r = report(&out);
    assert!(r.pass);
    let names: Vec<&str> = r.sections.iter().map(|s| s.name.as_str()).collect();
    assert_eq!(
        names,
        [
            "weyl",
            "diameter",
            "guanli",
            "c2bound",
            "second-deriv",
            "gauss-residual",
            "codazzi-residual",
            "support-identities"
        ]
    );
    assert!(stdout.contains("overall: PASS"));
}

#[test]
fn bad_resolution_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "s.toml", SPHERE);
    let (code, _, stderr) = run(&["verify", "--config", cfg.to_str().unwrap(), "--resolution", "4"]);
    assert_eq!(code, 2);
    assert!(stderr.contains("resolution"));
    let bad = write_config(dir.path(), "b.toml", &SPHERE.replace("radius = 1.0", "radius = 1.0\nshape = 2"));
    assert_eq!(run(&["verify", "--config", bad.to_str().unwrap()]).0, 2);
    assert_eq!(run(&["verify", "--config", dir.path().join("missing.toml").to_str().unwrap()]).0, 2);
    assert_eq!(run(&["verify", "--config", cfg.to_str().unwrap(), "--checks", "weyl,bogus"]).0, 2);
}

#[test]
fn single_check_gives_single_section() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "e.toml", ELLIPSOID);
    let out = dir.path().join("r.json");
    let (code, _, _) = run(&[
        "verify",
        "--config",
        cfg.to_str().unwrap(),
        "--checks",
        "weyl",
        "--quiet",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let r = report(&out);
    assert_eq!(r.sections.len(), 1);
    assert!(matches!(r.sections[0].body, SectionBody::Bound(ref b) if b.name == "weyl" && b.pass));
}

#[test]
fn failing_check_exits_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let text = format!("{ELLIPSOID}[tolerances]\nresidual = 1e-300\n");
    let cfg = write_config(dir.path(), "e.toml", &text);
    let (code, stdout, _) = run(&["verify", "--config", cfg.to_str().unwrap(), "--checks", "gauss-residual"]);
    assert_eq!(code, 1);
    assert!(stdout.contains("[FAIL] gauss-residual"));
}

#[test]
fn non_convex_family_is_a_domain_error() {
    let dir = tempfile::tempdir().unwrap();
    let text = r#"
[family]
kind = "radial-graph"
dim = 3
profile = { type = "quadratic", c0 = 1.0, b = [0.0, 0.0, 0.0, 0.0], m = [[-1.5, 0.0, 0.0, 0.0], [0.0, 0.0, 0.0, 0.0], [0.0, 0.0, 0.0, 0.0], [0.0, 0.0, 0.0, 0.0]] }
[grid]
resolution = 7
"#;
    let cfg = write_config(dir.path(), "n.toml", text);
    let (code, _, stderr) = run(&["verify", "--config", cfg.to_str().unwrap(), "--checks", "c2bound"]);
    assert_eq!(code, 3, "{stderr}");
}

#[test]
fn reports_round_trip_and_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "e.toml", ELLIPSOID);
    let out = dir.path().join("r.json");
    let mut reports = Vec::new();
    for _ in 0..2 {
        let (code, _, _) = run(&["verify", "--config", cfg.to_str().unwrap(), "--quiet", "--out", out.to_str().unwrap()]);
        assert_eq!(code, 0);
        reports.push(report(&out));
    }
    let (ra, rb) = (&reports[0], &reports[1]);
    assert_eq!(ra.without_timing().to_json().unwrap(), rb.without_timing().to_json().unwrap());
    let again = RunReport::from_json(&ra.to_json().unwrap()).unwrap();
    assert_eq!(&again, ra);
    assert_eq!(ra.schema, isoembed::cli::SCHEMA);
    assert_eq!(ra.version, env!("CARGO_PKG_VERSION"));
}

#[test]
fn grid_table_has_fixed_columns() {
    let dir = tempfile::tempdir().unwrap();
    let table = dir.path().join("grid.tsv");
    let text = format!("{SPHERE}[output]\ngrid_table = \"{}\"\n", table.display());
    let cfg = write_config(dir.path(), "s.toml", &text);
    assert_eq!(run(&["verify", "--config", cfg.to_str().unwrap(), "--quiet", "--checks", "weyl"]).0, 0);
    let contents = std::fs::read_to_string(&table).unwrap();
    let mut lines = contents.lines();
    assert_eq!(
        lines.next().unwrap(),
        "chart\tx1\tx2\tx3\tH\tR\tlaplacian_R\tchi_norm\tgauss_residual\tcodazzi_residual\tsupport_residual"
    );
    let first: Vec<&str> = lines.next().unwrap().split('\t').collect();
    assert_eq!(first.len(), 11);
    assert_eq!(first[0], "north");
    let h: f64 = first[4].parse().unwrap();
    assert!((h - 3.0).abs() < 1e-12);
}

#[test]
fn solve_detects_perturbed_ricci() {
    let dir = tempfile::tempdir().unwrap();
    let plain = write_config(dir.path(), "e.toml", ELLIPSOID);
    let out = dir.path().join("r.json");
    assert_eq!(
        run(&["solve", "--config", plain.to_str().unwrap(), "--quiet", "--out", out.to_str().unwrap()]).0,
        0
    );
    let r = report(&out);
    let SectionBody::Embeddability(v) = &r.sections[1].body else { panic!() };
    assert!(v.embeddable);

    let text = format!("{ELLIPSOID}[solve]\nperturbation = {{ amplitude = 0.05, diagonal = [1.0, 0.0, 0.0] }}\n");
    let bent = write_config(dir.path(), "p.toml", &text);
    assert_eq!(
        run(&["solve", "--config", bent.to_str().unwrap(), "--quiet", "--out", out.to_str().unwrap()]).0,
        0
    );
    let r = report(&out);
    let SectionBody::Embeddability(v) = &r.sections[1].body else { panic!() };
    assert!(!v.embeddable && v.max_residual >= 10.0 * v.threshold);

    // Declaring the perturbed field embeddable makes the run fail.
    let wrong = write_config(dir.path(), "w.toml", &text.replace("[solve]\n", "[solve]\nexpect = \"embeddable\"\n"));
    assert_eq!(run(&["solve", "--config", wrong.to_str().unwrap(), "--quiet"]).0, 1);
}

#[test]
fn reconstruct_and_family_commands() {
    let dir = tempfile::tempdir().unwrap();
    let text = format!("{ELLIPSOID}[reconstruct]\ncenter = [0.1, 0.2, -0.1]\nhalf_width = 0.1\nstep = 0.02\n");
    let cfg = write_config(dir.path(), "e.toml", &text);
    let out = dir.path().join("r.json");
    assert_eq!(
        run(&["reconstruct", "--config", cfg.to_str().unwrap(), "--quiet", "--out", out.to_str().unwrap()]).0,
        0
    );
    let SectionBody::Reconstruction(s) = &report(&out).sections[0].body else { panic!() };
    assert!(s.rms <= 1e-4 && s.convergence_ratio.unwrap() >= 12.0);

    let radial = r#"
[family]
kind = "radial-graph"
dim = 3
profile = { type = "quadratic", c0 = 1.0, b = [0.1, 0.0, 0.0, 0.0], m = [[0.2, 0.0, 0.0, 0.0], [0.0, 0.0, 0.0, 0.0], [0.0, 0.0, 0.0, 0.0], [0.0, 0.0, 0.0, 0.0]] }
[grid]
resolution = 5
"#;
    let cfg = write_config(dir.path(), "f.toml", radial);
    assert_eq!(
        run(&["family", "--config", cfg.to_str().unwrap(), "--quiet", "--out", out.to_str().unwrap()]).0,
        0
    );
    let SectionBody::EpsilonFamily(t) = &report(&out).sections[0].body else { panic!() };
    assert_eq!(t.rows.len(), 3);
    assert!(t.monotone);
}
