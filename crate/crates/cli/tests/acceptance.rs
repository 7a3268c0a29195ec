//! CLI-level acceptance: scenario guards and exit codes, byte-identical
//! reruns, and the gallery surface.

use std::path::Path;
use std::process::{Command, Output};

fn vortexlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vortexlab"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_scenario(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

fn stdout(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

#[test]
fn antipodal_fixture_is_an_equilibrium() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = write_scenario(
        dir.path(),
        "antipodal.toml",
        r#"
schema = 1
geometry = "sphere"
n = 2
seed = 1
strengths = [1.0, 1.0]
positions = [[0.0, 0.0, 1.0], [0.0, 0.0, -1.0]]

[integrator]
t_final = 10.0
record_stride = 100
"#,
    );
    let out = vortexlab(&["run", &scenario, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    assert!(
        stdout(&out).contains("verdict=equilibrium"),
        "{}",
        stdout(&out)
    );
}

#[test]
fn dipole_fixture_is_a_relative_equilibrium() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = write_scenario(
        dir.path(),
        "dipole.toml",
        r#"
schema = 1
geometry = "plane"
n = 2
seed = 1
strengths = [1.0, -1.0]
positions = [[0.0, 0.0], [1.0, 0.0]]

[integrator]
dt = 1e-3
t_final = 5.0
record_stride = 100
"#,
    );
    let out = vortexlab(&["run", &scenario, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    assert!(
        stdout(&out).contains("verdict=relative_equilibrium"),
        "{}",
        stdout(&out)
    );
    for suffix in ["_trajectory.csv", "_conserved.csv", "_classification.json"] {
        assert!(dir.path().join(format!("dipole{suffix}")).exists());
    }
}

#[test]
fn collision_fixture_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = write_scenario(
        dir.path(),
        "collide.toml",
        r#"
schema = 1
geometry = "plane"
n = 2
seed = 1
strengths = [1.0, 1.0]
positions = [[0.0, 0.0], [1.0e-9, 0.0]]
"#,
    );
    let out = vortexlab(&["run", &scenario, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3), "{out:?}");
}

#[test]
fn infeasible_constraints_exit_4() {
    let dir = tempfile::tempdir().unwrap();
    // Criterion fixtures: plane N=2 with both constraints, and sphere N=2
    // zero momentum without the explicit antipodal pair.
    let plane = write_scenario(
        dir.path(),
        "plane2.toml",
        "schema = 1\ngeometry = \"plane\"\nn = 2\nseed = 3\n\
         constraints = [\"zero_momentum\", \"zero_circulation\"]\n",
    );
    let out = vortexlab(&["run", &plane, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(4), "{out:?}");

    let sphere = write_scenario(
        dir.path(),
        "sphere2.toml",
        "schema = 1\ngeometry = \"sphere\"\nn = 2\nseed = 3\n\
         constraints = [\"zero_momentum\"]\n",
    );
    let out = vortexlab(&["run", &sphere, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(4), "{out:?}");
}

#[test]
fn config_errors_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let bad_method = write_scenario(
        dir.path(),
        "bad_method.toml",
        "schema = 1\ngeometry = \"sphere\"\nn = 3\nseed = 1\n\
         [integrator]\nmethod = \"implicit_midpoint\"\n",
    );
    let out = vortexlab(&["run", &bad_method, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1), "{out:?}");

    let unknown_key = write_scenario(
        dir.path(),
        "unknown.toml",
        "schema = 1\ngeometry = \"sphere\"\nn = 3\nseed = 1\nwhat = true\n",
    );
    let out = vortexlab(&["run", &unknown_key, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1), "{out:?}");
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = write_scenario(
        dir.path(),
        "torus.toml",
        r#"
schema = 1
name = "torus-run"
geometry = "torus"
n = 3
seed = 42
constraints = ["zero_circulation"]

[integrator]
t_final = 3.0
record_stride = 10
"#,
    );
    let out_a = dir.path().join("a");
    let out_b = dir.path().join("b");
    for out_dir in [&out_a, &out_b] {
        let out = vortexlab(&["run", &scenario, "--out", out_dir.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0), "{out:?}");
    }
    for file in [
        "torus-run_trajectory.csv",
        "torus-run_conserved.csv",
        "torus-run_classification.json",
    ] {
        let a = std::fs::read(out_a.join(file)).unwrap();
        let b = std::fs::read(out_b.join(file)).unwrap();
        assert_eq!(a, b, "{file} differs between identical runs");
    }
}

#[test]
fn gallery_produces_one_figure_per_panel() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_vortexlab"))
        .env("VORTEXLAB_THREADS", "2")
        .args([
            "gallery",
            "--out",
            dir.path().to_str().unwrap(),
            "--seed",
            "5",
            "--t-final",
            "5",
        ])
        .output()
        .expect("binary runs");
    assert_eq!(out.status.code(), Some(0), "{out:?}\n{}", stdout(&out));

    let svgs: Vec<String> = std::fs::read_dir(dir.path())
        .unwrap()
        .filter_map(|e| e.ok())
        .map(|e| e.file_name().to_string_lossy().into_owned())
        .filter(|n| n.ends_with(".svg"))
        .collect();
    assert_eq!(svgs.len(), 16, "{svgs:?}");
    assert_eq!(svgs.iter().filter(|n| n.starts_with("sphere_")).count(), 4);
    assert_eq!(
        svgs.iter().filter(|n| n.starts_with("hyperbolic_")).count(),
        4
    );

    // Every figure is a standalone SVG document with its metadata block.
    for name in &svgs {
        let body = std::fs::read_to_string(dir.path().join(name)).unwrap();
        assert!(body.starts_with("<svg"), "{name}");
        assert!(body.contains("<desc>"), "{name}");
        assert!(body.contains("t_final=5"), "{name}: horizon not recorded");
        assert!(body.trim_end().ends_with("</svg>"), "{name}");
    }
}

#[test]
fn order_verb_reports_second_order() {
    let out = vortexlab(&[
        "order",
        "--method",
        "implicit-midpoint",
        "--geometry",
        "plane",
        "--seed",
        "11",
    ]);
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    let text = stdout(&out);
    let order: f64 = text
        .split("observed order ")
        .nth(1)
        .and_then(|rest| rest.split_whitespace().next())
        .and_then(|tok| tok.parse().ok())
        .unwrap_or_else(|| panic!("no order in: {text}"));
    assert!((order - 2.0).abs() <= 0.1, "{text}");

    let mismatched = vortexlab(&[
        "order",
        "--method",
        "implicit-midpoint",
        "--geometry",
        "sphere",
    ]);
    assert_eq!(mismatched.status.code(), Some(1));
}

#[test]
fn check_verb_passes() {
    let out = vortexlab(&["check"]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    assert!(stdout(&out).contains("0 failed"));
}
