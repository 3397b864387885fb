//! End-to-end checks of the command-line surface: formats, exit codes,
//! and SVG contents.

use std::process::Command;

use magdisk_cli::output::{parse_trajectory_file, CSV_HEADER};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_magdisk"))
}

fn run_capture(args: &[&str]) -> (i32, String, String) {
    let out = bin().args(args).output().expect("spawn magdisk");
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

#[test]
fn classify_prints_class_and_curvature() {
    let (code, stdout, _) = run_capture(&["classify", "--energy", "0.5"]);
    assert_eq!(code, 0);
    assert_eq!(stdout.trim(), "Horocycle, k_g = 1");

    let (code, stdout, _) = run_capture(&["classify", "--energy", "2"]);
    assert_eq!(code, 0);
    assert_eq!(stdout.trim(), "Hypercycle, k_g = 0.5");

    let (code, stdout, _) = run_capture(&["classify", "--energy", "0.125"]);
    assert_eq!(code, 0);
    assert_eq!(stdout.trim(), "HyperbolicCircle, k_g = 2");
}

#[test]
fn exit_codes_follow_the_contract() {
    // Usage errors → 2.
    let (code, _, stderr) = run_capture(&["classify", "--energy", "0"]);
    assert_eq!(code, 2, "stderr: {stderr}");
    let (code, _, _) = run_capture(&["simulate", "--energy", "0.125", "--total-time", "0"]);
    assert_eq!(code, 2);
    let (code, _, _) = run_capture(&["no-such-command"]);
    assert_eq!(code, 2);

    // Out-of-regime refusals → 3.
    let (code, _, stderr) = run_capture(&["conserve", "--energy", "0.75"]);
    assert_eq!(code, 3, "stderr: {stderr}");

    // Numeric failures → 4: a long supercritical cover run escapes the
    // boundary shell unless --quotient reduces it.
    let (code, _, stderr) = run_capture(&[
        "simulate",
        "--energy",
        "2",
        "--total-time",
        "50",
    ]);
    assert_eq!(code, 4, "stderr: {stderr}");
    assert!(stderr.contains("escaped"), "stderr: {stderr}");
}

#[test]
fn csv_and_json_carry_identical_data() {
    let args_common = [
        "simulate",
        "--energy",
        "0.125",
        "--z0",
        "0.1,0.2",
        "--direction",
        "0.5",
        "--total-time",
        "2",
    ];
    let (code, csv_text, _) = run_capture(&args_common);
    assert_eq!(code, 0);
    assert!(csv_text.starts_with(CSV_HEADER));
    let mut json_args = args_common.to_vec();
    json_args.extend_from_slice(&["--format", "json"]);
    let (code, json_text, _) = run_capture(&json_args);
    assert_eq!(code, 0);

    let from_csv = parse_trajectory_file(&csv_text).unwrap();
    let from_json = parse_trajectory_file(&json_text).unwrap();
    assert_eq!(from_json.schema_version, 1);
    assert_eq!(from_csv.samples.len(), from_json.samples.len());
    for (a, b) in from_csv.samples.iter().zip(from_json.samples.iter()) {
        assert_eq!(a.t, b.t);
        assert_eq!(a.re, b.re);
        assert_eq!(a.im, b.im);
        assert_eq!(a.p_x, b.p_x);
        assert_eq!(a.p_y, b.p_y);
        assert_eq!(a.energy, b.energy);
        assert_eq!(a.k_g, b.k_g);
    }
}

#[test]
fn simulate_curvature_column_is_constant() {
    let (code, csv_text, _) = run_capture(&[
        "simulate",
        "--energy",
        "0.125",
        "--total-time",
        "3",
    ]);
    assert_eq!(code, 0);
    let doc = parse_trajectory_file(&csv_text).unwrap();
    for record in &doc.samples {
        assert!(
            (record.k_g - 2.0).abs() < 1e-5,
            "k_g = {} at t = {}",
            record.k_g,
            record.t
        );
    }
}

#[test]
fn quotient_simulation_keeps_curvature_across_seams() {
    let (code, csv_text, _) = run_capture(&[
        "simulate",
        "--energy",
        "2",
        "--total-time",
        "3",
        "--quotient",
        "--dt",
        "2e-4",
    ]);
    assert_eq!(code, 0);
    let doc = parse_trajectory_file(&csv_text).unwrap();
    let expected = 0.5;
    // Positions jump at seams but the aligned curvature column must not.
    for record in &doc.samples {
        assert!(
            (record.k_g - expected).abs() < 1e-4,
            "k_g = {} at t = {}",
            record.k_g,
            record.t
        );
    }
    let seam_jumps = doc
        .samples
        .windows(2)
        .filter(|w| {
            let dx = w[1].re - w[0].re;
            let dy = w[1].im - w[0].im;
            (dx * dx + dy * dy).sqrt() > 0.1
        })
        .count();
    assert!(seam_jumps > 0, "expected at least one seam crossing");
}

#[test]
fn orbit_svg_contains_one_interior_circle() {
    let dir = std::env::temp_dir().join("magdisk-cli-io");
    std::fs::create_dir_all(&dir).unwrap();
    let traj = dir.join("orbit-io.csv");
    let svg_path = dir.join("orbit-io.svg");
    let status = bin()
        .args([
            "simulate",
            "--energy",
            "0.125",
            "--total-time",
            "8",
            "--out",
        ])
        .arg(&traj)
        .status()
        .unwrap();
    assert!(status.success());
    let status = bin()
        .args(["export-svg", "--input"])
        .arg(&traj)
        .arg("--out")
        .arg(&svg_path)
        .status()
        .unwrap();
    assert!(status.success());

    let svg = std::fs::read_to_string(&svg_path).unwrap();
    let mut interior_circles = 0;
    for line in svg.lines() {
        let Some(rest) = line.trim().strip_prefix("<circle ") else {
            continue;
        };
        let attr = |name: &str| -> f64 {
            let key = format!("{name}=\"");
            let start = rest.find(&key).unwrap() + key.len();
            let end = rest[start..].find('"').unwrap() + start;
            rest[start..end].parse().unwrap()
        };
        let (cx, cy, r) = (attr("cx"), attr("cy"), attr("r"));
        let dist_from_center = ((cx - 500.0).powi(2) + (cy - 500.0).powi(2)).sqrt();
        if dist_from_center + r < 500.0 * (1.0 - 1e-9) {
            interior_circles += 1;
        }
    }
    assert_eq!(
        interior_circles, 1,
        "expected exactly one circle strictly inside the unit circle"
    );
}

#[test]
fn tiling_svg_draws_the_neighbor_octagons() {
    let (code, svg, _) = run_capture(&["export-svg", "--tiling-depth", "1"]);
    assert_eq!(code, 0);
    let paths = svg.matches("<path").count();
    // Central octagon plus its eight side neighbors.
    assert_eq!(paths, 9, "tiling at depth 1 must show 9 octagons");
}

#[test]
fn coverage_output_is_monotone() {
    let (code, stdout, _) = run_capture(&[
        "coverage",
        "--energy",
        "0.5",
        "--total-time",
        "10",
        "--grid-n",
        "40",
    ]);
    assert_eq!(code, 0);
    let mut fractions = Vec::new();
    for line in stdout.lines().skip(1) {
        if let Some((_, frac)) = line.split_once(',') {
            fractions.push(frac.trim().parse::<f64>().unwrap());
        }
    }
    assert!(fractions.len() > 5);
    for pair in fractions.windows(2) {
        assert!(pair[1] >= pair[0], "fraction column must be non-decreasing");
    }
}

#[test]
fn conserve_dt_sweep_reports_fourth_order() {
    let (code, stdout, _) = run_capture(&[
        "conserve",
        "--energy",
        "0.125",
        "--total-time",
        "15",
        "--dt",
        "4e-3",
        "--dt-sweep",
    ]);
    assert_eq!(code, 0, "stdout: {stdout}");
    let mut orders = Vec::new();
    for line in stdout.lines() {
        if let Some(rest) = line.strip_prefix("observed order") {
            let value: f64 = rest.rsplit(':').next().unwrap().trim().parse().unwrap();
            orders.push(value);
        }
    }
    assert_eq!(orders.len(), 2, "stdout: {stdout}");
    for order in orders {
        assert!(
            (order - 4.0).abs() < 1.0,
            "drift order {order} (stdout: {stdout})"
        );
    }
}

#[test]
fn report_table_spans_the_regimes() {
    let (code, stdout, _) = run_capture(&[
        "report",
        "--energies",
        "0.125,0.5,2.0",
        "--lyapunov-time",
        "30",
        "--coverage-time",
        "30",
        "--grid-n",
        "40",
    ]);
    assert_eq!(code, 0, "stdout: {stdout}");
    assert!(stdout.contains("HyperbolicCircle"));
    assert!(stdout.contains("Horocycle"));
    assert!(stdout.contains("Hypercycle"));
    // Supercritical rows report no integral drift.
    let last = stdout.lines().last().unwrap();
    assert!(last.trim_end().ends_with('-'), "last row: {last}");
}
