use std::path::Path;
use std::process::{Command, Output};

use krein_cli::table::Cell;
use krein_cli::{round15, run, schema, Format, RunConfig, Table};
use serde_json::Value;
use tempfile::TempDir;

fn krein(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_krein"))
        .args(args)
        .current_dir(dir)
        .env_remove("KREIN_THREADS")
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, name: &str, body: &str) -> String {
    std::fs::write(dir.join(name), body).unwrap();
    name.to_string()
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|x| x.unwrap().iter().map(String::from).collect())
        .collect();
    (header, rows)
}

const COUNTERSTREAM: &str = r#"{
  "system": {"type": "multifluid", "coupling": "plasma_shielded",
             "species": [{"rho": 0.5, "u": 0.2, "c2": 0.0}, {"rho": 0.5, "u": -0.2, "c2": 0.0}]},
  "analysis": {"type": "modes", "k": 1.0},
  "output": {"path": "out"}
}"#;

const MAXWELLIAN: &str = r#"{
  "system": {"type": "distribution", "profile": {"kind": "maxwellian"}},
  "analysis": {"type": "penrose", "k": 1.0},
  "output": {"path": "out"}
}"#;

const FIVE_LAYER_SWEEP: &str = r#"{
  "system": {"type": "waterbag", "contours": [-1, 1, 5.75, 6.25], "levels": [0, 1, 0, 0.5, 0]},
  "analysis": {"type": "sweep", "k": 1.0, "control": {"kind": "shift", "contours": [2, 3]},
               "grid": {"start": 0, "stop": -4, "points": 41}},
  "output": {"path": "out"}
}"#;

#[test]
fn counterstream_modes_match_biquadratic() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "cs.json", COUNTERSTREAM);
    let out = krein(dir.path(), &["run", &cfg]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let (header, rows) = read_csv(&dir.path().join("out/modes.csv"));
    assert_eq!(
        header,
        [
            "k",
            "mode_index",
            "re_omega",
            "im_omega",
            "signature",
            "energy",
            "near_pole"
        ]
    );
    assert_eq!(rows.len(), 4);

    // Two cold beams of density 1/2 at ±a with unit shielding:
    // (1 + 1/k²)(ω² - a²)² = ω² + a², a quadratic in y = ω².
    let (k, a2) = (1.0f64, 0.04f64);
    let c = 1.0 + 1.0 / (k * k);
    let (qa, qb, qc) = (c, -2.0 * c * a2 - 1.0, c * a2 * a2 - a2);
    let disc = (qb * qb - 4.0 * qa * qc).sqrt();
    let (y_fast, y_slow) = ((-qb + disc) / (2.0 * qa), (-qb - disc) / (2.0 * qa));
    assert!(y_slow < 0.0);
    let mut fast = Vec::new();
    let mut slow = Vec::new();
    for r in &rows {
        let (re, im): (f64, f64) = (r[2].parse().unwrap(), r[3].parse().unwrap());
        if im == 0.0 {
            assert!((re.abs() - y_fast.sqrt()).abs() < 1e-12);
            assert_eq!(r[4], "positive");
            fast.push(re);
        } else {
            assert!(re.abs() < 1e-12);
            assert!((im.abs() - (-y_slow).sqrt()).abs() < 1e-12);
            assert_eq!(r[4], "marginal");
            assert_eq!(r[5], "");
            slow.push(im);
        }
    }
    assert_eq!((fast.len(), slow.len()), (2, 2));
    let meta: Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("out/meta.json")).unwrap())
            .unwrap();
    assert_eq!(meta["tolerances"]["root_residual"], 1e-9);
    assert_eq!(meta["config"]["analysis"]["type"], "modes");
}

#[test]
fn maxwellian_penrose_is_stable() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "pm.json", MAXWELLIAN);
    let out = krein(dir.path(), &["run", &cfg]);
    assert!(out.status.success());
    let (header, rows) = read_csv(&dir.path().join("out/contour.csv"));
    assert_eq!(header, ["u", "re_eps", "im_eps"]);
    assert!(rows.len() >= 2001);
    let (_, class) = read_csv(&dir.path().join("out/classification.csv"));
    assert_eq!(class[0][0], "Stable, winding 0");
    assert_eq!(class[0][3], "0");
}

#[test]
fn penrose_on_waterbag_is_a_usage_error_without_output() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        "bad.json",
        r#"{"system": {"type": "waterbag", "contours": [-1, 1], "levels": [0, 1, 0]},
            "analysis": {"type": "penrose", "k": 1.0}, "output": {"path": "out"}}"#,
    );
    let out = krein(dir.path(), &["run", &cfg]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!dir.path().join("out").exists());
    assert_eq!(
        krein(dir.path(), &["validate", &cfg]).status.code(),
        Some(2)
    );
}

#[test]
fn malformed_configs_are_usage_errors() {
    let dir = TempDir::new().unwrap();
    let cases = [
        (
            "unknown.json",
            r#"{"system": {"type": "distribution", "profile": {"kind": "maxwellian"}}, "analysis": {"type": "penrose", "k": 1}, "colour": 1}"#,
        ),
        (
            "badk.json",
            r#"{"system": {"type": "distribution", "profile": {"kind": "maxwellian"}}, "analysis": {"type": "penrose", "k": -1}}"#,
        ),
        (
            "order.json",
            r#"{"system": {"type": "waterbag", "contours": [1, -1], "levels": [0, 1, 0]}, "analysis": {"type": "modes", "k": 1}}"#,
        ),
        (
            "control.json",
            r#"{"system": {"type": "waterbag", "contours": [-1, 1], "levels": [0, 1, 0]}, "analysis": {"type": "sweep", "k": 1, "control": {"kind": "stream_speed"}, "grid": {"values": [1, 2, 3]}}}"#,
        ),
        (
            "species.json",
            r#"{"system": {"type": "multifluid", "coupling": "uncoupled", "species": [{"rho": 1, "u": 0, "c2": 1}]}, "analysis": {"type": "sweep", "k": 1, "control": {"kind": "density", "species": 3}, "grid": {"values": [1, 2, 3]}}}"#,
        ),
        (
            "odd.json",
            r#"{"system": {"type": "distribution", "profile": {"kind": "maxwellian"}}, "analysis": {"type": "discretize", "m": 5, "p_range": [-6, 6]}}"#,
        ),
        ("nojson.json", "system = multifluid"),
    ];
    for (name, body) in cases {
        let cfg = write_config(dir.path(), name, body);
        let out = krein(dir.path(), &["run", &cfg]);
        assert_eq!(
            out.status.code(),
            Some(2),
            "{name}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
    assert_eq!(
        krein(dir.path(), &["run", "missing.json"]).status.code(),
        Some(2)
    );
    assert_eq!(krein(dir.path(), &["frobnicate"]).status.code(), Some(2));
    assert!(!dir.path().join("krein-out").exists());
}

#[test]
fn solver_failure_exits_with_numerical_status() {
    // A table cut off where f0 is still large leaves a Hilbert tail.
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        "trunc.json",
        r#"{"system": {"type": "distribution", "profile": {"kind": "tabulated",
              "p": [-1, -0.5, 0, 0.5, 1], "f": [0.5, 0.8, 1, 0.8, 0.5]}},
            "analysis": {"type": "penrose", "k": 1.0}, "output": {"path": "out"}}"#,
    );
    let out = krein(dir.path(), &["run", &cfg]);
    assert_eq!(
        out.status.code(),
        Some(3),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(!dir.path().join("out").exists());
}

#[test]
fn sweep_reports_the_hopf_event() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "sw.json", FIVE_LAYER_SWEEP);
    assert!(krein(dir.path(), &["run", &cfg]).status.success());
    let (header, loci) = read_csv(&dir.path().join("out/loci.csv"));
    assert_eq!(
        header,
        ["param", "mode_index", "re_omega", "im_omega", "signature"]
    );
    assert_eq!(loci.len(), 41 * 4);
    let (_, events) = read_csv(&dir.path().join("out/events.csv"));
    assert_eq!(events.len(), 1);
    assert_eq!(events[0][1], "hamiltonian_hopf");
    assert_eq!(events[0][4], "negative;positive");
    let shift: f64 = events[0][0].parse().unwrap();
    // Stream centre at 6 + shift; the collision sits near a separation of 2.9.
    assert!((6.0 + shift - 2.9005).abs() < 1e-3);
    let (_, avoided) = read_csv(&dir.path().join("out/avoided.csv"));
    assert!(avoided.is_empty());
}

#[test]
fn output_is_identical_across_runs_and_thread_counts() {
    let mut outputs = Vec::new();
    for threads in ["1", "1", "4"] {
        let dir = TempDir::new().unwrap();
        let cfg = write_config(dir.path(), "sw.json", FIVE_LAYER_SWEEP);
        let out = krein(dir.path(), &["run", &cfg, "--threads", threads]);
        assert!(out.status.success());
        let files: Vec<Vec<u8>> = ["meta.json", "loci.csv", "events.csv", "avoided.csv"]
            .iter()
            .map(|f| std::fs::read(dir.path().join("out").join(f)).unwrap())
            .collect();
        outputs.push(files);
    }
    assert_eq!(outputs[0], outputs[1]);
    assert_eq!(outputs[0], outputs[2]);

    // The environment override gives the same bytes.
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "sw.json", FIVE_LAYER_SWEEP);
    let out = Command::new(env!("CARGO_BIN_EXE_krein"))
        .args(["run", &cfg])
        .current_dir(dir.path())
        .env("KREIN_THREADS", "3")
        .output()
        .unwrap();
    assert!(out.status.success());
    assert_eq!(
        std::fs::read(dir.path().join("out/loci.csv")).unwrap(),
        outputs[0][1]
    );
}

#[test]
fn json_output_holds_meta_and_records() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "cs.json", COUNTERSTREAM);
    let out = krein(
        dir.path(),
        &["run", &cfg, "--format", "json", "--output", "res"],
    );
    assert!(out.status.success());
    let doc: Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("res/result.json")).unwrap())
            .unwrap();
    assert_eq!(doc["meta"]["config"]["output"]["format"], "json");
    assert_eq!(doc["meta"]["config"]["output"]["path"], "res");
    let modes = doc["tables"]["modes"].as_array().unwrap();
    assert_eq!(modes.len(), 4);
    assert!(modes.iter().any(|m| m["energy"].is_null()));
    assert_eq!(modes[0].as_object().unwrap().keys().next().unwrap(), "k");
}

#[test]
fn configs_round_trip() {
    let bodies = [
        COUNTERSTREAM,
        MAXWELLIAN,
        FIVE_LAYER_SWEEP,
        r#"{"system": {"type": "waterbag", "pairs": [[-1, -1], [1, 1]]}, "analysis": {"type": "dispersion_scan", "k": 1, "u_range": [-3, 3], "points": 7}, "tolerances": {"grazing": 1e-3}}"#,
        r#"{"system": {"type": "distribution", "profile": {"kind": "bi_maxwellian", "c": 2}}, "analysis": {"type": "discretize", "m": 8, "p_range": [-7, 7]}, "output": {"format": "json", "path": "x"}}"#,
        r#"{"system": {"type": "distribution", "profile": {"kind": "tabulated", "p": [-3, -1, 0, 1, 3], "f": [0, 0.5, 1, 0.5, 0]}}, "analysis": {"type": "penrose", "k": 0.5, "grid": {"half_width": 6, "points": 501}}}"#,
        r#"{"system": {"type": "multifluid", "coupling": "gravitational_jeans", "species": [{"rho": 1, "u": 0.5, "c2": 1}, {"rho": 1, "u": -0.5, "c2": 1}]}, "analysis": {"type": "sweep", "control": {"kind": "k"}, "grid": {"values": [0.5, 1, 1.5]}}}"#,
        r#"{"system": {"type": "multifluid", "coupling": "uncoupled", "species": [{"rho": 1, "u": 0, "c2": 4}]}, "analysis": {"type": "normalform", "k": 3}}"#,
    ];
    for body in bodies {
        let cfg = RunConfig::from_json(body).unwrap();
        cfg.validate().unwrap();
        let again = RunConfig::from_json(&cfg.to_json()).unwrap();
        assert_eq!(again, cfg);
        assert_eq!(again.to_json(), cfg.to_json());
        // The meta record embeds the resolved config, which also parses back.
        let out = run(&cfg).unwrap();
        let embedded: RunConfig = serde_json::from_value(out.meta["config"].clone()).unwrap();
        assert_eq!(embedded, cfg);
    }
}

#[test]
fn tolerance_overrides_are_resolved() {
    let cfg = RunConfig::from_json(
        r#"{"system": {"type": "distribution", "profile": {"kind": "maxwellian"}},
            "analysis": {"type": "penrose", "k": 1}, "tolerances": {"grazing": 0.01}}"#,
    )
    .unwrap();
    assert_eq!(cfg.tolerances.grazing, 0.01);
    assert_eq!(cfg.tolerances.contour_points, 2001);
    let meta = run(&cfg).unwrap().meta;
    assert_eq!(meta["tolerances"]["grazing"], 0.01);
    assert!(RunConfig::from_json(
        r#"{"system": {"type": "distribution", "profile": {"kind": "maxwellian"}},
            "analysis": {"type": "penrose", "k": 1}, "tolerances": {"grazzing": 0.01}}"#
    )
    .is_err());
}

#[test]
fn waterbag_scan_matches_dielectric() {
    let cfg = RunConfig::from_json(
        r#"{"system": {"type": "waterbag", "contours": [-1, 1], "levels": [0, 1, 0]},
            "analysis": {"type": "dispersion_scan", "k": 2, "u_range": [-3, 3], "points": 7}}"#,
    )
    .unwrap();
    let out = run(&cfg).unwrap();
    let scan = &out.tables[0];
    assert_eq!(scan.columns, ["u", "eps"]);
    for row in &scan.rows {
        let Cell::Num(u) = row[0] else { panic!() };
        // ε = 1 - (1/k²)·2/(u² - 1) for a unit bag of width 2.
        match &row[1] {
            Cell::Num(e) => assert!((e - (1.0 - 0.25 * 2.0 / (u * u - 1.0))).abs() < 1e-14),
            Cell::Empty => assert_eq!(u.abs(), 1.0),
            c => panic!("{c:?}"),
        }
    }
}

#[test]
fn normal_form_and_discretize_tables() {
    let nf = run(&RunConfig::from_json(
        r#"{"system": {"type": "multifluid", "coupling": "uncoupled", "species": [{"rho": 1, "u": 0, "c2": 4}]},
            "analysis": {"type": "normalform", "k": 3}}"#,
    )
    .unwrap())
    .unwrap();
    let modes = &nf.tables[0];
    // The ±k pair of real Fourier coordinates gives two degrees of freedom.
    assert_eq!(modes.rows.len(), 2);
    for row in &modes.rows {
        assert_eq!(row[3], Cell::Int(1));
        let Cell::Num(w) = row[1] else { panic!() };
        assert!((w - 6.0).abs() < 1e-12);
    }
    assert_eq!(nf.tables[1].rows[0][0], Cell::Text("all_stable".into()));

    let d = run(&RunConfig::from_json(
        r#"{"system": {"type": "distribution", "profile": {"kind": "maxwellian"}},
            "analysis": {"type": "discretize", "m": 8, "p_range": [-6, 6]}}"#,
    )
    .unwrap())
    .unwrap();
    let wb = &d.tables[0];
    assert_eq!(wb.rows.len(), 8);
    let pairs: Vec<(f64, f64)> = wb
        .rows
        .iter()
        .map(|r| match (&r[1], &r[2]) {
            (Cell::Num(p), Cell::Num(df)) => (*p, *df),
            _ => panic!(),
        })
        .collect();
    // The emitted pairs are themselves a valid waterbag config.
    let body = serde_json::json!({
        "system": {"type": "waterbag", "pairs": pairs},
        "analysis": {"type": "modes", "k": 0.5}
    });
    let again = RunConfig::from_json(&body.to_string()).unwrap();
    let modes = run(&again).unwrap();
    assert_eq!(modes.tables[0].rows.len(), 8);
}

#[test]
fn schema_lists_every_tolerance() {
    let s = schema();
    let tol = s["properties"]["tolerances"]["properties"]
        .as_object()
        .unwrap();
    let defaults = serde_json::to_value(krein_core::Tolerances::default()).unwrap();
    for (name, value) in defaults.as_object().unwrap() {
        assert_eq!(&tol[name]["default"], value, "{name}");
    }
    let dir = TempDir::new().unwrap();
    let out = krein(dir.path(), &["schema"]);
    assert!(out.status.success());
    let printed: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(printed, s);
}

#[test]
fn csv_quoting_and_rounding() {
    let mut t = Table::new("t", &["a", "b"]);
    t.push(vec![Cell::Text("x, \"y\"".into()), Cell::Num(1.0 / 3.0)]);
    t.push(vec![Cell::Empty, Cell::Num(1.5e-9)]);
    let text = t.to_csv().unwrap();
    assert_eq!(text, "a,b\n\"x, \"\"y\"\"\",0.333333333333333\n,1.5e-9\n");
    assert_eq!(round15(0.1 + 0.2), 0.3);
    assert_eq!(round15(123_456_789.123_456_78), 123456789.123457);
    assert!(round15(f64::NAN).is_nan());
    assert_eq!(Format::default(), Format::Csv);
}
