use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn eitest(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_eitest"))
        .args(args)
        .env("EITEST_THREADS", "1")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn path_str(p: &Path) -> &str {
    p.to_str().expect("utf-8 temp path")
}

/// Subset of JSON Schema used by the shipped schemas: `type` (single or
/// list), `enum`, `required`, `properties`, `items`, `minimum`, `maximum`.
mod schema {
    use serde_json::Value;

    fn type_matches(name: &str, v: &Value) -> bool {
        match name {
            "object" => v.is_object(),
            "array" => v.is_array(),
            "string" => v.is_string(),
            "boolean" => v.is_boolean(),
            "null" => v.is_null(),
            "number" => v.is_number(),
            "integer" => v.is_u64() || v.is_i64(),
            other => panic!("unsupported schema type {other}"),
        }
    }

    pub fn validate(schema: &Value, v: &Value, at: &str) -> Result<(), String> {
        if let Some(t) = schema.get("type") {
            let names: Vec<&str> = match t {
                Value::String(s) => vec![s.as_str()],
                Value::Array(a) => a.iter().filter_map(Value::as_str).collect(),
                _ => return Err(format!("{at}: malformed type")),
            };
            if !names.iter().any(|n| type_matches(n, v)) {
                return Err(format!("{at}: expected {names:?}, got {v}"));
            }
        }
        if let Some(options) = schema.get("enum").and_then(Value::as_array) {
            if !options.contains(v) {
                return Err(format!("{at}: {v} not in {options:?}"));
            }
        }
        if let Some(x) = v.as_f64() {
            if let Some(lo) = schema.get("minimum").and_then(Value::as_f64) {
                if x < lo {
                    return Err(format!("{at}: {x} < {lo}"));
                }
            }
            if let Some(hi) = schema.get("maximum").and_then(Value::as_f64) {
                if x > hi {
                    return Err(format!("{at}: {x} > {hi}"));
                }
            }
        }
        if let Some(obj) = v.as_object() {
            for key in schema
                .get("required")
                .and_then(Value::as_array)
                .into_iter()
                .flatten()
            {
                let key = key.as_str().unwrap();
                if !obj.contains_key(key) {
                    return Err(format!("{at}: missing {key}"));
                }
            }
            if let Some(props) = schema.get("properties").and_then(Value::as_object) {
                for (key, sub) in props {
                    if let Some(child) = obj.get(key) {
                        validate(sub, child, &format!("{at}.{key}"))?;
                    }
                }
            }
        }
        if let (Some(items), Some(arr)) = (schema.get("items"), v.as_array()) {
            for (i, child) in arr.iter().enumerate() {
                validate(items, child, &format!("{at}[{i}]"))?;
            }
        }
        Ok(())
    }
}

fn check_schema(name: &str, doc: &Value) {
    let path = Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../schemas")
        .join(format!("{name}.schema.json"));
    let schema: Value = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
    if let Err(e) = schema::validate(&schema, doc, "$") {
        panic!("{name} schema violation: {e}");
    }
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

struct Simulated {
    series: PathBuf,
    events: PathBuf,
    meta: PathBuf,
}

fn simulate(dir: &Path, tag: &str, extra: &[&str]) -> (Output, Simulated) {
    let files = Simulated {
        series: dir.join(format!("{tag}-series.csv")),
        events: dir.join(format!("{tag}-events.csv")),
        meta: dir.join(format!("{tag}-meta.json")),
    };
    let mut args = vec![
        "simulate",
        "--series-out",
        path_str(&files.series),
        "--events-out",
        path_str(&files.events),
        "--meta-out",
        path_str(&files.meta),
    ];
    args.extend_from_slice(extra);
    (eitest(&args), files)
}

#[test]
fn coupled_mean_fixture_is_rejected() {
    let dir = TempDir::new().unwrap();
    let (out, sim) = simulate(dir.path(), "mean", &["--model", "mean", "--seed", "11"]);
    assert!(out.status.success(), "{}", stderr(&out));
    check_schema("simulation-meta", &read_json(&sim.meta));

    let report = dir.path().join("report.json");
    let out = eitest(&[
        "test",
        "--series",
        path_str(&sim.series),
        "--events",
        path_str(&sim.events),
        "--method",
        "eitest-mmd",
        "--max-lag",
        "32",
        "--alpha",
        "0.05",
        "--json",
        path_str(&report),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stdout(&out).contains("reject    true"), "{}", stdout(&out));
    let doc = read_json(&report);
    check_schema("test-output", &doc);
    assert_eq!(doc["reject"], Value::Bool(true));
    assert_eq!(doc["eitest"]["tests_performed"], 528);
}

#[test]
fn every_method_emits_schema_valid_json() {
    let dir = TempDir::new().unwrap();
    let (out, sim) = simulate(
        dir.path(),
        "var",
        &[
            "--model", "variance", "--length", "1500", "--events", "60", "--seed", "2",
        ],
    );
    assert!(out.status.success(), "{}", stderr(&out));
    for extra in [
        &["--method", "eitest-ks"][..],
        &[
            "--method",
            "eitest-mmd",
            "--null",
            "permutation",
            "--perms",
            "99",
        ],
        &[
            "--method",
            "eitest-mmd",
            "--bandwidth",
            "0.7",
            "--min-gap",
            "2",
        ],
        &["--method", "gcvar", "--gc-lag", "8"],
    ] {
        let mut args = vec![
            "test",
            "--series",
            path_str(&sim.series),
            "--events",
            path_str(&sim.events),
            "--max-lag",
            "8",
            "--format",
            "json",
        ];
        args.extend_from_slice(extra);
        let out = eitest(&args);
        assert!(out.status.success(), "{extra:?}: {}", stderr(&out));
        let doc: Value = serde_json::from_str(&stdout(&out)).unwrap();
        check_schema("test-output", &doc);
    }
}

#[test]
fn permutation_null_is_deterministic_per_seed() {
    let dir = TempDir::new().unwrap();
    let (_, sim) = simulate(
        dir.path(),
        "tail",
        &[
            "--model", "tail", "--length", "1500", "--events", "150", "--seed", "4",
        ],
    );
    let run = |seed: &str| {
        let out = eitest(&[
            "test",
            "--series",
            path_str(&sim.series),
            "--events",
            path_str(&sim.events),
            "--max-lag",
            "6",
            "--null",
            "permutation",
            "--perms",
            "199",
            "--seed",
            seed,
            "--format",
            "json",
        ]);
        assert!(out.status.success(), "{}", stderr(&out));
        stdout(&out)
    };
    assert_eq!(run("9"), run("9"));
}

#[test]
fn length_mismatch_is_an_input_error() {
    let dir = TempDir::new().unwrap();
    let series = dir.path().join("s.csv");
    let events = dir.path().join("e.csv");
    fs::write(&series, "0.1\n0.2\n0.3\n0.4\n").unwrap();
    fs::write(&events, "0\n1\n0\n").unwrap();
    let out = eitest(&[
        "test",
        "--series",
        path_str(&series),
        "--events",
        path_str(&events),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("LengthMismatch"), "{}", stderr(&out));
}

#[test]
fn parse_errors_report_line_numbers() {
    let dir = TempDir::new().unwrap();
    let series = dir.path().join("s.csv");
    let events = dir.path().join("e.csv");
    fs::write(&series, "0.1\n0.2\nx\n").unwrap();
    fs::write(&events, "0\n1\n0\n").unwrap();
    let out = eitest(&[
        "test",
        "--series",
        path_str(&series),
        "--events",
        path_str(&events),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("line 3"), "{}", stderr(&out));

    let missing = dir.path().join("missing.csv");
    let out = eitest(&[
        "test",
        "--series",
        path_str(&missing),
        "--events",
        path_str(&events),
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn usage_errors_exit_with_two() {
    let cases: [&[&str]; 6] = [
        &[
            "test",
            "--series",
            "a.csv",
            "--events",
            "b.csv",
            "--max-lag",
            "0",
        ],
        &["test", "--series", "a.csv"],
        &["bench", "--preset", "fig3-desk"],
        &["calibrate", "--test", "ks", "--trials", "0"],
        &["calibrate", "--test", "mmd-perm", "--perms", "10"],
        &[
            "simulate",
            "--model",
            "cubic",
            "--series-out",
            "a",
            "--events-out",
            "b",
        ],
    ];
    for args in cases {
        let out = eitest(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}: {}", stderr(&out));
    }
}

#[test]
fn invalid_tail_dof_is_rejected() {
    let dir = TempDir::new().unwrap();
    let (out, _) = simulate(dir.path(), "bad", &["--model", "tail", "--dof", "2"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("InvalidDof"), "{}", stderr(&out));
}

#[test]
fn simulate_is_deterministic_per_seed() {
    let dir = TempDir::new().unwrap();
    let flags = [
        "--model", "mean", "--length", "2000", "--events", "40", "--seed", "5",
    ];
    let (_, a) = simulate(dir.path(), "a", &flags);
    let (_, b) = simulate(dir.path(), "b", &flags);
    assert_eq!(fs::read(&a.series).unwrap(), fs::read(&b.series).unwrap());
    assert_eq!(fs::read(&a.events).unwrap(), fs::read(&b.events).unwrap());
    let (_, c) = simulate(
        dir.path(),
        "c",
        &[
            "--model", "mean", "--length", "2000", "--events", "40", "--seed", "6",
        ],
    );
    assert_ne!(fs::read(&a.series).unwrap(), fs::read(&c.series).unwrap());
}

fn event_times(path: &Path) -> Vec<usize> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .enumerate()
        .filter(|(_, l)| *l == "1")
        .map(|(t, _)| t)
        .collect()
}

#[test]
fn uncoupled_events_permute_the_coupled_events() {
    let dir = TempDir::new().unwrap();
    let flags = [
        "--model", "variance", "--length", "3000", "--events", "90", "--seed", "8",
    ];
    let (_, coupled) = simulate(dir.path(), "c", &flags);
    let mut uncoupled_flags = flags.to_vec();
    uncoupled_flags.push("--uncoupled");
    let (out, uncoupled) = simulate(dir.path(), "u", &uncoupled_flags);
    assert!(out.status.success(), "{}", stderr(&out));

    // same driving events and series; the written marks are a permutation
    assert_eq!(
        fs::read(&coupled.series).unwrap(),
        fs::read(&uncoupled.series).unwrap()
    );
    let a = event_times(&coupled.events);
    let b = event_times(&uncoupled.events);
    assert_eq!(a.len(), b.len());
    assert_ne!(a, b);
    let count_lines = |p: &Path| fs::read_to_string(p).unwrap().lines().count();
    assert_eq!(count_lines(&coupled.events), count_lines(&uncoupled.events));

    let meta = read_json(&uncoupled.meta);
    check_schema("simulation-meta", &meta);
    assert_eq!(meta["coupled"], Value::Bool(false));
    let driving: Vec<usize> = serde_json::from_value(meta["driving_events"].clone()).unwrap();
    assert_eq!(driving, a);
}

#[test]
fn desk_preset_writes_eight_panels() {
    let dir = TempDir::new().unwrap();
    let out_dir = dir.path().join("out");
    let out = eitest(&[
        "bench",
        "--preset",
        "fig2-desk",
        "--trials",
        "1",
        "--methods",
        "ks",
        "--out-dir",
        path_str(&out_dir),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let mut csv: Vec<String> = fs::read_dir(&out_dir)
        .unwrap()
        .filter_map(|e| {
            let name = e.unwrap().file_name().into_string().unwrap();
            name.ends_with(".csv").then_some(name)
        })
        .collect();
    csv.sort();
    assert_eq!(csv.len(), 8, "{csv:?}");
    for name in &csv {
        let json = out_dir.join(name.replace(".csv", ".json"));
        check_schema("bench-report", &read_json(&json));
    }
}

#[test]
fn bench_config_file_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let config = dir.path().join("sweep.json");
    fs::write(
        &config,
        r#"{"name":"small","model":"variance","parameter":"r_v","values":[1.0,8.0],
            "fixed":{"length":600,"events":30,"order":8,"snr":10,"delay":1,"increase":4,"dof":3},
            "trials_per_point":3,"methods":["eitest-ks","gc-var"],
            "alpha":0.05,"max_lag":4,"min_size":5,"gc_lag":4,"root_seed":3}"#,
    )
    .unwrap();
    let run = |tag: &str| {
        let out_dir = dir.path().join(tag);
        let out = eitest(&[
            "bench",
            "--config",
            path_str(&config),
            "--out-dir",
            path_str(&out_dir),
        ]);
        assert!(out.status.success(), "{}", stderr(&out));
        let mut doc = read_json(&out_dir.join("small.json"));
        check_schema("bench-report", &doc);
        // wall-clock timings are the only non-deterministic fields
        for row in doc["rows"].as_array_mut().unwrap() {
            row["mean_runtime_ms"] = Value::Null;
        }
        for trial in doc["trials"].as_array_mut().unwrap() {
            trial["runtime_ms"] = Value::Null;
        }
        doc
    };
    let first = run("one");
    assert_eq!(first, run("two"));
    assert_eq!(first["rows"].as_array().unwrap().len(), 4);
    assert_eq!(first["trials"].as_array().unwrap().len(), 2 * 3 * 2 * 2);

    let out = eitest(&["bench", "--config", path_str(&config), "--panel", "other"]);
    assert_eq!(out.status.code(), Some(2));
}

fn calibration(args: &[&str]) -> Value {
    let mut full = vec!["calibrate", "--json"];
    full.extend_from_slice(args);
    let out = eitest(&full);
    assert!(out.status.success(), "{}", stderr(&out));
    let doc: Value = serde_json::from_str(&stdout(&out)).unwrap();
    check_schema("calibration", &doc);
    doc
}

fn rate_at(doc: &Value, alpha: f64) -> f64 {
    doc["levels"]
        .as_array()
        .unwrap()
        .iter()
        .find(|l| l["alpha"].as_f64() == Some(alpha))
        .and_then(|l| l["rate"].as_f64())
        .unwrap()
}

#[test]
fn ks_calibration_is_near_nominal() {
    let doc = calibration(&[
        "--test", "ks", "--n", "200", "--trials", "2000", "--seed", "1",
    ]);
    let rate = rate_at(&doc, 0.05);
    assert!((0.03..=0.07).contains(&rate), "{rate}");
}

#[test]
fn permutation_calibration_controls_level() {
    let trials = 400.0;
    let doc = calibration(&[
        "--test", "mmd-perm", "--n", "40", "--trials", "400", "--perms", "99", "--seed", "2",
    ]);
    let rate = rate_at(&doc, 0.05);
    assert!(
        rate <= 0.05 + 3.0 * (0.05f64 * 0.95 / trials).sqrt(),
        "{rate}"
    );
}

#[test]
fn calibration_is_deterministic_per_seed() {
    let args = [
        "--test",
        "mmd-gamma",
        "--n",
        "30",
        "--trials",
        "50",
        "--seed",
        "7",
    ];
    assert_eq!(calibration(&args), calibration(&args));
}
