//! End-to-end checks of the socnav binary: flag handling, file outputs,
//! determinism, and the SVG plot structure.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_socnav")
}

fn scenario(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../scenarios")
        .join(name)
        .display()
        .to_string()
}

fn tmp_dir(test: &str) -> PathBuf {
    let dir = Path::new(env!("CARGO_TARGET_TMPDIR")).join(test);
    fs::create_dir_all(&dir).expect("create scratch dir");
    dir
}

fn run(args: &[&str]) -> Output {
    Command::new(bin())
        .args(args)
        .output()
        .expect("spawn socnav")
}

fn run_ok(args: &[&str]) -> String {
    let out = run(args);
    assert!(
        out.status.success(),
        "socnav {:?} failed: {}",
        args,
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).expect("stdout is utf-8")
}

fn path_str(p: &Path) -> &str {
    p.to_str().expect("ascii path")
}

#[test]
fn train_on_synthetic_data_reports_split_sizes_and_accuracies() {
    let dir = tmp_dir("train_synthetic");
    let model = dir.join("model.txt");
    let out = run_ok(&[
        "train",
        "--synthetic",
        "--seed",
        "7",
        "--out",
        path_str(&model),
    ]);
    assert!(out.contains("train samples: 272, test samples: 68"), "{out}");
    assert!(out.contains("train accuracy: 1.000000"), "{out}");
    assert!(out.contains("test accuracy: 1.000000"), "{out}");
    assert!(model.exists());
}

#[test]
fn gen_data_row_counts_and_determinism() {
    let dir = tmp_dir("gen_data");
    let a = dir.join("a.csv");
    let b = dir.join("b.csv");
    let args = |out: &Path| {
        vec![
            "gen-data".to_string(),
            "--kind".into(),
            "both".into(),
            "--count".into(),
            "170".into(),
            "--seed".into(),
            "3".into(),
            "--out".into(),
            out.display().to_string(),
        ]
    };
    let argv: Vec<String> = args(&a);
    let refs: Vec<&str> = argv.iter().map(String::as_str).collect();
    let out = run_ok(&refs);
    assert!(out.contains("wrote 340 samples"), "{out}");

    let argv: Vec<String> = args(&b);
    let refs: Vec<&str> = argv.iter().map(String::as_str).collect();
    run_ok(&refs);

    let bytes_a = fs::read(&a).unwrap();
    let bytes_b = fs::read(&b).unwrap();
    assert_eq!(bytes_a, bytes_b, "same seed must give identical files");

    let text = String::from_utf8(bytes_a).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("circularity,linearity,label"));
    assert_eq!(lines.count(), 340);
}

#[test]
fn gen_data_without_noise_keeps_queues_collinear() {
    let dir = tmp_dir("gen_data_noise0");
    let out_path = dir.join("q.csv");
    run_ok(&[
        "gen-data",
        "--kind",
        "queue",
        "--count",
        "25",
        "--noise",
        "0",
        "--seed",
        "9",
        "--out",
        path_str(&out_path),
    ]);
    let text = fs::read_to_string(&out_path).unwrap();
    for line in text.lines().skip(1) {
        let mut cells = line.split(',');
        let _circ = cells.next().unwrap();
        let lin: f64 = cells.next().unwrap().parse().unwrap();
        let label = cells.next().unwrap();
        assert!((lin - 1.0).abs() < 1e-9, "noiseless queue row {line}");
        assert_eq!(label, "queue");
    }
}

#[test]
fn classify_recognises_canonical_shapes() {
    let dir = tmp_dir("classify");
    let model = dir.join("model.txt");
    run_ok(&["train", "--synthetic", "--seed", "7", "--out", path_str(&model)]);

    let line = run_ok(&[
        "classify",
        "--model",
        path_str(&model),
        "--points",
        "0,0;1,0.5;2,1;3,1.5",
    ]);
    assert!(line.starts_with("queue ("), "{line}");

    let ring = run_ok(&[
        "classify",
        "--model",
        path_str(&model),
        "--points",
        "1,0;0,1;-1,0;0,-1",
    ]);
    assert!(ring.starts_with("o_formation ("), "{ring}");
}

#[test]
fn eval_prints_report_for_saved_model() {
    let dir = tmp_dir("eval");
    let samples = dir.join("samples.csv");
    let model = dir.join("model.txt");
    run_ok(&[
        "gen-data",
        "--kind",
        "both",
        "--count",
        "40",
        "--seed",
        "5",
        "--out",
        path_str(&samples),
    ]);
    run_ok(&[
        "train",
        "--data",
        path_str(&samples),
        "--seed",
        "5",
        "--out",
        path_str(&model),
    ]);
    let out = run_ok(&["eval", "--model", path_str(&model), "--data", path_str(&samples)]);
    assert!(out.contains("accuracy:"), "{out}");
    assert!(out.contains("queue: precision"), "{out}");
    assert!(out.contains("confusion (rows = truth):"), "{out}");
}

#[test]
fn run_writes_trace_metrics_and_svg() {
    let dir = tmp_dir("run_outputs");
    let trace = dir.join("trace.csv");
    let metrics = dir.join("metrics.json");
    let svg = dir.join("plot.svg");
    let out = run_ok(&[
        "run",
        &scenario("empty_room.json"),
        "--mode",
        "social",
        "--seed",
        "1",
        "--out",
        path_str(&trace),
        "--metrics",
        path_str(&metrics),
        "--svg",
        path_str(&svg),
    ]);
    assert!(out.contains("success: true"), "{out}");

    let text = fs::read_to_string(&trace).unwrap();
    assert!(text.starts_with(
        "tick,x,y,theta,v,omega,context,fitness,obj:goal_distance,obj:path_alignment,\
         obj:clearance,obj:personal_space,obj:activity_space,obj:right_side,obj:o_space,\
         obj:social_goal,min_person_dist,events\n"
    ));
    let metrics_text = fs::read_to_string(&metrics).unwrap();
    let value: serde_json::Value = serde_json::from_str(&metrics_text).unwrap();
    assert_eq!(value["success"], serde_json::Value::Bool(true));
    assert!(svg.exists());
}

#[test]
fn identical_invocations_give_identical_bytes() {
    let dir = tmp_dir("run_determinism");
    let mut outputs = Vec::new();
    for name in ["first", "second"] {
        let trace = dir.join(format!("{name}.csv"));
        let metrics = dir.join(format!("{name}.json"));
        run_ok(&[
            "run",
            &scenario("hallway.json"),
            "--mode",
            "social",
            "--seed",
            "4",
            "--out",
            path_str(&trace),
            "--metrics",
            path_str(&metrics),
        ]);
        outputs.push((fs::read(&trace).unwrap(), fs::read(&metrics).unwrap()));
    }
    assert_eq!(outputs[0].0, outputs[1].0, "trace bytes differ");
    assert_eq!(outputs[0].1, outputs[1].1, "metrics bytes differ");
}

#[test]
fn missing_scenario_is_a_domain_error() {
    let out = run(&["run", "/nonexistent/nowhere.json"]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.starts_with("error:"), "{err}");
}

#[test]
fn unknown_flag_is_a_usage_error() {
    let out = run(&["run", "--bogus"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn train_requires_a_data_source() {
    let out = run(&["train", "--seed", "1"]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("--data") && err.contains("--synthetic"), "{err}");
}

/// Walks every tag in the document and checks that openers and closers
/// nest properly; self-closing tags and the XML prolog are skipped.
fn assert_tags_balanced(svg: &str) {
    let mut stack: Vec<String> = Vec::new();
    let mut rest = svg;
    while let Some(start) = rest.find('<') {
        let end = rest[start..].find('>').expect("unterminated tag") + start;
        let tag = &rest[start + 1..end];
        rest = &rest[end + 1..];
        if tag.starts_with('?') || tag.starts_with('!') {
            continue;
        }
        if let Some(name) = tag.strip_prefix('/') {
            assert_eq!(stack.pop().as_deref(), Some(name), "mismatched </{name}>");
        } else if !tag.ends_with('/') {
            let name = tag.split_whitespace().next().unwrap();
            stack.push(name.to_string());
        }
    }
    assert!(stack.is_empty(), "unclosed tags: {stack:?}");
}

#[test]
fn svg_plot_has_one_run_path_and_markers_per_feature() {
    let dir = tmp_dir("svg_structure");
    let trace_a = dir.join("social.csv");
    let trace_b = dir.join("traditional.csv");
    for (mode, trace) in [("social", &trace_a), ("traditional", &trace_b)] {
        run_ok(&[
            "run",
            &scenario("art_gallery.json"),
            "--mode",
            mode,
            "--seed",
            "1",
            "--out",
            path_str(trace),
            "--metrics",
            path_str(&dir.join(format!("{mode}.json"))),
        ]);
    }
    let svg_path = dir.join("plot.svg");
    run_ok(&[
        "plot",
        "--scenario",
        &scenario("art_gallery.json"),
        "--trace",
        path_str(&trace_a),
        "--trace",
        path_str(&trace_b),
        "--out",
        path_str(&svg_path),
    ]);

    let svg = fs::read_to_string(&svg_path).unwrap();
    assert_tags_balanced(&svg);
    let runs = svg.matches("<path class=\"run\"").count();
    let persons = svg.matches("<circle class=\"person\"").count();
    let artworks = svg.matches("<rect class=\"artwork\"").count();
    assert_eq!(runs, 2, "one run path per trace");
    assert_eq!(persons, 1, "one marker per person");
    assert_eq!(artworks, 1, "one marker per artwork");
}
