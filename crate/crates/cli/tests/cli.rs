//! Binary-level contract tests: flag parsing, file shapes, exit codes, and
//! run-manifest behavior.

use std::path::Path;
use std::process::{Command, Output};

use navdex_core::model::FeatureKey;

fn navdex(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_navdex"))
        .args(args)
        .output()
        .expect("binary spawns")
}

fn assert_ok(output: &Output, what: &str) {
    assert!(
        output.status.success(),
        "{what}: {}",
        String::from_utf8_lossy(&output.stderr)
    );
}

fn synth_into(dir: &Path, cohort: usize) {
    let out = navdex(&[
        "synth",
        "--out",
        dir.to_str().unwrap(),
        "--seed",
        "3",
        "--cohort",
        &cohort.to_string(),
    ]);
    assert_ok(&out, "synth");
}

fn zero_feature_csv(path: &Path, subjects: &[&str]) {
    let mut body = String::from("subject_id");
    for key in FeatureKey::all() {
        body.push(',');
        body.push_str(&key.to_string());
    }
    body.push('\n');
    for subject in subjects {
        body.push_str(subject);
        body.push_str(&",0".repeat(44));
        body.push('\n');
    }
    std::fs::write(path, body).unwrap();
}

#[test]
fn features_command_emits_45_column_table() {
    let dir = tempfile::tempdir().unwrap();
    let recs = dir.path().join("recs");
    synth_into(&recs, 3);

    let features = dir.path().join("features.csv");
    let out = navdex(&[
        "features",
        "--in",
        recs.to_str().unwrap(),
        "--out",
        features.to_str().unwrap(),
    ]);
    assert_ok(&out, "features");

    let text = std::fs::read_to_string(&features).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 4); // header + 3 subjects
    for line in &lines {
        assert_eq!(line.split(',').count(), 45, "line: {line}");
    }
    assert!(features
        .with_file_name("features.csv.run_manifest.json")
        .exists());
}

#[test]
fn score_zero_row_returns_published_offset() {
    let dir = tempfile::tempdir().unwrap();
    let features = dir.path().join("features.csv");
    zero_feature_csv(&features, &["s00"]);

    let scores = dir.path().join("scores.csv");
    let out = navdex(&[
        "score",
        "--features",
        features.to_str().unwrap(),
        "--index",
        "NO",
        "--out",
        scores.to_str().unwrap(),
    ]);
    assert_ok(&out, "score");

    let text = std::fs::read_to_string(&scores).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "subject_id,NavigationOrientation");
    let row = lines.next().unwrap();
    let value: f64 = row.split(',').nth(1).unwrap().parse().unwrap();
    assert!((value - 110.64).abs() < 1e-9, "got {value}");
}

#[test]
fn derive_echoes_requested_parameters() {
    let dir = tempfile::tempdir().unwrap();
    let recs = dir.path().join("recs");
    synth_into(&recs, 8);
    let features = dir.path().join("features.csv");
    assert_ok(
        &navdex(&[
            "features",
            "--in",
            recs.to_str().unwrap(),
            "--out",
            features.to_str().unwrap(),
        ]),
        "features",
    );

    // Targets synthesized from blink counts so the derivation has signal.
    let events = std::fs::read_to_string(recs.join("events.csv")).unwrap();
    let mut subs = String::from("subject_id,NavigationOrientation\n");
    for line in events.lines().skip(1) {
        let mut fields = line.split(',');
        let id = fields.next().unwrap();
        let blink: f64 = fields.next().unwrap().parse().unwrap();
        subs.push_str(&format!("{id},{}\n", 50.0 + 3.0 * blink));
    }
    let subs_path = dir.path().join("subscores.csv");
    std::fs::write(&subs_path, subs).unwrap();

    let model_path = dir.path().join("model.json");
    let out = navdex(&[
        "derive",
        "--features",
        features.to_str().unwrap(),
        "--subscores",
        subs_path.to_str().unwrap(),
        "--subscale",
        "NavigationOrientation",
        "--lambda",
        "0.005",
        "--folds",
        "5",
        "--threshold",
        "0.01",
        "--out",
        model_path.to_str().unwrap(),
    ]);
    assert_ok(&out, "derive");

    let model: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&model_path).unwrap()).unwrap();
    assert_eq!(model["config"]["folds_k"], 5);
    assert_eq!(model["config"]["lambda_reg"], 0.005);
    assert_eq!(model["config"]["stop_threshold"], 0.01);
    assert_eq!(model["subscale"], "NavigationOrientation");
    assert!(!model["terms"].as_array().unwrap().is_empty());
}

#[test]
fn evaluate_and_report_produce_bundles() {
    let dir = tempfile::tempdir().unwrap();
    let features = dir.path().join("features.csv");
    zero_feature_csv(&features, &["s00", "s01", "s02", "s03"]);

    let estimates = dir.path().join("estimates.csv");
    std::fs::write(
        &estimates,
        "subject_id,PathRoute\ns00,1.0\ns01,2.0\ns02,2.5\ns03,4.0\n",
    )
    .unwrap();
    let actuals = dir.path().join("actuals.csv");
    std::fs::write(
        &actuals,
        "subject_id,PathRoute\ns00,1.0\ns01,2.0\ns02,3.0\ns03,4.0\n",
    )
    .unwrap();

    let report_json = dir.path().join("report.json");
    let out = navdex(&[
        "evaluate",
        "--estimates",
        estimates.to_str().unwrap(),
        "--actuals",
        actuals.to_str().unwrap(),
        "--subscale",
        "PathRoute",
        "--out",
        report_json.to_str().unwrap(),
    ]);
    assert_ok(&out, "evaluate");
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("PathRoute"));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&report_json).unwrap()).unwrap();
    assert_eq!(report["pairs"].as_array().unwrap().len(), 4);

    let figs = dir.path().join("figs");
    let out = navdex(&[
        "report",
        "--estimates",
        estimates.to_str().unwrap(),
        "--actuals",
        actuals.to_str().unwrap(),
        "--features",
        features.to_str().unwrap(),
        "--out",
        figs.to_str().unwrap(),
    ]);
    assert_ok(&out, "report");
    // PathRoute is discrete, so it renders as bars; data ships as CSV too.
    assert!(figs.join("PathRoute_bar.svg").exists());
    assert!(figs.join("PathRoute_bar.csv").exists());
    assert!(figs.join("feature_importance.svg").exists());
    assert!(figs.join("run_manifest.json").exists());

    // SVG payload matches the sibling CSV.
    let svg = std::fs::read_to_string(figs.join("PathRoute_bar.svg")).unwrap();
    let csv = std::fs::read_to_string(figs.join("PathRoute_bar.csv")).unwrap();
    for line in csv.lines().skip(1) {
        let mut fields = line.split(',');
        let subject = fields.next().unwrap();
        let actual = fields.next().unwrap();
        let estimated = fields.next().unwrap();
        assert!(svg.contains(&format!(
            "data-subject=\"{subject}\" data-kind=\"actual\" data-value=\"{actual}\""
        )));
        assert!(svg.contains(&format!(
            "data-subject=\"{subject}\" data-kind=\"estimated\" data-value=\"{estimated}\""
        )));
    }
}

#[test]
fn report_scatter_annotates_every_subject() {
    let dir = tempfile::tempdir().unwrap();
    let features = dir.path().join("features.csv");
    zero_feature_csv(&features, &["s00", "s01", "s02"]);
    let estimates = dir.path().join("estimates.csv");
    std::fs::write(
        &estimates,
        "subject_id,NavigationOrientation\ns00,80\ns01,70\ns02,60\n",
    )
    .unwrap();
    let actuals = dir.path().join("actuals.csv");
    std::fs::write(
        &actuals,
        "subject_id,NavigationOrientation\ns00,82\ns01,68\ns02,63\n",
    )
    .unwrap();

    let figs = dir.path().join("figs");
    assert_ok(
        &navdex(&[
            "report",
            "--estimates",
            estimates.to_str().unwrap(),
            "--actuals",
            actuals.to_str().unwrap(),
            "--features",
            features.to_str().unwrap(),
            "--out",
            figs.to_str().unwrap(),
        ]),
        "report",
    );
    let svg = std::fs::read_to_string(figs.join("NavigationOrientation_scatter.svg")).unwrap();
    assert_eq!(svg.matches("<circle").count(), 3);
    for subject in ["s00", "s01", "s02"] {
        assert!(svg.contains(&format!("data-subject=\"{subject}\"")));
        assert!(svg.contains(&format!(">{subject}</text>")));
    }
}

#[test]
fn thread_cap_does_not_change_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let recs = dir.path().join("recs");
    synth_into(&recs, 4);

    let run_features = |out: &Path, threads: Option<&str>| {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_navdex"));
        cmd.args([
            "features",
            "--in",
            recs.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ]);
        if let Some(t) = threads {
            cmd.env("NAVDEX_THREADS", t);
        }
        let out = cmd.output().expect("binary spawns");
        assert!(out.status.success());
    };
    let single = dir.path().join("single.csv");
    let parallel = dir.path().join("parallel.csv");
    run_features(&single, Some("1"));
    run_features(&parallel, None);
    assert_eq!(
        std::fs::read(&single).unwrap(),
        std::fs::read(&parallel).unwrap()
    );
}

#[test]
fn correlate_produces_grid_csv() {
    let dir = tempfile::tempdir().unwrap();
    let recs = dir.path().join("recs");
    let out = navdex(&[
        "synth",
        "--out",
        recs.to_str().unwrap(),
        "--seed",
        "5",
        "--cohort",
        "6",
        "--sweep",
        "blink_rate_hz:0.1:0.6",
    ]);
    assert_ok(&out, "synth");
    let features = dir.path().join("features.csv");
    assert_ok(
        &navdex(&[
            "features",
            "--in",
            recs.to_str().unwrap(),
            "--out",
            features.to_str().unwrap(),
        ]),
        "features",
    );

    let grid = dir.path().join("corr.csv");
    let out = navdex(&[
        "correlate",
        "--features",
        features.to_str().unwrap(),
        "--events",
        recs.join("events.csv").to_str().unwrap(),
        "--out",
        grid.to_str().unwrap(),
    ]);
    assert_ok(&out, "correlate");

    let text = std::fs::read_to_string(&grid).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 45); // header + 44 features
    assert!(lines[0].starts_with("feature,blink_count,"));
}

#[test]
fn exit_codes_distinguish_validation_from_io() {
    // Missing input file: I/O failure, exit 2.
    let out = navdex(&[
        "features",
        "--in",
        "/nonexistent/dir",
        "--out",
        "/tmp/never.csv",
    ]);
    assert_eq!(out.status.code(), Some(2), "{out:?}");

    // Unknown subscale: validation failure, exit 1.
    let dir = tempfile::tempdir().unwrap();
    let features = dir.path().join("features.csv");
    zero_feature_csv(&features, &["s00"]);
    let subs = dir.path().join("subs.csv");
    std::fs::write(&subs, "subject_id,NavigationOrientation\ns00,1\n").unwrap();
    let out = navdex(&[
        "derive",
        "--features",
        features.to_str().unwrap(),
        "--subscores",
        subs.to_str().unwrap(),
        "--subscale",
        "NotAScale",
        "--out",
        dir.path().join("m.json").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1), "{out:?}");

    // Empty report input: validation failure, exit 1.
    let estimates = dir.path().join("estimates.csv");
    std::fs::write(&estimates, "subject_id,PathRoute\n").unwrap();
    let out = navdex(&[
        "report",
        "--estimates",
        estimates.to_str().unwrap(),
        "--actuals",
        subs.to_str().unwrap(),
        "--features",
        features.to_str().unwrap(),
        "--out",
        dir.path().join("figs").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1), "{out:?}");
}

#[test]
fn rerun_manifests_match_modulo_wall_time() {
    let dir = tempfile::tempdir().unwrap();
    let recs = dir.path().join("recs");
    synth_into(&recs, 2);

    let read_manifest = |p: &Path| -> serde_json::Value {
        let mut v: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap();
        v.as_object_mut().unwrap().remove("wall_ms");
        v
    };

    let out_a = dir.path().join("fa.csv");
    let out_b = dir.path().join("fb.csv");
    for out in [&out_a, &out_b] {
        assert_ok(
            &navdex(&[
                "features",
                "--in",
                recs.to_str().unwrap(),
                "--out",
                out.to_str().unwrap(),
            ]),
            "features",
        );
    }
    let ma = read_manifest(&out_a.with_file_name("fa.csv.run_manifest.json"));
    let mb = read_manifest(&out_b.with_file_name("fb.csv.run_manifest.json"));
    assert_eq!(ma["inputs"], mb["inputs"]);
    assert_eq!(ma["config"], mb["config"]);
    assert_eq!(ma["command"], mb["command"]);
}
