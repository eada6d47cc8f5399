use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn attnlab(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_attnlab"))
        .args(args)
        .current_dir(cwd)
        .output()
        .unwrap()
}

fn ok_json(args: &[&str], cwd: &Path) -> Value {
    let out = attnlab(args, cwd);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn write(dir: &Path, name: &str, body: &str) {
    std::fs::write(dir.join(name), body).unwrap();
}

#[test]
fn cost_multiplies_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let v = ok_json(&["cost", "--participants", "15", "--price", "$0.03"], dir.path());
    assert_eq!(v["cost_per_image"], "$0.45");
    let out = attnlab(&["cost", "--participants", "3", "--price", "abc"], dir.path());
    assert!(!out.status.success());
}

#[test]
fn codechart_gen_is_seeded_and_renders() {
    let dir = tempfile::tempdir().unwrap();
    let a = ok_json(&["--seed", "9", "codechart", "gen", "--id", "c1"], dir.path());
    let b = ok_json(&["--seed", "9", "codechart", "gen", "--id", "c1"], dir.path());
    assert_eq!(a, b);
    let c = ok_json(&["--seed", "10", "codechart", "gen", "--id", "c1"], dir.path());
    assert_ne!(a["placements"], c["placements"]);

    let out = attnlab(
        &["codechart", "gen", "--id", "v1", "--cue", "500,350", "--out", "v1.json"],
        dir.path(),
    );
    assert!(out.status.success());
    let chart: Value = serde_json::from_slice(&std::fs::read(dir.path().join("v1.json")).unwrap()).unwrap();
    assert!(!chart["validation"]["correct_codes"].as_array().unwrap().is_empty());
    let out = attnlab(&["codechart", "render", "--chart", "v1.json", "--out", "v1.png"], dir.path());
    assert!(out.status.success());
    assert_eq!(&std::fs::read(dir.path().join("v1.png")).unwrap()[1..4], b"PNG");
}

#[test]
fn fixation_heatmap_metrics_and_ioc() {
    let dir = tempfile::tempdir().unwrap();
    let mut fix = String::from("participant_id,x,y\n");
    for p in 0..6 {
        for k in 0..5 {
            fix.push_str(&format!("p{p},{},{}\n", 20 + 3 * k + p, 30 + 2 * k));
        }
    }
    write(dir.path(), "fix.csv", &fix);
    let v = ok_json(
        &["heatmap", "--fixations", "fix.csv", "--width", "80", "--height", "60", "--stimulus", "img", "--out", "maps"],
        dir.path(),
    );
    assert!(v["csv"].as_str().unwrap().ends_with("img.eyetracking.csv"));

    let m = ok_json(
        &[
            "metrics",
            "--heatmap",
            "maps/img.eyetracking.csv",
            "--reference",
            "maps/img.eyetracking.csv",
            "--fixations",
            "fix.csv",
        ],
        dir.path(),
    );
    assert!((m["cc"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert!(m["nss"].as_f64().unwrap() > 0.5, "{m}");

    let ioc = ok_json(
        &["ioc", "--fixations", "fix.csv", "--width", "80", "--height", "60", "--splits", "4"],
        dir.path(),
    );
    assert_eq!(ioc["ioc_cc_per_split"].as_array().unwrap().len(), 4);
    assert!(ioc["ioc_nss"].as_f64().unwrap() > 0.0);

    let out = attnlab(&["metrics", "--heatmap", "maps/img.eyetracking.csv"], dir.path());
    assert!(!out.status.success());
}

#[test]
fn rank_elements_orders_by_heatmap_peak() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "map.csv", "0,0,0,0\n0,9,0,0\n0,0,0,2\n");
    write(dir.path(), "flat.csv", "0,0,0,0\n0,1,0,0\n0,0,0,5\n");
    write(
        dir.path(),
        "stimuli.json",
        r#"[{"id":"d","width_px":4,"height_px":3,"kind":"graphic_design","elements":[
            {"id":"logo","shape":{"type":"rect","x":1,"y":1,"w":1,"h":1}},
            {"id":"text","shape":{"type":"rect","x":3,"y":2,"w":1,"h":1}}]}]"#,
    );
    let v = ok_json(
        &["rank-elements", "--heatmap", "map.csv", "--stimuli", "stimuli.json", "--stimulus", "d", "--against", "flat.csv"],
        dir.path(),
    );
    assert_eq!(v["scores"][0]["score"], 9.0);
    assert_eq!(v["scores"][1]["score"], 2.0);
    assert_eq!(v["spearman"], -1.0);
}

#[test]
fn simulate_validate_and_saturation() {
    let dir = tempfile::tempdir().unwrap();
    write(
        dir.path(),
        "scenario.json",
        r#"{"seed": 3, "interface": "bubbleview",
            "cohorts": [{"count": 8, "behavior": {}}, {"count": 1, "behavior": {"clicks_per_image": 1}}],
            "stimuli": [{"id": "s1", "width_px": 120, "height_px": 90, "kind": "natural",
                         "ground_truth": {"type": "mixture", "components": [{"x": 40, "y": 40, "sigma": 10, "weight": 1}]}}]}"#,
    );
    let sim = ok_json(&["simulate", "--scenario", "scenario.json", "--out", "store"], dir.path());
    assert_eq!(sim["participants"], 9);

    let out = attnlab(&["validate", "bubbleview", "--logs", "store"], dir.path());
    assert!(out.status.success());
    let verdicts: Vec<Value> = String::from_utf8(out.stdout)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(verdicts.len(), 9);
    assert_eq!(verdicts[8]["participant_id"], "p008");
    assert_eq!(verdicts[8]["passed"], false);
    let table = String::from_utf8(out.stderr).unwrap();
    assert!(table.contains("8/9 participants pass"), "{table}");

    let v = ok_json(
        &["heatmap", "--store", "store", "--interface", "bubbleview", "--stimulus", "s1", "--out", "maps"],
        dir.path(),
    );
    assert_eq!(v["summary"]["used"], 8);
    let sat = ok_json(
        &[
            "saturation",
            "--store",
            "store",
            "--interface",
            "bubbleview",
            "--stimulus",
            "s1",
            "--reference",
            "maps/s1.bubbleview.csv",
            "--resamples",
            "3",
        ],
        dir.path(),
    );
    assert_eq!(sat["participants"], 8);
    let n = sat["saturation_point"].as_u64().unwrap();
    assert!((1..=8).contains(&n));

    let again = attnlab(&["simulate", "--scenario", "scenario.json", "--out", "store"], dir.path());
    assert!(!again.status.success(), "an existing store must not be overwritten");
}

#[test]
fn config_file_changes_the_verdicts() {
    let dir = tempfile::tempdir().unwrap();
    write(
        dir.path(),
        "scenario.json",
        r#"{"seed": 4, "interface": "bubbleview", "cohorts": [{"count": 3, "behavior": {"clicks_per_image": 3}}],
            "stimuli": [{"id": "s1", "width_px": 60, "height_px": 60, "kind": "natural", "ground_truth": {"type": "uniform"}}]}"#,
    );
    write(dir.path(), "strict.json", r#"{"validation": {"bubbleview": {"min_clicks_per_image_free_view": 5}}}"#);
    ok_json(&["simulate", "--scenario", "scenario.json", "--out", "store"], dir.path());
    let lenient = attnlab(&["validate", "bubbleview", "--logs", "store"], dir.path());
    let strict = attnlab(&["--config", "strict.json", "validate", "bubbleview", "--logs", "store"], dir.path());
    let passes = |o: &Output| {
        String::from_utf8_lossy(&o.stdout)
            .lines()
            .filter(|l| serde_json::from_str::<Value>(l).unwrap()["passed"] == true)
            .count()
    };
    assert_eq!(passes(&lenient), 3);
    assert_eq!(passes(&strict), 0);

    write(dir.path(), "bad.json", r#"{"validation": {"importannots": {"min_iou": 1.5}}}"#);
    let out = attnlab(&["--config", "bad.json", "cost", "--participants", "1", "--price", "1"], dir.path());
    assert!(!out.status.success());
}
