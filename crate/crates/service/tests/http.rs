use std::sync::Arc;

use attnlab_core::heatmaps::{bubbleview_heatmap, BubbleTask};
use attnlab_core::{AttentionHeatmap, Stimulus, StimulusKind};
use attnlab_service::http::{router, CONFIG_HASH_HEADER, SUMMARY_HEADER};
use attnlab_service::wire::{BubbleViewPayload, ClickEvent};
use attnlab_service::{Payload, ResultsReport, ServiceConfig, Store, TaskAssignment};
use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use serde_json::Value;
use tempfile::TempDir;
use tower::ServiceExt;

struct Fixture {
    _dir: TempDir,
    store: Arc<Store>,
    app: Router,
}

fn fixture() -> Fixture {
    let dir = tempfile::tempdir().unwrap();
    let mut stimuli = vec![
        Stimulus::new("a", 200, 100, StimulusKind::Natural),
        Stimulus::new("b", 200, 100, StimulusKind::Natural),
    ];
    let mut cue = Stimulus::new("v", 200, 100, StimulusKind::Validation);
    cue.cue = Some(attnlab_core::Point::new(50.0, 50.0));
    stimuli.push(cue);
    let store = Arc::new(Store::create(dir.path().join("store"), &stimuli).unwrap());
    let app = router(store.clone(), ServiceConfig::default());
    Fixture { _dir: dir, store, app }
}

async fn send(app: &Router, req: Request<Body>) -> (StatusCode, axum::http::HeaderMap, Vec<u8>) {
    let res = app.clone().oneshot(req).await.unwrap();
    let status = res.status();
    let headers = res.headers().clone();
    let body = res.into_body().collect().await.unwrap().to_bytes().to_vec();
    (status, headers, body)
}

fn get(uri: &str) -> Request<Body> {
    Request::get(uri).body(Body::empty()).unwrap()
}

fn post_json(uri: &str, body: &impl serde::Serialize) -> Request<Body> {
    Request::post(uri)
        .header("content-type", "application/json")
        .body(Body::from(serde_json::to_vec(body).unwrap()))
        .unwrap()
}

async fn bubble_assignment(app: &Router, participant: &str) -> TaskAssignment {
    let (status, _, body) = send(app, get(&format!("/assignments/bubbleview?participant_id={participant}"))).await;
    assert_eq!(status, StatusCode::OK);
    serde_json::from_slice(&body).unwrap()
}

fn clicks(n: usize, x0: f64) -> Vec<ClickEvent> {
    (0..n)
        .map(|i| ClickEvent {
            t_ms: 100.0 * i as f64,
            x: x0 + 3.0 * i as f64,
            y: 40.0 + i as f64,
        })
        .collect()
}

fn bubble(a: &TaskAssignment, participant: &str, stimulus: &str, clicks: Vec<ClickEvent>) -> Payload {
    Payload::Bubbleview(BubbleViewPayload {
        assignment_id: a.assignment_id.clone(),
        participant_id: participant.into(),
        submission_id: format!("{participant}-{stimulus}"),
        stimulus_id: stimulus.into(),
        clicks,
        description: None,
        task: BubbleTask::FreeView,
    })
}

/// Submits `n` clicks on both stimuli for a participant.
async fn submit_participant(app: &Router, participant: &str, n: usize, x0: f64) {
    let a = bubble_assignment(app, participant).await;
    for s in ["a", "b"] {
        let (status, _, body) = send(app, post_json("/logs", &bubble(&a, participant, s, clicks(n, x0)))).await;
        assert_eq!(status, StatusCode::CREATED, "{}", String::from_utf8_lossy(&body));
    }
}

async fn results(app: &Router, stimulus: &str) -> (StatusCode, Vec<u8>) {
    let (status, _, body) = send(app, get(&format!("/results/bubbleview/{stimulus}"))).await;
    (status, body)
}

#[tokio::test]
async fn assignment_carries_config_hash_and_is_registered() {
    let f = fixture();
    let (status, headers, body) = send(&f.app, get("/assignments/bubbleview?seed=4")).await;
    assert_eq!(status, StatusCode::OK);
    let hash = ServiceConfig::default().hash();
    assert_eq!(headers[CONFIG_HASH_HEADER], hash.as_str());
    let a: TaskAssignment = serde_json::from_slice(&body).unwrap();
    assert_eq!(a.config_hash, hash);
    assert_eq!(a.trials.len(), 2);
    assert!(f.store.assignment(&a.assignment_id).is_some());
}

#[tokio::test]
async fn unknown_interface_is_not_found() {
    let f = fixture();
    let (status, _, _) = send(&f.app, get("/assignments/eyetracker")).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn duplicate_submission_leaves_store_unchanged() {
    let f = fixture();
    let a = bubble_assignment(&f.app, "p1").await;
    let payload = bubble(&a, "p1", "a", clicks(4, 20.0));
    let (status, _, _) = send(&f.app, post_json("/logs", &payload)).await;
    assert_eq!(status, StatusCode::CREATED);
    let log = f.store.root().join("logs/bubbleview.jsonl");
    let before = std::fs::read(&log).unwrap();
    let (status, _, body) = send(&f.app, post_json("/logs", &payload)).await;
    assert_eq!(status, StatusCode::OK);
    let v: Value = serde_json::from_slice(&body).unwrap();
    assert_eq!(v["status"], "duplicate");
    assert_eq!(std::fs::read(&log).unwrap(), before);
}

#[tokio::test]
async fn out_of_image_click_names_the_field() {
    let f = fixture();
    let a = bubble_assignment(&f.app, "p1").await;
    let mut c = clicks(3, 20.0);
    c[1].x = 250.0;
    let (status, _, body) = send(&f.app, post_json("/logs", &bubble(&a, "p1", "a", c))).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    let v: Value = serde_json::from_slice(&body).unwrap();
    assert_eq!(v["path"], "clicks[1].x");
    assert!(!f.store.root().join("logs/bubbleview.jsonl").exists());
}

#[tokio::test]
async fn schema_errors_carry_a_path() {
    let f = fixture();
    let a = bubble_assignment(&f.app, "p1").await;
    let mut v = serde_json::to_value(bubble(&a, "p1", "a", clicks(2, 20.0))).unwrap();
    v["clicks"][1]["y"] = Value::String("high".into());
    let (status, _, body) = send(&f.app, post_json("/logs", &v)).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    let err: Value = serde_json::from_slice(&body).unwrap();
    assert_eq!(err["path"], "clicks[1].y");
}

#[tokio::test]
async fn unknown_assignment_and_foreign_stimulus_rejected() {
    let f = fixture();
    let a = bubble_assignment(&f.app, "p1").await;
    let mut stray = a.clone();
    stray.assignment_id = "nope".into();
    let (status, _, _) = send(&f.app, post_json("/logs", &bubble(&stray, "p1", "a", clicks(2, 20.0)))).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    let (status, _, body) = send(&f.app, post_json("/logs", &bubble(&a, "p1", "v", clicks(2, 20.0)))).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    let err: Value = serde_json::from_slice(&body).unwrap();
    assert_eq!(err["path"], "stimulus_id");
}

#[tokio::test]
async fn all_failing_participants_yield_no_qualifying_data() {
    let f = fixture();
    for p in ["p1", "p2"] {
        submit_participant(&f.app, p, 1, 20.0).await;
    }
    let (status, body) = results(&f.app, "a").await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    let err: Value = serde_json::from_slice(&body).unwrap();
    assert_eq!(err["error"], "no qualifying data");
}

#[tokio::test]
async fn failing_participant_does_not_change_the_heatmap() {
    let f = fixture();
    for (i, p) in ["p1", "p2", "p3", "p4", "p5"].into_iter().enumerate() {
        submit_participant(&f.app, p, 5, 20.0 + 10.0 * i as f64).await;
    }
    let (status, body) = results(&f.app, "a").await;
    assert_eq!(status, StatusCode::OK);
    let before: ResultsReport = serde_json::from_slice(&body).unwrap();

    submit_participant(&f.app, "p6", 1, 150.0).await;
    let (_, body) = results(&f.app, "a").await;
    let after: ResultsReport = serde_json::from_slice(&body).unwrap();
    assert_eq!(after.summary.submitted, 6);
    assert_eq!(after.summary.passed, 5);
    assert_eq!(after.summary.used, 5);
    let bits = |m: &AttentionHeatmap| m.values.as_slice().iter().map(|v| v.to_bits()).collect::<Vec<_>>();
    assert_eq!(bits(&before.heatmap), bits(&after.heatmap));
}

#[tokio::test]
async fn mixed_cohort_matches_direct_heatmap_of_passing_participants() {
    let f = fixture();
    for (i, p) in ["p1", "p2", "p3", "p4"].into_iter().enumerate() {
        submit_participant(&f.app, p, 6, 30.0 + 15.0 * i as f64).await;
    }
    submit_participant(&f.app, "bad", 1, 10.0).await;
    let (_, body) = results(&f.app, "b").await;
    let report: ResultsReport = serde_json::from_slice(&body).unwrap();
    let failed: Vec<_> = report.summary.verdicts.iter().filter(|v| !v.passed).collect();
    assert_eq!(failed.len(), 1);
    assert_eq!(failed[0].participant_id, "bad");

    let sessions: Vec<_> = f
        .store
        .logs(attnlab_core::quality::Interface::Bubbleview)
        .unwrap()
        .into_iter()
        .filter_map(|e| match e.payload {
            Payload::Bubbleview(p) if p.participant_id != "bad" && p.stimulus_id == "b" => Some(p.to_session()),
            _ => None,
        })
        .collect();
    let direct = bubbleview_heatmap(&sessions, &f.store.stimulus("b").unwrap(), 30.0).unwrap();
    assert_eq!(report.heatmap, direct);
}

#[tokio::test]
async fn results_negotiate_csv_and_png() {
    let f = fixture();
    for (i, p) in ["p1", "p2"].into_iter().enumerate() {
        submit_participant(&f.app, p, 4, 40.0 + 20.0 * i as f64).await;
    }
    let req = Request::get("/results/bubbleview/a").header("accept", "text/csv").body(Body::empty()).unwrap();
    let (status, headers, body) = send(&f.app, req).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(headers["content-type"], "text/csv");
    let summary: Value = serde_json::from_slice(headers[SUMMARY_HEADER].as_bytes()).unwrap();
    assert_eq!(summary["used"], 2);
    let grid = attnlab_core::io::read_grid_csv(body.as_slice()).unwrap();
    assert_eq!(grid.dims(), (200, 100));

    let req = Request::get("/results/bubbleview/a").header("accept", "image/png").body(Body::empty()).unwrap();
    let (_, headers, body) = send(&f.app, req).await;
    assert_eq!(headers["content-type"], "image/png");
    assert_eq!(&body[1..4], b"PNG");
}

#[tokio::test]
async fn charts_served_as_json_and_png() {
    let f = fixture();
    let (_, _, body) = send(&f.app, get("/assignments/codecharts?seed=1")).await;
    let a: TaskAssignment = serde_json::from_slice(&body).unwrap();
    let id = a.trials[0].params.chart_id.clone().unwrap();
    let (status, _, body) = send(&f.app, get(&format!("/charts/{id}"))).await;
    assert_eq!(status, StatusCode::OK);
    let chart: attnlab_core::codecharts::CodeChart = serde_json::from_slice(&body).unwrap();
    assert_eq!(chart.chart_id, id);
    let req = Request::get(format!("/charts/{id}")).header("accept", "image/png").body(Body::empty()).unwrap();
    let (_, headers, _) = send(&f.app, req).await;
    assert_eq!(headers["content-type"], "image/png");
    let (status, _, _) = send(&f.app, get("/charts/missing")).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn stimulus_images_are_served_from_the_store() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path().join("store");
    let mut s = Stimulus::new("a", 4, 4, StimulusKind::Natural);
    s.image_path = Some("images/a.png".into());
    let store = Arc::new(Store::create(&root, &[s]).unwrap());
    std::fs::create_dir_all(root.join("images")).unwrap();
    std::fs::write(root.join("images/a.png"), b"\x89PNG fake").unwrap();
    let app = router(store, ServiceConfig::default());
    let (status, headers, body) = send(&app, get("/stimuli/a")).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(headers["content-type"], "image/png");
    assert_eq!(body, b"\x89PNG fake");
    let (status, _, _) = send(&app, get("/stimuli/zzz")).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
}
