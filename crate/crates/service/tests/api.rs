use axum::body::Body;
use axum::http::{Method, Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

use twinmat_core::fixtures::{fixture, SCORED_FIXTURES};
use twinmat_core::Workspace;
use twinmat_service::{router, serve, AppState, ServiceConfig};

struct Harness {
    _dir: tempfile::TempDir,
    app: Router,
}

fn harness() -> Harness {
    let dir = tempfile::tempdir().unwrap();
    let ws = Workspace::open_writer(dir.path()).unwrap();
    Harness {
        app: router(AppState::new(ws)),
        _dir: dir,
    }
}

impl Harness {
    async fn call(&self, method: Method, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
        let req = Request::builder().method(method).uri(uri);
        let req = match body {
            Some(b) => req
                .header("content-type", "application/json")
                .body(Body::from(b.to_string())),
            None => req.body(Body::empty()),
        }
        .unwrap();
        let resp = self.app.clone().oneshot(req).await.unwrap();
        let status = resp.status();
        let bytes = resp.into_body().collect().await.unwrap().to_bytes();
        let value = if bytes.is_empty() {
            Value::Null
        } else {
            serde_json::from_slice(&bytes).unwrap()
        };
        (status, value)
    }

    async fn store(&self, name: &str) -> String {
        let body = serde_json::to_value(fixture(name).unwrap()).unwrap();
        let (status, stored) = self
            .call(Method::POST, "/api/v1/assessments", Some(body))
            .await;
        assert_eq!(status, StatusCode::CREATED, "{stored}");
        stored["id"].as_str().unwrap().to_owned()
    }
}

#[tokio::test]
async fn models_include_builtin() {
    let h = harness();
    let (status, body) = h.call(Method::GET, "/api/v1/models", None).await;
    assert_eq!(status, StatusCode::OK);
    assert!(body
        .as_array()
        .unwrap()
        .iter()
        .any(|m| m["id"] == "dt-maturity-4d" && m["version"] == "1.0.0"));

    let (status, body) = h
        .call(Method::GET, "/api/v1/models/dt-maturity-4d/1.0.0", None)
        .await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["dimensions"].as_array().unwrap().len(), 4);
}

#[tokio::test]
async fn unknown_model_is_404_with_code_and_path() {
    let h = harness();
    let (status, body) = h.call(Method::GET, "/api/v1/models/nope/9.9.9", None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_eq!(body["code"], "UnknownModel");
    assert_eq!(body["status"], 404);
    assert_eq!(body["path"], "/api/v1/models/nope/9.9.9");
}

#[tokio::test]
async fn healthz_reports_registry_size() {
    let h = harness();
    let (status, body) = h.call(Method::GET, "/healthz", None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body, json!({ "status": "ok", "models": 1 }));
}

#[tokio::test]
async fn score_appends_history() {
    let h = harness();
    let id = h.store("google-map").await;
    let (status, report) = h
        .call(
            Method::POST,
            &format!("/api/v1/assessments/{id}/score"),
            None,
        )
        .await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(report["overall"]["rational"], "85/132");
    assert_eq!(report["overall"]["value"], "0.643939393939");

    h.call(
        Method::POST,
        &format!("/api/v1/assessments/{id}/score?rounding=display2dp"),
        None,
    )
    .await;
    let (_, hist) = h
        .call(
            Method::GET,
            &format!("/api/v1/assessments/{id}/history"),
            None,
        )
        .await;
    let hist = hist.as_array().unwrap();
    assert_eq!(hist.len(), 2);
    assert_eq!(hist[0]["assessment_id"], id.as_str());
    assert_eq!(hist[1]["rounding_policy"], "Display2dp");
}

#[tokio::test]
async fn all_fixture_scores_round_trip_through_the_store() {
    let h = harness();
    for name in SCORED_FIXTURES {
        let id = h.store(name).await;
        let (_, got) = h
            .call(Method::GET, &format!("/api/v1/assessments/{id}"), None)
            .await;
        let mut expected = fixture(name).unwrap();
        expected.id = Some(id.clone());
        assert_eq!(
            serde_json::from_value::<twinmat_core::Assessment>(got).unwrap(),
            expected
        );
    }
    let (_, list) = h.call(Method::GET, "/api/v1/assessments", None).await;
    assert_eq!(list.as_array().unwrap().len(), SCORED_FIXTURES.len());
    let (_, one) = h
        .call(
            Method::GET,
            "/api/v1/assessments?subject=Tesla%20vehicle",
            None,
        )
        .await;
    assert_eq!(one.as_array().unwrap().len(), 1);
}

#[tokio::test]
async fn gate_refusal_blocks_scoring() {
    let h = harness();
    let id = h.store("living-heart").await;
    let (status, body) = h
        .call(
            Method::POST,
            &format!("/api/v1/assessments/{id}/score"),
            None,
        )
        .await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(body["code"], "GateRefusal");
    assert_eq!(body["details"]["taxonomy"], "DigitalModel");
    let (_, hist) = h
        .call(
            Method::GET,
            &format!("/api/v1/assessments/{id}/history"),
            None,
        )
        .await;
    assert_eq!(hist, json!([]));
}

#[tokio::test]
async fn gate_endpoint_returns_verdict() {
    let h = harness();
    let answers = fixture("monitoring-shadow").unwrap().gate_answers;
    let (status, body) = h
        .call(
            Method::POST,
            "/api/v1/gate",
            Some(json!({ "answers": answers })),
        )
        .await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["verdict"]["taxonomy"], "DigitalShadow");
    assert_eq!(body["verdict"]["passed"], false);
    assert!(body["report"].as_str().unwrap().starts_with("REFUSED"));

    let (status, body) = h
        .call(Method::POST, "/api/v1/gate", Some(json!({ "answers": {} })))
        .await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(body["code"], "IncompleteChecklist");
}

#[tokio::test]
async fn whatif_never_persists() {
    let h = harness();
    let id = h.store("lu2020").await;
    let (status, body) = h
        .call(
            Method::POST,
            "/api/v1/whatif",
            Some(json!({ "assessment_id": id })),
        )
        .await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["delta_L"]["value"], "0");

    let req = json!({ "assessment_id": id, "overrides": { "levels": { "Lc": 2 } } });
    let (_, first) = h
        .call(Method::POST, "/api/v1/whatif", Some(req.clone()))
        .await;
    let (_, second) = h.call(Method::POST, "/api/v1/whatif", Some(req)).await;
    assert_eq!(first, second);
    assert_eq!(first["delta_L"]["rational"], "4/45");

    let (_, stored) = h
        .call(Method::GET, &format!("/api/v1/assessments/{id}"), None)
        .await;
    assert_eq!(stored["levels"]["Lc"], 1);
    let (_, hist) = h
        .call(
            Method::GET,
            &format!("/api/v1/assessments/{id}/history"),
            None,
        )
        .await;
    assert_eq!(hist, json!([]));
}

#[tokio::test]
async fn whatif_accepts_inline_assessment() {
    let h = harness();
    let a = serde_json::to_value(fixture("tesla").unwrap()).unwrap();
    let (status, body) = h
        .call(
            Method::POST,
            "/api/v1/whatif",
            Some(json!({ "assessment": a, "overrides": { "weight_scores": { "Cap": 1 } } })),
        )
        .await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["base_overall"]["rational"], "29/42");
}

#[tokio::test]
async fn compare_ranks_stored_assessments() {
    let h = harness();
    let g = h.store("google-map").await;
    let t = h.store("tesla").await;
    let (status, body) = h
        .call(Method::GET, &format!("/api/v1/compare?ids={g},{t}"), None)
        .await;
    assert_eq!(status, StatusCode::OK, "{body}");
    let ranking = body["ranking"].as_array().unwrap();
    assert_eq!(ranking[0]["subject"], t.as_str());
    assert_eq!(ranking[0]["rank"], 1);

    let (status, body) = h.call(Method::GET, "/api/v1/compare", None).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(body["code"], "BadRequest");
}

#[tokio::test]
async fn malformed_and_missing_inputs() {
    let h = harness();
    let req = Request::builder()
        .method(Method::POST)
        .uri("/api/v1/assessments")
        .body(Body::from("{\n  \"subject\": "))
        .unwrap();
    let resp = h.app.clone().oneshot(req).await.unwrap();
    assert_eq!(resp.status(), StatusCode::BAD_REQUEST);
    let body: Value =
        serde_json::from_slice(&resp.into_body().collect().await.unwrap().to_bytes()).unwrap();
    assert_eq!(body["code"], "ParseError");
    assert_eq!(body["details"]["line"], 2);

    let (status, body) = h
        .call(
            Method::GET,
            "/api/v1/assessments/01ARZ3NDEKTSV4RRFFQ69G5FAV",
            None,
        )
        .await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_eq!(body["code"], "NotFound");

    let mut bad = serde_json::to_value(fixture("tesla").unwrap()).unwrap();
    bad["levels"]["Cor"] = json!(3);
    bad["levels"]["Cap"] = json!(9);
    let (status, body) = h.call(Method::POST, "/api/v1/assessments", Some(bad)).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(body["code"], "DomainError");

    let (status, body) = h.call(Method::GET, "/api/v1/nothing-here", None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_eq!(body["path"], "/api/v1/nothing-here");

    let (status, _) = h
        .call(Method::GET, "/api/v1/assessments?model=no-at-sign", None)
        .await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
}

#[tokio::test]
async fn create_fills_defaults() {
    let h = harness();
    let mut a = serde_json::to_value(fixture("tesla").unwrap()).unwrap();
    let obj = a.as_object_mut().unwrap();
    obj.remove("timestamp");
    obj.remove("model_ref");
    let (status, body) = h.call(Method::POST, "/api/v1/assessments", Some(a)).await;
    assert_eq!(status, StatusCode::CREATED);
    assert_eq!(body["model_ref"]["id"], "dt-maturity-4d");
    assert!(body["timestamp"].is_string());
}

#[tokio::test]
async fn serve_binds_and_shuts_down() {
    let dir = tempfile::tempdir().unwrap();
    let ws = Workspace::open_writer(dir.path()).unwrap();
    let handle = serve(ws, "127.0.0.1:0".parse().unwrap(), ServiceConfig::default())
        .await
        .unwrap();
    assert_ne!(handle.local_addr().port(), 0);
    handle.shutdown().await.unwrap();

    // lock released with the workspace, so a second writer can open it
    Workspace::open_writer(dir.path()).unwrap();

    let reader = Workspace::open(dir.path()).unwrap();
    let err = serve(
        reader,
        "127.0.0.1:0".parse().unwrap(),
        ServiceConfig::default(),
    )
    .await
    .err()
    .unwrap();
    assert!(err.to_string().contains("read-only"));
}

#[tokio::test]
async fn serve_dir_refuses_a_locked_workspace() {
    let dir = tempfile::tempdir().unwrap();
    let _held = Workspace::open_writer(dir.path()).unwrap();
    let err = twinmat_service::serve_dir(
        dir.path(),
        "127.0.0.1:0".parse().unwrap(),
        ServiceConfig::default(),
    )
    .await
    .err()
    .unwrap();
    assert!(matches!(
        err,
        twinmat_service::ServeError::Workspace(twinmat_core::Error::LockHeld(_))
    ));
}

#[tokio::test]
async fn static_bundle_is_served_under_root() {
    let dir = tempfile::tempdir().unwrap();
    let ui = tempfile::tempdir().unwrap();
    std::fs::write(ui.path().join("index.html"), "<html>ui</html>").unwrap();
    let ws = Workspace::open_writer(dir.path()).unwrap();
    let app = twinmat_service::router_with(
        AppState::new(ws),
        &ServiceConfig {
            static_dir: Some(ui.path().to_owned()),
        },
    );
    let resp = app
        .oneshot(
            Request::builder()
                .uri("/index.html")
                .body(Body::empty())
                .unwrap(),
        )
        .await
        .unwrap();
    assert_eq!(resp.status(), StatusCode::OK);
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    assert_eq!(&bytes[..], b"<html>ui</html>");
}
