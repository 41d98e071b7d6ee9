use std::sync::Arc;

use axum::body::Body;
use axum::http::{Method, Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use lfreason::session::SessionService;
use lfreason_cli::server::{handle_line, router, serve_ndjson};
use serde_json::{json, Value};
use tokio::io::{AsyncBufReadExt, AsyncWriteExt, BufReader};
use tower::ServiceExt;

const STLC: &str = include_str!("../../../theories/stlc.lf");
const STLC_BASE: &str = include_str!("../../../theories/stlc_base.lf");
const UNIQ: &str = include_str!("../../../theories/uniq.thm");
const NONTHEOREM: &str = include_str!("../../../theories/nontheorem.thm");

async fn send(app: &Router, method: Method, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let req = Request::builder().method(method).uri(uri);
    let req = match body {
        Some(b) => req.header("content-type", "application/json").body(Body::from(b.to_string())),
        None => req.body(Body::empty()),
    }
    .unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    (status, serde_json::from_slice(&bytes).unwrap())
}

async fn post(app: &Router, uri: &str, body: Value) -> (StatusCode, Value) {
    send(app, Method::POST, uri, Some(body)).await
}

async fn new_session(app: &Router, sig: &str, thm: &str) -> String {
    let (st, r) = post(app, "/session", json!({ "signature": sig, "theorems": thm })).await;
    assert_eq!(st, StatusCode::OK, "{}", r);
    r["session"].as_str().unwrap().to_string()
}

#[tokio::test]
async fn http_session_lifecycle() {
    let app = router(Arc::new(SessionService::new()));
    let id = new_session(&app, STLC, UNIQ).await;
    let base = format!("/session/{}", id);

    let (st, r) = send(&app, Method::GET, &format!("{}/state", base), None).await;
    assert_eq!(st, StatusCode::OK);
    assert_eq!(r["theorems"], json!(["ty_unique"]));

    let (st, r) = post(&app, &format!("{}/start", base), json!({ "theorem": "ty_unique" })).await;
    assert_eq!(st, StatusCode::OK);
    assert_eq!(r["open_goals"], 1);

    for t in ["induction 1.", "intros."] {
        assert_eq!(post(&app, &format!("{}/tactic", base), json!({ "tactic": t })).await.0, StatusCode::OK);
    }
    let (_, before) = send(&app, Method::GET, &format!("{}/state", base), None).await;
    let (_, r) = post(&app, &format!("{}/tactic", base), json!({ "tactic": "case H1." })).await;
    assert_eq!(r["open_goals"], 3);
    assert_eq!(r["last_children"][2]["raising"]["Ty2"], "Ty2 n1 n2");

    let (st, after) = send(&app, Method::POST, &format!("{}/undo", base), None).await;
    assert_eq!(st, StatusCode::OK);
    assert_eq!(after, before);

    let (st, r) = post(&app, &format!("{}/tactic", base), json!({ "tactic": "case H7." })).await;
    assert_eq!(st, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(r["error"]["kind"], "tactic");
}

#[tokio::test]
async fn http_ground_check() {
    let app = router(Arc::new(SessionService::new()));
    let id = new_session(&app, STLC_BASE, NONTHEOREM).await;
    let formula = "forall E T, {|- E : tm} => {|- T : ty} => exists D, {|- D : of E T}";
    let (st, r) = post(&app, &format!("/session/{}/ground_check", id), json!({ "formula": formula, "bound": 4 })).await;
    assert_eq!(st, StatusCode::OK, "{}", r);
    assert_eq!(r["result"]["verdict"], "false");
}

#[tokio::test]
async fn http_errors() {
    let app = router(Arc::new(SessionService::new()));
    let (st, r) = send(&app, Method::GET, "/session/nope/state", None).await;
    assert_eq!(st, StatusCode::NOT_FOUND);
    assert_eq!(r["error"]["kind"], "unknown_session");
    let (st, r) = post(&app, "/session", json!({ "signature": "ty : type", "theorems": "" })).await;
    assert_eq!(st, StatusCode::BAD_REQUEST);
    assert_eq!(r["error"]["kind"], "parse");
    let id = new_session(&app, STLC, UNIQ).await;
    let (st, r) = post(&app, &format!("/session/{}/start", id), json!({ "theorem": "nope" })).await;
    assert_eq!(st, StatusCode::NOT_FOUND);
    assert_eq!(r["error"]["kind"], "unknown_theorem");
    let (st, r) = post(&app, &format!("/session/{}/tactic", id), json!({})).await;
    assert_eq!(st, StatusCode::BAD_REQUEST);
    assert_eq!(r["error"]["kind"], "bad_request");
}

#[test]
fn ndjson_rejects_malformed_lines() {
    let svc = SessionService::new();
    assert_eq!(handle_line(&svc, "{nope")["error"]["kind"], "bad_request");
    assert_eq!(handle_line(&svc, "{\"kind\":\"state\",\"session\":\"x\"}")["error"]["kind"], "unknown_session");
}

#[tokio::test]
async fn ndjson_over_tcp() {
    let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
    let addr = listener.local_addr().unwrap();
    tokio::spawn(serve_ndjson(Arc::new(SessionService::new()), listener));

    let stream = tokio::net::TcpStream::connect(addr).await.unwrap();
    let (r, mut w) = stream.into_split();
    let mut lines = BufReader::new(r).lines();
    let mut call = async |req: Value| {
        w.write_all(format!("{}\n", req).as_bytes()).await.unwrap();
        serde_json::from_str::<Value>(&lines.next_line().await.unwrap().unwrap()).unwrap()
    };
    let r = call(json!({ "kind": "create_session", "signature": STLC, "theorems": UNIQ })).await;
    let id = r["session"].clone();
    let r = call(json!({ "kind": "start", "session": id, "theorem": "ty_unique" })).await;
    assert_eq!(r["ok"], true);
    let r = call(json!({ "kind": "tactic", "session": id, "tactic": "induction 1." })).await;
    assert_eq!(r["script"], json!(["induction 1"]));
    let r = call(json!({ "kind": "undo", "session": id })).await;
    assert_eq!(r["script"], json!([]));
}
