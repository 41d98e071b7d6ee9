//! HTTP and NDJSON bindings of the session protocol.

use std::sync::Arc;

use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::routing::{get, post};
use axum::{Json, Router};
use lfreason::session::SessionService;
use serde_json::{json, Value};
use tokio::io::{AsyncBufReadExt, AsyncWriteExt, BufReader};
use tokio::net::{TcpListener, TcpStream};

type Svc = Arc<SessionService>;

/// HTTP status for a protocol reply.
pub fn status_of(reply: &Value) -> StatusCode {
    if reply["ok"] == true {
        return StatusCode::OK;
    }
    match reply["error"]["kind"].as_str() {
        Some("unknown_session") | Some("unknown_theorem") => StatusCode::NOT_FOUND,
        Some("bad_request") | Some("parse") | Some("io") => StatusCode::BAD_REQUEST,
        _ => StatusCode::UNPROCESSABLE_ENTITY,
    }
}

async fn dispatch(svc: Svc, req: Value) -> (StatusCode, Json<Value>) {
    let reply = tokio::task::spawn_blocking(move || svc.handle(&req))
        .await
        .unwrap_or_else(|e| json!({ "ok": false, "error": { "kind": "internal", "message": e.to_string() } }));
    (status_of(&reply), Json(reply))
}

/// Merges the path parameters into the body and tags it with `kind`.
fn request(kind: &str, id: Option<String>, body: Option<Json<Value>>) -> Value {
    let mut req = match body {
        Some(Json(Value::Object(m))) => Value::Object(m),
        _ => json!({}),
    };
    req["kind"] = json!(kind);
    if let Some(id) = id {
        req["session"] = json!(id);
    }
    req
}

pub fn router(svc: Svc) -> Router {
    fn on(kind: &'static str) -> axum::routing::MethodRouter<Svc> {
        post(move |State(svc): State<Svc>, Path(id): Path<String>, body: Option<Json<Value>>| {
            dispatch(svc, request(kind, Some(id), body))
        })
    }
    Router::new()
        .route(
            "/session",
            post(|State(svc): State<Svc>, body: Option<Json<Value>>| dispatch(svc, request("create_session", None, body))),
        )
        .route("/session/{id}/start", on("start"))
        .route("/session/{id}/tactic", on("tactic"))
        .route("/session/{id}/undo", on("undo"))
        .route("/session/{id}/ground_check", on("ground_check"))
        .route(
            "/session/{id}/state",
            get(|State(svc): State<Svc>, Path(id): Path<String>| dispatch(svc, request("state", Some(id), None))),
        )
        .with_state(svc)
}

/// Answers one NDJSON line.
pub fn handle_line(svc: &SessionService, line: &str) -> Value {
    match serde_json::from_str::<Value>(line) {
        Ok(req) => svc.handle(&req),
        Err(e) => json!({ "ok": false, "error": { "kind": "bad_request", "message": format!("invalid JSON: {}", e) } }),
    }
}

async fn ndjson_conn(svc: Svc, stream: TcpStream) -> std::io::Result<()> {
    let (r, mut w) = stream.into_split();
    let mut lines = BufReader::new(r).lines();
    while let Some(line) = lines.next_line().await? {
        if line.trim().is_empty() {
            continue;
        }
        let svc = svc.clone();
        let reply = tokio::task::spawn_blocking(move || handle_line(&svc, &line))
            .await
            .map_err(std::io::Error::other)?;
        let mut out = serde_json::to_vec(&reply)?;
        out.push(b'\n');
        w.write_all(&out).await?;
    }
    Ok(())
}

/// Serves NDJSON: one request object per line, one reply per line.
pub async fn serve_ndjson(svc: Svc, listener: TcpListener) -> std::io::Result<()> {
    loop {
        let (stream, _) = listener.accept().await?;
        let svc = svc.clone();
        tokio::spawn(async move {
            let _ = ndjson_conn(svc, stream).await;
        });
    }
}

pub async fn serve_http(svc: Svc, listener: TcpListener) -> std::io::Result<()> {
    axum::serve(listener, router(svc)).await
}
