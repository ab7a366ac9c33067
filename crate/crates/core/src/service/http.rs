//! HTTP/1.1 front end for [`super::api::respond`].

use std::future::Future;
use std::sync::{Arc, RwLock};

use axum::body::Body;
use axum::extract::State;
use axum::http::{header, HeaderValue, Method, Request, StatusCode};
use axum::response::Response;
use axum::Router;
use tokio::net::TcpListener;

use super::api::respond;
use crate::runstore::RunSnapshot;

/// The snapshot being served. Replacing it is a pointer swap: requests
/// already running keep the `Arc` they started with.
#[derive(Debug)]
pub struct SnapshotHandle {
    inner: RwLock<Arc<RunSnapshot>>,
}

impl SnapshotHandle {
    pub fn new(snapshot: RunSnapshot) -> Self {
        SnapshotHandle {
            inner: RwLock::new(Arc::new(snapshot)),
        }
    }

    pub fn current(&self) -> Arc<RunSnapshot> {
        Arc::clone(&self.inner.read().unwrap_or_else(|e| e.into_inner()))
    }

    pub fn replace(&self, snapshot: RunSnapshot) {
        *self.inner.write().unwrap_or_else(|e| e.into_inner()) = Arc::new(snapshot);
    }
}

#[derive(Clone)]
struct AppState {
    snapshot: Arc<SnapshotHandle>,
    cors_origin: Option<HeaderValue>,
}

/// Every request goes to the API router; `cors_origin` (e.g. the
/// dashboard's `http://localhost:5173`) is echoed in
/// `Access-Control-Allow-Origin`.
pub fn router(snapshot: Arc<SnapshotHandle>, cors_origin: Option<&str>) -> Result<Router, String> {
    let cors_origin = cors_origin
        .map(|o| HeaderValue::from_str(o).map_err(|_| format!("invalid CORS origin `{o}`")))
        .transpose()?;
    Ok(Router::new().fallback(handle).with_state(AppState { snapshot, cors_origin }))
}

async fn handle(State(state): State<AppState>, req: Request<Body>) -> Response {
    let snap = state.snapshot.current();
    let etag = format!("\"{}\"", snap.run_id);
    let mut builder = Response::builder()
        .header(header::ETAG, &etag)
        .header(header::CACHE_CONTROL, "no-cache");
    if let Some(origin) = &state.cors_origin {
        builder = builder
            .header(header::ACCESS_CONTROL_ALLOW_ORIGIN, origin)
            .header(header::VARY, "Origin");
    }
    if req.method() == Method::OPTIONS && state.cors_origin.is_some() {
        return builder
            .status(StatusCode::NO_CONTENT)
            .header(header::ACCESS_CONTROL_ALLOW_METHODS, "GET, HEAD, OPTIONS")
            .header(header::ACCESS_CONTROL_ALLOW_HEADERS, "If-None-Match")
            .body(Body::empty())
            .expect("static headers are valid");
    }
    let fresh = req
        .headers()
        .get(header::IF_NONE_MATCH)
        .and_then(|v| v.to_str().ok())
        .is_some_and(|v| v.split(',').any(|t| t.trim() == etag || t.trim() == "*"));
    let method = req.method().as_str().to_string();
    let target = req
        .uri()
        .path_and_query()
        .map_or_else(|| req.uri().path().to_string(), |pq| pq.as_str().to_string());
    let worker = Arc::clone(&snap);
    let resp = match tokio::task::spawn_blocking(move || respond(&worker, &method, &target)).await {
        Ok(r) => r,
        Err(e) => {
            log::error!("request handler panicked: {e}");
            return builder
                .status(StatusCode::INTERNAL_SERVER_ERROR)
                .body(Body::empty())
                .expect("static headers are valid");
        }
    };
    if resp.status == 200 && fresh {
        return builder
            .status(StatusCode::NOT_MODIFIED)
            .body(Body::empty())
            .expect("static headers are valid");
    }
    builder
        .status(resp.status)
        .header(header::CONTENT_TYPE, "application/json; charset=utf-8")
        .body(Body::from(resp.body))
        .expect("status codes come from the api module")
}

/// Serves until `shutdown` resolves; in-flight requests are drained.
pub async fn serve(
    listener: TcpListener,
    snapshot: Arc<SnapshotHandle>,
    cors_origin: Option<&str>,
    shutdown: impl Future<Output = ()> + Send + 'static,
) -> std::io::Result<()> {
    let app = router(snapshot, cors_origin).map_err(std::io::Error::other)?;
    axum::serve(listener, app).with_graceful_shutdown(shutdown).await
}
