use std::io::Write;
use std::net::SocketAddr;
use std::sync::Arc;

use anyhow::{Context, Result};
use axum::extract::{Path, Query, State};
use axum::http::{header, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::get;
use axum::{Json, Router};
use serde::Deserialize;
use serde_json::json;
use topic_grouper::explore::Explorer;

const DEFAULT_TOP: usize = 10;

type Shared = Arc<Explorer>;

struct ApiError(StatusCode, String);

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.0, Json(json!({ "error": self.1 }))).into_response()
    }
}

impl From<topic_grouper::Error> for ApiError {
    fn from(e: topic_grouper::Error) -> Self {
        let status = if e.to_string().contains("no topic") {
            StatusCode::NOT_FOUND
        } else {
            StatusCode::BAD_REQUEST
        };
        ApiError(status, e.to_string())
    }
}

#[derive(Deserialize)]
struct FlatQuery {
    n: usize,
    top: Option<usize>,
}

#[derive(Deserialize)]
struct TopQuery {
    top: Option<usize>,
}

async fn meta(State(e): State<Shared>) -> impl IntoResponse {
    Json(e.meta())
}

async fn flat(State(e): State<Shared>, Query(q): Query<FlatQuery>) -> Result<impl IntoResponse, ApiError> {
    Ok(Json(e.flat(q.n, q.top.unwrap_or(DEFAULT_TOP))?))
}

async fn node(
    State(e): State<Shared>,
    Path(id): Path<usize>,
    Query(q): Query<TopQuery>,
) -> Result<impl IntoResponse, ApiError> {
    Ok(Json(e.node(id, q.top.unwrap_or(DEFAULT_TOP))?))
}

async fn path(State(e): State<Shared>, Path(id): Path<usize>) -> Result<impl IntoResponse, ApiError> {
    Ok(Json(e.path(id)?))
}

async fn allow_any_origin(mut res: Response) -> Response {
    res.headers_mut()
        .insert(header::ACCESS_CONTROL_ALLOW_ORIGIN, HeaderValue::from_static("*"));
    res
}

pub fn router(explorer: Explorer) -> Router {
    Router::new()
        .route("/meta", get(meta))
        .route("/flat", get(flat))
        .route("/node/{id}", get(node))
        .route("/path/{id}", get(path))
        .layer(axum::middleware::map_response(allow_any_origin))
        .with_state(Arc::new(explorer))
}

pub fn run(explorer: Explorer, host: &str, port: u16) -> Result<()> {
    let rt = tokio::runtime::Runtime::new()?;
    rt.block_on(async move {
        let addr: SocketAddr = format!("{host}:{port}")
            .parse()
            .with_context(|| format!("bad listen address {host}:{port}"))?;
        let listener = tokio::net::TcpListener::bind(addr)
            .await
            .with_context(|| format!("cannot bind {addr}"))?;
        let local = listener.local_addr()?;
        println!("listening on http://{local}");
        std::io::stdout().flush()?;
        axum::serve(listener, router(explorer))
            .with_graceful_shutdown(async {
                let _ = tokio::signal::ctrl_c().await;
            })
            .await?;
        Ok(())
    })
}
