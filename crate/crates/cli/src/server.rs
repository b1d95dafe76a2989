//! JSON API of the annotation page.
//!
//! | method    | path                              | body                           |
//! |-----------|-----------------------------------|--------------------------------|
//! | POST      | `/api/tokenize`                   | `{"text": .., "doc_id"?: ..}`  |
//! | GET       | `/api/documents`                  |                                |
//! | GET       | `/api/documents/{doc_id}`         |                                |
//! | PUT, POST | `/api/documents/{doc_id}/clusters`| `{"clusters": [..]}`           |
//! | GET       | `/api/gold`                       |                                |
//!
//! A cluster is either a bare list of token indices (`[1, 2]`) or an object
//! `{"sentence_id": .., "tokens": [..]}`. `/api/gold` returns every stored
//! cluster as gold records, ready for `ukrnp evaluate`.

use std::net::SocketAddr;
use std::sync::Arc;

use axum::extract::{Path, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::json;
use ukrnp_core::annotate::{AnnotatedDocument, DocumentSummary};
use ukrnp_core::{write_gold, AnnotationStore, ClusterInput, Error, Span};

#[derive(Debug, Deserialize)]
pub struct TokenizeRequest {
    pub text: String,
    #[serde(default)]
    pub doc_id: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum ClusterBody {
    Tokens(Vec<usize>),
    Full(ClusterInput),
}

impl From<ClusterBody> for ClusterInput {
    fn from(body: ClusterBody) -> Self {
        match body {
            ClusterBody::Tokens(tokens) => ClusterInput {
                sentence_id: None,
                tokens,
            },
            ClusterBody::Full(c) => c,
        }
    }
}

#[derive(Debug, Deserialize)]
pub struct SaveClustersRequest {
    pub clusters: Vec<ClusterBody>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SaveClustersResponse {
    pub doc_id: String,
    pub clusters: Vec<Span>,
}

pub struct ApiError(Error);

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        ApiError(e)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status = match &self.0 {
            Error::NotFound(_) => StatusCode::NOT_FOUND,
            Error::Invalid(_) | Error::Config(_) => StatusCode::UNPROCESSABLE_ENTITY,
            _ => StatusCode::INTERNAL_SERVER_ERROR,
        };
        if status.is_server_error() {
            log::error!("{}", self.0);
        }
        (status, Json(json!({ "error": self.0.to_string() }))).into_response()
    }
}

type Shared = Arc<AnnotationStore>;

/// Store calls touch the filesystem, so they run off the async workers.
async fn blocking<T, F>(store: Shared, f: F) -> Result<T, ApiError>
where
    T: Send + 'static,
    F: FnOnce(&AnnotationStore) -> ukrnp_core::Result<T> + Send + 'static,
{
    tokio::task::spawn_blocking(move || f(&store))
        .await
        .map_err(|e| ApiError(Error::Invalid(format!("worker failed: {e}"))))?
        .map_err(ApiError)
}

async fn tokenize(
    State(store): State<Shared>,
    Json(req): Json<TokenizeRequest>,
) -> Result<(StatusCode, Json<AnnotatedDocument>), ApiError> {
    let doc = blocking(store, move |s| {
        s.create_document(&req.text, req.doc_id.as_deref())
    })
    .await?;
    Ok((StatusCode::CREATED, Json(doc)))
}

async fn list_documents(
    State(store): State<Shared>,
) -> Result<Json<Vec<DocumentSummary>>, ApiError> {
    Ok(Json(blocking(store, |s| s.list()).await?))
}

async fn get_document(
    State(store): State<Shared>,
    Path(doc_id): Path<String>,
) -> Result<Json<AnnotatedDocument>, ApiError> {
    Ok(Json(blocking(store, move |s| s.load(&doc_id)).await?))
}

async fn save_clusters(
    State(store): State<Shared>,
    Path(doc_id): Path<String>,
    Json(req): Json<SaveClustersRequest>,
) -> Result<Json<SaveClustersResponse>, ApiError> {
    let clusters: Vec<ClusterInput> = req.clusters.into_iter().map(Into::into).collect();
    let id = doc_id.clone();
    let saved = blocking(store, move |s| s.save_clusters(&id, &clusters)).await?;
    Ok(Json(SaveClustersResponse {
        doc_id,
        clusters: saved,
    }))
}

async fn export_gold(State(store): State<Shared>) -> Result<Response, ApiError> {
    let spans = blocking(store, |s| s.export_gold()).await?;
    let mut body = Vec::new();
    write_gold(&mut body, &spans).expect("writing to memory");
    Ok((
        [(
            header::CONTENT_TYPE,
            "text/tab-separated-values; charset=utf-8",
        )],
        body,
    )
        .into_response())
}

pub fn router(store: Arc<AnnotationStore>) -> Router {
    Router::new()
        .route("/api/tokenize", post(tokenize))
        .route("/api/documents", get(list_documents))
        .route("/api/documents/{doc_id}", get(get_document))
        .route(
            "/api/documents/{doc_id}/clusters",
            post(save_clusters).put(save_clusters),
        )
        .route("/api/gold", get(export_gold))
        .with_state(store)
}

pub async fn serve(store: AnnotationStore, addr: SocketAddr) -> anyhow::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    log::info!(
        "annotation API on http://{} (storage {})",
        listener.local_addr()?,
        store.dir().display()
    );
    axum::serve(listener, router(Arc::new(store)))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    Ok(())
}
