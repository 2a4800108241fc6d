//! HTTP search service. Handlers read one immutable snapshot per request;
//! reloads build a new snapshot off the request path and swap it in.

pub mod config;
pub mod error;
pub mod params;
pub mod snapshot;

use std::path::PathBuf;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;
use std::time::Instant;

use arc_swap::ArcSwapOption;
use axum::body::Bytes;
use axum::extract::{Path, RawQuery, State};
use axum::http::{header, HeaderValue, Method, StatusCode};
use axum::routing::{get, post};
use axum::{Json, Router};
use harmonize_core::registry::Registry;
use harmonize_core::schema::{PathKind, FIELD_PATHS};
use harmonize_search::{parse_advanced, parse_basic, SearchConfig, SearchRequest, FACET_FIELDS, FULL_TEXT_FIELDS};
use serde::Deserialize;
use serde_json::{json, Map, Value};
use thiserror::Error;
use tower_http::cors::CorsLayer;

pub use config::{ConfigError, ServiceConfig, CONFIG_ENV};
pub use error::ApiError;
pub use snapshot::{LoadError, Snapshot};

use params::{QueryParams, QueryText};

pub struct AppState {
    snapshot: ArcSwapOption<Snapshot>,
    registry: Registry,
    search_config: SearchConfig,
    admin: bool,
    generations: AtomicU64,
    reload_lock: tokio::sync::Mutex<()>,
}

impl AppState {
    pub fn new(registry: Registry, search_config: SearchConfig, admin: bool) -> Arc<AppState> {
        Arc::new(AppState {
            snapshot: ArcSwapOption::empty(),
            registry,
            search_config,
            admin,
            generations: AtomicU64::new(0),
            reload_lock: tokio::sync::Mutex::new(()),
        })
    }

    pub fn search_config(&self) -> &SearchConfig {
        &self.search_config
    }

    pub fn next_generation(&self) -> u64 {
        self.generations.fetch_add(1, Ordering::SeqCst) + 1
    }

    pub fn install(&self, snapshot: Snapshot) {
        self.snapshot.store(Some(Arc::new(snapshot)));
    }

    pub fn current(&self) -> Option<Arc<Snapshot>> {
        self.snapshot.load_full()
    }

    /// Builds a snapshot on the blocking pool and swaps it in. On failure
    /// the current snapshot stays. Returns the new generation and record
    /// count.
    pub async fn reload(&self, corpus: PathBuf, report: Option<PathBuf>) -> Result<(u64, usize), LoadError> {
        let _serial = self.reload_lock.lock().await;
        let generation = self.next_generation();
        let config = self.search_config.clone();
        let built = tokio::task::spawn_blocking(move || Snapshot::load(generation, &corpus, report.as_deref(), &config))
            .await
            .expect("snapshot build panicked")?;
        let count = built.index.len();
        self.install(built);
        log::info!("snapshot {generation} installed with {count} records");
        Ok((generation, count))
    }
}

type Shared = Arc<AppState>;
type ApiResult = Result<Json<Value>, ApiError>;

fn millis(started: Instant) -> u64 {
    started.elapsed().as_millis() as u64
}

fn ready(state: &AppState) -> Result<Arc<Snapshot>, ApiError> {
    state.current().ok_or_else(ApiError::not_ready)
}

async fn query(State(state): State<Shared>, RawQuery(raw): RawQuery) -> ApiResult {
    let started = Instant::now();
    let snapshot = ready(&state)?;
    let params = QueryParams::parse(raw.as_deref().unwrap_or(""))?;
    let ast = match &params.query {
        QueryText::Basic(q) => parse_basic(q)?,
        QueryText::Advanced(q) => parse_advanced(q)?,
    };
    let request = SearchRequest {
        query: ast,
        filters: params.filters.clone(),
        facets: params.facets.clone(),
        from: params.from,
        size: params.size,
    };
    let (snapshot, response) = tokio::task::spawn_blocking(move || {
        let r = snapshot.index.search(&request);
        (snapshot, r)
    })
    .await
    .expect("search panicked");
    let response = response?;
    let mut facets = Map::new();
    for f in response.facets {
        let values: Vec<Value> =
            f.values.iter().take(params.facet_size).map(|c| json!({ "count": c.count, "value": c.value })).collect();
        facets.insert(f.field, Value::Array(values));
    }
    let hits: Vec<Value> = response
        .hits
        .into_iter()
        .map(|h| json!({ "_id": h.id, "_score": h.score, "record": h.record }))
        .collect();
    Ok(Json(json!({
        "facets": facets,
        "from": params.from,
        "hits": hits,
        "query_echo": response.query_echo,
        "size": params.size,
        "snapshot": snapshot.generation,
        "took_ms": millis(started),
        "total": response.total,
    })))
}

async fn dataset(State(state): State<Shared>, Path(id): Path<String>) -> ApiResult {
    let started = Instant::now();
    let snapshot = ready(&state)?;
    let record = snapshot.index.get(&id).ok_or_else(|| ApiError::not_found(format!("no dataset with _id '{id}'")))?;
    Ok(Json(json!({ "record": record, "snapshot": snapshot.generation, "took_ms": millis(started) })))
}

async fn sources(State(state): State<Shared>) -> ApiResult {
    let started = Instant::now();
    let sources = state.registry.sorted_by_name();
    Ok(Json(json!({ "sources": sources, "took_ms": millis(started), "total": sources.len() })))
}

async fn coverage(State(state): State<Shared>) -> ApiResult {
    let started = Instant::now();
    let snapshot = ready(&state)?;
    let report = snapshot.report.as_ref().ok_or_else(|| ApiError::not_found("the current snapshot has no coverage report"))?;
    Ok(Json(json!({ "report": report, "snapshot": snapshot.generation, "took_ms": millis(started) })))
}

async fn fields() -> ApiResult {
    let started = Instant::now();
    let paths: Vec<Value> = FIELD_PATHS
        .iter()
        .map(|p| json!({ "kind": if p.kind == PathKind::Date { "date" } else { "text" }, "path": p.path }))
        .collect();
    Ok(Json(json!({ "facets": FACET_FIELDS, "fields": paths, "full_text": FULL_TEXT_FIELDS, "took_ms": millis(started) })))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ReloadBody {
    corpus: PathBuf,
    report: Option<PathBuf>,
}

async fn reload(State(state): State<Shared>, body: Bytes) -> ApiResult {
    let started = Instant::now();
    if !state.admin {
        return Err(ApiError::new(StatusCode::FORBIDDEN, "admin_disabled", "admin endpoints are disabled by config"));
    }
    let body: ReloadBody = serde_json::from_slice(&body)
        .map_err(|e| ApiError::bad_parameter(format!("reload body must be {{\"corpus\": path, \"report\"?: path}}: {e}")))?;
    let (generation, records) = state
        .reload(body.corpus, body.report)
        .await
        .map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, "reload_failed", e.to_string()))?;
    Ok(Json(json!({ "records": records, "snapshot": generation, "took_ms": millis(started) })))
}

async fn fallback() -> ApiError {
    ApiError::not_found("no such endpoint")
}

pub fn router(state: Shared, cors_origin: Option<HeaderValue>) -> Router {
    let app = Router::new()
        .route("/v1/query", get(query))
        .route("/v1/dataset/{id}", get(dataset))
        .route("/v1/sources", get(sources))
        .route("/v1/coverage", get(coverage))
        .route("/v1/fields", get(fields))
        .route("/v1/admin/reload", post(reload))
        .fallback(fallback)
        .with_state(state);
    match cors_origin {
        Some(origin) => app.layer(
            CorsLayer::new()
                .allow_origin(origin)
                .allow_methods([Method::GET, Method::POST])
                .allow_headers([header::CONTENT_TYPE]),
        ),
        None => app,
    }
}

#[derive(Debug, Error)]
pub enum ServeError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("cannot load registry: {0}")]
    Registry(String),
    #[error("invalid cors_origin '{0}'")]
    Cors(String),
    #[error("cannot bind {addr}: {source}")]
    Bind { addr: std::net::SocketAddr, source: std::io::Error },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// State and router for `config`, without loading any corpus.
pub fn app(config: &ServiceConfig) -> Result<(Shared, Router), ServeError> {
    let registry = match &config.registry {
        Some(p) => Registry::load(p).map_err(|e| ServeError::Registry(e.to_string()))?,
        None => Registry::default(),
    };
    let cors = config
        .cors_origin
        .as_deref()
        .map(|o| HeaderValue::from_str(o).map_err(|_| ServeError::Cors(o.into())))
        .transpose()?;
    let state = AppState::new(registry, config.search.clone(), config.admin);
    Ok((state.clone(), router(state, cors)))
}

/// Binds, starts loading the configured corpus in the background and
/// serves until the process ends. Data endpoints answer 503 until the
/// first snapshot is in.
pub async fn serve(config: ServiceConfig) -> Result<(), ServeError> {
    let (state, app) = app(&config)?;
    let listener = tokio::net::TcpListener::bind(config.listen)
        .await
        .map_err(|source| ServeError::Bind { addr: config.listen, source })?;
    log::info!("listening on {}", listener.local_addr()?);
    if let Some(corpus) = config.corpus.clone() {
        let report = config.report.clone();
        let state = state.clone();
        tokio::spawn(async move {
            if let Err(e) = state.reload(corpus, report).await {
                log::error!("initial load failed: {e}");
            }
        });
    }
    axum::serve(listener, app).await?;
    Ok(())
}
