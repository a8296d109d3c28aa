use std::path::PathBuf;
use std::sync::Arc;

use audiology_core::chart::{render_exam_chart, AudiogramSelection, Canvas, ChartKind, EarFilter};
use audiology_core::metrics::{disability_metrics, exam_metrics};
use audiology_core::report::{build_report, export_html, export_pdf, PageSize, PdfOptions};
use audiology_core::{Category, ExamAggregate, ExamKey, HearingDisabilityRecord, PureToneCategory, Record};
use audiology_store::{SearchCriteria, Store, SCHEMA_VERSION};
use axum::body::Bytes;
use axum::extract::rejection::QueryRejection;
use axum::extract::{FromRequestParts, Path, Query, State};
use axum::http::request::Parts;
use axum::http::{header, StatusCode};
use axum::response::{Html, IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use tower_http::services::ServeDir;

use crate::error::ApiError;
use crate::state::AppState;

type AppResult<T> = Result<T, ApiError>;

/// A request carrying a live session token.
pub struct Authed {
    pub token: String,
    pub username: String,
    pub store: Arc<Store>,
}

impl FromRequestParts<Arc<AppState>> for Authed {
    type Rejection = ApiError;

    async fn from_request_parts(parts: &mut Parts, state: &Arc<AppState>) -> Result<Self, Self::Rejection> {
        let token = parts
            .headers
            .get(header::AUTHORIZATION)
            .and_then(|v| v.to_str().ok())
            .and_then(|v| v.strip_prefix("Bearer "))
            .map(str::trim)
            .ok_or_else(ApiError::unauthorized)?;
        let username = state.authenticate(token).ok_or_else(ApiError::unauthorized)?;
        let store = state.store().ok_or_else(ApiError::unauthorized)?;
        Ok(Authed { token: token.to_string(), username, store })
    }
}

fn json_body<T: for<'de> Deserialize<'de>>(body: &Bytes) -> AppResult<T> {
    serde_json::from_slice(body)
        .map_err(|e| ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "malformed-request", e.to_string()))
}

fn query<T>(q: Result<Query<T>, QueryRejection>) -> AppResult<T> {
    q.map(|Query(v)| v)
        .map_err(|e| ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "validation-failed", e.body_text()))
}

fn exam_key(id: &str, date: &str) -> AppResult<ExamKey> {
    Ok(ExamKey::parse(id, date)?)
}

fn category(slug: &str) -> AppResult<Category> {
    Ok(Category::from_slug(slug)?)
}

fn existing_exam(store: &Store, key: &ExamKey) -> AppResult<ExamAggregate> {
    let agg = store.get_exam(key)?;
    if agg.is_empty() {
        return Err(ApiError::not_found(format!("no exam {key}")));
    }
    Ok(agg)
}

#[derive(Deserialize)]
struct CredentialsBody {
    username: String,
    password: String,
}

#[derive(Serialize)]
struct TokenBody {
    token: String,
    expires_at: chrono::DateTime<chrono::Utc>,
}

async fn health() -> Json<Value> {
    Json(json!({ "status": "ok", "version": env!("CARGO_PKG_VERSION"), "schema_version": SCHEMA_VERSION }))
}

async fn register(State(state): State<Arc<AppState>>, body: Bytes) -> AppResult<Response> {
    let body: CredentialsBody = json_body(&body)?;
    let (record, key) = state.credentials.register(&body.username, &body.password)?;
    let response = match state.bind_store(key) {
        Ok(_) => {
            let issued = state.issue(&record.username);
            json!({
                "username": record.username,
                "store_access": true,
                "token": issued.token,
                "expires_at": issued.expires_at,
            })
        }
        Err(e) if e.code() == "store-key-mismatch" => json!({
            "username": record.username,
            "store_access": false,
            "token": null,
            "expires_at": null,
        }),
        Err(e) => return Err(e),
    };
    Ok((StatusCode::CREATED, Json(response)).into_response())
}

async fn login(State(state): State<Arc<AppState>>, body: Bytes) -> AppResult<Json<TokenBody>> {
    let body: CredentialsBody = json_body(&body)?;
    let key = state.credentials.login(&body.username, &body.password)?;
    state.bind_store(key)?;
    let issued = state.issue(&body.username);
    Ok(Json(TokenBody { token: issued.token, expires_at: issued.expires_at }))
}

async fn logout(State(state): State<Arc<AppState>>, auth: Authed) -> StatusCode {
    state.revoke(&auth.token);
    StatusCode::NO_CONTENT
}

async fn session(auth: Authed) -> Json<Value> {
    Json(json!({ "username": auth.username }))
}

async fn get_exam(auth: Authed, Path((id, date)): Path<(String, String)>) -> AppResult<Json<ExamAggregate>> {
    Ok(Json(auth.store.get_exam(&exam_key(&id, &date)?)?))
}

async fn delete_exam(auth: Authed, Path((id, date)): Path<(String, String)>) -> AppResult<Json<Value>> {
    let n = auth.store.delete_exam(&exam_key(&id, &date)?)?;
    Ok(Json(json!({ "rows_removed": n })))
}

async fn get_record(auth: Authed, Path((id, date, slug)): Path<(String, String, String)>) -> AppResult<Json<Value>> {
    let key = exam_key(&id, &date)?;
    let category = category(&slug)?;
    let record = auth
        .store
        .get(&key, category)?
        .ok_or_else(|| ApiError::not_found(format!("no {slug} record for {key}")))?;
    Ok(Json(record.to_json()))
}

/// Saving unmasked air conduction also refreshes the stored disability
/// snapshot, in the same atomic write, whenever it can be computed.
async fn put_record(
    auth: Authed,
    Path((id, date, slug)): Path<(String, String, String)>,
    body: Bytes,
) -> AppResult<Json<Value>> {
    let key = exam_key(&id, &date)?;
    let category = category(&slug)?;
    let value: Value = json_body(&body)?;
    let record = Record::from_json(category, value)?;
    if record.key() != &key {
        return Err(audiology_core::DomainError::KeyMismatch { expected: key, found: record.key().clone() }.into());
    }
    let mut batch = vec![record.clone()];
    if let Record::PureTone(pt) = &record {
        if pt.category == PureToneCategory::AcUnmasked {
            if let Ok(metrics) = disability_metrics(pt) {
                batch.push(HearingDisabilityRecord { key: key.clone(), metrics }.into());
            }
        }
    }
    auth.store.upsert_many(batch)?;
    Ok(Json(record.to_json()))
}

async fn metrics(auth: Authed, Path((id, date)): Path<(String, String)>) -> AppResult<Json<Value>> {
    let agg = existing_exam(&auth.store, &exam_key(&id, &date)?)?;
    Ok(Json(serde_json::to_value(exam_metrics(&agg)?).expect("metrics serialize")))
}

#[derive(Debug, Default, Deserialize)]
pub struct ChartQuery {
    /// `right`, `left` or `both`.
    pub ears: Option<EarFilter>,
    /// Comma-separated pure-tone category slugs.
    pub categories: Option<String>,
    pub width: Option<u32>,
    pub height: Option<u32>,
}

impl ChartQuery {
    pub fn selection(&self) -> AppResult<AudiogramSelection> {
        let all = AudiogramSelection::all();
        let categories = match self.categories.as_deref() {
            None => all.categories,
            Some(list) => list
                .split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(|s| {
                    PureToneCategory::from_slug(s).ok_or_else(|| {
                        ApiError::new(
                            StatusCode::UNPROCESSABLE_ENTITY,
                            "validation-failed",
                            format!("unknown audiogram curve {s}"),
                        )
                    })
                })
                .collect::<AppResult<_>>()?,
        };
        Ok(AudiogramSelection::new(self.ears.unwrap_or(EarFilter::Both), categories))
    }

    pub fn canvas(&self) -> AppResult<Canvas> {
        let d = Canvas::default();
        let canvas = Canvas { width: self.width.unwrap_or(d.width), height: self.height.unwrap_or(d.height) };
        let ok = |v: u32| (200..=4000).contains(&v);
        if !(ok(canvas.width) && ok(canvas.height)) {
            return Err(ApiError::new(
                StatusCode::UNPROCESSABLE_ENTITY,
                "validation-failed",
                "chart width and height must be within [200,4000]",
            ));
        }
        Ok(canvas)
    }
}

async fn chart(
    auth: Authed,
    Path((id, date, file)): Path<(String, String, String)>,
    q: Result<Query<ChartQuery>, QueryRejection>,
) -> AppResult<Response> {
    let q = query(q)?;
    let key = exam_key(&id, &date)?;
    let (name, as_json) = match (file.strip_suffix(".svg"), file.strip_suffix(".json")) {
        (Some(n), _) => (n, false),
        (_, Some(n)) => (n, true),
        _ => return Err(ApiError::not_found(format!("no chart {file}"))),
    };
    let kind = ChartKind::from_slug(name).ok_or_else(|| ApiError::not_found(format!("no chart {file}")))?;
    let agg = existing_exam(&auth.store, &key)?;
    let doc = render_exam_chart(&agg, kind, &q.selection()?, q.canvas()?)?;
    if as_json {
        return Ok(Json(json!({
            "kind": doc.kind,
            "width": doc.width,
            "height": doc.height,
            "symbol_inventory": doc.symbol_inventory,
            "svg": doc.svg,
        }))
        .into_response());
    }
    Ok(([(header::CONTENT_TYPE, "image/svg+xml")], doc.svg).into_response())
}

#[derive(Debug, Default, Deserialize)]
struct ReportQuery {
    page_size: Option<PageSize>,
}

async fn report_pdf(
    State(state): State<Arc<AppState>>,
    auth: Authed,
    Path((id, date)): Path<(String, String)>,
    q: Result<Query<ReportQuery>, QueryRejection>,
) -> AppResult<Response> {
    let q = query(q)?;
    let key = exam_key(&id, &date)?;
    let agg = existing_exam(&auth.store, &key)?;
    let doc = build_report(&agg, state.clock.now())?;
    let pdf = tokio::task::spawn_blocking(move || export_pdf(&doc, &PdfOptions { page_size: q.page_size.unwrap_or_default() }))
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", e.to_string()))?;
    let disposition = format!("inline; filename=\"report-{}-{}.pdf\"", sanitize(&key.patient_id), key.exam_date);
    Ok(([(header::CONTENT_TYPE, "application/pdf".to_string()), (header::CONTENT_DISPOSITION, disposition)], pdf)
        .into_response())
}

async fn report_html(
    State(state): State<Arc<AppState>>,
    auth: Authed,
    Path((id, date)): Path<(String, String)>,
) -> AppResult<Html<String>> {
    let agg = existing_exam(&auth.store, &exam_key(&id, &date)?)?;
    Ok(Html(export_html(&build_report(&agg, state.clock.now())?)))
}

fn sanitize(s: &str) -> String {
    s.chars().map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' }).collect()
}

async fn search(auth: Authed, q: Result<Query<SearchCriteria>, QueryRejection>) -> AppResult<Json<Value>> {
    let hits = auth.store.search(&query(q)?)?;
    Ok(Json(serde_json::to_value(hits).expect("hits serialize")))
}

async fn placeholder() -> Html<&'static str> {
    Html(concat!(
        "<!DOCTYPE html>\n<html lang=\"en\"><head><meta charset=\"utf-8\"><title>Hearing test records</title></head>\n",
        "<body><h1>Hearing test records</h1><p>The service is running. No web interface assets are installed; ",
        "start the server with --static-dir to serve one.</p></body></html>\n"
    ))
}

async fn unknown_route() -> ApiError {
    ApiError::not_found("no such endpoint")
}

pub fn router(state: Arc<AppState>, static_dir: Option<PathBuf>) -> Router {
    let exam = "/patients/{id}/exams/{date}";
    let api = Router::new()
        .route("/health", get(health))
        .route("/auth/register", post(register))
        .route("/auth/login", post(login))
        .route("/auth/logout", post(logout))
        .route("/auth/session", get(session))
        .route("/search", get(search))
        .route(exam, get(get_exam).delete(delete_exam))
        .route(&format!("{exam}/metrics"), get(metrics))
        .route(&format!("{exam}/report.pdf"), get(report_pdf))
        .route(&format!("{exam}/report.html"), get(report_html))
        .route(&format!("{exam}/charts/{{file}}"), get(chart))
        .route(&format!("{exam}/{{category}}"), get(get_record).put(put_record));
    let app = match static_dir {
        Some(dir) => api.fallback_service(ServeDir::new(dir).append_index_html_on_directories(true)),
        None => api.route("/", get(placeholder)).fallback(unknown_route),
    };
    app.with_state(state)
}
