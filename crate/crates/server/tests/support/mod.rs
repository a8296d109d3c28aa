#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::sync::Arc;

use audiology_server::{router, AppState, FixedClock};
use audiology_store::{Credentials, KdfParams};
use axum::body::Body;
use axum::http::{header, Method, Request, StatusCode};
use axum::Router;
use chrono::{DateTime, TimeZone, Utc};
use http_body_util::BodyExt;
use serde_json::Value;
use tempfile::TempDir;
use tower::ServiceExt;

pub const USER: &str = "clinician";
pub const PASSWORD: &str = "correct horse battery";

pub fn pinned() -> DateTime<Utc> {
    Utc.with_ymd_and_hms(2024, 3, 1, 9, 30, 0).unwrap()
}

pub struct Harness {
    pub dir: TempDir,
    pub state: Arc<AppState>,
    pub app: Router,
}

pub struct Reply {
    pub status: StatusCode,
    pub content_type: Option<String>,
    pub body: Vec<u8>,
}

impl Reply {
    pub fn json(&self) -> Value {
        serde_json::from_slice(&self.body).unwrap_or_else(|e| {
            panic!("not JSON ({e}): {}", String::from_utf8_lossy(&self.body))
        })
    }

    pub fn text(&self) -> String {
        String::from_utf8(self.body.clone()).unwrap()
    }
}

impl Harness {
    pub fn new() -> Self {
        Self::with_static(None)
    }

    pub fn with_static(static_dir: Option<PathBuf>) -> Self {
        let dir = tempfile::tempdir().unwrap();
        let state = Arc::new(AppState::new(
            Credentials::with_params(dir.path().join("credentials.json"), KdfParams::insecure_fast()),
            dir.path().join("records.store"),
            Arc::new(FixedClock(pinned())),
            chrono::Duration::hours(12),
        ));
        let app = router(state.clone(), static_dir);
        Self { dir, state, app }
    }

    pub fn path(&self) -> &Path {
        self.dir.path()
    }

    pub async fn call(&self, method: Method, uri: &str, token: Option<&str>, body: Option<Value>) -> Reply {
        let mut req = Request::builder().method(method).uri(uri);
        if let Some(t) = token {
            req = req.header(header::AUTHORIZATION, format!("Bearer {t}"));
        }
        let req = match body {
            Some(v) => req
                .header(header::CONTENT_TYPE, "application/json")
                .body(Body::from(serde_json::to_vec(&v).unwrap())),
            None => req.body(Body::empty()),
        }
        .unwrap();
        let res = self.app.clone().oneshot(req).await.unwrap();
        let status = res.status();
        let content_type = res
            .headers()
            .get(header::CONTENT_TYPE)
            .map(|v| v.to_str().unwrap().to_string());
        let body = res.into_body().collect().await.unwrap().to_bytes().to_vec();
        Reply { status, content_type, body }
    }

    pub async fn get(&self, uri: &str, token: &str) -> Reply {
        self.call(Method::GET, uri, Some(token), None).await
    }

    pub async fn put(&self, uri: &str, token: &str, body: Value) -> Reply {
        self.call(Method::PUT, uri, Some(token), Some(body)).await
    }

    /// Registers the default user and returns a session token.
    pub async fn register(&self) -> String {
        let r = self
            .call(
                Method::POST,
                "/auth/register",
                None,
                Some(serde_json::json!({ "username": USER, "password": PASSWORD })),
            )
            .await;
        assert_eq!(r.status, StatusCode::CREATED, "{}", r.text());
        r.json()["token"].as_str().unwrap().to_string()
    }
}
