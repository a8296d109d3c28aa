use std::collections::HashMap;
use std::path::PathBuf;
use std::sync::{Arc, Mutex};

use audiology_store::{Credentials, Store, StoreError, StoreKey};
use base64::engine::general_purpose::URL_SAFE_NO_PAD;
use base64::Engine;
use chrono::{DateTime, Duration, Utc};
use rand::rngs::OsRng;
use rand::RngCore;

use crate::error::ApiError;

pub const TOKEN_BYTES: usize = 32;

/// Source of the current time, replaceable for reproducible output.
pub trait Clock: Send + Sync {
    fn now(&self) -> DateTime<Utc>;
}

#[derive(Debug, Default, Clone, Copy)]
pub struct SystemClock;

impl Clock for SystemClock {
    fn now(&self) -> DateTime<Utc> {
        Utc::now()
    }
}

/// A clock that always reads the same instant.
#[derive(Debug, Clone, Copy)]
pub struct FixedClock(pub DateTime<Utc>);

impl Clock for FixedClock {
    fn now(&self) -> DateTime<Utc> {
        self.0
    }
}

struct Session {
    username: String,
    expires_at: DateTime<Utc>,
}

/// The open store and the key it was opened with.
struct Bound {
    store: Arc<Store>,
    key: StoreKey,
}

pub struct AppState {
    pub credentials: Credentials,
    pub store_path: PathBuf,
    pub clock: Arc<dyn Clock>,
    pub session_ttl: Duration,
    sessions: Mutex<HashMap<String, Session>>,
    bound: Mutex<Option<Bound>>,
}

#[derive(Debug, Clone)]
pub struct Issued {
    pub token: String,
    pub expires_at: DateTime<Utc>,
}

impl AppState {
    pub fn new(credentials: Credentials, store_path: PathBuf, clock: Arc<dyn Clock>, session_ttl: Duration) -> Self {
        Self {
            credentials,
            store_path,
            clock,
            session_ttl,
            sessions: Mutex::new(HashMap::new()),
            bound: Mutex::new(None),
        }
    }

    /// Opens the store with `key`, creating it on first use. Once open, only
    /// the same key is accepted.
    pub fn bind_store(&self, key: StoreKey) -> Result<Arc<Store>, ApiError> {
        let mut bound = self.bound.lock().unwrap_or_else(|e| e.into_inner());
        if let Some(b) = bound.as_ref() {
            return if b.key == key { Ok(b.store.clone()) } else { Err(key_mismatch()) };
        }
        let store = match Store::open(&self.store_path, &key) {
            Ok(s) => s,
            Err(StoreError::NotFound(_)) => Store::create(&self.store_path, &key)?,
            Err(StoreError::AuthenticationFailure) => return Err(key_mismatch()),
            Err(e) => return Err(e.into()),
        };
        let store = Arc::new(store);
        *bound = Some(Bound { store: store.clone(), key });
        Ok(store)
    }

    pub fn store(&self) -> Option<Arc<Store>> {
        self.bound.lock().unwrap_or_else(|e| e.into_inner()).as_ref().map(|b| b.store.clone())
    }

    pub fn issue(&self, username: &str) -> Issued {
        let mut raw = [0u8; TOKEN_BYTES];
        OsRng.fill_bytes(&mut raw);
        let token = URL_SAFE_NO_PAD.encode(raw);
        let now = self.clock.now();
        let expires_at = now + self.session_ttl;
        let mut sessions = self.sessions.lock().unwrap_or_else(|e| e.into_inner());
        sessions.retain(|_, s| s.expires_at > now);
        sessions.insert(token.clone(), Session { username: username.to_string(), expires_at });
        Issued { token, expires_at }
    }

    /// Username of a live session.
    pub fn authenticate(&self, token: &str) -> Option<String> {
        let now = self.clock.now();
        let mut sessions = self.sessions.lock().unwrap_or_else(|e| e.into_inner());
        match sessions.get(token) {
            Some(s) if s.expires_at > now => Some(s.username.clone()),
            Some(_) => {
                sessions.remove(token);
                None
            }
            None => None,
        }
    }

    pub fn revoke(&self, token: &str) -> bool {
        self.sessions.lock().unwrap_or_else(|e| e.into_inner()).remove(token).is_some()
    }

    /// Closes the store, if open, and drops all sessions.
    pub fn shutdown(&self) {
        self.sessions.lock().unwrap_or_else(|e| e.into_inner()).clear();
        if let Some(b) = self.bound.lock().unwrap_or_else(|e| e.into_inner()).take() {
            let _ = b.store.close();
        }
    }
}

fn key_mismatch() -> ApiError {
    ApiError::new(
        axum::http::StatusCode::FORBIDDEN,
        "store-key-mismatch",
        "this store belongs to a different user",
    )
}
