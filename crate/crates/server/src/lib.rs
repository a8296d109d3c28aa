//! Local HTTP service over the encrypted hearing test record store.

pub mod error;
pub mod routes;
pub mod state;

use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;

use audiology_store::Credentials;
use tokio::net::TcpListener;

pub use error::{ApiError, ErrorBody};
pub use routes::router;
pub use state::{AppState, Clock, FixedClock, SystemClock};

pub const DEFAULT_SESSION_HOURS: i64 = 12;

#[derive(Debug, Clone)]
pub struct ServerConfig {
    pub store_path: PathBuf,
    pub credentials_path: PathBuf,
    pub bind: SocketAddr,
    /// Must be set to listen on anything but a loopback address.
    pub allow_remote: bool,
    pub static_dir: Option<PathBuf>,
}

#[derive(Debug, thiserror::Error)]
pub enum StartupError {
    #[error("refusing to listen on non-loopback address {0} without --allow-remote")]
    RemoteBind(SocketAddr),
    #[error("store directory {0} does not exist")]
    StoreDirectory(PathBuf),
    #[error("static asset directory {0} does not exist")]
    StaticDirectory(PathBuf),
    #[error("cannot listen on {addr}: {source}")]
    Bind { addr: SocketAddr, source: std::io::Error },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn parent_exists(path: &std::path::Path) -> bool {
    match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.is_dir(),
        _ => true,
    }
}

impl ServerConfig {
    pub fn check(&self) -> Result<(), StartupError> {
        if !self.bind.ip().is_loopback() && !self.allow_remote {
            return Err(StartupError::RemoteBind(self.bind));
        }
        for p in [&self.store_path, &self.credentials_path] {
            if !parent_exists(p) {
                return Err(StartupError::StoreDirectory(p.parent().unwrap_or(p).to_path_buf()));
            }
        }
        if let Some(dir) = &self.static_dir {
            if !dir.is_dir() {
                return Err(StartupError::StaticDirectory(dir.clone()));
            }
        }
        Ok(())
    }

    pub fn state(&self) -> AppState {
        AppState::new(
            Credentials::new(&self.credentials_path),
            self.store_path.clone(),
            Arc::new(SystemClock),
            chrono::Duration::hours(DEFAULT_SESSION_HOURS),
        )
    }
}

/// Runs until ctrl-c, then closes the store.
pub async fn serve(config: ServerConfig) -> Result<(), StartupError> {
    config.check()?;
    if !config.bind.ip().is_loopback() {
        tracing::warn!(addr = %config.bind, "listening on a non-loopback address; traffic is not encrypted");
    }
    let listener = TcpListener::bind(config.bind)
        .await
        .map_err(|source| StartupError::Bind { addr: config.bind, source })?;
    let state = Arc::new(config.state());
    let app = router(state.clone(), config.static_dir.clone());
    tracing::info!(addr = %listener.local_addr()?, "listening");
    axum::serve(listener, app)
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    state.shutdown();
    Ok(())
}
