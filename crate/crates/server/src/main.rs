use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::net::SocketAddr;
use std::path::PathBuf;
use std::process::ExitCode;

use audiology_server::{serve, ServerConfig};
use audiology_store::{export_jsonl, import_jsonl, CollisionPolicy, Credentials, Store};
use clap::{Parser, ValueEnum};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum OnCollision {
    Skip,
    Overwrite,
}

/// Hearing test record service.
#[derive(Debug, Parser)]
#[command(version, about)]
struct Cli {
    /// Encrypted record store.
    #[arg(long, env = "AUDIO_STORE", default_value = "audiology.store")]
    store: PathBuf,
    /// Registered users.
    #[arg(long, env = "AUDIO_CREDENTIALS", default_value = "credentials.json")]
    credentials: PathBuf,
    #[arg(long, env = "AUDIO_BIND", default_value = "127.0.0.1:8080")]
    bind: SocketAddr,
    /// Permit listening on a non-loopback address.
    #[arg(long, env = "AUDIO_ALLOW_REMOTE")]
    allow_remote: bool,
    /// Directory of web interface assets served at `/`.
    #[arg(long, env = "AUDIO_STATIC_DIR")]
    static_dir: Option<PathBuf>,
    /// Write every record as JSON lines to FILE and exit.
    #[arg(long, value_name = "FILE", conflicts_with = "import")]
    export: Option<PathBuf>,
    /// Read JSON lines from FILE into the store and exit.
    #[arg(long, value_name = "FILE")]
    import: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "skip")]
    on_collision: OnCollision,
    /// Account whose password (from AUDIO_PASSWORD) unlocks the store for
    /// --export and --import.
    #[arg(long, env = "AUDIO_USER")]
    user: Option<String>,
}

fn open_store(cli: &Cli) -> Result<Store, String> {
    let user = cli.user.as_deref().ok_or("--user (or AUDIO_USER) is required")?;
    let password = std::env::var("AUDIO_PASSWORD").map_err(|_| "AUDIO_PASSWORD is not set")?;
    let key = Credentials::new(&cli.credentials).login(user, &password).map_err(|e| e.to_string())?;
    Store::open(&cli.store, &key).map_err(|e| e.to_string())
}

fn transfer(cli: &Cli) -> Result<(), String> {
    let store = open_store(cli)?;
    if let Some(path) = &cli.export {
        let mut out = BufWriter::new(File::create(path).map_err(|e| format!("{}: {e}", path.display()))?);
        let n = export_jsonl(&store, &mut out).map_err(|e| e.to_string())?;
        out.flush().map_err(|e| e.to_string())?;
        eprintln!("exported {n} records to {}", path.display());
    }
    if let Some(path) = &cli.import {
        let input = BufReader::new(File::open(path).map_err(|e| format!("{}: {e}", path.display()))?);
        let policy = match cli.on_collision {
            OnCollision::Skip => CollisionPolicy::Skip,
            OnCollision::Overwrite => CollisionPolicy::Overwrite,
        };
        let report = import_jsonl(&store, input, policy).map_err(|e| e.to_string())?;
        println!("{}", serde_json::to_string_pretty(&report).map_err(|e| e.to_string())?);
    }
    store.close().map_err(|e| e.to_string())
}

#[tokio::main]
async fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()),
        )
        .init();
    let cli = Cli::parse();
    if cli.export.is_some() || cli.import.is_some() {
        return match transfer(&cli) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::FAILURE
            }
        };
    }
    let config = ServerConfig {
        store_path: cli.store,
        credentials_path: cli.credentials,
        bind: cli.bind,
        allow_remote: cli.allow_remote,
        static_dir: cli.static_dir,
    };
    match serve(config).await {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
