use std::path::Path;
use std::process::{Command, Output};

use audiology_core::{sample, ExamKey};
use audiology_store::{Credentials, Store};
use chrono::NaiveDate;

const BIN: &str = env!("CARGO_BIN_EXE_audiology");
const PASSWORD: &str = "export password";

fn audiology(dir: &Path, args: &[&str]) -> Output {
    Command::new(BIN)
        .current_dir(dir)
        .env_remove("AUDIO_STORE")
        .env_remove("AUDIO_CREDENTIALS")
        .env("AUDIO_PASSWORD", PASSWORD)
        .args(args)
        .output()
        .unwrap()
}

fn key() -> ExamKey {
    ExamKey::new("X-1", NaiveDate::from_ymd_opt(2023, 11, 5).unwrap())
}

#[test]
fn export_then_import_into_another_store() {
    let dir = tempfile::tempdir().unwrap();
    let creds = Credentials::new(dir.path().join("credentials.json"));
    let (_, k) = creds.register("alice", PASSWORD).unwrap();
    let agg = sample::full_exam(&key());
    let store = Store::create(dir.path().join("a.store"), &k).unwrap();
    store.upsert_many(agg.records()).unwrap();
    store.close().unwrap();

    let out = audiology(dir.path(), &["--store", "a.store", "--user", "alice", "--export", "dump.jsonl"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let dump = std::fs::read_to_string(dir.path().join("dump.jsonl")).unwrap();
    assert_eq!(dump.lines().count(), 17);
    assert!(String::from_utf8_lossy(&out.stderr).contains("exported 17 records"));

    Store::create(dir.path().join("b.store"), &k).unwrap().close().unwrap();
    let out = audiology(dir.path(), &["--store", "b.store", "--user", "alice", "--import", "dump.jsonl"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["inserted"], 17);

    let out = audiology(dir.path(), &["--store", "b.store", "--user", "alice", "--import", "dump.jsonl"]);
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["inserted"], 0);

    let b = Store::open(dir.path().join("b.store"), &k).unwrap();
    assert_eq!(b.get_exam(&key()).unwrap(), agg);
}

#[test]
fn transfer_needs_the_right_password() {
    let dir = tempfile::tempdir().unwrap();
    let creds = Credentials::new(dir.path().join("credentials.json"));
    let (_, k) = creds.register("bob", "a different password").unwrap();
    Store::create(dir.path().join("a.store"), &k).unwrap().close().unwrap();
    let out = audiology(dir.path(), &["--store", "a.store", "--user", "bob", "--export", "dump.jsonl"]);
    assert!(!out.status.success());
    assert!(!dir.path().join("dump.jsonl").exists());
    let out = audiology(dir.path(), &["--store", "a.store", "--export", "dump.jsonl"]);
    assert!(!out.status.success());
}

#[test]
fn refuses_remote_bind_without_opt_in() {
    let dir = tempfile::tempdir().unwrap();
    let out = audiology(dir.path(), &["--bind", "0.0.0.0:0"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("--allow-remote"));
}

#[test]
fn reports_missing_store_directory() {
    let dir = tempfile::tempdir().unwrap();
    let out = audiology(dir.path(), &["--store", "nowhere/x.store", "--bind", "127.0.0.1:0"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("does not exist"));
}

#[test]
fn prints_version() {
    let out = Command::new(BIN).arg("--version").output().unwrap();
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains(env!("CARGO_PKG_VERSION")));
}
