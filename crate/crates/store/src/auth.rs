//! Local user registration and login.
//!
//! A password is stretched with Argon2id into a master secret, from which
//! HKDF-SHA256 derives two unrelated values: the login verifier kept in the
//! credentials file and the store key, which is never written anywhere.
//! There is no recovery: a lost password means a lost store.

use std::fs::{self, File, OpenOptions};
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use argon2::{Algorithm, Argon2, Params, Version};
use base64::engine::general_purpose::STANDARD as B64;
use base64::Engine;
use hkdf::Hkdf;
use rand::rngs::OsRng;
use rand::RngCore;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use sha2::Sha256;
use subtle::ConstantTimeEq;
use thiserror::Error;
use zeroize::Zeroizing;

use crate::key::{StoreKey, KEY_LEN};

pub const MIN_PASSWORD_CHARS: usize = 8;
pub const MAX_USERNAME_CHARS: usize = 64;
pub const SALT_LEN: usize = 16;
const VERIFIER_INFO: &[u8] = b"audiology login verifier v1";
const STORE_KEY_INFO: &[u8] = b"audiology store key v1";

#[derive(Debug, Error)]
pub enum AuthError {
    #[error("user {0} is already registered")]
    AlreadyRegistered(String),
    #[error("password must be at least {MIN_PASSWORD_CHARS} characters")]
    WeakPassword,
    #[error("username must be 1 to {MAX_USERNAME_CHARS} printable characters")]
    InvalidUsername,
    #[error("no user named {0}")]
    UnknownUser(String),
    #[error("authentication failed")]
    AuthenticationFailure,
    #[error("key derivation failed: {0}")]
    Kdf(String),
    #[error("credentials file is malformed: {0}")]
    Malformed(String),
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
}

impl AuthError {
    pub fn code(&self) -> &'static str {
        match self {
            AuthError::AlreadyRegistered(_) => "already-registered",
            AuthError::WeakPassword => "password-policy",
            AuthError::InvalidUsername => "invalid-username",
            AuthError::UnknownUser(_) => "not-found",
            AuthError::AuthenticationFailure => "authentication-failure",
            AuthError::Kdf(_) => "kdf-error",
            AuthError::Malformed(_) => "malformed-credentials",
            AuthError::Io(_) => "io-error",
        }
    }
}

/// Argon2id cost parameters, stored with each credential so that later
/// changes to the defaults do not lock out existing users.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct KdfParams {
    pub algorithm: KdfAlgorithm,
    pub memory_kib: u32,
    pub iterations: u32,
    pub parallelism: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum KdfAlgorithm {
    #[serde(rename = "argon2id-v19")]
    Argon2idV19,
}

impl Default for KdfParams {
    fn default() -> Self {
        Self {
            algorithm: KdfAlgorithm::Argon2idV19,
            memory_kib: Params::DEFAULT_M_COST,
            iterations: Params::DEFAULT_T_COST,
            parallelism: Params::DEFAULT_P_COST,
        }
    }
}

impl KdfParams {
    /// Cheap parameters for tests. Not for real credentials.
    pub fn insecure_fast() -> Self {
        Self { memory_kib: 64, iterations: 1, ..Self::default() }
    }

    fn master(&self, password: &str, salt: &[u8]) -> Result<Zeroizing<[u8; 32]>, AuthError> {
        let params = Params::new(self.memory_kib, self.iterations, self.parallelism, Some(32))
            .map_err(|e| AuthError::Kdf(e.to_string()))?;
        let mut out = Zeroizing::new([0u8; 32]);
        Argon2::new(Algorithm::Argon2id, Version::V0x13, params)
            .hash_password_into(password.as_bytes(), salt, out.as_mut())
            .map_err(|e| AuthError::Kdf(e.to_string()))?;
        Ok(out)
    }
}

fn expand(master: &[u8], info: &[u8]) -> [u8; KEY_LEN] {
    let mut out = [0u8; KEY_LEN];
    Hkdf::<Sha256>::new(None, master)
        .expand(info, &mut out)
        .expect("32 bytes is a valid HKDF-SHA256 output length");
    out
}

fn derive(params: &KdfParams, password: &str, salt: &[u8]) -> Result<([u8; KEY_LEN], StoreKey), AuthError> {
    let master = params.master(password, salt)?;
    Ok((expand(master.as_ref(), VERIFIER_INFO), StoreKey::from_bytes(expand(master.as_ref(), STORE_KEY_INFO))))
}

mod b64 {
    use super::*;

    pub fn serialize<S: Serializer, const N: usize>(bytes: &[u8; N], s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&B64.encode(bytes))
    }

    pub fn deserialize<'de, D: Deserializer<'de>, const N: usize>(d: D) -> Result<[u8; N], D::Error> {
        let text = String::deserialize(d)?;
        let raw = B64.decode(text.as_bytes()).map_err(serde::de::Error::custom)?;
        raw.try_into()
            .map_err(|v: Vec<u8>| serde::de::Error::custom(format!("expected {N} bytes, found {}", v.len())))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CredentialRecord {
    pub username: String,
    #[serde(with = "b64")]
    pub salt: [u8; SALT_LEN],
    #[serde(with = "b64")]
    pub verifier: [u8; KEY_LEN],
    pub kdf_params: KdfParams,
}

fn check_username(username: &str) -> Result<(), AuthError> {
    let n = username.chars().count();
    if username.trim().is_empty() || n > MAX_USERNAME_CHARS || username.chars().any(char::is_control) {
        return Err(AuthError::InvalidUsername);
    }
    Ok(())
}

/// The credentials file: a JSON array of [`CredentialRecord`]s.
#[derive(Debug, Clone)]
pub struct Credentials {
    path: PathBuf,
    params: KdfParams,
}

impl Credentials {
    pub fn new(path: impl Into<PathBuf>) -> Self {
        Self { path: path.into(), params: KdfParams::default() }
    }

    /// Uses `params` for new registrations.
    pub fn with_params(path: impl Into<PathBuf>, params: KdfParams) -> Self {
        Self { path: path.into(), params }
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn records(&self) -> Result<Vec<CredentialRecord>, AuthError> {
        match fs::read(&self.path) {
            Ok(bytes) if bytes.iter().all(u8::is_ascii_whitespace) => Ok(Vec::new()),
            Ok(bytes) => serde_json::from_slice(&bytes).map_err(|e| AuthError::Malformed(e.to_string())),
            Err(e) if e.kind() == io::ErrorKind::NotFound => Ok(Vec::new()),
            Err(e) => Err(e.into()),
        }
    }

    pub fn is_registered(&self, username: &str) -> Result<bool, AuthError> {
        Ok(self.records()?.iter().any(|r| r.username == username))
    }

    fn lock_path(&self) -> PathBuf {
        let mut p = self.path.clone().into_os_string();
        p.push(".lock");
        PathBuf::from(p)
    }

    fn write_all(&self, records: &[CredentialRecord]) -> Result<(), AuthError> {
        let mut tmp = self.path.clone().into_os_string();
        tmp.push(".tmp");
        let tmp = PathBuf::from(tmp);
        let mut options = OpenOptions::new();
        options.write(true).create(true).truncate(true);
        #[cfg(unix)]
        {
            use std::os::unix::fs::OpenOptionsExt;
            options.mode(0o600);
        }
        let mut file = options.open(&tmp)?;
        let json = serde_json::to_vec_pretty(records).expect("credentials serialize");
        file.write_all(&json)?;
        file.write_all(b"\n")?;
        file.sync_all()?;
        fs::rename(&tmp, &self.path)?;
        Ok(())
    }

    /// Registers a new user and returns the credential with the store key
    /// derived from the password.
    pub fn register(&self, username: &str, password: &str) -> Result<(CredentialRecord, StoreKey), AuthError> {
        check_username(username)?;
        if password.chars().count() < MIN_PASSWORD_CHARS {
            return Err(AuthError::WeakPassword);
        }
        let lock = File::options().write(true).create(true).truncate(false).open(self.lock_path())?;
        lock.lock()?;
        let mut records = self.records()?;
        if records.iter().any(|r| r.username == username) {
            return Err(AuthError::AlreadyRegistered(username.to_string()));
        }
        let mut salt = [0u8; SALT_LEN];
        loop {
            OsRng.fill_bytes(&mut salt);
            if !records.iter().any(|r| r.salt == salt) {
                break;
            }
        }
        let (verifier, key) = derive(&self.params, password, &salt)?;
        let record = CredentialRecord { username: username.to_string(), salt, verifier, kdf_params: self.params };
        records.push(record.clone());
        self.write_all(&records)?;
        Ok((record, key))
    }

    /// Verifies the password and returns the same store key that
    /// registration produced.
    pub fn login(&self, username: &str, password: &str) -> Result<StoreKey, AuthError> {
        let record = self
            .records()?
            .into_iter()
            .find(|r| r.username == username)
            .ok_or_else(|| AuthError::UnknownUser(username.to_string()))?;
        let (verifier, key) = derive(&record.kdf_params, password, &record.salt)?;
        if bool::from(verifier.ct_eq(&record.verifier)) {
            Ok(key)
        } else {
            Err(AuthError::AuthenticationFailure)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn creds(dir: &tempfile::TempDir) -> Credentials {
        Credentials::with_params(dir.path().join("credentials.json"), KdfParams::insecure_fast())
    }

    #[test]
    fn register_then_login() {
        let dir = tempfile::tempdir().unwrap();
        let c = creds(&dir);
        let (record, key) = c.register("audiologist", "correct horse").unwrap();
        assert_eq!(c.login("audiologist", "correct horse").unwrap(), key);
        assert_ne!(record.verifier.as_slice(), key.as_bytes().as_slice());
        assert_ne!(record.verifier.as_slice(), b"correct horse".as_slice());
        assert!(matches!(c.login("audiologist", "wrong horse"), Err(AuthError::AuthenticationFailure)));
        assert!(matches!(c.login("nobody", "correct horse"), Err(AuthError::UnknownUser(_))));
    }

    #[test]
    fn policy_and_duplicates() {
        let dir = tempfile::tempdir().unwrap();
        let c = creds(&dir);
        assert_eq!(c.register("u", "abcd").unwrap_err().code(), "password-policy");
        assert_eq!(c.register("", "abcdefgh").unwrap_err().code(), "invalid-username");
        c.register("u", "abcdefgh").unwrap();
        assert_eq!(c.register("u", "abcdefgh2").unwrap_err().code(), "already-registered");
    }

    #[test]
    fn file_layout() {
        let dir = tempfile::tempdir().unwrap();
        let c = creds(&dir);
        let (a, _) = c.register("a", "password-a").unwrap();
        let (b, _) = c.register("b", "password-a").unwrap();
        assert_ne!(a.salt, b.salt);
        assert_ne!(a.verifier, b.verifier);
        let json: serde_json::Value = serde_json::from_slice(&fs::read(c.path()).unwrap()).unwrap();
        let first = &json[0];
        assert_eq!(first["username"], "a");
        assert_eq!(B64.decode(first["salt"].as_str().unwrap()).unwrap().len(), SALT_LEN);
        assert_eq!(B64.decode(first["verifier"].as_str().unwrap()).unwrap().len(), KEY_LEN);
        assert_eq!(first["kdf_params"]["algorithm"], "argon2id-v19");
        #[cfg(unix)]
        {
            use std::os::unix::fs::PermissionsExt;
            assert_eq!(fs::metadata(c.path()).unwrap().permissions().mode() & 0o777, 0o600);
        }
    }

    #[test]
    fn default_parameters_are_argon2_defaults() {
        let p = KdfParams::default();
        assert_eq!((p.memory_kib, p.iterations, p.parallelism), (19 * 1024, 2, 1));
    }
}
