//! Encrypted single-file storage of hearing test records, local user
//! credentials, and bulk export/import.

pub mod auth;
mod error;
mod format;
mod key;
pub mod search;
mod store;
pub mod transfer;

pub use auth::{AuthError, CredentialRecord, Credentials, KdfParams};
pub use error::{Result, StoreError};
pub use format::SCHEMA_VERSION;
pub use key::{StoreKey, KEY_LEN};
pub use search::{SearchCriteria, SearchHit};
pub use store::Store;
pub use transfer::{export_jsonl, import_jsonl, CollisionPolicy, ImportReport};
