//! On-disk layout.
//!
//! ```text
//! header  magic "AUDSTORE" | schema version u32 LE | file id [16] | reserved [4]
//! frame*  length u32 LE | nonce [24] | XChaCha20-Poly1305 ciphertext
//! ```
//!
//! Every frame is authenticated together with the header and its sequence
//! number, so frames cannot be reordered, dropped from the middle, or moved
//! between files. The first frame is a key check; each later frame holds one
//! atomic batch of table operations.

use audiology_core::ExamKey;
use chacha20poly1305::aead::{Aead, KeyInit, Payload};
use chacha20poly1305::{XChaCha20Poly1305, XNonce};
use hkdf::Hkdf;
use rand::rngs::OsRng;
use rand::RngCore;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::Sha256;
use zeroize::Zeroizing;

use crate::key::{StoreKey, KEY_LEN};

pub const MAGIC: &[u8; 8] = b"AUDSTORE";
pub const SCHEMA_VERSION: u32 = 1;
pub const HEADER_LEN: usize = 32;
pub const NONCE_LEN: usize = 24;
const LEN_PREFIX: usize = 4;
const TAG_LEN: usize = 16;
const MAX_FRAME: usize = 1 << 30;
const CHECK: &str = "audiology-store";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Header {
    pub version: u32,
    pub file_id: [u8; 16],
}

impl Header {
    pub fn fresh() -> Self {
        let mut file_id = [0u8; 16];
        OsRng.fill_bytes(&mut file_id);
        Self { version: SCHEMA_VERSION, file_id }
    }

    pub fn encode(&self) -> [u8; HEADER_LEN] {
        let mut out = [0u8; HEADER_LEN];
        out[..8].copy_from_slice(MAGIC);
        out[8..12].copy_from_slice(&self.version.to_le_bytes());
        out[12..28].copy_from_slice(&self.file_id);
        out
    }

    /// `None` unless `bytes` starts with a store header.
    pub fn decode(bytes: &[u8]) -> Option<Self> {
        if bytes.len() < HEADER_LEN || &bytes[..8] != MAGIC {
            return None;
        }
        let version = u32::from_le_bytes(bytes[8..12].try_into().ok()?);
        if version == 0 {
            return None;
        }
        Some(Self { version, file_id: bytes[12..28].try_into().ok()? })
    }
}

/// One table mutation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum Op {
    Check { magic: String },
    Put { table: String, key: ExamKey, record: Value },
    Delete { table: String, key: ExamKey },
}

impl Op {
    pub fn check() -> Self {
        Op::Check { magic: CHECK.to_string() }
    }

    pub fn is_check(&self) -> bool {
        matches!(self, Op::Check { magic } if magic == CHECK)
    }
}

pub struct FrameCipher {
    aead: XChaCha20Poly1305,
    header: [u8; HEADER_LEN],
}

impl FrameCipher {
    /// Frames are sealed under a per-file subkey of the store key.
    pub fn new(key: &StoreKey, header: &Header) -> Self {
        let hk = Hkdf::<Sha256>::new(Some(&header.file_id), key.as_bytes());
        let mut sub = Zeroizing::new([0u8; KEY_LEN]);
        hk.expand(b"audiology-store frame key v1", sub.as_mut())
            .expect("32 bytes is a valid HKDF-SHA256 output length");
        Self {
            aead: XChaCha20Poly1305::new(sub.as_ref().into()),
            header: header.encode(),
        }
    }

    fn aad(&self, seq: u64) -> [u8; HEADER_LEN + 8] {
        let mut aad = [0u8; HEADER_LEN + 8];
        aad[..HEADER_LEN].copy_from_slice(&self.header);
        aad[HEADER_LEN..].copy_from_slice(&seq.to_le_bytes());
        aad
    }

    pub fn seal(&self, seq: u64, ops: &[Op]) -> Vec<u8> {
        let plaintext = Zeroizing::new(serde_json::to_vec(ops).expect("ops serialize"));
        let mut nonce = [0u8; NONCE_LEN];
        OsRng.fill_bytes(&mut nonce);
        let aad = self.aad(seq);
        let ct = self
            .aead
            .encrypt(XNonce::from_slice(&nonce), Payload { msg: &plaintext, aad: &aad })
            .expect("in-memory encryption does not fail");
        let mut frame = Vec::with_capacity(LEN_PREFIX + NONCE_LEN + ct.len());
        frame.extend_from_slice(&(ct.len() as u32).to_le_bytes());
        frame.extend_from_slice(&nonce);
        frame.extend_from_slice(&ct);
        frame
    }

    /// `None` when the frame fails authentication or does not decode.
    pub fn open(&self, seq: u64, frame: &RawFrame<'_>) -> Option<Vec<Op>> {
        let aad = self.aad(seq);
        let plaintext = Zeroizing::new(
            self.aead
                .decrypt(XNonce::from_slice(frame.nonce), Payload { msg: frame.ciphertext, aad: &aad })
                .ok()?,
        );
        serde_json::from_slice(&plaintext).ok()
    }
}

pub struct RawFrame<'a> {
    pub nonce: &'a [u8],
    pub ciphertext: &'a [u8],
}

/// Splits the bytes after the header into complete frames. Returns them
/// with the offset just past the last complete frame; anything beyond is a
/// torn write.
pub fn split_frames(body: &[u8]) -> (Vec<RawFrame<'_>>, usize) {
    let mut frames = Vec::new();
    let mut at = 0;
    while body.len() - at >= LEN_PREFIX + NONCE_LEN {
        let len = u32::from_le_bytes(body[at..at + LEN_PREFIX].try_into().unwrap()) as usize;
        if !(TAG_LEN..=MAX_FRAME).contains(&len) {
            break;
        }
        let start = at + LEN_PREFIX + NONCE_LEN;
        if body.len() - start < len {
            break;
        }
        frames.push(RawFrame { nonce: &body[at + LEN_PREFIX..start], ciphertext: &body[start..start + len] });
        at = start + len;
    }
    (frames, at)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_round_trip() {
        let h = Header::fresh();
        assert_eq!(Header::decode(&h.encode()), Some(h));
        assert_eq!(Header::decode(b"not a store at all, clearly not!"), None);
    }

    #[test]
    fn frames_are_bound_to_sequence_and_key() {
        let h = Header::fresh();
        let key = StoreKey::random();
        let c = FrameCipher::new(&key, &h);
        let bytes = c.seal(3, &[Op::check()]);
        let (frames, end) = split_frames(&bytes);
        assert_eq!(end, bytes.len());
        assert_eq!(c.open(3, &frames[0]), Some(vec![Op::check()]));
        assert_eq!(c.open(4, &frames[0]), None);
        assert_eq!(FrameCipher::new(&StoreKey::random(), &h).open(3, &frames[0]), None);
        assert_eq!(FrameCipher::new(&key, &Header::fresh()).open(3, &frames[0]), None);
    }

    #[test]
    fn torn_tail_is_excluded() {
        let c = FrameCipher::new(&StoreKey::random(), &Header::fresh());
        let mut bytes = c.seal(0, &[Op::check()]);
        let whole = bytes.len();
        bytes.extend_from_slice(&c.seal(1, &[Op::check()])[..20]);
        let (frames, end) = split_frames(&bytes);
        assert_eq!(frames.len(), 1);
        assert_eq!(end, whole);
    }
}
