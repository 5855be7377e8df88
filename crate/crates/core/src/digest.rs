//! Stable identifiers for configurations.

use serde::Serialize;
use sha2::{Digest, Sha256};

/// Canonical JSON: object keys sorted, no whitespace.
pub fn canonical_json<T: Serialize + ?Sized>(value: &T) -> String {
    // serde_json's default map is ordered by key
    let v = serde_json::to_value(value).expect("serializable value");
    serde_json::to_string(&v).expect("json value")
}

/// First 16 hex digits of the SHA-256 of the canonical JSON.
pub fn digest_of<T: Serialize + ?Sized>(value: &T) -> String {
    let hash = Sha256::digest(canonical_json(value).as_bytes());
    hex::encode(&hash[..8])
}
