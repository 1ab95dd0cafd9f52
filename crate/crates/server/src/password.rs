//! Password hashing. Both calls are CPU-heavy; run them off the async
//! threads and outside the platform lock.

use argon2::password_hash::{PasswordHash, PasswordHasher, PasswordVerifier, SaltString};
use argon2::Argon2;

use crate::error::ApiError;

pub const MIN_LENGTH: usize = 8;

pub fn hash(password: &str) -> Result<String, ApiError> {
    if password.chars().count() < MIN_LENGTH {
        return Err(ApiError::Invalid(format!("passwords need at least {MIN_LENGTH} characters")));
    }
    let salt_bytes: [u8; 16] = rand::random();
    let salt = SaltString::encode_b64(&salt_bytes).map_err(|e| ApiError::Internal(format!("salt: {e}")))?;
    Argon2::default()
        .hash_password(password.as_bytes(), &salt)
        .map(|h| h.to_string())
        .map_err(|e| ApiError::Internal(format!("hashing password: {e}")))
}

pub fn verify(stored: &str, password: &str) -> bool {
    PasswordHash::new(stored).is_ok_and(|h| Argon2::default().verify_password(password.as_bytes(), &h).is_ok())
}

pub async fn hash_async(password: String) -> Result<String, ApiError> {
    tokio::task::spawn_blocking(move || hash(&password)).await.map_err(|e| ApiError::Internal(e.to_string()))?
}

pub async fn verify_async(stored: String, password: String) -> bool {
    tokio::task::spawn_blocking(move || verify(&stored, &password)).await.unwrap_or(false)
}
