//! Cryptographic building blocks: prime-field elliptic curves and ECDH,
//! a keyed PRF with the MAC/AEAD/KDF built around it, and the UMTS AKA
//! function family with sequence-number management.
//!
//! Everything here is simulation grade. Scalar multiplication is not
//! constant time and the AKA functions are PRF truncations rather than
//! MILENAGE.

mod aka;
mod ec;
mod field;
mod selftest;
mod symmetric;

pub use aka::{
    aka_generate_vector, f1, f1_star, f2, f3, f4, f5, resynchronize, verify_autn, Amf, AuthVector,
    Autn, Auts, AutnError, AkaResponse, HssSqn, Sqn, SqnState, SubscriberKey, DEFAULT_DELTA_MAX,
    SQN_MASK,
};
pub use ec::{
    ecdh_shared, point_add, scalar_mul, CurveParams, EcKeyPair, EcPoint, Scalar, SharedSecret,
};
pub use selftest::{run_self_tests, Check, SelfTestReport};
pub use symmetric::{
    mac, prf, sym_decrypt, sym_encrypt, verify_mac, Tag, AEAD_KEY_LEN, AEAD_NONCE_LEN,
    AEAD_TAG_LEN, TAG_LEN,
};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CryptoError {
    #[error("point is not on the curve")]
    PointNotOnCurve,
    #[error("scalar multiplication produced the point at infinity")]
    InfinityResult,
    #[error("scalar outside [1, n-1]")]
    ScalarOutOfRange,
    #[error("invalid curve parameters: {0}")]
    InvalidCurve(&'static str),
    #[error("malformed point encoding")]
    BadPointEncoding,
    #[error("authenticated decryption failed")]
    AuthFail,
    #[error("AUTS rejected")]
    RejectAuts,
    #[error("expected {expected} bytes, got {actual}")]
    BadLength { expected: usize, actual: usize },
}
