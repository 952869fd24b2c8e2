//! Keyed PRF (HMAC-SHA-256 in counter mode with a one-byte domain tag),
//! a 128-bit MAC, and AES-128-GCM for authenticated encryption.

use aes_gcm::aead::{Aead, KeyInit, Payload};
use aes_gcm::{Aes128Gcm, Nonce};
use hmac::{Hmac, Mac};
use sha2::Sha256;

use super::CryptoError;

type HmacSha256 = Hmac<Sha256>;

pub const TAG_LEN: usize = 16;
pub const AEAD_KEY_LEN: usize = 16;
pub const AEAD_NONCE_LEN: usize = 12;
pub const AEAD_TAG_LEN: usize = 16;

const MAX_PRF_BITS: usize = 512;

pub type Tag = [u8; TAG_LEN];

/// `out_bits` must be a multiple of 8 and at most 512.
///
/// Block `i` is `HMAC(key, tag || i || data)`; blocks are concatenated and
/// truncated. Distinct tags give independent output streams.
pub fn prf(key: &[u8], tag: u8, data: &[u8], out_bits: usize) -> Vec<u8> {
    assert!(out_bits.is_multiple_of(8), "prf output must be whole bytes");
    assert!(out_bits <= MAX_PRF_BITS, "prf output capped at 512 bits");
    let out_len = out_bits / 8;
    let mut out = Vec::with_capacity(out_len + 32);
    let mut counter = 1u8;
    while out.len() < out_len {
        let mut h = <HmacSha256 as Mac>::new_from_slice(key).expect("HMAC accepts any key length");
        h.update(&[tag, counter]);
        h.update(data);
        out.extend_from_slice(&h.finalize().into_bytes());
        counter += 1;
    }
    out.truncate(out_len);
    out
}

/// HMAC-SHA-256 truncated to 128 bits.
pub fn mac(key: &[u8], msg: &[u8]) -> Tag {
    let mut h = <HmacSha256 as Mac>::new_from_slice(key).expect("HMAC accepts any key length");
    h.update(msg);
    let full = h.finalize().into_bytes();
    let mut tag = [0u8; TAG_LEN];
    tag.copy_from_slice(&full[..TAG_LEN]);
    tag
}

/// Constant-time comparison against the recomputed tag.
pub fn verify_mac(key: &[u8], msg: &[u8], tag: &[u8]) -> bool {
    if tag.len() != TAG_LEN {
        return false;
    }
    let mut h = <HmacSha256 as Mac>::new_from_slice(key).expect("HMAC accepts any key length");
    h.update(msg);
    h.verify_truncated_left(tag).is_ok()
}

/// AES-128-GCM. `aad` is authenticated but not encrypted.
pub fn sym_encrypt(
    key: &[u8; AEAD_KEY_LEN],
    nonce: &[u8; AEAD_NONCE_LEN],
    aad: &[u8],
    plaintext: &[u8],
) -> Vec<u8> {
    let cipher = Aes128Gcm::new(key.into());
    cipher
        .encrypt(
            Nonce::from_slice(nonce),
            Payload {
                msg: plaintext,
                aad,
            },
        )
        .expect("AES-GCM encryption is infallible for in-memory buffers")
}

pub fn sym_decrypt(
    key: &[u8; AEAD_KEY_LEN],
    nonce: &[u8; AEAD_NONCE_LEN],
    aad: &[u8],
    ciphertext: &[u8],
) -> Result<Vec<u8>, CryptoError> {
    let cipher = Aes128Gcm::new(key.into());
    cipher
        .decrypt(
            Nonce::from_slice(nonce),
            Payload {
                msg: ciphertext,
                aad,
            },
        )
        .map_err(|_| CryptoError::AuthFail)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, RngCore, SeedableRng};
    use rand_chacha::ChaCha20Rng;
    use std::collections::HashSet;

    #[test]
    fn prf_is_deterministic_and_sized() {
        let k = [7u8; 16];
        assert_eq!(prf(&k, 1, b"abc", 128), prf(&k, 1, b"abc", 128));
        assert_eq!(prf(&k, 1, b"abc", 64).len() * 8, 64);
        assert_eq!(prf(&k, 1, b"abc", 512).len(), 64);
        assert_eq!(prf(&k, 1, b"abc", 48).len(), 6);
        // truncation is a prefix of the longer stream
        assert_eq!(prf(&k, 9, b"x", 128)[..], prf(&k, 9, b"x", 512)[..16]);
    }

    #[test]
    fn prf_tags_separate_domains() {
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        let mut seen = HashSet::new();
        for _ in 0..100 {
            let mut k = [0u8; 16];
            rng.fill_bytes(&mut k);
            let d = b"domain";
            let a = prf(&k, 1, d, 128);
            let b = prf(&k, 2, d, 128);
            assert_ne!(a, b);
            assert!(seen.insert(a));
            assert!(seen.insert(b));
        }
    }

    #[test]
    #[should_panic]
    fn prf_rejects_oversized_output() {
        prf(b"k", 0, b"", 520);
    }

    #[test]
    fn mac_detects_every_single_bit_flip() {
        let key = [3u8; 16];
        let msg: Vec<u8> = (0..32u8).collect();
        let tag = mac(&key, &msg);
        assert!(verify_mac(&key, &msg, &tag));
        for byte in 0..msg.len() {
            for bit in 0..8 {
                let mut m = msg.clone();
                m[byte] ^= 1 << bit;
                assert!(!verify_mac(&key, &m, &tag));
            }
        }
    }

    #[test]
    fn mac_rejects_wrong_keys() {
        let mut rng = ChaCha20Rng::seed_from_u64(2);
        let key = [3u8; 16];
        let tag = mac(&key, b"message");
        for _ in 0..100 {
            let wrong: [u8; 16] = rng.gen();
            if wrong == key {
                continue;
            }
            assert!(!verify_mac(&wrong, b"message", &tag));
        }
        assert!(!verify_mac(&key, b"message", &tag[..8]));
    }

    #[test]
    fn aead_round_trips() {
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        let key: [u8; 16] = rng.gen();
        let nonce: [u8; 12] = rng.gen();
        let ct = sym_encrypt(&key, &nonce, b"", b"");
        assert_eq!(sym_decrypt(&key, &nonce, b"", &ct).unwrap(), Vec::<u8>::new());
        for _ in 0..100 {
            let mut pt = vec![0u8; 1024];
            rng.fill_bytes(&mut pt);
            let nonce: [u8; 12] = rng.gen();
            let ct = sym_encrypt(&key, &nonce, b"aad", &pt);
            assert_eq!(sym_decrypt(&key, &nonce, b"aad", &ct).unwrap(), pt);
        }
    }

    #[test]
    fn aead_detects_mutation_at_every_position() {
        let key = [1u8; 16];
        let nonce = [2u8; 12];
        let ct = sym_encrypt(&key, &nonce, b"hdr", b"310150123456789");
        for i in 0..ct.len() {
            let mut c = ct.clone();
            c[i] ^= 0x01;
            assert_eq!(sym_decrypt(&key, &nonce, b"hdr", &c), Err(CryptoError::AuthFail));
        }
        assert_eq!(sym_decrypt(&key, &nonce, b"other", &ct), Err(CryptoError::AuthFail));
    }
}
