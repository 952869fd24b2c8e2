//! Session key hierarchy and the offline "long-term key only" recovery
//! oracle used to decide forward secrecy.
//!
//! ```text
//! AKA:       MK = prf(IK || CK,  MK_AKA,  identity)
//! ECDH-AKA:  MK = prf(x(abP),    MK_ECDH, CK || IK || NONCE_P || NONCE_S)
//! K_aut = prf(MK, K_AUT) [128]   K_encr = prf(MK, K_ENCR) [128]   MSK = prf(MK, MSK) [512]
//! ```

use std::fmt;

use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::crypto::{f3, f4, mac, prf, SharedSecret, SubscriberKey, Tag};

use super::codec::{
    decode_eap, encode_eap, EapCode, EapMessage, Method, AT_CPUB, AT_IDENTITY, AT_MAC,
    AT_NONCE_P, AT_NONCE_S, AT_RAND, AT_SPUB, SUBTYPE_CHALLENGE, SUBTYPE_IDENTITY,
};

pub(crate) mod tags {
    pub const MK_AKA: u8 = 0x10;
    pub const MK_ECDH: u8 = 0x11;
    pub const K_AUT: u8 = 0x12;
    pub const K_ENCR: u8 = 0x13;
    pub const MSK: u8 = 0x14;
    /// Identity-protection key derived from the ECDH shared secret.
    pub const ID_KEY: u8 = 0x15;
    /// HSS-side MAC key bound to one RAND.
    pub const HSS_MAC: u8 = 0x16;
}

pub const NONCE_LEN: usize = 16;
pub type Nonce = [u8; NONCE_LEN];

#[derive(Clone, PartialEq, Eq)]
pub struct SessionKeys {
    pub mk: [u8; 32],
    pub k_aut: [u8; 16],
    pub k_encr: [u8; 16],
    pub msk: [u8; 64],
}

impl fmt::Debug for SessionKeys {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("SessionKeys(..)")
    }
}

pub enum KeyInputs<'a> {
    Aka {
        identity: &'a [u8],
        ck: &'a [u8; 16],
        ik: &'a [u8; 16],
    },
    EcdhAka {
        shared: &'a [u8],
        ck: &'a [u8; 16],
        ik: &'a [u8; 16],
        nonce_p: &'a Nonce,
        nonce_s: &'a Nonce,
    },
}

fn arr<const N: usize>(v: Vec<u8>) -> [u8; N] {
    v.try_into().expect("prf width")
}

pub fn derive_session_keys(inputs: KeyInputs<'_>) -> SessionKeys {
    let mk: [u8; 32] = match inputs {
        KeyInputs::Aka { identity, ck, ik } => {
            let mut key = ik.to_vec();
            key.extend_from_slice(ck);
            arr(prf(&key, tags::MK_AKA, identity, 256))
        }
        KeyInputs::EcdhAka {
            shared,
            ck,
            ik,
            nonce_p,
            nonce_s,
        } => {
            let mut data = Vec::with_capacity(64);
            data.extend_from_slice(ck);
            data.extend_from_slice(ik);
            data.extend_from_slice(nonce_p);
            data.extend_from_slice(nonce_s);
            arr(prf(shared, tags::MK_ECDH, &data, 256))
        }
    };
    SessionKeys {
        k_aut: arr(prf(&mk, tags::K_AUT, b"", 128)),
        k_encr: arr(prf(&mk, tags::K_ENCR, b"", 128)),
        msk: arr(prf(&mk, tags::MSK, b"", 512)),
        mk,
    }
}

/// Identity-protection key: lets the server decrypt the IMSI using only
/// its epoch private key.
pub fn identity_key(shared: &SharedSecret) -> [u8; 16] {
    arr(prf(shared.as_bytes(), tags::ID_KEY, b"", 128))
}

/// Input to AT_MAC_K: `aP || bP || RAND || NONCE_P || NONCE_S`.
pub fn hss_binding(cpub: &[u8], spub: &[u8], rand: &[u8; 16], nonce_p: &Nonce, nonce_s: &Nonce) -> Vec<u8> {
    let mut d = Vec::with_capacity(cpub.len() + spub.len() + 48);
    d.extend_from_slice(cpub);
    d.extend_from_slice(spub);
    d.extend_from_slice(rand);
    d.extend_from_slice(nonce_p);
    d.extend_from_slice(nonce_s);
    d
}

/// AT_MAC_K value, computable only with the subscriber key.
pub fn hss_mac(k: &SubscriberKey, rand: &[u8; 16], binding: &[u8]) -> Tag {
    let key = prf(k.as_bytes(), tags::HSS_MAC, rand, 128);
    mac(&key, binding)
}

/// SHA-256 over length-prefixed messages.
pub fn transcript_hash(messages: &[Vec<u8>]) -> [u8; 32] {
    let mut h = Sha256::new();
    for m in messages {
        h.update((m.len() as u32).to_be_bytes());
        h.update(m);
    }
    h.finalize().into()
}

/// AT_MAC input for the baseline method: the message with its MAC zeroed.
pub fn aka_mac_input(msg: &EapMessage) -> Vec<u8> {
    encode_eap(&msg.zeroed(AT_MAC))
}

/// AT_MAC input for the ECDH method: hash of every earlier message, then
/// the current message with its MAC zeroed.
pub fn transcript_mac_input(earlier: &[Vec<u8>], msg: &EapMessage) -> Vec<u8> {
    let mut d = transcript_hash(earlier).to_vec();
    d.extend_from_slice(&encode_eap(&msg.zeroed(AT_MAC)));
    d
}

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
#[error("session keys are not recoverable from the long-term key and transcript")]
pub struct Unrecoverable;

/// What an adversary holding `k` and every transcript byte can compute.
///
/// For the baseline method CK/IK follow from K and RAND, and the identity
/// is on the wire, so MK falls out directly. For the ECDH method MK also
/// needs `x(abP)`; the oracle tries every value derivable from public
/// material and accepts a candidate only if it verifies the challenge MAC.
pub fn derive_from_longterm(k: &SubscriberKey, transcript: &[Vec<u8>]) -> Result<SessionKeys, Unrecoverable> {
    let msgs: Vec<EapMessage> = transcript
        .iter()
        .map(|b| decode_eap(b))
        .collect::<Result<_, _>>()
        .map_err(|_| Unrecoverable)?;
    let method = msgs.iter().find_map(EapMessage::method).ok_or(Unrecoverable)?;
    let is = |m: &EapMessage, code, subtype| m.code == code && m.subtype() == Some(subtype);

    // the challenge that was answered is the last one
    let (ci, challenge) = msgs
        .iter()
        .enumerate()
        .rev()
        .find(|(_, m)| is(m, EapCode::Request, SUBTYPE_CHALLENGE))
        .ok_or(Unrecoverable)?;
    let rand: [u8; 16] = attr_fixed(challenge, AT_RAND)?;
    let ck = f3(k, &rand);
    let ik = f4(k, &rand);

    match method {
        Method::Aka => {
            let id_msg = msgs
                .iter()
                .find(|m| is(m, EapCode::Response, SUBTYPE_IDENTITY))
                .ok_or(Unrecoverable)?;
            let identity = id_msg
                .attr(AT_IDENTITY)
                .and_then(|a| a.variable_data().ok())
                .ok_or(Unrecoverable)?;
            Ok(derive_session_keys(KeyInputs::Aka {
                identity,
                ck: &ck,
                ik: &ik,
            }))
        }
        Method::EcdhAka => {
            let id_req = msgs
                .iter()
                .find(|m| is(m, EapCode::Request, SUBTYPE_IDENTITY))
                .ok_or(Unrecoverable)?;
            let id_resp = msgs
                .iter()
                .find(|m| is(m, EapCode::Response, SUBTYPE_IDENTITY))
                .ok_or(Unrecoverable)?;
            let nonce_p: Nonce = attr_fixed(id_resp, AT_NONCE_P)?;
            let nonce_s: Nonce = attr_fixed(challenge, AT_NONCE_S)?;
            let tag: Tag = attr_fixed(challenge, AT_MAC)?;
            let mut candidates: Vec<Vec<u8>> = Vec::new();
            for (m, id) in [(id_req, AT_SPUB), (id_resp, AT_CPUB)] {
                if let Some(enc) = m.attr(id).and_then(|a| a.variable_data().ok()) {
                    let width = enc.len().saturating_sub(1) / 2;
                    if width > 0 {
                        candidates.push(enc[1..1 + width].to_vec());
                        candidates.push(enc[1 + width..].to_vec());
                    }
                }
            }
            candidates.push(vec![0u8; candidates.first().map_or(32, Vec::len)]);
            candidates.push(k.as_bytes().to_vec());
            let earlier = &transcript[..ci];
            let mac_in = transcript_mac_input(earlier, challenge);
            for shared in candidates {
                let keys = derive_session_keys(KeyInputs::EcdhAka {
                    shared: &shared,
                    ck: &ck,
                    ik: &ik,
                    nonce_p: &nonce_p,
                    nonce_s: &nonce_s,
                });
                if crate::crypto::verify_mac(&keys.k_aut, &mac_in, &tag) {
                    return Ok(keys);
                }
            }
            Err(Unrecoverable)
        }
    }
}

fn attr_fixed<const N: usize>(m: &EapMessage, id: u8) -> Result<[u8; N], Unrecoverable> {
    m.attr(id)
        .and_then(|a| a.fixed_data(N).ok())
        .and_then(|d| d.try_into().ok())
        .ok_or(Unrecoverable)
}
