//! UMTS AKA functions f1..f5 and f1*, authentication vectors, and SQN
//! freshness checking with AUTS-based resynchronisation.
//!
//! Each function is a truncation of [`prf`] keyed by the subscriber key with
//! its own domain tag (f1 = 1 .. f5 = 5, f1* = 6).

use std::fmt;

use rand::RngCore;

use super::symmetric::prf;
use super::CryptoError;

pub const SQN_MASK: u64 = (1 << 48) - 1;
pub const DEFAULT_DELTA_MAX: u64 = 1 << 28;

const TAG_F1: u8 = 1;
const TAG_F2: u8 = 2;
const TAG_F3: u8 = 3;
const TAG_F4: u8 = 4;
const TAG_F5: u8 = 5;
const TAG_F1_STAR: u8 = 6;

/// 128-bit long-term key shared by the USIM and the HSS/AuC.
#[derive(Clone, Copy, PartialEq, Eq)]
pub struct SubscriberKey(pub [u8; 16]);

impl SubscriberKey {
    pub fn from_slice(bytes: &[u8]) -> Result<Self, CryptoError> {
        let arr: [u8; 16] = bytes.try_into().map_err(|_| CryptoError::BadLength {
            expected: 16,
            actual: bytes.len(),
        })?;
        Ok(SubscriberKey(arr))
    }

    pub fn random<R: RngCore + ?Sized>(rng: &mut R) -> Self {
        let mut k = [0u8; 16];
        rng.fill_bytes(&mut k);
        SubscriberKey(k)
    }

    pub fn as_bytes(&self) -> &[u8; 16] {
        &self.0
    }
}

impl fmt::Debug for SubscriberKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("SubscriberKey(..)")
    }
}

/// 48-bit sequence number.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[derive(Default)]
pub struct Sqn(u64);

impl Sqn {
    pub fn new(value: u64) -> Self {
        assert!(value <= SQN_MASK, "SQN is 48 bits");
        Sqn(value)
    }

    pub fn value(self) -> u64 {
        self.0
    }

    pub fn to_bytes(self) -> [u8; 6] {
        let b = self.0.to_be_bytes();
        [b[2], b[3], b[4], b[5], b[6], b[7]]
    }

    pub fn from_bytes(b: [u8; 6]) -> Self {
        Sqn(u64::from_be_bytes([0, 0, b[0], b[1], b[2], b[3], b[4], b[5]]))
    }

    fn next(self) -> Self {
        Sqn((self.0 + 1) & SQN_MASK)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct Amf(pub u16);

/// `SQN ⊕ AK (48) || AMF (16) || MAC-A (64)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Autn(pub [u8; 16]);

impl Autn {
    pub fn sqn_xor_ak(&self) -> [u8; 6] {
        self.0[..6].try_into().unwrap()
    }
    pub fn amf(&self) -> Amf {
        Amf(u16::from_be_bytes([self.0[6], self.0[7]]))
    }
    pub fn mac_a(&self) -> [u8; 8] {
        self.0[8..].try_into().unwrap()
    }
}

/// `SQN_MS ⊕ AK (48) || MAC-S (64)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Auts(pub [u8; 14]);

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AuthVector {
    pub rand: [u8; 16],
    pub xres: [u8; 8],
    pub ck: [u8; 16],
    pub ik: [u8; 16],
    pub autn: Autn,
}

fn mac_input(rand: &[u8; 16], sqn: Sqn, amf: Amf) -> Vec<u8> {
    let mut d = Vec::with_capacity(24);
    d.extend_from_slice(rand);
    d.extend_from_slice(&sqn.to_bytes());
    d.extend_from_slice(&amf.0.to_be_bytes());
    d
}

fn arr<const N: usize>(v: Vec<u8>) -> [u8; N] {
    v.try_into().expect("prf returned the requested width")
}

/// Network authentication code MAC-A.
pub fn f1(k: &SubscriberKey, rand: &[u8; 16], sqn: Sqn, amf: Amf) -> [u8; 8] {
    arr(prf(&k.0, TAG_F1, &mac_input(rand, sqn, amf), 64))
}

/// Resynchronisation code MAC-S.
pub fn f1_star(k: &SubscriberKey, rand: &[u8; 16], sqn: Sqn, amf: Amf) -> [u8; 8] {
    arr(prf(&k.0, TAG_F1_STAR, &mac_input(rand, sqn, amf), 64))
}

/// Expected response.
pub fn f2(k: &SubscriberKey, rand: &[u8; 16]) -> [u8; 8] {
    arr(prf(&k.0, TAG_F2, rand, 64))
}

/// Cipher key.
pub fn f3(k: &SubscriberKey, rand: &[u8; 16]) -> [u8; 16] {
    arr(prf(&k.0, TAG_F3, rand, 128))
}

/// Integrity key.
pub fn f4(k: &SubscriberKey, rand: &[u8; 16]) -> [u8; 16] {
    arr(prf(&k.0, TAG_F4, rand, 128))
}

/// Anonymity key.
pub fn f5(k: &SubscriberKey, rand: &[u8; 16]) -> [u8; 6] {
    arr(prf(&k.0, TAG_F5, rand, 48))
}

fn xor6(a: [u8; 6], b: [u8; 6]) -> [u8; 6] {
    let mut out = [0u8; 6];
    for i in 0..6 {
        out[i] = a[i] ^ b[i];
    }
    out
}

pub fn aka_generate_vector(k: &SubscriberKey, sqn: Sqn, amf: Amf, rand: [u8; 16]) -> AuthVector {
    let ak = f5(k, &rand);
    let mut autn = [0u8; 16];
    autn[..6].copy_from_slice(&xor6(sqn.to_bytes(), ak));
    autn[6..8].copy_from_slice(&amf.0.to_be_bytes());
    autn[8..].copy_from_slice(&f1(k, &rand, sqn, amf));
    AuthVector {
        rand,
        xres: f2(k, &rand),
        ck: f3(k, &rand),
        ik: f4(k, &rand),
        autn: Autn(autn),
    }
}

/// USIM-side freshness state. Accepts `SQN` iff
/// `last_accepted < SQN <= last_accepted + delta_max`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SqnState {
    pub last_accepted: Sqn,
    pub delta_max: u64,
}

impl SqnState {
    pub fn new(last_accepted: Sqn) -> Self {
        SqnState {
            last_accepted,
            delta_max: DEFAULT_DELTA_MAX,
        }
    }

    pub fn in_window(&self, sqn: Sqn) -> bool {
        let last = self.last_accepted.value();
        sqn.value() > last && sqn.value() - last <= self.delta_max
    }
}

impl Default for SqnState {
    fn default() -> Self {
        SqnState::new(Sqn::new(0))
    }
}

/// HSS-side counter for one subscriber.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct HssSqn {
    pub current: Sqn,
}

impl HssSqn {
    /// Advances the counter and returns the SQN for the next vector.
    pub fn advance(&mut self) -> Sqn {
        self.current = self.current.next();
        self.current
    }
}


#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AkaResponse {
    pub res: [u8; 8],
    pub ck: [u8; 16],
    pub ik: [u8; 16],
    pub sqn: Sqn,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum AutnError {
    #[error("MAC-A mismatch")]
    MacFailure,
    #[error("SQN out of window")]
    SyncFailure { auts: Auts },
}

/// USIM processing of a challenge. On success `state.last_accepted` moves
/// to the network's SQN.
pub fn verify_autn(
    k: &SubscriberKey,
    rand: &[u8; 16],
    autn: &Autn,
    state: &mut SqnState,
) -> Result<AkaResponse, AutnError> {
    let ak = f5(k, rand);
    let sqn = Sqn::from_bytes(xor6(autn.sqn_xor_ak(), ak));
    let expected = f1(k, rand, sqn, autn.amf());
    if !constant_time_eq(&expected, &autn.mac_a()) {
        return Err(AutnError::MacFailure);
    }
    if !state.in_window(sqn) {
        let sqn_ms = state.last_accepted;
        let mut auts = [0u8; 14];
        auts[..6].copy_from_slice(&xor6(sqn_ms.to_bytes(), ak));
        auts[6..].copy_from_slice(&f1_star(k, rand, sqn_ms, Amf::default()));
        return Err(AutnError::SyncFailure { auts: Auts(auts) });
    }
    state.last_accepted = sqn;
    Ok(AkaResponse {
        res: f2(k, rand),
        ck: f3(k, rand),
        ik: f4(k, rand),
        sqn,
    })
}

/// HSS processing of an AUTS. On success the HSS counter is set to the
/// USIM's SQN so the next vector lands inside the USIM window.
pub fn resynchronize(
    auts: &Auts,
    rand: &[u8; 16],
    k: &SubscriberKey,
    server: &mut HssSqn,
) -> Result<Sqn, CryptoError> {
    let ak = f5(k, rand);
    let sqn_ms = Sqn::from_bytes(xor6(auts.0[..6].try_into().unwrap(), ak));
    let expected = f1_star(k, rand, sqn_ms, Amf::default());
    if !constant_time_eq(&expected, &auts.0[6..]) {
        return Err(CryptoError::RejectAuts);
    }
    server.current = sqn_ms;
    Ok(sqn_ms)
}

fn constant_time_eq(a: &[u8], b: &[u8]) -> bool {
    a.len() == b.len() && a.iter().zip(b).fold(0u8, |acc, (x, y)| acc | (x ^ y)) == 0
}
