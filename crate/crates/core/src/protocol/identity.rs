//! Subscriber identities as carried in AT_IDENTITY.
//!
//! The wire form is a one-character kind prefix followed by the value:
//! `0` permanent (IMSI digits), `2` pseudonym, `4` fast re-authentication.

use std::fmt;

use rand::RngCore;
use thiserror::Error;

pub const IMSI_DIGITS: usize = 15;
pub const MAX_TOKEN_LEN: usize = 64;

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
pub enum IdentityError {
    #[error("IMSI must be exactly 15 decimal digits")]
    BadImsi,
    #[error("identity token must be 1..=64 bytes")]
    BadToken,
    #[error("unknown identity prefix")]
    UnknownPrefix,
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Imsi([u8; IMSI_DIGITS]);

impl Imsi {
    pub fn parse(s: &str) -> Result<Self, IdentityError> {
        Self::from_bytes(s.as_bytes())
    }

    pub fn from_bytes(b: &[u8]) -> Result<Self, IdentityError> {
        if b.len() != IMSI_DIGITS || !b.iter().all(u8::is_ascii_digit) {
            return Err(IdentityError::BadImsi);
        }
        let mut out = [0u8; IMSI_DIGITS];
        out.copy_from_slice(b);
        Ok(Imsi(out))
    }

    /// Home-network prefix followed by the zero-padded subscriber index; used to
    /// provision simulated populations.
    pub fn numbered(index: u64) -> Self {
        Self::parse(&format!("310150{index:09}")).expect("index fits nine digits")
    }

    /// ASCII digits; this is the byte pattern identity-catching scans for.
    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }
}

impl fmt::Debug for Imsi {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Imsi({self})")
    }
}

impl fmt::Display for Imsi {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(std::str::from_utf8(&self.0).expect("ascii digits"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum IdentityKind {
    Permanent,
    Pseudonym,
    FastReauth,
}

impl IdentityKind {
    fn prefix(self) -> u8 {
        match self {
            IdentityKind::Permanent => b'0',
            IdentityKind::Pseudonym => b'2',
            IdentityKind::FastReauth => b'4',
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Identity {
    kind: IdentityKind,
    value: Vec<u8>,
}

impl Identity {
    pub fn permanent(imsi: &Imsi) -> Self {
        Identity {
            kind: IdentityKind::Permanent,
            value: imsi.as_bytes().to_vec(),
        }
    }

    pub fn token(kind: IdentityKind, value: Vec<u8>) -> Result<Self, IdentityError> {
        match kind {
            IdentityKind::Permanent => {
                Imsi::from_bytes(&value)?;
            }
            _ if value.is_empty() || value.len() > MAX_TOKEN_LEN => {
                return Err(IdentityError::BadToken)
            }
            _ => {}
        }
        Ok(Identity { kind, value })
    }

    /// Fresh server-issued pseudonym: 16 lowercase hex characters.
    pub fn random_pseudonym<R: RngCore + ?Sized>(rng: &mut R) -> Self {
        let mut raw = [0u8; 8];
        rng.fill_bytes(&mut raw);
        let value = raw.iter().map(|b| format!("{b:02x}")).collect::<String>().into_bytes();
        Identity {
            kind: IdentityKind::Pseudonym,
            value,
        }
    }

    pub fn kind(&self) -> IdentityKind {
        self.kind
    }

    pub fn value(&self) -> &[u8] {
        &self.value
    }

    pub fn imsi(&self) -> Option<Imsi> {
        match self.kind {
            IdentityKind::Permanent => Imsi::from_bytes(&self.value).ok(),
            _ => None,
        }
    }

    pub fn to_wire(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.value.len() + 1);
        out.push(self.kind.prefix());
        out.extend_from_slice(&self.value);
        out
    }

    pub fn from_wire(bytes: &[u8]) -> Result<Self, IdentityError> {
        let (&prefix, value) = bytes.split_first().ok_or(IdentityError::UnknownPrefix)?;
        let kind = match prefix {
            b'0' => IdentityKind::Permanent,
            b'2' => IdentityKind::Pseudonym,
            b'4' => IdentityKind::FastReauth,
            _ => return Err(IdentityError::UnknownPrefix),
        };
        Identity::token(kind, value.to_vec())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    #[test]
    fn imsi_validation() {
        assert!(Imsi::parse("310150123456789").is_ok());
        assert_eq!(Imsi::parse("31015012345678"), Err(IdentityError::BadImsi));
        assert_eq!(Imsi::parse("31015012345678a"), Err(IdentityError::BadImsi));
        assert_eq!(Imsi::numbered(42).to_string(), "310150000000042");
    }

    #[test]
    fn wire_round_trip() {
        let mut rng = ChaCha20Rng::seed_from_u64(0);
        let ids = [
            Identity::permanent(&Imsi::numbered(7)),
            Identity::random_pseudonym(&mut rng),
            Identity::token(IdentityKind::FastReauth, vec![b'x'; 64]).unwrap(),
        ];
        for id in ids {
            assert_eq!(Identity::from_wire(&id.to_wire()).unwrap(), id);
        }
        assert_eq!(Identity::from_wire(b"9abc"), Err(IdentityError::UnknownPrefix));
        assert_eq!(Identity::from_wire(b"0123"), Err(IdentityError::BadImsi));
        assert_eq!(
            Identity::token(IdentityKind::Pseudonym, vec![0; 65]),
            Err(IdentityError::BadToken)
        );
    }

    #[test]
    fn permanent_wire_form_contains_imsi_digits() {
        let imsi = Imsi::numbered(123);
        let wire = Identity::permanent(&imsi).to_wire();
        assert!(wire.windows(IMSI_DIGITS).any(|w| w == imsi.as_bytes()));
    }
}
