//! Baseline EAP-AKA full authentication.
//!
//! ```text
//! S -> P  Request/Identity   AT_ANY_ID_REQ | AT_PERMANENT_ID_REQ
//! P -> S  Response/Identity  AT_IDENTITY              (IMSI on first contact)
//! S -> P  Request/Challenge  AT_RAND AT_AUTN AT_ENCR_DATA AT_MAC
//! P -> S  Response/Challenge AT_RES AT_MAC
//! S -> P  Success
//! ```
//!
//! A peer whose SQN window rejects AUTN answers with AT_AUTS instead; the
//! server resynchronises the HSS and issues a fresh challenge. AT_ENCR_DATA
//! carries the pseudonym the peer should use next time.

use rand::{Rng, RngCore};

use crate::crypto::{mac, sym_decrypt, sym_encrypt, verify_mac, Autn, AutnError, Auts};

use super::backend::{AaaServer, Usim};
use super::codec::{
    Attribute, EapMessage, Method, AT_ANY_ID_REQ, AT_AUTN, AT_AUTS, AT_ENCR_DATA,
    AT_IDENTITY, AT_MAC, AT_PERMANENT_ID_REQ, AT_RAND, AT_RES, SUBTYPE_AUTH_REJECT,
    SUBTYPE_CHALLENGE, SUBTYPE_CLIENT_ERROR, SUBTYPE_IDENTITY, SUBTYPE_SYNC_FAILURE,
};
use super::identity::{Identity, IdentityKind};
use super::keys::{aka_mac_input, derive_session_keys, KeyInputs};
use super::session::{
    fixed_attr, variable_attr, PeerSession, Protocol, ServerInput, ServerSession, SessionError,
    SessionState, StepOutput,
};

/// Resynchronisations the server tolerates in one session.
pub const MAX_RESYNCS: u32 = 1;
/// AT_AUTS answers the peer sends before giving up.
pub const MAX_SYNC_FAILURES: u32 = 2;

const IV_LEN: usize = 12;

pub fn aka_server_step<R: RngCore + ?Sized>(
    mut s: ServerSession,
    input: ServerInput<'_>,
    aaa: &AaaServer,
    rng: &mut R,
) -> (ServerSession, StepOutput) {
    assert_eq!(s.protocol, Protocol::Aka, "AKA step on a non-AKA session");
    if s.state.is_terminal() {
        return s.finished();
    }
    let m = match input {
        ServerInput::Start if s.state == SessionState::Idle => {
            s.identifier = rng.gen();
            let id_req = if aaa.request_permanent_id { AT_PERMANENT_ID_REQ } else { AT_ANY_ID_REQ };
            let msg = EapMessage::request(
                s.identifier,
                Method::Aka,
                SUBTYPE_IDENTITY,
                vec![Attribute::fixed(id_req, &[])],
            )
            .expect("identity request is well formed");
            s.enter(SessionState::IdentitySent);
            return s.send(msg);
        }
        ServerInput::Start => return s.fail(SessionError::Unexpected),
        ServerInput::Message(m) => m,
    };
    s.record(m);
    if let Err(e) = s.check_response(m) {
        return s.fail(e);
    }
    match (s.state, m.subtype().unwrap_or_default()) {
        (SessionState::IdentitySent, SUBTYPE_IDENTITY) => match resolve_identity(&s, m, aaa) {
            Ok((wire, imsi)) => {
                s.identity_wire = Some(wire);
                s.subscriber = Some(imsi);
                issue_challenge(s, aaa, rng)
            }
            Err(e) => s.fail(e),
        },
        (SessionState::ChallengeProcessed, SUBTYPE_CHALLENGE) => match check_challenge_response(&s, m) {
            Ok(()) => {
                s.enter(SessionState::Done);
                s.keys = s.pending_keys.take();
                let id = s.identifier;
                s.send(EapMessage::success(id))
            }
            Err(e) => s.fail(e),
        },
        (SessionState::ChallengeProcessed, SUBTYPE_SYNC_FAILURE) => {
            if s.resyncs >= MAX_RESYNCS {
                return s.fail(SessionError::ResyncLimit);
            }
            let auts = match m.attr(AT_AUTS).map(|a| a.value()) {
                Some(v) if v.len() == 14 => Auts(v.try_into().expect("length checked")),
                _ => return s.fail(SessionError::BadAttribute(AT_AUTS)),
            };
            let imsi = s.subscriber.clone().expect("subscriber set before challenge");
            let rand = s.vector.as_ref().expect("vector set before challenge").rand;
            if let Err(e) = aaa.hss.resync(&imsi, &rand, &auts) {
                return s.fail(e);
            }
            s.resyncs += 1;
            issue_challenge(s, aaa, rng)
        }
        (_, SUBTYPE_AUTH_REJECT | SUBTYPE_CLIENT_ERROR) => s.fail(SessionError::PeerRejected),
        _ => s.fail(SessionError::Unexpected),
    }
}

fn resolve_identity(
    s: &ServerSession,
    m: &EapMessage,
    aaa: &AaaServer,
) -> Result<(Vec<u8>, crate::protocol::Imsi), SessionError> {
    debug_assert!(s.subscriber.is_none());
    let wire = variable_attr(m, AT_IDENTITY)?;
    let id = Identity::from_wire(wire).map_err(|_| SessionError::UnknownIdentity)?;
    let imsi = match id.kind() {
        IdentityKind::Permanent => id.imsi(),
        IdentityKind::Pseudonym => aaa.resolve_pseudonym(&id),
        // fast re-authentication is not offered by this server
        IdentityKind::FastReauth => None,
    };
    imsi.map(|i| (wire.to_vec(), i)).ok_or(SessionError::UnknownIdentity)
}

fn issue_challenge<R: RngCore + ?Sized>(
    mut s: ServerSession,
    aaa: &AaaServer,
    rng: &mut R,
) -> (ServerSession, StepOutput) {
    let imsi = s.subscriber.clone().expect("subscriber resolved");
    let av = match aaa.hss.aka_vector(&imsi, rng) {
        Ok(av) => av,
        Err(e) => return s.fail(e),
    };
    let keys = derive_session_keys(KeyInputs::Aka {
        identity: s.identity_wire.as_deref().expect("identity recorded"),
        ck: &av.ck,
        ik: &av.ik,
    });
    let pseudonym = Identity::random_pseudonym(rng);
    aaa.register_pseudonym(pseudonym.clone(), imsi);
    let iv: [u8; IV_LEN] = rng.gen();
    let mut encr = iv.to_vec();
    encr.extend(sym_encrypt(&keys.k_encr, &iv, &[], &pseudonym.to_wire()));

    s.identifier = s.identifier.wrapping_add(1);
    let mut msg = EapMessage::request(
        s.identifier,
        Method::Aka,
        SUBTYPE_CHALLENGE,
        vec![
            Attribute::fixed(AT_RAND, &av.rand),
            Attribute::fixed(AT_AUTN, &av.autn.0),
            Attribute::variable(AT_ENCR_DATA, &encr).expect("pseudonym fits"),
            Attribute::fixed(AT_MAC, &[0; 16]),
        ],
    )
    .expect("challenge is well formed");
    let tag = mac(&keys.k_aut, &aka_mac_input(&msg));
    msg.replace_attr(Attribute::fixed(AT_MAC, &tag));

    s.xres = Some(av.xres);
    s.vector = Some(av);
    s.pending_keys = Some(keys);
    s.enter(SessionState::ChallengeProcessed);
    s.send(msg)
}

fn check_challenge_response(s: &ServerSession, m: &EapMessage) -> Result<(), SessionError> {
    let keys = s.pending_keys.as_ref().expect("keys derived with challenge");
    let tag: [u8; 16] = fixed_attr(m, AT_MAC)?;
    if !verify_mac(&keys.k_aut, &aka_mac_input(m), &tag) {
        return Err(SessionError::MacMismatch);
    }
    let res = variable_attr(m, AT_RES)?;
    if Some(res) != s.xres.as_ref().map(|x| &x[..]) {
        return Err(SessionError::ResMismatch);
    }
    Ok(())
}

pub fn aka_peer_step<R: RngCore + ?Sized>(
    mut s: PeerSession,
    m: &EapMessage,
    usim: &mut Usim,
    _rng: &mut R,
) -> (PeerSession, StepOutput) {
    assert_eq!(s.protocol, Protocol::Aka, "AKA step on a non-AKA session");
    if s.state.is_terminal() {
        return s.finished();
    }
    s.record(m);
    let mut s = match s.handle_decision(m) {
        Ok((mut s, out)) => {
            if s.state == SessionState::Done {
                if let Some(p) = s.next_pseudonym.take() {
                    usim.set_pseudonym(p);
                }
            }
            return (s, out);
        }
        Err(s) => s,
    };
    if m.method() != Some(Method::Aka) {
        return s.client_error(SessionError::Unexpected, m.identifier);
    }
    s.last_identifier = Some(m.identifier);
    match (s.state, m.subtype().unwrap_or_default()) {
        (SessionState::Idle, SUBTYPE_IDENTITY) => {
            let any = m.attr(AT_ANY_ID_REQ).map(|a| a.fixed_data(0).is_ok());
            let permanent = m.attr(AT_PERMANENT_ID_REQ).map(|a| a.fixed_data(0).is_ok());
            let id = match (any, permanent) {
                (Some(true), None) => usim
                    .pseudonym()
                    .cloned()
                    .unwrap_or_else(|| Identity::permanent(&usim.imsi)),
                (None, Some(true)) => Identity::permanent(&usim.imsi),
                _ => return s.client_error(SessionError::BadAttribute(AT_ANY_ID_REQ), m.identifier),
            };
            let wire = id.to_wire();
            let reply = EapMessage::response(
                m.identifier,
                Method::Aka,
                SUBTYPE_IDENTITY,
                vec![Attribute::variable(AT_IDENTITY, &wire).expect("identity fits")],
            )
            .expect("identity response is well formed");
            s.identity_wire = Some(wire);
            s.enter(SessionState::IdentitySent);
            s.send(reply)
        }
        (SessionState::IdentitySent, SUBTYPE_CHALLENGE) => peer_challenge(s, m, usim),
        _ => s.client_error(SessionError::Unexpected, m.identifier),
    }
}

fn peer_challenge(mut s: PeerSession, m: &EapMessage, usim: &mut Usim) -> (PeerSession, StepOutput) {
    let id = m.identifier;
    let parsed = (|| {
        Ok::<_, SessionError>((
            fixed_attr::<16>(m, AT_RAND)?,
            fixed_attr::<16>(m, AT_AUTN)?,
            fixed_attr::<16>(m, AT_MAC)?,
        ))
    })();
    let (rand, autn, tag) = match parsed {
        Ok(v) => v,
        Err(e) => return s.client_error(e, id),
    };
    let r = match usim.verify_autn(&rand, &Autn(autn)) {
        Ok(r) => r,
        Err(AutnError::MacFailure) => {
            let reply = EapMessage::response(id, Method::Aka, SUBTYPE_AUTH_REJECT, Vec::new())
                .expect("reject is well formed");
            return s.fail(SessionError::AutnRejected, Some(reply));
        }
        Err(AutnError::SyncFailure { auts }) => {
            if s.sync_failures_sent >= MAX_SYNC_FAILURES {
                return s.client_error(SessionError::ResyncLimit, id);
            }
            s.sync_failures_sent += 1;
            let reply = EapMessage::response(
                id,
                Method::Aka,
                SUBTYPE_SYNC_FAILURE,
                vec![Attribute::raw(AT_AUTS, auts.0.to_vec()).expect("AUTS is 14 bytes")],
            )
            .expect("sync failure is well formed");
            return s.send(reply);
        }
    };
    let keys = derive_session_keys(KeyInputs::Aka {
        identity: s.identity_wire.as_deref().expect("identity sent"),
        ck: &r.ck,
        ik: &r.ik,
    });
    if !verify_mac(&keys.k_aut, &aka_mac_input(m), &tag) {
        return s.client_error(SessionError::MacMismatch, id);
    }
    if m.attr(AT_ENCR_DATA).is_some() {
        let pseudonym = variable_attr(m, AT_ENCR_DATA).ok().and_then(|encr| {
            let (iv, ct) = encr.split_at_checked(IV_LEN)?;
            let pt = sym_decrypt(&keys.k_encr, iv.try_into().ok()?, &[], ct).ok()?;
            Identity::from_wire(&pt).ok().filter(|p| p.kind() == IdentityKind::Pseudonym)
        });
        match pseudonym {
            Some(p) => s.next_pseudonym = Some(p),
            None => return s.client_error(SessionError::BadAttribute(AT_ENCR_DATA), id),
        }
    }
    let mut reply = EapMessage::response(
        id,
        Method::Aka,
        SUBTYPE_CHALLENGE,
        vec![
            Attribute::variable(AT_RES, &r.res).expect("RES fits"),
            Attribute::fixed(AT_MAC, &[0; 16]),
        ],
    )
    .expect("challenge response is well formed");
    let tag = mac(&keys.k_aut, &aka_mac_input(&reply));
    reply.replace_attr(Attribute::fixed(AT_MAC, &tag));
    s.pending_keys = Some(keys);
    s.enter(SessionState::ChallengeProcessed);
    s.send(reply)
}
