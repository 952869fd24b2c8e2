//! ECDH-enhanced AKA.
//!
//! ```text
//! S -> P  Request/Identity   AT_SERVER_ID AT_AP_ID AT_SPUB(bP)
//! P -> S  Response/Identity  AT_CPUB(aP) AT_NONCE_P AT_ENCR_DATA(E_{K_id}(IMSI))
//! S -> P  Request/Challenge  AT_RAND AT_NONCE_S AT_MAC_K AT_MAC
//! P -> S  Response/Challenge AT_RES AT_MAC
//! S -> P  Success
//! ```
//!
//! `K_id` comes from `x(abP)`, so the server decrypts the identity with its
//! epoch key alone. AT_MAC_K is computed by the HSS under a key derived
//! from K and binds aP, bP, RAND and both nonces; it authenticates bP to
//! the peer after the fact. AT_MAC covers a hash of every earlier message.
//! Nothing here reads or writes a sequence number.

use rand::{Rng, RngCore};

use crate::crypto::{ecdh_shared, mac, sym_decrypt, sym_encrypt, verify_mac, EcKeyPair};

use super::backend::{AaaServer, PeerConfig, Usim};
use super::codec::{
    Attribute, EapMessage, Method, AT_AP_ID, AT_CPUB, AT_ENCR_DATA, AT_MAC, AT_MAC_K, AT_NONCE_P,
    AT_NONCE_S, AT_RAND, AT_RES, AT_SERVER_ID, AT_SPUB, SUBTYPE_CHALLENGE, SUBTYPE_CLIENT_ERROR,
    SUBTYPE_IDENTITY,
};
use super::identity::Imsi;
use super::keys::{
    derive_session_keys, hss_binding, hss_mac, identity_key, transcript_mac_input, KeyInputs, Nonce,
};
use super::session::{
    fixed_attr, variable_attr, PeerSession, Protocol, ServerInput, ServerSession, SessionError,
    SessionState, StepOutput,
};

const IV_LEN: usize = 12;

pub fn ecdh_server_step<R: RngCore + ?Sized>(
    mut s: ServerSession,
    input: ServerInput<'_>,
    aaa: &AaaServer,
    rng: &mut R,
) -> (ServerSession, StepOutput) {
    assert_eq!(s.protocol, Protocol::EcdhAka, "ECDH step on a non-ECDH session");
    if s.state.is_terminal() {
        return s.finished();
    }
    let m = match input {
        ServerInput::Start if s.state == SessionState::Idle => {
            s.identifier = rng.gen();
            let spub = aaa.curve.encode_point(aaa.epoch_public());
            let msg = EapMessage::request(
                s.identifier,
                Method::EcdhAka,
                SUBTYPE_IDENTITY,
                vec![
                    Attribute::variable(AT_SERVER_ID, aaa.server_id.as_bytes()).expect("server id fits"),
                    Attribute::variable(AT_AP_ID, s.ap_id.as_bytes()).expect("AP id fits"),
                    Attribute::variable(AT_SPUB, &spub).expect("point fits"),
                ],
            )
            .expect("identity request is well formed");
            s.spub = Some(spub);
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
        (SessionState::IdentitySent, SUBTYPE_IDENTITY) => server_identity(s, m, aaa, rng),
        (SessionState::ChallengeProcessed, SUBTYPE_CHALLENGE) => {
            let keys = s.pending_keys.as_ref().expect("keys derived with challenge");
            let earlier = &s.transcript[..s.transcript.len() - 1];
            let verdict = fixed_attr::<16>(m, AT_MAC).and_then(|tag| {
                if !verify_mac(&keys.k_aut, &transcript_mac_input(earlier, m), &tag) {
                    return Err(SessionError::MacMismatch);
                }
                let res = variable_attr(m, AT_RES)?;
                if Some(res) != s.xres.as_ref().map(|x| &x[..]) {
                    return Err(SessionError::ResMismatch);
                }
                Ok(())
            });
            match verdict {
                Ok(()) => {
                    s.enter(SessionState::Done);
                    s.keys = s.pending_keys.take();
                    let id = s.identifier;
                    s.send(EapMessage::success(id))
                }
                Err(e) => s.fail(e),
            }
        }
        (_, SUBTYPE_CLIENT_ERROR) => s.fail(SessionError::PeerRejected),
        _ => s.fail(SessionError::Unexpected),
    }
}

fn server_identity<R: RngCore + ?Sized>(
    mut s: ServerSession,
    m: &EapMessage,
    aaa: &AaaServer,
    rng: &mut R,
) -> (ServerSession, StepOutput) {
    let curve = &aaa.curve;
    let spub = s.spub.clone().expect("bP sent in the first message");
    let step = || -> Result<_, SessionError> {
        let cpub = variable_attr(m, AT_CPUB)?;
        let a_p = curve.decode_point(cpub)?;
        let shared = ecdh_shared(&aaa.epoch_key().secret, &a_p, curve)?;
        let nonce_p: Nonce = fixed_attr(m, AT_NONCE_P)?;
        let encr = variable_attr(m, AT_ENCR_DATA)?;
        let (iv, ct) = encr.split_at_checked(IV_LEN).ok_or(SessionError::BadAttribute(AT_ENCR_DATA))?;
        let iv: &[u8; IV_LEN] = iv.try_into().expect("split at IV_LEN");
        let plain = sym_decrypt(&identity_key(&shared), iv, cpub, ct)?;
        let imsi = Imsi::from_bytes(&plain).map_err(|_| SessionError::UnknownIdentity)?;
        Ok((cpub.to_vec(), shared, nonce_p, imsi))
    };
    let (cpub, shared, nonce_p, imsi) = match step() {
        Ok(v) => v,
        Err(e) => return s.fail(e),
    };
    let nonce_s: Nonce = rng.gen();
    let mat = match aaa.hss.ecdh_material(&imsi, &cpub, &spub, &nonce_p, &nonce_s, rng) {
        Ok(mat) => mat,
        Err(e) => return s.fail(e),
    };
    let keys = derive_session_keys(KeyInputs::EcdhAka {
        shared: shared.as_bytes(),
        ck: &mat.ck,
        ik: &mat.ik,
        nonce_p: &nonce_p,
        nonce_s: &nonce_s,
    });
    s.identifier = s.identifier.wrapping_add(1);
    let mut msg = EapMessage::request(
        s.identifier,
        Method::EcdhAka,
        SUBTYPE_CHALLENGE,
        vec![
            Attribute::fixed(AT_RAND, &mat.rand),
            Attribute::fixed(AT_NONCE_S, &nonce_s),
            Attribute::fixed(AT_MAC_K, &mat.mac_k),
            Attribute::fixed(AT_MAC, &[0; 16]),
        ],
    )
    .expect("challenge is well formed");
    let tag = mac(&keys.k_aut, &transcript_mac_input(&s.transcript, &msg));
    msg.replace_attr(Attribute::fixed(AT_MAC, &tag));

    s.subscriber = Some(imsi);
    s.xres = Some(mat.xres);
    s.pending_keys = Some(keys);
    s.enter(SessionState::ChallengeProcessed);
    s.send(msg)
}

pub fn ecdh_peer_step<R: RngCore + ?Sized>(
    mut s: PeerSession,
    m: &EapMessage,
    usim: &mut Usim,
    cfg: &PeerConfig,
    rng: &mut R,
) -> (PeerSession, StepOutput) {
    assert_eq!(s.protocol, Protocol::EcdhAka, "ECDH step on a non-ECDH session");
    if s.state.is_terminal() {
        return s.finished();
    }
    s.record(m);
    let mut s = match s.handle_decision(m) {
        Ok(out) => return out,
        Err(s) => s,
    };
    if m.method() != Some(Method::EcdhAka) {
        return s.client_error(SessionError::Unexpected, m.identifier);
    }
    s.last_identifier = Some(m.identifier);
    match (s.state, m.subtype().unwrap_or_default()) {
        (SessionState::Idle, SUBTYPE_IDENTITY) => peer_identity(s, m, usim, cfg, rng),
        (SessionState::IdentitySent, SUBTYPE_CHALLENGE) => peer_challenge(s, m, usim),
        _ => s.client_error(SessionError::Unexpected, m.identifier),
    }
}

fn peer_identity<R: RngCore + ?Sized>(
    mut s: PeerSession,
    m: &EapMessage,
    usim: &Usim,
    cfg: &PeerConfig,
    rng: &mut R,
) -> (PeerSession, StepOutput) {
    let id = m.identifier;
    let curve = &cfg.curve;
    let gate = || -> Result<_, SessionError> {
        let server_id = variable_attr(m, AT_SERVER_ID)?;
        let ap_id = variable_attr(m, AT_AP_ID)?;
        if !cfg.accepts(server_id, ap_id) {
            return Err(SessionError::UnknownServer);
        }
        let spub = variable_attr(m, AT_SPUB)?;
        let b_p = curve.decode_point(spub)?;
        Ok((spub.to_vec(), b_p))
    };
    // nothing derived from the subscriber leaves the device on this path
    let (spub, b_p) = match gate() {
        Ok(v) => v,
        Err(e) => return s.client_error(e, id),
    };
    let eph = EcKeyPair::generate(curve, rng);
    let shared = match ecdh_shared(&eph.secret, &b_p, curve) {
        Ok(x) => x,
        Err(e) => return s.client_error(e, id),
    };
    let cpub = curve.encode_point(&eph.public);
    let nonce_p: Nonce = rng.gen();
    let iv: [u8; IV_LEN] = rng.gen();
    let mut encr = iv.to_vec();
    encr.extend(sym_encrypt(&identity_key(&shared), &iv, &cpub, usim.imsi.as_bytes()));
    let reply = EapMessage::response(
        id,
        Method::EcdhAka,
        SUBTYPE_IDENTITY,
        vec![
            Attribute::variable(AT_CPUB, &cpub).expect("point fits"),
            Attribute::fixed(AT_NONCE_P, &nonce_p),
            Attribute::variable(AT_ENCR_DATA, &encr).expect("identity fits"),
        ],
    )
    .expect("identity response is well formed");
    s.ephemeral = Some(eph);
    s.shared = Some(shared);
    s.cpub = Some(cpub);
    s.spub = Some(spub);
    s.nonce_p = Some(nonce_p);
    s.enter(SessionState::IdentitySent);
    s.send(reply)
}

fn peer_challenge(mut s: PeerSession, m: &EapMessage, usim: &Usim) -> (PeerSession, StepOutput) {
    let id = m.identifier;
    let nonce_p = s.nonce_p.expect("nonce sent");
    let check = || -> Result<_, SessionError> {
        let rand: [u8; 16] = fixed_attr(m, AT_RAND)?;
        let nonce_s: Nonce = fixed_attr(m, AT_NONCE_S)?;
        let mac_k: [u8; 16] = fixed_attr(m, AT_MAC_K)?;
        let tag: [u8; 16] = fixed_attr(m, AT_MAC)?;
        let binding = hss_binding(
            s.cpub.as_deref().expect("aP sent"),
            s.spub.as_deref().expect("bP received"),
            &rand,
            &nonce_p,
            &nonce_s,
        );
        if !constant_time_eq(&hss_mac(&usim.k, &rand, &binding), &mac_k) {
            return Err(SessionError::HssMacMismatch);
        }
        let (res, ck, ik) = usim.challenge_response(&rand);
        let keys = derive_session_keys(KeyInputs::EcdhAka {
            shared: s.shared.as_ref().expect("secret agreed").as_bytes(),
            ck: &ck,
            ik: &ik,
            nonce_p: &nonce_p,
            nonce_s: &nonce_s,
        });
        let earlier = &s.transcript[..s.transcript.len() - 1];
        if !verify_mac(&keys.k_aut, &transcript_mac_input(earlier, m), &tag) {
            return Err(SessionError::MacMismatch);
        }
        Ok((res, keys))
    };
    let (res, keys) = match check() {
        Ok(v) => v,
        Err(e) => return s.client_error(e, id),
    };
    let mut reply = EapMessage::response(
        id,
        Method::EcdhAka,
        SUBTYPE_CHALLENGE,
        vec![
            Attribute::variable(AT_RES, &res).expect("RES fits"),
            Attribute::fixed(AT_MAC, &[0; 16]),
        ],
    )
    .expect("challenge response is well formed");
    let tag = mac(&keys.k_aut, &transcript_mac_input(&s.transcript, &reply));
    reply.replace_attr(Attribute::fixed(AT_MAC, &tag));
    s.pending_keys = Some(keys);
    s.enter(SessionState::ChallengeProcessed);
    s.send(reply)
}

fn constant_time_eq(a: &[u8], b: &[u8]) -> bool {
    a.len() == b.len() && a.iter().zip(b).fold(0u8, |acc, (x, y)| acc | (x ^ y)) == 0
}
