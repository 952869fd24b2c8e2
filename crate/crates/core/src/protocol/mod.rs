//! EAP wire codec and the peer/server state machines for baseline EAP-AKA
//! and the ECDH-enhanced variant.
//!
//! State machines are pure step functions `(session, input) -> (session,
//! output)`. Long-term state lives in [`HssHandle`], [`Usim`] and
//! [`AaaServer`]; the access point is a pass-through and never appears.

mod aka;
mod backend;
pub mod codec;
mod ecdh;
mod exchange;
mod identity;
mod keys;
mod session;

pub use aka::{aka_peer_step, aka_server_step, MAX_RESYNCS, MAX_SYNC_FAILURES};
pub use backend::{AaaServer, BackendError, EcdhMaterial, HssHandle, KnownServer, PeerConfig, Usim};
pub use codec::{decode_eap, encode_eap, Attribute, CodecError, EapCode, EapMessage, Method};
pub use ecdh::{ecdh_peer_step, ecdh_server_step};
pub use exchange::{Direction, Exchange, Fate, Testbed, WireRecord, MAX_MESSAGES, TESTBED_AP_ID, TESTBED_SERVER_ID};
pub use identity::{Identity, IdentityError, IdentityKind, Imsi, IMSI_DIGITS};
pub use keys::{
    derive_from_longterm, derive_session_keys, transcript_hash, KeyInputs, Nonce, SessionKeys,
    Unrecoverable, NONCE_LEN,
};
pub use session::{
    Decision, PeerSession, Protocol, ServerInput, ServerSession, SessionError, SessionState,
    StepOutput,
};

use rand::RngCore;

/// Dispatches to the server machine for `s.protocol()`.
pub fn server_step<R: RngCore + ?Sized>(
    s: ServerSession,
    input: ServerInput<'_>,
    aaa: &AaaServer,
    rng: &mut R,
) -> (ServerSession, StepOutput) {
    match s.protocol() {
        Protocol::Aka => aka_server_step(s, input, aaa, rng),
        Protocol::EcdhAka => ecdh_server_step(s, input, aaa, rng),
    }
}

/// Dispatches to the peer machine for `s.protocol()`.
pub fn peer_step<R: RngCore + ?Sized>(
    s: PeerSession,
    msg: &EapMessage,
    usim: &mut Usim,
    cfg: &PeerConfig,
    rng: &mut R,
) -> (PeerSession, StepOutput) {
    match s.protocol() {
        Protocol::Aka => aka_peer_step(s, msg, usim, rng),
        Protocol::EcdhAka => ecdh_peer_step(s, msg, usim, cfg, rng),
    }
}

#[cfg(test)]
mod tests {
    use super::codec::*;
    use super::*;
    use crate::crypto::{CurveParams, Sqn};
    use std::sync::Arc;

    fn bed(p: Protocol, seed: u64) -> Testbed {
        Testbed::new(p, Arc::new(CurveParams::p256()), seed)
    }

    fn contains(hay: &[u8], needle: &[u8]) -> bool {
        hay.windows(needle.len()).any(|w| w == needle)
    }

    #[test]
    fn honest_runs_take_five_messages_and_agree() {
        for p in Protocol::ALL {
            for seed in 0..20 {
                let mut x = bed(p, seed).exchange(seed);
                x.run();
                assert_eq!(x.message_count(), 5, "{p:?} seed {seed}");
                assert!(x.agreed(), "{p:?} seed {seed}: {:?} {:?}", x.peer.error(), x.server.error());
                assert_eq!(x.peer.transcript(), x.server.transcript());
            }
        }
    }

    #[test]
    fn honest_runs_on_the_toy_curve() {
        let mut x = Testbed::new(Protocol::EcdhAka, Arc::new(CurveParams::toy()), 3).exchange(3);
        x.run();
        assert_eq!(x.message_count(), 5);
        assert!(x.agreed());
    }

    #[test]
    fn message_layout_matches_the_flow() {
        let mut x = bed(Protocol::EcdhAka, 1).exchange(1);
        x.run();
        let msgs: Vec<_> = x.wire().iter().map(|w| decode_eap(&w.bytes).unwrap()).collect();
        let ids = |m: &EapMessage| m.data().unwrap().attributes().iter().map(Attribute::id).collect::<Vec<_>>();
        assert_eq!(ids(&msgs[0]), vec![AT_SERVER_ID, AT_AP_ID, AT_SPUB]);
        assert_eq!(ids(&msgs[1]), vec![AT_CPUB, AT_NONCE_P, AT_ENCR_DATA]);
        assert_eq!(ids(&msgs[2]), vec![AT_RAND, AT_NONCE_S, AT_MAC_K, AT_MAC]);
        assert_eq!(ids(&msgs[3]), vec![AT_RES, AT_MAC]);
        assert_eq!(msgs[4].code, EapCode::Success);
        assert_eq!(msgs[4].identifier, msgs[2].identifier);
    }

    #[test]
    fn aka_exposes_imsi_and_ecdh_does_not() {
        for seed in 0..10 {
            let b = bed(Protocol::Aka, seed);
            let imsi = b.usim.imsi.clone();
            let mut x = b.exchange(seed);
            x.run();
            assert!(x.wire().iter().any(|w| contains(&w.bytes, imsi.as_bytes())));

            let b = bed(Protocol::EcdhAka, seed);
            let mut x = b.exchange(seed);
            x.run();
            assert!(x.agreed());
            assert!(!x.wire().iter().any(|w| contains(&w.bytes, imsi.as_bytes())));
        }
    }

    #[test]
    fn aka_second_run_uses_the_issued_pseudonym() {
        let b = bed(Protocol::Aka, 9);
        let imsi = b.usim.imsi.clone();
        let mut first = b.exchange(1);
        first.run();
        assert!(first.agreed());
        assert!(first.usim.pseudonym().is_some());
        let mut second = first.next_session(2);
        second.run();
        assert!(second.agreed());
        assert!(!second.wire().iter().any(|w| contains(&w.bytes, imsi.as_bytes())));
        assert_eq!(second.server.subscriber(), Some(&imsi));
    }

    #[test]
    fn ecdh_runs_touch_no_sequence_numbers() {
        let b = bed(Protocol::EcdhAka, 4);
        let mut x = b.exchange(4);
        x.run();
        assert!(x.agreed());
        assert_eq!(x.usim.sqn_ops(), 0);
        assert_eq!(x.aaa.hss.sqn_ops(), 0);

        let b = bed(Protocol::Aka, 4);
        let mut x = b.exchange(4);
        x.run();
        assert!(x.usim.sqn_ops() > 0 && x.aaa.hss.sqn_ops() > 0);
    }

    #[test]
    fn aka_desync_resynchronises_in_two_extra_messages() {
        let mut b = bed(Protocol::Aka, 5);
        b.usim.force_sqn(Sqn::new(1000));
        let mut x = b.exchange(5);
        x.run();
        assert!(x.agreed(), "{:?}", x.server.error());
        assert_eq!(x.message_count(), 7);
        assert_eq!(x.peer.sync_failures_sent(), 1);
        assert_eq!(x.server.resyncs(), 1);
        let msgs: Vec<_> = x.wire().iter().map(|w| decode_eap(&w.bytes).unwrap()).collect();
        assert!(msgs[3].attr(AT_AUTS).is_some());
    }

    #[test]
    fn tampered_rand_fails_both_sides() {
        let mut x = bed(Protocol::Aka, 6).exchange(6);
        x.run_with(|i, _, bytes| {
            if i == 2 {
                let m = decode_eap(bytes).unwrap();
                let mut rand: [u8; 16] = m.attr(AT_RAND).unwrap().fixed_data(16).unwrap().try_into().unwrap();
                rand[0] ^= 1;
                let mut m2 = m.clone();
                m2.replace_attr(Attribute::fixed(AT_RAND, &rand));
                *bytes = encode_eap(&m2);
            }
            Fate::Deliver
        });
        assert_eq!(x.peer.state(), SessionState::Failed);
        assert_eq!(x.server.state(), SessionState::Failed);
        assert_eq!(x.peer.error(), Some(&SessionError::AutnRejected));
    }

    #[test]
    fn replayed_aka_challenge_triggers_auts() {
        let b = bed(Protocol::Aka, 7);
        let mut first = b.exchange(1);
        first.run();
        let old_challenge = decode_eap(&first.wire()[2].bytes).unwrap();
        // fresh peer session, same USIM, fed the recorded challenge
        let mut usim = first.usim.clone();
        let mut rng = rand::rngs::mock::StepRng::new(0, 1);
        let peer = PeerSession::new(Protocol::Aka);
        let id_req = decode_eap(&first.wire()[0].bytes).unwrap();
        let (peer, _) = aka_peer_step(peer, &id_req, &mut usim, &mut rng);
        let (peer, out) = aka_peer_step(peer, &old_challenge, &mut usim, &mut rng);
        match out {
            StepOutput::Send(m) => assert!(m.attr(AT_AUTS).is_some()),
            other => panic!("unexpected {other:?}"),
        }
        assert_ne!(peer.state(), SessionState::Done);
    }

    #[test]
    fn ecdh_peer_refuses_unknown_servers_without_leaking() {
        let mut b = bed(Protocol::EcdhAka, 8);
        b.peer_cfg.known_servers[0].server_id = "someone.else".into();
        let mut x = b.exchange(8);
        x.run();
        assert_eq!(x.peer.state(), SessionState::Failed);
        assert_eq!(x.peer.error(), Some(&SessionError::UnknownServer));
        let reply = decode_eap(&x.wire()[1].bytes).unwrap();
        assert_eq!(reply.subtype(), Some(SUBTYPE_CLIENT_ERROR));
        assert!(reply.data().unwrap().attributes().is_empty());
    }

    #[test]
    fn ecdh_substituted_client_key_is_detected() {
        let b = bed(Protocol::EcdhAka, 10);
        let curve = b.aaa.curve.clone();
        let mut rng = rand::rngs::mock::StepRng::new(7, 13);
        let fake = crate::crypto::EcKeyPair::generate(&curve, &mut rng);
        let mut x = b.exchange(10);
        x.run_with(|i, _, bytes| {
            if i == 1 {
                let mut m = decode_eap(bytes).unwrap();
                m.replace_attr(Attribute::variable(AT_CPUB, &curve.encode_point(&fake.public)).unwrap());
                *bytes = encode_eap(&m);
            }
            Fate::Deliver
        });
        assert!(!x.agreed());
        assert_eq!(x.server.state(), SessionState::Failed);
    }

    #[test]
    fn longterm_key_recovers_aka_but_not_ecdh() {
        let b = bed(Protocol::Aka, 11);
        let k = b.usim.k;
        let mut x = b.exchange(11);
        x.run();
        let t: Vec<_> = x.wire().iter().map(|w| w.bytes.clone()).collect();
        assert_eq!(derive_from_longterm(&k, &t).unwrap().msk, x.peer.keys().unwrap().msk);

        let b = bed(Protocol::EcdhAka, 11);
        let k = b.usim.k;
        let mut x = b.exchange(11);
        x.run();
        let t: Vec<_> = x.wire().iter().map(|w| w.bytes.clone()).collect();
        assert_eq!(derive_from_longterm(&k, &t), Err(Unrecoverable));
    }

    #[test]
    fn keys_only_when_done() {
        for p in Protocol::ALL {
            let mut x = bed(p, 12).exchange(12);
            let mut states = vec![(x.peer.state(), x.server.state())];
            while x.step_with(|_, _, _| Fate::Deliver) {
                assert_eq!(x.peer.keys().is_some(), x.peer.state() == SessionState::Done);
                assert_eq!(x.server.keys().is_some(), x.server.state() == SessionState::Done);
                states.push((x.peer.state(), x.server.state()));
            }
            assert!(states.windows(2).all(|w| w[0].0 <= w[1].0 && w[0].1 <= w[1].1));
        }
    }
}
