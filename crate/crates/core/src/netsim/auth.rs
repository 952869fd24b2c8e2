//! Authentication dialogues as the network carries them.
//!
//! A dialogue is first played to completion by the real protocol state
//! machines; its EAP messages are then laid out as a script of legs
//! (endpoint-to-endpoint signalling messages), with the HSS consultations
//! and fixed UMTS attach signalling inserted where they occur. The
//! simulator times the script over the modelled links.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::crypto::{CurveParams, Sqn, SubscriberKey};
use crate::protocol::codec::{AT_CPUB, AT_SPUB, SUBTYPE_CHALLENGE, SUBTYPE_SYNC_FAILURE};
use crate::protocol::{
    decode_eap, AaaServer, Direction, EapCode, Exchange, HssHandle, Imsi, KnownServer, PeerConfig, Protocol, Usim,
    WireRecord,
};

use super::scenario::AuthSection;
use super::topology::NodeId;

pub const WLAN_SERVER_ID: &str = "aaa.home.example";
pub const UMTS_SERVER_ID: &str = "sgsn.home.example";
pub const WLAN_AP_ID: &str = "wlan-ap";
pub const UMTS_AP_ID: &str = "node-b";

/// IMSI in BCD as carried towards the HSS.
const IMSI_BYTES: u32 = 8;
/// RAND, XRES, CK, IK and AUTN (or the HSS-side MAC for ECDH).
const VECTOR_BYTES: u32 = 16 + 8 + 16 + 16 + 16;
const RAND_BYTES: u32 = 16;
const AUTS_BYTES: u32 = 14;
const NONCE_BYTES: u32 = 16;
/// SQN jump applied to a USIM when a desynchronisation is injected.
const DESYNC_JUMP: u64 = 1 << 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AuthKind {
    /// EAP between a WLAN workstation and the AAA, which consults the HLR.
    WlanEap,
    /// User/password against the local AAA only.
    WlanPassword,
    /// UMTS attach through Node B, RNC and SGSN, with the HLR.
    UmtsAttach,
}

impl AuthKind {
    pub const ALL: [AuthKind; 3] = [AuthKind::WlanEap, AuthKind::WlanPassword, AuthKind::UmtsAttach];

    pub fn name(self) -> &'static str {
        match self {
            AuthKind::WlanEap => "wlan-eap",
            AuthKind::WlanPassword => "wlan-password",
            AuthKind::UmtsAttach => "umts-attach",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Leg {
    pub from: NodeId,
    pub to: NodeId,
    pub payload_bytes: u32,
    /// Counted as one of the dialogue's signalling messages.
    pub counted: bool,
    /// Computation the sender performs before this leg can leave.
    pub compute_s: f64,
    pub label: &'static str,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Script {
    pub kind: AuthKind,
    pub legs: Vec<Leg>,
    /// The dialogue went through an SQN resynchronisation.
    pub resync: bool,
    /// The state machines finished with matching keys.
    pub agreed: bool,
}

impl Script {
    pub fn messages(&self) -> usize {
        self.legs.iter().filter(|l| l.counted).count()
    }
}

/// Endpoints a script runs between.
#[derive(Debug, Clone, Copy)]
pub struct Endpoints {
    pub peer: NodeId,
    pub server: NodeId,
    pub hlr: NodeId,
}

/// The network's subscribers and authentication servers.
pub struct AuthWorld {
    pub protocol: Protocol,
    pub hss: HssHandle,
    pub wlan_aaa: AaaServer,
    pub umts_aaa: AaaServer,
    pub peer_cfg: PeerConfig,
    pub subscribers: Vec<Usim>,
}

impl AuthWorld {
    /// Provisions `count` subscribers; keys and server secrets come from
    /// `rng`.
    pub fn new<R: Rng>(protocol: Protocol, curve: Arc<CurveParams>, count: usize, rng: &mut R) -> Self {
        let hss = HssHandle::new();
        let mut subscribers = Vec::with_capacity(count);
        for i in 0..count {
            let imsi = Imsi::numbered(i as u64);
            let k = SubscriberKey::random(rng);
            hss.provision(imsi.clone(), k, Sqn::new(32));
            subscribers.push(Usim::new(imsi, k, Sqn::new(32)));
        }
        let wlan_aaa = AaaServer::new(WLAN_SERVER_ID, hss.clone(), curve.clone(), rng);
        let umts_aaa = AaaServer::new(UMTS_SERVER_ID, hss.clone(), curve.clone(), rng);
        let peer_cfg = PeerConfig {
            curve,
            known_servers: vec![
                KnownServer { server_id: WLAN_SERVER_ID.into(), ap_ids: vec![WLAN_AP_ID.into()] },
                KnownServer { server_id: UMTS_SERVER_ID.into(), ap_ids: vec![UMTS_AP_ID.into()] },
            ],
        };
        AuthWorld { protocol, hss, wlan_aaa, umts_aaa, peer_cfg, subscribers }
    }

    /// Runs one EAP dialogue for `subscriber`, carrying its USIM state
    /// forward. With `desync` (baseline AKA only) the USIM is first pushed
    /// ahead of the HSS so the dialogue must resynchronise.
    fn eap_dialogue(&mut self, kind: AuthKind, subscriber: usize, desync: bool, seed: u64) -> (Vec<WireRecord>, bool) {
        let (aaa, ap_id) = match kind {
            AuthKind::UmtsAttach => (&self.umts_aaa, UMTS_AP_ID),
            _ => (&self.wlan_aaa, WLAN_AP_ID),
        };
        let mut usim = self.subscribers[subscriber].clone();
        if desync && self.protocol == Protocol::Aka {
            usim.force_sqn(Sqn::new(usim.last_accepted().value() + DESYNC_JUMP));
        }
        let mut x = Exchange::new(self.protocol, aaa.clone(), usim, self.peer_cfg.clone(), ap_id, seed);
        x.run();
        let agreed = x.agreed();
        self.subscribers[subscriber] = x.usim.clone();
        (x.wire().to_vec(), agreed)
    }

    /// Builds the script for one authentication of `subscriber`.
    pub fn script(
        &mut self,
        kind: AuthKind,
        subscriber: usize,
        ends: Endpoints,
        cfg: &AuthSection,
        desync: bool,
        seed: u64,
    ) -> Script {
        match kind {
            AuthKind::WlanPassword => password_script(ends, cfg),
            AuthKind::WlanEap | AuthKind::UmtsAttach => {
                let (wire, agreed) = self.eap_dialogue(kind, subscriber, desync, seed);
                let mut s = eap_script(kind, &wire, ends, cfg, self.protocol);
                s.agreed = agreed;
                s
            }
        }
    }
}

fn password_script(e: Endpoints, cfg: &AuthSection) -> Script {
    let leg = |from, to, payload_bytes, label| Leg { from, to, payload_bytes, counted: true, compute_s: 0.0, label };
    Script {
        kind: AuthKind::WlanPassword,
        legs: vec![
            leg(e.server, e.peer, 8, "credential-request"),
            leg(e.peer, e.server, cfg.password_bytes, "credential-response"),
            leg(e.server, e.peer, 4, "accept"),
        ],
        resync: false,
        agreed: true,
    }
}

/// Lays an EAP transcript out as legs. Every challenge the server issues
/// is preceded by an HSS round trip; for UMTS the EAP exchange is framed
/// by attach and security-mode signalling.
pub fn eap_script(kind: AuthKind, wire: &[WireRecord], e: Endpoints, cfg: &AuthSection, protocol: Protocol) -> Script {
    let umts = kind == AuthKind::UmtsAttach;
    let decoded: Vec<_> = wire.iter().map(|w| decode_eap(&w.bytes).ok()).collect();
    let mut legs = Vec::new();
    let mut resync = false;
    let signal = |from, to, label| Leg { from, to, payload_bytes: cfg.signal_bytes, counted: true, compute_s: 0.0, label };

    if umts {
        legs.push(signal(e.peer, e.server, "attach-request"));
    }
    let pubkey_bytes: u32 = decoded
        .iter()
        .flatten()
        .flat_map(|m| [m.attr(AT_CPUB), m.attr(AT_SPUB)])
        .flatten()
        .map(|a| a.value().len() as u32)
        .sum();
    let last = wire.len().saturating_sub(1);
    for (i, (rec, msg)) in wire.iter().zip(&decoded).enumerate() {
        let is_challenge = matches!(msg, Some(m) if m.code == EapCode::Request && m.subtype() == Some(SUBTYPE_CHALLENGE));
        if is_challenge {
            let after_sync = i > 0 && matches!(&decoded[i - 1], Some(m) if m.subtype() == Some(SUBTYPE_SYNC_FAILURE));
            resync |= after_sync;
            let request = if after_sync {
                IMSI_BYTES + RAND_BYTES + AUTS_BYTES
            } else {
                match protocol {
                    Protocol::Aka => IMSI_BYTES,
                    Protocol::EcdhAka => IMSI_BYTES + pubkey_bytes + 2 * NONCE_BYTES,
                }
            };
            // the server derives the ECDH secret before it can read the identity
            let compute_s = if protocol == Protocol::EcdhAka && !after_sync { cfg.ec_mult_s } else { 0.0 };
            legs.push(Leg { from: e.server, to: e.hlr, payload_bytes: request, counted: umts, compute_s, label: "hss-request" });
            legs.push(Leg { from: e.hlr, to: e.server, payload_bytes: VECTOR_BYTES, counted: umts, compute_s: 0.0, label: "hss-answer" });
        }
        if umts && i == last && rec.direction == Direction::ToPeer {
            legs.push(signal(e.server, e.peer, "security-mode-command"));
            legs.push(signal(e.peer, e.server, "security-mode-complete"));
        }
        let (from, to) = match rec.direction {
            Direction::ToPeer => (e.server, e.peer),
            Direction::ToServer => (e.peer, e.server),
        };
        // the peer's ephemeral key pair and shared secret
        let compute_s = match msg {
            Some(m) if protocol == Protocol::EcdhAka && m.attr(AT_CPUB).is_some() => 2.0 * cfg.ec_mult_s,
            _ => 0.0,
        };
        legs.push(Leg {
            from,
            to,
            payload_bytes: rec.bytes.len() as u32,
            counted: true,
            compute_s,
            label: if rec.direction == Direction::ToPeer { "eap-request" } else { "eap-response" },
        });
    }
    if umts {
        legs.push(signal(e.peer, e.server, "attach-complete"));
    }
    Script { kind, legs, resync, agreed: false }
}

/// Deterministic per-dialogue seed.
pub fn dialogue_seed(run_seed: u64, subscriber: usize, session: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(run_seed ^ 0xa17d_1a10);
    let base: u64 = rng.gen();
    base ^ (subscriber as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15) ^ session.wrapping_mul(0xc2b2_ae3d_27d4_eb4f)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn world(p: Protocol) -> AuthWorld {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        AuthWorld::new(p, Arc::new(CurveParams::toy()), 3, &mut rng)
    }

    const E: Endpoints = Endpoints { peer: 0, server: 1, hlr: 2 };

    #[test]
    fn message_counts() {
        let cfg = super::super::scenario::Scenario::default().auth;
        for p in Protocol::ALL {
            let mut w = world(p);
            let s = w.script(AuthKind::WlanEap, 0, E, &cfg, false, 1);
            assert!(s.agreed);
            assert_eq!(s.messages(), 5, "{p:?}");
            assert_eq!(s.legs.len(), 7);
            let s = w.script(AuthKind::UmtsAttach, 1, E, &cfg, false, 2);
            assert!(s.agreed);
            assert_eq!(s.messages(), 11, "{p:?}: {:#?}", s.legs);
            let s = w.script(AuthKind::WlanPassword, 2, E, &cfg, false, 3);
            assert_eq!(s.messages(), 3);
        }
    }

    #[test]
    fn injected_desync_costs_the_baseline_extra_messages() {
        let cfg = super::super::scenario::Scenario::default().auth;
        let mut w = world(Protocol::Aka);
        let s = w.script(AuthKind::WlanEap, 0, E, &cfg, true, 1);
        assert!(s.agreed && s.resync);
        assert_eq!(s.messages(), 7);
        let s = w.script(AuthKind::UmtsAttach, 1, E, &cfg, true, 1);
        assert!(s.agreed && s.resync);
        assert!(s.messages() >= 13);
        // the resynchronised USIM authenticates normally next time
        let s = w.script(AuthKind::WlanEap, 0, E, &cfg, false, 9);
        assert_eq!((s.messages(), s.resync), (5, false));

        let mut w = world(Protocol::EcdhAka);
        let s = w.script(AuthKind::WlanEap, 0, E, &cfg, true, 1);
        assert_eq!((s.messages(), s.resync), (5, false));
    }

    #[test]
    fn legs_alternate_sensibly() {
        let cfg = super::super::scenario::Scenario::default().auth;
        let mut w = world(Protocol::EcdhAka);
        let s = w.script(AuthKind::UmtsAttach, 0, E, &cfg, false, 4);
        for pair in s.legs.windows(2) {
            // each leg starts where the previous one ended
            assert_eq!(pair[0].to, pair[1].from, "{:?}", s.legs);
        }
        let compute: f64 = s.legs.iter().map(|l| l.compute_s).sum();
        assert!((compute - 3.0 * cfg.ec_mult_s).abs() < 1e-12);
    }
}
