//! In-memory transport between one peer and one server, with a hook for
//! an on-path adversary. Every run is forkable so fault injection can
//! branch from any point of an honest dialogue.

use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use crate::crypto::{CurveParams, SubscriberKey, Sqn};

use super::backend::{AaaServer, HssHandle, KnownServer, PeerConfig, Usim};
use super::codec::{decode_eap, encode_eap};
use super::identity::Imsi;
use super::session::{Decision, PeerSession, Protocol, ServerInput, ServerSession, SessionState, StepOutput};
use super::{peer_step, server_step};

/// Messages after which a dialogue is abandoned.
pub const MAX_MESSAGES: usize = 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    ToPeer,
    ToServer,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WireRecord {
    pub direction: Direction,
    pub bytes: Vec<u8>,
}

/// What an interceptor does with one in-flight message.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fate {
    Deliver,
    Drop,
}

#[derive(Clone)]
pub struct Exchange {
    pub aaa: AaaServer,
    pub usim: Usim,
    pub peer_cfg: PeerConfig,
    pub peer: PeerSession,
    pub server: ServerSession,
    pending: Option<(Direction, Vec<u8>)>,
    wire: Vec<WireRecord>,
    rng: ChaCha20Rng,
    started: bool,
}

impl Exchange {
    pub fn new(
        protocol: Protocol,
        aaa: AaaServer,
        usim: Usim,
        peer_cfg: PeerConfig,
        ap_id: &str,
        seed: u64,
    ) -> Self {
        Exchange {
            aaa,
            usim,
            peer_cfg,
            peer: PeerSession::new(protocol),
            server: ServerSession::new(protocol, ap_id),
            pending: None,
            wire: Vec::new(),
            rng: ChaCha20Rng::seed_from_u64(seed),
            started: false,
        }
    }

    /// Copy whose backend state is independent of `self`.
    pub fn fork(&self) -> Self {
        Exchange {
            aaa: self.aaa.deep_clone(),
            ..self.clone()
        }
    }

    /// Starts a new session over the same parties (same HSS, USIM and
    /// server), as a returning subscriber would.
    pub fn next_session(&self, seed: u64) -> Self {
        let protocol = self.peer.protocol();
        Exchange::new(
            protocol,
            self.aaa.clone(),
            self.usim.clone(),
            self.peer_cfg.clone(),
            &self.server.ap_id,
            seed,
        )
    }

    /// Messages observed on the wire, as sent.
    pub fn wire(&self) -> &[WireRecord] {
        &self.wire
    }

    pub fn message_count(&self) -> usize {
        self.wire.len()
    }

    pub fn pending(&self) -> Option<(Direction, &[u8])> {
        self.pending.as_ref().map(|(d, b)| (*d, b.as_slice()))
    }

    pub fn is_finished(&self) -> bool {
        self.started && self.pending.is_none()
    }

    fn emit(&mut self, direction: Direction, out: StepOutput) {
        match out {
            StepOutput::Send(msg) => {
                let bytes = encode_eap(&msg);
                self.wire.push(WireRecord {
                    direction,
                    bytes: bytes.clone(),
                });
                self.pending = Some((direction, bytes));
            }
            StepOutput::Decision(_) => self.pending = None,
        }
    }

    /// Produces the first message if the dialogue has not begun.
    pub fn start(&mut self) {
        if self.started {
            return;
        }
        self.started = true;
        let protocol = self.server.protocol();
        let server = std::mem::replace(&mut self.server, ServerSession::new(protocol, ""));
        let (server, out) = server_step(server, ServerInput::Start, &self.aaa, &mut self.rng);
        self.server = server;
        self.emit(Direction::ToPeer, out);
    }

    /// Delivers `bytes` (which may differ from what was sent) to the
    /// addressee of the pending message.
    fn deliver(&mut self, direction: Direction, bytes: &[u8]) {
        match direction {
            Direction::ToPeer => {
                let protocol = self.peer.protocol();
                let peer = std::mem::replace(&mut self.peer, PeerSession::new(protocol));
                let (peer, out) = match decode_eap(bytes) {
                    Ok(m) => peer_step(peer, &m, &mut self.usim, &self.peer_cfg, &mut self.rng),
                    Err(e) => peer.reject_bytes(bytes, e),
                };
                self.peer = peer;
                self.emit(Direction::ToServer, out);
            }
            Direction::ToServer => {
                let protocol = self.server.protocol();
                let server = std::mem::replace(&mut self.server, ServerSession::new(protocol, ""));
                let (server, out) = match decode_eap(bytes) {
                    Ok(m) => server_step(server, ServerInput::Message(&m), &self.aaa, &mut self.rng),
                    Err(e) => server.reject_bytes(bytes, e),
                };
                self.server = server;
                self.emit(Direction::ToPeer, out);
            }
        }
    }

    /// Delivers the pending message after letting `intercept` rewrite or
    /// drop it. Returns `false` once nothing is left in flight.
    pub fn step_with<F>(&mut self, mut intercept: F) -> bool
    where
        F: FnMut(usize, Direction, &mut Vec<u8>) -> Fate,
    {
        self.start();
        let Some((direction, mut bytes)) = self.pending.take() else {
            return false;
        };
        if self.wire.len() > MAX_MESSAGES {
            return false;
        }
        let index = self.wire.len() - 1;
        if intercept(index, direction, &mut bytes) == Fate::Drop {
            return false;
        }
        self.deliver(direction, &bytes);
        self.pending.is_some()
    }

    pub fn run_with<F>(&mut self, mut intercept: F) -> &mut Self
    where
        F: FnMut(usize, Direction, &mut Vec<u8>) -> Fate,
    {
        while self.step_with(&mut intercept) {}
        self
    }

    pub fn run(&mut self) -> &mut Self {
        self.run_with(|_, _, _| Fate::Deliver)
    }

    pub fn peer_decision(&self) -> Option<Decision> {
        match self.peer.state() {
            SessionState::Done => Some(Decision::Success),
            SessionState::Failed => Some(Decision::Failure),
            _ => None,
        }
    }

    /// Both sides finished with identical MSKs.
    pub fn agreed(&self) -> bool {
        match (self.peer.keys(), self.server.keys()) {
            (Some(p), Some(s)) => {
                self.peer.state() == SessionState::Done
                    && self.server.state() == SessionState::Done
                    && p.msk == s.msk
            }
            _ => false,
        }
    }

    /// Someone finished holding keys the other side does not share.
    pub fn split_keys(&self) -> bool {
        let done_p = self.peer.state() == SessionState::Done;
        let done_s = self.server.state() == SessionState::Done;
        match (self.peer.keys(), self.server.keys()) {
            (Some(p), Some(s)) => done_p && done_s && p.msk != s.msk,
            _ => false,
        }
    }
}

/// A ready-to-run world: one provisioned subscriber, its HSS, the AAA
/// server and a peer that knows the server.
#[derive(Clone)]
pub struct Testbed {
    pub protocol: Protocol,
    pub aaa: AaaServer,
    pub usim: Usim,
    pub peer_cfg: PeerConfig,
    pub ap_id: String,
}

pub const TESTBED_SERVER_ID: &str = "aaa.home.example";
pub const TESTBED_AP_ID: &str = "ap-01";

impl Testbed {
    pub fn new(protocol: Protocol, curve: Arc<CurveParams>, seed: u64) -> Self {
        let mut rng = ChaCha20Rng::seed_from_u64(seed ^ 0x7e57_bed0);
        let imsi = Imsi::numbered(seed % 1_000_000_000);
        let k = SubscriberKey::random(&mut rng);
        let hss = HssHandle::new();
        hss.provision(imsi.clone(), k, Sqn::new(32));
        let aaa = AaaServer::new(TESTBED_SERVER_ID, hss, curve.clone(), &mut rng);
        Testbed {
            protocol,
            aaa,
            usim: Usim::new(imsi, k, Sqn::new(32)),
            peer_cfg: PeerConfig {
                curve,
                known_servers: vec![KnownServer {
                    server_id: TESTBED_SERVER_ID.to_string(),
                    ap_ids: vec![TESTBED_AP_ID.to_string()],
                }],
            },
            ap_id: TESTBED_AP_ID.to_string(),
        }
    }

    pub fn exchange(&self, seed: u64) -> Exchange {
        Exchange::new(
            self.protocol,
            self.aaa.clone(),
            self.usim.clone(),
            self.peer_cfg.clone(),
            &self.ap_id,
            seed,
        )
    }
}
