//! Session records shared by both methods' state machines.

use thiserror::Error;

use crate::crypto::{AuthVector, CryptoError, EcKeyPair, SharedSecret};

use super::backend::BackendError;
use super::codec::{encode_eap, CodecError, EapCode, EapMessage, Method, SUBTYPE_CLIENT_ERROR};
use super::identity::{Identity, Imsi};
use super::keys::{Nonce, SessionKeys};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Protocol {
    Aka,
    EcdhAka,
}

impl Protocol {
    pub const ALL: [Protocol; 2] = [Protocol::Aka, Protocol::EcdhAka];

    pub fn name(self) -> &'static str {
        match self {
            Protocol::Aka => "aka",
            Protocol::EcdhAka => "ecdh-aka",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().as_str() {
            "aka" | "eap-aka" | "baseline" => Some(Protocol::Aka),
            "ecdh" | "ecdh-aka" | "ecdh_aka" | "proposed" => Some(Protocol::EcdhAka),
            _ => None,
        }
    }
}

/// Ordered so that transitions can be checked for monotonicity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SessionState {
    Idle,
    IdentitySent,
    ChallengeProcessed,
    Done,
    Failed,
}

impl SessionState {
    pub fn is_terminal(self) -> bool {
        matches!(self, SessionState::Done | SessionState::Failed)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decision {
    Success,
    Failure,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StepOutput {
    Send(EapMessage),
    Decision(Decision),
}

pub enum ServerInput<'a> {
    Start,
    Message(&'a EapMessage),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SessionError {
    #[error("codec: {0}")]
    Codec(#[from] CodecError),
    #[error("message not expected in the current state")]
    Unexpected,
    #[error("identifier mismatch")]
    IdentifierMismatch,
    #[error("missing or malformed attribute {0}")]
    BadAttribute(u8),
    #[error("AT_MAC verification failed")]
    MacMismatch,
    #[error("AT_MAC_K verification failed")]
    HssMacMismatch,
    #[error("RES does not match XRES")]
    ResMismatch,
    #[error("AUTN rejected")]
    AutnRejected,
    #[error("unknown or unsupported identity")]
    UnknownIdentity,
    #[error("server or access point not recognised")]
    UnknownServer,
    #[error("crypto: {0}")]
    Crypto(#[from] CryptoError),
    #[error("backend: {0}")]
    Backend(#[from] BackendError),
    #[error("peer reported failure")]
    PeerRejected,
    #[error("server sent EAP-Failure")]
    ServerFailure,
    #[error("too many resynchronisations")]
    ResyncLimit,
}

#[derive(Clone)]
pub struct PeerSession {
    pub(crate) state: SessionState,
    pub(crate) protocol: Protocol,
    pub(crate) transcript: Vec<Vec<u8>>,
    pub(crate) keys: Option<SessionKeys>,
    pub(crate) pending_keys: Option<SessionKeys>,
    pub(crate) error: Option<SessionError>,
    pub(crate) last_identifier: Option<u8>,
    pub(crate) identity_wire: Option<Vec<u8>>,
    pub(crate) next_pseudonym: Option<Identity>,
    pub(crate) sync_failures_sent: u32,
    pub(crate) ephemeral: Option<EcKeyPair>,
    pub(crate) cpub: Option<Vec<u8>>,
    pub(crate) spub: Option<Vec<u8>>,
    pub(crate) shared: Option<SharedSecret>,
    pub(crate) nonce_p: Option<Nonce>,
}

impl PeerSession {
    pub fn new(protocol: Protocol) -> Self {
        PeerSession {
            state: SessionState::Idle,
            protocol,
            transcript: Vec::new(),
            keys: None,
            pending_keys: None,
            error: None,
            last_identifier: None,
            identity_wire: None,
            next_pseudonym: None,
            sync_failures_sent: 0,
            ephemeral: None,
            cpub: None,
            spub: None,
            shared: None,
            nonce_p: None,
        }
    }

    pub fn state(&self) -> SessionState {
        self.state
    }

    pub fn protocol(&self) -> Protocol {
        self.protocol
    }

    pub fn transcript(&self) -> &[Vec<u8>] {
        &self.transcript
    }

    pub fn keys(&self) -> Option<&SessionKeys> {
        self.keys.as_ref()
    }

    pub fn error(&self) -> Option<&SessionError> {
        self.error.as_ref()
    }

    pub fn sync_failures_sent(&self) -> u32 {
        self.sync_failures_sent
    }
}

#[derive(Clone)]
pub struct ServerSession {
    pub(crate) state: SessionState,
    pub(crate) protocol: Protocol,
    pub(crate) ap_id: String,
    pub(crate) transcript: Vec<Vec<u8>>,
    pub(crate) keys: Option<SessionKeys>,
    pub(crate) pending_keys: Option<SessionKeys>,
    pub(crate) error: Option<SessionError>,
    pub(crate) identifier: u8,
    pub(crate) subscriber: Option<Imsi>,
    pub(crate) identity_wire: Option<Vec<u8>>,
    pub(crate) vector: Option<AuthVector>,
    pub(crate) xres: Option<[u8; 8]>,
    pub(crate) resyncs: u32,
    pub(crate) spub: Option<Vec<u8>>,
}

impl ServerSession {
    pub fn new(protocol: Protocol, ap_id: impl Into<String>) -> Self {
        ServerSession {
            state: SessionState::Idle,
            protocol,
            ap_id: ap_id.into(),
            transcript: Vec::new(),
            keys: None,
            pending_keys: None,
            error: None,
            identifier: 0,
            subscriber: None,
            identity_wire: None,
            vector: None,
            xres: None,
            resyncs: 0,
            spub: None,
        }
    }

    pub fn state(&self) -> SessionState {
        self.state
    }

    pub fn protocol(&self) -> Protocol {
        self.protocol
    }

    pub fn transcript(&self) -> &[Vec<u8>] {
        &self.transcript
    }

    pub fn keys(&self) -> Option<&SessionKeys> {
        self.keys.as_ref()
    }

    pub fn error(&self) -> Option<&SessionError> {
        self.error.as_ref()
    }

    /// Subscriber the server believes it is talking to.
    pub fn subscriber(&self) -> Option<&Imsi> {
        self.subscriber.as_ref()
    }

    pub fn resyncs(&self) -> u32 {
        self.resyncs
    }
}

// Plumbing shared by the two methods' step functions.

impl ServerSession {
    pub(crate) fn record(&mut self, msg: &EapMessage) {
        self.transcript.push(encode_eap(msg));
    }

    pub(crate) fn enter(&mut self, next: SessionState) {
        debug_assert!(next >= self.state, "state regressed from {:?} to {next:?}", self.state);
        self.state = next;
    }

    pub(crate) fn send(mut self, msg: EapMessage) -> (Self, StepOutput) {
        self.record(&msg);
        (self, StepOutput::Send(msg))
    }

    pub(crate) fn fail(mut self, err: impl Into<SessionError>) -> (Self, StepOutput) {
        self.enter(SessionState::Failed);
        self.error = Some(err.into());
        self.pending_keys = None;
        let id = self.identifier;
        self.send(EapMessage::failure(id))
    }

    pub(crate) fn finished(self) -> (Self, StepOutput) {
        let d = if self.state == SessionState::Done { Decision::Success } else { Decision::Failure };
        (self, StepOutput::Decision(d))
    }

    /// Response to the last request, in this method.
    pub(crate) fn check_response(&self, msg: &EapMessage) -> Result<(), SessionError> {
        if msg.code != EapCode::Response || msg.method() != Some(self.protocol.method()) {
            return Err(SessionError::Unexpected);
        }
        if msg.identifier != self.identifier {
            return Err(SessionError::IdentifierMismatch);
        }
        Ok(())
    }

    /// Bytes that failed to decode: recorded verbatim, session fails.
    pub fn reject_bytes(mut self, bytes: &[u8], err: CodecError) -> (Self, StepOutput) {
        if self.state.is_terminal() {
            return self.finished();
        }
        self.transcript.push(bytes.to_vec());
        self.fail(err)
    }
}

impl PeerSession {
    pub(crate) fn record(&mut self, msg: &EapMessage) {
        self.transcript.push(encode_eap(msg));
    }

    pub(crate) fn enter(&mut self, next: SessionState) {
        debug_assert!(next >= self.state, "state regressed from {:?} to {next:?}", self.state);
        self.state = next;
    }

    pub(crate) fn send(mut self, msg: EapMessage) -> (Self, StepOutput) {
        self.record(&msg);
        (self, StepOutput::Send(msg))
    }

    /// Fails locally, optionally telling the server why.
    pub(crate) fn fail(mut self, err: impl Into<SessionError>, reply: Option<EapMessage>) -> (Self, StepOutput) {
        self.enter(SessionState::Failed);
        self.error = Some(err.into());
        self.pending_keys = None;
        self.next_pseudonym = None;
        match reply {
            Some(msg) => self.send(msg),
            None => (self, StepOutput::Decision(Decision::Failure)),
        }
    }

    /// Fails and answers the current request with a Client-Error.
    pub(crate) fn client_error(self, err: impl Into<SessionError>, identifier: u8) -> (Self, StepOutput) {
        let method = self.protocol.method();
        let reply = EapMessage::response(identifier, method, SUBTYPE_CLIENT_ERROR, Vec::new())
            .expect("empty response is valid");
        self.fail(err, Some(reply))
    }

    pub(crate) fn finished(self) -> (Self, StepOutput) {
        let d = if self.state == SessionState::Done { Decision::Success } else { Decision::Failure };
        (self, StepOutput::Decision(d))
    }

    /// Handles Success/Failure; returns `None` for requests.
    pub(crate) fn handle_decision(mut self, msg: &EapMessage) -> Result<(Self, StepOutput), Self> {
        match msg.code {
            EapCode::Success => {
                if self.state != SessionState::ChallengeProcessed {
                    return Ok(self.fail(SessionError::Unexpected, None));
                }
                if Some(msg.identifier) != self.last_identifier {
                    return Ok(self.fail(SessionError::IdentifierMismatch, None));
                }
                self.enter(SessionState::Done);
                self.keys = self.pending_keys.take();
                Ok((self, StepOutput::Decision(Decision::Success)))
            }
            EapCode::Failure => Ok(self.fail(SessionError::ServerFailure, None)),
            EapCode::Response => Ok(self.fail(SessionError::Unexpected, None)),
            EapCode::Request => Err(self),
        }
    }

    pub fn reject_bytes(mut self, bytes: &[u8], err: CodecError) -> (Self, StepOutput) {
        if self.state.is_terminal() {
            return self.finished();
        }
        self.transcript.push(bytes.to_vec());
        self.fail(err, None)
    }
}

impl Protocol {
    pub fn method(self) -> Method {
        match self {
            Protocol::Aka => Method::Aka,
            Protocol::EcdhAka => Method::EcdhAka,
        }
    }
}

pub(crate) fn fixed_attr<const N: usize>(msg: &EapMessage, id: u8) -> Result<[u8; N], SessionError> {
    msg.attr(id)
        .and_then(|a| a.fixed_data(N).ok())
        .and_then(|d| d.try_into().ok())
        .ok_or(SessionError::BadAttribute(id))
}

pub(crate) fn variable_attr(msg: &EapMessage, id: u8) -> Result<&[u8], SessionError> {
    msg.attr(id)
        .and_then(|a| a.variable_data().ok())
        .ok_or(SessionError::BadAttribute(id))
}
