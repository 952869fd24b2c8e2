//! The attack catalogue. Each scenario drives real protocol runs through
//! [`Exchange`] and classifies what the adversary achieved.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::crypto::{CurveParams, EcKeyPair, Sqn};
use crate::protocol::codec::{
    AT_ANY_ID_REQ, AT_AUTS, AT_CPUB, AT_PERMANENT_ID_REQ, AT_SPUB,
};
use crate::protocol::{
    decode_eap, derive_from_longterm, encode_eap, peer_step, server_step, Attribute, EapCode,
    EapMessage, Exchange, Fate, Imsi, PeerSession, Protocol, ServerInput, ServerSession,
    SessionState, StepOutput, Testbed, IMSI_DIGITS,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Capability {
    Eavesdrop,
    Inject,
    ReplayStore,
    ActiveRelay,
    CompromiseK { after_session: bool },
}

/// Set of adversary capabilities; an active relay can always also listen
/// and inject.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdversaryModel {
    capabilities: BTreeSet<Capability>,
}

impl AdversaryModel {
    pub fn new(caps: impl IntoIterator<Item = Capability>) -> Self {
        let mut capabilities: BTreeSet<_> = caps.into_iter().collect();
        if capabilities.contains(&Capability::ActiveRelay) {
            capabilities.insert(Capability::Eavesdrop);
            capabilities.insert(Capability::Inject);
        }
        AdversaryModel { capabilities }
    }

    pub fn has(&self, c: Capability) -> bool {
        self.capabilities.contains(&c)
    }

    pub fn capabilities(&self) -> impl Iterator<Item = &Capability> {
        self.capabilities.iter()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum AttackScenario {
    IdentityCatch,
    ReplayChallenge,
    RelaySubstitute,
    KeyCompromisePfs,
    SqnDesyncCost,
}

impl AttackScenario {
    pub const ALL: [AttackScenario; 5] = [
        AttackScenario::IdentityCatch,
        AttackScenario::ReplayChallenge,
        AttackScenario::RelaySubstitute,
        AttackScenario::KeyCompromisePfs,
        AttackScenario::SqnDesyncCost,
    ];

    pub fn adversary(self) -> AdversaryModel {
        use Capability::*;
        match self {
            AttackScenario::IdentityCatch => AdversaryModel::new([Eavesdrop]),
            AttackScenario::ReplayChallenge => AdversaryModel::new([Eavesdrop, ReplayStore, Inject]),
            AttackScenario::RelaySubstitute => AdversaryModel::new([ActiveRelay]),
            AttackScenario::KeyCompromisePfs => {
                AdversaryModel::new([Eavesdrop, CompromiseK { after_session: true }])
            }
            // no adversary: the USIM and HSS drift apart on their own
            AttackScenario::SqnDesyncCost => AdversaryModel::new([]),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            AttackScenario::IdentityCatch => "identity-catch",
            AttackScenario::ReplayChallenge => "replay-challenge",
            AttackScenario::RelaySubstitute => "relay-substitute",
            AttackScenario::KeyCompromisePfs => "key-compromise-pfs",
            AttackScenario::SqnDesyncCost => "sqn-desync-cost",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Secret {
    Imsi,
    Msk,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AttackOutcome {
    AttackerLearned(Secret),
    /// An honest party failed before any key was used.
    Detected,
    NoEffect,
    /// Messages beyond the five of a clean run.
    ExtraMessages(u32),
    /// An injected message drove an honest party to completion without
    /// exposing a secret. Never expected; kept distinct so it cannot hide.
    Accepted,
}

impl fmt::Display for AttackOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AttackOutcome::AttackerLearned(Secret::Imsi) => f.write_str("attacker-learned-imsi"),
            AttackOutcome::AttackerLearned(Secret::Msk) => f.write_str("attacker-learned-msk"),
            AttackOutcome::Detected => f.write_str("detected"),
            AttackOutcome::NoEffect => f.write_str("no-effect"),
            AttackOutcome::ExtraMessages(n) => write!(f, "extra-messages({n})"),
            AttackOutcome::Accepted => f.write_str("accepted"),
        }
    }
}

/// Outcome plus what the harness saw along the way.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AttackRun {
    pub outcome: AttackOutcome,
    /// Some run in this attack carried AT_AUTS.
    pub auts_seen: bool,
    pub evidence: String,
}

impl AttackRun {
    fn new(outcome: AttackOutcome, evidence: impl Into<String>) -> Self {
        AttackRun {
            outcome,
            auts_seen: false,
            evidence: evidence.into(),
        }
    }
}

pub fn run_attack(protocol: Protocol, scenario: AttackScenario, seed: u64) -> AttackOutcome {
    run_attack_detailed(protocol, scenario, seed, &Arc::new(CurveParams::p256())).outcome
}

pub fn run_attack_detailed(
    protocol: Protocol,
    scenario: AttackScenario,
    seed: u64,
    curve: &Arc<CurveParams>,
) -> AttackRun {
    let bed = Testbed::new(protocol, curve.clone(), seed);
    let mut rng = ChaCha20Rng::seed_from_u64(seed.wrapping_mul(0x9e37_79b9_7f4a_7c15) ^ scenario as u64);
    match scenario {
        AttackScenario::IdentityCatch => identity_catch(&bed, &mut rng),
        AttackScenario::ReplayChallenge => replay(&bed, &mut rng),
        AttackScenario::RelaySubstitute => relay_substitute(&bed, &mut rng),
        AttackScenario::KeyCompromisePfs => key_compromise(&bed, &mut rng),
        AttackScenario::SqnDesyncCost => sqn_desync(&bed, &mut rng),
    }
}

fn hex(b: &[u8]) -> String {
    b.iter().map(|x| format!("{x:02x}")).collect()
}

/// Every run of exactly 15 ASCII digits, as an eavesdropper would harvest.
fn harvest_imsis(bytes: &[u8]) -> Vec<Imsi> {
    let mut out = Vec::new();
    let mut start = 0;
    for i in 0..=bytes.len() {
        if i == bytes.len() || !bytes[i].is_ascii_digit() {
            if i - start >= IMSI_DIGITS {
                for w in bytes[start..i].windows(IMSI_DIGITS) {
                    if let Ok(imsi) = Imsi::from_bytes(w) {
                        out.push(imsi);
                    }
                }
            }
            start = i + 1;
        }
    }
    out
}

fn leaked(x: &Exchange, imsi: &Imsi) -> Option<usize> {
    x.wire().iter().position(|w| harvest_imsis(&w.bytes).contains(imsi))
}

/// Passive observation of a first-contact run and a follow-up run.
fn identity_catch(bed: &Testbed, rng: &mut ChaCha20Rng) -> AttackRun {
    let imsi = bed.usim.imsi.clone();
    let mut first = bed.exchange(rng.gen());
    first.run();
    let mut second = first.next_session(rng.gen());
    second.run();
    for (label, x) in [("first-contact", &first), ("follow-up", &second)] {
        if let Some(i) = leaked(x, &imsi) {
            return AttackRun::new(
                AttackOutcome::AttackerLearned(Secret::Imsi),
                format!("{label} run, message {} carries IMSI {imsi} in cleartext: {}", i + 1, hex(&x.wire()[i].bytes)),
            );
        }
    }
    AttackRun::new(
        AttackOutcome::NoEffect,
        format!(
            "no 15-digit IMSI in {} observed messages ({} and {} bytes total)",
            first.message_count() + second.message_count(),
            first.wire().iter().map(|w| w.bytes.len()).sum::<usize>(),
            second.wire().iter().map(|w| w.bytes.len()).sum::<usize>()
        ),
    )
}

fn with_identifier(m: &EapMessage, id: u8) -> EapMessage {
    let mut m = m.clone();
    m.identifier = id;
    m
}

/// Records an honest run, then plays every recorded message into fresh
/// sessions on both sides, fixing up identifiers as an attacker would.
fn replay(bed: &Testbed, rng: &mut ChaCha20Rng) -> AttackRun {
    let mut honest = bed.exchange(rng.gen());
    honest.run();
    let recorded: Vec<EapMessage> = honest.wire().iter().map(|w| decode_eap(&w.bytes).expect("own encoding")).collect();
    let aaa = &honest.aaa;
    let mut notes = Vec::new();

    // impersonate the peer towards a fresh server session
    let mut s = ServerSession::new(bed.protocol, bed.ap_id.clone());
    let (s2, out) = server_step(s, ServerInput::Start, aaa, rng);
    s = s2;
    let mut last_id = match out {
        StepOutput::Send(m) => m.identifier,
        StepOutput::Decision(_) => 0,
    };
    for m in recorded.iter().filter(|m| m.code == EapCode::Response) {
        if s.state().is_terminal() {
            break;
        }
        let (s2, out) = server_step(s, ServerInput::Message(&with_identifier(m, last_id)), aaa, rng);
        s = s2;
        if let StepOutput::Send(reply) = out {
            last_id = reply.identifier;
        }
    }
    if s.state() == SessionState::Done {
        return AttackRun::new(AttackOutcome::Accepted, "server accepted replayed responses");
    }
    notes.push(format!("server: {:?} ({})", s.state(), s.error().map_or("-".into(), |e| e.to_string())));

    // impersonate the server towards the same peer, after its honest run
    let mut usim = honest.usim.clone();
    let mut peer = PeerSession::new(bed.protocol);
    let mut auts_seen = false;
    let mut last_req = 0u8;
    for m in recorded.iter().filter(|m| m.code != EapCode::Response) {
        if peer.state().is_terminal() {
            break;
        }
        let m = if m.code == EapCode::Request { m.clone() } else { with_identifier(m, last_req) };
        if m.code == EapCode::Request {
            last_req = m.identifier;
        }
        let (p2, out) = peer_step(peer, &m, &mut usim, &honest.peer_cfg, rng);
        peer = p2;
        if let StepOutput::Send(reply) = &out {
            auts_seen |= reply.attr(AT_AUTS).is_some();
        }
    }
    if peer.state() == SessionState::Done {
        return AttackRun::new(AttackOutcome::Accepted, "peer accepted replayed requests");
    }
    notes.push(format!(
        "peer: {:?} ({}){}",
        peer.state(),
        peer.error().map_or("-".into(), |e| e.to_string()),
        if auts_seen { ", answered stale AUTN with AT_AUTS" } else { "" }
    ));
    AttackRun {
        outcome: AttackOutcome::Detected,
        auts_seen,
        evidence: notes.join("; "),
    }
}

/// One substitution an active relay can make in the first two messages.
struct Substitution {
    label: String,
    /// message index (0 = request/identity, 1 = response/identity)
    message: usize,
    rewrite: Box<dyn Fn(&EapMessage) -> Option<EapMessage>>,
}

fn substitutions(bed: &Testbed, rng: &mut ChaCha20Rng) -> Vec<Substitution> {
    let mut subs = Vec::new();
    subs.push(Substitution {
        label: "identity request rewritten to demand the permanent identity".into(),
        message: 0,
        rewrite: Box::new(|m: &EapMessage| {
            let v = m.attr(AT_ANY_ID_REQ)?.value().to_vec();
            let mut attrs: Vec<Attribute> = m.data()?.attributes().to_vec();
            for a in attrs.iter_mut().filter(|a| a.id() == AT_ANY_ID_REQ) {
                *a = Attribute::raw(AT_PERMANENT_ID_REQ, v.clone()).ok()?;
            }
            EapMessage::request(m.identifier, m.method()?, m.subtype()?, attrs).ok()
        }),
    });
    let curve = bed.aaa.curve.clone();
    for (message, id) in [(0usize, AT_SPUB), (1, AT_CPUB)] {
        let fake = EcKeyPair::generate(&curve, rng);
        let enc = curve.encode_point(&fake.public);
        subs.push(Substitution {
            label: format!("public value in attribute {id} replaced by the relay's own"),
            message,
            rewrite: Box::new(move |m: &EapMessage| {
                m.attr(id)?;
                let mut m = m.clone();
                m.replace_attr(Attribute::variable(id, &enc).ok()?);
                Some(m)
            }),
        });
    }
    // every other attribute value in the first two messages, randomised
    for message in 0..2 {
        let salt: u64 = rng.gen();
        subs.push(Substitution {
            label: format!("all attribute values in message {} randomised", message + 1),
            message,
            rewrite: Box::new(move |m: &EapMessage| {
                let mut r = ChaCha20Rng::seed_from_u64(salt);
                let mut out = m.clone();
                let attrs = m.data()?.attributes().to_vec();
                for a in attrs {
                    let mut v = a.value().to_vec();
                    if v.len() > 2 {
                        r.fill(&mut v[2..]);
                    }
                    out.replace_attr(Attribute::raw(a.id(), v).ok()?);
                }
                Some(out)
            }),
        });
    }
    subs
}

/// Man-in-the-middle by value substitution on the unprotected opening
/// messages of a returning subscriber's session. The relay wins if the
/// session completes without either side noticing and it learned
/// something along the way.
fn relay_substitute(bed: &Testbed, rng: &mut ChaCha20Rng) -> AttackRun {
    let imsi = bed.usim.imsi.clone();
    let mut warmup = bed.exchange(rng.gen());
    warmup.run();
    let mut notes = Vec::new();
    let mut applied = 0;
    let mut harmless = 0;
    for sub in substitutions(bed, rng) {
        let mut x = warmup.next_session(rng.gen()).fork();
        let mut did = false;
        x.run_with(|i, _, bytes| {
            if i == sub.message {
                if let Some(m) = decode_eap(bytes).ok().and_then(|m| (sub.rewrite)(&m)) {
                    let rewritten = encode_eap(&m);
                    did |= rewritten != *bytes;
                    *bytes = rewritten;
                }
            }
            Fate::Deliver
        });
        if !did {
            continue;
        }
        applied += 1;
        let detected = x.peer.state() == SessionState::Failed || x.server.state() == SessionState::Failed;
        if !detected {
            if let Some(i) = leaked(&x, &imsi) {
                return AttackRun::new(
                    AttackOutcome::AttackerLearned(Secret::Imsi),
                    format!("{}: session completed undetected; message {} then carried IMSI {imsi}", sub.label, i + 1),
                );
            }
            harmless += 1;
            notes.push(format!("{}: undetected but nothing learned", sub.label));
            continue;
        }
        let why = |e: Option<&crate::protocol::SessionError>| e.map_or("-".to_string(), |e| e.to_string());
        let mut note = format!(
            "{}: server {:?} ({}), peer {:?} ({})",
            sub.label,
            x.server.state(),
            why(x.server.error()),
            x.peer.state(),
            why(x.peer.error())
        );
        if leaked(&x, &imsi).is_some() {
            note.push_str(", IMSI visible before detection");
        }
        notes.push(note);
    }
    let outcome = if applied == 0 || harmless > 0 { AttackOutcome::NoEffect } else { AttackOutcome::Detected };
    if applied == 0 {
        notes.push("no applicable substitution".into());
    }
    AttackRun::new(outcome, notes.join("; "))
}

/// Records an honest run, then hands the adversary K.
fn key_compromise(bed: &Testbed, rng: &mut ChaCha20Rng) -> AttackRun {
    let mut x = bed.exchange(rng.gen());
    x.run();
    let transcript: Vec<Vec<u8>> = x.wire().iter().map(|w| w.bytes.clone()).collect();
    let true_msk = x.peer.keys().expect("honest run completes").msk;
    match derive_from_longterm(&bed.usim.k, &transcript) {
        Ok(keys) if keys.msk == true_msk => AttackRun::new(
            AttackOutcome::AttackerLearned(Secret::Msk),
            format!("MSK recomputed from K and the transcript: {}..", hex(&keys.msk[..8])),
        ),
        Ok(_) => AttackRun::new(AttackOutcome::NoEffect, "offline derivation produced a wrong MSK"),
        Err(e) => AttackRun::new(AttackOutcome::NoEffect, format!("{e}; MSK depends on ephemeral ECDH secret")),
    }
}

/// The USIM's counter runs ahead of the HSS (e.g. after authenticating
/// in another serving network); count what the next session costs.
fn sqn_desync(bed: &Testbed, rng: &mut ChaCha20Rng) -> AttackRun {
    let mut bed = bed.clone();
    let hss_sqn = bed.aaa.hss.current_sqn(&bed.usim.imsi).expect("provisioned");
    let ahead = rng.gen_range(2..=1 << 20);
    bed.usim.force_sqn(Sqn::new(hss_sqn.value() + ahead));
    let mut x = bed.exchange(rng.gen());
    x.run();
    let auts_seen = x
        .wire()
        .iter()
        .any(|w| decode_eap(&w.bytes).is_ok_and(|m| m.attr(AT_AUTS).is_some()));
    if !x.agreed() {
        return AttackRun {
            outcome: AttackOutcome::Detected,
            auts_seen,
            evidence: format!("desynchronised session did not complete ({} messages)", x.message_count()),
        };
    }
    let extra = x.message_count().saturating_sub(5) as u32;
    AttackRun {
        outcome: AttackOutcome::ExtraMessages(extra),
        auts_seen,
        evidence: format!(
            "USIM {ahead} ahead of HSS; {} messages{}",
            x.message_count(),
            if auts_seen { ", AT_AUTS exchanged and HSS resynchronised" } else { ", no SQN consulted" }
        ),
    }
}
