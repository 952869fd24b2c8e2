//! Fault injection and replay against both authentication methods.

use std::sync::Arc;

use convlab_core::crypto::CurveParams;
use convlab_core::protocol::{
    decode_eap, server_step, Exchange, Fate, PeerSession, Protocol, ServerInput, ServerSession,
    SessionState, StepOutput, Testbed,
};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

fn bed(p: Protocol, seed: u64) -> Testbed {
    Testbed::new(p, Arc::new(CurveParams::p256()), seed)
}

fn toy_bed(p: Protocol, seed: u64) -> Testbed {
    Testbed::new(p, Arc::new(CurveParams::toy()), seed)
}

/// Snapshots taken just before each message is delivered.
fn checkpoints(b: Testbed, seed: u64) -> Vec<Exchange> {
    let mut x = b.exchange(seed);
    x.start();
    let mut out = Vec::new();
    while x.pending().is_some() {
        out.push(x.fork());
        x.step_with(|_, _, _| Fate::Deliver);
    }
    assert!(x.agreed());
    out
}

struct Tally {
    runs: usize,
    split: usize,
    both_done: usize,
    /// (message index, byte position, mask) of faults that went unnoticed
    undetected: Vec<(usize, usize, u8)>,
}

fn inject(b: Testbed, seed: u64, masks: &[u8]) -> Tally {
    let mut t = Tally { runs: 0, split: 0, both_done: 0, undetected: Vec::new() };
    for (i, cp) in checkpoints(b, seed).into_iter().enumerate() {
        let len = cp.pending().unwrap().1.len();
        for pos in 0..len {
            for &mask in masks {
                let mut x = cp.fork();
                let mut first = true;
                x.run_with(|_, _, bytes| {
                    if first {
                        bytes[pos] ^= mask;
                        first = false;
                    }
                    Fate::Deliver
                });
                t.runs += 1;
                if x.split_keys() {
                    t.split += 1;
                }
                if x.agreed() {
                    t.both_done += 1;
                    t.undetected.push((i, pos, mask));
                }
            }
        }
    }
    t
}

const MASKS: [u8; 9] = [0x01, 0x02, 0x04, 0x08, 0x10, 0x20, 0x40, 0x80, 0xFF];

#[test]
fn single_byte_faults_never_split_keys() {
    for p in Protocol::ALL {
        let t = inject(bed(p, 1), 1, &MASKS);
        assert!(t.runs > 100);
        assert_eq!(t.split, 0, "{p:?}");
    }
}

#[test]
fn every_single_byte_fault_is_detected() {
    for p in Protocol::ALL {
        let t = inject(bed(p, 2), 2, &MASKS);
        assert_eq!(t.both_done, 0, "{p:?}: {} of {} faulted runs still agreed", t.both_done, t.runs);
    }
}

/// Under every byte mask the only fault that goes unnoticed is, for the
/// baseline method, rewriting AT_ANY_ID_REQ (13) into AT_PERMANENT_ID_REQ
/// (10) in the unauthenticated identity request. The ECDH method notices
/// everything. The exhaustive sweep runs on the small curve to stay fast;
/// detection comes from the MACs, not from the curve size.
#[test]
fn every_byte_mask_is_detected_except_the_identity_downgrade() {
    let masks: Vec<u8> = (1..=255).collect();
    let t = inject(toy_bed(Protocol::EcdhAka, 3), 3, &masks);
    assert_eq!(t.split, 0);
    assert_eq!(t.both_done, 0, "{:?}", t.undetected);

    let t = inject(bed(Protocol::Aka, 3), 3, &masks);
    assert_eq!(t.split, 0);
    assert_eq!(t.undetected, vec![(0, 8, 13 ^ 10)]);
}

#[test]
fn replayed_messages_never_complete_a_fresh_session() {
    for p in Protocol::ALL {
        for seed in 0..5 {
            let b = bed(p, seed);
            let mut honest = b.exchange(seed);
            honest.run();
            assert!(honest.agreed());
            let recorded: Vec<_> = honest.wire().iter().map(|w| decode_eap(&w.bytes).unwrap()).collect();

            // attacker plays the peer: starts a fresh server session and
            // answers with whatever it recorded, in order
            let mut rng = ChaCha20Rng::seed_from_u64(seed + 100);
            let mut s = ServerSession::new(p, b.ap_id.clone());
            let (s2, _) = server_step(s, ServerInput::Start, &honest.aaa, &mut rng);
            s = s2;
            for m in recorded.iter().filter(|m| m.code == convlab_core::protocol::EapCode::Response) {
                let (s2, _) = server_step(s, ServerInput::Message(m), &honest.aaa, &mut rng);
                s = s2;
                assert_ne!(s.state(), SessionState::Done, "{p:?}");
            }

            // attacker plays the server: feeds a fresh peer the recorded requests
            let mut usim = honest.usim.clone();
            let mut peer = PeerSession::new(p);
            for m in recorded.iter().filter(|m| m.code != convlab_core::protocol::EapCode::Response) {
                let (p2, out) = convlab_core::protocol::peer_step(peer, m, &mut usim, &honest.peer_cfg, &mut rng);
                peer = p2;
                assert_ne!(peer.state(), SessionState::Done, "{p:?}");
                if matches!(out, StepOutput::Decision(_)) {
                    break;
                }
            }
        }
    }
}

