//! Deterministic discrete-event simulator of a WLAN-UMTS converged
//! network under loose, tight or hybrid coupling.
//!
//! Authentication dialogues are produced by the real protocol state
//! machines and timed over the modelled links; application traffic (FTP,
//! HTTP, multimedia, billing) shares the same links. All randomness
//! derives from `sim.seed`, with one stream per generator, so two runs
//! that differ only in the authentication protocol see the same
//! application demand.

pub mod auth;
pub mod channel;
pub mod engine;
pub mod scenario;
pub mod sim;
pub mod topology;
pub mod traffic;

use thiserror::Error;

pub use auth::{AuthKind, Leg, Script};
pub use channel::{contention_wait, Channel, DcfParams};
pub use engine::Engine;
pub use scenario::{CurveChoice, Scenario, ScenarioError, WlanMethod, KEYS as SCENARIO_KEYS};
pub use sim::{run, run_auth_session, AuthOverhead, AuthRecord, AuthResult, FlowCounts, PathAudit, SimOutput};
pub use topology::{build_topology, CouplingMode, Dscp, Hop, Link, LinkId, Medium, Network, Node, NodeId, NodeKind};
pub use traffic::PacketKind;

#[derive(Debug, Error)]
pub enum NetsimError {
    #[error("event at t={time} precedes the clock (t={now})")]
    SchedulePastEvent { now: f64, time: f64 },
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error("authentication failed: {0}")]
    AuthFailed(String),
}
