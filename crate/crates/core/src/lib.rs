//! Authentication and QoS laboratory for 3G-WLAN convergence.
//!
//! - [`crypto`]: prime-field elliptic curves, ECDH, a keyed PRF with the
//!   MAC/AEAD/KDF built on it, and the AKA function family.
//! - [`protocol`]: EAP codec plus the EAP-AKA and ECDH-AKA peer/server
//!   state machines and an in-memory exchange driver.
//! - [`seceval`]: an adversary harness that derives a security-property
//!   matrix from executed attacks.
//! - [`netsim`]: a deterministic discrete-event simulator of loose, tight
//!   and hybrid coupled networks carrying authentication and application
//!   traffic.
//! - [`metrics`]: QoS time series, CSV export and A/B comparison.

pub mod crypto;
pub mod metrics;
pub mod netsim;
pub mod protocol;
pub mod seceval;

pub use crypto::{run_self_tests, CurveParams, SelfTestReport};
pub use metrics::{compare, ComparisonReport, Direction, MetricId, MetricSeries, MetricsError, RunMetrics};
pub use netsim::{run, run_auth_session, AuthKind, CouplingMode, NetsimError, Scenario, ScenarioError, SimOutput};
pub use protocol::Protocol;
pub use seceval::{evaluate_matrix, matches_reference, reference_table, Property, PropertyReport, ReferenceTable};
