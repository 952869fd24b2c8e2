//! Scenario files: one `section.key = value` per line, `#` starts a
//! comment. Every key has a default; unknown keys are errors. Writing a
//! scenario back out lists every key, so a written scenario is a complete
//! record of a run's inputs.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use thiserror::Error;

use crate::protocol::Protocol;

use super::topology::CouplingMode;

#[derive(Debug, Error, PartialEq)]
pub enum ScenarioError {
    #[error("line {line}: expected `section.key = value`, got `{text}`")]
    Syntax { line: usize, text: String },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: key `{key}` given twice")]
    DuplicateKey { line: usize, key: String },
    #[error("`{key}`: cannot use `{value}`: {reason}")]
    BadValue { key: String, value: String, reason: String },
    #[error("{0}")]
    Invalid(String),
    #[error("cannot read scenario: {0}")]
    Io(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CurveChoice {
    P256,
    Toy,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum WlanMethod {
    /// EAP with the configured protocol; the AAA consults the HLR.
    Eap,
    /// Plain user/password against the local AAA, no HLR involved.
    Password,
}

trait Value: Sized {
    fn parse_value(s: &str) -> Result<Self, String>;
    fn to_value(&self) -> String;
}

macro_rules! numeric_value {
    ($($t:ty),*) => {$(
        impl Value for $t {
            fn parse_value(s: &str) -> Result<Self, String> {
                s.parse().map_err(|e| format!("{e}"))
            }
            fn to_value(&self) -> String {
                self.to_string()
            }
        }
    )*};
}

numeric_value!(u32, u64, usize);

impl Value for f64 {
    fn parse_value(s: &str) -> Result<Self, String> {
        let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err("not a finite number".into())
        }
    }
    fn to_value(&self) -> String {
        self.to_string()
    }
}

impl Value for Protocol {
    fn parse_value(s: &str) -> Result<Self, String> {
        Protocol::parse(s).ok_or_else(|| "expected `aka` or `ecdh-aka`".into())
    }
    fn to_value(&self) -> String {
        self.name().to_string()
    }
}

impl Value for CouplingMode {
    fn parse_value(s: &str) -> Result<Self, String> {
        s.parse()
    }
    fn to_value(&self) -> String {
        self.name().to_string()
    }
}

impl Value for CurveChoice {
    fn parse_value(s: &str) -> Result<Self, String> {
        match s {
            "p256" | "P-256" => Ok(CurveChoice::P256),
            "toy" => Ok(CurveChoice::Toy),
            _ => Err("expected `p256` or `toy`".into()),
        }
    }
    fn to_value(&self) -> String {
        match self {
            CurveChoice::P256 => "p256",
            CurveChoice::Toy => "toy",
        }
        .into()
    }
}

impl Value for WlanMethod {
    fn parse_value(s: &str) -> Result<Self, String> {
        match s {
            "eap" => Ok(WlanMethod::Eap),
            "password" => Ok(WlanMethod::Password),
            _ => Err("expected `eap` or `password`".into()),
        }
    }
    fn to_value(&self) -> String {
        match self {
            WlanMethod::Eap => "eap",
            WlanMethod::Password => "password",
        }
        .into()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurveSection {
    pub name: CurveChoice,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TopologySection {
    pub coupling: CouplingMode,
    pub wlan_workstations: usize,
    pub umts_workstations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinksSection {
    pub wlan_bps: f64,
    pub wlan_delay_s: f64,
    pub wlan_slot_s: f64,
    pub wlan_cw_min: u32,
    pub wlan_cw_max: u32,
    /// MAC header + FCS carried by every WLAN frame.
    pub wlan_frame_overhead_bytes: u32,
    /// DIFS + PLCP preamble/header time per WLAN frame.
    pub wlan_phy_overhead_s: f64,
    pub umts_bps: f64,
    pub umts_delay_s: f64,
    pub core_bps: f64,
    /// Bandwidth of every link that ends at the SGSN; lets a scenario
    /// provision the UMTS packet core below the rest of the wired network.
    pub sgsn_bps: f64,
    pub core_delay_s: f64,
    pub wired_queue_bytes: u64,
    pub radio_queue_bytes: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrafficSection {
    pub mtu_bytes: u32,
    pub header_bytes: u32,
    pub ftp_file_bytes: f64,
    pub ftp_interval_s: f64,
    pub ftp_request_bytes: u32,
    pub http_page_bytes: u32,
    pub http_objects: u32,
    pub http_object_bytes: u32,
    pub http_interval_s: f64,
    pub http_request_bytes: u32,
    pub mm_bitrate_bps: f64,
    pub mm_packet_bytes: u32,
    pub mm_on_s: f64,
    pub mm_off_s: f64,
    pub billing_record_bytes: u32,
    pub billing_period_s: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AuthSection {
    pub protocol: Protocol,
    pub wlan_method: WlanMethod,
    pub p_sync: f64,
    pub reauth_period_s: f64,
    /// Transport encapsulation added to every signalling message.
    pub header_bytes: u32,
    /// Payload of fixed UMTS signalling messages (attach, security mode).
    pub signal_bytes: u32,
    pub password_bytes: u32,
    /// Processing time per received signalling message.
    pub proc_s: f64,
    /// Cost of one elliptic-curve scalar multiplication.
    pub ec_mult_s: f64,
    pub retransmit_s: f64,
    pub max_retransmits: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimSection {
    pub seed: u64,
    pub duration_s: f64,
    pub sample_period_s: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub curve: CurveSection,
    pub topology: TopologySection,
    pub links: LinksSection,
    pub traffic: TrafficSection,
    pub auth: AuthSection,
    pub sim: SimSection,
}

impl Default for Scenario {
    fn default() -> Self {
        Scenario {
            curve: CurveSection { name: CurveChoice::P256 },
            topology: TopologySection {
                coupling: CouplingMode::Hybrid,
                wlan_workstations: 10,
                umts_workstations: 10,
            },
            links: LinksSection {
                wlan_bps: 11e6,
                wlan_delay_s: 0.001,
                wlan_slot_s: 20e-6,
                wlan_cw_min: 31,
                wlan_cw_max: 1023,
                wlan_frame_overhead_bytes: 34,
                wlan_phy_overhead_s: 242e-6,
                umts_bps: 2e6,
                umts_delay_s: 0.005,
                core_bps: 100e6,
                sgsn_bps: 100e6,
                core_delay_s: 0.002,
                wired_queue_bytes: 500_000,
                radio_queue_bytes: 250_000,
            },
            traffic: TrafficSection {
                mtu_bytes: 1500,
                header_bytes: 40,
                ftp_file_bytes: 50_000.0,
                ftp_interval_s: 30.0,
                ftp_request_bytes: 100,
                http_page_bytes: 10_000,
                http_objects: 5,
                http_object_bytes: 5_000,
                http_interval_s: 20.0,
                http_request_bytes: 350,
                mm_bitrate_bps: 64_000.0,
                mm_packet_bytes: 200,
                mm_on_s: 10.0,
                mm_off_s: 20.0,
                billing_record_bytes: 1000,
                billing_period_s: 60.0,
            },
            auth: AuthSection {
                protocol: Protocol::EcdhAka,
                wlan_method: WlanMethod::Eap,
                p_sync: 0.05,
                reauth_period_s: 300.0,
                header_bytes: 48,
                signal_bytes: 60,
                password_bytes: 64,
                proc_s: 0.0005,
                ec_mult_s: 0.002,
                retransmit_s: 1.0,
                max_retransmits: 3,
            },
            sim: SimSection { seed: 1, duration_s: 600.0, sample_period_s: 1.0 },
        }
    }
}

macro_rules! scenario_keys {
    ($($sec:ident . $field:ident),* $(,)?) => {
        /// Every accepted key, in file order.
        pub const KEYS: &[&str] = &[$(concat!(stringify!($sec), ".", stringify!($field))),*];

        impl Scenario {
            fn set_raw(&mut self, key: &str, value: &str) -> Option<Result<(), String>> {
                match key {
                    $(concat!(stringify!($sec), ".", stringify!($field)) => Some(
                        Value::parse_value(value).map(|v| self.$sec.$field = v)
                    ),)*
                    _ => None,
                }
            }

            /// Canonical text of one setting.
            pub fn get(&self, key: &str) -> Option<String> {
                match key {
                    $(concat!(stringify!($sec), ".", stringify!($field)) => Some(self.$sec.$field.to_value()),)*
                    _ => None,
                }
            }
        }
    };
}

scenario_keys!(
    curve.name,
    topology.coupling,
    topology.wlan_workstations,
    topology.umts_workstations,
    links.wlan_bps,
    links.wlan_delay_s,
    links.wlan_slot_s,
    links.wlan_cw_min,
    links.wlan_cw_max,
    links.wlan_frame_overhead_bytes,
    links.wlan_phy_overhead_s,
    links.umts_bps,
    links.umts_delay_s,
    links.core_bps,
    links.sgsn_bps,
    links.core_delay_s,
    links.wired_queue_bytes,
    links.radio_queue_bytes,
    traffic.mtu_bytes,
    traffic.header_bytes,
    traffic.ftp_file_bytes,
    traffic.ftp_interval_s,
    traffic.ftp_request_bytes,
    traffic.http_page_bytes,
    traffic.http_objects,
    traffic.http_object_bytes,
    traffic.http_interval_s,
    traffic.http_request_bytes,
    traffic.mm_bitrate_bps,
    traffic.mm_packet_bytes,
    traffic.mm_on_s,
    traffic.mm_off_s,
    traffic.billing_record_bytes,
    traffic.billing_period_s,
    auth.protocol,
    auth.wlan_method,
    auth.p_sync,
    auth.reauth_period_s,
    auth.header_bytes,
    auth.signal_bytes,
    auth.password_bytes,
    auth.proc_s,
    auth.ec_mult_s,
    auth.retransmit_s,
    auth.max_retransmits,
    sim.seed,
    sim.duration_s,
    sim.sample_period_s,
);

impl Scenario {
    /// Parses scenario text over the defaults, then validates.
    pub fn parse(text: &str) -> Result<Self, ScenarioError> {
        let mut s = Scenario::default();
        let mut seen = std::collections::HashSet::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let Some((key, value)) = body.split_once('=') else {
                return Err(ScenarioError::Syntax { line, text: raw.to_string() });
            };
            let (key, value) = (key.trim(), value.trim());
            if !key.contains('.') || value.is_empty() {
                return Err(ScenarioError::Syntax { line, text: raw.to_string() });
            }
            if !seen.insert(key.to_string()) {
                return Err(ScenarioError::DuplicateKey { line, key: key.to_string() });
            }
            s.set(key, value).map_err(|e| match e {
                ScenarioError::UnknownKey { key, .. } => ScenarioError::UnknownKey { line, key },
                other => other,
            })?;
        }
        s.validate()?;
        Ok(s)
    }

    pub fn load(path: &Path) -> Result<Self, ScenarioError> {
        let text = std::fs::read_to_string(path).map_err(|e| ScenarioError::Io(format!("{}: {e}", path.display())))?;
        Scenario::parse(&text)
    }

    /// Overrides one setting (not validated; call [`Scenario::validate`]).
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ScenarioError> {
        match self.set_raw(key, value) {
            None => Err(ScenarioError::UnknownKey { line: 0, key: key.to_string() }),
            Some(Err(reason)) => Err(ScenarioError::BadValue {
                key: key.to_string(),
                value: value.to_string(),
                reason,
            }),
            Some(Ok(())) => Ok(()),
        }
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        let bad = |msg: &str| Err(ScenarioError::Invalid(msg.to_string()));
        let l = &self.links;
        for (name, v) in [("links.wlan_bps", l.wlan_bps), ("links.umts_bps", l.umts_bps), ("links.core_bps", l.core_bps), ("links.sgsn_bps", l.sgsn_bps)] {
            if v <= 0.0 {
                return bad(&format!("{name} must be positive"));
            }
        }
        for (name, v) in [
            ("links.wlan_delay_s", l.wlan_delay_s),
            ("links.umts_delay_s", l.umts_delay_s),
            ("links.core_delay_s", l.core_delay_s),
            ("links.wlan_slot_s", l.wlan_slot_s),
            ("links.wlan_phy_overhead_s", l.wlan_phy_overhead_s),
            ("auth.proc_s", self.auth.proc_s),
            ("auth.ec_mult_s", self.auth.ec_mult_s),
            ("sim.duration_s", self.sim.duration_s),
        ] {
            if v < 0.0 {
                return bad(&format!("{name} must not be negative"));
            }
        }
        if l.wlan_cw_min > l.wlan_cw_max {
            return bad("links.wlan_cw_min exceeds links.wlan_cw_max");
        }
        let t = &self.traffic;
        if t.mtu_bytes <= t.header_bytes {
            return bad("traffic.mtu_bytes must exceed traffic.header_bytes");
        }
        for (name, v) in [
            ("traffic.ftp_file_bytes", t.ftp_file_bytes),
            ("traffic.ftp_interval_s", t.ftp_interval_s),
            ("traffic.http_interval_s", t.http_interval_s),
            ("traffic.mm_bitrate_bps", t.mm_bitrate_bps),
            ("traffic.mm_on_s", t.mm_on_s),
            ("traffic.mm_off_s", t.mm_off_s),
            ("traffic.billing_period_s", t.billing_period_s),
            ("auth.reauth_period_s", self.auth.reauth_period_s),
            ("auth.retransmit_s", self.auth.retransmit_s),
            ("sim.sample_period_s", self.sim.sample_period_s),
        ] {
            if v <= 0.0 {
                return bad(&format!("{name} must be positive"));
            }
        }
        for (name, v) in [
            ("traffic.ftp_request_bytes", t.ftp_request_bytes),
            ("traffic.http_page_bytes", t.http_page_bytes),
            ("traffic.http_object_bytes", t.http_object_bytes),
            ("traffic.http_request_bytes", t.http_request_bytes),
            ("traffic.mm_packet_bytes", t.mm_packet_bytes),
            ("traffic.billing_record_bytes", t.billing_record_bytes),
        ] {
            if v == 0 {
                return bad(&format!("{name} must be positive"));
            }
        }
        if !(0.0..=1.0).contains(&self.auth.p_sync) {
            return bad("auth.p_sync must lie in [0, 1]");
        }
        Ok(())
    }

    /// Every setting with its canonical value.
    pub fn settings(&self) -> BTreeMap<String, String> {
        KEYS.iter().map(|k| (k.to_string(), self.get(k).unwrap())).collect()
    }

    /// Complete scenario text; parses back to an equal scenario.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let mut section = "";
        for k in KEYS {
            let sec = k.split('.').next().unwrap();
            if sec != section {
                if !section.is_empty() {
                    out.push('\n');
                }
                let _ = writeln!(out, "# {sec}");
                section = sec;
            }
            let _ = writeln!(out, "{k} = {}", self.get(k).unwrap());
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip_through_text() {
        let s = Scenario::default();
        assert_eq!(Scenario::parse(&s.to_text()).unwrap(), s);
        assert_eq!(s.settings().len(), KEYS.len());
    }

    #[test]
    fn overrides_and_comments() {
        let s = Scenario::parse(
            "# a comment\n\n topology.coupling = tight  # trailing\nsim.seed=7\nauth.protocol = aka\n",
        )
        .unwrap();
        assert_eq!(s.topology.coupling, CouplingMode::Tight);
        assert_eq!(s.sim.seed, 7);
        assert_eq!(s.auth.protocol, Protocol::Aka);
    }

    #[test]
    fn unknown_keys_are_errors() {
        assert_eq!(
            Scenario::parse("sim.seed = 1\nsim.speed = 2\n"),
            Err(ScenarioError::UnknownKey { line: 2, key: "sim.speed".into() })
        );
        assert!(matches!(Scenario::parse("nosection = 2"), Err(ScenarioError::Syntax { .. })));
        assert!(matches!(Scenario::parse("sim.seed"), Err(ScenarioError::Syntax { .. })));
    }

    #[test]
    fn bad_values_are_errors() {
        assert!(matches!(Scenario::parse("sim.seed = -1"), Err(ScenarioError::BadValue { .. })));
        assert!(matches!(Scenario::parse("auth.protocol = tls"), Err(ScenarioError::BadValue { .. })));
        assert!(matches!(Scenario::parse("links.wlan_bps = inf"), Err(ScenarioError::BadValue { .. })));
        assert!(matches!(Scenario::parse("auth.p_sync = 1.5"), Err(ScenarioError::Invalid(_))));
        assert!(matches!(Scenario::parse("links.core_bps = 0"), Err(ScenarioError::Invalid(_))));
        assert!(matches!(Scenario::parse("sim.seed = 1\nsim.seed = 2"), Err(ScenarioError::DuplicateKey { .. })));
    }
}
