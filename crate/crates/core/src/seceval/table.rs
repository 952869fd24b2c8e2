//! The published protocol comparison, carried as static data. Only the
//! EAP-AKA and proposed columns are ever checked against measurements;
//! the certificate-based and SIM columns are reference only.

use std::fmt::Write as _;

use super::Property;

pub const PROPOSED: &str = "Proposed";
pub const EAP_AKA: &str = "EAP-AKA";
pub const EAP_SIM: &str = "EAP-SIM";
pub const EAP_TLS: &str = "EAP-TLS";
pub const EAP_TTLS: &str = "EAP-TTLS";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cell {
    Yes,
    No,
    /// "-": the property does not arise for this protocol.
    NotApplicable,
}

impl Cell {
    pub fn symbol(self) -> &'static str {
        match self {
            Cell::Yes => "✓",
            Cell::No => "✗",
            Cell::NotApplicable => "-",
        }
    }

    pub fn word(self) -> &'static str {
        match self {
            Cell::Yes => "yes",
            Cell::No => "no",
            Cell::NotApplicable => "-",
        }
    }

    /// `-` in the SQN row means "not needed".
    pub fn as_bool(self) -> Option<bool> {
        match self {
            Cell::Yes => Some(true),
            Cell::No | Cell::NotApplicable => Some(false),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReferenceColumn {
    pub name: &'static str,
    pub cryptosystem: &'static str,
    pub subscriber_management: &'static str,
    pub identity_protection: Cell,
    pub cellular_wlan_interworking: Cell,
    pub mitm_resistant: Cell,
    pub replay_resistant: Cell,
    pub pfs: Cell,
    pub needs_sqn_sync: Cell,
}

impl ReferenceColumn {
    pub fn cell(&self, p: Property) -> Cell {
        match p {
            Property::IdentityProtection => self.identity_protection,
            Property::ReplayResistance => self.replay_resistant,
            Property::MitmResistance => self.mitm_resistant,
            Property::ForwardSecrecy => self.pfs,
            Property::NeedsSqnSync => self.needs_sqn_sync,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReferenceTable {
    pub columns: Vec<ReferenceColumn>,
}

impl ReferenceTable {
    pub fn column(&self, name: &str) -> Option<&ReferenceColumn> {
        self.columns.iter().find(|c| c.name == name)
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = write!(out, "{:<42}", "");
        for c in &self.columns {
            let _ = write!(out, "{:<28}", c.name);
        }
        let _ = writeln!(out);
        type Row = (&'static str, fn(&ReferenceColumn) -> String);
        let rows: [Row; 8] = [
            ("Type of cryptosystem", |c| c.cryptosystem.to_string()),
            ("Subscriber management", |c| c.subscriber_management.to_string()),
            ("Protection of user identity (IMSI)", |c| c.identity_protection.symbol().into()),
            ("Cellular-WLAN interworking", |c| c.cellular_wlan_interworking.symbol().into()),
            ("Secure against man-in-the-middle", |c| c.mitm_resistant.symbol().into()),
            ("Secure against replay", |c| c.replay_resistant.symbol().into()),
            ("Provide PFS", |c| c.pfs.symbol().into()),
            ("Need for SQN synchronization", |c| c.needs_sqn_sync.symbol().into()),
        ];
        for (label, f) in rows {
            let _ = write!(out, "{label:<42}");
            for c in &self.columns {
                let _ = write!(out, "{:<28}", f(c));
            }
            let _ = writeln!(out);
        }
        out
    }
}

pub fn reference_table() -> ReferenceTable {
    use Cell::*;
    let col = |name, cryptosystem, subscriber_management, cells: [Cell; 6]| ReferenceColumn {
        name,
        cryptosystem,
        subscriber_management,
        identity_protection: cells[0],
        cellular_wlan_interworking: cells[1],
        mitm_resistant: cells[2],
        replay_resistant: cells[3],
        pfs: cells[4],
        needs_sqn_sync: cells[5],
    };
    ReferenceTable {
        columns: vec![
            col(PROPOSED, "Symmetric and ECDH", "Cellular Network Provider", [Yes, Yes, Yes, Yes, Yes, NotApplicable]),
            col(EAP_AKA, "Symmetric", "Cellular Network Provider", [No, Yes, No, Yes, No, Yes]),
            col(EAP_SIM, "Symmetric", "Cellular Network Provider", [No, Yes, No, Yes, No, NotApplicable]),
            col(EAP_TLS, "Public (Certificate)", "WLAN Provider", [No, No, Yes, Yes, No, NotApplicable]),
            col(EAP_TTLS, "Public (Certificate)", "WLAN Provider", [Yes, No, No, Yes, No, NotApplicable]),
        ],
    }
}
