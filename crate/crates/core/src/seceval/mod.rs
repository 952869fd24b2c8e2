//! Adversary harness that turns attack runs into a security-property
//! matrix, plus the published comparison table as reference data.
//!
//! Every verdict for the two implemented protocols comes from executed
//! attacks; a property holds only if it holds on every seed.

mod attacks;
mod table;

pub use attacks::{
    run_attack, run_attack_detailed, AdversaryModel, AttackOutcome, AttackRun, AttackScenario,
    Capability, Secret,
};
pub use table::{reference_table, Cell, ReferenceColumn, ReferenceTable};

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::sync::Arc;

use crate::crypto::CurveParams;
use crate::protocol::Protocol;

/// Seeds per scenario when none are given.
pub const DEFAULT_SEEDS: u64 = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Property {
    IdentityProtection,
    ReplayResistance,
    MitmResistance,
    ForwardSecrecy,
    NeedsSqnSync,
}

impl Property {
    pub const ALL: [Property; 5] = [
        Property::IdentityProtection,
        Property::ReplayResistance,
        Property::MitmResistance,
        Property::ForwardSecrecy,
        Property::NeedsSqnSync,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Property::IdentityProtection => "identity_protection",
            Property::ReplayResistance => "replay_resistant",
            Property::MitmResistance => "mitm_resistant",
            Property::ForwardSecrecy => "pfs",
            Property::NeedsSqnSync => "needs_sqn_sync",
        }
    }

    pub fn scenario(self) -> AttackScenario {
        match self {
            Property::IdentityProtection => AttackScenario::IdentityCatch,
            Property::ReplayResistance => AttackScenario::ReplayChallenge,
            Property::MitmResistance => AttackScenario::RelaySubstitute,
            Property::ForwardSecrecy => AttackScenario::KeyCompromisePfs,
            Property::NeedsSqnSync => AttackScenario::SqnDesyncCost,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PropertyReport {
    pub protocol: Protocol,
    pub identity_protection: bool,
    pub replay_resistant: bool,
    pub mitm_resistant: bool,
    pub pfs: bool,
    pub needs_sqn_sync: bool,
    pub seeds: u64,
    /// Seeds on which the run supported the reported verdict.
    pub seeds_passed: BTreeMap<Property, u64>,
    /// Outcome histogram per property.
    pub outcomes: BTreeMap<Property, BTreeMap<String, u64>>,
    /// One representative transcript excerpt per property.
    pub evidence: BTreeMap<Property, String>,
}

impl PropertyReport {
    pub fn get(&self, p: Property) -> bool {
        match p {
            Property::IdentityProtection => self.identity_protection,
            Property::ReplayResistance => self.replay_resistant,
            Property::MitmResistance => self.mitm_resistant,
            Property::ForwardSecrecy => self.pfs,
            Property::NeedsSqnSync => self.needs_sqn_sync,
        }
    }

    /// Matches the reference column on every boolean row.
    pub fn matches(&self, col: &ReferenceColumn) -> bool {
        Property::ALL.iter().all(|&p| col.cell(p).as_bool() == Some(self.get(p)))
    }
}

pub fn evaluate_matrix(protocol: Protocol) -> PropertyReport {
    evaluate_matrix_with(protocol, 0..DEFAULT_SEEDS, &Arc::new(CurveParams::p256()))
}

pub fn evaluate_matrix_with(
    protocol: Protocol,
    seeds: impl IntoIterator<Item = u64> + Clone,
    curve: &Arc<CurveParams>,
) -> PropertyReport {
    let mut seeds_passed = BTreeMap::new();
    let mut outcomes: BTreeMap<Property, BTreeMap<String, u64>> = BTreeMap::new();
    let mut evidence = BTreeMap::new();
    let mut verdicts = BTreeMap::new();
    let mut n = 0;
    for p in Property::ALL {
        let runs: Vec<AttackRun> = seeds
            .clone()
            .into_iter()
            .map(|seed| run_attack_detailed(protocol, p.scenario(), seed, curve))
            .collect();
        n = runs.len() as u64;
        for r in &runs {
            *outcomes.entry(p).or_default().entry(r.outcome.to_string()).or_default() += 1;
        }
        let holds = |r: &AttackRun| match p {
            Property::IdentityProtection | Property::ForwardSecrecy => r.outcome == AttackOutcome::NoEffect,
            Property::ReplayResistance | Property::MitmResistance => {
                matches!(r.outcome, AttackOutcome::Detected | AttackOutcome::NoEffect)
            }
            Property::NeedsSqnSync => r.auts_seen,
        };
        let passed = runs.iter().filter(|r| holds(r)).count() as u64;
        let verdict = match p {
            // existential: one desync that needs AT_AUTS suffices
            Property::NeedsSqnSync => passed > 0,
            _ => !runs.is_empty() && passed == n,
        };
        verdicts.insert(p, verdict);
        seeds_passed.insert(p, if verdict { passed } else { n - passed });
        // evidence from a run that agrees with the verdict
        let rep = runs.iter().find(|r| holds(r) == verdict).or(runs.first());
        evidence.insert(p, rep.map(|r| format!("[{}] {}", r.outcome, r.evidence)).unwrap_or_default());
    }
    PropertyReport {
        protocol,
        identity_protection: verdicts[&Property::IdentityProtection],
        replay_resistant: verdicts[&Property::ReplayResistance],
        mitm_resistant: verdicts[&Property::MitmResistance],
        pfs: verdicts[&Property::ForwardSecrecy],
        needs_sqn_sync: verdicts[&Property::NeedsSqnSync],
        seeds: n,
        seeds_passed,
        outcomes,
        evidence,
    }
}

fn column_name(p: Protocol) -> &'static str {
    match p {
        Protocol::Aka => table::EAP_AKA,
        Protocol::EcdhAka => table::PROPOSED,
    }
}

/// Reference-table cell a measured verdict maps to.
pub fn verdict_cell(p: Property, value: bool) -> Cell {
    match (p, value) {
        (Property::NeedsSqnSync, false) => Cell::NotApplicable,
        (_, true) => Cell::Yes,
        (_, false) => Cell::No,
    }
}

/// Human-readable report covering both protocols and the reference table.
pub fn render_text(reports: &[PropertyReport], table: &ReferenceTable) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "Security property matrix (measured)\n");
    let _ = write!(out, "{:<22}", "property");
    for r in reports {
        let _ = write!(out, "{:>22}", r.protocol.name());
    }
    let _ = writeln!(out);
    for p in Property::ALL {
        let _ = write!(out, "{:<22}", p.name());
        for r in reports {
            let cell = verdict_cell(p, r.get(p));
            let _ = write!(out, "{:>22}", format!("{} ({}/{})", cell.symbol(), r.seeds_passed[&p], r.seeds));
        }
        let _ = writeln!(out);
    }
    let _ = writeln!(out);
    for r in reports {
        let col = table.column(column_name(r.protocol)).expect("implemented column present");
        let _ = writeln!(
            out,
            "{} vs reference column \"{}\": {}",
            r.protocol.name(),
            col.name,
            if r.matches(col) { "MATCH" } else { "MISMATCH" }
        );
        for p in Property::ALL {
            let hist: Vec<String> = r.outcomes[&p].iter().map(|(k, v)| format!("{k}×{v}")).collect();
            let _ = writeln!(out, "  {:<20} outcomes: {}", p.name(), hist.join(", "));
            let _ = writeln!(out, "  {:<20} evidence: {}", "", r.evidence[&p]);
        }
        let _ = writeln!(out);
    }
    let _ = writeln!(out, "Reference table\n");
    out.push_str(&table.render());
    out
}

/// `protocol,property,verdict,seeds_passed`
pub fn render_csv(reports: &[PropertyReport]) -> String {
    let mut out = String::from("protocol,property,verdict,seeds_passed\n");
    for r in reports {
        for p in Property::ALL {
            let _ = writeln!(
                out,
                "{},{},{},{}",
                r.protocol.name(),
                p.name(),
                verdict_cell(p, r.get(p)).word(),
                r.seeds_passed[&p]
            );
        }
    }
    out
}

/// Measured reports agree with the reference table for both protocols.
pub fn matches_reference(reports: &[PropertyReport], table: &ReferenceTable) -> bool {
    reports.iter().all(|r| table.column(column_name(r.protocol)).is_some_and(|c| r.matches(c)))
}
