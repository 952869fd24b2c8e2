//! Network templates for the three coupling schemes, and static routing.
//!
//! Shared by all modes: an Internet side (router, switch, FTP/HTTP/MM
//! servers, billing), a UMTS side (UEs, Node B, RNC, SGSN, GGSN, HLR) and
//! a WLAN cell (workstations, AP, AAA server with a line to the HLR).
//! What differs is how the AP reaches the rest of the world:
//!
//! * loose:  AP → access router → Internet; the AAA hangs off the router
//! * tight:  AP → APGW → SGSN → GGSN → Internet; the AAA hangs off the APGW
//! * hybrid: AP → APGW with uplinks to both the SGSN and an access router;
//!   expedited traffic takes the SGSN, best effort the router.

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use super::scenario::Scenario;
use super::NetsimError;

pub type NodeId = usize;
pub type LinkId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CouplingMode {
    Loose,
    Tight,
    Hybrid,
}

impl CouplingMode {
    pub const ALL: [CouplingMode; 3] = [CouplingMode::Loose, CouplingMode::Tight, CouplingMode::Hybrid];

    pub fn name(self) -> &'static str {
        match self {
            CouplingMode::Loose => "loose",
            CouplingMode::Tight => "tight",
            CouplingMode::Hybrid => "hybrid",
        }
    }
}

impl fmt::Display for CouplingMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CouplingMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "loose" => Ok(CouplingMode::Loose),
            "tight" => Ok(CouplingMode::Tight),
            "hybrid" => Ok(CouplingMode::Hybrid),
            _ => Err("expected `loose`, `tight` or `hybrid`".into()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NodeKind {
    Workstation,
    WlanAp,
    Apgw,
    AccessRouter,
    NodeB,
    Rnc,
    Sgsn,
    Ggsn,
    AaaServer,
    HlrHss,
    FtpServer,
    HttpServer,
    MmServer,
    BillingSystem,
    InternetRouter,
    Switch,
}

impl NodeKind {
    /// End systems never forward other nodes' traffic.
    pub fn is_host(self) -> bool {
        matches!(
            self,
            NodeKind::Workstation
                | NodeKind::AaaServer
                | NodeKind::HlrHss
                | NodeKind::FtpServer
                | NodeKind::HttpServer
                | NodeKind::MmServer
                | NodeKind::BillingSystem
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Medium {
    Wired,
    /// Shared half-duplex 802.11 channel of one cell.
    Wlan,
    /// UMTS radio between a UE and its Node B.
    UmtsRadio,
}

#[derive(Debug, Clone)]
pub struct Node {
    pub id: NodeId,
    pub kind: NodeKind,
    pub name: String,
    pub links: Vec<LinkId>,
}

#[derive(Debug, Clone)]
pub struct Link {
    pub id: LinkId,
    pub a: NodeId,
    pub b: NodeId,
    pub bandwidth_bps: f64,
    pub delay_s: f64,
    pub queue_bytes: u64,
    pub medium: Medium,
}

impl Link {
    pub fn other(&self, n: NodeId) -> NodeId {
        if n == self.a {
            self.b
        } else {
            self.a
        }
    }

    pub fn touches(&self, n: NodeId) -> bool {
        self.a == n || self.b == n
    }
}

/// Service class carried in the IP header.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Dscp {
    /// Expedited forwarding: real-time traffic.
    Ef,
    /// Best effort.
    Be,
}

impl Dscp {
    fn index(self) -> usize {
        match self {
            Dscp::Ef => 0,
            Dscp::Be => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Hop {
    Forward(LinkId),
    Deliver,
    NoRoute,
}

#[derive(Debug, Clone)]
pub struct Network {
    pub mode: CouplingMode,
    pub nodes: Vec<Node>,
    pub links: Vec<Link>,
    pub wlan_workstations: Vec<NodeId>,
    pub umts_workstations: Vec<NodeId>,
    pub ap: NodeId,
    pub apgw: Option<NodeId>,
    pub access_router: Option<NodeId>,
    pub aaa: NodeId,
    pub hlr: NodeId,
    pub node_b: NodeId,
    pub rnc: NodeId,
    pub sgsn: NodeId,
    pub ggsn: NodeId,
    pub internet: NodeId,
    pub switch: NodeId,
    pub ftp: NodeId,
    pub http: NodeId,
    pub mm: NodeId,
    pub billing: NodeId,
    /// `next[class][node][dst]`
    next: [Vec<Vec<Option<LinkId>>>; 2],
}

/// Workstation counts above this are rejected as malformed.
pub const MAX_WORKSTATIONS: usize = 1000;

struct Builder {
    nodes: Vec<Node>,
    links: Vec<Link>,
}

impl Builder {
    fn node(&mut self, kind: NodeKind, name: impl Into<String>) -> NodeId {
        let id = self.nodes.len();
        self.nodes.push(Node { id, kind, name: name.into(), links: Vec::new() });
        id
    }

    fn link(&mut self, a: NodeId, b: NodeId, bandwidth_bps: f64, delay_s: f64, queue_bytes: u64, medium: Medium) -> LinkId {
        let id = self.links.len();
        self.links.push(Link { id, a, b, bandwidth_bps, delay_s, queue_bytes, medium });
        self.nodes[a].links.push(id);
        self.nodes[b].links.push(id);
        id
    }
}

pub fn build_topology(mode: CouplingMode, scenario: &Scenario) -> Result<Network, NetsimError> {
    let t = &scenario.topology;
    for (name, n) in [("wlan", t.wlan_workstations), ("umts", t.umts_workstations)] {
        if n == 0 || n > MAX_WORKSTATIONS {
            return Err(NetsimError::InvalidScenario(format!(
                "topology.{name}_workstations must be within 1..={MAX_WORKSTATIONS}, got {n}"
            )));
        }
    }
    let l = &scenario.links;
    let mut b = Builder { nodes: Vec::new(), links: Vec::new() };
    let core = |b: &mut Builder, x: NodeId, y: NodeId| {
        let at_sgsn = [x, y].iter().any(|&n| b.nodes[n].kind == NodeKind::Sgsn);
        let bw = if at_sgsn { l.sgsn_bps } else { l.core_bps };
        b.link(x, y, bw, l.core_delay_s, l.wired_queue_bytes, Medium::Wired)
    };

    let internet = b.node(NodeKind::InternetRouter, "internet-router");
    let switch = b.node(NodeKind::Switch, "switch");
    let ftp = b.node(NodeKind::FtpServer, "ftp-server");
    let http = b.node(NodeKind::HttpServer, "http-server");
    let mm = b.node(NodeKind::MmServer, "mm-server");
    let billing = b.node(NodeKind::BillingSystem, "billing");
    core(&mut b, internet, switch);
    for s in [ftp, http, mm, billing] {
        core(&mut b, switch, s);
    }

    let ggsn = b.node(NodeKind::Ggsn, "ggsn");
    let sgsn = b.node(NodeKind::Sgsn, "sgsn");
    let rnc = b.node(NodeKind::Rnc, "rnc");
    let node_b = b.node(NodeKind::NodeB, "node-b");
    let hlr = b.node(NodeKind::HlrHss, "hlr");
    core(&mut b, ggsn, internet);
    core(&mut b, sgsn, ggsn);
    core(&mut b, rnc, sgsn);
    core(&mut b, node_b, rnc);
    core(&mut b, hlr, sgsn);
    let mut umts_workstations = Vec::new();
    for i in 0..t.umts_workstations {
        let ue = b.node(NodeKind::Workstation, format!("umts-ws-{i}"));
        b.link(ue, node_b, l.umts_bps, l.umts_delay_s, l.radio_queue_bytes, Medium::UmtsRadio);
        umts_workstations.push(ue);
    }

    let ap = b.node(NodeKind::WlanAp, "wlan-ap");
    let aaa = b.node(NodeKind::AaaServer, "aaa");
    let mut wlan_workstations = Vec::new();
    for i in 0..t.wlan_workstations {
        let ws = b.node(NodeKind::Workstation, format!("wlan-ws-{i}"));
        b.link(ws, ap, l.wlan_bps, l.wlan_delay_s, l.radio_queue_bytes, Medium::Wlan);
        wlan_workstations.push(ws);
    }

    let (apgw, access_router) = match mode {
        CouplingMode::Loose => {
            let ar = b.node(NodeKind::AccessRouter, "access-router");
            core(&mut b, ap, ar);
            core(&mut b, ar, internet);
            core(&mut b, aaa, ar);
            (None, Some(ar))
        }
        CouplingMode::Tight => {
            let gw = b.node(NodeKind::Apgw, "apgw");
            core(&mut b, ap, gw);
            core(&mut b, gw, sgsn);
            core(&mut b, aaa, gw);
            (Some(gw), None)
        }
        CouplingMode::Hybrid => {
            let gw = b.node(NodeKind::Apgw, "apgw");
            let ar = b.node(NodeKind::AccessRouter, "access-router");
            core(&mut b, ap, gw);
            core(&mut b, gw, sgsn);
            core(&mut b, gw, ar);
            core(&mut b, ar, internet);
            core(&mut b, aaa, ar);
            (Some(gw), Some(ar))
        }
    };
    // the AAA-HSS channel every mode relies on
    core(&mut b, aaa, hlr);

    let mut net = Network {
        mode,
        nodes: b.nodes,
        links: b.links,
        wlan_workstations,
        umts_workstations,
        ap,
        apgw,
        access_router,
        aaa,
        hlr,
        node_b,
        rnc,
        sgsn,
        ggsn,
        internet,
        switch,
        ftp,
        http,
        mm,
        billing,
        next: [Vec::new(), Vec::new()],
    };
    for class in [Dscp::Ef, Dscp::Be] {
        net.next[class.index()] = net.shortest_paths(class);
    }
    Ok(net)
}

impl Network {
    pub fn kind(&self, n: NodeId) -> NodeKind {
        self.nodes[n].kind
    }

    /// Links from the APGW towards the SGSN or an access router.
    pub fn apgw_uplinks(&self) -> Vec<LinkId> {
        let Some(gw) = self.apgw else { return Vec::new() };
        self.nodes[gw]
            .links
            .iter()
            .copied()
            .filter(|&l| matches!(self.kind(self.links[l].other(gw)), NodeKind::Sgsn | NodeKind::AccessRouter))
            .collect()
    }

    pub fn link_between(&self, a: NodeId, b: NodeId) -> Option<LinkId> {
        self.nodes[a].links.iter().copied().find(|&l| self.links[l].other(a) == b)
    }

    /// Whether packets of `class` may use `link` at all. In hybrid mode
    /// the APGW's SGSN uplink is reserved for expedited traffic and its
    /// router uplink for best effort; everything else is unrestricted.
    fn permits(&self, class: Dscp, link: LinkId) -> bool {
        if self.mode != CouplingMode::Hybrid {
            return true;
        }
        let Some(gw) = self.apgw else { return true };
        let l = &self.links[link];
        if !l.touches(gw) {
            return true;
        }
        match self.kind(l.other(gw)) {
            NodeKind::Sgsn => class == Dscp::Ef,
            NodeKind::AccessRouter => class == Dscp::Be,
            _ => true,
        }
    }

    /// Hop-count shortest paths to every destination; among equally short
    /// next hops the lowest link id wins. Hosts are never transit nodes.
    fn shortest_paths(&self, class: Dscp) -> Vec<Vec<Option<LinkId>>> {
        let n = self.nodes.len();
        let mut next = vec![vec![None; n]; n];
        for dst in 0..n {
            let mut dist = vec![usize::MAX; n];
            dist[dst] = 0;
            let mut queue = VecDeque::from([dst]);
            while let Some(v) = queue.pop_front() {
                if v != dst && self.kind(v).is_host() {
                    continue;
                }
                for &l in &self.nodes[v].links {
                    if !self.permits(class, l) {
                        continue;
                    }
                    let u = self.links[l].other(v);
                    if dist[u] == usize::MAX {
                        dist[u] = dist[v] + 1;
                        queue.push_back(u);
                    }
                }
            }
            for u in 0..n {
                if u == dst || dist[u] == usize::MAX {
                    continue;
                }
                next[u][dst] = self.nodes[u]
                    .links
                    .iter()
                    .copied()
                    .filter(|&l| self.permits(class, l))
                    .filter(|&l| {
                        let v = self.links[l].other(u);
                        dist[v] != usize::MAX
                            && dist[v] + 1 == dist[u]
                            && (v == dst || !self.kind(v).is_host())
                    })
                    .min();
            }
        }
        next
    }

    /// Next step for a packet of `class` bound for `dst`, sitting at `at`.
    pub fn route(&self, at: NodeId, dst: NodeId, class: Dscp) -> Hop {
        if at == dst {
            return Hop::Deliver;
        }
        match self.next[class.index()][at][dst] {
            Some(l) => Hop::Forward(l),
            None => Hop::NoRoute,
        }
    }

    /// Full node path from `src` to `dst`, if one exists.
    pub fn path(&self, src: NodeId, dst: NodeId, class: Dscp) -> Option<Vec<NodeId>> {
        let mut path = vec![src];
        let mut at = src;
        while at != dst {
            match self.route(at, dst, class) {
                Hop::Forward(l) => at = self.links[l].other(at),
                Hop::Deliver => break,
                Hop::NoRoute => return None,
            }
            path.push(at);
            if path.len() > self.nodes.len() {
                return None;
            }
        }
        Some(path)
    }

    pub fn count(&self, kind: NodeKind) -> usize {
        self.nodes.iter().filter(|n| n.kind == kind).count()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn net(mode: CouplingMode) -> Network {
        build_topology(mode, &Scenario::default()).unwrap()
    }

    fn kinds(n: &Network, path: &[NodeId]) -> Vec<NodeKind> {
        path.iter().map(|&x| n.kind(x)).collect()
    }

    #[test]
    fn hybrid_gateway_has_two_uplinks() {
        let n = net(CouplingMode::Hybrid);
        let up = n.apgw_uplinks();
        assert_eq!(up.len(), 2);
        let ends: Vec<_> = up.iter().map(|&l| n.kind(n.links[l].other(n.apgw.unwrap()))).collect();
        assert!(ends.contains(&NodeKind::Sgsn) && ends.contains(&NodeKind::AccessRouter));
        assert_eq!(net(CouplingMode::Tight).apgw_uplinks().len(), 1);
    }

    #[test]
    fn twenty_workstations_by_default() {
        for m in CouplingMode::ALL {
            let n = net(m);
            assert_eq!(n.count(NodeKind::Workstation), 20);
            assert_eq!(n.wlan_workstations.len() + n.umts_workstations.len(), 20);
        }
    }

    #[test]
    fn structural_differences() {
        let t = net(CouplingMode::Tight);
        assert_eq!(t.count(NodeKind::AccessRouter), 0);
        assert_eq!(t.count(NodeKind::Apgw), 1);
        let l = net(CouplingMode::Loose);
        assert_eq!(l.count(NodeKind::Apgw), 0);
        assert!(l.link_between(l.aaa, l.hlr).is_some());
    }

    #[test]
    fn bad_counts_are_rejected() {
        let mut s = Scenario::default();
        s.topology.wlan_workstations = 0;
        assert!(matches!(build_topology(CouplingMode::Hybrid, &s), Err(NetsimError::InvalidScenario(_))));
        s.topology.wlan_workstations = MAX_WORKSTATIONS + 1;
        assert!(build_topology(CouplingMode::Hybrid, &s).is_err());
    }

    #[test]
    fn hybrid_splits_by_class_in_both_directions() {
        use NodeKind::*;
        let n = net(CouplingMode::Hybrid);
        let ws = n.wlan_workstations[0];
        let up_ef = n.path(ws, n.mm, Dscp::Ef).unwrap();
        assert_eq!(kinds(&n, &up_ef), [Workstation, WlanAp, Apgw, Sgsn, Ggsn, InternetRouter, Switch, MmServer]);
        let down_ef = n.path(n.mm, ws, Dscp::Ef).unwrap();
        assert!(down_ef.contains(&n.sgsn) && !down_ef.contains(&n.access_router.unwrap()));
        let up_be = n.path(ws, n.ftp, Dscp::Be).unwrap();
        assert_eq!(kinds(&n, &up_be), [Workstation, WlanAp, Apgw, AccessRouter, InternetRouter, Switch, FtpServer]);
        let down_be = n.path(n.ftp, ws, Dscp::Be).unwrap();
        assert!(!down_be.contains(&n.sgsn) && down_be.contains(&n.access_router.unwrap()));
        // the gateway's own decision
        let gw = n.apgw.unwrap();
        let Hop::Forward(l) = n.route(gw, n.mm, Dscp::Ef) else { panic!() };
        assert_eq!(n.links[l].other(gw), n.sgsn);
        let Hop::Forward(l) = n.route(gw, n.ftp, Dscp::Be) else { panic!() };
        assert_eq!(n.links[l].other(gw), n.access_router.unwrap());
    }

    #[test]
    fn tight_sends_everything_through_the_core() {
        let n = net(CouplingMode::Tight);
        let ws = n.wlan_workstations[3];
        let gw = n.apgw.unwrap();
        for class in [Dscp::Ef, Dscp::Be] {
            let Hop::Forward(l) = n.route(gw, n.http, class) else { panic!() };
            assert_eq!(n.links[l].other(gw), n.sgsn);
            assert!(n.path(ws, n.http, class).unwrap().contains(&n.ggsn));
        }
    }

    #[test]
    fn loose_bypasses_the_core() {
        let n = net(CouplingMode::Loose);
        let p = n.path(n.wlan_workstations[0], n.mm, Dscp::Ef).unwrap();
        assert!(!p.contains(&n.sgsn) && p.contains(&n.access_router.unwrap()));
    }

    #[test]
    fn hosts_are_not_transit() {
        for m in CouplingMode::ALL {
            let n = net(m);
            for class in [Dscp::Ef, Dscp::Be] {
                for src in 0..n.nodes.len() {
                    for dst in 0..n.nodes.len() {
                        let p = n.path(src, dst, class).unwrap_or_else(|| panic!("{m}: no path {src}->{dst}"));
                        for &mid in p.iter().skip(1).take(p.len().saturating_sub(2)) {
                            assert!(!n.kind(mid).is_host(), "{m}: {src}->{dst} via host {mid}");
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn wlan_auth_reaches_the_hlr_through_the_aaa() {
        for m in CouplingMode::ALL {
            let n = net(m);
            assert_eq!(n.path(n.aaa, n.hlr, Dscp::Be).unwrap(), [n.aaa, n.hlr]);
            assert!(n.path(n.wlan_workstations[0], n.aaa, Dscp::Be).is_some());
            let umts = n.path(n.umts_workstations[0], n.sgsn, Dscp::Be).unwrap();
            assert_eq!(kinds(&n, &umts), [NodeKind::Workstation, NodeKind::NodeB, NodeKind::Rnc, NodeKind::Sgsn]);
        }
    }
}
