//! Coupled power/communication network model and the damage overlay.
//!
//! Elements are identified by opaque string ids and stored sorted by id, so
//! every iteration order in the crate is deterministic. Parallel lines and
//! parallel links are allowed.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use crate::error::NetError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SourceCaps {
    pub p_max_kw: f64,
    pub q_max_kvar: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Bus {
    pub id: String,
    pub p_load_kw: f64,
    pub q_load_kvar: f64,
    pub load_weight: f64,
    /// Without a load switch the load is connected whenever the bus is live.
    pub has_load_switch: bool,
    pub source: Option<SourceCaps>,
}

impl Bus {
    pub fn has_source(&self) -> bool {
        self.source.is_some()
    }

    pub fn weighted_load(&self) -> f64 {
        self.p_load_kw * self.load_weight
    }
}

/// A line oriented `from_bus -> to_bus`; positive flow leaves `from_bus`.
#[derive(Debug, Clone, PartialEq)]
pub struct Line {
    pub id: String,
    pub from_bus: String,
    pub to_bus: String,
    pub r_ohm: f64,
    pub x_ohm: f64,
    pub p_max_kw: f64,
    pub q_max_kvar: f64,
    pub switch_at_from: bool,
    pub switch_at_to: bool,
}

impl Line {
    /// Lines without any automated switch cannot be operated remotely.
    pub fn is_controllable(&self) -> bool {
        self.switch_at_from || self.switch_at_to
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TerminalSpec {
    pub attached_bus: String,
    pub required_bandwidth_mbps: f64,
    pub delay_cap_ms: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum NodeKind {
    Terminal(TerminalSpec),
    Forwarder,
    Center,
}

impl NodeKind {
    pub fn label(&self) -> &'static str {
        match self {
            NodeKind::Terminal(_) => "terminal",
            NodeKind::Forwarder => "forwarder",
            NodeKind::Center => "center",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CommNode {
    pub id: String,
    pub kind: NodeKind,
    pub bandwidth_cap_mbps: f64,
    pub forward_delay_ms: f64,
}

impl CommNode {
    pub fn terminal(&self) -> Option<&TerminalSpec> {
        match &self.kind {
            NodeKind::Terminal(t) => Some(t),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CommLink {
    pub id: String,
    pub end_a: String,
    pub end_b: String,
    pub bandwidth_cap_mbps: f64,
    pub prop_delay_ms: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct PowerNetwork {
    pub buses: Vec<Bus>,
    pub lines: Vec<Line>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct CommNetwork {
    pub nodes: Vec<CommNode>,
    pub links: Vec<CommLink>,
}

/// Equipment states and initial operating state for one disaster case.
///
/// All maps should be total over their element sets; [`validate`] reports
/// gaps. Lookups of missing keys fall back to "working" / "open".
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Scenario {
    pub bus_ok: BTreeMap<String, bool>,
    pub line_ok: BTreeMap<String, bool>,
    pub node_ok: BTreeMap<String, bool>,
    pub link_ok: BTreeMap<String, bool>,
    pub line_initial: BTreeMap<String, bool>,
    pub load_initial: BTreeMap<String, bool>,
}

impl Scenario {
    /// Everything working, every line and load switch open.
    pub fn intact(net: &CoupledNetwork) -> Self {
        let all = |ids: Vec<&str>, v: bool| ids.into_iter().map(|s| (s.to_string(), v)).collect();
        Scenario {
            bus_ok: all(
                net.power.buses.iter().map(|b| b.id.as_str()).collect(),
                true,
            ),
            line_ok: all(
                net.power.lines.iter().map(|l| l.id.as_str()).collect(),
                true,
            ),
            node_ok: all(net.comm.nodes.iter().map(|n| n.id.as_str()).collect(), true),
            link_ok: all(net.comm.links.iter().map(|l| l.id.as_str()).collect(), true),
            line_initial: all(
                net.power.lines.iter().map(|l| l.id.as_str()).collect(),
                false,
            ),
            load_initial: all(
                net.power.buses.iter().map(|b| b.id.as_str()).collect(),
                false,
            ),
        }
    }

    pub fn bus_ok(&self, id: &str) -> bool {
        self.bus_ok.get(id).copied().unwrap_or(true)
    }

    pub fn line_ok(&self, id: &str) -> bool {
        self.line_ok.get(id).copied().unwrap_or(true)
    }

    pub fn node_ok(&self, id: &str) -> bool {
        self.node_ok.get(id).copied().unwrap_or(true)
    }

    pub fn link_ok(&self, id: &str) -> bool {
        self.link_ok.get(id).copied().unwrap_or(true)
    }

    pub fn line_closed_initially(&self, id: &str) -> bool {
        self.line_initial.get(id).copied().unwrap_or(false)
    }

    pub fn load_closed_initially(&self, id: &str) -> bool {
        self.load_initial.get(id).copied().unwrap_or(false)
    }
}

/// Power and communication networks with incidence caches.
///
/// Construction sorts every element list by id; indices used throughout the
/// crate refer to these sorted positions. Malformed references (unknown bus
/// ids and the like) are tolerated here and reported by [`validate`].
#[derive(Debug, Clone)]
pub struct CoupledNetwork {
    pub power: PowerNetwork,
    pub comm: CommNetwork,
    bus_index: HashMap<String, usize>,
    line_index: HashMap<String, usize>,
    node_index: HashMap<String, usize>,
    link_index: HashMap<String, usize>,
    /// Per bus: (line index, +1 if the bus is the from end, -1 if the to end).
    lines_at_bus: Vec<Vec<(usize, i8)>>,
    links_at_node: Vec<Vec<usize>>,
    terminal_of_bus: HashMap<usize, usize>,
    terminals: Vec<usize>,
    center: Option<usize>,
}

fn index_of<T>(items: &[T], id: impl Fn(&T) -> &str) -> HashMap<String, usize> {
    let mut map = HashMap::new();
    for (i, it) in items.iter().enumerate() {
        map.entry(id(it).to_string()).or_insert(i);
    }
    map
}

impl CoupledNetwork {
    pub fn new(mut power: PowerNetwork, mut comm: CommNetwork) -> Self {
        power.buses.sort_by(|a, b| a.id.cmp(&b.id));
        power.lines.sort_by(|a, b| a.id.cmp(&b.id));
        comm.nodes.sort_by(|a, b| a.id.cmp(&b.id));
        comm.links.sort_by(|a, b| a.id.cmp(&b.id));
        let bus_index = index_of(&power.buses, |b| &b.id);
        let line_index = index_of(&power.lines, |l| &l.id);
        let node_index = index_of(&comm.nodes, |n| &n.id);
        let link_index = index_of(&comm.links, |l| &l.id);

        let mut lines_at_bus = vec![Vec::new(); power.buses.len()];
        for (k, l) in power.lines.iter().enumerate() {
            if let Some(&i) = bus_index.get(&l.from_bus) {
                lines_at_bus[i].push((k, 1));
            }
            if let Some(&j) = bus_index.get(&l.to_bus) {
                lines_at_bus[j].push((k, -1));
            }
        }
        let mut links_at_node = vec![Vec::new(); comm.nodes.len()];
        for (l, link) in comm.links.iter().enumerate() {
            if let Some(&a) = node_index.get(&link.end_a) {
                links_at_node[a].push(l);
            }
            if let Some(&b) = node_index.get(&link.end_b) {
                if link.end_b != link.end_a {
                    links_at_node[b].push(l);
                }
            }
        }
        let mut terminal_of_bus = HashMap::new();
        let mut terminals = Vec::new();
        let mut center = None;
        for (m, node) in comm.nodes.iter().enumerate() {
            match &node.kind {
                NodeKind::Terminal(t) => {
                    terminals.push(m);
                    if let Some(&b) = bus_index.get(&t.attached_bus) {
                        terminal_of_bus.entry(b).or_insert(m);
                    }
                }
                NodeKind::Center => {
                    center.get_or_insert(m);
                }
                NodeKind::Forwarder => {}
            }
        }
        CoupledNetwork {
            power,
            comm,
            bus_index,
            line_index,
            node_index,
            link_index,
            lines_at_bus,
            links_at_node,
            terminal_of_bus,
            terminals,
            center,
        }
    }

    pub fn bus(&self, i: usize) -> &Bus {
        &self.power.buses[i]
    }

    pub fn line(&self, k: usize) -> &Line {
        &self.power.lines[k]
    }

    pub fn node(&self, m: usize) -> &CommNode {
        &self.comm.nodes[m]
    }

    pub fn link(&self, l: usize) -> &CommLink {
        &self.comm.links[l]
    }

    pub fn bus_idx(&self, id: &str) -> Option<usize> {
        self.bus_index.get(id).copied()
    }

    pub fn line_idx(&self, id: &str) -> Option<usize> {
        self.line_index.get(id).copied()
    }

    pub fn node_idx(&self, id: &str) -> Option<usize> {
        self.node_index.get(id).copied()
    }

    pub fn link_idx(&self, id: &str) -> Option<usize> {
        self.link_index.get(id).copied()
    }

    /// Bus indices of a line's (from, to) ends. Panics on unvalidated input.
    pub fn line_ends(&self, k: usize) -> (usize, usize) {
        let l = &self.power.lines[k];
        (self.bus_index[&l.from_bus], self.bus_index[&l.to_bus])
    }

    /// Node indices of a link's ends. Panics on unvalidated input.
    pub fn link_ends(&self, l: usize) -> (usize, usize) {
        let link = &self.comm.links[l];
        (self.node_index[&link.end_a], self.node_index[&link.end_b])
    }

    /// `(line index, direction)` pairs at bus index `i`, ordered by line id.
    pub fn lines_at(&self, i: usize) -> &[(usize, i8)] {
        &self.lines_at_bus[i]
    }

    /// Link indices at node index `m`, ordered by link id.
    pub fn links_at(&self, m: usize) -> &[usize] {
        &self.links_at_node[m]
    }

    /// Lines touching `bus` with their direction coefficient (+1 leaving the
    /// bus, -1 entering it), ordered by line id.
    pub fn incident_lines(&self, bus: &str) -> Result<Vec<(&Line, i8)>, NetError> {
        let i = self
            .bus_idx(bus)
            .ok_or_else(|| NetError::UnknownBus(bus.to_string()))?;
        Ok(self.lines_at_bus[i]
            .iter()
            .map(|&(k, mu)| (&self.power.lines[k], mu))
            .collect())
    }

    /// Links touching `node`, ordered by link id.
    pub fn incident_links(&self, node: &str) -> Result<Vec<&CommLink>, NetError> {
        let m = self
            .node_idx(node)
            .ok_or_else(|| NetError::UnknownNode(node.to_string()))?;
        Ok(self.links_at_node[m]
            .iter()
            .map(|&l| &self.comm.links[l])
            .collect())
    }

    /// Terminal node index monitoring bus index `i`.
    pub fn terminal_of(&self, i: usize) -> Option<usize> {
        self.terminal_of_bus.get(&i).copied()
    }

    /// Terminal node indices, ordered by id.
    pub fn terminals(&self) -> &[usize] {
        &self.terminals
    }

    pub fn center(&self) -> Option<usize> {
        self.center
    }

    pub fn source_buses(&self) -> impl Iterator<Item = usize> + '_ {
        self.power
            .buses
            .iter()
            .enumerate()
            .filter(|(_, b)| b.has_source())
            .map(|(i, _)| i)
    }

    pub fn is_forwarder(&self, m: usize) -> bool {
        matches!(self.comm.nodes[m].kind, NodeKind::Forwarder)
    }

    pub fn is_terminal(&self, m: usize) -> bool {
        matches!(self.comm.nodes[m].kind, NodeKind::Terminal(_))
    }

    /// Buses that carry a switch on any incident line or a load switch.
    pub fn monitored_buses(&self) -> BTreeSet<usize> {
        let mut out = BTreeSet::new();
        for (i, b) in self.power.buses.iter().enumerate() {
            if b.has_load_switch {
                out.insert(i);
            }
        }
        for l in &self.power.lines {
            if l.switch_at_from {
                if let Some(i) = self.bus_idx(&l.from_bus) {
                    out.insert(i);
                }
            }
            if l.switch_at_to {
                if let Some(j) = self.bus_idx(&l.to_bus) {
                    out.insert(j);
                }
            }
        }
        out
    }
}

/// One broken invariant found by [`validate`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Issue {
    pub element: String,
    pub message: String,
}

impl fmt::Display for Issue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.element, self.message)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub issues: Vec<Issue>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.issues.is_empty()
    }

    pub fn mentions(&self, needle: &str) -> bool {
        self.issues.iter().any(|i| i.message.contains(needle))
    }

    fn push(&mut self, element: impl Into<String>, message: impl Into<String>) {
        self.issues.push(Issue {
            element: element.into(),
            message: message.into(),
        });
    }
}

fn check_duplicates<'a>(
    report: &mut ValidationReport,
    what: &str,
    ids: impl Iterator<Item = &'a str>,
) {
    let mut seen = BTreeSet::new();
    for id in ids {
        if !seen.insert(id) {
            report.push(id, format!("duplicate {what} id"));
        }
    }
}

fn check_total<'a>(
    report: &mut ValidationReport,
    map_name: &str,
    map: &BTreeMap<String, bool>,
    ids: impl Iterator<Item = &'a str>,
) {
    let ids: BTreeSet<&str> = ids.collect();
    for id in &ids {
        if !map.contains_key(*id) {
            report.push(*id, format!("missing from scenario map {map_name}"));
        }
    }
    for key in map.keys() {
        if !ids.contains(key.as_str()) {
            report.push(
                key.clone(),
                format!("unknown element in scenario map {map_name}"),
            );
        }
    }
}

/// Lists every broken structural invariant of `net` and `sc`.
pub fn validate(net: &CoupledNetwork, sc: &Scenario) -> ValidationReport {
    let mut r = ValidationReport::default();
    let p = &net.power;
    let c = &net.comm;

    check_duplicates(&mut r, "bus", p.buses.iter().map(|b| b.id.as_str()));
    check_duplicates(&mut r, "line", p.lines.iter().map(|l| l.id.as_str()));
    check_duplicates(&mut r, "node", c.nodes.iter().map(|n| n.id.as_str()));
    check_duplicates(&mut r, "link", c.links.iter().map(|l| l.id.as_str()));

    for b in &p.buses {
        if !(b.p_load_kw >= 0.0 && b.q_load_kvar >= 0.0) {
            r.push(&b.id, "negative load");
        }
        if !(b.load_weight >= 0.0) {
            r.push(&b.id, "negative load weight");
        }
        if let Some(s) = &b.source {
            if !(s.p_max_kw >= 0.0 && s.q_max_kvar >= 0.0) {
                r.push(&b.id, "negative source capacity");
            }
        }
    }
    for l in &p.lines {
        if l.from_bus == l.to_bus {
            r.push(&l.id, "line is a self-loop");
        }
        for end in [&l.from_bus, &l.to_bus] {
            if net.bus_idx(end).is_none() {
                r.push(&l.id, format!("line references unknown bus {end}"));
            }
        }
        if !(l.r_ohm >= 0.0 && l.x_ohm >= 0.0) {
            r.push(&l.id, "negative impedance");
        }
        if !(l.p_max_kw > 0.0 && l.q_max_kvar > 0.0) {
            r.push(&l.id, "line capacity must be positive");
        }
    }

    let centers = c
        .nodes
        .iter()
        .filter(|n| matches!(n.kind, NodeKind::Center))
        .count();
    if centers == 0 {
        r.push("comm", "missing operation center");
    } else if centers > 1 {
        r.push("comm", "multiple operation centers");
    }
    let mut coupled: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for n in &c.nodes {
        if !(n.bandwidth_cap_mbps > 0.0) {
            r.push(&n.id, "bandwidth capacity must be positive");
        }
        if !(n.forward_delay_ms >= 0.0) {
            r.push(&n.id, "negative forwarding delay");
        }
        if let NodeKind::Terminal(t) = &n.kind {
            if net.bus_idx(&t.attached_bus).is_none() {
                r.push(
                    &n.id,
                    format!("dangling coupling to bus {}", t.attached_bus),
                );
            } else {
                coupled
                    .entry(t.attached_bus.as_str())
                    .or_default()
                    .push(&n.id);
            }
            if !(t.required_bandwidth_mbps >= 0.0) {
                r.push(&n.id, "negative required bandwidth");
            }
            if !(t.delay_cap_ms > 0.0) {
                r.push(&n.id, "delay cap must be positive");
            }
        }
    }
    for (bus, terms) in &coupled {
        if terms.len() > 1 {
            r.push(
                *bus,
                format!("bus coupled to several terminals: {}", terms.join(", ")),
            );
        }
    }
    for i in net.monitored_buses() {
        let id = &p.buses[i].id;
        if !coupled.contains_key(id.as_str()) {
            r.push(id, "switched bus has no terminal (missing coupling)");
        }
    }
    for l in &c.links {
        if l.end_a == l.end_b {
            r.push(&l.id, "link is a self-loop");
        }
        for end in [&l.end_a, &l.end_b] {
            if net.node_idx(end).is_none() {
                r.push(&l.id, format!("link references unknown node {end}"));
            }
        }
        if !(l.bandwidth_cap_mbps > 0.0) {
            r.push(&l.id, "bandwidth capacity must be positive");
        }
        if !(l.prop_delay_ms >= 0.0) {
            r.push(&l.id, "negative propagation delay");
        }
    }

    let bus_ids = || p.buses.iter().map(|b| b.id.as_str());
    let line_ids = || p.lines.iter().map(|l| l.id.as_str());
    check_total(&mut r, "bus_ok", &sc.bus_ok, bus_ids());
    check_total(&mut r, "line_ok", &sc.line_ok, line_ids());
    check_total(
        &mut r,
        "node_ok",
        &sc.node_ok,
        c.nodes.iter().map(|n| n.id.as_str()),
    );
    check_total(
        &mut r,
        "link_ok",
        &sc.link_ok,
        c.links.iter().map(|l| l.id.as_str()),
    );
    check_total(&mut r, "line_initial", &sc.line_initial, line_ids());
    check_total(&mut r, "load_initial", &sc.load_initial, bus_ids());
    r
}
