//! Solver-independent checks: routing support per terminal, power feasibility
//! of a switch configuration, reachability, and an exhaustive oracle for
//! tiny instances.
//!
//! Everything is recomputed from the raw routing and switch decisions;
//! solver auxiliaries (bandwidth sums, delays, commodity flows) are never
//! read.

mod oracle;
mod power;

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::netmodel::{CoupledNetwork, NodeKind, Scenario};

pub use oracle::{
    oracle_solve, OracleResult, ORACLE_MAX_LINES, ORACLE_MAX_NODES, ORACLE_MAX_TERMINALS,
};
pub use power::{verify_power, PowerVerdict};

/// Absolute tolerance for capacity, delay and voltage comparisons.
pub const TOL: f64 = 1e-6;

/// Elements carrying one terminal's data (the support of its routing
/// variables), listed by id.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Route {
    pub nodes: Vec<String>,
    pub links: Vec<String>,
}

/// Routes keyed by terminal id; terminals without an entry do not
/// communicate.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoutingAssignment {
    pub routes: BTreeMap<String, Route>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    /// Constraint family or rule that failed, e.g. `eq21` or `one-DG rule`.
    pub tag: String,
    pub element: String,
    pub detail: String,
}

impl Violation {
    pub(crate) fn new(tag: &str, element: &str, detail: impl Into<String>) -> Self {
        Violation {
            tag: tag.to_string(),
            element: element.to_string(),
            detail: detail.into(),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}] {}: {}", self.tag, self.element, self.detail)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum TerminalVerdict {
    Connected { path: Vec<String>, delay_ms: f64 },
    Violation(Violation),
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RoutingReport {
    pub verdicts: BTreeMap<String, TerminalVerdict>,
    /// Bandwidth overloads on shared nodes and links.
    pub capacity: Vec<Violation>,
    /// Recomputed bandwidth use and end-to-end delay.
    pub node_load: BTreeMap<String, f64>,
    pub link_load: BTreeMap<String, f64>,
    pub delay_ms: BTreeMap<String, f64>,
}

impl RoutingReport {
    pub fn violations(&self) -> Vec<&Violation> {
        self.verdicts
            .values()
            .filter_map(|v| match v {
                TerminalVerdict::Violation(x) => Some(x),
                TerminalVerdict::Connected { .. } => None,
            })
            .chain(&self.capacity)
            .collect()
    }

    pub fn is_ok(&self) -> bool {
        self.violations().is_empty()
    }
}

struct Support {
    nodes: BTreeSet<usize>,
    links: BTreeSet<usize>,
}

fn resolve(net: &CoupledNetwork, term: &str, route: &Route) -> Result<Support, Violation> {
    let mut nodes = BTreeSet::new();
    for id in &route.nodes {
        let m = net.node_idx(id).ok_or_else(|| {
            Violation::new("eq22", term, format!("route names unknown node {id}"))
        })?;
        nodes.insert(m);
    }
    let mut links = BTreeSet::new();
    for id in &route.links {
        let l = net.link_idx(id).ok_or_else(|| {
            Violation::new("eq21", term, format!("route names unknown link {id}"))
        })?;
        links.insert(l);
    }
    Ok(Support { nodes, links })
}

fn check_terminal(
    net: &CoupledNetwork,
    sc: &Scenario,
    term: &str,
    sup: &Support,
) -> Result<TerminalVerdict, Violation> {
    let t = match net.node_idx(term) {
        Some(t) if net.is_terminal(t) => t,
        _ => {
            return Err(Violation::new(
                "eq25",
                term,
                "routed source is not a terminal",
            ))
        }
    };
    let spec = net.node(t).terminal().expect("is terminal");
    let center = net
        .center()
        .ok_or_else(|| Violation::new("eq23", term, "network has no center"))?;

    for &l in &sup.links {
        if !sc.link_ok(&net.link(l).id) {
            return Err(Violation::new(
                "eq21",
                term,
                format!("uses failed link {}", net.link(l).id),
            ));
        }
    }
    for &m in &sup.nodes {
        if !sc.node_ok(&net.node(m).id) {
            let tag = if m == t { "eq27" } else { "eq22" };
            return Err(Violation::new(
                tag,
                term,
                format!("uses failed node {}", net.node(m).id),
            ));
        }
        if m != t && net.is_terminal(m) {
            return Err(Violation::new(
                "eq25",
                term,
                format!("passes through terminal {}", net.node(m).id),
            ));
        }
    }

    let mut degree: BTreeMap<usize, usize> = BTreeMap::new();
    for &l in &sup.links {
        let (a, b) = net.link_ends(l);
        *degree.entry(a).or_default() += 1;
        *degree.entry(b).or_default() += 1;
    }
    let touched: BTreeSet<usize> = degree
        .keys()
        .copied()
        .chain(sup.nodes.iter().copied())
        .collect();
    for &m in &touched {
        let h = usize::from(sup.nodes.contains(&m));
        let deg = degree.get(&m).copied().unwrap_or(0);
        let node = net.node(m);
        let (tag, want) = match node.kind {
            NodeKind::Center => ("eq23", h),
            NodeKind::Forwarder => ("eq24", 2 * h),
            NodeKind::Terminal(_) => ("eq25", h),
        };
        if deg != want {
            return Err(Violation::new(
                tag,
                term,
                format!("node {} has {deg} routed links, expected {want}", node.id),
            ));
        }
    }
    if !sup.nodes.contains(&t) {
        return Err(Violation::new(
            "eq25",
            term,
            "terminal itself is not routed",
        ));
    }
    if !sup.nodes.contains(&center) {
        return Err(Violation::new(
            "eq26",
            term,
            "data never reaches the center",
        ));
    }

    // Degrees are 1 at both ends and 2 inside, so walking from the terminal
    // reaches the center; anything not walked is a detached cycle.
    let mut path = vec![net.node(t).id.clone()];
    let mut used = BTreeSet::new();
    let mut at = t;
    while at != center {
        let next = net
            .links_at(at)
            .iter()
            .copied()
            .find(|l| sup.links.contains(l) && !used.contains(l))
            .expect("degree conditions leave an unused link");
        used.insert(next);
        let (a, b) = net.link_ends(next);
        at = if a == at { b } else { a };
        path.push(net.node(at).id.clone());
    }
    if used.len() != sup.links.len() {
        return Err(Violation::new(
            "stray cycle",
            term,
            format!(
                "{} routed links are not on the path",
                sup.links.len() - used.len()
            ),
        ));
    }

    let delay = support_delay(net, sup);
    if delay > spec.delay_cap_ms + TOL {
        return Err(Violation::new(
            "eq33",
            term,
            format!("delay {delay} ms exceeds cap {} ms", spec.delay_cap_ms),
        ));
    }
    Ok(TerminalVerdict::Connected {
        path,
        delay_ms: delay,
    })
}

/// Link propagation plus forwarding at every non-terminal node.
fn support_delay(net: &CoupledNetwork, sup: &Support) -> f64 {
    let links: f64 = sup.links.iter().map(|&l| net.link(l).prop_delay_ms).sum();
    let nodes: f64 = sup
        .nodes
        .iter()
        .filter(|&&m| !net.is_terminal(m))
        .map(|&m| net.node(m).forward_delay_ms)
        .sum();
    links + nodes
}

/// Checks every routed terminal and the shared bandwidth caps.
pub fn verify_routing(
    net: &CoupledNetwork,
    sc: &Scenario,
    ra: &RoutingAssignment,
) -> RoutingReport {
    let mut report = RoutingReport::default();
    let mut node_load = vec![0.0; net.comm.nodes.len()];
    let mut link_load = vec![0.0; net.comm.links.len()];
    for (term, route) in &ra.routes {
        let sup = match resolve(net, term, route) {
            Ok(s) => s,
            Err(v) => {
                report
                    .verdicts
                    .insert(term.clone(), TerminalVerdict::Violation(v));
                continue;
            }
        };
        let w = net
            .node_idx(term)
            .and_then(|t| net.node(t).terminal())
            .map_or(0.0, |s| s.required_bandwidth_mbps);
        for &m in &sup.nodes {
            node_load[m] += w;
        }
        for &l in &sup.links {
            link_load[l] += w;
        }
        report
            .delay_ms
            .insert(term.clone(), support_delay(net, &sup));
        let verdict = match check_terminal(net, sc, term, &sup) {
            Ok(v) => v,
            Err(v) => TerminalVerdict::Violation(v),
        };
        report.verdicts.insert(term.clone(), verdict);
    }
    for (m, &d) in node_load.iter().enumerate() {
        let node = net.node(m);
        report.node_load.insert(node.id.clone(), d);
        if d > node.bandwidth_cap_mbps + TOL {
            report.capacity.push(Violation::new(
                "eq29",
                &node.id,
                format!("carries {d} Mbps, cap {}", node.bandwidth_cap_mbps),
            ));
        }
    }
    for (l, &d) in link_load.iter().enumerate() {
        let link = net.link(l);
        report.link_load.insert(link.id.clone(), d);
        if d > link.bandwidth_cap_mbps + TOL {
            report.capacity.push(Violation::new(
                "eq31",
                &link.id,
                format!("carries {d} Mbps, cap {}", link.bandwidth_cap_mbps),
            ));
        }
    }
    report
}

/// Drops support elements not connected to the routed terminal.
pub fn prune_cycles(net: &CoupledNetwork, ra: &RoutingAssignment) -> RoutingAssignment {
    let mut out = RoutingAssignment::default();
    for (term, route) in &ra.routes {
        let (Some(t), Ok(sup)) = (net.node_idx(term), resolve(net, term, route)) else {
            out.routes.insert(term.clone(), route.clone());
            continue;
        };
        let mut seen_nodes = BTreeSet::from([t]);
        let mut seen_links = BTreeSet::new();
        let mut stack = vec![t];
        while let Some(m) = stack.pop() {
            for &l in net.links_at(m) {
                if sup.links.contains(&l) && seen_links.insert(l) {
                    let (a, b) = net.link_ends(l);
                    let other = if a == m { b } else { a };
                    if seen_nodes.insert(other) {
                        stack.push(other);
                    }
                }
            }
        }
        let nodes = sup
            .nodes
            .iter()
            .filter(|m| seen_nodes.contains(m))
            .map(|&m| net.node(m).id.clone())
            .collect();
        let links = seen_links.iter().map(|&l| net.link(l).id.clone()).collect();
        out.routes.insert(term.clone(), Route { nodes, links });
    }
    out
}

/// Terminals with some working path to the center, ignoring bandwidth and
/// delay. Only forwarders and the center relay traffic.
pub fn reachable(net: &CoupledNetwork, sc: &Scenario) -> BTreeMap<String, bool> {
    let n = net.comm.nodes.len();
    let mut reached = vec![false; n];
    if let Some(o) = net.center().filter(|&o| sc.node_ok(&net.node(o).id)) {
        reached[o] = true;
        let mut stack = vec![o];
        while let Some(m) = stack.pop() {
            for &l in net.links_at(m) {
                if !sc.link_ok(&net.link(l).id) {
                    continue;
                }
                let (a, b) = net.link_ends(l);
                let other = if a == m { b } else { a };
                if reached[other] || !sc.node_ok(&net.node(other).id) {
                    continue;
                }
                reached[other] = true;
                if !net.is_terminal(other) {
                    stack.push(other);
                }
            }
        }
    }
    net.terminals()
        .iter()
        .map(|&t| (net.node(t).id.clone(), reached[t]))
        .collect()
}

#[derive(PartialEq)]
struct Entry {
    delay: f64,
    hops: Vec<String>,
    node: usize,
}

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        // Min-heap on delay, then on the id sequence for determinism.
        other
            .delay
            .total_cmp(&self.delay)
            .then_with(|| other.hops.cmp(&self.hops))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Minimum-delay route from terminal index `t` to the center on the intact
/// network (delay counted as in the routing model). Ties are broken by the
/// lexicographic sequence of link ids.
pub fn shortest_route(net: &CoupledNetwork, t: usize) -> Option<Route> {
    let center = net.center()?;
    let n = net.comm.nodes.len();
    let mut done = vec![false; n];
    let mut heap = BinaryHeap::new();
    let mut best: Vec<Option<(f64, Vec<usize>)>> = vec![None; n];
    heap.push(Entry {
        delay: 0.0,
        hops: Vec::new(),
        node: t,
    });
    let mut links_of: BTreeMap<Vec<String>, Vec<usize>> = BTreeMap::new();
    links_of.insert(Vec::new(), Vec::new());
    while let Some(Entry { delay, hops, node }) = heap.pop() {
        if done[node] {
            continue;
        }
        done[node] = true;
        let path_links = links_of[&hops].clone();
        best[node] = Some((delay, path_links.clone()));
        if node == center {
            break;
        }
        if node != t && net.is_terminal(node) {
            continue;
        }
        for &l in net.links_at(node) {
            let (a, b) = net.link_ends(l);
            let other = if a == node { b } else { a };
            if done[other] || net.is_terminal(other) {
                continue;
            }
            let d = delay + net.link(l).prop_delay_ms + net.node(other).forward_delay_ms;
            let mut h = hops.clone();
            h.push(net.link(l).id.clone());
            let mut pl = path_links.clone();
            pl.push(l);
            links_of.insert(h.clone(), pl);
            heap.push(Entry {
                delay: d,
                hops: h,
                node: other,
            });
        }
    }
    let (_, links) = best[center].clone()?;
    let mut nodes = BTreeSet::from([t]);
    for &l in &links {
        let (a, b) = net.link_ends(l);
        nodes.insert(a);
        nodes.insert(b);
    }
    let mut link_ids: Vec<String> = links.iter().map(|&l| net.link(l).id.clone()).collect();
    link_ids.sort();
    Some(Route {
        nodes: nodes.iter().map(|&m| net.node(m).id.clone()).collect(),
        links: link_ids,
    })
}
