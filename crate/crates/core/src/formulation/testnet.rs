//! Small hand-built instances shared by unit tests.

use crate::netmodel::tests::{bus, line, link, node, terminal};
use crate::netmodel::{CommNetwork, CoupledNetwork, NodeKind, PowerNetwork, Scenario, SourceCaps};

/// One terminal per bus behind a single forwarder with ample capacity.
pub fn star_comm(bus_ids: &[&str]) -> CommNetwork {
    let mut nodes = vec![node("F", NodeKind::Forwarder), node("O", NodeKind::Center)];
    let mut links = vec![link("FO", "F", "O")];
    links[0].bandwidth_cap_mbps = 1000.0;
    for b in bus_ids {
        nodes.push(terminal(&format!("T{b}"), b));
        links.push(link(&format!("t{b}"), &format!("T{b}"), "F"));
    }
    CommNetwork { nodes, links }
}

fn with_source(id: &str, p: f64) -> crate::netmodel::Bus {
    let mut b = bus(id, p);
    b.source = Some(SourceCaps {
        p_max_kw: 500.0,
        q_max_kvar: 300.0,
    });
    b
}

fn finish(power: PowerNetwork, comm: CommNetwork) -> (CoupledNetwork, Scenario) {
    let net = CoupledNetwork::new(power, comm);
    let sc = Scenario::intact(&net);
    (net, sc)
}

/// Source bus "a", load bus "b", line "ab" with r = x = 0.1 ohm.
pub fn two_bus(p: f64, q: f64) -> (CoupledNetwork, Scenario) {
    let mut load = bus("b", p);
    load.q_load_kvar = q;
    finish(
        PowerNetwork {
            buses: vec![with_source("a", 0.0), load],
            lines: vec![line("ab", "a", "b")],
        },
        star_comm(&["a", "b"]),
    )
}

/// Two source buses joined by a single line.
pub fn two_sources() -> (CoupledNetwork, Scenario) {
    finish(
        PowerNetwork {
            buses: vec![with_source("a", 50.0), with_source("b", 50.0)],
            lines: vec![line("ab", "a", "b")],
        },
        star_comm(&["a", "b"]),
    )
}

/// Path a - b - c fed from source "a"; loads 60 kW at b and 90 kW at c.
pub fn path3() -> (CoupledNetwork, Scenario) {
    finish(
        PowerNetwork {
            buses: vec![with_source("a", 0.0), bus("b", 60.0), bus("c", 90.0)],
            lines: vec![line("ab", "a", "b"), line("bc", "b", "c")],
        },
        star_comm(&["a", "b", "c"]),
    )
}

fn lone_bus() -> PowerNetwork {
    let mut x = bus("x", 0.0);
    x.has_load_switch = false;
    PowerNetwork {
        buses: vec![x],
        lines: vec![],
    }
}

/// Terminal - forwarder - center, 1 ms links, 0.5 ms forwarding delays.
pub fn chain() -> (CoupledNetwork, Scenario) {
    finish(
        lone_bus(),
        CommNetwork {
            nodes: vec![
                terminal("T", "x"),
                node("F", NodeKind::Forwarder),
                node("O", NodeKind::Center),
            ],
            links: vec![link("TF", "T", "F"), link("FO", "F", "O")],
        },
    )
}

/// Terminal on forwarder F1 of a 4-forwarder ring; the uplink leaves F2.
pub fn ring4() -> (CoupledNetwork, Scenario) {
    finish(
        lone_bus(),
        CommNetwork {
            nodes: vec![
                terminal("T", "x"),
                node("F1", NodeKind::Forwarder),
                node("F2", NodeKind::Forwarder),
                node("F3", NodeKind::Forwarder),
                node("F4", NodeKind::Forwarder),
                node("O", NodeKind::Center),
            ],
            links: vec![
                link("t", "T", "F1"),
                link("r12", "F1", "F2"),
                link("r23", "F2", "F3"),
                link("r34", "F3", "F4"),
                link("r41", "F4", "F1"),
                link("up", "F2", "O"),
            ],
        },
    )
}

/// Two 2 Mbps terminals sharing one uplink of capacity `cap`.
pub fn two_terminals_shared(cap: f64) -> (CoupledNetwork, Scenario) {
    let mut power = lone_bus();
    let mut y = bus("y", 0.0);
    y.has_load_switch = false;
    power.buses.push(y);
    let mut up = link("FO", "F", "O");
    up.bandwidth_cap_mbps = cap;
    finish(
        power,
        CommNetwork {
            nodes: vec![
                terminal("T1", "x"),
                terminal("T2", "y"),
                node("F", NodeKind::Forwarder),
                node("O", NodeKind::Center),
            ],
            links: vec![link("a", "T1", "F"), link("b", "T2", "F"), up],
        },
    )
}
