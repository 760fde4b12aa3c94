//! Random small instances inside the oracle limits, with tight voltage,
//! bandwidth and delay margins so that every constraint family can bind.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::case::Case;
use crate::formulation::FormulationConfig;
use crate::grid::{line_permitted, live_buses};
use crate::netmodel::{
    Bus, CommLink, CommNetwork, CommNode, CoupledNetwork, Line, NodeKind, PowerNetwork, Scenario,
    SourceCaps, TerminalSpec,
};
use crate::verifier::verify_power;

/// Reference voltage of fuzzed cases; low enough that drops matter.
pub const FUZZ_V_REF_KV: f64 = 1.0;

fn halves(rng: &mut ChaCha8Rng, lo: u32, hi: u32) -> f64 {
    rng.gen_range(lo..=hi) as f64 / 2.0
}

fn hundredths(rng: &mut ChaCha8Rng, lo: u32, hi: u32) -> f64 {
    rng.gen_range(lo..=hi) as f64 / 100.0
}

/// A random case with 3 to 6 buses, at most 8 lines, one terminal per bus
/// and at most 11 communication nodes.
pub fn fuzz_case(seed: u64) -> Case {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let nb = rng.gen_range(3..=6);
    let ns = rng.gen_range(1..=2usize);
    let bus_id = |i: usize| format!("b{i}");

    let buses: Vec<Bus> = (0..nb)
        .map(|i| {
            let p = rng.gen_range(5..=60) as f64;
            let source = (i < ns).then(|| SourceCaps {
                p_max_kw: rng.gen_range(40..=200) as f64,
                q_max_kvar: rng.gen_range(20..=120) as f64,
            });
            Bus {
                id: bus_id(i),
                p_load_kw: p,
                q_load_kvar: rng.gen_range(0..=(p as u32 / 2)) as f64,
                load_weight: rng.gen_range(1..=2) as f64,
                // Sources keep a load switch so an isolated source can stay dark.
                has_load_switch: source.is_some() || rng.gen_bool(0.8),
                source,
            }
        })
        .collect();

    let mut ends: Vec<(usize, usize)> = (1..nb).map(|i| (rng.gen_range(0..i), i)).collect();
    for _ in 0..rng.gen_range(0..=2) {
        let a = rng.gen_range(0..nb);
        let b = rng.gen_range(0..nb);
        if a != b && ends.len() < 8 {
            ends.push((a, b));
        }
    }
    let lines: Vec<Line> = ends
        .iter()
        .enumerate()
        .map(|(k, &(a, b))| {
            let (sf, st) = match rng.gen_range(0..10) {
                0 => (false, false),
                1 => (true, false),
                2 => (false, true),
                _ => (true, true),
            };
            Line {
                id: format!("l{k}"),
                from_bus: bus_id(a),
                to_bus: bus_id(b),
                r_ohm: hundredths(&mut rng, 10, 100),
                x_ohm: hundredths(&mut rng, 10, 100),
                p_max_kw: rng.gen_range(40..=150) as f64,
                q_max_kvar: rng.gen_range(30..=120) as f64,
                switch_at_from: sf,
                switch_at_to: st,
            }
        })
        .collect();

    let nf = rng.gen_range(2..=4);
    let caps = [3.0, 5.0, 10.0];
    let mut nodes = vec![CommNode {
        id: "O".into(),
        kind: NodeKind::Center,
        bandwidth_cap_mbps: 100.0,
        forward_delay_ms: 0.5,
    }];
    let mut links = Vec::new();
    let mut add_link = |rng: &mut ChaCha8Rng, a: String, b: String| {
        links.push(CommLink {
            id: format!("k{}", links.len()),
            end_a: a,
            end_b: b,
            bandwidth_cap_mbps: caps[rng.gen_range(0..caps.len())],
            prop_delay_ms: halves(rng, 1, 6),
        });
    };
    for f in 0..nf {
        nodes.push(CommNode {
            id: format!("F{f}"),
            kind: NodeKind::Forwarder,
            bandwidth_cap_mbps: caps[rng.gen_range(0..caps.len())],
            forward_delay_ms: 0.5,
        });
        if f > 0 {
            add_link(&mut rng, format!("F{}", f - 1), format!("F{f}"));
        }
    }
    if nf > 2 && rng.gen_bool(0.5) {
        add_link(&mut rng, format!("F{}", nf - 1), "F0".into());
    }
    add_link(&mut rng, "F0".into(), "O".into());
    if rng.gen_bool(0.5) {
        add_link(&mut rng, format!("F{}", nf - 1), "O".into());
    }
    for i in 0..nb {
        let t = format!("T{i}");
        nodes.push(CommNode {
            id: t.clone(),
            kind: NodeKind::Terminal(TerminalSpec {
                attached_bus: bus_id(i),
                required_bandwidth_mbps: 2.0,
                delay_cap_ms: halves(&mut rng, 10, 20),
            }),
            bandwidth_cap_mbps: 10.0,
            forward_delay_ms: 0.0,
        });
        let f = rng.gen_range(0..nf);
        add_link(&mut rng, t.clone(), format!("F{f}"));
        if rng.gen_bool(0.2) {
            let g = rng.gen_range(0..nf);
            add_link(&mut rng, t, format!("F{g}"));
        }
    }

    let net = CoupledNetwork::new(PowerNetwork { buses, lines }, CommNetwork { nodes, links });
    let mut sc = Scenario::intact(&net);
    for l in &net.comm.links {
        if rng.gen_bool(0.1) {
            sc.link_ok.insert(l.id.clone(), false);
        }
    }
    for n in &net.comm.nodes {
        let p = match n.kind {
            NodeKind::Center => 0.03,
            _ => 0.1,
        };
        if rng.gen_bool(p) {
            sc.node_ok.insert(n.id.clone(), false);
        }
    }
    for l in &net.power.lines {
        if rng.gen_bool(0.15) {
            sc.line_ok.insert(l.id.clone(), false);
        }
    }
    for b in &net.power.buses {
        if !b.has_source() && rng.gen_bool(0.1) {
            sc.bus_ok.insert(b.id.clone(), false);
        }
    }

    let cfg = FormulationConfig {
        v_ref_kv: FUZZ_V_REF_KV,
        ..FormulationConfig::default()
    };
    let mut closed: Vec<bool> = (0..net.power.lines.len())
        .map(|k| rng.gen_bool(0.3) && line_permitted(&net, &sc, k))
        .collect();
    let wanted: Vec<bool> = (0..net.power.buses.len())
        .map(|_| rng.gen_bool(0.5))
        .collect();
    let loads_for = |closed: &[bool], keep: bool| -> Vec<bool> {
        let live = live_buses(&net, &sc, closed);
        (0..net.power.buses.len())
            .map(|i| live[i] && (!net.bus(i).has_load_switch || (keep && wanted[i])))
            .collect()
    };
    let mut load_on = loads_for(&closed, true);
    if !verify_power(&net, &sc, &cfg, &closed, &load_on).is_ok() {
        load_on = loads_for(&closed, false);
    }
    if !verify_power(&net, &sc, &cfg, &closed, &load_on).is_ok() {
        closed = vec![false; closed.len()];
        load_on = loads_for(&closed, false);
    }
    for (l, &c) in net.power.lines.iter().zip(&closed) {
        sc.line_initial.insert(l.id.clone(), c);
    }
    for (b, &on) in net.power.buses.iter().zip(&load_on) {
        sc.load_initial.insert(b.id.clone(), on);
    }
    Case::new(net, sc, FUZZ_V_REF_KV)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netmodel::validate;
    use crate::verifier::{ORACLE_MAX_LINES, ORACLE_MAX_NODES, ORACLE_MAX_TERMINALS};

    #[test]
    fn fuzzed_cases_are_valid_and_within_guards() {
        for seed in 0..200 {
            let case = fuzz_case(seed);
            let net = &case.net;
            assert!(validate(net, &case.scenario).is_ok(), "seed {seed}");
            assert!(net.power.lines.len() <= ORACLE_MAX_LINES);
            assert!(net.terminals().len() <= ORACLE_MAX_TERMINALS);
            assert!(net.comm.nodes.len() <= ORACLE_MAX_NODES);
            let closed: Vec<bool> = net
                .power
                .lines
                .iter()
                .map(|l| case.scenario.line_closed_initially(&l.id))
                .collect();
            let on: Vec<bool> = net
                .power
                .buses
                .iter()
                .map(|b| case.scenario.load_closed_initially(&b.id))
                .collect();
            let v = verify_power(net, &case.scenario, &case.formulation, &closed, &on);
            assert!(v.is_ok(), "seed {seed}: {:?}", v.violations);
        }
    }

    #[test]
    fn same_seed_same_case() {
        assert_eq!(
            super::super::emit_case(&fuzz_case(5)),
            super::super::emit_case(&fuzz_case(5))
        );
    }
}
