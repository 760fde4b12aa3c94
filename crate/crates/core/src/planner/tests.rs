use super::*;
use crate::formulation::testnet::path3;
use crate::netmodel::tests::{bus, line, link, node, terminal};
use crate::netmodel::{CommNetwork, NodeKind, PowerNetwork, SourceCaps};
use crate::planner::replay;

fn exact() -> PlannerConfig {
    PlannerConfig {
        solve: SolveOptions::default().with_gap(0.0),
        ..PlannerConfig::default()
    }
}

fn source(id: &str) -> crate::netmodel::Bus {
    let mut b = bus(id, 0.0);
    b.source = Some(SourceCaps {
        p_max_kw: 500.0,
        q_max_kvar: 300.0,
    });
    b
}

/// Terminals on `buses` behind forwarder F; the F-O uplink has `cap` Mbps.
/// `slow` terminals get 1 ms access links, the rest 0.1 ms.
fn shared_uplink(buses: &[&str], fast: &[&str], cap: f64) -> CommNetwork {
    let mut nodes = vec![node("F", NodeKind::Forwarder), node("O", NodeKind::Center)];
    let mut up = link("FO", "F", "O");
    up.bandwidth_cap_mbps = cap;
    let mut links = vec![up];
    for b in buses {
        nodes.push(terminal(&format!("T{b}"), b));
        let mut l = link(&format!("t{b}"), &format!("T{b}"), "F");
        if fast.contains(b) {
            l.prop_delay_ms = 0.1;
        }
        links.push(l);
    }
    CommNetwork { nodes, links }
}

/// Two islands, each a source feeding one load; the uplink carries only
/// two terminals at a time.
fn two_microgrids() -> (CoupledNetwork, Scenario) {
    let power = PowerNetwork {
        buses: vec![
            source("s1"),
            source("s2"),
            bus("l1", 100.0),
            bus("l2", 50.0),
        ],
        lines: vec![line("a", "s1", "l1"), line("b", "s2", "l2")],
    };
    let net = CoupledNetwork::new(power, shared_uplink(&["s1", "s2", "l1", "l2"], &[], 4.0));
    let sc = Scenario::intact(&net);
    (net, sc)
}

#[test]
fn intact_path_single_stage_matches_olr() {
    let (net, sc) = path3();
    let cfg = exact();
    let olr = run_olr(&net, &sc, &cfg).unwrap();
    let iclr = run_iclr(&net, &sc, &cfg).unwrap();
    assert_eq!(olr.total_pickup_kw, 150.0);
    assert_eq!(iclr.total_pickup_kw, 150.0);
    assert_eq!(iclr.stages.len(), 1);
    assert!(replay(&net, &sc, &cfg.formulation, &iclr).is_ok());
    assert!(replay(&net, &sc, &cfg.formulation, &olr).is_ok());
}

#[test]
fn severed_center_leaves_initial_load() {
    let (net, mut sc) = path3();
    sc.node_ok.insert("O".into(), false);
    sc.line_initial.insert("ab".into(), true);
    sc.load_initial.insert("b".into(), true);
    let cfg = exact();
    for plan in [
        run_olr(&net, &sc, &cfg).unwrap(),
        run_sclr(&net, &sc, &cfg).unwrap(),
        run_iclr(&net, &sc, &cfg).unwrap(),
    ] {
        assert_eq!(plan.total_pickup_kw, 60.0, "{}", plan.algorithm);
        assert_eq!(plan.initial_pickup_kw, 60.0);
        assert!(replay(&net, &sc, &cfg.formulation, &plan).is_ok());
    }
}

#[test]
fn node_count_objective_misses_the_useful_pair() {
    // Only two of three terminals fit; the z terminal is fastest, so the
    // count-then-delay objective keeps it and line ab cannot close.
    let mut z = bus("z", 0.0);
    z.has_load_switch = true;
    let power = PowerNetwork {
        buses: vec![source("a"), bus("b", 100.0), z],
        lines: vec![line("ab", "a", "b")],
    };
    let net = CoupledNetwork::new(power, shared_uplink(&["a", "b", "z"], &["z"], 4.0));
    let sc = Scenario::intact(&net);
    let cfg = exact();
    let sclr = run_sclr(&net, &sc, &cfg).unwrap();
    let iclr = run_iclr(&net, &sc, &cfg).unwrap();
    assert_eq!(sclr.stages.len(), 2);
    assert!(sclr.stages[0].comm_states["Tz"]);
    assert_eq!(sclr.total_pickup_kw, 0.0);
    assert_eq!(iclr.total_pickup_kw, 100.0);
}

#[test]
fn bandwidth_limit_spreads_over_two_stages() {
    let (net, sc) = two_microgrids();
    let cfg = exact();
    let iclr = run_iclr(&net, &sc, &cfg).unwrap();
    let cum: Vec<f64> = iclr.stages.iter().map(|s| s.cumulative_pickup_kw).collect();
    assert_eq!(cum, vec![100.0, 150.0]);
    assert_eq!(
        iclr.stages[0].line_ops,
        vec![LineOp {
            line: "a".into(),
            close: true
        }]
    );
    let rep = replay(&net, &sc, &cfg.formulation, &iclr);
    assert!(rep.is_ok(), "{:?}", rep.violations().collect::<Vec<_>>());

    let one = PlannerConfig {
        max_stages: 1,
        ..exact()
    };
    assert_eq!(run_iclr(&net, &sc, &one).unwrap().stages.len(), 1);
    let none = PlannerConfig {
        max_stages: 0,
        ..exact()
    };
    assert!(matches!(
        run_iclr(&net, &sc, &none),
        Err(PlanError::NoStages)
    ));
}

#[test]
fn tampered_line_op_is_eq35() {
    let (net, sc) = two_microgrids();
    let cfg = exact();
    let mut plan = run_iclr(&net, &sc, &cfg).unwrap();
    // Claim both lines closed in stage 1 although only two terminals talk.
    plan.stages[0].line_ops.push(LineOp {
        line: "b".into(),
        close: true,
    });
    let rep = replay(&net, &sc, &cfg.formulation, &plan);
    assert!(rep.violations().any(|v| v.tag == "eq35"));
}

#[test]
fn olr_states_follow_prefault_routes() {
    let (net, mut sc) = path3();
    let (s, _) = olr_comm_states(&net, &sc);
    assert_eq!(s, vec![true, true, true]);
    sc.link_ok.insert("tb".into(), false);
    let (s, r) = olr_comm_states(&net, &sc);
    assert_eq!(s, vec![true, false, true]);
    assert!(!r.routes.contains_key("Tb"));
}

#[test]
fn compare_runs_all_three() {
    let (net, sc) = two_microgrids();
    let out = compare(&net, &sc, &exact());
    let algos: Vec<_> = out.iter().map(|e| e.algorithm).collect();
    assert_eq!(algos, Algorithm::ALL.to_vec());
    assert!(out.iter().all(|e| e.plan.is_some()));
    let iclr = out[2].plan.as_ref().unwrap();
    let olr = out[0].plan.as_ref().unwrap();
    assert!(iclr.total_pickup_kw >= olr.total_pickup_kw);
}

#[test]
fn algorithm_names_parse() {
    for a in Algorithm::ALL {
        assert_eq!(a.name().parse::<Algorithm>().unwrap(), a);
    }
    assert!("xyz".parse::<Algorithm>().is_err());
}
