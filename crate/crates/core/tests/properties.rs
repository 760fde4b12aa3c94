//! Invariants of the network model, formulation, planners, verifier and
//! case tooling, checked on randomized instances.

use std::collections::{BTreeMap, BTreeSet};

use milp::{Solution, SolveOptions};
use proptest::prelude::*;
use restoration::formulation::{
    build_integrated, build_load_recovery, pickup, Formulation, FormulationConfig, Instance,
    StageState,
};
use restoration::netmodel::{validate, NodeKind};
use restoration::planner::{replay, run_iclr};
use restoration::tooling::{
    emit_case, fuzz_case, gen_feeder123, gen_feeder33, parse_case, Case, DamageProfile,
    SevereParams,
};
use restoration::verifier::verify_power;

fn exact() -> SolveOptions {
    SolveOptions::default().with_gap(0.0)
}

fn with_config(case: &Case, cfg: FormulationConfig) -> Case {
    Case {
        formulation: cfg,
        ..case.clone()
    }
}

fn solve(case: &Case) -> (Formulation, Solution) {
    let stage = StageState::initial(&case.net, &case.scenario);
    let inst = Instance::new(&case.net, &case.scenario, &stage, &case.formulation);
    let f = build_integrated(&inst).expect("model builds");
    let sol = milp::solve(&f.model, &exact()).expect("solver runs");
    (f, sol)
}

/// Weighted pickup of the optimum, `None` when infeasible.
fn optimum(case: &Case) -> Option<f64> {
    let (f, sol) = solve(case);
    let pv = f.power.as_ref().expect("power part");
    sol.has_incumbent().then(|| {
        let on: Vec<bool> = pv.load_on.iter().map(|&v| sol.is_one(v)).collect();
        pickup(&case.net, &on).0
    })
}

fn same(a: Option<f64>, b: Option<f64>) -> bool {
    match (a, b) {
        (Some(x), Some(y)) => (x - y).abs() <= 1e-6,
        (None, None) => true,
        _ => false,
    }
}

fn generated(which: u8, seed: u64) -> Case {
    let severe = DamageProfile::Severe(SevereParams::default());
    match which % 4 {
        0 => gen_feeder33(seed, DamageProfile::None),
        1 => gen_feeder33(seed, severe),
        2 => gen_feeder123(seed, DamageProfile::Light),
        _ => fuzz_case(seed),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn validate_is_idempotent_and_pure(seed in 0u64..100_000) {
        let case = fuzz_case(seed);
        let before = case.clone();
        let a = validate(&case.net, &case.scenario);
        let b = validate(&case.net, &case.scenario);
        prop_assert_eq!(a, b);
        prop_assert_eq!(emit_case(&before), emit_case(&case));
    }

    #[test]
    fn coupling_is_a_bijection_onto_monitored_buses(which in 0u8..4, seed in 0u64..1000) {
        let net = generated(which, seed).net;
        let mut attached = BTreeSet::new();
        for &m in net.terminals() {
            let spec = net.node(m).terminal().expect("terminal");
            prop_assert!(attached.insert(spec.attached_bus.clone()));
        }
        let monitored: BTreeSet<String> = net
            .power
            .buses
            .iter()
            .filter(|b| {
                b.has_load_switch
                    || net.power.lines.iter().any(|l| {
                        (l.switch_at_from && l.from_bus == b.id) || (l.switch_at_to && l.to_bus == b.id)
                    })
            })
            .map(|b| b.id.clone())
            .collect();
        prop_assert!(monitored.is_subset(&attached));
    }

    #[test]
    fn solutions_satisfy_every_stored_row(seed in 0u64..100_000) {
        let case = fuzz_case(seed);
        let (f, sol) = solve(&case);
        let census: usize = f.census().values().sum();
        prop_assert_eq!(census, f.model.constraints().len());
        if sol.has_incumbent() {
            let bad = f.model.check(&sol.values, 1e-6);
            prop_assert!(bad.is_empty(), "{:?}", bad);
        }
    }

    #[test]
    fn census_is_a_function_of_instance_size(seed in 0u64..100_000) {
        let case = fuzz_case(seed);
        let full = with_config(&case, FormulationConfig {
            prune_routing: false,
            ..case.formulation.clone()
        });
        let stage = StageState::initial(&full.net, &full.scenario);
        let inst = Instance::new(&full.net, &full.scenario, &stage, &full.formulation);
        let f = build_integrated(&inst).expect("model builds");
        let net = &case.net;
        let n = net.power.buses.len();
        let l = net.power.lines.len();
        let s = net.power.buses.iter().filter(|b| b.has_source()).count();
        let ctl = net.power.lines.iter().filter(|l| l.is_controllable()).count();
        let nc = net.comm.nodes.len();
        let lc = net.comm.links.len();
        let t = net.terminals().len();
        let fw = (0..nc).filter(|&m| net.is_forwarder(m)).count();
        prop_assert_eq!(fw, nc - t - 1);
        let expected: BTreeMap<&str, usize> = [
            ("eq1", l), ("eq2", 2 * s), ("eq3", 2 * s), ("eq4", 2 * l), ("eq5", 2 * l),
            ("eq6", 2 * l), ("eq7", 2 * l), ("eq8", n - s), ("eq9", n - s), ("eq10", s),
            ("eq11", s), ("eq12", s), ("eq13", 2 * n), ("eq14", 2 * l), ("eq15", 2 * l),
            ("eq16", 2 * l), ("eq17", n), ("eq18", n - s), ("eq19", s), ("eq20", 1),
            ("eq21", t * lc), ("eq22", t * nc), ("eq23", t), ("eq24", fw * t),
            ("eq25", 2 * t * t), ("eq26", t), ("eq27", t), ("eq28", nc), ("eq29", nc),
            ("eq30", lc), ("eq31", lc), ("eq32", t), ("eq33", t), ("eq35", 2 * ctl),
        ]
        .into_iter()
        .collect();
        let census = f.census();
        for (tag, want) in &expected {
            prop_assert_eq!(census.get(*tag).copied().unwrap_or(0), *want, "tag {}", tag);
        }
        // Pruning only drops routing rows.
        let (pruned, _) = solve(&case);
        for (tag, &count) in &pruned.census() {
            let full_count = census.get(tag).copied().unwrap_or(0);
            if ["eq21", "eq22", "eq23", "eq24", "eq25"].contains(&tag.as_str()) {
                prop_assert!(count <= full_count, "tag {}", tag);
            } else {
                prop_assert_eq!(count, full_count, "tag {}", tag);
            }
        }
    }

    #[test]
    fn unlimited_communication_matches_the_comm_free_optimum(seed in 0u64..100_000) {
        let mut case = fuzz_case(seed);
        case.scenario.node_ok.clear();
        case.scenario.link_ok.clear();
        for node in &mut case.net.comm.nodes {
            node.bandwidth_cap_mbps = 1e9;
            if let NodeKind::Terminal(spec) = &mut node.kind {
                spec.delay_cap_ms = 1e9;
            }
        }
        for link in &mut case.net.comm.links {
            link.bandwidth_cap_mbps = 1e9;
        }
        let integrated = optimum(&case);
        let stage = StageState::initial(&case.net, &case.scenario);
        let inst = Instance::new(&case.net, &case.scenario, &stage, &case.formulation);
        let all = vec![true; case.net.terminals().len()];
        let f = build_load_recovery(&inst, &all).expect("model builds");
        let sol = milp::solve(&f.model, &exact()).expect("solver runs");
        let free = sol.has_incumbent().then(|| {
            let pv = f.power.as_ref().expect("power part");
            let on: Vec<bool> = pv.load_on.iter().map(|&v| sol.is_one(v)).collect();
            pickup(&case.net, &on).0
        });
        prop_assert!(same(integrated, free), "{:?} vs {:?}", integrated, free);
    }

    #[test]
    fn cuts_and_pruning_keep_the_optimum(seed in 0u64..100_000) {
        let case = fuzz_case(seed);
        let base = optimum(&case);
        let plain = with_config(&case, FormulationConfig {
            orientation_cuts: false,
            prune_routing: false,
            ..case.formulation.clone()
        });
        prop_assert!(same(base, optimum(&plain)));
    }

    #[test]
    fn weight_scaling_keeps_the_optimum(seed in 0u64..100_000, k in 2u32..20) {
        let case = fuzz_case(seed);
        let mut scaled = case.clone();
        for b in &mut scaled.net.power.buses {
            b.load_weight *= k as f64;
        }
        let a = optimum(&case);
        let b = optimum(&scaled).map(|w| w / k as f64);
        prop_assert!(same(a, b), "{:?} vs {:?}", a, b);
    }

    #[test]
    fn recomputed_voltages_follow_the_linear_drop(seed in 0u64..100_000) {
        let case = fuzz_case(seed);
        let Ok(plan) = run_iclr(&case.net, &case.scenario, &case.planner_config()) else {
            return Err(TestCaseError::fail("planning failed"));
        };
        let net = &case.net;
        let mut closed: Vec<bool> = net
            .power
            .lines
            .iter()
            .map(|l| case.scenario.line_closed_initially(&l.id) && case.scenario.line_ok(&l.id))
            .collect();
        let mut on: Vec<bool> = net
            .power
            .buses
            .iter()
            .map(|b| case.scenario.load_closed_initially(&b.id))
            .collect();
        let coef = 1.0 / (1000.0 * case.formulation.v_ref_kv);
        for stage in &plan.stages {
            for op in &stage.line_ops {
                closed[net.line_idx(&op.line).expect("line")] = op.close;
            }
            for b in &stage.load_ops {
                on[net.bus_idx(b).expect("bus")] = true;
            }
            let v = verify_power(net, &case.scenario, &case.formulation, &closed, &on);
            prop_assert!(v.is_ok());
            for (id, &(p, q)) in &v.flow {
                let line = net.line(net.line_idx(id).expect("line"));
                let drop = v.voltage_kv[&line.from_bus] - v.voltage_kv[&line.to_bus];
                let want = coef * (p * line.r_ohm + q * line.x_ohm);
                prop_assert!((drop - want).abs() <= 1e-9, "{}: {} vs {}", id, drop, want);
            }
        }
    }

    #[test]
    fn replay_reproduces_iclr_plans(seed in 0u64..100_000) {
        let case = fuzz_case(seed);
        let plan = run_iclr(&case.net, &case.scenario, &case.planner_config())
            .map_err(|e| TestCaseError::fail(e.to_string()))?;
        let rep = replay(&case.net, &case.scenario, &case.formulation, &plan);
        prop_assert!(rep.is_ok(), "{:?}", rep.violations().collect::<Vec<_>>());
        prop_assert!(plan.stages.len() <= case.planner_config().max_stages);
        for (s, r) in plan.stages.iter().zip(&rep.stages) {
            prop_assert_eq!(&s.energized_buses, &r.energized_buses);
            prop_assert!((s.cumulative_pickup_kw - r.cumulative_pickup_kw).abs() <= 1e-9);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn generators_are_deterministic_valid_and_round_trip(which in 0u8..4, seed in 0u64..1000) {
        let a = emit_case(&generated(which, seed));
        let b = emit_case(&generated(which, seed));
        prop_assert_eq!(&a, &b);
        let parsed = parse_case(&a).map_err(|e| TestCaseError::fail(e.to_string()))?;
        prop_assert!(validate(&parsed.net, &parsed.scenario).is_ok());
        prop_assert_eq!(emit_case(&parsed), a);
    }
}
