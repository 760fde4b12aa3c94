//! Stage-by-stage replay of a plan through the verifier.

use std::collections::BTreeSet;

use super::{RestorationPlan, StageKind};
use crate::formulation::{lcc_bounds, pickup, FormulationConfig, StageState};
use crate::netmodel::{CoupledNetwork, Scenario};
use crate::verifier::{verify_power, verify_routing, TerminalVerdict, Violation};

#[derive(Debug, Clone, Default, PartialEq)]
pub struct StageReplay {
    pub index: usize,
    pub violations: Vec<Violation>,
    pub energized_buses: BTreeSet<String>,
    pub cumulative_pickup_kw: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ReplayReport {
    pub stages: Vec<StageReplay>,
}

impl ReplayReport {
    pub fn violations(&self) -> impl Iterator<Item = &Violation> {
        self.stages.iter().flat_map(|s| &s.violations)
    }

    pub fn is_ok(&self) -> bool {
        self.violations().next().is_none()
    }
}

const MISMATCH: &str = "replay mismatch";

/// Applies each stage's operations to the initial state and re-verifies
/// routing, switching permissions and power feasibility. Also checks that
/// the recorded energized buses and pickup are reproduced.
pub fn replay(
    net: &CoupledNetwork,
    sc: &Scenario,
    cfg: &FormulationConfig,
    plan: &RestorationPlan,
) -> ReplayReport {
    let mut report = ReplayReport::default();
    let mut state = StageState::initial(net, sc);
    for stage in &plan.stages {
        let mut v = Vec::new();

        let routing = verify_routing(net, sc, &stage.routing);
        v.extend(routing.violations().into_iter().cloned());
        for &m in net.terminals() {
            let id = &net.node(m).id;
            match stage.comm_states.get(id) {
                None => v.push(Violation::new(
                    MISMATCH,
                    id,
                    "terminal missing from comm states",
                )),
                Some(true)
                    if !matches!(
                        routing.verdicts.get(id),
                        Some(TerminalVerdict::Connected { .. })
                    ) && !routing.verdicts.contains_key(id) =>
                {
                    v.push(Violation::new(
                        "eq26",
                        id,
                        "communicating terminal has no route",
                    ));
                }
                _ => {}
            }
        }
        let s_of_bus = |i: usize| -> f64 {
            match net.terminal_of(i) {
                None => 1.0,
                Some(m)
                    if stage
                        .comm_states
                        .get(&net.node(m).id)
                        .copied()
                        .unwrap_or(false) =>
                {
                    1.0
                }
                Some(_) => 0.0,
            }
        };

        let mut closed: Vec<bool> = net
            .power
            .lines
            .iter()
            .map(|l| state.line_closed(&l.id))
            .collect();
        for op in &stage.line_ops {
            match net.line_idx(&op.line) {
                None => v.push(Violation::new(
                    MISMATCH,
                    &op.line,
                    "operation on unknown line",
                )),
                Some(k) if closed[k] == op.close => v.push(Violation::new(
                    MISMATCH,
                    &op.line,
                    "operation does not change the line state",
                )),
                Some(k) => closed[k] = op.close,
            }
        }
        if stage.kind == StageKind::Comm && !stage.line_ops.is_empty() {
            v.push(Violation::new(
                MISMATCH,
                "stage",
                "communication stage switches lines",
            ));
        }
        for (k, l) in net.power.lines.iter().enumerate() {
            let prior = state.line_closed(&l.id);
            if !l.is_controllable() {
                if closed[k] != prior {
                    v.push(Violation::new(
                        "noncontrollable",
                        &l.id,
                        "line has no switch",
                    ));
                }
                continue;
            }
            let (i, j) = net.line_ends(k);
            let (lb, ub) = lcc_bounds(
                prior,
                l.switch_at_from,
                l.switch_at_to,
                s_of_bus(i),
                s_of_bus(j),
                cfg.require_both_ends_observed_to_close,
            );
            let x = if closed[k] { 1.0 } else { 0.0 };
            if x < lb - 1e-9 || x > ub + 1e-9 {
                v.push(Violation::new(
                    "eq35",
                    &l.id,
                    format!(
                        "state {x} outside [{lb}, {ub}] under the stage's communication states"
                    ),
                ));
            }
        }

        let mut load_on: Vec<bool> = net
            .power
            .buses
            .iter()
            .map(|b| state.load_on(&b.id))
            .collect();
        for bus in &stage.load_ops {
            match net.bus_idx(bus) {
                None => v.push(Violation::new(MISMATCH, bus, "pickup at unknown bus")),
                Some(i) if load_on[i] => {
                    v.push(Violation::new(MISMATCH, bus, "load already served"))
                }
                Some(i) => {
                    if cfg.enforce_load_switch_comm
                        && net.bus(i).has_load_switch
                        && s_of_bus(i) < 0.5
                    {
                        v.push(Violation::new(
                            "lsc",
                            bus,
                            "load switch operated without communication",
                        ));
                    }
                    load_on[i] = true;
                }
            }
        }

        let power = verify_power(net, sc, cfg, &closed, &load_on);
        v.extend(power.violations.iter().cloned());
        let (_, kw) = pickup(net, &load_on);
        if power.energized != stage.energized_buses {
            v.push(Violation::new(
                MISMATCH,
                "energized_buses",
                "differs from the recomputed set",
            ));
        }
        if (kw - stage.cumulative_pickup_kw).abs() > 1e-6 {
            v.push(Violation::new(
                MISMATCH,
                "cumulative_pickup_kw",
                format!("recorded {}, recomputed {kw}", stage.cumulative_pickup_kw),
            ));
        }
        report.stages.push(StageReplay {
            index: stage.index,
            violations: v,
            energized_buses: power.energized,
            cumulative_pickup_kw: kw,
        });
        state = state.advance(net, &closed, &load_on);
    }
    report
}
