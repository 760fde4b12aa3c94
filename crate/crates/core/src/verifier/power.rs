//! Power feasibility of a switch configuration, recomputed on the radial
//! islands: flows are subtree sums, voltages follow the linear drop.

use std::collections::{BTreeMap, BTreeSet};

use super::{Violation, TOL};
use crate::formulation::FormulationConfig;
use crate::grid::{line_permitted, live_buses, Islands};
use crate::netmodel::{CoupledNetwork, Scenario};

#[derive(Debug, Clone, Default, PartialEq)]
pub struct PowerVerdict {
    pub violations: Vec<Violation>,
    /// Buses on a live island that either carry a closed line or serve load.
    pub energized: BTreeSet<String>,
    pub served_kw: f64,
    pub weighted: f64,
    pub voltage_kv: BTreeMap<String, f64>,
    /// (P, Q) per closed line, positive from `from_bus` to `to_bus`.
    pub flow: BTreeMap<String, (f64, f64)>,
}

impl PowerVerdict {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Flows and voltages of the radial island fed by `source`.
pub(crate) struct IslandFlow {
    pub violations: Vec<Violation>,
    pub voltage: Vec<(usize, f64)>,
    pub flow: Vec<(usize, f64, f64)>,
}

/// `closed` must describe a radial island around `source`.
pub(crate) fn island_flow(
    net: &CoupledNetwork,
    cfg: &FormulationConfig,
    closed: &[bool],
    load_on: &[bool],
    source: usize,
) -> IslandFlow {
    let n = net.power.buses.len();
    let mut order = vec![source];
    let mut parent: Vec<Option<usize>> = vec![None; n];
    let mut seen = vec![false; n];
    seen[source] = true;
    let mut head = 0;
    while head < order.len() {
        let u = order[head];
        head += 1;
        for &(k, _) in net.lines_at(u) {
            if !closed[k] {
                continue;
            }
            let (i, j) = net.line_ends(k);
            let c = if i == u { j } else { i };
            if !seen[c] {
                seen[c] = true;
                parent[c] = Some(k);
                order.push(c);
            }
        }
    }

    let mut sub_p = vec![0.0; n];
    let mut sub_q = vec![0.0; n];
    for &i in &order {
        if load_on[i] {
            sub_p[i] = net.bus(i).p_load_kw;
            sub_q[i] = net.bus(i).q_load_kvar;
        }
    }
    for &c in order.iter().skip(1).rev() {
        let k = parent[c].expect("non-root has a parent line");
        let (i, j) = net.line_ends(k);
        let u = if i == c { j } else { i };
        sub_p[u] += sub_p[c];
        sub_q[u] += sub_q[c];
    }

    let mut out = IslandFlow {
        violations: Vec::new(),
        voltage: Vec::new(),
        flow: Vec::new(),
    };
    let src = net.bus(source);
    if let Some(caps) = &src.source {
        if sub_p[source] > caps.p_max_kw + TOL {
            out.violations.push(Violation::new(
                "eq2",
                &src.id,
                format!("supplies {} kW, cap {}", sub_p[source], caps.p_max_kw),
            ));
        }
        if sub_q[source] > caps.q_max_kvar + TOL {
            out.violations.push(Violation::new(
                "eq3",
                &src.id,
                format!("supplies {} kvar, cap {}", sub_q[source], caps.q_max_kvar),
            ));
        }
    }

    let va = cfg.v_ref_kv;
    let coef = 1.0 / (1000.0 * va);
    let mut v = vec![0.0; n];
    v[source] = va;
    out.voltage.push((source, va));
    for &c in order.iter().skip(1) {
        let k = parent[c].expect("non-root has a parent line");
        let l = net.line(k);
        let (i, j) = net.line_ends(k);
        // Positive flow runs from `from_bus` (i) to `to_bus` (j).
        let (p, q) = if j == c {
            (sub_p[c], sub_q[c])
        } else {
            (-sub_p[c], -sub_q[c])
        };
        if p.abs() > l.p_max_kw + TOL {
            out.violations.push(Violation::new(
                "eq4",
                &l.id,
                format!("carries {p} kW, cap {}", l.p_max_kw),
            ));
        }
        if q.abs() > l.q_max_kvar + TOL {
            out.violations.push(Violation::new(
                "eq5",
                &l.id,
                format!("carries {q} kvar, cap {}", l.q_max_kvar),
            ));
        }
        let drop = coef * (p * l.r_ohm + q * l.x_ohm);
        v[c] = if j == c { v[i] - drop } else { v[j] + drop };
        out.voltage.push((c, v[c]));
        out.flow.push((k, p, q));
    }
    for &(i, vi) in &out.voltage {
        if vi < (1.0 - cfg.delta) * va - TOL || vi > (1.0 + cfg.delta) * va + TOL {
            out.violations.push(Violation::new(
                "eq13",
                &net.bus(i).id,
                format!("voltage {vi} kV outside the band around {va} kV"),
            ));
        }
    }
    out
}

/// Checks a full switch configuration against the operational rules.
pub fn verify_power(
    net: &CoupledNetwork,
    sc: &Scenario,
    cfg: &FormulationConfig,
    line_closed: &[bool],
    load_on: &[bool],
) -> PowerVerdict {
    let mut verdict = PowerVerdict::default();
    for (k, &closed) in line_closed.iter().enumerate() {
        if closed && !line_permitted(net, sc, k) {
            verdict.violations.push(Violation::new(
                "eq1",
                &net.line(k).id,
                "closed although the line or an end bus is damaged",
            ));
        }
    }

    let isl = Islands::new(net, line_closed);
    let n = net.power.buses.len();
    for i in 0..n {
        if isl.root[i] != i || isl.lines[i] == 0 {
            continue;
        }
        let id = &net.bus(i).id;
        if isl.cyclic[i] {
            verdict
                .violations
                .push(Violation::new("eq20", id, "closed lines form a cycle"));
        } else if isl.sources[i] == 0 {
            verdict
                .violations
                .push(Violation::new("eq20", id, "island has no source"));
        } else if isl.sources[i] > 1 {
            verdict.violations.push(Violation::new(
                "one-DG rule",
                id,
                format!("island joins {} sources", isl.sources[i]),
            ));
        }
    }

    let live = live_buses(net, sc, line_closed);
    for i in 0..n {
        let b = net.bus(i);
        if load_on[i] && !live[i] {
            verdict
                .violations
                .push(Violation::new("eq17", &b.id, "load served on a dead bus"));
        }
        if !b.has_load_switch && load_on[i] != live[i] {
            verdict.violations.push(Violation::new(
                "switchless load",
                &b.id,
                "bus without a load switch must follow its energization",
            ));
        }
    }

    for s in net.source_buses() {
        if !live[s] {
            continue;
        }
        let r = isl.root[s];
        if isl.lines[r] == 0 && !load_on[s] {
            continue;
        }
        let flow = island_flow(net, cfg, line_closed, load_on, s);
        verdict.violations.extend(flow.violations);
        for (i, vi) in flow.voltage {
            verdict.voltage_kv.insert(net.bus(i).id.clone(), vi);
            verdict.energized.insert(net.bus(i).id.clone());
        }
        for (k, p, q) in flow.flow {
            verdict.flow.insert(net.line(k).id.clone(), (p, q));
        }
    }
    for i in 0..n {
        if load_on[i] && live[i] {
            verdict.served_kw += net.bus(i).p_load_kw;
            verdict.weighted += net.bus(i).weighted_load();
        }
    }
    verdict
}
