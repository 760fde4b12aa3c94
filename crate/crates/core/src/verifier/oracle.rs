//! Exhaustive reference solver for tiny instances.
//!
//! Enumerates which terminal sets can be routed at once, then every
//! admissible line configuration and load subset. Shares no code with the
//! MILP builders.

use super::power::island_flow;
use super::TOL;
use crate::error::GuardError;
use crate::formulation::{lcc_bounds, FormulationConfig, StageState};
use crate::grid::{line_permitted, Islands};
use crate::netmodel::{CoupledNetwork, NodeKind, Scenario};

pub const ORACLE_MAX_LINES: usize = 8;
pub const ORACLE_MAX_TERMINALS: usize = 8;
pub const ORACLE_MAX_NODES: usize = 12;
const ORACLE_MAX_BUSES: usize = 12;

#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    /// Weighted pickup of the best configuration.
    pub weighted: f64,
    pub line_closed: Vec<bool>,
    pub load_on: Vec<bool>,
    /// Communication states per terminal ordinal that admit the optimum.
    pub comm_state: Vec<bool>,
}

struct Path {
    nodes: Vec<usize>,
    links: Vec<usize>,
}

/// All simple terminal-to-center paths relaying only through forwarders,
/// within the delay cap.
fn paths_of(net: &CoupledNetwork, sc: &Scenario, t: usize) -> Vec<Path> {
    let spec = net.node(t).terminal().expect("terminal");
    let mut out = Vec::new();
    if !sc.node_ok(&net.node(t).id) {
        return out;
    }
    let mut nodes = vec![t];
    let mut links = Vec::new();
    fn walk(
        net: &CoupledNetwork,
        sc: &Scenario,
        cap: f64,
        delay: f64,
        nodes: &mut Vec<usize>,
        links: &mut Vec<usize>,
        out: &mut Vec<Path>,
    ) {
        let at = *nodes.last().expect("non-empty");
        for &l in net.links_at(at) {
            if !sc.link_ok(&net.link(l).id) {
                continue;
            }
            let (a, b) = net.link_ends(l);
            let next = if a == at { b } else { a };
            let node = net.node(next);
            if nodes.contains(&next) || !sc.node_ok(&node.id) {
                continue;
            }
            let d = delay + net.link(l).prop_delay_ms + node.forward_delay_ms;
            if d > cap + TOL {
                continue;
            }
            match node.kind {
                NodeKind::Terminal(_) => {}
                NodeKind::Center => {
                    let mut ns = nodes.clone();
                    ns.push(next);
                    let mut ls = links.clone();
                    ls.push(l);
                    out.push(Path {
                        nodes: ns,
                        links: ls,
                    });
                }
                NodeKind::Forwarder => {
                    nodes.push(next);
                    links.push(l);
                    walk(net, sc, cap, d, nodes, links, out);
                    nodes.pop();
                    links.pop();
                }
            }
        }
    }
    walk(
        net,
        sc,
        spec.delay_cap_ms,
        0.0,
        &mut nodes,
        &mut links,
        &mut out,
    );
    out
}

/// Whether the terminals in `mask` can all be routed simultaneously.
fn routable(net: &CoupledNetwork, paths: &[Vec<Path>], mask: u32) -> bool {
    let members: Vec<usize> = (0..paths.len()).filter(|&t| mask >> t & 1 == 1).collect();
    let mut node_load = vec![0.0; net.comm.nodes.len()];
    let mut link_load = vec![0.0; net.comm.links.len()];
    fn assign(
        net: &CoupledNetwork,
        paths: &[Vec<Path>],
        members: &[usize],
        node_load: &mut [f64],
        link_load: &mut [f64],
    ) -> bool {
        let Some((&t, rest)) = members.split_first() else {
            return true;
        };
        let w = net
            .node(net.terminals()[t])
            .terminal()
            .map_or(0.0, |s| s.required_bandwidth_mbps);
        for p in &paths[t] {
            let fits = p
                .nodes
                .iter()
                .all(|&m| node_load[m] + w <= net.node(m).bandwidth_cap_mbps + TOL)
                && p.links
                    .iter()
                    .all(|&l| link_load[l] + w <= net.link(l).bandwidth_cap_mbps + TOL);
            if !fits {
                continue;
            }
            p.nodes.iter().for_each(|&m| node_load[m] += w);
            p.links.iter().for_each(|&l| link_load[l] += w);
            let ok = assign(net, paths, rest, node_load, link_load);
            p.nodes.iter().for_each(|&m| node_load[m] -= w);
            p.links.iter().for_each(|&l| link_load[l] -= w);
            if ok {
                return true;
            }
        }
        false
    }
    assign(net, paths, &members, &mut node_load, &mut link_load)
}

/// Inclusion-maximal routable terminal sets.
fn maximal_sets(net: &CoupledNetwork, sc: &Scenario) -> Vec<u32> {
    let nt = net.terminals().len();
    let paths: Vec<Vec<Path>> = net
        .terminals()
        .iter()
        .map(|&t| paths_of(net, sc, t))
        .collect();
    let total = 1u32 << nt;
    let mut ok = vec![false; total as usize];
    ok[0] = true;
    for mask in 1..total {
        let subsets_ok = (0..nt)
            .filter(|&t| mask >> t & 1 == 1)
            .all(|t| ok[(mask & !(1 << t)) as usize]);
        ok[mask as usize] = subsets_ok && routable(net, &paths, mask);
    }
    (0..total)
        .filter(|&m| ok[m as usize])
        .filter(|&m| (0..nt).all(|t| m >> t & 1 == 1 || !ok[(m | 1 << t) as usize]))
        .collect()
}

fn check_guards(net: &CoupledNetwork, stage: &StageState) -> Result<(), GuardError> {
    let controllable = net
        .power
        .lines
        .iter()
        .filter(|l| l.is_controllable())
        .count();
    let _ = stage;
    let checks = [
        ("controllable lines", controllable, ORACLE_MAX_LINES),
        ("terminals", net.terminals().len(), ORACLE_MAX_TERMINALS),
        (
            "communication nodes",
            net.comm.nodes.len(),
            ORACLE_MAX_NODES,
        ),
        ("buses", net.power.buses.len(), ORACLE_MAX_BUSES),
    ];
    for (what, n, max) in checks {
        if n > max {
            return Err(GuardError(format!(
                "{n} {what} exceed the oracle limit of {max}"
            )));
        }
    }
    Ok(())
}

/// Best weighted pickup for one stage, or `None` when no configuration
/// satisfies the fixed parts (latched loads, non-controllable lines).
pub fn oracle_solve(
    net: &CoupledNetwork,
    sc: &Scenario,
    stage: &StageState,
    cfg: &FormulationConfig,
) -> Result<Option<OracleResult>, GuardError> {
    check_guards(net, stage)?;
    let mut best: Option<OracleResult> = None;
    for mask in maximal_sets(net, sc) {
        let s: Vec<bool> = (0..net.terminals().len())
            .map(|t| mask >> t & 1 == 1)
            .collect();
        if let Some(r) = best_for_states(net, sc, stage, cfg, &s) {
            if best.as_ref().is_none_or(|b| r.weighted > b.weighted + TOL) {
                best = Some(r);
            }
        }
    }
    Ok(best)
}

fn state_of_bus(net: &CoupledNetwork, s: &[bool], i: usize) -> f64 {
    match net.terminal_of(i) {
        None => 1.0,
        Some(m) => {
            let t = net
                .terminals()
                .iter()
                .position(|&x| x == m)
                .expect("terminal");
            if s[t] {
                1.0
            } else {
                0.0
            }
        }
    }
}

fn best_for_states(
    net: &CoupledNetwork,
    sc: &Scenario,
    stage: &StageState,
    cfg: &FormulationConfig,
    s: &[bool],
) -> Option<OracleResult> {
    let nl = net.power.lines.len();
    let mut choices: Vec<Vec<bool>> = Vec::with_capacity(nl);
    for (k, l) in net.power.lines.iter().enumerate() {
        let prior = stage.line_closed(&l.id) && line_permitted(net, sc, k);
        let allowed: Vec<bool> = if !l.is_controllable() {
            vec![prior]
        } else {
            let (i, j) = net.line_ends(k);
            let (lb, ub) = lcc_bounds(
                prior,
                l.switch_at_from,
                l.switch_at_to,
                state_of_bus(net, s, i),
                state_of_bus(net, s, j),
                cfg.require_both_ends_observed_to_close,
            );
            [false, true]
                .into_iter()
                .filter(|&b| {
                    let x = if b { 1.0 } else { 0.0 };
                    lb <= x + TOL && x <= ub + TOL && (!b || line_permitted(net, sc, k))
                })
                .collect()
        };
        if allowed.is_empty() {
            return None;
        }
        choices.push(allowed);
    }

    let mut best: Option<OracleResult> = None;
    let mut idx = vec![0usize; nl];
    loop {
        let closed: Vec<bool> = (0..nl).map(|k| choices[k][idx[k]]).collect();
        if let Some((weighted, load_on)) = best_loads(net, sc, stage, cfg, s, &closed) {
            if best.as_ref().is_none_or(|b| weighted > b.weighted + TOL) {
                best = Some(OracleResult {
                    weighted,
                    line_closed: closed,
                    load_on,
                    comm_state: s.to_vec(),
                });
            }
        }
        // Odometer over the admissible line states.
        let mut k = 0;
        while k < nl {
            idx[k] += 1;
            if idx[k] < choices[k].len() {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
        if k == nl {
            break;
        }
    }
    best
}

/// Best load subset under a fixed line configuration.
fn best_loads(
    net: &CoupledNetwork,
    sc: &Scenario,
    stage: &StageState,
    cfg: &FormulationConfig,
    s: &[bool],
    closed: &[bool],
) -> Option<(f64, Vec<bool>)> {
    let n = net.power.buses.len();
    let isl = Islands::new(net, closed);
    let mut broken = vec![false; n];
    for i in 0..n {
        if !sc.bus_ok(&net.bus(i).id) {
            broken[isl.root[i]] = true;
        }
    }
    for r in 0..n {
        if isl.root[r] == r && isl.lines[r] > 0 && !isl.is_fed_tree(r) {
            return None;
        }
    }
    let live: Vec<bool> = (0..n)
        .map(|i| isl.is_fed_tree(i) && !broken[isl.root[i]])
        .collect();

    // Per bus: Some(v) when forced, None when free.
    let mut forced: Vec<Option<bool>> = vec![None; n];
    for i in 0..n {
        let b = net.bus(i);
        let latched = stage.load_on(&b.id);
        let blind =
            cfg.enforce_load_switch_comm && b.has_load_switch && state_of_bus(net, s, i) < 0.5;
        forced[i] = if !live[i] {
            if latched {
                return None;
            }
            Some(false)
        } else if latched || !b.has_load_switch {
            Some(true)
        } else if blind {
            Some(false)
        } else {
            None
        };
    }

    let mut load_on = vec![false; n];
    let mut weighted = 0.0;
    for src in net.source_buses() {
        if !live[src] {
            continue;
        }
        let r = isl.root[src];
        let members: Vec<usize> = (0..n).filter(|&i| isl.root[i] == r).collect();
        let free: Vec<usize> = members
            .iter()
            .copied()
            .filter(|&i| forced[i].is_none())
            .collect();
        let mut best: Option<(f64, Vec<bool>)> = None;
        for bits in 0u32..(1 << free.len()) {
            let mut trial = vec![false; n];
            for &i in &members {
                trial[i] = forced[i].unwrap_or(false);
            }
            for (x, &i) in free.iter().enumerate() {
                trial[i] = bits >> x & 1 == 1;
            }
            let w: f64 = members
                .iter()
                .filter(|&&i| trial[i])
                .map(|&i| net.bus(i).weighted_load())
                .sum();
            if best.as_ref().is_some_and(|(bw, _)| w <= *bw + TOL) {
                continue;
            }
            if island_flow(net, cfg, closed, &trial, src)
                .violations
                .is_empty()
            {
                best = Some((w, trial));
            }
        }
        let (w, trial) = best?;
        weighted += w;
        for &i in &members {
            load_on[i] = trial[i];
        }
    }
    Some((weighted, load_on))
}
