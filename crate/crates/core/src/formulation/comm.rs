//! Communication-side families: per-terminal routing (`eq21`..`eq27`) and
//! bandwidth / delay limits (`eq28`..`eq33`).

use milp::{LinExpr, Sense, VarId};

use super::{CommVars, Formulation, Instance};
use crate::error::FormulationError;
use crate::netmodel::NodeKind;

fn ok_value(ok: bool) -> f64 {
    if ok {
        1.0
    } else {
        0.0
    }
}

const UNREACHED: f64 = f64::INFINITY;

/// Minimum delay from `from` to every node, counting link delays and the
/// forwarding delay of each non-terminal node entered. Only working
/// elements with room for `need` Mbps are used, and only `from` and
/// forwarders pass traffic on.
fn delays_from(inst: &Instance<'_>, from: usize, need: f64) -> Vec<f64> {
    let net = inst.net;
    let sc = inst.scenario;
    let n = net.comm.nodes.len();
    let usable_node = |v: usize| {
        let node = net.node(v);
        sc.node_ok(&node.id) && node.bandwidth_cap_mbps + TOL >= need
    };
    let mut dist = vec![UNREACHED; n];
    let mut done = vec![false; n];
    if !usable_node(from) {
        return dist;
    }
    dist[from] = 0.0;
    while let Some(u) = (0..n)
        .filter(|&v| !done[v] && dist[v] < UNREACHED)
        .min_by(|&a, &b| dist[a].total_cmp(&dist[b]))
    {
        done[u] = true;
        if u != from && !matches!(net.node(u).kind, NodeKind::Forwarder) {
            continue;
        }
        for &l in net.links_at(u) {
            let link = net.link(l);
            if !sc.link_ok(&link.id) || link.bandwidth_cap_mbps + TOL < need {
                continue;
            }
            let (a, b) = net.link_ends(l);
            let v = if a == u { b } else { a };
            if !usable_node(v) {
                continue;
            }
            let enter = if net.is_terminal(v) {
                0.0
            } else {
                net.node(v).forward_delay_ms
            };
            let d = dist[u] + link.prop_delay_ms + enter;
            if d < dist[v] {
                dist[v] = d;
            }
        }
    }
    dist
}

const TOL: f64 = 1e-9;

/// Nodes and links that lie on some working walk from the terminal to the
/// center within its delay cap. All other routing variables of the
/// terminal are zero in every feasible solution and are left out. With
/// pruning off every element is kept.
fn usable_elements(inst: &Instance<'_>, term: usize, center: usize) -> (Vec<bool>, Vec<bool>) {
    let net = inst.net;
    if !inst.config.prune_routing {
        return (
            vec![true; net.comm.nodes.len()],
            vec![true; net.comm.links.len()],
        );
    }
    let spec = net
        .node(term)
        .terminal()
        .expect("terminal list holds terminals");
    let need = spec.required_bandwidth_mbps;
    let cap = spec.delay_cap_ms + TOL;
    let out = delays_from(inst, term, need);
    // Delay from the center back to each node, entering forwarding delays of
    // the far end; adding the center's own delay gives the delay still to go
    // after leaving a node.
    let back = delays_from(inst, center, need);
    let fwd = |v: usize| {
        if net.is_terminal(v) {
            0.0
        } else {
            net.node(v).forward_delay_ms
        }
    };
    let to_go = |v: usize| back[v] - fwd(v) + fwd(center);
    let relay = |v: usize| matches!(net.node(v).kind, NodeKind::Forwarder);

    let mut links = vec![false; net.comm.links.len()];
    let mut nodes = vec![false; net.comm.nodes.len()];
    for (l, link) in net.comm.links.iter().enumerate() {
        let (a, b) = net.link_ends(l);
        for (u, v) in [(a, b), (b, a)] {
            let enters = (v == center || relay(v)) && (u == term || relay(u));
            if enters && out[u] + link.prop_delay_ms + fwd(v) + to_go(v) <= cap {
                links[l] = true;
                nodes[u] = true;
                nodes[v] = true;
            }
        }
    }
    (nodes, links)
}

fn row(terms: impl IntoIterator<Item = (Option<VarId>, f64)>) -> LinExpr {
    terms
        .into_iter()
        .filter_map(|(v, c)| v.map(|v| (v, c)))
        .collect()
}

/// Routing: each communicating terminal's data uses working elements and
/// forms a path from the terminal to the center.
pub fn build_dfc(inst: &Instance<'_>, f: &mut Formulation) -> Result<(), FormulationError> {
    let net = inst.net;
    let sc = inst.scenario;
    let terms = net.terminals().to_vec();
    let center = net
        .center()
        .ok_or_else(|| FormulationError::Config("communication network has no center".into()))?;
    let m = &mut f.model;

    let mut cv = CommVars {
        node_route: Vec::with_capacity(terms.len()),
        link_route: Vec::with_capacity(terms.len()),
        comm_state: Vec::with_capacity(terms.len()),
        node_load: Vec::new(),
        link_load: Vec::new(),
        delay: Vec::new(),
    };
    for &t in &terms {
        let tid = &net.node(t).id;
        let (use_node, use_link) = usable_elements(inst, t, center);
        let mut nodes = Vec::with_capacity(use_node.len());
        for (node, &keep) in net.comm.nodes.iter().zip(&use_node) {
            nodes.push(match keep {
                true => Some(m.binary(format!("hn[{tid},{}]", node.id))?),
                false => None,
            });
        }
        let mut links = Vec::with_capacity(use_link.len());
        for (link, &keep) in net.comm.links.iter().zip(&use_link) {
            links.push(match keep {
                true => Some(m.binary(format!("hl[{tid},{}]", link.id))?),
                false => None,
            });
        }
        cv.node_route.push(nodes);
        cv.link_route.push(links);
        cv.comm_state.push(m.binary(format!("s[{tid}]"))?);
    }

    for t in 0..terms.len() {
        for (l, link) in net.comm.links.iter().enumerate() {
            if let Some(v) = cv.link_route[t][l] {
                let ok = ok_value(sc.link_ok(&link.id));
                m.add_constraint(LinExpr::term(v, 1.0), Sense::Le, ok, "eq21")?;
            }
        }
    }
    for t in 0..terms.len() {
        for (n, node) in net.comm.nodes.iter().enumerate() {
            if let Some(v) = cv.node_route[t][n] {
                let ok = ok_value(sc.node_ok(&node.id));
                m.add_constraint(LinExpr::term(v, 1.0), Sense::Le, ok, "eq22")?;
            }
        }
    }

    let degree = |t: usize, n: usize, node_coef: f64| -> LinExpr {
        let links = net.links_at(n).iter().map(|&l| (cv.link_route[t][l], 1.0));
        row(links.chain([(cv.node_route[t][n], node_coef)]))
    };
    for t in 0..terms.len() {
        let e = degree(t, center, -1.0);
        if !e.is_empty() {
            m.add_constraint(e, Sense::Eq, 0.0, "eq23")?;
        }
    }
    for (n, node) in net.comm.nodes.iter().enumerate() {
        if matches!(node.kind, NodeKind::Forwarder) {
            for t in 0..terms.len() {
                let e = degree(t, n, -2.0);
                if !e.is_empty() {
                    m.add_constraint(e, Sense::Eq, 0.0, "eq24")?;
                }
            }
        }
    }
    for (u, &n) in terms.iter().enumerate() {
        for t in 0..terms.len() {
            let e = degree(t, n, -1.0);
            if !e.is_empty() {
                m.add_constraint(e, Sense::Eq, 0.0, "eq25")?;
            }
            let mut own = row([(cv.node_route[t][n], 1.0)]);
            if t == u {
                own.add_term(cv.comm_state[u], -1.0);
            }
            if !own.is_empty() {
                m.add_constraint(own, Sense::Eq, 0.0, "eq25")?;
            }
        }
    }
    for t in 0..terms.len() {
        let e = row([
            (Some(cv.comm_state[t]), 1.0),
            (cv.node_route[t][center], -1.0),
        ]);
        m.add_constraint(e, Sense::Eq, 0.0, "eq26")?;
    }
    for (t, &n) in terms.iter().enumerate() {
        let ok = ok_value(sc.node_ok(&net.node(n).id));
        m.add_constraint(LinExpr::term(cv.comm_state[t], 1.0), Sense::Le, ok, "eq27")?;
    }

    f.comm = Some(cv);
    Ok(())
}

/// Bandwidth consumption per node and link, and end-to-end delay per
/// terminal, each within its cap.
pub fn build_bdc(inst: &Instance<'_>, f: &mut Formulation) -> Result<(), FormulationError> {
    let net = inst.net;
    let mut cv = f.comm_vars("build_bdc")?.clone();
    let terms = net.terminals().to_vec();
    let required: Vec<f64> = terms
        .iter()
        .map(|&t| {
            net.node(t)
                .terminal()
                .map_or(0.0, |s| s.required_bandwidth_mbps)
        })
        .collect();
    let m = &mut f.model;

    for (n, node) in net.comm.nodes.iter().enumerate() {
        let d = m.continuous(format!("dn[{}]", node.id), 0.0, f64::INFINITY)?;
        let used = required
            .iter()
            .enumerate()
            .map(|(t, &w)| (cv.node_route[t][n], -w));
        let e = row(used).with(d, 1.0);
        m.add_constraint(e, Sense::Eq, 0.0, "eq28")?;
        m.add_constraint(
            LinExpr::term(d, 1.0),
            Sense::Le,
            node.bandwidth_cap_mbps,
            "eq29",
        )?;
        cv.node_load.push(d);
    }
    for (l, link) in net.comm.links.iter().enumerate() {
        let d = m.continuous(format!("dl[{}]", link.id), 0.0, f64::INFINITY)?;
        let used = required
            .iter()
            .enumerate()
            .map(|(t, &w)| (cv.link_route[t][l], -w));
        let e = row(used).with(d, 1.0);
        m.add_constraint(e, Sense::Eq, 0.0, "eq30")?;
        m.add_constraint(
            LinExpr::term(d, 1.0),
            Sense::Le,
            link.bandwidth_cap_mbps,
            "eq31",
        )?;
        cv.link_load.push(d);
    }
    for (t, &tn) in terms.iter().enumerate() {
        let spec = net
            .node(tn)
            .terminal()
            .expect("terminal list holds terminals");
        let e_var = m.continuous(format!("e[{}]", net.node(tn).id), 0.0, f64::INFINITY)?;
        let links = net
            .comm
            .links
            .iter()
            .enumerate()
            .map(|(l, link)| (cv.link_route[t][l], -link.prop_delay_ms));
        // Forwarding delay counts at every non-terminal node, center included.
        let nodes = net
            .comm
            .nodes
            .iter()
            .enumerate()
            .filter(|(_, node)| !matches!(node.kind, NodeKind::Terminal(_)))
            .map(|(n, node)| (cv.node_route[t][n], -node.forward_delay_ms));
        let e = row(links.chain(nodes)).with(e_var, 1.0);
        m.add_constraint(e, Sense::Eq, 0.0, "eq32")?;
        m.add_constraint(
            LinExpr::term(e_var, 1.0),
            Sense::Le,
            spec.delay_cap_ms,
            "eq33",
        )?;
        cv.delay.push(e_var);
    }

    f.comm = Some(cv);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formulation::testnet::*;
    use crate::formulation::{FormulationConfig, StageState};
    use milp::{solve, SolveOptions};

    fn comm_only(
        net: &crate::netmodel::CoupledNetwork,
        sc: &crate::netmodel::Scenario,
    ) -> Formulation {
        let stage = StageState::initial(net, sc);
        let cfg = FormulationConfig::default();
        let inst = Instance::new(net, sc, &stage, &cfg);
        let mut f = Formulation::new();
        build_dfc(&inst, &mut f).unwrap();
        build_bdc(&inst, &mut f).unwrap();
        f
    }

    fn max_states(f: &mut Formulation) -> milp::Solution {
        let cv = f.comm.clone().unwrap();
        let obj: LinExpr = cv.comm_state.iter().map(|&s| (s, 1.0)).collect();
        f.model.set_objective(obj).unwrap();
        solve(&f.model, &SolveOptions::default()).unwrap()
    }

    #[test]
    fn chain_routes_and_delay() {
        let (net, sc) = chain();
        let mut f = comm_only(&net, &sc);
        let s = max_states(&mut f);
        let cv = f.comm.clone().unwrap();
        assert_eq!(s.value(cv.comm_state[0]), 1.0);
        for l in 0..net.comm.links.len() {
            assert_eq!(s.value(cv.link_route[0][l].unwrap()), 1.0);
        }
        // Two 1 ms links plus 0.5 ms at the forwarder and at the center.
        assert!((s.value(cv.delay[0]) - 3.0).abs() < 1e-9);
    }

    #[test]
    fn broken_middle_link_silences_terminal() {
        let (net, mut sc) = chain();
        sc.link_ok.insert("FO".into(), false);
        let mut f = comm_only(&net, &sc);
        let s = max_states(&mut f);
        assert_eq!(s.value(f.comm.as_ref().unwrap().comm_state[0]), 0.0);
    }

    #[test]
    fn ring_reroutes_the_long_way() {
        let (net, mut sc) = ring4();
        sc.link_ok.insert("r12".into(), false);
        let mut f = comm_only(&net, &sc);
        let s = max_states(&mut f);
        let cv = f.comm.clone().unwrap();
        assert_eq!(s.value(cv.comm_state[0]), 1.0);
        let used: Vec<&str> = (0..net.comm.links.len())
            .filter(|&l| cv.link_route[0][l].is_some_and(|v| s.is_one(v)))
            .map(|l| net.link(l).id.as_str())
            .collect();
        assert_eq!(used, vec!["r23", "r34", "r41", "t", "up"]);
    }

    #[test]
    fn shared_link_admits_one_of_two() {
        let (net, sc) = two_terminals_shared(3.0);
        let mut f = comm_only(&net, &sc);
        let s = max_states(&mut f);
        assert!((s.objective_value - 1.0).abs() < 1e-9);
    }
}
