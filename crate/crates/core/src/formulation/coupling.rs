//! Line control coupling (`eq35`), the objective, and the delay weight.

use milp::{LinExpr, Sense, VarId};

use super::{Formulation, Instance};
use crate::error::FormulationError;
use crate::netmodel::CoupledNetwork;

/// Where the communication state of each terminal comes from.
#[derive(Debug, Clone, Copy)]
pub enum CommStates<'a> {
    /// Decision variables created by [`super::build_dfc`].
    Routed,
    /// Fixed values per terminal ordinal.
    Frozen(&'a [bool]),
}

/// Bounds on the closed state of a controllable line given its prior state,
/// switch placement and end-bus communication states.
///
/// With `both_ends` the upper bound is `prior + (s_i + s_j) / 2`: a line may
/// only close when both ends are observed. Otherwise only the switched ends
/// count, weighted by the number of switches.
pub fn lcc_bounds(
    prior: bool,
    switch_i: bool,
    switch_j: bool,
    s_i: f64,
    s_j: f64,
    both_ends: bool,
) -> (f64, f64) {
    let w = |x: bool| if x { 1.0 } else { 0.0 };
    let varpi = w(prior);
    let lb = varpi - (w(switch_i) * s_i + w(switch_j) * s_j);
    let ub = if both_ends {
        varpi + 0.5 * (s_i + s_j)
    } else {
        varpi + (w(switch_i) * s_i + w(switch_j) * s_j) / (w(switch_i) + w(switch_j))
    };
    (lb, ub)
}

enum StateTerm {
    Var(VarId),
    Const(f64),
}

fn state_of(inst: &Instance<'_>, states: CommStates<'_>, f: &Formulation, bus: usize) -> StateTerm {
    // Unmonitored ends impose no requirement.
    let Some(node) = inst.net.terminal_of(bus) else {
        return StateTerm::Const(1.0);
    };
    let t = inst
        .net
        .terminals()
        .iter()
        .position(|&m| m == node)
        .expect("coupled node is a terminal");
    match states {
        CommStates::Routed => StateTerm::Var(f.comm.as_ref().expect("checked").comm_state[t]),
        CommStates::Frozen(s) => StateTerm::Const(if s[t] { 1.0 } else { 0.0 }),
    }
}

fn add_state(e: &mut LinExpr, rhs: &mut f64, term: &StateTerm, coef: f64) {
    match *term {
        StateTerm::Var(v) => e.add_term(v, coef),
        StateTerm::Const(c) => *rhs -= coef * c,
    }
}

/// Switch operations need the adjacent terminals to communicate. Lines
/// without switches keep their prior state.
pub fn build_lcc(
    inst: &Instance<'_>,
    states: CommStates<'_>,
    f: &mut Formulation,
) -> Result<(), FormulationError> {
    let net = inst.net;
    let pv = f.power_vars("build_lcc")?.clone();
    if matches!(states, CommStates::Routed) {
        f.comm_vars("build_lcc")?;
    }
    if let CommStates::Frozen(s) = states {
        if s.len() != net.terminals().len() {
            return Err(FormulationError::Config(format!(
                "{} frozen communication states for {} terminals",
                s.len(),
                net.terminals().len()
            )));
        }
    }
    let both = inst.config.require_both_ends_observed_to_close;
    let mut rows = Vec::new();
    for (k, l) in net.power.lines.iter().enumerate() {
        let prior = inst.prior_closed(k);
        if inst.stage.line_closed(&l.id) && !prior {
            f.notes.push(format!(
                "line {} is closed but damaged; requires manual isolation, planned as open",
                l.id
            ));
        }
        let b = pv.line_closed[k];
        if !l.is_controllable() {
            let v = if prior { 1.0 } else { 0.0 };
            rows.push((LinExpr::term(b, 1.0), Sense::Eq, v, "noncontrollable"));
            continue;
        }
        let (i, j) = net.line_ends(k);
        let si = state_of(inst, states, f, i);
        let sj = state_of(inst, states, f, j);
        let varpi = if prior { 1.0 } else { 0.0 };
        let w = |x: bool| if x { 1.0 } else { 0.0 };

        // b + rho_i s_i + rho_j s_j >= varpi
        let mut lo = LinExpr::term(b, 1.0);
        let mut lo_rhs = varpi;
        add_state(&mut lo, &mut lo_rhs, &si, w(l.switch_at_from));
        add_state(&mut lo, &mut lo_rhs, &sj, w(l.switch_at_to));
        rows.push((lo, Sense::Ge, lo_rhs, "eq35"));

        // b - c_i s_i - c_j s_j <= varpi
        let (ci, cj) = if both {
            (0.5, 0.5)
        } else {
            let n = w(l.switch_at_from) + w(l.switch_at_to);
            (w(l.switch_at_from) / n, w(l.switch_at_to) / n)
        };
        let mut hi = LinExpr::term(b, 1.0);
        let mut hi_rhs = varpi;
        add_state(&mut hi, &mut hi_rhs, &si, -ci);
        add_state(&mut hi, &mut hi_rhs, &sj, -cj);
        rows.push((hi, Sense::Le, hi_rhs, "eq35"));
    }
    if inst.config.enforce_load_switch_comm {
        for (i, bus) in net.power.buses.iter().enumerate() {
            if !bus.has_load_switch {
                continue;
            }
            let s = state_of(inst, states, f, i);
            let cur = if inst.stage.load_on(&bus.id) {
                1.0
            } else {
                0.0
            };
            let x = pv.load_on[i];
            // |x - cur| <= s
            let mut up = LinExpr::term(x, 1.0);
            let mut up_rhs = cur;
            add_state(&mut up, &mut up_rhs, &s, -1.0);
            rows.push((up, Sense::Le, up_rhs, "lsc"));
            let mut down = LinExpr::term(x, 1.0);
            let mut down_rhs = cur;
            add_state(&mut down, &mut down_rhs, &s, 1.0);
            rows.push((down, Sense::Ge, down_rhs, "lsc"));
        }
    }
    for (e, sense, rhs, tag) in rows {
        f.model.add_constraint(e, sense, rhs, tag)?;
    }
    Ok(())
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Greatest common divisor of the positive weighted loads, resolved to
/// 1e-6. Any two pickup values differ by a multiple of it.
pub fn load_quantum(net: &CoupledNetwork) -> Result<f64, FormulationError> {
    const SCALE: f64 = 1e6;
    let mut g = 0u64;
    for b in &net.power.buses {
        let w = b.weighted_load();
        if w <= 0.0 {
            continue;
        }
        let scaled = w * SCALE;
        let r = scaled.round();
        if (scaled - r).abs() > 1e-6 * scaled.max(1.0) || r > u64::MAX as f64 / 2.0 {
            return Err(FormulationError::NotQuantized(w, b.id.clone()));
        }
        g = gcd(g, r as u64);
    }
    Ok(if g == 0 { 1.0 } else { g as f64 / SCALE })
}

fn total_delay_cap(net: &CoupledNetwork) -> f64 {
    net.terminals()
        .iter()
        .filter_map(|&t| net.node(t).terminal())
        .map(|t| t.delay_cap_ms)
        .sum()
}

/// Delay weight such that the whole delay term stays below one load
/// quantum: `0.9 * quantum / sum of delay caps`.
pub fn derive_epsilon(net: &CoupledNetwork) -> Result<f64, FormulationError> {
    let cap = total_delay_cap(net);
    if cap <= 0.0 {
        return Ok(0.0);
    }
    Ok(0.9 * load_quantum(net)? / cap)
}

/// Maximizes weighted pickup, minus `epsilon` times total delay when
/// routing variables are present.
pub fn build_objective(inst: &Instance<'_>, f: &mut Formulation) -> Result<(), FormulationError> {
    let net = inst.net;
    let pv = f.power_vars("build_objective")?;
    let mut obj = LinExpr::new();
    for (i, b) in net.power.buses.iter().enumerate() {
        obj.add_term(pv.load_on[i], b.weighted_load());
    }
    let mut epsilon = 0.0;
    if let Some(cv) = &f.comm {
        epsilon = match inst.config.epsilon {
            Some(eps) => {
                let cap = total_delay_cap(net);
                let limit = load_quantum(net)?;
                if !(eps >= 0.0) || eps * cap >= limit {
                    return Err(FormulationError::EpsilonTooLarge {
                        epsilon: eps,
                        limit: limit / cap.max(f64::MIN_POSITIVE),
                    });
                }
                eps
            }
            None => derive_epsilon(net)?,
        };
        for &e in &cv.delay {
            obj.add_term(e, -epsilon);
        }
    }
    f.epsilon = epsilon;
    f.model.set_objective(obj)?;
    Ok(())
}

/// Number of communicating terminals, minus a delay tie-break that can
/// never trade away a terminal.
pub(crate) fn build_count_objective(
    inst: &Instance<'_>,
    f: &mut Formulation,
) -> Result<(), FormulationError> {
    let cv = f.comm_vars("build_count_objective")?;
    let cap = total_delay_cap(inst.net);
    let epsilon = if cap > 0.0 { 0.9 / cap } else { 0.0 };
    let mut obj = LinExpr::new();
    for &s in &cv.comm_state {
        obj.add_term(s, 1.0);
    }
    for &e in &cv.delay {
        obj.add_term(e, -epsilon);
    }
    f.epsilon = epsilon;
    f.model.set_objective(obj)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Feasible closed states implied by the bounds.
    fn feasible(lb: f64, ub: f64) -> Vec<u8> {
        [0u8, 1]
            .into_iter()
            .filter(|&b| lb <= b as f64 && b as f64 <= ub)
            .collect()
    }

    #[test]
    fn closing_with_both_ends_observed() {
        let (lb, ub) = lcc_bounds(false, true, true, 1.0, 1.0, true);
        assert_eq!(feasible(lb, ub), vec![0, 1]);
    }

    #[test]
    fn closing_with_one_end_blind() {
        let (_, ub) = lcc_bounds(false, true, true, 1.0, 0.0, true);
        assert_eq!(ub, 0.5);
        assert_eq!(feasible(0.0, ub), vec![0]);
    }

    #[test]
    fn opening_single_switch() {
        let (lb, ub) = lcc_bounds(true, true, false, 1.0, 1.0, true);
        assert_eq!(lb, 0.0);
        assert_eq!(feasible(lb, ub), vec![0, 1]);
        let (lb, ub) = lcc_bounds(true, true, false, 0.0, 1.0, true);
        assert_eq!(lb, 1.0);
        assert_eq!(feasible(lb, ub), vec![1]);
    }

    #[test]
    fn quantum_is_gcd() {
        use crate::formulation::testnet::path3;
        let (net, _) = path3();
        // Loads 60 and 90 kW.
        assert_eq!(load_quantum(&net).unwrap(), 30.0);
    }
}
