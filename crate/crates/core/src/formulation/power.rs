//! Power-side families: operational limits with the linearized voltage drop
//! (`eq1`..`eq14`) and single-commodity connectivity (`eq15`..`eq20`).

use milp::{LinExpr, Sense, VarId, VarKind};

use super::{FlowVars, Formulation, Instance, PowerVars};
use crate::error::FormulationError;

/// Voltage drop (kV) per kW·ohm at reference voltage `v_ref_kv`.
pub(crate) fn drop_coefficient(v_ref_kv: f64) -> f64 {
    1.0 / (1000.0 * v_ref_kv)
}

/// Smallest big-M that deactivates the drop equation on an open line.
pub(crate) fn voltage_big_m(inst: &Instance<'_>) -> f64 {
    let cfg = inst.config;
    let c = drop_coefficient(cfg.v_ref_kv);
    let worst = inst
        .net
        .power
        .lines
        .iter()
        .map(|l| (l.p_max_kw * l.r_ohm + l.q_max_kvar * l.x_ohm) * c)
        .fold(0.0, f64::max);
    2.0 * cfg.delta * cfg.v_ref_kv + worst
}

fn check_config(inst: &Instance<'_>) -> Result<(), FormulationError> {
    let cfg = inst.config;
    if !(cfg.v_ref_kv > 0.0 && cfg.v_ref_kv.is_finite()) {
        return Err(FormulationError::Config(format!(
            "reference voltage must be positive, got {}",
            cfg.v_ref_kv
        )));
    }
    if !(cfg.delta >= 0.0 && cfg.delta < 1.0) {
        return Err(FormulationError::Config(format!(
            "voltage tolerance must lie in [0, 1), got {}",
            cfg.delta
        )));
    }
    for (id, &m) in &cfg.big_m_flow {
        let Some(k) = inst.net.line_idx(id) else {
            return Err(FormulationError::Config(format!(
                "big_m_flow names unknown line {id:?}"
            )));
        };
        let l = inst.net.line(k);
        if !(m >= l.p_max_kw.max(l.q_max_kvar)) {
            return Err(FormulationError::Config(format!(
                "big_m_flow for line {id:?} is below the line caps"
            )));
        }
    }
    Ok(())
}

/// Operational constraints: closability, source and line limits, flow
/// gating, nodal balance, voltage reference, band and drop.
pub fn build_doc(inst: &Instance<'_>, f: &mut Formulation) -> Result<(), FormulationError> {
    check_config(inst)?;
    let net = inst.net;
    let sc = inst.scenario;
    let cfg = inst.config;
    let m = &mut f.model;
    let n_bus = net.power.buses.len();

    let mut pv = PowerVars {
        line_closed: Vec::new(),
        load_on: Vec::new(),
        p_gen: Vec::new(),
        q_gen: Vec::new(),
        p_line: Vec::new(),
        q_line: Vec::new(),
        voltage: Vec::new(),
    };
    for l in &net.power.lines {
        pv.line_closed.push(m.binary(format!("b[{}]", l.id))?);
        pv.p_line
            .push(m.continuous(format!("p[{}]", l.id), f64::NEG_INFINITY, f64::INFINITY)?);
        pv.q_line
            .push(m.continuous(format!("q[{}]", l.id), f64::NEG_INFINITY, f64::INFINITY)?);
    }
    for b in &net.power.buses {
        pv.load_on.push(m.binary(format!("bload[{}]", b.id))?);
        pv.voltage
            .push(m.continuous(format!("v[{}]", b.id), f64::NEG_INFINITY, f64::INFINITY)?);
        if b.has_source() {
            pv.p_gen.push(Some(m.continuous(
                format!("pg[{}]", b.id),
                f64::NEG_INFINITY,
                f64::INFINITY,
            )?));
            pv.q_gen.push(Some(m.continuous(
                format!("qg[{}]", b.id),
                f64::NEG_INFINITY,
                f64::INFINITY,
            )?));
        } else {
            pv.p_gen.push(None);
            pv.q_gen.push(None);
        }
    }

    for (k, l) in net.power.lines.iter().enumerate() {
        let ok = [
            sc.line_ok(&l.id),
            sc.bus_ok(&l.from_bus),
            sc.bus_ok(&l.to_bus),
        ]
        .iter()
        .filter(|&&x| x)
        .count() as f64;
        m.add_constraint(
            LinExpr::term(pv.line_closed[k], 1.0),
            Sense::Le,
            ok / 3.0,
            "eq1",
        )?;
    }

    for (i, b) in net.power.buses.iter().enumerate() {
        if let (Some(caps), Some(pg), Some(qg)) = (&b.source, pv.p_gen[i], pv.q_gen[i]) {
            m.add_constraint(LinExpr::term(pg, 1.0), Sense::Ge, 0.0, "eq2")?;
            m.add_constraint(LinExpr::term(pg, 1.0), Sense::Le, caps.p_max_kw, "eq2")?;
            m.add_constraint(LinExpr::term(qg, 1.0), Sense::Ge, 0.0, "eq3")?;
            m.add_constraint(LinExpr::term(qg, 1.0), Sense::Le, caps.q_max_kvar, "eq3")?;
        }
    }

    for (k, l) in net.power.lines.iter().enumerate() {
        let (p, q, b) = (pv.p_line[k], pv.q_line[k], pv.line_closed[k]);
        m.add_constraint(LinExpr::term(p, 1.0), Sense::Ge, -l.p_max_kw, "eq4")?;
        m.add_constraint(LinExpr::term(p, 1.0), Sense::Le, l.p_max_kw, "eq4")?;
        m.add_constraint(LinExpr::term(q, 1.0), Sense::Ge, -l.q_max_kvar, "eq5")?;
        m.add_constraint(LinExpr::term(q, 1.0), Sense::Le, l.q_max_kvar, "eq5")?;
        let override_m = cfg.big_m_flow.get(&l.id).copied();
        let mp = override_m.unwrap_or(l.p_max_kw);
        let mq = override_m.unwrap_or(l.q_max_kvar);
        m.add_constraint(LinExpr::term(p, 1.0).with(b, -mp), Sense::Le, 0.0, "eq6")?;
        m.add_constraint(LinExpr::term(p, 1.0).with(b, mp), Sense::Ge, 0.0, "eq6")?;
        m.add_constraint(LinExpr::term(q, 1.0).with(b, -mq), Sense::Le, 0.0, "eq7")?;
        m.add_constraint(LinExpr::term(q, 1.0).with(b, mq), Sense::Ge, 0.0, "eq7")?;
    }

    for i in 0..n_bus {
        let b = net.bus(i);
        let mut ep = LinExpr::new();
        let mut eq = LinExpr::new();
        for &(k, mu) in net.lines_at(i) {
            ep.add_term(pv.p_line[k], mu as f64);
            eq.add_term(pv.q_line[k], mu as f64);
        }
        ep.add_term(pv.load_on[i], b.p_load_kw);
        eq.add_term(pv.load_on[i], b.q_load_kvar);
        match (pv.p_gen[i], pv.q_gen[i]) {
            (Some(pg), Some(qg)) => {
                ep.add_term(pg, -1.0);
                eq.add_term(qg, -1.0);
                m.add_constraint(ep, Sense::Eq, 0.0, "eq10")?;
                m.add_constraint(eq, Sense::Eq, 0.0, "eq11")?;
            }
            _ => {
                m.add_constraint(ep, Sense::Eq, 0.0, "eq8")?;
                m.add_constraint(eq, Sense::Eq, 0.0, "eq9")?;
            }
        }
    }

    let va = cfg.v_ref_kv;
    for (i, b) in net.power.buses.iter().enumerate() {
        if b.has_source() {
            m.add_constraint(LinExpr::term(pv.voltage[i], 1.0), Sense::Eq, va, "eq12")?;
        }
    }
    for i in 0..n_bus {
        let v = pv.voltage[i];
        m.add_constraint(
            LinExpr::term(v, 1.0),
            Sense::Ge,
            (1.0 - cfg.delta) * va,
            "eq13",
        )?;
        m.add_constraint(
            LinExpr::term(v, 1.0),
            Sense::Le,
            (1.0 + cfg.delta) * va,
            "eq13",
        )?;
    }

    let big_m = cfg.big_m_voltage.unwrap_or_else(|| voltage_big_m(inst));
    let c = drop_coefficient(va);
    for (k, l) in net.power.lines.iter().enumerate() {
        let (i, j) = net.line_ends(k);
        // v_i - v_j - drop(p, q) lies in [-M(1-b), M(1-b)].
        let lhs = LinExpr::term(pv.voltage[i], 1.0)
            .with(pv.voltage[j], -1.0)
            .with(pv.p_line[k], -c * l.r_ohm)
            .with(pv.q_line[k], -c * l.x_ohm);
        m.add_constraint(
            lhs.clone().with(pv.line_closed[k], -big_m),
            Sense::Ge,
            -big_m,
            "eq14",
        )?;
        m.add_constraint(lhs.with(pv.line_closed[k], big_m), Sense::Le, big_m, "eq14")?;
    }

    for (i, b) in net.power.buses.iter().enumerate() {
        if inst.stage.load_on(&b.id) {
            m.add_constraint(LinExpr::term(pv.load_on[i], 1.0), Sense::Eq, 1.0, "latch")?;
        }
    }

    f.power = Some(pv);
    Ok(())
}

/// Connectivity: commodity flow gating, equal energization across closed
/// lines, load needs energization, commodity balance and radiality.
pub fn build_dcc(inst: &Instance<'_>, f: &mut Formulation) -> Result<(), FormulationError> {
    let pv = f.power_vars("build_dcc")?.clone();
    let net = inst.net;
    let sc = inst.scenario;
    let n_bus = net.power.buses.len();
    let mf = inst.config.big_m_commodity.unwrap_or(n_bus as f64);
    let m = &mut f.model;

    let mut fv = FlowVars {
        line_flow: Vec::new(),
        bus_demand: Vec::new(),
        injection: Vec::new(),
        orientation: Vec::new(),
    };
    for l in &net.power.lines {
        fv.line_flow
            .push(m.integer(format!("fl[{}]", l.id), -mf, mf)?);
    }
    for b in &net.power.buses {
        // A failed bus can never be energized.
        let ub = if sc.bus_ok(&b.id) { 1.0 } else { 0.0 };
        let kind = if ub > 0.0 {
            VarKind::Binary
        } else {
            VarKind::Integer
        };
        fv.bus_demand
            .push(m.add_var(format!("fn[{}]", b.id), kind, 0.0, ub)?);
        fv.injection.push(if b.has_source() {
            Some(m.continuous(format!("fs[{}]", b.id), 0.0, mf)?)
        } else {
            None
        });
    }

    for k in 0..net.power.lines.len() {
        let (fl, b) = (fv.line_flow[k], pv.line_closed[k]);
        m.add_constraint(LinExpr::term(fl, 1.0).with(b, -mf), Sense::Le, 0.0, "eq15")?;
        m.add_constraint(LinExpr::term(fl, 1.0).with(b, mf), Sense::Ge, 0.0, "eq15")?;
    }
    // The energization indicators are binary, so a big-M of 1 suffices.
    for k in 0..net.power.lines.len() {
        let (i, j) = net.line_ends(k);
        let diff = LinExpr::term(fv.bus_demand[i], 1.0).with(fv.bus_demand[j], -1.0);
        let b = pv.line_closed[k];
        m.add_constraint(diff.clone().with(b, -1.0), Sense::Ge, -1.0, "eq16")?;
        m.add_constraint(diff.with(b, 1.0), Sense::Le, 1.0, "eq16")?;
    }
    for i in 0..n_bus {
        m.add_constraint(
            LinExpr::term(pv.load_on[i], 1.0).with(fv.bus_demand[i], -1.0),
            Sense::Le,
            0.0,
            "eq17",
        )?;
    }
    for i in 0..n_bus {
        let mut e = LinExpr::term(fv.bus_demand[i], 1.0);
        for &(k, mu) in net.lines_at(i) {
            e.add_term(fv.line_flow[k], mu as f64);
        }
        match fv.injection[i] {
            Some(fs) => {
                e.add_term(fs, -1.0);
                m.add_constraint(e, Sense::Eq, 0.0, "eq19")?;
            }
            None => {
                m.add_constraint(e, Sense::Eq, 0.0, "eq18")?;
            }
        }
    }
    let mut radial = LinExpr::new();
    for (i, b) in net.power.buses.iter().enumerate() {
        if !b.has_source() {
            radial.add_term(fv.bus_demand[i], 1.0);
        }
    }
    for &b in &pv.line_closed {
        radial.add_term(b, -1.0);
    }
    m.add_constraint(radial, Sense::Eq, 0.0, "eq20")?;

    for (i, b) in net.power.buses.iter().enumerate() {
        if !b.has_load_switch {
            m.add_constraint(
                LinExpr::term(pv.load_on[i], 1.0).with(fv.bus_demand[i], -1.0),
                Sense::Eq,
                0.0,
                "switchless",
            )?;
        }
    }

    if inst.config.orientation_cuts {
        fv.orientation = build_orientation(inst, &pv, &fv, m)?;
    }

    f.flow = Some(fv);
    Ok(())
}

/// Every energized component is a tree holding exactly one source, and no
/// closed line is dead. Orienting each tree away from its source gives each
/// energized non-source bus one parent line and each source none; loads
/// draw power, so flow runs from parent to child. Closed lines have both
/// ends energized.
fn build_orientation(
    inst: &Instance<'_>,
    pv: &PowerVars,
    fv: &FlowVars,
    m: &mut milp::Model,
) -> Result<Vec<(VarId, VarId)>, FormulationError> {
    let net = inst.net;
    let mut parents = vec![LinExpr::new(); net.power.buses.len()];
    let mut dirs = Vec::with_capacity(net.power.lines.len());
    for (k, l) in net.power.lines.iter().enumerate() {
        let (i, j) = net.line_ends(k);
        let b = pv.line_closed[k];
        let down = m.binary(format!("o[{},{}]", l.id, l.to_bus))?;
        let up = m.binary(format!("o[{},{}]", l.id, l.from_bus))?;
        m.add_constraint(
            LinExpr::term(down, 1.0).with(up, 1.0).with(b, -1.0),
            Sense::Eq,
            0.0,
            "orient",
        )?;
        parents[j].add_term(down, 1.0);
        parents[i].add_term(up, 1.0);
        let (p, q) = (pv.p_line[k], pv.q_line[k]);
        for (x, cap) in [(p, l.p_max_kw), (q, l.q_max_kvar)] {
            m.add_constraint(
                LinExpr::term(x, 1.0).with(down, -cap),
                Sense::Le,
                0.0,
                "orient",
            )?;
            m.add_constraint(
                LinExpr::term(x, 1.0).with(up, cap),
                Sense::Ge,
                0.0,
                "orient",
            )?;
        }
        for end in [i, j] {
            m.add_constraint(
                LinExpr::term(b, 1.0).with(fv.bus_demand[end], -1.0),
                Sense::Le,
                0.0,
                "orient",
            )?;
        }
        dirs.push((down, up));
    }
    for (i, e) in parents.into_iter().enumerate() {
        if e.is_empty() {
            continue;
        }
        let e = match net.bus(i).has_source() {
            true => e,
            false => e.with(fv.bus_demand[i], -1.0),
        };
        m.add_constraint(e, Sense::Eq, 0.0, "orient")?;
    }
    Ok(dirs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formulation::testnet::*;
    use crate::formulation::{FormulationConfig, StageState};
    use milp::{solve, SolveOptions, SolveStatus};

    #[test]
    fn damaged_line_cannot_close() {
        let (net, mut sc) = two_bus(100.0, 50.0);
        sc.line_ok.insert("ab".into(), false);
        let stage = StageState::initial(&net, &sc);
        let cfg = FormulationConfig::default();
        let inst = Instance::new(&net, &sc, &stage, &cfg);
        let mut f = Formulation::new();
        build_doc(&inst, &mut f).unwrap();
        let rows: Vec<_> = f.model.constraints_tagged("eq1").collect();
        assert_eq!(rows.len(), 1);
        assert!((rows[0].rhs - 2.0 / 3.0).abs() < 1e-12);
        let b = f.power.as_ref().unwrap().line_closed[0];
        f.model.set_objective(LinExpr::term(b, 1.0)).unwrap();
        let s = solve(&f.model, &SolveOptions::default()).unwrap();
        assert_eq!(s.value(b), 0.0);
    }

    #[test]
    fn two_bus_balance_and_drop() {
        let (net, sc) = two_bus(100.0, 50.0);
        let stage = StageState::initial(&net, &sc);
        let cfg = FormulationConfig::default();
        let inst = Instance::new(&net, &sc, &stage, &cfg);
        let mut f = Formulation::new();
        build_doc(&inst, &mut f).unwrap();
        let pv = f.power.clone().unwrap();
        let (b, load) = (pv.line_closed[0], pv.load_on[1]);
        f.model
            .add_constraint(LinExpr::term(b, 1.0), Sense::Eq, 1.0, "test")
            .unwrap();
        f.model
            .add_constraint(LinExpr::term(load, 1.0), Sense::Eq, 1.0, "test")
            .unwrap();
        let s = solve(&f.model, &SolveOptions::default()).unwrap();
        assert_eq!(s.status, SolveStatus::Optimal);
        // Line "ab" runs from the source bus to the load bus.
        assert!((s.value(pv.p_line[0]) - 100.0).abs() < 1e-6);
        assert!((s.value(pv.q_line[0]) - 50.0).abs() < 1e-6);
        let expected = 12.66 - (100.0 * 0.1 + 50.0 * 0.1) / (12.66 * 1000.0);
        assert!((s.value(pv.voltage[1]) - expected).abs() < 1e-7);
    }

    #[test]
    fn lower_voltage_references() {
        for va in [12.66, 4.16] {
            let (net, sc) = two_bus(100.0, 50.0);
            let stage = StageState::initial(&net, &sc);
            let cfg = FormulationConfig {
                v_ref_kv: va,
                ..Default::default()
            };
            let inst = Instance::new(&net, &sc, &stage, &cfg);
            let mut f = Formulation::new();
            build_doc(&inst, &mut f).unwrap();
            let rows: Vec<_> = f.model.constraints_tagged("eq12").collect();
            assert_eq!(rows.len(), 1);
            assert_eq!(rows[0].rhs, va);
        }
    }

    #[test]
    fn dcc_requires_doc() {
        let (net, sc) = two_bus(100.0, 50.0);
        let stage = StageState::initial(&net, &sc);
        let cfg = FormulationConfig::default();
        let inst = Instance::new(&net, &sc, &stage, &cfg);
        let mut f = Formulation::new();
        assert!(matches!(
            build_dcc(&inst, &mut f),
            Err(FormulationError::MissingPart(..))
        ));
    }

    /// All b assignments on two sources joined by one line: only the open
    /// line is compatible with energizing both loads.
    #[test]
    fn two_sources_cannot_be_joined() {
        let (net, sc) = two_sources();
        let stage = StageState::initial(&net, &sc);
        let cfg = FormulationConfig::default();
        let inst = Instance::new(&net, &sc, &stage, &cfg);
        for closed in [false, true] {
            let mut f = Formulation::new();
            build_doc(&inst, &mut f).unwrap();
            build_dcc(&inst, &mut f).unwrap();
            let pv = f.power.clone().unwrap();
            let fix = if closed { 1.0 } else { 0.0 };
            f.model
                .add_constraint(
                    LinExpr::term(pv.line_closed[0], 1.0),
                    Sense::Eq,
                    fix,
                    "test",
                )
                .unwrap();
            let s = solve(&f.model, &SolveOptions::default()).unwrap();
            assert_eq!(
                s.status.is_success(),
                !closed,
                "closing the tie between two sources must be infeasible"
            );
        }
    }

    #[test]
    fn path_energizes_every_bus() {
        let (net, sc) = path3();
        let stage = StageState::initial(&net, &sc);
        let cfg = FormulationConfig::default();
        let inst = Instance::new(&net, &sc, &stage, &cfg);
        let mut f = Formulation::new();
        build_doc(&inst, &mut f).unwrap();
        build_dcc(&inst, &mut f).unwrap();
        let pv = f.power.clone().unwrap();
        let fv = f.flow.clone().unwrap();
        for &b in &pv.line_closed {
            f.model
                .add_constraint(LinExpr::term(b, 1.0), Sense::Eq, 1.0, "test")
                .unwrap();
        }
        let s = solve(&f.model, &SolveOptions::default()).unwrap();
        assert!(s.status.is_success());
        for i in 0..3 {
            if !net.bus(i).has_source() {
                assert_eq!(s.value(fv.bus_demand[i]), 1.0);
            }
        }
    }

    #[test]
    fn isolated_damaged_bus_not_pickable() {
        let (net, mut sc) = path3();
        sc.bus_ok.insert("c".into(), false);
        let stage = StageState::initial(&net, &sc);
        let cfg = FormulationConfig::default();
        let inst = Instance::new(&net, &sc, &stage, &cfg);
        let mut f = Formulation::new();
        build_doc(&inst, &mut f).unwrap();
        build_dcc(&inst, &mut f).unwrap();
        let pv = f.power.clone().unwrap();
        let c = net.bus_idx("c").unwrap();
        f.model
            .set_objective(LinExpr::term(pv.load_on[c], 1.0))
            .unwrap();
        let s = solve(&f.model, &SolveOptions::default()).unwrap();
        assert_eq!(s.value(pv.load_on[c]), 0.0);
    }
}
