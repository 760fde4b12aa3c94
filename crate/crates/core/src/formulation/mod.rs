//! Translation of a coupled network, a scenario and a stage state into the
//! integrated restoration MILP.
//!
//! Each equation family has its own builder so it can be tested in
//! isolation. Every constraint carries a tag naming its family (`eq1` to
//! `eq35`); a few auxiliary fixings use the tags `latch`, `switchless`,
//! `noncontrollable` and `lsc`.
//!
//! Units: power in kW / kvar, voltage in kV, impedance in ohm, bandwidth in
//! Mbps, delay in ms.

mod comm;
mod coupling;
mod power;

use std::collections::BTreeMap;

use milp::{Model, Solution, VarId};

use crate::error::FormulationError;
use crate::grid::{line_permitted, live_buses};
use crate::netmodel::{CoupledNetwork, Scenario};
use crate::verifier::{Route, RoutingAssignment};

pub use comm::{build_bdc, build_dfc};
pub use coupling::{
    build_lcc, build_objective, derive_epsilon, lcc_bounds, load_quantum, CommStates,
};
pub use power::{build_dcc, build_doc};

pub const DEFAULT_DELTA: f64 = 0.05;
pub const DEFAULT_V_REF_KV: f64 = 12.66;

#[derive(Debug, Clone, PartialEq)]
pub struct FormulationConfig {
    /// Reference voltage at source buses (kV).
    pub v_ref_kv: f64,
    /// Relative voltage tolerance around the reference.
    pub delta: f64,
    /// Delay-penalty weight; derived from the load data when `None`.
    pub epsilon: Option<f64>,
    /// Per-line flow big-M overrides (must not be below the line caps).
    pub big_m_flow: BTreeMap<String, f64>,
    pub big_m_voltage: Option<f64>,
    /// Commodity-flow bound; defaults to the bus count.
    pub big_m_commodity: Option<f64>,
    /// A load switch may only change state while its terminal communicates.
    pub enforce_load_switch_comm: bool,
    /// Closing a line needs both end buses observed (`true`) or only the
    /// switched ends (`false`).
    pub require_both_ends_observed_to_close: bool,
    /// Adds line orientation variables and the cuts that follow from
    /// radiality. The feasible set of the original variables is unchanged.
    pub orientation_cuts: bool,
    /// Creates routing variables only for elements on some admissible
    /// route of their terminal. The feasible set is unchanged.
    pub prune_routing: bool,
}

impl Default for FormulationConfig {
    fn default() -> Self {
        FormulationConfig {
            v_ref_kv: DEFAULT_V_REF_KV,
            delta: DEFAULT_DELTA,
            epsilon: None,
            big_m_flow: BTreeMap::new(),
            big_m_voltage: None,
            big_m_commodity: None,
            enforce_load_switch_comm: false,
            require_both_ends_observed_to_close: true,
            orientation_cuts: true,
            prune_routing: true,
        }
    }
}

/// Operating state carried between restoration stages.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct StageState {
    pub stage_index: usize,
    /// Current open (false) / closed (true) state per line id.
    pub line_state: BTreeMap<String, bool>,
    /// Loads already picked up; they stay on in every later stage.
    pub load_state: BTreeMap<String, bool>,
}

impl StageState {
    /// Stage-1 state: the scenario's initial line states, with lines that
    /// may not be closed treated as isolated, and initially closed load
    /// switches on live buses latched.
    pub fn initial(net: &CoupledNetwork, sc: &Scenario) -> Self {
        let closed: Vec<bool> = (0..net.power.lines.len())
            .map(|k| sc.line_closed_initially(&net.line(k).id) && line_permitted(net, sc, k))
            .collect();
        let live = live_buses(net, sc, &closed);
        StageState {
            stage_index: 1,
            line_state: net
                .power
                .lines
                .iter()
                .zip(&closed)
                .map(|(l, &c)| (l.id.clone(), c))
                .collect(),
            load_state: net
                .power
                .buses
                .iter()
                .zip(&live)
                .map(|(b, &on)| (b.id.clone(), on && sc.load_closed_initially(&b.id)))
                .collect(),
        }
    }

    pub fn line_closed(&self, id: &str) -> bool {
        self.line_state.get(id).copied().unwrap_or(false)
    }

    pub fn load_on(&self, id: &str) -> bool {
        self.load_state.get(id).copied().unwrap_or(false)
    }

    /// The state after applying a solved stage.
    pub fn advance(&self, net: &CoupledNetwork, line_closed: &[bool], load_on: &[bool]) -> Self {
        StageState {
            stage_index: self.stage_index + 1,
            line_state: net
                .power
                .lines
                .iter()
                .zip(line_closed)
                .map(|(l, &c)| (l.id.clone(), c))
                .collect(),
            load_state: net
                .power
                .buses
                .iter()
                .zip(load_on)
                .map(|(b, &c)| (b.id.clone(), c))
                .collect(),
        }
    }
}

/// Everything a builder reads.
#[derive(Debug, Clone, Copy)]
pub struct Instance<'a> {
    pub net: &'a CoupledNetwork,
    pub scenario: &'a Scenario,
    pub stage: &'a StageState,
    pub config: &'a FormulationConfig,
}

impl<'a> Instance<'a> {
    pub fn new(
        net: &'a CoupledNetwork,
        scenario: &'a Scenario,
        stage: &'a StageState,
        config: &'a FormulationConfig,
    ) -> Self {
        Instance {
            net,
            scenario,
            stage,
            config,
        }
    }

    /// Line state entering this stage, with non-permitted lines opened.
    pub(crate) fn prior_closed(&self, k: usize) -> bool {
        self.stage.line_closed(&self.net.line(k).id) && line_permitted(self.net, self.scenario, k)
    }
}

#[derive(Debug, Clone)]
pub struct PowerVars {
    pub line_closed: Vec<VarId>,
    pub load_on: Vec<VarId>,
    pub p_gen: Vec<Option<VarId>>,
    pub q_gen: Vec<Option<VarId>>,
    pub p_line: Vec<VarId>,
    pub q_line: Vec<VarId>,
    pub voltage: Vec<VarId>,
}

#[derive(Debug, Clone)]
pub struct FlowVars {
    pub line_flow: Vec<VarId>,
    pub bus_demand: Vec<VarId>,
    pub injection: Vec<Option<VarId>>,
    /// Per line, (from→to, to→from) parent indicators when orientation
    /// cuts are on.
    pub orientation: Vec<(VarId, VarId)>,
}

/// Routing variables, indexed by terminal ordinal (position in
/// [`CoupledNetwork::terminals`]) and node / link index.
#[derive(Debug, Clone)]
pub struct CommVars {
    /// `None` where the element cannot lie on any admissible route.
    pub node_route: Vec<Vec<Option<VarId>>>,
    pub link_route: Vec<Vec<Option<VarId>>>,
    pub comm_state: Vec<VarId>,
    pub node_load: Vec<VarId>,
    pub link_load: Vec<VarId>,
    pub delay: Vec<VarId>,
}

/// A model under construction plus handles to its variables.
#[derive(Debug, Clone, Default)]
pub struct Formulation {
    pub model: Model,
    pub power: Option<PowerVars>,
    pub flow: Option<FlowVars>,
    pub comm: Option<CommVars>,
    pub epsilon: f64,
    /// Diagnostics such as lines needing manual isolation.
    pub notes: Vec<String>,
}

impl Formulation {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn census(&self) -> BTreeMap<String, usize> {
        self.model.tag_census()
    }

    pub(crate) fn power_vars(&self, who: &'static str) -> Result<&PowerVars, FormulationError> {
        self.power
            .as_ref()
            .ok_or(FormulationError::MissingPart("build_doc", who))
    }

    pub(crate) fn comm_vars(&self, who: &'static str) -> Result<&CommVars, FormulationError> {
        self.comm
            .as_ref()
            .ok_or(FormulationError::MissingPart("build_dfc", who))
    }

    /// Reads the power and routing decisions out of a solution.
    pub fn decode(&self, inst: &Instance<'_>, sol: &Solution) -> Decoded {
        let net = inst.net;
        let mut d = Decoded::default();
        if let Some(p) = &self.power {
            d.line_closed = p.line_closed.iter().map(|&v| sol.is_one(v)).collect();
            d.load_on = p.load_on.iter().map(|&v| sol.is_one(v)).collect();
        }
        if let Some(c) = &self.comm {
            let terms = net.terminals();
            d.comm_state = Some(c.comm_state.iter().map(|&v| sol.is_one(v)).collect());
            let mut ra = RoutingAssignment::default();
            for (t, &m) in terms.iter().enumerate() {
                let nodes: Vec<String> = (0..net.comm.nodes.len())
                    .filter(|&n| c.node_route[t][n].is_some_and(|v| sol.is_one(v)))
                    .map(|n| net.node(n).id.clone())
                    .collect();
                let links: Vec<String> = (0..net.comm.links.len())
                    .filter(|&l| c.link_route[t][l].is_some_and(|v| sol.is_one(v)))
                    .map(|l| net.link(l).id.clone())
                    .collect();
                if !nodes.is_empty() || !links.is_empty() {
                    ra.routes
                        .insert(net.node(m).id.clone(), Route { nodes, links });
                }
                d.delay_ms
                    .insert(net.node(m).id.clone(), sol.value(c.delay[t]));
            }
            d.routing = Some(ra);
            for (m, &v) in c.node_load.iter().enumerate() {
                d.node_load.insert(net.node(m).id.clone(), sol.value(v));
            }
            for (l, &v) in c.link_load.iter().enumerate() {
                d.link_load.insert(net.link(l).id.clone(), sol.value(v));
            }
        }
        d
    }
}

/// Decisions decoded from a solved formulation.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Decoded {
    pub line_closed: Vec<bool>,
    pub load_on: Vec<bool>,
    /// Per terminal ordinal; `None` when the model had no routing part.
    pub comm_state: Option<Vec<bool>>,
    pub routing: Option<RoutingAssignment>,
    /// Solver values of the delay and bandwidth auxiliaries, by id.
    pub delay_ms: BTreeMap<String, f64>,
    pub node_load: BTreeMap<String, f64>,
    pub link_load: BTreeMap<String, f64>,
}

/// Weighted and plain served load for a load-switch vector.
pub fn pickup(net: &CoupledNetwork, load_on: &[bool]) -> (f64, f64) {
    net.power
        .buses
        .iter()
        .zip(load_on)
        .filter(|(_, &on)| on)
        .fold((0.0, 0.0), |(w, p), (b, _)| {
            (w + b.weighted_load(), p + b.p_load_kw)
        })
}

/// DOC, DCC, DFC, BDC and LCC with the load-minus-delay objective.
pub fn build_integrated(inst: &Instance<'_>) -> Result<Formulation, FormulationError> {
    let mut f = Formulation::new();
    build_doc(inst, &mut f)?;
    build_dcc(inst, &mut f)?;
    build_dfc(inst, &mut f)?;
    build_bdc(inst, &mut f)?;
    build_lcc(inst, CommStates::Routed, &mut f)?;
    build_objective(inst, &mut f)?;
    Ok(f)
}

/// DOC, DCC and LCC with communication states frozen to `comm_state`
/// (per terminal ordinal); maximizes weighted pickup only.
pub fn build_load_recovery(
    inst: &Instance<'_>,
    comm_state: &[bool],
) -> Result<Formulation, FormulationError> {
    let mut f = Formulation::new();
    build_doc(inst, &mut f)?;
    build_dcc(inst, &mut f)?;
    build_lcc(inst, CommStates::Frozen(comm_state), &mut f)?;
    build_objective(inst, &mut f)?;
    Ok(f)
}

/// DFC and BDC only: maximizes the number of communicating terminals, with
/// total delay as a tie-break.
pub fn build_comm_recovery(inst: &Instance<'_>) -> Result<Formulation, FormulationError> {
    let mut f = Formulation::new();
    build_dfc(inst, &mut f)?;
    build_bdc(inst, &mut f)?;
    coupling::build_count_objective(inst, &mut f)?;
    Ok(f)
}

#[cfg(test)]
pub(crate) mod testnet;
