//! Restoration strategies built on the formulation:
//!
//! - OLR: load recovery only, with communication states frozen to what the
//!   pre-fault routing still delivers after the damage.
//! - SCLR: first maximize the number of communicating terminals, then
//!   recover load with those states frozen.
//! - ICLR: the integrated model solved repeatedly, each stage starting from
//!   the switch states and picked-up loads of the previous one.

mod replay;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use milp::{BranchAndBound, HighsSolver, Solution, SolveOptions, Solver};
use serde::{Deserialize, Serialize};

use crate::error::PlanError;
use crate::formulation::{
    build_comm_recovery, build_integrated, build_load_recovery, pickup, Decoded, Formulation,
    FormulationConfig, Instance, StageState,
};
use crate::netmodel::{CoupledNetwork, Scenario};
use crate::verifier::{shortest_route, verify_power, Route, RoutingAssignment, TOL};

pub use replay::{replay, ReplayReport};

pub const DEFAULT_MAX_STAGES: usize = 10;

/// Weighted gain below which an ICLR stage counts as no progress.
const MIN_GAIN: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Algorithm {
    #[serde(rename = "OLR")]
    Olr,
    #[serde(rename = "SCLR")]
    Sclr,
    #[serde(rename = "ICLR")]
    Iclr,
}

impl Algorithm {
    pub const ALL: [Algorithm; 3] = [Algorithm::Olr, Algorithm::Sclr, Algorithm::Iclr];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Olr => "OLR",
            Algorithm::Sclr => "SCLR",
            Algorithm::Iclr => "ICLR",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "olr" => Ok(Algorithm::Olr),
            "sclr" => Ok(Algorithm::Sclr),
            "iclr" => Ok(Algorithm::Iclr),
            other => Err(format!(
                "unknown algorithm {other:?} (expected olr, sclr or iclr)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Backend {
    #[default]
    Highs,
    BranchAndBound,
}

impl Backend {
    fn solver(self) -> Box<dyn Solver> {
        match self {
            Backend::Highs => Box::new(HighsSolver::default()),
            Backend::BranchAndBound => Box::new(BranchAndBound),
        }
    }
}

#[derive(Debug, Clone)]
pub struct PlannerConfig {
    pub formulation: FormulationConfig,
    pub solve: SolveOptions,
    pub backend: Backend,
    pub max_stages: usize,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        PlannerConfig {
            formulation: FormulationConfig::default(),
            solve: SolveOptions::default(),
            backend: Backend::default(),
            max_stages: DEFAULT_MAX_STAGES,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StageKind {
    /// Communication recovery only (SCLR first step); no switching.
    Comm,
    /// Load recovery with frozen communication states.
    Load,
    /// Joint routing and load recovery.
    Integrated,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LineOp {
    pub line: String,
    pub close: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SolveStats {
    pub status: String,
    pub objective: f64,
    pub gap: f64,
    pub wall_ms: f64,
}

/// Solver-reported auxiliaries, kept for cross-checking the verifier.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SolverAux {
    pub delay_ms: BTreeMap<String, f64>,
    pub node_load: BTreeMap<String, f64>,
    pub link_load: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RestorationStage {
    pub index: usize,
    pub kind: StageKind,
    pub routing: RoutingAssignment,
    /// Communication state of every terminal during this stage.
    pub comm_states: BTreeMap<String, bool>,
    pub line_ops: Vec<LineOp>,
    /// Buses whose load is picked up in this stage.
    pub load_ops: Vec<String>,
    pub energized_buses: BTreeSet<String>,
    pub stage_pickup_kw: f64,
    /// Total served load after this stage, initially served load included.
    pub cumulative_pickup_kw: f64,
    pub cumulative_weighted: f64,
    pub stats: SolveStats,
    #[serde(default)]
    pub solver_aux: SolverAux,
}

impl RestorationStage {
    pub fn communicating_terminals(&self) -> usize {
        self.comm_states.values().filter(|&&s| s).count()
    }

    /// Distinct nodes carrying data for communicating terminals.
    pub fn communicating_nodes(&self) -> usize {
        self.routing
            .routes
            .iter()
            .filter(|(t, _)| self.comm_states.get(*t).copied().unwrap_or(false))
            .flat_map(|(_, r)| r.nodes.iter())
            .collect::<BTreeSet<_>>()
            .len()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RestorationPlan {
    pub algorithm: Algorithm,
    pub stages: Vec<RestorationStage>,
    pub initial_pickup_kw: f64,
    pub total_pickup_kw: f64,
    pub total_weighted: f64,
    pub wall_ms: f64,
    #[serde(default)]
    pub notes: Vec<String>,
}

impl RestorationPlan {
    /// Stages that switch lines or loads (SCLR's comm stage excluded).
    pub fn recovery_stages(&self) -> impl Iterator<Item = &RestorationStage> {
        self.stages.iter().filter(|s| s.kind != StageKind::Comm)
    }
}

struct Solved {
    formulation: Formulation,
    solution: Solution,
    stats: SolveStats,
}

fn solve_stage(
    cfg: &PlannerConfig,
    stage_index: usize,
    build: impl FnOnce() -> Result<Formulation, crate::FormulationError>,
) -> Result<Solved, PlanError> {
    let start = Instant::now();
    let formulation = build()?;
    let solution = cfg.backend.solver().solve(&formulation.model, &cfg.solve)?;
    if !solution.status.is_success() || !solution.has_incumbent() {
        return Err(PlanError::Infeasible {
            stage: stage_index,
            status: solution.status.to_string(),
        });
    }
    let stats = SolveStats {
        status: solution.status.to_string(),
        objective: solution.objective_value,
        gap: solution.gap,
        wall_ms: start.elapsed().as_secs_f64() * 1e3,
    };
    Ok(Solved {
        formulation,
        solution,
        stats,
    })
}

fn states_map(net: &CoupledNetwork, s: &[bool]) -> BTreeMap<String, bool> {
    net.terminals()
        .iter()
        .zip(s)
        .map(|(&m, &v)| (net.node(m).id.clone(), v))
        .collect()
}

fn served_kw(net: &CoupledNetwork, stage: &StageState) -> (f64, f64) {
    let on: Vec<bool> = net
        .power
        .buses
        .iter()
        .map(|b| stage.load_on(&b.id))
        .collect();
    let (w, kw) = pickup(net, &on);
    (kw, w)
}

/// Builds the stage record for a switching decision and the next state.
#[allow(clippy::too_many_arguments)]
fn record(
    net: &CoupledNetwork,
    sc: &Scenario,
    cfg: &PlannerConfig,
    prior: &StageState,
    kind: StageKind,
    decoded: &Decoded,
    comm_state: &[bool],
    routing: RoutingAssignment,
    stats: SolveStats,
) -> (RestorationStage, StageState) {
    let line_ops = net
        .power
        .lines
        .iter()
        .zip(&decoded.line_closed)
        .filter(|(l, &c)| prior.line_closed(&l.id) != c)
        .map(|(l, &c)| LineOp {
            line: l.id.clone(),
            close: c,
        })
        .collect();
    let load_ops = net
        .power
        .buses
        .iter()
        .zip(&decoded.load_on)
        .filter(|(b, &on)| on && !prior.load_on(&b.id))
        .map(|(b, _)| b.id.clone())
        .collect();
    let next = prior.advance(net, &decoded.line_closed, &decoded.load_on);
    let verdict = verify_power(
        net,
        sc,
        &cfg.formulation,
        &decoded.line_closed,
        &decoded.load_on,
    );
    let (before, _) = served_kw(net, prior);
    let (after, weighted) = served_kw(net, &next);
    let stage = RestorationStage {
        index: prior.stage_index,
        kind,
        routing,
        comm_states: states_map(net, comm_state),
        line_ops,
        load_ops,
        energized_buses: verdict.energized,
        stage_pickup_kw: after - before,
        cumulative_pickup_kw: after,
        cumulative_weighted: weighted,
        stats,
        solver_aux: SolverAux {
            delay_ms: decoded.delay_ms.clone(),
            node_load: decoded.node_load.clone(),
            link_load: decoded.link_load.clone(),
        },
    };
    (stage, next)
}

fn finish(
    algorithm: Algorithm,
    net: &CoupledNetwork,
    initial: &StageState,
    stages: Vec<RestorationStage>,
    notes: Vec<String>,
    start: Instant,
) -> RestorationPlan {
    let (initial_kw, initial_w) = served_kw(net, initial);
    let (total_pickup_kw, total_weighted) = stages.last().map_or((initial_kw, initial_w), |s| {
        (s.cumulative_pickup_kw, s.cumulative_weighted)
    });
    RestorationPlan {
        algorithm,
        stages,
        initial_pickup_kw: initial_kw,
        total_pickup_kw,
        total_weighted,
        wall_ms: start.elapsed().as_secs_f64() * 1e3,
        notes,
    }
}

/// Communication states OLR assumes: each terminal keeps its pre-fault
/// minimum-delay route, and communicates only if that route survives the
/// damage, meets the delay cap, and fits the remaining bandwidth (terminals
/// admitted in id order).
pub fn olr_comm_states(net: &CoupledNetwork, sc: &Scenario) -> (Vec<bool>, RoutingAssignment) {
    let mut node_load = vec![0.0; net.comm.nodes.len()];
    let mut link_load = vec![0.0; net.comm.links.len()];
    let mut states = Vec::with_capacity(net.terminals().len());
    let mut routing = RoutingAssignment::default();
    for &t in net.terminals() {
        let spec = net.node(t).terminal().expect("terminal");
        let admitted = shortest_route(net, t).and_then(|r: Route| {
            let nodes: Vec<usize> = r.nodes.iter().filter_map(|id| net.node_idx(id)).collect();
            let links: Vec<usize> = r.links.iter().filter_map(|id| net.link_idx(id)).collect();
            let w = spec.required_bandwidth_mbps;
            let working = nodes.iter().all(|&m| sc.node_ok(&net.node(m).id))
                && links.iter().all(|&l| sc.link_ok(&net.link(l).id));
            let delay: f64 = links
                .iter()
                .map(|&l| net.link(l).prop_delay_ms)
                .sum::<f64>()
                + nodes
                    .iter()
                    .filter(|&&m| !net.is_terminal(m))
                    .map(|&m| net.node(m).forward_delay_ms)
                    .sum::<f64>();
            let fits = nodes
                .iter()
                .all(|&m| node_load[m] + w <= net.node(m).bandwidth_cap_mbps + TOL)
                && links
                    .iter()
                    .all(|&l| link_load[l] + w <= net.link(l).bandwidth_cap_mbps + TOL);
            if !(working && fits && delay <= spec.delay_cap_ms + TOL) {
                return None;
            }
            nodes.iter().for_each(|&m| node_load[m] += w);
            links.iter().for_each(|&l| link_load[l] += w);
            Some(r)
        });
        states.push(admitted.is_some());
        if let Some(r) = admitted {
            routing.routes.insert(net.node(t).id.clone(), r);
        }
    }
    (states, routing)
}

pub fn run_olr(
    net: &CoupledNetwork,
    sc: &Scenario,
    cfg: &PlannerConfig,
) -> Result<RestorationPlan, PlanError> {
    let start = Instant::now();
    let initial = StageState::initial(net, sc);
    let (states, routing) = olr_comm_states(net, sc);
    let inst = Instance::new(net, sc, &initial, &cfg.formulation);
    let solved = solve_stage(cfg, 1, || build_load_recovery(&inst, &states))?;
    let decoded = solved.formulation.decode(&inst, &solved.solution);
    let (stage, _) = record(
        net,
        sc,
        cfg,
        &initial,
        StageKind::Load,
        &decoded,
        &states,
        routing,
        solved.stats,
    );
    let notes = solved.formulation.notes.clone();
    Ok(finish(
        Algorithm::Olr,
        net,
        &initial,
        vec![stage],
        notes,
        start,
    ))
}

pub fn run_sclr(
    net: &CoupledNetwork,
    sc: &Scenario,
    cfg: &PlannerConfig,
) -> Result<RestorationPlan, PlanError> {
    let start = Instant::now();
    let initial = StageState::initial(net, sc);
    let inst = Instance::new(net, sc, &initial, &cfg.formulation);

    let comm = solve_stage(cfg, 1, || build_comm_recovery(&inst))?;
    let cd = comm.formulation.decode(&inst, &comm.solution);
    let states = cd.comm_state.clone().unwrap_or_default();
    let routing = cd.routing.clone().unwrap_or_default();
    let (initial_kw, initial_w) = served_kw(net, &initial);
    let on: Vec<bool> = net
        .power
        .buses
        .iter()
        .map(|b| initial.load_on(&b.id))
        .collect();
    let closed: Vec<bool> = net
        .power
        .lines
        .iter()
        .map(|l| initial.line_closed(&l.id))
        .collect();
    let comm_stage = RestorationStage {
        index: 1,
        kind: StageKind::Comm,
        routing: routing.clone(),
        comm_states: states_map(net, &states),
        line_ops: Vec::new(),
        load_ops: Vec::new(),
        energized_buses: verify_power(net, sc, &cfg.formulation, &closed, &on).energized,
        stage_pickup_kw: 0.0,
        cumulative_pickup_kw: initial_kw,
        cumulative_weighted: initial_w,
        stats: comm.stats,
        solver_aux: SolverAux {
            delay_ms: cd.delay_ms.clone(),
            node_load: cd.node_load.clone(),
            link_load: cd.link_load.clone(),
        },
    };

    let load = solve_stage(cfg, 1, || build_load_recovery(&inst, &states))?;
    let ld = load.formulation.decode(&inst, &load.solution);
    let (mut stage, _) = record(
        net,
        sc,
        cfg,
        &initial,
        StageKind::Load,
        &ld,
        &states,
        routing,
        load.stats,
    );
    stage.index = 2;
    stage.solver_aux = comm_stage.solver_aux.clone();
    let notes = load.formulation.notes.clone();
    Ok(finish(
        Algorithm::Sclr,
        net,
        &initial,
        vec![comm_stage, stage],
        notes,
        start,
    ))
}

pub fn run_iclr(
    net: &CoupledNetwork,
    sc: &Scenario,
    cfg: &PlannerConfig,
) -> Result<RestorationPlan, PlanError> {
    if cfg.max_stages == 0 {
        return Err(PlanError::NoStages);
    }
    let start = Instant::now();
    let initial = StageState::initial(net, sc);
    let mut state = initial.clone();
    let mut stages: Vec<RestorationStage> = Vec::new();
    let mut notes = Vec::new();
    while stages.len() < cfg.max_stages {
        let inst = Instance::new(net, sc, &state, &cfg.formulation);
        let solved = match solve_stage(cfg, state.stage_index, || build_integrated(&inst)) {
            Ok(s) => s,
            Err(PlanError::Infeasible { .. }) if !stages.is_empty() => break,
            Err(e) => return Err(e),
        };
        let decoded = solved.formulation.decode(&inst, &solved.solution);
        let states = decoded.comm_state.clone().unwrap_or_default();
        let routing = decoded.routing.clone().unwrap_or_default();
        let (_, before_w) = served_kw(net, &state);
        let (stage, next) = record(
            net,
            sc,
            cfg,
            &state,
            StageKind::Integrated,
            &decoded,
            &states,
            routing,
            solved.stats,
        );
        if !stages.is_empty() && stage.cumulative_weighted - before_w <= MIN_GAIN {
            break;
        }
        if stages.is_empty() {
            notes = solved.formulation.notes.clone();
        }
        stages.push(stage);
        state = next;
    }
    Ok(finish(Algorithm::Iclr, net, &initial, stages, notes, start))
}

pub fn run(
    algorithm: Algorithm,
    net: &CoupledNetwork,
    sc: &Scenario,
    cfg: &PlannerConfig,
) -> Result<RestorationPlan, PlanError> {
    match algorithm {
        Algorithm::Olr => run_olr(net, sc, cfg),
        Algorithm::Sclr => run_sclr(net, sc, cfg),
        Algorithm::Iclr => run_iclr(net, sc, cfg),
    }
}

/// Result of one algorithm inside a comparison; failures are kept as text.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonEntry {
    pub algorithm: Algorithm,
    pub plan: Option<RestorationPlan>,
    pub error: Option<String>,
}

/// Runs the three algorithms concurrently on the same inputs.
pub fn compare(net: &CoupledNetwork, sc: &Scenario, cfg: &PlannerConfig) -> Vec<ComparisonEntry> {
    std::thread::scope(|scope| {
        let handles: Vec<_> = Algorithm::ALL
            .iter()
            .map(|&a| (a, scope.spawn(move || run(a, net, sc, cfg))))
            .collect();
        handles
            .into_iter()
            .map(|(algorithm, h)| {
                let outcome = h.join().unwrap_or_else(|_| {
                    Err(PlanError::Infeasible {
                        stage: 0,
                        status: "panicked".into(),
                    })
                });
                match outcome {
                    Ok(plan) => ComparisonEntry {
                        algorithm,
                        plan: Some(plan),
                        error: None,
                    },
                    Err(e) => ComparisonEntry {
                        algorithm,
                        plan: None,
                        error: Some(e.to_string()),
                    },
                }
            })
            .collect()
    })
}

#[cfg(test)]
mod tests;
