//! Case files: a TOML document with `defaults`, `power`, `comm` and
//! `scenario` sections. See `docs/formats.md` for the grammar.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::Range;

use serde::{Deserialize, Serialize};
use thiserror::Error;
use toml::Spanned;

use crate::formulation::{FormulationConfig, DEFAULT_DELTA, DEFAULT_V_REF_KV};
use crate::netmodel::{
    validate, Bus, CommLink, CommNetwork, CommNode, CoupledNetwork, Line, NodeKind, PowerNetwork,
    Scenario, SourceCaps, TerminalSpec,
};
use crate::planner::{PlannerConfig, DEFAULT_MAX_STAGES};

pub const CASE_FORMAT_VERSION: u32 = 1;
pub const DEFAULT_REQUIRED_MBPS: f64 = 2.0;
pub const DEFAULT_DELAY_CAP_MS: f64 = 10.0;
pub const DEFAULT_GAP: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostic {
    /// 1-based; 0 when the problem has no location in the text.
    pub line: usize,
    pub col: usize,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.line == 0 {
            f.write_str(&self.message)
        } else {
            write!(f, "{}:{}: {}", self.line, self.col, self.message)
        }
    }
}

fn join(ds: &[Diagnostic]) -> String {
    ds.iter()
        .map(|d| d.to_string())
        .collect::<Vec<_>>()
        .join("\n")
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CaseError {
    #[error("syntax error at {0}")]
    Syntax(Diagnostic),
    #[error("schema errors:\n{}", join(.0))]
    Schema(Vec<Diagnostic>),
    #[error("invalid network:\n{}", join(.0))]
    Invalid(Vec<Diagnostic>),
}

impl CaseError {
    pub fn diagnostics(&self) -> Vec<&Diagnostic> {
        match self {
            CaseError::Syntax(d) => vec![d],
            CaseError::Schema(ds) | CaseError::Invalid(ds) => ds.iter().collect(),
        }
    }
}

/// A parsed, validated case.
#[derive(Debug, Clone)]
pub struct Case {
    pub net: CoupledNetwork,
    pub scenario: Scenario,
    pub formulation: FormulationConfig,
    pub gap: f64,
    pub max_stages: usize,
    /// Terminal requirements used when a terminal omits its own.
    pub required_mbps: f64,
    pub delay_cap_ms: f64,
}

impl Case {
    /// Assembles a case with default settings around a network.
    pub fn new(net: CoupledNetwork, scenario: Scenario, v_ref_kv: f64) -> Self {
        Case {
            net,
            scenario,
            formulation: FormulationConfig {
                v_ref_kv,
                ..FormulationConfig::default()
            },
            gap: DEFAULT_GAP,
            max_stages: DEFAULT_MAX_STAGES,
            required_mbps: DEFAULT_REQUIRED_MBPS,
            delay_cap_ms: DEFAULT_DELAY_CAP_MS,
        }
    }

    pub fn planner_config(&self) -> PlannerConfig {
        let mut cfg = PlannerConfig {
            formulation: self.formulation.clone(),
            max_stages: self.max_stages,
            ..PlannerConfig::default()
        };
        cfg.solve.gap = self.gap;
        cfg
    }
}

fn yes() -> bool {
    true
}
fn one() -> f64 {
    1.0
}
fn default_required() -> f64 {
    DEFAULT_REQUIRED_MBPS
}
fn default_delay_cap() -> f64 {
    DEFAULT_DELAY_CAP_MS
}
fn default_delta() -> f64 {
    DEFAULT_DELTA
}
fn default_v_ref() -> f64 {
    DEFAULT_V_REF_KV
}
fn default_gap() -> f64 {
    DEFAULT_GAP
}
fn default_stages() -> usize {
    DEFAULT_MAX_STAGES
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CaseDoc {
    format_version: Spanned<u32>,
    #[serde(default)]
    defaults: DefaultsDoc,
    #[serde(default)]
    power: PowerDoc,
    #[serde(default)]
    comm: CommDoc,
    #[serde(default)]
    scenario: ScenarioDoc,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DefaultsDoc {
    #[serde(default = "default_required")]
    required_mbps: f64,
    #[serde(default = "default_delay_cap")]
    delay_cap_ms: f64,
    #[serde(default = "default_delta")]
    delta: f64,
    #[serde(default = "default_v_ref")]
    v_ref_kv: f64,
    #[serde(default = "default_gap")]
    gap: f64,
    #[serde(default = "default_stages")]
    max_stages: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    epsilon: Option<f64>,
    #[serde(default)]
    enforce_load_switch_comm: bool,
    #[serde(default = "yes")]
    require_both_ends_observed_to_close: bool,
}

impl Default for DefaultsDoc {
    fn default() -> Self {
        DefaultsDoc {
            required_mbps: DEFAULT_REQUIRED_MBPS,
            delay_cap_ms: DEFAULT_DELAY_CAP_MS,
            delta: DEFAULT_DELTA,
            v_ref_kv: DEFAULT_V_REF_KV,
            gap: DEFAULT_GAP,
            max_stages: DEFAULT_MAX_STAGES,
            epsilon: None,
            enforce_load_switch_comm: false,
            require_both_ends_observed_to_close: true,
        }
    }
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PowerDoc {
    #[serde(default, rename = "bus")]
    buses: Vec<BusDoc>,
    #[serde(default, rename = "line")]
    lines: Vec<LineDoc>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SourceDoc {
    p_max_kw: f64,
    q_max_kvar: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BusDoc {
    id: Spanned<String>,
    #[serde(default)]
    p_kw: f64,
    #[serde(default)]
    q_kvar: f64,
    #[serde(default = "one")]
    weight: f64,
    #[serde(default = "yes")]
    load_switch: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    source: Option<SourceDoc>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LineDoc {
    id: Spanned<String>,
    from: Spanned<String>,
    to: Spanned<String>,
    r_ohm: f64,
    x_ohm: f64,
    p_max_kw: f64,
    q_max_kvar: f64,
    #[serde(default = "yes")]
    switch_from: bool,
    #[serde(default = "yes")]
    switch_to: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum KindDoc {
    Terminal,
    Forwarder,
    Center,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CommDoc {
    #[serde(default, rename = "node")]
    nodes: Vec<NodeDoc>,
    #[serde(default, rename = "link")]
    links: Vec<LinkDoc>,
    #[serde(default)]
    coupling: Vec<CouplingDoc>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NodeDoc {
    id: Spanned<String>,
    kind: KindDoc,
    bandwidth_mbps: f64,
    delay_ms: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    required_mbps: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    delay_cap_ms: Option<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LinkDoc {
    id: Spanned<String>,
    a: Spanned<String>,
    b: Spanned<String>,
    bandwidth_mbps: f64,
    delay_ms: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CouplingDoc {
    terminal: Spanned<String>,
    bus: Spanned<String>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioDoc {
    #[serde(default)]
    failed_buses: Vec<Spanned<String>>,
    #[serde(default)]
    failed_lines: Vec<Spanned<String>>,
    #[serde(default)]
    failed_nodes: Vec<Spanned<String>>,
    #[serde(default)]
    failed_links: Vec<Spanned<String>>,
    #[serde(default)]
    closed_lines: Vec<Spanned<String>>,
    #[serde(default)]
    served_loads: Vec<Spanned<String>>,
}

fn locate(text: &str, span: Range<usize>, message: impl Into<String>) -> Diagnostic {
    let start = span.start.min(text.len());
    let before = &text[..start];
    let line = before.matches('\n').count() + 1;
    let col = before.rsplit('\n').next().map_or(0, |s| s.chars().count()) + 1;
    Diagnostic {
        line,
        col,
        message: message.into(),
    }
}

fn unlocated(message: impl Into<String>) -> Diagnostic {
    Diagnostic {
        line: 0,
        col: 0,
        message: message.into(),
    }
}

fn plain(s: &Spanned<String>) -> String {
    s.get_ref().clone()
}

/// Parses and validates a case.
pub fn parse_case(text: &str) -> Result<Case, CaseError> {
    let doc: CaseDoc = toml::from_str(text).map_err(|e| {
        let span = e.span().unwrap_or(0..0);
        CaseError::Syntax(locate(text, span, e.message().trim().to_string()))
    })?;

    let mut schema = Vec::new();
    if *doc.format_version.get_ref() != CASE_FORMAT_VERSION {
        schema.push(locate(
            text,
            doc.format_version.span(),
            format!(
                "unsupported format_version {} (expected {CASE_FORMAT_VERSION})",
                doc.format_version.get_ref()
            ),
        ));
    }

    // First span of every element id, for locating later diagnostics.
    let mut spans: BTreeMap<String, Range<usize>> = BTreeMap::new();
    let mut check_unique =
        |kind: &str, ids: Vec<&Spanned<String>>, schema: &mut Vec<Diagnostic>| {
            let mut seen = BTreeSet::new();
            for id in ids {
                if !seen.insert(id.get_ref().clone()) {
                    schema.push(locate(
                        text,
                        id.span(),
                        format!("duplicate {kind} id {:?}", id.get_ref()),
                    ));
                }
                spans.entry(id.get_ref().clone()).or_insert(id.span());
            }
        };
    check_unique(
        "bus",
        doc.power.buses.iter().map(|b| &b.id).collect(),
        &mut schema,
    );
    check_unique(
        "line",
        doc.power.lines.iter().map(|l| &l.id).collect(),
        &mut schema,
    );
    check_unique(
        "node",
        doc.comm.nodes.iter().map(|n| &n.id).collect(),
        &mut schema,
    );
    check_unique(
        "link",
        doc.comm.links.iter().map(|l| &l.id).collect(),
        &mut schema,
    );

    let mut coupling: BTreeMap<String, String> = BTreeMap::new();
    for c in &doc.comm.coupling {
        let kind = doc
            .comm
            .nodes
            .iter()
            .find(|n| n.id.get_ref() == c.terminal.get_ref())
            .map(|n| n.kind);
        if kind != Some(KindDoc::Terminal) {
            schema.push(locate(
                text,
                c.terminal.span(),
                format!(
                    "coupling names {:?}, which is not a terminal node",
                    c.terminal.get_ref()
                ),
            ));
        } else if coupling.insert(plain(&c.terminal), plain(&c.bus)).is_some() {
            schema.push(locate(
                text,
                c.terminal.span(),
                format!(
                    "terminal {:?} is coupled more than once",
                    c.terminal.get_ref()
                ),
            ));
        }
    }
    for n in &doc.comm.nodes {
        if n.kind == KindDoc::Terminal && !coupling.contains_key(n.id.get_ref()) {
            schema.push(locate(
                text,
                n.id.span(),
                format!("terminal {:?} has no coupling entry", n.id.get_ref()),
            ));
        }
        if n.kind != KindDoc::Terminal && (n.required_mbps.is_some() || n.delay_cap_ms.is_some()) {
            schema.push(locate(
                text,
                n.id.span(),
                format!(
                    "only terminals take required_mbps / delay_cap_ms ({:?})",
                    n.id.get_ref()
                ),
            ));
        }
    }
    let sc_lists = [
        ("failed_buses", &doc.scenario.failed_buses, "bus"),
        ("failed_lines", &doc.scenario.failed_lines, "line"),
        ("failed_nodes", &doc.scenario.failed_nodes, "node"),
        ("failed_links", &doc.scenario.failed_links, "link"),
        ("closed_lines", &doc.scenario.closed_lines, "line"),
        ("served_loads", &doc.scenario.served_loads, "bus"),
    ];
    for (name, list, kind) in sc_lists {
        for id in list.iter() {
            let known = match kind {
                "bus" => doc
                    .power
                    .buses
                    .iter()
                    .any(|b| b.id.get_ref() == id.get_ref()),
                "line" => doc
                    .power
                    .lines
                    .iter()
                    .any(|b| b.id.get_ref() == id.get_ref()),
                "node" => doc
                    .comm
                    .nodes
                    .iter()
                    .any(|b| b.id.get_ref() == id.get_ref()),
                _ => doc
                    .comm
                    .links
                    .iter()
                    .any(|b| b.id.get_ref() == id.get_ref()),
            };
            if !known {
                schema.push(locate(
                    text,
                    id.span(),
                    format!("scenario.{name} names unknown {kind} {:?}", id.get_ref()),
                ));
            }
        }
    }
    if !schema.is_empty() {
        return Err(CaseError::Schema(schema));
    }

    let d = &doc.defaults;
    let power = PowerNetwork {
        buses: doc
            .power
            .buses
            .iter()
            .map(|b| Bus {
                id: plain(&b.id),
                p_load_kw: b.p_kw,
                q_load_kvar: b.q_kvar,
                load_weight: b.weight,
                has_load_switch: b.load_switch,
                source: b.source.as_ref().map(|s| SourceCaps {
                    p_max_kw: s.p_max_kw,
                    q_max_kvar: s.q_max_kvar,
                }),
            })
            .collect(),
        lines: doc
            .power
            .lines
            .iter()
            .map(|l| Line {
                id: plain(&l.id),
                from_bus: plain(&l.from),
                to_bus: plain(&l.to),
                r_ohm: l.r_ohm,
                x_ohm: l.x_ohm,
                p_max_kw: l.p_max_kw,
                q_max_kvar: l.q_max_kvar,
                switch_at_from: l.switch_from,
                switch_at_to: l.switch_to,
            })
            .collect(),
    };
    let comm = CommNetwork {
        nodes: doc
            .comm
            .nodes
            .iter()
            .map(|n| CommNode {
                id: plain(&n.id),
                kind: match n.kind {
                    KindDoc::Terminal => NodeKind::Terminal(TerminalSpec {
                        attached_bus: coupling[n.id.get_ref()].clone(),
                        required_bandwidth_mbps: n.required_mbps.unwrap_or(d.required_mbps),
                        delay_cap_ms: n.delay_cap_ms.unwrap_or(d.delay_cap_ms),
                    }),
                    KindDoc::Forwarder => NodeKind::Forwarder,
                    KindDoc::Center => NodeKind::Center,
                },
                bandwidth_cap_mbps: n.bandwidth_mbps,
                forward_delay_ms: n.delay_ms,
            })
            .collect(),
        links: doc
            .comm
            .links
            .iter()
            .map(|l| CommLink {
                id: plain(&l.id),
                end_a: plain(&l.a),
                end_b: plain(&l.b),
                bandwidth_cap_mbps: l.bandwidth_mbps,
                prop_delay_ms: l.delay_ms,
            })
            .collect(),
    };
    let net = CoupledNetwork::new(power, comm);
    let mut scenario = Scenario::intact(&net);
    let s = &doc.scenario;
    for id in &s.failed_buses {
        scenario.bus_ok.insert(plain(id), false);
    }
    for id in &s.failed_lines {
        scenario.line_ok.insert(plain(id), false);
    }
    for id in &s.failed_nodes {
        scenario.node_ok.insert(plain(id), false);
    }
    for id in &s.failed_links {
        scenario.link_ok.insert(plain(id), false);
    }
    for id in &s.closed_lines {
        scenario.line_initial.insert(plain(id), true);
    }
    for id in &s.served_loads {
        scenario.load_initial.insert(plain(id), true);
    }

    let report = validate(&net, &scenario);
    if !report.is_ok() {
        let ds = report
            .issues
            .iter()
            .map(|i| match spans.get(&i.element) {
                Some(span) => locate(text, span.clone(), i.to_string()),
                None => unlocated(i.to_string()),
            })
            .collect();
        return Err(CaseError::Invalid(ds));
    }

    Ok(Case {
        net,
        scenario,
        formulation: FormulationConfig {
            v_ref_kv: d.v_ref_kv,
            delta: d.delta,
            epsilon: d.epsilon,
            enforce_load_switch_comm: d.enforce_load_switch_comm,
            require_both_ends_observed_to_close: d.require_both_ends_observed_to_close,
            ..FormulationConfig::default()
        },
        gap: d.gap,
        max_stages: d.max_stages,
        required_mbps: d.required_mbps,
        delay_cap_ms: d.delay_cap_ms,
    })
}

fn sp(s: &str) -> Spanned<String> {
    Spanned::new(0..0, s.to_string())
}

fn ids_where(map: &BTreeMap<String, bool>, want: bool) -> Vec<Spanned<String>> {
    map.iter()
        .filter(|(_, &v)| v == want)
        .map(|(k, _)| sp(k))
        .collect()
}

/// Canonical text of a case: elements sorted by id, every field explicit.
pub fn emit_case(case: &Case) -> String {
    let net = &case.net;
    let f = &case.formulation;
    let mut coupling = Vec::new();
    let nodes = net
        .comm
        .nodes
        .iter()
        .map(|n| {
            let (kind, req, cap) = match &n.kind {
                NodeKind::Terminal(t) => {
                    coupling.push(CouplingDoc {
                        terminal: sp(&n.id),
                        bus: sp(&t.attached_bus),
                    });
                    (
                        KindDoc::Terminal,
                        Some(t.required_bandwidth_mbps),
                        Some(t.delay_cap_ms),
                    )
                }
                NodeKind::Forwarder => (KindDoc::Forwarder, None, None),
                NodeKind::Center => (KindDoc::Center, None, None),
            };
            NodeDoc {
                id: sp(&n.id),
                kind,
                bandwidth_mbps: n.bandwidth_cap_mbps,
                delay_ms: n.forward_delay_ms,
                required_mbps: req,
                delay_cap_ms: cap,
            }
        })
        .collect();
    let sc = &case.scenario;
    let doc = CaseDoc {
        format_version: Spanned::new(0..0, CASE_FORMAT_VERSION),
        defaults: DefaultsDoc {
            required_mbps: case.required_mbps,
            delay_cap_ms: case.delay_cap_ms,
            delta: f.delta,
            v_ref_kv: f.v_ref_kv,
            gap: case.gap,
            max_stages: case.max_stages,
            epsilon: f.epsilon,
            enforce_load_switch_comm: f.enforce_load_switch_comm,
            require_both_ends_observed_to_close: f.require_both_ends_observed_to_close,
        },
        power: PowerDoc {
            buses: net
                .power
                .buses
                .iter()
                .map(|b| BusDoc {
                    id: sp(&b.id),
                    p_kw: b.p_load_kw,
                    q_kvar: b.q_load_kvar,
                    weight: b.load_weight,
                    load_switch: b.has_load_switch,
                    source: b.source.as_ref().map(|s| SourceDoc {
                        p_max_kw: s.p_max_kw,
                        q_max_kvar: s.q_max_kvar,
                    }),
                })
                .collect(),
            lines: net
                .power
                .lines
                .iter()
                .map(|l| LineDoc {
                    id: sp(&l.id),
                    from: sp(&l.from_bus),
                    to: sp(&l.to_bus),
                    r_ohm: l.r_ohm,
                    x_ohm: l.x_ohm,
                    p_max_kw: l.p_max_kw,
                    q_max_kvar: l.q_max_kvar,
                    switch_from: l.switch_at_from,
                    switch_to: l.switch_at_to,
                })
                .collect(),
        },
        comm: CommDoc {
            nodes,
            links: net
                .comm
                .links
                .iter()
                .map(|l| LinkDoc {
                    id: sp(&l.id),
                    a: sp(&l.end_a),
                    b: sp(&l.end_b),
                    bandwidth_mbps: l.bandwidth_cap_mbps,
                    delay_ms: l.prop_delay_ms,
                })
                .collect(),
            coupling,
        },
        scenario: ScenarioDoc {
            failed_buses: ids_where(&sc.bus_ok, false),
            failed_lines: ids_where(&sc.line_ok, false),
            failed_nodes: ids_where(&sc.node_ok, false),
            failed_links: ids_where(&sc.link_ok, false),
            closed_lines: ids_where(&sc.line_initial, true),
            served_loads: ids_where(&sc.load_initial, true),
        },
    };
    toml::to_string(&doc).expect("case documents always serialize")
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
format_version = 1

[[power.bus]]
id = "a"
source = { p_max_kw = 500.0, q_max_kvar = 300.0 }

[[power.bus]]
id = "b"
p_kw = 100.0
q_kvar = 50.0

[[power.line]]
id = "ab"
from = "a"
to = "b"
r_ohm = 0.1
x_ohm = 0.1
p_max_kw = 1000.0
q_max_kvar = 1000.0

[[comm.node]]
id = "O"
kind = "center"
bandwidth_mbps = 1000.0
delay_ms = 0.5

[[comm.node]]
id = "Ta"
kind = "terminal"
bandwidth_mbps = 100.0
delay_ms = 0.0

[[comm.node]]
id = "Tb"
kind = "terminal"
bandwidth_mbps = 100.0
delay_ms = 0.0

[[comm.link]]
id = "la"
a = "Ta"
b = "O"
bandwidth_mbps = 10.0
delay_ms = 1.0

[[comm.link]]
id = "lb"
a = "Tb"
b = "O"
bandwidth_mbps = 10.0
delay_ms = 1.0

[[comm.coupling]]
terminal = "Ta"
bus = "a"

[[comm.coupling]]
terminal = "Tb"
bus = "b"
"#;

    #[test]
    fn minimal_two_bus_parses_with_defaults() {
        let case = parse_case(MINIMAL).unwrap();
        assert_eq!(case.net.power.buses.len(), 2);
        let t = case
            .net
            .node(case.net.node_idx("Tb").unwrap())
            .terminal()
            .unwrap();
        assert_eq!(t.required_bandwidth_mbps, 2.0);
        assert_eq!(t.delay_cap_ms, 10.0);
        assert_eq!(case.gap, 1e-4);
        assert_eq!(case.formulation.v_ref_kv, 12.66);
    }

    #[test]
    fn duplicate_bus_reports_location() {
        let text = MINIMAL.replacen("id = \"b\"", "id = \"a\"", 1);
        let err = parse_case(&text).unwrap_err();
        let CaseError::Schema(ds) = &err else {
            panic!("{err}")
        };
        assert!(ds[0].message.contains("duplicate bus id"));
        assert_eq!(ds[0].line, 9);
        assert_eq!(ds[0].col, 6);
    }

    #[test]
    fn missing_coupling_is_an_invariant_error() {
        let cut = MINIMAL
            .find("[[comm.coupling]]\nterminal = \"Tb\"")
            .unwrap();
        let mut text = MINIMAL[..cut].to_string();
        // Replace terminal Tb by a forwarder so only the coupling is missing.
        text = text.replacen(
            "id = \"Tb\"\nkind = \"terminal\"",
            "id = \"Tb\"\nkind = \"forwarder\"",
            1,
        );
        let err = parse_case(&text).unwrap_err();
        assert!(matches!(err, CaseError::Invalid(_)), "{err}");
        assert!(err.to_string().contains("missing coupling"), "{err}");
    }

    #[test]
    fn unknown_field_is_rejected_with_location() {
        let text = MINIMAL.replacen("p_kw = 100.0", "p_kw = 100.0\ncolour = \"red\"", 1);
        let err = parse_case(&text).unwrap_err();
        let CaseError::Syntax(d) = &err else {
            panic!("{err}")
        };
        assert!(d.message.contains("colour"), "{}", d.message);
        assert_eq!(d.line, 11);
    }

    #[test]
    fn emit_parse_round_trip() {
        let case = parse_case(MINIMAL).unwrap();
        let text = emit_case(&case);
        let again = parse_case(&text).unwrap();
        assert_eq!(emit_case(&again), text);
        assert_eq!(again.net.power, case.net.power);
        assert_eq!(again.net.comm, case.net.comm);
        assert_eq!(again.scenario, case.scenario);
    }
}
