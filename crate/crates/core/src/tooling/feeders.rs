//! 33-bus and 123-bus benchmark feeders with generated communication
//! networks and random damage.
//!
//! Communication shape: one terminal per bus, attached to a forwarder by
//! blocks of consecutive buses; forwarders form a ring and each has an
//! uplink to the center.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::case::{Case, DEFAULT_DELAY_CAP_MS, DEFAULT_REQUIRED_MBPS};
use crate::netmodel::{
    Bus, CommLink, CommNetwork, CommNode, CoupledNetwork, Line, NodeKind, PowerNetwork, Scenario,
    SourceCaps, TerminalSpec,
};
use crate::planner::{run_iclr, run_olr, run_sclr};

/// Seed whose severe 33-bus case gives OLR < SCLR < ICLR pickup with a
/// multi-stage ICLR plan: the first hit of [`search_ordering_seed`] from 0
/// under the default severe profile.
pub const FEEDER33_SEVERE_SEED: u64 = 1;

pub const ACCESS_MBPS: f64 = 10.0;
pub const ACCESS_MS: f64 = 0.5;
pub const UPLINK_MBPS: f64 = 100.0;
pub const UPLINK_MS: f64 = 1.0;
pub const RING_MBPS: f64 = 6.0;
pub const RING_MS: f64 = 2.0;
pub const FORWARDER_MBPS: f64 = 100.0;
pub const FORWARDER_MS: f64 = 0.5;
pub const CENTER_MBPS: f64 = 1000.0;
pub const CENTER_MS: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SevereParams {
    pub uplink: usize,
    pub ring: usize,
    pub term: usize,
    pub line: usize,
    pub bus: usize,
}

impl Default for SevereParams {
    fn default() -> Self {
        SevereParams {
            uplink: 4,
            ring: 2,
            term: 2,
            line: 2,
            bus: 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DamageProfile {
    None,
    Light,
    Severe(SevereParams),
}

impl DamageProfile {
    fn counts(self) -> SevereParams {
        match self {
            DamageProfile::None => SevereParams {
                uplink: 0,
                ring: 0,
                term: 0,
                line: 0,
                bus: 0,
            },
            DamageProfile::Light => SevereParams {
                uplink: 1,
                ring: 0,
                term: 1,
                line: 1,
                bus: 0,
            },
            DamageProfile::Severe(p) => p,
        }
    }
}

impl fmt::Display for DamageProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DamageProfile::None => f.write_str("none"),
            DamageProfile::Light => f.write_str("light"),
            DamageProfile::Severe(p) => write!(
                f,
                "severe:uplink={},ring={},term={},line={},bus={}",
                p.uplink, p.ring, p.term, p.line, p.bus
            ),
        }
    }
}

impl FromStr for DamageProfile {
    type Err = String;

    /// `none`, `light`, `severe`, or `severe:key=n,...` with keys `uplink`,
    /// `ring`, `term`, `line`, `bus`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (head, rest) = s.split_once(':').unwrap_or((s, ""));
        match head {
            "none" if rest.is_empty() => Ok(DamageProfile::None),
            "light" if rest.is_empty() => Ok(DamageProfile::Light),
            "severe" => {
                let mut p = SevereParams::default();
                for kv in rest.split(',').filter(|x| !x.is_empty()) {
                    let (k, v) = kv
                        .split_once('=')
                        .ok_or_else(|| format!("expected key=value, got {kv:?}"))?;
                    let n: usize = v.parse().map_err(|_| format!("bad count {v:?} for {k}"))?;
                    match k {
                        "uplink" => p.uplink = n,
                        "ring" => p.ring = n,
                        "term" => p.term = n,
                        "line" => p.line = n,
                        "bus" => p.bus = n,
                        _ => return Err(format!("unknown severe parameter {k:?}")),
                    }
                }
                Ok(DamageProfile::Severe(p))
            }
            _ => Err(format!(
                "unknown damage profile {s:?} (expected none, light or severe[:...])"
            )),
        }
    }
}

struct Feeder {
    v_ref_kv: f64,
    /// (bus, P kW, Q kvar) for every bus, in feeder order.
    loads: Vec<(u32, f64, f64)>,
    /// (from, to, r, x)
    lines: Vec<(u32, u32, f64, f64)>,
    /// (bus, P max, Q max)
    sources: Vec<(u32, f64, f64)>,
    forwarders: usize,
    line_cap: f64,
}

fn build(feeder: &Feeder, seed: u64, damage: DamageProfile) -> Case {
    let buses: Vec<Bus> = feeder
        .loads
        .iter()
        .map(|&(id, p, q)| Bus {
            id: id.to_string(),
            p_load_kw: p,
            q_load_kvar: q,
            load_weight: 1.0,
            has_load_switch: true,
            source: feeder
                .sources
                .iter()
                .find(|s| s.0 == id)
                .map(|&(_, pm, qm)| SourceCaps {
                    p_max_kw: pm,
                    q_max_kvar: qm,
                }),
        })
        .collect();
    let lines: Vec<Line> = feeder
        .lines
        .iter()
        .map(|&(a, b, r, x)| Line {
            id: format!("L{a}-{b}"),
            from_bus: a.to_string(),
            to_bus: b.to_string(),
            r_ohm: r,
            x_ohm: x,
            p_max_kw: feeder.line_cap,
            q_max_kvar: feeder.line_cap,
            switch_at_from: true,
            switch_at_to: true,
        })
        .collect();

    let nf = feeder.forwarders;
    let nb = feeder.loads.len();
    let mut nodes = vec![CommNode {
        id: "O".into(),
        kind: NodeKind::Center,
        bandwidth_cap_mbps: CENTER_MBPS,
        forward_delay_ms: CENTER_MS,
    }];
    let mut links = Vec::new();
    let link = |id: String, a: String, b: String, mbps: f64, ms: f64| CommLink {
        id,
        end_a: a,
        end_b: b,
        bandwidth_cap_mbps: mbps,
        prop_delay_ms: ms,
    };
    for f in 1..=nf {
        nodes.push(CommNode {
            id: format!("F{f}"),
            kind: NodeKind::Forwarder,
            bandwidth_cap_mbps: FORWARDER_MBPS,
            forward_delay_ms: FORWARDER_MS,
        });
        links.push(link(
            format!("U{f}"),
            format!("F{f}"),
            "O".into(),
            UPLINK_MBPS,
            UPLINK_MS,
        ));
        let next = f % nf + 1;
        links.push(link(
            format!("R{f}"),
            format!("F{f}"),
            format!("F{next}"),
            RING_MBPS,
            RING_MS,
        ));
    }
    for (i, &(bus, _, _)) in feeder.loads.iter().enumerate() {
        let f = i * nf / nb + 1;
        nodes.push(CommNode {
            id: format!("T{bus}"),
            kind: NodeKind::Terminal(TerminalSpec {
                attached_bus: bus.to_string(),
                required_bandwidth_mbps: DEFAULT_REQUIRED_MBPS,
                delay_cap_ms: DEFAULT_DELAY_CAP_MS,
            }),
            bandwidth_cap_mbps: ACCESS_MBPS,
            forward_delay_ms: 0.0,
        });
        links.push(link(
            format!("A{bus}"),
            format!("T{bus}"),
            format!("F{f}"),
            ACCESS_MBPS,
            ACCESS_MS,
        ));
    }
    let net = CoupledNetwork::new(PowerNetwork { buses, lines }, CommNetwork { nodes, links });
    let mut sc = Scenario::intact(&net);

    let counts = damage.counts();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pick = |pool: Vec<String>, n: usize| -> Vec<String> {
        pool.choose_multiple(&mut rng, n.min(pool.len()))
            .cloned()
            .collect()
    };
    let uplinks = (1..=nf).map(|f| format!("U{f}")).collect();
    let ring = (1..=nf).map(|f| format!("R{f}")).collect();
    let terms = feeder.loads.iter().map(|l| format!("T{}", l.0)).collect();
    let line_ids = net.power.lines.iter().map(|l| l.id.clone()).collect();
    let plain_buses = net
        .power
        .buses
        .iter()
        .filter(|b| !b.has_source())
        .map(|b| b.id.clone())
        .collect();
    for id in pick(uplinks, counts.uplink) {
        sc.link_ok.insert(id, false);
    }
    for id in pick(ring, counts.ring) {
        sc.link_ok.insert(id, false);
    }
    for id in pick(terms, counts.term) {
        sc.node_ok.insert(id, false);
    }
    for id in pick(line_ids, counts.line) {
        sc.line_ok.insert(id, false);
    }
    for id in pick(plain_buses, counts.bus) {
        sc.bus_ok.insert(id, false);
    }
    Case::new(net, sc, feeder.v_ref_kv)
}

const FEEDER33_LINES: [(u32, u32, f64, f64); 37] = [
    (1, 2, 0.0922, 0.0470),
    (2, 3, 0.4930, 0.2511),
    (3, 4, 0.3660, 0.1864),
    (4, 5, 0.3811, 0.1941),
    (5, 6, 0.8190, 0.7070),
    (6, 7, 0.1872, 0.6188),
    (7, 8, 0.7114, 0.2351),
    (8, 9, 1.0300, 0.7400),
    (9, 10, 1.0440, 0.7400),
    (10, 11, 0.1966, 0.0650),
    (11, 12, 0.3744, 0.1238),
    (12, 13, 1.4680, 1.1550),
    (13, 14, 0.5416, 0.7129),
    (14, 15, 0.5910, 0.5260),
    (15, 16, 0.7463, 0.5450),
    (16, 17, 1.2890, 1.7210),
    (17, 18, 0.7320, 0.5740),
    (2, 19, 0.1640, 0.1565),
    (19, 20, 1.5042, 1.3554),
    (20, 21, 0.4095, 0.4784),
    (21, 22, 0.7089, 0.9373),
    (3, 23, 0.4512, 0.3083),
    (23, 24, 0.8980, 0.7091),
    (24, 25, 0.8960, 0.7011),
    (6, 26, 0.2030, 0.1034),
    (26, 27, 0.2842, 0.1447),
    (27, 28, 1.0590, 0.9337),
    (28, 29, 0.8042, 0.7006),
    (29, 30, 0.5075, 0.2585),
    (30, 31, 0.9744, 0.9630),
    (31, 32, 0.3105, 0.3619),
    (32, 33, 0.3410, 0.5302),
    (8, 21, 2.0, 2.0),
    (9, 15, 2.0, 2.0),
    (12, 22, 2.0, 2.0),
    (18, 33, 0.5, 0.5),
    (25, 29, 0.5, 0.5),
];

const FEEDER33_LOADS: [(u32, f64, f64); 33] = [
    (1, 0.0, 0.0),
    (2, 100.0, 60.0),
    (3, 90.0, 40.0),
    (4, 120.0, 80.0),
    (5, 60.0, 30.0),
    (6, 60.0, 20.0),
    (7, 200.0, 100.0),
    (8, 200.0, 100.0),
    (9, 60.0, 20.0),
    (10, 60.0, 20.0),
    (11, 45.0, 30.0),
    (12, 60.0, 35.0),
    (13, 60.0, 35.0),
    (14, 120.0, 80.0),
    (15, 60.0, 10.0),
    (16, 60.0, 20.0),
    (17, 60.0, 20.0),
    (18, 90.0, 40.0),
    (19, 90.0, 40.0),
    (20, 90.0, 40.0),
    (21, 90.0, 40.0),
    (22, 90.0, 40.0),
    (23, 90.0, 50.0),
    (24, 420.0, 200.0),
    (25, 420.0, 200.0),
    (26, 60.0, 25.0),
    (27, 60.0, 25.0),
    (28, 60.0, 20.0),
    (29, 120.0, 70.0),
    (30, 200.0, 600.0),
    (31, 150.0, 70.0),
    (32, 210.0, 100.0),
    (33, 60.0, 40.0),
];

/// 33-bus feeder at 12.66 kV with DGs at buses 18, 21 and 31 and a 44-node
/// communication network (33 terminals, 10 forwarders, one center).
pub fn gen_feeder33(seed: u64, damage: DamageProfile) -> Case {
    let feeder = Feeder {
        v_ref_kv: 12.66,
        loads: FEEDER33_LOADS.to_vec(),
        lines: FEEDER33_LINES.to_vec(),
        sources: vec![
            (18, 1000.0, 800.0),
            (21, 1000.0, 800.0),
            (31, 1400.0, 1200.0),
        ],
        forwarders: 10,
        line_cap: 2000.0,
    };
    build(&feeder, seed, damage)
}

/// Spot loads (P kW, Q kvar) of the 123-bus feeder; buses absent here carry
/// no load.
const FEEDER123_LOADS: [(u32, f64, f64); 85] = [
    (1, 40.0, 20.0),
    (2, 20.0, 10.0),
    (4, 40.0, 20.0),
    (5, 20.0, 10.0),
    (6, 40.0, 20.0),
    (7, 20.0, 10.0),
    (9, 40.0, 20.0),
    (10, 20.0, 10.0),
    (11, 40.0, 20.0),
    (12, 20.0, 10.0),
    (16, 40.0, 20.0),
    (17, 20.0, 10.0),
    (19, 40.0, 20.0),
    (20, 40.0, 20.0),
    (22, 40.0, 20.0),
    (24, 40.0, 20.0),
    (28, 40.0, 20.0),
    (29, 40.0, 20.0),
    (30, 40.0, 20.0),
    (31, 20.0, 10.0),
    (32, 20.0, 10.0),
    (33, 40.0, 20.0),
    (34, 40.0, 20.0),
    (35, 40.0, 20.0),
    (37, 40.0, 20.0),
    (38, 20.0, 10.0),
    (39, 20.0, 10.0),
    (41, 20.0, 10.0),
    (42, 20.0, 10.0),
    (43, 40.0, 20.0),
    (45, 20.0, 10.0),
    (46, 20.0, 10.0),
    (47, 105.0, 75.0),
    (48, 210.0, 150.0),
    (49, 140.0, 95.0),
    (50, 40.0, 20.0),
    (51, 20.0, 10.0),
    (52, 40.0, 20.0),
    (53, 40.0, 20.0),
    (55, 20.0, 10.0),
    (56, 20.0, 10.0),
    (58, 20.0, 10.0),
    (59, 20.0, 10.0),
    (60, 20.0, 10.0),
    (62, 40.0, 20.0),
    (63, 40.0, 20.0),
    (64, 75.0, 35.0),
    (65, 140.0, 100.0),
    (66, 75.0, 35.0),
    (68, 20.0, 10.0),
    (69, 40.0, 20.0),
    (70, 20.0, 10.0),
    (71, 40.0, 20.0),
    (73, 40.0, 20.0),
    (74, 40.0, 20.0),
    (75, 40.0, 20.0),
    (76, 245.0, 180.0),
    (77, 40.0, 20.0),
    (79, 40.0, 20.0),
    (80, 40.0, 20.0),
    (82, 40.0, 20.0),
    (83, 20.0, 10.0),
    (84, 20.0, 10.0),
    (85, 40.0, 20.0),
    (86, 20.0, 10.0),
    (87, 40.0, 20.0),
    (88, 40.0, 20.0),
    (90, 40.0, 20.0),
    (92, 40.0, 20.0),
    (94, 40.0, 20.0),
    (95, 20.0, 10.0),
    (96, 20.0, 10.0),
    (98, 40.0, 20.0),
    (99, 40.0, 20.0),
    (100, 40.0, 20.0),
    (102, 20.0, 10.0),
    (103, 40.0, 20.0),
    (104, 40.0, 20.0),
    (106, 40.0, 20.0),
    (107, 40.0, 20.0),
    (109, 40.0, 20.0),
    (111, 20.0, 10.0),
    (112, 20.0, 10.0),
    (113, 40.0, 20.0),
    (114, 20.0, 10.0),
];

/// Radial 123-bus topology (from, to) followed by the two tie lines.
const FEEDER123_EDGES: [(u32, u32); 124] = [
    (1, 2),
    (1, 3),
    (1, 7),
    (3, 4),
    (3, 5),
    (5, 6),
    (7, 8),
    (8, 12),
    (8, 9),
    (8, 13),
    (9, 14),
    (13, 34),
    (13, 18),
    (14, 11),
    (14, 10),
    (15, 16),
    (15, 17),
    (18, 19),
    (18, 21),
    (19, 20),
    (21, 22),
    (21, 23),
    (23, 24),
    (23, 25),
    (25, 26),
    (25, 28),
    (26, 27),
    (26, 31),
    (27, 33),
    (28, 29),
    (29, 30),
    (31, 32),
    (34, 15),
    (35, 36),
    (35, 40),
    (36, 37),
    (36, 38),
    (38, 39),
    (40, 41),
    (40, 42),
    (42, 43),
    (42, 44),
    (44, 45),
    (44, 47),
    (45, 46),
    (47, 48),
    (47, 49),
    (49, 50),
    (50, 51),
    (52, 53),
    (53, 54),
    (54, 55),
    (54, 57),
    (55, 56),
    (57, 58),
    (57, 60),
    (58, 59),
    (60, 61),
    (60, 62),
    (62, 63),
    (63, 64),
    (64, 65),
    (65, 66),
    (67, 68),
    (67, 72),
    (67, 97),
    (68, 69),
    (69, 70),
    (70, 71),
    (72, 73),
    (72, 76),
    (73, 74),
    (74, 75),
    (76, 77),
    (76, 86),
    (77, 78),
    (78, 79),
    (78, 80),
    (80, 81),
    (81, 82),
    (81, 84),
    (82, 83),
    (84, 85),
    (86, 87),
    (87, 88),
    (87, 89),
    (89, 90),
    (89, 91),
    (91, 92),
    (91, 93),
    (93, 94),
    (93, 95),
    (95, 96),
    (97, 98),
    (98, 99),
    (99, 100),
    (101, 102),
    (101, 105),
    (102, 103),
    (103, 104),
    (105, 106),
    (105, 108),
    (106, 107),
    (108, 109),
    (109, 110),
    (110, 111),
    (110, 112),
    (112, 113),
    (113, 114),
    (18, 135),
    (135, 35),
    (13, 152),
    (152, 52),
    (60, 160),
    (160, 67),
    (97, 197),
    (197, 101),
    (30, 251),
    (100, 451),
    (108, 350),
    (95, 195),
    (61, 610),
    (54, 94),
    (51, 350),
];

const FEEDER123_EXTRA_BUSES: [u32; 9] = [135, 152, 160, 197, 251, 451, 350, 195, 610];
const FEEDER123_DGS: [(u32, f64, f64); 5] = [
    (195, 1200.0, 960.0),
    (251, 1200.0, 960.0),
    (350, 1200.0, 960.0),
    (451, 1200.0, 960.0),
    (610, 1200.0, 960.0),
];

/// 123-bus feeder at 4.16 kV with DGs at buses 195, 251, 350, 451 and 610
/// and a 161-node communication network (123 terminals, 37 forwarders, one
/// center).
pub fn gen_feeder123(seed: u64, damage: DamageProfile) -> Case {
    let mut ids: Vec<u32> = (1..=114).chain(FEEDER123_EXTRA_BUSES).collect();
    ids.sort_unstable();
    let loads = ids
        .iter()
        .map(|&b| {
            FEEDER123_LOADS
                .iter()
                .find(|l| l.0 == b)
                .copied()
                .unwrap_or((b, 0.0, 0.0))
        })
        .collect();
    let mut degree = std::collections::BTreeMap::<u32, usize>::new();
    let n_ties = 2;
    let radial = &FEEDER123_EDGES[..FEEDER123_EDGES.len() - n_ties];
    for &(a, b) in radial {
        *degree.entry(a).or_default() += 1;
        *degree.entry(b).or_default() += 1;
    }
    let lines = FEEDER123_EDGES
        .iter()
        .enumerate()
        .map(|(i, &(a, b))| {
            let (r, x) = if i >= radial.len() {
                (0.15, 0.15)
            } else if degree[&a] == 1 || degree[&b] == 1 {
                (0.1, 0.075)
            } else {
                (0.06, 0.05)
            };
            (a, b, r, x)
        })
        .collect();
    let feeder = Feeder {
        v_ref_kv: 4.16,
        loads,
        lines,
        sources: FEEDER123_DGS.to_vec(),
        forwarders: 37,
        line_cap: 2000.0,
    };
    build(&feeder, seed, damage)
}

/// Pickups of the three algorithms on one case, plus the ICLR stage count.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ordering {
    pub olr_kw: f64,
    pub sclr_kw: f64,
    pub iclr_kw: f64,
    pub iclr_stages: usize,
}

impl Ordering {
    /// OLR < SCLR < ICLR with a multi-stage ICLR plan.
    pub fn is_strict(&self) -> bool {
        self.olr_kw < self.sclr_kw && self.sclr_kw < self.iclr_kw && self.iclr_stages >= 2
    }
}

pub fn measure_ordering(case: &Case) -> Result<Ordering, crate::PlanError> {
    let cfg = case.planner_config();
    let olr = run_olr(&case.net, &case.scenario, &cfg)?;
    let sclr = run_sclr(&case.net, &case.scenario, &cfg)?;
    let iclr = run_iclr(&case.net, &case.scenario, &cfg)?;
    Ok(Ordering {
        olr_kw: olr.total_pickup_kw,
        sclr_kw: sclr.total_pickup_kw,
        iclr_kw: iclr.total_pickup_kw,
        iclr_stages: iclr.stages.len(),
    })
}

/// First seed in `seeds` whose generated case shows the strict ordering.
pub fn search_ordering_seed(
    generate: impl Fn(u64) -> Case,
    seeds: std::ops::Range<u64>,
) -> Option<(u64, Ordering)> {
    seeds.into_iter().find_map(|seed| {
        measure_ordering(&generate(seed))
            .ok()
            .filter(Ordering::is_strict)
            .map(|o| (seed, o))
    })
}
