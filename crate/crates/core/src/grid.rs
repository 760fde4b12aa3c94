//! Topology helpers shared by the formulation, planners and verifier.

use crate::netmodel::{CoupledNetwork, Scenario};

pub(crate) struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Returns false when `a` and `b` were already joined.
    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.parent[ra.max(rb)] = ra.min(rb);
        true
    }
}

/// Whether a line may be closed at all: the line and both end buses work.
pub(crate) fn line_permitted(net: &CoupledNetwork, sc: &Scenario, k: usize) -> bool {
    let l = net.line(k);
    sc.line_ok(&l.id) && sc.bus_ok(&l.from_bus) && sc.bus_ok(&l.to_bus)
}

/// Connected components of the closed-line subgraph.
pub(crate) struct Islands {
    /// Component representative per bus.
    pub root: Vec<usize>,
    pub buses: Vec<usize>,
    pub lines: Vec<usize>,
    pub sources: Vec<usize>,
    pub cyclic: Vec<bool>,
}

impl Islands {
    pub fn new(net: &CoupledNetwork, closed: &[bool]) -> Self {
        let n = net.power.buses.len();
        let mut uf = UnionFind::new(n);
        let mut cyclic_root = Vec::new();
        for (k, &c) in closed.iter().enumerate() {
            if c {
                let (i, j) = net.line_ends(k);
                if !uf.union(i, j) {
                    cyclic_root.push(i);
                }
            }
        }
        let root: Vec<usize> = (0..n).map(|i| uf.find(i)).collect();
        let mut isl = Islands {
            buses: vec![0; n],
            lines: vec![0; n],
            sources: vec![0; n],
            cyclic: vec![false; n],
            root,
        };
        for i in 0..n {
            let r = isl.root[i];
            isl.buses[r] += 1;
            if net.bus(i).has_source() {
                isl.sources[r] += 1;
            }
        }
        for (k, &c) in closed.iter().enumerate() {
            if c {
                let r = isl.root[net.line_ends(k).0];
                isl.lines[r] += 1;
            }
        }
        for i in cyclic_root {
            let r = isl.root[i];
            isl.cyclic[r] = true;
        }
        isl
    }

    /// A radial island fed by exactly one source.
    pub fn is_fed_tree(&self, i: usize) -> bool {
        let r = self.root[i];
        !self.cyclic[r] && self.sources[r] == 1
    }
}

/// Buses that can carry load under `closed`: working buses in a radial
/// island with exactly one source, where every bus of the island works.
pub(crate) fn live_buses(net: &CoupledNetwork, sc: &Scenario, closed: &[bool]) -> Vec<bool> {
    let isl = Islands::new(net, closed);
    let n = net.power.buses.len();
    let mut broken = vec![false; n];
    for i in 0..n {
        if !sc.bus_ok(&net.bus(i).id) {
            broken[isl.root[i]] = true;
        }
    }
    (0..n)
        .map(|i| isl.is_fed_tree(i) && !broken[isl.root[i]])
        .collect()
}
