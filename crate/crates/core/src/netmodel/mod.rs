//! Network data model: buses, lines, graph orientation and spanning-tree indexing.
//!
//! Bus 0 is always the slack bus and the root of every tree computed here.
//! All types are immutable once built.

mod case;
mod tree;

pub use case::{parse_case, serialize_case};
pub use tree::{spanning_tree, TreeIndex};

use num_complex::Complex64;
use thiserror::Error;

/// Default squared-voltage bounds for non-slack buses that omit them.
pub const DEFAULT_V_MIN: f64 = 0.81;
pub const DEFAULT_V_MAX: f64 = 1.21;

#[derive(Debug, Error)]
pub enum CaseError {
    #[error("case syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid case: {0}")]
    Semantic(String),
    #[error("network is not radial: {edges} lines for {buses} buses")]
    NotRadial { buses: usize, edges: usize },
}

fn semantic(msg: impl Into<String>) -> CaseError {
    CaseError::Semantic(msg.into())
}

/// A bus with injection and squared-voltage bounds (p.u.).
///
/// Complex bounds are componentwise: `s_min <= s <= s_max` means both the real and
/// the imaginary parts are bounded. Missing bounds are `±∞` per component.
#[derive(Debug, Clone, PartialEq)]
pub struct Bus {
    pub id: usize,
    pub s_min: Complex64,
    pub s_max: Complex64,
    pub v_min: f64,
    pub v_max: f64,
    /// Weight on real injection for generation-cost objectives.
    pub cost: f64,
}

impl Bus {
    pub fn unbounded(id: usize, v_min: f64, v_max: f64) -> Self {
        Self {
            id,
            s_min: Complex64::new(f64::NEG_INFINITY, f64::NEG_INFINITY),
            s_max: Complex64::new(f64::INFINITY, f64::INFINITY),
            v_min,
            v_max,
            cost: 1.0,
        }
    }

    /// A bus whose injection is pinned to `s`.
    pub fn fixed(id: usize, s: Complex64, v_min: f64, v_max: f64) -> Self {
        Self {
            id,
            s_min: s,
            s_max: s,
            v_min,
            v_max,
            cost: 1.0,
        }
    }

    /// Injection is pinned in both components.
    pub fn has_fixed_injection(&self) -> bool {
        self.s_min == self.s_max
    }
}

/// A line with series impedance `z` and admittance `y = 1/z`.
#[derive(Debug, Clone, PartialEq)]
pub struct Line {
    pub from: usize,
    pub to: usize,
    pub z: Complex64,
    pub y: Complex64,
}

impl Line {
    pub fn new(from: usize, to: usize, z: Complex64) -> Self {
        Self {
            from,
            to,
            z,
            y: z.inv(),
        }
    }
}

/// Connected undirected network on buses `0..=n`.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    buses: Vec<Bus>,
    lines: Vec<Line>,
    v0: f64,
    // neighbour lists sorted by bus id: (neighbour, line index)
    adjacency: Vec<Vec<(usize, usize)>>,
}

impl Network {
    /// Validates and builds a network.
    ///
    /// Buses must be listed in id order starting with the slack bus 0.
    pub fn new(buses: Vec<Bus>, lines: Vec<Line>, v0: f64) -> Result<Self, CaseError> {
        if buses.is_empty() {
            return Err(semantic("a network needs at least the slack bus"));
        }
        if !(v0.is_finite() && v0 > 0.0) {
            return Err(semantic(format!("base voltage v0 = {v0} must be positive")));
        }
        for (k, bus) in buses.iter().enumerate() {
            if bus.id != k {
                return Err(semantic(format!(
                    "bus ids must be 0..n in order; found id {} at position {k}",
                    bus.id
                )));
            }
            if !(bus.v_min > 0.0) {
                return Err(semantic(format!("bus {k}: v_min must be > 0")));
            }
            if !(bus.v_min <= bus.v_max) {
                return Err(semantic(format!("bus {k}: v_min > v_max")));
            }
            if bus.s_min.re > bus.s_max.re || bus.s_min.im > bus.s_max.im {
                return Err(semantic(format!("bus {k}: s_min exceeds s_max")));
            }
            if bus.s_min.re.is_nan()
                || bus.s_min.im.is_nan()
                || bus.s_max.re.is_nan()
                || bus.s_max.im.is_nan()
            {
                return Err(semantic(format!("bus {k}: NaN injection bound")));
            }
            if !bus.cost.is_finite() {
                return Err(semantic(format!("bus {k}: cost weight must be finite")));
            }
        }
        let slack = &buses[0];
        if slack.v_min != v0 || slack.v_max != v0 {
            return Err(semantic(format!(
                "slack bus voltage bounds [{}, {}] must equal v0 = {v0}",
                slack.v_min, slack.v_max
            )));
        }

        let n_bus = buses.len();
        let mut adjacency = vec![Vec::new(); n_bus];
        let mut seen = std::collections::BTreeSet::new();
        for (e, line) in lines.iter().enumerate() {
            if line.from >= n_bus || line.to >= n_bus {
                return Err(semantic(format!(
                    "line {e} references unknown bus ({}, {})",
                    line.from, line.to
                )));
            }
            if line.from == line.to {
                return Err(semantic(format!("line {e} is a self-loop at bus {}", line.from)));
            }
            let key = (line.from.min(line.to), line.from.max(line.to));
            if !seen.insert(key) {
                return Err(semantic(format!(
                    "duplicate line between buses {} and {}",
                    key.0, key.1
                )));
            }
            let finite = line.z.re.is_finite() && line.z.im.is_finite();
            let y_ok = line.y.re.is_finite() && line.y.im.is_finite() && line.y.norm() > 0.0;
            if !finite || line.z.norm() == 0.0 || !y_ok {
                return Err(semantic(format!(
                    "line {e} must have finite nonzero impedance and admittance"
                )));
            }
            adjacency[line.from].push((line.to, e));
            adjacency[line.to].push((line.from, e));
        }
        for nbrs in &mut adjacency {
            nbrs.sort_unstable();
        }

        // connectivity from the slack bus
        let mut visited = vec![false; n_bus];
        let mut stack = vec![0usize];
        visited[0] = true;
        while let Some(j) = stack.pop() {
            for &(k, _) in &adjacency[j] {
                if !visited[k] {
                    visited[k] = true;
                    stack.push(k);
                }
            }
        }
        if let Some(k) = visited.iter().position(|v| !v) {
            return Err(semantic(format!("network is disconnected: bus {k} unreachable")));
        }

        Ok(Self {
            buses,
            lines,
            v0,
            adjacency,
        })
    }

    pub fn buses(&self) -> &[Bus] {
        &self.buses
    }

    pub fn bus(&self, j: usize) -> &Bus {
        &self.buses[j]
    }

    pub fn lines(&self) -> &[Line] {
        &self.lines
    }

    pub fn line(&self, e: usize) -> &Line {
        &self.lines[e]
    }

    /// Squared slack-bus voltage.
    pub fn v0(&self) -> f64 {
        self.v0
    }

    /// Total number of buses, `n + 1`.
    pub fn bus_count(&self) -> usize {
        self.buses.len()
    }

    /// Number of non-slack buses `n`.
    pub fn n(&self) -> usize {
        self.buses.len() - 1
    }

    /// Number of lines `m`.
    pub fn m(&self) -> usize {
        self.lines.len()
    }

    /// Neighbours of `j` with the connecting line index, sorted by neighbour id.
    pub fn neighbors(&self, j: usize) -> &[(usize, usize)] {
        &self.adjacency[j]
    }

    /// Index of the line joining `j` and `k`, if any.
    pub fn line_between(&self, j: usize, k: usize) -> Option<usize> {
        self.adjacency[j]
            .binary_search_by_key(&k, |&(nb, _)| nb)
            .ok()
            .map(|pos| self.adjacency[j][pos].1)
    }

    /// Connected with exactly `n` lines.
    pub fn is_radial(&self) -> bool {
        self.m() == self.n()
    }

    /// Returns a copy with bus `j`'s injection bounds replaced.
    pub fn with_injection_bounds(&self, j: usize, s_min: Complex64, s_max: Complex64) -> Result<Self, CaseError> {
        let mut buses = self.buses.clone();
        buses[j].s_min = s_min;
        buses[j].s_max = s_max;
        Network::new(buses, self.lines.clone(), self.v0)
    }

    /// Returns a copy with every non-slack injection pinned to `s[j]`.
    pub fn with_fixed_injections(&self, s: &[Complex64]) -> Result<Self, CaseError> {
        let mut buses = self.buses.clone();
        for (j, bus) in buses.iter_mut().enumerate().skip(1) {
            bus.s_min = s[j];
            bus.s_max = s[j];
        }
        Network::new(buses, self.lines.clone(), self.v0)
    }
}

/// How to direct the lines of a network.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    /// Every line points away from bus 0 (radial networks only).
    AwayFromRoot,
    /// Every line points toward bus 0 (radial networks only).
    TowardRoot,
    /// Lines keep their `from -> to` direction from the case.
    AsListed,
}

/// A network with one direction fixed per line.
///
/// Edge `e` always corresponds to line `e` of the base network.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectedNetwork {
    base: Network,
    edges: Vec<(usize, usize)>,
    out_edges: Vec<Vec<usize>>,
    in_edges: Vec<Vec<usize>>,
}

impl DirectedNetwork {
    /// Builds a directed network from explicit edge directions.
    ///
    /// `edges[e]` must join the endpoints of line `e`.
    pub fn from_edges(base: Network, edges: Vec<(usize, usize)>) -> Result<Self, CaseError> {
        if edges.len() != base.m() {
            return Err(semantic("orientation must cover every line exactly once"));
        }
        for (e, &(j, k)) in edges.iter().enumerate() {
            let line = base.line(e);
            let same = (j, k) == (line.from, line.to) || (k, j) == (line.from, line.to);
            if !same {
                return Err(semantic(format!("edge {e} ({j}->{k}) does not match its line")));
            }
        }
        let n_bus = base.bus_count();
        let mut out_edges = vec![Vec::new(); n_bus];
        let mut in_edges = vec![Vec::new(); n_bus];
        for (e, &(j, k)) in edges.iter().enumerate() {
            out_edges[j].push(e);
            in_edges[k].push(e);
        }
        Ok(Self {
            base,
            edges,
            out_edges,
            in_edges,
        })
    }

    pub fn base(&self) -> &Network {
        &self.base
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn edge(&self, e: usize) -> (usize, usize) {
        self.edges[e]
    }

    pub fn m(&self) -> usize {
        self.edges.len()
    }

    pub fn bus_count(&self) -> usize {
        self.base.bus_count()
    }

    pub fn z(&self, e: usize) -> Complex64 {
        self.base.line(e).z
    }

    pub fn y(&self, e: usize) -> Complex64 {
        self.base.line(e).y
    }

    /// Edges leaving bus `j`.
    pub fn out_edges(&self, j: usize) -> &[usize] {
        &self.out_edges[j]
    }

    /// Edges entering bus `j`.
    pub fn in_edges(&self, j: usize) -> &[usize] {
        &self.in_edges[j]
    }

    /// Same network with every edge reversed.
    pub fn reversed(&self) -> Self {
        let edges = self.edges.iter().map(|&(j, k)| (k, j)).collect();
        Self::from_edges(self.base.clone(), edges).expect("reversal preserves line endpoints")
    }
}

/// Directs every line of `net` according to `mode`.
pub fn orient(net: &Network, mode: Orientation) -> Result<DirectedNetwork, CaseError> {
    let edges = match mode {
        Orientation::AsListed => net.lines().iter().map(|l| (l.from, l.to)).collect(),
        Orientation::AwayFromRoot | Orientation::TowardRoot => {
            if !net.is_radial() {
                return Err(CaseError::NotRadial {
                    buses: net.bus_count(),
                    edges: net.m(),
                });
            }
            let depth = bfs_depth(net);
            net.lines()
                .iter()
                .map(|l| {
                    let (parent, child) = if depth[l.from] < depth[l.to] {
                        (l.from, l.to)
                    } else {
                        (l.to, l.from)
                    };
                    if mode == Orientation::AwayFromRoot {
                        (parent, child)
                    } else {
                        (child, parent)
                    }
                })
                .collect()
        }
    };
    DirectedNetwork::from_edges(net.clone(), edges)
}

fn bfs_depth(net: &Network) -> Vec<usize> {
    let mut depth = vec![usize::MAX; net.bus_count()];
    let mut queue = std::collections::VecDeque::from([0usize]);
    depth[0] = 0;
    while let Some(j) = queue.pop_front() {
        for &(k, _) in net.neighbors(j) {
            if depth[k] == usize::MAX {
                depth[k] = depth[j] + 1;
                queue.push_back(k);
            }
        }
    }
    depth
}
