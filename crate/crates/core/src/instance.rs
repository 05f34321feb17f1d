//! Problem instances, the line-oriented text format, and detection of the
//! structural parameters the kernels are parameterized by.
//!
//! Vertex ids are 0-based in memory and 1-based in files and reports.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use crate::graph::{components_of, Dsu};

/// Largest admissible edge weight (weights must fit a signed 64-bit word).
pub const MAX_WEIGHT: u64 = i64::MAX as u64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    /// Every vertex is a waypoint, no capacities.
    Tsp,
    /// Only the waypoints must be visited, no capacities.
    SubTsp,
    /// Waypoints plus per-edge capacities 1 or 2.
    Wrp,
}

impl Kind {
    pub fn keyword(self) -> &'static str {
        match self {
            Kind::Tsp => "tsp",
            Kind::SubTsp => "stsp",
            Kind::Wrp => "wrp",
        }
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.keyword())
    }
}

/// How often a walk may traverse an edge. Ordered `One < Two < Unbounded`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Capacity {
    One,
    Two,
    Unbounded,
}

impl Capacity {
    /// Capacity read from a file; anything above 2 is the same as 2.
    pub fn from_count(c: u64) -> Option<Capacity> {
        match c {
            0 => None,
            1 => Some(Capacity::One),
            _ => Some(Capacity::Two),
        }
    }

    pub fn allows(self, multiplicity: u32) -> bool {
        match self {
            Capacity::One => multiplicity <= 1,
            Capacity::Two => multiplicity <= 2,
            Capacity::Unbounded => true,
        }
    }

    /// Largest multiplicity a nice solution can use on such an edge.
    pub fn nice_limit(self) -> u32 {
        match self {
            Capacity::One => 1,
            _ => 2,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub weight: u64,
    pub capacity: Capacity,
}

impl Edge {
    /// An uncapacitated edge.
    pub fn new(u: usize, v: usize, weight: u64) -> Self {
        Edge {
            u,
            v,
            weight,
            capacity: Capacity::Unbounded,
        }
    }

    pub fn with_capacity(u: usize, v: usize, weight: u64, capacity: Capacity) -> Self {
        Edge {
            u,
            v,
            weight,
            capacity,
        }
    }

    pub fn touches(&self, x: usize) -> bool {
        self.u == x || self.v == x
    }

    /// The endpoint that is not `x`.
    pub fn other(&self, x: usize) -> usize {
        if self.u == x {
            self.v
        } else {
            self.u
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum InstanceError {
    #[error("instance needs at least one vertex")]
    NoVertices,
    #[error("edge {index} has endpoint {vertex} outside 1..={n}")]
    EndpointOutOfRange { index: usize, vertex: usize, n: usize },
    #[error("edge {index} is a self-loop")]
    SelfLoop { index: usize },
    #[error("edge {index} has weight {weight} above the 63-bit limit")]
    WeightTooLarge { index: usize, weight: u64 },
    #[error("vertex {0} outside the instance")]
    VertexOutOfRange(usize),
    #[error("{0} instances cannot carry capacities")]
    UnexpectedCapacity(Kind),
    #[error("wrp edge {index} is missing a finite capacity")]
    MissingCapacity { index: usize },
    #[error("tsp instances make every vertex a waypoint")]
    PartialTspWaypoints,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Instance {
    pub kind: Kind,
    pub n: usize,
    pub edges: Vec<Edge>,
    /// Indexed by vertex. Always all `true` for [`Kind::Tsp`].
    pub waypoints: Vec<bool>,
    pub budget: i64,
    /// Sorted, duplicate-free modulator suggestion carried through the file.
    pub modulator_hint: Option<Vec<usize>>,
}

impl Instance {
    /// Builds and validates an instance. For TSP the waypoint list is ignored
    /// and every vertex becomes a waypoint.
    pub fn new(
        kind: Kind,
        n: usize,
        edges: Vec<Edge>,
        waypoints: &[usize],
        budget: i64,
    ) -> Result<Self, InstanceError> {
        let mut marks = vec![kind == Kind::Tsp; n];
        if kind != Kind::Tsp {
            for &w in waypoints {
                if w >= n {
                    return Err(InstanceError::VertexOutOfRange(w));
                }
                marks[w] = true;
            }
        }
        let inst = Instance {
            kind,
            n,
            edges,
            waypoints: marks,
            budget,
            modulator_hint: None,
        };
        inst.validate()?;
        Ok(inst)
    }

    /// TSP instance with uncapacitated edges `(u, v, weight)`.
    pub fn tsp(n: usize, edges: &[(usize, usize, u64)], budget: i64) -> Result<Self, InstanceError> {
        let edges = edges.iter().map(|&(u, v, w)| Edge::new(u, v, w)).collect();
        Instance::new(Kind::Tsp, n, edges, &[], budget)
    }

    /// Subset TSP instance with uncapacitated edges `(u, v, weight)`.
    pub fn subtsp(
        n: usize,
        edges: &[(usize, usize, u64)],
        waypoints: &[usize],
        budget: i64,
    ) -> Result<Self, InstanceError> {
        let edges = edges.iter().map(|&(u, v, w)| Edge::new(u, v, w)).collect();
        Instance::new(Kind::SubTsp, n, edges, waypoints, budget)
    }

    /// Waypoint routing instance with edges `(u, v, weight, capacity)`;
    /// capacities above 2 are stored as 2.
    pub fn wrp(
        n: usize,
        edges: &[(usize, usize, u64, u64)],
        waypoints: &[usize],
        budget: i64,
    ) -> Result<Self, InstanceError> {
        let mut list = Vec::with_capacity(edges.len());
        for (index, &(u, v, w, c)) in edges.iter().enumerate() {
            let cap = Capacity::from_count(c).ok_or(InstanceError::MissingCapacity { index })?;
            list.push(Edge::with_capacity(u, v, w, cap));
        }
        Instance::new(Kind::Wrp, n, list, waypoints, budget)
    }

    pub fn validate(&self) -> Result<(), InstanceError> {
        if self.n == 0 {
            return Err(InstanceError::NoVertices);
        }
        if self.waypoints.len() != self.n {
            return Err(InstanceError::VertexOutOfRange(self.waypoints.len()));
        }
        if self.kind == Kind::Tsp && self.waypoints.iter().any(|&w| !w) {
            return Err(InstanceError::PartialTspWaypoints);
        }
        for (index, e) in self.edges.iter().enumerate() {
            for x in [e.u, e.v] {
                if x >= self.n {
                    return Err(InstanceError::EndpointOutOfRange {
                        index,
                        vertex: x + 1,
                        n: self.n,
                    });
                }
            }
            if e.u == e.v {
                return Err(InstanceError::SelfLoop { index });
            }
            if e.weight > MAX_WEIGHT {
                return Err(InstanceError::WeightTooLarge {
                    index,
                    weight: e.weight,
                });
            }
            match (self.kind, e.capacity) {
                (Kind::Wrp, Capacity::Unbounded) => {
                    return Err(InstanceError::MissingCapacity { index })
                }
                (Kind::Tsp | Kind::SubTsp, Capacity::One | Capacity::Two) => {
                    return Err(InstanceError::UnexpectedCapacity(self.kind))
                }
                _ => {}
            }
        }
        if let Some(h) = &self.modulator_hint {
            if let Some(&x) = h.iter().find(|&&x| x >= self.n) {
                return Err(InstanceError::VertexOutOfRange(x));
            }
        }
        Ok(())
    }

    pub fn m(&self) -> usize {
        self.edges.len()
    }

    pub fn is_waypoint(&self, v: usize) -> bool {
        self.waypoints[v]
    }

    pub fn waypoint_ids(&self) -> Vec<usize> {
        (0..self.n).filter(|&v| self.waypoints[v]).collect()
    }

    pub fn waypoint_count(&self) -> usize {
        self.waypoints.iter().filter(|&&w| w).count()
    }

    /// Multigraph degrees: parallel edges count separately.
    pub fn degrees(&self) -> Vec<usize> {
        let mut d = vec![0; self.n];
        for e in &self.edges {
            d[e.u] += 1;
            d[e.v] += 1;
        }
        d
    }

    /// Incident edge indices per vertex, in edge order.
    pub fn incidence(&self) -> Vec<Vec<usize>> {
        let mut inc = vec![Vec::new(); self.n];
        for (i, e) in self.edges.iter().enumerate() {
            inc[e.u].push(i);
            inc[e.v].push(i);
        }
        inc
    }

    pub fn endpoint_pairs(&self) -> Vec<(usize, usize)> {
        self.edges.iter().map(|e| (e.u, e.v)).collect()
    }

    /// Connected components of the whole graph, isolated vertices included.
    pub fn components(&self) -> Vec<Vec<usize>> {
        components_of(self.n, &self.endpoint_pairs(), &vec![true; self.n])
    }

    /// Sum of all edge weights, `None` on overflow.
    pub fn total_weight(&self) -> Option<u64> {
        self.edges.iter().try_fold(0u64, |acc, e| acc.checked_add(e.weight))
    }

    /// Drops the vertices with `remove[v]` together with their edges.
    /// Returns the new instance and the old-to-new vertex map.
    pub fn remove_vertices(&self, remove: &[bool]) -> (Instance, Vec<Option<usize>>) {
        let mut map = vec![None; self.n];
        let mut next = 0;
        for v in 0..self.n {
            if !remove[v] {
                map[v] = Some(next);
                next += 1;
            }
        }
        let edges = self
            .edges
            .iter()
            .filter_map(|e| match (map[e.u], map[e.v]) {
                (Some(u), Some(v)) => Some(Edge { u, v, ..e.clone() }),
                _ => None,
            })
            .collect();
        let waypoints = (0..self.n)
            .filter(|&v| !remove[v])
            .map(|v| self.waypoints[v])
            .collect();
        let modulator_hint = self
            .modulator_hint
            .as_ref()
            .map(|h| h.iter().filter_map(|&x| map[x]).collect());
        let inst = Instance {
            kind: self.kind,
            n: next,
            edges,
            waypoints,
            budget: self.budget,
            modulator_hint,
        };
        (inst, map)
    }

    /// The same instance read as waypoint routing: uncapacitated edges get
    /// capacity 2, which loses nothing because nice solutions exist.
    pub fn to_wrp(&self) -> Instance {
        let mut out = self.clone();
        out.kind = Kind::Wrp;
        for e in &mut out.edges {
            if e.capacity == Capacity::Unbounded {
                e.capacity = Capacity::Two;
            }
        }
        out
    }

    /// Canonical text form, see [`parse_instance`].
    pub fn render(&self) -> String {
        self.to_string()
    }

    /// Canonical text form preceded by `c` comment lines.
    pub fn render_with_comments(&self, comments: &[String]) -> String {
        let mut s = String::new();
        for c in comments {
            s.push_str("c ");
            s.push_str(c);
            s.push('\n');
        }
        s.push_str(&self.render());
        s
    }
}

fn write_ids(f: &mut fmt::Formatter<'_>, tag: &str, ids: impl Iterator<Item = usize>) -> fmt::Result {
    f.write_str(tag)?;
    for id in ids {
        write!(f, " {}", id + 1)?;
    }
    writeln!(f)
}

impl fmt::Display for Instance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "p {} {} {}", self.kind, self.n, self.edges.len())?;
        writeln!(f, "b {}", self.budget)?;
        if self.kind != Kind::Tsp {
            write_ids(f, "w", self.waypoint_ids().into_iter())?;
        }
        if let Some(h) = &self.modulator_hint {
            write_ids(f, "m", h.iter().copied())?;
        }
        for e in &self.edges {
            write!(f, "e {} {} {}", e.u + 1, e.v + 1, e.weight)?;
            match e.capacity {
                Capacity::One => write!(f, " 1")?,
                Capacity::Two => write!(f, " 2")?,
                Capacity::Unbounded => {}
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("line {line}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

fn perr(line: usize, message: impl Into<String>) -> ParseError {
    ParseError {
        line,
        message: message.into(),
    }
}

fn parse_num<T: FromStr>(line: usize, tok: &str, what: &str) -> Result<T, ParseError> {
    tok.parse()
        .map_err(|_| perr(line, format!("invalid {what} '{tok}'")))
}

fn parse_ids(line: usize, toks: &[&str], n: usize) -> Result<Vec<usize>, ParseError> {
    let mut seen = BTreeSet::new();
    for t in toks {
        let id: usize = parse_num(line, t, "vertex id")?;
        if id == 0 || id > n {
            return Err(perr(line, format!("vertex {id} outside 1..={n}")));
        }
        if !seen.insert(id - 1) {
            return Err(perr(line, format!("vertex {id} listed twice")));
        }
    }
    Ok(seen.into_iter().collect())
}

/// Parses the text format:
///
/// ```text
/// c comment
/// p <tsp|stsp|wrp> <n> <m>
/// b <budget>
/// w <id>...          (stsp and wrp only)
/// m <id>...          (optional modulator hint)
/// e <u> <v> <weight> [<capacity>]   (exactly m lines, capacity for wrp only)
/// ```
///
/// Wrp edges without a capacity get capacity 2.
pub fn parse_instance(text: &str) -> Result<Instance, ParseError> {
    let mut header: Option<(Kind, usize, usize)> = None;
    let mut budget: Option<i64> = None;
    let mut waypoints: Option<Vec<usize>> = None;
    let mut hint: Option<Vec<usize>> = None;
    let mut edges = Vec::new();
    let mut last_line = 0;

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        last_line = line;
        let toks: Vec<&str> = raw.split_whitespace().collect();
        let Some(&tag) = toks.first() else { continue };
        if tag == "c" {
            continue;
        }
        if tag == "p" {
            if header.is_some() {
                return Err(perr(line, "duplicate header"));
            }
            if toks.len() != 4 {
                return Err(perr(line, "header needs kind, vertex count and edge count"));
            }
            let kind = match toks[1] {
                "tsp" => Kind::Tsp,
                "stsp" => Kind::SubTsp,
                "wrp" => Kind::Wrp,
                _ => return Err(perr(line, "unknown problem kind")),
            };
            let n: usize = parse_num(line, toks[2], "vertex count")?;
            if n == 0 {
                return Err(perr(line, "vertex count must be positive"));
            }
            let m: usize = parse_num(line, toks[3], "edge count")?;
            header = Some((kind, n, m));
            continue;
        }
        let Some((kind, n, m)) = header else {
            return Err(perr(line, "record before the problem header"));
        };
        match tag {
            "b" => {
                if budget.is_some() {
                    return Err(perr(line, "duplicate budget"));
                }
                if toks.len() != 2 {
                    return Err(perr(line, "budget record needs one value"));
                }
                budget = Some(parse_num(line, toks[1], "budget")?);
            }
            "w" => {
                if kind == Kind::Tsp {
                    return Err(perr(line, "waypoint list not allowed for tsp"));
                }
                if waypoints.is_some() {
                    return Err(perr(line, "duplicate waypoint list"));
                }
                waypoints = Some(parse_ids(line, &toks[1..], n)?);
            }
            "m" => {
                if hint.is_some() {
                    return Err(perr(line, "duplicate modulator hint"));
                }
                hint = Some(parse_ids(line, &toks[1..], n)?);
            }
            "e" => {
                if edges.len() == m {
                    return Err(perr(line, format!("more than {m} edges")));
                }
                let arity = toks.len() - 1;
                if arity != 3 && !(arity == 4 && kind == Kind::Wrp) {
                    let msg = if arity == 4 {
                        format!("{kind} edges take no capacity")
                    } else {
                        "edge needs endpoints and weight".to_string()
                    };
                    return Err(perr(line, msg));
                }
                let u: usize = parse_num(line, toks[1], "vertex id")?;
                let v: usize = parse_num(line, toks[2], "vertex id")?;
                for x in [u, v] {
                    if x == 0 || x > n {
                        return Err(perr(line, format!("vertex {x} outside 1..={n}")));
                    }
                }
                if u == v {
                    return Err(perr(line, "self-loop"));
                }
                if toks[3].starts_with('-') {
                    return Err(perr(line, "negative weight"));
                }
                let w: u64 = parse_num(line, toks[3], "weight")?;
                if w > MAX_WEIGHT {
                    return Err(perr(line, "weight exceeds 63 bits"));
                }
                let capacity = match kind {
                    Kind::Wrp if arity == 4 => {
                        let c: u64 = parse_num(line, toks[4], "capacity")?;
                        Capacity::from_count(c).ok_or_else(|| perr(line, "capacity must be positive"))?
                    }
                    Kind::Wrp => Capacity::Two,
                    _ => Capacity::Unbounded,
                };
                edges.push(Edge::with_capacity(u - 1, v - 1, w, capacity));
            }
            other => return Err(perr(line, format!("unknown record '{other}'"))),
        }
    }

    let Some((kind, n, m)) = header else {
        return Err(perr(last_line, "missing problem header"));
    };
    let budget = budget.ok_or_else(|| perr(last_line, "missing budget record"))?;
    if edges.len() != m {
        return Err(perr(last_line, format!("expected {m} edges, found {}", edges.len())));
    }
    let mut inst = Instance::new(kind, n, edges, &waypoints.unwrap_or_default(), budget)
        .map_err(|e| perr(last_line, e.to_string()))?;
    inst.modulator_hint = hint;
    Ok(inst)
}

impl FromStr for Instance {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_instance(s)
    }
}

/// Complement of a spanning forest (edge indices). Its size is
/// `m - n + c` where `c` counts connected components.
pub fn compute_fes(inst: &Instance) -> Vec<usize> {
    let mut dsu = Dsu::new(inst.n);
    inst.edges
        .iter()
        .enumerate()
        .filter(|(_, e)| !dsu.union(e.u, e.v))
        .map(|(i, _)| i)
        .collect()
}

/// Feedback edge number `m - n + c`.
pub fn fes_number(inst: &Instance) -> usize {
    inst.m() + inst.components().len() - inst.n
}

/// A minimum vertex cover of size at most `k_max`, found by branching on an
/// uncovered edge. `None` when every cover is larger.
pub fn compute_vc(inst: &Instance, k_max: usize) -> Option<Vec<usize>> {
    let mut pairs: Vec<(usize, usize)> = inst
        .edges
        .iter()
        .map(|e| (e.u.min(e.v), e.u.max(e.v)))
        .collect();
    pairs.sort_unstable();
    pairs.dedup();

    fn branch(pairs: &[(usize, usize)], cover: &mut Vec<bool>, budget: usize) -> bool {
        let Some(&(u, v)) = pairs.iter().find(|&&(u, v)| !cover[u] && !cover[v]) else {
            return true;
        };
        if budget == 0 {
            return false;
        }
        for x in [u, v] {
            cover[x] = true;
            if branch(pairs, cover, budget - 1) {
                return true;
            }
            cover[x] = false;
        }
        false
    }

    for k in 0..=k_max {
        let mut cover = vec![false; inst.n];
        if branch(&pairs, &mut cover, k) {
            return Some((0..inst.n).filter(|&v| cover[v]).collect());
        }
    }
    None
}

/// Whether `set` touches every edge.
pub fn is_vertex_cover(inst: &Instance, set: &[usize]) -> bool {
    let mut inside = vec![false; inst.n];
    for &v in set {
        if v >= inst.n {
            return false;
        }
        inside[v] = true;
    }
    inst.edges.iter().all(|e| inside[e.u] || inside[e.v])
}

/// Target class for the components left after deleting a modulator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Target {
    /// Components with at most `r` vertices.
    Components(usize),
    /// Components inducing paths with at most `r` vertices.
    Paths(usize),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum Regime {
    VertexCover,
    Components(usize),
    Paths(usize),
    FeedbackEdges(Vec<usize>),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ModulatorDecomposition {
    /// Sorted modulator vertices.
    pub modulator: Vec<usize>,
    /// Components of `G - M`, each sorted, ordered by least vertex.
    pub components: Vec<Vec<usize>>,
    pub regime: Regime,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ModulatorError {
    #[error("component bound r must be at least 1")]
    ZeroBound,
    #[error("hint vertex {0} outside the instance")]
    HintOutOfRange(usize),
    #[error("hint leaves component of size {0}")]
    HintComponentTooLarge(usize),
    #[error("hint leaves component that is not a path: {0:?}")]
    HintNotPath(Vec<usize>),
}

/// The first reason why the components of `G - M` miss the target, as a
/// vertex set every valid modulator must intersect.
fn violation(inst: &Instance, in_m: &[bool], target: Target) -> Option<(Vec<usize>, ModulatorError)> {
    let keep: Vec<bool> = in_m.iter().map(|&x| !x).collect();
    let pairs = inst.endpoint_pairs();
    let comps = components_of(inst.n, &pairs, &keep);
    let r = match target {
        Target::Components(r) | Target::Paths(r) => r,
    };
    let mut adj: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); inst.n];
    for &(u, v) in &pairs {
        if keep[u] && keep[v] {
            adj[u].insert(v);
            adj[v].insert(u);
        }
    }
    for comp in comps {
        if comp.len() > r {
            // BFS prefix of r + 1 vertices is connected.
            let mut order = vec![comp[0]];
            let mut seen = BTreeSet::from([comp[0]]);
            let mut head = 0;
            while order.len() <= r {
                let x = order[head];
                head += 1;
                for &y in &adj[x] {
                    if order.len() <= r && seen.insert(y) {
                        order.push(y);
                    }
                }
            }
            return Some((order, ModulatorError::HintComponentTooLarge(comp.len())));
        }
        if let Target::Paths(_) = target {
            if let Some(&v) = comp.iter().find(|&&v| adj[v].len() >= 3) {
                let mut w: Vec<usize> = std::iter::once(v).chain(adj[v].iter().copied().take(3)).collect();
                w.sort_unstable();
                return Some((w, ModulatorError::HintNotPath(comp.clone())));
            }
            let simple_edges: usize = comp.iter().map(|&v| adj[v].len()).sum::<usize>() / 2;
            if simple_edges >= comp.len() {
                return Some((comp.clone(), ModulatorError::HintNotPath(comp.clone())));
            }
        }
    }
    None
}

fn decomposition(inst: &Instance, modulator: Vec<usize>, target: Target) -> ModulatorDecomposition {
    let mut keep = vec![true; inst.n];
    for &v in &modulator {
        keep[v] = false;
    }
    let components = components_of(inst.n, &inst.endpoint_pairs(), &keep);
    let regime = match target {
        Target::Components(r) => Regime::Components(r),
        Target::Paths(r) => Regime::Paths(r),
    };
    ModulatorDecomposition {
        modulator,
        components,
        regime,
    }
}

/// Checks a proposed modulator against the target and builds the
/// decomposition.
pub fn decompose(
    inst: &Instance,
    modulator: &[usize],
    target: Target,
) -> Result<ModulatorDecomposition, ModulatorError> {
    if matches!(target, Target::Components(0) | Target::Paths(0)) {
        return Err(ModulatorError::ZeroBound);
    }
    let mut in_m = vec![false; inst.n];
    for &v in modulator {
        if v >= inst.n {
            return Err(ModulatorError::HintOutOfRange(v + 1));
        }
        in_m[v] = true;
    }
    if let Some((_, err)) = violation(inst, &in_m, target) {
        return Err(err);
    }
    let set: Vec<usize> = (0..inst.n).filter(|&v| in_m[v]).collect();
    Ok(decomposition(inst, set, target))
}

/// Uses the instance's modulator hint when present (an invalid hint is an
/// error), and otherwise searches for a smallest modulator of size at most
/// `k_max` by branching on violating vertex sets. `Ok(None)` means no
/// modulator of that size exists.
pub fn find_modulator(
    inst: &Instance,
    target: Target,
    k_max: usize,
) -> Result<Option<ModulatorDecomposition>, ModulatorError> {
    if let Some(hint) = &inst.modulator_hint {
        return decompose(inst, hint, target).map(Some);
    }
    if matches!(target, Target::Components(0) | Target::Paths(0)) {
        return Err(ModulatorError::ZeroBound);
    }

    fn branch(inst: &Instance, in_m: &mut Vec<bool>, target: Target, budget: usize) -> bool {
        let Some((witness, _)) = violation(inst, in_m, target) else {
            return true;
        };
        if budget == 0 {
            return false;
        }
        for v in witness {
            in_m[v] = true;
            if branch(inst, in_m, target, budget - 1) {
                return true;
            }
            in_m[v] = false;
        }
        false
    }

    for k in 0..=k_max {
        let mut in_m = vec![false; inst.n];
        if branch(inst, &mut in_m, target, k) {
            let set = (0..inst.n).filter(|&v| in_m[v]).collect();
            return Ok(Some(decomposition(inst, set, target)));
        }
    }
    Ok(None)
}
