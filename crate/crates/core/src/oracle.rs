//! Exact solvers and solution utilities used to certify reductions at desk
//! scale.
//!
//! Solutions are Eulerian submultigraphs: a multiplicity per edge such that
//! every vertex has even degree, the used edges form one connected piece,
//! and every waypoint is on it. Such a multigraph is exactly the edge set of
//! a closed walk.

use std::env;

use rustc_hash::FxHashMap;
use serde::Serialize;
use thiserror::Error;

use crate::graph::{support_connected, Dsu};
use crate::instance::{Instance, Kind};

/// Environment variable overriding [`OracleCaps`], e.g.
/// `edges=14,waypoints=18,frontier=14`.
pub const CAPS_ENV: &str = "TSPKERN_ORACLE_CAPS";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct OracleCaps {
    /// Edge limit of the multiplicity enumeration.
    pub max_edges: usize,
    /// Waypoint limit of Held–Karp.
    pub max_waypoints: usize,
    /// Largest frontier the frontier engine accepts.
    pub max_frontier: usize,
}

impl Default for OracleCaps {
    fn default() -> Self {
        OracleCaps {
            max_edges: 14,
            max_waypoints: 18,
            max_frontier: 14,
        }
    }
}

impl OracleCaps {
    /// Parses `key=value` pairs separated by commas; unknown keys are errors.
    pub fn parse(spec: &str) -> Result<Self, String> {
        let mut caps = OracleCaps::default();
        for part in spec.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (key, value) = part
                .split_once('=')
                .ok_or_else(|| format!("expected key=value, got '{part}'"))?;
            let value: usize = value
                .trim()
                .parse()
                .map_err(|_| format!("invalid number in '{part}'"))?;
            match key.trim() {
                "edges" => caps.max_edges = value,
                "waypoints" => caps.max_waypoints = value,
                "frontier" => caps.max_frontier = value,
                other => return Err(format!("unknown oracle cap '{other}'")),
            }
        }
        Ok(caps)
    }

    /// Defaults, overridden by [`CAPS_ENV`] when set.
    pub fn from_env() -> Result<Self, String> {
        match env::var(CAPS_ENV) {
            Ok(spec) => OracleCaps::parse(&spec),
            Err(_) => Ok(OracleCaps::default()),
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("oracle scale exceeded: {what} is {value}, cap {cap}")]
    ScaleExceeded {
        what: &'static str,
        value: usize,
        cap: usize,
    },
    #[error("capacities unsupported by this engine")]
    CapacitiesUnsupported,
    #[error("invalid certificate: {0}")]
    InvalidCertificate(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SolutionMultigraph {
    pub multiplicity: Vec<u32>,
    pub total_weight: u64,
}

impl SolutionMultigraph {
    /// Wraps a multiplicity vector, computing its weight (saturating).
    pub fn new(inst: &Instance, multiplicity: Vec<u32>) -> Self {
        let total_weight = weight_of(inst, &multiplicity);
        SolutionMultigraph {
            multiplicity,
            total_weight,
        }
    }

    pub fn empty(inst: &Instance) -> Self {
        SolutionMultigraph::new(inst, vec![0; inst.m()])
    }

    pub fn traversals(&self) -> u64 {
        self.multiplicity.iter().map(|&x| x as u64).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.multiplicity.iter().all(|&x| x == 0)
    }
}

fn weight_of(inst: &Instance, mult: &[u32]) -> u64 {
    inst.edges
        .iter()
        .zip(mult)
        .fold(0u64, |acc, (e, &k)| acc.saturating_add(e.weight.saturating_mul(k as u64)))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OptResult {
    pub feasible: bool,
    /// Least weight of a solution ignoring the budget; `None` if none exists.
    pub opt_weight: Option<u64>,
    pub witness: Option<SolutionMultigraph>,
}

impl OptResult {
    fn from_opt(inst: &Instance, best: Option<(u64, Vec<u32>)>) -> Self {
        match best {
            Some((w, mult)) => OptResult {
                feasible: (w as i128) <= inst.budget as i128,
                opt_weight: Some(w),
                witness: Some(SolutionMultigraph::new(inst, mult)),
            },
            None => OptResult {
                feasible: false,
                opt_weight: None,
                witness: None,
            },
        }
    }

    fn trivial(inst: &Instance) -> Self {
        OptResult::from_opt(inst, Some((0, vec![0; inst.m()])))
    }
}

/// Everything but the budget: capacities, even degrees, connected support,
/// covered waypoints. The empty multigraph passes when there is at most one
/// waypoint.
fn structural_error(inst: &Instance, mult: &[u32]) -> Option<String> {
    if mult.len() != inst.m() {
        return Some(format!("{} multiplicities for {} edges", mult.len(), inst.m()));
    }
    for (i, (e, &k)) in inst.edges.iter().zip(mult).enumerate() {
        if !e.capacity.allows(k) {
            return Some(format!("edge {} used {k} times beyond its capacity", i + 1));
        }
    }
    if mult.iter().all(|&k| k == 0) && inst.waypoint_count() <= 1 {
        return None;
    }
    let mut deg = vec![0u64; inst.n];
    for (e, &k) in inst.edges.iter().zip(mult) {
        deg[e.u] += k as u64;
        deg[e.v] += k as u64;
    }
    if let Some(v) = (0..inst.n).find(|&v| deg[v] % 2 == 1) {
        return Some(format!("vertex {} has odd degree", v + 1));
    }
    if let Some(v) = (0..inst.n).find(|&v| inst.waypoints[v] && deg[v] == 0) {
        return Some(format!("waypoint {} is not visited", v + 1));
    }
    let used: Vec<(usize, usize)> = inst
        .edges
        .iter()
        .zip(mult)
        .filter(|(_, &k)| k > 0)
        .map(|(e, _)| (e.u, e.v))
        .collect();
    if !support_connected(inst.n, &used, &deg) {
        return Some("support is disconnected".into());
    }
    None
}

/// Whether `sol` is a closed walk visiting all waypoints within budget.
pub fn check_certificate(inst: &Instance, sol: &SolutionMultigraph) -> bool {
    structural_error(inst, &sol.multiplicity).is_none()
        && (weight_of(inst, &sol.multiplicity) as i128) <= inst.budget as i128
}

fn order_edges_bfs(inst: &Instance) -> Vec<usize> {
    let inc = inst.incidence();
    let start = inst.waypoint_ids().first().copied().unwrap_or(0);
    let mut pos = vec![usize::MAX; inst.n];
    let mut queue = vec![start];
    pos[start] = 0;
    let mut head = 0;
    let mut next = 1;
    loop {
        while head < queue.len() {
            let x = queue[head];
            head += 1;
            for &i in &inc[x] {
                let y = inst.edges[i].other(x);
                if pos[y] == usize::MAX {
                    pos[y] = next;
                    next += 1;
                    queue.push(y);
                }
            }
        }
        match (0..inst.n).find(|&v| pos[v] == usize::MAX) {
            Some(v) => {
                pos[v] = next;
                next += 1;
                queue.push(v);
            }
            None => break,
        }
    }
    let mut order: Vec<usize> = (0..inst.m()).collect();
    order.sort_by_key(|&i| {
        let e = &inst.edges[i];
        (pos[e.u].max(pos[e.v]), pos[e.u].min(pos[e.v]), i)
    });
    order
}

/// Minimum-weight solution over multiplicities in `{0,1,2}^m` (clipped by
/// capacities), by depth-first search with parity and weight pruning.
pub fn solve_exact_multiplicity(inst: &Instance, caps: &OracleCaps) -> Result<OptResult, OracleError> {
    if inst.m() > caps.max_edges {
        return Err(OracleError::ScaleExceeded {
            what: "edge count",
            value: inst.m(),
            cap: caps.max_edges,
        });
    }
    if inst.waypoint_count() <= 1 {
        return Ok(OptResult::trivial(inst));
    }
    let order = order_edges_bfs(inst);
    let mut last = vec![usize::MAX; inst.n];
    for (p, &i) in order.iter().enumerate() {
        last[inst.edges[i].u] = p;
        last[inst.edges[i].v] = p;
    }
    if (0..inst.n).any(|v| inst.waypoints[v] && last[v] == usize::MAX) {
        return Ok(OptResult::from_opt(inst, None));
    }
    let mut closing: Vec<Vec<usize>> = vec![Vec::new(); order.len()];
    for v in 0..inst.n {
        if last[v] != usize::MAX {
            closing[last[v]].push(v);
        }
    }

    struct Search<'a> {
        inst: &'a Instance,
        order: Vec<usize>,
        closing: Vec<Vec<usize>>,
        mult: Vec<u32>,
        deg: Vec<u64>,
        best: Option<(u64, Vec<u32>)>,
    }

    impl Search<'_> {
        fn run(&mut self, p: usize, weight: u64) {
            if let Some((b, _)) = &self.best {
                if weight >= *b {
                    return;
                }
            }
            if p == self.order.len() {
                let used: Vec<(usize, usize)> = self
                    .inst
                    .edges
                    .iter()
                    .zip(&self.mult)
                    .filter(|(_, &k)| k > 0)
                    .map(|(e, _)| (e.u, e.v))
                    .collect();
                if support_connected(self.inst.n, &used, &self.deg) {
                    self.best = Some((weight, self.mult.clone()));
                }
                return;
            }
            let i = self.order[p];
            let e = self.inst.edges[i].clone();
            for k in 0..=e.capacity.nice_limit() {
                self.mult[i] = k;
                self.deg[e.u] += k as u64;
                self.deg[e.v] += k as u64;
                let ok = self.closing[p]
                    .iter()
                    .all(|&v| self.deg[v] % 2 == 0 && (self.deg[v] > 0 || !self.inst.waypoints[v]));
                if ok {
                    self.run(p + 1, weight.saturating_add(e.weight.saturating_mul(k as u64)));
                }
                self.deg[e.u] -= k as u64;
                self.deg[e.v] -= k as u64;
            }
            self.mult[i] = 0;
        }
    }

    let mut s = Search {
        inst,
        order,
        closing,
        mult: vec![0; inst.m()],
        deg: vec![0; inst.n],
        best: None,
    };
    s.run(0, 0);
    Ok(OptResult::from_opt(inst, s.best))
}

const INF: u64 = u64::MAX;

/// Held–Karp over the waypoints on the shortest-path metric. Walks may
/// revisit vertices, so the tour optimum on the metric closure equals the
/// multigraph optimum.
pub fn solve_heldkarp(inst: &Instance, caps: &OracleCaps) -> Result<OptResult, OracleError> {
    if inst.kind == Kind::Wrp {
        return Err(OracleError::CapacitiesUnsupported);
    }
    let wps = inst.waypoint_ids();
    if wps.len() > caps.max_waypoints {
        return Err(OracleError::ScaleExceeded {
            what: "waypoint count",
            value: wps.len(),
            cap: caps.max_waypoints,
        });
    }
    if wps.len() <= 1 {
        return Ok(OptResult::trivial(inst));
    }
    let n = inst.n;
    let mut dist = vec![vec![INF; n]; n];
    // First edge on a shortest path from i to j.
    let mut next: Vec<Vec<Option<usize>>> = vec![vec![None; n]; n];
    for v in 0..n {
        dist[v][v] = 0;
    }
    for (i, e) in inst.edges.iter().enumerate() {
        if e.weight < dist[e.u][e.v] {
            dist[e.u][e.v] = e.weight;
            dist[e.v][e.u] = e.weight;
            next[e.u][e.v] = Some(i);
            next[e.v][e.u] = Some(i);
        }
    }
    for k in 0..n {
        for i in 0..n {
            if dist[i][k] == INF {
                continue;
            }
            for j in 0..n {
                if dist[k][j] == INF {
                    continue;
                }
                let via = dist[i][k].saturating_add(dist[k][j]);
                if via < dist[i][j] {
                    dist[i][j] = via;
                    next[i][j] = next[i][k];
                }
            }
        }
    }
    let t = wps.len();
    let start = wps[0];
    if wps.iter().any(|&w| dist[start][w] == INF) {
        return Ok(OptResult::from_opt(inst, None));
    }
    // dp[mask][j]: cheapest path from start through the waypoints in mask
    // (over wps[1..]), ending at wps[j + 1].
    let rest = t - 1;
    let full = (1usize << rest) - 1;
    let mut dp = vec![vec![INF; rest]; 1 << rest];
    let mut parent = vec![vec![usize::MAX; rest]; 1 << rest];
    for j in 0..rest {
        dp[1 << j][j] = dist[start][wps[j + 1]];
    }
    for mask in 1..=full {
        for j in 0..rest {
            let cur = dp[mask][j];
            if cur == INF || mask & (1 << j) == 0 {
                continue;
            }
            for k in 0..rest {
                if mask & (1 << k) != 0 {
                    continue;
                }
                let cand = cur.saturating_add(dist[wps[j + 1]][wps[k + 1]]);
                let nm = mask | (1 << k);
                if cand < dp[nm][k] {
                    dp[nm][k] = cand;
                    parent[nm][k] = j;
                }
            }
        }
    }
    let (mut best, mut end) = (INF, 0);
    for j in 0..rest {
        let c = dp[full][j].saturating_add(dist[wps[j + 1]][start]);
        if c < best {
            best = c;
            end = j;
        }
    }
    let mut tour = vec![start];
    let (mut mask, mut j) = (full, end);
    let mut back = Vec::new();
    while j != usize::MAX {
        back.push(wps[j + 1]);
        let pj = parent[mask][j];
        mask &= !(1 << j);
        j = pj;
    }
    back.reverse();
    tour.extend(back);
    tour.push(start);

    let mut mult = vec![0u32; inst.m()];
    for w in tour.windows(2) {
        let (mut a, b) = (w[0], w[1]);
        while a != b {
            let i = next[a][b].expect("finite distance has a first edge");
            mult[i] += 1;
            a = inst.edges[i].other(a);
        }
    }
    let nice = make_nice(inst, &SolutionMultigraph::new(inst, mult))?;
    debug_assert_eq!(nice.total_weight, best);
    Ok(OptResult::from_opt(inst, Some((best, nice.multiplicity))))
}

/// Exact dynamic program that sweeps the edges in a fixed order and keeps,
/// per partial solution, the parity and connectivity pattern of the vertices
/// still incident to unprocessed edges. Exponential only in that frontier,
/// so it handles instances with many waypoints but thin structure.
pub fn solve_frontier(inst: &Instance, caps: &OracleCaps) -> Result<OptResult, OracleError> {
    match frontier_dp(inst, caps, None)? {
        Sweep::Solved(res) => Ok(res),
        Sweep::Cut => unreachable!("no cutoff given"),
    }
}

enum Sweep {
    Solved(OptResult),
    /// Nothing within the cutoff.
    Cut,
}

// Packed state: six bits per frontier slot, 0 for untouched, otherwise
// (label << 1) | parity; the top bit is the "closed" flag.
const SLOT_BITS: usize = 6;
const MAX_SLOTS: usize = 21;
const CLOSED: u128 = 1 << 127;

fn slot(st: u128, s: usize) -> u8 {
    ((st >> (SLOT_BITS * s)) & 63) as u8
}

fn with_slot(st: u128, s: usize, b: u8) -> u128 {
    (st & !(63u128 << (SLOT_BITS * s))) | ((b as u128) << (SLOT_BITS * s))
}

/// The sweep itself. With a cutoff, partial solutions whose weight plus a
/// lower bound for the waypoints not reached yet exceeds it are dropped and
/// no witness is kept.
fn frontier_dp(inst: &Instance, caps: &OracleCaps, cutoff: Option<u64>) -> Result<Sweep, OracleError> {
    if inst.waypoint_count() <= 1 {
        return Ok(Sweep::Solved(OptResult::trivial(inst)));
    }
    let order = best_frontier_order(inst);
    let width = frontier_width(inst, &order);
    if width > caps.max_frontier.min(MAX_SLOTS) {
        return Err(OracleError::ScaleExceeded {
            what: "frontier width",
            value: width,
            cap: caps.max_frontier.min(MAX_SLOTS),
        });
    }
    let mut first = vec![usize::MAX; inst.n];
    let mut last = vec![usize::MAX; inst.n];
    for (p, &i) in order.iter().enumerate() {
        for x in [inst.edges[i].u, inst.edges[i].v] {
            if first[x] == usize::MAX {
                first[x] = p;
            }
            last[x] = p;
        }
    }
    if (0..inst.n).any(|v| inst.waypoints[v] && first[v] == usize::MAX) {
        return Ok(Sweep::Solved(OptResult::from_opt(inst, None)));
    }
    let ahead = lookahead(inst, &first, order.len());

    let keep_witness = cutoff.is_none();
    let mut frontier: Vec<usize> = Vec::new();
    let mut parents: Vec<Vec<(u32, u8)>> = Vec::new();
    let mut current: Vec<(u128, u64)> = vec![(0, 0)];
    let mut index: FxHashMap<u128, usize> = FxHashMap::default();

    for (p, &i) in order.iter().enumerate() {
        let e = &inst.edges[i];
        for x in [e.u, e.v] {
            if first[x] == p {
                frontier.push(x);
            }
        }
        let su = frontier.iter().position(|&x| x == e.u).unwrap();
        let sv = frontier.iter().position(|&x| x == e.v).unwrap();
        let leaving: Vec<usize> = (0..frontier.len()).filter(|&s| last[frontier[s]] == p).collect();
        let is_wp: Vec<bool> = frontier.iter().map(|&x| inst.waypoints[x]).collect();

        index.clear();
        let mut next: Vec<(u128, u64)> = Vec::new();
        let mut back: Vec<(u32, u8)> = Vec::new();
        for (si, &(st, base)) in current.iter().enumerate() {
            let closed = st & CLOSED != 0;
            for k in 0..=e.capacity.nice_limit() {
                if closed && k > 0 {
                    break;
                }
                let w = base.saturating_add(e.weight.saturating_mul(k as u64));
                if cutoff.is_some_and(|c| w.saturating_add(ahead[p + 1]) > c) {
                    break;
                }
                let touched = if k > 0 {
                    touch_edge(st, frontier.len(), su, sv, k % 2 == 1)
                } else {
                    st
                };
                let Some(key) = retire(touched, frontier.len(), &leaving, &is_wp) else {
                    continue;
                };
                match index.get(&key) {
                    Some(&at) => {
                        if w < next[at].1 {
                            next[at].1 = w;
                            if keep_witness {
                                back[at] = (si as u32, k as u8);
                            }
                        }
                    }
                    None => {
                        index.insert(key, next.len());
                        next.push((key, w));
                        if keep_witness {
                            back.push((si as u32, k as u8));
                        }
                    }
                }
            }
        }
        for &s in leaving.iter().rev() {
            frontier.remove(s);
        }
        current = next;
        if keep_witness {
            parents.push(back);
        }
    }

    let best = current
        .iter()
        .enumerate()
        .filter(|(_, s)| s.0 == CLOSED)
        .min_by_key(|(_, s)| s.1);
    let Some((mut at, &(_, weight))) = best else {
        return Ok(match cutoff {
            Some(_) => Sweep::Cut,
            None => Sweep::Solved(OptResult::from_opt(inst, None)),
        });
    };
    if !keep_witness {
        return Ok(Sweep::Solved(OptResult {
            feasible: (weight as i128) <= inst.budget as i128,
            opt_weight: Some(weight),
            witness: None,
        }));
    }
    let mut mult = vec![0u32; inst.m()];
    for p in (0..order.len()).rev() {
        let (prev, k) = parents[p][at];
        mult[order[p]] = k as u32;
        at = prev as usize;
    }
    Ok(Sweep::Solved(OptResult::from_opt(inst, Some((weight, mult)))))
}

/// `ahead[q]` bounds the weight of edges touching vertices first reached at
/// step `q` or later. A group of such vertices, connected among themselves,
/// holding `t` waypoints is crossed by at least `t` edge traversals, one
/// more when a waypoint lies outside the group, each costing at least the
/// lightest edge touching the group.
fn lookahead(inst: &Instance, first: &[usize], steps: usize) -> Vec<u64> {
    let total = inst.waypoint_count();
    let mut ahead = vec![0u64; steps + 1];
    for (q, slot) in ahead.iter_mut().enumerate() {
        let later = |v: usize| first[v] != usize::MAX && first[v] >= q;
        let mut dsu = Dsu::new(inst.n);
        for e in &inst.edges {
            if later(e.u) && later(e.v) {
                dsu.union(e.u, e.v);
            }
        }
        let mut lightest = vec![u64::MAX; inst.n];
        let mut count = vec![0usize; inst.n];
        for e in &inst.edges {
            for x in [e.u, e.v] {
                if later(x) {
                    let root = dsu.find(x);
                    lightest[root] = lightest[root].min(e.weight);
                }
            }
        }
        for v in (0..inst.n).filter(|&v| later(v) && inst.waypoints[v]) {
            count[dsu.find(v)] += 1;
        }
        *slot = (0..inst.n)
            .filter(|&r| count[r] > 0)
            .map(|r| {
                let t = (count[r] + usize::from(count[r] < total)) as u64;
                t.saturating_mul(lightest[r])
            })
            .fold(0u64, |acc, x| acc.saturating_add(x));
    }
    ahead
}

fn touch_edge(st: u128, slots: usize, su: usize, sv: usize, odd: bool) -> u128 {
    let fresh = (0..slots).map(|s| slot(st, s) >> 1).max().unwrap_or(0) + 1;
    let (bu, bv) = (slot(st, su), slot(st, sv));
    let lu = if bu == 0 { fresh } else { bu >> 1 };
    let lv = if bv == 0 { lu } else { bv >> 1 };
    let mut out = st;
    if lv != lu {
        for s in 0..slots {
            let b = slot(out, s);
            if b != 0 && b >> 1 == lv {
                out = with_slot(out, s, (lu << 1) | (b & 1));
            }
        }
    }
    for s in [su, sv] {
        let b = slot(out, s);
        let parity = if b == 0 { 0 } else { b & 1 };
        out = with_slot(out, s, (lu << 1) | (parity ^ odd as u8));
    }
    out
}

/// Drops the leaving slots, enforcing even degree, waypoint coverage and
/// that a component may only close when it is the last one. Returns the
/// compacted, canonically relabelled key, or `None` for a dead state.
fn retire(st: u128, slots: usize, leaving: &[usize], is_waypoint: &[bool]) -> Option<u128> {
    let mut closed = st & CLOSED != 0;
    for (li, &s) in leaving.iter().enumerate() {
        let b = slot(st, s);
        if b & 1 == 1 {
            return None;
        }
        if b == 0 {
            if is_waypoint[s] {
                return None;
            }
            continue;
        }
        let label = b >> 1;
        let same = |t: usize| slot(st, t) != 0 && slot(st, t) >> 1 == label;
        let shared = (0..slots).any(|t| t != s && !leaving.contains(&t) && same(t))
            || leaving[li + 1..].iter().any(|&t| same(t));
        if !shared {
            let others = (0..slots).any(|t| slot(st, t) != 0 && !same(t));
            if others || closed {
                return None;
            }
            closed = true;
        }
    }
    let mut out: u128 = if closed { CLOSED } else { 0 };
    let mut relabel = [0u8; 64];
    let mut labels = 0u8;
    let mut pos = 0;
    for s in 0..slots {
        if leaving.contains(&s) {
            continue;
        }
        let b = slot(st, s);
        if b != 0 {
            let label = (b >> 1) as usize;
            if relabel[label] == 0 {
                labels += 1;
                relabel[label] = labels;
            }
            out = with_slot(out, pos, (relabel[label] << 1) | (b & 1));
        }
        pos += 1;
    }
    Some(out)
}

fn frontier_width(inst: &Instance, order: &[usize]) -> usize {
    let mut first = vec![usize::MAX; inst.n];
    let mut last = vec![0; inst.n];
    for (p, &i) in order.iter().enumerate() {
        for x in [inst.edges[i].u, inst.edges[i].v] {
            first[x] = first[x].min(p);
            last[x] = p;
        }
    }
    let mut delta = vec![0i64; order.len() + 1];
    for v in 0..inst.n {
        if first[v] != usize::MAX {
            delta[first[v]] += 1;
            delta[last[v] + 1] -= 1;
        }
    }
    let mut cur = 0i64;
    let mut best = 0i64;
    for d in delta {
        cur += d;
        best = best.max(cur);
    }
    best as usize
}

/// Edge order by vertex id or by breadth-first discovery, whichever keeps
/// the frontier thinner.
fn best_frontier_order(inst: &Instance) -> Vec<usize> {
    let mut by_id: Vec<usize> = (0..inst.m()).collect();
    by_id.sort_by_key(|&i| {
        let e = &inst.edges[i];
        (e.u.max(e.v), e.u.min(e.v), i)
    });
    let bfs = order_edges_bfs(inst);
    if frontier_width(inst, &bfs) < frontier_width(inst, &by_id) {
        bfs
    } else {
        by_id
    }
}

/// Which exact engine to run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Engine {
    /// Held–Karp when applicable, else multiplicity enumeration, else the
    /// frontier sweep.
    Auto,
    Multiplicity,
    HeldKarp,
    Frontier,
}

pub fn solve(inst: &Instance, caps: &OracleCaps, engine: Engine) -> Result<OptResult, OracleError> {
    match engine {
        Engine::Multiplicity => solve_exact_multiplicity(inst, caps),
        Engine::HeldKarp => solve_heldkarp(inst, caps),
        Engine::Frontier => solve_frontier(inst, caps),
        Engine::Auto => {
            if inst.kind != Kind::Wrp && inst.waypoint_count() <= caps.max_waypoints {
                solve_heldkarp(inst, caps)
            } else if inst.m() <= caps.max_edges {
                solve_exact_multiplicity(inst, caps)
            } else {
                solve_frontier(inst, caps)
            }
        }
    }
}

/// Feasibility verdict with the automatic engine choice.
pub fn verdict(inst: &Instance, caps: &OracleCaps) -> Result<bool, OracleError> {
    if inst.budget < 0 {
        return Ok(false);
    }
    let frontier = !(inst.kind != Kind::Wrp && inst.waypoint_count() <= caps.max_waypoints) && inst.m() > caps.max_edges;
    if !frontier {
        return Ok(solve(inst, caps, Engine::Auto)?.feasible);
    }
    match frontier_dp(inst, caps, Some(inst.budget as u64))? {
        Sweep::Solved(res) => Ok(res.feasible),
        Sweep::Cut => Ok(false),
    }
}

/// Whether both instances have the same yes/no answer.
pub fn equivalent(a: &Instance, b: &Instance, caps: &OracleCaps) -> Result<bool, OracleError> {
    Ok(verdict(a, caps)? == verdict(b, caps)?)
}

/// A cycle (as a multiset of edge indices) whose removal keeps the
/// connected components of the multigraph unchanged. The multigraph must
/// have more than `2|V| - 2` edge occurrences, `V` being its non-isolated
/// vertices.
pub fn find_component_preserving_cycle(
    n: usize,
    edges: &[(usize, usize)],
    mult: &[u32],
) -> Result<Vec<usize>, OracleError> {
    let mut deg = vec![0u64; n];
    let mut total = 0u64;
    for (&(u, v), &k) in edges.iter().zip(mult) {
        deg[u] += k as u64;
        deg[v] += k as u64;
        total += k as u64;
    }
    let support = deg.iter().filter(|&&d| d > 0).count() as u64;
    if total == 0 || total + 2 <= 2 * support {
        return Err(OracleError::Precondition(format!(
            "{total} edge occurrences on {support} vertices, need more than {}",
            (2 * support).saturating_sub(2)
        )));
    }
    // A maximal spanning forest keeps the components; the rest must hold a
    // cycle because it alone has at least |V| occurrences.
    let mut forest = Dsu::new(n);
    let mut rest = Dsu::new(n);
    let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    for (i, (&(u, v), &k)) in edges.iter().zip(mult).enumerate() {
        for _ in 0..k {
            if forest.union(u, v) {
                continue;
            }
            if rest.union(u, v) {
                adj[u].push((v, i));
                adj[v].push((u, i));
                continue;
            }
            let mut prev: Vec<Option<(usize, usize)>> = vec![None; n];
            let mut seen = vec![false; n];
            seen[u] = true;
            let mut queue = vec![u];
            let mut head = 0;
            while head < queue.len() {
                let x = queue[head];
                head += 1;
                for &(y, j) in &adj[x] {
                    if !seen[y] {
                        seen[y] = true;
                        prev[y] = Some((x, j));
                        queue.push(y);
                    }
                }
            }
            let mut cycle = vec![i];
            let mut x = v;
            while x != u {
                let (p, j) = prev[x].expect("u and v joined in the remainder forest");
                cycle.push(j);
                x = p;
            }
            return Ok(cycle);
        }
    }
    Err(OracleError::Precondition("no cycle outside the spanning forest".into()))
}

/// Normalizes a solution so that each edge is used at most twice and the
/// total traversal count is at most `2n`, without increasing its weight.
pub fn make_nice(inst: &Instance, sol: &SolutionMultigraph) -> Result<SolutionMultigraph, OracleError> {
    if let Some(why) = structural_error(inst, &sol.multiplicity) {
        return Err(OracleError::InvalidCertificate(why));
    }
    let mut mult: Vec<u32> = sol
        .multiplicity
        .iter()
        .map(|&k| if k >= 3 { 2 - k % 2 } else { k })
        .collect();
    let pairs = inst.endpoint_pairs();
    while mult.iter().map(|&k| k as u64).sum::<u64>() > 2 * inst.n as u64 {
        for i in find_component_preserving_cycle(inst.n, &pairs, &mult)? {
            mult[i] -= 1;
        }
    }
    Ok(SolutionMultigraph::new(inst, mult))
}

/// A walk as alternating vertices and edges; closed when the first and last
/// vertex agree. `vertices.len() == edges.len() + 1`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Walk {
    pub vertices: Vec<usize>,
    pub edges: Vec<usize>,
}

/// A closed walk traversing the solution's edges with their multiplicities,
/// starting and ending at `start` (Hierholzer).
pub fn euler_walk(inst: &Instance, sol: &SolutionMultigraph, start: usize) -> Result<Walk, OracleError> {
    if let Some(why) = structural_error(inst, &sol.multiplicity) {
        return Err(OracleError::InvalidCertificate(why));
    }
    if sol.is_empty() {
        return Ok(Walk {
            vertices: vec![start],
            edges: Vec::new(),
        });
    }
    let inc = inst.incidence();
    if inc[start].iter().all(|&i| sol.multiplicity[i] == 0) {
        return Err(OracleError::Precondition(format!(
            "start vertex {} is not on the solution",
            start + 1
        )));
    }
    let mut left = sol.multiplicity.clone();
    let mut ptr = vec![0usize; inst.n];
    let mut stack: Vec<(usize, Option<usize>)> = vec![(start, None)];
    let mut out: Vec<(usize, Option<usize>)> = Vec::new();
    while let Some(&(x, _)) = stack.last() {
        let mut moved = false;
        while ptr[x] < inc[x].len() {
            let i = inc[x][ptr[x]];
            if left[i] > 0 {
                left[i] -= 1;
                stack.push((inst.edges[i].other(x), Some(i)));
                moved = true;
                break;
            }
            ptr[x] += 1;
        }
        if !moved {
            out.push(stack.pop().unwrap());
        }
    }
    out.reverse();
    let vertices = out.iter().map(|&(v, _)| v).collect();
    let edges = out.iter().filter_map(|&(_, e)| e).collect();
    Ok(Walk { vertices, edges })
}

/// Cuts a closed walk that starts in `M` at every visit of `M`: each
/// segment starts and ends in `M` and has no inner vertex in `M`.
pub fn split_into_segments(inst: &Instance, walk: &Walk, modulator: &[usize]) -> Result<Vec<Walk>, OracleError> {
    let mut in_m = vec![false; inst.n];
    for &v in modulator {
        in_m[v] = true;
    }
    let first = *walk
        .vertices
        .first()
        .ok_or_else(|| OracleError::Precondition("empty walk".into()))?;
    if walk.vertices.len() != walk.edges.len() + 1 || walk.vertices.last() != Some(&first) {
        return Err(OracleError::Precondition("walk is not closed".into()));
    }
    if !in_m[first] {
        return Err(OracleError::Precondition(format!(
            "walk starts at {}, outside the modulator",
            first + 1
        )));
    }
    let mut segments = Vec::new();
    let mut cur = Walk {
        vertices: vec![first],
        edges: Vec::new(),
    };
    for (k, &e) in walk.edges.iter().enumerate() {
        let y = walk.vertices[k + 1];
        cur.edges.push(e);
        cur.vertices.push(y);
        if in_m[y] {
            segments.push(std::mem::replace(
                &mut cur,
                Walk {
                    vertices: vec![y],
                    edges: Vec::new(),
                },
            ));
        }
    }
    Ok(segments)
}
