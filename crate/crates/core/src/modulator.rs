//! Kernels parameterized by a modulator `M` whose removal leaves components
//! of at most `r` vertices (TSP) or paths of at most `r` vertices (Subset
//! TSP). A component is summarized by its behaviors: the edge multisets a
//! walk can use inside `G[C + M]` without the edges among `M`.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap};

use serde::Serialize;

use crate::graph::Dsu;
use crate::instance::{decompose, Instance, Kind, ModulatorDecomposition, Target};
use crate::oracle::{split_into_segments, Walk};
use crate::preprocess::{rr_short_circuit, LogEntry, Verdict};
use crate::report::{KernelError, KernelReport, KernelResult};
use crate::vc::{mark_cheapest, stopped};

/// Default limit on the number of candidate edge multisets examined per
/// component.
pub const DEFAULT_GUARD: u64 = 2_000_000;

/// The edges of `G[C + M]` that do not join two modulator vertices.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ComponentGraph {
    /// Sorted component vertices.
    pub vertices: Vec<usize>,
    /// Edges with both ends in the component.
    pub internal: Vec<usize>,
    /// Edges between the component and the modulator.
    pub legs: Vec<usize>,
}

/// Edge multiset of a component, as sorted edge indices with repetition.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ComponentBehavior {
    pub edges: Vec<usize>,
    pub weight: u64,
}

/// Touched modulator vertices and the representative pairs: inside every
/// connected part of the behavior with two or more modulator vertices, the
/// least one is paired with each other one, once if that vertex has odd
/// degree and twice if even.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct ComponentImpact {
    pub touched: Vec<usize>,
    pub rep_edges: Vec<(usize, usize, u8)>,
}

/// A connected part of a behavior after deleting `M`, with the behavior
/// edges that leave it towards `M`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Piece {
    pub path_vertices: Vec<usize>,
    pub legs: Vec<usize>,
}

fn mask(n: usize, set: &[usize]) -> Vec<bool> {
    let mut out = vec![false; n];
    for &v in set {
        out[v] = true;
    }
    out
}

fn behavior(inst: &Instance, mut edges: Vec<usize>) -> ComponentBehavior {
    edges.sort_unstable();
    let weight = edges.iter().fold(0u64, |acc, &e| acc.saturating_add(inst.edges[e].weight));
    ComponentBehavior { edges, weight }
}

pub fn component_graph(inst: &Instance, m: &[usize], c: &[usize]) -> ComponentGraph {
    let in_m = mask(inst.n, m);
    let in_c = mask(inst.n, c);
    let mut internal = Vec::new();
    let mut legs = Vec::new();
    for (i, e) in inst.edges.iter().enumerate() {
        if in_c[e.u] && in_c[e.v] {
            internal.push(i);
        } else if (in_c[e.u] && in_m[e.v]) || (in_m[e.u] && in_c[e.v]) {
            legs.push(i);
        }
    }
    let mut vertices = c.to_vec();
    vertices.sort_unstable();
    vertices.dedup();
    ComponentGraph {
        vertices,
        internal,
        legs,
    }
}

/// The component graph with local vertex numbers: component vertices
/// first, then the modulator vertices its legs reach.
struct Local {
    nc: usize,
    nm: usize,
    /// Local endpoints of `internal` followed by `legs`.
    ends: Vec<(usize, usize)>,
    edges: Vec<usize>,
    internal: usize,
}

impl Local {
    fn new(inst: &Instance, g: &ComponentGraph) -> Self {
        let idx: BTreeMap<usize, usize> = g.vertices.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let mut mods: BTreeMap<usize, usize> = BTreeMap::new();
        let mut ends = Vec::new();
        for &e in &g.internal {
            let ed = &inst.edges[e];
            ends.push((idx[&ed.u], idx[&ed.v]));
        }
        for &e in &g.legs {
            let ed = &inst.edges[e];
            let (c, mv) = if idx.contains_key(&ed.u) { (ed.u, ed.v) } else { (ed.v, ed.u) };
            let next = mods.len();
            let ml = *mods.entry(mv).or_insert(next);
            ends.push((idx[&c], g.vertices.len() + ml));
        }
        Local {
            nc: g.vertices.len(),
            nm: mods.len(),
            ends,
            edges: g.internal.iter().chain(&g.legs).copied().collect(),
            internal: g.internal.len(),
        }
    }

    /// Every component vertex has nonzero even degree and reaches the
    /// modulator.
    fn valid(&self, mult: &[u8]) -> bool {
        let mut deg = vec![0u32; self.nc];
        let mut dsu = Dsu::new(self.nc + self.nm);
        for (j, &(a, b)) in self.ends.iter().enumerate() {
            if mult[j] == 0 {
                continue;
            }
            deg[a] += mult[j] as u32;
            if j < self.internal {
                deg[b] += mult[j] as u32;
            }
            dsu.union(a, b);
        }
        if deg.iter().any(|&d| d == 0 || d % 2 == 1) {
            return false;
        }
        let anchored: BTreeSet<usize> = (self.nc..self.nc + self.nm).map(|x| dsu.find(x)).collect();
        (0..self.nc).all(|c| anchored.contains(&dsu.find(c)))
    }

    fn edges_of(&self, mult: &[u8]) -> Vec<usize> {
        let mut out = Vec::new();
        for (j, &e) in self.edges.iter().enumerate() {
            for _ in 0..mult[j] {
                out.push(e);
            }
        }
        out
    }
}

/// Number of vectors in `{0,1,2}^len` with sum at most `cap`.
fn bounded_vectors(len: usize, cap: usize) -> u64 {
    let mut ways = vec![0u64; cap + 1];
    ways[0] = 1;
    for _ in 0..len {
        let mut next = vec![0u64; cap + 1];
        for (s, &w) in ways.iter().enumerate() {
            for add in 0..=2 {
                if s + add <= cap {
                    next[s + add] = next[s + add].saturating_add(w);
                }
            }
        }
        ways = next;
    }
    ways.iter().fold(0u64, |a, &b| a.saturating_add(b))
}

/// Whether `edges` is a behavior of component `c` with bound `r`.
pub fn is_component_behavior(inst: &Instance, m: &[usize], c: &[usize], r: usize, edges: &[usize]) -> bool {
    let g = component_graph(inst, m, c);
    let local = Local::new(inst, &g);
    let mut mult = vec![0u8; local.edges.len()];
    for &e in edges {
        match local.edges.iter().position(|&x| x == e) {
            Some(j) if mult[j] < 2 => mult[j] += 1,
            _ => return false,
        }
    }
    let legs: usize = mult[local.internal..].iter().map(|&x| x as usize).sum();
    legs <= 2 * r && local.valid(&mult)
}

/// All behaviors of component `c`, ordered by their edge multisets. Fails
/// when more than `guard` candidates would have to be examined.
pub fn enumerate_component_behaviors(
    inst: &Instance,
    m: &[usize],
    c: &[usize],
    r: usize,
    guard: u64,
) -> Result<Vec<ComponentBehavior>, KernelError> {
    let g = component_graph(inst, m, c);
    let candidates = 3u64
        .saturating_pow(g.internal.len() as u32)
        .saturating_mul(bounded_vectors(g.legs.len(), 2 * r));
    if candidates > guard {
        return Err(KernelError::GuardExceeded(candidates));
    }
    let local = Local::new(inst, &g);
    let mut out = Vec::new();
    let mut mult = vec![0u8; local.edges.len()];

    fn walk(
        local: &Local,
        pos: usize,
        left: usize,
        mult: &mut Vec<u8>,
        out: &mut Vec<Vec<usize>>,
    ) {
        if pos == mult.len() {
            if local.valid(mult) {
                out.push(local.edges_of(mult));
            }
            return;
        }
        let top = if pos < local.internal { 2 } else { left.min(2) };
        for x in 0..=top {
            mult[pos] = x as u8;
            let rest = if pos < local.internal { left } else { left - x };
            walk(local, pos + 1, rest, mult, out);
        }
        mult[pos] = 0;
    }

    walk(&local, 0, 2 * r, &mut mult, &mut out);
    let mut list: Vec<ComponentBehavior> = out.into_iter().map(|e| behavior(inst, e)).collect();
    list.sort_by(|a, b| a.edges.cmp(&b.edges));
    Ok(list)
}

fn natural_of(all: &[ComponentBehavior]) -> Option<ComponentBehavior> {
    all.iter()
        .min_by(|a, b| (a.weight, &a.edges).cmp(&(b.weight, &b.edges)))
        .cloned()
}

/// Least-weight behavior, ties to the lexicographically least edge
/// multiset.
pub fn natural_behavior_component(
    inst: &Instance,
    m: &[usize],
    c: &[usize],
    r: usize,
    guard: u64,
) -> Result<ComponentBehavior, KernelError> {
    let all = enumerate_component_behaviors(inst, m, c, r, guard)?;
    natural_of(&all).ok_or_else(|| KernelError::NoBehavior(c.iter().min().map_or(0, |v| v + 1)))
}

pub fn component_impact(inst: &Instance, m: &[usize], b: &ComponentBehavior) -> ComponentImpact {
    let in_m = mask(inst.n, m);
    let mut dsu = Dsu::new(inst.n);
    let mut deg: BTreeMap<usize, u32> = BTreeMap::new();
    for &e in &b.edges {
        let ed = &inst.edges[e];
        dsu.union(ed.u, ed.v);
        for x in [ed.u, ed.v] {
            if in_m[x] {
                *deg.entry(x).or_insert(0) += 1;
            }
        }
    }
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for &x in deg.keys() {
        groups.entry(dsu.find(x)).or_default().push(x);
    }
    let mut rep_edges = Vec::new();
    for group in groups.values().filter(|g| g.len() >= 2) {
        for &mj in &group[1..] {
            rep_edges.push((group[0], mj, if deg[&mj] % 2 == 1 { 1 } else { 2 }));
        }
    }
    rep_edges.sort_unstable();
    ComponentImpact {
        touched: deg.keys().copied().collect(),
        rep_edges,
    }
}

struct Profile {
    natural: ComponentBehavior,
    natural_impact: ComponentImpact,
    /// Cheapest behavior weight per attainable impact.
    cheapest: BTreeMap<ComponentImpact, u64>,
}

fn profile(
    inst: &Instance,
    m: &[usize],
    c: &[usize],
    r: usize,
    guard: u64,
) -> Result<Option<Profile>, KernelError> {
    let all = enumerate_component_behaviors(inst, m, c, r, guard)?;
    let Some(natural) = natural_of(&all) else {
        return Ok(None);
    };
    let mut cheapest: BTreeMap<ComponentImpact, u64> = BTreeMap::new();
    for b in &all {
        let slot = cheapest.entry(component_impact(inst, m, b)).or_insert(u64::MAX);
        *slot = (*slot).min(b.weight);
    }
    Ok(Some(Profile {
        natural_impact: component_impact(inst, m, &natural),
        natural,
        cheapest,
    }))
}

/// Extra cost of switching `c` from impact `i` to `i2`; finite only when
/// `i` is the impact of the natural behavior and `i2` is attainable.
pub fn price_component(
    inst: &Instance,
    m: &[usize],
    c: &[usize],
    r: usize,
    i: &ComponentImpact,
    i2: &ComponentImpact,
    guard: u64,
) -> Result<Option<u64>, KernelError> {
    let Some(p) = profile(inst, m, c, r, guard)? else {
        return Ok(None);
    };
    if &p.natural_impact != i {
        return Ok(None);
    }
    Ok(p.cheapest.get(i2).map(|w| w - p.natural.weight))
}

/// Weight of a shortest `u`-`v` path whose inner vertices all lie in the
/// component.
fn shortest_through(inst: &Instance, g: &ComponentGraph, u: usize, v: usize) -> Option<u64> {
    let mut adj: BTreeMap<usize, Vec<(usize, u64)>> = BTreeMap::new();
    for &e in &g.internal {
        let ed = &inst.edges[e];
        adj.entry(ed.u).or_default().push((ed.v, ed.weight));
        adj.entry(ed.v).or_default().push((ed.u, ed.weight));
    }
    let mut dist: BTreeMap<usize, u64> = BTreeMap::new();
    let mut heap = BinaryHeap::new();
    for &e in &g.legs {
        let ed = &inst.edges[e];
        if ed.touches(u) {
            heap.push(Reverse((ed.weight, ed.other(u))));
        }
    }
    while let Some(Reverse((d, x))) = heap.pop() {
        if dist.contains_key(&x) {
            continue;
        }
        dist.insert(x, d);
        for &(y, w) in adj.get(&x).map_or(&[][..], |a| a.as_slice()) {
            if !dist.contains_key(&y) {
                heap.push(Reverse((d.saturating_add(w), y)));
            }
        }
    }
    g.legs
        .iter()
        .map(|&e| &inst.edges[e])
        .filter(|ed| ed.touches(v))
        .filter_map(|ed| dist.get(&ed.other(v)).map(|d| d.saturating_add(ed.weight)))
        .min()
}

/// Profiles of all components, or the decided answer when some component
/// has no behavior at all (then it is a connected component of `G`).
enum Survey {
    Profiles(Vec<Profile>),
    Decided(bool, usize),
    Skip(usize),
}

fn survey(inst: &Instance, dec: &ModulatorDecomposition, r: usize, guard: u64) -> Result<Survey, KernelError> {
    let mut out = Vec::new();
    for (i, c) in dec.components.iter().enumerate() {
        match profile(inst, &dec.modulator, c, r, guard)? {
            Some(p) => out.push(p),
            None => {
                let inside = mask(inst.n, c);
                let outside = (0..inst.n).any(|v| inst.waypoints[v] && !inside[v]);
                let within = c.iter().any(|&v| inst.waypoints[v]);
                return Ok(if outside && within {
                    Survey::Decided(false, i)
                } else {
                    Survey::Skip(i)
                });
            }
        }
    }
    Ok(Survey::Profiles(out))
}

struct Marking {
    impacts: usize,
    red: BTreeSet<usize>,
    blue: BTreeSet<usize>,
}

/// Red: per pair of impacts the cheapest switches. Blue: per modulator
/// pair the component carrying the shortest connection through it.
fn red_and_blue(inst: &Instance, dec: &ModulatorDecomposition, profiles: &[Profile]) -> Marking {
    let impacts: BTreeSet<&ComponentImpact> = profiles.iter().flat_map(|p| p.cheapest.keys()).collect();
    let (i, k) = (impacts.len(), dec.modulator.len());
    let quota = 2 * i * i + 2 * k;
    let mut buckets: BTreeMap<(&ComponentImpact, &ComponentImpact), Vec<(u64, usize)>> = BTreeMap::new();
    for (ci, p) in profiles.iter().enumerate() {
        for (imp, &w) in &p.cheapest {
            buckets
                .entry((&p.natural_impact, imp))
                .or_default()
                .push((w - p.natural.weight, ci));
        }
    }
    let mut red = BTreeSet::new();
    for cands in buckets.into_values() {
        mark_cheapest(cands, quota, &mut red);
    }
    let graphs: Vec<ComponentGraph> = dec
        .components
        .iter()
        .map(|c| component_graph(inst, &dec.modulator, c))
        .collect();
    let mut blue = BTreeSet::new();
    for (a, &u) in dec.modulator.iter().enumerate() {
        for &v in &dec.modulator[a + 1..] {
            let best = graphs
                .iter()
                .enumerate()
                .filter_map(|(ci, g)| shortest_through(inst, g, u, v).map(|d| (d, ci)))
                .min();
            if let Some((_, ci)) = best {
                blue.insert(ci);
            }
        }
    }
    Marking { impacts: i, red, blue }
}

/// Marks one (odd count) or two (even count) of `group` in green.
fn mark_parity(group: &[usize], green: &mut BTreeSet<usize>) {
    let take = match group.len() {
        0 => 0,
        c if c % 2 == 1 => 1,
        _ => 2,
    };
    green.extend(group.iter().take(take));
}

/// Removes the components outside `keep`, paying for their natural
/// behaviors. The modulator rides along as the hint.
fn delete_components(
    inst: &Instance,
    dec: &ModulatorDecomposition,
    profiles: &[Profile],
    keep: &BTreeSet<usize>,
    rule: &str,
    report: &mut KernelReport,
) -> Instance {
    let mut remove = vec![false; inst.n];
    let mut paid: i128 = 0;
    let mut removed_per_impact: BTreeMap<&ComponentImpact, u64> = BTreeMap::new();
    for (ci, c) in dec.components.iter().enumerate() {
        if keep.contains(&ci) {
            continue;
        }
        for &v in c {
            remove[v] = true;
        }
        paid += profiles[ci].natural.weight as i128;
        *removed_per_impact.entry(&profiles[ci].natural_impact).or_insert(0) += 1;
    }
    let odd = removed_per_impact.values().filter(|&&c| c % 2 == 1).count();
    report.bound("odd_removal_groups", odd as u64, 0);
    let removed: Vec<usize> = (0..inst.n).filter(|&v| remove[v]).collect();
    if removed.is_empty() {
        return inst.clone();
    }
    let mut base = inst.clone();
    base.modulator_hint = Some(dec.modulator.clone());
    let (mut out, _) = base.remove_vertices(&remove);
    out.budget = (inst.budget as i128 - paid).max(i64::MIN as i128) as i64;
    report.record(LogEntry::new(rule, removed, out.budget - inst.budget));
    out
}

fn bad_modulator(e: impl std::fmt::Display) -> KernelError {
    KernelError::BadModulator(e.to_string())
}

/// Component count bound after the TSP rule.
fn components_bound(impacts: u64, k: u64) -> u64 {
    let sq = impacts.saturating_mul(impacts);
    2u64.saturating_mul(sq.saturating_add(2 * k))
        .saturating_mul(sq)
        .saturating_add(k * k.saturating_sub(1) / 2)
        .saturating_add(2 * impacts)
}

/// Above this many components sharing a natural impact that touches a
/// non-waypoint, the touched vertices become waypoints.
pub fn yellow_threshold(r: usize, k: usize, impacts: usize) -> u64 {
    let r = r as u64;
    (r + 1)
        .saturating_pow(4 * r as u32)
        .saturating_mul(2u64.saturating_pow(4 * r as u32 + 1))
        .saturating_add(k as u64)
        .saturating_mul(impacts as u64)
}

fn start(
    inst: &Instance,
    m: &[usize],
    target: Target,
    r: usize,
    guard: u64,
    report: &mut KernelReport,
) -> Result<Result<(ModulatorDecomposition, Vec<Profile>), KernelResult>, KernelError> {
    let dec = decompose(inst, m, target).map_err(bad_modulator)?;
    if let Some(yes) = stopped(inst, report) {
        return Ok(Err(KernelResult::decided(yes, report.clone())));
    }
    match survey(inst, &dec, r, guard)? {
        Survey::Profiles(p) => Ok(Ok((dec, p))),
        Survey::Decided(yes, ci) => {
            report.record(LogEntry::new("no-behavior", dec.components[ci].iter().copied(), 0));
            Ok(Err(KernelResult::decided(yes, report.clone())))
        }
        Survey::Skip(ci) => {
            report.note(format!(
                "component of vertex {} does not reach the modulator; rule skipped",
                dec.components[ci][0] + 1
            ));
            Ok(Err(KernelResult::kernel(inst.clone(), report.clone())))
        }
    }
}

/// One application of the TSP component rule: red, blue and green
/// marking, then every unmarked component is deleted and its natural
/// behavior paid from the budget.
pub fn rule_components_tsp(inst: &Instance, m: &[usize], r: usize, guard: u64) -> Result<KernelResult, KernelError> {
    let mut report = KernelReport::new("components");
    if inst.kind != Kind::Tsp {
        return Err(KernelError::KindMismatch {
            pipeline: "components".to_string(),
            kind: inst.kind,
        });
    }
    let (dec, profiles) = match start(inst, m, Target::Components(r), r, guard, &mut report)? {
        Ok(x) => x,
        Err(done) => return Ok(done),
    };
    let marking = red_and_blue(inst, &dec, &profiles);
    let mut by_natural: BTreeMap<&ComponentImpact, Vec<usize>> = BTreeMap::new();
    for (ci, p) in profiles.iter().enumerate() {
        if !marking.red.contains(&ci) && !marking.blue.contains(&ci) {
            by_natural.entry(&p.natural_impact).or_default().push(ci);
        }
    }
    let mut green = BTreeSet::new();
    for group in by_natural.values() {
        mark_parity(group, &mut green);
    }
    let keep: BTreeSet<usize> = marking.red.iter().chain(&marking.blue).chain(&green).copied().collect();
    let k = dec.modulator.len();
    record_marks(&mut report, &marking, 0, green.len(), profiles.len(), keep.len(), k);
    report.bound(
        "components",
        keep.len() as u64,
        components_bound(marking.impacts as u64, k as u64),
    );
    let out = delete_components(inst, &dec, &profiles, &keep, "components", &mut report);
    Ok(KernelResult::kernel(out, report))
}

fn record_marks(
    report: &mut KernelReport,
    marking: &Marking,
    yellow: usize,
    green: usize,
    before: usize,
    after: usize,
    k: usize,
) {
    report.marks.red += marking.red.len();
    report.marks.blue += marking.blue.len();
    report.marks.yellow += yellow;
    report.marks.green += green;
    report.stat_max("k", k as u64);
    report.stat_max("impacts", marking.impacts as u64);
    report.stat_max("components_before", before as u64);
    report.stat_max("components_marked", after as u64);
}

/// Short-circuits every non-waypoint outside the modulator. The returned
/// instance carries the renumbered modulator as its hint.
pub fn saturate_path_nonterminals(inst: &Instance, m: &[usize]) -> Result<(Instance, Vec<LogEntry>), KernelError> {
    let in_m = mask(inst.n, m);
    if (0..inst.n).all(|v| in_m[v] || inst.waypoints[v]) {
        return Ok((inst.clone(), Vec::new()));
    }
    let mut cur = inst.clone();
    let mut hint: Vec<usize> = (0..inst.n).filter(|&v| in_m[v]).collect();
    let mut log = Vec::new();
    loop {
        cur.modulator_hint = Some(hint.clone());
        let in_m = mask(cur.n, &hint);
        let Some(v) = (0..cur.n).find(|&v| !in_m[v] && !cur.waypoints[v]) else {
            return Ok((cur, log));
        };
        let outcome = rr_short_circuit(&cur, v)?;
        log.push(outcome.log);
        match outcome.verdict {
            Verdict::Reduced(next) => {
                hint = next.modulator_hint.clone().unwrap_or_default();
                cur = next;
            }
            _ => unreachable!("short-circuit always reduces"),
        }
    }
}

/// Pieces of `b`, ordered by their least vertex.
pub fn pieces(inst: &Instance, m: &[usize], b: &ComponentBehavior) -> Vec<Piece> {
    let in_m = mask(inst.n, m);
    let mut dsu = Dsu::new(inst.n);
    let mut verts = BTreeSet::new();
    for &e in &b.edges {
        let ed = &inst.edges[e];
        for x in [ed.u, ed.v] {
            if !in_m[x] {
                verts.insert(x);
            }
        }
        if !in_m[ed.u] && !in_m[ed.v] {
            dsu.union(ed.u, ed.v);
        }
    }
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for &v in &verts {
        groups.entry(dsu.find(v)).or_default().push(v);
    }
    let mut out: Vec<Piece> = groups
        .into_values()
        .map(|path_vertices| {
            let inside = |x: usize| path_vertices.binary_search(&x).is_ok();
            let legs = b
                .edges
                .iter()
                .copied()
                .filter(|&e| {
                    let ed = &inst.edges[e];
                    (in_m[ed.u] && inside(ed.v)) || (in_m[ed.v] && inside(ed.u))
                })
                .collect();
            Piece { path_vertices, legs }
        })
        .collect();
    out.sort_by_key(|p| p.path_vertices[0]);
    out
}

/// Whether every part of `b` that holds a non-modulator vertex also holds
/// a vertex of `anchors`.
fn anchored(inst: &Instance, m: &[usize], b: &ComponentBehavior, anchors: &[usize]) -> bool {
    let in_m = mask(inst.n, m);
    let mut dsu = Dsu::new(inst.n);
    let mut outside = BTreeSet::new();
    for &e in &b.edges {
        let ed = &inst.edges[e];
        dsu.union(ed.u, ed.v);
        for x in [ed.u, ed.v] {
            if !in_m[x] {
                outside.insert(x);
            }
        }
    }
    let roots: BTreeSet<usize> = anchors.iter().map(|&a| dsu.find(a)).collect();
    outside.iter().all(|&x| roots.contains(&dsu.find(x)))
}

/// A behavior that touches `v`, touches nothing outside the union of what
/// `a` and the natural behavior touch, keeps every part attached to
/// `visited`, and weighs at most `w(a)`. Found by search over all
/// behaviors; the cheapest such behavior is returned.
#[allow(clippy::too_many_arguments)]
pub fn blend_behavior(
    inst: &Instance,
    m: &[usize],
    c: &[usize],
    r: usize,
    a: &ComponentBehavior,
    visited: &[usize],
    v: usize,
    guard: u64,
) -> Result<ComponentBehavior, KernelError> {
    let pre = |why: &str| Err(KernelError::Precondition(why.to_string()));
    if !is_component_behavior(inst, m, c, r, &a.edges) {
        return pre("A is not a behavior of C");
    }
    let all = enumerate_component_behaviors(inst, m, c, r, guard)?;
    let nat = natural_of(&all).ok_or(KernelError::BlendNotFound)?;
    let t_nat = component_impact(inst, m, &nat).touched;
    let t_a = component_impact(inst, m, a).touched;
    if !t_nat.contains(&v) || visited.contains(&v) {
        return pre("v must be touched by the natural behavior and not visited");
    }
    if !t_a.iter().all(|x| visited.contains(x)) || !visited.iter().all(|x| m.contains(x)) {
        return pre("A must touch only visited modulator vertices");
    }
    if pieces(inst, m, a).iter().any(|p| p.legs.len() != 2) {
        return pre("every piece of A needs two legs");
    }
    let allowed: BTreeSet<usize> = t_a.iter().chain(&t_nat).copied().collect();
    all.into_iter()
        .filter(|f| f.weight <= a.weight)
        .filter(|f| {
            let t = component_impact(inst, m, f).touched;
            t.contains(&v) && t.iter().all(|x| allowed.contains(x))
        })
        .filter(|f| anchored(inst, m, f, visited))
        .min_by(|x, y| (x.weight, &x.edges).cmp(&(y.weight, &y.edges)))
        .ok_or(KernelError::BlendNotFound)
}

/// Edges a closed walk spends on component `c`: the union of the segments
/// that reach a vertex of `c` not seen in an earlier segment.
pub fn solution_component_behavior(
    inst: &Instance,
    walk: &Walk,
    m: &[usize],
    c: &[usize],
) -> Result<ComponentBehavior, KernelError> {
    let segments = split_into_segments(inst, walk, m).map_err(|e| KernelError::Precondition(e.to_string()))?;
    let in_c = mask(inst.n, c);
    let mut seen = vec![false; inst.n];
    let mut edges = Vec::new();
    for seg in &segments {
        let inner = &seg.vertices[1..seg.vertices.len() - 1];
        if inner.iter().any(|&x| in_c[x] && !seen[x]) {
            edges.extend(&seg.edges);
        }
        for &x in inner {
            seen[x] = true;
        }
    }
    Ok(behavior(inst, edges))
}

/// One application of the Subset TSP path rule. Red and blue as in the
/// component rule; green only for natural impacts inside the waypoints;
/// other groups are kept in yellow while small and otherwise their touched
/// vertices become waypoints, in which case nothing is deleted.
pub fn rule_paths_subtsp(inst: &Instance, m: &[usize], r: usize, guard: u64) -> Result<KernelResult, KernelError> {
    let mut report = KernelReport::new("paths");
    if inst.kind == Kind::Wrp {
        return Err(KernelError::KindMismatch {
            pipeline: "paths".to_string(),
            kind: inst.kind,
        });
    }
    let in_m = mask(inst.n, m.iter().copied().filter(|&v| v < inst.n).collect::<Vec<_>>().as_slice());
    if let Some(v) = (0..inst.n).find(|&v| !in_m[v] && !inst.waypoints[v]) {
        return Err(KernelError::Precondition(format!(
            "vertex {} outside the modulator is not a waypoint",
            v + 1
        )));
    }
    let (dec, profiles) = match start(inst, m, Target::Paths(r), r, guard, &mut report)? {
        Ok(x) => x,
        Err(done) => return Ok(done),
    };
    let marking = red_and_blue(inst, &dec, &profiles);
    let k = dec.modulator.len();
    let threshold = yellow_threshold(r, k, marking.impacts);
    report.stat_max("yellow_threshold", threshold);

    let mut by_natural: BTreeMap<&ComponentImpact, Vec<usize>> = BTreeMap::new();
    for (ci, p) in profiles.iter().enumerate() {
        if !marking.red.contains(&ci) && !marking.blue.contains(&ci) {
            by_natural.entry(&p.natural_impact).or_default().push(ci);
        }
    }
    let mut green = BTreeSet::new();
    let mut yellow = BTreeSet::new();
    let mut promoted = BTreeSet::new();
    for (imp, group) in &by_natural {
        if imp.touched.iter().all(|&t| inst.waypoints[t]) {
            mark_parity(group, &mut green);
        } else if group.len() as u64 <= threshold {
            yellow.extend(group.iter().copied());
        } else {
            promoted.extend(imp.touched.iter().copied().filter(|&t| !inst.waypoints[t]));
        }
    }
    let keep: BTreeSet<usize> = marking
        .red
        .iter()
        .chain(&marking.blue)
        .chain(&green)
        .chain(&yellow)
        .copied()
        .collect();
    record_marks(&mut report, &marking, yellow.len(), green.len(), profiles.len(), keep.len(), k);
    let i = marking.impacts as u64;
    report.bound(
        "components",
        keep.len() as u64,
        components_bound(i, k as u64).saturating_add(threshold.saturating_mul(i)),
    );

    if !promoted.is_empty() {
        let mut out = inst.clone();
        for &t in &promoted {
            out.waypoints[t] = true;
        }
        report.promoted.extend(promoted.iter().map(|t| t + 1));
        report.record(LogEntry::new("promote", promoted.iter().copied(), 0));
        return Ok(KernelResult::kernel(out, report));
    }
    let out = delete_components(inst, &dec, &profiles, &keep, "paths", &mut report);
    Ok(KernelResult::kernel(out, report))
}
