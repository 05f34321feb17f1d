//! Kernels parameterized by a vertex cover `M`. Every vertex `r` outside
//! the cover only sees cover vertices, so how a walk passes through `r` is
//! described by a small multiset of its edges (a behavior). Vertices whose
//! cheapest behavior can replace them are deleted and their cost is taken
//! out of the budget.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::instance::{is_vertex_cover, Capacity, Instance, Kind};
use crate::preprocess::{rr_stop, LogEntry, Verdict};
use crate::report::{KernelError, KernelReport, KernelResult};

/// Which behavior family applies: two edge occurrences for TSP, two or four
/// (or none at a non-waypoint) for waypoint routing.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum VcRegime {
    Tsp,
    Wrp,
}

/// Edge multiset at a vertex outside the cover, as sorted edge indices with
/// repetition.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct VertexBehavior {
    pub vertex: usize,
    pub edges: Vec<usize>,
    pub weight: u64,
}

/// Touched cover vertices, sorted; with their degrees under waypoint
/// routing.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct VertexImpact {
    pub touched: Vec<usize>,
    pub degrees: Option<Vec<u8>>,
}

fn cover_mask(inst: &Instance, m: &[usize]) -> Result<Vec<bool>, KernelError> {
    let mut mask = vec![false; inst.n];
    for &v in m {
        if v >= inst.n {
            return Err(KernelError::BadModulator(format!("vertex {} outside 1..={}", v + 1, inst.n)));
        }
        mask[v] = true;
    }
    Ok(mask)
}

fn behavior(inst: &Instance, r: usize, edges: Vec<usize>) -> VertexBehavior {
    let weight = edges.iter().fold(0u64, |acc, &e| acc.saturating_add(inst.edges[e].weight));
    VertexBehavior {
        vertex: r,
        edges,
        weight,
    }
}

/// All behaviors of `r`, ordered by their edge multisets.
pub fn enumerate_vertex_behaviors(
    inst: &Instance,
    m: &[usize],
    r: usize,
    regime: VcRegime,
) -> Result<Vec<VertexBehavior>, KernelError> {
    let mask = cover_mask(inst, m)?;
    if r >= inst.n || mask[r] {
        return Err(KernelError::BadModulator(format!("vertex {} is not outside the cover", r + 1)));
    }
    let incident: Vec<usize> = (0..inst.m())
        .filter(|&e| inst.edges[e].touches(r) && mask[inst.edges[e].other(r)])
        .collect();
    let mut out = Vec::new();
    match regime {
        VcRegime::Tsp => {
            for (i, &a) in incident.iter().enumerate() {
                for &b in &incident[i..] {
                    out.push(behavior(inst, r, vec![a, b]));
                }
            }
        }
        VcRegime::Wrp => {
            if !inst.waypoints[r] {
                out.push(behavior(inst, r, Vec::new()));
            }
            let limit: Vec<usize> = incident
                .iter()
                .map(|&e| if inst.edges[e].capacity == Capacity::One { 1 } else { 2 })
                .collect();
            let mut picked = Vec::new();
            for size in [2, 4] {
                multisets(&incident, &limit, 0, size, &mut picked, &mut |edges| {
                    out.push(behavior(inst, r, edges.to_vec()))
                });
            }
            out.sort_by(|a, b| a.edges.cmp(&b.edges));
        }
    }
    Ok(out)
}

/// Multisets of exactly `left` more elements from `items[from..]`, item `i`
/// used at most `limit[i]` times, in lexicographic order.
fn multisets(
    items: &[usize],
    limit: &[usize],
    from: usize,
    left: usize,
    picked: &mut Vec<usize>,
    emit: &mut dyn FnMut(&[usize]),
) {
    if left == 0 {
        emit(picked);
        return;
    }
    for i in from..items.len() {
        for copies in 1..=limit[i].min(left) {
            for _ in 0..copies {
                picked.push(items[i]);
            }
            multisets(items, limit, i + 1, left - copies, picked, emit);
            for _ in 0..copies {
                picked.pop();
            }
        }
    }
}

/// The cheapest behavior. For TSP it doubles the cheapest edge of lowest
/// index; for waypoint routing ties go to the lexicographically least edge
/// multiset, which makes it empty at every non-waypoint.
pub fn natural_behavior_vertex(
    inst: &Instance,
    m: &[usize],
    r: usize,
    regime: VcRegime,
) -> Result<VertexBehavior, KernelError> {
    let all = enumerate_vertex_behaviors(inst, m, r, regime)?;
    natural_of(inst, r, regime, &all).ok_or(KernelError::NoBehavior(r + 1))
}

fn natural_of(
    inst: &Instance,
    r: usize,
    regime: VcRegime,
    all: &[VertexBehavior],
) -> Option<VertexBehavior> {
    match regime {
        VcRegime::Tsp => {
            let cheapest = all
                .iter()
                .flat_map(|b| b.edges.iter().copied())
                .min_by_key(|&e| (inst.edges[e].weight, e))?;
            Some(behavior(inst, r, vec![cheapest, cheapest]))
        }
        VcRegime::Wrp => all.iter().min_by(|a, b| (a.weight, &a.edges).cmp(&(b.weight, &b.edges))).cloned(),
    }
}

pub fn vertex_impact(inst: &Instance, b: &VertexBehavior, regime: VcRegime) -> VertexImpact {
    let mut deg: BTreeMap<usize, u8> = BTreeMap::new();
    for &e in &b.edges {
        *deg.entry(inst.edges[e].other(b.vertex)).or_insert(0) += 1;
    }
    VertexImpact {
        touched: deg.keys().copied().collect(),
        degrees: match regime {
            VcRegime::Tsp => None,
            VcRegime::Wrp => Some(deg.values().copied().collect()),
        },
    }
}

/// Everything the marking rules need to know about one vertex.
struct Profile {
    natural: VertexBehavior,
    natural_impact: VertexImpact,
    /// Cheapest behavior weight per attainable impact.
    cheapest: BTreeMap<VertexImpact, u64>,
    /// Impacts of behaviors with at most two edge occurrences.
    short: BTreeSet<VertexImpact>,
}

fn profile(inst: &Instance, m: &[usize], r: usize, regime: VcRegime) -> Result<Option<Profile>, KernelError> {
    let all = enumerate_vertex_behaviors(inst, m, r, regime)?;
    let Some(natural) = natural_of(inst, r, regime, &all) else {
        return Ok(None);
    };
    let mut cheapest: BTreeMap<VertexImpact, u64> = BTreeMap::new();
    let mut short = BTreeSet::new();
    for b in &all {
        let imp = vertex_impact(inst, b, regime);
        if b.edges.len() <= 2 {
            short.insert(imp.clone());
        }
        let slot = cheapest.entry(imp).or_insert(u64::MAX);
        *slot = (*slot).min(b.weight);
    }
    Ok(Some(Profile {
        natural_impact: vertex_impact(inst, &natural, regime),
        natural,
        cheapest,
        short,
    }))
}

/// Extra cost of serving impact `i` at `r` instead of the natural
/// behavior; `None` when no behavior of `r` has that impact.
pub fn price_vertex_tsp(inst: &Instance, m: &[usize], r: usize, i: &VertexImpact) -> Result<Option<u64>, KernelError> {
    let Some(p) = profile(inst, m, r, VcRegime::Tsp)? else {
        return Ok(None);
    };
    Ok(p.cheapest.get(i).map(|w| w - p.natural.weight))
}

/// Extra cost of switching `r` from impact `i` to `i2`; finite only when
/// `i` is the impact of the natural behavior and `i2` is attainable.
pub fn price_vertex_wrp(
    inst: &Instance,
    m: &[usize],
    r: usize,
    i: &VertexImpact,
    i2: &VertexImpact,
) -> Result<Option<u64>, KernelError> {
    let Some(p) = profile(inst, m, r, VcRegime::Wrp)? else {
        return Ok(None);
    };
    if &p.natural_impact != i {
        return Ok(None);
    }
    Ok(p.cheapest.get(i2).map(|w| w - p.natural.weight))
}

fn check_cover(inst: &Instance, m: &[usize], pipeline: &str, kind: Kind) -> Result<Vec<bool>, KernelError> {
    if inst.kind != kind {
        return Err(KernelError::KindMismatch {
            pipeline: pipeline.to_string(),
            kind: inst.kind,
        });
    }
    let mask = cover_mask(inst, m)?;
    if !is_vertex_cover(inst, m) {
        return Err(KernelError::BadModulator("not a vertex cover".to_string()));
    }
    Ok(mask)
}

/// Profiles of all vertices outside the cover, or the vertex without any
/// behavior.
fn profiles(
    inst: &Instance,
    m: &[usize],
    mask: &[bool],
    regime: VcRegime,
) -> Result<Result<BTreeMap<usize, Profile>, usize>, KernelError> {
    let mut out = BTreeMap::new();
    for r in (0..inst.n).filter(|&r| !mask[r]) {
        match profile(inst, m, r, regime)? {
            Some(p) => {
                out.insert(r, p);
            }
            None => return Ok(Err(r)),
        }
    }
    Ok(Ok(out))
}

/// Marks the `quota` cheapest candidates `(price, vertex)`.
pub(crate) fn mark_cheapest(mut cands: Vec<(u64, usize)>, quota: usize, marked: &mut BTreeSet<usize>) {
    cands.sort_unstable();
    for &(_, r) in cands.iter().take(quota) {
        marked.insert(r);
    }
}

/// Deletes the vertices outside `keep`; the cover rides along as the
/// modulator hint so that it survives renumbering.
fn delete_unmarked(
    inst: &Instance,
    m: &[usize],
    profiles: &BTreeMap<usize, Profile>,
    keep: &BTreeSet<usize>,
    rule: &str,
    report: &mut KernelReport,
) -> Instance {
    let mut remove = vec![false; inst.n];
    let mut paid: i128 = 0;
    for (&r, p) in profiles {
        if !keep.contains(&r) {
            remove[r] = true;
            paid += p.natural.weight as i128;
        }
    }
    let removed: Vec<usize> = (0..inst.n).filter(|&v| remove[v]).collect();
    if removed.is_empty() {
        return inst.clone();
    }
    let mut base = inst.clone();
    let mut hint = m.to_vec();
    hint.sort_unstable();
    hint.dedup();
    base.modulator_hint = Some(hint);
    let (mut out, _) = base.remove_vertices(&remove);
    out.budget = (inst.budget as i128 - paid).max(i64::MIN as i128) as i64;
    report.record(LogEntry::new(rule, removed, out.budget - inst.budget));
    out
}

pub(crate) fn stopped(inst: &Instance, report: &mut KernelReport) -> Option<bool> {
    let stop = rr_stop(inst);
    match stop.verdict {
        Verdict::Yes | Verdict::No => {
            let yes = stop.verdict == Verdict::Yes;
            report.record(stop.log);
            Some(yes)
        }
        _ => None,
    }
}

/// One application of the TSP marking rule: for every attainable impact
/// the `3k` vertices with the cheapest switch to it are kept, all other
/// vertices outside the cover are deleted and pay for their natural
/// behavior.
pub fn rule_vc_tsp(inst: &Instance, m: &[usize]) -> Result<KernelResult, KernelError> {
    let mut report = KernelReport::new("vc-tsp");
    let mask = check_cover(inst, m, "vc-tsp", Kind::Tsp)?;
    if let Some(yes) = stopped(inst, &mut report) {
        return Ok(KernelResult::decided(yes, report));
    }
    let profiles = match profiles(inst, m, &mask, VcRegime::Tsp)? {
        Ok(p) => p,
        Err(r) => {
            report.record(LogEntry::new("no-behavior", [r], 0));
            return Ok(KernelResult::decided(false, report));
        }
    };
    let k = m.len();
    let impacts: BTreeSet<&VertexImpact> = profiles.values().flat_map(|p| p.cheapest.keys()).collect();
    let mut marked = BTreeSet::new();
    for &imp in &impacts {
        let cands = profiles
            .iter()
            .filter_map(|(&r, p)| p.cheapest.get(imp).map(|w| (w - p.natural.weight, r)))
            .collect();
        mark_cheapest(cands, 3 * k, &mut marked);
    }
    report.marks.red += marked.len();
    report.stat_max("k", k as u64);
    report.stat_max("impacts", impacts.len() as u64);
    report.stat_max("r_before", profiles.len() as u64);
    let out = delete_unmarked(inst, m, &profiles, &marked, "vc-tsp", &mut report);
    let r_after = (out.n - k) as u64;
    report.stat_max("r_after", r_after);
    let k = k as u64;
    report.bound("impacts", impacts.len() as u64, k * k);
    report.bound("r", r_after, 3 * k * k * k);
    Ok(KernelResult::kernel(out, report))
}

/// One application of the waypoint routing marking rule with red, yellow
/// and green phases. If some cover vertices become waypoints nothing is
/// deleted in this application.
pub fn rule_vc_wrp(inst: &Instance, m: &[usize]) -> Result<KernelResult, KernelError> {
    let mut report = KernelReport::new("vc-wrp");
    let mask = check_cover(inst, m, "vc-wrp", Kind::Wrp)?;
    if let Some(yes) = stopped(inst, &mut report) {
        return Ok(KernelResult::decided(yes, report));
    }
    let profiles = match profiles(inst, m, &mask, VcRegime::Wrp)? {
        Ok(p) => p,
        Err(r) => {
            report.record(LogEntry::new("no-behavior", [r], 0));
            return Ok(KernelResult::decided(false, report));
        }
    };
    let k = m.len();
    let impacts: BTreeSet<&VertexImpact> = profiles.values().flat_map(|p| p.cheapest.keys()).collect();
    let short: BTreeSet<&VertexImpact> = profiles.values().flat_map(|p| p.short.iter()).collect();
    let (i_all, i_short) = (impacts.len(), short.len());

    // Red: only pairs (natural impact of r, attainable impact of r) have a
    // finite price, so the buckets are filled per vertex.
    let mut buckets: BTreeMap<(&VertexImpact, &VertexImpact), Vec<(u64, usize)>> = BTreeMap::new();
    for (&r, p) in &profiles {
        for (imp, &w) in &p.cheapest {
            buckets
                .entry((&p.natural_impact, imp))
                .or_default()
                .push((w - p.natural.weight, r));
        }
    }
    let mut red = BTreeSet::new();
    for cands in buckets.into_values() {
        mark_cheapest(cands, 2 * i_short + k, &mut red);
    }

    let mut by_natural: BTreeMap<&VertexImpact, Vec<usize>> = BTreeMap::new();
    for (&r, p) in &profiles {
        by_natural.entry(&p.natural_impact).or_default().push(r);
    }

    // Yellow, or promotion of the touched cover vertices.
    let mut yellow = BTreeSet::new();
    let mut promoted = BTreeSet::new();
    for (&imp, rs) in &by_natural {
        if imp.touched.iter().all(|&t| inst.waypoints[t]) {
            continue;
        }
        let unmarked: Vec<usize> = rs.iter().copied().filter(|r| !red.contains(r)).collect();
        if unmarked.len() <= 2 * i_short {
            yellow.extend(unmarked);
        } else {
            promoted.extend(imp.touched.iter().copied().filter(|&t| !inst.waypoints[t]));
        }
    }

    // Green: parity of what is left per natural impact.
    let mut green = BTreeSet::new();
    let mut odd_groups = 0u64;
    for rs in by_natural.values() {
        let unmarked: Vec<usize> = rs
            .iter()
            .copied()
            .filter(|r| !red.contains(r) && !yellow.contains(r))
            .collect();
        let take = match unmarked.len() {
            0 => 0,
            c if c % 2 == 1 => 1,
            _ => 2,
        };
        green.extend(unmarked.iter().take(take));
        if (unmarked.len() - take) % 2 == 1 {
            odd_groups += 1;
        }
    }

    report.marks.red += red.len();
    report.marks.yellow += yellow.len();
    report.marks.green += green.len();
    let marked = red.len() + yellow.len() + green.len();
    report.stat_max("k", k as u64);
    report.stat_max("impacts", i_all as u64);
    report.stat_max("impacts_short", i_short as u64);
    report.stat_max("r_before", profiles.len() as u64);
    report.stat_max("marked", marked as u64);
    let (a, s) = (i_all as u64, i_short as u64);
    let red_limit = (2 * s + k as u64) * s * a;
    report.bound("marked", marked as u64, red_limit + 4 * s);
    report.bound("marked_with_yellow", marked as u64, red_limit + 2 * s * s + 2 * s);
    report.bound("odd_removal_groups", odd_groups, 0);

    if !promoted.is_empty() {
        let mut out = inst.clone();
        for &t in &promoted {
            out.waypoints[t] = true;
        }
        report.promoted.extend(promoted.iter().map(|t| t + 1));
        report.record(LogEntry::new("promote", promoted.iter().copied(), 0));
        return Ok(KernelResult::kernel(out, report));
    }
    let keep: BTreeSet<usize> = red.union(&yellow).chain(green.iter()).copied().collect();
    let out = delete_unmarked(inst, m, &profiles, &keep, "vc-wrp", &mut report);
    report.stat_max("r_after", (out.n - k) as u64);
    Ok(KernelResult::kernel(out, report))
}
