//! Problem-agnostic reductions: stop conditions, short-circuiting
//! non-waypoints, connectivity and positivity normalization, and weight
//! compression.

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use crate::graph::bit_length;
use crate::instance::{Capacity, Edge, Instance, Kind, MAX_WEIGHT};

/// One rule application as recorded in a report. Vertex ids are 1-based ids
/// of the instance the rule was applied to.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct LogEntry {
    pub rule: String,
    pub ids: Vec<usize>,
    pub budget_delta: i64,
}

impl LogEntry {
    pub fn new(rule: &str, ids: impl IntoIterator<Item = usize>, budget_delta: i64) -> Self {
        LogEntry {
            rule: rule.to_string(),
            ids: ids.into_iter().map(|v| v + 1).collect(),
            budget_delta,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Yes,
    No,
    Reduced(Instance),
    Unchanged,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RuleOutcome {
    pub verdict: Verdict,
    pub log: LogEntry,
}

impl RuleOutcome {
    pub(crate) fn unchanged(rule: &str) -> Self {
        RuleOutcome {
            verdict: Verdict::Unchanged,
            log: LogEntry::new(rule, [], 0),
        }
    }

    pub(crate) fn decided(rule: &str, yes: bool) -> Self {
        RuleOutcome {
            verdict: if yes { Verdict::Yes } else { Verdict::No },
            log: LogEntry::new(rule, [], 0),
        }
    }

    pub fn fired(&self) -> bool {
        self.verdict != Verdict::Unchanged
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RuleError {
    #[error("vertex {0} is a waypoint")]
    IsWaypoint(usize),
    #[error("vertex {0} outside the instance")]
    NoSuchVertex(usize),
    #[error("rule applies to uncapacitated instances only")]
    Capacitated,
    #[error("weights overflow 63 bits")]
    Overflow,
}

/// Negative budget means no; at most one waypoint means yes (empty walk).
pub fn rr_stop(inst: &Instance) -> RuleOutcome {
    if inst.budget < 0 {
        RuleOutcome::decided("stop", false)
    } else if inst.waypoint_count() <= 1 {
        RuleOutcome::decided("stop", true)
    } else {
        RuleOutcome::unchanged("stop")
    }
}

/// Deletes a non-waypoint `v`, joining every pair of its neighbours by an
/// edge as heavy as the two-hop detour. Where such a pair is already
/// adjacent only the cheaper connection survives.
pub fn rr_short_circuit(inst: &Instance, v: usize) -> Result<RuleOutcome, RuleError> {
    if v >= inst.n {
        return Err(RuleError::NoSuchVertex(v + 1));
    }
    if inst.kind == Kind::Wrp {
        return Err(RuleError::Capacitated);
    }
    if inst.waypoints[v] {
        return Err(RuleError::IsWaypoint(v + 1));
    }
    let mut reach: BTreeMap<usize, u64> = BTreeMap::new();
    for e in inst.edges.iter().filter(|e| e.touches(v)) {
        let u = e.other(v);
        let d = reach.entry(u).or_insert(e.weight);
        *d = (*d).min(e.weight);
    }
    let mut out = inst.clone();
    let near: Vec<(usize, u64)> = reach.into_iter().collect();
    for (a, &(u, du)) in near.iter().enumerate() {
        for &(w, dw) in &near[a + 1..] {
            let cand = du.checked_add(dw).filter(|&x| x <= MAX_WEIGHT).ok_or(RuleError::Overflow)?;
            let existing = out
                .edges
                .iter()
                .enumerate()
                .filter(|(_, e)| e.touches(u) && e.touches(w))
                .min_by_key(|(i, e)| (e.weight, *i))
                .map(|(i, _)| i);
            match existing {
                Some(i) => out.edges[i].weight = out.edges[i].weight.min(cand),
                None => out.edges.push(Edge::new(u, w, cand)),
            }
        }
    }
    let mut remove = vec![false; inst.n];
    remove[v] = true;
    let (out, _) = out.remove_vertices(&remove);
    Ok(RuleOutcome {
        verdict: Verdict::Reduced(out),
        log: LogEntry::new("short-circuit", [v], 0),
    })
}

/// Waypoints spread over two components mean no; otherwise everything
/// outside the waypoints' component is dropped.
pub fn ensure_connected(inst: &Instance) -> RuleOutcome {
    let comps = inst.components();
    let with_wp: Vec<&Vec<usize>> = comps
        .iter()
        .filter(|c| c.iter().any(|&v| inst.waypoints[v]))
        .collect();
    match with_wp.len() {
        0 => RuleOutcome::unchanged("connect"),
        1 if comps.len() == 1 => RuleOutcome::unchanged("connect"),
        1 => {
            let mut remove = vec![true; inst.n];
            for &v in with_wp[0] {
                remove[v] = false;
            }
            let dropped: Vec<usize> = (0..inst.n).filter(|&v| remove[v]).collect();
            let (out, _) = inst.remove_vertices(&remove);
            RuleOutcome {
                verdict: Verdict::Reduced(out),
                log: LogEntry::new("connect", dropped, 0),
            }
        }
        _ => RuleOutcome::decided("connect", false),
    }
}

/// Makes every weight positive: with `Q = sum(w) + 2n + 1` positive weights
/// are multiplied by `Q`, zero weights become 1, and the budget becomes
/// `Q * b + 2n`. A nice solution uses at most `2n` edges, which is what
/// keeps the instances equivalent.
pub fn ensure_positive_weights(inst: &Instance) -> Result<RuleOutcome, RuleError> {
    if inst.edges.iter().all(|e| e.weight > 0) {
        return Ok(RuleOutcome::unchanged("positive-weights"));
    }
    let two_n = 2 * inst.n as u64;
    let q = inst
        .total_weight()
        .and_then(|s| s.checked_add(two_n + 1))
        .filter(|&q| q <= MAX_WEIGHT)
        .ok_or(RuleError::Overflow)?;
    let mut out = inst.clone();
    for e in &mut out.edges {
        e.weight = if e.weight == 0 {
            1
        } else {
            e.weight
                .checked_mul(q)
                .filter(|&w| w <= MAX_WEIGHT)
                .ok_or(RuleError::Overflow)?
        };
    }
    let budget = (q as i128) * (inst.budget as i128) + two_n as i128;
    out.budget = i64::try_from(budget).map_err(|_| RuleError::Overflow)?;
    let delta = i64::try_from(budget - inst.budget as i128).map_err(|_| RuleError::Overflow)?;
    Ok(RuleOutcome {
        verdict: Verdict::Reduced(out),
        log: LogEntry::new("positive-weights", [], delta),
    })
}

/// Largest edge count the compressor verifies exhaustively.
pub const COMPRESS_MAX_EDGES: usize = 12;

/// Total binary length of the weights and the budget.
pub fn encoding_bits(weights: &[u64], budget: i64) -> u64 {
    weights.iter().map(|&w| bit_length(w) as u64).sum::<u64>() + bit_length(budget.unsigned_abs()) as u64
}

/// For candidate weights `cand`, the smallest budget `b'` such that
/// `sign(w.x - b) = sign(cand.x - b')` for every `x` in `{0,1,2}^m`, or
/// `None` when no budget works.
pub fn matching_budget(weights: &[u64], budget: i64, cand: &[u64]) -> Option<i64> {
    let m = weights.len();
    let b = budget as i128;
    let (mut s, mut t) = (0i128, 0i128);
    let mut digits = vec![0u8; m];
    let mut below: Option<i128> = None;
    let mut above: Option<i128> = None;
    let mut at: Option<i128> = None;
    loop {
        match s.cmp(&b) {
            std::cmp::Ordering::Less => below = Some(below.map_or(t, |x| x.max(t))),
            std::cmp::Ordering::Greater => above = Some(above.map_or(t, |x| x.min(t))),
            std::cmp::Ordering::Equal => match at {
                Some(x) if x != t => return None,
                _ => at = Some(t),
            },
        }
        if let (Some(lo), Some(hi)) = (below, above) {
            if hi <= lo + 1 {
                return None;
            }
        }
        if let Some(x) = at {
            if below.is_some_and(|lo| lo >= x) || above.is_some_and(|hi| hi <= x) {
                return None;
            }
        }
        let mut i = 0;
        loop {
            if i == m {
                let chosen = at.unwrap_or_else(|| below.map_or(0, |lo| lo + 1));
                return i64::try_from(chosen).ok();
            }
            if digits[i] < 2 {
                digits[i] += 1;
                s += weights[i] as i128;
                t += cand[i] as i128;
                break;
            }
            digits[i] = 0;
            s -= 2 * weights[i] as i128;
            t -= 2 * cand[i] as i128;
            i += 1;
        }
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Shrinks the weight encoding without changing which multiplicity vectors
/// in `{0,1,2}^m` fit the budget. Candidates (the gcd-reduced weights and
/// coarser roundings of them) are each checked exhaustively, so the rule
/// only runs when `m <= COMPRESS_MAX_EDGES`.
pub fn compress_weights(inst: &Instance) -> RuleOutcome {
    let m = inst.m();
    if m == 0 || m > COMPRESS_MAX_EDGES || inst.budget < 0 {
        return RuleOutcome::unchanged("compress");
    }
    let weights: Vec<u64> = inst.edges.iter().map(|e| e.weight).collect();
    let before = encoding_bits(&weights, inst.budget);
    let g = weights.iter().fold(0, |acc, &w| gcd(acc, w));
    let base: Vec<u64> = weights.iter().map(|&w| if g == 0 { 0 } else { w / g }).collect();
    let top = base.iter().map(|&w| bit_length(w)).max().unwrap_or(1);
    // Coarsest first: the first verified candidate is usually the smallest.
    // The doubled base comes last; it helps when the gcd does not divide b.
    let mut candidates: Vec<Vec<u64>> = (1..=top)
        .rev()
        .map(|shift| base.iter().map(|&w| (w + (1 << (shift - 1))) >> shift).collect())
        .collect();
    candidates.push(base.clone());
    candidates.push(base.iter().map(|&w| w.saturating_mul(2)).collect());
    for cand in candidates {
        let Some(b) = matching_budget(&weights, inst.budget, &cand) else {
            continue;
        };
        if encoding_bits(&cand, b) < before {
            let mut out = inst.clone();
            for (e, &w) in out.edges.iter_mut().zip(&cand) {
                e.weight = w;
            }
            out.budget = b;
            return RuleOutcome {
                verdict: Verdict::Reduced(out),
                log: LogEntry::new("compress", [], b - inst.budget),
            };
        }
    }
    RuleOutcome::unchanged("compress")
}

/// Capacity of a contracted path: the smallest along it.
pub(crate) fn min_capacity(caps: impl IntoIterator<Item = Capacity>) -> Capacity {
    caps.into_iter().min().unwrap_or(Capacity::Unbounded)
}
