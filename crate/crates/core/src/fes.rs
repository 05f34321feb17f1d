//! Kernel for waypoint routing parameterized by the feedback edge set
//! number. Leaves are removed or decided, long degree-2 paths are shortened,
//! and the weights are compressed at the end.

use crate::instance::{fes_number, Capacity, Edge, Instance, Kind, MAX_WEIGHT};
use crate::preprocess::{
    compress_weights, ensure_connected, min_capacity, rr_stop, LogEntry, RuleOutcome, Verdict,
};
use crate::report::{KernelReport, KernelResult};

fn leaves(inst: &Instance) -> impl Iterator<Item = (usize, &Edge)> {
    let deg = inst.degrees();
    (0..inst.n).filter(move |&v| deg[v] == 1).map(move |v| {
        let e = inst.edges.iter().find(|e| e.touches(v)).expect("leaf has an edge");
        (v, e)
    })
}

/// A waypoint hanging on a capacity-1 edge cannot be left again: no.
pub fn rr_leaf_cap1(inst: &Instance) -> RuleOutcome {
    match leaves(inst).find(|(v, e)| inst.waypoints[*v] && e.capacity == Capacity::One) {
        Some((v, _)) => RuleOutcome {
            verdict: Verdict::No,
            log: LogEntry::new("leaf-cap1", [v], 0),
        },
        None => RuleOutcome::unchanged("leaf-cap1"),
    }
}

/// Deletes the lowest-id non-waypoint leaf.
pub fn rr_nonterminal_leaf(inst: &Instance) -> RuleOutcome {
    let Some((v, _)) = leaves(inst).find(|(v, _)| !inst.waypoints[*v]) else {
        return RuleOutcome::unchanged("nonterminal-leaf");
    };
    let mut remove = vec![false; inst.n];
    remove[v] = true;
    RuleOutcome {
        verdict: Verdict::Reduced(inst.remove_vertices(&remove).0),
        log: LogEntry::new("nonterminal-leaf", [v], 0),
    }
}

/// Deletes the lowest-id waypoint leaf whose edge can be used twice, pays
/// for the round trip up front and makes its neighbour a waypoint.
pub fn rr_terminal_leaf(inst: &Instance) -> RuleOutcome {
    let Some((v, e)) = leaves(inst).find(|(v, e)| inst.waypoints[*v] && e.capacity != Capacity::One)
    else {
        return RuleOutcome::unchanged("terminal-leaf");
    };
    let u = e.other(v);
    let budget = (inst.budget as i128 - 2 * e.weight as i128).max(i64::MIN as i128) as i64;
    let mut out = inst.clone();
    out.waypoints[u] = true;
    out.budget = budget;
    let mut remove = vec![false; inst.n];
    remove[v] = true;
    RuleOutcome {
        verdict: Verdict::Reduced(out.remove_vertices(&remove).0),
        log: LogEntry::new("terminal-leaf", [v, u], budget - inst.budget),
    }
}

/// A path `p0 .. pl` whose inner vertices have degree 2 and share a class.
#[derive(Clone, Debug, PartialEq, Eq)]
struct Chain {
    verts: Vec<usize>,
    edges: Vec<usize>,
}

/// Walks away from `x` through `first` while the vertices are eligible.
/// Returns the vertices and edges passed and whether the walk closed up at
/// `x`, in which case the whole cycle is eligible and `x` is not repeated.
fn extend(
    inst: &Instance,
    inc: &[Vec<usize>],
    eligible: &[bool],
    x: usize,
    first: usize,
) -> (Vec<usize>, Vec<usize>, bool) {
    let (mut verts, mut edges) = (Vec::new(), Vec::new());
    let (mut cur, mut e) = (x, first);
    loop {
        let next = inst.edges[e].other(cur);
        edges.push(e);
        if next == x {
            return (verts, edges, true);
        }
        verts.push(next);
        if !eligible[next] {
            return (verts, edges, false);
        }
        e = if inc[next][0] == e { inc[next][1] } else { inc[next][0] };
        cur = next;
    }
}

/// Maximal chains of eligible degree-2 vertices, at most one per chain or
/// cycle. A chain whose ends coincide is cut back by one edge so that its
/// endpoints differ; a cycle of eligible vertices starts at its lowest id.
fn chains(inst: &Instance, class: impl Fn(usize) -> bool) -> Vec<Chain> {
    let inc = inst.incidence();
    let eligible: Vec<bool> = (0..inst.n).map(|v| inc[v].len() == 2 && class(v)).collect();
    let mut seen = vec![false; inst.n];
    let mut out = Vec::new();
    for x in 0..inst.n {
        if !eligible[x] || seen[x] {
            continue;
        }
        let (left_v, left_e, closed) = extend(inst, &inc, &eligible, x, inc[x][0]);
        let (mut verts, mut edges) = if closed {
            let mut verts = vec![x];
            verts.extend(left_v);
            verts.push(x);
            (verts, left_e)
        } else {
            let (right_v, right_e, _) = extend(inst, &inc, &eligible, x, inc[x][1]);
            let mut verts: Vec<usize> = left_v.into_iter().rev().collect();
            verts.push(x);
            verts.extend(right_v);
            let mut edges: Vec<usize> = left_e.into_iter().rev().collect();
            edges.extend(right_e);
            (verts, edges)
        };
        for &v in &verts {
            seen[v] = true;
        }
        if verts[0] == verts[verts.len() - 1] {
            verts.pop();
            edges.pop();
        }
        out.push(Chain { verts, edges });
    }
    out
}

fn path_weight(inst: &Instance, edges: &[usize]) -> Option<u64> {
    edges
        .iter()
        .try_fold(0u64, |acc, &e| acc.checked_add(inst.edges[e].weight))
        .filter(|&w| w <= MAX_WEIGHT)
}

/// Drops the chain's edges, appends `added`, then drops `gone` vertices.
fn rewire(inst: &Instance, chain: &Chain, added: Vec<Edge>, gone: &[usize]) -> Instance {
    let mut out = inst.clone();
    let mut keep = vec![true; inst.m()];
    for &e in &chain.edges {
        keep[e] = false;
    }
    out.edges = inst
        .edges
        .iter()
        .zip(&keep)
        .filter(|(_, &k)| k)
        .map(|(e, _)| e.clone())
        .chain(added)
        .collect();
    let mut remove = vec![false; inst.n];
    for &v in gone {
        remove[v] = true;
    }
    out.remove_vertices(&remove).0
}

/// Replaces a path of at least two edges through degree-2 non-waypoints by
/// one edge carrying the path's weight and its smallest capacity.
pub fn rr_contract_nonterminal_path(inst: &Instance) -> RuleOutcome {
    for chain in chains(inst, |v| !inst.waypoints[v]) {
        if chain.edges.len() < 2 {
            continue;
        }
        let Some(weight) = path_weight(inst, &chain.edges) else {
            continue;
        };
        let cap = min_capacity(chain.edges.iter().map(|&e| inst.edges[e].capacity));
        let (p0, pl) = (chain.verts[0], chain.verts[chain.verts.len() - 1]);
        let inner = &chain.verts[1..chain.verts.len() - 1];
        let out = rewire(inst, &chain, vec![Edge::with_capacity(p0, pl, weight, cap)], inner);
        return RuleOutcome {
            verdict: Verdict::Reduced(out),
            log: LogEntry::new("contract-path", inner.iter().copied(), 0),
        };
    }
    RuleOutcome::unchanged("contract-path")
}

/// Replaces the inner waypoints of a path of at least three edges by a
/// single waypoint `x`. One edge `e1` of the path is kept as `{p0, x}` with
/// capacity 1; the rest of the path becomes `{x, pl}`. With no capacity-1
/// edge on the path, the heaviest edge is isolated and a capacity-1 bypass
/// `{p0, pl}` of full path weight is added.
///
/// The path is first trimmed so that both of its ends are waypoints. With a
/// non-waypoint end the replacement is not equivalent: a walk that skips
/// the heavy edge enters the path from both sides, and the gadget can
/// only mimic that when both ends are visited anyway.
pub fn rr_replace_terminal_path(inst: &Instance) -> RuleOutcome {
    for mut chain in chains(inst, |v| inst.waypoints[v]) {
        if !chain.verts.is_empty() && !inst.waypoints[chain.verts[0]] {
            chain.verts.remove(0);
            chain.edges.remove(0);
        }
        if chain.verts.len() > 1 && !inst.waypoints[chain.verts[chain.verts.len() - 1]] {
            chain.verts.pop();
            chain.edges.pop();
        }
        if chain.edges.len() < 3 {
            continue;
        }
        let Some(total) = path_weight(inst, &chain.edges) else {
            continue;
        };
        let (p0, pl) = (chain.verts[0], chain.verts[chain.verts.len() - 1]);
        let x = chain.verts[1];
        let cap = |e: usize| inst.edges[e].capacity;
        let ones: Vec<usize> = chain.edges.iter().copied().filter(|&e| cap(e) == Capacity::One).collect();
        let (e1, rest_cap, bypass) = match ones.len() {
            0 => {
                let heaviest = chain
                    .edges
                    .iter()
                    .copied()
                    .max_by_key(|&e| (inst.edges[e].weight, std::cmp::Reverse(e)))
                    .expect("chain has edges");
                (heaviest, Capacity::Two, true)
            }
            1 => (ones[0], Capacity::Two, false),
            _ => (ones[0], Capacity::One, false),
        };
        let w1 = inst.edges[e1].weight;
        let mut added = vec![
            Edge::with_capacity(p0, x, w1, Capacity::One),
            Edge::with_capacity(x, pl, total - w1, rest_cap),
        ];
        if bypass {
            added.push(Edge::with_capacity(p0, pl, total, Capacity::One));
        }
        let gone = &chain.verts[2..chain.verts.len() - 1];
        let out = rewire(inst, &chain, added, gone);
        return RuleOutcome {
            verdict: Verdict::Reduced(out),
            log: LogEntry::new("replace-path", chain.verts[1..chain.verts.len() - 1].iter().copied(), 0),
        };
    }
    RuleOutcome::unchanged("replace-path")
}

/// Runs the stop, connectivity, leaf and path rules to a fixpoint, then
/// compresses the weights. Uncapacitated inputs are first read as waypoint
/// routing with capacity 2 on every edge, so kernels are always of kind
/// `wrp`.
pub fn kernelize_fes(inst: &Instance) -> KernelResult {
    let mut report = KernelReport::new("fes");
    let mut cur = inst.to_wrp();
    if inst.kind != Kind::Wrp {
        report.note(format!("{} input read as wrp with capacity 2", inst.kind));
    }
    let k_in = fes_number(&cur) as u64;
    report.stat_max("fes_input", k_in);
    let rules: [fn(&Instance) -> RuleOutcome; 7] = [
        rr_stop,
        ensure_connected,
        rr_leaf_cap1,
        rr_nonterminal_leaf,
        rr_terminal_leaf,
        rr_contract_nonterminal_path,
        rr_replace_terminal_path,
    ];
    'fix: loop {
        for rule in rules {
            let outcome = rule(&cur);
            match outcome.verdict {
                Verdict::Unchanged => continue,
                Verdict::Yes | Verdict::No => {
                    let yes = outcome.verdict == Verdict::Yes;
                    report.record(outcome.log);
                    return KernelResult::decided(yes, report);
                }
                Verdict::Reduced(next) => {
                    report.record(outcome.log);
                    cur = next;
                    continue 'fix;
                }
            }
        }
        break;
    }
    let k = fes_number(&cur) as u64;
    loop {
        let outcome = compress_weights(&cur);
        match outcome.verdict {
            Verdict::Reduced(next) => {
                report.record(outcome.log);
                cur = next;
            }
            _ => break,
        }
    }
    report.stat_max("fes_output", k);
    report.bound("vertices", cur.n as u64, 8 * k);
    report.bound("edges", cur.m() as u64, 9 * k);
    // Path replacement adds a bypass edge, so k can grow; the same bounds
    // against the input parameter are the stronger statement.
    report.bound("vertices_input_k", cur.n as u64, 8 * k_in);
    report.bound("edges_input_k", cur.m() as u64, 9 * k_in);
    KernelResult::kernel(cur, report)
}
