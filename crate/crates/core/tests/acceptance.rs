//! Acceptance suite: one PASS or FAIL line per criterion, non-zero exit if
//! any criterion fails.

mod common;

use std::collections::BTreeSet;
use std::process::ExitCode;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tspkern::gadgets::{
    compose_degtw, compose_fn, gen_planted, mcc_to_subtsp, selection_gadget, HpGraph, MccInstance, Planted,
};
use tspkern::instance::{decompose, Target};
use tspkern::modulator::{
    blend_behavior, component_impact, enumerate_component_behaviors, is_component_behavior, pieces, DEFAULT_GUARD,
};
use tspkern::oracle::{
    check_certificate, solve, solve_exact_multiplicity, solve_frontier, solve_heldkarp, verdict, Engine, OracleCaps,
    SolutionMultigraph,
};
use tspkern::pipeline::{kernelize, KernelConfig, Pipeline};
use tspkern::preprocess::{compress_weights, encoding_bits, Verdict};
use tspkern::{Instance, KernelOutcome, KernelReport, Kind};

type Outcome = Result<String, String>;

/// Reports of every kernelization run, for the bound criteria.
#[derive(Default)]
struct Runs {
    reports: Vec<(Pipeline, KernelReport)>,
}

impl Runs {
    fn of(&self, p: Pipeline) -> impl Iterator<Item = &KernelReport> {
        self.reports.iter().filter(move |(q, _)| *q == p).map(|(_, r)| r)
    }
}

fn config(p: Pipeline, r: usize) -> KernelConfig {
    let mut c = KernelConfig::new(p);
    c.r = r;
    c
}

/// Kernelizes and compares verdicts; `Ok(shrunk)` on agreement.
fn safe(inst: &Instance, cfg: &KernelConfig, caps: &OracleCaps, runs: &mut Runs) -> Result<bool, String> {
    let expected = verdict(inst, caps).map_err(|e| e.to_string())?;
    let res = kernelize(inst, cfg).map_err(|e| format!("{e} on\n{}", inst.render()))?;
    let (got, shrunk) = match &res.outcome {
        KernelOutcome::Decided(yes) => (*yes, true),
        KernelOutcome::Kernel(k) => (
            verdict(k, caps).map_err(|e| e.to_string())?,
            k.n < inst.n || k.m() < inst.m(),
        ),
    };
    runs.reports.push((cfg.pipeline, res.report));
    if got != expected {
        return Err(format!(
            "{} r={}: verdict {expected} became {got} on\n{}",
            cfg.pipeline,
            cfg.r,
            inst.render()
        ));
    }
    Ok(shrunk)
}

fn criterion_safeness(runs: &mut Runs) -> Outcome {
    let caps = OracleCaps::default();
    let per = 500;
    let mut lines = Vec::new();
    let suites: [(Pipeline, usize, u64); 7] = [
        (Pipeline::Fes, 0, 101),
        (Pipeline::VcTsp, 0, 102),
        (Pipeline::VcWrp, 0, 103),
        (Pipeline::Components, 2, 104),
        (Pipeline::Components, 3, 105),
        (Pipeline::Paths, 2, 106),
        (Pipeline::Paths, 3, 107),
    ];
    for (p, r, seed) in suites {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cfg = config(p, r.max(1));
        let mut shrunk = 0;
        for _ in 0..per {
            let inst = match p {
                Pipeline::Fes => common::fes_wrp(&mut rng),
                Pipeline::VcTsp => common::cover(&mut rng, Kind::Tsp),
                Pipeline::VcWrp => common::cover(&mut rng, Kind::Wrp),
                Pipeline::Components => {
                    let k = rng.gen_range(1..=3);
                    common::modulated(&mut rng, Kind::Tsp, k, r, false)
                }
                Pipeline::Paths => {
                    let k = rng.gen_range(1..=3);
                    common::modulated(&mut rng, Kind::SubTsp, k, r, true)
                }
            };
            if safe(&inst, &cfg, &caps, runs)? {
                shrunk += 1;
            }
        }
        lines.push(format!("{p}{}: {per} agree ({shrunk} reduced)", if r > 0 { format!(" r={r}") } else { String::new() }));
    }
    Ok(lines.join("; "))
}

fn criterion_fes_bound() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (mut decided, mut checked, mut largest) = (0, 0, (0, 0, 0));
    for i in 0..100 {
        let k = 1 + i % 5;
        let n = rng.gen_range(10..=200);
        let kind = [Kind::Wrp, Kind::Tsp, Kind::SubTsp][i % 3];
        let inst = gen_planted(kind, Planted::FeedbackEdges, k, 1, n, (1, 50), rng.gen()).map_err(|e| e.to_string())?;
        let res = kernelize(&inst, &config(Pipeline::Fes, 1)).map_err(|e| e.to_string())?;
        match &res.outcome {
            KernelOutcome::Decided(_) => decided += 1,
            KernelOutcome::Kernel(out) => {
                checked += 1;
                if !res.report.bounds_hold() {
                    return Err(format!("n={n} fes={k}:\n{}", res.report.to_text()));
                }
                if out.n > 8 * k || out.m() > 9 * k {
                    return Err(format!("n={n} planted fes={k}: kernel has {} vertices, {} edges", out.n, out.m()));
                }
                let kk = res.report.stats.get("fes_output").copied().unwrap_or(0);
                if out.n > largest.0 {
                    largest = (out.n, out.m(), kk);
                }
            }
        }
    }
    Ok(format!(
        "{checked} kernels within 8k vertices and 9k edges for the planted k, {decided} decided; largest {} vertices, {} edges (kernel fes {})",
        largest.0, largest.1, largest.2
    ))
}

/// Larger planted instances whose bounds are checked without an oracle.
fn planted_runs(runs: &mut Runs) -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for i in 0..40 {
        let (kind, planted, p, r) = match i % 4 {
            0 => (Kind::Tsp, Planted::VertexCover, Pipeline::VcTsp, 1),
            1 => (Kind::Wrp, Planted::VertexCover, Pipeline::VcWrp, 1),
            2 => (Kind::Tsp, Planted::Components, Pipeline::Components, 3),
            _ => (Kind::SubTsp, Planted::Paths, Pipeline::Paths, 3),
        };
        let k = rng.gen_range(1..=3);
        let n = rng.gen_range(15..=40);
        let inst = gen_planted(kind, planted, k, r, n, (1, 9), rng.gen()).map_err(|e| e.to_string())?;
        let res = kernelize(&inst, &config(p, r)).map_err(|e| format!("{p}: {e}"))?;
        runs.reports.push((p, res.report));
    }
    Ok(())
}

fn check_bounds<'a>(reports: impl Iterator<Item = &'a KernelReport>, names: &[&str]) -> Outcome {
    let mut seen = BTreeSet::new();
    let mut count = 0;
    for rep in reports {
        count += 1;
        for b in &rep.bounds {
            if names.contains(&b.quantity.as_str()) {
                seen.insert(b.quantity.clone());
                if !b.holds {
                    return Err(format!("{} {} > {}\n{}", b.quantity, b.measured, b.limit, rep.to_text()));
                }
            }
        }
    }
    let missing: Vec<_> = names.iter().filter(|n| !seen.contains(**n)).collect();
    if !missing.is_empty() {
        return Err(format!("bounds {missing:?} never measured"));
    }
    Ok(format!("{count} reports, {} checked", names.join(", ")))
}

fn criterion_blend() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut tuples = 0;
    let mut attempts = 0;
    while tuples < 200 {
        attempts += 1;
        if attempts > 20_000 {
            return Err(format!("only {tuples} valid tuples generated"));
        }
        let r = rng.gen_range(1..=4);
        let k = rng.gen_range(2..=4);
        let inst = common::modulated(&mut rng, Kind::SubTsp, k, r, true);
        let m: Vec<usize> = (0..k).collect();
        let dec = decompose(&inst, &m, Target::Paths(r)).map_err(|e| e.to_string())?;
        let c = dec.components.choose(&mut rng).unwrap().clone();
        let Ok(all) = enumerate_component_behaviors(&inst, &m, &c, r, DEFAULT_GUARD) else {
            continue;
        };
        let Some(nat) = all.iter().min_by(|a, b| (a.weight, &a.edges).cmp(&(b.weight, &b.edges))) else {
            continue;
        };
        let t_nat = component_impact(&inst, &m, nat).touched;
        let Some(&v) = t_nat.choose(&mut rng) else {
            continue;
        };
        let cands: Vec<_> = all
            .iter()
            .filter(|a| {
                !component_impact(&inst, &m, a).touched.contains(&v)
                    && pieces(&inst, &m, a).iter().all(|p| p.legs.len() == 2)
            })
            .collect();
        let Some(&a) = cands.choose(&mut rng) else {
            continue;
        };
        let t_a = component_impact(&inst, &m, a).touched;
        let mut visited: BTreeSet<usize> = t_a.iter().copied().collect();
        for x in 0..k {
            if x != v && rng.gen_bool(0.3) {
                visited.insert(x);
            }
        }
        let visited: Vec<usize> = visited.into_iter().collect();
        let f = blend_behavior(&inst, &m, &c, r, a, &visited, v, DEFAULT_GUARD)
            .map_err(|e| format!("{e} for v={v} A={:?} visited={visited:?} on\n{}", a.edges, inst.render()))?;
        let t_f = component_impact(&inst, &m, &f).touched;
        let allowed: BTreeSet<usize> = t_a.iter().chain(&t_nat).copied().collect();
        let ok = is_component_behavior(&inst, &m, &c, r, &f.edges)
            && t_f.contains(&v)
            && t_f.iter().all(|x| allowed.contains(x))
            && f.weight <= a.weight
            && anchored(&inst, &m, &f.edges, &visited);
        if !ok {
            return Err(format!("blend {:?} violates the property on\n{}", f.edges, inst.render()));
        }
        tuples += 1;
    }
    Ok(format!("{tuples} tuples, zero failures ({attempts} draws)"))
}

/// Every connected part of the edge set that holds a vertex outside `m`
/// also holds a vertex of `anchors`.
fn anchored(inst: &Instance, m: &[usize], edges: &[usize], anchors: &[usize]) -> bool {
    let mut label: Vec<usize> = (0..inst.n).collect();
    loop {
        let mut changed = false;
        for &e in edges {
            let (u, v) = (inst.edges[e].u, inst.edges[e].v);
            let low = label[u].min(label[v]);
            if label[u] != low || label[v] != low {
                label[u] = low;
                label[v] = low;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    let roots: BTreeSet<usize> = anchors.iter().map(|&a| label[a]).collect();
    edges
        .iter()
        .flat_map(|&e| [inst.edges[e].u, inst.edges[e].v])
        .filter(|x| !m.contains(x))
        .all(|x| roots.contains(&label[x]))
}

fn criterion_gadgets() -> Outcome {
    let caps = OracleCaps::default();
    // Selection gadget optima, and every optimal multigraph of the
    // three-cherry gadget visits exactly one port per cherry.
    for len in [3usize, 4] {
        let g = selection_gadget(len).map_err(|e| e.to_string())?;
        let opt = solve(&g, &caps, Engine::Auto).map_err(|e| e.to_string())?.opt_weight;
        if opt != Some(2 * len as u64) {
            return Err(format!("selection gadget l={len}: optimum {opt:?}"));
        }
    }
    let g = selection_gadget(3).unwrap();
    let mut optimal = 0;
    for code in 0..3u32.pow(g.m() as u32) {
        let mut c = code;
        let mult: Vec<u32> = (0..g.m())
            .map(|_| {
                let x = c % 3;
                c /= 3;
                x
            })
            .collect();
        let sol = SolutionMultigraph::new(&g, mult);
        if sol.total_weight != 6 || !check_certificate(&g, &sol) {
            continue;
        }
        optimal += 1;
        for i in 0..3 {
            let used = |v: usize| g.edges.iter().zip(&sol.multiplicity).any(|(e, &x)| x > 0 && e.touches(v));
            if used(3 * i) == used(3 * i + 1) {
                return Err(format!("optimal witness {:?} breaks cherry {i}", sol.multiplicity));
            }
        }
    }

    // Compositions of all pairs of 4-vertex graphs.
    let graphs = HpGraph::all(4);
    let hp: Vec<bool> = graphs.iter().map(HpGraph::has_hamiltonian_path).collect();
    let mut pairs = 0;
    for (i, a) in graphs.iter().enumerate() {
        for (j, b) in graphs.iter().enumerate() {
            let pair = [a.clone(), b.clone()];
            let expected = hp[i] && hp[j];
            for inst in [compose_fn(&pair), compose_degtw(&pair)] {
                let inst = inst.map_err(|e| e.to_string())?;
                if inst.budget != 10 || verdict(&inst, &caps).map_err(|e| e.to_string())? != expected {
                    return Err(format!("composition of graphs {i} and {j} disagrees"));
                }
            }
            pairs += 1;
        }
    }

    // Every multicolored clique instance with three classes of two.
    let cross: Vec<_> = (0..3)
        .flat_map(|i| (i + 1..3).map(move |j| (i, j)))
        .flat_map(|(i, j)| (0..2).flat_map(move |a| (0..2).map(move |b| ((i, a), (j, b)))))
        .collect();
    let mut cliques = 0;
    for code in 0u32..1 << cross.len() {
        let edges: Vec<_> = cross
            .iter()
            .enumerate()
            .filter(|(i, _)| code >> i & 1 == 1)
            .map(|(_, &e)| e)
            .collect();
        let mcc = MccInstance::padded(3, 2, &edges).map_err(|e| e.to_string())?;
        let inst = mcc_to_subtsp(&mcc).map_err(|e| e.to_string())?;
        let expected = mcc.has_multicolored_clique();
        if verdict(&inst, &caps).map_err(|e| e.to_string())? != expected {
            return Err(format!("mcc edge set {code:#x} disagrees"));
        }
        cliques += expected as usize;
    }
    Ok(format!(
        "selection optima 6 and 8 ({optimal} optimal multigraphs at l=3 checked); {pairs} graph pairs; {} clique instances ({cliques} yes)",
        1u32 << cross.len()
    ))
}

fn criterion_oracles() -> Outcome {
    let caps = OracleCaps::default();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut feasible = 0;
    for _ in 0..1000 {
        let inst = common::plain(&mut rng);
        let a = solve_exact_multiplicity(&inst, &caps).map_err(|e| e.to_string())?;
        let b = solve_heldkarp(&inst, &caps).map_err(|e| e.to_string())?;
        let c = solve_frontier(&inst, &caps).map_err(|e| e.to_string())?;
        if a.opt_weight != b.opt_weight || a.opt_weight != c.opt_weight {
            return Err(format!(
                "optima {:?} {:?} {:?} on\n{}",
                a.opt_weight,
                b.opt_weight,
                c.opt_weight,
                inst.render()
            ));
        }
        feasible += a.feasible as usize;
    }
    Ok(format!("1000 instances, three engines agree ({feasible} feasible)"))
}

fn criterion_compression() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut reduced = 0;
    for _ in 0..200 {
        let m = rng.gen_range(1..=10);
        let scale = 10u64.pow(rng.gen_range(0..=7));
        let edges: Vec<(usize, usize, u64)> = (0..m)
            .map(|i| {
                let w = if rng.gen_bool(0.5) {
                    rng.gen_range(1..=100) * scale + rng.gen_range(0..=scale / 50)
                } else {
                    rng.gen_range(0..=1_000_000_000)
                };
                (i % 6, (i % 6) + 1, w)
            })
            .collect();
        let sum: u64 = edges.iter().map(|e| e.2).sum();
        let budget = rng.gen_range(0..=2 * sum) as i64;
        let inst = Instance::tsp(7, &edges, budget).unwrap();
        let out = match compress_weights(&inst).verdict {
            Verdict::Reduced(out) => {
                reduced += 1;
                out
            }
            _ => inst.clone(),
        };
        let w0: Vec<u64> = inst.edges.iter().map(|e| e.weight).collect();
        let w1: Vec<u64> = out.edges.iter().map(|e| e.weight).collect();
        if encoding_bits(&w1, out.budget) > encoding_bits(&w0, inst.budget) {
            return Err(format!("bit size grew on\n{}", inst.render()));
        }
        for code in 0..3u32.pow(m as u32) {
            let (mut c, mut s0, mut s1) = (code, 0i128, 0i128);
            for i in 0..m {
                let x = (c % 3) as i128;
                c /= 3;
                s0 += x * w0[i] as i128;
                s1 += x * w1[i] as i128;
            }
            if (s0 - inst.budget as i128).signum() != (s1 - out.budget as i128).signum() {
                return Err(format!("sign differs at vector {code} on\n{}", inst.render()));
            }
        }
    }
    Ok(format!("200 instances sign-equivalent, {reduced} compressed"))
}

fn criterion_determinism() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut runs = 0;
    for _ in 0..20 {
        let seed: u64 = rng.gen();
        for (p, kind, planted, r) in [
            (Pipeline::Fes, Kind::Wrp, Planted::FeedbackEdges, 1),
            (Pipeline::VcTsp, Kind::Tsp, Planted::VertexCover, 1),
            (Pipeline::VcWrp, Kind::Wrp, Planted::VertexCover, 1),
            (Pipeline::Components, Kind::Tsp, Planted::Components, 2),
            (Pipeline::Paths, Kind::SubTsp, Planted::Paths, 3),
        ] {
            let once = || -> Result<String, String> {
                let inst = gen_planted(kind, planted, 2, r, 20, (1, 30), seed).map_err(|e| e.to_string())?;
                let res = kernelize(&inst, &config(p, r)).map_err(|e| e.to_string())?;
                let kernel = match &res.outcome {
                    KernelOutcome::Kernel(k) => k.render(),
                    KernelOutcome::Decided(yes) => format!("decided {yes}"),
                };
                let json = serde_json::to_string(&res.report).map_err(|e| e.to_string())?;
                Ok(format!("{}{kernel}{}{json}", inst.render(), res.report.to_text()))
            };
            if once()? != once()? {
                return Err(format!("{p} differs between runs for seed {seed}"));
            }
            runs += 1;
        }
    }
    let gadgets = || {
        let mcc = MccInstance::padded(3, 3, &[((0, 0), (1, 2)), ((1, 1), (2, 0))]).unwrap();
        [
            mcc_to_subtsp(&mcc).unwrap().render(),
            selection_gadget(5).unwrap().render(),
            compose_fn(&HpGraph::all(3)).unwrap().render(),
            compose_degtw(&HpGraph::all(3)).unwrap().render(),
        ]
        .concat()
    };
    if gadgets() != gadgets() {
        return Err("gadget output differs between runs".into());
    }
    Ok(format!("{runs} pipeline runs and all generators byte-identical"))
}

fn main() -> ExitCode {
    let start = Instant::now();
    let mut runs = Runs::default();
    let mut results: Vec<(&str, Outcome)> = Vec::new();
    results.push(("1 safeness suite", criterion_safeness(&mut runs)));
    results.push(("2 feedback edge set kernel size", criterion_fes_bound()));
    let planted = planted_runs(&mut runs);
    let with_planted = |o: Outcome| match (&planted, o) {
        (Err(e), _) => Err(format!("planted runs failed: {e}")),
        (_, o) => o,
    };
    results.push((
        "3 vertex cover TSP bounds",
        with_planted(check_bounds(runs.of(Pipeline::VcTsp), &["impacts", "r"])),
    ));
    results.push((
        "4 vertex cover WRP bookkeeping",
        with_planted(check_bounds(
            runs.of(Pipeline::VcWrp),
            &["marked", "marked_with_yellow", "odd_removal_groups"],
        )),
    ));
    let comp = check_bounds(runs.of(Pipeline::Components), &["components", "odd_removal_groups"]);
    let paths = check_bounds(runs.of(Pipeline::Paths), &["components", "odd_removal_groups"]);
    results.push((
        "5 component and path bounds",
        with_planted(comp.and_then(|a| paths.map(|b| format!("components: {a}; paths: {b}")))),
    ));
    results.push(("6 blending property", criterion_blend()));
    results.push(("7 gadget optima and reductions", criterion_gadgets()));
    results.push(("8 oracle cross-validation", criterion_oracles()));
    results.push(("9 weight compression", criterion_compression()));
    results.push(("10 determinism", criterion_determinism()));

    let mut failed = 0;
    for (name, outcome) in &results {
        match outcome {
            Ok(detail) => println!("PASS criterion {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL criterion {name}: {why}");
            }
        }
    }
    println!("{} of {} criteria passed in {:.1?}", results.len() - failed, results.len(), start.elapsed());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
