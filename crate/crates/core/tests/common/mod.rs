//! Seeded generators of small instances for the integration suites. Every
//! instance has at most 12 edges, so the exact oracles settle it quickly.

#![allow(dead_code)]

use rand::Rng;
use tspkern::oracle::{solve, Engine, OracleCaps};
use tspkern::{Instance, Kind};

pub const MAX_EDGES: usize = 12;

/// Sets the budget to the optimum shifted by -2..=2, or to a random value
/// when no closed walk exists.
pub fn budget_near_opt(rng: &mut impl Rng, inst: &mut Instance) {
    let opt = solve(inst, &OracleCaps::default(), Engine::Auto)
        .expect("generated instances are oracle-scale")
        .opt_weight;
    inst.budget = match opt {
        Some(o) => o as i64 + rng.gen_range(-2..=2),
        None => rng.gen_range(0..30),
    };
}

/// Connected-ish waypoint routing instance with long degree-2 stretches.
pub fn fes_wrp(rng: &mut impl Rng) -> Instance {
    let n = rng.gen_range(2..=9);
    let m = rng.gen_range(n - 1..=MAX_EDGES);
    let mut edges = Vec::new();
    for v in 1..n {
        let u = if rng.gen_bool(0.7) { v - 1 } else { rng.gen_range(0..v) };
        edges.push((u, v, rng.gen_range(0..8), rng.gen_range(1..=2)));
    }
    while edges.len() < m {
        let u = rng.gen_range(0..n);
        let v = rng.gen_range(0..n);
        if u != v {
            edges.push((u, v, rng.gen_range(0..8), rng.gen_range(1..=2)));
        }
    }
    let wps: Vec<usize> = (0..n).filter(|_| rng.gen_bool(0.5)).collect();
    let mut inst = Instance::wrp(n, &edges, &wps, 0).unwrap();
    budget_near_opt(rng, &mut inst);
    inst
}

/// Cover `0..k` recorded as the hint; every other vertex is joined to one
/// or two cover vertices. Waypoint routing instances get capacity 1 on some
/// legs and waypoint probability 0.8.
pub fn cover(rng: &mut impl Rng, kind: Kind) -> Instance {
    let k = rng.gen_range(1..=3);
    let mut edges: Vec<(usize, usize, u64, u64)> = Vec::new();
    for a in 0..k {
        for b in a + 1..k {
            if rng.gen_bool(0.4) {
                edges.push((a, b, rng.gen_range(1..=6), 2));
            }
        }
    }
    let mut n = k;
    while edges.len() < MAX_EDGES - 1 {
        let v = n;
        n += 1;
        let first = rng.gen_range(0..k);
        let cap = if rng.gen_bool(0.15) { 1 } else { 2 };
        edges.push((v, first, rng.gen_range(1..=4), cap));
        if k > 1 && rng.gen_bool(0.4) {
            let second = (first + rng.gen_range(1..k)) % k;
            edges.push((v, second, rng.gen_range(1..=4), 2));
        }
        if rng.gen_bool(0.15) {
            break;
        }
    }
    let mut inst = match kind {
        Kind::Wrp => {
            let wps: Vec<usize> = (0..n).filter(|_| rng.gen_bool(0.8)).collect();
            Instance::wrp(n, &edges, &wps, 0).unwrap()
        }
        _ => {
            let plain: Vec<_> = edges.iter().map(|&(u, v, w, _)| (u, v, w)).collect();
            Instance::tsp(n, &plain, 0).unwrap()
        }
    };
    inst.modulator_hint = Some((0..k).collect());
    budget_near_opt(rng, &mut inst);
    inst
}

/// Modulator `0..k` recorded as the hint, components of up to `r` vertices
/// (paths when `paths`, otherwise paths with an occasional chord) attached
/// by random legs. Retries until the edge count fits.
pub fn modulated(rng: &mut impl Rng, kind: Kind, k: usize, r: usize, paths: bool) -> Instance {
    loop {
        let mut edges = Vec::new();
        for a in 0..k {
            for b in a + 1..k {
                if rng.gen_bool(0.4) {
                    edges.push((a, b, rng.gen_range(1..=6u64)));
                }
            }
        }
        let mut n = k;
        for _ in 0..rng.gen_range(1..=5) {
            let size = rng.gen_range(1..=r);
            let base = n;
            n += size;
            for i in 1..size {
                edges.push((base + i - 1, base + i, rng.gen_range(1..=4u64)));
            }
            if !paths && size >= 3 && rng.gen_bool(0.4) {
                edges.push((base, base + size - 1, rng.gen_range(1..=4u64)));
            }
            let mut any = false;
            for v in base..n {
                for mv in 0..k {
                    if rng.gen_bool(0.3) {
                        edges.push((v, mv, rng.gen_range(1..=5u64)));
                        any = true;
                    }
                }
            }
            if !any {
                edges.push((base, rng.gen_range(0..k), rng.gen_range(1..=5u64)));
            }
        }
        if edges.len() > MAX_EDGES {
            continue;
        }
        let mut inst = match kind {
            Kind::Tsp => Instance::tsp(n, &edges, 0).unwrap(),
            _ => {
                let wps: Vec<usize> = (0..n)
                    .filter(|&v| rng.gen_bool(if v < k { 0.5 } else { 0.85 }))
                    .collect();
                Instance::subtsp(n, &edges, &wps, 0).unwrap()
            }
        };
        inst.modulator_hint = Some((0..k).collect());
        budget_near_opt(rng, &mut inst);
        return inst;
    }
}

/// Random TSP or Subset TSP instance with at most 12 edges.
pub fn plain(rng: &mut impl Rng) -> Instance {
    let n = rng.gen_range(2..=8);
    let m = rng.gen_range(1..=MAX_EDGES);
    let edges: Vec<(usize, usize, u64)> = (0..m)
        .map(|i| {
            let (u, v) = if i + 1 < n && rng.gen_bool(0.8) {
                (i, i + 1)
            } else {
                let u = rng.gen_range(0..n);
                (u, (u + rng.gen_range(1..n)) % n)
            };
            (u, v, rng.gen_range(0..20))
        })
        .collect();
    let budget = rng.gen_range(0..60);
    if rng.gen_bool(0.5) {
        Instance::tsp(n, &edges, budget).unwrap()
    } else {
        let wps: Vec<usize> = (0..n).filter(|_| rng.gen_bool(0.5)).collect();
        Instance::subtsp(n, &edges, &wps, budget).unwrap()
    }
}
