//! Instance generators: the hardness constructions (compositions of
//! Hamiltonian path instances, selection and cycle gadgets, the reduction
//! from multicolored clique) and random instances with a planted structure.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::graph::Dsu;
use crate::instance::{Capacity, Edge, Instance, Kind};
use crate::oracle::{solve, Engine, OracleCaps};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GadgetError {
    #[error("all graphs must have {expected} vertices, graph {index} has {found}")]
    MismatchedSizes { expected: usize, index: usize, found: usize },
    #[error("at least one graph is needed")]
    NoGraphs,
    #[error("selection gadget needs length at least 3, got {0}")]
    TooShort(usize),
    #[error("invalid parameters: {0}")]
    Parameters(String),
}

/// A simple undirected graph, input of the compositions.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HpGraph {
    pub n: usize,
    pub edges: Vec<(usize, usize)>,
}

impl HpGraph {
    /// Exhaustive search over vertex orders.
    pub fn has_hamiltonian_path(&self) -> bool {
        if self.n <= 1 {
            return true;
        }
        let mut adj = vec![vec![false; self.n]; self.n];
        for &(u, v) in &self.edges {
            adj[u][v] = true;
            adj[v][u] = true;
        }
        fn extend(adj: &[Vec<bool>], path: &mut Vec<usize>, used: &mut [bool]) -> bool {
            if path.len() == adj.len() {
                return true;
            }
            let last = *path.last().unwrap();
            for y in 0..adj.len() {
                if !used[y] && adj[last][y] {
                    used[y] = true;
                    path.push(y);
                    if extend(adj, path, used) {
                        return true;
                    }
                    path.pop();
                    used[y] = false;
                }
            }
            false
        }
        (0..self.n).any(|s| {
            let mut used = vec![false; self.n];
            used[s] = true;
            extend(&adj, &mut vec![s], &mut used)
        })
    }

    /// All labeled simple graphs on `n` vertices.
    pub fn all(n: usize) -> Vec<HpGraph> {
        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
        (0..1u64 << pairs.len())
            .map(|code| HpGraph {
                n,
                edges: pairs
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| code >> i & 1 == 1)
                    .map(|(_, &p)| p)
                    .collect(),
            })
            .collect()
    }
}

fn common_size(graphs: &[HpGraph]) -> Result<usize, GadgetError> {
    let k = graphs.first().ok_or(GadgetError::NoGraphs)?.n;
    if k == 0 {
        return Err(GadgetError::Parameters("graphs need at least one vertex".into()));
    }
    for (index, g) in graphs.iter().enumerate() {
        if g.n != k {
            return Err(GadgetError::MismatchedSizes {
                expected: k,
                index,
                found: g.n,
            });
        }
    }
    Ok(k)
}

fn disjoint_union(graphs: &[HpGraph], k: usize) -> Vec<(usize, usize, u64)> {
    let mut edges = Vec::new();
    for (i, g) in graphs.iter().enumerate() {
        edges.extend(g.edges.iter().map(|&(u, v)| (i * k + u, i * k + v, 1)));
    }
    edges
}

/// Disjoint union plus one apex adjacent to everything, unit weights and
/// budget `t(k + 1)`: a tour within budget exists iff every graph has a
/// Hamiltonian path. The apex is recorded as the modulator hint.
pub fn compose_fn(graphs: &[HpGraph]) -> Result<Instance, GadgetError> {
    let k = common_size(graphs)?;
    let t = graphs.len();
    let apex = t * k;
    let mut edges = disjoint_union(graphs, k);
    edges.extend((0..apex).map(|v| (v, apex, 1)));
    let mut inst = Instance::tsp(apex + 1, &edges, (t * (k + 1)) as i64).expect("valid by construction");
    inst.modulator_hint = Some(vec![apex]);
    Ok(inst)
}

/// Disjoint union plus connectors: connector `i` is adjacent to graph `i`
/// and the next graph in cyclic order. Unit weights, budget `t(k + 1)`.
pub fn compose_degtw(graphs: &[HpGraph]) -> Result<Instance, GadgetError> {
    let k = common_size(graphs)?;
    let t = graphs.len();
    let mut edges = disjoint_union(graphs, k);
    for i in 0..t {
        let conn = t * k + i;
        let mut near: BTreeSet<usize> = (i * k..(i + 1) * k).collect();
        let next = (i + 1) % t;
        near.extend(next * k..(next + 1) * k);
        edges.extend(near.into_iter().map(|v| (v, conn, 1)));
    }
    Ok(Instance::tsp(t * (k + 1), &edges, (t * (k + 1)) as i64).expect("valid by construction"))
}

/// Unweighted instance under construction; every edge has weight 1.
#[derive(Clone, Debug, Default)]
pub struct GadgetBuilder {
    pub n: usize,
    pub edges: Vec<(usize, usize)>,
    pub waypoints: Vec<usize>,
}

/// Vertices `[x0, x1, x*]` of a cherry: two ports and the waypoint apex.
pub type Cherry = [usize; 3];

impl GadgetBuilder {
    fn vertex(&mut self, waypoint: bool) -> usize {
        self.n += 1;
        if waypoint {
            self.waypoints.push(self.n - 1);
        }
        self.n - 1
    }

    /// Adds `len` cherries joined in a cycle: each apex is adjacent to both
    /// ports of the next cherry.
    pub fn add_selection(&mut self, len: usize) -> Result<Vec<Cherry>, GadgetError> {
        if len < 3 {
            return Err(GadgetError::TooShort(len));
        }
        let cherries: Vec<Cherry> = (0..len)
            .map(|_| [self.vertex(false), self.vertex(false), self.vertex(true)])
            .collect();
        for (i, c) in cherries.iter().enumerate() {
            let next = &cherries[(i + 1) % len];
            self.edges.extend([(c[0], c[2]), (c[1], c[2]), (c[2], next[0]), (c[2], next[1])]);
        }
        Ok(cherries)
    }

    /// Adds a cycle of `3 len` waypoints and returns its triplets.
    pub fn add_cycle(&mut self, len: usize) -> Result<Vec<[usize; 3]>, GadgetError> {
        if len == 0 {
            return Err(GadgetError::Parameters("cycle gadget needs length at least 1".into()));
        }
        let first = self.n;
        let size = 3 * len;
        for _ in 0..size {
            self.vertex(true);
        }
        for i in 0..size {
            self.edges.push((first + i, first + (i + 1) % size));
        }
        Ok((0..len).map(|i| [first + 3 * i, first + 3 * i + 1, first + 3 * i + 2]).collect())
    }

    /// Joins `v` to the first two vertices of a triplet.
    pub fn connect_triplet(&mut self, triplet: [usize; 3], v: usize) {
        self.edges.push((v, triplet[0]));
        self.edges.push((v, triplet[1]));
    }

    pub fn build(&self, budget: i64) -> Instance {
        let edges: Vec<_> = self.edges.iter().map(|&(u, v)| (u, v, 1)).collect();
        Instance::subtsp(self.n, &edges, &self.waypoints, budget).expect("valid by construction")
    }
}

/// Selection gadget of `len` cherries as a Subset TSP instance with budget
/// `2 len`. Cherry `i` is vertices `3i` (port 0), `3i + 1` (port 1) and
/// `3i + 2` (waypoint).
pub fn selection_gadget(len: usize) -> Result<Instance, GadgetError> {
    let mut b = GadgetBuilder::default();
    b.add_selection(len)?;
    Ok(b.build(2 * len as i64))
}

/// Cycle gadget of `len` triplets on its own, budget `3 len`.
pub fn cycle_gadget(len: usize) -> Result<Instance, GadgetError> {
    let mut b = GadgetBuilder::default();
    b.add_cycle(len)?;
    Ok(b.build(3 * len as i64))
}

/// Multicolored clique instance: `k` color classes of exactly `size`
/// vertices each (a power of two), vertex `(i, a)` being vertex `a` of
/// class `i`, both 0-based.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MccInstance {
    pub k: usize,
    pub size: usize,
    pub edges: BTreeSet<((usize, usize), (usize, usize))>,
}

impl MccInstance {
    /// Pads classes of at most `n` vertices with isolated vertices up to
    /// the next power of two. Edges inside a class are rejected.
    pub fn padded(k: usize, n: usize, edges: &[((usize, usize), (usize, usize))]) -> Result<Self, GadgetError> {
        if k == 0 || n == 0 {
            return Err(GadgetError::Parameters("need at least one class and one vertex".into()));
        }
        let size = n.next_power_of_two();
        let mut set = BTreeSet::new();
        for &(x, y) in edges {
            if x.0 >= k || y.0 >= k || x.1 >= n || y.1 >= n {
                return Err(GadgetError::Parameters(format!("edge {x:?}-{y:?} out of range")));
            }
            if x.0 == y.0 {
                return Err(GadgetError::Parameters(format!("edge {x:?}-{y:?} inside a class")));
            }
            set.insert(if x < y { (x, y) } else { (y, x) });
        }
        Ok(MccInstance { k, size, edges: set })
    }

    pub fn bits(&self) -> usize {
        self.size.trailing_zeros() as usize
    }

    fn adjacent(&self, x: (usize, usize), y: (usize, usize)) -> bool {
        self.edges.contains(&if x < y { (x, y) } else { (y, x) })
    }

    /// Pairs of vertices in different classes that are not adjacent.
    pub fn non_edges(&self) -> Vec<((usize, usize), (usize, usize))> {
        let mut out = Vec::new();
        for i in 0..self.k {
            for j in i + 1..self.k {
                for a in 0..self.size {
                    for b in 0..self.size {
                        if !self.adjacent((i, a), (j, b)) {
                            out.push(((i, a), (j, b)));
                        }
                    }
                }
            }
        }
        out
    }

    /// Exhaustive search for one vertex per class, pairwise adjacent.
    pub fn has_multicolored_clique(&self) -> bool {
        fn pick(inst: &MccInstance, chosen: &mut Vec<usize>) -> bool {
            let i = chosen.len();
            if i == inst.k {
                return true;
            }
            for a in 0..inst.size {
                if chosen.iter().enumerate().all(|(j, &b)| inst.adjacent((j, b), (i, a))) {
                    chosen.push(a);
                    if pick(inst, chosen) {
                        return true;
                    }
                    chosen.pop();
                }
            }
            false
        }
        pick(self, &mut Vec::new())
    }
}

/// Bit `j` (1-based, least significant first) of `y`.
pub fn bit(y: usize, j: usize) -> usize {
    (y >> (j - 1)) & 1
}

/// Subset TSP instance that is a yes-instance iff `mcc` has a multicolored
/// clique. A selection gadget with `log N` cherries per class encodes one
/// vertex per class; every non-edge gets a cycle gadget whose triplets
/// hang from the ports opposite to the bits of its two endpoints.
pub fn mcc_to_subtsp(mcc: &MccInstance) -> Result<Instance, GadgetError> {
    let bits = mcc.bits();
    if mcc.k * bits < 3 {
        return Err(GadgetError::Parameters(format!(
            "k log N = {} must be at least 3",
            mcc.k * bits
        )));
    }
    let mut b = GadgetBuilder::default();
    let cherries = b.add_selection(mcc.k * bits)?;
    let port = |i: usize, j: usize, side: usize| cherries[i * bits + j - 1][side];
    let non_edges = mcc.non_edges();
    for &((i, a), (i2, a2)) in &non_edges {
        let triplets = b.add_cycle(2 * bits)?;
        for j in 1..=bits {
            b.connect_triplet(triplets[j - 1], port(i, j, 1 - bit(a, j)));
            b.connect_triplet(triplets[bits + j - 1], port(i2, j, 1 - bit(a2, j)));
        }
    }
    let budget = 2 * mcc.k * bits + (6 * bits + 1) * non_edges.len();
    Ok(b.build(budget as i64))
}

/// Structure planted by [`gen_planted`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Planted {
    /// Feedback edge set number exactly `k`.
    FeedbackEdges,
    /// Vertex cover of size at most `k`.
    VertexCover,
    /// Modulator of size `k` to components of at most `r` vertices.
    Components,
    /// Modulator of size `k` to paths of at most `r` vertices.
    Paths,
}

/// Random connected instance on `n` vertices with the requested structure;
/// modulators are recorded as the hint. The budget is the optimum when an
/// exact engine handles the instance within default caps, else twice the
/// weight of a minimum spanning tree.
pub fn gen_planted(
    kind: Kind,
    planted: Planted,
    k: usize,
    r: usize,
    n: usize,
    weights: (u64, u64),
    seed: u64,
) -> Result<Instance, GadgetError> {
    let bad = |why: &str| Err(GadgetError::Parameters(why.to_string()));
    if weights.0 > weights.1 {
        return bad("empty weight range");
    }
    if n < 2 {
        return bad("need at least two vertices");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    let mut hint = None;
    match planted {
        Planted::FeedbackEdges => {
            if k > n * (n - 1) / 2 - (n - 1) {
                return bad("too many extra edges for a simple graph");
            }
            for v in 1..n {
                pairs.push((rng.gen_range(0..v), v));
            }
            let mut present: BTreeSet<(usize, usize)> = pairs.iter().copied().collect();
            while present.len() < n - 1 + k {
                let u = rng.gen_range(0..n);
                let v = rng.gen_range(0..n);
                if u != v && present.insert((u.min(v), u.max(v))) {
                    pairs.push((u.min(v), u.max(v)));
                }
            }
        }
        _ => {
            let r = if planted == Planted::VertexCover { 1 } else { r };
            if k == 0 || r == 0 || k >= n {
                return bad("need 1 <= k < n and r >= 1");
            }
            // Modulator path keeps the graph connected.
            for v in 1..k {
                pairs.push((v - 1, v));
            }
            let mut v = k;
            while v < n {
                let size = rng.gen_range(1..=r).min(n - v);
                let comp: Vec<usize> = (v..v + size).collect();
                v += size;
                for i in 1..size {
                    let parent = if planted == Planted::Components { rng.gen_range(0..i) } else { i - 1 };
                    pairs.push((comp[parent], comp[i]));
                }
                if planted == Planted::Components {
                    for i in 0..size {
                        for j in i + 2..size {
                            if rng.gen_bool(0.3) && !pairs.contains(&(comp[i], comp[j])) {
                                pairs.push((comp[i], comp[j]));
                            }
                        }
                    }
                }
                let mut any = false;
                for &c in &comp {
                    for mv in 0..k {
                        if rng.gen_bool(0.4) {
                            pairs.push((mv, c));
                            any = true;
                        }
                    }
                }
                if !any {
                    let c = *comp.choose(&mut rng).unwrap();
                    pairs.push((rng.gen_range(0..k), c));
                }
            }
            for a in 0..k {
                for b in a + 2..k {
                    if rng.gen_bool(0.3) {
                        pairs.push((a, b));
                    }
                }
            }
            hint = Some((0..k).collect::<Vec<_>>());
        }
    }
    let edges: Vec<Edge> = pairs
        .iter()
        .map(|&(u, v)| {
            let w = rng.gen_range(weights.0..=weights.1);
            match kind {
                Kind::Wrp => {
                    let cap = if rng.gen_bool(0.3) { Capacity::One } else { Capacity::Two };
                    Edge::with_capacity(u, v, w, cap)
                }
                _ => Edge::new(u, v, w),
            }
        })
        .collect();
    let mut wps: Vec<usize> = (0..n).filter(|_| rng.gen_bool(0.5)).collect();
    if wps.len() < 2 {
        wps = vec![0, n - 1];
    }
    let mut inst = Instance::new(kind, n, edges, &wps, 0).map_err(|e| GadgetError::Parameters(e.to_string()))?;
    inst.modulator_hint = hint;
    inst.budget = planted_budget(&inst);
    Ok(inst)
}

fn planted_budget(inst: &Instance) -> i64 {
    let caps = OracleCaps::default();
    let exact = (inst.kind != Kind::Wrp && inst.waypoint_count() <= caps.max_waypoints) || inst.m() <= caps.max_edges;
    if exact {
        if let Ok(res) = solve(inst, &caps, Engine::Auto) {
            if let Some(opt) = res.opt_weight {
                return opt as i64;
            }
        }
    }
    let mut order: Vec<usize> = (0..inst.m()).collect();
    order.sort_by_key(|&i| (inst.edges[i].weight, i));
    let mut dsu = Dsu::new(inst.n);
    let mut total: u64 = 0;
    for i in order {
        let e = &inst.edges[i];
        if dsu.union(e.u, e.v) {
            total = total.saturating_add(2 * e.weight);
        }
    }
    total.min(i64::MAX as u64) as i64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{decompose, fes_number, is_vertex_cover, Target};
    use crate::oracle::verdict;

    fn path(n: usize) -> HpGraph {
        HpGraph {
            n,
            edges: (1..n).map(|v| (v - 1, v)).collect(),
        }
    }

    #[test]
    fn triplet_third_vertices_keep_degree_two() {
        let mcc = MccInstance::padded(3, 2, &[((0, 0), (1, 1))]).unwrap();
        let inst = mcc_to_subtsp(&mcc).unwrap();
        let deg = inst.degrees();
        let selection = 3 * mcc.k * mcc.bits();
        let triplets = (inst.n - selection) / 3;
        assert_eq!(triplets, 2 * mcc.bits() * mcc.non_edges().len());
        for t in 0..triplets {
            let base = selection + 3 * t;
            assert_eq!(deg[base + 2], 2);
            assert_eq!((deg[base], deg[base + 1]), (3, 3));
        }
    }

    #[test]
    fn hamiltonian_paths() {
        assert!(path(4).has_hamiltonian_path());
        let star = HpGraph {
            n: 4,
            edges: vec![(0, 1), (0, 2), (0, 3)],
        };
        assert!(!star.has_hamiltonian_path());
        assert_eq!(HpGraph::all(4).len(), 64);
    }

    #[test]
    fn apex_composition() {
        let inst = compose_fn(&[path(4), path(4)]).unwrap();
        assert_eq!((inst.n, inst.budget), (9, 10));
        assert!(decompose(&inst, &[8], Target::Components(4)).is_ok());
        let caps = OracleCaps::default();
        assert!(verdict(&inst, &caps).unwrap());
        let tri = HpGraph {
            n: 3,
            edges: vec![(0, 1), (1, 2), (0, 2)],
        };
        assert!(verdict(&compose_fn(&[tri]).unwrap(), &caps).unwrap());
        let star = HpGraph {
            n: 4,
            edges: vec![(0, 1), (0, 2), (0, 3)],
        };
        assert!(!verdict(&compose_fn(&[path(4), star]).unwrap(), &caps).unwrap());
        assert!(matches!(
            compose_fn(&[path(4), path(3)]),
            Err(GadgetError::MismatchedSizes { .. })
        ));
    }

    #[test]
    fn connector_composition() {
        let inst = compose_degtw(&[path(3), path(3)]).unwrap();
        assert_eq!(inst.n, 8);
        let deg = inst.degrees();
        assert_eq!(deg[6], 6);
        assert_eq!(*deg.iter().max().unwrap(), 6);
        let caps = OracleCaps::default();
        assert!(verdict(&inst, &caps).unwrap());
        let empty = HpGraph { n: 3, edges: vec![] };
        assert!(!verdict(&compose_degtw(&[path(3), empty]).unwrap(), &caps).unwrap());
    }

    #[test]
    fn selection_gadget_shape() {
        let g = selection_gadget(3).unwrap();
        assert_eq!((g.n, g.m(), g.waypoint_count()), (9, 12, 3));
        assert!(matches!(selection_gadget(2), Err(GadgetError::TooShort(2))));
        let caps = OracleCaps::default();
        for len in [3, 4] {
            let g = selection_gadget(len).unwrap();
            let res = solve(&g, &caps, Engine::Auto).unwrap();
            assert_eq!(res.opt_weight, Some(2 * len as u64));
            let w = res.witness.unwrap();
            for i in 0..len {
                let used = |v: usize| g.edges.iter().zip(&w.multiplicity).any(|(e, &x)| x > 0 && e.touches(v));
                assert!(used(3 * i) != used(3 * i + 1));
            }
        }
    }

    #[test]
    fn cycle_gadget_shape() {
        let t = cycle_gadget(1).unwrap();
        assert_eq!((t.n, t.m(), t.waypoint_count()), (3, 3, 3));
        let h = cycle_gadget(2).unwrap();
        assert_eq!((h.n, h.m()), (6, 6));
        assert!(h.degrees().iter().all(|&d| d == 2));

        // Attached to a selection gadget it costs at least 3 * 2 + 1 more.
        let mut b = GadgetBuilder::default();
        let cherries = b.add_selection(3).unwrap();
        let triplets = b.add_cycle(2).unwrap();
        b.connect_triplet(triplets[0], cherries[0][0]);
        b.connect_triplet(triplets[1], cherries[1][1]);
        let inst = b.build(0);
        assert!(inst.degrees()[triplets[0][2]] == 2);
        let opt = solve(&inst, &OracleCaps::default(), Engine::Auto).unwrap().opt_weight.unwrap();
        assert_eq!(opt, 6 + 3 * 2 + 1);
    }

    #[test]
    fn clique_reduction_small_cases() {
        let caps = OracleCaps::default();
        let full: Vec<_> = (0..3)
            .flat_map(|i| (i + 1..3).map(move |j| (i, j)))
            .flat_map(|(i, j)| (0..2).flat_map(move |a| (0..2).map(move |b| ((i, a), (j, b)))))
            .collect();
        let mcc = MccInstance::padded(3, 2, &full).unwrap();
        let inst = mcc_to_subtsp(&mcc).unwrap();
        assert_eq!((inst.budget, inst.n), (6, 9));
        assert!(verdict(&inst, &caps).unwrap());

        // Only class-0 vertex 0 is adjacent to anything in class 1, and it
        // misses both vertices of class 2.
        let edges = [((0, 0), (1, 0)), ((0, 0), (1, 1)), ((1, 0), (2, 0)), ((1, 1), (2, 1)), ((0, 1), (2, 0))];
        let mcc = MccInstance::padded(3, 2, &edges).unwrap();
        assert!(!mcc.has_multicolored_clique());
        assert!(!verdict(&mcc_to_subtsp(&mcc).unwrap(), &caps).unwrap());
        assert!(mcc_to_subtsp(&MccInstance::padded(2, 2, &[]).unwrap()).is_err());
        assert_eq!(bit(6, 1), 0);
        assert_eq!(bit(6, 2), 1);
    }

    #[test]
    fn planted_structures() {
        let inst = gen_planted(Kind::Tsp, Planted::VertexCover, 2, 1, 10, (1, 9), 7).unwrap();
        let hint = inst.modulator_hint.clone().unwrap();
        assert!(hint.len() <= 2 && is_vertex_cover(&inst, &hint));
        let inst = gen_planted(Kind::SubTsp, Planted::Paths, 2, 3, 12, (1, 9), 7).unwrap();
        assert!(decompose(&inst, inst.modulator_hint.as_ref().unwrap(), Target::Paths(3)).is_ok());
        let inst = gen_planted(Kind::Tsp, Planted::Components, 2, 3, 12, (1, 9), 7).unwrap();
        assert!(decompose(&inst, inst.modulator_hint.as_ref().unwrap(), Target::Components(3)).is_ok());
        for k in 0..5 {
            let inst = gen_planted(Kind::Wrp, Planted::FeedbackEdges, k, 1, 40, (1, 100), k as u64).unwrap();
            assert_eq!(fes_number(&inst), k);
            assert_eq!(inst.components().len(), 1);
        }
        let a = gen_planted(Kind::Wrp, Planted::FeedbackEdges, 3, 1, 12, (1, 9), 5).unwrap();
        let b = gen_planted(Kind::Wrp, Planted::FeedbackEdges, 3, 1, 12, (1, 9), 5).unwrap();
        assert_eq!(a.render(), b.render());
        assert!(gen_planted(Kind::Tsp, Planted::Paths, 0, 3, 12, (1, 9), 7).is_err());
    }
}
