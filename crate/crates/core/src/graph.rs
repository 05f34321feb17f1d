//! Small graph helpers shared by the rules and the oracles.

/// Disjoint-set forest with path halving and union by size.
#[derive(Clone, Debug)]
pub struct Dsu {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl Dsu {
    pub fn new(n: usize) -> Self {
        Dsu {
            parent: (0..n).collect(),
            size: vec![1; n],
        }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Returns false when `a` and `b` were already joined.
    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut a, mut b) = (self.find(a), self.find(b));
        if a == b {
            return false;
        }
        if self.size[a] < self.size[b] {
            std::mem::swap(&mut a, &mut b);
        }
        self.parent[b] = a;
        self.size[a] += self.size[b];
        true
    }

    #[cfg(test)]
    pub fn same(&mut self, a: usize, b: usize) -> bool {
        self.find(a) == self.find(b)
    }
}

/// Connected components of the vertices selected by `keep`, using the given
/// edge list. Components are sorted internally and ordered by least vertex.
pub fn components_of(n: usize, edges: &[(usize, usize)], keep: &[bool]) -> Vec<Vec<usize>> {
    let mut dsu = Dsu::new(n);
    for &(u, v) in edges {
        if keep[u] && keep[v] {
            dsu.union(u, v);
        }
    }
    let mut slot = vec![usize::MAX; n];
    let mut out: Vec<Vec<usize>> = Vec::new();
    for v in 0..n {
        if !keep[v] {
            continue;
        }
        let root = dsu.find(v);
        if slot[root] == usize::MAX {
            slot[root] = out.len();
            out.push(Vec::new());
        }
        out[slot[root]].push(v);
    }
    out
}

/// Checks that all vertices with positive degree lie in one component.
pub fn support_connected(n: usize, edges: &[(usize, usize)], degree: &[u64]) -> bool {
    let mut dsu = Dsu::new(n);
    for &(u, v) in edges {
        dsu.union(u, v);
    }
    let mut root = None;
    for v in 0..n {
        if degree[v] == 0 {
            continue;
        }
        let r = dsu.find(v);
        match root {
            None => root = Some(r),
            Some(x) if x != r => return false,
            _ => {}
        }
    }
    true
}

/// Number of binary digits of `x`; zero takes one digit.
pub fn bit_length(x: u64) -> u32 {
    (64 - x.leading_zeros()).max(1)
}
