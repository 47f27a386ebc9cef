//! Fill-reducing orderings for sparse symmetric factorization.
//!
//! Graph nested dissection with breadth-first level-structure separators.
//! Level sets of a BFS rooted at a pseudo-peripheral node are separators, so
//! on planar meshes the middle level gives an `O(sqrt(n))` cut without any
//! geometric input.

use super::sparse::CsrMatrix;

const LEAF_SIZE: usize = 48;

/// Returns `perm` with `perm[new] = old`.
pub fn nested_dissection(a: &CsrMatrix) -> Vec<usize> {
    let n = a.nrows();
    let graph = Graph::from_pattern(a);
    let mut perm = vec![usize::MAX; n];
    let mut scratch = Scratch::new(n);
    let mut stack: Vec<(Vec<usize>, usize)> = vec![((0..n).collect(), 0)];

    while let Some((nodes, lo)) = stack.pop() {
        if nodes.is_empty() {
            continue;
        }
        scratch.stamp += 1;
        let stamp = scratch.stamp;
        for &v in &nodes {
            scratch.member[v] = stamp;
        }
        let root = pseudo_peripheral(&graph, &mut scratch, nodes[0]);
        let levels = scratch.level_structure(&graph, root, stamp);
        let reached: usize = levels.iter().map(Vec::len).sum();
        if reached < nodes.len() {
            // Disconnected: peel off the component we just found.
            let comp: Vec<usize> = levels.concat();
            scratch.stamp += 1;
            let s2 = scratch.stamp;
            for &v in &comp {
                scratch.member[v] = s2;
            }
            let rest: Vec<usize> = nodes.iter().copied().filter(|&v| scratch.member[v] != s2).collect();
            let clen = comp.len();
            stack.push((comp, lo));
            stack.push((rest, lo + clen));
            continue;
        }
        if nodes.len() <= LEAF_SIZE || levels.len() <= 2 {
            // Reverse BFS order keeps the leaf profile small.
            for (k, v) in levels.concat().into_iter().rev().enumerate() {
                perm[lo + k] = v;
            }
            continue;
        }

        let half = nodes.len() / 2;
        let mut acc = 0;
        let mut mid = 0;
        for (l, lev) in levels.iter().enumerate() {
            acc += lev.len();
            if acc >= half {
                mid = l;
                break;
            }
        }
        mid = mid.clamp(1, levels.len() - 2);

        // Nodes of the middle level without a neighbour further out can join
        // the inner part.
        scratch.stamp += 1;
        let outer_stamp = scratch.stamp;
        for &v in &levels[mid + 1] {
            scratch.member[v] = outer_stamp;
        }
        let mut inner: Vec<usize> = levels[..mid].concat();
        let mut sep = Vec::new();
        for &v in &levels[mid] {
            if graph.neighbours(v).iter().any(|&w| scratch.member[w] == outer_stamp) {
                sep.push(v);
            } else {
                inner.push(v);
            }
        }
        let outer: Vec<usize> = levels[mid + 1..].concat();

        let sep_lo = lo + inner.len() + outer.len();
        for (k, &v) in sep.iter().enumerate() {
            perm[sep_lo + k] = v;
        }
        let outer_lo = lo + inner.len();
        stack.push((inner, lo));
        stack.push((outer, outer_lo));
    }
    debug_assert!(perm.iter().all(|&p| p != usize::MAX));
    perm
}

struct Graph {
    ptr: Vec<usize>,
    adj: Vec<usize>,
}

impl Graph {
    fn from_pattern(a: &CsrMatrix) -> Self {
        let n = a.nrows();
        let mut ptr = vec![0usize; n + 1];
        let mut adj = Vec::with_capacity(a.nnz());
        for i in 0..n {
            let (cols, _) = a.row(i);
            adj.extend(cols.iter().copied().filter(|&j| j != i));
            ptr[i + 1] = adj.len();
        }
        Self { ptr, adj }
    }

    #[inline]
    fn neighbours(&self, v: usize) -> &[usize] {
        &self.adj[self.ptr[v]..self.ptr[v + 1]]
    }
}

struct Scratch {
    member: Vec<u64>,
    seen: Vec<u64>,
    stamp: u64,
    seen_stamp: u64,
}

impl Scratch {
    fn new(n: usize) -> Self {
        Self { member: vec![0; n], seen: vec![0; n], stamp: 0, seen_stamp: 0 }
    }

    /// BFS levels from `root`, restricted to nodes carrying `stamp`.
    fn level_structure(&mut self, g: &Graph, root: usize, stamp: u64) -> Vec<Vec<usize>> {
        self.seen_stamp += 1;
        let seen = self.seen_stamp;
        self.seen[root] = seen;
        let mut levels = vec![vec![root]];
        loop {
            let mut next = Vec::new();
            for &v in levels.last().unwrap() {
                for &w in g.neighbours(v) {
                    if self.member[w] == stamp && self.seen[w] != seen {
                        self.seen[w] = seen;
                        next.push(w);
                    }
                }
            }
            if next.is_empty() {
                break;
            }
            levels.push(next);
        }
        levels
    }
}

fn pseudo_peripheral(g: &Graph, s: &mut Scratch, start: usize) -> usize {
    let stamp = s.stamp;
    let mut root = start;
    let mut ecc = 0;
    for _ in 0..6 {
        let levels = s.level_structure(g, root, stamp);
        if levels.len() <= ecc {
            break;
        }
        ecc = levels.len();
        let last = levels.last().unwrap();
        let cand = *last.iter().min_by_key(|&&v| g.neighbours(v).len()).unwrap();
        if cand == root {
            break;
        }
        root = cand;
    }
    root
}
