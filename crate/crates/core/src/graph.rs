//! Plain adjacency-list graphs, union-find and breadth-first search.
//!
//! Tori convert into [`Graph`]; boxes and tori with removed edges are built
//! directly so the enumeration oracle can run on all of them.

use std::collections::VecDeque;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    adj: Vec<Vec<usize>>,
    parity: Vec<u8>,
}

impl Graph {
    /// Builds a graph from an edge list. Parity is the BFS 2-coloring from
    /// vertex 0 of each component; callers that need a fixed labeling use
    /// [`Graph::with_parity`].
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Self {
        let mut adj = vec![Vec::new(); n];
        for &(a, b) in edges {
            if !adj[a].contains(&b) {
                adj[a].push(b);
                adj[b].push(a);
            }
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        let mut parity = vec![u8::MAX; n];
        for s in 0..n {
            if parity[s] != u8::MAX {
                continue;
            }
            parity[s] = 0;
            let mut queue = VecDeque::from([s]);
            while let Some(u) = queue.pop_front() {
                for &w in &adj[u] {
                    if parity[w] == u8::MAX {
                        parity[w] = parity[u] ^ 1;
                        queue.push_back(w);
                    }
                }
            }
        }
        Graph { adj, parity }
    }

    pub fn with_parity(mut self, parity: Vec<u8>) -> Self {
        assert_eq!(parity.len(), self.adj.len());
        self.parity = parity;
        self
    }

    pub fn vertex_count(&self) -> usize {
        self.adj.len()
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn parity(&self, v: usize) -> u8 {
        self.parity[v]
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (u, list) in self.adj.iter().enumerate() {
            for &w in list {
                if u < w {
                    out.push((u, w));
                }
            }
        }
        out
    }

    /// Whether every edge joins the two parity classes.
    pub fn is_bipartite(&self) -> bool {
        self.edges().iter().all(|&(a, b)| self.parity[a] != self.parity[b])
    }

    /// Hop distances from `src`; `u32::MAX` marks unreachable vertices.
    pub fn bfs(&self, src: &[usize]) -> Vec<u32> {
        let mut dist = vec![u32::MAX; self.adj.len()];
        let mut queue = VecDeque::new();
        for &s in src {
            if dist[s] != 0 {
                dist[s] = 0;
                queue.push_back(s);
            }
        }
        while let Some(u) = queue.pop_front() {
            for &w in &self.adj[u] {
                if dist[w] == u32::MAX {
                    dist[w] = dist[u] + 1;
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    /// Order in which a multi-source BFS from `src` first reaches each vertex.
    /// Unreachable vertices follow in index order.
    pub fn bfs_order(&self, src: &[usize]) -> Vec<usize> {
        let mut seen = vec![false; self.adj.len()];
        let mut order = Vec::with_capacity(self.adj.len());
        let mut queue = VecDeque::new();
        for &s in src {
            if !seen[s] {
                seen[s] = true;
                queue.push_back(s);
            }
        }
        while let Some(u) = queue.pop_front() {
            order.push(u);
            for &w in &self.adj[u] {
                if !seen[w] {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
        for (v, s) in seen.iter().enumerate() {
            if !s {
                order.push(v);
            }
        }
        order
    }

    /// All-pairs distances, row-major.
    pub fn distance_matrix(&self) -> Vec<u32> {
        let n = self.adj.len();
        let mut out = Vec::with_capacity(n * n);
        for v in 0..n {
            out.extend(self.bfs(&[v]));
        }
        out
    }

    /// Component labels of the subgraph induced by `keep`; removed vertices get
    /// `usize::MAX`. Labels are the smallest member index of each component.
    pub fn components_within(&self, keep: &[bool]) -> Vec<usize> {
        let n = self.adj.len();
        let mut uf = UnionFind::new(n);
        for u in 0..n {
            if !keep[u] {
                continue;
            }
            for &w in &self.adj[u] {
                if keep[w] {
                    uf.union(u, w);
                }
            }
        }
        let mut label = vec![usize::MAX; n];
        let mut root_min = vec![usize::MAX; n];
        for v in 0..n {
            if keep[v] {
                let r = uf.find(v);
                if root_min[r] == usize::MAX {
                    root_min[r] = v;
                }
                label[v] = root_min[r];
            }
        }
        label
    }
}

#[derive(Debug, Clone)]
pub struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect(), size: vec![1; n] }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra;
        self.size[ra] += self.size[rb];
        true
    }
}

/// Non-periodic box P_{n_1} x ... x P_{n_d}, row-major indexing, parity by
/// coordinate sum.
pub fn grid_box(dims: &[usize]) -> Graph {
    let n: usize = dims.iter().product();
    let mut edges = Vec::new();
    let mut parity = vec![0u8; n];
    let mut coords = vec![0usize; dims.len()];
    for v in 0..n {
        let mut rem = v;
        for i in (0..dims.len()).rev() {
            coords[i] = rem % dims[i];
            rem /= dims[i];
        }
        parity[v] = (coords.iter().sum::<usize>() % 2) as u8;
        let mut stride = 1;
        for i in (0..dims.len()).rev() {
            if coords[i] + 1 < dims[i] {
                edges.push((v, v + stride));
            }
            stride *= dims[i];
        }
    }
    Graph::from_edges(n, &edges).with_parity(parity)
}
