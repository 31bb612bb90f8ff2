//! Level sets and odd minimal edge cutsets.
//!
//! A cutset is a sorted list of sorted vertex pairs plus the sources X and
//! targets B it separates. Components of G - Γ, plaquette counts P_Γ and
//! cut-direction flags are computed once at construction; cutsets are
//! immutable afterwards.
//!
//! "Odd" is relative to an anchor bit: a vertex is odd when
//! `parity(v) ^ anchor == 1`. Level sets inherit the anchor of their boundary
//! condition, so the side of x always carries odd heights.

use std::collections::{BTreeMap, BTreeSet};
use std::ops::ControlFlow;

use rand_chacha::rand_core::RngCore;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::UnionFind;
use crate::height::{full_projection_axis, BoundaryCondition, HeightFunction};
use crate::oracle::{Budget, SearchStats};
use crate::sampler::{to_unit, RandomSource};
use crate::torus::{AuxKind, TorusSpec, Vertex};

#[derive(Debug, Clone)]
pub struct OddCutset {
    torus: TorusSpec,
    edges: Vec<(Vertex, Vertex)>,
    sources: Vec<Vertex>,
    targets: Vec<Vertex>,
    anchor: u8,
    cut: Vec<bool>,
    comp: Vec<usize>,
    plaquette: Vec<usize>,
}

impl PartialEq for OddCutset {
    fn eq(&self, other: &Self) -> bool {
        self.torus == other.torus && self.edges == other.edges
    }
}

impl Eq for OddCutset {}

/// Regularity data of a cutset, measured on the source side E_1.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RegularityProfile {
    pub edge_count: usize,
    /// Σ over E_1 of min(P_Γ(v), Δ - P_Γ(v)).
    pub r_total: usize,
    /// P_Γ value -> number of E_1 vertices with that value.
    pub p_histogram: BTreeMap<usize, usize>,
    /// |E_{1,e}|.
    pub exposed: usize,
    /// |{w ∈ E_1 : {w, w+f_j} ∈ Γ}| for each direction j.
    pub direction_counts: Vec<usize>,
    pub trivial: bool,
}

/// N_Γ(v): bit i is set iff v + f_i lies on the source side.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct NGammaVector {
    pub vertex: Vertex,
    pub bits: u64,
}

impl NGammaVector {
    pub fn bit(&self, i: usize) -> u8 {
        ((self.bits >> i) & 1) as u8
    }
}

impl OddCutset {
    /// Builds a cutset from an edge list. Every pair must be a torus edge;
    /// minimality and oddness are checked separately.
    pub fn new(
        torus: &TorusSpec,
        edges: &[(Vertex, Vertex)],
        sources: &[Vertex],
        targets: &[Vertex],
        anchor: u8,
    ) -> Result<Self> {
        let n = torus.vertex_count();
        let deg = torus.degree();
        for &v in sources.iter().chain(targets) {
            torus.check_vertex(v)?;
        }
        let mut sorted: Vec<(Vertex, Vertex)> = edges.iter().map(|&(a, b)| (a.min(b), a.max(b))).collect();
        sorted.sort_unstable();
        sorted.dedup();
        let mut cut = vec![false; n * deg];
        for &(a, b) in &sorted {
            torus.check_vertex(a)?;
            torus.check_vertex(b)?;
            let i = torus
                .direction_between(a, b)
                .ok_or_else(|| Error::Precondition(format!("{a} and {b} are not adjacent")))?;
            let j = torus.direction_between(b, a).expect("adjacency is symmetric");
            cut[a * deg + i] = true;
            cut[b * deg + j] = true;
        }
        let mut uf = UnionFind::new(n);
        for v in 0..n {
            for (i, &w) in torus.neighbors(v).iter().enumerate() {
                if !cut[v * deg + i] {
                    uf.union(v, w);
                }
            }
        }
        let mut root_min = vec![usize::MAX; n];
        let mut comp = vec![0; n];
        for v in 0..n {
            let r = uf.find(v);
            if root_min[r] == usize::MAX {
                root_min[r] = v;
            }
            comp[v] = root_min[r];
        }
        let plaquette = (0..n).map(|v| cut[v * deg..(v + 1) * deg].iter().filter(|&&c| c).count()).collect();
        let mut sources = sources.to_vec();
        sources.sort_unstable();
        sources.dedup();
        let mut targets = targets.to_vec();
        targets.sort_unstable();
        targets.dedup();
        Ok(OddCutset { torus: torus.clone(), edges: sorted, sources, targets, anchor, cut, comp, plaquette })
    }

    pub fn torus(&self) -> &TorusSpec {
        &self.torus
    }

    /// Sorted list of sorted pairs; doubles as the canonical key.
    pub fn edges(&self) -> &[(Vertex, Vertex)] {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn sources(&self) -> &[Vertex] {
        &self.sources
    }

    pub fn targets(&self) -> &[Vertex] {
        &self.targets
    }

    pub fn anchor(&self) -> u8 {
        self.anchor
    }

    pub fn is_odd_vertex(&self, v: Vertex) -> bool {
        self.torus.parity(v) ^ self.anchor == 1
    }

    /// Whether {v, v+f_i} ∈ Γ.
    pub fn is_cut(&self, v: Vertex, dir: usize) -> bool {
        self.cut[v * self.torus.degree() + dir]
    }

    pub fn contains_edge(&self, a: Vertex, b: Vertex) -> bool {
        self.edges.binary_search(&(a.min(b), a.max(b))).is_ok()
    }

    /// P_Γ(v).
    pub fn plaquette(&self, v: Vertex) -> usize {
        self.plaquette[v]
    }

    /// Label of comp(Γ, v): its smallest vertex.
    pub fn comp_of(&self, v: Vertex) -> usize {
        self.comp[v]
    }

    pub fn component(&self, v: Vertex) -> Vec<Vertex> {
        let label = self.comp[v];
        (0..self.comp.len()).filter(|&w| self.comp[w] == label).collect()
    }

    /// E_i(Γ, v): vertices of comp(Γ, v) touching Γ.
    pub fn inner_boundary(&self, v: Vertex) -> Vec<Vertex> {
        let label = self.comp[v];
        (0..self.comp.len()).filter(|&w| self.comp[w] == label && self.plaquette[w] > 0).collect()
    }

    fn side_mask(&self, seeds: &[Vertex]) -> Vec<bool> {
        let labels: BTreeSet<usize> = seeds.iter().map(|&s| self.comp[s]).collect();
        self.comp.iter().map(|c| labels.contains(c)).collect()
    }

    /// Union of the source components, C_1.
    pub fn source_side(&self) -> Vec<bool> {
        self.side_mask(&self.sources)
    }

    pub fn target_side(&self) -> Vec<bool> {
        self.side_mask(&self.targets)
    }

    /// E_1(Γ) = ∪_{x∈X} E_i(Γ, x), sorted.
    pub fn e1(&self) -> Vec<Vertex> {
        let side = self.source_side();
        (0..side.len()).filter(|&v| side[v] && self.plaquette[v] > 0).collect()
    }

    /// E_0(Γ) = ∪_{b∈B} E_i(Γ, b), sorted.
    pub fn e0(&self) -> Vec<Vertex> {
        let side = self.target_side();
        (0..side.len()).filter(|&v| side[v] && self.plaquette[v] > 0).collect()
    }

    /// E_{1,1}: vertices of E_1 whose edge in direction +e_axis is cut.
    pub fn e11(&self, axis: usize) -> Vec<Vertex> {
        self.e1().into_iter().filter(|&v| self.is_cut(v, axis)).collect()
    }

    /// Whether (Δ - P)^2 <= d, the integer form of P >= Δ - √d.
    pub fn is_exposed(&self, v: Vertex) -> bool {
        let gap = self.torus.degree() - self.plaquette[v];
        gap * gap <= self.torus.dim()
    }

    /// E_{1,e}.
    pub fn exposed(&self) -> Vec<Vertex> {
        self.e1().into_iter().filter(|&v| self.is_exposed(v)).collect()
    }

    /// |E_{v,j}| for every direction j.
    pub fn direction_counts(&self, v: Vertex) -> Vec<usize> {
        let boundary = self.inner_boundary(v);
        (0..self.torus.degree()).map(|j| boundary.iter().filter(|&&w| self.is_cut(w, j)).count()).collect()
    }

    pub fn n_gamma(&self, v: Vertex) -> NGammaVector {
        assert!(self.torus.degree() <= 64, "degree above 64");
        let side = self.source_side();
        let mut bits = 0u64;
        for (i, &w) in self.torus.neighbors(v).iter().enumerate() {
            if side[w] {
                bits |= 1 << i;
            }
        }
        NGammaVector { vertex: v, bits }
    }

    /// Edges between comp(Γ, v) and its complement. A source-side `v`
    /// becomes the single source; a target-side `v` the single target.
    pub fn subcut(&self, v: Vertex) -> Result<OddCutset> {
        self.torus.check_vertex(v)?;
        let label = self.comp[v];
        let edges: Vec<(Vertex, Vertex)> =
            self.edges.iter().copied().filter(|&(a, b)| (self.comp[a] == label) != (self.comp[b] == label)).collect();
        let on_target = self.targets.iter().any(|&b| self.comp[b] == label);
        if on_target {
            OddCutset::new(&self.torus, &edges, &self.sources, &[v], self.anchor)
        } else {
            OddCutset::new(&self.torus, &edges, &[v], &self.targets, self.anchor)
        }
    }

    /// Vertices v + f_i + f_j with f_i, f_j on different axes, {v, v+f_i}
    /// cut and {v, v+f_j} not.
    pub fn gamma_adjacency(&self, v: Vertex) -> Vec<Vertex> {
        let dirs = self.torus.directions();
        let mut out = Vec::new();
        for i in 0..dirs.len() {
            if !self.is_cut(v, i) {
                continue;
            }
            for j in 0..dirs.len() {
                if dirs[i].axis == dirs[j].axis || self.is_cut(v, j) {
                    continue;
                }
                out.push(self.torus.step(self.torus.step(v, i), j));
            }
        }
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Lower bound P(Δ-P) - min(P, Δ-P) on the number of Γ-neighbors.
    pub fn gamma_degree_bound(&self, v: Vertex) -> i64 {
        let p = self.plaquette[v] as i64;
        let q = self.torus.degree() as i64 - p;
        p * q - p.min(q)
    }

    /// Γ consists of all edges at one source or one target.
    pub fn is_trivial(&self) -> bool {
        let deg = self.torus.degree();
        self.edges.len() == deg && self.sources.iter().chain(&self.targets).any(|&u| self.plaquette[u] == deg)
    }

    pub fn profile(&self) -> RegularityProfile {
        let deg = self.torus.degree();
        let e1 = self.e1();
        let mut p_histogram = BTreeMap::new();
        let mut r_total = 0;
        for &v in &e1 {
            let p = self.plaquette[v];
            *p_histogram.entry(p).or_insert(0) += 1;
            r_total += p.min(deg - p);
        }
        let direction_counts = (0..deg).map(|j| e1.iter().filter(|&&w| self.is_cut(w, j)).count()).collect();
        RegularityProfile {
            edge_count: self.edges.len(),
            r_total,
            p_histogram,
            exposed: e1.iter().filter(|&&v| self.is_exposed(v)).count(),
            direction_counts,
            trivial: self.is_trivial(),
        }
    }

    /// No source component meets a target.
    pub fn separates(&self) -> bool {
        let side = self.source_side();
        self.targets.iter().all(|&b| !side[b])
    }

    /// Separation plus: every edge joins a source component to a target
    /// component, so restoring any single edge reconnects X to B.
    pub fn is_minimal(&self) -> bool {
        if !self.separates() {
            return false;
        }
        let src = self.source_side();
        let dst = self.target_side();
        self.edges.iter().all(|&(a, b)| (src[a] && dst[b]) || (src[b] && dst[a]))
    }

    /// E_i(Γ, x) consists of odd vertices for every source x.
    pub fn is_odd(&self) -> bool {
        self.e1().iter().all(|&v| self.is_odd_vertex(v))
    }

    pub fn is_omcut(&self) -> bool {
        self.is_minimal() && self.is_odd()
    }

    /// P_Γ(v) + P_Γ(w) >= Δ across every cut edge.
    pub fn neighbor_plaquette_holds(&self) -> bool {
        let deg = self.torus.degree();
        self.edges.iter().all(|&(a, b)| self.plaquette[a] + self.plaquette[b] >= deg)
    }

    /// E_i(Γ, v) = {v}, or 1 <= P_Γ <= Δ - 1 on E_i(Γ, v).
    pub fn one_point_property_holds(&self, v: Vertex) -> bool {
        let boundary = self.inner_boundary(v);
        boundary == [v] || boundary.iter().all(|&w| self.plaquette[w] >= 1 && self.plaquette[w] < self.torus.degree())
    }

    /// For adjacent u, v with {u, v} ∉ Γ, u has at least P_Γ(v) neighbors in
    /// E_i(Γ, u).
    pub fn interior_estimate_holds(&self) -> bool {
        let n = self.torus.vertex_count();
        for u in 0..n {
            for (i, &v) in self.torus.neighbors(u).iter().enumerate() {
                if self.is_cut(u, i) {
                    continue;
                }
                let near = self
                    .torus
                    .neighbors(u)
                    .iter()
                    .filter(|&&w| self.comp[w] == self.comp[u] && self.plaquette[w] > 0)
                    .count();
                if near < self.plaquette[v] {
                    return false;
                }
            }
        }
        true
    }

    /// E_i(Γ, x) is ◊-connected or each of its ◊-components has full
    /// projection along some axis.
    pub fn full_projection_property_holds(&self, x: Vertex) -> bool {
        let parts = diamond_components(&self.torus, &self.inner_boundary(x));
        parts.len() <= 1
            || parts.iter().all(|part| (0..self.torus.dim()).any(|axis| full_projection_axis(&self.torus, part, axis)))
    }

    /// non-exposed E_1 ⊆ set ⊆ C_1.
    pub fn is_interior_approximation(&self, set: &[Vertex]) -> bool {
        let side = self.source_side();
        let mut member = vec![false; side.len()];
        for &v in set {
            if v >= side.len() || !side[v] {
                return false;
            }
            member[v] = true;
        }
        self.e1().iter().all(|&v| self.is_exposed(v) || member[v])
    }
}

/// Components of `set` under the ◊ adjacency (shared basic 4-cycle).
pub fn diamond_components(torus: &TorusSpec, set: &[Vertex]) -> Vec<Vec<Vertex>> {
    let mut member = vec![false; torus.vertex_count()];
    for &v in set {
        member[v] = true;
    }
    let mut seen = vec![false; torus.vertex_count()];
    let mut out = Vec::new();
    let mut sorted = set.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    for &s in &sorted {
        if seen[s] {
            continue;
        }
        seen[s] = true;
        let mut part = vec![s];
        let mut stack = vec![s];
        while let Some(u) = stack.pop() {
            for w in torus.aux_adjacency(u, AuxKind::Diamond) {
                if member[w] && !seen[w] {
                    seen[w] = true;
                    part.push(w);
                    stack.push(w);
                }
            }
        }
        part.sort_unstable();
        out.push(part);
    }
    out
}

fn flood(torus: &TorusSpec, seeds: &[Vertex], allowed: &[bool]) -> Vec<bool> {
    let mut mark = vec![false; torus.vertex_count()];
    let mut stack = Vec::new();
    for &s in seeds {
        if allowed[s] && !mark[s] {
            mark[s] = true;
            stack.push(s);
        }
    }
    while let Some(u) = stack.pop() {
        for &w in torus.neighbors(u) {
            if allowed[w] && !mark[w] {
                mark[w] = true;
                stack.push(w);
            }
        }
    }
    mark
}

fn boundary_edges(torus: &TorusSpec, inside: &[bool]) -> Vec<(Vertex, Vertex)> {
    let mut out = Vec::new();
    for v in 0..inside.len() {
        if !inside[v] {
            continue;
        }
        for &w in torus.neighbors(v) {
            if !inside[w] {
                out.push((v.min(w), v.max(w)));
            }
        }
    }
    out
}

/// The outermost level set around x from the mask {f <= 0}: A is the union
/// of the components of B inside the mask, and the result is the edge
/// boundary of the component of x in V \ A.
pub fn level_set_from_mask(
    torus: &TorusSpec,
    below: &[bool],
    x: Vertex,
    targets: &[Vertex],
    anchor: u8,
) -> Result<Option<OddCutset>> {
    torus.check_vertex(x)?;
    let outer = flood(torus, targets, below);
    if outer[x] {
        return Ok(None);
    }
    let rest: Vec<bool> = outer.iter().map(|&a| !a).collect();
    let inner = flood(torus, &[x], &rest);
    let edges = boundary_edges(torus, &inner);
    OddCutset::new(torus, &edges, &[x], targets, anchor).map(Some)
}

fn non_positive_targets(bc: &BoundaryCondition, ceiling: i64) -> Result<()> {
    let pairs = bc.fixed_pairs().map_err(|_| Error::PositiveBoundary)?;
    if pairs.iter().any(|&(_, m)| m > ceiling) {
        return Err(Error::PositiveBoundary);
    }
    Ok(())
}

/// LS(f, x, B). `None` when x is connected to B through {f <= 0}.
pub fn level_set(f: &HeightFunction, x: Vertex, bc: &BoundaryCondition) -> Result<Option<OddCutset>> {
    level_set_at_height(f, x, bc, 1)
}

/// LS_i(f, x, B) = LS(f - (i - 1), x, B) with μ shifted alike.
pub fn level_set_at_height(f: &HeightFunction, x: Vertex, bc: &BoundaryCondition, i: i64) -> Result<Option<OddCutset>> {
    non_positive_targets(bc, i - 1)?;
    let below: Vec<bool> = f.values.iter().map(|&h| h < i).collect();
    let anchor = bc.anchor() ^ ((i - 1).rem_euclid(2) as u8);
    level_set_from_mask(&f.torus, &below, x, bc.vertices(), anchor)
}

fn check_pair_sets(torus: &TorusSpec, sources: &[Vertex], targets: &[Vertex]) -> Result<bool> {
    if sources.is_empty() || targets.is_empty() {
        return Err(Error::EmptyBoundary);
    }
    for &v in sources.iter().chain(targets) {
        torus.check_vertex(v)?;
    }
    Ok(sources.iter().all(|s| !targets.contains(s)))
}

/// Every region U with X ⊆ U, U ∩ Y = ∅, each component of U meeting X and
/// each component of V \ U meeting Y has ∂U ∈ MCut(X, Y), and every member
/// of MCut(X, Y) arises from exactly one such U.
fn region_is_valid(torus: &TorusSpec, inside: &[bool], sources: &[Vertex], targets: &[Vertex]) -> bool {
    let reach_in = flood(torus, sources, inside);
    if inside.iter().zip(&reach_in).any(|(&a, &b)| a != b) {
        return false;
    }
    let outside: Vec<bool> = inside.iter().map(|&a| !a).collect();
    let reach_out = flood(torus, targets, &outside);
    outside.iter().zip(&reach_out).all(|(&a, &b)| a == b)
}

/// Streams OMCut(X, Y) restricted to |Γ| <= `max_edges`, each member once.
///
/// The source region U is determined by its odd vertices O: an even vertex
/// outside Y belongs to U iff all its neighbors are in O (oddness forces
/// every neighbor of an interior even vertex inside). The search runs over
/// subsets O of the odd vertices outside Y; `budget` caps their number.
pub fn enumerate_omcut<F>(
    torus: &TorusSpec,
    sources: &[Vertex],
    targets: &[Vertex],
    anchor: u8,
    max_edges: usize,
    budget: Budget,
    mut visit: F,
) -> Result<SearchStats>
where
    F: FnMut(OddCutset) -> ControlFlow<()>,
{
    let mut stats = SearchStats::default();
    if !check_pair_sets(torus, sources, targets)? {
        return Ok(stats);
    }
    let n = torus.vertex_count();
    let odd = |v: Vertex| torus.parity(v) ^ anchor == 1;
    let mut in_y = vec![false; n];
    for &b in targets {
        in_y[b] = true;
    }
    let mut forced = vec![false; n];
    for &x in sources {
        if odd(x) {
            forced[x] = true;
        } else {
            for &w in torus.neighbors(x) {
                if in_y[w] {
                    return Ok(stats);
                }
                forced[w] = true;
            }
        }
    }
    let free: Vec<Vertex> = (0..n).filter(|&v| odd(v) && !in_y[v] && !forced[v]).collect();
    if free.len() >= 63 || (1u64 << free.len()) > budget.0 {
        return Err(Error::BudgetExceeded { budget: budget.0, visited: 0, emitted: 0 });
    }
    let evens: Vec<Vertex> = (0..n).filter(|&v| !odd(v) && !in_y[v]).collect();
    let mut inside = vec![false; n];
    for mask in 0..(1u64 << free.len()) {
        stats.nodes += 1;
        inside.copy_from_slice(&forced);
        for (k, &v) in free.iter().enumerate() {
            if mask >> k & 1 == 1 {
                inside[v] = true;
            }
        }
        for &v in &evens {
            if torus.neighbors(v).iter().all(|&w| inside[w]) {
                inside[v] = true;
            }
        }
        if !region_is_valid(torus, &inside, sources, targets) {
            continue;
        }
        let edges = boundary_edges(torus, &inside);
        if edges.len() > max_edges {
            continue;
        }
        stats.emitted += 1;
        let gamma = OddCutset::new(torus, &edges, sources, targets, anchor)?;
        if visit(gamma).is_break() {
            stats.stopped_early = true;
            break;
        }
    }
    Ok(stats)
}

/// Collects [`enumerate_omcut`] output sorted by edge list.
pub fn omcut_list(
    torus: &TorusSpec,
    sources: &[Vertex],
    targets: &[Vertex],
    anchor: u8,
    max_edges: usize,
    budget: Budget,
) -> Result<Vec<OddCutset>> {
    let mut out = Vec::new();
    enumerate_omcut(torus, sources, targets, anchor, max_edges, budget, |g| {
        out.push(g);
        ControlFlow::Continue(())
    })?;
    out.sort_by(|a, b| a.edges.cmp(&b.edges));
    Ok(out)
}

/// Independent strategy: every vertex subset C ∋ X avoiding Y, kept when its
/// boundary is a minimal cutset with odd inner boundary on the C side.
/// Limited to 24 vertices.
pub fn omcut_by_vertex_subsets(
    torus: &TorusSpec,
    sources: &[Vertex],
    targets: &[Vertex],
    anchor: u8,
) -> Result<Vec<OddCutset>> {
    let n = torus.vertex_count();
    if n > 24 {
        return Err(Error::Precondition(format!("{n} vertices exceed the subset limit of 24")));
    }
    if !check_pair_sets(torus, sources, targets)? {
        return Ok(Vec::new());
    }
    let mut out = Vec::new();
    let mut inside = vec![false; n];
    for mask in 0..(1u32 << n) {
        for (v, slot) in inside.iter_mut().enumerate() {
            *slot = mask >> v & 1 == 1;
        }
        if sources.iter().any(|&x| !inside[x]) || targets.iter().any(|&b| inside[b]) {
            continue;
        }
        let edges = boundary_edges(torus, &inside);
        let gamma = OddCutset::new(torus, &edges, sources, targets, anchor)?;
        if gamma.is_omcut() && gamma.source_side() == inside {
            out.push(gamma);
        }
    }
    out.sort_by(|a, b| a.edges.cmp(&b.edges));
    out.dedup();
    Ok(out)
}

/// min |Γ| over OMCut(X, Y); `None` when that set is empty.
pub fn min_odd_cutset_size(
    torus: &TorusSpec,
    sources: &[Vertex],
    targets: &[Vertex],
    anchor: u8,
    budget: Budget,
) -> Result<Option<usize>> {
    let mut best: Option<usize> = None;
    enumerate_omcut(torus, sources, targets, anchor, usize::MAX, budget, |g| {
        best = Some(best.map_or(g.len(), |b| b.min(g.len())));
        ControlFlow::Continue(())
    })?;
    Ok(best)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DominatingSetConfig {
    /// Multiplier of ln d in the inclusion probability.
    pub constant: f64,
    pub max_retries: usize,
}

impl Default for DominatingSetConfig {
    fn default() -> Self {
        DominatingSetConfig { constant: 30.0, max_retries: 64 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DominatingSets {
    /// E_0^t, sorted.
    pub target_side: Vec<Vertex>,
    /// E_1^t, sorted.
    pub source_side: Vec<Vertex>,
    /// Number of random draws used, starting at 1.
    pub draws: usize,
    /// Σ min(P, Δ - P) over each set, target side first.
    pub regularity: [usize; 2],
}

/// Precomputed sides for the dominating-set construction. Index j = 1 is
/// the source side, j = 0 the target side.
struct Sides<'a> {
    gamma: &'a OddCutset,
    boundary: [Vec<Vertex>; 2],
    in_boundary: [Vec<bool>; 2],
    in_comp: [Vec<bool>; 2],
}

impl<'a> Sides<'a> {
    fn new(gamma: &'a OddCutset) -> Self {
        let src = gamma.source_side();
        let dst: Vec<bool> = src.iter().map(|&s| !s).collect();
        let e1 = gamma.e1();
        let e0: Vec<Vertex> = (0..dst.len()).filter(|&v| dst[v] && gamma.plaquette(v) > 0).collect();
        let mask = |set: &[Vertex]| {
            let mut m = vec![false; src.len()];
            for &v in set {
                m[v] = true;
            }
            m
        };
        Sides {
            gamma,
            in_boundary: [mask(&e0), mask(&e1)],
            boundary: [e0, e1],
            in_comp: [dst, src],
        }
    }

    fn torus(&self) -> &TorusSpec {
        self.gamma.torus()
    }

    fn a1(&self, j: usize, v: Vertex) -> Vec<Vertex> {
        let t = self.torus();
        let mut out = Vec::new();
        for &u in t.neighbors(v) {
            if !self.in_comp[j][u] {
                continue;
            }
            for &w in t.neighbors(u) {
                if self.in_boundary[j][w] {
                    out.push(w);
                }
            }
        }
        out.sort_unstable();
        out.dedup();
        out
    }

    fn a2(&self, j: usize, v: Vertex) -> Vec<Vertex> {
        let t = self.torus();
        let d = t.dim();
        t.neighbors(v)
            .iter()
            .copied()
            .filter(|&u| {
                let k = t.neighbors(u).iter().filter(|&&w| self.in_boundary[j][w]).count();
                self.in_comp[j][u] && k * k < d
            })
            .collect()
    }

    fn a3(&self, j: usize, v: Vertex) -> Vec<Vertex> {
        let t = self.torus();
        let mut out = Vec::new();
        for u in self.a2(j, v) {
            for &w in t.neighbors(u) {
                if self.in_boundary[j][w] {
                    out.push(w);
                }
            }
        }
        out.sort_unstable();
        out.dedup();
        out
    }

    fn neighborhood(&self, set: &[bool]) -> Vec<bool> {
        let t = self.torus();
        let mut out = vec![false; set.len()];
        for v in 0..set.len() {
            if set[v] {
                for &w in t.neighbors(v) {
                    out[w] = true;
                }
            }
        }
        out
    }

    /// Vertices violating (b), (c) or (d) for the candidate sets, indexed by
    /// side and property.
    fn violations(&self, chosen: &[Vec<bool>; 2]) -> [[Vec<Vertex>; 3]; 2] {
        let t = self.torus();
        let d = t.dim();
        let deg = t.degree();
        let spread = [self.neighborhood(&chosen[0]), self.neighborhood(&chosen[1])];
        let mut out: [[Vec<Vertex>; 3]; 2] = Default::default();
        for j in 0..2 {
            for &v in &self.boundary[j] {
                let p = self.gamma.plaquette(v);
                let a1 = self.a1(j, v);
                if 25 * a1.len() * a1.len() >= d * d * d && !a1.iter().any(|&w| chosen[j][w]) {
                    out[j][0].push(v);
                }
                if 2 * p >= deg {
                    let k = t
                        .neighbors(v)
                        .iter()
                        .filter(|&&w| self.in_boundary[1 - j][w] && spread[j][w])
                        .count();
                    if k * k < d {
                        out[j][1].push(v);
                    }
                }
                if p * p <= d && 2 * self.a2(j, v).len() >= deg && !self.a3(j, v).iter().any(|&w| spread[1 - j][w]) {
                    out[j][2].push(v);
                }
            }
        }
        out
    }
}

/// Random subsets E_j^t ⊆ E_j with the domination properties (b), (c), (d),
/// built by independent inclusion followed by the deterministic corrections
/// B_{j,1}, B_{j,2} and one Γ-neighbor per B_{1-j,3} vertex. Each draw is
/// verified; after `max_retries` failed draws the construction gives up.
pub fn boundary_dominating_sets(
    gamma: &OddCutset,
    rng: &RandomSource,
    config: &DominatingSetConfig,
) -> Result<DominatingSets> {
    if gamma.sources().len() != 1 || gamma.targets().len() != 1 {
        return Err(Error::Precondition("dominating sets need a single source and a single target".into()));
    }
    if gamma.is_trivial() {
        return Err(Error::Precondition("cutset is trivial".into()));
    }
    let sides = Sides::new(gamma);
    let t = gamma.torus();
    let n = t.vertex_count();
    let d = t.dim() as f64;
    let deg = t.degree();
    let mut gen = rng.generator();
    for draw in 1..=config.max_retries.max(1) {
        let mut chosen: [Vec<bool>; 2] = [vec![false; n], vec![false; n]];
        for j in 0..2 {
            for &v in &sides.boundary[j] {
                let gap = (deg - gamma.plaquette(v)) as f64;
                let p = if gap == 0.0 { 1.0 } else { (config.constant * d.ln() / (gap * d.sqrt())).clamp(0.0, 1.0) };
                if to_unit(gen.next_u64()) < p {
                    chosen[j][v] = true;
                }
            }
        }
        let bad = sides.violations(&chosen);
        let mut fixed = chosen.clone();
        for j in 0..2 {
            for &v in bad[j][0].iter().chain(&bad[j][1]) {
                fixed[j][v] = true;
            }
            for &v in &bad[1 - j][2] {
                let pick = sides.a3(1 - j, v).into_iter().find_map(|w| {
                    t.neighbors(w).iter().copied().find(|&u| sides.in_boundary[j][u])
                });
                if let Some(u) = pick {
                    fixed[j][u] = true;
                }
            }
        }
        let left = sides.violations(&fixed);
        if left.iter().all(|side| side.iter().all(|list| list.is_empty())) {
            let collect = |m: &Vec<bool>| (0..n).filter(|&v| m[v]).collect::<Vec<_>>();
            let target_side = collect(&fixed[0]);
            let source_side = collect(&fixed[1]);
            let reg = |set: &[Vertex]| {
                set.iter().map(|&v| gamma.plaquette(v).min(deg - gamma.plaquette(v))).sum::<usize>()
            };
            let regularity = [reg(&target_side), reg(&source_side)];
            return Ok(DominatingSets { target_side, source_side, draws: draw, regularity });
        }
    }
    Err(Error::RetriesExhausted(config.max_retries.max(1)))
}

/// Reconstructs an interior approximation from the dominating sets and the
/// N_Γ vectors of their members only:
/// R_j^a = {v'+f_i : v' ∈ E_{1-j}^t, N(v')_i = j},
/// R_j^b = S(v'+f_i) for v' ∈ E_j^t with N(v')_i = j,
/// V_j = {v : |S(v) ∩ R_{1-j}^a|^2 < d},
/// U = {u ∈ V_0 \ R_0^b : S(u) ∩ V_1 ∩ R_1^a ≠ ∅}, and E = R_1^b ∪ S(U).
pub fn interior_approximation(
    torus: &TorusSpec,
    target_side: &[NGammaVector],
    source_side: &[NGammaVector],
) -> Vec<Vertex> {
    let n = torus.vertex_count();
    let d = torus.dim();
    let deg = torus.degree();
    let inputs = [target_side, source_side];
    let mut ra = [vec![false; n], vec![false; n]];
    let mut rb = [vec![false; n], vec![false; n]];
    for j in 0..2u8 {
        let jj = j as usize;
        for nv in inputs[1 - jj] {
            for i in 0..deg {
                if nv.bit(i) == j {
                    ra[jj][torus.step(nv.vertex, i)] = true;
                }
            }
        }
        for nv in inputs[jj] {
            for i in 0..deg {
                if nv.bit(i) == j {
                    for &w in torus.neighbors(torus.step(nv.vertex, i)) {
                        rb[jj][w] = true;
                    }
                }
            }
        }
    }
    let low = |v: Vertex, r: &Vec<bool>| {
        let k = torus.neighbors(v).iter().filter(|&&w| r[w]).count();
        k * k < d
    };
    let v0: Vec<bool> = (0..n).map(|v| low(v, &ra[1])).collect();
    let v1: Vec<bool> = (0..n).map(|v| low(v, &ra[0])).collect();
    let mut out = rb[1].clone();
    for u in 0..n {
        if v0[u] && !rb[0][u] && torus.neighbors(u).iter().any(|&w| v1[w] && ra[1][w]) {
            for &w in torus.neighbors(u) {
                out[w] = true;
            }
        }
    }
    (0..n).filter(|&v| out[v]).collect()
}
