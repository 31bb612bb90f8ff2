//! Wall calculus on linear tori `Z_n x G^-`.
//!
//! The column axis is the largest side (the last axis, since dims are
//! sorted), rows index `G^-` in linear order and the base vertex is index 0.
//! With row-major storage a vertex is `row * n + column`.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::height::{range_of, validate, BoundaryCondition, HeightFunction, Model};
use crate::oracle::{enumerate_with_budget, search_graph, Budget};
use crate::torus::{TorusSpec, Vertex};

#[derive(Debug, Clone)]
pub struct LinearLayout {
    torus: TorusSpec,
    columns: usize,
    rows: usize,
}

impl LinearLayout {
    pub fn new(torus: &TorusSpec) -> Result<Self> {
        let columns = torus.largest_side();
        if columns < 4 {
            return Err(Error::NotLinearLayout);
        }
        Ok(LinearLayout { torus: torus.clone(), columns, rows: torus.vertex_count() / columns })
    }

    /// Requires the one-point condition f(base) = 0.
    pub fn from_bc(bc: &BoundaryCondition) -> Result<Self> {
        match bc.fixed_pairs() {
            Ok(pairs) if pairs == [(0, 0)] => LinearLayout::new(bc.torus()),
            _ => Err(Error::NotLinearLayout),
        }
    }

    pub fn torus(&self) -> &TorusSpec {
        &self.torus
    }

    /// n, the number of columns.
    pub fn columns(&self) -> usize {
        self.columns
    }

    /// m = |V[G^-]|.
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn base(&self) -> Vertex {
        0
    }

    pub fn column(&self, v: Vertex) -> usize {
        v % self.columns
    }

    pub fn row(&self, v: Vertex) -> usize {
        v / self.columns
    }

    pub fn vertex(&self, row: usize, column: usize) -> Vertex {
        row * self.columns + column % self.columns
    }

    /// Even columns 0, 2, ..., n-2.
    pub fn sites(&self) -> impl Iterator<Item = usize> {
        (0..self.columns).step_by(2)
    }

    fn check_site(&self, x: usize) -> Result<()> {
        if x % 2 == 1 || x >= self.columns {
            return Err(Error::Precondition(format!("wall site {x} must be even and below {}", self.columns)));
        }
        Ok(())
    }

    fn collect(&self, cols: [usize; 2], parity: u8) -> Vec<Vertex> {
        let mut out: Vec<Vertex> = (0..self.rows)
            .flat_map(|r| cols.map(|c| self.vertex(r, c)))
            .filter(|&v| self.torus.parity(v) == parity)
            .collect();
        out.sort_unstable();
        out
    }

    /// W_x^0: even vertices in columns x and x+1.
    pub fn w0(&self, x: usize) -> Vec<Vertex> {
        self.collect([x, x + 1], 0)
    }

    /// W_x^1: odd vertices in columns x+1 and x+2 (mod n).
    pub fn w1(&self, x: usize) -> Vec<Vertex> {
        self.collect([x + 1, (x + 2) % self.columns], 1)
    }

    /// Height and sign of the wall at `x`, if there is one.
    pub fn wall_at(&self, f: &HeightFunction, x: usize) -> Option<(i64, i8)> {
        let constant = |set: &[Vertex]| {
            let h = f.at(set[0]);
            set.iter().all(|&v| f.at(v) == h).then_some(h)
        };
        let low = constant(&self.w0(x))?;
        let high = constant(&self.w1(x))?;
        if high == low {
            return None;
        }
        Some((low, if high == low + 1 { 1 } else { -1 }))
    }

    pub fn profile(&self, f: &HeightFunction) -> WallProfile {
        let mut profile = WallProfile::default();
        for x in self.sites() {
            if let Some((h, s)) = self.wall_at(f, x) {
                profile.positions.push(x);
                profile.heights.push(h);
                profile.signs.push(s);
            }
        }
        profile
    }

    /// Edges of the torus minus the seam between W_0^0 and W_{n-2}^1.
    pub fn relaxed_edges(&self) -> Vec<(Vertex, Vertex)> {
        let mut left = vec![false; self.torus.vertex_count()];
        let mut right = vec![false; self.torus.vertex_count()];
        for v in self.w0(0) {
            left[v] = true;
        }
        for v in self.w1(self.columns - 2) {
            right[v] = true;
        }
        self.torus
            .edges()
            .into_iter()
            .filter(|&(a, b)| !((left[a] && right[b]) || (left[b] && right[a])))
            .collect()
    }

    /// Membership in the relaxed class: f(base) = 0 and |f(u) - f(w)| = 1 on
    /// every non-seam edge.
    pub fn in_relaxed_class(&self, f: &HeightFunction) -> bool {
        f.at(self.base()) == 0 && self.relaxed_edges().iter().all(|&(a, b)| (f.at(a) - f.at(b)).abs() == 1)
    }

    /// Every function of the relaxed class.
    pub fn enumerate_relaxed(&self, budget: Budget) -> Result<Vec<HeightFunction>> {
        let n = self.torus.vertex_count();
        let graph = Graph::from_edges(n, &self.relaxed_edges());
        let mut windows = vec![None; n];
        windows[self.base()] = Some((0, 0));
        let class: Vec<u8> = (0..n).map(|v| self.torus.parity(v)).collect();
        let mut out = Vec::new();
        search_graph(&graph, &windows, Some(&class), Model::Hom, budget, |vals| {
            out.push(HeightFunction { torus: self.torus.clone(), values: vals.to_vec(), model: Model::Hom });
            std::ops::ControlFlow::Continue(())
        })?;
        Ok(out)
    }

    /// f(base) = 0 and f is a homomorphism on the full torus.
    pub fn in_hom(&self, f: &HeightFunction) -> bool {
        f.at(self.base()) == 0 && self.torus.edges().iter().all(|&(a, b)| (f.at(a) - f.at(b)).abs() == 1)
    }

    /// s^v_x: breadth-first order of W_x^0 ∪ W_x^1 from `start`, neighbors in
    /// linear-index order.
    pub fn building_order(&self, x: usize, start: Vertex) -> Vec<Vertex> {
        let mut inside = vec![false; self.torus.vertex_count()];
        for v in self.w0(x).into_iter().chain(self.w1(x)) {
            inside[v] = true;
        }
        let mut seen = vec![false; inside.len()];
        let mut order = vec![start];
        let mut queue = VecDeque::from([start]);
        seen[start] = true;
        while let Some(u) = queue.pop_front() {
            let mut nbrs: Vec<Vertex> = self.torus.neighbors(u).to_vec();
            nbrs.sort_unstable();
            for w in nbrs {
                if inside[w] && !seen[w] {
                    seen[w] = true;
                    order.push(w);
                    queue.push_back(w);
                }
            }
        }
        debug_assert_eq!(order.len(), 2 * self.rows);
        order
    }
}

/// W(f) with wall heights and up/down signs, in increasing column order.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct WallProfile {
    pub positions: Vec<usize>,
    pub heights: Vec<i64>,
    pub signs: Vec<i8>,
}

impl WallProfile {
    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn sign_at(&self, x: usize) -> Option<i8> {
        self.positions.iter().position(|&p| p == x).map(|i| self.signs[i])
    }

    /// Sum of the signs.
    pub fn balance(&self) -> i64 {
        self.signs.iter().map(|&s| s as i64).sum()
    }

    /// Number of up-walls of height `h`.
    pub fn up_walls_at(&self, h: i64) -> usize {
        self.heights.iter().zip(&self.signs).filter(|&(&hh, &s)| hh == h && s == 1).count()
    }
}

pub fn detect_walls(f: &HeightFunction, bc: &BoundaryCondition) -> Result<WallProfile> {
    let layout = LinearLayout::from_bc(bc)?;
    if f.torus != *bc.torus() {
        return Err(Error::Precondition("function and boundary live on different tori".into()));
    }
    Ok(layout.profile(f))
}

/// Connected component of `start` in the complement of {f = level}; empty
/// when f(start) = level.
fn component_off_level(f: &HeightFunction, start: Vertex, level: i64) -> Vec<bool> {
    let mut inside = vec![false; f.values.len()];
    if f.at(start) == level {
        return inside;
    }
    inside[start] = true;
    let mut queue = VecDeque::from([start]);
    while let Some(u) = queue.pop_front() {
        for &w in f.torus.neighbors(u) {
            if !inside[w] && f.at(w) != level {
                inside[w] = true;
                queue.push_back(w);
            }
        }
    }
    inside
}

/// R_{w,t}: reflect the peak (or lake) around `w` from height `t`.
pub fn reflect_peak(f: &HeightFunction, w: Vertex, t: i64) -> Result<HeightFunction> {
    f.torus.check_vertex(w)?;
    let peak = component_off_level(f, w, t);
    if peak[0] {
        return Err(Error::BoundaryInPeak);
    }
    let mut g = f.clone();
    for (v, val) in g.values.iter_mut().enumerate() {
        if peak[v] {
            *val = 2 * t - *val;
        }
    }
    Ok(g)
}

/// R_t for even `t`: f on the component of the base avoiding height t/2,
/// t - f elsewhere.
pub fn flip_half(f: &HeightFunction, t: i64) -> Result<HeightFunction> {
    if t.rem_euclid(2) != 0 {
        return Err(Error::Precondition(format!("flip height {t} must be even")));
    }
    let keep = component_off_level(f, 0, t / 2);
    let mut g = f.clone();
    for (v, val) in g.values.iter_mut().enumerate() {
        if !keep[v] {
            *val = t - *val;
        }
    }
    Ok(g)
}

/// S_x: swap the wall at `x` between up and down and shift everything to its
/// right by -2 s(f)_x.
pub fn flip_wall(f: &HeightFunction, x: usize) -> Result<HeightFunction> {
    let layout = LinearLayout::new(&f.torus)?;
    layout.check_site(x)?;
    let (_, sign) = layout.wall_at(f, x).ok_or(Error::NotAWall(x))?;
    let mut g = f.clone();
    for (v, val) in g.values.iter_mut().enumerate() {
        let col = layout.column(v);
        let kept = if f.torus.parity(v) == 0 { col <= x + 1 } else { (1..=x).contains(&col) };
        if !kept {
            *val -= 2 * sign as i64;
        }
    }
    Ok(g)
}

/// Whether shifting W_{n-2}^1 by `-2 * shift` keeps every seam edge to W_0^0
/// a Hom edge. A composite of wall flips with sign sum `shift` lands in Hom
/// exactly when this holds.
pub fn seam_compatible(f: &HeightFunction, shift: i64) -> Result<bool> {
    let layout = LinearLayout::new(&f.torus)?;
    let left = layout.w0(0);
    let right = layout.w1(layout.columns() - 2);
    Ok(left.iter().all(|&a| {
        f.torus
            .neighbors(a)
            .iter()
            .filter(|w| right.contains(w))
            .all(|&b| (f.at(a) - f.at(b) + 2 * shift).abs() == 1)
    }))
}

/// T^{i,j}: reflect columns x_i < col <= x_j around the common wall height.
pub fn reflect_between_walls(f: &HeightFunction, i: usize, j: usize) -> Result<HeightFunction> {
    let layout = LinearLayout::new(&f.torus)?;
    let profile = layout.profile(f);
    if i >= j || j >= profile.len() {
        return Err(Error::Precondition(format!("need wall ranks i < j < {}, got {i}, {j}", profile.len())));
    }
    let h = profile.heights[i];
    if profile.heights[j] != h {
        return Err(Error::HeightMismatch);
    }
    let (lo, hi) = (profile.positions[i], profile.positions[j]);
    let mut g = f.clone();
    for (v, val) in g.values.iter_mut().enumerate() {
        let col = layout.column(v);
        if lo < col && col <= hi {
            *val = 2 * h - *val;
        }
    }
    Ok(g)
}

/// Data needed to undo B_x: the start vertex and, for each later step,
/// whether a reflection happened.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct BuildTrace {
    pub start: Vertex,
    pub reflections: Vec<bool>,
}

/// B_x, the building transformation.
pub fn build_wall(f: &HeightFunction, x: usize) -> Result<HeightFunction> {
    build_wall_traced(f, x).map(|(g, _)| g)
}

pub fn build_wall_traced(f: &HeightFunction, x: usize) -> Result<(HeightFunction, BuildTrace)> {
    let layout = LinearLayout::new(&f.torus)?;
    layout.check_site(x)?;
    let w0 = layout.w0(x);
    let start = w0
        .iter()
        .copied()
        .filter(|&w| f.at(w) == 0)
        .min_by_key(|&w| layout.row(w))
        .ok_or(Error::NoZeroOnColumn(x))?;
    let mut in_w0 = vec![false; f.values.len()];
    for &w in &w0 {
        in_w0[w] = true;
    }
    let mut g = f.clone();
    let mut reflections = Vec::new();
    for w in layout.building_order(x, start).into_iter().skip(1) {
        let val = g.at(w);
        let reflected = match (in_w0[w], val) {
            (true, 0) | (false, 1) => false,
            (true, 2) => {
                g = reflect_peak(&g, w, 1)?;
                true
            }
            (false, -1) => {
                g = reflect_peak(&g, w, 0)?;
                true
            }
            _ => return Err(Error::Inconsistent),
        };
        reflections.push(reflected);
    }
    Ok((g, BuildTrace { start, reflections }))
}

/// m * 2^(2m-1), the bound on |B_x^{-1}(g)|.
pub fn build_preimage_bound(layout: &LinearLayout) -> u128 {
    let m = layout.rows() as u32;
    (m as u128) << (2 * m - 1)
}

/// Largest fiber of B_x over the members of `functions` that have a zero on
/// W_x^0.
pub fn max_build_preimage(functions: &[HeightFunction], x: usize) -> Result<usize> {
    let mut fibers: BTreeMap<Vec<i64>, usize> = BTreeMap::new();
    for f in functions {
        match build_wall(f, x) {
            Ok(g) => *fibers.entry(g.values).or_default() += 1,
            Err(Error::NoZeroOnColumn(_)) => {}
            Err(e) => return Err(e),
        }
    }
    Ok(fibers.values().copied().max().unwrap_or(0))
}

/// The class [f]: images of f under every composite of wall flips that stay
/// in Hom, sorted and deduplicated.
pub fn wall_class(f: &HeightFunction) -> Result<Vec<HeightFunction>> {
    let layout = LinearLayout::new(&f.torus)?;
    let positions = layout.profile(f).positions;
    if positions.len() >= 32 {
        return Err(Error::Precondition(format!("{} walls is too many to expand", positions.len())));
    }
    let mut class = BTreeSet::new();
    for mask in 0u64..(1 << positions.len()) {
        let mut g = f.clone();
        for (k, &x) in positions.iter().enumerate() {
            if mask >> k & 1 == 1 {
                g = flip_wall(&g, x)?;
            }
        }
        if layout.in_hom(&g) {
            class.insert(g.values);
        }
    }
    Ok(class
        .into_iter()
        .map(|values| HeightFunction { torus: f.torus.clone(), values, model: f.model })
        .collect())
}

/// β and γ for the audit predicates; defaults satisfy γ > 9β.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct WallParams {
    pub beta: f64,
    pub gamma: f64,
}

impl Default for WallParams {
    fn default() -> Self {
        WallParams { beta: 0.02, gamma: 0.2 }
    }
}

impl WallParams {
    /// Ω_{low,η}: range(f) <= η n^β.
    pub fn is_low(&self, layout: &LinearLayout, f: &HeightFunction, eta: f64) -> bool {
        range_of(f) as f64 <= eta * (layout.columns() as f64).powf(self.beta)
    }

    /// Ω_t: at least n^(1-β) m / 2 vertices at height t.
    pub fn is_level_heavy(&self, layout: &LinearLayout, f: &HeightFunction, t: i64) -> bool {
        let hits = f.values.iter().filter(|&&v| v == t).count() as f64;
        hits >= 0.5 * (layout.columns() as f64).powf(1.0 - self.beta) * layout.rows() as f64
    }

    /// Ω_w: |W(f)| <= n^γ.
    pub fn has_few_walls(&self, layout: &LinearLayout, profile: &WallProfile) -> bool {
        profile.len() as f64 <= (layout.columns() as f64).powf(self.gamma)
    }

    /// Ω_b: |Σ s| > |W| - n^(γ-β)/8.
    pub fn is_unbalanced(&self, layout: &LinearLayout, profile: &WallProfile) -> bool {
        profile.balance().abs() as f64 > profile.len() as f64 - (layout.columns() as f64).powf(self.gamma - self.beta) / 8.0
    }
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct WallAudit {
    pub total: u64,
    pub wall_counts: BTreeMap<usize, u64>,
    pub balances: BTreeMap<i64, u64>,
    pub low_1: u64,
    pub low_2: u64,
    pub level_zero: u64,
    pub few_walls: u64,
    pub unbalanced: u64,
}

impl WallAudit {
    fn merge(mut self, other: WallAudit) -> WallAudit {
        self.total += other.total;
        for (k, c) in other.wall_counts {
            *self.wall_counts.entry(k).or_default() += c;
        }
        for (k, c) in other.balances {
            *self.balances.entry(k).or_default() += c;
        }
        self.low_1 += other.low_1;
        self.low_2 += other.low_2;
        self.level_zero += other.level_zero;
        self.few_walls += other.few_walls;
        self.unbalanced += other.unbalanced;
        self
    }
}

/// Exhaustive wall statistics over Hom(G, {base}, 0).
pub fn wall_audit(bc: &BoundaryCondition, params: WallParams, budget: Budget) -> Result<WallAudit> {
    let layout = LinearLayout::from_bc(bc)?;
    let all = enumerate_with_budget(bc, Model::Hom, budget)?;
    Ok(all
        .par_iter()
        .fold(WallAudit::default, |mut acc, f| {
            let profile = layout.profile(f);
            acc.total += 1;
            *acc.wall_counts.entry(profile.len()).or_default() += 1;
            *acc.balances.entry(profile.balance()).or_default() += 1;
            acc.low_1 += params.is_low(&layout, f, 1.0) as u64;
            acc.low_2 += params.is_low(&layout, f, 2.0) as u64;
            acc.level_zero += params.is_level_heavy(&layout, f, 0) as u64;
            acc.few_walls += params.has_few_walls(&layout, &profile) as u64;
            acc.unbalanced += params.is_unbalanced(&layout, &profile) as u64;
            acc
        })
        .reduce(WallAudit::default, WallAudit::merge))
}

/// Checks `validate` under the one-point condition at the base.
pub fn is_valid_one_point(f: &HeightFunction) -> Result<bool> {
    let bc = BoundaryCondition::one_point(&f.torus, 0)?;
    Ok(validate(f, &bc).is_valid())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn strip(n: usize) -> (TorusSpec, BoundaryCondition) {
        let t = TorusSpec::new(&[2, n]).unwrap();
        let bc = BoundaryCondition::one_point(&t, 0).unwrap();
        (t, bc)
    }

    #[test]
    fn parity_function_has_a_wall_everywhere() {
        let (t, bc) = strip(8);
        let p = detect_walls(&HeightFunction::parity_function(&t), &bc).unwrap();
        assert_eq!(p.positions, vec![0, 2, 4, 6]);
        assert_eq!(p.heights, vec![0; 4]);
        assert_eq!(p.signs, vec![1; 4]);
    }

    #[test]
    fn wall_sets_have_m_vertices() {
        let (t, _) = strip(6);
        let layout = LinearLayout::new(&t).unwrap();
        assert_eq!(layout.rows(), 2);
        for x in layout.sites() {
            assert_eq!(layout.w0(x).len(), 2);
            assert_eq!(layout.w1(x).len(), 2);
            assert_eq!(layout.building_order(x, layout.w0(x)[0]).len(), 4);
        }
        assert_eq!(layout.w1(4), vec![layout.vertex(0, 5), layout.vertex(1, 0)]);
    }

    #[test]
    fn non_one_point_bc_is_rejected() {
        let (t, _) = strip(6);
        let bc = BoundaryCondition::zero(&t).unwrap();
        assert_eq!(LinearLayout::from_bc(&bc).unwrap_err(), Error::NotLinearLayout);
        let small = TorusSpec::new(&[2, 2]).unwrap();
        assert_eq!(LinearLayout::new(&small).unwrap_err(), Error::NotLinearLayout);
    }

    #[test]
    fn peak_at_its_own_level_is_empty() {
        let (t, _) = strip(6);
        let f = HeightFunction::parity_function(&t);
        assert_eq!(reflect_peak(&f, 3, f.at(3)).unwrap(), f);
        assert_eq!(reflect_peak(&f, 0, 1).unwrap_err(), Error::BoundaryInPeak);
    }

    #[test]
    fn flip_half_at_zero_negates() {
        let (t, _) = strip(6);
        let f = HeightFunction::parity_function(&t);
        let g = flip_half(&f, 0).unwrap();
        assert!(g.values.iter().zip(&f.values).all(|(a, b)| *a == -*b));
        assert_eq!(flip_half(&f, 1).unwrap_err().to_string(), "precondition failed: flip height 1 must be even");
    }

    #[test]
    fn flip_wall_shifts_the_right_part() {
        let (t, _) = strip(8);
        let f = HeightFunction::parity_function(&t);
        let g = flip_wall(&f, 2).unwrap();
        let layout = LinearLayout::new(&t).unwrap();
        assert!(layout.in_relaxed_class(&g));
        // The seam values 0 and 1 become 0 and -1, so this flip stays in Hom.
        assert!(layout.in_hom(&g));
        let p = layout.profile(&g);
        // Only the flipped wall changes sign: everything right of it moves together.
        assert_eq!(p.signs, vec![1, -1, 1, 1]);
        assert_eq!(flip_wall(&g, 2).unwrap(), f);
    }

    #[test]
    fn mismatched_heights_are_rejected() {
        let (t, _) = strip(8);
        let f = HeightFunction::parity_function(&t);
        let g = flip_wall(&f, 4).unwrap();
        // Walls at 0, 2, 4 have height 0; the wall at 6 now sits at height -2.
        assert_eq!(LinearLayout::new(&t).unwrap().profile(&g).heights, vec![0, 0, 0, -2]);
        assert_eq!(reflect_between_walls(&g, 0, 3).unwrap_err(), Error::HeightMismatch);
    }

    #[test]
    fn build_wall_is_identity_on_a_wall() {
        let (t, _) = strip(6);
        let f = HeightFunction::parity_function(&t);
        let (g, trace) = build_wall_traced(&f, 2).unwrap();
        assert_eq!(g, f);
        assert_eq!(trace.reflections, vec![false; 3]);
        let lifted = HeightFunction::constant(&t, 5, Model::Hom);
        assert_eq!(build_wall(&lifted, 2).unwrap_err(), Error::NoZeroOnColumn(2));
    }

    #[test]
    fn build_wall_lifts_single_valleys() {
        let (t, _) = strip(6);
        let neg = flip_half(&HeightFunction::parity_function(&t), 0).unwrap();
        let (g, trace) = build_wall_traced(&neg, 2).unwrap();
        let layout = LinearLayout::new(&t).unwrap();
        assert_eq!(layout.wall_at(&g, 2), Some((0, 1)));
        assert_eq!(trace.reflections.iter().filter(|&&r| r).count(), 2);
    }

    #[test]
    fn preimage_bound_for_two_rows() {
        let (t, _) = strip(6);
        assert_eq!(build_preimage_bound(&LinearLayout::new(&t).unwrap()), 16);
    }
}
