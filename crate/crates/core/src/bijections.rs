//! The Yadin bijection Hom(G x Z_2) -> Lip(G) and the mod-3 coloring map.
//!
//! G x Z_2 is stored as the torus with dims `[2] ++ G.dims`, so the layer is
//! axis 0 and `(v, layer)` has index `layer * |V[G]| + v`. The label `i` of
//! `(v, i)` is the parity of that vertex in G x Z_2, which puts every `(v, 0)`
//! in the even class.

use std::collections::BTreeSet;
use std::ops::ControlFlow;

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{grid_box, Graph};
use crate::height::{extremal_functions, range_of, BoundaryCondition, BoundaryValues, HeightFunction, Model};
use crate::oracle::{enumerate_with_budget, search_graph, Budget};
use crate::sampler::{cftp_sample, RandomSource};
use crate::torus::{TorusSpec, Vertex};

/// G x Z_2 for a torus G.
pub fn product_torus(base: &TorusSpec) -> Result<TorusSpec> {
    let mut dims = vec![2];
    dims.extend_from_slice(base.dims());
    TorusSpec::new(&dims)
}

/// Recovers G from G x Z_2.
pub fn base_torus(product: &TorusSpec) -> Result<TorusSpec> {
    let dims = product.dims();
    if dims.len() < 2 || dims[0] != 2 {
        return Err(Error::NotLifted);
    }
    TorusSpec::new(&dims[1..]).map_err(|_| Error::NotLifted)
}

/// Index in G x Z_2 of the copy of `v` with label `label`.
pub fn lifted_vertex(base: &TorusSpec, v: Vertex, label: u8) -> Vertex {
    let layer = (label ^ base.parity(v)) as usize;
    layer * base.vertex_count() + v
}

/// Value of the inverse map at label `label` above a vertex of height `g`.
fn lift_value(g: i64, label: u8) -> i64 {
    if g.rem_euclid(2) == label as i64 {
        g
    } else {
        g - 1
    }
}

/// A boundary condition on G together with its lift to G x Z_2.
#[derive(Debug, Clone)]
pub struct LiftedBC {
    pub base: BoundaryCondition,
    pub lifted: BoundaryCondition,
}

impl LiftedBC {
    /// Fixed μ lifts to both copies of B with μ_2; a zero-one family lifts to
    /// the label-0 copies with value 0.
    pub fn new(base: &BoundaryCondition) -> Result<Self> {
        let torus = base.torus();
        let product = product_torus(torus)?;
        let pairs: Vec<(Vertex, i64)> = match base.values() {
            BoundaryValues::Fixed(_) => base
                .fixed_pairs()?
                .into_iter()
                .flat_map(|(v, mu)| (0..2u8).map(move |label| (v, mu, label)))
                .map(|(v, mu, label)| (lifted_vertex(torus, v, label), lift_value(mu, label)))
                .collect(),
            BoundaryValues::ZeroOne => base.vertices().iter().map(|&v| (lifted_vertex(torus, v, 0), 0)).collect(),
        };
        let lifted = BoundaryCondition::explicit(&product, &pairs)?;
        Ok(LiftedBC { base: base.clone(), lifted })
    }

    /// (Lip(G,B,μ) non-empty, Hom(G_2,B_2,μ_2) non-empty).
    pub fn legality(&self) -> (bool, bool) {
        let lip = extremal_functions(&self.base, Model::Lip).is_ok();
        let hom = self.lifted.parity_consistent() && extremal_functions(&self.lifted, Model::Hom).is_ok();
        (lip, hom)
    }
}

/// T(f)(v) = max(f(v,0), f(v,1)).
pub fn yadin_forward(f: &HeightFunction) -> Result<HeightFunction> {
    let base = base_torus(&f.torus)?;
    let n = base.vertex_count();
    let values = (0..n).map(|v| f.at(v).max(f.at(v + n))).collect();
    HeightFunction::new(base, values, Model::Lip)
}

/// S(g)(v, i) = g(v) when i = g(v) mod 2, g(v) - 1 otherwise.
pub fn yadin_inverse(g: &HeightFunction) -> Result<HeightFunction> {
    let product = product_torus(&g.torus)?;
    let values = (0..product.vertex_count())
        .map(|w| lift_value(g.at(w % g.torus.vertex_count()), product.parity(w)))
        .collect();
    HeightFunction::new(product, values, Model::Hom)
}

/// Uniform Lip(G,B,μ) sample: CFTP on the lift, then the forward map.
pub fn sample_lip_via_lift(bc: &BoundaryCondition, rng: RandomSource) -> Result<HeightFunction> {
    let lift = LiftedBC::new(bc)?;
    yadin_forward(&cftp_sample(&lift.lifted, Model::Hom, rng)?)
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct BijectionReport {
    pub lip_count: u64,
    pub hom_count: u64,
    /// Hom members whose image is not a valid Lip member or whose inverse
    /// differs.
    pub forward_failures: u64,
    /// Lip members whose lift is not a valid Hom member or whose image differs.
    pub inverse_failures: u64,
    /// Violations of range(T f) = range(f) - 1.
    pub range_failures: u64,
    /// Violations of max T f = max f and min T f = min f + 1.
    pub extreme_failures: u64,
}

impl BijectionReport {
    pub fn is_bijection(&self) -> bool {
        self.lip_count == self.hom_count
            && self.forward_failures == 0
            && self.inverse_failures == 0
            && self.range_failures == 0
            && self.extreme_failures == 0
    }
}

/// Exhaustive roundtrip of T and S between Hom(G_2, B_2, μ_2) and Lip(G, B, μ).
pub fn bijection_check(bc: &BoundaryCondition, budget: Budget) -> Result<BijectionReport> {
    let lift = LiftedBC::new(bc)?;
    let lips = enumerate_with_budget(bc, Model::Lip, budget)?;
    let homs = enumerate_with_budget(&lift.lifted, Model::Hom, budget)?;
    let lip_set: BTreeSet<&[i64]> = lips.iter().map(|g| g.values.as_slice()).collect();
    let hom_set: BTreeSet<&[i64]> = homs.iter().map(|f| f.values.as_slice()).collect();
    let mut report = BijectionReport { lip_count: lips.len() as u64, hom_count: homs.len() as u64, ..Default::default() };
    for f in &homs {
        let g = yadin_forward(f)?;
        if !lip_set.contains(g.values.as_slice()) || yadin_inverse(&g)? != *f {
            report.forward_failures += 1;
        }
        if range_of(&g) + 1 != range_of(f) {
            report.range_failures += 1;
        }
        let (fmin, fmax) = min_max(&f.values);
        let (gmin, gmax) = min_max(&g.values);
        if gmax != fmax || gmin != fmin + 1 {
            report.extreme_failures += 1;
        }
    }
    for g in &lips {
        let f = yadin_inverse(g)?;
        if !hom_set.contains(f.values.as_slice()) || yadin_forward(&f)? != *g {
            report.inverse_failures += 1;
        }
    }
    Ok(report)
}

fn min_max(values: &[i64]) -> (i64, i64) {
    let min = values.iter().copied().min().unwrap_or(0);
    let max = values.iter().copied().max().unwrap_or(0);
    (min, max)
}

/// Proper 3-coloring, one color in {0, 1, 2} per vertex.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Coloring {
    pub colors: Vec<u8>,
}

impl Coloring {
    pub fn is_proper(&self, graph: &Graph) -> bool {
        graph.edges().iter().all(|&(a, b)| self.colors[a] != self.colors[b])
    }
}

/// f mod 3.
pub fn to_coloring(f: &HeightFunction) -> Coloring {
    Coloring { colors: mod3(&f.values) }
}

fn mod3(values: &[i64]) -> Vec<u8> {
    values.iter().map(|&v| v.rem_euclid(3) as u8).collect()
}

/// Fraction of even-class vertices whose value (or color) is non-zero.
pub fn even_zero_fraction(parity: &[u8], values: &[i64]) -> BigRational {
    let evens: Vec<usize> = (0..parity.len()).filter(|&v| parity[v] == 0).collect();
    let nonzero = evens.iter().filter(|&&v| values[v] != 0).count();
    BigRational::new(BigInt::from(nonzero), BigInt::from(evens.len().max(1)))
}

/// Where a coloring check runs: a non-periodic box or a torus, with fixed
/// boundary values.
#[derive(Debug, Clone)]
pub enum ColoringDomain {
    Box { dims: Vec<usize>, boundary: Vec<(Vertex, i64)> },
    Torus(BoundaryCondition),
}

impl ColoringDomain {
    fn graph(&self) -> Graph {
        match self {
            ColoringDomain::Box { dims, .. } => grid_box(dims),
            ColoringDomain::Torus(bc) => bc.torus().to_graph(),
        }
    }

    fn boundary(&self) -> Result<Vec<(Vertex, i64)>> {
        match self {
            ColoringDomain::Box { boundary, .. } => Ok(boundary.clone()),
            ColoringDomain::Torus(bc) => bc.fixed_pairs(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ColoringReport {
    pub hom_count: u64,
    pub coloring_count: u64,
    pub image_count: u64,
    pub injective: bool,
    pub surjective: bool,
    /// Smallest coloring without a preimage, if any.
    pub missing: Option<Vec<u8>>,
}

/// Compares Hom(G,B,μ) under f -> f mod 3 with col(G,B,μ mod 3).
pub fn coloring_bijectivity_check(domain: &ColoringDomain, budget: Budget) -> Result<ColoringReport> {
    let graph = domain.graph();
    let boundary = domain.boundary()?;
    let n = graph.vertex_count();
    if boundary.is_empty() {
        return Err(Error::EmptyBoundary);
    }
    let mut windows = vec![None; n];
    for &(v, mu) in &boundary {
        if v >= n {
            return Err(Error::VertexOutOfRange(v));
        }
        windows[v] = Some((mu, mu));
    }
    let (b0, m0) = boundary[0];
    let anchor = (m0 - graph.parity(b0) as i64).rem_euclid(2) as u8;
    let class: Vec<u8> = (0..n).map(|v| graph.parity(v) ^ anchor).collect();
    let mut image = BTreeSet::new();
    let stats = search_graph(&graph, &windows, Some(&class), Model::Hom, budget, |vals| {
        image.insert(mod3(vals));
        ControlFlow::Continue(())
    })?;
    let fixed: Vec<(Vertex, u8)> = boundary.iter().map(|&(v, mu)| (v, mu.rem_euclid(3) as u8)).collect();
    let colorings = enumerate_colorings(&graph, &fixed, budget)?;
    let missing = colorings.iter().find(|c| !image.contains(*c)).cloned();
    Ok(ColoringReport {
        hom_count: stats.emitted,
        coloring_count: colorings.len() as u64,
        image_count: image.len() as u64,
        injective: image.len() as u64 == stats.emitted,
        surjective: missing.is_none(),
        missing,
    })
}

/// Every proper 3-coloring agreeing with `fixed`, in lexicographic order.
pub fn enumerate_colorings(graph: &Graph, fixed: &[(Vertex, u8)], budget: Budget) -> Result<BTreeSet<Vec<u8>>> {
    let n = graph.vertex_count();
    let mut preset = vec![None; n];
    for &(v, c) in fixed {
        preset[v] = Some(c);
    }
    let sources: Vec<Vertex> = fixed.iter().map(|p| p.0).collect();
    let order = graph.bfs_order(&sources);
    let mut colors = vec![u8::MAX; n];
    let mut out = BTreeSet::new();
    let mut nodes = 0u64;
    fn go(
        k: usize,
        order: &[Vertex],
        graph: &Graph,
        preset: &[Option<u8>],
        colors: &mut [u8],
        out: &mut BTreeSet<Vec<u8>>,
        nodes: &mut u64,
        budget: Budget,
    ) -> Result<()> {
        *nodes += 1;
        if *nodes > budget.0 {
            return Err(Error::BudgetExceeded { budget: budget.0, visited: *nodes, emitted: out.len() as u64 });
        }
        if k == order.len() {
            out.insert(colors.to_vec());
            return Ok(());
        }
        let v = order[k];
        for c in 0..3u8 {
            if preset[v].is_some_and(|p| p != c) || graph.neighbors(v).iter().any(|&w| colors[w] == c) {
                continue;
            }
            colors[v] = c;
            go(k + 1, order, graph, preset, colors, out, nodes, budget)?;
        }
        colors[v] = u8::MAX;
        Ok(())
    }
    go(0, &order, graph, &preset, &mut colors, &mut out, &mut nodes, budget)?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::height::validate;

    fn cycle(n: usize) -> TorusSpec {
        TorusSpec::new(&[n]).unwrap()
    }

    #[test]
    fn flat_lift_maps_to_zero() {
        let g = HeightFunction::constant(&cycle(4), 0, Model::Lip);
        let f = yadin_inverse(&g).unwrap();
        let t = &f.torus;
        for v in 0..4 {
            assert_eq!(f.at(lifted_vertex(&g.torus, v, 0)), 0);
            assert_eq!(f.at(lifted_vertex(&g.torus, v, 1)), -1);
        }
        assert_eq!(t.dims(), &[2, 4]);
        assert_eq!((range_of(&f), range_of(&yadin_forward(&f).unwrap())), (2, 1));
        assert_eq!(yadin_forward(&f).unwrap(), g);
    }

    #[test]
    fn checkerboard_lifts_to_a_valid_function() {
        let t = cycle(4);
        let g = HeightFunction::new(t.clone(), vec![0, 1, 0, 1], Model::Lip).unwrap();
        let f = yadin_inverse(&g).unwrap();
        let bc = LiftedBC::new(&BoundaryCondition::one_point(&t, 0).unwrap()).unwrap();
        assert!(validate(&f, &bc.lifted).is_valid());
        for v in 0..4 {
            assert_eq!(f.at(lifted_vertex(&t, v, (g.at(v) % 2) as u8)), g.at(v));
        }
    }

    #[test]
    fn non_product_is_rejected() {
        let f = HeightFunction::constant(&TorusSpec::new(&[4, 4]).unwrap(), 0, Model::Hom);
        assert_eq!(yadin_forward(&f).unwrap_err(), Error::NotLifted);
    }

    #[test]
    fn one_point_lift_has_two_points() {
        let t = cycle(4);
        let lift = LiftedBC::new(&BoundaryCondition::one_point(&t, 0).unwrap()).unwrap();
        assert_eq!(lift.lifted.fixed_pairs().unwrap(), vec![(0, 0), (4, -1)]);
        assert_eq!(lift.legality(), (true, true));
    }

    #[test]
    fn mod3_colors() {
        let t = TorusSpec::new(&[4]).unwrap();
        let f = HeightFunction::new(t, vec![-1, 0, 1, 2], Model::Hom).unwrap();
        assert_eq!(to_coloring(&f).colors, vec![2, 0, 1, 2]);
    }

    #[test]
    fn even_fraction_examples() {
        let t = cycle(6);
        let parity: Vec<u8> = (0..6).map(|v| t.parity(v)).collect();
        let walk = [0, 1, 2, 1, 0, -1];
        assert_eq!(even_zero_fraction(&parity, &walk), BigRational::new(1.into(), 3.into()));
        let p = HeightFunction::parity_function(&t);
        assert_eq!(even_zero_fraction(&parity, &p.values), BigRational::new(0.into(), 1.into()));
    }
}
