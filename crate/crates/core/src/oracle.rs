//! Exhaustive enumeration of Hom(G,B,μ) and Lip(G,B,μ) with exact counts.
//!
//! The search visits vertices in breadth-first order from B and keeps, for
//! every unassigned vertex, the interval of values still compatible with the
//! assigned ones through the graph metric. On bipartite graphs a partial
//! assignment extends iff all pairwise gaps are at most the distance, so the
//! search never backtracks out of a dead end and its node count is at most
//! (number of functions) x (number of vertices).

use std::collections::BTreeMap;
use std::ops::ControlFlow;

use num_bigint::BigUint;
use num_rational::{BigRational, Ratio};
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::height::{extremal_functions, range_of, validate, BoundaryCondition, HeightFunction, Model};
use crate::torus::Vertex;

pub const DEFAULT_BUDGET: u64 = 100_000_000;

/// Node budget; `HEIGHTLAB_BUDGET` overrides the default when read through
/// [`Budget::from_env`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Budget(pub u64);

impl Default for Budget {
    fn default() -> Self {
        Budget(DEFAULT_BUDGET)
    }
}

impl Budget {
    pub fn from_env() -> Self {
        std::env::var("HEIGHTLAB_BUDGET")
            .ok()
            .and_then(|s| s.trim().parse::<f64>().ok())
            .map(|x| Budget(x as u64))
            .unwrap_or_default()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SearchStats {
    pub emitted: u64,
    pub nodes: u64,
    pub stopped_early: bool,
}

/// Enumerates every function on `graph` with |f(u)-f(w)| = 1 (Hom) or <= 1
/// (Lip) across edges and f(v) in `windows[v]` where given. Under Hom the
/// value parity at v is `class[v]`.
pub fn search_graph<F>(
    graph: &Graph,
    windows: &[Option<(i64, i64)>],
    class: Option<&[u8]>,
    model: Model,
    budget: Budget,
    mut visit: F,
) -> Result<SearchStats>
where
    F: FnMut(&[i64]) -> ControlFlow<()>,
{
    let n = graph.vertex_count();
    let dist = graph.distance_matrix();
    let mut sources: Vec<Vertex> = (0..n).filter(|&v| windows[v].is_some()).collect();
    if sources.is_empty() {
        return Err(Error::EmptyBoundary);
    }
    sources.sort_unstable();
    let order = graph.bfs_order(&sources);
    let big = i64::MAX / 4;
    let mut lo = vec![-big; n];
    let mut hi = vec![big; n];
    for &b in &sources {
        let (l, h) = windows[b].unwrap();
        for u in 0..n {
            let d = dist[u * n + b];
            if d == u32::MAX {
                continue;
            }
            lo[u] = lo[u].max(l - d as i64);
            hi[u] = hi[u].min(h + d as i64);
        }
    }
    let step = match model {
        Model::Hom => 2,
        Model::Lip => 1,
    };
    let fix_parity = |lo: &mut i64, hi: &mut i64, v: usize| {
        if let (Model::Hom, Some(cls)) = (model, class) {
            let want = cls[v] as i64;
            if (*lo - want).rem_euclid(2) != 0 {
                *lo += 1;
            }
            if (*hi - want).rem_euclid(2) != 0 {
                *hi -= 1;
            }
        }
    };
    for v in 0..n {
        let (mut l, mut h) = (lo[v], hi[v]);
        fix_parity(&mut l, &mut h, v);
        lo[v] = l;
        hi[v] = h;
        if l > h {
            return Err(Error::InfeasibleBC(v));
        }
    }

    struct Frame {
        value: i64,
        undo_len: usize,
    }
    let mut values = vec![0i64; n];
    let mut undo: Vec<(usize, i64, i64)> = Vec::new();
    let mut stack: Vec<Frame> = Vec::with_capacity(n);
    let mut stats = SearchStats::default();
    let mut assigned = vec![false; n];

    // Iterative depth-first search over `order`.
    let mut depth = 0usize;
    let mut next_value: Option<i64> = None;
    loop {
        if depth == n {
            stats.emitted += 1;
            if let ControlFlow::Break(()) = visit(&values) {
                stats.stopped_early = true;
                return Ok(stats);
            }
            // Backtrack.
            depth -= 1;
            next_value = Some(stack.last().unwrap().value + step);
            let frame = stack.pop().unwrap();
            restore(&mut lo, &mut hi, &mut undo, frame.undo_len);
            assigned[order[depth]] = false;
            continue;
        }
        let v = order[depth];
        let candidate = next_value.take().unwrap_or(lo[v]);
        if candidate > hi[v] {
            if depth == 0 {
                return Ok(stats);
            }
            depth -= 1;
            let frame = stack.pop().unwrap();
            restore(&mut lo, &mut hi, &mut undo, frame.undo_len);
            assigned[order[depth]] = false;
            next_value = Some(frame.value + step);
            continue;
        }
        stats.nodes += 1;
        if stats.nodes > budget.0 {
            return Err(Error::BudgetExceeded { budget: budget.0, visited: stats.nodes, emitted: stats.emitted });
        }
        let undo_len = undo.len();
        values[v] = candidate;
        assigned[v] = true;
        for u in 0..n {
            if assigned[u] {
                continue;
            }
            let d = dist[u * n + v];
            if d == u32::MAX {
                continue;
            }
            let nl = lo[u].max(candidate - d as i64);
            let nh = hi[u].min(candidate + d as i64);
            if nl != lo[u] || nh != hi[u] {
                undo.push((u, lo[u], hi[u]));
                lo[u] = nl;
                hi[u] = nh;
            }
        }
        stack.push(Frame { value: candidate, undo_len });
        depth += 1;
    }
}

fn restore(lo: &mut [i64], hi: &mut [i64], undo: &mut Vec<(usize, i64, i64)>, len: usize) {
    while undo.len() > len {
        let (u, l, h) = undo.pop().unwrap();
        lo[u] = l;
        hi[u] = h;
    }
}

fn bc_windows(bc: &BoundaryCondition) -> Vec<Option<(i64, i64)>> {
    (0..bc.torus().vertex_count()).map(|v| bc.window(v)).collect()
}

fn bc_classes(bc: &BoundaryCondition) -> Vec<u8> {
    (0..bc.torus().vertex_count()).map(|v| bc.class_of(v)).collect()
}

/// Streams every member of Hom(G,B,μ) (or Lip) as a value slice indexed by
/// vertex. Order is lexicographic along the breadth-first visit order from B.
pub fn for_each_function<F>(bc: &BoundaryCondition, model: Model, budget: Budget, visit: F) -> Result<SearchStats>
where
    F: FnMut(&[i64]) -> ControlFlow<()>,
{
    extremal_functions(bc, model)?;
    let graph = bc.torus().to_graph();
    let classes = bc_classes(bc);
    search_graph(&graph, &bc_windows(bc), Some(&classes), model, budget, visit)
}

pub fn enumerate(bc: &BoundaryCondition, model: Model) -> Result<Vec<HeightFunction>> {
    enumerate_with_budget(bc, model, Budget::from_env())
}

pub fn enumerate_with_budget(bc: &BoundaryCondition, model: Model, budget: Budget) -> Result<Vec<HeightFunction>> {
    let mut out = Vec::new();
    let torus = bc.torus().clone();
    for_each_function(bc, model, budget, |vals| {
        out.push(HeightFunction { torus: torus.clone(), values: vals.to_vec(), model });
        ControlFlow::Continue(())
    })?;
    Ok(out)
}

pub fn count(bc: &BoundaryCondition, model: Model) -> Result<BigUint> {
    let stats = for_each_function(bc, model, Budget::from_env(), |_| ControlFlow::Continue(()))?;
    Ok(BigUint::from(stats.emitted))
}

/// Every assignment inside the extremal sandwich, filtered by `validate`.
/// Slow; used to cross-check the propagating search.
pub fn enumerate_naive(bc: &BoundaryCondition, model: Model) -> Result<Vec<HeightFunction>> {
    let (lo, hi) = extremal_functions(bc, model)?;
    let n = bc.torus().vertex_count();
    let mut cur = lo.values.clone();
    let mut out = Vec::new();
    loop {
        let f = HeightFunction { torus: bc.torus().clone(), values: cur.clone(), model };
        if validate(&f, bc).is_valid() {
            out.push(f);
        }
        let mut i = 0;
        loop {
            if i == n {
                return Ok(out);
            }
            if cur[i] < hi.values[i] {
                cur[i] += 1;
                break;
            }
            cur[i] = lo.values[i];
            i += 1;
        }
    }
}

/// Observable evaluated on a height function.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Statistic {
    HeightAt(Vertex),
    Range,
    LevelSetLength(Vertex),
    EvenZeroFraction,
    WallCount,
}

/// Statistic values are exact rationals; integer-valued statistics have
/// denominator 1.
pub type StatValue = Ratio<i64>;

impl Statistic {
    pub fn eval(&self, f: &HeightFunction, bc: &BoundaryCondition) -> Result<StatValue> {
        Ok(match self {
            Statistic::HeightAt(v) => Ratio::from_integer(f.values[*v]),
            Statistic::Range => Ratio::from_integer(range_of(f) as i64),
            Statistic::LevelSetLength(x) => {
                let len = crate::cutsets::level_set(f, *x, bc)?.map(|g| g.edges().len()).unwrap_or(0);
                Ratio::from_integer(len as i64)
            }
            Statistic::EvenZeroFraction => {
                let even: Vec<Vertex> = (0..f.torus.vertex_count()).filter(|&v| bc.is_even(v)).collect();
                let nonzero = even.iter().filter(|&&v| f.values[v] != 0).count();
                Ratio::new(nonzero as i64, even.len() as i64)
            }
            Statistic::WallCount => {
                Ratio::from_integer(crate::walls::detect_walls(f, bc)?.positions.len() as i64)
            }
        })
    }

    /// Parses `height@x`, `range`, `levelset@x`, `even-zero`, `walls`, where
    /// `x` is a linear index or comma-separated coordinates.
    pub fn parse(text: &str, torus: &crate::torus::TorusSpec) -> Result<Self> {
        let vertex = |s: &str| -> Result<Vertex> {
            if s.contains(',') {
                let coords: Vec<usize> = s
                    .split(',')
                    .map(|p| p.trim().parse().map_err(|_| Error::Parse(format!("bad coordinate '{p}'"))))
                    .collect::<Result<_>>()?;
                torus.index(&coords)
            } else {
                let v: usize = s.trim().parse().map_err(|_| Error::Parse(format!("bad vertex '{s}'")))?;
                torus.check_vertex(v)?;
                Ok(v)
            }
        };
        let t = text.trim();
        if let Some(rest) = t.strip_prefix("height@") {
            return Ok(Statistic::HeightAt(vertex(rest)?));
        }
        if let Some(rest) = t.strip_prefix("levelset@") {
            return Ok(Statistic::LevelSetLength(vertex(rest)?));
        }
        match t {
            "range" => Ok(Statistic::Range),
            "even-zero" => Ok(Statistic::EvenZeroFraction),
            "walls" => Ok(Statistic::WallCount),
            _ => Err(Error::Parse(format!("unknown statistic '{t}'"))),
        }
    }

    pub fn label(&self) -> String {
        match self {
            Statistic::HeightAt(v) => format!("height@{v}"),
            Statistic::Range => "range".into(),
            Statistic::LevelSetLength(x) => format!("levelset@{x}"),
            Statistic::EvenZeroFraction => "even-zero".into(),
            Statistic::WallCount => "walls".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Distribution {
    pub support: BTreeMap<StatValue, BigUint>,
    pub total: BigUint,
}

impl Distribution {
    pub fn add(&mut self, value: StatValue) {
        *self.support.entry(value).or_insert_with(BigUint::zero) += 1u32;
        self.total += 1u32;
    }

    pub fn merge(&mut self, other: &Distribution) {
        for (k, c) in &other.support {
            *self.support.entry(*k).or_insert_with(BigUint::zero) += c;
        }
        self.total += &other.total;
    }

    pub fn count_of(&self, value: StatValue) -> BigUint {
        self.support.get(&value).cloned().unwrap_or_default()
    }

    pub fn probability(&self, value: StatValue) -> BigRational {
        BigRational::new(self.count_of(value).into(), self.total.clone().into())
    }

    /// Law of -X.
    pub fn negated(&self) -> Distribution {
        Distribution {
            support: self.support.iter().map(|(k, c)| (-*k, c.clone())).collect(),
            total: self.total.clone(),
        }
    }

    pub fn mean(&self) -> BigRational {
        let mut acc = BigRational::zero();
        for (k, c) in &self.support {
            let v = BigRational::new((*k.numer()).into(), (*k.denom()).into());
            acc += v * BigRational::from_integer(c.clone().into());
        }
        acc / BigRational::from_integer(self.total.clone().into())
    }

    /// (value, probability) pairs as floats, for comparisons with samples.
    pub fn as_f64(&self) -> Vec<(StatValue, f64)> {
        let total = self.total.to_f64().unwrap_or(f64::NAN);
        self.support.iter().map(|(k, c)| (*k, c.to_f64().unwrap_or(f64::NAN) / total)).collect()
    }
}

pub fn exact_distribution(bc: &BoundaryCondition, model: Model, stat: &Statistic) -> Result<Distribution> {
    let mut dist = Distribution::default();
    let torus = bc.torus().clone();
    let mut failure = None;
    for_each_function(bc, model, Budget::from_env(), |vals| {
        let f = HeightFunction { torus: torus.clone(), values: vals.to_vec(), model };
        match stat.eval(&f, bc) {
            Ok(x) => {
                dist.add(x);
                ControlFlow::Continue(())
            }
            Err(e) => {
                failure = Some(e);
                ControlFlow::Break(())
            }
        }
    })?;
    match failure {
        Some(e) => Err(e),
        None => Ok(dist),
    }
}

pub fn exact_probability<P>(bc: &BoundaryCondition, model: Model, mut predicate: P) -> Result<BigRational>
where
    P: FnMut(&HeightFunction) -> bool,
{
    let torus = bc.torus().clone();
    let mut hits = 0u64;
    let stats = for_each_function(bc, model, Budget::from_env(), |vals| {
        let f = HeightFunction { torus: torus.clone(), values: vals.to_vec(), model };
        if predicate(&f) {
            hits += 1;
        }
        ControlFlow::Continue(())
    })?;
    if stats.emitted == 0 {
        return Ok(BigRational::zero());
    }
    Ok(BigRational::new(hits.into(), stats.emitted.into()))
}

/// Shorthand for an exact rational p/q.
pub fn ratio(p: i64, q: i64) -> BigRational {
    BigRational::new(p.into(), q.into())
}

pub fn one() -> BigRational {
    BigRational::one()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::torus::TorusSpec;

    fn t(d: &[usize]) -> TorusSpec {
        TorusSpec::new(d).unwrap()
    }

    #[test]
    fn counts() {
        let c = t(&[6]);
        let bc = BoundaryCondition::one_point(&c, 0).unwrap();
        assert_eq!(count(&bc, Model::Hom).unwrap(), BigUint::from(20u32));
        let s = t(&[2, 2]);
        let bc = BoundaryCondition::one_point(&s, 0).unwrap();
        assert_eq!(count(&bc, Model::Hom).unwrap(), BigUint::from(6u32));
        assert_eq!(count(&bc, Model::Lip).unwrap(), BigUint::from(19u32));
    }

    #[test]
    fn antipode_distribution() {
        let c = t(&[6]);
        let bc = BoundaryCondition::one_point(&c, 0).unwrap();
        let d = exact_distribution(&bc, Model::Hom, &Statistic::HeightAt(3)).unwrap();
        let got: Vec<(i64, u32)> =
            d.support.iter().map(|(k, c)| (k.to_integer(), c.to_u32().unwrap())).collect();
        assert_eq!(got, vec![(-3, 1), (-1, 9), (1, 9), (3, 1)]);
        assert_eq!(d.total, BigUint::from(20u32));
        assert_eq!(d.negated(), d);
        let p = exact_probability(&bc, Model::Hom, |f| f.values[3] == 3).unwrap();
        assert_eq!(p, ratio(1, 20));
        assert_eq!(exact_probability(&bc, Model::Hom, |_| true).unwrap(), one());
    }

    #[test]
    fn square_range_distribution() {
        let s = t(&[2, 2]);
        let bc = BoundaryCondition::one_point(&s, 0).unwrap();
        let d = exact_distribution(&bc, Model::Hom, &Statistic::Range).unwrap();
        assert_eq!(d.count_of(Ratio::from_integer(2)), BigUint::from(2u32));
        assert_eq!(d.count_of(Ratio::from_integer(3)), BigUint::from(4u32));
        assert_eq!(exact_probability(&bc, Model::Hom, |f| range_of(f) == 2).unwrap(), ratio(1, 3));
    }

    #[test]
    fn even_zero_fraction_of_walk() {
        let c = t(&[6]);
        let bc = BoundaryCondition::one_point(&c, 0).unwrap();
        let f = HeightFunction::new(c, vec![0, 1, 2, 1, 0, -1], Model::Hom).unwrap();
        assert_eq!(Statistic::EvenZeroFraction.eval(&f, &bc).unwrap(), Ratio::new(1, 3));
    }

    #[test]
    fn budget_is_enforced() {
        let a = t(&[4, 4]);
        let bc = BoundaryCondition::one_point(&a, 0).unwrap();
        let err = for_each_function(&bc, Model::Hom, Budget(50), |_| ControlFlow::Continue(())).unwrap_err();
        assert!(matches!(err, Error::BudgetExceeded { budget: 50, .. }));
    }

    #[test]
    fn search_matches_naive_on_small_instances() {
        for dims in [vec![6], vec![2, 2], vec![2, 4], vec![4]] {
            let tor = t(&dims);
            for model in [Model::Hom, Model::Lip] {
                let bc = BoundaryCondition::one_point(&tor, 0).unwrap();
                let mut a: Vec<Vec<i64>> = enumerate(&bc, model).unwrap().into_iter().map(|f| f.values).collect();
                let mut b: Vec<Vec<i64>> =
                    enumerate_naive(&bc, model).unwrap().into_iter().map(|f| f.values).collect();
                a.sort();
                b.sort();
                assert_eq!(a, b, "{dims:?} {model}");
            }
        }
    }

    #[test]
    fn parse_statistics() {
        let a = t(&[4, 4]);
        assert_eq!(Statistic::parse("height@1,1", &a).unwrap(), Statistic::HeightAt(5));
        assert_eq!(Statistic::parse("range", &a).unwrap(), Statistic::Range);
        assert_eq!(Statistic::parse("levelset@3", &a).unwrap(), Statistic::LevelSetLength(3));
        assert!(Statistic::parse("height@99", &a).is_err());
    }
}
