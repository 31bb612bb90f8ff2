//! Height functions, boundary conditions, validity checks and the extremal
//! (pointwise smallest and largest) functions of a boundary condition.

use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::torus::{TorusSpec, Vertex};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Model {
    #[serde(rename = "hom")]
    Hom,
    #[serde(rename = "lip")]
    Lip,
}

impl Model {
    /// Whether `a` and `b` may sit on adjacent vertices.
    pub fn adjacent_ok(self, a: i64, b: i64) -> bool {
        match self {
            Model::Hom => (a - b).abs() == 1,
            Model::Lip => (a - b).abs() <= 1,
        }
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Model::Hom => "hom",
            Model::Lip => "lip",
        })
    }
}

impl std::str::FromStr for Model {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hom" | "homomorphism" => Ok(Model::Hom),
            "lip" | "lipschitz" => Ok(Model::Lip),
            _ => Err(Error::Parse(format!("unknown model '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HeightFunction {
    pub torus: TorusSpec,
    pub values: Vec<i64>,
    pub model: Model,
}

impl HeightFunction {
    pub fn new(torus: TorusSpec, values: Vec<i64>, model: Model) -> Result<Self> {
        if values.len() != torus.vertex_count() {
            return Err(Error::Precondition(format!(
                "expected {} values, got {}",
                torus.vertex_count(),
                values.len()
            )));
        }
        Ok(HeightFunction { torus, values, model })
    }

    /// f(v) = parity(v).
    pub fn parity_function(torus: &TorusSpec) -> Self {
        let values = (0..torus.vertex_count()).map(|v| torus.parity(v) as i64).collect();
        HeightFunction { torus: torus.clone(), values, model: Model::Hom }
    }

    pub fn constant(torus: &TorusSpec, value: i64, model: Model) -> Self {
        HeightFunction { torus: torus.clone(), values: vec![value; torus.vertex_count()], model }
    }

    pub fn at(&self, v: Vertex) -> i64 {
        self.values[v]
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&HeightJson {
            dims: self.torus.dims().to_vec(),
            model: self.model,
            values: self.values.clone(),
        })
        .expect("height function serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: HeightJson = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        let torus = TorusSpec::new(&raw.dims)?;
        if torus.dims() != raw.dims.as_slice() {
            return Err(Error::Parse("dims must be ascending".into()));
        }
        HeightFunction::new(torus, raw.values, raw.model)
    }
}

#[derive(Serialize, Deserialize)]
struct HeightJson {
    dims: Vec<usize>,
    model: Model,
    values: Vec<i64>,
}

/// Number of distinct values.
pub fn range_of(f: &HeightFunction) -> usize {
    let mut vals = f.values.clone();
    vals.sort_unstable();
    vals.dedup();
    vals.len()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BcKind {
    Explicit,
    OnePoint,
    Zero,
    BoxBoundary,
    ZeroOneFamily,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BoundaryValues {
    /// μ(b) for each b, aligned with the sorted vertex list.
    Fixed(Vec<i64>),
    /// Every b independently takes a value in {0, 1}.
    ZeroOne,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundaryCondition {
    torus: TorusSpec,
    kind: BcKind,
    vertices: Vec<Vertex>,
    values: BoundaryValues,
    member: Vec<bool>,
    anchor: u8,
    parity_consistent: bool,
}

impl BoundaryCondition {
    fn build(torus: &TorusSpec, kind: BcKind, mut pairs: Vec<(Vertex, i64)>, zero_one: bool) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::EmptyBoundary);
        }
        for &(v, _) in &pairs {
            torus.check_vertex(v)?;
        }
        pairs.sort_unstable();
        pairs.dedup();
        for w in pairs.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(Error::InfeasibleBC(w[0].0));
            }
        }
        let vertices: Vec<Vertex> = pairs.iter().map(|p| p.0).collect();
        let mut member = vec![false; torus.vertex_count()];
        for &v in &vertices {
            member[v] = true;
        }
        let (values, anchor, parity_consistent) = if zero_one {
            (BoundaryValues::ZeroOne, 0, true)
        } else {
            let (b0, m0) = pairs[0];
            let anchor = ((m0 - torus.parity(b0) as i64).rem_euclid(2)) as u8;
            let consistent =
                pairs.iter().all(|&(b, m)| (m - torus.parity(b) as i64 - anchor as i64).rem_euclid(2) == 0);
            (BoundaryValues::Fixed(pairs.iter().map(|p| p.1).collect()), anchor, consistent)
        };
        Ok(BoundaryCondition {
            torus: torus.clone(),
            kind,
            vertices,
            values,
            member,
            anchor,
            parity_consistent,
        })
    }

    /// B = {v}, μ(v) = 0. If v is odd the parity classes are swapped.
    pub fn one_point(torus: &TorusSpec, v: Vertex) -> Result<Self> {
        Self::build(torus, BcKind::OnePoint, vec![(v, 0)], false)
    }

    /// Zero at every even vertex having a coordinate in {0, n_i - 1}.
    pub fn zero(torus: &TorusSpec) -> Result<Self> {
        let pairs = (0..torus.vertex_count())
            .filter(|&v| torus.parity(v) == 0 && on_box_boundary(torus, v))
            .map(|v| (v, 0))
            .collect();
        Self::build(torus, BcKind::Zero, pairs, false)
    }

    /// B^□ (every vertex with a coordinate in {0, n_i - 1}) with values free
    /// in {0, 1}.
    pub fn box_boundary(torus: &TorusSpec) -> Result<Self> {
        let pairs = (0..torus.vertex_count()).filter(|&v| on_box_boundary(torus, v)).map(|v| (v, 0)).collect();
        Self::build(torus, BcKind::BoxBoundary, pairs, true)
    }

    /// Arbitrary B with values free in {0, 1}.
    pub fn zero_one(torus: &TorusSpec, vertices: &[Vertex]) -> Result<Self> {
        let pairs = vertices.iter().map(|&v| (v, 0)).collect();
        Self::build(torus, BcKind::ZeroOneFamily, pairs, true)
    }

    pub fn explicit(torus: &TorusSpec, pairs: &[(Vertex, i64)]) -> Result<Self> {
        Self::build(torus, BcKind::Explicit, pairs.to_vec(), false)
    }

    pub fn torus(&self) -> &TorusSpec {
        &self.torus
    }

    pub fn kind(&self) -> BcKind {
        self.kind
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn values(&self) -> &BoundaryValues {
        &self.values
    }

    pub fn contains(&self, v: Vertex) -> bool {
        self.member[v]
    }

    pub fn membership(&self) -> &[bool] {
        &self.member
    }

    /// μ(v) for fixed boundary values.
    pub fn value_at(&self, v: Vertex) -> Option<i64> {
        match &self.values {
            BoundaryValues::Fixed(vals) => self.vertices.binary_search(&v).ok().map(|i| vals[i]),
            BoundaryValues::ZeroOne => None,
        }
    }

    /// The (vertex, μ) pairs; fails for zero-one families.
    pub fn fixed_pairs(&self) -> Result<Vec<(Vertex, i64)>> {
        match &self.values {
            BoundaryValues::Fixed(vals) => Ok(self.vertices.iter().copied().zip(vals.iter().copied()).collect()),
            BoundaryValues::ZeroOne => Err(Error::NoFixedValues),
        }
    }

    /// Allowed value window at a boundary vertex.
    pub fn window(&self, v: Vertex) -> Option<(i64, i64)> {
        if !self.member[v] {
            return None;
        }
        match &self.values {
            BoundaryValues::Fixed(_) => self.value_at(v).map(|m| (m, m)),
            BoundaryValues::ZeroOne => Some((0, 1)),
        }
    }

    /// 1 when the parity classes are swapped so that B's values fit.
    pub fn anchor(&self) -> u8 {
        self.anchor
    }

    /// Parity class of `v` after anchoring: homomorphisms take values of
    /// this parity at `v`.
    pub fn class_of(&self, v: Vertex) -> u8 {
        self.torus.parity(v) ^ self.anchor
    }

    pub fn is_odd(&self, v: Vertex) -> bool {
        self.class_of(v) == 1
    }

    pub fn is_even(&self, v: Vertex) -> bool {
        self.class_of(v) == 0
    }

    pub fn parity_consistent(&self) -> bool {
        self.parity_consistent
    }

    pub fn max_value(&self) -> Option<i64> {
        match &self.values {
            BoundaryValues::Fixed(vals) => vals.iter().copied().max(),
            BoundaryValues::ZeroOne => Some(1),
        }
    }

    /// Same B with μ replaced by μ - delta.
    pub fn shifted(&self, delta: i64) -> Result<Self> {
        let pairs = self.fixed_pairs()?;
        let moved: Vec<(Vertex, i64)> = pairs.iter().map(|&(v, m)| (v, m - delta)).collect();
        let mut out = Self::build(&self.torus, self.kind, moved, false)?;
        if self.kind == BcKind::OnePoint && delta != 0 {
            out.kind = BcKind::Explicit;
        }
        Ok(out)
    }

    /// Parity rule for the homomorphism model.
    pub fn check_parity(&self) -> Result<()> {
        if self.parity_consistent {
            return Ok(());
        }
        let pairs = self.fixed_pairs()?;
        let bad = pairs
            .iter()
            .find(|&&(b, m)| (m - self.torus.parity(b) as i64 - self.anchor as i64).rem_euclid(2) != 0)
            .map(|p| p.0)
            .unwrap_or(pairs[0].0);
        Err(Error::IllegalParity(bad))
    }
}

fn on_box_boundary(torus: &TorusSpec, v: Vertex) -> bool {
    torus.dims().iter().enumerate().any(|(axis, &n)| {
        let c = torus.coord(v, axis);
        c == 0 || c == n - 1
    })
}

/// Requested boundary family for [`make_bc`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BcRequest {
    OnePoint(Vertex),
    Zero,
    BoxBoundary,
    ZeroOne(Vec<Vertex>),
    Explicit(Vec<(Vertex, i64)>),
}

/// Materializes a boundary condition and checks that it is legal for `model`
/// by constructing the extremal functions.
pub fn make_bc(torus: &TorusSpec, request: &BcRequest, model: Model) -> Result<BoundaryCondition> {
    let bc = match request {
        BcRequest::OnePoint(v) => BoundaryCondition::one_point(torus, *v)?,
        BcRequest::Zero => BoundaryCondition::zero(torus)?,
        BcRequest::BoxBoundary => BoundaryCondition::box_boundary(torus)?,
        BcRequest::ZeroOne(vs) => BoundaryCondition::zero_one(torus, vs)?,
        BcRequest::Explicit(pairs) => BoundaryCondition::explicit(torus, pairs)?,
    };
    extremal_functions(&bc, model)?;
    Ok(bc)
}

/// Whether some axis i0 exists such that every line parallel to i0 meets B.
pub fn has_full_projection(torus: &TorusSpec, b: &[Vertex]) -> bool {
    (0..torus.dim()).any(|axis| full_projection_axis(torus, b, axis))
}

pub fn full_projection_axis(torus: &TorusSpec, b: &[Vertex], axis: usize) -> bool {
    let n = torus.dims()[axis];
    let lines = torus.vertex_count() / n;
    let mut hit: Vec<Vertex> = b.iter().map(|&v| torus.shift(v, axis, -(torus.coord(v, axis) as isize))).collect();
    hit.sort_unstable();
    hit.dedup();
    hit.len() == lines
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub edge_violations: Vec<(Vertex, Vertex)>,
    pub boundary_mismatches: Vec<Vertex>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.edge_violations.is_empty() && self.boundary_mismatches.is_empty()
    }
}

pub fn validate(f: &HeightFunction, bc: &BoundaryCondition) -> ValidationReport {
    let mut report = ValidationReport::default();
    if f.torus != bc.torus {
        report.boundary_mismatches = bc.vertices.clone();
        return report;
    }
    for (v, w) in f.torus.edges() {
        if !f.model.adjacent_ok(f.values[v], f.values[w]) {
            report.edge_violations.push((v, w));
        }
    }
    for &b in &bc.vertices {
        let (lo, hi) = bc.window(b).unwrap();
        if f.values[b] < lo || f.values[b] > hi {
            report.boundary_mismatches.push(b);
        }
    }
    report
}

/// Shortest-path closure min_b (offset(b) + dist(v, b)) over the torus.
fn min_plus_distance(torus: &TorusSpec, sources: &[(Vertex, i64)]) -> Vec<i64> {
    let mut best = vec![i64::MAX; torus.vertex_count()];
    let mut heap = BinaryHeap::new();
    for &(v, m) in sources {
        if m < best[v] {
            best[v] = m;
            heap.push(Reverse((m, v)));
        }
    }
    while let Some(Reverse((m, v))) = heap.pop() {
        if m > best[v] {
            continue;
        }
        for &w in torus.neighbors(v) {
            if m + 1 < best[w] {
                best[w] = m + 1;
                heap.push(Reverse((m + 1, w)));
            }
        }
    }
    best
}

/// Pointwise minimal and maximal members of Hom(G,B,μ) (or Lip).
pub fn extremal_functions(bc: &BoundaryCondition, model: Model) -> Result<(HeightFunction, HeightFunction)> {
    let torus = &bc.torus;
    if model == Model::Hom && matches!(bc.values, BoundaryValues::Fixed(_)) {
        bc.check_parity()?;
    }
    let (hi_src, lo_src): (Vec<(Vertex, i64)>, Vec<(Vertex, i64)>) = bc
        .vertices
        .iter()
        .map(|&b| {
            let (lo, hi) = bc.window(b).unwrap();
            ((b, hi), (b, -lo))
        })
        .unzip();
    let mut hi = min_plus_distance(torus, &hi_src);
    let mut lo: Vec<i64> = min_plus_distance(torus, &lo_src).into_iter().map(|x| -x).collect();
    if model == Model::Hom {
        for v in 0..torus.vertex_count() {
            let want = bc.class_of(v) as i64;
            if (hi[v] - want).rem_euclid(2) != 0 {
                hi[v] -= 1;
            }
            if (lo[v] - want).rem_euclid(2) != 0 {
                lo[v] += 1;
            }
        }
    }
    if let Some(v) = (0..torus.vertex_count()).find(|&v| lo[v] > hi[v]) {
        return Err(Error::InfeasibleBC(v));
    }
    let fmin = HeightFunction { torus: torus.clone(), values: lo, model };
    let fmax = HeightFunction { torus: torus.clone(), values: hi, model };
    for f in [&fmin, &fmax] {
        let report = validate(f, bc);
        if !report.is_valid() {
            let v = report.boundary_mismatches.first().copied().or(report.edge_violations.first().map(|e| e.0));
            return Err(Error::InfeasibleBC(v.unwrap_or(0)));
        }
    }
    Ok((fmin, fmax))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(d: &[usize]) -> TorusSpec {
        TorusSpec::new(d).unwrap()
    }

    #[test]
    fn validate_examples() {
        let a = t(&[4, 4]);
        let bc = BoundaryCondition::one_point(&a, 0).unwrap();
        assert!(validate(&HeightFunction::parity_function(&a), &bc).is_valid());
        let zero = HeightFunction::constant(&a, 0, Model::Hom);
        assert_eq!(validate(&zero, &bc).edge_violations.len(), 32);
        let boxed = BoundaryCondition::box_boundary(&a).unwrap();
        let zero_lip = HeightFunction::constant(&a, 0, Model::Lip);
        assert!(validate(&zero_lip, &boxed).is_valid());
    }

    #[test]
    fn make_bc_examples() {
        let a = t(&[4, 4]);
        let zero = make_bc(&a, &BcRequest::Zero, Model::Hom).unwrap();
        assert_eq!(zero.vertices().len(), 6);
        assert!(zero.vertices().iter().all(|&v| a.parity(v) == 0));
        let boxed = make_bc(&a, &BcRequest::BoxBoundary, Model::Lip).unwrap();
        assert_eq!(boxed.vertices().len(), 12);
        let v = a.index(&[1, 0]).unwrap();
        let odd = make_bc(&a, &BcRequest::OnePoint(v), Model::Hom).unwrap();
        assert_eq!(odd.anchor(), 1);
        assert!(odd.is_even(v));
        assert_eq!(make_bc(&a, &BcRequest::Explicit(vec![]), Model::Hom).unwrap_err(), Error::EmptyBoundary);
        let bad = BcRequest::Explicit(vec![(0, 0), (1, 0)]);
        assert_eq!(make_bc(&a, &bad, Model::Hom).unwrap_err(), Error::IllegalParity(1));
        assert!(make_bc(&a, &bad, Model::Lip).is_ok());
    }

    #[test]
    fn full_projection_examples() {
        let a = t(&[4, 4]);
        assert!(has_full_projection(&a, BoundaryCondition::zero(&a).unwrap().vertices()));
        assert!(!has_full_projection(&a, &[0]));
        let column: Vec<Vertex> = (0..4).map(|y| a.index(&[0, y]).unwrap()).collect();
        assert!(full_projection_axis(&a, &column, 0));
        assert!(!full_projection_axis(&a, &column, 1));
    }

    #[test]
    fn extremal_examples() {
        let c = t(&[6]);
        let bc = BoundaryCondition::one_point(&c, 0).unwrap();
        let (lo, hi) = extremal_functions(&bc, Model::Hom).unwrap();
        assert_eq!((lo.at(3), hi.at(3)), (-3, 3));
        let a = t(&[4, 4]);
        let zero = BoundaryCondition::zero(&a).unwrap();
        let (lo, hi) = extremal_functions(&zero, Model::Hom).unwrap();
        for &b in zero.vertices() {
            assert_eq!((lo.at(b), hi.at(b)), (0, 0));
        }
        let conflict = BoundaryCondition::explicit(&a, &[(0, 0), (1, 5)]).unwrap();
        assert!(matches!(extremal_functions(&conflict, Model::Hom), Err(Error::InfeasibleBC(_))));
        assert!(matches!(extremal_functions(&conflict, Model::Lip), Err(Error::InfeasibleBC(_))));
    }

    #[test]
    fn range_examples() {
        let a = t(&[4, 4]);
        assert_eq!(range_of(&HeightFunction::parity_function(&a)), 2);
        assert_eq!(range_of(&HeightFunction::constant(&a, 7, Model::Lip)), 1);
        let c = t(&[6]);
        let walk = HeightFunction::new(c, vec![0, 1, 2, 1, 0, -1], Model::Hom).unwrap();
        assert_eq!(range_of(&walk), 4);
    }

    #[test]
    fn json_round_trip() {
        let c = t(&[2, 4]);
        let f = HeightFunction::new(c, vec![0, 1, 0, -1, 1, 0, 1, 0], Model::Hom).unwrap();
        let text = f.to_json();
        assert_eq!(text, r#"{"dims":[2,4],"model":"hom","values":[0,1,0,-1,1,0,1,0]}"#);
        assert_eq!(HeightFunction::from_json(&text).unwrap(), f);
    }
}
