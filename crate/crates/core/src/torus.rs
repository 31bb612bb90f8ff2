//! Tori Z_{n_1} x ... x Z_{n_d} with even sides.
//!
//! Vertices are addressed by their row-major linear index over the ascending
//! side lengths, so the last coordinate is the one along the largest side.

use std::fmt;
use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::graph::Graph;

/// Linear index of a vertex.
pub type Vertex = usize;

/// A unit step `sign * e_axis`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Direction {
    pub axis: usize,
    pub sign: i8,
}

#[derive(Clone)]
pub struct TorusSpec {
    inner: Arc<Inner>,
}

struct Inner {
    dims: Vec<usize>,
    strides: Vec<usize>,
    degree: usize,
    alpha: usize,
    count: usize,
    dirs: Vec<Direction>,
    nbr: Vec<usize>,
    origin_dist: OnceLock<Vec<u32>>,
}

impl TorusSpec {
    /// Validates and sorts the side lengths.
    pub fn new(dims: &[usize]) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::EmptyDims);
        }
        for &n in dims {
            if n < 2 {
                return Err(Error::SideTooSmall(n));
            }
            if n % 2 == 1 {
                return Err(Error::OddSideLength(n));
            }
        }
        if dims.len() == 1 && dims[0] == 2 {
            return Err(Error::DegenerateTorus);
        }
        let mut dims = dims.to_vec();
        dims.sort_unstable();
        let d = dims.len();
        let mut strides = vec![1usize; d];
        for i in (0..d.saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * dims[i + 1];
        }
        let count: usize = dims.iter().product();
        let alpha = count / dims[d - 1];
        let mut dirs: Vec<Direction> = (0..d).map(|axis| Direction { axis, sign: 1 }).collect();
        dirs.extend((0..d).filter(|&i| dims[i] != 2).map(|axis| Direction { axis, sign: -1 }));
        let degree = dirs.len();

        let mut nbr = Vec::with_capacity(count * degree);
        let mut coords = vec![0usize; d];
        for v in 0..count {
            decode(&dims, v, &mut coords);
            for dir in &dirs {
                let c = coords[dir.axis];
                let n = dims[dir.axis];
                let moved = if dir.sign > 0 { (c + 1) % n } else { (c + n - 1) % n };
                nbr.push(v - c * strides[dir.axis] + moved * strides[dir.axis]);
            }
        }
        Ok(TorusSpec {
            inner: Arc::new(Inner {
                dims,
                strides,
                degree,
                alpha,
                count,
                dirs,
                nbr,
                origin_dist: OnceLock::new(),
            }),
        })
    }

    pub fn dims(&self) -> &[usize] {
        &self.inner.dims
    }

    pub fn dim(&self) -> usize {
        self.inner.dims.len()
    }

    /// Δ(G): 2d minus the number of sides equal to 2.
    pub fn degree(&self) -> usize {
        self.inner.degree
    }

    /// Product of all sides but the largest.
    pub fn alpha(&self) -> usize {
        self.inner.alpha
    }

    pub fn vertex_count(&self) -> usize {
        self.inner.count
    }

    pub fn largest_side(&self) -> usize {
        *self.inner.dims.last().unwrap()
    }

    pub fn directions(&self) -> &[Direction] {
        &self.inner.dirs
    }

    pub fn coords(&self, v: Vertex) -> Vec<usize> {
        let mut c = vec![0; self.dim()];
        decode(&self.inner.dims, v, &mut c);
        c
    }

    pub fn coord(&self, v: Vertex, axis: usize) -> usize {
        (v / self.inner.strides[axis]) % self.inner.dims[axis]
    }

    pub fn index(&self, coords: &[usize]) -> Result<Vertex> {
        if coords.len() != self.dim() {
            return Err(Error::Parse(format!("expected {} coordinates", self.dim())));
        }
        let mut v = 0;
        for (i, &c) in coords.iter().enumerate() {
            if c >= self.inner.dims[i] {
                return Err(Error::VertexOutOfRange(c));
            }
            v += c * self.inner.strides[i];
        }
        Ok(v)
    }

    pub fn check_vertex(&self, v: Vertex) -> Result<()> {
        if v < self.vertex_count() {
            Ok(())
        } else {
            Err(Error::VertexOutOfRange(v))
        }
    }

    /// Coordinate sum mod 2; the all-zero vertex is even.
    pub fn parity(&self, v: Vertex) -> u8 {
        let mut s = 0;
        for axis in 0..self.dim() {
            s += self.coord(v, axis);
        }
        (s % 2) as u8
    }

    /// v + f_i for the i-th direction.
    pub fn step(&self, v: Vertex, dir: usize) -> Vertex {
        self.inner.nbr[v * self.inner.degree + dir]
    }

    /// The Δ(G) neighbors in direction order f_1..f_Δ.
    pub fn neighbors(&self, v: Vertex) -> &[Vertex] {
        let deg = self.inner.degree;
        &self.inner.nbr[v * deg..(v + 1) * deg]
    }

    /// Index of the direction taking `v` to `w`, if they are adjacent.
    pub fn direction_between(&self, v: Vertex, w: Vertex) -> Option<usize> {
        self.neighbors(v).iter().position(|&u| u == w)
    }

    /// v + delta * e_axis.
    pub fn shift(&self, v: Vertex, axis: usize, delta: isize) -> Vertex {
        let n = self.inner.dims[axis] as isize;
        let c = self.coord(v, axis) as isize;
        let moved = (c + delta).rem_euclid(n) as usize;
        v - (c as usize) * self.inner.strides[axis] + moved * self.inner.strides[axis]
    }

    /// Graph distance: sum over axes of the cyclic coordinate distance.
    pub fn distance(&self, u: Vertex, v: Vertex) -> usize {
        let mut total = 0;
        for axis in 0..self.dim() {
            let n = self.inner.dims[axis];
            let a = self.coord(u, axis);
            let b = self.coord(v, axis);
            let diff = a.abs_diff(b);
            total += diff.min(n - diff);
        }
        total
    }

    pub fn diameter(&self) -> usize {
        self.inner.dims.iter().map(|n| n / 2).sum()
    }

    pub fn edges(&self) -> Vec<(Vertex, Vertex)> {
        let mut out = Vec::with_capacity(self.vertex_count() * self.degree() / 2);
        for v in 0..self.vertex_count() {
            for &w in self.neighbors(v) {
                if v < w {
                    out.push((v, w));
                }
            }
        }
        out
    }

    pub fn to_graph(&self) -> Graph {
        let parity = (0..self.vertex_count()).map(|v| self.parity(v)).collect();
        Graph::from_edges(self.vertex_count(), &self.edges()).with_parity(parity)
    }

    fn origin_distances(&self) -> &[u32] {
        self.inner.origin_dist.get_or_init(|| {
            (0..self.vertex_count()).map(|v| self.distance(0, v) as u32).collect()
        })
    }

    /// Vertices within distance `r` of `v`, ascending.
    pub fn ball(&self, v: Vertex, r: usize) -> Vec<Vertex> {
        (0..self.vertex_count()).filter(|&w| self.distance(v, w) <= r).collect()
    }

    /// Volume, outgoing edge count and top-face size of the radius-r ball.
    pub fn ball_metrics(&self, r: usize) -> BallMetrics {
        let dist = self.origin_distances();
        let inside = |w: usize| dist[w] as usize <= r;
        let last = self.dim() - 1;
        let mut volume = 0u64;
        let mut leaving = 0u64;
        let mut top = 0u64;
        for w in 0..self.vertex_count() {
            if !inside(w) {
                continue;
            }
            volume += 1;
            leaving += self.neighbors(w).iter().filter(|&&u| !inside(u)).count() as u64;
            if !inside(self.shift(w, last, 1)) {
                top += 1;
            }
        }
        BallMetrics { radius: r, volume, boundary_edges: leaving, top_size: top }
    }

    pub fn classify_linearity(&self, lambda: f64) -> LinearityClass {
        let d = self.dim() as f64;
        let n_d = self.largest_side() as f64;
        let alpha = self.alpha() as f64;
        let nonlinear_threshold = (alpha / (d * d.ln().powi(3))).exp();
        let linear_threshold = (alpha / lambda).exp();
        let tag = if n_d <= nonlinear_threshold {
            LinearityTag::NonLinear
        } else if n_d >= linear_threshold {
            LinearityTag::Linear
        } else {
            LinearityTag::Indeterminate
        };
        LinearityClass { tag, lambda, nonlinear_threshold, linear_threshold }
    }

    pub fn aux_adjacency(&self, v: Vertex, kind: AuxKind) -> Vec<Vertex> {
        let mut out = match kind {
            AuxKind::Power(r) => {
                (0..self.vertex_count()).filter(|&w| w != v && self.distance(v, w) <= r).collect()
            }
            AuxKind::Diamond => {
                let dirs = self.directions();
                let mut acc = Vec::new();
                for i in 0..dirs.len() {
                    for j in 0..dirs.len() {
                        if dirs[i].axis == dirs[j].axis {
                            continue;
                        }
                        let a = self.step(v, i);
                        let b = self.step(v, j);
                        acc.push(a);
                        acc.push(b);
                        acc.push(self.step(a, j));
                    }
                }
                acc.retain(|&w| w != v);
                acc
            }
        };
        out.sort_unstable();
        out.dedup();
        out
    }
}

fn decode(dims: &[usize], mut v: usize, out: &mut [usize]) {
    for i in (0..dims.len()).rev() {
        out[i] = v % dims[i];
        v /= dims[i];
    }
}

impl PartialEq for TorusSpec {
    fn eq(&self, other: &Self) -> bool {
        self.dims() == other.dims()
    }
}

impl Eq for TorusSpec {}

impl fmt::Debug for TorusSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "TorusSpec{:?}", self.dims())
    }
}

impl fmt::Display for TorusSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.dims().iter().map(|n| n.to_string()).collect();
        write!(f, "{}", parts.join("x"))
    }
}

impl Serialize for TorusSpec {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.dims().serialize(s)
    }
}

impl<'de> Deserialize<'de> for TorusSpec {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let dims = Vec::<usize>::deserialize(d)?;
        TorusSpec::new(&dims).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct BallMetrics {
    pub radius: usize,
    pub volume: u64,
    /// Edges with exactly one endpoint in the ball (s_r).
    pub boundary_edges: u64,
    /// |{w in ball : w + e_d outside}|.
    pub top_size: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum LinearityTag {
    NonLinear,
    Linear,
    Indeterminate,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinearityClass {
    pub tag: LinearityTag,
    pub lambda: f64,
    pub nonlinear_threshold: f64,
    pub linear_threshold: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AuxKind {
    Diamond,
    Power(usize),
}

/// Parses "6", "4x4", "16x16x2x2". Returns the torus and whether the sides
/// had to be reordered.
pub fn parse_torus(text: &str) -> Result<(TorusSpec, bool)> {
    let dims: Vec<usize> = text
        .trim()
        .trim_start_matches(['Z', 'z'])
        .split(['x', 'X', ','])
        .map(|p| p.trim().parse::<usize>().map_err(|_| Error::Parse(format!("bad side length '{p}'"))))
        .collect::<Result<_>>()?;
    let t = TorusSpec::new(&dims)?;
    let reordered = t.dims() != dims.as_slice();
    Ok((t, reordered))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(d: &[usize]) -> TorusSpec {
        TorusSpec::new(d).unwrap()
    }

    fn set(t: &TorusSpec, pts: &[&[usize]]) -> Vec<Vertex> {
        let mut v: Vec<Vertex> = pts.iter().map(|c| t.index(c).unwrap()).collect();
        v.sort_unstable();
        v
    }

    #[test]
    fn construction_examples() {
        let a = t(&[4, 4]);
        assert_eq!((a.dim(), a.degree(), a.alpha(), a.vertex_count()), (2, 4, 4, 16));
        assert_eq!(t(&[2, 4]).degree(), 3);
        assert_eq!(TorusSpec::new(&[3, 4]).unwrap_err(), Error::OddSideLength(3));
        assert_eq!(TorusSpec::new(&[1, 4]).unwrap_err(), Error::SideTooSmall(1));
        assert_eq!(TorusSpec::new(&[2]).unwrap_err(), Error::DegenerateTorus);
        assert_eq!(TorusSpec::new(&[]).unwrap_err(), Error::EmptyDims);
        assert_eq!(t(&[8, 2]).dims(), &[2, 8]);
        assert_eq!(t(&[6]).degree(), 2);
    }

    #[test]
    fn neighbor_examples() {
        let a = t(&[4, 4]);
        let mut n = a.neighbors(0).to_vec();
        n.sort_unstable();
        assert_eq!(n, set(&a, &[&[1, 0], &[0, 1], &[3, 0], &[0, 3]]));
        let b = t(&[2, 4]);
        let mut n = b.neighbors(0).to_vec();
        n.sort_unstable();
        assert_eq!(n, set(&b, &[&[1, 0], &[0, 1], &[0, 3]]));
        let c = t(&[2, 2]);
        let mut n = c.neighbors(0).to_vec();
        n.sort_unstable();
        assert_eq!(n, set(&c, &[&[1, 0], &[0, 1]]));
    }

    #[test]
    fn ball_examples() {
        let a = t(&[4, 4]);
        let b0 = a.ball_metrics(0);
        assert_eq!((b0.volume, b0.boundary_edges), (1, 4));
        let b1 = a.ball_metrics(1);
        assert_eq!((b1.volume, b1.top_size, b1.boundary_edges), (5, 3, 12));
        let b2 = a.ball_metrics(2);
        assert_eq!((b2.volume, b2.boundary_edges), (11, 12));
        assert_eq!(a.ball_metrics(3).volume, 15);
        let big = a.ball_metrics(100);
        assert_eq!((big.volume, big.boundary_edges), (16, 0));
        assert_eq!(a.ball(0, 1).len(), 5);
    }

    #[test]
    fn linearity_examples() {
        assert_eq!(t(&[2, 4]).classify_linearity(0.5).tag, LinearityTag::NonLinear);
        assert_eq!(t(&[2, 4]).classify_linearity(1e-3).tag, LinearityTag::NonLinear);
        let c = t(&[2, 4]).classify_linearity(0.5);
        assert!((c.nonlinear_threshold - 20.14).abs() < 0.01);
        assert_eq!(t(&[2, 64]).classify_linearity(0.5).tag, LinearityTag::Linear);
        assert_eq!(t(&[2, 32]).classify_linearity(0.5).tag, LinearityTag::Indeterminate);
    }

    #[test]
    fn aux_examples() {
        let a = t(&[4, 4]);
        let mut n = a.neighbors(0).to_vec();
        n.sort_unstable();
        assert_eq!(a.aux_adjacency(0, AuxKind::Power(1)), n);
        let diamond = a.aux_adjacency(0, AuxKind::Diamond);
        let mut expect = n.clone();
        expect.extend(set(&a, &[&[1, 1], &[1, 3], &[3, 1], &[3, 3]]));
        expect.sort_unstable();
        assert_eq!(diamond, expect);
        let c = t(&[2, 2]);
        assert_eq!(c.aux_adjacency(0, AuxKind::Diamond), set(&c, &[&[1, 0], &[0, 1], &[1, 1]]));
    }

    #[test]
    fn parse_examples() {
        let (a, re) = parse_torus("4x4").unwrap();
        assert_eq!((a.dims(), re), (&[4usize, 4][..], false));
        let (b, re) = parse_torus("8x2").unwrap();
        assert_eq!((b.dims(), re), (&[2usize, 8][..], true));
        assert!(parse_torus("4xq").is_err());
        assert_eq!(parse_torus("Z6").unwrap().0.dims(), &[6]);
    }

    #[test]
    fn shift_and_direction_between() {
        let a = t(&[4, 6]);
        let v = a.index(&[3, 5]).unwrap();
        assert_eq!(a.coords(a.shift(v, 0, 1)), vec![0, 5]);
        assert_eq!(a.coords(a.shift(v, 1, -7)), vec![3, 4]);
        let w = a.step(v, 3);
        assert_eq!(a.direction_between(v, w), Some(3));
    }
}
