//! Expanding transformations on Ω_{x,L}: the shift S, the sign overlay T_1,
//! the shift+flip T_2 and the threshold combination T, with their inverses
//! and an exact expansion-factor audit.
//!
//! Images are enumerated lazily: sign vectors run in binary order over the
//! free sites sorted by linear index, bit k set meaning +1 at the k-th site.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::Serialize;

use crate::cutsets::{level_set, level_set_from_mask, OddCutset};
use crate::error::{Error, Result};
use crate::height::{validate, BoundaryCondition, HeightFunction, Model};
use crate::oracle::{count, for_each_function, Budget};
use crate::torus::{TorusSpec, Vertex};

pub const DEFAULT_LAMBDA: f64 = 0.1;

/// Which transformation an image came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Branch {
    T1,
    T2,
}

/// The set T_1(f) or T_2(f), enumerated on demand.
#[derive(Debug, Clone)]
pub struct Image {
    pub branch: Branch,
    base: HeightFunction,
    free: Vec<Vertex>,
    forced_plus: Vec<Vertex>,
    exposed: Vec<Vertex>,
}

impl Image {
    /// Number of members, 2^(free sites).
    pub fn len(&self) -> u64 {
        1u64 << self.free.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn free_sites(&self) -> &[Vertex] {
        &self.free
    }

    /// Member number `mask`.
    pub fn get(&self, mask: u64) -> HeightFunction {
        let mut g = self.base.clone();
        for (k, &v) in self.free.iter().enumerate() {
            g.values[v] = if mask >> k & 1 == 1 { 1 } else { -1 };
        }
        for &v in &self.forced_plus {
            g.values[v] = 1;
        }
        if self.branch == Branch::T2 {
            let starts: Vec<Vertex> = self.exposed.iter().copied().filter(|&v| g.values[v] == -1).collect();
            let region = nonzero_region(&g, &starts);
            for (v, inside) in region.into_iter().enumerate() {
                if inside {
                    g.values[v] = -g.values[v];
                }
            }
        }
        g
    }

    pub fn iter(&self) -> impl Iterator<Item = HeightFunction> + '_ {
        (0..self.len()).map(move |m| self.get(m))
    }

    pub fn to_vec(&self) -> Vec<HeightFunction> {
        self.iter().collect()
    }
}

/// Union of the components of `starts` in V \ {h = 0}.
fn nonzero_region(h: &HeightFunction, starts: &[Vertex]) -> Vec<bool> {
    let torus = &h.torus;
    let mut mark = vec![false; torus.vertex_count()];
    let mut stack = Vec::new();
    for &s in starts {
        if h.values[s] != 0 && !mark[s] {
            mark[s] = true;
            stack.push(s);
        }
    }
    while let Some(u) = stack.pop() {
        for &w in torus.neighbors(u) {
            if h.values[w] != 0 && !mark[w] {
                mark[w] = true;
                stack.push(w);
            }
        }
    }
    mark
}

fn require_hom(f: &HeightFunction) -> Result<()> {
    if f.model != Model::Hom {
        return Err(Error::Precondition("transformations act on homomorphism height functions".into()));
    }
    Ok(())
}

fn single_source(gamma: &OddCutset) -> Result<Vertex> {
    match gamma.sources() {
        [x] => Ok(*x),
        _ => Err(Error::Precondition("cutset must have a single source".into())),
    }
}

/// Checks Γ = LS(f, x, B) for the source x of Γ.
pub fn check_level_set(f: &HeightFunction, bc: &BoundaryCondition, gamma: &OddCutset) -> Result<()> {
    let x = single_source(gamma)?;
    match level_set(f, x, bc)? {
        Some(ls) if ls.edges() == gamma.edges() => Ok(()),
        _ => Err(Error::NotALevelSet),
    }
}

/// The level set around x, or a precondition error when it is empty.
pub fn nonempty_level_set(f: &HeightFunction, bc: &BoundaryCondition, x: Vertex) -> Result<OddCutset> {
    level_set(f, x, bc)?.ok_or_else(|| Error::Precondition(format!("level set around {x} is empty")))
}

/// S(f): f(v + e_axis) - 1 inside comp(Γ, x), f elsewhere.
pub fn shift(f: &HeightFunction, bc: &BoundaryCondition, gamma: &OddCutset, axis: usize) -> Result<HeightFunction> {
    require_hom(f)?;
    check_level_set(f, bc, gamma)?;
    Ok(shift_unchecked(f, gamma, axis))
}

fn shift_unchecked(f: &HeightFunction, gamma: &OddCutset, axis: usize) -> HeightFunction {
    let side = gamma.source_side();
    let mut g = f.clone();
    for v in 0..side.len() {
        if side[v] {
            g.values[v] = f.values[f.torus.step(v, axis)] - 1;
        }
    }
    g
}

/// f recovered from any g ∈ T_1(f): g(v - e_axis) + 1 inside comp(Γ, x).
/// Fails with `Inconsistent` unless the result validates and has Γ as its
/// level set.
pub fn inverse_shift(g: &HeightFunction, bc: &BoundaryCondition, gamma: &OddCutset, axis: usize) -> Result<HeightFunction> {
    let torus = &g.torus;
    let side = gamma.source_side();
    let back = torus.directions().iter().position(|d| d.axis == axis && d.sign < 0).unwrap_or(axis);
    let mut f = g.clone();
    for v in 0..side.len() {
        if side[v] {
            f.values[v] = g.values[torus.step(v, back)] + 1;
        }
    }
    if !validate(&f, bc).is_valid() {
        return Err(Error::Inconsistent);
    }
    match check_level_set(&f, bc, gamma) {
        Ok(()) => Ok(f),
        Err(Error::NotALevelSet) => Err(Error::Inconsistent),
        Err(e) => Err(e),
    }
}

/// T_1(f) around x.
pub fn t1(f: &HeightFunction, bc: &BoundaryCondition, x: Vertex, axis: usize) -> Result<(OddCutset, Image)> {
    require_hom(f)?;
    let gamma = nonempty_level_set(f, bc, x)?;
    let base = shift_unchecked(f, &gamma, axis);
    let free = gamma.e11(axis);
    Ok((gamma, Image { branch: Branch::T1, base, free, forced_plus: Vec::new(), exposed: Vec::new() }))
}

/// T_2(f) around x: every member of T_1(f) with the zero-free regions of
/// exposed vertices holding -1 negated.
pub fn t2(f: &HeightFunction, bc: &BoundaryCondition, x: Vertex, axis: usize) -> Result<(OddCutset, Image)> {
    require_hom(f)?;
    let gamma = nonempty_level_set(f, bc, x)?;
    let base = shift_unchecked(f, &gamma, axis);
    let exposed = gamma.exposed();
    let (forced_plus, free): (Vec<Vertex>, Vec<Vertex>) =
        gamma.e11(axis).into_iter().partition(|v| exposed.binary_search(v).is_ok());
    Ok((gamma, Image { branch: Branch::T2, base, free, forced_plus, exposed }))
}

/// Threshold (1 - λ / ln²d) · L / Δ deciding between T_1 and T_2. Infinite
/// negative at d = 1.
pub fn branch_threshold(torus: &TorusSpec, edge_count: usize, lambda: f64) -> f64 {
    let ln = (torus.dim() as f64).ln();
    (1.0 - lambda / (ln * ln)) * edge_count as f64 / torus.degree() as f64
}

/// T(f): T_1 when |E_{1,e}| reaches the threshold, T_2 otherwise.
pub fn t_combined(
    f: &HeightFunction,
    bc: &BoundaryCondition,
    x: Vertex,
    axis: usize,
    lambda: f64,
) -> Result<(OddCutset, Image)> {
    if lambda.is_nan() || lambda <= 0.0 {
        return Err(Error::Precondition("lambda must be positive".into()));
    }
    require_hom(f)?;
    let gamma = nonempty_level_set(f, bc, x)?;
    let exposed = gamma.exposed().len() as f64;
    if exposed >= branch_threshold(&f.torus, gamma.len(), lambda) {
        t1(f, bc, x, axis)
    } else {
        t2(f, bc, x, axis)
    }
}

/// Undoes T_2 given Γ and the signs s(v) = f(v + e_axis) - 1 on
/// E_{1,e} \ E_{1,1}.
pub fn inverse_t2(
    g: &HeightFunction,
    bc: &BoundaryCondition,
    gamma: &OddCutset,
    signs: &BTreeMap<Vertex, i64>,
    axis: usize,
) -> Result<HeightFunction> {
    let e11: BTreeSet<Vertex> = gamma.e11(axis).into_iter().collect();
    let starts: Vec<Vertex> = gamma
        .exposed()
        .into_iter()
        .filter(|v| !e11.contains(v))
        .filter(|v| signs.get(v).is_some_and(|&s| g.values[*v] == -s))
        .collect();
    let region = nonzero_region(g, &starts);
    let mut h = g.clone();
    for (v, inside) in region.into_iter().enumerate() {
        if inside {
            h.values[v] = -h.values[v];
        }
    }
    inverse_shift(&h, bc, gamma, axis)
}

/// The signs T_2 forgets: f(v + e_axis) - 1 on E_{1,e} \ E_{1,1}.
pub fn t2_signs(f: &HeightFunction, gamma: &OddCutset, axis: usize) -> BTreeMap<Vertex, i64> {
    let e11: BTreeSet<Vertex> = gamma.e11(axis).into_iter().collect();
    gamma
        .exposed()
        .into_iter()
        .filter(|v| !e11.contains(v))
        .map(|v| (v, f.values[f.torus.step(v, axis)] - 1))
        .collect()
}

/// Ω_{x,L}: functions whose level set around x has exactly L edges.
pub fn omega(bc: &BoundaryCondition, x: Vertex, edge_count: usize, budget: Budget) -> Result<Vec<HeightFunction>> {
    omega_multi(bc, &[(x, edge_count)], budget)
}

/// Ω_{(x_i),(L_i)}: |LS(f, x_i, B)| = L_i for every i, the level sets
/// pairwise disjoint.
pub fn omega_multi(bc: &BoundaryCondition, targets: &[(Vertex, usize)], budget: Budget) -> Result<Vec<HeightFunction>> {
    let mut out = Vec::new();
    let mut failure = None;
    let torus = bc.torus().clone();
    for_each_function(bc, Model::Hom, budget, |vals| {
        let f = HeightFunction { torus: torus.clone(), values: vals.to_vec(), model: Model::Hom };
        match in_omega(&f, bc, targets) {
            Ok(true) => out.push(f),
            Ok(false) => {}
            Err(e) => {
                failure = Some(e);
                return std::ops::ControlFlow::Break(());
            }
        }
        std::ops::ControlFlow::Continue(())
    })?;
    match failure {
        Some(e) => Err(e),
        None => Ok(out),
    }
}

pub fn in_omega(f: &HeightFunction, bc: &BoundaryCondition, targets: &[(Vertex, usize)]) -> Result<bool> {
    let mut seen: Vec<OddCutset> = Vec::new();
    for &(x, l) in targets {
        match level_set(f, x, bc)? {
            Some(g) if g.len() == l => {
                if seen.iter().any(|h| h.edges().iter().any(|e| g.contains_edge(e.0, e.1))) {
                    return Ok(false);
                }
                seen.push(g);
            }
            _ => return Ok(false),
        }
    }
    Ok(true)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExpansionAudit {
    pub omega_size: u64,
    pub image_size: u64,
    /// min over Ω of |T(f)|.
    pub out_min: u64,
    /// max over the image of |{f : g ∈ T(f)}|.
    pub in_max: u64,
    /// out_min / in_max as "p/q".
    pub tau: String,
    pub tau_f64: f64,
    /// Number of functions with the boundary condition.
    pub total: String,
    /// P(Ω) = |Ω|/|T(Ω)| · P(T(Ω)) evaluated with exact rationals.
    pub identity_holds: bool,
    /// |Ω| / |T(Ω)| <= in_max / out_min.
    pub bound_holds: bool,
    pub images_valid: bool,
    /// Branch counts when T mixes T_1 and T_2.
    pub branches: BTreeMap<String, u64>,
}

/// Audits a transformation over an explicit Ω. `transform` returns the
/// image of one member together with the branch it used.
pub fn expansion_audit<T>(
    bc: &BoundaryCondition,
    omega: &[HeightFunction],
    mut transform: T,
) -> Result<ExpansionAudit>
where
    T: FnMut(&HeightFunction) -> Result<Image>,
{
    let mut preimages: BTreeMap<Vec<i64>, u64> = BTreeMap::new();
    let mut out_min = u64::MAX;
    let mut images_valid = true;
    let mut branches = BTreeMap::new();
    for f in omega {
        let image = transform(f)?;
        *branches.entry(format!("{:?}", image.branch)).or_insert(0) += 1;
        out_min = out_min.min(image.len());
        let mut members = BTreeSet::new();
        for g in image.iter() {
            images_valid &= validate(&g, bc).is_valid();
            members.insert(g.values);
        }
        for values in members {
            *preimages.entry(values).or_insert(0) += 1;
        }
    }
    if omega.is_empty() {
        out_min = 0;
    }
    let in_max = preimages.values().copied().max().unwrap_or(0);
    let omega_size = omega.len() as u64;
    let image_size = preimages.len() as u64;
    let total = count(bc, Model::Hom)?;
    let big = |n: u64| BigInt::from(n);
    let z = BigInt::from(total.clone());
    let identity_holds = if image_size == 0 {
        omega_size == 0
    } else {
        let p_omega = BigRational::new(big(omega_size), z.clone());
        let p_image = BigRational::new(big(image_size), z.clone());
        p_omega == BigRational::new(big(omega_size), big(image_size)) * p_image
    };
    let bound_holds = image_size == 0 || big(omega_size) * big(out_min) <= big(in_max) * big(image_size);
    let (tau, tau_f64) = if in_max == 0 {
        ("0/0".to_string(), f64::NAN)
    } else {
        let r = BigRational::new(big(out_min), big(in_max));
        (format!("{}/{}", r.numer(), r.denom()), out_min as f64 / in_max as f64)
    };
    Ok(ExpansionAudit {
        omega_size,
        image_size,
        out_min,
        in_max,
        tau,
        tau_f64,
        total: total.to_string(),
        identity_holds,
        bound_holds,
        images_valid,
        branches,
    })
}

/// g agrees with f outside comp(Γ, x) and equals 1 on E_{1,e}(Γ).
pub fn is_interior_modification(g: &HeightFunction, f: &HeightFunction, gamma: &OddCutset) -> bool {
    let side = gamma.source_side();
    (0..side.len()).all(|v| side[v] || g.values[v] == f.values[v])
        && gamma.exposed().iter().all(|&v| g.values[v] == 1)
}

/// PLS(g, x, B, L): the level sets LS(f, x, B) over f ∈ Ω_{x,L} of which g
/// is an (x, B)-interior modification.
pub fn pls(
    g: &HeightFunction,
    bc: &BoundaryCondition,
    x: Vertex,
    edge_count: usize,
    budget: Budget,
) -> Result<Vec<OddCutset>> {
    let mut found: Vec<OddCutset> = Vec::new();
    for f in omega(bc, x, edge_count, budget)? {
        let gamma = nonempty_level_set(&f, bc, x)?;
        if is_interior_modification(g, &f, &gamma) && !found.contains(&gamma) {
            found.push(gamma);
        }
    }
    found.sort_by(|a, b| a.edges().cmp(b.edges()));
    Ok(found)
}

/// Recovers LS(f, x, B) from an interior modification g and an interior
/// approximation E: A' is the union of the components of B in
/// {v ∉ E : g(v) <= 0}.
pub fn reconstruct_level_set(
    g: &HeightFunction,
    bc: &BoundaryCondition,
    x: Vertex,
    approximation: &[Vertex],
) -> Result<Option<OddCutset>> {
    let mut below: Vec<bool> = g.values.iter().map(|&h| h <= 0).collect();
    for &v in approximation {
        g.torus.check_vertex(v)?;
        below[v] = false;
    }
    level_set_from_mask(&g.torus, &below, x, bc.vertices(), bc.anchor())
}
