//! Independent oracles for computed values. Each test recomputes a quantity
//! by a second method, then pins the agreed value.

use std::collections::BTreeMap;

use heightlab::bijections::LiftedBC;
use heightlab::cutsets::level_set;
use heightlab::height::range_of;
use heightlab::oracle::{count, enumerate, exact_distribution, exact_probability, ratio, Statistic};
use heightlab::sampler::{batch_statistics, Method, RandomSource};
use heightlab::walls::{build_preimage_bound, detect_walls, max_build_preimage, LinearLayout};
use heightlab::{BoundaryCondition, HeightFunction, Model, TorusSpec, Vertex};
use num_rational::Ratio;
use num_traits::ToPrimitive;

fn torus(dims: &[usize]) -> TorusSpec {
    TorusSpec::new(dims).unwrap()
}

fn binomial(n: u64, k: u64) -> u64 {
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

#[test]
fn antipode_law_on_the_six_cycle() {
    let bc = BoundaryCondition::one_point(&torus(&[6]), 0).unwrap();
    let d = exact_distribution(&bc, Model::Hom, &Statistic::HeightAt(3)).unwrap();
    // Two lattice paths of length 3 meeting at height k.
    for k in [-3i64, -1, 1, 3] {
        let half = binomial(3, ((3 + k) / 2) as u64);
        assert_eq!(d.count_of(Ratio::from_integer(k)), (half * half).into());
    }
    assert_eq!(exact_probability(&bc, Model::Hom, |f| f.at(3) == 3).unwrap(), ratio(1, 20));
}

#[test]
fn square_range_law_by_hand() {
    let t = torus(&[2, 2]);
    let bc = BoundaryCondition::one_point(&t, 0).unwrap();
    // The 4-cycle 0-1-3-2: the two odd vertices take ±1 freely, the far even
    // vertex is then forced or has two choices.
    let mut by_hand: BTreeMap<usize, u32> = BTreeMap::new();
    for a in [-1i64, 1] {
        for b in [-1i64, 1] {
            let far: Vec<i64> = if a == b { vec![a - 1, a + 1] } else { vec![0] };
            for c in far {
                let f = HeightFunction::new(t.clone(), vec![0, a, b, c], Model::Hom).unwrap();
                *by_hand.entry(range_of(&f)).or_default() += 1;
            }
        }
    }
    assert_eq!(by_hand, BTreeMap::from([(2, 2), (3, 4)]));
    let d = exact_distribution(&bc, Model::Hom, &Statistic::Range).unwrap();
    for (r, c) in by_hand {
        assert_eq!(d.count_of(Ratio::from_integer(r as i64)), c.into());
    }
    assert_eq!(exact_probability(&bc, Model::Hom, |f| range_of(f) == 2).unwrap(), ratio(1, 3));
}

#[test]
fn lipschitz_counts_match_the_lift() {
    for (dims, expected) in [(&[4usize][..], 19u32), (&[2, 2][..], 19)] {
        let bc = BoundaryCondition::one_point(&torus(dims), 0).unwrap();
        let lift = LiftedBC::new(&bc).unwrap();
        let lip = count(&bc, Model::Lip).unwrap();
        assert_eq!(lip, count(&lift.lifted, Model::Hom).unwrap());
        assert_eq!(lip, expected.into());
    }
}

#[test]
fn lipschitz_range_law_is_the_shifted_lift_law() {
    for dims in [&[4usize][..], &[6], &[2, 2], &[2, 4]] {
        let bc = BoundaryCondition::one_point(&torus(dims), 0).unwrap();
        let lift = LiftedBC::new(&bc).unwrap();
        let lip = exact_distribution(&bc, Model::Lip, &Statistic::Range).unwrap();
        let hom = exact_distribution(&lift.lifted, Model::Hom, &Statistic::Range).unwrap();
        let shifted: BTreeMap<_, _> = hom.support.iter().map(|(k, c)| (*k - 1, c.clone())).collect();
        assert_eq!(lip.support, shifted, "dims {dims:?}");
    }
}

/// Homomorphisms on the subgraph induced by `region`, with `fixed` vertices
/// at 1, by plain depth-first search.
fn restricted_homs(t: &TorusSpec, region: &[Vertex], fixed: &[Vertex]) -> Vec<Vec<i64>> {
    let mut order: Vec<Vertex> = fixed.to_vec();
    let mut placed = vec![false; t.vertex_count()];
    for &v in fixed {
        placed[v] = true;
    }
    let inside = |v: Vertex| region.binary_search(&v).is_ok();
    let mut i = 0;
    while i < order.len() {
        for &w in t.neighbors(order[i]) {
            if inside(w) && !placed[w] {
                placed[w] = true;
                order.push(w);
            }
        }
        i += 1;
    }
    assert_eq!(order.len(), region.len(), "region is connected to its boundary");
    let mut values = vec![i64::MIN; t.vertex_count()];
    for &v in fixed {
        values[v] = 1;
    }
    let mut out = Vec::new();
    fn go(k: usize, order: &[Vertex], fixed: usize, t: &TorusSpec, values: &mut [i64], region: &[Vertex], out: &mut Vec<Vec<i64>>) {
        if k == order.len() {
            out.push(region.iter().map(|&v| values[v]).collect());
            return;
        }
        if k < fixed {
            let ok = t.neighbors(order[k]).iter().all(|&w| values[w] == i64::MIN || (values[w] - 1).abs() == 1);
            if ok {
                go(k + 1, order, fixed, t, values, region, out);
            }
            return;
        }
        let v = order[k];
        let anchor = t.neighbors(v).iter().map(|&w| values[w]).find(|&h| h != i64::MIN).unwrap();
        for h in [anchor - 1, anchor + 1] {
            if t.neighbors(v).iter().all(|&w| values[w] == i64::MIN || (values[w] - h).abs() == 1) {
                values[v] = h;
                go(k + 1, order, fixed, t, values, region, out);
                values[v] = i64::MIN;
            }
        }
    }
    go(0, &order, fixed.len(), t, &mut values, region, &mut out);
    out.sort();
    out
}

/// comp(Γ, x), E_i(Γ, x) and the restrictions of f to comp(Γ, x) with counts.
type Group = (Vec<Vertex>, Vec<Vertex>, BTreeMap<Vec<i64>, u64>);

fn check_conditional_law(bc: &BoundaryCondition, x: Vertex) -> usize {
    let t = bc.torus();
    let mut groups: BTreeMap<Vec<(Vertex, Vertex)>, Group> = BTreeMap::new();
    for f in enumerate(bc, Model::Hom).unwrap() {
        let Some(gamma) = level_set(&f, x, bc).unwrap() else { continue };
        let entry = groups
            .entry(gamma.edges().to_vec())
            .or_insert_with(|| (gamma.component(x), gamma.inner_boundary(x), BTreeMap::new()));
        let restriction: Vec<i64> = entry.0.iter().map(|&v| f.at(v)).collect();
        *entry.2.entry(restriction).or_default() += 1;
    }
    for (region, inner, seen) in groups.values() {
        let mut region = region.clone();
        region.sort_unstable();
        let expected = restricted_homs(t, &region, inner);
        let got: Vec<Vec<i64>> = seen.keys().cloned().collect();
        assert_eq!(got, expected, "support of the conditional law");
        let first = *seen.values().next().unwrap();
        assert!(seen.values().all(|&c| c == first), "conditional law is not uniform");
    }
    groups.len()
}

#[test]
fn conditional_law_inside_a_level_set_is_uniform() {
    let square = torus(&[4, 4]);
    let zero = BoundaryCondition::zero(&square).unwrap();
    let x = square.index(&[1, 1]).unwrap();
    let y = square.index(&[2, 1]).unwrap();
    assert!(check_conditional_law(&zero, x) + check_conditional_law(&zero, y) > 0);
    let slab = torus(&[2, 2, 4]);
    let one = BoundaryCondition::one_point(&slab, 0).unwrap();
    let far = slab.index(&[1, 0, 2]).unwrap();
    assert!(check_conditional_law(&one, far) > 0);
}

/// Walls read straight off the coordinates: columns are the last axis and a
/// wall at even x means f is constant on the even vertices of columns x,
/// x+1 and on the odd vertices of columns x+1, x+2.
fn walls_by_coordinates(t: &TorusSpec, f: &HeightFunction) -> Vec<(usize, i64, i8)> {
    let n = *t.dims().last().unwrap();
    let mut out = Vec::new();
    for x in (0..n).step_by(2) {
        let pick = |cols: [usize; 2], parity: u8| -> Vec<i64> {
            (0..t.vertex_count())
                .filter(|&v| {
                    let c = t.coords(v);
                    cols.contains(c.last().unwrap()) && c.iter().sum::<usize>() % 2 == parity as usize
                })
                .map(|v| f.at(v))
                .collect()
        };
        let low = pick([x, x + 1], 0);
        let high = pick([x + 1, (x + 2) % n], 1);
        if low.iter().all(|&h| h == low[0]) && high.iter().all(|&h| h == high[0]) {
            out.push((x, low[0], (high[0] - low[0]) as i8));
        }
    }
    out
}

#[test]
fn wall_detection_matches_coordinate_scan() {
    let mut frozen = BTreeMap::new();
    for n in [6usize, 8] {
        let t = torus(&[2, n]);
        let bc = BoundaryCondition::one_point(&t, 0).unwrap();
        let mut histogram: BTreeMap<usize, u64> = BTreeMap::new();
        for f in enumerate(&bc, Model::Hom).unwrap() {
            let p = detect_walls(&f, &bc).unwrap();
            let detected: Vec<(usize, i64, i8)> =
                (0..p.len()).map(|k| (p.positions[k], p.heights[k], p.signs[k])).collect();
            assert_eq!(detected, walls_by_coordinates(&t, &f));
            *histogram.entry(p.len()).or_default() += 1;
        }
        frozen.insert(n, histogram);
    }
    assert_eq!(frozen[&8], BTreeMap::from([(0, 196), (1, 712), (2, 836), (3, 400), (4, 70)]));
}

#[test]
fn building_fibers_stay_below_the_bound() {
    for (n, largest) in [(6usize, None), (8, Some(12usize))] {
        let t = torus(&[2, n]);
        let bc = BoundaryCondition::one_point(&t, 0).unwrap();
        let layout = LinearLayout::from_bc(&bc).unwrap();
        assert_eq!(build_preimage_bound(&layout), 16);
        let homs = enumerate(&bc, Model::Hom).unwrap();
        let fiber = layout.sites().map(|x| max_build_preimage(&homs, x).unwrap()).max().unwrap();
        assert!(fiber as u128 <= 16);
        if let Some(v) = largest {
            assert_eq!(fiber, v);
        }
    }
}

#[test]
fn sampled_even_zero_fraction_matches_exact_mean() {
    let bc = BoundaryCondition::zero(&torus(&[4, 4])).unwrap();
    let exact = exact_distribution(&bc, Model::Hom, &Statistic::EvenZeroFraction).unwrap().mean();
    let exact = exact.to_f64().unwrap();
    let stats = batch_statistics(
        &bc,
        Model::Hom,
        RandomSource::new(44),
        10_000,
        &[Statistic::EvenZeroFraction],
        &Method::Cftp,
    )
    .unwrap();
    let s = &stats[0];
    assert!((s.mean - exact).abs() <= s.mean_radius, "sampled {} +/- {} vs exact {exact}", s.mean, s.mean_radius);
}

#[test]
fn zero_boundary_count_by_odd_assignments() {
    // Cross-check |Hom([4,4], zero)| by enumerating the free odd vertices'
    // values and counting completions of the free even ones.
    let t = torus(&[4, 4]);
    let bc = BoundaryCondition::zero(&t).unwrap();
    let free: Vec<Vertex> = (0..t.vertex_count()).filter(|&v| !bc.contains(v)).collect();
    let odd: Vec<Vertex> = free.iter().copied().filter(|&v| bc.is_odd(v)).collect();
    let even: Vec<Vertex> = free.iter().copied().filter(|&v| !bc.is_odd(v)).collect();
    let mut values = vec![0i64; t.vertex_count()];
    let mut total = 0u64;
    for mask in 0u32..(1 << odd.len()) {
        for (k, &v) in odd.iter().enumerate() {
            values[v] = if mask >> k & 1 == 1 { 1 } else { -1 };
        }
        // Odd vertices all touch B, so they are ±1; each free even vertex
        // then has choices {m - 1, m + 1} ∩ constraints from its neighbors.
        let mut ways = 1u64;
        for &v in &even {
            let nb: Vec<i64> = t.neighbors(v).iter().map(|&w| values[w]).collect();
            ways *= [-2i64, 0, 2].iter().filter(|&&h| nb.iter().all(|&m| (m - h).abs() == 1)).count() as u64;
        }
        total += ways;
    }
    assert!(odd.iter().all(|&v| t.neighbors(v).iter().any(|&w| bc.contains(w))));
    assert_eq!(count(&bc, Model::Hom).unwrap(), total.into());
    assert_eq!(total, 328);
}
