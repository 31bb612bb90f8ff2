//! Property tests for the structural invariants of each module.

use proptest::prelude::*;

use heightlab::bijections::{yadin_forward, yadin_inverse};
use heightlab::cutsets::level_set;
use heightlab::height::{extremal_functions, range_of, validate};
use heightlab::oracle::{enumerate, enumerate_naive, exact_distribution, Statistic};
use heightlab::sampler::{cftp_sample, heat_bath_step, RandomSource};
use heightlab::transforms::{inverse_shift, inverse_t2, t1, t2, t2_signs};
use heightlab::walls::{flip_half, flip_wall, LinearLayout};
use heightlab::{BoundaryCondition, HeightFunction, Model, TorusSpec};

const SMALL: &[&[usize]] = &[&[4], &[6], &[8], &[2, 2], &[2, 4], &[4, 4], &[2, 6], &[2, 2, 2], &[2, 2, 4]];
const NAIVE: &[&[usize]] = &[&[4], &[6], &[8], &[2, 2], &[2, 4], &[2, 2, 2]];
const LIFT: &[&[usize]] = &[&[4], &[6], &[4, 4], &[2, 6], &[6, 6]];
const MEDIUM: &[&[usize]] = &[&[4, 4], &[4, 6], &[6, 6], &[2, 2, 6], &[4, 4, 4], &[8, 8]];

fn torus(dims: &[usize]) -> TorusSpec {
    TorusSpec::new(dims).unwrap()
}

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig { cases, ..ProptestConfig::default() }
}

fn sample(bc: &BoundaryCondition, model: Model, seed: u64) -> HeightFunction {
    cftp_sample(bc, model, RandomSource::new(seed)).unwrap()
}

proptest! {
    #![proptest_config(config(24))]

    #[test]
    fn distance_matches_bfs_and_is_a_metric(dims in prop::sample::select(MEDIUM), u in 0usize..64, v in 0usize..64, w in 0usize..64) {
        let t = torus(dims);
        let n = t.vertex_count();
        let (u, v, w) = (u % n, v % n, w % n);
        let bfs = t.to_graph().bfs(&[u]);
        prop_assert_eq!(t.distance(u, v), bfs[v] as usize);
        prop_assert_eq!(t.distance(u, v), t.distance(v, u));
        prop_assert!(t.distance(u, w) <= t.distance(u, v) + t.distance(v, w));
    }

    #[test]
    fn edges_join_the_two_classes(dims in prop::sample::select(MEDIUM)) {
        let t = torus(dims);
        for (a, b) in t.edges() {
            prop_assert_ne!(t.parity(a), t.parity(b));
        }
    }

    #[test]
    fn boundary_edges_are_degree_times_top_face(dims in prop::sample::select(MEDIUM), r in 0usize..8) {
        let t = torus(dims);
        let m = t.ball_metrics(r);
        prop_assert_eq!(m.boundary_edges, t.degree() as u64 * m.top_size);
    }

    #[test]
    fn volume_doubles_on_linear_scales(n in prop::sample::select(&[8usize, 12, 16, 20, 32][..]), inner in prop::sample::select(&[2usize, 4][..])) {
        let t = torus(&[inner, n]);
        for r in 0..=(n - 3) / 4 {
            prop_assert!(t.ball_metrics(2 * r + 1).volume >= 2 * t.ball_metrics(r).volume);
        }
    }

    #[test]
    fn enumerated_functions_respect_parity_and_sandwich(dims in prop::sample::select(SMALL), b in 0usize..16) {
        let t = torus(dims);
        let bc = BoundaryCondition::one_point(&t, b % t.vertex_count()).unwrap();
        let (lo, hi) = extremal_functions(&bc, Model::Hom).unwrap();
        prop_assert!(validate(&lo, &bc).is_valid() && validate(&hi, &bc).is_valid());
        for f in enumerate(&bc, Model::Hom).unwrap() {
            for v in 0..t.vertex_count() {
                prop_assert_eq!(f.at(v).rem_euclid(2) as u8, bc.class_of(v));
                prop_assert!(lo.at(v) <= f.at(v) && f.at(v) <= hi.at(v));
            }
            prop_assert!(range_of(&f) >= 2);
        }
    }

    #[test]
    fn propagation_agrees_with_naive_search(dims in prop::sample::select(NAIVE), lip in any::<bool>()) {
        let t = torus(dims);
        let bc = BoundaryCondition::one_point(&t, 0).unwrap();
        let model = if lip { Model::Lip } else { Model::Hom };
        let mut fast: Vec<Vec<i64>> = enumerate(&bc, model).unwrap().into_iter().map(|f| f.values).collect();
        let mut slow: Vec<Vec<i64>> = enumerate_naive(&bc, model).unwrap().into_iter().map(|f| f.values).collect();
        fast.sort();
        slow.sort();
        prop_assert_eq!(fast, slow);
    }

    #[test]
    fn zero_boundary_laws_are_symmetric(dims in prop::sample::select(SMALL), v in 0usize..16) {
        let t = torus(dims);
        let bc = BoundaryCondition::one_point(&t, 0).unwrap();
        let d = exact_distribution(&bc, Model::Hom, &Statistic::HeightAt(v % t.vertex_count())).unwrap();
        prop_assert_eq!(d.negated(), d);
    }
}

proptest! {
    #![proptest_config(config(64))]

    #[test]
    fn heat_bath_is_monotone(dims in prop::sample::select(SMALL), i in any::<prop::sample::Index>(), j in any::<prop::sample::Index>(), v in 1usize..16, u in 0.0f64..1.0, lip in any::<bool>()) {
        let t = torus(dims);
        let bc = BoundaryCondition::one_point(&t, 0).unwrap();
        let model = if lip { Model::Lip } else { Model::Hom };
        let all = enumerate(&bc, model).unwrap();
        let (a, b) = (i.get(&all), j.get(&all));
        let lo_vals: Vec<i64> = a.values.iter().zip(&b.values).map(|(x, y)| *x.min(y)).collect();
        let hi_vals: Vec<i64> = a.values.iter().zip(&b.values).map(|(x, y)| *x.max(y)).collect();
        let lo = HeightFunction::new(t.clone(), lo_vals, model).unwrap();
        let hi = HeightFunction::new(t.clone(), hi_vals, model).unwrap();
        let v = 1 + v % (t.vertex_count() - 1);
        let lo2 = heat_bath_step(&lo, &bc, v, u).unwrap();
        let hi2 = heat_bath_step(&hi, &bc, v, u).unwrap();
        prop_assert!(lo2.values.iter().zip(&hi2.values).all(|(x, y)| x <= y));
        prop_assert!(validate(&lo2, &bc).is_valid() && validate(&hi2, &bc).is_valid());
    }

    #[test]
    fn same_seed_same_sample(dims in prop::sample::select(MEDIUM), seed in any::<u64>()) {
        let bc = BoundaryCondition::one_point(&torus(dims), 0).unwrap();
        prop_assert_eq!(sample(&bc, Model::Hom, seed), sample(&bc, Model::Hom, seed));
    }
}

proptest! {
    #![proptest_config(config(32))]

    #[test]
    fn level_sets_depend_only_on_the_mask(dims in prop::sample::select(MEDIUM), seed in any::<u64>(), zero in any::<bool>()) {
        let t = torus(dims);
        let bc = if zero { BoundaryCondition::zero(&t).unwrap() } else { BoundaryCondition::one_point(&t, 0).unwrap() };
        let f = sample(&bc, Model::Hom, seed);
        let mut g = f.clone();
        for val in g.values.iter_mut() {
            *val = if *val <= 0 { 0 } else { 1 };
        }
        for x in 0..t.vertex_count() {
            prop_assert_eq!(level_set(&f, x, &bc).unwrap(), level_set(&g, x, &bc).unwrap());
        }
    }

    #[test]
    fn level_sets_are_disjoint_or_equal(dims in prop::sample::select(MEDIUM), seed in any::<u64>()) {
        let t = torus(dims);
        let bc = BoundaryCondition::zero(&t).unwrap();
        let f = sample(&bc, Model::Hom, seed);
        let sets: Vec<_> = (0..t.vertex_count()).filter_map(|x| level_set(&f, x, &bc).unwrap()).collect();
        for a in &sets {
            prop_assert!(a.is_omcut());
            for b in &sets {
                let shared = a.edges().iter().any(|e| b.contains_edge(e.0, e.1));
                prop_assert!(!shared || a == b);
            }
        }
    }

    #[test]
    fn transform_images_are_valid_and_invertible(dims in prop::sample::select(&MEDIUM[..4]), seed in any::<u64>(), x in 0usize..64) {
        let t = torus(dims);
        let bc = BoundaryCondition::zero(&t).unwrap();
        let f = sample(&bc, Model::Hom, seed);
        let x = x % t.vertex_count();
        prop_assume!(level_set(&f, x, &bc).unwrap().is_some());
        let (gamma, image) = t1(&f, &bc, x, 0).unwrap();
        prop_assert_eq!(image.len(), 1u64 << gamma.e11(0).len());
        for g in image.iter().take(64) {
            prop_assert!(validate(&g, &bc).is_valid());
            prop_assert_eq!(inverse_shift(&g, &bc, &gamma, 0).unwrap(), f.clone());
        }
        let (gamma2, image2) = t2(&f, &bc, x, 0).unwrap();
        let signs = t2_signs(&f, &gamma2, 0);
        for g in image2.iter().take(64) {
            prop_assert!(validate(&g, &bc).is_valid());
            prop_assert_eq!(inverse_t2(&g, &bc, &gamma2, &signs, 0).unwrap(), f.clone());
        }
    }

    #[test]
    fn wall_flips_are_involutions(n in prop::sample::select(&[6usize, 8, 10, 12][..]), seed in any::<u64>()) {
        let t = torus(&[2, n]);
        let bc = BoundaryCondition::one_point(&t, 0).unwrap();
        let layout = LinearLayout::from_bc(&bc).unwrap();
        let f = sample(&bc, Model::Hom, seed);
        for x in layout.profile(&f).positions {
            let g = flip_wall(&f, x).unwrap();
            prop_assert!(layout.in_relaxed_class(&g));
            prop_assert_eq!(flip_wall(&g, x).unwrap(), f.clone());
        }
        for k in -3i64..=3 {
            let g = flip_half(&f, 2 * k).unwrap();
            prop_assert!(layout.in_hom(&g));
            prop_assert_eq!(flip_half(&g, 2 * k).unwrap(), f.clone());
        }
    }

    #[test]
    fn lift_roundtrip_on_samples(dims in prop::sample::select(LIFT), seed in any::<u64>()) {
        let bc = BoundaryCondition::one_point(&torus(dims), 0).unwrap();
        let g = sample(&bc, Model::Lip, seed);
        let lifted = yadin_inverse(&g).unwrap();
        prop_assert!(lifted.torus.edges().iter().all(|&(a, b)| (lifted.at(a) - lifted.at(b)).abs() == 1));
        prop_assert_eq!(range_of(&lifted), range_of(&g) + 1);
        prop_assert_eq!(yadin_forward(&lifted).unwrap(), g);
    }
}
