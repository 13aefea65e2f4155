mod common;

use common::{grid_oracle, random_threefold, Threefold};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use torus_bundle::solver::{
    classify_case, connect, connectivity_certificate, sample_solutions, solve_kodaira, solve_threefold, ConstraintSystem,
    SolutionWitness, WITNESS_TOL,
};

fn tf(a_plus: f64, a_minus: f64, d: [[f64; 2]; 2], l: [[f64; 2]; 4]) -> Threefold {
    Threefold { a_plus, a_minus, d, l }
}

const Z2: [[f64; 2]; 2] = [[0.0; 2]; 2];
const Z4: [[f64; 2]; 4] = [[0.0; 2]; 4];

#[test]
fn kodaira_zero_l_is_the_quadrant() {
    let sys = ConstraintSystem::kodaira(0.0, 0.0, 0.0, 0.0, 1.0).unwrap();
    let set = solve_kodaira(&sys).unwrap();
    assert_eq!(set.dimension, Some(2));
    assert_eq!(set.witnesses.len(), 3);
}

#[test]
fn kodaira_negative_b1_is_empty() {
    let sys = ConstraintSystem::kodaira(1.0, 1.0, -1.0, 1.0, 1.0).unwrap();
    let set = solve_kodaira(&sys).unwrap();
    assert!(set.is_empty());
    let (shape, _) = common::kodaira_grid([1.0, 1.0, -1.0, 1.0]);
    assert_eq!(shape, common::Shape::Empty);
}

#[test]
fn kodaira_hyperbola_is_connected() {
    let sys = ConstraintSystem::kodaira(0.0, 2.0, 1.0, 0.0, 1.0).unwrap();
    let set = solve_kodaira(&sys).unwrap();
    assert_eq!(set.dimension, Some(1));
    for w in &set.witnesses {
        assert!((w.point[0] * w.point[1] - 2.0).abs() < 1e-12);
    }
    let cert = connectivity_certificate(&sys, 10, 5);
    assert_eq!(cert.component_count, 1);
    assert!(cert.reverify(&sys));
}

#[test]
fn central_quadric_witness() {
    let t = tf(1.0, 1.0, Z2, Z4);
    let sys = t.system();
    assert_eq!(classify_case(&sys).label, "L0.D0");
    assert!(sys.verifies(&[1.0, 1.0, 0.0, 0.0, 1.0], 0.0));
    let set = solve_threefold(&sys).unwrap();
    // half-line times the three-dimensional quadric
    assert_eq!(set.dimension, Some(4));
}

#[test]
fn central_quadric_with_negative_ratio_is_empty() {
    let t = tf(1.0, -1.0, Z2, Z4);
    assert!(solve_threefold(&t.system()).unwrap().is_empty());
    assert!(grid_oracle(&t).is_none());
}

#[test]
fn independent_rows_need_positive_alpha() {
    // ℓ = e₁, m' = e₂, λ = e₁, μ = e₂ gives α = -1
    let t = tf(0.0, 0.0, Z2, [[1.0, 0.0], [0.0, 1.0], [0.0, 1.0], [1.0, 0.0]]);
    let sys = t.system();
    let info = classify_case(&sys);
    assert_eq!(info.label, "L.indep");
    assert_eq!(info.constants["alpha"], -1.0);
    assert!(solve_threefold(&sys).unwrap().is_empty());
    assert!(grid_oracle(&t).is_none());
}

#[test]
fn independent_rows_point() {
    // λ = -e₁ makes α = 1; D = I gives c₁ = b'(M₁) ≠ 0
    let t = tf(1.0, 2.0, [[1.0, 0.0], [0.0, 1.0]], [[1.0, 0.0], [0.0, 1.0], [0.0, 1.0], [-1.0, 0.0]]);
    let sys = t.system();
    let set = solve_threefold(&sys).unwrap();
    let info = &set.case;
    let expect_empty = {
        let (c1, c) = (info.constants["c1"], info.constants["c"]);
        c1 == 0.0 || -c / c1 <= 0.0
    };
    assert_eq!(set.is_empty(), expect_empty);
    assert_eq!(grid_oracle(&t).is_none(), expect_empty);
    if !expect_empty {
        assert_eq!(set.dimension, Some(0));
        assert_eq!(set.witnesses.len(), 1);
    }
}

#[test]
fn sampler_is_deterministic_and_lands_on_det_one() {
    let sys = tf(1.0, 1.0, Z2, Z4).system();
    let a = sample_solutions(&sys, 100, 42).unwrap();
    let b = sample_solutions(&sys, 100, 42).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.len(), 100);
    for w in &a {
        let p = &w.point;
        assert!(p[0] > 0.0);
        assert!((p[1] * p[4] - p[2] * p[3] - 1.0).abs() <= 1e-9);
    }
}

#[test]
fn sampling_an_empty_set_fails() {
    let sys = tf(1.0, -1.0, Z2, Z4).system();
    assert!(sample_solutions(&sys, 5, 0).is_err());
    let cert = connectivity_certificate(&sys, 5, 0);
    assert_eq!((cert.witnesses.len(), cert.component_count), (0, 0));
}

fn witness(sys: &ConstraintSystem, p: &[f64]) -> SolutionWitness {
    SolutionWitness::verified(sys, p, WITNESS_TOL, "test").expect("valid witness")
}

#[test]
fn connect_trivial_and_along_det_one() {
    let sys = tf(1.0, 1.0, Z2, Z4).system();
    let p = witness(&sys, &[1.0, 1.0, 0.0, 0.0, 1.0]);
    assert_eq!(connect(&p, &p, &sys).unwrap().len(), 1);
    let q = witness(&sys, &[1.0, 2.0, 0.0, 0.0, 0.5]);
    let path = connect(&p, &q, &sys).unwrap();
    assert!(path.len() > 2);
    for v in &path {
        assert!(sys.verifies(v, 1e-7));
    }
}

#[test]
fn connect_across_b_prime_zero() {
    // D = e₁e₁ᵀ gives b' = b₁₂; the sheets b₁₂ > 0 and b₁₂ < 0 meet
    let t = tf(1.0, 1.0, [[1.0, 0.0], [0.0, 0.0]], Z4);
    let sys = t.system();
    // b·b₁₂ = det B - 1
    let p = witness(&sys, &[1.0, 2.0, 1.0, 0.0, 1.0]);
    let q = witness(&sys, &[1.0, 0.5, -0.5, 0.5, 0.5]);
    assert!(p.point[2] > 0.0 && q.point[2] < 0.0);
    let path = connect(&p, &q, &sys).unwrap();
    for v in &path {
        assert!(sys.verifies(v, 1e-7));
    }
}

#[test]
fn emptiness_agrees_with_grid_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut labels = std::collections::BTreeSet::new();
    for i in 0..60 {
        let t = random_threefold(&mut rng);
        let sys = t.system();
        let set = solve_threefold(&sys).unwrap();
        labels.insert(set.case.full_label());
        let oracle = grid_oracle(&t);
        assert_eq!(set.is_empty(), oracle.is_none(), "system {i}: {t:?} case {:?} oracle {oracle:?}", set.case);
        if !set.is_empty() {
            assert!(!set.witnesses.is_empty(), "system {i}: no witnesses for {:?}", set.case);
        }
    }
    assert!(labels.len() >= 6, "{labels:?}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn witnesses_satisfy_the_direct_equations(seed in 0u64..10_000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t = random_threefold(&mut rng);
        let set = solve_threefold(&t.system()).unwrap();
        for w in &set.witnesses {
            prop_assert!(Threefold::in_region(&w.point));
            let r = t.residual(&w.point);
            prop_assert!(r.iter().all(|v| v.abs() <= 1e-8), "{:?} {:?}", set.case, r);
        }
    }

    #[test]
    fn certificates_are_seed_deterministic(seed in 0u64..1_000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sys = random_threefold(&mut rng).system();
        let a = connectivity_certificate(&sys, 4, seed);
        let b = connectivity_certificate(&sys, 4, seed);
        prop_assert_eq!(a, b);
    }
}

#[test]
fn hyperboloid_sheets_join_across_the_bridge() {
    // b' changes sign on the solution set; the sheets meet where b' = 0 and det B = 1
    let t = tf(2.0, 2.0, [[3.0, 1.0], [1.0, -1.0]], Z4);
    let sys = t.system();
    let mut signs = (false, false);
    for seed in 0..100 {
        let cert = connectivity_certificate(&sys, 20, seed);
        assert_eq!(cert.component_count, 1, "seed {seed}");
        for w in &cert.witnesses {
            let p = &w.point;
            let bp = sys.b_prime(&[p[1], p[2], p[3], p[4]]);
            signs = (signs.0 || bp > 0.0, signs.1 || bp < 0.0);
        }
    }
    assert_eq!(signs, (true, true));
}
