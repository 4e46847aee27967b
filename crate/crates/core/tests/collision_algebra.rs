use proptest::prelude::*;
use std::f64::consts::SQRT_2;
use ternary_kinetics::algebra::check_collision_invariant;
use ternary_kinetics::rng::rng_from_seed;
use ternary_kinetics::{
    c_factor, classify, collide, cross_section_b, impact_pair_for_solution, is_conservation_solution, CollisionClass,
    ErrorKind, ImpactPair, VelocityTriple,
};

const H: f64 = 1.0 / SQRT_2;

fn worked_pair() -> ImpactPair {
    ImpactPair::new(vec![H, 0.0], vec![0.0, H]).unwrap()
}

fn worked_velocities() -> VelocityTriple {
    VelocityTriple::new(vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]).unwrap()
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

#[test]
fn cross_section_of_worked_example_is_sqrt2() {
    let b = cross_section_b(&worked_pair(), &[1.0, 0.0], &[0.0, 1.0]).unwrap();
    assert!(close(b, SQRT_2, 1e-15), "b = {b}");
}

#[test]
fn cross_section_vanishes_for_zero_relative_velocities() {
    let b = cross_section_b(&worked_pair(), &[0.0, 0.0], &[0.0, 0.0]).unwrap();
    assert_eq!(b, 0.0);
}

#[test]
fn cross_section_flips_on_post_collisional_relatives() {
    let pair = worked_pair();
    let w = collide(&pair, &worked_velocities()).unwrap();
    let (n1, n2) = w.relatives();
    let b = cross_section_b(&pair, &n1, &n2).unwrap();
    assert!(close(b, -SQRT_2, 1e-15), "b* = {b}");
}

#[test]
fn c_factor_oracles() {
    let c = c_factor(&worked_pair(), &worked_velocities()).unwrap();
    assert!(close(c, SQRT_2, 1e-15));
    let diagonal = ImpactPair::new(vec![0.5, 0.5], vec![0.5, 0.5]).unwrap();
    let c = c_factor(&diagonal, &worked_velocities()).unwrap();
    assert!(close(c, 2.0 / 3.0, 1e-15), "c = {c}");
    // (ω1, ω2) orthogonal to (v2 − v1, v3 − v1) = ((1,0),(0,1)).
    let orth = ImpactPair::new(vec![0.0, H], vec![H, 0.0]).unwrap();
    assert_eq!(c_factor(&orth, &worked_velocities()).unwrap(), 0.0);
}

#[test]
fn collide_worked_example() {
    let w = collide(&worked_pair(), &worked_velocities()).unwrap();
    let expected = VelocityTriple::new(vec![1.0, 1.0], vec![0.0, 0.0], vec![0.0, 0.0]).unwrap();
    assert!(w.max_abs_diff(&expected) <= 1e-15, "{w:?}");
}

#[test]
fn grazing_collision_is_identity() {
    let orth = ImpactPair::new(vec![0.0, H], vec![H, 0.0]).unwrap();
    let v = worked_velocities();
    assert_eq!(collide(&orth, &v).unwrap(), v);
    assert_eq!(classify(&orth, &v).unwrap(), CollisionClass::Grazing);
}

#[test]
fn classification_oracles() {
    let pair = worked_pair();
    assert_eq!(classify(&pair, &worked_velocities()).unwrap(), CollisionClass::PostCollisional);
    // Incoming velocities of the head-on dynamics example: b = −√2.
    let incoming = VelocityTriple::new(vec![0.0, 0.0], vec![-1.0, 0.0], vec![0.0, -1.0]).unwrap();
    assert_eq!(classify(&pair, &incoming).unwrap(), CollisionClass::PreCollisional);
    assert_eq!(CollisionClass::from_b(0.0), CollisionClass::Grazing);
}

#[test]
fn conservation_solution_oracles() {
    let v = worked_velocities();
    assert!(is_conservation_solution(&v, &v, 1e-12).unwrap());
    let w = collide(&worked_pair(), &v).unwrap();
    assert!(is_conservation_solution(&v, &w, 1e-12).unwrap());
    let bad = VelocityTriple::new(vec![1.0, 1.0], vec![1.0, 0.0], vec![0.0, 1.0]).unwrap();
    assert!(!is_conservation_solution(&v, &bad, 1e-12).unwrap());
}

#[test]
fn impact_pair_is_recovered_from_worked_solution() {
    let v = worked_velocities();
    let w = collide(&worked_pair(), &v).unwrap();
    let pair = impact_pair_for_solution(&v, &w).unwrap().expect("non-trivial solution");
    let again = collide(&pair, &v).unwrap();
    assert!(again.max_abs_diff(&w) <= 1e-12);
}

#[test]
fn mismatched_dimensions_are_usage_errors() {
    let err = VelocityTriple::new(vec![0.0, 0.0], vec![1.0, 0.0, 0.0], vec![0.0, 1.0]).unwrap_err();
    assert_eq!(err.kind(), ErrorKind::Usage);
    let err = collide(&worked_pair(), &VelocityTriple::new(vec![0.0; 3], vec![0.0; 3], vec![0.0; 3]).unwrap())
        .unwrap_err();
    assert_eq!(err.kind(), ErrorKind::Usage);
}

#[test]
fn invariant_characterization() {
    for d in [2, 3] {
        assert!(check_collision_invariant(|_| 1.0, d, 10_000, 1).unwrap() <= 1e-12);
        for k in 0..d {
            assert!(check_collision_invariant(|v| v[k], d, 10_000, 2).unwrap() <= 1e-10);
        }
        let e = check_collision_invariant(|v| v.iter().map(|x| x * x).sum(), d, 10_000, 3).unwrap();
        assert!(e <= 1e-10, "energy violation {e}");
        let cubic = check_collision_invariant(|v| v[0].powi(3), d, 10_000, 4).unwrap();
        assert!(cubic >= 1e-3, "cubic violation {cubic}");
    }
}

fn random_input(d: usize, seed: u64, scale: f64) -> (ImpactPair, VelocityTriple) {
    let mut rng = rng_from_seed(seed);
    let pair = ImpactPair::sample_uniform(d, &mut rng);
    let v = VelocityTriple::sample_normal(d, &mut rng);
    let s = |x: &ternary_kinetics::SpatialVector| x.scale(scale);
    (pair, VelocityTriple::new(s(&v.v1), s(&v.v2), s(&v.v3)).unwrap())
}

proptest! {
    #[test]
    fn collide_conserves_momentum_and_energy(d in 2usize..=3, seed in any::<u64>(), scale in 1e-3f64..1e3) {
        let (pair, v) = random_input(d, seed, scale);
        let w = collide(&pair, &v).unwrap();
        let (p0, p1) = (v.momentum(), w.momentum());
        for k in 0..d {
            prop_assert!((p0[k] - p1[k]).abs() <= 1e-12 * (1.0 + p0.norm()) * scale.max(1.0));
        }
        let (e0, e1) = (v.energy2(), w.energy2());
        prop_assert!((e0 - e1).abs() <= 1e-12 * (1.0 + e0));
        let (r0, r1) = (v.relative_magnitude2(), w.relative_magnitude2());
        prop_assert!((r0 - r1).abs() <= 1e-12 * (1.0 + r0));
    }

    #[test]
    fn collide_is_an_involution(d in 2usize..=3, seed in any::<u64>()) {
        let (pair, v) = random_input(d, seed, 1.0);
        let back = collide(&pair, &collide(&pair, &v).unwrap()).unwrap();
        prop_assert!(back.max_abs_diff(&v) <= 1e-12 * (1.0 + v.energy2().sqrt()));
    }

    #[test]
    fn cross_section_is_micro_reversible(d in 2usize..=3, seed in any::<u64>()) {
        let (pair, v) = random_input(d, seed, 1.0);
        let (n1, n2) = v.relatives();
        let b = cross_section_b(&pair, &n1, &n2).unwrap();
        let w = collide(&pair, &v).unwrap();
        let (m1, m2) = w.relatives();
        let b_star = cross_section_b(&pair, &m1, &m2).unwrap();
        prop_assert!((b + b_star).abs() <= 1e-12 * (1.0 + b.abs()));
        prop_assert_eq!(classify(&pair, &v).unwrap().opposite(), classify(&pair, &w).unwrap());
    }

    #[test]
    fn negated_pair_gives_same_collision(d in 2usize..=3, seed in any::<u64>()) {
        let (pair, v) = random_input(d, seed, 1.0);
        let a = collide(&pair, &v).unwrap();
        let b = collide(&pair.negated(), &v).unwrap();
        prop_assert!(a.max_abs_diff(&b) <= 1e-12 * (1.0 + v.energy2().sqrt()));
    }

    #[test]
    fn sampled_pairs_lie_on_the_sphere(d in 2usize..=3, seed in any::<u64>()) {
        let (pair, _) = random_input(d, seed, 1.0);
        prop_assert!(pair.sphere_residual() <= 1e-12);
        prop_assert!(1.0 + pair.inner() >= 0.5 - 1e-12);
    }

    #[test]
    fn every_collision_output_is_a_conservation_solution(d in 2usize..=3, seed in any::<u64>()) {
        let (pair, v) = random_input(d, seed, 1.0);
        let w = collide(&pair, &v).unwrap();
        prop_assert!(is_conservation_solution(&v, &w, 1e-9).unwrap());
        if let Some(found) = impact_pair_for_solution(&v, &w).unwrap() {
            let again = collide(&found, &v).unwrap();
            prop_assert!(again.max_abs_diff(&w) <= 1e-9);
        }
    }
}
