use proptest::prelude::*;
use std::f64::consts::{E, PI, SQRT_2};
use ternary_kinetics::kinetic::{
    dsmc_step, entropy, entropy_dissipation_mc, excess_kurtosis, fit_maxwellian, lwp_time, matched_rate_const,
    maxwellian_sampler, moments, q3_apply_mc, sphere_area, two_temperature_ensemble, DsmcSolver,
};
use ternary_kinetics::rng::rng_from_seed;
use ternary_kinetics::{CollisionKernel, Error, ErrorKind, MaxwellianParams, VelocityEnsemble};
use rand::Rng;

#[test]
fn moments_of_a_single_sample() {
    let ens = VelocityEnsemble::from_flat(2, vec![1.0, 0.0], 1.0).unwrap();
    let m = moments(&ens);
    assert_eq!(m.mass, 1.0);
    assert_eq!(m.momentum.0, vec![1.0, 0.0]);
    assert_eq!(m.energy, 0.5);
    let empty = VelocityEnsemble::from_flat(2, vec![1.0, 0.0, 2.0, 3.0], 0.0).unwrap();
    let m = moments(&empty);
    assert_eq!((m.mass, m.energy), (0.0, 0.0));
    assert!(m.momentum.iter().all(|x| *x == 0.0));
}

#[test]
fn sampler_mean_matches_bulk_velocity() {
    let p = MaxwellianParams::new(1.0, vec![0.5, -1.0], 2.0).unwrap();
    let n = 100_000;
    let ens = maxwellian_sampler(&p, n, 11).unwrap();
    let mean = ens.mean_velocity();
    let band = 3.0 * (p.t / n as f64).sqrt();
    for (m, u) in mean.iter().zip(p.u.iter()) {
        assert!((m - u).abs() <= band, "{m} vs {u}");
    }
}

#[test]
fn fit_inverts_the_sampler() {
    let p = MaxwellianParams::new(2.0, vec![0.3, -0.7, 1.1], 1.5).unwrap();
    let fit = fit_maxwellian(&maxwellian_sampler(&p, 1_000_000, 12).unwrap()).unwrap();
    assert!((fit.r - p.r).abs() <= 0.01 * p.r);
    assert!((fit.t - p.t).abs() <= 0.01 * p.t);
    for (a, b) in fit.u.iter().zip(p.u.iter()) {
        assert!((a - b).abs() <= 0.01 * b.abs().max(1.0));
    }
    let repeated = VelocityEnsemble::from_flat(2, vec![1.0, 2.0, 1.0, 2.0, 1.0, 2.0], 1.0).unwrap();
    assert!(fit_maxwellian(&repeated).is_err());
    let single = VelocityEnsemble::from_flat(2, vec![1.0, 2.0], 1.0).unwrap();
    assert_eq!(fit_maxwellian(&single).unwrap_err().kind(), ErrorKind::Usage);
}

#[test]
fn zero_rate_only_moves_the_clock() {
    let ens = two_temperature_ensemble(2, 1000, 0.5, 2.0, 1).unwrap();
    let out = dsmc_step(&ens, 0.1, 0.0, 2).unwrap();
    assert_eq!(out.samples(), ens.samples());
    assert!((out.clock - 0.1).abs() <= 1e-15);
}

#[test]
fn oversized_step_is_a_stability_error() {
    let ens = two_temperature_ensemble(2, 10, 0.5, 2.0, 1).unwrap();
    let err = dsmc_step(&ens, 1e6, 10.0, 2).unwrap_err();
    assert!(matches!(err, Error::Stability { .. }), "{err}");
}

#[test]
fn maxwellian_entropy_matches_closed_form() {
    let ens = maxwellian_sampler(&MaxwellianParams::standard(2), 100_000, 13).unwrap();
    let h = entropy(&ens, 48, 6.0).unwrap();
    let exact = -(1.0 + (2.0 * PI).ln());
    assert!((h.value - exact).abs() <= 0.02 * exact.abs(), "{} vs {exact}", h.value);
}

#[test]
fn uniform_entropy_is_log_inverse_volume() {
    let mut rng = rng_from_seed(14);
    let n = 200_000;
    let flat: Vec<f64> = (0..2 * n).map(|_| rng.random_range(-1.0..1.0)).collect();
    let ens = VelocityEnsemble::from_flat(2, flat, 1.0 / n as f64).unwrap();
    // A 16×16 grid on the support, slightly widened to absorb the sample mean.
    let h = entropy(&ens, 16, 1.0 + 1e-2).unwrap();
    let exact = -(4.0f64).ln();
    assert!((h.value - exact).abs() <= 0.03, "{} vs {exact}", h.value);
}

#[test]
fn entropy_rejects_narrow_support_and_coarse_grids() {
    let ens = maxwellian_sampler(&MaxwellianParams::standard(2), 10_000, 15).unwrap();
    assert!(matches!(entropy(&ens, 16, 1.0).unwrap_err(), Error::SupportExceeded { .. }));
    assert_eq!(entropy(&ens, 4, 6.0).unwrap_err().kind(), ErrorKind::Usage);
}

#[test]
fn entropy_decreases_during_relaxation() {
    let ens = two_temperature_ensemble(2, 10_000, 0.5, 2.0, 16).unwrap();
    let radius = 6.0 * SQRT_2;
    let before = entropy(&ens, 32, radius).unwrap();
    let mut solver = DsmcSolver::new(ens, 10.0, CollisionKernel::Operator, 17);
    solver.run_until(3.0, 0.01).unwrap();
    let after = entropy(&solver.ensemble, 32, radius).unwrap();
    let se = (before.std_error.powi(2) + after.std_error.powi(2)).sqrt();
    assert!(after.value < before.value - 3.0 * se, "{} -> {}", before.value, after.value);
}

#[test]
fn relaxation_removes_excess_kurtosis() {
    let ens = two_temperature_ensemble(2, 8_000, 0.5, 2.0, 18).unwrap();
    let initial = excess_kurtosis(&ens);
    assert!(initial.iter().all(|k| *k > 0.8), "{initial:?}");
    let mut solver = DsmcSolver::new(ens, 10.0, CollisionKernel::Operator, 19);
    solver.run_until(10.0, 0.02).unwrap();
    let late = excess_kurtosis(&solver.ensemble);
    let band = 4.0 * (24.0 / 8_000f64).sqrt();
    assert!(late.iter().all(|k| k.abs() <= band), "{late:?}");
}

#[test]
fn q3_of_maxwellian_vanishes_within_error() {
    let ens = maxwellian_sampler(&MaxwellianParams::standard(2), 50_000, 20).unwrap();
    for (p, v) in [[0.0, 0.0], [1.0, -0.5], [-1.5, 1.5]].iter().enumerate() {
        let est = q3_apply_mc(&ens, v, 20_000, 21 + p as u64).unwrap();
        assert!(est.std_error > 0.0);
        assert!(est.estimate.abs() <= 3.0 * est.std_error, "{v:?}: {est:?}");
    }
}

#[test]
fn dissipation_of_a_mixture_is_positive() {
    let ens = two_temperature_ensemble(2, 50_000, 0.25, 4.0, 22).unwrap();
    let d = entropy_dissipation_mc(&ens, 50_000, 23).unwrap();
    assert!(d.reliable);
    assert!(d.estimate > 3.0 * d.std_error, "{d:?}");
}

#[test]
fn lwp_time_oracles() {
    let expected = E.recip() / (64.0 * (1.0 + SQRT_2));
    let t = lwp_time(2, 1.0, 0.0).unwrap();
    assert!((t - expected).abs() <= 1e-12 * expected);
    assert!((t - 2.381e-3).abs() <= 1e-6);
    assert!(lwp_time(2, 1.0, 0.5).unwrap() > t);
    assert!(lwp_time(2, 1e-6, 0.0).unwrap() < 1e-20);
    assert_eq!(lwp_time(2, 0.0, 0.0).unwrap_err().kind(), ErrorKind::Usage);
}

#[test]
fn matched_rate_in_two_dimensions() {
    // |S^3| = 2π², 2^{3/2} c0³ / L⁴.
    assert!((sphere_area(4) - 2.0 * PI * PI).abs() <= 1e-12);
    let r = matched_rate_const(2, 0.3, 1.0);
    assert!((r - 2.0 * PI * PI * 2f64.powf(1.5) * 0.027).abs() <= 1e-12);
}

#[test]
fn kernels_parse_and_vanish_on_outgoing_contacts() {
    assert_eq!(CollisionKernel::parse("operator").unwrap(), CollisionKernel::Operator);
    assert_eq!(CollisionKernel::parse("flux").unwrap(), CollisionKernel::Flux);
    assert!(CollisionKernel::parse("hard").is_err());
    assert_eq!(CollisionKernel::Operator.value(-1.0, 0.0), 0.0);
    assert!((CollisionKernel::Operator.value(1.0, -0.5) - SQRT_2).abs() <= 1e-15);
    assert_eq!(CollisionKernel::Flux.value(1.0, -0.5), 1.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn dsmc_steps_conserve_moments(seed in any::<u64>(), d in 2usize..=3, flux in any::<bool>()) {
        let ens = two_temperature_ensemble(d, 600, 0.5, 2.0, seed).unwrap();
        let kernel = if flux { CollisionKernel::Flux } else { CollisionKernel::Operator };
        let mut solver = DsmcSolver::new(ens, 20.0, kernel, seed ^ 0x5eed);
        for _ in 0..5 {
            let before = moments(&solver.ensemble);
            solver.step(0.02).unwrap();
            prop_assert!(before.max_relative_deviation(&moments(&solver.ensemble)) <= 1e-12);
        }
        prop_assert!(solver.total_collisions > 0);
    }

    #[test]
    fn run_until_lands_on_the_target(seed in any::<u64>(), t in 0.01f64..0.5) {
        let ens = two_temperature_ensemble(2, 200, 0.5, 2.0, seed).unwrap();
        let mut solver = DsmcSolver::new(ens, 5.0, CollisionKernel::Operator, seed);
        solver.run_until(t, 0.03).unwrap();
        prop_assert!((solver.ensemble.clock - t).abs() <= 1e-12);
    }
}
