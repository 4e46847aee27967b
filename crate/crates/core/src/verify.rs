//! Property suite shared by the `verify` command and the acceptance tests.
//!
//! Every check returns a [`CheckResult`] carrying the measured quantity
//! next to its tolerance, so a failing line explains itself.

use crate::algebra::{
    classify, collide, cross_section_b, CollisionClass, ImpactPair, VelocityTriple,
};
use crate::algebra::check_collision_invariant;
use crate::convergence::{convergence_study, StudyConfig, StudyResult};
use crate::dynamics::{
    advance_in_place, next_collision, reverse_velocities, sample_initial, DynamicsOptions, SamplingBox, Scheduler,
    SimulationState,
};
use crate::error::Result;
use crate::geometry::{
    loglog_slope, mc_ellipsoid_cap_fractions, mc_sphere_cylinder_fractions, transition_jacobian, transition_jacobian_fd,
    transition_map, Configuration, RegionFamily,
};
use crate::kinetic::{
    entropy, excess_kurtosis, lwp_time, maxwellian_sampler, moments, q3_weak_moments, two_temperature_ensemble,
    CollisionKernel, DsmcSolver, MaxwellianParams, Q3Evaluator, VelocityLaw,
};
use crate::pseudo::{aggregate_gap_bound, proximity_check, stage_gap_bound, PseudoTrajectorySpec};
use crate::rng::{derive_seed, rng_from_seed};
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::SQRT_2;
use std::time::Instant;

/// Outcome of one check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    /// Short identifier.
    pub name: String,
    /// Whether the check passed.
    pub passed: bool,
    /// Measured values and tolerances.
    pub detail: String,
    /// Wall-clock seconds.
    pub seconds: f64,
}

impl CheckResult {
    fn new(name: &str, passed: bool, detail: String, start: Instant) -> Self {
        CheckResult {
            name: name.to_string(),
            passed,
            detail,
            seconds: start.elapsed().as_secs_f64(),
        }
    }

    fn from_error(name: &str, err: crate::error::Error, start: Instant) -> Self {
        Self::new(name, false, format!("error: {err}"), start)
    }

    /// One-line report `PASS name (1.2 s): detail`.
    pub fn line(&self) -> String {
        format!(
            "{} {} ({:.1} s): {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.seconds,
            self.detail
        )
    }
}

fn guard(name: &str, f: impl FnOnce(Instant) -> Result<CheckResult>) -> CheckResult {
    let start = Instant::now();
    f(start).unwrap_or_else(|e| CheckResult::from_error(name, e, start))
}

/// Conservation, micro-reversibility and involution of the collision map
/// over `n` random inputs per dimension in `d ∈ {2, 3}`.
pub fn check_collision_algebra(n: usize, seed: u64) -> CheckResult {
    guard("collision-algebra", |start| {
        let mut worst = [0.0f64; 5];
        for d in [2usize, 3] {
            let mut rng = rng_from_seed(derive_seed(seed, &[d as u64]));
            for _ in 0..n {
                let pair = ImpactPair::sample_uniform(d, &mut rng);
                let v = VelocityTriple::sample_normal(d, &mut rng);
                let w = collide(&pair, &v)?;
                let e = v.energy2();
                let scale = e.sqrt();
                let dp = v.momentum().sub(&w.momentum()).iter().fold(0.0f64, |m, x| m.max(x.abs())) / scale;
                let de = (w.energy2() - e).abs() / e;
                let r = v.relative_magnitude2();
                let dr = (w.relative_magnitude2() - r).abs() / r;
                let (n1, n2) = v.relatives();
                let (m1, m2) = w.relatives();
                let b = cross_section_b(&pair, &n1, &n2)?;
                let bs = cross_section_b(&pair, &m1, &m2)?;
                let db = (b + bs).abs() / scale;
                let back = collide(&pair, &w)?;
                let di = back.max_abs_diff(&v) / scale;
                for (slot, x) in worst.iter_mut().zip([dp, de, dr, db, di]) {
                    *slot = slot.max(x);
                }
            }
        }
        let passed = worst.iter().all(|x| *x <= 1e-12);
        Ok(CheckResult::new(
            "collision-algebra",
            passed,
            format!(
                "{} samples per d in {{2,3}}; max relative error momentum {:.2e}, energy {:.2e}, |relative velocity| {:.2e}, b*+b {:.2e}, involution {:.2e} (tol 1e-12)",
                n, worst[0], worst[1], worst[2], worst[3], worst[4]
            ),
            start,
        ))
    })
}

/// The worked collision, transition-map and Jacobian example.
pub fn check_worked_example() -> CheckResult {
    guard("worked-example", |start| {
        let h = 1.0 / SQRT_2;
        let pair = ImpactPair::new([h, 0.0], [0.0, h])?;
        let v = VelocityTriple::new([0.0, 0.0], [1.0, 0.0], [0.0, 1.0])?;
        let w = collide(&pair, &v)?;
        let expected = VelocityTriple::new([1.0, 1.0], [0.0, 0.0], [0.0, 0.0])?;
        let dc = w.max_abs_diff(&expected);
        let img = transition_map(&v, &pair)?;
        let dt = img
            .nu1
            .iter()
            .chain(img.nu2.iter())
            .map(|x| (x - 0.5).abs())
            .fold(0.0, f64::max);
        let res = img.ellipsoid_residual();
        let jac = transition_jacobian(&v, &pair)?;
        let fd = transition_jacobian_fd(&v, &pair, 1e-5)?;
        let class = classify(&pair, &v)?;
        let passed = dc <= 1e-12
            && dt <= 1e-12
            && res <= 1e-12
            && (jac - 4.5).abs() <= 1e-12
            && (fd - jac).abs() / jac <= 1e-5
            && class == CollisionClass::PostCollisional;
        Ok(CheckResult::new(
            "worked-example",
            passed,
            format!(
                "collide error {dc:.1e}; transition error {dt:.1e}, ellipsoid residual {res:.1e}; jacobian {jac:.15} (exact 4.5), finite difference {fd:.9} (rel {:.1e}, tol 1e-5)",
                (fd - jac).abs() / jac
            ),
            start,
        ))
    })
}

/// Collision invariants `1, v_i, |v|²` are conserved; `v_x³` is not.
pub fn check_collision_invariants(n: usize, seed: u64) -> CheckResult {
    guard("collision-invariants", |start| {
        let mut worst_inv: f64 = 0.0;
        let mut worst_cubic: f64 = f64::INFINITY;
        for d in [2usize, 3] {
            let s = derive_seed(seed, &[d as u64]);
            worst_inv = worst_inv.max(check_collision_invariant(|_| 1.0, d, n, s)?);
            for q in 0..d {
                worst_inv = worst_inv.max(check_collision_invariant(move |v| v[q], d, n, s)?);
            }
            worst_inv = worst_inv.max(check_collision_invariant(|v| v.iter().map(|x| x * x).sum(), d, n, s)?);
            worst_cubic = worst_cubic.min(check_collision_invariant(|v| v[0].powi(3), d, n, s)?);
        }
        Ok(CheckResult::new(
            "collision-invariants",
            worst_inv <= 1e-10 && worst_cubic >= 1e-3,
            format!(
                "{n} samples per d: max violation for 1, v, |v|^2 = {worst_inv:.2e} (tol 1e-10); v_x^3 = {worst_cubic:.3} (needs >= 1e-3)"
            ),
            start,
        ))
    })
}

/// The three-particle head-on event with `ε = 0.1`.
pub fn check_head_on() -> CheckResult {
    guard("dynamics-head-on", |start| {
        let z = Configuration::from_vecs(
            &[vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]],
            &[vec![0.0, 0.0], vec![-1.0, 0.0], vec![0.0, -1.0]],
        )?;
        let mut s = SimulationState::new(z, 0.1, crate::geometry::Boundary::FreeSpace)?;
        let ev = next_collision(&s, 10.0)?;
        let Some(ev) = ev else {
            return Ok(CheckResult::new("dynamics-head-on", false, "no event found".into(), start));
        };
        let h = 1.0 / SQRT_2;
        let dpair = ev
            .pair
            .to_flat()
            .iter()
            .zip([h, 0.0, 0.0, h])
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        advance_in_place(&mut s, 1.0)?;
        let dv = s
            .config
            .velocities()
            .iter()
            .zip([-1.0, -1.0, 0.0, 0.0, 0.0, 0.0])
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        let passed = (ev.time - 0.9).abs() <= 1e-12 && dpair <= 1e-12 && dv <= 1e-12 && s.event_log.len() == 1;
        Ok(CheckResult::new(
            "dynamics-head-on",
            passed,
            format!(
                "event at {:.15} (expected 0.9), impact pair error {dpair:.1e}, post-velocity error {dv:.1e}, {} event(s)",
                ev.time,
                s.event_log.len()
            ),
            start,
        ))
    })
}

/// A dense periodic run used by the dynamics checks.
pub fn dense_run(n: usize, eps: f64, t_end: f64, scheduler: Scheduler, seed: u64) -> Result<(SimulationState, SimulationState)> {
    let region = SamplingBox {
        side: 1.0,
        periodic: true,
    };
    let law = VelocityLaw::Maxwellian(MaxwellianParams::standard(2));
    let z = sample_initial(n, eps, &law, region, seed)?;
    let init = SimulationState::new(z, eps, region.boundary())?.with_options(DynamicsOptions {
        scheduler,
        ..DynamicsOptions::default()
    });
    let mut end = init.clone();
    advance_in_place(&mut end, t_end)?;
    Ok((init, end))
}

fn same_triplet_violations(s: &SimulationState) -> usize {
    s.event_log
        .windows(2)
        .filter(|w| {
            let mut a = w[0].triplet;
            let mut b = w[1].triplet;
            a.sort_unstable();
            b.sort_unstable();
            a == b
        })
        .count()
}

/// Energy/momentum drift over runs with at least `min_events` collisions
/// (`N ≤ 64`), plus the same-triplet exclusion on their logs.
pub fn check_dynamics_conservation(runs: usize, min_events: usize, seed: u64) -> CheckResult {
    guard("dynamics-conservation", |start| {
        let mut worst: f64 = 0.0;
        let mut fewest = usize::MAX;
        let mut repeats = 0;
        for r in 0..runs {
            let n = 64;
            let mut t_end = 10.0;
            let (init, end) = loop {
                let (init, end) = dense_run(n, 0.03, t_end, Scheduler::NeighborChunks, derive_seed(seed, &[r as u64]))?;
                if end.event_log.len() >= min_events {
                    break (init, end);
                }
                t_end *= 2.0;
            };
            fewest = fewest.min(end.event_log.len());
            let e0 = init.config.kinetic_energy();
            let de = (end.config.kinetic_energy() - e0).abs() / e0;
            let scale = (2.0 * e0 * n as f64).sqrt();
            let dp = init
                .config
                .momentum()
                .iter()
                .zip(end.config.momentum())
                .map(|(a, b)| (a - b).abs() / scale)
                .fold(0.0, f64::max);
            worst = worst.max(de).max(dp);
            repeats += same_triplet_violations(&end);
        }
        Ok(CheckResult::new(
            "dynamics-conservation",
            worst <= 1e-9 && repeats == 0,
            format!(
                "{runs} runs of N = 64 with >= {fewest} events: max relative energy/momentum drift {worst:.2e} (tol 1e-9); consecutive same-triplet events {repeats}"
            ),
            start,
        ))
    })
}

/// Run forward, reverse velocities, run back; compare with the start.
/// Only runs whose every contact has `|b| > 1e-3` are counted.
///
/// Runs last one time unit (about four collisions each).  The dynamics are
/// chaotic: at `N = 32`, `ε = 0.03` a position perturbation of `1e-15`
/// grows to `1e-9`–`1e-5` by `t = 3`, so longer round trips measure the
/// Lyapunov amplification of rounding rather than the engine.
pub fn check_reversibility(runs: usize, seed: u64) -> CheckResult {
    guard("dynamics-reversibility", |start| {
        let mut worst: f64 = 0.0;
        let mut counted = 0;
        let mut events = 0;
        let mut attempt = 0u64;
        while counted < runs && attempt < 20 * runs as u64 {
            attempt += 1;
            let t = 1.0;
            let (init, end) = dense_run(32, 0.03, t, Scheduler::NeighborChunks, derive_seed(seed, &[attempt]))?;
            if end.event_log.is_empty() || end.event_log.iter().any(|e| e.b_at_contact.abs() <= 1e-3) {
                continue;
            }
            let mut back = reverse_velocities(&end);
            back.event_log.clear();
            advance_in_place(&mut back, t)?;
            let mut diff = vec![0.0; 2];
            for i in 0..init.config.count() {
                init.boundary
                    .displacement(init.config.position(i), back.config.position(i), &mut diff);
                worst = worst.max(diff.iter().map(|x| x * x).sum::<f64>().sqrt());
            }
            counted += 1;
            events += end.event_log.len();
        }
        Ok(CheckResult::new(
            "dynamics-reversibility",
            counted == runs && worst <= 1e-7,
            format!("{counted} runs ({events} events): max round-trip position error {worst:.2e} (tol 1e-7)"),
            start,
        ))
    })
}

/// Both schedulers produce the same event sequence.
pub fn check_scheduler_agreement(seed: u64) -> CheckResult {
    guard("dynamics-schedulers", |start| {
        let (_, a) = dense_run(24, 0.04, 2.0, Scheduler::FullRescan, seed)?;
        let (_, b) = dense_run(24, 0.04, 2.0, Scheduler::NeighborChunks, seed)?;
        let same = a.event_log.len() == b.event_log.len()
            && a.event_log
                .iter()
                .zip(&b.event_log)
                .all(|(x, y)| x.triplet == y.triplet && (x.time - y.time).abs() <= 1e-9);
        let dx = a
            .config
            .velocities()
            .iter()
            .zip(b.config.velocities())
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max);
        Ok(CheckResult::new(
            "dynamics-schedulers",
            same && dx <= 1e-9,
            format!(
                "{} vs {} events, final velocity difference {dx:.1e}",
                a.event_log.len(),
                b.event_log.len()
            ),
            start,
        ))
    })
}

/// Log-log slopes of the measure estimates for `d ∈ {2, 3}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureSlope {
    /// Dimension.
    pub d: usize,
    /// `sphere-cylinder` or an ellipsoid region tag.
    pub family: String,
    /// Fitted slope.
    pub slope: f64,
    /// Radii used by the fit.
    pub points_used: usize,
    /// Geometric exponent of the family (`d − 1` for cylinders, `d` for
    /// balls and the strip).
    pub exact_exponent: f64,
}

/// Radii `2^{-9}, …, 2^{-3}`.
pub fn measure_radii() -> Vec<f64> {
    (3..=9).rev().map(|k| 2f64.powi(-k)).collect()
}

/// Fit slopes for every family in `d ∈ {2, 3}` with `n_samples` each.
pub fn measure_slopes(n_samples: usize, seed: u64) -> Result<Vec<MeasureSlope>> {
    let radii = measure_radii();
    let mut out = Vec::new();
    for d in [2usize, 3] {
        let df = d as f64;
        let mut dir = vec![0.0; d];
        dir[0] = 1.0;
        let est = mc_sphere_cylinder_fractions(d, &vec![0.0; d], &dir, &radii, n_samples, derive_seed(seed, &[d as u64, 0]))?;
        if let Some(fit) = loglog_slope(&radii, &est, 10) {
            out.push(MeasureSlope {
                d,
                family: "sphere-cylinder".into(),
                slope: fit.slope,
                points_used: fit.points_used,
                exact_exponent: df - 1.0,
            });
        }
        for (k, tag) in ["cylinder-first", "ball-first", "ball-second", "strip"].iter().enumerate() {
            let family = RegionFamily::parse(tag, d)?;
            let est = mc_ellipsoid_cap_fractions(d, &family, &radii, n_samples, derive_seed(seed, &[d as u64, k as u64 + 1]))?;
            if let Some(fit) = loglog_slope(&radii, &est, 10) {
                out.push(MeasureSlope {
                    d,
                    family: tag.to_string(),
                    slope: fit.slope,
                    points_used: fit.points_used,
                    exact_exponent: if *tag == "cylinder-first" { df - 1.0 } else { df },
                });
            }
        }
    }
    Ok(out)
}

/// The measure estimates respect the small-measure bound: every fitted
/// slope is at least `(d − 1)/2 − 0.15` and within `0.15` of the
/// geometric exponent of its family.
pub fn check_measure_bounds(n_samples: usize, seed: u64) -> CheckResult {
    guard("measure-bounds", |start| {
        let slopes = measure_slopes(n_samples, seed)?;
        let passed = slopes.len() == 10
            && slopes.iter().all(|s| {
                let bound = (s.d as f64 - 1.0) / 2.0;
                s.slope >= bound - 0.15 && (s.slope - s.exact_exponent).abs() <= 0.15
            });
        let detail = slopes
            .iter()
            .map(|s| format!("d={} {} {:.3} (exponent {})", s.d, s.family, s.slope, s.exact_exponent))
            .collect::<Vec<_>>()
            .join("; ");
        Ok(CheckResult::new("measure-bounds", passed, detail, start))
    })
}

/// Per-step invariance of mass, momentum and energy under DSMC.
pub fn check_dsmc_moments(n: usize, steps: usize, seed: u64) -> CheckResult {
    guard("kinetic-moments", |start| {
        let ens = two_temperature_ensemble(2, n, 0.5, 2.0, derive_seed(seed, &[1]))?;
        let mut solver = DsmcSolver::new(ens, 10.0, CollisionKernel::Operator, derive_seed(seed, &[2]));
        let mut worst: f64 = 0.0;
        for _ in 0..steps {
            let before = moments(&solver.ensemble);
            solver.step(0.01)?;
            worst = worst.max(before.max_relative_deviation(&moments(&solver.ensemble)));
        }
        Ok(CheckResult::new(
            "kinetic-moments",
            worst <= 1e-12 && solver.total_collisions > 0,
            format!(
                "{steps} steps, {} collisions: max per-step relative moment change {worst:.2e} (tol 1e-12)",
                solver.total_collisions
            ),
            start,
        ))
    })
}

/// Histogram entropy is non-increasing (within three standard errors)
/// along a two-temperature relaxation.
pub fn check_entropy_monotone(n: usize, seed: u64) -> CheckResult {
    guard("kinetic-entropy", |start| {
        let ens = two_temperature_ensemble(2, n, 0.5, 2.0, derive_seed(seed, &[3]))?;
        let radius = 6.0 * 2f64.sqrt();
        let mut solver = DsmcSolver::new(ens, 10.0, CollisionKernel::Operator, derive_seed(seed, &[4]));
        let mut values = vec![entropy(&solver.ensemble, 32, radius)?];
        for k in 1..=10 {
            solver.run_until(0.5 * k as f64, 0.01)?;
            values.push(entropy(&solver.ensemble, 32, radius)?);
        }
        let mut worst = f64::NEG_INFINITY;
        for w in values.windows(2) {
            let se = (w[0].std_error.powi(2) + w[1].std_error.powi(2)).sqrt();
            worst = worst.max((w[1].value - w[0].value) / se);
        }
        Ok(CheckResult::new(
            "kinetic-entropy",
            worst <= 3.0,
            format!(
                "n = {n}: entropy {:.4} -> {:.4}; largest increase {worst:.2} standard errors (tol 3)",
                values[0].value,
                values.last().expect("non-empty").value
            ),
            start,
        ))
    })
}

/// `Q3` of a Maxwellian vanishes at probe velocities.
pub fn check_q3_maxwellian(n: usize, probes: usize, n_mc: usize, replicates: usize, seed: u64) -> CheckResult {
    guard("kinetic-q3-maxwellian", |start| {
        let ens = maxwellian_sampler(&MaxwellianParams::standard(2), n, derive_seed(seed, &[5]))?;
        let ev = Q3Evaluator::new(&ens, None, CollisionKernel::Operator)?
            .with_density_bootstrap(replicates, derive_seed(seed, &[12]))?;
        let mut rng = rng_from_seed(derive_seed(seed, &[6]));
        let mut worst: f64 = 0.0;
        for p in 0..probes {
            let v = [rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)];
            let est = ev.apply(&v, n_mc, derive_seed(seed, &[7, p as u64]))?;
            worst = worst.max(est.estimate.abs() / est.std_error);
        }
        Ok(CheckResult::new(
            "kinetic-q3-maxwellian",
            worst <= 3.0,
            format!("{probes} probes, {n_mc} draws each: max |Q3| / std_error = {worst:.2} (tol 3)"),
            start,
        ))
    })
}

/// Weak-form moments `∫ Q3 φ` of a Maxwellian vanish for `φ ∈ {1, v_x, |v|²}`.
pub fn check_q3_weak(n: usize, points_per_axis: usize, n_mc: usize, replicates: usize, seed: u64) -> CheckResult {
    guard("kinetic-q3-weak", |start| {
        let ens = maxwellian_sampler(&MaxwellianParams::standard(2), n, derive_seed(seed, &[8]))?;
        let ev = Q3Evaluator::new(&ens, None, CollisionKernel::Operator)?
            .with_density_bootstrap(replicates, derive_seed(seed, &[13]))?;
        let wm = q3_weak_moments(&ev, &[0.0, 0.0], 4.0, points_per_axis, n_mc, derive_seed(seed, &[9]))?;
        let z = [wm.mass, wm.momentum_x, wm.energy].map(|e| e.estimate.abs() / e.std_error);
        Ok(CheckResult::new(
            "kinetic-q3-weak",
            z.iter().all(|x| *x <= 3.0),
            format!(
                "mass {:.2e} ± {:.1e}, momentum {:.2e} ± {:.1e}, energy {:.2e} ± {:.1e}; max z = {:.2} (tol 3)",
                wm.mass.estimate,
                wm.mass.std_error,
                wm.momentum_x.estimate,
                wm.momentum_x.std_error,
                wm.energy.estimate,
                wm.energy.std_error,
                z.iter().cloned().fold(0.0, f64::max)
            ),
            start,
        ))
    })
}

/// Long-run excess kurtosis (averaged over late checkpoints and
/// components) is within `3/√n` of zero.
pub fn check_kurtosis(n: usize, seed: u64) -> CheckResult {
    guard("kinetic-kurtosis", |start| {
        let ens = two_temperature_ensemble(2, n, 0.5, 2.0, derive_seed(seed, &[10]))?;
        let initial = excess_kurtosis(&ens);
        let mut solver = DsmcSolver::new(ens, 10.0, CollisionKernel::Operator, derive_seed(seed, &[11]));
        solver.run_until(5.0, 0.02)?;
        let mut acc = 0.0;
        let mut count = 0;
        for k in 0..20 {
            solver.run_until(5.0 + 0.5 * (k + 1) as f64, 0.02)?;
            for x in excess_kurtosis(&solver.ensemble) {
                acc += x;
                count += 1;
            }
        }
        let mean = acc / count as f64;
        let tol = 3.0 / (n as f64).sqrt();
        Ok(CheckResult::new(
            "kinetic-kurtosis",
            mean.abs() <= tol,
            format!(
                "initial excess kurtosis {:.3}; late-time average {mean:.4} (tol {tol:.4})",
                initial[0]
            ),
            start,
        ))
    })
}

/// Pseudo-trajectory proximity over random histories with `k ≤ 5`.
pub fn check_pseudo_trajectories(n_specs: usize, seed: u64) -> CheckResult {
    guard("pseudo-trajectories", |start| {
        let mut rng = rng_from_seed(seed);
        let mut worst_ratio: f64 = 0.0;
        let mut worst_agg: f64 = 0.0;
        let mut velocity_ok = true;
        let mut bounds_ok = true;
        for _ in 0..n_specs {
            let d = rng.random_range(2..=3);
            let s = rng.random_range(1..=3);
            let k = rng.random_range(0..=5);
            let eps = 10f64.powf(rng.random_range(-4.0..-1.0));
            let spec = PseudoTrajectorySpec::random(s, k, d, 1.0, eps, &mut rng);
            let mut x = vec![0.0; s * d];
            let mut v = vec![0.0; s * d];
            x.iter_mut().for_each(|a| *a = rng.random_range(-1.0..1.0));
            crate::rng::fill_normal(&mut rng, &mut v);
            let z = Configuration::from_flat(d, x, v)?;
            let rep = proximity_check(&z, &spec)?;
            velocity_ok &= rep.velocity_equal;
            bounds_ok &= rep.within_bounds(&spec, 1e-12);
            for (i, g) in rep.stage_gaps.iter().enumerate() {
                if i > 0 {
                    worst_ratio = worst_ratio.max(g / stage_gap_bound(eps, i));
                }
            }
            let n = k + s + 1;
            for g in &rep.aggregate_gaps {
                worst_agg = worst_agg.max(g / aggregate_gap_bound(eps, n));
            }
        }
        Ok(CheckResult::new(
            "pseudo-trajectories",
            velocity_ok && bounds_ok,
            format!(
                "{n_specs} histories: velocities equal {velocity_ok}; max stage gap / (√2 ε i) = {worst_ratio:.3}; max aggregate gap / (√6 n^1.5 ε) = {worst_agg:.3}"
            ),
            start,
        ))
    })
}

/// Closed-form local well-posedness horizon.
pub fn check_lwp() -> CheckResult {
    guard("lwp-time", |start| {
        let t = lwp_time(2, 1.0, 0.0)?;
        let direct = (-1f64).exp() / (64.0 * (1.0 + SQRT_2));
        let rel = (t - direct).abs() / direct;
        Ok(CheckResult::new(
            "lwp-time",
            rel <= 1e-6 && (t - 2.381e-3).abs() <= 5e-7,
            format!("lwp_time(2, 1, 0) = {t:.6e}, direct {direct:.6e}, relative difference {rel:.1e}"),
            start,
        ))
    })
}

/// Verdicts of a convergence study as check results.
pub fn study_checks(result: &StudyResult) -> Vec<CheckResult> {
    let start = Instant::now();
    let mut out = Vec::new();
    let table = |t: f64| {
        result
            .rows
            .iter()
            .filter(|r| r.t_end == t)
            .map(|r| {
                format!(
                    "N={} {:.4} [{:.4}, {:.4}]",
                    r.n, r.distance, r.ci_lo, r.ci_hi
                )
            })
            .collect::<Vec<_>>()
            .join(", ")
    };
    if let Some(ok) = result.verdicts.initial_within_floor {
        let detail = result
            .rows
            .iter()
            .filter(|r| r.t_end == 0.0)
            .map(|r| format!("N={} raw {:.4} vs floor q97.5 {:.4}", r.n, r.raw_distance, r.floor_q975))
            .collect::<Vec<_>>()
            .join(", ");
        out.push(CheckResult::new("study-initial-floor", ok, detail, start));
    }
    for (t, ok) in &result.verdicts.monotone {
        out.push(CheckResult::new(
            &format!("study-monotone-t{t}"),
            *ok,
            format!("corrected L1 distance with 95% CI: {}", table(*t)),
            start,
        ));
    }
    out
}

/// Suite size.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SuiteLevel {
    /// Reduced sample sizes, no convergence study (seconds).
    Quick,
    /// Full sample sizes including the convergence study (minutes).
    Full,
}

/// Run the property suite.
pub fn run_suite(level: SuiteLevel, seed: u64) -> Vec<CheckResult> {
    let full = level == SuiteLevel::Full;
    let pick = |q: usize, f: usize| if full { f } else { q };
    let mut out = vec![
        check_collision_algebra(pick(10_000, 100_000), derive_seed(seed, &[1])),
        check_worked_example(),
        check_collision_invariants(pick(2_000, 10_000), derive_seed(seed, &[2])),
        check_head_on(),
        check_dynamics_conservation(pick(1, 4), pick(300, 1000), derive_seed(seed, &[3])),
        check_reversibility(pick(8, 32), derive_seed(seed, &[4])),
        check_scheduler_agreement(derive_seed(seed, &[5])),
        check_measure_bounds(1_000_000, derive_seed(seed, &[6])),
        check_dsmc_moments(pick(2_000, 10_000), pick(20, 100), derive_seed(seed, &[7])),
        check_entropy_monotone(pick(5_000, 10_000), derive_seed(seed, &[8])),
        check_q3_maxwellian(pick(50_000, 200_000), pick(5, 20), pick(20_000, 100_000), pick(12, 24), derive_seed(seed, &[9])),
        check_q3_weak(pick(50_000, 200_000), pick(8, 12), pick(10_000, 20_000), pick(12, 24), derive_seed(seed, &[10])),
        check_kurtosis(pick(5_000, 10_000), derive_seed(seed, &[11])),
        check_pseudo_trajectories(pick(200, 1000), derive_seed(seed, &[12])),
        check_lwp(),
    ];
    if full {
        let mut cfg = StudyConfig::default_2d();
        cfg.master_seed = derive_seed(seed, &[13]);
        match convergence_study(&cfg) {
            Ok(res) => out.extend(study_checks(&res)),
            Err(e) => out.push(CheckResult::from_error("study", e, Instant::now())),
        }
    }
    out
}
