use proptest::prelude::*;
use std::f64::consts::SQRT_2;
use ternary_kinetics::dynamics::{epsilon_for_scaling, reverse_velocities, sample_initial, sample_initial_with_stats, SamplingBox};
use ternary_kinetics::{
    advance, advance_in_place, classify, next_collision, Boundary, CollisionClass, Configuration, DynamicsOptions,
    Error, ErrorKind, MaxwellianParams, Scheduler, SimulationState, VelocityLaw,
};

fn head_on(v2: [f64; 2], v3: [f64; 2], scheduler: Scheduler) -> SimulationState {
    let z = Configuration::from_vecs(
        &[vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]],
        &[vec![0.0, 0.0], v2.to_vec(), v3.to_vec()],
    )
    .unwrap();
    SimulationState::new(z, 0.1, Boundary::FreeSpace)
        .unwrap()
        .with_options(DynamicsOptions {
            scheduler,
            ..DynamicsOptions::default()
        })
}

fn standard_law(d: usize) -> VelocityLaw {
    VelocityLaw::Maxwellian(MaxwellianParams::standard(d))
}

fn periodic_state(n: usize, eps: f64, scheduler: Scheduler, seed: u64) -> SimulationState {
    let region = SamplingBox {
        side: 1.0,
        periodic: true,
    };
    let z = sample_initial(n, eps, &standard_law(2), region, seed).unwrap();
    SimulationState::new(z, eps, region.boundary())
        .unwrap()
        .with_options(DynamicsOptions {
            scheduler,
            ..DynamicsOptions::default()
        })
}

fn max_position_gap(a: &SimulationState, b: &SimulationState) -> f64 {
    let mut diff = vec![0.0; a.config.dim()];
    (0..a.config.count())
        .map(|i| {
            a.boundary.displacement(a.config.position(i), b.config.position(i), &mut diff);
            diff.iter().map(|x| x * x).sum::<f64>().sqrt()
        })
        .fold(0.0, f64::max)
}

#[test]
fn head_on_contact_and_outcome() {
    for scheduler in [Scheduler::FullRescan, Scheduler::NeighborChunks] {
        let s = head_on([-1.0, 0.0], [0.0, -1.0], scheduler);
        let ev = next_collision(&s, 10.0).unwrap().expect("contact");
        assert!((ev.time - 0.9).abs() <= 1e-12);
        assert_eq!(ev.triplet, [0, 1, 2]);
        assert_eq!(ev.class, CollisionClass::PreCollisional);
        assert!((ev.b_at_contact + SQRT_2).abs() <= 1e-12);
        let out = advance(&s, 1.0).unwrap();
        assert_eq!(out.event_log.len(), 1);
        let expected = [-1.0, -1.0, 0.0, 0.0, 0.0, 0.0];
        for (a, b) in out.config.velocities().iter().zip(expected) {
            assert!((a - b).abs() <= 1e-12);
        }
        // After the contact at 0.9 particle 0 moves with (−1, −1) for 0.1.
        assert!((out.config.position(0)[0] + 0.1).abs() <= 1e-12);
        assert!((out.config.position(1)[0] - 0.1).abs() <= 1e-12);
    }
}

#[test]
fn receding_particles_never_meet() {
    let s = head_on([1.0, 0.0], [0.0, 1.0], Scheduler::FullRescan);
    assert!(next_collision(&s, 1e6).unwrap().is_none());
    let out = advance(&s, 5.0).unwrap();
    assert!(out.event_log.is_empty());
    assert!((out.config.position(1)[0] - 6.0).abs() <= 1e-12);
}

#[test]
fn reversing_turns_pre_into_post_collisional() {
    let s = head_on([-1.0, 0.0], [0.0, -1.0], Scheduler::FullRescan);
    let ev = next_collision(&s, 10.0).unwrap().unwrap();
    let at_contact = advance(&s, 0.9 - 1e-9).unwrap();
    let reversed = reverse_velocities(&at_contact);
    let [i, j, k] = ev.triplet;
    let v = reversed.config.velocity_triple(i, j, k);
    assert_eq!(classify(&ev.pair, &v).unwrap(), CollisionClass::PostCollisional);
    let twice = reverse_velocities(&reversed);
    assert_eq!(twice.config, at_contact.config);
    let (p0, p1) = (at_contact.config.momentum(), reversed.config.momentum());
    for (a, b) in p0.iter().zip(&p1) {
        assert_eq!(*a, -*b);
    }
}

#[test]
fn epsilon_scaling_oracles() {
    assert_eq!(epsilon_for_scaling(1, 1.0, 2).unwrap(), 1.0);
    assert!((epsilon_for_scaling(8, 1.0, 2).unwrap() - 0.25).abs() <= 1e-15);
    let invariant = |n: usize| n as f64 * epsilon_for_scaling(n, 0.7, 2).unwrap().powf(1.5);
    for n in [10, 100, 1000] {
        assert!((invariant(n) / invariant(10) - 1.0).abs() <= 1e-12);
    }
    assert_eq!(epsilon_for_scaling(0, 1.0, 2).unwrap_err().kind(), ErrorKind::Usage);
}

#[test]
fn initial_sampling_oracles() {
    let region = SamplingBox {
        side: 1.0,
        periodic: false,
    };
    let (_, attempts) = sample_initial_with_stats(1, 0.5, &standard_law(2), region, false, 1).unwrap();
    assert_eq!(attempts, 1);
    let mut accepted_first = 0;
    for seed in 0..200 {
        let (_, attempts) = sample_initial_with_stats(3, 1e-3, &standard_law(2), region, false, seed).unwrap();
        accepted_first += usize::from(attempts == 1);
    }
    assert!(accepted_first >= 198, "{accepted_first} of 200");
    let err = sample_initial(40, 1.0, &standard_law(2), region, 3).unwrap_err();
    assert!(matches!(err, Error::ConfigurationDensity { .. }), "{err}");
    assert_eq!(err.kind(), ErrorKind::Domain);
}

#[test]
fn periodic_box_must_exceed_interaction_range() {
    let z = Configuration::from_vecs(&[vec![0.0, 0.0]], &[vec![0.0, 0.0]]).unwrap();
    let err = SimulationState::new(z, 0.2, Boundary::PeriodicBox { side: 1.0 }).unwrap_err();
    assert_eq!(err.kind(), ErrorKind::Usage);
}

#[test]
fn periodic_images_collide() {
    // Head-on geometry across the box boundary: the partners sit 0.3 away
    // through the wrap and approach, so q(τ) = 2(0.3 − τ)² − 0.02 vanishes
    // at τ = 0.2.
    let z = Configuration::from_vecs(
        &[vec![0.05, 0.05], vec![0.75, 0.05], vec![0.05, 0.75]],
        &[vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]],
    )
    .unwrap();
    for scheduler in [Scheduler::FullRescan, Scheduler::NeighborChunks] {
        let s = SimulationState::new(z.clone(), 0.1, Boundary::PeriodicBox { side: 1.0 })
            .unwrap()
            .with_options(DynamicsOptions {
                scheduler,
                ..DynamicsOptions::default()
            });
        let out = advance(&s, 0.25).unwrap();
        assert_eq!(out.event_log.len(), 1, "{scheduler:?}");
        assert!((out.event_log[0].time - 0.2).abs() <= 1e-12);
    }
}

#[test]
fn runaway_is_stopped_by_the_event_budget() {
    let mut s = periodic_state(64, 0.03, Scheduler::NeighborChunks, 7);
    s.options.max_events = 5;
    let err = advance_in_place(&mut s, 10.0).unwrap_err();
    assert!(matches!(err, Error::Runaway { .. }), "{err}");
}

#[test]
fn negative_duration_is_rejected() {
    let s = head_on([1.0, 0.0], [0.0, 1.0], Scheduler::FullRescan);
    assert_eq!(advance(&s, -1.0).unwrap_err().kind(), ErrorKind::Usage);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn dense_runs_conserve_energy_and_momentum(seed in any::<u64>()) {
        let s = periodic_state(48, 0.04, Scheduler::NeighborChunks, seed);
        let out = advance(&s, 1.5).unwrap();
        let (e0, e1) = (s.config.kinetic_energy(), out.config.kinetic_energy());
        prop_assert!((e0 - e1).abs() <= 1e-9 * e0);
        let scale = (2.0 * e0 * 48.0).sqrt();
        for (a, b) in s.config.momentum().iter().zip(out.config.momentum()) {
            prop_assert!((a - b).abs() <= 1e-9 * scale);
        }
        for w in out.event_log.windows(2) {
            prop_assert!(w[0].triplet != w[1].triplet);
            prop_assert!(w[1].time >= w[0].time);
        }
        for ev in &out.event_log {
            prop_assert_eq!(ev.class, CollisionClass::PreCollisional);
        }
    }

    #[test]
    fn schedulers_agree(seed in any::<u64>()) {
        let a = advance(&periodic_state(24, 0.05, Scheduler::FullRescan, seed), 1.0).unwrap();
        let b = advance(&periodic_state(24, 0.05, Scheduler::NeighborChunks, seed), 1.0).unwrap();
        prop_assert_eq!(a.event_log.len(), b.event_log.len());
        for (x, y) in a.event_log.iter().zip(&b.event_log) {
            prop_assert_eq!(x.triplet, y.triplet);
            prop_assert!((x.time - y.time).abs() <= 1e-9);
        }
        for (x, y) in a.config.velocities().iter().zip(b.config.velocities()) {
            prop_assert!((x - y).abs() <= 1e-8);
        }
    }

    #[test]
    fn short_runs_are_reversible(seed in any::<u64>()) {
        let s = periodic_state(32, 0.03, Scheduler::NeighborChunks, seed);
        let t = 0.5;
        let out = advance(&s, t).unwrap();
        prop_assume!(out.event_log.iter().all(|e| e.b_at_contact.abs() > 1e-3));
        let mut back = reverse_velocities(&out);
        back.event_log.clear();
        advance_in_place(&mut back, t).unwrap();
        prop_assert!(max_position_gap(&s, &back) <= 1e-7);
    }

    #[test]
    fn flow_property_holds(seed in any::<u64>(), a in 0.0f64..1.0, b in 0.0f64..1.0) {
        let s = periodic_state(20, 0.04, Scheduler::NeighborChunks, seed);
        let split = advance(&advance(&s, a).unwrap(), b).unwrap();
        let whole = advance(&s, a + b).unwrap();
        prop_assert!(max_position_gap(&split, &whole) <= 1e-9);
        prop_assert_eq!(split.event_log.len(), whole.event_log.len());
    }

    #[test]
    fn sampled_configurations_are_admissible(seed in any::<u64>(), n in 3usize..40) {
        let region = SamplingBox { side: 1.0, periodic: true };
        let z = sample_initial(n, 0.05, &standard_law(3), region, seed).unwrap();
        let opts = ternary_kinetics::geometry::PhaseSpaceOptions {
            boundary: region.boundary(),
            ..Default::default()
        };
        prop_assert!(ternary_kinetics::geometry::in_phase_space_with(&z, 0.05, &opts));
        prop_assert_eq!(z.count(), n);
        prop_assert!(z.positions().iter().all(|x| (0.0..1.0).contains(x)));
    }
}
