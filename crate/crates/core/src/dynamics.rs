//! Event-driven simulation of the ε-interaction-zone flow.
//!
//! Particles move freely until some triplet `(i; j, k)` reaches the
//! interaction boundary `|x_i − x_j|² + |x_i − x_k|² = 2ε²` with a
//! pre-collisional cross-section; the three velocities are then replaced by
//! the collisional transformation with the contact impact pair
//! `ω = (x_j − x_i, x_k − x_i) / (√2 ε)`.

use crate::algebra::{collide_in_place, CollisionClass, ImpactPair};
use crate::error::{Error, Result};
use crate::geometry::{Boundary, Configuration};
use crate::kinetic::VelocityLaw;
use crate::rng::rng_from_seed;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::SQRT_2;

/// Two candidate events closer than this in time and sharing a particle
/// abort the run.
pub const SIMULTANEITY_WINDOW: f64 = 1e-12;
/// Re-detections of the last processed triplet closer than this are ignored.
pub const TIME_FLOOR: f64 = 1e-14;
/// Default event-count circuit breaker.
pub const DEFAULT_MAX_EVENTS: u64 = 10_000_000;

/// One ternary collision.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CollisionEvent {
    /// Absolute time of the contact.
    pub time: f64,
    /// `(centre, j, k)`; with the default ordered convention `centre < j < k`.
    pub triplet: [usize; 3],
    /// Contact impact pair `(x_j − x_i, x_k − x_i) / (√2 ε)`.
    pub pair: ImpactPair,
    /// Cross-section of the incoming velocities at contact.
    pub b_at_contact: f64,
    /// Classification of the incoming velocities at contact.
    pub class: CollisionClass,
}

/// Strategy used by [`advance`] to find the next collision.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Scheduler {
    /// Scan every triplet before every event (`O(m³)` per event).
    FullRescan,
    /// Split time into chunks short enough that only triplets whose pair
    /// distances are below a cutoff at the start of the chunk can collide
    /// during it; scan only those.  Exact: produces the same events as
    /// [`Scheduler::FullRescan`].
    NeighborChunks,
}

/// Tunable parameters of the dynamics engine.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DynamicsOptions {
    /// Use every particle of a triple as a possible centre.
    pub symmetric: bool,
    /// Contacts with `|b| ≤ grazing_tol · |W|` are skipped, where `|W|` is
    /// the norm of the triplet's relative velocity vector.
    pub grazing_tol: f64,
    /// Event-count circuit breaker per call to [`advance`].
    pub max_events: u64,
    /// Event search strategy.
    pub scheduler: Scheduler,
    /// Keep every event in the state's log.
    pub record_events: bool,
}

impl Default for DynamicsOptions {
    fn default() -> Self {
        DynamicsOptions {
            symmetric: false,
            grazing_tol: 1e-12,
            max_events: DEFAULT_MAX_EVENTS,
            scheduler: Scheduler::NeighborChunks,
            record_events: true,
        }
    }
}

/// A particle system together with its clock and event history.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationState {
    /// Current positions and velocities.
    pub config: Configuration,
    /// Interaction-zone scale ε.
    pub eps: f64,
    /// Current time.
    pub time: f64,
    /// Processed collisions in chronological order.
    pub event_log: Vec<CollisionEvent>,
    /// Spatial domain.
    pub boundary: Boundary,
    /// Engine parameters.
    pub options: DynamicsOptions,
    /// Total number of collisions processed (also when not recorded).
    pub event_count: u64,
}

impl SimulationState {
    /// Wrap a configuration at time zero.
    pub fn new(config: Configuration, eps: f64, boundary: Boundary) -> Result<Self> {
        if !(eps > 0.0) {
            return Err(Error::Usage(format!("eps must be positive, got {eps}")));
        }
        if let Boundary::PeriodicBox { side } = boundary {
            if !(side > 4.0 * SQRT_2 * eps) {
                return Err(Error::Usage(format!(
                    "periodic box side {side} must exceed 4·√2·eps = {}",
                    4.0 * SQRT_2 * eps
                )));
            }
        }
        let mut config = config;
        for i in 0..config.count() {
            boundary.wrap(config.position_mut(i));
        }
        Ok(SimulationState {
            config,
            eps,
            time: 0.0,
            event_log: Vec::new(),
            boundary,
            options: DynamicsOptions::default(),
            event_count: 0,
        })
    }

    /// Replace the engine options.
    pub fn with_options(mut self, options: DynamicsOptions) -> Self {
        self.options = options;
        self
    }
}

/// Per-triplet contact prediction.
#[derive(Debug, Clone, Copy)]
struct Contact {
    tau: f64,
    triplet: [usize; 3],
}

/// Scratch buffers for triplet evaluation.
struct Scratch {
    d1: Vec<f64>,
    d2: Vec<f64>,
}

impl Scratch {
    fn new(d: usize) -> Self {
        Scratch {
            d1: vec![0.0; d],
            d2: vec![0.0; d],
        }
    }
}

/// Earliest pre-collisional contact of triplet `(c; j, k)` from now, if any.
#[inline]
fn triplet_contact(
    z: &Configuration,
    boundary: &Boundary,
    eps: f64,
    grazing_tol: f64,
    [c, j, k]: [usize; 3],
    s: &mut Scratch,
) -> Option<Contact> {
    let xc = z.position(c);
    boundary.displacement(xc, z.position(j), &mut s.d1);
    boundary.displacement(xc, z.position(k), &mut s.d2);
    let (vc, vj, vk) = (z.velocity(c), z.velocity(j), z.velocity(k));
    let mut a = 0.0;
    let mut b = 0.0;
    let mut cc = -2.0 * eps * eps;
    for q in 0..s.d1.len() {
        let w1 = vj[q] - vc[q];
        let w2 = vk[q] - vc[q];
        a += w1 * w1 + w2 * w2;
        b += s.d1[q] * w1 + s.d2[q] * w2;
        cc += s.d1[q] * s.d1[q] + s.d2[q] * s.d2[q];
    }
    if !(a > 0.0) || b >= 0.0 {
        return None;
    }
    let scale = SQRT_2 * eps;
    let (tau, b_contact) = if cc > 0.0 {
        let disc = b * b - a * cc;
        if disc <= 0.0 {
            return None;
        }
        let sq = disc.sqrt();
        (cc / (sq - b), -sq / scale)
    } else {
        (0.0, b / scale)
    };
    if b_contact.abs() <= grazing_tol * a.sqrt() {
        return None;
    }
    Some(Contact {
        tau,
        triplet: [c, j, k],
    })
}

/// Tracks the earliest contact and every contact within the simultaneity
/// window of it.
struct EarliestTracker {
    best: Option<Contact>,
    near: Vec<Contact>,
    horizon: f64,
}

impl EarliestTracker {
    fn new(horizon: f64) -> Self {
        EarliestTracker {
            best: None,
            near: Vec::new(),
            horizon,
        }
    }

    #[inline]
    fn offer(&mut self, ct: Contact) {
        if ct.tau > self.horizon {
            return;
        }
        let best_tau = self.best.map_or(f64::INFINITY, |b| b.tau);
        if ct.tau > best_tau + SIMULTANEITY_WINDOW {
            return;
        }
        if ct.tau < best_tau {
            self.best = Some(ct);
            let cutoff = ct.tau + SIMULTANEITY_WINDOW;
            self.near.retain(|n| n.tau <= cutoff);
        }
        self.near.push(ct);
    }

    fn finish(self, now: f64) -> Result<Option<Contact>> {
        let Some(best) = self.best else { return Ok(None) };
        for other in &self.near {
            if other.triplet == best.triplet {
                continue;
            }
            if other.triplet.iter().any(|p| best.triplet.contains(p)) {
                return Err(Error::SimultaneousCollision {
                    time: now + best.tau,
                    first: best.triplet,
                    second: other.triplet,
                });
            }
        }
        Ok(Some(best))
    }
}

fn for_each_triplet(m: usize, symmetric: bool, mut f: impl FnMut([usize; 3])) {
    for i in 0..m {
        for j in (i + 1)..m {
            for k in (j + 1)..m {
                f([i, j, k]);
                if symmetric {
                    f([j, i, k]);
                    f([k, i, j]);
                }
            }
        }
    }
}

fn scan_all(state: &SimulationState, horizon: f64, last: Option<[usize; 3]>) -> Result<Option<Contact>> {
    let z = &state.config;
    let mut s = Scratch::new(z.dim());
    let mut tracker = EarliestTracker::new(horizon);
    let opts = &state.options;
    for_each_triplet(z.count(), opts.symmetric, |t| {
        if let Some(ct) = triplet_contact(z, &state.boundary, state.eps, opts.grazing_tol, t, &mut s) {
            if !(Some(t) == last && ct.tau < TIME_FLOOR) {
                tracker.offer(ct);
            }
        }
    });
    tracker.finish(state.time)
}

fn contact_pair(state: &SimulationState, [c, j, k]: [usize; 3]) -> Result<ImpactPair> {
    let d = state.config.dim();
    let mut d1 = vec![0.0; d];
    let mut d2 = vec![0.0; d];
    let xc = state.config.position(c);
    state.boundary.displacement(xc, state.config.position(j), &mut d1);
    state.boundary.displacement(xc, state.config.position(k), &mut d2);
    let s = 1.0 / (SQRT_2 * state.eps);
    d1.iter_mut().chain(d2.iter_mut()).for_each(|x| *x *= s);
    ImpactPair::new(d1, d2)
}

fn event_from_contact(state: &SimulationState, ct: &Contact) -> Result<CollisionEvent> {
    // Positions are assumed to have been advanced to the contact time.
    let pair = contact_pair(state, ct.triplet)?;
    let [c, j, k] = ct.triplet;
    let v = state.config.velocity_triple(c, j, k);
    let (n1, n2) = v.relatives();
    let b = crate::algebra::cross_section_raw(pair.omega1(), pair.omega2(), &n1, &n2);
    Ok(CollisionEvent {
        time: state.time,
        triplet: ct.triplet,
        pair,
        b_at_contact: b,
        class: CollisionClass::from_b(b),
    })
}

/// The next pre-collisional contact within `horizon` of the current time,
/// found by scanning every triplet.  The returned event carries the absolute
/// contact time and the contact impact pair; the state is not modified.
pub fn next_collision(state: &SimulationState, horizon: f64) -> Result<Option<CollisionEvent>> {
    if !(horizon > 0.0) {
        return Err(Error::Usage(format!("horizon must be positive, got {horizon}")));
    }
    let last = state.event_log.last().map(|e| e.triplet);
    let Some(ct) = scan_all(state, horizon, last)? else { return Ok(None) };
    let mut probe = state.clone();
    probe.event_log.clear();
    free_flight(&mut probe, ct.tau);
    event_from_contact(&probe, &ct).map(Some)
}

fn free_flight(state: &mut SimulationState, tau: f64) {
    let t = state.time + tau;
    flight_to(state, t);
}

/// Free flight up to the absolute time `t` (which becomes the clock value
/// exactly).
fn flight_to(state: &mut SimulationState, t: f64) {
    let tau = t - state.time;
    if tau > 0.0 {
        state.config.free_flight(tau);
        if let Boundary::PeriodicBox { .. } = state.boundary {
            let boundary = state.boundary;
            for i in 0..state.config.count() {
                boundary.wrap(state.config.position_mut(i));
            }
        }
        state.time = t;
    }
}

/// Apply the collision at the current (contact) time and log it.
fn process(state: &mut SimulationState, ct: &Contact, last: &mut Option<[usize; 3]>) -> Result<()> {
    let ev = event_from_contact(state, ct)?;
    let [c, j, k] = ct.triplet;
    let d = state.config.dim();
    let mut v1 = state.config.velocity(c).to_vec();
    let mut v2 = state.config.velocity(j).to_vec();
    let mut v3 = state.config.velocity(k).to_vec();
    collide_in_place(ev.pair.omega1(), ev.pair.omega2(), &mut v1, &mut v2, &mut v3);
    state.config.velocity_mut(c)[..d].copy_from_slice(&v1);
    state.config.velocity_mut(j)[..d].copy_from_slice(&v2);
    state.config.velocity_mut(k)[..d].copy_from_slice(&v3);
    *last = Some(ct.triplet);
    state.event_count += 1;
    if state.options.record_events {
        state.event_log.push(ev);
    }
    Ok(())
}

/// Evolve the system by `t` time units (free flight punctuated by
/// collisions), in place.
pub fn advance_in_place(state: &mut SimulationState, t: f64) -> Result<()> {
    if !(t >= 0.0) {
        return Err(Error::Usage(format!("advance time must be non-negative, got {t}")));
    }
    let target = state.time + t;
    let mut last = state.event_log.last().map(|e| e.triplet);
    let mut budget = state.options.max_events;
    match state.options.scheduler {
        Scheduler::FullRescan => loop {
            let remaining = target - state.time;
            if remaining <= 0.0 {
                break;
            }
            let horizon = remaining.min(rescan_horizon(state));
            match scan_all(state, horizon, last)? {
                None if horizon < remaining => {
                    let t = state.time + horizon;
                    flight_to(state, t);
                }
                None => {
                    flight_to(state, target);
                    break;
                }
                Some(ct) => {
                    if budget == 0 {
                        return Err(Error::Runaway {
                            limit: state.options.max_events,
                        });
                    }
                    budget -= 1;
                    free_flight(state, ct.tau);
                    process(state, &ct, &mut last)?;
                }
            }
        },
        Scheduler::NeighborChunks => advance_chunked(state, target, &mut last, &mut budget)?,
    }
    state.time = target;
    Ok(())
}

/// Pure-functional wrapper around [`advance_in_place`].
pub fn advance(state: &SimulationState, t: f64) -> Result<SimulationState> {
    let mut s = state.clone();
    advance_in_place(&mut s, t)?;
    Ok(s)
}

/// Largest speed relative to the mean velocity.
fn max_speed_about_mean(z: &Configuration) -> f64 {
    let m = z.count().max(1) as f64;
    let mean: Vec<f64> = z.momentum().iter().map(|p| p / m).collect();
    (0..z.count())
        .map(|i| {
            z.velocity(i)
                .iter()
                .zip(&mean)
                .map(|(v, u)| (v - u) * (v - u))
                .sum::<f64>()
                .sqrt()
        })
        .fold(0.0, f64::max)
}

/// How far ahead a full rescan may look.  In a periodic box a contact
/// within this horizon involves pairs whose current minimum image is the
/// colliding one: such a pair starts within `√2 ε + 2 v_max h = L/2`.
fn rescan_horizon(state: &SimulationState) -> f64 {
    match state.boundary {
        Boundary::FreeSpace => f64::INFINITY,
        Boundary::PeriodicBox { side } => {
            let vmax = max_speed_about_mean(&state.config);
            if vmax == 0.0 {
                f64::INFINITY
            } else {
                (0.5 * side - SQRT_2 * state.eps) / (2.0 * vmax)
            }
        }
    }
}

fn chunk_cutoff(state: &SimulationState) -> f64 {
    let contact = SQRT_2 * state.eps;
    match state.boundary {
        Boundary::FreeSpace => 4.0 * contact,
        Boundary::PeriodicBox { side } => {
            let d = state.config.dim() as i32;
            let m = state.config.count().max(1) as f64;
            // Radius holding about four neighbours on average.
            let unit_ball = std::f64::consts::PI.powf(d as f64 / 2.0) / gamma_half_int(d as usize + 2);
            let r_nb = (4.0 * side.powi(d) / (m * unit_ball)).powf(1.0 / d as f64);
            r_nb.max(1.5 * contact).min(0.45 * side).max(contact * 1.01)
        }
    }
}

/// `Γ(n/2)` for a positive integer `n`.
pub(crate) fn gamma_half_int(n: usize) -> f64 {
    match n {
        1 => std::f64::consts::PI.sqrt(),
        2 => 1.0,
        _ => (n as f64 / 2.0 - 1.0) * gamma_half_int(n - 2),
    }
}

fn advance_chunked(
    state: &mut SimulationState,
    target: f64,
    last: &mut Option<[usize; 3]>,
    budget: &mut u64,
) -> Result<()> {
    let m = state.config.count();
    let d = state.config.dim();
    let contact = SQRT_2 * state.eps;
    let symmetric = state.options.symmetric;
    let mut scratch = Scratch::new(d);
    let mut triplets: Vec<[usize; 3]> = Vec::new();
    let mut neighbors: Vec<Vec<usize>> = vec![Vec::new(); m];
    while state.time < target {
        // Speed bound relative to the (conserved) mean velocity.
        let mean: Vec<f64> = state.config.momentum().iter().map(|p| p / m as f64).collect();
        let speed = |z: &Configuration, i: usize| -> f64 {
            z.velocity(i)
                .iter()
                .zip(&mean)
                .map(|(v, u)| (v - u) * (v - u))
                .sum::<f64>()
                .sqrt()
        };
        let vmax = (0..m).map(|i| speed(&state.config, i)).fold(0.0, f64::max);
        if m < 3 || vmax == 0.0 {
            flight_to(state, target);
            return Ok(());
        }
        let cutoff = chunk_cutoff(state);
        let chunk_end = (state.time + (cutoff - contact) / (2.0 * vmax)).min(target);
        let cutoff2 = cutoff * cutoff;
        for n in neighbors.iter_mut() {
            n.clear();
        }
        for i in 0..m {
            for j in (i + 1)..m {
                if state.boundary.distance2(state.config.position(i), state.config.position(j)) <= cutoff2 {
                    neighbors[i].push(j);
                    if symmetric {
                        neighbors[j].push(i);
                    }
                }
            }
        }
        triplets.clear();
        for (c, list) in neighbors.iter().enumerate() {
            for (a, &j) in list.iter().enumerate() {
                for &k in &list[a + 1..] {
                    let (lo, hi) = if j < k { (j, k) } else { (k, j) };
                    triplets.push([c, lo, hi]);
                }
            }
        }
        loop {
            let horizon = chunk_end - state.time;
            if horizon <= 0.0 {
                break;
            }
            let mut tracker = EarliestTracker::new(horizon);
            for &t in &triplets {
                if let Some(ct) = triplet_contact(
                    &state.config,
                    &state.boundary,
                    state.eps,
                    state.options.grazing_tol,
                    t,
                    &mut scratch,
                ) {
                    if !(Some(t) == *last && ct.tau < TIME_FLOOR) {
                        tracker.offer(ct);
                    }
                }
            }
            match tracker.finish(state.time)? {
                None => {
                    flight_to(state, chunk_end);
                    break;
                }
                Some(ct) => {
                    if *budget == 0 {
                        return Err(Error::Runaway {
                            limit: state.options.max_events,
                        });
                    }
                    *budget -= 1;
                    free_flight(state, ct.tau);
                    process(state, &ct, last)?;
                    if ct.triplet.iter().any(|&p| speed(&state.config, p) > vmax) {
                        // The chunk's speed bound no longer holds: rebuild.
                        break;
                    }
                }
            }
        }
    }
    Ok(())
}

/// Negate every velocity (positions and clock unchanged).
pub fn reverse_velocities(state: &SimulationState) -> SimulationState {
    let mut s = state.clone();
    s.config.velocities_mut().iter_mut().for_each(|v| *v = -*v);
    s
}

/// `ε = c0 · N^{−2/(2d−1)}`, so that `N ε^{d − 1/2}` stays constant.
pub fn epsilon_for_scaling(n: usize, c0: f64, d: usize) -> Result<f64> {
    if n == 0 || !(c0 > 0.0) || d < 1 {
        return Err(Error::Usage(format!(
            "epsilon_for_scaling needs N >= 1, c0 > 0, d >= 1 (got N={n}, c0={c0}, d={d})"
        )));
    }
    Ok(c0 * (n as f64).powf(-2.0 / (2.0 * d as f64 - 1.0)))
}

/// Region in which initial positions are drawn uniformly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplingBox {
    /// Side length `L` of the cube `[0, L)^d`.
    pub side: f64,
    /// Whether the cube is a periodic box (otherwise free space).
    pub periodic: bool,
}

impl SamplingBox {
    /// The boundary the sampled configuration lives in.
    pub fn boundary(&self) -> Boundary {
        if self.periodic {
            Boundary::PeriodicBox { side: self.side }
        } else {
            Boundary::FreeSpace
        }
    }
}

/// Maximum number of whole-configuration draws before giving up.
pub const MAX_INITIAL_ATTEMPTS: usize = 1000;

/// Draw `n` particles with uniform positions in `region` and i.i.d.
/// velocities from `f0`, rejecting configurations outside the phase space.
pub fn sample_initial(n: usize, eps: f64, f0: &VelocityLaw, region: SamplingBox, rng_seed: u64) -> Result<Configuration> {
    sample_initial_with_stats(n, eps, f0, region, false, rng_seed).map(|(z, _)| z)
}

/// [`sample_initial`] returning also the number of draws used; `symmetric`
/// selects the triplet convention of the admissibility test.
pub fn sample_initial_with_stats(
    n: usize,
    eps: f64,
    f0: &VelocityLaw,
    region: SamplingBox,
    symmetric: bool,
    rng_seed: u64,
) -> Result<(Configuration, usize)> {
    if n == 0 || !(eps > 0.0) || !(region.side > 0.0) {
        return Err(Error::Usage(format!(
            "sample_initial needs N >= 1, eps > 0, side > 0 (got N={n}, eps={eps}, side={})",
            region.side
        )));
    }
    let d = f0.dim();
    let mut rng = rng_from_seed(rng_seed);
    let opts = crate::geometry::PhaseSpaceOptions {
        boundary: region.boundary(),
        symmetric,
        rel_tol: 0.0,
    };
    for attempt in 1..=MAX_INITIAL_ATTEMPTS {
        let positions: Vec<f64> = (0..n * d).map(|_| rng.random::<f64>() * region.side).collect();
        let mut velocities = vec![0.0; n * d];
        for v in velocities.chunks_exact_mut(d) {
            f0.sample_into(&mut rng, v);
        }
        let z = Configuration::from_flat(d, positions, velocities)?;
        if crate::geometry::in_phase_space_with(&z, eps, &opts) {
            return Ok((z, attempt));
        }
    }
    Err(Error::ConfigurationDensity {
        accepted: 0,
        attempts: MAX_INITIAL_ATTEMPTS,
    })
}
