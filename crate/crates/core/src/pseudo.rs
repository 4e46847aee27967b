//! Boltzmann-hierarchy and BBGKY-hierarchy pseudo-trajectories built from a
//! shared collision history, and their proximity check.
//!
//! Starting from `s` particles at time `t`, the history prescribes times
//! `t > t1 > … > tk > 0`; on each interval the configuration flows freely
//! backwards, and at `t_i` two particles are adjoined to particle `m_i`
//! with impact pair `ω` and velocities `(v_a, v_b)`:
//!
//! * sign `−1`: velocities appended unchanged;
//! * sign `+1`: `(v_{m_i}, v_a, v_b)` replaced by their collisional transform.
//!
//! The Boltzmann construction adjoins both particles at `x_{m_i}`; the BBGKY
//! construction offsets them by `∓√2 ε ω` (minus for sign `−1`, plus for
//! sign `+1`).  Stage `i` (0-based) is the configuration of `s + 2i`
//! particles just after `t_{i+1}` (with `t_{k+1} = 0`).

use crate::algebra::{collide_in_place, ImpactPair, SpatialVector};
use crate::error::{check_dim, Error, Result};
use crate::geometry::Configuration;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::SQRT_2;

/// Data of one adjunction: impact pair and the two new velocities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Adjunction {
    /// Impact pair `(ω_a, ω_b)`.
    pub pair: ImpactPair,
    /// Velocity of the first adjoined particle.
    pub v_first: SpatialVector,
    /// Velocity of the second adjoined particle.
    pub v_second: SpatialVector,
}

/// A collision history driving both constructions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PseudoTrajectorySpec {
    /// Number of initial particles `s ≥ 1`.
    pub s: usize,
    /// Spatial dimension.
    pub d: usize,
    /// Start time `t`.
    pub t_start: f64,
    /// Adjunction times, strictly decreasing, in `(0, t)`.
    pub times: Vec<f64>,
    /// Signs `j_i ∈ {−1, +1}`.
    pub signs: Vec<i8>,
    /// Particle indices `m_i` (0-based, `m_i < s + 2i` for 0-based `i`).
    pub indices: Vec<usize>,
    /// Adjunction data.
    pub adjunctions: Vec<Adjunction>,
    /// Interaction-zone scale for the BBGKY construction.
    pub eps: f64,
}

impl PseudoTrajectorySpec {
    /// Number of adjunctions `k`.
    pub fn k(&self) -> usize {
        self.times.len()
    }

    /// Check every invariant of the history.
    pub fn validate(&self) -> Result<()> {
        let k = self.k();
        if self.s == 0 {
            return Err(Error::Usage("pseudo-trajectories need s >= 1".into()));
        }
        if self.signs.len() != k || self.indices.len() != k || self.adjunctions.len() != k {
            return Err(Error::Usage(format!(
                "history lengths disagree: {} times, {} signs, {} indices, {} adjunctions",
                k,
                self.signs.len(),
                self.indices.len(),
                self.adjunctions.len()
            )));
        }
        if !(self.eps >= 0.0) {
            return Err(Error::Usage(format!("eps must be non-negative, got {}", self.eps)));
        }
        let mut prev = self.t_start;
        for (i, &t) in self.times.iter().enumerate() {
            if !(t < prev) || !(t > 0.0) {
                return Err(Error::Usage(format!(
                    "time t_{} = {t} breaks t > t1 > … > tk > 0 (previous {prev})",
                    i + 1
                )));
            }
            prev = t;
        }
        for (i, (&sgn, &m)) in self.signs.iter().zip(&self.indices).enumerate() {
            if sgn != 1 && sgn != -1 {
                return Err(Error::Usage(format!("sign j_{} = {sgn} is not ±1", i + 1)));
            }
            if m >= self.s + 2 * i {
                return Err(Error::Usage(format!(
                    "index m_{} = {m} exceeds the {} particles present",
                    i + 1,
                    self.s + 2 * i
                )));
            }
        }
        for a in &self.adjunctions {
            check_dim(self.d, a.pair.dim())?;
            check_dim(self.d, a.v_first.dim())?;
            check_dim(self.d, a.v_second.dim())?;
        }
        Ok(())
    }

    /// A random history: times uniform order statistics in `(0, t_start)`,
    /// random signs and indices, uniform impact pairs and standard normal
    /// velocities.
    pub fn random<R: Rng + ?Sized>(s: usize, k: usize, d: usize, t_start: f64, eps: f64, rng: &mut R) -> Self {
        let mut times: Vec<f64> = (0..k).map(|_| t_start * (0.02 + 0.96 * rng.random::<f64>())).collect();
        times.sort_by(|a, b| b.partial_cmp(a).expect("finite times"));
        times.dedup();
        while times.len() < k {
            // Ties are astronomically unlikely; fall back to an even grid.
            times = (0..k).map(|i| t_start * (k - i) as f64 / (k + 1) as f64).collect();
        }
        let signs = (0..k).map(|_| if rng.random::<bool>() { 1 } else { -1 }).collect();
        let indices = (0..k).map(|i| rng.random_range(0..s + 2 * i)).collect();
        let adjunctions = (0..k)
            .map(|_| {
                let mut v = vec![0.0; 2 * d];
                crate::rng::fill_normal(rng, &mut v);
                Adjunction {
                    pair: ImpactPair::sample_uniform(d, rng),
                    v_first: SpatialVector(v[..d].to_vec()),
                    v_second: SpatialVector(v[d..].to_vec()),
                }
            })
            .collect();
        PseudoTrajectorySpec {
            s,
            d,
            t_start,
            times,
            signs,
            indices,
            adjunctions,
            eps,
        }
    }
}

/// Configuration of a pseudo-trajectory at one stage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySnapshot {
    /// Stage `i ∈ {0, …, k}`.
    pub stage: usize,
    /// Time `t_{i+1}` at which the snapshot is taken (0 for the last stage).
    pub time: f64,
    /// The `s + 2i` particles.
    pub config: Configuration,
}

fn construct(z0: &Configuration, spec: &PseudoTrajectorySpec, offset_scale: f64) -> Result<Vec<TrajectorySnapshot>> {
    spec.validate()?;
    if z0.count() != spec.s {
        return Err(Error::Usage(format!(
            "initial configuration has {} particles, the history expects s = {}",
            z0.count(),
            spec.s
        )));
    }
    check_dim(spec.d, z0.dim())?;
    let d = spec.d;
    let k = spec.k();
    let mut z = z0.clone();
    let mut t_cur = spec.t_start;
    let mut out = Vec::with_capacity(k + 1);
    for i in 0..=k {
        let t_next = if i < k { spec.times[i] } else { 0.0 };
        z.free_flight(-(t_cur - t_next));
        out.push(TrajectorySnapshot {
            stage: i,
            time: t_next,
            config: z.clone(),
        });
        if i == k {
            break;
        }
        let adj = &spec.adjunctions[i];
        let m = spec.indices[i];
        let sign = spec.signs[i] as f64;
        let xm = z.position(m).to_vec();
        let off = sign * SQRT_2 * offset_scale;
        let xa: Vec<f64> = (0..d).map(|q| xm[q] + off * adj.pair.omega1()[q]).collect();
        let xb: Vec<f64> = (0..d).map(|q| xm[q] + off * adj.pair.omega2()[q]).collect();
        let mut va = adj.v_first.0.clone();
        let mut vb = adj.v_second.0.clone();
        if spec.signs[i] == 1 {
            let mut vm = z.velocity(m).to_vec();
            collide_in_place(adj.pair.omega1(), adj.pair.omega2(), &mut vm, &mut va, &mut vb);
            z.velocity_mut(m).copy_from_slice(&vm);
        }
        z.push(&xa, &va)?;
        z.push(&xb, &vb)?;
        t_cur = t_next;
    }
    Ok(out)
}

/// The Boltzmann-hierarchy pseudo-trajectory (adjunction without offset).
pub fn boltzmann_pseudo_trajectory(z0: &Configuration, spec: &PseudoTrajectorySpec) -> Result<Vec<TrajectorySnapshot>> {
    construct(z0, spec, 0.0)
}

/// The BBGKY-hierarchy pseudo-trajectory (adjunction offset by `∓√2 ε ω`).
pub fn bbgky_pseudo_trajectory(z0: &Configuration, spec: &PseudoTrajectorySpec) -> Result<Vec<TrajectorySnapshot>> {
    construct(z0, spec, spec.eps)
}

/// Per-particle gap bound `√2 ε i` at (0-based) stage `i`.
pub fn stage_gap_bound(eps: f64, stage: usize) -> f64 {
    SQRT_2 * eps * stage as f64
}

/// Aggregate gap bound `√6 n^{3/2} ε`.
pub fn aggregate_gap_bound(eps: f64, n: usize) -> f64 {
    6f64.sqrt() * (n as f64).powf(1.5) * eps
}

/// Outcome of [`proximity_check`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProximityReport {
    /// `max_{i, ℓ} |x_ℓ^N(t_{i+1}) − x_ℓ^∞(t_{i+1})|`.
    pub max_position_gap: f64,
    /// Whether all velocities agree at every stage.
    pub velocity_equal: bool,
    /// Largest per-particle gap at each stage.
    pub stage_gaps: Vec<f64>,
    /// Euclidean norm of the whole position difference at each stage.
    pub aggregate_gaps: Vec<f64>,
}

impl ProximityReport {
    /// Whether every stage gap satisfies `≤ √2 ε i + tol` and every aggregate
    /// gap `≤ √6 n^{3/2} ε + tol` with `n = k + s + 1`.
    pub fn within_bounds(&self, spec: &PseudoTrajectorySpec, tol: f64) -> bool {
        let n = spec.k() + spec.s + 1;
        self.stage_gaps
            .iter()
            .enumerate()
            .all(|(i, g)| *g <= stage_gap_bound(spec.eps, i) + tol)
            && self
                .aggregate_gaps
                .iter()
                .all(|g| *g <= aggregate_gap_bound(spec.eps, n) + tol)
    }
}

/// Run both constructions and compare them stage by stage.
pub fn proximity_check(z0: &Configuration, spec: &PseudoTrajectorySpec) -> Result<ProximityReport> {
    let bz = boltzmann_pseudo_trajectory(z0, spec)?;
    let nz = bbgky_pseudo_trajectory(z0, spec)?;
    let mut stage_gaps = Vec::with_capacity(bz.len());
    let mut aggregate_gaps = Vec::with_capacity(bz.len());
    let mut velocity_equal = true;
    for (a, b) in bz.iter().zip(&nz) {
        let d = a.config.dim();
        let mut worst: f64 = 0.0;
        let mut total = 0.0;
        for l in 0..a.config.count() {
            let g2: f64 = (0..d)
                .map(|q| (a.config.position(l)[q] - b.config.position(l)[q]).powi(2))
                .sum();
            worst = worst.max(g2.sqrt());
            total += g2;
            for q in 0..d {
                let (va, vb) = (a.config.velocity(l)[q], b.config.velocity(l)[q]);
                if (va - vb).abs() > 1e-14 * (1.0 + va.abs()) {
                    velocity_equal = false;
                }
            }
        }
        stage_gaps.push(worst);
        aggregate_gaps.push(total.sqrt());
    }
    Ok(ProximityReport {
        max_position_gap: stage_gaps.iter().cloned().fold(0.0, f64::max),
        velocity_equal,
        stage_gaps,
        aggregate_gaps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;

    fn z0() -> Configuration {
        Configuration::from_vecs(&[vec![0.0, 0.0]], &[vec![1.0, 0.0]]).unwrap()
    }

    fn one_step(sign: i8, eps: f64) -> PseudoTrajectorySpec {
        let h = 1.0 / SQRT_2;
        PseudoTrajectorySpec {
            s: 1,
            d: 2,
            t_start: 1.0,
            times: vec![0.5],
            signs: vec![sign],
            indices: vec![0],
            adjunctions: vec![Adjunction {
                pair: ImpactPair::new([h, 0.0], [0.0, h]).unwrap(),
                v_first: SpatialVector(vec![1.0, 0.0]),
                v_second: SpatialVector(vec![0.0, 1.0]),
            }],
            eps,
        }
    }

    #[test]
    fn no_adjunction_is_backward_flight() {
        let spec = PseudoTrajectorySpec {
            s: 1,
            d: 2,
            t_start: 2.0,
            times: vec![],
            signs: vec![],
            indices: vec![],
            adjunctions: vec![],
            eps: 0.1,
        };
        let snaps = boltzmann_pseudo_trajectory(&z0(), &spec).unwrap();
        assert_eq!(snaps.len(), 1);
        assert_eq!(snaps[0].config.position(0), &[-2.0, 0.0]);
        let rep = proximity_check(&z0(), &spec).unwrap();
        assert_eq!(rep.max_position_gap, 0.0);
        assert!(rep.velocity_equal);
    }

    #[test]
    fn minus_sign_adjoins_at_the_same_point() {
        let snaps = boltzmann_pseudo_trajectory(&z0(), &one_step(-1, 0.1)).unwrap();
        // At t1 = 0.5 particle 0 sits at (−0.5, 0); both new particles join it
        // there and then flow back for 0.5 more.
        let c = &snaps[1].config;
        assert_eq!(c.count(), 3);
        assert_eq!(c.position(1), &[-1.0, 0.0]);
        assert_eq!(c.position(2), &[-0.5, -0.5]);
        assert_eq!(c.velocity(0), &[1.0, 0.0]);
    }

    #[test]
    fn plus_sign_applies_the_collision() {
        let z = Configuration::from_vecs(&[vec![0.0, 0.0]], &[vec![0.0, 0.0]]).unwrap();
        let snaps = boltzmann_pseudo_trajectory(&z, &one_step(1, 0.1)).unwrap();
        let c = &snaps[1].config;
        for (a, b) in c.velocity(0).iter().zip([1.0, 1.0]) {
            assert!((a - b).abs() < 1e-15);
        }
        for (a, b) in c.velocity(1).iter().chain(c.velocity(2)).zip([0.0; 4]) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn bbgky_offset_norm() {
        for sign in [-1, 1] {
            let eps = 0.01;
            let rep = proximity_check(&z0(), &one_step(sign, eps)).unwrap();
            // Both blocks have norm 1/√2, so each offset is ε.
            assert!((rep.stage_gaps[1] - eps).abs() < 1e-15);
            assert!(rep.velocity_equal);
        }
    }

    #[test]
    fn zero_eps_reproduces_boltzmann() {
        let mut rng = rng_from_seed(3);
        let spec = PseudoTrajectorySpec::random(2, 4, 3, 1.0, 0.0, &mut rng);
        let z = Configuration::from_vecs(&[vec![0.0; 3], vec![1.0; 3]], &[vec![0.5; 3], vec![-0.5; 3]]).unwrap();
        assert_eq!(
            boltzmann_pseudo_trajectory(&z, &spec).unwrap(),
            bbgky_pseudo_trajectory(&z, &spec).unwrap()
        );
    }

    #[test]
    fn invalid_histories_are_rejected() {
        let mut spec = one_step(1, 0.1);
        spec.times = vec![1.5];
        assert!(spec.validate().is_err());
        let mut spec = one_step(1, 0.1);
        spec.indices = vec![1];
        assert!(spec.validate().is_err());
        let mut spec = one_step(1, 0.1);
        spec.signs = vec![0];
        assert!(spec.validate().is_err());
        let two = Configuration::from_vecs(&[vec![0.0; 2], vec![1.0; 2]], &[vec![0.0; 2], vec![0.0; 2]]).unwrap();
        assert!(boltzmann_pseudo_trajectory(&two, &one_step(1, 0.1)).is_err());
    }
}
