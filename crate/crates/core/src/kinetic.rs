//! Space-homogeneous ternary kinetic solver.
//!
//! The density `f(t, v)` is represented by a [`VelocityEnsemble`] and evolved
//! by a ternary direct-simulation Monte Carlo scheme with majorant rejection.
//! Diagnostics evaluate the collision operator
//!
//! ```text
//! Q3(f)(v) = ∫∫∫ K(ω) b_+(ω, v1 − v, v2 − v) (f* f1* f2* − f f1 f2) dω dv1 dv2
//! ```
//!
//! by Monte Carlo with kernel-density estimates of `f`, together with
//! moments, histogram entropy and entropy dissipation.

use crate::algebra::{collide_in_place, norm2, SpatialVector};
use crate::dynamics::gamma_half_int;
use crate::error::{check_dim, Error, Result};
use crate::histogram::{HistogramSpec, MarginalHistogram};
use crate::rng::{derive_seed, fill_normal, rng_from_seed, uniform_sphere_into, SimRng};
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Surface area of the unit sphere of `R^n`.
pub fn sphere_area(n: usize) -> f64 {
    2.0 * std::f64::consts::PI.powf(n as f64 / 2.0) / gamma_half_int(n)
}

/// Parameters `(R, U, T)` of the Maxwellian `R (2πT)^{−d/2} exp(−|v − U|²/2T)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaxwellianParams {
    /// Mass density `R > 0`.
    #[serde(rename = "R")]
    pub r: f64,
    /// Bulk velocity `U`.
    #[serde(rename = "U")]
    pub u: SpatialVector,
    /// Temperature `T > 0`.
    #[serde(rename = "T")]
    pub t: f64,
}

impl MaxwellianParams {
    /// Validate and build.
    pub fn new(r: f64, u: impl Into<SpatialVector>, t: f64) -> Result<Self> {
        let u = u.into();
        if !(r > 0.0) || !(t > 0.0) {
            return Err(Error::Usage(format!(
                "Maxwellian needs R > 0 and T > 0, got R={r}, T={t}"
            )));
        }
        if u.dim() < 2 {
            return Err(Error::Usage("Maxwellian bulk velocity needs dimension >= 2".into()));
        }
        Ok(MaxwellianParams { r, u, t })
    }

    /// `R = 1`, `U = 0`, `T = 1` in dimension `d`.
    pub fn standard(d: usize) -> Self {
        MaxwellianParams {
            r: 1.0,
            u: SpatialVector::zeros(d),
            t: 1.0,
        }
    }

    /// Dimension.
    pub fn dim(&self) -> usize {
        self.u.dim()
    }

    /// Value of the Maxwellian at `v`.
    pub fn density(&self, v: &[f64]) -> f64 {
        let d = self.dim() as f64;
        let q: f64 = v.iter().zip(self.u.iter()).map(|(a, b)| (a - b) * (a - b)).sum();
        self.r * (2.0 * std::f64::consts::PI * self.t).powf(-d / 2.0) * (-q / (2.0 * self.t)).exp()
    }

    /// `∫ M ln M dv = R ln R − R (d/2)(1 + ln 2πT)`.
    pub fn entropy(&self) -> f64 {
        let d = self.dim() as f64;
        self.r * self.r.ln() - self.r * 0.5 * d * (1.0 + (2.0 * std::f64::consts::PI * self.t).ln())
    }
}

/// A velocity law from which i.i.d. velocities can be drawn.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum VelocityLaw {
    /// Maxwellian (the mass `R` is irrelevant for sampling).
    Maxwellian(MaxwellianParams),
    /// Equal-weight mixture of two Maxwellians with common bulk velocity.
    TwoTemperature {
        /// Common bulk velocity.
        u: SpatialVector,
        /// First temperature.
        t1: f64,
        /// Second temperature.
        t2: f64,
    },
}

impl VelocityLaw {
    /// Dimension.
    pub fn dim(&self) -> usize {
        match self {
            VelocityLaw::Maxwellian(p) => p.dim(),
            VelocityLaw::TwoTemperature { u, .. } => u.dim(),
        }
    }

    /// Overall temperature (per-component variance).
    pub fn temperature(&self) -> f64 {
        match self {
            VelocityLaw::Maxwellian(p) => p.t,
            VelocityLaw::TwoTemperature { t1, t2, .. } => 0.5 * (t1 + t2),
        }
    }

    /// Bulk velocity.
    pub fn bulk_velocity(&self) -> &SpatialVector {
        match self {
            VelocityLaw::Maxwellian(p) => &p.u,
            VelocityLaw::TwoTemperature { u, .. } => u,
        }
    }

    /// Draw one velocity into `out`.
    pub fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        let (u, t) = match self {
            VelocityLaw::Maxwellian(p) => (&p.u, p.t),
            VelocityLaw::TwoTemperature { u, t1, t2 } => {
                let t = if rng.random::<bool>() { *t1 } else { *t2 };
                (u, t)
            }
        };
        let s = t.sqrt();
        for (o, m) in out.iter_mut().zip(u.iter()) {
            let z: f64 = rng.sample(StandardNormal);
            *o = m + s * z;
        }
    }
}

/// Weighted velocity samples representing a space-homogeneous density.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VelocityEnsemble {
    dim: usize,
    samples: Vec<f64>,
    /// Statistical weight of each sample (total mass = weight × count).
    pub weight: f64,
    /// Current time.
    pub clock: f64,
}

impl VelocityEnsemble {
    /// Build from a flat component array.
    pub fn from_flat(dim: usize, samples: Vec<f64>, weight: f64) -> Result<Self> {
        if dim < 2 || samples.is_empty() || samples.len() % dim != 0 {
            return Err(Error::Usage(format!(
                "{} components do not form a non-empty ensemble in dimension {dim}",
                samples.len()
            )));
        }
        if !(weight >= 0.0) {
            return Err(Error::Usage(format!("weight must be non-negative, got {weight}")));
        }
        Ok(VelocityEnsemble {
            dim,
            samples,
            weight,
            clock: 0.0,
        })
    }

    /// Build from per-sample vectors.
    pub fn from_vectors(samples: &[SpatialVector], weight: f64) -> Result<Self> {
        let dim = samples.first().map(|s| s.dim()).unwrap_or(0);
        let mut flat = Vec::with_capacity(dim * samples.len());
        for s in samples {
            check_dim(dim, s.dim())?;
            flat.extend_from_slice(s);
        }
        VelocityEnsemble::from_flat(dim, flat, weight)
    }

    /// Dimension.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of samples.
    pub fn len(&self) -> usize {
        self.samples.len() / self.dim
    }

    /// Whether the ensemble has no samples (never true for a valid ensemble).
    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Sample `i`.
    #[inline]
    pub fn sample(&self, i: usize) -> &[f64] {
        &self.samples[i * self.dim..(i + 1) * self.dim]
    }

    /// All components.
    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    /// Mutable access to all components.
    pub fn samples_mut(&mut self) -> &mut [f64] {
        &mut self.samples
    }

    /// Total mass `weight × count`.
    pub fn mass(&self) -> f64 {
        self.weight * self.len() as f64
    }

    /// Unweighted mean velocity.
    pub fn mean_velocity(&self) -> Vec<f64> {
        let mut m = vec![0.0; self.dim];
        for v in self.samples.chunks_exact(self.dim) {
            m.iter_mut().zip(v).for_each(|(a, b)| *a += b);
        }
        let n = self.len() as f64;
        m.iter_mut().for_each(|a| *a /= n);
        m
    }

    /// Mean per-component variance about the mean velocity.
    pub fn temperature(&self) -> f64 {
        let m = self.mean_velocity();
        let s: f64 = self
            .samples
            .chunks_exact(self.dim)
            .map(|v| v.iter().zip(&m).map(|(a, b)| (a - b) * (a - b)).sum::<f64>())
            .sum();
        s / (self.len() * self.dim) as f64
    }

    /// Largest distance of a sample from the mean velocity.
    pub fn max_speed_about_mean(&self) -> f64 {
        let m = self.mean_velocity();
        self.samples
            .chunks_exact(self.dim)
            .map(|v| v.iter().zip(&m).map(|(a, b)| (a - b) * (a - b)).sum::<f64>())
            .fold(0.0, f64::max)
            .sqrt()
    }
}

/// Mass, momentum and energy of a density.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    /// `∫ f`.
    pub mass: f64,
    /// `∫ f v`.
    pub momentum: SpatialVector,
    /// `∫ f |v|²/2`.
    pub energy: f64,
}

impl Moments {
    /// Largest relative deviation from another set of moments; momentum is
    /// measured against the scale `sqrt(2 · mass · energy)`.
    pub fn max_relative_deviation(&self, other: &Moments) -> f64 {
        let ms = self.mass.abs().max(1e-300);
        let es = self.energy.abs().max(1e-300);
        let ps = (2.0 * self.mass.abs() * self.energy.abs()).sqrt().max(1e-300);
        let dm = (self.mass - other.mass).abs() / ms;
        let de = (self.energy - other.energy).abs() / es;
        let dp = self
            .momentum
            .iter()
            .zip(other.momentum.iter())
            .map(|(a, b)| (a - b).abs() / ps)
            .fold(0.0, f64::max);
        dm.max(de).max(dp)
    }
}

/// Weight-scaled sums of `1`, `v` and `|v|²/2`.
pub fn moments(ens: &VelocityEnsemble) -> Moments {
    let d = ens.dim();
    let mut p = vec![0.0; d];
    let mut e = 0.0;
    for v in ens.samples().chunks_exact(d) {
        p.iter_mut().zip(v).for_each(|(a, b)| *a += b);
        e += 0.5 * norm2(v);
    }
    Moments {
        mass: ens.mass(),
        momentum: SpatialVector(p.into_iter().map(|x| x * ens.weight).collect()),
        energy: e * ens.weight,
    }
}

/// `n` i.i.d. draws from the Maxwellian `p`, each with weight `R / n`.
pub fn maxwellian_sampler(p: &MaxwellianParams, n: usize, rng_seed: u64) -> Result<VelocityEnsemble> {
    MaxwellianParams::new(p.r, p.u.clone(), p.t)?;
    if n == 0 {
        return Err(Error::Usage("sample count must be positive".into()));
    }
    let d = p.dim();
    let mut rng = rng_from_seed(rng_seed);
    let law = VelocityLaw::Maxwellian(p.clone());
    let mut flat = vec![0.0; n * d];
    for v in flat.chunks_exact_mut(d) {
        law.sample_into(&mut rng, v);
    }
    VelocityEnsemble::from_flat(d, flat, p.r / n as f64)
}

/// Ensemble with the first half drawn at temperature `t1` and the second
/// half at `t2` (zero bulk velocity, unit total mass).
pub fn two_temperature_ensemble(d: usize, n: usize, t1: f64, t2: f64, rng_seed: u64) -> Result<VelocityEnsemble> {
    if !(t1 > 0.0) || !(t2 > 0.0) || n < 2 {
        return Err(Error::Usage("two-temperature ensemble needs t1, t2 > 0 and n >= 2".into()));
    }
    let mut rng = rng_from_seed(rng_seed);
    let mut flat = vec![0.0; n * d];
    for (i, v) in flat.chunks_exact_mut(d).enumerate() {
        let s = if i < n / 2 { t1.sqrt() } else { t2.sqrt() };
        fill_normal(&mut rng, v);
        v.iter_mut().for_each(|x| *x *= s);
    }
    VelocityEnsemble::from_flat(d, flat, 1.0 / n as f64)
}

/// Maxwellian with the same mass, momentum and energy as the ensemble.
pub fn fit_maxwellian(ens: &VelocityEnsemble) -> Result<MaxwellianParams> {
    if ens.len() < 2 {
        return Err(Error::Usage("fitting a Maxwellian needs at least 2 samples".into()));
    }
    let m = moments(ens);
    if !(m.mass > 0.0) {
        return Err(Error::Domain("cannot fit a Maxwellian to zero mass".into()));
    }
    let u: Vec<f64> = m.momentum.iter().map(|p| p / m.mass).collect();
    let t = (2.0 * m.energy / m.mass - norm2(&u)) / ens.dim() as f64;
    let scale = 2.0 * m.energy / m.mass;
    if !(t > 1e-14 * scale.max(1e-300)) {
        return Err(Error::Domain(format!(
            "fitted temperature {t:e} is not positive (all velocities coincide)"
        )));
    }
    MaxwellianParams::new(m.mass, u, t)
}

/// Collision kernel weighting `b_+` in the DSMC scheme and in `Q3`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CollisionKernel {
    /// `b_+ / sqrt(1 + ⟨ω1, ω2⟩)`, the kernel of the kinetic operator.
    Operator,
    /// `b_+`, the flux of the interaction-zone particle system through the
    /// contact sphere.
    Flux,
}

impl CollisionKernel {
    /// Kernel value for cross-section `b` and `⟨ω1, ω2⟩ = pi`.
    #[inline]
    pub fn value(self, b: f64, pi: f64) -> f64 {
        if b <= 0.0 {
            return 0.0;
        }
        match self {
            CollisionKernel::Operator => b / (1.0 + pi).sqrt(),
            CollisionKernel::Flux => b,
        }
    }

    /// Parse `operator` or `flux`.
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "operator" => Ok(CollisionKernel::Operator),
            "flux" => Ok(CollisionKernel::Flux),
            other => Err(Error::Usage(format!("unknown kernel `{other}` (expected operator or flux)"))),
        }
    }

    /// Lowercase name.
    pub fn name(self) -> &'static str {
        match self {
            CollisionKernel::Operator => "operator",
            CollisionKernel::Flux => "flux",
        }
    }
}

/// Counters of one DSMC step.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct DsmcStepStats {
    /// Candidate triplets examined.
    pub candidates: u64,
    /// Candidates accepted (collisions performed).
    pub accepted: u64,
    /// Majorant used.
    pub b_max: f64,
}

fn triplet_count(n: usize) -> f64 {
    let n = n as f64;
    n * (n - 1.0) * (n - 2.0) / 6.0
}

/// One DSMC step in place, drawing randomness from `rng`.
pub fn dsmc_step_in_place(
    ens: &mut VelocityEnsemble,
    dt: f64,
    rate_const: f64,
    kernel: CollisionKernel,
    rng: &mut SimRng,
) -> Result<DsmcStepStats> {
    if !(dt > 0.0) || !(rate_const >= 0.0) {
        return Err(Error::Usage(format!(
            "dsmc step needs dt > 0 and rate_const >= 0, got dt={dt}, rate_const={rate_const}"
        )));
    }
    let n = ens.len();
    if n < 3 {
        return Err(Error::Usage(format!("DSMC needs at least 3 samples, got {n}")));
    }
    let d = ens.dim();
    let vmax = ens.max_speed_about_mean();
    let b_max = 2.0 * std::f64::consts::SQRT_2 * (2.0 * vmax);
    let triplets = triplet_count(n);
    let expected = rate_const * triplets * dt * b_max / (n as f64 * n as f64);
    let candidates = expected.ceil();
    if candidates > triplets {
        return Err(Error::Stability {
            candidates: candidates as u64,
            triplets: triplets as u64,
        });
    }
    let candidates = candidates as u64;
    let mut stats = DsmcStepStats {
        candidates,
        accepted: 0,
        b_max,
    };
    let mut w = vec![0.0; 2 * d];
    let (mut va, mut vb, mut vc) = (vec![0.0; d], vec![0.0; d], vec![0.0; d]);
    for _ in 0..candidates {
        let a = rng.random_range(0..n);
        let mut b = rng.random_range(0..n - 1);
        if b >= a {
            b += 1;
        }
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        let mut c = rng.random_range(0..n - 2);
        if c >= lo {
            c += 1;
        }
        if c >= hi {
            c += 1;
        }
        uniform_sphere_into(rng, &mut w);
        let (w1, w2) = w.split_at(d);
        let (sa, sb, sc) = (ens.sample(a), ens.sample(b), ens.sample(c));
        let mut bsec = 0.0;
        let mut pi = 0.0;
        for q in 0..d {
            bsec += w1[q] * (sb[q] - sa[q]) + w2[q] * (sc[q] - sa[q]);
            pi += w1[q] * w2[q];
        }
        let k = kernel.value(bsec, pi);
        if k <= 0.0 {
            continue;
        }
        let p = k / b_max;
        if p > 1.0 {
            return Err(Error::MajorantViolated(p));
        }
        if rng.random::<f64>() < p {
            va.copy_from_slice(sa);
            vb.copy_from_slice(sb);
            vc.copy_from_slice(sc);
            collide_in_place(w1, w2, &mut va, &mut vb, &mut vc);
            let s = ens.samples_mut();
            s[a * d..(a + 1) * d].copy_from_slice(&va);
            s[b * d..(b + 1) * d].copy_from_slice(&vb);
            s[c * d..(c + 1) * d].copy_from_slice(&vc);
            stats.accepted += 1;
        }
    }
    ens.clock += dt;
    Ok(stats)
}

/// One DSMC step with the kernel of the kinetic operator
/// ([`CollisionKernel::Operator`]).
pub fn dsmc_step(ens: &VelocityEnsemble, dt: f64, rate_const: f64, rng_seed: u64) -> Result<VelocityEnsemble> {
    let mut out = ens.clone();
    let mut rng = rng_from_seed(rng_seed);
    dsmc_step_in_place(&mut out, dt, rate_const, CollisionKernel::Operator, &mut rng)?;
    Ok(out)
}

/// A DSMC run carrying its own random stream.
#[derive(Debug, Clone)]
pub struct DsmcSolver {
    /// Current ensemble.
    pub ensemble: VelocityEnsemble,
    /// Collision-frequency scale.
    pub rate_const: f64,
    /// Kernel.
    pub kernel: CollisionKernel,
    /// Accumulated candidate count.
    pub total_candidates: u64,
    /// Accumulated collision count.
    pub total_collisions: u64,
    rng: SimRng,
}

impl DsmcSolver {
    /// Start a run.
    pub fn new(ensemble: VelocityEnsemble, rate_const: f64, kernel: CollisionKernel, rng_seed: u64) -> Self {
        DsmcSolver {
            ensemble,
            rate_const,
            kernel,
            total_candidates: 0,
            total_collisions: 0,
            rng: rng_from_seed(rng_seed),
        }
    }

    /// Advance by one step of length `dt`.
    pub fn step(&mut self, dt: f64) -> Result<DsmcStepStats> {
        let s = dsmc_step_in_place(&mut self.ensemble, dt, self.rate_const, self.kernel, &mut self.rng)?;
        self.total_candidates += s.candidates;
        self.total_collisions += s.accepted;
        Ok(s)
    }

    /// Step with `dt` (the last step shortened) until the clock reaches `t`.
    pub fn run_until(&mut self, t: f64, dt: f64) -> Result<()> {
        while self.ensemble.clock < t - 1e-12 * t.abs().max(1.0) {
            let h = dt.min(t - self.ensemble.clock);
            self.step(h)?;
        }
        Ok(())
    }
}

/// `rate_const` making the DSMC collision frequency (with
/// [`CollisionKernel::Flux`]) equal to that of `N` interaction-zone particles
/// with `ε = c0 N^{−2/(2d−1)}` in a periodic box of side `L`, in the limit of
/// large `N`: `|S^{2d−1}| · 2^{d − 1/2} · c0^{2d−1} / L^{2d}`.
pub fn matched_rate_const(d: usize, c0: f64, side: f64) -> f64 {
    let df = d as f64;
    sphere_area(2 * d) * 2f64.powf(df - 0.5) * c0.powf(2.0 * df - 1.0) / side.powf(2.0 * df)
}

/// A Monte Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    /// Point estimate.
    pub estimate: f64,
    /// Standard error.
    pub std_error: f64,
}

fn mean_se(sum: f64, sum2: f64, n: usize) -> McEstimate {
    let nf = n as f64;
    let mean = sum / nf;
    let var = ((sum2 / nf - mean * mean) * nf / (nf - 1.0).max(1.0)).max(0.0);
    McEstimate {
        estimate: mean,
        std_error: (var / nf).sqrt(),
    }
}

/// Histogram entropy estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EntropyEstimate {
    /// `∫ f ln f` estimated from bin masses.
    pub value: f64,
    /// Delta-method standard error of the estimate.
    pub std_error: f64,
    /// Number of samples outside the support cube.
    pub outside: usize,
}

/// Histogram estimate of `∫ f ln f dv` on the cube of half-width
/// `support_radius` centred at the mean velocity.
pub fn entropy(ens: &VelocityEnsemble, bins_per_axis: usize, support_radius: f64) -> Result<EntropyEstimate> {
    if bins_per_axis < 8 {
        return Err(Error::Usage(format!("entropy needs at least 8 bins per axis, got {bins_per_axis}")));
    }
    let d = ens.dim();
    if (bins_per_axis as f64).powi(d as i32) > 1e8 {
        return Err(Error::Usage("entropy histogram would exceed 1e8 bins".into()));
    }
    let center = ens.mean_velocity();
    let spec = HistogramSpec::centered_cube(d, &center, support_radius, bins_per_axis)?;
    let h = MarginalHistogram::from_velocities(spec.clone(), ens.samples());
    let n = ens.len();
    let outside = h.outside_weight.round() as usize;
    if outside * 100 > n {
        return Err(Error::SupportExceeded { outside, total: n });
    }
    let vol = spec.bin_volume();
    let w = ens.weight;
    let mass = ens.mass();
    let mut value = 0.0;
    let mut s1 = 0.0;
    let mut s2 = 0.0;
    for &c in &h.counts {
        if c > 0.0 {
            let l = (w * c / vol).ln();
            value += w * c * l;
            let p = c / n as f64;
            s1 += p * l;
            s2 += p * l * l;
        }
    }
    let var = mass * mass * (s2 - s1 * s1).max(0.0) / n as f64;
    Ok(EntropyEstimate {
        value,
        std_error: var.sqrt(),
        outside,
    })
}

/// Default entropy support half-width `6 √T_fit`.
pub fn default_support_radius(ens: &VelocityEnsemble) -> f64 {
    6.0 * ens.temperature().sqrt()
}

/// Per-component excess kurtosis `m4 / m2² − 3` about the mean.
pub fn excess_kurtosis(ens: &VelocityEnsemble) -> Vec<f64> {
    let d = ens.dim();
    let m = ens.mean_velocity();
    let mut m2 = vec![0.0; d];
    let mut m4 = vec![0.0; d];
    for v in ens.samples().chunks_exact(d) {
        for a in 0..d {
            let x = (v[a] - m[a]) * (v[a] - m[a]);
            m2[a] += x;
            m4[a] += x * x;
        }
    }
    let n = ens.len() as f64;
    (0..d).map(|a| (m4[a] / n) / (m2[a] / n).powi(2) - 3.0).collect()
}

/// Gaussian kernel density estimate tabulated on a regular grid (linear
/// binning followed by separable convolution), evaluated by multilinear
/// interpolation.
#[derive(Debug, Clone)]
pub struct GridKde {
    dim: usize,
    bandwidth: f64,
    lo: Vec<f64>,
    step: Vec<f64>,
    shape: Vec<usize>,
    strides: Vec<usize>,
    values: Vec<f64>,
}

impl GridKde {
    /// `h = n^{−1/(d+4)} σ̂`, floored at `1e−3 σ̂`, with `σ̂` the root mean
    /// per-component variance.
    pub fn silverman_bandwidth(ens: &VelocityEnsemble) -> f64 {
        let sigma = ens.temperature().sqrt();
        let n = ens.len() as f64;
        (n.powf(-1.0 / (ens.dim() as f64 + 4.0)) * sigma).max(1e-3 * sigma)
    }

    /// Tabulate the estimate of an ensemble with bandwidth `h`.
    pub fn new(ens: &VelocityEnsemble, bandwidth: f64) -> Result<Self> {
        if !(bandwidth > 0.0) {
            return Err(Error::Usage(format!("bandwidth must be positive, got {bandwidth}")));
        }
        let d = ens.dim();
        let max_cells = ((4.0e6f64).powf(1.0 / d as f64).floor() as usize).clamp(8, 1024);
        let mut lo = vec![f64::INFINITY; d];
        let mut hi = vec![f64::NEG_INFINITY; d];
        for v in ens.samples().chunks_exact(d) {
            for a in 0..d {
                lo[a] = lo[a].min(v[a]);
                hi[a] = hi[a].max(v[a]);
            }
        }
        let pad = 5.0 * bandwidth;
        let mut shape = vec![0; d];
        let mut step = vec![0.0; d];
        for a in 0..d {
            lo[a] -= pad;
            hi[a] += pad;
            let want = ((hi[a] - lo[a]) / (bandwidth / 4.0)).ceil() as usize + 1;
            shape[a] = want.clamp(16, max_cells);
            step[a] = (hi[a] - lo[a]) / (shape[a] - 1) as f64;
        }
        let mut strides = vec![1; d];
        for a in (0..d.saturating_sub(1)).rev() {
            strides[a] = strides[a + 1] * shape[a + 1];
        }
        let total: usize = shape.iter().product();
        let mut values = vec![0.0; total];
        // Linear binning.
        let corners = 1usize << d;
        let mut base = vec![0usize; d];
        let mut frac = vec![0.0; d];
        for v in ens.samples().chunks_exact(d) {
            for a in 0..d {
                let u = ((v[a] - lo[a]) / step[a]).clamp(0.0, (shape[a] - 1) as f64 - 1e-9);
                base[a] = u.floor() as usize;
                frac[a] = u - base[a] as f64;
            }
            for corner in 0..corners {
                let mut idx = 0;
                let mut wgt = 1.0;
                for a in 0..d {
                    let up = (corner >> a) & 1 == 1;
                    idx += (base[a] + up as usize) * strides[a];
                    wgt *= if up { frac[a] } else { 1.0 - frac[a] };
                }
                values[idx] += wgt;
            }
        }
        // Separable Gaussian convolution.
        let mut line = Vec::new();
        let mut out = Vec::new();
        for a in 0..d {
            let half = (5.0 * bandwidth / step[a]).ceil() as usize;
            let taps: Vec<f64> = (0..=half)
                .map(|k| {
                    let x = k as f64 * step[a];
                    (-x * x / (2.0 * bandwidth * bandwidth)).exp()
                        / ((2.0 * std::f64::consts::PI).sqrt() * bandwidth)
                })
                .collect();
            let len = shape[a];
            let stride = strides[a];
            line.resize(len, 0.0);
            out.resize(len, 0.0);
            for start in 0..total {
                if (start / stride) % len != 0 {
                    continue;
                }
                for k in 0..len {
                    line[k] = values[start + k * stride];
                }
                for k in 0..len {
                    let lo_k = k.saturating_sub(half);
                    let hi_k = (k + half).min(len - 1);
                    let mut s = 0.0;
                    for q in lo_k..=hi_k {
                        let off = q.abs_diff(k);
                        s += line[q] * taps[off];
                    }
                    out[k] = s;
                }
                for k in 0..len {
                    values[start + k * stride] = out[k];
                }
            }
        }
        let n = ens.len() as f64;
        values.iter_mut().for_each(|x| *x /= n);
        Ok(GridKde {
            dim: d,
            bandwidth,
            lo,
            step,
            shape,
            strides,
            values,
        })
    }

    /// Bandwidth in use.
    pub fn bandwidth(&self) -> f64 {
        self.bandwidth
    }

    /// Estimated probability density at `v` (zero outside the grid).
    #[inline]
    pub fn density(&self, v: &[f64]) -> f64 {
        let d = self.dim;
        let mut base = [0usize; 8];
        let mut frac = [0.0f64; 8];
        if d > 8 {
            return self.density_slow(v);
        }
        for a in 0..d {
            let u = (v[a] - self.lo[a]) / self.step[a];
            if !(u >= 0.0) || u >= (self.shape[a] - 1) as f64 {
                return 0.0;
            }
            base[a] = u as usize;
            frac[a] = u - base[a] as f64;
        }
        let mut s = 0.0;
        for corner in 0..(1usize << d) {
            let mut idx = 0;
            let mut w = 1.0;
            for a in 0..d {
                let up = (corner >> a) & 1 == 1;
                idx += (base[a] + up as usize) * self.strides[a];
                w *= if up { frac[a] } else { 1.0 - frac[a] };
            }
            s += w * self.values[idx];
        }
        s.max(0.0)
    }

    fn density_slow(&self, v: &[f64]) -> f64 {
        let d = self.dim;
        let mut base = vec![0usize; d];
        let mut frac = vec![0.0; d];
        for a in 0..d {
            let u = (v[a] - self.lo[a]) / self.step[a];
            if !(u >= 0.0) || u >= (self.shape[a] - 1) as f64 {
                return 0.0;
            }
            base[a] = u as usize;
            frac[a] = u - base[a] as f64;
        }
        let mut s = 0.0;
        for corner in 0..(1usize << d) {
            let mut idx = 0;
            let mut w = 1.0;
            for a in 0..d {
                let up = (corner >> a) & 1 == 1;
                idx += (base[a] + up as usize) * self.strides[a];
                w *= if up { frac[a] } else { 1.0 - frac[a] };
            }
            s += w * self.values[idx];
        }
        s.max(0.0)
    }
}

/// Entropy-dissipation estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DissipationEstimate {
    /// Point estimate of `D(f)`.
    pub estimate: f64,
    /// Standard error.
    pub std_error: f64,
    /// Draws skipped because a density estimate vanished.
    pub skipped: usize,
    /// `false` when more than 5% of the draws were skipped.
    pub reliable: bool,
}

/// Monte Carlo evaluator of `Q3` and of the entropy dissipation for one
/// ensemble, sharing a single density estimate.
///
/// The density estimate of a finite ensemble fluctuates, and `Q3` is
/// sensitive to those fluctuations (for a Maxwellian it vanishes only for
/// the exact density).  With [`Q3Evaluator::with_density_bootstrap`] the
/// evaluator also carries density estimates of bootstrap resamples of the
/// ensemble; their spread is added to the Monte Carlo error so that the
/// reported standard error covers both sources.
#[derive(Debug, Clone)]
pub struct Q3Evaluator {
    ens: VelocityEnsemble,
    kde: GridKde,
    kernel: CollisionKernel,
    replicas: Vec<Q3Evaluator>,
}

/// Bootstrap density estimates used by [`q3_apply_mc`].
pub const DEFAULT_DENSITY_REPLICATES: usize = 24;

fn combine_with_replicas(main: McEstimate, replicas: &[McEstimate]) -> McEstimate {
    if replicas.len() < 2 {
        return main;
    }
    let b = replicas.len() as f64;
    let mean = replicas.iter().map(|r| r.estimate).sum::<f64>() / b;
    let spread = replicas.iter().map(|r| (r.estimate - mean).powi(2)).sum::<f64>() / (b - 1.0);
    let mc = replicas.iter().map(|r| r.std_error.powi(2)).sum::<f64>() / b;
    McEstimate {
        estimate: main.estimate,
        std_error: (main.std_error.powi(2) + (spread - mc).max(0.0)).sqrt(),
    }
}

impl Q3Evaluator {
    /// Build with the given bandwidth (Silverman's rule when `None`).
    pub fn new(ens: &VelocityEnsemble, bandwidth: Option<f64>, kernel: CollisionKernel) -> Result<Self> {
        let h = match bandwidth {
            Some(h) if !(h > 0.0) => {
                return Err(Error::Usage(format!("bandwidth must be positive, got {h}")));
            }
            Some(h) => h,
            None => GridKde::silverman_bandwidth(ens),
        };
        Ok(Q3Evaluator {
            ens: ens.clone(),
            kde: GridKde::new(ens, h)?,
            kernel,
            replicas: Vec::new(),
        })
    }

    /// Attach `replicates` density estimates of bootstrap resamples (same
    /// bandwidth) used to account for density-estimate noise.
    pub fn with_density_bootstrap(mut self, replicates: usize, rng_seed: u64) -> Result<Self> {
        let h = self.kde.bandwidth;
        let d = self.ens.dim();
        let n = self.ens.len();
        let base = &self.ens;
        self.replicas = (0..replicates)
            .into_par_iter()
            .map(|b| {
                let mut rng = rng_from_seed(derive_seed(rng_seed, &[b as u64]));
                let mut samples = Vec::with_capacity(n * d);
                for _ in 0..n {
                    samples.extend_from_slice(base.sample(rng.random_range(0..n)));
                }
                let ens = VelocityEnsemble::from_flat(d, samples, base.weight)?;
                Q3Evaluator::new(&ens, Some(h), self.kernel)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(self)
    }

    /// The underlying density estimate.
    pub fn kde(&self) -> &GridKde {
        &self.kde
    }

    /// Draw from the kernel-smoothed empirical law (the law whose density
    /// the estimate tabulates).
    #[inline]
    fn draw(&self, rng: &mut SimRng, out: &mut [f64]) {
        let i = rng.random_range(0..self.ens.len());
        let s = self.ens.sample(i);
        let h = self.kde.bandwidth;
        for (o, x) in out.iter_mut().zip(s) {
            let z: f64 = rng.sample(StandardNormal);
            *o = x + h * z;
        }
    }

    /// Estimate `Q3(f)(v)` from `n_mc` draws; the standard error includes
    /// the density-bootstrap spread when replicas are attached.
    pub fn apply(&self, v: &[f64], n_mc: usize, rng_seed: u64) -> Result<McEstimate> {
        let main = self.apply_mc(v, n_mc, rng_seed)?;
        let reps = self
            .replicas
            .par_iter()
            .enumerate()
            .map(|(b, r)| r.apply_mc(v, n_mc, derive_seed(rng_seed, &[b as u64 + 1])))
            .collect::<Result<Vec<_>>>()?;
        Ok(combine_with_replicas(main, &reps))
    }

    /// Estimate `Q3(f)(v)` from `n_mc` draws with the Monte Carlo error only.
    pub fn apply_mc(&self, v: &[f64], n_mc: usize, rng_seed: u64) -> Result<McEstimate> {
        check_dim(self.ens.dim(), v.len())?;
        if n_mc < 10_000 {
            return Err(Error::Usage(format!("q3 estimation needs n_mc >= 10000, got {n_mc}")));
        }
        let mass = self.ens.mass();
        if mass == 0.0 {
            return Ok(McEstimate {
                estimate: 0.0,
                std_error: 0.0,
            });
        }
        let d = self.ens.dim();
        let area = sphere_area(2 * d);
        let m3 = mass * mass * mass;
        let f_v = self.kde.density(v);
        let mut rng = rng_from_seed(rng_seed);
        let mut w = vec![0.0; 2 * d];
        let (mut v1, mut v2) = (vec![0.0; d], vec![0.0; d]);
        let (mut a, mut b, mut c) = (vec![0.0; d], vec![0.0; d], vec![0.0; d]);
        let (mut sum, mut sum2) = (0.0, 0.0);
        for _ in 0..n_mc {
            self.draw(&mut rng, &mut v1);
            self.draw(&mut rng, &mut v2);
            uniform_sphere_into(&mut rng, &mut w);
            let (w1, w2) = w.split_at(d);
            let mut bsec = 0.0;
            let mut pi = 0.0;
            for q in 0..d {
                bsec += w1[q] * (v1[q] - v[q]) + w2[q] * (v2[q] - v[q]);
                pi += w1[q] * w2[q];
            }
            let k = self.kernel.value(bsec, pi);
            if k == 0.0 {
                continue;
            }
            let p1 = self.kde.density(&v1);
            let p2 = self.kde.density(&v2);
            if p1 <= 0.0 || p2 <= 0.0 {
                continue;
            }
            a.copy_from_slice(v);
            b.copy_from_slice(&v1);
            c.copy_from_slice(&v2);
            collide_in_place(w1, w2, &mut a, &mut b, &mut c);
            let gain = self.kde.density(&a) * self.kde.density(&b) * self.kde.density(&c) / (p1 * p2);
            let x = area * k * m3 * (gain - f_v);
            sum += x;
            sum2 += x * x;
        }
        Ok(mean_se(sum, sum2, n_mc))
    }

    /// Estimate the entropy dissipation
    /// `D(f) = (1/6) ∫ K b_+ (f*f1*f2* − f f1 f2) ln(f*f1*f2* / f f1 f2)`
    /// (non-negative pointwise) from `n_mc` draws.
    pub fn dissipation(&self, n_mc: usize, rng_seed: u64) -> Result<DissipationEstimate> {
        if n_mc < 2 {
            return Err(Error::Usage("dissipation estimate needs n_mc >= 2".into()));
        }
        let mass = self.ens.mass();
        let d = self.ens.dim();
        let area = sphere_area(2 * d);
        let m3 = mass * mass * mass;
        let mut rng = rng_from_seed(rng_seed);
        let mut w = vec![0.0; 2 * d];
        let (mut v, mut v1, mut v2) = (vec![0.0; d], vec![0.0; d], vec![0.0; d]);
        let (mut sum, mut sum2) = (0.0, 0.0);
        let mut skipped = 0usize;
        for _ in 0..n_mc {
            self.draw(&mut rng, &mut v);
            self.draw(&mut rng, &mut v1);
            self.draw(&mut rng, &mut v2);
            uniform_sphere_into(&mut rng, &mut w);
            let (w1, w2) = w.split_at(d);
            let mut bsec = 0.0;
            let mut pi = 0.0;
            for q in 0..d {
                bsec += w1[q] * (v1[q] - v[q]) + w2[q] * (v2[q] - v[q]);
                pi += w1[q] * w2[q];
            }
            let k = self.kernel.value(bsec, pi);
            if k == 0.0 {
                continue;
            }
            let loss = self.kde.density(&v) * self.kde.density(&v1) * self.kde.density(&v2);
            collide_in_place(w1, w2, &mut v, &mut v1, &mut v2);
            let gain = self.kde.density(&v) * self.kde.density(&v1) * self.kde.density(&v2);
            if !(loss > 0.0) || !(gain > 0.0) {
                skipped += 1;
                continue;
            }
            let r = gain / loss;
            let x = area / 6.0 * k * m3 * (r - 1.0) * r.ln();
            sum += x;
            sum2 += x * x;
        }
        let est = mean_se(sum, sum2, n_mc);
        Ok(DissipationEstimate {
            estimate: est.estimate,
            std_error: est.std_error,
            skipped,
            reliable: skipped * 20 <= n_mc,
        })
    }
}

/// `Q3(f)(v)` with Silverman bandwidth and the kernel of the kinetic
/// operator; the standard error covers Monte Carlo and density-estimate
/// noise ([`DEFAULT_DENSITY_REPLICATES`] bootstrap resamples).
pub fn q3_apply_mc(f: &VelocityEnsemble, v: &[f64], n_mc: usize, rng_seed: u64) -> Result<McEstimate> {
    Q3Evaluator::new(f, None, CollisionKernel::Operator)?
        .with_density_bootstrap(DEFAULT_DENSITY_REPLICATES, derive_seed(rng_seed, &[0xB5]))?
        .apply(v, n_mc, rng_seed)
}

/// Entropy dissipation with Silverman bandwidth and the kernel of the
/// kinetic operator.
pub fn entropy_dissipation_mc(f: &VelocityEnsemble, n_mc: usize, rng_seed: u64) -> Result<DissipationEstimate> {
    Q3Evaluator::new(f, None, CollisionKernel::Operator)?.dissipation(n_mc, rng_seed)
}

/// Grid quadrature of `∫ Q3(f) φ dv` for `φ ∈ {1, v_x, |v|²}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeakMoments {
    /// `∫ Q3`.
    pub mass: McEstimate,
    /// `∫ Q3 v_x`.
    pub momentum_x: McEstimate,
    /// `∫ Q3 |v|²`.
    pub energy: McEstimate,
}

fn weak_moments_mc(
    ev: &Q3Evaluator,
    spec: &HistogramSpec,
    n_mc: usize,
    rng_seed: u64,
) -> Result<[McEstimate; 3]> {
    let dv = spec.bin_volume();
    let per_point: Vec<Result<(Vec<f64>, McEstimate)>> = (0..spec.bin_count())
        .into_par_iter()
        .map(|g| {
            let v = spec.center(g);
            let est = ev.apply_mc(&v, n_mc, derive_seed(rng_seed, &[g as u64]))?;
            Ok((v, est))
        })
        .collect();
    let mut acc = [(0.0, 0.0); 3];
    for r in per_point {
        let (v, est) = r?;
        let phis = [1.0, v[0], norm2(&v)];
        for (slot, phi) in acc.iter_mut().zip(phis) {
            slot.0 += est.estimate * phi * dv;
            slot.1 += (est.std_error * phi * dv).powi(2);
        }
    }
    Ok(acc.map(|(e, v)| McEstimate {
        estimate: e,
        std_error: v.sqrt(),
    }))
}

/// Evaluate `Σ_g Q3(v_g) φ(v_g) ΔV` over a regular grid of
/// `points_per_axis^d` midpoints covering the cube of half-width
/// `half_width` about `center`.  Monte Carlo errors are propagated from the
/// per-point standard errors; density-estimate noise is added from the
/// evaluator's bootstrap replicas (if any), repeating the whole quadrature
/// for each.  Grid points use per-point seeds, so the result does not
/// depend on the thread count.
pub fn q3_weak_moments(
    ev: &Q3Evaluator,
    center: &[f64],
    half_width: f64,
    points_per_axis: usize,
    n_mc: usize,
    rng_seed: u64,
) -> Result<WeakMoments> {
    let d = ev.ens.dim();
    check_dim(d, center.len())?;
    let spec = HistogramSpec::centered_cube(d, center, half_width, points_per_axis)?;
    let main = weak_moments_mc(ev, &spec, n_mc, rng_seed)?;
    let reps = ev
        .replicas
        .iter()
        .enumerate()
        .map(|(b, r)| weak_moments_mc(r, &spec, n_mc, derive_seed(rng_seed, &[0xB5, b as u64])))
        .collect::<Result<Vec<_>>>()?;
    let pick = |k: usize| {
        let r: Vec<McEstimate> = reps.iter().map(|m| m[k]).collect();
        combine_with_replicas(main[k], &r)
    };
    Ok(WeakMoments {
        mass: pick(0),
        momentum_x: pick(1),
        energy: pick(2),
    })
}

/// Local well-posedness horizon
/// `T = β0^{d+1} e^{2μ0 − β0} / (2^{d+4} (1 + sqrt(2/β0)))`.
pub fn lwp_time(d: usize, beta0: f64, mu0: f64) -> Result<f64> {
    if !(beta0 > 0.0) {
        return Err(Error::Usage(format!("beta0 must be positive, got {beta0}")));
    }
    let df = d as f64;
    Ok(beta0.powf(df + 1.0) * (2.0 * mu0 - beta0).exp() / (2f64.powf(df + 4.0) * (1.0 + (2.0 / beta0).sqrt())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sphere_areas() {
        assert!((sphere_area(2) - 2.0 * std::f64::consts::PI).abs() < 1e-14);
        assert!((sphere_area(3) - 4.0 * std::f64::consts::PI).abs() < 1e-14);
        assert!((sphere_area(4) - 2.0 * std::f64::consts::PI.powi(2)).abs() < 1e-13);
        assert!((sphere_area(6) - std::f64::consts::PI.powi(3)).abs() < 1e-12);
    }

    #[test]
    fn moments_examples() {
        let e = VelocityEnsemble::from_flat(2, vec![1.0, 0.0], 1.0).unwrap();
        let m = moments(&e);
        assert_eq!(m.mass, 1.0);
        assert_eq!(m.momentum.0, vec![1.0, 0.0]);
        assert_eq!(m.energy, 0.5);
        let z = VelocityEnsemble::from_flat(2, vec![1.0, 0.0, 2.0, 3.0], 0.0).unwrap();
        let m = moments(&z);
        assert_eq!((m.mass, m.energy), (0.0, 0.0));
        assert_eq!(m.momentum.0, vec![0.0, 0.0]);
    }

    #[test]
    fn fit_rejects_degenerate() {
        let e = VelocityEnsemble::from_flat(2, vec![1.0, 2.0, 1.0, 2.0, 1.0, 2.0], 1.0).unwrap();
        assert!(matches!(fit_maxwellian(&e), Err(Error::Domain(_))));
        let one = VelocityEnsemble::from_flat(2, vec![1.0, 2.0], 1.0).unwrap();
        assert!(matches!(fit_maxwellian(&one), Err(Error::Usage(_))));
    }

    #[test]
    fn lwp_examples() {
        let t = lwp_time(2, 1.0, 0.0).unwrap();
        let direct = (-1f64).exp() / (64.0 * (1.0 + 2f64.sqrt()));
        assert!((t - direct).abs() / direct < 1e-12);
        assert!((t - 2.381e-3).abs() < 1e-6);
        assert!(lwp_time(2, 1.0, 0.5).unwrap() > t);
        assert!(lwp_time(2, 1e-8, 0.0).unwrap() < 1e-20);
        assert!(lwp_time(2, 0.0, 0.0).is_err());
    }

    #[test]
    fn zero_rate_only_advances_clock() {
        let e = maxwellian_sampler(&MaxwellianParams::standard(2), 100, 1).unwrap();
        let s = dsmc_step(&e, 0.1, 0.0, 2).unwrap();
        assert_eq!(s.samples(), e.samples());
        assert!((s.clock - 0.1).abs() < 1e-15);
    }

    #[test]
    fn oversized_step_is_rejected() {
        let e = maxwellian_sampler(&MaxwellianParams::standard(2), 10, 1).unwrap();
        assert!(matches!(dsmc_step(&e, 1e6, 1.0, 2), Err(Error::Stability { .. })));
    }

    #[test]
    fn kde_integrates_to_one() {
        let e = maxwellian_sampler(&MaxwellianParams::standard(2), 20_000, 4).unwrap();
        let kde = GridKde::new(&e, GridKde::silverman_bandwidth(&e)).unwrap();
        let mut s = 0.0;
        let h = 0.05;
        let n = (12.0 / h) as i64;
        for i in 0..n {
            for j in 0..n {
                let v = [-6.0 + (i as f64 + 0.5) * h, -6.0 + (j as f64 + 0.5) * h];
                s += kde.density(&v) * h * h;
            }
        }
        assert!((s - 1.0).abs() < 2e-3, "integral {s}");
    }

    #[test]
    fn zero_weight_operator_vanishes() {
        let e = VelocityEnsemble::from_flat(2, vec![0.0, 1.0, 1.0, 0.0, -1.0, 0.5, 0.3, 0.2], 0.0).unwrap();
        let q = q3_apply_mc(&e, &[0.0, 0.0], 10_000, 1).unwrap();
        assert_eq!(q.estimate, 0.0);
        assert!(Q3Evaluator::new(&e, Some(0.0), CollisionKernel::Operator).is_err());
    }
}
