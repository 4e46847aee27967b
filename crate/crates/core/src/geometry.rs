//! Phase-space geometry: ternary distance, admissible configurations, good
//! configurations, the transition map with its Jacobian, and Monte Carlo
//! estimates of sphere and ellipsoid measures.

use crate::algebra::{collide, cross_section_raw, dot, norm2, ImpactPair, SpatialVector, VelocityTriple};
use crate::error::{check_dim, Error, Result};
use crate::rng::{rng_from_seed, uniform_sphere};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

/// Minimum Monte Carlo sample size accepted by the measure estimators.
pub const MIN_MC_SAMPLES: usize = 10_000;

/// Positions and velocities of `m` particles in `R^d`, stored flat
/// (particle-major: components of particle `i` occupy `i*d .. (i+1)*d`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Configuration {
    dim: usize,
    positions: Vec<f64>,
    velocities: Vec<f64>,
}

impl Configuration {
    /// Build from per-particle vectors.
    pub fn new(dim: usize, positions: &[SpatialVector], velocities: &[SpatialVector]) -> Result<Self> {
        if positions.len() != velocities.len() {
            return Err(Error::Usage(format!(
                "{} positions but {} velocities",
                positions.len(),
                velocities.len()
            )));
        }
        let pos: Vec<f64> = positions
            .iter()
            .map(|p| check_dim(dim, p.dim()).map(|_| p.0.clone()))
            .collect::<Result<Vec<_>>>()?
            .concat();
        let vel: Vec<f64> = velocities
            .iter()
            .map(|p| check_dim(dim, p.dim()).map(|_| p.0.clone()))
            .collect::<Result<Vec<_>>>()?
            .concat();
        Configuration::from_flat(dim, pos, vel)
    }

    /// Build from flat component arrays.
    pub fn from_flat(dim: usize, positions: Vec<f64>, velocities: Vec<f64>) -> Result<Self> {
        if dim < 2 {
            return Err(Error::Usage(format!("dimension must be >= 2, got {dim}")));
        }
        if positions.len() != velocities.len() || positions.len() % dim != 0 || positions.is_empty() {
            return Err(Error::Usage(format!(
                "flat arrays of lengths {} and {} do not describe m >= 1 particles in dimension {dim}",
                positions.len(),
                velocities.len()
            )));
        }
        Ok(Configuration {
            dim,
            positions,
            velocities,
        })
    }

    /// Convenience constructor from nested arrays.
    pub fn from_vecs(positions: &[Vec<f64>], velocities: &[Vec<f64>]) -> Result<Self> {
        let dim = positions.first().map(|p| p.len()).unwrap_or(0);
        let p: Vec<SpatialVector> = positions.iter().map(|x| SpatialVector(x.clone())).collect();
        let v: Vec<SpatialVector> = velocities.iter().map(|x| SpatialVector(x.clone())).collect();
        Configuration::new(dim, &p, &v)
    }

    /// Spatial dimension `d`.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of particles `m`.
    pub fn count(&self) -> usize {
        self.positions.len() / self.dim
    }

    /// Position of particle `i`.
    #[inline]
    pub fn position(&self, i: usize) -> &[f64] {
        &self.positions[i * self.dim..(i + 1) * self.dim]
    }

    /// Velocity of particle `i`.
    #[inline]
    pub fn velocity(&self, i: usize) -> &[f64] {
        &self.velocities[i * self.dim..(i + 1) * self.dim]
    }

    /// Mutable position of particle `i`.
    #[inline]
    pub fn position_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.positions[i * self.dim..(i + 1) * self.dim]
    }

    /// Mutable velocity of particle `i`.
    #[inline]
    pub fn velocity_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.velocities[i * self.dim..(i + 1) * self.dim]
    }

    /// All position components.
    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    /// All velocity components.
    pub fn velocities(&self) -> &[f64] {
        &self.velocities
    }

    /// Mutable access to all position components.
    pub fn positions_mut(&mut self) -> &mut [f64] {
        &mut self.positions
    }

    /// Mutable access to all velocity components.
    pub fn velocities_mut(&mut self) -> &mut [f64] {
        &mut self.velocities
    }

    /// Velocities of particles `(i, j, k)` as a triple with `i` central.
    pub fn velocity_triple(&self, i: usize, j: usize, k: usize) -> VelocityTriple {
        VelocityTriple {
            v1: self.velocity(i).into(),
            v2: self.velocity(j).into(),
            v3: self.velocity(k).into(),
        }
    }

    /// Total momentum `Σ v_i`.
    pub fn momentum(&self) -> Vec<f64> {
        let mut p = vec![0.0; self.dim];
        for v in self.velocities.chunks_exact(self.dim) {
            p.iter_mut().zip(v).for_each(|(a, b)| *a += b);
        }
        p
    }

    /// Kinetic energy `½ Σ |v_i|²`.
    pub fn kinetic_energy(&self) -> f64 {
        0.5 * norm2(&self.velocities)
    }

    /// Apply free flight `X ↦ X + t V` (no boundary handling).
    pub fn free_flight(&mut self, t: f64) {
        self.positions
            .iter_mut()
            .zip(&self.velocities)
            .for_each(|(x, v)| *x += t * v);
    }

    /// Append one particle.
    pub fn push(&mut self, x: &[f64], v: &[f64]) -> Result<()> {
        check_dim(self.dim, x.len())?;
        check_dim(self.dim, v.len())?;
        self.positions.extend_from_slice(x);
        self.velocities.extend_from_slice(v);
        Ok(())
    }
}

/// Spatial domain in which particles move.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Boundary {
    /// All of `R^d`; distances are plain Euclidean.
    FreeSpace,
    /// The torus `[0, L)^d`; distances use the minimum image.
    PeriodicBox { side: f64 },
}

impl Boundary {
    /// Write the (minimum-image) displacement `to − from` into `out`.
    #[inline]
    pub fn displacement(&self, from: &[f64], to: &[f64], out: &mut [f64]) {
        match *self {
            Boundary::FreeSpace => {
                for a in 0..out.len() {
                    out[a] = to[a] - from[a];
                }
            }
            Boundary::PeriodicBox { side } => {
                for a in 0..out.len() {
                    let d = to[a] - from[a];
                    out[a] = d - side * (d / side).round();
                }
            }
        }
    }

    /// Squared (minimum-image) distance.
    #[inline]
    pub fn distance2(&self, a: &[f64], b: &[f64]) -> f64 {
        match *self {
            Boundary::FreeSpace => a.iter().zip(b).map(|(x, y)| (y - x) * (y - x)).sum(),
            Boundary::PeriodicBox { side } => a
                .iter()
                .zip(b)
                .map(|(x, y)| {
                    let d = y - x;
                    let d = d - side * (d / side).round();
                    d * d
                })
                .sum(),
        }
    }

    /// Wrap a position into the fundamental domain.
    #[inline]
    pub fn wrap(&self, x: &mut [f64]) {
        if let Boundary::PeriodicBox { side } = *self {
            for c in x.iter_mut() {
                *c -= side * (*c / side).floor();
                if *c >= side {
                    *c -= side;
                }
            }
        }
    }
}

/// The ternary distance `sqrt(|x1 − x2|² + |x1 − x3|²)`.
pub fn ternary_distance(x1: &[f64], x2: &[f64], x3: &[f64]) -> Result<f64> {
    check_dim(x1.len(), x2.len())?;
    check_dim(x1.len(), x3.len())?;
    Ok((Boundary::FreeSpace.distance2(x1, x2) + Boundary::FreeSpace.distance2(x1, x3)).sqrt())
}

/// Options for [`in_phase_space_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseSpaceOptions {
    /// Distance convention.
    pub boundary: Boundary,
    /// Use all three centres of every unordered triple instead of only the
    /// lowest index.
    pub symmetric: bool,
    /// Relative slack: accept `d² ≥ 2ε²(1 − rel_tol)`.
    pub rel_tol: f64,
}

impl Default for PhaseSpaceOptions {
    fn default() -> Self {
        PhaseSpaceOptions {
            boundary: Boundary::FreeSpace,
            symmetric: false,
            rel_tol: 0.0,
        }
    }
}

/// Whether `d²(x_i; x_j, x_k) ≥ 2ε²` for every ordered triplet `i < j < k`.
pub fn in_phase_space(z: &Configuration, eps: f64) -> bool {
    in_phase_space_with(z, eps, &PhaseSpaceOptions::default())
}

/// Phase-space membership with an explicit boundary, triplet convention and
/// tolerance.
pub fn in_phase_space_with(z: &Configuration, eps: f64, opts: &PhaseSpaceOptions) -> bool {
    first_phase_space_violation(z, eps, opts).is_none()
}

/// The first triplet `(centre, j, k)` violating the interaction condition, if
/// any.  Only pairs closer than `√2 ε` can take part in a violation, so the
/// search runs over a neighbour list.
pub fn first_phase_space_violation(
    z: &Configuration,
    eps: f64,
    opts: &PhaseSpaceOptions,
) -> Option<[usize; 3]> {
    let m = z.count();
    if m < 3 {
        return None;
    }
    let threshold = 2.0 * eps * eps * (1.0 - opts.rel_tol);
    let mut near: Vec<Vec<(usize, f64)>> = vec![Vec::new(); m];
    for i in 0..m {
        for j in (i + 1)..m {
            let r2 = opts.boundary.distance2(z.position(i), z.position(j));
            if r2 < threshold {
                near[i].push((j, r2));
                near[j].push((i, r2));
            }
        }
    }
    for (i, list) in near.iter().enumerate() {
        for (a, &(j, rj)) in list.iter().enumerate() {
            for &(k, rk) in &list[a + 1..] {
                let ordered_ok = opts.symmetric || (i < j && i < k);
                if ordered_ok && rj + rk < threshold {
                    let (lo, hi) = if j < k { (j, k) } else { (k, j) };
                    return Some([i, lo, hi]);
                }
            }
        }
    }
    None
}

/// `min_{t ≥ t0} |dx − t·dv|`, in closed form.
pub fn min_backward_separation(dx: &[f64], dv: &[f64], t0: f64) -> f64 {
    let a = norm2(dv);
    let t = if a > 0.0 { (dot(dx, dv) / a).max(t0) } else { t0 };
    dx.iter()
        .zip(dv)
        .map(|(x, v)| (x - t * v) * (x - t * v))
        .sum::<f64>()
        .sqrt()
}

/// Whether the backward free flow keeps every pair farther apart than
/// `sigma` for all times `t ≥ t0`.
pub fn is_good_configuration(z: &Configuration, sigma: f64, t0: f64) -> Result<bool> {
    if !(sigma > 0.0) || !(t0 >= 0.0) {
        return Err(Error::Usage(format!(
            "good-configuration test needs sigma > 0 and t0 >= 0, got sigma={sigma}, t0={t0}"
        )));
    }
    let m = z.count();
    let d = z.dim();
    let mut dx = vec![0.0; d];
    let mut dv = vec![0.0; d];
    for i in 0..m {
        for j in (i + 1)..m {
            for a in 0..d {
                dx[a] = z.position(i)[a] - z.position(j)[a];
                dv[a] = z.velocity(i)[a] - z.velocity(j)[a];
            }
            if min_backward_separation(&dx, &dv, t0) <= sigma {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Normalized post-collisional relative velocities `(ν1, ν2)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransitionImage {
    /// `(v1* − v2*) / r`.
    pub nu1: SpatialVector,
    /// `(v1* − v3*) / r`.
    pub nu2: SpatialVector,
}

impl TransitionImage {
    /// `| |ν1|² + |ν2|² + |ν1 − ν2|² − 1 |`.
    pub fn ellipsoid_residual(&self) -> f64 {
        (ellipsoid_form(&self.nu1, &self.nu2) - 1.0).abs()
    }
}

/// `|ν1|² + |ν2|² + |ν1 − ν2|²`.
pub fn ellipsoid_form(nu1: &[f64], nu2: &[f64]) -> f64 {
    let mut s = 0.0;
    for a in 0..nu1.len() {
        let d = nu1[a] - nu2[a];
        s += nu1[a] * nu1[a] + nu2[a] * nu2[a] + d * d;
    }
    s
}

/// `r = sqrt(|v1 − v2|² + |v1 − v3|² + |v2 − v3|²)`.
pub fn relative_radius(v: &VelocityTriple) -> f64 {
    v.relative_magnitude2().sqrt()
}

fn transition_domain(v: &VelocityTriple, pair: &ImpactPair) -> Result<(f64, f64)> {
    check_dim(pair.dim(), v.dim())?;
    let r = relative_radius(v);
    if !(r > 0.0) {
        return Err(Error::Degenerate("all three velocities coincide (r = 0)".into()));
    }
    let (n1, n2) = v.relatives();
    let b = cross_section_raw(pair.omega1(), pair.omega2(), &n1, &n2);
    if !(b > 0.0) {
        return Err(Error::Domain(format!(
            "transition map requires b > 0, got b = {b:e}"
        )));
    }
    Ok((r, b))
}

/// The transition map `ω ↦ ((v1* − v2*)/r, (v1* − v3*)/r)` on `b > 0`.
pub fn transition_map(v: &VelocityTriple, pair: &ImpactPair) -> Result<TransitionImage> {
    let (r, _) = transition_domain(v, pair)?;
    let w = collide(pair, v)?;
    Ok(TransitionImage {
        nu1: w.v1.sub(&w.v2).scale(1.0 / r),
        nu2: w.v1.sub(&w.v3).scale(1.0 / r),
    })
}

/// The transition map written as a function of an arbitrary `ω ∈ R^{2d}`
/// (the formula extended off the sphere); used for finite differences.
pub fn transition_map_extended(v: &VelocityTriple, omega: &[f64]) -> Vec<f64> {
    let d = v.dim();
    let (w1, w2) = omega.split_at(d);
    let r = relative_radius(v);
    let mut a = v.v1.clone();
    let mut b = v.v2.clone();
    let mut c = v.v3.clone();
    crate::algebra::collide_in_place(w1, w2, &mut a, &mut b, &mut c);
    let mut out = Vec::with_capacity(2 * d);
    out.extend((0..d).map(|k| (a[k] - b[k]) / r));
    out.extend((0..d).map(|k| (a[k] - c[k]) / r));
    out
}

/// Closed-form Jacobian `3^d · 2 · r^{−2d} · c^{2d} / (1 + ⟨ω1, ω2⟩)` of the
/// transition map on `b > 0`.
pub fn transition_jacobian(v: &VelocityTriple, pair: &ImpactPair) -> Result<f64> {
    let (r, _) = transition_domain(v, pair)?;
    let d = v.dim() as i32;
    let c = crate::algebra::c_factor(pair, v)?;
    let one_plus_pi = 1.0 + pair.inner();
    Ok(3f64.powi(d) * 2.0 * (c / r).powi(2 * d) / one_plus_pi)
}

/// Central finite-difference determinant of [`transition_map_extended`] at
/// the impact pair, with step `h`.
pub fn transition_jacobian_fd(v: &VelocityTriple, pair: &ImpactPair, h: f64) -> Result<f64> {
    transition_domain(v, pair)?;
    let w0 = pair.to_flat();
    let n = w0.len();
    let mut jac = DMatrix::<f64>::zeros(n, n);
    for col in 0..n {
        let mut wp = w0.clone();
        let mut wm = w0.clone();
        wp[col] += h;
        wm[col] -= h;
        let fp = transition_map_extended(v, &wp);
        let fm = transition_map_extended(v, &wm);
        for row in 0..n {
            jac[(row, col)] = (fp[row] - fm[row]) / (2.0 * h);
        }
    }
    Ok(jac.determinant().abs())
}

/// A `d`-cylinder: all points within `radius` of the line through `center`
/// with the given `direction`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CylinderSpec {
    /// A point on the axis.
    pub center: SpatialVector,
    /// Axis direction (need not be normalized, must be nonzero).
    pub direction: SpatialVector,
    /// Radius `ρ > 0`.
    pub radius: f64,
}

impl CylinderSpec {
    /// Validate and build a cylinder.
    pub fn new(center: impl Into<SpatialVector>, direction: impl Into<SpatialVector>, radius: f64) -> Result<Self> {
        let center = center.into();
        let direction = direction.into();
        check_dim(center.dim(), direction.dim())?;
        if !(direction.norm2() > 0.0) {
            return Err(Error::Usage("cylinder direction must be nonzero".into()));
        }
        if !(radius > 0.0) {
            return Err(Error::Usage(format!("cylinder radius must be positive, got {radius}")));
        }
        Ok(CylinderSpec {
            center,
            direction,
            radius,
        })
    }

    /// Distance from `p` to the axis.
    pub fn axis_distance(&self, p: &[f64]) -> f64 {
        axis_distance(&self.center, &self.direction, p)
    }
}

fn axis_distance(center: &[f64], direction: &[f64], p: &[f64]) -> f64 {
    let u2 = norm2(direction);
    let q: Vec<f64> = p.iter().zip(center).map(|(a, b)| a - b).collect();
    let s = dot(&q, direction) / u2;
    q.iter()
        .zip(direction)
        .map(|(a, u)| (a - s * u) * (a - s * u))
        .sum::<f64>()
        .max(0.0)
        .sqrt()
}

/// A Monte Carlo fraction with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FractionEstimate {
    /// Estimated measure fraction.
    pub fraction: f64,
    /// Standard error of the estimate.
    pub std_error: f64,
    /// Number of samples landing in the region.
    pub hits: usize,
    /// Total number of samples.
    pub n_samples: usize,
}

fn check_mc_args(d: usize, n_samples: usize) -> Result<()> {
    if d < 2 {
        return Err(Error::Usage(format!("dimension must be >= 2, got {d}")));
    }
    if n_samples < MIN_MC_SAMPLES {
        return Err(Error::Usage(format!(
            "at least {MIN_MC_SAMPLES} samples are required, got {n_samples}"
        )));
    }
    Ok(())
}

/// Fraction of the unit sphere of `R^{2d}` whose first block lies in the
/// cylinder `cyl`.
pub fn mc_sphere_cylinder_fraction(d: usize, cyl: &CylinderSpec, n_samples: usize, rng_seed: u64) -> Result<FractionEstimate> {
    let out = mc_sphere_cylinder_fractions(d, &cyl.center, &cyl.direction, &[cyl.radius], n_samples, rng_seed)?;
    Ok(out[0])
}

/// [`mc_sphere_cylinder_fraction`] for several radii sharing one sample set.
pub fn mc_sphere_cylinder_fractions(
    d: usize,
    center: &[f64],
    direction: &[f64],
    radii: &[f64],
    n_samples: usize,
    rng_seed: u64,
) -> Result<Vec<FractionEstimate>> {
    check_mc_args(d, n_samples)?;
    check_dim(d, center.len())?;
    check_dim(d, direction.len())?;
    if !(norm2(direction) > 0.0) {
        return Err(Error::Usage("cylinder direction must be nonzero".into()));
    }
    let mut rng = rng_from_seed(rng_seed);
    let mut hits = vec![0usize; radii.len()];
    for _ in 0..n_samples {
        let w = uniform_sphere(&mut rng, 2 * d);
        let dist = axis_distance(center, direction, &w[..d]);
        for (h, &rho) in hits.iter_mut().zip(radii) {
            if dist <= rho {
                *h += 1;
            }
        }
    }
    let n = n_samples as f64;
    Ok(hits
        .into_iter()
        .map(|h| {
            let p = h as f64 / n;
            FractionEstimate {
                fraction: p,
                std_error: (p * (1.0 - p) / n).sqrt(),
                hits: h,
                n_samples,
            }
        })
        .collect())
}

/// The linear map `P1` sending the ellipsoid `|ν1|²+|ν2|²+|ν1−ν2|² = 1`
/// onto the unit sphere: `P1 (ν1, ν2) = (√6/2 ν1, −√2/2 ν1 + √2 ν2)`.
pub fn ellipsoid_to_sphere(nu: &[f64]) -> Vec<f64> {
    let d = nu.len() / 2;
    let (a, b, c) = (6f64.sqrt() / 2.0, 2f64.sqrt() / 2.0, 2f64.sqrt());
    let mut out = vec![0.0; 2 * d];
    for k in 0..d {
        out[k] = a * nu[k];
        out[d + k] = -b * nu[k] + c * nu[d + k];
    }
    out
}

/// `P1⁻¹`, mapping the unit sphere onto the ellipsoid.
pub fn sphere_to_ellipsoid(theta: &[f64]) -> Vec<f64> {
    let d = theta.len() / 2;
    let (a, b, c) = (6f64.sqrt() / 2.0, 2f64.sqrt() / 2.0, 2f64.sqrt());
    let mut out = vec![0.0; 2 * d];
    for k in 0..d {
        out[k] = theta[k] / a;
        out[d + k] = (theta[d + k] + b * out[k]) / c;
    }
    out
}

/// Surface-area density (up to the constant `|det P1⁻¹|`) of the push-forward
/// of the sphere's surface measure under `P1⁻¹`, at the sphere point `θ`:
/// `|P1ᵀ θ|`.
pub fn ellipsoid_area_weight(theta: &[f64]) -> f64 {
    let d = theta.len() / 2;
    let (a, b, c) = (6f64.sqrt() / 2.0, 2f64.sqrt() / 2.0, 2f64.sqrt());
    let mut s = 0.0;
    for k in 0..d {
        let u = a * theta[k] - b * theta[d + k];
        let w = c * theta[d + k];
        s += u * u + w * w;
    }
    s.sqrt()
}

/// Family of ellipsoid regions parametrized by a radius `ρ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum RegionFamily {
    /// `|ν1| ≤ ρ`.
    BallFirst,
    /// `|ν2| ≤ ρ`.
    BallSecond,
    /// `|ν1 − ν2| ≤ ρ`.
    Strip,
    /// `ν1` within `ρ` of the line through `center` along `direction`.
    CylinderFirst {
        center: SpatialVector,
        direction: SpatialVector,
    },
}

impl RegionFamily {
    /// Parse a region tag (`ball-first`, `ball-second`, `strip`,
    /// `cylinder-first`); cylinders use an axis through the origin along the
    /// first coordinate direction.
    pub fn parse(tag: &str, d: usize) -> Result<Self> {
        match tag {
            "ball-first" => Ok(RegionFamily::BallFirst),
            "ball-second" => Ok(RegionFamily::BallSecond),
            "strip" => Ok(RegionFamily::Strip),
            "cylinder-first" => {
                let mut dir = vec![0.0; d];
                dir[0] = 1.0;
                Ok(RegionFamily::CylinderFirst {
                    center: SpatialVector::zeros(d),
                    direction: SpatialVector(dir),
                })
            }
            other => Err(Error::Usage(format!(
                "unknown region tag `{other}` (expected ball-first, ball-second, strip or cylinder-first)"
            ))),
        }
    }

    /// Tag string of the family.
    pub fn tag(&self) -> &'static str {
        match self {
            RegionFamily::BallFirst => "ball-first",
            RegionFamily::BallSecond => "ball-second",
            RegionFamily::Strip => "strip",
            RegionFamily::CylinderFirst { .. } => "cylinder-first",
        }
    }

    /// The quantity compared against `ρ` for an ellipsoid point `ν`.
    pub fn statistic(&self, nu: &[f64]) -> f64 {
        let d = nu.len() / 2;
        let (n1, n2) = nu.split_at(d);
        match self {
            RegionFamily::BallFirst => norm2(n1).sqrt(),
            RegionFamily::BallSecond => norm2(n2).sqrt(),
            RegionFamily::Strip => n1
                .iter()
                .zip(n2)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt(),
            RegionFamily::CylinderFirst { center, direction } => axis_distance(center, direction, n1),
        }
    }
}

/// A concrete ellipsoid region: a family at a fixed radius.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum EllipsoidRegion {
    /// `|ν1| ≤ ρ`.
    BallFirst(f64),
    /// `|ν2| ≤ ρ`.
    BallSecond(f64),
    /// `|ν1 − ν2| ≤ ρ`.
    Strip(f64),
    /// `ν1 ∈ K_ρ(w, y)`.
    CylinderFirst(CylinderSpec),
}

impl EllipsoidRegion {
    /// Build a region from a tag and a radius (see [`RegionFamily::parse`]).
    pub fn parse(tag: &str, rho: f64, d: usize) -> Result<Self> {
        if !(rho > 0.0) {
            return Err(Error::Usage(format!("region radius must be positive, got {rho}")));
        }
        Ok(match RegionFamily::parse(tag, d)? {
            RegionFamily::BallFirst => EllipsoidRegion::BallFirst(rho),
            RegionFamily::BallSecond => EllipsoidRegion::BallSecond(rho),
            RegionFamily::Strip => EllipsoidRegion::Strip(rho),
            RegionFamily::CylinderFirst { center, direction } => {
                EllipsoidRegion::CylinderFirst(CylinderSpec::new(center, direction, rho)?)
            }
        })
    }

    fn split(&self) -> (RegionFamily, f64) {
        match self {
            EllipsoidRegion::BallFirst(r) => (RegionFamily::BallFirst, *r),
            EllipsoidRegion::BallSecond(r) => (RegionFamily::BallSecond, *r),
            EllipsoidRegion::Strip(r) => (RegionFamily::Strip, *r),
            EllipsoidRegion::CylinderFirst(c) => (
                RegionFamily::CylinderFirst {
                    center: c.center.clone(),
                    direction: c.direction.clone(),
                },
                c.radius,
            ),
        }
    }
}

/// Fraction of the ellipsoid's surface measure lying in `region`.
pub fn mc_ellipsoid_cap_fraction(d: usize, region: &EllipsoidRegion, n_samples: usize, rng_seed: u64) -> Result<FractionEstimate> {
    let (family, rho) = region.split();
    if let RegionFamily::CylinderFirst { center, .. } = &family {
        check_dim(d, center.dim())?;
    }
    Ok(mc_ellipsoid_cap_fractions(d, &family, &[rho], n_samples, rng_seed)?[0])
}

/// [`mc_ellipsoid_cap_fraction`] for several radii sharing one sample set.
///
/// Sphere samples `θ` are pushed through `P1⁻¹` and weighted by the
/// surface-measure density [`ellipsoid_area_weight`]; the fraction is the
/// weighted hit ratio and the standard error follows from the
/// ratio-estimator variance.
pub fn mc_ellipsoid_cap_fractions(
    d: usize,
    family: &RegionFamily,
    radii: &[f64],
    n_samples: usize,
    rng_seed: u64,
) -> Result<Vec<FractionEstimate>> {
    check_mc_args(d, n_samples)?;
    let mut rng = rng_from_seed(rng_seed);
    let mut weights = Vec::with_capacity(n_samples);
    let mut stats = Vec::with_capacity(n_samples);
    for _ in 0..n_samples {
        let theta = uniform_sphere(&mut rng, 2 * d);
        let nu = sphere_to_ellipsoid(&theta);
        weights.push(ellipsoid_area_weight(&theta));
        stats.push(family.statistic(&nu));
    }
    let total: f64 = weights.iter().sum();
    Ok(radii
        .iter()
        .map(|&rho| {
            let mut hit_w = 0.0;
            let mut hits = 0usize;
            for (w, s) in weights.iter().zip(&stats) {
                if *s <= rho {
                    hit_w += w;
                    hits += 1;
                }
            }
            let p = hit_w / total;
            let var: f64 = weights
                .iter()
                .zip(&stats)
                .map(|(w, s)| {
                    let ind = if *s <= rho { 1.0 } else { 0.0 };
                    (w * (ind - p)).powi(2)
                })
                .sum::<f64>()
                / (total * total);
            FractionEstimate {
                fraction: p,
                std_error: var.sqrt(),
                hits,
                n_samples,
            }
        })
        .collect())
}

/// Result of a log-log least-squares fit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    /// Fitted exponent.
    pub slope: f64,
    /// Number of radii with enough hits to enter the fit.
    pub points_used: usize,
}

/// Weighted least-squares slope of `log(fraction)` against `log(ρ)`, using
/// only the radii whose estimate rests on at least `min_hits` samples.
/// Each point is weighted by the inverse variance of `log(fraction)`,
/// `(fraction / std_error)²`, so that sparse small-radius points do not
/// dominate.
pub fn loglog_slope(radii: &[f64], estimates: &[FractionEstimate], min_hits: usize) -> Option<SlopeFit> {
    let pts: Vec<(f64, f64, f64)> = radii
        .iter()
        .zip(estimates)
        .filter(|(_, e)| e.hits >= min_hits.max(1) && e.fraction > 0.0)
        .map(|(r, e)| {
            let w = if e.std_error > 0.0 {
                (e.fraction / e.std_error).powi(2)
            } else {
                e.hits as f64
            };
            (r.ln(), e.fraction.ln(), w)
        })
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let sw: f64 = pts.iter().map(|p| p.2).sum();
    let mx = pts.iter().map(|p| p.2 * p.0).sum::<f64>() / sw;
    let my = pts.iter().map(|p| p.2 * p.1).sum::<f64>() / sw;
    let sxy: f64 = pts.iter().map(|p| p.2 * (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| p.2 * (p.0 - mx) * (p.0 - mx)).sum();
    Some(SlopeFit {
        slope: sxy / sxx,
        points_used: pts.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::SQRT_2;

    fn cfg(x: &[[f64; 2]], v: &[[f64; 2]]) -> Configuration {
        Configuration::from_vecs(
            &x.iter().map(|p| p.to_vec()).collect::<Vec<_>>(),
            &v.iter().map(|p| p.to_vec()).collect::<Vec<_>>(),
        )
        .unwrap()
    }

    #[test]
    fn ternary_distance_examples() {
        assert_eq!(ternary_distance(&[1.0, 2.0], &[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        let d = ternary_distance(&[0.0, 0.0], &[1.0, 0.0], &[0.0, 1.0]).unwrap();
        assert!((d - SQRT_2).abs() < 1e-15);
        let eps = 0.3;
        let d = ternary_distance(&[0.0, 0.0], &[eps, 0.0], &[0.0, -eps]).unwrap();
        assert!((d * d - 2.0 * eps * eps).abs() < 1e-15);
    }

    #[test]
    fn phase_space_examples() {
        let two = cfg(&[[0.0, 0.0], [0.0, 0.0]], &[[0.0; 2], [0.0; 2]]);
        assert!(in_phase_space(&two, 0.1));
        let far = cfg(&[[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]], &[[0.0; 2]; 3]);
        assert!(in_phase_space(&far, 0.1));
        let close = cfg(&[[0.0, 0.0], [0.05, 0.0], [0.0, 0.05]], &[[0.0; 2]; 3]);
        assert!(!in_phase_space(&close, 0.1));
    }

    #[test]
    fn ordered_and_symmetric_conventions_differ() {
        // Particle 2 sits between 0 and 1, which are far from each other:
        // only the centre at index 2 violates the condition.
        let z = cfg(&[[-0.09, 0.0], [0.09, 0.0], [0.0, 0.0]], &[[0.0; 2]; 3]);
        assert!(in_phase_space(&z, 0.1));
        let sym = PhaseSpaceOptions {
            symmetric: true,
            ..Default::default()
        };
        assert!(!in_phase_space_with(&z, 0.1, &sym));
    }

    #[test]
    fn periodic_minimum_image_counts() {
        let z = cfg(&[[0.01, 0.5], [0.99, 0.5], [0.01, 0.52]], &[[0.0; 2]; 3]);
        assert!(in_phase_space(&z, 0.05));
        let per = PhaseSpaceOptions {
            boundary: Boundary::PeriodicBox { side: 1.0 },
            ..Default::default()
        };
        assert!(!in_phase_space_with(&z, 0.05, &per));
    }

    #[test]
    fn backward_separation_examples() {
        assert_eq!(min_backward_separation(&[3.0, 4.0], &[0.0, 0.0], 0.0), 5.0);
        assert_eq!(min_backward_separation(&[2.0, 0.0], &[1.0, 0.0], 0.0), 0.0);
        assert_eq!(min_backward_separation(&[2.0, 0.0], &[-1.0, 0.0], 0.0), 2.0);
        assert_eq!(min_backward_separation(&[2.0, 0.0], &[1.0, 0.0], 3.0), 1.0);
    }

    #[test]
    fn good_configuration_examples() {
        let one = cfg(&[[0.0, 0.0]], &[[1.0, 0.0]]);
        assert!(is_good_configuration(&one, 1.0, 0.0).unwrap());
        // Backward flow x_i − x_j − t(v_i − v_j): with v1=(1,0), v2=(2,0) the
        // backward separation (−2 + t, 0) closes at t = 2.
        let closing = cfg(&[[0.0, 0.0], [2.0, 0.0]], &[[1.0, 0.0], [2.0, 0.0]]);
        assert!(!is_good_configuration(&closing, 1.0, 0.0).unwrap());
        // With v2 = 0 the backward separation (−2 − t, 0) only grows.
        let opening = cfg(&[[0.0, 0.0], [2.0, 0.0]], &[[1.0, 0.0], [0.0, 0.0]]);
        assert!(is_good_configuration(&opening, 1.0, 0.0).unwrap());
        // Starting the backward flow late enough skips the close encounter.
        assert!(is_good_configuration(&closing, 1.0, 3.5).unwrap());
        assert!(is_good_configuration(&closing, 0.0, 0.0).is_err());
    }

    #[test]
    fn transition_worked_example() {
        let v = VelocityTriple::new([0.0, 0.0], [1.0, 0.0], [0.0, 1.0]).unwrap();
        let p = ImpactPair::new([1.0 / SQRT_2, 0.0], [0.0, 1.0 / SQRT_2]).unwrap();
        let img = transition_map(&v, &p).unwrap();
        for x in img.nu1.iter().chain(img.nu2.iter()) {
            assert!((x - 0.5).abs() < 1e-15);
        }
        assert!(img.ellipsoid_residual() < 1e-15);
        let j = transition_jacobian(&v, &p).unwrap();
        assert!((j - 4.5).abs() < 1e-13);
        let fd = transition_jacobian_fd(&v, &p, 1e-6).unwrap();
        assert!((fd - 4.5).abs() / 4.5 < 1e-5, "fd = {fd}");
    }

    #[test]
    fn transition_domain_errors() {
        let v = VelocityTriple::new([0.0, 0.0], [1.0, 0.0], [0.0, 1.0]).unwrap();
        let p = ImpactPair::new([-1.0, 0.0], [0.0, -1.0]).unwrap();
        assert!(matches!(transition_map(&v, &p), Err(Error::Domain(_))));
        let same = VelocityTriple::new([1.0, 1.0], [1.0, 1.0], [1.0, 1.0]).unwrap();
        assert!(matches!(transition_map(&same, &p), Err(Error::Degenerate(_))));
        assert!(matches!(transition_jacobian(&same, &p), Err(Error::Degenerate(_))));
    }

    #[test]
    fn ellipsoid_maps_are_inverse() {
        let mut rng = rng_from_seed(5);
        for _ in 0..100 {
            let th = uniform_sphere(&mut rng, 6);
            let nu = sphere_to_ellipsoid(&th);
            assert!((ellipsoid_form(&nu[..3], &nu[3..]) - 1.0).abs() < 1e-14);
            let back = ellipsoid_to_sphere(&nu);
            for (a, b) in back.iter().zip(&th) {
                assert!((a - b).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn fraction_edge_cases() {
        let cyl = CylinderSpec::new([0.0, 0.0], [1.0, 0.0], 1.5).unwrap();
        let f = mc_sphere_cylinder_fraction(2, &cyl, 10_000, 1).unwrap();
        assert_eq!(f.fraction, 1.0);
        let tiny = CylinderSpec::new([0.0, 0.0], [1.0, 0.0], 1e-9).unwrap();
        assert!(mc_sphere_cylinder_fraction(2, &tiny, 10_000, 1).unwrap().fraction < 1e-3);
        let big = EllipsoidRegion::BallFirst(2.0);
        assert_eq!(mc_ellipsoid_cap_fraction(2, &big, 10_000, 1).unwrap().fraction, 1.0);
        let small = EllipsoidRegion::Strip(1e-9);
        assert_eq!(mc_ellipsoid_cap_fraction(3, &small, 10_000, 1).unwrap().fraction, 0.0);
        assert!(EllipsoidRegion::parse("annulus", 0.1, 2).is_err());
        assert!(mc_sphere_cylinder_fraction(2, &cyl, 100, 1).is_err());
    }
}
