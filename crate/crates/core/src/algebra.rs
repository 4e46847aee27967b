//! The ternary collisional transformation and its cross-section.
//!
//! A ternary collision is parametrized by an impact pair `(ω1, ω2)` on the
//! unit sphere of `R^{2d}`.  With
//!
//! ```text
//! c = (⟨ω1, v2 − v1⟩ + ⟨ω2, v3 − v1⟩) / (1 + ⟨ω1, ω2⟩)
//! ```
//!
//! the post-collisional velocities are
//! `v1* = v1 + c(ω1 + ω2)`, `v2* = v2 − cω1`, `v3* = v3 − cω2`.
//! The map is a linear involution conserving momentum and kinetic energy; the
//! cross-section `b = ⟨ω1, v2 − v1⟩ + ⟨ω2, v3 − v1⟩` changes sign under it.

use crate::error::{check_dim, Error, Result};
use crate::rng::{fill_normal, rng_from_seed, uniform_sphere};
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::ops::{Deref, DerefMut};

/// Sphere residual above which [`ImpactPair::new`] renormalizes its input.
pub const SPHERE_TOLERANCE: f64 = 1e-12;
/// Squared norm below which an impact pair has no usable direction.
pub const MIN_PAIR_NORM2: f64 = 1e-6;

/// Euclidean inner product of two equally long slices.
#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Squared Euclidean norm.
#[inline]
pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a)
}

/// A vector of `R^d` (positions, velocities, impact directions).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SpatialVector(pub Vec<f64>);

impl SpatialVector {
    /// Wrap a component vector.
    pub fn new(components: Vec<f64>) -> Self {
        SpatialVector(components)
    }

    /// The zero vector of dimension `d`.
    pub fn zeros(d: usize) -> Self {
        SpatialVector(vec![0.0; d])
    }

    /// Dimension of the vector.
    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// Inner product; the caller guarantees equal dimensions.
    pub fn dot(&self, other: &[f64]) -> f64 {
        dot(&self.0, other)
    }

    /// Squared norm.
    pub fn norm2(&self) -> f64 {
        norm2(&self.0)
    }

    /// Euclidean norm.
    pub fn norm(&self) -> f64 {
        self.norm2().sqrt()
    }

    /// `self − other`.
    pub fn sub(&self, other: &[f64]) -> SpatialVector {
        SpatialVector(self.0.iter().zip(other).map(|(a, b)| a - b).collect())
    }

    /// `self + other`.
    pub fn add(&self, other: &[f64]) -> SpatialVector {
        SpatialVector(self.0.iter().zip(other).map(|(a, b)| a + b).collect())
    }

    /// `s · self`.
    pub fn scale(&self, s: f64) -> SpatialVector {
        SpatialVector(self.0.iter().map(|a| s * a).collect())
    }
}

impl Deref for SpatialVector {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl DerefMut for SpatialVector {
    fn deref_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }
}

impl From<Vec<f64>> for SpatialVector {
    fn from(v: Vec<f64>) -> Self {
        SpatialVector(v)
    }
}

impl From<&[f64]> for SpatialVector {
    fn from(v: &[f64]) -> Self {
        SpatialVector(v.to_vec())
    }
}

impl<const N: usize> From<[f64; N]> for SpatialVector {
    fn from(v: [f64; N]) -> Self {
        SpatialVector(v.to_vec())
    }
}

/// A point `(ω1, ω2)` of the unit sphere of `R^{2d}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImpactPair {
    omega1: SpatialVector,
    omega2: SpatialVector,
}

impl ImpactPair {
    /// Build an impact pair, renormalizing inputs whose sphere residual
    /// exceeds [`SPHERE_TOLERANCE`].
    ///
    /// Fails if the blocks differ in dimension, if `d < 2`, or if
    /// `|ω1|² + |ω2|² <` [`MIN_PAIR_NORM2`] (no usable direction).
    pub fn new(omega1: impl Into<SpatialVector>, omega2: impl Into<SpatialVector>) -> Result<Self> {
        let mut omega1 = omega1.into();
        let mut omega2 = omega2.into();
        check_dim(omega1.dim(), omega2.dim())?;
        if omega1.dim() < 2 {
            return Err(Error::Usage(format!(
                "impact pairs need dimension d >= 2, got {}",
                omega1.dim()
            )));
        }
        let r2 = omega1.norm2() + omega2.norm2();
        if !r2.is_finite() || r2 < MIN_PAIR_NORM2 {
            return Err(Error::Domain(format!(
                "impact pair norm^2 {r2:e} is too small to define a direction"
            )));
        }
        if (r2 - 1.0).abs() > SPHERE_TOLERANCE {
            let s = 1.0 / r2.sqrt();
            omega1.iter_mut().chain(omega2.iter_mut()).for_each(|x| *x *= s);
        }
        Ok(ImpactPair { omega1, omega2 })
    }

    /// Build an impact pair from a single `2d`-vector `(ω1, ω2)`.
    pub fn from_flat(flat: &[f64]) -> Result<Self> {
        if flat.len() % 2 != 0 {
            return Err(Error::Usage(format!(
                "flat impact pair needs even length, got {}",
                flat.len()
            )));
        }
        let d = flat.len() / 2;
        ImpactPair::new(flat[..d].to_vec(), flat[d..].to_vec())
    }

    /// Draw an impact pair from the uniform surface measure of the sphere.
    pub fn sample_uniform<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Self {
        let w = uniform_sphere(rng, 2 * d);
        ImpactPair {
            omega1: SpatialVector(w[..d].to_vec()),
            omega2: SpatialVector(w[d..].to_vec()),
        }
    }

    /// First block `ω1`.
    pub fn omega1(&self) -> &SpatialVector {
        &self.omega1
    }

    /// Second block `ω2`.
    pub fn omega2(&self) -> &SpatialVector {
        &self.omega2
    }

    /// Spatial dimension `d` (each block has `d` components).
    pub fn dim(&self) -> usize {
        self.omega1.dim()
    }

    /// `⟨ω1, ω2⟩`; for pairs on the sphere `1 + ⟨ω1, ω2⟩ ∈ [1/2, 3/2]`.
    pub fn inner(&self) -> f64 {
        self.omega1.dot(&self.omega2)
    }

    /// `| |ω1|² + |ω2|² − 1 |`.
    pub fn sphere_residual(&self) -> f64 {
        (self.omega1.norm2() + self.omega2.norm2() - 1.0).abs()
    }

    /// The antipodal pair `(−ω1, −ω2)`, which induces the same collision.
    pub fn negated(&self) -> Self {
        ImpactPair {
            omega1: self.omega1.scale(-1.0),
            omega2: self.omega2.scale(-1.0),
        }
    }

    /// Concatenation `(ω1, ω2)` as a `2d`-vector.
    pub fn to_flat(&self) -> Vec<f64> {
        let mut v = self.omega1.0.clone();
        v.extend_from_slice(&self.omega2);
        v
    }
}

/// Three velocities taking part in a ternary collision.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VelocityTriple {
    /// Velocity of the central particle.
    pub v1: SpatialVector,
    /// Velocity of the first partner.
    pub v2: SpatialVector,
    /// Velocity of the second partner.
    pub v3: SpatialVector,
}

impl VelocityTriple {
    /// Build a triple, checking that the dimensions agree.
    pub fn new(
        v1: impl Into<SpatialVector>,
        v2: impl Into<SpatialVector>,
        v3: impl Into<SpatialVector>,
    ) -> Result<Self> {
        let (v1, v2, v3) = (v1.into(), v2.into(), v3.into());
        check_dim(v1.dim(), v2.dim())?;
        check_dim(v1.dim(), v3.dim())?;
        Ok(VelocityTriple { v1, v2, v3 })
    }

    /// Draw a triple with independent standard normal components.
    pub fn sample_normal<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Self {
        let mut buf = vec![0.0; 3 * d];
        fill_normal(rng, &mut buf);
        VelocityTriple {
            v1: SpatialVector(buf[..d].to_vec()),
            v2: SpatialVector(buf[d..2 * d].to_vec()),
            v3: SpatialVector(buf[2 * d..].to_vec()),
        }
    }

    /// Shared dimension.
    pub fn dim(&self) -> usize {
        self.v1.dim()
    }

    /// `v1 + v2 + v3`.
    pub fn momentum(&self) -> SpatialVector {
        self.v1.add(&self.v2).add(&self.v3)
    }

    /// `|v1|² + |v2|² + |v3|²` (twice the kinetic energy).
    pub fn energy2(&self) -> f64 {
        self.v1.norm2() + self.v2.norm2() + self.v3.norm2()
    }

    /// `|v1 − v2|² + |v1 − v3|² + |v2 − v3|²`.
    pub fn relative_magnitude2(&self) -> f64 {
        self.v1.sub(&self.v2).norm2() + self.v1.sub(&self.v3).norm2() + self.v2.sub(&self.v3).norm2()
    }

    /// Relative velocities `(v2 − v1, v3 − v1)`.
    pub fn relatives(&self) -> (SpatialVector, SpatialVector) {
        (self.v2.sub(&self.v1), self.v3.sub(&self.v1))
    }

    /// Maximum componentwise distance to another triple.
    pub fn max_abs_diff(&self, other: &VelocityTriple) -> f64 {
        [(&self.v1, &other.v1), (&self.v2, &other.v2), (&self.v3, &other.v3)]
            .iter()
            .flat_map(|(a, b)| a.iter().zip(b.iter()).map(|(x, y)| (x - y).abs()))
            .fold(0.0, f64::max)
    }
}

/// Classification of a contact by the sign of the cross-section.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CollisionClass {
    /// `b < 0`: the particles approach and a collision takes place.
    PreCollisional,
    /// `b > 0`: the particles separate.
    PostCollisional,
    /// `b = 0`.
    Grazing,
}

impl CollisionClass {
    /// Class of a given cross-section value (exact sign test).
    pub fn from_b(b: f64) -> Self {
        if b < 0.0 {
            CollisionClass::PreCollisional
        } else if b > 0.0 {
            CollisionClass::PostCollisional
        } else {
            CollisionClass::Grazing
        }
    }

    /// The class obtained after the collisional transformation.
    pub fn opposite(self) -> Self {
        match self {
            CollisionClass::PreCollisional => CollisionClass::PostCollisional,
            CollisionClass::PostCollisional => CollisionClass::PreCollisional,
            CollisionClass::Grazing => CollisionClass::Grazing,
        }
    }

    /// Short lowercase label used in CSV output.
    pub fn label(self) -> &'static str {
        match self {
            CollisionClass::PreCollisional => "pre",
            CollisionClass::PostCollisional => "post",
            CollisionClass::Grazing => "grazing",
        }
    }
}

/// `⟨ω1, ν1⟩ + ⟨ω2, ν2⟩` on raw slices.
#[inline]
pub fn cross_section_raw(w1: &[f64], w2: &[f64], nu1: &[f64], nu2: &[f64]) -> f64 {
    dot(w1, nu1) + dot(w2, nu2)
}

/// The collision factor `c` on raw slices.
#[inline]
pub fn c_factor_raw(w1: &[f64], w2: &[f64], v1: &[f64], v2: &[f64], v3: &[f64]) -> f64 {
    let mut num = 0.0;
    let mut pi = 0.0;
    for a in 0..v1.len() {
        num += w1[a] * (v2[a] - v1[a]) + w2[a] * (v3[a] - v1[a]);
        pi += w1[a] * w2[a];
    }
    num / (1.0 + pi)
}

/// Apply the collisional transformation in place and return the factor `c`.
#[inline]
pub fn collide_in_place(w1: &[f64], w2: &[f64], v1: &mut [f64], v2: &mut [f64], v3: &mut [f64]) -> f64 {
    let c = c_factor_raw(w1, w2, v1, v2, v3);
    for a in 0..v1.len() {
        v1[a] += c * (w1[a] + w2[a]);
        v2[a] -= c * w1[a];
        v3[a] -= c * w2[a];
    }
    c
}

/// The cross-section `b(ω, ν1, ν2) = ⟨ω1, ν1⟩ + ⟨ω2, ν2⟩`.
pub fn cross_section_b(pair: &ImpactPair, nu1: &[f64], nu2: &[f64]) -> Result<f64> {
    check_dim(pair.dim(), nu1.len())?;
    check_dim(pair.dim(), nu2.len())?;
    Ok(cross_section_raw(&pair.omega1, &pair.omega2, nu1, nu2))
}

/// The collision factor `c = b(ω, v2 − v1, v3 − v1) / (1 + ⟨ω1, ω2⟩)`.
pub fn c_factor(pair: &ImpactPair, v: &VelocityTriple) -> Result<f64> {
    check_dim(pair.dim(), v.dim())?;
    Ok(c_factor_raw(&pair.omega1, &pair.omega2, &v.v1, &v.v2, &v.v3))
}

/// The collisional transformation `T_ω`.
pub fn collide(pair: &ImpactPair, v: &VelocityTriple) -> Result<VelocityTriple> {
    check_dim(pair.dim(), v.dim())?;
    let mut out = v.clone();
    collide_in_place(&pair.omega1, &pair.omega2, &mut out.v1, &mut out.v2, &mut out.v3);
    Ok(out)
}

/// Classify a contact by the exact sign of `b(ω, v2 − v1, v3 − v1)`.
pub fn classify(pair: &ImpactPair, v: &VelocityTriple) -> Result<CollisionClass> {
    let (n1, n2) = v.relatives();
    Ok(CollisionClass::from_b(cross_section_b(pair, &n1, &n2)?))
}

/// Whether `vprime` has the same total momentum (componentwise, within
/// `tol`) and the same `Σ|v|²` (within `tol`) as `v`.
pub fn is_conservation_solution(v: &VelocityTriple, vprime: &VelocityTriple, tol: f64) -> Result<bool> {
    if !(tol > 0.0) {
        return Err(Error::Usage(format!("tolerance must be positive, got {tol}")));
    }
    check_dim(v.dim(), vprime.dim())?;
    let p = v.momentum();
    let pp = vprime.momentum();
    let momentum_ok = p.iter().zip(pp.iter()).all(|(a, b)| (a - b).abs() <= tol);
    let energy_ok = (v.energy2() - vprime.energy2()).abs() <= tol;
    Ok(momentum_ok && energy_ok)
}

/// Recover an impact pair realizing a given conservation solution.
///
/// For `v' ≠ v` solving the momentum-energy system, the pair is the
/// normalization of `−(v2' − v2, v3' − v3)`; for `v' = v` any pair
/// orthogonal to the relative velocities works and `None` is returned.
pub fn impact_pair_for_solution(v: &VelocityTriple, vprime: &VelocityTriple) -> Result<Option<ImpactPair>> {
    check_dim(v.dim(), vprime.dim())?;
    let mut flat: Vec<f64> = vprime.v2.iter().zip(v.v2.iter()).map(|(a, b)| b - a).collect();
    flat.extend(vprime.v3.iter().zip(v.v3.iter()).map(|(a, b)| b - a));
    let n2 = norm2(&flat);
    let scale = 1.0 + v.energy2();
    if n2 <= 1e-24 * scale {
        return Ok(None);
    }
    let n = n2.sqrt();
    flat.iter_mut().for_each(|x| *x /= n);
    ImpactPair::from_flat(&flat).map(Some)
}

/// Largest violation of `φ(v1*) + φ(v2*) + φ(v3*) = φ(v1) + φ(v2) + φ(v3)`
/// over `n_samples` random collisions in dimension `d`.
///
/// Velocities have independent standard normal components and impact pairs
/// are uniform on the sphere.
pub fn check_collision_invariant<F>(phi: F, d: usize, n_samples: usize, rng_seed: u64) -> Result<f64>
where
    F: Fn(&[f64]) -> f64,
{
    if n_samples == 0 {
        return Err(Error::Usage("n_samples must be positive".into()));
    }
    if d < 2 {
        return Err(Error::Usage(format!("dimension must be >= 2, got {d}")));
    }
    let mut rng = rng_from_seed(rng_seed);
    let mut worst: f64 = 0.0;
    for _ in 0..n_samples {
        let pair = ImpactPair::sample_uniform(d, &mut rng);
        let v = VelocityTriple::sample_normal(d, &mut rng);
        let w = collide(&pair, &v)?;
        let before = phi(&v.v1) + phi(&v.v2) + phi(&v.v3);
        let after = phi(&w.v1) + phi(&w.v2) + phi(&w.v3);
        worst = worst.max((after - before).abs());
    }
    Ok(worst)
}
