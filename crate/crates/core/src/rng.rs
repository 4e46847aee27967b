//! Deterministic random-number plumbing.
//!
//! Every stochastic routine takes an explicit `u64` seed and builds its own
//! [`SimRng`]; derived seeds for sub-runs are obtained by hashing the master
//! seed together with the run coordinates, so results never depend on
//! scheduling order.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;
use sha2::{Digest, Sha256};

/// The generator used throughout the crate.
pub type SimRng = ChaCha12Rng;

/// Build a generator from a seed.
pub fn rng_from_seed(seed: u64) -> SimRng {
    SimRng::seed_from_u64(seed)
}

/// Derive a child seed from a master seed and a list of coordinates
/// (for example `(N, run index)`), via SHA-256.
pub fn derive_seed(master: u64, coords: &[u64]) -> u64 {
    let mut h = Sha256::new();
    h.update(master.to_le_bytes());
    for c in coords {
        h.update(c.to_le_bytes());
    }
    let out = h.finalize();
    let mut b = [0u8; 8];
    b.copy_from_slice(&out[..8]);
    u64::from_le_bytes(b)
}

/// Fill `out` with independent standard normal variates.
pub fn fill_normal<R: Rng + ?Sized>(rng: &mut R, out: &mut [f64]) {
    for x in out.iter_mut() {
        *x = rng.sample(StandardNormal);
    }
}

/// A point drawn uniformly from the unit sphere of `R^n` (normalized
/// Gaussian vector).
pub fn uniform_sphere<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    let mut v = vec![0.0; n];
    loop {
        fill_normal(rng, &mut v);
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-300 {
            v.iter_mut().for_each(|x| *x /= norm);
            return v;
        }
    }
}

/// Overwrite `out` with a point drawn uniformly from the unit sphere of
/// `R^{out.len()}`, without allocating.
pub fn uniform_sphere_into<R: Rng + ?Sized>(rng: &mut R, out: &mut [f64]) {
    loop {
        fill_normal(rng, out);
        let norm = out.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-300 {
            out.iter_mut().for_each(|x| *x /= norm);
            return;
        }
    }
}
