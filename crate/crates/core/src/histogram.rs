//! Regular velocity histograms on axis-aligned boxes.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Bin geometry shared by histograms that are to be compared.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramSpec {
    /// Spatial (velocity) dimension.
    pub dim: usize,
    /// Lower corner of the binned box.
    pub lo: Vec<f64>,
    /// Upper corner of the binned box.
    pub hi: Vec<f64>,
    /// Number of bins along every axis.
    pub bins_per_axis: usize,
}

impl HistogramSpec {
    /// The cube `[center − half_width, center + half_width]^d`.
    pub fn centered_cube(dim: usize, center: &[f64], half_width: f64, bins_per_axis: usize) -> Result<Self> {
        if center.len() != dim || !(half_width > 0.0) || bins_per_axis == 0 {
            return Err(Error::Usage(format!(
                "invalid histogram geometry (dim {dim}, half width {half_width}, {bins_per_axis} bins)"
            )));
        }
        Ok(HistogramSpec {
            dim,
            lo: center.iter().map(|c| c - half_width).collect(),
            hi: center.iter().map(|c| c + half_width).collect(),
            bins_per_axis,
        })
    }

    /// Total number of bins.
    pub fn bin_count(&self) -> usize {
        self.bins_per_axis.pow(self.dim as u32)
    }

    /// Width of the bins along `axis`.
    pub fn width(&self, axis: usize) -> f64 {
        (self.hi[axis] - self.lo[axis]) / self.bins_per_axis as f64
    }

    /// Volume of one bin.
    pub fn bin_volume(&self) -> f64 {
        (0..self.dim).map(|a| self.width(a)).product()
    }

    /// Flat bin index of a point, or `None` outside the box.
    #[inline]
    pub fn bin_of(&self, v: &[f64]) -> Option<usize> {
        let mut idx = 0usize;
        for a in 0..self.dim {
            let u = (v[a] - self.lo[a]) / self.width(a);
            if !(u >= 0.0) || u >= self.bins_per_axis as f64 {
                return None;
            }
            idx = idx * self.bins_per_axis + (u as usize).min(self.bins_per_axis - 1);
        }
        Some(idx)
    }

    /// Centre of the bin with flat index `idx`.
    pub fn center(&self, mut idx: usize) -> Vec<f64> {
        let mut c = vec![0.0; self.dim];
        for a in (0..self.dim).rev() {
            let k = idx % self.bins_per_axis;
            idx /= self.bins_per_axis;
            c[a] = self.lo[a] + (k as f64 + 0.5) * self.width(a);
        }
        c
    }
}

/// Weighted counts over a [`HistogramSpec`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarginalHistogram {
    /// Bin geometry.
    pub spec: HistogramSpec,
    /// Weighted count per bin (flat, row-major).
    pub counts: Vec<f64>,
    /// Total weight offered, including samples outside the box.
    pub total_weight: f64,
    /// Weight of samples that fell outside the box.
    pub outside_weight: f64,
}

impl MarginalHistogram {
    /// An empty histogram.
    pub fn empty(spec: HistogramSpec) -> Self {
        let n = spec.bin_count();
        MarginalHistogram {
            spec,
            counts: vec![0.0; n],
            total_weight: 0.0,
            outside_weight: 0.0,
        }
    }

    /// Add one velocity with unit weight.
    #[inline]
    pub fn add(&mut self, v: &[f64]) {
        self.add_weighted(v, 1.0);
    }

    /// Add one velocity with the given weight.
    #[inline]
    pub fn add_weighted(&mut self, v: &[f64], w: f64) {
        self.total_weight += w;
        match self.spec.bin_of(v) {
            Some(b) => self.counts[b] += w,
            None => self.outside_weight += w,
        }
    }

    /// Add every velocity of a flat component array.
    pub fn add_all(&mut self, flat: &[f64]) {
        let d = self.spec.dim;
        for v in flat.chunks_exact(d) {
            self.add(v);
        }
    }

    /// Histogram of a flat velocity array.
    pub fn from_velocities(spec: HistogramSpec, flat: &[f64]) -> Self {
        let mut h = MarginalHistogram::empty(spec);
        h.add_all(flat);
        h
    }

    /// Add another histogram with identical geometry (commutative merge).
    pub fn merge(&mut self, other: &MarginalHistogram) -> Result<()> {
        if self.spec != other.spec {
            return Err(Error::Usage("cannot merge histograms with different bin geometry".into()));
        }
        self.counts.iter_mut().zip(&other.counts).for_each(|(a, b)| *a += b);
        self.total_weight += other.total_weight;
        self.outside_weight += other.outside_weight;
        Ok(())
    }

    /// Bin masses normalized by the total weight (including outside mass).
    pub fn normalized(&self) -> Vec<f64> {
        if self.total_weight <= 0.0 {
            return vec![0.0; self.counts.len()];
        }
        self.counts.iter().map(|c| c / self.total_weight).collect()
    }
}

/// `Σ |p_a − p_b|` over bins plus the difference of outside masses, for
/// normalized masses; lies in `[0, 2]`.
pub fn l1_distance(a: &MarginalHistogram, b: &MarginalHistogram) -> Result<f64> {
    if a.spec != b.spec {
        return Err(Error::Usage("l1_distance needs identical bin geometry".into()));
    }
    let pa = a.normalized();
    let pb = b.normalized();
    let inside: f64 = pa.iter().zip(&pb).map(|(x, y)| (x - y).abs()).sum();
    let oa = if a.total_weight > 0.0 { a.outside_weight / a.total_weight } else { 0.0 };
    let ob = if b.total_weight > 0.0 { b.outside_weight / b.total_weight } else { 0.0 };
    Ok(inside + (oa - ob).abs())
}

/// `Σ_b p_b φ(centre_b)` with normalized bin masses.
pub fn observable<F: Fn(&[f64]) -> f64>(h: &MarginalHistogram, phi: F) -> f64 {
    h.normalized()
        .iter()
        .enumerate()
        .filter(|(_, p)| **p != 0.0)
        .map(|(i, p)| p * phi(&h.spec.center(i)))
        .sum()
}
