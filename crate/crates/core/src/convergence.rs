//! Particle-to-kinetic convergence study.
//!
//! For each particle number `N` the study runs `M` independent particle
//! simulations in a periodic box with `ε = c0 N^{−2/(2d−1)}`, pools the
//! one-particle velocity marginal at each checkpoint and compares it in L1
//! with a large DSMC reference solution of the kinetic equation, using the
//! flux kernel and the collision-frequency scale matched to the particle
//! system.  The L1 distance of two finite samples never vanishes, so each
//! distance is reported relative to a sampling floor (the mean distance of
//! a reference resample of the pooled size, inflated for the reference's
//! own noise), with a normal-approximation bootstrap interval over runs.
//! (The L1 distance is biased upward under resampling, so percentile-type
//! intervals are shifted away from the estimate; the bootstrap is used only
//! for its spread.)

use crate::dynamics::{
    advance_in_place, epsilon_for_scaling, sample_initial_with_stats, DynamicsOptions, SamplingBox, Scheduler,
    SimulationState,
};
use crate::error::{Error, Result};
use crate::histogram::{l1_distance, HistogramSpec, MarginalHistogram};
use crate::kinetic::{matched_rate_const, CollisionKernel, DsmcSolver, VelocityEnsemble, VelocityLaw};
use crate::rng::{derive_seed, rng_from_seed};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Fraction of failed runs above which a study is aborted.
pub const MAX_FAILURE_FRACTION: f64 = 0.10;

/// Relative energy/momentum drift above which a particle run is rejected.
pub const CONSERVATION_TOL: f64 = 1e-9;

/// Parameters of a convergence study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyConfig {
    /// Spatial dimension.
    pub d: usize,
    /// Scaling constant in `ε = c0 N^{−2/(2d−1)}`.
    pub c0: f64,
    /// Particle numbers, increasing.
    pub n_list: Vec<usize>,
    /// Independent runs `M` per particle number.
    pub runs_per_n: usize,
    /// Side of the periodic box.
    pub box_side: f64,
    /// Initial one-particle velocity law.
    pub initial: VelocityLaw,
    /// Checkpoint times, increasing, each `≥ 0`.
    pub checkpoints: Vec<f64>,
    /// DSMC reference size as a multiple of the largest pooled sample.
    pub dsmc_factor: usize,
    /// DSMC time step.
    pub dsmc_dt: f64,
    /// Half width of the histogram cube (centred at the bulk velocity).
    pub hist_half_width: f64,
    /// Histogram bins per axis.
    pub hist_bins: usize,
    /// Bootstrap replicates.
    pub bootstrap: usize,
    /// Master seed.
    pub master_seed: u64,
    /// Event search strategy of the particle runs.
    pub scheduler: Scheduler,
}

impl StudyConfig {
    /// Default study in `d = 2`: a two-temperature mixture relaxing in a
    /// unit periodic box.
    pub fn default_2d() -> Self {
        StudyConfig {
            d: 2,
            c0: 0.3,
            n_list: vec![27, 64, 125, 216],
            runs_per_n: 32,
            box_side: 1.0,
            initial: VelocityLaw::TwoTemperature {
                u: crate::algebra::SpatialVector::zeros(2),
                t1: 0.5,
                t2: 2.0,
            },
            checkpoints: vec![0.0, 1.0, 3.0],
            dsmc_factor: 10,
            dsmc_dt: 0.01,
            hist_half_width: 5.0,
            hist_bins: 16,
            bootstrap: 200,
            master_seed: 20_240_611,
            scheduler: Scheduler::NeighborChunks,
        }
    }

    /// Check the parameters.
    pub fn validate(&self) -> Result<()> {
        if self.initial.dim() != self.d {
            return Err(Error::DimensionMismatch {
                expected: self.d,
                found: self.initial.dim(),
            });
        }
        if self.n_list.is_empty() || self.n_list.iter().any(|&n| n < 3) {
            return Err(Error::Usage("n_list must be non-empty with every N >= 3".into()));
        }
        if self.n_list.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Usage("n_list must be strictly increasing".into()));
        }
        if self.runs_per_n < 2 {
            return Err(Error::Usage("runs_per_n must be at least 2".into()));
        }
        if self.checkpoints.is_empty()
            || self.checkpoints.iter().any(|t| !(*t >= 0.0))
            || self.checkpoints.windows(2).any(|w| w[1] <= w[0])
        {
            return Err(Error::Usage("checkpoints must be non-negative and strictly increasing".into()));
        }
        if self.dsmc_factor < 1 || !(self.dsmc_dt > 0.0) || self.bootstrap < 10 {
            return Err(Error::Usage(
                "dsmc_factor >= 1, dsmc_dt > 0 and bootstrap >= 10 are required".into(),
            ));
        }
        if !(self.c0 > 0.0) || !(self.box_side > 0.0) || !(self.hist_half_width > 0.0) || self.hist_bins == 0 {
            return Err(Error::Usage("c0, box_side, hist_half_width and hist_bins must be positive".into()));
        }
        Ok(())
    }

    /// Histogram layout shared by every ensemble of the study.
    pub fn histogram_spec(&self) -> Result<HistogramSpec> {
        HistogramSpec::centered_cube(self.d, self.initial.bulk_velocity(), self.hist_half_width, self.hist_bins)
    }

    /// Pooled sample size `M · N` for particle number `n`.
    pub fn pooled_size(&self, n: usize) -> usize {
        self.runs_per_n * n
    }

    /// Size of the DSMC reference ensemble.
    pub fn reference_size(&self) -> usize {
        self.dsmc_factor * self.pooled_size(*self.n_list.last().expect("validated"))
    }
}

/// Per-run histograms of one particle number at every checkpoint.
#[derive(Debug, Clone)]
pub struct EnsembleRuns {
    /// Particle number.
    pub n: usize,
    /// Interaction-zone scale used.
    pub eps: f64,
    /// `per_run[c][r]`: histogram of run `r` at checkpoint `c`.
    pub per_run: Vec<Vec<MarginalHistogram>>,
    /// Runs dropped (dynamics error or conservation drift).
    pub failures: usize,
    /// Total collisions over the kept runs.
    pub collisions: u64,
}

impl EnsembleRuns {
    /// Pooled histogram at checkpoint `c`.
    pub fn pooled(&self, c: usize) -> Result<MarginalHistogram> {
        pool(&self.per_run[c])
    }
}

fn pool(hs: &[MarginalHistogram]) -> Result<MarginalHistogram> {
    let mut it = hs.iter();
    let mut acc = it
        .next()
        .cloned()
        .ok_or_else(|| Error::Internal("no histograms to pool".into()))?;
    for h in it {
        acc.merge(h)?;
    }
    Ok(acc)
}

fn relative_drift(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(1e-300)
}

fn one_run(cfg: &StudyConfig, spec: &HistogramSpec, n: usize, eps: f64, r: usize) -> Result<(Vec<MarginalHistogram>, u64)> {
    let seed = derive_seed(cfg.master_seed, &[n as u64, r as u64]);
    let region = SamplingBox {
        side: cfg.box_side,
        periodic: true,
    };
    let (z, _) = sample_initial_with_stats(n, eps, &cfg.initial, region, false, seed)?;
    let options = DynamicsOptions {
        scheduler: cfg.scheduler,
        record_events: false,
        ..DynamicsOptions::default()
    };
    let mut state = SimulationState::new(z, eps, region.boundary())?.with_options(options);
    let e0 = state.config.kinetic_energy();
    let p0 = state.config.momentum();
    let scale = (2.0 * e0 / n as f64).sqrt() * n as f64;
    let mut out = Vec::with_capacity(cfg.checkpoints.len());
    for &t in &cfg.checkpoints {
        let dt = t - state.time;
        advance_in_place(&mut state, dt)?;
        let e = state.config.kinetic_energy();
        let p = state.config.momentum();
        let dp = p.iter().zip(&p0).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max) / scale.max(1e-300);
        if relative_drift(e0, e) > CONSERVATION_TOL || dp > CONSERVATION_TOL {
            return Err(Error::Internal(format!(
                "conservation drift in run {r} (N = {n}): energy {:.3e}, momentum {dp:.3e}",
                relative_drift(e0, e)
            )));
        }
        out.push(MarginalHistogram::from_velocities(spec.clone(), state.config.velocities()));
    }
    Ok((out, state.event_count))
}

/// Run the `M` particle simulations for particle number `n`.
///
/// Runs are independent and seeded by `(master, N, r)`, so results do not
/// depend on the thread count.  Failed runs are dropped and counted; more
/// than 10% failures abort with an error.
pub fn run_ensemble_detailed(cfg: &StudyConfig, n: usize) -> Result<EnsembleRuns> {
    cfg.validate()?;
    let spec = cfg.histogram_spec()?;
    let eps = epsilon_for_scaling(n, cfg.c0, cfg.d)?;
    let results: Vec<Result<(Vec<MarginalHistogram>, u64)>> = (0..cfg.runs_per_n)
        .into_par_iter()
        .map(|r| one_run(cfg, &spec, n, eps, r))
        .collect();
    let mut per_run: Vec<Vec<MarginalHistogram>> = vec![Vec::new(); cfg.checkpoints.len()];
    let mut failures = 0;
    let mut collisions = 0;
    let mut first_error = None;
    for res in results {
        match res {
            Ok((hs, events)) => {
                collisions += events;
                for (c, h) in hs.into_iter().enumerate() {
                    per_run[c].push(h);
                }
            }
            Err(e) => {
                failures += 1;
                first_error.get_or_insert(e);
            }
        }
    }
    if failures as f64 > MAX_FAILURE_FRACTION * cfg.runs_per_n as f64 || per_run[0].is_empty() {
        return Err(Error::Domain(format!(
            "{failures} of {} runs failed for N = {n}; first failure: {}",
            cfg.runs_per_n,
            first_error.map(|e| e.to_string()).unwrap_or_default()
        )));
    }
    Ok(EnsembleRuns {
        n,
        eps,
        per_run,
        failures,
        collisions,
    })
}

/// Pooled one-particle histogram of the `M` runs at the last checkpoint.
pub fn run_ensemble(cfg: &StudyConfig, n: usize) -> Result<MarginalHistogram> {
    let runs = run_ensemble_detailed(cfg, n)?;
    runs.pooled(cfg.checkpoints.len() - 1)
}

/// DSMC reference ensembles at every checkpoint.
#[derive(Debug, Clone)]
pub struct Reference {
    /// Reference ensembles, one per checkpoint.
    pub ensembles: Vec<VelocityEnsemble>,
    /// Their histograms.
    pub histograms: Vec<MarginalHistogram>,
    /// Collision-frequency scale used.
    pub rate_const: f64,
}

/// Solve the kinetic equation by DSMC from the study's initial law.
pub fn dsmc_reference(cfg: &StudyConfig) -> Result<Reference> {
    cfg.validate()?;
    let spec = cfg.histogram_spec()?;
    let n_ref = cfg.reference_size();
    let d = cfg.d;
    let mut rng = rng_from_seed(derive_seed(cfg.master_seed, &[0xD5_4C, n_ref as u64]));
    let mut samples = vec![0.0; n_ref * d];
    for v in samples.chunks_exact_mut(d) {
        cfg.initial.sample_into(&mut rng, v);
    }
    let ens = VelocityEnsemble::from_flat(d, samples, 1.0)?;
    let rate_const = matched_rate_const(d, cfg.c0, cfg.box_side);
    let mut solver = DsmcSolver::new(
        ens,
        rate_const,
        CollisionKernel::Flux,
        derive_seed(cfg.master_seed, &[0xD5_4C, 1]),
    );
    let mut ensembles = Vec::with_capacity(cfg.checkpoints.len());
    let mut histograms = Vec::with_capacity(cfg.checkpoints.len());
    for &t in &cfg.checkpoints {
        solver.run_until(t, cfg.dsmc_dt)?;
        histograms.push(MarginalHistogram::from_velocities(spec.clone(), solver.ensemble.samples()));
        ensembles.push(solver.ensemble.clone());
    }
    Ok(Reference {
        ensembles,
        histograms,
        rate_const,
    })
}

/// One line of the study table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StudyRow {
    /// Checkpoint time.
    pub t_end: f64,
    /// Particle number.
    pub n: usize,
    /// Interaction-zone scale.
    pub eps: f64,
    /// Raw L1 distance between pooled particle and reference histograms.
    pub raw_distance: f64,
    /// Sampling floor: mean L1 distance of a reference resample of size
    /// `M·N`, scaled by `sqrt(1 + M·N / n_ref)`.
    pub floor: f64,
    /// 97.5% quantile of the (scaled) resample distances.
    pub floor_q975: f64,
    /// Floor-corrected distance `raw − floor`.
    pub distance: f64,
    /// Lower end of the 95% interval (corrected distance ∓ 1.96 bootstrap
    /// standard deviations over runs).
    pub ci_lo: f64,
    /// Upper end of the 95% interval.
    pub ci_hi: f64,
    /// Runs dropped.
    pub failures: usize,
    /// Collisions per run, averaged.
    pub collisions_per_run: f64,
}

/// Verdicts of a study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyVerdicts {
    /// Per positive checkpoint: corrected distances non-increasing in `N` up
    /// to overlapping intervals.
    pub monotone: Vec<(f64, bool)>,
    /// At `t = 0` (if present): every raw distance within the sampling
    /// floor's 97.5% quantile.
    pub initial_within_floor: Option<bool>,
}

/// Full result of [`convergence_study`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyResult {
    /// One row per (checkpoint, N), checkpoint-major.
    pub rows: Vec<StudyRow>,
    /// Verdicts.
    pub verdicts: StudyVerdicts,
    /// Reference size.
    pub reference_size: usize,
    /// DSMC collision-frequency scale.
    pub rate_const: f64,
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

fn std_dev(v: &[f64]) -> f64 {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0)).sqrt()
}

fn sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(|a, b| a.partial_cmp(b).expect("finite distances"));
    v
}

/// Distances of `replicates` resamples of size `size` (with replacement)
/// from the reference ensemble to the reference histogram.
pub fn sampling_floor(
    reference: &VelocityEnsemble,
    reference_hist: &MarginalHistogram,
    size: usize,
    replicates: usize,
    rng_seed: u64,
) -> Result<Vec<f64>> {
    let d = reference.dim();
    let n_ref = reference.len();
    (0..replicates)
        .into_par_iter()
        .map(|b| {
            let mut rng = rng_from_seed(derive_seed(rng_seed, &[b as u64]));
            let mut h = MarginalHistogram::empty(reference_hist.spec.clone());
            for _ in 0..size {
                let i = rng.random_range(0..n_ref);
                h.add(&reference.samples()[i * d..(i + 1) * d]);
            }
            l1_distance(&h, reference_hist)
        })
        .collect()
}

/// Bootstrap distances: resample the `M` runs with replacement and compare
/// the pooled histogram to the reference.
pub fn bootstrap_over_runs(
    runs: &[MarginalHistogram],
    reference_hist: &MarginalHistogram,
    replicates: usize,
    rng_seed: u64,
) -> Result<Vec<f64>> {
    let m = runs.len();
    (0..replicates)
        .into_par_iter()
        .map(|b| {
            let mut rng = rng_from_seed(derive_seed(rng_seed, &[b as u64]));
            let mut h = MarginalHistogram::empty(reference_hist.spec.clone());
            for _ in 0..m {
                h.merge(&runs[rng.random_range(0..m)])?;
            }
            l1_distance(&h, reference_hist)
        })
        .collect()
}

/// Run the whole study.
pub fn convergence_study(cfg: &StudyConfig) -> Result<StudyResult> {
    cfg.validate()?;
    let reference = dsmc_reference(cfg)?;
    let mut ensembles = Vec::with_capacity(cfg.n_list.len());
    for &n in &cfg.n_list {
        ensembles.push(run_ensemble_detailed(cfg, n)?);
    }
    let mut rows = Vec::new();
    let mut verdicts = StudyVerdicts {
        monotone: Vec::new(),
        initial_within_floor: None,
    };
    for (c, &t) in cfg.checkpoints.iter().enumerate() {
        let href = &reference.histograms[c];
        let mut block = Vec::with_capacity(ensembles.len());
        for ens in &ensembles {
            let n = ens.n;
            let kept = ens.per_run[c].len();
            let pooled = ens.pooled(c)?;
            let raw = l1_distance(&pooled, href)?;
            let floor_seed = derive_seed(cfg.master_seed, &[0xF1_00, n as u64, c as u64]);
            // Resamples share the reference's own noise; an independent
            // sample of size m differs from it by about sqrt(1 + m/n_ref)
            // times more.
            let m = kept * n;
            let inflate = (1.0 + m as f64 / reference.ensembles[c].len() as f64).sqrt();
            let null = sorted(
                sampling_floor(&reference.ensembles[c], href, m, cfg.bootstrap, floor_seed)?
                    .into_iter()
                    .map(|x| x * inflate)
                    .collect(),
            );
            let floor = null.iter().sum::<f64>() / null.len() as f64;
            let boot_seed = derive_seed(cfg.master_seed, &[0xB0_07, n as u64, c as u64]);
            let boot = bootstrap_over_runs(&ens.per_run[c], href, cfg.bootstrap, boot_seed)?;
            let se = std_dev(&boot);
            block.push(StudyRow {
                t_end: t,
                n,
                eps: ens.eps,
                raw_distance: raw,
                floor,
                floor_q975: quantile(&null, 0.975),
                distance: raw - floor,
                ci_lo: raw - floor - 1.96 * se,
                ci_hi: raw - floor + 1.96 * se,
                failures: ens.failures,
                collisions_per_run: ens.collisions as f64 / kept as f64,
            });
        }
        if t == 0.0 {
            verdicts.initial_within_floor = Some(block.iter().all(|r| r.raw_distance <= r.floor_q975));
        } else {
            verdicts.monotone.push((t, monotone_verdict(&block)));
        }
        rows.extend(block);
    }
    Ok(StudyResult {
        rows,
        verdicts,
        reference_size: cfg.reference_size(),
        rate_const: reference.rate_const,
    })
}

/// Whether consecutive corrected distances are non-increasing, treating
/// overlapping intervals as ties.
pub fn monotone_verdict(rows: &[StudyRow]) -> bool {
    rows.windows(2)
        .all(|w| w[1].distance <= w[0].distance || w[1].ci_lo <= w[0].ci_hi)
}
