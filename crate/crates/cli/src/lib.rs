//! Command-line front end: argument parsing, run orchestration and output.
//!
//! [`run_command`] maps errors to exit codes: `0` success, `1` domain or
//! runtime failure, `2` usage error (bad flag, bad configuration).

use clap::{Args, Parser, Subcommand};
use serde_json::json;
use std::path::{Path, PathBuf};
use ternary_kinetics::algebra::SpatialVector;
use ternary_kinetics::convergence::{convergence_study, StudyConfig};
use ternary_kinetics::dynamics::{
    advance_in_place, epsilon_for_scaling, sample_initial_with_stats, DynamicsOptions, SamplingBox, Scheduler,
    SimulationState,
};
use ternary_kinetics::error::{Error, ErrorKind, Result};
use ternary_kinetics::geometry::{mc_ellipsoid_cap_fractions, mc_sphere_cylinder_fractions, loglog_slope, RegionFamily};
use ternary_kinetics::histogram::{HistogramSpec, MarginalHistogram};
use ternary_kinetics::io::{
    diagnostics_csv, emit_outputs, events_csv, histogram_csv, measure_csv, study_csv, timestamp, trajectory_csv,
    verify_manifest, DiagnosticsRow, MeasureRow, RunConfig, RunManifest,
};
use ternary_kinetics::kinetic::{
    entropy, excess_kurtosis, matched_rate_const, moments, CollisionKernel, DsmcSolver, MaxwellianParams,
    VelocityEnsemble, VelocityLaw,
};
use ternary_kinetics::pseudo::{bbgky_pseudo_trajectory, boltzmann_pseudo_trajectory, proximity_check, PseudoTrajectorySpec, TrajectorySnapshot};
use ternary_kinetics::rng::{derive_seed, fill_normal, rng_from_seed};
use ternary_kinetics::verify::{run_suite, SuiteLevel};
use ternary_kinetics::Configuration;

/// Environment variable overriding the worker-thread count.
pub const THREADS_ENV: &str = "TK_THREADS";

#[derive(Debug, Parser)]
#[command(name = "tk", version, about = "Ternary hard-sphere kinetics toolkit")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// Master seed (overrides the `seed` configuration key).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Run on a single worker thread.
    #[arg(long, global = true)]
    deterministic: bool,
    /// Configuration file (`key = value` lines).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = "tk-out")]
    out: PathBuf,
    /// Override a configuration key, e.g. `--set t_end=2`; repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Event-driven simulation of the interaction-zone particle system.
    SimulateParticles,
    /// DSMC solution of the space-homogeneous ternary kinetic equation.
    SolveKinetic,
    /// Particle-to-kinetic convergence study.
    ConvergenceStudy,
    /// Boltzmann and BBGKY pseudo-trajectories from a random history.
    PseudoTrajectory,
    /// Monte Carlo small-measure estimates on the sphere and the ellipsoid.
    MeasureEstimates,
    /// Run the property suite, or check a manifest's digests.
    Verify {
        /// Reduced sample sizes and no convergence study.
        #[arg(long)]
        quick: bool,
        /// Check the digests recorded in this manifest instead.
        #[arg(long)]
        manifest: Option<PathBuf>,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::SimulateParticles => "simulate-particles",
            Command::SolveKinetic => "solve-kinetic",
            Command::ConvergenceStudy => "convergence-study",
            Command::PseudoTrajectory => "pseudo-trajectory",
            Command::MeasureEstimates => "measure-estimates",
            Command::Verify { .. } => "verify",
        }
    }
}

/// Result of a subcommand: files to write plus a JSON summary and whether
/// the run's own verdict was positive.
struct Outcome {
    files: Vec<(String, Vec<u8>)>,
    summary: serde_json::Value,
    success: bool,
}

/// Exit code for a library error.
pub fn exit_code(err: &Error) -> i32 {
    match err.kind() {
        ErrorKind::Usage => 2,
        ErrorKind::Domain | ErrorKind::Internal | ErrorKind::Io => 1,
    }
}

/// Parse `argv` (including the program name), run, and return the exit code.
pub fn run_command<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(cli) {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn thread_count(deterministic: bool) -> Result<usize> {
    if deterministic {
        return Ok(1);
    }
    match std::env::var(THREADS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Ok(n),
            _ => Err(Error::Usage(format!("{THREADS_ENV} must be a positive integer, got `{v}`"))),
        },
        Err(_) => Ok(std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)),
    }
}

fn resolve_config(common: &Common) -> Result<RunConfig> {
    let mut cfg = match &common.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    for o in &common.overrides {
        cfg.set(o)?;
    }
    if let Some(seed) = common.seed {
        cfg.set(&format!("seed={seed}"))?;
    }
    Ok(cfg)
}

fn run(cli: Cli) -> Result<bool> {
    if let Command::Verify {
        manifest: Some(path), ..
    } = &cli.command
    {
        return check_manifest(path);
    }
    let cfg = resolve_config(&cli.common)?;
    let threads = thread_count(cli.common.deterministic)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Internal(format!("cannot build thread pool: {e}")))?;
    let started_at = timestamp();
    let outcome = pool.install(|| match &cli.command {
        Command::SimulateParticles => simulate_particles(&cfg),
        Command::SolveKinetic => solve_kinetic(&cfg),
        Command::ConvergenceStudy => study(&cfg),
        Command::PseudoTrajectory => pseudo(&cfg),
        Command::MeasureEstimates => measure(&cfg),
        Command::Verify { quick, .. } => verify(&cfg, *quick),
    })?;
    let manifest = RunManifest {
        command: cli.command.name().to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        seed: cfg.int("seed"),
        deterministic: cli.common.deterministic,
        threads,
        config: cfg.to_json(),
        started_at,
        finished_at: timestamp(),
        outputs: Vec::new(),
        summary: outcome.summary,
    };
    let manifest = emit_outputs(&cli.common.out, &outcome.files, manifest)?;
    println!(
        "{}: wrote {} file(s) and manifest to {}",
        manifest.command,
        manifest.outputs.len(),
        cli.common.out.display()
    );
    Ok(outcome.success)
}

fn check_manifest(path: &Path) -> Result<bool> {
    let checks = verify_manifest(path)?;
    let mut ok = true;
    for c in &checks {
        if c.ok {
            println!("OK   {}", c.file);
        } else {
            ok = false;
            println!("FAIL {}: {}", c.file, c.detail);
        }
    }
    Ok(ok)
}

fn velocity_law(cfg: &RunConfig) -> Result<VelocityLaw> {
    let d = cfg.usize("d");
    match cfg.str("initial") {
        "maxwellian" => Ok(VelocityLaw::Maxwellian(MaxwellianParams::new(
            1.0,
            SpatialVector::zeros(d),
            cfg.float("temperature"),
        )?)),
        "mixture" => {
            let (t1, t2) = (cfg.float("mixture_t1"), cfg.float("mixture_t2"));
            if !(t1 > 0.0) || !(t2 > 0.0) {
                return Err(Error::Usage("mixture temperatures must be positive".into()));
            }
            Ok(VelocityLaw::TwoTemperature {
                u: SpatialVector::zeros(d),
                t1,
                t2,
            })
        }
        other => Err(Error::Usage(format!("unknown initial law `{other}` (expected maxwellian or mixture)"))),
    }
}

fn scheduler(cfg: &RunConfig) -> Result<Scheduler> {
    match cfg.str("scheduler") {
        "chunks" => Ok(Scheduler::NeighborChunks),
        "rescan" => Ok(Scheduler::FullRescan),
        other => Err(Error::Usage(format!("unknown scheduler `{other}` (expected chunks or rescan)"))),
    }
}

fn output_times(t_end: f64, snapshots: usize) -> Result<Vec<f64>> {
    if !(t_end >= 0.0) || snapshots < 2 {
        return Err(Error::Usage("t_end must be >= 0 and snapshots >= 2".into()));
    }
    Ok((0..snapshots).map(|k| t_end * k as f64 / (snapshots - 1) as f64).collect())
}

fn simulate_particles(cfg: &RunConfig) -> Result<Outcome> {
    let d = cfg.usize("d");
    let n = cfg.usize("n_particles");
    let eps = match cfg.float("eps") {
        e if e > 0.0 => e,
        _ => epsilon_for_scaling(n, cfg.float("c0"), d)?,
    };
    let region = SamplingBox {
        side: cfg.float("box_side"),
        periodic: match cfg.str("boundary") {
            "periodic" => true,
            "free" => false,
            other => return Err(Error::Usage(format!("unknown boundary `{other}` (expected periodic or free)"))),
        },
    };
    let law = velocity_law(cfg)?;
    let symmetric = cfg.bool("symmetric");
    let (z, attempts) = sample_initial_with_stats(n, eps, &law, region, symmetric, derive_seed(cfg.int("seed"), &[1]))?;
    let options = DynamicsOptions {
        symmetric,
        grazing_tol: cfg.float("grazing_tol"),
        max_events: cfg.int("max_events"),
        scheduler: scheduler(cfg)?,
        record_events: cfg.bool("record_events"),
    };
    let mut state = SimulationState::new(z, eps, region.boundary())?.with_options(options);
    let e0 = state.config.kinetic_energy();
    let mut snaps = Vec::new();
    let mut diag = Vec::new();
    for t in output_times(cfg.float("t_end"), cfg.usize("snapshots"))? {
        let dt = t - state.time;
        advance_in_place(&mut state, dt)?;
        let ens = VelocityEnsemble::from_flat(d, state.config.velocities().to_vec(), 1.0)?;
        diag.push(DiagnosticsRow {
            t,
            mass: n as f64,
            momentum: state.config.momentum(),
            energy: state.config.kinetic_energy(),
            entropy: f64::NAN,
            entropy_std_error: f64::NAN,
            kurtosis: excess_kurtosis(&ens),
            collisions: state.event_count,
        });
        snaps.push((t, state.config.clone()));
    }
    let mut files = vec![
        ("trajectory.csv".to_string(), trajectory_csv(&snaps).into_bytes()),
        ("diagnostics.csv".to_string(), diagnostics_csv(&diag).into_bytes()),
    ];
    if options.record_events {
        files.push(("events.csv".to_string(), events_csv(&state.event_log).into_bytes()));
    }
    let drift = (state.config.kinetic_energy() - e0).abs() / e0;
    Ok(Outcome {
        files,
        summary: json!({
            "eps": eps,
            "initial_draws": attempts,
            "events": state.event_count,
            "relative_energy_drift": drift,
        }),
        success: true,
    })
}

fn solve_kinetic(cfg: &RunConfig) -> Result<Outcome> {
    let d = cfg.usize("d");
    let n = cfg.usize("n_samples");
    let law = velocity_law(cfg)?;
    let seed = cfg.int("seed");
    let mut rng = rng_from_seed(derive_seed(seed, &[2]));
    let mut samples = vec![0.0; n * d];
    for v in samples.chunks_exact_mut(d.max(1)) {
        law.sample_into(&mut rng, v);
    }
    let ens = VelocityEnsemble::from_flat(d, samples, 1.0 / n as f64)?;
    let rate_const = match cfg.float("rate_const") {
        r if r > 0.0 => r,
        _ => matched_rate_const(d, cfg.float("c0"), cfg.float("box_side")),
    };
    let kernel = CollisionKernel::parse(cfg.str("kernel"))?;
    let radius = 6.0 * ens.temperature().sqrt().max(law.temperature().sqrt());
    let bins = cfg.usize("entropy_bins");
    let mut solver = DsmcSolver::new(ens, rate_const, kernel, derive_seed(seed, &[3]));
    let mut diag = Vec::new();
    for t in output_times(cfg.float("t_end"), cfg.usize("snapshots"))? {
        solver.run_until(t, cfg.float("dt"))?;
        let m = moments(&solver.ensemble);
        let h = entropy(&solver.ensemble, bins, radius)?;
        diag.push(DiagnosticsRow {
            t,
            mass: m.mass,
            momentum: m.momentum.0.clone(),
            energy: m.energy,
            entropy: h.value,
            entropy_std_error: h.std_error,
            kurtosis: excess_kurtosis(&solver.ensemble),
            collisions: solver.total_collisions,
        });
    }
    let spec = HistogramSpec::centered_cube(d, law.bulk_velocity(), cfg.float("hist_half_width"), cfg.usize("hist_bins"))?;
    let hist = MarginalHistogram::from_velocities(spec, solver.ensemble.samples());
    Ok(Outcome {
        files: vec![
            ("diagnostics.csv".to_string(), diagnostics_csv(&diag).into_bytes()),
            ("histogram.csv".to_string(), histogram_csv(&hist).into_bytes()),
        ],
        summary: json!({
            "rate_const": rate_const,
            "kernel": kernel.name(),
            "collisions": solver.total_collisions,
            "candidates": solver.total_candidates,
        }),
        success: true,
    })
}

fn study_config(cfg: &RunConfig) -> Result<StudyConfig> {
    Ok(StudyConfig {
        d: cfg.usize("d"),
        c0: cfg.float("c0"),
        n_list: cfg.int_list("n_list"),
        runs_per_n: cfg.usize("runs_per_n"),
        box_side: cfg.float("box_side"),
        initial: velocity_law(cfg)?,
        checkpoints: cfg.float_list("study_times"),
        dsmc_factor: cfg.usize("dsmc_factor"),
        dsmc_dt: cfg.float("dt"),
        hist_half_width: cfg.float("hist_half_width"),
        hist_bins: cfg.usize("hist_bins"),
        bootstrap: cfg.usize("bootstrap"),
        master_seed: cfg.int("seed"),
        scheduler: scheduler(cfg)?,
    })
}

fn study(cfg: &RunConfig) -> Result<Outcome> {
    let sc = study_config(cfg)?;
    let res = convergence_study(&sc)?;
    for r in &res.rows {
        println!(
            "t={:<5} N={:<5} distance {:.5} [{:.5}, {:.5}] (raw {:.5}, floor {:.5})",
            r.t_end, r.n, r.distance, r.ci_lo, r.ci_hi, r.raw_distance, r.floor
        );
    }
    Ok(Outcome {
        files: vec![("study.csv".to_string(), study_csv(&res.rows).into_bytes())],
        summary: json!({
            "verdicts": res.verdicts,
            "reference_size": res.reference_size,
            "rate_const": res.rate_const,
        }),
        success: true,
    })
}

fn snapshots_json(snaps: &[TrajectorySnapshot]) -> serde_json::Value {
    snaps
        .iter()
        .map(|s| {
            let particles: Vec<_> = (0..s.config.count())
                .map(|i| {
                    json!({
                        "index": i,
                        "position": s.config.position(i),
                        "velocity": s.config.velocity(i),
                    })
                })
                .collect();
            json!({ "stage": s.stage, "time": s.time, "particles": particles })
        })
        .collect()
}

fn pseudo(cfg: &RunConfig) -> Result<Outcome> {
    let d = cfg.usize("d");
    let s = cfg.usize("ps_s");
    let mut rng = rng_from_seed(derive_seed(cfg.int("seed"), &[4]));
    let spec = PseudoTrajectorySpec::random(s, cfg.usize("ps_k"), d, cfg.float("ps_t"), cfg.float("ps_eps"), &mut rng);
    let mut x = vec![0.0; s * d];
    let mut v = vec![0.0; s * d];
    fill_normal(&mut rng, &mut x);
    fill_normal(&mut rng, &mut v);
    let z = Configuration::from_flat(d, x, v)?;
    let bz = boltzmann_pseudo_trajectory(&z, &spec)?;
    let nz = bbgky_pseudo_trajectory(&z, &spec)?;
    let report = proximity_check(&z, &spec)?;
    let within = report.within_bounds(&spec, 1e-12);
    let doc = json!({
        "history": spec,
        "boltzmann": snapshots_json(&bz),
        "bbgky": snapshots_json(&nz),
        "proximity": report,
        "within_bounds": within,
    });
    Ok(Outcome {
        files: vec![("pseudo.json".to_string(), serde_json::to_vec_pretty(&doc)?)],
        summary: json!({
            "max_position_gap": report.max_position_gap,
            "velocity_equal": report.velocity_equal,
            "within_bounds": within,
        }),
        success: report.velocity_equal && within,
    })
}

fn measure(cfg: &RunConfig) -> Result<Outcome> {
    let radii = cfg.float_list("rho_list");
    let n = cfg.usize("mc_samples");
    let seed = cfg.int("seed");
    let mut rows = Vec::new();
    let mut slopes = Vec::new();
    for d in cfg.int_list("measure_dims") {
        let mut dir = vec![0.0; d.max(1)];
        dir[0] = 1.0;
        let mut families: Vec<(String, Vec<_>)> = Vec::new();
        let est = mc_sphere_cylinder_fractions(d, &vec![0.0; d], &dir, &radii, n, derive_seed(seed, &[d as u64, 0]))?;
        families.push(("sphere-cylinder".into(), est));
        for (k, tag) in ["cylinder-first", "ball-first", "ball-second", "strip"].iter().enumerate() {
            let fam = RegionFamily::parse(tag, d)?;
            let est = mc_ellipsoid_cap_fractions(d, &fam, &radii, n, derive_seed(seed, &[d as u64, k as u64 + 1]))?;
            families.push((tag.to_string(), est));
        }
        for (family, est) in families {
            if let Some(fit) = loglog_slope(&radii, &est, 10) {
                slopes.push(json!({ "d": d, "family": family, "slope": fit.slope, "points_used": fit.points_used }));
            }
            for (rho, e) in radii.iter().zip(&est) {
                rows.push(MeasureRow {
                    d,
                    family: family.clone(),
                    rho: *rho,
                    fraction: e.fraction,
                    std_error: e.std_error,
                    hits: e.hits as u64,
                    n_samples: e.n_samples as u64,
                });
            }
        }
    }
    Ok(Outcome {
        files: vec![("measure.csv".to_string(), measure_csv(&rows).into_bytes())],
        summary: json!({ "slopes": slopes }),
        success: true,
    })
}

fn verify(cfg: &RunConfig, quick: bool) -> Result<Outcome> {
    let level = if quick { SuiteLevel::Quick } else { SuiteLevel::Full };
    let results = run_suite(level, cfg.int("seed"));
    for r in &results {
        println!("{}", r.line());
    }
    let passed = results.iter().filter(|r| r.passed).count();
    println!("{passed}/{} checks passed", results.len());
    Ok(Outcome {
        files: vec![("verify.json".to_string(), serde_json::to_vec_pretty(&results)?)],
        summary: json!({ "passed": passed, "total": results.len() }),
        success: passed == results.len(),
    })
}
