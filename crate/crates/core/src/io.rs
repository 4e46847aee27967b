//! Configuration files, CSV/JSON output and run manifests.
//!
//! Configuration files are flat `key = value` lists; `#` starts a comment.
//! Every key is declared in [`SCHEMA`] with its type and default; unknown
//! keys and ill-typed values are rejected with the offending line number.
//! Floating-point output uses 17 significant digits so that values
//! round-trip exactly.

use crate::dynamics::CollisionEvent;
use crate::error::{Error, Result};
use crate::geometry::Configuration;
use crate::histogram::MarginalHistogram;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

/// Type of a configuration entry.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ValueType {
    /// Non-negative integer.
    Int,
    /// Floating-point number.
    Float,
    /// `true` or `false`.
    Bool,
    /// Free-form word.
    Str,
    /// Comma-separated integers.
    IntList,
    /// Comma-separated floats.
    FloatList,
}

/// A typed configuration value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ConfigValue {
    /// Integer.
    Int(u64),
    /// Float.
    Float(f64),
    /// Boolean.
    Bool(bool),
    /// String.
    Str(String),
    /// Integer list.
    IntList(Vec<u64>),
    /// Float list.
    FloatList(Vec<f64>),
}

impl ConfigValue {
    fn render(&self) -> String {
        fn join<T: ToString>(v: &[T]) -> String {
            v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
        }
        match self {
            ConfigValue::Int(v) => v.to_string(),
            ConfigValue::Float(v) => format!("{v:?}"),
            ConfigValue::Bool(v) => v.to_string(),
            ConfigValue::Str(v) => v.clone(),
            ConfigValue::IntList(v) => join(v),
            ConfigValue::FloatList(v) => v.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(","),
        }
    }
}

/// One declared configuration key.
#[derive(Debug, Clone, Copy)]
pub struct KeySpec {
    /// Key name.
    pub key: &'static str,
    /// Value type.
    pub ty: ValueType,
    /// Default, in file syntax.
    pub default: &'static str,
    /// One-line description.
    pub help: &'static str,
}

/// Every recognised configuration key.
pub const SCHEMA: &[KeySpec] = &[
    KeySpec { key: "d", ty: ValueType::Int, default: "2", help: "spatial dimension" },
    KeySpec { key: "seed", ty: ValueType::Int, default: "1", help: "master seed (overridden by --seed)" },
    KeySpec { key: "n_particles", ty: ValueType::Int, default: "64", help: "particle number" },
    KeySpec { key: "eps", ty: ValueType::Float, default: "0", help: "interaction-zone scale; 0 derives it from c0" },
    KeySpec { key: "c0", ty: ValueType::Float, default: "0.3", help: "scaling constant in eps = c0 N^(-2/(2d-1))" },
    KeySpec { key: "boundary", ty: ValueType::Str, default: "periodic", help: "periodic | free" },
    KeySpec { key: "box_side", ty: ValueType::Float, default: "1.0", help: "side of the (periodic) box" },
    KeySpec { key: "initial", ty: ValueType::Str, default: "mixture", help: "maxwellian | mixture" },
    KeySpec { key: "temperature", ty: ValueType::Float, default: "1.0", help: "temperature of the Maxwellian initial law" },
    KeySpec { key: "mixture_t1", ty: ValueType::Float, default: "0.5", help: "first temperature of the mixture" },
    KeySpec { key: "mixture_t2", ty: ValueType::Float, default: "2.0", help: "second temperature of the mixture" },
    KeySpec { key: "t_end", ty: ValueType::Float, default: "1.0", help: "final time" },
    KeySpec { key: "snapshots", ty: ValueType::Int, default: "11", help: "number of output times including 0 and t_end" },
    KeySpec { key: "scheduler", ty: ValueType::Str, default: "chunks", help: "chunks | rescan" },
    KeySpec { key: "symmetric", ty: ValueType::Bool, default: "false", help: "every particle of a triple may be the centre" },
    KeySpec { key: "grazing_tol", ty: ValueType::Float, default: "1e-12", help: "relative grazing threshold" },
    KeySpec { key: "max_events", ty: ValueType::Int, default: "10000000", help: "event circuit breaker" },
    KeySpec { key: "record_events", ty: ValueType::Bool, default: "true", help: "write the event log" },
    KeySpec { key: "n_samples", ty: ValueType::Int, default: "20000", help: "DSMC ensemble size" },
    KeySpec { key: "dt", ty: ValueType::Float, default: "0.01", help: "DSMC time step" },
    KeySpec { key: "rate_const", ty: ValueType::Float, default: "0", help: "DSMC frequency scale; 0 matches the particle system" },
    KeySpec { key: "kernel", ty: ValueType::Str, default: "flux", help: "operator | flux" },
    KeySpec { key: "entropy_bins", ty: ValueType::Int, default: "32", help: "bins per axis of the entropy histogram" },
    KeySpec { key: "hist_bins", ty: ValueType::Int, default: "16", help: "bins per axis of output histograms" },
    KeySpec { key: "hist_half_width", ty: ValueType::Float, default: "5.0", help: "half width of the histogram cube" },
    KeySpec { key: "n_list", ty: ValueType::IntList, default: "27,64,125,216", help: "particle numbers of the study" },
    KeySpec { key: "runs_per_n", ty: ValueType::Int, default: "32", help: "runs per particle number" },
    KeySpec { key: "study_times", ty: ValueType::FloatList, default: "0,1,3", help: "study checkpoints" },
    KeySpec { key: "dsmc_factor", ty: ValueType::Int, default: "10", help: "reference size over the largest pooled size" },
    KeySpec { key: "bootstrap", ty: ValueType::Int, default: "200", help: "bootstrap replicates" },
    KeySpec { key: "ps_s", ty: ValueType::Int, default: "2", help: "initial particles of a pseudo-trajectory" },
    KeySpec { key: "ps_k", ty: ValueType::Int, default: "3", help: "adjunctions of a pseudo-trajectory" },
    KeySpec { key: "ps_eps", ty: ValueType::Float, default: "0.001", help: "eps of the BBGKY pseudo-trajectory" },
    KeySpec { key: "ps_t", ty: ValueType::Float, default: "1.0", help: "start time of a pseudo-trajectory" },
    KeySpec { key: "mc_samples", ty: ValueType::Int, default: "1000000", help: "samples per measure estimate" },
    KeySpec { key: "measure_dims", ty: ValueType::IntList, default: "2,3", help: "dimensions of the measure estimates" },
    KeySpec { key: "rho_list", ty: ValueType::FloatList, default: "0.3,0.2,0.1,0.05", help: "radii of the measure estimates" },
];

fn key_spec(key: &str) -> Option<&'static KeySpec> {
    SCHEMA.iter().find(|k| k.key == key)
}

fn parse_value(ty: ValueType, raw: &str) -> std::result::Result<ConfigValue, String> {
    let int = |s: &str| s.trim().parse::<u64>().map_err(|_| format!("expected a non-negative integer, got '{}'", s.trim()));
    let float = |s: &str| {
        let v = s.trim().parse::<f64>().map_err(|_| format!("expected a number, got '{}'", s.trim()))?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(format!("expected a finite number, got '{}'", s.trim()))
        }
    };
    match ty {
        ValueType::Int => int(raw).map(ConfigValue::Int),
        ValueType::Float => float(raw).map(ConfigValue::Float),
        ValueType::Bool => match raw {
            "true" => Ok(ConfigValue::Bool(true)),
            "false" => Ok(ConfigValue::Bool(false)),
            _ => Err(format!("expected true or false, got '{raw}'")),
        },
        ValueType::Str => {
            if raw.is_empty() || raw.contains(char::is_whitespace) {
                Err(format!("expected a single word, got '{raw}'"))
            } else {
                Ok(ConfigValue::Str(raw.to_string()))
            }
        }
        ValueType::IntList => raw.split(',').map(int).collect::<std::result::Result<_, _>>().map(ConfigValue::IntList),
        ValueType::FloatList => raw
            .split(',')
            .map(float)
            .collect::<std::result::Result<_, _>>()
            .map(ConfigValue::FloatList),
    }
}

/// A validated configuration: every schema key with its value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    values: BTreeMap<String, ConfigValue>,
}

impl Default for RunConfig {
    fn default() -> Self {
        let values = SCHEMA
            .iter()
            .map(|k| {
                let v = parse_value(k.ty, k.default).expect("schema defaults parse");
                (k.key.to_string(), v)
            })
            .collect();
        RunConfig { values }
    }
}

impl RunConfig {
    /// Parse a configuration file's text on top of the defaults.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = RunConfig::default();
        let mut seen = BTreeMap::new();
        for (idx, line) in text.lines().enumerate() {
            let line_no = idx + 1;
            let body = line.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let (key, value) = body.split_once('=').ok_or_else(|| Error::Config {
                line: line_no,
                key: body.to_string(),
                message: "expected 'key = value'".into(),
            })?;
            let key = key.trim();
            if let Some(prev) = seen.insert(key.to_string(), line_no) {
                return Err(Error::Config {
                    line: line_no,
                    key: key.to_string(),
                    message: format!("duplicate key (first set on line {prev})"),
                });
            }
            cfg.set_at(key, value.trim(), line_no)?;
        }
        Ok(cfg)
    }

    /// Read and parse a configuration file.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    fn set_at(&mut self, key: &str, raw: &str, line: usize) -> Result<()> {
        let spec = key_spec(key).ok_or_else(|| Error::Config {
            line,
            key: key.to_string(),
            message: "unknown key".into(),
        })?;
        let value = parse_value(spec.ty, raw).map_err(|message| Error::Config {
            line,
            key: key.to_string(),
            message,
        })?;
        self.values.insert(key.to_string(), value);
        Ok(())
    }

    /// Apply a `key=value` override (line number 0 in errors).
    pub fn set(&mut self, assignment: &str) -> Result<()> {
        let (key, value) = assignment.split_once('=').ok_or_else(|| Error::Config {
            line: 0,
            key: assignment.to_string(),
            message: "expected 'key=value'".into(),
        })?;
        self.set_at(key.trim(), value.trim(), 0)
    }

    /// Render as a configuration file that parses back to `self`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for k in SCHEMA {
            let _ = writeln!(out, "# {}", k.help);
            let _ = writeln!(out, "{} = {}", k.key, self.values[k.key].render());
        }
        out
    }

    /// All values as JSON (for manifests).
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(&self.values).expect("config values serialise")
    }

    fn get(&self, key: &str) -> &ConfigValue {
        self.values.get(key).unwrap_or_else(|| panic!("'{key}' is not a schema key"))
    }

    /// Integer value of `key`.
    pub fn int(&self, key: &str) -> u64 {
        match self.get(key) {
            ConfigValue::Int(v) => *v,
            other => panic!("'{key}' is not an integer key: {other:?}"),
        }
    }

    /// Integer value of `key` as `usize`.
    pub fn usize(&self, key: &str) -> usize {
        self.int(key) as usize
    }

    /// Float value of `key`.
    pub fn float(&self, key: &str) -> f64 {
        match self.get(key) {
            ConfigValue::Float(v) => *v,
            other => panic!("'{key}' is not a float key: {other:?}"),
        }
    }

    /// Boolean value of `key`.
    pub fn bool(&self, key: &str) -> bool {
        match self.get(key) {
            ConfigValue::Bool(v) => *v,
            other => panic!("'{key}' is not a boolean key: {other:?}"),
        }
    }

    /// String value of `key`.
    pub fn str(&self, key: &str) -> &str {
        match self.get(key) {
            ConfigValue::Str(v) => v,
            other => panic!("'{key}' is not a string key: {other:?}"),
        }
    }

    /// Integer-list value of `key`.
    pub fn int_list(&self, key: &str) -> Vec<usize> {
        match self.get(key) {
            ConfigValue::IntList(v) => v.iter().map(|x| *x as usize).collect(),
            other => panic!("'{key}' is not an integer-list key: {other:?}"),
        }
    }

    /// Float-list value of `key`.
    pub fn float_list(&self, key: &str) -> Vec<f64> {
        match self.get(key) {
            ConfigValue::FloatList(v) => v.clone(),
            other => panic!("'{key}' is not a float-list key: {other:?}"),
        }
    }
}

/// Format with 17 significant digits (exact round trip).
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

fn axis_headers(prefix: &str, d: usize) -> String {
    (1..=d).map(|q| format!("{prefix}{q}")).collect::<Vec<_>>().join(",")
}

fn push_row(out: &mut String, fields: impl IntoIterator<Item = String>) {
    let line = fields.into_iter().collect::<Vec<_>>().join(",");
    out.push_str(&line);
    out.push('\n');
}

/// Trajectory snapshots: `t,particle,x1..xd,v1..vd`.
pub fn trajectory_csv(snapshots: &[(f64, Configuration)]) -> String {
    let d = snapshots.first().map(|(_, z)| z.dim()).unwrap_or(0);
    let mut out = format!("t,particle,{},{}\n", axis_headers("x", d), axis_headers("v", d));
    for (t, z) in snapshots {
        for i in 0..z.count() {
            let fields = std::iter::once(fmt17(*t))
                .chain(std::iter::once(i.to_string()))
                .chain(z.position(i).iter().map(|x| fmt17(*x)))
                .chain(z.velocity(i).iter().map(|x| fmt17(*x)));
            push_row(&mut out, fields);
        }
    }
    out
}

/// Collision events: `t,center,j,k,b_at_contact,class`.
pub fn events_csv(events: &[CollisionEvent]) -> String {
    let mut out = String::from("t,center,j,k,b_at_contact,class\n");
    for e in events {
        push_row(
            &mut out,
            [
                fmt17(e.time),
                e.triplet[0].to_string(),
                e.triplet[1].to_string(),
                e.triplet[2].to_string(),
                fmt17(e.b_at_contact),
                e.class.label().to_string(),
            ],
        );
    }
    out
}

/// One row of a diagnostics table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsRow {
    /// Time.
    pub t: f64,
    /// Mass.
    pub mass: f64,
    /// Momentum components.
    pub momentum: Vec<f64>,
    /// Energy `½ Σ |v|²` (per unit mass for ensembles).
    pub energy: f64,
    /// Entropy estimate (NaN when not computed).
    pub entropy: f64,
    /// Its standard error.
    pub entropy_std_error: f64,
    /// Excess kurtosis per component.
    pub kurtosis: Vec<f64>,
    /// Collisions so far.
    pub collisions: u64,
}

/// Diagnostics table: `t,mass,p1..pd,energy,entropy,entropy_se,k1..kd,collisions`.
pub fn diagnostics_csv(rows: &[DiagnosticsRow]) -> String {
    let d = rows.first().map(|r| r.momentum.len()).unwrap_or(0);
    let mut out = format!(
        "t,mass,{},energy,entropy,entropy_se,{},collisions\n",
        axis_headers("p", d),
        axis_headers("kurtosis", d)
    );
    for r in rows {
        let fields = [fmt17(r.t), fmt17(r.mass)]
            .into_iter()
            .chain(r.momentum.iter().map(|x| fmt17(*x)))
            .chain([fmt17(r.energy), fmt17(r.entropy), fmt17(r.entropy_std_error)])
            .chain(r.kurtosis.iter().map(|x| fmt17(*x)))
            .chain(std::iter::once(r.collisions.to_string()));
        push_row(&mut out, fields);
    }
    out
}

/// Histogram: `c1..cd,count` with bin centres.
pub fn histogram_csv(h: &MarginalHistogram) -> String {
    let d = h.spec.dim;
    let mut out = format!("{},count\n", axis_headers("c", d));
    for (idx, count) in h.counts.iter().enumerate() {
        let fields = h
            .spec
            .center(idx)
            .into_iter()
            .map(fmt17)
            .chain(std::iter::once(fmt17(*count)));
        push_row(&mut out, fields);
    }
    out
}

/// Study table.
pub fn study_csv(rows: &[crate::convergence::StudyRow]) -> String {
    let mut out =
        String::from("t_end,n,eps,raw_distance,floor,floor_q975,distance,ci_lo,ci_hi,failures,collisions_per_run\n");
    for r in rows {
        push_row(
            &mut out,
            [
                fmt17(r.t_end),
                r.n.to_string(),
                fmt17(r.eps),
                fmt17(r.raw_distance),
                fmt17(r.floor),
                fmt17(r.floor_q975),
                fmt17(r.distance),
                fmt17(r.ci_lo),
                fmt17(r.ci_hi),
                r.failures.to_string(),
                fmt17(r.collisions_per_run),
            ],
        );
    }
    out
}

/// One line of the measure-estimates table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureRow {
    /// Dimension.
    pub d: usize,
    /// Region family tag.
    pub family: String,
    /// Radius.
    pub rho: f64,
    /// Estimated fraction.
    pub fraction: f64,
    /// Standard error.
    pub std_error: f64,
    /// Hits.
    pub hits: u64,
    /// Samples.
    pub n_samples: u64,
}

/// Measure-estimates table: `d,family,rho,fraction,std_error,hits,n_samples`.
pub fn measure_csv(rows: &[MeasureRow]) -> String {
    let mut out = String::from("d,family,rho,fraction,std_error,hits,n_samples\n");
    for r in rows {
        push_row(
            &mut out,
            [
                r.d.to_string(),
                r.family.clone(),
                fmt17(r.rho),
                fmt17(r.fraction),
                fmt17(r.std_error),
                r.hits.to_string(),
                r.n_samples.to_string(),
            ],
        );
    }
    out
}

/// Lowercase hex SHA-256 digest.
pub fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// One output file recorded in a manifest.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutputEntry {
    /// File name relative to the output directory.
    pub file: String,
    /// SHA-256 digest of the contents.
    pub sha256: String,
    /// Size in bytes.
    pub bytes: u64,
}

/// Record of one CLI run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    /// Subcommand.
    pub command: String,
    /// Tool version.
    pub version: String,
    /// Master seed.
    pub seed: u64,
    /// Whether the run was pinned to one thread.
    pub deterministic: bool,
    /// Worker threads used.
    pub threads: usize,
    /// Resolved configuration.
    pub config: serde_json::Value,
    /// Start time (RFC 3339, UTC).
    pub started_at: String,
    /// End time (RFC 3339, UTC).
    pub finished_at: String,
    /// Outputs with their digests.
    pub outputs: Vec<OutputEntry>,
    /// Command-specific summary.
    pub summary: serde_json::Value,
}

/// File name of the manifest inside an output directory.
pub const MANIFEST_NAME: &str = "manifest.json";

/// Current UTC time in RFC 3339 form.
pub fn timestamp() -> String {
    chrono::Utc::now().to_rfc3339()
}

/// Write `files` into `dir` and return their manifest entries.
pub fn write_outputs(dir: &Path, files: &[(String, Vec<u8>)]) -> Result<Vec<OutputEntry>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    files
        .iter()
        .map(|(name, bytes)| {
            let path = dir.join(name);
            std::fs::write(&path, bytes).map_err(|e| Error::io(&path, e))?;
            Ok(OutputEntry {
                file: name.clone(),
                sha256: sha256_hex(bytes),
                bytes: bytes.len() as u64,
            })
        })
        .collect()
}

/// Write the manifest into `dir`.
pub fn write_manifest(dir: &Path, manifest: &RunManifest) -> Result<PathBuf> {
    let path = dir.join(MANIFEST_NAME);
    let text = serde_json::to_string_pretty(manifest)?;
    std::fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
    Ok(path)
}

/// Write `files` and the manifest describing them into `dir`; the
/// manifest's `outputs` are filled in from the written files.
pub fn emit_outputs(dir: &Path, files: &[(String, Vec<u8>)], mut manifest: RunManifest) -> Result<RunManifest> {
    if files.iter().any(|(name, _)| name == MANIFEST_NAME) {
        return Err(Error::Usage(format!("output name `{MANIFEST_NAME}` is reserved")));
    }
    manifest.outputs = write_outputs(dir, files)?;
    write_manifest(dir, &manifest)?;
    Ok(manifest)
}

/// Outcome of checking one manifest entry.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DigestCheck {
    /// File name.
    pub file: String,
    /// Whether the file exists and its digest matches.
    pub ok: bool,
    /// Explanation when not ok.
    pub detail: String,
}

/// Recompute every digest listed in a manifest.
pub fn verify_manifest(path: &Path) -> Result<Vec<DigestCheck>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let manifest: RunManifest = serde_json::from_str(&text)?;
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    Ok(manifest
        .outputs
        .iter()
        .map(|entry| {
            let file = dir.join(&entry.file);
            match std::fs::read(&file) {
                Ok(bytes) => {
                    let actual = sha256_hex(&bytes);
                    DigestCheck {
                        file: entry.file.clone(),
                        ok: actual == entry.sha256,
                        detail: if actual == entry.sha256 {
                            String::new()
                        } else {
                            format!("digest {actual} differs from recorded {}", entry.sha256)
                        },
                    }
                }
                Err(e) => DigestCheck {
                    file: entry.file.clone(),
                    ok: false,
                    detail: format!("cannot read: {e}"),
                },
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip() {
        let cfg = RunConfig::default();
        assert_eq!(RunConfig::parse(&cfg.to_text()).unwrap(), cfg);
    }

    #[test]
    fn parse_with_comments() {
        let cfg = RunConfig::parse("# header\nd = 3  # dimension\n\nt_end=2.5\nn_list = 8, 27\n").unwrap();
        assert_eq!(cfg.usize("d"), 3);
        assert_eq!(cfg.float("t_end"), 2.5);
        assert_eq!(cfg.int_list("n_list"), vec![8, 27]);
    }

    #[test]
    fn unknown_key_reports_line() {
        let err = RunConfig::parse("d = 2\nbogus = 1\n").unwrap_err();
        match err {
            Error::Config { line, key, .. } => {
                assert_eq!(line, 2);
                assert_eq!(key, "bogus");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn type_error_reports_line() {
        let err = RunConfig::parse("\n\nt_end = soon\n").unwrap_err();
        assert!(matches!(err, Error::Config { line: 3, .. }));
        assert!(RunConfig::parse("symmetric = yes").is_err());
        assert!(RunConfig::parse("d = -1").is_err());
        assert!(RunConfig::parse("d = 2\nd = 3").is_err());
    }

    #[test]
    fn fmt17_round_trips() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 6.02e23, std::f64::consts::PI] {
            assert_eq!(fmt17(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn sha256_known_vector() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }
}
