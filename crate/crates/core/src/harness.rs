//! Experiment configuration, Monte-Carlo trial batches and result files.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circulant::{coprime_criterion, make_decreasing_kernel, sample_random_circulant};
use crate::error::{Error, Result};
use crate::injectivity::{certify, FunctionalSet, SufficiencyPath, Verdict};
use crate::measurements::{noise_threshold, simulate, MeasurementRecord};
use crate::rng::{derive_seed, stream, TAG_SIGNAL, TAG_TRIAL};
use crate::solver::{recovery_error, solve, SolveConfig, SolveResult, NOISE_FREE_THRESHOLD};
use crate::spectral::{OperatorFile, OperatorSpec};
use crate::tolerance::Tolerance;

pub const EXPERIMENT_SCHEMA: &str = "phaseless-experiment/v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Certify,
    Reconstruct,
    Sweep,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case")]
pub enum OperatorSource {
    /// Symmetric convolution with the given decreasing DFT profile.
    KernelProfile { profile: Vec<f64> },
    /// Unit-modulus random DFT spectrum.
    RandomCirculant { seed: u64 },
    /// An operator file; relative paths are resolved against the config file.
    File { path: PathBuf },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case")]
pub enum SignalSource {
    /// Entries drawn once from `U[-half_width, half_width]`.
    Uniform {
        half_width: f64,
    },
    Explicit {
        values: Vec<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub schema: String,
    pub kind: ExperimentKind,
    pub n: usize,
    pub operator: OperatorSource,
    /// Sampling locations; each set is one batch.
    #[serde(default)]
    pub location_sets: Vec<Vec<usize>>,
    /// Certify every 3-subset of `Z_n` in addition to `location_sets`.
    #[serde(default)]
    pub all_triples: bool,
    /// Last sampling time `L`; defaults to `2n - 2`.
    #[serde(default)]
    pub max_time: Option<usize>,
    #[serde(default)]
    pub sigma: f64,
    pub signal: SignalSource,
    pub solve: SolveConfig,
    /// Overrides the success cutoff; otherwise `1e-8` without noise and the
    /// per-record noise energy with it.
    #[serde(default)]
    pub threshold: Option<f64>,
    pub trials: usize,
    pub seed: u64,
    /// Attach certificates to reconstruct and sweep reports.
    #[serde(default)]
    pub certify: bool,
    #[serde(default)]
    pub tolerance: Tolerance,
    /// Free-form note on problem scale, copied to the report.
    #[serde(default)]
    pub scale: Option<String>,
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
}

/// `{1,2}`, `{1,2,3}` and `{1, ..., 4i - 8}` for `i = 3..6`, reduced mod `n`.
pub fn default_sweep_sets(n: usize) -> Vec<Vec<usize>> {
    let mut sets = vec![vec![1, 2], vec![1, 2, 3]];
    for i in 3..=6 {
        sets.push((1..=4 * i - 8).collect());
    }
    sets.into_iter()
        .map(|s| {
            let mut r: Vec<usize> = s.into_iter().map(|v| v % n).collect();
            r.sort_unstable();
            r.dedup();
            r
        })
        .collect()
}

impl ExperimentConfig {
    /// Noise-free recovery at `n = 9` with a decreasing convolution kernel,
    /// `r = 4`, `t = 0..8` and signal entries in `[-4, 4]`.
    pub fn uniqueness_replica(location_sets: Vec<Vec<usize>>) -> Self {
        Self {
            schema: EXPERIMENT_SCHEMA.into(),
            kind: ExperimentKind::Reconstruct,
            n: 9,
            operator: OperatorSource::KernelProfile {
                profile: vec![1.0, 0.8, 0.6, 0.4, 0.2],
            },
            location_sets,
            all_triples: false,
            max_time: Some(8),
            sigma: 0.0,
            signal: SignalSource::Uniform { half_width: 4.0 },
            solve: SolveConfig {
                radius: 4.0,
                max_iters: 50_000,
                ..SolveConfig::default()
            },
            threshold: None,
            trials: 100,
            seed: 0,
            certify: true,
            tolerance: Tolerance::default(),
            scale: None,
            out_dir: None,
        }
    }

    /// Noisy sweep over [`default_sweep_sets`] with a random circulant,
    /// `r = 0.5`, `sigma = 0.01`, `t = 0..2n-2` and entries in `[-0.5, 0.5]`.
    pub fn noisy_sweep(n: usize) -> Self {
        Self {
            schema: EXPERIMENT_SCHEMA.into(),
            kind: ExperimentKind::Sweep,
            n,
            operator: OperatorSource::RandomCirculant { seed: 0 },
            location_sets: default_sweep_sets(n),
            all_triples: false,
            max_time: None,
            sigma: 0.01,
            signal: SignalSource::Uniform { half_width: 0.5 },
            solve: SolveConfig {
                radius: 0.5,
                ..SolveConfig::default()
            },
            threshold: None,
            trials: 40,
            seed: 0,
            certify: false,
            tolerance: Tolerance::default(),
            scale: (n != 45).then(|| format!("n = {n} instead of 45")),
            out_dir: None,
        }
    }

    /// Certificates for every 3-subset of `Z_9` under a decreasing kernel.
    pub fn triples_certificate() -> Self {
        Self {
            kind: ExperimentKind::Certify,
            all_triples: true,
            location_sets: Vec::new(),
            trials: 0,
            ..Self::uniqueness_replica(Vec::new())
        }
    }

    /// Reads a config and resolves a relative operator path against it.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        let mut cfg: Self = serde_json::from_str(&text)?;
        if let OperatorSource::File { path: p } = &mut cfg.operator {
            if p.is_relative() {
                if let Some(dir) = path.parent() {
                    *p = dir.join(&*p);
                }
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema != EXPERIMENT_SCHEMA {
            return Err(Error::Config(format!(
                "unsupported schema {:?}, expected {EXPERIMENT_SCHEMA:?}",
                self.schema
            )));
        }
        if self.n == 0 {
            return Err(Error::Config("n must be positive".into()));
        }
        match &self.operator {
            OperatorSource::KernelProfile { .. } | OperatorSource::RandomCirculant { .. } => {
                if self.n % 2 == 0 {
                    return Err(Error::Config(format!(
                        "circulant operators need odd n, got {}",
                        self.n
                    )));
                }
            }
            OperatorSource::File { path } => {
                if !path.is_file() {
                    return Err(Error::Config(format!(
                        "operator file {} does not exist",
                        path.display()
                    )));
                }
            }
        }
        for set in &self.location_sets {
            if set.is_empty() {
                return Err(Error::Config("empty location set".into()));
            }
            if let Some(&i) = set.iter().find(|&&i| i >= self.n) {
                return Err(Error::Config(format!("location {i} outside 0..{}", self.n)));
            }
            let mut s = set.clone();
            s.sort_unstable();
            s.dedup();
            if s.len() != set.len() {
                return Err(Error::Config(format!("repeated location in {set:?}")));
            }
        }
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return Err(Error::Config(format!(
                "sigma must be nonnegative, got {}",
                self.sigma
            )));
        }
        if let Some(t) = self.threshold {
            if !(t > 0.0) {
                return Err(Error::Config(format!(
                    "threshold must be positive, got {t}"
                )));
            }
        }
        match &self.signal {
            SignalSource::Uniform { half_width } if !(*half_width > 0.0) => {
                return Err(Error::Config("signal half width must be positive".into()));
            }
            SignalSource::Explicit { values } if values.len() != self.n => {
                return Err(Error::Config(format!(
                    "signal has {} entries, expected {}",
                    values.len(),
                    self.n
                )));
            }
            _ => {}
        }
        if self.kind != ExperimentKind::Certify {
            self.solve.validate()?;
        }
        self.tolerance.validate()
    }

    pub fn max_time(&self) -> usize {
        self.max_time.unwrap_or(2 * self.n - 2)
    }

    pub fn build_operator(&self) -> Result<OperatorSpec> {
        let spec = match &self.operator {
            OperatorSource::KernelProfile { profile } => {
                let k = make_decreasing_kernel(self.n, profile)?;
                OperatorSpec::circulant(&k.a, &self.tolerance)?
            }
            OperatorSource::RandomCirculant { seed } => {
                sample_random_circulant(self.n, *seed, &self.tolerance)?.1
            }
            OperatorSource::File { path } => {
                let file: OperatorFile = serde_json::from_str(&fs::read_to_string(path)?)?;
                file.into_spec(&self.tolerance)?
            }
        };
        if spec.n() != self.n {
            return Err(Error::Config(format!(
                "operator is {m}x{m}, config says n = {}",
                self.n,
                m = spec.n()
            )));
        }
        Ok(spec)
    }

    pub fn build_signal(&self) -> Vec<f64> {
        match &self.signal {
            SignalSource::Uniform { half_width } => {
                let mut rng = stream(self.seed, &[TAG_SIGNAL]);
                (0..self.n)
                    .map(|_| rng.random_range(-half_width..=*half_width))
                    .collect()
            }
            SignalSource::Explicit { values } => values.clone(),
        }
    }

    fn certificate_sets(&self) -> Vec<Vec<usize>> {
        let mut sets = self.location_sets.clone();
        if self.all_triples {
            for a in 0..self.n {
                for b in a + 1..self.n {
                    for c in b + 1..self.n {
                        sets.push(vec![a, b, c]);
                    }
                }
            }
        }
        sets
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRow {
    pub trial: usize,
    pub seed: u64,
    pub locations: Vec<usize>,
    pub final_objective: f64,
    pub err: f64,
    pub success: bool,
}

/// Aggregates for one location set; `None` when there were no trials
/// (respectively no successes).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub locations: Vec<usize>,
    pub card_i: usize,
    pub threshold: f64,
    pub trials: usize,
    pub successes: usize,
    pub p_i: Option<f64>,
    pub mean_err: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateSummary {
    pub locations: Vec<usize>,
    pub verdict: Option<Verdict>,
    pub path: Option<SufficiencyPath>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    /// The three-location coprime shortcut, on the kernel-profile path.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coprime: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub agrees: Option<bool>,
}

/// Per-iteration decay of the first trial of one location set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    pub locations: Vec<usize>,
    pub objective: Vec<f64>,
    pub err: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub schema: String,
    pub config: ExperimentConfig,
    pub signal: Vec<f64>,
    pub rows: Vec<TrialRow>,
    pub curve: Vec<CurvePoint>,
    pub certificates: Vec<CertificateSummary>,
    #[serde(skip)]
    pub traces: Vec<Trace>,
}

impl ExperimentReport {
    fn empty(config: &ExperimentConfig, signal: Vec<f64>) -> Self {
        Self {
            schema: EXPERIMENT_SCHEMA.into(),
            config: config.clone(),
            signal,
            rows: Vec::new(),
            curve: Vec::new(),
            certificates: Vec::new(),
            traces: Vec::new(),
        }
    }

    /// Recomputes a curve point from the rows of one location set.
    pub fn aggregate(rows: &[TrialRow]) -> (Option<f64>, Option<f64>) {
        let successes: Vec<&TrialRow> = rows.iter().filter(|r| r.success).collect();
        let p = (!rows.is_empty()).then(|| successes.len() as f64 / rows.len() as f64);
        let mean = (!successes.is_empty())
            .then(|| successes.iter().map(|r| r.err).sum::<f64>() / successes.len() as f64);
        (p, mean)
    }

    pub fn rows_for<'a>(&'a self, locations: &'a [usize]) -> impl Iterator<Item = &'a TrialRow> {
        self.rows.iter().filter(move |r| r.locations == locations)
    }

    pub fn write_trials_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut csv = csv::Writer::from_writer(w);
        csv.write_record(["trial", "seed", "I", "final_objective", "err", "success"])?;
        for r in &self.rows {
            csv.write_record([
                r.trial.to_string(),
                r.seed.to_string(),
                join_locations(&r.locations),
                format!("{:e}", r.final_objective),
                format!("{:e}", r.err),
                r.success.to_string(),
            ])?;
        }
        csv.flush()?;
        Ok(())
    }

    pub fn write_curve_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut csv = csv::Writer::from_writer(w);
        csv.write_record(["card_I", "P_I", "mean_err"])?;
        let opt = |v: Option<f64>| v.map_or_else(|| "undefined".to_string(), |x| format!("{x:e}"));
        for c in &self.curve {
            csv.write_record([c.card_i.to_string(), opt(c.p_i), opt(c.mean_err)])?;
        }
        csv.flush()?;
        Ok(())
    }

    pub fn write_trace_csv<W: Write>(trace: &Trace, w: W) -> Result<()> {
        let mut csv = csv::Writer::from_writer(w);
        csv.write_record(["iter", "log10_obj", "log10_err"])?;
        for (i, (o, e)) in trace.objective.iter().zip(&trace.err).enumerate() {
            csv.write_record([
                i.to_string(),
                format!("{:e}", o.log10()),
                format!("{:e}", e.log10()),
            ])?;
        }
        csv.flush()?;
        Ok(())
    }

    /// Writes `report.json`, `trials.csv`, `curve.csv` and one
    /// `trace_<k>.csv` per location set; returns the paths written.
    pub fn write_outputs(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        fs::create_dir_all(dir)?;
        let mut written = Vec::new();
        let mut open = |name: String| -> Result<(PathBuf, BufWriter<File>)> {
            let p = dir.join(name);
            let f = BufWriter::new(File::create(&p)?);
            written.push(p.clone());
            Ok((p, f))
        };
        let (_, mut f) = open("report.json".into())?;
        serde_json::to_writer_pretty(&mut f, self)?;
        writeln!(f)?;
        f.flush()?;
        if self.config.kind != ExperimentKind::Certify {
            self.write_trials_csv(open("trials.csv".into())?.1)?;
            self.write_curve_csv(open("curve.csv".into())?.1)?;
            for (k, t) in self.traces.iter().enumerate() {
                Self::write_trace_csv(t, open(format!("trace_{k}.csv"))?.1)?;
            }
        }
        Ok(written)
    }
}

fn join_locations(l: &[usize]) -> String {
    l.iter().map(usize::to_string).collect::<Vec<_>>().join(" ")
}

fn summarize(
    config: &ExperimentConfig,
    spec: &OperatorSpec,
    locations: &[usize],
) -> Result<CertificateSummary> {
    let phi = FunctionalSet::standard_basis(config.n, locations)?;
    let (verdict, path, error) = match certify(spec, &phi, &config.tolerance) {
        Ok(c) => (Some(c.verdict), c.path, None),
        Err(e) => (None, None, Some(e.to_string())),
    };
    let coprime = match (&config.operator, locations.len()) {
        (OperatorSource::KernelProfile { .. }, 3) => {
            let set: Vec<i64> = locations.iter().map(|&v| v as i64).collect();
            Some(coprime_criterion(&set, config.n)?)
        }
        _ => None,
    };
    let agrees = match (coprime, verdict) {
        (Some(c), Some(v)) => Some(c == (v == Verdict::Guaranteed)),
        _ => None,
    };
    Ok(CertificateSummary {
        locations: locations.to_vec(),
        verdict,
        path,
        error,
        coprime,
        agrees,
    })
}

/// Certificates for every configured location set.
pub fn run_certify(config: &ExperimentConfig) -> Result<ExperimentReport> {
    config.validate()?;
    let spec = config.build_operator()?;
    let mut report = ExperimentReport::empty(config, config.build_signal());
    report.certificates = config
        .certificate_sets()
        .par_iter()
        .map(|s| summarize(config, &spec, s))
        .collect::<Result<_>>()?;
    Ok(report)
}

struct Batch {
    rows: Vec<TrialRow>,
    point: CurvePoint,
    trace: Option<Trace>,
}

fn run_batch(
    config: &ExperimentConfig,
    spec: &OperatorSpec,
    f: &[f64],
    locations: &[usize],
) -> Result<Batch> {
    let phi = FunctionalSet::standard_basis(config.n, locations)?;
    let record: MeasurementRecord =
        simulate(spec, f, &phi, config.max_time(), config.sigma, config.seed)?;
    let threshold = match config.threshold {
        Some(t) => t,
        None if config.sigma > 0.0 => noise_threshold(&record)?,
        None => NOISE_FREE_THRESHOLD,
    };
    let results: Vec<(u64, SolveResult)> = (0..config.trials)
        .into_par_iter()
        .map(|trial| {
            let seed = derive_seed(config.seed, &[TAG_TRIAL, trial as u64]);
            let solve_cfg = SolveConfig {
                seed,
                objective_threshold: threshold,
                ..config.solve.clone()
            };
            solve(&record, spec, &solve_cfg, Some(f)).map(|r| (seed, r))
        })
        .collect::<Result<_>>()?;
    let rows: Vec<TrialRow> = results
        .iter()
        .enumerate()
        .map(|(trial, (seed, r))| {
            Ok(TrialRow {
                trial,
                seed: *seed,
                locations: locations.to_vec(),
                final_objective: r.final_objective,
                err: recovery_error(f, &r.g_rec)?,
                success: r.success,
            })
        })
        .collect::<Result<_>>()?;
    let (p_i, mean_err) = ExperimentReport::aggregate(&rows);
    let trace = results.first().map(|(_, r)| Trace {
        locations: locations.to_vec(),
        objective: r.objective_trace.clone(),
        err: r.err_trace.clone().unwrap_or_default(),
    });
    Ok(Batch {
        point: CurvePoint {
            locations: locations.to_vec(),
            card_i: locations.len(),
            threshold,
            trials: rows.len(),
            successes: rows.iter().filter(|r| r.success).count(),
            p_i,
            mean_err,
        },
        rows,
        trace,
    })
}

fn run_batches(config: &ExperimentConfig) -> Result<ExperimentReport> {
    config.validate()?;
    let spec = config.build_operator()?;
    let f = config.build_signal();
    if f.iter().all(|&v| v == 0.0) {
        return Err(Error::Config("the signal is zero".into()));
    }
    let mut report = ExperimentReport::empty(config, f.clone());
    for set in &config.location_sets {
        let b = run_batch(config, &spec, &f, set)?;
        report.rows.extend(b.rows);
        report.curve.push(b.point);
        report.traces.extend(b.trace);
    }
    if config.certify {
        report.certificates = config
            .certificate_sets()
            .iter()
            .map(|s| summarize(config, &spec, s))
            .collect::<Result<_>>()?;
    }
    Ok(report)
}

/// Independent random-start solves for each location set.
pub fn run_reconstruct(config: &ExperimentConfig) -> Result<ExperimentReport> {
    run_batches(config)
}

/// The trial batch for every location set, with the `|I|` curve.
pub fn run_sweep(config: &ExperimentConfig) -> Result<ExperimentReport> {
    if config.location_sets.is_empty() {
        return Err(Error::Config(
            "a sweep needs at least one location set".into(),
        ));
    }
    run_batches(config)
}

pub fn run(config: &ExperimentConfig) -> Result<ExperimentReport> {
    match config.kind {
        ExperimentKind::Certify => run_certify(config),
        ExperimentKind::Reconstruct => run_reconstruct(config),
        ExperimentKind::Sweep => run_sweep(config),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_sets_reduce_mod_n() {
        let s = default_sweep_sets(45);
        let sizes: Vec<usize> = s.iter().map(Vec::len).collect();
        assert_eq!(sizes, vec![2, 3, 4, 8, 12, 16]);
        let s = default_sweep_sets(15);
        assert_eq!(s[5], (0..15).collect::<Vec<_>>());
    }

    #[test]
    fn config_json_round_trip() {
        let c = ExperimentConfig::noisy_sweep(15);
        let text = serde_json::to_string(&c).unwrap();
        let back: ExperimentConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(back, c);
        back.validate().unwrap();
    }

    #[test]
    fn validation_catches_bad_configs() {
        let base = ExperimentConfig::uniqueness_replica(vec![vec![1, 2, 3]]);
        let cases = [
            ExperimentConfig {
                n: 8,
                ..base.clone()
            },
            ExperimentConfig {
                location_sets: vec![vec![9]],
                ..base.clone()
            },
            ExperimentConfig {
                location_sets: vec![vec![1, 1]],
                ..base.clone()
            },
            ExperimentConfig {
                schema: "x".into(),
                ..base.clone()
            },
            ExperimentConfig {
                sigma: -1.0,
                ..base.clone()
            },
            ExperimentConfig {
                operator: OperatorSource::File {
                    path: "/nonexistent/op.json".into(),
                },
                ..base.clone()
            },
        ];
        for c in cases {
            assert!(c.validate().is_err(), "{c:?}");
        }
    }

    #[test]
    fn zero_trials_marks_aggregates_undefined() {
        let cfg = ExperimentConfig {
            trials: 0,
            ..ExperimentConfig::uniqueness_replica(vec![vec![1, 2, 3]])
        };
        let r = run_reconstruct(&cfg).unwrap();
        assert!(r.rows.is_empty());
        assert_eq!(r.curve[0].p_i, None);
        let mut buf = Vec::new();
        r.write_curve_csv(&mut buf).unwrap();
        assert!(String::from_utf8(buf)
            .unwrap()
            .contains("3,undefined,undefined"));
    }
}
