//! Forward simulation of unsigned space-time samples `|<A^t f, phi_i>|^2`
//! with optional additive Gaussian noise.

use std::io::{BufRead, Write};

use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{dim_mismatch, Error, Result};
use crate::injectivity::FunctionalSet;
use crate::rng::{stream, TAG_NOISE};
use crate::spectral::OperatorSpec;

pub const MEASUREMENT_SCHEMA: &str = "phaseless-measurements/v1";

/// Samples `y[t][k]` for `t = 0..=max_time` and functional `k`.
///
/// `labels[k]` names functional `k` in files and noise streams: the location
/// for point evaluations, the index otherwise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasurementRecord {
    pub n: usize,
    pub max_time: usize,
    pub labels: Vec<usize>,
    pub functionals: FunctionalSet,
    pub noise_sigma: f64,
    pub seed: u64,
    pub y: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub clean: Option<Vec<Vec<f64>>>,
}

impl MeasurementRecord {
    pub fn times(&self) -> usize {
        self.max_time + 1
    }

    pub fn len(&self) -> usize {
        self.times() * self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Point-evaluation locations, when every functional is some `e_i`.
    pub fn locations(&self) -> Option<&[usize]> {
        standard_locations(&self.functionals).map(|_| self.labels.as_slice())
    }

    /// The record restricted to `t <= max_time`.
    pub fn truncated(&self, max_time: usize) -> Result<Self> {
        if max_time > self.max_time {
            return Err(Error::InvalidArgument(format!(
                "cannot extend a record from L = {} to {max_time}",
                self.max_time
            )));
        }
        let mut out = self.clone();
        out.max_time = max_time;
        out.y.truncate(max_time + 1);
        if let Some(c) = &mut out.clean {
            c.truncate(max_time + 1);
        }
        Ok(out)
    }

    /// Columnar text: `#`-prefixed header lines, then `t,i,y[,clean]` rows.
    pub fn write_text<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "# schema={MEASUREMENT_SCHEMA}")?;
        writeln!(w, "# n={}", self.n)?;
        writeln!(w, "# L={}", self.max_time)?;
        writeln!(w, "# I={}", join(&self.labels))?;
        writeln!(w, "# sigma={}", self.noise_sigma)?;
        writeln!(w, "# seed={}", self.seed)?;
        if standard_locations(&self.functionals).is_none() {
            for (label, v) in self.labels.iter().zip(&self.functionals.vectors) {
                writeln!(w, "# phi={label}:{}", join(v))?;
            }
        }
        let mut csv = csv::Writer::from_writer(w);
        if self.clean.is_some() {
            csv.write_record(["t", "i", "y", "clean"])?;
        } else {
            csv.write_record(["t", "i", "y"])?;
        }
        for t in 0..self.times() {
            for (k, label) in self.labels.iter().enumerate() {
                let mut row = vec![t.to_string(), label.to_string(), self.y[t][k].to_string()];
                if let Some(c) = &self.clean {
                    row.push(c[t][k].to_string());
                }
                csv.write_record(&row)?;
            }
        }
        csv.flush()?;
        Ok(())
    }

    pub fn read_text<R: BufRead>(r: R) -> Result<Self> {
        let mut header = Vec::new();
        let mut body = String::new();
        for line in r.lines() {
            let line = line?;
            match line.strip_prefix('#') {
                Some(h) => header.push(h.trim().to_string()),
                None => {
                    body.push_str(&line);
                    body.push('\n');
                }
            }
        }
        let field = |key: &str| -> Result<&str> {
            header
                .iter()
                .find_map(|h| h.strip_prefix(key).and_then(|s| s.strip_prefix('=')))
                .ok_or_else(|| Error::Parse(format!("missing header field {key}")))
        };
        let schema = field("schema")?;
        if schema != MEASUREMENT_SCHEMA {
            return Err(Error::Parse(format!("unknown schema {schema}")));
        }
        let n: usize = parse(field("n")?)?;
        let max_time: usize = parse(field("L")?)?;
        let labels: Vec<usize> = split(field("I")?)?;
        let noise_sigma: f64 = parse(field("sigma")?)?;
        let seed: u64 = parse(field("seed")?)?;
        let phis: Vec<&String> = header.iter().filter(|h| h.starts_with("phi=")).collect();
        let functionals = if phis.is_empty() {
            FunctionalSet::standard_basis(n, &labels)?
        } else {
            let mut vectors = Vec::new();
            for (h, &label) in phis.iter().zip(&labels) {
                let (l, v) = h["phi=".len()..]
                    .split_once(':')
                    .ok_or_else(|| Error::Parse(format!("bad functional line {h}")))?;
                if parse::<usize>(l)? != label {
                    return Err(Error::Parse(format!("functional {l} out of order")));
                }
                vectors.push(split(v)?);
            }
            FunctionalSet::new(vectors)?
        };
        if functionals.len() != labels.len() || functionals.dim() != n {
            return Err(dim_mismatch("functionals do not match the header"));
        }

        let mut rdr = csv::Reader::from_reader(body.as_bytes());
        let has_clean = rdr.headers()?.iter().any(|h| h == "clean");
        let m = labels.len();
        let mut y = vec![vec![f64::NAN; m]; max_time + 1];
        let mut clean = has_clean.then(|| vec![vec![f64::NAN; m]; max_time + 1]);
        let mut seen = 0usize;
        for row in rdr.records() {
            let row = row?;
            let t: usize = parse(row.get(0).unwrap_or(""))?;
            let label: usize = parse(row.get(1).unwrap_or(""))?;
            let k = labels
                .iter()
                .position(|&l| l == label)
                .ok_or_else(|| Error::Parse(format!("row for unknown location {label}")))?;
            if t > max_time {
                return Err(Error::Parse(format!("row time {t} exceeds L = {max_time}")));
            }
            if !y[t][k].is_nan() {
                return Err(Error::Parse(format!("duplicate row ({t}, {label})")));
            }
            y[t][k] = parse(row.get(2).unwrap_or(""))?;
            if let Some(c) = &mut clean {
                c[t][k] = parse(row.get(3).unwrap_or(""))?;
            }
            seen += 1;
        }
        if seen != (max_time + 1) * m {
            return Err(Error::Parse(format!(
                "expected {} rows, found {seen}",
                (max_time + 1) * m
            )));
        }
        Ok(Self {
            n,
            max_time,
            labels,
            functionals,
            noise_sigma,
            seed,
            y,
            clean,
        })
    }
}

fn join<T: ToString>(v: &[T]) -> String {
    v.iter().map(T::to_string).collect::<Vec<_>>().join(",")
}

fn parse<T: std::str::FromStr>(s: &str) -> Result<T> {
    s.trim()
        .parse()
        .map_err(|_| Error::Parse(format!("cannot parse {s:?}")))
}

fn split<T: std::str::FromStr>(s: &str) -> Result<Vec<T>> {
    if s.trim().is_empty() {
        return Ok(Vec::new());
    }
    s.split(',').map(parse).collect()
}

/// Locations `i` when every functional is exactly `e_i`.
pub fn standard_locations(phi: &FunctionalSet) -> Option<Vec<usize>> {
    phi.vectors
        .iter()
        .map(|v| {
            let mut hit = None;
            for (i, &x) in v.iter().enumerate() {
                match x {
                    0.0 => {}
                    1.0 if hit.is_none() => hit = Some(i),
                    _ => return None,
                }
            }
            hit
        })
        .collect()
}

/// `<A^t f, phi_k>` for `t = 0..=max_time`, by repeated application of `A`.
pub fn sample_inner_products(
    spec: &OperatorSpec,
    f: &[f64],
    phi: &FunctionalSet,
    max_time: usize,
) -> Result<Vec<Vec<f64>>> {
    let n = spec.n();
    if f.len() != n {
        return Err(dim_mismatch(format!(
            "signal has length {}, expected {n}",
            f.len()
        )));
    }
    phi.validate()?;
    if phi.dim() != n {
        return Err(dim_mismatch(format!(
            "functionals have length {}, expected {n}",
            phi.dim()
        )));
    }
    let mut x = f.to_vec();
    let mut out = Vec::with_capacity(max_time + 1);
    for t in 0..=max_time {
        if t > 0 {
            x = spec.apply(&x);
        }
        out.push(
            phi.vectors
                .iter()
                .map(|p| p.iter().zip(&x).map(|(a, b)| a * b).sum())
                .collect(),
        );
    }
    Ok(out)
}

/// `y(t, i) = |<A^t f, phi_i>|^2 + e(t, i)` with `e ~ N(0, sigma^2)`.
///
/// Each cell draws its noise from its own stream keyed by `(seed, t, i)`,
/// so longer records extend shorter ones. Noisy values are not clamped.
pub fn simulate(
    spec: &OperatorSpec,
    f: &[f64],
    phi: &FunctionalSet,
    max_time: usize,
    sigma: f64,
    seed: u64,
) -> Result<MeasurementRecord> {
    if !(sigma >= 0.0) || !sigma.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "noise level must be finite and nonnegative, got {sigma}"
        )));
    }
    let s = sample_inner_products(spec, f, phi, max_time)?;
    let clean: Vec<Vec<f64>> = s
        .iter()
        .map(|row| row.iter().map(|v| v * v).collect())
        .collect();
    let labels = standard_locations(phi).unwrap_or_else(|| (0..phi.len()).collect());
    let y = if sigma > 0.0 {
        let normal = Normal::new(0.0, sigma)
            .map_err(|e| Error::InvalidArgument(format!("noise distribution: {e}")))?;
        clean
            .iter()
            .enumerate()
            .map(|(t, row)| {
                row.iter()
                    .zip(&labels)
                    .map(|(c, &label)| {
                        let mut rng = stream(seed, &[TAG_NOISE, t as u64, label as u64]);
                        c + normal.sample(&mut rng)
                    })
                    .collect()
            })
            .collect()
    } else {
        clean.clone()
    };
    Ok(MeasurementRecord {
        n: spec.n(),
        max_time,
        labels,
        functionals: phi.clone(),
        noise_sigma: sigma,
        seed,
        y,
        clean: Some(clean),
    })
}

/// `v = sum (clean(t, i) - y(t, i))^2`, the success cutoff under noise.
pub fn noise_threshold(record: &MeasurementRecord) -> Result<f64> {
    let clean = record
        .clean
        .as_ref()
        .ok_or_else(|| Error::InvalidArgument("record has no clean values".into()))?;
    Ok(clean
        .iter()
        .zip(&record.y)
        .flat_map(|(c, y)| c.iter().zip(y).map(|(a, b)| (a - b) * (a - b)))
        .sum())
}
