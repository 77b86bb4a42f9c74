//! Series ingestion: `t,x` CSV files and RR-interval lists, optionally cut
//! into segments at user-supplied indices.

use std::io::Write;
use std::path::Path;

use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pathgen::{fmt17, Provenance, SampledPath};
use crate::rng::{stream, Purpose};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SeriesSource {
    /// `t,x` CSV with a header row.
    TxCsv,
    /// One positive RR interval per line; blank lines and `#` comments are skipped.
    RrList,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RrMode {
    /// `x_k = 1 / RR_k` in scaled units.
    #[default]
    InstantaneousRate,
    /// `x_k` = partial sums of the instantaneous rates.
    Cumulative,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeriesIngest {
    pub source: SeriesSource,
    #[serde(default)]
    pub rr_mode: RrMode,
    /// Segment start indices into the series; 0 and the length are implied.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub boundaries: Option<Vec<usize>>,
    /// Multiplies times (and RR intervals): `1/60` turns seconds into minutes.
    #[serde(default = "unit")]
    pub unit_scale: f64,
}

fn unit() -> f64 {
    1.0
}

impl SeriesIngest {
    pub fn rr(mode: RrMode, unit_scale: f64) -> Self {
        SeriesIngest {
            source: SeriesSource::RrList,
            rr_mode: mode,
            boundaries: None,
            unit_scale,
        }
    }

    /// Values are re-based to start at 0 for integrated series only; an
    /// instantaneous rate keeps its level.
    fn rebase_values(&self) -> bool {
        !(self.source == SeriesSource::RrList && self.rr_mode == RrMode::InstantaneousRate)
    }
}

pub fn read_rr(path: &Path) -> Result<Vec<f64>> {
    let body = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_rr(&body)
}

pub fn parse_rr(body: &str) -> Result<Vec<f64>> {
    let mut rr = Vec::new();
    for (i, raw) in body.lines().enumerate() {
        let line = i + 1;
        let text = raw.split('#').next().unwrap_or("").trim();
        if text.is_empty() {
            continue;
        }
        let v: f64 = text.parse().map_err(|e| Error::Ingest {
            line,
            reason: format!("{text:?}: {e}"),
        })?;
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::Ingest {
                line,
                reason: format!("RR interval must be positive, got {v}"),
            });
        }
        rr.push(v);
    }
    if rr.len() < 2 {
        return Err(Error::Ingest {
            line: 0,
            reason: "need at least two RR intervals".into(),
        });
    }
    Ok(rr)
}

pub fn write_rr(path: &Path, rr: &[f64]) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = std::io::BufWriter::new(file);
    let mut write = || -> std::io::Result<()> {
        for v in rr {
            writeln!(out, "{}", fmt17(*v))?;
        }
        out.flush()
    };
    write().map_err(|e| Error::io(path, e))
}

/// Beat times and values of an RR list before segmentation:
/// `t_k = s Σ_{j≤k} RR_j` and `x_k = 1 / (s RR_k)` or its partial sums.
pub fn rr_series(rr: &[f64], mode: RrMode, unit_scale: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    check_scale(unit_scale)?;
    if let Some(k) = rr.iter().position(|v| !(*v > 0.0 && v.is_finite())) {
        return Err(Error::Ingest {
            line: k + 1,
            reason: format!("RR interval must be positive, got {}", rr[k]),
        });
    }
    let mut t = 0.0;
    let times: Vec<f64> = rr
        .iter()
        .map(|v| {
            t += v * unit_scale;
            t
        })
        .collect();
    let rate = rr.iter().map(|v| 1.0 / (v * unit_scale));
    let values = match mode {
        RrMode::InstantaneousRate => rate.collect(),
        RrMode::Cumulative => {
            let mut acc = 0.0;
            rate.map(|x| {
                acc += x;
                acc
            })
            .collect()
        }
    };
    Ok((times, values))
}

fn check_scale(s: f64) -> Result<()> {
    if !(s > 0.0 && s.is_finite()) {
        return Err(Error::InvalidConfig(format!("unit scale must be positive, got {s}")));
    }
    Ok(())
}

/// Half-open index ranges `[b_i, b_{i+1})` covering `0..n`.
pub fn segment_ranges(boundaries: Option<&[usize]>, n: usize) -> Result<Vec<(usize, usize)>> {
    let mut b: Vec<usize> = boundaries.map(<[usize]>::to_vec).unwrap_or_default();
    if b.first() != Some(&0) {
        b.insert(0, 0);
    }
    if b.last() != Some(&n) {
        b.push(n);
    }
    if let Some(w) = b.windows(2).find(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidConfig(format!(
            "segment boundaries must be strictly increasing, got {} then {}",
            w[0], w[1]
        )));
    }
    if b[b.len() - 1] > n {
        return Err(Error::InvalidConfig(format!(
            "segment boundary {} exceeds the series length {n}",
            b[b.len() - 1]
        )));
    }
    Ok(b.windows(2).map(|w| (w[0], w[1])).collect())
}

/// Cuts a series into segments, each with `t₀ = 0` (and `x₀ = 0` when
/// `rebase_values`).
pub fn split_segments(
    times: &[f64],
    values: &[f64],
    boundaries: Option<&[usize]>,
    rebase_values: bool,
    file: &str,
) -> Result<Vec<SampledPath>> {
    segment_ranges(boundaries, times.len())?
        .into_iter()
        .enumerate()
        .map(|(segment, (lo, hi))| {
            let (t0, x0) = (times[lo], if rebase_values { values[lo] } else { 0.0 });
            SampledPath::new(
                times[lo..hi].iter().map(|t| t - t0).collect(),
                values[lo..hi].iter().map(|x| x - x0).collect(),
                Provenance::Ingested {
                    file: file.to_string(),
                    segment,
                },
            )
            .map_err(|e| Error::InvalidConfig(format!("segment {segment} ({lo}..{hi}): {e}")))
        })
        .collect()
}

/// One path per segment.
pub fn ingest_series(ingest: &SeriesIngest, file: &Path) -> Result<Vec<SampledPath>> {
    check_scale(ingest.unit_scale)?;
    let (times, values) = match ingest.source {
        SeriesSource::RrList => rr_series(&read_rr(file)?, ingest.rr_mode, ingest.unit_scale)?,
        SeriesSource::TxCsv => {
            let p = SampledPath::read_csv(file)?;
            (
                p.times().iter().map(|t| t * ingest.unit_scale).collect(),
                p.values().to_vec(),
            )
        }
    };
    split_segments(
        &times,
        &values,
        ingest.boundaries.as_deref(),
        ingest.rebase_values(),
        &file.display().to_string(),
    )
}

/// Gaussian RR intervals (seconds), redrawn when not positive.
pub fn synthetic_rr(n: usize, mean: f64, sd: f64, seed: u64) -> Result<Vec<f64>> {
    if !(mean > 0.0) || !(sd >= 0.0) {
        return Err(Error::InvalidConfig(format!(
            "synthetic RR needs mean > 0 and sd >= 0 (mean = {mean}, sd = {sd})"
        )));
    }
    let normal = Normal::new(mean, sd).map_err(|e| Error::InvalidConfig(e.to_string()))?;
    let mut rng = stream(seed, 0, Purpose::Aux);
    Ok((0..n)
        .map(|_| loop {
            let v = normal.sample(&mut rng);
            if v > 0.0 {
                break v;
            }
        })
        .collect())
}
