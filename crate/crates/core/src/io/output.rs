//! File writers: CSV snapshots and series, PGM renders, and the run manifest.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::diagnostics::{LyapunovSample, PatternMetrics};
use crate::error::{Error, Result};
use crate::solver::{FieldState, Grid, ProbeSeries};

/// Formats like C's `%.12g`: 12 significant digits, trailing zeros removed,
/// exponent form outside `[1e-4, 1e12)`.
pub fn fmt_num(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.into();
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.11e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..12).contains(&exp) {
        let m = trim_fraction(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (11 - exp) as usize;
        trim_fraction(&format!("{x:.decimals$}")).to_string()
    }
}

fn trim_fraction(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FileRole {
    Snapshot,
    Render,
    Probe,
    Report,
    Metrics,
    Manifest,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    /// Relative to the output directory.
    pub path: PathBuf,
    pub role: FileRole,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "state", rename_all = "snake_case")]
pub enum RunStatus {
    Completed,
    Aborted { step: usize, field: String, node: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub artifact_version: String,
    pub command: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub config: serde_json::Value,
    pub status: RunStatus,
    pub files: Vec<ManifestEntry>,
}

/// Writes files under one directory and records each in the manifest.
#[derive(Debug)]
pub struct OutputDir {
    root: PathBuf,
    files: Vec<ManifestEntry>,
}

impl OutputDir {
    pub fn create(root: &Path) -> Result<Self> {
        fs::create_dir_all(root).map_err(|e| Error::io(root, e))?;
        Ok(OutputDir {
            root: root.to_path_buf(),
            files: Vec::new(),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn files(&self) -> &[ManifestEntry] {
        &self.files
    }

    pub fn write(&mut self, name: impl AsRef<Path>, role: FileRole, bytes: &[u8]) -> Result<()> {
        let rel = name.as_ref().to_path_buf();
        let path = self.root.join(&rel);
        fs::write(&path, bytes).map_err(|e| Error::io(&path, e))?;
        self.files.push(ManifestEntry { path: rel, role });
        Ok(())
    }

    /// Records a file written by someone else (for nested outputs).
    pub fn adopt(&mut self, rel: PathBuf, role: FileRole) {
        self.files.push(ManifestEntry { path: rel, role });
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, role: FileRole, value: &T) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.write(name, role, text.as_bytes())
    }

    /// Writes `manifest.json` (not listed in itself) and returns it.
    pub fn finish(
        self,
        command: &str,
        seed: Option<u64>,
        config: serde_json::Value,
        status: RunStatus,
    ) -> Result<RunManifest> {
        let manifest = RunManifest {
            artifact_version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            seed,
            config,
            status,
            files: self.files,
        };
        let path = self.root.join("manifest.json");
        let mut text = serde_json::to_string_pretty(&manifest)?;
        text.push('\n');
        fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
        Ok(manifest)
    }
}

/// `t,x,u,v`, one row per node.
pub fn snapshot_1d_csv(state: &FieldState, grid: &Grid) -> String {
    let mut s = String::from("t,x,u,v\n");
    let t = fmt_num(state.t);
    for i in 0..grid.node_count() {
        let _ = writeln!(
            s,
            "{t},{},{},{}",
            fmt_num(grid.coord(0, i)),
            fmt_num(state.u[i]),
            fmt_num(state.v[i])
        );
    }
    s
}

/// Grid layout: the header row holds `y\x` then the x coordinates; each
/// following row starts with its y coordinate.
pub fn field_2d_csv(field: &[f64], grid: &Grid) -> String {
    let (nx, ny) = (grid.counts()[0], grid.counts()[1]);
    let mut s = String::from("y\\x");
    for i in 0..nx {
        s.push(',');
        s.push_str(&fmt_num(grid.coord(0, i)));
    }
    s.push('\n');
    for j in 0..ny {
        s.push_str(&fmt_num(grid.coord(1, j)));
        for x in &field[j * nx..(j + 1) * nx] {
            s.push(',');
            s.push_str(&fmt_num(*x));
        }
        s.push('\n');
    }
    s
}

/// Binary 8-bit PGM, min–max normalized; the first image row is the largest y.
/// A constant field renders black.
pub fn field_pgm(field: &[f64], grid: &Grid) -> Vec<u8> {
    let (nx, ny) = (grid.counts()[0], grid.counts()[1]);
    let (lo, hi) = field.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| {
        (lo.min(x), hi.max(x))
    });
    let range = hi - lo;
    let mut out = format!("P5\n{nx} {ny}\n255\n").into_bytes();
    for j in (0..ny).rev() {
        for &x in &field[j * nx..(j + 1) * nx] {
            let level = if range > 0.0 {
                ((x - lo) / range * 255.0).round()
            } else {
                0.0
            };
            out.push(level.clamp(0.0, 255.0) as u8);
        }
    }
    out
}

pub fn probe_csv(series: &ProbeSeries) -> String {
    let mut s = String::from("t,u,v\n");
    for i in 0..series.len() {
        let _ = writeln!(
            s,
            "{},{},{}",
            fmt_num(series.t[i]),
            fmt_num(series.u[i]),
            fmt_num(series.v[i])
        );
    }
    s
}

pub fn lyapunov_csv(samples: &[LyapunovSample]) -> String {
    let mut s = String::from("t,L\n");
    for sample in samples {
        let _ = writeln!(s, "{},{}", fmt_num(sample.t), fmt_num(sample.l));
    }
    s
}

pub fn pattern_metrics_csv(rows: &[(usize, f64, PatternMetrics)]) -> String {
    let mut s = String::from("step,t,u_variance,u_min,u_max,u_extrema,v_variance,v_min,v_max,v_extrema\n");
    for (step, t, m) in rows {
        let _ = writeln!(
            s,
            "{step},{},{},{},{},{},{},{},{},{}",
            fmt_num(*t),
            fmt_num(m.u.spatial_variance),
            fmt_num(m.u.min),
            fmt_num(m.u.max),
            m.u.extrema_count,
            fmt_num(m.v.spatial_variance),
            fmt_num(m.v.min),
            fmt_num(m.v.max),
            m.v.extrema_count,
        );
    }
    s
}
