//! Feasibility sweeps over ball and 3-D annulus families.

use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::{find_feasible_constants, EstimatorConfig};
use crate::digest::digest_of;
use crate::error::{Error, Result};
use crate::geometry::{DomainSpec, Partition, Point};
use crate::oracles::AnnulusSpec3D;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Family {
    /// `B_T(0) ⊂ ℝᵈ`; δ is ignored.
    Ball { dim: usize },
    /// `A(δ, T) ⊂ ℝ³`.
    Annulus3d,
}

/// How `D₁ = A(r, R)` is placed inside the parent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum PartitionRule {
    /// `r` and `R` at the given fractions of the radial interval of the parent.
    Fractions { inner: f64, outer: f64 },
    /// `r` and `R` at fractions of `(z*, T)`, where `z*` maximises the exit
    /// time, so `D₂` always contains the sphere `|x| = z*`.
    AvoidArgmax { inner: f64, outer: f64 },
}

impl PartitionRule {
    fn fractions(&self) -> (f64, f64) {
        match *self {
            PartitionRule::Fractions { inner, outer } | PartitionRule::AvoidArgmax { inner, outer } => (inner, outer),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRanges {
    #[serde(default)]
    pub delta: Vec<f64>,
    pub outer: Vec<f64>,
    pub p: Vec<f64>,
    pub lambda: Vec<f64>,
}

/// `(δ, T, p, λ)`; `δ` is `None` for balls.
type Vertex = (Option<f64>, f64, f64, f64);

impl SweepRanges {
    fn vertices(&self, family: Family) -> Result<Vec<Vertex>> {
        let finite = |v: &[f64], name: &str| -> Result<()> {
            if v.is_empty() || v.iter().any(|x| !x.is_finite()) {
                return Err(Error::input(format!("sweep range `{name}` must be a non-empty list of finite values")));
            }
            Ok(())
        };
        finite(&self.outer, "outer")?;
        finite(&self.p, "p")?;
        finite(&self.lambda, "lambda")?;
        let deltas: Vec<Option<f64>> = match family {
            Family::Ball { .. } => vec![None],
            Family::Annulus3d => {
                finite(&self.delta, "delta")?;
                self.delta.iter().copied().map(Some).collect()
            }
        };
        let mut out = Vec::new();
        for &delta in &deltas {
            for &t in &self.outer {
                for &p in &self.p {
                    for &lambda in &self.lambda {
                        out.push((delta, t, p, lambda));
                    }
                }
            }
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub key: String,
    pub delta: Option<f64>,
    pub outer: f64,
    pub p: f64,
    pub lambda: f64,
    pub feasible: bool,
    pub m: Option<f64>,
    #[serde(rename = "M")]
    pub big_m: Option<f64>,
    pub failing: Vec<String>,
    pub margins: Option<[f64; 3]>,
    pub tainted: bool,
    pub error: Option<String>,
}

fn build_partition(family: Family, rule: PartitionRule, delta: Option<f64>, outer: f64) -> Result<Partition> {
    let (fi, fo) = rule.fractions();
    if !(0.0 < fi && fi < fo && fo < 1.0) {
        return Err(Error::input(format!("partition fractions need 0 < inner < outer < 1, got {fi}, {fo}")));
    }
    let (parent, lo) = match family {
        Family::Ball { dim } => (DomainSpec::ball(Point::origin(dim), outer)?, 0.0),
        Family::Annulus3d => {
            let delta = delta.ok_or_else(|| Error::input("annulus family needs delta"))?;
            let spec = AnnulusSpec3D::new(delta, outer)?;
            let lo = match rule {
                PartitionRule::AvoidArgmax { .. } => spec.argmax_radius(),
                PartitionRule::Fractions { .. } => delta,
            };
            (DomainSpec::annulus(Point::origin(3), delta, outer)?, lo)
        }
    };
    let r = lo + fi * (outer - lo);
    let big_r = lo + fo * (outer - lo);
    let d1 = DomainSpec::annulus(Point::origin(parent.dim()), r, big_r)?;
    Partition::new(d1, parent)
}

fn row_seed(key: &str) -> u64 {
    u64::from_str_radix(key, 16).unwrap_or(0)
}

fn run_row(family: Family, rule: PartitionRule, cfg: &EstimatorConfig, key: String, (delta, outer, p, lambda): (Option<f64>, f64, f64, f64)) -> SweepRow {
    let mut row =
        SweepRow { key, delta, outer, p, lambda, feasible: false, m: None, big_m: None, failing: Vec::new(), margins: None, tainted: false, error: None };
    let mut cfg = cfg.clone();
    cfg.params = cfg.params.with_seed(cfg.params.seed ^ row_seed(&row.key));
    let result = build_partition(family, rule, delta, outer).and_then(|part| find_feasible_constants(&part, lambda, p, &cfg));
    match result {
        Ok(f) => {
            row.feasible = f.constants.is_some();
            row.m = Some(f.m);
            row.big_m = Some(f.big_m);
            row.failing = f.failing;
            row.margins = Some([f.report.cond1.margin, f.report.cond2.margin, f.report.cond3.margin]);
            row.tainted = f.report.tainted;
        }
        Err(e) => row.error = Some(e.to_string()),
    }
    row
}

fn load_rows(path: &Path) -> Result<Vec<SweepRow>> {
    if !path.exists() {
        return Ok(Vec::new());
    }
    let mut rows = Vec::new();
    for line in BufReader::new(File::open(path)?).lines() {
        let line = line?;
        if !line.trim().is_empty() {
            rows.push(serde_json::from_str(&line)?);
        }
    }
    Ok(rows)
}

/// One row per grid vertex, in vertex order. With a `store`, rows already
/// present under the same key are reused and new rows are appended, so an
/// interrupted sweep resumes where it stopped.
pub fn feasibility_sweep(family: Family, ranges: &SweepRanges, rule: PartitionRule, cfg: &EstimatorConfig, store: Option<&Path>) -> Result<Vec<SweepRow>> {
    let vertices = ranges.vertices(family)?;
    let done = match store {
        Some(path) => load_rows(path)?,
        None => Vec::new(),
    };
    let keyed: Vec<(String, Vertex)> = vertices
        .into_iter()
        .map(|v| {
            let key = digest_of(&json!({"family": family, "rule": rule, "vertex": [v.0, v.1, v.2, v.3], "cfg": cfg}));
            (key, v)
        })
        .collect();
    let fresh: Vec<SweepRow> =
        keyed.par_iter().filter(|(key, _)| !done.iter().any(|r| &r.key == key)).map(|(key, v)| run_row(family, rule, cfg, key.clone(), *v)).collect();
    if let Some(path) = store {
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir)?;
        }
        let mut file = OpenOptions::new().create(true).append(true).open(path)?;
        for row in &fresh {
            writeln!(file, "{}", serde_json::to_string(row)?)?;
        }
    }
    Ok(keyed.iter().filter_map(|(key, _)| done.iter().chain(fresh.iter()).find(|r| &r.key == key).cloned()).collect())
}
