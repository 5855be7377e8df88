//! Monte Carlo estimates of `E_x[τ_D]`, `Λ_D[V](x)` and `G_D f(x)`, and
//! their extrema over finite grids.
//!
//! Paths are processed in fixed-size chunks keyed by path index. Chunk
//! moments are merged in chunk order, so an estimate is bit-identical for any
//! size of the rayon pool it runs in.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::digest::digest_of;
use crate::error::{Error, Result};
use crate::geometry::{DomainSpec, Point, Region};
use crate::simulate::{exit_sample, functional_sample, occupation_sample, PathOutcome, ScalarField, SimParams};

const CHUNK: u64 = 256;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    /// Sample standard deviation over √n_paths.
    pub std_error: f64,
    /// Paths that exited and entered the mean.
    pub n_paths: u64,
    /// Fraction of requested paths cut off at `max_steps`; these are excluded
    /// from `mean`.
    pub truncated_fraction: f64,
    pub config_digest: String,
}

impl Estimate {
    /// `|mean − reference|` in units of the standard error.
    pub fn z_score(&self, reference: f64) -> f64 {
        (self.mean - reference) / self.std_error
    }
}

/// Welford moments of completed paths plus a truncation count.
#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    n: u64,
    mean: f64,
    m2: f64,
    truncated: u64,
}

impl Moments {
    fn push(&mut self, o: &PathOutcome) {
        if o.truncated {
            self.truncated += 1;
            return;
        }
        self.n += 1;
        let delta = o.functional_value - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (o.functional_value - self.mean);
    }

    fn merge(self, other: Moments) -> Moments {
        if other.n == 0 {
            return Moments { truncated: self.truncated + other.truncated, ..self };
        }
        if self.n == 0 {
            return Moments { truncated: self.truncated + other.truncated, ..other };
        }
        let n = self.n + other.n;
        let delta = other.mean - self.mean;
        let mean = self.mean + delta * other.n as f64 / n as f64;
        let m2 = self.m2 + other.m2 + delta * delta * self.n as f64 * other.n as f64 / n as f64;
        Moments { n, mean, m2, truncated: self.truncated + other.truncated }
    }

    fn into_estimate(self, requested: u64, config_digest: String) -> Estimate {
        let (mean, std_error) = match self.n {
            0 => (f64::NAN, f64::NAN),
            1 => (self.mean, f64::NAN),
            n => (self.mean, (self.m2 / (n - 1) as f64).sqrt() / (n as f64).sqrt()),
        };
        Estimate { mean, std_error, n_paths: self.n, truncated_fraction: self.truncated as f64 / requested as f64, config_digest }
    }
}

/// Runs paths `0..n` in parallel and merges their moments in index order.
fn run_paths<F>(n: u64, sample: F) -> Result<Moments>
where
    F: Fn(u64) -> Result<PathOutcome> + Sync,
{
    let chunks = n.div_ceil(CHUNK);
    let parts: Vec<Result<Moments>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut m = Moments::default();
            for i in c * CHUNK..((c + 1) * CHUNK).min(n) {
                m.push(&sample(i)?);
            }
            Ok(m)
        })
        .collect();
    parts.into_iter().try_fold(Moments::default(), |acc, m| Ok(acc.merge(m?)))
}

fn check_n(n: u64) -> Result<()> {
    if n < 2 {
        return Err(Error::input(format!("need at least 2 paths, got {n}")));
    }
    Ok(())
}

/// Monte Carlo `E_x[τ_D]`. Works with either scheme.
pub fn expected_exit_time(domain: &DomainSpec, x: &Point, params: &SimParams, n: u64) -> Result<Estimate> {
    check_n(n)?;
    let m = run_paths(n, |i| exit_sample(domain, x, params, i))?;
    let digest = digest_of(&json!({"op": "exit", "domain": domain, "x": x, "params": params, "n": n}));
    Ok(m.into_estimate(n, digest))
}

/// Monte Carlo `Λ_D[V](x)`, the expected time spent in `region` before exit.
pub fn expected_occupation<R: Region + ?Sized>(domain: &DomainSpec, region: &R, x: &Point, params: &SimParams, n: u64) -> Result<Estimate> {
    check_n(n)?;
    let m = run_paths(n, |i| occupation_sample(domain, region, x, params, i))?;
    let digest = digest_of(&json!({"op": "occupation", "domain": domain, "x": x, "params": params, "n": n}));
    Ok(m.into_estimate(n, digest))
}

/// Monte Carlo `G_D f(x) = E_x[∫₀^τ f(W_t) dt]`.
pub fn green_apply<G: ScalarField + ?Sized>(domain: &DomainSpec, f: &G, x: &Point, params: &SimParams, n: u64) -> Result<Estimate> {
    check_n(n)?;
    let m = run_paths(n, |i| functional_sample(domain, f, x, params, i))?;
    let digest = digest_of(&json!({"op": "green", "domain": domain, "x": x, "params": params, "n": n}));
    Ok(m.into_estimate(n, digest))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Sup,
    Inf,
}

/// The pointwise quantity whose extremum is taken.
#[derive(Clone, Copy)]
pub enum Quantity<'a> {
    ExitTime,
    Occupation(&'a dyn Region),
    Green(&'a dyn ScalarField),
}

impl Quantity<'_> {
    pub fn estimate(&self, domain: &DomainSpec, x: &Point, params: &SimParams, n: u64) -> Result<Estimate> {
        match *self {
            Quantity::ExitTime => expected_exit_time(domain, x, params, n),
            Quantity::Occupation(region) => expected_occupation(domain, region, x, params, n),
            Quantity::Green(f) => green_apply(domain, f, x, params, n),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtremumEstimate {
    pub value: f64,
    pub arg_point: Point,
    /// Standard error of the estimate at `arg_point`.
    pub std_error: f64,
    pub per_point: Vec<(Point, Estimate)>,
    pub mode: Mode,
}

impl ExtremumEstimate {
    pub fn truncated_fraction(&self) -> f64 {
        self.per_point.iter().map(|(_, e)| e.truncated_fraction).fold(0.0, f64::max)
    }
}

/// Estimates `quantity` at every grid point with the same path indices
/// (common random numbers) and returns the extremum of the means.
pub fn extremum_over(
    domain: &DomainSpec,
    quantity: &Quantity<'_>,
    mode: Mode,
    grid: &[Point],
    params: &SimParams,
    n_per_point: u64,
) -> Result<ExtremumEstimate> {
    if grid.is_empty() {
        return Err(Error::input("extremum over an empty grid"));
    }
    let per_point = grid.iter().map(|x| Ok((x.clone(), quantity.estimate(domain, x, params, n_per_point)?))).collect::<Result<Vec<_>>>()?;
    let mut best = 0;
    for (i, (_, e)) in per_point.iter().enumerate() {
        let better = match mode {
            Mode::Sup => e.mean > per_point[best].1.mean,
            Mode::Inf => e.mean < per_point[best].1.mean,
        };
        if better {
            best = i;
        }
    }
    let (arg_point, est) = &per_point[best];
    Ok(ExtremumEstimate { value: est.mean, arg_point: arg_point.clone(), std_error: est.std_error, per_point: per_point.clone(), mode })
}

/// `n` points at the midpoints of `n` equal cells of `[r_lo, r_hi]` along
/// the first axis through `center`.
pub fn radial_grid(center: &Point, r_lo: f64, r_hi: f64, n: usize) -> Vec<Point> {
    let dr = (r_hi - r_lo) / n as f64;
    (0..n).map(|i| Point::on_axis(center, r_lo + (i as f64 + 0.5) * dr)).collect()
}

/// Grid specification shared by the condition checker and the CLI.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum GridSpec {
    /// Radial midpoints; only valid for radially symmetric configurations.
    Radial {
        n: usize,
    },
    /// Uniform rejection samples.
    Sampled {
        n: usize,
        seed: u64,
    },
    Points {
        points: Vec<Point>,
    },
}

pub const DEFAULT_RADIAL_POINTS: usize = 64;
pub const DEFAULT_SAMPLED_POINTS: usize = 512;

impl GridSpec {
    pub fn len_hint(&self) -> usize {
        match self {
            GridSpec::Radial { n } | GridSpec::Sampled { n, .. } => *n,
            GridSpec::Points { points } => points.len(),
        }
    }
}
