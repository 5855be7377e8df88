//! Numerical evaluation of the three existence conditions
//!
//! ```text
//! (1)  sup_{x∈D} E_x[τ_D]                                   ≤ M^{1−p}/λ
//! (2)  inf_{x∈D₁} Λ_D[D₁](x)                                ≥ m^{1−p}/λ
//! (3)  M · sup_{x∈D₂} E_x[τ_D] · (sup_{x∈D₂} Λ_D[D₂](x))^p   ≤ (m/λ)^p
//! ```
//!
//! plus the equality-saturation search for `(m, M)`, the closed-form
//! annulus inequality report, parameter sweeps and multiplicity sets.
//!
//! Exit-time extrema on balls and 3-D annuli come from the closed forms;
//! occupation extrema are always Monte Carlo.

mod multiplicity;
mod sweep;

pub use multiplicity::{multiplicity_enumerate, multiplicity_sets, MultiplicityReport, MultiplicitySet};
pub use sweep::{feasibility_sweep, Family, PartitionRule, SweepRanges, SweepRow};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::{extremum_over, radial_grid, ExtremumEstimate, Mode, Quantity, DEFAULT_RADIAL_POINTS, DEFAULT_SAMPLED_POINTS};
use crate::geometry::{DomainSpec, Partition, Point, Region};
use crate::oracles::{annulus_sup_exit_time, m_constant, AnnulusSpec3D};
use crate::simulate::SimParams;

/// Constants of the existence theorem for one partition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hypotheses {
    pub lambda: f64,
    pub p: f64,
    pub m: f64,
    #[serde(rename = "M")]
    pub big_m: f64,
    pub partition: Partition,
}

impl Hypotheses {
    pub fn new(lambda: f64, p: f64, m: f64, big_m: f64, partition: Partition) -> Result<Self> {
        check_lambda_p(lambda, p)?;
        if !(m > 0.0 && big_m > 0.0) {
            return Err(Error::input(format!("m and M must be positive, got m = {m}, M = {big_m}")));
        }
        if m > big_m {
            return Err(Error::input(format!("need m <= M, got m = {m}, M = {big_m}")));
        }
        Ok(Hypotheses { lambda, p, m, big_m, partition })
    }
}

pub(crate) fn check_lambda_p(lambda: f64, p: f64) -> Result<()> {
    if !(p > 1.0) {
        return Err(Error::input(format!("p must exceed 1, got {p}")));
    }
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::input(format!("lambda must be positive, got {lambda}")));
    }
    Ok(())
}

/// How evaluation grids are built.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum GridChoice {
    /// Radial grids for concentric radial configurations, sampled otherwise.
    Auto,
    Radial {
        n: usize,
    },
    Sampled {
        n: usize,
        seed: u64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimatorConfig {
    pub params: SimParams,
    #[serde(default = "default_paths")]
    pub n_per_point: u64,
    #[serde(default = "default_grid")]
    pub grid: GridChoice,
    /// Width of the uncertainty envelopes, in standard errors.
    #[serde(default = "default_z")]
    pub z: f64,
    /// Use closed forms for exit-time extrema on balls and 3-D annuli.
    #[serde(default = "default_true")]
    pub use_oracle: bool,
    /// Multiply the EM step by the squared domain length scale, so that
    /// paths take the same number of steps on every scale.
    #[serde(default)]
    pub step_relative_to_scale: bool,
    /// Largest tolerated truncated-path fraction before a result is tainted.
    #[serde(default = "default_taint")]
    pub taint_threshold: f64,
}

fn default_paths() -> u64 {
    4000
}
fn default_grid() -> GridChoice {
    GridChoice::Auto
}
fn default_z() -> f64 {
    3.0
}
fn default_true() -> bool {
    true
}
fn default_taint() -> f64 {
    1e-6
}

impl EstimatorConfig {
    pub fn new(params: SimParams, n_per_point: u64) -> Self {
        EstimatorConfig {
            params,
            n_per_point,
            grid: GridChoice::Auto,
            z: default_z(),
            use_oracle: true,
            step_relative_to_scale: false,
            taint_threshold: default_taint(),
        }
    }

    fn params_for(&self, domain: &DomainSpec) -> SimParams {
        if self.step_relative_to_scale {
            let l = domain.length_scale();
            self.params.scale_step(l * l)
        } else {
            self.params
        }
    }
}

/// Radial description of a concentric configuration: the parent's radial
/// interval and the (disjoint, sorted) radial intervals making up `D₁`.
#[derive(Debug, Clone)]
struct RadialSplit {
    center: Point,
    parent: (f64, f64),
    d1: Vec<(f64, f64)>,
}

impl RadialSplit {
    fn detect(partition: &Partition) -> Option<Self> {
        let center = partition.parent.radial_center()?.clone();
        let parent = partition.parent.radial_extent()?;
        let mut d1 = Vec::new();
        collect_intervals(&partition.d1, &center, &mut d1)?;
        d1.sort_by(|a, b| a.0.total_cmp(&b.0));
        if d1.windows(2).any(|w| w[1].0 < w[0].1) {
            return None;
        }
        Some(RadialSplit { center, parent, d1 })
    }

    fn d2(&self) -> Vec<(f64, f64)> {
        let mut out = Vec::new();
        let mut lo = self.parent.0;
        for &(a, b) in &self.d1 {
            if a > lo {
                out.push((lo, a));
            }
            lo = lo.max(b);
        }
        if self.parent.1 > lo {
            out.push((lo, self.parent.1));
        }
        out
    }
}

fn collect_intervals(d: &DomainSpec, center: &Point, out: &mut Vec<(f64, f64)>) -> Option<()> {
    match d {
        DomainSpec::Ball { center: c, radius } if c == center => out.push((0.0, *radius)),
        DomainSpec::Annulus { center: c, r_inner, r_outer } if c == center => out.push((*r_inner, *r_outer)),
        DomainSpec::Union { parts } => {
            for p in parts {
                collect_intervals(p, center, out)?;
            }
        }
        _ => return None,
    }
    Some(())
}

/// Radial grid over a union of intervals, `n` points split by length.
fn radial_grid_over(center: &Point, intervals: &[(f64, f64)], n: usize) -> Vec<Point> {
    let total: f64 = intervals.iter().map(|(a, b)| b - a).sum();
    intervals
        .iter()
        .flat_map(|&(a, b)| {
            let k = ((n as f64 * (b - a) / total).round() as usize).max(1);
            radial_grid(center, a, b, k)
        })
        .collect()
}

/// Rejection-sampled points of `D₂ = parent \ D₁`.
fn sampled_d2(partition: &Partition, n: usize, seed: u64) -> Result<Vec<Point>> {
    let mut batch = 4 * n;
    for round in 0..8u64 {
        let pts: Vec<Point> =
            partition.parent.sample_interior(batch, seed.wrapping_add(round))?.into_iter().filter(|x| partition.in_d2(x.coords())).take(n).collect();
        if pts.len() == n {
            return Ok(pts);
        }
        batch *= 4;
    }
    Err(Error::input("D2 is empty or too thin to sample"))
}

/// Evaluation grids for D, D₁ and D₂.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Grids {
    pub kind: String,
    pub domain: Vec<Point>,
    pub d1: Vec<Point>,
    pub d2: Vec<Point>,
}

impl Grids {
    pub fn build(partition: &Partition, choice: GridChoice) -> Result<Self> {
        let radial = RadialSplit::detect(partition);
        let sampled = |n: usize, seed: u64| -> Result<Grids> {
            Ok(Grids {
                kind: format!("sampled({n})"),
                domain: partition.parent.sample_interior(n, seed)?,
                d1: partition.d1.sample_interior(n, seed.wrapping_add(1))?,
                d2: sampled_d2(partition, n, seed.wrapping_add(2))?,
            })
        };
        match (choice, radial) {
            (GridChoice::Auto, Some(r)) => Ok(Self::radial(&r, DEFAULT_RADIAL_POINTS)),
            (GridChoice::Radial { n }, Some(r)) => Ok(Self::radial(&r, n)),
            (GridChoice::Radial { .. }, None) => Err(Error::Configuration("radial grid requested for a non-radial configuration".into())),
            (GridChoice::Auto, None) => sampled(DEFAULT_SAMPLED_POINTS, 0),
            (GridChoice::Sampled { n, seed }, _) => sampled(n, seed),
        }
    }

    fn radial(r: &RadialSplit, n: usize) -> Self {
        Grids {
            kind: format!("radial({n})"),
            domain: radial_grid_over(&r.center, &[r.parent], n),
            d1: radial_grid_over(&r.center, &r.d1, n),
            d2: radial_grid_over(&r.center, &r.d2(), n),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    Oracle,
    MonteCarlo,
}

/// A supremum or infimum with its provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Extremum {
    pub value: f64,
    pub std_error: f64,
    pub arg_point: Option<Point>,
    pub source: Source,
    pub truncated_fraction: f64,
    pub grid_points: usize,
}

impl Extremum {
    fn oracle(value: f64, arg_point: Option<Point>) -> Self {
        Extremum { value, std_error: 0.0, arg_point, source: Source::Oracle, truncated_fraction: 0.0, grid_points: 0 }
    }

    pub(crate) fn from_mc(e: ExtremumEstimate) -> Self {
        Extremum {
            value: e.value,
            std_error: e.std_error,
            truncated_fraction: e.truncated_fraction(),
            grid_points: e.per_point.len(),
            arg_point: Some(e.arg_point),
            source: Source::MonteCarlo,
        }
    }
}

/// Closed-form `sup E[τ]` over the radial intervals `set` of a ball or 3-D
/// annulus; `None` when no closed form applies.
fn oracle_sup_exit(domain: &DomainSpec, set: &[(f64, f64)]) -> Option<Extremum> {
    let center = domain.radial_center()?;
    match domain {
        DomainSpec::Ball { radius, .. } => {
            // (T² − r²)/d decreases in r
            let r = set.iter().map(|iv| iv.0).fold(f64::INFINITY, f64::min);
            let d = domain.dim() as f64;
            Some(Extremum::oracle((radius * radius - r * r) / d, Some(Point::on_axis(center, r))))
        }
        DomainSpec::Annulus { .. } => {
            let spec = AnnulusSpec3D::from_domain(domain)?;
            let z = spec.argmax_radius();
            // unimodal: the peak if covered, otherwise the best interval endpoint
            let r = if set.iter().any(|&(a, b)| a <= z && z <= b) {
                z
            } else {
                set.iter().flat_map(|&(a, b)| [a, b]).max_by(|&a, &b| spec.exit_time_at_radius(a).total_cmp(&spec.exit_time_at_radius(b)))?
            };
            Some(Extremum::oracle(spec.exit_time_at_radius(r), Some(Point::on_axis(center, r))))
        }
        _ => None,
    }
}

/// `sup_{x∈D} E_x[τ_D]`, closed form when available.
pub fn sup_exit_time(domain: &DomainSpec, cfg: &EstimatorConfig) -> Result<Extremum> {
    if cfg.use_oracle {
        match domain {
            DomainSpec::Ball { radius, center } => {
                return Ok(Extremum::oracle(radius * radius / domain.dim() as f64, Some(center.clone())));
            }
            DomainSpec::Annulus { center, .. } => {
                if let Some(spec) = AnnulusSpec3D::from_domain(domain) {
                    let (v, z) = annulus_sup_exit_time(&spec)?;
                    return Ok(Extremum::oracle(v, Some(Point::on_axis(center, z))));
                }
            }
            _ => {}
        }
    }
    let grid = match (cfg.grid, domain.radial_center(), domain.radial_extent()) {
        (GridChoice::Auto, Some(c), Some((lo, hi))) => radial_grid(c, lo, hi, DEFAULT_RADIAL_POINTS),
        (GridChoice::Radial { n }, Some(c), Some((lo, hi))) => radial_grid(c, lo, hi, n),
        (GridChoice::Sampled { n, seed }, _, _) => domain.sample_interior(n, seed)?,
        _ => domain.sample_interior(DEFAULT_SAMPLED_POINTS, 0)?,
    };
    let params = cfg.params_for(domain);
    Ok(Extremum::from_mc(extremum_over(domain, &Quantity::ExitTime, Mode::Sup, &grid, &params, cfg.n_per_point)?))
}

/// One inequality with its margin and uncertainty envelopes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionCheck {
    pub lhs: f64,
    pub rhs: f64,
    /// `rhs − lhs` for ≤-conditions, `lhs − rhs` for ≥-conditions.
    pub margin: f64,
    pub verdict: bool,
    /// Verdict with the left side pushed `z` standard errors the wrong way.
    pub conservative: bool,
    /// Verdict with the left side pushed `z` standard errors the right way.
    pub anti_conservative: bool,
    pub lhs_std_error: f64,
}

impl ConditionCheck {
    fn at_most(lhs: f64, rhs: f64, lhs_std_error: f64, worst: f64, best: f64) -> Self {
        ConditionCheck { lhs, rhs, margin: rhs - lhs, verdict: lhs <= rhs, conservative: worst <= rhs, anti_conservative: best <= rhs, lhs_std_error }
    }

    fn at_least(lhs: f64, rhs: f64, lhs_std_error: f64, worst: f64, best: f64) -> Self {
        ConditionCheck { lhs, rhs, margin: lhs - rhs, verdict: lhs >= rhs, conservative: worst >= rhs, anti_conservative: best >= rhs, lhs_std_error }
    }
}

/// Every extremum that entered the three conditions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionInputs {
    pub sup_exit_d: Extremum,
    pub inf_occupation_d1: Extremum,
    pub sup_exit_d2: Extremum,
    pub sup_occupation_d2: Extremum,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionsReport {
    pub lambda: f64,
    pub p: f64,
    pub m: f64,
    #[serde(rename = "M")]
    pub big_m: f64,
    pub cond1: ConditionCheck,
    pub cond2: ConditionCheck,
    pub cond3: ConditionCheck,
    pub z: f64,
    pub grid: String,
    pub inputs: ConditionInputs,
    /// Some estimate truncated more paths than the threshold allows.
    pub tainted: bool,
}

impl ConditionsReport {
    pub fn all_hold(&self) -> bool {
        self.cond1.verdict && self.cond2.verdict && self.cond3.verdict
    }

    /// Names of the conditions whose point verdict fails.
    pub fn failing(&self) -> Vec<String> {
        [("cond1", &self.cond1), ("cond2", &self.cond2), ("cond3", &self.cond3)].into_iter().filter(|(_, c)| !c.verdict).map(|(n, _)| n.to_string()).collect()
    }
}

/// Estimates every extremum the conditions need.
pub fn condition_inputs(partition: &Partition, cfg: &EstimatorConfig) -> Result<(ConditionInputs, String)> {
    let domain = &partition.parent;
    let grids = Grids::build(partition, cfg.grid)?;
    let params = cfg.params_for(domain);
    let n = cfg.n_per_point;
    let d2 = partition.d2();
    let d2_region: &dyn Region = &d2;

    let sup_exit_d = sup_exit_time(domain, cfg)?;
    let inf_occupation_d1 = Extremum::from_mc(extremum_over(domain, &Quantity::Occupation(&partition.d1), Mode::Inf, &grids.d1, &params, n)?);
    let oracle_d2 = if cfg.use_oracle { RadialSplit::detect(partition).and_then(|r| oracle_sup_exit(domain, &r.d2())) } else { None };
    let sup_exit_d2 = match oracle_d2 {
        Some(e) => e,
        None => Extremum::from_mc(extremum_over(domain, &Quantity::ExitTime, Mode::Sup, &grids.d2, &params, n)?),
    };
    let sup_occupation_d2 = Extremum::from_mc(extremum_over(domain, &Quantity::Occupation(d2_region), Mode::Sup, &grids.d2, &params, n)?);
    Ok((ConditionInputs { sup_exit_d, inf_occupation_d1, sup_exit_d2, sup_occupation_d2 }, grids.kind))
}

/// Evaluates the three conditions for raw constants, without requiring `m ≤ M`.
pub fn evaluate_conditions(lambda: f64, p: f64, m: f64, big_m: f64, inputs: ConditionInputs, grid: String, cfg: &EstimatorConfig) -> ConditionsReport {
    let z = cfg.z;
    let s = &inputs.sup_exit_d;
    let cond1 = ConditionCheck::at_most(s.value, big_m.powf(1.0 - p) / lambda, s.std_error, s.value + z * s.std_error, s.value - z * s.std_error);

    let i = &inputs.inf_occupation_d1;
    let cond2 = ConditionCheck::at_least(i.value, m.powf(1.0 - p) / lambda, i.std_error, i.value - z * i.std_error, i.value + z * i.std_error);

    let (a, sa) = (inputs.sup_exit_d2.value, inputs.sup_exit_d2.std_error);
    let (b, sb) = (inputs.sup_occupation_d2.value, inputs.sup_occupation_d2.std_error);
    let f = |a: f64, b: f64| big_m * a.max(0.0) * b.max(0.0).powf(p);
    let lhs3 = f(a, b);
    // delta-method standard error of M·a·b^p
    let se3 = if a > 0.0 && b > 0.0 { lhs3 * ((sa / a).powi(2) + (p * sb / b).powi(2)).sqrt() } else { 0.0 };
    let cond3 = ConditionCheck::at_most(lhs3, (m / lambda).powf(p), se3, f(a + z * sa, b + z * sb), f(a - z * sa, b - z * sb));

    let tainted = [&inputs.sup_exit_d, &inputs.inf_occupation_d1, &inputs.sup_exit_d2, &inputs.sup_occupation_d2]
        .iter()
        .any(|e| e.truncated_fraction > cfg.taint_threshold);
    ConditionsReport { lambda, p, m, big_m, cond1, cond2, cond3, z, grid, inputs, tainted }
}

/// Checks the three conditions for the given constants.
pub fn check_conditions(hyp: &Hypotheses, cfg: &EstimatorConfig) -> Result<ConditionsReport> {
    check_lambda_p(hyp.lambda, hyp.p)?;
    let (inputs, grid) = condition_inputs(&hyp.partition, cfg)?;
    Ok(evaluate_conditions(hyp.lambda, hyp.p, hyp.m, hyp.big_m, inputs, grid, cfg))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Feasibility {
    /// `(m, M)` when every condition and `m ≤ M` hold.
    pub constants: Option<(f64, f64)>,
    pub m: f64,
    #[serde(rename = "M")]
    pub big_m: f64,
    /// Failing conditions, plus `"m<=M"` when the ordering fails.
    pub failing: Vec<String>,
    pub report: ConditionsReport,
}

/// `M` saturating the first condition, nudged so the condition holds in
/// floating point.
pub fn saturate_big_m(sup_exit: f64, lambda: f64, p: f64) -> Result<f64> {
    let mut big_m = m_constant(sup_exit, lambda, p)?;
    while big_m.powf(1.0 - p) / lambda < sup_exit {
        big_m = big_m.next_down();
    }
    Ok(big_m)
}

/// `m` saturating the second condition, nudged the same way.
pub fn saturate_m(inf_occupation: f64, lambda: f64, p: f64) -> Result<f64> {
    let mut m = m_constant(inf_occupation, lambda, p)?;
    while m.powf(1.0 - p) / lambda > inf_occupation {
        m = m.next_up();
    }
    Ok(m)
}

/// Equality-saturation search: `M` from the first condition, `m` from the
/// second, then the third condition and `m ≤ M` decide feasibility.
pub fn find_feasible_constants(partition: &Partition, lambda: f64, p: f64, cfg: &EstimatorConfig) -> Result<Feasibility> {
    check_lambda_p(lambda, p)?;
    let (inputs, grid) = condition_inputs(partition, cfg)?;
    let big_m = saturate_big_m(inputs.sup_exit_d.value, lambda, p)?;
    if !(inputs.inf_occupation_d1.value > 0.0) {
        return Err(Error::input("infimum of the D1 occupation time is zero; D1 is too small for the grid"));
    }
    let m = saturate_m(inputs.inf_occupation_d1.value, lambda, p)?;
    let report = evaluate_conditions(lambda, p, m, big_m, inputs, grid, cfg);
    let mut failing = report.failing();
    if m > big_m {
        failing.push("m<=M".to_string());
    }
    let constants = failing.is_empty().then_some((m, big_m));
    Ok(Feasibility { constants, m, big_m, failing, report })
}

/// Lower bound on `m^{p²}` that the third condition forces on a ball of
/// radius `T` in ℝᵈ when `M = (λT²/d)^{1/(1−p)}`:
/// `(λT²/d)^{(2−p)/(1−p)} / λ`.
pub fn ball_cond3_bound(radius: f64, d: usize, lambda: f64, p: f64) -> f64 {
    (lambda * radius * radius / d as f64).powf((2.0 - p) / (1.0 - p)) / lambda
}

/// Both sides of the closed-form annulus chain
/// `M^{2−p²} < (T² + Tδ + δ²)^{(2−p²)/(1−p)}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Example2Report {
    pub delta: f64,
    pub outer: f64,
    pub p: f64,
    pub lambda: f64,
    pub sup_exit: f64,
    #[serde(rename = "M")]
    pub big_m: f64,
    pub exponent: f64,
    pub m_exponent_side: f64,
    pub bound_side: f64,
    /// Whether `m_exponent_side < bound_side`. Reported, never asserted.
    pub printed_direction_holds: bool,
}

pub fn example2_inequality_report(delta: f64, outer: f64, p: f64, lambda: f64) -> Result<Example2Report> {
    if !(p > 1.0 && p < std::f64::consts::SQRT_2) {
        return Err(Error::input(format!("p must lie in (1, sqrt 2), got {p}")));
    }
    check_lambda_p(lambda, p)?;
    let spec = AnnulusSpec3D::new(delta, outer)?;
    let (sup_exit, _) = annulus_sup_exit_time(&spec)?;
    let big_m = m_constant(sup_exit, lambda, p)?;
    let exponent = 2.0 - p * p;
    let m_exponent_side = big_m.powf(exponent);
    let bound_side = (outer * outer + outer * delta + delta * delta).powf(exponent / (1.0 - p));
    Ok(Example2Report {
        delta,
        outer,
        p,
        lambda,
        sup_exit,
        big_m,
        exponent,
        m_exponent_side,
        bound_side,
        printed_direction_holds: m_exponent_side < bound_side,
    })
}
