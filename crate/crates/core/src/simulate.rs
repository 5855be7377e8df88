//! Single-path Brownian kernels under the generator-½Δ convention
//! (`W_t = x + B_t`, standard Brownian motion).
//!
//! Each sample is a pure function of `(domain, x0, params, path_index)`: the
//! path's random stream is keyed by the run seed and the path index, never by
//! the worker that happens to run it.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{DomainSpec, Point, Region};
use crate::rng::{stream_rng, PathRng};

/// Time discretization of the Brownian path.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Scheme {
    /// `W_{k+1} = W_k + √h·ξ_k`; exit declared at the first sample outside D.
    EulerMaruyama { step_h: f64 },
    /// Jumps to the largest inscribed sphere until within `eps_shell` of ∂D.
    WalkOnSpheres { eps_shell: f64 },
}

impl Scheme {
    pub fn name(&self) -> &'static str {
        match self {
            Scheme::EulerMaruyama { .. } => "euler_maruyama",
            Scheme::WalkOnSpheres { .. } => "walk_on_spheres",
        }
    }
}

pub const DEFAULT_STEP: f64 = 1e-4;
pub const DEFAULT_MAX_STEPS: u64 = 10_000_000;
pub const DEFAULT_INTEGRAND_CAP: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimParams {
    pub scheme: Scheme,
    #[serde(default = "default_max_steps")]
    pub max_steps: u64,
    #[serde(default)]
    pub seed: u64,
    /// Pair path `2k+1` with path `2k`, using negated increments.
    #[serde(default)]
    pub antithetic: bool,
    /// Brownian-bridge exit correction. Not implemented; must stay off.
    #[serde(default)]
    pub bridge_correction: bool,
    /// Largest |g| accepted from an integrand along a path.
    #[serde(default = "default_cap")]
    pub integrand_cap: f64,
}

fn default_max_steps() -> u64 {
    DEFAULT_MAX_STEPS
}

fn default_cap() -> f64 {
    DEFAULT_INTEGRAND_CAP
}

impl Default for SimParams {
    fn default() -> Self {
        SimParams::euler(DEFAULT_STEP, 0)
    }
}

impl SimParams {
    pub fn euler(step_h: f64, seed: u64) -> Self {
        SimParams {
            scheme: Scheme::EulerMaruyama { step_h },
            max_steps: DEFAULT_MAX_STEPS,
            seed,
            antithetic: false,
            bridge_correction: false,
            integrand_cap: DEFAULT_INTEGRAND_CAP,
        }
    }

    pub fn walk_on_spheres(eps_shell: f64, seed: u64) -> Self {
        SimParams { scheme: Scheme::WalkOnSpheres { eps_shell }, ..SimParams::euler(DEFAULT_STEP, seed) }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_max_steps(mut self, max_steps: u64) -> Self {
        self.max_steps = max_steps;
        self
    }

    /// Same parameters with the EM step multiplied by `factor`. WoS is unchanged.
    pub fn scale_step(mut self, factor: f64) -> Self {
        if let Scheme::EulerMaruyama { step_h } = &mut self.scheme {
            *step_h *= factor;
        }
        self
    }

    pub fn validate(&self) -> Result<()> {
        match self.scheme {
            Scheme::EulerMaruyama { step_h } if !(step_h.is_finite() && step_h > 0.0) => {
                return Err(Error::input(format!("step_h must be positive, got {step_h}")));
            }
            Scheme::WalkOnSpheres { eps_shell } if !(eps_shell.is_finite() && eps_shell > 0.0) => {
                return Err(Error::input(format!("eps_shell must be positive, got {eps_shell}")));
            }
            _ => {}
        }
        if self.max_steps == 0 {
            return Err(Error::input("max_steps must be positive"));
        }
        if self.bridge_correction {
            return Err(Error::UnsupportedScheme { scheme: self.scheme.name(), what: "Brownian-bridge correction" });
        }
        if !(self.integrand_cap > 0.0) {
            return Err(Error::input("integrand_cap must be positive"));
        }
        Ok(())
    }

    fn euler_step(&self, what: &'static str) -> Result<f64> {
        match self.scheme {
            Scheme::EulerMaruyama { step_h } => Ok(step_h),
            Scheme::WalkOnSpheres { .. } => Err(Error::UnsupportedScheme { scheme: "walk_on_spheres", what }),
        }
    }

    /// Stream key and increment sign for a path index.
    fn stream(&self, path_index: u64) -> (PathRng, f64) {
        if self.antithetic {
            let sign = if path_index % 2 == 1 { -1.0 } else { 1.0 };
            (stream_rng(self.seed, path_index / 2), sign)
        } else {
            (stream_rng(self.seed, path_index), 1.0)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathOutcome {
    pub exit_time: f64,
    pub exit_point: Point,
    pub functional_value: f64,
    /// EM steps (or WoS jumps) taken before exit.
    pub steps: u64,
    pub truncated: bool,
}

/// Scalar function evaluated along paths.
pub trait ScalarField: Sync {
    fn eval(&self, x: &[f64]) -> f64;
}

impl<F> ScalarField for F
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    #[inline]
    fn eval(&self, x: &[f64]) -> f64 {
        self(x)
    }
}

fn check_start(domain: &DomainSpec, x0: &Point, params: &SimParams) -> Result<()> {
    params.validate()?;
    if !domain.contains(x0)? {
        return Err(Error::input(format!("start point {:?} is not inside the domain", x0.coords())));
    }
    Ok(())
}

/// Euler–Maruyama walk; `integrand` is evaluated at `W_0, …, W_{K-1}` where
/// `K` is the first step index outside D. Returns `(K, Σ integrand, W_K, truncated)`.
#[inline]
fn euler_walk<F>(domain: &DomainSpec, x0: &[f64], step_h: f64, params: &SimParams, path_index: u64, mut integrand: F) -> Result<(u64, f64, Vec<f64>, bool)>
where
    F: FnMut(&[f64]) -> Result<f64>,
{
    let (mut rng, sign) = params.stream(path_index);
    let scale = sign * step_h.sqrt();
    let mut x = x0.to_vec();
    let mut acc = 0.0;
    let mut k: u64 = 0;
    loop {
        if k == params.max_steps {
            return Ok((k, acc, x, true));
        }
        acc += integrand(&x)?;
        for xi in x.iter_mut() {
            let z: f64 = rng.sample(StandardNormal);
            *xi += scale * z;
        }
        k += 1;
        if !domain.inside(&x) {
            return Ok((k, acc, x, false));
        }
    }
}

fn wos_walk(domain: &DomainSpec, x0: &[f64], eps_shell: f64, params: &SimParams, path_index: u64) -> (f64, u64, Vec<f64>, bool) {
    let (mut rng, sign) = params.stream(path_index);
    let d = x0.len();
    let mut x = x0.to_vec();
    let mut dir = vec![0.0; d];
    let mut time = 0.0;
    let mut jumps = 0;
    loop {
        let r = -domain.sd(&x);
        if r <= eps_shell {
            return (time, jumps, x, false);
        }
        if jumps == params.max_steps {
            return (time, jumps, x, true);
        }
        // E[τ] of a ball of radius r from its centre under ½Δ
        time += r * r / d as f64;
        let mut len2 = 0.0_f64;
        for v in dir.iter_mut() {
            *v = rng.sample(StandardNormal);
            len2 += *v * *v;
        }
        let s = sign * r / len2.sqrt();
        for (xi, v) in x.iter_mut().zip(&dir) {
            *xi += s * v;
        }
        jumps += 1;
    }
}

/// One sample of the exit time τ_D and exit position from `x0`.
///
/// Under walk-on-spheres the reported time is `Σ r_k²/d`, the conditional
/// mean exit time of each sphere: an estimator of `E[τ_D]` in aggregate, not
/// the path's own exit time.
pub fn exit_sample(domain: &DomainSpec, x0: &Point, params: &SimParams, path_index: u64) -> Result<PathOutcome> {
    check_start(domain, x0, params)?;
    match params.scheme {
        Scheme::EulerMaruyama { step_h } => {
            let (k, acc, x, truncated) = euler_walk(domain, x0.coords(), step_h, params, path_index, |_| Ok(1.0))?;
            let exit_time = k as f64 * step_h;
            Ok(PathOutcome { exit_time, exit_point: Point::new(x)?, functional_value: acc * step_h, steps: k, truncated })
        }
        Scheme::WalkOnSpheres { eps_shell } => {
            let (time, jumps, x, truncated) = wos_walk(domain, x0.coords(), eps_shell, params, path_index);
            Ok(PathOutcome { exit_time: time, exit_point: Point::new(x)?, functional_value: time, steps: jumps, truncated })
        }
    }
}

/// Occupation time of `region` before exit from `domain`: `h · #{k < K : W_k ∈ region}`.
pub fn occupation_sample<R: Region + ?Sized>(domain: &DomainSpec, region: &R, x0: &Point, params: &SimParams, path_index: u64) -> Result<PathOutcome> {
    check_start(domain, x0, params)?;
    if region.dim() != domain.dim() {
        return Err(Error::DimensionMismatch { expected: domain.dim(), got: region.dim() });
    }
    let step_h = params.euler_step("occupation times")?;
    let (k, hits, x, truncated) = euler_walk(domain, x0.coords(), step_h, params, path_index, |w| Ok(if region.indicates(w) { 1.0 } else { 0.0 }))?;
    Ok(PathOutcome { exit_time: k as f64 * step_h, exit_point: Point::new(x)?, functional_value: hits * step_h, steps: k, truncated })
}

/// Left-endpoint quadrature of `∫₀^τ g(W_t) dt` along one path.
pub fn functional_sample<G: ScalarField + ?Sized>(domain: &DomainSpec, g: &G, x0: &Point, params: &SimParams, path_index: u64) -> Result<PathOutcome> {
    check_start(domain, x0, params)?;
    let step_h = params.euler_step("path functionals")?;
    let cap = params.integrand_cap;
    let (k, acc, x, truncated) = euler_walk(domain, x0.coords(), step_h, params, path_index, |w| {
        let v = g.eval(w);
        if v.abs() > cap || v.is_nan() {
            return Err(Error::UnboundedIntegrand { point: w.to_vec(), value: v, cap });
        }
        Ok(v)
    })?;
    Ok(PathOutcome { exit_time: k as f64 * step_h, exit_point: Point::new(x)?, functional_value: acc * step_h, steps: k, truncated })
}
