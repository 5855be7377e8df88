//! Closed-form reference values for balls and annuli, the Newtonian-kernel
//! quadrature check, and a 1-D finite-difference oracle for radial
//! occupation times.
//!
//! All formulas use the generator-½Δ convention, under which
//! `E_x[τ_{B_T}] = (T² − |x|²)/d`.

use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geometry::{DomainSpec, Point};

/// Annulus `A(δ, T) = B_T \ B_δ` in ℝ³.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnulusSpec3D {
    pub delta: f64,
    pub outer: f64,
    pub center: Point,
}

impl AnnulusSpec3D {
    pub fn new(delta: f64, outer: f64) -> Result<Self> {
        Self::centered(delta, outer, Point::origin(3))
    }

    pub fn centered(delta: f64, outer: f64, center: Point) -> Result<Self> {
        if !(delta > 0.0 && delta < outer && outer.is_finite()) {
            return Err(Error::input(format!("annulus needs 0 < delta < T, got delta = {delta}, T = {outer}")));
        }
        if center.dim() != 3 {
            return Err(Error::input("the annulus exit-time formula is for d = 3 only"));
        }
        Ok(AnnulusSpec3D { delta, outer, center })
    }

    /// The oracle view of a domain, when it is a 3-D annulus.
    pub fn from_domain(domain: &DomainSpec) -> Option<Self> {
        match domain {
            DomainSpec::Annulus { center, r_inner, r_outer } if center.dim() == 3 => {
                Some(AnnulusSpec3D { delta: *r_inner, outer: *r_outer, center: center.clone() })
            }
            _ => None,
        }
    }

    /// `f(z) = (T² + Tδ + δ² − δT(δ+T)/z − z²)/3`, the exit time at radius `z`.
    pub fn exit_time_at_radius(&self, z: f64) -> f64 {
        let (d, t) = (self.delta, self.outer);
        (t * t + t * d + d * d - d * t * (d + t) / z - z * z) / 3.0
    }

    /// Radius of the maximum: `z³ = δT(T+δ)/2`.
    pub fn argmax_radius(&self) -> f64 {
        (self.delta * self.outer * (self.outer + self.delta) / 2.0).cbrt()
    }
}

/// `E_x[τ_{B_T(0)}] = (T² − |x|²)/d`.
pub fn ball_exit_time(radius: f64, d: usize, x: &Point) -> Result<f64> {
    if x.dim() != d {
        return Err(Error::DimensionMismatch { expected: d, got: x.dim() });
    }
    let r = x.norm();
    if r > radius {
        return Err(Error::input(format!("|x| = {r} exceeds the ball radius {radius}")));
    }
    Ok((radius * radius - r * r) / d as f64)
}

/// Exit time of the 3-D annulus at `x`, for `δ ≤ |x − c| ≤ T`.
pub fn annulus_exit_time(spec: &AnnulusSpec3D, x: &Point) -> Result<f64> {
    if x.dim() != 3 {
        return Err(Error::DimensionMismatch { expected: 3, got: x.dim() });
    }
    let r = x.distance(&spec.center);
    if r < spec.delta || r > spec.outer {
        return Err(Error::input(format!("|x| = {r} is outside the closed annulus [{}, {}]", spec.delta, spec.outer)));
    }
    Ok(spec.exit_time_at_radius(r))
}

/// `(sup_x E_x[τ], argmax radius)` for the 3-D annulus.
pub fn annulus_sup_exit_time(spec: &AnnulusSpec3D) -> Result<(f64, f64)> {
    let z = spec.argmax_radius();
    if !(z > spec.delta && z < spec.outer) {
        return Err(Error::Internal(format!("maximizing radius {z} is not inside ({}, {})", spec.delta, spec.outer)));
    }
    let (d, t) = (spec.delta, spec.outer);
    // at the critical radius δT(T+δ)/z = 2z², so the profile reduces to S/3 − z²
    let value = (t * t + t * d + d * d) / 3.0 - (d * t * (t + d) / 2.0).powf(2.0 / 3.0);
    Ok((value, z))
}

/// Largest `M` satisfying `sup E[τ] ≤ M^{1−p}/λ`: `M = (λ·sup)^{1/(1−p)}`.
pub fn m_constant(sup_exit: f64, lambda: f64, p: f64) -> Result<f64> {
    if p == 1.0 {
        return Err(Error::input("p = 1 makes the exponent 1/(1-p) singular"));
    }
    if !(p > 1.0) {
        return Err(Error::input(format!("p must exceed 1, got {p}")));
    }
    if !(lambda > 0.0) {
        return Err(Error::input(format!("lambda must be positive, got {lambda}")));
    }
    if !(sup_exit > 0.0) {
        return Err(Error::input(format!("sup exit time must be positive, got {sup_exit}")));
    }
    Ok((lambda * sup_exit).powf(1.0 / (1.0 - p)))
}

/// Newtonian constant `c_d = Γ(d/2 − 1)/(2π^{d/2})`.
pub fn newton_constant(d: usize) -> f64 {
    gamma(d as f64 / 2.0 - 1.0) / (2.0 * PI.powf(d as f64 / 2.0))
}

/// Composite Gauss–Legendre rule on `(0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureConfig {
    pub panels: usize,
    pub order: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig { panels: 64, order: 16 }
    }
}

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // Legendre recurrence for P_n(x) and P_{n-1}(x)
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 0 {
                1.0
            } else if n == 1 {
                x
            } else {
                p1
            };
            let pnm1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * pn - pnm1) / (x * x - 1.0);
            let dx = pn / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn integrate_unit<F: Fn(f64) -> f64>(f: F, quad: &QuadratureConfig) -> f64 {
    let (nodes, weights) = gauss_legendre(quad.order);
    let width = 1.0 / quad.panels as f64;
    let mut total = 0.0;
    for j in 0..quad.panels {
        let mid = (j as f64 + 0.5) * width;
        let panel: f64 = nodes.iter().zip(&weights).map(|(x, w)| w * f(mid + 0.5 * width * x)).sum();
        total += 0.5 * width * panel;
    }
    total
}

/// Time quadrature of the Brownian transition density against the
/// Newtonian kernel: returns `(∫₀^∞ p(t;x,y) dt, c_d |x−y|^{2−d})`.
///
/// With `r = |x − y|` the time axis is mapped onto `(0, 1)` by
/// `t = r²/(2w²)`, `w = s/(1 − s)`.
pub fn heat_kernel_potential_check(x: &Point, y: &Point, d: usize, quad: &QuadratureConfig) -> Result<(f64, f64)> {
    if x.dim() != d || y.dim() != d {
        return Err(Error::DimensionMismatch { expected: d, got: if x.dim() != d { x.dim() } else { y.dim() } });
    }
    if d < 3 {
        return Err(Error::input("the Newtonian potential needs d >= 3"));
    }
    let r = x.distance(y);
    if r == 0.0 {
        return Err(Error::SingularKernel);
    }
    let df = d as f64;
    let density = |t: f64| ((-df / 2.0) * (2.0 * PI * t).ln() - r * r / (2.0 * t)).exp();
    let integrand = |s: f64| {
        let w = s / (1.0 - s);
        let t = r * r / (2.0 * w * w);
        let dt_dw = r * r / (w * w * w);
        let dw_ds = 1.0 / ((1.0 - s) * (1.0 - s));
        density(t) * dt_dw * dw_ds
    };
    let lhs = integrate_unit(integrand, quad);
    let rhs = newton_constant(d) * r.powf(2.0 - df);
    Ok((lhs, rhs))
}

/// Radial solution `v(r)` of `½(v'' + (d−1)v'/r) = −𝟙_{[a,b]}(r)` on
/// `[inner, outer]` with `v(outer) = 0` and either `v(inner) = 0`
/// (annulus) or `v'(0) = 0` (ball, `inner = 0`).
///
/// Gives `Λ_D[V]` for radial `D` and `V = {a < |x| < b}`; with `[a, b]`
/// covering the domain it gives `E[τ_D]`.
#[derive(Debug, Clone)]
pub struct RadialProfile {
    pub radii: Vec<f64>,
    pub values: Vec<f64>,
}

impl RadialProfile {
    pub fn solve(d: usize, inner: f64, outer: f64, band: (f64, f64), n_grid: usize) -> Result<Self> {
        if !(inner >= 0.0 && inner < outer) {
            return Err(Error::input(format!("bad radial interval [{inner}, {outer}]")));
        }
        if n_grid < 3 {
            return Err(Error::input("radial grid needs at least 3 points"));
        }
        let n = n_grid;
        let dr = (outer - inner) / (n - 1) as f64;
        let radii: Vec<f64> = (0..n).map(|i| inner + i as f64 * dr).collect();
        let source = |r: f64| {
            if r > band.0 && r < band.1 {
                1.0
            } else if r == band.0 || r == band.1 {
                0.5
            } else {
                0.0
            }
        };
        let k = (d - 1) as f64;

        // tridiagonal system a_i v_{i-1} + b_i v_i + c_i v_{i+1} = rhs_i
        let mut a = vec![0.0; n];
        let mut b = vec![0.0; n];
        let mut c = vec![0.0; n];
        let mut rhs = vec![0.0; n];
        for i in 0..n {
            let r = radii[i];
            if i == n - 1 || (i == 0 && inner > 0.0) {
                b[i] = 1.0;
            } else if i == 0 {
                // at the origin the Laplacian is d·v''(0); symmetric ghost node
                b[i] = -2.0 * d as f64 / (dr * dr);
                c[i] = 2.0 * d as f64 / (dr * dr);
                rhs[i] = -2.0 * source(r);
            } else {
                a[i] = 1.0 / (dr * dr) - k / (2.0 * r * dr);
                b[i] = -2.0 / (dr * dr);
                c[i] = 1.0 / (dr * dr) + k / (2.0 * r * dr);
                rhs[i] = -2.0 * source(r);
            }
        }
        let values = thomas(&a, &b, &c, &rhs);
        Ok(RadialProfile { radii, values })
    }

    /// Linear interpolation at radius `r`.
    pub fn at(&self, r: f64) -> f64 {
        let n = self.radii.len();
        let (lo, hi) = (self.radii[0], self.radii[n - 1]);
        if r <= lo {
            return self.values[0];
        }
        if r >= hi {
            return self.values[n - 1];
        }
        let t = (r - lo) / (hi - lo) * (n - 1) as f64;
        let i = (t.floor() as usize).min(n - 2);
        let w = t - i as f64;
        self.values[i] * (1.0 - w) + self.values[i + 1] * w
    }
}

fn thomas(a: &[f64], b: &[f64], c: &[f64], d: &[f64]) -> Vec<f64> {
    let n = b.len();
    let mut cp = vec![0.0; n];
    let mut dp = vec![0.0; n];
    cp[0] = c[0] / b[0];
    dp[0] = d[0] / b[0];
    for i in 1..n {
        let m = b[i] - a[i] * cp[i - 1];
        cp[i] = c[i] / m;
        dp[i] = (d[i] - a[i] * dp[i - 1]) / m;
    }
    let mut x = vec![0.0; n];
    x[n - 1] = dp[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = dp[i] - cp[i] * x[i + 1];
    }
    x
}
