//! The fixed-point operator `(Tu)(x) = E_x[∫₀^{τ_D} λ u(W_t)ᵖ dt]` on
//! node-sampled fields, Picard iteration, finite-difference residuals and
//! membership checks for the set B.

mod field;
mod membership;
mod residual;

pub use field::{lattice_nodes, radial_nodes, urysohn_seed, Field, Interp, DEFAULT_IDW_NEIGHBOURS};
pub use membership::{membership_b, MembershipReport};
pub use residual::{residual_check, ResidualMode, ResidualReport, ResidualRow};

use serde::{Deserialize, Serialize};

use crate::conditions::{check_lambda_p, sup_exit_time, EstimatorConfig};
use crate::error::{Error, Result};
use crate::estimators::{green_apply, Estimate};
use crate::simulate::SimParams;

/// `h(y) = λ yᵖ` on ℝ₊, extended by 0 below.
#[inline]
fn nonlinearity(lambda: f64, p: f64, y: f64) -> f64 {
    if y > 0.0 {
        lambda * y.powf(p)
    } else {
        0.0
    }
}

/// `Tu` at every node together with the per-node estimates. Every node uses
/// path indices `0..n_per_node`, so repeated calls share random numbers.
pub fn apply_t_with_estimates(u: &Field, lambda: f64, p: f64, params: &SimParams, n_per_node: u64) -> Result<(Field, Vec<Estimate>)> {
    check_lambda_p(lambda, p)?;
    let g = |x: &[f64]| nonlinearity(lambda, p, u.eval(x));
    let estimates = u.nodes().iter().map(|x| green_apply(u.domain(), &g, x, params, n_per_node)).collect::<Result<Vec<_>>>()?;
    let values = estimates.iter().map(|e| e.mean.max(0.0)).collect();
    Ok((u.with_values(values)?, estimates))
}

pub fn apply_t(u: &Field, lambda: f64, p: f64, params: &SimParams, n_per_node: u64) -> Result<Field> {
    Ok(apply_t_with_estimates(u, lambda, p, params, n_per_node)?.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PicardConfig {
    pub lambda: f64,
    pub p: f64,
    pub tol: f64,
    pub max_iter: usize,
    pub n_per_node: u64,
    pub params: SimParams,
    /// Bound on the iterates used in the contraction estimate and the
    /// divergence threshold; `‖u₀‖` when larger or absent.
    #[serde(default, rename = "M_hint")]
    pub m_hint: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Converged,
    MaxIterations,
    Diverged,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    /// `‖u_{k+1} − u_k‖` over the nodes.
    pub sup_change: f64,
    /// `‖u_{k+1}‖` over the nodes.
    pub sup_norm: f64,
    /// Largest standard error among the node estimates of `u_{k+1}`.
    pub max_std_error: f64,
    pub contraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationTrace {
    pub records: Vec<IterationRecord>,
    pub converged: bool,
    pub status: SolveStatus,
    /// `C = λ p M^{p−1} sup_D E[τ_D]`.
    pub contraction: f64,
    pub sup_exit: f64,
    #[serde(rename = "M")]
    pub big_m: f64,
    pub warning: Option<String>,
}

/// `C = λ p M^{p−1} sup_D E[τ_D]`, Lipschitz constant of T on `{‖u‖ ≤ M}`.
pub fn contraction_constant(lambda: f64, p: f64, big_m: f64, sup_exit: f64) -> f64 {
    lambda * p * big_m.powf(p - 1.0) * sup_exit
}

/// Iterates `u_{k+1} = T u_k` until `‖u_{k+1} − u_k‖ < tol` or `max_iter`.
pub fn picard_solve(u0: &Field, cfg: &PicardConfig) -> Result<(Field, IterationTrace)> {
    check_lambda_p(cfg.lambda, cfg.p)?;
    if !(cfg.tol > 0.0) {
        return Err(Error::input(format!("tolerance must be positive, got {}", cfg.tol)));
    }
    let sup_exit = sup_exit_time(u0.domain(), &EstimatorConfig::new(cfg.params, cfg.n_per_node.max(2)))?.value;
    let big_m = cfg.m_hint.unwrap_or(0.0).max(u0.sup_norm());
    let contraction = contraction_constant(cfg.lambda, cfg.p, big_m, sup_exit);
    let warning = (contraction >= 1.0).then(|| format!("contraction estimate C = {contraction:.4} >= 1; convergence is not guaranteed"));
    let threshold = 10.0 * big_m;

    let mut trace = IterationTrace { records: Vec::new(), converged: false, status: SolveStatus::MaxIterations, contraction, sup_exit, big_m, warning };
    let mut u = u0.clone();
    for iteration in 1..=cfg.max_iter {
        let (next, estimates) = match apply_t_with_estimates(&u, cfg.lambda, cfg.p, &cfg.params, cfg.n_per_node) {
            Ok(r) => r,
            Err(Error::UnboundedIntegrand { .. }) => {
                trace.status = SolveStatus::Diverged;
                return Ok((u, trace));
            }
            Err(e) => return Err(e),
        };
        let sup_change = next.sup_distance(&u)?;
        let sup_norm = next.sup_norm();
        let max_std_error = estimates.iter().map(|e| e.std_error).fold(0.0, f64::max);
        trace.records.push(IterationRecord { iteration, sup_change, sup_norm, max_std_error, contraction });
        u = next;
        if sup_norm > threshold {
            trace.status = SolveStatus::Diverged;
            return Ok((u, trace));
        }
        if sup_change < cfg.tol {
            trace.converged = true;
            trace.status = SolveStatus::Converged;
            return Ok((u, trace));
        }
    }
    Ok((u, trace))
}
