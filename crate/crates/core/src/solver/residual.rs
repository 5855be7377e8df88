//! Central-difference residuals of candidate solutions.

use serde::{Deserialize, Serialize};

use super::Field;
use crate::error::{Error, Result};
use crate::geometry::Point;

/// Which source term is added to the discrete Laplacian. `factor` is 2 for
/// the fixed point of T under Brownian motion with generator ½Δ, and 1 for
/// the equation read with generator Δ.
#[derive(Debug, Clone, Copy)]
pub enum ResidualMode<'a> {
    /// `Δ_h u + factor · λ uᵖ`, normalised by `λ ‖u‖ᵖ`.
    Nonlinear { lambda: f64, p: f64, factor: f64 },
    /// `Δ_h u + factor · c`, normalised by `c`.
    ConstantSource { c: f64, factor: f64 },
    /// `Δ_h u + factor · λ prevᵖ` with `u = T prev`, normalised by `λ ‖prev‖ᵖ`.
    Lagged { prev: &'a Field, lambda: f64, p: f64, factor: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualRow {
    pub node: Point,
    pub u: f64,
    pub laplacian: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub sup_residual: f64,
    pub normalized: f64,
    pub stencil_h: f64,
    pub eligible: usize,
    pub skipped: usize,
    pub per_node: Vec<ResidualRow>,
}

fn laplacian(u: &Field, x: &[f64], h: f64) -> f64 {
    let centre = u.eval(x);
    let mut y = x.to_vec();
    let mut acc = 0.0;
    for i in 0..x.len() {
        y[i] = x[i] + h;
        acc += u.eval(&y);
        y[i] = x[i] - h;
        acc += u.eval(&y);
        y[i] = x[i];
        acc -= 2.0 * centre;
    }
    acc / (h * h)
}

/// Residual at every node whose distance to ∂D exceeds `stencil_h · √d`.
pub fn residual_check(u: &Field, mode: ResidualMode<'_>, stencil_h: f64) -> Result<ResidualReport> {
    if !(stencil_h > 0.0) {
        return Err(Error::input(format!("stencil_h must be positive, got {stencil_h}")));
    }
    let d = u.domain().dim();
    let margin = stencil_h * (d as f64).sqrt();
    let source = |x: &[f64], ux: f64| -> f64 {
        match mode {
            ResidualMode::Nonlinear { lambda, p, factor } => factor * lambda * ux.max(0.0).powf(p),
            ResidualMode::ConstantSource { c, factor } => factor * c,
            ResidualMode::Lagged { prev, lambda, p, factor } => factor * lambda * prev.eval(x).max(0.0).powf(p),
        }
    };
    let mut per_node = Vec::new();
    for x in u.nodes() {
        if u.domain().sd(x.coords()) < -margin {
            let ux = u.eval(x.coords());
            let lap = laplacian(u, x.coords(), stencil_h);
            per_node.push(ResidualRow { node: x.clone(), u: ux, laplacian: lap, residual: lap + source(x.coords(), ux) });
        }
    }
    if per_node.is_empty() {
        return Err(Error::GeometryTooThin { stencil_h });
    }
    let sup_residual = per_node.iter().fold(0.0_f64, |a, r| a.max(r.residual.abs()));
    let scale = match mode {
        ResidualMode::Nonlinear { lambda, p, .. } => lambda * u.sup_norm().powf(p),
        ResidualMode::ConstantSource { c, .. } => c.abs(),
        ResidualMode::Lagged { prev, lambda, p, .. } => lambda * prev.sup_norm().powf(p),
    };
    let normalized = if sup_residual == 0.0 { 0.0 } else { sup_residual / scale };
    Ok(ResidualReport { sup_residual, normalized, stencil_h, eligible: per_node.len(), skipped: u.nodes().len() - per_node.len(), per_node })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::DomainSpec;
    use crate::solver::{lattice_nodes, radial_nodes, Interp};

    fn exit_field(interp: Interp, nodes: Vec<Point>) -> Field {
        Field::from_fn(DomainSpec::unit_ball(3), nodes, interp, |x| (1.0 - x.norm().powi(2)) / 3.0).unwrap()
    }

    #[test]
    fn zero_field_has_zero_residual() {
        let d = DomainSpec::unit_ball(3);
        let u = Field::constant(d.clone(), radial_nodes(&d, 8).unwrap(), 0.0, Interp::default()).unwrap();
        let r = residual_check(&u, ResidualMode::Nonlinear { lambda: 1.0, p: 2.0, factor: 2.0 }, 0.05).unwrap();
        assert_eq!(r.sup_residual, 0.0);
        assert_eq!(r.normalized, 0.0);
    }

    #[test]
    fn exit_time_field_on_lattice() {
        let h = 0.1;
        let u = exit_field(Interp::default(), lattice_nodes(&DomainSpec::unit_ball(3), h).unwrap());
        let r = residual_check(&u, ResidualMode::ConstantSource { c: 1.0, factor: 2.0 }, h).unwrap();
        assert!(r.sup_residual < 1e-10, "{}", r.sup_residual);
        let r1 = residual_check(&u, ResidualMode::ConstantSource { c: 1.0, factor: 1.0 }, h).unwrap();
        assert!((r1.sup_residual - 1.0).abs() < 1e-10);
    }

    #[test]
    fn exit_time_field_radial() {
        let u = exit_field(Interp::Radial { center: Point::origin(3) }, radial_nodes(&DomainSpec::unit_ball(3), 40).unwrap());
        let r = residual_check(&u, ResidualMode::ConstantSource { c: 1.0, factor: 2.0 }, 0.05).unwrap();
        assert!(r.sup_residual < 1e-8, "{}", r.sup_residual);
        assert!(r.skipped > 0);
    }

    #[test]
    fn thin_geometry() {
        let d = DomainSpec::annulus(Point::origin(3), 1.0, 1.1).unwrap();
        let u = Field::constant(d.clone(), radial_nodes(&d, 4).unwrap(), 1.0, Interp::Nearest).unwrap();
        assert!(matches!(residual_check(&u, ResidualMode::ConstantSource { c: 1.0, factor: 2.0 }, 0.05), Err(Error::GeometryTooThin { .. })));
    }
}
