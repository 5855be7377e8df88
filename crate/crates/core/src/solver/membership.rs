//! Membership of a field in the set B via
//! `L_D^u[V](y) = E_y[∫₀^{τ_D} u(W_s) 𝟙_V(W_s) ds]`.

use serde::{Deserialize, Serialize};

use super::Field;
use crate::conditions::{Extremum, GridChoice, Grids, Hypotheses};
use crate::error::{Error, Result};
use crate::estimators::{extremum_over, Mode, Quantity};
use crate::simulate::SimParams;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MembershipReport {
    /// `inf_{D₁} L_D^u[D₁]`.
    pub inf_l_d1: Extremum,
    /// `sup_{D₂} L_D^u[D₂]`.
    pub sup_l_d2: Extremum,
    pub sup_norm: f64,
    /// `inf_{D₁} L_D^u[D₁] ≥ m`.
    pub i: bool,
    /// `sup_{D₂} L_D^u[D₂] ≤ m`.
    pub ii: bool,
    /// `‖u‖ ≤ M`.
    pub iii: bool,
    /// `[inf − m, m − sup, M − ‖u‖]`.
    pub margins: [f64; 3],
}

pub fn membership_b(u: &Field, hyp: &Hypotheses, params: &SimParams, n_per_point: u64, grid: GridChoice) -> Result<MembershipReport> {
    let part = &hyp.partition;
    if u.domain() != &part.parent {
        return Err(Error::input("field and partition live on different domains"));
    }
    let grids = Grids::build(part, grid)?;
    let g1 = |x: &[f64]| if part.in_d1(x) { u.eval(x) } else { 0.0 };
    let g2 = |x: &[f64]| if part.in_d2(x) { u.eval(x) } else { 0.0 };
    let inf = extremum_over(&part.parent, &Quantity::Green(&g1), Mode::Inf, &grids.d1, params, n_per_point)?;
    let sup = extremum_over(&part.parent, &Quantity::Green(&g2), Mode::Sup, &grids.d2, params, n_per_point)?;
    let inf_l_d1 = Extremum::from_mc(inf);
    let sup_l_d2 = Extremum::from_mc(sup);
    let sup_norm = u.sup_norm();
    let margins = [inf_l_d1.value - hyp.m, hyp.m - sup_l_d2.value, hyp.big_m - sup_norm];
    Ok(MembershipReport { i: margins[0] >= 0.0, ii: margins[1] >= 0.0, iii: margins[2] >= 0.0, inf_l_d1, sup_l_d2, sup_norm, margins })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimators::expected_occupation;
    use crate::geometry::{DomainSpec, Partition, Point};
    use crate::solver::{radial_nodes, urysohn_seed, Interp};

    fn setup() -> (DomainSpec, Partition) {
        let ann = DomainSpec::annulus(Point::origin(3), 1.0, 2.0).unwrap();
        let part = Partition::new(DomainSpec::annulus(Point::origin(3), 1.2, 1.8).unwrap(), ann.clone()).unwrap();
        (ann, part)
    }

    fn params() -> SimParams {
        SimParams::euler(1e-3, 5)
    }

    #[test]
    fn zero_field() {
        let (ann, part) = setup();
        let u = Field::constant(ann.clone(), radial_nodes(&ann, 8).unwrap(), 0.0, Interp::Nearest).unwrap();
        let hyp = Hypotheses::new(1.0, 2.0, 0.1, 1.0, part).unwrap();
        let r = membership_b(&u, &hyp, &params(), 50, GridChoice::Radial { n: 3 }).unwrap();
        assert!(!r.i && r.ii && r.iii);
    }

    #[test]
    fn constant_field_is_scaled_occupation() {
        let (ann, part) = setup();
        let big_m = 0.7;
        let u = Field::constant(ann.clone(), radial_nodes(&ann, 8).unwrap(), big_m, Interp::Nearest).unwrap();
        let hyp = Hypotheses::new(1.0, 2.0, 0.01, big_m, part.clone()).unwrap();
        let r = membership_b(&u, &hyp, &params(), 100, GridChoice::Radial { n: 3 }).unwrap();
        assert!(r.iii);
        assert_eq!(r.margins[2], 0.0);
        let x = r.inf_l_d1.arg_point.clone().unwrap();
        let occ = expected_occupation(&ann, &part.d1, &x, &params(), 100).unwrap();
        assert!((r.inf_l_d1.value - big_m * occ.mean).abs() <= 1e-12 * occ.mean);
    }

    #[test]
    fn urysohn_seed_satisfies_norm_bound() {
        let (ann, part) = setup();
        let m = 0.3;
        let u = urysohn_seed(&part, m, radial_nodes(&ann, 16).unwrap(), Interp::Nearest).unwrap();
        let hyp = Hypotheses::new(1.0, 2.0, m, 1.0, part).unwrap();
        let r = membership_b(&u, &hyp, &params(), 50, GridChoice::Radial { n: 3 }).unwrap();
        assert!(r.iii);
        assert!(r.inf_l_d1.value > 0.0 && r.sup_l_d2.value > 0.0);
    }
}
