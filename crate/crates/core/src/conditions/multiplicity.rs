//! Hypothesis sets built from `s` disjoint components: one per nonempty
//! subset `I ⊆ {1..s}`, with `m̂ = max m_i`, `M̂ = min M_i` and `D̂₁` the
//! union of the selected components.

use serde::{Deserialize, Serialize};

use super::{check_conditions, ConditionsReport, EstimatorConfig, Hypotheses};
use crate::error::{Error, Result};
use crate::geometry::{DomainSpec, Partition};

/// Samples per component for the disjointness check.
const DISJOINT_SAMPLES: usize = 2048;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiplicitySet {
    /// 1-based component indices, increasing.
    pub index_set: Vec<usize>,
    pub m_hat: f64,
    #[serde(rename = "M_hat")]
    pub big_m_hat: f64,
    pub d1_hat: DomainSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiplicityReport {
    pub set: MultiplicitySet,
    /// `None` when `m̂ > M̂`, which leaves no admissible hypothesis.
    pub report: Option<ConditionsReport>,
    pub error: Option<String>,
}

/// The `2ˢ − 1` nonempty subsets in binary-counter order.
pub fn multiplicity_sets(components: &[DomainSpec], constants: &[(f64, f64)]) -> Result<Vec<MultiplicitySet>> {
    let s = components.len();
    if s == 0 {
        return Err(Error::input("need at least one component"));
    }
    if constants.len() != s {
        return Err(Error::input(format!("{s} components but {} (m, M) pairs", constants.len())));
    }
    if s >= usize::BITS as usize {
        return Err(Error::input(format!("too many components: {s}")));
    }
    Ok((1usize..1 << s)
        .map(|mask| {
            let index_set: Vec<usize> = (0..s).filter(|i| mask >> i & 1 == 1).collect();
            let m_hat = index_set.iter().map(|&i| constants[i].0).fold(f64::NEG_INFINITY, f64::max);
            let big_m_hat = index_set.iter().map(|&i| constants[i].1).fold(f64::INFINITY, f64::min);
            let d1_hat = if index_set.len() == 1 {
                components[index_set[0]].clone()
            } else {
                DomainSpec::Union { parts: index_set.iter().map(|&i| components[i].clone()).collect() }
            };
            MultiplicitySet { index_set: index_set.iter().map(|i| i + 1).collect(), m_hat, big_m_hat, d1_hat }
        })
        .collect())
}

fn check_disjoint(components: &[DomainSpec]) -> Result<()> {
    for (i, a) in components.iter().enumerate() {
        let samples = a.sample_interior(DISJOINT_SAMPLES, 0xD15_0000 + i as u64)?;
        for (j, b) in components.iter().enumerate() {
            if i != j && samples.iter().any(|x| b.inside(x.coords())) {
                return Err(Error::input(format!("components {} and {} overlap", i + 1, j + 1)));
            }
        }
    }
    Ok(())
}

/// Checks the three conditions for every hypothesis set.
pub fn multiplicity_enumerate(
    domain: &DomainSpec,
    components: &[DomainSpec],
    constants: &[(f64, f64)],
    lambda: f64,
    p: f64,
    cfg: &EstimatorConfig,
) -> Result<Vec<MultiplicityReport>> {
    let sets = multiplicity_sets(components, constants)?;
    check_disjoint(components)?;
    sets.into_iter()
        .map(|set| {
            if set.m_hat > set.big_m_hat {
                return Ok(MultiplicityReport { set, report: None, error: Some("m_hat > M_hat".into()) });
            }
            let partition = Partition::new(set.d1_hat.clone(), domain.clone())?;
            let hyp = Hypotheses::new(lambda, p, set.m_hat, set.big_m_hat, partition)?;
            match check_conditions(&hyp, cfg) {
                Ok(r) => Ok(MultiplicityReport { set, report: Some(r), error: None }),
                Err(e) => Ok(MultiplicityReport { set, report: None, error: Some(e.to_string()) }),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conditions::GridChoice;
    use crate::geometry::Point;
    use crate::simulate::SimParams;

    fn three_balls() -> Vec<DomainSpec> {
        [-0.6, 0.0, 0.6].iter().map(|&c| DomainSpec::ball(Point::new(vec![c, 0.0, 0.0]).unwrap(), 0.2).unwrap()).collect()
    }

    #[test]
    fn seven_sets_with_subset_extrema() {
        let sets = multiplicity_sets(&three_balls(), &[(1.0, 5.0), (2.0, 4.0), (3.0, 6.0)]).unwrap();
        assert_eq!(sets.len(), 7);
        let s13 = sets.iter().find(|s| s.index_set == vec![1, 3]).unwrap();
        assert_eq!((s13.m_hat, s13.big_m_hat), (3.0, 5.0));
        let s2 = sets.iter().find(|s| s.index_set == vec![2]).unwrap();
        assert_eq!((s2.m_hat, s2.big_m_hat), (2.0, 4.0));
    }

    #[test]
    fn argument_errors() {
        assert!(multiplicity_sets(&[], &[]).is_err());
        assert!(multiplicity_sets(&three_balls(), &[(1.0, 2.0)]).is_err());
        let overlapping = vec![DomainSpec::ball(Point::origin(3), 0.3).unwrap(), DomainSpec::ball(Point::new(vec![0.2, 0.0, 0.0]).unwrap(), 0.3).unwrap()];
        let cfg = EstimatorConfig::new(SimParams::euler(1e-3, 1), 10);
        let r = multiplicity_enumerate(&DomainSpec::unit_ball(3), &overlapping, &[(1.0, 2.0), (1.0, 2.0)], 1.0, 2.0, &cfg);
        assert!(matches!(r, Err(Error::Input(_))));
    }

    #[test]
    fn enumerate_runs_every_set() {
        let cfg = EstimatorConfig { grid: GridChoice::Sampled { n: 2, seed: 4 }, ..EstimatorConfig::new(SimParams::euler(4e-3, 1), 20) };
        let comps = three_balls();
        let out = multiplicity_enumerate(&DomainSpec::unit_ball(3), &comps, &[(0.1, 1.0), (0.2, 1.0), (2.0, 1.5)], 1.0, 2.0, &cfg).unwrap();
        assert_eq!(out.len(), 7);
        for r in &out {
            if r.set.index_set.contains(&3) {
                assert!(r.report.is_none());
            } else {
                assert!(r.report.is_some(), "{:?}", r.error);
            }
        }
    }
}
