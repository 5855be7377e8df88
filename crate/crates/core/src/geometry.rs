//! Bounded open domains in ℝᵈ (d ≥ 3) built from balls and annuli.
//!
//! Domains are signed-distance CSG trees. Inside the domain the signed
//! distance never overestimates the true distance to the boundary, which is
//! all the walk-on-spheres kernel needs; for the primitives it is exact.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::stream_rng;

/// Smallest dimension the toolkit accepts.
pub const MIN_DIM: usize = 3;

/// Rejection sampling gives up once the acceptance rate is below this.
const MIN_ACCEPTANCE: f64 = 1e-6;
const MIN_TRIALS_FOR_RATE: u64 = 10_000_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Point(Vec<f64>);

impl Point {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::input("point has no coordinates"));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::input(format!("point {coords:?} has non-finite coordinates")));
        }
        Ok(Point(coords))
    }

    pub fn origin(dim: usize) -> Self {
        Point(vec![0.0; dim])
    }

    /// `center + radius·e₁`.
    pub fn on_axis(center: &Point, radius: f64) -> Self {
        let mut c = center.0.clone();
        c[0] += radius;
        Point(c)
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn norm(&self) -> f64 {
        norm(&self.0)
    }

    pub fn distance(&self, other: &Point) -> f64 {
        distance(&self.0, &other.0)
    }
}

impl TryFrom<Vec<f64>> for Point {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Point::new(v)
    }
}

impl From<Point> for Vec<f64> {
    fn from(p: Point) -> Self {
        p.0
    }
}

#[inline]
pub(crate) fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

#[inline]
pub(crate) fn distance(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
}

/// Anything with a pointwise indicator: a domain, or the implicit complement
/// `D₂ = D \ D₁` of a [`Partition`].
pub trait Region: Sync {
    fn dim(&self) -> usize;
    fn indicates(&self, x: &[f64]) -> bool;
}

/// Geometric description of a bounded open set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DomainConfig", into = "DomainConfig")]
pub enum DomainSpec {
    Ball {
        center: Point,
        radius: f64,
    },
    Annulus {
        center: Point,
        r_inner: f64,
        r_outer: f64,
    },
    /// `outer` with the closure of `hole` removed.
    Difference {
        outer: Box<DomainSpec>,
        hole: Box<DomainSpec>,
    },
    Union {
        parts: Vec<DomainSpec>,
    },
}

impl DomainSpec {
    pub fn ball(center: Point, radius: f64) -> Result<Self> {
        let d = DomainSpec::Ball { center, radius };
        d.validate()?;
        Ok(d)
    }

    pub fn annulus(center: Point, r_inner: f64, r_outer: f64) -> Result<Self> {
        let d = DomainSpec::Annulus { center, r_inner, r_outer };
        d.validate()?;
        Ok(d)
    }

    pub fn difference(outer: DomainSpec, hole: DomainSpec) -> Result<Self> {
        let d = DomainSpec::Difference { outer: Box::new(outer), hole: Box::new(hole) };
        d.validate()?;
        Ok(d)
    }

    pub fn union(parts: Vec<DomainSpec>) -> Result<Self> {
        let d = DomainSpec::Union { parts };
        d.validate()?;
        Ok(d)
    }

    /// Unit ball centred at the origin of ℝᵈ.
    pub fn unit_ball(dim: usize) -> Self {
        DomainSpec::Ball { center: Point::origin(dim), radius: 1.0 }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            DomainSpec::Ball { center, radius } => {
                check_dim(center.dim())?;
                if !(radius.is_finite() && *radius > 0.0) {
                    return Err(Error::input(format!("ball radius must be positive, got {radius}")));
                }
            }
            DomainSpec::Annulus { center, r_inner, r_outer } => {
                check_dim(center.dim())?;
                if !(r_inner.is_finite() && r_outer.is_finite() && *r_inner > 0.0 && r_inner < r_outer) {
                    return Err(Error::input(format!("annulus needs 0 < r_inner < r_outer, got r_inner = {r_inner}, r_outer = {r_outer}")));
                }
            }
            DomainSpec::Difference { outer, hole } => {
                outer.validate()?;
                hole.validate()?;
                same_dim(outer.dim(), hole.dim())?;
                let (olo, ohi) = outer.bounding_box();
                let (hlo, hhi) = hole.bounding_box();
                let inside = olo.iter().zip(&hlo).all(|(o, h)| h > o) && ohi.iter().zip(&hhi).all(|(o, h)| h < o);
                if !inside {
                    return Err(Error::input("difference hole must lie strictly inside the outer bounding box"));
                }
            }
            DomainSpec::Union { parts } => {
                let first = parts.first().ok_or_else(|| Error::input("union needs at least one part"))?;
                for p in parts {
                    p.validate()?;
                    same_dim(first.dim(), p.dim())?;
                }
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        match self {
            DomainSpec::Ball { center, .. } | DomainSpec::Annulus { center, .. } => center.dim(),
            DomainSpec::Difference { outer, .. } => outer.dim(),
            DomainSpec::Union { parts } => parts[0].dim(),
        }
    }

    /// Membership in the open set; boundary points are outside.
    pub fn contains(&self, x: &Point) -> Result<bool> {
        self.check_point(x)?;
        Ok(self.inside(x.coords()))
    }

    pub fn signed_distance(&self, x: &Point) -> Result<f64> {
        self.check_point(x)?;
        Ok(self.sd(x.coords()))
    }

    pub(crate) fn check_point(&self, x: &Point) -> Result<()> {
        if x.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: x.dim() });
        }
        Ok(())
    }

    #[inline]
    pub(crate) fn inside(&self, x: &[f64]) -> bool {
        self.sd(x) < 0.0
    }

    pub(crate) fn sd(&self, x: &[f64]) -> f64 {
        match self {
            DomainSpec::Ball { center, radius } => distance(x, center.coords()) - radius,
            DomainSpec::Annulus { center, r_inner, r_outer } => {
                let r = distance(x, center.coords());
                (r - r_outer).max(r_inner - r)
            }
            DomainSpec::Difference { outer, hole } => outer.sd(x).max(-hole.sd(x)),
            DomainSpec::Union { parts } => parts.iter().map(|p| p.sd(x)).fold(f64::INFINITY, f64::min),
        }
    }

    /// Axis-aligned box enclosing the domain, as `(lower, upper)` corners.
    pub fn bounding_box(&self) -> (Vec<f64>, Vec<f64>) {
        match self {
            DomainSpec::Ball { center, radius: r } | DomainSpec::Annulus { center, r_outer: r, .. } => {
                (center.coords().iter().map(|c| c - r).collect(), center.coords().iter().map(|c| c + r).collect())
            }
            DomainSpec::Difference { outer, .. } => outer.bounding_box(),
            DomainSpec::Union { parts } => {
                let (mut lo, mut hi) = parts[0].bounding_box();
                for p in &parts[1..] {
                    let (l, h) = p.bounding_box();
                    for i in 0..lo.len() {
                        lo[i] = lo[i].min(l[i]);
                        hi[i] = hi[i].max(h[i]);
                    }
                }
                (lo, hi)
            }
        }
    }

    /// Centre and radius of a sphere enclosing the domain.
    fn bounding_sphere(&self) -> (Vec<f64>, f64) {
        match self {
            DomainSpec::Ball { center, radius: r } | DomainSpec::Annulus { center, r_outer: r, .. } => (center.coords().to_vec(), *r),
            _ => {
                let (lo, hi) = self.bounding_box();
                let c: Vec<f64> = lo.iter().zip(&hi).map(|(a, b)| 0.5 * (a + b)).collect();
                let r = 0.5 * distance(&lo, &hi);
                (c, r)
            }
        }
    }

    /// Largest distance from the domain's bounding-sphere centre to its
    /// boundary; the natural length scale of the domain.
    pub fn length_scale(&self) -> f64 {
        self.bounding_sphere().1
    }

    /// `n` points uniformly distributed in the domain, by rejection from the
    /// bounding box. Deterministic in `seed`.
    pub fn sample_interior(&self, n: usize, seed: u64) -> Result<Vec<Point>> {
        if n == 0 {
            return Err(Error::input("sample_interior needs n >= 1"));
        }
        let (lo, hi) = self.bounding_box();
        let mut rng = stream_rng(seed, u64::MAX);
        let mut out = Vec::with_capacity(n);
        let mut x = vec![0.0; lo.len()];
        let mut trials: u64 = 0;
        while out.len() < n {
            for ((xi, l), h) in x.iter_mut().zip(&lo).zip(&hi) {
                *xi = rng.gen_range(*l..*h);
            }
            trials += 1;
            if self.inside(&x) {
                out.push(Point(x.clone()));
            }
            if trials >= MIN_TRIALS_FOR_RATE && (out.len() as f64) < MIN_ACCEPTANCE * trials as f64 {
                return Err(Error::DegenerateDomain { rate: out.len() as f64 / trials as f64, trials });
            }
        }
        Ok(out)
    }

    /// Whether every boundary point is certified regular through the cone
    /// condition. `false` means "not certified", not "irregular".
    pub fn regular_boundary(&self) -> bool {
        match self {
            DomainSpec::Ball { .. } | DomainSpec::Annulus { .. } => true,
            DomainSpec::Difference { outer, hole } => match (outer.as_ref(), hole.as_ref()) {
                (DomainSpec::Ball { center, radius }, DomainSpec::Ball { center: hc, radius: hr }) => center.distance(hc) + hr < *radius,
                (DomainSpec::Annulus { center, r_inner, r_outer }, DomainSpec::Ball { center: hc, radius: hr }) => {
                    let d = center.distance(hc);
                    d - hr > *r_inner && d + hr < *r_outer
                }
                _ => false,
            },
            DomainSpec::Union { parts } => {
                if parts.len() == 1 {
                    return parts[0].regular_boundary();
                }
                // disjoint closures of certified primitives
                let primitives = parts.iter().all(|p| matches!(p, DomainSpec::Ball { .. } | DomainSpec::Annulus { .. }));
                if !primitives {
                    return false;
                }
                for (i, a) in parts.iter().enumerate() {
                    for b in &parts[i + 1..] {
                        let (ca, ra) = a.bounding_sphere();
                        let (cb, rb) = b.bounding_sphere();
                        if distance(&ca, &cb) <= ra + rb {
                            return false;
                        }
                    }
                }
                true
            }
        }
    }

    /// Centre of a radially symmetric domain (ball or annulus), if it is one.
    pub fn radial_center(&self) -> Option<&Point> {
        match self {
            DomainSpec::Ball { center, .. } | DomainSpec::Annulus { center, .. } => Some(center),
            _ => None,
        }
    }

    /// Radial extent `(r_min, r_max)` of a ball or annulus.
    pub fn radial_extent(&self) -> Option<(f64, f64)> {
        match self {
            DomainSpec::Ball { radius, .. } => Some((0.0, *radius)),
            DomainSpec::Annulus { r_inner, r_outer, .. } => Some((*r_inner, *r_outer)),
            _ => None,
        }
    }
}

impl Region for DomainSpec {
    fn dim(&self) -> usize {
        DomainSpec::dim(self)
    }

    #[inline]
    fn indicates(&self, x: &[f64]) -> bool {
        self.inside(x)
    }
}

fn check_dim(d: usize) -> Result<()> {
    if d < MIN_DIM {
        return Err(Error::input(format!("dimension must be at least {MIN_DIM}, got {d}")));
    }
    Ok(())
}

fn same_dim(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::DimensionMismatch { expected: a, got: b });
    }
    Ok(())
}

/// Split of a domain into an inner subregion `D₁` and its complement
/// `D₂ = parent \ D₁`. `D₂` is never built as a domain of its own.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Partition {
    pub d1: DomainSpec,
    pub parent: DomainSpec,
}

/// Samples drawn from `D₁` to check it lies inside the parent.
const PARTITION_CHECK_SAMPLES: usize = 4096;

impl Partition {
    pub fn new(d1: DomainSpec, parent: DomainSpec) -> Result<Self> {
        let p = Partition { d1, parent };
        p.validate()?;
        Ok(p)
    }

    /// Dimension agreement plus a sampled check of `D₁ ⊆ D`. An empty `D₁`
    /// is rejected because the infimum over it is meaningless.
    pub fn validate(&self) -> Result<()> {
        same_dim(self.parent.dim(), self.d1.dim())?;
        let samples = self.d1.sample_interior(PARTITION_CHECK_SAMPLES, 0x5EED).map_err(|e| match e {
            Error::DegenerateDomain { .. } => Error::input("partition D1 is empty"),
            other => other,
        })?;
        if let Some(bad) = samples.iter().find(|x| !self.parent.inside(x.coords())) {
            return Err(Error::input(format!("partition D1 is not contained in the domain (sample {:?})", bad.coords())));
        }
        Ok(())
    }

    pub fn in_d1(&self, x: &[f64]) -> bool {
        self.d1.inside(x)
    }

    pub fn in_d2(&self, x: &[f64]) -> bool {
        self.parent.inside(x) && !self.d1.inside(x)
    }

    pub fn d2(&self) -> Complement<'_> {
        Complement { partition: self }
    }
}

/// Indicator of `D₂ = parent \ D₁`.
#[derive(Debug, Clone, Copy)]
pub struct Complement<'a> {
    partition: &'a Partition,
}

impl Region for Complement<'_> {
    fn dim(&self) -> usize {
        self.partition.parent.dim()
    }

    #[inline]
    fn indicates(&self, x: &[f64]) -> bool {
        self.partition.in_d2(x)
    }
}

/// Serialized form of [`DomainSpec`], e.g.
/// `{"type":"annulus","center":[0,0,0],"r_inner":1.0,"r_outer":2.0,"dim":3}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum DomainConfig {
    Ball {
        center: Vec<f64>,
        radius: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        dim: Option<usize>,
    },
    Annulus {
        center: Vec<f64>,
        r_inner: f64,
        r_outer: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        dim: Option<usize>,
    },
    Difference {
        outer: Box<DomainConfig>,
        hole: Box<DomainConfig>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        dim: Option<usize>,
    },
    Union {
        parts: Vec<DomainConfig>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        dim: Option<usize>,
    },
}

impl TryFrom<DomainConfig> for DomainSpec {
    type Error = Error;

    fn try_from(c: DomainConfig) -> Result<Self> {
        let (spec, dim) = match c {
            DomainConfig::Ball { center, radius, dim } => (DomainSpec::Ball { center: Point::new(center)?, radius }, dim),
            DomainConfig::Annulus { center, r_inner, r_outer, dim } => (DomainSpec::Annulus { center: Point::new(center)?, r_inner, r_outer }, dim),
            DomainConfig::Difference { outer, hole, dim } => {
                (DomainSpec::Difference { outer: Box::new(DomainSpec::try_from(*outer)?), hole: Box::new(DomainSpec::try_from(*hole)?) }, dim)
            }
            DomainConfig::Union { parts, dim } => (DomainSpec::Union { parts: parts.into_iter().map(DomainSpec::try_from).collect::<Result<_>>()? }, dim),
        };
        spec.validate()?;
        if let Some(d) = dim {
            same_dim(d, spec.dim())?;
        }
        Ok(spec)
    }
}

impl From<DomainSpec> for DomainConfig {
    fn from(s: DomainSpec) -> Self {
        let dim = Some(s.dim());
        match s {
            DomainSpec::Ball { center, radius } => DomainConfig::Ball { center: center.into(), radius, dim },
            DomainSpec::Annulus { center, r_inner, r_outer } => DomainConfig::Annulus { center: center.into(), r_inner, r_outer, dim },
            DomainSpec::Difference { outer, hole } => DomainConfig::Difference { outer: Box::new((*outer).into()), hole: Box::new((*hole).into()), dim },
            DomainSpec::Union { parts } => DomainConfig::Union { parts: parts.into_iter().map(Into::into).collect(), dim },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p(c: &[f64]) -> Point {
        Point::new(c.to_vec()).unwrap()
    }

    fn annulus12() -> DomainSpec {
        DomainSpec::annulus(Point::origin(3), 1.0, 2.0).unwrap()
    }

    #[test]
    fn contains_examples() {
        let ball = DomainSpec::unit_ball(3);
        assert!(ball.contains(&p(&[0.5, 0.0, 0.0])).unwrap());
        assert!(!annulus12().contains(&p(&[0.5, 0.0, 0.0])).unwrap());
        assert!(annulus12().contains(&p(&[1.5, 0.0, 0.0])).unwrap());
        // boundary points are outside the open set
        assert!(!ball.contains(&p(&[1.0, 0.0, 0.0])).unwrap());
        assert!(!annulus12().contains(&p(&[0.0, 2.0, 0.0])).unwrap());
    }

    #[test]
    fn signed_distance_examples() {
        let ball = DomainSpec::unit_ball(3);
        assert_eq!(ball.signed_distance(&p(&[0.0, 0.0, 0.0])).unwrap(), -1.0);
        assert_eq!(annulus12().signed_distance(&p(&[0.0, 1.5, 0.0])).unwrap(), -0.5);
        assert_eq!(ball.signed_distance(&p(&[0.0, 0.0, 2.0])).unwrap(), 1.0);
    }

    #[test]
    fn dimension_mismatch_is_an_input_error() {
        let ball = DomainSpec::unit_ball(3);
        let x = p(&[0.1, 0.1, 0.1, 0.1]);
        assert!(matches!(ball.contains(&x), Err(Error::DimensionMismatch { expected: 3, got: 4 })));
        assert!(matches!(ball.signed_distance(&x), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn rejects_low_dimension_and_bad_radii() {
        assert!(DomainSpec::ball(Point::origin(2), 1.0).is_err());
        assert!(DomainSpec::annulus(Point::origin(3), 2.0, 1.0).is_err());
        assert!(DomainSpec::ball(Point::origin(3), -1.0).is_err());
        assert!(Point::new(vec![0.0, f64::NAN, 0.0]).is_err());
    }

    #[test]
    fn difference_hole_must_sit_inside() {
        let outer = DomainSpec::unit_ball(3);
        let hole = DomainSpec::ball(p(&[0.9, 0.0, 0.0]), 0.5).unwrap();
        assert!(DomainSpec::difference(outer, hole).is_err());
    }

    #[test]
    fn sampling_stays_inside_and_is_deterministic() {
        let ball = DomainSpec::unit_ball(3);
        let pts = ball.sample_interior(1000, 7).unwrap();
        assert_eq!(pts.len(), 1000);
        assert!(pts.iter().all(|x| ball.contains(x).unwrap()));
        assert_eq!(pts, ball.sample_interior(1000, 7).unwrap());
        assert_ne!(pts, ball.sample_interior(1000, 8).unwrap());
    }

    #[test]
    fn annulus_sample_mean_radius() {
        // uniform on A(1,2) ⊂ ℝ³: density ∝ r² on [1,2]
        // E|x| = ∫r³ / ∫r² = (15/4)/(7/3) = 45/28, E|x|² = ∫r⁴/∫r² = (31/5)/(7/3) = 93/35
        let mean = 45.0 / 28.0;
        let var = 93.0 / 35.0 - mean * mean;
        let n = 1000;
        let pts = annulus12().sample_interior(n, 11).unwrap();
        let emp = pts.iter().map(Point::norm).sum::<f64>() / n as f64;
        let sigma = (var / n as f64).sqrt();
        assert!((emp - mean).abs() < 5.0 * sigma, "empirical {emp} vs {mean}");
    }

    #[test]
    fn sub_ball_volume_fraction() {
        // Ball(0, 0.5) inside Ball(0, 1): volume ratio 1/8
        let ball = DomainSpec::unit_ball(3);
        let inner = DomainSpec::ball(Point::origin(3), 0.5).unwrap();
        let n = 20_000;
        let pts = ball.sample_interior(n, 3).unwrap();
        let hits = pts.iter().filter(|x| inner.inside(x.coords())).count() as f64;
        let q = 0.125;
        let sigma = (q * (1.0 - q) * n as f64).sqrt();
        assert!((hits - q * n as f64).abs() < 4.0 * sigma);
    }

    #[test]
    fn degenerate_domain_errors() {
        // a difference whose hole swallows the whole outer ball
        let outer = DomainSpec::ball(Point::origin(3), 1.0).unwrap();
        let hole = DomainSpec::ball(Point::origin(3), 1.0).unwrap();
        let empty = DomainSpec::Difference { outer: Box::new(outer), hole: Box::new(hole) };
        assert!(matches!(empty.sample_interior(1, 0), Err(Error::DegenerateDomain { .. })));
    }

    #[test]
    fn regular_boundary_certification() {
        assert!(DomainSpec::unit_ball(3).regular_boundary());
        assert!(annulus12().regular_boundary());
        let a = DomainSpec::ball(p(&[-0.3, 0.0, 0.0]), 0.5).unwrap();
        let b = DomainSpec::ball(p(&[0.3, 0.0, 0.0]), 0.5).unwrap();
        assert!(!DomainSpec::union(vec![a, b]).unwrap().regular_boundary());
        let far = DomainSpec::ball(p(&[3.0, 0.0, 0.0]), 0.5).unwrap();
        let near = DomainSpec::ball(p(&[0.0, 0.0, 0.0]), 0.5).unwrap();
        assert!(DomainSpec::union(vec![near, far]).unwrap().regular_boundary());
        let hole = DomainSpec::ball(p(&[0.2, 0.0, 0.0]), 0.3).unwrap();
        assert!(DomainSpec::difference(DomainSpec::unit_ball(3), hole).unwrap().regular_boundary());
    }

    #[test]
    fn annulus_membership_on_radial_grid() {
        let (delta, t) = (1.0, 2.0);
        let a = annulus12();
        for i in 0..=3000 {
            let r = 3.0 * i as f64 / 3000.0;
            let x = [0.0, r, 0.0];
            assert_eq!(a.inside(&x), delta < r && r < t, "r = {r}");
        }
    }

    #[test]
    fn partition_validation() {
        let parent = annulus12();
        let d1 = DomainSpec::annulus(Point::origin(3), 1.2, 1.8).unwrap();
        let part = Partition::new(d1, parent.clone()).unwrap();
        let x = [1.5, 0.0, 0.0];
        assert!(part.in_d1(&x) && !part.in_d2(&x));
        let y = [1.1, 0.0, 0.0];
        assert!(!part.in_d1(&y) && part.in_d2(&y));
        assert!(!part.in_d2(&[0.5, 0.0, 0.0]));

        let stray = DomainSpec::ball(p(&[0.0, 0.0, 0.0]), 1.5).unwrap();
        assert!(Partition::new(stray, parent).is_err());
    }

    #[test]
    fn json_round_trip_and_dim_check() {
        let json = r#"{"type":"annulus","center":[0,0,0],"r_inner":1.0,"r_outer":2.0,"dim":3}"#;
        let a: DomainSpec = serde_json::from_str(json).unwrap();
        assert_eq!(a, annulus12());
        let back: DomainSpec = serde_json::from_str(&serde_json::to_string(&a).unwrap()).unwrap();
        assert_eq!(back, a);
        let wrong = r#"{"type":"ball","center":[0,0,0],"radius":1.0,"dim":4}"#;
        assert!(serde_json::from_str::<DomainSpec>(wrong).is_err());
    }

    fn domains() -> Vec<DomainSpec> {
        let hole = DomainSpec::ball(p(&[0.2, 0.0, 0.0]), 0.3).unwrap();
        vec![
            DomainSpec::unit_ball(3),
            annulus12(),
            DomainSpec::difference(DomainSpec::unit_ball(3), hole).unwrap(),
            DomainSpec::union(vec![DomainSpec::ball(p(&[-0.3, 0.0, 0.0]), 0.5).unwrap(), DomainSpec::ball(p(&[0.3, 0.0, 0.0]), 0.5).unwrap()]).unwrap(),
        ]
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(10_000))]

        #[test]
        fn negative_distance_iff_contained(x in -2.5f64..2.5, y in -2.5f64..2.5, z in -2.5f64..2.5) {
            let pt = p(&[x, y, z]);
            for d in domains() {
                prop_assert_eq!(d.signed_distance(&pt).unwrap() < 0.0, d.contains(&pt).unwrap());
            }
        }
    }
}
