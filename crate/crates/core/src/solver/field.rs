//! Node-sampled fields on a domain, zero outside it.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{Error, Result};
use crate::estimators::radial_grid;
use crate::geometry::{distance, DomainSpec, Partition, Point};

pub const DEFAULT_IDW_NEIGHBOURS: usize = 8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Interp {
    Nearest,
    InverseDistance {
        k: usize,
    },
    /// Cubic Lagrange interpolation in `|x − center|` over the node radii,
    /// with zero knots on the radial boundary. For radially symmetric fields.
    Radial {
        center: Point,
    },
}

impl Default for Interp {
    fn default() -> Self {
        Interp::InverseDistance { k: DEFAULT_IDW_NEIGHBOURS }
    }
}

/// Uniform-cell index for nearest-neighbour queries.
#[derive(Debug, Clone)]
struct CellIndex {
    origin: Vec<f64>,
    cell: f64,
    cells: HashMap<Vec<i64>, Vec<usize>>,
}

impl CellIndex {
    fn build(nodes: &[Point]) -> Self {
        let d = nodes[0].dim();
        let mut lo = vec![f64::INFINITY; d];
        let mut hi = vec![f64::NEG_INFINITY; d];
        for x in nodes {
            for (i, &c) in x.coords().iter().enumerate() {
                lo[i] = lo[i].min(c);
                hi[i] = hi[i].max(c);
            }
        }
        let volume: f64 = lo.iter().zip(&hi).map(|(a, b)| (b - a).max(1e-9)).product();
        // about two nodes per occupied cell
        // degenerate node sets (e.g. radial knots on a segment) fall back to the longest extent
        let extent = lo.iter().zip(&hi).map(|(a, b)| b - a).fold(0.0_f64, f64::max);
        let cell = (2.0 * volume / nodes.len() as f64).powf(1.0 / d as f64).max(extent / nodes.len() as f64).max(1e-9);
        let mut index = CellIndex { origin: lo, cell, cells: HashMap::new() };
        for (i, x) in nodes.iter().enumerate() {
            let key = index.key(x.coords());
            index.cells.entry(key).or_default().push(i);
        }
        index
    }

    fn key(&self, x: &[f64]) -> Vec<i64> {
        x.iter().zip(&self.origin).map(|(c, o)| ((c - o) / self.cell).floor() as i64).collect()
    }

    /// The `k` nearest nodes as `(distance, index)`, closest first.
    fn nearest(&self, nodes: &[Point], x: &[f64], k: usize) -> Vec<(f64, usize)> {
        let k = k.min(nodes.len());
        let home = self.key(x);
        let d = home.len();
        let mut found: Vec<(f64, usize)> = Vec::new();
        let mut ring: i64 = 0;
        loop {
            let side = 2 * ring + 1;
            let mut offset = vec![0i64; d];
            for flat in 0..side.pow(d as u32) {
                let mut rem = flat;
                for o in offset.iter_mut() {
                    *o = rem % side - ring;
                    rem /= side;
                }
                if offset.iter().map(|o| o.abs()).max().unwrap_or(0) != ring {
                    continue;
                }
                let key: Vec<i64> = home.iter().zip(&offset).map(|(h, o)| h + o).collect();
                if let Some(list) = self.cells.get(&key) {
                    found.extend(list.iter().map(|&i| (distance(x, nodes[i].coords()), i)));
                }
            }
            found.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            // nodes outside the searched cube are at least `ring · cell` away
            if found.len() >= k && found[k - 1].0 <= ring as f64 * self.cell {
                found.truncate(k);
                return found;
            }
            if found.len() == nodes.len() {
                found.truncate(k);
                return found;
            }
            ring += 1;
        }
    }
}

/// Sorted radial knots for [`Interp::Radial`].
#[derive(Debug, Clone)]
struct RadialKnots {
    r: Vec<f64>,
    v: Vec<f64>,
}

impl RadialKnots {
    fn build(domain: &DomainSpec, nodes: &[Point], values: &[f64], center: &Point) -> Result<Self> {
        let mut knots: Vec<(f64, f64)> = nodes.iter().zip(values).map(|(x, &v)| (distance(x.coords(), center.coords()), v)).collect();
        if let (Some(c), Some((lo, hi))) = (domain.radial_center(), domain.radial_extent()) {
            if c == center {
                knots.push((hi, 0.0));
                if lo > 0.0 {
                    knots.push((lo, 0.0));
                }
            }
        }
        knots.sort_by(|a, b| a.0.total_cmp(&b.0));
        if knots.windows(2).any(|w| w[1].0 - w[0].0 <= 1e-12 * w[1].0.max(1.0)) {
            return Err(Error::Configuration("radial interpolation needs nodes at distinct radii".into()));
        }
        if knots.len() < 2 {
            return Err(Error::Configuration("radial interpolation needs at least two knots".into()));
        }
        Ok(RadialKnots { r: knots.iter().map(|k| k.0).collect(), v: knots.iter().map(|k| k.1).collect() })
    }

    fn eval(&self, r: f64) -> f64 {
        let n = self.r.len();
        let m = n.min(4);
        let pos = self.r.partition_point(|&ri| ri < r);
        let start = pos.saturating_sub(m / 2).min(n - m);
        let (rs, vs) = (&self.r[start..start + m], &self.v[start..start + m]);
        let mut acc = 0.0;
        for j in 0..m {
            let mut w = 1.0;
            for i in 0..m {
                if i != j {
                    w *= (r - rs[i]) / (rs[j] - rs[i]);
                }
            }
            acc += w * vs[j];
        }
        acc
    }
}

#[derive(Debug, Clone)]
enum Lookup {
    Cells(CellIndex),
    Radial(RadialKnots),
}

/// Field values at interior nodes of a domain. Evaluation interpolates
/// between nodes inside D and returns 0 outside D or within `shell` of ∂D.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "FieldData", into = "FieldData")]
pub struct Field {
    domain: DomainSpec,
    nodes: Vec<Point>,
    values: Vec<f64>,
    interp: Interp,
    shell: f64,
    lookup: Lookup,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FieldData {
    domain: DomainSpec,
    nodes: Vec<Point>,
    values: Vec<f64>,
    #[serde(default)]
    interp: Interp,
    #[serde(default)]
    shell: f64,
}

impl TryFrom<FieldData> for Field {
    type Error = Error;
    fn try_from(d: FieldData) -> Result<Self> {
        Field::new(d.domain, d.nodes, d.values, d.interp)?.with_shell(d.shell)
    }
}

impl From<Field> for FieldData {
    fn from(f: Field) -> Self {
        FieldData { domain: f.domain, nodes: f.nodes, values: f.values, interp: f.interp, shell: f.shell }
    }
}

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        self.domain == other.domain && self.nodes == other.nodes && self.values == other.values && self.interp == other.interp && self.shell == other.shell
    }
}

impl Field {
    pub fn new(domain: DomainSpec, nodes: Vec<Point>, values: Vec<f64>, interp: Interp) -> Result<Self> {
        if nodes.is_empty() {
            return Err(Error::Configuration("a field needs at least one node".into()));
        }
        if nodes.len() != values.len() {
            return Err(Error::input(format!("{} nodes but {} values", nodes.len(), values.len())));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::input(format!("field value {v} is not finite")));
        }
        for x in &nodes {
            if !domain.contains(x)? {
                return Err(Error::input(format!("node {:?} is not inside the domain", x.coords())));
            }
        }
        let lookup = match &interp {
            Interp::Nearest => Lookup::Cells(CellIndex::build(&nodes)),
            Interp::InverseDistance { k } => {
                if *k == 0 {
                    return Err(Error::Configuration("inverse-distance interpolation needs k >= 1".into()));
                }
                Lookup::Cells(CellIndex::build(&nodes))
            }
            Interp::Radial { center } => {
                if center.dim() != domain.dim() {
                    return Err(Error::DimensionMismatch { expected: domain.dim(), got: center.dim() });
                }
                Lookup::Radial(RadialKnots::build(&domain, &nodes, &values, center)?)
            }
        };
        Ok(Field { domain, nodes, values, interp, shell: 0.0, lookup })
    }

    pub fn from_fn(domain: DomainSpec, nodes: Vec<Point>, interp: Interp, f: impl Fn(&Point) -> f64) -> Result<Self> {
        let values = nodes.iter().map(f).collect();
        Field::new(domain, nodes, values, interp)
    }

    pub fn constant(domain: DomainSpec, nodes: Vec<Point>, c: f64, interp: Interp) -> Result<Self> {
        Field::from_fn(domain, nodes, interp, |_| c)
    }

    /// Treats points within `shell` of ∂D as absorbed.
    pub fn with_shell(mut self, shell: f64) -> Result<Self> {
        if !(shell >= 0.0 && shell.is_finite()) {
            return Err(Error::input(format!("absorption shell must be nonnegative, got {shell}")));
        }
        self.shell = shell;
        Ok(self)
    }

    /// Same nodes and interpolation, new values.
    pub fn with_values(&self, values: Vec<f64>) -> Result<Self> {
        Field::new(self.domain.clone(), self.nodes.clone(), values, self.interp.clone())?.with_shell(self.shell)
    }

    pub fn domain(&self) -> &DomainSpec {
        &self.domain
    }

    pub fn nodes(&self) -> &[Point] {
        &self.nodes
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn interp(&self) -> &Interp {
        &self.interp
    }

    /// `max |u|` over the nodes.
    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |a, v| a.max(v.abs()))
    }

    /// `max |u − v|` over the shared nodes.
    pub fn sup_distance(&self, other: &Field) -> Result<f64> {
        if self.nodes != other.nodes {
            return Err(Error::input("fields live on different nodes"));
        }
        Ok(self.values.iter().zip(&other.values).fold(0.0, |a, (x, y)| a.max((x - y).abs())))
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        if self.domain.sd(x) >= -self.shell {
            return 0.0;
        }
        match (&self.lookup, &self.interp) {
            (Lookup::Radial(knots), Interp::Radial { center }) => knots.eval(distance(x, center.coords())),
            (Lookup::Cells(index), Interp::Nearest) => self.values[index.nearest(&self.nodes, x, 1)[0].1],
            (Lookup::Cells(index), Interp::InverseDistance { k }) => {
                let near = index.nearest(&self.nodes, x, *k);
                let scale = 1e-12 * self.domain.length_scale();
                if near[0].0 <= scale {
                    return self.values[near[0].1];
                }
                let (mut num, mut den) = (0.0, 0.0);
                for &(dist, i) in &near {
                    let w = 1.0 / (dist * dist);
                    num += w * self.values[i];
                    den += w;
                }
                num / den
            }
            _ => unreachable!("lookup built from interp"),
        }
    }

    /// JSONL: a header line with the digest and field metadata, then one
    /// `{"x": [...], "u": value}` line per node.
    pub fn write_jsonl(&self, path: &Path, config_digest: &str) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        let header = json!({
            "schema": "semilinear-mc/field/v1",
            "config_digest": config_digest,
            "domain": self.domain,
            "interp": self.interp,
            "shell": self.shell,
            "n_nodes": self.nodes.len(),
        });
        writeln!(w, "{header}")?;
        for (x, u) in self.nodes.iter().zip(&self.values) {
            writeln!(w, "{}", json!({"x": x, "u": u}))?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads a file written by [`Field::write_jsonl`]; returns the field and the digest.
    pub fn read_jsonl(path: &Path) -> Result<(Field, String)> {
        #[derive(Deserialize)]
        struct Header {
            config_digest: String,
            domain: DomainSpec,
            interp: Interp,
            shell: f64,
        }
        #[derive(Deserialize)]
        struct Node {
            x: Point,
            u: f64,
        }
        let mut lines = BufReader::new(File::open(path)?).lines();
        let header: Header = serde_json::from_str(&lines.next().ok_or_else(|| Error::input("empty field file"))??)?;
        let (mut nodes, mut values) = (Vec::new(), Vec::new());
        for line in lines {
            let node: Node = serde_json::from_str(&line?)?;
            nodes.push(node.x);
            values.push(node.u);
        }
        let field = Field::new(header.domain, nodes, values, header.interp)?.with_shell(header.shell)?;
        Ok((field, header.config_digest))
    }
}

/// `n` nodes at cell midpoints of the radial extent of a ball or annulus.
pub fn radial_nodes(domain: &DomainSpec, n: usize) -> Result<Vec<Point>> {
    match (domain.radial_center(), domain.radial_extent()) {
        (Some(c), Some((lo, hi))) => Ok(radial_grid(c, lo, hi, n)),
        _ => Err(Error::Configuration("radial nodes need a ball or annulus".into())),
    }
}

/// Points of the lattice `spacing · ℤᵈ` (anchored at the bounding-box
/// centre) lying inside the domain.
pub fn lattice_nodes(domain: &DomainSpec, spacing: f64) -> Result<Vec<Point>> {
    if !(spacing > 0.0) {
        return Err(Error::input(format!("lattice spacing must be positive, got {spacing}")));
    }
    let (lo, hi) = domain.bounding_box();
    let mid: Vec<f64> = lo.iter().zip(&hi).map(|(a, b)| 0.5 * (a + b)).collect();
    let half: Vec<i64> = lo.iter().zip(&hi).map(|(a, b)| ((b - a) / (2.0 * spacing)).ceil() as i64).collect();
    let d = mid.len();
    let side: Vec<i64> = half.iter().map(|h| 2 * h + 1).collect();
    let total: i64 = side.iter().product();
    let mut out = Vec::new();
    let mut x = vec![0.0; d];
    for flat in 0..total {
        let mut rem = flat;
        for i in 0..d {
            x[i] = mid[i] + ((rem % side[i]) - half[i]) as f64 * spacing;
            rem /= side[i];
        }
        if domain.inside(&x) {
            out.push(Point::new(x.clone())?);
        }
    }
    Ok(out)
}

/// Seed field in the set B: `m` at nodes of `D₁`, `m · min(1, dist(x, ∂D)/w)`
/// elsewhere, where `w` is the smallest sampled distance from `D₁` to ∂D.
pub fn urysohn_seed(partition: &Partition, m: f64, nodes: Vec<Point>, interp: Interp) -> Result<Field> {
    let domain = &partition.parent;
    let w = partition.d1.sample_interior(4096, 0x5EED)?.iter().map(|x| -domain.sd(x.coords())).fold(f64::INFINITY, f64::min);
    if !(w > 0.0) {
        return Err(Error::input("D1 touches the boundary of the domain"));
    }
    Field::from_fn(domain.clone(), nodes, interp, |x| if partition.in_d1(x.coords()) { m } else { m * (-domain.sd(x.coords()) / w).clamp(0.0, 1.0) })
}
