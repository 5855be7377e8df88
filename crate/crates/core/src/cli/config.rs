//! Run configuration: schema validation, typed parsing and digests.

use std::path::Path;

use jsonschema::JSONSchema;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::conditions::{EstimatorConfig, Family, GridChoice, PartitionRule, SweepRanges};
use crate::digest::digest_of;
use crate::error::{Error, Result};
use crate::geometry::{DomainSpec, Point};
use crate::simulate::SimParams;
use crate::solver::{Interp, DEFAULT_IDW_NEIGHBOURS};

/// The published schema, also at `schema/run-config.schema.json`.
pub const SCHEMA: &str = include_str!("../../../../schema/run-config.schema.json");

pub const CONFIG_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Excluded from the digest.
    #[serde(default, skip_serializing)]
    pub workers: Option<usize>,
    /// Excluded from the digest.
    #[serde(default, skip_serializing)]
    pub out: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain: Option<DomainSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub partition: Option<PartitionSection>,
    #[serde(default)]
    pub sim: SimParams,
    #[serde(default)]
    pub estimator: EstimatorSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<Vec<Point>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_paths: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub region: Option<DomainSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<SourceSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hypotheses: Option<HypothesesSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solve: Option<SolveSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub membership: Option<MembershipSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub multiplicity: Option<MultiplicitySection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub example2: Option<Example2Section>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle_compare: Option<OracleCompareSection>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartitionSection {
    pub d1: DomainSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimatorSection {
    #[serde(default = "default_n_per_point")]
    pub n_per_point: u64,
    #[serde(default = "default_grid")]
    pub grid: GridChoice,
    #[serde(default = "default_z")]
    pub z: f64,
    #[serde(default = "default_true")]
    pub use_oracle: bool,
    #[serde(default)]
    pub step_relative_to_scale: bool,
    #[serde(default = "default_taint")]
    pub taint_threshold: f64,
}

fn default_n_per_point() -> u64 {
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

impl Default for EstimatorSection {
    fn default() -> Self {
        EstimatorSection {
            n_per_point: default_n_per_point(),
            grid: default_grid(),
            z: default_z(),
            use_oracle: true,
            step_relative_to_scale: false,
            taint_threshold: default_taint(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum SourceSection {
    Constant {
        value: f64,
    },
    Indicator {
        region: DomainSpec,
        #[serde(default = "one")]
        value: f64,
    },
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HypothesesSection {
    pub lambda: f64,
    pub p: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<f64>,
    #[serde(default, rename = "M", skip_serializing_if = "Option::is_none")]
    pub big_m: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum NodeSpec {
    Radial { n: usize },
    Lattice { spacing: f64 },
    Sampled { n: usize, seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialField {
    Constant {
        value: f64,
    },
    Urysohn {
        m: f64,
    },
    /// A field written by `solve`.
    File {
        path: String,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveSection {
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    #[serde(default = "default_n_per_point")]
    pub n_per_node: u64,
    pub nodes: NodeSpec,
    #[serde(default = "default_interp")]
    pub interp: Interp,
    #[serde(default)]
    pub shell: f64,
    #[serde(default = "default_u0")]
    pub u0: InitialField,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stencil_h: Option<f64>,
    #[serde(default = "default_factor")]
    pub residual_factor: u8,
}

fn default_tol() -> f64 {
    1e-6
}
fn default_max_iter() -> usize {
    50
}
fn default_interp() -> Interp {
    Interp::InverseDistance { k: DEFAULT_IDW_NEIGHBOURS }
}
fn default_u0() -> InitialField {
    InitialField::Constant { value: 1.0 }
}
fn default_factor() -> u8 {
    2
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MembershipSection {
    pub nodes: NodeSpec,
    #[serde(default = "default_interp")]
    pub interp: Interp,
    pub field: InitialField,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub family: Family,
    pub ranges: SweepRanges,
    pub rule: PartitionRule,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MultiplicitySection {
    pub components: Vec<DomainSpec>,
    pub constants: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Example2Section {
    pub delta: f64,
    #[serde(rename = "T")]
    pub outer: f64,
    pub p: f64,
    pub lambda: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleCompareSection {
    #[serde(default = "default_n_radii")]
    pub n_radii: usize,
    #[serde(default = "default_n_paths")]
    pub n_paths: u64,
}

fn default_n_radii() -> usize {
    8
}
fn default_n_paths() -> u64 {
    10_000
}

impl Default for OracleCompareSection {
    fn default() -> Self {
        OracleCompareSection { n_radii: default_n_radii(), n_paths: default_n_paths() }
    }
}

fn validate_schema(value: &Value) -> Result<()> {
    let schema: Value = serde_json::from_str(SCHEMA)?;
    let compiled = JSONSchema::compile(&schema).map_err(|e| Error::Internal(format!("schema does not compile: {e}")))?;
    if let Err(errors) = compiled.validate(value) {
        let msgs: Vec<String> = errors
            .map(|e| {
                let path = e.instance_path.to_string();
                format!("at `{}`: {e}", if path.is_empty() { "/" } else { &path })
            })
            .collect();
        return Err(Error::Configuration(msgs.join("; ")));
    }
    Ok(())
}

impl RunConfig {
    /// Schema check, then typed parsing with the path of the failing field.
    pub fn from_value(value: Value) -> Result<Self> {
        validate_schema(&value)?;
        let cfg: RunConfig = serde_path_to_error::deserialize(value).map_err(|e| {
            let path = e.path().to_string();
            Error::Configuration(format!("at `{path}`: {}", e.into_inner()))
        })?;
        if cfg.version != CONFIG_VERSION {
            return Err(Error::Configuration(format!("unsupported config version {}", cfg.version)));
        }
        Ok(cfg)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let value: Value = serde_json::from_str(text).map_err(|e| Error::Configuration(format!("not valid JSON: {e}")))?;
        Self::from_value(value)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Configuration(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Applies a seed override: `--seed` beats the config's `seed`, which
    /// beats `sim.seed`.
    pub fn apply_seed(&mut self, seed: Option<u64>) {
        if let Some(s) = seed.or(self.seed) {
            self.seed = Some(s);
            self.sim.seed = s;
        }
    }

    /// Stable hash of the canonical config; `workers` and `out` excluded.
    pub fn digest(&self) -> String {
        digest_of(self)
    }

    pub fn estimator_config(&self) -> EstimatorConfig {
        let e = &self.estimator;
        EstimatorConfig {
            params: self.sim,
            n_per_point: e.n_per_point,
            grid: e.grid,
            z: e.z,
            use_oracle: e.use_oracle,
            step_relative_to_scale: e.step_relative_to_scale,
            taint_threshold: e.taint_threshold,
        }
    }

    pub fn require<'a, T>(field: &'a Option<T>, name: &str) -> Result<&'a T> {
        field.as_ref().ok_or_else(|| Error::Configuration(format!("missing field `{name}`")))
    }

    pub fn domain(&self) -> Result<&DomainSpec> {
        Self::require(&self.domain, "domain")
    }

    pub fn hypotheses(&self) -> Result<&HypothesesSection> {
        Self::require(&self.hypotheses, "hypotheses")
    }
}
