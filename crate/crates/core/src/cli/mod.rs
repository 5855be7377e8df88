//! Command-line entry point: configuration, dispatch, persistence.
//!
//! Exit codes: 0 success, 1 other failure, 2 validation error, 3 estimator
//! taint (truncated paths over threshold), 4 solver divergence.

pub mod config;
pub mod plot;
pub mod records;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::conditions::{
    check_conditions, example2_inequality_report, feasibility_sweep, find_feasible_constants, multiplicity_enumerate, EstimatorConfig, Hypotheses,
};
use crate::error::{Error, Result};
use crate::estimators::{expected_exit_time, expected_occupation, green_apply, radial_grid, Estimate};
use crate::geometry::{DomainSpec, Partition, Point};
use crate::oracles::{annulus_exit_time, ball_exit_time, AnnulusSpec3D};
use crate::solver::{lattice_nodes, membership_b, picard_solve, radial_nodes, residual_check, urysohn_seed, Field, PicardConfig, ResidualMode, SolveStatus};
use config::{InitialField, NodeSpec, RunConfig, SourceSection};
use plot::{emit_plotdata, PlotKind};
use records::{append_record, read_records, ResultRecord, Table, RESULTS_FILE};

pub const ENV_OUT: &str = "SEMILINEAR_MC_OUT";
pub const ENV_WORKERS: &str = "SEMILINEAR_MC_WORKERS";

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_TAINT: i32 = 3;
pub const EXIT_DIVERGED: i32 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Parser)]
#[command(name = "semilinear-mc", version, about = "Monte Carlo toolkit for Δu + λuᵖ = 0 on bounded domains")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, clap::Args)]
pub struct Common {
    /// Run configuration (JSON).
    #[arg(long)]
    pub config: PathBuf,
    /// Overrides the configured seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads; never changes results.
    #[arg(long)]
    pub workers: Option<usize>,
    /// Output directory for results.jsonl and exports.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also export a CSV table when `csv`.
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// E_x[τ_D] at each configured point.
    EstimateExit(Common),
    /// Λ_D[region](x) at each configured point.
    EstimateOccupation(Common),
    /// G_D f(x) for the configured source at each point.
    GreenApply(Common),
    /// The three existence conditions for given (λ, p, m, M).
    CheckConditions(Common),
    /// Equality-saturation search for (m, M).
    FindConstants(Common),
    /// Both sides of the closed-form annulus inequality.
    Example2Report(Common),
    /// Feasibility over a parameter grid; resumable.
    Sweep(Common),
    /// Picard iteration of T with a residual check.
    Solve(Common),
    /// Membership of a field in the set B.
    Membership(Common),
    /// Monte Carlo exit times against the closed forms along a radius.
    OracleCompare(Common),
    /// The 2ˢ − 1 hypothesis sets of s disjoint components.
    Multiplicity(Common),
    /// Plot data and SVG from stored result records.
    Plot {
        /// A results.jsonl file.
        #[arg(long)]
        records: PathBuf,
        #[arg(long, value_enum)]
        kind: PlotKind,
        /// Keep only records with this config digest.
        #[arg(long)]
        digest: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::EstimateExit(_) => "estimate-exit",
            Command::EstimateOccupation(_) => "estimate-occupation",
            Command::GreenApply(_) => "green-apply",
            Command::CheckConditions(_) => "check-conditions",
            Command::FindConstants(_) => "find-constants",
            Command::Example2Report(_) => "example2-report",
            Command::Sweep(_) => "sweep",
            Command::Solve(_) => "solve",
            Command::Membership(_) => "membership",
            Command::OracleCompare(_) => "oracle-compare",
            Command::Multiplicity(_) => "multiplicity",
            Command::Plot { .. } => "plot",
        }
    }

    fn common(&self) -> Option<&Common> {
        match self {
            Command::EstimateExit(c)
            | Command::EstimateOccupation(c)
            | Command::GreenApply(c)
            | Command::CheckConditions(c)
            | Command::FindConstants(c)
            | Command::Example2Report(c)
            | Command::Sweep(c)
            | Command::Solve(c)
            | Command::Membership(c)
            | Command::OracleCompare(c)
            | Command::Multiplicity(c) => Some(c),
            Command::Plot { .. } => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Status {
    Ok,
    Tainted,
    Diverged,
}

/// What a subcommand produced: the persisted payload, a CSV table and the
/// summary lines, which only repeat numbers from the payload.
struct Outcome {
    payload: Value,
    table: Table,
    summary: Vec<String>,
    status: Status,
}

struct Context {
    cfg: RunConfig,
    digest: String,
    out: PathBuf,
}

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Input(_)
        | Error::DimensionMismatch { .. }
        | Error::Configuration(_)
        | Error::Json(_)
        | Error::UnsupportedScheme { .. }
        | Error::DegenerateDomain { .. }
        | Error::GeometryTooThin { .. } => EXIT_VALIDATION,
        _ => EXIT_FAILURE,
    }
}

/// Parses `argv` (program name first), runs the subcommand and returns the
/// process exit status.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_VALIDATION } else { EXIT_OK };
        }
    };
    match execute(&cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn env_workers() -> Result<Option<usize>> {
    match std::env::var(ENV_WORKERS) {
        Ok(v) => v.trim().parse().map(Some).map_err(|_| Error::Configuration(format!("{ENV_WORKERS} must be a positive integer, got `{v}`"))),
        Err(_) => Ok(None),
    }
}

fn out_dir(flag: Option<&PathBuf>, cfg: Option<&str>) -> PathBuf {
    flag.cloned().or_else(|| std::env::var_os(ENV_OUT).map(PathBuf::from)).or_else(|| cfg.map(PathBuf::from)).unwrap_or_else(|| PathBuf::from("out"))
}

fn execute(command: &Command) -> Result<i32> {
    if let Command::Plot { records, kind, digest, out } = command {
        let mut recs = read_records(records)?;
        if let Some(d) = digest {
            recs.retain(|r| &r.config_digest == d);
        }
        for path in emit_plotdata(&recs, *kind, &out_dir(out.as_ref(), None))? {
            println!("wrote {}", path.display());
        }
        return Ok(EXIT_OK);
    }
    let common = command.common().expect("every other subcommand has common flags");
    let mut cfg = RunConfig::load(&common.config)?;
    cfg.apply_seed(common.seed);
    cfg.sim.validate()?;
    let workers = match common.workers {
        Some(w) => Some(w),
        None => env_workers()?.or(cfg.workers),
    };
    if workers == Some(0) {
        return Err(Error::Configuration("worker count must be positive".into()));
    }
    let ctx = Context { digest: cfg.digest(), out: out_dir(common.out.as_ref(), cfg.out.as_deref()), cfg };

    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(w) = workers {
        builder = builder.num_threads(w);
    }
    let pool = builder.build().map_err(|e| Error::Internal(format!("thread pool: {e}")))?;
    let name = command.name();
    let outcome = pool.install(|| dispatch(command, &ctx))?;

    let record = ResultRecord::new(&ctx.digest, name, outcome.payload);
    append_record(&ctx.out.join(RESULTS_FILE), &record)?;
    if common.format == Format::Csv {
        std::fs::write(ctx.out.join(format!("{name}-{}.csv", ctx.digest)), outcome.table.to_csv()?)?;
    }
    println!("{name} [{}]", ctx.digest);
    for line in &outcome.summary {
        println!("  {line}");
    }
    Ok(match outcome.status {
        Status::Ok => EXIT_OK,
        Status::Tainted => {
            eprintln!("warning: truncated paths exceed the taint threshold");
            EXIT_TAINT
        }
        Status::Diverged => {
            eprintln!("error: the solver diverged");
            EXIT_DIVERGED
        }
    })
}

fn dispatch(command: &Command, ctx: &Context) -> Result<Outcome> {
    match command {
        Command::EstimateExit(_) => estimate(ctx, Estimator::Exit),
        Command::EstimateOccupation(_) => estimate(ctx, Estimator::Occupation),
        Command::GreenApply(_) => estimate(ctx, Estimator::Green),
        Command::CheckConditions(_) => cmd_check_conditions(ctx),
        Command::FindConstants(_) => cmd_find_constants(ctx),
        Command::Example2Report(_) => cmd_example2(ctx),
        Command::Sweep(_) => cmd_sweep(ctx),
        Command::Solve(_) => cmd_solve(ctx),
        Command::Membership(_) => cmd_membership(ctx),
        Command::OracleCompare(_) => cmd_oracle_compare(ctx),
        Command::Multiplicity(_) => cmd_multiplicity(ctx),
        Command::Plot { .. } => unreachable!("handled before dispatch"),
    }
}

/// Closed-form exit time at `x` for balls and 3-D annuli.
pub fn exit_time_oracle(domain: &DomainSpec, x: &Point) -> Option<f64> {
    match domain {
        DomainSpec::Ball { center, radius } => {
            let rel: Vec<f64> = x.coords().iter().zip(center.coords()).map(|(a, b)| a - b).collect();
            ball_exit_time(*radius, domain.dim(), &Point::new(rel).ok()?).ok()
        }
        DomainSpec::Annulus { .. } => annulus_exit_time(&AnnulusSpec3D::from_domain(domain)?, x).ok(),
        _ => None,
    }
}

fn fmt(v: f64) -> String {
    format!("{v}")
}

fn taint(estimates: &[&Estimate], threshold: f64) -> Status {
    if estimates.iter().any(|e| e.truncated_fraction > threshold) {
        Status::Tainted
    } else {
        Status::Ok
    }
}

#[derive(Clone, Copy)]
enum Estimator {
    Exit,
    Occupation,
    Green,
}

fn estimate(ctx: &Context, which: Estimator) -> Result<Outcome> {
    let cfg = &ctx.cfg;
    let domain = cfg.domain()?;
    let points = match &cfg.points {
        Some(p) => p.clone(),
        None => vec![domain.radial_center().cloned().ok_or_else(|| Error::Configuration("missing field `points`".into()))?],
    };
    let n = cfg.n_paths.unwrap_or(cfg.estimator.n_per_point);
    let mut rows = Vec::new();
    let mut table = Table::new(&["x", "mean", "std_error", "n_paths", "truncated_fraction", "oracle"]);
    let mut summary = Vec::new();
    let mut estimates = Vec::new();
    for x in &points {
        let (e, oracle) = match which {
            Estimator::Exit => (expected_exit_time(domain, x, &cfg.sim, n)?, exit_time_oracle(domain, x)),
            Estimator::Occupation => {
                let region = RunConfig::require(&cfg.region, "region")?;
                (expected_occupation(domain, region, x, &cfg.sim, n)?, None)
            }
            Estimator::Green => {
                let source = RunConfig::require(&cfg.source, "source")?;
                let e = match source {
                    SourceSection::Constant { value } => {
                        let v = *value;
                        green_apply(domain, &move |_: &[f64]| v, x, &cfg.sim, n)?
                    }
                    SourceSection::Indicator { region, value } => {
                        let v = *value;
                        green_apply(domain, &|y: &[f64]| if region.inside(y) { v } else { 0.0 }, x, &cfg.sim, n)?
                    }
                };
                let oracle = match source {
                    SourceSection::Constant { value } => exit_time_oracle(domain, x).map(|t| value * t),
                    SourceSection::Indicator { .. } => None,
                };
                (e, oracle)
            }
        };
        summary.push(format!(
            "x = {:?}: mean = {} std_error = {} n_paths = {}{}",
            x.coords(),
            e.mean,
            e.std_error,
            e.n_paths,
            oracle.map(|o| format!(" oracle = {o}")).unwrap_or_default()
        ));
        table.push(vec![
            format!("{:?}", x.coords()),
            fmt(e.mean),
            fmt(e.std_error),
            e.n_paths.to_string(),
            fmt(e.truncated_fraction),
            oracle.map(fmt).unwrap_or_default(),
        ]);
        rows.push(json!({"x": x, "estimate": e, "oracle": oracle}));
        estimates.push(e);
    }
    let status = taint(&estimates.iter().collect::<Vec<_>>(), cfg.estimator.taint_threshold);
    Ok(Outcome { payload: json!({"rows": rows}), table, summary, status })
}

fn partition(cfg: &RunConfig) -> Result<Partition> {
    let p = RunConfig::require(&cfg.partition, "partition")?;
    Partition::new(p.d1.clone(), cfg.domain()?.clone())
}

fn conditions_table(report: &crate::conditions::ConditionsReport) -> (Table, Vec<String>) {
    let mut table = Table::new(&["condition", "lhs", "rhs", "margin", "verdict", "conservative", "anti_conservative"]);
    let mut summary = Vec::new();
    for (name, c) in [("cond1", &report.cond1), ("cond2", &report.cond2), ("cond3", &report.cond3)] {
        table.push(vec![
            name.into(),
            fmt(c.lhs),
            fmt(c.rhs),
            fmt(c.margin),
            c.verdict.to_string(),
            c.conservative.to_string(),
            c.anti_conservative.to_string(),
        ]);
        summary.push(format!(
            "{name}: lhs = {} rhs = {} margin = {} verdict = {} (conservative {}, anti-conservative {})",
            c.lhs, c.rhs, c.margin, c.verdict, c.conservative, c.anti_conservative
        ));
    }
    (table, summary)
}

fn cmd_check_conditions(ctx: &Context) -> Result<Outcome> {
    let cfg = &ctx.cfg;
    let h = cfg.hypotheses()?;
    let m = RunConfig::require(&h.m, "hypotheses.m")?;
    let big_m = RunConfig::require(&h.big_m, "hypotheses.M")?;
    let hyp = Hypotheses::new(h.lambda, h.p, *m, *big_m, partition(cfg)?)?;
    let report = check_conditions(&hyp, &cfg.estimator_config())?;
    let (table, mut summary) = conditions_table(&report);
    summary.push(format!("all hold: {}", report.all_hold()));
    let status = if report.tainted { Status::Tainted } else { Status::Ok };
    Ok(Outcome { payload: json!({"report": report, "all_hold": report.all_hold()}), table, summary, status })
}

fn cmd_find_constants(ctx: &Context) -> Result<Outcome> {
    let cfg = &ctx.cfg;
    let h = cfg.hypotheses()?;
    let f = find_feasible_constants(&partition(cfg)?, h.lambda, h.p, &cfg.estimator_config())?;
    let (table, mut summary) = conditions_table(&f.report);
    summary.push(format!("m = {} M = {}", f.m, f.big_m));
    summary.push(match f.constants {
        Some(_) => "feasible".to_string(),
        None => format!("infeasible: failing {}", f.failing.join(", ")),
    });
    let status = if f.report.tainted { Status::Tainted } else { Status::Ok };
    Ok(Outcome { payload: serde_json::to_value(&f)?, table, summary, status })
}

fn cmd_example2(ctx: &Context) -> Result<Outcome> {
    let s = RunConfig::require(&ctx.cfg.example2, "example2")?;
    let r = example2_inequality_report(s.delta, s.outer, s.p, s.lambda)?;
    let mut table = Table::new(&["delta", "T", "p", "lambda", "sup_exit", "M", "M_exponent_side", "bound_side", "printed_direction_holds"]);
    table.push(vec![
        fmt(r.delta),
        fmt(r.outer),
        fmt(r.p),
        fmt(r.lambda),
        fmt(r.sup_exit),
        fmt(r.big_m),
        fmt(r.m_exponent_side),
        fmt(r.bound_side),
        r.printed_direction_holds.to_string(),
    ]);
    let summary = vec![
        format!("sup E[tau] = {} M = {}", r.sup_exit, r.big_m),
        format!("M^(2-p^2) = {} (T^2+T delta+delta^2)^((2-p^2)/(1-p)) = {}", r.m_exponent_side, r.bound_side),
        format!("printed direction holds: {}", r.printed_direction_holds),
    ];
    Ok(Outcome { payload: serde_json::to_value(&r)?, table, summary, status: Status::Ok })
}

fn cmd_sweep(ctx: &Context) -> Result<Outcome> {
    let cfg = &ctx.cfg;
    let s = RunConfig::require(&cfg.sweep, "sweep")?;
    let store = ctx.out.join(format!("sweep-{}.jsonl", ctx.digest));
    let rows = feasibility_sweep(s.family, &s.ranges, s.rule, &cfg.estimator_config(), Some(&store))?;
    let mut table = Table::new(&["delta", "T", "p", "lambda", "feasible", "m", "M", "failing", "cond1_margin", "cond2_margin", "cond3_margin", "error"]);
    let mut summary = Vec::new();
    for r in &rows {
        let [m1, m2, m3] = r.margins.map(|m| m.map(fmt)).unwrap_or_default();
        table.push(vec![
            r.delta.map(fmt).unwrap_or_default(),
            fmt(r.outer),
            fmt(r.p),
            fmt(r.lambda),
            r.feasible.to_string(),
            r.m.map(fmt).unwrap_or_default(),
            r.big_m.map(fmt).unwrap_or_default(),
            r.failing.join(";"),
            m1,
            m2,
            m3,
            r.error.clone().unwrap_or_default(),
        ]);
        summary.push(format!(
            "{}T = {} p = {} lambda = {}: feasible = {} failing = [{}]{}",
            r.delta.map(|d| format!("delta = {d} ")).unwrap_or_default(),
            r.outer,
            r.p,
            r.lambda,
            r.feasible,
            r.failing.join(", "),
            r.error.as_ref().map(|e| format!(" error: {e}")).unwrap_or_default()
        ));
    }
    let status = if rows.iter().any(|r| r.tainted) { Status::Tainted } else { Status::Ok };
    Ok(Outcome { payload: json!({"rows": rows, "store": store}), table, summary, status })
}

fn nodes(domain: &DomainSpec, spec: &NodeSpec) -> Result<Vec<Point>> {
    match spec {
        NodeSpec::Radial { n } => radial_nodes(domain, *n),
        NodeSpec::Lattice { spacing } => lattice_nodes(domain, *spacing),
        NodeSpec::Sampled { n, seed } => domain.sample_interior(*n, *seed),
    }
}

fn initial_field(cfg: &RunConfig, spec: &InitialField, nodes_spec: &NodeSpec, interp: &crate::solver::Interp) -> Result<Field> {
    let domain = cfg.domain()?;
    match spec {
        InitialField::Constant { value } => Field::constant(domain.clone(), nodes(domain, nodes_spec)?, *value, interp.clone()),
        InitialField::Urysohn { m } => urysohn_seed(&partition(cfg)?, *m, nodes(domain, nodes_spec)?, interp.clone()),
        InitialField::File { path } => {
            let (f, _) = Field::read_jsonl(Path::new(path))?;
            if f.domain() != domain {
                return Err(Error::Configuration(format!("field in {path} lives on a different domain")));
            }
            Ok(f)
        }
    }
}

fn cmd_solve(ctx: &Context) -> Result<Outcome> {
    let cfg = &ctx.cfg;
    let h = cfg.hypotheses()?;
    let s = RunConfig::require(&cfg.solve, "solve")?;
    let u0 = initial_field(cfg, &s.u0, &s.nodes, &s.interp)?.with_shell(s.shell)?;
    let pc = PicardConfig { lambda: h.lambda, p: h.p, tol: s.tol, max_iter: s.max_iter, n_per_node: s.n_per_node, params: cfg.sim, m_hint: h.big_m };
    let (u, trace) = picard_solve(&u0, &pc)?;
    std::fs::create_dir_all(&ctx.out)?;
    let field_path = ctx.out.join(format!("field-{}.jsonl", ctx.digest));
    u.write_jsonl(&field_path, &ctx.digest)?;
    let residual = match s.stencil_h {
        Some(sh) => Some(residual_check(&u, ResidualMode::Nonlinear { lambda: h.lambda, p: h.p, factor: s.residual_factor as f64 }, sh)?),
        None => None,
    };

    let mut table = Table::new(&["iteration", "sup_change", "sup_norm", "max_std_error", "contraction"]);
    for r in &trace.records {
        table.push(vec![r.iteration.to_string(), fmt(r.sup_change), fmt(r.sup_norm), fmt(r.max_std_error), fmt(r.contraction)]);
    }
    let mut summary = vec![
        format!("status = {:?} iterations = {}", trace.status, trace.records.len()),
        format!("C = {} (M = {}, sup E[tau] = {})", trace.contraction, trace.big_m, trace.sup_exit),
    ];
    if let Some(w) = &trace.warning {
        summary.push(format!("warning: {w}"));
    }
    if let Some(last) = trace.records.last() {
        summary.push(format!("last sup_change = {} sup_norm = {}", last.sup_change, last.sup_norm));
    }
    if let Some(r) = &residual {
        summary.push(format!("residual: sup = {} normalized = {} over {} nodes", r.sup_residual, r.normalized, r.eligible));
    }
    summary.push(format!("field written to {}", field_path.display()));
    let status = if trace.status == SolveStatus::Diverged { Status::Diverged } else { Status::Ok };
    Ok(Outcome { payload: json!({"trace": trace, "residual": residual, "field_path": field_path, "n_nodes": u.nodes().len()}), table, summary, status })
}

fn cmd_membership(ctx: &Context) -> Result<Outcome> {
    let cfg = &ctx.cfg;
    let h = cfg.hypotheses()?;
    let s = RunConfig::require(&cfg.membership, "membership")?;
    let m = RunConfig::require(&h.m, "hypotheses.m")?;
    let big_m = RunConfig::require(&h.big_m, "hypotheses.M")?;
    let hyp = Hypotheses::new(h.lambda, h.p, *m, *big_m, partition(cfg)?)?;
    let u = initial_field(cfg, &s.field, &s.nodes, &s.interp)?;
    let r = membership_b(&u, &hyp, &cfg.sim, cfg.estimator.n_per_point, cfg.estimator.grid)?;
    let mut table = Table::new(&["item", "value", "bound", "margin", "holds"]);
    table.push(vec!["i".into(), fmt(r.inf_l_d1.value), fmt(hyp.m), fmt(r.margins[0]), r.i.to_string()]);
    table.push(vec!["ii".into(), fmt(r.sup_l_d2.value), fmt(hyp.m), fmt(r.margins[1]), r.ii.to_string()]);
    table.push(vec!["iii".into(), fmt(r.sup_norm), fmt(hyp.big_m), fmt(r.margins[2]), r.iii.to_string()]);
    let summary = vec![
        format!("i: inf L[D1] = {} >= m: {} (margin {})", r.inf_l_d1.value, r.i, r.margins[0]),
        format!("ii: sup L[D2] = {} <= m: {} (margin {})", r.sup_l_d2.value, r.ii, r.margins[1]),
        format!("iii: |u| = {} <= M: {} (margin {})", r.sup_norm, r.iii, r.margins[2]),
    ];
    let tainted = [&r.inf_l_d1, &r.sup_l_d2].iter().any(|e| e.truncated_fraction > cfg.estimator.taint_threshold);
    Ok(Outcome { payload: serde_json::to_value(&r)?, table, summary, status: if tainted { Status::Tainted } else { Status::Ok } })
}

fn cmd_oracle_compare(ctx: &Context) -> Result<Outcome> {
    let cfg = &ctx.cfg;
    let domain = cfg.domain()?;
    let s = cfg.oracle_compare.clone().unwrap_or_default();
    let supported = matches!(domain, DomainSpec::Ball { .. }) || AnnulusSpec3D::from_domain(domain).is_some();
    let (center, (lo, hi)) = match (domain.radial_center(), domain.radial_extent()) {
        (Some(c), Some(e)) if supported => (c, e),
        _ => return Err(Error::Configuration("oracle-compare needs a ball or a 3-D annulus".into())),
    };
    let mut table = Table::new(&["radius", "mc_mean", "std_error", "oracle", "z_score"]);
    let mut rows = Vec::new();
    let mut summary = Vec::new();
    let mut estimates = Vec::new();
    for x in radial_grid(center, lo, hi, s.n_radii) {
        let e = expected_exit_time(domain, &x, &cfg.sim, s.n_paths)?;
        let radius = x.distance(center);
        let oracle = exit_time_oracle(domain, &x).ok_or_else(|| Error::Internal("oracle unavailable".into()))?;
        let z = e.z_score(oracle);
        table.push(vec![fmt(radius), fmt(e.mean), fmt(e.std_error), fmt(oracle), fmt(z)]);
        summary.push(format!("r = {radius}: mc = {} ± {} oracle = {oracle} z = {z}", e.mean, e.std_error));
        rows.push(json!({"radius": radius, "mc_mean": e.mean, "std_error": e.std_error, "oracle": oracle, "z_score": z, "estimate": e}));
        estimates.push(e);
    }
    let status = taint(&estimates.iter().collect::<Vec<_>>(), cfg.estimator.taint_threshold);
    Ok(Outcome { payload: json!({"rows": rows}), table, summary, status })
}

fn cmd_multiplicity(ctx: &Context) -> Result<Outcome> {
    let cfg = &ctx.cfg;
    let h = cfg.hypotheses()?;
    let s = RunConfig::require(&cfg.multiplicity, "multiplicity")?;
    let est: EstimatorConfig = cfg.estimator_config();
    let reports = multiplicity_enumerate(cfg.domain()?, &s.components, &s.constants, h.lambda, h.p, &est)?;
    let mut table = Table::new(&["index_set", "m_hat", "M_hat", "all_hold", "error"]);
    let mut summary = vec![format!("{} hypothesis sets", reports.len())];
    for r in &reports {
        let all = r.report.as_ref().map(|x| x.all_hold());
        let idx: Vec<String> = r.set.index_set.iter().map(|i| i.to_string()).collect();
        table.push(vec![
            idx.join(";"),
            fmt(r.set.m_hat),
            fmt(r.set.big_m_hat),
            all.map(|a| a.to_string()).unwrap_or_default(),
            r.error.clone().unwrap_or_default(),
        ]);
        let verdict = match all {
            Some(a) => format!("all hold = {a}"),
            None => "skipped: m_hat > M_hat".to_string(),
        };
        summary.push(format!("I = {{{}}}: m_hat = {} M_hat = {} {verdict}", idx.join(","), r.set.m_hat, r.set.big_m_hat));
    }
    let tainted = reports.iter().filter_map(|r| r.report.as_ref()).any(|r| r.tainted);
    Ok(Outcome { payload: json!({"sets": reports}), table, summary, status: if tainted { Status::Tainted } else { Status::Ok } })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&Error::Configuration("x".into())), EXIT_VALIDATION);
        assert_eq!(exit_code(&Error::Internal("x".into())), EXIT_FAILURE);
        assert_eq!(run(["semilinear-mc", "no-such-command"]), EXIT_VALIDATION);
    }

    #[test]
    fn oracle_lookup() {
        let ball = DomainSpec::ball(Point::new(vec![1.0, 0.0, 0.0]).unwrap(), 2.0).unwrap();
        assert_eq!(exit_time_oracle(&ball, &Point::new(vec![1.0, 0.0, 0.0]).unwrap()), Some(4.0 / 3.0));
        let diff = DomainSpec::difference(DomainSpec::unit_ball(3), DomainSpec::ball(Point::origin(3), 0.5).unwrap()).unwrap();
        assert_eq!(exit_time_oracle(&diff, &Point::new(vec![0.7, 0.0, 0.0]).unwrap()), None);
    }
}
