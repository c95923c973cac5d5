//! Command-line surface: argument definitions, the `cmd_*` entry points and
//! the [`RunReport`] they produce.

use std::fmt::{self, Write as _};
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::conic::{
    adapter_by_name, assemble, default_adapter_name, solve, ConicModel, ModelSummary, SolveStatus, ADAPTER_ENV,
};
use crate::decomposition::{
    adjacent_plus_pair, check_conditions, construct_td, exact_pipeline, validate_td, FormulationSize, Strategy,
    TreeDecomposition, DEFAULT_BOUND,
};
use crate::error::{Error, Result};
use crate::instance::{build_graph, LoopGraph, SparseQP};
use crate::oracle::{global_min_with, witness_compare_sdp, OracleMode, OracleOptions, WitnessReport};
use crate::relaxation::{hierarchy, ConstraintSystem};

/// Gap below zero tolerated before a bound is flagged as invalid.
pub const NEGATIVE_GAP_TOL: f64 = 1e-6;

#[derive(Debug, Parser)]
#[command(
    name = "qpsoc",
    version,
    about = "SOC relaxations and exact formulations for sparse box QPs"
)]
pub struct Cli {
    /// Print the report as JSON.
    #[arg(long, global = true)]
    pub json: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Summarize the loop graph of an instance.
    Graph { instance: PathBuf },
    /// Validate a tree decomposition and check conditions C1 to C3.
    CheckTd(CheckTdArgs),
    /// Build the level-r hierarchy relaxation.
    Relax(RelaxArgs),
    /// Build the exact extended formulation.
    Exact(ExactArgs),
    /// Solve a model file.
    Solve(SolveArgs),
    /// Brute-force global minimum.
    Oracle(OracleArgs),
    /// Solve a relaxation or exact model and compare with the oracle.
    Compare(CompareArgs),
    /// Evaluate the witness point that separates the perspective relaxation.
    Witness,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StrategyArg {
    /// First of acyclic, cycle, vertex-cover and min-degree that meets C1.
    Auto,
    Acyclic,
    Cycle,
    VertexCover,
    MinDegree,
}

#[derive(Debug, Clone, Args)]
pub struct TdArgs {
    /// Tree decomposition file; constructed when absent.
    #[arg(long)]
    pub td: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "auto")]
    pub strategy: StrategyArg,
    /// Vertex cover for the vertex-cover strategy, e.g. `4,5`.
    #[arg(long, value_delimiter = ',')]
    pub cover: Option<Vec<usize>>,
    /// Budget on width and plus-node spread.
    #[arg(long, default_value_t = DEFAULT_BOUND)]
    pub bound: usize,
}

#[derive(Debug, Clone, Args)]
pub struct CheckTdArgs {
    pub instance: PathBuf,
    #[command(flatten)]
    pub td: TdArgs,
}

#[derive(Debug, Clone, Args)]
pub struct RelaxArgs {
    pub instance: PathBuf,
    #[arg(long, short = 'r')]
    pub level: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct ExactArgs {
    pub instance: PathBuf,
    #[command(flatten)]
    pub td: TdArgs,
    /// Use the level-r hierarchy when the exact preconditions fail.
    #[arg(long)]
    pub fallback_level: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct SolveArgs {
    pub model: PathBuf,
    /// Defaults to $QPSOC_ADAPTER, then the first compiled-in solver.
    #[arg(long, env = ADAPTER_ENV)]
    pub adapter: Option<String>,
}

#[derive(Debug, Clone, Args)]
pub struct OracleArgs {
    pub instance: PathBuf,
    #[arg(long, default_value_t = 1e-3)]
    pub grid_step: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CompareMode {
    Exact,
    Hierarchy,
}

#[derive(Debug, Clone, Args)]
pub struct CompareArgs {
    pub instance: PathBuf,
    #[arg(long, value_enum, default_value = "exact")]
    pub mode: CompareMode,
    /// Hierarchy level (hierarchy mode, or fallback in exact mode).
    #[arg(long, short = 'r')]
    pub level: Option<usize>,
    #[command(flatten)]
    pub td: TdArgs,
    #[arg(long, env = ADAPTER_ENV)]
    pub adapter: Option<String>,
    /// Fail unless `-1e-6 ≤ oracle − bound ≤ tol`.
    #[arg(long)]
    pub assert_gap: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct GraphSummary {
    pub nodes: usize,
    pub edges: usize,
    pub plus_loops: usize,
    pub minus_loops: usize,
    pub stable_plus: bool,
}

impl GraphSummary {
    pub fn of(g: &LoopGraph) -> Self {
        Self {
            nodes: g.node_count(),
            edges: g.edges().len(),
            plus_loops: g.plus_loops().len(),
            minus_loops: g.minus_loops().len(),
            stable_plus: adjacent_plus_pair(g).is_none(),
        }
    }
}

impl fmt::Display for GraphSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "V={} E={} L+={} L-={} stable+={}",
            self.nodes, self.edges, self.plus_loops, self.minus_loops, self.stable_plus
        )
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct TdSummary {
    pub strategy: String,
    pub bags: usize,
    pub valid: bool,
    pub width: usize,
    pub max_plus_spread: usize,
    pub c1: bool,
    pub c2: bool,
    pub c3: bool,
    pub estimated_size: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct RelaxSummary {
    pub level: usize,
    pub perspective_systems: usize,
    pub perspective_terms: usize,
    /// `Σ 2^{|M|}` over the windows, before merging duplicates.
    pub support_inequalities: usize,
    pub linear_inequalities: usize,
}

/// Everything a command reports.
#[derive(Clone, Debug, Default, Serialize)]
pub struct RunReport {
    pub command: String,
    pub instance_digest: Option<String>,
    pub graph: Option<GraphSummary>,
    pub td: Option<TdSummary>,
    pub relaxation: Option<RelaxSummary>,
    pub formulation: Option<FormulationSize>,
    pub model: Option<ModelSummary>,
    pub status: Option<String>,
    pub bound: Option<f64>,
    pub oracle: Option<f64>,
    pub oracle_mode: Option<OracleMode>,
    pub gap: Option<f64>,
    pub witness: Option<WitnessReport>,
    pub notes: Vec<String>,
    pub wall_time: f64,
    /// False when a requested check failed; the process then exits nonzero.
    pub ok: bool,
}

/// `x` with 12 significant digits, trailing zeros trimmed.
pub fn fmt_num(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    if x == 0.0 {
        return "0".into();
    }
    let exp = x.abs().log10().floor() as i32;
    let trim = |s: String| {
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    };
    if (-5..12).contains(&exp) {
        trim(format!("{:.*}", (11 - exp) as usize, x))
    } else {
        let s = format!("{x:.11e}");
        let (mantissa, e) = s.split_once('e').expect("exponent form");
        format!("{}e{e}", trim(mantissa.to_string()))
    }
}

impl RunReport {
    fn new(command: impl Into<String>) -> Self {
        Self {
            command: command.into(),
            ok: true,
            ..Self::default()
        }
    }

    fn set_gap(&mut self) {
        if let (Some(bound), Some(oracle)) = (self.bound, self.oracle) {
            let gap = oracle - bound;
            self.gap = Some(gap);
            if gap < -NEGATIVE_GAP_TOL {
                self.ok = false;
                self.notes
                    .push(format!("bound exceeds the oracle value by {}", fmt_num(-gap)));
            }
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

impl fmt::Display for RunReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut out = String::new();
        writeln!(out, "command: {}", self.command)?;
        if let Some(d) = &self.instance_digest {
            writeln!(out, "instance: {d}")?;
        }
        if let Some(g) = &self.graph {
            writeln!(out, "graph: {g}")?;
        }
        if let Some(td) = &self.td {
            writeln!(
                out,
                "td: strategy={} bags={} valid={} width={} max_plus_spread={} C1={} C2={} C3={} est_size={}",
                td.strategy,
                td.bags,
                td.valid,
                td.width,
                td.max_plus_spread,
                td.c1,
                td.c2,
                td.c3,
                fmt_num(td.estimated_size)
            )?;
        }
        if let Some(r) = &self.relaxation {
            writeln!(
                out,
                "relaxation: level={} perspective_systems={} perspective_terms={} support_ineqs={} linear_ineqs={}",
                r.level, r.perspective_systems, r.perspective_terms, r.support_inequalities, r.linear_inequalities
            )?;
        }
        if let Some(s) = &self.formulation {
            writeln!(
                out,
                "formulation: blocks={} block_ineqs={} predicted={} perspective_terms={} product_monomials={}",
                s.blocks, s.block_inequalities, s.predicted_inequalities, s.perspective_terms, s.product_monomials
            )?;
        }
        if let Some(m) = &self.model {
            writeln!(out, "model: {m}")?;
        }
        if let Some(s) = &self.status {
            writeln!(out, "status: {s}")?;
        }
        if let Some(b) = self.bound {
            writeln!(out, "bound: {}", fmt_num(b))?;
        }
        if let Some(v) = self.oracle {
            let mode = self.oracle_mode.map(|m| format!(" ({m})")).unwrap_or_default();
            writeln!(out, "oracle: {}{mode}", fmt_num(v))?;
        }
        if let Some(g) = self.gap {
            writeln!(out, "gap: {}", fmt_num(g))?;
        }
        if let Some(w) = &self.witness {
            writeln!(
                out,
                "witness: lhs={} rhs={} separated={}",
                fmt_num(w.lhs),
                fmt_num(w.rhs),
                w.separates()
            )?;
            writeln!(
                out,
                "witness: mccormick={} triangle={} z123 in [{}, {}] ldl_residual={} d_nonnegative={}",
                w.mccormick_ok,
                w.triangle_ok,
                fmt_num(w.triple_interval.0),
                fmt_num(w.triple_interval.1),
                fmt_num(w.ldl_residual),
                w.d_nonnegative
            )?;
            let list = |v: &[f64; 3]| v.iter().map(|&x| fmt_num(x)).collect::<Vec<_>>().join(", ");
            writeln!(
                out,
                "witness: extended triangle values [{}] and [{}]",
                list(&w.extended_triangle_first),
                list(&w.extended_triangle_second)
            )?;
        }
        for note in &self.notes {
            writeln!(out, "note: {note}")?;
        }
        write!(out, "wall_time: {}s", fmt_num((self.wall_time * 1e6).round() / 1e6))?;
        f.write_str(&out)
    }
}

/// First 16 hex digits of the SHA-256 of the canonical instance JSON.
pub fn instance_digest(qp: &SparseQP) -> String {
    let hash = Sha256::digest(qp.to_json().as_bytes());
    hash.iter().take(8).map(|b| format!("{b:02x}")).collect()
}

fn load_instance(path: &Path) -> Result<SparseQP> {
    SparseQP::from_json(&fs::read_to_string(path)?)
}

fn instance_report(command: &str, qp: &SparseQP) -> (RunReport, LoopGraph) {
    let g = build_graph(qp);
    let mut report = RunReport::new(command);
    report.instance_digest = Some(instance_digest(qp));
    report.graph = Some(GraphSummary::of(&g));
    (report, g)
}

fn timed(start: Instant, mut report: RunReport) -> RunReport {
    report.wall_time = start.elapsed().as_secs_f64();
    report
}

pub fn cmd_graph(instance: &Path) -> Result<RunReport> {
    let start = Instant::now();
    let qp = load_instance(instance)?;
    Ok(timed(start, instance_report("graph", &qp).0))
}

/// The decomposition named by `args`, and the strategy that produced it.
pub fn resolve_td(g: &LoopGraph, args: &TdArgs) -> Result<(TreeDecomposition, String)> {
    if let Some(path) = &args.td {
        return Ok((TreeDecomposition::from_json(&fs::read_to_string(path)?)?, "file".into()));
    }
    let explicit = match args.strategy {
        StrategyArg::Auto => None,
        StrategyArg::Acyclic => Some(Strategy::Acyclic),
        StrategyArg::Cycle => Some(Strategy::Cycle),
        StrategyArg::VertexCover => Some(Strategy::VertexCover(args.cover.clone())),
        StrategyArg::MinDegree => Some(Strategy::MinDegree),
    };
    if let Some(s) = explicit {
        return Ok((construct_td(g, &s)?, s.to_string()));
    }
    let candidates = [
        Strategy::Acyclic,
        Strategy::Cycle,
        Strategy::VertexCover(args.cover.clone()),
        Strategy::MinDegree,
    ];
    let mut fallback = None;
    for s in candidates {
        if let Ok(td) = construct_td(g, &s) {
            if check_conditions(g, &td, args.bound).c1 {
                return Ok((td, s.to_string()));
            }
            fallback.get_or_insert((td, s.to_string()));
        }
    }
    fallback.ok_or_else(|| Error::Strategy("no strategy produced a decomposition".into()))
}

fn td_summary(g: &LoopGraph, td: &TreeDecomposition, strategy: &str, bound: usize) -> (TdSummary, Vec<String>) {
    let valid = validate_td(g, td);
    let cond = check_conditions(g, td, bound);
    let mut notes = cond.warnings();
    if !valid.is_valid() {
        notes.push(format!("tree decomposition invalid: {valid}"));
    }
    if let Some((bag, nodes)) = &cond.c1_violation {
        notes.push(format!("C1 fails: bag {bag} holds plus-loop nodes {nodes:?}"));
    }
    let summary = TdSummary {
        strategy: strategy.to_string(),
        bags: td.len(),
        valid: valid.is_valid(),
        width: cond.width,
        max_plus_spread: cond.max_plus_spread,
        c1: cond.c1,
        c2: cond.c2,
        c3: cond.c3,
        estimated_size: cond.estimated_size,
    };
    (summary, notes)
}

pub fn cmd_check_td(args: &CheckTdArgs) -> Result<RunReport> {
    let start = Instant::now();
    let qp = load_instance(&args.instance)?;
    let (mut report, g) = instance_report("check-td", &qp);
    let (td, strategy) = resolve_td(&g, &args.td)?;
    let (summary, notes) = td_summary(&g, &td, &strategy, args.td.bound);
    report.ok = summary.valid;
    report.td = Some(summary);
    report.notes = notes;
    Ok(timed(start, report))
}

fn relax_summary(system: &ConstraintSystem, level: usize) -> RelaxSummary {
    RelaxSummary {
        level,
        perspective_systems: system.perspectives().len(),
        perspective_terms: system.perspectives().iter().map(|p| p.terms.len()).sum(),
        support_inequalities: system.perspectives().iter().map(|p| 1 << p.window.len()).sum(),
        linear_inequalities: system.linear().len(),
    }
}

fn write_model(model: &ConicModel, out: Option<&Path>, report: &mut RunReport) -> Result<()> {
    report.model = Some(model.summary());
    if let Some(path) = out {
        fs::write(path, model.to_json())?;
        report.notes.push(format!("model written to {}", path.display()));
    }
    Ok(())
}

fn hierarchy_model(qp: &SparseQP, g: &LoopGraph, level: usize, report: &mut RunReport) -> Result<ConicModel> {
    let system = hierarchy(g, level)?;
    report.relaxation = Some(relax_summary(&system, level));
    assemble(qp, &system)
}

pub fn cmd_relax(args: &RelaxArgs) -> Result<RunReport> {
    let start = Instant::now();
    let qp = load_instance(&args.instance)?;
    let (mut report, g) = instance_report("relax", &qp);
    let model = hierarchy_model(&qp, &g, args.level, &mut report)?;
    write_model(&model, args.out.as_deref(), &mut report)?;
    Ok(timed(start, report))
}

/// Exact model, or the fallback hierarchy when preconditions fail and a
/// fallback level was given.
fn exact_model(
    qp: &SparseQP,
    g: &LoopGraph,
    td_args: &TdArgs,
    fallback_level: Option<usize>,
    report: &mut RunReport,
) -> Result<ConicModel> {
    let refusal = match adjacent_plus_pair(g) {
        Some((a, b)) => Some(Error::PlusSetNotStable(a, b)),
        None => {
            let (td, strategy) = resolve_td(g, td_args)?;
            let (summary, notes) = td_summary(g, &td, &strategy, td_args.bound);
            report.notes.extend(notes);
            let c1 = summary.c1;
            report.td = Some(summary);
            if c1 {
                let (exact, _) = exact_pipeline(g, &td)?;
                report.formulation = Some(exact.size.clone());
                return assemble(qp, &exact.system);
            }
            let (bag, nodes) = check_conditions(g, &td, td_args.bound).c1_violation.expect("C1 failed");
            Some(Error::C1Violated { bag, nodes })
        }
    };
    let err = refusal.expect("refusal set");
    match fallback_level {
        Some(level) => {
            report.notes.push(format!(
                "exact formulation refused ({err}); using hierarchy level {level}"
            ));
            hierarchy_model(qp, g, level, report)
        }
        None => Err(err),
    }
}

pub fn cmd_exact(args: &ExactArgs) -> Result<RunReport> {
    let start = Instant::now();
    let qp = load_instance(&args.instance)?;
    let (mut report, g) = instance_report("exact", &qp);
    let model = exact_model(&qp, &g, &args.td, args.fallback_level, &mut report)?;
    write_model(&model, args.out.as_deref(), &mut report)?;
    Ok(timed(start, report))
}

fn solve_into(model: &ConicModel, adapter: Option<&str>, report: &mut RunReport) -> Result<()> {
    let name = adapter.map_or_else(default_adapter_name, str::to_string);
    let adapter = adapter_by_name(&name)?;
    let result = solve(model, adapter.as_ref());
    report.status = Some(result.status.to_string());
    if result.status == SolveStatus::Optimal {
        report.bound = Some(result.objective_value);
    } else {
        if let Some(d) = result.stats.get("diagnostics") {
            report.notes.push(format!("{name}: {d}"));
        }
        if name != "null" {
            report.ok = false;
        }
    }
    Ok(())
}

pub fn cmd_solve(args: &SolveArgs) -> Result<RunReport> {
    let start = Instant::now();
    let model = ConicModel::from_json(&fs::read_to_string(&args.model)?)?;
    let mut report = RunReport::new("solve");
    report.model = Some(model.summary());
    solve_into(&model, args.adapter.as_deref(), &mut report)?;
    Ok(timed(start, report))
}

pub fn cmd_oracle(args: &OracleArgs) -> Result<RunReport> {
    let start = Instant::now();
    let qp = load_instance(&args.instance)?;
    let (mut report, _) = instance_report("oracle", &qp);
    let opts = OracleOptions {
        grid_step: args.grid_step,
        ..OracleOptions::default()
    };
    let r = global_min_with(&qp, &opts)?;
    report.oracle = Some(r.value);
    report.oracle_mode = Some(r.mode);
    if let (Some(h), Some(l)) = (r.grid_step, r.lipschitz) {
        report.notes.push(format!(
            "grid mode is approximate: true minimum >= {}",
            fmt_num(r.value - l * h)
        ));
    }
    Ok(timed(start, report))
}

pub fn cmd_compare(args: &CompareArgs) -> Result<RunReport> {
    let start = Instant::now();
    let qp = load_instance(&args.instance)?;
    let (mut report, g) = instance_report("compare", &qp);
    let model = match args.mode {
        CompareMode::Exact => exact_model(&qp, &g, &args.td, args.level, &mut report)?,
        CompareMode::Hierarchy => {
            let level = args.level.ok_or(Error::InvalidLevel(0))?;
            hierarchy_model(&qp, &g, level, &mut report)?
        }
    };
    report.model = Some(model.summary());
    solve_into(&model, args.adapter.as_deref(), &mut report)?;
    let oracle = global_min_with(&qp, &OracleOptions::default())?;
    report.oracle = Some(oracle.value);
    report.oracle_mode = Some(oracle.mode);
    report.set_gap();
    if let Some(tol) = args.assert_gap {
        match report.gap {
            Some(gap) if gap <= tol => {}
            Some(gap) => {
                report.ok = false;
                report
                    .notes
                    .push(format!("gap {} exceeds {}", fmt_num(gap), fmt_num(tol)));
            }
            None => {
                report.ok = false;
                report.notes.push("no bound available to check the gap".into());
            }
        }
    }
    Ok(timed(start, report))
}

pub fn cmd_witness() -> Result<RunReport> {
    let start = Instant::now();
    let mut report = RunReport::new("witness");
    let w = witness_compare_sdp();
    report.ok = w.separates() && w.mccormick_ok && w.triangle_ok && w.d_nonnegative;
    report.witness = Some(w);
    Ok(timed(start, report))
}

pub fn run(cli: &Cli) -> Result<RunReport> {
    match &cli.command {
        Command::Graph { instance } => cmd_graph(instance),
        Command::CheckTd(a) => cmd_check_td(a),
        Command::Relax(a) => cmd_relax(a),
        Command::Exact(a) => cmd_exact(a),
        Command::Solve(a) => cmd_solve(a),
        Command::Oracle(a) => cmd_oracle(a),
        Command::Compare(a) => cmd_compare(a),
        Command::Witness => cmd_witness(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(fmt_num(-0.25), "-0.25");
        assert_eq!(fmt_num(1.0 / 3.0), "0.333333333333");
        assert_eq!(fmt_num(123456.0), "123456");
        assert_eq!(fmt_num(2.0 / 3.0 * 1e-8), "6.66666666667e-9");
        assert_eq!(fmt_num(1e15), "1e15");
        assert_eq!(fmt_num(0.0), "0");
        assert_eq!(fmt_num(f64::INFINITY), "inf");
    }

    #[test]
    fn graph_summary_line() {
        let g = LoopGraph::new(3, [(0, 1), (0, 2), (1, 2)], [0], []).unwrap();
        assert_eq!(GraphSummary::of(&g).to_string(), "V=3 E=3 L+=1 L-=0 stable+=true");
        let g = LoopGraph::new(3, [(0, 1), (0, 2), (1, 2)], [0, 1], []).unwrap();
        assert!(!GraphSummary::of(&g).stable_plus);
    }

    #[test]
    fn digest_ignores_entry_order() {
        let a = SparseQP::new(2, &[(0, 1, 1.0), (0, 0, 2.0)], vec![0.0, 1.0]).unwrap();
        let b = SparseQP::new(2, &[(0, 0, 2.0), (1, 0, 1.0)], vec![0.0, 1.0]).unwrap();
        assert_eq!(instance_digest(&a), instance_digest(&b));
        assert_eq!(instance_digest(&a).len(), 16);
    }

    #[test]
    fn relax_counts_on_the_triangle() {
        let qp = SparseQP::new(3, &[(0, 0, 1.0), (0, 1, 0.5), (0, 2, 0.5), (1, 2, 0.5)], vec![0.0; 3]).unwrap();
        let g = build_graph(&qp);
        let mut report = RunReport::new("relax");
        hierarchy_model(&qp, &g, 3, &mut report).unwrap();
        let r = report.relaxation.unwrap();
        assert_eq!((r.perspective_systems, r.support_inequalities), (1, 8));
        let mut report = RunReport::new("relax");
        hierarchy_model(&qp, &g, 2, &mut report).unwrap();
        assert_eq!(report.relaxation.unwrap().perspective_systems, 2);
    }

    #[test]
    fn cli_parses() {
        let cli =
            Cli::try_parse_from(["qpsoc", "--json", "compare", "x.json", "--mode", "hierarchy", "-r", "2"]).unwrap();
        assert!(cli.json);
        assert!(matches!(
            cli.command,
            Command::Compare(CompareArgs {
                mode: CompareMode::Hierarchy,
                level: Some(2),
                ..
            })
        ));
        let cli = Cli::try_parse_from([
            "qpsoc",
            "exact",
            "x.json",
            "--strategy",
            "vertex-cover",
            "--cover",
            "4,5",
        ])
        .unwrap();
        match cli.command {
            Command::Exact(a) => assert_eq!(a.td.cover, Some(vec![4, 5])),
            _ => panic!("wrong command"),
        }
        assert!(Cli::try_parse_from(["qpsoc", "frobnicate"]).is_err());
    }
}
