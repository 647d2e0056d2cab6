//! `jumpgeo` — batch experiment runner.
//!
//! Subcommands:
//! - `run --config <path> [--seed N] [--out DIR]` — run one experiment,
//!   writing `<name>.<ext>` artifacts and printing a PASS/FAIL line per
//!   acceptance clause the experiment exercises;
//! - `replay <config>` — re-run a saved config; identical (config, seed)
//!   pairs produce byte-identical artifacts;
//! - `list-kinds` — enumerate experiment kinds.
//!
//! Exit status: 0 when every clause passes, 1 when a clause fails,
//! 2 on validation errors (the first violated precondition is named),
//! 3 on numeric/accuracy errors.

mod config;

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use jumpgeo::connection::{ConnectionRule, AXIOM_TOL};
use jumpgeo::error::{Error, Result};
use jumpgeo::experiments::{
    self, counterexample_run, martingale_coordinate_ztests, martingale_sweep, stable_tail_run,
    write_replica_csv, MartingaleKind, ReplicaRecord,
};
use jumpgeo::fractional::FractionalConfig;
use jumpgeo::integrator::fields;
use jumpgeo::paths::fmt_f64;
use jumpgeo::processes::{SmallJumpMode, StableProcessConfig};

use config::*;

#[derive(Parser)]
#[command(name = "jumpgeo", version, about = "Jump-process experiments on embedded manifolds")]
struct Cli {
    /// Worker threads (fallback: JUMPGEO_THREADS, then all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Format for tabular record artifacts.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,

    #[command(subcommand)]
    cmd: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment config.
    Run(RunArgs),
    /// Re-run a config file exactly as saved.
    Replay { config: PathBuf },
    /// List the supported experiment kinds.
    ListKinds,
}

#[derive(Args)]
struct RunArgs {
    /// Experiment config (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Override the config's seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory for artifacts (overrides the config's `out`).
    #[arg(long)]
    out: Option<PathBuf>,
}

const KINDS: &[(&str, &str)] = &[
    ("axioms", "connection-rule axiom certification over random base points"),
    ("ito-identity", "telescoping decomposition identity on random pure-jump paths"),
    ("martingale-test", "mean-zero z-test of martingale parts across replicas"),
    ("convergence", "converged-fraction sweep across radius-decay exponents"),
    ("counterexample", "zero-QV antipodal Poisson path that keeps oscillating"),
    ("stable-tail", "KS test of truncated stable jump magnitudes vs Pareto"),
    ("fractional-residual", "fractional-Laplacian value and Lagrange residual at a point"),
    ("levy-system", "two-estimator consistency check of expected jump energy"),
];

fn main() -> ExitCode {
    let cli = Cli::parse();
    let threads = cli
        .threads
        .or_else(|| std::env::var("JUMPGEO_THREADS").ok().and_then(|v| v.parse().ok()));
    if let Some(n) = threads {
        let effective = jumpgeo::parallel::set_threads(n);
        eprintln!("threads: {effective}");
    }

    let outcome = match cli.cmd {
        Command::ListKinds => {
            for (kind, blurb) in KINDS {
                println!("{kind:20} {blurb}");
            }
            return ExitCode::SUCCESS;
        }
        Command::Run(args) => run_from_file(&args.config, args.seed, args.out, cli.format),
        Command::Replay { config } => run_from_file(&config, None, None, cli.format),
    };

    match outcome {
        Ok(clauses) => {
            let mut all_pass = true;
            for clause in &clauses {
                println!("{} {}", if clause.pass { "PASS" } else { "FAIL" }, clause.detail);
                all_pass &= clause.pass;
            }
            if all_pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_numeric() {
                ExitCode::from(3)
            } else {
                ExitCode::from(2)
            }
        }
    }
}

struct Clause {
    pass: bool,
    detail: String,
}

impl Clause {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self { pass, detail: detail.into() }
    }
}

fn run_from_file(
    path: &Path,
    seed_override: Option<u64>,
    out_override: Option<PathBuf>,
    format: Format,
) -> Result<Vec<Clause>> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::InvalidParameter(format!("config {}: {e}", path.display())))?;
    let mut spec = parse_spec(&text)?;
    if let Some(seed) = seed_override {
        spec.seed = seed;
    }
    if let Some(out) = out_override {
        spec.out = Some(out);
    }
    let out_dir = spec.out.clone().unwrap_or_else(|| PathBuf::from("."));
    fs::create_dir_all(&out_dir)
        .map_err(|e| Error::InvalidParameter(format!("output dir: {e}")))?;
    run_spec(&spec, &out_dir, format)
}

fn run_spec(spec: &ExperimentSpec, out_dir: &Path, format: Format) -> Result<Vec<Clause>> {
    match spec.kind.as_str() {
        "axioms" => run_axioms(spec, out_dir),
        "ito-identity" => run_ito_identity(spec, out_dir, format),
        "martingale-test" => run_martingale_test(spec, out_dir, format),
        "convergence" => run_convergence(spec, out_dir, format),
        "counterexample" => run_counterexample(spec, out_dir, format),
        "stable-tail" => run_stable_tail(spec, out_dir, format),
        "fractional-residual" => run_fractional_residual(spec, out_dir),
        "levy-system" => run_levy_system(spec, out_dir),
        other => Err(Error::InvalidParameter(format!(
            "unknown kind `{other}` (see `jumpgeo list-kinds`)"
        ))),
    }
}

fn write_file(out_dir: &Path, name: &str, ext: &str, bytes: &[u8]) -> Result<PathBuf> {
    let path = out_dir.join(format!("{name}.{ext}"));
    let mut f = fs::File::create(&path)
        .map_err(|e| Error::InvalidParameter(format!("write {}: {e}", path.display())))?;
    f.write_all(bytes)
        .map_err(|e| Error::InvalidParameter(format!("write {}: {e}", path.display())))?;
    Ok(path)
}

fn write_json<T: serde::Serialize>(out_dir: &Path, name: &str, value: &T) -> Result<PathBuf> {
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| Error::InvalidParameter(format!("serialize: {e}")))?;
    write_file(out_dir, name, "json", text.as_bytes())
}

fn write_records(
    out_dir: &Path,
    name: &str,
    records: &[ReplicaRecord],
    format: Format,
) -> Result<()> {
    match format {
        Format::Csv => {
            let mut buf = Vec::new();
            write_replica_csv(records, &mut buf)
                .map_err(|e| Error::InvalidParameter(format!("records: {e}")))?;
            write_file(out_dir, name, "csv", &buf)?;
        }
        Format::Json => {
            write_json(out_dir, name, &records)?;
        }
    }
    Ok(())
}

fn run_axioms(spec: &ExperimentSpec, out_dir: &Path) -> Result<Vec<Clause>> {
    let p: AxiomsParams = parse_params(&spec.parameters)?;
    let reports: Vec<(String, jumpgeo::connection::AxiomReport)> =
        match (&p.manifold, &p.rule) {
            (Some(mani), Some(rule)) => {
                let manifold = parse_manifold(mani)?;
                let rule_kind = parse_rule_kind(rule)?;
                let rule = ConnectionRule::new(rule_kind, manifold)?;
                vec![(format!("{}/{}", rule.kind.name(), mani), rule.check_axioms(p.samples, spec.seed)?)]
            }
            (None, None) => experiments::axiom_matrix(p.samples, spec.seed)?,
            _ => {
                return Err(Error::InvalidParameter(
                    "axioms: give both `manifold` and `rule`, or neither".into(),
                ))
            }
        };

    let mut csv = String::from("rule,case,samples,dev_tangency,dev_diagonal,dev_differential\n");
    for (label, r) in &reports {
        csv.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.rule,
            label,
            r.samples,
            fmt_f64(r.max_dev_tangency),
            fmt_f64(r.max_dev_diagonal),
            fmt_f64(r.max_dev_differential)
        ));
    }
    write_file(out_dir, &spec.name, "csv", csv.as_bytes())?;
    write_json(out_dir, &spec.name, &reports)?;

    Ok(reports
        .iter()
        .map(|(label, r)| {
            let worst = r
                .max_dev_tangency
                .max(r.max_dev_diagonal)
                .max(r.max_dev_differential);
            Clause::new(
                r.passes(AXIOM_TOL),
                format!("axioms[{label}]: max deviation {worst:.3e} (tolerance {AXIOM_TOL:.0e})"),
            )
        })
        .collect())
}

fn run_ito_identity(spec: &ExperimentSpec, out_dir: &Path, format: Format) -> Result<Vec<Clause>> {
    let p: ItoIdentityParams = parse_params(&spec.parameters)?;
    let manifold = parse_manifold(&p.manifold)?;
    let (summary, residuals) =
        experiments::ito_identity_run_detailed(&manifold, p.paths, p.max_jumps, spec.seed)?;

    match format {
        Format::Csv => {
            let mut csv = String::from("path,worst_residual\n");
            for (i, r) in residuals.iter().enumerate() {
                csv.push_str(&format!("{},{}\n", i, fmt_f64(*r)));
            }
            write_file(out_dir, &spec.name, "csv", csv.as_bytes())?;
        }
        Format::Json => {
            write_json(out_dir, &format!("{}.residuals", spec.name), &residuals)?;
        }
    }
    write_json(out_dir, &spec.name, &summary)?;

    // one representative decomposition table for the series interface
    let schedule = experiments::uniform_fixed_schedule(32, 1.0, 0.3, 0.6);
    let path = MartingaleKind::Geodesic.build(&manifold, &schedule, 1.0, spec.seed)?;
    let partition = jumpgeo::paths::jump_skeleton(&path)?;
    let rule = ConnectionRule::new(
        if manifold.is_flat() {
            jumpgeo::connection::RuleKind::Euclidean
        } else {
            jumpgeo::connection::RuleKind::Projection
        },
        manifold.clone(),
    )?;
    let decomposition =
        jumpgeo::integrator::ito_decompose(&fields::coordinate(0), &path, &rule, &partition)?;
    let mut buf = Vec::new();
    decomposition
        .write_csv(&mut buf)
        .map_err(|e| Error::InvalidParameter(format!("decomposition: {e}")))?;
    write_file(out_dir, &format!("{}.decomposition", spec.name), "csv", &buf)?;

    Ok(vec![Clause::new(
        summary.worst_residual <= 1e-9,
        format!(
            "ito-identity: worst residual {:.3e} over {} paths x {} functions (tolerance 1e-9)",
            summary.worst_residual, summary.paths, summary.functions
        ),
    )])
}

fn parse_constructor(s: &str) -> Result<MartingaleKind> {
    match s {
        "geodesic" => Ok(MartingaleKind::Geodesic),
        "projection" => Ok(MartingaleKind::Projection),
        other => Err(Error::InvalidParameter(format!(
            "unknown constructor `{other}` (expected geodesic or projection)"
        ))),
    }
}

fn run_martingale_test(
    spec: &ExperimentSpec,
    out_dir: &Path,
    format: Format,
) -> Result<Vec<Clause>> {
    let p: MartingaleTestParams = parse_params(&spec.parameters)?;
    let manifold = parse_manifold(&p.manifold)?;
    let kind = parse_constructor(&p.constructor)?;
    let schedule = p.schedule.build(p.horizon)?;
    let classifier = p.classifier.build(&manifold)?;

    let records = martingale_sweep(
        &manifold,
        kind,
        &schedule,
        p.horizon,
        p.replicas,
        spec.seed,
        &classifier,
        &fields::coordinate(0),
    )?;
    write_records(out_dir, &spec.name, &records, format)?;

    let ztests = martingale_coordinate_ztests(
        &manifold,
        kind,
        &schedule,
        p.horizon,
        p.replicas,
        spec.seed,
    )?;
    write_json(out_dir, &format!("{}.ztests", spec.name), &ztests)?;

    Ok(ztests
        .iter()
        .enumerate()
        .map(|(i, z)| {
            Clause::new(
                z.z.abs() <= 3.0,
                format!(
                    "martingale-test[{}][coordinate {i}]: |z| = {:.3} over {} replicas (bound 3)",
                    p.constructor,
                    z.z.abs(),
                    z.n
                ),
            )
        })
        .collect())
}

fn run_convergence(spec: &ExperimentSpec, out_dir: &Path, format: Format) -> Result<Vec<Clause>> {
    let p: ConvergenceParams = parse_params(&spec.parameters)?;
    let manifold = parse_manifold(&p.manifold)?;
    let kind = parse_constructor(&p.constructor)?;
    let classifier = p.classifier.build(&manifold)?;

    let sweep = experiments::convergence_sweep(
        &manifold,
        kind,
        &p.betas,
        p.c,
        p.jumps,
        p.horizon,
        p.replicas,
        spec.seed,
        &classifier,
    )?;

    let summaries: Vec<_> = sweep.iter().map(|(s, _)| s.clone()).collect();
    write_json(out_dir, &spec.name, &summaries)?;
    for (summary, records) in &sweep {
        write_records(out_dir, &format!("{}.b{:.2}", spec.name, summary.beta), records, format)?;
    }

    let mut clauses = Vec::new();
    for w in summaries.windows(2) {
        let gap = w[1].converged_fraction - w[0].converged_fraction;
        let bar = 3.0 * (w[0].std_error.powi(2) + w[1].std_error.powi(2)).sqrt();
        clauses.push(Clause::new(
            gap > bar,
            format!(
                "convergence[monotone]: fraction(beta={}) - fraction(beta={}) = {:.4} > {:.4}",
                w[1].beta, w[0].beta, gap, bar
            ),
        ));
    }
    for (beta, min) in &p.expect_min {
        if let Some(s) = summaries.iter().find(|s| (s.beta - beta).abs() < 1e-12) {
            clauses.push(Clause::new(
                s.converged_fraction >= *min,
                format!(
                    "convergence[beta={beta}]: converged fraction {:.4} >= {min}",
                    s.converged_fraction
                ),
            ));
        }
    }
    for (beta, max) in &p.expect_max {
        if let Some(s) = summaries.iter().find(|s| (s.beta - beta).abs() < 1e-12) {
            clauses.push(Clause::new(
                s.converged_fraction <= *max,
                format!(
                    "convergence[beta={beta}]: converged fraction {:.4} <= {max}",
                    s.converged_fraction
                ),
            ));
        }
    }
    Ok(clauses)
}

fn run_counterexample(
    spec: &ExperimentSpec,
    out_dir: &Path,
    format: Format,
) -> Result<Vec<Clause>> {
    let p: CounterexampleParams = parse_params(&spec.parameters)?;
    let circle = jumpgeo::geometry::ManifoldModel::circle();
    let classifier = p.classifier.build(&circle)?;
    let (summary, records) =
        counterexample_run(p.rate, p.horizon, p.replicas, spec.seed, &classifier)?;
    write_records(out_dir, &spec.name, &records, format)?;
    write_json(out_dir, &format!("{}.summary", spec.name), &summary)?;

    // replica 0's QV series in the `t,value` interchange format
    let sample = jumpgeo::processes::antipodal_poisson_circle(
        p.rate,
        p.horizon,
        jumpgeo::rng::split_seed(spec.seed, 0),
    )?;
    let partition = jumpgeo::paths::jump_skeleton(&sample)?;
    let qv = jumpgeo::integrator::riemannian_qv(&sample, &partition)?;
    let series = jumpgeo::integrator::TimeSeries { times: qv.times, values: qv.total };
    let mut buf = Vec::new();
    series
        .write_csv(&mut buf)
        .map_err(|e| Error::InvalidParameter(format!("qv series: {e}")))?;
    write_file(out_dir, &format!("{}.qv", spec.name), "csv", &buf)?;
    Ok(vec![
        Clause::new(
            summary.qv_identically_zero,
            "counterexample: Riemannian QV identically zero on every replica",
        ),
        Clause::new(
            summary.integrals_identically_zero,
            "counterexample: jump-corrected integrals identically zero for the test battery",
        ),
        Clause::new(
            summary.tail_activity_implies_oscillation,
            format!(
                "counterexample: every replica with >= 2 tail events classified oscillating \
                 ({} of {} oscillating)",
                summary.oscillating_count, summary.replicas
            ),
        ),
    ])
}

fn run_stable_tail(spec: &ExperimentSpec, out_dir: &Path, format: Format) -> Result<Vec<Clause>> {
    let p: StableTailParams = parse_params(&spec.parameters)?;
    let (summary, magnitudes) =
        stable_tail_run(p.m, p.alpha, p.truncation, p.count, spec.seed)?;
    match format {
        Format::Csv => {
            let mut csv = String::from("index,magnitude\n");
            for (i, m) in magnitudes.iter().enumerate() {
                csv.push_str(&format!("{},{}\n", i, fmt_f64(*m)));
            }
            write_file(out_dir, &spec.name, "csv", csv.as_bytes())?;
        }
        Format::Json => {
            write_json(out_dir, &format!("{}.magnitudes", spec.name), &magnitudes)?;
        }
    }
    write_json(out_dir, &spec.name, &summary)?;
    Ok(vec![Clause::new(
        summary.pass,
        format!(
            "stable-tail[m={}, alpha={}]: KS statistic {:.5} <= {:.5} (1% level, n = {})",
            p.m, p.alpha, summary.ks_statistic, summary.ks_critical_1pct, p.count
        ),
    )])
}

fn run_fractional_residual(spec: &ExperimentSpec, out_dir: &Path) -> Result<Vec<Clause>> {
    let p: FractionalResidualParams = parse_params(&spec.parameters)?;
    let mut cfg = FractionalConfig::with_defaults(p.m, p.alpha);
    p.quadrature.apply(&mut cfg);
    let report = experiments::fractional_residual_report(&p.map, &p.point, &cfg)?;
    write_json(out_dir, &spec.name, &report)?;
    let mut clauses = vec![Clause::new(
        true,
        format!(
            "fractional-residual[{}]: certified quadrature, residual {:.6e}, |op| {:.6e}",
            p.map,
            report.residual.unwrap_or(f64::NAN),
            report
                .operator_value
                .as_ref()
                .map(|v| jumpgeo::linalg::norm(v))
                .unwrap_or(f64::NAN)
        ),
    )];
    if p.map == "constant-circle" {
        let op_norm = report
            .operator_value
            .as_ref()
            .map(|v| jumpgeo::linalg::norm(v))
            .unwrap_or(f64::NAN);
        clauses.push(Clause::new(
            op_norm <= 1e-8,
            format!("fractional-residual[constant map]: |op| = {op_norm:.3e} <= 1e-8"),
        ));
    }
    Ok(clauses)
}

fn run_levy_system(spec: &ExperimentSpec, out_dir: &Path) -> Result<Vec<Clause>> {
    let p: LevySystemParams = parse_params(&spec.parameters)?;
    let mut cfg = FractionalConfig::with_defaults(p.m, p.alpha);
    p.quadrature.apply(&mut cfg);
    let stable_cfg = StableProcessConfig {
        alpha: p.alpha,
        dim: p.m,
        truncation: p.truncation,
        horizon: p.horizon,
        small_jump_mode: SmallJumpMode::Drop,
    };
    let report = experiments::levy_system_report(
        &p.map,
        &p.point,
        &cfg,
        &stable_cfg,
        p.replicas,
        spec.seed,
    )?;
    write_json(out_dir, &spec.name, &report)?;
    let lhs = report.lhs.unwrap_or(f64::NAN);
    let rhs = report.rhs.unwrap_or(f64::NAN);
    let se = (report.se_lhs.unwrap_or(f64::NAN).powi(2)
        + report.se_rhs.unwrap_or(f64::NAN).powi(2))
    .sqrt();
    Ok(vec![Clause::new(
        report.compatible.unwrap_or(false),
        format!(
            "levy-system: |lhs - rhs| = {:.4e} <= 3 x combined se = {:.4e} \
             (lhs {:.6e}, rhs {:.6e}, n = {})",
            (lhs - rhs).abs(),
            3.0 * se,
            lhs,
            rhs,
            p.replicas
        ),
    )])
}
