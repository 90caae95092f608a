//! `pairwise`: fit, test and simulate general pairwise comparison models.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use pairwise_core::data::{load_csv, LabeledDataset, LatentScores};
use pairwise_core::graph::{sample_graph, GraphSamplerConfig, PairScheme, ProbabilityRule};
use pairwise_core::inference::{plugin_variance, test_report, vertex_report, VarianceEstimate};
use pairwise_core::mle::{fit, FitOptions, FitRecord, FitStatus};
use pairwise_core::model::{model_constants, parse_params, symmetric_grid, validate_model, ModelSpec, PairwiseModel};
use pairwise_core::simulation::{
    run_experiment, write_summary_csv, write_z_csv, DynamicRange, ExperimentConfig, RateExpr,
};
use pairwise_core::Error;
use serde::Serialize;

#[derive(Parser)]
#[command(
    name = "pairwise",
    version,
    about = "Estimation and inference for pairwise comparison models"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a Monte-Carlo coverage experiment described by a JSON config.
    Simulate(SimulateArgs),
    /// Compute the maximum-likelihood scores for a comparison CSV.
    Fit(FitArgs),
    /// Confidence intervals and pairwise z-tests from a fit.
    Infer(InferArgs),
    /// Check the validity axioms and report the model constants.
    Validate(ValidateArgs),
    /// Sample a comparison graph and write it as an edge list.
    Graphgen(GraphgenArgs),
}

#[derive(Args)]
struct ModelArgs {
    /// bt, thurstone, rao-kupper, davidson, clm4 or cardinal.
    #[arg(long, value_parser = parse_model_name)]
    model: String,
    /// Model parameters as k=v[,k=v], e.g. theta=2.
    #[arg(long, default_value = "")]
    params: String,
}

#[derive(Args)]
struct SimulateArgs {
    /// Experiment config (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Summary CSV destination.
    #[arg(long)]
    out: Option<PathBuf>,
    /// z-score CSV destination.
    #[arg(long)]
    z_out: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Caps worker threads.
    #[arg(long)]
    threads: Option<usize>,
    /// Overrides n.
    #[arg(long)]
    n: Option<usize>,
    /// Overrides p (number or expression such as n^-1/2).
    #[arg(long)]
    p: Option<String>,
    /// Overrides q (number or expression such as p*log n).
    #[arg(long)]
    q: Option<String>,
    /// Overrides M (number or loglog).
    #[arg(long = "M")]
    m: Option<String>,
}

#[derive(Args)]
struct FitArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Comparison CSV with rows i,j,outcome.
    #[arg(long)]
    data: PathBuf,
    /// Fit JSON destination; printed to stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct InferArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Fit JSON; may carry a "rho" array of variances to use as-is.
    #[arg(long)]
    fit: PathBuf,
    /// Comparison CSV; needed unless the fit carries "rho".
    #[arg(long)]
    data: Option<PathBuf>,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// Pair to test, as i,j (vertex ids or labels). Repeatable.
    #[arg(long = "test", value_name = "I,J")]
    tests: Vec<String>,
    /// Apply Benjamini–Hochberg across the requested tests.
    #[arg(long)]
    bh: bool,
    /// Report JSON destination; printed to stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ValidateArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Dynamic range M for the constants.
    #[arg(long = "M", default_value_t = 1.0)]
    m: f64,
    /// Half-width of the y grid for the axiom checks.
    #[arg(long, default_value_t = 5.0)]
    limit: f64,
    #[arg(long, default_value_t = 0.1)]
    grid_step: f64,
    /// Report JSON destination.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum RuleArg {
    UniformRandom,
    ConstantP,
    ConstantQ,
}

#[derive(Clone, Copy, ValueEnum)]
enum SchemeArg {
    Unordered,
    OrderedUnion,
}

#[derive(Args)]
struct GraphgenArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    p: f64,
    #[arg(long)]
    q: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "uniform-random")]
    rule: RuleArg,
    #[arg(long, value_enum, default_value = "unordered")]
    scheme: SchemeArg,
    /// Edge list destination; printed to stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_model_name(s: &str) -> Result<String, String> {
    match ModelSpec::from_name(s, &[]) {
        Err(Error::UnknownModel(_)) => Err(format!(
            "unknown model `{s}` (expected one of bt, thurstone, rao-kupper, davidson, clm4, cardinal)"
        )),
        _ => Ok(s.to_lowercase()),
    }
}

enum Failure {
    Usage(String),
    Runtime(String),
    /// stdout went away (e.g. piped into `head`); not worth reporting.
    Closed,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Io(e) => e.into(),
            e => Failure::Runtime(e.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        if e.kind() == io::ErrorKind::BrokenPipe {
            Failure::Closed
        } else {
            Failure::Runtime(e.to_string())
        }
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

fn build_model(args: &ModelArgs) -> Result<ModelSpec, Failure> {
    let params = parse_params(&args.params).map_err(|e| Failure::Usage(e.to_string()))?;
    ModelSpec::from_name(&args.model, &params).map_err(|e| Failure::Usage(e.to_string()))
}

/// Six significant digits, switching to exponent form outside [1e-5, 1e6).
fn sig(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.5e}");
    let (mantissa, exp) = sci.split_once('e').unwrap();
    let exp: i32 = exp.parse().unwrap();
    if !(-5..6).contains(&exp) {
        let mantissa = mantissa.trim_end_matches('0').trim_end_matches('.');
        return format!("{mantissa}e{exp}");
    }
    let fixed = format!("{x:.*}", (5 - exp) as usize);
    if fixed.contains('.') {
        fixed.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        fixed
    }
}

/// Writes through a temp file in the destination directory, then renames,
/// so a failed run never leaves a partial file behind.
fn write_atomic(path: &Path, fill: impl FnOnce(&mut dyn Write) -> Result<(), Failure>) -> Result<(), Failure> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    fill(&mut tmp)?;
    tmp.flush()?;
    tmp.persist(path).map_err(|e| Failure::Runtime(e.to_string()))?;
    Ok(())
}

fn emit_json<T: Serialize>(value: &T, out: Option<&Path>) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(value)? + "\n";
    match out {
        Some(path) => write_atomic(path, |w| Ok(w.write_all(text.as_bytes())?)),
        None => Ok(io::stdout().write_all(text.as_bytes())?),
    }
}

fn simulate(args: SimulateArgs) -> Result<(), Failure> {
    let text = fs::read_to_string(&args.config)?;
    let mut config = ExperimentConfig::from_json(&text)?;
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(t) = args.threads {
        config.threads = Some(t);
    }
    if let Some(n) = args.n {
        config.n = n;
    }
    let rate = |s: String| s.trim().parse().map(RateExpr::Literal).unwrap_or(RateExpr::Expr(s));
    if let Some(p) = args.p {
        config.p = rate(p);
    }
    if let Some(q) = args.q {
        config.q = rate(q);
    }
    if let Some(m) = args.m {
        config.dynamic_range = m
            .trim()
            .parse()
            .map(DynamicRange::Value)
            .unwrap_or(DynamicRange::Named(m));
    }
    let summary = run_experiment(&config)?;
    println!(
        "model={} n={} M={} mean_sd={} coverage={} failed={} successful={}",
        summary.model,
        summary.n,
        sig(summary.dynamic_range),
        sig(summary.mean_sd),
        sig(summary.coverage),
        summary.failed_replications,
        summary.z_scores.len()
    );
    if let Some(path) = &args.out {
        write_atomic(path, |w| Ok(write_summary_csv(std::slice::from_ref(&summary), w)?))?;
    }
    if let Some(path) = &args.z_out {
        write_atomic(path, |w| Ok(write_z_csv(&summary, w)?))?;
    }
    Ok(())
}

fn load(model: &ModelSpec, path: &Path) -> Result<LabeledDataset, Failure> {
    Ok(load_csv(path, model.support())?)
}

fn fit_cmd(args: FitArgs) -> Result<(), Failure> {
    let model = build_model(&args.model)?;
    let data = load(&model, &args.data)?;
    let result = fit(&model, &data.dataset, &FitOptions::default());
    match result.status {
        FitStatus::Converged => {}
        FitStatus::Nonexistent => eprintln!("warning: no finite maximum-likelihood estimate exists for this data"),
        FitStatus::MaxIter => eprintln!(
            "warning: stopped after {} iterations with gradient norm {}",
            result.iterations,
            sig(result.grad_norm)
        ),
    }
    let record = result.to_record();
    if args.out.is_some() {
        for (label, u) in data.labels.iter().zip(&record.u_hat) {
            println!("{label}\t{}", sig(*u));
        }
        println!("loglik\t{}", sig(record.loglik));
    }
    emit_json(&record, args.out.as_deref())
}

fn resolve_vertex(token: &str, labels: Option<&[String]>, n: usize) -> Result<usize, Failure> {
    let token = token.trim();
    let id = match token.parse::<usize>() {
        Ok(i) => Some(i),
        Err(_) => labels.and_then(|l| l.iter().position(|x| x == token)),
    };
    match id {
        Some(i) if i < n => Ok(i),
        Some(i) => Err(Failure::Usage(format!("vertex {i} out of range (n = {n})"))),
        None => Err(Failure::Usage(format!("unknown vertex `{token}`"))),
    }
}

#[derive(Serialize)]
struct InferReport {
    alpha: f64,
    vertices: Vec<pairwise_core::inference::VertexReport>,
    tests: Vec<pairwise_core::inference::TestReport>,
}

fn infer(args: InferArgs) -> Result<(), Failure> {
    if !(args.alpha > 0.0 && args.alpha < 1.0) {
        return Err(Failure::Usage(format!(
            "--alpha must lie in (0, 1), got {}",
            args.alpha
        )));
    }
    let model = build_model(&args.model)?;
    let record: FitRecord = serde_json::from_str(&fs::read_to_string(&args.fit)?)?;
    let n = record.u_hat.len();
    let data = args.data.as_deref().map(|p| load(&model, p)).transpose()?;
    if let Some(d) = &data {
        if d.dataset.n() != n {
            return Err(Error::DimensionMismatch {
                expected: d.dataset.n(),
                got: n,
            }
            .into());
        }
    }
    let u_hat = LatentScores::raw(record.u_hat.clone());
    let rho = match (&record.rho, &data) {
        (Some(rho), _) => {
            if rho.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: rho.len(),
                }
                .into());
            }
            VarianceEstimate::external(rho.clone())?
        }
        (None, Some(d)) => plugin_variance(&model, &d.dataset, &u_hat)?,
        (None, None) => {
            return Err(Failure::Usage(
                "--data is required when the fit carries no \"rho\"".into(),
            ));
        }
    };
    let labels = data.as_ref().map(|d| d.labels.as_slice());
    let pairs = args
        .tests
        .iter()
        .map(|t| {
            let (a, b) = t
                .split_once(',')
                .ok_or_else(|| Failure::Usage(format!("--test expects i,j, got `{t}`")))?;
            Ok((resolve_vertex(a, labels, n)?, resolve_vertex(b, labels, n)?))
        })
        .collect::<Result<Vec<_>, Failure>>()?;

    let vertices = vertex_report(&u_hat, &rho, args.alpha)?;
    let tests = test_report(&pairs, &u_hat, &rho, args.alpha, args.bh)?;
    if args.out.is_some() {
        let name = |i: usize| labels.map_or_else(|| i.to_string(), |l| l[i].clone());
        println!("vertex\tu_hat\tsd\tci_lo\tci_hi");
        for (i, v) in vertices.iter().enumerate() {
            println!(
                "{}\t{}\t{}\t{}\t{}",
                name(i),
                sig(v.u_hat),
                sig(v.rho.sqrt()),
                sig(v.ci_lo),
                sig(v.ci_hi)
            );
        }
        for t in &tests {
            println!(
                "test {} vs {}: z={} p={} {}",
                name(t.i),
                name(t.j),
                sig(t.z),
                sig(t.p),
                if t.rejected { "rejected" } else { "not rejected" }
            );
        }
    }
    emit_json(
        &InferReport {
            alpha: args.alpha,
            vertices,
            tests,
        },
        args.out.as_deref(),
    )
}

fn validate(args: ValidateArgs) -> Result<bool, Failure> {
    let model = build_model(&args.model)?;
    if !(args.limit > 0.0 && args.grid_step > 0.0) {
        return Err(Failure::Usage("--limit and --grid-step must be positive".into()));
    }
    let report = validate_model(&model, &symmetric_grid(args.limit, args.grid_step))?;
    println!("model {}", report.model);
    for c in &report.checks {
        println!(
            "{:<14} {:<4} {}",
            format!("{:?}", c.axiom),
            if c.passed { "ok" } else { "FAIL" },
            sig(c.residual)
        );
    }
    let constants = model_constants(&model, args.m, args.grid_step)?;
    println!(
        "M={} c1={} c2={} c3={} c4={} c5={} kappa={}",
        sig(constants.dynamic_range),
        sig(constants.c1),
        sig(constants.c2),
        sig(constants.c3),
        sig(constants.c4),
        sig(constants.c5),
        sig(constants.kappa)
    );
    if let Some(path) = &args.out {
        emit_json(
            &serde_json::json!({ "validation": report, "constants": constants }),
            Some(path),
        )?;
    }
    Ok(report.all_passed())
}

fn graphgen(args: GraphgenArgs) -> Result<(), Failure> {
    let config = GraphSamplerConfig {
        n: args.n,
        p: args.p,
        q: args.q,
        rule: match args.rule {
            RuleArg::UniformRandom => ProbabilityRule::UniformRandom,
            RuleArg::ConstantP => ProbabilityRule::ConstantP,
            RuleArg::ConstantQ => ProbabilityRule::ConstantQ,
        },
        scheme: match args.scheme {
            SchemeArg::Unordered => PairScheme::Unordered,
            SchemeArg::OrderedUnion => PairScheme::OrderedUnion,
        },
        seed: args.seed,
    };
    let graph = sample_graph(&config).map_err(|e| match e {
        Error::InvalidProbability { .. } => Failure::Usage(e.to_string()),
        other => other.into(),
    })?;
    match &args.out {
        Some(path) => {
            write_atomic(path, |w| Ok(graph.write_edge_list(w)?))?;
            eprintln!(
                "{} vertices, {} edges, connected: {}",
                graph.n(),
                graph.edge_count(),
                graph.is_connected()
            );
            Ok(())
        }
        None => Ok(graph.write_edge_list(io::stdout().lock())?),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let outcome = match cli.command {
        Command::Simulate(a) => simulate(a).map(|_| true),
        Command::Fit(a) => fit_cmd(a).map(|_| true),
        Command::Infer(a) => infer(a).map(|_| true),
        Command::Validate(a) => validate(a),
        Command::Graphgen(a) => graphgen(a).map(|_| true),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("error: model failed validation");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Closed) => ExitCode::SUCCESS,
    }
}
