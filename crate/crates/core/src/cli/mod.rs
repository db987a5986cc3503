//! The `dsnet` command-line driver.
//!
//! Exit codes: 0 success, 2 invalid input, 3 numerical failure (also an
//! inconclusive independence test), 4 capacity exceeded.

mod report;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};

pub use report::{fmt_f64, parse_structure_report, structure_rows, write_atomic, RunConfig};

use crate::dependence::ScoreContext;
use crate::error::{DsError, ErrorClass, Result};
use crate::frames::{Frame, Scope};
use crate::learners::{compare_structures, learn_polytree, learn_tree, StructureMetrics};
use crate::mass::{MassFunction, RESIDUAL_TOL};
use crate::network::{
    generate_network, indep_test, parse_network, write_network, BeliefNetwork, GenConfig,
    StructureKind, Verdict,
};
use crate::population::{condition_population, parse_event, sample_population, Dataset};

#[derive(Parser, Debug)]
#[command(
    name = "dsnet",
    version,
    about = "Belief-function networks: generate, sample, learn, evaluate"
)]
pub struct Cli {
    /// Seed for every random draw; recorded in all reports.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a random tree or polytree network.
    Gen(GenArgs),
    /// Sample a dataset from a network's underlying distribution.
    Sample(SampleArgs),
    /// Learn a tree or polytree structure.
    Learn(LearnArgs),
    /// Compare learned structures against true networks.
    Eval(EvalArgs),
    /// Condition a dataset on an event.
    Condition(ConditionArgs),
    /// Test a conditional independence statement.
    Indep(IndepArgs),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Kind {
    Tree,
    Polytree,
}

impl From<Kind> for StructureKind {
    fn from(k: Kind) -> Self {
        match k {
            Kind::Tree => StructureKind::Tree,
            Kind::Polytree => StructureKind::Polytree,
        }
    }
}

#[derive(Args, Debug)]
struct GenArgs {
    #[arg(value_enum)]
    kind: Kind,
    /// Number of variables.
    #[arg(long)]
    vars: usize,
    /// Comma-separated domain sizes, one per variable (default: all binary).
    #[arg(long, value_delimiter = ',')]
    domain_sizes: Option<Vec<usize>>,
    #[arg(long, default_value_t = 3)]
    focal_budget: usize,
    /// Network file to write.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct SampleArgs {
    network: PathBuf,
    /// Number of records.
    #[arg(long)]
    n: usize,
    /// Dataset file to write.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct LearnArgs {
    /// Dataset file, or network file together with `--exact`.
    input: PathBuf,
    #[arg(long, value_enum, default_value_t = Kind::Tree)]
    mode: Kind,
    /// Head-to-head threshold for polytree orientation.
    #[arg(long, default_value_t = 0.0)]
    theta: f64,
    /// Score exact marginals of a network's underlying distribution.
    #[arg(long)]
    exact: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct EvalArgs {
    /// True network file; may contain `{seed}`.
    truth: String,
    /// Learn report; may contain `{seed}`.
    report: String,
    /// Seed range `A..B` (half-open) substituted into `{seed}` templates.
    #[arg(long)]
    seeds: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ConditionArgs {
    dataset: PathBuf,
    /// `X1=a|b,X2=c` or `X1,X2:a.c;b.d`.
    #[arg(long)]
    event: String,
    /// Conditioned dataset file to write.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct IndepArgs {
    /// Network file (its underlying distribution) or dataset file.
    input: PathBuf,
    /// Comma-separated variable names.
    #[arg(long, value_delimiter = ',', required = true)]
    j: Vec<String>,
    #[arg(long, value_delimiter = ',', required = true)]
    k: Vec<String>,
    #[arg(long, value_delimiter = ',')]
    l: Vec<String>,
    #[arg(long, default_value_t = RESIDUAL_TOL)]
    epsilon: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Parse arguments, run, and map failures to exit codes.
pub fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("error")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("dsnet: {e}");
            ExitCode::from(e.class() as u8)
        }
    }
}

/// Run a parsed command; `Ok` carries the exit code.
pub fn run(cli: Cli) -> Result<u8> {
    let seed = cli.seed;
    match cli.command {
        Command::Gen(a) => cmd_gen(a, seed),
        Command::Sample(a) => cmd_sample(a, seed),
        Command::Learn(a) => cmd_learn(a, seed),
        Command::Eval(a) => cmd_eval(a, seed),
        Command::Condition(a) => cmd_condition(a, seed),
        Command::Indep(a) => cmd_indep(a, seed),
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => write_atomic(p, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn path_str(p: &Path) -> String {
    p.display().to_string()
}

enum Input {
    Network(BeliefNetwork),
    Dataset(Dataset),
}

/// A JSON document is a network, anything else a dataset.
fn read_input(path: &Path) -> Result<Input> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| DsError::Io(format!("{}: {e}", path.display())))?;
    if text.trim_start().starts_with('{') {
        Ok(Input::Network(parse_network(&text)?))
    } else {
        let ds = Dataset::read(path)?;
        Ok(Input::Dataset(ds))
    }
}

fn read_network(path: &Path) -> Result<BeliefNetwork> {
    match read_input(path)? {
        Input::Network(n) => Ok(n),
        Input::Dataset(_) => Err(DsError::Validation(format!(
            "{} is not a network file",
            path.display()
        ))),
    }
}

fn cmd_gen(a: GenArgs, seed: u64) -> Result<u8> {
    if a.vars < 2 {
        return Err(DsError::Validation("--vars must be at least 2".into()));
    }
    let sizes = a.domain_sizes.unwrap_or_else(|| vec![2; a.vars]);
    if sizes.len() != a.vars {
        return Err(DsError::Validation(format!(
            "--domain-sizes lists {} sizes for {} variables",
            sizes.len(),
            a.vars
        )));
    }
    let frame = Frame::with_sizes(&sizes)?;
    let cfg = GenConfig {
        focal_budget: a.focal_budget,
        ..GenConfig::default()
    };
    let net = generate_network(a.kind.into(), &frame, &cfg, seed)?;
    let joint = net.underlying_distribution()?;
    write_atomic(&a.out, &write_network(&net))?;

    let mut rc = RunConfig::new("gen", seed);
    rc.out = Some(path_str(&a.out));
    rc.focal_budget = Some(a.focal_budget);
    rc.set("kind", StructureKind::from(a.kind))
        .set("vars", a.vars)
        .set(
            "domain_sizes",
            sizes
                .iter()
                .map(usize::to_string)
                .collect::<Vec<_>>()
                .join(","),
        );
    let mut text = rc.header();
    let dag = net.dag();
    text += &format!("edges\t{}\n", dag.edges().len());
    text += &format!("colliders\t{}\n", dag.colliders().len());
    text += &format!("underlying_focal_sets\t{}\n", joint.len());
    emit(None, &text)?;
    Ok(0)
}

fn cmd_sample(a: SampleArgs, seed: u64) -> Result<u8> {
    if a.n == 0 {
        return Err(DsError::Validation("--n must be positive".into()));
    }
    let net = read_network(&a.network)?;
    let joint = net.underlying_distribution()?;
    let ds = sample_population(&joint, a.n, seed)?;
    let ds = Dataset::new(
        net.frame(),
        ds.records().collect(),
        format!("sampled n={} seed={seed} from {}", a.n, a.network.display()),
    )?;
    write_atomic(&a.out, &ds.to_text())?;

    let empirical = ds.empirical_mass(&net.frame().full_scope())?;
    let mut rc = RunConfig::new("sample", seed);
    rc.inputs.push(path_str(&a.network));
    rc.out = Some(path_str(&a.out));
    rc.n = Some(a.n);
    let mut text = rc.header();
    text += &format!("records\t{}\n", ds.len());
    text += &format!("l1_to_joint\t{}\n", fmt_f64(empirical.l1_distance(&joint)?));
    emit(None, &text)?;
    Ok(0)
}

fn cmd_learn(a: LearnArgs, seed: u64) -> Result<u8> {
    let ctx = match (read_input(&a.input)?, a.exact) {
        (Input::Network(net), true) => ScoreContext::from_joint(net.underlying_distribution()?)?,
        (Input::Dataset(ds), false) => ScoreContext::from_dataset(ds)?,
        (Input::Network(_), false) => {
            return Err(DsError::Validation(
                "learning from a network file needs --exact".into(),
            ))
        }
        (Input::Dataset(_), true) => {
            return Err(DsError::Validation("--exact needs a network file".into()))
        }
    };
    let learned = match a.mode {
        Kind::Tree => learn_tree(&ctx)?,
        Kind::Polytree => learn_polytree(&ctx, a.theta)?,
    };
    let mut rc = RunConfig::new("learn", seed);
    rc.inputs.push(path_str(&a.input));
    rc.out = a.out.as_deref().map(path_str);
    rc.exact = a.exact;
    if a.mode == Kind::Polytree {
        rc.theta = Some(a.theta);
    }
    rc.set("mode", StructureKind::from(a.mode));
    let text = rc.header() + &structure_rows(&learned);
    emit(a.out.as_deref(), &text)?;
    Ok(0)
}

fn parse_seed_range(s: &str) -> Result<std::ops::Range<u64>> {
    let bad = || DsError::Validation(format!("seed range must look like A..B, got {s:?}"));
    let (a, b) = s.split_once("..").ok_or_else(bad)?;
    let a: u64 = a.trim().parse().map_err(|_| bad())?;
    let b: u64 = b.trim().parse().map_err(|_| bad())?;
    if a >= b {
        return Err(bad());
    }
    Ok(a..b)
}

fn evaluate_pair(truth: &str, report: &str) -> Result<StructureMetrics> {
    let net = read_network(Path::new(truth))?;
    let text =
        std::fs::read_to_string(report).map_err(|e| DsError::Io(format!("{report}: {e}")))?;
    let learned = parse_structure_report(&text, net.frame())?;
    compare_structures(net.dag(), &learned)
}

fn metrics_row(label: &str, m: &StructureMetrics) -> String {
    format!(
        "{label}\t{}\t{}\t{}\t{}\t{}\n",
        fmt_f64(m.precision),
        fmt_f64(m.recall),
        fmt_f64(m.orientation_accuracy),
        m.spurious_colliders,
        m.true_colliders
    )
}

fn cmd_eval(a: EvalArgs, seed: u64) -> Result<u8> {
    let mut rc = RunConfig::new("eval", seed);
    rc.inputs.push(a.truth.clone());
    rc.inputs.push(a.report.clone());
    rc.out = a.out.as_deref().map(path_str);
    let templated = a.truth.contains("{seed}") || a.report.contains("{seed}");
    let runs: Vec<(String, String, String)> = match (&a.seeds, templated) {
        (Some(range), true) => {
            rc.set("seeds", range);
            parse_seed_range(range)?
                .map(|s| {
                    let sub = |t: &str| t.replace("{seed}", &s.to_string());
                    (s.to_string(), sub(&a.truth), sub(&a.report))
                })
                .collect()
        }
        (None, false) => vec![("single".into(), a.truth.clone(), a.report.clone())],
        (Some(_), false) => {
            return Err(DsError::Validation(
                "--seeds needs a {seed} template".into(),
            ))
        }
        (None, true) => {
            return Err(DsError::Validation(
                "a {seed} template needs --seeds".into(),
            ))
        }
    };
    let mut text = rc.header();
    text += "#run\tprecision\trecall\torientation_accuracy\tspurious_colliders\ttrue_colliders\n";
    let mut all = Vec::with_capacity(runs.len());
    for (label, truth, report) in &runs {
        let m = evaluate_pair(truth, report)?;
        text += &metrics_row(label, &m);
        all.push(m);
    }
    if runs.len() > 1 {
        let k = all.len() as f64;
        let mean = |f: fn(&StructureMetrics) -> f64| all.iter().map(f).sum::<f64>() / k;
        text += &format!(
            "mean\t{}\t{}\t{}\t{}\t{}\n",
            fmt_f64(mean(|m| m.precision)),
            fmt_f64(mean(|m| m.recall)),
            fmt_f64(mean(|m| m.orientation_accuracy)),
            fmt_f64(mean(|m| m.spurious_colliders as f64)),
            fmt_f64(mean(|m| m.true_colliders as f64)),
        );
        let exact = all
            .iter()
            .filter(|m| m.precision == 1.0 && m.recall == 1.0)
            .count();
        text += &format!("skeleton_exact\t{exact}\t{}\n", all.len());
    }
    emit(a.out.as_deref(), &text)?;
    Ok(0)
}

/// Largest admissible L1 gap between conditioning a population and
/// conditioning its empirical mass.
pub const CONDITION_GAP_TOL: f64 = 1e-12;

fn cmd_condition(a: ConditionArgs, seed: u64) -> Result<u8> {
    let ds = Dataset::read(&a.dataset)?;
    let event = parse_event(ds.frame(), &a.event)?;
    let conditioned = condition_population(&ds, &event)?;
    let full = ds.frame().full_scope();
    let direct = ds.empirical_mass(&full)?.condition(&event)?;
    let gap = conditioned.empirical_mass(&full)?.l1_distance(&direct)?;
    write_atomic(&a.out, &conditioned.to_text())?;

    let mut rc = RunConfig::new("condition", seed);
    rc.inputs.push(path_str(&a.dataset));
    rc.out = Some(path_str(&a.out));
    rc.set("event", &a.event);
    let mut text = rc.header();
    text += &format!("records_in\t{}\n", ds.len());
    text += &format!("records_out\t{}\n", conditioned.len());
    text += &format!("rejected\t{}\n", ds.len() - conditioned.len());
    text += &format!("l1_gap\t{}\n", fmt_f64(gap));
    emit(None, &text)?;
    if gap > CONDITION_GAP_TOL {
        eprintln!("dsnet: conditioning gap {gap:e} exceeds {CONDITION_GAP_TOL:e}");
        return Ok(ErrorClass::Numerical as u8);
    }
    Ok(0)
}

fn var_indices(frame: &Arc<Frame>, names: &[String]) -> Result<Vec<usize>> {
    names
        .iter()
        .filter(|n| !n.trim().is_empty())
        .map(|n| frame.var_index(n.trim()))
        .collect()
}

/// Marginal of the input over a scope.
type MarginalFn = Box<dyn Fn(&Scope) -> Result<MassFunction>>;

fn cmd_indep(a: IndepArgs, seed: u64) -> Result<u8> {
    if a.epsilon.is_nan() || a.epsilon < 0.0 {
        return Err(DsError::Validation("--epsilon must be nonnegative".into()));
    }
    let (frame, m): (Arc<Frame>, MarginalFn) = match read_input(&a.input)? {
        Input::Network(net) => {
            let joint = net.underlying_distribution()?;
            (
                Arc::clone(net.frame()),
                Box::new(move |s: &Scope| joint.marginalize(s)),
            )
        }
        Input::Dataset(ds) => (
            Arc::clone(ds.frame()),
            Box::new(move |s: &Scope| ds.empirical_mass(s)),
        ),
    };
    let (j, k, l) = (
        var_indices(&frame, &a.j)?,
        var_indices(&frame, &a.k)?,
        var_indices(&frame, &a.l)?,
    );
    let jkl = Scope::new(&frame, j.iter().chain(&k).chain(&l).copied().collect());
    let st = indep_test(&m(&jkl)?, &j, &k, &l, a.epsilon)?;

    let mut rc = RunConfig::new("indep", seed);
    rc.inputs.push(path_str(&a.input));
    rc.out = a.out.as_deref().map(path_str);
    rc.epsilon = Some(a.epsilon);
    let names = |v: &[usize]| {
        v.iter()
            .map(|&i| frame.variable(i).name())
            .collect::<Vec<_>>()
            .join(",")
    };
    let (verdict, why) = match &st.verdict {
        Verdict::Independent => ("independent", String::new()),
        Verdict::Dependent => ("dependent", String::new()),
        Verdict::Inconclusive(w) => ("inconclusive", w.replace(['\t', '\n'], " ")),
    };
    let residual = st.residual.map_or("nan".to_string(), fmt_f64);
    let mut text = rc.header();
    text += "#j\tk\tl\tverdict\tresidual\tnote\n";
    text += &format!(
        "{}\t{}\t{}\t{verdict}\t{residual}\t{why}\n",
        names(&j),
        names(&k),
        names(&l)
    );
    emit(a.out.as_deref(), &text)?;
    Ok(match st.verdict {
        Verdict::Inconclusive(_) => ErrorClass::Numerical as u8,
        _ => 0,
    })
}
