//! `mollikit`: batch front end for the variable-step mollifier library.
//!
//! Exit codes: 0 on success, 1 when a checked invariant fails (a JSON line naming
//! the failed checks goes to stderr), 2 on I/O or configuration errors.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use mollikit::analysis::counterexample::counterexample_run;
use mollikit::analysis::fixtures::Fixture;
use mollikit::analysis::norms::{parse_norms, NormKind};
use mollikit::analysis::opnorm::l1_operator_norm;
use mollikit::analysis::study::{convergence_study, Family};
use mollikit::eta::{build_from_spec, certify, parse_eta_spec, Builder, Decay, EtaProfile};
use mollikit::feasible::{calibrated_setup, density_study, feasible_smooth, ConstraintSpec, Mode};
use mollikit::geometry::io::{read_field, read_field_on_box, write_field_file, DomainSpec};
use mollikit::geometry::{Domain, ScalarField};
use mollikit::kernels::{Kernel, KernelSpec};
use mollikit::mollify::{gradient_parts, modified_config, mollify_with, MollifierConfig};
use mollikit::Error;

#[derive(Parser, Debug)]
#[command(name = "mollikit", version, about = "Variable-step mollifiers on uniform grids")]
struct Cli {
    /// Worker threads (results do not depend on this).
    #[arg(long, global = true, env = "MOLLIKIT_THREADS")]
    threads: Option<usize>,

    /// Seed for randomized probes and modulus sampling.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Omit the generation time from JSON reports.
    #[arg(long, global = true)]
    no_timestamp: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build and certify a step profile η.
    Eta(EtaArgs),
    /// Apply T (or T̃ₙ) to a field.
    Mollify(MollifyArgs),
    /// Convergence study of Tₙf → f on a fixture.
    Study(StudyArgs),
    /// Estimate the L¹ operator norm against its bound.
    Norm1(Norm1Args),
    /// Evaluate the one-dimensional counterexample.
    Counterexample(CounterexampleArgs),
    /// Smooth a feasible function inside a constraint set.
    Feasible(FeasibleArgs),
    /// Run the built-in invariant suite.
    Selftest(SelftestArgs),
}

#[derive(Args, Debug)]
struct DomainArgs {
    /// Domain JSON, inline or as a file path.
    #[arg(long)]
    domain: Option<String>,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum BuilderArg {
    Whitney,
    Regdist,
    Quadratic,
    Calibrated,
}

#[derive(Args, Debug)]
struct EtaArgs {
    #[arg(long, value_enum)]
    builder: BuilderArg,
    #[arg(long)]
    epsilon: f64,
    /// Constraint bound α; its header fixes the grid and its zeros form Δ.
    #[arg(long)]
    alpha: Option<PathBuf>,
    #[command(flatten)]
    domain: DomainArgs,
    /// Kernel JSON used by the smoothing builders.
    #[arg(long)]
    kernel: Option<String>,
    /// Histogram bins for the modulus of continuity (calibrated builder).
    #[arg(long, default_value_t = 64)]
    bins: usize,
    #[arg(long)]
    out: PathBuf,
    /// Certificate destination (stdout when omitted).
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum VariantArg {
    Standard,
    Modified,
}

#[derive(Args, Debug)]
struct MollifyArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    eta: PathBuf,
    #[arg(long)]
    kernel: Option<String>,
    /// Divisor n of the step, or `none`.
    #[arg(long, default_value = "none")]
    n: String,
    #[arg(long, value_enum, default_value_t = VariantArg::Standard)]
    variant: VariantArg,
    #[command(flatten)]
    domain: DomainArgs,
    #[arg(long)]
    out: PathBuf,
    /// Also write ∇Tf (one file per axis in 2D/3D, suffixed `_x<axis>`).
    #[arg(long)]
    grad: Option<PathBuf>,
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct StudyArgs {
    /// sin | poly | step | bubble | constant | custom:<csv>
    #[arg(long)]
    fixture: String,
    /// Step profile, e.g. `whitney:0.25` or `quadratic:0.1`.
    #[arg(long, default_value = "whitney:0.25")]
    eta: String,
    #[arg(long)]
    kernel: Option<String>,
    #[arg(long, value_delimiter = ',', default_value = "1,2,4,8,16")]
    n: Vec<u32>,
    #[arg(long, default_value = "L1,L2,W12,TV")]
    norms: String,
    #[arg(long, value_enum, default_value_t = VariantArg::Standard)]
    variant: VariantArg,
    #[command(flatten)]
    domain: DomainArgs,
    /// Report destination; the error table is written next to it as CSV.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct Norm1Args {
    #[arg(long, default_value = "quadratic:0.1")]
    eta: String,
    #[arg(long)]
    kernel: Option<String>,
    #[arg(long, default_value_t = 100)]
    probes: usize,
    #[arg(long)]
    n: Option<u32>,
    #[command(flatten)]
    domain: DomainArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct CounterexampleArgs {
    /// Grid sizes for the discretized cross-check of Tf₀(1/4).
    #[arg(long, value_delimiter = ',', default_value = "257,1025")]
    resolutions: Vec<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct FeasibleArgs {
    #[arg(long)]
    f: PathBuf,
    #[arg(long)]
    alpha: PathBuf,
    #[arg(long, default_value = "value")]
    mode: Mode,
    #[arg(long, value_delimiter = ',', default_value = "1,2,4,8,16")]
    n: Vec<u32>,
    /// ε of the base Whitney profile before calibration.
    #[arg(long, default_value_t = 0.5)]
    epsilon: f64,
    #[arg(long, default_value_t = 64)]
    bins: usize,
    #[arg(long)]
    kernel: Option<String>,
    /// Error norm of the density study.
    #[arg(long, default_value = "W12")]
    norm: NormKind,
    /// Also track the truncated-diagonal sequence in L².
    #[arg(long)]
    truncated: bool,
    #[command(flatten)]
    domain: DomainArgs,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Directory receiving βₙTₙf for every n.
    #[arg(long)]
    emit_iterates: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SelftestArgs {
    #[arg(long)]
    out: Option<PathBuf>,
}

/// How a run ended.
enum Failure {
    /// A checked invariant failed; the names go into the stderr JSON.
    Assertion(Vec<String>),
    Config(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Certification { ref what, .. } => Failure::Assertion(vec![format!("{what}: {e}")]),
            other => Failure::Config(other.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Config(e.to_string())
    }
}

type Run = std::result::Result<(), Failure>;

struct Ctx {
    seed: u64,
    timestamp: bool,
}

impl Ctx {
    fn emit(&self, command: &str, report: Value, out: Option<&Path>) -> Run {
        let mut doc = json!({ "command": command, "seed": self.seed });
        if self.timestamp {
            let secs = std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0);
            doc["generated_unix"] = json!(secs);
        }
        doc["report"] = report;
        let text = serde_json::to_string_pretty(&doc).map_err(|e| Failure::Config(e.to_string()))? + "\n";
        match out {
            Some(p) => fs::write(p, text)?,
            None => print!("{text}"),
        }
        Ok(())
    }
}

fn check(passed: bool, failed: impl IntoIterator<Item = String>) -> Run {
    if passed {
        Ok(())
    } else {
        Err(Failure::Assertion(failed.into_iter().collect()))
    }
}

fn to_value<T: serde::Serialize>(v: &T) -> std::result::Result<Value, Failure> {
    serde_json::to_value(v).map_err(|e| Failure::Config(e.to_string()))
}

fn load_domain(arg: &Option<String>) -> std::result::Result<Option<Arc<Domain<f64>>>, Failure> {
    let Some(text) = arg else { return Ok(None) };
    let spec = if text.trim_start().starts_with('{') { DomainSpec::from_json(text)? } else { DomainSpec::load(text)? };
    Ok(Some(spec.build::<f64>()?.into_arc()))
}

fn default_order(dim: usize) -> usize {
    match dim {
        1 => 64,
        2 => 32,
        _ => 16,
    }
}

fn load_kernel(arg: &Option<String>, dim: usize) -> std::result::Result<Kernel<f64>, Failure> {
    let spec = match arg {
        Some(text) => KernelSpec::from_json(text)?,
        None => KernelSpec::bump(default_order(dim)),
    };
    Ok(spec.build(dim)?)
}

/// A field file read onto `domain`, or onto the open box of its header.
fn load_field(path: &Path, domain: Option<&Arc<Domain<f64>>>) -> std::result::Result<ScalarField<f64>, Failure> {
    if !path.exists() {
        return Err(Failure::Config(format!("input file {} not found", path.display())));
    }
    Ok(match domain {
        Some(d) => read_field(path, d)?,
        None => read_field_on_box(path)?,
    })
}

fn axis_path(base: &Path, axis: usize) -> PathBuf {
    let stem = base.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let ext = base.extension().map(|e| e.to_string_lossy().into_owned()).unwrap_or_else(|| "csv".into());
    base.with_file_name(format!("{stem}_x{axis}.{ext}"))
}

fn run_eta(a: &EtaArgs, ctx: &Ctx) -> Run {
    let explicit = load_domain(&a.domain.domain)?;
    let alpha = match &a.alpha {
        Some(p) => Some(ConstraintSpec::new(load_field(p, explicit.as_ref())?, Mode::Value)?),
        None => None,
    };
    let domain = match (&alpha, explicit) {
        (Some(spec), _) => spec.domain().clone(),
        (None, Some(d)) => d,
        (None, None) => DomainSpec::unit_box(1, 1024).build::<f64>()?.into_arc(),
    };
    let eta = match a.builder {
        BuilderArg::Calibrated => {
            let spec = alpha.as_ref().ok_or_else(|| Failure::Config("calibrated builder needs --alpha".into()))?;
            calibrated_setup(spec, a.epsilon, a.bins, ctx.seed)?.0
        }
        b => {
            let builder = match b {
                BuilderArg::Whitney => Builder::Whitney,
                BuilderArg::Regdist => Builder::Regdist,
                _ => Builder::Quadratic,
            };
            let kernel = load_kernel(&a.kernel, domain.dim())?;
            build_from_spec(&domain, builder, a.epsilon, &kernel)?
        }
    };
    write_field_file(&eta.field, &a.out)?;
    let cert = certify(&eta);
    ctx.emit("eta", to_value(&cert)?, a.report.as_deref())?;
    check(cert.passed(), cert.violations.iter().map(|v| format!("{} at node {}", v.check, v.node)))
}

fn run_mollify(a: &MollifyArgs, ctx: &Ctx) -> Run {
    let explicit = load_domain(&a.domain.domain)?;
    let f = load_field(&a.input, explicit.as_ref())?;
    let domain = f.domain().clone();
    let eta = EtaProfile::from_field(load_field(&a.eta, Some(&domain))?)?;
    let n = match a.n.trim() {
        "none" => None,
        t => Some(t.parse::<u32>().map_err(|_| Failure::Config(format!("bad --n `{t}`")))?),
    };
    let kernel = load_kernel(&a.kernel, domain.dim())?;
    let cfg = match a.variant {
        VariantArg::Standard => {
            let c = MollifierConfig::new(kernel, eta);
            match n {
                Some(n) => c.with_n(n),
                None => c,
            }
        }
        VariantArg::Modified => {
            let n = n.ok_or_else(|| Failure::Config("the modified variant needs an integer --n".into()))?;
            let mut quadratic = eta;
            quadratic.decay = Decay::Quadratic;
            let order = kernel.order();
            modified_config(&quadratic, &kernel, n, order)?
        }
    };
    let mut res = mollify_with(&f, &cfg)?;
    write_field_file(&res.field, &a.out)?;
    if let Some(path) = &a.grad {
        let g = gradient_parts(&f, &f.gradient(), &cfg)?.grad;
        if domain.dim() == 1 {
            write_field_file(&g.component(0), path)?;
        } else {
            for (axis, c) in g.components().iter().enumerate() {
                write_field_file(c, axis_path(path, axis))?;
            }
        }
    }
    if !ctx.timestamp {
        res.report.runtime_ms = None;
    }
    ctx.emit("mollify", to_value(&res.report)?, a.report.as_deref())
}

fn run_study(a: &StudyArgs, ctx: &Ctx) -> Run {
    let explicit = load_domain(&a.domain.domain)?;
    let fixture = match a.fixture.strip_prefix("custom:") {
        Some(path) => {
            let field = load_field(Path::new(path), explicit.as_ref())?;
            Fixture::custom(&a.fixture, field)
        }
        None => {
            let d = match explicit {
                Some(d) => d,
                None => DomainSpec::unit_box(1, 1024).build::<f64>()?.into_arc(),
            };
            Fixture::by_name(&a.fixture, &d)?
        }
    };
    let domain = fixture.field().domain().clone();
    let kernel = load_kernel(&a.kernel, domain.dim())?;
    let (builder, eps) = parse_eta_spec(&a.eta)?;
    let eta = build_from_spec(&domain, builder, eps, &kernel)?;
    let family = match a.variant {
        VariantArg::Standard => Family::Standard { kernel, eta },
        VariantArg::Modified => {
            let order = kernel.order();
            Family::Modified { quadratic: eta, smoothing: kernel, order }
        }
    };
    let norms = parse_norms(&a.norms)?;
    let mut report = convergence_study(&fixture, &family, &a.n, &norms)?;
    if !ctx.timestamp {
        report.strip_timing();
    }
    if let Some(out) = &a.out {
        fs::write(out.with_extension("csv"), report.to_csv())?;
    }
    ctx.emit("study", to_value(&report)?, a.out.as_deref())?;
    check(report.passed, report.checks.iter().filter(|c| !c.pass).map(|c| c.name.clone()))
}

fn run_norm1(a: &Norm1Args, ctx: &Ctx) -> Run {
    let domain = match load_domain(&a.domain.domain)? {
        Some(d) => d,
        None => DomainSpec::unit_box(1, 1024).build::<f64>()?.into_arc(),
    };
    let kernel = load_kernel(&a.kernel, domain.dim())?;
    let (builder, eps) = parse_eta_spec(&a.eta)?;
    let eta = build_from_spec(&domain, builder, eps, &kernel)?;
    let mut cfg = MollifierConfig::new(kernel, eta);
    cfg.n = a.n;
    let report = l1_operator_norm(&cfg, a.probes, ctx.seed)?;
    ctx.emit("norm1", to_value(&report)?, a.out.as_deref())?;
    check(report.pass, ["rescaled estimate <= 1.1 x bound".to_string()])
}

fn run_counterexample(a: &CounterexampleArgs, ctx: &Ctx) -> Run {
    let report = counterexample_run(&a.resolutions)?;
    ctx.emit("counterexample", to_value(&report)?, a.out.as_deref())?;
    check(report.passed, report.checks.iter().filter(|c| !c.pass).map(|c| c.name.clone()))
}

fn run_feasible(a: &FeasibleArgs, ctx: &Ctx) -> Run {
    let explicit = load_domain(&a.domain.domain)?;
    let alpha = load_field(&a.alpha, explicit.as_ref())?;
    let spec = ConstraintSpec::new(alpha, a.mode)?;
    let f = load_field(&a.f, Some(&spec.alpha.domain().clone()))?;
    let kernel = load_kernel(&a.kernel, spec.domain().dim())?;
    let (eta, _) = calibrated_setup(&spec, a.epsilon, a.bins, ctx.seed)?;
    if let Some(dir) = &a.emit_iterates {
        fs::create_dir_all(dir)?;
        for &n in &a.n {
            let sm = feasible_smooth(&f, &spec, &eta, &kernel, n)?;
            write_field_file(&sm.field, dir.join(format!("iterate_n{n}.csv")))?;
        }
    }
    let report = density_study(&f, &spec, &eta, &kernel, &a.n, a.norm, a.truncated)?;
    ctx.emit("feasible", to_value(&report)?, a.out.as_deref())?;
    check(report.passed, report.checks.iter().filter(|c| !c.pass).map(|c| c.name.clone()))
}

fn run_selftest(a: &SelftestArgs, ctx: &Ctx) -> Run {
    let report = mollikit::selftest::run(ctx.seed)?;
    ctx.emit("selftest", to_value(&report)?, a.out.as_deref())?;
    check(report.passed, report.checks.iter().filter(|c| !c.pass).map(|c| c.name.clone()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(k) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(k.max(1)).build_global() {
            eprintln!("{}", json!({ "status": "error", "message": e.to_string() }));
            return ExitCode::from(2);
        }
    }
    let ctx = Ctx { seed: cli.seed, timestamp: !cli.no_timestamp };
    let outcome = match &cli.command {
        Command::Eta(a) => run_eta(a, &ctx),
        Command::Mollify(a) => run_mollify(a, &ctx),
        Command::Study(a) => run_study(a, &ctx),
        Command::Norm1(a) => run_norm1(a, &ctx),
        Command::Counterexample(a) => run_counterexample(a, &ctx),
        Command::Feasible(a) => run_feasible(a, &ctx),
        Command::Selftest(a) => run_selftest(a, &ctx),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Assertion(failed)) => {
            eprintln!("{}", json!({ "status": "assertion_failed", "failed": failed }));
            ExitCode::from(1)
        }
        Err(Failure::Config(message)) => {
            eprintln!("{}", json!({ "status": "error", "message": message }));
            ExitCode::from(2)
        }
    }
}
