use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use mixnorm::experiments::{
    admissibility_report, growth_csv, search_constant, verify_csv, verify_inequality, ExperimentConfig,
    OutputFormat, SpecConfig,
};
use mixnorm::exponents::{parse_list, ExponentTuple, ExtExp};
use mixnorm::opnorm::{
    diagonal_coefficients, opnorm_ascent, opnorm_auto, opnorm_diagonal_closed_form, opnorm_exact_signs,
    AscentOptions, OpNormEstimate, OpNormOptions, DEFAULT_ENUMERATION_BUDGET,
};
use mixnorm::parallel::with_jobs;
use mixnorm::tensor::{CoefficientTensor, MixedNormSpec};
use mixnorm::witness::{FamilyDescriptor, FamilyKind, Instance};
use mixnorm::Field;
use serde_json::json;

mod exit {
    pub const OTHER: u8 = 1;
    pub const USAGE: u8 = 2;
    pub const FILE: u8 = 3;
    pub const BUDGET: u8 = 4;
    pub const RANK: u8 = 5;
    pub const ASSERTION: u8 = 6;
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    File(String),
    Core(mixnorm::Error),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => exit::USAGE,
            Failure::File(_) => exit::FILE,
            Failure::Core(err) => match err {
                mixnorm::Error::Domain(_) | mixnorm::Error::Parse(_) => exit::USAGE,
                mixnorm::Error::Budget { .. } => exit::BUDGET,
                mixnorm::Error::RankMismatch { .. } => exit::RANK,
                mixnorm::Error::HardAssertion(_) => exit::ASSERTION,
                _ => exit::OTHER,
            },
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Usage(m) | Failure::File(m) => f.write_str(m),
            Failure::Core(err) => write!(f, "{err}"),
        }
    }
}

impl From<mixnorm::Error> for Failure {
    fn from(err: mixnorm::Error) -> Self {
        Failure::Core(err)
    }
}

type Outcome<T = ()> = Result<T, Failure>;

/// A comma-separated flag value.
#[derive(Clone, Debug)]
struct List<T>(Vec<T>);

fn exact_list(s: &str) -> Result<List<ExtExp>, String> {
    parse_list(s, ExtExp::parse_exact).map(List).map_err(|e| e.to_string())
}

fn lenient_list(s: &str) -> Result<List<ExtExp>, String> {
    parse_list(s, ExtExp::parse_lenient).map(List).map_err(|e| e.to_string())
}

fn lenient_exp(s: &str) -> Result<ExtExp, String> {
    ExtExp::parse_lenient(s).map_err(|e| e.to_string())
}

fn int_list<T: std::str::FromStr>(s: &str) -> Result<List<T>, String>
where
    T::Err: std::fmt::Display,
{
    s.split(',')
        .map(|x| x.trim().parse::<T>().map_err(|e| format!("bad integer '{x}': {e}")))
        .collect::<Result<_, _>>()
        .map(List)
}

/// Laboratory for mixed-norm inequalities of multilinear forms on l_p spaces.
#[derive(Parser)]
#[command(name = "mixnorm", version)]
struct Cli {
    /// Worker threads (0 = all cores). Output does not depend on it.
    #[arg(long, short = 'j', global = true, default_value_t = 0)]
    jobs: usize,
    /// Enumeration budget (sign vectors or search classes).
    #[arg(long, global = true, env = "MIXNORM_BUDGET")]
    budget: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Minimal admissible exponents for given space exponents.
    Exponents(ExponentsArgs),
    /// Mixed norm of a tensor file.
    MixedNorm(MixedNormArgs),
    /// Operator norm of a tensor file.
    Opnorm(OpnormArgs),
    /// Ratio mixed norm / operator norm on concrete instances.
    Verify(VerifyArgs),
    /// Growth of the ratio along a witness family.
    Probe(ProbeArgs),
    /// Exhaustive search over n x n sign matrices for the (2,1) constant.
    SearchConstant(SearchArgs),
}

#[derive(Args)]
struct SpecArgs {
    /// Space exponents: inf, integers or a/b.
    #[arg(long, value_parser = exact_list)]
    p: List<ExtExp>,
    /// Summation order, 1-based and outermost first.
    #[arg(long, value_parser = int_list::<usize>)]
    sigma: Option<List<usize>>,
    #[arg(long, value_enum, default_value_t = FieldArg::Real)]
    field: FieldArg,
}

impl SpecArgs {
    fn config(&self, m: usize) -> SpecConfig {
        SpecConfig {
            m,
            p: self.p.0.clone(),
            sigma: self.sigma.as_ref().map(|s| s.0.clone()),
            field: self.field.into(),
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum FieldArg {
    Real,
    Complex,
}

impl From<FieldArg> for Field {
    fn from(f: FieldArg) -> Field {
        match f {
            FieldArg::Real => Field::Real,
            FieldArg::Complex => Field::Complex,
        }
    }
}

#[derive(Args)]
struct ExponentsArgs {
    #[arg(long)]
    m: usize,
    #[command(flatten)]
    spec: SpecArgs,
}

#[derive(Args)]
struct MixedNormArgs {
    #[arg(long)]
    tensor: PathBuf,
    /// One exponent per axis, in summation order.
    #[arg(long, value_parser = lenient_list)]
    q: List<ExtExp>,
    /// Axis order, 1-based and outermost first (identity by default).
    #[arg(long, value_parser = int_list::<usize>)]
    order: Option<List<usize>>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Auto,
    Exact,
    Closed,
    Ascent,
}

#[derive(Args)]
struct AscentArgs {
    #[arg(long, default_value_t = AscentOptions::default().starts)]
    starts: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = AscentOptions::default().tol)]
    tol: f64,
    #[arg(long, default_value_t = AscentOptions::default().max_sweeps)]
    max_sweeps: usize,
}

impl AscentArgs {
    fn options(&self) -> AscentOptions {
        AscentOptions {
            starts: self.starts,
            seed: self.seed,
            tol: self.tol,
            max_sweeps: self.max_sweeps,
        }
    }
}

#[derive(Args)]
struct OpnormArgs {
    #[arg(long)]
    tensor: PathBuf,
    #[arg(long, value_parser = exact_list)]
    p: List<ExtExp>,
    #[arg(long, value_enum, default_value_t = MethodArg::Auto)]
    method: MethodArg,
    #[command(flatten)]
    ascent: AscentArgs,
    /// Print the full estimate, certificate included, as JSON.
    #[arg(long)]
    json: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    Diagonal,
    PinnedDiagonal,
    Hadamard,
    RandomSign,
}

impl From<FamilyArg> for FamilyKind {
    fn from(f: FamilyArg) -> FamilyKind {
        match f {
            FamilyArg::Diagonal => FamilyKind::Diagonal,
            FamilyArg::PinnedDiagonal => FamilyKind::PinnedDiagonal,
            FamilyArg::Hadamard => FamilyKind::Hadamard,
            FamilyArg::RandomSign => FamilyKind::RandomSign,
        }
    }
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    spec: SpecArgs,
    /// q_1..q_{m-1}, optionally followed by the inner exponent p_sigma(m)*.
    #[arg(long, value_parser = lenient_list)]
    q: List<ExtExp>,
    /// Generate instances from a family.
    #[arg(long, value_enum)]
    family: Option<FamilyArg>,
    /// Hadamard order: the instance has size 2^k.
    #[arg(long)]
    k: Option<u32>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    pins: Option<usize>,
    #[arg(long, default_value_t = 0)]
    family_seed: u64,
    /// Number of random-sign instances (seeds family-seed, family-seed + 1, ...).
    #[arg(long, default_value_t = 1)]
    count: u64,
    /// Tensor files, added after the family instances.
    #[arg(long)]
    tensor: Vec<PathBuf>,
    #[command(flatten)]
    ascent: AscentArgs,
    /// Write the per-instance CSV here.
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, default_value = "verify")]
    id: String,
}

#[derive(Args)]
struct ProbeArgs {
    /// Experiment config (JSON); flags below are ignored except the output ones.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long, value_parser = exact_list)]
    p: Option<List<ExtExp>>,
    #[arg(long, value_parser = int_list::<usize>)]
    sigma: Option<List<usize>>,
    #[arg(long, value_enum, default_value_t = FieldArg::Real)]
    field: FieldArg,
    #[arg(long, value_parser = lenient_list)]
    q: Option<List<ExtExp>>,
    #[arg(long, value_enum)]
    family: Option<FamilyArg>,
    /// Codomain exponent for the l_r-valued diagonal family.
    #[arg(long, value_parser = lenient_exp)]
    r: Option<ExtExp>,
    #[arg(long)]
    pins: Option<usize>,
    #[arg(long, value_parser = int_list::<usize>)]
    n_range: Option<List<usize>>,
    #[arg(long, value_parser = int_list::<u64>, default_value = "0")]
    seeds: List<u64>,
    #[command(flatten)]
    ascent: AscentArgs,
    #[arg(long, default_value_t = 0.05)]
    slope_threshold: f64,
    #[arg(long, default_value = "probe")]
    id: String,
    /// Report file; stdout when absent.
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
    /// Write the effective config here.
    #[arg(long)]
    emit_config: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

impl From<FormatArg> for OutputFormat {
    fn from(f: FormatArg) -> OutputFormat {
        match f {
            FormatArg::Csv => OutputFormat::Csv,
            FormatArg::Json => OutputFormat::Json,
        }
    }
}

#[derive(Args)]
struct SearchArgs {
    #[arg(long)]
    n: usize,
    /// Enumerate every sign matrix instead of row/column sign classes.
    #[arg(long)]
    no_symmetry: bool,
    /// Write the report (with the maximizing matrix) as JSON.
    #[arg(long)]
    output: Option<PathBuf>,
}

fn read_text(path: &Path) -> Outcome<String> {
    fs::read_to_string(path).map_err(|e| Failure::File(format!("{}: {e}", path.display())))
}

fn write_text(path: &Path, text: &str) -> Outcome {
    fs::write(path, text).map_err(|e| Failure::File(format!("{}: {e}", path.display())))
}

fn read_tensor(path: &Path) -> Outcome<CoefficientTensor> {
    serde_json::from_str(&read_text(path)?)
        .map_err(|e| Failure::Usage(format!("{}: not a tensor file: {e}", path.display())))
}

fn to_json(value: &impl serde::Serialize) -> Outcome<String> {
    serde_json::to_string_pretty(value).map_err(|e| Failure::Usage(e.to_string()))
}

fn one_based(order: &[usize]) -> Outcome<Vec<usize>> {
    order
        .iter()
        .map(|&a| a.checked_sub(1).ok_or_else(|| Failure::Usage("axis indices are 1-based".into())))
        .collect()
}

fn run_exponents(args: &ExponentsArgs) -> Outcome {
    let spec = args.spec.config(args.m).to_spec()?;
    println!("{}", to_json(&admissibility_report(&spec)?)?);
    Ok(())
}

fn run_mixed_norm(args: &MixedNormArgs) -> Outcome {
    let t = read_tensor(&args.tensor)?;
    let order = match &args.order {
        Some(o) => one_based(&o.0)?,
        None => (0..args.q.0.len()).collect(),
    };
    let spec = MixedNormSpec::new(order, ExponentTuple::new(args.q.0.clone())?)?;
    println!("mixed_norm={:.12}", t.mixed_norm(&spec)?);
    Ok(())
}

fn print_estimate(est: &OpNormEstimate, json: bool) -> Outcome {
    if json {
        println!("{}", to_json(est)?);
    } else {
        let flag = if est.exact { "exact" } else { "lower bound" };
        println!("opnorm={:.12} ({flag}, {})", est.value, est.method);
    }
    Ok(())
}

fn run_opnorm(args: &OpnormArgs, budget: u128) -> Outcome {
    let t = read_tensor(&args.tensor)?;
    let ascent = args.ascent.options();
    let p = &args.p.0;
    let est = match args.method {
        MethodArg::Auto => opnorm_auto(&t, p, &OpNormOptions { ascent, budget })?,
        MethodArg::Ascent => opnorm_ascent(&t, p, &ascent)?,
        MethodArg::Exact => {
            if t.rank() != p.len() {
                return Err(mixnorm::Error::RankMismatch { expected: t.rank(), actual: p.len() }.into());
            }
            if !p.iter().all(ExtExp::is_infinite) {
                return Err(Failure::Usage("exact enumeration needs p = inf in every slot".into()));
            }
            opnorm_exact_signs(&t, budget)?
        }
        MethodArg::Closed => {
            let c = diagonal_coefficients(&t)
                .ok_or_else(|| Failure::Usage("closed form needs a diagonal tensor".into()))?;
            if t.rank() != p.len() {
                return Err(mixnorm::Error::RankMismatch { expected: t.rank(), actual: p.len() }.into());
            }
            match t.real_entries() {
                Some(_) => opnorm_diagonal_closed_form(&c.iter().map(|z| z.re).collect::<Vec<_>>(), p)?,
                None => opnorm_diagonal_closed_form(&c, p)?,
            }
        }
    };
    print_estimate(&est, args.json)
}

/// Accepts q with or without the trailing inner exponent.
fn split_q(q: &[ExtExp], m: usize, inner: ExtExp) -> Outcome<ExponentTuple> {
    if q.len() == m {
        if q[m - 1] != inner {
            return Err(Failure::Usage(format!(
                "the last exponent of a length-{m} q must be the inner exponent {inner}, got {}",
                q[m - 1]
            )));
        }
        return Ok(ExponentTuple::new(q[..m - 1].to_vec())?);
    }
    Ok(ExponentTuple::new(q.to_vec())?)
}

fn run_verify(args: &VerifyArgs, budget: u128) -> Outcome {
    let m = args.spec.p.0.len();
    if m < 2 {
        return Err(Failure::Usage("verify needs at least two space exponents".into()));
    }
    let spec = args.spec.config(m).to_spec()?;
    let inner = mixnorm::exponents::conjugate(spec.p_in_order()[m - 1])?;
    let q = split_q(&args.q.0, m, inner)?;

    let mut instances = Vec::new();
    if let Some(kind) = args.family {
        let mut family = FamilyDescriptor::new(kind.into(), m);
        family.pins = args.pins;
        let n = match (args.n, args.k, kind) {
            (Some(n), _, _) => n,
            (None, Some(k), FamilyArg::Hadamard) => 1usize
                .checked_shl(k)
                .filter(|_| k < usize::BITS)
                .ok_or_else(|| Failure::Usage(format!("k = {k} is too large")))?,
            _ => return Err(Failure::Usage("the family needs --n (or --k for hadamard)".into())),
        };
        let count = if family.is_random() { args.count.max(1) } else { 1 };
        for i in 0..count {
            match family.instance(n, args.family_seed + i, spec.p())? {
                Instance::Scalar(t) => instances.push(t),
                Instance::Vector(_) => unreachable!("no codomain set"),
            }
        }
    }
    for path in &args.tensor {
        instances.push(read_tensor(path)?);
    }
    if instances.is_empty() {
        return Err(Failure::Usage("no instances: pass --family or --tensor".into()));
    }

    let opts = OpNormOptions { ascent: args.ascent.options(), budget };
    let report = verify_inequality(&spec, &q, &instances, &opts)?;
    if let Some(path) = &args.output {
        write_text(path, &verify_csv(&args.id, &report)?)?;
    }
    let all_exact = report.rows.iter().all(|r| r.opnorm_exact);
    println!(
        "ratio={:.12} instances={} admissible={} opnorm={} PASS",
        report.max_ratio,
        report.rows.len(),
        report.admissibility.admissible,
        if all_exact { "exact" } else { "lower-bound" },
    );
    Ok(())
}

fn probe_config(args: &ProbeArgs, budget: Option<u64>) -> Outcome<ExperimentConfig> {
    if let Some(path) = &args.config {
        let mut cfg: ExperimentConfig = serde_json::from_str(&read_text(path)?)
            .map_err(|e| Failure::Usage(format!("{}: bad config: {e}", path.display())))?;
        if let Some(b) = budget {
            cfg.budget = b;
        }
        if let Some(out) = &args.output {
            cfg.output = Some(out.display().to_string());
        }
        if let Some(f) = args.format {
            cfg.format = f.into();
        }
        return Ok(cfg);
    }
    let missing = |what: &str| Failure::Usage(format!("probe needs --config or --{what}"));
    let p = args.p.clone().ok_or_else(|| missing("p"))?.0;
    let m = args.m.unwrap_or(p.len());
    let kind: FamilyKind = args.family.ok_or_else(|| missing("family"))?.into();
    let mut family = FamilyDescriptor::new(kind, m);
    family.pins = args.pins;
    family.codomain_r = args.r;
    Ok(ExperimentConfig {
        experiment_id: args.id.clone(),
        spec: SpecConfig { m, p, sigma: args.sigma.as_ref().map(|s| s.0.clone()), field: args.field.into() },
        q: args.q.clone().ok_or_else(|| missing("q"))?.0,
        family,
        n_range: args.n_range.clone().ok_or_else(|| missing("n-range"))?.0,
        seeds: args.seeds.0.clone(),
        budget: budget.unwrap_or(DEFAULT_ENUMERATION_BUDGET as u64),
        ascent: args.ascent.options(),
        slope_threshold: args.slope_threshold,
        output: args.output.as_ref().map(|p| p.display().to_string()),
        format: args.format.map(Into::into).unwrap_or_default(),
    })
}

fn run_probe(args: &ProbeArgs, budget: Option<u64>) -> Outcome {
    let cfg = probe_config(args, budget)?;
    if let Some(path) = &args.emit_config {
        write_text(path, &to_json(&cfg)?)?;
    }
    let report = cfg.run_probe()?;
    for w in &report.warnings {
        log::warn!("{w}");
    }
    let body = match cfg.format {
        OutputFormat::Csv => growth_csv(&cfg.experiment_id, &report)?,
        OutputFormat::Json => to_json(&json!({ "config": cfg, "report": report }))? + "\n",
    };
    let summary = format!(
        "slope={:.6} r_squared={:.6} verdict={} rows={}",
        report.slope,
        report.r_squared,
        report.verdict,
        report.rows.len()
    );
    match &cfg.output {
        Some(out) => {
            let out = PathBuf::from(out);
            write_text(&out, &body)?;
            if cfg.format == OutputFormat::Csv {
                let mut echo = out.clone().into_os_string();
                echo.push(".config.json");
                write_text(Path::new(&echo), &to_json(&cfg)?)?;
            }
            println!("{summary}");
        }
        None => {
            print!("{body}");
            eprintln!("{summary}");
        }
    }
    Ok(())
}

fn run_search(args: &SearchArgs, budget: u128) -> Outcome {
    let report = search_constant(args.n, !args.no_symmetry, budget)?;
    if let Some(path) = &args.output {
        write_text(path, &to_json(&report)?)?;
    }
    println!("max_ratio={:.12}, classes={}", report.best_ratio, report.classes);
    Ok(())
}

fn run(cli: Cli) -> Outcome {
    let budget = cli.budget.map(u128::from).unwrap_or(DEFAULT_ENUMERATION_BUDGET);
    with_jobs(cli.jobs, || match &cli.command {
        Command::Exponents(a) => run_exponents(a),
        Command::MixedNorm(a) => run_mixed_norm(a),
        Command::Opnorm(a) => run_opnorm(a, budget),
        Command::Verify(a) => run_verify(a, budget),
        Command::Probe(a) => run_probe(a, cli.budget),
        Command::SearchConstant(a) => run_search(a, budget),
    })
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            if matches!(failure, Failure::Core(mixnorm::Error::HardAssertion(_))) {
                println!("FAIL");
            }
            eprintln!("error: {failure}");
            ExitCode::from(failure.code())
        }
    }
}
