use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use dgslab::audit::Audit;
use dgslab::lattice_file::{load_lattice, LatticeFile, NamedLattice};
use dgslab::parallel::prepare_rng;
use dgslab::report::{closeness_csv, pairs_csv, CountReport};
use dgslab::sampling::{CountMethod, Mode, SampleJob};
use dgslab::suites::{run_suite, Suite, SuiteConfig};
use dgslab::{corpus, CliError, CliResult};
use dgslab_core::counting::{estimate_count, estimate_primitive_count, CountingParams};
use dgslab_core::lattice::{parse_rational, RationalVector};
use dgslab_core::oracles::{exact_count, exact_primitive_count, set_dim_cap, AuditedOracle, ExactOracle};
use dgslab_core::Rational;

#[derive(Parser)]
#[command(name = "dgslab", version, about = "Discrete Gaussian sampling from exact CVP/SVP oracles")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw samples, one rational vector per line.
    Sample(SampleArgs),
    /// Count lattice points (or primitive vectors) in a ball.
    Count(CountArgs),
    /// Run a verification suite and write a JSON report.
    Verify(VerifyArgs),
    /// Point-vs-frequency CSV from a samples file.
    Histogram(HistogramArgs),
    /// Radius-vs-count CSV of exact ball counts.
    Radial(RadialArgs),
    /// Write the built-in lattice corpus as JSON files.
    Corpus {
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Dgs,
    Cdgs,
    Lq,
}

#[derive(Clone, Copy, ValueEnum)]
enum CountMethodArg {
    Exact,
    Sparsification,
}

#[derive(Args)]
struct CountingFlags {
    /// Smaller sparsification constants (still correct, fewer oracle calls).
    #[arg(long)]
    fast_count: bool,
    /// Refuse a decision needing more oracle calls than this.
    #[arg(long, default_value_t = 100_000_000)]
    max_trials: u64,
}

impl CountingFlags {
    fn params(&self) -> CountingParams {
        let mut p = if self.fast_count { CountingParams::fast() } else { CountingParams::faithful() };
        p.max_trials = self.max_trials;
        p
    }
}

#[derive(Args)]
struct SampleArgs {
    /// Lattice JSON file, or the name of a corpus entry.
    #[arg(long)]
    lattice: String,
    #[arg(long, value_enum)]
    mode: ModeArg,
    /// Gaussian width, rational (e.g. `5/2`).
    #[arg(long)]
    s: String,
    /// Accuracy parameter; the output is within 1 + 1/f of the target.
    #[arg(long, default_value_t = 10)]
    f: u64,
    #[arg(long)]
    n_samples: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Norm exponent for `--mode lq`.
    #[arg(long, default_value_t = 1.0)]
    q: f64,
    /// How the sampler's radial weights are counted.
    #[arg(long, value_enum, default_value_t = CountMethodArg::Exact)]
    count_method: CountMethodArg,
    #[command(flatten)]
    counting: CountingFlags,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct CountArgs {
    #[arg(long)]
    lattice: String,
    #[arg(long, conflicts_with = "radius_sq")]
    radius: Option<String>,
    #[arg(long)]
    radius_sq: Option<String>,
    #[arg(long, default_value_t = 10)]
    f: u64,
    /// Count primitive vectors of the centered lattice, up to sign.
    #[arg(long)]
    primitive: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Enumerate instead of estimating.
    #[arg(long)]
    exact: bool,
    #[command(flatten)]
    counting: CountingFlags,
}

#[derive(Args)]
struct VerifyArgs {
    /// sparsifier, counting, dgs, cdgs, reductions, lq or all.
    #[arg(long)]
    suite: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 100_000)]
    samples: u64,
    #[arg(long)]
    report: PathBuf,
    /// Per-point closeness tables.
    #[arg(long)]
    csv: Option<PathBuf>,
    #[arg(long, hide = true)]
    tamper: bool,
}

#[derive(Args)]
struct HistogramArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct RadialArgs {
    #[arg(long)]
    lattice: String,
    #[arg(long)]
    max_radius_sq: String,
    #[arg(long, default_value_t = 20)]
    steps: u64,
    #[arg(long)]
    primitive: bool,
    #[arg(long)]
    out: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("dgslab: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(cli: Cli) -> CliResult<ExitCode> {
    if let Ok(cap) = std::env::var("DGSLAB_DIM_CAP") {
        let cap: usize = cap.parse().map_err(|_| CliError::Config(format!("DGSLAB_DIM_CAP={cap} is not a number")))?;
        set_dim_cap(cap);
    }
    match cli.command {
        Command::Sample(a) => sample(a),
        Command::Count(a) => count(a),
        Command::Verify(a) => verify(a),
        Command::Histogram(a) => histogram(a),
        Command::Radial(a) => radial(a),
        Command::Corpus { out } => export_corpus(&out),
    }
}

fn lattice(arg: &str) -> CliResult<NamedLattice> {
    let path = Path::new(arg);
    if !path.exists() {
        if let Some(name) = corpus::names().find(|n| *n == arg.trim_end_matches(".json")) {
            return corpus::get(name);
        }
    }
    load_lattice(path)
}

fn rational(flag: &str, text: &str) -> CliResult<Rational> {
    parse_rational(text).map_err(|e| CliError::Config(format!("--{flag} {text}: {e}")))
}

fn write_file(path: &Path, text: &str) -> CliResult<()> {
    fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn sample(a: SampleArgs) -> CliResult<ExitCode> {
    let lat = lattice(&a.lattice)?;
    let s = rational("s", &a.s)?;
    let mode = match a.mode {
        ModeArg::Dgs => Mode::Dgs,
        ModeArg::Cdgs => {
            if lat.shifted {
                eprintln!("dgslab: cdgs samples the centered lattice; ignoring the shift");
            }
            Mode::Cdgs
        }
        ModeArg::Lq => Mode::Lq(a.q),
    };
    let method = match a.count_method {
        CountMethodArg::Exact => CountMethod::Exact,
        CountMethodArg::Sparsification => CountMethod::Sparsification(a.counting.params()),
    };
    let audit = Audit::new();
    let job = SampleJob::prepare(&lat.lattice, mode, &s, a.f, &method, a.seed, &audit)?;
    let draws = job.draw_vectors(a.n_samples, a.seed, &audit)?;
    let mut text = String::with_capacity(draws.len() * 16);
    for v in &draws {
        text.push_str(&v.to_key());
        text.push('\n');
    }
    write_file(&a.out, &text)?;
    let summary = audit.summary();
    eprintln!(
        "dgslab: {} samples, {} oracle calls, {} off-lattice calls, {} membership failures",
        summary.samples, summary.oracle_calls, summary.violations, summary.membership_failures
    );
    Ok(if summary.pass() { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}

fn count(a: CountArgs) -> CliResult<ExitCode> {
    let lat = lattice(&a.lattice)?;
    let radius_sq = match (&a.radius, &a.radius_sq) {
        (Some(r), None) => {
            let r = rational("radius", r)?;
            &r * &r
        }
        (None, Some(r2)) => rational("radius-sq", r2)?,
        _ => return Err(CliError::Config("give one of --radius or --radius-sq".into())),
    };
    let report = if a.exact {
        let value = if a.primitive {
            exact_primitive_count(lat.basis(), &radius_sq)?
        } else {
            exact_count(&lat.lattice, &radius_sq)?
        };
        CountReport { estimate: value, lower_factor: 1.0, method: "exact".into() }
    } else {
        let params = a.counting.params();
        let rng = &mut prepare_rng(a.seed);
        let est = if a.primitive {
            let centered = dgslab_core::lattice::ShiftedLattice::centered(lat.basis().clone());
            let mut oracle = AuditedOracle::new(ExactOracle::default(), &centered)?;
            estimate_primitive_count(lat.basis(), &radius_sq, a.f as f64, &params, &mut oracle, rng)?
        } else {
            let mut oracle = AuditedOracle::new(ExactOracle::default(), &lat.lattice)?;
            estimate_count(&lat.lattice, &radius_sq, a.f as f64, &params, &mut oracle, rng)?
        };
        let method = if a.counting.fast_count { "sparsification-fast" } else { "sparsification" };
        CountReport { estimate: est.value, lower_factor: est.lower_factor, method: method.into() }
    };
    println!("{}", serde_json::to_string(&report).map_err(|e| CliError::Io(e.to_string()))?);
    Ok(ExitCode::SUCCESS)
}

fn verify(a: VerifyArgs) -> CliResult<ExitCode> {
    let suite = Suite::parse(&a.suite)?;
    let mut cfg = SuiteConfig::new(a.seed, a.samples);
    cfg.tamper = a.tamper;
    let report = run_suite(suite, &cfg, |c| {
        println!("{}", c.summary_line());
        let _ = std::io::stdout().flush();
    })?;
    report.write_json(&a.report)?;
    if let Some(path) = &a.csv {
        let records: Vec<_> = report.criteria.iter().flat_map(|c| c.closeness.iter().cloned()).collect();
        write_file(path, &closeness_csv(&records)?)?;
    }
    Ok(if report.pass { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}

fn histogram(a: HistogramArgs) -> CliResult<ExitCode> {
    let text = fs::read_to_string(&a.input).map_err(|e| CliError::Io(format!("{}: {e}", a.input.display())))?;
    let mut counts = std::collections::BTreeMap::<RationalVector, u64>::new();
    for (i, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let v = RationalVector::parse_key(line.trim())
            .map_err(|e| CliError::Config(format!("{}:{}: {e}", a.input.display(), i + 1)))?;
        *counts.entry(v).or_default() += 1;
    }
    let rows = counts.iter().map(|(v, c)| (v.to_key(), c));
    write_file(&a.out, &pairs_csv(["point", "count"], rows)?)?;
    Ok(ExitCode::SUCCESS)
}

fn radial(a: RadialArgs) -> CliResult<ExitCode> {
    let lat = lattice(&a.lattice)?;
    let max = rational("max-radius-sq", &a.max_radius_sq)?;
    let steps = a.steps.max(1);
    let mut rows = Vec::with_capacity(steps as usize);
    for k in 1..=steps {
        let r2 = &max * &dgslab_core::lattice::rat(k as i64, steps as i64);
        let n = if a.primitive { exact_primitive_count(lat.basis(), &r2)? } else { exact_count(&lat.lattice, &r2)? };
        rows.push((dgslab_core::lattice::format_rational(&r2), n));
    }
    write_file(&a.out, &pairs_csv(["radius_sq", "count"], rows)?)?;
    Ok(ExitCode::SUCCESS)
}

fn export_corpus(dir: &Path) -> CliResult<ExitCode> {
    fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    for name in corpus::names() {
        let lat = corpus::get(name)?;
        LatticeFile::from_lattice(name, &lat.lattice).save(&dir.join(format!("{name}.json")))?;
    }
    Ok(ExitCode::SUCCESS)
}
