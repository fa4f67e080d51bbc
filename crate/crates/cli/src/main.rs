use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use sampram::calculus::{self, PrivacySpec};
use sampram::data::{self, IngestSpec, MissingPolicy, Shape, SyntheticSpec};
use sampram::domain::Database;
use sampram::experiments::{self, DatasetRef, ExperimentPlan, MGrid};
use sampram::oracle;
use sampram::{seed, Error, Result};

#[derive(Parser)]
#[command(
    name = "sampram",
    version,
    about = "Sampling + PRAM release of joint types"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Monte-Carlo error sweep over (epsilon, m), written as CSV.
    Sweep(SweepArgs),
    /// Errors at m* and at m*/8, 8 m*.
    Optimal(OptimalArgs),
    /// Privacy level, channel parameter, condition number, error bound and m*.
    Calc(CalcArgs),
    /// Exhaustive worst-case likelihood ratios on tiny instances.
    VerifyPrivacy(VerifyArgs),
    /// Quantize the Adult files and dump `x_index,y_index` rows.
    Ingest(IngestArgs),
}

#[derive(Args)]
struct DatasetArgs {
    /// Adult directory or file, or one of uniform, linear, peaky.
    #[arg(long)]
    dataset: String,
    /// Rows to generate (synthetic) or expect (Adult).
    #[arg(long)]
    n: Option<usize>,
    /// Joint cardinality to generate (synthetic) or expect (Adult).
    #[arg(long)]
    d: Option<usize>,
    /// Seed for synthetic generation; defaults to the run seed.
    #[arg(long, value_parser = parse_seed)]
    data_seed: Option<u64>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    dataset: DatasetArgs,
    #[arg(long, value_delimiter = ',', default_values_t = [0.1, 0.5, 1.0])]
    eps: Vec<f64>,
    /// `auto` or a comma-separated list; `m*` stands for the optimum.
    #[arg(long, default_value = "auto")]
    m: String,
    #[arg(long, default_value_t = experiments::DEFAULT_TRIALS)]
    trials: usize,
    #[arg(long, default_value = "0", value_parser = parse_seed)]
    seed: u64,
    /// Output CSV; stdout if omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct OptimalArgs {
    #[command(flatten)]
    dataset: DatasetArgs,
    #[arg(long, value_delimiter = ',', default_values_t = [0.1, 0.5, 1.0])]
    eps: Vec<f64>,
    #[arg(long, default_value_t = experiments::DEFAULT_TRIALS)]
    trials: usize,
    #[arg(long, default_value = "0", value_parser = parse_seed)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Format::Table)]
    format: Format,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Table,
    Json,
}

#[derive(Args)]
struct CalcArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    d: usize,
    /// Target privacy levels. Ignored when --gamma is given.
    #[arg(long, value_delimiter = ',', default_values_t = [0.1, 0.5, 1.0])]
    eps: Vec<f64>,
    /// Sample count; defaults to m* for each epsilon.
    #[arg(long)]
    m: Option<usize>,
    /// Channel parameter; requires --m and derives epsilon from it.
    #[arg(long, requires = "m")]
    gamma: Option<f64>,
    #[arg(long, value_enum, default_value_t = Format::Table)]
    format: Format,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, value_delimiter = ',', default_values_t = [2, 3, 4])]
    n: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_values_t = [1.5, 3.0, 10.0])]
    gamma: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_values_t = [2, 3, 4])]
    d: Vec<usize>,
    #[arg(long, value_enum, default_value_t = Format::Table)]
    format: Format,
}

#[derive(Args)]
struct IngestArgs {
    /// Adult directory or file.
    #[arg(long)]
    dataset: PathBuf,
    /// JSON ingest config replacing the default quantization.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Keep rows whose missing values are all in unused columns.
    #[arg(long)]
    used_fields_only: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_seed(s: &str) -> std::result::Result<u64, String> {
    seed::parse_seed(s).map_err(|e| e.to_string())
}

fn adult_spec(path: &PathBuf) -> IngestSpec {
    if path.is_dir() {
        IngestSpec::adult_dir(path)
    } else {
        IngestSpec::adult(vec![path.clone()])
    }
}

fn load(args: &DatasetArgs, run_seed: u64) -> Result<Database> {
    let dataset = match args.dataset.parse::<Shape>() {
        Ok(shape) => DatasetRef::Synthetic(SyntheticSpec::new(
            shape,
            args.n.unwrap_or(45222),
            args.d.unwrap_or(24),
            args.data_seed.unwrap_or(run_seed),
        )),
        Err(_) => DatasetRef::Adult(PathBuf::from(&args.dataset)),
    };
    let db = dataset.load()?;
    let d = db.alphabet().joint_card();
    if args.n.is_some_and(|n| n != db.len()) || args.d.is_some_and(|x| x != d) {
        return Err(Error::Parameter(format!(
            "{} has n = {}, d = {d}; --n/--d disagree",
            dataset.name(),
            db.len()
        )));
    }
    log::info!("loaded {}: n = {}, d = {d}", dataset.name(), db.len());
    Ok(db)
}

fn output(path: Option<&PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn sweep(args: SweepArgs) -> Result<()> {
    let db = load(&args.dataset, args.seed)?;
    let plan = ExperimentPlan::new(args.eps, args.m.parse::<MGrid>()?, args.trials, args.seed);
    let table = experiments::run_sweep(&db, &plan)?;
    let flagged = table.rows.iter().filter(|r| r.flagged).count();
    if flagged > 0 {
        log::warn!("{flagged} point(s) have stderr above a tenth of the mean");
    }
    table.write_csv(output(args.out.as_ref())?)
}

#[derive(Serialize)]
struct OptimalRecord {
    epsilon: f64,
    m_star: f64,
    m: [Option<usize>; 3],
    mean_l2: [Option<f64>; 3],
    stderr_l2: [Option<f64>; 3],
    bound: f64,
    flank_margin_sigmas: Option<f64>,
}

fn optimal(args: OptimalArgs) -> Result<()> {
    let db = load(&args.dataset, args.seed)?;
    let points = experiments::run_optimal_point(&db, &args.eps, args.trials, args.seed)?;
    let records: Vec<OptimalRecord> = points
        .iter()
        .map(|p| {
            let rows = [p.low.as_ref(), Some(&p.center), p.high.as_ref()];
            OptimalRecord {
                epsilon: p.epsilon,
                m_star: p.m_star.real,
                m: rows.map(|r| r.map(|r| r.m)),
                mean_l2: rows.map(|r| r.map(|r| r.mean_l2)),
                stderr_l2: rows.map(|r| r.map(|r| r.stderr_l2)),
                bound: p.center.bound,
                flank_margin_sigmas: p.flank_margin_sigmas(),
            }
        })
        .collect();
    let mut out = io::stdout().lock();
    match args.format {
        Format::Json => writeln!(
            out,
            "{}",
            serde_json::to_string_pretty(&records).map_err(json_err)?
        )?,
        Format::Table => {
            let cell = |x: Option<f64>| x.map_or("-".to_string(), |v| format!("{v:.5}"));
            writeln!(
                out,
                "{:>8} {:>10} {:>10} {:>10} {:>10} {:>10} {:>8}",
                "epsilon", "m*", "err(m*/8)", "err(m*)", "err(8m*)", "bound", "margin"
            )?;
            for r in &records {
                writeln!(
                    out,
                    "{:>8} {:>10.1} {:>10} {:>10} {:>10} {:>10.5} {:>8}",
                    r.epsilon,
                    r.m_star,
                    cell(r.mean_l2[0]),
                    cell(r.mean_l2[1]),
                    cell(r.mean_l2[2]),
                    r.bound,
                    r.flank_margin_sigmas
                        .map_or("-".into(), |s| format!("{s:.1}σ")),
                )?;
            }
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct CalcRecord {
    n: usize,
    d: usize,
    epsilon: f64,
    m: usize,
    gamma: f64,
    c: f64,
    bound: f64,
    tight_bound: f64,
    m_star: f64,
    m_star_rounded: usize,
}

fn calc_record(spec: PrivacySpec) -> Result<CalcRecord> {
    let star = calculus::optimal_m(spec.n, spec.epsilon, spec.d)?;
    Ok(CalcRecord {
        n: spec.n,
        d: spec.d,
        epsilon: spec.epsilon,
        m: spec.m,
        gamma: spec.gamma,
        c: spec.condition_number(),
        bound: spec.utility_bound(),
        tight_bound: spec.tight_bound(),
        m_star: star.real,
        m_star_rounded: star.rounded,
    })
}

fn calc(args: CalcArgs) -> Result<()> {
    let records = match (args.gamma, args.m) {
        (Some(g), Some(m)) => vec![calc_record(PrivacySpec::from_gamma(args.n, m, g, args.d)?)?],
        _ => args
            .eps
            .iter()
            .map(|&eps| {
                let m = match args.m {
                    Some(m) => m,
                    None => calculus::optimal_m(args.n, eps, args.d)?.rounded,
                };
                calc_record(PrivacySpec::from_epsilon(args.n, m, eps, args.d)?)
            })
            .collect::<Result<Vec<_>>>()?,
    };
    let mut out = io::stdout().lock();
    match args.format {
        Format::Json => {
            for r in &records {
                writeln!(out, "{}", serde_json::to_string(r).map_err(json_err)?)?;
            }
        }
        Format::Table => {
            writeln!(
                out,
                "{:>8} {:>8} {:>12} {:>10} {:>10} {:>10} {:>10}",
                "epsilon", "m", "gamma", "c", "bound", "tight", "m*"
            )?;
            for r in &records {
                writeln!(
                    out,
                    "{:>8.4} {:>8} {:>12.4} {:>10.4} {:>10.5} {:>10.5} {:>10.1}",
                    r.epsilon, r.m, r.gamma, r.c, r.bound, r.tight_bound, r.m_star
                )?;
            }
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct VerifyRecord {
    n: usize,
    m: usize,
    d: usize,
    gamma: f64,
    bound: f64,
    max_ratio: f64,
    within_bound: bool,
    attains_bound: bool,
    tightness_ratio: f64,
}

fn verify(args: VerifyArgs) -> Result<bool> {
    let mut out = io::stdout().lock();
    if matches!(args.format, Format::Table) {
        writeln!(
            out,
            "{:>3} {:>3} {:>3} {:>6} {:>12} {:>12} {:>12}  status",
            "n", "m", "d", "gamma", "bound", "max ratio", "tight ex."
        )?;
    }
    let mut all_ok = true;
    for &n in &args.n {
        for m in 1..=n {
            for &gamma in &args.gamma {
                for &d in &args.d {
                    let wc = oracle::worst_case_ratio(n, m, gamma, d)?;
                    let tight = oracle::tightness_example(n, m, gamma, d)?;
                    let r = VerifyRecord {
                        n,
                        m,
                        d,
                        gamma,
                        bound: wc.bound_f64(),
                        max_ratio: wc.ratio_f64(),
                        within_bound: wc.within_bound(),
                        attains_bound: wc.attains_bound(),
                        tightness_ratio: tight.as_f64(),
                    };
                    all_ok &= r.within_bound;
                    match args.format {
                        Format::Json => {
                            writeln!(out, "{}", serde_json::to_string(&r).map_err(json_err)?)?
                        }
                        Format::Table => writeln!(
                            out,
                            "{:>3} {:>3} {:>3} {:>6} {:>12.9} {:>12.9} {:>12.9}  {}",
                            n,
                            m,
                            d,
                            gamma,
                            r.bound,
                            r.max_ratio,
                            r.tightness_ratio,
                            match (r.within_bound, r.attains_bound) {
                                (true, true) => "tight",
                                (true, false) => "ok",
                                _ => "VIOLATED",
                            }
                        )?,
                    }
                }
            }
        }
    }
    Ok(all_ok)
}

fn ingest(args: IngestArgs) -> Result<()> {
    let mut spec = match &args.config {
        Some(p) => {
            let mut s: IngestSpec = serde_json::from_reader(File::open(p)?).map_err(json_err)?;
            if s.paths.is_empty() {
                s.paths = adult_spec(&args.dataset).paths;
            }
            s
        }
        None => adult_spec(&args.dataset),
    };
    if args.used_fields_only {
        spec.missing = MissingPolicy::UsedFields;
    }
    let report = data::ingest_adult(&spec)?;
    let db = &report.database;
    eprintln!(
        "rows kept: {}  dropped (missing): {}  malformed: {}  |X| = {}  |Y| = {}",
        db.len(),
        report.dropped_missing,
        report.skipped_malformed,
        db.alphabet().x_card(),
        db.alphabet().y_card()
    );
    if let Some(p) = &args.out {
        data::write_normalized_csv(db, BufWriter::new(File::create(p)?))?;
    }
    Ok(())
}

fn json_err(e: serde_json::Error) -> Error {
    Error::Parameter(format!("json: {e}"))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let result = match Cli::parse().command {
        Command::Sweep(a) => sweep(a),
        Command::Optimal(a) => optimal(a),
        Command::Calc(a) => calc(a),
        Command::VerifyPrivacy(a) => verify(a).and_then(|ok| {
            if ok {
                Ok(())
            } else {
                Err(Error::Protocol(
                    "a worst-case ratio exceeds its bound".into(),
                ))
            }
        }),
        Command::Ingest(a) => ingest(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
