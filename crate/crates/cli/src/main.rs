//! `nnct` command line: run NNCT segregation/association tests on point
//! data, reproduce the size/power simulation tables, compute L-function
//! envelopes, and emit patterns from the built-in generators.

mod output;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};

use nnct::error::Error;
use nnct::inference::{p_asymptotic, p_montecarlo, p_randomization, Alternative, TestReport};
use nnct::moments::qr_adjust;
use nnct::nngraph::NnDigraph;
use nnct::pattern::{
    gen_association, gen_csr, gen_segregation, read_pattern_named, write_pattern, AssocParams,
    Class, NamedPattern, Region, SegParams,
};
use nnct::second_order::{default_t_grid, envelope, grid_limit, EnvelopeTarget};
use nnct::sim::{empirical_power, empirical_size, AltFamily, PowerConfig, SizeConfig};
use nnct::stats::{compute_stat, StatName};
use nnct::table::Nnct;

#[derive(Parser)]
#[command(
    name = "nnct",
    about = "Nearest-neighbor contingency table tests of spatial segregation and association",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the NNCT test battery on a pattern file.
    Test(TestArgs),
    /// Reproduce empirical size or power tables under seeded Monte Carlo.
    #[command(subcommand)]
    Simulate(SimulateCmd),
    /// L-function estimate with pointwise Monte Carlo envelope.
    Envelope(EnvelopeArgs),
    /// Emit a pattern from one of the built-in generators as CSV.
    Generate(GenerateArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Csv,
    Json,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Engine {
    Asy,
    Mc,
    Rand,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum GenFamily {
    Csr,
    Seg,
    Assoc,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PowerFamily {
    Seg,
    Assoc,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Curve {
    #[value(name = "uni-all")]
    UniAll,
    #[value(name = "uni-1")]
    Uni1,
    #[value(name = "uni-2")]
    Uni2,
    Bi,
}

// Comma-separated list arguments parse into these wrappers so clap treats
// each flag as one value.
#[derive(Clone)]
struct StatList(Vec<StatName>);

#[derive(Clone)]
struct AltList(Vec<Alternative>);

#[derive(Clone)]
struct EngineList(Vec<Engine>);

#[derive(Args)]
struct TestArgs {
    /// CSV input with columns x,y,label (header optional).
    #[arg(long)]
    input: PathBuf,
    /// Study region as xmin,ymin,xmax,ymax; defaults to the bounding box.
    #[arg(long, value_parser = parse_region)]
    region: Option<Region>,
    /// Statistics to report (comma-separated codes, or "all").
    #[arg(long, default_value = "all", value_parser = parse_stats)]
    stats: StatList,
    /// Alternatives: any of two, seg, assoc.
    #[arg(long, default_value = "two,seg,assoc", value_parser = parse_alts)]
    alt: AltList,
    /// p-value engines: any of asy, mc, rand.
    #[arg(long, default_value = "asy", value_parser = parse_engines)]
    engines: EngineList,
    /// Replicates for the mc and rand engines.
    #[arg(long, default_value_t = 10_000)]
    nmc: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Replace the observed Q and R with the CSR stand-ins 0.63n and 0.62n.
    #[arg(long)]
    qr_adjusted: bool,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Output path (defaults to stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum SimulateCmd {
    /// Empirical size (rejection rate under CSR independence).
    Size(SimArgs),
    /// Empirical power under a segregation or association family.
    Power(PowerArgs),
}

#[derive(Args)]
struct SimArgs {
    /// Sample-size pair, e.g. --pairs 50,50 (repeatable).
    #[arg(long, required = true, value_parser = parse_pair)]
    pairs: Vec<(usize, usize)>,
    #[arg(long, default_value_t = 1000)]
    nmc: usize,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    #[arg(long, default_value = "default", value_parser = parse_stats)]
    stats: StatList,
    #[arg(long, default_value = "two", value_parser = parse_alts)]
    alt: AltList,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Output path; with several alternatives, one file per alternative is
    /// written with the alternative code inserted before the extension.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PowerArgs {
    #[command(flatten)]
    sim: SimArgs,
    /// Alternative family.
    #[arg(long, value_enum)]
    family: PowerFamily,
    /// Segregation strengths s in (0,1), comma-separated.
    #[arg(long, value_delimiter = ',')]
    s: Vec<f64>,
    /// Association radii r in (0,1), comma-separated.
    #[arg(long, value_delimiter = ',')]
    r: Vec<f64>,
}

#[derive(Args)]
struct EnvelopeArgs {
    #[arg(long)]
    input: PathBuf,
    /// Curve to wrap in the envelope.
    #[arg(long, value_enum, default_value_t = Curve::Bi)]
    which: Curve,
    #[arg(long, default_value_t = 99)]
    nsim: usize,
    #[arg(long, default_value_t = 64)]
    grid_points: usize,
    /// Largest distance; defaults to a quarter of the shorter region side.
    #[arg(long)]
    tmax: Option<f64>,
    #[arg(long, value_parser = parse_region)]
    region: Option<Region>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GenerateArgs {
    /// Generator family.
    #[arg(value_enum)]
    family: GenFamily,
    #[arg(long)]
    n1: usize,
    #[arg(long)]
    n2: usize,
    /// Segregation strength (seg only).
    #[arg(long)]
    s: Option<f64>,
    /// Association radius (assoc only).
    #[arg(long)]
    r: Option<f64>,
    /// Region for csr; defaults to the unit square.
    #[arg(long, value_parser = parse_region)]
    region: Option<Region>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_region(s: &str) -> Result<Region, String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 4 {
        return Err("expected xmin,ymin,xmax,ymax".into());
    }
    let mut vals = [0.0; 4];
    for (v, p) in vals.iter_mut().zip(&parts) {
        *v = p.trim().parse::<f64>().map_err(|e| e.to_string())?;
    }
    Region::new(vals[0], vals[1], vals[2], vals[3]).map_err(|e| e.to_string())
}

fn parse_pair(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s.split_once(',').ok_or("expected n1,n2")?;
    let n1 = a.trim().parse::<usize>().map_err(|e| e.to_string())?;
    let n2 = b.trim().parse::<usize>().map_err(|e| e.to_string())?;
    Ok((n1, n2))
}

fn parse_stats(s: &str) -> Result<StatList, String> {
    let list = match s {
        "all" => StatName::ALL.to_vec(),
        "default" => nnct::sim::default_statistics(),
        list => list
            .split(',')
            .map(|item| item.trim().parse())
            .collect::<Result<_, _>>()?,
    };
    Ok(StatList(list))
}

fn parse_alts(s: &str) -> Result<AltList, String> {
    s.split(',')
        .map(|item| item.trim().parse())
        .collect::<Result<_, _>>()
        .map(AltList)
}

fn parse_engines(s: &str) -> Result<EngineList, String> {
    s.split(',')
        .map(|item| match item.trim().to_ascii_lowercase().as_str() {
            "asy" => Ok(Engine::Asy),
            "mc" => Ok(Engine::Mc),
            "rand" => Ok(Engine::Rand),
            other => Err(format!("unknown engine {other:?} (expected asy|mc|rand)")),
        })
        .collect::<Result<_, _>>()
        .map(EngineList)
}

fn main() -> ExitCode {
    if let Ok(threads) = std::env::var("NNCT_THREADS") {
        if let Ok(threads) = threads.trim().parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build_global();
        }
    }
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Test(args) => cmd_test(args),
        Command::Simulate(SimulateCmd::Size(args)) => cmd_simulate_size(args),
        Command::Simulate(SimulateCmd::Power(args)) => cmd_simulate_power(args),
        Command::Envelope(args) => cmd_envelope(args),
        Command::Generate(args) => cmd_generate(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code(&err))
        }
    }
}

/// 1 = usage, 2 = I/O or data, 3 = internal numeric.
fn exit_code(err: &Error) -> u8 {
    match err {
        Error::ParamRange { .. }
        | Error::BadRegion
        | Error::EmptyConfig(_)
        | Error::TooFewSims { .. }
        | Error::BadGrid
        | Error::GridBound { .. }
        | Error::OneSidedUndefined(_) => 1,
        Error::Io(_)
        | Error::Parse { .. }
        | Error::EmptyInput
        | Error::PointOutsideRegion { .. }
        | Error::LengthMismatch { .. }
        | Error::EmptyClass(_)
        | Error::EmptyColumn(_)
        | Error::TooFewPoints { .. } => 2,
        Error::DegenerateVariance(_)
        | Error::NegativeVariance(_)
        | Error::InDegreeOverflow(_)
        | Error::InsufficientReplicates(_) => 3,
    }
}

fn write_out(out: Option<&PathBuf>, content: &str) -> Result<(), Error> {
    match out {
        Some(path) => std::fs::write(path, content).map_err(Error::from),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(content.as_bytes()).map_err(Error::from)
        }
    }
}

fn load_pattern(
    input: &Path,
    region: Option<Region>,
    warn_default_region: bool,
) -> Result<NamedPattern, Error> {
    let named = read_pattern_named(input, region).map_err(|err| match err {
        Error::Io(io) => Error::Io(std::io::Error::new(
            io.kind(),
            format!("{}: {io}", input.display()),
        )),
        Error::Parse { line, msg } => Error::Parse {
            line,
            msg: format!("{}: {msg}", input.display()),
        },
        other => other,
    })?;
    if region.is_none() && warn_default_region {
        eprintln!(
            "note: region defaulted to the bounding box of the points; \
             Monte Carlo p-values under CSR depend on this choice (pass --region to override)"
        );
    }
    Ok(named)
}

fn cmd_test(args: TestArgs) -> Result<(), Error> {
    let named = load_pattern(&args.input, args.region, true)?;
    let pattern = &named.pattern;
    pattern.require_both_classes()?;
    let graph = NnDigraph::build(pattern)?;
    let table = Nnct::from_pattern(pattern, &graph)?;
    let (q_obs, r_obs) = (graph.q() as f64, graph.r() as f64);
    let (q, r) = if args.qr_adjusted {
        qr_adjust(table.n())
    } else {
        (q_obs, r_obs)
    };

    let mut reports = Vec::new();
    for &stat in &args.stats.0 {
        let value = match compute_stat(stat, &table, q, r) {
            Ok(v) => v,
            Err(err) => {
                reports.push(output::StatOutcome::degenerate(stat, err.to_string()));
                continue;
            }
        };
        let mut per_alt = Vec::new();
        for &alt in &args.alt.0 {
            let mut report = TestReport {
                name: stat,
                value,
                alternative: alt,
                p_asy: None,
                p_mc: None,
                p_rand: None,
                n_replicates: args.nmc,
                seed: args.seed,
            };
            for &engine in &args.engines.0 {
                match engine {
                    Engine::Asy => report.p_asy = p_asymptotic(value, stat, alt).ok(),
                    Engine::Mc => {
                        report.p_mc = p_montecarlo(pattern, stat, alt, args.nmc, args.seed).ok()
                    }
                    Engine::Rand => {
                        report.p_rand =
                            p_randomization(pattern, stat, alt, args.nmc, args.seed).ok()
                    }
                }
            }
            per_alt.push(report);
        }
        reports.push(output::StatOutcome::computed(stat, value, per_alt));
    }

    let engines = output::EngineSet {
        asy: args.engines.0.contains(&Engine::Asy),
        mc: args.engines.0.contains(&Engine::Mc),
        rand: args.engines.0.contains(&Engine::Rand),
    };
    let summary = output::TestSummary {
        class_names: named.class_names.clone(),
        table,
        q: q_obs as u64,
        r: r_obs as u64,
        qr_adjusted: args.qr_adjusted,
        q_used: q,
        r_used: r,
        alternatives: args.alt.0.clone(),
        engines,
        outcomes: reports,
    };
    let content = match args.format {
        Format::Text => summary.render_text(),
        Format::Csv => summary.render_csv(),
        Format::Json => summary.render_json()?,
    };
    write_out(args.out.as_ref(), &content)
}

fn size_config(args: &SimArgs) -> SizeConfig {
    SizeConfig {
        pairs: args.pairs.clone(),
        n_mc: args.nmc,
        alpha: args.alpha,
        alternatives: args.alt.0.clone(),
        statistics: args.stats.0.clone(),
        master_seed: args.seed,
    }
}

fn cmd_simulate_size(args: SimArgs) -> Result<(), Error> {
    let table = empirical_size(&size_config(&args))?;
    output::write_rate_table(&table, &args.alt.0, args.format_kind(), args.out.as_ref())
}

fn cmd_simulate_power(args: PowerArgs) -> Result<(), Error> {
    let family = match args.family {
        PowerFamily::Seg => {
            if args.s.is_empty() {
                return Err(Error::EmptyConfig("--s parameter list"));
            }
            AltFamily::Segregation(args.s.clone())
        }
        PowerFamily::Assoc => {
            if args.r.is_empty() {
                return Err(Error::EmptyConfig("--r parameter list"));
            }
            AltFamily::Association(args.r.clone())
        }
    };
    let cfg = PowerConfig {
        base: size_config(&args.sim),
        family,
    };
    let table = empirical_power(&cfg)?;
    output::write_rate_table(
        &table,
        &args.sim.alt.0,
        args.sim.format_kind(),
        args.sim.out.as_ref(),
    )
}

impl SimArgs {
    fn format_kind(&self) -> output::RateFormat {
        match self.format {
            Format::Text => output::RateFormat::Text,
            Format::Csv => output::RateFormat::Csv,
            Format::Json => output::RateFormat::Json,
        }
    }
}

fn cmd_envelope(args: EnvelopeArgs) -> Result<(), Error> {
    let named = load_pattern(&args.input, args.region, true)?;
    let pattern = &named.pattern;
    let target = match args.which {
        Curve::UniAll => EnvelopeTarget::UniAll,
        Curve::Uni1 => EnvelopeTarget::Uni(Class::One),
        Curve::Uni2 => EnvelopeTarget::Uni(Class::Two),
        Curve::Bi => EnvelopeTarget::Bivariate,
    };
    if args.grid_points < 2 {
        return Err(Error::BadGrid);
    }
    let grid = match args.tmax {
        Some(tmax) => {
            let limit = grid_limit(&pattern.region());
            if tmax > limit + 1e-12 {
                return Err(Error::GridBound { limit });
            }
            (0..args.grid_points)
                .map(|i| tmax * i as f64 / (args.grid_points - 1) as f64)
                .collect::<Vec<_>>()
        }
        None => {
            if args.grid_points == 64 {
                default_t_grid(&pattern.region())
            } else {
                let limit = grid_limit(&pattern.region());
                (0..args.grid_points)
                    .map(|i| limit * i as f64 / (args.grid_points - 1) as f64)
                    .collect()
            }
        }
    };
    let curve = envelope(pattern, target, args.nsim, &grid, args.seed)?;
    write_out(args.out.as_ref(), &output::envelope_csv(&curve))
}

fn cmd_generate(args: GenerateArgs) -> Result<(), Error> {
    let pattern = match args.family {
        GenFamily::Csr => {
            let region = args.region.unwrap_or_else(Region::unit_square);
            gen_csr(args.n1, args.n2, region, args.seed)?
        }
        GenFamily::Seg => {
            let s = args.s.ok_or(Error::EmptyConfig("--s"))?;
            gen_segregation(args.n1, args.n2, SegParams::new(s)?, args.seed)?
        }
        GenFamily::Assoc => {
            let r = args.r.ok_or(Error::EmptyConfig("--r"))?;
            gen_association(args.n1, args.n2, AssocParams::new(r)?, args.seed)?
        }
    };
    let mut buffer = Vec::new();
    write_pattern(&mut buffer, &pattern)?;
    let content = String::from_utf8(buffer).expect("pattern CSV is UTF-8");
    write_out(args.out.as_ref(), &content)
}
