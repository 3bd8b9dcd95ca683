use std::fs::File;
use std::io::{self, BufWriter, Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use dirrep::cli::{
    cmd_adaptive, cmd_gg_curve, cmd_simulate, cmd_test, cmd_type1_curve, parse_theta_spec, CliError,
    FeatureTable, OutputFormat, QueryParams, Report, SimulationMode,
};
use dirrep::{CombinerKind, Rule};

#[derive(Parser)]
#[command(name = "dirrep", version, about = "Directional replicability tests across independent studies")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Test H_{r/n} for every feature of a z-score table.
    Test {
        /// CSV with header feature_id,z1,...,zn ("-" for stdin).
        #[arg(default_value = "-")]
        input: String,
        #[command(flatten)]
        table: TableArgs,
        #[arg(long)]
        r: usize,
        #[arg(long, default_value = "auto")]
        rule: Rule,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Sequentially test r = ceil((n+2)/2), ..., n and report the lower bound l.
    Adaptive {
        #[arg(default_value = "-")]
        input: String,
        #[command(flatten)]
        table: TableArgs,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Closed-form Type I error at the concordant and discordant limit points.
    #[command(name = "type1-curve")]
    Type1Curve {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// g(g(theta1)) for n = 3, r = 2 on a regular grid.
    #[command(name = "gg-curve")]
    GgCurve {
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        #[arg(long, default_value_t = 3.0)]
        grid_max: f64,
        #[arg(long, default_value_t = 1.0 / 3.0)]
        grid_step: f64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Monte Carlo Type I or Type III error at a parameter point.
    Simulate {
        /// Comma-separated effects; "inf"/"-inf" allowed, "a*k" repeats a k times.
        #[arg(long, allow_hyphen_values = true)]
        theta: String,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        r: usize,
        #[arg(long, default_value = "auto")]
        rule: Rule,
        #[arg(long, default_value = "type1")]
        mode: SimulationMode,
        #[arg(long, default_value_t = 100_000)]
        reps: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[command(flatten)]
        common: CommonArgs,
    },
}

#[derive(Args)]
struct TableArgs {
    /// Expected number of studies; must match the input columns.
    #[arg(long)]
    n: Option<usize>,
    /// Input columns hold right-sided p-values instead of z-scores.
    #[arg(long)]
    pvalues: bool,
}

#[derive(Args)]
struct CommonArgs {
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    #[arg(long, default_value = "bonferroni")]
    combiner: CombinerKind,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct OutputArgs {
    #[arg(long, default_value = "csv")]
    format: OutputFormat,
    /// Output file (default stdout).
    #[arg(long)]
    output: Option<PathBuf>,
}

fn read_table(input: &str, args: &TableArgs) -> Result<FeatureTable, CliError> {
    let reader: Box<dyn Read> = if input == "-" {
        Box::new(io::stdin().lock())
    } else {
        let file = File::open(input).map_err(|e| CliError::Runtime(format!("cannot open {input}: {e}")))?;
        Box::new(file)
    };
    let table = FeatureTable::read_csv(reader, args.pvalues)?;
    table.check_n(args.n)?;
    Ok(table)
}

fn emit(report: &Report, out: &OutputArgs) -> Result<(), CliError> {
    match &out.output {
        Some(path) => {
            let file = File::create(path)
                .map_err(|e| CliError::Runtime(format!("cannot create {}: {e}", path.display())))?;
            let mut w = BufWriter::new(file);
            report.write(out.format, &mut w)?;
            w.flush()?;
        }
        None => {
            let mut w = BufWriter::new(io::stdout().lock());
            report.write(out.format, &mut w)?;
            w.flush()?;
        }
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Test {
            input,
            table,
            r,
            rule,
            common,
        } => {
            let features = read_table(&input, &table)?;
            let params = QueryParams {
                r,
                alpha: common.alpha,
                combiner: common.combiner,
                rule,
            };
            emit(&cmd_test(&features, params)?, &common.output)
        }
        Command::Adaptive { input, table, common } => {
            let features = read_table(&input, &table)?;
            emit(&cmd_adaptive(&features, common.alpha, common.combiner)?, &common.output)
        }
        Command::Type1Curve { n, alpha, output } => emit(&cmd_type1_curve(n, alpha)?, &output),
        Command::GgCurve {
            alpha,
            grid_max,
            grid_step,
            output,
        } => emit(&cmd_gg_curve(alpha, grid_max, grid_step)?, &output),
        Command::Simulate {
            theta,
            n,
            r,
            rule,
            mode,
            reps,
            seed,
            common,
        } => {
            let theta = parse_theta_spec(&theta)?;
            let params = QueryParams {
                r,
                alpha: common.alpha,
                combiner: common.combiner,
                rule,
            };
            emit(&cmd_simulate(&theta, n, params, reps, seed, mode)?, &common.output)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("dirrep: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
