use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use ultrafriable::calibration;
use ultrafriable::harness::{self, Format, Mode, SweepConfig};
use ultrafriable::{Constants, TheoremTag};

const USAGE_ERROR: u8 = 2;
const IO_ERROR: u8 = 1;

#[derive(Parser)]
#[command(
    name = "ultrafriable",
    version,
    about = "Exact counts and saddle-point estimates for ultrafriable integers"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exact Upsilon_q(x, y), Upsilon(x, y; a, q), or friable counts with --friable.
    Count(Common),
    /// Saddle point beta (and alpha when x >= y) with sigma_2..sigma_4.
    Saddle(Common),
    /// Main term and error budget for a theorem variant.
    Estimate(Common),
    /// Estimate against the exact count.
    Compare(Common),
    /// Character sums |Upsilon(x, y; chi)|/Upsilon_q(x, y) against the bound.
    Chars(Common),
    /// Compare over full grids of x, y, q, variants.
    Sweep(Common),
    /// Run the training sweeps and print the frozen constants as key=value lines.
    Calibrate(CalibrateArgs),
}

#[derive(Args)]
struct Common {
    /// x values: 100, 1e6, e^30, comma lists, or log-spaced grids like e20:e40:5.
    #[arg(long, alias = "x-grid", required = true)]
    x: String,
    /// y values: comma list or ranges like 10-20.
    #[arg(long, required = true)]
    y: String,
    #[arg(long, default_value = "1")]
    q: String,
    /// Residues; progression variants default to every a coprime to q.
    #[arg(long)]
    a: Option<String>,
    /// Comma list of T1i, T1ii, T1iii, REMC, T2, T4, T5, R6.
    #[arg(long, default_value = "T1i")]
    variant: String,
    /// Count friable integers instead of ultrafriable ones (count only).
    #[arg(long)]
    friable: bool,
    #[command(flatten)]
    constants: ConstantArgs,
    #[arg(long, default_value = "csv")]
    format: String,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    jobs: Option<usize>,
    /// Record wall-clock time in JSON metadata.
    #[arg(long)]
    timing: bool,
}

#[derive(Args)]
struct ConstantArgs {
    #[arg(long, allow_negative_numbers = true)]
    epsilon: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    c0: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    c1: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    c2: Option<f64>,
}

impl ConstantArgs {
    fn resolve(&self, mut base: Constants) -> Constants {
        if let Some(v) = self.epsilon {
            base.epsilon = v;
        }
        if let Some(v) = self.c0 {
            base.c0 = v;
        }
        if let Some(v) = self.c1 {
            base.c1 = v;
        }
        if let Some(v) = self.c2 {
            base.c2 = v;
        }
        base
    }
}

#[derive(Args)]
struct CalibrateArgs {
    #[command(flatten)]
    constants: ConstantArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn config(mode: Mode, c: &Common) -> ultrafriable::Result<SweepConfig> {
    let mut cfg = SweepConfig::new(
        mode,
        harness::parse_x_grid(&c.x)?,
        harness::parse_u64_list(&c.y)?,
    );
    cfg.qs = harness::parse_u64_list(&c.q)?;
    cfg.a = c.a.as_deref().map(harness::parse_u64_list).transpose()?;
    cfg.variants = c
        .variant
        .split(',')
        .map(|v| v.trim().parse::<TheoremTag>())
        .collect::<ultrafriable::Result<_>>()?;
    cfg.friable = c.friable;
    cfg.format = c.format.parse::<Format>()?;
    cfg.constants = c.constants.resolve(Constants::default());
    cfg.jobs = c.jobs;
    cfg.timing = c.timing;
    cfg.validate()?;
    Ok(cfg)
}

fn open_output(path: &Option<PathBuf>) -> io::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn run_rows(mode: Mode, c: &Common) -> ExitCode {
    let cfg = match config(mode, c) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(USAGE_ERROR);
        }
    };
    let start = Instant::now();
    let rows = match harness::run(&cfg) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(USAGE_ERROR);
        }
    };
    let elapsed = start.elapsed().as_secs_f64() * 1e3;
    let written = open_output(&c.out).and_then(|mut w| {
        match cfg.format {
            Format::Csv => harness::write_csv(&rows, &mut w)?,
            Format::Json => {
                harness::write_json(&rows, &cfg, Some(elapsed), &mut w)?;
                writeln!(w)?;
            }
        }
        w.flush()
    });
    match written {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(IO_ERROR)
        }
    }
}

fn run_calibrate(args: &CalibrateArgs) -> ExitCode {
    let constants = args.constants.resolve(calibration::calibration_constants());
    if let Err(e) = constants.validate() {
        eprintln!("error: {e}");
        return ExitCode::from(USAGE_ERROR);
    }
    let values = match calibration::calibrate(&constants) {
        Ok(v) => v,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(USAGE_ERROR);
        }
    };
    let text = calibration::format_constants(&values);
    let written = open_output(&args.out).and_then(|mut w| {
        w.write_all(text.as_bytes())?;
        w.flush()
    });
    match written {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(IO_ERROR)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match &cli.command {
        Command::Count(c) => run_rows(Mode::Count, c),
        Command::Saddle(c) => run_rows(Mode::Saddle, c),
        Command::Estimate(c) => run_rows(Mode::Estimate, c),
        Command::Compare(c) => run_rows(Mode::Compare, c),
        Command::Chars(c) => run_rows(Mode::Chars, c),
        Command::Sweep(c) => run_rows(Mode::Sweep, c),
        Command::Calibrate(a) => run_calibrate(a),
    }
}
