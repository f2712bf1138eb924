use std::fs::File;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use expcheb::fixed_k::solve_remainders;
use expcheb::io::{
    method_label, profile_tsv, read_csv, residuals_tsv, write_csv, CsvError, FitReport,
};
use expcheb::k_search::{
    default_interval, grid_search, refine_search, verify_optimal, SearchConfig,
};
use expcheb::oracle::{dense_k_scan, random_times, synth, NoiseShape, SynthSpec};
use expcheb::{error_of, ExponentialModel, FitError, TimeSeries};

const PROFILE_POINTS: usize = 201;

#[derive(Parser)]
#[command(
    name = "expcheb",
    version,
    about = "Max-norm fitting of a*exp(k*t) + b"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Search for the best rate and fit the model.
    Fit {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        search: SearchArgs,
        /// Solve exactly for the optimal rate after the grid search.
        #[arg(long)]
        refine: bool,
    },
    /// Best amplitude and offset for a given rate.
    FitFixedK {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long, allow_hyphen_values = true)]
        k: f64,
    },
    /// Residuals of a given model.
    Residuals {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        model: ModelArgs,
    },
    /// Check that a given model is optimal over all rates (exit 3 if not).
    Verify {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        model: ModelArgs,
    },
    /// Tabulate the best error per rate as TSV.
    Profile {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        search: SearchArgs,
    },
    /// Write synthetic data as CSV.
    Synth {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = 8)]
        n: usize,
        #[arg(long, default_value_t = 1.0)]
        span: f64,
        #[arg(long, default_value_t = 0.0)]
        delta: f64,
        #[arg(long, value_enum, default_value_t = Noise::None)]
        noise: Noise,
        /// Draw instants uniformly instead of spacing them evenly.
        #[arg(long)]
        random_times: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Args)]
struct InputArgs {
    /// CSV file with columns t, T (stdin when absent).
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Args)]
struct SearchArgs {
    #[arg(long, allow_hyphen_values = true)]
    k_min: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    k_max: Option<f64>,
    /// Samples per sweep (odd), or profile points.
    #[arg(long)]
    samples: Option<usize>,
    /// Final grid spacing (default: 1e-12 times the interval width).
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    max_sweeps: Option<usize>,
}

#[derive(Args)]
struct ModelArgs {
    #[arg(long, allow_hyphen_values = true)]
    a: f64,
    #[arg(long, allow_hyphen_values = true)]
    b: f64,
    #[arg(long, allow_hyphen_values = true)]
    k: f64,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Tsv,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Noise {
    None,
    Alternating,
    Uniform,
}

enum Failure {
    Input(String),
    Numeric(String),
}

impl From<CsvError> for Failure {
    fn from(e: CsvError) -> Self {
        match e {
            CsvError::Series(e) => e.into(),
            e => Failure::Input(e.to_string()),
        }
    }
}

impl From<FitError> for Failure {
    fn from(e: FitError) -> Self {
        match e {
            FitError::EmptySeries
            | FitError::LengthMismatch { .. }
            | FitError::NonFinite { .. }
            | FitError::NonIncreasingTimes { .. }
            | FitError::OverflowRisk { .. }
            | FitError::InvalidArgument(_)
            | FitError::InvalidConfig(_) => Failure::Input(e.to_string()),
            e => Failure::Numeric(e.to_string()),
        }
    }
}

struct Output {
    text: String,
    code: u8,
}

impl Output {
    fn ok(text: String) -> Self {
        Self { text, code: 0 }
    }
}

fn load(input: &InputArgs) -> Result<TimeSeries, Failure> {
    Ok(match &input.input {
        Some(path) => read_csv(
            File::open(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?,
        )?,
        None => read_csv(std::io::stdin().lock())?,
    })
}

fn search_config(series: &TimeSeries, args: &SearchArgs) -> Result<SearchConfig, Failure> {
    let (lo, hi) = match (args.k_min, args.k_max) {
        (Some(lo), Some(hi)) => (lo, hi),
        (lo, hi) => {
            let (dlo, dhi) = default_interval(series)?;
            (lo.unwrap_or(dlo), hi.unwrap_or(dhi))
        }
    };
    let mut cfg = SearchConfig::new(lo, hi);
    if let Some(d) = args.samples {
        cfg.samples = d;
    }
    if let Some(eps) = args.epsilon {
        cfg.epsilon = eps;
    }
    if let Some(s) = args.max_sweeps {
        cfg.max_sweeps = s;
    }
    cfg.validate(series)?;
    Ok(cfg)
}

fn render(report: &FitReport, format: Format) -> String {
    match format {
        Format::Json => report.to_json() + "\n",
        Format::Tsv => report.to_tsv(),
    }
}

fn model_of(args: &ModelArgs) -> ExponentialModel {
    ExponentialModel::new(args.a, args.b, args.k)
}

fn run(command: Command) -> Result<Output, Failure> {
    match command {
        Command::Fit {
            input,
            search,
            refine,
        } => {
            let series = load(&input)?;
            let cfg = search_config(&series, &search)?;
            let grid = grid_search(&series, &cfg)?;
            let refined = refine.then(|| refine_search(&series, &grid, &cfg));
            let report = FitReport::from_search(&series, &grid, refined);
            Ok(Output::ok(render(&report, input.format)))
        }
        Command::FitFixedK { input, k } => {
            let series = load(&input)?;
            let fit = solve_remainders(&series, k)?;
            let report = FitReport::from_fit(&series, &fit, method_label(fit.method));
            Ok(Output::ok(render(&report, input.format)))
        }
        Command::Residuals { input, model } => {
            let series = load(&input)?;
            let fit = error_of(&series, &model_of(&model), &series.tolerances())?;
            Ok(Output::ok(match input.format {
                Format::Json => render(
                    &FitReport::from_fit(&series, &fit, "evaluated"),
                    Format::Json,
                ),
                Format::Tsv => residuals_tsv(&series, &fit),
            }))
        }
        Command::Verify { input, model } => {
            let series = load(&input)?;
            let tol = series.tolerances();
            let model = model_of(&model);
            let ok = verify_optimal(&series, &model, &tol)?;
            let mut report =
                FitReport::from_fit(&series, &error_of(&series, &model, &tol)?, "evaluated");
            report.verified = Some(ok);
            Ok(Output {
                text: render(&report, input.format),
                code: if ok { 0 } else { 3 },
            })
        }
        Command::Profile { input, search } => {
            let series = load(&input)?;
            let (lo, hi) = match (search.k_min, search.k_max) {
                (Some(lo), Some(hi)) => (lo, hi),
                (lo, hi) => {
                    let (dlo, dhi) = default_interval(&series)?;
                    (lo.unwrap_or(dlo), hi.unwrap_or(dhi))
                }
            };
            SearchConfig::new(lo, hi).validate(&series)?;
            let scan = dense_k_scan(&series, lo, hi, search.samples.unwrap_or(PROFILE_POINTS))?;
            Ok(Output::ok(profile_tsv(&scan.table)))
        }
        Command::Synth {
            model,
            n,
            span,
            delta,
            noise,
            random_times: random,
            seed,
        } => {
            if n == 0 || span.is_nan() || span <= 0.0 {
                return Err(Failure::Input("synth needs n >= 1 and span > 0".into()));
            }
            let times = if random {
                random_times(&mut ChaCha8Rng::seed_from_u64(seed), n, span)
            } else if n == 1 {
                vec![0.0]
            } else {
                (0..n).map(|i| span * i as f64 / (n - 1) as f64).collect()
            };
            let spec = SynthSpec {
                model: model_of(&model),
                times,
                delta,
                noise: match noise {
                    Noise::None => NoiseShape::None,
                    Noise::Alternating => NoiseShape::Alternating,
                    Noise::Uniform => NoiseShape::Uniform,
                },
                seed,
            };
            Ok(Output::ok(write_csv(&synth(&spec)?)))
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(out) => {
            print!("{}", out.text);
            ExitCode::from(out.code)
        }
        Err(Failure::Input(msg)) => {
            eprintln!("expcheb: input error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Numeric(msg)) => {
            eprintln!("expcheb: numeric failure: {msg}");
            ExitCode::from(2)
        }
    }
}
