use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use num_bigint::BigInt;
use num_rational::{BigRational, Rational64};

use amoebot::io::config::parse_rational;
use amoebot::io::{self, files, render, ConfigError, IoError, RunConfig};
use amoebot::metrics::{self, Axis, Series};
use amoebot::oracle::{oracle_report, OracleError};
use amoebot::verify;

#[derive(Parser)]
#[command(name = "amoebot", version, args_override_self = true, about = "Phototaxing and compression of particle systems on the triangular lattice")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run seeded trials; writes trial CSVs, snapshots and a summary.
    Run(RunArgs),
    /// Exact report over all configurations of a few particles.
    Oracle {
        #[arg(long, default_value_t = 3)]
        n: usize,
        /// Exact rational bias, e.g. 4 or 7/2.
        #[arg(long, default_value = "4", allow_negative_numbers = true)]
        lambda: String,
        #[arg(long, default_value = "1/4", allow_negative_numbers = true)]
        dim_prob: String,
    },
    /// Run the acceptance checks; exits 1 if any fails.
    Verify {
        /// Only these criteria (1-9).
        #[arg(long = "criterion", short = 'c')]
        criteria: Vec<u8>,
    },
    /// Ensemble mean squared displacement of trial CSVs.
    Msd {
        #[arg(required = true)]
        files: Vec<PathBuf>,
        #[arg(long, short, default_value = "msd.csv")]
        output: PathBuf,
        #[arg(long)]
        t_min: Option<u64>,
        #[arg(long)]
        t_max: Option<u64>,
    },
    /// Draw a snapshot file as SVG or text.
    Render {
        snapshot: PathBuf,
        #[arg(long, default_value = "svg", value_parser = ["svg", "ascii"])]
        format: String,
        /// Defaults to standard output.
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Mean height change and fitted exponent over a grid of λ and dim_prob.
    Sweep {
        #[arg(long, value_delimiter = ',', default_value = "2,4,6")]
        lambdas: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_value = "1/8,1/4,1/2")]
        dim_probs: Vec<String>,
        #[command(flatten)]
        run: RunArgs,
    },
}

#[derive(Args, Default)]
struct RunArgs {
    /// Config file of `key = value` lines.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override any key, e.g. `--set lambda=4`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    #[arg(long)]
    initial: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    lambda: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    dim_prob: Option<String>,
    #[arg(long)]
    kernel: Option<String>,
    #[arg(long)]
    mode: Option<String>,
    #[arg(long)]
    light: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    iterations: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    record_interval: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    snapshot_interval: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    seed: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    trials: Option<String>,
    #[arg(long)]
    output_dir: Option<String>,
}

impl RunArgs {
    fn config(&self) -> Result<RunConfig, ConfigError> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::from_file(p)?,
            None => RunConfig::default(),
        };
        let flags = [
            ("initial", &self.initial),
            ("lambda", &self.lambda),
            ("dim_prob", &self.dim_prob),
            ("kernel", &self.kernel),
            ("mode", &self.mode),
            ("light", &self.light),
            ("iterations", &self.iterations),
            ("record_interval", &self.record_interval),
            ("snapshot_interval", &self.snapshot_interval),
            ("seed", &self.seed),
            ("trials", &self.trials),
            ("output_dir", &self.output_dir),
        ];
        for (k, v) in flags {
            if let Some(v) = v {
                cfg.set(k, v)?;
            }
        }
        for o in &self.overrides {
            let (k, v) = o.split_once('=').ok_or_else(|| ConfigError::Value {
                key: o.clone(),
                reason: "expected KEY=VALUE".into(),
            })?;
            cfg.set(k, v)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

enum Failure {
    Config(String),
    Runtime(String),
    Verification,
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e.to_string())
    }
}

impl From<IoError> for Failure {
    fn from(e: IoError) -> Self {
        match e {
            IoError::Config(c) => Failure::Config(c.to_string()),
            other => Failure::Runtime(other.to_string()),
        }
    }
}

impl From<OracleError> for Failure {
    fn from(e: OracleError) -> Self {
        match e {
            OracleError::SizeOutOfRange(_) => Failure::Config(format!("invalid value for `n`: {e}")),
            other => Failure::Runtime(other.to_string()),
        }
    }
}

fn big(r: Rational64) -> BigRational {
    BigRational::new(BigInt::from(*r.numer()), BigInt::from(*r.denom()))
}

fn rational_arg(key: &str, s: &str) -> Result<Rational64, Failure> {
    parse_rational(s).map_err(|e| Failure::Config(format!("invalid value for `{key}`: {e}")))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verification) => ExitCode::from(1),
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

fn dispatch(command: Command) -> Result<(), Failure> {
    match command {
        Command::Run(args) => {
            let cfg = args.config()?;
            let trajectories = io::execute(&cfg)?;
            println!("{} trials written to {}", trajectories.len(), cfg.output_dir.display());
            print!("{}", io::run_summary(&cfg, &trajectories));
        }
        Command::Oracle { n, lambda, dim_prob } => {
            let lambda = rational_arg("lambda", &lambda)?;
            if *lambda.numer() <= 0 {
                return Err(Failure::Config("invalid value for `lambda`: must be positive".into()));
            }
            let dim = rational_arg("dim_prob", &dim_prob)?;
            if *dim.numer() <= 0 || dim > Rational64::from_integer(1) {
                return Err(Failure::Config("invalid value for `dim_prob`: must lie in (0, 1]".into()));
            }
            print!("{}", oracle_report(n, &big(lambda), dim)?);
        }
        Command::Verify { criteria } => {
            let mut failed = 0;
            for id in &criteria {
                if verify::criterion(*id).is_none() {
                    return Err(Failure::Config(format!("invalid value for `criterion`: no criterion {id}")));
                }
            }
            for c in verify::CRITERIA.iter().filter(|c| criteria.is_empty() || criteria.contains(&c.id)) {
                let r = c.run();
                println!("{r}");
                failed += usize::from(!r.passed);
            }
            if failed > 0 {
                println!("{failed} criteria failed");
                return Err(Failure::Verification);
            }
        }
        Command::Msd { files: inputs, output, t_min, t_max } => {
            let series = inputs.iter().map(|p| files::read_series(p)).collect::<Result<Vec<Series>, _>>()?;
            let range = match (t_min, t_max) {
                (None, None) => None,
                (a, b) => {
                    let (lags, _) = metrics::msd_curve(&series).map_err(IoError::from)?;
                    let first = lags.iter().copied().find(|&t| t > 0).unwrap_or(1);
                    Some((a.unwrap_or(first), b.unwrap_or(*lags.last().unwrap_or(&0))))
                }
            };
            let result = metrics::msd(&series, range).map_err(IoError::from)?;
            files::write(&output, &files::msd_csv(&result))?;
            println!("{}", result.summary_line());
            println!("class={} D={}", result.classification(), result.diffusion_coefficient());
            println!("height {}", metrics::height_stats(&series));
            println!("lateral {}", metrics::lateral_stats(&series));
            println!("success +y {}", metrics::success_rate(&series, Axis::PlusY).map_err(IoError::from)?);
        }
        Command::Render { snapshot, format, output } => {
            let system = files::read_snapshot(&snapshot)?;
            let picture = if format == "ascii" { render::ascii(&system) } else { render::svg(&system) };
            match output {
                Some(p) => files::write(&p, &picture)?,
                None => print!("{picture}"),
            }
        }
        Command::Sweep { lambdas, dim_probs, run } => {
            let cfg = run.config()?;
            let dims = dim_probs.iter().map(|d| rational_arg("dim_probs", d)).collect::<Result<Vec<_>, _>>()?;
            for (key, bad) in [("lambdas", lambdas.iter().any(|l| !(l.is_finite() && *l > 0.0)))] {
                if bad {
                    return Err(Failure::Config(format!("invalid value for `{key}`: must be positive")));
                }
            }
            for d in &dims {
                RunConfig { dim_prob: *d, ..cfg.clone() }
                    .validate()
                    .map_err(|_| Failure::Config(format!("invalid value for `dim_probs`: {d} outside (0, 1]")))?;
            }
            print!("{}", io::sweep_table(&io::sweep(&cfg, &lambdas, &dims)?));
        }
    }
    Ok(())
}
