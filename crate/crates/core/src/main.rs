use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use hypocert::report::{
    render_json, render_kalman, render_text, run_analysis, run_kalman, run_verification, sweep_csv, AnalysisConfig,
    Verdict,
};
use hypocert::sysfile::{parse_override, SystemFile};
use hypocert::{zoo, Error};

#[derive(Parser)]
#[command(name = "hypocert", version, about = "Decay-rate certificates for partially dissipative hyperbolic systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Args)]
struct Common {
    /// System file, or `zoo:<name>` for a built-in model.
    file: String,
    /// Override a parameter, e.g. `--param a=3/5`.
    #[arg(long = "param", value_name = "NAME=VALUE")]
    params: Vec<String>,
    /// Largest Kalman order to try (default n - 1).
    #[arg(long)]
    kmax: Option<usize>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Args)]
struct Sweep {
    /// Monitor frequencies are 2^j (HF) and 2^-j (LF) for j from this value ...
    #[arg(long)]
    xi_min_exp: Option<i32>,
    /// ... up to this one.
    #[arg(long)]
    xi_max_exp: Option<i32>,
    /// Largest epsilon tried is 2^-EPS_MAX.
    #[arg(long)]
    eps_max: Option<u32>,
    /// Smallest epsilon tried is 2^-EPS_MIN.
    #[arg(long)]
    eps_min: Option<u32>,
    /// Seed of the random states used by the checks.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Subcommand)]
enum Command {
    /// Decide the Kalman condition and estimate alpha and beta.
    Kalman {
        #[command(flatten)]
        common: Common,
    },
    /// Run the tree algorithm in both regimes and synthesize the functionals.
    Analyze {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        sweep: Sweep,
    },
    /// Analyze, then check the certificates numerically.
    Verify {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        sweep: Sweep,
        /// Write the frequency sweep as CSV.
        #[arg(long, value_name = "PATH")]
        csv: Option<PathBuf>,
    },
    /// Built-in models.
    Zoo {
        #[command(subcommand)]
        action: ZooAction,
    },
}

#[derive(Subcommand)]
enum ZooAction {
    /// List the built-in models.
    List,
    /// Print the system file of a model.
    Emit {
        name: String,
        #[arg(long = "param", value_name = "NAME=VALUE")]
        params: Vec<String>,
        /// Write to a file instead of standard output.
        #[arg(short, long, value_name = "PATH")]
        output: Option<PathBuf>,
    },
}

fn load(source: &str, params: &[String]) -> Result<SystemFile, Error> {
    let mut f = zoo::load_source(source)?;
    for p in params {
        let (k, v) = parse_override(p)?;
        f.set_parameter(&k, &v)?;
    }
    Ok(f)
}

fn config(file: &SystemFile, common: &Common, sweep: Option<&Sweep>) -> AnalysisConfig {
    let mut cfg = AnalysisConfig::default().with_file_options(&file.options);
    if common.kmax.is_some() {
        cfg.kmax = common.kmax;
    }
    if let Some(s) = sweep {
        cfg.xi_min_exp = s.xi_min_exp.unwrap_or(cfg.xi_min_exp);
        cfg.xi_max_exp = s.xi_max_exp.unwrap_or(cfg.xi_max_exp);
        cfg.eps_max = s.eps_max.map_or(cfg.eps_max, |v| v as i32);
        cfg.eps_min = s.eps_min.map_or(cfg.eps_min, |v| v as i32);
        cfg.seed = s.seed;
    }
    cfg
}

fn write_out(path: &PathBuf, text: &str) -> Result<(), Error> {
    std::fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn run(cli: Cli) -> Result<ExitCode, Error> {
    match cli.command {
        Command::Kalman { common } => {
            let file = load(&common.file, &common.params)?;
            let cert = run_kalman(&file, &config(&file, &common, None))?;
            match common.format {
                Format::Text => print!("{}", render_kalman(&file.name, &cert)),
                Format::Json => println!("{}", serde_json::to_string_pretty(&cert).expect("certificate serialization")),
            }
            Ok(if cert.holds { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
        Command::Analyze { common, sweep } => {
            let file = load(&common.file, &common.params)?;
            let report = run_analysis(&file, &config(&file, &common, Some(&sweep)))?;
            emit(&report, common.format);
            Ok(verdict_code(report.verdict))
        }
        Command::Verify { common, sweep, csv } => {
            let file = load(&common.file, &common.params)?;
            let report = run_verification(&file, &config(&file, &common, Some(&sweep)))?;
            if let Some(path) = &csv {
                write_out(path, &sweep_csv(&report))?;
            }
            emit(&report, common.format);
            Ok(verdict_code(report.verdict))
        }
        Command::Zoo { action: ZooAction::List } => {
            for name in zoo::NAMES {
                println!("{name:<18} {}", zoo::describe(name)?);
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Zoo { action: ZooAction::Emit { name, params, output } } => {
            let file = load(&format!("zoo:{name}"), &params)?;
            let text = file.to_json();
            match output {
                Some(path) => write_out(&path, &text)?,
                None => print!("{text}"),
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn emit(report: &hypocert::report::Report, format: Format) {
    match format {
        Format::Text => print!("{}", render_text(report)),
        Format::Json => println!("{}", render_json(report)),
    }
}

fn verdict_code(v: Verdict) -> ExitCode {
    match v {
        Verdict::Failed => ExitCode::from(1),
        _ => ExitCode::SUCCESS,
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_input_error() { 2 } else { 1 })
        }
    }
}
