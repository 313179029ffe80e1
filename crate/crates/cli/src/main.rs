use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use largeparam::specfun::{bessel_k, example_reference_plus, gamma};
use largeparam::{Complex64, LargeParameter};
use largeparam_cli::format::{emit_csv, emit_markdown};
use largeparam_cli::report::emit_reports;
use largeparam_cli::{run_solve, run_table, CliError, Format, Preset, RunConfig};

#[derive(Parser)]
#[command(name = "largeparam", version, about = "Large-parameter expansions for z·y'' + 2Λ·y' = g(z)·y")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Flat `key = value` configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// csv or markdown.
    #[arg(long, global = true)]
    format: Option<String>,
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Relative-error table; without --config, `--preset` picks a built-in one.
    Table {
        #[arg(long)]
        preset: Option<String>,
    },
    /// Detailed report for each configured problem.
    Solve,
    /// Quick numerical self-check.
    Selftest,
}

fn load(cli: &Cli, preset: Option<&str>) -> Result<RunConfig, CliError> {
    let mut config = match (&cli.config, preset) {
        (Some(path), _) => RunConfig::parse(&std::fs::read_to_string(path)?)?,
        (None, Some(p)) => RunConfig::preset(p.parse::<Preset>()?),
        (None, None) => return Err(CliError::Config("give --config or --preset".into())),
    };
    if let Some(p) = preset {
        if cli.config.is_some() {
            config.set("preset", p)?;
        }
    }
    if let Some(f) = &cli.format {
        config.format = f.parse::<Format>()?;
    }
    if let Some(path) = &cli.output {
        config.output = Some(path.clone());
    }
    if cli.threads.is_some() {
        config.threads = cli.threads;
    }
    config.validate()?;
    Ok(config)
}

fn write(config: &RunConfig, text: &str) -> Result<(), CliError> {
    match &config.output {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn selftest() -> bool {
    let c = |re: f64, im: f64| Complex64::new(re, im);
    let checks: Vec<(&str, bool)> = vec![
        ("gamma recurrence", {
            let z = c(3.3, -1.2);
            let (a, b) = (gamma(z + 1.0).unwrap(), z * gamma(z).unwrap());
            (a - b).norm() < 1e-12 * a.norm()
        }),
        ("K_1/2 closed form", {
            let x = c(1.7, 0.4);
            let exact = (std::f64::consts::PI / (2.0 * x)).sqrt() * (-x).exp();
            (bessel_k(c(0.5, 0.0), x).unwrap() - exact).norm() < 1e-12 * exact.norm()
        }),
        ("0F1 example value", {
            let v = example_reference_plus(LargeParameter::real(100.0).unwrap(), c(1.0, 0.0)).unwrap();
            (v.re - 1.005_012_5).abs() < 1e-7
        }),
        ("table cell Λ = 5, n = 3", {
            let cfg = RunConfig::parse("method = fixedpoint\nlambda = 5\nz = 1\nn = 3\n").expect("fixed config");
            match run_table(&cfg).map(|t| t.rows[0].outcome.clone()) {
                Ok(largeparam_cli::Outcome::Value(v)) => (v / 2.22e-6 - 1.0).abs() < 0.05,
                _ => false,
            }
        }),
    ];
    for (name, ok) in &checks {
        println!("{} {name}", if *ok { "PASS" } else { "FAIL" });
    }
    checks.iter().all(|(_, ok)| *ok)
}

fn run(cli: &Cli) -> Result<bool, CliError> {
    match &cli.command {
        Command::Table { preset } => {
            let config = load(cli, preset.as_deref())?;
            let table = run_table(&config)?;
            let text = match config.format {
                Format::Csv => emit_csv(&table),
                Format::Markdown => emit_markdown(&table),
            };
            write(&config, &text)?;
            Ok(!table.has_failures())
        }
        Command::Solve => {
            let config = load(cli, None)?;
            let reports = run_solve(&config)?;
            write(&config, &emit_reports(&reports, config.format))?;
            Ok(reports.iter().all(Result::is_ok))
        }
        Command::Selftest => Ok(selftest()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(3),
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
