use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use qrelent::checks::Tolerances;
use qrelent::error::{HarnessError, EXIT_USAGE};
use qrelent::scenario::{load_scenario, Kind};
use qrelent::suite::{parse_selection, run_suite, SuiteOptions, DEFAULT_SEED};
use qrelent::{runner, Result};

#[derive(Parser)]
#[command(
    name = "qrelent",
    version,
    about = "Relative entropy method simulator and verifier"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate the N-body and Hartree flows of a `simulate` scenario.
    Simulate(ScenarioArgs),
    /// Run a `verify-*` scenario.
    Verify(ScenarioArgs),
    /// Count index patterns of an `enumerate` scenario.
    Enumerate(ScenarioArgs),
    /// Run a `semiclassical-bounds` or `quantization-checks` scenario.
    Semiclassical(ScenarioArgs),
    /// Run the acceptance suite.
    Suite(SuiteArgs),
}

#[derive(Args)]
struct ScenarioArgs {
    #[arg(long)]
    scenario: PathBuf,
    #[arg(long, default_value = ".")]
    out: PathBuf,
    #[arg(long)]
    seed_override: Option<u64>,
    /// Largest admissible N-body dimension d^N.
    #[arg(long)]
    cap: Option<usize>,
}

#[derive(Args)]
struct SuiteArgs {
    #[arg(long, default_value = ".")]
    out: PathBuf,
    #[arg(long)]
    seed_override: Option<u64>,
    /// Criteria to run, e.g. `1,3,5-7`.
    #[arg(long)]
    only: Option<String>,
    /// Replace every error tolerance and slack by this value.
    #[arg(long)]
    tolerance_override: Option<f64>,
}

fn accepts(command: &Command, kind: Kind) -> bool {
    match command {
        Command::Simulate(_) => kind == Kind::Simulate,
        Command::Verify(_) => matches!(
            kind,
            Kind::VerifyEntropyGrowth | Kind::VerifyCancellation | Kind::VerifyIdentities
        ),
        Command::Enumerate(_) => kind == Kind::Enumerate,
        Command::Semiclassical(_) => {
            matches!(kind, Kind::SemiclassicalBounds | Kind::QuantizationChecks)
        }
        Command::Suite(_) => false,
    }
}

fn scenario_command(command: &Command, args: &ScenarioArgs) -> Result<u8> {
    let mut scenario = load_scenario(&args.scenario, args.cap)?;
    if !accepts(command, scenario.kind) {
        return Err(HarnessError::schema(
            &args.scenario,
            format!(
                "kind `{}` cannot run under this subcommand",
                scenario.kind.name()
            ),
        ));
    }
    if let Some(seed) = args.seed_override {
        scenario.seed = seed;
    }
    let report = runner::run(&scenario, args.cap);
    let path = args.out.join(scenario.output_name());
    report.write(&path)?;
    if let Some(e) = &report.error {
        eprintln!("{}: numerical error: {e}", scenario.id);
    }
    eprintln!(
        "{}: {} -> {}",
        scenario.id,
        if report.passed { "pass" } else { "FAIL" },
        path.display()
    );
    Ok(report.exit_code())
}

fn suite_command(args: &SuiteArgs) -> Result<u8> {
    let only = match &args.only {
        Some(text) => parse_selection(text).map_err(HarnessError::Usage)?,
        None => Vec::new(),
    };
    let tolerances = match args.tolerance_override {
        Some(v) if v.is_nan() || v < 0.0 || !v.is_finite() => {
            return Err(HarnessError::Usage(
                "tolerance override must be finite and nonnegative".into(),
            ))
        }
        Some(v) => Tolerances::overridden(v),
        None => Tolerances::default(),
    };
    let opts = SuiteOptions {
        seed: args.seed_override.unwrap_or(DEFAULT_SEED),
        tolerances,
        only,
    };
    let outcome = run_suite(&opts, true)?;
    outcome.write(Path::new(&args.out))?;
    Ok(outcome.exit_code())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    let result = match &cli.command {
        Command::Suite(args) => suite_command(args),
        Command::Simulate(a)
        | Command::Verify(a)
        | Command::Enumerate(a)
        | Command::Semiclassical(a) => scenario_command(&cli.command, a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
