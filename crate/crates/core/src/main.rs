use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use fitsim::config::{self, Config};
use fitsim::output;
use fitsim::policy::{qualitative_checks, run_scenario_suite};
use fitsim::validation::{
    all_passed, error_metrics, extreme_condition_suite, load_historical, sensitivity_suite,
    step_convergence, theil_decomposition, Finding, Moments, PerturbationSet, Status,
};
use fitsim::Error;

#[derive(Parser)]
#[command(
    name = "fitsim",
    version,
    about = "Feed-in tariff system-dynamics simulator"
)]
struct Cli {
    /// Log config notices and progress to stderr.
    #[arg(short, long, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Scenario file; the shipped calibration when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Integration step in years, replacing the config value.
    #[arg(long)]
    dt: Option<f64>,
    /// Final year of the run, replacing the config value.
    #[arg(long)]
    horizon: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario and write its trajectories as CSV.
    Run {
        #[command(flatten)]
        common: Common,
        /// Scenario name; the first scenario in the file when omitted.
        #[arg(long)]
        scenario: Option<String>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run every scenario, write the comparison table and plot data, and
    /// check the policy orderings.
    Compare {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        out: PathBuf,
        /// Also write an SVG chart per plotted variable.
        #[arg(long)]
        svg: bool,
    },
    /// Run the extreme-condition, sensitivity and step-size checks, and fit
    /// statistics when observed data is given.
    Validate {
        #[command(flatten)]
        common: Common,
        /// Two-column `year,value` CSV of observations.
        #[arg(long)]
        historical: Option<PathBuf>,
        /// Model variable the observations correspond to.
        #[arg(long, default_value = "installed_capacity")]
        variable: String,
        /// Scenario compared with the observations.
        #[arg(long)]
        scenario: Option<String>,
        /// Use sample rather than population moments in the Theil statistics.
        #[arg(long)]
        sample_moments: bool,
    },
    /// Print the shipped config document.
    Defaults,
}

fn load(common: &Common) -> fitsim::Result<Config> {
    let mut config = match &common.config {
        Some(path) => config::load_config(path)?,
        None => config::shipped().clone(),
    };
    if common.dt.is_some() || common.horizon.is_some() {
        config.override_clock(common.dt, common.horizon)?;
    }
    Ok(config)
}

fn pick<'a>(
    config: &'a Config,
    name: Option<&str>,
) -> fitsim::Result<&'a fitsim::scenario::Scenario> {
    match name {
        Some(n) => config.scenario(n),
        None => config
            .scenarios
            .first()
            .ok_or_else(|| Error::Config("config defines no scenarios".into())),
    }
}

fn report(findings: &[Finding]) {
    for f in findings {
        let tag = match f.status {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::OutOfBand => "SKIP",
        };
        println!("{tag} {}: {}", f.name, f.detail);
    }
}

fn execute(cli: Cli) -> fitsim::Result<bool> {
    match cli.command {
        Command::Defaults => {
            print!("{}", config::shipped_text());
            Ok(true)
        }
        Command::Run {
            common,
            scenario,
            out,
        } => {
            let config = load(&common)?;
            let s = pick(&config, scenario.as_deref())?;
            let result = s.run(&config.parameters)?;
            let path = out.join(format!("{}.csv", s.name));
            output::emit_columns(&result, &s.outputs, &path)?;
            if let Some(first) = result.warnings().first() {
                log::warn!(
                    "{} warning(s), first at {}: {}",
                    result.warnings().len(),
                    first.time,
                    first.message
                );
            }
            if let Some(first) = result.clamp_events().first() {
                log::warn!(
                    "{} stock(s) clamped at zero, first `{}` at {}",
                    result.clamp_events().len(),
                    first.stock,
                    first.time
                );
            }
            println!("wrote {}", path.display());
            Ok(true)
        }
        Command::Compare { common, out, svg } => {
            let config = load(&common)?;
            let report = run_scenario_suite(&config.parameters, &config.scenarios)?;
            let findings = qualitative_checks(&report);
            output::emit_comparison(&report, &findings, &out, svg)?;
            for r in &report.rows {
                println!(
                    "{:<12} capacity {:>10.1} MW  penetration {:.4}  tendency {:.3}  debt {:.4e}  delay {:.2} y",
                    r.scenario, r.installed_capacity, r.penetration_rate, r.tendency_to_invest, r.suna_debt,
                    r.delay_in_debt_payment
                );
            }
            report_findings(&findings, &out);
            Ok(all_passed(&findings))
        }
        Command::Validate {
            common,
            historical,
            variable,
            scenario,
            sample_moments,
        } => {
            let config = load(&common)?;
            let s = pick(&config, scenario.as_deref())?;
            let params = s.parameters(&config.parameters)?;
            let mut findings = extreme_condition_suite(&params, &s.control, &s.clock)?;
            findings.extend(
                sensitivity_suite(&params, &s.control, &s.clock, &PerturbationSet::standard())?
                    .findings,
            );
            findings.extend(step_convergence(&params, &s.control, &s.clock)?);
            report(&findings);
            if let Some(path) = historical {
                fit_statistics(&path, s, &config, &variable, sample_moments)?;
            }
            Ok(all_passed(&findings))
        }
    }
}

fn report_findings(findings: &[Finding], out: &Path) {
    report(findings);
    println!("wrote {}", out.display());
}

fn fit_statistics(
    path: &Path,
    scenario: &fitsim::scenario::Scenario,
    config: &Config,
    variable: &str,
    sample: bool,
) -> fitsim::Result<()> {
    let observed = load_historical(path)?;
    let result = scenario.run(&config.parameters)?;
    let simulated = observed.simulated(&result, variable)?;
    let hist = observed.values();
    let moments = if sample {
        Moments::Sample
    } else {
        Moments::Population
    };
    let m = error_metrics(&simulated, &hist)?;
    println!(
        "fit of {variable} against {} ({} points)",
        path.display(),
        hist.len()
    );
    println!("  r_squared {:.6}", m.r_squared);
    println!("  mse {:.6e}", m.mse);
    println!("  rmspe {:.6}", m.rmspe);
    match theil_decomposition(&simulated, &hist, moments) {
        Ok(t) => println!("  theil um {:.6} us {:.6} uc {:.6}", t.um, t.us, t.uc),
        Err(e) => println!("  theil: {e}"),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = if cli.verbose {
        log::LevelFilter::Info
    } else {
        log::LevelFilter::Warn
    };
    env_logger::Builder::new()
        .filter_level(level)
        .format_timestamp(None)
        .init();
    match execute(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
