use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use tcd_core::validation::{run_suite, SuiteOptions};
use tcd_sim::config::{Format, MethodSpec, MonteCarloConfig, Preset, ScenarioConfig};
use tcd_sim::sweep::{run_sweep, SweepParam, SweepSpec};
use tcd_sim::{emit, exit, scenario, CliError};

#[derive(Parser)]
#[command(name = "tcd-sim", version, about = "Two-particle interferometer with environment-induced decoherence")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate one scenario and write maps, profile, visibility and optional Monte Carlo output.
    Run {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, value_enum)]
        preset: Option<Preset>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum)]
        format: Option<Format>,
        /// Monte Carlo seed; enables sampling if the config has none.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_enum)]
        method: Option<MethodSpec>,
        /// Write a matplotlib script next to the CSV output.
        #[arg(long)]
        plot: bool,
    },
    /// Visibility as one environment parameter varies.
    Sweep {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, value_enum)]
        param: SweepParam,
        #[arg(long, allow_hyphen_values = true)]
        start: f64,
        #[arg(long, allow_hyphen_values = true)]
        stop: f64,
        #[arg(long)]
        steps: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum)]
        format: Option<Format>,
    },
    /// Run the invariant and oracle suite on the configured geometry.
    Validate {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
    },
}

fn load(path: &Option<PathBuf>) -> Result<ScenarioConfig, CliError> {
    match path {
        Some(p) => ScenarioConfig::load(p),
        None => Ok(ScenarioConfig::default()),
    }
}

fn run(cli: Cli) -> Result<i32, CliError> {
    match cli.command {
        Command::Run { config, preset, out, format, seed, method, plot } => {
            let mut cfg = load(&config)?;
            if let Some(p) = preset {
                cfg.environment = p.environment();
            }
            if let Some(dir) = out {
                cfg.output.dir = dir;
            }
            if let Some(f) = format {
                cfg.output.format = f;
            }
            if let Some(m) = method {
                cfg.visibility_method = m;
            }
            if let Some(s) = seed {
                cfg.montecarlo.get_or_insert_with(MonteCarloConfig::default).seed = s;
            }
            cfg.output.plot |= plot;
            let bundle = scenario::run_scenario(&cfg)?;
            for w in &bundle.warnings {
                eprintln!("warning: {w}");
            }
            let files = emit::emit(&bundle, &cfg.output.dir, cfg.output.format, cfg.output.plot)?;
            println!("visibility {} = {} (expected {})", match bundle.visibility.method {
                tcd_core::observables::VisibilityMethod::MinMax => "minmax",
                tcd_core::observables::VisibilityMethod::Fourier => "fourier",
            }, bundle.visibility.v, bundle.expected_visibility);
            if let Some(mc) = &bundle.montecarlo {
                println!("monte carlo: {} events, tv {:.3e}, chi2 {:.2} / {} dof", mc.histogram.total, mc.tv, mc.chi2.statistic, mc.chi2.dof);
            }
            for f in files {
                println!("wrote {}", f.display());
            }
            Ok(exit::SUCCESS)
        }
        Command::Sweep { config, param, start, stop, steps, out, format } => {
            let mut cfg = load(&config)?;
            if let Some(dir) = out {
                cfg.output.dir = dir;
            }
            if let Some(f) = format {
                cfg.output.format = f;
            }
            let spec = SweepSpec::new(param, start, stop, steps)?;
            let rows = run_sweep(&cfg, &spec)?;
            print!("{}", emit::sweep_table(&spec, &rows));
            let path = emit::emit_sweep(&spec, &rows, &cfg.output.dir, cfg.output.format)?;
            println!("wrote {}", path.display());
            Ok(exit::SUCCESS)
        }
        Command::Validate { config, seed } => {
            let cfg = load(&config)?;
            let resolved = cfg.resolve()?;
            let mut opts = SuiteOptions::default();
            if let Some(s) = seed {
                opts.seed = s;
            }
            let checks = run_suite(&resolved.geometry, &resolved.grid, &opts);
            for c in &checks {
                println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
            }
            let failed = checks.iter().filter(|c| !c.passed).count();
            println!("{} of {} checks passed", checks.len() - failed, checks.len());
            Ok(if failed == 0 { exit::SUCCESS } else { exit::VALIDATION_FAILED })
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { exit::CONFIG } else { exit::SUCCESS };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
