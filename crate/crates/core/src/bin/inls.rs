use clap::{Args, Parser, Subcommand};
use inls::app::{run, Command};
use inls::config::Config;
use inls::error::Error;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "inls", version, about = "Radial toolkit for the energy-critical inhomogeneous NLS")]
struct Cli {
    #[command(subcommand)]
    cmd: Sub,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// TOML or JSON configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override a config entry, e.g. `--set evolve.dt=5e-5` (repeatable).
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    sets: Vec<String>,
    #[arg(long, global = true)]
    d: Option<usize>,
    #[arg(long, global = true)]
    b: Option<f64>,
    #[arg(long, global = true)]
    n_cells: Option<usize>,
    #[arg(long, global = true)]
    r_max: Option<f64>,
    #[arg(long, global = true)]
    stretch: Option<String>,
    /// Output directory.
    #[arg(long, global = true, default_value = "inls_out")]
    out: PathBuf,
    /// Exit with status 4 if any built-in check fails.
    #[arg(long, global = true)]
    check: bool,
}

#[derive(Subcommand)]
enum Sub {
    /// Ground state identities and sharp-constant ratios.
    GroundState,
    /// Eigenpair of the linearised operator.
    Spectrum,
    /// Approximate W± family and residual slopes.
    BuildWa,
    /// Time integration with observers.
    Evolve {
        #[arg(long)]
        data: Option<String>,
        /// `start:end`, offsets from the datum time; `end` may be written `x/e0`.
        #[arg(long)]
        t_span: Option<String>,
        #[arg(long)]
        dt: Option<f64>,
    },
    /// Modulation decomposition of stored fields.
    Modulate {
        /// Field containers (override `modulate.inputs`).
        inputs: Vec<String>,
    },
    /// Localised virial identity table.
    Virial,
    /// Lorentz norm table of a stored field (W by default).
    Lorentz {
        #[arg(long)]
        input: Option<String>,
    },
}

fn quoted(s: &str) -> String {
    format!("{s:?}")
}

fn build_config(cli: &Cli) -> Result<(Command, Config), Error> {
    let c = &cli.common;
    let base = match &c.config {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    let mut sets = c.sets.clone();
    if let Some(d) = c.d {
        sets.push(format!("model.d={d}"));
    }
    if let Some(b) = c.b {
        sets.push(format!("model.b={b:?}"));
    }
    if let Some(n) = c.n_cells {
        sets.push(format!("grid.n_cells={n}"));
    }
    if let Some(r) = c.r_max {
        sets.push(format!("grid.r_max={r:?}"));
    }
    if let Some(s) = &c.stretch {
        sets.push(format!("grid.stretch={}", quoted(s)));
    }
    let cmd = match &cli.cmd {
        Sub::GroundState => Command::GroundState,
        Sub::Spectrum => Command::Spectrum,
        Sub::BuildWa => Command::BuildWa,
        Sub::Evolve { data, t_span, dt } => {
            if let Some(x) = data {
                sets.push(format!("evolve.data={}", quoted(x)));
            }
            if let Some(x) = t_span {
                sets.push(format!("evolve.t_span={}", quoted(x)));
            }
            if let Some(x) = dt {
                sets.push(format!("evolve.dt={x:?}"));
            }
            Command::Evolve
        }
        Sub::Modulate { inputs } => {
            if !inputs.is_empty() {
                let list: Vec<String> = inputs.iter().map(|s| quoted(s)).collect();
                sets.push(format!("modulate.inputs=[{}]", list.join(",")));
            }
            Command::Modulate
        }
        Sub::Virial => Command::Virial,
        Sub::Lorentz { input } => {
            if let Some(x) = input {
                sets.push(format!("lorentz.input={}", quoted(x)));
            }
            Command::Lorentz
        }
    };
    Ok((cmd, base.with_overrides(&sets)?))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (cmd, cfg) = match build_config(&cli) {
        Ok(x) => x,
        Err(e) => {
            eprintln!("inls: {e}");
            return ExitCode::from(2);
        }
    };
    match run(cmd, &cfg, &cli.common.out) {
        Ok(out) => {
            println!("{}", serde_json::to_string_pretty(&out.report).expect("serializable"));
            for c in &out.checks {
                println!("[{}] {} {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
            }
            if cli.common.check && !out.all_passed() {
                return ExitCode::from(4);
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("inls: {e}");
            ExitCode::from(match e {
                Error::Config(_) | Error::Io(_) => 2,
                _ => 3,
            })
        }
    }
}
