use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use guardtrack_cli::commands::{self, PolicyChoice, SimOptions, EXIT_INPUT};
use guardtrack_cli::format::{CliError, ScenarioFile};
use guardtrack_cli::serve::Server;

/// Tracking analysis for diagonal guards in simple polygons.
#[derive(Parser)]
#[command(name = "guardtrack", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Scenario file.
    #[arg(long)]
    scenario: PathBuf,
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Critical regions, partition, automaton and trackability verdict.
    /// Exit 0 if trackable, 2 if not, 1 on input errors.
    Analyze {
        #[command(flatten)]
        common: Common,
        /// Intruder/guard speed ratio; overrides the scenario's.
        #[arg(long)]
        ratio: Option<f64>,
    },
    /// Largest speed ratio at which tracking is guaranteed.
    Speedratio {
        #[command(flatten)]
        common: Common,
    },
    /// Step-by-step pursuit. Exit 0 if tracked throughout, 2 on a breach.
    Simulate {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        ratio: Option<f64>,
        /// greedy, witness or script:FILE (a JSON array of [x, y] targets).
        #[arg(long, default_value = "greedy")]
        policy: PolicyChoice,
        #[arg(long)]
        steps: Option<usize>,
        #[arg(long)]
        dt: Option<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Session server on 127.0.0.1; prints the bound address first.
    Serve {
        /// 0 picks a free port.
        #[arg(long, default_value_t = 7878)]
        port: u16,
        /// Directory of NAME.json scenarios; built-in fixtures otherwise.
        #[arg(long)]
        scenario: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> Result<commands::Outcome, CliError> {
    match cli.command {
        Command::Analyze { common, ratio } => commands::analyze(&ScenarioFile::read(&common.scenario)?, ratio, &common.out),
        Command::Speedratio { common } => commands::speedratio(&ScenarioFile::read(&common.scenario)?, &common.out),
        Command::Simulate { common, ratio, policy, steps, dt, seed } => {
            let opts = SimOptions { policy, steps, dt, seed };
            commands::simulate(&ScenarioFile::read(&common.scenario)?, ratio, &opts, &common.out)
        }
        Command::Serve { port, scenario } => {
            let server = Server::bind(("127.0.0.1", port), scenario).map_err(|e| CliError::Io("listen".into(), e))?;
            let addr = server.local_addr().map_err(|e| CliError::Io("listen".into(), e))?;
            println!("listening on {addr}");
            let _ = std::io::stdout().flush();
            server.run().map_err(|e| CliError::Io("accept".into(), e))?;
            Ok(commands::Outcome { code: 0, summary: String::new() })
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(o) => {
            if !o.summary.is_empty() {
                println!("{}", o.summary);
            }
            ExitCode::from(o.code as u8)
        }
        Err(e) => {
            eprintln!("error [{}]: {e}", e.code());
            ExitCode::from(EXIT_INPUT as u8)
        }
    }
}
