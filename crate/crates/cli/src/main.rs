use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;

#[derive(Parser)]
#[command(name = "tsn-delay", version, about = "Delay bounds for flows at a FIFO server, in exact arithmetic")]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Args, Clone)]
pub struct Common {
    /// Scenario JSON file, or the name of a bundled scenario (table1, sec7a, sec7b, sec7c, appendixC).
    #[arg(long)]
    pub scenario: Option<String>,
    /// Flow of interest; `all` for every flow. Defaults to the scenario's analysis.flow.
    #[arg(long)]
    pub flow: Option<String>,
    /// Machine-readable CSV output.
    #[arg(long)]
    pub csv: bool,
    /// Unrounded rationals (times in seconds, sizes in bits).
    #[arg(long)]
    pub exact: bool,
    /// Time unit for display: s, ms or us.
    #[arg(long)]
    pub units: Option<String>,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum Family {
    Bit,
    G,
}

#[derive(Subcommand)]
enum Command {
    /// The bound of the flow's native theorem, or the listed methods.
    Bound {
        #[command(flatten)]
        common: Common,
        /// classic, thm-bit, thm-g, thm-pkt, lemma-ag or sweep; repeatable.
        #[arg(long = "method")]
        methods: Vec<String>,
    },
    /// Classic, bit-level, g-regulation and packet-level bounds side by side.
    Compare {
        #[command(flatten)]
        common: Common,
    },
    /// Converts a flow constraint to another family and prints its breakpoints.
    Convert {
        #[command(flatten)]
        common: Common,
        /// Constraint object `{family, kind, params}` as JSON text or `@file`.
        #[arg(long)]
        constraint: Option<String>,
        #[arg(long)]
        lmin: Option<String>,
        #[arg(long)]
        lmax: Option<String>,
        #[arg(long, value_enum)]
        to: Family,
    },
    /// Builds the worst-case trace and compares its delay with the bound.
    /// With --csv the trace itself goes to stdout and the verdict to stderr.
    Tightness {
        #[command(flatten)]
        common: Common,
        /// Slack for fixed-interval flows (default: min interval / 1000).
        #[arg(long)]
        eps: Option<String>,
    },
    /// Tabulates a curve, its limits and pseudo-inverses.
    Curve {
        #[command(flatten)]
        common: Common,
        /// Curve `{points, periodic}` or constraint `{family, kind, params}`, as JSON text or `@file`.
        #[arg(long)]
        spec: Option<String>,
        /// Use the flow's server curve instead of its constraint.
        #[arg(long)]
        service: bool,
        /// Convert the flow's constraint first.
        #[arg(long, value_enum)]
        to: Option<Family>,
        /// Comma-separated evaluation points in base units (s or bits).
        #[arg(long, value_delimiter = ',')]
        at: Vec<String>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let r = match cli.cmd {
        Command::Bound { common, methods } => commands::bound(&common, &methods),
        Command::Compare { common } => commands::compare(&common),
        Command::Convert { common, constraint, lmin, lmax, to } => {
            commands::convert(&common, constraint.as_deref(), lmin.as_deref(), lmax.as_deref(), to)
        }
        Command::Tightness { common, eps } => commands::tightness(&common, eps.as_deref()),
        Command::Curve { common, spec, service, to, at } => commands::curve(&common, spec.as_deref(), service, to, &at),
    };
    match r {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
