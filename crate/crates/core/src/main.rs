//! Command-line front end: emit default specs, run experiments,
//! summarize tables, and redraw plots.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use lawnsim::error::Error;
use lawnsim::harness::{
    emit_plots, resolve_out_dir, run_experiment_parallel, summarize, write_run_artifacts, Case,
    ExperimentSpec, ExtTargetDetail, ResultTable,
};

#[derive(Parser)]
#[command(
    name = "lawnsim",
    version,
    about = "Topology-aware coordination experiments for low-altitude wireless networks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum CaseArg {
    Selection,
    Delivery,
    Exttarget,
}

impl From<CaseArg> for Case {
    fn from(c: CaseArg) -> Case {
        match c {
            CaseArg::Selection => Case::Selection,
            CaseArg::Delivery => Case::Delivery,
            CaseArg::Exttarget => Case::ExtTarget,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Print a ready-to-run default spec for a case.
    Gen {
        #[arg(long, value_enum, default_value = "selection")]
        case: CaseArg,
        /// Write to a file instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run an experiment spec and write table, summary, and plots.
    Run {
        spec: PathBuf,
        /// Override the spec's seed count.
        #[arg(long)]
        seeds: Option<u64>,
        /// Output root (default: $LAWNSIM_OUT_DIR or ./results).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads across seeds.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Print summary statistics of a result table as JSON.
    Summarize { table: PathBuf },
    /// Redraw the case figures from a result table.
    Plot {
        table: PathBuf,
        /// Directory for the SVGs (default: next to the table).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn infer_case(table: &ResultTable) -> Result<Case, Error> {
    if table.column_index("scalar_objective").is_some() {
        Ok(Case::Selection)
    } else if table.column_index("mean_delay_ms").is_some() {
        Ok(Case::Delivery)
    } else if table.column_index("mean_radial_err_m").is_some() {
        Ok(Case::ExtTarget)
    } else {
        Err(Error::InvalidConfig("table columns match no known case".into()))
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Gen { case, out } => {
            let spec = ExperimentSpec::default_for(case.into());
            let json = spec.to_json()?;
            match out {
                Some(path) => std::fs::write(path, json + "\n")?,
                None => println!("{json}"),
            }
            Ok(())
        }
        Command::Run { spec, seeds, out, jobs } => {
            let mut spec = ExperimentSpec::from_json(&std::fs::read_to_string(spec)?)?;
            if let Some(n) = seeds {
                spec.n_seeds = n;
                spec.validate()?;
            }
            let dir = resolve_out_dir(&spec, out.as_deref());
            let run = run_experiment_parallel(&spec, jobs)?;
            let written = write_run_artifacts(&spec, &run, &dir)?;
            for path in written {
                println!("{}", path.display());
            }
            Ok(())
        }
        Command::Summarize { table } => {
            let table = ResultTable::read_csv(&table)?;
            let summary = summarize(&table)?;
            println!("{}", serde_json::to_string_pretty(&summary).map_err(Error::Json)?);
            Ok(())
        }
        Command::Plot { table: table_path, out } => {
            let table = ResultTable::read_csv(&table_path)?;
            let case = infer_case(&table)?;
            let dir = out
                .or_else(|| table_path.parent().map(Path::to_path_buf))
                .unwrap_or_else(|| PathBuf::from("."));
            let detail = if case == Case::ExtTarget {
                let detail_path = table_path
                    .parent()
                    .unwrap_or_else(|| Path::new("."))
                    .join("detail.json");
                let text = std::fs::read_to_string(&detail_path).map_err(|_| {
                    Error::InvalidConfig(format!(
                        "extended-target plots need {} next to the table",
                        detail_path.display()
                    ))
                })?;
                Some(serde_json::from_str::<ExtTargetDetail>(&text)?)
            } else {
                None
            };
            let written = emit_plots(&table, case, detail.as_ref(), &dir)?;
            for path in written {
                println!("{}", path.display());
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}
