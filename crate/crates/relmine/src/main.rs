use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use relmine::error::{Error, Result};
use relmine::run::{self, RunConfig};

#[derive(Parser)]
#[command(
    name = "relmine",
    version,
    about = "Mines confidence-1 implications from binary tables, ranks attributes by \
             relevance toward a target outcome, and reports cohort analytics"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Encode raw records into a binary table using a binning spec
    Encode(CommonArgs),
    /// Mine minimal implication rules for one target attribute
    Mine(CommonArgs),
    /// Rank attributes by relevance toward a target
    Rank(CommonArgs),
    /// Rank, then re-mine at lower support floors to flag inflated relevances
    Sweep(CommonArgs),
    /// Run configured pathway flows and outcome rate tables over raw records
    Report(CommonArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// JSON config file; explicit flags override its fields
    #[arg(long)]
    config: Option<PathBuf>,
    /// Raw records CSV
    #[arg(long)]
    records: Option<String>,
    /// Binning spec JSON
    #[arg(long)]
    binning_spec: Option<String>,
    /// Name of the record id column
    #[arg(long)]
    id_column: Option<String>,
    /// Pre-encoded binary table CSV
    #[arg(long)]
    table: Option<String>,
    /// Catalog JSON sidecar accompanying --table
    #[arg(long)]
    catalog: Option<String>,
    /// Target attribute name
    #[arg(long)]
    target: Option<String>,
    /// Counter attribute name, or "auto" for the exact complement
    #[arg(long)]
    counter: Option<String>,
    /// Minimum rule support
    #[arg(long)]
    min_support: Option<usize>,
    /// Descending support floors for sweep, comma separated
    #[arg(long, value_delimiter = ',')]
    levels: Option<Vec<usize>>,
    /// Largest antecedent size explored
    #[arg(long)]
    max_antecedent_size: Option<usize>,
    /// Hard cap on rules kept per mining run
    #[arg(long)]
    max_rules: Option<usize>,
    /// How many top-ranked attributes the grouped report keeps
    #[arg(long)]
    top_n: Option<usize>,
    /// Output directory for artifacts and the manifest
    #[arg(long)]
    out: Option<String>,
    /// Worker threads (default: one per core)
    #[arg(long)]
    workers: Option<usize>,
    /// Analytics config JSON (flows and rate tables) for report
    #[arg(long)]
    analytics: Option<PathBuf>,
}

impl CommonArgs {
    fn to_config(&self) -> Result<RunConfig> {
        let mut cfg = RunConfig::default();
        if let Some(path) = &self.config {
            cfg = cfg.overlay(RunConfig::from_json_file(path)?);
        }
        let analytics = match &self.analytics {
            Some(path) => {
                let body = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
                Some(relmine::analytics::AnalyticsConfig::from_json(&body)?)
            }
            None => None,
        };
        Ok(cfg.overlay(RunConfig {
            records: self.records.clone(),
            binning_spec: self.binning_spec.clone(),
            id_column: self.id_column.clone(),
            table: self.table.clone(),
            catalog: self.catalog.clone(),
            target: self.target.clone(),
            counter: self.counter.clone(),
            min_support: self.min_support,
            support_levels: self.levels.clone(),
            max_antecedent_size: self.max_antecedent_size,
            max_rules: self.max_rules,
            top_n: self.top_n,
            out: self.out.clone(),
            workers: self.workers,
            analytics,
        }))
    }
}

fn execute(cli: &Cli) -> Result<()> {
    let (args, name, f): (&CommonArgs, &str, fn(&run::Resolved) -> Result<()>) =
        match &cli.command {
            Command::Encode(a) => (a, "encode", run::cmd_encode),
            Command::Mine(a) => (a, "mine", run::cmd_mine),
            Command::Rank(a) => (a, "rank", run::cmd_rank),
            Command::Sweep(a) => (a, "sweep", run::cmd_sweep),
            Command::Report(a) => (a, "report", run::cmd_report),
        };
    let resolved = args.to_config()?.resolve(name);
    f(&resolved)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
