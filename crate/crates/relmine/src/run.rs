//! Batch run orchestration: merges configuration from defaults, a JSON config
//! file, and flags; executes one command; writes its artifacts plus a
//! `manifest.json` naming tool version, resolved config, config hash, and
//! input digests. Runs carry no timestamps, so re-running a command over the
//! same inputs reproduces every artifact byte for byte.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::analytics::{
    aggregate_flows, deviation_from_mean, rate_table, validate_flows_json, AnalyticsConfig,
};
use crate::chart::relevance_bar_chart;
use crate::error::{Error, Result};
use crate::ingest::{encode, BinningSpec, RawRecordSet};
use crate::miner::{mine, MineLimits};
use crate::relevance::{
    group_by_category, rank_at, relevance_rank, sweep_at, sweep_min_support, write_relevance_csv,
    RankRun,
};
use crate::table::{hex, BinaryTable};

pub const DEFAULT_MIN_SUPPORT: usize = 10;
pub const DEFAULT_TOP_N: usize = 30;
/// Counter value meaning "use the exact complement, synthesizing it if the
/// catalog lacks one".
pub const AUTO_COUNTER: &str = "auto";

/// Partial run configuration. Every field is optional so that layers can be
/// overlaid: built-in defaults, then a config file, then command-line flags.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Raw records CSV, the input of `encode` and `report`.
    pub records: Option<String>,
    pub binning_spec: Option<String>,
    pub id_column: Option<String>,
    /// Pre-encoded binary table CSV, the input of `mine`, `rank`, `sweep`.
    pub table: Option<String>,
    pub catalog: Option<String>,
    pub target: Option<String>,
    pub counter: Option<String>,
    pub min_support: Option<usize>,
    /// Descending support floors for `sweep`; the first is the working floor.
    pub support_levels: Option<Vec<usize>>,
    pub max_antecedent_size: Option<usize>,
    pub max_rules: Option<usize>,
    pub top_n: Option<usize>,
    pub out: Option<String>,
    pub workers: Option<usize>,
    pub analytics: Option<AnalyticsConfig>,
}

impl RunConfig {
    pub fn from_json_file(path: &Path) -> Result<Self> {
        let body = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&body).map_err(|e| Error::BadJson {
            path: path.to_path_buf(),
            message: e.to_string(),
        })
    }

    /// Field-wise overlay; set fields of `over` replace those of `self`.
    pub fn overlay(mut self, over: RunConfig) -> RunConfig {
        macro_rules! take {
            ($($field:ident),*) => {
                $(if over.$field.is_some() { self.$field = over.$field; })*
            };
        }
        take!(
            records,
            binning_spec,
            id_column,
            table,
            catalog,
            target,
            counter,
            min_support,
            support_levels,
            max_antecedent_size,
            max_rules,
            top_n,
            out,
            workers,
            analytics
        );
        self
    }

    /// Fills unset fields with defaults. The result is what gets hashed into
    /// the manifest.
    pub fn resolve(&self, command: &str) -> Resolved {
        let limits = MineLimits::default();
        Resolved {
            command: command.to_string(),
            records: self.records.clone(),
            binning_spec: self.binning_spec.clone(),
            id_column: self.id_column.clone().unwrap_or_else(|| "id".into()),
            table: self.table.clone(),
            catalog: self.catalog.clone(),
            target: self.target.clone(),
            counter: self.counter.clone().unwrap_or_else(|| AUTO_COUNTER.into()),
            min_support: self.min_support.unwrap_or(DEFAULT_MIN_SUPPORT),
            support_levels: self.support_levels.clone(),
            max_antecedent_size: self.max_antecedent_size.unwrap_or(limits.max_antecedent_size),
            max_rules: self.max_rules.unwrap_or(limits.max_rules),
            top_n: self.top_n.unwrap_or(DEFAULT_TOP_N),
            out: self.out.clone().unwrap_or_else(|| ".".into()),
            workers: self.workers,
            analytics: self.analytics.clone(),
        }
    }
}

/// Fully resolved configuration of one run; serialized into the manifest.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Resolved {
    pub command: String,
    pub records: Option<String>,
    pub binning_spec: Option<String>,
    pub id_column: String,
    pub table: Option<String>,
    pub catalog: Option<String>,
    pub target: Option<String>,
    pub counter: String,
    pub min_support: usize,
    pub support_levels: Option<Vec<usize>>,
    pub max_antecedent_size: usize,
    pub max_rules: usize,
    pub top_n: usize,
    pub out: String,
    /// Execution detail only; artifact bytes never depend on it, so it stays
    /// out of the manifest and config hash.
    #[serde(skip)]
    pub workers: Option<usize>,
    pub analytics: Option<AnalyticsConfig>,
}

impl Resolved {
    pub fn limits(&self) -> MineLimits {
        MineLimits {
            max_antecedent_size: self.max_antecedent_size,
            max_rules: self.max_rules,
        }
    }

    fn target_name(&self) -> Result<&str> {
        self.target
            .as_deref()
            .ok_or_else(|| Error::MissingInput("target attribute (--target)".into()))
    }

    pub fn config_hash(&self) -> String {
        let body = serde_json::to_string(self).expect("config serialize");
        hex(&Sha256::digest(body.as_bytes()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
struct InputDigest {
    path: String,
    sha256: String,
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    command: &'a str,
    config_hash: String,
    config: &'a Resolved,
    inputs: &'a [InputDigest],
    outputs: &'a [String],
}

/// Collects input digests and artifact names while writing files under the
/// run's output directory; `finish` seals them into `manifest.json`.
struct RunWriter {
    out_dir: PathBuf,
    inputs: Vec<InputDigest>,
    outputs: Vec<String>,
}

impl RunWriter {
    fn new(resolved: &Resolved) -> Result<Self> {
        let out_dir = PathBuf::from(&resolved.out);
        fs::create_dir_all(&out_dir).map_err(|e| Error::io(&out_dir, e))?;
        Ok(RunWriter {
            out_dir,
            inputs: Vec::new(),
            outputs: Vec::new(),
        })
    }

    fn read_input(&mut self, path: &str) -> Result<String> {
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        self.inputs.push(InputDigest {
            path: path.to_string(),
            sha256: hex(&Sha256::digest(&bytes)),
        });
        String::from_utf8(bytes).map_err(|e| {
            Error::io(
                path,
                std::io::Error::new(std::io::ErrorKind::InvalidData, e),
            )
        })
    }

    fn write(&mut self, name: &str, bytes: &[u8]) -> Result<PathBuf> {
        let path = self.out_dir.join(name);
        fs::write(&path, bytes).map_err(|e| Error::io(&path, e))?;
        self.outputs.push(name.to_string());
        Ok(path)
    }

    fn finish(mut self, resolved: &Resolved) -> Result<()> {
        self.inputs.sort_by(|a, b| a.path.cmp(&b.path));
        self.inputs.dedup();
        self.outputs.sort();
        let manifest = Manifest {
            tool: "relmine",
            version: env!("CARGO_PKG_VERSION"),
            command: &resolved.command,
            config_hash: resolved.config_hash(),
            config: resolved,
            inputs: &self.inputs,
            outputs: &self.outputs,
        };
        let mut body = serde_json::to_string_pretty(&manifest).expect("manifest serialize");
        body.push('\n');
        let path = self.out_dir.join("manifest.json");
        fs::write(&path, body).map_err(|e| Error::io(&path, e))
    }
}

/// Artifact-name fragment: anything outside `[A-Za-z0-9._-]` becomes `_`.
fn sanitize(name: &str) -> String {
    let s: String = name
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || matches!(c, '.' | '_' | '-') {
                c
            } else {
                '_'
            }
        })
        .collect();
    if s.is_empty() {
        "_".into()
    } else {
        s
    }
}

fn with_pool<T: Send>(
    workers: Option<usize>,
    f: impl FnOnce() -> Result<T> + Send,
) -> Result<T> {
    match workers {
        None => f(),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::InvalidArgument(format!("workers: {e}")))?
            .install(f),
    }
}

fn load_records(resolved: &Resolved, w: &mut RunWriter) -> Result<RawRecordSet> {
    let path = resolved
        .records
        .as_deref()
        .ok_or_else(|| Error::MissingInput("raw records csv (--records)".into()))?;
    RawRecordSet::from_csv_str(&w.read_input(path)?, &resolved.id_column)
}

fn load_table(resolved: &Resolved, w: &mut RunWriter) -> Result<BinaryTable> {
    if let Some(path) = resolved.table.as_deref() {
        let body = w.read_input(path)?;
        let catalog = match resolved.catalog.as_deref() {
            Some(c) => Some(w.read_input(c)?),
            None => None,
        };
        return BinaryTable::read_csv(body.as_bytes(), catalog.as_deref());
    }
    if resolved.records.is_some() {
        let spec_path = resolved
            .binning_spec
            .as_deref()
            .ok_or_else(|| Error::MissingInput("binning spec (--binning-spec)".into()))?;
        let spec = BinningSpec::from_json(&w.read_input(spec_path)?)?;
        let records = load_records(resolved, w)?;
        return encode(&records, &spec);
    }
    Err(Error::MissingInput(
        "a table (--table) or raw records plus a binning spec (--records, --binning-spec)".into(),
    ))
}

/// Encodes raw records and writes `table.csv` + `catalog.json`.
pub fn cmd_encode(resolved: &Resolved) -> Result<()> {
    let mut w = RunWriter::new(resolved)?;
    let spec_path = resolved
        .binning_spec
        .as_deref()
        .ok_or_else(|| Error::MissingInput("binning spec (--binning-spec)".into()))?;
    let spec = BinningSpec::from_json(&w.read_input(spec_path)?)?;
    let records = load_records(resolved, &mut w)?;
    let table = encode(&records, &spec)?;
    w.write("table.csv", table.to_csv_string()?.as_bytes())?;
    w.write("catalog.json", table.catalog_json_string()?.as_bytes())?;
    w.finish(resolved)?;
    println!("{} rows, {} attributes", table.row_count(), table.attr_count());
    Ok(())
}

/// Mines the target's rule set and writes it as JSON lines.
pub fn cmd_mine(resolved: &Resolved) -> Result<()> {
    with_pool(resolved.workers, || {
        let mut w = RunWriter::new(resolved)?;
        let table = load_table(resolved, &mut w)?;
        let target_name = resolved.target_name()?;
        let target = table.catalog().require(target_name)?;
        let set = mine(&table, target, resolved.min_support, &resolved.limits())?;
        let mut buf = Vec::new();
        set.write_jsonl(&table, &mut buf)?;
        w.write(&format!("rules_{}.jsonl", sanitize(target_name)), &buf)?;
        w.finish(resolved)?;
        if set.truncated {
            eprintln!("warning: search budget exhausted, rule set truncated");
        }
        println!(
            "{} rules for {} at min support {}",
            set.len(),
            target_name,
            resolved.min_support
        );
        Ok(())
    })
}

fn rank_meta_json(run: &RankRun) -> String {
    #[derive(Serialize)]
    struct RankMeta<'a> {
        target: &'a str,
        counter: &'a str,
        threshold: f64,
        support_levels: &'a [usize],
        rule_count_target: usize,
        rule_count_counter: usize,
        truncated_target: bool,
        truncated_counter: bool,
        empty_edge_target: bool,
        empty_edge_counter: bool,
        table_fingerprint: &'a str,
    }
    let cat = run.table.catalog();
    let meta = RankMeta {
        target: &cat.def(run.report.target).name,
        counter: &cat.def(run.report.counter).name,
        threshold: run.report.threshold,
        support_levels: &run.report.support_levels,
        rule_count_target: run.rules_target.len(),
        rule_count_counter: run.rules_counter.len(),
        truncated_target: run.rules_target.truncated,
        truncated_counter: run.rules_counter.truncated,
        empty_edge_target: run.rules_target.empty_edge,
        empty_edge_counter: run.rules_counter.empty_edge,
        table_fingerprint: &run.rules_target.table_fingerprint,
    };
    let mut body = serde_json::to_string_pretty(&meta).expect("meta serialize");
    body.push('\n');
    body
}

fn write_rank_artifacts(resolved: &Resolved, w: &mut RunWriter, run: &RankRun) -> Result<()> {
    let cat = run.table.catalog();
    let target_name = cat.def(run.report.target).name.clone();
    let counter_name = cat.def(run.report.counter).name.clone();
    for (set, name) in [
        (&run.rules_target, &target_name),
        (&run.rules_counter, &counter_name),
    ] {
        let mut buf = Vec::new();
        set.write_jsonl(&run.table, &mut buf)?;
        w.write(&format!("rules_{}.jsonl", sanitize(name)), &buf)?;
    }
    let mut buf = Vec::new();
    write_relevance_csv(&run.report, &run.table, &mut buf)?;
    w.write("relevance.csv", &buf)?;
    let grouped = group_by_category(&run.report, &run.table, resolved.top_n);
    let mut json = serde_json::to_string_pretty(&grouped).expect("report serialize");
    json.push('\n');
    w.write("top_attributes.json", json.as_bytes())?;
    w.write(
        "relevance_chart.svg",
        relevance_bar_chart(&grouped).as_bytes(),
    )?;
    w.write("rank_meta.json", rank_meta_json(run).as_bytes())?;
    if run.rules_target.truncated || run.rules_counter.truncated {
        eprintln!("warning: search budget exhausted, rule sets truncated");
    }
    Ok(())
}

fn rank_or_sweep(resolved: &Resolved, sweep: bool) -> Result<()> {
    with_pool(resolved.workers, || {
        let mut w = RunWriter::new(resolved)?;
        let table = load_table(resolved, &mut w)?;
        let target_name = resolved.target_name()?;
        let target = table.catalog().require(target_name)?;
        let limits = resolved.limits();
        let auto = resolved.counter == AUTO_COUNTER;
        let run = if sweep {
            let levels = resolved.support_levels.clone().ok_or_else(|| {
                Error::MissingInput("support levels (--levels or support_levels)".into())
            })?;
            if auto {
                sweep_min_support(&table, target, &levels, &limits)?
            } else {
                let counter = table.catalog().require(&resolved.counter)?;
                sweep_at(table, target, counter, &levels, &limits)?
            }
        } else if auto {
            relevance_rank(&table, target, resolved.min_support, &limits)?
        } else {
            let counter = table.catalog().require(&resolved.counter)?;
            rank_at(table, target, counter, resolved.min_support, &limits)?
        };
        write_rank_artifacts(resolved, &mut w, &run)?;
        w.finish(resolved)?;
        println!(
            "ranked {} attributes for {} (threshold {:.2}, {} + {} rules)",
            run.report.ranking.len(),
            target_name,
            run.report.threshold,
            run.rules_target.len(),
            run.rules_counter.len()
        );
        Ok(())
    })
}

/// Mines target and counter, ranks attributes, and writes rule sets, the
/// relevance CSV, the grouped top-N JSON, the SVG chart, and run metadata.
pub fn cmd_rank(resolved: &Resolved) -> Result<()> {
    rank_or_sweep(resolved, false)
}

/// [`cmd_rank`] across descending support floors, flagging inflated
/// relevances.
pub fn cmd_sweep(resolved: &Resolved) -> Result<()> {
    rank_or_sweep(resolved, true)
}

/// Runs the configured flow aggregations and rate tables over raw records.
pub fn cmd_report(resolved: &Resolved) -> Result<()> {
    let mut w = RunWriter::new(resolved)?;
    let cfg = resolved
        .analytics
        .as_ref()
        .ok_or_else(|| Error::MissingInput("analytics config (flows or rate tables)".into()))?;
    cfg.validate()?;
    if cfg.flows.is_empty() && cfg.rate_tables.is_empty() {
        return Err(Error::MissingInput(
            "analytics config with at least one flow or rate table".into(),
        ));
    }
    let records = load_records(resolved, &mut w)?;
    let mut artifacts = 0usize;
    for flow in &cfg.flows {
        let agg = aggregate_flows(&records, &flow.spec)?;
        let path = w.write(
            &format!("flows_{}.json", sanitize(&flow.name)),
            agg.to_json_string().as_bytes(),
        )?;
        let body = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        validate_flows_json(&body)?;
        artifacts += 1;
    }
    for rt in &cfg.rate_tables {
        let rates = rate_table(
            &records,
            &rt.group_by,
            &rt.outcomes,
            rt.mode,
            rt.small_n_threshold,
        )?;
        let mut buf = Vec::new();
        rates.write_csv(&mut buf)?;
        w.write(&format!("rates_{}.csv", sanitize(&rt.name)), &buf)?;
        artifacts += 1;
        if rt.deviation {
            let dev = deviation_from_mean(&rates);
            let mut buf = Vec::new();
            dev.write_csv(&mut buf)?;
            w.write(&format!("deviations_{}.csv", sanitize(&rt.name)), &buf)?;
            artifacts += 1;
        }
    }
    w.finish(resolved)?;
    println!("wrote {artifacts} analytics artifacts");
    Ok(())
}
