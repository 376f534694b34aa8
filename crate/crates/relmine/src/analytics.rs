//! Cohort analytics over raw records: stage-to-stage pathway flows (alluvial
//! data), subgroup outcome rate tables, and deviation-from-mean summaries.
//!
//! All three are driven by declarative classification rules. A rule maps each
//! record to exactly one named class: explicit classes carry a predicate, an
//! optional `otherwise` class (no predicate) absorbs whatever nothing else
//! matched, and a record matching two explicit classes or none at all is an
//! error naming the record and the rule.

use std::collections::HashMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::RawRecordSet;

/// Groups smaller than this are annotated small-n by default; findings on
/// them deserve suspicion.
pub const DEFAULT_SMALL_N: usize = 20;

/// Boolean test over one record's raw cells. Comparisons parse the cell as a
/// number and are false when parsing fails; every leaf predicate is false for
/// a column the records lack.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Predicate {
    Equals { column: String, value: String },
    In { column: String, values: Vec<String> },
    Lt { column: String, value: f64 },
    Le { column: String, value: f64 },
    Gt { column: String, value: f64 },
    Ge { column: String, value: f64 },
    /// Cell is empty or whitespace.
    Missing { column: String },
    All(Vec<Predicate>),
    Any(Vec<Predicate>),
    Not(Box<Predicate>),
}

impl Predicate {
    pub fn eval(&self, records: &RawRecordSet, record: usize) -> bool {
        let cell = |column: &str| records.cell(record, column).map(str::trim);
        let num = |column: &str| cell(column).and_then(|c| c.parse::<f64>().ok());
        match self {
            Predicate::Equals { column, value } => cell(column) == Some(value.as_str()),
            Predicate::In { column, values } => {
                cell(column).is_some_and(|c| values.iter().any(|v| v == c))
            }
            Predicate::Lt { column, value } => num(column).is_some_and(|x| x < *value),
            Predicate::Le { column, value } => num(column).is_some_and(|x| x <= *value),
            Predicate::Gt { column, value } => num(column).is_some_and(|x| x > *value),
            Predicate::Ge { column, value } => num(column).is_some_and(|x| x >= *value),
            Predicate::Missing { column } => cell(column).is_some_and(|c| c.is_empty()),
            Predicate::All(ps) => ps.iter().all(|p| p.eval(records, record)),
            Predicate::Any(ps) => ps.iter().any(|p| p.eval(records, record)),
            Predicate::Not(p) => !p.eval(records, record),
        }
    }
}

/// One class of a classification rule. A missing `when` marks the rule's
/// `otherwise` class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassDef {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub when: Option<Predicate>,
}

impl ClassDef {
    pub fn when(name: &str, predicate: Predicate) -> Self {
        ClassDef {
            name: name.to_string(),
            when: Some(predicate),
        }
    }

    pub fn otherwise(name: &str) -> Self {
        ClassDef {
            name: name.to_string(),
            when: None,
        }
    }
}

/// Named, exhaustive, mutually exclusive classification of records.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassRule {
    pub name: String,
    pub classes: Vec<ClassDef>,
}

impl ClassRule {
    pub fn new(name: &str, classes: Vec<ClassDef>) -> Self {
        ClassRule {
            name: name.to_string(),
            classes,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.classes.is_empty() {
            return Err(Error::InvalidAnalytics(format!(
                "rule {:?} has no classes",
                self.name
            )));
        }
        let mut names = std::collections::HashSet::new();
        let mut otherwise = 0;
        for class in &self.classes {
            if !names.insert(class.name.as_str()) {
                return Err(Error::InvalidAnalytics(format!(
                    "rule {:?}: duplicate class {:?}",
                    self.name, class.name
                )));
            }
            if class.when.is_none() {
                otherwise += 1;
            }
        }
        if otherwise > 1 {
            return Err(Error::InvalidAnalytics(format!(
                "rule {:?} has more than one otherwise class",
                self.name
            )));
        }
        Ok(())
    }

    /// Index of the single class the record falls into. Exactly one explicit
    /// class may match; the `otherwise` class catches records matching none.
    pub fn classify(&self, records: &RawRecordSet, record: usize) -> Result<usize> {
        let mut matched: Option<usize> = None;
        let mut otherwise: Option<usize> = None;
        for (ci, class) in self.classes.iter().enumerate() {
            match &class.when {
                None => otherwise = Some(ci),
                Some(p) => {
                    if p.eval(records, record) {
                        if let Some(first) = matched {
                            return Err(Error::AmbiguousClass {
                                row: records.id(record).to_string(),
                                stage: self.name.clone(),
                                first: self.classes[first].name.clone(),
                                second: class.name.clone(),
                            });
                        }
                        matched = Some(ci);
                    }
                }
            }
        }
        matched.or(otherwise).ok_or_else(|| Error::Unclassified {
            row: records.id(record).to_string(),
            stage: self.name.clone(),
        })
    }

    pub fn class_names(&self) -> Vec<String> {
        self.classes.iter().map(|c| c.name.clone()).collect()
    }
}

/// Ordered stages, each an exhaustive classification; the shape of an
/// alluvial plot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageSpec {
    pub stages: Vec<ClassRule>,
}

impl StageSpec {
    pub fn new(stages: Vec<ClassRule>) -> Self {
        StageSpec { stages }
    }

    pub fn validate(&self) -> Result<()> {
        if self.stages.is_empty() {
            return Err(Error::InvalidAnalytics("no stages".into()));
        }
        for stage in &self.stages {
            stage.validate()?;
        }
        Ok(())
    }
}

/// Flow between adjacent stages: class `from` of `stage` to class `to` of
/// `stage + 1`, all by index.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FlowLink {
    pub stage: usize,
    pub from: usize,
    pub to: usize,
    pub count: usize,
}

/// Node and link counts of a staged cohort flow. Class declaration order is
/// preserved; classes no record reached keep a zero count.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowAggregate {
    pub stages: Vec<String>,
    pub classes: Vec<Vec<String>>,
    /// `counts[s][c]` records in class `c` of stage `s`.
    pub counts: Vec<Vec<usize>>,
    /// Nonzero adjacent-stage flows, ordered by (stage, from, to).
    pub links: Vec<FlowLink>,
    pub record_count: usize,
}

impl FlowAggregate {
    pub fn node_count(&self, stage: &str, class: &str) -> Option<usize> {
        let s = self.stages.iter().position(|n| n == stage)?;
        let c = self.classes[s].iter().position(|n| n == class)?;
        Some(self.counts[s][c])
    }

    pub fn link_count(&self, stage: &str, from: &str, to: &str) -> usize {
        let Some(s) = self.stages.iter().position(|n| n == stage) else {
            return 0;
        };
        let (Some(f), Some(t)) = (
            self.classes[s].iter().position(|n| n == from),
            self.classes
                .get(s + 1)
                .and_then(|next| next.iter().position(|n| n == to)),
        ) else {
            return 0;
        };
        self.links
            .iter()
            .find(|l| l.stage == s && l.from == f && l.to == t)
            .map_or(0, |l| l.count)
    }

    /// Every stage totals to the record count, and each interior node's
    /// inflow and outflow both equal its count.
    pub fn conservation_holds(&self) -> bool {
        for counts in &self.counts {
            if counts.iter().sum::<usize>() != self.record_count {
                return false;
            }
        }
        for (s, counts) in self.counts.iter().enumerate() {
            for (c, &count) in counts.iter().enumerate() {
                if s + 1 < self.stages.len() {
                    let out: usize = self
                        .links
                        .iter()
                        .filter(|l| l.stage == s && l.from == c)
                        .map(|l| l.count)
                        .sum();
                    if out != count {
                        return false;
                    }
                }
                if s > 0 {
                    let inflow: usize = self
                        .links
                        .iter()
                        .filter(|l| l.stage == s - 1 && l.to == c)
                        .map(|l| l.count)
                        .sum();
                    if inflow != count {
                        return false;
                    }
                }
            }
        }
        true
    }

    /// Nodes/links JSON for sankey and alluvial renderers. Node ids are
    /// `<stage>:<class>`.
    pub fn to_json_string(&self) -> String {
        let node_id = |s: usize, c: usize| format!("{}:{}", self.stages[s], self.classes[s][c]);
        let doc = FlowsDoc {
            stages: self.stages.clone(),
            nodes: self
                .counts
                .iter()
                .enumerate()
                .flat_map(|(s, counts)| {
                    counts.iter().enumerate().map(move |(c, &count)| NodeDoc {
                        id: node_id(s, c),
                        stage: self.stages[s].clone(),
                        class: self.classes[s][c].clone(),
                        count,
                    })
                })
                .collect(),
            links: self
                .links
                .iter()
                .map(|l| LinkDoc {
                    source: node_id(l.stage, l.from),
                    target: node_id(l.stage + 1, l.to),
                    value: l.count,
                })
                .collect(),
        };
        let mut s = serde_json::to_string_pretty(&doc).expect("flows serialize");
        s.push('\n');
        s
    }
}

#[derive(Serialize, Deserialize)]
struct FlowsDoc {
    stages: Vec<String>,
    nodes: Vec<NodeDoc>,
    links: Vec<LinkDoc>,
}

#[derive(Serialize, Deserialize)]
struct NodeDoc {
    id: String,
    stage: String,
    class: String,
    count: usize,
}

#[derive(Serialize, Deserialize)]
struct LinkDoc {
    source: String,
    target: String,
    value: usize,
}

/// Re-checks conservation on a serialized flows document: per-stage totals
/// agree, interior node inflow and outflow match node counts.
pub fn validate_flows_json(body: &str) -> Result<()> {
    let doc: FlowsDoc = serde_json::from_str(body)
        .map_err(|e| Error::InvalidAnalytics(format!("flows json: {e}")))?;
    let fail = |msg: String| Err(Error::InvalidAnalytics(msg));
    let stage_pos: HashMap<&str, usize> = doc
        .stages
        .iter()
        .enumerate()
        .map(|(i, s)| (s.as_str(), i))
        .collect();
    let mut stage_totals = vec![0usize; doc.stages.len()];
    let mut inflow: HashMap<&str, usize> = HashMap::new();
    let mut outflow: HashMap<&str, usize> = HashMap::new();
    for link in &doc.links {
        *outflow.entry(link.source.as_str()).or_default() += link.value;
        *inflow.entry(link.target.as_str()).or_default() += link.value;
    }
    for node in &doc.nodes {
        let Some(&s) = stage_pos.get(node.stage.as_str()) else {
            return fail(format!("node {:?} names unknown stage {:?}", node.id, node.stage));
        };
        stage_totals[s] += node.count;
        if s + 1 < doc.stages.len() {
            let out = outflow.get(node.id.as_str()).copied().unwrap_or(0);
            if out != node.count {
                return fail(format!(
                    "node {:?}: outflow {out} differs from count {}",
                    node.id, node.count
                ));
            }
        }
        if s > 0 {
            let inn = inflow.get(node.id.as_str()).copied().unwrap_or(0);
            if inn != node.count {
                return fail(format!(
                    "node {:?}: inflow {inn} differs from count {}",
                    node.id, node.count
                ));
            }
        }
    }
    if let Some((&first, rest)) = stage_totals.split_first() {
        if rest.iter().any(|&t| t != first) {
            return fail(format!("stage totals differ: {stage_totals:?}"));
        }
    }
    Ok(())
}

/// Classifies every record at every stage and counts nodes plus
/// adjacent-stage transitions.
pub fn aggregate_flows(records: &RawRecordSet, spec: &StageSpec) -> Result<FlowAggregate> {
    spec.validate()?;
    if records.is_empty() {
        return Err(Error::NoRecords);
    }
    let n_stages = spec.stages.len();
    let mut counts: Vec<Vec<usize>> = spec
        .stages
        .iter()
        .map(|s| vec![0; s.classes.len()])
        .collect();
    let mut link_counts: HashMap<(usize, usize, usize), usize> = HashMap::new();
    for i in 0..records.len() {
        let mut path = Vec::with_capacity(n_stages);
        for stage in &spec.stages {
            path.push(stage.classify(records, i)?);
        }
        for (s, &c) in path.iter().enumerate() {
            counts[s][c] += 1;
        }
        for (s, pair) in path.windows(2).enumerate() {
            *link_counts.entry((s, pair[0], pair[1])).or_default() += 1;
        }
    }
    let mut links: Vec<FlowLink> = link_counts
        .into_iter()
        .map(|((stage, from, to), count)| FlowLink {
            stage,
            from,
            to,
            count,
        })
        .collect();
    links.sort_by_key(|l| (l.stage, l.from, l.to));
    Ok(FlowAggregate {
        stages: spec.stages.iter().map(|s| s.name.clone()).collect(),
        classes: spec.stages.iter().map(|s| s.class_names()).collect(),
        counts,
        links,
        record_count: records.len(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RateMode {
    /// Outcome classes are ordered time horizons; each percentage accumulates
    /// everything up to its horizon. The final class is terminal (never
    /// reached the outcome) and stays disjoint.
    Cumulative,
    /// Each class percentage counts only its own records; a group's row sums
    /// to 100.
    Disjoint,
}

/// One group's row: raw outcome counts and percentages of the group size.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupRates {
    pub label: String,
    pub count: usize,
    pub small_n: bool,
    pub counts: Vec<usize>,
    pub percents: Vec<f64>,
}

/// Outcome percentages per group of a partitioning dimension, plus the same
/// row over all records. Groups are ordered by label ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct RateTable {
    pub dimension: String,
    pub outcome_dimension: String,
    pub mode: RateMode,
    pub outcome_classes: Vec<String>,
    pub small_n_threshold: usize,
    pub groups: Vec<GroupRates>,
    pub overall: GroupRates,
}

fn percents_for(counts: &[usize], n: usize, mode: RateMode) -> Vec<f64> {
    if n == 0 {
        return vec![0.0; counts.len()];
    }
    let pct = |c: usize| 100.0 * c as f64 / n as f64;
    match mode {
        RateMode::Disjoint => counts.iter().map(|&c| pct(c)).collect(),
        RateMode::Cumulative => {
            let mut acc = 0;
            let mut out = Vec::with_capacity(counts.len());
            for (i, &c) in counts.iter().enumerate() {
                if i + 1 == counts.len() {
                    out.push(pct(c));
                } else {
                    acc += c;
                    out.push(pct(acc));
                }
            }
            out
        }
    }
}

/// Cross-tabulates groups against outcomes and renders percentages in the
/// requested mode. Groups smaller than `small_n_threshold` are annotated.
pub fn rate_table(
    records: &RawRecordSet,
    group_by: &ClassRule,
    outcomes: &ClassRule,
    mode: RateMode,
    small_n_threshold: usize,
) -> Result<RateTable> {
    group_by.validate()?;
    outcomes.validate()?;
    if records.is_empty() {
        return Err(Error::NoRecords);
    }
    if mode == RateMode::Cumulative && outcomes.classes.len() < 2 {
        return Err(Error::InvalidAnalytics(
            "cumulative mode needs at least one horizon class plus the terminal class".into(),
        ));
    }
    let n_outcomes = outcomes.classes.len();
    let mut cells = vec![vec![0usize; n_outcomes]; group_by.classes.len()];
    let mut totals = vec![0usize; n_outcomes];
    for i in 0..records.len() {
        let g = group_by.classify(records, i)?;
        let o = outcomes.classify(records, i)?;
        cells[g][o] += 1;
        totals[o] += 1;
    }
    let row = |label: String, counts: Vec<usize>| {
        let count = counts.iter().sum();
        GroupRates {
            label,
            small_n: count < small_n_threshold,
            percents: percents_for(&counts, count, mode),
            counts,
            count,
        }
    };
    let mut groups: Vec<GroupRates> = group_by
        .classes
        .iter()
        .zip(cells)
        .map(|(class, counts)| row(class.name.clone(), counts))
        .collect();
    groups.sort_by(|a, b| a.label.cmp(&b.label));
    let overall = row("ALL".into(), totals);
    Ok(RateTable {
        dimension: group_by.name.clone(),
        outcome_dimension: outcomes.name.clone(),
        mode,
        outcome_classes: outcomes.class_names(),
        small_n_threshold,
        groups,
        overall,
    })
}

impl RateTable {
    pub fn group(&self, label: &str) -> Option<&GroupRates> {
        self.groups.iter().find(|g| g.label == label)
    }

    /// CSV with columns group, count, small_n, then one percentage column per
    /// outcome class. Percentages carry two decimals.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        let err = |e: csv::Error| Error::BadTableCsv(e.to_string());
        let mut header = vec!["group".to_string(), "count".into(), "small_n".into()];
        header.extend(self.outcome_classes.iter().cloned());
        wtr.write_record(&header).map_err(err)?;
        for g in &self.groups {
            let mut rec = vec![g.label.clone(), g.count.to_string(), g.small_n.to_string()];
            rec.extend(g.percents.iter().map(|p| format!("{p:.2}")));
            wtr.write_record(&rec).map_err(err)?;
        }
        wtr.flush().map_err(|e| Error::BadTableCsv(e.to_string()))?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeviationRow {
    pub label: String,
    pub count: usize,
    /// Class percentage minus the all-record percentage, per outcome.
    pub deviations: Vec<f64>,
}

/// Signed per-class deviations from the whole-cohort outcome percentages.
#[derive(Debug, Clone, PartialEq)]
pub struct DeviationTable {
    pub category: String,
    pub outcome_classes: Vec<String>,
    pub rows: Vec<DeviationRow>,
}

/// Per class and outcome: class percentage minus the overall percentage.
/// Weighted by class share, each outcome's deviations sum to zero.
pub fn deviation_from_mean(rates: &RateTable) -> DeviationTable {
    DeviationTable {
        category: rates.dimension.clone(),
        outcome_classes: rates.outcome_classes.clone(),
        rows: rates
            .groups
            .iter()
            .map(|g| DeviationRow {
                label: g.label.clone(),
                count: g.count,
                deviations: g
                    .percents
                    .iter()
                    .zip(&rates.overall.percents)
                    .map(|(p, o)| p - o)
                    .collect(),
            })
            .collect(),
    }
}

impl DeviationTable {
    pub fn row(&self, label: &str) -> Option<&DeviationRow> {
        self.rows.iter().find(|r| r.label == label)
    }

    /// CSV with columns class, count, then one signed deviation column per
    /// outcome.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        let err = |e: csv::Error| Error::BadTableCsv(e.to_string());
        let mut header = vec!["class".to_string(), "count".into()];
        header.extend(self.outcome_classes.iter().cloned());
        wtr.write_record(&header).map_err(err)?;
        for r in &self.rows {
            let mut rec = vec![r.label.clone(), r.count.to_string()];
            rec.extend(r.deviations.iter().map(|d| format!("{d:+.2}")));
            wtr.write_record(&rec).map_err(err)?;
        }
        wtr.flush().map_err(|e| Error::BadTableCsv(e.to_string()))?;
        Ok(())
    }
}

/// Batch configuration for a reporting run: named flow aggregations and rate
/// tables, the latter optionally paired with a deviation table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyticsConfig {
    #[serde(default)]
    pub flows: Vec<FlowConfig>,
    #[serde(default)]
    pub rate_tables: Vec<RateTableConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowConfig {
    pub name: String,
    #[serde(flatten)]
    pub spec: StageSpec,
}

fn default_small_n() -> usize {
    DEFAULT_SMALL_N
}

fn default_mode() -> RateMode {
    RateMode::Cumulative
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateTableConfig {
    pub name: String,
    pub group_by: ClassRule,
    pub outcomes: ClassRule,
    #[serde(default = "default_mode")]
    pub mode: RateMode,
    #[serde(default = "default_small_n")]
    pub small_n_threshold: usize,
    /// Also derive and write the deviation-from-mean table.
    #[serde(default)]
    pub deviation: bool,
}

impl AnalyticsConfig {
    pub fn from_json(body: &str) -> Result<Self> {
        let cfg: AnalyticsConfig = serde_json::from_str(body)
            .map_err(|e| Error::InvalidAnalytics(format!("json: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let mut names = std::collections::HashSet::new();
        for f in &self.flows {
            if !names.insert(format!("flows:{}", f.name)) {
                return Err(Error::InvalidAnalytics(format!(
                    "duplicate flow name {:?}",
                    f.name
                )));
            }
            f.spec.validate()?;
        }
        for r in &self.rate_tables {
            if !names.insert(format!("rates:{}", r.name)) {
                return Err(Error::InvalidAnalytics(format!(
                    "duplicate rate table name {:?}",
                    r.name
                )));
            }
            r.group_by.validate()?;
            r.outcomes.validate()?;
        }
        Ok(())
    }
}
