//! Raw record ingestion: a declarative binning spec turns text columns
//! (grades, GPAs, categories) into the one-hot attributes of a
//! [`BinaryTable`].
//!
//! Every column rule activates at most one attribute per record, so binned
//! columns stay mutually exclusive by construction. Missing cells either
//! become an explicit `<col>=MISSING` attribute or activate nothing,
//! per-column. Encoding is deterministic: the catalog follows spec
//! declaration order, with observed values of open categorical columns
//! sorted.

use std::collections::{HashMap, HashSet};
use std::io::Read;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::table::{AttributeCatalog, AttributeDef, BinaryTable};

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MissingPolicy {
    /// Empty cell activates `<col>=MISSING`.
    #[default]
    Emit,
    /// Empty cell activates nothing for this column.
    Omit,
}

/// One named bin of an ordinal rule. A raw value matches on membership in
/// `values`, or, failing that, on the numeric interval `[lo, hi)` when both
/// bounds are given.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bin {
    pub name: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub values: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lo: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hi: Option<f64>,
}

impl Bin {
    pub fn of_values(name: &str, values: &[&str]) -> Self {
        Bin {
            name: name.to_string(),
            values: values.iter().map(|v| v.to_string()).collect(),
            lo: None,
            hi: None,
        }
    }

    fn matches(&self, raw: &str) -> bool {
        if self.values.iter().any(|v| v == raw) {
            return true;
        }
        if let (Some(lo), Some(hi)) = (self.lo, self.hi) {
            if let Ok(x) = raw.parse::<f64>() {
                return lo <= x && x < hi;
            }
        }
        false
    }
}

/// Half-open numeric interval `[lo, hi)` with a rendered name such as
/// `3.3-3.6`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NumericRange {
    pub name: String,
    pub lo: f64,
    pub hi: f64,
}

impl NumericRange {
    pub fn new(name: &str, lo: f64, hi: f64) -> Self {
        NumericRange {
            name: name.to_string(),
            lo,
            hi,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RuleKind {
    /// One attribute `<col>=<value>` per distinct value. With `values` given
    /// the vocabulary is closed and anything else is a binning error;
    /// otherwise values are learned from the records.
    Categorical {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        values: Option<Vec<String>>,
    },
    /// Ordered named bins; first matching bin wins.
    Ordinal { bins: Vec<Bin> },
    /// Ordered, non-overlapping numeric intervals.
    Numeric { ranges: Vec<NumericRange> },
    /// Column contributes no attributes.
    Skip,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnRule {
    pub column: String,
    /// Catalog category for the column's attributes; defaults to the column
    /// name.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub category: Option<String>,
    pub kind: RuleKind,
    #[serde(default)]
    pub missing: MissingPolicy,
    /// Set false on outcome columns so their attributes cannot enter
    /// antecedents.
    #[serde(default = "default_true")]
    pub antecedent_eligible: bool,
}

impl ColumnRule {
    fn new(column: &str, kind: RuleKind) -> Self {
        ColumnRule {
            column: column.to_string(),
            category: None,
            kind,
            missing: MissingPolicy::default(),
            antecedent_eligible: true,
        }
    }

    pub fn categorical(column: &str) -> Self {
        ColumnRule::new(column, RuleKind::Categorical { values: None })
    }

    pub fn closed_categorical(column: &str, values: &[&str]) -> Self {
        ColumnRule::new(
            column,
            RuleKind::Categorical {
                values: Some(values.iter().map(|v| v.to_string()).collect()),
            },
        )
    }

    pub fn ordinal(column: &str, bins: Vec<Bin>) -> Self {
        ColumnRule::new(column, RuleKind::Ordinal { bins })
    }

    pub fn numeric(column: &str, ranges: Vec<NumericRange>) -> Self {
        ColumnRule::new(column, RuleKind::Numeric { ranges })
    }

    pub fn skip(column: &str) -> Self {
        ColumnRule::new(column, RuleKind::Skip)
    }

    pub fn with_category(mut self, category: &str) -> Self {
        self.category = Some(category.to_string());
        self
    }

    pub fn with_missing(mut self, missing: MissingPolicy) -> Self {
        self.missing = missing;
        self
    }

    /// Marks the column as an outcome: encoded normally, never usable in an
    /// antecedent.
    pub fn outcome(mut self) -> Self {
        self.antecedent_eligible = false;
        self
    }

    fn category_label(&self) -> &str {
        self.category.as_deref().unwrap_or(&self.column)
    }
}

/// Letter-grade bins keeping the C signs split: A and B absorb their signed
/// variants, C+/C/C− stay separate, and DFWI absorbs D grades, F, withdrawal,
/// and incomplete.
pub fn grade_bins() -> Vec<Bin> {
    vec![
        Bin::of_values("A", &["A-", "A", "A+"]),
        Bin::of_values("B", &["B-", "B", "B+"]),
        Bin::of_values("C+", &["C+"]),
        Bin::of_values("C", &["C"]),
        Bin::of_values("C-", &["C-"]),
        Bin::of_values("DFWI", &["D+", "D", "D-", "F", "W", "I"]),
    ]
}

/// Coarser grade bins: every letter merges its signed variants.
pub fn grade_bins_coarse() -> Vec<Bin> {
    vec![
        Bin::of_values("A", &["A-", "A", "A+"]),
        Bin::of_values("B", &["B-", "B", "B+"]),
        Bin::of_values("C", &["C-", "C", "C+"]),
        Bin::of_values("DFWI", &["D+", "D", "D-", "F", "W", "I"]),
    ]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinningSpec {
    pub id_column: String,
    pub columns: Vec<ColumnRule>,
}

impl BinningSpec {
    pub fn new(id_column: &str, columns: Vec<ColumnRule>) -> Result<Self> {
        let spec = BinningSpec {
            id_column: id_column.to_string(),
            columns,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn from_json(body: &str) -> Result<Self> {
        let spec: BinningSpec = serde_json::from_str(body)
            .map_err(|e| Error::InvalidSpec(format!("json: {e}")))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_json_string(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("spec serializes");
        s.push('\n');
        s
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::InvalidSpec(msg));
        if self.id_column.trim().is_empty() {
            return fail("id_column is empty".into());
        }
        let mut seen = HashSet::new();
        for rule in &self.columns {
            if rule.column == self.id_column {
                return fail(format!("id column {:?} also has a rule", rule.column));
            }
            if !seen.insert(rule.column.as_str()) {
                return fail(format!("column {:?} has two rules", rule.column));
            }
            match &rule.kind {
                RuleKind::Categorical { .. } | RuleKind::Skip => {}
                RuleKind::Ordinal { bins } => {
                    if bins.is_empty() {
                        return fail(format!("column {:?}: no bins", rule.column));
                    }
                    let mut names = HashSet::new();
                    for bin in bins {
                        if !names.insert(bin.name.as_str()) {
                            return fail(format!(
                                "column {:?}: duplicate bin name {:?}",
                                rule.column, bin.name
                            ));
                        }
                        match (bin.lo, bin.hi) {
                            (Some(lo), Some(hi)) if lo >= hi => {
                                return fail(format!(
                                    "column {:?}, bin {:?}: lo {lo} is not below hi {hi}",
                                    rule.column, bin.name
                                ))
                            }
                            (Some(_), None) | (None, Some(_)) => {
                                return fail(format!(
                                    "column {:?}, bin {:?}: interval needs both lo and hi",
                                    rule.column, bin.name
                                ))
                            }
                            _ => {}
                        }
                        if bin.values.is_empty() && bin.lo.is_none() {
                            return fail(format!(
                                "column {:?}, bin {:?}: no values and no interval",
                                rule.column, bin.name
                            ));
                        }
                    }
                }
                RuleKind::Numeric { ranges } => {
                    if ranges.is_empty() {
                        return fail(format!("column {:?}: no ranges", rule.column));
                    }
                    let mut names = HashSet::new();
                    for r in ranges {
                        if !names.insert(r.name.as_str()) {
                            return fail(format!(
                                "column {:?}: duplicate range name {:?}",
                                rule.column, r.name
                            ));
                        }
                        if r.lo >= r.hi {
                            return fail(format!(
                                "column {:?}, range {:?}: lo {} is not below hi {}",
                                rule.column, r.name, r.lo, r.hi
                            ));
                        }
                    }
                    for pair in ranges.windows(2) {
                        if pair[0].hi > pair[1].lo {
                            return fail(format!(
                                "column {:?}: ranges {:?} and {:?} overlap or are out of order",
                                rule.column, pair[0].name, pair[1].name
                            ));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    pub fn rule_for(&self, column: &str) -> Option<&ColumnRule> {
        self.columns.iter().find(|r| r.column == column)
    }

    /// The attribute name a single cell activates, if any. Empty (after
    /// trimming) cells follow the column's missing policy; skip columns
    /// activate nothing whatever the cell holds.
    pub fn bin_value(&self, column: &str, raw: &str) -> Result<Option<String>> {
        let rule = self
            .rule_for(column)
            .ok_or_else(|| Error::UncoveredColumn {
                column: column.to_string(),
            })?;
        bin_cell(rule, raw)
    }
}

fn bin_cell(rule: &ColumnRule, raw: &str) -> Result<Option<String>> {
    if let RuleKind::Skip = rule.kind {
        return Ok(None);
    }
    let raw = raw.trim();
    if raw.is_empty() {
        return Ok(match rule.missing {
            MissingPolicy::Emit => Some(format!("{}=MISSING", rule.column)),
            MissingPolicy::Omit => None,
        });
    }
    let fail = |reason: String| {
        Err(Error::BinningFailed {
            column: rule.column.clone(),
            value: raw.to_string(),
            reason,
        })
    };
    match &rule.kind {
        RuleKind::Skip => unreachable!("skip returns above"),
        RuleKind::Categorical { values } => {
            if let Some(values) = values {
                if !values.iter().any(|v| v == raw) {
                    return fail("not in the closed value set".into());
                }
            }
            Ok(Some(format!("{}={raw}", rule.column)))
        }
        RuleKind::Ordinal { bins } => match bins.iter().find(|b| b.matches(raw)) {
            Some(bin) => Ok(Some(format!("{}={}", rule.column, bin.name))),
            None => fail("matches no bin".into()),
        },
        RuleKind::Numeric { ranges } => {
            let x: f64 = match raw.parse() {
                Ok(x) => x,
                Err(_) => return fail("not a number".into()),
            };
            match ranges.iter().find(|r| r.lo <= x && x < r.hi) {
                Some(r) => Ok(Some(format!("{}={}", rule.column, r.name))),
                None => fail("outside every interval".into()),
            }
        }
    }
}

/// Raw text records with a designated unique id column.
#[derive(Debug, Clone)]
pub struct RawRecordSet {
    header: Vec<String>,
    col_index: HashMap<String, usize>,
    id_idx: usize,
    records: Vec<Vec<String>>,
}

impl RawRecordSet {
    pub fn new(header: Vec<String>, records: Vec<Vec<String>>, id_column: &str) -> Result<Self> {
        let mut col_index = HashMap::with_capacity(header.len());
        for (i, name) in header.iter().enumerate() {
            if col_index.insert(name.clone(), i).is_some() {
                return Err(Error::BadRecords(format!("duplicate column {name:?}")));
            }
        }
        let id_idx = *col_index
            .get(id_column)
            .ok_or_else(|| Error::BadRecords(format!("no id column {id_column:?}")))?;
        let mut ids = HashSet::new();
        for (i, rec) in records.iter().enumerate() {
            if rec.len() != header.len() {
                return Err(Error::BadRecords(format!(
                    "record {i} has {} cells, expected {}",
                    rec.len(),
                    header.len()
                )));
            }
            let id = rec[id_idx].trim();
            if id.is_empty() {
                return Err(Error::BadRecords(format!("record {i} has an empty id")));
            }
            if !ids.insert(id.to_string()) {
                return Err(Error::DuplicateRowId(id.to_string()));
            }
        }
        Ok(RawRecordSet {
            header,
            col_index,
            id_idx,
            records,
        })
    }

    pub fn read_csv<R: Read>(reader: R, id_column: &str) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .from_reader(reader);
        let header: Vec<String> = rdr
            .headers()
            .map_err(|e| Error::BadRecords(e.to_string()))?
            .iter()
            .map(|s| s.to_string())
            .collect();
        let mut records = Vec::new();
        for rec in rdr.records() {
            let rec = rec.map_err(|e| Error::BadRecords(e.to_string()))?;
            records.push(rec.iter().map(|s| s.to_string()).collect());
        }
        RawRecordSet::new(header, records, id_column)
    }

    pub fn from_csv_str(body: &str, id_column: &str) -> Result<Self> {
        RawRecordSet::read_csv(body.as_bytes(), id_column)
    }

    pub fn header(&self) -> &[String] {
        &self.header
    }

    pub fn id_column(&self) -> &str {
        &self.header[self.id_idx]
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn id(&self, record: usize) -> &str {
        self.records[record][self.id_idx].trim()
    }

    /// Cell by column name, or `None` for a column that does not exist.
    pub fn cell(&self, record: usize, column: &str) -> Option<&str> {
        self.col_index
            .get(column)
            .map(|&i| self.records[record][i].as_str())
    }
}

/// Encodes records into a binary table.
///
/// The catalog lists, per spec rule in declaration order: declared bins and
/// closed values in their given order, observed values of open categorical
/// columns in sorted order, then the column's `MISSING` attribute when its
/// policy emits one. Declared attributes appear even when no record activates
/// them.
pub fn encode(records: &RawRecordSet, spec: &BinningSpec) -> Result<BinaryTable> {
    spec.validate()?;
    if spec.id_column != records.id_column() {
        return Err(Error::BadRecords(format!(
            "records use id column {:?}, spec declares {:?}",
            records.id_column(),
            spec.id_column
        )));
    }
    for column in records.header() {
        if column != records.id_column() && spec.rule_for(column).is_none() {
            return Err(Error::UncoveredColumn {
                column: column.clone(),
            });
        }
    }
    for rule in &spec.columns {
        if !records.header().iter().any(|c| c == &rule.column) {
            return Err(Error::InvalidSpec(format!(
                "rule for column {:?} which the records lack",
                rule.column
            )));
        }
    }

    // Observed values of open categorical columns, sorted for a stable
    // catalog.
    let mut observed: HashMap<&str, Vec<String>> = HashMap::new();
    for rule in &spec.columns {
        if let RuleKind::Categorical { values: None } = &rule.kind {
            let mut vals = HashSet::new();
            for i in 0..records.len() {
                let raw = records.cell(i, &rule.column).unwrap_or("").trim();
                if !raw.is_empty() {
                    vals.insert(raw.to_string());
                }
            }
            let mut vals: Vec<String> = vals.into_iter().collect();
            vals.sort();
            observed.insert(rule.column.as_str(), vals);
        }
    }

    let mut defs = Vec::new();
    for rule in &spec.columns {
        let mut names: Vec<String> = Vec::new();
        match &rule.kind {
            RuleKind::Skip => continue,
            RuleKind::Categorical { values } => {
                let vals: &[String] = match values {
                    Some(v) => v,
                    None => &observed[rule.column.as_str()],
                };
                names.extend(vals.iter().map(|v| format!("{}={v}", rule.column)));
            }
            RuleKind::Ordinal { bins } => {
                names.extend(bins.iter().map(|b| format!("{}={}", rule.column, b.name)));
            }
            RuleKind::Numeric { ranges } => {
                names.extend(ranges.iter().map(|r| format!("{}={}", rule.column, r.name)));
            }
        }
        if rule.missing == MissingPolicy::Emit {
            names.push(format!("{}=MISSING", rule.column));
        }
        for name in names {
            let mut def = AttributeDef::new(name)
                .with_category(rule.category_label())
                .with_source(&rule.column);
            def.antecedent_eligible = rule.antecedent_eligible;
            defs.push(def);
        }
    }
    let catalog = AttributeCatalog::new(defs)?;

    let mut row_ids = Vec::with_capacity(records.len());
    let mut rows = Vec::with_capacity(records.len());
    for i in 0..records.len() {
        let id = records.id(i).to_string();
        let mut bits = vec![false; catalog.len()];
        for rule in &spec.columns {
            let raw = records.cell(i, &rule.column).unwrap_or("");
            let activated = bin_cell(rule, raw).map_err(|e| Error::BadRow {
                row: id.clone(),
                message: e.to_string(),
            })?;
            if let Some(name) = activated {
                let attr = catalog.id_of(&name).ok_or_else(|| Error::BadRow {
                    row: id.clone(),
                    message: format!("attribute {name:?} missing from the catalog"),
                })?;
                bits[attr] = true;
            }
        }
        row_ids.push(id);
        rows.push(bits);
    }
    BinaryTable::new(catalog, row_ids, rows)
}
