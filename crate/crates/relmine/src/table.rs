//! Binary attribute tables: rows are records, columns are 0/1 attributes.
//!
//! The table is stored column-major as one row bitset per attribute, which
//! makes antecedent support an intersection of bitsets. Tables are immutable;
//! operations that change shape (such as [`BinaryTable::negate_column`])
//! return a new table.

use std::collections::HashMap;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::bits::BitSet;
use crate::error::{Error, Result};

/// Index of an attribute in its catalog. Ids are contiguous and equal the
/// attribute's position in catalog order.
pub type AttrId = usize;

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttributeDef {
    pub name: String,
    #[serde(default)]
    pub category: String,
    #[serde(default)]
    pub source_column: String,
    #[serde(default = "default_true")]
    pub antecedent_eligible: bool,
}

impl AttributeDef {
    pub fn new(name: impl Into<String>) -> Self {
        AttributeDef {
            name: name.into(),
            category: String::new(),
            source_column: String::new(),
            antecedent_eligible: true,
        }
    }

    pub fn with_category(mut self, category: impl Into<String>) -> Self {
        self.category = category.into();
        self
    }

    pub fn with_source(mut self, source_column: impl Into<String>) -> Self {
        self.source_column = source_column.into();
        self
    }

    pub fn ineligible(mut self) -> Self {
        self.antecedent_eligible = false;
        self
    }
}

/// Ordered list of attribute definitions with unique names.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AttributeCatalog {
    defs: Vec<AttributeDef>,
    by_name: HashMap<String, AttrId>,
}

impl AttributeCatalog {
    pub fn new(defs: Vec<AttributeDef>) -> Result<Self> {
        let mut by_name = HashMap::with_capacity(defs.len());
        for (id, def) in defs.iter().enumerate() {
            if by_name.insert(def.name.clone(), id).is_some() {
                return Err(Error::DuplicateAttribute(def.name.clone()));
            }
        }
        Ok(AttributeCatalog { defs, by_name })
    }

    pub fn from_names<S: AsRef<str>>(names: &[S]) -> Result<Self> {
        AttributeCatalog::new(names.iter().map(|n| AttributeDef::new(n.as_ref())).collect())
    }

    pub fn len(&self) -> usize {
        self.defs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.defs.is_empty()
    }

    pub fn def(&self, id: AttrId) -> &AttributeDef {
        &self.defs[id]
    }

    pub fn get(&self, id: AttrId) -> Option<&AttributeDef> {
        self.defs.get(id)
    }

    pub fn id_of(&self, name: &str) -> Option<AttrId> {
        self.by_name.get(name).copied()
    }

    pub fn require(&self, name: &str) -> Result<AttrId> {
        self.id_of(name)
            .ok_or_else(|| Error::UnknownAttribute(name.to_string()))
    }

    pub fn iter(&self) -> impl Iterator<Item = (AttrId, &AttributeDef)> {
        self.defs.iter().enumerate()
    }

    pub fn defs(&self) -> &[AttributeDef] {
        &self.defs
    }

    fn push(&mut self, def: AttributeDef) -> Result<AttrId> {
        let id = self.defs.len();
        if self.by_name.insert(def.name.clone(), id).is_some() {
            return Err(Error::DuplicateAttribute(def.name.clone()));
        }
        self.defs.push(def);
        Ok(id)
    }
}

/// Set of row indices of one table, yielded in ascending order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RowSet {
    bits: BitSet,
}

impl RowSet {
    pub(crate) fn from_bits(bits: BitSet) -> Self {
        RowSet { bits }
    }

    pub(crate) fn bits(&self) -> &BitSet {
        &self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn contains(&self, row: usize) -> bool {
        self.bits.contains(row)
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits.iter()
    }

    pub fn to_vec(&self) -> Vec<usize> {
        self.bits.iter().collect()
    }

    pub fn is_subset_of(&self, other: &RowSet) -> bool {
        self.bits.is_subset_of(&other.bits)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct CatalogFile {
    attributes: Vec<AttributeDef>,
}

/// Immutable 0/1 table with named rows and a typed attribute catalog.
#[derive(Debug, Clone)]
pub struct BinaryTable {
    catalog: AttributeCatalog,
    row_ids: Vec<String>,
    columns: Vec<BitSet>,
}

impl BinaryTable {
    /// Builds a table from row-major bits. `rows[i][j]` is the value of
    /// attribute `j` in row `i`; every row must have one cell per attribute.
    pub fn new(
        catalog: AttributeCatalog,
        row_ids: Vec<String>,
        rows: Vec<Vec<bool>>,
    ) -> Result<Self> {
        if catalog.is_empty() {
            return Err(Error::EmptyTable);
        }
        if row_ids.len() != rows.len() {
            return Err(Error::CatalogMismatch(format!(
                "{} row ids for {} rows",
                row_ids.len(),
                rows.len()
            )));
        }
        let mut seen = HashMap::new();
        for id in &row_ids {
            if seen.insert(id.as_str(), ()).is_some() {
                return Err(Error::DuplicateRowId(id.clone()));
            }
        }
        let n_attrs = catalog.len();
        let n_rows = rows.len();
        let mut columns = vec![BitSet::empty(n_rows); n_attrs];
        for (r, row) in rows.iter().enumerate() {
            if row.len() != n_attrs {
                return Err(Error::BadRow {
                    row: row_ids[r].clone(),
                    message: format!("{} cells, expected {}", row.len(), n_attrs),
                });
            }
            for (a, &bit) in row.iter().enumerate() {
                if bit {
                    columns[a].insert(r);
                }
            }
        }
        Ok(BinaryTable {
            catalog,
            row_ids,
            columns,
        })
    }

    /// Test and example helper: attributes named from `names`, cells given as
    /// 0/1 integers.
    pub fn from_bits(names: &[&str], row_ids: &[&str], rows: &[&[u8]]) -> Result<Self> {
        let catalog = AttributeCatalog::from_names(names)?;
        let rows: Vec<Vec<bool>> = rows
            .iter()
            .map(|r| r.iter().map(|&b| b != 0).collect())
            .collect();
        BinaryTable::new(
            catalog,
            row_ids.iter().map(|s| s.to_string()).collect(),
            rows,
        )
    }

    pub fn catalog(&self) -> &AttributeCatalog {
        &self.catalog
    }

    pub fn row_count(&self) -> usize {
        self.row_ids.len()
    }

    pub fn attr_count(&self) -> usize {
        self.catalog.len()
    }

    pub fn row_ids(&self) -> &[String] {
        &self.row_ids
    }

    pub fn row_id(&self, row: usize) -> &str {
        &self.row_ids[row]
    }

    pub fn cell(&self, row: usize, attr: AttrId) -> bool {
        self.columns[attr].contains(row)
    }

    pub(crate) fn column(&self, attr: AttrId) -> &BitSet {
        &self.columns[attr]
    }

    fn check_attr(&self, attr: AttrId) -> Result<()> {
        if attr >= self.catalog.len() {
            Err(Error::UnknownAttributeId(attr))
        } else {
            Ok(())
        }
    }

    /// Rows in which every attribute of `attrs` is present. The empty set is
    /// supported by every row.
    pub fn support(&self, attrs: &[AttrId]) -> Result<RowSet> {
        let mut acc = BitSet::full(self.row_count());
        for &a in attrs {
            self.check_attr(a)?;
            acc.intersect_with(&self.columns[a]);
        }
        Ok(RowSet::from_bits(acc))
    }

    /// Whether `antecedent → consequent` holds with no counterexample row:
    /// every row supporting the antecedent also has the consequent. Holds
    /// vacuously when the antecedent has empty support.
    pub fn holds(&self, antecedent: &[AttrId], consequent: AttrId) -> Result<bool> {
        self.check_attr(consequent)?;
        if antecedent.contains(&consequent) {
            return Err(Error::ConsequentInAntecedent(
                self.catalog.def(consequent).name.clone(),
            ));
        }
        let sup = self.support(antecedent)?;
        Ok(sup.bits().is_subset_of(&self.columns[consequent]))
    }

    /// Appends the complement column of `attr`, named `NOT:<name>` and never
    /// antecedent-eligible. Returns the extended table and the new column's
    /// id. Negating the same column twice through this call is rejected;
    /// negating a `NOT:` column restores the original values under a doubled
    /// prefix.
    pub fn negate_column(&self, attr: AttrId) -> Result<(BinaryTable, AttrId)> {
        self.check_attr(attr)?;
        let def = self.catalog.def(attr);
        let negated_name = format!("NOT:{}", def.name);
        if self.catalog.id_of(&negated_name).is_some() {
            return Err(Error::NegationExists(def.name.clone()));
        }
        let mut table = self.clone();
        let new_def = AttributeDef {
            name: negated_name,
            category: def.category.clone(),
            source_column: def.source_column.clone(),
            antecedent_eligible: false,
        };
        let id = table.catalog.push(new_def)?;
        table.columns.push(self.columns[attr].complement());
        Ok((table, id))
    }

    /// First attribute (ascending id) other than `attr` whose column is the
    /// exact value-complement of `attr`'s, if any. Lets callers reuse an
    /// existing counter column instead of synthesizing one.
    pub fn complement_of(&self, attr: AttrId) -> Option<AttrId> {
        let want = self.columns[attr].complement();
        (0..self.attr_count()).find(|&a| a != attr && self.columns[a] == want)
    }

    /// SHA-256 over the full table content: catalog entries in order, row ids
    /// in order, and every cell. Stable across runs and platforms.
    pub fn fingerprint(&self) -> String {
        let mut h = Sha256::new();
        h.update(b"relmine.table.v1\n");
        let write_str = |h: &mut Sha256, s: &str| {
            h.update((s.len() as u64).to_le_bytes());
            h.update(s.as_bytes());
        };
        h.update((self.catalog.len() as u64).to_le_bytes());
        h.update((self.row_count() as u64).to_le_bytes());
        for (_, def) in self.catalog.iter() {
            write_str(&mut h, &def.name);
            write_str(&mut h, &def.category);
            write_str(&mut h, &def.source_column);
            h.update([def.antecedent_eligible as u8]);
        }
        for id in &self.row_ids {
            write_str(&mut h, id);
        }
        for col in &self.columns {
            for r in 0..self.row_count() {
                h.update([col.contains(r) as u8]);
            }
        }
        hex(&h.finalize())
    }

    /// Writes the table as csv: header `row_id,<attr names...>`, one `0`/`1`
    /// cell per attribute.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        let mut header = vec!["row_id".to_string()];
        header.extend(self.catalog.iter().map(|(_, d)| d.name.clone()));
        wtr.write_record(&header).map_err(csv_err)?;
        for r in 0..self.row_count() {
            let mut rec = vec![self.row_ids[r].clone()];
            rec.extend((0..self.attr_count()).map(|a| if self.cell(r, a) { "1" } else { "0" }.to_string()));
            wtr.write_record(&rec).map_err(csv_err)?;
        }
        wtr.flush().map_err(|e| Error::BadTableCsv(e.to_string()))?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        String::from_utf8(buf).map_err(|e| Error::BadTableCsv(e.to_string()))
    }

    /// Writes the sidecar catalog as json, attribute order matching the csv
    /// header.
    pub fn write_catalog_json<W: Write>(&self, mut w: W) -> Result<()> {
        let file = CatalogFile {
            attributes: self.catalog.defs.clone(),
        };
        let body = serde_json::to_string_pretty(&file)
            .map_err(|e| Error::BadTableCsv(e.to_string()))?;
        w.write_all(body.as_bytes())
            .and_then(|_| w.write_all(b"\n"))
            .map_err(|e| Error::BadTableCsv(e.to_string()))
    }

    pub fn catalog_json_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_catalog_json(&mut buf)?;
        String::from_utf8(buf).map_err(|e| Error::BadTableCsv(e.to_string()))
    }

    /// Reads a table csv, optionally joining a sidecar catalog json whose
    /// attribute order must match the csv header. Without a catalog every
    /// attribute defaults to eligible with empty category.
    pub fn read_csv<R: Read>(reader: R, catalog_json: Option<&str>) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .from_reader(reader);
        let header = rdr
            .headers()
            .map_err(csv_err)?
            .iter()
            .map(|s| s.to_string())
            .collect::<Vec<_>>();
        if header.len() < 2 {
            return Err(Error::BadTableCsv(
                "header needs a row_id column and at least one attribute".into(),
            ));
        }
        let names = &header[1..];
        let catalog = match catalog_json {
            Some(body) => {
                let file: CatalogFile = serde_json::from_str(body)
                    .map_err(|e| Error::BadTableCsv(format!("catalog json: {e}")))?;
                let got: Vec<_> = file.attributes.iter().map(|d| d.name.as_str()).collect();
                let want: Vec<_> = names.iter().map(|s| s.as_str()).collect();
                if got != want {
                    return Err(Error::CatalogMismatch(format!(
                        "catalog attributes {got:?} do not match csv header {want:?}"
                    )));
                }
                AttributeCatalog::new(file.attributes)?
            }
            None => AttributeCatalog::from_names(names)?,
        };
        let mut row_ids = Vec::new();
        let mut rows = Vec::new();
        for rec in rdr.records() {
            let rec = rec.map_err(csv_err)?;
            if rec.len() != header.len() {
                return Err(Error::BadTableCsv(format!(
                    "row {:?} has {} fields, expected {}",
                    rec.get(0).unwrap_or(""),
                    rec.len(),
                    header.len()
                )));
            }
            let id = rec[0].to_string();
            let mut bits = Vec::with_capacity(names.len());
            for (j, cell) in rec.iter().skip(1).enumerate() {
                match cell {
                    "0" => bits.push(false),
                    "1" => bits.push(true),
                    other => {
                        return Err(Error::BadTableCsv(format!(
                            "row {id:?}, column {:?}: cell {other:?} is not 0 or 1",
                            names[j]
                        )))
                    }
                }
            }
            row_ids.push(id);
            rows.push(bits);
        }
        if rows.is_empty() {
            return Err(Error::EmptyTable);
        }
        BinaryTable::new(catalog, row_ids, rows)
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::BadTableCsv(e.to_string())
}

pub(crate) fn hex(bytes: &[u8]) -> String {
    let mut s = String::with_capacity(bytes.len() * 2);
    for b in bytes {
        s.push_str(&format!("{b:02x}"));
    }
    s
}

#[cfg(test)]
pub(crate) fn six_row_fixture() -> BinaryTable {
    BinaryTable::from_bits(
        &["a0", "a1", "a2", "a3", "d"],
        &["r0", "r1", "r2", "r3", "r4", "r5"],
        &[
            &[1, 1, 0, 0, 1],
            &[1, 0, 1, 0, 1],
            &[0, 1, 1, 0, 0],
            &[1, 1, 1, 0, 1],
            &[0, 0, 1, 1, 0],
            &[1, 0, 0, 1, 1],
        ],
    )
    .unwrap()
}
