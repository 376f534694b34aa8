//! Implication mining and attribute ranking over binary tables.
//!
//! Given a table of rows × boolean attributes and a target attribute `d`,
//! this crate finds every implication `S → d` that holds with confidence 1
//! and inclusion-minimal antecedent `S`, subject to a minimum support floor.
//! The same search against the counter-target `¬d` yields a second rule set,
//! and each attribute is scored by how much rule support it carries toward
//! `d` versus toward `¬d` (its relevance). Supporting modules bin raw CSV
//! records into boolean attributes and aggregate cohort analytics (pathway
//! flows, subgroup rate tables, deviation-from-mean summaries).
//!
//! Mining is deterministic: rule sets come out in canonical order (antecedent
//! size, then ascending attribute ids) regardless of worker count.
//!
//! ```
//! use relmine::{mine, relevance_rank, BinaryTable, MineLimits};
//!
//! let table = BinaryTable::from_bits(
//!     &["calc1=A", "took_bridge", "retained"],
//!     &["r1", "r2", "r3", "r4"],
//!     &[&[1, 1, 1], &[1, 0, 1], &[0, 1, 0], &[0, 0, 0]],
//! )?;
//! let retained = table.catalog().require("retained")?;
//!
//! let rules = mine(&table, retained, 1, &MineLimits::default())?;
//! assert_eq!(rules.len(), 1); // calc1=A → retained
//!
//! let run = relevance_rank(&table, retained, 1, &MineLimits::default())?;
//! let top = &run.report.ranking[0];
//! assert_eq!(run.table.catalog().def(top.attribute).name, "calc1=A");
//! # Ok::<(), relmine::Error>(())
//! ```

mod bits;

pub mod analytics;
pub mod chart;
pub mod error;
pub mod ingest;
pub mod miner;
pub mod relevance;
pub mod run;
pub mod table;

pub use error::{Error, ErrorCategory, Result};
pub use ingest::{encode, BinningSpec, ColumnRule, MissingPolicy, RawRecordSet};
pub use miner::{mine, oracle_mine, verify, Implication, ImplicationSet, MineLimits};
pub use relevance::{
    group_by_category, relevance_rank, sweep_min_support, RankRun, RelevanceReport,
};
pub use table::{AttrId, AttributeCatalog, AttributeDef, BinaryTable, RowSet};
