//! Mining of exact implications `S → d`: antecedent sets whose every
//! supporting row also carries the consequent, with no proper subset of the
//! antecedent having that property.
//!
//! For a fixed consequent the minimal antecedents are exactly the minimal
//! transversals of the hypergraph whose edges are, per row lacking the
//! consequent, the eligible attributes absent from that row. [`mine`] computes
//! them Berge-style: edges are folded in ascending size order, and each
//! partial family stays an antichain of minimal transversals of the edges seen
//! so far. Candidates whose support already falls below the support floor are
//! discarded as they are generated; any antecedent subset of a surviving
//! candidate has at least the candidate's support, so no minimality witness is
//! ever lost to that pruning and the final family equals the post-hoc
//! filtered one.
//!
//! [`oracle_mine`] is the same contract computed by subset enumeration. It is
//! exponential in the attribute count and capped accordingly; tests hold
//! [`mine`] to exact agreement with it.

use std::collections::HashMap;
use std::io::{BufRead, BufReader, Read, Write};
use std::sync::atomic::{AtomicBool, Ordering as AtomicOrdering};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bits::BitSet;
use crate::error::{Error, Result};
use crate::table::{AttrId, BinaryTable, RowSet};

/// Attribute-count cap for [`oracle_mine`].
pub const ORACLE_ATTR_LIMIT: usize = 20;

/// Search budget for [`mine`]. Exceeding a budget never errors: the result is
/// cut down deterministically and flagged as truncated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MineLimits {
    /// Antecedents larger than this are not explored.
    pub max_antecedent_size: usize,
    /// Hard cap on the number of rules kept.
    pub max_rules: usize,
}

impl Default for MineLimits {
    fn default() -> Self {
        MineLimits {
            max_antecedent_size: 8,
            max_rules: 1_000_000,
        }
    }
}

/// One mined rule: `antecedent → consequent` holds on every supporting row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Implication {
    /// Attribute ids in ascending order, never containing the consequent.
    pub antecedent: Vec<AttrId>,
    pub consequent: AttrId,
    /// Rows supporting the whole antecedent (hence also the consequent).
    pub support: RowSet,
}

/// All minimal-antecedent rules for one consequent at one support floor.
///
/// Invariants: antecedents form an antichain, every support has at least
/// `min_support` rows, and rules are sorted by antecedent size then by
/// ascending attribute ids.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImplicationSet {
    pub consequent: AttrId,
    pub min_support: usize,
    pub table_fingerprint: String,
    /// A search budget in [`MineLimits`] cut the result short.
    pub truncated: bool,
    /// Some row lacking the consequent carries every eligible attribute, so no
    /// antecedent can separate it and the rule set is necessarily empty.
    pub empty_edge: bool,
    pub rules: Vec<Implication>,
}

impl ImplicationSet {
    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Implication> {
        self.rules.iter()
    }
}

fn check_consequent(table: &BinaryTable, consequent: AttrId) -> Result<()> {
    if consequent >= table.attr_count() {
        return Err(Error::UnknownAttributeId(consequent));
    }
    Ok(())
}

fn check_min_support(min_support: usize) -> Result<()> {
    if min_support == 0 {
        return Err(Error::InvalidArgument(
            "min_support must be at least 1".into(),
        ));
    }
    Ok(())
}

/// Eligible attributes other than the consequent, ascending.
fn mining_universe(table: &BinaryTable, consequent: AttrId) -> Vec<AttrId> {
    table
        .catalog()
        .iter()
        .filter(|&(id, def)| id != consequent && def.antecedent_eligible)
        .map(|(id, _)| id)
        .collect()
}

/// One deduplicated, inclusion-minimal edge set in ascending size order, or
/// `None` if some edge is empty (no transversal exists).
fn build_edges(table: &BinaryTable, consequent: AttrId, universe: &[AttrId]) -> Option<Vec<BitSet>> {
    let k = universe.len();
    let consequent_col = table.column(consequent);
    let mut seen = std::collections::HashSet::new();
    let mut edges = Vec::new();
    for row in 0..table.row_count() {
        if consequent_col.contains(row) {
            continue;
        }
        let mut edge = BitSet::empty(k);
        for (i, &attr) in universe.iter().enumerate() {
            if !table.cell(row, attr) {
                edge.insert(i);
            }
        }
        if edge.is_empty() {
            return None;
        }
        if seen.insert(edge.clone()) {
            edges.push(edge);
        }
    }
    edges.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp_lex(b)));
    let mut minimal: Vec<BitSet> = Vec::with_capacity(edges.len());
    for edge in edges {
        if !minimal.iter().any(|kept| kept.is_subset_of(&edge)) {
            minimal.push(edge);
        }
    }
    Some(minimal)
}

/// Rows supporting every attribute of `set` (indices into `universe`).
fn support_bits(table: &BinaryTable, universe: &[AttrId], set: &BitSet) -> BitSet {
    let mut acc = BitSet::full(table.row_count());
    for i in set.iter() {
        acc.intersect_with(table.column(universe[i]));
    }
    acc
}

struct BergeState<'a> {
    table: &'a BinaryTable,
    universe: Vec<AttrId>,
    min_support: usize,
    limits: MineLimits,
    truncated: AtomicBool,
}

impl BergeState<'_> {
    /// Extensions of `u` (which misses `edge`) by members of `edge`, keeping
    /// only minimal candidates with enough support. `buckets[j]` indexes the
    /// edge-hitting family members containing edge member `j`; any subset
    /// witness for `u ∪ {v}` must contain `v`, so those are the only sets
    /// checked.
    fn extend(
        &self,
        u: &BitSet,
        edge_members: &[usize],
        t_hit: &[BitSet],
        buckets: &[Vec<usize>],
    ) -> Vec<BitSet> {
        if u.len() + 1 > self.limits.max_antecedent_size {
            self.truncated.store(true, AtomicOrdering::Relaxed);
            return Vec::new();
        }
        let sup_u = support_bits(self.table, &self.universe, u);
        let mut out = Vec::new();
        for (j, &v) in edge_members.iter().enumerate() {
            if buckets[j]
                .iter()
                .any(|&i| t_hit[i].subset_of_ignoring(u, v))
            {
                continue;
            }
            if sup_u.intersection_len(self.table.column(self.universe[v])) < self.min_support {
                continue;
            }
            let mut c = u.clone();
            c.insert(v);
            out.push(c);
        }
        out
    }
}

/// Mines every implication with consequent `consequent`, minimal antecedent
/// over the eligible attributes, and support of at least `min_support`.
///
/// The result is deterministic for a given table and parameters, independent
/// of thread count. Work is parallelized over the candidate frontier.
pub fn mine(
    table: &BinaryTable,
    consequent: AttrId,
    min_support: usize,
    limits: &MineLimits,
) -> Result<ImplicationSet> {
    check_consequent(table, consequent)?;
    check_min_support(min_support)?;
    let universe = mining_universe(table, consequent);

    let done = |rules, truncated, empty_edge| ImplicationSet {
        consequent,
        min_support,
        table_fingerprint: table.fingerprint(),
        truncated,
        empty_edge,
        rules,
    };

    let Some(edges) = build_edges(table, consequent, &universe) else {
        return Ok(done(Vec::new(), false, true));
    };

    let state = BergeState {
        table,
        universe,
        min_support,
        limits: *limits,
        truncated: AtomicBool::new(false),
    };

    let mut family: Vec<BitSet> = Vec::new();
    if table.row_count() >= min_support {
        family.push(BitSet::empty(state.universe.len()));
    }

    let mut capped = false;
    for edge in &edges {
        if family.is_empty() {
            break;
        }
        let (t_hit, t_miss): (Vec<BitSet>, Vec<BitSet>) =
            family.into_iter().partition(|t| !t.is_disjoint(edge));
        let edge_members: Vec<usize> = edge.iter().collect();
        let mut pos_in_edge = HashMap::new();
        for (j, &v) in edge_members.iter().enumerate() {
            pos_in_edge.insert(v, j);
        }
        let mut buckets: Vec<Vec<usize>> = vec![Vec::new(); edge_members.len()];
        for (i, t) in t_hit.iter().enumerate() {
            let mut shared = t.clone();
            shared.intersect_with(edge);
            for v in shared.iter() {
                buckets[pos_in_edge[&v]].push(i);
            }
        }

        let fresh: Vec<BitSet> = if t_miss.len() >= 32 {
            t_miss
                .par_iter()
                .map(|u| state.extend(u, &edge_members, &t_hit, &buckets))
                .collect::<Vec<_>>()
                .into_iter()
                .flatten()
                .collect()
        } else {
            t_miss
                .iter()
                .flat_map(|u| state.extend(u, &edge_members, &t_hit, &buckets))
                .collect()
        };

        family = t_hit;
        family.extend(fresh);
        if family.len() > limits.max_rules {
            family.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp_lex(b)));
            family.truncate(limits.max_rules);
            capped = true;
        }
    }

    family.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp_lex(b)));
    let rules: Vec<Implication> = family
        .iter()
        .map(|set| {
            let antecedent: Vec<AttrId> = set.iter().map(|i| state.universe[i]).collect();
            let support = RowSet::from_bits(support_bits(table, &state.universe, set));
            Implication {
                antecedent,
                consequent,
                support,
            }
        })
        .collect();

    let truncated = capped || state.truncated.load(AtomicOrdering::Relaxed);
    Ok(done(rules, truncated, false))
}

/// [`mine`] by brute force: enumerates antecedent sets in ascending size,
/// keeps those that hold and have no kept subset, then applies the support
/// floor. Rejects universes above [`ORACLE_ATTR_LIMIT`] attributes.
pub fn oracle_mine(
    table: &BinaryTable,
    consequent: AttrId,
    min_support: usize,
) -> Result<ImplicationSet> {
    check_consequent(table, consequent)?;
    check_min_support(min_support)?;
    let universe = mining_universe(table, consequent);
    let k = universe.len();
    if k > ORACLE_ATTR_LIMIT {
        return Err(Error::TooManyAttributes {
            count: k,
            limit: ORACLE_ATTR_LIMIT,
        });
    }

    let empty_edge = {
        let consequent_col = table.column(consequent);
        (0..table.row_count()).any(|row| {
            !consequent_col.contains(row) && universe.iter().all(|&a| table.cell(row, a))
        })
    };

    let mut masks: Vec<u32> = (0..(1u32 << k)).collect();
    masks.sort_by_key(|m| (m.count_ones(), *m));

    let consequent_col = table.column(consequent);
    let mut kept: Vec<u32> = Vec::new();
    let mut rules: Vec<Implication> = Vec::new();
    for mask in masks {
        if kept.iter().any(|&m| m & !mask == 0) {
            continue;
        }
        let mut sup = BitSet::full(table.row_count());
        for i in 0..k {
            if mask & (1 << i) != 0 {
                sup.intersect_with(table.column(universe[i]));
            }
        }
        if !sup.is_subset_of(consequent_col) {
            continue;
        }
        kept.push(mask);
        if sup.len() >= min_support {
            let antecedent: Vec<AttrId> = (0..k)
                .filter(|i| mask & (1 << i) != 0)
                .map(|i| universe[i])
                .collect();
            rules.push(Implication {
                antecedent,
                consequent,
                support: RowSet::from_bits(sup),
            });
        }
    }
    rules.sort_by(|a, b| {
        a.antecedent
            .len()
            .cmp(&b.antecedent.len())
            .then_with(|| a.antecedent.cmp(&b.antecedent))
    });

    Ok(ImplicationSet {
        consequent,
        min_support,
        table_fingerprint: table.fingerprint(),
        truncated: false,
        empty_edge,
        rules,
    })
}

/// One failed consistency check from [`verify`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    /// A supporting row lacks the consequent.
    ConfidenceBroken { rule: usize, row: String },
    /// Recorded support differs from the recomputed one.
    SupportMismatch { rule: usize },
    /// Support is smaller than the set's floor.
    LowSupport { rule: usize, support: usize },
    /// One antecedent contains another.
    AntichainBroken { rule: usize, subset_rule: usize },
    /// Antecedent uses an attribute that is not antecedent-eligible.
    IneligibleAntecedent { rule: usize, attribute: String },
    /// Rule's consequent differs from the set's, or sits in its antecedent.
    BadConsequent { rule: usize },
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Violation::ConfidenceBroken { rule, row } => {
                write!(f, "rule {rule}: confidence < 1 at row {row}")
            }
            Violation::SupportMismatch { rule } => {
                write!(f, "rule {rule}: recorded support differs from recomputed support")
            }
            Violation::LowSupport { rule, support } => {
                write!(f, "rule {rule}: support {support} is below the minimum")
            }
            Violation::AntichainBroken { rule, subset_rule } => {
                write!(f, "rule {rule}: antecedent contains rule {subset_rule}'s antecedent")
            }
            Violation::IneligibleAntecedent { rule, attribute } => {
                write!(f, "rule {rule}: attribute {attribute:?} is not antecedent-eligible")
            }
            Violation::BadConsequent { rule } => {
                write!(f, "rule {rule}: consequent is inconsistent with the rule set")
            }
        }
    }
}

/// Re-checks a rule set against its table: fingerprint match, confidence 1 on
/// every rule, exact recorded supports, the support floor, antecedent
/// eligibility, and the antichain property. Returns every violation found;
/// an empty list means the set is internally consistent.
pub fn verify(table: &BinaryTable, set: &ImplicationSet) -> Result<Vec<Violation>> {
    let fp = table.fingerprint();
    if fp != set.table_fingerprint {
        return Err(Error::FingerprintMismatch {
            expected: fp,
            found: set.table_fingerprint.clone(),
        });
    }
    check_consequent(table, set.consequent)?;
    let mut violations = Vec::new();
    let consequent_col = table.column(set.consequent);
    let mut antecedent_bits: Vec<BitSet> = Vec::with_capacity(set.rules.len());
    for (idx, rule) in set.rules.iter().enumerate() {
        let mut bits = BitSet::empty(table.attr_count());
        for &a in &rule.antecedent {
            if a >= table.attr_count() {
                return Err(Error::UnknownAttributeId(a));
            }
            bits.insert(a);
            if !table.catalog().def(a).antecedent_eligible {
                violations.push(Violation::IneligibleAntecedent {
                    rule: idx,
                    attribute: table.catalog().def(a).name.clone(),
                });
            }
        }
        if rule.consequent != set.consequent || bits.contains(set.consequent) {
            violations.push(Violation::BadConsequent { rule: idx });
        }
        let sup = support_bits(table, &rule.antecedent, &BitSet::full(rule.antecedent.len()));
        if let Some(row) = sup.iter().find(|&r| !consequent_col.contains(r)) {
            violations.push(Violation::ConfidenceBroken {
                rule: idx,
                row: table.row_id(row).to_string(),
            });
        }
        if &sup != rule.support.bits() {
            violations.push(Violation::SupportMismatch { rule: idx });
        }
        if sup.len() < set.min_support {
            violations.push(Violation::LowSupport {
                rule: idx,
                support: sup.len(),
            });
        }
        antecedent_bits.push(bits);
    }
    for i in 0..antecedent_bits.len() {
        for j in 0..antecedent_bits.len() {
            if i != j && antecedent_bits[i].is_subset_of(&antecedent_bits[j]) {
                violations.push(Violation::AntichainBroken {
                    rule: j,
                    subset_rule: i,
                });
            }
        }
    }
    Ok(violations)
}

#[derive(Serialize, Deserialize)]
struct MetaLine {
    meta: MetaBody,
}

#[derive(Serialize, Deserialize)]
struct MetaBody {
    consequent: String,
    min_support: usize,
    table_fingerprint: String,
    truncated: bool,
    empty_edge: bool,
    rule_count: usize,
}

#[derive(Serialize, Deserialize)]
struct RuleLine {
    antecedent: Vec<String>,
    consequent: String,
    support: usize,
    rows: Vec<String>,
}

impl ImplicationSet {
    /// Writes the set as json lines: a meta line followed by one rule per
    /// line, attributes and rows referenced by name. Output is stable for a
    /// given set.
    pub fn write_jsonl<W: Write>(&self, table: &BinaryTable, mut w: W) -> Result<()> {
        let bad = |e: std::fmt::Arguments| Error::BadRulesFile(e.to_string());
        let meta = MetaLine {
            meta: MetaBody {
                consequent: table.catalog().def(self.consequent).name.clone(),
                min_support: self.min_support,
                table_fingerprint: self.table_fingerprint.clone(),
                truncated: self.truncated,
                empty_edge: self.empty_edge,
                rule_count: self.rules.len(),
            },
        };
        let mut emit = |line: String| -> Result<()> {
            w.write_all(line.as_bytes())
                .and_then(|_| w.write_all(b"\n"))
                .map_err(|e| bad(format_args!("write failed: {e}")))
        };
        emit(serde_json::to_string(&meta).map_err(|e| bad(format_args!("{e}")))?)?;
        for rule in &self.rules {
            let line = RuleLine {
                antecedent: rule
                    .antecedent
                    .iter()
                    .map(|&a| table.catalog().def(a).name.clone())
                    .collect(),
                consequent: table.catalog().def(rule.consequent).name.clone(),
                support: rule.support.len(),
                rows: rule.support.iter().map(|r| table.row_id(r).to_string()).collect(),
            };
            emit(serde_json::to_string(&line).map_err(|e| bad(format_args!("{e}")))?)?;
        }
        Ok(())
    }

    /// Reads a set written by [`ImplicationSet::write_jsonl`], resolving names
    /// against `table` and insisting on a fingerprint match.
    pub fn read_jsonl<R: Read>(table: &BinaryTable, r: R) -> Result<ImplicationSet> {
        let mut lines = BufReader::new(r).lines();
        let first = lines
            .next()
            .ok_or_else(|| Error::BadRulesFile("missing meta line".into()))?
            .map_err(|e| Error::BadRulesFile(e.to_string()))?;
        let meta: MetaLine = serde_json::from_str(&first)
            .map_err(|e| Error::BadRulesFile(format!("meta line: {e}")))?;
        let meta = meta.meta;
        let fp = table.fingerprint();
        if meta.table_fingerprint != fp {
            return Err(Error::FingerprintMismatch {
                expected: fp,
                found: meta.table_fingerprint,
            });
        }
        let consequent = table.catalog().require(&meta.consequent)?;
        let row_index: HashMap<&str, usize> = table
            .row_ids()
            .iter()
            .enumerate()
            .map(|(i, id)| (id.as_str(), i))
            .collect();
        let mut rules = Vec::with_capacity(meta.rule_count);
        for line in lines {
            let line = line.map_err(|e| Error::BadRulesFile(e.to_string()))?;
            if line.trim().is_empty() {
                continue;
            }
            let parsed: RuleLine = serde_json::from_str(&line)
                .map_err(|e| Error::BadRulesFile(format!("rule line: {e}")))?;
            if parsed.consequent != meta.consequent {
                return Err(Error::BadRulesFile(format!(
                    "rule consequent {:?} does not match meta consequent {:?}",
                    parsed.consequent, meta.consequent
                )));
            }
            let mut antecedent = Vec::with_capacity(parsed.antecedent.len());
            for name in &parsed.antecedent {
                antecedent.push(table.catalog().require(name)?);
            }
            antecedent.sort_unstable();
            let mut bits = BitSet::empty(table.row_count());
            for row in &parsed.rows {
                let &idx = row_index
                    .get(row.as_str())
                    .ok_or_else(|| Error::BadRulesFile(format!("unknown row id {row:?}")))?;
                bits.insert(idx);
            }
            if bits.len() != parsed.support {
                return Err(Error::BadRulesFile(format!(
                    "support {} does not match {} listed rows",
                    parsed.support,
                    bits.len()
                )));
            }
            rules.push(Implication {
                antecedent,
                consequent,
                support: RowSet::from_bits(bits),
            });
        }
        if rules.len() != meta.rule_count {
            return Err(Error::BadRulesFile(format!(
                "meta declares {} rules, file has {}",
                meta.rule_count,
                rules.len()
            )));
        }
        Ok(ImplicationSet {
            consequent,
            min_support: meta.min_support,
            table_fingerprint: meta.table_fingerprint,
            truncated: meta.truncated,
            empty_edge: meta.empty_edge,
            rules,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::table::six_row_fixture;

    fn names(table: &BinaryTable, rule: &Implication) -> Vec<String> {
        rule.antecedent
            .iter()
            .map(|&a| table.catalog().def(a).name.clone())
            .collect()
    }

    #[test]
    fn mine_finds_the_single_minimal_rule_for_d() {
        let t = six_row_fixture();
        let set = mine(&t, 4, 1, &MineLimits::default()).unwrap();
        assert_eq!(set.len(), 1);
        assert_eq!(names(&t, &set.rules[0]), vec!["a0"]);
        assert_eq!(set.rules[0].support.to_vec(), vec![0, 1, 3, 5]);
        assert!(!set.truncated);
        assert!(!set.empty_edge);
    }

    #[test]
    fn mine_on_the_negated_target_prunes_empty_support() {
        let t = six_row_fixture();
        let (t2, nd) = t.negate_column(4).unwrap();
        let set = mine(&t2, nd, 1, &MineLimits::default()).unwrap();
        // {a1, a3} is also a minimal transversal but supports no row.
        assert_eq!(set.len(), 1);
        assert_eq!(names(&t2, &set.rules[0]), vec!["a2", "a3"]);
        assert_eq!(set.rules[0].support.to_vec(), vec![4]);
    }

    #[test]
    fn support_floor_can_empty_the_result() {
        let t = six_row_fixture();
        let set = mine(&t, 4, 5, &MineLimits::default()).unwrap();
        assert!(set.is_empty());
        assert!(!set.truncated);
    }

    #[test]
    fn full_support_consequent_yields_the_empty_antecedent() {
        let t = BinaryTable::from_bits(
            &["x", "d"],
            &["r0", "r1", "r2"],
            &[&[1, 1], &[0, 1], &[1, 1]],
        )
        .unwrap();
        let set = mine(&t, 1, 1, &MineLimits::default()).unwrap();
        assert_eq!(set.len(), 1);
        assert!(set.rules[0].antecedent.is_empty());
        assert_eq!(set.rules[0].support.len(), 3);
    }

    #[test]
    fn saturated_counterexample_row_is_reported_as_empty_edge() {
        // r1 lacks d but carries every eligible attribute.
        let t = BinaryTable::from_bits(&["x", "y", "d"], &["r0", "r1"], &[&[1, 0, 1], &[1, 1, 0]])
            .unwrap();
        let set = mine(&t, 2, 1, &MineLimits::default()).unwrap();
        assert!(set.empty_edge);
        assert!(set.is_empty());
        let oracle = oracle_mine(&t, 2, 1).unwrap();
        assert!(oracle.empty_edge);
        assert!(oracle.is_empty());
    }

    fn two_rule_table() -> BinaryTable {
        BinaryTable::from_bits(
            &["x", "y", "d"],
            &["r0", "r1", "r2", "r3", "r4", "r5"],
            &[
                &[1, 0, 1],
                &[1, 0, 1],
                &[0, 1, 1],
                &[0, 1, 1],
                &[1, 1, 1],
                &[0, 0, 0],
            ],
        )
        .unwrap()
    }

    #[test]
    fn rule_cap_truncates_deterministically() {
        let t = two_rule_table();
        let full = mine(&t, 2, 1, &MineLimits::default()).unwrap();
        assert_eq!(full.len(), 2);
        assert!(!full.truncated);
        let capped = mine(
            &t,
            2,
            1,
            &MineLimits {
                max_antecedent_size: 8,
                max_rules: 1,
            },
        )
        .unwrap();
        assert!(capped.truncated);
        assert_eq!(capped.len(), 1);
        assert_eq!(names(&t, &capped.rules[0]), vec!["x"]);
    }

    #[test]
    fn antecedent_size_cap_flags_truncation() {
        let t = six_row_fixture();
        let (t2, nd) = t.negate_column(4).unwrap();
        let set = mine(
            &t2,
            nd,
            1,
            &MineLimits {
                max_antecedent_size: 1,
                max_rules: 1_000_000,
            },
        )
        .unwrap();
        assert!(set.truncated);
        assert!(set.is_empty());
    }

    #[test]
    fn oracle_agrees_on_the_fixture() {
        let t = six_row_fixture();
        let fast = mine(&t, 4, 1, &MineLimits::default()).unwrap();
        let slow = oracle_mine(&t, 4, 1).unwrap();
        assert_eq!(fast, slow);
        let (t2, nd) = t.negate_column(4).unwrap();
        let fast = mine(&t2, nd, 1, &MineLimits::default()).unwrap();
        let slow = oracle_mine(&t2, nd, 1).unwrap();
        assert_eq!(fast, slow);
    }

    #[test]
    fn oracle_rejects_wide_universes() {
        let names: Vec<String> = (0..22).map(|i| format!("a{i}")).collect();
        let name_refs: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
        let row: Vec<u8> = vec![1; 22];
        let t = BinaryTable::from_bits(&name_refs, &["r0"], &[&row]).unwrap();
        assert!(matches!(
            oracle_mine(&t, 0, 1),
            Err(Error::TooManyAttributes { count: 21, .. })
        ));
    }

    #[test]
    fn verify_passes_mined_sets_and_catches_injected_rules() {
        let t = six_row_fixture();
        let mut set = mine(&t, 4, 1, &MineLimits::default()).unwrap();
        assert!(verify(&t, &set).unwrap().is_empty());

        // {a2} → d fails on r2: a2 is present there but d is not.
        set.rules.push(Implication {
            antecedent: vec![2],
            consequent: 4,
            support: t.support(&[2]).unwrap(),
        });
        let violations = verify(&t, &set).unwrap();
        let rendered: Vec<String> = violations.iter().map(|v| v.to_string()).collect();
        assert!(
            rendered.iter().any(|m| m.contains("confidence < 1 at row r2")),
            "got {rendered:?}"
        );
    }

    #[test]
    fn verify_rejects_foreign_fingerprints() {
        let t = six_row_fixture();
        let mut set = mine(&t, 4, 1, &MineLimits::default()).unwrap();
        set.table_fingerprint = "0000".into();
        assert!(matches!(
            verify(&t, &set),
            Err(Error::FingerprintMismatch { .. })
        ));
    }

    #[test]
    fn verify_flags_antichain_and_support_floor_breaks() {
        let t = two_rule_table();
        let mut set = mine(&t, 2, 1, &MineLimits::default()).unwrap();
        set.rules.push(Implication {
            antecedent: vec![0, 1],
            consequent: 2,
            support: t.support(&[0, 1]).unwrap(),
        });
        set.min_support = 2;
        let violations = verify(&t, &set).unwrap();
        assert!(violations
            .iter()
            .any(|v| matches!(v, Violation::AntichainBroken { .. })));
        assert!(violations
            .iter()
            .any(|v| matches!(v, Violation::LowSupport { support: 1, .. })));
    }

    #[test]
    fn jsonl_roundtrip_preserves_the_set() {
        let t = six_row_fixture();
        let set = mine(&t, 4, 1, &MineLimits::default()).unwrap();
        let mut buf = Vec::new();
        set.write_jsonl(&t, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.lines().next().unwrap().contains("\"meta\""));
        assert!(text.contains("\"antecedent\":[\"a0\"]"));
        let back = ImplicationSet::read_jsonl(&t, &buf[..]).unwrap();
        assert_eq!(back, set);
    }

    #[test]
    fn jsonl_rejects_wrong_table() {
        let t = six_row_fixture();
        let set = mine(&t, 4, 1, &MineLimits::default()).unwrap();
        let mut buf = Vec::new();
        set.write_jsonl(&t, &mut buf).unwrap();
        let other = two_rule_table();
        assert!(matches!(
            ImplicationSet::read_jsonl(&other, &buf[..]),
            Err(Error::FingerprintMismatch { .. })
        ));
    }
}
