//! Attribute relevance toward a target outcome.
//!
//! Each attribute `a` gets a total support on both sides of the outcome:
//! the sum, over mined rules whose antecedent contains `a`, of support size
//! divided by antecedent size. Relevance is the ratio
//! `tsup_target / (tsup_counter + 1)`, and attributes at or above the
//! threshold `|sup(target)| / |sup(counter)|` count as positively associated.
//!
//! Rules backing the counter side can be scarce at the working support floor;
//! an attribute with an empty counter side there may owe its relevance to that
//! scarcity alone. [`sweep_min_support`] re-mines at lower floors and flags
//! such attributes when their recomputed relevance collapses below the
//! threshold.

use std::io::Write;

use crate::error::{Error, Result};
use crate::miner::{mine, ImplicationSet, MineLimits};
use crate::table::{AttrId, BinaryTable};

/// Sum of `support / |antecedent|` over the rules whose antecedent contains
/// `attr`. Zero when the attribute appears in no rule.
pub fn total_support(rules: &ImplicationSet, attr: AttrId) -> f64 {
    rules
        .iter()
        .filter(|r| r.antecedent.binary_search(&attr).is_ok())
        .map(|r| r.support.len() as f64 / r.antecedent.len() as f64)
        .fold(0.0, |acc, x| acc + x)
}

/// `tsup_target / (tsup_counter + 1)`.
pub fn relevance_value(tsup_target: f64, tsup_counter: f64) -> f64 {
    tsup_target / (tsup_counter + 1.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct AttributeRelevance {
    pub attribute: AttrId,
    pub tsup_target: f64,
    pub tsup_counter: f64,
    pub relevance: f64,
    pub above_threshold: bool,
    /// Set by [`sweep_min_support`]; always false from [`relevance_rank`].
    pub inflated: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RelevanceReport {
    pub target: AttrId,
    pub counter: AttrId,
    /// Support floors used: the working floor first, then any sweep levels.
    pub support_levels: Vec<usize>,
    pub threshold: f64,
    /// Every eligible attribute except target and counter, sorted by
    /// relevance descending, ties by attribute id ascending.
    pub ranking: Vec<AttributeRelevance>,
}

impl RelevanceReport {
    pub fn min_support(&self) -> usize {
        self.support_levels[0]
    }

    pub fn entry(&self, attr: AttrId) -> Option<&AttributeRelevance> {
        self.ranking.iter().find(|e| e.attribute == attr)
    }
}

/// A completed ranking run: the table actually ranked (extended with a
/// synthesized counter column when none existed), both rule sets at the
/// working support floor, and the report.
#[derive(Debug, Clone)]
pub struct RankRun {
    pub table: BinaryTable,
    pub rules_target: ImplicationSet,
    pub rules_counter: ImplicationSet,
    pub report: RelevanceReport,
}

/// Rejects targets whose column is all ones or all zeros; the threshold is
/// undefined for those.
fn check_not_degenerate(table: &BinaryTable, target: AttrId) -> Result<(usize, usize)> {
    let sup = table.support(&[target])?.len();
    let total = table.row_count();
    let name = || table.catalog().def(target).name.clone();
    if sup == 0 {
        return Err(Error::DegenerateTarget {
            target: name(),
            reason: "no row has the target attribute".into(),
        });
    }
    if sup == total {
        return Err(Error::DegenerateTarget {
            target: name(),
            reason: "every row has the target attribute".into(),
        });
    }
    Ok((sup, total - sup))
}

/// The counter column for `target`: an existing exact value-complement if the
/// catalog has one, otherwise a synthesized `NOT:` column appended to a copy
/// of the table.
fn resolve_counter(table: &BinaryTable, target: AttrId) -> Result<(BinaryTable, AttrId)> {
    match table.complement_of(target) {
        Some(counter) => Ok((table.clone(), counter)),
        None => table.negate_column(target),
    }
}

fn ranking_universe(table: &BinaryTable, target: AttrId, counter: AttrId) -> Vec<AttrId> {
    table
        .catalog()
        .iter()
        .filter(|&(id, def)| id != target && id != counter && def.antecedent_eligible)
        .map(|(id, _)| id)
        .collect()
}

fn build_ranking(
    universe: &[AttrId],
    rules_target: &ImplicationSet,
    rules_counter: &ImplicationSet,
    threshold: f64,
) -> Vec<AttributeRelevance> {
    let mut ranking: Vec<AttributeRelevance> = universe
        .iter()
        .map(|&attr| {
            let tsup_target = total_support(rules_target, attr);
            let tsup_counter = total_support(rules_counter, attr);
            let relevance = relevance_value(tsup_target, tsup_counter);
            let above_threshold =
                !(tsup_target == 0.0 && tsup_counter == 0.0) && relevance >= threshold;
            AttributeRelevance {
                attribute: attr,
                tsup_target,
                tsup_counter,
                relevance,
                above_threshold,
                inflated: false,
            }
        })
        .collect();
    ranking.sort_by(|a, b| {
        b.relevance
            .partial_cmp(&a.relevance)
            .expect("relevance is never NaN")
            .then(a.attribute.cmp(&b.attribute))
    });
    ranking
}

/// Ranks against an explicitly chosen counter column instead of the exact
/// complement. Both columns must be non-degenerate and distinct.
pub fn rank_at(
    table: BinaryTable,
    target: AttrId,
    counter: AttrId,
    min_support: usize,
    limits: &MineLimits,
) -> Result<RankRun> {
    if target == counter {
        return Err(Error::InvalidArgument(
            "target and counter are the same attribute".into(),
        ));
    }
    check_not_degenerate(&table, target)?;
    check_not_degenerate(&table, counter)?;
    let sup_target = table.support(&[target])?.len() as f64;
    let sup_counter = table.support(&[counter])?.len() as f64;
    let threshold = sup_target / sup_counter;
    let (rules_target, rules_counter) = {
        let (a, b) = rayon::join(
            || mine(&table, target, min_support, limits),
            || mine(&table, counter, min_support, limits),
        );
        (a?, b?)
    };
    let universe = ranking_universe(&table, target, counter);
    let ranking = build_ranking(&universe, &rules_target, &rules_counter, threshold);
    Ok(RankRun {
        table,
        rules_target,
        rules_counter,
        report: RelevanceReport {
            target,
            counter,
            support_levels: vec![min_support],
            threshold,
            ranking,
        },
    })
}

/// Ranks every eligible attribute by relevance toward `target`.
///
/// Synthesizes the counter column if no exact complement exists, mines both
/// rule sets at `min_support` (the two runs proceed concurrently), and
/// reports per-attribute total supports, relevance, and threshold position.
pub fn relevance_rank(
    table: &BinaryTable,
    target: AttrId,
    min_support: usize,
    limits: &MineLimits,
) -> Result<RankRun> {
    check_not_degenerate(table, target)?;
    let (table, counter) = resolve_counter(table, target)?;
    rank_at(table, target, counter, min_support, limits)
}

/// [`relevance_rank`] at `levels[0]`, then re-mines at each lower level and
/// flags attributes whose relevance is inflated by counter-side scarcity: the
/// counter total support is zero at the base level, positive at some lower
/// level, and the relevance recomputed there falls below the threshold.
/// Flagged attributes keep their base-level values and ranking position.
pub fn sweep_min_support(
    table: &BinaryTable,
    target: AttrId,
    levels: &[usize],
    limits: &MineLimits,
) -> Result<RankRun> {
    check_levels(levels)?;
    let mut run = relevance_rank(table, target, levels[0], limits)?;
    sweep_lower_levels(&mut run, levels, limits)?;
    Ok(run)
}

/// [`sweep_min_support`] against an explicitly chosen counter column.
pub fn sweep_at(
    table: BinaryTable,
    target: AttrId,
    counter: AttrId,
    levels: &[usize],
    limits: &MineLimits,
) -> Result<RankRun> {
    check_levels(levels)?;
    let mut run = rank_at(table, target, counter, levels[0], limits)?;
    sweep_lower_levels(&mut run, levels, limits)?;
    Ok(run)
}

fn check_levels(levels: &[usize]) -> Result<()> {
    if levels.is_empty() {
        return Err(Error::BadSupportLevels("no levels given".into()));
    }
    if levels.iter().any(|&l| l == 0) {
        return Err(Error::BadSupportLevels("levels must be at least 1".into()));
    }
    if levels.windows(2).any(|w| w[0] <= w[1]) {
        return Err(Error::BadSupportLevels(
            "levels must be strictly descending".into(),
        ));
    }
    Ok(())
}

fn sweep_lower_levels(run: &mut RankRun, levels: &[usize], limits: &MineLimits) -> Result<()> {
    for &level in &levels[1..] {
        let (lower_target, lower_counter) = {
            let (a, b) = rayon::join(
                || mine(&run.table, run.report.target, level, limits),
                || mine(&run.table, run.report.counter, level, limits),
            );
            (a?, b?)
        };
        let threshold = run.report.threshold;
        for entry in &mut run.report.ranking {
            if entry.tsup_counter != 0.0 || entry.inflated {
                continue;
            }
            let lower_tsup_counter = total_support(&lower_counter, entry.attribute);
            if lower_tsup_counter > 0.0 {
                let lower_tsup_target = total_support(&lower_target, entry.attribute);
                if relevance_value(lower_tsup_target, lower_tsup_counter) < threshold {
                    entry.inflated = true;
                }
            }
        }
    }
    run.report.support_levels = levels.to_vec();
    Ok(())
}

/// One ranked attribute with its catalog annotations, for grouped reports and
/// charts.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct GroupedEntry {
    pub rank: usize,
    pub attribute: String,
    pub category: String,
    pub relevance: f64,
    pub above_threshold: bool,
    pub inflated: bool,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct CategoryGroup {
    pub category: String,
    pub entries: Vec<GroupedEntry>,
}

/// Top of a ranking bucketed by catalog category, categories in order of
/// first appearance in the ranking.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct GroupedReport {
    pub threshold: f64,
    pub top_n: usize,
    pub groups: Vec<CategoryGroup>,
}

impl GroupedReport {
    pub fn entry_count(&self) -> usize {
        self.groups.iter().map(|g| g.entries.len()).sum()
    }
}

/// Annotates the `top_n` ranked attributes with their catalog categories.
/// `top_n` larger than the ranking is clamped.
pub fn group_by_category(
    report: &RelevanceReport,
    table: &BinaryTable,
    top_n: usize,
) -> GroupedReport {
    let n = top_n.min(report.ranking.len());
    let mut groups: Vec<CategoryGroup> = Vec::new();
    for (i, entry) in report.ranking[..n].iter().enumerate() {
        let def = table.catalog().def(entry.attribute);
        let grouped = GroupedEntry {
            rank: i + 1,
            attribute: def.name.clone(),
            category: def.category.clone(),
            relevance: entry.relevance,
            above_threshold: entry.above_threshold,
            inflated: entry.inflated,
        };
        match groups.iter_mut().find(|g| g.category == def.category) {
            Some(g) => g.entries.push(grouped),
            None => groups.push(CategoryGroup {
                category: def.category.clone(),
                entries: vec![grouped],
            }),
        }
    }
    GroupedReport {
        threshold: report.threshold,
        top_n: n,
        groups,
    }
}

/// Writes the full ranking as CSV with columns rank, attribute, category,
/// tsup_target, tsup_counter, relevance, above_threshold, inflated. Reals are
/// rendered with two decimals.
pub fn write_relevance_csv<W: Write>(
    report: &RelevanceReport,
    table: &BinaryTable,
    w: W,
) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    let err = |e: csv::Error| Error::BadTableCsv(e.to_string());
    wtr.write_record([
        "rank",
        "attribute",
        "category",
        "tsup_target",
        "tsup_counter",
        "relevance",
        "above_threshold",
        "inflated",
    ])
    .map_err(err)?;
    for (i, entry) in report.ranking.iter().enumerate() {
        let def = table.catalog().def(entry.attribute);
        wtr.write_record([
            (i + 1).to_string(),
            def.name.clone(),
            def.category.clone(),
            format!("{:.2}", entry.tsup_target),
            format!("{:.2}", entry.tsup_counter),
            format!("{:.2}", entry.relevance),
            entry.above_threshold.to_string(),
            entry.inflated.to_string(),
        ])
        .map_err(err)?;
    }
    wtr.flush().map_err(|e| Error::BadTableCsv(e.to_string()))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::table::six_row_fixture;

    #[test]
    fn relevance_formula_reproduces_published_arithmetic() {
        assert!((relevance_value(7817.83, 34.87) - 217.9).abs() < 0.1);
        assert!((relevance_value(3115.71, 217.35) - 14.2).abs() < 0.1);
        assert!((1488.0_f64 / 332.0 - 4.48).abs() < 0.01);
    }

    #[test]
    fn total_support_splits_support_across_the_antecedent() {
        let t = six_row_fixture();
        let rules = mine(&t, 4, 1, &MineLimits::default()).unwrap();
        assert_eq!(total_support(&rules, 0), 4.0);
        assert_eq!(total_support(&rules, 1), 0.0);
    }

    #[test]
    fn fixture_ranking_matches_hand_computation() {
        let t = six_row_fixture();
        let run = relevance_rank(&t, 4, 1, &MineLimits::default()).unwrap();
        assert_eq!(run.report.threshold, 2.0);
        let a0 = run.report.entry(0).unwrap();
        assert_eq!(a0.relevance, 4.0);
        assert!(a0.above_threshold);
        // a2 backs the counter side: rel = 0 with tsup_counter = 0.5.
        let a2 = run.report.entry(2).unwrap();
        assert_eq!(a2.tsup_counter, 0.5);
        assert!(!a2.above_threshold);
        for attr in [1, 3] {
            let e = run.report.entry(attr).unwrap();
            assert_eq!(e.relevance, 0.0);
            assert!(!e.above_threshold);
        }
        // Ranking covers exactly the eligible non-outcome attributes.
        let ids: Vec<AttrId> = run.report.ranking.iter().map(|e| e.attribute).collect();
        assert_eq!(ids[0], 0);
        assert_eq!(ids.len(), 4);
    }

    #[test]
    fn degenerate_targets_are_rejected() {
        let all_ones = BinaryTable::from_bits(&["x", "d"], &["r0", "r1"], &[&[1, 1], &[0, 1]])
            .unwrap();
        assert!(matches!(
            relevance_rank(&all_ones, 1, 1, &MineLimits::default()),
            Err(Error::DegenerateTarget { .. })
        ));
        let all_zeros = BinaryTable::from_bits(&["x", "d"], &["r0", "r1"], &[&[1, 0], &[0, 0]])
            .unwrap();
        assert!(matches!(
            relevance_rank(&all_zeros, 1, 1, &MineLimits::default()),
            Err(Error::DegenerateTarget { .. })
        ));
    }

    #[test]
    fn swapping_target_and_counter_swaps_the_sides() {
        let t = six_row_fixture();
        let (t2, nd) = t.negate_column(4).unwrap();
        let toward = rank_at(t2.clone(), 4, nd, 1, &MineLimits::default()).unwrap();
        let away = rank_at(t2, nd, 4, 1, &MineLimits::default()).unwrap();
        for e in &toward.report.ranking {
            let mirrored = away.report.entry(e.attribute).unwrap();
            assert_eq!(e.tsup_target, mirrored.tsup_counter);
            assert_eq!(e.tsup_counter, mirrored.tsup_target);
        }
        assert!((toward.report.threshold - 1.0 / away.report.threshold).abs() < 1e-12);
    }

    #[test]
    fn an_existing_complement_column_is_reused() {
        let t = six_row_fixture();
        let (t2, nd) = t.negate_column(4).unwrap();
        let run = relevance_rank(&t2, 4, 1, &MineLimits::default()).unwrap();
        assert_eq!(run.report.counter, nd);
        assert_eq!(run.table.attr_count(), t2.attr_count());
    }

    #[test]
    fn single_level_sweep_flags_nothing() {
        let t = six_row_fixture();
        let run = sweep_min_support(&t, 4, &[1], &MineLimits::default()).unwrap();
        assert!(run.report.ranking.iter().all(|e| !e.inflated));
        assert_eq!(run.report.support_levels, vec![1]);
    }

    #[test]
    fn sweep_validates_levels() {
        let t = six_row_fixture();
        let limits = MineLimits::default();
        assert!(matches!(
            sweep_min_support(&t, 4, &[], &limits),
            Err(Error::BadSupportLevels(_))
        ));
        assert!(matches!(
            sweep_min_support(&t, 4, &[5, 10], &limits),
            Err(Error::BadSupportLevels(_))
        ));
        assert!(matches!(
            sweep_min_support(&t, 4, &[5, 0], &limits),
            Err(Error::BadSupportLevels(_))
        ));
    }

    #[test]
    fn grouping_clamps_and_keeps_rank_order() {
        let t = six_row_fixture();
        let run = relevance_rank(&t, 4, 1, &MineLimits::default()).unwrap();
        let top1 = group_by_category(&run.report, &run.table, 1);
        assert_eq!(top1.entry_count(), 1);
        assert_eq!(top1.groups[0].entries[0].attribute, "a0");
        assert_eq!(top1.groups[0].entries[0].rank, 1);
        let all = group_by_category(&run.report, &run.table, 99);
        assert_eq!(all.entry_count(), 4);
    }

    #[test]
    fn csv_renders_two_decimals() {
        let t = six_row_fixture();
        let run = relevance_rank(&t, 4, 1, &MineLimits::default()).unwrap();
        let mut buf = Vec::new();
        write_relevance_csv(&run.report, &run.table, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "rank,attribute,category,tsup_target,tsup_counter,relevance,above_threshold,inflated"
        );
        assert_eq!(lines.next().unwrap(), "1,a0,,4.00,0.00,4.00,true,false");
    }
}
