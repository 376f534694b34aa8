//! Acceptance gate. Each test covers one numbered criterion and prints a
//! PASS/FAIL line (visible with `cargo test --test acceptance -- --nocapture`).
//! Heavy criteria share a lock so their runtime budgets are measured alone.

use std::panic::{catch_unwind, resume_unwind, AssertUnwindSafe};
use std::sync::{Mutex, MutexGuard};
use std::time::{Duration, Instant};

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use relmine::analytics::{
    aggregate_flows, deviation_from_mean, rate_table, validate_flows_json, ClassDef, ClassRule,
    Predicate, RateMode, StageSpec,
};
use relmine::relevance::{self, sweep_min_support};
use relmine::run::{cmd_rank, RunConfig};
use relmine::{
    mine, oracle_mine, relevance_rank, BinaryTable, ImplicationSet, MineLimits, RawRecordSet,
};

static HEAVY: Mutex<()> = Mutex::new(());

fn heavy_lock() -> MutexGuard<'static, ()> {
    HEAVY.lock().unwrap_or_else(|e| e.into_inner())
}

fn criterion(n: usize, desc: &str, body: impl FnOnce()) {
    let outcome = catch_unwind(AssertUnwindSafe(body));
    match &outcome {
        Ok(()) => println!("PASS criterion {n}: {desc}"),
        Err(_) => println!("FAIL criterion {n}: {desc}"),
    }
    if let Err(e) = outcome {
        resume_unwind(e);
    }
}

fn random_table(rng: &mut ChaCha8Rng, max_attrs: usize, max_rows: usize) -> BinaryTable {
    let attrs = rng.random_range(3..=max_attrs);
    let rows = rng.random_range(4..=max_rows);
    let density = rng.random_range(0.2..0.8);
    let names: Vec<String> = (0..attrs).map(|i| format!("a{i}")).collect();
    let name_refs: Vec<&str> = names.iter().map(String::as_str).collect();
    let row_ids: Vec<String> = (0..rows).map(|r| format!("r{r}")).collect();
    let id_refs: Vec<&str> = row_ids.iter().map(String::as_str).collect();
    let cells: Vec<Vec<u8>> = (0..rows)
        .map(|_| (0..attrs).map(|_| rng.random_bool(density) as u8).collect())
        .collect();
    let cell_refs: Vec<&[u8]> = cells.iter().map(Vec::as_slice).collect();
    BinaryTable::from_bits(&name_refs, &id_refs, &cell_refs).unwrap()
}

fn fixture() -> BinaryTable {
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

#[test]
fn criterion_1_relevance_arithmetic() {
    criterion(1, "published relevance and threshold arithmetic", || {
        let rel1 = relevance::relevance_value(7817.83, 34.87);
        assert!((rel1 - 217.9).abs() <= 0.1, "rel1 = {rel1}");
        let rel2 = relevance::relevance_value(3115.71, 217.35);
        assert!((rel2 - 14.2).abs() <= 0.1, "rel2 = {rel2}");
        let threshold = 1488.0_f64 / 332.0;
        assert!((threshold - 4.48).abs() <= 0.01, "threshold = {threshold}");
    });
}

/// Table whose only rule for `d` is the full antecedent of the given width,
/// supported by `support` rows.
fn single_rule_table(width: usize, support: usize) -> (BinaryTable, usize) {
    let names: Vec<String> = (0..width)
        .map(|i| format!("s{i}"))
        .chain(["d".to_string()])
        .collect();
    let name_refs: Vec<&str> = names.iter().map(String::as_str).collect();
    let mut cells: Vec<Vec<u8>> = Vec::new();
    for _ in 0..support {
        let mut row = vec![1u8; width + 1];
        row[width] = 1;
        cells.push(row);
    }
    // One counterexample per attribute pins the full set as the only
    // minimal antecedent.
    for skip in 0..width {
        let mut row = vec![1u8; width + 1];
        row[skip] = 0;
        row[width] = 0;
        cells.push(row);
    }
    let row_ids: Vec<String> = (0..cells.len()).map(|r| format!("r{r}")).collect();
    let id_refs: Vec<&str> = row_ids.iter().map(String::as_str).collect();
    let cell_refs: Vec<&[u8]> = cells.iter().map(Vec::as_slice).collect();
    let table = BinaryTable::from_bits(&name_refs, &id_refs, &cell_refs).unwrap();
    (table, width)
}

#[test]
fn criterion_2_per_rule_contributions() {
    criterion(2, "per-rule total-support contributions", || {
        let (table, d) = single_rule_table(4, 48);
        let rules = mine(&table, d, 1, &MineLimits::default()).unwrap();
        assert_eq!(rules.len(), 1);
        assert_eq!(rules.rules[0].support.len(), 48);
        let tsup = relevance::total_support(&rules, 0);
        assert_eq!(tsup, 12.00, "48/4 must be exact");

        let (table, d) = single_rule_table(6, 11);
        let rules = mine(&table, d, 1, &MineLimits::default()).unwrap();
        assert_eq!(rules.len(), 1);
        let tsup = relevance::total_support(&rules, 0);
        assert!((tsup - 1.83).abs() <= 0.005, "11/6 = {tsup}");
    });
}

#[test]
fn criterion_3_oracle_equivalence() {
    let _guard = heavy_lock();
    criterion(3, "miner equals brute-force oracle on 200 random tables", || {
        let mut rng = ChaCha8Rng::seed_from_u64(0x0ACC_E513);
        let start = Instant::now();
        for case in 0..200 {
            let table = random_table(&mut rng, 10, 24);
            let consequent = rng.random_range(0..table.attr_count());
            let min_support = rng.random_range(1..=3);
            let fast = mine(&table, consequent, min_support, &MineLimits::default()).unwrap();
            let slow = oracle_mine(&table, consequent, min_support).unwrap();
            assert_eq!(fast.rules, slow.rules, "case {case} rules diverge");
            assert_eq!(fast.empty_edge, slow.empty_edge, "case {case} empty_edge");
        }
        let elapsed = start.elapsed();
        assert!(elapsed < Duration::from_secs(60), "took {elapsed:?}");
    });
}

fn rule_names(set: &ImplicationSet, table: &BinaryTable) -> Vec<(Vec<String>, Vec<String>)> {
    set.iter()
        .map(|r| {
            (
                r.antecedent
                    .iter()
                    .map(|&a| table.catalog().def(a).name.clone())
                    .collect(),
                r.support
                    .iter()
                    .map(|row| table.row_ids()[row].clone())
                    .collect(),
            )
        })
        .collect()
}

#[test]
fn criterion_4_fixture_end_to_end() {
    criterion(4, "six-row fixture mining, ranking, and byte stability", || {
        let table = fixture();
        let d = table.catalog().require("d").unwrap();
        let rules_d = mine(&table, d, 1, &MineLimits::default()).unwrap();
        assert_eq!(
            rule_names(&rules_d, &table),
            vec![(
                vec!["a0".to_string()],
                vec!["r0".into(), "r1".into(), "r3".into(), "r5".into()]
            )]
        );
        let (negated, nd) = table.negate_column(d).unwrap();
        let rules_nd = mine(&negated, nd, 1, &MineLimits::default()).unwrap();
        assert_eq!(
            rule_names(&rules_nd, &negated),
            vec![(
                vec!["a2".to_string(), "a3".into()],
                vec!["r4".to_string()]
            )]
        );

        let run = relevance_rank(&table, d, 1, &MineLimits::default()).unwrap();
        assert_eq!(run.report.threshold, 2.00);
        let a0 = run.report.entry(0).unwrap();
        assert_eq!(a0.relevance, 4.00);
        assert!(a0.above_threshold);

        // Byte stability: three repeat runs, then explicit worker counts,
        // all into the same directory; every artifact must be identical.
        let tmp = tempfile::tempdir().unwrap();
        let table_path = tmp.path().join("table.csv");
        let catalog_path = tmp.path().join("catalog.json");
        std::fs::write(&table_path, table.to_csv_string().unwrap()).unwrap();
        std::fs::write(&catalog_path, table.catalog_json_string().unwrap()).unwrap();
        let out = tmp.path().join("out");
        let base = RunConfig {
            table: Some(table_path.to_str().unwrap().into()),
            catalog: Some(catalog_path.to_str().unwrap().into()),
            target: Some("d".into()),
            min_support: Some(1),
            out: Some(out.to_str().unwrap().into()),
            ..RunConfig::default()
        };
        let snapshot = |label: &str, expect: Option<&Vec<(String, Vec<u8>)>>| {
            let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(&out)
                .unwrap()
                .map(|e| {
                    let e = e.unwrap();
                    (
                        e.file_name().into_string().unwrap(),
                        std::fs::read(e.path()).unwrap(),
                    )
                })
                .collect();
            files.sort();
            if let Some(expect) = expect {
                assert_eq!(
                    expect.len(),
                    files.len(),
                    "{label}: artifact set changed"
                );
                for (a, b) in expect.iter().zip(&files) {
                    assert_eq!(a.0, b.0, "{label}: artifact names diverge");
                    assert_eq!(a.1, b.1, "{label}: {} changed", a.0);
                }
            }
            files
        };
        cmd_rank(&base.resolve("rank")).unwrap();
        let first = snapshot("first", None);
        assert_eq!(first.len(), 7);
        for _ in 0..2 {
            cmd_rank(&base.resolve("rank")).unwrap();
            snapshot("rerun", Some(&first));
        }
        for workers in [1usize, 4] {
            let cfg = RunConfig {
                workers: Some(workers),
                ..base.clone()
            };
            cmd_rank(&cfg.resolve("rank")).unwrap();
            snapshot(&format!("workers={workers}"), Some(&first));
        }
    });
}

#[test]
fn criterion_5_randomized_properties() {
    let _guard = heavy_lock();
    criterion(5, "soundness, antichain, antitonicity, involution, threshold", || {
        let mut rng = ChaCha8Rng::seed_from_u64(0x0ACC_E5F1);
        let limits = MineLimits::default();
        for case in 0..1000 {
            let mut table = random_table(&mut rng, 12, 40);
            let target = rng.random_range(0..table.attr_count());
            // Pin one present and one absent row so the target is never
            // degenerate and ranking always runs.
            table = pin_target(&table, target);
            let low = rng.random_range(1..=2);
            let high = low + rng.random_range(1..=3);

            let loose = mine(&table, target, low, &limits).unwrap();
            for rule in loose.iter() {
                assert!(
                    table.holds(&rule.antecedent, target).unwrap(),
                    "case {case}: unsound rule"
                );
                assert!(rule.support.len() >= low, "case {case}: support floor");
                assert_eq!(
                    rule.support.to_vec(),
                    table.support(&rule.antecedent).unwrap().to_vec(),
                    "case {case}: stale support"
                );
            }
            let rules: Vec<_> = loose.iter().collect();
            for (i, a) in rules.iter().enumerate() {
                for (j, b) in rules.iter().enumerate() {
                    if i != j {
                        assert!(
                            !a.antecedent.iter().all(|x| b.antecedent.contains(x)),
                            "case {case}: antichain broken"
                        );
                    }
                }
            }

            let strict = mine(&table, target, high, &limits).unwrap();
            for rule in strict.iter() {
                assert!(
                    loose.iter().any(|r| r.antecedent == rule.antecedent),
                    "case {case}: rule appears only at the higher floor"
                );
            }

            let (t1, not_target) = table.negate_column(target).unwrap();
            let (t2, back) = t1.negate_column(not_target).unwrap();
            assert_eq!(
                t2.support(&[back]).unwrap().to_vec(),
                t2.support(&[target]).unwrap().to_vec(),
                "case {case}: double negation is not the identity"
            );

            let run = relevance_rank(&table, target, low, &limits).unwrap();
            let mut prev = f64::INFINITY;
            for entry in &run.report.ranking {
                assert!(
                    entry.relevance <= prev,
                    "case {case}: ranking not descending"
                );
                prev = entry.relevance;
                assert_eq!(
                    entry.relevance,
                    relevance::relevance_value(entry.tsup_target, entry.tsup_counter),
                    "case {case}: relevance drifts from its inputs"
                );
                let expected_above = !(entry.tsup_target == 0.0 && entry.tsup_counter == 0.0)
                    && entry.relevance >= run.report.threshold;
                assert_eq!(
                    entry.above_threshold, expected_above,
                    "case {case}: threshold marking inconsistent"
                );
            }
        }
    });
}

/// Copy of `table` with the target column forced non-degenerate: row 0 gains
/// the attribute, row 1 loses it.
fn pin_target(table: &BinaryTable, target: usize) -> BinaryTable {
    let names: Vec<String> = table
        .catalog()
        .iter()
        .map(|(_, d)| d.name.clone())
        .collect();
    let name_refs: Vec<&str> = names.iter().map(String::as_str).collect();
    let id_refs: Vec<&str> = table.row_ids().iter().map(String::as_str).collect();
    let mut cells: Vec<Vec<u8>> = (0..table.row_count())
        .map(|r| {
            (0..table.attr_count())
                .map(|a| table.support(&[a]).unwrap().contains(r) as u8)
                .collect()
        })
        .collect();
    cells[0][target] = 1;
    cells[1][target] = 0;
    let cell_refs: Vec<&[u8]> = cells.iter().map(Vec::as_slice).collect();
    BinaryTable::from_bits(&name_refs, &id_refs, &cell_refs).unwrap()
}

#[test]
fn criterion_6_inflation_guard() {
    criterion(6, "support sweep flags counter-scarce relevance", || {
        // 31 rows over x, u, w, d:
        //   12 of {x,u,d}, 6 of {x,w}, 1 of {u,w}, 1 of {w,d}, 11 of {d}.
        // sup(d) = 24, sup(not d) = 7, threshold = 24/7.
        // At min support 10 the counter side is empty; at 5 the rule
        // {x,w} -> not d (support 6) appears, and x's recomputed relevance
        // 6/(3+1) = 1.5 collapses below the threshold. u's counter side
        // stays empty ({u,w} has support 1), so u keeps its standing.
        let mut cells: Vec<&[u8]> = Vec::new();
        for _ in 0..12 {
            cells.push(&[1, 1, 0, 1]);
        }
        for _ in 0..6 {
            cells.push(&[1, 0, 1, 0]);
        }
        cells.push(&[0, 1, 1, 0]);
        cells.push(&[0, 0, 1, 1]);
        for _ in 0..11 {
            cells.push(&[0, 0, 0, 1]);
        }
        let row_ids: Vec<String> = (0..cells.len()).map(|r| format!("r{r:02}")).collect();
        let id_refs: Vec<&str> = row_ids.iter().map(String::as_str).collect();
        let table = BinaryTable::from_bits(&["x", "u", "w", "d"], &id_refs, &cells).unwrap();
        let d = 3;
        assert_eq!(table.support(&[d]).unwrap().len(), 24);
        assert_eq!(table.support(&[0, 2]).unwrap().len(), 6);

        let run = sweep_min_support(&table, d, &[10, 5], &MineLimits::default()).unwrap();
        let threshold = run.report.threshold;
        assert!((threshold - 24.0 / 7.0).abs() < 1e-12);

        let x = run.report.entry(0).unwrap();
        assert_eq!(x.tsup_target, 6.0);
        assert_eq!(x.tsup_counter, 0.0);
        assert!(x.above_threshold, "x clears the threshold at the base floor");
        assert!(x.inflated, "x must be flagged: 6/(3+1) < 24/7");

        let u = run.report.entry(1).unwrap();
        assert!(u.above_threshold);
        assert!(!u.inflated, "u's counter side never materializes");

        // Cross-check the flag against the recomputed value it encodes.
        let counter = run.report.counter;
        let lower = mine(&run.table, counter, 5, &MineLimits::default()).unwrap();
        let tsup_counter_5 = relevance::total_support(&lower, 0);
        assert_eq!(tsup_counter_5, 3.0);
        let rel_5 = relevance::relevance_value(x.tsup_target, tsup_counter_5);
        assert!(rel_5 < threshold);

        // Without the sweep no flag is raised.
        let plain = relevance_rank(&table, d, 10, &MineLimits::default()).unwrap();
        assert!(!plain.report.entry(0).unwrap().inflated);
    });
}

fn stage_rule(name: &str, column: &str, classes: usize) -> ClassRule {
    let mut defs: Vec<ClassDef> = (0..classes - 1)
        .map(|v| {
            ClassDef::when(
                &format!("{name}-{v}"),
                Predicate::Equals {
                    column: column.into(),
                    value: v.to_string(),
                },
            )
        })
        .collect();
    defs.push(ClassDef::otherwise(&format!("{name}-rest")));
    ClassRule::new(name, defs)
}

#[test]
fn criterion_7_analytics_invariants() {
    let _guard = heavy_lock();
    criterion(7, "flow conservation, rate sums, deviation balance", || {
        let mut rng = ChaCha8Rng::seed_from_u64(0x0ACC_E5A7);
        let stages = StageSpec::new(vec![
            stage_rule("entry", "s0", 3),
            stage_rule("mid", "s1", 3),
            stage_rule("exit", "s2", 3),
        ]);
        let group_by = stage_rule("group", "g", 3);
        let outcomes = stage_rule("outcome", "o", 4);
        for case in 0..500 {
            let n = rng.random_range(1..=60);
            let mut body = String::from("id,g,o,s0,s1,s2\n");
            for i in 0..n {
                body.push_str(&format!(
                    "r{i},{},{},{},{},{}\n",
                    rng.random_range(0..3),
                    rng.random_range(0..4),
                    rng.random_range(0..3),
                    rng.random_range(0..3),
                    rng.random_range(0..3),
                ));
            }
            let records = RawRecordSet::from_csv_str(&body, "id").unwrap();

            let flows = aggregate_flows(&records, &stages).unwrap();
            assert!(flows.conservation_holds(), "case {case}: conservation");
            validate_flows_json(&flows.to_json_string()).unwrap();

            for mode in [RateMode::Cumulative, RateMode::Disjoint] {
                let rates = rate_table(&records, &group_by, &outcomes, mode, 20).unwrap();
                for g in rates.groups.iter().chain([&rates.overall]) {
                    if g.count == 0 {
                        assert!(g.percents.iter().all(|&p| p == 0.0));
                        continue;
                    }
                    match mode {
                        RateMode::Disjoint => {
                            let sum: f64 = g.percents.iter().sum();
                            assert!(
                                (sum - 100.0).abs() < 1e-9,
                                "case {case}: group {} sums to {sum}",
                                g.label
                            );
                        }
                        RateMode::Cumulative => {
                            let horizons = &g.percents[..g.percents.len() - 1];
                            for w in horizons.windows(2) {
                                assert!(
                                    w[1] >= w[0] - 1e-12,
                                    "case {case}: cumulative rates decreased"
                                );
                            }
                        }
                    }
                }
                let dev = deviation_from_mean(&rates);
                let total: usize = rates.groups.iter().map(|g| g.count).sum();
                for j in 0..dev.outcome_classes.len() {
                    let weighted: f64 = dev
                        .rows
                        .iter()
                        .map(|r| r.count as f64 / total as f64 * r.deviations[j])
                        .sum();
                    assert!(
                        weighted.abs() < 1e-9,
                        "case {case}: weighted deviations miss zero"
                    );
                }
            }
        }

        // Hand-counted example: of four records in one group, one graduates
        // in year 3, one in year 5, two never. Cumulative: 25 / 50 / 50, and
        // 50 never.
        let records = RawRecordSet::from_csv_str("id,year\nr1,3\nr2,5\nr3,\nr4,\n", "id").unwrap();
        let group = ClassRule::new("cohort", vec![ClassDef::otherwise("all")]);
        let le = |v: f64| Predicate::Le {
            column: "year".into(),
            value: v,
        };
        let grad = ClassRule::new(
            "graduation",
            vec![
                ClassDef::when("4yr", le(4.0)),
                ClassDef::when(
                    "4-6yr",
                    Predicate::All(vec![
                        Predicate::Gt {
                            column: "year".into(),
                            value: 4.0,
                        },
                        le(6.0),
                    ]),
                ),
                ClassDef::when(
                    ">6yr",
                    Predicate::Gt {
                        column: "year".into(),
                        value: 6.0,
                    },
                ),
                ClassDef::otherwise("never"),
            ],
        );
        let rates =
            rate_table(&records, &group, &grad, RateMode::Cumulative, 20).unwrap();
        assert_eq!(rates.groups[0].percents, vec![25.0, 50.0, 50.0, 50.0]);
    });
}

/// Synthetic cohort at the target scale: two seven-bin score families that
/// track the latent value deciding the outcome, nine wide categorical noise
/// families, a two-value family, and the outcome column; 206 attributes in
/// all. Extreme score bins imply the outcome alone; noise co-occurrences
/// beyond pairs fall under a support floor of 10 at this row count, which
/// keeps the implication structure realistic but bounded.
fn scale_table(rows: usize, seed: u64) -> (BinaryTable, usize) {
    let signal_families = 2;
    let signal_bins = 7;
    let noise_families = 9;
    let noise_bins = 21;
    let mut names: Vec<String> = Vec::new();
    for f in 0..signal_families {
        for b in 0..signal_bins {
            names.push(format!("score{f}=b{b}"));
        }
    }
    for f in 0..noise_families {
        for b in 0..noise_bins {
            names.push(format!("f{f:02}=v{b:02}"));
        }
    }
    names.push("aid=yes".into());
    names.push("aid=no".into());
    names.push("d".into());
    let d = names.len() - 1;
    assert_eq!(names.len(), 206);
    let name_refs: Vec<&str> = names.iter().map(String::as_str).collect();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cells: Vec<Vec<u8>> = Vec::with_capacity(rows);
    for _ in 0..rows {
        let mut row = vec![0u8; names.len()];
        let z: f64 = rng.random();
        for f in 0..signal_families {
            let v = (z + rng.random_range(-0.05..0.05)).clamp(0.0, 0.999_999);
            let bin = (v * signal_bins as f64) as usize;
            row[f * signal_bins + bin] = 1;
        }
        for f in 0..noise_families {
            let bin = rng.random_range(0..noise_bins);
            row[signal_families * signal_bins + f * noise_bins + bin] = 1;
        }
        let aid_base = signal_families * signal_bins + noise_families * noise_bins;
        if rng.random_bool(0.3) {
            row[aid_base] = 1;
        } else {
            row[aid_base + 1] = 1;
        }
        if z > 0.55 {
            row[d] = 1;
        }
        cells.push(row);
    }
    let row_ids: Vec<String> = (0..rows).map(|r| format!("s{r:04}")).collect();
    let id_refs: Vec<&str> = row_ids.iter().map(String::as_str).collect();
    let cell_refs: Vec<&[u8]> = cells.iter().map(Vec::as_slice).collect();
    (
        BinaryTable::from_bits(&name_refs, &id_refs, &cell_refs).unwrap(),
        d,
    )
}

#[test]
fn criterion_8_scale_smoke() {
    let _guard = heavy_lock();
    criterion(8, "3000 x 206 ranking finishes within five minutes", || {
        let (table, d) = scale_table(3000, 0x0ACC_E5CA);
        assert_eq!(table.attr_count(), 206);
        assert_eq!(table.row_count(), 3000);
        let start = Instant::now();
        let run = relevance_rank(&table, d, 10, &MineLimits::default()).unwrap();
        let elapsed = start.elapsed();
        println!(
            "scale run: {} target rules, {} counter rules, {:.1}s, truncated: {}/{}",
            run.rules_target.len(),
            run.rules_counter.len(),
            elapsed.as_secs_f64(),
            run.rules_target.truncated,
            run.rules_counter.truncated,
        );
        assert!(
            elapsed < Duration::from_secs(300),
            "rank took {elapsed:?}, budget is five minutes"
        );
        assert!(!run.report.ranking.is_empty());
        assert!(
            !run.rules_target.truncated && !run.rules_counter.truncated,
            "scale run unexpectedly hit a search budget"
        );
    });
}
