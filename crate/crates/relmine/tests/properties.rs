//! Randomized property checks over the public API.

use proptest::prelude::*;

use relmine::analytics::{
    deviation_from_mean, rate_table, ClassDef, ClassRule, Predicate, RateMode,
};
use relmine::ingest::RawRecordSet;
use relmine::{mine, BinaryTable, MineLimits};

fn table_strategy(
    max_attrs: usize,
    max_rows: usize,
) -> impl Strategy<Value = (BinaryTable, usize)> {
    (2usize..=max_attrs, 2usize..=max_rows)
        .prop_flat_map(|(attrs, rows)| {
            (
                proptest::collection::vec(
                    proptest::collection::vec(proptest::bool::weighted(0.5), attrs),
                    rows,
                ),
                0..attrs,
            )
        })
        .prop_map(|(cells, consequent)| {
            let names: Vec<String> = (0..cells[0].len()).map(|i| format!("a{i}")).collect();
            let name_refs: Vec<&str> = names.iter().map(String::as_str).collect();
            let row_ids: Vec<String> = (0..cells.len()).map(|r| format!("r{r}")).collect();
            let id_refs: Vec<&str> = row_ids.iter().map(String::as_str).collect();
            let rows: Vec<Vec<u8>> = cells
                .iter()
                .map(|row| row.iter().map(|&b| b as u8).collect())
                .collect();
            let row_refs: Vec<&[u8]> = rows.iter().map(Vec::as_slice).collect();
            let table = BinaryTable::from_bits(&name_refs, &id_refs, &row_refs).unwrap();
            (table, consequent)
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn mined_rules_hold_and_form_an_antichain(
        (table, consequent) in table_strategy(9, 20),
        min_support in 1usize..4,
    ) {
        let set = mine(&table, consequent, min_support, &MineLimits::default()).unwrap();
        for rule in set.iter() {
            prop_assert!(table.holds(&rule.antecedent, consequent).unwrap());
            prop_assert!(rule.support.len() >= min_support);
            prop_assert_eq!(
                rule.support.to_vec(),
                table.support(&rule.antecedent).unwrap().to_vec()
            );
        }
        let rules: Vec<_> = set.iter().collect();
        for (i, a) in rules.iter().enumerate() {
            for (j, b) in rules.iter().enumerate() {
                if i != j {
                    prop_assert!(
                        !a.antecedent.iter().all(|x| b.antecedent.contains(x)),
                        "antecedent {:?} subsumes {:?}",
                        a.antecedent,
                        b.antecedent
                    );
                }
            }
        }
    }

    #[test]
    fn raising_the_floor_only_removes_rules(
        (table, consequent) in table_strategy(9, 20),
        low in 1usize..3,
        bump in 1usize..4,
    ) {
        let limits = MineLimits::default();
        let loose = mine(&table, consequent, low, &limits).unwrap();
        let strict = mine(&table, consequent, low + bump, &limits).unwrap();
        for rule in strict.iter() {
            prop_assert!(
                loose.iter().any(|r| r.antecedent == rule.antecedent),
                "rule missing at lower floor"
            );
        }
    }

    #[test]
    fn mining_is_deterministic(
        (table, consequent) in table_strategy(8, 16),
    ) {
        let a = mine(&table, consequent, 1, &MineLimits::default()).unwrap();
        let b = mine(&table, consequent, 1, &MineLimits::default()).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn table_csv_roundtrip_keeps_fingerprint(
        (table, _) in table_strategy(8, 16),
    ) {
        let csv = table.to_csv_string().unwrap();
        let catalog = table.catalog_json_string().unwrap();
        let back = BinaryTable::read_csv(csv.as_bytes(), Some(&catalog)).unwrap();
        prop_assert_eq!(back.fingerprint(), table.fingerprint());
    }

    #[test]
    fn rules_jsonl_roundtrip_is_lossless(
        (table, consequent) in table_strategy(8, 16),
    ) {
        let set = mine(&table, consequent, 1, &MineLimits::default()).unwrap();
        let mut buf = Vec::new();
        set.write_jsonl(&table, &mut buf).unwrap();
        let back = relmine::ImplicationSet::read_jsonl(&table, buf.as_slice()).unwrap();
        prop_assert_eq!(back, set);
    }

    #[test]
    fn rate_rows_sum_and_accumulate(
        values in proptest::collection::vec((0u8..3, 0u8..4), 1..50),
    ) {
        let mut body = String::from("id,g,o\n");
        for (i, (g, o)) in values.iter().enumerate() {
            body.push_str(&format!("r{i},{g},{o}\n"));
        }
        let records = RawRecordSet::from_csv_str(&body, "id").unwrap();
        let eqp = |column: &str, value: String| Predicate::Equals { column: column.into(), value };
        let group_by = ClassRule::new(
            "g",
            vec![
                ClassDef::when("g0", eqp("g", "0".into())),
                ClassDef::when("g1", eqp("g", "1".into())),
                ClassDef::otherwise("g2"),
            ],
        );
        let outcomes = ClassRule::new(
            "o",
            vec![
                ClassDef::when("o0", eqp("o", "0".into())),
                ClassDef::when("o1", eqp("o", "1".into())),
                ClassDef::when("o2", eqp("o", "2".into())),
                ClassDef::otherwise("rest"),
            ],
        );
        let disjoint =
            rate_table(&records, &group_by, &outcomes, RateMode::Disjoint, 20).unwrap();
        for g in &disjoint.groups {
            if g.count > 0 {
                prop_assert!((g.percents.iter().sum::<f64>() - 100.0).abs() < 1e-9);
            }
        }
        let cumulative =
            rate_table(&records, &group_by, &outcomes, RateMode::Cumulative, 20).unwrap();
        for g in &cumulative.groups {
            for w in g.percents[..g.percents.len() - 1].windows(2) {
                prop_assert!(w[1] >= w[0] - 1e-12);
            }
        }
        let dev = deviation_from_mean(&cumulative);
        let total: usize = cumulative.groups.iter().map(|g| g.count).sum();
        for j in 0..dev.outcome_classes.len() {
            let weighted: f64 = dev
                .rows
                .iter()
                .map(|r| r.count as f64 / total as f64 * r.deviations[j])
                .sum();
            prop_assert!(weighted.abs() < 1e-9);
        }
    }
}
