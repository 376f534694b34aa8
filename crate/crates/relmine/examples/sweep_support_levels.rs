//! Flag relevance values inflated by counter-side support scarcity. An
//! attribute can top the ranking only because the counter rules mentioning it
//! all fall below the support floor; re-mining at lower floors exposes that.
//!
//! Run with `cargo run --example sweep_support_levels`.

use relmine::{sweep_min_support, BinaryTable, MineLimits};

fn main() {
    // 31 rows over x, u, w and the outcome d. The pattern {x,w} -> not d has
    // support 6: invisible at floor 10, decisive at floor 5.
    let mut rows: Vec<[u8; 4]> = Vec::new();
    rows.extend(std::iter::repeat_n([1, 1, 0, 1], 12));
    rows.extend(std::iter::repeat_n([1, 0, 1, 0], 6));
    rows.push([0, 1, 1, 0]);
    rows.push([0, 0, 1, 1]);
    rows.extend(std::iter::repeat_n([0, 0, 0, 1], 11));
    let ids: Vec<String> = (0..rows.len()).map(|i| format!("r{i:02}")).collect();
    let table = BinaryTable::from_bits(
        &["x", "u", "w", "d"],
        &ids.iter().map(String::as_str).collect::<Vec<_>>(),
        &rows.iter().map(|r| r.as_slice()).collect::<Vec<_>>(),
    )
    .unwrap();
    let d = table.catalog().require("d").unwrap();

    let run = sweep_min_support(&table, d, &[10, 5], &MineLimits::default()).unwrap();
    let catalog = run.table.catalog();
    println!(
        "threshold {:.2}, support floors {:?}\n",
        run.report.threshold, run.report.support_levels
    );
    for entry in &run.report.ranking {
        println!(
            "{:3} relevance {:>5.2}  above threshold: {:5}  inflated: {}",
            catalog.def(entry.attribute).name,
            entry.relevance,
            entry.above_threshold,
            entry.inflated
        );
    }
    println!(
        "\nx looked decisive at floor 10 but its counter-evidence {{x,w}} -> not d \
         only clears floor 5; u keeps its standing at every floor."
    );
}
