//! Rank attributes by relevance toward an outcome. Relevance divides an
//! attribute's total support in the outcome's rules by its total support in
//! the counter-outcome's rules; attributes at or above sup(d)/sup(not d)
//! count as relevant.
//!
//! Run with `cargo run --example rank_attributes`.

use relmine::{relevance_rank, BinaryTable, MineLimits};

fn main() {
    let table = BinaryTable::from_bits(
        &[
            "calc1=A",
            "bio1=A",
            "took_bridge",
            "aid=yes",
            "firstgen",
            "retained",
        ],
        &[
            "s01", "s02", "s03", "s04", "s05", "s06", "s07", "s08", "s09", "s10", "s11", "s12",
        ],
        &[
            &[1, 1, 0, 1, 0, 1],
            &[1, 0, 1, 0, 0, 1],
            &[0, 1, 1, 1, 0, 1],
            &[1, 1, 1, 0, 0, 1],
            &[1, 0, 0, 1, 1, 1],
            &[0, 1, 0, 0, 1, 1],
            &[1, 1, 0, 0, 0, 1],
            &[0, 0, 1, 1, 1, 0],
            &[0, 0, 0, 0, 1, 0],
            &[0, 1, 1, 0, 1, 0],
            &[0, 0, 0, 1, 0, 0],
            &[0, 0, 1, 0, 0, 0],
        ],
    )
    .unwrap();
    let retained = table.catalog().require("retained").unwrap();

    // No column is the exact complement of the outcome, so a NOT: column is
    // synthesized and mined as the counter side.
    let run = relevance_rank(&table, retained, 2, &MineLimits::default()).unwrap();
    let report = &run.report;
    let catalog = run.table.catalog();

    println!(
        "target {} vs counter {}   threshold {:.2}",
        catalog.def(report.target).name,
        catalog.def(report.counter).name,
        report.threshold
    );
    println!(
        "{} rules toward the target, {} toward the counter\n",
        run.rules_target.len(),
        run.rules_counter.len()
    );
    println!("{:22} {:>6} {:>6} {:>9}  relevant", "attribute", "tsup+", "tsup-", "relevance");
    for entry in &report.ranking {
        println!(
            "{:22} {:>6.2} {:>6.2} {:>9.2}  {}",
            catalog.def(entry.attribute).name,
            entry.tsup_target,
            entry.tsup_counter,
            entry.relevance,
            if entry.above_threshold { "yes" } else { "" }
        );
    }
}
