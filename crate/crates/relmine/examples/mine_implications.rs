//! Mine every minimal confidence-1 implication toward one attribute and show
//! how the support floor prunes the result.
//!
//! Run with `cargo run --example mine_implications`.

use relmine::{mine, BinaryTable, ImplicationSet, MineLimits};

fn show(table: &BinaryTable, set: &ImplicationSet) {
    println!(
        "min support {}: {} rules{}",
        set.min_support,
        set.len(),
        if set.truncated { " (truncated)" } else { "" }
    );
    for rule in set.iter() {
        let lhs: Vec<&str> = rule
            .antecedent
            .iter()
            .map(|&a| table.catalog().def(a).name.as_str())
            .collect();
        println!(
            "  {{{}}} -> {}   support {} ({})",
            lhs.join(", "),
            table.catalog().def(rule.consequent).name,
            rule.support.len(),
            rule.support
                .iter()
                .map(|r| table.row_id(r).to_string())
                .collect::<Vec<_>>()
                .join(" ")
        );
    }
}

fn main() {
    // Rows are students, columns one-hot encoded facts about them. The last
    // column is the outcome the rules must imply.
    let table = BinaryTable::from_bits(
        &["calc1=A", "bio1=A", "took_bridge", "aid=yes", "retained"],
        &["s1", "s2", "s3", "s4", "s5", "s6", "s7", "s8"],
        &[
            &[1, 1, 0, 1, 1],
            &[1, 0, 1, 0, 1],
            &[0, 1, 1, 1, 1],
            &[1, 1, 1, 0, 1],
            &[0, 0, 1, 1, 0],
            &[0, 1, 0, 0, 0],
            &[1, 0, 0, 1, 1],
            &[0, 0, 0, 0, 0],
        ],
    )
    .unwrap();
    let retained = table.catalog().require("retained").unwrap();

    let all = mine(&table, retained, 1, &MineLimits::default()).unwrap();
    show(&table, &all);
    println!();

    // Raising the floor keeps exactly the rules whose support clears it.
    let frequent = mine(&table, retained, 3, &MineLimits::default()).unwrap();
    show(&table, &frequent);
}
