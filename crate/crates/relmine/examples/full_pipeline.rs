//! The whole flight in one place: generate a synthetic cohort, encode it,
//! rank attributes against the retention outcome with an inflation sweep,
//! then group the top of the ranking by category and render the bar chart.
//!
//! Run with `cargo run --example full_pipeline`.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use relmine::chart::relevance_bar_chart;
use relmine::ingest::{grade_bins, RawRecordSet};
use relmine::{encode, group_by_category, sweep_min_support, BinningSpec, ColumnRule, MineLimits};

/// 400 students: strong calc grades and aid both pull toward retention,
/// the club column is pure noise.
fn cohort() -> RawRecordSet {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let header = vec![
        "student".to_string(),
        "calc1".into(),
        "aid".into(),
        "club".into(),
        "retained".into(),
    ];
    let grades = ["A", "B+", "B", "C+", "C", "C-", "D", "F"];
    let clubs = ["band", "chess", "rowing", "none"];
    let mut records = Vec::new();
    for i in 0..400 {
        let skill: f64 = rng.random();
        let grade = grades[(((1.0 - skill) * grades.len() as f64) as usize)
            .min(grades.len() - 1)];
        let aided = rng.random_bool(0.4);
        let score = skill + if aided { 0.25 } else { 0.0 };
        let retained = score > 0.55;
        records.push(vec![
            format!("s{i:03}"),
            grade.to_string(),
            if aided { "yes" } else { "no" }.to_string(),
            clubs[rng.random_range(0..clubs.len())].to_string(),
            if retained { "1" } else { "0" }.to_string(),
        ]);
    }
    RawRecordSet::new(header, records, "student").unwrap()
}

fn main() {
    let records = cohort();
    let spec = BinningSpec::new(
        "student",
        vec![
            ColumnRule::ordinal("calc1", grade_bins()).with_category("calculus"),
            ColumnRule::closed_categorical("aid", &["yes", "no"]).with_category("finances"),
            ColumnRule::categorical("club").with_category("activities"),
            ColumnRule::closed_categorical("retained", &["0", "1"])
                .with_category("outcome")
                .outcome(),
        ],
    )
    .unwrap();
    let table = encode(&records, &spec).unwrap();
    println!(
        "encoded {} records into {} attributes",
        table.row_count(),
        table.attr_count()
    );

    let retained = table.catalog().require("retained=1").unwrap();
    let run = sweep_min_support(&table, retained, &[10, 5], &MineLimits::default()).unwrap();
    println!(
        "threshold {:.2}; floors {:?}; {} + {} rules\n",
        run.report.threshold,
        run.report.support_levels,
        run.rules_target.len(),
        run.rules_counter.len()
    );

    let grouped = group_by_category(&run.report, &run.table, 10);
    for group in &grouped.groups {
        println!("{}:", group.category);
        for e in &group.entries {
            println!(
                "  #{:<2} {:14} relevance {:>6.2}{}{}",
                e.rank,
                e.attribute,
                e.relevance,
                if e.above_threshold { "  relevant" } else { "" },
                if e.inflated { "  [inflated]" } else { "" }
            );
        }
    }

    let svg = relevance_bar_chart(&grouped);
    println!("\nchart: {} bytes of svg, ready for a report", svg.len());
}
