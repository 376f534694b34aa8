//! Encode raw cohort records into a binary table with a declarative binning
//! spec: one ordinal grade column, one categorical column, one numeric GPA
//! column, and an outcome column kept out of antecedents.
//!
//! Run with `cargo run --example encode_records`.

use relmine::ingest::{grade_bins, NumericRange, RawRecordSet};
use relmine::{encode, BinningSpec, ColumnRule};

const RECORDS: &str = "\
student,IntroBio1Grade,aid,Term2GPA,retained
s01,A,yes,3.8,1
s02,B+,no,3.4,1
s03,C,yes,2.9,0
s04,A-,no,3.7,1
s05,W,no,,0
s06,B,yes,3.1,1
";

fn main() {
    let records = RawRecordSet::from_csv_str(RECORDS, "student").unwrap();
    let spec = BinningSpec::new(
        "student",
        vec![
            ColumnRule::ordinal("IntroBio1Grade", grade_bins()).with_category("Intro Bio 1"),
            ColumnRule::closed_categorical("aid", &["yes", "no"]),
            ColumnRule::numeric(
                "Term2GPA",
                vec![
                    NumericRange::new("below3.3", 0.0, 3.3),
                    NumericRange::new("3.3-3.6", 3.3, 3.6),
                    NumericRange::new("3.6+", 3.6, 4.01),
                ],
            ),
            ColumnRule::closed_categorical("retained", &["0", "1"]).outcome(),
        ],
    )
    .unwrap();

    let table = encode(&records, &spec).unwrap();
    println!(
        "{} records became {} rows over {} attributes\n",
        records.len(),
        table.row_count(),
        table.attr_count()
    );
    for (id, def) in table.catalog().iter() {
        println!(
            "  [{id:2}] {:28} category {:12} {}",
            def.name,
            def.category,
            if def.antecedent_eligible { "" } else { "(outcome)" }
        );
    }
    println!("\n{}", table.to_csv_string().unwrap());
    println!("fingerprint: {}", table.fingerprint());
}
