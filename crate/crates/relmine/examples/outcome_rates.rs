//! Subgroup outcome rate tables in both modes, plus signed deviations from
//! the cohort mean. Cumulative mode reads outcome classes as ordered time
//! horizons; disjoint mode keeps them independent.
//!
//! Run with `cargo run --example outcome_rates`.

use relmine::analytics::{
    deviation_from_mean, rate_table, ClassDef, ClassRule, Predicate, RateMode,
};
use relmine::RawRecordSet;

const RECORDS: &str = "\
id,cohort,grad_year
s01,aided,4
s02,aided,4
s03,aided,5
s04,aided,6
s05,aided,
s06,unaided,4
s07,unaided,5
s08,unaided,
s09,unaided,
s10,unaided,6
s11,aided,3
s12,unaided,5
";

fn main() {
    let records = RawRecordSet::from_csv_str(RECORDS, "id").unwrap();
    let groups = ClassRule::new(
        "cohort",
        vec![
            ClassDef::when(
                "aided",
                Predicate::Equals {
                    column: "cohort".into(),
                    value: "aided".into(),
                },
            ),
            ClassDef::otherwise("unaided"),
        ],
    );
    let le = |v: f64| Predicate::Le {
        column: "grad_year".into(),
        value: v,
    };
    let gt = |v: f64| Predicate::Gt {
        column: "grad_year".into(),
        value: v,
    };
    let outcomes = ClassRule::new(
        "graduation",
        vec![
            ClassDef::when("4yr", le(4.0)),
            ClassDef::when("6yr", Predicate::All(vec![gt(4.0), le(6.0)])),
            ClassDef::otherwise("none"),
        ],
    );

    // Cumulative: 6yr graduation includes everyone who finished by year 4.
    // The terminal class stays disjoint. With fewer records than the small-n
    // threshold of 5, a group is marked.
    for mode in [RateMode::Cumulative, RateMode::Disjoint] {
        let rates = rate_table(&records, &groups, &outcomes, mode, 5).unwrap();
        println!("{mode:?} rates by {}:", rates.dimension);
        let mut csv = Vec::new();
        rates.write_csv(&mut csv).unwrap();
        print!("{}", String::from_utf8(csv).unwrap());
        let overall: Vec<String> = rates
            .overall
            .percents
            .iter()
            .map(|p| format!("{p:.2}"))
            .collect();
        println!("(ALL,{},{})\n", rates.overall.count, overall.join(","));
    }

    let rates = rate_table(&records, &groups, &outcomes, RateMode::Cumulative, 5).unwrap();
    let dev = deviation_from_mean(&rates);
    println!("deviation from the cohort mean (weighted by size, each column sums to zero):");
    let mut csv = Vec::new();
    dev.write_csv(&mut csv).unwrap();
    print!("{}", String::from_utf8(csv).unwrap());
}
