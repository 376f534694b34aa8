//! Aggregate records into staged cohort flows, the node/link shape of an
//! alluvial (Sankey) diagram. Every record lands in exactly one class per
//! stage, so each stage's nodes sum to the cohort and inflow equals outflow
//! at every interior node.
//!
//! Run with `cargo run --example pathway_flows`.

use relmine::analytics::{aggregate_flows, ClassDef, ClassRule, Predicate, StageSpec};
use relmine::RawRecordSet;

const RECORDS: &str = "\
id,major,calc1,outcome
s01,bio,A,retained
s02,bio,B,retained
s03,bio,C,left
s04,chem,A,retained
s05,chem,F,left
s06,chem,B,retained
s07,physics,A,retained
s08,physics,C,left
s09,bio,B,retained
s10,chem,C,left
";

fn eq(column: &str, value: &str) -> Predicate {
    Predicate::Equals {
        column: column.into(),
        value: value.into(),
    }
}

fn main() {
    let records = RawRecordSet::from_csv_str(RECORDS, "id").unwrap();
    let spec = StageSpec::new(vec![
        ClassRule::new(
            "major",
            vec![
                ClassDef::when("bio", eq("major", "bio")),
                ClassDef::when("chem", eq("major", "chem")),
                ClassDef::otherwise("other"),
            ],
        ),
        ClassRule::new(
            "calc1",
            vec![
                ClassDef::when("AB", Predicate::In {
                    column: "calc1".into(),
                    values: vec!["A".into(), "B".into()],
                }),
                ClassDef::otherwise("below"),
            ],
        ),
        ClassRule::new(
            "outcome",
            vec![
                ClassDef::when("retained", eq("outcome", "retained")),
                ClassDef::otherwise("left"),
            ],
        ),
    ]);

    let flows = aggregate_flows(&records, &spec).unwrap();
    assert!(flows.conservation_holds());

    println!("{} records through {} stages", flows.record_count, flows.stages.len());
    for (s, stage) in flows.stages.iter().enumerate() {
        let sizes: Vec<String> = flows.classes[s]
            .iter()
            .zip(&flows.counts[s])
            .map(|(name, n)| format!("{name}={n}"))
            .collect();
        println!("  {stage}: {}", sizes.join("  "));
    }
    println!("\nlinks:");
    for link in &flows.links {
        println!(
            "  {}:{} -> {}:{}  {}",
            flows.stages[link.stage],
            flows.classes[link.stage][link.from],
            flows.stages[link.stage + 1],
            flows.classes[link.stage + 1][link.to],
            link.count
        );
    }
    println!("\nplot-ready json:\n{}", flows.to_json_string());
}
