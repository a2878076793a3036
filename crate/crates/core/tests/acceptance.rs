//! Runs the twelve acceptance criteria and prints one line per criterion.

use cluster_virial::verify::{run, VerifyOptions};

#[test]
fn acceptance_criteria() {
    let results = run(&VerifyOptions::default());
    for r in &results {
        println!("{r}");
        for line in &r.details {
            println!("      {line}");
        }
    }
    let failed: Vec<String> = results
        .iter()
        .filter(|r| !r.pass)
        .map(|r| r.criterion.to_string())
        .collect();
    assert_eq!(results.len(), 12);
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
