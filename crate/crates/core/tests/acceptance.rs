//! Runs the ten acceptance criteria and prints one line per criterion.

use dpfib::selftest::run_all;

#[test]
fn acceptance_criteria() {
    let results = run_all();
    for r in &results {
        println!("{}", r.line());
    }
    let failed: Vec<u32> = results.iter().filter(|r| !r.passed).map(|r| r.id).collect();
    println!("{} of {} criteria passed", results.len() - failed.len(), results.len());
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
