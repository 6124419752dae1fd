use uml_core::acceptance::run_all;

#[test]
fn acceptance_criteria() {
    let results = run_all();
    for r in &results {
        println!("{r}");
    }
    let failed: Vec<u32> = results.iter().filter(|r| !r.passed).map(|r| r.id).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
