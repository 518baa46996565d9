use raney_spectra::acceptance::{run_criterion, Level, Status, ALL};

#[test]
fn acceptance_suite() {
    let mut blocking = Vec::new();
    for id in ALL {
        let r = run_criterion(id, Level::Full);
        println!("{}", r.line());
        if r.blocking() {
            blocking.push(id);
        }
        if r.status == Status::Fail && r.known_red {
            println!("     criterion {id} is a known failure and does not fail this target");
        }
    }
    assert!(blocking.is_empty(), "failing criteria: {blocking:?}");
}
