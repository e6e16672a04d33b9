//! Runs every acceptance criterion at its stated tolerance and budget and
//! prints one line per criterion. Exits nonzero if any criterion fails.

use phasedelta::verify::{run_criterion, VerifyOptions, CRITERIA};

fn main() {
    let opts = VerifyOptions::default();
    let mut failed = Vec::new();
    println!("\nacceptance: {} criteria", CRITERIA.len());
    for (id, _, _) in CRITERIA {
        let rep = run_criterion(id, &opts).expect("known criterion");
        println!("{}", rep.line());
        if !rep.passed {
            failed.push(id);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all criteria passed\n");
    } else {
        println!("acceptance: failed criteria {failed:?}\n");
        std::process::exit(1);
    }
}
