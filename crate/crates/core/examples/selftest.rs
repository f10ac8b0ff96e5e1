//! Runs the invariant suite and prints its JSON report.

use opstat::selftest::selftest;
use opstat::tol::Tolerances;

fn main() {
    let report = selftest(&Tolerances::default());
    println!("{}", report.to_json());
    if !report.passed {
        std::process::exit(2);
    }
}
