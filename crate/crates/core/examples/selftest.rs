//! Runs the twelve-criterion acceptance suite and prints its table.
//!
//! ```text
//! cargo run --example selftest
//! ```

use nchodge::selftest::{run, SelftestConfig};

fn main() {
    let report = run(&SelftestConfig::default());
    print!("{}", report.table());
    std::process::exit(if report.passed { 0 } else { 2 });
}
