//! Runs the built-in verification suites.
//!
//! `cargo run --release --example selftest`

use gsdkit::selftest::{run_selftest, SelftestOptions};

fn main() {
    let summary = run_selftest(&SelftestOptions::default());
    for s in &summary.suites {
        println!("{} {}::{} {}", if s.passed { "ok  " } else { "FAIL" }, s.module, s.name, s.detail);
    }
    println!("{} passed, {} failed", summary.passed, summary.failed);
    std::process::exit(i32::from(!summary.all_passed()));
}
