//! Acceptance run: one PASS/FAIL line per criterion, non-zero exit if any fails.

use std::panic::{self, AssertUnwindSafe};
use std::time::Instant;

use shock_evans_validation::{all, Check};

fn main() {
    println!("\nrunning acceptance criteria");
    let mut failures = 0;
    for (k, check) in all().into_iter().enumerate() {
        let id = k as u8 + 1;
        let t = Instant::now();
        let c = panic::catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "unknown panic".into());
            Check { id, name: "panicked", passed: false, detail: msg, elapsed: t.elapsed() }
        });
        if !c.passed {
            failures += 1;
        }
        println!("{c}");
    }
    println!("\nacceptance result: {} passed; {failures} failed\n", 7 - failures);
    if failures > 0 {
        std::process::exit(1);
    }
}
