//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Run with `cargo test -p kinetic-interface-suite --test acceptance`; positional arguments select
//! criteria by number, e.g. `cargo test -p kinetic-interface-suite --test acceptance -- 1 3 9`.

use std::process::ExitCode;
use std::time::Instant;

use kinetic_interface_suite::CRITERIA;

fn main() -> ExitCode {
    let selected: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failures = 0;
    for c in CRITERIA.iter().filter(|c| selected.is_empty() || selected.contains(&c.id)) {
        let start = Instant::now();
        let v = (c.run)();
        let elapsed = start.elapsed();
        let status = if v.pass { "PASS" } else { "FAIL" };
        let over =
            if elapsed > c.budget { format!(", over the {}s budget", c.budget.as_secs()) } else { String::new() };
        println!("[{:>2}] {status} {}: {} ({:.1}s{over})", c.id, c.name, v.detail, elapsed.as_secs_f64());
        failures += usize::from(!v.pass);
    }
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failures} criterion(s) failed");
        ExitCode::FAILURE
    }
}
