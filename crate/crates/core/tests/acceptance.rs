//! Acceptance checks 1 to 9, one line each.
//!
//! Monte Carlo checks reuse runs cached under `target/acceptance` (or
//! `$SHOCKLAB_CACHE`); a cold cache takes several CPU hours. Pass criterion
//! numbers as arguments to run a subset.

use std::process::ExitCode;

use shocklab::harness::suite;

fn main() -> ExitCode {
    let wanted: Vec<u8> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let cache = suite::default_cache();
    let mut failed = 0;
    for id in suite::CRITERIA {
        if !wanted.is_empty() && !wanted.contains(&id) {
            continue;
        }
        match suite::check(id, &cache) {
            Ok(v) => {
                println!("{v}");
                failed += usize::from(!v.passed);
            }
            Err(e) => {
                println!("criterion {id} [FAIL] {}: could not run: {e}", suite::title(id));
                failed += 1;
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
