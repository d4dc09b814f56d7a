//! Stress-run the relaxed store-buffering test and print its report.
//!
//!     cargo run --release --example store_buffering [iterations]

use litmus::{builtin_registry, run_test, FreqStyle, RunParams};

fn main() {
    let iterations: usize = std::env::args()
        .nth(1)
        .map(|s| s.parse().expect("iterations must be a number"))
        .unwrap_or(1_000_000);

    let registry = builtin_registry();
    let sb = registry.by_name("sb.relaxed").expect("built-in");
    let params = RunParams {
        batch_size: iterations.min(1_000_000),
        rounds: iterations.div_ceil(1_000_000).max(1),
        ..RunParams::default()
    };
    let report = run_test(&sb.test, &params).expect("run failed");

    print!("{}", report.format_table(FreqStyle::Paper));
    // (0, 0) only shows up when both threads really run at the same time.
    if report.count(&[0, 0].into()) == 0 {
        println!("no store buffering observed; try more iterations or more cores");
    }
}
