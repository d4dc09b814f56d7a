//! Run a test twice with different layouts, round-trip one report through
//! JSON, and diff them.

use litmus::report::{compare, CompareOptions};
use litmus::{builtin_registry, run_test, RunParams, RunReport};

fn main() {
    let registry = builtin_registry();
    let test = &registry.by_name("mp.relaxed").unwrap().test;

    let packed = RunParams {
        batch_size: 200_000,
        rounds: 1,
        ..RunParams::default()
    };
    let padded = RunParams {
        padding_bytes: 64,
        ..packed.clone()
    };
    let a = run_test(test, &packed).unwrap();
    let b = run_test(test, &padded).unwrap();

    let json = a.to_json();
    let a = RunReport::from_json(&json).expect("own output parses");
    println!("report A is {} bytes of JSON", json.len());

    let opts = CompareOptions {
        frequency_ratio: 10.0,
    };
    let diffs = compare(&a, &b, &opts).unwrap();
    if diffs.is_empty() {
        println!("no discrepancies");
    }
    for d in diffs {
        println!("{d}");
    }
}
