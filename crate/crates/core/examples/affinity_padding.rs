//! Show how affinity schemes map threads to CPUs on this host, then run
//! the same test with and without cache-line padding.

use std::time::Instant;

use litmus::runner::affinity::{resolve_cpu, CpuTopology};
use litmus::runner::execute;
use litmus::{builtin_registry, AffinityScheme, RunParams};

fn main() {
    let topo = CpuTopology::detect();
    println!("allowed cpus: {:?} (of {})", topo.allowed, topo.configured);
    for scheme in [
        AffinityScheme::Sequential,
        AffinityScheme::Spread,
        "0,1".parse().unwrap(),
    ] {
        let cpus: Vec<String> = (0..4)
            .map(|t| match resolve_cpu(t, &scheme, &topo) {
                Ok(Some(c)) => c.to_string(),
                Ok(None) => "-".into(),
                Err(e) => format!("error ({e})"),
            })
            .collect();
        println!(
            "{:>10}: threads 0..4 -> {}",
            scheme.to_string(),
            cpus.join(", ")
        );
    }

    let registry = builtin_registry();
    let test = &registry.by_name("sb.relaxed").unwrap().test;
    for padding in [0, 64, 128] {
        let params = RunParams {
            batch_size: 500_000,
            rounds: 1,
            padding_bytes: padding,
            affinity: AffinityScheme::Spread,
            ..RunParams::default()
        };
        let started = Instant::now();
        let out = execute(test, &params).unwrap();
        println!(
            "padding {padding:>3}: (0, 0) x{:<6} in {:?}",
            out.histogram.count(&[0, 0].into()),
            started.elapsed()
        );
        for w in &out.warnings {
            println!("  warning: {w}");
        }
    }
}
