//! Check every built-in spec against its abstract twin and list the
//! interesting outcomes only hardware explains.

use litmus::{builtin_suite, validate_spec};

fn main() {
    let mut bad = 0;
    for entry in builtin_suite() {
        let name = entry.test.name();
        if entry.twin.is_none() {
            println!("{name:<14} no twin ({})", entry.provenance);
            continue;
        }
        entry.check_structure().unwrap();
        let mismatches = validate_spec(&entry).unwrap();
        let unexplained = entry.unexplained_interesting().unwrap();
        println!(
            "{name:<14} {} mismatches, unexplained interesting: {:?}",
            mismatches.len(),
            unexplained
                .iter()
                .map(ToString::to_string)
                .collect::<Vec<_>>()
        );
        bad += mismatches.len();
    }
    std::process::exit(if bad == 0 { 0 } else { 1 });
}
