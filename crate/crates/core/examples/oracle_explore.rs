//! Enumerate the outcomes of a small program under SC and TSO, and check a
//! hand-written spec against the SC set.

use litmus::oracle::{check_spec, explore, ExploreOptions, Instruction};
use litmus::{enumerate_outcomes, AbstractProgram, AccessMode::Relaxed, MemoryModel, OutcomeSpec};

fn main() {
    // Store buffering with a third observer thread.
    let program = AbstractProgram::new(
        ["x", "y"],
        vec![
            vec![
                Instruction::write("x", 1, Relaxed),
                Instruction::read("y", "r1", Relaxed),
            ],
            vec![
                Instruction::write("y", 1, Relaxed),
                Instruction::read("x", "r2", Relaxed),
            ],
            vec![Instruction::read("x", "r3", Relaxed)],
        ],
        &["r1", "r2", "r3"],
    )
    .expect("well-formed");

    for model in [MemoryModel::Sc, MemoryModel::Tso] {
        let e = explore(&program, model, ExploreOptions::default()).unwrap();
        println!(
            "{model}: {} outcomes from {} states",
            e.outcomes.len(),
            e.states
        );
        for o in &e.outcomes {
            println!("  {o}");
        }
    }
    let sc = enumerate_outcomes(&program, MemoryModel::Sc).unwrap();
    let tso = enumerate_outcomes(&program, MemoryModel::Tso).unwrap();
    println!("TSO only: {:?}", tso.difference(&sc).collect::<Vec<_>>());

    // A spec that forgets one SC outcome and wrongly accepts a weak one.
    let spec = OutcomeSpec::builder(3)
        .accept_all([[0, 1, 0], [1, 0, 1], [1, 1, 1]])
        .accept([0, 0, 0])
        .build()
        .unwrap();
    for m in check_spec(&spec, &program).unwrap() {
        println!("mismatch: {} {:?}", m.outcome, m.kind);
    }
}
