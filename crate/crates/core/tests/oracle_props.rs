mod common;

use std::collections::BTreeSet;

use common::{brute_force_sc, multinomial, random_program};
use litmus::oracle::{explore, ExploreOptions, Instruction};
use litmus::{
    builtin_suite, enumerate_outcomes, AbstractProgram, AccessMode, MemoryModel, Outcome,
};
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::SeedableRng;

fn set(items: &[&[i64]]) -> BTreeSet<Outcome> {
    items.iter().map(|v| Outcome::new(v).unwrap()).collect()
}

fn twin(name: &str) -> AbstractProgram {
    builtin_suite()
        .into_iter()
        .find(|e| e.test.name() == name)
        .and_then(|e| e.twin)
        .unwrap()
}

#[test]
fn explorer_matches_brute_force_on_every_twin() {
    for e in builtin_suite() {
        let Some(p) = e.twin else { continue };
        assert_eq!(
            enumerate_outcomes(&p, MemoryModel::Sc).unwrap(),
            brute_force_sc(&p),
            "{}",
            e.test.name()
        );
    }
}

#[test]
fn independent_sc_sets() {
    // Hand-derived: every merge of two 2-instruction threads.
    assert_eq!(
        brute_force_sc(&twin("sb.relaxed")),
        set(&[&[0, 1], &[1, 0], &[1, 1]])
    );
    assert_eq!(
        brute_force_sc(&twin("mp.relaxed")),
        set(&[&[0, 0], &[0, 1], &[1, 1]])
    );
    let iriw = brute_force_sc(&twin("iriw.relaxed"));
    assert_eq!(iriw.len(), 15);
    assert!(!iriw.contains(&Outcome::from([1, 0, 1, 0])));
}

#[test]
fn path_count_equals_multinomial_without_memo() {
    let opts = ExploreOptions {
        memoize: false,
        ..ExploreOptions::default()
    };
    for name in ["sb.relaxed", "mp.relaxed", "iriw.relaxed", "lb.relaxed"] {
        let p = twin(name);
        let lengths: Vec<usize> = p.threads().iter().map(Vec::len).collect();
        let e = explore(&p, MemoryModel::Sc, opts).unwrap();
        assert_eq!(e.final_paths as u64, multinomial(&lengths), "{name}");
    }
}

#[test]
fn sb_tso_adds_only_both_zero() {
    let p = twin("sb.relaxed");
    let sc = enumerate_outcomes(&p, MemoryModel::Sc).unwrap();
    let tso = enumerate_outcomes(&p, MemoryModel::Tso).unwrap();
    let extra: Vec<_> = tso.difference(&sc).copied().collect();
    assert_eq!(extra, vec![Outcome::from([0, 0])]);
}

#[test]
fn oota_and_mp_under_tso() {
    for m in [MemoryModel::Sc, MemoryModel::Tso] {
        assert_eq!(
            enumerate_outcomes(&twin("oota"), m).unwrap(),
            set(&[&[0, 0]])
        );
        // TSO keeps stores in order, so MP stays clean.
        assert!(!enumerate_outcomes(&twin("mp.relaxed"), m)
            .unwrap()
            .contains(&Outcome::from([1, 0])));
    }
}

#[test]
fn store_forwarding_under_tso() {
    use AccessMode::Relaxed;
    let p = AbstractProgram::new(
        ["x", "y"],
        vec![
            vec![
                Instruction::write("x", 1, Relaxed),
                Instruction::read("x", "a", Relaxed),
                Instruction::read("y", "b", Relaxed),
            ],
            vec![
                Instruction::write("y", 1, Relaxed),
                Instruction::read("y", "c", Relaxed),
                Instruction::read("x", "d", Relaxed),
            ],
        ],
        &["a", "b", "c", "d"],
    )
    .unwrap();
    let tso = enumerate_outcomes(&p, MemoryModel::Tso).unwrap();
    // Own writes are always visible to the writer.
    assert!(tso.iter().all(|o| o.values()[0] == 1 && o.values()[2] == 1));
    assert!(tso.contains(&Outcome::from([1, 0, 1, 0])));
    assert!(!enumerate_outcomes(&p, MemoryModel::Sc)
        .unwrap()
        .contains(&Outcome::from([1, 0, 1, 0])));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn sc_within_tso(seed in any::<u64>()) {
        let p = random_program(&mut StdRng::seed_from_u64(seed), 3, 3);
        let sc = enumerate_outcomes(&p, MemoryModel::Sc).unwrap();
        let tso = enumerate_outcomes(&p, MemoryModel::Tso).unwrap();
        prop_assert!(sc.is_subset(&tso));
    }

    #[test]
    fn seqcst_writes_collapse_tso_to_sc(seed in any::<u64>()) {
        let p = random_program(&mut StdRng::seed_from_u64(seed), 3, 3);
        let sc = enumerate_outcomes(&p, MemoryModel::Sc).unwrap();
        prop_assert_eq!(enumerate_outcomes(&p.with_seqcst_writes(), MemoryModel::Tso).unwrap(), sc);
    }

    #[test]
    fn explorer_agrees_with_brute_force(seed in any::<u64>()) {
        let p = random_program(&mut StdRng::seed_from_u64(seed), 3, 3);
        prop_assert_eq!(enumerate_outcomes(&p, MemoryModel::Sc).unwrap(), brute_force_sc(&p));
    }

    #[test]
    fn deterministic_and_memo_invariant(seed in any::<u64>(), tso in any::<bool>()) {
        let p = random_program(&mut StdRng::seed_from_u64(seed), 3, 2);
        let m = if tso { MemoryModel::Tso } else { MemoryModel::Sc };
        let a = enumerate_outcomes(&p, m).unwrap();
        prop_assert_eq!(&a, &enumerate_outcomes(&p, m).unwrap());
        let unmemo = explore(&p, m, ExploreOptions { memoize: false, ..ExploreOptions::default() }).unwrap();
        prop_assert_eq!(a, unmemo.outcomes);
    }
}
