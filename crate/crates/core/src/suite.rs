//! Built-in litmus tests, each paired with its abstract program.

use std::collections::BTreeSet;
use std::sync::Arc;

use crate::model::{
    AccessMode, LitmusTest, Loc, Named, Outcome, OutcomeSpec, Reg, Registry, TestState,
};
use crate::oracle::{enumerate_outcomes, AbstractProgram, Instruction, MemoryModel, OracleError};

use AccessMode::{Plain, Relaxed, SeqCst};

/// A runnable test plus what the oracle needs to check its spec.
#[derive(Debug, Clone)]
pub struct SuiteEntry {
    pub test: Arc<LitmusTest>,
    /// Absent when the test publishes composite values the IR cannot model.
    pub twin: Option<AbstractProgram>,
    pub provenance: String,
    /// Interesting outcomes that no modelled memory model explains; they
    /// are tolerated on the strength of observed hardware behaviour.
    pub curated_weak: BTreeSet<Outcome>,
}

impl Named for SuiteEntry {
    fn name(&self) -> &str {
        self.test.name()
    }
}

impl SuiteEntry {
    /// Test and twin agree on location names, register names and outcome
    /// order.
    pub fn check_structure(&self) -> Result<(), String> {
        let Some(twin) = &self.twin else {
            return Ok(());
        };
        if twin.locations() != self.test.locations() {
            return Err(format!(
                "{}: locations {:?} vs twin {:?}",
                self.test.name(),
                self.test.locations(),
                twin.locations()
            ));
        }
        if !self.test.has_register_outcome() || twin.outcome_registers() != self.test.registers() {
            return Err(format!(
                "{}: outcome registers {:?} vs twin {:?}",
                self.test.name(),
                self.test.registers(),
                twin.outcome_registers()
            ));
        }
        if twin.threads().len() != self.test.arity() {
            return Err(format!(
                "{}: thread count differs from twin",
                self.test.name()
            ));
        }
        Ok(())
    }

    /// Interesting outcomes not explained by TSO or the curated list.
    pub fn unexplained_interesting(&self) -> Result<Vec<Outcome>, OracleError> {
        let Some(twin) = &self.twin else {
            return Ok(Vec::new());
        };
        let tso = enumerate_outcomes(twin, MemoryModel::Tso)?;
        Ok(self
            .test
            .spec()
            .interesting()
            .iter()
            .filter(|o| !tso.contains(o) && !self.curated_weak.contains(o))
            .copied()
            .collect())
    }
}

const X: Loc = Loc(0);
const Y: Loc = Loc(1);
const R1: Reg = Reg(0);
const R2: Reg = Reg(1);
const R3: Reg = Reg(2);
const R4: Reg = Reg(3);

fn w(loc: &str, v: i64, mode: AccessMode) -> Instruction {
    Instruction::write(loc, v, mode)
}

fn r(loc: &str, reg: &str, mode: AccessMode) -> Instruction {
    Instruction::read(loc, reg, mode)
}

fn program(locs: &[&str], threads: Vec<Vec<Instruction>>, regs: &[&str]) -> AbstractProgram {
    AbstractProgram::new(locs.iter().copied(), threads, regs)
        .expect("built-in program is well-formed")
}

fn outcomes<const N: usize>(list: &[[i64; N]]) -> BTreeSet<Outcome> {
    list.iter().map(|&o| Outcome::from(o)).collect()
}

fn entry(
    test: LitmusTest,
    twin: Option<AbstractProgram>,
    provenance: &str,
    curated: BTreeSet<Outcome>,
) -> SuiteEntry {
    SuiteEntry {
        test: Arc::new(test),
        twin,
        provenance: provenance.to_string(),
        curated_weak: curated,
    }
}

fn spec2(accepted: &[[i64; 2]], interesting: &[[i64; 2]]) -> OutcomeSpec {
    let mut b = OutcomeSpec::builder(2).accept_all(accepted.iter().copied());
    for &o in interesting {
        b = b.interesting(o);
    }
    b.build().expect("built-in spec is disjoint")
}

const SB_SC: [[i64; 2]; 3] = [[0, 1], [1, 0], [1, 1]];
const MP_SC: [[i64; 2]; 3] = [[0, 0], [0, 1], [1, 1]];
const LB_SC: [[i64; 2]; 3] = [[0, 0], [0, 1], [1, 0]];

fn atom_word() -> SuiteEntry {
    let test = LitmusTest::builder("atom.word")
        .describe("a whole-word write is never observed torn")
        .locations(["x"])
        .registers(["r1"])
        .thread(|s| s.store(X, -1, Plain))
        .thread(|s| s.set(R1, s.load(X, Plain)))
        .spec(
            OutcomeSpec::builder(1)
                .accept([0])
                .accept([-1])
                .build()
                .unwrap(),
        )
        .build()
        .unwrap();
    let twin = program(
        &["x"],
        vec![vec![w("x", -1, Plain)], vec![r("x", "r1", Plain)]],
        &["r1"],
    );
    entry(
        test,
        Some(twin),
        "word atomicity check: all-bits-set store racing a load",
        BTreeSet::new(),
    )
}

fn store_buffering(name: &str, mode: AccessMode) -> SuiteEntry {
    let interesting: &[[i64; 2]] = if mode == SeqCst { &[] } else { &[[0, 0]] };
    let test = LitmusTest::builder(name)
        .describe(if mode == SeqCst {
            "store buffering with SeqCst accesses: (0, 0) must not appear"
        } else {
            "store buffering: both threads may read the stale value"
        })
        .locations(["x", "y"])
        .registers(["r1", "r2"])
        .thread(move |s| {
            s.store(X, 1, mode);
            s.set(R1, s.load(Y, mode));
        })
        .thread(move |s| {
            s.store(Y, 1, mode);
            s.set(R2, s.load(X, mode));
        })
        .spec(spec2(&SB_SC, interesting))
        .build()
        .unwrap();
    let twin = program(
        &["x", "y"],
        vec![
            vec![w("x", 1, mode), r("y", "r1", mode)],
            vec![w("y", 1, mode), r("x", "r2", mode)],
        ],
        &["r1", "r2"],
    );
    entry(
        test,
        Some(twin),
        "store buffering (Dekker-style write-then-read-crossed)",
        BTreeSet::new(),
    )
}

fn message_passing(name: &str, mode: AccessMode) -> SuiteEntry {
    let interesting: &[[i64; 2]] = if mode == SeqCst { &[] } else { &[[1, 0]] };
    let test = LitmusTest::builder(name)
        .describe(if mode == SeqCst {
            "message passing with SeqCst accesses: flag implies data"
        } else {
            "message passing: flag observed before data"
        })
        .locations(["x", "y"])
        .registers(["r1", "r2"])
        .thread(move |s| {
            s.store(X, 1, mode);
            s.store(Y, 1, mode);
        })
        .thread(move |s| {
            s.set(R1, s.load(Y, mode));
            s.set(R2, s.load(X, mode));
        })
        .spec(spec2(&MP_SC, interesting))
        .build()
        .unwrap();
    let twin = program(
        &["x", "y"],
        vec![
            vec![w("x", 1, mode), w("y", 1, mode)],
            vec![r("y", "r1", mode), r("x", "r2", mode)],
        ],
        &["r1", "r2"],
    );
    let curated = if mode == SeqCst {
        BTreeSet::new()
    } else {
        outcomes(&[[1, 0]])
    };
    entry(
        test,
        Some(twin),
        "message passing; (1, 0) tolerated as observed on real hardware and compilers",
        curated,
    )
}

fn lock(s: &TestState<'_>, l: Loc) {
    let mut spins = 0u32;
    while !s.try_acquire(l) {
        spins += 1;
        if spins.is_multiple_of(64) {
            std::thread::yield_now();
        } else {
            std::hint::spin_loop();
        }
    }
}

fn unlock(s: &TestState<'_>, l: Loc) {
    s.store(l, 0, AccessMode::Release);
}

fn message_passing_drf() -> SuiteEntry {
    const LOCK: Loc = Loc(2);
    let test = LitmusTest::builder("mp.drf")
        .describe("message passing with both bodies under one lock")
        .locations(["x", "y", "lock"])
        .registers(["r1", "r2"])
        .thread(|s| {
            lock(s, LOCK);
            s.store(X, 1, Plain);
            s.store(Y, 1, Plain);
            unlock(s, LOCK);
        })
        .thread(|s| {
            lock(s, LOCK);
            s.set(R1, s.load(Y, Plain));
            s.set(R2, s.load(X, Plain));
            unlock(s, LOCK);
        })
        .spec(spec2(&[[0, 0], [1, 1]], &[]))
        .build()
        .unwrap();
    let twin = program(
        &["x", "y", "lock"],
        vec![
            vec![Instruction::atomic(vec![
                w("x", 1, Plain),
                w("y", 1, Plain),
            ])],
            vec![Instruction::atomic(vec![
                r("y", "r1", Plain),
                r("x", "r2", Plain),
            ])],
        ],
        &["r1", "r2"],
    );
    entry(
        test,
        Some(twin),
        "data-race-free message passing via a spin lock",
        BTreeSet::new(),
    )
}

fn coherence(name: &str, cse: bool) -> SuiteEntry {
    let test = LitmusTest::builder(name)
        .describe(if cse {
            "read-read coherence through an aliased location"
        } else {
            "read-read coherence: a later read never sees an older value"
        })
        .locations(["x"])
        .registers(["r1", "r2"])
        .thread(|s| s.store(X, 1, Relaxed))
        .thread(move |s| {
            if cse {
                let x = s.location(X);
                let first = x.load(Relaxed.load_ordering());
                let alias = s.location(X);
                let second = alias.load(Relaxed.load_ordering());
                s.set(R1, first);
                s.set(R2, second);
            } else {
                s.set(R1, s.load(X, Relaxed));
                s.set(R2, s.load(X, Relaxed));
            }
        })
        .spec(spec2(&MP_SC, &[]))
        .build()
        .unwrap();
    let twin = program(
        &["x"],
        vec![
            vec![w("x", 1, Relaxed)],
            vec![r("x", "r1", Relaxed), r("x", "r2", Relaxed)],
        ],
        &["r1", "r2"],
    );
    let note = if cse {
        "coherence of read-read pairs, second read through an alias to invite CSE"
    } else {
        "coherence of read-read pairs (CoRR)"
    };
    entry(test, Some(twin), note, BTreeSet::new())
}

fn iriw_sc() -> Vec<[i64; 4]> {
    let mut v = Vec::new();
    for bits in 0..16i64 {
        let o = [bits >> 3 & 1, bits >> 2 & 1, bits >> 1 & 1, bits & 1];
        if o != [1, 0, 1, 0] {
            v.push(o);
        }
    }
    v
}

fn iriw(name: &str, mode: AccessMode) -> SuiteEntry {
    let mut spec = OutcomeSpec::builder(4).accept_all(iriw_sc());
    if mode != SeqCst {
        spec = spec.interesting([1, 0, 1, 0]);
    }
    let test = LitmusTest::builder(name)
        .describe(if mode == SeqCst {
            "independent reads of independent writes with SeqCst accesses"
        } else {
            "independent reads of independent writes: readers disagree on write order"
        })
        .locations(["x", "y"])
        .registers(["r1", "r2", "r3", "r4"])
        .thread(move |s| s.store(X, 1, mode))
        .thread(move |s| s.store(Y, 1, mode))
        .thread(move |s| {
            s.set(R1, s.load(X, mode));
            s.set(R2, s.load(Y, mode));
        })
        .thread(move |s| {
            s.set(R3, s.load(Y, mode));
            s.set(R4, s.load(X, mode));
        })
        .spec(spec.build().unwrap())
        .build()
        .unwrap();
    let twin = program(
        &["x", "y"],
        vec![
            vec![w("x", 1, mode)],
            vec![w("y", 1, mode)],
            vec![r("x", "r1", mode), r("y", "r2", mode)],
            vec![r("y", "r3", mode), r("x", "r4", mode)],
        ],
        &["r1", "r2", "r3", "r4"],
    );
    let curated = if mode == SeqCst {
        BTreeSet::new()
    } else {
        outcomes(&[[1, 0, 1, 0]])
    };
    entry(
        test,
        Some(twin),
        "IRIW; (1, 0, 1, 0) tolerated for non-multi-copy-atomic platforms",
        curated,
    )
}

fn load_buffering() -> SuiteEntry {
    let test = LitmusTest::builder("lb.relaxed")
        .describe("load buffering: both reads see the other thread's later write")
        .locations(["x", "y"])
        .registers(["r1", "r2"])
        .thread(|s| {
            s.set(R1, s.load(Y, Relaxed));
            s.store(X, 1, Relaxed);
        })
        .thread(|s| {
            s.set(R2, s.load(X, Relaxed));
            s.store(Y, 1, Relaxed);
        })
        .spec(spec2(&LB_SC, &[[1, 1]]))
        .build()
        .unwrap();
    let twin = program(
        &["x", "y"],
        vec![
            vec![r("y", "r1", Relaxed), w("x", 1, Relaxed)],
            vec![r("x", "r2", Relaxed), w("y", 1, Relaxed)],
        ],
        &["r1", "r2"],
    );
    entry(
        test,
        Some(twin),
        "load buffering; (1, 1) tolerated as a load-store reordering",
        outcomes(&[[1, 1]]),
    )
}

fn dependent_cycle(name: &str, describe: &str, note: &str) -> SuiteEntry {
    let test = LitmusTest::builder(name)
        .describe(describe)
        .locations(["x", "y"])
        .registers(["r1", "r2"])
        .thread(|s| {
            let v = s.load(Y, Relaxed);
            s.set(R1, v);
            s.store(X, v, Relaxed);
        })
        .thread(|s| {
            let v = s.load(X, Relaxed);
            s.set(R2, v);
            s.store(Y, v, Relaxed);
        })
        .spec(spec2(&[[0, 0]], &[]))
        .build()
        .unwrap();
    let twin = program(
        &["x", "y"],
        vec![
            vec![
                r("y", "r1", Relaxed),
                Instruction::write_reg("x", "r1", Relaxed),
            ],
            vec![
                r("x", "r2", Relaxed),
                Instruction::write_reg("y", "r2", Relaxed),
            ],
        ],
        &["r1", "r2"],
    );
    entry(test, Some(twin), note, BTreeSet::new())
}

/// Sentinel stored by the reader when it sees no published object.
pub const UNPUBLISHED: i64 = -1;
/// Field value written by the publisher.
pub const FIELD_VALUE: i64 = 42;

fn unsafe_publication() -> SuiteEntry {
    const A: Loc = Loc(0);
    const B: Loc = Loc(1);
    const HANDLE: Loc = Loc(2);
    let spec = OutcomeSpec::builder(2)
        .accept([UNPUBLISHED, UNPUBLISHED])
        .accept([FIELD_VALUE, FIELD_VALUE])
        .interesting([0, FIELD_VALUE])
        .interesting([FIELD_VALUE, 0])
        .interesting([0, 0])
        .build()
        .unwrap();
    let test = LitmusTest::builder("upub.adapted")
        .describe(
            "publication through a relaxed handle: fields may be seen uninitialized, never garbage",
        )
        .locations(["a", "b", "h"])
        .registers(["r1", "r2"])
        .thread(|s| {
            s.store(A, FIELD_VALUE, Plain);
            s.store(B, FIELD_VALUE, Plain);
            s.store(HANDLE, 1, Relaxed);
        })
        .thread(|s| {
            if s.load(HANDLE, Relaxed) == 0 {
                s.set(R1, UNPUBLISHED);
                s.set(R2, UNPUBLISHED);
            } else {
                s.set(R1, s.load(A, Plain));
                s.set(R2, s.load(B, Plain));
            }
        })
        .spec(spec)
        .build()
        .unwrap();
    entry(
        test,
        None,
        "unsafe publication adapted to safe semantics: the object is a two-field slot in the \
         state, published by storing its index into a relaxed handle; unpublished reads as (-1, -1)",
        BTreeSet::new(),
    )
}

/// The built-in catalog, in listing order.
pub fn builtin_suite() -> Vec<SuiteEntry> {
    vec![
        atom_word(),
        store_buffering("sb.relaxed", Relaxed),
        store_buffering("sb.seqcst", SeqCst),
        message_passing("mp.relaxed", Relaxed),
        message_passing("mp.seqcst", SeqCst),
        message_passing_drf(),
        coherence("corr.relaxed", false),
        coherence("corr.cse", true),
        iriw("iriw.relaxed", Relaxed),
        iriw("iriw.seqcst", SeqCst),
        load_buffering(),
        dependent_cycle(
            "lb.deps",
            "load buffering where each write depends on the preceding read",
            "load buffering with data dependencies; (1, 1) would be out of thin air",
        ),
        dependent_cycle(
            "oota",
            "out-of-thin-air: values copied in a cycle must stay zero",
            "out-of-thin-air cycle",
        ),
        unsafe_publication(),
    ]
}

/// The built-in catalog as a registry.
pub fn builtin_registry() -> Registry<SuiteEntry> {
    let mut reg = Registry::new();
    for e in builtin_suite() {
        reg.register(e).expect("built-in names are unique");
    }
    reg
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::OutcomeType;
    use crate::oracle::{validate_spec, Mismatch, MismatchKind};

    #[test]
    fn catalog_has_fourteen_unique_entries() {
        let suite = builtin_suite();
        assert_eq!(suite.len(), 14);
        assert_eq!(builtin_registry().len(), 14);
    }

    #[test]
    fn mp_selector() {
        let reg = builtin_registry();
        let names: Vec<_> = reg
            .lookup("mp.*")
            .unwrap()
            .iter()
            .map(|e| e.name())
            .collect();
        assert_eq!(names, ["mp.relaxed", "mp.seqcst", "mp.drf"]);
    }

    #[test]
    fn sb_relaxed_classifies_zero_zero_as_interesting() {
        let reg = builtin_registry();
        let e = reg.by_name("sb.relaxed").unwrap();
        assert_eq!(
            e.test.spec().classify(&[0, 0].into()),
            Ok(OutcomeType::Interesting)
        );
        let e = reg.by_name("sb.seqcst").unwrap();
        assert_eq!(
            e.test.spec().classify(&[0, 0].into()),
            Ok(OutcomeType::Forbidden)
        );
    }

    #[test]
    fn twinned_entries_validate_and_match_structure() {
        for e in builtin_suite() {
            e.check_structure().unwrap();
            if e.twin.is_some() {
                assert_eq!(validate_spec(&e).unwrap(), vec![], "{}", e.name());
                assert!(
                    e.unexplained_interesting().unwrap().is_empty(),
                    "{}",
                    e.name()
                );
                assert!(
                    e.curated_weak.is_subset(e.test.spec().interesting()),
                    "{}",
                    e.name()
                );
            }
        }
    }

    #[test]
    fn constructed_mismatches() {
        let reg = builtin_registry();
        let sb = reg.by_name("sb.relaxed").unwrap();
        let mut broken = sb.clone();
        let spec = OutcomeSpec::builder(2)
            .accept([0, 1])
            .accept([1, 0])
            .interesting([0, 0])
            .build()
            .unwrap();
        broken.test = Arc::new(rebuild_with_spec(&sb.test, spec));
        assert_eq!(
            validate_spec(&broken).unwrap(),
            vec![Mismatch {
                outcome: [1, 1].into(),
                kind: MismatchKind::ScButNotAccepted
            }]
        );

        let mp = reg.by_name("mp.relaxed").unwrap();
        let mut broken = mp.clone();
        let spec = OutcomeSpec::builder(2)
            .accept_all(MP_SC)
            .accept([1, 0])
            .build()
            .unwrap();
        broken.test = Arc::new(rebuild_with_spec(&mp.test, spec));
        assert_eq!(
            validate_spec(&broken).unwrap(),
            vec![Mismatch {
                outcome: [1, 0].into(),
                kind: MismatchKind::AcceptedButNotSc
            }]
        );
    }

    fn rebuild_with_spec(t: &LitmusTest, spec: OutcomeSpec) -> LitmusTest {
        let mut b = LitmusTest::builder(t.name())
            .locations(t.locations().to_vec())
            .registers(t.registers().to_vec())
            .spec(spec);
        for body in t.threads() {
            let body = body.clone();
            b = b.thread(move |s| body(s));
        }
        b.build().unwrap()
    }

    #[test]
    fn upub_has_no_twin() {
        let reg = builtin_registry();
        let e = reg.by_name("upub.adapted").unwrap();
        assert!(e.twin.is_none());
        assert!(validate_spec(e).is_err());
        let spec = e.test.spec();
        assert_eq!(spec.classify(&[-1, -1].into()), Ok(OutcomeType::Acceptable));
        assert_eq!(spec.classify(&[42, 0].into()), Ok(OutcomeType::Interesting));
        assert_eq!(spec.classify(&[7, 42].into()), Ok(OutcomeType::Forbidden));
    }

    #[test]
    fn iriw_sc_set_excludes_only_the_disagreement() {
        let sc = iriw_sc();
        assert_eq!(sc.len(), 15);
        assert!(!sc.contains(&[1, 0, 1, 0]));
    }

    #[test]
    fn bodies_run_sequentially_give_accepted_outcomes() {
        // Running each thread to completion in order is one interleaving.
        for e in builtin_suite() {
            let t = &e.test;
            let state = t.new_state();
            for body in t.threads() {
                body(&state.view());
            }
            let o = t.extract(&state.view());
            assert_eq!(
                t.spec().classify(&o),
                Ok(OutcomeType::Acceptable),
                "{}: {o}",
                t.name()
            );
        }
    }
}
