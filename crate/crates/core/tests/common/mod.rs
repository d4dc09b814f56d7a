//! Test-only helpers: independent brute-force oracles and random programs.
#![allow(dead_code)]

use std::collections::{BTreeSet, HashMap};

use litmus::oracle::{AbstractProgram, Instruction, Value};
use litmus::{AccessMode, Outcome};
use rand::rngs::StdRng;
use rand::Rng;

/// Every merge of the threads' instruction sequences, executed against a
/// single memory. No memoization, no shared code with the explorer.
pub fn brute_force_sc(program: &AbstractProgram) -> BTreeSet<Outcome> {
    let threads = program.threads();
    let mut out = BTreeSet::new();
    let mut pcs = vec![0usize; threads.len()];
    let mut mem: HashMap<String, i64> = HashMap::new();
    let mut regs: HashMap<String, i64> = HashMap::new();
    fn step(
        threads: &[Vec<Instruction>],
        outcome_regs: &[String],
        pcs: &mut Vec<usize>,
        mem: &mut HashMap<String, i64>,
        regs: &mut HashMap<String, i64>,
        out: &mut BTreeSet<Outcome>,
    ) {
        let mut progressed = false;
        for t in 0..threads.len() {
            if pcs[t] == threads[t].len() {
                continue;
            }
            progressed = true;
            let (saved_mem, saved_regs) = (mem.clone(), regs.clone());
            run_sc(&threads[t][pcs[t]], mem, regs);
            pcs[t] += 1;
            step(threads, outcome_regs, pcs, mem, regs, out);
            pcs[t] -= 1;
            *mem = saved_mem;
            *regs = saved_regs;
        }
        if !progressed {
            let values: Vec<i64> = outcome_regs
                .iter()
                .map(|r| regs.get(r).copied().unwrap_or(0))
                .collect();
            out.insert(Outcome::new(&values).unwrap());
        }
    }
    step(
        threads,
        program.outcome_registers(),
        &mut pcs,
        &mut mem,
        &mut regs,
        &mut out,
    );
    out
}

fn run_sc(i: &Instruction, mem: &mut HashMap<String, i64>, regs: &mut HashMap<String, i64>) {
    match i {
        Instruction::Write { loc, value, .. } => {
            let v = match value {
                Value::Const(c) => *c,
                Value::Reg(r) => regs.get(r).copied().unwrap_or(0),
            };
            mem.insert(loc.clone(), v);
        }
        Instruction::Read { loc, reg, .. } => {
            regs.insert(reg.clone(), mem.get(loc).copied().unwrap_or(0));
        }
        Instruction::Atomic(body) => body.iter().for_each(|b| run_sc(b, mem, regs)),
    }
}

/// Number of merges of sequences with the given lengths: n! / prod(k_i!).
pub fn multinomial(lengths: &[usize]) -> u64 {
    let fact = |n: usize| (1..=n as u64).product::<u64>();
    let total: usize = lengths.iter().sum();
    lengths.iter().fold(fact(total), |acc, &k| acc / fact(k))
}

/// Random well-formed program: 1..=max_threads threads, 1..=max_instrs
/// instructions each, over locations x, y, z.
pub fn random_program(rng: &mut StdRng, max_threads: usize, max_instrs: usize) -> AbstractProgram {
    const LOCS: [&str; 3] = ["x", "y", "z"];
    let modes = [AccessMode::Relaxed, AccessMode::SeqCst, AccessMode::Plain];
    let n_threads = rng.gen_range(1..=max_threads);
    let mut threads = Vec::new();
    let mut regs: Vec<String> = Vec::new();
    for t in 0..n_threads {
        let mut body = Vec::new();
        let mut own: Vec<String> = Vec::new();
        for _ in 0..rng.gen_range(1..=max_instrs) {
            let loc = LOCS[rng.gen_range(0..LOCS.len())];
            let mode = modes[rng.gen_range(0..modes.len())];
            if rng.gen_bool(0.5) {
                let value = if !own.is_empty() && rng.gen_bool(0.3) {
                    Value::Reg(own[rng.gen_range(0..own.len())].clone())
                } else {
                    Value::Const(rng.gen_range(1..=2))
                };
                body.push(Instruction::Write {
                    loc: loc.to_string(),
                    value,
                    mode,
                });
            } else {
                let reg = format!("r{t}_{}", own.len());
                body.push(Instruction::read(loc, &reg, mode));
                own.push(reg);
            }
        }
        regs.extend(own);
        threads.push(body);
    }
    if regs.is_empty() {
        // Make sure there is something to observe.
        threads[0].push(Instruction::read("x", "r_end", AccessMode::Relaxed));
        regs.push("r_end".into());
    }
    regs.truncate(4);
    let names: Vec<&str> = regs.iter().map(String::as_str).collect();
    AbstractProgram::new(LOCS, threads, &names).expect("generator emits well-formed programs")
}
