//! Exhaustive outcome enumeration under sequential consistency and TSO.
//!
//! Programs are small read/write sequences over named locations. The
//! explorer runs a depth-first search over every nondeterministic
//! transition, memoizing visited machine states, and collects the outcome
//! tuple of every final state.
//!
//! SC transitions: any thread executes its next instruction directly
//! against memory. An atomic block executes entirely in one step.
//!
//! TSO transitions: a non-SeqCst write is appended to the thread's FIFO
//! store buffer; a SeqCst write is appended and then the whole buffer is
//! drained. A read takes the newest buffered store to the same location, if
//! any, and memory otherwise. At any point the oldest buffered store of any
//! thread may drain to memory. An atomic block first drains its thread's
//! buffer and then runs against memory, like a locked instruction sequence.
//! Modes other than SeqCst behave identically.

use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{AccessMode, Outcome, OutcomeSpec, MAX_OUTCOME_ARITY};
use crate::suite::SuiteEntry;

/// Exploration aborts past this many states.
pub const STATE_CAP: usize = 10_000_000;
/// Instructions per thread, counting atomic block contents.
pub const MAX_THREAD_INSTRUCTIONS: usize = 8;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("malformed program: {0}")]
    Malformed(String),
    #[error("state space exceeds {STATE_CAP} states; use a smaller program")]
    StateCapExceeded,
    #[error("test {0} has no abstract program")]
    NoTwin(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MemoryModel {
    #[serde(rename = "sc")]
    Sc,
    #[serde(rename = "tso")]
    Tso,
}

impl fmt::Display for MemoryModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MemoryModel::Sc => "SC",
            MemoryModel::Tso => "TSO",
        })
    }
}

impl std::str::FromStr for MemoryModel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "sc" => Ok(MemoryModel::Sc),
            "tso" => Ok(MemoryModel::Tso),
            _ => Err(format!("unknown memory model {s:?}: expected sc or tso")),
        }
    }
}

/// Value written by a store.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Value {
    Const(i64),
    Reg(String),
}

impl From<i64> for Value {
    fn from(v: i64) -> Self {
        Value::Const(v)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Instruction {
    Write {
        loc: String,
        value: Value,
        mode: AccessMode,
    },
    Read {
        loc: String,
        reg: String,
        mode: AccessMode,
    },
    /// Executes as one indivisible step. Not nestable.
    Atomic(Vec<Instruction>),
}

impl Instruction {
    pub fn write(loc: &str, value: impl Into<Value>, mode: AccessMode) -> Self {
        Instruction::Write {
            loc: loc.to_string(),
            value: value.into(),
            mode,
        }
    }

    /// Store of a register's current value.
    pub fn write_reg(loc: &str, reg: &str, mode: AccessMode) -> Self {
        Instruction::Write {
            loc: loc.to_string(),
            value: Value::Reg(reg.to_string()),
            mode,
        }
    }

    pub fn read(loc: &str, reg: &str, mode: AccessMode) -> Self {
        Instruction::Read {
            loc: loc.to_string(),
            reg: reg.to_string(),
            mode,
        }
    }

    pub fn atomic(body: Vec<Instruction>) -> Self {
        Instruction::Atomic(body)
    }

    fn weight(&self) -> usize {
        match self {
            Instruction::Atomic(body) => body.len(),
            _ => 1,
        }
    }

    fn all_writes_seqcst(&self) -> bool {
        match self {
            Instruction::Write { mode, .. } => *mode == AccessMode::SeqCst,
            Instruction::Read { .. } => true,
            Instruction::Atomic(body) => body.iter().all(Instruction::all_writes_seqcst),
        }
    }

    fn with_seqcst_writes(&self) -> Instruction {
        match self {
            Instruction::Write { loc, value, .. } => Instruction::Write {
                loc: loc.clone(),
                value: value.clone(),
                mode: AccessMode::SeqCst,
            },
            Instruction::Read { .. } => self.clone(),
            Instruction::Atomic(body) => {
                Instruction::Atomic(body.iter().map(Instruction::with_seqcst_writes).collect())
            }
        }
    }
}

/// Ordering-annotated read/write program used as the oracle's input.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AbstractProgram {
    locations: Vec<String>,
    threads: Vec<Vec<Instruction>>,
    outcome_registers: Vec<String>,
    compiled: Compiled,
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct Compiled {
    threads: Vec<Vec<Op>>,
    outcome: Vec<usize>,
    registers: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Src {
    Const(i64),
    Reg(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Op {
    Write { loc: usize, src: Src, seqcst: bool },
    Read { loc: usize, reg: usize },
    Atomic(Vec<Op>),
}

impl AbstractProgram {
    pub fn new<L, S>(
        locations: L,
        threads: Vec<Vec<Instruction>>,
        outcome_registers: &[&str],
    ) -> Result<Self, OracleError>
    where
        L: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let locations: Vec<String> = locations.into_iter().map(Into::into).collect();
        let outcome_registers: Vec<String> =
            outcome_registers.iter().map(|r| r.to_string()).collect();
        let compiled = compile(&locations, &threads, &outcome_registers)?;
        Ok(AbstractProgram {
            locations,
            threads,
            outcome_registers,
            compiled,
        })
    }

    pub fn locations(&self) -> &[String] {
        &self.locations
    }

    pub fn threads(&self) -> &[Vec<Instruction>] {
        &self.threads
    }

    pub fn outcome_registers(&self) -> &[String] {
        &self.outcome_registers
    }

    /// True when every write, including those inside atomic blocks, is SeqCst.
    pub fn all_writes_seqcst(&self) -> bool {
        self.threads
            .iter()
            .flatten()
            .all(Instruction::all_writes_seqcst)
    }

    /// Same program with every write strengthened to SeqCst.
    pub fn with_seqcst_writes(&self) -> AbstractProgram {
        let threads = self
            .threads
            .iter()
            .map(|t| t.iter().map(Instruction::with_seqcst_writes).collect())
            .collect();
        let regs: Vec<&str> = self.outcome_registers.iter().map(String::as_str).collect();
        AbstractProgram::new(self.locations.clone(), threads, &regs)
            .expect("strengthening preserves well-formedness")
    }
}

fn compile(
    locations: &[String],
    threads: &[Vec<Instruction>],
    outcome_registers: &[String],
) -> Result<Compiled, OracleError> {
    let bad = |msg: String| Err(OracleError::Malformed(msg));
    if threads.is_empty() {
        return bad("program has no threads".into());
    }
    if threads.len() > u8::MAX as usize {
        return bad("too many threads".into());
    }
    let mut loc_index = HashMap::new();
    for (i, l) in locations.iter().enumerate() {
        if loc_index.insert(l.as_str(), i).is_some() {
            return bad(format!("location {l} declared twice"));
        }
    }
    // Register name -> (index, owning thread).
    let mut regs: HashMap<String, (usize, usize)> = HashMap::new();
    let mut compiled_threads = Vec::with_capacity(threads.len());

    for (tid, thread) in threads.iter().enumerate() {
        let weight: usize = thread.iter().map(Instruction::weight).sum();
        if weight > MAX_THREAD_INSTRUCTIONS {
            return bad(format!(
                "thread {tid} has {weight} instructions; at most {MAX_THREAD_INSTRUCTIONS} allowed"
            ));
        }
        let mut ops = Vec::with_capacity(thread.len());
        for instr in thread {
            ops.push(compile_instr(instr, tid, false, &loc_index, &mut regs)?);
        }
        compiled_threads.push(ops);
    }

    if outcome_registers.is_empty() || outcome_registers.len() > MAX_OUTCOME_ARITY {
        return bad(format!(
            "outcome needs 1..={MAX_OUTCOME_ARITY} registers, got {}",
            outcome_registers.len()
        ));
    }
    let mut outcome = Vec::with_capacity(outcome_registers.len());
    for r in outcome_registers {
        match regs.get(r) {
            Some(&(idx, _)) => outcome.push(idx),
            None => return bad(format!("outcome register {r} is never written")),
        }
    }
    Ok(Compiled {
        threads: compiled_threads,
        outcome,
        registers: regs.len(),
    })
}

fn compile_instr(
    instr: &Instruction,
    tid: usize,
    in_block: bool,
    locs: &HashMap<&str, usize>,
    regs: &mut HashMap<String, (usize, usize)>,
) -> Result<Op, OracleError> {
    let loc_of = |l: &str| {
        locs.get(l)
            .copied()
            .ok_or_else(|| OracleError::Malformed(format!("undeclared location {l}")))
    };
    match instr {
        Instruction::Write { loc, value, mode } => {
            let src = match value {
                Value::Const(v) => Src::Const(*v),
                Value::Reg(r) => match regs.get(r) {
                    Some(&(idx, owner)) if owner == tid => Src::Reg(idx),
                    _ => {
                        return Err(OracleError::Malformed(format!(
                            "thread {tid} writes register {r} before reading into it"
                        )))
                    }
                },
            };
            Ok(Op::Write {
                loc: loc_of(loc)?,
                src,
                seqcst: *mode == AccessMode::SeqCst,
            })
        }
        Instruction::Read { loc, reg, .. } => {
            let loc = loc_of(loc)?;
            if regs.contains_key(reg) {
                return Err(OracleError::Malformed(format!(
                    "register {reg} written more than once"
                )));
            }
            let idx = regs.len();
            regs.insert(reg.clone(), (idx, tid));
            Ok(Op::Read { loc, reg: idx })
        }
        Instruction::Atomic(body) => {
            if in_block {
                return Err(OracleError::Malformed("atomic blocks cannot nest".into()));
            }
            let ops = body
                .iter()
                .map(|i| compile_instr(i, tid, true, locs, regs))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(Op::Atomic(ops))
        }
    }
}

/// Exploration state: program counters, memory, registers, store buffers.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MachineState {
    pub pcs: Vec<u8>,
    pub mem: Vec<i64>,
    pub regs: Vec<i64>,
    /// Pending `(location, value)` stores per thread, oldest first.
    pub buffers: Vec<VecDeque<(u8, i64)>>,
}

impl MachineState {
    fn initial(program: &AbstractProgram) -> Self {
        let n = program.compiled.threads.len();
        MachineState {
            pcs: vec![0; n],
            mem: vec![0; program.locations.len()],
            regs: vec![0; program.compiled.registers],
            buffers: vec![VecDeque::new(); n],
        }
    }

    fn is_final(&self, program: &AbstractProgram) -> bool {
        self.pcs
            .iter()
            .zip(&program.compiled.threads)
            .all(|(&pc, t)| pc as usize == t.len())
            && self.buffers.iter().all(VecDeque::is_empty)
    }

    fn outcome(&self, program: &AbstractProgram) -> Outcome {
        let values: Vec<i64> = program
            .compiled
            .outcome
            .iter()
            .map(|&r| self.regs[r])
            .collect();
        Outcome::new(&values).expect("outcome arity validated at construction")
    }

    fn read(&self, tid: usize, model: MemoryModel, loc: usize) -> i64 {
        if model == MemoryModel::Tso {
            if let Some(&(_, v)) = self.buffers[tid]
                .iter()
                .rev()
                .find(|(l, _)| *l as usize == loc)
            {
                return v;
            }
        }
        self.mem[loc]
    }

    fn drain(&mut self, tid: usize) {
        while let Some((loc, v)) = self.buffers[tid].pop_front() {
            self.mem[loc as usize] = v;
        }
    }

    fn exec(&mut self, tid: usize, op: &Op, model: MemoryModel, direct: bool) {
        match op {
            Op::Write { loc, src, seqcst } => {
                let v = match *src {
                    Src::Const(c) => c,
                    Src::Reg(r) => self.regs[r],
                };
                if model == MemoryModel::Sc || direct {
                    self.mem[*loc] = v;
                } else {
                    self.buffers[tid].push_back((*loc as u8, v));
                    if *seqcst {
                        self.drain(tid);
                    }
                }
            }
            Op::Read { loc, reg } => {
                self.regs[*reg] = if direct {
                    self.mem[*loc]
                } else {
                    self.read(tid, model, *loc)
                };
            }
            Op::Atomic(body) => {
                if model == MemoryModel::Tso {
                    self.drain(tid);
                }
                for op in body {
                    self.exec(tid, op, model, true);
                }
            }
        }
    }

    fn successors(
        &self,
        program: &AbstractProgram,
        model: MemoryModel,
        out: &mut Vec<MachineState>,
    ) {
        for (tid, ops) in program.compiled.threads.iter().enumerate() {
            let pc = self.pcs[tid] as usize;
            if let Some(op) = ops.get(pc) {
                let mut next = self.clone();
                next.exec(tid, op, model, false);
                next.pcs[tid] += 1;
                out.push(next);
            }
            if model == MemoryModel::Tso && !self.buffers[tid].is_empty() {
                let mut next = self.clone();
                let (loc, v) = next.buffers[tid].pop_front().expect("non-empty buffer");
                next.mem[loc as usize] = v;
                out.push(next);
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExploreOptions {
    /// Skip states already seen. Without it the search walks every
    /// execution path separately.
    pub memoize: bool,
    pub state_cap: usize,
}

impl Default for ExploreOptions {
    fn default() -> Self {
        ExploreOptions {
            memoize: true,
            state_cap: STATE_CAP,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Exploration {
    pub outcomes: BTreeSet<Outcome>,
    /// States expanded by the search.
    pub states: usize,
    /// Times the search reached a final state.
    pub final_paths: usize,
}

pub fn explore(
    program: &AbstractProgram,
    model: MemoryModel,
    options: ExploreOptions,
) -> Result<Exploration, OracleError> {
    let mut outcomes = BTreeSet::new();
    let mut visited: HashSet<MachineState> = HashSet::new();
    let mut stack = vec![MachineState::initial(program)];
    let mut succ = Vec::new();
    let mut states = 0usize;
    let mut final_paths = 0usize;

    while let Some(state) = stack.pop() {
        if options.memoize && !visited.insert(state.clone()) {
            continue;
        }
        states += 1;
        if states > options.state_cap {
            return Err(OracleError::StateCapExceeded);
        }
        if state.is_final(program) {
            final_paths += 1;
            outcomes.insert(state.outcome(program));
            continue;
        }
        succ.clear();
        state.successors(program, model, &mut succ);
        stack.append(&mut succ);
    }
    Ok(Exploration {
        outcomes,
        states,
        final_paths,
    })
}

/// Every final outcome reachable under `model`.
pub fn enumerate_outcomes(
    program: &AbstractProgram,
    model: MemoryModel,
) -> Result<BTreeSet<Outcome>, OracleError> {
    explore(program, model, ExploreOptions::default()).map(|e| e.outcomes)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum MismatchKind {
    /// Listed as accepted, but no interleaving produces it.
    AcceptedButNotSc,
    /// Some interleaving produces it, but it is not listed as accepted.
    ScButNotAccepted,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Mismatch {
    pub outcome: Outcome,
    pub kind: MismatchKind,
}

impl fmt::Display for Mismatch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            MismatchKind::AcceptedButNotSc => {
                write!(f, "{} is accepted but not SC-reachable", self.outcome)
            }
            MismatchKind::ScButNotAccepted => {
                write!(f, "{} is SC-reachable but not accepted", self.outcome)
            }
        }
    }
}

/// Differences between a spec's accepted set and the SC outcomes of `program`.
pub fn check_spec(
    spec: &OutcomeSpec,
    program: &AbstractProgram,
) -> Result<Vec<Mismatch>, OracleError> {
    let sc = enumerate_outcomes(program, MemoryModel::Sc)?;
    let mut out: Vec<Mismatch> = spec
        .accepted()
        .difference(&sc)
        .map(|&outcome| Mismatch {
            outcome,
            kind: MismatchKind::AcceptedButNotSc,
        })
        .chain(sc.difference(spec.accepted()).map(|&outcome| Mismatch {
            outcome,
            kind: MismatchKind::ScButNotAccepted,
        }))
        .collect();
    out.sort();
    Ok(out)
}

/// Checks a suite entry's accepted set against its abstract twin.
pub fn validate_spec(entry: &SuiteEntry) -> Result<Vec<Mismatch>, OracleError> {
    let twin = entry
        .twin
        .as_ref()
        .ok_or_else(|| OracleError::NoTwin(entry.test.name().to_string()))?;
    check_spec(entry.test.spec(), twin)
}

/// One outcome per line, sorted, under a `model: ...` header.
pub fn format_outcome_set(model: MemoryModel, outcomes: &BTreeSet<Outcome>) -> String {
    let mut s = format!("model: {model}\n");
    for o in outcomes {
        s.push_str(&o.to_string());
        s.push('\n');
    }
    s
}
