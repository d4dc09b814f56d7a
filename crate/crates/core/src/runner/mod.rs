//! The stress engine.
//!
//! A batch reinitializes an array of test states, spawns one worker per test
//! thread, and lets every worker walk the array in ascending order running
//! its body on each cell. Workers meet on a barrier every `sync_every` cells
//! and once more at the end. After the workers are joined, the orchestrator
//! extracts an outcome from every cell into the histogram.

pub mod affinity;
pub mod barrier;
pub mod params;

use std::collections::BTreeSet;
use std::sync::atomic::AtomicI64;
use std::thread;
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::histogram::Histogram;
use crate::model::{LitmusTest, ModelError, TestState, ThreadBody};
use crate::report::{Environment, RunReport};

pub use affinity::{pin_thread, CpuTopology, PinOutcome};
pub use barrier::SpinBarrier;
pub use params::{AffinityScheme, RunParams};

#[derive(Debug, Error)]
pub enum RunError {
    #[error("invalid run parameters: {0}")]
    InvalidParams(String),
    #[error("failed to spawn worker thread, partial results discarded: {0}")]
    Spawn(std::io::Error),
    #[error("worker thread panicked, partial results discarded")]
    WorkerPanicked,
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Contiguous, zero-initialized storage for one batch of test states.
pub struct StateArray {
    slots: Box<[AtomicI64]>,
    stride: usize,
    locations: usize,
    registers: usize,
    len: usize,
}

impl StateArray {
    pub fn new(test: &LitmusTest, len: usize, padding_words: usize) -> Self {
        let locations = test.locations().len();
        let registers = test.registers().len();
        let stride = locations + registers + padding_words;
        StateArray {
            slots: (0..len * stride).map(|_| AtomicI64::new(0)).collect(),
            stride,
            locations,
            registers,
            len,
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Words between the starts of consecutive cells.
    pub fn stride(&self) -> usize {
        self.stride
    }

    /// Zeroes every cell. Exclusive access guarantees no worker is running.
    pub fn reinit(&mut self) {
        for slot in self.slots.iter_mut() {
            *slot.get_mut() = 0;
        }
    }

    #[inline]
    pub fn cell(&self, i: usize) -> TestState<'_> {
        let base = i * self.stride;
        let locs = &self.slots[base..base + self.locations];
        let regs = &self.slots[base + self.locations..base + self.locations + self.registers];
        TestState::new(locs, regs)
    }
}

/// Raw result of a run, before classification.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub histogram: Histogram,
    pub rounds_completed: usize,
    pub truncated: bool,
    pub warnings: Vec<String>,
    pub elapsed: Duration,
}

/// Runs `test` under `params` and builds a classified report.
pub fn run_test(test: &LitmusTest, params: &RunParams) -> Result<RunReport, RunError> {
    let out = execute(test, params)?;
    let report = RunReport::build(
        test.name(),
        params.clone(),
        test.spec().clone(),
        &out.histogram,
        out.rounds_completed,
        out.truncated,
        Environment::capture(),
        out.warnings,
    )?;
    Ok(report)
}

/// Pointwise sum of histograms.
pub fn merge_histograms<'a, I>(parts: I) -> Result<Option<Histogram>, ModelError>
where
    I: IntoIterator<Item = &'a Histogram>,
{
    let mut iter = parts.into_iter();
    let Some(first) = iter.next() else {
        return Ok(None);
    };
    let mut merged = first.clone();
    for h in iter {
        merged.merge(h)?;
    }
    Ok(Some(merged))
}

/// Runs every round of `test` and returns the merged histogram.
pub fn execute(test: &LitmusTest, params: &RunParams) -> Result<RunOutput, RunError> {
    params.validate()?;
    let topo = CpuTopology::detect();
    let arity = test.spec().arity();
    let mut arrays: Vec<StateArray> = (0..params.parallel_instances)
        .map(|_| StateArray::new(test, params.batch_size, params.padding_words()))
        .collect();
    let mut histogram = Histogram::new(arity);
    let mut warnings = BTreeSet::new();
    let mut rounds_completed = 0;
    let mut truncated = false;
    let start = Instant::now();

    for round in 0..params.rounds {
        if round > 0 && params.time_budget.is_some_and(|b| start.elapsed() >= b) {
            truncated = true;
            warnings.insert(format!(
                "time budget reached: ran {round} of {} rounds",
                params.rounds
            ));
            break;
        }
        for array in &mut arrays {
            array.reinit();
        }
        let pins = run_batch(test, params, &arrays, &topo)?;
        for pin in pins {
            match pin {
                PinOutcome::NotRequested | PinOutcome::Pinned(_) => {}
                other => {
                    warnings.insert(format!("affinity degraded, running unpinned: {other}"));
                }
            }
        }
        for array in &arrays {
            for i in 0..array.len() {
                histogram.record(&test.extract(&array.cell(i)))?;
            }
        }
        rounds_completed += 1;
    }

    Ok(RunOutput {
        histogram,
        rounds_completed,
        truncated,
        warnings: warnings.into_iter().collect(),
        elapsed: start.elapsed(),
    })
}

fn run_batch(
    test: &LitmusTest,
    params: &RunParams,
    arrays: &[StateArray],
    topo: &CpuTopology,
) -> Result<Vec<PinOutcome>, RunError> {
    let arity = test.arity();
    let total_threads = arity * arrays.len();
    let cpus = thread::available_parallelism().map_or(1, |n| n.get());
    let spin_limit = if total_threads > cpus { 0 } else { 1 << 12 };
    let barriers: Vec<SpinBarrier> = arrays
        .iter()
        .map(|_| SpinBarrier::with_spin_limit(arity, spin_limit))
        .collect();

    thread::scope(|s| {
        let mut handles = Vec::with_capacity(total_threads);
        let mut spawn_error = None;
        'spawn: for (inst, array) in arrays.iter().enumerate() {
            let barrier = &barriers[inst];
            for (t, body) in test.threads().iter().enumerate() {
                let global = inst * arity + t;
                let ctx = WorkerCtx {
                    body,
                    array,
                    barrier,
                    sync_every: params.sync_every,
                    thread_index: global,
                    affinity: &params.affinity,
                    topo,
                };
                let spawned = thread::Builder::new()
                    .name(format!("litmus-{inst}-{t}"))
                    .spawn_scoped(s, move || ctx.run());
                match spawned {
                    Ok(h) => handles.push(h),
                    Err(e) => {
                        spawn_error = Some(e);
                        break 'spawn;
                    }
                }
            }
        }
        if spawn_error.is_some() {
            for b in &barriers {
                b.abort();
            }
        }
        let mut pins = Vec::with_capacity(handles.len());
        let mut failed = false;
        for h in handles {
            match h.join() {
                Ok(Ok(pin)) => pins.push(pin),
                Ok(Err(_)) | Err(_) => failed = true,
            }
        }
        if let Some(e) = spawn_error {
            return Err(RunError::Spawn(e));
        }
        if failed {
            return Err(RunError::WorkerPanicked);
        }
        Ok(pins)
    })
}

struct WorkerCtx<'a> {
    body: &'a ThreadBody,
    array: &'a StateArray,
    barrier: &'a SpinBarrier,
    sync_every: usize,
    thread_index: usize,
    affinity: &'a AffinityScheme,
    topo: &'a CpuTopology,
}

/// Aborts the barrier if the worker unwinds, so peers do not wait forever.
struct AbortOnPanic<'a>(&'a SpinBarrier);

impl Drop for AbortOnPanic<'_> {
    fn drop(&mut self) {
        if thread::panicking() {
            self.0.abort();
        }
    }
}

impl WorkerCtx<'_> {
    fn run(self) -> Result<PinOutcome, barrier::BarrierAborted> {
        let _guard = AbortOnPanic(self.barrier);
        let pin = affinity::pin_thread_with(self.thread_index, self.affinity, self.topo);
        let mut waiter = self.barrier.waiter();
        waiter.wait()?;
        let body = &**self.body;
        let mut next_sync = self.sync_every;
        for i in 0..self.array.len() {
            body(&self.array.cell(i));
            if i + 1 == next_sync {
                waiter.wait()?;
                next_sync += self.sync_every;
            }
        }
        waiter.wait()?;
        Ok(pin)
    }
}
