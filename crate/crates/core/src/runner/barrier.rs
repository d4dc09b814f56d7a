//! Reusable sense-reversing spin barrier.

use std::hint;
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::thread;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BarrierAborted;

/// Counting barrier that spins for a bounded number of iterations and then
/// yields. Can be aborted so that waiters bail out when a peer never arrives.
#[derive(Debug)]
pub struct SpinBarrier {
    parties: usize,
    arrived: AtomicUsize,
    sense: AtomicBool,
    aborted: AtomicBool,
    spin_limit: u32,
}

impl SpinBarrier {
    /// Spin limit is chosen from the host's parallelism: when the parties
    /// outnumber the CPUs, spinning only burns the time slice a peer needs.
    pub fn new(parties: usize) -> Self {
        let cpus = thread::available_parallelism().map_or(1, |n| n.get());
        let spin_limit = if parties > cpus { 0 } else { 1 << 12 };
        Self::with_spin_limit(parties, spin_limit)
    }

    pub fn with_spin_limit(parties: usize, spin_limit: u32) -> Self {
        assert!(parties > 0, "barrier needs at least one party");
        SpinBarrier {
            parties,
            arrived: AtomicUsize::new(0),
            sense: AtomicBool::new(false),
            aborted: AtomicBool::new(false),
            spin_limit,
        }
    }

    pub fn parties(&self) -> usize {
        self.parties
    }

    /// Per-thread handle carrying the local sense.
    pub fn waiter(&self) -> Waiter<'_> {
        Waiter {
            barrier: self,
            sense: false,
        }
    }

    /// Releases every current and future waiter with `BarrierAborted`.
    pub fn abort(&self) {
        self.aborted.store(true, Ordering::Release);
    }

    pub fn is_aborted(&self) -> bool {
        self.aborted.load(Ordering::Acquire)
    }
}

pub struct Waiter<'a> {
    barrier: &'a SpinBarrier,
    sense: bool,
}

impl Waiter<'_> {
    /// Blocks until all parties arrive. Returns `true` on the thread that
    /// arrived last.
    pub fn wait(&mut self) -> Result<bool, BarrierAborted> {
        let b = self.barrier;
        self.sense = !self.sense;
        if b.arrived.fetch_add(1, Ordering::AcqRel) + 1 == b.parties {
            b.arrived.store(0, Ordering::Relaxed);
            b.sense.store(self.sense, Ordering::Release);
            return Ok(true);
        }
        let mut spins = 0u32;
        while b.sense.load(Ordering::Acquire) != self.sense {
            if b.is_aborted() {
                return Err(BarrierAborted);
            }
            if spins < b.spin_limit {
                spins += 1;
                hint::spin_loop();
            } else {
                thread::yield_now();
            }
        }
        Ok(false)
    }
}
