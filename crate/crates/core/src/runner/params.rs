use std::fmt;
use std::str::FromStr;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::RunError;

/// How worker threads are pinned to CPUs.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", tag = "kind", content = "cpus")]
pub enum AffinityScheme {
    #[default]
    None,
    /// Thread i runs on the i-th available CPU.
    Sequential,
    /// Threads are placed on distinct physical cores before SMT siblings.
    Spread,
    /// Thread i runs on `cpus[i]`.
    Explicit(Vec<usize>),
}

impl FromStr for AffinityScheme {
    type Err = String;

    /// Accepts `none`, `seq`, `spread`, or a comma-separated CPU list.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "none" => Ok(AffinityScheme::None),
            "seq" | "sequential" => Ok(AffinityScheme::Sequential),
            "spread" => Ok(AffinityScheme::Spread),
            list => list
                .split(',')
                .map(|c| {
                    c.trim().parse::<usize>().map_err(|_| {
                        format!("invalid affinity {s:?}: expected none, seq, spread, or a CPU list")
                    })
                })
                .collect::<Result<Vec<_>, _>>()
                .map(AffinityScheme::Explicit),
        }
    }
}

impl fmt::Display for AffinityScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AffinityScheme::None => f.write_str("none"),
            AffinityScheme::Sequential => f.write_str("seq"),
            AffinityScheme::Spread => f.write_str("spread"),
            AffinityScheme::Explicit(cpus) => {
                let list: Vec<String> = cpus.iter().map(|c| c.to_string()).collect();
                f.write_str(&list.join(","))
            }
        }
    }
}

/// Runner configuration.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RunParams {
    /// States per batch.
    pub batch_size: usize,
    /// Number of batches.
    pub rounds: usize,
    /// Cells walked between barrier waits.
    pub sync_every: usize,
    pub affinity: AffinityScheme,
    /// Inert bytes appended to every state.
    pub padding_bytes: usize,
    /// Independent runner instances whose histograms are merged.
    pub parallel_instances: usize,
    /// Wall-clock cap, checked between rounds.
    pub time_budget: Option<Duration>,
}

impl Default for RunParams {
    fn default() -> Self {
        RunParams {
            batch_size: 1_000_000,
            rounds: 10,
            sync_every: 100,
            affinity: AffinityScheme::None,
            padding_bytes: 0,
            parallel_instances: 1,
            time_budget: None,
        }
    }
}

pub const WORD_BYTES: usize = std::mem::size_of::<i64>();

impl RunParams {
    pub fn validate(&self) -> Result<(), RunError> {
        let fail = |msg: String| Err(RunError::InvalidParams(msg));
        if self.batch_size == 0 {
            return fail("batch size must be at least 1".into());
        }
        if self.rounds == 0 {
            return fail("rounds must be at least 1".into());
        }
        if self.sync_every == 0 {
            return fail("sync-every must be at least 1".into());
        }
        if self.sync_every > self.batch_size {
            return fail(format!(
                "sync-every ({}) must not exceed batch size ({})",
                self.sync_every, self.batch_size
            ));
        }
        if self.parallel_instances == 0 {
            return fail("parallel instances must be at least 1".into());
        }
        if !self.padding_bytes.is_multiple_of(WORD_BYTES) {
            return fail(format!(
                "padding ({} bytes) must be a multiple of {WORD_BYTES}",
                self.padding_bytes
            ));
        }
        Ok(())
    }

    pub fn padding_words(&self) -> usize {
        self.padding_bytes / WORD_BYTES
    }

    /// Iterations the run performs when no time budget fires.
    pub fn planned_iterations(&self) -> u64 {
        (self.batch_size as u64) * (self.rounds as u64) * (self.parallel_instances as u64)
    }
}
