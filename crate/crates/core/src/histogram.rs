//! Outcome histograms and the compact keys used to build them.

use std::collections::HashMap;

use crate::model::{ModelError, Outcome, MAX_OUTCOME_ARITY};

/// Compact hash key for an outcome.
///
/// Tuples whose elements all fit in an `i32` are packed into one `u128`,
/// 32 bits per element. Anything wider is kept verbatim.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OutcomeKey {
    Packed(u128),
    Spill(Outcome),
}

#[inline]
pub fn encode_outcome(outcome: &Outcome) -> OutcomeKey {
    let mut packed = 0u128;
    for (i, &v) in outcome.values().iter().enumerate() {
        let Ok(narrow) = i32::try_from(v) else {
            return OutcomeKey::Spill(*outcome);
        };
        packed |= (narrow as u32 as u128) << (32 * i);
    }
    OutcomeKey::Packed(packed)
}

pub fn decode_outcome(key: &OutcomeKey, arity: usize) -> Result<Outcome, ModelError> {
    match key {
        OutcomeKey::Packed(bits) => {
            if arity == 0 || arity > MAX_OUTCOME_ARITY {
                return Err(ModelError::BadOutcomeArity(arity));
            }
            let mut values = [0i64; MAX_OUTCOME_ARITY];
            for (i, v) in values.iter_mut().enumerate().take(arity) {
                *v = (bits >> (32 * i)) as u32 as i32 as i64;
            }
            Outcome::new(&values[..arity])
        }
        OutcomeKey::Spill(o) if o.arity() == arity => Ok(*o),
        OutcomeKey::Spill(o) => Err(ModelError::ArityMismatch {
            expected: arity,
            actual: o.arity(),
        }),
    }
}

/// Outcome counts for a single test. Every key has the same arity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Histogram {
    arity: usize,
    counts: HashMap<OutcomeKey, u64>,
}

impl Histogram {
    pub fn new(arity: usize) -> Self {
        Histogram {
            arity,
            counts: HashMap::new(),
        }
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    fn check(&self, outcome: &Outcome) -> Result<(), ModelError> {
        if outcome.arity() != self.arity {
            return Err(ModelError::ArityMismatch {
                expected: self.arity,
                actual: outcome.arity(),
            });
        }
        Ok(())
    }

    pub fn record(&mut self, outcome: &Outcome) -> Result<(), ModelError> {
        self.add(outcome, 1)
    }

    pub fn add(&mut self, outcome: &Outcome, count: u64) -> Result<(), ModelError> {
        self.check(outcome)?;
        *self.counts.entry(encode_outcome(outcome)).or_insert(0) += count;
        Ok(())
    }

    pub fn count(&self, outcome: &Outcome) -> u64 {
        self.counts
            .get(&encode_outcome(outcome))
            .copied()
            .unwrap_or(0)
    }

    /// Sum of all counts.
    pub fn total(&self) -> u64 {
        self.counts.values().sum()
    }

    /// Number of distinct outcomes recorded.
    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    /// Outcomes with their counts, in no particular order.
    pub fn iter(&self) -> impl Iterator<Item = (Outcome, u64)> + '_ {
        self.counts.iter().map(move |(k, &c)| {
            (
                decode_outcome(k, self.arity).expect("keys are arity-checked on insert"),
                c,
            )
        })
    }

    /// Outcomes with a positive count, sorted.
    pub fn support(&self) -> Vec<Outcome> {
        let mut v: Vec<Outcome> = self
            .iter()
            .filter(|&(_, c)| c > 0)
            .map(|(o, _)| o)
            .collect();
        v.sort();
        v
    }

    /// Pointwise sum of `other` into `self`.
    pub fn merge(&mut self, other: &Histogram) -> Result<(), ModelError> {
        if other.arity != self.arity {
            return Err(ModelError::ArityMismatch {
                expected: self.arity,
                actual: other.arity,
            });
        }
        for (k, &c) in &other.counts {
            *self.counts.entry(*k).or_insert(0) += c;
        }
        Ok(())
    }
}
