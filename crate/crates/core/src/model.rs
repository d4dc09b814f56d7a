//! What a litmus test is: shared state layout, thread bodies, outcome
//! extraction, and the outcome specification used to classify results.

use std::cmp::Ordering as CmpOrdering;
use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::sync::atomic::{AtomicI64, Ordering};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::histogram::Histogram;

/// Maximum number of values in an outcome tuple.
pub const MAX_OUTCOME_ARITY: usize = 4;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("outcome arity mismatch: expected {expected}, got {actual}")]
    ArityMismatch { expected: usize, actual: usize },
    #[error("outcome arity must be between 1 and {MAX_OUTCOME_ARITY}, got {0}")]
    BadOutcomeArity(usize),
    #[error("outcome {outcome} is listed as both {first} and {second}")]
    OverlappingSpec {
        outcome: Outcome,
        first: OutcomeType,
        second: OutcomeType,
    },
    #[error("invalid test name {0:?}: expected lowercase dotted identifier")]
    BadName(String),
    #[error("test {name}: {reason}")]
    Malformed { name: String, reason: String },
    #[error("test {0:?} is already registered")]
    Duplicate(String),
    #[error("invalid selector {0:?}: {1}")]
    BadSelector(String, String),
}

/// Memory ordering attached to every shared-location access.
///
/// `Plain` has no well-defined racy counterpart in Rust, so it is executed as
/// a relaxed atomic access.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AccessMode {
    Plain,
    Relaxed,
    Acquire,
    Release,
    SeqCst,
}

impl AccessMode {
    /// Ordering used when this mode annotates a load. `Release` has no load
    /// form and is strengthened to `Acquire`.
    pub fn load_ordering(self) -> Ordering {
        match self {
            AccessMode::Plain | AccessMode::Relaxed => Ordering::Relaxed,
            AccessMode::Acquire | AccessMode::Release => Ordering::Acquire,
            AccessMode::SeqCst => Ordering::SeqCst,
        }
    }

    /// Ordering used when this mode annotates a store. `Acquire` has no store
    /// form and is strengthened to `Release`.
    pub fn store_ordering(self) -> Ordering {
        match self {
            AccessMode::Plain | AccessMode::Relaxed => Ordering::Relaxed,
            AccessMode::Acquire | AccessMode::Release => Ordering::Release,
            AccessMode::SeqCst => Ordering::SeqCst,
        }
    }
}

/// A register snapshot taken at the end of one test execution.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Outcome {
    len: u8,
    values: [i64; MAX_OUTCOME_ARITY],
}

impl Outcome {
    pub fn new(values: &[i64]) -> Result<Self, ModelError> {
        if values.is_empty() || values.len() > MAX_OUTCOME_ARITY {
            return Err(ModelError::BadOutcomeArity(values.len()));
        }
        let mut buf = [0; MAX_OUTCOME_ARITY];
        buf[..values.len()].copy_from_slice(values);
        Ok(Outcome {
            len: values.len() as u8,
            values: buf,
        })
    }

    pub fn arity(&self) -> usize {
        self.len as usize
    }

    pub fn values(&self) -> &[i64] {
        &self.values[..self.len as usize]
    }
}

impl<const N: usize> From<[i64; N]> for Outcome {
    /// Panics unless `1 <= N <= 4`.
    fn from(values: [i64; N]) -> Self {
        Outcome::new(&values).expect("outcome literal must have 1..=4 values")
    }
}

impl TryFrom<Vec<i64>> for Outcome {
    type Error = ModelError;

    fn try_from(values: Vec<i64>) -> Result<Self, Self::Error> {
        Outcome::new(&values)
    }
}

impl From<Outcome> for Vec<i64> {
    fn from(o: Outcome) -> Self {
        o.values().to_vec()
    }
}

impl Serialize for Outcome {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.values().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Outcome {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let values = Vec::<i64>::deserialize(deserializer)?;
        Outcome::new(&values).map_err(serde::de::Error::custom)
    }
}

impl Ord for Outcome {
    fn cmp(&self, other: &Self) -> CmpOrdering {
        self.values().cmp(other.values())
    }
}

impl PartialOrd for Outcome {
    fn partial_cmp(&self, other: &Self) -> Option<CmpOrdering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, v) in self.values().iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{v}")?;
        }
        f.write_str(")")
    }
}

impl fmt::Debug for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Outcome category, ordered by severity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum OutcomeType {
    /// Sequentially consistent: reproducible as an interleaving.
    Acceptable,
    /// Weak, but tolerated by the expected language semantics.
    Interesting,
    /// Weak and intolerable; indicates a bug.
    Forbidden,
}

impl fmt::Display for OutcomeType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OutcomeType::Acceptable => "ACCEPTABLE",
            OutcomeType::Interesting => "INTERESTING",
            OutcomeType::Forbidden => "FORBIDDEN",
        })
    }
}

/// Partition of outcomes into acceptable, interesting and forbidden, with a
/// default category for anything not listed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "SpecRepr", into = "SpecRepr")]
pub struct OutcomeSpec {
    arity: usize,
    accepted: BTreeSet<Outcome>,
    interesting: BTreeSet<Outcome>,
    forbidden: BTreeSet<Outcome>,
    default: OutcomeType,
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
struct SpecRepr {
    arity: usize,
    accepted: BTreeSet<Outcome>,
    interesting: BTreeSet<Outcome>,
    forbidden: BTreeSet<Outcome>,
    default: OutcomeType,
}

impl TryFrom<SpecRepr> for OutcomeSpec {
    type Error = ModelError;

    fn try_from(r: SpecRepr) -> Result<Self, Self::Error> {
        let mut b = OutcomeSpec::builder(r.arity).default_type(r.default);
        for o in r.accepted {
            b = b.accept(o);
        }
        for o in r.interesting {
            b = b.interesting(o);
        }
        for o in r.forbidden {
            b = b.forbid(o);
        }
        b.build()
    }
}

impl From<OutcomeSpec> for SpecRepr {
    fn from(s: OutcomeSpec) -> Self {
        SpecRepr {
            arity: s.arity,
            accepted: s.accepted,
            interesting: s.interesting,
            forbidden: s.forbidden,
            default: s.default,
        }
    }
}

impl OutcomeSpec {
    pub fn builder(arity: usize) -> OutcomeSpecBuilder {
        OutcomeSpecBuilder {
            arity,
            listed: Vec::new(),
            default: OutcomeType::Forbidden,
        }
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn accepted(&self) -> &BTreeSet<Outcome> {
        &self.accepted
    }

    pub fn interesting(&self) -> &BTreeSet<Outcome> {
        &self.interesting
    }

    pub fn forbidden(&self) -> &BTreeSet<Outcome> {
        &self.forbidden
    }

    pub fn default_type(&self) -> OutcomeType {
        self.default
    }

    pub fn classify(&self, outcome: &Outcome) -> Result<OutcomeType, ModelError> {
        if outcome.arity() != self.arity {
            return Err(ModelError::ArityMismatch {
                expected: self.arity,
                actual: outcome.arity(),
            });
        }
        Ok(if self.accepted.contains(outcome) {
            OutcomeType::Acceptable
        } else if self.interesting.contains(outcome) {
            OutcomeType::Interesting
        } else if self.forbidden.contains(outcome) {
            OutcomeType::Forbidden
        } else {
            self.default
        })
    }

    /// Maximum severity over every outcome observed at least once.
    /// An empty histogram is `Acceptable`.
    pub fn overall_status(&self, histogram: &Histogram) -> Result<OutcomeType, ModelError> {
        let mut status = OutcomeType::Acceptable;
        for (outcome, count) in histogram.iter() {
            if count > 0 {
                status = status.max(self.classify(&outcome)?);
            }
        }
        Ok(status)
    }
}

pub struct OutcomeSpecBuilder {
    arity: usize,
    listed: Vec<(Outcome, OutcomeType)>,
    default: OutcomeType,
}

impl OutcomeSpecBuilder {
    pub fn accept(mut self, o: impl Into<Outcome>) -> Self {
        self.listed.push((o.into(), OutcomeType::Acceptable));
        self
    }

    pub fn interesting(mut self, o: impl Into<Outcome>) -> Self {
        self.listed.push((o.into(), OutcomeType::Interesting));
        self
    }

    pub fn forbid(mut self, o: impl Into<Outcome>) -> Self {
        self.listed.push((o.into(), OutcomeType::Forbidden));
        self
    }

    pub fn accept_all<I, O>(self, outcomes: I) -> Self
    where
        I: IntoIterator<Item = O>,
        O: Into<Outcome>,
    {
        outcomes.into_iter().fold(self, |b, o| b.accept(o))
    }

    pub fn default_type(mut self, t: OutcomeType) -> Self {
        self.default = t;
        self
    }

    pub fn build(self) -> Result<OutcomeSpec, ModelError> {
        if self.arity == 0 || self.arity > MAX_OUTCOME_ARITY {
            return Err(ModelError::BadOutcomeArity(self.arity));
        }
        let mut seen: HashMap<Outcome, OutcomeType> = HashMap::new();
        let mut spec = OutcomeSpec {
            arity: self.arity,
            accepted: BTreeSet::new(),
            interesting: BTreeSet::new(),
            forbidden: BTreeSet::new(),
            default: self.default,
        };
        for (o, t) in self.listed {
            if o.arity() != self.arity {
                return Err(ModelError::ArityMismatch {
                    expected: self.arity,
                    actual: o.arity(),
                });
            }
            if let Some(&prev) = seen.get(&o) {
                if prev != t {
                    return Err(ModelError::OverlappingSpec {
                        outcome: o,
                        first: prev,
                        second: t,
                    });
                }
                continue;
            }
            seen.insert(o, t);
            match t {
                OutcomeType::Acceptable => spec.accepted.insert(o),
                OutcomeType::Interesting => spec.interesting.insert(o),
                OutcomeType::Forbidden => spec.forbidden.insert(o),
            };
        }
        Ok(spec)
    }
}

/// Index of a shared location within a test state.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Loc(pub usize);

/// Index of a register within a test state.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Reg(pub usize);

/// View of one test state: shared locations followed by registers.
///
/// Registers are written only by the thread owning them and read by the
/// collector after the batch, so they use relaxed accesses.
#[derive(Clone, Copy)]
pub struct TestState<'a> {
    locs: &'a [AtomicI64],
    regs: &'a [AtomicI64],
}

impl<'a> TestState<'a> {
    pub fn new(locs: &'a [AtomicI64], regs: &'a [AtomicI64]) -> Self {
        TestState { locs, regs }
    }

    #[inline]
    pub fn load(&self, loc: Loc, mode: AccessMode) -> i64 {
        self.locs[loc.0].load(mode.load_ordering())
    }

    #[inline]
    pub fn store(&self, loc: Loc, value: i64, mode: AccessMode) {
        self.locs[loc.0].store(value, mode.store_ordering())
    }

    /// Acquire-ordered compare-and-swap, used by lock-based tests.
    #[inline]
    pub fn try_acquire(&self, loc: Loc) -> bool {
        self.locs[loc.0]
            .compare_exchange_weak(0, 1, Ordering::Acquire, Ordering::Relaxed)
            .is_ok()
    }

    #[inline]
    pub fn location(&self, loc: Loc) -> &'a AtomicI64 {
        &self.locs[loc.0]
    }

    #[inline]
    pub fn set(&self, reg: Reg, value: i64) {
        self.regs[reg.0].store(value, Ordering::Relaxed)
    }

    #[inline]
    pub fn get(&self, reg: Reg) -> i64 {
        self.regs[reg.0].load(Ordering::Relaxed)
    }

    pub fn registers(&self) -> impl Iterator<Item = i64> + 'a {
        self.regs.iter().map(|r| r.load(Ordering::Relaxed))
    }
}

/// A single heap-allocated, zero-initialized test state.
pub struct OwnedState {
    slots: Box<[AtomicI64]>,
    locations: usize,
}

impl OwnedState {
    pub fn view(&self) -> TestState<'_> {
        let (locs, regs) = self.slots.split_at(self.locations);
        TestState::new(locs, regs)
    }
}

pub type ThreadBody = Arc<dyn Fn(&TestState<'_>) + Send + Sync>;
pub type OutcomeExtractor = Arc<dyn Fn(&TestState<'_>) -> Outcome + Send + Sync>;

/// A runnable litmus test. Immutable after construction.
#[derive(Clone)]
pub struct LitmusTest {
    name: String,
    description: String,
    locations: Vec<String>,
    registers: Vec<String>,
    threads: Vec<ThreadBody>,
    extractor: Option<OutcomeExtractor>,
    spec: OutcomeSpec,
}

impl fmt::Debug for LitmusTest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LitmusTest")
            .field("name", &self.name)
            .field("arity", &self.threads.len())
            .field("locations", &self.locations)
            .field("registers", &self.registers)
            .finish_non_exhaustive()
    }
}

impl LitmusTest {
    pub fn builder(name: impl Into<String>) -> LitmusTestBuilder {
        LitmusTestBuilder {
            name: name.into(),
            description: String::new(),
            locations: Vec::new(),
            registers: Vec::new(),
            threads: Vec::new(),
            extractor: None,
            spec: None,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn description(&self) -> &str {
        &self.description
    }

    /// Number of threads.
    pub fn arity(&self) -> usize {
        self.threads.len()
    }

    pub fn locations(&self) -> &[String] {
        &self.locations
    }

    pub fn registers(&self) -> &[String] {
        &self.registers
    }

    pub fn threads(&self) -> &[ThreadBody] {
        &self.threads
    }

    pub fn spec(&self) -> &OutcomeSpec {
        &self.spec
    }

    /// True when the outcome is the register tuple in declaration order.
    pub fn has_register_outcome(&self) -> bool {
        self.extractor.is_none()
    }

    /// Machine words occupied by one state, without padding.
    pub fn state_words(&self) -> usize {
        self.locations.len() + self.registers.len()
    }

    pub fn new_state(&self) -> OwnedState {
        OwnedState {
            slots: (0..self.state_words()).map(|_| AtomicI64::new(0)).collect(),
            locations: self.locations.len(),
        }
    }

    pub fn extract(&self, state: &TestState<'_>) -> Outcome {
        match &self.extractor {
            Some(f) => f(state),
            None => {
                let mut buf = [0; MAX_OUTCOME_ARITY];
                let mut n = 0;
                for v in state.registers() {
                    buf[n] = v;
                    n += 1;
                }
                Outcome::new(&buf[..n]).expect("register count validated at build")
            }
        }
    }
}

pub struct LitmusTestBuilder {
    name: String,
    description: String,
    locations: Vec<String>,
    registers: Vec<String>,
    threads: Vec<ThreadBody>,
    extractor: Option<OutcomeExtractor>,
    spec: Option<OutcomeSpec>,
}

impl LitmusTestBuilder {
    pub fn describe(mut self, text: impl Into<String>) -> Self {
        self.description = text.into();
        self
    }

    pub fn locations<I, S>(mut self, names: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.locations = names.into_iter().map(Into::into).collect();
        self
    }

    pub fn registers<I, S>(mut self, names: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.registers = names.into_iter().map(Into::into).collect();
        self
    }

    pub fn thread<F>(mut self, body: F) -> Self
    where
        F: Fn(&TestState<'_>) + Send + Sync + 'static,
    {
        self.threads.push(Arc::new(body));
        self
    }

    /// Custom outcome extraction. Must not mutate the state.
    pub fn outcome<F>(mut self, f: F) -> Self
    where
        F: Fn(&TestState<'_>) -> Outcome + Send + Sync + 'static,
    {
        self.extractor = Some(Arc::new(f));
        self
    }

    pub fn spec(mut self, spec: OutcomeSpec) -> Self {
        self.spec = Some(spec);
        self
    }

    pub fn build(self) -> Result<LitmusTest, ModelError> {
        if !is_valid_name(&self.name) {
            return Err(ModelError::BadName(self.name));
        }
        let malformed = |reason: &str| ModelError::Malformed {
            name: self.name.clone(),
            reason: reason.to_string(),
        };
        if self.threads.len() < 2 {
            return Err(malformed("a litmus test needs at least two threads"));
        }
        let spec = self
            .spec
            .clone()
            .ok_or_else(|| malformed("missing outcome spec"))?;
        if self.extractor.is_none() {
            let n = self.registers.len();
            if n == 0 || n > MAX_OUTCOME_ARITY {
                return Err(ModelError::BadOutcomeArity(n));
            }
            if n != spec.arity() {
                return Err(ModelError::ArityMismatch {
                    expected: spec.arity(),
                    actual: n,
                });
            }
        }
        Ok(LitmusTest {
            name: self.name,
            description: self.description,
            locations: self.locations,
            registers: self.registers,
            threads: self.threads,
            extractor: self.extractor,
            spec,
        })
    }
}

/// Lowercase dotted identifier, e.g. `sb.relaxed`.
pub fn is_valid_name(name: &str) -> bool {
    !name.is_empty()
        && name.split('.').all(|seg| {
            !seg.is_empty()
                && seg.starts_with(|c: char| c.is_ascii_lowercase())
                && seg
                    .chars()
                    .all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_' || c == '-')
        })
}

/// Anything that can be looked up by name in a [`Registry`].
pub trait Named {
    fn name(&self) -> &str;
}

impl Named for LitmusTest {
    fn name(&self) -> &str {
        &self.name
    }
}

impl<T: Named + ?Sized> Named for Arc<T> {
    fn name(&self) -> &str {
        (**self).name()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TestHandle(usize);

/// Name-indexed collection of tests with glob selection.
#[derive(Debug)]
pub struct Registry<T = Arc<LitmusTest>> {
    items: Vec<T>,
    index: HashMap<String, usize>,
}

impl<T> Default for Registry<T> {
    fn default() -> Self {
        Registry {
            items: Vec::new(),
            index: HashMap::new(),
        }
    }
}

impl<T: Named> Registry<T> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn register(&mut self, item: T) -> Result<TestHandle, ModelError> {
        let name = item.name().to_string();
        if self.index.contains_key(&name) {
            return Err(ModelError::Duplicate(name));
        }
        let handle = TestHandle(self.items.len());
        self.index.insert(name, handle.0);
        self.items.push(item);
        Ok(handle)
    }

    pub fn get(&self, handle: TestHandle) -> &T {
        &self.items[handle.0]
    }

    pub fn by_name(&self, name: &str) -> Option<&T> {
        self.index.get(name).map(|&i| &self.items[i])
    }

    /// Tests whose names match `selector` (an exact name or a glob such as
    /// `sb.*`), in registration order.
    pub fn lookup(&self, selector: &str) -> Result<Vec<&T>, ModelError> {
        let pattern = glob::Pattern::new(selector)
            .map_err(|e| ModelError::BadSelector(selector.to_string(), e.to_string()))?;
        Ok(self
            .items
            .iter()
            .filter(|t| pattern.matches(t.name()))
            .collect())
    }

    pub fn iter(&self) -> impl Iterator<Item = &T> {
        self.items.iter()
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.items.iter().map(|t| t.name())
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sb_spec() -> OutcomeSpec {
        OutcomeSpec::builder(2)
            .accept([0, 1])
            .accept([1, 0])
            .accept([1, 1])
            .interesting([0, 0])
            .build()
            .unwrap()
    }

    fn hist(entries: &[([i64; 2], u64)]) -> Histogram {
        let mut h = Histogram::new(2);
        for (o, c) in entries {
            h.add(&Outcome::from(*o), *c).unwrap();
        }
        h
    }

    #[test]
    fn classify_store_buffering() {
        let spec = sb_spec();
        assert_eq!(spec.classify(&[1, 0].into()), Ok(OutcomeType::Acceptable));
        assert_eq!(spec.classify(&[0, 0].into()), Ok(OutcomeType::Interesting));
        assert_eq!(spec.classify(&[7, 7].into()), Ok(OutcomeType::Forbidden));
    }

    #[test]
    fn classify_rejects_wrong_arity() {
        let err = sb_spec().classify(&[1].into()).unwrap_err();
        assert_eq!(
            err,
            ModelError::ArityMismatch {
                expected: 2,
                actual: 1
            }
        );
    }

    #[test]
    fn default_can_be_overridden() {
        let spec = OutcomeSpec::builder(1)
            .accept([0])
            .default_type(OutcomeType::Interesting)
            .build()
            .unwrap();
        assert_eq!(spec.classify(&[5].into()), Ok(OutcomeType::Interesting));
        assert_eq!(sb_spec().default_type(), OutcomeType::Forbidden);
    }

    #[test]
    fn overlapping_spec_rejected() {
        let err = OutcomeSpec::builder(2)
            .accept([0, 0])
            .interesting([0, 0])
            .build()
            .unwrap_err();
        assert!(matches!(err, ModelError::OverlappingSpec { .. }));
    }

    #[test]
    fn overall_status_examples() {
        let spec = sb_spec();
        let table = hist(&[
            ([1, 0], 505_376),
            ([0, 1], 493_675),
            ([0, 0], 942),
            ([1, 1], 7),
        ]);
        assert_eq!(spec.overall_status(&table), Ok(OutcomeType::Interesting));
        assert_eq!(
            spec.overall_status(&hist(&[([0, 1], 10)])),
            Ok(OutcomeType::Acceptable)
        );
        assert_eq!(
            spec.overall_status(&hist(&[([0, 1], 10), ([9, 9], 1)])),
            Ok(OutcomeType::Forbidden)
        );
        assert_eq!(
            spec.overall_status(&Histogram::new(2)),
            Ok(OutcomeType::Acceptable)
        );
    }

    #[test]
    fn zero_counts_do_not_affect_status() {
        let spec = sb_spec();
        assert_eq!(
            spec.overall_status(&hist(&[([0, 1], 3), ([9, 9], 0)])),
            Ok(OutcomeType::Acceptable)
        );
    }

    #[test]
    fn outcome_ordering_is_lexicographic() {
        let mut v: Vec<Outcome> = vec![[1, 0].into(), [0, 1].into(), [0, 0].into(), [-1, 5].into()];
        v.sort();
        assert_eq!(
            v,
            vec![[-1, 5].into(), [0, 0].into(), [0, 1].into(), [1, 0].into()]
        );
        assert_eq!(Outcome::from([1, 0]).to_string(), "(1, 0)");
        assert!(Outcome::new(&[]).is_err());
        assert!(Outcome::new(&[1, 2, 3, 4, 5]).is_err());
    }

    #[test]
    fn access_mode_orderings() {
        assert_eq!(AccessMode::Plain.load_ordering(), Ordering::Relaxed);
        assert_eq!(AccessMode::Plain.store_ordering(), Ordering::Relaxed);
        assert_eq!(AccessMode::Acquire.store_ordering(), Ordering::Release);
        assert_eq!(AccessMode::Release.load_ordering(), Ordering::Acquire);
        assert_eq!(AccessMode::SeqCst.load_ordering(), Ordering::SeqCst);
    }

    fn two_thread_test(name: &str) -> LitmusTest {
        LitmusTest::builder(name)
            .locations(["x"])
            .registers(["r1", "r2"])
            .thread(|_| {})
            .thread(|_| {})
            .spec(OutcomeSpec::builder(2).accept([0, 0]).build().unwrap())
            .build()
            .unwrap()
    }

    #[test]
    fn fresh_state_is_zero() {
        let t = two_thread_test("zero.state");
        let s = t.new_state();
        assert_eq!(t.extract(&s.view()), Outcome::from([0, 0]));
        s.view().store(Loc(0), 3, AccessMode::Relaxed);
        s.view().set(Reg(1), 4);
        assert_eq!(t.extract(&s.view()), Outcome::from([0, 4]));
    }

    #[test]
    fn builder_validation() {
        let spec = OutcomeSpec::builder(2).accept([0, 0]).build().unwrap();
        let one_thread = LitmusTest::builder("a.b")
            .registers(["r1", "r2"])
            .thread(|_| {})
            .spec(spec.clone())
            .build();
        assert!(matches!(one_thread, Err(ModelError::Malformed { .. })));
        let bad_name = LitmusTest::builder("SB.Relaxed")
            .registers(["r1", "r2"])
            .thread(|_| {})
            .thread(|_| {})
            .spec(spec.clone())
            .build();
        assert!(matches!(bad_name, Err(ModelError::BadName(_))));
        let arity = LitmusTest::builder("a.b")
            .registers(["r1"])
            .thread(|_| {})
            .thread(|_| {})
            .spec(spec)
            .build();
        assert!(matches!(arity, Err(ModelError::ArityMismatch { .. })));
    }

    #[test]
    fn registry_register_and_lookup() {
        let mut reg = Registry::new();
        let h = reg
            .register(Arc::new(two_thread_test("sb.relaxed")))
            .unwrap();
        reg.register(Arc::new(two_thread_test("sb.seqcst")))
            .unwrap();
        reg.register(Arc::new(two_thread_test("mp.relaxed")))
            .unwrap();
        assert_eq!(reg.get(h).name(), "sb.relaxed");

        let exact: Vec<_> = reg
            .lookup("sb.relaxed")
            .unwrap()
            .iter()
            .map(|t| t.name())
            .collect();
        assert_eq!(exact, ["sb.relaxed"]);
        let glob: Vec<_> = reg
            .lookup("sb.*")
            .unwrap()
            .iter()
            .map(|t| t.name())
            .collect();
        assert_eq!(glob, ["sb.relaxed", "sb.seqcst"]);
        assert!(reg.lookup("nope").unwrap().is_empty());

        let err = reg
            .register(Arc::new(two_thread_test("sb.relaxed")))
            .unwrap_err();
        assert_eq!(err, ModelError::Duplicate("sb.relaxed".into()));
        assert_eq!(err.to_string(), "test \"sb.relaxed\" is already registered");
    }

    #[test]
    fn spec_serde_roundtrip_and_validation() {
        let spec = sb_spec();
        let json = serde_json::to_string(&spec).unwrap();
        assert_eq!(serde_json::from_str::<OutcomeSpec>(&json).unwrap(), spec);
        let bad = r#"{"arity":2,"accepted":[[0,0]],"interesting":[[0,0]],"forbidden":[],"default":"FORBIDDEN"}"#;
        assert!(serde_json::from_str::<OutcomeSpec>(bad).is_err());
    }
}
