//! CPU pinning for worker threads.

use std::collections::BTreeSet;
use std::fmt;

use super::params::AffinityScheme;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PinOutcome {
    /// The scheme asked for no pinning.
    NotRequested,
    Pinned(usize),
    /// The platform has no thread-pinning facility.
    Unsupported,
    Failed(String),
}

impl fmt::Display for PinOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PinOutcome::NotRequested => f.write_str("not requested"),
            PinOutcome::Pinned(cpu) => write!(f, "pinned to cpu {cpu}"),
            PinOutcome::Unsupported => f.write_str("thread pinning unsupported on this platform"),
            PinOutcome::Failed(reason) => write!(f, "pinning failed: {reason}"),
        }
    }
}

/// The CPUs a scheme may choose from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CpuTopology {
    /// CPUs this process may run on, ascending.
    pub allowed: Vec<usize>,
    /// Number of CPUs configured on the host; valid ids are `0..configured`.
    pub configured: usize,
    /// Physical core id for each entry of `allowed`.
    pub core_ids: Vec<usize>,
}

impl CpuTopology {
    /// Host with `n` CPUs, one per physical core, all allowed.
    pub fn uniform(n: usize) -> Self {
        CpuTopology {
            allowed: (0..n).collect(),
            configured: n,
            core_ids: (0..n).collect(),
        }
    }

    pub fn detect() -> Self {
        let configured = configured_cpus();
        let allowed = current_affinity().unwrap_or_else(|| (0..configured).collect());
        let core_ids = allowed.iter().map(|&c| core_id(c).unwrap_or(c)).collect();
        CpuTopology {
            allowed,
            configured: configured.max(1),
            core_ids,
        }
    }

    /// Allowed CPUs ordered so that distinct physical cores come before SMT
    /// siblings of cores already listed.
    fn spread_order(&self) -> Vec<usize> {
        let mut first = Vec::new();
        let mut rest = Vec::new();
        let mut seen = BTreeSet::new();
        for (&cpu, &core) in self.allowed.iter().zip(&self.core_ids) {
            if seen.insert(core) {
                first.push(cpu);
            } else {
                rest.push(cpu);
            }
        }
        first.extend(rest);
        first
    }
}

/// CPU a thread should run on under `scheme`, or `None` when unpinned.
/// `thread_index` counts across all parallel instances.
pub fn resolve_cpu(
    thread_index: usize,
    scheme: &AffinityScheme,
    topo: &CpuTopology,
) -> Result<Option<usize>, String> {
    let pick = |order: &[usize]| {
        if order.is_empty() {
            Err("no CPUs available".to_string())
        } else {
            Ok(Some(order[thread_index % order.len()]))
        }
    };
    match scheme {
        AffinityScheme::None => Ok(None),
        AffinityScheme::Sequential => pick(&topo.allowed),
        AffinityScheme::Spread => pick(&topo.spread_order()),
        AffinityScheme::Explicit(cpus) => {
            let &cpu = cpus
                .get(thread_index)
                .ok_or_else(|| format!("no cpu listed for thread {thread_index}"))?;
            if cpu >= topo.configured {
                return Err(format!(
                    "invalid cpu {cpu}: host has {} cpus",
                    topo.configured
                ));
            }
            Ok(Some(cpu))
        }
    }
}

/// Pins the calling thread according to `scheme`.
pub fn pin_thread(thread_index: usize, scheme: &AffinityScheme) -> PinOutcome {
    pin_thread_with(thread_index, scheme, &CpuTopology::detect())
}

pub fn pin_thread_with(
    thread_index: usize,
    scheme: &AffinityScheme,
    topo: &CpuTopology,
) -> PinOutcome {
    match resolve_cpu(thread_index, scheme, topo) {
        Ok(None) => PinOutcome::NotRequested,
        Ok(Some(cpu)) => set_current_affinity(cpu),
        Err(reason) => PinOutcome::Failed(reason),
    }
}

pub fn configured_cpus() -> usize {
    #[cfg(unix)]
    {
        // SAFETY: sysconf has no memory-safety preconditions.
        let n = unsafe { libc::sysconf(libc::_SC_NPROCESSORS_CONF) };
        if n > 0 {
            return n as usize;
        }
    }
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

#[cfg(target_os = "linux")]
fn core_id(cpu: usize) -> Option<usize> {
    let path = format!("/sys/devices/system/cpu/cpu{cpu}/topology/core_id");
    let core: usize = std::fs::read_to_string(path).ok()?.trim().parse().ok()?;
    let pkg_path = format!("/sys/devices/system/cpu/cpu{cpu}/topology/physical_package_id");
    let pkg: usize = std::fs::read_to_string(pkg_path)
        .ok()
        .and_then(|s| s.trim().parse().ok())
        .unwrap_or(0);
    Some(pkg << 16 | core)
}

#[cfg(not(target_os = "linux"))]
fn core_id(_cpu: usize) -> Option<usize> {
    None
}

/// CPUs the calling thread may run on, when the platform can tell.
#[cfg(target_os = "linux")]
pub fn current_affinity() -> Option<Vec<usize>> {
    // SAFETY: cpu_set_t is plain data; zeroed is a valid empty set and the
    // size passed matches the buffer.
    unsafe {
        let mut set: libc::cpu_set_t = std::mem::zeroed();
        if libc::sched_getaffinity(0, std::mem::size_of::<libc::cpu_set_t>(), &mut set) != 0 {
            return None;
        }
        let max = 8 * std::mem::size_of::<libc::cpu_set_t>();
        Some((0..max).filter(|&c| libc::CPU_ISSET(c, &set)).collect())
    }
}

#[cfg(not(target_os = "linux"))]
pub fn current_affinity() -> Option<Vec<usize>> {
    None
}

#[cfg(target_os = "linux")]
fn set_current_affinity(cpu: usize) -> PinOutcome {
    if cpu >= 8 * std::mem::size_of::<libc::cpu_set_t>() {
        return PinOutcome::Failed(format!("invalid cpu {cpu}"));
    }
    // SAFETY: as in `current_affinity`; `cpu` is within the set's capacity.
    let rc = unsafe {
        let mut set: libc::cpu_set_t = std::mem::zeroed();
        libc::CPU_SET(cpu, &mut set);
        libc::sched_setaffinity(0, std::mem::size_of::<libc::cpu_set_t>(), &set)
    };
    if rc != 0 {
        let err = std::io::Error::last_os_error();
        return PinOutcome::Failed(format!("cpu {cpu}: {err}"));
    }
    PinOutcome::Pinned(cpu)
}

#[cfg(not(target_os = "linux"))]
fn set_current_affinity(_cpu: usize) -> PinOutcome {
    PinOutcome::Unsupported
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scheme_definitions_on_eight_cpus() {
        let topo = CpuTopology::uniform(8);
        assert_eq!(
            resolve_cpu(0, &AffinityScheme::Sequential, &topo),
            Ok(Some(0))
        );
        assert_eq!(
            resolve_cpu(5, &AffinityScheme::Sequential, &topo),
            Ok(Some(5))
        );
        assert_eq!(
            resolve_cpu(9, &AffinityScheme::Sequential, &topo),
            Ok(Some(1))
        );
        assert_eq!(
            resolve_cpu(1, &AffinityScheme::Explicit(vec![3, 5]), &topo),
            Ok(Some(5))
        );
        assert_eq!(resolve_cpu(1, &AffinityScheme::None, &topo), Ok(None));
        let err = resolve_cpu(0, &AffinityScheme::Explicit(vec![64]), &topo).unwrap_err();
        assert!(err.contains("invalid cpu 64"), "{err}");
        assert!(resolve_cpu(2, &AffinityScheme::Explicit(vec![3, 5]), &topo).is_err());
    }

    #[test]
    fn explicit_out_of_range_fails_to_pin() {
        let topo = CpuTopology::uniform(8);
        let out = pin_thread_with(0, &AffinityScheme::Explicit(vec![64]), &topo);
        assert!(matches!(out, PinOutcome::Failed(ref r) if r.contains("invalid cpu")));
    }

    #[test]
    fn spread_prefers_distinct_cores() {
        // 4 cores with 2 SMT siblings each, Linux-style numbering.
        let topo = CpuTopology {
            allowed: (0..8).collect(),
            configured: 8,
            core_ids: vec![0, 1, 2, 3, 0, 1, 2, 3],
        };
        let cpus: Vec<_> = (0..4)
            .map(|i| {
                resolve_cpu(i, &AffinityScheme::Spread, &topo)
                    .unwrap()
                    .unwrap()
            })
            .collect();
        assert_eq!(cpus, [0, 1, 2, 3]);
        assert_eq!(resolve_cpu(4, &AffinityScheme::Spread, &topo), Ok(Some(4)));

        // Siblings numbered adjacently.
        let topo = CpuTopology {
            allowed: (0..8).collect(),
            configured: 8,
            core_ids: vec![0, 0, 1, 1, 2, 2, 3, 3],
        };
        let cpus: Vec<_> = (0..4)
            .map(|i| {
                resolve_cpu(i, &AffinityScheme::Spread, &topo)
                    .unwrap()
                    .unwrap()
            })
            .collect();
        assert_eq!(cpus, [0, 2, 4, 6]);
    }

    #[cfg(target_os = "linux")]
    #[test]
    fn pinning_sets_os_mask() {
        let topo = CpuTopology::detect();
        let target = topo.allowed[0];
        let out = std::thread::spawn(move || {
            let out = pin_thread_with(
                0,
                &AffinityScheme::Explicit(vec![target]),
                &CpuTopology::detect(),
            );
            (out, current_affinity())
        })
        .join()
        .unwrap();
        assert_eq!(out.0, PinOutcome::Pinned(target));
        assert_eq!(out.1, Some(vec![target]));
    }
}
