//! Detection: one agent per monitored service.
//!
//! An agent keeps the last snapshot it saw, diffs it against the current
//! descriptor on every poll (or pushed notification), fires the matching
//! transitions of the service's two handling nets and packages the result
//! as a [`ChangeReport`]. It also runs the heartbeat counter used while an
//! orchestration waits for a service to come back.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::change_taxonomy::{diff_snapshots, HandlingChange, ServiceDescriptor, TaxonomyError, Thresholds};
use crate::petri_core::Marking;
use crate::pnh::{build_functional_pnh, build_nonfunctional_pnh, ChangeMatrix, ChangeSymbol, Pnh, PnhError, PnhKind};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("service `{0}` is unreachable")]
pub struct ServiceUnreachable(pub String);

/// Source of current service descriptors.
pub trait ServiceRegistry {
    fn fetch(&self, service_id: &str) -> Result<ServiceDescriptor, ServiceUnreachable>;
}

impl ServiceRegistry for BTreeMap<String, ServiceDescriptor> {
    fn fetch(&self, service_id: &str) -> Result<ServiceDescriptor, ServiceUnreachable> {
        self.get(service_id)
            .cloned()
            .ok_or_else(|| ServiceUnreachable(service_id.to_owned()))
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MonitorError {
    #[error("poll interval must be at least 1 tick")]
    ZeroPollInterval,
    #[error("heartbeat interval must be at least 1 tick")]
    ZeroHeartbeatInterval,
    #[error("heartbeat limit must be at least 1")]
    ZeroMissLimit,
    #[error(transparent)]
    Taxonomy(#[from] TaxonomyError),
    #[error("service `{service}`: {source}")]
    Pnh { service: String, source: PnhError },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonitorConfig {
    #[serde(default = "one")]
    pub poll_interval: u64,
    #[serde(default = "one")]
    pub heartbeat_interval: u64,
    #[serde(default = "three")]
    pub max_misses: u32,
    #[serde(default)]
    pub thresholds: Thresholds,
    #[serde(default)]
    pub mode: DetectionMode,
}

fn one() -> u64 {
    1
}

fn three() -> u32 {
    3
}

impl Default for MonitorConfig {
    fn default() -> Self {
        Self {
            poll_interval: 1,
            heartbeat_interval: 1,
            max_misses: 3,
            thresholds: Thresholds::default(),
            mode: DetectionMode::Poll,
        }
    }
}

impl MonitorConfig {
    pub fn validate(&self) -> Result<(), MonitorError> {
        if self.poll_interval == 0 {
            return Err(MonitorError::ZeroPollInterval);
        }
        if self.heartbeat_interval == 0 {
            return Err(MonitorError::ZeroHeartbeatInterval);
        }
        if self.max_misses == 0 {
            return Err(MonitorError::ZeroMissLimit);
        }
        self.thresholds.validate()?;
        Ok(())
    }
}

/// Polling pulls snapshots on a schedule; notification delivers each
/// mutated descriptor to the agent as soon as it happens.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DetectionMode {
    #[default]
    Poll,
    Notify,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChangeReport {
    pub service_id: String,
    pub tick: u64,
    pub changes: Vec<HandlingChange>,
    /// Distinct symbols fired, in the order their first change appeared.
    pub fired: Vec<ChangeSymbol>,
    pub nonfunctional: Option<ChangeMatrix>,
    pub functional: Option<ChangeMatrix>,
}

impl ChangeReport {
    pub fn matrices(&self) -> impl Iterator<Item = &ChangeMatrix> {
        self.nonfunctional.iter().chain(self.functional.iter())
    }
}

impl fmt::Display for ChangeReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let changes: Vec<String> = self.changes.iter().map(ToString::to_string).collect();
        let fired: Vec<String> = self.fired.iter().map(ToString::to_string).collect();
        write!(
            f,
            "service={} changes=[{}] fired=[{}]",
            self.service_id,
            changes.join(","),
            fired.join(",")
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum HeartbeatStatus {
    Alive,
    Missed(u32),
    Exhausted,
}

impl fmt::Display for HeartbeatStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HeartbeatStatus::Alive => f.write_str("Alive"),
            HeartbeatStatus::Missed(n) => write!(f, "Missed({n})"),
            HeartbeatStatus::Exhausted => f.write_str("Exhausted"),
        }
    }
}

/// Consecutive-miss counter. Reaching `max_misses` yields
/// [`HeartbeatStatus::Exhausted`] once; later misses in the same outage
/// report `Missed(max_misses)` until an answer resets the counter.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HeartbeatState {
    pub interval: u64,
    pub miss_count: u32,
    pub max_misses: u32,
    exhausted: bool,
    armed_at: Option<u64>,
}

impl HeartbeatState {
    pub fn new(interval: u64, max_misses: u32) -> Self {
        Self {
            interval,
            miss_count: 0,
            max_misses,
            exhausted: false,
            armed_at: None,
        }
    }

    pub fn record(&mut self, responded: bool) -> HeartbeatStatus {
        if responded {
            self.miss_count = 0;
            self.exhausted = false;
            return HeartbeatStatus::Alive;
        }
        if self.exhausted {
            return HeartbeatStatus::Missed(self.miss_count);
        }
        self.miss_count += 1;
        if self.miss_count >= self.max_misses {
            self.exhausted = true;
            HeartbeatStatus::Exhausted
        } else {
            HeartbeatStatus::Missed(self.miss_count)
        }
    }

    /// Starts periodic checks; the first one is due `interval` ticks later.
    pub fn arm(&mut self, tick: u64) {
        self.armed_at = Some(tick);
        self.miss_count = 0;
        self.exhausted = false;
    }

    pub fn disarm(&mut self) {
        self.armed_at = None;
    }

    pub fn is_armed(&self) -> bool {
        self.armed_at.is_some()
    }

    pub fn is_due(&self, tick: u64) -> bool {
        self.armed_at
            .is_some_and(|at| tick > at && (tick - at).is_multiple_of(self.interval))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ServiceAgent {
    pub service_id: String,
    pub poll_interval: u64,
    pub last_snapshot: ServiceDescriptor,
    pub nonfunctional: (Pnh, Marking),
    pub functional: (Pnh, Marking),
    pub thresholds: Thresholds,
    pub heartbeat: HeartbeatState,
    /// Operations a heartbeat answer must still offer to count as alive.
    pub required_ops: BTreeSet<String>,
}

impl ServiceAgent {
    pub fn new(initial: ServiceDescriptor, config: &MonitorConfig) -> Result<Self, MonitorError> {
        config.validate()?;
        initial.validate()?;
        let id = initial.service_id.clone();
        Ok(Self {
            nonfunctional: build_nonfunctional_pnh(&id),
            functional: build_functional_pnh(&id),
            service_id: id,
            poll_interval: config.poll_interval,
            last_snapshot: initial,
            thresholds: config.thresholds,
            heartbeat: HeartbeatState::new(config.heartbeat_interval, config.max_misses),
            required_ops: BTreeSet::new(),
        })
    }

    pub fn with_required_ops(mut self, ops: BTreeSet<String>) -> Self {
        self.required_ops = ops;
        self
    }

    pub fn poll_due(&self, tick: u64) -> bool {
        tick.is_multiple_of(self.poll_interval)
    }

    /// Pull-based detection; does nothing off-schedule. An unreachable
    /// service is observed as the last snapshot with availability false.
    pub fn poll(&mut self, registry: &dyn ServiceRegistry, tick: u64) -> Result<Option<ChangeReport>, MonitorError> {
        if !self.poll_due(tick) {
            return Ok(None);
        }
        let current = registry.fetch(&self.service_id).unwrap_or_else(|_| {
            let mut d = self.last_snapshot.clone();
            d.availability = false;
            d
        });
        self.observe(current, tick)
    }

    /// Push-based detection of a descriptor delivered at `tick`.
    pub fn notify(&mut self, current: ServiceDescriptor, tick: u64) -> Result<Option<ChangeReport>, MonitorError> {
        self.observe(current, tick)
    }

    fn observe(&mut self, current: ServiceDescriptor, tick: u64) -> Result<Option<ChangeReport>, MonitorError> {
        let changes = diff_snapshots(&self.last_snapshot, &current, &self.thresholds)?;
        if changes.is_empty() {
            self.last_snapshot = current;
            return Ok(None);
        }
        let (mut nf_marking, mut f_marking) = (self.nonfunctional.1.clone(), self.functional.1.clone());
        let mut fired = Vec::new();
        for change in &changes {
            let symbol = ChangeSymbol::for_change(change);
            if fired.contains(&symbol) {
                continue;
            }
            let (pnh, marking) = match symbol.kind() {
                PnhKind::NonFunctional => (&self.nonfunctional.0, &mut nf_marking),
                PnhKind::Functional => (&self.functional.0, &mut f_marking),
            };
            let (next, s) = pnh
                .apply_handling_change(marking, change)
                .map_err(|source| MonitorError::Pnh {
                    service: self.service_id.clone(),
                    source,
                })?;
            *marking = next;
            fired.push(s);
        }
        let matrix_for = |pnh: &Pnh| -> Result<Option<ChangeMatrix>, MonitorError> {
            let of_kind: Vec<ChangeSymbol> = fired.iter().copied().filter(|s| s.kind() == pnh.kind).collect();
            if of_kind.is_empty() {
                return Ok(None);
            }
            pnh.change_matrix(&of_kind).map(Some).map_err(|source| MonitorError::Pnh {
                service: self.service_id.clone(),
                source,
            })
        };
        let nonfunctional = matrix_for(&self.nonfunctional.0)?;
        let functional = matrix_for(&self.functional.0)?;

        self.nonfunctional.1 = nf_marking;
        self.functional.1 = f_marking;
        self.last_snapshot = current;
        Ok(Some(ChangeReport {
            service_id: self.service_id.clone(),
            tick,
            changes,
            fired,
            nonfunctional,
            functional,
        }))
    }

    /// One alive-check. The service answers if it is reachable, available
    /// and still offers every required operation.
    pub fn heartbeat(&mut self, registry: &dyn ServiceRegistry) -> HeartbeatStatus {
        let responded = registry
            .fetch(&self.service_id)
            .map(|d| d.availability && self.required_ops.is_subset(&d.operations))
            .unwrap_or(false);
        self.heartbeat.record(responded)
    }

    /// Starts a new epoch: both handling nets back to their initial marking.
    pub fn reset_epoch(&mut self) {
        self.nonfunctional.1 = self.nonfunctional.0.initial_marking().clone();
        self.functional.1 = self.functional.0.initial_marking().clone();
    }
}
