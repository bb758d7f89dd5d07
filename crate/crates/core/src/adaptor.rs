//! Reaction: θ handling changes to Ω adaptive changes, and the control
//! loop that applies them to a composition.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::change_taxonomy::{
    AdaptiveChange, AttrValue, FunctionalElement, HandlingChange, NonFunctionalAttr, OrchestrationState,
    ServiceDescriptor, Thresholds,
};
use crate::monitor::{HeartbeatStatus, ServiceRegistry};
use crate::pnac::{Pnac, PnacError};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Criticality {
    Critical,
    #[default]
    Optional,
}

/// What to do with a newly announced service.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NewServiceMode {
    #[default]
    Backup,
    LoadBalance,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AdaptError {
    #[error("cannot react: orchestration is {0}")]
    InvalidState(OrchestrationState),
    #[error("heartbeat limit must be at least 1")]
    ZeroHeartbeatLimit,
    #[error("backup `{backup}` listed twice for `{service}`")]
    DuplicateBackup { service: String, backup: String },
    #[error("service `{0}` lists itself as a backup")]
    SelfBackup(String),
    #[error(transparent)]
    Pnac(#[from] PnacError),
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReactionPolicy {
    pub criticality: BTreeMap<String, Criticality>,
    /// Ordered candidates per member; earlier entries are preferred.
    pub backups: BTreeMap<String, Vec<ServiceDescriptor>>,
    pub heartbeat_limit: u32,
    pub floors: Thresholds,
    pub new_service_mode: NewServiceMode,
    /// Load-balancing pools per member, the member itself first.
    pub pools: BTreeMap<String, Vec<String>>,
}

impl Default for ReactionPolicy {
    fn default() -> Self {
        Self {
            criticality: BTreeMap::new(),
            backups: BTreeMap::new(),
            heartbeat_limit: 3,
            floors: Thresholds::default(),
            new_service_mode: NewServiceMode::Backup,
            pools: BTreeMap::new(),
        }
    }
}

impl ReactionPolicy {
    pub fn validate(&self) -> Result<(), AdaptError> {
        if self.heartbeat_limit == 0 {
            return Err(AdaptError::ZeroHeartbeatLimit);
        }
        for (service, list) in &self.backups {
            let mut seen = BTreeSet::new();
            for b in list {
                if b.service_id == *service {
                    return Err(AdaptError::SelfBackup(service.clone()));
                }
                if !seen.insert(b.service_id.as_str()) {
                    return Err(AdaptError::DuplicateBackup {
                        service: service.clone(),
                        backup: b.service_id.clone(),
                    });
                }
            }
        }
        Ok(())
    }

    pub fn criticality_of(&self, service_id: &str) -> Criticality {
        self.criticality.get(service_id).copied().unwrap_or_default()
    }

    pub fn is_critical(&self, service_id: &str) -> bool {
        self.criticality_of(service_id) == Criticality::Critical
    }

    /// After `from` was replaced by `to`, `to` takes over its criticality,
    /// its remaining backups and its load-balancing pool.
    pub fn transfer_role(&mut self, from: &str, to: &str) {
        if let Some(c) = self.criticality.remove(from) {
            self.criticality.insert(to.to_owned(), c);
        }
        if let Some(mut list) = self.backups.remove(from) {
            list.retain(|d| d.service_id != to);
            self.backups.insert(to.to_owned(), list);
        }
        if let Some(mut pool) = self.pools.remove(from) {
            pool.retain(|s| s != to && s != from);
            pool.insert(0, to.to_owned());
            self.pools.insert(to.to_owned(), pool);
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum NoOpReason {
    /// Optional service lost with no replacement; its step is skipped.
    SkipStep { service: String },
    NoAdaptationNeeded,
    NoAlternative { service: String },
    ServiceNotNeeded { service: String },
    NoEquivalentMember { service: String },
}

impl fmt::Display for NoOpReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NoOpReason::SkipStep { service } => write!(f, "skip-step:{service}"),
            NoOpReason::NoAdaptationNeeded => f.write_str("no-adaptation-needed"),
            NoOpReason::NoAlternative { service } => write!(f, "no-alternative:{service}"),
            NoOpReason::ServiceNotNeeded { service } => write!(f, "not-needed:{service}"),
            NoOpReason::NoEquivalentMember { service } => write!(f, "no-equivalent-member:{service}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum TerminateReason {
    HeartbeatExhausted { service: String, misses: u32 },
}

impl fmt::Display for TerminateReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TerminateReason::HeartbeatExhausted { service, misses } => {
                write!(f, "heartbeat-exhausted:{service}:{misses}")
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Reaction {
    Pause,
    Resume,
    Substitute { from: String, to: String },
    Terminate { reason: TerminateReason },
    RegisterBackup { descriptor: ServiceDescriptor, backs: Vec<String> },
    LoadBalance { members: Vec<String> },
    NoOp { reason: NoOpReason },
}

impl Reaction {
    /// The composition-level changes this reaction stands for.
    pub fn adaptive_changes(&self, registry: &dyn ServiceRegistry) -> Vec<AdaptiveChange> {
        match self {
            Reaction::Pause => vec![AdaptiveChange::ChangeState {
                state: OrchestrationState::Paused,
            }],
            Reaction::Resume => vec![AdaptiveChange::ChangeState {
                state: OrchestrationState::Running,
            }],
            Reaction::Terminate { .. } => vec![AdaptiveChange::ChangeState {
                state: OrchestrationState::Terminated,
            }],
            Reaction::Substitute { from, to } => registry
                .fetch(to)
                .map(|d| {
                    vec![AdaptiveChange::ChangeServiceInstance {
                        from: from.clone(),
                        to: d,
                    }]
                })
                .unwrap_or_default(),
            Reaction::RegisterBackup { descriptor, .. } => vec![AdaptiveChange::AddInstance {
                instance_id: descriptor.service_id.clone(),
            }],
            Reaction::LoadBalance { members } => members
                .last()
                .map(|id| {
                    vec![AdaptiveChange::AddInstance {
                        instance_id: id.clone(),
                    }]
                })
                .unwrap_or_default(),
            Reaction::NoOp { .. } => Vec::new(),
        }
    }
}

impl fmt::Display for Reaction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Reaction::Pause => f.write_str("Pause"),
            Reaction::Resume => f.write_str("Resume"),
            Reaction::Substitute { from, to } => write!(f, "Substitute({from}->{to})"),
            Reaction::Terminate { reason } => write!(f, "Terminate({reason})"),
            Reaction::RegisterBackup { descriptor, backs } => {
                write!(f, "RegisterBackup({} for {})", descriptor.service_id, backs.join(","))
            }
            Reaction::LoadBalance { members } => write!(f, "LoadBalance({})", members.join(",")),
            Reaction::NoOp { reason } => write!(f, "NoOp({reason})"),
        }
    }
}

/// What the adaptor may look at besides the policy.
#[derive(Clone, Copy)]
pub struct AdaptContext<'a> {
    pub registry: &'a dyn ServiceRegistry,
    /// Members whose work is already done; changes on them need no reaction.
    pub finished: &'a BTreeSet<String>,
}

/// First backup of `failed`, in policy order, that is not already a member,
/// is available, offers every invoked operation and sits within the floors.
/// Candidates are judged on their current registry descriptor.
pub fn select_alternative(
    registry: &dyn ServiceRegistry,
    failed: &str,
    invoked: &BTreeSet<String>,
    members: &[String],
    policy: &ReactionPolicy,
) -> Option<ServiceDescriptor> {
    policy
        .backups
        .get(failed)?
        .iter()
        .filter(|b| !members.contains(&b.service_id))
        .filter_map(|b| registry.fetch(&b.service_id).ok())
        .find(|d| d.availability && invoked.is_subset(&d.operations) && policy.floors.admits(d))
}

struct Plan {
    changes: Vec<AdaptiveChange>,
    reason: Option<NoOpReason>,
}

fn plan(change: &HandlingChange, service_id: &str, pnac: &Pnac, policy: &ReactionPolicy, ctx: AdaptContext<'_>) -> Plan {
    let none = |reason| Plan {
        changes: Vec::new(),
        reason: Some(reason),
    };
    let service = service_id.to_owned();
    if !pnac.is_member(service_id) || ctx.finished.contains(service_id) {
        return none(NoOpReason::ServiceNotNeeded { service });
    }
    let invoked = pnac.invoked_ops(service_id);
    let alternative = || select_alternative(ctx.registry, service_id, &invoked, &pnac.members(), policy);
    let substitute = |to: ServiceDescriptor| AdaptiveChange::ChangeServiceInstance {
        from: service.clone(),
        to,
    };
    let pause = AdaptiveChange::ChangeState {
        state: OrchestrationState::Paused,
    };
    let critical = policy.is_critical(service_id);

    // Losing the service outright, or losing an operation the composition
    // calls on it, both block its step.
    let blocking = change.is_loss_of(NonFunctionalAttr::Availability)
        || matches!(change, HandlingChange::Remove { elem: FunctionalElement::Operation, name } if invoked.contains(name));
    if blocking {
        return match (alternative(), critical) {
            (Some(to), true) => Plan {
                changes: vec![pause, substitute(to)],
                reason: None,
            },
            (Some(to), false) => Plan {
                changes: vec![substitute(to)],
                reason: None,
            },
            (None, true) => Plan {
                changes: vec![pause],
                reason: None,
            },
            (None, false) => none(NoOpReason::SkipStep { service }),
        };
    }

    // Degraded but still usable: swap if something better exists.
    let degraded = match change {
        HandlingChange::NonFunctional {
            attr: NonFunctionalAttr::Reliability,
            post: AttrValue::Bool(false),
            ..
        } => true,
        HandlingChange::NonFunctional {
            attr,
            post: AttrValue::Real(v),
            ..
        } => policy.floors.bounds(*attr).is_some_and(|b| !b.contains(*v)),
        _ => false,
    };
    if degraded {
        return match alternative() {
            Some(to) => Plan {
                changes: vec![substitute(to)],
                reason: None,
            },
            None => none(NoOpReason::NoAlternative { service }),
        };
    }
    none(NoOpReason::NoAdaptationNeeded)
}

/// Maps one handling change on `service_id` to the adaptive changes it
/// calls for, in application order.
pub fn map_change(
    change: &HandlingChange,
    service_id: &str,
    pnac: &Pnac,
    policy: &ReactionPolicy,
    ctx: AdaptContext<'_>,
) -> Vec<AdaptiveChange> {
    plan(change, service_id, pnac, policy, ctx).changes
}

/// Orchestration control state kept beside the composition net.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Control {
    pub state: OrchestrationState,
    /// Services under heartbeat watch while the orchestration waits.
    pub watching: BTreeSet<String>,
}

impl Default for Control {
    fn default() -> Self {
        Self {
            state: OrchestrationState::Running,
            watching: BTreeSet::new(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Trigger {
    Handling { service_id: String, change: HandlingChange },
    NewService(ServiceDescriptor),
    Heartbeat { service_id: String, status: HeartbeatStatus },
}

impl Control {
    fn pause(&mut self, out: &mut Vec<Reaction>) {
        if self.state == OrchestrationState::Running {
            self.state = OrchestrationState::Paused;
            out.push(Reaction::Pause);
        }
    }

    fn resume_if_clear(&mut self, out: &mut Vec<Reaction>) {
        if self.state == OrchestrationState::Paused && self.watching.is_empty() {
            self.state = OrchestrationState::Running;
            out.push(Reaction::Resume);
        }
    }
}

fn substitute(
    control: &mut Control,
    pnac: &Pnac,
    from: &str,
    to: &ServiceDescriptor,
    policy: &mut ReactionPolicy,
    out: &mut Vec<Reaction>,
) -> Result<Pnac, AdaptError> {
    let next = pnac.substitute_service(from, to)?;
    policy.transfer_role(from, &to.service_id);
    control.watching.remove(from);
    out.push(Reaction::Substitute {
        from: from.to_owned(),
        to: to.service_id.clone(),
    });
    control.resume_if_clear(out);
    Ok(next)
}

/// Runs one reaction. Structural changes become PNAC rewrites; pausing and
/// resuming only move `control.state`.
pub fn react(
    control: &mut Control,
    pnac: &Pnac,
    trigger: &Trigger,
    policy: &mut ReactionPolicy,
    ctx: AdaptContext<'_>,
) -> Result<(Pnac, Vec<Reaction>), AdaptError> {
    if matches!(control.state, OrchestrationState::Terminated | OrchestrationState::Completed) {
        return Err(AdaptError::InvalidState(control.state));
    }
    let mut out = Vec::new();
    let mut pnac = pnac.clone();
    match trigger {
        Trigger::Handling { service_id, change } => {
            let Plan { changes, reason } = plan(change, service_id, &pnac, policy, ctx);
            let substitutes = changes
                .iter()
                .any(|c| matches!(c, AdaptiveChange::ChangeServiceInstance { .. }));
            for c in &changes {
                match c {
                    AdaptiveChange::ChangeState {
                        state: OrchestrationState::Paused,
                    } => {
                        control.pause(&mut out);
                        if !substitutes {
                            control.watching.insert(service_id.clone());
                        }
                    }
                    AdaptiveChange::ChangeServiceInstance { from, to } => {
                        pnac = substitute(control, &pnac, from, to, policy, &mut out)?;
                    }
                    other => pnac = pnac.apply_adaptive(other)?,
                }
            }
            if let Some(reason) = reason {
                out.push(Reaction::NoOp { reason });
            }
        }
        Trigger::Heartbeat { service_id, status } => {
            if !control.watching.contains(service_id) {
                return Ok((pnac, out));
            }
            match status {
                HeartbeatStatus::Alive => {
                    control.watching.remove(service_id);
                    control.resume_if_clear(&mut out);
                }
                HeartbeatStatus::Missed(_) => {}
                HeartbeatStatus::Exhausted => {
                    let invoked = pnac.invoked_ops(service_id);
                    match select_alternative(ctx.registry, service_id, &invoked, &pnac.members(), policy) {
                        Some(to) => pnac = substitute(control, &pnac, service_id, &to, policy, &mut out)?,
                        None => {
                            control.state = OrchestrationState::Terminated;
                            control.watching.clear();
                            out.push(Reaction::Terminate {
                                reason: TerminateReason::HeartbeatExhausted {
                                    service: service_id.clone(),
                                    misses: policy.heartbeat_limit,
                                },
                            });
                        }
                    }
                }
            }
        }
        Trigger::NewService(descriptor) => {
            let sid = &descriptor.service_id;
            let usable = descriptor.availability && policy.floors.admits(descriptor);
            let backs: Vec<String> = pnac
                .members()
                .into_iter()
                .filter(|m| m != sid && usable && pnac.invoked_ops(m).is_subset(&descriptor.operations))
                .collect();
            if backs.is_empty() || pnac.instances().contains(sid) {
                out.push(Reaction::NoOp {
                    reason: NoOpReason::NoEquivalentMember { service: sid.clone() },
                });
                return Ok((pnac, out));
            }
            pnac = pnac.apply_adaptive(&AdaptiveChange::AddInstance {
                instance_id: sid.clone(),
            })?;
            match policy.new_service_mode {
                NewServiceMode::Backup => {
                    for m in &backs {
                        let list = policy.backups.entry(m.clone()).or_default();
                        if !list.iter().any(|d| d.service_id == *sid) {
                            list.push(descriptor.clone());
                        }
                    }
                    out.push(Reaction::RegisterBackup {
                        descriptor: descriptor.clone(),
                        backs,
                    });
                    // A member already waiting on a heartbeat can switch now.
                    for waiting in control.watching.clone() {
                        let invoked = pnac.invoked_ops(&waiting);
                        if let Some(to) =
                            select_alternative(ctx.registry, &waiting, &invoked, &pnac.members(), policy)
                        {
                            pnac = substitute(control, &pnac, &waiting, &to, policy, &mut out)?;
                        }
                    }
                }
                NewServiceMode::LoadBalance => {
                    for m in backs {
                        let pool = policy.pools.entry(m.clone()).or_insert_with(|| vec![m.clone()]);
                        if !pool.contains(sid) {
                            pool.push(sid.clone());
                        }
                        out.push(Reaction::LoadBalance { members: pool.clone() });
                    }
                }
            }
        }
    }
    Ok((pnac, out))
}
