//! Reconfigurable composition nets.
//!
//! A [`Pnac`] is a Petri net for the running composition together with the
//! log of rewrite rules applied to it. A [`RewriteRule`] deletes a set of
//! places (its domain) with all their arcs, creates new places and
//! transitions, and moves every token of a deleted place to the place named
//! in its token-target map, so the total token count never changes.
//!
//! Composition nets built by [`Pnac::compose`] use a fixed naming scheme:
//!
//! | id           | meaning                                          |
//! |--------------|--------------------------------------------------|
//! | `m:<svc>`    | member input place (work waiting at the member)  |
//! | `x:<svc>`    | member's invocation transition                   |
//! | `s:<State>`  | the single orchestration-state place             |
//! | `p:<name>`   | parameter place                                  |
//! | `i:<id>`     | registered service-instance place                |
//! | `ctl`        | control place collecting orphaned tokens         |
//! | `end`        | sink for work that left the last member          |

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::change_taxonomy::{AdaptiveChange, OrchestrationState, ServiceDescriptor, Wiring};
use crate::petri_core::{Arc, Marking, PetriError, PetriNet, Place, PlaceId, Transition, TransitionId};

pub const CONTROL_PLACE: &str = "ctl";
pub const END_PLACE: &str = "end";

pub fn member_place(service_id: &str) -> PlaceId {
    PlaceId::new(format!("m:{service_id}"))
}

pub fn invoke_transition(service_id: &str) -> TransitionId {
    TransitionId::new(format!("x:{service_id}"))
}

pub fn state_place(state: OrchestrationState) -> PlaceId {
    PlaceId::new(format!("s:{state}"))
}

pub fn parameter_place(name: &str) -> PlaceId {
    PlaceId::new(format!("p:{name}"))
}

pub fn instance_place(id: &str) -> PlaceId {
    PlaceId::new(format!("i:{id}"))
}

/// `DTE_k`: the k-th structural configuration.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ConfigurationId(pub usize);

impl fmt::Display for ConfigurationId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "DTE_{}", self.0)
    }
}

impl std::str::FromStr for ConfigurationId {
    type Err = String;

    /// Accepts `DTE_3` or `3`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let digits = s.strip_prefix("DTE_").unwrap_or(s);
        digits
            .parse()
            .map(ConfigurationId)
            .map_err(|_| format!("bad configuration id `{s}`"))
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RewriteRule {
    pub rule_id: String,
    /// Places to delete.
    pub domain: BTreeSet<PlaceId>,
    /// Places to create.
    pub codomain: Vec<Place>,
    /// Where the tokens of each deleted place go. Targets are codomain
    /// places or places that survive the rewrite.
    pub token_target: BTreeMap<PlaceId, PlaceId>,
    pub transitions_to_remove: BTreeSet<TransitionId>,
    pub transitions_to_add: Vec<Transition>,
    /// New arcs; each may touch old or new nodes.
    pub arcs_to_add: Vec<Arc>,
}

impl RewriteRule {
    pub fn identity(rule_id: impl Into<String>) -> Self {
        Self {
            rule_id: rule_id.into(),
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PnacError {
    #[error("rule `{rule}`: domain place `{place}` is not in the net")]
    DomainNotPresent { rule: String, place: PlaceId },
    #[error("rule `{rule}`: place `{place}` is in both domain and codomain")]
    DomainCodomainOverlap { rule: String, place: PlaceId },
    #[error("rule `{rule}`: deleted place `{place}` has no token target")]
    MissingTokenTarget { rule: String, place: PlaceId },
    #[error("rule `{rule}`: token target of `{place}` is invalid")]
    BadTokenTarget { rule: String, place: PlaceId },
    #[error("rule `{rule}`: transition `{transition}` would be left without arcs")]
    DanglingTransition { rule: String, transition: TransitionId },
    #[error("rule `{rule}`: transition `{transition}` to remove is not in the net")]
    TransitionNotPresent { rule: String, transition: TransitionId },
    #[error("`{0}` is not a member of the composition")]
    UnknownMember(String),
    #[error("`{0}` is already a member of the composition")]
    DuplicateMember(String),
    #[error("wiring references unknown node `{0}`")]
    BadWiring(String),
    #[error("`{candidate}` is not equivalent to `{member}`: {why}")]
    NotEquivalent {
        member: String,
        candidate: String,
        why: String,
    },
    #[error("parameter `{0}` is not defined")]
    UnknownParameter(String),
    #[error("parameter `{0}` is already defined")]
    DuplicateParameter(String),
    #[error("instance `{0}` is not registered")]
    UnknownInstance(String),
    #[error("instance `{0}` is already registered")]
    DuplicateInstance(String),
    #[error("orchestration is already {0}")]
    AlreadyInState(OrchestrationState),
    #[error("no configuration {0} in this history")]
    UnknownConfiguration(ConfigurationId),
    #[error(transparent)]
    Net(#[from] PetriError),
}

/// Rewrites `net`/`marking` with `rule`.
pub fn rewrite(net: &PetriNet, marking: &Marking, rule: &RewriteRule) -> Result<(PetriNet, Marking), PnacError> {
    let rid = || rule.rule_id.clone();
    for p in &rule.codomain {
        if rule.domain.contains(&p.id) {
            return Err(PnacError::DomainCodomainOverlap {
                rule: rid(),
                place: p.id.clone(),
            });
        }
    }
    if let Some(p) = rule.domain.iter().find(|p| !net.has_place(p)) {
        return Err(PnacError::DomainNotPresent {
            rule: rid(),
            place: p.clone(),
        });
    }
    if let Some(t) = rule.transitions_to_remove.iter().find(|t| !net.has_transition(t)) {
        return Err(PnacError::TransitionNotPresent {
            rule: rid(),
            transition: t.clone(),
        });
    }

    let codomain_ids: BTreeSet<&PlaceId> = rule.codomain.iter().map(|p| &p.id).collect();
    for p in &rule.domain {
        let target = rule.token_target.get(p).ok_or_else(|| PnacError::MissingTokenTarget {
            rule: rid(),
            place: p.clone(),
        })?;
        let survives = net.has_place(target) && !rule.domain.contains(target);
        if !(survives || codomain_ids.contains(target)) {
            return Err(PnacError::BadTokenTarget {
                rule: rid(),
                place: p.clone(),
            });
        }
    }
    if let Some(p) = rule.token_target.keys().find(|p| !rule.domain.contains(*p)) {
        return Err(PnacError::BadTokenTarget {
            rule: rid(),
            place: p.clone(),
        });
    }

    let places: Vec<Place> = net
        .places()
        .filter(|p| !rule.domain.contains(&p.id))
        .chain(rule.codomain.iter().cloned())
        .collect();
    let transitions: Vec<Transition> = net
        .transitions()
        .filter(|t| !rule.transitions_to_remove.contains(&t.id))
        .chain(rule.transitions_to_add.iter().cloned())
        .collect();
    let arcs: Vec<Arc> = net
        .arcs()
        .into_iter()
        .filter(|a| !rule.domain.contains(a.place()) && !rule.transitions_to_remove.contains(a.transition()))
        .chain(rule.arcs_to_add.iter().cloned())
        .collect();

    let mut degree: BTreeMap<&TransitionId, usize> = BTreeMap::new();
    for a in &arcs {
        *degree.entry(a.transition()).or_default() += 1;
    }
    for t in &transitions {
        let had_arcs = net.has_transition(&t.id) && net.degree(&t.id) > 0;
        let is_new = rule.transitions_to_add.iter().any(|n| n.id == t.id);
        if (had_arcs || is_new) && degree.get(&t.id).copied().unwrap_or(0) == 0 {
            return Err(PnacError::DanglingTransition {
                rule: rid(),
                transition: t.id.clone(),
            });
        }
    }

    let next_net = PetriNet::build(places, transitions, arcs)?;
    let mut next_marking = marking.clone();
    for p in &rule.domain {
        let n = next_marking.get(p);
        next_marking.set(p.clone(), 0);
        next_marking.add(&rule.token_target[p], n);
    }
    next_net.check_marking(&next_marking)?;
    Ok((next_net, next_marking))
}

/// One member of a composition to build with [`Pnac::compose`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MemberSpec {
    pub service_id: String,
    /// Operations the orchestration invokes on this member.
    pub invoked_ops: BTreeSet<String>,
    /// Members whose completion this member waits for.
    pub depends_on: Vec<String>,
}

impl MemberSpec {
    pub fn new(service_id: impl Into<String>, invoked: &[&str], depends_on: &[&str]) -> Self {
        Self {
            service_id: service_id.into(),
            invoked_ops: invoked.iter().map(|s| s.to_string()).collect(),
            depends_on: depends_on.iter().map(|s| s.to_string()).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AppliedRule {
    pub rule: RewriteRule,
    pub config: ConfigurationId,
    /// The adaptive change the rule realizes, when it came from one.
    pub change: Option<AdaptiveChange>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Pnac {
    net: PetriNet,
    marking: Marking,
    initial: (PetriNet, Marking),
    log: Vec<AppliedRule>,
    invoked: BTreeMap<String, BTreeSet<String>>,
}

impl Pnac {
    /// Wraps an arbitrary net as configuration `DTE_0`.
    pub fn new(net: PetriNet, marking: Marking) -> Result<Self, PnacError> {
        net.check_marking(&marking)?;
        Ok(Self {
            initial: (net.clone(), marking.clone()),
            net,
            marking,
            log: Vec::new(),
            invoked: BTreeMap::new(),
        })
    }

    /// Builds the composition net for `members`: `x:S` consumes one token
    /// per dependency from `m:S` and sends one token to each dependent
    /// member, or to `end` if nothing depends on `S`. Members without
    /// dependencies start with one token.
    pub fn compose(members: &[MemberSpec]) -> Result<Self, PnacError> {
        let ids: BTreeSet<&str> = members.iter().map(|m| m.service_id.as_str()).collect();
        if ids.len() != members.len() {
            let dup = members
                .iter()
                .enumerate()
                .find(|(i, m)| members[..*i].iter().any(|o| o.service_id == m.service_id))
                .map(|(_, m)| m.service_id.clone())
                .unwrap_or_default();
            return Err(PnacError::DuplicateMember(dup));
        }
        for m in members {
            if let Some(d) = m.depends_on.iter().find(|d| !ids.contains(d.as_str())) {
                return Err(PnacError::UnknownMember(d.clone()));
            }
        }

        let mut places = vec![
            Place::new(state_place(OrchestrationState::Running), "Running"),
            Place::new(CONTROL_PLACE, "control"),
        ];
        places.extend(members.iter().map(|m| Place::new(member_place(&m.service_id), m.service_id.clone())));
        places.push(Place::new(END_PLACE, "end"));

        let transitions = members
            .iter()
            .map(|m| Transition::new(invoke_transition(&m.service_id), format!("invoke {}", m.service_id)));

        let mut arcs = Vec::new();
        for m in members {
            let x = invoke_transition(&m.service_id);
            arcs.push(Arc::input(member_place(&m.service_id), x.clone(), m.depends_on.len().max(1) as u32));
            let dependents: Vec<&MemberSpec> = members
                .iter()
                .filter(|o| o.depends_on.contains(&m.service_id))
                .collect();
            if dependents.is_empty() {
                arcs.push(Arc::output(x.clone(), END_PLACE, 1));
            }
            for d in dependents {
                arcs.push(Arc::output(x.clone(), member_place(&d.service_id), 1));
            }
        }
        let net = PetriNet::build(places, transitions, arcs)?;

        let mut marking = Marking::from_pairs([(state_place(OrchestrationState::Running), 1)]);
        for m in members.iter().filter(|m| m.depends_on.is_empty()) {
            marking.add(&member_place(&m.service_id), 1);
        }
        let mut pnac = Self::new(net, marking)?;
        pnac.invoked = members
            .iter()
            .map(|m| (m.service_id.clone(), m.invoked_ops.clone()))
            .collect();
        Ok(pnac)
    }

    pub fn net(&self) -> &PetriNet {
        &self.net
    }

    pub fn marking(&self) -> &Marking {
        &self.marking
    }

    pub fn initial(&self) -> &(PetriNet, Marking) {
        &self.initial
    }

    pub fn config(&self) -> ConfigurationId {
        ConfigurationId(self.log.len())
    }

    /// Ids of the applied rules, oldest first.
    pub fn history(&self) -> Vec<&str> {
        self.log.iter().map(|a| a.rule.rule_id.as_str()).collect()
    }

    pub fn rules(&self) -> impl Iterator<Item = &RewriteRule> {
        self.log.iter().map(|a| &a.rule)
    }

    pub fn log(&self) -> &[AppliedRule] {
        &self.log
    }

    /// Member service ids in net order.
    pub fn members(&self) -> Vec<String> {
        self.ids_with_prefix("m:")
    }

    pub fn is_member(&self, service_id: &str) -> bool {
        self.net.has_place(&member_place(service_id))
    }

    pub fn parameters(&self) -> Vec<String> {
        self.ids_with_prefix("p:")
    }

    pub fn instances(&self) -> Vec<String> {
        self.ids_with_prefix("i:")
    }

    fn ids_with_prefix(&self, prefix: &str) -> Vec<String> {
        self.net
            .place_ids()
            .filter_map(|p| p.as_str().strip_prefix(prefix).map(str::to_owned))
            .collect()
    }

    /// Current value of the orchestration-state place.
    pub fn state(&self) -> Option<OrchestrationState> {
        [
            OrchestrationState::Running,
            OrchestrationState::Paused,
            OrchestrationState::Terminated,
            OrchestrationState::Completed,
        ]
        .into_iter()
        .find(|s| self.net.has_place(&state_place(*s)))
    }

    /// Operations the orchestration invokes on a member.
    pub fn invoked_ops(&self, service_id: &str) -> BTreeSet<String> {
        self.invoked.get(service_id).cloned().unwrap_or_default()
    }

    /// Fires a transition of the composition net. This moves work tokens; it
    /// is not a reconfiguration.
    pub fn fire(&self, t: &TransitionId) -> Result<Pnac, PnacError> {
        let marking = self.net.fire(&self.marking, t)?;
        Ok(Self {
            marking,
            ..self.clone()
        })
    }

    pub fn apply_rule(&self, rule: RewriteRule) -> Result<Pnac, PnacError> {
        self.apply_logged(rule, None)
    }

    fn apply_logged(&self, rule: RewriteRule, change: Option<AdaptiveChange>) -> Result<Pnac, PnacError> {
        let (net, marking) = rewrite(&self.net, &self.marking, &rule)?;
        let mut log = self.log.clone();
        log.push(AppliedRule {
            rule,
            config: ConfigurationId(self.log.len() + 1),
            change,
        });
        let invoked = self
            .invoked
            .iter()
            .filter(|(s, _)| net.has_place(&member_place(s)))
            .map(|(s, ops)| (s.clone(), ops.clone()))
            .collect();
        Ok(Self {
            net,
            marking,
            initial: self.initial.clone(),
            log,
            invoked,
        })
    }

    /// Net and marking of configuration `k`, rebuilt by replaying the first
    /// `k` rules on the initial configuration. Token moves from [`Pnac::fire`]
    /// are not part of the history, so only the net is guaranteed to match a
    /// configuration seen during a run that also fired transitions.
    pub fn configuration(&self, k: ConfigurationId) -> Result<(PetriNet, Marking), PnacError> {
        if k.0 > self.log.len() {
            return Err(PnacError::UnknownConfiguration(k));
        }
        let (mut net, mut marking) = self.initial.clone();
        for applied in &self.log[..k.0] {
            (net, marking) = rewrite(&net, &marking, &applied.rule)?;
        }
        Ok((net, marking))
    }

    /// Wiring that reproduces a member's current connections.
    pub fn wiring_of(&self, service_id: &str) -> Result<Wiring, PnacError> {
        if !self.is_member(service_id) {
            return Err(PnacError::UnknownMember(service_id.to_owned()));
        }
        let mp = member_place(service_id);
        let feeds = self
            .net
            .transition_ids()
            .filter(|t| self.net.outputs(t).map(|o| o.iter().any(|(p, _)| p == &mp)).unwrap_or(false))
            .cloned()
            .collect();
        let x = invoke_transition(service_id);
        let outputs = if self.net.has_transition(&x) {
            self.net.outputs(&x)?.iter().map(|(p, _)| p.clone()).collect()
        } else {
            Vec::new()
        };
        Ok(Wiring { feeds, outputs })
    }

    pub fn remove_service(&self, service_id: &str) -> Result<Pnac, PnacError> {
        if !self.is_member(service_id) {
            return Err(PnacError::UnknownMember(service_id.to_owned()));
        }
        let mp = member_place(service_id);
        let x = invoke_transition(service_id);
        let rule = RewriteRule {
            rule_id: format!("remove:{service_id}"),
            domain: BTreeSet::from([mp.clone()]),
            token_target: BTreeMap::from([(mp, PlaceId::new(CONTROL_PLACE))]),
            transitions_to_remove: if self.net.has_transition(&x) {
                BTreeSet::from([x])
            } else {
                BTreeSet::new()
            },
            ..RewriteRule::default()
        };
        let change = AdaptiveChange::RemoveMember {
            service_id: service_id.to_owned(),
        };
        self.apply_logged(rule, Some(change))
    }

    pub fn add_service(&self, descriptor: &ServiceDescriptor, wiring: &Wiring) -> Result<Pnac, PnacError> {
        let sid = descriptor.service_id.as_str();
        if self.is_member(sid) {
            return Err(PnacError::DuplicateMember(sid.to_owned()));
        }
        if let Some(t) = wiring.feeds.iter().find(|t| !self.net.has_transition(t)) {
            return Err(PnacError::BadWiring(t.to_string()));
        }
        if let Some(p) = wiring.outputs.iter().find(|p| !self.net.has_place(p)) {
            return Err(PnacError::BadWiring(p.to_string()));
        }
        let mp = member_place(sid);
        let x = invoke_transition(sid);
        let mut arcs: Vec<Arc> = wiring.feeds.iter().map(|t| Arc::output(t.clone(), mp.clone(), 1)).collect();
        arcs.push(Arc::input(mp.clone(), x.clone(), wiring.feeds.len().max(1) as u32));
        arcs.extend(wiring.outputs.iter().map(|p| Arc::output(x.clone(), p.clone(), 1)));
        let rule = RewriteRule {
            rule_id: format!("add:{sid}"),
            codomain: vec![Place::new(mp, sid)],
            transitions_to_add: vec![Transition::new(x, format!("invoke {sid}"))],
            arcs_to_add: arcs,
            ..RewriteRule::default()
        };
        let change = AdaptiveChange::AddMember {
            descriptor: descriptor.clone(),
            wiring: wiring.clone(),
        };
        let mut next = self.apply_logged(rule, Some(change))?;
        next.invoked.insert(sid.to_owned(), descriptor.operations.clone());
        Ok(next)
    }

    /// Swaps member `from` for `to` in one rewrite. `to` inherits every arc
    /// weight of `from`, and tokens waiting at `from` move to `to`.
    pub fn substitute_service(&self, from: &str, to: &ServiceDescriptor) -> Result<Pnac, PnacError> {
        if !self.is_member(from) {
            return Err(PnacError::UnknownMember(from.to_owned()));
        }
        let sid = to.service_id.as_str();
        if self.is_member(sid) {
            return Err(PnacError::DuplicateMember(sid.to_owned()));
        }
        let invoked = self.invoked_ops(from);
        let not_eq = |why: String| PnacError::NotEquivalent {
            member: from.to_owned(),
            candidate: sid.to_owned(),
            why,
        };
        if !to.availability {
            return Err(not_eq("candidate is unavailable".into()));
        }
        if let Some(op) = invoked.difference(&to.operations).next() {
            return Err(not_eq(format!("missing operation `{op}`")));
        }

        let (old_p, old_x) = (member_place(from), invoke_transition(from));
        let (new_p, new_x) = (member_place(sid), invoke_transition(sid));
        let mut arcs = Vec::new();
        for t in self.net.transition_ids() {
            if *t == old_x {
                continue;
            }
            for (p, w) in self.net.outputs(t)? {
                if *p == old_p {
                    arcs.push(Arc::output(t.clone(), new_p.clone(), *w));
                }
            }
        }
        let mut remove = BTreeSet::new();
        let mut add = Vec::new();
        if self.net.has_transition(&old_x) {
            for (p, w) in self.net.inputs(&old_x)? {
                let p = if *p == old_p { new_p.clone() } else { p.clone() };
                arcs.push(Arc::input(p, new_x.clone(), *w));
            }
            for (p, w) in self.net.outputs(&old_x)? {
                let p = if *p == old_p { new_p.clone() } else { p.clone() };
                arcs.push(Arc::output(new_x.clone(), p, *w));
            }
            remove.insert(old_x);
            add.push(Transition::new(new_x, format!("invoke {sid}")));
        }
        let rule = RewriteRule {
            rule_id: format!("substitute:{from}->{sid}"),
            domain: BTreeSet::from([old_p.clone()]),
            codomain: vec![Place::new(new_p.clone(), sid)],
            token_target: BTreeMap::from([(old_p, new_p)]),
            transitions_to_remove: remove,
            transitions_to_add: add,
            arcs_to_add: arcs,
        };
        let change = AdaptiveChange::ChangeServiceInstance {
            from: from.to_owned(),
            to: to.clone(),
        };
        let mut next = self.apply_logged(rule, Some(change))?;
        next.invoked.insert(sid.to_owned(), invoked);
        Ok(next)
    }

    /// Applies any adaptive change as one rewrite.
    pub fn apply_adaptive(&self, change: &AdaptiveChange) -> Result<Pnac, PnacError> {
        match change {
            AdaptiveChange::RemoveMember { service_id } => self.remove_service(service_id),
            AdaptiveChange::AddMember { descriptor, wiring } => self.add_service(descriptor, wiring),
            AdaptiveChange::ChangeServiceInstance { from, to } => self.substitute_service(from, to),
            AdaptiveChange::AddParameter { name } => {
                let p = parameter_place(name);
                if self.net.has_place(&p) {
                    return Err(PnacError::DuplicateParameter(name.clone()));
                }
                self.apply_logged(create_rule(format!("param+:{name}"), p, name), Some(change.clone()))
            }
            AdaptiveChange::RemoveParameter { name } => {
                let p = parameter_place(name);
                if !self.net.has_place(&p) {
                    return Err(PnacError::UnknownParameter(name.clone()));
                }
                self.apply_logged(delete_rule(format!("param-:{name}"), p), Some(change.clone()))
            }
            AdaptiveChange::AddInstance { instance_id } => {
                let p = instance_place(instance_id);
                if self.net.has_place(&p) {
                    return Err(PnacError::DuplicateInstance(instance_id.clone()));
                }
                self.apply_logged(
                    create_rule(format!("instance+:{instance_id}"), p, instance_id),
                    Some(change.clone()),
                )
            }
            AdaptiveChange::RemoveInstance { instance_id } => {
                let p = instance_place(instance_id);
                if !self.net.has_place(&p) {
                    return Err(PnacError::UnknownInstance(instance_id.clone()));
                }
                self.apply_logged(delete_rule(format!("instance-:{instance_id}"), p), Some(change.clone()))
            }
            AdaptiveChange::ChangeState { state } => {
                let new_p = state_place(*state);
                let current = self.state();
                if current == Some(*state) {
                    return Err(PnacError::AlreadyInState(*state));
                }
                let rule = match current {
                    Some(cur) => {
                        let old_p = state_place(cur);
                        RewriteRule {
                            rule_id: format!("state:{state}"),
                            domain: BTreeSet::from([old_p.clone()]),
                            codomain: vec![Place::new(new_p.clone(), state.to_string())],
                            token_target: BTreeMap::from([(old_p, new_p)]),
                            ..RewriteRule::default()
                        }
                    }
                    None => create_rule(format!("state:{state}"), new_p, &state.to_string()),
                };
                self.apply_logged(rule, Some(change.clone()))
            }
        }
    }
}

fn create_rule(rule_id: String, place: PlaceId, label: &str) -> RewriteRule {
    RewriteRule {
        rule_id,
        codomain: vec![Place::new(place, label)],
        ..RewriteRule::default()
    }
}

fn delete_rule(rule_id: String, place: PlaceId) -> RewriteRule {
    RewriteRule {
        rule_id,
        domain: BTreeSet::from([place.clone()]),
        token_target: BTreeMap::from([(place, PlaceId::new(CONTROL_PLACE))]),
        ..RewriteRule::default()
    }
}

/// Five members `WS1 → WS2 → … → WS5` in a chain.
pub fn five_member_chain() -> Pnac {
    let specs: Vec<MemberSpec> = (1..=5)
        .map(|i| {
            let deps: Vec<String> = if i == 1 { vec![] } else { vec![format!("WS{}", i - 1)] };
            MemberSpec {
                service_id: format!("WS{i}"),
                invoked_ops: BTreeSet::from([format!("op{i}")]),
                depends_on: deps,
            }
        })
        .collect();
    Pnac::compose(&specs).expect("chain is well formed")
}
