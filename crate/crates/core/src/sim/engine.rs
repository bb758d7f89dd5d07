use std::collections::{BTreeMap, BTreeSet, VecDeque};

use thiserror::Error;

use super::scenario::{Mutation, Scenario, ScenarioError, StepSpec};
use super::trace::{EventKind, ExecutionTrace};
use crate::adaptor::{react, AdaptContext, AdaptError, Control, NoOpReason, Reaction, ReactionPolicy, Trigger};
use crate::change_taxonomy::{OrchestrationState, ServiceDescriptor};
use crate::monitor::{ChangeReport, DetectionMode, MonitorError, ServiceAgent};
use crate::pnac::{invoke_transition, MemberSpec, Pnac, PnacError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("invalid scenario: {0}")]
    InvalidScenario(#[from] ScenarioError),
    #[error("horizon of {horizon} ticks reached before the orchestration finished")]
    HorizonExceeded { horizon: u64, trace: ExecutionTrace },
    #[error("unknown service `{0}`")]
    UnknownService(String),
    #[error("tick {tick} is not below the horizon {horizon}")]
    TickOutOfRange { tick: u64, horizon: u64 },
    #[error(transparent)]
    Monitor(#[from] MonitorError),
    #[error(transparent)]
    Adapt(#[from] AdaptError),
    #[error(transparent)]
    Pnac(#[from] PnacError),
}

/// Result of a run that reached a terminal event.
#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub trace: ExecutionTrace,
    pub pnac: Pnac,
    pub state: OrchestrationState,
    pub reports: Vec<ChangeReport>,
    pub policy: ReactionPolicy,
}

impl RunOutcome {
    pub fn report(&self, service_id: &str, tick: u64) -> Option<&ChangeReport> {
        self.reports
            .iter()
            .find(|r| r.service_id == service_id && r.tick == tick)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Status {
    Pending,
    InFlight { due: u64, instance: String },
    Done,
    Skipped,
}

#[derive(Clone, Debug)]
struct Step {
    spec: StepSpec,
    /// Current member bound to the step; changes on substitution.
    service: String,
    status: Status,
    skip: bool,
}

struct Engine<'s> {
    scenario: &'s Scenario,
    registry: BTreeMap<String, ServiceDescriptor>,
    latency: BTreeMap<String, u64>,
    timeline: BTreeMap<u64, Vec<(String, Mutation)>>,
    agents: BTreeMap<String, ServiceAgent>,
    steps: Vec<Step>,
    pnac: Pnac,
    control: Control,
    policy: ReactionPolicy,
    trace: ExecutionTrace,
    reports: Vec<ChangeReport>,
    rotation: BTreeMap<String, usize>,
}

/// Builds the composition net for a scenario's steps: one member per step,
/// fed by the members of the steps it depends on.
pub fn compose_steps(steps: &[StepSpec]) -> Result<Pnac, PnacError> {
    let service_of: BTreeMap<&str, &str> = steps
        .iter()
        .map(|s| (s.step_id.as_str(), s.service_id.as_str()))
        .collect();
    let specs: Vec<MemberSpec> = steps
        .iter()
        .map(|s| {
            let deps: Vec<&str> = s.depends_on.iter().filter_map(|d| service_of.get(d.as_str()).copied()).collect();
            MemberSpec::new(s.service_id.clone(), &[s.operation_name.as_str()], &deps)
        })
        .collect();
    Pnac::compose(&specs)
}

/// Runs a scenario to its terminal event.
///
/// Each tick: apply scripted mutations, run polls and heartbeats in service
/// order, react to everything detected in arrival order, then — while the
/// orchestration is running — complete and start steps in step-id order.
pub fn run(scenario: &Scenario) -> Result<RunOutcome, SimError> {
    scenario.validate()?;
    let mut engine = Engine::new(scenario)?;
    engine.trace.push(0, EventKind::Started { seed: scenario.seed });
    for tick in 0..scenario.horizon {
        if engine.tick(tick)? {
            return Ok(engine.finish());
        }
    }
    Err(SimError::HorizonExceeded {
        horizon: scenario.horizon,
        trace: engine.trace,
    })
}

impl<'s> Engine<'s> {
    fn new(scenario: &'s Scenario) -> Result<Self, SimError> {
        let registry: BTreeMap<String, ServiceDescriptor> = scenario
            .services
            .iter()
            .map(|s| (s.descriptor.service_id.clone(), s.descriptor.clone()))
            .collect();
        let latency = scenario
            .services
            .iter()
            .map(|s| (s.descriptor.service_id.clone(), s.response_latency))
            .collect();
        let mut timeline: BTreeMap<u64, Vec<(String, Mutation)>> = BTreeMap::new();
        for sid in registry.keys() {
            for e in scenario.effective_timeline(sid) {
                timeline.entry(e.tick).or_default().push((sid.clone(), e.mutation));
            }
        }
        let mut agents = BTreeMap::new();
        for (sid, d) in &registry {
            agents.insert(sid.clone(), ServiceAgent::new(d.clone(), &scenario.monitor)?);
        }
        let mut steps: Vec<Step> = scenario
            .orchestration
            .steps
            .iter()
            .map(|s| Step {
                spec: s.clone(),
                service: s.service_id.clone(),
                status: Status::Pending,
                skip: false,
            })
            .collect();
        steps.sort_by(|a, b| a.spec.step_id.cmp(&b.spec.step_id));
        let pnac = compose_steps(&scenario.orchestration.steps)?;
        for step in &steps {
            if let Some(a) = agents.get_mut(&step.service) {
                a.required_ops = pnac.invoked_ops(&step.service);
            }
        }
        let policy = scenario.reaction_policy();
        policy.validate()?;
        Ok(Self {
            scenario,
            registry,
            latency,
            timeline,
            agents,
            steps,
            pnac,
            control: Control::default(),
            policy,
            trace: ExecutionTrace::default(),
            reports: Vec::new(),
            rotation: BTreeMap::new(),
        })
    }

    fn finish(self) -> RunOutcome {
        RunOutcome {
            trace: self.trace,
            pnac: self.pnac,
            state: self.control.state,
            reports: self.reports,
            policy: self.policy,
        }
    }

    /// One tick; true once a terminal event has been recorded.
    fn tick(&mut self, t: u64) -> Result<bool, SimError> {
        let mut queue = VecDeque::new();

        // (1) scripted mutations, already in service-id order
        let mut mutated = BTreeSet::new();
        for (sid, m) in self.timeline.remove(&t).unwrap_or_default() {
            let d = self.registry.get_mut(&sid).expect("validated service");
            m.apply(d);
            if m == Mutation::Announce {
                queue.push_back(Trigger::NewService(d.clone()));
            } else {
                mutated.insert(sid);
            }
        }

        // (2) detection
        let mut reported = Vec::new();
        for (sid, agent) in &mut self.agents {
            let report = match self.scenario.monitor.mode {
                DetectionMode::Poll => agent.poll(&self.registry, t)?,
                DetectionMode::Notify if mutated.contains(sid) => agent.notify(self.registry[sid].clone(), t)?,
                DetectionMode::Notify => None,
            };
            if let Some(report) = report {
                queue.extend(report.changes.iter().map(|c| Trigger::Handling {
                    service_id: sid.clone(),
                    change: c.clone(),
                }));
                self.trace.push(t, EventKind::ChangeDetected(report.clone()));
                self.reports.push(report);
                reported.push(sid.clone());
            }
            if agent.heartbeat.is_due(t) {
                let status = agent.heartbeat(&self.registry);
                self.trace.push(
                    t,
                    EventKind::HeartbeatEvent {
                        service: sid.clone(),
                        status,
                    },
                );
                queue.push_back(Trigger::Heartbeat {
                    service_id: sid.clone(),
                    status,
                });
            }
        }

        // (3) + (4) reactions, one trigger at a time
        while let Some(trigger) = queue.pop_front() {
            if self.control.state == OrchestrationState::Terminated {
                break;
            }
            self.react(t, &trigger)?;
        }
        for sid in reported {
            self.agents.get_mut(&sid).expect("agent exists").reset_epoch();
        }
        if self.control.state == OrchestrationState::Terminated {
            return Ok(true);
        }

        // (5) orchestration progress
        if self.control.state == OrchestrationState::Running {
            self.advance(t)?;
            if self.steps.iter().all(|s| matches!(s.status, Status::Done | Status::Skipped)) {
                let skipped = self.steps.iter().filter(|s| s.status == Status::Skipped).count();
                self.control.state = OrchestrationState::Completed;
                self.trace.push(
                    t,
                    EventKind::Completed {
                        done: self.steps.len() - skipped,
                        skipped,
                    },
                );
                return Ok(true);
            }
        }
        Ok(false)
    }

    fn finished_services(&self) -> BTreeSet<String> {
        self.steps
            .iter()
            .filter(|s| matches!(s.status, Status::Done | Status::Skipped))
            .map(|s| s.service.clone())
            .collect()
    }

    fn react(&mut self, t: u64, trigger: &Trigger) -> Result<(), SimError> {
        let finished = self.finished_services();
        let ctx = AdaptContext {
            registry: &self.registry,
            finished: &finished,
        };
        let before = self.control.state;
        let logged = self.pnac.log().len();
        let (pnac, reactions) = react(&mut self.control, &self.pnac, trigger, &mut self.policy, ctx)?;
        self.pnac = pnac;

        let applied = self.pnac.log()[logged..].to_vec();
        let mut rules = applied.into_iter();
        let mut state = before;
        let mut balanced = false;
        for r in reactions {
            self.trace.push(t, EventKind::ReactionTaken(r.clone()));
            let rewrites = match &r {
                Reaction::Substitute { .. } | Reaction::RegisterBackup { .. } => true,
                Reaction::LoadBalance { .. } => !std::mem::replace(&mut balanced, true),
                _ => false,
            };
            if rewrites {
                if let Some(applied) = rules.next() {
                    self.trace.push(
                        t,
                        EventKind::RuleApplied {
                            config: applied.config,
                            rule_id: applied.rule.rule_id.clone(),
                        },
                    );
                }
            }
            let next_state = match &r {
                Reaction::Pause => Some(OrchestrationState::Paused),
                Reaction::Resume => Some(OrchestrationState::Running),
                Reaction::Terminate { .. } => Some(OrchestrationState::Terminated),
                _ => None,
            };
            if let Some(to) = next_state {
                self.trace.push(t, EventKind::StateChanged { from: state, to });
                state = to;
            }
            match r {
                Reaction::Substitute { from, to } => self.rebind(t, &from, &to),
                Reaction::NoOp {
                    reason: NoOpReason::SkipStep { service },
                } => {
                    if let Some(i) = self.steps.iter().position(|s| s.service == service) {
                        self.abort(t, i);
                        self.steps[i].skip = true;
                    }
                }
                Reaction::Terminate { reason } => self.trace.push(t, EventKind::Terminated { reason }),
                _ => {}
            }
        }
        for applied in rules {
            self.trace.push(
                t,
                EventKind::RuleApplied {
                    config: applied.config,
                    rule_id: applied.rule.rule_id.clone(),
                },
            );
        }
        self.sync_heartbeats(t);
        Ok(())
    }

    fn abort(&mut self, t: u64, i: usize) {
        if let Status::InFlight { instance, .. } = &self.steps[i].status {
            let service = instance.clone();
            self.trace.push(
                t,
                EventKind::StepAborted {
                    step: self.steps[i].spec.step_id.clone(),
                    service,
                },
            );
            self.steps[i].status = Status::Pending;
        }
    }

    fn rebind(&mut self, t: u64, from: &str, to: &str) {
        if let Some(i) = self.steps.iter().position(|s| s.service == from) {
            self.abort(t, i);
            self.steps[i].service = to.to_owned();
        }
        let ops = self.pnac.invoked_ops(to);
        if let Some(a) = self.agents.get_mut(to) {
            a.required_ops = ops;
        }
    }

    fn sync_heartbeats(&mut self, t: u64) {
        for (sid, agent) in &mut self.agents {
            match (self.control.watching.contains(sid), agent.heartbeat.is_armed()) {
                (true, false) => agent.heartbeat.arm(t),
                (false, true) => agent.heartbeat.disarm(),
                _ => {}
            }
        }
    }

    fn usable(&self, instance: &str, op: &str) -> bool {
        self.registry
            .get(instance)
            .is_some_and(|d| d.availability && d.operations.contains(op))
    }

    /// Instances to try for a step, rotated for load-balanced members.
    fn candidates(&mut self, service: &str) -> Vec<String> {
        match self.policy.pools.get(service) {
            Some(pool) if pool.len() > 1 => {
                let turn = self.rotation.entry(service.to_owned()).or_insert(0);
                let offset = (self.scenario.seed as usize + *turn) % pool.len();
                *turn += 1;
                pool[offset..].iter().chain(&pool[..offset]).cloned().collect()
            }
            _ => vec![service.to_owned()],
        }
    }

    fn advance(&mut self, t: u64) -> Result<(), SimError> {
        for i in 0..self.steps.len() {
            let Status::InFlight { due, instance } = self.steps[i].status.clone() else {
                continue;
            };
            if due > t {
                continue;
            }
            if self.usable(&instance, &self.steps[i].spec.operation_name) {
                self.pnac = self.pnac.fire(&invoke_transition(&self.steps[i].service))?;
                self.steps[i].status = Status::Done;
                self.trace.push(
                    t,
                    EventKind::StepCompleted {
                        step: self.steps[i].spec.step_id.clone(),
                        service: instance,
                    },
                );
            } else if instance != self.steps[i].service {
                // a pooled instance went away; try the pool again
                self.abort(t, i);
            }
        }
        loop {
            let mut progressed = false;
            for i in 0..self.steps.len() {
                if self.steps[i].status != Status::Pending {
                    continue;
                }
                let x = invoke_transition(&self.steps[i].service);
                if !self.pnac.net().enabled(self.pnac.marking(), &x).map_err(PnacError::from)? {
                    continue;
                }
                if self.steps[i].skip {
                    self.pnac = self.pnac.fire(&x)?;
                    self.steps[i].status = Status::Skipped;
                    self.trace.push(
                        t,
                        EventKind::StepSkipped {
                            step: self.steps[i].spec.step_id.clone(),
                            service: self.steps[i].service.clone(),
                        },
                    );
                    progressed = true;
                    continue;
                }
                let service = self.steps[i].service.clone();
                let op = self.steps[i].spec.operation_name.clone();
                let chosen = self.candidates(&service).into_iter().find(|c| self.usable(c, &op));
                if let Some(instance) = chosen {
                    let due = t + self.latency[&instance];
                    self.trace.push(
                        t,
                        EventKind::StepStarted {
                            step: self.steps[i].spec.step_id.clone(),
                            service: instance.clone(),
                            due,
                        },
                    );
                    self.steps[i].status = Status::InFlight { due, instance };
                }
            }
            if !progressed {
                return Ok(());
            }
        }
    }
}
