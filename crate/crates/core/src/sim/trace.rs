use std::fmt;

use crate::adaptor::{Reaction, TerminateReason};
use crate::change_taxonomy::OrchestrationState;
use crate::monitor::{ChangeReport, HeartbeatStatus};
use crate::pnac::ConfigurationId;

#[derive(Clone, Debug, PartialEq)]
pub enum EventKind {
    Started { seed: u64 },
    StepStarted { step: String, service: String, due: u64 },
    StepCompleted { step: String, service: String },
    /// An in-flight step was abandoned because its service was replaced or
    /// dropped; it restarts (or is skipped) later.
    StepAborted { step: String, service: String },
    StepSkipped { step: String, service: String },
    ChangeDetected(ChangeReport),
    ReactionTaken(Reaction),
    RuleApplied { config: ConfigurationId, rule_id: String },
    StateChanged { from: OrchestrationState, to: OrchestrationState },
    HeartbeatEvent { service: String, status: HeartbeatStatus },
    Terminated { reason: TerminateReason },
    Completed { done: usize, skipped: usize },
}

impl EventKind {
    pub fn name(&self) -> &'static str {
        match self {
            EventKind::Started { .. } => "Started",
            EventKind::StepStarted { .. } => "StepStarted",
            EventKind::StepCompleted { .. } => "StepCompleted",
            EventKind::StepAborted { .. } => "StepAborted",
            EventKind::StepSkipped { .. } => "StepSkipped",
            EventKind::ChangeDetected(_) => "ChangeDetected",
            EventKind::ReactionTaken(_) => "ReactionTaken",
            EventKind::RuleApplied { .. } => "RuleApplied",
            EventKind::StateChanged { .. } => "StateChanged",
            EventKind::HeartbeatEvent { .. } => "HeartbeatEvent",
            EventKind::Terminated { .. } => "Terminated",
            EventKind::Completed { .. } => "Completed",
        }
    }

    pub fn is_terminal(&self) -> bool {
        matches!(self, EventKind::Terminated { .. } | EventKind::Completed { .. })
    }

    fn payload(&self) -> String {
        match self {
            EventKind::Started { seed } => format!("seed={seed}"),
            EventKind::StepStarted { step, service, due } => format!("step={step} service={service} due={due}"),
            EventKind::StepCompleted { step, service }
            | EventKind::StepAborted { step, service }
            | EventKind::StepSkipped { step, service } => format!("step={step} service={service}"),
            EventKind::ChangeDetected(r) => r.to_string(),
            EventKind::ReactionTaken(r) => r.to_string(),
            EventKind::RuleApplied { config, rule_id } => format!("{config} {rule_id}"),
            EventKind::StateChanged { from, to } => format!("{from}->{to}"),
            EventKind::HeartbeatEvent { service, status } => format!("service={service} status={status}"),
            EventKind::Terminated { reason } => reason.to_string(),
            EventKind::Completed { done, skipped } => format!("done={done} skipped={skipped}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TraceEvent {
    pub tick: u64,
    pub kind: EventKind,
}

impl fmt::Display for TraceEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}\t{}\t{}", self.tick, self.kind.name(), self.kind.payload())
    }
}

/// Everything a run did, in order. The text form has one
/// `tick<TAB>kind<TAB>payload` line per event.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ExecutionTrace {
    pub events: Vec<TraceEvent>,
}

impl ExecutionTrace {
    pub fn push(&mut self, tick: u64, kind: EventKind) {
        self.events.push(TraceEvent { tick, kind });
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &TraceEvent> {
        self.events.iter()
    }

    pub fn terminal(&self) -> Option<&TraceEvent> {
        self.events.iter().rev().find(|e| e.kind.is_terminal())
    }

    pub fn lines(&self) -> Vec<String> {
        self.events.iter().map(ToString::to_string).collect()
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for e in &self.events {
            out.push_str(&e.to_string());
            out.push('\n');
        }
        out
    }

    /// Events ticks never decrease and exactly one terminal event closes
    /// the trace.
    pub fn is_well_formed(&self) -> bool {
        let monotone = self.events.windows(2).all(|w| w[0].tick <= w[1].tick);
        let terminals = self.events.iter().filter(|e| e.kind.is_terminal()).count();
        monotone && terminals == 1 && self.events.last().is_some_and(|e| e.kind.is_terminal())
    }
}

impl fmt::Display for ExecutionTrace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}
