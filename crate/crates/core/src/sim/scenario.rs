use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::adaptor::{Criticality, NewServiceMode, ReactionPolicy};
use crate::change_taxonomy::{FunctionalElement, ServiceDescriptor, Thresholds};
use crate::monitor::MonitorConfig;

/// A scripted change to a mock service's descriptor.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Mutation {
    SetAvailability(bool),
    SetReliability(bool),
    SetCost(f64),
    SetResponsiveness(f64),
    AddElement { element: FunctionalElement, name: String },
    RemoveElement { element: FunctionalElement, name: String },
    /// The service presents itself to the orchestrator as a new candidate.
    Announce,
}

impl Mutation {
    pub fn apply(&self, d: &mut ServiceDescriptor) {
        match self {
            Mutation::SetAvailability(v) => d.availability = *v,
            Mutation::SetReliability(v) => d.reliability = *v,
            Mutation::SetCost(v) => d.cost = *v,
            Mutation::SetResponsiveness(v) => d.responsiveness = *v,
            Mutation::AddElement { element, name } => {
                d.elements_mut(*element).insert(name.clone());
            }
            Mutation::RemoveElement { element, name } => {
                d.elements_mut(*element).remove(name);
            }
            Mutation::Announce => {}
        }
    }

    /// What this mutation touches; two mutations of one service in the same
    /// tick must touch different things.
    fn target(&self) -> String {
        match self {
            Mutation::SetAvailability(_) => "availability".into(),
            Mutation::SetReliability(_) => "reliability".into(),
            Mutation::SetCost(_) => "cost".into(),
            Mutation::SetResponsiveness(_) => "responsiveness".into(),
            Mutation::AddElement { element, name } | Mutation::RemoveElement { element, name } => {
                format!("{}:{name}", element.code())
            }
            Mutation::Announce => "announce".into(),
        }
    }
}

impl fmt::Display for Mutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mutation::SetAvailability(v) => write!(f, "set_availability({v})"),
            Mutation::SetReliability(v) => write!(f, "set_reliability({v})"),
            Mutation::SetCost(v) => write!(f, "set_cost({v})"),
            Mutation::SetResponsiveness(v) => write!(f, "set_responsiveness({v})"),
            Mutation::AddElement { element, name } => write!(f, "add_element({}:{name})", element.code()),
            Mutation::RemoveElement { element, name } => write!(f, "remove_element({}:{name})", element.code()),
            Mutation::Announce => f.write_str("announce"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimedMutation {
    pub tick: u64,
    pub mutation: Mutation,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MockService {
    pub descriptor: ServiceDescriptor,
    #[serde(default = "one")]
    pub response_latency: u64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub timeline: Vec<TimedMutation>,
}

fn one() -> u64 {
    1
}

impl MockService {
    pub fn new(descriptor: ServiceDescriptor, response_latency: u64) -> Self {
        Self {
            descriptor,
            response_latency,
            timeline: Vec::new(),
        }
    }
}

/// A mutation listed in the top-level `faults` section.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Fault {
    pub tick: u64,
    pub service: String,
    pub mutation: Mutation,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StepSpec {
    pub step_id: String,
    pub service_id: String,
    pub operation_name: String,
    #[serde(default)]
    pub depends_on: BTreeSet<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OrchestrationSpec {
    pub steps: Vec<StepSpec>,
}

/// The policy as written in a scenario: backups are named, not inlined.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolicySpec {
    #[serde(default)]
    pub criticality: BTreeMap<String, Criticality>,
    #[serde(default)]
    pub backups: BTreeMap<String, Vec<String>>,
    /// Must agree with `monitor.max_misses` when given.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub heartbeat_limit: Option<u32>,
    #[serde(default)]
    pub floors: Thresholds,
    #[serde(default)]
    pub new_service_mode: NewServiceMode,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub horizon: u64,
    #[serde(default)]
    pub seed: u64,
    pub services: Vec<MockService>,
    pub orchestration: OrchestrationSpec,
    #[serde(default)]
    pub policy: PolicySpec,
    #[serde(default)]
    pub monitor: MonitorConfig,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub faults: Vec<Fault>,
}

/// A scenario problem, located by a field path and, when known, a line.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScenarioError {
    pub path: String,
    pub message: String,
    pub line: Option<usize>,
    needle: Option<String>,
}

impl ScenarioError {
    fn new(path: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            path: path.into(),
            message: message.into(),
            line: None,
            needle: None,
        }
    }

    fn at(mut self, needle: impl Into<String>) -> Self {
        self.needle = Some(needle.into());
        self
    }

    /// Best-effort line lookup: the first line mentioning the offending
    /// value (quoted, then bare), else the last key of the path.
    fn locate(mut self, src: &str) -> Self {
        let key = self
            .path
            .rsplit('.')
            .next()
            .map(|k| k.split('[').next().unwrap_or(k).to_owned());
        let mut candidates = Vec::new();
        if let Some(n) = &self.needle {
            candidates.push(format!("\"{n}\""));
            candidates.push(n.clone());
        }
        candidates.extend(key.filter(|k| !k.is_empty()));
        self.line = candidates
            .iter()
            .find_map(|c| src.lines().position(|l| l.contains(c.as_str())).map(|i| i + 1));
        self
    }
}

impl fmt::Display for ScenarioError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(line) = self.line {
            write!(f, "line {line}: ")?;
        }
        if self.path.is_empty() {
            f.write_str(&self.message)
        } else {
            write!(f, "{}: {}", self.path, self.message)
        }
    }
}

impl std::error::Error for ScenarioError {}

impl Scenario {
    /// Parses and validates a scenario file.
    pub fn from_toml_str(src: &str) -> Result<Self, ScenarioError> {
        let scenario: Scenario = toml::from_str(src).map_err(|e| ScenarioError {
            path: String::new(),
            message: e.message().trim().to_owned(),
            line: e.span().map(|s| src[..s.start.min(src.len())].matches('\n').count() + 1),
            needle: None,
        })?;
        scenario.validate().map_err(|e| e.locate(src))?;
        Ok(scenario)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("scenarios always serialize")
    }

    pub fn service(&self, id: &str) -> Option<&MockService> {
        self.services.iter().find(|s| s.descriptor.service_id == id)
    }

    /// Service ids in scheduling order.
    pub fn service_ids(&self) -> BTreeSet<&str> {
        self.services.iter().map(|s| s.descriptor.service_id.as_str()).collect()
    }

    /// Per service, its timeline followed by its `faults` entries, stably
    /// sorted by tick.
    pub fn effective_timeline(&self, service_id: &str) -> Vec<TimedMutation> {
        let mut events: Vec<TimedMutation> = self
            .service(service_id)
            .map(|s| s.timeline.clone())
            .unwrap_or_default();
        events.extend(
            self.faults
                .iter()
                .filter(|f| f.service == service_id)
                .map(|f| TimedMutation {
                    tick: f.tick,
                    mutation: f.mutation.clone(),
                }),
        );
        events.sort_by_key(|e| e.tick);
        events
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        if self.horizon == 0 {
            return Err(ScenarioError::new("horizon", "must be at least 1").at("horizon"));
        }
        let mut ids = BTreeSet::new();
        for (i, s) in self.services.iter().enumerate() {
            let base = format!("services[{i}]");
            let sid = &s.descriptor.service_id;
            s.descriptor
                .validate()
                .map_err(|e| ScenarioError::new(format!("{base}.descriptor"), e.to_string()).at(sid.clone()))?;
            if !ids.insert(sid.as_str()) {
                return Err(ScenarioError::new(
                    format!("{base}.descriptor.service_id"),
                    format!("duplicate service id `{sid}`"),
                )
                .at(sid.clone()));
            }
            if s.response_latency == 0 {
                return Err(ScenarioError::new(format!("{base}.response_latency"), "must be at least 1"));
            }
            if let Some(w) = s.timeline.windows(2).find(|w| w[1].tick < w[0].tick) {
                return Err(ScenarioError::new(
                    format!("{base}.timeline"),
                    format!("not sorted by tick ({} after {})", w[1].tick, w[0].tick),
                ));
            }
            for (j, e) in s.timeline.iter().enumerate() {
                self.check_event(&format!("{base}.timeline[{j}]"), e.tick, &e.mutation)?;
            }
        }
        if self.services.is_empty() {
            return Err(ScenarioError::new("services", "at least one service is required"));
        }
        for (i, f) in self.faults.iter().enumerate() {
            let base = format!("faults[{i}]");
            if !ids.contains(f.service.as_str()) {
                return Err(
                    ScenarioError::new(format!("{base}.service"), format!("unknown service `{}`", f.service))
                        .at(f.service.clone()),
                );
            }
            self.check_event(&base, f.tick, &f.mutation)?;
        }
        for sid in &ids {
            let mut seen = BTreeSet::new();
            for e in self.effective_timeline(sid) {
                if !seen.insert((e.tick, e.mutation.target())) {
                    return Err(ScenarioError::new(
                        "faults",
                        format!("service `{sid}` has two mutations of {} at tick {}", e.mutation.target(), e.tick),
                    )
                    .at(sid.to_string()));
                }
            }
        }
        self.validate_steps()?;
        self.validate_policy(&ids)?;
        self.monitor
            .validate()
            .map_err(|e| ScenarioError::new("monitor", e.to_string()))?;
        Ok(())
    }

    fn check_event(&self, path: &str, tick: u64, m: &Mutation) -> Result<(), ScenarioError> {
        if tick >= self.horizon {
            return Err(ScenarioError::new(
                format!("{path}.tick"),
                format!("tick {tick} is not below the horizon {}", self.horizon),
            ));
        }
        if let Mutation::SetCost(v) | Mutation::SetResponsiveness(v) = m {
            if !v.is_finite() || *v < 0.0 {
                return Err(ScenarioError::new(
                    format!("{path}.mutation"),
                    format!("value must be finite and non-negative, got {v}"),
                ));
            }
        }
        Ok(())
    }

    fn validate_steps(&self) -> Result<(), ScenarioError> {
        let steps = &self.orchestration.steps;
        if steps.is_empty() {
            return Err(ScenarioError::new("orchestration.steps", "at least one step is required"));
        }
        let step_ids: BTreeSet<&str> = steps.iter().map(|s| s.step_id.as_str()).collect();
        let mut bound = BTreeSet::new();
        for (i, s) in steps.iter().enumerate() {
            let base = format!("orchestration.steps[{i}]");
            if steps[..i].iter().any(|o| o.step_id == s.step_id) {
                return Err(
                    ScenarioError::new(format!("{base}.step_id"), format!("duplicate step id `{}`", s.step_id))
                        .at(s.step_id.clone()),
                );
            }
            let Some(svc) = self.service(&s.service_id) else {
                return Err(ScenarioError::new(
                    format!("{base}.service_id"),
                    format!("unknown service `{}`", s.service_id),
                )
                .at(s.service_id.clone()));
            };
            if !bound.insert(s.service_id.as_str()) {
                return Err(ScenarioError::new(
                    format!("{base}.service_id"),
                    format!("service `{}` is already bound to another step", s.service_id),
                )
                .at(s.service_id.clone()));
            }
            if !svc.descriptor.operations.contains(&s.operation_name) {
                return Err(ScenarioError::new(
                    format!("{base}.operation_name"),
                    format!("service `{}` does not offer `{}`", s.service_id, s.operation_name),
                )
                .at(s.operation_name.clone()));
            }
            if let Some(d) = s.depends_on.iter().find(|d| !step_ids.contains(d.as_str())) {
                return Err(
                    ScenarioError::new(format!("{base}.depends_on"), format!("unknown step `{d}`")).at(d.clone()),
                );
            }
        }
        // Kahn's algorithm; whatever is left over sits on a cycle.
        let mut done: BTreeSet<&str> = BTreeSet::new();
        loop {
            let ready: Vec<&str> = steps
                .iter()
                .filter(|s| !done.contains(s.step_id.as_str()))
                .filter(|s| s.depends_on.iter().all(|d| done.contains(d.as_str())))
                .map(|s| s.step_id.as_str())
                .collect();
            if ready.is_empty() {
                break;
            }
            done.extend(ready);
        }
        if let Some(s) = steps.iter().find(|s| !done.contains(s.step_id.as_str())) {
            return Err(ScenarioError::new(
                "orchestration.steps",
                format!("dependency cycle through step `{}`", s.step_id),
            )
            .at(s.step_id.clone()));
        }
        Ok(())
    }

    fn validate_policy(&self, ids: &BTreeSet<&str>) -> Result<(), ScenarioError> {
        let p = &self.policy;
        if let Some(sid) = p.criticality.keys().find(|k| !ids.contains(k.as_str())) {
            return Err(
                ScenarioError::new("policy.criticality", format!("unknown service `{sid}`")).at(sid.clone()),
            );
        }
        for (sid, list) in &p.backups {
            if !ids.contains(sid.as_str()) {
                return Err(ScenarioError::new("policy.backups", format!("unknown service `{sid}`")).at(sid.clone()));
            }
            let mut seen = BTreeSet::new();
            for b in list {
                if !ids.contains(b.as_str()) {
                    return Err(ScenarioError::new(
                        format!("policy.backups.{sid}"),
                        format!("unknown backup service `{b}`"),
                    )
                    .at(b.clone()));
                }
                if b == sid {
                    return Err(
                        ScenarioError::new(format!("policy.backups.{sid}"), "a service cannot back itself up")
                            .at(b.clone()),
                    );
                }
                if !seen.insert(b) {
                    return Err(
                        ScenarioError::new(format!("policy.backups.{sid}"), format!("backup `{b}` listed twice"))
                            .at(b.clone()),
                    );
                }
            }
        }
        if let Some(limit) = p.heartbeat_limit {
            if limit != self.monitor.max_misses {
                return Err(ScenarioError::new(
                    "policy.heartbeat_limit",
                    format!("{limit} disagrees with monitor.max_misses = {}", self.monitor.max_misses),
                )
                .at("heartbeat_limit"));
            }
        }
        p.floors
            .validate()
            .map_err(|e| ScenarioError::new("policy.floors", e.to_string()))?;
        Ok(())
    }

    /// The runtime policy, with backup names resolved to their initial
    /// descriptors.
    pub fn reaction_policy(&self) -> ReactionPolicy {
        let backups = self
            .policy
            .backups
            .iter()
            .map(|(sid, list)| {
                let ds = list
                    .iter()
                    .filter_map(|b| self.service(b).map(|s| s.descriptor.clone()))
                    .collect();
                (sid.clone(), ds)
            })
            .collect();
        ReactionPolicy {
            criticality: self.policy.criticality.clone(),
            backups,
            heartbeat_limit: self.policy.heartbeat_limit.unwrap_or(self.monitor.max_misses),
            floors: self.policy.floors,
            new_service_mode: self.policy.new_service_mode,
            pools: BTreeMap::new(),
        }
    }
}
