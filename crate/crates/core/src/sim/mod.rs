//! Deterministic discrete-time simulation of a monitored orchestration.
//!
//! Mock services change only through scripted mutations, time is a tick
//! counter, and every collection is ordered, so a scenario always produces
//! the same trace.

mod engine;
pub mod generate;
mod scenario;
mod trace;

use std::collections::{BTreeMap, BTreeSet};

pub use engine::{compose_steps, run, RunOutcome, SimError};
pub use scenario::{
    Fault, MockService, Mutation, OrchestrationSpec, PolicySpec, Scenario, ScenarioError, StepSpec, TimedMutation,
};
pub use trace::{EventKind, ExecutionTrace, TraceEvent};

use crate::adaptor::Criticality;
use crate::change_taxonomy::ServiceDescriptor;
use crate::monitor::MonitorConfig;

/// Inserts `mutation` into `service_id`'s timeline at `tick`, after any
/// events already scheduled for that tick.
pub fn inject_fault(scenario: &Scenario, tick: u64, service_id: &str, mutation: Mutation) -> Result<Scenario, SimError> {
    if tick >= scenario.horizon {
        return Err(SimError::TickOutOfRange {
            tick,
            horizon: scenario.horizon,
        });
    }
    let mut next = scenario.clone();
    let svc = next
        .services
        .iter_mut()
        .find(|s| s.descriptor.service_id == service_id)
        .ok_or_else(|| SimError::UnknownService(service_id.to_owned()))?;
    let at = svc.timeline.partition_point(|e| e.tick <= tick);
    svc.timeline.insert(at, TimedMutation { tick, mutation });
    Ok(next)
}

fn service(id: &str, op: &str, wsdl: &str, cost: f64, responsiveness: f64) -> ServiceDescriptor {
    let set = |v: &[String]| v.iter().cloned().collect::<BTreeSet<String>>();
    ServiceDescriptor {
        types: set(&[format!("{wsdl}Record")]),
        messages: set(&[format!("{op}Request"), format!("{op}Response")]),
        operations: set(&[op.to_owned()]),
        locations: set(&[format!("http://{}.example/{wsdl}", id.to_lowercase().replace('\'', "-b"))]),
        port_types: set(&[format!("{wsdl}PortType")]),
        bindings: set(&[format!("{wsdl}SoapBinding")]),
        cost,
        responsiveness,
        ..ServiceDescriptor::new(id)
    }
}

fn step(id: &str, service_id: &str, op: &str, deps: &[&str]) -> StepSpec {
    StepSpec {
        step_id: id.to_owned(),
        service_id: service_id.to_owned(),
        operation_name: op.to_owned(),
        depends_on: deps.iter().map(|d| d.to_string()).collect(),
    }
}

/// The five-service home-care orchestration: HealthService collects the
/// patient data, then AccountingService (fire-and-forget) and DoctorService
/// run in parallel; once the doctor confirms, FinancialService and
/// InsuranceService finalise. HS and DS are critical.
pub fn telemedicine_default() -> Scenario {
    let services = vec![
        MockService::new(service("HS", "collectPatientData", "Health", 5.0, 120.0), 1),
        MockService::new(service("AS", "recordContact", "Accounting", 2.0, 80.0), 1),
        MockService::new(service("DS", "checkValues", "Doctor", 10.0, 300.0), 3),
        MockService::new(service("FS", "processPayment", "Financial", 3.0, 90.0), 1),
        MockService::new(service("IS", "processClaim", "Insurance", 4.0, 150.0), 1),
    ];
    let steps = vec![
        step("1-health", "HS", "collectPatientData", &[]),
        step("2-accounting", "AS", "recordContact", &["1-health"]),
        step("3-doctor", "DS", "checkValues", &["1-health"]),
        step("4-financial", "FS", "processPayment", &["3-doctor"]),
        step("5-insurance", "IS", "processClaim", &["3-doctor"]),
    ];
    Scenario {
        horizon: 40,
        seed: 0,
        services,
        orchestration: OrchestrationSpec { steps },
        policy: PolicySpec {
            criticality: BTreeMap::from([
                ("HS".to_owned(), Criticality::Critical),
                ("DS".to_owned(), Criticality::Critical),
                ("AS".to_owned(), Criticality::Optional),
                ("FS".to_owned(), Criticality::Optional),
                ("IS".to_owned(), Criticality::Optional),
            ]),
            ..PolicySpec::default()
        },
        monitor: MonitorConfig::default(),
        faults: Vec::new(),
    }
}

/// DoctorService becomes unavailable at tick 3, with or without the
/// equivalent backup `DS'` registered in the policy.
pub fn telemedicine_ds_outage(with_backup: bool) -> Scenario {
    let mut s = telemedicine_default();
    if with_backup {
        s.services
            .push(MockService::new(service("DS'", "checkValues", "Doctor", 12.0, 280.0), 3));
        s.policy.backups.insert("DS".into(), vec!["DS'".into()]);
    }
    s.faults.push(Fault {
        tick: 3,
        service: "DS".into(),
        mutation: Mutation::SetAvailability(false),
    });
    s
}
