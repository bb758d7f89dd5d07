//! Seeded random scenarios for property tests.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Fault, MockService, Mutation, OrchestrationSpec, PolicySpec, Scenario, StepSpec};
use crate::adaptor::Criticality;
use crate::change_taxonomy::{Bounds, FunctionalElement, ServiceDescriptor, Thresholds};
use crate::monitor::{DetectionMode, MonitorConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Profile {
    /// Anything goes: outages with or without backups, backups that fail
    /// too, drifting costs and functional edits.
    Chaotic,
    /// Every outage of a critical member has an equivalent backup, and
    /// backups never fail.
    Recoverable,
    /// Per service, scripted changes are boolean or element flips spaced at
    /// least one poll interval apart, so each one is observable.
    Spaced,
}

fn descriptor(id: &str, op: &str, cost: f64) -> ServiceDescriptor {
    let mut d = ServiceDescriptor::new(id).with_operations([op]);
    d.types.insert(format!("{op}Type"));
    d.messages.insert(format!("{op}Msg"));
    d.cost = cost;
    d.responsiveness = 100.0;
    d
}

pub fn random_scenario(seed: u64, profile: Profile) -> Scenario {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(2..=6usize);
    let mut services = Vec::new();
    let mut steps = Vec::new();
    let mut criticality = BTreeMap::new();
    let mut backups = BTreeMap::new();
    for i in 0..n {
        let sid = format!("S{i}");
        let op = format!("op{i}");
        let cost = rng.random_range(1..=20) as f64;
        services.push(MockService::new(descriptor(&sid, &op, cost), rng.random_range(1..=3)));
        let mut deps = BTreeSet::new();
        for j in 0..i {
            if rng.random_bool(0.4) {
                deps.insert(format!("step{j}"));
            }
        }
        if i > 0 && deps.is_empty() && rng.random_bool(0.7) {
            deps.insert(format!("step{}", rng.random_range(0..i)));
        }
        steps.push(StepSpec {
            step_id: format!("step{i}"),
            service_id: sid.clone(),
            operation_name: op.clone(),
            depends_on: deps,
        });
        let critical = rng.random_bool(0.5);
        criticality.insert(
            sid.clone(),
            if critical {
                Criticality::Critical
            } else {
                Criticality::Optional
            },
        );
        let wants_backup = match profile {
            Profile::Recoverable => critical || rng.random_bool(0.5),
            _ => rng.random_bool(0.5),
        };
        if wants_backup {
            let bid = format!("B{i}");
            services.push(MockService::new(descriptor(&bid, &op, cost), rng.random_range(1..=3)));
            backups.insert(sid, vec![bid]);
        }
    }

    let poll_interval = rng.random_range(1..=3);
    let monitor = MonitorConfig {
        poll_interval,
        heartbeat_interval: rng.random_range(1..=2),
        max_misses: rng.random_range(1..=3),
        thresholds: Thresholds {
            cost: Bounds::new(0.0, 25.0),
            ..Thresholds::default()
        },
        mode: if profile != Profile::Spaced && rng.random_bool(0.3) {
            DetectionMode::Notify
        } else {
            DetectionMode::Poll
        },
    };

    let horizon = 200;
    let ids: Vec<String> = services.iter().map(|s| s.descriptor.service_id.clone()).collect();
    let members: Vec<String> = steps.iter().map(|s| s.service_id.clone()).collect();
    let mut faults = Vec::new();
    let mut taken = BTreeSet::new();
    let mut last_tick: BTreeMap<String, u64> = BTreeMap::new();
    for _ in 0..rng.random_range(0..=5) {
        let tick = rng.random_range(0..20u64);
        let pool = match profile {
            Profile::Recoverable => &members,
            _ => &ids,
        };
        let service = pool.choose(&mut rng).expect("nonempty").clone();
        let member_idx = service[1..].parse::<usize>().unwrap_or(0);
        let op = format!("op{member_idx}");
        let mutation = match (profile, rng.random_range(0..6)) {
            (_, 0) => Mutation::SetAvailability(rng.random_bool(0.3)),
            (_, 1) => Mutation::SetReliability(rng.random_bool(0.5)),
            (Profile::Spaced, 2) | (Profile::Spaced, 3) => Mutation::SetAvailability(false),
            (_, 2) => Mutation::SetCost(rng.random_range(1..=40) as f64),
            (_, 3) => Mutation::SetResponsiveness(rng.random_range(50..=500) as f64),
            (_, 4) => Mutation::AddElement {
                element: *[FunctionalElement::Operation, FunctionalElement::Binding]
                    .choose(&mut rng)
                    .expect("nonempty"),
                name: format!("extra{}", rng.random_range(0..3)),
            },
            _ => Mutation::RemoveElement {
                element: FunctionalElement::Operation,
                name: op,
            },
        };
        if profile == Profile::Spaced {
            // one fault per service keeps every change visible at the next poll
            if last_tick.contains_key(&service) {
                continue;
            }
            last_tick.insert(service.clone(), tick);
        }
        let kind = mutation.to_string().split('(').next().unwrap_or_default().to_owned();
        let key = (tick, service.clone(), kind);
        if !taken.insert(key) {
            continue;
        }
        faults.push(Fault { tick, service, mutation });
    }

    let mut scenario = Scenario {
        horizon,
        seed,
        services,
        orchestration: OrchestrationSpec { steps },
        policy: PolicySpec {
            criticality,
            backups,
            heartbeat_limit: Some(monitor.max_misses),
            floors: Thresholds::default(),
            new_service_mode: Default::default(),
        },
        monitor,
        faults,
    };
    // same-target collisions (two element edits with the same name) are rare;
    // drop later ones rather than reject the seed
    while let Err(e) = scenario.validate() {
        if scenario.faults.pop().is_none() {
            panic!("generated scenario {seed} invalid: {e}");
        }
    }
    scenario
}
