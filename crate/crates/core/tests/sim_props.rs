use std::collections::BTreeMap;

use renet_core::adaptor::Reaction;
use renet_core::change_taxonomy::OrchestrationState;
use renet_core::monitor::DetectionMode;
use renet_core::sim::generate::{random_scenario, Profile};
use renet_core::sim::{run, EventKind, Mutation, RunOutcome, Scenario, SimError};

const SEEDS: u64 = 60;
const PROFILES: [Profile; 3] = [Profile::Chaotic, Profile::Recoverable, Profile::Spaced];

fn outcome(s: &Scenario) -> Option<RunOutcome> {
    match run(s) {
        Ok(o) => Some(o),
        Err(SimError::HorizonExceeded { .. }) => None,
        Err(e) => panic!("seed {}: {e}", s.seed),
    }
}

#[test]
fn runs_are_deterministic() {
    for p in PROFILES {
        for seed in 0..SEEDS {
            let s = random_scenario(seed, p);
            let a = run(&s).map(|o| o.trace.to_text());
            let b = run(&s).map(|o| o.trace.to_text());
            match (a, b) {
                (Ok(a), Ok(b)) => assert_eq!(a, b, "{p:?} seed {seed}"),
                (Err(SimError::HorizonExceeded { trace: a, .. }), Err(SimError::HorizonExceeded { trace: b, .. })) => {
                    assert_eq!(a, b)
                }
                other => panic!("{p:?} seed {seed}: diverging results {other:?}"),
            }
        }
    }
}

#[test]
fn recoverable_runs_complete() {
    for seed in 0..SEEDS * 2 {
        let s = random_scenario(seed, Profile::Recoverable);
        let o = run(&s).unwrap_or_else(|e| panic!("seed {seed}: {e}"));
        assert_eq!(o.state, OrchestrationState::Completed, "seed {seed}\n{}", o.trace);
    }
}

/// Availability of each service at the start of tick `t`, replayed from the
/// scenario's own mutation lists.
fn available_at(s: &Scenario, service: &str, t: u64) -> bool {
    let mut up = s.service(service).unwrap().descriptor.availability;
    let mut events: Vec<(u64, &Mutation)> = s
        .service(service)
        .unwrap()
        .timeline
        .iter()
        .map(|m| (m.tick, &m.mutation))
        .chain(s.faults.iter().filter(|f| f.service == service).map(|f| (f.tick, &f.mutation)))
        .collect();
    events.sort_by_key(|e| e.0);
    for (tick, m) in events {
        if tick > t {
            break;
        }
        if let Mutation::SetAvailability(b) = m {
            up = *b;
        }
    }
    up
}

#[test]
fn steps_never_start_on_unavailable_services() {
    for p in PROFILES {
        for seed in 0..SEEDS {
            let s = random_scenario(seed, p);
            let Some(o) = outcome(&s) else { continue };
            for e in o.trace.iter() {
                if let EventKind::StepStarted { service, .. } = &e.kind {
                    assert!(available_at(&s, service, e.tick), "{p:?} seed {seed}: {e}");
                }
            }
        }
    }
}

#[test]
fn spaced_changes_are_detected_within_one_poll_interval() {
    let mut measured = 0;
    for seed in 0..SEEDS * 2 {
        let s = random_scenario(seed, Profile::Spaced);
        assert_eq!(s.monitor.mode, DetectionMode::Poll);
        let Some(o) = outcome(&s) else { continue };
        let last = o.trace.events.last().unwrap().tick;
        let k = s.monitor.poll_interval;
        for f in &s.faults {
            let before = s.service(&f.service).unwrap().descriptor.clone();
            let mut after = before.clone();
            f.mutation.apply(&mut after);
            let poll = f.tick.div_ceil(k) * k;
            if before == after || poll > last {
                continue;
            }
            let detected = o
                .reports
                .iter()
                .filter(|r| r.service_id == f.service && r.tick >= f.tick)
                .map(|r| r.tick)
                .min()
                .unwrap_or_else(|| panic!("seed {seed}: {} at {} never detected", f.mutation, f.tick));
            assert!(detected - f.tick < k, "seed {seed}: latency {} with interval {k}", detected - f.tick);
            measured += 1;
        }
    }
    assert!(measured >= 50, "only {measured} observable faults");
}

#[test]
fn reports_carry_well_formed_matrices() {
    for p in PROFILES {
        for seed in 0..SEEDS {
            let s = random_scenario(seed, p);
            let Some(o) = outcome(&s) else { continue };
            for r in &o.reports {
                assert!(!r.changes.is_empty());
                assert!(r.matrices().count() >= 1);
                let mut fired = Vec::new();
                for m in r.matrices() {
                    assert!(m.is_well_formed(), "{r}");
                    fired.extend(m.fired());
                }
                fired.sort();
                let mut expected = r.fired.clone();
                expected.sort();
                assert_eq!(fired, expected);
            }
        }
    }
}

#[test]
fn history_and_trace_agree() {
    for p in PROFILES {
        for seed in 0..SEEDS {
            let s = random_scenario(seed, p);
            let Some(o) = outcome(&s) else { continue };
            assert!(o.trace.is_well_formed(), "{p:?} seed {seed}");
            let rules: Vec<(usize, String)> = o
                .trace
                .iter()
                .filter_map(|e| match &e.kind {
                    EventKind::RuleApplied { config, rule_id } => Some((config.0, rule_id.clone())),
                    _ => None,
                })
                .collect();
            assert_eq!(rules.len(), o.pnac.history().len());
            assert_eq!(rules.len(), o.pnac.config().0);
            for (i, (k, id)) in rules.iter().enumerate() {
                assert_eq!(*k, i + 1);
                assert_eq!(id, o.pnac.history()[i]);
            }
            let mut substitutions: BTreeMap<String, usize> = BTreeMap::new();
            for e in o.trace.iter() {
                if let EventKind::ReactionTaken(Reaction::Substitute { from, to }) = &e.kind {
                    *substitutions.entry(format!("substitute:{from}->{to}")).or_default() += 1;
                }
            }
            for (rule, n) in &substitutions {
                let applied = rules.iter().filter(|(_, id)| id == rule).count();
                assert_eq!(applied, *n, "{p:?} seed {seed}: {rule}");
            }
            let all_subs = rules.iter().filter(|(_, id)| id.starts_with("substitute:")).count();
            assert_eq!(all_subs, substitutions.values().sum::<usize>());
        }
    }
}
