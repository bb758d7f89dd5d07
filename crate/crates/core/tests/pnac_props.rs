use proptest::prelude::*;
use renet_core::change_taxonomy::{AdaptiveChange, OrchestrationState, ServiceDescriptor, Wiring};
use renet_core::petri_core::{PetriNet, PlaceId};
use renet_core::pnac::{five_member_chain, invoke_transition, member_place, ConfigurationId, Pnac, END_PLACE};

#[derive(Clone, Debug)]
enum Op {
    Remove(usize),
    Add(usize, usize),
    Substitute(usize),
    Param(bool, usize),
    Instance(bool, usize),
    State(usize),
    Fire(usize),
}

fn op() -> impl Strategy<Value = Op> {
    prop_oneof![
        (0..8usize).prop_map(Op::Remove),
        (0..8usize, 0..8usize).prop_map(|(a, b)| Op::Add(a, b)),
        (0..8usize).prop_map(Op::Substitute),
        (any::<bool>(), 0..3usize).prop_map(|(a, i)| Op::Param(a, i)),
        (any::<bool>(), 0..3usize).prop_map(|(a, i)| Op::Instance(a, i)),
        (0..4usize).prop_map(Op::State),
        (0..8usize).prop_map(Op::Fire),
    ]
}

const STATES: [OrchestrationState; 4] = [
    OrchestrationState::Running,
    OrchestrationState::Paused,
    OrchestrationState::Terminated,
    OrchestrationState::Completed,
];

fn pick<T: Clone>(xs: &[T], i: usize) -> Option<T> {
    (!xs.is_empty()).then(|| xs[i % xs.len()].clone())
}

/// Applies `op` if it makes sense for the current net; `None` means skipped.
fn step(pnac: &Pnac, op: &Op, fresh: &mut usize) -> Option<(Pnac, bool)> {
    let members = pnac.members();
    let rewrite = |c: AdaptiveChange| pnac.apply_adaptive(&c).ok().map(|p| (p, true));
    match op {
        Op::Remove(i) => rewrite(AdaptiveChange::RemoveMember { service_id: pick(&members, *i)? }),
        Op::Add(a, b) => {
            *fresh += 1;
            let mut feeds = Vec::new();
            if let Some(m) = pick(&members, *a) {
                feeds.push(invoke_transition(&m));
            }
            let outputs = match pick(&members, *b) {
                Some(m) if *b % 2 == 0 => vec![member_place(&m)],
                _ => vec![PlaceId::new(END_PLACE)],
            };
            rewrite(AdaptiveChange::AddMember {
                descriptor: ServiceDescriptor::new(format!("N{fresh}")),
                wiring: Wiring { feeds, outputs },
            })
        }
        Op::Substitute(i) => {
            let from = pick(&members, *i)?;
            *fresh += 1;
            let to = ServiceDescriptor::new(format!("R{fresh}")).with_operations(pnac.invoked_ops(&from));
            rewrite(AdaptiveChange::ChangeServiceInstance { from, to })
        }
        Op::Param(add, i) => {
            let name = format!("q{i}");
            rewrite(if *add {
                AdaptiveChange::AddParameter { name }
            } else {
                AdaptiveChange::RemoveParameter { name }
            })
        }
        Op::Instance(add, i) => {
            let instance_id = format!("I{i}");
            rewrite(if *add {
                AdaptiveChange::AddInstance { instance_id }
            } else {
                AdaptiveChange::RemoveInstance { instance_id }
            })
        }
        Op::State(s) => rewrite(AdaptiveChange::ChangeState { state: STATES[*s] }),
        Op::Fire(i) => {
            let t = pick(&pnac.net().enabled_transitions(pnac.marking()), *i)?;
            Some((pnac.fire(&t).ok()?, false))
        }
    }
}

fn rebuilds(net: &PetriNet) -> bool {
    PetriNet::build(net.places(), net.transitions(), net.arcs()).as_ref() == Ok(net)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn rewrites_conserve_tokens_and_keep_nets_valid(ops in prop::collection::vec(op(), 1..30)) {
        let mut pnac = five_member_chain();
        let mut fresh = 0;
        let mut fired = false;
        for op in &ops {
            let Some((next, was_rewrite)) = step(&pnac, op, &mut fresh) else { continue };
            if was_rewrite {
                prop_assert_eq!(next.marking().total(), pnac.marking().total(), "{:?}", op);
                prop_assert_eq!(next.config().0, pnac.config().0 + 1);
            } else {
                fired = true;
                prop_assert_eq!(next.config(), pnac.config());
            }
            prop_assert!(next.net().check_marking(next.marking()).is_ok());
            prop_assert!(rebuilds(next.net()));
            pnac = next;
        }
        prop_assert_eq!(pnac.history().len(), pnac.config().0);
        let (net, marking) = pnac.configuration(pnac.config()).unwrap();
        prop_assert_eq!(&net, pnac.net());
        if !fired {
            prop_assert_eq!(&marking, pnac.marking());
        }
        prop_assert!(pnac.configuration(ConfigurationId(pnac.config().0 + 1)).is_err());
    }
}

#[test]
fn remove_then_add_member_sequence() {
    let c0 = five_member_chain();
    let c1 = c0.remove_service("WS5").unwrap();
    let wiring = Wiring {
        feeds: vec![invoke_transition("WS4")],
        outputs: vec![PlaceId::new(END_PLACE)],
    };
    let c2 = c1.add_service(&ServiceDescriptor::new("WSnew").with_operations(["op5"]), &wiring).unwrap();

    assert_eq!(c2.history(), ["remove:WS5", "add:WSnew"]);
    assert_eq!(c2.config(), ConfigurationId(2));
    let (n0, m0) = c2.configuration(ConfigurationId(0)).unwrap();
    let (n1, _) = c2.configuration(ConfigurationId(1)).unwrap();
    let (n2, m2) = c2.configuration(ConfigurationId(2)).unwrap();
    assert_eq!((&n0, &m0), (c0.net(), c0.marking()));
    assert_eq!(&n1, c1.net());
    assert_eq!((&n2, &m2), (c2.net(), c2.marking()));

    assert!(!n1.has_place(&member_place("WS5")));
    assert!(!n1.has_transition(&invoke_transition("WS5")));
    assert!(n2.has_place(&member_place("WSnew")));
    assert_eq!(c2.members(), ["WS1", "WS2", "WS3", "WS4", "WSnew"]);
    // WSnew sits where WS5 did: same shape up to renaming
    let rename = |s: &str| s.replace("WSnew", "WS5");
    assert_eq!(n2.structure_under(rename), n0.structure_under(|s| s.to_owned()));
    assert_eq!(m2.total(), m0.total());
}
