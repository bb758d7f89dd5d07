//! Place/transition nets with weighted arcs.
//!
//! A [`PetriNet`] is validated once at construction and never mutated
//! afterwards; firing returns a fresh [`Marking`]. Places and transitions
//! keep their insertion order, which fixes the row/column order of the
//! [`IncidenceMatrix`] and the exploration order of [`PetriNet::reachable`].

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use indexmap::{IndexMap, IndexSet};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PlaceId(String);

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TransitionId(String);

macro_rules! string_id {
    ($ty:ident) => {
        impl $ty {
            pub fn new(id: impl Into<String>) -> Self {
                Self(id.into())
            }

            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl From<&str> for $ty {
            fn from(s: &str) -> Self {
                Self(s.to_owned())
            }
        }

        impl From<String> for $ty {
            fn from(s: String) -> Self {
                Self(s)
            }
        }
    };
}

string_id!(PlaceId);
string_id!(TransitionId);

/// A place declaration: unique id, a human-readable label and an optional
/// capacity (a transition may not fire if it would push a place above it).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Place {
    pub id: PlaceId,
    pub label: String,
    pub capacity: Option<u64>,
}

impl Place {
    pub fn new(id: impl Into<PlaceId>, label: impl Into<String>) -> Self {
        Self {
            id: id.into(),
            label: label.into(),
            capacity: None,
        }
    }

    pub fn with_capacity(mut self, capacity: u64) -> Self {
        self.capacity = Some(capacity);
        self
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Transition {
    pub id: TransitionId,
    pub label: String,
}

impl Transition {
    pub fn new(id: impl Into<TransitionId>, label: impl Into<String>) -> Self {
        Self {
            id: id.into(),
            label: label.into(),
        }
    }
}

/// One entry of the flow relation.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Arc {
    /// Place to transition (consumes tokens).
    Input {
        place: PlaceId,
        transition: TransitionId,
        weight: u32,
    },
    /// Transition to place (produces tokens).
    Output {
        transition: TransitionId,
        place: PlaceId,
        weight: u32,
    },
}

impl Arc {
    pub fn input(place: impl Into<PlaceId>, transition: impl Into<TransitionId>, weight: u32) -> Self {
        Arc::Input {
            place: place.into(),
            transition: transition.into(),
            weight,
        }
    }

    pub fn output(transition: impl Into<TransitionId>, place: impl Into<PlaceId>, weight: u32) -> Self {
        Arc::Output {
            transition: transition.into(),
            place: place.into(),
            weight,
        }
    }

    pub fn place(&self) -> &PlaceId {
        match self {
            Arc::Input { place, .. } | Arc::Output { place, .. } => place,
        }
    }

    pub fn transition(&self) -> &TransitionId {
        match self {
            Arc::Input { transition, .. } | Arc::Output { transition, .. } => transition,
        }
    }

    pub fn weight(&self) -> u32 {
        match self {
            Arc::Input { weight, .. } | Arc::Output { weight, .. } => *weight,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PetriError {
    #[error("duplicate id `{0}`")]
    DuplicateId(String),
    #[error("id `{0}` is declared both as a place and as a transition")]
    PlaceTransitionOverlap(String),
    #[error("net has neither places nor transitions")]
    EmptyNet,
    #[error("arc {from} -> {to} references an undeclared node")]
    DanglingArc { from: String, to: String },
    #[error("arc {from} -> {to} is declared twice")]
    DuplicateArc { from: String, to: String },
    #[error("arc {from} -> {to} has weight 0")]
    ZeroWeight { from: String, to: String },
    #[error("unknown transition `{0}`")]
    UnknownTransition(TransitionId),
    #[error("unknown place `{0}`")]
    UnknownPlace(PlaceId),
    #[error("transition `{0}` is not enabled")]
    NotEnabled(TransitionId),
    #[error("reachability exceeded {max_states} states")]
    BoundExceeded { max_states: usize },
}

/// Token counts per place. Places with zero tokens are not stored, so two
/// markings compare equal exactly when every place holds the same count.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Marking {
    tokens: BTreeMap<PlaceId, u64>,
}

impl Marking {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_pairs<I, P>(pairs: I) -> Self
    where
        I: IntoIterator<Item = (P, u64)>,
        P: Into<PlaceId>,
    {
        let mut m = Self::new();
        for (p, n) in pairs {
            let p = p.into();
            let cur = m.get(&p);
            m.set(p, cur + n);
        }
        m
    }

    pub fn get(&self, place: &PlaceId) -> u64 {
        self.tokens.get(place).copied().unwrap_or(0)
    }

    pub fn set(&mut self, place: PlaceId, count: u64) {
        if count == 0 {
            self.tokens.remove(&place);
        } else {
            self.tokens.insert(place, count);
        }
    }

    pub fn add(&mut self, place: &PlaceId, count: u64) {
        let cur = self.get(place);
        self.set(place.clone(), cur + count);
    }

    /// Removes `count` tokens; `None` if the place holds fewer.
    pub fn take(&mut self, place: &PlaceId, count: u64) -> Option<()> {
        let cur = self.get(place);
        let rest = cur.checked_sub(count)?;
        self.set(place.clone(), rest);
        Some(())
    }

    pub fn total(&self) -> u64 {
        self.tokens.values().sum()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// Nonzero entries in place-id order.
    pub fn iter(&self) -> impl Iterator<Item = (&PlaceId, u64)> {
        self.tokens.iter().map(|(p, n)| (p, *n))
    }
}

impl fmt::Display for Marking {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (p, n)) in self.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{p}:{n}")?;
        }
        f.write_str("}")
    }
}

/// Entry `(p, t)` is `w(t→p) − w(p→t)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IncidenceMatrix {
    pub rows: Vec<PlaceId>,
    pub cols: Vec<TransitionId>,
    pub entries: Vec<Vec<i64>>,
}

impl IncidenceMatrix {
    pub fn entry(&self, place: &PlaceId, transition: &TransitionId) -> Option<i64> {
        let r = self.rows.iter().position(|p| p == place)?;
        let c = self.cols.iter().position(|t| t == transition)?;
        Some(self.entries[r][c])
    }

    pub fn column(&self, transition: &TransitionId) -> Option<Vec<i64>> {
        let c = self.cols.iter().position(|t| t == transition)?;
        Some(self.entries.iter().map(|row| row[c]).collect())
    }

    /// Evaluates `m0 + C·σ` for a firing-count vector `σ` (missing
    /// transitions count zero). Returns `None` if any place would go
    /// negative.
    pub fn state_equation(&self, m0: &Marking, counts: &BTreeMap<TransitionId, u64>) -> Option<Marking> {
        let mut out = Marking::new();
        for (r, place) in self.rows.iter().enumerate() {
            let mut v = m0.get(place) as i128;
            for (c, t) in self.cols.iter().enumerate() {
                let k = counts.get(t).copied().unwrap_or(0) as i128;
                v += self.entries[r][c] as i128 * k;
            }
            if v < 0 {
                return None;
            }
            out.set(place.clone(), v as u64);
        }
        Some(out)
    }
}

/// Limits for [`PetriNet::reachable`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ReachBounds {
    pub max_depth: usize,
    pub max_states: usize,
}

impl Default for ReachBounds {
    fn default() -> Self {
        Self {
            max_depth: 16,
            max_states: 10_000,
        }
    }
}

/// Markings found by breadth-first exploration, in discovery order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReachSet {
    pub markings: IndexSet<Marking>,
    /// False if some marking at `max_depth` still had an enabled transition
    /// leading to a marking not yet seen.
    pub complete: bool,
}

impl ReachSet {
    pub fn len(&self) -> usize {
        self.markings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.markings.is_empty()
    }

    pub fn contains(&self, m: &Marking) -> bool {
        self.markings.contains(m)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PetriNet {
    places: IndexMap<PlaceId, (String, Option<u64>)>,
    transitions: IndexMap<TransitionId, String>,
    // per transition, (place, weight) sorted by place insertion index
    preset: IndexMap<TransitionId, Vec<(PlaceId, u32)>>,
    postset: IndexMap<TransitionId, Vec<(PlaceId, u32)>>,
}

impl PetriNet {
    /// Validates and builds a net.
    pub fn build(
        places: impl IntoIterator<Item = Place>,
        transitions: impl IntoIterator<Item = Transition>,
        arcs: impl IntoIterator<Item = Arc>,
    ) -> Result<Self, PetriError> {
        let mut place_map = IndexMap::new();
        for p in places {
            if place_map.insert(p.id.clone(), (p.label, p.capacity)).is_some() {
                return Err(PetriError::DuplicateId(p.id.0));
            }
        }
        let mut trans_map = IndexMap::new();
        for t in transitions {
            if place_map.contains_key(&PlaceId::new(t.id.as_str())) {
                return Err(PetriError::PlaceTransitionOverlap(t.id.0));
            }
            if trans_map.insert(t.id.clone(), t.label).is_some() {
                return Err(PetriError::DuplicateId(t.id.0));
            }
        }
        if place_map.is_empty() && trans_map.is_empty() {
            return Err(PetriError::EmptyNet);
        }

        let mut pre: BTreeMap<TransitionId, BTreeMap<usize, (PlaceId, u32)>> = BTreeMap::new();
        let mut post: BTreeMap<TransitionId, BTreeMap<usize, (PlaceId, u32)>> = BTreeMap::new();
        for arc in arcs {
            let (from, to) = match &arc {
                Arc::Input { place, transition, .. } => (place.0.clone(), transition.0.clone()),
                Arc::Output { transition, place, .. } => (transition.0.clone(), place.0.clone()),
            };
            let (Some(pidx), true) = (
                place_map.get_index_of(arc.place()),
                trans_map.contains_key(arc.transition()),
            ) else {
                return Err(PetriError::DanglingArc { from, to });
            };
            if arc.weight() == 0 {
                return Err(PetriError::ZeroWeight { from, to });
            }
            let side = match arc {
                Arc::Input { .. } => &mut pre,
                Arc::Output { .. } => &mut post,
            };
            let slot = side.entry(arc.transition().clone()).or_default();
            if slot.insert(pidx, (arc.place().clone(), arc.weight())).is_some() {
                return Err(PetriError::DuplicateArc { from, to });
            }
        }

        let collect = |side: &mut BTreeMap<TransitionId, BTreeMap<usize, (PlaceId, u32)>>| {
            trans_map
                .keys()
                .map(|t| {
                    let arcs = side.remove(t).map(|m| m.into_values().collect()).unwrap_or_default();
                    (t.clone(), arcs)
                })
                .collect::<IndexMap<_, _>>()
        };
        let preset = collect(&mut pre);
        let postset = collect(&mut post);
        Ok(Self {
            places: place_map,
            transitions: trans_map,
            preset,
            postset,
        })
    }

    pub fn places(&self) -> impl Iterator<Item = Place> + '_ {
        self.places.iter().map(|(id, (label, capacity))| Place {
            id: id.clone(),
            label: label.clone(),
            capacity: *capacity,
        })
    }

    pub fn transitions(&self) -> impl Iterator<Item = Transition> + '_ {
        self.transitions
            .iter()
            .map(|(id, label)| Transition::new(id.clone(), label.clone()))
    }

    pub fn place_ids(&self) -> impl Iterator<Item = &PlaceId> {
        self.places.keys()
    }

    pub fn transition_ids(&self) -> impl Iterator<Item = &TransitionId> {
        self.transitions.keys()
    }

    pub fn place_count(&self) -> usize {
        self.places.len()
    }

    pub fn transition_count(&self) -> usize {
        self.transitions.len()
    }

    pub fn has_place(&self, p: &PlaceId) -> bool {
        self.places.contains_key(p)
    }

    pub fn has_transition(&self, t: &TransitionId) -> bool {
        self.transitions.contains_key(t)
    }

    pub fn place_label(&self, p: &PlaceId) -> Option<&str> {
        self.places.get(p).map(|(label, _)| label.as_str())
    }

    pub fn capacity(&self, p: &PlaceId) -> Option<u64> {
        self.places.get(p).and_then(|(_, c)| *c)
    }

    pub fn transition_label(&self, t: &TransitionId) -> Option<&str> {
        self.transitions.get(t).map(String::as_str)
    }

    /// Input arcs of `t` as `(place, weight)`, in place order.
    pub fn inputs(&self, t: &TransitionId) -> Result<&[(PlaceId, u32)], PetriError> {
        self.preset
            .get(t)
            .map(Vec::as_slice)
            .ok_or_else(|| PetriError::UnknownTransition(t.clone()))
    }

    pub fn outputs(&self, t: &TransitionId) -> Result<&[(PlaceId, u32)], PetriError> {
        self.postset
            .get(t)
            .map(Vec::as_slice)
            .ok_or_else(|| PetriError::UnknownTransition(t.clone()))
    }

    /// All arcs: for each transition in order, its inputs then its outputs.
    pub fn arcs(&self) -> Vec<Arc> {
        let mut out = Vec::new();
        for t in self.transitions.keys() {
            for (p, w) in &self.preset[t] {
                out.push(Arc::input(p.clone(), t.clone(), *w));
            }
            for (p, w) in &self.postset[t] {
                out.push(Arc::output(t.clone(), p.clone(), *w));
            }
        }
        out
    }

    /// Number of arcs touching `t`.
    pub fn degree(&self, t: &TransitionId) -> usize {
        self.preset.get(t).map_or(0, Vec::len) + self.postset.get(t).map_or(0, Vec::len)
    }

    /// Checks that every marked place belongs to this net.
    pub fn check_marking(&self, m: &Marking) -> Result<(), PetriError> {
        match m.iter().find(|(p, _)| !self.has_place(p)) {
            Some((p, _)) => Err(PetriError::UnknownPlace(p.clone())),
            None => Ok(()),
        }
    }

    /// Every input place holds at least the arc weight, and no capacity
    /// would be exceeded after firing.
    pub fn enabled(&self, m: &Marking, t: &TransitionId) -> Result<bool, PetriError> {
        let inputs = self.inputs(t)?;
        if !inputs.iter().all(|(p, w)| m.get(p) >= u64::from(*w)) {
            return Ok(false);
        }
        for (p, w) in &self.postset[t] {
            let Some(cap) = self.capacity(p) else { continue };
            let consumed = inputs.iter().find(|(q, _)| q == p).map_or(0, |(_, v)| u64::from(*v));
            if m.get(p) - consumed + u64::from(*w) > cap {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Transitions enabled at `m`, in insertion order.
    pub fn enabled_transitions(&self, m: &Marking) -> Vec<TransitionId> {
        self.transitions
            .keys()
            .filter(|t| self.enabled(m, t).unwrap_or(false))
            .cloned()
            .collect()
    }

    pub fn fire(&self, m: &Marking, t: &TransitionId) -> Result<Marking, PetriError> {
        if !self.enabled(m, t)? {
            return Err(PetriError::NotEnabled(t.clone()));
        }
        let mut next = m.clone();
        for (p, w) in &self.preset[t] {
            next.take(p, u64::from(*w)).expect("enabledness checked");
        }
        for (p, w) in &self.postset[t] {
            next.add(p, u64::from(*w));
        }
        Ok(next)
    }

    /// Fires a sequence left to right.
    pub fn fire_sequence<'a>(
        &self,
        m: &Marking,
        seq: impl IntoIterator<Item = &'a TransitionId>,
    ) -> Result<Marking, PetriError> {
        seq.into_iter().try_fold(m.clone(), |cur, t| self.fire(&cur, t))
    }

    pub fn incidence_matrix(&self) -> IncidenceMatrix {
        let rows: Vec<PlaceId> = self.places.keys().cloned().collect();
        let cols: Vec<TransitionId> = self.transitions.keys().cloned().collect();
        let mut entries = vec![vec![0i64; cols.len()]; rows.len()];
        for (c, t) in cols.iter().enumerate() {
            for (p, w) in &self.preset[t] {
                let r = self.places.get_index_of(p).expect("validated");
                entries[r][c] -= i64::from(*w);
            }
            for (p, w) in &self.postset[t] {
                let r = self.places.get_index_of(p).expect("validated");
                entries[r][c] += i64::from(*w);
            }
        }
        IncidenceMatrix { rows, cols, entries }
    }

    /// Same net with every arc direction flipped.
    pub fn reversed(&self) -> Self {
        Self {
            places: self.places.clone(),
            transitions: self.transitions.clone(),
            preset: self.postset.clone(),
            postset: self.preset.clone(),
        }
    }

    /// Breadth-first exploration from `m0`. Successors are generated in
    /// transition insertion order.
    pub fn reachable(&self, m0: &Marking, bounds: ReachBounds) -> Result<ReachSet, PetriError> {
        self.check_marking(m0)?;
        let mut seen = IndexSet::new();
        seen.insert(m0.clone());
        let mut queue = VecDeque::from([(m0.clone(), 0usize)]);
        let mut complete = true;
        while let Some((m, depth)) = queue.pop_front() {
            for t in self.enabled_transitions(&m) {
                let next = self.fire(&m, &t)?;
                if seen.contains(&next) {
                    continue;
                }
                if depth == bounds.max_depth {
                    complete = false;
                    continue;
                }
                if seen.len() == bounds.max_states {
                    return Err(PetriError::BoundExceeded {
                        max_states: bounds.max_states,
                    });
                }
                seen.insert(next.clone());
                queue.push_back((next, depth + 1));
            }
        }
        Ok(ReachSet { markings: seen, complete })
    }

    /// Order-independent structural fingerprint: labels are ignored, ids are
    /// passed through `rename` first.
    pub fn structure_under(&self, rename: impl Fn(&str) -> String) -> NetStructure {
        NetStructure {
            places: self.places.keys().map(|p| rename(p.as_str())).collect(),
            transitions: self.transitions.keys().map(|t| rename(t.as_str())).collect(),
            arcs: self
                .arcs()
                .into_iter()
                .map(|a| match a {
                    Arc::Input { place, transition, weight } => {
                        (rename(place.as_str()), rename(transition.as_str()), weight)
                    }
                    Arc::Output { transition, place, weight } => {
                        (rename(transition.as_str()), rename(place.as_str()), weight)
                    }
                })
                .collect(),
        }
    }
}

/// See [`PetriNet::structure_under`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NetStructure {
    pub places: BTreeSet<String>,
    pub transitions: BTreeSet<String>,
    pub arcs: BTreeSet<(String, String, u32)>,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line_net(w_in: u32) -> PetriNet {
        PetriNet::build(
            [Place::new("p1", "p1"), Place::new("p2", "p2")],
            [Transition::new("t", "t")],
            [Arc::input("p1", "t", w_in), Arc::output("t", "p2", 1)],
        )
        .unwrap()
    }

    fn t(id: &str) -> TransitionId {
        TransitionId::new(id)
    }

    #[test]
    fn minimal_valid_net() {
        let net = PetriNet::build([Place::new("p", "p")], [], []).unwrap();
        assert_eq!(net.place_count(), 1);
        assert_eq!(net.transition_count(), 0);
    }

    #[test]
    fn rejects_shared_place_transition_id() {
        let err = PetriNet::build([Place::new("p", "p")], [Transition::new("p", "p")], []).unwrap_err();
        assert_eq!(err, PetriError::PlaceTransitionOverlap("p".into()));
    }

    #[test]
    fn rejects_empty_net() {
        assert_eq!(PetriNet::build([], [], []).unwrap_err(), PetriError::EmptyNet);
    }

    #[test]
    fn rejects_duplicates_dangling_and_zero_weight() {
        let err = PetriNet::build([Place::new("p", "a"), Place::new("p", "b")], [], []).unwrap_err();
        assert_eq!(err, PetriError::DuplicateId("p".into()));

        let err = PetriNet::build([Place::new("p", "p")], [Transition::new("t", "t")], [Arc::input("q", "t", 1)])
            .unwrap_err();
        assert!(matches!(err, PetriError::DanglingArc { .. }));

        let err = PetriNet::build([Place::new("p", "p")], [Transition::new("t", "t")], [Arc::input("p", "t", 0)])
            .unwrap_err();
        assert!(matches!(err, PetriError::ZeroWeight { .. }));

        let err = PetriNet::build(
            [Place::new("p", "p")],
            [Transition::new("t", "t")],
            [Arc::input("p", "t", 1), Arc::input("p", "t", 2)],
        )
        .unwrap_err();
        assert!(matches!(err, PetriError::DuplicateArc { .. }));
    }

    #[test]
    fn enabledness() {
        let net = line_net(1);
        assert!(net.enabled(&Marking::from_pairs([("p1", 1)]), &t("t")).unwrap());
        assert!(!net.enabled(&Marking::new(), &t("t")).unwrap());
        assert_eq!(
            net.enabled(&Marking::new(), &t("nope")),
            Err(PetriError::UnknownTransition(t("nope")))
        );
    }

    #[test]
    fn weight_two_needs_two_tokens() {
        let net = line_net(2);
        let m = Marking::from_pairs([("p1", 1)]);
        // one-step enumeration: no transition has a successor at m
        let successors: Vec<_> = net
            .transition_ids()
            .filter_map(|t| net.fire(&m, t).ok())
            .collect();
        assert!(successors.is_empty());
        assert!(!net.enabled(&m, &t("t")).unwrap());
        assert!(net.enabled(&Marking::from_pairs([("p1", 2)]), &t("t")).unwrap());
    }

    #[test]
    fn fire_moves_token_and_keeps_input() {
        let net = line_net(1);
        let m = Marking::from_pairs([("p1", 1)]);
        let next = net.fire(&m, &t("t")).unwrap();
        assert_eq!(next, Marking::from_pairs([("p1", 0), ("p2", 1)]));
        assert_eq!(m, Marking::from_pairs([("p1", 1)]));
        assert_eq!(net.fire(&next, &t("t")), Err(PetriError::NotEnabled(t("t"))));
    }

    #[test]
    fn source_transition_produces_outputs() {
        let net = PetriNet::build(
            [Place::new("out", "out")],
            [Transition::new("src", "src")],
            [Arc::output("src", "out", 3)],
        )
        .unwrap();
        let next = net.fire(&Marking::new(), &t("src")).unwrap();
        assert_eq!(next, Marking::from_pairs([("out", 3)]));
    }

    #[test]
    fn incidence_of_line_and_arcless_nets() {
        let c = line_net(1).incidence_matrix();
        assert_eq!(c.rows, vec![PlaceId::new("p1"), PlaceId::new("p2")]);
        assert_eq!(c.column(&t("t")).unwrap(), vec![-1, 1]);

        let net = PetriNet::build(
            [Place::new("a", "a"), Place::new("b", "b")],
            [Transition::new("x", "x"), Transition::new("y", "y")],
            [],
        )
        .unwrap();
        let c = net.incidence_matrix();
        assert!(c.entries.iter().flatten().all(|&e| e == 0));
        assert_eq!((c.entries.len(), c.entries[0].len()), (2, 2));
    }

    #[test]
    fn reachability_small_cases() {
        let net = line_net(1);
        let r = net
            .reachable(
                &Marking::from_pairs([("p1", 1)]),
                ReachBounds {
                    max_depth: 2,
                    max_states: 10,
                },
            )
            .unwrap();
        let expected: IndexSet<_> = [Marking::from_pairs([("p1", 1)]), Marking::from_pairs([("p2", 1)])]
            .into_iter()
            .collect();
        assert_eq!(r.markings, expected);
        assert!(r.complete);

        let dead = net.reachable(&Marking::new(), ReachBounds::default()).unwrap();
        assert_eq!(dead.len(), 1);
    }

    #[test]
    fn reachability_signals_state_bound_and_open_depth() {
        let net = PetriNet::build(
            [Place::new("out", "out")],
            [Transition::new("src", "src")],
            [Arc::output("src", "out", 1)],
        )
        .unwrap();
        let err = net
            .reachable(
                &Marking::new(),
                ReachBounds {
                    max_depth: 100,
                    max_states: 5,
                },
            )
            .unwrap_err();
        assert_eq!(err, PetriError::BoundExceeded { max_states: 5 });

        let r = net
            .reachable(
                &Marking::new(),
                ReachBounds {
                    max_depth: 3,
                    max_states: 100,
                },
            )
            .unwrap();
        assert_eq!(r.len(), 4);
        assert!(!r.complete);
    }

    #[test]
    fn reversed_fire_restores() {
        let net = line_net(2);
        let m = Marking::from_pairs([("p1", 3)]);
        let next = net.fire(&m, &t("t")).unwrap();
        let back = net.reversed().fire(&next, &t("t")).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn capacity_blocks_overfilling() {
        let net = PetriNet::build(
            [Place::new("src", "src"), Place::new("dst", "dst").with_capacity(1)],
            [Transition::new("t", "t")],
            [Arc::input("src", "t", 1), Arc::output("t", "dst", 1)],
        )
        .unwrap();
        let m = Marking::from_pairs([("src", 3)]);
        let m1 = net.fire(&m, &t("t")).unwrap();
        assert_eq!(net.fire(&m1, &t("t")), Err(PetriError::NotEnabled(t("t"))));
        assert_eq!(net.reachable(&m, ReachBounds::default()).unwrap().len(), 2);
    }

    #[test]
    fn marking_display_is_sorted() {
        let m = Marking::from_pairs([("b", 2), ("a", 1), ("c", 0)]);
        assert_eq!(m.to_string(), "{a:1, b:2}");
    }
}
