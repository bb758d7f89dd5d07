//! Per-service handling-change nets.
//!
//! Each service gets two nets. The non-functional net has a central place
//! `PS` holding one token per attribute (availability, reliability, cost,
//! responsiveness); firing `θ_X` moves that token to `PS-X`. The functional
//! net has a central place `P` holding one token per element/polarity pair
//! (`θ_T+`, `θ_T-`, …, `θ_B-`), each moving to its own `±` place. Every
//! postcondition place has capacity 1, so each change type fires at most
//! once until the marking is reset (one epoch).

use std::fmt;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::change_taxonomy::{FunctionalElement, HandlingChange, NonFunctionalAttr};
use crate::petri_core::{Arc, Marking, PetriError, PetriNet, Place, PlaceId, Transition, TransitionId};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PnhKind {
    NonFunctional,
    Functional,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Polarity {
    Add,
    Remove,
}

impl Polarity {
    fn sign(self) -> char {
        match self {
            Polarity::Add => '+',
            Polarity::Remove => '-',
        }
    }
}

/// Semantic name of a PNH place.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SemanticPlace {
    /// `PS`, the non-functional input place.
    Ps,
    /// `PS-A`, `PS-R`, `PS-C`, `PS-Re`.
    Altered(NonFunctionalAttr),
    /// `P`, the functional input place.
    P,
    /// `PT+`, `PT-`, `PM+`, …, `PB-`.
    Element(FunctionalElement, Polarity),
}

impl SemanticPlace {
    /// Label used in the `WS'…` matrix layout.
    pub fn matrix_label(self) -> String {
        match self {
            SemanticPlace::Ps | SemanticPlace::P => "WS".to_owned(),
            SemanticPlace::Altered(a) => format!("WS'{}", a.code()),
            SemanticPlace::Element(e, pol) => format!("WS'{}{}", e.code(), pol.sign()),
        }
    }
}

impl fmt::Display for SemanticPlace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SemanticPlace::Ps => f.write_str("PS"),
            SemanticPlace::Altered(a) => write!(f, "PS-{}", a.code()),
            SemanticPlace::P => f.write_str("P"),
            SemanticPlace::Element(e, pol) => write!(f, "P{}{}", e.code(), pol.sign()),
        }
    }
}

/// θ symbol naming one change transition.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ChangeSymbol {
    Attr(NonFunctionalAttr),
    Element(FunctionalElement, Polarity),
}

impl ChangeSymbol {
    pub fn for_change(change: &HandlingChange) -> Self {
        match change {
            HandlingChange::NonFunctional { attr, .. } => ChangeSymbol::Attr(*attr),
            HandlingChange::Add { elem, .. } => ChangeSymbol::Element(*elem, Polarity::Add),
            HandlingChange::Remove { elem, .. } => ChangeSymbol::Element(*elem, Polarity::Remove),
        }
    }

    pub fn kind(self) -> PnhKind {
        match self {
            ChangeSymbol::Attr(_) => PnhKind::NonFunctional,
            ChangeSymbol::Element(..) => PnhKind::Functional,
        }
    }

    /// Place the token lands in when this symbol fires.
    pub fn target(self) -> SemanticPlace {
        match self {
            ChangeSymbol::Attr(a) => SemanticPlace::Altered(a),
            ChangeSymbol::Element(e, p) => SemanticPlace::Element(e, p),
        }
    }

    /// Every symbol of one net kind, in column order.
    pub fn all(kind: PnhKind) -> Vec<ChangeSymbol> {
        match kind {
            PnhKind::NonFunctional => NonFunctionalAttr::ALL.into_iter().map(ChangeSymbol::Attr).collect(),
            PnhKind::Functional => FunctionalElement::ALL
                .into_iter()
                .flat_map(|e| [ChangeSymbol::Element(e, Polarity::Add), ChangeSymbol::Element(e, Polarity::Remove)])
                .collect(),
        }
    }
}

impl fmt::Display for ChangeSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ChangeSymbol::Attr(a) => write!(f, "θ_{}", a.code()),
            ChangeSymbol::Element(e, p) => write!(f, "θ_{}{}", e.code(), p.sign()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PnhError {
    #[error("{got:?} change applied to a {expected:?} net")]
    KindMismatch { expected: PnhKind, got: PnhKind },
    #[error("{0} already fired in this epoch")]
    NotEnabled(ChangeSymbol),
    #[error("change {0} has no transition in this net")]
    UnknownChange(String),
    #[error("symbol {0} does not belong to this net")]
    UnknownSymbol(ChangeSymbol),
    #[error(transparent)]
    Net(#[from] PetriError),
}

/// A handling-change net for one service.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Pnh {
    pub service_id: String,
    pub kind: PnhKind,
    pub net: PetriNet,
    pub p0: PlaceId,
    pub pn: PlaceId,
    pub place_index: IndexMap<SemanticPlace, PlaceId>,
    pub transition_index: IndexMap<ChangeSymbol, TransitionId>,
    initial: Marking,
}

fn build(service_id: &str, kind: PnhKind) -> (Pnh, Marking) {
    let center = match kind {
        PnhKind::NonFunctional => SemanticPlace::Ps,
        PnhKind::Functional => SemanticPlace::P,
    };
    let symbols = ChangeSymbol::all(kind);
    let place_id = |sp: SemanticPlace| PlaceId::new(format!("{service_id}/{sp}"));
    let trans_id = |s: ChangeSymbol| TransitionId::new(format!("{service_id}/{s}"));

    let mut place_index = IndexMap::new();
    place_index.insert(center, place_id(center));
    for s in &symbols {
        place_index.insert(s.target(), place_id(s.target()));
    }
    let transition_index: IndexMap<_, _> = symbols.iter().map(|s| (*s, trans_id(*s))).collect();

    let p0 = place_index[&center].clone();
    let places = place_index.iter().map(|(sp, id)| {
        let place = Place::new(id.clone(), sp.to_string());
        if *sp == center {
            place
        } else {
            place.with_capacity(1)
        }
    });
    let transitions = transition_index.iter().map(|(s, id)| Transition::new(id.clone(), s.to_string()));
    let arcs = transition_index.iter().flat_map(|(s, id)| {
        [
            Arc::input(p0.clone(), id.clone(), 1),
            Arc::output(id.clone(), place_index[&s.target()].clone(), 1),
        ]
    });
    let net = PetriNet::build(places, transitions, arcs).expect("PNH layout is valid by construction");
    let initial = Marking::from_pairs([(p0.clone(), symbols.len() as u64)]);
    let pnh = Pnh {
        service_id: service_id.to_owned(),
        kind,
        net,
        pn: p0.clone(),
        p0,
        place_index,
        transition_index,
        initial: initial.clone(),
    };
    (pnh, initial)
}

/// Five places, four transitions, `{PS: 4}`.
pub fn build_nonfunctional_pnh(service_id: &str) -> (Pnh, Marking) {
    build(service_id, PnhKind::NonFunctional)
}

/// Thirteen places, twelve transitions, `{P: 12}`.
pub fn build_functional_pnh(service_id: &str) -> (Pnh, Marking) {
    build(service_id, PnhKind::Functional)
}

impl Pnh {
    pub fn initial_marking(&self) -> &Marking {
        &self.initial
    }

    pub fn place(&self, sp: SemanticPlace) -> Option<&PlaceId> {
        self.place_index.get(&sp)
    }

    pub fn transition(&self, s: ChangeSymbol) -> Option<&TransitionId> {
        self.transition_index.get(&s)
    }

    /// Fires the transition for `change`.
    pub fn apply_handling_change(
        &self,
        marking: &Marking,
        change: &HandlingChange,
    ) -> Result<(Marking, ChangeSymbol), PnhError> {
        let symbol = ChangeSymbol::for_change(change);
        if symbol.kind() != self.kind {
            return Err(PnhError::KindMismatch {
                expected: self.kind,
                got: symbol.kind(),
            });
        }
        let t = self
            .transition(symbol)
            .ok_or_else(|| PnhError::UnknownChange(change.to_string()))?;
        match self.net.fire(marking, t) {
            Ok(m) => Ok((m, symbol)),
            Err(PetriError::NotEnabled(_)) => Err(PnhError::NotEnabled(symbol)),
            Err(e) => Err(e.into()),
        }
    }

    /// Change matrix in the `WS'…` layout: rows are the postcondition places
    /// followed by the input place, columns are every symbol of this net.
    pub fn change_matrix(&self, fired: &[ChangeSymbol]) -> Result<ChangeMatrix, PnhError> {
        if let Some(bad) = fired.iter().find(|s| !self.transition_index.contains_key(*s)) {
            return Err(PnhError::UnknownSymbol(*bad));
        }
        let cols = ChangeSymbol::all(self.kind);
        let center = match self.kind {
            PnhKind::NonFunctional => SemanticPlace::Ps,
            PnhKind::Functional => SemanticPlace::P,
        };
        let mut rows: Vec<SemanticPlace> = cols.iter().map(|s| s.target()).collect();
        rows.push(center);
        let mut entries = vec![vec![0i8; cols.len()]; rows.len()];
        let last = rows.len() - 1;
        for (c, s) in cols.iter().enumerate() {
            if fired.contains(s) {
                let r = rows.iter().position(|p| *p == s.target()).expect("target row exists");
                entries[r][c] = 1;
                entries[last][c] = -1;
            }
        }
        Ok(ChangeMatrix {
            kind: self.kind,
            rows,
            cols,
            entries,
        })
    }
}

/// A fired-change matrix over the semantic places of one PNH.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChangeMatrix {
    pub kind: PnhKind,
    pub rows: Vec<SemanticPlace>,
    pub cols: Vec<ChangeSymbol>,
    pub entries: Vec<Vec<i8>>,
}

impl ChangeMatrix {
    pub fn column(&self, s: ChangeSymbol) -> Option<Vec<i8>> {
        let c = self.cols.iter().position(|x| *x == s)?;
        Some(self.entries.iter().map(|r| r[c]).collect())
    }

    pub fn row(&self, p: SemanticPlace) -> Option<&[i8]> {
        let r = self.rows.iter().position(|x| *x == p)?;
        Some(&self.entries[r])
    }

    /// Every nonzero column has exactly one `+1` and one `-1`.
    pub fn is_well_formed(&self) -> bool {
        (0..self.cols.len()).all(|c| {
            let col: Vec<i8> = self.entries.iter().map(|r| r[c]).collect();
            if col.iter().all(|&v| v == 0) {
                return true;
            }
            col.iter().filter(|&&v| v == 1).count() == 1
                && col.iter().filter(|&&v| v == -1).count() == 1
                && col.iter().all(|&v| (-1..=1).contains(&v))
        })
    }

    pub fn fired(&self) -> Vec<ChangeSymbol> {
        self.cols
            .iter()
            .enumerate()
            .filter(|(c, _)| self.entries.iter().any(|r| r[*c] != 0))
            .map(|(_, s)| *s)
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::change_taxonomy::AttrValue;
    use crate::petri_core::ReachBounds;

    fn avail_down() -> HandlingChange {
        HandlingChange::NonFunctional {
            attr: NonFunctionalAttr::Availability,
            pre: AttrValue::Bool(true),
            post: AttrValue::Bool(false),
        }
    }

    fn place(pnh: &Pnh, sp: SemanticPlace) -> PlaceId {
        pnh.place(sp).unwrap().clone()
    }

    #[test]
    fn nonfunctional_shape() {
        let (pnh, m0) = build_nonfunctional_pnh("WS");
        assert_eq!(pnh.net.place_count(), 5);
        assert_eq!(pnh.net.transition_count(), 4);
        assert_eq!(m0, Marking::from_pairs([(place(&pnh, SemanticPlace::Ps), 4)]));
        assert_eq!(pnh.p0, place(&pnh, SemanticPlace::Ps));
        let labels: Vec<_> = pnh.net.places().map(|p| p.label).collect();
        assert_eq!(labels, ["PS", "PS-A", "PS-R", "PS-C", "PS-Re"]);
        for t in pnh.net.transition_ids() {
            assert_eq!(pnh.net.inputs(t).unwrap(), &[(pnh.p0.clone(), 1)]);
            assert_eq!(pnh.net.outputs(t).unwrap().len(), 1);
        }
    }

    #[test]
    fn functional_shape() {
        let (pnh, m0) = build_functional_pnh("WS");
        assert_eq!(pnh.net.place_count(), 13);
        assert_eq!(pnh.net.transition_count(), 12);
        assert_eq!(m0.get(&pnh.p0), 12);
        let syms: Vec<_> = pnh.transition_index.keys().map(|s| s.to_string()).collect();
        assert_eq!(
            syms,
            ["θ_T+", "θ_T-", "θ_M+", "θ_M-", "θ_O+", "θ_O-", "θ_L+", "θ_L-", "θ_PT+", "θ_PT-", "θ_B+", "θ_B-"]
        );
    }

    #[test]
    fn availability_change_moves_one_token() {
        let (pnh, m0) = build_nonfunctional_pnh("WS");
        let (m1, sym) = pnh.apply_handling_change(&m0, &avail_down()).unwrap();
        assert_eq!(sym, ChangeSymbol::Attr(NonFunctionalAttr::Availability));
        assert_eq!(
            m1,
            Marking::from_pairs([
                (place(&pnh, SemanticPlace::Ps), 3),
                (place(&pnh, SemanticPlace::Altered(NonFunctionalAttr::Availability)), 1)
            ])
        );
        // a second availability change in the same epoch has no token left
        assert_eq!(
            pnh.apply_handling_change(&m1, &avail_down()),
            Err(PnhError::NotEnabled(ChangeSymbol::Attr(NonFunctionalAttr::Availability)))
        );
    }

    #[test]
    fn token_budget_matches_reachability() {
        // markings reachable after firing θ_A never allow θ_A again
        let (pnh, m0) = build_nonfunctional_pnh("WS");
        let (m1, _) = pnh.apply_handling_change(&m0, &avail_down()).unwrap();
        let ta = pnh.transition(ChangeSymbol::Attr(NonFunctionalAttr::Availability)).unwrap();
        let reach = pnh.net.reachable(&m1, ReachBounds::default()).unwrap();
        assert!(reach.markings.iter().all(|m| !pnh.net.enabled(m, ta).unwrap()));
    }

    #[test]
    fn fire_all_four_exhausts_the_net() {
        let (pnh, m0) = build_nonfunctional_pnh("WS");
        let seq: Vec<_> = pnh.transition_index.values().cloned().collect();
        let end = pnh.net.fire_sequence(&m0, &seq).unwrap();
        assert_eq!(end.get(&pnh.p0), 0);
        for a in NonFunctionalAttr::ALL {
            assert_eq!(end.get(&place(&pnh, SemanticPlace::Altered(a))), 1);
        }
        assert!(pnh.net.enabled_transitions(&end).is_empty());
        let reach = pnh.net.reachable(&m0, ReachBounds::default()).unwrap();
        assert!(reach.contains(&end));
        assert_eq!(reach.len(), 16);
    }

    #[test]
    fn remove_operation_lands_in_po_minus() {
        let (pnh, m0) = build_functional_pnh("DS");
        let change = HandlingChange::Remove {
            elem: FunctionalElement::Operation,
            name: "checkValues".into(),
        };
        let (m1, sym) = pnh.apply_handling_change(&m0, &change).unwrap();
        assert_eq!(sym.to_string(), "θ_O-");
        assert_eq!(
            m1.get(&place(&pnh, SemanticPlace::Element(FunctionalElement::Operation, Polarity::Remove))),
            1
        );
    }

    #[test]
    fn type_add_then_remove() {
        let (pnh, m0) = build_functional_pnh("DS");
        let t_plus = pnh.transition(ChangeSymbol::Element(FunctionalElement::Type, Polarity::Add)).unwrap();
        let t_minus = pnh
            .transition(ChangeSymbol::Element(FunctionalElement::Type, Polarity::Remove))
            .unwrap();
        let m = pnh.net.fire(&m0, t_plus).unwrap();
        let m = pnh.net.fire(&m, t_minus).unwrap();
        let expected = Marking::from_pairs([
            (place(&pnh, SemanticPlace::P), 10),
            (place(&pnh, SemanticPlace::Element(FunctionalElement::Type, Polarity::Add)), 1),
            (place(&pnh, SemanticPlace::Element(FunctionalElement::Type, Polarity::Remove)), 1),
        ]);
        assert_eq!(m, expected);
    }

    #[test]
    fn kind_mismatch() {
        let (pnh, m0) = build_nonfunctional_pnh("WS");
        let change = HandlingChange::Add {
            elem: FunctionalElement::Binding,
            name: "soap".into(),
        };
        assert_eq!(
            pnh.apply_handling_change(&m0, &change),
            Err(PnhError::KindMismatch {
                expected: PnhKind::NonFunctional,
                got: PnhKind::Functional
            })
        );
    }

    #[test]
    fn table_four_matrix() {
        let (pnh, _) = build_nonfunctional_pnh("WS");
        let m = pnh
            .change_matrix(&[ChangeSymbol::Attr(NonFunctionalAttr::Availability)])
            .unwrap();
        let labels: Vec<_> = m.rows.iter().map(|r| r.matrix_label()).collect();
        assert_eq!(labels, ["WS'A", "WS'R", "WS'C", "WS'Re", "WS"]);
        assert_eq!(
            m.entries,
            vec![
                vec![1, 0, 0, 0],
                vec![0, 0, 0, 0],
                vec![0, 0, 0, 0],
                vec![0, 0, 0, 0],
                vec![-1, 0, 0, 0]
            ]
        );
    }

    #[test]
    fn empty_and_double_fired_matrices() {
        let (pnh, _) = build_nonfunctional_pnh("WS");
        let empty = pnh.change_matrix(&[]).unwrap();
        assert!(empty.entries.iter().flatten().all(|&v| v == 0));

        let m = pnh
            .change_matrix(&[
                ChangeSymbol::Attr(NonFunctionalAttr::Availability),
                ChangeSymbol::Attr(NonFunctionalAttr::Cost),
            ])
            .unwrap();
        assert_eq!(m.row(SemanticPlace::Ps).unwrap(), &[-1, 0, -1, 0]);
        assert_eq!(m.row(SemanticPlace::Altered(NonFunctionalAttr::Cost)).unwrap(), &[0, 0, 1, 0]);
        assert!(m.is_well_formed());
    }

    #[test]
    fn unknown_symbol_rejected() {
        let (pnh, _) = build_nonfunctional_pnh("WS");
        let s = ChangeSymbol::Element(FunctionalElement::Type, Polarity::Add);
        assert_eq!(pnh.change_matrix(&[s]), Err(PnhError::UnknownSymbol(s)));
    }

    #[test]
    fn matrix_columns_agree_with_incidence() {
        for (pnh, _) in [build_nonfunctional_pnh("X"), build_functional_pnh("X")] {
            let all: Vec<_> = pnh.transition_index.keys().copied().collect();
            let cm = pnh.change_matrix(&all).unwrap();
            let inc = pnh.net.incidence_matrix();
            for s in &all {
                let t = pnh.transition(*s).unwrap();
                for (r, sp) in cm.rows.iter().enumerate() {
                    let p = pnh.place(*sp).unwrap();
                    let c = cm.cols.iter().position(|x| x == s).unwrap();
                    assert_eq!(i64::from(cm.entries[r][c]), inc.entry(p, t).unwrap());
                }
            }
        }
    }
}
