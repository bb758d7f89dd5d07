//! Handling changes (service level) and adaptive changes (orchestration
//! level), plus snapshot diffing of service descriptors.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::petri_core::{PlaceId, TransitionId};

/// WSDL-like functional profile plus the four non-functional attributes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ServiceDescriptor {
    pub service_id: String,
    #[serde(default)]
    pub types: BTreeSet<String>,
    #[serde(default)]
    pub messages: BTreeSet<String>,
    #[serde(default)]
    pub operations: BTreeSet<String>,
    #[serde(default)]
    pub locations: BTreeSet<String>,
    #[serde(default)]
    pub port_types: BTreeSet<String>,
    #[serde(default)]
    pub bindings: BTreeSet<String>,
    #[serde(default = "yes")]
    pub availability: bool,
    #[serde(default = "yes")]
    pub reliability: bool,
    /// Currency units.
    #[serde(default)]
    pub cost: f64,
    /// Milliseconds.
    #[serde(default)]
    pub responsiveness: f64,
}

fn yes() -> bool {
    true
}

impl ServiceDescriptor {
    /// Available, reliable, zero-cost descriptor with no functional elements.
    pub fn new(service_id: impl Into<String>) -> Self {
        Self {
            service_id: service_id.into(),
            types: BTreeSet::new(),
            messages: BTreeSet::new(),
            operations: BTreeSet::new(),
            locations: BTreeSet::new(),
            port_types: BTreeSet::new(),
            bindings: BTreeSet::new(),
            availability: true,
            reliability: true,
            cost: 0.0,
            responsiveness: 0.0,
        }
    }

    pub fn with_operations<I, S>(mut self, ops: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.operations = ops.into_iter().map(Into::into).collect();
        self
    }

    pub fn validate(&self) -> Result<(), TaxonomyError> {
        if self.service_id.is_empty() {
            return Err(TaxonomyError::EmptyServiceId);
        }
        for (name, v) in [("cost", self.cost), ("responsiveness", self.responsiveness)] {
            if !v.is_finite() || v < 0.0 {
                return Err(TaxonomyError::BadScalar {
                    service: self.service_id.clone(),
                    attr: name,
                    value: v,
                });
            }
        }
        Ok(())
    }

    pub fn elements(&self, elem: FunctionalElement) -> &BTreeSet<String> {
        match elem {
            FunctionalElement::Type => &self.types,
            FunctionalElement::Message => &self.messages,
            FunctionalElement::Operation => &self.operations,
            FunctionalElement::Location => &self.locations,
            FunctionalElement::PortType => &self.port_types,
            FunctionalElement::Binding => &self.bindings,
        }
    }

    pub fn elements_mut(&mut self, elem: FunctionalElement) -> &mut BTreeSet<String> {
        match elem {
            FunctionalElement::Type => &mut self.types,
            FunctionalElement::Message => &mut self.messages,
            FunctionalElement::Operation => &mut self.operations,
            FunctionalElement::Location => &mut self.locations,
            FunctionalElement::PortType => &mut self.port_types,
            FunctionalElement::Binding => &mut self.bindings,
        }
    }

    pub fn attr(&self, attr: NonFunctionalAttr) -> AttrValue {
        match attr {
            NonFunctionalAttr::Availability => AttrValue::Bool(self.availability),
            NonFunctionalAttr::Reliability => AttrValue::Bool(self.reliability),
            NonFunctionalAttr::Cost => AttrValue::Real(self.cost),
            NonFunctionalAttr::Responsiveness => AttrValue::Real(self.responsiveness),
        }
    }
}

/// Canonical order: availability, reliability, cost, responsiveness.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NonFunctionalAttr {
    Availability,
    Reliability,
    Cost,
    Responsiveness,
}

impl NonFunctionalAttr {
    pub const ALL: [NonFunctionalAttr; 4] = [
        NonFunctionalAttr::Availability,
        NonFunctionalAttr::Reliability,
        NonFunctionalAttr::Cost,
        NonFunctionalAttr::Responsiveness,
    ];

    /// Subscript used in change symbols and place names (`A`, `R`, `C`, `Re`).
    pub fn code(self) -> &'static str {
        match self {
            NonFunctionalAttr::Availability => "A",
            NonFunctionalAttr::Reliability => "R",
            NonFunctionalAttr::Cost => "C",
            NonFunctionalAttr::Responsiveness => "Re",
        }
    }

    pub fn is_boolean(self) -> bool {
        matches!(self, NonFunctionalAttr::Availability | NonFunctionalAttr::Reliability)
    }

    fn change_name(self) -> &'static str {
        match self {
            NonFunctionalAttr::Availability => "alterAvailability",
            NonFunctionalAttr::Reliability => "alterReliability",
            NonFunctionalAttr::Cost => "alterCost",
            NonFunctionalAttr::Responsiveness => "alterResponsiveness",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FunctionalElement {
    Type,
    Message,
    Operation,
    Location,
    PortType,
    Binding,
}

impl FunctionalElement {
    pub const ALL: [FunctionalElement; 6] = [
        FunctionalElement::Type,
        FunctionalElement::Message,
        FunctionalElement::Operation,
        FunctionalElement::Location,
        FunctionalElement::PortType,
        FunctionalElement::Binding,
    ];

    /// `T`, `M`, `O`, `L`, `PT`, `B`.
    pub fn code(self) -> &'static str {
        match self {
            FunctionalElement::Type => "T",
            FunctionalElement::Message => "M",
            FunctionalElement::Operation => "O",
            FunctionalElement::Location => "L",
            FunctionalElement::PortType => "PT",
            FunctionalElement::Binding => "B",
        }
    }

    fn noun(self) -> &'static str {
        match self {
            FunctionalElement::Type => "Type",
            FunctionalElement::Message => "Message",
            FunctionalElement::Operation => "Operation",
            FunctionalElement::Location => "Location",
            FunctionalElement::PortType => "PortType",
            FunctionalElement::Binding => "Binding",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AttrValue {
    Bool(bool),
    Real(f64),
}

impl fmt::Display for AttrValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AttrValue::Bool(b) => write!(f, "{b}"),
            AttrValue::Real(x) => write!(f, "{x}"),
        }
    }
}

/// θ: a change observed at the service level.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum HandlingChange {
    NonFunctional {
        attr: NonFunctionalAttr,
        pre: AttrValue,
        post: AttrValue,
    },
    Add {
        elem: FunctionalElement,
        name: String,
    },
    Remove {
        elem: FunctionalElement,
        name: String,
    },
}

impl HandlingChange {
    pub fn non_functional(attr: NonFunctionalAttr, pre: AttrValue, post: AttrValue) -> Result<Self, TaxonomyError> {
        let c = HandlingChange::NonFunctional { attr, pre, post };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<(), TaxonomyError> {
        if let HandlingChange::NonFunctional { attr, pre, post } = self {
            let kinds_ok = match (pre, post) {
                (AttrValue::Bool(_), AttrValue::Bool(_)) => attr.is_boolean(),
                (AttrValue::Real(_), AttrValue::Real(_)) => !attr.is_boolean(),
                _ => false,
            };
            if !kinds_ok {
                return Err(TaxonomyError::ValueKindMismatch(*attr));
            }
            if pre == post {
                return Err(TaxonomyError::NoDifference(*attr));
            }
        }
        Ok(())
    }

    pub fn is_functional(&self) -> bool {
        !matches!(self, HandlingChange::NonFunctional { .. })
    }

    /// True for a boolean attribute going from true to false.
    pub fn is_loss_of(&self, which: NonFunctionalAttr) -> bool {
        matches!(
            self,
            HandlingChange::NonFunctional { attr, pre: AttrValue::Bool(true), post: AttrValue::Bool(false) }
                if *attr == which
        )
    }
}

impl fmt::Display for HandlingChange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HandlingChange::NonFunctional { attr, pre, post } => {
                write!(f, "{}({pre}->{post})", attr.change_name())
            }
            HandlingChange::Add { elem, name } => write!(f, "add{}({name})", elem.noun()),
            HandlingChange::Remove { elem, name } => write!(f, "remove{}({name})", elem.noun()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Category {
    NonFunctional(NonFunctionalCategory),
    Functional(FunctionalCategory),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NonFunctionalCategory {
    Dependability,
    Response,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FunctionalCategory {
    /// Operational aspects: types, messages, operations.
    Structural,
    /// Interaction with external entities: locations, port types, bindings.
    Behavioral,
}

pub fn classify(change: &HandlingChange) -> Category {
    match change {
        HandlingChange::NonFunctional { attr, .. } => Category::NonFunctional(match attr {
            NonFunctionalAttr::Availability | NonFunctionalAttr::Reliability => NonFunctionalCategory::Dependability,
            NonFunctionalAttr::Cost | NonFunctionalAttr::Responsiveness => NonFunctionalCategory::Response,
        }),
        HandlingChange::Add { elem, .. } | HandlingChange::Remove { elem, .. } => Category::Functional(match elem {
            FunctionalElement::Type | FunctionalElement::Message | FunctionalElement::Operation => {
                FunctionalCategory::Structural
            }
            FunctionalElement::Location | FunctionalElement::PortType | FunctionalElement::Binding => {
                FunctionalCategory::Behavioral
            }
        }),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Bounds {
    #[serde(default)]
    pub min: f64,
    #[serde(default = "unbounded")]
    pub max: f64,
}

fn unbounded() -> f64 {
    f64::INFINITY
}

impl Bounds {
    pub fn new(min: f64, max: f64) -> Self {
        Self { min, max }
    }

    pub fn contains(&self, v: f64) -> bool {
        self.min <= v && v <= self.max
    }
}

impl Default for Bounds {
    fn default() -> Self {
        Self {
            min: 0.0,
            max: f64::INFINITY,
        }
    }
}

/// Notification bounds for the scalar attributes.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Thresholds {
    #[serde(default)]
    pub cost: Bounds,
    #[serde(default)]
    pub responsiveness: Bounds,
}

impl Thresholds {
    pub fn validate(&self) -> Result<(), TaxonomyError> {
        for (name, b) in [("cost", self.cost), ("responsiveness", self.responsiveness)] {
            if b.min.is_nan() || b.max.is_nan() || b.min > b.max {
                return Err(TaxonomyError::BadThreshold(name));
            }
        }
        Ok(())
    }

    pub fn bounds(&self, attr: NonFunctionalAttr) -> Option<Bounds> {
        match attr {
            NonFunctionalAttr::Cost => Some(self.cost),
            NonFunctionalAttr::Responsiveness => Some(self.responsiveness),
            _ => None,
        }
    }

    /// Scalar attributes of `d` all lie inside their bounds.
    pub fn admits(&self, d: &ServiceDescriptor) -> bool {
        self.cost.contains(d.cost) && self.responsiveness.contains(d.responsiveness)
    }
}

/// True when `post` enters the region above `max` or below `min` and `pre`
/// was not already in that same region.
fn crosses_out(b: Bounds, pre: f64, post: f64) -> bool {
    (post > b.max && pre <= b.max) || (post < b.min && pre >= b.min)
}

/// Differences between two snapshots of one service, as handling changes.
///
/// Non-functional changes come first in canonical attribute order. Then, per
/// functional element in element order, every removal (by name) followed by
/// every addition (by name); a rename shows up as remove-then-add.
pub fn diff_snapshots(
    pre: &ServiceDescriptor,
    post: &ServiceDescriptor,
    th: &Thresholds,
) -> Result<Vec<HandlingChange>, TaxonomyError> {
    if pre.service_id != post.service_id {
        return Err(TaxonomyError::ServiceIdMismatch {
            pre: pre.service_id.clone(),
            post: post.service_id.clone(),
        });
    }
    let mut out = Vec::new();
    for attr in NonFunctionalAttr::ALL {
        let (a, b) = (pre.attr(attr), post.attr(attr));
        let changed = match (a, b, th.bounds(attr)) {
            (AttrValue::Bool(x), AttrValue::Bool(y), _) => x != y,
            (AttrValue::Real(x), AttrValue::Real(y), Some(bounds)) => crosses_out(bounds, x, y),
            _ => unreachable!("attribute kinds are fixed"),
        };
        if changed {
            out.push(HandlingChange::NonFunctional { attr, pre: a, post: b });
        }
    }
    for elem in FunctionalElement::ALL {
        let (a, b) = (pre.elements(elem), post.elements(elem));
        out.extend(a.difference(b).map(|name| HandlingChange::Remove {
            elem,
            name: name.clone(),
        }));
        out.extend(b.difference(a).map(|name| HandlingChange::Add {
            elem,
            name: name.clone(),
        }));
    }
    Ok(out)
}

/// Orchestration life-cycle state.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OrchestrationState {
    Running,
    Paused,
    Terminated,
    Completed,
}

impl fmt::Display for OrchestrationState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OrchestrationState::Running => "Running",
            OrchestrationState::Paused => "Paused",
            OrchestrationState::Terminated => "Terminated",
            OrchestrationState::Completed => "Completed",
        })
    }
}

/// How a newly added member is connected into a composition net.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Wiring {
    /// Existing transitions that deliver work to the new member.
    pub feeds: Vec<TransitionId>,
    /// Existing places that receive the new member's output.
    pub outputs: Vec<PlaceId>,
}

/// Ω: a change at the composition/orchestration level.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum AdaptiveChange {
    RemoveMember { service_id: String },
    AddMember { descriptor: ServiceDescriptor, wiring: Wiring },
    RemoveParameter { name: String },
    AddParameter { name: String },
    RemoveInstance { instance_id: String },
    AddInstance { instance_id: String },
    ChangeState { state: OrchestrationState },
    ChangeServiceInstance { from: String, to: ServiceDescriptor },
}

impl AdaptiveChange {
    /// Systematic symbol: Ω_M±, Ω_P±, Ω_C±, Ω_S, Ω_I.
    pub fn symbol(&self) -> &'static str {
        match self {
            AdaptiveChange::RemoveMember { .. } => "Ω_M-",
            AdaptiveChange::AddMember { .. } => "Ω_M+",
            AdaptiveChange::RemoveParameter { .. } => "Ω_P-",
            AdaptiveChange::AddParameter { .. } => "Ω_P+",
            AdaptiveChange::RemoveInstance { .. } => "Ω_C-",
            AdaptiveChange::AddInstance { .. } => "Ω_C+",
            AdaptiveChange::ChangeState { .. } => "Ω_S",
            AdaptiveChange::ChangeServiceInstance { .. } => "Ω_I",
        }
    }
}

impl fmt::Display for AdaptiveChange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AdaptiveChange::RemoveMember { service_id } => write!(f, "removeMember({service_id})"),
            AdaptiveChange::AddMember { descriptor, .. } => write!(f, "addMember({})", descriptor.service_id),
            AdaptiveChange::RemoveParameter { name } => write!(f, "removeParameter({name})"),
            AdaptiveChange::AddParameter { name } => write!(f, "addParameter({name})"),
            AdaptiveChange::RemoveInstance { instance_id } => write!(f, "removeInstance({instance_id})"),
            AdaptiveChange::AddInstance { instance_id } => write!(f, "addInstance({instance_id})"),
            AdaptiveChange::ChangeState { state } => write!(f, "changeState({state})"),
            AdaptiveChange::ChangeServiceInstance { from, to } => {
                write!(f, "changeServiceInstance({from}->{})", to.service_id)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TaxonomyError {
    #[error("cannot diff snapshots of different services `{pre}` and `{post}`")]
    ServiceIdMismatch { pre: String, post: String },
    #[error("service id must not be empty")]
    EmptyServiceId,
    #[error("service `{service}`: {attr} must be finite and non-negative, got {value}")]
    BadScalar {
        service: String,
        attr: &'static str,
        value: f64,
    },
    #[error("{0} threshold needs min <= max")]
    BadThreshold(&'static str),
    #[error("pre and post values of {0:?} are identical")]
    NoDifference(NonFunctionalAttr),
    #[error("value kind does not match attribute {0:?}")]
    ValueKindMismatch(NonFunctionalAttr),
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ds() -> ServiceDescriptor {
        let mut d = ServiceDescriptor::new("DS").with_operations(["checkValues"]);
        d.cost = 10.0;
        d.responsiveness = 200.0;
        d
    }

    #[test]
    fn availability_flip_is_alter_availability() {
        let mut post = ds();
        post.availability = false;
        let changes = diff_snapshots(&ds(), &post, &Thresholds::default()).unwrap();
        assert_eq!(
            changes,
            vec![HandlingChange::NonFunctional {
                attr: NonFunctionalAttr::Availability,
                pre: AttrValue::Bool(true),
                post: AttrValue::Bool(false),
            }]
        );
        assert_eq!(changes[0].to_string(), "alterAvailability(true->false)");
    }

    #[test]
    fn identical_snapshots_have_no_changes() {
        assert!(diff_snapshots(&ds(), &ds(), &Thresholds::default()).unwrap().is_empty());
    }

    #[test]
    fn rename_is_remove_then_add() {
        let post = ds().with_operations(["checkValues2"]);
        let changes = diff_snapshots(&ds(), &post, &Thresholds::default()).unwrap();
        assert_eq!(
            changes,
            vec![
                HandlingChange::Remove {
                    elem: FunctionalElement::Operation,
                    name: "checkValues".into()
                },
                HandlingChange::Add {
                    elem: FunctionalElement::Operation,
                    name: "checkValues2".into()
                },
            ]
        );
        // removal still precedes addition when the new name sorts first
        let post = ds().with_operations(["aaa"]);
        let changes = diff_snapshots(&ds(), &post, &Thresholds::default()).unwrap();
        assert!(matches!(changes[0], HandlingChange::Remove { .. }));
        assert!(matches!(changes[1], HandlingChange::Add { .. }));
    }

    #[test]
    fn cost_threshold_crossing() {
        let th = Thresholds {
            cost: Bounds::new(0.0, 11.0),
            ..Thresholds::default()
        };
        let oracle = |pre: f64, post: f64| post > th.cost.max && pre <= th.cost.max;
        for (to, expect_change) in [(12.0, true), (10.5, false)] {
            let mut post = ds();
            post.cost = to;
            let changes = diff_snapshots(&ds(), &post, &th).unwrap();
            assert_eq!(!changes.is_empty(), oracle(10.0, to));
            assert_eq!(!changes.is_empty(), expect_change);
            if expect_change {
                assert_eq!(
                    changes,
                    vec![HandlingChange::NonFunctional {
                        attr: NonFunctionalAttr::Cost,
                        pre: AttrValue::Real(10.0),
                        post: AttrValue::Real(12.0)
                    }]
                );
            }
        }
    }

    #[test]
    fn staying_out_of_bounds_is_not_a_new_change() {
        let th = Thresholds {
            responsiveness: Bounds::new(50.0, 100.0),
            ..Thresholds::default()
        };
        let mut a = ds();
        a.responsiveness = 150.0;
        let mut b = ds();
        b.responsiveness = 170.0;
        assert!(diff_snapshots(&a, &b, &th).unwrap().is_empty());
        // jumping from above max to below min enters the other region
        b.responsiveness = 10.0;
        assert_eq!(diff_snapshots(&a, &b, &th).unwrap().len(), 1);
    }

    #[test]
    fn mismatched_ids_rejected() {
        let err = diff_snapshots(&ds(), &ServiceDescriptor::new("HS"), &Thresholds::default()).unwrap_err();
        assert!(matches!(err, TaxonomyError::ServiceIdMismatch { .. }));
    }

    #[test]
    fn classification() {
        let avail = HandlingChange::NonFunctional {
            attr: NonFunctionalAttr::Availability,
            pre: AttrValue::Bool(true),
            post: AttrValue::Bool(false),
        };
        assert_eq!(classify(&avail), Category::NonFunctional(NonFunctionalCategory::Dependability));
        let cost = HandlingChange::NonFunctional {
            attr: NonFunctionalAttr::Cost,
            pre: AttrValue::Real(1.0),
            post: AttrValue::Real(2.0),
        };
        assert_eq!(classify(&cost), Category::NonFunctional(NonFunctionalCategory::Response));
        let add_op = HandlingChange::Add {
            elem: FunctionalElement::Operation,
            name: "x".into(),
        };
        assert_eq!(classify(&add_op), Category::Functional(FunctionalCategory::Structural));
        let rm_binding = HandlingChange::Remove {
            elem: FunctionalElement::Binding,
            name: "soap".into(),
        };
        assert_eq!(classify(&rm_binding), Category::Functional(FunctionalCategory::Behavioral));
    }

    #[test]
    fn non_functional_constructor_enforces_invariant() {
        assert!(HandlingChange::non_functional(NonFunctionalAttr::Cost, AttrValue::Real(1.0), AttrValue::Real(1.0)).is_err());
        assert!(
            HandlingChange::non_functional(NonFunctionalAttr::Availability, AttrValue::Real(1.0), AttrValue::Real(2.0))
                .is_err()
        );
        assert!(
            HandlingChange::non_functional(NonFunctionalAttr::Reliability, AttrValue::Bool(true), AttrValue::Bool(false))
                .is_ok()
        );
    }

    #[test]
    fn descriptor_validation() {
        assert!(ds().validate().is_ok());
        assert_eq!(ServiceDescriptor::new("").validate(), Err(TaxonomyError::EmptyServiceId));
        let mut d = ds();
        d.cost = -1.0;
        assert!(d.validate().is_err());
        d.cost = f64::NAN;
        assert!(d.validate().is_err());
    }
}
