//! Change management for composed service orchestrations.
//!
//! Service-level changes are recorded by firing per-service handling nets
//! ([`pnh`]); orchestration-level reactions rewrite a reconfigurable
//! composition net ([`pnac`]). The [`monitor`] detects changes, the
//! [`adaptor`] maps them to reactions, and [`sim`] runs the whole loop over
//! scripted scenarios on a logical clock.

pub mod adaptor;
pub mod change_taxonomy;
pub mod monitor;
pub mod petri_core;
pub mod pnac;
pub mod pnh;
pub mod sim;

pub use change_taxonomy::{AdaptiveChange, HandlingChange, ServiceDescriptor};
pub use petri_core::{Marking, PetriNet, PlaceId, TransitionId};
pub use pnac::{ConfigurationId, Pnac, RewriteRule};
pub use pnh::{ChangeMatrix, ChangeSymbol, Pnh};
