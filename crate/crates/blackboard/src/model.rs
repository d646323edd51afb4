//! Domain entities: facts, common properties, containers, links, and rules.
//!
//! Entities are plain data. All cross-entity invariants (unique ids, resolving
//! references, attachment rules) are enforced by [`crate::network::Network`]
//! when an entity is inserted, so a value of one of these types on its own is
//! not guaranteed to be consistent with any particular network.

use std::fmt;

macro_rules! id_types {
    ($($(#[$meta:meta])* $name:ident),+ $(,)?) => {$(
        $(#[$meta])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
        pub struct $name(pub u32);

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                self.0.fmt(f)
            }
        }

        impl From<u32> for $name {
            fn from(raw: u32) -> Self {
                Self(raw)
            }
        }
    )+};
}

id_types!(
    /// Identifier of a [`CommonProperty`].
    CommonPropertyId,
    /// Identifier of a [`Fact`].
    FactId,
    /// Identifier of a [`Container`].
    ContainerId,
    /// Identifier of a [`Link`].
    LinkId,
    /// Identifier of a [`BasicRule`].
    BasicRuleId,
    /// Identifier of a [`GenericRule`].
    GenericRuleId,
    /// Identifier of an [`ActionStub`].
    ActionId,
);

/// A shared fact type: facts bound to the same common property carry the
/// same meaning across different containers, while each keeps its own value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommonProperty {
    pub id: CommonPropertyId,
    pub description: String,
}

impl CommonProperty {
    pub fn new(id: CommonPropertyId, description: impl Into<String>) -> Self {
        Self {
            id,
            description: description.into(),
        }
    }
}

/// How a fact gets its meaning: either from a common property (an *instance*
/// fact) or from its own free-text description (a *plain* fact). Exactly one
/// form applies to any fact.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FactBinding {
    /// Instance fact: the description lives on the referenced common property.
    Property(CommonPropertyId),
    /// Plain fact with its own description.
    Description(String),
}

/// A boolean-valued node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fact {
    pub id: FactId,
    pub value: bool,
    pub binding: FactBinding,
}

impl Fact {
    /// A fact bound to a common property.
    pub fn instance(id: FactId, property: CommonPropertyId, value: bool) -> Self {
        Self {
            id,
            value,
            binding: FactBinding::Property(property),
        }
    }

    /// A fact carrying its own description.
    pub fn plain(id: FactId, description: impl Into<String>, value: bool) -> Self {
        Self {
            id,
            value,
            binding: FactBinding::Description(description.into()),
        }
    }

    /// The common property this fact is bound to, if it is an instance fact.
    pub fn property(&self) -> Option<CommonPropertyId> {
        match self.binding {
            FactBinding::Property(p) => Some(p),
            FactBinding::Description(_) => None,
        }
    }
}

/// A namable collection of facts, modelling an object or concept.
///
/// The fact list is ordered by attachment and managed through
/// [`crate::network::Network::attach_fact`]; a fact belongs to at most one
/// container.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Container {
    pub id: ContainerId,
    pub description: String,
    pub(crate) fact_ids: Vec<FactId>,
}

impl Container {
    pub fn new(id: ContainerId, description: impl Into<String>) -> Self {
        Self {
            id,
            description: description.into(),
            fact_ids: Vec::new(),
        }
    }

    /// Attached facts, in attachment order.
    pub fn facts(&self) -> &[FactId] {
        &self.fact_ids
    }
}

/// A directional relationship from an origin container to a destination
/// container. Self-links are rejected; duplicate links between the same
/// ordered pair are allowed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Link {
    pub id: LinkId,
    pub origin: ContainerId,
    pub destination: ContainerId,
    pub description: String,
}

impl Link {
    pub fn new(
        id: LinkId,
        origin: ContainerId,
        destination: ContainerId,
        description: impl Into<String>,
    ) -> Self {
        Self {
            id,
            origin,
            destination,
            description: description.into(),
        }
    }
}

/// A rule over concrete fact ids: when every input fact is true, firing the
/// rule sets every output fact to true. Both sides hold between one and four
/// facts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BasicRule {
    pub id: BasicRuleId,
    pub inputs: Vec<FactId>,
    pub outputs: Vec<FactId>,
}

impl BasicRule {
    pub fn new(id: BasicRuleId, inputs: Vec<FactId>, outputs: Vec<FactId>) -> Self {
        Self { id, inputs, outputs }
    }
}

/// One generic-rule condition: a common property and the value it should
/// hold (before lists) or be driven to (after lists).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConditionPair {
    pub property: CommonPropertyId,
    pub value: bool,
}

impl ConditionPair {
    pub fn new(property: CommonPropertyId, value: bool) -> Self {
        Self { property, value }
    }
}

/// An instance-agnostic rule over a pair of containers.
///
/// The four condition lists address the first and second container before
/// and after execution. Checking evaluates the before lists; execution
/// writes the after lists. `ignore_if_not_present` makes a missing before
/// property non-fatal during checking (a present fact with the wrong value
/// still fails). `create_if_not_present` makes execution add a fresh
/// instance fact for a missing after property.
///
/// Within each list, common property ids must be distinct.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GenericRule {
    pub id: GenericRuleId,
    pub title: String,
    pub before_one: Vec<ConditionPair>,
    pub before_two: Vec<ConditionPair>,
    pub after_one: Vec<ConditionPair>,
    pub after_two: Vec<ConditionPair>,
    pub ignore_if_not_present: bool,
    pub create_if_not_present: bool,
}

/// Placeholder for the actuation side of the architecture. Actions are
/// stored and round-tripped but never executed here.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActionStub {
    pub id: ActionId,
    pub description: String,
}

/// Entity kinds, used in error reporting.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EntityKind {
    CommonProperty,
    Fact,
    Container,
    Link,
    BasicRule,
    GenericRule,
    Action,
}

impl fmt::Display for EntityKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            EntityKind::CommonProperty => "common property",
            EntityKind::Fact => "fact",
            EntityKind::Container => "container",
            EntityKind::Link => "link",
            EntityKind::BasicRule => "basic rule",
            EntityKind::GenericRule => "generic rule",
            EntityKind::Action => "action",
        };
        f.write_str(name)
    }
}
