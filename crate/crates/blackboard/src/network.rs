//! The [`Network`]: a single blackboard owning all entities.
//!
//! A network is a plain value. Insertions validate ids and references, so a
//! network built through this API keeps referential integrity at all times;
//! [`Network::validate`] re-checks every invariant by full scan for networks
//! of doubtful provenance (e.g. loaded from disk).

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::model::{
    ActionId, ActionStub, BasicRule, BasicRuleId, CommonProperty, CommonPropertyId, Container,
    ContainerId, EntityKind, Fact, FactBinding, FactId, GenericRule, GenericRuleId, Link, LinkId,
};

/// Rejected operation on a [`Network`].
#[derive(Debug, Error, PartialEq, Eq)]
pub enum ModelError {
    #[error("duplicate {kind} id {id}")]
    DuplicateId { kind: EntityKind, id: u32 },
    #[error("unknown {kind} id {id}")]
    UnknownId { kind: EntityKind, id: u32 },
    #[error("{kind} {id} has an empty description")]
    EmptyDescription { kind: EntityKind, id: u32 },
    #[error("basic rule {rule} must have 1-4 inputs and outputs, got {inputs}/{outputs}")]
    RuleArity {
        rule: u32,
        inputs: usize,
        outputs: usize,
    },
    #[error("generic rule {rule} lists common property {property} twice in one condition list")]
    DuplicateConditionProperty { rule: u32, property: u32 },
    #[error("link {link} would connect container {container} to itself")]
    SelfLink { link: u32, container: u32 },
    #[error("fact {fact} is already attached to container {container}")]
    FactAlreadyAttached { fact: u32, container: u32 },
    #[error("start and end containers must differ, both are {container}")]
    EndpointsEqual { container: u32 },
    #[error("shortest path requires start and end containers to be set")]
    PathWithoutEndpoints,
    #[error("shortest path breaks at position {position}: link {link} does not chain")]
    PathChainBroken { position: usize, link: u32 },
    #[error("shortest path is empty")]
    PathEmpty,
}

/// The complete blackboard state.
///
/// Entities live in id-ordered maps, which makes every iteration order (and
/// therefore serialization) deterministic. Fresh ids are allocated densely
/// per entity kind in creation order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Network {
    common_properties: BTreeMap<CommonPropertyId, CommonProperty>,
    facts: BTreeMap<FactId, Fact>,
    containers: BTreeMap<ContainerId, Container>,
    links: BTreeMap<LinkId, Link>,
    basic_rules: BTreeMap<BasicRuleId, BasicRule>,
    generic_rules: BTreeMap<GenericRuleId, GenericRule>,
    actions: BTreeMap<ActionId, ActionStub>,
    start: Option<ContainerId>,
    end: Option<ContainerId>,
    shortest_path: Option<Vec<LinkId>>,
}

impl Network {
    pub fn new() -> Self {
        Self::default()
    }

    // ----- id allocation -----

    pub fn next_common_property_id(&self) -> CommonPropertyId {
        CommonPropertyId(next_id(&self.common_properties, |id| id.0))
    }

    pub fn next_fact_id(&self) -> FactId {
        FactId(next_id(&self.facts, |id| id.0))
    }

    pub fn next_container_id(&self) -> ContainerId {
        ContainerId(next_id(&self.containers, |id| id.0))
    }

    pub fn next_link_id(&self) -> LinkId {
        LinkId(next_id(&self.links, |id| id.0))
    }

    pub fn next_basic_rule_id(&self) -> BasicRuleId {
        BasicRuleId(next_id(&self.basic_rules, |id| id.0))
    }

    pub fn next_generic_rule_id(&self) -> GenericRuleId {
        GenericRuleId(next_id(&self.generic_rules, |id| id.0))
    }

    pub fn next_action_id(&self) -> ActionId {
        ActionId(next_id(&self.actions, |id| id.0))
    }

    // ----- insertion with explicit ids -----

    pub fn insert_common_property(
        &mut self,
        property: CommonProperty,
    ) -> Result<CommonPropertyId, ModelError> {
        if property.description.is_empty() {
            return Err(ModelError::EmptyDescription {
                kind: EntityKind::CommonProperty,
                id: property.id.0,
            });
        }
        if self.common_properties.contains_key(&property.id) {
            return Err(ModelError::DuplicateId {
                kind: EntityKind::CommonProperty,
                id: property.id.0,
            });
        }
        let id = property.id;
        self.common_properties.insert(id, property);
        Ok(id)
    }

    pub fn insert_fact(&mut self, fact: Fact) -> Result<FactId, ModelError> {
        if self.facts.contains_key(&fact.id) {
            return Err(ModelError::DuplicateId {
                kind: EntityKind::Fact,
                id: fact.id.0,
            });
        }
        if let FactBinding::Property(property) = fact.binding {
            self.require_common_property(property)?;
        }
        let id = fact.id;
        self.facts.insert(id, fact);
        Ok(id)
    }

    pub fn insert_container(&mut self, container: Container) -> Result<ContainerId, ModelError> {
        if self.containers.contains_key(&container.id) {
            return Err(ModelError::DuplicateId {
                kind: EntityKind::Container,
                id: container.id.0,
            });
        }
        for fact in &container.fact_ids {
            self.require_fact(*fact)?;
            if let Some(owner) = self.container_of_fact(*fact) {
                return Err(ModelError::FactAlreadyAttached {
                    fact: fact.0,
                    container: owner.0,
                });
            }
        }
        let id = container.id;
        self.containers.insert(id, container);
        Ok(id)
    }

    pub fn insert_link(&mut self, link: Link) -> Result<LinkId, ModelError> {
        if self.links.contains_key(&link.id) {
            return Err(ModelError::DuplicateId {
                kind: EntityKind::Link,
                id: link.id.0,
            });
        }
        if link.origin == link.destination {
            return Err(ModelError::SelfLink {
                link: link.id.0,
                container: link.origin.0,
            });
        }
        self.require_container(link.origin)?;
        self.require_container(link.destination)?;
        let id = link.id;
        self.links.insert(id, link);
        Ok(id)
    }

    pub fn insert_basic_rule(&mut self, rule: BasicRule) -> Result<BasicRuleId, ModelError> {
        if self.basic_rules.contains_key(&rule.id) {
            return Err(ModelError::DuplicateId {
                kind: EntityKind::BasicRule,
                id: rule.id.0,
            });
        }
        let (inputs, outputs) = (rule.inputs.len(), rule.outputs.len());
        if !(1..=4).contains(&inputs) || !(1..=4).contains(&outputs) {
            return Err(ModelError::RuleArity {
                rule: rule.id.0,
                inputs,
                outputs,
            });
        }
        for fact in rule.inputs.iter().chain(&rule.outputs) {
            self.require_fact(*fact)?;
        }
        let id = rule.id;
        self.basic_rules.insert(id, rule);
        Ok(id)
    }

    pub fn insert_generic_rule(&mut self, rule: GenericRule) -> Result<GenericRuleId, ModelError> {
        if self.generic_rules.contains_key(&rule.id) {
            return Err(ModelError::DuplicateId {
                kind: EntityKind::GenericRule,
                id: rule.id.0,
            });
        }
        for list in [
            &rule.before_one,
            &rule.before_two,
            &rule.after_one,
            &rule.after_two,
        ] {
            let mut seen = BTreeSet::new();
            for pair in list {
                self.require_common_property(pair.property)?;
                if !seen.insert(pair.property) {
                    return Err(ModelError::DuplicateConditionProperty {
                        rule: rule.id.0,
                        property: pair.property.0,
                    });
                }
            }
        }
        let id = rule.id;
        self.generic_rules.insert(id, rule);
        Ok(id)
    }

    pub fn insert_action(&mut self, action: ActionStub) -> Result<ActionId, ModelError> {
        if self.actions.contains_key(&action.id) {
            return Err(ModelError::DuplicateId {
                kind: EntityKind::Action,
                id: action.id.0,
            });
        }
        let id = action.id;
        self.actions.insert(id, action);
        Ok(id)
    }

    // ----- insertion with generated ids -----

    pub fn add_common_property(
        &mut self,
        description: impl Into<String>,
    ) -> Result<CommonPropertyId, ModelError> {
        let id = self.next_common_property_id();
        self.insert_common_property(CommonProperty::new(id, description))
    }

    pub fn add_instance_fact(
        &mut self,
        property: CommonPropertyId,
        value: bool,
    ) -> Result<FactId, ModelError> {
        let id = self.next_fact_id();
        self.insert_fact(Fact::instance(id, property, value))
    }

    pub fn add_plain_fact(
        &mut self,
        description: impl Into<String>,
        value: bool,
    ) -> Result<FactId, ModelError> {
        let id = self.next_fact_id();
        self.insert_fact(Fact::plain(id, description, value))
    }

    pub fn add_container(
        &mut self,
        description: impl Into<String>,
    ) -> Result<ContainerId, ModelError> {
        let id = self.next_container_id();
        self.insert_container(Container::new(id, description))
    }

    pub fn add_link(
        &mut self,
        origin: ContainerId,
        destination: ContainerId,
        description: impl Into<String>,
    ) -> Result<LinkId, ModelError> {
        let id = self.next_link_id();
        self.insert_link(Link::new(id, origin, destination, description))
    }

    pub fn add_basic_rule(
        &mut self,
        inputs: Vec<FactId>,
        outputs: Vec<FactId>,
    ) -> Result<BasicRuleId, ModelError> {
        let id = self.next_basic_rule_id();
        self.insert_basic_rule(BasicRule::new(id, inputs, outputs))
    }

    // ----- attachment -----

    /// Append `fact` to the fact list of `container`.
    ///
    /// A fact belongs to at most one container; attaching an already
    /// attached fact fails, even for the same container.
    pub fn attach_fact(
        &mut self,
        container: ContainerId,
        fact: FactId,
    ) -> Result<(), ModelError> {
        self.require_fact(fact)?;
        self.require_container(container)?;
        if let Some(owner) = self.container_of_fact(fact) {
            return Err(ModelError::FactAlreadyAttached {
                fact: fact.0,
                container: owner.0,
            });
        }
        self.containers
            .get_mut(&container)
            .expect("container checked above")
            .fact_ids
            .push(fact);
        Ok(())
    }

    /// All instance facts of `container` bound to `property`, in attachment
    /// order.
    pub fn facts_with_property(
        &self,
        container: ContainerId,
        property: CommonPropertyId,
    ) -> Result<Vec<FactId>, ModelError> {
        let container = self.require_container(container)?;
        Ok(container
            .fact_ids
            .iter()
            .copied()
            .filter(|id| {
                self.facts
                    .get(id)
                    .map(|fact| fact.property() == Some(property))
                    .unwrap_or(false)
            })
            .collect())
    }

    /// The container holding `fact`, if any.
    pub fn container_of_fact(&self, fact: FactId) -> Option<ContainerId> {
        self.containers
            .values()
            .find(|container| container.fact_ids.contains(&fact))
            .map(|container| container.id)
    }

    // ----- endpoints and path -----

    pub fn set_endpoints(
        &mut self,
        start: ContainerId,
        end: ContainerId,
    ) -> Result<(), ModelError> {
        if start == end {
            return Err(ModelError::EndpointsEqual { container: start.0 });
        }
        self.require_container(start)?;
        self.require_container(end)?;
        self.start = Some(start);
        self.end = Some(end);
        Ok(())
    }

    /// Record the chosen start-to-end path. Consecutive links must chain,
    /// the first link must leave the start container and the last must
    /// arrive at the end container.
    pub fn set_shortest_path(&mut self, path: Vec<LinkId>) -> Result<(), ModelError> {
        let (start, end) = match (self.start, self.end) {
            (Some(start), Some(end)) => (start, end),
            _ => return Err(ModelError::PathWithoutEndpoints),
        };
        if path.is_empty() {
            return Err(ModelError::PathEmpty);
        }
        let mut at = start;
        for (position, link_id) in path.iter().enumerate() {
            let link = self.require_link(*link_id)?;
            if link.origin != at {
                return Err(ModelError::PathChainBroken {
                    position,
                    link: link_id.0,
                });
            }
            at = link.destination;
        }
        if at != end {
            return Err(ModelError::PathChainBroken {
                position: path.len() - 1,
                link: path.last().expect("non-empty").0,
            });
        }
        self.shortest_path = Some(path);
        Ok(())
    }

    pub fn start(&self) -> Option<ContainerId> {
        self.start
    }

    pub fn end(&self) -> Option<ContainerId> {
        self.end
    }

    pub fn shortest_path(&self) -> Option<&[LinkId]> {
        self.shortest_path.as_deref()
    }

    // ----- targeted mutation -----

    /// Set a fact's value, returning the previous value.
    pub fn set_fact_value(&mut self, fact: FactId, value: bool) -> Result<bool, ModelError> {
        let fact = self
            .facts
            .get_mut(&fact)
            .ok_or(ModelError::UnknownId {
                kind: EntityKind::Fact,
                id: fact.0,
            })?;
        let previous = fact.value;
        fact.value = value;
        Ok(previous)
    }

    pub fn set_generic_rule_flags(
        &mut self,
        rule: GenericRuleId,
        ignore_if_not_present: bool,
        create_if_not_present: bool,
    ) -> Result<(), ModelError> {
        let rule = self
            .generic_rules
            .get_mut(&rule)
            .ok_or(ModelError::UnknownId {
                kind: EntityKind::GenericRule,
                id: rule.0,
            })?;
        rule.ignore_if_not_present = ignore_if_not_present;
        rule.create_if_not_present = create_if_not_present;
        Ok(())
    }

    /// Drop all links and any recorded path. Used when link generation is
    /// restarted after a failed traversability check.
    pub(crate) fn clear_links(&mut self) {
        self.links.clear();
        self.shortest_path = None;
    }

    // ----- lookups -----

    pub fn common_property(&self, id: CommonPropertyId) -> Option<&CommonProperty> {
        self.common_properties.get(&id)
    }

    pub fn fact(&self, id: FactId) -> Option<&Fact> {
        self.facts.get(&id)
    }

    pub fn container(&self, id: ContainerId) -> Option<&Container> {
        self.containers.get(&id)
    }

    pub fn link(&self, id: LinkId) -> Option<&Link> {
        self.links.get(&id)
    }

    pub fn basic_rule(&self, id: BasicRuleId) -> Option<&BasicRule> {
        self.basic_rules.get(&id)
    }

    pub fn generic_rule(&self, id: GenericRuleId) -> Option<&GenericRule> {
        self.generic_rules.get(&id)
    }

    pub fn action(&self, id: ActionId) -> Option<&ActionStub> {
        self.actions.get(&id)
    }

    pub(crate) fn require_common_property(
        &self,
        id: CommonPropertyId,
    ) -> Result<&CommonProperty, ModelError> {
        self.common_property(id).ok_or(ModelError::UnknownId {
            kind: EntityKind::CommonProperty,
            id: id.0,
        })
    }

    pub(crate) fn require_fact(&self, id: FactId) -> Result<&Fact, ModelError> {
        self.fact(id).ok_or(ModelError::UnknownId {
            kind: EntityKind::Fact,
            id: id.0,
        })
    }

    pub(crate) fn require_container(&self, id: ContainerId) -> Result<&Container, ModelError> {
        self.container(id).ok_or(ModelError::UnknownId {
            kind: EntityKind::Container,
            id: id.0,
        })
    }

    pub(crate) fn require_link(&self, id: LinkId) -> Result<&Link, ModelError> {
        self.link(id).ok_or(ModelError::UnknownId {
            kind: EntityKind::Link,
            id: id.0,
        })
    }

    pub(crate) fn require_basic_rule(&self, id: BasicRuleId) -> Result<&BasicRule, ModelError> {
        self.basic_rule(id).ok_or(ModelError::UnknownId {
            kind: EntityKind::BasicRule,
            id: id.0,
        })
    }

    pub(crate) fn require_generic_rule(
        &self,
        id: GenericRuleId,
    ) -> Result<&GenericRule, ModelError> {
        self.generic_rule(id).ok_or(ModelError::UnknownId {
            kind: EntityKind::GenericRule,
            id: id.0,
        })
    }

    // ----- iteration (id order) -----

    pub fn common_properties(&self) -> impl Iterator<Item = &CommonProperty> {
        self.common_properties.values()
    }

    pub fn facts(&self) -> impl Iterator<Item = &Fact> {
        self.facts.values()
    }

    pub fn containers(&self) -> impl Iterator<Item = &Container> {
        self.containers.values()
    }

    pub fn links(&self) -> impl Iterator<Item = &Link> {
        self.links.values()
    }

    pub fn basic_rules(&self) -> impl Iterator<Item = &BasicRule> {
        self.basic_rules.values()
    }

    pub fn generic_rules(&self) -> impl Iterator<Item = &GenericRule> {
        self.generic_rules.values()
    }

    pub fn actions(&self) -> impl Iterator<Item = &ActionStub> {
        self.actions.values()
    }

    pub fn common_property_count(&self) -> usize {
        self.common_properties.len()
    }

    pub fn fact_count(&self) -> usize {
        self.facts.len()
    }

    pub fn container_count(&self) -> usize {
        self.containers.len()
    }

    pub fn link_count(&self) -> usize {
        self.links.len()
    }

    pub fn basic_rule_count(&self) -> usize {
        self.basic_rules.len()
    }

    pub fn generic_rule_count(&self) -> usize {
        self.generic_rules.len()
    }

    pub fn action_count(&self) -> usize {
        self.actions.len()
    }

    // ----- validation -----

    /// Re-check every invariant by full scan: referential integrity,
    /// single-container fact ownership, condition-list distinctness, rule
    /// arity, endpoint distinctness, and path chaining.
    pub fn validate(&self) -> Result<(), ModelError> {
        for property in self.common_properties.values() {
            if property.description.is_empty() {
                return Err(ModelError::EmptyDescription {
                    kind: EntityKind::CommonProperty,
                    id: property.id.0,
                });
            }
        }
        for fact in self.facts.values() {
            if let Some(property) = fact.property() {
                self.require_common_property(property)?;
            }
        }
        let mut owned = BTreeSet::new();
        for container in self.containers.values() {
            for fact in &container.fact_ids {
                self.require_fact(*fact)?;
                if !owned.insert(*fact) {
                    return Err(ModelError::FactAlreadyAttached {
                        fact: fact.0,
                        container: container.id.0,
                    });
                }
            }
        }
        for link in self.links.values() {
            if link.origin == link.destination {
                return Err(ModelError::SelfLink {
                    link: link.id.0,
                    container: link.origin.0,
                });
            }
            self.require_container(link.origin)?;
            self.require_container(link.destination)?;
        }
        for rule in self.basic_rules.values() {
            let (inputs, outputs) = (rule.inputs.len(), rule.outputs.len());
            if !(1..=4).contains(&inputs) || !(1..=4).contains(&outputs) {
                return Err(ModelError::RuleArity {
                    rule: rule.id.0,
                    inputs,
                    outputs,
                });
            }
            for fact in rule.inputs.iter().chain(&rule.outputs) {
                self.require_fact(*fact)?;
            }
        }
        for rule in self.generic_rules.values() {
            for list in [
                &rule.before_one,
                &rule.before_two,
                &rule.after_one,
                &rule.after_two,
            ] {
                let mut seen = BTreeSet::new();
                for pair in list {
                    self.require_common_property(pair.property)?;
                    if !seen.insert(pair.property) {
                        return Err(ModelError::DuplicateConditionProperty {
                            rule: rule.id.0,
                            property: pair.property.0,
                        });
                    }
                }
            }
        }
        if let Some(start) = self.start {
            self.require_container(start)?;
        }
        if let Some(end) = self.end {
            self.require_container(end)?;
        }
        if let (Some(start), Some(end)) = (self.start, self.end) {
            if start == end {
                return Err(ModelError::EndpointsEqual { container: start.0 });
            }
        }
        if let Some(path) = &self.shortest_path {
            let (start, end) = match (self.start, self.end) {
                (Some(start), Some(end)) => (start, end),
                _ => return Err(ModelError::PathWithoutEndpoints),
            };
            if path.is_empty() {
                return Err(ModelError::PathEmpty);
            }
            let mut at = start;
            for (position, link_id) in path.iter().enumerate() {
                let link = self.require_link(*link_id)?;
                if link.origin != at {
                    return Err(ModelError::PathChainBroken {
                        position,
                        link: link_id.0,
                    });
                }
                at = link.destination;
            }
            if at != end {
                return Err(ModelError::PathChainBroken {
                    position: path.len() - 1,
                    link: path.last().expect("non-empty").0,
                });
            }
        }
        Ok(())
    }
}

fn next_id<K: Copy + Ord, V>(map: &BTreeMap<K, V>, raw: impl Fn(K) -> u32) -> u32 {
    map.last_key_value().map(|(id, _)| raw(*id) + 1).unwrap_or(0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_insertion_gets_id_zero() {
        let mut net = Network::new();
        let id = net.add_common_property("isEmployee").unwrap();
        assert_eq!(id, CommonPropertyId(0));
        assert_eq!(net.add_common_property("isManager").unwrap(), CommonPropertyId(1));
    }

    #[test]
    fn fact_with_dangling_property_is_rejected() {
        let mut net = Network::new();
        let err = net.add_instance_fact(CommonPropertyId(99), true).unwrap_err();
        assert_eq!(
            err,
            ModelError::UnknownId {
                kind: EntityKind::CommonProperty,
                id: 99
            }
        );
    }

    #[test]
    fn duplicate_container_id_is_rejected() {
        let mut net = Network::new();
        net.insert_container(Container::new(ContainerId(3), "a")).unwrap();
        let err = net
            .insert_container(Container::new(ContainerId(3), "b"))
            .unwrap_err();
        assert_eq!(
            err,
            ModelError::DuplicateId {
                kind: EntityKind::Container,
                id: 3
            }
        );
    }

    #[test]
    fn attach_appends_in_order() {
        let mut net = Network::new();
        let cp = net.add_common_property("p").unwrap();
        let container = net.add_container("c").unwrap();
        let a = net.add_instance_fact(cp, true).unwrap();
        let b = net.add_instance_fact(cp, false).unwrap();
        net.attach_fact(container, b).unwrap();
        net.attach_fact(container, a).unwrap();
        assert_eq!(net.container(container).unwrap().facts(), &[b, a]);
    }

    #[test]
    fn attach_twice_fails() {
        let mut net = Network::new();
        let cp = net.add_common_property("p").unwrap();
        let c1 = net.add_container("c1").unwrap();
        let c2 = net.add_container("c2").unwrap();
        let fact = net.add_instance_fact(cp, true).unwrap();
        net.attach_fact(c1, fact).unwrap();
        let err = net.attach_fact(c2, fact).unwrap_err();
        assert_eq!(
            err,
            ModelError::FactAlreadyAttached {
                fact: fact.0,
                container: c1.0
            }
        );
        // Re-attaching to the same container fails too.
        assert!(net.attach_fact(c1, fact).is_err());
    }

    #[test]
    fn attach_unknown_fact_fails() {
        let mut net = Network::new();
        let container = net.add_container("c").unwrap();
        let err = net.attach_fact(container, FactId(42)).unwrap_err();
        assert_eq!(
            err,
            ModelError::UnknownId {
                kind: EntityKind::Fact,
                id: 42
            }
        );
    }

    #[test]
    fn facts_with_property_scopes_to_container() {
        // Two containers each hold their own "has Wi-Fi" instance fact.
        let mut net = Network::new();
        let wifi = net.add_common_property("has Wi-Fi").unwrap();
        let c1 = net.add_container("computer 1").unwrap();
        let c2 = net.add_container("computer 2").unwrap();
        let f1 = net.add_instance_fact(wifi, true).unwrap();
        let f2 = net.add_instance_fact(wifi, false).unwrap();
        net.attach_fact(c1, f1).unwrap();
        net.attach_fact(c2, f2).unwrap();
        assert_eq!(net.facts_with_property(c1, wifi).unwrap(), vec![f1]);
        assert_eq!(net.facts_with_property(c2, wifi).unwrap(), vec![f2]);
    }

    #[test]
    fn facts_with_property_returns_all_matches_in_attachment_order() {
        let mut net = Network::new();
        let cp = net.add_common_property("p").unwrap();
        let other = net.add_common_property("q").unwrap();
        let container = net.add_container("c").unwrap();
        let a = net.add_instance_fact(cp, true).unwrap();
        let noise = net.add_instance_fact(other, true).unwrap();
        let b = net.add_instance_fact(cp, false).unwrap();
        net.attach_fact(container, a).unwrap();
        net.attach_fact(container, noise).unwrap();
        net.attach_fact(container, b).unwrap();
        assert_eq!(net.facts_with_property(container, cp).unwrap(), vec![a, b]);
        assert_eq!(
            net.facts_with_property(container, CommonPropertyId(77)).unwrap(),
            vec![]
        );
    }

    #[test]
    fn facts_with_property_unknown_container_fails() {
        let net = Network::new();
        assert!(net
            .facts_with_property(ContainerId(0), CommonPropertyId(0))
            .is_err());
    }

    #[test]
    fn self_link_is_rejected() {
        let mut net = Network::new();
        let c = net.add_container("c").unwrap();
        let err = net.add_link(c, c, "loop").unwrap_err();
        assert!(matches!(err, ModelError::SelfLink { .. }));
    }

    #[test]
    fn duplicate_links_between_same_pair_are_allowed() {
        let mut net = Network::new();
        let a = net.add_container("a").unwrap();
        let b = net.add_container("b").unwrap();
        net.add_link(a, b, "first").unwrap();
        net.add_link(a, b, "second").unwrap();
        assert_eq!(net.link_count(), 2);
        assert!(net.validate().is_ok());
    }

    #[test]
    fn basic_rule_arity_is_enforced() {
        let mut net = Network::new();
        let facts: Vec<FactId> = (0..5)
            .map(|i| net.add_plain_fact(format!("f{i}"), false).unwrap())
            .collect();
        assert!(net.add_basic_rule(facts[..5].to_vec(), vec![facts[0]]).is_err());
        assert!(net.add_basic_rule(vec![], vec![facts[0]]).is_err());
        assert!(net.add_basic_rule(vec![facts[0]], vec![facts[1]]).is_ok());
    }

    #[test]
    fn generic_rule_condition_lists_reject_duplicates() {
        let mut net = Network::new();
        let cp = net.add_common_property("p").unwrap();
        let rule = GenericRule {
            id: net.next_generic_rule_id(),
            title: "r".into(),
            before_one: vec![crate::model::ConditionPair::new(cp, true), crate::model::ConditionPair::new(cp, false)],
            before_two: vec![],
            after_one: vec![],
            after_two: vec![],
            ignore_if_not_present: false,
            create_if_not_present: false,
        };
        assert!(matches!(
            net.insert_generic_rule(rule),
            Err(ModelError::DuplicateConditionProperty { .. })
        ));
    }

    #[test]
    fn endpoints_must_differ() {
        let mut net = Network::new();
        let a = net.add_container("a").unwrap();
        let b = net.add_container("b").unwrap();
        assert!(net.set_endpoints(a, a).is_err());
        net.set_endpoints(a, b).unwrap();
        assert_eq!(net.start(), Some(a));
        assert_eq!(net.end(), Some(b));
    }

    #[test]
    fn shortest_path_must_chain() {
        let mut net = Network::new();
        let a = net.add_container("a").unwrap();
        let b = net.add_container("b").unwrap();
        let c = net.add_container("c").unwrap();
        let ab = net.add_link(a, b, "ab").unwrap();
        let bc = net.add_link(b, c, "bc").unwrap();
        let ac = net.add_link(a, c, "ac").unwrap();
        net.set_endpoints(a, c).unwrap();
        assert!(net.set_shortest_path(vec![ab, ac]).is_err());
        net.set_shortest_path(vec![ab, bc]).unwrap();
        assert_eq!(net.shortest_path(), Some(&[ab, bc][..]));
        assert!(net.validate().is_ok());
    }
}
