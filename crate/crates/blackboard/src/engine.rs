//! Rule firing: basic rules over concrete facts and the two-phase
//! (check, execute) protocol of generic rules over container pairs.
//!
//! Checking is read-only. Execution mutates fact values and may create new
//! instance facts; every observable mutation is reported as a
//! [`ChangeRecord`] so a traversal can be persisted and replayed.

use crate::model::{
    BasicRuleId, CommonPropertyId, ConditionPair, ContainerId, FactId, GenericRuleId, LinkId,
};
use crate::network::{ModelError, Network};

/// The rule that produced a [`ChangeSet`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RuleRef {
    Basic(BasicRuleId),
    Generic(GenericRuleId),
}

/// One observable mutation of the network.
///
/// Only actual changes are recorded: writing a value a fact already holds
/// produces no record.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ChangeRecord {
    /// A fresh instance fact was created and attached; this only happens
    /// when the producing generic rule has `create_if_not_present` set.
    FactAdded {
        container: ContainerId,
        fact: FactId,
        property: CommonPropertyId,
        value: bool,
    },
    /// An existing fact's value flipped. Container and property are those
    /// of the fact when known (facts touched by basic rules may be
    /// unattached or unbound).
    FactChanged {
        container: Option<ContainerId>,
        fact: FactId,
        property: Option<CommonPropertyId>,
        new_value: bool,
    },
}

/// The ordered changes one rule application produced.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChangeSet {
    pub rule: RuleRef,
    pub records: Vec<ChangeRecord>,
}

impl ChangeSet {
    fn new(rule: RuleRef) -> Self {
        Self {
            rule,
            records: Vec::new(),
        }
    }
}

/// Evaluate one basic rule: it triggers iff every input fact is true.
/// Triggering sets all output facts to true; each false-to-true flip is
/// recorded, outputs that are already true produce no record.
pub fn evaluate_basic_rule(
    network: &mut Network,
    rule_id: BasicRuleId,
) -> Result<(bool, ChangeSet), ModelError> {
    let rule = network.require_basic_rule(rule_id)?;
    let mut changes = ChangeSet::new(RuleRef::Basic(rule_id));
    let triggered = rule
        .inputs
        .iter()
        .all(|fact| network.fact(*fact).map(|f| f.value).unwrap_or(false));
    if !triggered {
        return Ok((false, changes));
    }
    let outputs = rule.outputs.clone();
    for fact_id in outputs {
        let previous = network.set_fact_value(fact_id, true)?;
        if !previous {
            let fact = network.require_fact(fact_id)?;
            changes.records.push(ChangeRecord::FactChanged {
                container: network.container_of_fact(fact_id),
                fact: fact_id,
                property: fact.property(),
                new_value: true,
            });
        }
    }
    Ok((true, changes))
}

/// Run basic inference to a fixed point.
///
/// Rules are scanned in ascending id order; any satisfied rule fires, at
/// most once per run. Scanning repeats until a full pass fires nothing.
/// Returns the number of firings. Firing only flips facts false to true,
/// so the final fact state does not depend on scan order.
pub fn run_basic_inference(network: &mut Network) -> usize {
    let rule_ids: Vec<BasicRuleId> = network.basic_rules().map(|rule| rule.id).collect();
    let mut fired = vec![false; rule_ids.len()];
    let mut firings = 0;
    loop {
        let mut fired_this_pass = false;
        for (slot, rule_id) in rule_ids.iter().enumerate() {
            if fired[slot] {
                continue;
            }
            let (triggered, _) =
                evaluate_basic_rule(network, *rule_id).expect("rule ids come from the network");
            if triggered {
                fired[slot] = true;
                firings += 1;
                fired_this_pass = true;
            }
        }
        if !fired_this_pass {
            return firings;
        }
    }
}

/// The checking phase of a generic rule against an ordered container pair.
///
/// Every before-run condition must hold: the container's facts bound to the
/// condition's property all carry the desired value. When no such fact
/// exists the condition fails unless `ignore_if_not_present` is set —
/// absence is the only thing the flag forgives, a present fact with the
/// wrong value always fails. The network is not modified.
pub fn check_generic_rule(
    network: &Network,
    rule_id: GenericRuleId,
    container_one: ContainerId,
    container_two: ContainerId,
) -> Result<bool, ModelError> {
    let rule = network.require_generic_rule(rule_id)?;
    network.require_container(container_one)?;
    network.require_container(container_two)?;
    let sides = [
        (&rule.before_one, container_one),
        (&rule.before_two, container_two),
    ];
    for (conditions, container) in sides {
        for pair in conditions {
            let facts = network.facts_with_property(container, pair.property)?;
            if facts.is_empty() {
                if !rule.ignore_if_not_present {
                    return Ok(false);
                }
                continue;
            }
            let all_match = facts.iter().all(|fact| {
                network
                    .fact(*fact)
                    .map(|f| f.value == pair.value)
                    .unwrap_or(false)
            });
            if !all_match {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// The execution phase of a generic rule.
///
/// The after-run lists are applied in order: container one's list first,
/// then container two's. For each condition, every fact bound to the
/// property is set to the target value (recording a change only when the
/// value flips). When the container holds no such fact and
/// `create_if_not_present` is set, a fresh instance fact is created with
/// the target value and appended to the container; otherwise the condition
/// is skipped.
///
/// Callers are expected to have run [`check_generic_rule`] first; execution
/// itself does not re-check.
pub fn execute_generic_rule(
    network: &mut Network,
    rule_id: GenericRuleId,
    container_one: ContainerId,
    container_two: ContainerId,
) -> Result<ChangeSet, ModelError> {
    let rule = network.require_generic_rule(rule_id)?;
    network.require_container(container_one)?;
    network.require_container(container_two)?;
    let create = rule.create_if_not_present;
    let sides: [(Vec<ConditionPair>, ContainerId); 2] = [
        (rule.after_one.clone(), container_one),
        (rule.after_two.clone(), container_two),
    ];
    let mut changes = ChangeSet::new(RuleRef::Generic(rule_id));
    for (conditions, container) in sides {
        for pair in conditions {
            let facts = network.facts_with_property(container, pair.property)?;
            if facts.is_empty() {
                if create {
                    let fact = network.add_instance_fact(pair.property, pair.value)?;
                    network.attach_fact(container, fact)?;
                    changes.records.push(ChangeRecord::FactAdded {
                        container,
                        fact,
                        property: pair.property,
                        value: pair.value,
                    });
                }
                continue;
            }
            for fact in facts {
                let previous = network.set_fact_value(fact, pair.value)?;
                if previous != pair.value {
                    changes.records.push(ChangeRecord::FactChanged {
                        container: Some(container),
                        fact,
                        property: Some(pair.property),
                        new_value: pair.value,
                    });
                }
            }
        }
    }
    Ok(changes)
}

/// Check a generic rule against a link, binding container one to the link's
/// origin and container two to its destination, and execute it when
/// compatible. Returns `None` when the rule is not compatible.
pub fn apply_generic_rule_to_link(
    network: &mut Network,
    rule_id: GenericRuleId,
    link_id: LinkId,
) -> Result<Option<ChangeSet>, ModelError> {
    let link = network.require_link(link_id)?;
    let (origin, destination) = (link.origin, link.destination);
    if !check_generic_rule(network, rule_id, origin, destination)? {
        return Ok(None);
    }
    execute_generic_rule(network, rule_id, origin, destination).map(Some)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::GenericRule;

    fn chain_network() -> (Network, Vec<FactId>) {
        let mut net = Network::new();
        let facts: Vec<FactId> = ["a", "b", "c"]
            .iter()
            .map(|name| net.add_plain_fact(*name, false).unwrap())
            .collect();
        (net, facts)
    }

    #[test]
    fn basic_rule_triggers_and_records_flips() {
        let mut net = Network::new();
        let a = net.add_plain_fact("a", true).unwrap();
        let b = net.add_plain_fact("b", true).unwrap();
        let c = net.add_plain_fact("c", false).unwrap();
        let rule = net.add_basic_rule(vec![a, b], vec![c]).unwrap();
        let (triggered, changes) = evaluate_basic_rule(&mut net, rule).unwrap();
        assert!(triggered);
        assert_eq!(changes.records.len(), 1);
        assert!(net.fact(c).unwrap().value);
    }

    #[test]
    fn basic_rule_with_false_input_does_nothing() {
        let mut net = Network::new();
        let a = net.add_plain_fact("a", true).unwrap();
        let b = net.add_plain_fact("b", false).unwrap();
        let c = net.add_plain_fact("c", false).unwrap();
        let rule = net.add_basic_rule(vec![a, b], vec![c]).unwrap();
        let (triggered, changes) = evaluate_basic_rule(&mut net, rule).unwrap();
        assert!(!triggered);
        assert!(changes.records.is_empty());
        assert!(!net.fact(c).unwrap().value);
    }

    #[test]
    fn basic_rule_set_true_is_idempotent() {
        let mut net = Network::new();
        let a = net.add_plain_fact("a", true).unwrap();
        let rule = net.add_basic_rule(vec![a], vec![a]).unwrap();
        let (triggered, changes) = evaluate_basic_rule(&mut net, rule).unwrap();
        assert!(triggered);
        assert!(changes.records.is_empty());
    }

    #[test]
    fn unknown_basic_rule_errors() {
        let mut net = Network::new();
        assert!(evaluate_basic_rule(&mut net, BasicRuleId(7)).is_err());
    }

    #[test]
    fn inference_fires_chain() {
        let (mut net, facts) = chain_network();
        net.set_fact_value(facts[0], true).unwrap();
        net.add_basic_rule(vec![facts[0]], vec![facts[1]]).unwrap();
        net.add_basic_rule(vec![facts[1]], vec![facts[2]]).unwrap();
        assert_eq!(run_basic_inference(&mut net), 2);
        assert!(net.fact(facts[1]).unwrap().value);
        assert!(net.fact(facts[2]).unwrap().value);
    }

    #[test]
    fn inference_without_satisfiable_rules_is_a_noop() {
        let (mut net, facts) = chain_network();
        net.add_basic_rule(vec![facts[0]], vec![facts[1]]).unwrap();
        let before = net.clone();
        assert_eq!(run_basic_inference(&mut net), 0);
        assert_eq!(net, before);
    }

    #[test]
    fn empty_generic_rule_checks_true_for_any_pair() {
        let mut net = Network::new();
        let c1 = net.add_container("one").unwrap();
        let c2 = net.add_container("two").unwrap();
        let rule = GenericRule {
            id: net.next_generic_rule_id(),
            title: "vacuous".into(),
            before_one: vec![],
            before_two: vec![],
            after_one: vec![],
            after_two: vec![],
            ignore_if_not_present: false,
            create_if_not_present: false,
        };
        let rule = net.insert_generic_rule(rule).unwrap();
        assert!(check_generic_rule(&net, rule, c1, c2).unwrap());
        let changes = execute_generic_rule(&mut net, rule, c1, c2).unwrap();
        assert!(changes.records.is_empty());
    }

    #[test]
    fn check_does_not_modify_the_network() {
        let mut net = Network::new();
        let cp = net.add_common_property("p").unwrap();
        let c1 = net.add_container("one").unwrap();
        let c2 = net.add_container("two").unwrap();
        let fact = net.add_instance_fact(cp, false).unwrap();
        net.attach_fact(c1, fact).unwrap();
        let rule = GenericRule {
            id: net.next_generic_rule_id(),
            title: "r".into(),
            before_one: vec![ConditionPair::new(cp, true)],
            before_two: vec![ConditionPair::new(cp, false)],
            after_one: vec![],
            after_two: vec![],
            ignore_if_not_present: true,
            create_if_not_present: true,
        };
        let rule = net.insert_generic_rule(rule).unwrap();
        let before = net.clone();
        let _ = check_generic_rule(&net, rule, c1, c2).unwrap();
        assert_eq!(net, before);
    }

    #[test]
    fn value_mismatch_is_never_ignored() {
        let mut net = Network::new();
        let cp = net.add_common_property("p").unwrap();
        let c1 = net.add_container("one").unwrap();
        let c2 = net.add_container("two").unwrap();
        let fact = net.add_instance_fact(cp, false).unwrap();
        net.attach_fact(c1, fact).unwrap();
        let rule = GenericRule {
            id: net.next_generic_rule_id(),
            title: "r".into(),
            before_one: vec![ConditionPair::new(cp, true)],
            before_two: vec![],
            after_one: vec![],
            after_two: vec![],
            ignore_if_not_present: true,
            create_if_not_present: false,
        };
        let rule = net.insert_generic_rule(rule).unwrap();
        assert!(!check_generic_rule(&net, rule, c1, c2).unwrap());
    }

    #[test]
    fn multiple_bound_facts_must_all_match_and_all_update() {
        let mut net = Network::new();
        let cp = net.add_common_property("p").unwrap();
        let c1 = net.add_container("one").unwrap();
        let c2 = net.add_container("two").unwrap();
        let f1 = net.add_instance_fact(cp, true).unwrap();
        let f2 = net.add_instance_fact(cp, false).unwrap();
        net.attach_fact(c1, f1).unwrap();
        net.attach_fact(c1, f2).unwrap();
        let rule = GenericRule {
            id: net.next_generic_rule_id(),
            title: "r".into(),
            before_one: vec![ConditionPair::new(cp, true)],
            before_two: vec![],
            after_one: vec![ConditionPair::new(cp, true)],
            after_two: vec![],
            ignore_if_not_present: false,
            create_if_not_present: false,
        };
        let rule = net.insert_generic_rule(rule).unwrap();
        // f2 holds false, so "all facts match true" fails.
        assert!(!check_generic_rule(&net, rule, c1, c2).unwrap());
        // Execution updates every bound fact; only f2 flips.
        let changes = execute_generic_rule(&mut net, rule, c1, c2).unwrap();
        assert_eq!(changes.records.len(), 1);
        assert!(net.fact(f1).unwrap().value);
        assert!(net.fact(f2).unwrap().value);
    }

    #[test]
    fn execute_without_create_skips_absent_properties() {
        let mut net = Network::new();
        let cp = net.add_common_property("p").unwrap();
        let c1 = net.add_container("one").unwrap();
        let c2 = net.add_container("two").unwrap();
        let rule = GenericRule {
            id: net.next_generic_rule_id(),
            title: "r".into(),
            before_one: vec![],
            before_two: vec![],
            after_one: vec![ConditionPair::new(cp, true)],
            after_two: vec![],
            ignore_if_not_present: false,
            create_if_not_present: false,
        };
        let rule = net.insert_generic_rule(rule).unwrap();
        let before = net.clone();
        let changes = execute_generic_rule(&mut net, rule, c1, c2).unwrap();
        assert!(changes.records.is_empty());
        assert_eq!(net, before);
    }

    #[test]
    fn apply_to_link_binds_origin_to_container_one() {
        let mut net = Network::new();
        let cp = net.add_common_property("p").unwrap();
        let a = net.add_container("a").unwrap();
        let b = net.add_container("b").unwrap();
        let fact = net.add_instance_fact(cp, true).unwrap();
        net.attach_fact(a, fact).unwrap();
        let link = net.add_link(a, b, "ab").unwrap();
        let rule = GenericRule {
            id: net.next_generic_rule_id(),
            title: "needs origin p=true".into(),
            before_one: vec![ConditionPair::new(cp, true)],
            before_two: vec![],
            after_one: vec![],
            after_two: vec![],
            ignore_if_not_present: false,
            create_if_not_present: false,
        };
        let rule = net.insert_generic_rule(rule).unwrap();
        assert!(apply_generic_rule_to_link(&mut net, rule, link).unwrap().is_some());

        // The reverse link fails: b holds no fact bound to p and the
        // absence flag is off.
        let back = net.add_link(b, a, "ba").unwrap();
        assert!(apply_generic_rule_to_link(&mut net, rule, back).unwrap().is_none());
    }
}
