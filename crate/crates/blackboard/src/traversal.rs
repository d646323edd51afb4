//! Constrained shortest-path search and single-pass traversal simulation.
//!
//! A qualifying path is a simple directed path (no repeated containers)
//! from the start container to the end container whose length is at least
//! half the container count (rounded down) and at most
//! [`SEARCH_DEPTH_CAP`] links. The minimum-length constraint rules out
//! trivial layouts where the endpoints are linked directly.
//!
//! [`find_shortest_path`] returns the shortest qualifying path by
//! exhaustive depth-first enumeration with branch-and-bound pruning; ties
//! go to the lexicographically smallest link-id sequence. The simulation
//! then walks the path once, offering every generic rule exactly one shot
//! at each link: compatible rules run immediately (later rules on the same
//! link see their effects) and are never re-checked.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::engine::{apply_generic_rule_to_link, ChangeSet};
use crate::model::{ContainerId, GenericRuleId, LinkId};
use crate::network::{ModelError, Network};

/// Paths are never explored beyond this many links.
pub const SEARCH_DEPTH_CAP: usize = 1000;

#[derive(Debug, Error)]
pub enum TraversalError {
    #[error("start and end containers are not set")]
    MissingEndpoints,
    #[error("no qualifying path of at least {min_length} links exists")]
    NoQualifyingPath { min_length: usize },
    #[error("path breaks at position {position}: link {link} does not continue the chain")]
    BrokenChain { position: usize, link: u32 },
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// One link of a traversal and the change sets of every rule that ran on
/// it, in ascending rule-id order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraversalStep {
    pub index: usize,
    pub link: LinkId,
    pub applied: Vec<ChangeSet>,
}

/// Result of a path search.
#[derive(Debug, Clone)]
pub struct PathSearch {
    pub path: Vec<LinkId>,
    pub elapsed: Duration,
}

/// Result of walking a path.
#[derive(Debug, Clone)]
pub struct Traversal {
    pub steps: Vec<TraversalStep>,
    pub step_times: Vec<Duration>,
}

/// A full search-then-traverse run.
#[derive(Debug, Clone)]
pub struct TraversalReport {
    pub path: Vec<LinkId>,
    pub search_time: Duration,
    pub steps: Vec<TraversalStep>,
    pub step_times: Vec<Duration>,
}

struct Adjacency {
    /// Outgoing `(link, destination)` pairs per container, in link-id order.
    outgoing: BTreeMap<ContainerId, Vec<(LinkId, ContainerId)>>,
    /// Minimum links from each container to the end container, ignoring
    /// the simple-path constraint. Containers that cannot reach the end at
    /// all are absent. A valid lower bound for pruning.
    to_end: HashMap<ContainerId, usize>,
}

fn build_adjacency(network: &Network, end: ContainerId) -> Adjacency {
    let mut outgoing: BTreeMap<ContainerId, Vec<(LinkId, ContainerId)>> = BTreeMap::new();
    let mut incoming: HashMap<ContainerId, Vec<ContainerId>> = HashMap::new();
    for link in network.links() {
        outgoing
            .entry(link.origin)
            .or_default()
            .push((link.id, link.destination));
        incoming.entry(link.destination).or_default().push(link.origin);
    }
    let mut to_end = HashMap::new();
    to_end.insert(end, 0usize);
    let mut queue = VecDeque::from([end]);
    while let Some(node) = queue.pop_front() {
        let depth = to_end[&node];
        if let Some(sources) = incoming.get(&node) {
            for source in sources {
                if !to_end.contains_key(source) {
                    to_end.insert(*source, depth + 1);
                    queue.push_back(*source);
                }
            }
        }
    }
    Adjacency { outgoing, to_end }
}

/// Whether any simple start-to-end path with length in
/// `[min_length, depth_cap]` exists. Stops at the first hit.
pub(crate) fn qualifying_path_exists(
    network: &Network,
    start: ContainerId,
    end: ContainerId,
    min_length: usize,
    depth_cap: usize,
) -> bool {
    let adjacency = build_adjacency(network, end);
    if !adjacency.to_end.contains_key(&start) {
        return false;
    }
    let mut visited = vec![start];
    exists_from(&adjacency, start, end, min_length, depth_cap, 0, &mut visited)
}

fn exists_from(
    adjacency: &Adjacency,
    at: ContainerId,
    end: ContainerId,
    min_length: usize,
    depth_cap: usize,
    length: usize,
    visited: &mut Vec<ContainerId>,
) -> bool {
    if at == end {
        return length >= min_length;
    }
    let Some(links) = adjacency.outgoing.get(&at) else {
        return false;
    };
    for (_, next) in links {
        let Some(remaining) = adjacency.to_end.get(next) else {
            continue;
        };
        if length + 1 + remaining > depth_cap || visited.contains(next) {
            continue;
        }
        visited.push(*next);
        let found = exists_from(adjacency, *next, end, min_length, depth_cap, length + 1, visited);
        visited.pop();
        if found {
            return true;
        }
    }
    false
}

struct ShortestSearch<'a> {
    adjacency: &'a Adjacency,
    end: ContainerId,
    min_length: usize,
    depth_cap: usize,
    best: Option<Vec<LinkId>>,
    /// Set once a path of exactly `min_length` links is found; nothing can
    /// beat it and depth-first order already makes it the lexicographic
    /// minimum of that length.
    done: bool,
}

impl ShortestSearch<'_> {
    fn explore(
        &mut self,
        at: ContainerId,
        path: &mut Vec<LinkId>,
        visited: &mut Vec<ContainerId>,
    ) {
        if self.done {
            return;
        }
        if at == self.end {
            if path.len() >= self.min_length {
                let better = match &self.best {
                    None => true,
                    Some(best) => {
                        path.len() < best.len() || (path.len() == best.len() && &path[..] < &best[..])
                    }
                };
                if better {
                    self.best = Some(path.clone());
                    if path.len() == self.min_length {
                        self.done = true;
                    }
                }
            }
            return;
        }
        let Some(links) = self.adjacency.outgoing.get(&at) else {
            return;
        };
        for (link, next) in links {
            let Some(remaining) = self.adjacency.to_end.get(next) else {
                continue;
            };
            let lower_bound = path.len() + 1 + remaining;
            if lower_bound > self.depth_cap {
                continue;
            }
            if let Some(best) = &self.best {
                if lower_bound > best.len() {
                    continue;
                }
            }
            if visited.contains(next) {
                continue;
            }
            path.push(*link);
            visited.push(*next);
            self.explore(*next, path, visited);
            visited.pop();
            path.pop();
            if self.done {
                return;
            }
        }
    }
}

fn shortest_qualifying_path(
    network: &Network,
    start: ContainerId,
    end: ContainerId,
    min_length: usize,
    depth_cap: usize,
) -> Option<Vec<LinkId>> {
    let adjacency = build_adjacency(network, end);
    adjacency.to_end.get(&start)?;
    let mut search = ShortestSearch {
        adjacency: &adjacency,
        end,
        min_length,
        depth_cap,
        best: None,
        done: false,
    };
    let mut path = Vec::new();
    let mut visited = vec![start];
    search.explore(start, &mut path, &mut visited);
    search.best
}

/// Find the shortest qualifying path from the network's start container to
/// its end container, measuring the elapsed search time.
pub fn find_shortest_path(network: &Network) -> Result<PathSearch, TraversalError> {
    let (start, end) = match (network.start(), network.end()) {
        (Some(start), Some(end)) => (start, end),
        _ => return Err(TraversalError::MissingEndpoints),
    };
    let min_length = network.container_count() / 2;
    let started = Instant::now();
    let path = shortest_qualifying_path(network, start, end, min_length, SEARCH_DEPTH_CAP);
    let elapsed = started.elapsed();
    match path {
        Some(path) => Ok(PathSearch { path, elapsed }),
        None => Err(TraversalError::NoQualifyingPath { min_length }),
    }
}

/// Walk `path` link by link, offering every generic rule one application
/// per link in ascending rule-id order. Mutations take effect immediately,
/// so later rules on the same link see earlier rules' changes, but no rule
/// is re-checked within a link. Per-link times cover rule checking and
/// execution only.
pub fn simulate_traversal(
    network: &mut Network,
    path: &[LinkId],
) -> Result<Traversal, TraversalError> {
    // Verify the chain before mutating anything.
    let mut at: Option<ContainerId> = None;
    for (position, link_id) in path.iter().enumerate() {
        let link = network.require_link(*link_id)?;
        if let Some(at) = at {
            if link.origin != at {
                return Err(TraversalError::BrokenChain {
                    position,
                    link: link_id.0,
                });
            }
        }
        at = Some(link.destination);
    }

    let rule_ids: Vec<GenericRuleId> = network.generic_rules().map(|rule| rule.id).collect();
    let mut steps = Vec::with_capacity(path.len());
    let mut step_times = Vec::with_capacity(path.len());
    for (index, link) in path.iter().enumerate() {
        let started = Instant::now();
        let mut applied = Vec::new();
        for rule in &rule_ids {
            if let Some(changes) = apply_generic_rule_to_link(network, *rule, *link)? {
                applied.push(changes);
            }
        }
        step_times.push(started.elapsed());
        steps.push(TraversalStep {
            index,
            link: *link,
            applied,
        });
    }
    Ok(Traversal { steps, step_times })
}

/// Find the constrained shortest path, record it on the network, and
/// simulate the traversal.
pub fn run_traversal(network: &mut Network) -> Result<TraversalReport, TraversalError> {
    let search = find_shortest_path(network)?;
    network.set_shortest_path(search.path.clone())?;
    let traversal = simulate_traversal(network, &search.path)?;
    Ok(TraversalReport {
        path: search.path,
        search_time: search.elapsed,
        steps: traversal.steps,
        step_times: traversal.step_times,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// a -> b -> c chain plus direct and detour layouts.
    fn line(containers: usize) -> (Network, Vec<ContainerId>) {
        let mut net = Network::new();
        let ids: Vec<ContainerId> = (0..containers)
            .map(|i| net.add_container(format!("container{i}")).unwrap())
            .collect();
        (net, ids)
    }

    #[test]
    fn unique_chain_is_found() {
        let (mut net, c) = line(3);
        let ab = net.add_link(c[0], c[1], "ab").unwrap();
        let bc = net.add_link(c[1], c[2], "bc").unwrap();
        net.set_endpoints(c[0], c[2]).unwrap();
        // min length = floor(3/2) = 1
        let search = find_shortest_path(&net).unwrap();
        assert_eq!(search.path, vec![ab, bc]);
    }

    #[test]
    fn min_length_constraint_excludes_direct_link() {
        let (mut net, c) = line(4);
        let _direct = net.add_link(c[0], c[1], "direct").unwrap();
        let ac = net.add_link(c[0], c[2], "ac").unwrap();
        let cb = net.add_link(c[2], c[1], "cb").unwrap();
        net.set_endpoints(c[0], c[1]).unwrap();
        // min length = floor(4/2) = 2: the one-link path does not qualify.
        let search = find_shortest_path(&net).unwrap();
        assert_eq!(search.path, vec![ac, cb]);
    }

    #[test]
    fn no_links_means_no_path() {
        let (mut net, c) = line(2);
        net.set_endpoints(c[0], c[1]).unwrap();
        assert!(matches!(
            find_shortest_path(&net),
            Err(TraversalError::NoQualifyingPath { .. })
        ));
    }

    #[test]
    fn missing_endpoints_is_an_error() {
        let (net, _) = line(2);
        assert!(matches!(
            find_shortest_path(&net),
            Err(TraversalError::MissingEndpoints)
        ));
    }

    #[test]
    fn ties_break_to_smallest_link_ids() {
        let (mut net, c) = line(4);
        // Two disjoint length-2 routes from 0 to 3.
        let a1 = net.add_link(c[0], c[1], "l0").unwrap();
        let a2 = net.add_link(c[1], c[3], "l1").unwrap();
        let b1 = net.add_link(c[0], c[2], "l2").unwrap();
        let b2 = net.add_link(c[2], c[3], "l3").unwrap();
        net.set_endpoints(c[0], c[3]).unwrap();
        let search = find_shortest_path(&net).unwrap();
        assert_eq!(search.path, vec![a1, a2]);
        let _ = (b1, b2);
    }

    #[test]
    fn traversability_check_respects_minimum() {
        let (mut net, c) = line(4);
        net.add_link(c[0], c[3], "direct").unwrap();
        net.set_endpoints(c[0], c[3]).unwrap();
        // Only a length-1 path exists but floor(4/2) = 2 is required.
        assert!(!crate::netgen::validate_traversability(&net));
        net.add_link(c[0], c[1], "a").unwrap();
        net.add_link(c[1], c[3], "b").unwrap();
        assert!(crate::netgen::validate_traversability(&net));
    }

    #[test]
    fn simulation_rejects_broken_chains() {
        let (mut net, c) = line(3);
        let ab = net.add_link(c[0], c[1], "ab").unwrap();
        let cb = net.add_link(c[2], c[1], "cb").unwrap();
        let err = simulate_traversal(&mut net, &[ab, cb]).unwrap_err();
        assert!(matches!(err, TraversalError::BrokenChain { position: 1, .. }));
    }

    #[test]
    fn incompatible_rules_leave_network_unchanged() {
        let (mut net, c) = line(3);
        let cp = net.add_common_property("p").unwrap();
        let ab = net.add_link(c[0], c[1], "ab").unwrap();
        let bc = net.add_link(c[1], c[2], "bc").unwrap();
        let rule = crate::model::GenericRule {
            id: net.next_generic_rule_id(),
            title: "never".into(),
            before_one: vec![crate::model::ConditionPair::new(cp, true)],
            before_two: vec![],
            after_one: vec![crate::model::ConditionPair::new(cp, true)],
            after_two: vec![],
            ignore_if_not_present: false,
            create_if_not_present: true,
        };
        net.insert_generic_rule(rule).unwrap();
        let before = net.clone();
        let traversal = simulate_traversal(&mut net, &[ab, bc]).unwrap();
        assert_eq!(traversal.steps.len(), 2);
        assert!(traversal.steps.iter().all(|step| step.applied.is_empty()));
        assert_eq!(net, before);
    }
}
