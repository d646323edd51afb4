//! Seeded random generation of experiment networks.
//!
//! Generation is a pure function of `(params, seed)`: the same inputs give
//! a byte-identical network on every platform. All randomness flows through
//! [`Rng`], a ChaCha8 stream drawn in fixed 32-bit quantities, so the draw
//! sequence does not depend on pointer width or platform.
//!
//! A network is built in a fixed order: common properties and facts, then
//! generic rules, then containers, fact assignment, start/end selection,
//! and finally links. Link creation is validated for traversability and
//! restarted from scratch on failure, up to [`LINK_ATTEMPT_CAP`] attempts.

use rand::{Rng as _, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::model::{ConditionPair, ContainerId, GenericRule, GenericRuleId, LinkId};
use crate::network::{ModelError, Network};

use crate::traversal::SEARCH_DEPTH_CAP;

/// How many times link creation may be restarted before the configuration
/// is declared infeasible.
pub const LINK_ATTEMPT_CAP: usize = 1000;

#[derive(Debug, Error)]
pub enum GenError {
    #[error("invalid generation parameters: {0}")]
    InvalidParams(String),
    #[error("no traversable link layout found in {attempts} attempts")]
    LinkGeneration { attempts: usize },
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// How facts are distributed over containers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FactAssignment {
    /// Containers take turns drawing a random fact from the remaining pool.
    Uniform,
    /// Each fact lands in an independently random container.
    Random,
}

impl FactAssignment {
    pub fn as_str(&self) -> &'static str {
        match self {
            FactAssignment::Uniform => "uniform",
            FactAssignment::Random => "random",
        }
    }

    pub fn parse(text: &str) -> Option<Self> {
        match text {
            "uniform" => Some(FactAssignment::Uniform),
            "random" => Some(FactAssignment::Random),
            _ => None,
        }
    }
}

impl std::fmt::Display for FactAssignment {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Input parameters of one generated network.
#[derive(Debug, Clone, PartialEq)]
pub struct GenerationParams {
    pub fact_count: u32,
    pub rule_count: u32,
    pub link_count: u32,
    pub container_count: u32,
    pub common_property_count: u32,
    pub properties_per_rule: u32,
    pub fact_assignment: FactAssignment,
    pub hybrid_rule_chance: f64,
    pub ignore_chance: f64,
    pub create_chance: f64,
}

impl Default for GenerationParams {
    fn default() -> Self {
        Self {
            fact_count: 100,
            rule_count: 100,
            link_count: 100,
            container_count: 50,
            common_property_count: 50,
            properties_per_rule: 10,
            fact_assignment: FactAssignment::Uniform,
            hybrid_rule_chance: 0.5,
            ignore_chance: 0.25,
            create_chance: 0.25,
        }
    }
}

impl GenerationParams {
    pub fn validate(&self) -> Result<(), GenError> {
        let counts = [
            ("fact_count", self.fact_count),
            ("rule_count", self.rule_count),
            ("link_count", self.link_count),
            ("container_count", self.container_count),
            ("common_property_count", self.common_property_count),
            ("properties_per_rule", self.properties_per_rule),
        ];
        for (name, value) in counts {
            if value == 0 {
                return Err(GenError::InvalidParams(format!("{name} must be at least 1")));
            }
        }
        if self.container_count < 2 {
            return Err(GenError::InvalidParams(
                "container_count must be at least 2".into(),
            ));
        }
        if self.properties_per_rule > self.common_property_count {
            return Err(GenError::InvalidParams(format!(
                "properties_per_rule ({}) exceeds common_property_count ({})",
                self.properties_per_rule, self.common_property_count
            )));
        }
        let chances = [
            ("hybrid_rule_chance", self.hybrid_rule_chance),
            ("ignore_chance", self.ignore_chance),
            ("create_chance", self.create_chance),
        ];
        for (name, value) in chances {
            if !(0.0..=1.0).contains(&value) || value.is_nan() {
                return Err(GenError::InvalidParams(format!(
                    "{name} must be within [0, 1], got {value}"
                )));
            }
        }
        Ok(())
    }

    /// The parameters as ordered `(key, value)` pairs, the canonical form
    /// used by save files and config files.
    pub fn settings(&self) -> Vec<(&'static str, String)> {
        vec![
            ("fact_count", self.fact_count.to_string()),
            ("rule_count", self.rule_count.to_string()),
            ("link_count", self.link_count.to_string()),
            ("container_count", self.container_count.to_string()),
            (
                "common_property_count",
                self.common_property_count.to_string(),
            ),
            ("properties_per_rule", self.properties_per_rule.to_string()),
            ("fact_assignment", self.fact_assignment.to_string()),
            ("hybrid_rule_chance", self.hybrid_rule_chance.to_string()),
            ("ignore_chance", self.ignore_chance.to_string()),
            ("create_chance", self.create_chance.to_string()),
        ]
    }

    /// Apply one `key = value` setting. Unknown keys and malformed values
    /// are reported as strings so callers can add file/line context.
    pub fn set_setting(&mut self, key: &str, value: &str) -> Result<(), String> {
        fn count(value: &str) -> Result<u32, String> {
            value
                .parse::<u32>()
                .map_err(|_| format!("expected a non-negative integer, got {value:?}"))
        }
        fn chance(value: &str) -> Result<f64, String> {
            value
                .parse::<f64>()
                .map_err(|_| format!("expected a number, got {value:?}"))
        }
        match key {
            "fact_count" => self.fact_count = count(value)?,
            "rule_count" => self.rule_count = count(value)?,
            "link_count" => self.link_count = count(value)?,
            "container_count" => self.container_count = count(value)?,
            "common_property_count" => self.common_property_count = count(value)?,
            "properties_per_rule" => self.properties_per_rule = count(value)?,
            "fact_assignment" => {
                self.fact_assignment = FactAssignment::parse(value)
                    .ok_or_else(|| format!("expected uniform or random, got {value:?}"))?
            }
            "hybrid_rule_chance" => self.hybrid_rule_chance = chance(value)?,
            "ignore_chance" => self.ignore_chance = chance(value)?,
            "create_chance" => self.create_chance = chance(value)?,
            other => return Err(format!("unknown setting {other:?}")),
        }
        Ok(())
    }
}

/// Deterministic random source for network generation.
///
/// Backed by ChaCha8 and seeded from a single `u64`. Integer draws go
/// through `u32` ranges and sampling without replacement is a partial
/// Fisher-Yates shuffle, so a seed pins the entire draw sequence.
#[derive(Debug, Clone)]
pub struct Rng {
    inner: ChaCha8Rng,
}

impl Rng {
    pub fn from_seed(seed: u64) -> Self {
        Self {
            inner: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Uniform draw from `0..n`. `n` must be positive.
    pub fn index(&mut self, n: usize) -> usize {
        debug_assert!(n > 0 && n <= u32::MAX as usize);
        self.inner.random_range(0..n as u32) as usize
    }

    /// Bernoulli draw with probability `p` of true.
    pub fn chance(&mut self, p: f64) -> bool {
        self.inner.random_bool(p)
    }

    /// Fair boolean draw.
    pub fn flip(&mut self) -> bool {
        self.inner.random()
    }

    /// `k` distinct values from `0..n`, in draw order.
    pub fn distinct(&mut self, n: usize, k: usize) -> Vec<usize> {
        debug_assert!(k <= n);
        let mut pool: Vec<usize> = (0..n).collect();
        for slot in 0..k {
            let pick = slot + self.index(n - slot);
            pool.swap(slot, pick);
        }
        pool.truncate(k);
        pool
    }
}

/// The three ways a generic rule's condition lists can be derived.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RuleGenMethod {
    /// After lists reuse the before lists' properties; values are fresh.
    Uniform,
    /// After lists are sampled from scratch.
    Random,
    /// After lists start as copies, then each entry may be resampled to a
    /// different property with `hybrid_rule_chance`.
    Hybrid,
}

/// Create the common properties ("cp0", "cp1", ...) and the instance facts,
/// each bound to a uniformly random property with a uniformly random
/// initial value.
pub fn generate_properties_and_facts(
    params: &GenerationParams,
    network: &mut Network,
    rng: &mut Rng,
) -> Result<(), GenError> {
    for index in 0..params.common_property_count {
        network.add_common_property(format!("cp{index}"))?;
    }
    let property_ids: Vec<_> = network.common_properties().map(|p| p.id).collect();
    for _ in 0..params.fact_count {
        let property = property_ids[rng.index(property_ids.len())];
        let value = rng.flip();
        network.add_instance_fact(property, value)?;
    }
    Ok(())
}

/// Generate one generic rule, picking one of the three methods with equal
/// probability.
pub fn generate_generic_rule(
    params: &GenerationParams,
    index: u32,
    rng: &mut Rng,
) -> Result<GenericRule, GenError> {
    if params.properties_per_rule > params.common_property_count {
        return Err(GenError::InvalidParams(format!(
            "properties_per_rule ({}) exceeds common_property_count ({})",
            params.properties_per_rule, params.common_property_count
        )));
    }
    let method = match rng.index(3) {
        0 => RuleGenMethod::Uniform,
        1 => RuleGenMethod::Random,
        _ => RuleGenMethod::Hybrid,
    };
    generate_generic_rule_with_method(params, index, method, rng)
}

/// Generate one generic rule with a fixed derivation method.
pub fn generate_generic_rule_with_method(
    params: &GenerationParams,
    index: u32,
    method: RuleGenMethod,
    rng: &mut Rng,
) -> Result<GenericRule, GenError> {
    let total = params.common_property_count as usize;
    let per_rule = params.properties_per_rule as usize;

    let sample_properties = |rng: &mut Rng| -> Vec<u32> {
        rng.distinct(total, per_rule)
            .into_iter()
            .map(|p| p as u32)
            .collect()
    };
    let with_values = |properties: &[u32], rng: &mut Rng| -> Vec<ConditionPair> {
        properties
            .iter()
            .map(|p| ConditionPair::new(crate::model::CommonPropertyId(*p), rng.flip()))
            .collect()
    };

    let before_one_props = sample_properties(rng);
    let before_one = with_values(&before_one_props, rng);
    let before_two_props = sample_properties(rng);
    let before_two = with_values(&before_two_props, rng);

    let derive_after = |before: &[u32], rng: &mut Rng| -> Vec<ConditionPair> {
        let properties = match method {
            RuleGenMethod::Uniform => before.to_vec(),
            RuleGenMethod::Random => sample_properties(rng),
            RuleGenMethod::Hybrid => {
                let mut current = before.to_vec();
                for slot in 0..current.len() {
                    if !rng.chance(params.hybrid_rule_chance) {
                        continue;
                    }
                    // Resample to a property outside the list, keeping the
                    // entries distinct. When the list already covers every
                    // property there is nothing different to pick.
                    let alternatives: Vec<u32> = (0..total as u32)
                        .filter(|p| !current.contains(p))
                        .collect();
                    if alternatives.is_empty() {
                        continue;
                    }
                    current[slot] = alternatives[rng.index(alternatives.len())];
                }
                current
            }
        };
        with_values(&properties, rng)
    };

    let after_one = derive_after(&before_one_props, rng);
    let after_two = derive_after(&before_two_props, rng);

    let ignore_if_not_present = rng.chance(params.ignore_chance);
    let create_if_not_present = rng.chance(params.create_chance);

    Ok(GenericRule {
        id: GenericRuleId(index),
        title: format!("gr{index}"),
        before_one,
        before_two,
        after_one,
        after_two,
        ignore_if_not_present,
        create_if_not_present,
    })
}

/// Attach every fact to exactly one container using the configured method.
pub fn assign_facts(
    params: &GenerationParams,
    network: &mut Network,
    rng: &mut Rng,
) -> Result<(), GenError> {
    let containers: Vec<ContainerId> = network.containers().map(|c| c.id).collect();
    let facts: Vec<_> = network.facts().map(|f| f.id).collect();
    match params.fact_assignment {
        FactAssignment::Uniform => {
            // Round-robin over containers, each drawing a random fact from
            // the remaining pool until it is empty.
            let mut pool = facts;
            'outer: loop {
                for container in &containers {
                    if pool.is_empty() {
                        break 'outer;
                    }
                    let fact = pool.swap_remove(rng.index(pool.len()));
                    network.attach_fact(*container, fact)?;
                }
            }
        }
        FactAssignment::Random => {
            for fact in facts {
                let container = containers[rng.index(containers.len())];
                network.attach_fact(container, fact)?;
            }
        }
    }
    Ok(())
}

/// Pick two distinct containers to act as the traversal start and end.
pub fn pick_endpoints(
    network: &Network,
    rng: &mut Rng,
) -> Result<(ContainerId, ContainerId), GenError> {
    let containers: Vec<ContainerId> = network.containers().map(|c| c.id).collect();
    if containers.len() < 2 {
        return Err(GenError::InvalidParams(
            "picking endpoints requires at least 2 containers".into(),
        ));
    }
    let start = rng.index(containers.len());
    let mut end = rng.index(containers.len() - 1);
    if end >= start {
        end += 1;
    }
    Ok((containers[start], containers[end]))
}

/// Create `link_count` links and validate the layout.
///
/// While at least `container_count` links remain, a full pass gives every
/// container one outgoing link to a random other container. The remainder
/// links each connect two random distinct containers. The layout must then
/// pass [`validate_traversability`]; on failure all links are deleted and
/// creation restarts, up to [`LINK_ATTEMPT_CAP`] attempts.
///
/// Start and end containers must already be set on the network.
pub fn generate_links(
    params: &GenerationParams,
    network: &mut Network,
    rng: &mut Rng,
) -> Result<(), GenError> {
    let containers: Vec<ContainerId> = network.containers().map(|c| c.id).collect();
    let total = containers.len();
    debug_assert!(network.start().is_some() && network.end().is_some());

    for _attempt in 0..LINK_ATTEMPT_CAP {
        let mut remaining = params.link_count as usize;
        while remaining >= total {
            for (position, origin) in containers.iter().enumerate() {
                let mut target = rng.index(total - 1);
                if target >= position {
                    target += 1;
                }
                let id = network.next_link_id();
                network.add_link(*origin, containers[target], format!("link{}", id.0))?;
            }
            remaining -= total;
        }
        for _ in 0..remaining {
            let origin = rng.index(total);
            let mut destination = rng.index(total - 1);
            if destination >= origin {
                destination += 1;
            }
            let id = network.next_link_id();
            network.add_link(
                containers[origin],
                containers[destination],
                format!("link{}", id.0),
            )?;
        }
        if validate_traversability(network) {
            return Ok(());
        }
        network.clear_links();
    }
    Err(GenError::LinkGeneration {
        attempts: LINK_ATTEMPT_CAP,
    })
}

/// Whether a qualifying path exists: a simple directed path from the start
/// container to the end container, at least half the container count long
/// (rounded down) and at most [`SEARCH_DEPTH_CAP`] links.
///
/// Returns false when endpoints are unset, no such path exists, or every
/// candidate runs past the depth cap.
pub fn validate_traversability(network: &Network) -> bool {
    let (start, end) = match (network.start(), network.end()) {
        (Some(start), Some(end)) => (start, end),
        _ => return false,
    };
    let min_length = network.container_count() / 2;
    crate::traversal::qualifying_path_exists(network, start, end, min_length, SEARCH_DEPTH_CAP)
}

/// Generate a complete experiment network from `(params, seed)`.
pub fn generate_network(params: &GenerationParams, seed: u64) -> Result<Network, GenError> {
    params.validate()?;
    let mut rng = Rng::from_seed(seed);
    let mut network = Network::new();

    generate_properties_and_facts(params, &mut network, &mut rng)?;
    for index in 0..params.rule_count {
        let rule = generate_generic_rule(params, index, &mut rng)?;
        network.insert_generic_rule(rule)?;
    }
    for index in 0..params.container_count {
        network.add_container(format!("container{index}"))?;
    }
    assign_facts(params, &mut network, &mut rng)?;
    let (start, end) = pick_endpoints(&network, &mut rng)?;
    network.set_endpoints(start, end)?;
    generate_links(params, &mut network, &mut rng)?;
    Ok(network)
}
