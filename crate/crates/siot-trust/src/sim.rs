//! Synthetic trace generation with planted honest/malicious behavior, and
//! the recommendation/trace attack models used to stress the estimation
//! threshold.
//!
//! Malicious nodes here are deceptive service providers. Each one grooms a
//! seeded set of *victims* (honest nodes whose requests it drops and whose
//! conversations it leaves one-sided) while serving every other partner,
//! its *marks*, as reliably as an honest node would. Marks therefore
//! develop trustworthy opinions of an exploiter, and only a victim's own
//! observation says otherwise; a high recommendation threshold is what
//! keeps the crowd from overriding the victim. Pairs of malicious nodes
//! exploit each other and rarely answer back. Every behavioral parameter
//! is part of [`SimConfig`].

use std::collections::{BTreeMap, BTreeSet};
use std::io::Read;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::aggregate::TrustVerdict;
use crate::cluster::TrustLabel;
use crate::error::{Error, Result};
use crate::graph::{InteractionRecord, NodeId, PairKey, SocialGraph};
use crate::seed::derive_seed;

/// Synthetic trace configuration. Defaults mirror the reference trace
/// shape: 76 nodes and 18,226 interactions over four days.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimConfig {
    pub node_count: u32,
    pub malicious_fraction: f64,
    pub community_count: u32,
    pub interaction_count: u64,
    pub duration_secs: u64,
    pub rng_seed: u64,

    /// Success probability of an honestly served request (honest trustee,
    /// or a malicious trustee keeping up its camouflage toward a mark).
    pub honest_success_prob: f64,
    /// Success probability of a request served by a malicious node to one
    /// of its victims or to a fellow malicious node.
    pub malicious_success_prob: f64,
    /// Friendship probability for pairs sharing a community.
    pub in_community_friend_prob: f64,
    /// Friendship probability for pairs in disjoint communities.
    pub cross_community_friend_prob: f64,
    /// Most communities a node joins (uniform between 1 and this).
    pub max_communities_per_node: u32,
    /// Share of its honest community mates each malicious node victimizes.
    pub victim_fraction: f64,
    /// Share of honest nodes outside its communities each malicious node
    /// additionally victimizes.
    pub cross_victim_fraction: f64,
    /// Probability that a pair sharing a community develops an ongoing
    /// interaction relationship.
    pub in_community_pair_activation: f64,
    /// Same, for pairs in disjoint communities.
    pub cross_community_pair_activation: f64,
    /// Multiplier on the community-based activation for mark pairs
    /// (malicious nodes spread their camouflage a bit thinner than real
    /// relationships).
    pub mark_pair_activation_scale: f64,
    /// Activation probability for victim pairs, regardless of community
    /// (grooming crosses community lines).
    pub victim_pair_activation: f64,
    /// Activation probability for malicious-malicious pairs sharing a
    /// community.
    pub malicious_pair_activation: f64,
    /// Probability that the victim is the initiator of a record in a
    /// victim pair (the exploiter rarely answers back).
    pub victim_direction_skew: f64,
    /// Probability that the dominant endpoint initiates a record in a
    /// malicious-malicious pair.
    pub malicious_pair_direction_skew: f64,
    /// Messages per record are uniform in `1..=message_volume_max`.
    pub message_volume_max: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            node_count: 76,
            malicious_fraction: 0.2,
            community_count: 4,
            interaction_count: 18_226,
            duration_secs: 4 * 86_400,
            rng_seed: 0,
            honest_success_prob: 0.95,
            malicious_success_prob: 0.2,
            in_community_friend_prob: 0.75,
            cross_community_friend_prob: 0.75,
            max_communities_per_node: 1,
            victim_fraction: 0.3,
            cross_victim_fraction: 0.015,
            in_community_pair_activation: 0.85,
            cross_community_pair_activation: 0.001,
            mark_pair_activation_scale: 0.6,
            victim_pair_activation: 0.55,
            malicious_pair_activation: 0.85,
            victim_direction_skew: 0.97,
            malicious_pair_direction_skew: 0.5,
            message_volume_max: 6,
        }
    }
}

impl SimConfig {
    fn validate(&self) -> Result<()> {
        if self.node_count < 2 {
            return Err(Error::Config("node_count must be >= 2".to_string()));
        }
        if self.interaction_count < 1 {
            return Err(Error::Config("interaction_count must be >= 1".to_string()));
        }
        if self.community_count < 1 {
            return Err(Error::Config("community_count must be >= 1".to_string()));
        }
        if self.duration_secs < 1 {
            return Err(Error::Config("duration_secs must be >= 1".to_string()));
        }
        if !(0.0..1.0).contains(&self.malicious_fraction) {
            return Err(Error::Config(format!(
                "malicious_fraction must be in [0, 1), got {}",
                self.malicious_fraction
            )));
        }
        let probs = [
            ("honest_success_prob", self.honest_success_prob),
            ("malicious_success_prob", self.malicious_success_prob),
            ("in_community_friend_prob", self.in_community_friend_prob),
            (
                "cross_community_friend_prob",
                self.cross_community_friend_prob,
            ),
            ("victim_fraction", self.victim_fraction),
            ("cross_victim_fraction", self.cross_victim_fraction),
            ("in_community_pair_activation", self.in_community_pair_activation),
            (
                "cross_community_pair_activation",
                self.cross_community_pair_activation,
            ),
            ("mark_pair_activation_scale", self.mark_pair_activation_scale),
            ("victim_pair_activation", self.victim_pair_activation),
            ("malicious_pair_activation", self.malicious_pair_activation),
            ("victim_direction_skew", self.victim_direction_skew),
            (
                "malicious_pair_direction_skew",
                self.malicious_pair_direction_skew,
            ),
        ];
        for (name, p) in probs {
            if !p.is_finite() || !(0.0..=1.0).contains(&p) {
                return Err(Error::Config(format!("{name} must be in [0, 1], got {p}")));
            }
        }
        if self.max_communities_per_node < 1 {
            return Err(Error::Config(
                "max_communities_per_node must be >= 1".to_string(),
            ));
        }
        if self.message_volume_max < 1 {
            return Err(Error::Config("message_volume_max must be >= 1".to_string()));
        }
        Ok(())
    }
}

/// Planted truth behind a synthetic trace: per-node honesty, each
/// exploiter's victim set, and the expected binary verdict for every
/// interacting pair (trustworthy iff the trustee is honest).
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    pub honest: Vec<bool>,
    pub victims_of: BTreeMap<NodeId, BTreeSet<NodeId>>,
    pub expected: BTreeMap<PairKey, TrustVerdict>,
}

impl GroundTruth {
    pub fn is_honest(&self, node: NodeId) -> bool {
        self.honest[node.index()]
    }

    pub fn malicious_nodes(&self) -> Vec<NodeId> {
        self.honest
            .iter()
            .enumerate()
            .filter(|(_, &h)| !h)
            .map(|(i, _)| NodeId(i as u32))
            .collect()
    }

    /// True when `victim` is exploited by the malicious node `exploiter`.
    pub fn is_victim_of(&self, victim: NodeId, exploiter: NodeId) -> bool {
        self.victims_of
            .get(&exploiter)
            .is_some_and(|set| set.contains(&victim))
    }
}

// phase tags for sub-seed derivation
const PHASE_HONESTY: u64 = 1;
const PHASE_COMMUNITIES: u64 = 2;
const PHASE_FRIENDSHIPS: u64 = 3;
const PHASE_INTERACTIONS: u64 = 4;
const PHASE_VICTIMS: u64 = 5;
const PHASE_ACTIVATION: u64 = 6;

/// How one unordered pair behaves in the generator.
#[derive(Clone, Copy, PartialEq, Eq)]
enum PairBehavior {
    /// Both endpoints honest.
    Honest,
    /// Malicious endpoint serves this partner honestly (camouflage).
    Mark,
    /// Malicious endpoint exploits this partner; `victim` initiates.
    Victim { victim: usize },
    /// Both endpoints malicious; the lower id dominates the exchanges.
    MaliciousPair,
}

/// Generate a synthetic trace and its planted ground truth.
/// Deterministic given the config (including its seed).
pub fn generate_trace(cfg: &SimConfig) -> Result<(SocialGraph, GroundTruth)> {
    cfg.validate()?;
    let n = cfg.node_count as usize;

    // honesty
    let malicious_count = ((cfg.node_count as f64) * cfg.malicious_fraction).round() as usize;
    let mut honest = vec![true; n];
    {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.rng_seed, PHASE_HONESTY));
        for i in rand::seq::index::sample(&mut rng, n, malicious_count.min(n)) {
            honest[i] = false;
        }
    }
    // community memberships
    let mut memberships: Vec<(NodeId, u64)> = Vec::new();
    let mut node_communities: Vec<BTreeSet<u64>> = vec![BTreeSet::new(); n];
    {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.rng_seed, PHASE_COMMUNITIES));
        let c = cfg.community_count as usize;
        let max = (cfg.max_communities_per_node as usize).min(c);
        for (node, joined) in node_communities.iter_mut().enumerate() {
            let count = rng.random_range(1..=max);
            for idx in rand::seq::index::sample(&mut rng, c, count) {
                let community = idx as u64;
                memberships.push((NodeId(node as u32), community));
                joined.insert(community);
            }
        }
    }
    let share_community =
        |a: usize, b: usize| -> bool { !node_communities[a].is_disjoint(&node_communities[b]) };

    // victim sets: each malicious node grooms a share of its honest
    // community mates plus a thinner share of outsiders
    let mut victims_of: BTreeMap<NodeId, BTreeSet<NodeId>> = BTreeMap::new();
    for m in 0..n {
        if honest[m] {
            continue;
        }
        let mates: Vec<usize> = (0..n)
            .filter(|&i| i != m && honest[i] && share_community(m, i))
            .collect();
        let outsiders: Vec<usize> = (0..n)
            .filter(|&i| i != m && honest[i] && !share_community(m, i))
            .collect();
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(
            derive_seed(cfg.rng_seed, PHASE_VICTIMS),
            m as u64,
        ));
        let mut set = BTreeSet::new();
        let mate_count = ((mates.len() as f64) * cfg.victim_fraction).round() as usize;
        for i in rand::seq::index::sample(&mut rng, mates.len(), mate_count.min(mates.len())) {
            set.insert(NodeId(mates[i] as u32));
        }
        let outsider_count =
            ((outsiders.len() as f64) * cfg.cross_victim_fraction).round() as usize;
        for i in
            rand::seq::index::sample(&mut rng, outsiders.len(), outsider_count.min(outsiders.len()))
        {
            set.insert(NodeId(outsiders[i] as u32));
        }
        victims_of.insert(NodeId(m as u32), set);
    }
    let behavior = |a: usize, b: usize| -> PairBehavior {
        match (honest[a], honest[b]) {
            (true, true) => PairBehavior::Honest,
            (false, false) => PairBehavior::MaliciousPair,
            (true, false) => {
                if victims_of[&NodeId(b as u32)].contains(&NodeId(a as u32)) {
                    PairBehavior::Victim { victim: a }
                } else {
                    PairBehavior::Mark
                }
            }
            (false, true) => {
                if victims_of[&NodeId(a as u32)].contains(&NodeId(b as u32)) {
                    PairBehavior::Victim { victim: b }
                } else {
                    PairBehavior::Mark
                }
            }
        }
    };

    // friendships: community-independent (camouflage extends to the
    // social layer, so exploiters look like everyone else)
    let mut friend_pairs: Vec<(NodeId, NodeId)> = Vec::new();
    {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.rng_seed, PHASE_FRIENDSHIPS));
        for a in 0..n {
            for b in (a + 1)..n {
                let p = if share_community(a, b) {
                    cfg.in_community_friend_prob
                } else {
                    cfg.cross_community_friend_prob
                };
                if rng.random_bool(p) {
                    friend_pairs.push((NodeId(a as u32), NodeId(b as u32)));
                }
            }
        }
    }

    // pair activation: which pairs have an interaction relationship at all
    let mut active: Vec<(usize, usize)> = Vec::new();
    {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.rng_seed, PHASE_ACTIVATION));
        for a in 0..n {
            for b in (a + 1)..n {
                let community_based = if share_community(a, b) {
                    cfg.in_community_pair_activation
                } else {
                    cfg.cross_community_pair_activation
                };
                let p = match behavior(a, b) {
                    PairBehavior::Honest => community_based,
                    PairBehavior::Mark => community_based * cfg.mark_pair_activation_scale,
                    PairBehavior::Victim { .. } => cfg.victim_pair_activation,
                    PairBehavior::MaliciousPair => {
                        if share_community(a, b) {
                            cfg.malicious_pair_activation
                        } else {
                            cfg.cross_community_pair_activation
                        }
                    }
                };
                if rng.random_bool(p) {
                    active.push((a, b));
                }
            }
        }
        if active.is_empty() {
            // degenerate small configs: fall back to every pair
            for a in 0..n {
                for b in (a + 1)..n {
                    active.push((a, b));
                }
            }
        }
    }

    // interactions: the budget is spread as evenly as possible over the
    // active pairs (every relationship has comparable depth), then each
    // record gets its direction, volume, success flag, and timestamp
    let mut records: Vec<InteractionRecord> = Vec::with_capacity(cfg.interaction_count as usize);
    {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.rng_seed, PHASE_INTERACTIONS));
        let base = cfg.interaction_count / active.len() as u64;
        let extra = (cfg.interaction_count % active.len() as u64) as usize;
        let mut counts = vec![base; active.len()];
        for idx in rand::seq::index::sample(&mut rng, active.len(), extra) {
            counts[idx] += 1;
        }

        for (pair_idx, &(a, b)) in active.iter().enumerate() {
            let pair_behavior = behavior(a, b);
            for _ in 0..counts[pair_idx] {
                let a_initiates = match pair_behavior {
                    PairBehavior::Honest | PairBehavior::Mark => rng.random_bool(0.5),
                    PairBehavior::Victim { victim } => {
                        rng.random_bool(cfg.victim_direction_skew) == (victim == a)
                    }
                    PairBehavior::MaliciousPair => {
                        rng.random_bool(cfg.malicious_pair_direction_skew)
                    }
                };
                let (source, target) = if a_initiates { (a, b) } else { (b, a) };
                let exploited = match pair_behavior {
                    PairBehavior::Victim { .. } | PairBehavior::MaliciousPair => !honest[target],
                    _ => false,
                };
                let success_prob = if exploited {
                    cfg.malicious_success_prob
                } else {
                    cfg.honest_success_prob
                };
                records.push(InteractionRecord {
                    timestamp: rng.random_range(0..cfg.duration_secs),
                    source: NodeId(source as u32),
                    target: NodeId(target as u32),
                    messages: rng.random_range(1..=cfg.message_volume_max),
                    success: rng.random_bool(success_prob),
                });
            }
        }
    }

    let graph = SocialGraph::from_parts(cfg.node_count, &friend_pairs, &memberships, records)?;
    let expected = graph
        .interacting_pairs()
        .into_iter()
        .map(|pair| (pair, TrustVerdict::from_bool(honest[pair.trustee.index()])))
        .collect();
    Ok((
        graph,
        GroundTruth {
            honest,
            victims_of,
            expected,
        },
    ))
}

// ---------------------------------------------------------------------------
// Attacks
// ---------------------------------------------------------------------------

/// The adversarial behaviors the harness can inject.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttackKind {
    /// Attackers report trustworthy opinions about malicious trustees.
    BallotStuffing,
    /// Attackers report untrustworthy opinions about honest trustees.
    BadMouthing,
    /// Attackers rewrite failed interactions where they were the trustee
    /// as successes (trace-level).
    SelfPromoting,
    /// Attackers shed the oldest part of their interaction history
    /// (trace-level).
    Whitewashing,
    None,
}

impl AttackKind {
    pub fn name(self) -> &'static str {
        match self {
            AttackKind::BallotStuffing => "ballot_stuffing",
            AttackKind::BadMouthing => "bad_mouthing",
            AttackKind::SelfPromoting => "self_promoting",
            AttackKind::Whitewashing => "whitewashing",
            AttackKind::None => "none",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        [
            AttackKind::BallotStuffing,
            AttackKind::BadMouthing,
            AttackKind::SelfPromoting,
            AttackKind::Whitewashing,
            AttackKind::None,
        ]
        .into_iter()
        .find(|k| k.name() == name)
    }

    /// True for attacks that rewrite the interaction log before feature
    /// extraction rather than the direct-trust table.
    pub fn is_trace_level(self) -> bool {
        matches!(self, AttackKind::SelfPromoting | AttackKind::Whitewashing)
    }
}

/// Attack configuration: which behavior, how many attackers, how hard.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AttackSpec {
    pub kind: AttackKind,
    pub attacker_fraction: f64,
    pub intensity: f64,
}

impl AttackSpec {
    pub fn none() -> Self {
        Self {
            kind: AttackKind::None,
            attacker_fraction: 0.0,
            intensity: 0.0,
        }
    }

    pub fn new(kind: AttackKind, attacker_fraction: f64, intensity: f64) -> Result<Self> {
        if !attacker_fraction.is_finite() || !(0.0..1.0).contains(&attacker_fraction) {
            return Err(Error::Config(format!(
                "attacker_fraction must be in [0, 1), got {attacker_fraction}"
            )));
        }
        if !intensity.is_finite() || !(0.0..=1.0).contains(&intensity) {
            return Err(Error::Config(format!(
                "intensity must be in [0, 1], got {intensity}"
            )));
        }
        Ok(Self {
            kind,
            attacker_fraction,
            intensity,
        })
    }
}

/// Attacker nodes: a seeded uniform sample of `round(fraction * n)` nodes.
pub fn select_attackers(node_count: u32, spec: &AttackSpec, rng_seed: u64) -> BTreeSet<NodeId> {
    let n = node_count as usize;
    let count = ((node_count as f64) * spec.attacker_fraction).round() as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(rng_seed, 0x41));
    rand::seq::index::sample(&mut rng, n, count.min(n))
        .into_iter()
        .map(|i| NodeId(i as u32))
        .collect()
}

/// Seeded prefix selection: a fixed permutation of `items` is drawn from
/// the seed and the first `ceil(intensity * len)` entries are returned,
/// so a higher intensity always selects a superset.
fn seeded_prefix<T: Copy>(items: &[T], intensity: f64, rng_seed: u64) -> Vec<T> {
    let mut order: Vec<T> = items.to_vec();
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    use rand::seq::SliceRandom;
    order.shuffle(&mut rng);
    let count = ((items.len() as f64) * intensity).ceil() as usize;
    order.truncate(count.min(items.len()));
    order
}

/// Rewrite the direct-trust table for the recommendation attacks
/// (ballot stuffing and bad mouthing). Trace-level attack kinds and
/// `None` return the table unchanged; see [`apply_trace_attack`].
pub fn apply_attack(
    labels_by_pair: &BTreeMap<PairKey, TrustLabel>,
    graph: &SocialGraph,
    truth: &GroundTruth,
    spec: &AttackSpec,
    rng_seed: u64,
) -> BTreeMap<PairKey, TrustLabel> {
    let mut labels = labels_by_pair.clone();
    let (target_honest, forced_label) = match spec.kind {
        AttackKind::BallotStuffing => (false, TrustLabel::Trustworthy),
        AttackKind::BadMouthing => (true, TrustLabel::Untrustworthy),
        _ => return labels,
    };
    if spec.intensity == 0.0 {
        return labels;
    }
    for attacker in select_attackers(graph.node_count(), spec, rng_seed) {
        let opinions: Vec<PairKey> = labels
            .keys()
            .filter(|pair| {
                pair.trustor == attacker && truth.is_honest(pair.trustee) == target_honest
            })
            .copied()
            .collect();
        let chosen = seeded_prefix(
            &opinions,
            spec.intensity,
            derive_seed(rng_seed, 0x1000 + attacker.0 as u64),
        );
        for pair in chosen {
            labels.insert(pair, forced_label);
        }
    }
    labels
}

/// Rewrite the interaction log for the trace-level attacks
/// (self promotion and whitewashing). Recommendation attack kinds and
/// `None` return the graph unchanged.
pub fn apply_trace_attack(
    graph: &SocialGraph,
    _truth: &GroundTruth,
    spec: &AttackSpec,
    rng_seed: u64,
) -> Result<SocialGraph> {
    if !spec.kind.is_trace_level() || spec.intensity == 0.0 {
        return Ok(graph.clone());
    }
    let attackers = select_attackers(graph.node_count(), spec, rng_seed);
    let mut records: Vec<InteractionRecord> = graph.interactions().to_vec();

    match spec.kind {
        AttackKind::SelfPromoting => {
            for &attacker in &attackers {
                let failed_toward_self: Vec<usize> = records
                    .iter()
                    .enumerate()
                    .filter(|(_, r)| r.target == attacker && !r.success)
                    .map(|(i, _)| i)
                    .collect();
                let chosen = seeded_prefix(
                    &failed_toward_self,
                    spec.intensity,
                    derive_seed(rng_seed, 0x2000 + attacker.0 as u64),
                );
                for i in chosen {
                    records[i].success = true;
                }
            }
        }
        AttackKind::Whitewashing => {
            // keep only each attacker's most recent (1 - intensity) share
            let mut drop = vec![false; records.len()];
            for &attacker in &attackers {
                let involved: Vec<usize> = records
                    .iter()
                    .enumerate()
                    .filter(|(_, r)| r.source == attacker || r.target == attacker)
                    .map(|(i, _)| i)
                    .collect();
                let keep = ((involved.len() as f64) * (1.0 - spec.intensity)).ceil() as usize;
                let drop_count = involved.len().saturating_sub(keep);
                // records are timestamp-sorted, so the oldest come first
                for &i in involved.iter().take(drop_count) {
                    drop[i] = true;
                }
            }
            records = records
                .into_iter()
                .zip(drop)
                .filter(|(_, d)| !d)
                .map(|(r, _)| r)
                .collect();
        }
        _ => unreachable!(),
    }

    let friend_pairs = graph.friend_pairs();
    let memberships = graph.membership_pairs();
    SocialGraph::from_parts(graph.node_count(), &friend_pairs, &memberships, records)
}

// ---------------------------------------------------------------------------
// Ground-truth CSV
// ---------------------------------------------------------------------------

pub const GROUND_TRUTH_NODES_FILE: &str = "ground_truth_nodes.csv";
pub const GROUND_TRUTH_PAIRS_FILE: &str = "ground_truth_pairs.csv";
pub const GROUND_TRUTH_NODES_HEADER: &str = "node_id,honest";
pub const GROUND_TRUTH_PAIRS_HEADER: &str = "trustor,trustee,expected";

/// Write the two ground-truth tables (`node_id,honest` and
/// `trustor,trustee,expected`) into `dir`.
pub fn write_ground_truth(dir: &Path, truth: &GroundTruth) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let nodes_path = dir.join(GROUND_TRUTH_NODES_FILE);
    let mut body = String::from(GROUND_TRUTH_NODES_HEADER);
    body.push('\n');
    for (i, honest) in truth.honest.iter().enumerate() {
        body.push_str(&format!("{i},{}\n", u8::from(*honest)));
    }
    std::fs::write(&nodes_path, body).map_err(|e| Error::io(&nodes_path, e))?;

    let pairs_path = dir.join(GROUND_TRUTH_PAIRS_FILE);
    let mut body = String::from(GROUND_TRUTH_PAIRS_HEADER);
    body.push('\n');
    for (pair, expected) in &truth.expected {
        body.push_str(&format!("{},{},{}\n", pair.trustor, pair.trustee, expected));
    }
    std::fs::write(&pairs_path, body).map_err(|e| Error::io(&pairs_path, e))
}

/// Read the per-node honesty table (`node_id,honest`).
/// (`trustor,trustee,expected` parsing lives next to the sweep that
/// consumes it, in `aggregate::read_ground_truth_pairs`.)
pub fn read_ground_truth_nodes<R: Read>(input: R) -> Result<BTreeMap<NodeId, bool>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(input);
    let parse_err = |line: u64, message: String| Error::Parse {
        file: GROUND_TRUTH_NODES_FILE.to_string(),
        line,
        message,
    };
    {
        let headers = reader.headers().map_err(|e| parse_err(1, e.to_string()))?;
        let got = headers.iter().collect::<Vec<_>>().join(",");
        if got != GROUND_TRUTH_NODES_HEADER {
            return Err(parse_err(
                1,
                format!("expected header `{GROUND_TRUTH_NODES_HEADER}`, got `{got}`"),
            ));
        }
    }
    let mut out = BTreeMap::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map(|p| p.line()).unwrap_or(0);
            parse_err(line, e.to_string())
        })?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        if record.len() != 2 {
            return Err(parse_err(
                line,
                format!("expected 2 fields, got {}", record.len()),
            ));
        }
        let raw = record.get(0).unwrap_or("");
        let node = raw
            .parse::<u32>()
            .map(NodeId)
            .map_err(|_| parse_err(line, format!("field `node_id` is not a node id: `{raw}`")))?;
        let honest = match record.get(1) {
            Some("0") => false,
            Some("1") => true,
            other => {
                return Err(parse_err(
                    line,
                    format!("field `honest` must be 0 or 1, got `{}`", other.unwrap_or("")),
                ))
            }
        };
        if out.insert(node, honest).is_some() {
            return Err(parse_err(line, format!("duplicate node id {node}")));
        }
    }
    Ok(out)
}

/// Emit the four trace CSVs plus both ground-truth tables into `dir`.
pub fn write_sim_outputs(dir: &Path, graph: &SocialGraph, truth: &GroundTruth) -> Result<()> {
    crate::graph::write_trace(dir, graph)?;
    write_ground_truth(dir, truth)
}
